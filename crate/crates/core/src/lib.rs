//! Verification of graph transformation systems under adverse conditions.
//!
//! Graphs are rewritten with double-pushout rules guarded by nested
//! application conditions. A system and an environment are combined by a
//! regulation automaton into a joint system whose bounded, isomorphism-reduced
//! state space is checked against k-step, last-minute and weak k-step
//! correctness, either directly or through LTL and CTL model checking.

pub mod canon;
pub mod condition;
pub mod correctness;
pub mod ctl;
pub mod graph;
pub mod ltl;
pub mod morphism;
pub mod regulation;
pub mod rewrite;
pub mod statespace;
pub mod temporal;

pub use canon::{canonical_key, CanonicalKey};
pub use condition::{graph_satisfies, morphism_satisfies, Condition, ConditionError};
pub use correctness::{
    build_formula, run_query, validate_trace, CorrectnessQuery, CorrectnessReport, Formula, Kind,
    Method,
};
pub use ctl::{ctl_check, Ctl};
pub use graph::{Graph, GraphError, LabelSet, TagError};
pub use ltl::{ltl_check, Ltl};
pub use morphism::{enumerate_injective_morphisms, Morphism};
pub use regulation::{build_annotated, build_joint, JointModel, RegulationAutomaton};
pub use rewrite::{apply_at, direct_transformations, PlainRule, Role, Rule, RuleError};
pub use statespace::{complete_lts, explore, ExplorationLimits, Lts};
pub use temporal::{CheckError, Prop, Status, Verdict};
