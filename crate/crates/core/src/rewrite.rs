//! Double-pushout rule application with application conditions.

use std::fmt;
use std::ops::ControlFlow;

use thiserror::Error;

use crate::condition::{eval, Condition, ConditionError};
use crate::graph::Graph;
use crate::morphism::{enumerate_injective_morphisms, for_each_extension, Morphism, MorphismError, PartialMap};

/// Which rule set a rule belongs to. Skip steps from the completion carry
/// their own role so they never count as system or environment steps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    System,
    Environment,
    Skip,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::System => "system",
            Role::Environment => "environment",
            Role::Skip => "skip",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A span `L <- K -> R` of injective morphisms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlainRule {
    pub name: String,
    pub left: Graph,
    pub interface: Graph,
    pub right: Graph,
    pub k_to_left: Morphism,
    pub k_to_right: Morphism,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleError {
    #[error("rule {rule}: interface does not embed into the {side} side: {source}")]
    Span {
        rule: String,
        side: &'static str,
        source: MorphismError,
    },
    #[error("rule {rule}: application condition is not over the left side: {source}")]
    Condition {
        rule: String,
        source: ConditionError,
    },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RewriteError {
    #[error("match is not an injective morphism from the left side: {0}")]
    MatchInvalid(MorphismError),
    #[error("application condition violated")]
    ApplicationConditionViolated,
    #[error("dangling edge {0} would remain after deletion")]
    DanglingEdge(usize),
}

impl PlainRule {
    pub fn new(
        name: impl Into<String>,
        left: Graph,
        interface: Graph,
        right: Graph,
        k_to_left: Morphism,
        k_to_right: Morphism,
    ) -> Result<Self, RuleError> {
        let name = name.into();
        k_to_left
            .validate(&interface, &left)
            .map_err(|source| RuleError::Span {
                rule: name.clone(),
                side: "left",
                source,
            })?;
        k_to_right
            .validate(&interface, &right)
            .map_err(|source| RuleError::Span {
                rule: name.clone(),
                side: "right",
                source,
            })?;
        Ok(PlainRule {
            name,
            left,
            interface,
            right,
            k_to_left,
            k_to_right,
        })
    }

    /// `Skip := ⟨∅ ⇒ ∅⟩`.
    pub fn skip() -> Self {
        PlainRule {
            name: "Skip".to_string(),
            left: Graph::new(),
            interface: Graph::new(),
            right: Graph::new(),
            k_to_left: Morphism::empty(),
            k_to_right: Morphism::empty(),
        }
    }

    /// The inverse rule `R <- K -> L`.
    pub fn invert(&self) -> PlainRule {
        PlainRule {
            name: self.name.clone(),
            left: self.right.clone(),
            interface: self.interface.clone(),
            right: self.left.clone(),
            k_to_left: self.k_to_right.clone(),
            k_to_right: self.k_to_left.clone(),
        }
    }

    /// Appends `extra_left` to L and `extra_right` to R; both are outside K,
    /// so they are deleted and recreated.
    pub fn with_disjoint(&self, extra_left: &Graph, extra_right: &Graph) -> PlainRule {
        PlainRule {
            name: self.name.clone(),
            left: self.left.disjoint_union(extra_left),
            interface: self.interface.clone(),
            right: self.right.disjoint_union(extra_right),
            k_to_left: self.k_to_left.clone(),
            k_to_right: self.k_to_right.clone(),
        }
    }
}

/// Provenance of a rule built from an automaton transition.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RuleOrigin {
    pub base: String,
    pub from_state: String,
    pub to_state: String,
    pub premarking: Option<String>,
}

/// A plain rule with an application condition over its left side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub plain: PlainRule,
    pub ac: Condition,
    pub role: Role,
    pub origin: Option<RuleOrigin>,
}

impl Rule {
    pub fn new(plain: PlainRule, ac: Condition, role: Role) -> Result<Self, RuleError> {
        ac.validate(&plain.left)
            .map_err(|source| RuleError::Condition {
                rule: plain.name.clone(),
                source,
            })?;
        Ok(Rule {
            plain,
            ac,
            role,
            origin: None,
        })
    }

    pub fn unconditional(plain: PlainRule, role: Role) -> Self {
        Rule {
            plain,
            ac: Condition::True,
            role,
            origin: None,
        }
    }

    pub fn name(&self) -> &str {
        &self.plain.name
    }

    /// Name of the underlying system or environment rule.
    pub fn base_name(&self) -> &str {
        self.origin
            .as_ref()
            .map_or(self.plain.name.as_str(), |o| o.base.as_str())
    }
}

/// Result graph of one application and the comatch `R -> H`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub graph: Graph,
    pub comatch: Morphism,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransformationStep {
    pub rule_index: usize,
    pub rule_name: String,
    pub role: Role,
    /// Position of the match in the rule's canonical match enumeration.
    pub match_index: usize,
    pub matching: Morphism,
    pub before: Graph,
    pub after: Graph,
}

/// Elements of the host deleted by applying `rule` at `m`, and the first
/// dangling edge if the pushout complement does not exist.
fn deletion(rule: &PlainRule, g: &Graph, m: &Morphism) -> (Vec<bool>, Vec<bool>, Option<usize>) {
    let mut keep_node = vec![true; g.node_count()];
    let mut keep_edge = vec![true; g.edge_count()];
    let mut in_k_nodes = vec![false; rule.left.node_count()];
    for &x in &rule.k_to_left.nodes {
        in_k_nodes[x] = true;
    }
    let mut in_k_edges = vec![false; rule.left.edge_count()];
    for &x in &rule.k_to_left.edges {
        in_k_edges[x] = true;
    }
    for (x, &kept) in in_k_nodes.iter().enumerate() {
        if !kept {
            keep_node[m.nodes[x]] = false;
        }
    }
    for (x, &kept) in in_k_edges.iter().enumerate() {
        if !kept {
            keep_edge[m.edges[x]] = false;
        }
    }
    let dangling = g
        .edges()
        .iter()
        .enumerate()
        .find(|(e, edge)| keep_edge[*e] && (!keep_node[edge.src] || !keep_node[edge.tgt]))
        .map(|(e, _)| e);
    (keep_node, keep_edge, dangling)
}

fn satisfies_gluing(rule: &Rule, g: &Graph, m: &Morphism) -> Result<(), RewriteError> {
    if !eval(m, g, &rule.ac) {
        return Err(RewriteError::ApplicationConditionViolated);
    }
    if let (_, _, Some(e)) = deletion(&rule.plain, g, m) {
        return Err(RewriteError::DanglingEdge(e));
    }
    Ok(())
}

/// Applies `rule` at the injective match `m: L -> g`.
pub fn apply_at(rule: &Rule, g: &Graph, m: &Morphism) -> Result<Derivation, RewriteError> {
    m.validate(&rule.plain.left, g)
        .map_err(RewriteError::MatchInvalid)?;
    satisfies_gluing(rule, g, m)?;
    Ok(pushout(&rule.plain, g, m))
}

/// Both pushouts; the gluing condition must already hold.
fn pushout(rule: &PlainRule, g: &Graph, m: &Morphism) -> Derivation {
    let (keep_node, keep_edge, _) = deletion(rule, g, m);
    let (mut h, node_map, edge_map) = g.retain(&keep_node, &keep_edge);

    let mut r_node_img: Vec<Option<usize>> = vec![None; rule.right.node_count()];
    for (k, &rn) in rule.k_to_right.nodes.iter().enumerate() {
        let host = m.nodes[rule.k_to_left.nodes[k]];
        r_node_img[rn] = node_map[host];
    }
    for (rn, img) in r_node_img.iter_mut().enumerate() {
        if img.is_none() {
            *img = Some(h.add_node(rule.right.node_label(rn).to_string()));
        }
    }
    let mut r_edge_img: Vec<Option<usize>> = vec![None; rule.right.edge_count()];
    for (k, &re) in rule.k_to_right.edges.iter().enumerate() {
        let host = m.edges[rule.k_to_left.edges[k]];
        r_edge_img[re] = edge_map[host];
    }
    for (re, img) in r_edge_img.iter_mut().enumerate() {
        if img.is_none() {
            let e = rule.right.edge(re);
            let src = r_node_img[e.src].unwrap();
            let tgt = r_node_img[e.tgt].unwrap();
            *img = Some(h.add_edge(src, tgt, e.label.clone()).unwrap());
        }
    }
    Derivation {
        graph: h,
        comatch: Morphism {
            nodes: r_node_img.into_iter().map(Option::unwrap).collect(),
            edges: r_edge_img.into_iter().map(Option::unwrap).collect(),
        },
    }
}

/// All direct transformations of `g`, in rule declaration order and then
/// match order. One step per (rule, valid match).
pub fn direct_transformations(rules: &[Rule], g: &Graph) -> Vec<TransformationStep> {
    let mut steps = Vec::new();
    for (ri, rule) in rules.iter().enumerate() {
        for (mi, m) in enumerate_injective_morphisms(&rule.plain.left, g)
            .into_iter()
            .enumerate()
        {
            if satisfies_gluing(rule, g, &m).is_err() {
                continue;
            }
            let d = pushout(&rule.plain, g, &m);
            steps.push(TransformationStep {
                rule_index: ri,
                rule_name: rule.name().to_string(),
                role: rule.role,
                match_index: mi,
                matching: m,
                before: g.clone(),
                after: d.graph,
            });
        }
    }
    steps
}

/// Whether some rule is applicable to `g`.
pub fn is_applicable(rule: &Rule, g: &Graph) -> bool {
    let left = &rule.plain.left;
    for_each_extension(left, g, &PartialMap::unconstrained(left), |m| {
        if satisfies_gluing(rule, g, m).is_ok() {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })
    .is_break()
}

/// True iff no rule of `rules` is applicable, i.e. exactly when the Skip rule
/// of the completion applies.
pub fn is_deadlocked(rules: &[Rule], g: &Graph) -> bool {
    !rules.iter().any(|r| is_applicable(r, g))
}

pub fn invert(p: &PlainRule) -> PlainRule {
    p.invert()
}
