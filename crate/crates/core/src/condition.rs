//! Nested graph conditions and their satisfaction semantics.
//!
//! A condition lives over a context graph `P`. `Exists` carries an injective
//! extension `a: P -> C` together with `C` and a nested condition over `C`.
//! Constraints are conditions over the empty graph.

use std::ops::ControlFlow;

use thiserror::Error;

use crate::graph::Graph;
use crate::morphism::{for_each_extension, Morphism, MorphismError, PartialMap};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Condition {
    True,
    Exists {
        extension: Morphism,
        codomain: Graph,
        nested: Box<Condition>,
    },
    Not(Box<Condition>),
    /// Empty conjunction is `True`.
    And(Vec<Condition>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConditionError {
    #[error("context mismatch: {0}")]
    ContextMismatch(String),
    #[error("invalid extension morphism: {0}")]
    Extension(#[from] MorphismError),
}

impl Condition {
    pub fn false_() -> Self {
        Condition::Not(Box::new(Condition::True))
    }

    pub fn exists(extension: Morphism, codomain: Graph, nested: Condition) -> Self {
        Condition::Exists {
            extension,
            codomain,
            nested: Box::new(nested),
        }
    }

    /// `∃ C` over the empty context.
    pub fn exists_graph(codomain: Graph) -> Self {
        Condition::exists(Morphism::empty(), codomain, Condition::True)
    }

    pub fn negate(self) -> Self {
        Condition::Not(Box::new(self))
    }

    pub fn and(parts: Vec<Condition>) -> Self {
        Condition::And(parts)
    }

    pub fn or(parts: Vec<Condition>) -> Self {
        Condition::And(parts.into_iter().map(Condition::negate).collect()).negate()
    }

    pub fn implies(premise: Condition, conclusion: Condition) -> Self {
        Condition::or(vec![premise.negate(), conclusion])
    }

    /// `∀(a, c) := ¬∃(a, ¬c)`.
    pub fn forall(extension: Morphism, codomain: Graph, nested: Condition) -> Self {
        Condition::exists(extension, codomain, nested.negate()).negate()
    }

    /// Checks that every extension is an injective morphism from its context.
    pub fn validate(&self, context: &Graph) -> Result<(), ConditionError> {
        match self {
            Condition::True => Ok(()),
            Condition::Exists {
                extension,
                codomain,
                nested,
            } => {
                extension.validate(context, codomain).map_err(|e| match e {
                    MorphismError::DomainSize { .. } => ConditionError::ContextMismatch(e.to_string()),
                    other => ConditionError::Extension(other),
                })?;
                nested.validate(codomain)
            }
            Condition::Not(c) => c.validate(context),
            Condition::And(cs) => cs.iter().try_for_each(|c| c.validate(context)),
        }
    }

    /// Transports the condition along the inclusion `P -> P + extra`.
    ///
    /// Every codomain `C` becomes `C + extra`, with the extension mapping the
    /// extra part identically.
    pub fn extend_context(&self, context: &Graph, extra: &Graph) -> Condition {
        match self {
            Condition::True => Condition::True,
            Condition::Exists {
                extension,
                codomain,
                nested,
            } => {
                let new_codomain = codomain.disjoint_union(extra);
                let mut ext = extension.clone();
                ext.nodes
                    .extend((0..extra.node_count()).map(|n| codomain.node_count() + n));
                ext.edges
                    .extend((0..extra.edge_count()).map(|e| codomain.edge_count() + e));
                debug_assert_eq!(ext.nodes.len(), context.node_count() + extra.node_count());
                Condition::Exists {
                    extension: ext,
                    codomain: new_codomain,
                    nested: Box::new(nested.extend_context(codomain, extra)),
                }
            }
            Condition::Not(c) => Condition::Not(Box::new(c.extend_context(context, extra))),
            Condition::And(cs) => Condition::And(
                cs.iter()
                    .map(|c| c.extend_context(context, extra))
                    .collect(),
            ),
        }
    }

    /// Nesting depth of existential quantifiers.
    pub fn depth(&self) -> usize {
        match self {
            Condition::True => 0,
            Condition::Exists { nested, .. } => 1 + nested.depth(),
            Condition::Not(c) => c.depth(),
            Condition::And(cs) => cs.iter().map(Condition::depth).max().unwrap_or(0),
        }
    }
}

/// `p ⊨ c` for an injective `p: context -> host`.
pub fn morphism_satisfies(
    p: &Morphism,
    context: &Graph,
    host: &Graph,
    c: &Condition,
) -> Result<bool, ConditionError> {
    p.validate(context, host)
        .map_err(|e| ConditionError::ContextMismatch(e.to_string()))?;
    c.validate(context)?;
    Ok(eval(p, host, c))
}

/// `g ⊨ c` for a constraint `c`.
pub fn graph_satisfies(g: &Graph, c: &Condition) -> Result<bool, ConditionError> {
    morphism_satisfies(&Morphism::empty(), &Graph::new(), g, c)
}

/// Unchecked evaluation; `p` and `c` must already be validated.
pub(crate) fn eval(p: &Morphism, host: &Graph, c: &Condition) -> bool {
    match c {
        Condition::True => true,
        Condition::Exists {
            extension,
            codomain,
            nested,
        } => {
            let fixed = PartialMap::along(codomain, extension, p);
            for_each_extension(codomain, host, &fixed, |q| {
                if eval(q, host, nested) {
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            })
            .is_break()
        }
        Condition::Not(inner) => !eval(p, host, inner),
        Condition::And(cs) => cs.iter().all(|c| eval(p, host, c)),
    }
}

/// Constraint evaluation without re-validation, for hot loops over many
/// states. The constraint must have passed [`Condition::validate`] against
/// the empty graph.
pub fn holds_in(g: &Graph, c: &Condition) -> bool {
    eval(&Morphism::empty(), g, c)
}
