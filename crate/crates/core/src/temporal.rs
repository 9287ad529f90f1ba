//! Atoms, verdicts and errors shared by the LTL and CTL checkers.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::condition::{holds_in, Condition, ConditionError};
use crate::graph::{Graph, MARK_ENV, MARK_SYS};
use crate::statespace::{Lasso, Lts};

/// A named graph constraint used as an atomic proposition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prop {
    pub name: String,
    pub constraint: Condition,
}

impl Prop {
    pub fn new(name: impl Into<String>, constraint: Condition) -> Self {
        Prop {
            name: name.into(),
            constraint,
        }
    }

    /// `s`: the last applied rule was a system rule.
    pub fn sys() -> Self {
        Prop::new("s", marking_present(MARK_SYS))
    }

    /// `e`: the last applied rule was an environment rule.
    pub fn env() -> Self {
        Prop::new("e", marking_present(MARK_ENV))
    }

    pub fn holds(&self, g: &Graph) -> bool {
        holds_in(g, &self.constraint)
    }
}

fn marking_present(label: &str) -> Condition {
    let mut g = Graph::new();
    g.add_node(label);
    Condition::exists_graph(g)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Status {
    Holds,
    Violated,
    Unknown,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Holds => "HOLDS",
            Status::Violated => "VIOLATED",
            Status::Unknown => "UNKNOWN",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    Lasso(Lasso),
    /// Finite path of state indices starting at an initial state.
    Path(Vec<usize>),
}

impl Witness {
    /// States in order; a lasso lists its prefix then one unrolling of its cycle.
    pub fn states(&self) -> Vec<usize> {
        match self {
            Witness::Lasso(l) => l.prefix.iter().chain(l.cycle.iter()).copied().collect(),
            Witness::Path(p) => p.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub status: Status,
    pub witness: Option<Witness>,
    pub note: String,
}

impl Verdict {
    pub fn holds() -> Self {
        Verdict {
            status: Status::Holds,
            witness: None,
            note: String::new(),
        }
    }

    pub fn violated(witness: Witness, note: impl Into<String>) -> Self {
        Verdict {
            status: Status::Violated,
            witness: Some(witness),
            note: note.into(),
        }
    }

    pub fn unknown(note: impl Into<String>) -> Self {
        Verdict {
            status: Status::Unknown,
            witness: None,
            note: note.into(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CheckError {
    #[error("state {0} is fully expanded but has no successor; complete the LTS first")]
    NotCompleted(usize),
    #[error("atom {0}: {1}")]
    InvalidAtom(String, ConditionError),
    #[error("naive oracle refuses LTSs above {limit} states (got {states})")]
    OracleTooLarge { states: usize, limit: usize },
}

/// Truth values of each atom at each LTS state, computed once.
pub(crate) struct AtomTable {
    index: BTreeMap<String, usize>,
    values: Vec<Vec<bool>>,
}

impl AtomTable {
    pub(crate) fn build<'a>(
        lts: &Lts,
        props: impl IntoIterator<Item = &'a Prop>,
    ) -> Result<Self, CheckError> {
        let mut index = BTreeMap::new();
        let mut values = Vec::new();
        for p in props {
            if index.contains_key(&p.name) {
                continue;
            }
            p.constraint
                .validate(&Graph::new())
                .map_err(|e| CheckError::InvalidAtom(p.name.clone(), e))?;
            index.insert(p.name.clone(), values.len());
            values.push(lts.states.iter().map(|s| p.holds(&s.graph)).collect());
        }
        Ok(AtomTable { index, values })
    }

    pub(crate) fn get(&self, name: &str, state: usize) -> bool {
        self.values[self.index[name]][state]
    }
}

/// Settled states must have a successor.
pub(crate) fn require_completed(lts: &Lts) -> Result<(), CheckError> {
    match lts.deadlocks().first() {
        Some(&s) => Err(CheckError::NotCompleted(s)),
        None => Ok(()),
    }
}

pub(crate) fn incomplete_note(lts: &Lts) -> String {
    match &lts.truncation {
        Some(limit) => format!("state space truncated by {limit}"),
        None => "state space not fully explored".to_string(),
    }
}
