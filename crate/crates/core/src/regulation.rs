//! Regulation automata and the joint / annotated joint rule sets they induce.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::graph::{Graph, LabelSet, MARK_ENV, MARK_SYS, MARK_TOP};
use crate::rewrite::{Role, Rule, RuleOrigin};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub from: String,
    pub to: String,
    /// Names of the selected system and environment rules.
    pub select: BTreeSet<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegulationAutomaton {
    pub states: Vec<String>,
    pub start: String,
    pub transitions: Vec<Transition>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegulationError {
    #[error("unknown automaton state {0}")]
    UnknownState(String),
    #[error("transition {0} -> {1} is declared twice")]
    DuplicateTransition(String, String),
    #[error("unknown rule name {0}")]
    UnknownRuleName(String),
    #[error("rule name {0} is used by both system and environment")]
    SharedRuleName(String),
    #[error("rule {0} has role {1}, expected {2}")]
    WrongRole(String, Role, Role),
}

impl RegulationAutomaton {
    pub fn new(
        states: Vec<String>,
        start: impl Into<String>,
        transitions: Vec<Transition>,
    ) -> Result<Self, RegulationError> {
        let start = start.into();
        let known: BTreeSet<&String> = states.iter().collect();
        if !known.contains(&start) {
            return Err(RegulationError::UnknownState(start));
        }
        let mut seen = BTreeSet::new();
        for t in &transitions {
            for q in [&t.from, &t.to] {
                if !known.contains(q) {
                    return Err(RegulationError::UnknownState(q.clone()));
                }
            }
            if !seen.insert((&t.from, &t.to)) {
                return Err(RegulationError::DuplicateTransition(
                    t.from.clone(),
                    t.to.clone(),
                ));
            }
        }
        Ok(RegulationAutomaton {
            states,
            start,
            transitions,
        })
    }

    /// The one-state automaton looping on every rule in `rules`.
    pub fn trivial(rules: &[Rule]) -> Self {
        RegulationAutomaton {
            states: vec!["q0".to_string()],
            start: "q0".to_string(),
            transitions: vec![Transition {
                from: "q0".to_string(),
                to: "q0".to_string(),
                select: rules.iter().map(|r| r.name().to_string()).collect(),
            }],
        }
    }

    pub fn state_labels(&self) -> LabelSet {
        self.states.iter().cloned().collect()
    }

    /// States reachable from the start state, optionally only through
    /// transitions with a nonempty selection.
    fn reachable(&self, skip_empty: bool) -> BTreeSet<String> {
        let mut seen = BTreeSet::from([self.start.clone()]);
        let mut queue = VecDeque::from([self.start.clone()]);
        while let Some(q) = queue.pop_front() {
            for t in &self.transitions {
                if t.from == q && !(skip_empty && t.select.is_empty()) && seen.insert(t.to.clone()) {
                    queue.push_back(t.to.clone());
                }
            }
        }
        seen
    }

    /// No transition selects the empty set and every state other than the
    /// start is reachable from it.
    pub fn is_proper(&self) -> bool {
        if self.transitions.iter().any(|t| t.select.is_empty()) {
            return false;
        }
        let reach = self.reachable(false);
        self.states.iter().all(|q| reach.contains(q))
    }

    /// Restricts to states reachable without crossing empty selections and
    /// drops empty-selection transitions.
    pub fn properize(&self) -> RegulationAutomaton {
        let keep = self.reachable(true);
        RegulationAutomaton {
            states: self
                .states
                .iter()
                .filter(|q| keep.contains(*q))
                .cloned()
                .collect(),
            start: self.start.clone(),
            transitions: self
                .transitions
                .iter()
                .filter(|t| !t.select.is_empty() && keep.contains(&t.from) && keep.contains(&t.to))
                .cloned()
                .collect(),
        }
    }

    /// `Q_pre(r)`: states with an outgoing transition selecting `r`.
    pub fn pre_states(&self, rule: &str) -> BTreeSet<&str> {
        self.transitions
            .iter()
            .filter(|t| t.select.contains(rule))
            .map(|t| t.from.as_str())
            .collect()
    }

    /// `Q_post(r)`: states with an incoming transition selecting `r`.
    pub fn post_states(&self, rule: &str) -> BTreeSet<&str> {
        self.transitions
            .iter()
            .filter(|t| t.select.contains(rule))
            .map(|t| t.to.as_str())
            .collect()
    }
}

/// System, environment and the automaton regulating them.
#[derive(Clone, Debug)]
pub struct JointModel {
    pub system: Vec<Rule>,
    pub environment: Vec<Rule>,
    pub automaton: RegulationAutomaton,
}

impl JointModel {
    pub fn new(
        system: Vec<Rule>,
        environment: Vec<Rule>,
        automaton: RegulationAutomaton,
    ) -> Result<Self, RegulationError> {
        for r in &system {
            if r.role != Role::System {
                return Err(RegulationError::WrongRole(r.name().into(), r.role, Role::System));
            }
        }
        for r in &environment {
            if r.role != Role::Environment {
                return Err(RegulationError::WrongRole(
                    r.name().into(),
                    r.role,
                    Role::Environment,
                ));
            }
        }
        let sys: BTreeSet<&str> = system.iter().map(Rule::name).collect();
        if let Some(r) = environment.iter().find(|r| sys.contains(r.name())) {
            return Err(RegulationError::SharedRuleName(r.name().to_string()));
        }
        let m = JointModel {
            system,
            environment,
            automaton,
        };
        for t in &m.automaton.transitions {
            for name in &t.select {
                if m.rule(name).is_none() {
                    return Err(RegulationError::UnknownRuleName(name.clone()));
                }
            }
        }
        Ok(m)
    }

    /// System rules first, then environment rules, in declaration order.
    pub fn rules(&self) -> impl Iterator<Item = &Rule> {
        self.system.iter().chain(self.environment.iter())
    }

    pub fn rule(&self, name: &str) -> Option<&Rule> {
        self.rules().find(|r| r.name() == name)
    }

    pub fn state_labels(&self) -> LabelSet {
        self.automaton.state_labels()
    }

    /// `⟨G, q0⟩`.
    pub fn joint_initial(&self, g: &Graph) -> Graph {
        let mut out = g.clone();
        out.add_node(self.automaton.start.clone());
        out
    }

    /// `⟨G, q0, ⊤⟩`.
    pub fn annotated_initial(&self, g: &Graph) -> Graph {
        let mut out = self.joint_initial(g);
        out.add_node(MARK_TOP);
        out
    }
}

/// The marking a rule leaves behind.
pub fn marking_of(role: Role) -> &'static str {
    match role {
        Role::System => MARK_SYS,
        Role::Environment => MARK_ENV,
        Role::Skip => MARK_TOP,
    }
}

fn tag_graph(labels: &[&str]) -> Graph {
    let mut g = Graph::new();
    for l in labels {
        g.add_node(*l);
    }
    g
}

fn enrich(rule: &Rule, left_tags: &[&str], right_tags: &[&str], origin: RuleOrigin) -> Rule {
    let left_extra = tag_graph(left_tags);
    let right_extra = tag_graph(right_tags);
    let mut plain = rule.plain.with_disjoint(&left_extra, &right_extra);
    let ac = rule.ac.extend_context(&rule.plain.left, &left_extra);
    plain.name = match &origin.premarking {
        None => format!("{}[{}->{}]", origin.base, origin.from_state, origin.to_state),
        Some(m) => format!(
            "{}[{}->{},{}]",
            origin.base, origin.from_state, origin.to_state, m
        ),
    };
    Rule {
        plain,
        ac,
        role: rule.role,
        origin: Some(origin),
    }
}

/// The transitions and, per transition, the selected rules in declaration
/// order, after properization.
fn selections<'m>(
    m: &'m JointModel,
    automaton: &'m RegulationAutomaton,
) -> Result<Vec<(&'m Transition, Vec<&'m Rule>)>, RegulationError> {
    let mut out = Vec::new();
    for t in &automaton.transitions {
        for name in &t.select {
            if m.rule(name).is_none() {
                return Err(RegulationError::UnknownRuleName(name.clone()));
            }
        }
        let rules: Vec<&Rule> = m.rules().filter(|r| t.select.contains(r.name())).collect();
        out.push((t, rules));
    }
    Ok(out)
}

/// Enriched rules `⟨⟨L,q⟩ ⇒ ⟨R,q'⟩, ac⟩` for every transition and selected
/// rule; the automaton is properized first.
pub fn build_joint(m: &JointModel) -> Result<Vec<Rule>, RegulationError> {
    let automaton = m.automaton.properize();
    let mut out = Vec::new();
    for (t, rules) in selections(m, &automaton)? {
        for r in rules {
            out.push(enrich(
                r,
                &[&t.from],
                &[&t.to],
                RuleOrigin {
                    base: r.name().to_string(),
                    from_state: t.from.clone(),
                    to_state: t.to.clone(),
                    premarking: None,
                },
            ));
        }
    }
    Ok(out)
}

/// Premarkings of rule `name` with respect to `automaton`, in the order
/// `⊤, sys, env`.
pub fn premarkings_in(
    name: &str,
    m: &JointModel,
    automaton: &RegulationAutomaton,
) -> Result<Vec<&'static str>, RegulationError> {
    if m.rule(name).is_none() {
        return Err(RegulationError::UnknownRuleName(name.to_string()));
    }
    let pre = automaton.pre_states(name);
    let mut found: BTreeMap<&'static str, ()> = BTreeMap::new();
    for q in &pre {
        for r in m.rules() {
            if automaton.post_states(r.name()).contains(q) {
                found.insert(marking_of(r.role), ());
            }
        }
        if *q == automaton.start {
            found.insert(MARK_TOP, ());
        }
    }
    Ok([MARK_TOP, MARK_SYS, MARK_ENV]
        .into_iter()
        .filter(|x| found.contains_key(x))
        .collect())
}

/// Premarkings of a rule under the model's own automaton.
pub fn premarkings(name: &str, m: &JointModel) -> Result<Vec<&'static str>, RegulationError> {
    premarkings_in(name, m, &m.automaton)
}

/// Marked rules `⟨⟨L,q,m⟩ ⇒ ⟨R,q',m'⟩, ac⟩` with `m` ranging over the
/// premarkings and `m'` the marking of the rule's role.
pub fn build_annotated(m: &JointModel) -> Result<Vec<Rule>, RegulationError> {
    let automaton = m.automaton.properize();
    let mut out = Vec::new();
    for (t, rules) in selections(m, &automaton)? {
        for r in rules {
            let after = marking_of(r.role);
            for pre in premarkings_in(r.name(), m, &automaton)? {
                out.push(enrich(
                    r,
                    &[&t.from, pre],
                    &[&t.to, after],
                    RuleOrigin {
                        base: r.name().to_string(),
                        from_state: t.from.clone(),
                        to_state: t.to.clone(),
                        premarking: Some(pre.to_string()),
                    },
                ));
            }
        }
    }
    Ok(out)
}
