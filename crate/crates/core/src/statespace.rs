//! Bounded breadth-first exploration into a labelled transition system over
//! isomorphism classes, Skip completion and trace projection.

use std::collections::{HashMap, HashSet, VecDeque};

use thiserror::Error;

use crate::canon::{canonical_form, CanonicalKey};
use crate::graph::{Graph, LabelSet, TagError};
use crate::rewrite::{direct_transformations, Role, Rule, TransformationStep};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExplorationLimits {
    pub max_states: usize,
    pub max_depth: usize,
    /// Cap on nodes plus edges of any explored graph.
    pub max_graph_size: usize,
}

impl Default for ExplorationLimits {
    fn default() -> Self {
        ExplorationLimits {
            max_states: 20_000,
            max_depth: 10_000,
            max_graph_size: 64,
        }
    }
}

/// How much of a state's successor set is present in the LTS.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expansion {
    /// All successors are present.
    Full,
    /// Expanded, but some successors were dropped by a limit.
    Partial,
    /// Never expanded.
    Frontier,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct State {
    pub key: CanonicalKey,
    /// Canonical representative.
    pub graph: Graph,
    pub depth: usize,
    pub expansion: Expansion,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TransitionLabel {
    /// Name of the applied (possibly enriched) rule.
    pub rule: String,
    /// Name of the underlying system/environment rule.
    pub base: String,
    pub role: Role,
}

impl TransitionLabel {
    pub fn skip() -> Self {
        TransitionLabel {
            rule: "Skip".to_string(),
            base: "Skip".to_string(),
            role: Role::Skip,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub from: usize,
    pub label: TransitionLabel,
    pub to: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lts {
    pub states: Vec<State>,
    pub initial: Vec<usize>,
    pub transitions: Vec<Transition>,
    /// True iff exploration exhausted the reachable set within the limits.
    pub complete: bool,
    /// Which limit truncated exploration, if any.
    pub truncation: Option<String>,
    out: Vec<Vec<usize>>,
}

impl Lts {
    /// Assembles an LTS from parts; states keep their given expansion.
    pub fn from_parts(
        states: Vec<State>,
        initial: Vec<usize>,
        transitions: Vec<Transition>,
        complete: bool,
    ) -> Self {
        let mut out = vec![Vec::new(); states.len()];
        for (i, t) in transitions.iter().enumerate() {
            assert!(t.from < states.len() && t.to < states.len(), "transition out of range");
            out[t.from].push(i);
        }
        Lts {
            states,
            initial,
            transitions,
            complete,
            truncation: None,
            out,
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Outgoing transitions of `s` in insertion order.
    pub fn outgoing(&self, s: usize) -> impl Iterator<Item = &Transition> + '_ {
        self.out[s].iter().map(move |&i| &self.transitions[i])
    }

    pub fn successors(&self, s: usize) -> impl Iterator<Item = usize> + '_ {
        self.outgoing(s).map(|t| t.to)
    }

    pub fn out_degree(&self, s: usize) -> usize {
        self.out[s].len()
    }

    /// Whether the successor set of `s` is exactly known.
    pub fn is_settled(&self, s: usize) -> bool {
        self.states[s].expansion == Expansion::Full
    }

    /// First transition label from `a` to `b`, if any.
    pub fn label_between(&self, a: usize, b: usize) -> Option<&TransitionLabel> {
        self.outgoing(a).find(|t| t.to == b).map(|t| &t.label)
    }

    /// Fully expanded states without successors.
    pub fn deadlocks(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&s| self.is_settled(s) && self.out_degree(s) == 0)
            .collect()
    }

    /// Whether every settled state has a successor, so every maximal path
    /// through settled states is infinite.
    pub fn is_total(&self) -> bool {
        self.deadlocks().is_empty()
    }

    fn push_transition(&mut self, t: Transition) {
        self.out[t.from].push(self.transitions.len());
        self.transitions.push(t);
    }

    /// Shortest path (state indices) from some initial state to `target`,
    /// breadth-first with ties broken by transition order.
    pub fn path_to(&self, target: usize) -> Option<Vec<usize>> {
        self.path_between(&self.initial, target)
    }

    /// Shortest path from any of `sources` to `target`.
    pub fn path_between(&self, sources: &[usize], target: usize) -> Option<Vec<usize>> {
        let mut parent: Vec<Option<usize>> = vec![None; self.len()];
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(s) = queue.pop_front() {
            if s == target {
                let mut path = vec![s];
                let mut cur = s;
                while let Some(p) = parent[cur] {
                    path.push(p);
                    cur = p;
                }
                path.reverse();
                return Some(path);
            }
            for t in self.successors(s) {
                if !seen[t] {
                    seen[t] = true;
                    parent[t] = Some(s);
                    queue.push_back(t);
                }
            }
        }
        None
    }
}

/// Breadth-first exploration of `rules` from the canonicalized `inits`.
pub fn explore(rules: &[Rule], inits: &[Graph], limits: ExplorationLimits) -> Lts {
    let mut lts = Lts::from_parts(Vec::new(), Vec::new(), Vec::new(), true);
    let mut index: HashMap<CanonicalKey, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    let mut seen_edges: HashSet<(usize, usize, usize)> = HashSet::new();
    let truncate = |lts: &mut Lts, why: &str| {
        lts.complete = false;
        if lts.truncation.is_none() {
            lts.truncation = Some(why.to_string());
        }
    };

    for g in inits {
        if g.size() > limits.max_graph_size {
            truncate(&mut lts, "max-graph-size");
            continue;
        }
        let cf = canonical_form(g);
        let id = match index.get(&cf.key) {
            Some(&id) => id,
            None => {
                if lts.states.len() >= limits.max_states {
                    truncate(&mut lts, "max-states");
                    continue;
                }
                let id = insert_state(&mut lts, cf.key.clone(), cf.graph, 0);
                index.insert(cf.key, id);
                queue.push_back(id);
                id
            }
        };
        if !lts.initial.contains(&id) {
            lts.initial.push(id);
        }
    }

    while let Some(s) = queue.pop_front() {
        let steps = direct_transformations(rules, &lts.states[s].graph);
        if steps.is_empty() {
            lts.states[s].expansion = Expansion::Full;
            continue;
        }
        if lts.states[s].depth >= limits.max_depth {
            truncate(&mut lts, "max-depth");
            continue;
        }
        let depth = lts.states[s].depth + 1;
        let mut partial = false;
        for step in steps {
            if step.after.size() > limits.max_graph_size {
                partial = true;
                truncate(&mut lts, "max-graph-size");
                continue;
            }
            let cf = canonical_form(&step.after);
            let to = match index.get(&cf.key) {
                Some(&id) => id,
                None => {
                    if lts.states.len() >= limits.max_states {
                        partial = true;
                        truncate(&mut lts, "max-states");
                        continue;
                    }
                    let id = insert_state(&mut lts, cf.key.clone(), cf.graph, depth);
                    index.insert(cf.key, id);
                    queue.push_back(id);
                    id
                }
            };
            if seen_edges.insert((s, step.rule_index, to)) {
                let rule = &rules[step.rule_index];
                lts.push_transition(Transition {
                    from: s,
                    label: TransitionLabel {
                        rule: rule.name().to_string(),
                        base: rule.base_name().to_string(),
                        role: rule.role,
                    },
                    to,
                });
            }
        }
        lts.states[s].expansion = if partial {
            Expansion::Partial
        } else {
            Expansion::Full
        };
    }
    lts
}

fn insert_state(lts: &mut Lts, key: CanonicalKey, graph: Graph, depth: usize) -> usize {
    lts.states.push(State {
        key,
        graph,
        depth,
        expansion: Expansion::Frontier,
    });
    lts.out.push(Vec::new());
    lts.states.len() - 1
}

/// Adds a Skip self-loop to every fully expanded state without successors.
pub fn complete_lts(lts: &Lts) -> Lts {
    let mut out = lts.clone();
    for s in lts.deadlocks() {
        out.push_transition(Transition {
            from: s,
            label: TransitionLabel::skip(),
            to: s,
        });
    }
    out
}

/// Ultimately periodic path: `prefix` followed by `cycle` repeated forever.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lasso {
    pub prefix: Vec<usize>,
    pub cycle: Vec<usize>,
}

impl Lasso {
    /// Position sequence length (prefix plus one cycle).
    pub fn len(&self) -> usize {
        self.prefix.len() + self.cycle.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycle.is_empty()
    }

    /// State at position `i` of the unrolled lasso.
    pub fn at(&self, i: usize) -> usize {
        if i < self.prefix.len() {
            self.prefix[i]
        } else {
            self.cycle[(i - self.prefix.len()) % self.cycle.len()]
        }
    }

    /// Consecutive states are connected and the cycle closes.
    pub fn is_well_formed(&self, lts: &Lts) -> bool {
        if self.cycle.is_empty() {
            return false;
        }
        let flat: Vec<usize> = self
            .prefix
            .iter()
            .chain(self.cycle.iter())
            .copied()
            .chain(std::iter::once(self.cycle[0]))
            .collect();
        flat.windows(2)
            .all(|w| lts.successors(w[0]).any(|t| t == w[1]))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProjectError {
    #[error("state {0} carries no automaton state tag")]
    MissingTag(usize),
    #[error(transparent)]
    Tag(#[from] TagError),
}

/// A joint or annotated trace split into its components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceProjection {
    /// Object graphs with all tags removed.
    pub graphs: Vec<Graph>,
    pub rules: Vec<String>,
    pub run: Vec<String>,
    /// Empty for joint (unannotated) traces.
    pub markings: Vec<String>,
}

/// Strips state and marking tags from `initial` and the targets of `steps`.
pub fn project_trace(
    initial: &Graph,
    steps: &[TransformationStep],
    rules: &[Rule],
    states: &LabelSet,
) -> Result<TraceProjection, ProjectError> {
    let marks = crate::graph::marking_labels();
    let mut graphs_in = vec![initial];
    graphs_in.extend(steps.iter().map(|s| &s.after));
    let annotated = initial.read_tag(&marks)?.is_some();
    let mut out = TraceProjection {
        graphs: Vec::new(),
        rules: steps
            .iter()
            .map(|s| rules[s.rule_index].base_name().to_string())
            .collect(),
        run: Vec::new(),
        markings: Vec::new(),
    };
    for (i, g) in graphs_in.into_iter().enumerate() {
        let q = g.read_tag(states)?.ok_or(ProjectError::MissingTag(i))?;
        out.run.push(q.to_string());
        if annotated {
            let m = g.read_tag(&marks)?.ok_or(ProjectError::MissingTag(i))?;
            out.markings.push(m.to_string());
        }
        out.graphs.push(g.strip_tags(states).strip_tags(&marks));
    }
    Ok(out)
}
