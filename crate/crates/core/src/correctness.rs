//! Correctness of joint systems: plain, k-step, last-minute and weak k-step,
//! decided directly on the joint state space or by reduction to LTL/CTL on the
//! annotated joint state space.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::canon::canonical_key;
use crate::ctl::{ctl_check, Ctl};
use crate::graph::Graph;
use crate::ltl::{eval_ltl_on_lasso, ltl_check, Ltl};
use crate::morphism::enumerate_injective_morphisms;
use crate::regulation::{build_annotated, build_joint, JointModel, RegulationError};
use crate::rewrite::{apply_at, direct_transformations, is_deadlocked, Role, Rule};
use crate::statespace::{complete_lts, explore, ExplorationLimits, Lasso, Lts, TransitionLabel};
use crate::temporal::{CheckError, Prop, Status, Verdict, Witness};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    Plain,
    KStep,
    LastMinute,
    WeakKStep,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Plain => "plain",
            Kind::KStep => "k-step",
            Kind::LastMinute => "last-minute",
            Kind::WeakKStep => "weak-k-step",
        }
    }

    pub fn uses_k(self) -> bool {
        matches!(self, Kind::KStep | Kind::WeakKStep)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Kind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plain" => Ok(Kind::Plain),
            "k-step" => Ok(Kind::KStep),
            "last-minute" => Ok(Kind::LastMinute),
            "weak-k-step" => Ok(Kind::WeakKStep),
            _ => Err(format!("unknown kind {s:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Direct,
    Reduction,
    Both,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Direct => "direct",
            Method::Reduction => "reduction",
            Method::Both => "both",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "direct" => Ok(Method::Direct),
            "reduction" => Ok(Method::Reduction),
            "both" => Ok(Method::Both),
            _ => Err(format!("unknown method {s:?}")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CorrectnessQuery {
    pub model: JointModel,
    pub pre: Prop,
    pub post: Prop,
    pub kind: Kind,
    pub k: usize,
    /// Object graphs over the label alphabet, without tags.
    pub inits: Vec<Graph>,
    pub limits: ExplorationLimits,
    pub method: Method,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QueryError {
    #[error(transparent)]
    Regulation(#[from] RegulationError),
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error("{0}")]
    Unsupported(String),
}

/// Which rule set a trace runs in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RuleSet {
    Joint,
    Annotated,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    /// Underlying rule; `None` for the initial state.
    pub rule: Option<String>,
    /// Name of the applied enriched rule.
    pub applied: Option<String>,
    pub role: Option<Role>,
    /// Full state graph including tags.
    pub graph: Graph,
}

/// The condition a trace is claimed to violate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Claim {
    /// The last state is derived and violates the postcondition.
    Postcondition { system_only: bool },
    /// The state after `env_step` starts a k-step continuation without the
    /// postcondition.
    NoRecovery { env_step: usize },
    /// The state before the final environment step, reached by a system
    /// step, violates the postcondition.
    LastMinute,
    /// No state within k steps of the last (environment-successor) state
    /// satisfies the postcondition.
    NoWeakRecovery,
    /// The lasso closing at `loop_start` violates the formula.
    Formula(Ltl),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
    pub rules: RuleSet,
    /// For lassos: index the last step returns to.
    pub loop_start: Option<usize>,
    pub claim: Claim,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Engine {
    Direct,
    Reduction,
}

impl Engine {
    pub fn as_str(self) -> &'static str {
        match self {
            Engine::Direct => "direct",
            Engine::Reduction => "reduction",
        }
    }
}

#[derive(Clone, Debug)]
pub struct MethodRun {
    pub engine: Engine,
    pub verdict: Verdict,
    pub states: usize,
    pub complete: bool,
    pub trace: Option<Trace>,
}

#[derive(Clone, Debug)]
pub struct CorrectnessReport {
    pub kind: Kind,
    pub k: usize,
    pub method: Method,
    pub verdict: Verdict,
    pub runs: Vec<MethodRun>,
    /// Set when both methods ran.
    pub agreement: Option<bool>,
    /// Both methods finished on complete state spaces and disagree.
    pub defect: bool,
}

impl CorrectnessReport {
    pub fn states(&self) -> usize {
        self.runs.first().map_or(0, |r| r.states)
    }

    pub fn complete(&self) -> bool {
        self.runs.iter().all(|r| r.complete)
    }

    /// Trace of the first violating run.
    pub fn trace(&self) -> Option<&Trace> {
        self.runs
            .iter()
            .find(|r| r.verdict.status == Status::Violated)
            .and_then(|r| r.trace.as_ref())
    }
}

/// Statement attached to every report: only the supplied graphs are checked.
pub const INIT_FAMILY_NOTE: &str =
    "verdict quantifies over the supplied initial graphs only, not over all graphs satisfying the precondition";

#[derive(Clone, Debug)]
pub enum Formula {
    Ltl(Ltl),
    Ctl(Ctl),
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Ltl(x) => x.fmt(f),
            Formula::Ctl(x) => x.fmt(f),
        }
    }
}

/// `c -> X((s & d) W e)`.
pub fn pcs(c: &Prop, d: &Prop) -> Ltl {
    let sd = Ltl::and(Ltl::atom(Prop::sys()), Ltl::atom(d.clone()));
    Ltl::implies(
        Ltl::atom(c.clone()),
        Ltl::x(Ltl::w(sd, Ltl::atom(Prop::env()))),
    )
}

/// `c -> X G(e -> (d | X d | ... | X^k d))`.
pub fn k_step_recovery(c: &Prop, d: &Prop, k: usize) -> Ltl {
    let recover = Ltl::or_all((0..=k).map(|j| Ltl::x_n(j, Ltl::atom(d.clone()))).collect());
    Ltl::implies(
        Ltl::atom(c.clone()),
        Ltl::x(Ltl::g(Ltl::implies(Ltl::atom(Prop::env()), recover))),
    )
}

/// `c -> G((s & X e) -> d)`.
pub fn last_minute_recovery(c: &Prop, d: &Prop) -> Ltl {
    let before_env = Ltl::and(Ltl::atom(Prop::sys()), Ltl::x(Ltl::atom(Prop::env())));
    Ltl::implies(
        Ltl::atom(c.clone()),
        Ltl::g(Ltl::implies(before_env, Ltl::atom(d.clone()))),
    )
}

/// `c -> AX A((s & d) W e)`.
pub fn pcs_ctl(c: &Prop, d: &Prop) -> Ctl {
    let sd = Ctl::and(Ctl::atom(Prop::sys()), Ctl::atom(d.clone()));
    Ctl::implies(
        Ctl::atom(c.clone()),
        Ctl::ax(Ctl::aw(sd, Ctl::atom(Prop::env()))),
    )
}

/// `c -> AX AG(e -> (d | EX d | ... | EX^k d))`.
pub fn weak_recovery(c: &Prop, d: &Prop, k: usize) -> Ctl {
    let recover = Ctl::or_all((0..=k).map(|j| Ctl::ex_n(j, Ctl::atom(d.clone()))).collect());
    Ctl::implies(
        Ctl::atom(c.clone()),
        Ctl::ax(Ctl::ag(Ctl::implies(Ctl::atom(Prop::env()), recover))),
    )
}

/// The temporal formula characterizing `kind`; `None` for plain correctness.
pub fn build_formula(kind: Kind, c: &Prop, d: &Prop, k: usize) -> Option<Formula> {
    match kind {
        Kind::Plain => None,
        Kind::KStep => Some(Formula::Ltl(Ltl::and(pcs(c, d), k_step_recovery(c, d, k)))),
        Kind::LastMinute => Some(Formula::Ltl(Ltl::and(pcs(c, d), last_minute_recovery(c, d)))),
        Kind::WeakKStep => Some(Formula::Ctl(Ctl::and(pcs_ctl(c, d), weak_recovery(c, d, k)))),
    }
}

fn labels_along(lts: &Lts, states: &[usize]) -> Vec<TransitionLabel> {
    states
        .windows(2)
        .map(|w| {
            lts.label_between(w[0], w[1])
                .expect("consecutive witness states are connected")
                .clone()
        })
        .collect()
}

fn make_trace(
    lts: &Lts,
    states: &[usize],
    labels: Vec<TransitionLabel>,
    rules: RuleSet,
    claim: Claim,
) -> Trace {
    let mut steps = vec![TraceStep {
        rule: None,
        applied: None,
        role: None,
        graph: lts.states[states[0]].graph.clone(),
    }];
    for (s, l) in states[1..].iter().zip(labels) {
        steps.push(TraceStep {
            rule: Some(l.base),
            applied: Some(l.rule),
            role: Some(l.role),
            graph: lts.states[*s].graph.clone(),
        });
    }
    Trace {
        steps,
        rules,
        loop_start: None,
        claim,
    }
}

/// Shortest path through the LTS ending with a transition into a state
/// violating `d`.
fn derived_violation(lts: &Lts, d: &Prop) -> Option<Vec<usize>> {
    let mut best: Option<Vec<usize>> = None;
    for t in &lts.transitions {
        if d.holds(&lts.states[t.to].graph) {
            continue;
        }
        let mut p = lts.path_to(t.from).expect("explored states are reachable");
        p.push(t.to);
        if best.as_ref().is_none_or(|b| p.len() < b.len()) {
            best = Some(p);
        }
    }
    best
}

struct Outcome {
    verdict: Verdict,
    trace: Option<Trace>,
}

fn definite_or_open(lts: &Lts) -> Verdict {
    if lts.complete {
        Verdict::holds()
    } else {
        Verdict::unknown(truncation(lts))
    }
}

fn truncation(lts: &Lts) -> String {
    match &lts.truncation {
        Some(l) => format!("state space truncated by {l}"),
        None => "state space incomplete".to_string(),
    }
}

/// Correctness of a rule set: every graph derived in at least one step from an
/// initial graph satisfying `c` satisfies `d`.
pub fn check_system_correct(
    rules: &[Rule],
    c: &Prop,
    d: &Prop,
    inits: &[Graph],
    limits: ExplorationLimits,
) -> Verdict {
    system_correct(rules, c, d, inits, limits, false).0.verdict
}

fn system_correct(
    rules: &[Rule],
    c: &Prop,
    d: &Prop,
    inits: &[Graph],
    limits: ExplorationLimits,
    system_only: bool,
) -> (Outcome, Lts) {
    let starts: Vec<Graph> = inits.iter().filter(|g| c.holds(g)).cloned().collect();
    let lts = explore(rules, &starts, limits);
    if let Some(path) = derived_violation(&lts, d) {
        let labels = labels_along(&lts, &path);
        let trace = make_trace(
            &lts,
            &path,
            labels,
            RuleSet::Joint,
            Claim::Postcondition { system_only },
        );
        let verdict = Verdict::violated(
            Witness::Path(path),
            format!("a derived state violates {}", d.name),
        );
        return (
            Outcome {
                verdict,
                trace: Some(trace),
            },
            lts,
        );
    }
    let verdict = if lts.complete {
        Verdict::holds()
    } else {
        Verdict::unknown(truncation(&lts))
    };
    (
        Outcome {
            verdict,
            trace: None,
        },
        lts,
    )
}

/// The joint state space explored from `⟨G, q0⟩` for initial graphs
/// satisfying the precondition, and its Skip completion.
struct JointSpace {
    rules: Vec<Rule>,
    inits: Vec<Graph>,
    lts: Lts,
}

impl JointSpace {
    fn new(q: &CorrectnessQuery) -> Result<Self, QueryError> {
        let rules = build_joint(&q.model)?;
        let inits: Vec<Graph> = q
            .inits
            .iter()
            .filter(|g| q.pre.holds(g))
            .map(|g| q.model.joint_initial(g))
            .collect();
        let lts = complete_lts(&explore(&rules, &inits, q.limits));
        Ok(JointSpace { rules, inits, lts })
    }

    fn system_rules(&self) -> Vec<Rule> {
        self.rules
            .iter()
            .filter(|r| r.role == Role::System)
            .cloned()
            .collect()
    }

    fn open(&self, s: usize) -> bool {
        !self.lts.is_settled(s)
    }

    fn d(&self, q: &CorrectnessQuery) -> Vec<bool> {
        self.lts
            .states
            .iter()
            .map(|s| q.post.holds(&s.graph))
            .collect()
    }

    fn env_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.lts
            .transitions
            .iter()
            .filter(|t| t.label.role == Role::Environment)
            .map(|t| (t.from, t.to))
    }

    fn env_label(&self, u: usize, m: usize) -> TransitionLabel {
        self.lts
            .outgoing(u)
            .find(|t| t.to == m && t.label.role == Role::Environment)
            .expect("environment transition exists")
            .label
            .clone()
    }

    /// Among environment transitions `u -> m` with `pick(m)`, the one whose
    /// source is closest to an initial state.
    fn closest_env_edge(&self, pick: impl Fn(usize) -> bool) -> Option<(Vec<usize>, usize)> {
        let mut best: Option<(Vec<usize>, usize)> = None;
        for (u, m) in self.env_edges() {
            if !pick(m) {
                continue;
            }
            let p = self.lts.path_to(u).expect("reachable");
            if best.as_ref().is_none_or(|(b, _)| p.len() < b.len()) {
                best = Some((p, m));
            }
        }
        best
    }
}

fn combine(s: Outcome, r: Outcome, complete: bool, note: String) -> Outcome {
    if s.verdict.status == Status::Violated {
        return s;
    }
    if r.verdict.status == Status::Violated {
        return r;
    }
    if complete {
        Outcome {
            verdict: Verdict::holds(),
            trace: None,
        }
    } else {
        Outcome {
            verdict: Verdict::unknown(note),
            trace: None,
        }
    }
}

/// System correctness of the enriched system rules alone.
fn condition_s(q: &CorrectnessQuery, space: &JointSpace) -> (Outcome, Lts) {
    system_correct(
        &space.system_rules(),
        &Prop::new("true", crate::condition::Condition::True),
        &q.post,
        &space.inits,
        q.limits,
        true,
    )
}

fn run_direct(q: &CorrectnessQuery, recovery: Recovery) -> Result<MethodRun, QueryError> {
    let space = JointSpace::new(q)?;
    let (outcome, s_lts) = match recovery {
        Recovery::Plain => {
            let (o, lts) = system_correct(
                &space.rules,
                &Prop::new("true", crate::condition::Condition::True),
                &q.post,
                &space.inits,
                q.limits,
                false,
            );
            (o, lts)
        }
        _ => {
            let (s, s_lts) = condition_s(q, &space);
            let r = match recovery {
                Recovery::KStep => k_step(q, &space),
                Recovery::LastMinuteRPrime => last_minute_r_prime(q, &space),
                Recovery::LastMinuteR => last_minute_r(q, &space),
                Recovery::Weak => weak_k_step(q, &space),
                Recovery::Plain => unreachable!(),
            };
            let complete = s_lts.complete && space.lts.complete;
            let note = if s_lts.complete {
                truncation(&space.lts)
            } else {
                truncation(&s_lts)
            };
            (combine(s, r, complete, note), s_lts)
        }
    };
    let mut verdict = outcome.verdict;
    if space.inits.is_empty() && verdict.status == Status::Holds {
        verdict.note = "no initial graph satisfies the precondition".to_string();
    }
    Ok(MethodRun {
        engine: Engine::Direct,
        verdict,
        states: space.lts.len(),
        complete: space.lts.complete && s_lts.complete,
        trace: outcome.trace,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Recovery {
    Plain,
    KStep,
    LastMinuteRPrime,
    LastMinuteR,
    Weak,
}

/// k-step recovery fails: some environment successor starts a path of k further steps
/// through states all violating `d`.
fn k_step(q: &CorrectnessQuery, space: &JointSpace) -> Outcome {
    let lts = &space.lts;
    let d = space.d(q);
    // bad[j][s]: a path of j steps from s avoids d throughout.
    let mut bad: Vec<Vec<bool>> = vec![d.iter().map(|v| !v).collect()];
    for j in 1..=q.k {
        let prev = &bad[j - 1];
        let next = (0..lts.len())
            .map(|s| !d[s] && lts.successors(s).any(|t| prev[t]))
            .collect();
        bad.push(next);
    }
    let Some((mut path, m)) = space.closest_env_edge(|m| bad[q.k][m]) else {
        return Outcome {
            verdict: definite_or_open(lts),
            trace: None,
        };
    };
    let u = *path.last().unwrap();
    let mut labels = labels_along(lts, &path);
    labels.push(space.env_label(u, m));
    path.push(m);
    let env_step = path.len() - 1;
    let mut cur = m;
    for j in (0..q.k).rev() {
        let t = lts
            .successors(cur)
            .find(|&t| bad[j][t])
            .expect("bad chain continues");
        labels.push(lts.label_between(cur, t).unwrap().clone());
        path.push(t);
        cur = t;
    }
    let trace = make_trace(lts, &path, labels, RuleSet::Joint, Claim::NoRecovery { env_step });
    Outcome {
        verdict: Verdict::violated(
            Witness::Path(path),
            format!("no recovery of {} within {} steps", q.post.name, q.k),
        ),
        trace: Some(trace),
    }
}

/// Weak recovery fails: some environment successor reaches no `d` state within k steps.
fn weak_k_step(q: &CorrectnessQuery, space: &JointSpace) -> Outcome {
    let lts = &space.lts;
    let d = space.d(q);
    // good[s]: possibly reaches d within j steps; open states may have
    // unexplored successors.
    let mut good = d.clone();
    for _ in 0..q.k {
        let prev = good;
        good = (0..lts.len())
            .map(|s| d[s] || space.open(s) || lts.successors(s).any(|t| prev[t]))
            .collect();
    }
    let Some((mut path, m)) = space.closest_env_edge(|m| !good[m]) else {
        return Outcome {
            verdict: definite_or_open(lts),
            trace: None,
        };
    };
    let u = *path.last().unwrap();
    let mut labels = labels_along(lts, &path);
    labels.push(space.env_label(u, m));
    path.push(m);
    let trace = make_trace(lts, &path, labels, RuleSet::Joint, Claim::NoWeakRecovery);
    Outcome {
        verdict: Verdict::violated(
            Witness::Path(path),
            format!("no state satisfying {} within {} steps", q.post.name, q.k),
        ),
        trace: Some(trace),
    }
}

/// Transition form of last-minute recovery: a state entered by a system
/// step and left by an environment step violates `d`.
fn last_minute_r_prime(q: &CorrectnessQuery, space: &JointSpace) -> Outcome {
    let lts = &space.lts;
    let d = space.d(q);
    let mut best: Option<(Vec<usize>, TransitionLabel, usize)> = None;
    for t in &lts.transitions {
        let h = t.to;
        if t.label.role != Role::System || d[h] {
            continue;
        }
        let Some(h2) = lts
            .outgoing(h)
            .find(|x| x.label.role == Role::Environment)
            .map(|x| x.to)
        else {
            continue;
        };
        let p = lts.path_to(t.from).expect("reachable");
        if best.as_ref().is_none_or(|(b, _, _)| p.len() < b.len()) {
            let mut p = p;
            p.push(h);
            best = Some((p, t.label.clone(), h2));
        }
    }
    match best {
        None => Outcome {
            verdict: definite_or_open(lts),
            trace: None,
        },
        Some((path, sys_label, h2)) => last_minute_trace(q, space, path, sys_label, h2),
    }
}

fn last_minute_trace(
    q: &CorrectnessQuery,
    space: &JointSpace,
    mut path: Vec<usize>,
    sys_label: TransitionLabel,
    h2: usize,
) -> Outcome {
    let lts = &space.lts;
    let h = path.pop().unwrap();
    let mut labels = labels_along(lts, &path);
    labels.push(sys_label);
    path.push(h);
    labels.push(space.env_label(h, h2));
    path.push(h2);
    let trace = make_trace(lts, &path, labels, RuleSet::Joint, Claim::LastMinute);
    Outcome {
        verdict: Verdict::violated(
            Witness::Path(path),
            format!("{} fails right before an environment step", q.post.name),
        ),
        trace: Some(trace),
    }
}

/// Defining form of last-minute recovery: a state reached by one or more
/// system steps from an environment successor and left by an environment
/// step violates `d`.
fn last_minute_r(q: &CorrectnessQuery, space: &JointSpace) -> Outcome {
    let lts = &space.lts;
    let d = space.d(q);
    let n = lts.len();
    // BFS over (state, took a system step) from environment successors.
    let mut parent: Vec<[Option<(usize, usize, TransitionLabel)>; 2]> = vec![[None, None]; n];
    let mut seen = vec![[false; 2]; n];
    let mut queue = VecDeque::new();
    let mut origin: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut env_order: Vec<(usize, usize)> = space.env_edges().collect();
    env_order.sort_by_key(|&(u, _)| lts.path_to(u).map_or(usize::MAX, |p| p.len()));
    for (u, m) in env_order {
        if !seen[m][0] {
            seen[m][0] = true;
            origin[m] = Some((u, m));
            queue.push_back((m, 0usize));
        }
    }
    while let Some((s, took)) = queue.pop_front() {
        if took == 1 && !d[s] && lts.outgoing(s).any(|t| t.label.role == Role::Environment) {
            // Walk back to the environment successor.
            let mut rev = vec![s];
            let mut sys_labels = Vec::new();
            let (mut cur, mut layer) = (s, 1usize);
            while let Some((p, pl, label)) = parent[cur][layer].clone() {
                sys_labels.push(label);
                rev.push(p);
                cur = p;
                layer = pl;
            }
            rev.reverse();
            sys_labels.reverse();
            let (u, m) = origin[rev[0]].expect("BFS starts at an environment successor");
            let mut path = lts.path_to(u).expect("reachable");
            let mut labels = labels_along(lts, &path);
            labels.push(space.env_label(u, m));
            path.push(m);
            for (st, l) in rev[1..].iter().zip(sys_labels) {
                path.push(*st);
                labels.push(l);
            }
            let h2 = lts
                .outgoing(s)
                .find(|t| t.label.role == Role::Environment)
                .unwrap()
                .to;
            labels.push(space.env_label(s, h2));
            path.push(h2);
            let trace = make_trace(lts, &path, labels, RuleSet::Joint, Claim::LastMinute);
            return Outcome {
                verdict: Verdict::violated(
                    Witness::Path(path),
                    format!("{} fails before the next environment step", q.post.name),
                ),
                trace: Some(trace),
            };
        }
        for t in lts.outgoing(s) {
            if t.label.role != Role::System {
                continue;
            }
            if !seen[t.to][1] {
                seen[t.to][1] = true;
                parent[t.to][1] = Some((s, took, t.label.clone()));
                queue.push_back((t.to, 1));
            }
        }
    }
    Outcome {
        verdict: definite_or_open(lts),
        trace: None,
    }
}

/// Plain correctness of the joint system.
pub fn check_plain(q: &CorrectnessQuery) -> Result<CorrectnessReport, QueryError> {
    single(q, run_direct(q, Recovery::Plain)?)
}

/// System-step consistency plus recovery within k steps.
pub fn check_k_step(q: &CorrectnessQuery) -> Result<CorrectnessReport, QueryError> {
    single(q, run_direct(q, Recovery::KStep)?)
}

/// System-step consistency plus the transition form of last-minute recovery.
pub fn check_last_minute(q: &CorrectnessQuery) -> Result<CorrectnessReport, QueryError> {
    single(q, run_direct(q, Recovery::LastMinuteRPrime)?)
}

/// System-step consistency plus the defining form of last-minute recovery.
pub fn check_last_minute_r(q: &CorrectnessQuery) -> Result<CorrectnessReport, QueryError> {
    single(q, run_direct(q, Recovery::LastMinuteR)?)
}

/// System-step consistency plus weak recovery within k steps.
pub fn check_weak_k_step(q: &CorrectnessQuery) -> Result<CorrectnessReport, QueryError> {
    single(q, run_direct(q, Recovery::Weak)?)
}

fn single(q: &CorrectnessQuery, run: MethodRun) -> Result<CorrectnessReport, QueryError> {
    Ok(CorrectnessReport {
        kind: q.kind,
        k: q.k,
        method: match run.engine {
            Engine::Direct => Method::Direct,
            Engine::Reduction => Method::Reduction,
        },
        verdict: run.verdict.clone(),
        runs: vec![run],
        agreement: None,
        defect: false,
    })
}

/// Explores the annotated joint system from `⟨G, q0, ⊤⟩`, completes it and
/// model checks the formula of the query's kind.
pub fn check_via_reduction(q: &CorrectnessQuery) -> Result<CorrectnessReport, QueryError> {
    single(q, run_reduction(q)?)
}

fn run_reduction(q: &CorrectnessQuery) -> Result<MethodRun, QueryError> {
    let formula = build_formula(q.kind, &q.pre, &q.post, q.k).ok_or_else(|| {
        QueryError::Unsupported("plain correctness has no temporal reduction".to_string())
    })?;
    check_formula(&q.model, &q.inits, q.limits, &formula)
}

/// Checks a temporal formula on the completed annotated joint system started
/// from the untagged `inits`.
pub fn check_formula(
    model: &JointModel,
    inits: &[Graph],
    limits: ExplorationLimits,
    formula: &Formula,
) -> Result<MethodRun, QueryError> {
    let rules = build_annotated(model)?;
    let inits: Vec<Graph> = inits.iter().map(|g| model.annotated_initial(g)).collect();
    let lts = complete_lts(&explore(&rules, &inits, limits));
    let (verdict, trace) = match formula {
        Formula::Ltl(phi) => {
            let v = ltl_check(&lts, phi)?;
            let trace = match &v.witness {
                Some(Witness::Lasso(l)) => Some(lasso_trace(&lts, l, phi)),
                _ => None,
            };
            (v, trace)
        }
        Formula::Ctl(theta) => {
            let v = ctl_check(&lts, theta)?;
            let trace = match &v.witness {
                Some(Witness::Path(p)) => {
                    let labels = labels_along(&lts, p);
                    let claim = match labels.last() {
                        Some(l) if l.role == Role::Environment => Claim::NoWeakRecovery,
                        _ => Claim::Postcondition { system_only: true },
                    };
                    Some(make_trace(&lts, p, labels, RuleSet::Annotated, claim))
                }
                _ => None,
            };
            (v, trace)
        }
    };
    Ok(MethodRun {
        engine: Engine::Reduction,
        verdict,
        states: lts.len(),
        complete: lts.complete,
        trace,
    })
}

fn lasso_trace(lts: &Lts, l: &Lasso, phi: &Ltl) -> Trace {
    let mut states = l.prefix.clone();
    states.extend_from_slice(&l.cycle);
    states.push(l.cycle[0]);
    let labels = labels_along(lts, &states);
    let mut t = make_trace(lts, &states, labels, RuleSet::Annotated, Claim::Formula(phi.clone()));
    t.loop_start = Some(l.prefix.len());
    t
}

/// Runs the query with its configured method(s).
pub fn run_query(q: &CorrectnessQuery) -> Result<CorrectnessReport, QueryError> {
    let direct = |q| -> Result<MethodRun, QueryError> {
        run_direct(
            q,
            match q.kind {
                Kind::Plain => Recovery::Plain,
                Kind::KStep => Recovery::KStep,
                Kind::LastMinute => Recovery::LastMinuteRPrime,
                Kind::WeakKStep => Recovery::Weak,
            },
        )
    };
    if q.kind == Kind::Plain && q.method != Method::Direct {
        return Err(QueryError::Unsupported(
            "plain correctness is only checked directly".to_string(),
        ));
    }
    match q.method {
        Method::Direct => single(q, direct(q)?),
        Method::Reduction => single(q, run_reduction(q)?),
        Method::Both => {
            let a = direct(q)?;
            let b = run_reduction(q)?;
            let agreement = a.verdict.status == b.verdict.status;
            let defect = !agreement && a.complete && b.complete;
            let status = [a.verdict.status, b.verdict.status];
            let mut verdict = if status.contains(&Status::Violated) {
                let v = if a.verdict.status == Status::Violated { &a } else { &b };
                v.verdict.clone()
            } else if status.contains(&Status::Unknown) {
                let v = if a.verdict.status == Status::Unknown { &a } else { &b };
                v.verdict.clone()
            } else {
                Verdict::holds()
            };
            if defect {
                verdict.note = format!(
                    "defect: direct {} but reduction {}",
                    a.verdict.status, b.verdict.status
                );
            }
            Ok(CorrectnessReport {
                kind: q.kind,
                k: q.k,
                method: Method::Both,
                verdict,
                runs: vec![a, b],
                agreement: Some(agreement),
                defect,
            })
        }
    }
}

/// Replays `trace` through the rewrite engine and confirms it violates its
/// claim.
pub fn validate_trace(q: &CorrectnessQuery, trace: &Trace) -> Result<(), String> {
    let (rules, inits): (Vec<Rule>, Vec<Graph>) = match trace.rules {
        RuleSet::Joint => (
            build_joint(&q.model).map_err(|e| e.to_string())?,
            q.inits.iter().map(|g| q.model.joint_initial(g)).collect(),
        ),
        RuleSet::Annotated => (
            build_annotated(&q.model).map_err(|e| e.to_string())?,
            q.inits.iter().map(|g| q.model.annotated_initial(g)).collect(),
        ),
    };
    let steps = &trace.steps;
    let first = steps.first().ok_or("empty trace")?;
    let key0 = canonical_key(&first.graph);
    let init_ok = q
        .inits
        .iter()
        .zip(&inits)
        .any(|(g, tagged)| q.pre.holds(g) && canonical_key(tagged) == key0);
    if !init_ok {
        return Err("trace does not start at an initial graph satisfying the precondition".into());
    }
    for (i, w) in steps.windows(2).enumerate() {
        replay_step(&rules, &w[0].graph, &w[1]).map_err(|e| format!("step {}: {e}", i + 1))?;
    }
    let d = |i: usize| q.post.holds(&steps[i].graph);
    let role = |i: usize| steps[i].role;
    let last = steps.len() - 1;
    match &trace.claim {
        Claim::Postcondition { system_only } => {
            if last == 0 {
                return Err("no derived state".into());
            }
            if *system_only && (1..=last).any(|i| role(i) != Some(Role::System)) {
                return Err("trace uses a non-system step".into());
            }
            if d(last) {
                return Err("final state satisfies the postcondition".into());
            }
        }
        Claim::NoRecovery { env_step } => {
            let p = *env_step;
            if p == 0 || p > last || role(p) != Some(Role::Environment) {
                return Err("no environment step at the claimed position".into());
            }
            if last != p + q.k {
                return Err(format!("continuation has {} steps, expected {}", last - p, q.k));
            }
            if (p..=last).any(d) {
                return Err("postcondition recovered".into());
            }
        }
        Claim::LastMinute => {
            if last < 2 || role(last) != Some(Role::Environment) || role(last - 1) != Some(Role::System) {
                return Err("trace does not end with a system step then an environment step".into());
            }
            if d(last - 1) {
                return Err("state before the environment step satisfies the postcondition".into());
            }
        }
        Claim::NoWeakRecovery => {
            if last == 0 || role(last) != Some(Role::Environment) {
                return Err("trace does not end with an environment step".into());
            }
            if let Some(g) = reach_within(&rules, &steps[last].graph, q.k, &q.post) {
                return Err(format!("postcondition reachable within {} steps: {g}", q.k));
            }
        }
        Claim::Formula(phi) => {
            let start = trace.loop_start.ok_or("lasso without loop start")?;
            if start >= last || canonical_key(&steps[last].graph) != canonical_key(&steps[start].graph) {
                return Err("trace does not close its loop".into());
            }
            let graphs: Vec<Graph> = steps[..last].iter().map(|s| s.graph.clone()).collect();
            let lasso = Lasso {
                prefix: (0..start).collect(),
                cycle: (start..last).collect(),
            };
            if eval_ltl_on_lasso(&lasso, &graphs, phi) {
                return Err("lasso satisfies the formula".into());
            }
        }
    }
    Ok(())
}

fn replay_step(rules: &[Rule], before: &Graph, step: &TraceStep) -> Result<(), String> {
    let target = canonical_key(&step.graph);
    if step.role == Some(Role::Skip) {
        if !is_deadlocked(rules, before) {
            return Err("Skip applied at a state where a rule applies".into());
        }
        return if canonical_key(before) == target {
            Ok(())
        } else {
            Err("Skip changed the graph".into())
        };
    }
    let name = step.applied.as_deref().ok_or("step without rule")?;
    let rule = rules
        .iter()
        .find(|r| r.name() == name)
        .ok_or_else(|| format!("unknown rule {name}"))?;
    if Some(rule.role) != step.role {
        return Err(format!("rule {name} has role {}", rule.role));
    }
    for m in enumerate_injective_morphisms(&rule.plain.left, before) {
        if let Ok(d) = apply_at(rule, before, &m) {
            if canonical_key(&d.graph) == target {
                return Ok(());
            }
        }
    }
    Err(format!("no application of {name} yields the next state"))
}

/// Some graph satisfying `d` within `k` steps of `g` in the completed system.
fn reach_within(rules: &[Rule], g: &Graph, k: usize, d: &Prop) -> Option<Graph> {
    let mut seen = HashSet::from([canonical_key(g)]);
    let mut layer = vec![g.clone()];
    for depth in 0..=k {
        if let Some(h) = layer.iter().find(|h| d.holds(h)) {
            return Some(h.clone());
        }
        if depth == k {
            break;
        }
        let mut next = Vec::new();
        for h in &layer {
            for step in direct_transformations(rules, h) {
                if seen.insert(canonical_key(&step.after)) {
                    next.push(step.after);
                }
            }
        }
        layer = next;
    }
    None
}
