//! CTL over graph-constraint atoms: three-valued fixpoint labelling and a
//! naive recursive reference evaluator.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use crate::statespace::Lts;
use crate::temporal::{
    incomplete_note, require_completed, AtomTable, CheckError, Prop, Verdict, Witness,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ctl {
    True,
    False,
    Atom(Prop),
    Not(Box<Ctl>),
    And(Box<Ctl>, Box<Ctl>),
    Or(Box<Ctl>, Box<Ctl>),
    Implies(Box<Ctl>, Box<Ctl>),
    AX(Box<Ctl>),
    EX(Box<Ctl>),
    AG(Box<Ctl>),
    EG(Box<Ctl>),
    AU(Box<Ctl>, Box<Ctl>),
    EU(Box<Ctl>, Box<Ctl>),
    AW(Box<Ctl>, Box<Ctl>),
    EW(Box<Ctl>, Box<Ctl>),
}

macro_rules! unary {
    ($($fn:ident => $v:ident),*) => {
        $(pub fn $fn(a: Ctl) -> Self { Ctl::$v(Box::new(a)) })*
    };
}

macro_rules! binary {
    ($($fn:ident => $v:ident),*) => {
        $(pub fn $fn(a: Ctl, b: Ctl) -> Self { Ctl::$v(Box::new(a), Box::new(b)) })*
    };
}

impl Ctl {
    unary!(ax => AX, ex => EX, ag => AG, eg => EG);
    binary!(and => And, or => Or, implies => Implies, au => AU, eu => EU, aw => AW, ew => EW);

    pub fn atom(p: Prop) -> Self {
        Ctl::Atom(p)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Ctl) -> Self {
        Ctl::Not(Box::new(a))
    }

    /// `EX^j a`; `EX^0 a = a`.
    pub fn ex_n(j: usize, a: Ctl) -> Self {
        (0..j).fold(a, |acc, _| Ctl::ex(acc))
    }

    /// Left-nested disjunction; panics on an empty list.
    pub fn or_all(parts: Vec<Ctl>) -> Self {
        let mut it = parts.into_iter();
        let first = it.next().expect("non-empty disjunction");
        it.fold(first, Ctl::or)
    }

    pub fn props(&self) -> Vec<&Prop> {
        let mut out: Vec<&Prop> = Vec::new();
        self.collect_props(&mut out);
        out
    }

    fn collect_props<'a>(&'a self, out: &mut Vec<&'a Prop>) {
        match self {
            Ctl::True | Ctl::False => {}
            Ctl::Atom(p) => {
                if !out.iter().any(|q| q.name == p.name) {
                    out.push(p);
                }
            }
            Ctl::Not(a) | Ctl::AX(a) | Ctl::EX(a) | Ctl::AG(a) | Ctl::EG(a) => {
                a.collect_props(out)
            }
            Ctl::And(a, b)
            | Ctl::Or(a, b)
            | Ctl::Implies(a, b)
            | Ctl::AU(a, b)
            | Ctl::EU(a, b)
            | Ctl::AW(a, b)
            | Ctl::EW(a, b) => {
                a.collect_props(out);
                b.collect_props(out);
            }
        }
    }
}

impl fmt::Display for Ctl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ctl::True => write!(f, "true"),
            Ctl::False => write!(f, "false"),
            Ctl::Atom(p) => write!(f, "{}", p.name),
            Ctl::Not(a) => write!(f, "!{a}"),
            Ctl::AX(a) => write!(f, "AX {a}"),
            Ctl::EX(a) => write!(f, "EX {a}"),
            Ctl::AG(a) => write!(f, "AG {a}"),
            Ctl::EG(a) => write!(f, "EG {a}"),
            Ctl::And(a, b) => write!(f, "({a} & {b})"),
            Ctl::Or(a, b) => write!(f, "({a} | {b})"),
            Ctl::Implies(a, b) => write!(f, "({a} -> {b})"),
            Ctl::AU(a, b) => write!(f, "A({a} U {b})"),
            Ctl::EU(a, b) => write!(f, "E({a} U {b})"),
            Ctl::AW(a, b) => write!(f, "A({a} W {b})"),
            Ctl::EW(a, b) => write!(f, "E({a} W {b})"),
        }
    }
}

/// Existential normal form: atoms, negation, conjunction, EX, EU, EG.
#[derive(Clone, Debug)]
enum Core {
    True,
    Atom(String),
    Not(Box<Core>),
    And(Box<Core>, Box<Core>),
    EX(Box<Core>),
    EU(Box<Core>, Box<Core>),
    EG(Box<Core>),
}

fn not(a: Core) -> Core {
    match a {
        Core::Not(inner) => *inner,
        other => Core::Not(Box::new(other)),
    }
}

fn and(a: Core, b: Core) -> Core {
    Core::And(Box::new(a), Box::new(b))
}

fn or(a: Core, b: Core) -> Core {
    not(and(not(a), not(b)))
}

fn to_core(phi: &Ctl) -> Core {
    match phi {
        Ctl::True => Core::True,
        Ctl::False => not(Core::True),
        Ctl::Atom(p) => Core::Atom(p.name.clone()),
        Ctl::Not(a) => not(to_core(a)),
        Ctl::And(a, b) => and(to_core(a), to_core(b)),
        Ctl::Or(a, b) => or(to_core(a), to_core(b)),
        Ctl::Implies(a, b) => or(not(to_core(a)), to_core(b)),
        Ctl::EX(a) => Core::EX(Box::new(to_core(a))),
        Ctl::AX(a) => not(Core::EX(Box::new(not(to_core(a))))),
        Ctl::EG(a) => Core::EG(Box::new(to_core(a))),
        Ctl::AG(a) => not(Core::EU(Box::new(Core::True), Box::new(not(to_core(a))))),
        Ctl::EU(a, b) => Core::EU(Box::new(to_core(a)), Box::new(to_core(b))),
        // A(a U b) = !(E(!b U (!a & !b)) | EG !b)
        Ctl::AU(a, b) => {
            let (na, nb) = (not(to_core(a)), not(to_core(b)));
            let escape = Core::EU(Box::new(nb.clone()), Box::new(and(na, nb.clone())));
            not(or(escape, Core::EG(Box::new(nb))))
        }
        // E(a W b) = E(a U b) | EG a
        Ctl::EW(a, b) => {
            let (ca, cb) = (to_core(a), to_core(b));
            or(
                Core::EU(Box::new(ca.clone()), Box::new(cb)),
                Core::EG(Box::new(ca)),
            )
        }
        // A(a W b) = !E(!b U (!a & !b))
        Ctl::AW(a, b) => {
            let (na, nb) = (not(to_core(a)), not(to_core(b)));
            not(Core::EU(Box::new(nb.clone()), Box::new(and(na, nb))))
        }
    }
}

/// Definite (`lo`) and possible (`hi`) satisfaction sets.
#[derive(Clone)]
struct Bounds {
    lo: Vec<bool>,
    hi: Vec<bool>,
}

struct Labeler<'a> {
    lts: &'a Lts,
    atoms: &'a AtomTable,
    /// States whose successor set may be incomplete.
    open: Vec<bool>,
}

impl Labeler<'_> {
    fn label(&self, phi: &Core) -> Bounds {
        let n = self.lts.len();
        match phi {
            Core::True => Bounds {
                lo: vec![true; n],
                hi: vec![true; n],
            },
            Core::Atom(a) => {
                let v: Vec<bool> = (0..n).map(|s| self.atoms.get(a, s)).collect();
                Bounds { lo: v.clone(), hi: v }
            }
            Core::Not(a) => {
                let b = self.label(a);
                Bounds {
                    lo: b.hi.iter().map(|v| !v).collect(),
                    hi: b.lo.iter().map(|v| !v).collect(),
                }
            }
            Core::And(a, b) => {
                let (x, y) = (self.label(a), self.label(b));
                Bounds {
                    lo: (0..n).map(|s| x.lo[s] && y.lo[s]).collect(),
                    hi: (0..n).map(|s| x.hi[s] && y.hi[s]).collect(),
                }
            }
            Core::EX(a) => {
                let x = self.label(a);
                Bounds {
                    lo: self.pre(&x.lo, false),
                    hi: self.pre(&x.hi, true),
                }
            }
            Core::EU(a, b) => {
                let (x, y) = (self.label(a), self.label(b));
                Bounds {
                    lo: self.until(&x.lo, &y.lo, false),
                    hi: self.until(&x.hi, &y.hi, true),
                }
            }
            Core::EG(a) => {
                let x = self.label(a);
                Bounds {
                    lo: self.globally(&x.lo, false),
                    hi: self.globally(&x.hi, true),
                }
            }
        }
    }

    /// States with a successor in `set`; with `optimistic`, open states too.
    fn pre(&self, set: &[bool], optimistic: bool) -> Vec<bool> {
        (0..self.lts.len())
            .map(|s| (optimistic && self.open[s]) || self.lts.successors(s).any(|t| set[t]))
            .collect()
    }

    fn until(&self, a: &[bool], b: &[bool], optimistic: bool) -> Vec<bool> {
        let mut z = b.to_vec();
        loop {
            let step = self.pre(&z, optimistic);
            let next: Vec<bool> = (0..z.len()).map(|s| z[s] || (a[s] && step[s])).collect();
            if next == z {
                return z;
            }
            z = next;
        }
    }

    fn globally(&self, a: &[bool], optimistic: bool) -> Vec<bool> {
        let mut z = a.to_vec();
        loop {
            let step = self.pre(&z, optimistic);
            let next: Vec<bool> = (0..z.len()).map(|s| z[s] && step[s]).collect();
            if next == z {
                return z;
            }
            z = next;
        }
    }

    /// A path starting at `s` demonstrating that `phi` is definitely `want`.
    fn explain(&self, s: usize, phi: &Core, want: bool) -> Vec<usize> {
        match (phi, want) {
            (Core::Not(a), _) => self.explain(s, a, !want),
            (Core::And(a, b), true) => {
                let pa = self.explain(s, a, true);
                let pb = self.explain(s, b, true);
                if pb.len() > pa.len() {
                    pb
                } else {
                    pa
                }
            }
            (Core::And(a, b), false) => {
                if !self.label(a).hi[s] {
                    self.explain(s, a, false)
                } else {
                    self.explain(s, b, false)
                }
            }
            (Core::EX(a), true) => {
                let x = self.label(a);
                let t = self
                    .lts
                    .successors(s)
                    .find(|&t| x.lo[t])
                    .expect("definite EX has a witness successor");
                let mut path = vec![s];
                path.extend(self.explain(t, a, true));
                path
            }
            (Core::EU(a, b), true) => {
                let (x, y) = (self.label(a), self.label(b));
                let reach = self.until(&x.lo, &y.lo, false);
                let path = self.bfs(s, |t| y.lo[t], |t| reach[t] && x.lo[t]);
                let last = *path.last().unwrap();
                let mut tail = self.explain(last, b, true);
                let mut out = path;
                out.pop();
                out.append(&mut tail);
                out
            }
            (Core::EG(a), true) => {
                let x = self.label(a);
                let g = self.globally(&x.lo, false);
                let mut path = vec![s];
                let mut cur = s;
                loop {
                    let t = self
                        .lts
                        .successors(cur)
                        .find(|&t| g[t])
                        .expect("definite EG continues");
                    path.push(t);
                    if path[..path.len() - 1].contains(&t) {
                        return path;
                    }
                    cur = t;
                }
            }
            _ => vec![s],
        }
    }

    /// Shortest path from `s` to a state satisfying `goal`, moving only
    /// through states satisfying `through`.
    fn bfs(&self, s: usize, goal: impl Fn(usize) -> bool, through: impl Fn(usize) -> bool) -> Vec<usize> {
        let mut parent: HashMap<usize, usize> = HashMap::new();
        let mut queue = VecDeque::from([s]);
        let mut seen = vec![false; self.lts.len()];
        seen[s] = true;
        while let Some(u) = queue.pop_front() {
            if goal(u) {
                let mut path = vec![u];
                let mut cur = u;
                while let Some(&p) = parent.get(&cur) {
                    path.push(p);
                    cur = p;
                }
                path.reverse();
                return path;
            }
            if !through(u) {
                continue;
            }
            for t in self.lts.successors(u) {
                if !seen[t] {
                    seen[t] = true;
                    parent.insert(t, u);
                    queue.push_back(t);
                }
            }
        }
        unreachable!("goal must be reachable when the until formula holds")
    }
}

/// Labels every state and checks `theta` at all initial states.
///
/// A state counts as definitely satisfying a formula only if it does for
/// every completion of the unexplored part of the LTS.
pub fn ctl_check(lts: &Lts, theta: &Ctl) -> Result<Verdict, CheckError> {
    require_completed(lts)?;
    let mut props = theta.props();
    props.sort_by(|a, b| a.name.cmp(&b.name));
    let atoms = AtomTable::build(lts, props)?;
    let labeler = Labeler {
        lts,
        atoms: &atoms,
        open: (0..lts.len()).map(|s| !lts.is_settled(s)).collect(),
    };
    let core = to_core(theta);
    let b = labeler.label(&core);
    if let Some(&s) = lts.initial.iter().find(|&&s| !b.hi[s]) {
        let path = labeler.explain(s, &core, false);
        return Ok(Verdict::violated(
            Witness::Path(path),
            format!("initial state violates {theta}"),
        ));
    }
    if lts.initial.iter().all(|&s| b.lo[s]) {
        Ok(Verdict::holds())
    } else {
        Ok(Verdict::unknown(incomplete_note(lts)))
    }
}

/// Largest LTS the naive evaluator accepts.
pub const NAIVE_LIMIT: usize = 200;

/// Reference semantics by explicit path enumeration with cycle detection.
pub fn eval_ctl_naive(lts: &Lts, s: usize, theta: &Ctl) -> Result<bool, CheckError> {
    if lts.len() > NAIVE_LIMIT {
        return Err(CheckError::OracleTooLarge {
            states: lts.len(),
            limit: NAIVE_LIMIT,
        });
    }
    require_completed(lts)?;
    let mut memo = HashMap::new();
    Ok(Naive { lts, memo: &mut memo }.eval(s, theta))
}

struct Naive<'a> {
    lts: &'a Lts,
    memo: &'a mut HashMap<(usize, *const Ctl), bool>,
}

#[derive(Clone, Copy)]
enum Quant {
    All,
    Some,
}

impl Naive<'_> {
    fn eval(&mut self, s: usize, phi: &Ctl) -> bool {
        let key = (s, phi as *const Ctl);
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let v = match phi {
            Ctl::True => true,
            Ctl::False => false,
            Ctl::Atom(p) => p.holds(&self.lts.states[s].graph),
            Ctl::Not(a) => !self.eval(s, a),
            Ctl::And(a, b) => self.eval(s, a) && self.eval(s, b),
            Ctl::Or(a, b) => self.eval(s, a) || self.eval(s, b),
            Ctl::Implies(a, b) => !self.eval(s, a) || self.eval(s, b),
            Ctl::EX(a) => {
                let succ: Vec<usize> = self.lts.successors(s).collect();
                succ.into_iter().any(|t| self.eval(t, a))
            }
            Ctl::AX(a) => {
                let succ: Vec<usize> = self.lts.successors(s).collect();
                succ.into_iter().all(|t| self.eval(t, a))
            }
            Ctl::EU(a, b) => self.path(s, a, Some(b), Quant::Some, false, &mut Vec::new()),
            Ctl::AU(a, b) => self.path(s, a, Some(b), Quant::All, false, &mut Vec::new()),
            Ctl::EW(a, b) => self.path(s, a, Some(b), Quant::Some, true, &mut Vec::new()),
            Ctl::AW(a, b) => self.path(s, a, Some(b), Quant::All, true, &mut Vec::new()),
            Ctl::EG(a) => self.path(s, a, None, Quant::Some, true, &mut Vec::new()),
            Ctl::AG(a) => self.path(s, a, None, Quant::All, true, &mut Vec::new()),
        };
        self.memo.insert(key, v);
        v
    }

    /// `a` holds along the path until `b` (if any) does; revisiting a state of
    /// the current path closes an infinite `a`-path, worth `on_cycle`.
    fn path(
        &mut self,
        s: usize,
        a: &Ctl,
        b: Option<&Ctl>,
        q: Quant,
        on_cycle: bool,
        stack: &mut Vec<usize>,
    ) -> bool {
        if b.is_some_and(|b| self.eval(s, b)) {
            return true;
        }
        if !self.eval(s, a) {
            return false;
        }
        if stack.contains(&s) {
            return on_cycle;
        }
        stack.push(s);
        let succ: Vec<usize> = self.lts.successors(s).collect();
        let v = match q {
            Quant::Some => succ
                .into_iter()
                .any(|t| self.path(t, a, b, q, on_cycle, stack)),
            Quant::All => succ
                .into_iter()
                .all(|t| self.path(t, a, b, q, on_cycle, stack)),
        };
        stack.pop();
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::canonical_key;
    use crate::condition::Condition;
    use crate::graph::Graph;
    use crate::statespace::{Expansion, State, Transition, TransitionLabel};
    use crate::temporal::Status;

    fn prop(name: &str) -> Prop {
        let mut g = Graph::new();
        g.add_node(name);
        Prop::new(name, Condition::exists_graph(g))
    }

    fn lts(labels: &[&[&str]], edges: &[(usize, usize)]) -> Lts {
        let states = labels
            .iter()
            .map(|ls| {
                let mut g = Graph::new();
                for l in *ls {
                    g.add_node(*l);
                }
                State {
                    key: canonical_key(&g),
                    graph: g,
                    depth: 0,
                    expansion: Expansion::Full,
                }
            })
            .collect();
        let ts = edges
            .iter()
            .map(|&(from, to)| Transition {
                from,
                label: TransitionLabel::skip(),
                to,
            })
            .collect();
        Lts::from_parts(states, vec![0], ts, true)
    }

    #[test]
    fn ag_true_holds() {
        let l = lts(&[&[], &[]], &[(0, 1), (1, 0)]);
        assert_eq!(ctl_check(&l, &Ctl::ag(Ctl::True)).unwrap().status, Status::Holds);
    }

    #[test]
    fn ex_and_ag_match_naive() {
        let l = lts(&[&["p"], &[], &["p"]], &[(0, 1), (0, 2), (1, 1), (2, 0)]);
        let p = Ctl::atom(prop("p"));
        for f in [
            Ctl::ex(p.clone()),
            Ctl::ax(p.clone()),
            Ctl::ag(p.clone()),
            Ctl::eg(p.clone()),
            Ctl::aw(p.clone(), Ctl::not(p.clone())),
            Ctl::au(Ctl::True, p.clone()),
        ] {
            let checked = ctl_check(&l, &f).unwrap().status == Status::Holds;
            assert_eq!(checked, eval_ctl_naive(&l, 0, &f).unwrap(), "{f}");
        }
    }

    #[test]
    fn violation_path_reaches_bad_state() {
        let l = lts(&[&["p"], &["p"], &[]], &[(0, 1), (1, 2), (2, 2)]);
        let v = ctl_check(&l, &Ctl::ag(Ctl::atom(prop("p")))).unwrap();
        assert_eq!(v.witness, Some(Witness::Path(vec![0, 1, 2])));
    }

    #[test]
    fn open_states_weaken_to_unknown() {
        let mut l = lts(&[&[], &[]], &[(0, 1), (1, 1)]);
        l.states[1].expansion = Expansion::Partial;
        l.complete = false;
        let p = Ctl::atom(prop("p"));
        assert_eq!(ctl_check(&l, &Ctl::ex(Ctl::ex(p.clone()))).unwrap().status, Status::Unknown);
        assert_eq!(ctl_check(&l, &Ctl::ex(p)).unwrap().status, Status::Violated);
    }

    #[test]
    fn naive_rejects_large() {
        let labels: Vec<&[&str]> = vec![&[]; NAIVE_LIMIT + 1];
        let edges: Vec<(usize, usize)> = (0..=NAIVE_LIMIT).map(|i| (i, i)).collect();
        let l = lts(&labels, &edges);
        assert!(matches!(
            eval_ctl_naive(&l, 0, &Ctl::True),
            Err(CheckError::OracleTooLarge { .. })
        ));
    }
}
