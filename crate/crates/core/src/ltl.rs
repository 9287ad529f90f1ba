//! LTL over graph-constraint atoms: lasso semantics and model checking by
//! tableau translation of the negated formula and nested depth-first search.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::graph::Graph;
use crate::statespace::{Lasso, Lts};
use crate::temporal::{
    incomplete_note, require_completed, AtomTable, CheckError, Prop, Verdict, Witness,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ltl {
    True,
    False,
    Atom(Prop),
    Not(Box<Ltl>),
    And(Box<Ltl>, Box<Ltl>),
    Or(Box<Ltl>, Box<Ltl>),
    Implies(Box<Ltl>, Box<Ltl>),
    X(Box<Ltl>),
    G(Box<Ltl>),
    U(Box<Ltl>, Box<Ltl>),
    W(Box<Ltl>, Box<Ltl>),
}

impl Ltl {
    pub fn atom(p: Prop) -> Self {
        Ltl::Atom(p)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Ltl) -> Self {
        Ltl::Not(Box::new(a))
    }

    pub fn and(a: Ltl, b: Ltl) -> Self {
        Ltl::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Ltl, b: Ltl) -> Self {
        Ltl::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Ltl, b: Ltl) -> Self {
        Ltl::Implies(Box::new(a), Box::new(b))
    }

    pub fn x(a: Ltl) -> Self {
        Ltl::X(Box::new(a))
    }

    pub fn g(a: Ltl) -> Self {
        Ltl::G(Box::new(a))
    }

    pub fn u(a: Ltl, b: Ltl) -> Self {
        Ltl::U(Box::new(a), Box::new(b))
    }

    pub fn w(a: Ltl, b: Ltl) -> Self {
        Ltl::W(Box::new(a), Box::new(b))
    }

    /// `X^j a`; `X^0 a = a`.
    pub fn x_n(j: usize, a: Ltl) -> Self {
        (0..j).fold(a, |acc, _| Ltl::x(acc))
    }

    /// Left-nested disjunction; panics on an empty list.
    pub fn or_all(parts: Vec<Ltl>) -> Self {
        let mut it = parts.into_iter();
        let first = it.next().expect("non-empty disjunction");
        it.fold(first, Ltl::or)
    }

    /// Distinct atoms in first-occurrence order.
    pub fn props(&self) -> Vec<&Prop> {
        let mut out: Vec<&Prop> = Vec::new();
        self.collect_props(&mut out);
        out
    }

    fn collect_props<'a>(&'a self, out: &mut Vec<&'a Prop>) {
        match self {
            Ltl::True | Ltl::False => {}
            Ltl::Atom(p) => {
                if !out.iter().any(|q| q.name == p.name) {
                    out.push(p);
                }
            }
            Ltl::Not(a) | Ltl::X(a) | Ltl::G(a) => a.collect_props(out),
            Ltl::And(a, b) | Ltl::Or(a, b) | Ltl::Implies(a, b) | Ltl::U(a, b) | Ltl::W(a, b) => {
                a.collect_props(out);
                b.collect_props(out);
            }
        }
    }
}

impl fmt::Display for Ltl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ltl::True => write!(f, "true"),
            Ltl::False => write!(f, "false"),
            Ltl::Atom(p) => write!(f, "{}", p.name),
            Ltl::Not(a) => write!(f, "!{a}"),
            Ltl::X(a) => write!(f, "X {a}"),
            Ltl::G(a) => write!(f, "G {a}"),
            Ltl::And(a, b) => write!(f, "({a} & {b})"),
            Ltl::Or(a, b) => write!(f, "({a} | {b})"),
            Ltl::Implies(a, b) => write!(f, "({a} -> {b})"),
            Ltl::U(a, b) => write!(f, "({a} U {b})"),
            Ltl::W(a, b) => write!(f, "({a} W {b})"),
        }
    }
}

/// Evaluates `phi` at position 0 of the infinite word denoted by `lasso`,
/// with `graphs[s]` the graph of state `s`.
pub fn eval_ltl_on_lasso(lasso: &Lasso, graphs: &[Graph], phi: &Ltl) -> bool {
    assert!(!lasso.cycle.is_empty(), "lasso cycle must be non-empty");
    let n = lasso.len();
    let loop_start = lasso.prefix.len();
    let succ = |i: usize| if i + 1 < n { i + 1 } else { loop_start };
    let states: Vec<&Graph> = (0..n).map(|i| &graphs[lasso.at(i)]).collect();
    eval_positions(phi, &states, &succ)[0]
}

fn eval_positions(phi: &Ltl, states: &[&Graph], succ: &dyn Fn(usize) -> usize) -> Vec<bool> {
    let n = states.len();
    let rec = |a: &Ltl| eval_positions(a, states, succ);
    match phi {
        Ltl::True => vec![true; n],
        Ltl::False => vec![false; n],
        Ltl::Atom(p) => states.iter().map(|g| p.holds(g)).collect(),
        Ltl::Not(a) => rec(a).into_iter().map(|v| !v).collect(),
        Ltl::And(a, b) => zip(rec(a), rec(b), |x, y| x && y),
        Ltl::Or(a, b) => zip(rec(a), rec(b), |x, y| x || y),
        Ltl::Implies(a, b) => zip(rec(a), rec(b), |x, y| !x || y),
        Ltl::X(a) => {
            let va = rec(a);
            (0..n).map(|i| va[succ(i)]).collect()
        }
        Ltl::G(a) => greatest(&rec(a), &vec![false; n], succ),
        Ltl::U(a, b) => least(&rec(a), &rec(b), succ),
        Ltl::W(a, b) => {
            let va = rec(a);
            zip(least(&va, &rec(b), succ), greatest(&va, &vec![false; n], succ), |x, y| {
                x || y
            })
        }
    }
}

fn zip(a: Vec<bool>, b: Vec<bool>, f: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| f(x, y)).collect()
}

/// Least solution of `v[i] = b[i] || (a[i] && v[succ(i)])`.
fn least(a: &[bool], b: &[bool], succ: &dyn Fn(usize) -> usize) -> Vec<bool> {
    let mut v = vec![false; a.len()];
    loop {
        let next: Vec<bool> = (0..a.len()).map(|i| b[i] || (a[i] && v[succ(i)])).collect();
        if next == v {
            return v;
        }
        v = next;
    }
}

/// Greatest solution of `v[i] = b[i] || (a[i] && v[succ(i)])`.
fn greatest(a: &[bool], b: &[bool], succ: &dyn Fn(usize) -> usize) -> Vec<bool> {
    let mut v = vec![true; a.len()];
    loop {
        let next: Vec<bool> = (0..a.len()).map(|i| b[i] || (a[i] && v[succ(i)])).collect();
        if next == v {
            return v;
        }
        v = next;
    }
}

/// Negation normal form over `U` and its dual `R`, hash-consed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Nnf {
    True,
    False,
    Lit(String, bool),
    And(usize, usize),
    Or(usize, usize),
    X(usize),
    U(usize, usize),
    R(usize, usize),
}

#[derive(Default)]
struct Arena {
    nodes: Vec<Nnf>,
    index: HashMap<Nnf, usize>,
}

impl Arena {
    fn intern(&mut self, n: Nnf) -> usize {
        if let Some(&i) = self.index.get(&n) {
            return i;
        }
        self.nodes.push(n.clone());
        self.index.insert(n, self.nodes.len() - 1);
        self.nodes.len() - 1
    }

    fn nnf(&mut self, phi: &Ltl, pos: bool) -> usize {
        let node = match phi {
            Ltl::True if pos => Nnf::True,
            Ltl::True => Nnf::False,
            Ltl::False if pos => Nnf::False,
            Ltl::False => Nnf::True,
            Ltl::Atom(p) => Nnf::Lit(p.name.clone(), pos),
            Ltl::Not(a) => return self.nnf(a, !pos),
            Ltl::And(a, b) => {
                let (x, y) = (self.nnf(a, pos), self.nnf(b, pos));
                if pos {
                    Nnf::And(x, y)
                } else {
                    Nnf::Or(x, y)
                }
            }
            Ltl::Or(a, b) => {
                let (x, y) = (self.nnf(a, pos), self.nnf(b, pos));
                if pos {
                    Nnf::Or(x, y)
                } else {
                    Nnf::And(x, y)
                }
            }
            Ltl::Implies(a, b) => {
                let (x, y) = (self.nnf(a, !pos), self.nnf(b, pos));
                if pos {
                    Nnf::Or(x, y)
                } else {
                    Nnf::And(x, y)
                }
            }
            Ltl::X(a) => Nnf::X(self.nnf(a, pos)),
            Ltl::G(a) => {
                let x = self.nnf(a, pos);
                if pos {
                    let f = self.intern(Nnf::False);
                    Nnf::R(f, x)
                } else {
                    let t = self.intern(Nnf::True);
                    Nnf::U(t, x)
                }
            }
            Ltl::U(a, b) => {
                let (x, y) = (self.nnf(a, pos), self.nnf(b, pos));
                if pos {
                    Nnf::U(x, y)
                } else {
                    Nnf::R(x, y)
                }
            }
            // a W b = b R (a | b); its negation is !b U (!a & !b).
            Ltl::W(a, b) => {
                let (x, y) = (self.nnf(a, pos), self.nnf(b, pos));
                if pos {
                    let either = self.intern(Nnf::Or(x, y));
                    Nnf::R(y, either)
                } else {
                    let both = self.intern(Nnf::And(x, y));
                    Nnf::U(y, both)
                }
            }
        };
        self.intern(node)
    }
}

const INIT: usize = usize::MAX;

struct TableauNode {
    incoming: BTreeSet<usize>,
    old: BTreeSet<usize>,
    next: BTreeSet<usize>,
}

struct Pending {
    incoming: BTreeSet<usize>,
    new: BTreeSet<usize>,
    old: BTreeSet<usize>,
    next: BTreeSet<usize>,
}

impl Pending {
    fn with_new(&self, extra: &[usize], next: &[usize], eta: usize) -> Pending {
        let mut p = Pending {
            incoming: self.incoming.clone(),
            new: self.new.clone(),
            old: self.old.clone(),
            next: self.next.clone(),
        };
        p.old.insert(eta);
        for &x in extra {
            if !p.old.contains(&x) {
                p.new.insert(x);
            }
        }
        p.next.extend(next.iter().copied());
        p
    }
}

/// Generalized Büchi automaton whose states carry literal sets.
struct Gba {
    /// Literals `(atom, polarity)` that must hold where the state is visited.
    lits: Vec<Vec<(String, bool)>>,
    initial: Vec<usize>,
    succ: Vec<Vec<usize>>,
    /// `accepting[i][q]`: state q lies in acceptance set i.
    accepting: Vec<Vec<bool>>,
}

fn tableau(arena: &mut Arena, root: usize) -> Gba {
    let mut nodes: Vec<TableauNode> = Vec::new();
    let mut stack = vec![Pending {
        incoming: BTreeSet::from([INIT]),
        new: BTreeSet::from([root]),
        old: BTreeSet::new(),
        next: BTreeSet::new(),
    }];
    while let Some(mut p) = stack.pop() {
        let Some(eta) = p.new.pop_first() else {
            if let Some(n) = nodes.iter_mut().find(|n| n.old == p.old && n.next == p.next) {
                n.incoming.extend(p.incoming);
            } else {
                nodes.push(TableauNode {
                    incoming: p.incoming,
                    old: p.old,
                    next: p.next.clone(),
                });
                stack.push(Pending {
                    incoming: BTreeSet::from([nodes.len() - 1]),
                    new: p.next,
                    old: BTreeSet::new(),
                    next: BTreeSet::new(),
                });
            }
            continue;
        };
        match arena.nodes[eta].clone() {
            Nnf::True => {
                p.old.insert(eta);
                stack.push(p);
            }
            Nnf::False => {}
            Nnf::Lit(a, pos) => {
                let neg = arena.index.get(&Nnf::Lit(a, !pos));
                if neg.is_some_and(|n| p.old.contains(n)) {
                    continue;
                }
                p.old.insert(eta);
                stack.push(p);
            }
            Nnf::And(a, b) => stack.push(p.with_new(&[a, b], &[], eta)),
            Nnf::X(a) => stack.push(p.with_new(&[], &[a], eta)),
            Nnf::Or(a, b) => {
                stack.push(p.with_new(&[b], &[], eta));
                stack.push(p.with_new(&[a], &[], eta));
            }
            Nnf::U(a, b) => {
                stack.push(p.with_new(&[b], &[], eta));
                stack.push(p.with_new(&[a], &[eta], eta));
            }
            Nnf::R(a, b) => {
                stack.push(p.with_new(&[a, b], &[], eta));
                stack.push(p.with_new(&[b], &[eta], eta));
            }
        }
    }

    let n = nodes.len();
    let mut succ = vec![Vec::new(); n];
    let mut initial = Vec::new();
    for (j, node) in nodes.iter().enumerate() {
        for &i in &node.incoming {
            if i == INIT {
                initial.push(j);
            } else {
                succ[i].push(j);
            }
        }
    }
    let untils: Vec<(usize, usize)> = arena
        .nodes
        .iter()
        .enumerate()
        .filter_map(|(i, f)| match f {
            Nnf::U(_, b) => Some((i, *b)),
            _ => None,
        })
        .collect();
    let accepting: Vec<Vec<bool>> = if untils.is_empty() {
        vec![vec![true; n]]
    } else {
        untils
            .iter()
            .map(|&(u, b)| {
                nodes
                    .iter()
                    .map(|nd| !nd.old.contains(&u) || nd.old.contains(&b))
                    .collect()
            })
            .collect()
    };
    let lits = nodes
        .iter()
        .map(|nd| {
            nd.old
                .iter()
                .filter_map(|&f| match &arena.nodes[f] {
                    Nnf::Lit(a, pos) => Some((a.clone(), *pos)),
                    _ => None,
                })
                .collect()
        })
        .collect();
    Gba {
        lits,
        initial,
        succ,
        accepting,
    }
}

/// Product of the LTS with the degeneralized automaton.
struct Product<'a> {
    lts: &'a Lts,
    gba: &'a Gba,
    atoms: &'a AtomTable,
    ids: HashMap<(usize, usize, usize), usize>,
    states: Vec<(usize, usize, usize)>,
}

impl Product<'_> {
    fn id(&mut self, key: (usize, usize, usize)) -> usize {
        if let Some(&i) = self.ids.get(&key) {
            return i;
        }
        self.states.push(key);
        self.ids.insert(key, self.states.len() - 1);
        self.states.len() - 1
    }

    fn matches(&self, s: usize, q: usize) -> bool {
        self.gba.lits[q]
            .iter()
            .all(|(a, pos)| self.atoms.get(a, s) == *pos)
    }

    fn initial(&mut self) -> Vec<usize> {
        let mut out = Vec::new();
        for &s in &self.lts.initial {
            for &q in &self.gba.initial {
                if self.matches(s, q) {
                    out.push(self.id((s, q, 0)));
                }
            }
        }
        out
    }

    fn accepting(&self, id: usize) -> bool {
        let (_, q, c) = self.states[id];
        c == 0 && self.gba.accepting[0][q]
    }

    fn successors(&mut self, id: usize) -> Vec<usize> {
        let (s, q, c) = self.states[id];
        let sets = self.gba.accepting.len();
        let c2 = if self.gba.accepting[c][q] {
            (c + 1) % sets
        } else {
            c
        };
        let mut out = Vec::new();
        let lts_succ: Vec<usize> = self.lts.successors(s).collect();
        for t in lts_succ {
            for qi in 0..self.gba.succ[q].len() {
                let q2 = self.gba.succ[q][qi];
                if self.matches(t, q2) {
                    let id2 = self.id((t, q2, c2));
                    if !out.contains(&id2) {
                        out.push(id2);
                    }
                }
            }
        }
        out
    }
}

/// Nested depth-first search for an accepting cycle; returns the lasso as
/// product state ids.
fn nested_dfs(p: &mut Product<'_>) -> Option<(Vec<usize>, Vec<usize>)> {
    let mut visited = Vec::<bool>::new();
    let mut on_stack = Vec::<bool>::new();
    let mut inner_visited = Vec::<bool>::new();
    let grow = |v: &mut Vec<bool>, n: usize| {
        if v.len() < n {
            v.resize(n, false);
        }
    };

    for root in p.initial() {
        grow(&mut visited, p.states.len());
        if visited[root] {
            continue;
        }
        // (state, successors, next index)
        let mut stack: Vec<(usize, Vec<usize>, usize)> = Vec::new();
        visited[root] = true;
        grow(&mut on_stack, p.states.len());
        on_stack[root] = true;
        let succ = p.successors(root);
        stack.push((root, succ, 0));
        while let Some(top) = stack.last_mut() {
            if top.2 < top.1.len() {
                let t = top.1[top.2];
                top.2 += 1;
                grow(&mut visited, p.states.len());
                grow(&mut on_stack, p.states.len());
                if !visited[t] {
                    visited[t] = true;
                    on_stack[t] = true;
                    let succ = p.successors(t);
                    stack.push((t, succ, 0));
                }
                continue;
            }
            let seed = top.0;
            if p.accepting(seed) {
                if let Some((target, inner)) = inner_dfs(p, seed, &on_stack, &mut inner_visited) {
                    let outer: Vec<usize> = stack.iter().map(|e| e.0).collect();
                    let j = outer.iter().position(|&x| x == target).expect("target on stack");
                    let prefix = outer[..j].to_vec();
                    let mut cycle = outer[j..].to_vec();
                    cycle.extend_from_slice(&inner[1..]);
                    return Some((prefix, cycle));
                }
            }
            on_stack[seed] = false;
            stack.pop();
        }
    }
    None
}

/// Searches from `seed` for a state on the outer stack; returns it with the
/// inner path `seed ..= last` whose last element steps to it.
fn inner_dfs(
    p: &mut Product<'_>,
    seed: usize,
    on_stack: &[bool],
    visited: &mut Vec<bool>,
) -> Option<(usize, Vec<usize>)> {
    let mut stack: Vec<(usize, Vec<usize>, usize)> = vec![(seed, p.successors(seed), 0)];
    while let Some(top) = stack.last_mut() {
        if top.2 >= top.1.len() {
            stack.pop();
            continue;
        }
        let t = top.1[top.2];
        top.2 += 1;
        if t < on_stack.len() && on_stack[t] {
            return Some((t, stack.iter().map(|e| e.0).collect()));
        }
        if visited.len() < p.states.len() {
            visited.resize(p.states.len(), false);
        }
        if !visited[t] {
            visited[t] = true;
            let succ = p.successors(t);
            stack.push((t, succ, 0));
        }
    }
    None
}

/// Checks that every infinite path from every initial state satisfies `phi`.
///
/// Unexpanded states contribute no paths; a violating lasso found among the
/// explored states is definite, otherwise an incomplete LTS yields UNKNOWN.
pub fn ltl_check(lts: &Lts, phi: &Ltl) -> Result<Verdict, CheckError> {
    require_completed(lts)?;
    let mut props = phi.props();
    props.sort_by(|a, b| a.name.cmp(&b.name));
    let atoms = AtomTable::build(lts, props)?;
    let mut arena = Arena::default();
    let root = arena.nnf(phi, false);
    let gba = tableau(&mut arena, root);
    let mut product = Product {
        lts,
        gba: &gba,
        atoms: &atoms,
        ids: HashMap::new(),
        states: Vec::new(),
    };
    if let Some((prefix, cycle)) = nested_dfs(&mut product) {
        let project = |ids: &[usize]| -> Vec<usize> {
            ids.iter().map(|&i| product.states[i].0).collect()
        };
        let lasso = Lasso {
            prefix: project(&prefix),
            cycle: project(&cycle),
        };
        return Ok(Verdict::violated(
            Witness::Lasso(lasso),
            format!("path violating {phi}"),
        ));
    }
    if lts.complete && (0..lts.len()).all(|s| lts.is_settled(s)) {
        Ok(Verdict::holds())
    } else {
        Ok(Verdict::unknown(incomplete_note(lts)))
    }
}
