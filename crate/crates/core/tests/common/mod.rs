//! Test fixtures and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use adverse_core::canon::{canonical_key, CanonicalKey};
use adverse_core::condition::Condition;
use adverse_core::correctness::{
    check_last_minute, check_last_minute_r, run_query, validate_trace, CorrectnessQuery,
    CorrectnessReport, Kind, Method,
};
use adverse_core::ctl::Ctl;
use adverse_core::graph::{marking_labels, Graph, LabelSet};
use adverse_core::ltl::Ltl;
use adverse_core::morphism::Morphism;
use adverse_core::regulation::{
    build_annotated, build_joint, marking_of, JointModel, RegulationAutomaton,
    Transition as AutTransition,
};
use adverse_core::rewrite::{direct_transformations, PlainRule, Role, Rule};
use adverse_core::statespace::{
    ExplorationLimits, Expansion, Lasso, Lts, State, Transition, TransitionLabel,
};
use adverse_core::temporal::{Prop, Status};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------------------
// Graph construction by node names.

/// A graph given as named nodes and `(src, label, tgt)` edges.
pub struct Named<'a> {
    pub nodes: &'a [(&'a str, &'a str)],
    pub edges: &'a [(&'a str, &'a str, &'a str, &'a str)],
}

pub fn graph(nodes: &[&str], edges: &[(usize, &str, usize)]) -> Graph {
    let mut g = Graph::new();
    for l in nodes {
        g.add_node(*l);
    }
    for &(s, l, t) in edges {
        g.add_edge(s, t, l).unwrap();
    }
    g
}

fn build(n: &Named) -> (Graph, Vec<String>, Vec<String>) {
    let mut g = Graph::new();
    let names: Vec<String> = n.nodes.iter().map(|(name, _)| name.to_string()).collect();
    for (_, l) in n.nodes {
        g.add_node(*l);
    }
    let idx = |x: &str| names.iter().position(|n| n == x).unwrap();
    let mut edge_names = Vec::new();
    for (name, s, l, t) in n.edges {
        g.add_edge(idx(s), idx(t), *l).unwrap();
        edge_names.push(name.to_string());
    }
    (g, names, edge_names)
}

/// Rule whose interface is the set of shared node and edge names.
pub fn named_rule(name: &str, role: Role, left: Named, right: Named, ac: Option<Condition>) -> Rule {
    let (l, ln, le) = build(&left);
    let (r, rn, re) = build(&right);
    let mut k = Graph::new();
    let (mut kl, mut kr) = (Morphism::empty(), Morphism::empty());
    let mut k_idx = BTreeMap::new();
    for (i, n) in ln.iter().enumerate() {
        if let Some(j) = rn.iter().position(|m| m == n) {
            k_idx.insert(i, k.add_node(l.node_label(i)));
            kl.nodes.push(i);
            kr.nodes.push(j);
        }
    }
    for (i, n) in le.iter().enumerate() {
        if let Some(j) = re.iter().position(|m| m == n) {
            let e = l.edge(i);
            k.add_edge(k_idx[&e.src], k_idx[&e.tgt], e.label.clone()).unwrap();
            kl.edges.push(i);
            kr.edges.push(j);
        }
    }
    let plain = PlainRule::new(name, l, k, r, kl, kr).unwrap();
    Rule::new(plain, ac.unwrap_or(Condition::True), role).unwrap()
}

/// `¬∃(extra)` over `context`, where `extra` lists edges between context
/// nodes (by index).
pub fn forbid_edges(context: &Graph, extra: &[(usize, &str, usize)]) -> Condition {
    let mut c = context.clone();
    for &(s, l, t) in extra {
        c.add_edge(s, t, l).unwrap();
    }
    Condition::exists(Morphism::inclusion(context), c, Condition::True).negate()
}

// ---------------------------------------------------------------------------
// The traffic network system.

pub const TRACK: &str = "track";
pub const CAR: &str = "car";
pub const BLOCKED: &str = "blocked";
pub const JUNCTION: &str = "junction";

pub fn one_track() -> Graph {
    graph(&[JUNCTION, JUNCTION], &[(0, TRACK, 1)])
}

pub fn two_track_line() -> Graph {
    graph(&[JUNCTION, JUNCTION, JUNCTION], &[(0, TRACK, 1), (1, TRACK, 2)])
}

pub fn no_blocked() -> Prop {
    let p = graph(&[JUNCTION, JUNCTION], &[(0, BLOCKED, 1)]);
    Prop::new("NoBlocked", Condition::exists_graph(p).negate())
}

const XY: [(&str, &str); 2] = [("x", JUNCTION), ("y", JUNCTION)];
const XYZ: [(&str, &str); 3] = [("x", JUNCTION), ("y", JUNCTION), ("z", JUNCTION)];

/// System rules Ascend, Descend, Move, Repair and the environment rule Block.
/// `cap_ascend` forbids a third car on a track; `cap_move` forbids moving onto
/// a track that already carries two cars.
pub fn tns_rules(cap_ascend: bool, cap_move: bool) -> (Vec<Rule>, Vec<Rule>) {
    let ascend_l = Named {
        nodes: &XY,
        edges: &[("t", "x", TRACK, "y")],
    };
    let ascend_ac = cap_ascend.then(|| forbid_edges(&build(&ascend_l).0, &[(0, CAR, 1), (0, CAR, 1)]));
    let ascend = named_rule(
        "Ascend",
        Role::System,
        ascend_l,
        Named {
            nodes: &XY,
            edges: &[("t", "x", TRACK, "y"), ("c", "x", CAR, "y")],
        },
        ascend_ac,
    );
    let descend = named_rule(
        "Descend",
        Role::System,
        Named {
            nodes: &XY,
            edges: &[("t", "x", TRACK, "y"), ("c", "x", CAR, "y")],
        },
        Named {
            nodes: &XY,
            edges: &[("t", "x", TRACK, "y")],
        },
        None,
    );
    let move_l = Named {
        nodes: &XYZ,
        edges: &[
            ("t1", "x", TRACK, "y"),
            ("t2", "y", TRACK, "z"),
            ("c", "x", CAR, "y"),
        ],
    };
    let move_ac = cap_move.then(|| forbid_edges(&build(&move_l).0, &[(1, CAR, 2), (1, CAR, 2)]));
    let mv = named_rule(
        "Move",
        Role::System,
        move_l,
        Named {
            nodes: &XYZ,
            edges: &[
                ("t1", "x", TRACK, "y"),
                ("t2", "y", TRACK, "z"),
                ("c2", "y", CAR, "z"),
            ],
        },
        move_ac,
    );
    let repair = named_rule(
        "Repair",
        Role::System,
        Named {
            nodes: &XY,
            edges: &[("b", "x", BLOCKED, "y")],
        },
        Named {
            nodes: &XY,
            edges: &[("t", "x", TRACK, "y")],
        },
        None,
    );
    let block = named_rule(
        "Block",
        Role::Environment,
        Named {
            nodes: &XY,
            edges: &[
                ("t", "x", TRACK, "y"),
                ("c1", "x", CAR, "y"),
                ("c2", "x", CAR, "y"),
            ],
        },
        Named {
            nodes: &XY,
            edges: &[
                ("b", "x", BLOCKED, "y"),
                ("c1", "x", CAR, "y"),
                ("c2", "x", CAR, "y"),
            ],
        },
        None,
    );
    (vec![ascend, descend, mv, repair], vec![block])
}

fn sel(names: &[&str]) -> BTreeSet<String> {
    names.iter().map(|s| s.to_string()).collect()
}

pub fn transition(from: &str, to: &str, select: &[&str]) -> AutTransition {
    AutTransition {
        from: from.into(),
        to: to.into(),
        select: sel(select),
    }
}

/// q0 loops on Move, Ascend, Descend; Block leads to q1; Repair returns.
pub fn automaton_a() -> RegulationAutomaton {
    RegulationAutomaton::new(
        vec!["q0".into(), "q1".into()],
        "q0",
        vec![
            transition("q0", "q0", &["Move", "Ascend", "Descend"]),
            transition("q0", "q1", &["Block"]),
            transition("q1", "q0", &["Repair"]),
        ],
    )
    .unwrap()
}

/// Automaton A plus a q1 self-loop selecting every system rule.
pub fn automaton_b() -> RegulationAutomaton {
    RegulationAutomaton::new(
        vec!["q0".into(), "q1".into()],
        "q0",
        vec![
            transition("q0", "q0", &["Move", "Ascend", "Descend"]),
            transition("q0", "q1", &["Block"]),
            transition("q1", "q1", &["Ascend", "Descend", "Move", "Repair"]),
            transition("q1", "q0", &["Repair"]),
        ],
    )
    .unwrap()
}

/// Ascend capped, one track, automaton A.
pub fn capped_tns() -> (JointModel, Vec<Graph>) {
    let (s, e) = tns_rules(true, false);
    (JointModel::new(s, e, automaton_a()).unwrap(), vec![one_track()])
}

/// Ascend and Move capped, two tracks, automaton B.
pub fn tns_b() -> (JointModel, Vec<Graph>) {
    let (s, e) = tns_rules(true, true);
    (JointModel::new(s, e, automaton_b()).unwrap(), vec![two_track_line()])
}

pub fn query(model: &(JointModel, Vec<Graph>), kind: Kind, k: usize, method: Method) -> CorrectnessQuery {
    CorrectnessQuery {
        model: model.0.clone(),
        pre: no_blocked(),
        post: no_blocked(),
        kind,
        k,
        inits: model.1.clone(),
        limits: ExplorationLimits::default(),
        method,
    }
}

// ---------------------------------------------------------------------------
// Random graphs.

pub fn random_graph(
    rng: &mut ChaCha8Rng,
    max_nodes: usize,
    max_edges: usize,
    node_labels: &[&str],
    edge_labels: &[&str],
) -> Graph {
    let n = rng.gen_range(0..=max_nodes);
    let mut g = Graph::new();
    for _ in 0..n {
        g.add_node(*node_labels.choose(rng).unwrap());
    }
    if n > 0 {
        for _ in 0..rng.gen_range(0..=max_edges) {
            let (s, t) = (rng.gen_range(0..n), rng.gen_range(0..n));
            g.add_edge(s, t, *edge_labels.choose(rng).unwrap()).unwrap();
        }
    }
    g
}

/// A copy of `g` with node and edge ids permuted.
pub fn shuffled(g: &Graph, rng: &mut ChaCha8Rng) -> Graph {
    let mut perm: Vec<usize> = (0..g.node_count()).collect();
    perm.shuffle(rng);
    let mut inv = vec![0; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    let mut h = Graph::new();
    for &old in &perm {
        h.add_node(g.node_label(old));
    }
    let mut edges: Vec<_> = g.edges().to_vec();
    edges.shuffle(rng);
    for e in edges {
        h.add_edge(inv[e.src], inv[e.tgt], e.label).unwrap();
    }
    h
}

// ---------------------------------------------------------------------------
// Brute-force matching and isomorphism.

fn injective_node_maps(k: usize, n: usize) -> Vec<Vec<usize>> {
    fn go(k: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in 0..n {
            if !cur.contains(&v) {
                cur.push(v);
                go(k, n, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(k, n, &mut Vec::new(), &mut out);
    out
}

/// Every injective morphism `pattern -> host`, as (node map, edge map).
pub fn brute_morphisms(pattern: &Graph, host: &Graph) -> BTreeSet<(Vec<usize>, Vec<usize>)> {
    let mut out = BTreeSet::new();
    for nodes in injective_node_maps(pattern.node_count(), host.node_count()) {
        if (0..pattern.node_count()).any(|v| pattern.node_label(v) != host.node_label(nodes[v])) {
            continue;
        }
        for edges in injective_node_maps(pattern.edge_count(), host.edge_count()) {
            let ok = pattern.edges().iter().enumerate().all(|(i, e)| {
                let h = host.edge(edges[i]);
                h.label == e.label && h.src == nodes[e.src] && h.tgt == nodes[e.tgt]
            });
            if ok {
                out.insert((nodes.clone(), edges));
            }
        }
    }
    out
}

/// Isomorphism by trying every node bijection and comparing edge multisets.
pub fn brute_isomorphic(g: &Graph, h: &Graph) -> bool {
    if g.node_count() != h.node_count() || g.edge_count() != h.edge_count() {
        return false;
    }
    let mut he: Vec<_> = h.edges().iter().map(|e| (e.src, e.tgt, e.label.clone())).collect();
    he.sort();
    injective_node_maps(g.node_count(), h.node_count())
        .into_iter()
        .any(|f| {
            if (0..g.node_count()).any(|v| g.node_label(v) != h.node_label(f[v])) {
                return false;
            }
            let mut ge: Vec<_> = g
                .edges()
                .iter()
                .map(|e| (f[e.src], f[e.tgt], e.label.clone()))
                .collect();
            ge.sort();
            ge == he
        })
}

// ---------------------------------------------------------------------------
// Brute-force condition evaluation.

/// Evaluates `c` for the morphism `p` (node map, edge map) into `g` by
/// materializing every injective morphism of each nested codomain.
pub fn brute_satisfies(p: &(Vec<usize>, Vec<usize>), g: &Graph, c: &Condition) -> bool {
    match c {
        Condition::True => true,
        Condition::Not(a) => !brute_satisfies(p, g, a),
        Condition::And(cs) => cs.iter().all(|x| brute_satisfies(p, g, x)),
        Condition::Exists {
            extension,
            codomain,
            nested,
        } => brute_morphisms(codomain, g).into_iter().any(|q| {
            let commutes = extension
                .nodes
                .iter()
                .enumerate()
                .all(|(i, &a)| q.0[a] == p.0[i])
                && extension
                    .edges
                    .iter()
                    .enumerate()
                    .all(|(i, &a)| q.1[a] == p.1[i]);
            commutes && brute_satisfies(&q, g, nested)
        }),
    }
}

/// Random condition over `context` of nesting depth at most `depth`.
pub fn random_condition(
    rng: &mut ChaCha8Rng,
    context: &Graph,
    depth: usize,
    node_labels: &[&str],
    edge_labels: &[&str],
) -> Condition {
    let choice = if depth == 0 { rng.gen_range(0..2) } else { rng.gen_range(0..6) };
    match choice {
        0 => Condition::True,
        1 => Condition::false_(),
        2 => random_condition(rng, context, depth - 1, node_labels, edge_labels).negate(),
        3 => Condition::and(
            (0..rng.gen_range(0..=2))
                .map(|_| random_condition(rng, context, depth - 1, node_labels, edge_labels))
                .collect(),
        ),
        _ => {
            let mut c = context.clone();
            for _ in 0..rng.gen_range(0..=1) {
                c.add_node(*node_labels.choose(rng).unwrap());
            }
            if c.node_count() > 0 {
                for _ in 0..rng.gen_range(0..=1) {
                    let (s, t) = (rng.gen_range(0..c.node_count()), rng.gen_range(0..c.node_count()));
                    c.add_edge(s, t, *edge_labels.choose(rng).unwrap()).unwrap();
                }
            }
            let nested = random_condition(rng, &c, depth - 1, node_labels, edge_labels);
            Condition::exists(Morphism::inclusion(context), c, nested)
        }
    }
}

// ---------------------------------------------------------------------------
// Random transition systems and temporal formulas.

pub fn atom_p() -> Prop {
    Prop::new("p", Condition::exists_graph(graph(&["p"], &[])))
}

pub fn atom_q() -> Prop {
    Prop::new("q", Condition::exists_graph(graph(&["q"], &[])))
}

/// A total, fully expanded LTS over `n` states. Each state has one successor
/// and a second one with probability `branch`. Atoms `p` and `q` are set at
/// random.
pub fn random_lts(rng: &mut ChaCha8Rng, n: usize, branch: f64) -> Lts {
    let states: Vec<State> = (0..n)
        .map(|i| {
            let mut g = graph(&[&format!("s{i}")], &[]);
            if rng.gen_bool(0.5) {
                g.add_node("p");
            }
            if rng.gen_bool(0.5) {
                g.add_node("q");
            }
            State {
                key: canonical_key(&g),
                graph: g,
                depth: 0,
                expansion: Expansion::Full,
            }
        })
        .collect();
    let label = |i: usize| TransitionLabel {
        rule: format!("r{i}"),
        base: format!("r{i}"),
        role: Role::System,
    };
    let mut transitions = Vec::new();
    for s in 0..n {
        let first = rng.gen_range(0..n);
        transitions.push(Transition {
            from: s,
            label: label(0),
            to: first,
        });
        if rng.gen_bool(branch) {
            let second = rng.gen_range(0..n);
            if second != first {
                transitions.push(Transition {
                    from: s,
                    label: label(1),
                    to: second,
                });
            }
        }
    }
    let mut initial = vec![0];
    if n > 1 && rng.gen_bool(0.3) {
        initial.push(rng.gen_range(1..n));
    }
    Lts::from_parts(states, initial, transitions, true)
}

pub fn random_ltl(rng: &mut ChaCha8Rng, depth: usize) -> Ltl {
    let leaf = |rng: &mut ChaCha8Rng| match rng.gen_range(0..4) {
        0 => Ltl::atom(atom_p()),
        1 => Ltl::atom(atom_q()),
        2 => Ltl::not(Ltl::atom(atom_p())),
        _ => Ltl::True,
    };
    if depth == 0 {
        return leaf(rng);
    }
    let sub = |rng: &mut ChaCha8Rng| random_ltl(rng, depth - 1);
    match rng.gen_range(0..10) {
        0 => leaf(rng),
        1 => Ltl::not(sub(rng)),
        2 => Ltl::and(sub(rng), sub(rng)),
        3 => Ltl::or(sub(rng), sub(rng)),
        4 => Ltl::implies(sub(rng), sub(rng)),
        5 => Ltl::x(sub(rng)),
        6 => Ltl::g(sub(rng)),
        7 => Ltl::u(sub(rng), sub(rng)),
        8 => Ltl::w(sub(rng), sub(rng)),
        _ => Ltl::False,
    }
}

pub fn random_ctl(rng: &mut ChaCha8Rng, depth: usize) -> Ctl {
    let leaf = |rng: &mut ChaCha8Rng| match rng.gen_range(0..3) {
        0 => Ctl::atom(atom_p()),
        1 => Ctl::atom(atom_q()),
        _ => Ctl::True,
    };
    if depth == 0 {
        return leaf(rng);
    }
    let sub = |rng: &mut ChaCha8Rng| random_ctl(rng, depth - 1);
    match rng.gen_range(0..15) {
        0 => leaf(rng),
        1 => Ctl::not(sub(rng)),
        2 => Ctl::and(sub(rng), sub(rng)),
        3 => Ctl::or(sub(rng), sub(rng)),
        4 => Ctl::implies(sub(rng), sub(rng)),
        5 => Ctl::ax(sub(rng)),
        6 => Ctl::ex(sub(rng)),
        7 => Ctl::ag(sub(rng)),
        8 => Ctl::eg(sub(rng)),
        9 => Ctl::au(sub(rng), sub(rng)),
        10 => Ctl::eu(sub(rng), sub(rng)),
        11 => Ctl::aw(sub(rng), sub(rng)),
        12 => Ctl::ew(sub(rng), sub(rng)),
        13 => Ctl::False,
        _ => leaf(rng),
    }
}

/// LTL semantics on the lasso positions `0..n` where position `n - 1` steps
/// back to `loop_start`. Independent of the crate's evaluator.
pub fn eval_lasso(phi: &Ltl, graphs: &[&Graph], loop_start: usize, i: usize) -> bool {
    let ids: Vec<usize> = (0..graphs.len()).collect();
    lasso_table(phi, &ids, loop_start, &|p: &Prop, s: usize| p.holds(graphs[s]))[i]
}

/// Truth of `phi` at every lasso position; `ids[i]` is the state at position
/// `i` and `atom` evaluates a proposition at a state. Temporal operators are
/// read off the finite unrolling: from any position, `n` steps visit every
/// position reachable from it.
fn lasso_table(
    phi: &Ltl,
    ids: &[usize],
    loop_start: usize,
    atom: &dyn Fn(&Prop, usize) -> bool,
) -> Vec<bool> {
    let n = ids.len();
    let succ = |j: usize| if j + 1 < n { j + 1 } else { loop_start };
    let sub = |a: &Ltl| lasso_table(a, ids, loop_start, atom);
    match phi {
        Ltl::True => vec![true; n],
        Ltl::False => vec![false; n],
        Ltl::Atom(p) => ids.iter().map(|&s| atom(p, s)).collect(),
        Ltl::Not(a) => sub(a).into_iter().map(|x| !x).collect(),
        Ltl::And(a, b) => sub(a).into_iter().zip(sub(b)).map(|(x, y)| x && y).collect(),
        Ltl::Or(a, b) => sub(a).into_iter().zip(sub(b)).map(|(x, y)| x || y).collect(),
        Ltl::Implies(a, b) => sub(a).into_iter().zip(sub(b)).map(|(x, y)| !x || y).collect(),
        Ltl::X(a) => {
            let t = sub(a);
            (0..n).map(|i| t[succ(i)]).collect()
        }
        Ltl::G(a) => {
            let t = sub(a);
            (0..n)
                .map(|i| {
                    let mut j = i;
                    (0..=n).all(|_| {
                        let ok = t[j];
                        j = succ(j);
                        ok
                    })
                })
                .collect()
        }
        Ltl::U(a, b) | Ltl::W(a, b) => {
            let (ta, tb) = (sub(a), sub(b));
            let weak = matches!(phi, Ltl::W(..));
            (0..n)
                .map(|i| {
                    let mut j = i;
                    for _ in 0..=n {
                        if tb[j] {
                            return true;
                        }
                        if !ta[j] {
                            return false;
                        }
                        j = succ(j);
                    }
                    weak
                })
                .collect()
        }
    }
}

/// Searches every lasso of at most `max_len` positions starting in an
/// initial state for one violating `phi`.
pub fn violating_lasso(lts: &Lts, phi: &Ltl, max_len: usize) -> Option<Lasso> {
    let mut cache: BTreeMap<String, Vec<bool>> = BTreeMap::new();
    for p in phi.props() {
        cache
            .entry(p.name.clone())
            .or_insert_with(|| lts.states.iter().map(|s| p.holds(&s.graph)).collect());
    }
    let atom = |p: &Prop, s: usize| cache[&p.name][s];
    fn go(
        lts: &Lts,
        phi: &Ltl,
        max_len: usize,
        atom: &dyn Fn(&Prop, usize) -> bool,
        path: &mut Vec<usize>,
    ) -> Option<Lasso> {
        let last = *path.last().unwrap();
        for t in lts.successors(last).collect::<Vec<_>>() {
            for (j, &s) in path.iter().enumerate() {
                if s == t && !lasso_table(phi, path, j, atom)[0] {
                    return Some(Lasso {
                        prefix: path[..j].to_vec(),
                        cycle: path[j..].to_vec(),
                    });
                }
            }
            if path.len() < max_len {
                path.push(t);
                if let Some(l) = go(lts, phi, max_len, atom, path) {
                    return Some(l);
                }
                path.pop();
            }
        }
        None
    }
    lts.initial
        .iter()
        .find_map(|&s| go(lts, phi, max_len, &atom, &mut vec![s]))
}

// ---------------------------------------------------------------------------
// Trace correspondence between plain, joint and annotated systems.

/// One step of a trace: base rule, automaton state after the step, marking
/// after the step (empty when unannotated) and the object graph's key.
pub type Step = (String, String, String, CanonicalKey);

/// Multiset of traces of length `1..=depth`, counted with multiplicity of
/// (rule, match) choices.
pub type Traces = BTreeMap<Vec<Step>, usize>;

/// Traces of a tagged system, read back through its tags.
pub fn tagged_traces(rules: &[Rule], init: &Graph, states: &LabelSet, depth: usize) -> Traces {
    let marks = marking_labels();
    let mut out = Traces::new();
    fn go(
        rules: &[Rule],
        g: &Graph,
        states: &LabelSet,
        marks: &LabelSet,
        depth: usize,
        prefix: &mut Vec<Step>,
        out: &mut Traces,
    ) {
        if prefix.len() == depth {
            return;
        }
        for t in direct_transformations(rules, g) {
            let q = t.after.read_tag(states).unwrap().unwrap().to_string();
            let m = t.after.read_tag(marks).unwrap().map(str::to_string).unwrap_or_default();
            let obj = t.after.strip_tags(states).strip_tags(marks);
            prefix.push((
                rules[t.rule_index].base_name().to_string(),
                q,
                m,
                canonical_key(&obj),
            ));
            *out.entry(prefix.clone()).or_default() += 1;
            go(rules, &t.after, states, marks, depth, prefix, out);
            prefix.pop();
        }
    }
    go(rules, init, states, &marks, depth, &mut Vec::new(), &mut out);
    out
}

/// Traces of the plain rules synchronized with runs of `a`, built without
/// tag nodes.
pub fn product_traces(rules: &[Rule], a: &RegulationAutomaton, init: &Graph, depth: usize) -> Traces {
    let mut out = Traces::new();
    fn go(
        rules: &[Rule],
        a: &RegulationAutomaton,
        g: &Graph,
        q: &str,
        depth: usize,
        prefix: &mut Vec<Step>,
        out: &mut Traces,
    ) {
        if prefix.len() == depth {
            return;
        }
        for t in direct_transformations(rules, g) {
            let name = rules[t.rule_index].name();
            for tr in a.transitions.iter().filter(|tr| tr.from == q && tr.select.contains(name)) {
                prefix.push((name.to_string(), tr.to.clone(), String::new(), canonical_key(&t.after)));
                *out.entry(prefix.clone()).or_default() += 1;
                go(rules, a, &t.after, &tr.to, depth, prefix, out);
                prefix.pop();
            }
        }
    }
    go(rules, a, init, &a.start, depth, &mut Vec::new(), &mut out);
    out
}

/// Drops the marking component of every step.
pub fn without_markings(t: &Traces) -> Traces {
    let mut out = Traces::new();
    for (trace, n) in t {
        let stripped: Vec<Step> = trace
            .iter()
            .map(|(r, q, _, k)| (r.clone(), q.clone(), String::new(), k.clone()))
            .collect();
        *out.entry(stripped).or_default() += n;
    }
    out
}

// ---------------------------------------------------------------------------
// Correctness suites over a model.

/// A joint model with its initial family and condition pair.
#[derive(Clone)]
pub struct Instance {
    pub name: String,
    pub model: JointModel,
    pub inits: Vec<Graph>,
    pub pre: Prop,
    pub post: Prop,
}

impl Instance {
    pub fn query(&self, kind: Kind, k: usize, method: Method) -> CorrectnessQuery {
        CorrectnessQuery {
            model: self.model.clone(),
            pre: self.pre.clone(),
            post: self.post.clone(),
            kind,
            k,
            inits: self.inits.clone(),
            limits: ExplorationLimits {
                max_states: 500,
                ..Default::default()
            },
            method,
        }
    }

    pub fn run(&self, kind: Kind, k: usize, method: Method) -> CorrectnessReport {
        run_query(&self.query(kind, k, method)).unwrap()
    }

    pub fn status(&self, kind: Kind, k: usize) -> Status {
        self.run(kind, k, Method::Direct).verdict.status
    }
}

pub fn capped_instance() -> Instance {
    let (model, inits) = capped_tns();
    Instance {
        name: "tns_capped".into(),
        model,
        inits,
        pre: no_blocked(),
        post: no_blocked(),
    }
}

pub fn tns_b_instance() -> Instance {
    let (model, inits) = tns_b();
    Instance {
        name: "tns_b".into(),
        model,
        inits,
        pre: no_blocked(),
        post: no_blocked(),
    }
}

/// Kinds and bounds compared across methods.
pub const DIFFERENTIAL: [(Kind, usize); 7] = [
    (Kind::KStep, 0),
    (Kind::KStep, 1),
    (Kind::KStep, 2),
    (Kind::LastMinute, 0),
    (Kind::WeakKStep, 0),
    (Kind::WeakKStep, 1),
    (Kind::WeakKStep, 2),
];

/// Direct/reduction disagreements for the given kinds, as messages.
pub fn disagreements(inst: &Instance, kinds: &[(Kind, usize)]) -> Vec<String> {
    let mut out = Vec::new();
    for &(kind, k) in kinds {
        let r = inst.run(kind, k, Method::Both);
        let statuses: Vec<Status> = r.runs.iter().map(|m| m.verdict.status).collect();
        if !r.complete() {
            out.push(format!("{} {kind} k={k}: incomplete state space", inst.name));
        } else if r.agreement != Some(true) {
            out.push(format!("{} {kind} k={k}: {statuses:?}", inst.name));
        }
    }
    out
}

fn implies(a: Status, b: Status) -> bool {
    a != Status::Holds || b == Status::Holds
}

/// Violations of the hierarchy, characterization and weak-hierarchy
/// propositions for one instance.
pub fn hierarchy_violations(inst: &Instance, max_k: usize) -> Vec<String> {
    let mut out = Vec::new();
    let plain = inst.status(Kind::Plain, 0);
    let ks: Vec<Status> = (0..=max_k + 1).map(|k| inst.status(Kind::KStep, k)).collect();
    let ws: Vec<Status> = (0..=max_k + 1).map(|k| inst.status(Kind::WeakKStep, k)).collect();
    if !implies(plain, ks[0]) {
        out.push(format!("{}: plain holds but 0-step does not", inst.name));
    }
    for k in 0..=max_k {
        if !implies(ks[k], ks[k + 1]) {
            out.push(format!("{}: {k}-step holds but {}-step does not", inst.name, k + 1));
        }
        if !implies(ks[k], ws[k]) {
            out.push(format!("{}: {k}-step holds but weak {k}-step does not", inst.name));
        }
        if !implies(ws[k], ws[k + 1]) {
            out.push(format!("{}: weak {k}-step holds but weak {}-step does not", inst.name, k + 1));
        }
    }
    let q = inst.query(Kind::LastMinute, 0, Method::Direct);
    let r_prime = check_last_minute(&q).unwrap().verdict.status;
    let r = check_last_minute_r(&q).unwrap().verdict.status;
    if r != r_prime {
        out.push(format!("{}: defining last-minute form gives {r} but transition form gives {r_prime}", inst.name));
    }
    out
}

/// Every VIOLATED run of every kind must carry a trace that replays and
/// violates its claim. Returns failures and the number of traces checked.
pub fn witness_failures(inst: &Instance) -> (Vec<String>, usize) {
    let mut out = Vec::new();
    let mut checked = 0;
    let mut kinds = vec![(Kind::Plain, 0, Method::Direct)];
    kinds.extend(DIFFERENTIAL.iter().map(|&(k, n)| (k, n, Method::Both)));
    for (kind, k, method) in kinds {
        let q = inst.query(kind, k, method);
        let r = run_query(&q).unwrap();
        for run in &r.runs {
            if run.verdict.status != Status::Violated {
                continue;
            }
            checked += 1;
            match &run.trace {
                None => out.push(format!("{} {kind} k={k} {}: no trace", inst.name, run.engine.as_str())),
                Some(t) => {
                    if let Err(e) = validate_trace(&q, t) {
                        out.push(format!("{} {kind} k={k} {}: {e}", inst.name, run.engine.as_str()));
                    }
                }
            }
        }
    }
    (out, checked)
}

/// A with an empty-selection edge into a fresh state, an unreachable state
/// selecting every rule, and an empty self-loop at the start.
pub fn padded(a: &RegulationAutomaton, rules: &[&str]) -> RegulationAutomaton {
    let mut p = a.clone();
    p.states.extend(["pad_dead".to_string(), "pad_unreached".to_string()]);
    p.transitions.push(transition(&a.start, "pad_dead", &[]));
    p.transitions.push(transition("pad_dead", &a.start, rules));
    p.transitions.push(transition("pad_unreached", &a.start, rules));
    p.transitions.push(transition("pad_unreached", "pad_unreached", rules));
    if !a.transitions.iter().any(|t| t.from == a.start && t.to == a.start) {
        p.transitions.push(transition(&a.start, &a.start, &[]));
    }
    p
}

/// Synchronization, properization and annotation checks to `depth` steps.
/// Returns failures and the number of traces compared.
pub fn trace_violations(inst: &Instance, depth: usize) -> (Vec<String>, usize) {
    let m = &inst.model;
    let mut out = Vec::new();
    let mut compared = 0;
    let all: Vec<Rule> = m.rules().cloned().collect();
    let names: Vec<&str> = all.iter().map(|r| r.name()).collect();
    let joint = build_joint(m).unwrap();
    let annotated = build_annotated(m).unwrap();
    let states = m.state_labels();
    let raw = padded(&m.automaton, &names);
    for g in &inst.inits {
        let j = tagged_traces(&joint, &m.joint_initial(g), &states, depth);
        let product = product_traces(&all, &m.automaton, g, depth);
        if j != product {
            out.push(format!("{}: joint traces differ from the synchronized product", inst.name));
        }
        if product_traces(&all, &raw, g, depth) != product_traces(&all, &raw.properize(), g, depth) {
            out.push(format!("{}: properization changes behaviour", inst.name));
        }
        if raw.properize().transitions.len() != m.automaton.properize().transitions.len() {
            out.push(format!("{}: padding survives properization", inst.name));
        }
        let a = tagged_traces(&annotated, &m.annotated_initial(g), &states, depth);
        if without_markings(&a) != j {
            out.push(format!("{}: annotated traces differ from joint traces", inst.name));
        }
        for trace in a.keys() {
            for (rule, _, mark, _) in trace {
                if mark != marking_of(m.rule(rule).unwrap().role) {
                    out.push(format!("{}: marking {mark} after {rule}", inst.name));
                }
            }
        }
        compared += j.len();
    }
    (out, compared)
}
