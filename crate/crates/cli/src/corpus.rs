//! Seeded generator of small joint models for differential testing.
//!
//! Every added edge and node is guarded by an application condition that
//! forbids a duplicate, so generated state spaces stay finite. Candidates are
//! still filtered by exploration: both the joint and the annotated system
//! must be fully explored within [`MAX_STATES`] and no initial graph that
//! satisfies the precondition may be deadlocked. Among accepted candidates,
//! those with a verdict pattern not seen before are preferred.

use adverse_core::graph::Graph;
use adverse_core::regulation::{build_annotated, build_joint};
use adverse_core::correctness::{run_query, CorrectnessQuery, Kind, Method};
use adverse_core::rewrite::{is_deadlocked, Role};
use adverse_core::temporal::Status;
use adverse_core::statespace::{explore, ExplorationLimits};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dsl::ast::*;
use crate::dsl::{compile, Model};

pub const MAX_STATES: usize = 500;

const NODE_LABELS: [&str; 2] = ["a", "b"];
const EDGE_LABELS: [&str; 2] = ["x", "y"];

fn node(name: &str, label: &str) -> GraphItem {
    GraphItem::Node {
        name: name.into(),
        label: label.into(),
    }
}

fn edge(name: Option<&str>, src: &str, label: &str, tgt: &str) -> GraphItem {
    GraphItem::Edge {
        name: name.map(Into::into),
        src: src.into(),
        label: label.into(),
        tgt: tgt.into(),
    }
}

fn pick<'a>(rng: &mut ChaCha8Rng, xs: &[&'a str]) -> &'a str {
    xs.choose(rng).unwrap()
}

fn constraints() -> Vec<ConstraintDecl> {
    let c = |name: &str, body| ConstraintDecl {
        name: name.into(),
        body,
    };
    vec![
        c(
            "NoYaa",
            CondExpr::Not(Box::new(CondExpr::Exists(
                vec![node("u", "a"), node("v", "a"), edge(None, "u", "y", "v")],
                None,
            ))),
        ),
        c(
            "SomeXab",
            CondExpr::Exists(
                vec![node("u", "a"), node("v", "b"), edge(None, "u", "x", "v")],
                None,
            ),
        ),
        c(
            "NoB",
            CondExpr::Not(Box::new(CondExpr::Exists(vec![node("u", "b")], None))),
        ),
        c(
            "ALoops",
            CondExpr::Forall(
                vec![node("u", "a")],
                Box::new(CondExpr::Exists(vec![edge(None, "u", "x", "u")], None)),
            ),
        ),
        c("Always", CondExpr::True),
    ]
}

fn no_edge(src: &str, label: &str, tgt: &str) -> CondExpr {
    CondExpr::Not(Box::new(CondExpr::Exists(vec![edge(None, src, label, tgt)], None)))
}

fn random_rule(rng: &mut ChaCha8Rng, name: String, role: RoleDecl) -> RuleDecl {
    let n = rng.gen_range(1..=2);
    let names = ["u", "v"];
    let mut left: Vec<GraphItem> = (0..n)
        .map(|i| node(names[i], pick(rng, &NODE_LABELS)))
        .collect();
    let n_edges = rng.gen_range(0..=1);
    let mut left_edges = Vec::new();
    for i in 0..n_edges {
        let (s, t) = (names[rng.gen_range(0..n)], names[rng.gen_range(0..n)]);
        let e = format!("e{i}");
        left_edges.push((e.clone(), s, t));
        left.push(edge(Some(&e), s, pick(rng, &EDGE_LABELS), t));
    }
    let mut right = left.clone();
    let mut guards = Vec::new();
    match rng.gen_range(0..5) {
        // Delete an edge, or add one when there is none to delete.
        0 if !left_edges.is_empty() => {
            let (e, _, _) = &left_edges[0];
            right.retain(|it| !matches!(it, GraphItem::Edge { name: Some(x), .. } if x == e));
        }
        // Delete a node together with its matched edges.
        1 => {
            let victim = names[rng.gen_range(0..n)];
            right.retain(|it| match it {
                GraphItem::Node { name, .. } => name != victim,
                GraphItem::Edge { src, tgt, .. } => src != victim && tgt != victim,
            });
        }
        // Add a node, unless one with that label exists.
        2 => {
            let l = pick(rng, &NODE_LABELS);
            right.push(node("w", l));
            guards.push(CondExpr::Not(Box::new(CondExpr::Exists(
                vec![node("w", l)],
                None,
            ))));
        }
        // Swap the label of a matched edge.
        3 if !left_edges.is_empty() => {
            let (e, s, t) = left_edges[0].clone();
            let old = right
                .iter()
                .find_map(|it| match it {
                    GraphItem::Edge { name: Some(x), label, .. } if *x == e => Some(label.clone()),
                    _ => None,
                })
                .unwrap();
            let new = if old == "x" { "y" } else { "x" };
            right.retain(|it| !matches!(it, GraphItem::Edge { name: Some(x), .. } if *x == e));
            right.push(edge(Some("f"), s, new, t));
            guards.push(no_edge(s, new, t));
        }
        // Add a fresh edge between matched nodes.
        _ => {
            let (s, t) = (names[rng.gen_range(0..n)], names[rng.gen_range(0..n)]);
            let l = pick(rng, &EDGE_LABELS);
            right.push(edge(Some("f"), s, l, t));
            guards.push(no_edge(s, l, t));
        }
    }
    if rng.gen_bool(0.3) {
        let s = names[rng.gen_range(0..n)];
        guards.push(no_edge(s, pick(rng, &EDGE_LABELS), s));
    }
    let when = match guards.len() {
        0 => None,
        1 => guards.pop(),
        _ => Some(CondExpr::And(guards)),
    };
    RuleDecl {
        name,
        role,
        left,
        right,
        when,
    }
}

/// A system rule restoring `post` and an environment rule breaking it.
fn repair_and_break(post: &str, repair: String, brk: String) -> Option<(RuleDecl, RuleDecl)> {
    let ab = || vec![node("u", "a"), node("v", "b")];
    let aa = || vec![node("u", "a"), node("v", "a")];
    let with = |mut items: Vec<GraphItem>, e: GraphItem| {
        items.push(e);
        items
    };
    let rule = |name: String, role, left, right, when| RuleDecl {
        name,
        role,
        left,
        right,
        when,
    };
    let (fix_l, fix_r, fix_when, brk_l, brk_r, brk_when) = match post {
        "NoYaa" => (
            with(aa(), edge(Some("e"), "u", "y", "v")),
            aa(),
            None,
            aa(),
            with(aa(), edge(Some("e"), "u", "y", "v")),
            Some(no_edge("u", "y", "v")),
        ),
        "SomeXab" => (
            ab(),
            with(ab(), edge(Some("e"), "u", "x", "v")),
            Some(no_edge("u", "x", "v")),
            with(ab(), edge(Some("e"), "u", "x", "v")),
            ab(),
            None,
        ),
        "NoB" => (
            vec![node("v", "b")],
            vec![],
            None,
            vec![node("u", "a")],
            vec![node("u", "a"), node("v", "b")],
            Some(CondExpr::Not(Box::new(CondExpr::Exists(vec![node("w", "b")], None)))),
        ),
        "ALoops" => (
            vec![node("u", "a")],
            vec![node("u", "a"), edge(Some("e"), "u", "x", "u")],
            Some(no_edge("u", "x", "u")),
            vec![node("u", "a"), edge(Some("e"), "u", "x", "u")],
            vec![node("u", "a")],
            None,
        ),
        _ => return None,
    };
    Some((
        rule(repair, RoleDecl::System, fix_l, fix_r, fix_when),
        rule(brk, RoleDecl::Environment, brk_l, brk_r, brk_when),
    ))
}

fn random_graph(rng: &mut ChaCha8Rng, name: String) -> GraphDecl {
    let n = rng.gen_range(1..=3);
    let names = ["n0", "n1", "n2"];
    let mut items: Vec<GraphItem> = (0..n)
        .map(|i| node(names[i], pick(rng, &NODE_LABELS)))
        .collect();
    let mut seen = Vec::new();
    for _ in 0..rng.gen_range(0..=3) {
        let (s, t) = (names[rng.gen_range(0..n)], names[rng.gen_range(0..n)]);
        let l = pick(rng, &EDGE_LABELS);
        if !seen.contains(&(s, l, t)) {
            seen.push((s, l, t));
            items.push(edge(None, s, l, t));
        }
    }
    GraphDecl { name, items }
}

fn random_automaton(rng: &mut ChaCha8Rng, sys: &[String], env: &[String]) -> AutomatonDecl {
    let n = rng.gen_range(1..=3);
    let states: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    let mut transitions = Vec::new();
    for from in &states {
        for to in &states {
            if from != to && !rng.gen_bool(0.6) {
                continue;
            }
            let mut select: Vec<String> = sys
                .iter()
                .chain(env.iter())
                .filter(|_| rng.gen_bool(0.5))
                .cloned()
                .collect();
            if select.is_empty() {
                select.push(sys.choose(rng).unwrap().clone());
            }
            transitions.push(TransitionDecl {
                from: from.clone(),
                to: to.clone(),
                select,
            });
        }
    }
    // Make sure every environment rule is selected somewhere.
    for e in env {
        if !transitions.iter().any(|t| t.select.contains(e)) {
            let t = transitions.choose_mut(rng).unwrap();
            t.select.push(e.clone());
        }
    }
    AutomatonDecl {
        name: "R".into(),
        states: states.clone(),
        start: states[0].clone(),
        transitions,
    }
}

/// One unfiltered candidate model.
pub fn random_model(seed: u64) -> ModelFile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sys: Vec<String> = (0..rng.gen_range(2..=3)).map(|i| format!("S{i}")).collect();
    let env: Vec<String> = (0..rng.gen_range(1..=2)).map(|i| format!("E{i}")).collect();
    let mut items = vec![Item::Alphabet(
        NODE_LABELS
            .iter()
            .chain(EDGE_LABELS.iter())
            .map(|s| s.to_string())
            .collect(),
    )];
    let n_graphs = rng.gen_range(1..=2);
    let graphs: Vec<String> = (0..n_graphs).map(|i| format!("G{i}")).collect();
    for g in &graphs {
        items.push(Item::Graph(random_graph(&mut rng, g.clone())));
    }
    let pool = constraints();
    let pre = pool.choose(&mut rng).unwrap().name.clone();
    let post = pool.choose(&mut rng).unwrap().name.clone();
    for c in pool {
        items.push(Item::Constraint(c));
    }
    let mut rules = Vec::new();
    for s in &sys {
        rules.push(random_rule(&mut rng, s.clone(), RoleDecl::System));
    }
    for e in &env {
        rules.push(random_rule(&mut rng, e.clone(), RoleDecl::Environment));
    }
    if rng.gen_bool(0.8) {
        if let Some((fix, brk)) = repair_and_break(&post, sys[0].clone(), env[0].clone()) {
            rules[0] = fix;
            rules[sys.len()] = brk;
        }
    }
    items.extend(rules.into_iter().map(Item::Rule));
    items.push(Item::Automaton(random_automaton(&mut rng, &sys, &env)));
    items.push(Item::Query(QueryDecl {
        name: "q".into(),
        kind: Some("k-step".into()),
        k: Some(1),
        pre: Some(pre),
        post: Some(post),
        inits: graphs,
        method: Some("both".into()),
        ..Default::default()
    }));
    ModelFile { items }
}

/// The declared initial graphs and pre/postcondition names of query `q`.
pub fn query_parts(m: &Model) -> (Vec<Graph>, String, String) {
    let q = m.query("q").expect("generated models declare query q");
    let inits = q.inits.iter().map(|g| m.graph(g).unwrap().clone()).collect();
    (inits, q.pre.clone().unwrap(), q.post.clone().unwrap())
}

/// Whether a compiled candidate is small, finite and free of deadlocked
/// initial graphs satisfying the precondition.
pub fn accept(m: &Model) -> bool {
    let Ok(joint) = m.joint_model(None) else {
        return false;
    };
    let (inits, pre, _) = query_parts(m);
    let pre = m.prop(&pre).unwrap();
    let limits = ExplorationLimits {
        max_states: MAX_STATES,
        ..Default::default()
    };
    let (Ok(jr), Ok(ar)) = (build_joint(&joint), build_annotated(&joint)) else {
        return false;
    };
    let joint_inits: Vec<Graph> = inits.iter().map(|g| joint.joint_initial(g)).collect();
    if inits
        .iter()
        .zip(&joint_inits)
        .any(|(g, j)| pre.holds(g) && is_deadlocked(&jr, j))
    {
        return false;
    }
    if !inits.iter().any(|g| pre.holds(g)) {
        return false;
    }
    let jl = explore(&jr, &joint_inits, limits);
    let env_step = jl.transitions.iter().any(|t| t.label.role == Role::Environment);
    if !jl.complete || jl.len() < 3 || !env_step {
        return false;
    }
    let annotated: Vec<Graph> = inits.iter().map(|g| joint.annotated_initial(g)).collect();
    explore(&ar, &annotated, limits).complete
}

/// Kinds and bounds whose direct verdicts make up a model's signature.
pub const SIGNATURE: [(Kind, usize); 7] = [
    (Kind::KStep, 0),
    (Kind::KStep, 1),
    (Kind::KStep, 2),
    (Kind::LastMinute, 0),
    (Kind::WeakKStep, 0),
    (Kind::WeakKStep, 1),
    (Kind::WeakKStep, 2),
];

fn signature(m: &Model) -> Vec<Status> {
    let (inits, pre, post) = query_parts(m);
    SIGNATURE
        .iter()
        .map(|&(kind, k)| {
            let q = CorrectnessQuery {
                model: m.joint_model(None).unwrap(),
                pre: m.prop(&pre).unwrap().clone(),
                post: m.prop(&post).unwrap().clone(),
                kind,
                k,
                inits: inits.clone(),
                limits: ExplorationLimits {
                    max_states: MAX_STATES,
                    ..Default::default()
                },
                method: Method::Direct,
            };
            run_query(&q).map_or(Status::Unknown, |r| r.verdict.status)
        })
        .collect()
}

/// Number of candidate seeds examined by [`generate`].
pub const SEED_BUDGET: u64 = 600;

/// `n` accepted candidates with their seeds, in seed order. Candidates with a
/// new verdict signature are taken first; the rest is filled in seed order.
pub fn generate(n: usize) -> Vec<(u64, ModelFile)> {
    let mut accepted = Vec::new();
    for seed in 0..SEED_BUDGET {
        let file = random_model(seed);
        if let Ok(m) = compile(&file) {
            if accept(&m) {
                accepted.push((seed, file, signature(&m)));
            }
        }
    }
    let mut seen = Vec::new();
    let mut chosen = Vec::new();
    for (i, (_, _, sig)) in accepted.iter().enumerate() {
        if chosen.len() < n && !seen.contains(sig) {
            seen.push(sig.clone());
            chosen.push(i);
        }
    }
    for i in 0..accepted.len() {
        if chosen.len() < n && !chosen.contains(&i) {
            chosen.push(i);
        }
    }
    assert!(chosen.len() == n, "seed budget too small for {n} models");
    chosen.sort();
    chosen
        .into_iter()
        .map(|i| (accepted[i].0, accepted[i].1.clone()))
        .collect()
}
