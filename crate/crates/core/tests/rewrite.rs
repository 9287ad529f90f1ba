mod common;

use std::collections::BTreeSet;

use adverse_core::canon::canonical_key;
use adverse_core::condition::{graph_satisfies, Condition};
use adverse_core::graph::Graph;
use adverse_core::morphism::{enumerate_injective_morphisms, Morphism};
use adverse_core::regulation::{build_joint, JointModel, RegulationAutomaton};
use adverse_core::rewrite::{
    apply_at, direct_transformations, is_deadlocked, PlainRule, RewriteError, Role, Rule,
};
use common::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const NODES: [&str; 2] = ["a", "b"];
const EDGES: [&str; 2] = ["x", "y"];

fn rule_named<'a>(rules: &'a [Rule], name: &str) -> &'a Rule {
    rules.iter().find(|r| r.name() == name).unwrap()
}

/// A rule with L of at most two nodes, K a random sub-span and R = K plus
/// random additions, guarded by a depth-one condition.
fn random_rule(rng: &mut ChaCha8Rng, i: usize) -> Rule {
    let l = random_graph(rng, 2, 2, &NODES, &EDGES);
    let mut k = Graph::new();
    let mut kl = Morphism::empty();
    let mut pos = vec![None; l.node_count()];
    for (v, slot) in pos.iter_mut().enumerate() {
        if rng.gen_bool(0.6) {
            *slot = Some(k.add_node(l.node_label(v)));
            kl.nodes.push(v);
        }
    }
    for (e, edge) in l.edges().iter().enumerate() {
        if let (Some(s), Some(t)) = (pos[edge.src], pos[edge.tgt]) {
            if rng.gen_bool(0.6) {
                k.add_edge(s, t, edge.label.clone()).unwrap();
                kl.edges.push(e);
            }
        }
    }
    let mut r = k.clone();
    if rng.gen_bool(0.5) {
        r.add_node(*NODES.choose(rng).unwrap());
    }
    if r.node_count() > 0 && rng.gen_bool(0.5) {
        let (s, t) = (rng.gen_range(0..r.node_count()), rng.gen_range(0..r.node_count()));
        r.add_edge(s, t, *EDGES.choose(rng).unwrap()).unwrap();
    }
    let kr = Morphism::identity(&k);
    let ac = random_condition(rng, &l, 1, &NODES, &EDGES);
    let plain = PlainRule::new(format!("r{i}"), l, k, r, kl, kr).unwrap();
    Rule::new(plain, ac, Role::System).unwrap()
}

/// Matches that are injective, satisfy the condition and leave no dangling
/// edge, found without the engine's matcher.
fn brute_applicable(rule: &Rule, g: &Graph) -> BTreeSet<(Vec<usize>, Vec<usize>)> {
    let p = &rule.plain;
    brute_morphisms(&p.left, g)
        .into_iter()
        .filter(|m| brute_satisfies(m, g, &rule.ac))
        .filter(|(nodes, edges)| {
            let deleted: Vec<usize> = (0..p.left.node_count())
                .filter(|v| !p.k_to_left.nodes.contains(v))
                .map(|v| nodes[v])
                .collect();
            g.edges().iter().enumerate().all(|(e, edge)| {
                edges.contains(&e) || !(deleted.contains(&edge.src) || deleted.contains(&edge.tgt))
            })
        })
        .collect()
}

#[test]
fn direct_transformations_agree_with_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut steps = 0;
    for round in 0..400 {
        let rules: Vec<Rule> = (0..3).map(|i| random_rule(&mut rng, i)).collect();
        let g = random_graph(&mut rng, 6, 6, &NODES, &EDGES);
        let found = direct_transformations(&rules, &g);
        let order: Vec<_> = found.iter().map(|s| (s.rule_index, s.match_index)).collect();
        assert!(order.windows(2).all(|w| w[0] < w[1]), "steps out of order");
        for (i, rule) in rules.iter().enumerate() {
            let expected = brute_applicable(rule, &g);
            let got: BTreeSet<_> = found
                .iter()
                .filter(|s| s.rule_index == i)
                .map(|s| (s.matching.nodes.clone(), s.matching.edges.clone()))
                .collect();
            assert_eq!(got, expected, "round {round} rule {i} on {g}");
        }
        for s in &found {
            let p = &rules[s.rule_index].plain;
            let deleted_nodes = p.left.node_count() - p.interface.node_count();
            let created_nodes = p.right.node_count() - p.interface.node_count();
            assert_eq!(s.after.node_count(), g.node_count() - deleted_nodes + created_nodes);
            let deleted_edges = p.left.edge_count() - p.interface.edge_count();
            let created_edges = p.right.edge_count() - p.interface.edge_count();
            assert_eq!(s.after.edge_count(), g.edge_count() - deleted_edges + created_edges);
            steps += 1;
        }
    }
    assert!(steps > 200, "too few applicable matches: {steps}");
}

#[test]
fn repair_relabels_the_blocked_edge() {
    let (sys, _) = tns_rules(true, false);
    let repair = rule_named(&sys, "Repair");
    let g = graph(&[JUNCTION, JUNCTION], &[(0, BLOCKED, 1), (0, CAR, 1), (0, CAR, 1)]);
    let m = &enumerate_injective_morphisms(&repair.plain.left, &g)[0];
    let h = apply_at(repair, &g, m).unwrap().graph;
    let expected = graph(&[JUNCTION, JUNCTION], &[(0, TRACK, 1), (0, CAR, 1), (0, CAR, 1)]);
    assert_eq!(canonical_key(&h), canonical_key(&expected));
}

#[test]
fn skip_is_the_identity() {
    let skip = Rule::unconditional(PlainRule::skip(), Role::Skip);
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..20 {
        let g = random_graph(&mut rng, 4, 4, &NODES, &EDGES);
        let h = apply_at(&skip, &g, &Morphism::empty()).unwrap().graph;
        assert!(brute_isomorphic(&g, &h));
    }
    assert_eq!(PlainRule::skip().invert(), PlainRule::skip());
}

#[test]
fn dangling_edge_blocks_node_deletion() {
    // Deletes an `a` node; the host has an edge into it from another node.
    let l = graph(&["a"], &[]);
    let plain = PlainRule::new("Del", l, Graph::new(), Graph::new(), Morphism::empty(), Morphism::empty()).unwrap();
    let rule = Rule::unconditional(plain, Role::System);
    let host = graph(&["a", "b"], &[(1, "x", 0)]);
    let m = Morphism {
        nodes: vec![0],
        edges: vec![],
    };
    assert!(matches!(apply_at(&rule, &host, &m), Err(RewriteError::DanglingEdge(0))));
    assert!(direct_transformations(std::slice::from_ref(&rule), &host).is_empty());
    assert!(brute_applicable(&rule, &host).is_empty());
    // No subgraph of the host is a pushout complement: removing the node
    // requires removing the edge, which the rule does not delete.
    assert_eq!(direct_transformations(&[rule], &graph(&["a", "b"], &[])).len(), 1);
}

#[test]
fn application_condition_and_invalid_match() {
    let (sys, _) = tns_rules(true, false);
    let ascend = rule_named(&sys, "Ascend");
    let full = graph(&[JUNCTION, JUNCTION], &[(0, TRACK, 1), (0, CAR, 1), (0, CAR, 1)]);
    let m = Morphism {
        nodes: vec![0, 1],
        edges: vec![0],
    };
    assert_eq!(apply_at(ascend, &full, &m), Err(RewriteError::ApplicationConditionViolated));
    let bad = Morphism {
        nodes: vec![1, 0],
        edges: vec![0],
    };
    assert!(matches!(apply_at(ascend, &full, &bad), Err(RewriteError::MatchInvalid(_))));
}

#[test]
fn inversion() {
    let (sys, env) = tns_rules(false, false);
    for r in sys.iter().chain(&env) {
        assert_eq!(r.plain.invert().invert(), r.plain);
    }
    let repair = rule_named(&sys, "Repair").plain.invert();
    assert_eq!(repair.left, graph(&[JUNCTION, JUNCTION], &[(0, TRACK, 1)]));
    assert_eq!(repair.right, graph(&[JUNCTION, JUNCTION], &[(0, BLOCKED, 1)]));
}

#[test]
fn dpo_steps_are_reversible() {
    let (sys, env) = tns_rules(false, false);
    let hosts = [
        one_track(),
        two_track_line(),
        graph(&[JUNCTION, JUNCTION, JUNCTION], &[(0, TRACK, 1), (1, TRACK, 2), (0, CAR, 1), (0, CAR, 1)]),
        graph(&[JUNCTION, JUNCTION], &[(0, BLOCKED, 1), (0, CAR, 1), (0, CAR, 1)]),
    ];
    let mut checked = 0;
    for r in sys.iter().chain(&env) {
        let inverse = Rule::unconditional(r.plain.invert(), r.role);
        for g in &hosts {
            for m in enumerate_injective_morphisms(&r.plain.left, g) {
                let Ok(d) = apply_at(r, g, &m) else { continue };
                let back = apply_at(&inverse, &d.graph, &d.comatch).unwrap().graph;
                assert!(brute_isomorphic(&back, g), "{} on {g}", r.name());
                checked += 1;
            }
        }
    }
    assert!(checked >= 8);
}

fn joint_capped() -> Vec<Rule> {
    build_joint(&capped_tns().0).unwrap()
}

#[test]
fn joint_successor_examples() {
    let (model, _) = capped_tns();
    let rules = joint_capped();
    let start = model.joint_initial(&one_track());
    let steps = direct_transformations(&rules, &start);
    assert_eq!(steps.len(), 1);
    assert_eq!(rules[steps[0].rule_index].base_name(), "Ascend");

    let mut blocked = graph(&[JUNCTION, JUNCTION], &[(0, BLOCKED, 1), (0, CAR, 1), (0, CAR, 1)]);
    blocked.add_node("q1");
    let steps = direct_transformations(&rules, &blocked);
    assert_eq!(steps.len(), 1);
    assert_eq!(rules[steps[0].rule_index].base_name(), "Repair");
    assert!(!is_deadlocked(&rules, &blocked));

    assert!(direct_transformations(&[], &start).is_empty());
    assert!(is_deadlocked(&[], &start));

    // Without a way back from q1 the post-Block state is stuck.
    let (s, e) = tns_rules(true, false);
    let one_way = RegulationAutomaton::new(
        vec!["q0".into(), "q1".into()],
        "q0",
        vec![
            transition("q0", "q0", &["Move", "Ascend", "Descend"]),
            transition("q0", "q1", &["Block"]),
        ],
    )
    .unwrap();
    let rules = build_joint(&JointModel::new(s, e, one_way).unwrap()).unwrap();
    assert!(is_deadlocked(&rules, &blocked));
}

#[test]
fn block_falsifies_no_blocked() {
    let (_, env) = tns_rules(true, false);
    let g = graph(&[JUNCTION, JUNCTION], &[(0, TRACK, 1), (0, CAR, 1), (0, CAR, 1)]);
    assert!(graph_satisfies(&g, &no_blocked().constraint).unwrap());
    for s in direct_transformations(&env, &g) {
        assert!(!graph_satisfies(&s.after, &no_blocked().constraint).unwrap());
        assert!(graph_satisfies(&s.after, &Condition::True).unwrap());
    }
}
