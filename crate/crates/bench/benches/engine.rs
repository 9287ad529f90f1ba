use adverse_bench::{model, tns_query};
use adverse_core::canon::canonical_key;
use adverse_core::correctness::{run_query, Kind, Method};
use adverse_core::graph::Graph;
use adverse_core::regulation::build_joint;
use adverse_core::statespace::{explore, ExplorationLimits};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn canonical(c: &mut Criterion) {
    let mut g = Graph::new();
    let (a, b) = (g.add_node("junction"), g.add_node("junction"));
    g.add_edge(a, b, "track").unwrap();
    for _ in 0..20 {
        g.add_edge(a, b, "car").unwrap();
    }
    c.bench_function("canonical_key/20 parallel cars", |bench| bench.iter(|| canonical_key(black_box(&g))));
}

fn exploration(c: &mut Criterion) {
    let mut group = c.benchmark_group("explore");
    for name in ["tns_capped.gts", "tns_b.gts"] {
        let m = model(name);
        let joint = m.joint_model(None).unwrap();
        let rules = build_joint(&joint).unwrap();
        let init = [joint.joint_initial(m.graph("G0").unwrap())];
        group.bench_function(name, |bench| {
            bench.iter(|| explore(&rules, black_box(&init), ExplorationLimits::default()))
        });
    }
    let m = model("tns.gts");
    let joint = m.joint_model(None).unwrap();
    let rules = build_joint(&joint).unwrap();
    let init = [joint.joint_initial(m.graph("G0").unwrap())];
    for size in [10, 14, 18] {
        let limits = ExplorationLimits { max_graph_size: size, ..Default::default() };
        group.bench_with_input(BenchmarkId::new("tns.gts max-graph-size", size), &limits, |bench, l| {
            bench.iter(|| explore(&rules, &init, *l))
        });
    }
    group.finish();
}

fn checking(c: &mut Criterion) {
    let mut group = c.benchmark_group("check");
    let capped = model("tns_capped.gts");
    let b = model("tns_b.gts");
    for (label, m, kind, k) in [
        ("capped k-step 1", &capped, Kind::KStep, 1),
        ("capped last-minute", &capped, Kind::LastMinute, 0),
        ("tns_b k-step 2", &b, Kind::KStep, 2),
        ("tns_b weak 1-step", &b, Kind::WeakKStep, 1),
    ] {
        for method in [Method::Direct, Method::Reduction] {
            let q = tns_query(m, kind, k, method);
            group.bench_function(BenchmarkId::new(label, method.as_str()), |bench| {
                bench.iter(|| run_query(black_box(&q)).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, canonical, exploration, checking);
criterion_main!(benches);
