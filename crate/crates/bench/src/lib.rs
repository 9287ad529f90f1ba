//! Benchmark fixtures loaded from the bundled models.

use std::path::Path;

use adverse_cli::dsl::{load_model, Model};
use adverse_core::correctness::{CorrectnessQuery, Kind, Method};
use adverse_core::statespace::ExplorationLimits;

pub fn model(name: &str) -> Model {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models").join(name);
    load_model(&std::fs::read_to_string(path).expect("bundled model")).expect("valid model")
}

/// A query over `G0` with `NoBlocked` as pre- and postcondition.
pub fn tns_query(m: &Model, kind: Kind, k: usize, method: Method) -> CorrectnessQuery {
    let nb = m.prop("NoBlocked").expect("NoBlocked").clone();
    CorrectnessQuery {
        model: m.joint_model(None).expect("joint model"),
        pre: nb.clone(),
        post: nb,
        kind,
        k,
        inits: vec![m.graph("G0").expect("G0").clone()],
        limits: ExplorationLimits::default(),
        method,
    }
}
