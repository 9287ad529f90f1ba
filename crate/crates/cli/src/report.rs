//! Text and JSON rendering of verdicts.

use std::fmt::Write;

use adverse_core::correctness::{CorrectnessReport, MethodRun, Trace, INIT_FAMILY_NOTE};
use adverse_core::graph::Graph;
use adverse_core::temporal::Status;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct JsonNode {
    pub id: usize,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct JsonEdge {
    pub src: usize,
    pub tgt: usize,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct JsonGraph {
    pub nodes: Vec<JsonNode>,
    pub edges: Vec<JsonEdge>,
}

impl From<&Graph> for JsonGraph {
    fn from(g: &Graph) -> Self {
        JsonGraph {
            nodes: g
                .node_labels()
                .iter()
                .enumerate()
                .map(|(id, l)| JsonNode {
                    id,
                    label: l.clone(),
                })
                .collect(),
            edges: g
                .edges()
                .iter()
                .map(|e| JsonEdge {
                    src: e.src,
                    tgt: e.tgt,
                    label: e.label.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessStep {
    /// Underlying rule, `null` for the initial state.
    pub rule: Option<String>,
    /// `init`, `system`, `environment` or `skip`.
    pub role: String,
    pub graph: JsonGraph,
}

/// The stable report shape shared by the text and JSON formats.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    pub verdict: String,
    pub kind: String,
    pub k: Option<usize>,
    pub method: String,
    pub states: usize,
    pub complete: bool,
    pub witness: Vec<WitnessStep>,
    /// Index of the witness step the final step loops back to.
    pub loop_start: Option<usize>,
    pub agreement: Option<bool>,
    pub defect: bool,
    pub note: String,
    pub scope: String,
}

fn witness(trace: Option<&Trace>) -> (Vec<WitnessStep>, Option<usize>) {
    let Some(t) = trace else {
        return (Vec::new(), None);
    };
    let steps = t
        .steps
        .iter()
        .map(|s| WitnessStep {
            rule: s.rule.clone(),
            role: s.role.map_or("init", |r| r.as_str()).to_string(),
            graph: JsonGraph::from(&s.graph),
        })
        .collect();
    (steps, t.loop_start)
}

impl Report {
    pub fn from_correctness(r: &CorrectnessReport) -> Report {
        let (witness, loop_start) = witness(r.trace());
        Report {
            verdict: r.verdict.status.as_str().to_string(),
            kind: r.kind.as_str().to_string(),
            k: r.kind.uses_k().then_some(r.k),
            method: r.method.as_str().to_string(),
            states: r.states(),
            complete: r.complete(),
            witness,
            loop_start,
            agreement: r.agreement,
            defect: r.defect,
            note: r.verdict.note.clone(),
            scope: INIT_FAMILY_NOTE.to_string(),
        }
    }

    /// Report of a check of the declared formula `name`.
    pub fn from_formula(name: &str, run: &MethodRun) -> Report {
        let trace = match run.verdict.status {
            Status::Violated => run.trace.as_ref(),
            _ => None,
        };
        let (witness, loop_start) = witness(trace);
        Report {
            verdict: run.verdict.status.as_str().to_string(),
            kind: format!("formula {name}"),
            k: None,
            method: run.engine.as_str().to_string(),
            states: run.states,
            complete: run.complete,
            witness,
            loop_start,
            agreement: None,
            defect: false,
            note: run.verdict.note.clone(),
            scope: INIT_FAMILY_NOTE.to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "verdict: {}", self.verdict).unwrap();
        match self.k {
            Some(k) => writeln!(s, "kind: {} (k = {k})", self.kind).unwrap(),
            None => writeln!(s, "kind: {}", self.kind).unwrap(),
        }
        writeln!(s, "method: {}", self.method).unwrap();
        let completeness = if self.complete { "complete" } else { "truncated" };
        writeln!(s, "states: {} ({completeness})", self.states).unwrap();
        if let Some(a) = self.agreement {
            writeln!(s, "agreement: {a}").unwrap();
        }
        if self.defect {
            writeln!(s, "defect: direct and reduction verdicts disagree").unwrap();
        }
        if !self.note.is_empty() {
            writeln!(s, "note: {}", self.note).unwrap();
        }
        if !self.witness.is_empty() {
            writeln!(s, "witness:").unwrap();
            for (i, w) in self.witness.iter().enumerate() {
                let rule = w.rule.as_deref().unwrap_or("-");
                writeln!(s, "  {i:>3} {:<11} {rule:<12} {}", w.role, graph_text(&w.graph)).unwrap();
            }
            if let Some(l) = self.loop_start {
                writeln!(s, "  loops back to step {l}").unwrap();
            }
        }
        writeln!(s, "scope: {}", self.scope).unwrap();
        s
    }
}

fn graph_text(g: &JsonGraph) -> String {
    let mut s = String::from("{");
    for (i, n) in g.nodes.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        write!(s, "{}:{}", n.id, n.label).unwrap();
    }
    if !g.edges.is_empty() {
        s.push_str(" |");
        for e in &g.edges {
            write!(s, " {}-{}->{}", e.src, e.label, e.tgt).unwrap();
        }
    }
    s.push('}');
    s
}
