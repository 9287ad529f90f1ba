//! Graphviz export of explored state spaces.

use std::fmt::Write;

use adverse_core::graph::{marking_labels, LabelSet};
use adverse_core::rewrite::Role;
use adverse_core::statespace::{Expansion, Lts};
use adverse_core::temporal::Prop;

/// Renders `lts` as a DOT digraph. States show their index, automaton state
/// tag, marking tag and the constraints in `props` they satisfy.
pub fn export_dot(lts: &Lts, props: &[Prop], automaton_states: &LabelSet) -> String {
    let marks = marking_labels();
    let mut s = String::from("digraph lts {\n  node [shape=box, fontname=\"monospace\"];\n");
    for (i, st) in lts.states.iter().enumerate() {
        let mut label = format!("#{i}");
        for ns in [automaton_states, &marks] {
            if let Ok(Some(tag)) = st.graph.read_tag(ns) {
                write!(label, " {tag}").unwrap();
            }
        }
        for p in props.iter().filter(|p| p.holds(&st.graph)) {
            write!(label, "\\n{}", p.name).unwrap();
        }
        let mut attrs = format!("label=\"{label}\"");
        if lts.initial.contains(&i) {
            attrs.push_str(", penwidth=2");
        }
        if st.expansion != Expansion::Full {
            attrs.push_str(", style=dashed");
        }
        writeln!(s, "  s{i} [{attrs}];").unwrap();
    }
    for t in &lts.transitions {
        let style = match t.label.role {
            Role::System => "",
            Role::Environment => ", color=red, style=bold",
            Role::Skip => ", color=gray, style=dotted",
        };
        writeln!(
            s,
            "  s{} -> s{} [label=\"{}\"{style}];",
            t.from,
            t.to,
            escape(&t.label.rule)
        )
        .unwrap();
    }
    s.push_str("}\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}
