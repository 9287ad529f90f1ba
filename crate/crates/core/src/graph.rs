//! Finite labeled directed multigraphs and tag nodes.
//!
//! Node and edge ids are dense indices local to one [`Graph`] value. Parallel
//! edges and self-loops are allowed. Labels are opaque strings; the object
//! alphabet, automaton states and markings are kept apart by the model loader.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

pub type NodeId = usize;
pub type EdgeId = usize;

/// A set of labels forming one namespace (object alphabet, states or markings).
pub type LabelSet = BTreeSet<String>;

/// Marking of the initial annotated state.
pub const MARK_TOP: &str = "⊤";
/// Marking left behind by a system rule.
pub const MARK_SYS: &str = "sys";
/// Marking left behind by an environment rule.
pub const MARK_ENV: &str = "env";

/// The marking namespace `{⊤, sys, env}`.
pub fn marking_labels() -> LabelSet {
    [MARK_TOP, MARK_SYS, MARK_ENV]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub src: NodeId,
    pub tgt: NodeId,
    pub label: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Graph {
    nodes: Vec<String>,
    edges: Vec<Edge>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("edge endpoint {0} is not a node of the graph")]
    DanglingEndpoint(NodeId),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TagError {
    #[error("graph already carries a tag from this namespace ({existing}); refusing to add {label}")]
    DuplicateTag { existing: String, label: String },
    #[error("graph carries more than one tag from the namespace: {0} and {1}")]
    AmbiguousTag(String, String),
    #[error("label {0} is not in the tag namespace")]
    NotInNamespace(String),
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, label: impl Into<String>) -> NodeId {
        self.nodes.push(label.into());
        self.nodes.len() - 1
    }

    pub fn add_edge(
        &mut self,
        src: NodeId,
        tgt: NodeId,
        label: impl Into<String>,
    ) -> Result<EdgeId, GraphError> {
        for n in [src, tgt] {
            if n >= self.nodes.len() {
                return Err(GraphError::DanglingEndpoint(n));
            }
        }
        self.edges.push(Edge {
            src,
            tgt,
            label: label.into(),
        });
        Ok(self.edges.len() - 1)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Number of nodes plus number of edges.
    pub fn size(&self) -> usize {
        self.nodes.len() + self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty() && self.edges.is_empty()
    }

    pub fn node_label(&self, n: NodeId) -> &str {
        &self.nodes[n]
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    pub fn node_labels(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn is_isolated(&self, n: NodeId) -> bool {
        !self.edges.iter().any(|e| e.src == n || e.tgt == n)
    }

    /// Disjoint union; ids of `other` are shifted past the ids of `self`.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let mut out = self.clone();
        let off = self.nodes.len();
        out.nodes.extend(other.nodes.iter().cloned());
        out.edges.extend(other.edges.iter().map(|e| Edge {
            src: e.src + off,
            tgt: e.tgt + off,
            label: e.label.clone(),
        }));
        out
    }

    /// Keeps the nodes and edges whose flag is set. Returns the subgraph and
    /// the old-to-new id maps. A kept edge must not have a removed endpoint.
    pub fn retain(
        &self,
        keep_node: &[bool],
        keep_edge: &[bool],
    ) -> (Graph, Vec<Option<NodeId>>, Vec<Option<EdgeId>>) {
        let mut node_map = vec![None; self.nodes.len()];
        let mut out = Graph::new();
        for (n, label) in self.nodes.iter().enumerate() {
            if keep_node[n] {
                node_map[n] = Some(out.add_node(label.clone()));
            }
        }
        let mut edge_map = vec![None; self.edges.len()];
        for (e, edge) in self.edges.iter().enumerate() {
            if keep_edge[e] {
                let src = node_map[edge.src].expect("kept edge with removed source");
                let tgt = node_map[edge.tgt].expect("kept edge with removed target");
                edge_map[e] = Some(out.add_edge(src, tgt, edge.label.clone()).unwrap());
            }
        }
        (out, node_map, edge_map)
    }

    /// Isolated nodes whose label lies in `namespace`.
    fn tag_nodes<'a>(&'a self, namespace: &'a LabelSet) -> impl Iterator<Item = NodeId> + 'a {
        (0..self.nodes.len())
            .filter(move |&n| namespace.contains(&self.nodes[n]) && self.is_isolated(n))
    }

    /// Adds one isolated node carrying `label`, which must belong to `namespace`.
    pub fn attach_tag(&self, label: &str, namespace: &LabelSet) -> Result<Graph, TagError> {
        if !namespace.contains(label) {
            return Err(TagError::NotInNamespace(label.to_string()));
        }
        if let Some(existing) = self.read_tag(namespace)? {
            return Err(TagError::DuplicateTag {
                existing: existing.to_string(),
                label: label.to_string(),
            });
        }
        let mut out = self.clone();
        out.add_node(label);
        Ok(out)
    }

    /// The unique tag from `namespace`, if any.
    pub fn read_tag(&self, namespace: &LabelSet) -> Result<Option<&str>, TagError> {
        let mut tags = self.tag_nodes(namespace);
        let first = tags.next();
        if let (Some(a), Some(b)) = (first, tags.next()) {
            return Err(TagError::AmbiguousTag(
                self.nodes[a].clone(),
                self.nodes[b].clone(),
            ));
        }
        Ok(first.map(|n| self.nodes[n].as_str()))
    }

    /// Removes every tag node of `namespace`.
    pub fn strip_tags(&self, namespace: &LabelSet) -> Graph {
        let tags: BTreeSet<NodeId> = self.tag_nodes(namespace).collect();
        let keep_node: Vec<bool> = (0..self.nodes.len()).map(|n| !tags.contains(&n)).collect();
        let keep_edge = vec![true; self.edges.len()];
        self.retain(&keep_node, &keep_edge).0
    }

    /// All node and edge labels occurring in the graph.
    pub fn labels(&self) -> BTreeSet<&str> {
        self.nodes
            .iter()
            .map(String::as_str)
            .chain(self.edges.iter().map(|e| e.label.as_str()))
            .collect()
    }
}

impl fmt::Display for Graph {
    /// Compact rendering: `{0:junction 1:junction | 0-track->1}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, l) in self.nodes.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{i}:{l}")?;
        }
        if !self.edges.is_empty() {
            write!(f, " |")?;
            for e in &self.edges {
                write!(f, " {}-{}->{}", e.src, e.label, e.tgt)?;
            }
        }
        write!(f, "}}")
    }
}
