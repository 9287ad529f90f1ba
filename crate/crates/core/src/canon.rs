//! Canonical forms of labeled multigraphs.
//!
//! Colour refinement on labels and labelled in/out neighbourhoods produces an
//! ordered partition; remaining ties are broken by individualising vertices
//! and keeping the lexicographically least edge list over all leaves. Leaves
//! with equal encodings yield automorphisms, which prune sibling branches.

use std::collections::BTreeMap;
use std::fmt;

use crate::graph::{Graph, NodeId};

/// Opaque isomorphism-class key: equal iff the graphs are isomorphic.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey(Vec<u8>);

impl CanonicalKey {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Debug for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CanonicalKey(")?;
        for b in self.0.iter().take(16) {
            write!(f, "{b:02x}")?;
        }
        if self.0.len() > 16 {
            write!(f, "..")?;
        }
        write!(f, ")")
    }
}

/// A graph renumbered into canonical order together with its key.
#[derive(Clone, Debug)]
pub struct CanonicalForm {
    pub key: CanonicalKey,
    pub graph: Graph,
    /// `position[v]` is the canonical index of original node `v`.
    pub position: Vec<NodeId>,
}

pub fn canonical_key(g: &Graph) -> CanonicalKey {
    canonical_form(g).key
}

pub fn canonical_form(g: &Graph) -> CanonicalForm {
    let labels = LabelRanks::new(g);
    let mut search = Search {
        g,
        labels: &labels,
        best: None,
        automorphisms: Vec::new(),
    };
    let init = search.refine(labels.node.clone());
    search.descend(init, &mut Vec::new());
    let (_, position) = search.best.expect("search visits at least one leaf");
    build_form(g, position)
}

struct LabelRanks {
    node: Vec<u32>,
    edge: Vec<u32>,
}

impl LabelRanks {
    fn new(g: &Graph) -> Self {
        let mut all: Vec<&str> = g
            .node_labels()
            .iter()
            .map(String::as_str)
            .chain(g.edges().iter().map(|e| e.label.as_str()))
            .collect();
        all.sort_unstable();
        all.dedup();
        let rank = |l: &str| all.binary_search(&l).unwrap() as u32;
        LabelRanks {
            node: g.node_labels().iter().map(|l| rank(l)).collect(),
            edge: g.edges().iter().map(|e| rank(&e.label)).collect(),
        }
    }
}

/// Sorted `(src position, tgt position, edge label rank)` triples.
type Encoding = Vec<(u32, u32, u32)>;

struct Search<'a> {
    g: &'a Graph,
    labels: &'a LabelRanks,
    best: Option<(Encoding, Vec<NodeId>)>,
    automorphisms: Vec<Vec<NodeId>>,
}

impl Search<'_> {
    /// Refines colours until stable; colours are renumbered densely in an
    /// isomorphism-invariant order.
    fn refine(&self, mut colors: Vec<u32>) -> Vec<u32> {
        type Signature = (u32, Vec<(u8, u32, u32)>);
        let n = self.g.node_count();
        let mut classes = count_classes(&colors);
        loop {
            let mut sigs: Vec<Signature> = colors
                .iter()
                .map(|&c| (c, Vec::new()))
                .collect();
            for (e, edge) in self.g.edges().iter().enumerate() {
                let l = self.labels.edge[e];
                sigs[edge.src].1.push((0, l, colors[edge.tgt]));
                sigs[edge.tgt].1.push((1, l, colors[edge.src]));
            }
            for s in &mut sigs {
                s.1.sort_unstable();
            }
            let mut distinct: Vec<&Signature> = sigs.iter().collect();
            distinct.sort();
            distinct.dedup();
            let next: Vec<u32> = (0..n)
                .map(|v| distinct.binary_search(&&sigs[v]).unwrap() as u32)
                .collect();
            let next_classes = distinct.len();
            colors = next;
            if next_classes == classes {
                return colors;
            }
            classes = next_classes;
        }
    }

    fn descend(&mut self, colors: Vec<u32>, prefix: &mut Vec<NodeId>) {
        let n = colors.len();
        let Some(cell) = first_nontrivial_cell(&colors) else {
            self.leaf(colors);
            return;
        };
        let members: Vec<NodeId> = (0..n).filter(|&v| colors[v] == cell).collect();
        let mut explored: Vec<NodeId> = Vec::new();
        for &v in &members {
            if !explored.is_empty() {
                let orbit_of = self.orbits(prefix, n);
                if explored.iter().any(|&w| orbit_of[w] == orbit_of[v]) {
                    continue;
                }
            }
            explored.push(v);
            let split: Vec<u32> = colors
                .iter()
                .enumerate()
                .map(|(x, &c)| 2 * c + u32::from(c == cell && x != v))
                .collect();
            let refined = self.refine(split);
            prefix.push(v);
            self.descend(refined, prefix);
            prefix.pop();
        }
    }

    /// Orbit representatives under the automorphisms found so far that fix
    /// `prefix` pointwise.
    fn orbits(&self, prefix: &[NodeId], n: usize) -> Vec<NodeId> {
        let mut parent: Vec<NodeId> = (0..n).collect();
        fn find(p: &mut [NodeId], x: NodeId) -> NodeId {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let nx = p[y];
                p[y] = r;
                y = nx;
            }
            r
        }
        for a in &self.automorphisms {
            if prefix.iter().any(|&v| a[v] != v) {
                continue;
            }
            for (x, &y) in a.iter().enumerate() {
                let (rx, ry) = (find(&mut parent, x), find(&mut parent, y));
                if rx != ry {
                    parent[rx.max(ry)] = rx.min(ry);
                }
            }
        }
        (0..n).map(|x| find(&mut parent, x)).collect()
    }

    fn leaf(&mut self, colors: Vec<u32>) {
        let position: Vec<NodeId> = colors.iter().map(|&c| c as NodeId).collect();
        let enc = encode_edges(self.g, self.labels, &position);
        match &self.best {
            None => self.best = Some((enc, position)),
            Some((best, best_pos)) => match enc.cmp(best) {
                std::cmp::Ordering::Less => self.best = Some((enc, position)),
                std::cmp::Ordering::Equal => {
                    // v -> node that occupies v's position in the best leaf.
                    let mut at = vec![0; position.len()];
                    for (v, &p) in best_pos.iter().enumerate() {
                        at[p] = v;
                    }
                    let auto: Vec<NodeId> = position.iter().map(|&p| at[p]).collect();
                    if auto.iter().enumerate().any(|(x, &y)| x != y) {
                        self.automorphisms.push(auto);
                    }
                }
                std::cmp::Ordering::Greater => {}
            },
        }
    }
}

fn count_classes(colors: &[u32]) -> usize {
    let mut c = colors.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

fn first_nontrivial_cell(colors: &[u32]) -> Option<u32> {
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for &c in colors {
        *counts.entry(c).or_default() += 1;
    }
    counts.into_iter().find(|&(_, k)| k > 1).map(|(c, _)| c)
}

fn encode_edges(g: &Graph, labels: &LabelRanks, position: &[NodeId]) -> Encoding {
    let mut enc: Encoding = g
        .edges()
        .iter()
        .enumerate()
        .map(|(e, edge)| {
            (
                position[edge.src] as u32,
                position[edge.tgt] as u32,
                labels.edge[e],
            )
        })
        .collect();
    enc.sort_unstable();
    enc
}

fn build_form(g: &Graph, position: Vec<NodeId>) -> CanonicalForm {
    let n = g.node_count();
    let mut at = vec![0; n];
    for (v, &p) in position.iter().enumerate() {
        at[p] = v;
    }
    let mut graph = Graph::new();
    for &v in &at {
        graph.add_node(g.node_label(v).to_string());
    }
    let mut edges: Vec<(NodeId, NodeId, &str)> = g
        .edges()
        .iter()
        .map(|e| (position[e.src], position[e.tgt], e.label.as_str()))
        .collect();
    edges.sort_unstable();
    for (s, t, l) in edges {
        graph.add_edge(s, t, l).unwrap();
    }
    let mut key = Vec::new();
    push_u32(&mut key, n as u32);
    push_u32(&mut key, graph.edge_count() as u32);
    for l in graph.node_labels() {
        push_str(&mut key, l);
    }
    for e in graph.edges() {
        push_u32(&mut key, e.src as u32);
        push_u32(&mut key, e.tgt as u32);
        push_str(&mut key, &e.label);
    }
    CanonicalForm {
        key: CanonicalKey(key),
        graph,
        position,
    }
}

fn push_u32(buf: &mut Vec<u8>, x: u32) {
    buf.extend_from_slice(&x.to_be_bytes());
}

fn push_str(buf: &mut Vec<u8>, s: &str) {
    push_u32(buf, s.len() as u32);
    buf.extend_from_slice(s.as_bytes());
}
