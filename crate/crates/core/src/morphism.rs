//! Graph morphisms and injective match enumeration.

use std::collections::HashMap;
use std::ops::ControlFlow;

use thiserror::Error;

use crate::graph::{EdgeId, Graph, NodeId};

/// A pair of total maps from the domain's nodes and edges into the codomain.
///
/// The domain and codomain graphs are not stored; [`Morphism::validate`]
/// checks a morphism against a concrete pair.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Morphism {
    pub nodes: Vec<NodeId>,
    pub edges: Vec<EdgeId>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MorphismError {
    #[error("morphism is defined on {found} nodes/edges but its domain has {expected}")]
    DomainSize { expected: usize, found: usize },
    #[error("image {0} lies outside the codomain")]
    OutOfRange(usize),
    #[error("edge {0} is not mapped compatibly with its endpoints")]
    Structure(EdgeId),
    #[error("label of {0} is not preserved")]
    Label(String),
    #[error("morphism is not injective")]
    NotInjective,
}

impl Morphism {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn identity(g: &Graph) -> Self {
        Morphism {
            nodes: (0..g.node_count()).collect(),
            edges: (0..g.edge_count()).collect(),
        }
    }

    /// Inclusion of a graph into a graph that extends it with trailing ids.
    pub fn inclusion(g: &Graph) -> Self {
        Self::identity(g)
    }

    /// `self: A -> B` followed by `next: B -> C`.
    pub fn then(&self, next: &Morphism) -> Morphism {
        Morphism {
            nodes: self.nodes.iter().map(|&n| next.nodes[n]).collect(),
            edges: self.edges.iter().map(|&e| next.edges[e]).collect(),
        }
    }

    pub fn is_injective(&self) -> bool {
        fn distinct(v: &[usize]) -> bool {
            let mut s = v.to_vec();
            s.sort_unstable();
            s.windows(2).all(|w| w[0] != w[1])
        }
        distinct(&self.nodes) && distinct(&self.edges)
    }

    /// Checks that `self` is an injective, structure- and label-preserving
    /// morphism `domain -> codomain`.
    pub fn validate(&self, domain: &Graph, codomain: &Graph) -> Result<(), MorphismError> {
        let expected = domain.node_count() + domain.edge_count();
        let found = self.nodes.len() + self.edges.len();
        if self.nodes.len() != domain.node_count() || self.edges.len() != domain.edge_count() {
            return Err(MorphismError::DomainSize { expected, found });
        }
        for &n in &self.nodes {
            if n >= codomain.node_count() {
                return Err(MorphismError::OutOfRange(n));
            }
        }
        for &e in &self.edges {
            if e >= codomain.edge_count() {
                return Err(MorphismError::OutOfRange(e));
            }
        }
        for (n, &img) in self.nodes.iter().enumerate() {
            if domain.node_label(n) != codomain.node_label(img) {
                return Err(MorphismError::Label(format!("node {n}")));
            }
        }
        for (e, &img) in self.edges.iter().enumerate() {
            let de = domain.edge(e);
            let ce = codomain.edge(img);
            if self.nodes[de.src] != ce.src || self.nodes[de.tgt] != ce.tgt {
                return Err(MorphismError::Structure(e));
            }
            if de.label != ce.label {
                return Err(MorphismError::Label(format!("edge {e}")));
            }
        }
        if !self.is_injective() {
            return Err(MorphismError::NotInjective);
        }
        Ok(())
    }
}

/// Partially fixed assignment used when extending a given morphism.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialMap {
    pub nodes: Vec<Option<NodeId>>,
    pub edges: Vec<Option<EdgeId>>,
}

impl PartialMap {
    pub fn unconstrained(pattern: &Graph) -> Self {
        PartialMap {
            nodes: vec![None; pattern.node_count()],
            edges: vec![None; pattern.edge_count()],
        }
    }

    /// Requires the extension `q` to satisfy `q ∘ along = base`.
    pub fn along(pattern: &Graph, along: &Morphism, base: &Morphism) -> Self {
        let mut m = Self::unconstrained(pattern);
        for (x, &ax) in along.nodes.iter().enumerate() {
            m.nodes[ax] = Some(base.nodes[x]);
        }
        for (x, &ax) in along.edges.iter().enumerate() {
            m.edges[ax] = Some(base.edges[x]);
        }
        m
    }
}

struct HostIndex<'h> {
    by_label: HashMap<&'h str, Vec<NodeId>>,
    between: HashMap<(NodeId, NodeId, &'h str), Vec<EdgeId>>,
}

impl<'h> HostIndex<'h> {
    fn new(host: &'h Graph) -> Self {
        let mut by_label: HashMap<&str, Vec<NodeId>> = HashMap::new();
        for (n, l) in host.node_labels().iter().enumerate() {
            by_label.entry(l.as_str()).or_default().push(n);
        }
        let mut between: HashMap<(NodeId, NodeId, &str), Vec<EdgeId>> = HashMap::new();
        for (e, edge) in host.edges().iter().enumerate() {
            between
                .entry((edge.src, edge.tgt, edge.label.as_str()))
                .or_default()
                .push(e);
        }
        HostIndex { by_label, between }
    }

    fn count(&self, s: NodeId, t: NodeId, l: &str) -> usize {
        self.between.get(&(s, t, l)).map_or(0, Vec::len)
    }
}

/// Pattern edges sharing source, target and label; they must map injectively
/// into the parallel host edges between the image nodes.
struct EdgeGroup<'p> {
    src: NodeId,
    tgt: NodeId,
    label: &'p str,
    members: Vec<EdgeId>,
}

struct Search<'a> {
    pattern: &'a Graph,
    host: &'a Graph,
    index: HostIndex<'a>,
    groups: Vec<EdgeGroup<'a>>,
    /// For every pattern node, the groups it is an endpoint of.
    groups_at: Vec<Vec<usize>>,
    fixed: &'a PartialMap,
    order: Vec<NodeId>,
    node_img: Vec<Option<NodeId>>,
    used: Vec<bool>,
}

impl<'a> Search<'a> {
    fn new(pattern: &'a Graph, host: &'a Graph, fixed: &'a PartialMap) -> Self {
        let mut key_to_group: HashMap<(NodeId, NodeId, &str), usize> = HashMap::new();
        let mut groups: Vec<EdgeGroup> = Vec::new();
        for (e, edge) in pattern.edges().iter().enumerate() {
            let key = (edge.src, edge.tgt, edge.label.as_str());
            let gi = *key_to_group.entry(key).or_insert_with(|| {
                groups.push(EdgeGroup {
                    src: edge.src,
                    tgt: edge.tgt,
                    label: edge.label.as_str(),
                    members: Vec::new(),
                });
                groups.len() - 1
            });
            groups[gi].members.push(e);
        }
        let mut groups_at = vec![Vec::new(); pattern.node_count()];
        for (gi, g) in groups.iter().enumerate() {
            groups_at[g.src].push(gi);
            if g.tgt != g.src {
                groups_at[g.tgt].push(gi);
            }
        }
        let index = HostIndex::new(host);
        let order = Self::node_order(pattern, &groups_at, &groups, fixed, &index);
        Search {
            pattern,
            host,
            index,
            groups,
            groups_at,
            fixed,
            order,
            node_img: vec![None; pattern.node_count()],
            used: vec![false; host.node_count()],
        }
    }

    /// Fixed nodes first, then greedily the node most connected to the
    /// already ordered ones (ties: fewer host candidates, then lower id).
    fn node_order(
        pattern: &Graph,
        groups_at: &[Vec<usize>],
        groups: &[EdgeGroup],
        fixed: &PartialMap,
        index: &HostIndex,
    ) -> Vec<NodeId> {
        let n = pattern.node_count();
        let mut placed = vec![false; n];
        let mut order = Vec::with_capacity(n);
        for (v, f) in fixed.nodes.iter().enumerate().take(n) {
            if f.is_some() {
                placed[v] = true;
                order.push(v);
            }
        }
        while order.len() < n {
            let best = (0..n)
                .filter(|&v| !placed[v])
                .max_by_key(|&v| {
                    let links = groups_at[v]
                        .iter()
                        .filter(|&&gi| {
                            let g = &groups[gi];
                            let other = if g.src == v { g.tgt } else { g.src };
                            placed[other]
                        })
                        .count();
                    let cands = index
                        .by_label
                        .get(pattern.node_label(v))
                        .map_or(0, Vec::len);
                    (links, std::cmp::Reverse(cands), std::cmp::Reverse(v))
                })
                .unwrap();
            placed[best] = true;
            order.push(best);
        }
        order
    }

    fn node_feasible(&self, v: NodeId, h: NodeId) -> bool {
        if self.pattern.node_label(v) != self.host.node_label(h) {
            return false;
        }
        for &gi in &self.groups_at[v] {
            let g = &self.groups[gi];
            let img = |x: NodeId| if x == v { Some(h) } else { self.node_img[x] };
            if let (Some(s), Some(t)) = (img(g.src), img(g.tgt)) {
                if self.index.count(s, t, g.label) < g.members.len() {
                    return false;
                }
            }
        }
        true
    }

    fn run<F>(&mut self, f: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&Morphism) -> ControlFlow<()>,
    {
        // Fixed node images must be consistent before searching.
        for v in 0..self.pattern.node_count() {
            if let Some(h) = self.fixed.nodes[v] {
                if h >= self.host.node_count() || self.used[h] || !self.node_feasible(v, h) {
                    return ControlFlow::Continue(());
                }
                self.node_img[v] = Some(h);
                self.used[h] = true;
            }
        }
        let start = self.fixed.nodes.iter().filter(|x| x.is_some()).count();
        self.assign_nodes(start, f)
    }

    fn assign_nodes<F>(&mut self, depth: usize, f: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&Morphism) -> ControlFlow<()>,
    {
        if depth == self.order.len() {
            return self.assign_edges(f);
        }
        let v = self.order[depth];
        let cands: Vec<NodeId> = self
            .index
            .by_label
            .get(self.pattern.node_label(v))
            .cloned()
            .unwrap_or_default();
        for h in cands {
            if self.used[h] || !self.node_feasible(v, h) {
                continue;
            }
            self.node_img[v] = Some(h);
            self.used[h] = true;
            let flow = self.assign_nodes(depth + 1, f);
            self.used[h] = false;
            self.node_img[v] = None;
            flow?;
        }
        ControlFlow::Continue(())
    }

    fn assign_edges<F>(&self, f: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&Morphism) -> ControlFlow<()>,
    {
        let nodes: Vec<NodeId> = self.node_img.iter().map(|x| x.unwrap()).collect();
        let mut edges = vec![usize::MAX; self.pattern.edge_count()];
        self.assign_group(0, &nodes, &mut edges, f)
    }

    fn assign_group<F>(
        &self,
        gi: usize,
        nodes: &[NodeId],
        edges: &mut Vec<EdgeId>,
        f: &mut F,
    ) -> ControlFlow<()>
    where
        F: FnMut(&Morphism) -> ControlFlow<()>,
    {
        if gi == self.groups.len() {
            let m = Morphism {
                nodes: nodes.to_vec(),
                edges: edges.clone(),
            };
            return f(&m);
        }
        let g = &self.groups[gi];
        let empty = Vec::new();
        let cands = self
            .index
            .between
            .get(&(nodes[g.src], nodes[g.tgt], g.label))
            .unwrap_or(&empty);
        let mut taken = vec![false; cands.len()];
        self.assign_member(gi, 0, cands, &mut taken, nodes, edges, f)
    }

    #[allow(clippy::too_many_arguments)]
    fn assign_member<F>(
        &self,
        gi: usize,
        mi: usize,
        cands: &[EdgeId],
        taken: &mut Vec<bool>,
        nodes: &[NodeId],
        edges: &mut Vec<EdgeId>,
        f: &mut F,
    ) -> ControlFlow<()>
    where
        F: FnMut(&Morphism) -> ControlFlow<()>,
    {
        let g = &self.groups[gi];
        if mi == g.members.len() {
            return self.assign_group(gi + 1, nodes, edges, f);
        }
        let pe = g.members[mi];
        for (ci, &he) in cands.iter().enumerate() {
            if taken[ci] {
                continue;
            }
            if let Some(fixed) = self.fixed.edges[pe] {
                if fixed != he {
                    continue;
                }
            }
            taken[ci] = true;
            edges[pe] = he;
            let flow = self.assign_member(gi, mi + 1, cands, taken, nodes, edges, f);
            taken[ci] = false;
            flow?;
        }
        ControlFlow::Continue(())
    }
}

/// Visits every injective morphism `pattern -> host` that agrees with
/// `fixed`, stopping early when `f` breaks. Visiting order is unspecified.
pub fn for_each_extension<F>(
    pattern: &Graph,
    host: &Graph,
    fixed: &PartialMap,
    mut f: F,
) -> ControlFlow<()>
where
    F: FnMut(&Morphism) -> ControlFlow<()>,
{
    let mut search = Search::new(pattern, host, fixed);
    search.run(&mut f)
}

/// Whether some injective extension of `fixed` exists.
pub fn has_extension(pattern: &Graph, host: &Graph, fixed: &PartialMap) -> bool {
    for_each_extension(pattern, host, fixed, |_| ControlFlow::Break(())).is_break()
}

/// Every injective morphism `pattern -> host`, each exactly once, ordered
/// lexicographically by node images and then edge images. On canonical
/// representatives host ids follow the canonical order, so the result is in
/// canonical order.
pub fn enumerate_injective_morphisms(pattern: &Graph, host: &Graph) -> Vec<Morphism> {
    enumerate_extensions(pattern, host, &PartialMap::unconstrained(pattern))
}

/// Sorted list of all injective extensions of `fixed`.
pub fn enumerate_extensions(pattern: &Graph, host: &Graph, fixed: &PartialMap) -> Vec<Morphism> {
    let mut out = Vec::new();
    let _ = for_each_extension(pattern, host, fixed, |m| {
        out.push(m.clone());
        ControlFlow::Continue(())
    });
    out.sort();
    out
}
