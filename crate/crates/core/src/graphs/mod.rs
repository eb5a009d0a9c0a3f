//! Trivalent marked graphs: validation, classification, compatibility with
//! leaf weights, and the exploded decomposition along separating edges.

mod enumerate;
mod explode;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use enumerate::{enumerate_graphs, MAX_ENUM_GENUS, MAX_ENUM_LEAVES};
pub use explode::{explode, Component, ExplodedGraph, HalfEdge, LeafOrigin, SplitEdge};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex {vertex} has degree {degree}; internal vertices must have degree 3")]
    NonTrivalent { vertex: String, degree: usize },
    #[error("graph is disconnected")]
    Disconnected,
    #[error("bad leaf labels: {0}")]
    BadLeafLabels(String),
    #[error("edge references unknown vertex {0}")]
    UnknownVertex(String),
    #[error("graph has no vertices")]
    Empty,
    #[error("weight vector has length {got}, graph has {expected} leaves")]
    LengthMismatch { expected: usize, got: usize },
    #[error("enumeration bounds too large: {0}")]
    BoundsTooLarge(String),
}

/// Vertex identifier as it appears in graph files: either an integer or a string.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VertexId {
    Int(i64),
    Name(String),
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexId::Int(i) => write!(f, "{i}"),
            VertexId::Name(s) => f.write_str(s),
        }
    }
}

/// The on-disk graph description:
/// `{ "vertices": [ids], "edges": [[u,v],...], "leaves": {"1": id, ...} }`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDescription {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<[VertexId; 2]>,
    pub leaves: BTreeMap<String, VertexId>,
}

impl GraphDescription {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Mutually exclusive graph classes, reported with the precedence
/// `CaterpillarTree > CaterpillarGraph > TreeLike > OtherTrivalent`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GraphClass {
    CaterpillarTree,
    CaterpillarGraph,
    TreeLike,
    OtherTrivalent,
}

/// A connected multigraph whose vertices have degree 1 (leaves, labeled
/// `1..=n`) or degree 3. Loops count twice toward the degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkedGraph {
    ids: Vec<VertexId>,
    edges: Vec<(usize, usize)>,
    leaves: Vec<usize>,
    incidence: Vec<Vec<usize>>,
}

impl MarkedGraph {
    /// Validates a raw description.
    pub fn validate(desc: &GraphDescription) -> Result<Self, GraphError> {
        let index: BTreeMap<&VertexId, usize> =
            desc.vertices.iter().enumerate().map(|(i, v)| (v, i)).collect();
        if index.len() != desc.vertices.len() {
            return Err(GraphError::BadLeafLabels("duplicate vertex ids".into()));
        }
        let lookup = |v: &VertexId| {
            index
                .get(v)
                .copied()
                .ok_or_else(|| GraphError::UnknownVertex(v.to_string()))
        };
        let edges = desc
            .edges
            .iter()
            .map(|[u, v]| Ok((lookup(u)?, lookup(v)?)))
            .collect::<Result<Vec<_>, GraphError>>()?;

        let n = desc.leaves.len();
        let mut leaves = vec![usize::MAX; n];
        for (label, v) in &desc.leaves {
            let k: usize = label
                .parse()
                .map_err(|_| GraphError::BadLeafLabels(format!("label {label:?} is not an integer")))?;
            if k == 0 || k > n || leaves[k - 1] != usize::MAX {
                return Err(GraphError::BadLeafLabels(format!(
                    "labels must be exactly 1..={n}"
                )));
            }
            leaves[k - 1] = lookup(v)?;
        }
        Self::from_parts(desc.vertices.clone(), edges, leaves)
    }

    /// Builds and validates a graph from vertex ids, index-based edges, and
    /// the leaf vertex of each label.
    pub fn from_parts(
        ids: Vec<VertexId>,
        edges: Vec<(usize, usize)>,
        leaves: Vec<usize>,
    ) -> Result<Self, GraphError> {
        if ids.is_empty() {
            return Err(GraphError::Empty);
        }
        let nv = ids.len();
        let mut incidence = vec![Vec::new(); nv];
        for (e, &(u, v)) in edges.iter().enumerate() {
            if u >= nv || v >= nv {
                return Err(GraphError::UnknownVertex(format!("#{}", u.max(v))));
            }
            incidence[u].push(e);
            incidence[v].push(e);
        }
        let mut is_leaf = vec![false; nv];
        for &l in &leaves {
            if l >= nv || is_leaf[l] {
                return Err(GraphError::BadLeafLabels(
                    "leaf labels must map injectively onto vertices".into(),
                ));
            }
            is_leaf[l] = true;
        }
        for v in 0..nv {
            let d = incidence[v].len();
            match (is_leaf[v], d) {
                (true, 1) | (false, 3) => {}
                (true, _) => {
                    return Err(GraphError::BadLeafLabels(format!(
                        "labeled vertex {} has degree {d}",
                        ids[v]
                    )))
                }
                (false, 1) => {
                    return Err(GraphError::BadLeafLabels(format!(
                        "degree-1 vertex {} has no leaf label",
                        ids[v]
                    )))
                }
                (false, _) => {
                    return Err(GraphError::NonTrivalent {
                        vertex: ids[v].to_string(),
                        degree: d,
                    })
                }
            }
        }
        let g = MarkedGraph {
            ids,
            edges,
            leaves,
            incidence,
        };
        if g.component_count(None) != 1 {
            return Err(GraphError::Disconnected);
        }
        Ok(g)
    }

    pub fn to_description(&self) -> GraphDescription {
        GraphDescription {
            vertices: self.ids.clone(),
            edges: self
                .edges
                .iter()
                .map(|&(u, v)| [self.ids[u].clone(), self.ids[v].clone()])
                .collect(),
            leaves: self
                .leaves
                .iter()
                .enumerate()
                .map(|(i, &v)| ((i + 1).to_string(), self.ids[v].clone()))
                .collect(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    pub fn vertex_id(&self, v: usize) -> &VertexId {
        &self.ids[v]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn num_leaves(&self) -> usize {
        self.leaves.len()
    }

    /// Vertex carrying leaf label `label` (1-based).
    pub fn leaf_vertex(&self, label: usize) -> usize {
        self.leaves[label - 1]
    }

    /// Leaf vertices in label order.
    pub fn leaf_vertices(&self) -> &[usize] {
        &self.leaves
    }

    /// The unique edge at leaf `label` (1-based).
    pub fn leaf_edge(&self, label: usize) -> usize {
        self.incidence[self.leaf_vertex(label)][0]
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.incidence[v].len() == 1
    }

    pub fn is_loop(&self, e: usize) -> bool {
        let (u, v) = self.edges[e];
        u == v
    }

    pub fn is_leaf_edge(&self, e: usize) -> bool {
        let (u, v) = self.edges[e];
        self.is_leaf(u) || self.is_leaf(v)
    }

    /// Edges incident to `v`; a loop appears twice.
    pub fn incident(&self, v: usize) -> &[usize] {
        &self.incidence[v]
    }

    pub fn trinodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.ids.len()).filter(|&v| !self.is_leaf(v))
    }

    /// The endpoint of `e` opposite `v`.
    pub fn other_end(&self, e: usize, v: usize) -> usize {
        let (a, b) = self.edges[e];
        if a == v {
            b
        } else {
            a
        }
    }

    /// First Betti number `|E| - |V| + 1`.
    pub fn genus(&self) -> usize {
        self.edges.len() + 1 - self.ids.len()
    }

    /// Number of connected components, optionally ignoring one edge.
    fn component_count(&self, skip: Option<usize>) -> usize {
        let mut seen = vec![false; self.ids.len()];
        let mut count = 0;
        for s in 0..self.ids.len() {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            let mut stack = vec![s];
            while let Some(v) = stack.pop() {
                for &e in &self.incidence[v] {
                    if Some(e) == skip {
                        continue;
                    }
                    let w = self.other_end(e, v);
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        count
    }

    /// Non-loop edges whose removal disconnects the graph.
    pub fn bridges(&self) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&e| !self.is_loop(e) && self.component_count(Some(e)) > 1)
            .collect()
    }

    pub fn classify(&self) -> GraphClass {
        let shape = Shape::of(self);
        if shape.is_caterpillar_tree() {
            GraphClass::CaterpillarTree
        } else if shape.is_caterpillar_graph() {
            GraphClass::CaterpillarGraph
        } else if self.is_tree_like() {
            GraphClass::TreeLike
        } else {
            GraphClass::OtherTrivalent
        }
    }

    /// Obtained from a trivalent tree by attaching loops at some leaves:
    /// every cycle is a loop.
    pub fn is_tree_like(&self) -> bool {
        let loops = (0..self.edges.len()).filter(|&e| self.is_loop(e)).count();
        loops == self.genus()
    }

    /// Every odd `r_i` sits on a leaf edge sharing a vertex with the leaf
    /// edge of another odd `r_j`.
    pub fn is_compatible(&self, r: &[u64]) -> Result<bool, GraphError> {
        self.check_len(r.len())?;
        let odd: Vec<usize> = (1..=r.len()).filter(|&i| r[i - 1] % 2 == 1).collect();
        Ok(odd.iter().all(|&i| {
            odd.iter()
                .any(|&j| j != i && self.leaf_edges_share_vertex(i, j))
        }))
    }

    fn leaf_edges_share_vertex(&self, i: usize, j: usize) -> bool {
        let (ei, ej) = (self.leaf_edge(i), self.leaf_edge(j));
        if ei == ej {
            return true;
        }
        let (a, b) = self.edges[ei];
        let (c, d) = self.edges[ej];
        a == c || a == d || b == c || b == d
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<(), GraphError> {
        if len != self.leaves.len() {
            return Err(GraphError::LengthMismatch {
                expected: self.leaves.len(),
                got: len,
            });
        }
        Ok(())
    }
}

/// Parity pre-filter: a weighting polytope can only have lattice points when
/// an even number of leaf weights are odd.
pub fn odd_leaf_count_is_even(r: &[u64]) -> bool {
    r.iter().filter(|&&x| x % 2 == 1).count() % 2 == 0
}

/// Unlabeled adjacency view used for classification surgery.
#[derive(Debug, Clone)]
struct Shape {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Shape {
    fn of(g: &MarkedGraph) -> Self {
        Shape {
            n: g.vertex_count(),
            edges: g.edges.clone(),
        }
    }

    fn degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .map(|&(a, b)| (a == v) as usize + (b == v) as usize)
            .sum()
    }

    fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for &(a, b) in &self.edges {
            if a == v {
                out.push(b);
            }
            if b == v {
                out.push(a);
            }
        }
        out
    }

    fn is_tree(&self) -> bool {
        if self.edges.len() + 1 != self.n || self.edges.iter().any(|&(a, b)| a == b) {
            return false;
        }
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            if p[x] != x {
                let r = find(p, p[x]);
                p[x] = r;
            }
            p[x]
        }
        for &(a, b) in &self.edges {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra == rb {
                return false;
            }
            parent[ra] = rb;
        }
        true
    }

    fn is_caterpillar_tree(&self) -> bool {
        self.is_tree()
            && (0..self.n)
                .filter(|&v| self.degree(v) != 1)
                .all(|v| self.neighbors(v).iter().any(|&w| self.degree(w) == 1))
    }

    /// A leaf at the head or tail: its neighbor carries another leaf, or the
    /// tree is a single edge.
    fn is_end_leaf(&self, leaf: usize) -> bool {
        let w = self.neighbors(leaf)[0];
        if self.degree(w) == 1 {
            return true;
        }
        self.neighbors(w)
            .iter()
            .filter(|&&x| x != leaf && self.degree(x) == 1)
            .count()
            >= 1
    }

    fn is_caterpillar_graph(&self) -> bool {
        let loops: Vec<usize> = (0..self.edges.len())
            .filter(|&e| self.edges[e].0 == self.edges[e].1)
            .collect();
        if self.edges.len() != self.n {
            // genus one
            return false;
        }
        if let [e] = loops[..] {
            // undo a loop attached at a leaf
            let v = self.edges[e].0;
            let mut t = self.clone();
            t.edges.remove(e);
            return t.is_caterpillar_tree() && t.is_end_leaf(v);
        }
        if !loops.is_empty() {
            return false;
        }
        for i in 0..self.edges.len() {
            for j in i + 1..self.edges.len() {
                let (a, b) = self.edges[i];
                let (c, d) = self.edges[j];
                if !((a == c && b == d) || (a == d && b == c)) {
                    continue;
                }
                // undo a doubled edge inserted at an edge midpoint
                let third = |x: usize| {
                    self.edges
                        .iter()
                        .enumerate()
                        .find(|&(k, &(p, q))| k != i && k != j && (p == x || q == x))
                        .map(|(_, &(p, q))| if p == x { q } else { p })
                };
                let (Some(p), Some(q)) = (third(a), third(b)) else {
                    continue;
                };
                if p == q || p == a || p == b || q == a || q == b {
                    continue;
                }
                let mut edges: Vec<(usize, usize)> = self
                    .edges
                    .iter()
                    .copied()
                    .filter(|&(x, y)| x != a && y != a && x != b && y != b)
                    .collect();
                edges.push((p, q));
                let keep: Vec<usize> = (0..self.n).filter(|&v| v != a && v != b).collect();
                let relabel = |v: usize| keep.iter().position(|&k| k == v).unwrap();
                let t = Shape {
                    n: keep.len(),
                    edges: edges
                        .into_iter()
                        .map(|(x, y)| (relabel(x), relabel(y)))
                        .collect(),
                };
                if t.is_caterpillar_tree() {
                    return true;
                }
            }
        }
        false
    }
}

/// Small constructors for the graphs that recur in tests and examples.
pub mod samples {
    use super::*;

    fn ids(n: usize) -> Vec<VertexId> {
        (0..n as i64).map(VertexId::Int).collect()
    }

    /// One trinode with three labeled leaves.
    pub fn trinode() -> MarkedGraph {
        MarkedGraph::from_parts(ids(4), vec![(0, 1), (0, 2), (0, 3)], vec![1, 2, 3]).unwrap()
    }

    /// Loop at a vertex with one pendant leaf (genus 1, one leaf).
    pub fn loop_with_leaf() -> MarkedGraph {
        MarkedGraph::from_parts(ids(2), vec![(0, 0), (0, 1)], vec![1]).unwrap()
    }

    /// Two trinodes joined by an edge, leaves 1,2 on the first and 3,4 on the second.
    pub fn four_leaf_tree() -> MarkedGraph {
        MarkedGraph::from_parts(
            ids(6),
            vec![(2, 0), (3, 0), (0, 1), (4, 1), (5, 1)],
            vec![2, 3, 4, 5],
        )
        .unwrap()
    }

    /// Caterpillar tree on `n >= 3` leaves: a path of `n - 2` trinodes with
    /// leaves 1,2 at the head, `n-1`,`n` at the tail and one leaf per inner
    /// spine vertex.
    pub fn caterpillar_tree(n: usize) -> MarkedGraph {
        assert!(n >= 3);
        let spine = n - 2;
        let mut edges = Vec::new();
        for s in 0..spine.saturating_sub(1) {
            edges.push((s, s + 1));
        }
        let mut leaves = Vec::new();
        let mut next = spine;
        let mut attach = |s: usize, edges: &mut Vec<(usize, usize)>, leaves: &mut Vec<usize>| {
            edges.push((next, s));
            leaves.push(next);
            next += 1;
        };
        attach(0, &mut edges, &mut leaves);
        attach(0, &mut edges, &mut leaves);
        for s in 1..spine.saturating_sub(1) {
            attach(s, &mut edges, &mut leaves);
        }
        if spine == 1 {
            attach(0, &mut edges, &mut leaves);
        } else {
            attach(spine - 1, &mut edges, &mut leaves);
            attach(spine - 1, &mut edges, &mut leaves);
        }
        MarkedGraph::from_parts(ids(next), edges, leaves).unwrap()
    }

    /// Caterpillar graph: a caterpillar tree on `n + 1` leaves whose last
    /// (tail) leaf carries a loop, leaving `n` labeled leaves.
    pub fn caterpillar_with_loop(n: usize) -> MarkedGraph {
        let t = caterpillar_tree(n + 1);
        let tail = t.leaf_vertex(n + 1);
        let mut edges = t.edges().to_vec();
        edges.push((tail, tail));
        let leaves = t.leaf_vertices()[..n].to_vec();
        MarkedGraph::from_parts(ids(t.vertex_count()), edges, leaves).unwrap()
    }

    /// Caterpillar graph: a caterpillar tree on `n` leaves with a doubled edge
    /// inserted at the midpoint of spine edge `k` (0-based, `k < n - 3`).
    pub fn caterpillar_with_doubled_edge(n: usize, k: usize) -> MarkedGraph {
        let t = caterpillar_tree(n);
        assert!(k + 3 < n, "spine edge index out of range");
        let mut edges = t.edges().to_vec();
        let (p, q) = edges.remove(k);
        let (a, b) = (t.vertex_count(), t.vertex_count() + 1);
        edges.extend([(p, a), (a, b), (a, b), (b, q)]);
        MarkedGraph::from_parts(ids(b + 1), edges, t.leaf_vertices().to_vec()).unwrap()
    }

    /// Tree-like genus-1 graph with two leaves: a trinode carrying leaves 1,2
    /// whose third edge ends at a loop vertex.
    pub fn tree_like_g1_n2() -> MarkedGraph {
        MarkedGraph::from_parts(ids(4), vec![(0, 1), (0, 2), (0, 3), (3, 3)], vec![1, 2]).unwrap()
    }

    /// Two vertices joined by three parallel edges.
    pub fn theta() -> MarkedGraph {
        MarkedGraph::from_parts(ids(2), vec![(0, 1), (0, 1), (0, 1)], vec![]).unwrap()
    }
}
