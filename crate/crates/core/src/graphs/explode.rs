use super::{MarkedGraph, VertexId};

/// Where a fragment leaf came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeafOrigin {
    /// An original leaf, by 1-based label.
    Leaf(usize),
    /// One side of a cut separating edge, by index into `split_edges`.
    Split(usize),
}

/// A half of a cut edge: the component it landed in and its edge index there.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HalfEdge {
    pub component: usize,
    pub edge: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitEdge {
    /// Index of the separating edge in the original graph.
    pub edge: usize,
    pub a: HalfEdge,
    pub b: HalfEdge,
}

/// A connected piece of the exploded graph. Its leaves are the original
/// leaves it contains (in label order) followed by the stubs of cut edges.
#[derive(Debug, Clone)]
pub struct Component {
    pub graph: MarkedGraph,
    /// Fragment vertex -> original vertex; `None` for stubs.
    pub vertex_origin: Vec<Option<usize>>,
    /// Fragment edge -> original edge.
    pub edge_origin: Vec<usize>,
    /// Fragment leaf label (0-based position) -> origin.
    pub leaf_origin: Vec<LeafOrigin>,
}

impl Component {
    /// Fragment edges that are halves of cut edges.
    pub fn half_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.leaf_origin
            .iter()
            .enumerate()
            .filter_map(move |(i, o)| match o {
                LeafOrigin::Split(s) => Some((*s, self.graph.leaf_edge(i + 1))),
                LeafOrigin::Leaf(_) => None,
            })
    }
}

#[derive(Debug, Clone)]
pub struct ExplodedGraph {
    pub components: Vec<Component>,
    pub split_edges: Vec<SplitEdge>,
}

impl ExplodedGraph {
    /// Re-glues the cut edges and returns the original edge list, indexed
    /// like the source graph and with endpoints as original vertex indices.
    pub fn reglue(&self) -> Vec<(usize, usize)> {
        let total = self
            .components
            .iter()
            .map(|c| c.edge_origin.iter().max().map_or(0, |m| m + 1))
            .max()
            .unwrap_or(0);
        let mut edges = vec![None; total];
        for c in &self.components {
            for (fe, &(u, v)) in c.graph.edges().iter().enumerate() {
                if let (Some(ou), Some(ov)) = (c.vertex_origin[u], c.vertex_origin[v]) {
                    edges[c.edge_origin[fe]] = Some((ou, ov));
                }
            }
        }
        for s in &self.split_edges {
            let end = |h: HalfEdge| {
                let c = &self.components[h.component];
                let (u, v) = c.graph.edges()[h.edge];
                c.vertex_origin[u].or(c.vertex_origin[v]).unwrap()
            };
            edges[s.edge] = Some((end(s.a), end(s.b)));
        }
        edges.into_iter().map(|e| e.expect("every edge restored")).collect()
    }
}

/// Cuts every separating non-leaf edge into two half-edges.
pub fn explode(g: &MarkedGraph) -> ExplodedGraph {
    let cut: Vec<usize> = g
        .bridges()
        .into_iter()
        .filter(|&e| !g.is_leaf_edge(e))
        .collect();
    let is_cut = |e: usize| cut.contains(&e);

    // components of the graph without the cut edges
    let nv = g.vertex_count();
    let mut comp = vec![usize::MAX; nv];
    let mut ncomp = 0;
    for s in 0..nv {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = ncomp;
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for &e in g.incident(v) {
                if is_cut(e) {
                    continue;
                }
                let w = g.other_end(e, v);
                if comp[w] == usize::MAX {
                    comp[w] = ncomp;
                    stack.push(w);
                }
            }
        }
        ncomp += 1;
    }

    let mut components = Vec::with_capacity(ncomp);
    // (split index, side a?) -> (component, fragment edge)
    let mut halves: Vec<[Option<HalfEdge>; 2]> = vec![[None, None]; cut.len()];
    for c in 0..ncomp {
        let verts: Vec<usize> = (0..nv).filter(|&v| comp[v] == c).collect();
        let local = |v: usize| verts.iter().position(|&x| x == v).unwrap();
        let mut ids: Vec<VertexId> = verts.iter().map(|&v| g.vertex_id(v).clone()).collect();
        let mut vertex_origin: Vec<Option<usize>> = verts.iter().map(|&v| Some(v)).collect();
        let mut edges = Vec::new();
        let mut edge_origin = Vec::new();
        for (e, &(u, v)) in g.edges().iter().enumerate() {
            if !is_cut(e) && comp[u] == c {
                edges.push((local(u), local(v)));
                edge_origin.push(e);
            }
        }
        let mut leaves = Vec::new();
        let mut leaf_origin = Vec::new();
        for label in 1..=g.num_leaves() {
            let v = g.leaf_vertex(label);
            if comp[v] == c {
                leaves.push(local(v));
                leaf_origin.push(LeafOrigin::Leaf(label));
            }
        }
        let mut pending = Vec::new();
        for (si, &e) in cut.iter().enumerate() {
            let (u, v) = g.edges()[e];
            for (side, end) in [u, v].into_iter().enumerate() {
                if comp[end] != c {
                    continue;
                }
                let stub = ids.len();
                ids.push(VertexId::Name(format!(
                    "split{si}{}",
                    if side == 0 { 'a' } else { 'b' }
                )));
                vertex_origin.push(None);
                edges.push((local(end), stub));
                edge_origin.push(e);
                leaves.push(stub);
                leaf_origin.push(LeafOrigin::Split(si));
                pending.push((si, side, edges.len() - 1));
            }
        }
        for (si, side, fe) in pending {
            halves[si][side] = Some(HalfEdge {
                component: c,
                edge: fe,
            });
        }
        let graph = MarkedGraph::from_parts(ids, edges, leaves)
            .expect("fragments of a valid graph are valid");
        components.push(Component {
            graph,
            vertex_origin,
            edge_origin,
            leaf_origin,
        });
    }
    let split_edges = cut
        .iter()
        .zip(halves)
        .map(|(&edge, [a, b])| SplitEdge {
            edge,
            a: a.unwrap(),
            b: b.unwrap(),
        })
        .collect();
    ExplodedGraph {
        components,
        split_edges,
    }
}

#[cfg(test)]
mod tests {
    use super::super::samples::*;
    use super::*;

    fn normalized(edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
        edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect()
    }

    #[test]
    fn four_leaf_tree_splits_into_two_trinodes() {
        let g = four_leaf_tree();
        let ex = explode(&g);
        assert_eq!(ex.components.len(), 2);
        assert_eq!(ex.split_edges.len(), 1);
        for c in &ex.components {
            assert_eq!(c.graph.trinodes().count(), 1);
            assert_eq!(c.graph.num_leaves(), 3);
            assert_eq!(c.half_edges().count(), 1);
        }
        assert_eq!(normalized(&ex.reglue()), normalized(g.edges()));
    }

    #[test]
    fn loop_with_leaf_is_one_component() {
        let ex = explode(&loop_with_leaf());
        assert_eq!(ex.components.len(), 1);
        assert!(ex.split_edges.is_empty());
    }

    #[test]
    fn tree_like_genus_one() {
        let g = tree_like_g1_n2();
        let ex = explode(&g);
        assert_eq!(ex.components.len(), 2);
        let mut shapes: Vec<(usize, usize)> = ex
            .components
            .iter()
            .map(|c| {
                let loops = (0..c.graph.edge_count()).filter(|&e| c.graph.is_loop(e)).count();
                (loops, c.graph.num_leaves())
            })
            .collect();
        shapes.sort();
        // trinode with two leaves plus a stub; loop with a stub
        assert_eq!(shapes, vec![(0, 3), (1, 1)]);
        assert_eq!(normalized(&ex.reglue()), normalized(g.edges()));
    }

    #[test]
    fn doubled_edge_stays_whole() {
        let g = caterpillar_with_doubled_edge(5, 0);
        let ex = explode(&g);
        // spine: head trinode | doubled-edge block | middle | tail
        assert_eq!(ex.components.len(), 4);
        assert!(ex
            .components
            .iter()
            .any(|c| c.graph.trinodes().count() == 2 && c.half_edges().count() == 2));
        assert_eq!(normalized(&ex.reglue()), normalized(g.edges()));
    }

    #[test]
    fn every_bridge_split_once() {
        let g = caterpillar_tree(6);
        let ex = explode(&g);
        let mut cut: Vec<usize> = ex.split_edges.iter().map(|s| s.edge).collect();
        cut.sort();
        let expected: Vec<usize> = g.bridges().into_iter().filter(|&e| !g.is_leaf_edge(e)).collect();
        assert_eq!(cut, expected);
    }
}
