//! Fixtures shared by the benchmarks.

use spinpoly::graphs::{samples, MarkedGraph};
use spinpoly::polytopes::{from_graph, GradedPolytope, LatticeChoice};

/// Graph polytopes of growing size, each with a label for the report.
pub fn graph_fixtures() -> Vec<(String, MarkedGraph, Vec<u64>, u64)> {
    vec![
        ("four-leaf tree".into(), samples::four_leaf_tree(), vec![1, 1, 2, 2], 4),
        ("caterpillar n=5".into(), samples::caterpillar_tree(5), vec![1, 1, 2, 1, 1], 4),
        ("caterpillar n=6".into(), samples::caterpillar_tree(6), vec![2, 2, 2, 2, 2, 2], 4),
        ("tree-like g=1 n=2".into(), samples::tree_like_g1_n2(), vec![2, 2], 4),
        ("doubled edge n=4".into(), samples::caterpillar_with_doubled_edge(4, 0), vec![2, 2, 2, 2], 4),
    ]
}

pub fn polytope(g: &MarkedGraph, r: &[u64], level: u64) -> GradedPolytope {
    from_graph(g, r, level, LatticeChoice::Parity).expect("fixture polytope")
}
