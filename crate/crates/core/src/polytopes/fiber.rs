use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{pad, weighting_polytope, BuildingBlockKind, Congruence, EdgeRole, GradedPolytope, LatticeChoice, PolytopeError};
use crate::graphs::{explode, LeafOrigin, MarkedGraph};

/// `x -> (matrix · x) / denom`, defined on points where the division is exact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeMap {
    pub source_dim: usize,
    pub matrix: Vec<Vec<i64>>,
    pub denom: i64,
}

impl LatticeMap {
    pub fn target_dim(&self) -> usize {
        self.matrix.len()
    }

    /// Map to a point (the zero-dimensional base).
    pub fn to_point(source_dim: usize) -> Self {
        LatticeMap {
            source_dim,
            matrix: Vec::new(),
            denom: 1,
        }
    }

    /// Projection onto one coordinate, divided by `divisor`.
    pub fn coordinate(source_dim: usize, coord: usize, divisor: i64) -> Self {
        let mut row = vec![0; source_dim];
        row[coord] = 1;
        LatticeMap {
            source_dim,
            matrix: vec![row],
            denom: divisor,
        }
    }

    pub fn apply(&self, x: &[i64]) -> Result<Vec<i64>, PolytopeError> {
        if x.len() != self.source_dim {
            return Err(PolytopeError::DimensionMismatch {
                expected: self.source_dim,
                got: x.len(),
            });
        }
        self.matrix
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let v: i64 = row.iter().zip(x).map(|(a, b)| a * b).sum();
                if v % self.denom != 0 {
                    Err(PolytopeError::OddWeightEncountered { coord: i, value: v })
                } else {
                    Ok(v / self.denom)
                }
            })
            .collect()
    }

    /// The same map precomposed with the inclusion of the source at `offset`
    /// inside a space of dimension `dim`.
    pub fn shifted(&self, offset: usize, dim: usize) -> Self {
        LatticeMap {
            source_dim: dim,
            matrix: self.matrix.iter().map(|r| pad(r, offset, dim)).collect(),
            denom: self.denom,
        }
    }
}

/// Projection of coordinate `coord` of `p`, divided by `divisor`, onto an
/// interval. Fails if some degree-one lattice point has a weight there that
/// the divisor does not divide.
pub fn edge_projection(
    p: &GradedPolytope,
    coord: usize,
    divisor: i64,
) -> Result<LatticeMap, PolytopeError> {
    let map = LatticeMap::coordinate(p.dim, coord, divisor);
    for x in p.lattice_points(1)? {
        if x[coord] % divisor != 0 {
            return Err(PolytopeError::OddWeightEncountered {
                coord,
                value: x[coord],
            });
        }
    }
    Ok(map)
}

#[derive(Debug, Clone)]
pub struct FiberProduct {
    /// Lives on the concatenated coordinates `(x, y)`.
    pub polytope: GradedPolytope,
    pub left_dim: usize,
    pub right_dim: usize,
    /// Map from the product to the common base.
    pub base_map: LatticeMap,
}

impl FiberProduct {
    pub fn left<'a>(&self, p: &'a [i64]) -> &'a [i64] {
        &p[..self.left_dim]
    }

    pub fn right<'a>(&self, p: &'a [i64]) -> &'a [i64] {
        &p[self.left_dim..]
    }
}

/// `{(x, y) : x in P1, y in P2, f1(x) = f2(y)}` in every dilation.
pub fn fiber_product(
    p1: &GradedPolytope,
    f1: &LatticeMap,
    p2: &GradedPolytope,
    f2: &LatticeMap,
) -> Result<FiberProduct, PolytopeError> {
    if f1.target_dim() != f2.target_dim() {
        return Err(PolytopeError::BaseMismatch(f1.target_dim(), f2.target_dim()));
    }
    if f1.source_dim != p1.dim || f2.source_dim != p2.dim {
        return Err(PolytopeError::DimensionMismatch {
            expected: p1.dim + p2.dim,
            got: f1.source_dim + f2.source_dim,
        });
    }
    let (d1, d2) = (p1.dim, p2.dim);
    let dim = d1 + d2;
    let mut out = GradedPolytope::new(dim);
    for (p, off) in [(p1, 0), (p2, d1)] {
        for c in &p.inequalities {
            out.add_inequality(pad(&c.row, off, dim), c.rhs);
        }
        for c in &p.equalities {
            out.add_equality(pad(&c.row, off, dim), c.rhs);
        }
        let (sets, congs) = p.lattice.shifted(off, dim);
        out.lattice.parity_sets.extend(sets);
        out.lattice.congruences.extend(congs);
        out.bounds[off..off + p.dim].copy_from_slice(&p.bounds);
    }
    let left = f1.shifted(0, dim);
    let right = f2.shifted(d1, dim);
    for (a, b) in left.matrix.iter().zip(&right.matrix) {
        let row: Vec<i64> = a
            .iter()
            .zip(b)
            .map(|(x, y)| f2.denom * x - f1.denom * y)
            .collect();
        out.add_equality(row, 0);
        for (m, r) in [(f1.denom, a), (f2.denom, b)] {
            if m > 1 {
                let c = Congruence {
                    row: r.clone(),
                    modulus: m,
                };
                if !out.lattice.congruences.contains(&c) {
                    out.lattice.congruences.push(c);
                }
            }
        }
    }
    Ok(FiberProduct {
        polytope: out,
        left_dim: d1,
        right_dim: d2,
        base_map: left,
    })
}

/// A component polytope placed inside an assembled polytope.
#[derive(Debug, Clone, Serialize)]
pub struct PlacedBlock {
    pub component: usize,
    /// `None` when the component is not one of the standard shapes; its
    /// polytope is then the plain weighting polytope of the fragment.
    pub kind: Option<BuildingBlockKind>,
    #[serde(skip)]
    pub polytope: GradedPolytope,
    pub offset: usize,
}

/// Origin of one coordinate of an assembled polytope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CoordOrigin {
    pub component: usize,
    pub fragment_edge: usize,
    pub edge: usize,
    /// The coordinate is half the edge weight.
    pub halved: bool,
}

/// One gluing step: the assembled polytope so far is glued to the block of
/// `component` along `split_edge`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AssemblyStep {
    pub split_edge: usize,
    pub left_coord: usize,
    pub component: usize,
    pub right_coord: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "op", rename_all = "camelCase")]
pub enum AssemblyExpr {
    Block { component: usize },
    FiberProduct {
        left: Box<AssemblyExpr>,
        right: Box<AssemblyExpr>,
        base: BuildingBlockKind,
    },
}

#[derive(Debug, Clone)]
pub struct AssembledPolytope {
    pub polytope: GradedPolytope,
    pub blocks: Vec<PlacedBlock>,
    pub steps: Vec<AssemblyStep>,
    pub origins: Vec<CoordOrigin>,
    pub expr: AssemblyExpr,
    pub edge_count: usize,
}

impl AssembledPolytope {
    /// Edge weights of the original graph for an assembled point.
    pub fn to_edge_coords(&self, p: &[i64]) -> Vec<i64> {
        let mut w = vec![0; self.edge_count];
        for (o, &v) in self.origins.iter().zip(p) {
            w[o.edge] = if o.halved { 2 * v } else { v };
        }
        w
    }

    pub fn describe(&self) -> String {
        self.describe_expr(&self.expr)
    }

    fn describe_expr(&self, e: &AssemblyExpr) -> String {
        match e {
            AssemblyExpr::Block { component } => {
                let b = self.blocks.iter().find(|b| b.component == *component).unwrap();
                match b.kind {
                    Some(k) => k.to_string(),
                    None => format!("Fragment{component}"),
                }
            }
            AssemblyExpr::FiberProduct { left, right, base } => format!(
                "({} x_{} {})",
                self.describe_expr(left),
                base,
                self.describe_expr(right)
            ),
        }
    }
}

impl fmt::Display for BuildingBlockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            BuildingBlockKind::Interval { level } => write!(f, "[0,{level}]"),
            BuildingBlockKind::P3 { level } => write!(f, "P3({level})"),
            BuildingBlockKind::P3Fixed1 { r, level } => write!(f, "P3Fixed1({r},{level})"),
            BuildingBlockKind::P3Fixed2 { r, s, level } => {
                write!(f, "P3Fixed2({r},{s},{level})")
            }
            BuildingBlockKind::LoopB { level } => write!(f, "LoopB({level})"),
            BuildingBlockKind::LoopB2 { level } => write!(f, "LoopB2({level})"),
        }
    }
}

fn recognize(g: &MarkedGraph, origins: &[LeafOrigin], r: &[u64], half: u64) -> Option<BuildingBlockKind> {
    let trinodes = g.trinodes().count();
    let loops = (0..g.edge_count()).filter(|&e| g.is_loop(e)).count();
    let pinned: Vec<u64> = origins
        .iter()
        .filter_map(|o| match o {
            LeafOrigin::Leaf(l) => Some(r[l - 1]),
            LeafOrigin::Split(_) => None,
        })
        .collect();
    let stubs = origins.len() - pinned.len();
    match (trinodes, loops, g.genus(), pinned.as_slice()) {
        (1, 0, 0, []) => Some(BuildingBlockKind::P3 { level: half }),
        (1, 0, 0, &[r]) => Some(BuildingBlockKind::P3Fixed1 { r, level: half }),
        (1, 0, 0, &[r, s]) => Some(BuildingBlockKind::P3Fixed2 { r, s, level: half }),
        (1, 1, 1, []) if stubs == 1 => Some(BuildingBlockKind::LoopB { level: half }),
        (2, 0, 1, []) if stubs == 2 => Some(BuildingBlockKind::LoopB2 { level: half }),
        _ => None,
    }
}

/// Rebuilds the weighting polytope of `g` at an even `level` as iterated fiber
/// products of its component polytopes over `[0, level / 2]`. Cut edges are
/// stored halved in their blocks.
pub fn assemble(g: &MarkedGraph, r: &[u64], level: u64) -> Result<AssembledPolytope, PolytopeError> {
    if !g.is_compatible(r)? {
        return Err(PolytopeError::IncompatibleWeights);
    }
    if level % 2 == 1 {
        return Err(PolytopeError::InvalidParams(format!(
            "assembly needs an even level, got {level}"
        )));
    }
    let half = level / 2;
    let ex = explode(g);

    let block_of = |c: usize| {
        let comp = &ex.components[c];
        let fg = &comp.graph;
        let mut roles = vec![EdgeRole::Free; fg.edge_count()];
        for (i, o) in comp.leaf_origin.iter().enumerate() {
            roles[fg.leaf_edge(i + 1)] = match o {
                LeafOrigin::Leaf(l) => EdgeRole::Pinned(r[l - 1]),
                LeafOrigin::Split(_) => EdgeRole::Halved,
            };
        }
        let poly = weighting_polytope(fg, &roles, level, LatticeChoice::Parity);
        let kind = recognize(fg, &comp.leaf_origin, r, half);
        let origins: Vec<CoordOrigin> = (0..fg.edge_count())
            .map(|fe| CoordOrigin {
                component: c,
                fragment_edge: fe,
                edge: comp.edge_origin[fe],
                halved: roles[fe] == EdgeRole::Halved,
            })
            .collect();
        (poly, kind, origins)
    };

    let (poly0, kind0, origins0) = block_of(0);
    let mut blocks = vec![PlacedBlock {
        component: 0,
        kind: kind0,
        polytope: poly0.clone(),
        offset: 0,
    }];
    let mut current = poly0;
    let mut origins = origins0;
    let mut expr = AssemblyExpr::Block { component: 0 };
    let mut steps = Vec::new();
    let mut placed = vec![false; ex.components.len()];
    placed[0] = true;
    let mut queue: VecDeque<usize> = (0..ex.split_edges.len()).collect();
    let mut stalls = 0;
    while let Some(si) = queue.pop_front() {
        let s = ex.split_edges[si];
        let (inside, outside) = match (placed[s.a.component], placed[s.b.component]) {
            (true, false) => (s.a, s.b),
            (false, true) => (s.b, s.a),
            (false, false) => {
                queue.push_back(si);
                stalls += 1;
                assert!(stalls <= queue.len(), "component tree is connected");
                continue;
            }
            (true, true) => unreachable!("cut edges form a tree"),
        };
        stalls = 0;
        let left_coord = origins
            .iter()
            .position(|o| o.component == inside.component && o.fragment_edge == inside.edge)
            .unwrap();
        let (poly, kind, block_origins) = block_of(outside.component);
        let f1 = LatticeMap::coordinate(current.dim, left_coord, 1);
        let f2 = LatticeMap::coordinate(poly.dim, outside.edge, 1);
        let fp = fiber_product(&current, &f1, &poly, &f2)?;
        blocks.push(PlacedBlock {
            component: outside.component,
            kind,
            polytope: poly,
            offset: current.dim,
        });
        steps.push(AssemblyStep {
            split_edge: si,
            left_coord,
            component: outside.component,
            right_coord: current.dim + outside.edge,
        });
        expr = AssemblyExpr::FiberProduct {
            left: Box::new(expr),
            right: Box::new(AssemblyExpr::Block {
                component: outside.component,
            }),
            base: BuildingBlockKind::Interval { level: half },
        };
        origins.extend(block_origins);
        current = fp.polytope;
        placed[outside.component] = true;
    }
    Ok(AssembledPolytope {
        polytope: current,
        blocks,
        steps,
        origins,
        expr,
        edge_count: g.edge_count(),
    })
}
