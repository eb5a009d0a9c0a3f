//! Graded lattice polytopes: integer inequality systems whose right-hand
//! sides scale with the dilation degree, intersected with a sublattice cut
//! out by congruences.

mod blocks;
mod fiber;

use num_rational::Ratio;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use blocks::{
    b2_change_of_coords, b2_changed_polytope, b2_from_changed, building_block, from_graph,
    quadrant, quadrant_to_q1, trinode_polytope, weighting_polytope, BuildingBlockKind, EdgeRole,
    LatticeChoice,
};
pub use fiber::{
    assemble, edge_projection, fiber_product, AssembledPolytope, AssemblyExpr, AssemblyStep,
    CoordOrigin, FiberProduct, LatticeMap, PlacedBlock,
};

pub type Point = Vec<i64>;
pub type Rational = Ratio<i64>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolytopeError {
    #[error("coordinate {0} has no finite bound")]
    Unbounded(usize),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("parity violation: {0}")]
    ParityViolation(String),
    #[error("odd weight {value} on coordinate {coord} cannot be halved")]
    OddWeightEncountered { coord: usize, value: i64 },
    #[error("lattice maps target different bases ({0} vs {1} dimensions)")]
    BaseMismatch(usize, usize),
    #[error("leaf weights are not compatible with the graph")]
    IncompatibleWeights,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Graph(#[from] crate::graphs::GraphError),
}

/// `row · x ≡ 0 (mod modulus)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Congruence {
    pub row: Vec<i64>,
    pub modulus: i64,
}

/// Integer vectors whose listed coordinate subsets have even sums and which
/// satisfy any further congruences.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityLattice {
    pub dim: usize,
    #[serde(rename = "paritySets")]
    pub parity_sets: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub congruences: Vec<Congruence>,
}

impl ParityLattice {
    pub fn full(dim: usize) -> Self {
        ParityLattice {
            dim,
            parity_sets: Vec::new(),
            congruences: Vec::new(),
        }
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        x.len() == self.dim
            && self
                .parity_sets
                .iter()
                .all(|s| s.iter().map(|&i| x[i]).sum::<i64>().rem_euclid(2) == 0)
            && self.congruences.iter().all(|c| {
                c.row.iter().zip(x).map(|(a, b)| a * b).sum::<i64>().rem_euclid(c.modulus) == 0
            })
    }

    fn shifted(&self, offset: usize, dim: usize) -> (Vec<Vec<usize>>, Vec<Congruence>) {
        let sets = self
            .parity_sets
            .iter()
            .map(|s| s.iter().map(|i| i + offset).collect())
            .collect();
        let congs = self
            .congruences
            .iter()
            .map(|c| Congruence {
                row: pad(&c.row, offset, dim),
                modulus: c.modulus,
            })
            .collect();
        (sets, congs)
    }
}

/// `row · x ≤ N · rhs` (or `=` when used as an equality).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    pub row: Vec<i64>,
    pub rhs: i64,
}

impl Constraint {
    pub fn new(row: Vec<i64>, rhs: i64) -> Self {
        Constraint { row, rhs }
    }

    fn value(&self, x: &[i64]) -> i64 {
        self.row.iter().zip(x).map(|(a, b)| a * b).sum()
    }
}

pub(crate) fn pad(row: &[i64], offset: usize, dim: usize) -> Vec<i64> {
    let mut out = vec![0; dim];
    out[offset..offset + row.len()].copy_from_slice(row);
    out
}

/// A polytope together with all of its dilations. Dilation `N` scales every
/// right-hand side and the coordinate box by `N` and keeps the lattice fixed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradedPolytope {
    pub dim: usize,
    pub inequalities: Vec<Constraint>,
    pub equalities: Vec<Constraint>,
    #[serde(flatten)]
    pub lattice: ParityLattice,
    /// Per-coordinate box `[lo, hi]` of the undilated polytope, implied by
    /// the system; used to bound enumeration.
    #[serde(skip)]
    pub bounds: Vec<Option<(Rational, Rational)>>,
}

impl GradedPolytope {
    pub fn new(dim: usize) -> Self {
        GradedPolytope {
            dim,
            inequalities: Vec::new(),
            equalities: Vec::new(),
            lattice: ParityLattice::full(dim),
            bounds: vec![None; dim],
        }
    }

    /// A single point (dimension 0).
    pub fn point() -> Self {
        GradedPolytope::new(0)
    }

    pub fn with_bound(mut self, coord: usize, lo: Rational, hi: Rational) -> Self {
        self.bounds[coord] = Some((lo, hi));
        self
    }

    pub fn add_inequality(&mut self, row: Vec<i64>, rhs: i64) {
        debug_assert_eq!(row.len(), self.dim);
        if row.iter().all(|&a| a == 0) && rhs >= 0 {
            return;
        }
        let c = Constraint::new(row, rhs);
        if !self.inequalities.contains(&c) {
            self.inequalities.push(c);
        }
    }

    pub fn add_equality(&mut self, row: Vec<i64>, rhs: i64) {
        debug_assert_eq!(row.len(), self.dim);
        let c = Constraint::new(row, rhs);
        if !self.equalities.contains(&c) {
            self.equalities.push(c);
        }
    }

    /// Whether `x` lies in the `n`-th dilation (system and lattice).
    pub fn contains(&self, x: &[i64], n: i64) -> bool {
        x.len() == self.dim
            && self.inequalities.iter().all(|c| c.value(x) <= n * c.rhs)
            && self.equalities.iter().all(|c| c.value(x) == n * c.rhs)
            && self.lattice.contains(x)
    }

    fn scaled_box(&self, n: i64) -> Result<Vec<(i64, i64)>, PolytopeError> {
        self.bounds
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let (lo, hi) = b.ok_or(PolytopeError::Unbounded(i))?;
                let n = Rational::from_integer(n);
                Ok(((lo * n).ceil().to_integer(), (hi * n).floor().to_integer()))
            })
            .collect()
    }

    /// Lattice points of the `n`-th dilation in lexicographic order.
    pub fn lattice_points(&self, n: u32) -> Result<Vec<Point>, PolytopeError> {
        let n = n as i64;
        let boxes = self.scaled_box(n)?;
        if self.dim == 0 {
            let p: Point = Vec::new();
            return Ok(if self.contains(&p, n) { vec![p] } else { Vec::new() });
        }
        if boxes.iter().any(|(lo, hi)| lo > hi) {
            return Ok(Vec::new());
        }
        let search = Search::new(self, &boxes, n);
        let (lo0, hi0) = boxes[0];
        let chunks: Vec<Vec<Point>> = (lo0..=hi0)
            .into_par_iter()
            .map(|v| {
                let mut out = Vec::new();
                let mut x = vec![0; self.dim];
                x[0] = v;
                let mut partial = search.initial();
                if search.push(&mut partial, 0, v) {
                    search.descend(1, &mut x, &mut partial, &mut out);
                }
                out
            })
            .collect();
        Ok(chunks.into_iter().flatten().collect())
    }

    pub fn count_lattice_points(&self, n: u32) -> Result<usize, PolytopeError> {
        Ok(self.lattice_points(n)?.len())
    }

    /// Same inequality system with a different lattice.
    pub fn with_lattice(&self, lattice: ParityLattice) -> Self {
        GradedPolytope {
            lattice,
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("polytope serializes")
    }
}

/// Depth-first box scan with interval propagation over every constraint.
struct Search<'a> {
    poly: &'a GradedPolytope,
    n: i64,
    boxes: &'a [(i64, i64)],
    /// constraints as (row, rhs, is_equality)
    rows: Vec<(&'a [i64], i64, bool)>,
    /// suffix_min[c][k] = min of sum_{j>=k} row_j x_j over the box
    suffix_min: Vec<Vec<i64>>,
    suffix_max: Vec<Vec<i64>>,
}

impl<'a> Search<'a> {
    fn new(poly: &'a GradedPolytope, boxes: &'a [(i64, i64)], n: i64) -> Self {
        let rows: Vec<(&[i64], i64, bool)> = poly
            .inequalities
            .iter()
            .map(|c| (c.row.as_slice(), c.rhs * n, false))
            .chain(
                poly.equalities
                    .iter()
                    .map(|c| (c.row.as_slice(), c.rhs * n, true)),
            )
            .collect();
        let d = poly.dim;
        let mut suffix_min = Vec::with_capacity(rows.len());
        let mut suffix_max = Vec::with_capacity(rows.len());
        for (row, _, _) in &rows {
            let mut mn = vec![0; d + 1];
            let mut mx = vec![0; d + 1];
            for k in (0..d).rev() {
                let (lo, hi) = boxes[k];
                let (a, b) = (row[k] * lo, row[k] * hi);
                mn[k] = mn[k + 1] + a.min(b);
                mx[k] = mx[k + 1] + a.max(b);
            }
            suffix_min.push(mn);
            suffix_max.push(mx);
        }
        Search {
            poly,
            n,
            boxes,
            rows,
            suffix_min,
            suffix_max,
        }
    }

    fn initial(&self) -> Vec<i64> {
        vec![0; self.rows.len()]
    }

    /// Adds coordinate `k = v` to the partial sums and reports feasibility of
    /// the remaining box.
    fn push(&self, partial: &mut [i64], k: usize, v: i64) -> bool {
        let mut ok = true;
        for (c, (row, rhs, eq)) in self.rows.iter().enumerate() {
            partial[c] += row[k] * v;
            if partial[c] + self.suffix_min[c][k + 1] > *rhs {
                ok = false;
            }
            if *eq && partial[c] + self.suffix_max[c][k + 1] < *rhs {
                ok = false;
            }
        }
        ok
    }

    fn pop(&self, partial: &mut [i64], k: usize, v: i64) {
        for (c, (row, _, _)) in self.rows.iter().enumerate() {
            partial[c] -= row[k] * v;
        }
    }

    fn descend(&self, k: usize, x: &mut Vec<i64>, partial: &mut Vec<i64>, out: &mut Vec<Point>) {
        if k == self.poly.dim {
            if self.poly.lattice.contains(x) {
                debug_assert!(self.poly.contains(x, self.n));
                out.push(x.clone());
            }
            return;
        }
        let (lo, hi) = self.boxes[k];
        for v in lo..=hi {
            x[k] = v;
            if self.push(partial, k, v) {
                self.descend(k + 1, x, partial, out);
            }
            self.pop(partial, k, v);
        }
    }
}

pub fn rational(n: i64) -> Rational {
    Rational::from_integer(n)
}

pub fn zero() -> Rational {
    Rational::zero()
}
