use serde::{Deserialize, Serialize};

use super::{pad, rational, zero, GradedPolytope, PolytopeError, Rational};
use crate::graphs::{samples, MarkedGraph, VertexId};

/// Which lattice a trinode system lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeChoice {
    /// Every trinode has an even weight sum.
    #[default]
    Parity,
    /// All integer points.
    Full,
}

/// How an edge coordinate relates to the edge weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeRole {
    /// Leaf edge fixed to the given weight (scales with dilation).
    Pinned(u64),
    /// Coordinate is the weight itself.
    Free,
    /// Coordinate is half the weight; the weight is even.
    Halved,
}

impl EdgeRole {
    fn scale(self) -> i64 {
        match self {
            EdgeRole::Halved => 2,
            _ => 1,
        }
    }
}

/// Weightings of `g`'s edges satisfying the triangle inequalities and
/// `w1 + w2 + w3 <= 2 * level` at every trinode, one coordinate per edge.
/// A loop occupies two of its vertex's three slots.
pub fn weighting_polytope(
    g: &MarkedGraph,
    roles: &[EdgeRole],
    level: u64,
    lattice: LatticeChoice,
) -> GradedPolytope {
    assert_eq!(roles.len(), g.edge_count());
    let d = g.edge_count();
    let level = level as i64;
    let mut p = GradedPolytope::new(d);
    for (e, role) in roles.iter().enumerate() {
        let s = role.scale();
        p.bounds[e] = Some(match role {
            EdgeRole::Pinned(r) => (rational(*r as i64), rational(*r as i64)),
            _ => (zero(), Rational::new(level, s)),
        });
        let mut row = vec![0; d];
        row[e] = -1;
        p.add_inequality(row, 0);
        if let EdgeRole::Pinned(r) = role {
            let mut row = vec![0; d];
            row[e] = 1;
            p.add_equality(row, *r as i64);
        }
    }
    for v in g.trinodes() {
        let inc = g.incident(v);
        for i in 0..3 {
            let mut row = vec![0; d];
            for (j, &e) in inc.iter().enumerate() {
                let s = roles[e].scale();
                row[e] += if i == j { s } else { -s };
            }
            p.add_inequality(row, 0);
        }
        let mut row = vec![0; d];
        for &e in inc {
            row[e] += roles[e].scale();
        }
        if lattice == LatticeChoice::Parity {
            let odd: Vec<usize> = (0..d).filter(|&e| row[e] % 2 != 0).collect();
            if !odd.is_empty() && !p.lattice.parity_sets.contains(&odd) {
                p.lattice.parity_sets.push(odd);
            }
        }
        p.add_inequality(row, 2 * level);
    }
    p
}

/// The polytope of `g` with leaf `i` pinned to `r[i]`, at the given level.
pub fn from_graph(
    g: &MarkedGraph,
    r: &[u64],
    level: u64,
    lattice: LatticeChoice,
) -> Result<GradedPolytope, PolytopeError> {
    g.check_len(r.len())?;
    let mut roles = vec![EdgeRole::Free; g.edge_count()];
    for label in 1..=g.num_leaves() {
        roles[g.leaf_edge(label)] = EdgeRole::Pinned(r[label - 1]);
    }
    let mut p = weighting_polytope(g, &roles, level, lattice);
    // a leaf-to-leaf edge carries two pins
    for label in 1..=g.num_leaves() {
        let e = g.leaf_edge(label);
        let mut row = vec![0; p.dim];
        row[e] = 1;
        p.add_equality(row, r[label - 1] as i64);
    }
    Ok(p)
}

/// A free trinode at `level`: `|w1 - w2| <= w3 <= w1 + w2`, `w1 + w2 + w3 <= 2 level`.
pub fn trinode_polytope(level: u64, lattice: LatticeChoice) -> GradedPolytope {
    weighting_polytope(&samples::trinode(), &[EdgeRole::Free; 3], level, lattice)
}

/// Building blocks glued over intervals `[0, level]`. Each trinode block
/// carries weightings at level `2 * level`; edges that get glued are even and
/// stored halved, so gluing is a plain coordinate projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum BuildingBlockKind {
    Interval { level: u64 },
    P3 { level: u64 },
    P3Fixed1 { r: u64, level: u64 },
    P3Fixed2 { r: u64, s: u64, level: u64 },
    LoopB { level: u64 },
    LoopB2 { level: u64 },
}

impl BuildingBlockKind {
    pub fn level(self) -> u64 {
        match self {
            BuildingBlockKind::Interval { level }
            | BuildingBlockKind::P3 { level }
            | BuildingBlockKind::P3Fixed1 { level, .. }
            | BuildingBlockKind::P3Fixed2 { level, .. }
            | BuildingBlockKind::LoopB { level }
            | BuildingBlockKind::LoopB2 { level } => level,
        }
    }

    /// Coordinates carrying a halved glue edge, i.e. the edge projections to
    /// `[0, level]`.
    pub fn projection_coords(self) -> Vec<usize> {
        match self {
            BuildingBlockKind::Interval { .. } => vec![0],
            BuildingBlockKind::P3 { .. } => vec![0, 1, 2],
            BuildingBlockKind::P3Fixed1 { .. } => vec![1, 2],
            BuildingBlockKind::P3Fixed2 { .. } => vec![2],
            BuildingBlockKind::LoopB { .. } => vec![1],
            BuildingBlockKind::LoopB2 { .. } => vec![0, 3],
        }
    }

    /// Coordinate labels in block order.
    pub fn coordinate_names(self) -> &'static [&'static str] {
        match self {
            BuildingBlockKind::Interval { .. } => &["t"],
            BuildingBlockKind::P3 { .. } => &["u1", "u2", "u3"],
            BuildingBlockKind::P3Fixed1 { .. } => &["r", "u2", "u3"],
            BuildingBlockKind::P3Fixed2 { .. } => &["r", "s", "u"],
            BuildingBlockKind::LoopB { .. } => &["x", "v"],
            BuildingBlockKind::LoopB2 { .. } => &["x", "y1", "y2", "z"],
        }
    }

    /// The fragment graph whose weightings the block describes, with edge roles.
    pub fn fragment(self) -> Option<(MarkedGraph, Vec<EdgeRole>)> {
        use EdgeRole::*;
        let ids = |n: i64| (0..n).map(VertexId::Int).collect::<Vec<_>>();
        Some(match self {
            BuildingBlockKind::Interval { .. } => return None,
            BuildingBlockKind::P3 { .. } => (samples::trinode(), vec![Halved; 3]),
            BuildingBlockKind::P3Fixed1 { r, .. } => {
                (samples::trinode(), vec![Pinned(r), Halved, Halved])
            }
            BuildingBlockKind::P3Fixed2 { r, s, .. } => {
                (samples::trinode(), vec![Pinned(r), Pinned(s), Halved])
            }
            BuildingBlockKind::LoopB { .. } => (samples::loop_with_leaf(), vec![Free, Halved]),
            BuildingBlockKind::LoopB2 { .. } => (
                MarkedGraph::from_parts(ids(4), vec![(0, 2), (0, 1), (0, 1), (1, 3)], vec![2, 3])
                    .expect("doubled-edge fragment"),
                vec![Halved, Free, Free, Halved],
            ),
        })
    }
}

/// The polytope of a building block.
pub fn building_block(kind: BuildingBlockKind) -> Result<GradedPolytope, PolytopeError> {
    let level = kind.level();
    let invalid = |msg: String| Err(PolytopeError::InvalidParams(msg));
    match kind {
        BuildingBlockKind::P3Fixed1 { r, .. } if r % 2 == 1 || r > 2 * level => {
            return invalid(format!("P3Fixed1 needs even r <= {}; got {r}", 2 * level))
        }
        BuildingBlockKind::P3Fixed2 { r, s, .. }
            if (r + s) % 2 == 1 || r > 2 * level || s > 2 * level =>
        {
            return invalid(format!(
                "P3Fixed2 needs r + s even and r, s <= {}; got ({r}, {s})",
                2 * level
            ))
        }
        _ => {}
    }
    let p = match kind.fragment() {
        None => {
            let mut p = GradedPolytope::new(1).with_bound(0, zero(), rational(level as i64));
            p.add_inequality(vec![-1], 0);
            p.add_inequality(vec![1], level as i64);
            p
        }
        Some((g, roles)) => weighting_polytope(&g, &roles, 2 * level, LatticeChoice::Parity),
    };
    if p.lattice_points(1)?.is_empty() {
        return invalid(format!("{kind:?} has no lattice points"));
    }
    Ok(p)
}

/// `(x, y1, y2, z) -> (x, z, A, B)` with `A = (y1 - y2) / 2`, `B = (y1 + y2) / 2`.
pub fn b2_change_of_coords(p: &[i64]) -> Result<[i64; 4], PolytopeError> {
    let [x, y1, y2, z] = <[i64; 4]>::try_from(p).map_err(|_| PolytopeError::DimensionMismatch {
        expected: 4,
        got: p.len(),
    })?;
    if (y1 + y2).rem_euclid(2) != 0 {
        return Err(PolytopeError::ParityViolation(format!(
            "y1 + y2 = {} is odd",
            y1 + y2
        )));
    }
    Ok([x, z, (y1 - y2) / 2, (y1 + y2) / 2])
}

/// Inverse of [`b2_change_of_coords`].
pub fn b2_from_changed(q: &[i64; 4]) -> [i64; 4] {
    let [x, z, a, b] = *q;
    [x, a + b, b - a, z]
}

/// The doubled-edge block in `(x, z, A, B)` coordinates:
/// `|A| <= x, z <= B` and `x + B, z + B <= 2 level`.
pub fn b2_changed_polytope(level: u64) -> GradedPolytope {
    let l = level as i64;
    let mut p = GradedPolytope::new(4)
        .with_bound(0, zero(), rational(l))
        .with_bound(1, zero(), rational(l))
        .with_bound(2, rational(-l), rational(l))
        .with_bound(3, zero(), rational(2 * l));
    let rows: [([i64; 4], i64); 10] = [
        ([-1, 0, 0, 0], 0),
        ([0, -1, 0, 0], 0),
        ([-1, 0, 1, 0], 0),
        ([-1, 0, -1, 0], 0),
        ([0, -1, 1, 0], 0),
        ([0, -1, -1, 0], 0),
        ([1, 0, 0, -1], 0),
        ([0, 1, 0, -1], 0),
        ([1, 0, 0, 1], 2 * l),
        ([0, 1, 0, 1], 2 * l),
    ];
    for (row, rhs) in rows {
        p.add_inequality(row.to_vec(), rhs);
    }
    p
}

/// Quadrant `Q_q(level)` of the doubled-edge block in `(x, z, A, B)`
/// coordinates. `Q_1` is `0 <= A <= x, z <= B <= level`; the others are its
/// images under `A -> -A` and `B -> 2 level - B`.
pub fn quadrant(q: u8, level: u64) -> Result<GradedPolytope, PolytopeError> {
    let (sign_a, flip_b) = match q {
        1 => (1, false),
        2 => (-1, false),
        3 => (1, true),
        4 => (-1, true),
        _ => {
            return Err(PolytopeError::InvalidParams(format!(
                "quadrant index {q} not in 1..=4"
            )))
        }
    };
    let l = level as i64;
    let (a_lo, a_hi) = if sign_a == 1 { (0, l) } else { (-l, 0) };
    let (b_lo, b_hi) = if flip_b { (l, 2 * l) } else { (0, l) };
    let mut p = GradedPolytope::new(4)
        .with_bound(0, zero(), rational(l))
        .with_bound(1, zero(), rational(l))
        .with_bound(2, rational(a_lo), rational(a_hi))
        .with_bound(3, rational(b_lo), rational(b_hi));
    // rows over (x, z, A', B') with A' = sign_a A and B' = B or 2l - B
    let rows: [([i64; 4], i64); 6] = [
        ([0, 0, -1, 0], 0),
        ([-1, 0, 1, 0], 0),
        ([0, -1, 1, 0], 0),
        ([1, 0, 0, -1], 0),
        ([0, 1, 0, -1], 0),
        ([0, 0, 0, 1], l),
    ];
    for (row, rhs) in rows {
        let mut out = row.to_vec();
        let mut rhs = rhs;
        out[2] *= sign_a;
        if flip_b {
            // c B' = c (2l - B)
            rhs -= 2 * l * out[3];
            out[3] = -out[3];
        }
        p.add_inequality(out, rhs);
    }
    Ok(p)
}

/// Maps a point of the `n`-th dilation of `Q_q(level)` to `Q_1(level)`.
pub fn quadrant_to_q1(q: u8, level: u64, n: u32, p: &[i64]) -> Vec<i64> {
    let top = 2 * level as i64 * n as i64;
    let mut out = p.to_vec();
    if q == 2 || q == 4 {
        out[2] = -out[2];
    }
    if q == 3 || q == 4 {
        out[3] = top - out[3];
    }
    out
}

#[allow(dead_code)]
pub(crate) fn padded(row: &[i64], offset: usize, dim: usize) -> Vec<i64> {
    pad(row, offset, dim)
}
