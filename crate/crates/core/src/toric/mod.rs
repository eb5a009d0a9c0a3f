//! The semigroup side: Hilbert functions, normality, relation degrees via
//! fiber-graph connectivity, and quadratic square-free Gröbner bases checked
//! by counting standard monomials.

mod theorems;

use std::collections::{BTreeSet, HashSet};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::polytopes::{rational, zero, GradedPolytope, Point, PolytopeError};
use crate::termorders::{
    all_fibers, is_balanced, Monomial, OrderCache, PointOrder, TermOrder, TermWeight, TotalOrder,
};

pub use theorems::{
    assembled_boxtimes_order, block_order, d2bp_factor, verify_theorem, Bounds, D2Factor,
    Instance, TheoremCertificate, TheoremName,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ToricError {
    #[error("not normal: {0:?} is in dilation {1} but is not a sum of lattice points")]
    NormalityPrerequisiteFailed(Point, usize),
    #[error("the Gröbner check needs a total order")]
    NotTotal,
    #[error("polytope is not balanced (degree {degree}, image {image:?})")]
    NotBalanced { degree: usize, image: Point },
    #[error("expected a 2-dimensional polytope, got dimension {0}")]
    WrongDimension(usize),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
    #[error(transparent)]
    Graph(#[from] crate::graphs::GraphError),
}

/// Lattice point counts of the dilations `0..=max_degree`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HilbertTable {
    pub counts: Vec<usize>,
}

impl HilbertTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("degree,count\n");
        for (n, c) in self.counts.iter().enumerate() {
            s.push_str(&format!("{n},{c}\n"));
        }
        s
    }
}

/// Counts for `N = 1..=max_degree` by enumeration. Degree 0 counts the
/// origin unless no checked dilation has a lattice point, in which case the
/// whole table is zero.
pub fn hilbert(p: &GradedPolytope, max_degree: usize) -> Result<HilbertTable, PolytopeError> {
    let mut counts = vec![0];
    for n in 1..=max_degree {
        counts.push(p.count_lattice_points(n as u32)?);
    }
    let nonempty = counts[1..].iter().any(|&c| c > 0) || (max_degree == 0 && p.contains(&vec![0; p.dim], 0));
    counts[0] = usize::from(nonempty);
    Ok(HilbertTable { counts })
}

/// Distinct sums of `n` points, for `n = 0..=max_degree`.
pub fn semigroup_degrees(points: &[Point], dim: usize, max_degree: usize) -> Vec<BTreeSet<Point>> {
    let mut out = vec![BTreeSet::from([vec![0; dim]])];
    for n in 1..=max_degree {
        let prev = &out[n - 1];
        let next: BTreeSet<Point> = prev
            .par_iter()
            .flat_map_iter(|s| {
                points
                    .iter()
                    .map(move |x| s.iter().zip(x).map(|(a, b)| a + b).collect::<Point>())
            })
            .collect();
        out.push(next);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct NormalityReport {
    pub normal: bool,
    pub degree_checked: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<(usize, Point)>,
}

/// Whether each lattice point of `NP` is a sum of `N` lattice points of `P`
/// for `2 <= N <= max_degree`.
pub fn is_normal(p: &GradedPolytope, max_degree: usize) -> Result<NormalityReport, PolytopeError> {
    let points = p.lattice_points(1)?;
    let sums = semigroup_degrees(&points, p.dim, max_degree);
    for (n, reached) in sums.iter().enumerate().skip(2) {
        let all = p.lattice_points(n as u32)?;
        if let Some(x) = all.iter().find(|x| !reached.contains(*x)) {
            return Ok(NormalityReport {
                normal: false,
                degree_checked: max_degree,
                witness: Some((n, x.clone())),
            });
        }
    }
    Ok(NormalityReport {
        normal: true,
        degree_checked: max_degree,
        witness: None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BinomialRelation {
    pub lhs: Monomial,
    pub rhs: Monomial,
}

/// A fiber needing moves of the reported degree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FiberWitness {
    pub degree: usize,
    pub image: Point,
    pub fiber_size: usize,
    /// Move degree needed to connect this fiber.
    pub needed: usize,
    /// A pair from different components under smaller moves.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relation: Option<BinomialRelation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GenerationCertificate {
    pub polytope: String,
    pub normal_degree_checked: usize,
    pub degree_bound: usize,
    pub move_degree_max: usize,
    /// Least move degree connecting every fiber up to the bound, if it is
    /// at most `move_degree_max`.
    pub relation_degree: Option<usize>,
    /// Needed move degree per monomial degree (index 0 unused).
    pub per_degree: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<FiberWitness>,
}

/// Degree of the move taking `a` to `b`: the size of `a` outside their
/// common divisor. Both are sorted index lists.
fn move_degree(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut common) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    a.len() - common
}

/// Minimax spanning tree bottleneck (Prim): the least `d` such that moves of
/// degree `<= d` connect the fiber, with a pair that needs exactly `d`.
fn bottleneck(ms: &[Vec<usize>]) -> (usize, Option<(usize, usize)>) {
    let k = ms.len();
    if k <= 1 {
        return (0, None);
    }
    let mut best = vec![usize::MAX; k];
    let mut from = vec![0; k];
    let mut done = vec![false; k];
    best[0] = 0;
    let mut worst = (0, None);
    for _ in 0..k {
        let u = (0..k).filter(|&i| !done[i]).min_by_key(|&i| best[i]).unwrap();
        done[u] = true;
        if best[u] > worst.0 {
            worst = (best[u], Some((from[u], u)));
        }
        for v in 0..k {
            if !done[v] {
                let d = move_degree(&ms[u], &ms[v]);
                if d < best[v] {
                    best[v] = d;
                    from[v] = u;
                }
            }
        }
    }
    worst
}

/// (needed move degree, image, fiber size, pair attaining it)
type FiberBottleneck<'a> = (usize, &'a Point, usize, Option<(usize, usize)>);

/// Least move degree connecting every fiber of degree `<= max_degree`.
/// Fails unless the polytope is normal to the same bound.
pub fn relation_degree(
    p: &GradedPolytope,
    move_degree_max: usize,
    max_degree: usize,
) -> Result<GenerationCertificate, ToricError> {
    let normal = is_normal(p, max_degree)?;
    if let Some((n, x)) = normal.witness {
        return Err(ToricError::NormalityPrerequisiteFailed(x, n));
    }
    let points = p.lattice_points(1)?;
    let mut per_degree = vec![0; max_degree + 1];
    let mut witness: Option<FiberWitness> = None;
    for n in 2..=max_degree {
        let table = all_fibers(&points, p.dim, n);
        let results: Vec<FiberBottleneck> = table
            .fibers
            .par_iter()
            .map(|(b, ms)| {
                let (d, pair) = bottleneck(ms);
                (d, b, ms.len(), pair)
            })
            .collect();
        let top = results.iter().map(|r| r.0).max().unwrap_or(0);
        per_degree[n] = top;
        let needs_more = witness.as_ref().is_none_or(|w| top > w.needed);
        if top > 1 && needs_more {
            let (d, b, size, pair) = results.iter().find(|r| r.0 == top).unwrap();
            let ms = &table.fibers[*b];
            witness = Some(FiberWitness {
                degree: n,
                image: (*b).clone(),
                fiber_size: *size,
                needed: *d,
                relation: pair.map(|(i, j)| BinomialRelation {
                    lhs: table.monomial(&ms[i]),
                    rhs: table.monomial(&ms[j]),
                }),
            });
        }
    }
    let needed = per_degree.iter().copied().max().unwrap_or(0).max(1);
    Ok(GenerationCertificate {
        polytope: format!("dim {} with {} lattice points", p.dim, points.len()),
        normal_degree_checked: max_degree,
        degree_bound: max_degree,
        move_degree_max,
        relation_degree: (needed <= move_degree_max).then_some(needed),
        per_degree,
        witness,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GbDegreeCount {
    pub degree: usize,
    /// Monomials with no non-standard degree-2 divisor.
    pub avoiding: u64,
    /// Distinct sums of `degree` lattice points.
    pub semigroup: u64,
    pub lattice_points: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GbReport {
    pub passed: bool,
    pub degree_bound: usize,
    pub order: String,
    pub square_free: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub non_standard_square: Option<Monomial>,
    pub leading_terms: usize,
    pub counts: Vec<GbDegreeCount>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure_degree: Option<usize>,
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Counts cliques of the standard-pair graph by size.
fn clique_sizes(adj: &[Vec<bool>], max_size: usize) -> Vec<u64> {
    fn grow(adj: &[Vec<bool>], cand: &[usize], size: usize, max_size: usize, out: &mut [u64]) {
        for (k, &v) in cand.iter().enumerate() {
            out[size + 1] += 1;
            if size + 1 < max_size {
                let next: Vec<usize> = cand[k + 1..].iter().copied().filter(|&w| adj[v][w]).collect();
                grow(adj, &next, size + 1, max_size, out);
            }
        }
    }
    let n = adj.len();
    let mut out = vec![0u64; max_size + 1];
    out[0] = 1;
    let per_root: Vec<Vec<u64>> = (0..n)
        .into_par_iter()
        .map(|v| {
            let mut local = vec![0u64; max_size + 1];
            local[1] = 1;
            if max_size > 1 {
                let next: Vec<usize> = (v + 1..n).filter(|&w| adj[v][w]).collect();
                grow(adj, &next, 1, max_size, &mut local);
            }
            local
        })
        .collect();
    for l in per_root {
        for (o, c) in out.iter_mut().zip(l).skip(1) {
            *o += c;
        }
    }
    out
}

/// Checks that the quadratic binomials `m - std(m)` form a Gröbner basis up
/// to `max_degree`: squares are standard, and the monomials avoiding every
/// non-standard degree-2 monomial are as many as the semigroup's points.
pub fn quadratic_squarefree_gb(
    p: &GradedPolytope,
    order: &TermOrder,
    max_degree: usize,
) -> Result<GbReport, ToricError> {
    if !order.is_total() {
        return Err(ToricError::NotTotal);
    }
    let points = p.lattice_points(1)?;
    let n = points.len();
    let cache = OrderCache::new(order, &points);
    let table = all_fibers(&points, p.dim, 2);
    let standard: HashSet<Vec<usize>> = table.minima(&cache).into_values().flatten().collect();
    let leading_terms = table.monomial_count() - standard.len();
    let non_standard_square = (0..n).find(|&i| !standard.contains(&vec![i, i])).map(|i| table.monomial(&[i, i]));
    let adj: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| i != j && standard.contains(&vec![i.min(j), i.max(j)])).collect())
        .collect();
    let cliques = clique_sizes(&adj, max_degree);
    let sums = semigroup_degrees(&points, p.dim, max_degree);
    let mut counts = Vec::new();
    let mut failure_degree = None;
    for d in 1..=max_degree {
        // multisets of size d with support exactly a given k-clique: C(d-1, k-1)
        let avoiding: u64 = (1..=d.min(max_degree))
            .map(|k| cliques[k] * binomial(d as u64 - 1, k as u64 - 1))
            .sum();
        let semigroup = sums[d].len() as u64;
        if avoiding != semigroup && failure_degree.is_none() {
            failure_degree = Some(d);
        }
        counts.push(GbDegreeCount {
            degree: d,
            avoiding,
            semigroup,
            lattice_points: p.count_lattice_points(d as u32)? as u64,
        });
    }
    Ok(GbReport {
        passed: non_standard_square.is_none() && failure_degree.is_none(),
        degree_bound: max_degree,
        order: order.describe(),
        square_free: non_standard_square.is_none(),
        non_standard_square,
        leading_terms,
        counts,
        failure_degree,
    })
}

/// The polytopes `P ∩ (a + [0,1]^d)` whose lattice points are maximal under
/// inclusion among all unit-cube translates.
pub fn maximal_cubical_regions(p: &GradedPolytope) -> Result<Vec<GradedPolytope>, PolytopeError> {
    let pts = p.lattice_points(1)?;
    let mut anchors: BTreeSet<Point> = BTreeSet::new();
    for x in &pts {
        for mask in 0..(1u32 << p.dim) {
            anchors.insert((0..p.dim).map(|k| x[k] - i64::from(mask >> k & 1)).collect());
        }
    }
    let in_cube = |a: &Point, x: &Point| a.iter().zip(x).all(|(a, x)| *x == *a || *x == *a + 1);
    let regions: Vec<(Point, BTreeSet<&Point>)> = anchors
        .into_iter()
        .map(|a| {
            let set = pts.iter().filter(|x| in_cube(&a, x)).collect();
            (a, set)
        })
        .collect();
    let mut seen: BTreeSet<Vec<&Point>> = BTreeSet::new();
    let mut out = Vec::new();
    for (a, set) in &regions {
        let maximal = !regions.iter().any(|(_, other)| other.len() > set.len() && set.is_subset(other));
        if maximal && seen.insert(set.iter().copied().collect()) {
            let mut q = p.clone();
            for (k, &ak) in a.iter().enumerate() {
                let mut lo = vec![0; p.dim];
                lo[k] = -1;
                q.add_inequality(lo.clone(), -ak);
                lo[k] = 1;
                q.add_inequality(lo, ak + 1);
                q = q.with_bound(k, rational(ak), rational(ak + 1));
            }
            out.push(q);
        }
    }
    Ok(out)
}

/// Sum of squares, then lexicographic order. On a unit square this ranks
/// `[1,1] > [1,0] > [0,1] > [0,0]`, and lex is translation invariant, so it
/// agrees with comparing offsets inside any unit-cube translate.
pub fn two_dim_balanced_order(p: &GradedPolytope, max_degree: usize) -> Result<TotalOrder, ToricError> {
    if p.dim != 2 {
        return Err(ToricError::WrongDimension(p.dim));
    }
    if let Some(f) = is_balanced(p, max_degree)? {
        return Err(ToricError::NotBalanced {
            degree: f.degree,
            image: f.image,
        });
    }
    Ok(TotalOrder::new(TermWeight::SigmaSquared, PointOrder::Lex))
}

/// The five lattice points of `P3(3)` whose halved pair sums
/// `h_i = (w_j + w_k - w_i) / 2` lie in `{0,1}^3` with `h_i <= h_j + h_k`:
/// `(0,0,0), (1,1,2), (1,2,1), (2,1,1), (2,2,2)`.
pub fn p3_unit_region() -> GradedPolytope {
    let mut p = GradedPolytope::new(3);
    for i in 0..3 {
        p = p.with_bound(i, zero(), rational(2));
    }
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let mut tri = vec![1; 3];
        tri[i] = -1;
        // w_i <= w_j + w_k
        p.add_inequality(tri.iter().map(|v| -v).collect(), 0);
        // w_j + w_k - w_i <= 2
        p.add_inequality(tri, 2);
        // w_j + w_k <= 3 w_i
        let mut row = vec![0; 3];
        row[i] = -3;
        row[j] = 1;
        row[k] = 1;
        p.add_inequality(row, 0);
    }
    p.lattice.parity_sets.push(vec![0, 1, 2]);
    p
}

/// Maps an integer point `h` of the trinode lattice to edge weights
/// `w_i = h_j + h_k`.
pub fn trinode_lattice_to_edges(h: &[i64]) -> Point {
    vec![h[1] + h[2], h[0] + h[2], h[0] + h[1]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::samples;
    use crate::polytopes::{
        building_block, from_graph, quadrant, trinode_polytope, BuildingBlockKind, LatticeChoice,
    };
    use crate::termorders::{standard_monomials, total_order_b2};

    fn interval(l: i64) -> GradedPolytope {
        let mut p = GradedPolytope::new(1).with_bound(0, zero(), rational(l));
        p.add_inequality(vec![-1], 0);
        p.add_inequality(vec![1], l);
        p
    }

    fn simplex(d: usize) -> GradedPolytope {
        let mut p = GradedPolytope::new(d);
        for i in 0..d {
            p = p.with_bound(i, zero(), rational(1));
            let mut row = vec![0; d];
            row[i] = -1;
            p.add_inequality(row, 0);
        }
        p.add_inequality(vec![1; d], 1);
        p
    }

    #[test]
    fn hilbert_examples() {
        let g = samples::four_leaf_tree();
        let p = from_graph(&g, &[1, 1, 1, 1], 1, LatticeChoice::Parity).unwrap();
        let h = hilbert(&p, 3).unwrap();
        assert_eq!(h.counts[..2], [1, 1]);
        let lw = from_graph(&samples::loop_with_leaf(), &[0], 1, LatticeChoice::Parity).unwrap();
        assert_eq!(hilbert(&lw, 1).unwrap().counts, vec![1, 2]);
        // nothing in any checked dilation
        let mut empty = interval(1);
        empty.add_inequality(vec![1], -1);
        assert_eq!(hilbert(&empty, 3).unwrap().counts, vec![0, 0, 0, 0]);
        assert_eq!(hilbert(&interval(2), 2).unwrap().to_csv(), "degree,count\n0,1\n1,3\n2,5\n");
    }

    #[test]
    fn four_leaf_internal_edge_is_zero() {
        let g = samples::four_leaf_tree();
        let p = from_graph(&g, &[1, 1, 1, 1], 1, LatticeChoice::Parity).unwrap();
        let pts = p.lattice_points(1).unwrap();
        assert_eq!(pts.len(), 1);
        let internal = (0..g.edge_count()).find(|&e| !g.is_leaf_edge(e)).unwrap();
        assert_eq!(pts[0][internal], 0);
    }

    #[test]
    fn normality_examples() {
        let full = trinode_polytope(1, LatticeChoice::Full);
        let r = is_normal(&full, 3).unwrap();
        assert!(!r.normal);
        assert_eq!(r.witness, Some((2, vec![1, 1, 1])));
        assert!(is_normal(&trinode_polytope(1, LatticeChoice::Parity), 4).unwrap().normal);
        for l in [2, 3] {
            assert!(is_normal(&trinode_polytope(l, LatticeChoice::Parity), 4).unwrap().normal);
        }
        assert!(is_normal(&interval(3), 4).unwrap().normal);
    }

    #[test]
    fn unit_region_points_and_cubic() {
        let p = p3_unit_region();
        let pts = p.lattice_points(1).unwrap();
        let want: Vec<Point> = vec![vec![0, 0, 0], vec![1, 1, 2], vec![1, 2, 1], vec![2, 1, 1], vec![2, 2, 2]];
        assert_eq!(pts, want);
        // translation of the lattice-coordinate relation
        let lhs: Vec<Point> = [[0, 1, 1], [1, 0, 1], [1, 1, 0]].iter().map(|h| trinode_lattice_to_edges(h)).collect();
        let rhs: Vec<Point> = [[0, 0, 0], [1, 1, 1], [1, 1, 1]].iter().map(|h| trinode_lattice_to_edges(h)).collect();
        assert_eq!(Monomial::new(lhs.clone()).image(3), Monomial::new(rhs.clone()).image(3));
        let cert = relation_degree(&p, 3, 3).unwrap();
        assert_eq!(cert.relation_degree, Some(3));
        let w = cert.witness.unwrap();
        assert_eq!((w.degree, w.image.clone()), (3, vec![4, 4, 4]));
        let rel = w.relation.unwrap();
        let pair: BTreeSet<Monomial> = [rel.lhs, rel.rhs].into_iter().collect();
        assert_eq!(pair, [Monomial::new(lhs), Monomial::new(rhs)].into_iter().collect());
        // no total refinement of the sum of squares gives a quadratic basis
        let lex = TotalOrder::new(TermWeight::SigmaSquared, PointOrder::Lex);
        let gb = quadratic_squarefree_gb(&p, &lex.into(), 3).unwrap();
        assert!(!gb.passed);
        assert_eq!(gb.failure_degree, Some(3));
        let cap = relation_degree(&p, 2, 3).unwrap();
        assert_eq!(cap.relation_degree, None);
    }

    #[test]
    fn simplex_has_no_relations() {
        let cert = relation_degree(&simplex(3), 3, 4).unwrap();
        assert_eq!(cert.relation_degree, Some(1));
        assert!(cert.witness.is_none());
    }

    #[test]
    fn q1_generators_and_order() {
        let q = quadrant(1, 1).unwrap();
        let gb = quadratic_squarefree_gb(&q, &total_order_b2().into(), 4).unwrap();
        assert!(gb.passed, "{gb:?}");
        assert_eq!(gb.leading_terms, 1);
        let cert = relation_degree(&q, 3, 4).unwrap();
        assert_eq!(cert.relation_degree, Some(2));
    }

    /// Coordinate conventions (permutation plus optional complement `v -> 1 - v`)
    /// under which `Q_1(1)` becomes the listed generator set.
    #[test]
    fn q1_label_convention() {
        let pts = quadrant(1, 1).unwrap().lattice_points(1).unwrap();
        let listed: BTreeSet<Point> = ["1100", "1000", "0100", "0000", "0010", "1101"]
            .iter()
            .map(|s| s.bytes().map(|b| (b - b'0') as i64).collect())
            .collect();
        let mut found = Vec::new();
        let perms = permutations(4);
        for perm in &perms {
            for mask in 0..16u32 {
                let image: BTreeSet<Point> = pts
                    .iter()
                    .map(|p| {
                        (0..4)
                            .map(|k| {
                                let v = p[perm[k]];
                                if mask >> k & 1 == 1 { 1 - v } else { v }
                            })
                            .collect()
                    })
                    .collect();
                if image == listed {
                    found.push((perm.clone(), mask));
                }
            }
        }
        // (x, z, A, B) -> (x, z, 1 - B, A)
        assert!(found.contains(&(vec![0, 1, 3, 2], 0b0100)), "{found:?}");
        // the single quadratic relation [1100][0000] = [1000][0100] under that convention
        let conv = |s: &str| -> Point {
            let v: Vec<i64> = s.bytes().map(|b| (b - b'0') as i64).collect();
            vec![v[0], v[1], v[3], 1 - v[2]]
        };
        let lhs = Monomial::new(vec![conv("1100"), conv("0000")]);
        let rhs = Monomial::new(vec![conv("1000"), conv("0100")]);
        assert_eq!(lhs.image(4), rhs.image(4));
        let std = standard_monomials(&quadrant(1, 1).unwrap(), &total_order_b2().into(), 2).unwrap();
        assert!(std.contains(&lhs) != std.contains(&rhs));
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for i in 0..=p.len() {
                let mut q = p.clone();
                q.insert(i, n - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn two_dim_orders() {
        let b2 = building_block(BuildingBlockKind::LoopB { level: 2 }).unwrap();
        let o = two_dim_balanced_order(&b2, 3).unwrap();
        assert!(quadratic_squarefree_gb(&b2, &o.into(), 4).unwrap().passed);
        let mut square = GradedPolytope::new(2).with_bound(0, zero(), rational(1)).with_bound(1, zero(), rational(1));
        for (row, rhs) in [([1, 0], 1), ([0, 1], 1), ([-1, 0], 0), ([0, -1], 0)] {
            square.add_inequality(row.to_vec(), rhs);
        }
        let o = two_dim_balanced_order(&square, 3).unwrap();
        assert!(quadratic_squarefree_gb(&square, &o.into(), 4).unwrap().passed);
        assert!(matches!(
            two_dim_balanced_order(&trinode_polytope(2, LatticeChoice::Parity), 3),
            Err(ToricError::WrongDimension(3))
        ));
    }

    #[test]
    fn gb_needs_total_order() {
        assert!(matches!(
            quadratic_squarefree_gb(&interval(2), &TermWeight::SigmaSquared.into(), 2),
            Err(ToricError::NotTotal)
        ));
    }

    #[test]
    fn hilbert_matches_standard_counts() {
        let p = building_block(BuildingBlockKind::P3 { level: 2 }).unwrap();
        let lex: TermOrder = TotalOrder::new(TermWeight::SigmaSquared, PointOrder::Lex).into();
        let h = hilbert(&p, 3).unwrap();
        for n in 1..=3 {
            assert_eq!(standard_monomials(&p, &lex, n).unwrap().len(), h.counts[n]);
        }
    }

    #[test]
    fn gb_implies_quadratic_generation() {
        let b = building_block(BuildingBlockKind::LoopB { level: 2 }).unwrap();
        let lex: TermOrder = TotalOrder::new(TermWeight::SigmaSquared, PointOrder::Lex).into();
        assert!(quadratic_squarefree_gb(&b, &lex, 3).unwrap().passed);
        assert!(relation_degree(&b, 3, 3).unwrap().relation_degree.unwrap() <= 2);
        let q = quadrant(1, 2).unwrap();
        assert!(quadratic_squarefree_gb(&q, &total_order_b2().into(), 3).unwrap().passed);
        assert!(relation_degree(&q, 3, 3).unwrap().relation_degree.unwrap() <= 2);
    }

    /// `P3(2)` contains a translate of the cubic unit region. Its ideal is
    /// still quadratic to this bound, but sum of squares with lex ties leaves
    /// the cube's cubic as a leading term.
    #[test]
    fn p3_block_has_a_cubic() {
        let p = building_block(BuildingBlockKind::P3 { level: 2 }).unwrap();
        let lex: TermOrder = TotalOrder::new(TermWeight::SigmaSquared, PointOrder::Lex).into();
        assert_eq!(quadratic_squarefree_gb(&p, &lex, 3).unwrap().failure_degree, Some(3));
        assert_eq!(relation_degree(&p, 3, 3).unwrap().relation_degree, Some(2));
    }

    #[test]
    fn relation_degree_bounded_by_cubical_regions() {
        for kind in [BuildingBlockKind::P3 { level: 2 }, BuildingBlockKind::LoopB { level: 2 }] {
            let p = building_block(kind).unwrap();
            let regions = maximal_cubical_regions(&p).unwrap();
            assert!(!regions.is_empty());
            // regions cover the lattice points
            let covered: BTreeSet<Point> = regions.iter().flat_map(|q| q.lattice_points(1).unwrap()).collect();
            assert_eq!(covered, p.lattice_points(1).unwrap().into_iter().collect());
            let local = regions
                .iter()
                .map(|q| relation_degree(q, 3, 3).unwrap().relation_degree.unwrap())
                .max()
                .unwrap();
            let global = relation_degree(&p, 3, 3).unwrap().relation_degree.unwrap();
            assert!(global <= local, "{kind}: {global} > {local}");
        }
    }

    #[test]
    fn normal_means_semigroup_matches_hilbert() {
        for kind in [
            BuildingBlockKind::P3 { level: 2 },
            BuildingBlockKind::LoopB { level: 3 },
            BuildingBlockKind::P3Fixed1 { r: 2, level: 2 },
        ] {
            let p = building_block(kind).unwrap();
            assert!(is_normal(&p, 3).unwrap().normal);
            let h = hilbert(&p, 3).unwrap();
            let s = semigroup_degrees(&p.lattice_points(1).unwrap(), p.dim, 3);
            for n in 0..=3 {
                assert_eq!(s[n].len(), h.counts[n]);
            }
        }
        // and the converse fails visibly on the non-normal trinode
        let full = trinode_polytope(1, LatticeChoice::Full);
        let s = semigroup_degrees(&full.lattice_points(1).unwrap(), 3, 2);
        assert!(s[2].len() < hilbert(&full, 2).unwrap().counts[2]);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]

        // L = 1 is left out: P3(1) in block form is not normal, and standard
        // monomials only see the semigroup
        #[test]
        fn hilbert_counts_standard_monomials(
            l in 2u64..=3,
            which in 0usize..3,
            coeffs in proptest::collection::vec(1i64..4, 3),
        ) {
            let kind = [
                BuildingBlockKind::P3 { level: l },
                BuildingBlockKind::P3Fixed1 { r: 2, level: l },
                BuildingBlockKind::P3Fixed2 { r: 2, s: 2 * l, level: l },
            ][which];
            let p = building_block(kind).unwrap();
            let order: TermOrder = TotalOrder::new(TermWeight::WeightedSquares(coeffs), PointOrder::Lex).into();
            let h = hilbert(&p, 3).unwrap();
            for n in 1..=3 {
                proptest::prop_assert_eq!(standard_monomials(&p, &order, n).unwrap().len(), h.counts[n]);
            }
        }

        #[test]
        fn bottleneck_ignores_fiber_order(seed in 0u64..1000, extra in 0usize..4) {
            use rand::{seq::SliceRandom, SeedableRng};
            let p = p3_unit_region();
            let pts = p.lattice_points(1).unwrap();
            let table = all_fibers(&pts, 3, 3 + extra % 2);
            let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
            for ms in table.fibers.values() {
                let mut shuffled = ms.clone();
                shuffled.shuffle(&mut rng);
                proptest::prop_assert_eq!(bottleneck(ms).0, bottleneck(&shuffled).0);
            }
        }

        #[test]
        fn gb_pass_implies_quadratic(l in 1u64..=2, q in 1u8..=4) {
            let p = quadrant(q, l).unwrap();
            let gb = quadratic_squarefree_gb(&p, &total_order_b2().into(), 3).unwrap();
            if gb.passed {
                proptest::prop_assert!(relation_degree(&p, 3, 3).unwrap().relation_degree.unwrap() <= 2);
            }
        }
    }

    #[test]
    fn relation_degree_is_monotone_in_move_cap() {
        let p = p3_unit_region();
        let caps: Vec<Option<usize>> = (1..=4).map(|c| relation_degree(&p, c, 3).unwrap().relation_degree).collect();
        assert_eq!(caps, vec![None, None, Some(3), Some(3)]);
    }
}
