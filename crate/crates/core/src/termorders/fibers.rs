use std::collections::{BTreeMap, BTreeSet, HashSet};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use super::{Monomial, TermOrder};
use crate::polytopes::{GradedPolytope, Point, PolytopeError, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FlagFailure {
    pub monomial: Monomial,
    pub standard: bool,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BalanceFailure {
    pub degree: usize,
    pub image: Point,
    pub monomial: Monomial,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermOrderError {
    #[error("order is not flag: {} ({})", .0.monomial, .0.reason)]
    NotFlag(FlagFailure),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
}

/// Point weights and tie-break ranks of a fixed point list, so monomials given
/// as index lists compare by a plain sort key.
#[derive(Debug, Clone)]
pub struct OrderCache {
    weights: Vec<Rational>,
    ranks: Option<Vec<usize>>,
}

/// Sort key of a monomial: weight, then tie-break ranks in descending order.
pub type MonomialKey = (Rational, Vec<usize>);

impl OrderCache {
    pub fn new(order: &TermOrder, points: &[Point]) -> Self {
        let weights = points.iter().map(|p| order.weight().eval(p)).collect();
        let ranks = match order {
            TermOrder::Weight(_) => None,
            TermOrder::Total(o) => {
                let mut idx: Vec<usize> = (0..points.len()).collect();
                idx.sort_by(|&a, &b| o.tiebreak.cmp(&points[a], &points[b]));
                let mut ranks = vec![0; points.len()];
                for k in 1..idx.len() {
                    let tie = o.tiebreak.cmp(&points[idx[k - 1]], &points[idx[k]]).is_eq();
                    ranks[idx[k]] = ranks[idx[k - 1]] + usize::from(!tie);
                }
                Some(ranks)
            }
        };
        OrderCache { weights, ranks }
    }

    pub fn key(&self, m: &[usize]) -> MonomialKey {
        let w = m.iter().map(|&i| self.weights[i]).sum();
        let ranks = match &self.ranks {
            None => Vec::new(),
            Some(r) => {
                let mut v: Vec<usize> = m.iter().map(|&i| r[i]).collect();
                v.sort_unstable_by(|a, b| b.cmp(a));
                v
            }
        };
        (w, ranks)
    }

    pub fn weight(&self, i: usize) -> Rational {
        self.weights[i]
    }
}

/// All degree-`degree` monomials in `points`, grouped by image. Monomials
/// are nondecreasing index lists into `points`.
#[derive(Debug, Clone)]
pub struct FiberTable {
    pub points: Vec<Point>,
    pub degree: usize,
    pub fibers: BTreeMap<Point, Vec<Vec<usize>>>,
}

impl FiberTable {
    pub fn monomial(&self, m: &[usize]) -> Monomial {
        Monomial::new(m.iter().map(|&i| self.points[i].clone()).collect())
    }

    /// Minimal members of every fiber.
    pub fn minima(&self, cache: &OrderCache) -> BTreeMap<Point, Vec<Vec<usize>>> {
        self.fibers
            .par_iter()
            .map(|(b, ms)| (b.clone(), fiber_minima(ms, cache)))
            .collect()
    }

    pub fn monomial_count(&self) -> usize {
        self.fibers.values().map(Vec::len).sum()
    }
}

pub(crate) fn fiber_minima(ms: &[Vec<usize>], cache: &OrderCache) -> Vec<Vec<usize>> {
    let keys: Vec<MonomialKey> = ms.iter().map(|m| cache.key(m)).collect();
    let Some(min) = keys.iter().min() else {
        return Vec::new();
    };
    ms.iter()
        .zip(&keys)
        .filter(|(_, k)| *k == min)
        .map(|(m, _)| m.clone())
        .collect()
}

fn add(a: &mut [i64], b: &[i64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

fn extend_multisets(
    points: &[Point],
    start: usize,
    left: usize,
    cur: &mut Vec<usize>,
    sum: &mut Vec<i64>,
    out: &mut Vec<(Point, Vec<usize>)>,
) {
    if left == 0 {
        out.push((sum.clone(), cur.clone()));
        return;
    }
    for i in start..points.len() {
        cur.push(i);
        add(sum, &points[i]);
        extend_multisets(points, i, left - 1, cur, sum, out);
        for (x, y) in sum.iter_mut().zip(&points[i]) {
            *x -= y;
        }
        cur.pop();
    }
}

pub fn all_fibers(points: &[Point], dim: usize, degree: usize) -> FiberTable {
    let mut fibers: BTreeMap<Point, Vec<Vec<usize>>> = BTreeMap::new();
    if degree == 0 {
        fibers.insert(vec![0; dim], vec![Vec::new()]);
    } else {
        let chunks: Vec<Vec<(Point, Vec<usize>)>> = (0..points.len())
            .into_par_iter()
            .map(|first| {
                let mut out = Vec::new();
                let mut cur = vec![first];
                let mut sum = points[first].clone();
                extend_multisets(points, first, degree - 1, &mut cur, &mut sum, &mut out);
                out
            })
            .collect();
        for (b, m) in chunks.into_iter().flatten() {
            fibers.entry(b).or_default().push(m);
        }
    }
    FiberTable {
        points: points.to_vec(),
        degree,
        fibers,
    }
}

/// Degree-`degree` multisets of `points` summing to `b`, in sorted order.
pub fn fiber_set_of_points(points: &[Point], b: &[i64], degree: usize) -> Vec<Monomial> {
    let dim = b.len();
    if points.iter().any(|p| p.len() != dim) {
        return Vec::new();
    }
    let lo: Vec<i64> = (0..dim).map(|k| points.iter().map(|p| p[k]).min().unwrap_or(0)).collect();
    let hi: Vec<i64> = (0..dim).map(|k| points.iter().map(|p| p[k]).max().unwrap_or(0)).collect();
    let mut out = Vec::new();
    let mut cur = Vec::new();
    let mut rest = b.to_vec();
    search_fiber(points, &lo, &hi, 0, degree, &mut cur, &mut rest, &mut out);
    let mut ms: Vec<Monomial> = out
        .into_iter()
        .map(|idx: Vec<usize>| Monomial::new(idx.iter().map(|&i| points[i].clone()).collect()))
        .collect();
    ms.sort();
    ms
}

#[allow(clippy::too_many_arguments)]
fn search_fiber(
    points: &[Point],
    lo: &[i64],
    hi: &[i64],
    start: usize,
    left: usize,
    cur: &mut Vec<usize>,
    rest: &mut Vec<i64>,
    out: &mut Vec<Vec<usize>>,
) {
    let l = left as i64;
    if (0..rest.len()).any(|k| rest[k] < l * lo[k] || rest[k] > l * hi[k]) {
        return;
    }
    if left == 0 {
        out.push(cur.clone());
        return;
    }
    for i in start..points.len() {
        cur.push(i);
        for (x, y) in rest.iter_mut().zip(&points[i]) {
            *x -= y;
        }
        search_fiber(points, lo, hi, i, left - 1, cur, rest, out);
        add(rest, &points[i]);
        cur.pop();
    }
}

pub fn fiber_set(p: &GradedPolytope, b: &[i64], degree: usize) -> Result<Vec<Monomial>, PolytopeError> {
    Ok(fiber_set_of_points(&p.lattice_points(1)?, b, degree))
}

/// Minimal monomials of every degree-`degree` fiber, sorted.
pub fn standard_monomials(
    p: &GradedPolytope,
    order: &TermOrder,
    degree: usize,
) -> Result<Vec<Monomial>, PolytopeError> {
    let points = p.lattice_points(1)?;
    let cache = OrderCache::new(order, &points);
    let table = all_fibers(&points, p.dim, degree);
    let mut out: Vec<Monomial> = table
        .minima(&cache)
        .values()
        .flatten()
        .map(|m| table.monomial(m))
        .collect();
    out.sort();
    Ok(out)
}

pub fn has_unique_standard_monomials(
    p: &GradedPolytope,
    order: &TermOrder,
    max_degree: usize,
) -> Result<bool, PolytopeError> {
    let points = p.lattice_points(1)?;
    let cache = OrderCache::new(order, &points);
    for n in 2..=max_degree {
        let table = all_fibers(&points, p.dim, n);
        if table.minima(&cache).values().any(|m| m.len() > 1) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn standard_set(table: &FiberTable, cache: &OrderCache) -> HashSet<Vec<usize>> {
    table.minima(cache).into_values().flatten().collect()
}

/// Checks up to `max_degree` that a monomial is standard exactly when all its
/// degree-2 divisors are, and that all powers of points are standard.
/// Returns the first violation.
pub fn is_flag(
    p: &GradedPolytope,
    order: &TermOrder,
    max_degree: usize,
) -> Result<Option<FlagFailure>, PolytopeError> {
    let points = p.lattice_points(1)?;
    Ok(flag_failure(&points, p.dim, order, max_degree))
}

pub(crate) fn flag_failure(
    points: &[Point],
    dim: usize,
    order: &TermOrder,
    max_degree: usize,
) -> Option<FlagFailure> {
    let cache = OrderCache::new(order, points);
    let pairs = standard_set(&all_fibers(points, dim, 2), &cache);
    for n in 2..=max_degree {
        let table = all_fibers(points, dim, n);
        let standard = standard_set(&table, &cache);
        for i in 0..points.len() {
            let power = vec![i; n];
            if !standard.contains(&power) {
                return Some(FlagFailure {
                    monomial: table.monomial(&power),
                    standard: false,
                    reason: format!("power of degree {n} is not standard"),
                });
            }
        }
        let bad = table.fibers.par_iter().find_map_first(|(_, ms)| {
            ms.iter().find_map(|m| {
                let is_std = standard.contains(m);
                let pairs_std = (0..n).all(|i| (i + 1..n).all(|j| pairs.contains(&vec![m[i], m[j]])));
                (is_std != pairs_std).then(|| FlagFailure {
                    monomial: table.monomial(m),
                    standard: is_std,
                    reason: if is_std {
                        "standard monomial with a non-standard degree-2 divisor".into()
                    } else {
                        "non-standard monomial whose degree-2 divisors are all standard".into()
                    },
                })
            })
        });
        if bad.is_some() {
            return bad;
        }
    }
    None
}

/// Whether every sum of at most `max_degree` lattice points is also a sum of
/// the same number of lattice points lying in one translate of the unit cube.
pub fn is_balanced(p: &GradedPolytope, max_degree: usize) -> Result<Option<BalanceFailure>, PolytopeError> {
    let points = p.lattice_points(1)?;
    let dim = p.dim;
    // image -> one monomial reaching it
    let mut reach: BTreeMap<Point, Vec<usize>> =
        points.iter().enumerate().map(|(i, x)| (x.clone(), vec![i])).collect();
    for n in 2..=max_degree {
        let mut next: BTreeMap<Point, Vec<usize>> = BTreeMap::new();
        for (b, m) in &reach {
            for (i, x) in points.iter().enumerate() {
                let mut s = b.clone();
                add(&mut s, x);
                next.entry(s).or_insert_with(|| {
                    let mut m = m.clone();
                    m.push(i);
                    m.sort_unstable();
                    m
                });
            }
        }
        reach = next;
        let failure = reach.par_iter().find_map_first(|(b, m)| {
            let nn = n as i64;
            let q: Vec<i64> = b.iter().map(|v| v.div_euclid(nn)).collect();
            let cube: Vec<Point> = points
                .iter()
                .filter(|x| (0..dim).all(|k| x[k] == q[k] || x[k] == q[k] + 1))
                .cloned()
                .collect();
            fiber_set_of_points(&cube, b, n).is_empty().then(|| BalanceFailure {
                degree: n,
                image: b.clone(),
                monomial: Monomial::new(m.iter().map(|&i| points[i].clone()).collect()),
            })
        });
        if failure.is_some() {
            return Ok(failure);
        }
    }
    Ok(None)
}

pub fn fits_unit_cube(face: &[Point]) -> bool {
    let Some(first) = face.first() else {
        return true;
    };
    (0..first.len()).all(|k| {
        let lo = face.iter().map(|p| p[k]).min().unwrap();
        let hi = face.iter().map(|p| p[k]).max().unwrap();
        hi - lo <= 1
    })
}

/// Maximal faces of the initial complex of a flag order: the maximal sets of
/// points whose pairwise products and squares are all standard.
pub fn initial_complex_maximal_faces(
    p: &GradedPolytope,
    order: &TermOrder,
    max_degree: usize,
) -> Result<Vec<Vec<Point>>, TermOrderError> {
    let points = p.lattice_points(1)?;
    if let Some(f) = flag_failure(&points, p.dim, order, max_degree.max(2)) {
        return Err(TermOrderError::NotFlag(f));
    }
    let cache = OrderCache::new(order, &points);
    let pairs = standard_set(&all_fibers(&points, p.dim, 2), &cache);
    let n = points.len();
    let adj: Vec<BTreeSet<usize>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && pairs.contains(&vec![i.min(j), i.max(j)]))
                .collect()
        })
        .collect();
    let mut cliques = Vec::new();
    bron_kerbosch(
        &adj,
        BTreeSet::new(),
        (0..n).collect(),
        BTreeSet::new(),
        &mut cliques,
    );
    let mut faces: Vec<Vec<Point>> = cliques
        .into_iter()
        .map(|c| c.into_iter().map(|i| points[i].clone()).collect())
        .collect();
    faces.sort();
    Ok(faces)
}

fn bron_kerbosch(
    adj: &[BTreeSet<usize>],
    r: BTreeSet<usize>,
    mut p: BTreeSet<usize>,
    mut x: BTreeSet<usize>,
    out: &mut Vec<BTreeSet<usize>>,
) {
    if p.is_empty() {
        if x.is_empty() {
            out.push(r);
        }
        return;
    }
    let pivot = *p.union(&x).max_by_key(|&&u| adj[u].intersection(&p).count()).unwrap();
    let candidates: Vec<usize> = p.difference(&adj[pivot]).copied().collect();
    for v in candidates {
        let mut r2 = r.clone();
        r2.insert(v);
        bron_kerbosch(
            adj,
            r2,
            p.intersection(&adj[v]).copied().collect(),
            x.intersection(&adj[v]).copied().collect(),
            out,
        );
        p.remove(&v);
        x.insert(v);
    }
}

/// Repeatedly replaces a non-standard degree-2 divisor of `m` by the least
/// standard monomial of its fiber. Returns the trajectory, ending at a
/// monomial all of whose degree-2 divisors are standard.
pub fn degree_two_reduction(
    points: &[Point],
    order: &TermOrder,
    m: &Monomial,
) -> Vec<Monomial> {
    let dim = m.points.first().map_or(0, |p| p.len());
    let cache = OrderCache::new(order, points);
    let table = all_fibers(points, dim, 2);
    let minima = table.minima(&cache);
    let index = |p: &Point| points.binary_search(p).expect("point of the polytope");
    let mut cur: Vec<usize> = m.points.iter().map(index).collect();
    cur.sort_unstable();
    let mut trail = vec![table.monomial(&cur)];
    'outer: loop {
        for i in 0..cur.len() {
            for j in i + 1..cur.len() {
                let pair = vec![cur[i], cur[j]];
                let mut b = points[cur[i]].clone();
                add(&mut b, &points[cur[j]]);
                let best = &minima[&b];
                if !best.contains(&pair) {
                    cur.remove(j);
                    cur.remove(i);
                    cur.extend(best[0].iter().copied());
                    cur.sort_unstable();
                    trail.push(table.monomial(&cur));
                    continue 'outer;
                }
            }
        }
        return trail;
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceEntry {
    pub monomial: Monomial,
    pub weight: String,
    /// Points in descending tie-break order.
    pub key: Vec<Point>,
}

/// The given monomials sorted by `order`, with the data each comparison used.
pub fn order_trace(order: &TermOrder, monomials: &[Monomial]) -> Vec<TraceEntry> {
    let mut ms = monomials.to_vec();
    ms.sort_by(|a, b| order.cmp_monomials(a, b).then_with(|| a.cmp(b)));
    ms.into_iter()
        .map(|m| {
            let mut key = m.points.clone();
            if let TermOrder::Total(o) = order {
                key.sort_by(|a, b| o.tiebreak.cmp(b, a));
            } else {
                key.reverse();
            }
            let w = order.weight().monomial(&m);
            TraceEntry {
                weight: if w.is_integer() { w.to_integer().to_string() } else { w.to_string() },
                monomial: m,
                key,
            }
        })
        .collect()
}
