//! Weights on lattice points, monomial orders built from them, and the
//! balancing moves that drive the sum-of-squares order.

mod fibers;

use std::cmp::Ordering;
use std::fmt;

use num_traits::Zero;
use serde::Serialize;

use crate::polytopes::{Point, Rational};

pub use fibers::{
    all_fibers, degree_two_reduction, fiber_set, fiber_set_of_points, fits_unit_cube,
    has_unique_standard_monomials, initial_complex_maximal_faces, is_balanced, is_flag,
    order_trace, standard_monomials, BalanceFailure, FiberTable, FlagFailure, OrderCache,
    TermOrderError, TraceEntry,
};

pub fn sigma_squared(v: &[i64]) -> i64 {
    v.iter().map(|x| x * x).sum()
}

/// `(x, y) -> (floor((x+y)/2), ceil((x+y)/2))`.
pub fn balance_pair(x: i64, y: i64) -> (i64, i64) {
    let s = x + y;
    (s.div_euclid(2), s - s.div_euclid(2))
}

/// Entrywise pairwise balancing of a tuple of vectors until every coordinate
/// slice has spread at most one. Pairs already within one are left alone,
/// so each step strictly lowers the sum of squares.
pub fn balance_tuple(t: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let mut out = t.to_vec();
    let dim = out.first().map_or(0, |v| v.len());
    loop {
        let mut changed = false;
        for i in 0..out.len() {
            for j in i + 1..out.len() {
                for k in 0..dim {
                    let (a, b) = (out[i][k], out[j][k]);
                    if (a - b).abs() >= 2 {
                        let (lo, hi) = balance_pair(a, b);
                        out[i][k] = lo;
                        out[j][k] = hi;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return out;
        }
    }
}

/// Whether every coordinate slice of the tuple has spread at most one.
pub fn is_balanced_tuple(t: &[Vec<i64>]) -> bool {
    let dim = t.first().map_or(0, |v| v.len());
    (0..dim).all(|k| {
        let lo = t.iter().map(|v| v[k]).min().unwrap();
        let hi = t.iter().map(|v| v[k]).max().unwrap();
        hi - lo <= 1
    })
}

/// A weight attached to each lattice point; a monomial weighs the sum over
/// its points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TermWeight {
    SigmaSquared,
    /// `sum c_i x_i^2`.
    WeightedSquares(Vec<i64>),
    /// Sum of weights on consecutive coordinate blocks `(offset, len, weight)`.
    Sum(Vec<(usize, usize, TermWeight)>),
    /// Explicit values; points not listed weigh zero.
    Table(Vec<(Point, Rational)>),
    Zero,
}

impl TermWeight {
    pub fn eval(&self, x: &[i64]) -> Rational {
        match self {
            TermWeight::SigmaSquared => Rational::from_integer(sigma_squared(x)),
            TermWeight::WeightedSquares(c) => {
                Rational::from_integer(c.iter().zip(x).map(|(c, v)| c * v * v).sum())
            }
            TermWeight::Sum(parts) => parts
                .iter()
                .map(|(off, len, w)| w.eval(&x[*off..off + len]))
                .sum(),
            TermWeight::Table(t) => t
                .iter()
                .find(|(p, _)| p.as_slice() == x)
                .map_or_else(Rational::zero, |(_, w)| *w),
            TermWeight::Zero => Rational::zero(),
        }
    }

    pub fn monomial(&self, m: &Monomial) -> Rational {
        m.points.iter().map(|p| self.eval(p)).sum()
    }

    /// `w1 (+) w2` on concatenated coordinates.
    pub fn direct_sum(w1: TermWeight, d1: usize, w2: TermWeight, d2: usize) -> Self {
        TermWeight::Sum(vec![(0, d1, w1), (d1, d2, w2)])
    }
}

impl fmt::Display for TermWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermWeight::SigmaSquared => write!(f, "sigma2"),
            TermWeight::WeightedSquares(c) => write!(f, "squares{c:?}"),
            TermWeight::Sum(parts) => {
                let names: Vec<String> = parts.iter().map(|(_, _, w)| w.to_string()).collect();
                write!(f, "{}", names.join("+"))
            }
            TermWeight::Table(_) => write!(f, "table"),
            TermWeight::Zero => write!(f, "zero"),
        }
    }
}

/// A multiset of lattice points, kept sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Monomial {
    pub points: Vec<Point>,
}

impl Monomial {
    pub fn new(mut points: Vec<Point>) -> Self {
        points.sort();
        Monomial { points }
    }

    pub fn degree(&self) -> usize {
        self.points.len()
    }

    pub fn image(&self, dim: usize) -> Point {
        let mut s = vec![0; dim];
        for p in &self.points {
            for (a, b) in s.iter_mut().zip(p) {
                *a += b;
            }
        }
        s
    }

    pub fn times(&self, other: &Monomial) -> Monomial {
        let mut pts = self.points.clone();
        pts.extend(other.points.iter().cloned());
        Monomial::new(pts)
    }

    pub fn support(&self) -> Vec<Point> {
        let mut s = self.points.clone();
        s.dedup();
        s
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.points {
            write!(f, "[")?;
            for (i, v) in p.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{v}")?;
            }
            write!(f, "]")?;
        }
        Ok(())
    }
}

/// Tie-break orders on single points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PointOrder {
    Lex,
    /// Points in `(x, z, A, B)` coordinates compared by `B`, then `z`, `x`, `A`.
    B2,
    /// The same cascade read off native coordinates: `coords` gives the
    /// positions of `x, y1, y2, z`, with `B = (y1 + y2) / 2` and
    /// `A = (y1 - y2) / 2`.
    B2Native { coords: [usize; 4] },
    /// Compare the first `split` coordinates by the left order (weight
    /// included), then the rest by the right order.
    Product {
        split: usize,
        left: Box<TotalOrder>,
        right: Box<TotalOrder>,
    },
}

impl PointOrder {
    pub fn cmp(&self, a: &[i64], b: &[i64]) -> Ordering {
        match self {
            PointOrder::Lex => a.cmp(b),
            PointOrder::B2 => {
                let key = |p: &[i64]| [p[3], p[1], p[0], p[2]];
                key(a).cmp(&key(b))
            }
            PointOrder::B2Native { coords: [x, y1, y2, z] } => {
                let key = |p: &[i64]| [p[*y1] + p[*y2], p[*z], p[*x], p[*y1] - p[*y2]];
                key(a).cmp(&key(b))
            }
            PointOrder::Product { split, left, right } => left
                .cmp_points(&a[..*split], &b[..*split])
                .then_with(|| right.cmp_points(&a[*split..], &b[*split..])),
        }
    }
}

/// Degree, then weight, then the descending point sequences compared at
/// their first difference under `tiebreak`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TotalOrder {
    pub weight: TermWeight,
    pub tiebreak: PointOrder,
}

impl TotalOrder {
    pub fn new(weight: TermWeight, tiebreak: PointOrder) -> Self {
        TotalOrder { weight, tiebreak }
    }

    /// Order on single points: weight, then tie-break.
    pub fn cmp_points(&self, a: &[i64], b: &[i64]) -> Ordering {
        self.weight
            .eval(a)
            .cmp(&self.weight.eval(b))
            .then_with(|| self.tiebreak.cmp(a, b))
    }

    fn descending<'a>(&self, m: &'a Monomial) -> Vec<&'a Point> {
        let mut pts: Vec<&Point> = m.points.iter().collect();
        pts.sort_by(|a, b| self.tiebreak.cmp(b, a));
        pts
    }

    pub fn cmp_monomials(&self, a: &Monomial, b: &Monomial) -> Ordering {
        a.degree()
            .cmp(&b.degree())
            .then_with(|| self.weight.monomial(a).cmp(&self.weight.monomial(b)))
            .then_with(|| {
                let (da, db) = (self.descending(a), self.descending(b));
                da.iter()
                    .zip(&db)
                    .map(|(x, y)| self.tiebreak.cmp(x, y))
                    .find(|o| o.is_ne())
                    .unwrap_or(Ordering::Equal)
            })
    }
}

/// The order used to pick standard monomials: a bare weight (a preorder, so
/// fibers may have several minima) or a total order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TermOrder {
    Weight(TermWeight),
    Total(TotalOrder),
}

impl From<TermWeight> for TermOrder {
    fn from(w: TermWeight) -> Self {
        TermOrder::Weight(w)
    }
}

impl From<TotalOrder> for TermOrder {
    fn from(o: TotalOrder) -> Self {
        TermOrder::Total(o)
    }
}

impl TermOrder {
    pub fn weight(&self) -> &TermWeight {
        match self {
            TermOrder::Weight(w) => w,
            TermOrder::Total(o) => &o.weight,
        }
    }

    pub fn is_total(&self) -> bool {
        matches!(self, TermOrder::Total(_))
    }

    pub fn cmp_monomials(&self, a: &Monomial, b: &Monomial) -> Ordering {
        match self {
            TermOrder::Weight(w) => a
                .degree()
                .cmp(&b.degree())
                .then_with(|| w.monomial(a).cmp(&w.monomial(b))),
            TermOrder::Total(o) => o.cmp_monomials(a, b),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            TermOrder::Weight(w) => w.to_string(),
            TermOrder::Total(o) => format!("{}/{}", o.weight, describe_tiebreak(&o.tiebreak)),
        }
    }
}

fn describe_tiebreak(p: &PointOrder) -> String {
    match p {
        PointOrder::Lex => "lex".into(),
        PointOrder::B2 => "b2".into(),
        PointOrder::B2Native { .. } => "b2".into(),
        PointOrder::Product { left, right, .. } => format!(
            "boxtimes({}/{}, {}/{})",
            left.weight,
            describe_tiebreak(&left.tiebreak),
            right.weight,
            describe_tiebreak(&right.tiebreak)
        ),
    }
}

/// Sum of squares refined by `B`, then `z`, `x`, `A` on `(x, z, A, B)` points.
pub fn total_order_b2() -> TotalOrder {
    TotalOrder::new(TermWeight::SigmaSquared, PointOrder::B2)
}

/// Concatenation order on a fiber product whose left factor has `d1`
/// coordinates: weight `w1 (+) w2`, ties broken by the product point order.
pub fn boxtimes(left: TotalOrder, d1: usize, right: TotalOrder, d2: usize) -> TotalOrder {
    let weight = TermWeight::direct_sum(left.weight.clone(), d1, right.weight.clone(), d2);
    TotalOrder::new(
        weight,
        PointOrder::Product {
            split: d1,
            left: Box::new(left),
            right: Box::new(right),
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn squares() {
        assert_eq!(sigma_squared(&[1, 1, 1]), 3);
        assert_eq!(sigma_squared(&[0, 1, 2]), 5);
        assert_eq!(sigma_squared(&[0, 0, 3]), 9);
        assert_eq!(sigma_squared(&[]), 0);
        assert_eq!(sigma_squared(&[0, 0]), 0);
    }

    #[test]
    fn pairs() {
        assert_eq!(balance_pair(0, 3), (1, 2));
        assert_eq!(balance_pair(2, 2), (2, 2));
        assert_eq!(balance_pair(5, 0), (2, 3));
        assert_eq!(balance_pair(-3, 0), (-2, -1));
    }

    #[test]
    fn tuples() {
        assert_eq!(
            balance_tuple(&[vec![0, 0], vec![2, 2]]),
            vec![vec![1, 1], vec![1, 1]]
        );
        assert_eq!(
            balance_tuple(&[vec![0, 3], vec![1, 1], vec![2, 2]]),
            vec![vec![1, 2], vec![1, 2], vec![1, 2]]
        );
        assert_eq!(balance_tuple(&[vec![4, 0, 7]]), vec![vec![4, 0, 7]]);
    }

    #[test]
    fn b2_cascade() {
        let o = total_order_b2();
        let m = |p: [i64; 4]| Monomial::new(vec![p.to_vec()]);
        assert_eq!(o.cmp_monomials(&m([0, 0, 0, 0]), &m([1, 1, 0, 1])), Ordering::Less);
        // equal sums of squares: B decides
        assert_eq!(o.cmp_monomials(&m([1, 0, 0, 0]), &m([0, 0, 0, 1])), Ordering::Less);
        assert_eq!(o.cmp_monomials(&m([0, 0, 0, 1]), &m([0, 1, 0, 0])), Ordering::Greater);
        // then z, x, A
        assert_eq!(o.cmp_monomials(&m([0, 1, 0, 0]), &m([1, 0, 0, 0])), Ordering::Greater);
        assert_eq!(o.cmp_monomials(&m([1, 0, 0, 0]), &m([0, 0, 1, 0])), Ordering::Greater);
        assert_eq!(o.cmp_monomials(&m([0, 0, -1, 0]), &m([0, 0, 1, 0])), Ordering::Less);
    }

    #[test]
    fn boxtimes_falls_back_to_second_factor() {
        let lex = TotalOrder::new(TermWeight::SigmaSquared, PointOrder::Lex);
        let o = boxtimes(lex.clone(), 1, lex, 1);
        // same first components, second components decide
        let a = Monomial::new(vec![vec![1, 0], vec![1, 2]]);
        let b = Monomial::new(vec![vec![1, 1], vec![1, 1]]);
        assert_eq!(o.cmp_monomials(&b, &a), Ordering::Less);
        let c = Monomial::new(vec![vec![1, 2], vec![1, 0]]);
        assert_eq!(o.cmp_monomials(&a, &c), Ordering::Equal);
    }

    #[test]
    fn weights() {
        let w = TermWeight::direct_sum(TermWeight::SigmaSquared, 2, TermWeight::WeightedSquares(vec![3]), 1);
        assert_eq!(w.eval(&[1, 2, 2]), Rational::from_integer(17));
        let t = TermWeight::Table(vec![(vec![1], Rational::new(1, 2))]);
        assert_eq!(t.eval(&[1]), Rational::new(1, 2));
        assert_eq!(t.eval(&[0]), Rational::zero());
        let m = Monomial::new(vec![vec![1], vec![1], vec![0]]);
        assert_eq!(t.monomial(&m), Rational::from_integer(1));
        assert_eq!(m.image(1), vec![2]);
        assert_eq!(m.to_string(), "[0][1][1]");
    }

    fn tuple_strategy() -> impl Strategy<Value = Vec<Vec<i64>>> {
        (1usize..=4).prop_flat_map(|dim| {
            prop::collection::vec(prop::collection::vec(0i64..=20, dim), 1..=6)
        })
    }

    fn total(t: &[Vec<i64>]) -> Vec<i64> {
        let mut s = vec![0; t[0].len()];
        for v in t {
            for (a, b) in s.iter_mut().zip(v) {
                *a += b;
            }
        }
        s
    }

    proptest! {
        #[test]
        fn balancing_preserves_sum_and_lowers_squares(t in tuple_strategy()) {
            let b = balance_tuple(&t);
            prop_assert_eq!(total(&b), total(&t));
            let before: i64 = t.iter().map(|v| sigma_squared(v)).sum();
            let after: i64 = b.iter().map(|v| sigma_squared(v)).sum();
            prop_assert!(after <= before);
            prop_assert!(is_balanced_tuple(&b));
            prop_assert_eq!(after == before, is_balanced_tuple(&t));
            // fixpoint
            prop_assert_eq!(balance_tuple(&b), b.clone());
        }

        #[test]
        fn balanced_pair_minimizes_squares(x in -20i64..=20, y in -20i64..=20) {
            let (a, b) = balance_pair(x, y);
            prop_assert_eq!(a + b, x + y);
            prop_assert!(b - a <= 1 && b >= a);
            prop_assert!(a * a + b * b <= x * x + y * y);
        }

        #[test]
        fn total_orders_are_multiplicative(
            a in prop::collection::vec(prop::collection::vec(0i64..=3, 2), 2),
            b in prop::collection::vec(prop::collection::vec(0i64..=3, 2), 2),
            c in prop::collection::vec(prop::collection::vec(0i64..=3, 2), 1..=2),
        ) {
            let lex = TotalOrder::new(TermWeight::SigmaSquared, PointOrder::Lex);
            let orders = [lex.clone(), boxtimes(lex.clone(), 1, lex, 1)];
            let (ma, mb, mc) = (Monomial::new(a), Monomial::new(b), Monomial::new(c));
            for o in orders {
                let before = o.cmp_monomials(&ma, &mb);
                let after = o.cmp_monomials(&ma.times(&mc), &mb.times(&mc));
                prop_assert_eq!(before, after);
                prop_assert_eq!(o.cmp_monomials(&mb, &ma), before.reverse());
            }
        }
    }
}
