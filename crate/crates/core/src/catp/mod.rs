//! Weighted polytopes as objects, lattice maps that send standard monomials
//! to standard monomials as morphisms, and fiber products of both, checked
//! exhaustively up to a degree bound.

use std::collections::{BTreeSet, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::polytopes::{fiber_product, FiberProduct, GradedPolytope, LatticeMap, Point, PolytopeError};
use crate::termorders::{
    all_fibers, boxtimes, has_unique_standard_monomials, initial_complex_maximal_faces, is_flag,
    FiberTable, Monomial, OrderCache, PointOrder, TermOrder, TermOrderError, TermWeight, TotalOrder,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatError {
    #[error("lattice point {point:?} maps to {image:?}, outside the target")]
    NotAPolytopeMap { point: Point, image: Point },
    #[error("standard monomial {} maps to non-standard {}", .0.monomial, .0.image)]
    NotAMorphism(Counterexample),
    #[error("base has a fiber with several standard monomials in degree {0}")]
    NonUniqueBase(usize),
    #[error("boxtimes needs total orders on both factors")]
    NonTotalComponents,
    #[error("morphisms have different targets")]
    TargetMismatch,
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
    #[error(transparent)]
    TermOrder(#[from] TermOrderError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub monomial: Monomial,
    pub image: Monomial,
}

/// Outcome of one bounded check.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Certificate {
    pub construction: String,
    pub degree_bound: usize,
    pub property: String,
    pub result: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<serde_json::Value>,
}

impl Certificate {
    fn new(construction: &str, degree_bound: usize, property: &str, failure: Option<serde_json::Value>) -> Self {
        Certificate {
            construction: construction.to_string(),
            degree_bound,
            property: property.to_string(),
            result: failure.is_none(),
            counterexample: failure,
        }
    }
}

#[derive(Debug, Clone)]
pub struct WeightedPolytope {
    pub name: String,
    pub polytope: GradedPolytope,
    pub order: TermOrder,
    /// Degree bound to which the order was checked to be flag.
    pub flag_degree: Option<usize>,
}

impl WeightedPolytope {
    pub fn new(name: impl Into<String>, polytope: GradedPolytope, order: impl Into<TermOrder>) -> Self {
        WeightedPolytope {
            name: name.into(),
            polytope,
            order: order.into(),
            flag_degree: None,
        }
    }

    /// Attaches a flag certificate after checking it to `degree`.
    pub fn certify_flag(mut self, degree: usize) -> Result<Self, CatError> {
        if let Some(f) = is_flag(&self.polytope, &self.order, degree)? {
            return Err(TermOrderError::NotFlag(f).into());
        }
        self.flag_degree = Some(degree);
        Ok(self)
    }

    fn same_object(&self, other: &WeightedPolytope) -> bool {
        self.polytope == other.polytope && self.order == other.order
    }
}

/// `([0, l], sum of squares)`.
pub fn interval_object(l: u64) -> WeightedPolytope {
    let l = l as i64;
    let mut p = GradedPolytope::new(1).with_bound(0, crate::polytopes::rational(0), crate::polytopes::rational(l));
    p.add_inequality(vec![-1], 0);
    p.add_inequality(vec![1], l);
    WeightedPolytope::new(format!("[0,{l}]"), p, TermWeight::SigmaSquared)
}

/// Standard monomials of a weighted polytope in every degree up to a bound.
pub struct StandardSets {
    pub points: Vec<Point>,
    pub tables: Vec<FiberTable>,
    standard: Vec<HashSet<Vec<usize>>>,
}

impl StandardSets {
    pub fn new(points: Vec<Point>, dim: usize, order: &TermOrder, max_degree: usize) -> Self {
        let cache = OrderCache::new(order, &points);
        let mut tables = Vec::new();
        let mut standard = Vec::new();
        for n in 0..=max_degree {
            let t = all_fibers(&points, dim, n);
            standard.push(t.minima(&cache).into_values().flatten().collect());
            tables.push(t);
        }
        StandardSets {
            points,
            tables,
            standard,
        }
    }

    pub fn of(wp: &WeightedPolytope, max_degree: usize) -> Result<Self, PolytopeError> {
        Ok(Self::new(wp.polytope.lattice_points(1)?, wp.polytope.dim, &wp.order, max_degree))
    }

    pub fn index(&self, p: &[i64]) -> Option<usize> {
        self.points.binary_search_by(|q| q.as_slice().cmp(p)).ok()
    }

    /// `None` when some point is not a lattice point.
    pub fn is_standard(&self, pts: &[Point]) -> Option<bool> {
        let mut idx: Vec<usize> = pts.iter().map(|p| self.index(p)).collect::<Option<_>>()?;
        idx.sort_unstable();
        Some(self.standard[pts.len()].contains(&idx))
    }

    pub fn standard_monomials(&self, degree: usize) -> BTreeSet<Monomial> {
        self.standard[degree].iter().map(|m| self.tables[degree].monomial(m)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct Morphism {
    pub map: LatticeMap,
    pub source: WeightedPolytope,
    pub target: WeightedPolytope,
    pub verified_degree: usize,
}

/// Checks that `map` sends lattice points into the target and standard
/// monomials of every degree up to `max_degree` to standard monomials.
pub fn check_morphism(
    map: LatticeMap,
    source: WeightedPolytope,
    target: WeightedPolytope,
    max_degree: usize,
) -> Result<Morphism, CatError> {
    let src = StandardSets::of(&source, max_degree)?;
    let tgt = StandardSets::of(&target, max_degree)?;
    for p in &src.points {
        let image = map.apply(p)?;
        if tgt.index(&image).is_none() {
            return Err(CatError::NotAPolytopeMap { point: p.clone(), image });
        }
    }
    for n in 1..=max_degree {
        for m in &src.standard[n] {
            let image: Vec<Point> = m.iter().map(|&i| map.apply(&src.points[i]).unwrap()).collect();
            if tgt.is_standard(&image) != Some(true) {
                return Err(CatError::NotAMorphism(Counterexample {
                    monomial: src.tables[n].monomial(m),
                    image: Monomial::new(image),
                }));
            }
        }
    }
    Ok(Morphism {
        map,
        source,
        target,
        verified_degree: max_degree,
    })
}

/// A fiber product of two morphisms with a common target.
#[derive(Debug, Clone)]
pub struct FiberProductObject {
    pub object: WeightedPolytope,
    pub product: FiberProduct,
    pub left: Morphism,
    pub right: Morphism,
    /// Standard monomials of the product are exactly the pairs of standard
    /// monomials, checked to the bound.
    pub lemma: Certificate,
}

impl FiberProductObject {
    pub fn left_dim(&self) -> usize {
        self.product.left_dim
    }

    pub fn right_dim(&self) -> usize {
        self.product.right_dim
    }
}

fn check_targets(m1: &Morphism, m2: &Morphism, max_degree: usize) -> Result<(), CatError> {
    if !m1.target.same_object(&m2.target) {
        return Err(CatError::TargetMismatch);
    }
    for n in 2..=max_degree {
        if !has_unique_standard_monomials(&m1.target.polytope, &m1.target.order, n)? {
            return Err(CatError::NonUniqueBase(n));
        }
    }
    Ok(())
}

fn build_product(
    m1: &Morphism,
    m2: &Morphism,
    order: TermOrder,
    max_degree: usize,
) -> Result<FiberProductObject, CatError> {
    let product = fiber_product(&m1.source.polytope, &m1.map, &m2.source.polytope, &m2.map)?;
    let name = format!("{} x_{} {}", m1.source.name, m1.target.name, m2.source.name);
    let object = WeightedPolytope::new(name.clone(), product.polytope.clone(), order);
    let lemma = standard_pairs_lemma(&object, &product, m1, m2, max_degree)?;
    Ok(FiberProductObject {
        object,
        product,
        left: m1.clone(),
        right: m2.clone(),
        lemma,
    })
}

/// Fiber product carrying the weight `w1 (+) w2`.
pub fn fiber_product_object(m1: &Morphism, m2: &Morphism, max_degree: usize) -> Result<FiberProductObject, CatError> {
    check_targets(m1, m2, max_degree)?;
    let order = TermOrder::Weight(TermWeight::direct_sum(
        m1.source.order.weight().clone(),
        m1.source.polytope.dim,
        m2.source.order.weight().clone(),
        m2.source.polytope.dim,
    ));
    build_product(m1, m2, order, max_degree)
}

/// Fiber product carrying the concatenation order built from total orders on
/// both factors.
pub fn boxtimes_object(m1: &Morphism, m2: &Morphism, max_degree: usize) -> Result<FiberProductObject, CatError> {
    let (TermOrder::Total(o1), TermOrder::Total(o2)) = (&m1.source.order, &m2.source.order) else {
        return Err(CatError::NonTotalComponents);
    };
    check_targets(m1, m2, max_degree)?;
    let order = boxtimes(o1.clone(), m1.source.polytope.dim, o2.clone(), m2.source.polytope.dim);
    let fp = build_product(m1, m2, order.into(), max_degree)?;
    assert!(
        has_unique_standard_monomials(&fp.object.polytope, &fp.object.order, max_degree)?,
        "a total order has unique minima"
    );
    Ok(fp)
}

fn standard_pairs_lemma(
    object: &WeightedPolytope,
    product: &FiberProduct,
    m1: &Morphism,
    m2: &Morphism,
    max_degree: usize,
) -> Result<Certificate, CatError> {
    let prod = StandardSets::of(object, max_degree)?;
    let left = StandardSets::of(&m1.source, max_degree)?;
    let right = StandardSets::of(&m2.source, max_degree)?;
    let mut failure = None;
    'deg: for n in 1..=max_degree {
        for ms in prod.tables[n].fibers.values() {
            for m in ms {
                let pts: Vec<&Point> = m.iter().map(|&i| &prod.points[i]).collect();
                let l: Vec<Point> = pts.iter().map(|p| product.left(p).to_vec()).collect();
                let r: Vec<Point> = pts.iter().map(|p| product.right(p).to_vec()).collect();
                let both = left.is_standard(&l) == Some(true) && right.is_standard(&r) == Some(true);
                let std = prod.standard[n].contains(m);
                if std != both {
                    failure = Some(serde_json::json!({
                        "monomial": prod.tables[n].monomial(m),
                        "standard": std,
                        "factorsStandard": both,
                    }));
                    break 'deg;
                }
            }
        }
    }
    Ok(Certificate::new(
        &object.name,
        max_degree,
        "standard iff both projections standard",
        failure,
    ))
}

/// Every maximal face of the product's initial complex is the fiber product
/// of maximal faces of the factors, with image inside a maximal base face.
pub fn verify_flag_product_faces(fp: &FiberProductObject, max_degree: usize) -> Result<Certificate, CatError> {
    let property = "maximal faces are fiber products of maximal faces";
    let faces = |wp: &WeightedPolytope| initial_complex_maximal_faces(&wp.polytope, &wp.order, max_degree);
    let product_faces = match faces(&fp.object) {
        Ok(f) => f,
        Err(TermOrderError::NotFlag(f)) => {
            return Ok(Certificate::new(
                &fp.object.name,
                max_degree,
                property,
                Some(serde_json::json!({ "notFlag": f })),
            ))
        }
        Err(e) => return Err(e.into()),
    };
    let left_faces = faces(&fp.left.source)?;
    let right_faces = faces(&fp.right.source)?;
    let base_faces = faces(&fp.left.target)?;
    let (f1, f2) = (&fp.left.map, &fp.right.map);
    let matched = |a: &[Point], b: &[Point]| -> BTreeSet<Point> {
        let mut out = BTreeSet::new();
        for x in a {
            for y in b {
                if f1.apply(x).unwrap() == f2.apply(y).unwrap() {
                    out.insert(x.iter().chain(y).copied().collect());
                }
            }
        }
        out
    };
    let subset = |small: &BTreeSet<Point>, big: &[Point]| small.iter().all(|p| big.contains(p));
    for s in &product_faces {
        let set: BTreeSet<Point> = s.iter().cloned().collect();
        let p1: BTreeSet<Point> = s.iter().map(|p| fp.product.left(p).to_vec()).collect();
        let p2: BTreeSet<Point> = s.iter().map(|p| fp.product.right(p).to_vec()).collect();
        let base: BTreeSet<Point> = p1.iter().map(|x| f1.apply(x).unwrap()).collect();
        let in_base = base_faces.iter().any(|f| subset(&base, f));
        let found = left_faces.iter().filter(|a| subset(&p1, a)).any(|a| {
            right_faces
                .iter()
                .filter(|b| subset(&p2, b))
                .any(|b| matched(a, b) == set)
        });
        if !(found && in_base) {
            return Ok(Certificate::new(
                &fp.object.name,
                max_degree,
                property,
                Some(serde_json::json!({ "face": s, "inBaseFace": in_base })),
            ));
        }
    }
    Ok(Certificate::new(&fp.object.name, max_degree, property, None))
}

/// For sum-of-squares factors glued along coordinate projections: standard
/// monomials of `w1 (+) w2` (which counts glued coordinates twice) agree with
/// those of the plain sum of squares on the product (which counts them once).
pub fn verify_double_weight_equivalence(fp: &FiberProductObject, max_degree: usize) -> Result<Certificate, CatError> {
    let property = "double-weighted and plain sum of squares have the same standard monomials";
    let (d1, d2) = (fp.left_dim(), fp.right_dim());
    let glued = |m: &LatticeMap| -> Option<Vec<usize>> {
        if m.denom != 1 {
            return None;
        }
        m.matrix
            .iter()
            .map(|row| {
                let nz: Vec<usize> = (0..row.len()).filter(|&i| row[i] != 0).collect();
                (nz.len() == 1 && row[nz[0]] == 1).then(|| nz[0])
            })
            .collect()
    };
    let Some(dup) = glued(&fp.right.map) else {
        return Ok(Certificate::new(
            &fp.object.name,
            max_degree,
            property,
            Some(serde_json::json!("maps are not coordinate projections")),
        ));
    };
    let doubled = TermWeight::direct_sum(TermWeight::SigmaSquared, d1, TermWeight::SigmaSquared, d2);
    let mut coeffs = vec![1; d1 + d2];
    for c in dup {
        coeffs[d1 + c] = 0;
    }
    let plain = TermWeight::WeightedSquares(coeffs);
    let points = fp.object.polytope.lattice_points(1)?;
    let dim = fp.object.polytope.dim;
    let a = StandardSets::new(points.clone(), dim, &doubled.into(), max_degree);
    let b = StandardSets::new(points, dim, &plain.into(), max_degree);
    let failure = (1..=max_degree).find_map(|n| {
        let (sa, sb) = (a.standard_monomials(n), b.standard_monomials(n));
        (sa != sb).then(|| {
            let diff: Vec<&Monomial> = sa.symmetric_difference(&sb).take(4).collect();
            serde_json::json!({ "degree": n, "differing": diff })
        })
    });
    Ok(Certificate::new(&fp.object.name, max_degree, property, failure))
}

/// A lexicographic total order refining the sum of squares.
pub fn sigma_squared_lex() -> TotalOrder {
    TotalOrder::new(TermWeight::SigmaSquared, PointOrder::Lex)
}
