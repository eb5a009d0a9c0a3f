use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{hilbert, is_normal, quadratic_squarefree_gb, relation_degree, two_dim_balanced_order, ToricError};
use crate::graphs::{enumerate_graphs, odd_leaf_count_is_even, GraphClass, GraphDescription, MarkedGraph};
use crate::polytopes::{
    b2_change_of_coords, building_block, fiber_product, from_graph, rational, zero, assemble,
    AssembledPolytope, BuildingBlockKind, GradedPolytope, LatticeChoice, LatticeMap, Rational,
};
use crate::termorders::{boxtimes, sigma_squared, PointOrder, TermWeight, TotalOrder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TheoremName {
    Polypres,
    Polyquad,
    Invariance,
    D2bp,
}

impl FromStr for TheoremName {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "polypres" => Ok(TheoremName::Polypres),
            "polyquad" => Ok(TheoremName::Polyquad),
            "invariance" => Ok(TheoremName::Invariance),
            "d2bp" => Ok(TheoremName::D2bp),
            other => Err(format!("unknown theorem '{other}' (polypres|polyquad|invariance|d2bp)")),
        }
    }
}

impl fmt::Display for TheoremName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TheoremName::Polypres => "polypres",
            TheoremName::Polyquad => "polyquad",
            TheoremName::Invariance => "invariance",
            TheoremName::D2bp => "d2bp",
        })
    }
}

/// Two-dimensional balanced factors for `d2bp`, each with a left and a right
/// glue coordinate projecting onto `[0, L]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum D2Factor {
    /// `B(L)` glued along its halved stub on both sides.
    LoopB,
    /// `{0 <= b <= a <= L}`: left glue `b`, right glue `a`.
    Triangle,
    /// `[0, L]^2`.
    Square,
}

impl D2Factor {
    fn glue(self) -> (usize, usize) {
        match self {
            D2Factor::LoopB => (1, 1),
            D2Factor::Triangle => (1, 0),
            D2Factor::Square => (0, 1),
        }
    }
}

pub fn d2bp_factor(f: D2Factor, l: u64) -> Result<GradedPolytope, ToricError> {
    let li = l as i64;
    let boxed = || GradedPolytope::new(2).with_bound(0, zero(), rational(li)).with_bound(1, zero(), rational(li));
    Ok(match f {
        D2Factor::LoopB => building_block(BuildingBlockKind::LoopB { level: l })?,
        D2Factor::Triangle => {
            let mut p = boxed();
            p.add_inequality(vec![0, -1], 0);
            p.add_inequality(vec![-1, 1], 0);
            p.add_inequality(vec![1, 0], li);
            p
        }
        D2Factor::Square => {
            let mut p = boxed();
            for (row, rhs) in [([1, 0], li), ([0, 1], li), ([-1, 0], 0), ([0, -1], 0)] {
                p.add_inequality(row.to_vec(), rhs);
            }
            p
        }
    })
}

/// What to verify. `level` is the graph level for the graph theorems (so
/// `2L`), and the factor side `L` for `d2bp`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "camelCase")]
pub struct Instance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphDescription>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub r: Vec<u64>,
    pub level: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub genus: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leaves: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub factors: Vec<D2Factor>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Bounds {
    pub degree_bound: usize,
    pub move_degree_max: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            degree_bound: 4,
            move_degree_max: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremCertificate {
    pub theorem: TheoremName,
    pub instance: Instance,
    pub bounds: Bounds,
    pub result: bool,
    pub witnesses: Vec<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Value>,
}

fn violated(msg: impl Into<String>) -> ToricError {
    ToricError::HypothesisViolated(msg.into())
}

fn graph_of(inst: &Instance) -> Result<MarkedGraph, ToricError> {
    let desc = inst.graph.as_ref().ok_or_else(|| violated("a graph is required"))?;
    Ok(MarkedGraph::validate(desc)?)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

/// Sum of squares with lexicographic ties, except for the doubled-edge
/// block, which is compared in its changed coordinates. `halved` marks the
/// glue coordinates of the block.
pub fn block_order(kind: Option<BuildingBlockKind>, p: &GradedPolytope, halved: &[bool]) -> Result<TotalOrder, ToricError> {
    if let Some(BuildingBlockKind::LoopB2 { .. }) = kind {
        let stubs: Vec<usize> = (0..halved.len()).filter(|&i| halved[i]).collect();
        let free: Vec<usize> = (0..halved.len()).filter(|&i| !halved[i]).collect();
        let coords = [stubs[0], free[0], free[1], stubs[1]];
        let table = p
            .lattice_points(1)?
            .into_iter()
            .map(|x| {
                let native: Vec<i64> = coords.iter().map(|&c| x[c]).collect();
                let changed = b2_change_of_coords(&native)?;
                Ok((x, Rational::from_integer(sigma_squared(&changed))))
            })
            .collect::<Result<Vec<_>, ToricError>>()?;
        return Ok(TotalOrder::new(TermWeight::Table(table), PointOrder::B2Native { coords }));
    }
    Ok(TotalOrder::new(TermWeight::SigmaSquared, PointOrder::Lex))
}

/// The concatenation order folded along the assembly steps.
pub fn assembled_boxtimes_order(asm: &AssembledPolytope) -> Result<TotalOrder, ToricError> {
    let mut order: Option<(TotalOrder, usize)> = None;
    for b in &asm.blocks {
        let halved: Vec<bool> = asm.origins[b.offset..b.offset + b.polytope.dim].iter().map(|o| o.halved).collect();
        let bo = block_order(b.kind, &b.polytope, &halved)?;
        order = Some(match order {
            None => (bo, b.polytope.dim),
            Some((o, d)) => (boxtimes(o, d, bo, b.polytope.dim), d + b.polytope.dim),
        });
    }
    Ok(order.expect("at least one block").0)
}

/// Runs the checks for one theorem on one instance. Every claim in the
/// certificate holds up to `bounds.degree_bound` only.
pub fn verify_theorem(name: TheoremName, inst: &Instance, bounds: &Bounds) -> Result<TheoremCertificate, ToricError> {
    if bounds.degree_bound < 2 {
        return Err(violated("degree bound must be at least 2"));
    }
    let (result, witnesses) = match name {
        TheoremName::Polypres => polypres(inst, bounds)?,
        TheoremName::Polyquad => polyquad(inst, bounds)?,
        TheoremName::Invariance => invariance(inst, bounds)?,
        TheoremName::D2bp => d2bp(inst, bounds)?,
    };
    Ok(TheoremCertificate {
        theorem: name,
        instance: inst.clone(),
        bounds: *bounds,
        result,
        witnesses,
        timings: None,
    })
}

fn polypres(inst: &Instance, bounds: &Bounds) -> Result<(bool, Vec<Value>), ToricError> {
    if inst.level / 2 <= 1 {
        return Err(violated(format!("L > 1 required (level 2L = {})", inst.level)));
    }
    if inst.level % 2 == 1 {
        return Err(violated(format!("even level 2L required, got {}", inst.level)));
    }
    let g = graph_of(inst)?;
    if !g.is_tree_like() {
        return Err(violated("graph is not tree-like"));
    }
    if !g.is_compatible(&inst.r)? {
        return Err(violated("r is not compatible with the graph"));
    }
    let p = from_graph(&g, &inst.r, inst.level, LatticeChoice::Parity)?;
    let normal = is_normal(&p, bounds.degree_bound)?;
    let mut witnesses = vec![json!({ "check": "normality", "report": to_value(&normal) })];
    if !normal.normal {
        return Ok((false, witnesses));
    }
    let cert = relation_degree(&p, bounds.move_degree_max, bounds.degree_bound)?;
    let ok = cert.relation_degree.is_some_and(|d| d <= 3);
    witnesses.push(json!({
        "check": "relationDegree",
        "method": "fiber-graph connectivity",
        "report": to_value(&cert),
    }));
    Ok((ok, witnesses))
}

fn polyquad(inst: &Instance, bounds: &Bounds) -> Result<(bool, Vec<Value>), ToricError> {
    let g = graph_of(inst)?;
    if !matches!(g.classify(), GraphClass::CaterpillarTree | GraphClass::CaterpillarGraph) {
        return Err(violated("caterpillar graph required"));
    }
    if inst.r.iter().any(|x| x % 2 == 1) {
        return Err(violated("even r required"));
    }
    if inst.level % 2 == 1 {
        return Err(violated(format!("even level required, got {}", inst.level)));
    }
    if !g.is_compatible(&inst.r)? {
        return Err(violated("r is not compatible with the graph"));
    }
    let asm = assemble(&g, &inst.r, inst.level)?;
    let order = assembled_boxtimes_order(&asm)?;
    let gb = quadratic_squarefree_gb(&asm.polytope, &order.into(), bounds.degree_bound)?;
    let direct = hilbert(&from_graph(&g, &inst.r, inst.level, LatticeChoice::Parity)?, bounds.degree_bound)?;
    let assembled = hilbert(&asm.polytope, bounds.degree_bound)?;
    let same = direct == assembled;
    let witnesses = vec![
        json!({ "check": "assembly", "expression": asm.describe(), "hilbertMatchesGraph": same }),
        json!({ "check": "quadraticSquarefreeGB", "report": to_value(&gb) }),
    ];
    Ok((gb.passed && same, witnesses))
}

fn invariance(inst: &Instance, bounds: &Bounds) -> Result<(bool, Vec<Value>), ToricError> {
    let (genus, leaves) = match (inst.genus, inst.leaves) {
        (Some(g), Some(n)) => (g, n),
        _ => return Err(violated("genus and leaves are required")),
    };
    if inst.r.len() != leaves {
        return Err(violated(format!("r needs {leaves} entries")));
    }
    if !odd_leaf_count_is_even(&inst.r) {
        return Err(violated("r must have an even number of odd entries"));
    }
    let graphs = enumerate_graphs(genus, leaves, leaves + 2 * genus)?;
    if graphs.is_empty() {
        return Err(violated("no trivalent graphs with these parameters"));
    }
    let mut tables = Vec::new();
    let mut witnesses = Vec::new();
    for (i, g) in graphs.iter().enumerate() {
        let h = hilbert(&from_graph(g, &inst.r, inst.level, LatticeChoice::Parity)?, bounds.degree_bound)?;
        witnesses.push(json!({
            "graph": i,
            "class": to_value(&g.classify()),
            "description": to_value(&g.to_description()),
            "hilbert": h.counts,
        }));
        tables.push(h);
    }
    Ok((tables.windows(2).all(|w| w[0] == w[1]), witnesses))
}

fn d2bp(inst: &Instance, bounds: &Bounds) -> Result<(bool, Vec<Value>), ToricError> {
    if inst.factors.is_empty() {
        return Err(violated("at least one factor is required"));
    }
    if inst.level == 0 {
        return Err(violated("factor side L must be positive"));
    }
    let mut current: Option<(GradedPolytope, TotalOrder, usize)> = None;
    for (i, &f) in inst.factors.iter().enumerate() {
        let p = d2bp_factor(f, inst.level)?;
        let o = two_dim_balanced_order(&p, bounds.degree_bound).map_err(|e| match e {
            ToricError::NotBalanced { .. } => violated(format!("factor {i} is not balanced")),
            e => e,
        })?;
        let (left, right) = f.glue();
        current = Some(match current {
            None => (p, o, right),
            Some((acc, ao, glue)) => {
                let fp = fiber_product(
                    &acc,
                    &LatticeMap::coordinate(acc.dim, glue, 1),
                    &p,
                    &LatticeMap::coordinate(2, left, 1),
                )?;
                (fp.polytope, boxtimes(ao, acc.dim, o, 2), acc.dim + right)
            }
        });
    }
    let (p, order, _) = current.unwrap();
    let gb = quadratic_squarefree_gb(&p, &order.into(), bounds.degree_bound)?;
    let ok = gb.passed;
    Ok((ok, vec![json!({ "check": "quadraticSquarefreeGB", "dimension": p.dim, "report": to_value(&gb) })]))
}
