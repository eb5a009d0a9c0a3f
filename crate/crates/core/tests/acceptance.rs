//! Acceptance battery. Runs without the test harness so that every criterion
//! prints its own PASS/FAIL line; the process exits non-zero if any fails.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use spinpoly::catp::{
    check_morphism, fiber_product_object, interval_object, verify_double_weight_equivalence,
    verify_flag_product_faces, Morphism, WeightedPolytope,
};
use spinpoly::graphs::{enumerate_graphs, odd_leaf_count_is_even, samples, MarkedGraph};
use spinpoly::polytopes::{
    b2_change_of_coords, b2_changed_polytope, b2_from_changed, building_block, from_graph, quadrant,
    trinode_polytope, BuildingBlockKind, LatticeChoice, LatticeMap, Point,
};
use spinpoly::termorders::{
    balance_tuple, fiber_set_of_points, is_balanced, is_balanced_tuple, is_flag, sigma_squared,
    standard_monomials, Monomial, TermWeight,
};
use spinpoly::toric::{
    hilbert, is_normal, p3_unit_region, quadratic_squarefree_gb, relation_degree, trinode_lattice_to_edges,
    verify_theorem, Bounds, Instance, TheoremName,
};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn all_r(n: usize, max: u64) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v| (0..=max).map(move |x| [v.clone(), vec![x]].concat()))
            .collect();
    }
    out.retain(|r| odd_leaf_count_is_even(r));
    out
}

/// Levels 1..=4 cover `L <= 2` whether `L` names the level or its half.
fn graph_independence() -> Outcome {
    let mut comparisons = 0usize;
    for (genus, n) in [(0, 4), (0, 5), (1, 1), (1, 2)] {
        let graphs = enumerate_graphs(genus, n, n + 2 * genus).map_err(|e| e.to_string())?;
        ensure(!graphs.is_empty(), || format!("no graphs for ({genus},{n})"))?;
        for r in all_r(n, 3) {
            for level in 1..=4 {
                let tables: Vec<Vec<usize>> = graphs
                    .iter()
                    .map(|g| {
                        let p = from_graph(g, &r, level, LatticeChoice::Parity).unwrap();
                        hilbert(&p, 3).unwrap().counts
                    })
                    .collect();
                for (i, t) in tables.iter().enumerate().skip(1) {
                    ensure(t == &tables[0], || {
                        format!("(g,n)=({genus},{n}) r={r:?} level={level}: graph 0 {:?} vs graph {i} {t:?}", tables[0])
                    })?;
                    comparisons += 1;
                }
            }
        }
    }
    Ok(format!("{comparisons} graph pairs agree for N <= 3"))
}

fn instance(g: &MarkedGraph, r: &[u64], level: u64) -> Instance {
    Instance {
        graph: Some(g.to_description()),
        r: r.to_vec(),
        level,
        ..Default::default()
    }
}

fn polypres_instances() -> Outcome {
    let cases: Vec<(&str, MarkedGraph, Vec<u64>)> = vec![
        ("loop with two leaves", samples::tree_like_g1_n2(), vec![2, 2]),
        ("loop with one leaf", samples::loop_with_leaf(), vec![2]),
        ("single trinode", samples::trinode(), vec![1, 1, 2]),
        ("four-leaf tree", samples::four_leaf_tree(), vec![1, 1, 2, 2]),
        ("four-leaf tree, even", samples::four_leaf_tree(), vec![2, 2, 2, 2]),
        ("caterpillar with loop", samples::caterpillar_with_loop(2), vec![1, 1]),
        ("five-leaf caterpillar", samples::caterpillar_tree(5), vec![1, 1, 2, 1, 1]),
        ("three-leaf caterpillar with loop", samples::caterpillar_with_loop(3), vec![1, 1, 2]),
    ];
    let bounds = Bounds { degree_bound: 4, move_degree_max: 3 };
    let mut lines = Vec::new();
    for (name, g, r) in &cases {
        let c = verify_theorem(TheoremName::Polypres, &instance(g, r, 4), &bounds).map_err(|e| format!("{name}: {e}"))?;
        ensure(c.result, || format!("{name}: {}", serde_json::to_string(&c.witnesses).unwrap()))?;
        let d = c.witnesses[1]["report"]["relationDegree"].clone();
        lines.push(format!("{name} d={d}"));
    }
    Ok(format!("normal to 4, relation degree <= 3: {}", lines.join("; ")))
}

fn polyquad_instances() -> Outcome {
    let cases: Vec<(&str, MarkedGraph, Vec<u64>, u64)> = vec![
        ("caterpillar tree n=4", samples::caterpillar_tree(4), vec![2, 2, 2, 2], 4),
        ("caterpillar with loop", samples::caterpillar_with_loop(2), vec![2, 2], 4),
        ("caterpillar with doubled edge", samples::caterpillar_with_doubled_edge(4, 0), vec![2, 2, 2, 2], 2),
        ("caterpillar with doubled edge", samples::caterpillar_with_doubled_edge(4, 0), vec![2, 2, 2, 2], 4),
        ("caterpillar tree n=5", samples::caterpillar_tree(5), vec![2, 0, 2, 2, 4], 4),
        ("doubled edge, five leaves", samples::caterpillar_with_doubled_edge(5, 1), vec![2, 2, 0, 2, 2], 4),
    ];
    let bounds = Bounds { degree_bound: 4, move_degree_max: 3 };
    let mut lines = Vec::new();
    for (name, g, r, level) in &cases {
        let c = verify_theorem(TheoremName::Polyquad, &instance(g, r, *level), &bounds).map_err(|e| format!("{name}: {e}"))?;
        ensure(c.result, || format!("{name}: {}", serde_json::to_string(&c.witnesses).unwrap()))?;
        let expr = c.witnesses[0]["expression"].as_str().unwrap_or_default().to_string();
        lines.push(format!("{name} level {level} {expr}"));
    }
    ensure(lines.iter().any(|l| l.contains("LoopB2")), || "no doubled-edge block assembled".into())?;
    Ok(format!("quadratic square-free basis to N=4: {}", lines.join("; ")))
}

fn cubic_necessity() -> Outcome {
    let p = p3_unit_region();
    let pts = p.lattice_points(1).map_err(|e| e.to_string())?;
    ensure(pts.len() == 5, || format!("{} points", pts.len()))?;
    let cert = relation_degree(&p, 3, 3).map_err(|e| e.to_string())?;
    ensure(cert.relation_degree == Some(3), || format!("relation degree {:?}", cert.relation_degree))?;
    let lhs = Monomial::new([[0, 1, 1], [1, 0, 1], [1, 1, 0]].iter().map(|h| trinode_lattice_to_edges(h)).collect());
    let rhs = Monomial::new([[0, 0, 0], [1, 1, 1], [1, 1, 1]].iter().map(|h| trinode_lattice_to_edges(h)).collect());
    let w = cert.witness.ok_or("no witness")?;
    let fiber: BTreeSet<Monomial> = fiber_set_of_points(&pts, &w.image, w.degree).into_iter().collect();
    ensure(fiber.contains(&lhs) && fiber.contains(&rhs), || format!("witness fiber {:?} misses the relation", w.image))?;
    let gb = quadratic_squarefree_gb(&p, &spinpoly::catp::sigma_squared_lex().into(), 3).map_err(|e| e.to_string())?;
    ensure(!gb.passed && gb.failure_degree == Some(3), || format!("{gb:?}"))?;
    Ok(format!(
        "relation degree 3, witness fiber at {:?} holds {lhs} = {rhs}; quadratic check fails at N=3",
        w.image
    ))
}

fn p3_one_anomaly() -> Outcome {
    let full = is_normal(&trinode_polytope(1, LatticeChoice::Full), 4).map_err(|e| e.to_string())?;
    ensure(full.witness == Some((2, vec![1, 1, 1])), || format!("full lattice: {full:?}"))?;
    let parity = is_normal(&trinode_polytope(1, LatticeChoice::Parity), 4).map_err(|e| e.to_string())?;
    ensure(parity.normal, || format!("parity lattice: {parity:?}"))?;
    Ok("full lattice: (1,1,1) in 2P is not a sum; parity lattice: normal to 4".into())
}

fn block_battery() -> Outcome {
    let mut kinds = Vec::new();
    for l in 1..=3u64 {
        kinds.push(BuildingBlockKind::P3 { level: l });
        kinds.push(BuildingBlockKind::LoopB { level: l });
        for r in (0..=2 * l).step_by(2) {
            kinds.push(BuildingBlockKind::P3Fixed1 { r, level: l });
            for s in (0..=2 * l).step_by(2) {
                kinds.push(BuildingBlockKind::P3Fixed2 { r, s, level: l });
            }
        }
    }
    for k in &kinds {
        let p = building_block(*k).map_err(|e| format!("{k}: {e}"))?;
        let f = is_balanced(&p, 3).map_err(|e| e.to_string())?;
        ensure(f.is_none(), || format!("{k} not balanced: {f:?}"))?;
    }
    let mut quadrants = 0;
    for l in 1..=3u64 {
        for q in 1..=4u8 {
            let p = quadrant(q, l).map_err(|e| e.to_string())?;
            let f = is_balanced(&p, 3).map_err(|e| e.to_string())?;
            ensure(f.is_none(), || format!("Q{q}({l}) not balanced: {f:?}"))?;
            quadrants += 1;
        }
        let native = building_block(BuildingBlockKind::LoopB2 { level: l }).map_err(|e| e.to_string())?;
        let mut images = BTreeSet::new();
        for x in native.lattice_points(1).map_err(|e| e.to_string())? {
            let c = b2_change_of_coords(&x).map_err(|e| e.to_string())?;
            ensure(b2_from_changed(&c).to_vec() == x, || format!("round trip fails at {x:?}"))?;
            images.insert(c.to_vec());
        }
        let changed: BTreeSet<Point> = b2_changed_polytope(l).lattice_points(1).map_err(|e| e.to_string())?.into_iter().collect();
        ensure(images == changed, || format!("change of coordinates is not onto at L={l}"))?;
    }
    // Q1(1): six generators, one quadratic relation, listed labels under (x, z, 1 - B, A)
    let q1 = quadrant(1, 1).map_err(|e| e.to_string())?;
    let pts = q1.lattice_points(1).map_err(|e| e.to_string())?;
    let labels: BTreeSet<String> = pts
        .iter()
        .map(|p| [p[0], p[1], 1 - p[3], p[2]].iter().map(|v| v.to_string()).collect())
        .collect();
    let listed: BTreeSet<String> = ["1100", "1000", "0100", "0000", "0010", "1101"].iter().map(|s| s.to_string()).collect();
    ensure(labels == listed, || format!("Q1(1) labels {labels:?}"))?;
    let h = hilbert(&q1, 2).map_err(|e| e.to_string())?;
    ensure(h.counts[2] == 6 * 7 / 2 - 1, || format!("degree 2 count {}", h.counts[2]))?;
    let rel = relation_degree(&q1, 3, 4).map_err(|e| e.to_string())?;
    ensure(rel.relation_degree == Some(2), || format!("Q1(1) relation degree {:?}", rel.relation_degree))?;
    Ok(format!(
        "{} blocks and {quadrants} quadrants balanced to 3; change of coordinates bijective for L <= 3; Q1(1) has 6 generators and 1 relation",
        kinds.len()
    ))
}

fn projection(kind: BuildingBlockKind, coord: usize) -> Result<Morphism, String> {
    let p = building_block(kind).map_err(|e| e.to_string())?;
    let dim = p.dim;
    let src = WeightedPolytope::new(kind.to_string(), p, TermWeight::SigmaSquared);
    check_morphism(LatticeMap::coordinate(dim, coord, 1), src, interval_object(kind.level()), 3).map_err(|e| format!("{kind}: {e}"))
}

fn category_closure() -> Outcome {
    use BuildingBlockKind::*;
    let pairs = [
        ((P3Fixed2 { r: 2, s: 2, level: 2 }, 2), (P3Fixed2 { r: 2, s: 2, level: 2 }, 2)),
        ((LoopB { level: 2 }, 1), (P3Fixed2 { r: 2, s: 2, level: 2 }, 2)),
        ((LoopB { level: 2 }, 1), (LoopB { level: 2 }, 1)),
        ((P3Fixed1 { r: 2, level: 2 }, 1), (LoopB { level: 2 }, 1)),
        ((P3 { level: 2 }, 0), (P3 { level: 2 }, 1)),
        ((P3Fixed2 { r: 0, s: 2, level: 1 }, 2), (P3Fixed1 { r: 2, level: 1 }, 2)),
    ];
    let d = 3;
    let mut summary = Vec::new();
    for ((k1, c1), (k2, c2)) in pairs {
        let name = format!("{k1} x {k2}");
        let (m1, m2) = (projection(k1, c1)?, projection(k2, c2)?);
        let fp = fiber_product_object(&m1, &m2, d).map_err(|e| format!("{name}: {e}"))?;
        ensure(fp.lemma.result, || format!("{name}: standard pairs {:?}", fp.lemma.counterexample))?;
        let (p1, p2, p) = (&m1.source.polytope, &m2.source.polytope, &fp.object.polytope);
        let flag = |q: &spinpoly::polytopes::GradedPolytope| is_flag(q, &TermWeight::SigmaSquared.into(), d).map(|f| f.is_none());
        if flag(p1).map_err(|e| e.to_string())? && flag(p2).map_err(|e| e.to_string())? {
            ensure(is_flag(p, &fp.object.order, d).map_err(|e| e.to_string())?.is_none(), || format!("{name}: flag not closed"))?;
        }
        let faces = verify_flag_product_faces(&fp, d).map_err(|e| e.to_string())?;
        ensure(faces.result, || format!("{name}: faces {:?}", faces.counterexample))?;
        if is_balanced(p1, d).map_err(|e| e.to_string())?.is_none() && is_balanced(p2, d).map_err(|e| e.to_string())?.is_none() {
            ensure(is_balanced(p, d).map_err(|e| e.to_string())?.is_none(), || format!("{name}: balanced not closed"))?;
        }
        let dw = verify_double_weight_equivalence(&fp, d).map_err(|e| e.to_string())?;
        ensure(dw.result, || format!("{name}: double weight {:?}", dw.counterexample))?;
        let rd = |q: &spinpoly::polytopes::GradedPolytope| -> Result<usize, String> {
            let n = is_normal(q, d).map_err(|e| e.to_string())?;
            ensure(n.normal, || format!("{name}: not normal {:?}", n.witness))?;
            relation_degree(q, 3, d).map_err(|e| e.to_string())?.relation_degree.ok_or(format!("{name}: no move bound"))
        };
        let (r1, r2, r) = (rd(p1)?, rd(p2)?, rd(p)?);
        ensure(r <= r1.max(r2).max(2), || format!("{name}: relation degree {r} > max({r1}, {r2}, 2)"))?;
        summary.push(format!("{name} (d={r})"));
    }
    Ok(format!("{} fiber products over [0,L] closed to D=3: {}", summary.len(), summary.join("; ")))
}

fn balancing() -> Outcome {
    let mut rng = StdRng::seed_from_u64(20261015);
    let mut max_steps = 0;
    for _ in 0..10_000 {
        let len = rng.gen_range(1..=6);
        let dim = rng.gen_range(1..=4);
        let t: Vec<Vec<i64>> = (0..len).map(|_| (0..dim).map(|_| rng.gen_range(0..=20)).collect()).collect();
        let sum = |t: &[Vec<i64>]| (0..dim).map(|k| t.iter().map(|v| v[k]).sum::<i64>()).collect::<Vec<_>>();
        let sq = |t: &[Vec<i64>]| t.iter().map(|v| sigma_squared(v)).sum::<i64>();
        // independent step counter: each unbalanced pair move lowers the sum of squares by at least 2
        let mut cur = t.clone();
        let mut steps = 0;
        loop {
            let mut moved = false;
            for i in 0..len {
                for j in i + 1..len {
                    for k in 0..dim {
                        let s = cur[i][k] + cur[j][k];
                        if (cur[i][k] - cur[j][k]).abs() >= 2 {
                            let before = sq(&cur);
                            cur[i][k] = s.div_euclid(2);
                            cur[j][k] = s - s.div_euclid(2);
                            ensure(sq(&cur) <= before - 2, || "square sum did not drop".into())?;
                            steps += 1;
                            moved = true;
                        }
                    }
                }
            }
            if !moved {
                break;
            }
        }
        ensure(steps as i64 <= sq(&t) / 2, || "step bound exceeded".into())?;
        max_steps = max_steps.max(steps);
        let out = balance_tuple(&t);
        ensure(sum(&out) == sum(&t), || format!("sum changed for {t:?}"))?;
        ensure(sq(&out) <= sq(&t), || format!("square sum grew for {t:?}"))?;
        ensure(is_balanced_tuple(&out), || format!("not co-located: {out:?}"))?;
        for k in 0..dim {
            let lo = out.iter().map(|v| v[k]).min().unwrap();
            ensure(out.iter().all(|v| v[k] - lo <= 1), || format!("slice {k} spread > 1 in {out:?}"))?;
        }
    }
    Ok(format!("10000 tuples: sums kept, squares non-increasing, fixpoints in a unit cube, at most {max_steps} moves"))
}

fn sigma_fixture() -> Outcome {
    let pts: Vec<Point> = (0..=3).map(|x| vec![x]).collect();
    let fiber: BTreeSet<Monomial> = fiber_set_of_points(&pts, &[3], 3).into_iter().collect();
    let want: BTreeSet<Monomial> = [[0, 0, 3], [0, 1, 2], [1, 1, 1]]
        .iter()
        .map(|m| Monomial::new(m.iter().map(|&x| vec![x]).collect()))
        .collect();
    ensure(fiber == want, || format!("fiber {fiber:?}"))?;
    let values: Vec<i64> = [[0, 0, 3], [0, 1, 2], [1, 1, 1]].iter().map(|m| sigma_squared(m)).collect();
    ensure(values == vec![9, 5, 3], || format!("{values:?}"))?;
    let interval = interval_object(3).polytope;
    let std = standard_monomials(&interval, &TermWeight::SigmaSquared.into(), 3).map_err(|e| e.to_string())?;
    let one = Monomial::new(vec![vec![1]; 3]);
    ensure(std.contains(&one), || "[1][1][1] not standard".into())?;
    ensure(!std.iter().any(|m| want.contains(m) && *m != one), || "another fiber member is standard".into())?;
    Ok("fiber {003, 012, 111}, squares 9, 5, 3, standard [1][1][1]".into())
}

fn main() {
    let criteria: [(u8, &str, fn() -> Outcome); 9] = [
        (1, "graph independence", graph_independence),
        (2, "polypres instances", polypres_instances),
        (3, "polyquad instances", polyquad_instances),
        (4, "cubic necessity", cubic_necessity),
        (5, "P3(1) lattice anomaly", p3_one_anomaly),
        (6, "building-block battery", block_battery),
        (7, "category closure", category_closure),
        (8, "balancing properties", balancing),
        (9, "sum-of-squares fixture", sigma_fixture),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (n, name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|a| a == &n.to_string() || (a.len() > 2 && name.contains(a.as_str()))) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {n} ({name}): PASS [{secs:.1}s] {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {n} ({name}): FAIL [{secs:.1}s] {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
