use std::collections::{BTreeMap, BTreeSet};

use super::{GraphError, MarkedGraph, VertexId};

pub const MAX_ENUM_GENUS: usize = 2;
pub const MAX_ENUM_LEAVES: usize = 6;

/// Leaves occupy vertices `0..n` in label order; internal vertices follow.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Canon {
    nv: usize,
    edges: Vec<(usize, usize)>,
}

/// All connected trivalent graphs with `n_leaves` labeled leaves and first
/// Betti number `genus`, one per isomorphism class fixing leaf labels.
/// `max_vertices` bounds the number of internal vertices.
pub fn enumerate_graphs(
    genus: usize,
    n_leaves: usize,
    max_vertices: usize,
) -> Result<Vec<MarkedGraph>, GraphError> {
    if genus > MAX_ENUM_GENUS || n_leaves > MAX_ENUM_LEAVES {
        return Err(GraphError::BoundsTooLarge(format!(
            "genus {genus} > {MAX_ENUM_GENUS} or leaves {n_leaves} > {MAX_ENUM_LEAVES}"
        )));
    }
    let internal = (n_leaves + 2 * genus).saturating_sub(2);
    if internal > max_vertices {
        return Err(GraphError::BoundsTooLarge(format!(
            "{internal} internal vertices needed, bound is {max_vertices}"
        )));
    }

    // seeds with the fewest leaves for each genus
    let (start, seeds): (usize, Vec<Canon>) = match genus {
        0 => (
            2,
            vec![Canon {
                nv: 2,
                edges: vec![(0, 1)],
            }],
        ),
        1 => (
            1,
            vec![Canon {
                nv: 2,
                edges: vec![(0, 1), (1, 1)],
            }],
        ),
        _ => (
            0,
            vec![
                Canon {
                    nv: 2,
                    edges: vec![(0, 1), (0, 1), (0, 1)],
                },
                Canon {
                    nv: 2,
                    edges: vec![(0, 0), (0, 1), (1, 1)],
                },
            ],
        ),
    };
    if n_leaves < start {
        return Ok(Vec::new());
    }
    let mut level: BTreeSet<Canon> = seeds.into_iter().map(|c| canonical(&c, start)).collect();
    for n in start..n_leaves {
        let mut next = BTreeSet::new();
        for g in &level {
            for e in 0..g.edges.len() {
                next.insert(canonical(&attach_leaf(g, n, e), n + 1));
            }
        }
        level = next;
    }
    Ok(level
        .into_iter()
        .map(|c| {
            MarkedGraph::from_parts(
                (0..c.nv as i64).map(VertexId::Int).collect(),
                c.edges,
                (0..n_leaves).collect(),
            )
            .expect("enumerated graphs are valid")
        })
        .collect())
}

/// Subdivides edge `e` and hangs a new leaf (label `n + 1`) off the new vertex.
/// The result keeps leaves at `0..=n`.
fn attach_leaf(g: &Canon, n: usize, e: usize) -> Canon {
    // shift internal vertices up by one to make room for the new leaf at n
    let shift = |v: usize| if v >= n { v + 1 } else { v };
    let leaf = n;
    let mid = g.nv + 1;
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(g.edges.len() + 2);
    for (k, &(u, v)) in g.edges.iter().enumerate() {
        if k == e {
            edges.push((shift(u), mid));
            edges.push((mid, shift(v)));
        } else {
            edges.push((shift(u), shift(v)));
        }
    }
    edges.push((leaf, mid));
    Canon { nv: g.nv + 2, edges }
}

fn relabeled(g: &Canon, pos: &[usize]) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = g
        .edges
        .iter()
        .map(|&(u, v)| {
            let (a, b) = (pos[u], pos[v]);
            (a.min(b), a.max(b))
        })
        .collect();
    out.sort_unstable();
    out
}

/// Canonical form under permutations of internal vertices, leaves fixed.
/// Colour refinement narrows the permutations that need to be tried.
fn canonical(g: &Canon, n: usize) -> Canon {
    let nv = g.nv;
    let mut nbrs = vec![Vec::new(); nv];
    for &(u, v) in &g.edges {
        nbrs[u].push(v);
        nbrs[v].push(u);
    }
    let mut color: Vec<usize> = (0..nv).map(|v| if v < n { v + 1 } else { 0 }).collect();
    loop {
        let sig: Vec<(usize, Vec<usize>)> = (0..nv)
            .map(|v| {
                let mut s: Vec<usize> = nbrs[v].iter().map(|&w| color[w]).collect();
                s.sort_unstable();
                (color[v], s)
            })
            .collect();
        let ranks: BTreeMap<&(usize, Vec<usize>), usize> = sig
            .iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .enumerate()
            .map(|(i, s)| (s, i))
            .collect();
        let next: Vec<usize> = sig.iter().map(|s| ranks[s]).collect();
        let classes_before = color.iter().collect::<BTreeSet<_>>().len();
        let classes_after = next.iter().collect::<BTreeSet<_>>().len();
        color = next;
        if classes_after == classes_before {
            break;
        }
    }

    let mut internal: Vec<usize> = (n..nv).collect();
    internal.sort_by_key(|&v| color[v]);
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for v in internal {
        match classes.last_mut() {
            Some(c) if color[c[0]] == color[v] => c.push(v),
            _ => classes.push(vec![v]),
        }
    }

    let mut pos: Vec<usize> = (0..nv).collect();
    let mut best: Option<Vec<(usize, usize)>> = None;
    search(g, n, &classes, 0, &mut pos, &mut best);
    Canon {
        nv,
        edges: best.unwrap(),
    }
}

fn search(
    g: &Canon,
    offset: usize,
    classes: &[Vec<usize>],
    k: usize,
    pos: &mut Vec<usize>,
    best: &mut Option<Vec<(usize, usize)>>,
) {
    if k == classes.len() {
        let cand = relabeled(g, pos);
        if best.as_ref().is_none_or(|b| cand < *b) {
            *best = Some(cand);
        }
        return;
    }
    let mut class = classes[k].clone();
    permute(&mut class, 0, &mut |perm| {
        for (i, &v) in perm.iter().enumerate() {
            pos[v] = offset + i;
        }
        search(g, offset + perm.len(), classes, k + 1, pos, best);
    });
}

fn permute(items: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == items.len() {
        f(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, f);
        items.swap(k, i);
    }
}
