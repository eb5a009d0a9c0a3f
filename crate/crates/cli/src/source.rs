use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::Serialize;

use spinpoly::graphs::{GraphDescription, MarkedGraph};
use spinpoly::polytopes::{
    assemble, building_block, from_graph, quadrant, trinode_polytope, AssembledPolytope, BuildingBlockKind,
    GradedPolytope, LatticeChoice,
};
use spinpoly::toric::p3_unit_region;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Lattice {
    #[default]
    Parity,
    Full,
}

impl From<Lattice> for LatticeChoice {
    fn from(l: Lattice) -> Self {
        match l {
            Lattice::Parity => LatticeChoice::Parity,
            Lattice::Full => LatticeChoice::Full,
        }
    }
}

/// Where the polytope comes from: a graph file with leaf weights and a level,
/// or a named shape.
#[derive(Debug, Clone, Args, Serialize)]
pub struct SourceArgs {
    /// Graph JSON file
    #[arg(long)]
    pub graph: Option<String>,
    /// Leaf weights, comma separated
    #[arg(long, value_delimiter = ',')]
    pub r: Vec<u64>,
    /// Graph level
    #[arg(long)]
    pub level: Option<u64>,
    /// Named shape instead of a graph: `trinode:LEVEL`, `p3:L`, `p3fixed1:R:L`,
    /// `p3fixed2:R:S:L`, `loopb:L`, `loopb2:L`, `q1:L`..`q4:L`, `interval:L`,
    /// `unit-region`
    #[arg(long, conflicts_with = "graph")]
    pub shape: Option<String>,
    #[arg(long, value_enum, default_value_t = Lattice::Parity)]
    pub lattice: Lattice,
}

pub struct Loaded {
    pub polytope: GradedPolytope,
    /// Raw bytes that identify the input, folded into the report hash.
    pub input: Vec<u8>,
    pub shape: Option<Shape>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Block(BuildingBlockKind),
    Quadrant(u8, u64),
    Trinode(u64),
    UnitRegion,
}

pub fn read_graph(path: &str) -> Result<(MarkedGraph, Vec<u8>)> {
    let bytes = fs::read(Path::new(path)).with_context(|| format!("cannot read graph file {path}"))?;
    let text = String::from_utf8(bytes.clone()).context("graph file is not UTF-8")?;
    let desc = GraphDescription::from_json(&text).with_context(|| format!("invalid graph JSON in {path}"))?;
    let g = MarkedGraph::validate(&desc).map_err(|e| anyhow!("invalid graph in {path}: {e}"))?;
    Ok((g, bytes))
}

fn nums(parts: &[&str]) -> Result<Vec<u64>> {
    parts
        .iter()
        .map(|p| p.parse::<u64>().map_err(|_| anyhow!("'{p}' is not a non-negative integer")))
        .collect()
}

pub fn parse_shape(s: &str) -> Result<Shape> {
    let parts: Vec<&str> = s.split(':').collect();
    let args = nums(&parts[1..])?;
    use BuildingBlockKind::*;
    Ok(match (parts[0], args.as_slice()) {
        ("unit-region", []) => Shape::UnitRegion,
        ("trinode", [l]) => Shape::Trinode(*l),
        ("p3", [l]) => Shape::Block(P3 { level: *l }),
        ("p3fixed1", [r, l]) => Shape::Block(P3Fixed1 { r: *r, level: *l }),
        ("p3fixed2", [r, s, l]) => Shape::Block(P3Fixed2 { r: *r, s: *s, level: *l }),
        ("loopb", [l]) => Shape::Block(LoopB { level: *l }),
        ("loopb2", [l]) => Shape::Block(LoopB2 { level: *l }),
        ("interval", [l]) => Shape::Block(Interval { level: *l }),
        (q @ ("q1" | "q2" | "q3" | "q4"), [l]) => Shape::Quadrant(q[1..].parse().unwrap(), *l),
        _ => bail!("unknown shape '{s}'"),
    })
}

impl SourceArgs {
    pub fn graph_and_level(&self) -> Result<(MarkedGraph, Vec<u8>, u64)> {
        let path = self.graph.as_deref().ok_or_else(|| anyhow!("--graph is required"))?;
        let level = self.level.ok_or_else(|| anyhow!("--level is required"))?;
        let (g, bytes) = read_graph(path)?;
        if self.r.len() != g.num_leaves() {
            bail!("--r has {} entries but the graph has {} leaves", self.r.len(), g.num_leaves());
        }
        Ok((g, bytes, level))
    }

    pub fn assembled(&self) -> Result<(AssembledPolytope, Vec<u8>)> {
        let (g, bytes, level) = self.graph_and_level()?;
        let asm = assemble(&g, &self.r, level).map_err(|e| anyhow!("{e}"))?;
        Ok((asm, bytes))
    }

    pub fn load(&self) -> Result<Loaded> {
        if let Some(s) = &self.shape {
            let shape = parse_shape(s)?;
            let polytope = match shape {
                Shape::Block(k) => building_block(k),
                Shape::Quadrant(q, l) => quadrant(q, l),
                Shape::Trinode(l) => Ok(trinode_polytope(l, self.lattice.into())),
                Shape::UnitRegion => Ok(p3_unit_region()),
            }
            .map_err(|e| anyhow!("{e}"))?;
            return Ok(Loaded {
                polytope,
                input: s.as_bytes().to_vec(),
                shape: Some(shape),
            });
        }
        let (g, bytes, level) = self.graph_and_level()?;
        let polytope = from_graph(&g, &self.r, level, self.lattice.into()).map_err(|e| anyhow!("{e}"))?;
        Ok(Loaded {
            polytope,
            input: bytes,
            shape: None,
        })
    }
}
