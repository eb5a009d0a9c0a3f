mod source;

use std::fs;
use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use source::{read_graph, Shape, SourceArgs};
use spinpoly::graphs::{enumerate_graphs, explode, GraphDescription, LeafOrigin};
use spinpoly::polytopes::{BuildingBlockKind, GradedPolytope};
use spinpoly::termorders::{is_balanced, total_order_b2, PointOrder, TermOrder, TermWeight, TotalOrder};
use spinpoly::toric::{
    assembled_boxtimes_order, block_order, hilbert, is_normal, quadratic_squarefree_gb, relation_degree,
    two_dim_balanced_order, verify_theorem, Bounds, D2Factor, Instance, TheoremName, ToricError,
};

#[derive(Debug, Parser)]
#[command(name = "spinpoly", version, about = "Weighting polytopes of trivalent graphs and their toric algebras")]
struct Cli {
    /// Worker threads for data-parallel loops
    #[arg(long, global = true, env = "SPINPOLY_THREADS")]
    threads: Option<usize>,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// Lattice points of a dilation
    Points {
        #[command(flatten)]
        #[serde(flatten)]
        src: SourceArgs,
        #[arg(long, default_value_t = 1)]
        dilation: u32,
    },
    /// Lattice point counts of the dilations
    Hilbert {
        #[command(flatten)]
        #[serde(flatten)]
        src: SourceArgs,
        #[arg(long, default_value_t = 3)]
        max_dilation: usize,
    },
    /// Normality up to a dilation bound
    Normal {
        #[command(flatten)]
        #[serde(flatten)]
        src: SourceArgs,
        #[arg(long, default_value_t = 4)]
        max_dilation: usize,
    },
    /// Degree of the relations via fiber connectivity
    Relations {
        #[command(flatten)]
        #[serde(flatten)]
        src: SourceArgs,
        #[arg(long, default_value_t = 3)]
        move_degree_max: usize,
        #[arg(long, default_value_t = 4)]
        max_degree: usize,
    },
    /// Quadratic square-free Gröbner basis check
    GbCheck {
        #[command(flatten)]
        #[serde(flatten)]
        src: SourceArgs,
        /// Defaults to `assembled` for graphs, `b2` for quadrants and
        /// `sigma2-lex` otherwise
        #[arg(long, value_enum)]
        order: Option<OrderChoice>,
        #[arg(long, default_value_t = 4)]
        max_degree: usize,
    },
    /// Balancedness up to a degree bound
    Balanced {
        #[command(flatten)]
        #[serde(flatten)]
        src: SourceArgs,
        #[arg(long, default_value_t = 3)]
        max_degree: usize,
    },
    /// Components after cutting every separating edge
    Explode {
        #[arg(long)]
        graph: String,
    },
    /// Building blocks of an assembled graph polytope, or one named block
    Blocks {
        #[command(flatten)]
        #[serde(flatten)]
        src: SourceArgs,
    },
    /// Check a theorem on one instance
    Verify {
        #[arg(long, value_parser = clap::value_parser!(TheoremArg))]
        theorem: TheoremArg,
        #[arg(long)]
        graph: Option<String>,
        #[arg(long, value_delimiter = ',')]
        r: Vec<u64>,
        #[arg(long)]
        level: u64,
        #[arg(long)]
        genus: Option<usize>,
        #[arg(long)]
        leaves: Option<usize>,
        /// Factors for d2bp: loopb, triangle, square
        #[arg(long, value_delimiter = ',', value_enum)]
        factors: Vec<FactorArg>,
        #[arg(long, default_value_t = 4)]
        max_dilation: usize,
        #[arg(long, default_value_t = 3)]
        move_degree_max: usize,
        /// Add wall-clock timings to the certificate (breaks byte-identical output)
        #[arg(long)]
        timings: bool,
    },
    /// Trivalent graphs with given genus and leaves
    Graphs {
        #[arg(long)]
        genus: usize,
        #[arg(long)]
        leaves: usize,
        #[arg(long)]
        max_vertices: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum OrderChoice {
    Assembled,
    Sigma2Lex,
    B2,
    TwoDim,
}

#[derive(Debug, Clone, Copy, Serialize)]
#[serde(transparent)]
struct TheoremArg(TheoremName);

impl std::str::FromStr for TheoremArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        s.parse().map(TheoremArg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum FactorArg {
    Loopb,
    Triangle,
    Square,
}

impl From<FactorArg> for D2Factor {
    fn from(f: FactorArg) -> Self {
        match f {
            FactorArg::Loopb => D2Factor::LoopB,
            FactorArg::Triangle => D2Factor::Triangle,
            FactorArg::Square => D2Factor::Square,
        }
    }
}

/// Input or usage problems; exit status 2.
#[derive(Debug)]
struct UsageError(anyhow::Error);

struct Outcome {
    report: Value,
    csv: Option<String>,
    passed: bool,
}

fn input_hash(cmd: &Command, input: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(cmd).expect("command serializes"));
    h.update([0u8]);
    h.update(input);
    hex::encode(h.finalize())
}

fn envelope(cmd: &Command, input: &[u8], bounds: Value, result: Value) -> Value {
    let name = serde_json::to_value(cmd).expect("command serializes")["command"].clone();
    json!({
        "tool": "spinpoly",
        "version": env!("CARGO_PKG_VERSION"),
        "command": name,
        "inputHash": input_hash(cmd, input),
        "bounds": bounds,
        "result": result,
    })
}

fn csv_header(report: &Value) -> String {
    format!(
        "# spinpoly {} {} input={} bounds={}\n",
        report["version"].as_str().unwrap_or_default(),
        report["command"].as_str().unwrap_or_default(),
        report["inputHash"].as_str().unwrap_or_default(),
        report["bounds"]
    )
}

fn points_csv(points: &[Vec<i64>]) -> String {
    let dim = points.first().map_or(0, |p| p.len());
    let mut s = (0..dim).map(|i| format!("x{i}")).collect::<Vec<_>>().join(",");
    s.push('\n');
    for p in points {
        s.push_str(&p.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","));
        s.push('\n');
    }
    s
}

fn usage(e: impl Into<anyhow::Error>) -> UsageError {
    UsageError(e.into())
}

fn order_for(src: &SourceArgs, choice: Option<OrderChoice>, shape: Option<Shape>, p: &GradedPolytope, max_degree: usize) -> Result<TotalOrder> {
    let choice = choice.unwrap_or(match shape {
        None => OrderChoice::Assembled,
        Some(Shape::Quadrant(..)) | Some(Shape::Block(BuildingBlockKind::LoopB2 { .. })) => OrderChoice::B2,
        Some(_) => OrderChoice::Sigma2Lex,
    });
    Ok(match choice {
        OrderChoice::Assembled => {
            let (asm, _) = src.assembled()?;
            assembled_boxtimes_order(&asm).map_err(|e| anyhow!("{e}"))?
        }
        OrderChoice::Sigma2Lex => TotalOrder::new(TermWeight::SigmaSquared, PointOrder::Lex),
        OrderChoice::B2 => match shape {
            Some(Shape::Quadrant(..)) => total_order_b2(),
            Some(Shape::Block(k @ BuildingBlockKind::LoopB2 { .. })) => {
                block_order(Some(k), p, &[true, false, false, true]).map_err(|e| anyhow!("{e}"))?
            }
            _ => bail!("the b2 order needs a quadrant or loopb2 shape"),
        },
        OrderChoice::TwoDim => two_dim_balanced_order(p, max_degree).map_err(|e| anyhow!("{e}"))?,
    })
}

fn run(cmd: &Command) -> Result<Outcome, UsageError> {
    match cmd {
        Command::Points { src, dilation } => {
            let l = src.load().map_err(usage)?;
            let pts = l.polytope.lattice_points(*dilation).map_err(usage)?;
            let report = envelope(cmd, &l.input, json!({ "dilation": dilation }), json!({ "count": pts.len(), "points": pts }));
            Ok(Outcome { csv: Some(points_csv(&pts)), report, passed: true })
        }
        Command::Hilbert { src, max_dilation } => {
            let l = src.load().map_err(usage)?;
            let h = hilbert(&l.polytope, *max_dilation).map_err(usage)?;
            let report = envelope(cmd, &l.input, json!({ "maxDilation": max_dilation }), serde_json::to_value(&h).unwrap());
            Ok(Outcome { csv: Some(h.to_csv()), report, passed: true })
        }
        Command::Normal { src, max_dilation } => {
            if *max_dilation < 2 {
                return Err(usage(anyhow!("--max-dilation must be at least 2")));
            }
            let l = src.load().map_err(usage)?;
            let n = is_normal(&l.polytope, *max_dilation).map_err(usage)?;
            let report = envelope(cmd, &l.input, json!({ "maxDilation": max_dilation }), serde_json::to_value(&n).unwrap());
            Ok(Outcome { csv: None, report, passed: n.normal })
        }
        Command::Relations { src, move_degree_max, max_degree } => {
            let l = src.load().map_err(usage)?;
            let bounds = json!({ "moveDegreeMax": move_degree_max, "maxDegree": max_degree });
            match relation_degree(&l.polytope, *move_degree_max, *max_degree) {
                Ok(c) => {
                    let passed = c.relation_degree.is_some();
                    Ok(Outcome { csv: None, report: envelope(cmd, &l.input, bounds, serde_json::to_value(&c).unwrap()), passed })
                }
                Err(ToricError::NormalityPrerequisiteFailed(x, n)) => {
                    let result = json!({ "error": "not normal", "witness": { "dilation": n, "point": x } });
                    Ok(Outcome { csv: None, report: envelope(cmd, &l.input, bounds, result), passed: false })
                }
                Err(e) => Err(usage(anyhow!("{e}"))),
            }
        }
        Command::GbCheck { src, order, max_degree } => {
            let l = src.load().map_err(usage)?;
            let (poly, input) = if l.shape.is_none() && order.unwrap_or(OrderChoice::Assembled) == OrderChoice::Assembled {
                let (asm, bytes) = src.assembled().map_err(usage)?;
                (asm.polytope, bytes)
            } else {
                (l.polytope.clone(), l.input.clone())
            };
            let o = order_for(src, *order, l.shape, &poly, *max_degree).map_err(usage)?;
            let gb = quadratic_squarefree_gb(&poly, &TermOrder::from(o), *max_degree).map_err(|e| usage(anyhow!("{e}")))?;
            let report = envelope(cmd, &input, json!({ "maxDegree": max_degree }), serde_json::to_value(&gb).unwrap());
            Ok(Outcome { csv: None, report, passed: gb.passed })
        }
        Command::Balanced { src, max_degree } => {
            let l = src.load().map_err(usage)?;
            let f = is_balanced(&l.polytope, *max_degree).map_err(usage)?;
            let result = json!({ "balanced": f.is_none(), "failure": f.as_ref().map(|f| json!({
                "degree": f.degree, "image": f.image, "monomial": f.monomial.to_string(),
            })) });
            Ok(Outcome { csv: None, report: envelope(cmd, &l.input, json!({ "maxDegree": max_degree }), result), passed: f.is_none() })
        }
        Command::Explode { graph } => {
            let (g, bytes) = read_graph(graph).map_err(usage)?;
            let ex = explode(&g);
            let components: Vec<Value> = ex
                .components
                .iter()
                .map(|c| {
                    let origins: Vec<Value> = c
                        .leaf_origin
                        .iter()
                        .map(|o| match o {
                            LeafOrigin::Leaf(l) => json!({ "leaf": l }),
                            LeafOrigin::Split(s) => json!({ "split": s }),
                        })
                        .collect();
                    json!({
                        "graph": c.graph.to_description(),
                        "class": c.graph.classify(),
                        "edgeOrigin": c.edge_origin,
                        "leafOrigin": origins,
                    })
                })
                .collect();
            let splits: Vec<Value> = ex
                .split_edges
                .iter()
                .map(|s| json!({ "edge": s.edge, "a": [s.a.component, s.a.edge], "b": [s.b.component, s.b.edge] }))
                .collect();
            let result = json!({ "components": components, "splitEdges": splits });
            Ok(Outcome { csv: None, report: envelope(cmd, &bytes, json!({}), result), passed: true })
        }
        Command::Blocks { src } => {
            if src.shape.is_some() {
                let l = src.load().map_err(usage)?;
                let result = json!({ "polytope": l.polytope.to_json(), "latticePoints": l.polytope.count_lattice_points(1).map_err(usage)? });
                return Ok(Outcome { csv: None, report: envelope(cmd, &l.input, json!({}), result), passed: true });
            }
            let (asm, bytes) = src.assembled().map_err(usage)?;
            let result = json!({
                "expression": asm.describe(),
                "tree": asm.expr,
                "blocks": asm.blocks,
                "steps": asm.steps,
                "coordinates": asm.origins,
                "dimension": asm.polytope.dim,
            });
            Ok(Outcome { csv: None, report: envelope(cmd, &bytes, json!({}), result), passed: true })
        }
        Command::Verify { theorem, graph, r, level, genus, leaves, factors, max_dilation, move_degree_max, timings } => {
            if theorem.0 == TheoremName::Polypres && level / 2 <= 1 {
                return Err(usage(anyhow!("hypothesis violated: L > 1 required (level 2L = {level})")));
            }
            let (desc, bytes) = match graph {
                Some(path) => {
                    let bytes = fs::read(path).with_context(|| format!("cannot read graph file {path}")).map_err(usage)?;
                    let text = String::from_utf8(bytes.clone()).context("graph file is not UTF-8").map_err(usage)?;
                    (Some(GraphDescription::from_json(&text).with_context(|| format!("invalid graph JSON in {path}")).map_err(usage)?), bytes)
                }
                None => (None, Vec::new()),
            };
            let inst = Instance {
                graph: desc,
                r: r.clone(),
                level: *level,
                genus: *genus,
                leaves: *leaves,
                factors: factors.iter().map(|&f| f.into()).collect(),
            };
            let bounds = Bounds { degree_bound: *max_dilation, move_degree_max: *move_degree_max };
            let start = Instant::now();
            let mut cert = verify_theorem(theorem.0, &inst, &bounds).map_err(|e| usage(anyhow!("{e}")))?;
            if *timings {
                cert.timings = Some(json!({ "totalSeconds": start.elapsed().as_secs_f64() }));
            }
            let passed = cert.result;
            let report = envelope(cmd, &bytes, serde_json::to_value(bounds).unwrap(), serde_json::to_value(&cert).unwrap());
            Ok(Outcome { csv: None, report, passed })
        }
        Command::Graphs { genus, leaves, max_vertices } => {
            let mv = max_vertices.unwrap_or(leaves + 2 * genus);
            let gs = enumerate_graphs(*genus, *leaves, mv).map_err(usage)?;
            let list: Vec<Value> = gs.iter().map(|g| json!({ "class": g.classify(), "graph": g.to_description() })).collect();
            let report = envelope(cmd, &[], json!({ "maxVertices": mv }), json!({ "count": list.len(), "graphs": list }));
            Ok(Outcome { csv: None, report, passed: true })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let outcome = match run(&cli.command) {
        Ok(o) => o,
        Err(UsageError(e)) => {
            eprintln!("error: {}", format!("{e:#}").lines().next().unwrap_or_default());
            return ExitCode::from(2);
        }
    };
    let text = match (cli.format, &outcome.csv) {
        (Format::Csv, Some(csv)) => format!("{}{csv}", csv_header(&outcome.report)),
        (Format::Csv, None) => {
            eprintln!("error: --format csv is only available for tables (points, hilbert)");
            return ExitCode::from(2);
        }
        (Format::Json, _) => format!("{}\n", serde_json::to_string_pretty(&outcome.report).expect("report serializes")),
    };
    let written = match &cli.out {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {path}")),
        None => std::io::stdout().write_all(text.as_bytes()).context("cannot write to stdout"),
    };
    if let Err(e) = written {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    ExitCode::from(if outcome.passed { 0 } else { 1 })
}
