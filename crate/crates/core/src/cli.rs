//! Command-line front end. Every stage reads and writes the plain-text
//! formats of the library, so stages can be run and checked separately.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{infer_knn_graph, CoordinateSet, Graph};
use crate::layer::{build_scheme, verify_grid_equivalence, WeightSharingScheme};
use crate::net::{
    make_translated_dataset, metrics_csv, select_learning_rate, train, Centers, Dataset, Model,
    ModelConfig, PatternConfig, TrainConfig, LR_GRID,
};
use crate::par;
use crate::propagation::{init_kernel, most_central_vertex, propagate, PlacementMap};
use crate::translations::ScoreWeights;

#[derive(Debug, Parser)]
#[command(
    name = "gtconv",
    version,
    about = "Convolutional layers on graphs by kernel translation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a symmetric k-nearest-neighbor graph from a coordinate CSV.
    InferGraph {
        coords: PathBuf,
        #[arg(long, default_value_t = 6)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Propagate a kernel from the most central vertex (or --seed-vertex).
    Translate {
        graph: PathBuf,
        /// Kernel radius in hops around the seed vertex.
        #[arg(long, default_value_t = 1)]
        radius: usize,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long)]
        seed_vertex: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Turn a placement file into a weight-sharing scheme.
    BuildLayer {
        placements: PathBuf,
        #[arg(long)]
        transpose: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check that a scheme is the plus-shaped convolution of a rows x cols grid.
    VerifyGrid {
        scheme: PathBuf,
        rows: usize,
        cols: usize,
    },
    /// Generate a dataset of noisy translated patterns from a placement file.
    MakeDataset {
        placements: PathBuf,
        #[arg(long, default_value_t = 4)]
        classes: usize,
        #[arg(long, default_value_t = 100)]
        samples_per_class: usize,
        #[arg(long, default_value_t = 0.1)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a classifier and write per-epoch metrics.
    Train(TrainArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Conv,
    Dense,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Edge list; only checked against the scheme's vertex count.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub scheme: PathBuf,
    #[arg(long)]
    pub train: PathBuf,
    /// Held-out set; without it the last fifth of --train is used.
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ModelKind::Conv)]
    pub model: ModelKind,
    #[arg(long, default_value_t = 4)]
    pub channels: usize,
    #[arg(long, default_value_t = 32)]
    pub hidden: usize,
    /// Learning rate; grid-searched over 0.1, 0.01, 0.001 when omitted.
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long, default_value_t = 30)]
    pub epochs: usize,
    #[arg(long, default_value_t = 16)]
    pub batch: usize,
    #[arg(long, default_value_t = 0.2)]
    pub dropout: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Metrics CSV.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
}

/// What a successful command has to say.
#[derive(Debug)]
pub struct Outcome {
    pub report: String,
    pub passed: bool,
}

impl Outcome {
    fn ok(report: String) -> Self {
        Outcome {
            report,
            passed: true,
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

/// Prefixes parse errors with the offending file.
fn load<T>(path: &Path, parse: impl FnOnce(&str) -> Result<T>) -> std::result::Result<T, String> {
    let text = read(path).map_err(|e| e.to_string())?;
    parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn cmd_infer_graph(
    coords: &Path,
    k: usize,
    out: &Path,
) -> std::result::Result<Outcome, String> {
    let points = load(coords, CoordinateSet::parse_csv)?;
    let g = infer_knn_graph(&points, k).map_err(|e| e.to_string())?;
    write(out, &g.to_edge_list()).map_err(|e| e.to_string())?;
    Ok(Outcome::ok(format!(
        "{} vertices, {} edges -> {}",
        g.n(),
        g.edge_count(),
        out.display()
    )))
}

pub fn cmd_translate(
    graph: &Path,
    radius: usize,
    weights: ScoreWeights,
    seed_vertex: Option<usize>,
    out: &Path,
) -> std::result::Result<Outcome, String> {
    let g = load(graph, Graph::parse_edge_list)?;
    let run = || -> Result<PlacementMap> {
        let seed = match seed_vertex {
            Some(s) => s,
            None => most_central_vertex(&g)?,
        };
        let kernel = init_kernel(&g, seed, radius)?;
        propagate(&g, &kernel, weights)
    };
    let pm = run().map_err(|e| e.to_string())?;
    write(out, &pm.to_text()).map_err(|e| e.to_string())?;
    Ok(Outcome::ok(format!(
        "seed {} K={}\n{}",
        pm.seed(),
        pm.k(),
        pm.report()
    )))
}

pub fn cmd_build_layer(
    placements: &Path,
    transpose: bool,
    out: &Path,
) -> std::result::Result<Outcome, String> {
    let pm = load(placements, PlacementMap::parse)?;
    let mut scheme = build_scheme(&pm).map_err(|e| e.to_string())?;
    if transpose {
        scheme = scheme.transpose();
    }
    write(out, &scheme.to_text()).map_err(|e| e.to_string())?;
    Ok(Outcome::ok(format!(
        "{} triples, K={} -> {}",
        scheme.len(),
        scheme.k(),
        out.display()
    )))
}

pub fn cmd_verify_grid(
    scheme: &Path,
    rows: usize,
    cols: usize,
) -> std::result::Result<Outcome, String> {
    let s = load(scheme, WeightSharingScheme::parse)?;
    let report = verify_grid_equivalence(&s, rows, cols).map_err(|e| e.to_string())?;
    let offsets: Vec<String> = report
        .offsets
        .iter()
        .enumerate()
        .map(|(w, (dr, dc))| format!("w{w}=({dr},{dc})"))
        .collect();
    let text = match &report.witness {
        None => format!("grid equivalent: {}", offsets.join(" ")),
        Some(w) => format!("not grid equivalent: {w}"),
    };
    Ok(Outcome {
        report: text,
        passed: report.passed(),
    })
}

pub fn cmd_make_dataset(
    placements: &Path,
    classes: usize,
    samples_per_class: usize,
    noise: f64,
    seed: u64,
    out: &Path,
) -> std::result::Result<Outcome, String> {
    let pm = load(placements, PlacementMap::parse)?;
    if classes == 0 {
        return Err("need at least one class".into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let templates: Vec<Vec<f64>> = (0..classes)
        .map(|_| (0..pm.k()).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let cfg = PatternConfig {
        samples_per_class,
        noise,
        centers: Centers::Uniform,
        seed: seed.wrapping_add(1),
    };
    let ds = make_translated_dataset(&pm, &templates, &cfg).map_err(|e| e.to_string())?;
    write(out, &ds.to_csv()).map_err(|e| e.to_string())?;
    Ok(Outcome::ok(format!(
        "{} samples on {} vertices -> {}",
        ds.len(),
        ds.n(),
        out.display()
    )))
}

pub fn cmd_train(args: &TrainArgs) -> std::result::Result<Outcome, String> {
    let scheme = Arc::new(load(&args.scheme, WeightSharingScheme::parse)?);
    if let Some(path) = &args.graph {
        let g = load(path, Graph::parse_edge_list)?;
        if g.n() != scheme.n() {
            return Err(format!(
                "graph has {} vertices, scheme has {}",
                g.n(),
                scheme.n()
            ));
        }
    }
    let full = load(&args.train, Dataset::parse_csv)?;
    let (train_set, test_set) = match &args.test {
        Some(p) => (full, load(p, Dataset::parse_csv)?),
        None => full.split(full.len() - full.len() / 5),
    };
    let classes = train_set.classes().max(test_set.classes()).max(2);
    let mcfg = ModelConfig {
        hidden: args.hidden,
        classes,
        dropout: args.dropout,
    };
    let build = || match args.model {
        ModelKind::Conv => Model::conv(scheme.clone(), args.channels, &mcfg, args.seed),
        ModelKind::Dense => {
            let conv = Model::conv(scheme.clone(), args.channels, &mcfg, args.seed)?;
            let width = Model::matched_dense_width(scheme.n(), conv.param_count(), &mcfg);
            Model::dense(scheme.n(), width, &mcfg, args.seed)
        }
    };
    let run = || -> Result<String> {
        let mut tcfg = TrainConfig {
            lr: args.lr.unwrap_or(LR_GRID[0]),
            epochs: args.epochs,
            batch: args.batch,
            seed: args.seed,
        };
        if args.lr.is_none() {
            tcfg.lr = select_learning_rate(build, &train_set, &tcfg, &LR_GRID)?;
        }
        let (model, history) = train(build()?, &train_set, &test_set, &tcfg)?;
        write(&args.out, &metrics_csv(&history))?;
        if let Some(path) = &args.checkpoint {
            write(path, &model.to_checkpoint())?;
        }
        let last = history.last().map_or("no epochs run".to_string(), |m| {
            format!(
                "train accuracy {:.4}, test accuracy {:.4}",
                m.train_accuracy, m.test_accuracy
            )
        });
        Ok(format!(
            "lr {}, {} parameters, {last}",
            tcfg.lr,
            model.param_count()
        ))
    };
    run().map(Outcome::ok).map_err(|e| e.to_string())
}

fn dispatch(cli: &Cli) -> std::result::Result<Outcome, String> {
    match &cli.command {
        Command::InferGraph { coords, k, out } => cmd_infer_graph(coords, *k, out),
        Command::Translate {
            graph,
            radius,
            alpha,
            beta,
            seed_vertex,
            out,
        } => {
            let w = ScoreWeights::new(*alpha, *beta).map_err(|e| e.to_string())?;
            cmd_translate(graph, *radius, w, *seed_vertex, out)
        }
        Command::BuildLayer {
            placements,
            transpose,
            out,
        } => cmd_build_layer(placements, *transpose, out),
        Command::VerifyGrid { scheme, rows, cols } => cmd_verify_grid(scheme, *rows, *cols),
        Command::MakeDataset {
            placements,
            classes,
            samples_per_class,
            noise,
            seed,
            out,
        } => cmd_make_dataset(placements, *classes, *samples_per_class, *noise, *seed, out),
        Command::Train(args) => cmd_train(args),
    }
}

/// Exit codes: 0 success, 1 failed verification, 2 usage or input error.
pub fn run(cli: Cli) -> ExitCode {
    let result = match par::workers_from_env() {
        Some(w) => par::with_workers(w, || dispatch(&cli)),
        None => dispatch(&cli),
    };
    match result {
        Ok(o) if o.passed => {
            println!("{}", o.report);
            ExitCode::SUCCESS
        }
        Ok(o) => {
            println!("{}", o.report);
            ExitCode::from(1)
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
