//! The `matchconv` command line: train, eval, convolve, gradcheck, match.
//!
//! Options may also come from a flat `key = value` file given with
//! `--config`; keys are the long flag names. Flags win over the file, the
//! file wins over built-in defaults.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::data::{
    build_mnist_splits, grid, load_mnist_dir, load_rag_dataset, pgm, Dataset, Image, MnistKind, Split,
    SplitSizes,
};
use crate::error::{Error, Result};
use crate::gradcheck::{run_all, GradcheckConfig};
use crate::graph::io::load_graph;
use crate::graph::{AttributedGraph, FilterGraph};
use crate::layers::{ConvLayer, Theta};
use crate::matching::{
    gms_bp_edges, gms_brute_force, gms_no_edges, Matching, Objective, BRUTE_FORCE_MAX_FILTER,
};
use crate::model::{Model, ModelConfig};
use crate::optim::{evaluate, load_checkpoint, save_checkpoint, train, EpochRecord, TrainConfig};

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "matchconv", version, about = "Graph convolution by graph matching")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a network and write a checkpoint and a history CSV.
    Train(TrainArgs),
    /// Evaluate a checkpoint on a dataset split.
    Eval(EvalArgs),
    /// Apply one handcrafted vertex filter to an image and write a PGM.
    Convolve(ConvolveArgs),
    /// Compare analytic gradients with finite differences.
    Gradcheck(GradcheckArgs),
    /// Match a filter graph against a graph and print the assignment.
    Match(MatchArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct DataArgs {
    /// MNIST directory with IDX files, or a RAG directory.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// reduced, rotated, mixed (MNIST grid graphs) or rag.
    #[arg(long)]
    pub kind: Option<String>,
    /// Digits to keep, e.g. `0,1`.
    #[arg(long)]
    pub classes: Option<String>,
    /// Training-set size; validation and test scale as 10000/2000/50000.
    #[arg(long)]
    pub limit: Option<usize>,
    #[arg(long)]
    pub train_size: Option<usize>,
    #[arg(long)]
    pub valid_size: Option<usize>,
    #[arg(long)]
    pub test_size: Option<usize>,
    /// key = value option file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    #[arg(long)]
    pub hops: Option<usize>,
    /// max or avg.
    #[arg(long)]
    pub theta: Option<String>,
    /// Match edges too (full model).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub edge_matching: Option<bool>,
    /// relu or none.
    #[arg(long)]
    pub activation: Option<String>,
    /// Filters per block, e.g. `8,16,32`.
    #[arg(long)]
    pub filters: Option<String>,
    /// Vertices per filter (default: mean neighbourhood size of the data).
    #[arg(long)]
    pub filter_vertices: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory for `model.ckpt` and `history.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// train, valid or test.
    #[arg(long, default_value = "test")]
    pub split: String,
}

#[derive(Debug, Args)]
pub struct ConvolveArgs {
    /// A binary PGM image or a graph file laid out as a square grid.
    #[arg(long)]
    pub input: PathBuf,
    /// Comma-separated scalar filter weights.
    #[arg(long, default_value = "-1,1", allow_hyphen_values = true)]
    pub filter: String,
    #[arg(long, default_value_t = 1)]
    pub hops: usize,
    /// Rotate the image first (90, 180 or 270 degrees).
    #[arg(long)]
    pub rotate: Option<u32>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Instances per layer.
    #[arg(long, default_value_t = 20)]
    pub instances: usize,
    /// Largest random graph.
    #[arg(long, default_value_t = 7)]
    pub max_vertices: usize,
    /// Test hook: bias every analytic gradient so the check must fail.
    #[arg(long, hide = true)]
    pub corrupt: bool,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MatchArgs {
    /// Graph to match against.
    pub graph: PathBuf,
    /// Filter graph (its attributes are the weights).
    pub filter: PathBuf,
    /// Include edge similarities.
    #[arg(long)]
    pub edges: bool,
    /// Exhaustive search instead of the LSAP solvers.
    #[arg(long)]
    pub brute: bool,
}

/// Parses `std::env::args`, runs the command and maps errors to exit codes.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Data(_) | Error::Parse { .. } | Error::Io { .. } => EXIT_DATA,
        Error::Config(_) | Error::Domain(_) => EXIT_USAGE,
    }
}

pub fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Train(args) => cmd_train(args).map(|_| ExitCode::SUCCESS),
        Command::Eval(args) => cmd_eval(args).map(|_| ExitCode::SUCCESS),
        Command::Convolve(args) => cmd_convolve(args).map(|_| ExitCode::SUCCESS),
        Command::Gradcheck(args) => cmd_gradcheck(args),
        Command::Match(args) => cmd_match(args).map(|_| ExitCode::SUCCESS),
    }
}

fn set_threads(threads: Option<usize>) -> Result<()> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Flat `key = value` options.
#[derive(Debug, Default)]
pub struct ConfigFile {
    values: HashMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut values = HashMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: origin.to_path_buf(),
                line: n + 1,
                msg: "expected `key = value`".into(),
            })?;
            values.insert(key.trim().replace('_', "-"), value.trim().to_string());
        }
        Ok(Self { values })
    }

    /// `flag`, else the file's `key`, else `None`.
    pub fn get<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.values
            .get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::Config(format!("bad value `{v}` for `{key}` in config file")))
            })
            .transpose()
    }

    pub fn or<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        Ok(self.get(flag, key)?.unwrap_or(default))
    }
}

fn parse_list<T: FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad {what} `{p}` in `{s}`")))
        })
        .collect()
}

/// Dataset options resolved against the config file.
#[derive(Debug, Clone)]
struct DataSpec {
    path: PathBuf,
    kind: String,
    classes: Option<Vec<u8>>,
    sizes: SplitSizes,
}

fn resolve_data(args: &DataArgs, file: &ConfigFile) -> Result<DataSpec> {
    let path: PathBuf = file
        .get(args.dataset.clone(), "dataset")?
        .ok_or_else(|| Error::Config("--dataset is required".into()))?;
    let kind = file.or(args.kind.clone(), "kind", "reduced".to_string())?;
    let classes = file
        .get(args.classes.clone(), "classes")?
        .map(|c| parse_list::<u8>(&c, "class"))
        .transpose()?;
    let base = match file.get(args.limit, "limit")? {
        Some(limit) => SplitSizes::scaled(limit),
        None => SplitSizes::FULL,
    };
    let sizes = SplitSizes {
        train: file.or(args.train_size, "train-size", base.train)?,
        valid: file.or(args.valid_size, "valid-size", base.valid)?,
        test: file.or(args.test_size, "test-size", base.test)?,
    };
    Ok(DataSpec {
        path,
        kind,
        classes,
        sizes,
    })
}

struct Loaded {
    train: Dataset,
    valid: Option<Dataset>,
    test: Option<Dataset>,
}

fn load_data(spec: &DataSpec) -> Result<Loaded> {
    if !spec.path.exists() {
        return Err(Error::Config(format!(
            "dataset path {} does not exist",
            spec.path.display()
        )));
    }
    if spec.kind == "rag" {
        let sub = |name: &str, split: Split| -> Result<Option<Dataset>> {
            let dir = spec.path.join(name);
            if dir.is_dir() {
                load_rag_dataset(&dir, split).map(Some)
            } else {
                Ok(None)
            }
        };
        let train = sub("train", Split::Train)?
            .ok_or_else(|| Error::Data(format!("{} has no train/ directory", spec.path.display())))?;
        return Ok(Loaded {
            train,
            valid: sub("valid", Split::Valid)?,
            test: sub("test", Split::Test)?,
        });
    }
    let kind: MnistKind = spec.kind.parse()?;
    let samples = load_mnist_dir(&spec.path)?;
    let splits = build_mnist_splits(&samples, kind, spec.classes.as_deref(), spec.sizes)?;
    let nonempty = |d: Dataset| (!d.is_empty()).then_some(d);
    Ok(Loaded {
        train: splits.train,
        valid: nonempty(splits.valid),
        test: nonempty(splits.test),
    })
}

fn resolve_model(args: &ModelArgs, file: &ConfigFile, data: &Dataset) -> Result<ModelConfig> {
    let (vertex_dim, edge_dim) = data
        .dims()
        .ok_or_else(|| Error::Data("training set is empty".into()))?;
    let hops = file.or(args.hops, "hops", 1)?;
    let theta: Theta = file.or(args.theta.clone(), "theta", "max".into())?.parse()?;
    let edge_matching = file.or(args.edge_matching, "edge-matching", false)?;
    let activation = match file
        .or(args.activation.clone(), "activation", "relu".into())?
        .as_str()
    {
        "relu" | "true" => true,
        "none" | "false" => false,
        other => {
            return Err(Error::Config(format!(
                "activation must be relu or none, got `{other}`"
            )))
        }
    };
    let filters = parse_list(
        &file.or(args.filters.clone(), "filters", "32,64,128".into())?,
        "filter count",
    )?;
    let filter_vertices = match file.get(args.filter_vertices, "filter-vertices")? {
        Some(n) => n,
        None => data.default_filter_vertices(hops)?,
    };
    Ok(ModelConfig {
        filters,
        filter_vertices,
        hops,
        theta,
        edge_matching,
        activation,
        input_vertex_dim: vertex_dim,
        input_edge_dim: edge_dim,
        num_classes: data.num_classes,
    })
}

pub fn format_history(history: &[EpochRecord]) -> String {
    let mut out = String::from("epoch,loss,valid_acc\n");
    for r in history {
        let acc = r.valid_accuracy.map(|a| a.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{},{}", r.epoch, r.loss, acc);
    }
    out
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let file = ConfigFile::load(args.data.config.as_deref())?;
    set_threads(file.get(args.data.threads, "threads")?)?;
    let spec = resolve_data(&args.data, &file)?;
    let data = load_data(&spec)?;
    let config = resolve_model(&args.model, &file, &data.train)?;
    let train_cfg = TrainConfig {
        epochs: file.or(args.epochs, "epochs", 50)?,
        lr: file.or(args.lr, "lr", 1e-3)?,
        seed: file.or(args.seed, "seed", 0)?,
    };
    let out = file.or(args.out, "out", PathBuf::from("run"))?;
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;

    println!(
        "train {} / valid {} / test {} graphs; filters {:?} of {} vertices, {}-hop, theta {}, {}",
        data.train.len(),
        data.valid.as_ref().map_or(0, |d| d.len()),
        data.test.as_ref().map_or(0, |d| d.len()),
        config.filters,
        config.filter_vertices,
        config.hops,
        config.theta,
        if config.edge_matching {
            "edge matching"
        } else {
            "no edges"
        },
    );
    println!("pooling: first-level Louvain partition (community size target is advisory)");
    let mut model = Model::initialized(config, train_cfg.seed)?;
    let history = train(
        &mut model,
        &data.train,
        data.valid.as_ref(),
        &train_cfg,
        |r| match r.valid_accuracy {
            Some(a) => println!(
                "epoch {:>3}  loss {:.6}  valid {:.2}%",
                r.epoch,
                r.loss,
                100.0 * a
            ),
            None => println!("epoch {:>3}  loss {:.6}", r.epoch, r.loss),
        },
    )?;
    let ckpt = out.join("model.ckpt");
    save_checkpoint(&model, &ckpt)?;
    let hist = out.join("history.csv");
    std::fs::write(&hist, format_history(&history)).map_err(|e| Error::io(&hist, e))?;

    let train_eval = evaluate(&model, &data.train)?;
    println!("train accuracy {:.2}%", 100.0 * train_eval.accuracy());
    if let Some(test) = &data.test {
        println!("test accuracy {:.2}%", 100.0 * evaluate(&model, test)?.accuracy());
    }
    println!("wrote {} and {}", ckpt.display(), hist.display());
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let file = ConfigFile::load(args.data.config.as_deref())?;
    set_threads(file.get(args.data.threads, "threads")?)?;
    let model = load_checkpoint(&args.checkpoint)?;
    let spec = resolve_data(&args.data, &file)?;
    let data = load_data(&spec)?;
    let set = match args.split.as_str() {
        "train" => Some(data.train),
        "valid" => data.valid,
        "test" => data.test,
        other => {
            return Err(Error::Config(format!(
                "split must be train, valid or test, got `{other}`"
            )))
        }
    }
    .ok_or_else(|| Error::Data(format!("the {} split is empty", args.split)))?;
    let eval = evaluate(&model, &set)?;
    println!(
        "{} accuracy {:.2}% ({}/{})",
        args.split,
        100.0 * eval.accuracy(),
        eval.correct,
        eval.total
    );
    println!("confusion (rows: true, columns: predicted)");
    for row in &eval.confusion {
        let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
        println!("  {}", cells.join(" "));
    }
    Ok(())
}

/// Loads the convolution input and its raster side length.
fn load_raster_graph(path: &Path, rotate: Option<u32>) -> Result<(AttributedGraph, usize)> {
    if path.extension().and_then(|s| s.to_str()) == Some("graph") {
        if rotate.is_some() {
            return Err(Error::Config("--rotate applies to images only".into()));
        }
        let g = load_graph(path)?;
        let side = (g.num_vertices() as f64).sqrt().round() as usize;
        if side * side != g.num_vertices() || g.vertex_dim() != 1 {
            return Err(Error::Data(
                "graph input must be a square grid with scalar attributes".into(),
            ));
        }
        return Ok((g.without_edge_attrs(), side));
    }
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let (w, h, pixels) = pgm::decode_pgm(&bytes)?;
    if w != h {
        return Err(Error::Data(format!("image must be square, got {w}x{h}")));
    }
    let mut values: Vec<f64> = pixels.iter().map(|&b| b as f64 / 255.0).collect();
    if let Some(deg) = rotate {
        values = grid::rotate_square(&values, w, grid::Rotation::from_degrees(deg)?);
    }
    if w == crate::data::idx::SIDE {
        let g = grid::image_to_grid_graph(&Image::new(values)?)?;
        Ok((g, grid::GRID_SIDE))
    } else {
        Ok((grid::grid_graph(&values, w)?, w))
    }
}

/// Convolves a raster graph with a scalar vertex filter; returns the raw
/// per-vertex responses.
pub fn convolve_scalar(g: &AttributedGraph, weights: &[f64], hops: usize) -> Result<Vec<f64>> {
    let layer = ConvLayer::new(vec![FilterGraph::from_scalars(weights)?], hops, Theta::Max, false)?;
    Ok(layer.forward(g)?.0.vertex_attrs().to_vec())
}

fn cmd_convolve(args: ConvolveArgs) -> Result<()> {
    set_threads(args.threads)?;
    let weights: Vec<f64> = parse_list(&args.filter, "filter weight")?;
    let (g, side) = load_raster_graph(&args.input, args.rotate)?;
    let response = convolve_scalar(&g, &weights, args.hops)?;
    let bytes = pgm::normalize_to_bytes(&response);
    pgm::write_pgm(&args.out, side, side, &bytes)?;
    let min = response.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = response.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    println!(
        "response range [{min}, {max}] over {side}x{side}; wrote {}",
        args.out.display()
    );
    Ok(())
}

fn cmd_gradcheck(args: GradcheckArgs) -> Result<ExitCode> {
    set_threads(args.threads)?;
    let config = GradcheckConfig {
        seed: args.seed,
        instances: args.instances,
        max_vertices: args.max_vertices,
        corrupt: args.corrupt,
        ..GradcheckConfig::default()
    };
    let reports = run_all(&config)?;
    let mut ok = true;
    for r in &reports {
        let pass = r.passed(config.tolerance);
        ok &= pass;
        println!(
            "{:<26} {}  max rel err {:.3e}  ({} instances, {} coordinates, {} redrawn)",
            r.layer,
            if pass { "PASS" } else { "FAIL" },
            r.max_relative_error,
            r.instances,
            r.coordinates,
            r.redrawn
        );
    }
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_NUMERIC)
    })
}

/// One line per filter vertex, using the ids of `filter` as it was loaded.
pub fn format_matching(g: &AttributedGraph, filter: &AttributedGraph, m: &Matching) -> String {
    let mut out = String::new();
    for a in 0..filter.num_vertices() {
        let target = m
            .filter_preimage(a)
            .map_or("eps".to_string(), |i| g.id(i).to_string());
        let _ = writeln!(out, "  filter {} -> {}", filter.id(a), target);
    }
    out
}

fn cmd_match(args: MatchArgs) -> Result<()> {
    let g = load_graph(&args.graph)?;
    let filter_graph = load_graph(&args.filter)?;
    let f = FilterGraph::from_graph(&filter_graph)?;
    let objective = if args.edges {
        Objective::Full
    } else {
        Objective::VerticesOnly
    };
    let (m, solver) = if args.brute {
        (gms_brute_force(&g, &f, objective)?, "exhaustive")
    } else if args.edges {
        (gms_bp_edges(&g, &f)?, "bipartite")
    } else {
        (gms_no_edges(&g, &f)?, "lsap")
    };
    println!("solver {solver}, score {}", m.score);
    print!("{}", format_matching(&g, &filter_graph, &m));
    if args.edges && !args.brute {
        if f.num_vertices() <= BRUTE_FORCE_MAX_FILTER {
            let exact = gms_brute_force(&g, &f, objective)?;
            println!("exact score {}, gap {}", exact.score, exact.score - m.score);
        } else {
            println!("filter too large for the exhaustive comparison");
        }
    }
    Ok(())
}
