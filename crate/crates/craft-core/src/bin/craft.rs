//! Command-line front end: dataset generation, algorithm dispatch, lambda
//! selection, parameter sweeps, and result emission.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use craft_core::baselines::{binary_entropy_fit, dpmeans_fit, dprf_fit, one_hot, InitMode};
use craft_core::engine::SINGLETON_SMOOTHING;
use craft_core::io::{
    emit, load_dataset, write_masks_csv, write_result, ResultMetrics, RunResult,
};
use craft_core::lambda::{farthest_first_lambda, CraftProbe, SquaredEuclideanProbe};
use craft_core::metrics::{nmi, purity};
use craft_core::model::{Dataset, FeatureSlot};
use craft_core::synth::{
    config_a, gen_categorical, gen_numeric, numeric_config, subspace3_categorical,
    subspace3_numeric, CategoricalSubspaceSpec, NumericSubspaceSpec,
};
use craft_core::{
    craft_fit, BudgetMode, ClusteringResult, CraftError, Hyperparams, Result, Rho,
};

#[derive(Parser)]
#[command(name = "craft", version, about = "Nonparametric clustering with cluster-specific feature selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a clustering algorithm to a CSV dataset and write a result JSON.
    Run(Box<RunArgs>),
    /// Generate a planted-subspace synthetic dataset as CSV + schema JSON.
    Gen(GenArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algorithm {
    Craft,
    Dpmeans,
    #[value(name = "dpmeans-r")]
    DpmeansR,
    Dprf,
    #[value(name = "binary-entropy")]
    BinaryEntropy,
}

impl Algorithm {
    fn name(self) -> &'static str {
        match self {
            Algorithm::Craft => "craft",
            Algorithm::Dpmeans => "dpmeans",
            Algorithm::DpmeansR => "dpmeans-r",
            Algorithm::Dprf => "dprf",
            Algorithm::BinaryEntropy => "binary-entropy",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Fixed,
    Approx,
}

#[derive(Args)]
struct RunArgs {
    /// Data CSV with a header row matching the schema column names.
    #[arg(long)]
    data: PathBuf,
    /// Schema JSON describing column names, kinds, and the label column.
    #[arg(long)]
    schema: PathBuf,
    #[arg(long, value_enum)]
    algorithm: Algorithm,
    /// Explicit cluster-penalty value (exactly one of --lambda/--target-k).
    #[arg(long)]
    lambda: Option<f64>,
    /// Derive lambda from a farthest-first traversal to this cluster count.
    #[arg(long)]
    target_k: Option<usize>,
    /// Fixed feature budget as a fraction of D (craft, dprf).
    #[arg(long)]
    m: Option<f64>,
    /// Prior spread parameter: a number in (0, m(1-m)) or "auto".
    #[arg(long, default_value = "auto")]
    rho: String,
    /// Feature-budget mode for craft.
    #[arg(long, value_enum, default_value_t = Mode::Fixed)]
    mode: Mode,
    /// Categorical selection threshold in approx mode.
    #[arg(long, default_value_t = 0.85)]
    eps_c: f64,
    /// Numeric variance threshold in approx mode.
    #[arg(long, default_value_t = 5.0)]
    eps_v: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = craft_core::model::DEFAULT_MAX_ITERS)]
    max_iters: usize,
    /// Pseudo-count for categorical frequency estimates.
    #[arg(long, default_value_t = craft_core::model::DEFAULT_SMOOTHING)]
    smoothing: f64,
    /// Result JSON path (a directory when --sweep is given).
    #[arg(long)]
    out: PathBuf,
    /// Optional K x D mask matrix CSV.
    #[arg(long)]
    masks_out: Option<PathBuf>,
    /// JSON object with optional lists over "m", "eps_c", "eps_v", "seeds";
    /// runs the cartesian product and writes one result file per entry.
    #[arg(long)]
    sweep: Option<String>,
    /// One-hot encode categorical columns for the numeric-only algorithms.
    #[arg(long)]
    one_hot: bool,
}

#[derive(Args)]
struct GenArgs {
    /// Generator spec JSON: {"categorical": {...}} or {"numeric": {...}}.
    #[arg(long, conflicts_with = "preset")]
    spec: Option<PathBuf>,
    /// Built-in configuration by name.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Seed override for --preset.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output data CSV path.
    #[arg(long)]
    data: PathBuf,
    /// Output schema JSON path.
    #[arg(long)]
    schema: PathBuf,
    /// Optional planted-mask CSV (K rows x D columns of 0/1).
    #[arg(long)]
    masks_out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// 300x24 binary, three disjoint 8-feature blocks.
    ConfigA,
    /// 300x36 numeric, overlapping blocks at means 1/5/10.
    Numeric,
    /// 24-feature binary with non-uniform overlapping subspaces.
    Subspace3Categorical,
    /// 36-feature numeric with non-uniform overlapping subspaces.
    Subspace3Numeric,
}

#[derive(Deserialize)]
enum GenSpec {
    #[serde(rename = "categorical")]
    Categorical(CategoricalSubspaceSpec),
    #[serde(rename = "numeric")]
    Numeric(NumericSubspaceSpec),
}

#[derive(Deserialize, Default)]
struct SweepGrids {
    m: Option<Vec<f64>>,
    eps_c: Option<Vec<f64>>,
    eps_v: Option<Vec<f64>>,
    seeds: Option<Vec<u64>>,
}

#[derive(Serialize)]
struct SweepEntry {
    file: String,
    m: Option<f64>,
    eps_c: f64,
    eps_v: f64,
    seed: u64,
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(&args),
        Command::Gen(args) => gen(&args),
    };
    if let Err(err) = outcome {
        let payload = serde_json::json!({
            "error": { "code": err.code(), "message": err.to_string() }
        });
        eprintln!("{payload}");
        std::process::exit(1);
    }
}

fn gen(args: &GenArgs) -> Result<()> {
    let spec = match (&args.spec, args.preset) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path).map_err(|e| CraftError::Io {
                path: path.display().to_string(),
                source: e,
            })?;
            serde_json::from_str(&text).map_err(|e| CraftError::Json {
                path: path.display().to_string(),
                source: e,
            })?
        }
        (None, Some(preset)) => match preset {
            Preset::ConfigA => GenSpec::Categorical(config_a(args.seed)),
            Preset::Numeric => GenSpec::Numeric(numeric_config(args.seed)),
            Preset::Subspace3Categorical => {
                GenSpec::Categorical(subspace3_categorical(args.seed))
            }
            Preset::Subspace3Numeric => GenSpec::Numeric(subspace3_numeric(args.seed)),
        },
        _ => {
            return Err(CraftError::ConfigInvalid(
                "exactly one of --spec and --preset is required".into(),
            ))
        }
    };
    let (data, _labels, masks) = match spec {
        GenSpec::Categorical(spec) => gen_categorical(&spec)?,
        GenSpec::Numeric(spec) => gen_numeric(&spec)?,
    };
    emit(&data, &args.data, &args.schema)?;
    if let Some(path) = &args.masks_out {
        let names: Vec<String> = data.features().iter().map(|f| f.name.clone()).collect();
        let rows: Vec<Vec<u8>> = masks
            .iter()
            .map(|m| m.iter().map(|&b| u8::from(b)).collect())
            .collect();
        write_masks_csv(path, &names, &rows)?;
    }
    Ok(())
}

fn run(args: &RunArgs) -> Result<()> {
    if args.lambda.is_some() == args.target_k.is_some() {
        return Err(CraftError::ConfigInvalid(
            "exactly one of --lambda and --target-k is required".into(),
        ));
    }
    let mut data = load_dataset(&args.data, &args.schema)?;
    if args.one_hot {
        data = one_hot(&data)?;
    }
    if matches!(
        args.algorithm,
        Algorithm::Dpmeans | Algorithm::DpmeansR | Algorithm::Dprf
    ) {
        let categorical: Vec<&str> = data
            .features()
            .iter()
            .filter(|f| matches!(f.slot, FeatureSlot::Cat(_)))
            .map(|f| f.name.as_str())
            .collect();
        if !categorical.is_empty() {
            return Err(CraftError::ConfigInvalid(format!(
                "{} requires numeric features; pass --one-hot to encode categorical columns: {}",
                args.algorithm.name(),
                categorical.join(", ")
            )));
        }
    }

    match &args.sweep {
        None => {
            let result = run_one(&data, args, args.m, args.eps_c, args.eps_v, args.seed)?;
            write_result(&args.out, &result)?;
            if let Some(path) = &args.masks_out {
                let names: Vec<String> =
                    data.features().iter().map(|f| f.name.clone()).collect();
                write_masks_csv(path, &names, &result.masks)?;
            }
            Ok(())
        }
        Some(grids_json) => {
            let grids: SweepGrids =
                serde_json::from_str(grids_json).map_err(|e| CraftError::Json {
                    path: "--sweep".into(),
                    source: e,
                })?;
            run_sweep(&data, args, &grids)
        }
    }
}

fn run_sweep(data: &Dataset, args: &RunArgs, grids: &SweepGrids) -> Result<()> {
    for (name, empty) in [
        ("m", grids.m.as_ref().is_some_and(Vec::is_empty)),
        ("eps_c", grids.eps_c.as_ref().is_some_and(Vec::is_empty)),
        ("eps_v", grids.eps_v.as_ref().is_some_and(Vec::is_empty)),
        ("seeds", grids.seeds.as_ref().is_some_and(Vec::is_empty)),
    ] {
        if empty {
            return Err(CraftError::ConfigInvalid(format!(
                "sweep grid \"{name}\" must be nonempty when present"
            )));
        }
    }
    let ms: Vec<Option<f64>> = match &grids.m {
        Some(list) => list.iter().copied().map(Some).collect(),
        None => vec![args.m],
    };
    let eps_cs = grids.eps_c.clone().unwrap_or_else(|| vec![args.eps_c]);
    let eps_vs = grids.eps_v.clone().unwrap_or_else(|| vec![args.eps_v]);
    let seeds = grids.seeds.clone().unwrap_or_else(|| vec![args.seed]);

    std::fs::create_dir_all(&args.out).map_err(|e| CraftError::Io {
        path: args.out.display().to_string(),
        source: e,
    })?;
    let mut entries = Vec::new();
    for &m in &ms {
        for &eps_c in &eps_cs {
            for &eps_v in &eps_vs {
                for &seed in &seeds {
                    let file = format!("sweep_{:04}.json", entries.len());
                    entries.push(SweepEntry { file, m, eps_c, eps_v, seed });
                }
            }
        }
    }

    let threads = std::env::var("CRAFT_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(0); // 0 = rayon default (available cores)
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CraftError::ConfigInvalid(format!("thread pool: {e}")))?;
    pool.install(|| {
        use rayon::prelude::*;
        entries.par_iter().try_for_each(|entry| {
            let result = run_one(data, args, entry.m, entry.eps_c, entry.eps_v, entry.seed)?;
            write_result(&args.out.join(&entry.file), &result)
        })
    })?;

    let manifest = serde_json::json!({ "entries": entries });
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    craft_core::io::atomic_write(&args.out.join("manifest.json"), text.as_bytes())
}

fn resolve_lambda(data: &Dataset, args: &RunArgs, seed: u64) -> Result<f64> {
    if let Some(lambda) = args.lambda {
        return Ok(lambda);
    }
    let k = args.target_k.expect("validated: target_k set when lambda absent");
    match args.algorithm {
        Algorithm::Dpmeans => {
            farthest_first_lambda(data, k, &SquaredEuclideanProbe, InitMode::GlobalMean, seed)
        }
        Algorithm::DpmeansR | Algorithm::Dprf => {
            farthest_first_lambda(data, k, &SquaredEuclideanProbe, InitMode::RandomPoint, seed)
        }
        Algorithm::Craft | Algorithm::BinaryEntropy => {
            let probe = CraftProbe { smoothing: SINGLETON_SMOOTHING };
            farthest_first_lambda(data, k, &probe, InitMode::RandomPoint, seed)
        }
    }
}

fn require_m(m: Option<f64>, algorithm: Algorithm) -> Result<f64> {
    m.ok_or_else(|| {
        CraftError::ConfigInvalid(format!("--m is required for {}", algorithm.name()))
    })
}

fn parse_rho(text: &str) -> Result<Rho> {
    if text == "auto" {
        return Ok(Rho::AUTO);
    }
    text.parse::<f64>()
        .map(Rho::Value)
        .map_err(|_| CraftError::ConfigInvalid(format!("--rho must be a number or \"auto\", got {text:?}")))
}

fn run_one(
    data: &Dataset,
    args: &RunArgs,
    m: Option<f64>,
    eps_c: f64,
    eps_v: f64,
    seed: u64,
) -> Result<RunResult> {
    let lambda = resolve_lambda(data, args, seed)?;
    let fit: ClusteringResult = match args.algorithm {
        Algorithm::Craft => {
            let mut hp = Hyperparams::new(lambda, require_m(m, args.algorithm)?);
            hp.rho = parse_rho(&args.rho)?;
            hp.budget = match args.mode {
                Mode::Fixed => BudgetMode::Fixed,
                Mode::Approx => BudgetMode::Approx { eps_c, eps_v },
            };
            hp.smoothing = args.smoothing;
            hp.max_iters = args.max_iters;
            hp.seed = seed;
            craft_fit(data, &hp)?
        }
        Algorithm::Dpmeans => {
            dpmeans_fit(data, lambda, InitMode::GlobalMean, seed, args.max_iters)?
        }
        Algorithm::DpmeansR => {
            dpmeans_fit(data, lambda, InitMode::RandomPoint, seed, args.max_iters)?
        }
        Algorithm::Dprf => dprf_fit(
            data,
            lambda,
            require_m(m, args.algorithm)?,
            parse_rho(&args.rho)?,
            seed,
            args.max_iters,
        )?,
        Algorithm::BinaryEntropy => {
            binary_entropy_fit(data, lambda, seed, args.max_iters, args.smoothing)?
        }
    };
    let metrics = match data.labels() {
        Some(labels) => Some(ResultMetrics {
            purity: purity(&fit.state.z, labels)?,
            nmi: nmi(&fit.state.z, labels)?,
        }),
        None => None,
    };
    Ok(RunResult {
        algorithm: args.algorithm.name().to_string(),
        k: fit.state.k_plus,
        assignments: fit.state.z,
        masks: fit
            .state
            .masks
            .iter()
            .map(|mask| mask.iter().map(|&b| u8::from(b)).collect())
            .collect(),
        objective: fit.objective,
        objective_trace: fit.objective_trace,
        iterations: fit.iterations,
        converged: fit.converged,
        lambda_used: lambda,
        metrics,
        seed,
    })
}
