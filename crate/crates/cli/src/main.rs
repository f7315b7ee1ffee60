use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crop_core::gridworld::{generate_maze, optimal_return, shift_test, shift_train, shortest_path, Layout};
use crop_core::harness::{
    dominant_action_heatmap, plot_curves, read_metrics, run_experiment, validate_and_evaluate, CurveSet, EnvFamily,
    EnvSuite, RunConfig, TrainingMode,
};
use crop_core::observe::ObsMethod;
use crop_core::optimize::{Algorithm, Checkpoint};

#[derive(Parser)]
#[command(name = "crop", version, about = "Compact reshaped observations for gridworld policy optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one or more seeds and write metrics and checkpoints.
    Train(TrainArgs),
    /// Validation and evaluation return of a checkpoint.
    Evaluate {
        checkpoint: PathBuf,
        /// Round index for the stochastic evaluation streams.
        #[arg(long, default_value_t = 0)]
        round: u64,
    },
    /// Dominant-action heatmap of a checkpoint over a layout.
    Heatmap {
        checkpoint: PathBuf,
        /// `train`, `test`, or a map file.
        #[arg(long, default_value = "test")]
        layout: String,
        /// CSV output (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Shortest path and optimal return of a map, printed as `PATH / RETURN`.
    Oracle {
        map: Option<PathBuf>,
        /// Generate a maze of this size instead of reading a map.
        #[arg(long, conflicts_with = "map")]
        maze: Option<usize>,
        #[arg(long, default_value_t = 0, requires = "maze")]
        seed: u64,
    },
    /// Training curves of one or more run directories as SVG.
    Plot {
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        title: Option<String>,
    },
}

#[derive(Args, Default)]
struct TrainArgs {
    #[arg(long)]
    algo: Option<String>,
    #[arg(long)]
    obs: Option<String>,
    #[arg(long)]
    env: Option<String>,
    /// `single` or `pool`.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long, conflicts_with = "seeds")]
    seed: Option<u64>,
    /// Train seeds 0..N.
    #[arg(long)]
    seeds: Option<u64>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    eval_every: Option<u64>,
    /// Absolute validation return for early stopping, or `none`.
    #[arg(long)]
    threshold: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file with any of the flags above; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Radius window half-sizes, `R` or `R,C`.
    #[arg(long)]
    rho: Option<String>,
    #[arg(long)]
    eta: Option<usize>,
    /// Episodes per maze evaluation.
    #[arg(long)]
    episodes: Option<usize>,
    /// Write 0 in the `wall_s` column so metrics are reproducible byte for byte.
    #[arg(long)]
    no_wall_clock: bool,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    algo: Option<String>,
    obs: Option<String>,
    env: Option<String>,
    mode: Option<String>,
    seed: Option<u64>,
    seeds: Option<u64>,
    steps: Option<u64>,
    eval_every: Option<u64>,
    threshold: Option<serde_json::Value>,
    out: Option<PathBuf>,
    rho: Option<serde_json::Value>,
    eta: Option<usize>,
    episodes: Option<usize>,
    no_wall_clock: Option<bool>,
}

fn parse_threshold(s: &str) -> Result<Option<f64>> {
    if s.eq_ignore_ascii_case("none") {
        return Ok(None);
    }
    Ok(Some(s.parse().with_context(|| format!("invalid threshold {s:?}"))?))
}

fn parse_rho(s: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |p: &str| p.parse::<usize>().with_context(|| format!("invalid radius {s:?}"));
    match parts.as_slice() {
        [r] => Ok((num(r)?, num(r)?)),
        [r, c] => Ok((num(r)?, num(c)?)),
        _ => bail!("invalid radius {s:?}, expected R or R,C"),
    }
}

fn json_to_arg(v: serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s,
        serde_json::Value::Null => "none".into(),
        serde_json::Value::Array(items) => items.iter().map(|i| json_to_arg(i.clone())).collect::<Vec<_>>().join(","),
        other => other.to_string(),
    }
}

/// Merges the optional config file under the command-line flags.
fn merge(args: TrainArgs) -> Result<TrainArgs> {
    let file = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<FileConfig>(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => FileConfig::default(),
    };
    let (seed, seeds) = if args.seed.is_some() || args.seeds.is_some() {
        (args.seed, args.seeds)
    } else {
        (file.seed, file.seeds)
    };
    Ok(TrainArgs {
        algo: args.algo.or(file.algo),
        obs: args.obs.or(file.obs),
        env: args.env.or(file.env),
        mode: args.mode.or(file.mode),
        seed,
        seeds,
        steps: args.steps.or(file.steps),
        eval_every: args.eval_every.or(file.eval_every),
        threshold: args.threshold.or(file.threshold.map(json_to_arg)),
        out: args.out.or(file.out),
        config: None,
        rho: args.rho.or(file.rho.map(json_to_arg)),
        eta: args.eta.or(file.eta),
        episodes: args.episodes.or(file.episodes),
        no_wall_clock: args.no_wall_clock || file.no_wall_clock.unwrap_or(false),
    })
}

fn run_config(args: TrainArgs) -> Result<RunConfig> {
    let args = merge(args)?;
    let algorithm: Algorithm = args.algo.as_deref().unwrap_or("ppo").parse()?;
    let method: ObsMethod = args.obs.as_deref().unwrap_or("radius").parse()?;
    let env: EnvFamily = args.env.as_deref().unwrap_or("shift").parse()?;
    let mode: TrainingMode = match &args.mode {
        Some(m) => m.parse()?,
        None if env == EnvFamily::Shift => TrainingMode::Single,
        None => TrainingMode::Pool,
    };
    let mut config = RunConfig::new(algorithm, method, env, mode);
    if let Some(steps) = args.steps {
        config.total_steps = steps;
    }
    if let Some(every) = args.eval_every {
        config.eval_interval = every;
    }
    if let Some(episodes) = args.episodes {
        config.eval_episodes = episodes;
    }
    if let Some(t) = &args.threshold {
        config.threshold = parse_threshold(t)?;
    }
    if let Some(out) = args.out {
        config.out_dir = out;
    } else {
        config.out_dir = PathBuf::from("runs").join(config.label());
    }
    if let Some(rho) = &args.rho {
        config.obs.radius = parse_rho(rho)?;
    }
    if let Some(eta) = args.eta {
        config.obs.nearest = eta;
    }
    config.seeds = match (args.seed, args.seeds) {
        (Some(s), _) => vec![s],
        (None, Some(n)) => (0..n).collect(),
        (None, None) => vec![0],
    };
    config.record_wall_clock = !args.no_wall_clock;
    config.validate()?;
    config.obs.validate()?;
    Ok(config)
}

fn train(args: TrainArgs) -> Result<()> {
    let config = run_config(args)?;
    println!(
        "training {} for {} steps, seeds {:?} -> {}",
        config.label(),
        config.total_steps,
        config.seeds,
        config.out_dir.display()
    );
    for outcome in run_experiment(&config)? {
        let last = outcome.last_record();
        println!(
            "seed {}: {} steps{}, validation {}, evaluation {}",
            outcome.seed,
            outcome.steps,
            if outcome.stopped_early { " (early stop)" } else { "" },
            last.map_or("-".into(), |r| r.validation_return.to_string()),
            last.map_or("-".into(), |r| r.evaluation_return.to_string()),
        );
    }
    Ok(())
}

fn load_checkpoint(path: &Path) -> Result<Checkpoint<RunConfig>> {
    Checkpoint::load(path).with_context(|| format!("loading checkpoint {}", path.display()))
}

fn evaluate(path: &Path, round: u64) -> Result<()> {
    let ck = load_checkpoint(path)?;
    let suite = EnvSuite::build(ck.config.env, ck.config.mode, ck.config.eval_episodes)?;
    let (v, e) = validate_and_evaluate(&ck.params, &ck.config, &suite, ck.seed, round)?;
    println!("validation_return {v}");
    println!("evaluation_return {e}");
    Ok(())
}

fn read_layout(spec: &str) -> Result<Arc<Layout>> {
    match spec {
        "train" => Ok(shift_train()),
        "test" => Ok(shift_test()),
        path => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
            let name = Path::new(path).file_stem().and_then(|s| s.to_str()).unwrap_or("map");
            Ok(Arc::new(Layout::parse(name, &text)?))
        }
    }
}

fn heatmap(path: &Path, layout: &str, out: Option<&Path>, svg: Option<&Path>) -> Result<()> {
    let ck = load_checkpoint(path)?;
    let hm = dominant_action_heatmap(&ck.params, &ck.config.obs, read_layout(layout)?)?;
    match out {
        Some(p) => fs::write(p, hm.to_csv()).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{}", hm.to_csv()),
    }
    if let Some(p) = svg {
        fs::write(p, hm.to_svg()).with_context(|| format!("writing {}", p.display()))?;
    }
    let failing = hm.failing_cells();
    if !failing.is_empty() {
        eprintln!("greedy policy misses the goal from {} cell(s): {:?}", failing.len(), failing);
    }
    Ok(())
}

fn oracle(map: Option<&Path>, maze: Option<usize>, seed: u64) -> Result<()> {
    let layout = match (map, maze) {
        (Some(p), _) => read_layout(p.to_str().context("non-UTF-8 path")?)?,
        (None, Some(size)) => {
            let l = Arc::new(generate_maze(size, size, seed)?);
            print!("{l}");
            l
        }
        (None, None) => bail!("give a map file or --maze SIZE"),
    };
    println!("{} / {}", shortest_path(&layout)?, optimal_return(&layout)?);
    Ok(())
}

fn plot(runs: &[PathBuf], out: &Path, title: Option<&str>) -> Result<()> {
    let mut sets = Vec::new();
    let mut threshold = None;
    for dir in runs {
        let cfg_path = dir.join("config.json");
        let config: RunConfig = serde_json::from_str(
            &fs::read_to_string(&cfg_path).with_context(|| format!("reading {}", cfg_path.display()))?,
        )?;
        threshold = threshold.or(config.threshold);
        let mut records = Vec::new();
        for seed in &config.seeds {
            let path = dir.join(format!("metrics_seed{seed}.csv"));
            if path.exists() {
                records.extend(read_metrics(&path)?);
            }
        }
        if records.is_empty() {
            bail!("no metrics found in {}", dir.display());
        }
        sets.push(CurveSet {
            label: format!("{}-{}", config.algorithm, config.obs.method),
            records,
        });
    }
    let svg = plot_curves(&sets, threshold, title.unwrap_or("returns"));
    fs::write(out, svg).with_context(|| format!("writing {}", out.display()))?;
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Train(args) => train(args),
        Command::Evaluate { checkpoint, round } => evaluate(&checkpoint, round),
        Command::Heatmap {
            checkpoint,
            layout,
            out,
            svg,
        } => heatmap(&checkpoint, &layout, out.as_deref(), svg.as_deref()),
        Command::Oracle { map, maze, seed } => oracle(map.as_deref(), maze, seed),
        Command::Plot { runs, out, title } => plot(&runs, &out, title.as_deref()),
    }
}
