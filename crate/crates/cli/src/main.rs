use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nstorm_core::Error;
use nstorm_core::harness::{
    RunConfig, RunnerOptions, Summary, SweepSpec, compare_methods, load_config, run_single,
    run_sweep,
};
use nstorm_core::problems::{Instance, generate_features, generate_mdp, make_imbalanced_gaussian};

/// Output directory override, below `--out-dir` and above the config's `output`.
const OUT_DIR_ENV: &str = "NSTORM_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "nstorm",
    version,
    about = "Stochastic compositional minimax benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunFlags {
    /// Directory for metrics.csv, summary.json and friends.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Worker threads; 0 uses one per core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Print nothing on success.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run every seed of one config.
    Run {
        config: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Run the Cartesian product of a config's [sweep] axes.
    Sweep {
        config: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Run several methods on one problem and compare them at equal sample budget.
    Compare {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Write a random MDP instance for policy evaluation.
    GenMdp {
        #[arg(long)]
        states: usize,
        #[arg(long, default_value_t = 10)]
        features: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write an imbalanced two-class Gaussian data set for AUC maximization.
    GenAucData {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 10)]
        dim: usize,
        /// Fraction of positive examples.
        #[arg(long, default_value_t = 0.1)]
        imratio: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    Validation(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Parse { .. } | Error::Construction(_) => {
                Failure::Validation(e.to_string())
            }
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn out_dir(flags: &RunFlags, configured: Option<&Path>, name: &str) -> PathBuf {
    if let Some(d) = &flags.out_dir {
        return d.clone();
    }
    if let Some(d) = std::env::var_os(OUT_DIR_ENV).filter(|d| !d.is_empty()) {
        return PathBuf::from(d);
    }
    configured.map_or_else(|| Path::new("out").join(name), Path::to_path_buf)
}

fn options(flags: &RunFlags) -> RunnerOptions {
    RunnerOptions {
        workers: flags.workers,
    }
}

fn report(flags: &RunFlags, s: &Summary) {
    if flags.quiet {
        return;
    }
    let line = match s.aggregate.iter().next() {
        Some((col, stats)) => format!("median final {col} {:.6e}", stats.median),
        None => "no finite metrics".to_string(),
    };
    eprintln!(
        "{}: {}/{} seeds ok, {line}",
        s.run_id,
        s.survivors,
        s.seeds.len()
    );
    for seed in s.seeds.iter().filter(|seed| seed.error.is_some()) {
        eprintln!(
            "  seed {} failed at t={}: {}",
            seed.seed,
            seed.final_t,
            seed.error.as_deref().unwrap_or("")
        );
    }
}

/// A run in which no seed survived counts as a runtime failure.
fn check_survivors<'a>(summaries: impl IntoIterator<Item = &'a Summary>) -> Result<(), Failure> {
    let dead: Vec<&str> = summaries
        .into_iter()
        .filter(|s| s.survivors == 0)
        .map(|s| s.run_id.as_str())
        .collect();
    if dead.is_empty() {
        Ok(())
    } else {
        Err(Failure::Runtime(format!(
            "every seed failed in: {}",
            dead.join(", ")
        )))
    }
}

fn wrote(flags: &RunFlags, dir: &Path) {
    if !flags.quiet {
        eprintln!("wrote {}", dir.display());
    }
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run { config, flags } => {
            let cfg = load_config(&config)?;
            let out = run_single(&cfg, options(&flags))?;
            let dir = out_dir(&flags, cfg.output.as_deref(), &cfg.name);
            out.write(&dir)?;
            report(&flags, &out.summary);
            wrote(&flags, &dir);
            check_survivors([&out.summary])
        }
        Command::Sweep { config, flags } => {
            let spec = SweepSpec::load(&config)?;
            let base: RunConfig = spec
                .points()?
                .into_iter()
                .next()
                .map(|(_, c)| c)
                .ok_or_else(|| Failure::Validation("sweep has no points".into()))?;
            let out = run_sweep(&spec, options(&flags))?;
            let dir = out_dir(&flags, base.output.as_deref(), &base.name);
            out.write(&dir)?;
            for p in &out.points {
                report(&flags, &p.output.summary);
            }
            wrote(&flags, &dir);
            check_survivors(out.points.iter().map(|p| &p.output.summary))
        }
        Command::Compare { configs, flags } => {
            let cfgs = configs
                .iter()
                .map(load_config)
                .collect::<Result<Vec<_>, _>>()?;
            let cmp = compare_methods(&cfgs, options(&flags))?;
            let dir = out_dir(&flags, None, "compare");
            cmp.write(&dir)?;
            for r in &cmp.runs {
                report(&flags, &r.summary);
            }
            if !flags.quiet {
                eprintln!("budget {} samples", cmp.summary.budget);
                for (metric, w) in &cmp.summary.winners {
                    eprintln!("  {metric}: {}", w.winner);
                }
            }
            wrote(&flags, &dir);
            check_survivors(cmp.runs.iter().map(|r| &r.summary))
        }
        Command::GenMdp {
            states,
            features,
            seed,
            out,
        } => {
            let (transitions, rewards) = generate_mdp(states, seed)?;
            let instance = Instance::Mdp {
                seed,
                transitions,
                rewards,
                features: generate_features(states, features, seed.wrapping_add(1)),
            };
            instance.save(&out)?;
            Ok(())
        }
        Command::GenAucData {
            samples,
            dim,
            imratio,
            seed,
            out,
        } => {
            let data = make_imbalanced_gaussian(samples, dim, imratio, seed)?;
            Instance::Auc { seed, data }.save(&out)?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
