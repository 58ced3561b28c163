use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use dyncl::degree_model::Divisor;
use dyncl::estimator::{estimate, SolverOptions};
use dyncl::experiment::{run_equality_test, run_experiment, ExperimentConfig};
use dyncl::graph_sim::simulate_with;
use dyncl::moments::{model_moments, stationary_variance};
use dyncl::series_io::{load_series, write_series_binary, write_series_csv};

#[derive(Parser)]
#[command(name = "dyncl", version, about = "Dynamic Chung-Lu graphs: snapshot simulation and method-of-moments inference")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Root seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Degree normalisation, overriding the config.
    #[arg(long, value_enum)]
    divisor: Option<DivisorArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DivisorArg {
    #[value(name = "m")]
    M,
    #[value(name = "2m")]
    TwoM,
}

#[derive(Clone, Copy, ValueEnum)]
enum SeriesFormat {
    Csv,
    Bin,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one snapshot series.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Output file (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: SeriesFormat,
    },
    /// Compute statistics and solve the moment equations for a series file.
    Estimate {
        #[command(flatten)]
        common: Common,
        /// Series file (CSV or binary); the config supplies the scheme and model family.
        #[arg(long)]
        series: PathBuf,
        /// Solve all three equations instead of eliminating theta.
        #[arg(long)]
        full_system: bool,
    },
    /// Run L seeded replications and summarise the estimates.
    Experiment {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Two-sample KS comparison of two models' snapshot statistics.
    Kstest {
        #[command(flatten)]
        common: Common,
        /// Config of the second model.
        #[arg(long)]
        config_b: PathBuf,
        /// Root seed of the second model, overriding its config.
        #[arg(long)]
        seed_b: Option<u64>,
        #[arg(long, default_value_t = 0.05)]
        level: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Print the analytic moment vector of the configured model.
    Moments {
        #[command(flatten)]
        common: Common,
    },
}

fn load(common: &Common) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(d) = common.divisor {
        config.divisor = match d {
            DivisorArg::M => Divisor::M,
            DivisorArg::TwoM => Divisor::TwoM,
        };
    }
    Ok(config)
}

fn apply_run_flags(config: &mut ExperimentConfig, out: &Option<PathBuf>, runs: Option<usize>, workers: Option<usize>) -> Result<()> {
    if out.is_some() {
        config.out = out.clone();
    }
    if let Some(r) = runs {
        config.runs = r;
    }
    if workers.is_some() {
        config.workers = workers;
    }
    config.validate()?;
    Ok(())
}

/// Writes to stdout; a closed pipe (`dyncl ... | head`) ends output quietly.
fn emit(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn print_json(value: &serde_json::Value) -> Result<()> {
    emit(&(serde_json::to_string_pretty(value)? + "\n"))
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate { common, out, format } => {
            let config = load(&common)?;
            let series = simulate_with(&config.spec()?, &config.sampling_scheme(), config.seed, config.engine)?;
            let sink: Box<dyn Write> = match &out {
                Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
                None => Box::new(BufWriter::new(io::stdout().lock())),
            };
            match format {
                SeriesFormat::Csv => write_series_csv(&series, sink)?,
                SeriesFormat::Bin if out.is_none() => bail!("binary output needs --out"),
                SeriesFormat::Bin => write_series_binary(&series, sink)?,
            }
        }
        Command::Estimate { common, series, full_system } => {
            let config = load(&common)?;
            config.validate()?;
            let series = load_series(&series, config.sampling_scheme(), config.seed)?;
            let opts = SolverOptions { full_system, ..SolverOptions::default() };
            let result = estimate(&series, &config.model_family(), &opts)?;
            print_json(&result.to_json())?;
        }
        Command::Experiment { common, out, runs, workers } => {
            let mut config = load(&common)?;
            apply_run_flags(&mut config, &out, runs, workers)?;
            let report = run_experiment(&config)?;
            emit(&report.summary_text())?;
            if let Some(dir) = &config.out {
                eprintln!("reports written to {}", dir.display());
            }
        }
        Command::Kstest { common, config_b, seed_b, level, out, runs, workers } => {
            let mut a = load(&common)?;
            let mut b = load(&Common { config: config_b, seed: seed_b, divisor: common.divisor })?;
            for c in [&mut a, &mut b] {
                apply_run_flags(c, &None, runs, workers)?;
            }
            let report = run_equality_test(&a, &b, level)?;
            emit(&report.summary_text())?;
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)?;
                std::fs::write(dir.join("equality.json"), serde_json::to_string_pretty(&report.to_json())?)?;
            }
        }
        Command::Moments { common } => {
            let config = load(&common)?;
            config.validate()?;
            let spec = config.spec()?;
            let scheme = config.sampling_scheme();
            let mv = model_moments(&spec, &scheme)?;
            print_json(&serde_json::json!({
                "scheme": scheme,
                "s": mv.s,
                "rho1": mv.rho1,
                "rho2": mv.rho2,
                "variance": stationary_variance(&spec.degrees),
            }))?;
        }
    }
    Ok(())
}
