//! Experiment orchestration: seeded runs in parallel, aggregation and
//! reports.
//!
//! A config is a flat JSON object; unknown keys are rejected. Example:
//!
//! ```json
//! {
//!   "family": "exp_exp", "theta": 1.0, "gamma": 3.0, "zeta": 0.5, "n": 20,
//!   "scheme": "equidistant", "delta": 0.2, "k": 20000,
//!   "runs": 100, "seed": 1, "out": "out/expexp"
//! }
//! ```

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::degree_model::Divisor;
use crate::error::{Error, Result};
use crate::estimator::{compute_stats, delta_method_cov, empirical_sigma, solve_moments, EstimationResult, ModelFamily, MomentStats, SolverOptions, Structure};
use crate::graph_sim::{simulate_with, split_seed, Engine, GraphModelSpec, LifetimeFamily, SamplingScheme, Side, SnapshotSeries};
use crate::numeric::mean_and_std;
use crate::series_io::write_series_csv;
use crate::stat_tests::{histogram_density, ks_two_sample, qq_points, write_xy_csv, KsVerdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureKind {
    #[default]
    Symmetric,
    InOut,
}

/// Lifetime pairs. The first name is the on-time law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    /// On-times `Exp(zeta)` common to all edges, off-rates derived.
    ExpExp,
    /// Off-times `Exp(zeta)` common to all edges, on-rates derived.
    ExpExpOff,
    /// Off-times Weibull with shape `zeta`.
    ExpWeibull,
    /// Off-times Pareto with shape `zeta`.
    ExpPareto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Equidistant,
    Poisson,
}

fn default_n() -> usize {
    20
}
fn default_theta() -> f64 {
    1.0
}
fn default_scale() -> f64 {
    1.0
}
fn default_bins() -> usize {
    30
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub structure: StructureKind,
    pub family: FamilyKind,
    /// `theta` of the symmetric model, `theta_plus` of the in/out model.
    #[serde(default = "default_theta")]
    pub theta: f64,
    /// `gamma`, or `gamma_plus` of the in/out model.
    pub gamma: f64,
    #[serde(default)]
    pub gamma_minus: Option<f64>,
    pub zeta: f64,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default)]
    pub divisor: Divisor,
    /// Scale of the Weibull or Pareto law.
    #[serde(default = "default_scale")]
    pub scale: f64,
    pub scheme: SchemeKind,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub xi: Option<f64>,
    pub k: usize,
    pub runs: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub emit_qq: bool,
    #[serde(default)]
    pub emit_hist: bool,
    #[serde(default = "default_bins")]
    pub bins: usize,
    /// Number of leading runs whose series are written out.
    #[serde(default)]
    pub save_series: usize,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub engine: Engine,
    #[serde(default = "default_true")]
    pub estimate: bool,
    #[serde(default)]
    pub full_system: bool,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive and finite, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        positive("theta", self.theta)?;
        if !(self.gamma > 1.0 && self.gamma.is_finite()) {
            return Err(Error::Config(format!("gamma must exceed 1, got {}", self.gamma)));
        }
        match (self.structure, self.gamma_minus) {
            (StructureKind::InOut, Some(g)) if g > 1.0 && g.is_finite() => {}
            (StructureKind::InOut, _) => return Err(Error::Config("in_out needs gamma_minus > 1".into())),
            (StructureKind::Symmetric, Some(_)) => return Err(Error::Config("gamma_minus applies to in_out only".into())),
            _ => {}
        }
        if self.structure == StructureKind::InOut && self.divisor != Divisor::M {
            return Err(Error::Config("the in_out model uses divisor m".into()));
        }
        positive("zeta", self.zeta)?;
        if self.family == FamilyKind::ExpPareto && self.zeta <= 1.0 {
            return Err(Error::Config(format!("Pareto shape must exceed 1, got {}", self.zeta)));
        }
        positive("scale", self.scale)?;
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        match (self.scheme, self.delta, self.xi) {
            (SchemeKind::Equidistant, Some(d), None) => positive("delta", d)?,
            (SchemeKind::Poisson, None, Some(x)) => positive("xi", x)?,
            (SchemeKind::Equidistant, _, _) => return Err(Error::Config("equidistant scheme needs delta and no xi".into())),
            (SchemeKind::Poisson, _, _) => return Err(Error::Config("poisson scheme needs xi and no delta".into())),
        }
        if self.scheme == SchemeKind::Equidistant && !matches!(self.family, FamilyKind::ExpExp | FamilyKind::ExpExpOff) {
            return Err(Error::Config("equidistant sampling needs exponential lifetimes".into()));
        }
        if self.k < 3 {
            return Err(Error::Config(format!("k must be at least 3, got {}", self.k)));
        }
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if self.bins == 0 {
            return Err(Error::Config("bins must be at least 1".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        Ok(())
    }

    pub fn model_family(&self) -> ModelFamily {
        let (homogeneous, lifetime) = match self.family {
            FamilyKind::ExpExp => (Side::On, LifetimeFamily::Exponential),
            FamilyKind::ExpExpOff => (Side::Off, LifetimeFamily::Exponential),
            FamilyKind::ExpWeibull => (Side::Off, LifetimeFamily::Weibull { scale: self.scale }),
            FamilyKind::ExpPareto => (Side::Off, LifetimeFamily::Pareto { scale: self.scale }),
        };
        let structure = match self.structure {
            StructureKind::Symmetric => Structure::Symmetric { n: self.n, divisor: self.divisor },
            StructureKind::InOut => Structure::InOut { n: self.n, theta_plus: self.theta },
        };
        ModelFamily { structure, homogeneous, lifetime }
    }

    /// Generating parameters in the order of [`ModelFamily::param_names`].
    pub fn truth(&self) -> [f64; 3] {
        match self.structure {
            StructureKind::Symmetric => [self.theta, self.gamma, self.zeta],
            StructureKind::InOut => [self.gamma, self.gamma_minus.unwrap_or(f64::NAN), self.zeta],
        }
    }

    pub fn spec(&self) -> Result<GraphModelSpec> {
        self.model_family().build(&self.truth())
    }

    pub fn sampling_scheme(&self) -> SamplingScheme {
        match self.scheme {
            SchemeKind::Equidistant => SamplingScheme::Equidistant { delta: self.delta.unwrap_or(f64::NAN), k: self.k },
            SchemeKind::Poisson => SamplingScheme::Poisson { xi: self.xi.unwrap_or(f64::NAN), k: self.k },
        }
    }

    pub fn run_seed(&self, run: usize) -> u64 {
        split_seed(self.seed, run as u64)
    }

    fn solver_options(&self) -> SolverOptions {
        SolverOptions { full_system: self.full_system, ..SolverOptions::default() }
    }
}

/// Result of one run; a failed run keeps its error message.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub run: usize,
    pub seed: u64,
    pub stats: Option<MomentStats>,
    pub estimate: Option<EstimationResult>,
    pub error: Option<String>,
}

impl RunOutcome {
    pub fn converged(&self) -> bool {
        self.estimate.as_ref().map_or(false, |e| e.solver.converged)
    }

    fn status(&self) -> &'static str {
        match (&self.error, &self.estimate) {
            (Some(_), _) => "error",
            (None, Some(e)) if e.solver.converged => "ok",
            (None, Some(_)) => "not_converged",
            (None, None) => "stats_only",
        }
    }
}

fn with_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let threads = workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| Error::Config(e.to_string()))?;
    Ok(pool.install(f))
}

fn one_run(config: &ExperimentConfig, spec: &GraphModelSpec, run: usize, estimate: bool, keep_series: bool) -> (RunOutcome, Option<SnapshotSeries>) {
    let seed = config.run_seed(run);
    let mut outcome = RunOutcome { run, seed, stats: None, estimate: None, error: None };
    let series = match simulate_with(spec, &config.sampling_scheme(), seed, config.engine) {
        Ok(s) => s,
        Err(e) => {
            outcome.error = Some(e.to_string());
            return (outcome, None);
        }
    };
    match compute_stats(&series) {
        Ok(stats) => {
            outcome.stats = Some(stats);
            if estimate {
                match solve_moments(&stats, &config.model_family(), &series.scheme, &config.solver_options()) {
                    Ok(r) => outcome.estimate = Some(r),
                    Err(e) => outcome.error = Some(e.to_string()),
                }
            }
        }
        Err(e) => outcome.error = Some(e.to_string()),
    }
    (outcome, keep_series.then_some(series))
}

/// Simulates (and optionally estimates) every run, in run order.
pub fn run_all(config: &ExperimentConfig, estimate: bool) -> Result<Vec<RunOutcome>> {
    Ok(run_all_with_series(config, estimate)?.0)
}

fn run_all_with_series(config: &ExperimentConfig, estimate: bool) -> Result<(Vec<RunOutcome>, Vec<SnapshotSeries>)> {
    config.validate()?;
    let spec = config.spec()?;
    let results: Vec<_> = with_pool(config.workers, || {
        (0..config.runs)
            .into_par_iter()
            .map(|run| one_run(config, &spec, run, estimate, run < config.save_series))
            .collect()
    })?;
    let mut outcomes = Vec::with_capacity(results.len());
    let mut series = Vec::new();
    for (o, s) in results {
        outcomes.push(o);
        series.extend(s);
    }
    Ok((outcomes, series))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSummary {
    pub name: String,
    pub truth: f64,
    pub mean: f64,
    /// Sample standard deviation over converged runs (divisor `L - 1`).
    pub std: f64,
    /// `sqrt(Sigma°_ii / K)` from the delta method with the empirical
    /// covariance of the statistics.
    pub delta_std: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub runs: usize,
    pub converged: usize,
    pub not_converged: usize,
    pub failed: usize,
    pub params: Vec<ParamSummary>,
    /// Mean and sample standard deviation of `(s_hat, rho1_hat, rho2_hat)`.
    pub stats_mean: [f64; 3],
    pub stats_std: [f64; 3],
    pub sigma_hat: Option<[[f64; 3]; 3]>,
    pub delta_cov: Option<[[f64; 3]; 3]>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub runs: Vec<RunOutcome>,
    pub summary: ExperimentSummary,
}

impl ExperimentReport {
    /// Estimates of parameter `idx` over converged runs, in run order.
    pub fn estimates(&self, idx: usize) -> Vec<f64> {
        self.runs.iter().filter(|r| r.converged()).filter_map(|r| r.estimate.as_ref()).map(|e| e.params[idx]).collect()
    }

    pub fn stats(&self) -> Vec<MomentStats> {
        self.runs.iter().filter_map(|r| r.stats).collect()
    }

    pub fn summary_text(&self) -> String {
        let s = &self.summary;
        let mut out = format!(
            "runs {} converged {} not converged {} failed {}\n",
            s.runs, s.converged, s.not_converged, s.failed
        );
        for p in &s.params {
            let delta = p.delta_std.map_or(String::new(), |d| format!("  delta-method std {d:.4}"));
            out += &format!("{:<12} truth {:<8} mean {:.4}  std {:.4}{delta}\n", p.name, p.truth, p.mean, p.std);
        }
        out += &format!(
            "s_hat {:.4} ({:.4})  rho1_hat {:.4} ({:.4})  rho2_hat {:.4} ({:.4})\n",
            s.stats_mean[0], s.stats_std[0], s.stats_mean[1], s.stats_std[1], s.stats_mean[2], s.stats_std[2]
        );
        for n in &s.notes {
            out += &format!("note: {n}\n");
        }
        out
    }

    /// Writes `runs.csv`, `summary.json` and the optional histogram and QQ
    /// files into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        write_runs_csv(&dir.join("runs.csv"), &self.config.model_family().param_keys(), &self.runs)?;
        let json = serde_json::json!({ "config": self.config, "summary": self.summary });
        std::fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&json)?)?;
        let names = self.config.model_family().param_names();
        for (idx, name) in names.iter().enumerate() {
            let sample = self.estimates(idx);
            if sample.is_empty() {
                continue;
            }
            if self.config.emit_hist {
                write_xy_csv(&dir.join(format!("hist_{name}.csv")), &histogram_density(&sample, self.config.bins)?)?;
            }
            if self.config.emit_qq && sample.len() >= 2 {
                let (mean, std) = mean_and_std(&sample);
                if std > 0.0 {
                    write_xy_csv(&dir.join(format!("qq_{name}.csv")), &qq_points(&sample, mean, std)?)?;
                }
            }
        }
        Ok(())
    }
}

fn summarize(config: &ExperimentConfig, runs: &[RunOutcome]) -> ExperimentSummary {
    let family = config.model_family();
    let truth = config.truth();
    let mut notes = Vec::new();
    let converged = runs.iter().filter(|r| r.converged()).count();
    let not_converged = runs.iter().filter(|r| r.estimate.is_some() && !r.converged()).count();
    let failed = runs.iter().filter(|r| r.error.is_some()).count();
    let stats: Vec<MomentStats> = runs.iter().filter_map(|r| r.stats).collect();

    let mut stats_mean = [f64::NAN; 3];
    let mut stats_std = [f64::NAN; 3];
    for i in 0..3 {
        let v: Vec<f64> = stats.iter().map(|s| s.as_array()[i]).collect();
        (stats_mean[i], stats_std[i]) = mean_and_std(&v);
    }

    let scheme = config.sampling_scheme();
    let sigma_hat = empirical_sigma(&stats, config.k).ok();
    let delta_cov = match (config.estimate, sigma_hat) {
        (true, Some(sigma)) => match delta_method_cov(&truth, &family, &scheme, &sigma) {
            Ok(c) => Some(c),
            Err(e) => {
                notes.push(format!("delta method unavailable: {e}"));
                None
            }
        },
        _ => None,
    };

    let params = if config.estimate {
        family
            .param_names()
            .iter()
            .enumerate()
            .map(|(idx, name)| {
                let sample: Vec<f64> = runs.iter().filter(|r| r.converged()).filter_map(|r| r.estimate.as_ref()).map(|e| e.params[idx]).collect();
                let (mean, std) = mean_and_std(&sample);
                ParamSummary {
                    name: name.to_string(),
                    truth: truth[idx],
                    mean,
                    std,
                    delta_std: delta_cov.map(|c| (c[idx][idx] / config.k as f64).sqrt()),
                }
            })
            .collect()
    } else {
        Vec::new()
    };
    if not_converged > 0 {
        notes.push(format!("{not_converged} run(s) did not converge and are excluded from the parameter summary"));
    }
    if failed > 0 {
        notes.push(format!("{failed} run(s) failed"));
    }
    ExperimentSummary { runs: runs.len(), converged, not_converged, failed, params, stats_mean, stats_std, sigma_hat, delta_cov, notes }
}

/// Runs the configured experiment, writes the report if `out` is set and
/// returns it.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let (runs, series) = run_all_with_series(config, config.estimate)?;
    let summary = summarize(config, &runs);
    let report = ExperimentReport { config: config.clone(), runs, summary };
    if let Some(dir) = &config.out {
        report.write(dir)?;
        for (run, s) in series.iter().enumerate() {
            write_series_csv(s, std::fs::File::create(dir.join(format!("series_{run}.csv")))?)?;
        }
    }
    Ok(report)
}

/// One row of `runs.csv`, parsed back.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub run: usize,
    pub seed: u64,
    pub status: String,
    pub params: [Option<f64>; 3],
    pub stats: Option<MomentStats>,
    pub residual: Option<f64>,
    pub iterations: Option<usize>,
    pub error: Option<String>,
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

/// Header: `run,seed,status,<param keys>,s_hat,rho1_hat,rho2_hat,k,residual,iterations,error`.
pub fn write_runs_csv(path: &Path, keys: &[&str; 3], runs: &[RunOutcome]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["run", "seed", "status"];
    header.extend_from_slice(keys);
    header.extend_from_slice(&["s_hat", "rho1_hat", "rho2_hat", "k", "residual", "iterations", "error"]);
    w.write_record(&header)?;
    for r in runs {
        let e = r.estimate.as_ref();
        let mut row = vec![r.run.to_string(), r.seed.to_string(), r.status().to_string()];
        for i in 0..3 {
            row.push(opt(e.map(|e| e.params[i])));
        }
        row.push(opt(r.stats.map(|s| s.s_hat)));
        row.push(opt(r.stats.map(|s| s.rho1_hat)));
        row.push(opt(r.stats.map(|s| s.rho2_hat)));
        row.push(opt(r.stats.map(|s| s.k)));
        row.push(opt(e.map(|e| e.solver.residual)));
        row.push(opt(e.map(|e| e.solver.iterations)));
        row.push(r.error.clone().unwrap_or_default());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn parse_opt<T: std::str::FromStr>(s: &str) -> Result<Option<T>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|_| Error::Format(format!("cannot parse {s:?}")))
}

pub fn read_runs_csv(path: &Path) -> Result<(Vec<String>, Vec<RunRow>)> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header.len() != 13 || header[..3] != ["run", "seed", "status"] {
        return Err(Error::Format(format!("{}: unexpected header {header:?}", path.display())));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let f = |i: usize| rec.get(i).unwrap_or("");
        let stats = match (parse_opt(f(6))?, parse_opt(f(7))?, parse_opt(f(8))?, parse_opt(f(9))?) {
            (Some(s_hat), Some(rho1_hat), Some(rho2_hat), Some(k)) => Some(MomentStats { s_hat, rho1_hat, rho2_hat, k }),
            _ => None,
        };
        rows.push(RunRow {
            run: parse_opt(f(0))?.ok_or_else(|| Error::Format("missing run".into()))?,
            seed: parse_opt(f(1))?.ok_or_else(|| Error::Format("missing seed".into()))?,
            status: f(2).to_string(),
            params: [parse_opt(f(3))?, parse_opt(f(4))?, parse_opt(f(5))?],
            stats,
            residual: parse_opt(f(10))?,
            iterations: parse_opt(f(11))?,
            error: Some(f(12).to_string()).filter(|s| !s.is_empty()),
        });
    }
    Ok((header[3..6].to_vec(), rows))
}

/// Two-model comparison on the statistics of `L` runs each.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualityReport {
    pub s_hat_a: Vec<f64>,
    pub s_hat_b: Vec<f64>,
    pub rho1_a: Vec<f64>,
    pub rho1_b: Vec<f64>,
    pub ks_s_hat: KsVerdict,
    pub ks_rho1: KsVerdict,
    pub mean_s_hat: (f64, f64),
    pub mean_rho1: (f64, f64),
}

impl EqualityReport {
    pub fn summary_text(&self) -> String {
        let line = |name: &str, v: &KsVerdict, m: (f64, f64)| {
            format!(
                "{name:<9} means {:.4} / {:.4}  D {:.4}  p {:.4e}  {}\n",
                m.0,
                m.1,
                v.statistic,
                v.p_value,
                if v.reject { "reject" } else { "do not reject" }
            )
        };
        line("s_hat", &self.ks_s_hat, self.mean_s_hat) + &line("rho1_hat", &self.ks_rho1, self.mean_rho1)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let v = |k: &KsVerdict| {
            serde_json::json!({ "statistic": k.statistic, "p_value": k.p_value, "reject": k.reject, "level": k.level, "n1": k.n1, "n2": k.n2 })
        };
        serde_json::json!({
            "mean_s_hat": [self.mean_s_hat.0, self.mean_s_hat.1],
            "mean_rho1_hat": [self.mean_rho1.0, self.mean_rho1.1],
            "ks_s_hat": v(&self.ks_s_hat),
            "ks_rho1_hat": v(&self.ks_rho1),
        })
    }
}

/// Simulates both models `L` times (statistics only) and tests equality of
/// the `s_hat` and `rho1_hat` distributions.
pub fn run_equality_test(a: &ExperimentConfig, b: &ExperimentConfig, level: f64) -> Result<EqualityReport> {
    a.validate()?;
    b.validate()?;
    if a.n != b.n || a.k != b.k || a.runs != b.runs || a.scheme != b.scheme || a.delta != b.delta || a.xi != b.xi {
        return Err(Error::Config("compared models must share n, k, runs and the sampling scheme".into()));
    }
    let collect = |c: &ExperimentConfig| -> Result<Vec<MomentStats>> {
        let runs = run_all(c, false)?;
        if let Some(bad) = runs.iter().find(|r| r.error.is_some()) {
            return Err(Error::Config(format!("run {} failed: {}", bad.run, bad.error.clone().unwrap_or_default())));
        }
        Ok(runs.iter().filter_map(|r| r.stats).collect())
    };
    let (sa, sb) = (collect(a)?, collect(b)?);
    let pick = |s: &[MomentStats], i: usize| -> Vec<f64> { s.iter().map(|x| x.as_array()[i]).collect() };
    let (s_hat_a, s_hat_b, rho1_a, rho1_b) = (pick(&sa, 0), pick(&sb, 0), pick(&sa, 1), pick(&sb, 1));
    let ks_s_hat = ks_two_sample(&s_hat_a, &s_hat_b, level)?;
    let ks_rho1 = ks_two_sample(&rho1_a, &rho1_b, level)?;
    let mean = |v: &[f64]| mean_and_std(v).0;
    Ok(EqualityReport {
        mean_s_hat: (mean(&s_hat_a), mean(&s_hat_b)),
        mean_rho1: (mean(&rho1_a), mean(&rho1_b)),
        s_hat_a,
        s_hat_b,
        rho1_a,
        rho1_b,
        ks_s_hat,
        ks_rho1,
    })
}
