//! Method-of-moments estimation from edge-count snapshots.
//!
//! The statistics `(s_hat, rho1_hat, rho2_hat)` are matched to the analytic
//! moments of a [`ModelFamily`]. In the symmetric power-law model `theta`
//! is eliminated through the mean, leaving two equations in
//! `(gamma, zeta)`; the in/out model with known `theta_plus` is solved as
//! a three-equation system in `(gamma_plus, gamma_minus, zeta)`.
//!
//! The solver works in `(ln(gamma - 1), ln(zeta - floor))` so the
//! parameter bounds never bind. It starts from a grid scan, runs damped
//! Newton with a finite-difference Jacobian, and falls back to
//! Nelder-Mead followed by a Newton polish.

use nalgebra::{DMatrix, DVector, Matrix3};
use serde::{Deserialize, Serialize};

use crate::degree_model::{power_law_sum, DegreeModel, Degrees, Divisor, InOutDegreeModel};
use crate::error::{Error, Result};
use crate::graph_sim::{Binding, GraphModelSpec, LifetimeFamily, SamplingScheme, Side, SnapshotSeries};
use crate::moments::{model_moments, moment_targets, poisson_sums_with, v_matrix, Transform};

/// Snapshot statistics of one series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentStats {
    pub s_hat: f64,
    pub rho1_hat: f64,
    pub rho2_hat: f64,
    pub k: usize,
}

impl MomentStats {
    pub fn as_array(&self) -> [f64; 3] {
        [self.s_hat, self.rho1_hat, self.rho2_hat]
    }
}

pub fn compute_stats(series: &SnapshotSeries) -> Result<MomentStats> {
    compute_stats_from_counts(&series.counts)
}

/// ```text
/// s_hat    = (1/K)     sum_k S_k
/// rho1_hat = (1/(K-1)) sum_k S_k S_{k+1} - s_hat^2
/// rho2_hat = (1/(K-2)) sum_k S_k S_{k+2} - s_hat^2
/// ```
///
/// The sums are accumulated exactly in integers.
pub fn compute_stats_from_counts(counts: &[u32]) -> Result<MomentStats> {
    let k = counts.len();
    if k < 3 {
        return Err(Error::SeriesTooShort { k });
    }
    let total: u64 = counts.iter().map(|&c| c as u64).sum();
    let lag = |l: usize| -> u128 { counts.iter().zip(&counts[l..]).map(|(&a, &b)| a as u128 * b as u128).sum() };
    let s_hat = total as f64 / k as f64;
    let s2 = s_hat * s_hat;
    Ok(MomentStats {
        s_hat,
        rho1_hat: lag(1) as f64 / (k - 1) as f64 - s2,
        rho2_hat: lag(2) as f64 / (k - 2) as f64 - s2,
        k,
    })
}

/// `Theta(s, gamma) = s / sum_k (k/N)^(-1/(gamma-1))`: the `theta` whose
/// power-law model has expected edge count `s` (divisor `m`).
pub fn theta_elimination(s_hat: f64, gamma: f64, n: usize) -> f64 {
    theta_elimination_with(s_hat, gamma, n, Divisor::M)
}

pub fn theta_elimination_with(s_hat: f64, gamma: f64, n: usize, divisor: Divisor) -> f64 {
    // expected edges are m / factor with m = theta * sum of weights
    divisor.factor() * s_hat / power_law_sum(gamma, n)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Structure {
    /// Parameters `(theta, gamma, zeta)`.
    Symmetric { n: usize, divisor: Divisor },
    /// Parameters `(gamma_plus, gamma_minus, zeta)` with `theta_plus` known.
    InOut { n: usize, theta_plus: f64 },
}

/// A parametric model: degree structure plus a lifetime binding whose
/// homogeneous side is `lifetime(zeta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelFamily {
    pub structure: Structure,
    pub homogeneous: Side,
    pub lifetime: LifetimeFamily,
}

impl ModelFamily {
    pub fn build(&self, params: &[f64; 3]) -> Result<GraphModelSpec> {
        let degrees: Degrees = match self.structure {
            Structure::Symmetric { n, divisor } => DegreeModel::build_power_law_with(params[0], params[1], n, divisor)?.into(),
            Structure::InOut { n, theta_plus } => InOutDegreeModel::build_in_out(theta_plus, params[0], params[1], n)?.into(),
        };
        Ok(GraphModelSpec { degrees, binding: self.binding(params[2]) })
    }

    pub fn binding(&self, zeta: f64) -> Binding {
        Binding { homogeneous: self.homogeneous, family: self.lifetime, zeta }
    }

    pub fn n(&self) -> usize {
        match self.structure {
            Structure::Symmetric { n, .. } | Structure::InOut { n, .. } => n,
        }
    }

    pub fn zeta_name(&self) -> &'static str {
        match (self.lifetime, self.homogeneous) {
            (LifetimeFamily::Exponential, Side::On) => "mu",
            (LifetimeFamily::Exponential, Side::Off) => "lambda",
            _ => "alpha",
        }
    }

    pub fn param_names(&self) -> [&'static str; 3] {
        match self.structure {
            Structure::Symmetric { .. } => ["theta", "gamma", self.zeta_name()],
            Structure::InOut { .. } => ["gamma_plus", "gamma_minus", self.zeta_name()],
        }
    }

    /// Keys used in JSON and CSV reports.
    pub fn param_keys(&self) -> [&'static str; 3] {
        match self.structure {
            Structure::Symmetric { .. } => ["theta_hat", "gamma_hat", "zeta_hat"],
            Structure::InOut { .. } => ["gamma_plus_hat", "gamma_minus_hat", "zeta_hat"],
        }
    }

    /// Analytic moment targets (x-functions) at `params`.
    pub fn x_functions(&self, params: &[f64; 3], scheme: &SamplingScheme) -> Result<[f64; 3]> {
        Ok(model_moments(&self.build(params)?, scheme)?.targets())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Convergence when every scaled residual `|x_i - y_i| / (1 + |y_i|)`
    /// is at most this.
    pub tolerance: f64,
    /// Starting point in parameter space; a grid scan is used otherwise.
    pub initial: Option<[f64; 3]>,
    /// Solve the symmetric model in all three parameters instead of
    /// eliminating `theta`.
    pub full_system: bool,
    pub fallback: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { max_iterations: 60, tolerance: 1e-9, initial: None, full_system: false, fallback: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult {
    pub params: [f64; 3],
    pub names: [&'static str; 3],
    pub keys: [&'static str; 3],
    pub stats: MomentStats,
    pub solver: SolverReport,
    pub cov: Option<[[f64; 3]; 3]>,
    pub notes: Vec<String>,
}

impl EstimationResult {
    /// Flat JSON record: `<param>_hat`, `converged`, `residual`,
    /// `iterations`, the statistics and `cov_ij` (1-based, null when absent).
    pub fn to_json(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        for (key, v) in self.keys.iter().zip(self.params) {
            map.insert(key.to_string(), v.into());
        }
        map.insert("names".into(), self.names.to_vec().into());
        map.insert("converged".into(), self.solver.converged.into());
        map.insert("residual".into(), self.solver.residual.into());
        map.insert("iterations".into(), self.solver.iterations.into());
        map.insert("s_hat".into(), self.stats.s_hat.into());
        map.insert("rho1_hat".into(), self.stats.rho1_hat.into());
        map.insert("rho2_hat".into(), self.stats.rho2_hat.into());
        map.insert("k".into(), self.stats.k.into());
        for i in 0..3 {
            for j in 0..3 {
                let v = self.cov.map_or(serde_json::Value::Null, |c| c[i][j].into());
                map.insert(format!("cov_{}{}", i + 1, j + 1), v);
            }
        }
        map.insert("notes".into(), self.notes.clone().into());
        serde_json::Value::Object(map)
    }
}

/// How solver coordinates map to parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Layout {
    /// `(gamma, zeta)`, theta from the mean.
    Reduced,
    /// `(theta, gamma, zeta)`.
    Full,
    /// `(gamma_plus, gamma_minus, zeta)`.
    InOut,
}

struct Problem<'a> {
    family: &'a ModelFamily,
    scheme: SamplingScheme,
    stats: MomentStats,
    targets: [f64; 3],
    layout: Layout,
    zeta_floor: f64,
}

impl<'a> Problem<'a> {
    fn new(family: &'a ModelFamily, scheme: SamplingScheme, stats: MomentStats, full_system: bool) -> Self {
        let layout = match family.structure {
            Structure::Symmetric { .. } if full_system => Layout::Full,
            Structure::Symmetric { .. } => Layout::Reduced,
            Structure::InOut { .. } => Layout::InOut,
        };
        Problem {
            family,
            scheme,
            stats,
            targets: moment_targets(stats.s_hat, stats.rho1_hat, stats.rho2_hat, &scheme),
            layout,
            zeta_floor: family.lifetime.zeta_floor(),
        }
    }

    fn theta_for(&self, gamma: f64) -> f64 {
        match self.family.structure {
            Structure::Symmetric { n, divisor } => theta_elimination_with(self.stats.s_hat, gamma, n, divisor),
            Structure::InOut { .. } => f64::NAN,
        }
    }

    fn params(&self, z: &[f64]) -> [f64; 3] {
        let zeta = self.zeta_floor + z[z.len() - 1].exp();
        match self.layout {
            Layout::Reduced => {
                let gamma = 1.0 + z[0].exp();
                [self.theta_for(gamma), gamma, zeta]
            }
            Layout::Full => [z[0].exp(), 1.0 + z[1].exp(), zeta],
            Layout::InOut => [1.0 + z[0].exp(), 1.0 + z[1].exp(), zeta],
        }
    }

    fn coords(&self, p: &[f64; 3]) -> Vec<f64> {
        let lz = (p[2] - self.zeta_floor).ln();
        match self.layout {
            Layout::Reduced => vec![(p[1] - 1.0).ln(), lz],
            Layout::Full => vec![p[0].ln(), (p[1] - 1.0).ln(), lz],
            Layout::InOut => vec![(p[0] - 1.0).ln(), (p[1] - 1.0).ln(), lz],
        }
    }

    fn scaled(&self, x: &[f64; 3]) -> Vec<f64> {
        let first = if self.layout == Layout::Reduced { 1 } else { 0 };
        (first..3).map(|i| (x[i] - self.targets[i]) / (1.0 + self.targets[i].abs())).collect()
    }

    /// Scaled residuals, `None` where the model does not exist
    /// (some `e_ij` outside `(0, 1)` or invalid lifetimes).
    fn residual(&self, z: &[f64]) -> Option<Vec<f64>> {
        if z.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let p = self.params(z);
        let x = self.family.x_functions(&p, &self.scheme).ok()?;
        let r = self.scaled(&x);
        r.iter().all(|v| v.is_finite()).then_some(r)
    }
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

fn max_abs(r: &[f64]) -> f64 {
    r.iter().fold(0.0, |m, v| m.max(v.abs()))
}

struct Iterate {
    z: Vec<f64>,
    r: Vec<f64>,
    iterations: usize,
}

fn jacobian(problem: &Problem, z: &[f64], r0: &[f64]) -> Option<DMatrix<f64>> {
    let d = z.len();
    let mut jac = DMatrix::zeros(r0.len(), d);
    for c in 0..d {
        let h = 1e-6 * (1.0 + z[c].abs());
        let mut zp = z.to_vec();
        let mut zm = z.to_vec();
        zp[c] += h;
        zm[c] -= h;
        let col: Vec<f64> = match (problem.residual(&zp), problem.residual(&zm)) {
            (Some(a), Some(b)) => a.iter().zip(&b).map(|(a, b)| (a - b) / (2.0 * h)).collect(),
            (Some(a), None) => a.iter().zip(r0).map(|(a, b)| (a - b) / h).collect(),
            (None, Some(b)) => r0.iter().zip(&b).map(|(a, b)| (a - b) / h).collect(),
            (None, None) => return None,
        };
        for (row, v) in col.into_iter().enumerate() {
            jac[(row, c)] = v;
        }
    }
    Some(jac)
}

/// Damped Newton with backtracking; stops at convergence or stall.
fn newton(problem: &Problem, start: Iterate, opts: &SolverOptions) -> Iterate {
    let mut it = start;
    for _ in 0..opts.max_iterations {
        if max_abs(&it.r) <= opts.tolerance {
            break;
        }
        let Some(jac) = jacobian(problem, &it.z, &it.r) else { break };
        let rhs = -DVector::from_column_slice(&it.r);
        let Some(mut step) = jac.lu().solve(&rhs) else { break };
        let len = step.amax();
        if !len.is_finite() {
            break;
        }
        if len > 2.0 {
            step *= 2.0 / len;
        }
        let f0 = sum_sq(&it.r);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let z: Vec<f64> = it.z.iter().zip(step.iter()).map(|(a, b)| a + t * b).collect();
            if let Some(r) = problem.residual(&z) {
                if sum_sq(&r) < (1.0 - 1e-4 * t) * f0 {
                    accepted = Some((z, r));
                    break;
                }
            }
            t *= 0.5;
        }
        it.iterations += 1;
        match accepted {
            Some((z, r)) => {
                it.z = z;
                it.r = r;
            }
            None => break,
        }
    }
    it
}

/// Minimises the residual sum of squares; infeasible points score `+inf`.
fn nelder_mead(problem: &Problem, start: &[f64], max_iter: usize) -> Option<Iterate> {
    let d = start.len();
    let f = |z: &[f64]| problem.residual(z).map_or(f64::INFINITY, |r| sum_sq(&r));
    let mut simplex: Vec<(Vec<f64>, f64)> = (0..=d)
        .map(|i| {
            let mut z = start.to_vec();
            if i > 0 {
                z[i - 1] += 0.1;
            }
            let v = f(&z);
            (z, v)
        })
        .collect();
    let mut evaluations = 0;
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[d].1 - simplex[0].1 <= 1e-26 && simplex[0].1.is_finite() {
            break;
        }
        let centroid: Vec<f64> = (0..d).map(|c| simplex[..d].iter().map(|p| p.0[c]).sum::<f64>() / d as f64).collect();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&simplex[d].0).map(|(c, w)| c + t * (c - w)).collect() };
        let refl = along(1.0);
        let fr = f(&refl);
        evaluations += 1;
        if fr < simplex[0].1 {
            let exp = along(2.0);
            let fe = f(&exp);
            simplex[d] = if fe < fr { (exp, fe) } else { (refl, fr) };
        } else if fr < simplex[d - 1].1 {
            simplex[d] = (refl, fr);
        } else {
            let con = if fr < simplex[d].1 { along(0.5) } else { along(-0.5) };
            let fc = f(&con);
            if fc < fr.min(simplex[d].1) {
                simplex[d] = (con, fc);
            } else {
                let best = simplex[0].0.clone();
                for p in simplex.iter_mut().skip(1) {
                    p.0 = best.iter().zip(&p.0).map(|(b, x)| b + 0.5 * (x - b)).collect();
                    p.1 = f(&p.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let z = simplex.swap_remove(0).0;
    let r = problem.residual(&z)?;
    Some(Iterate { z, r, iterations: evaluations })
}

const GAMMA_GRID: usize = 48;
const ZETA_GRID: usize = 16;

fn gamma_grid() -> impl Iterator<Item = f64> {
    // gamma - 1 geometric over [0.2, 7]
    (0..GAMMA_GRID).map(|i| 1.0 + 0.2 * 35f64.powf(i as f64 / (GAMMA_GRID - 1) as f64))
}

fn log_zeta_grid() -> Vec<f64> {
    // zeta - floor geometric over [1e-3, 1e3]
    (0..ZETA_GRID).map(|j| (1e-3f64).ln() + (1e6f64).ln() * j as f64 / (ZETA_GRID - 1) as f64).collect()
}

/// Scans the shape parameter of `degrees_for` and, for each value, profiles
/// `zeta` from the second equation by interpolation on a log grid; returns
/// the `(shape, ln(zeta - floor))` minimising the squared third residual.
fn scan(problem: &Problem, degrees_for: impl Fn(f64) -> Option<Degrees>) -> Option<(f64, f64)> {
    let lz = log_zeta_grid();
    let transforms: Vec<Option<Transform>> = match problem.scheme {
        SamplingScheme::Poisson { xi, .. } => lz
            .iter()
            .map(|&l| problem.family.lifetime.instantiate(problem.zeta_floor + l.exp()).ok().and_then(|d| Transform::of(&d, xi).ok()))
            .collect(),
        SamplingScheme::Equidistant { .. } => vec![None; lz.len()],
    };
    let t1 = problem.targets[1];
    let t2 = problem.targets[2];
    let mut best: Option<(f64, f64, f64)> = None;
    for g in gamma_grid() {
        let Some(degrees) = degrees_for(g) else { continue };
        let s = degrees.expected_edges();
        let eval = |j: usize| -> Option<[f64; 3]> {
            let zeta = problem.zeta_floor + lz[j].exp();
            let (r1, r2) = match problem.scheme {
                SamplingScheme::Poisson { xi, .. } => {
                    poisson_sums_with(&degrees, problem.family.homogeneous, transforms[j].as_ref()?, xi).ok()?
                }
                SamplingScheme::Equidistant { .. } => {
                    let spec = GraphModelSpec { degrees: degrees.clone(), binding: problem.family.binding(zeta) };
                    let mv = model_moments(&spec, &problem.scheme).ok()?;
                    (mv.rho1, mv.rho2)
                }
            };
            Some(moment_targets(s, r1, r2, &problem.scheme))
        };
        let values: Vec<Option<[f64; 3]>> = (0..lz.len()).map(eval).collect();
        for j in 0..lz.len() - 1 {
            let (Some(a), Some(b)) = (values[j], values[j + 1]) else { continue };
            let (da, db) = (a[1] - t1, b[1] - t1);
            if da == 0.0 || da.signum() != db.signum() {
                let w = if da == db { 0.0 } else { da / (da - db) };
                let l = lz[j] + w * (lz[j + 1] - lz[j]);
                let r3 = ((a[2] + w * (b[2] - a[2])) - t2) / (1.0 + t2.abs());
                if best.map_or(true, |b| r3 * r3 < b.2) {
                    best = Some((g, l, r3 * r3));
                }
                break;
            }
        }
    }
    best.map(|(g, l, _)| (g, l))
}

fn initial_coords(problem: &Problem) -> Option<Vec<f64>> {
    match problem.family.structure {
        Structure::Symmetric { n, divisor } => {
            let (g, l) = scan(problem, |g| {
                DegreeModel::build_power_law_with(problem.theta_for(g), g, n, divisor).ok().map(Degrees::from)
            })?;
            let mut z = vec![(g - 1.0).ln(), l];
            if problem.layout == Layout::Full {
                z.insert(0, problem.theta_for(g).ln());
            }
            Some(z)
        }
        Structure::InOut { n, theta_plus } => {
            let gp = solve_gamma_plus(problem.stats.s_hat, theta_plus, n)?;
            let (gm, l) = scan(problem, |g| InOutDegreeModel::build_in_out(theta_plus, gp, g, n).ok().map(Degrees::from))?;
            Some(vec![(gp - 1.0).ln(), (gm - 1.0).ln(), l])
        }
    }
}

/// `gamma_plus` with `theta_plus * sum_k (k/N)^(-1/(gamma_plus-1)) = s`, by
/// bisection in `ln(gamma_plus - 1)` (the sum decreases in gamma).
fn solve_gamma_plus(s: f64, theta_plus: f64, n: usize) -> Option<f64> {
    let m = |u: f64| theta_plus * power_law_sum(1.0 + u.exp(), n);
    let (mut lo, mut hi) = ((0.01f64).ln(), (1e3f64).ln());
    if !(m(lo) >= s && m(hi) <= s) {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if m(mid) > s {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Some(1.0 + (0.5 * (lo + hi)).exp())
}

/// Solves the moment equations for the parameters of `family`.
pub fn solve_moments(stats: &MomentStats, family: &ModelFamily, scheme: &SamplingScheme, opts: &SolverOptions) -> Result<EstimationResult> {
    if stats.k < 3 {
        return Err(Error::SeriesTooShort { k: stats.k });
    }
    if !(stats.s_hat > 0.0) || !stats.rho1_hat.is_finite() || !stats.rho2_hat.is_finite() {
        return Err(Error::OutOfBounds(format!("statistics must be finite with positive mean, got {stats:?}")));
    }
    let scheme = scheme.with_k(stats.k);
    let mut notes = Vec::new();
    if stats.rho1_hat <= 0.0 {
        return Err(Error::OutOfBounds(format!("lag-1 covariance statistic is not positive ({})", stats.rho1_hat)));
    }
    if stats.rho2_hat <= 0.0 {
        notes.push(format!("lag-2 covariance statistic is not positive ({})", stats.rho2_hat));
    }
    let problem = Problem::new(family, scheme, *stats, opts.full_system);

    let z0 = match opts.initial {
        Some(p) => {
            let mut p = p;
            if problem.layout == Layout::Reduced {
                p[0] = problem.theta_for(p[1]);
            }
            problem.coords(&p)
        }
        None => initial_coords(&problem).ok_or_else(|| Error::OutOfBounds("no feasible starting point".into()))?,
    };
    let r0 = problem
        .residual(&z0)
        .ok_or_else(|| Error::OutOfBounds(format!("starting point {:?} is infeasible", problem.params(&z0))))?;
    let mut best = newton(&problem, Iterate { z: z0, r: r0, iterations: 0 }, opts);

    if max_abs(&best.r) > opts.tolerance && opts.fallback {
        if let Some(nm) = nelder_mead(&problem, &best.z, 400) {
            let used = best.iterations + nm.iterations;
            let mut polished = newton(&problem, nm, opts);
            polished.iterations += used;
            notes.push("Newton stalled; Nelder-Mead fallback used".into());
            if sum_sq(&polished.r) < sum_sq(&best.r) {
                best = polished;
            } else {
                best.iterations = polished.iterations;
            }
        }
    }

    let residual = max_abs(&best.r);
    let converged = residual <= opts.tolerance;
    if !converged {
        notes.push(format!("no convergence: scaled residual {residual:.3e}"));
    }
    Ok(EstimationResult {
        params: problem.params(&best.z),
        names: family.param_names(),
        keys: family.param_keys(),
        stats: *stats,
        solver: SolverReport { iterations: best.iterations, residual, converged },
        cov: None,
        notes,
    })
}

/// Statistics and moment solution of one series.
pub fn estimate(series: &SnapshotSeries, family: &ModelFamily, opts: &SolverOptions) -> Result<EstimationResult> {
    solve_moments(&compute_stats(series)?, family, &series.scheme, opts)
}

fn to_matrix(a: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| a[i][j])
}

fn from_matrix(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = m[(i, j)];
        }
    }
    out
}

/// Jacobian of the x-functions in the three model parameters, by central
/// differences with steps `1e-5 (1 + |p|)`.
pub fn u_matrix(params: &[f64; 3], family: &ModelFamily, scheme: &SamplingScheme) -> Result<[[f64; 3]; 3]> {
    let mut u = [[0.0; 3]; 3];
    for c in 0..3 {
        let h = 1e-5 * (1.0 + params[c].abs());
        let mut pp = *params;
        let mut pm = *params;
        pp[c] += h;
        pm[c] -= h;
        let xp = family.x_functions(&pp, scheme)?;
        let xm = family.x_functions(&pm, scheme)?;
        for r in 0..3 {
            u[r][c] = (xp[r] - xm[r]) / (2.0 * h);
        }
    }
    Ok(u)
}

/// Delta-method covariance `U^-1 V Sigma (U^-1 V)^T` of the
/// `sqrt(K)`-scaled estimator, with `U` and `V` evaluated at `params`.
pub fn delta_method_cov(params: &[f64; 3], family: &ModelFamily, scheme: &SamplingScheme, sigma: &[[f64; 3]; 3]) -> Result<[[f64; 3]; 3]> {
    let u = to_matrix(&u_matrix(params, family, scheme)?);
    let sv = u.singular_values();
    let cond = sv.max() / sv.min();
    if !(cond <= 1e12) {
        return Err(Error::SingularJacobian { cond });
    }
    let mv = model_moments(&family.build(params)?, scheme)?;
    let v = to_matrix(&v_matrix(mv.s, mv.rho1, mv.rho2, scheme));
    let u_inv = u.try_inverse().ok_or(Error::SingularJacobian { cond: f64::INFINITY })?;
    let g = u_inv * v;
    Ok(from_matrix(&(g * to_matrix(sigma) * g.transpose())))
}

/// `K` times the sample covariance (divisor `L - 1`) of the statistic
/// vectors of `L` runs.
pub fn empirical_sigma(stats: &[MomentStats], k: usize) -> Result<[[f64; 3]; 3]> {
    let l = stats.len();
    if l < 2 {
        return Err(Error::TooFewRuns(l));
    }
    let mut mean = [0.0; 3];
    for s in stats {
        for (m, v) in mean.iter_mut().zip(s.as_array()) {
            *m += v / l as f64;
        }
    }
    let mut out = [[0.0; 3]; 3];
    for s in stats {
        let d: Vec<f64> = s.as_array().iter().zip(&mean).map(|(v, m)| v - m).collect();
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] += d[i] * d[j];
            }
        }
    }
    for row in out.iter_mut() {
        for v in row.iter_mut() {
            *v *= k as f64 / (l - 1) as f64;
        }
    }
    Ok(out)
}
