//! Stationary moments of the edge-count process `S(t)`.
//!
//! Edges are independent, so every covariance is a double sum of per-edge
//! terms `rho_ij`. Deterministic lags are available for exponential
//! lifetimes only; Poisson sampling works for any lifetime pair through
//! the Laplace-Stieltjes transforms at the sampling rate `xi`:
//!
//! ```text
//! p--      = (1 - G) / (1 - F G)
//! F_res    = (1 - F) / (xi f)
//! p_res++  = 1 - p-- F_res
//! rho(T)   = e (p_res++ - e)
//! rho(E2)  = rho(T) - xi d rho(T) / d xi
//! ```
//!
//! where `F`, `G` are the on- and off-time transforms and `f` the mean
//! on-time.

use crate::degree_model::Degrees;
use crate::error::{Error, Result};
use crate::graph_sim::{derived_rate, GraphModelSpec, SamplingScheme, Side};
use crate::lifetimes::LifetimeDist;
use crate::numeric::{compensated_sum, CompensatedSum};

/// Mean and the two covariance statistics of a model under a scheme:
/// `rho1, rho2` are `rho[delta], rho[2 delta]` or `rho(T_xi), rho(E_xi,2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentVector {
    pub s: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub scheme: SamplingScheme,
}

/// Transform data of one lifetime at `s = xi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transform {
    pub value: f64,
    pub one_minus: f64,
    pub slope: f64,
    pub mean: f64,
}

impl Transform {
    pub fn of(dist: &LifetimeDist, xi: f64) -> Result<Self> {
        Ok(Transform {
            value: dist.lst(xi)?,
            one_minus: dist.one_minus_lst(xi)?,
            slope: dist.lst_derivative(xi)?,
            mean: dist.mean(),
        })
    }
}

/// `(p++, p--)`: probability of being on (off) after an exponential time
/// when a fresh on (off) period starts at time zero.
pub fn p_fresh(on: &Transform, off: &Transform) -> (f64, f64) {
    // 1 - FG without cancellation
    let denom = on.one_minus + on.value * off.one_minus;
    (on.one_minus / denom, off.one_minus / denom)
}

/// Probability of being on after an exponential time given on at time zero,
/// in equilibrium.
pub fn p_res_plus_plus(on: &Transform, off: &Transform, xi: f64) -> f64 {
    let (_, p_mm) = p_fresh(on, off);
    1.0 - p_mm * on.one_minus / (xi * on.mean)
}

/// `p_res++` and its derivative in `xi`.
fn p_res_with_slope(on: &Transform, off: &Transform, xi: f64) -> (f64, f64) {
    let denom = on.one_minus + on.value * off.one_minus;
    let p_mm = off.one_minus / denom;
    let d_denom = -(on.slope * off.value + on.value * off.slope);
    let p_mm_slope = (-off.slope * denom - off.one_minus * d_denom) / (denom * denom);
    let f_res = on.one_minus / (xi * on.mean);
    let f_res_slope = -on.slope / (xi * on.mean) - on.one_minus / (xi * xi * on.mean);
    (1.0 - p_mm * f_res, -(p_mm_slope * f_res + p_mm * f_res_slope))
}

fn clip_covariance(v: f64) -> Result<f64> {
    if v < -1e-9 {
        Err(Error::NegativeCovariance { value: v })
    } else {
        Ok(v.max(0.0))
    }
}

/// `Cov(1(0), 1(T_xi))` of one edge with on-probability `e`.
pub fn rho_t_xi(e: f64, on: &Transform, off: &Transform, xi: f64) -> Result<f64> {
    clip_covariance(e * (p_res_plus_plus(on, off, xi) - e))
}

/// `Cov(1(0), 1(E_xi,2))` of one edge, via `rho(T) - xi d rho(T)/d xi`.
pub fn rho_erlang2(e: f64, on: &Transform, off: &Transform, xi: f64) -> Result<f64> {
    Ok(poisson_edge(e, on, off, xi)?.1)
}

fn poisson_edge(e: f64, on: &Transform, off: &Transform, xi: f64) -> Result<(f64, f64)> {
    let (p, slope) = p_res_with_slope(on, off, xi);
    let rho_t = e * (p - e);
    let rho_e2 = rho_t - xi * e * slope;
    Ok((clip_covariance(rho_t)?, clip_covariance(rho_e2)?))
}

/// `sum_ij e_ij (1 - e_ij) exp(-(lambda_ij + mu_ij) delta)` for exponential
/// lifetimes on both sides.
pub fn rho_delta_exp(spec: &GraphModelSpec, delta: f64) -> Result<f64> {
    if !(delta >= 0.0) {
        return Err(Error::InvalidParameter(format!("lag must be nonnegative, got {delta}")));
    }
    let rates = exp_decay_rates(spec)?;
    Ok(compensated_sum(
        spec.degrees.edge_probabilities().iter().zip(&rates).map(|(&e, &r)| e * (1.0 - e) * (-r * delta).exp()),
    ))
}

/// Per-edge `lambda_ij + mu_ij` of an exp/exp binding.
fn exp_decay_rates(spec: &GraphModelSpec) -> Result<Vec<f64>> {
    if !spec.binding.is_exp_exp() {
        return Err(Error::WrongFamily("exponential on- and off-times"));
    }
    let zeta = spec.binding.zeta;
    if !(zeta > 0.0 && zeta.is_finite()) {
        return Err(Error::InvalidParameter(format!("rate must be positive, got {zeta}")));
    }
    Ok(spec
        .degrees
        .edge_probabilities()
        .iter()
        .map(|&e| match spec.binding.homogeneous {
            Side::On => zeta / (1.0 - e),
            Side::Off => zeta / e,
        })
        .collect())
}

/// `H_ij(gamma, N) = (ij / N^2)^(-1/(gamma-1))`.
fn h_kernel(i: usize, j: usize, gamma: f64, n: usize) -> f64 {
    ((i * j) as f64 / (n * n) as f64).powf(-1.0 / (gamma - 1.0))
}

/// The moment functions `A(theta, gamma)` and `B(theta, gamma, mu, .)` at
/// lags `delta` and `2 delta`, by direct double summation:
///
/// ```text
/// A = sum_ij theta^2 H_ij
/// B = sum_ij theta^2 H_ij (s - theta^2 H_ij) exp(-mu s delta / (s - theta^2 H_ij)),  s = sqrt(A)
/// ```
///
/// They equal `s^2` and `s^2 rho[delta]` for the symmetric exp/exp model
/// with on-rate `mu` and divisor `m`.
pub fn moment_functions_ab(theta: f64, gamma: f64, mu: f64, delta: f64, n: usize) -> (f64, f64, f64) {
    let mut a = CompensatedSum::new();
    for i in 1..=n {
        for j in 1..=n {
            a.add(theta * theta * h_kernel(i, j, gamma, n));
        }
    }
    let a = a.value();
    let s = a.sqrt();
    let mut b1 = CompensatedSum::new();
    let mut b2 = CompensatedSum::new();
    for i in 1..=n {
        for j in 1..=n {
            let dd = theta * theta * h_kernel(i, j, gamma, n);
            let rate = mu * s / (s - dd);
            b1.add(dd * (s - dd) * (-rate * delta).exp());
            b2.add(dd * (s - dd) * (-rate * 2.0 * delta).exp());
        }
    }
    (a, b1.value(), b2.value())
}

/// Analytic `(s, rho1, rho2)` of a model under a sampling scheme.
pub fn model_moments(spec: &GraphModelSpec, scheme: &SamplingScheme) -> Result<MomentVector> {
    scheme.validate()?;
    let s = spec.degrees.expected_edges();
    let (rho1, rho2) = match *scheme {
        SamplingScheme::Equidistant { delta, .. } => (rho_delta_exp(spec, delta)?, rho_delta_exp(spec, 2.0 * delta)?),
        SamplingScheme::Poisson { xi, .. } => poisson_sums(spec, xi)?,
    };
    Ok(MomentVector { s, rho1, rho2, scheme: *scheme })
}

fn poisson_sums(spec: &GraphModelSpec, xi: f64) -> Result<(f64, f64)> {
    let hom = spec.binding.homogeneous_dist()?;
    poisson_sums_with(&spec.degrees, spec.binding.homogeneous, &Transform::of(&hom, xi)?, xi)
}

/// `(sum rho(T_xi), sum rho(E_xi,2))` given the transform of the
/// homogeneous side, so it can be reused across degree sequences.
pub fn poisson_sums_with(degrees: &Degrees, homogeneous: Side, hom_t: &Transform, xi: f64) -> Result<(f64, f64)> {
    let mut rho_t = CompensatedSum::new();
    let mut rho_e2 = CompensatedSum::new();
    let n = degrees.n();
    for (idx, &e) in degrees.edge_probabilities().iter().enumerate() {
        if !(e > 0.0 && e < 1.0) {
            return Err(Error::DegenerateEdge { i: idx / n + 1, j: idx % n + 1, e });
        }
        let rate = derived_rate(homogeneous, hom_t.mean, e);
        let derived = Transform {
            value: rate / (rate + xi),
            one_minus: xi / (rate + xi),
            slope: -rate / ((rate + xi) * (rate + xi)),
            mean: 1.0 / rate,
        };
        let (on, off) = match homogeneous {
            Side::On => (hom_t, &derived),
            Side::Off => (&derived, hom_t),
        };
        let (a, b) = poisson_edge(e, on, off, xi)?;
        rho_t.add(a);
        rho_e2.add(b);
    }
    Ok((rho_t.value(), rho_e2.value()))
}

/// `Var S(t) = sum_ij e_ij (1 - e_ij)`.
pub fn stationary_variance(degrees: &Degrees) -> f64 {
    compensated_sum(degrees.edge_probabilities().iter().map(|&e| e * (1.0 - e)))
}

/// Map from `(s, rho1, rho2)` to the quantities matched by the moment
/// equations: `(s^2, s^2 rho1, s^2 rho2)` for equidistant sampling and
/// `(s^2, rho1, rho2)` for Poisson sampling. Applied to model moments this
/// gives the x-functions, applied to statistics the y-functions.
pub fn moment_targets(s: f64, rho1: f64, rho2: f64, scheme: &SamplingScheme) -> [f64; 3] {
    match scheme {
        SamplingScheme::Equidistant { .. } => [s * s, s * s * rho1, s * s * rho2],
        SamplingScheme::Poisson { .. } => [s * s, rho1, rho2],
    }
}

/// Jacobian of [`moment_targets`] in `(s, rho1, rho2)`.
pub fn v_matrix(s: f64, rho1: f64, rho2: f64, scheme: &SamplingScheme) -> [[f64; 3]; 3] {
    match scheme {
        SamplingScheme::Equidistant { .. } => {
            [[2.0 * s, 0.0, 0.0], [2.0 * s * rho1, s * s, 0.0], [2.0 * s * rho2, 0.0, s * s]]
        }
        SamplingScheme::Poisson { .. } => [[2.0 * s, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    }
}

impl MomentVector {
    pub fn targets(&self) -> [f64; 3] {
        moment_targets(self.s, self.rho1, self.rho2, &self.scheme)
    }
}
