//! On- and off-time distributions.
//!
//! Conventions (tail functions):
//! - `Exponential { rate }`: `P(Z > t) = exp(-rate t)`
//! - `Weibull { scale, shape }`: `P(Z > t) = exp(-scale t^shape)`
//! - `Pareto { scale, shape }`: `P(Z > t) = scale^shape / (scale + t)^shape`
//!
//! Transforms are Laplace-Stieltjes transforms `E exp(-sZ)`. Closed forms are
//! used where they exist; the Weibull and Pareto transforms are evaluated by
//! adaptive quadrature after a change of variables that removes endpoint
//! singularities and folds the `exp(sC)` factor of the incomplete-gamma form
//! into the integrand.

use rand::distributions::Open01;
use rand::Rng;
use rand_distr::Exp1;
use statrs::function::gamma::{gamma, gamma_lr, gamma_ur, ln_gamma};

use crate::error::{Error, Result};
use crate::quadrature::{geometric_breakpoints, integrate_pieces, Tolerance};

/// `exp(-50)` is below `2e-22`, far under every tolerance used here.
const EXP_CUTOFF: f64 = 50.0;

fn transform_tolerance() -> Tolerance {
    Tolerance { abs: 1e-14, rel: 1e-13, max_segments: 4000 }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LifetimeDist {
    Exponential { rate: f64 },
    Weibull { scale: f64, shape: f64 },
    Pareto { scale: f64, shape: f64 },
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
    }
}

impl LifetimeDist {
    pub fn exponential(rate: f64) -> Result<Self> {
        Ok(LifetimeDist::Exponential { rate: positive("rate", rate)? })
    }

    pub fn weibull(scale: f64, shape: f64) -> Result<Self> {
        Ok(LifetimeDist::Weibull { scale: positive("scale", scale)?, shape: positive("shape", shape)? })
    }

    pub fn pareto(scale: f64, shape: f64) -> Result<Self> {
        let scale = positive("scale", scale)?;
        let shape = positive("shape", shape)?;
        if shape <= 1.0 {
            return Err(Error::InfiniteMean { shape });
        }
        Ok(LifetimeDist::Pareto { scale, shape })
    }

    pub fn is_exponential(&self) -> bool {
        matches!(self, LifetimeDist::Exponential { .. })
    }

    pub fn mean(&self) -> f64 {
        match *self {
            LifetimeDist::Exponential { rate } => 1.0 / rate,
            LifetimeDist::Weibull { scale, shape } => scale.powf(-1.0 / shape) * gamma(1.0 + 1.0 / shape),
            LifetimeDist::Pareto { scale, shape } => scale / (shape - 1.0),
        }
    }

    /// `P(Z > t)`.
    pub fn survival(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        match *self {
            LifetimeDist::Exponential { rate } => (-rate * t).exp(),
            LifetimeDist::Weibull { scale, shape } => (-scale * t.powf(shape)).exp(),
            LifetimeDist::Pareto { scale, shape } => (scale / (scale + t)).powf(shape),
        }
    }

    /// `E exp(-sZ)` for `s >= 0`.
    pub fn lst(&self, s: f64) -> Result<f64> {
        check_arg(s, true)?;
        if s == 0.0 {
            return Ok(1.0);
        }
        match *self {
            LifetimeDist::Exponential { rate } => Ok(rate / (rate + s)),
            LifetimeDist::Weibull { scale, shape } => {
                // u = scale * t^shape turns the density into exp(-u) du
                let time = move |u: f64| (u / scale).powf(1.0 / shape);
                integrate_pieces(&|u: f64| (-u - s * time(u)).exp(), &weibull_points(), transform_tolerance())
            }
            LifetimeDist::Pareto { scale, shape } => {
                let x = s * scale;
                Ok(shape / x * pareto_kernel(x, shape + 1.0)?)
            }
        }
    }

    /// `d/ds E exp(-sZ) = -E[Z exp(-sZ)]` for `s > 0`.
    pub fn lst_derivative(&self, s: f64) -> Result<f64> {
        check_arg(s, false)?;
        match *self {
            LifetimeDist::Exponential { rate } => Ok(-rate / ((rate + s) * (rate + s))),
            LifetimeDist::Weibull { scale, shape } => {
                let time = move |u: f64| (u / scale).powf(1.0 / shape);
                let v = integrate_pieces(
                    &|u: f64| {
                        let t = time(u);
                        t * (-u - s * t).exp()
                    },
                    &weibull_points(),
                    transform_tolerance(),
                )?;
                Ok(-v)
            }
            LifetimeDist::Pareto { scale, shape } => {
                let g = self.lst(s)?;
                Ok(g * (scale + shape / s) - shape / s)
            }
        }
    }

    /// `1 - E exp(-sZ)`, computed without cancellation for small `s`.
    pub fn one_minus_lst(&self, s: f64) -> Result<f64> {
        check_arg(s, true)?;
        if s == 0.0 {
            return Ok(0.0);
        }
        match *self {
            LifetimeDist::Exponential { rate } => Ok(s / (rate + s)),
            LifetimeDist::Weibull { scale, shape } => {
                let time = move |u: f64| (u / scale).powf(1.0 / shape);
                integrate_pieces(&|u: f64| -(-u).exp() * (-s * time(u)).exp_m1(), &weibull_points(), transform_tolerance())
            }
            LifetimeDist::Pareto { scale, shape } => pareto_kernel(s * scale, shape),
        }
    }

    /// Transform of the residual-lifetime density `(1 - F(t)) / mean`,
    /// i.e. `(1 - lst(s)) / (s mean)`.
    pub fn residual_lst(&self, s: f64) -> Result<f64> {
        check_arg(s, false)?;
        Ok(self.one_minus_lst(s)? / (s * self.mean()))
    }

    /// Ziggurat draw for the exponential, inverse CDF otherwise.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            LifetimeDist::Exponential { rate } => rng.sample::<f64, _>(Exp1) / rate,
            LifetimeDist::Weibull { scale, shape } => (rng.sample::<f64, _>(Exp1) / scale).powf(1.0 / shape),
            LifetimeDist::Pareto { scale, shape } => {
                let u: f64 = rng.sample(Open01);
                scale * (u.powf(-1.0 / shape) - 1.0)
            }
        }
    }

    /// Draw from the residual-lifetime density `(1 - F(t)) / mean`.
    ///
    /// Exponential: memoryless, same as [`sample`](Self::sample).
    /// Pareto(C, a): the residual law is Pareto(C, a - 1).
    /// Weibull: inverts `H(t) = P(1/shape, scale t^shape)`, the integrated
    /// tail in closed form through the regularised incomplete gamma function.
    pub fn sample_residual<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        match *self {
            LifetimeDist::Exponential { .. } => Ok(self.sample(rng)),
            LifetimeDist::Pareto { scale, shape } => {
                let u: f64 = rng.sample(Open01);
                Ok(scale * (u.powf(-1.0 / (shape - 1.0)) - 1.0))
            }
            LifetimeDist::Weibull { scale, shape } => {
                let u: f64 = rng.sample(Open01);
                let y = invert_regularized_gamma(1.0 / shape, u)?;
                Ok((y / scale).powf(1.0 / shape))
            }
        }
    }
}

fn check_arg(s: f64, allow_zero: bool) -> Result<()> {
    let ok = if allow_zero { s >= 0.0 } else { s > 0.0 };
    if ok && s.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("transform argument must be {} and finite, got {s}", if allow_zero { ">= 0" } else { "> 0" })))
    }
}

fn weibull_points() -> [f64; 8] {
    [0.0, 1e-8, 1e-5, 1e-3, 0.1, 1.0, 10.0, EXP_CUTOFF]
}

/// `int_0^inf exp(-z) (1 + z/x)^{-a} dz`.
///
/// This is `x^a exp(x) Gamma(x, 1-a)` (upper incomplete gamma) with the
/// exponential folded in; for small `x` the integrand drops on the scale `x`,
/// so the subdivision is seeded geometrically from there.
fn pareto_kernel(x: f64, a: f64) -> Result<f64> {
    let points = geometric_breakpoints(x, 4.0, EXP_CUTOFF);
    integrate_pieces(&|z: f64| (-z).exp() * (1.0 + z / x).powf(-a), &points, transform_tolerance())
}

/// Solves `P(a, y) = u` for `y` (regularised lower incomplete gamma) by a
/// safeguarded Newton iteration on an expanding bracket.
pub(crate) fn invert_regularized_gamma(a: f64, u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::InversionFailure(format!("target {u} outside (0, 1)")));
    }
    // Work with whichever tail is smaller to keep precision near 1.
    let upper = u > 0.5;
    let target = if upper { 1.0 - u } else { u };
    let g = |y: f64| if upper { gamma_ur(a, y) - target } else { gamma_lr(a, y) - target };
    let ln_norm = ln_gamma(a);
    let density = |y: f64| ((a - 1.0) * y.ln() - y - ln_norm).exp();
    let sign = if upper { -1.0 } else { 1.0 };

    let mut lo = 0.0;
    let mut hi = a.max(1.0);
    while gamma_ur(a, hi) >= 1e-14 {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::InversionFailure(format!("no bracket for P({a}, y) = {u}")));
        }
    }
    if g(hi) * sign < 0.0 {
        return Err(Error::InversionFailure(format!("target P({a}, y) = {u} lies beyond the 1e-14 tail")));
    }
    let mut y = 0.5 * (lo + hi);
    for _ in 0..200 {
        let val = g(y);
        if val == 0.0 {
            return Ok(y);
        }
        if val * sign > 0.0 {
            hi = y;
        } else {
            lo = y;
        }
        let d = sign * density(y);
        let mut next = y - val / d;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - y).abs() <= 1e-14 * y.max(1e-300) || hi - lo <= 1e-15 * hi {
            return Ok(next);
        }
        y = next;
    }
    Err(Error::InversionFailure(format!("Newton/bisection did not settle for P({a}, y) = {u}")))
}
