//! Target-degree sequences and the per-edge stationary on-probabilities
//! `e_ij = d_i d_j / m` (or `d_i^+ d_j^- / m` with distinct in/out degrees).
//!
//! Edges are directed and self-loops are included, so every model carries
//! an `N x N` row-major matrix of on-probabilities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::compensated_sum;

/// Values in `(1, 1 + CLAMP_SLACK]` are rounding noise and are clamped to 1.
const CLAMP_SLACK: f64 = 1e-12;

/// Normalisation of `e_ij`: `d_i d_j / m` (directed construction) or
/// `d_i d_j / (2m)` (the undirected convention).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Divisor {
    #[default]
    #[serde(rename = "m")]
    M,
    #[serde(rename = "2m")]
    TwoM,
}

impl Divisor {
    pub fn factor(self) -> f64 {
        match self {
            Divisor::M => 1.0,
            Divisor::TwoM => 2.0,
        }
    }
}

impl std::str::FromStr for Divisor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "m" => Ok(Divisor::M),
            "2m" => Ok(Divisor::TwoM),
            other => Err(Error::InvalidParameter(format!("unknown divisor '{other}' (expected m or 2m)"))),
        }
    }
}

/// `(i/N)^{-1/(gamma-1)}` for `i = 1..=N`.
pub fn power_law_weights(gamma: f64, n: usize) -> Vec<f64> {
    let exponent = -1.0 / (gamma - 1.0);
    let nf = n as f64;
    (1..=n).map(|i| (i as f64 / nf).powf(exponent)).collect()
}

/// `sum_i (i/N)^{-1/(gamma-1)}`; the total degree per unit of `theta`.
pub fn power_law_sum(gamma: f64, n: usize) -> f64 {
    compensated_sum(power_law_weights(gamma, n))
}

fn check_power_law_params(theta: f64, gamma: f64, n: usize) -> Result<()> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::InvalidParameter(format!("theta must be positive, got {theta}")));
    }
    if !(gamma > 1.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!("gamma must exceed 1, got {gamma}")));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    Ok(())
}

/// Builds the row-major matrix `row[i] * col[j] / denom`, rejecting entries above 1.
fn probability_matrix(row: &[f64], col: &[f64], denom: f64) -> Result<Vec<f64>> {
    let n = row.len();
    let mut probs = Vec::with_capacity(n * n);
    for (i, &r) in row.iter().enumerate() {
        for (j, &c) in col.iter().enumerate() {
            let e = r * c / denom;
            if !(e <= 1.0 + CLAMP_SLACK) {
                return Err(Error::EdgeProbabilityOverflow { i: i + 1, j: j + 1, value: e });
            }
            probs.push(e.min(1.0));
        }
    }
    Ok(probs)
}

fn check_index(index: usize, n: usize) -> Result<usize> {
    if index == 0 || index > n {
        Err(Error::IndexOutOfRange { index, n })
    } else {
        Ok(index - 1)
    }
}

/// Symmetric Chung-Lu degree model (target in-degree equals out-degree).
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeModel {
    n: usize,
    theta: f64,
    gamma: f64,
    degrees: Vec<f64>,
    m: f64,
    divisor: Divisor,
    probs: Vec<f64>,
}

impl DegreeModel {
    /// `d_i = theta (i/N)^{-1/(gamma-1)}` with `e_ij = d_i d_j / m`.
    pub fn build_power_law(theta: f64, gamma: f64, n: usize) -> Result<Self> {
        Self::build_power_law_with(theta, gamma, n, Divisor::M)
    }

    pub fn build_power_law_with(theta: f64, gamma: f64, n: usize, divisor: Divisor) -> Result<Self> {
        check_power_law_params(theta, gamma, n)?;
        let degrees: Vec<f64> = power_law_weights(gamma, n).into_iter().map(|w| theta * w).collect();
        let mut model = Self::from_degrees(degrees, divisor)?;
        model.theta = theta;
        model.gamma = gamma;
        Ok(model)
    }

    /// Arbitrary positive target degrees. `theta` and `gamma` are reported
    /// as NaN since no parametric family is attached.
    pub fn from_degrees(degrees: Vec<f64>, divisor: Divisor) -> Result<Self> {
        if degrees.is_empty() {
            return Err(Error::InvalidParameter("degree sequence is empty".into()));
        }
        if let Some(d) = degrees.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
            return Err(Error::InvalidParameter(format!("degrees must be positive, got {d}")));
        }
        let m = compensated_sum(degrees.iter().copied());
        let probs = probability_matrix(&degrees, &degrees, divisor.factor() * m)?;
        Ok(DegreeModel { n: degrees.len(), theta: f64::NAN, gamma: f64::NAN, degrees, m, divisor, probs })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }
    /// Sum of the target degrees.
    pub fn m(&self) -> f64 {
        self.m
    }
    pub fn divisor(&self) -> Divisor {
        self.divisor
    }

    /// Expected number of edges present in stationarity, `sum_ij e_ij`.
    pub fn expected_edges(&self) -> f64 {
        self.m / self.divisor.factor()
    }

    /// Row-major `N x N` matrix of on-probabilities.
    pub fn edge_probabilities(&self) -> &[f64] {
        &self.probs
    }

    /// `e_ij` for 1-based vertex indices.
    pub fn edge_on_probability(&self, i: usize, j: usize) -> Result<f64> {
        let i0 = check_index(i, self.n)?;
        let j0 = check_index(j, self.n)?;
        Ok(self.probs[i0 * self.n + j0])
    }
}

/// Degree model with distinct target out-degrees `d^+` and in-degrees `d^-`.
#[derive(Debug, Clone, PartialEq)]
pub struct InOutDegreeModel {
    n: usize,
    theta_plus: f64,
    gamma_plus: f64,
    theta_minus: f64,
    gamma_minus: f64,
    out_degrees: Vec<f64>,
    in_degrees: Vec<f64>,
    m: f64,
    probs: Vec<f64>,
}

impl InOutDegreeModel {
    /// Power-law out- and in-degrees; `theta_minus` is fixed by requiring
    /// `sum d^+ = sum d^-`.
    pub fn build_in_out(theta_plus: f64, gamma_plus: f64, gamma_minus: f64, n: usize) -> Result<Self> {
        check_power_law_params(theta_plus, gamma_plus, n)?;
        check_power_law_params(1.0, gamma_minus, n)?;
        let w_plus = power_law_weights(gamma_plus, n);
        let w_minus = power_law_weights(gamma_minus, n);
        let sum_plus = compensated_sum(w_plus.iter().copied());
        let sum_minus = compensated_sum(w_minus.iter().copied());
        let theta_minus = sum_plus * theta_plus / sum_minus;
        let out_degrees: Vec<f64> = w_plus.iter().map(|w| theta_plus * w).collect();
        let in_degrees: Vec<f64> = w_minus.iter().map(|w| theta_minus * w).collect();
        let m = compensated_sum(out_degrees.iter().copied());
        let probs = probability_matrix(&out_degrees, &in_degrees, m)?;
        Ok(InOutDegreeModel {
            n,
            theta_plus,
            gamma_plus,
            theta_minus,
            gamma_minus,
            out_degrees,
            in_degrees,
            m,
            probs,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn theta_plus(&self) -> f64 {
        self.theta_plus
    }
    pub fn gamma_plus(&self) -> f64 {
        self.gamma_plus
    }
    pub fn theta_minus(&self) -> f64 {
        self.theta_minus
    }
    pub fn gamma_minus(&self) -> f64 {
        self.gamma_minus
    }
    pub fn out_degrees(&self) -> &[f64] {
        &self.out_degrees
    }
    pub fn in_degrees(&self) -> &[f64] {
        &self.in_degrees
    }
    pub fn m(&self) -> f64 {
        self.m
    }
    pub fn expected_edges(&self) -> f64 {
        self.m
    }
    pub fn edge_probabilities(&self) -> &[f64] {
        &self.probs
    }

    /// `e_ij = d_i^+ d_j^- / m` for 1-based vertex indices.
    pub fn edge_on_probability(&self, i: usize, j: usize) -> Result<f64> {
        let i0 = check_index(i, self.n)?;
        let j0 = check_index(j, self.n)?;
        Ok(self.probs[i0 * self.n + j0])
    }
}

/// Either degree structure; the rest of the crate only needs `e_ij`.
#[derive(Debug, Clone, PartialEq)]
pub enum Degrees {
    Symmetric(DegreeModel),
    InOut(InOutDegreeModel),
}

impl Degrees {
    pub fn n(&self) -> usize {
        match self {
            Degrees::Symmetric(d) => d.n(),
            Degrees::InOut(d) => d.n(),
        }
    }

    pub fn edge_probabilities(&self) -> &[f64] {
        match self {
            Degrees::Symmetric(d) => d.edge_probabilities(),
            Degrees::InOut(d) => d.edge_probabilities(),
        }
    }

    pub fn edge_on_probability(&self, i: usize, j: usize) -> Result<f64> {
        match self {
            Degrees::Symmetric(d) => d.edge_on_probability(i, j),
            Degrees::InOut(d) => d.edge_on_probability(i, j),
        }
    }

    pub fn expected_edges(&self) -> f64 {
        match self {
            Degrees::Symmetric(d) => d.expected_edges(),
            Degrees::InOut(d) => d.expected_edges(),
        }
    }
}

impl From<DegreeModel> for Degrees {
    fn from(d: DegreeModel) -> Self {
        Degrees::Symmetric(d)
    }
}

impl From<InOutDegreeModel> for Degrees {
    fn from(d: InOutDegreeModel) -> Self {
        Degrees::InOut(d)
    }
}
