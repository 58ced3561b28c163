//! Stationary simulation of the dynamic Chung-Lu graph.
//!
//! Each of the `N^2` directed edges (self-loops included) is an independent
//! alternating renewal process started in equilibrium, and only the total
//! edge count at the sampling times is recorded.
//!
//! Two engines are provided:
//! - [`Engine::EventDriven`] rolls each edge's renewal timeline forward and
//!   marks the snapshot indices covered by every on-period in a difference
//!   array, so its cost is `O(K + renewals)` per run.
//! - [`Engine::SkipAhead`] (exponential lifetimes only) draws each edge's
//!   state at the next snapshot directly from the two-state transition law,
//!   `O(K)` per edge.

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::degree_model::Degrees;
use crate::error::{Error, Result};
use crate::lifetimes::LifetimeDist;

/// Which side of each edge has a common (homogeneous) law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    On,
    Off,
}

/// One-parameter lifetime families; the free parameter `zeta` is the
/// exponential rate, or the shape for Weibull and Pareto.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LifetimeFamily {
    Exponential,
    Weibull { scale: f64 },
    Pareto { scale: f64 },
}

impl LifetimeFamily {
    pub fn instantiate(&self, zeta: f64) -> Result<LifetimeDist> {
        match *self {
            LifetimeFamily::Exponential => LifetimeDist::exponential(zeta),
            LifetimeFamily::Weibull { scale } => LifetimeDist::weibull(scale, zeta),
            LifetimeFamily::Pareto { scale } => LifetimeDist::pareto(scale, zeta),
        }
    }

    /// Open lower bound of the admissible `zeta`.
    pub fn zeta_floor(&self) -> f64 {
        match self {
            LifetimeFamily::Pareto { .. } => 1.0,
            _ => 0.0,
        }
    }
}

/// The homogeneous side carries `family(zeta)`; the other side is
/// exponential with a per-edge rate fixed by `mean_on / (mean_on + mean_off) = e_ij`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Binding {
    pub homogeneous: Side,
    pub family: LifetimeFamily,
    pub zeta: f64,
}

impl Binding {
    pub fn homogeneous_dist(&self) -> Result<LifetimeDist> {
        self.family.instantiate(self.zeta)
    }

    /// Both lifetimes exponential.
    pub fn is_exp_exp(&self) -> bool {
        matches!(self.family, LifetimeFamily::Exponential)
    }
}

/// Rate of the exponential side that gives edge on-probability `e` when the
/// homogeneous side has mean `mean`.
pub fn derived_rate(homogeneous: Side, mean: f64, e: f64) -> f64 {
    match homogeneous {
        // off mean g = f (1-e)/e
        Side::On => e / (mean * (1.0 - e)),
        // on mean f = g e/(1-e)
        Side::Off => (1.0 - e) / (mean * e),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphModelSpec {
    pub degrees: Degrees,
    pub binding: Binding,
}

/// Fully resolved lifetime pair of one edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeLaw {
    pub on: LifetimeDist,
    pub off: LifetimeDist,
    pub on_probability: f64,
}

/// Per-edge lifetime laws, row-major over `(i, j)`.
pub fn resolve_binding(spec: &GraphModelSpec) -> Result<Vec<EdgeLaw>> {
    let hom = spec.binding.homogeneous_dist()?;
    let mean = hom.mean();
    let n = spec.degrees.n();
    spec.degrees
        .edge_probabilities()
        .iter()
        .enumerate()
        .map(|(idx, &e)| {
            if !(e > 0.0 && e < 1.0) {
                return Err(Error::DegenerateEdge { i: idx / n + 1, j: idx % n + 1, e });
            }
            let rate = derived_rate(spec.binding.homogeneous, mean, e);
            if !(rate > 0.0 && rate.is_finite()) {
                return Err(Error::DegenerateEdge { i: idx / n + 1, j: idx % n + 1, e });
            }
            let derived = LifetimeDist::Exponential { rate };
            let (on, off) = match spec.binding.homogeneous {
                Side::On => (hom, derived),
                Side::Off => (derived, hom),
            };
            Ok(EdgeLaw { on, off, on_probability: e })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SamplingScheme {
    /// Snapshots at `delta, 2 delta, ..., k delta`.
    Equidistant { delta: f64, k: usize },
    /// Snapshots at the first `k` points of a rate-`xi` Poisson process.
    Poisson { xi: f64, k: usize },
}

impl SamplingScheme {
    pub fn k(&self) -> usize {
        match *self {
            SamplingScheme::Equidistant { k, .. } | SamplingScheme::Poisson { k, .. } => k,
        }
    }

    pub fn with_k(&self, k: usize) -> Self {
        match *self {
            SamplingScheme::Equidistant { delta, .. } => SamplingScheme::Equidistant { delta, k },
            SamplingScheme::Poisson { xi, .. } => SamplingScheme::Poisson { xi, k },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (v, name) = match *self {
            SamplingScheme::Equidistant { delta, .. } => (delta, "delta"),
            SamplingScheme::Poisson { xi, .. } => (xi, "xi"),
        };
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
        }
        if self.k() == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        Ok(())
    }

    /// Snapshot times; Poisson gaps are drawn from `rng`.
    pub fn sampling_times<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match *self {
            SamplingScheme::Equidistant { delta, k } => (1..=k).map(|i| i as f64 * delta).collect(),
            SamplingScheme::Poisson { xi, k } => {
                let mut t = 0.0;
                (0..k)
                    .map(|_| {
                        let u: f64 = rng.sample(Open01);
                        t += -u.ln() / xi;
                        t
                    })
                    .collect()
            }
        }
    }
}

/// Total edge counts at the sampling times of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSeries {
    pub times: Vec<f64>,
    pub counts: Vec<u32>,
    pub scheme: SamplingScheme,
    pub seed: u64,
}

impl SnapshotSeries {
    /// Assembles a series read back from disk, checking the invariants.
    pub fn from_parts(times: Vec<f64>, counts: Vec<u32>, scheme: SamplingScheme, seed: u64) -> Result<Self> {
        if times.len() != counts.len() {
            return Err(Error::Format(format!("{} times but {} counts", times.len(), counts.len())));
        }
        if times.first().map_or(false, |&t| t < 0.0) || times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Format("snapshot times must be nonnegative and strictly increasing".into()));
        }
        Ok(SnapshotSeries { scheme: scheme.with_k(times.len()), times, counts, seed })
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    /// Skip-ahead when both lifetimes are exponential and it is estimated to
    /// be cheaper, event-driven otherwise.
    #[default]
    Auto,
    SkipAhead,
    EventDriven,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Counter-based derivation of the `index`-th child seed of `root`.
pub fn split_seed(root: u64, index: u64) -> u64 {
    splitmix64(root ^ splitmix64(index))
}

/// Independent ChaCha stream `stream` of a run seed. Stream 0 drives the
/// sampling times, stream `1 + e` drives edge `e` (row-major).
pub fn stream_rng(run_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(run_seed);
    rng.set_stream(stream);
    rng
}

/// State after time `t` of a two-state Markov edge with off-time rate
/// `lambda` and on-time rate `mu`:
/// `P(on at t | on) = lambda/(lambda+mu) + mu/(lambda+mu) exp(-(lambda+mu) t)`.
pub fn exp_skip_ahead_state<R: Rng + ?Sized>(on: bool, lambda: f64, mu: f64, t: f64, rng: &mut R) -> bool {
    let r = lambda + mu;
    let e = lambda / r;
    let decay = (-r * t).exp();
    let p_on = if on { e + (1.0 - e) * decay } else { e * (1.0 - decay) };
    rng.gen::<f64>() < p_on
}

pub fn simulate(spec: &GraphModelSpec, scheme: &SamplingScheme, seed: u64) -> Result<SnapshotSeries> {
    simulate_with(spec, scheme, seed, Engine::Auto)
}

pub fn simulate_with(spec: &GraphModelSpec, scheme: &SamplingScheme, seed: u64, engine: Engine) -> Result<SnapshotSeries> {
    scheme.validate()?;
    let laws = resolve_binding(spec)?;
    let times = scheme.sampling_times(&mut stream_rng(seed, 0));
    let all_exp = laws.iter().all(|l| l.on.is_exponential() && l.off.is_exponential());
    let engine = match engine {
        Engine::Auto => {
            if all_exp && skip_ahead_is_cheaper(&laws, &times, scheme) {
                Engine::SkipAhead
            } else {
                Engine::EventDriven
            }
        }
        Engine::SkipAhead if !all_exp => return Err(Error::WrongFamily("exponential on- and off-times for the skip-ahead engine")),
        other => other,
    };
    let counts = match engine {
        Engine::SkipAhead => skip_ahead_counts(&laws, &times, scheme, seed),
        _ => event_driven_counts(&laws, &times, seed)?,
    };
    Ok(SnapshotSeries { times, counts, scheme: *scheme, seed })
}

fn skip_ahead_is_cheaper(laws: &[EdgeLaw], times: &[f64], scheme: &SamplingScheme) -> bool {
    let horizon = times.last().copied().unwrap_or(0.0);
    let k = times.len() as f64;
    // measured in uniform draws: an equidistant step is one draw, a Poisson
    // step adds an exponential, a switch adds a draw and a search
    let step = match scheme {
        SamplingScheme::Equidistant { .. } => 1.0,
        SamplingScheme::Poisson { .. } => 2.2,
    };
    let skip_cost = step * k * laws.len() as f64;
    let switches: f64 = laws.iter().map(|l| 2.0 * horizon / (l.on.mean() + l.off.mean())).sum();
    skip_cost < 4.0 * switches + k
}

/// First index `>= from` whose time is `>= t`: a branch-free count over the
/// next few times, then galloping.
fn first_not_before(times: &[f64], from: usize, t: f64) -> usize {
    const WINDOW: usize = 8;
    let k = times.len();
    if from + WINDOW <= k {
        let below = times[from..from + WINDOW].iter().map(|&x| (x < t) as usize).sum::<usize>();
        if below < WINDOW {
            return from + below;
        }
    } else {
        return from + times[from..].iter().take_while(|&&x| x < t).count();
    }
    // times[lo] < t
    let mut lo = from + WINDOW - 1;
    let mut step = 1;
    let hi = loop {
        let probe = lo + step;
        if probe >= k {
            break k;
        }
        if times[probe] >= t {
            break probe;
        }
        lo = probe;
        step *= 2;
    };
    lo + 1 + times[lo + 1..hi].partition_point(|&x| x < t)
}

fn event_driven_counts(laws: &[EdgeLaw], times: &[f64], seed: u64) -> Result<Vec<u32>> {
    let k = times.len();
    let mut diff = vec![0i32; k + 1];
    for (idx, law) in laws.iter().enumerate() {
        let mut rng = stream_rng(seed, 1 + idx as u64);
        let on = rng.gen::<f64>() < law.on_probability;
        let mut end = if on { law.on.sample_residual(&mut rng)? } else { law.off.sample_residual(&mut rng)? };
        let mut first = 0;
        if !on {
            first = first_not_before(times, 0, end);
            if first >= k {
                continue;
            }
            end += law.on.sample(&mut rng);
        }
        // alternate on and off periods; snapshots first..hi fall in the on period
        loop {
            let hi = first_not_before(times, first, end);
            diff[first] += 1;
            diff[hi] -= 1;
            if hi >= k {
                break;
            }
            end += law.off.sample(&mut rng);
            first = first_not_before(times, hi, end);
            if first >= k {
                break;
            }
            end += law.on.sample(&mut rng);
        }
    }
    let mut running = 0i32;
    Ok(diff[..k]
        .iter()
        .map(|d| {
            running += d;
            running as u32
        })
        .collect())
}

fn skip_ahead_counts(laws: &[EdgeLaw], times: &[f64], scheme: &SamplingScheme, seed: u64) -> Vec<u32> {
    let k = times.len();
    let mut counts = vec![0u32; k];
    for (idx, law) in laws.iter().enumerate() {
        let mut rng = stream_rng(seed, 1 + idx as u64);
        let lambda = 1.0 / law.off.mean();
        let mu = 1.0 / law.on.mean();
        let mut on = rng.gen::<f64>() < law.on_probability;
        match *scheme {
            SamplingScheme::Equidistant { delta, .. } => {
                let r = lambda + mu;
                let e = lambda / r;
                let decay = (-r * delta).exp();
                let stay_on = e + (1.0 - e) * decay;
                let turn_on = e * (1.0 - decay);
                for c in counts.iter_mut() {
                    on = rng.gen::<f64>() < if on { stay_on } else { turn_on };
                    *c += on as u32;
                }
            }
            SamplingScheme::Poisson { .. } => {
                let mut prev = 0.0;
                for (c, &t) in counts.iter_mut().zip(times) {
                    on = exp_skip_ahead_state(on, lambda, mu, t - prev, &mut rng);
                    prev = t;
                    *c += on as u32;
                }
            }
        }
    }
    counts
}
