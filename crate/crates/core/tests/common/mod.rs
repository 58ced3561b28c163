//! Independent reference computations shared by the oracle suite and the
//! acceptance gate. Each check returns `Ok(detail)` or `Err(detail)`.

#![allow(dead_code)]

use dyncl::degree_model::Divisor;
use dyncl::estimator::{compute_stats, solve_moments, MomentStats, ModelFamily, SolverOptions, Structure};
use dyncl::graph_sim::{simulate_with, split_seed, Engine, LifetimeFamily, SamplingScheme, Side};
use dyncl::lifetimes::LifetimeDist;
use dyncl::moments::{model_moments, moment_targets, rho_erlang2, rho_t_xi, v_matrix, Transform};
use dyncl::numeric::mean_and_std;
use dyncl::stat_tests::{ks_two_sample, normal_quantile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::gamma;

pub type Check = Result<String, String>;

pub fn verdict(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// ---------------------------------------------------------------------------
// adaptive Simpson
// ---------------------------------------------------------------------------

fn simpson_step<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return left + right + diff / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 60)
}

/// Integral over `[0, upper]` split at a geometric grid so that features
/// near the origin get their own panels.
pub fn simpson_half_line<F: Fn(f64) -> f64>(f: &F, upper: f64, tol: f64) -> f64 {
    let mut points = vec![0.0];
    let mut x = 1e-10;
    while x < upper {
        points.push(x);
        x *= 10.0;
    }
    points.push(upper);
    points.windows(2).map(|w| simpson(f, w[0], w[1], tol / points.len() as f64)).sum()
}

// ---------------------------------------------------------------------------
// model helpers
// ---------------------------------------------------------------------------

pub fn symmetric_family(homogeneous: Side, lifetime: LifetimeFamily) -> ModelFamily {
    ModelFamily { structure: Structure::Symmetric { n: 20, divisor: Divisor::M }, homogeneous, lifetime }
}

pub fn exp_transforms(e: f64, mu: f64, xi: f64) -> (Transform, Transform, f64) {
    // exponential on-times with rate mu, off rate fixed by the on-probability
    let lambda = mu * e / (1.0 - e);
    let on = Transform::of(&LifetimeDist::Exponential { rate: mu }, xi).unwrap();
    let off = Transform::of(&LifetimeDist::Exponential { rate: lambda }, xi).unwrap();
    (on, off, lambda + mu)
}

fn off_side_transforms(e: f64, off: LifetimeDist, xi: f64) -> (Transform, Transform) {
    let on_rate = (1.0 - e) / (off.mean() * e);
    let on = Transform::of(&LifetimeDist::Exponential { rate: on_rate }, xi).unwrap();
    (on, Transform::of(&off, xi).unwrap())
}

// ---------------------------------------------------------------------------
// checks
// ---------------------------------------------------------------------------

/// `rho(T_xi)` and `rho(E_xi,2)` of an exp/exp edge against quadrature of
/// the lag covariance `e (1 - e) exp(-(lambda + mu) t)`.
pub fn check_rho_t_quadrature() -> Check {
    let mut worst: f64 = 0.0;
    for &(e, mu, xi) in &[(0.3, 0.5, 5.0), (0.05, 2.0, 0.7), (0.9, 0.2, 12.0), (0.5, 1.0, 1.0)] {
        let (on, off, r) = exp_transforms(e, mu, xi);
        let rho = |t: f64| e * (1.0 - e) * (-r * t).exp();
        let upper = 60.0 / xi;
        let t_quad = simpson_half_line(&|t: f64| xi * (-xi * t).exp() * rho(t), upper, 1e-13);
        let e2_quad = simpson_half_line(&|t: f64| xi * xi * t * (-xi * t).exp() * rho(t), upper, 1e-13);
        worst = worst.max((rho_t_xi(e, &on, &off, xi).unwrap() - t_quad).abs());
        worst = worst.max((rho_erlang2(e, &on, &off, xi).unwrap() - e2_quad).abs());
    }
    verdict(worst <= 1e-8, format!("max abs error {worst:.2e} (tol 1e-8)"))
}

/// `rho(E_xi,2) = rho(T_xi) - xi d rho(T_xi)/d xi` with a central difference
/// in `xi`, for all three homogeneous families.
pub fn check_erlang_identity() -> Check {
    let mut worst: f64 = 0.0;
    let laws: [(&str, Box<dyn Fn(f64) -> (Transform, Transform)>); 3] = [
        ("exp", Box::new(|xi| {
            let (on, off, _) = exp_transforms(0.3, 0.5, xi);
            (on, off)
        })),
        ("weibull", Box::new(|xi| off_side_transforms(0.3, LifetimeDist::weibull(1.0, 0.6).unwrap(), xi))),
        ("pareto", Box::new(|xi| off_side_transforms(0.3, LifetimeDist::pareto(1.0, 2.0).unwrap(), xi))),
    ];
    for (_, law) in &laws {
        for &xi in &[0.5, 2.0, 5.0] {
            let rho_t = |x: f64| {
                let (on, off) = law(x);
                rho_t_xi(0.3, &on, &off, x).unwrap()
            };
            let h = 1e-4 * xi;
            let slope = (rho_t(xi + h) - rho_t(xi - h)) / (2.0 * h);
            let fd = rho_t(xi) - xi * slope;
            let (on, off) = law(xi);
            let exact = rho_erlang2(0.3, &on, &off, xi).unwrap();
            worst = worst.max(((exact - fd) / exact).abs());
        }
    }
    verdict(worst <= 1e-5, format!("max relative error {worst:.2e} (tol 1e-5)"))
}

/// `1 - L(s) = s int exp(-st) S(t) dt` and
/// `-L'(s) = int (1 - st) exp(-st) S(t) dt` by quadrature of the survival.
pub fn check_lst_quadrature() -> Check {
    let dists = [
        LifetimeDist::weibull(1.0, 0.5).unwrap(),
        LifetimeDist::weibull(2.0, 1.7).unwrap(),
        LifetimeDist::pareto(1.0, 2.0).unwrap(),
        LifetimeDist::pareto(0.5, 3.5).unwrap(),
        LifetimeDist::exponential(0.8).unwrap(),
    ];
    let mut worst: f64 = 0.0;
    for d in &dists {
        for &s in &[0.1, 1.0, 5.0, 20.0] {
            let upper = 60.0 / s;
            let tail = simpson_half_line(&|t: f64| (-s * t).exp() * d.survival(t), upper, 1e-13);
            let moment = simpson_half_line(&|t: f64| (1.0 - s * t) * (-s * t).exp() * d.survival(t), upper, 1e-13);
            worst = worst.max((d.lst(s).unwrap() - (1.0 - s * tail)).abs());
            worst = worst.max((d.one_minus_lst(s).unwrap() - s * tail).abs());
            worst = worst.max((d.lst_derivative(s).unwrap() + moment).abs());
        }
    }
    verdict(worst <= 1e-8, format!("max abs error {worst:.2e} (tol 1e-8)"))
}

/// Residual draws have mean `E Z^2 / (2 E Z)`; the band uses
/// `E R^2 = E Z^3 / (3 E Z)`.
pub fn check_residual_mean() -> Check {
    let weibull_moment = |c: f64, k: f64, n: f64| c.powf(-n / k) * gamma(1.0 + n / k);
    let lomax_moment = |c: f64, a: f64, n: i32| {
        // E Z^n = C^n n! / prod_{i=1..n} (a - i)
        (1..=n).fold(1.0, |acc, i| acc * c * i as f64 / (a - i as f64))
    };
    let cases = [
        (LifetimeDist::weibull(1.0, 0.5).unwrap(), weibull_moment(1.0, 0.5, 1.0), weibull_moment(1.0, 0.5, 2.0), weibull_moment(1.0, 0.5, 3.0)),
        (LifetimeDist::weibull(0.5, 2.0).unwrap(), weibull_moment(0.5, 2.0, 1.0), weibull_moment(0.5, 2.0, 2.0), weibull_moment(0.5, 2.0, 3.0)),
        (LifetimeDist::pareto(1.0, 4.5).unwrap(), lomax_moment(1.0, 4.5, 1), lomax_moment(1.0, 4.5, 2), lomax_moment(1.0, 4.5, 3)),
        (LifetimeDist::exponential(2.0).unwrap(), 0.5, 0.5, 0.75),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    let n = 200_000;
    let mut detail = Vec::new();
    let mut ok = true;
    for (d, m1, m2, m3) in cases {
        let target = m2 / (2.0 * m1);
        let second = m3 / (3.0 * m1);
        let se = ((second - target * target) / n as f64).sqrt();
        let mean = (0..n).map(|_| d.sample_residual(&mut rng).unwrap()).sum::<f64>() / n as f64;
        let z = (mean - target) / se;
        ok &= z.abs() <= 4.0;
        detail.push(format!("{z:+.2}"));
    }
    verdict(ok, format!("z-scores [{}] (band 4)", detail.join(", ")))
}

/// Paired runs of the two engines on the same seeds: mean paired
/// differences of the statistics within four standard errors of zero, and
/// the two statistic samples not separated by a KS test at 1%.
pub fn check_engine_agreement(pairs: usize) -> Check {
    let family = symmetric_family(Side::On, LifetimeFamily::Exponential);
    let spec = family.build(&[1.0, 3.0, 0.5]).unwrap();
    let scheme = SamplingScheme::Poisson { xi: 5.0, k: 3000 };
    let mut a = Vec::with_capacity(pairs);
    let mut b = Vec::with_capacity(pairs);
    for i in 0..pairs {
        let seed = split_seed(0xE6, i as u64);
        a.push(compute_stats(&simulate_with(&spec, &scheme, seed, Engine::SkipAhead).unwrap()).unwrap());
        b.push(compute_stats(&simulate_with(&spec, &scheme, seed, Engine::EventDriven).unwrap()).unwrap());
    }
    let mut ok = true;
    let mut zs = Vec::new();
    for idx in 0..3 {
        let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x.as_array()[idx] - y.as_array()[idx]).collect();
        let (m, s) = mean_and_std(&d);
        let z = if s == 0.0 { 0.0 } else { m / (s / (pairs as f64).sqrt()) };
        ok &= z.abs() <= 4.0;
        zs.push(format!("{z:+.2}"));
    }
    let sa: Vec<f64> = a.iter().map(|s| s.s_hat).collect();
    let sb: Vec<f64> = b.iter().map(|s| s.s_hat).collect();
    let ks = ks_two_sample(&sa, &sb, 0.01).unwrap();
    ok &= !ks.reject;
    verdict(ok, format!("paired z [{}], KS p {:.3}", zs.join(", "), ks.p_value))
}

/// Analytic Jacobian of the moment targets against central differences.
pub fn check_v_matrix() -> Check {
    let mut worst: f64 = 0.0;
    for scheme in [SamplingScheme::Equidistant { delta: 0.2, k: 10 }, SamplingScheme::Poisson { xi: 5.0, k: 10 }] {
        for &p in &[[33.97, 26.4, 23.7], [2.5, 0.8, 0.1], [120.0, 3.0, 1e-3]] {
            let v = v_matrix(p[0], p[1], p[2], &scheme);
            for j in 0..3 {
                let h = 1e-5 * (1.0 + p[j].abs());
                let (mut up, mut dn) = (p, p);
                up[j] += h;
                dn[j] -= h;
                let fu = moment_targets(up[0], up[1], up[2], &scheme);
                let fd = moment_targets(dn[0], dn[1], dn[2], &scheme);
                for i in 0..3 {
                    let num = (fu[i] - fd[i]) / (2.0 * h);
                    worst = worst.max((num - v[i][j]).abs() / (1.0 + v[i][j].abs()));
                }
            }
        }
    }
    verdict(worst <= 1e-8, format!("max scaled error {worst:.2e} (tol 1e-8)"))
}

/// Rejection frequency of the two-sample test at 5% on samples from one
/// normal law.
pub fn check_ks_calibration(trials: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| normal_quantile(rng.gen_range(1e-15..1.0))).collect() };
    let mut rejections = 0;
    for _ in 0..trials {
        let (a, b) = (draw(100), draw(100));
        rejections += ks_two_sample(&a, &b, 0.05).unwrap().reject as usize;
    }
    let freq = rejections as f64 / trials as f64;
    verdict((0.03..=0.07).contains(&freq), format!("rejection frequency {freq:.4} over {trials} trials (band [0.03, 0.07])"))
}

/// Exact model moments fed back as statistics recover the parameters.
/// Combinations outside the feasible region (`e_ij >= 1`) or with a
/// non-finite mean are skipped.
pub fn check_exact_round_trip() -> Check {
    let families = [
        (Side::On, LifetimeFamily::Exponential, true),
        (Side::Off, LifetimeFamily::Exponential, true),
        (Side::Off, LifetimeFamily::Weibull { scale: 1.0 }, false),
        (Side::Off, LifetimeFamily::Pareto { scale: 1.0 }, false),
    ];
    let schemes = [SamplingScheme::Equidistant { delta: 0.2, k: 100_000 }, SamplingScheme::Poisson { xi: 5.0, k: 100_000 }];
    let opts = SolverOptions::default();
    let (mut solved, mut skipped, mut worst) = (0, 0, 0.0f64);
    let mut failures = Vec::new();
    for (homogeneous, lifetime, exp_exp) in families {
        let family = symmetric_family(homogeneous, lifetime);
        for scheme in &schemes {
            if !exp_exp && matches!(scheme, SamplingScheme::Equidistant { .. }) {
                continue;
            }
            for theta in [0.5, 1.0] {
                for gamma in [2.0, 3.0, 4.0] {
                    for zeta in [0.5, 1.0, 2.0] {
                        let truth = [theta, gamma, zeta];
                        let Ok(spec) = family.build(&truth) else {
                            skipped += 1;
                            continue;
                        };
                        let Ok(mv) = model_moments(&spec, scheme) else {
                            skipped += 1;
                            continue;
                        };
                        let stats = MomentStats { s_hat: mv.s, rho1_hat: mv.rho1, rho2_hat: mv.rho2, k: scheme.k() };
                        match solve_moments(&stats, &family, scheme, &opts) {
                            Ok(r) if r.solver.converged => {
                                solved += 1;
                                let err = truth.iter().zip(r.params).map(|(t, p)| ((p - t) / t).abs()).fold(0.0, f64::max);
                                worst = worst.max(err);
                                if err > 1e-6 {
                                    failures.push(format!("{:?}/{truth:?}: {:?}", lifetime, r.params));
                                }
                            }
                            other => failures.push(format!("{lifetime:?}/{truth:?}: {:?}", other.map(|r| r.params))),
                        }
                    }
                }
            }
        }
    }
    verdict(
        failures.is_empty() && solved > 0,
        format!("{solved} solved, {skipped} skipped, max relative error {worst:.2e} (tol 1e-6){}", if failures.is_empty() { String::new() } else { format!("; failures {failures:?}") }),
    )
}
