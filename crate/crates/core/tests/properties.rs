use proptest::prelude::*;

use dyncl::degree_model::{Degrees, DegreeModel, Divisor, InOutDegreeModel};
use dyncl::estimator::{ModelFamily, Structure};
use dyncl::graph_sim::{simulate, simulate_with, Binding, Engine, GraphModelSpec, LifetimeFamily, SamplingScheme, Side};
use dyncl::lifetimes::LifetimeDist;
use dyncl::moments::{model_moments, rho_erlang2, rho_t_xi, stationary_variance, Transform};
use dyncl::stat_tests::{histogram_density, ks_two_sample, qq_points};

fn edge_transforms(e: f64, hom: LifetimeDist, side: Side, xi: f64) -> (Transform, Transform) {
    let rate = match side {
        Side::On => e / (hom.mean() * (1.0 - e)),
        Side::Off => (1.0 - e) / (hom.mean() * e),
    };
    let other = Transform::of(&LifetimeDist::Exponential { rate }, xi).unwrap();
    let hom = Transform::of(&hom, xi).unwrap();
    match side {
        Side::On => (hom, other),
        Side::Off => (other, hom),
    }
}

fn sample() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e3f64..1e3, 5..80)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rho_t_increases_in_xi_and_stays_bounded(
        e in 0.02f64..0.98,
        rate in 0.05f64..5.0,
        shape in 0.3f64..1.0,
        side_on in any::<bool>(),
        xi in 0.05f64..20.0,
    ) {
        let side = if side_on { Side::On } else { Side::Off };
        for hom in [LifetimeDist::exponential(rate).unwrap(), LifetimeDist::weibull(rate, shape).unwrap()] {
            let (on, off) = edge_transforms(e, hom, side, xi);
            let (on2, off2) = edge_transforms(e, hom, side, 1.5 * xi);
            let r1 = rho_t_xi(e, &on, &off, xi).unwrap();
            let r2 = rho_t_xi(e, &on2, &off2, 1.5 * xi).unwrap();
            let cap = e * (1.0 - e);
            prop_assert!(r1 >= 0.0 && r2 <= cap * (1.0 + 1e-12));
            prop_assert!(r2 >= r1 - 1e-12 * cap, "{} then {}", r1, r2);
            let e2 = rho_erlang2(e, &on, &off, xi).unwrap();
            prop_assert!(e2 <= r1 + 1e-12 * cap);
        }
    }

    #[test]
    fn pareto_rho_t_bounded(e in 0.02f64..0.98, shape in 1.2f64..5.0, xi in 0.05f64..20.0) {
        let hom = LifetimeDist::pareto(1.0, shape).unwrap();
        let (on, off) = edge_transforms(e, hom, Side::Off, xi);
        let (on2, off2) = edge_transforms(e, hom, Side::Off, 1.5 * xi);
        let r1 = rho_t_xi(e, &on, &off, xi).unwrap();
        let r2 = rho_t_xi(e, &on2, &off2, 1.5 * xi).unwrap();
        prop_assert!(r1 >= 0.0 && r1 <= e * (1.0 - e) * (1.0 + 1e-12));
        if r2 < r1 {
            eprintln!("warning: Pareto rho(T) not monotone at e={e} shape={shape} xi={xi}: {r1} -> {r2}");
        }
    }

    #[test]
    fn ks_symmetric(a in sample(), b in sample()) {
        let x = ks_two_sample(&a, &b, 0.05).unwrap();
        let y = ks_two_sample(&b, &a, 0.05).unwrap();
        prop_assert_eq!(x.statistic, y.statistic);
        prop_assert_eq!(x.p_value, y.p_value);
        prop_assert!((0.0..=1.0).contains(&x.statistic));
    }

    #[test]
    fn qq_points_monotone(a in sample(), mean in -5.0f64..5.0, std in 0.1f64..10.0) {
        let q = qq_points(&a, mean, std).unwrap();
        prop_assert_eq!(q.len(), a.len());
        for w in q.windows(2) {
            prop_assert!(w[1].0 > w[0].0 && w[1].1 >= w[0].1);
        }
    }

    #[test]
    fn histogram_integrates_to_one(a in sample(), bins in 1usize..50) {
        let h = histogram_density(&a, bins).unwrap();
        let width = if h.len() > 1 { h[1].0 - h[0].0 } else { 0.0 };
        if h.len() > 1 {
            let total: f64 = h.iter().map(|p| p.1 * width).sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn simulation_is_deterministic(seed in any::<u64>(), xi in 0.5f64..10.0, pareto in any::<bool>()) {
        let lifetime = if pareto { LifetimeFamily::Pareto { scale: 1.0 } } else { LifetimeFamily::Exponential };
        let family = ModelFamily { structure: Structure::Symmetric { n: 8, divisor: Divisor::M }, homogeneous: Side::Off, lifetime };
        let spec = family.build(&[1.0, 3.0, 2.0]).unwrap();
        let scheme = SamplingScheme::Poisson { xi, k: 300 };
        let a = simulate(&spec, &scheme, seed).unwrap();
        prop_assert_eq!(&a, &simulate(&spec, &scheme, seed).unwrap());
        prop_assert!(a.times.windows(2).all(|w| w[1] > w[0]));
        if !pareto {
            let b = simulate_with(&spec, &scheme, seed, Engine::SkipAhead).unwrap();
            prop_assert_eq!(&b, &simulate_with(&spec, &scheme, seed, Engine::SkipAhead).unwrap());
        }
    }

    #[test]
    fn double_sums_invariant_under_transposition(gp in 2.5f64..5.0, gm in 2.5f64..5.0, xi in 0.5f64..10.0) {
        let n = 12;
        let Ok(model) = InOutDegreeModel::build_in_out(1.0, gp, gm, n) else { return Ok(()); };
        let degrees: Degrees = model.into();
        let probs = degrees.edge_probabilities().to_vec();
        prop_assume!(probs.iter().all(|&e| e > 0.0 && e < 1.0));
        let binding = Binding { homogeneous: Side::On, family: LifetimeFamily::Exponential, zeta: 1.0 };
        let spec = GraphModelSpec { degrees: degrees.clone(), binding };
        let mv = model_moments(&spec, &SamplingScheme::Poisson { xi, k: 10 }).unwrap();
        let hom = LifetimeDist::exponential(1.0).unwrap();
        let (mut s, mut rho1, mut var) = (0.0, 0.0, 0.0);
        for j in 0..n {
            for i in 0..n {
                let e = probs[i * n + j];
                let (on, off) = edge_transforms(e, hom, Side::On, xi);
                s += e;
                rho1 += rho_t_xi(e, &on, &off, xi).unwrap();
                var += e * (1.0 - e);
            }
        }
        prop_assert!((mv.s - s).abs() <= 1e-10 * s);
        prop_assert!((mv.rho1 - rho1).abs() <= 1e-10 * rho1);
        prop_assert!((stationary_variance(&degrees) - var).abs() <= 1e-10 * var);
    }

    #[test]
    fn relabelling_nodes_keeps_moments(perm_seed in any::<u64>(), xi in 0.5f64..10.0) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let base = DegreeModel::build_power_law(1.0, 3.0, 10).unwrap();
        let mut d = base.degrees().to_vec();
        d.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(perm_seed));
        let shuffled = DegreeModel::from_degrees(d, Divisor::M).unwrap();
        let binding = Binding { homogeneous: Side::Off, family: LifetimeFamily::Pareto { scale: 1.0 }, zeta: 2.5 };
        let scheme = SamplingScheme::Poisson { xi, k: 10 };
        let a = model_moments(&GraphModelSpec { degrees: base.into(), binding }, &scheme).unwrap();
        let b = model_moments(&GraphModelSpec { degrees: shuffled.into(), binding }, &scheme).unwrap();
        for (x, y) in [(a.s, b.s), (a.rho1, b.rho1), (a.rho2, b.rho2)] {
            prop_assert!((x - y).abs() <= 1e-10 * x.abs());
        }
    }
}
