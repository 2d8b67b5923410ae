mod common;

use common::{desk_instance, rng, scalar_grid_optimum, scalar_setup};
use crane_core::metrics::{alpha_equality, gamma1, gamma2, lambda_value};
use crane_core::sca::lift::{lift_channel, lift_vector};
use crane_core::sca::{
    build_subproblem1, build_subproblem2, initial_feasible_point, linearize_gamma1, linearize_gamma2, run_algorithm1,
    ScaOptions,
};
use crane_core::solver::{solve, SolveStatus};
use num_complex::Complex64;
use rand::Rng;

#[test]
fn gamma1_minorant_hand_values() {
    let lin = linearize_gamma1(1.0, &[1.0], 0).unwrap();
    assert!((lin.eval(2.0, 2.0) - 2.0).abs() < 1e-15);
    assert!((gamma1(2.0, &[2.0]) - 2.0).abs() < 1e-15);
    assert!((lin.eval(2.0, 1.0) - 0.0).abs() < 1e-15);
    assert!((gamma1(2.0, &[1.0]) - 0.5).abs() < 1e-15);
    assert!(linearize_gamma1(0.0, &[1.0], 3).is_err());
}

#[test]
fn gamma1_minorant_lower_bounds_on_random_points() {
    let mut r = rng(21);
    for _ in 0..10_000 {
        let k = r.random_range(1..6);
        let c_t: Vec<f64> = (0..k).map(|_| r.random_range(0.0..3.0)).collect();
        let alpha_t = r.random_range(0.01..10.0);
        let lin = linearize_gamma1(alpha_t, &c_t, 0).unwrap();
        let s_t: f64 = c_t.iter().sum();
        assert!((lin.eval(alpha_t, s_t) - gamma1(alpha_t, &c_t)).abs() <= 1e-9 * gamma1(alpha_t, &c_t).max(1.0));
        let c: Vec<f64> = (0..k).map(|_| r.random_range(0.0..3.0)).collect();
        let alpha = r.random_range(0.01..10.0);
        let s: f64 = c.iter().sum();
        assert!(gamma1(alpha, &c) - lin.eval(alpha, s) >= -1e-9);
    }
}

#[test]
fn gamma2_minorant_lower_bounds_on_random_points() {
    let mut r = rng(22);
    let cn = |r: &mut rand_chacha::ChaCha8Rng, n: usize| -> Vec<Complex64> {
        (0..n).map(|_| Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))).collect()
    };
    for _ in 0..10_000 {
        let n = r.random_range(1..5);
        let h = lift_channel(&cn(&mut r, n));
        let m_t = lift_vector(&cn(&mut r, n));
        let lin = linearize_gamma2(&m_t, &h);
        assert!((lin.eval(&m_t) - gamma2(&m_t, &h)).abs() <= 1e-9 * gamma2(&m_t, &h).max(1.0));
        let m = lift_vector(&cn(&mut r, n));
        assert!(gamma2(&m, &h) - lin.eval(&m) >= -1e-9);
    }
    let h = lift_channel(&[Complex64::new(0.3, -1.2), Complex64::new(2.0, 0.5)]);
    let zero = linearize_gamma2(&[0.0; 4], &h);
    assert!(zero.gradient.iter().all(|&g| g == 0.0) && zero.constant == 0.0);
}

#[test]
fn single_device_subproblem_shape() {
    let (cfg, ch, stats) = scalar_setup(Complex64::new(0.6, 0.8));
    let init = initial_feasible_point(&cfg, &ch, &stats).unwrap();
    let sub = build_subproblem1(&init, &cfg, &stats, &ch, &ScaOptions::default()).unwrap();
    assert_eq!(sub.program.num_vars(), 1 + 1 + 1 + 2);
    assert_eq!(sub.program.constraints.len(), 4);
    assert!(sub.program.max_violation(&sub.warm_start) == 0.0);
}

#[test]
fn single_device_matches_grid_search() {
    let h = Complex64::new(0.6, 0.8);
    let (cfg, ch, stats) = scalar_setup(h);
    let (sol, state) = run_algorithm1(&cfg, &ch, &stats, &ScaOptions::default()).unwrap();
    let grid = scalar_grid_optimum(&cfg, h, &stats);
    let got = state.objective();
    assert!((got - grid).abs() <= 1e-3 * grid, "{got} vs {grid}");
    assert!(sol.receive_strength.get(0, 0) > 0.0);
}

#[test]
fn subproblem_anchors_are_feasible_and_never_lose() {
    let opts = ScaOptions::default();
    for seed in 0..50 {
        let (cfg, inst) = desk_instance(seed);
        let init = initial_feasible_point(&cfg, &inst.channels, &inst.stats).unwrap();
        let sub = build_subproblem1(&init, &cfg, &inst.stats, &inst.channels, &opts).unwrap();
        assert_eq!(sub.program.max_violation(&sub.warm_start), 0.0, "seed {seed}");
        let r = solve(&sub.program, Some(&sub.warm_start), &opts.solver).unwrap();
        assert_ne!(r.status, SolveStatus::Infeasible);
        assert!(r.objective >= sub.program.objective_value(&sub.warm_start) - 1e-9, "seed {seed}");
    }
}

#[test]
fn subproblem2_noise_term_is_affine_in_q() {
    let (cfg, inst) = desk_instance(3);
    let mut r = rng(23);
    let mn = cfg.mn();
    let m: Vec<Complex64> = (0..mn).map(|_| Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))).collect();
    let c = vec![0.3; cfg.devices];
    let q1: Vec<f64> = (0..mn).map(|_| r.random_range(0.1..2.0)).collect();
    let q2: Vec<f64> = (0..mn).map(|_| r.random_range(0.1..2.0)).collect();
    let mid: Vec<f64> = q1.iter().zip(&q2).map(|(a, b)| 0.5 * (a + b)).collect();
    let d = 0;
    let l = |q: &[f64]| lambda_value(&c, &m, q, &inst.stats, &cfg, d).unwrap();
    let (a, b, mm) = (l(&q1), l(&q2), l(&mid));
    assert!((mm - 0.5 * (a + b)).abs() <= 1e-12 * mm.abs().max(1.0));
}

#[test]
fn subproblem2_weakly_improves_with_capacity() {
    let opts = ScaOptions::default();
    for seed in 0..5 {
        let (cfg, inst) = desk_instance(seed);
        let init = initial_feasible_point(&cfg, &inst.channels, &inst.stats).unwrap();
        let mut objs = Vec::new();
        for cap in [cfg.fronthaul_capacity, 2.0 * cfg.fronthaul_capacity] {
            let mut c = cfg.clone();
            c.fronthaul_capacity = cap;
            let sub = build_subproblem2(&init, &c, &inst.stats, &inst.channels, &opts).unwrap();
            assert_eq!(sub.program.max_violation(&sub.warm_start), 0.0);
            let r = solve(&sub.program, Some(&sub.warm_start), &opts.solver).unwrap();
            objs.push(r.objective);
        }
        assert!(objs[1] >= objs[0] - 1e-6 * objs[0].abs().max(1.0), "{objs:?}");
    }
}

#[test]
fn algorithm_runs_are_monotone_consistent_and_zero_forcing() {
    let opts = ScaOptions::default();
    for seed in 100..110 {
        let (cfg, inst) = desk_instance(seed);
        let (sol, state) = run_algorithm1(&cfg, &inst.channels, &inst.stats, &opts).unwrap();
        let objs = state.objectives();
        for w in objs.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "seed {seed}: {objs:?}");
        }
        assert!(state.iteration <= opts.max_iters);
        assert!(state.reports.iter().all(|r| r.anchor_violation == 0.0));
        for d in 0..cfg.dims {
            if inst.stats.mean_separation(d) <= 0.0 {
                continue;
            }
            let col = sol.receive_strength.column(d);
            let eq = alpha_equality(&col, &sol.beamformers[d], &sol.quantization, &inst.stats, &cfg, d).unwrap();
            assert!((sol.aux_gain[d] - eq).abs() <= 1e-5 * eq, "seed {seed} dim {d}: {} vs {eq}", sol.aux_gain[d]);
        }
        let b = sol.transmit_scalars(&inst.channels).unwrap();
        for k in 0..cfg.devices {
            for d in 0..cfg.dims {
                let g = inst.channels.effective(&sol.beamformers[d], k);
                let c = sol.receive_strength.get(k, d);
                let z = g * b[k][d];
                assert!((z.re - c).abs() <= 1e-10 * c.max(1e-300) + 1e-300 && z.im.abs() <= 1e-10 * c.max(1e-300) + 1e-300);
            }
        }
        // The returned point anchors a strictly feasible next subproblem 1.
        let next = build_subproblem1(&sol, &cfg, &inst.stats, &inst.channels, &opts).unwrap();
        assert_eq!(next.program.max_violation(&next.warm_start), 0.0);
    }
}
