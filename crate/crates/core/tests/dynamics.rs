mod common;

use common::*;
use mipt_core::dynamics::*;
use mipt_core::linalg::{antisymmetry_error, hermiticity_error, max_abs};
use mipt_core::{c64, ModelParams};
use rand::Rng;

fn distance(a: &CorrelationState, b: &CorrelationState) -> f64 {
    max_diff(&a.c, &b.c).max(max_diff(&a.f, &b.f))
}

#[test]
fn drift_preserves_structure_on_generic_states() {
    for seed in 0..4 {
        let (state, _) = trajectory_state(10, 0.3, 2.0, 400, seed);
        let params = ModelParams::new(10, 0.3, 2.0).unwrap();
        let hop = HoppingMatrices::new(&params);
        let (dc, df) = drift_derivatives(&state, &params, &hop).unwrap();
        assert!(hermiticity_error(dc.as_ref()) < 1e-12);
        assert!(antisymmetry_error(df.as_ref()) < 1e-12);
    }
}

#[test]
fn drift_of_product_state_activates_pairing() {
    let params = ModelParams::new(8, 0.7, 0.0).unwrap();
    let hop = HoppingMatrices::new(&params);
    let state = initial_product_state(8).unwrap();
    let (dc, df) = drift_derivatives(&state, &params, &hop).unwrap();
    assert!(max_abs(dc.as_ref()) < 1e-15);
    let h2 = hop.h2.to_dense();
    let want = faer::Mat::from_fn(8, 8, |i, j| h2[(i, j)] * c64::new(0.0, 2.0));
    assert!(max_diff(&df, &want) < 1e-15);
}

#[test]
fn rk5_local_error_is_sixth_order() {
    let (l, h, gamma) = (8, 0.3, 2.0);
    let params = ModelParams::new(l, h, gamma).unwrap();
    let (start, _) = trajectory_state(l, h, gamma, 300, 5);
    let one_step_error = |dt: f64| {
        let coarse = rk5_step(&start, &params, dt).unwrap();
        let mut fine = start.clone();
        for _ in 0..100 {
            fine = rk5_step(&fine, &params, dt / 100.0).unwrap();
        }
        distance(&coarse, &fine)
    };
    let (e1, e2) = (one_step_error(0.08), one_step_error(0.04));
    let ratio = e1 / e2;
    assert!((40.0..100.0).contains(&ratio), "error ratio {ratio} (errors {e1:.3e}, {e2:.3e})");
}

#[test]
fn tiny_steps_barely_move_the_state() {
    let params = ModelParams::new(8, 0.3, 1.0).unwrap();
    let (start, _) = trajectory_state(8, 0.3, 1.0, 200, 2);
    let s = rk5_step(&start, &params, 1e-9).unwrap();
    assert!(distance(&s, &start) < 1e-7);
}

#[test]
fn jump_resets_site_probability() {
    let (l, gamma, dt) = (10, 2.0, 0.005);
    let (mut state, _) = trajectory_state(l, 0.2, gamma, 500, 3);
    for j in [0, 4, 9] {
        apply_jump(&mut state, j).unwrap();
        assert_eq!(state.c[(j, j)], c64::new(1.0, 0.0));
        assert!((0..l).all(|m| state.f[(j, m)] == c64::new(0.0, 0.0)));
        let p = jump_probabilities(&state, gamma, dt).unwrap();
        assert!((p.per_site[j] - gamma * dt).abs() < 1e-15);
        assert!(state.purity_error() < 1e-8);
    }
}

#[test]
fn invariants_hold_along_long_trajectory() {
    let config = TrajectoryConfig {
        params: ModelParams::new(32, 0.2, 2.0).unwrap(),
        dt: 0.005,
        t_max: 50.0,
        sample_every: 1.0,
        seed: 21,
    };
    let mut stepper = TrajectoryStepper::new(config.params, config.dt).unwrap();
    let mut rng = mipt_core::rng::stream_rng(config.seed, 0);
    let mut jumps = 0;
    for step in 1..=config.steps() {
        let r: f64 = rng.random();
        jumps += stepper.advance(r).unwrap().is_some() as usize;
        if step % config.sample_stride() == 0 {
            let s = stepper.state();
            assert!(s.hermiticity_error() < 1e-8);
            assert!(s.antisymmetry_error() < 1e-8);
            assert!(s.purity_error() < 1e-6, "purity {}", s.purity_error());
            assert!(s.sigma_z().iter().all(|z| (-1.0 - 2e-8..=1.0 + 2e-8).contains(z)));
        }
    }
    assert!(jumps > 100);
}

#[test]
fn jump_count_matches_accumulated_probability() {
    let mut observed = 0usize;
    let mut expected = 0.0;
    for t in 0..100u64 {
        let config = TrajectoryConfig {
            params: ModelParams::new(16, 0.2, 5.0).unwrap(),
            dt: 0.005,
            t_max: 2.0,
            sample_every: 2.0,
            seed: mipt_core::rng::child_seed(9, t),
        };
        let record = evolve_trajectory(&config, &mut []).unwrap();
        observed += record.jumps.len();
        expected += record.expected_jumps;
    }
    let rel = (observed as f64 - expected).abs() / expected;
    assert!(rel < 0.1, "observed {observed}, expected {expected:.1}");
}

#[test]
fn oversized_step_is_a_configuration_error() {
    let params = ModelParams::new(16, 0.2, 5.0).unwrap();
    let mut stepper = TrajectoryStepper::new(params, 0.02).unwrap();
    let err = stepper.advance(0.5).unwrap_err();
    assert!(format!("{err}").contains("dt"), "{err}");
}
