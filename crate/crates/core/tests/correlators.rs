mod common;

use common::*;
use faer::Mat;
use mipt_core::analysis::linear_fit;
use mipt_core::correlators::*;
use mipt_core::noclick::noclick_blocks;
use mipt_core::rng::stream_rng;
use mipt_core::spectral::{critical_rate, gap_momentum, noclick_vacuum};
use mipt_core::{c64, ModelParams};
use rand::Rng;

fn random_antisymmetric(n: usize, seed: u64) -> Mat<c64> {
    let mut rng = stream_rng(seed, 3);
    let mut a = Mat::zeros(n, n);
    for j in 0..n {
        for i in 0..j {
            let z = c64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            a[(i, j)] = z;
            a[(j, i)] = -z;
        }
    }
    a
}

#[test]
fn pfaffian_squares_to_determinant() {
    for (seed, n) in [(0, 2), (1, 6), (2, 12), (3, 12), (4, 20)] {
        let a = random_antisymmetric(n, seed);
        let pf = pfaffian(a.as_ref()).unwrap();
        let det = a.determinant();
        assert!((pf * pf - det).norm() < 1e-10 * det.norm(), "n = {n}");
    }
}

#[test]
fn pfaffian_flips_sign_when_two_indices_swap() {
    let a = random_antisymmetric(8, 7);
    let swap = |k: usize| match k {
        2 => 5,
        5 => 2,
        k => k,
    };
    let b = Mat::from_fn(8, 8, |i, j| a[(swap(i), swap(j))]);
    let (pa, pb) = (pfaffian(a.as_ref()).unwrap(), pfaffian(b.as_ref()).unwrap());
    assert!((pa + pb).norm() < 1e-12 * pa.norm());
}

#[test]
fn momentum_sums_agree_with_real_space_blocks() {
    for &(h, gamma) in &[(0.2, 1.0), (0.6, 6.0), (-0.5, 0.3)] {
        let l = 8;
        let psi = SpinChain { l, h, gamma }.noclick_stationary();
        let (c, f) = fermion_correlations(&psi, l);
        let state = mipt_core::dynamics::CorrelationState::new(c, f, 0.0).unwrap();
        let real = MajoranaBlocks::from_state(&state);
        let params = ModelParams::new(l, h, gamma).unwrap();
        let momentum = MajoranaBlocks::from_amplitudes(&noclick_vacuum(&params).unwrap(), l).unwrap();
        for (x, y) in [(&real.aa, &momentum.aa), (&real.bb, &momentum.bb), (&real.ab, &momentum.ab), (&real.ba, &momentum.ba)] {
            assert!(max_diff(x, y) < 1e-10, "{}", max_diff(x, y));
        }
    }
}

#[test]
fn real_space_blocks_match_operator_expectations() {
    let (state, psi) = trajectory_state(6, 0.4, 2.0, 600, 12);
    let psi = psi.unwrap();
    let blocks = MajoranaBlocks::from_state(&state);
    let a = |j: usize, v: &[c64]| -> Vec<c64> {
        create(v, j).iter().zip(annihilate(v, j)).map(|(x, y)| x + y).collect()
    };
    let b = |j: usize, v: &[c64]| -> Vec<c64> {
        create(v, j).iter().zip(annihilate(v, j)).map(|(x, y)| x - y).collect()
    };
    for m in 0..6 {
        for n in 0..6 {
            let aa = inner(&psi, &a(m, &a(n, &psi)));
            let bb = inner(&psi, &b(m, &b(n, &psi)));
            let ab = inner(&psi, &a(m, &b(n, &psi)));
            let ba = inner(&psi, &b(m, &a(n, &psi)));
            assert!((blocks.aa[(m, n)] - aa).norm() < 1e-10);
            assert!((blocks.bb[(m, n)] - bb).norm() < 1e-10);
            assert!((blocks.ab[(m, n)] - ab).norm() < 1e-10);
            assert!((blocks.ba[(m, n)] - ba).norm() < 1e-10);
        }
    }
    assert!(blocks.invariant_error() < 1e-12);
}

#[test]
fn paramagnetic_ground_state_correlators() {
    let (l, h) = (8, 2.0);
    let psi = SpinChain { l, h, gamma: 0.0 }.ground_state();
    let blocks = noclick_blocks(&ModelParams::new(l, h, 0.0).unwrap()).unwrap();
    let tensor = correlation_tensor(&blocks).unwrap();
    for &(a, b) in &NONZERO_PAIRS {
        for i in 0..l {
            for j in 0..l {
                let want = connected(&psi, pauli(a), i, pauli(b), j);
                assert!((tensor.get(a, b, i, j) - want).norm() < 1e-8);
            }
        }
    }
    let wide = noclick_blocks(&ModelParams::new(64, h, 0.0).unwrap()).unwrap();
    let ells: Vec<f64> = (1..=8).map(|d| d as f64).collect();
    let logs: Vec<f64> = (1..=8).map(|d| spin_xx(&wide, 0, d).unwrap().norm().ln()).collect();
    let fit = linear_fit(&ells, &logs).unwrap();
    assert!(fit.r_squared > 0.99 && fit.slope < -0.5, "{fit:?}");
}

fn pauli(a: Axis) -> Pauli {
    match a {
        Axis::X => Pauli::X,
        Axis::Y => Pauli::Y,
        Axis::Z => Pauli::Z,
    }
}

#[test]
fn exchange_symmetry_and_zz_symmetry() {
    let (state, _) = trajectory_state(12, 0.2, 2.0, 800, 4);
    let tensor = correlation_tensor_from_state(&state).unwrap();
    assert!(tensor.exchange_asymmetry() < 1e-10);
    let zz = tensor.block((Axis::Z, Axis::Z)).unwrap();
    for i in 0..12 {
        assert!((0.0..=4.0).contains(&zz[(i, i)].re));
        for j in 0..12 {
            assert!((zz[(i, j)] - zz[(j, i)]).norm() < 1e-12);
            assert!(zz[(i, j)].im.abs() < 1e-12);
        }
    }
}

#[test]
fn averaged_correlator_matches_direct_sum() {
    let (state, _) = trajectory_state(6, 0.2, 2.0, 500, 8);
    let tensor = correlation_tensor_from_state(&state).unwrap();
    for &pair in &NONZERO_PAIRS {
        for ell in 1..=3 {
            let mut direct = 0.0;
            for i in 0..6 {
                direct += tensor.get(pair.0, pair.1, i, (i + ell) % 6).norm();
            }
            direct /= 6.0;
            let got = averaged_abs_correlator(&tensor, pair, ell).unwrap();
            assert!((got - direct).abs() < 1e-14);
        }
    }
    assert!(averaged_abs_correlator(&tensor, (Axis::X, Axis::X), 4).is_err());
    assert!(averaged_abs_correlator(&tensor, (Axis::X, Axis::X), 0).is_err());
}

#[test]
fn translation_invariant_average_is_a_single_entry() {
    let params = ModelParams::new(24, 0.2, 1.0).unwrap();
    let tensor = correlation_tensor(&noclick_blocks(&params).unwrap()).unwrap();
    for &pair in &NONZERO_PAIRS {
        for ell in 1..=12 {
            let got = averaged_abs_correlator(&tensor, pair, ell).unwrap();
            assert!((got - tensor.get(pair.0, pair.1, 0, ell).norm()).abs() < 1e-12);
        }
    }
}

fn gamma_at(h: f64, ratio: f64) -> f64 {
    ratio * critical_rate(h).unwrap()
}

#[test]
fn gapless_xx_oscillation_period() {
    let h = 0.2;
    let params = ModelParams::new(1024, h, gamma_at(h, 0.3)).unwrap();
    let blocks = noclick_blocks(&params).unwrap();
    let row: Vec<f64> = (1..=160).map(|d| spin_xx(&blocks, 0, d).unwrap().re).collect();
    let mut crossings = Vec::new();
    for d in 1..row.len() {
        let (a, b) = (row[d - 1], row[d]);
        if a * b < 0.0 {
            crossings.push(d as f64 + a / (a - b));
        }
    }
    assert!(crossings.len() > 20);
    let span = crossings.last().unwrap() - crossings[0];
    let period = 2.0 * span / (crossings.len() - 1) as f64;
    let want = 2.0 * std::f64::consts::PI / (std::f64::consts::PI - gap_momentum(h).unwrap());
    assert!((period / want - 1.0).abs() < 0.02, "period {period}, expected {want}");
}

#[test]
fn gapped_xx_decays_exponentially() {
    let h = 0.2;
    let params = ModelParams::new(128, h, gamma_at(h, 1.5)).unwrap();
    let blocks = noclick_blocks(&params).unwrap();
    let tensor = correlation_tensor_for(&blocks, &[(Axis::X, Axis::X)]).unwrap();
    let ct: Vec<f64> = (0..=41)
        .map(|d| if d == 0 { 0.0 } else { averaged_abs_correlator(&tensor, (Axis::X, Axis::X), d).unwrap() })
        .collect();
    let (mut ells, mut logs) = (Vec::new(), Vec::new());
    for d in 5..=40 {
        if ct[d] > ct[d - 1] && ct[d] >= ct[d + 1] {
            ells.push(d as f64);
            logs.push(ct[d].ln());
        }
    }
    assert!(ells.len() >= 6);
    let fit = linear_fit(&ells, &logs).unwrap();
    assert!(fit.r_squared > 0.99, "R² = {}", fit.r_squared);
    assert!(fit.slope < 0.0);
}

#[test]
fn xx_is_the_slowest_block_in_the_gapless_vacuum() {
    let h = 0.2;
    let params = ModelParams::new(1024, h, gamma_at(h, 0.3)).unwrap();
    let blocks = noclick_blocks(&params).unwrap();
    let zz = spin_zz(&blocks);
    let far = 40..=60;
    let envelope = |f: &dyn Fn(usize) -> f64| far.clone().map(f).fold(0.0, f64::max);
    let xx = envelope(&|d| spin_xx(&blocks, 0, d).unwrap().norm());
    let others = [
        envelope(&|d| spin_yy(&blocks, 0, d).unwrap().norm()),
        envelope(&|d| spin_xy(&blocks, 0, d).unwrap().norm()),
        envelope(&|d| spin_yx(&blocks, 0, d).unwrap().norm()),
        envelope(&|d| zz[(0, d)].norm()),
    ];
    for o in others {
        assert!(xx > 2.0 * o, "xx envelope {xx:.3e} vs {o:.3e}");
    }
}
