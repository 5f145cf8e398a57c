mod common;

use common::trajectory_state;
use mipt_core::analysis::linear_fit;
use mipt_core::correlators::MajoranaBlocks;
use mipt_core::entanglement::*;
use mipt_core::noclick::noclick_blocks;
use mipt_core::ModelParams;

#[test]
fn complementary_blocks_have_equal_entropy() {
    let (state, _) = trajectory_state(16, 0.2, 2.0, 1500, 5);
    let blocks = MajoranaBlocks::from_state(&state);
    for ell in 1..16 {
        let a = entanglement_entropy(&blocks, EntropyRequest::new(0, ell)).unwrap();
        let b = entanglement_entropy(&blocks, EntropyRequest::new(ell, 16 - ell)).unwrap();
        assert!((a - b).abs() < 1e-8, "ell = {ell}: {a} vs {b}");
        assert!(a >= 0.0 && a <= ell as f64 * 2f64.ln() + 1e-8);
    }
}

#[test]
fn restricted_covariance_spectrum_is_paired() {
    let (state, _) = trajectory_state(12, 0.4, 1.0, 1000, 6);
    let blocks = MajoranaBlocks::from_state(&state);
    let sites: Vec<usize> = (3..8).collect();
    let mut ev = blocks.covariance_spectrum(&sites).unwrap();
    ev.sort_by(f64::total_cmp);
    for (a, b) in ev.iter().zip(ev.iter().rev()) {
        assert!((a + b).abs() < 1e-8);
    }
    assert!(ev.iter().all(|e| e.abs() <= 1.0 + 1e-8));
}

#[test]
fn critical_ground_state_has_logarithmic_entropy() {
    let sizes = [32usize, 64, 128, 256];
    let (mut logs, mut values) = (Vec::new(), Vec::new());
    for l in sizes {
        let blocks = noclick_blocks(&ModelParams::new(l, 1.0, 0.0).unwrap()).unwrap();
        logs.push((l as f64).ln());
        values.push(entanglement_entropy(&blocks, EntropyRequest::quarter(l)).unwrap());
    }
    let fit = linear_fit(&logs, &values).unwrap();
    let coefficient = 1.0 / 6.0;
    assert!((fit.slope / coefficient - 1.0).abs() < 0.15, "slope {}", fit.slope);
}

#[test]
fn corrupted_covariance_is_rejected() {
    let (state, _) = trajectory_state(8, 0.2, 2.0, 300, 1);
    let mut blocks = MajoranaBlocks::from_state(&state);
    for j in 0..8 {
        blocks.ab[(j, j)] *= 3.0;
        blocks.ba[(j, j)] *= 3.0;
    }
    assert!(entanglement_entropy(&blocks, EntropyRequest::new(0, 4)).is_err());
}
