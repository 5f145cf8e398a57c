//! Browser bindings for the interactive demo page in `www/`.
//!
//! All functions work on the stationary no-click state and return flat
//! `Float64Array`s so the page can plot them without extra decoding.

use mipt_core::correlators::{correlation_tensor, ctilde_profile, Axis};
use mipt_core::noclick::{noclick_blocks, noclick_observables, NoclickOptions};
use mipt_core::qfi::AnnealSchedule;
use mipt_core::spectral::{critical_rate, gap_momentum, mode_spectrum};
use mipt_core::{ModelParams, Result};
use wasm_bindgen::prelude::*;

fn js<T>(r: Result<T>) -> std::result::Result<T, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

/// `γ_c(h)`, or `NaN` for `|h| ≥ 1`.
#[wasm_bindgen]
pub fn critical_gamma(h: f64) -> f64 {
    critical_rate(h).unwrap_or(f64::NAN)
}

/// `k*(h)`, or `NaN` for `|h| ≥ 1`.
#[wasm_bindgen]
pub fn kstar(h: f64) -> f64 {
    gap_momentum(h).unwrap_or(f64::NAN)
}

fn spectrum_flat(l: usize, h: f64, gamma: f64) -> Result<Vec<f64>> {
    let modes = mode_spectrum(&ModelParams::new(l, h, gamma)?)?;
    Ok(modes.iter().flat_map(|m| [m.k, m.energy(), m.decay()]).collect())
}

/// Quasiparticle spectrum, one entry per momentum pair `k ∈ (0, π)`, flattened as
/// `[k, Re Λ, Im Λ, k, …]`.
#[wasm_bindgen]
pub fn spectrum(l: usize, h: f64, gamma: f64) -> std::result::Result<Vec<f64>, JsError> {
    js(spectrum_flat(l, h, gamma))
}

fn correlator_flat(l: usize, h: f64, gamma: f64) -> Result<Vec<f64>> {
    let p = ModelParams::new(l, h, gamma)?;
    let tensor = correlation_tensor(&noclick_blocks(&p)?)?;
    let xx = ctilde_profile(&tensor, (Axis::X, Axis::X))?;
    let zz = ctilde_profile(&tensor, (Axis::Z, Axis::Z))?;
    Ok((1..=l / 2)
        .flat_map(|d| [tensor.get(Axis::X, Axis::X, 0, d).re, xx[d - 1], zz[d - 1]])
        .collect())
}

/// No-click correlators along the chain, flattened as
/// `[C^xx_{0,ℓ}, C̃^xx_ℓ, C̃^zz_ℓ]` for `ℓ = 1 … L/2`.
#[wasm_bindgen]
pub fn noclick_correlator(l: usize, h: f64, gamma: f64) -> std::result::Result<Vec<f64>, JsError> {
    js(correlator_flat(l, h, gamma))
}

/// Maximal QFI density of the no-click state and the optimal directions.
#[wasm_bindgen]
pub struct QfiOutcome {
    fq_max: f64,
    entropy: f64,
    directions: Vec<f64>,
}

#[wasm_bindgen]
impl QfiOutcome {
    /// `F_Q^max / L`.
    #[wasm_bindgen(getter)]
    pub fn fq_max(&self) -> f64 {
        self.fq_max
    }

    /// Entanglement entropy of the first `L/4` sites (nats).
    #[wasm_bindgen(getter)]
    pub fn entropy(&self) -> f64 {
        self.entropy
    }

    /// Unit vectors `[n_x, n_y, n_z]` per site, flattened.
    #[wasm_bindgen(getter)]
    pub fn directions(&self) -> Vec<f64> {
        self.directions.clone()
    }
}

fn qfi_outcome(l: usize, h: f64, gamma: f64, seed: u64, restarts: usize) -> Result<QfiOutcome> {
    let options = NoclickOptions {
        schedule: AnnealSchedule { sweeps_per_site: 20, ..AnnealSchedule::default() },
        restarts: restarts.max(1),
        seed,
        ell: None,
    };
    let obs = noclick_observables(&ModelParams::new(l, h, gamma)?, &options)?;
    Ok(QfiOutcome {
        fq_max: obs.qfi.fq_density,
        entropy: obs.entropy,
        directions: obs.qfi.directions.n.iter().flatten().copied().collect(),
    })
}

#[wasm_bindgen]
pub fn optimal_directions(
    l: usize,
    h: f64,
    gamma: f64,
    seed: u64,
    restarts: usize,
) -> std::result::Result<QfiOutcome, JsError> {
    js(qfi_outcome(l, h, gamma, seed, restarts))
}
