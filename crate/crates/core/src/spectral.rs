//! Model parameters, the momentum grid of the even-parity sector and the
//! complex quasiparticle spectrum of the no-click Hamiltonian.
//!
//! The Jordan-Wigner convention maps `σ⁺_j` to an annihilator, so an
//! empty site is a spin pointing along `+z`. In the even-parity sector the
//! fermions obey anti-periodic boundary conditions and the positive momenta
//! are `k = (2m - 1)π/L`, `m = 1..L/2`. Each pair `(k, -k)` contributes a
//! 2×2 block
//!
//! ```text
//! H_k = | ε_k   Δ_k |      ε_k = 2 cos k − 2h − iγ/2
//!       | Δ_k  −ε_k |      Δ_k = −2 sin k
//! ```
//!
//! acting on `{|0_k⟩, |k,−k⟩}`, with eigenvalues `±Λ_k`.

use std::f64::consts::PI;

use faer::c64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Chain size, transverse field and measurement rate (`J = 1`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    #[serde(rename = "L")]
    pub l: usize,
    pub h: f64,
    pub gamma: f64,
}

impl ModelParams {
    /// Validated constructor: `L` even and at least 4, `γ ≥ 0`, finite `h`.
    pub fn new(l: usize, h: f64, gamma: f64) -> Result<Self> {
        let params = ModelParams { l, h, gamma };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.l < 4 || self.l % 2 != 0 {
            return Err(Error::Parameter(format!(
                "L must be even and >= 4 (got {})",
                self.l
            )));
        }
        if !self.h.is_finite() {
            return Err(Error::Parameter("h must be finite".into()));
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(Error::Parameter(format!(
                "gamma >= 0 required (got {})",
                self.gamma
            )));
        }
        Ok(())
    }

    /// `γ / γ_c(h)`, or `None` outside the gapless window `|h| < 1`.
    pub fn gamma_over_critical(&self) -> Option<f64> {
        critical_rate(self.h).ok().map(|gc| self.gamma / gc)
    }
}

/// Critical measurement rate `γ_c(h) = 4 √(1 − h²)`.
pub fn critical_rate(h: f64) -> Result<f64> {
    if !(h.abs() < 1.0) {
        return Err(Error::Domain(format!(
            "no gapless phase exists at this field (|h| = {} >= 1)",
            h.abs()
        )));
    }
    Ok(4.0 * (1.0 - h * h).sqrt())
}

/// Momentum `k* = arccos h` at which the decay-rate gap closes.
pub fn gap_momentum(h: f64) -> Result<f64> {
    if !(h.abs() < 1.0) {
        return Err(Error::Domain(format!(
            "k* is undefined for |h| = {} >= 1",
            h.abs()
        )));
    }
    Ok(h.acos())
}

/// Positive momenta `(2m − 1)π/L` of the anti-periodic sector, ascending.
pub fn allowed_momenta(l: usize) -> Result<Vec<f64>> {
    if l == 0 || l % 2 != 0 {
        return Err(Error::Parameter(format!("L must be even (got {l})")));
    }
    Ok((1..=l / 2)
        .map(|m| (2 * m - 1) as f64 * PI / l as f64)
        .collect())
}

/// Spectral data of one momentum pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeData {
    pub k: f64,
    pub epsilon: c64,
    pub delta: f64,
    /// `Λ_k = E_k + iΓ_k` on the branch with `Γ_k ≤ 0`.
    pub lambda: c64,
}

impl ModeData {
    pub fn new(k: f64, h: f64, gamma: f64) -> Self {
        let epsilon = c64::new(2.0 * k.cos() - 2.0 * h, -gamma / 2.0);
        let delta = -2.0 * k.sin();
        let radicand = c64::new(
            1.0 - 2.0 * h * k.cos() + h * h - gamma * gamma / 16.0,
            gamma / 2.0 * (h - k.cos()),
        );
        ModeData {
            k,
            epsilon,
            delta,
            lambda: select_branch(2.0 * radicand.sqrt()),
        }
    }

    /// Real part `E_k` of the quasiparticle energy.
    pub fn energy(&self) -> f64 {
        self.lambda.re
    }

    /// Decay rate `Γ_k ≤ 0`.
    pub fn decay(&self) -> f64 {
        self.lambda.im
    }
}

/// Keeps the principal root unless its imaginary part is positive. On the
/// real axis (up to rounding) the root with `E_k ≥ 0` is taken.
fn select_branch(root: c64) -> c64 {
    if root.im.abs() <= 1e-14 * root.norm() {
        c64::new(root.re.abs(), 0.0)
    } else if root.im > 0.0 {
        -root
    } else {
        root
    }
}

/// Quasiparticle data for every positive momentum.
pub fn mode_spectrum(params: &ModelParams) -> Result<Vec<ModeData>> {
    params.validate()?;
    Ok(allowed_momenta(params.l)?
        .into_iter()
        .map(|k| ModeData::new(k, params.h, params.gamma))
        .collect())
}

/// Normalised amplitudes of `u_k |0_k⟩ + v_k |k,−k⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairAmplitudes {
    pub k: f64,
    pub u: c64,
    pub v: c64,
}

impl PairAmplitudes {
    pub fn norm_sqr(&self) -> f64 {
        self.u.norm_sqr() + self.v.norm_sqr()
    }
}

/// Vacuum of the non-Hermitian quasiparticles of a single mode:
/// `u ∝ Λ_k − ε_k`, `v ∝ −Δ_k`.
pub fn mode_vacuum(mode: &ModeData) -> Result<PairAmplitudes> {
    let a = mode.lambda - mode.epsilon;
    let b = -mode.delta;
    let norm = (a.norm_sqr() + b * b).sqrt();
    if norm < 1e-14 {
        return Err(Error::Numerical(format!(
            "exceptional mode at k = {}: Λ_k = ε_k and Δ_k = 0, the vacuum is |0_k⟩",
            mode.k
        )));
    }
    Ok(PairAmplitudes {
        k: mode.k,
        u: a / norm,
        v: c64::new(b / norm, 0.0),
    })
}

/// Residual of `γ_{±k} |vac_k⟩ = 0`, i.e. `|(Λ_k − ε_k) v + Δ_k u|`.
pub fn annihilation_residual(mode: &ModeData, amps: &PairAmplitudes) -> f64 {
    ((mode.lambda - mode.epsilon) * amps.v + amps.u * mode.delta).norm()
}

/// The stationary no-click state `⊗_k |vac_k⟩` as per-mode amplitudes.
pub fn noclick_vacuum(params: &ModelParams) -> Result<Vec<PairAmplitudes>> {
    mode_spectrum(params)?.iter().map(mode_vacuum).collect()
}
