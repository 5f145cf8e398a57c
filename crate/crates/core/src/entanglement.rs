//! Von Neumann entropy of a contiguous block of spins.
//!
//! The reduced state of a block is Gaussian; its entropy follows from the
//! spectrum `±μ_r` of the Majorana covariance restricted to the block.

use serde::{Deserialize, Serialize};

use crate::correlators::MajoranaBlocks;
use crate::dynamics::CorrelationState;
use crate::{Error, Result};

/// Eigenvalues beyond `1 + EIGEN_SLACK` in modulus signal a corrupted state.
pub const EIGEN_SLACK: f64 = 1e-6;

/// Contiguous sites `start, start + 1, …, start + ell − 1` (periodic).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntropyRequest {
    pub start: usize,
    pub ell: usize,
}

impl EntropyRequest {
    pub fn new(start: usize, ell: usize) -> Self {
        EntropyRequest { start, ell }
    }

    /// Default block for trajectory observables: `ℓ = L/4` from site 0.
    pub fn quarter(l: usize) -> Self {
        EntropyRequest { start: 0, ell: (l / 4).max(1) }
    }

    fn sites(&self, l: usize) -> Result<Vec<usize>> {
        if self.ell == 0 || self.ell >= l {
            return Err(Error::Parameter(format!(
                "subsystem length must satisfy 1 <= ell <= L-1 = {} (got {})",
                l - 1,
                self.ell
            )));
        }
        if self.start >= l {
            return Err(Error::Parameter(format!(
                "subsystem start {} outside 0..{l}",
                self.start
            )));
        }
        Ok((0..self.ell).map(|a| (self.start + a) % l).collect())
    }
}

/// `S = −Σ_λ p ln p` with `p = (1 + λ)/2` over the spectrum of `iΓ`;
/// pairs `±μ` give the binary entropy of each normal mode.
pub fn entropy_from_spectrum(eigenvalues: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for &lam in eigenvalues {
        if lam.abs() > 1.0 + EIGEN_SLACK {
            return Err(Error::Numerical(format!(
                "covariance eigenvalue {lam} outside [-1, 1]; the state is not a valid Gaussian state"
            )));
        }
        let p = (0.5 * (1.0 + lam)).clamp(0.0, 1.0);
        if p > 0.0 {
            s -= p * p.ln();
        }
    }
    Ok(s.max(0.0))
}

pub fn entanglement_entropy(blocks: &MajoranaBlocks, request: EntropyRequest) -> Result<f64> {
    let sites = request.sites(blocks.len())?;
    entropy_from_spectrum(&blocks.covariance_spectrum(&sites)?)
}

pub fn state_entropy(state: &CorrelationState, request: EntropyRequest) -> Result<f64> {
    entanglement_entropy(&MajoranaBlocks::from_state(state), request)
}
