use rand::Rng;
use serde::{Deserialize, Serialize};

use super::CorrelationState;
use crate::{c64, Error, Result};

/// Smallest `C_jj` for which a jump at `j` is still accepted.
pub const JUMP_GUARD: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpProbabilities {
    pub per_site: Vec<f64>,
    pub total: f64,
}

/// `p_j = γ dt C_jj`.
pub fn jump_probabilities(state: &CorrelationState, gamma: f64, dt: f64) -> Result<JumpProbabilities> {
    let mut per_site = Vec::with_capacity(state.len());
    for j in 0..state.len() {
        let p = gamma * dt * state.c[(j, j)].re;
        if p < -1e-10 {
            return Err(Error::Numerical(format!(
                "corrupted state: negative jump probability {p} at site {j}"
            )));
        }
        per_site.push(p.max(0.0));
    }
    let total = per_site.iter().sum();
    Ok(JumpProbabilities { per_site, total })
}

/// Chooses the jump site for a given uniform `r ∈ [0, 1]`: none when `r > P`,
/// otherwise the first site whose cumulative weight reaches `r`.
pub fn select_jump(probs: &JumpProbabilities, r: f64) -> Result<Option<usize>> {
    if probs.total >= 1.0 {
        return Err(Error::Config(format!(
            "total jump probability per step is {:.3} >= 1; choose a smaller dt (dt·γ·L < 0.5)",
            probs.total
        )));
    }
    if r > probs.total {
        return Ok(None);
    }
    let mut acc = 0.0;
    let mut last = None;
    for (j, &p) in probs.per_site.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = Some(j);
            if acc >= r {
                return Ok(Some(j));
            }
        }
    }
    Ok(last)
}

/// Draws one uniform number and selects a site with [`select_jump`].
pub fn sample_jump<R: Rng + ?Sized>(probs: &JumpProbabilities, rng: &mut R) -> Result<Option<usize>> {
    let r: f64 = rng.random();
    select_jump(probs, r)
}

/// Projects site `j` onto spin-up and renormalises.
pub fn apply_jump(state: &mut CorrelationState, j: usize) -> Result<()> {
    let l = state.len();
    if j >= l {
        return Err(Error::Parameter(format!("site {j} out of range for L = {l}")));
    }
    let cjj = state.c[(j, j)].re;
    if !(cjj > JUMP_GUARD) {
        return Err(Error::InfeasibleJump { site: j, weight: cjj });
    }
    let inv = 1.0 / cjj;
    let c_col: Vec<c64> = (0..l).map(|m| state.c[(m, j)]).collect();
    let c_row: Vec<c64> = (0..l).map(|n| state.c[(j, n)]).collect();
    let f_col: Vec<c64> = (0..l).map(|m| state.f[(m, j)]).collect();
    let f_row: Vec<c64> = (0..l).map(|n| state.f[(j, n)]).collect();
    for n in 0..l {
        for m in 0..l {
            let dc = -c_col[m] * c_row[n] + f_col[m] * f_col[n].conj();
            let df = -c_col[m] * f_row[n] + f_row[m] * c_col[n];
            state.c[(m, n)] += dc * inv;
            state.f[(m, n)] += df * inv;
        }
    }
    let zero = c64::new(0.0, 0.0);
    for m in 0..l {
        state.c[(m, j)] = zero;
        state.c[(j, m)] = zero;
        state.f[(m, j)] = zero;
        state.f[(j, m)] = zero;
    }
    state.c[(j, j)] = c64::new(1.0, 0.0);
    Ok(())
}
