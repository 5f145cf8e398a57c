use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::dynamics::CorrelationState;
use crate::spectral::{allowed_momenta, PairAmplitudes};
use crate::{c64, Error, Result};

/// Majorana two-point functions with `A_j = c†_j + c_j`, `B_j = c†_j − c_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct MajoranaBlocks {
    /// `⟨A_m A_n⟩`
    pub aa: Mat<c64>,
    /// `⟨B_m B_n⟩`
    pub bb: Mat<c64>,
    /// `⟨A_m B_n⟩`
    pub ab: Mat<c64>,
    /// `⟨B_m A_n⟩`
    pub ba: Mat<c64>,
    /// Entries depend on `n − m` only.
    pub translation_invariant: bool,
}

/// Operator kind in a Majorana string.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Majorana {
    A,
    B,
}

impl MajoranaBlocks {
    /// Expands `A`, `B` in `c`, `c†` and evaluates with `(C, F)`.
    pub fn from_state(state: &CorrelationState) -> Self {
        let l = state.len();
        let (c, f) = (&state.c, &state.f);
        // ⟨c†_m c†_n⟩ = F†_mn, ⟨c†_m c_n⟩ = δ_mn − C_nm
        // ⟨(c†_m + a c_m)(c†_n + b c_n)⟩
        let block = |a: f64, b: f64| {
            Mat::from_fn(l, l, |m, n| {
                let delta = if m == n { 1.0 } else { 0.0 };
                let fd = f[(n, m)].conj();
                let cdc = c64::new(delta, 0.0) - c[(n, m)];
                fd + cdc * b + c[(m, n)] * a + f[(m, n)] * (a * b)
            })
        };
        MajoranaBlocks {
            aa: block(1.0, 1.0),
            bb: block(-1.0, -1.0),
            ab: block(1.0, -1.0),
            ba: block(-1.0, 1.0),
            translation_invariant: false,
        }
    }

    /// Closed-form k-sums for a translation-invariant BCS state
    /// `⊗_k (u_k |0_k⟩ + v_k |k,−k⟩)`.
    pub fn from_amplitudes(amps: &[PairAmplitudes], l: usize) -> Result<Self> {
        let ks = allowed_momenta(l)?;
        if amps.len() != ks.len() {
            return Err(Error::Parameter(format!(
                "expected {} momentum amplitudes for L = {l}, got {}",
                ks.len(),
                amps.len()
            )));
        }
        let lf = l as f64;
        let profile = |d: i64| {
            let mut im = 0.0;
            let mut ab = 0.0;
            for a in amps {
                let (s, c) = (a.k * d as f64).sin_cos();
                let uv = a.u * a.v.conj();
                im += s * uv.im;
                ab += 2.0 * c * (a.u.norm_sqr() - a.v.norm_sqr()) + 4.0 * s * uv.re;
            }
            (c64::new(0.0, 4.0 * im / lf), ab / lf)
        };
        let table: Vec<(c64, f64)> = (0..2 * l - 1).map(|t| profile(t as i64 - (l as i64 - 1))).collect();
        let at = |m: usize, n: usize| table[n + l - 1 - m];
        let eye = |m: usize, n: usize| if m == n { 1.0 } else { 0.0 };
        Ok(MajoranaBlocks {
            aa: Mat::from_fn(l, l, |m, n| at(m, n).0 + eye(m, n)),
            bb: Mat::from_fn(l, l, |m, n| at(m, n).0 - eye(m, n)),
            ab: Mat::from_fn(l, l, |m, n| c64::new(at(m, n).1, 0.0)),
            ba: Mat::from_fn(l, l, |m, n| c64::new(-at(n, m).1, 0.0)),
            translation_invariant: true,
        })
    }

    pub fn len(&self) -> usize {
        self.aa.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, a: Majorana, b: Majorana, m: usize, n: usize) -> c64 {
        match (a, b) {
            (Majorana::A, Majorana::A) => self.aa[(m, n)],
            (Majorana::B, Majorana::B) => self.bb[(m, n)],
            (Majorana::A, Majorana::B) => self.ab[(m, n)],
            (Majorana::B, Majorana::A) => self.ba[(m, n)],
        }
    }

    /// Largest violation of: `M_AA − 𝟙`, `M_BB + 𝟙` antisymmetric and
    /// `M_BA = −M_ABᵀ`.
    pub fn invariant_error(&self) -> f64 {
        let l = self.len();
        let mut err = 0.0f64;
        for m in 0..l {
            for n in 0..l {
                let d = if m == n { 2.0 } else { 0.0 };
                err = err
                    .max((self.aa[(m, n)] + self.aa[(n, m)] - d).norm())
                    .max((self.bb[(m, n)] + self.bb[(n, m)] + d).norm())
                    .max((self.ba[(m, n)] + self.ab[(n, m)]).norm());
            }
        }
        err
    }

    /// Real antisymmetric covariance `Γ_ab = i⟨γ_a γ_b⟩` (`a ≠ b`) of the
    /// Hermitian Majoranas `x_j = A_j`, `y_j = i B_j`, interleaved
    /// `(x_0, y_0, x_1, y_1, …)`, restricted to `sites`.
    pub fn covariance(&self, sites: &[usize]) -> Mat<f64> {
        let n = sites.len();
        Mat::from_fn(2 * n, 2 * n, |a, b| {
            let (sa, sb) = (sites[a / 2], sites[b / 2]);
            if a == b {
                return 0.0;
            }
            match (a % 2, b % 2) {
                (0, 0) => -self.aa[(sa, sb)].im,
                (1, 1) => self.bb[(sa, sb)].im,
                (0, 1) => -self.ab[(sa, sb)].re,
                _ => -self.ba[(sa, sb)].re,
            }
        })
    }

    pub fn full_covariance(&self) -> Mat<f64> {
        let sites: Vec<usize> = (0..self.len()).collect();
        self.covariance(&sites)
    }

    /// `‖Γ² + 𝟙‖_max`; zero for a pure Gaussian state.
    pub fn purity_error(&self) -> f64 {
        let g = self.full_covariance();
        let g2 = &g * &g;
        let mut err = 0.0f64;
        for j in 0..g2.ncols() {
            for i in 0..g2.nrows() {
                let want = if i == j { -1.0 } else { 0.0 };
                err = err.max((g2[(i, j)] - want).abs());
            }
        }
        err
    }

    /// Eigenvalues of the Hermitian matrix `iΓ` restricted to `sites`.
    pub fn covariance_spectrum(&self, sites: &[usize]) -> Result<Vec<f64>> {
        let g = self.covariance(sites);
        let h = Mat::from_fn(g.nrows(), g.ncols(), |i, j| c64::new(0.0, g[(i, j)]));
        h.self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Numerical(format!("covariance eigensolver failed: {e:?}")))
    }
}

pub fn blocks_from_state(state: &CorrelationState) -> MajoranaBlocks {
    MajoranaBlocks::from_state(state)
}

pub fn blocks_from_amplitudes(amps: &[PairAmplitudes], l: usize) -> Result<MajoranaBlocks> {
    MajoranaBlocks::from_amplitudes(amps, l)
}
