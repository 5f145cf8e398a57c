//! Quantum Fisher information of `Ô = ½ Σ_j n_j·σ_j` on a pure state,
//! `F_Q = Σ_{ij} Σ_{αβ} n_i^α C^{αβ}_{ij} n_j^β`, and its maximisation over
//! unit-vector fields.
//!
//! The form is evaluated through the real symmetric `3L × 3L` coupling
//! `Q_{(iα),(jβ)} = Re(C^{αβ}_{ij} + C^{βα}_{ji}) / 2`. Maximising it is the
//! ground-state problem of the classical Heisenberg-like energy
//! `H_cl = −F_Q`, solved by simulated annealing.

mod anneal;
mod brute;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::correlators::{Axis, SpinCorrelationTensor};
use crate::{Error, Result};

pub use anneal::{maximize_qfi, AnnealDiagnostics, AnnealSchedule, QfiResult};
pub use brute::{brute_force_max, BRUTE_FORCE_MAX_L};

/// Imaginary residual of the form above which the tensor is rejected.
pub const IMAGINARY_TOLERANCE: f64 = 1e-6;

/// One unit vector per site.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionField {
    pub n: Vec<[f64; 3]>,
}

impl DirectionField {
    /// Normalises every vector; zero vectors are rejected.
    pub fn new(n: Vec<[f64; 3]>) -> Result<Self> {
        let n = n
            .into_iter()
            .enumerate()
            .map(|(j, v)| {
                let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                if !(norm > 0.0) || !norm.is_finite() {
                    Err(Error::Parameter(format!("direction at site {j} has zero or invalid norm")))
                } else {
                    Ok([v[0] / norm, v[1] / norm, v[2] / norm])
                }
            })
            .collect::<Result<_>>()?;
        Ok(DirectionField { n })
    }

    pub fn uniform(l: usize, axis: Axis) -> Self {
        let mut v = [0.0; 3];
        v[axis.index()] = 1.0;
        DirectionField { n: vec![v; l] }
    }

    pub fn len(&self) -> usize {
        self.n.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n.is_empty()
    }

    pub fn max_norm_error(&self) -> f64 {
        self.n
            .iter()
            .map(|v| ((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn negated(&self) -> Self {
        DirectionField {
            n: self.n.iter().map(|v| [-v[0], -v[1], -v[2]]).collect(),
        }
    }

    pub(crate) fn flat(&self) -> Vec<f64> {
        self.n.iter().flat_map(|v| v.iter().copied()).collect()
    }
}

/// Real symmetric coupling matrix of the quadratic form.
#[derive(Clone, Debug, PartialEq)]
pub struct QfiCoupling {
    l: usize,
    /// Row-major `3L × 3L`.
    q: Vec<f64>,
}

impl QfiCoupling {
    pub fn new(tensor: &SpinCorrelationTensor) -> Self {
        let l = tensor.len();
        let dim = 3 * l;
        let mut q = vec![0.0; dim * dim];
        for a in 0..dim {
            let (i, al) = (a / 3, Axis::ALL[a % 3]);
            for b in 0..dim {
                let (j, be) = (b / 3, Axis::ALL[b % 3]);
                q[a * dim + b] = 0.5 * (tensor.get(al, be, i, j) + tensor.get(be, al, j, i)).re;
            }
        }
        QfiCoupling { l, q }
    }

    pub fn len(&self) -> usize {
        self.l
    }

    pub fn is_empty(&self) -> bool {
        self.l == 0
    }

    pub fn matrix(&self) -> Mat<f64> {
        let dim = 3 * self.l;
        Mat::from_fn(dim, dim, |a, b| self.q[a * dim + b])
    }

    pub(crate) fn entry(&self, a: usize, b: usize) -> f64 {
        self.q[a * 3 * self.l + b]
    }

    pub(crate) fn row(&self, a: usize) -> &[f64] {
        let dim = 3 * self.l;
        &self.q[a * dim..(a + 1) * dim]
    }

    pub fn value(&self, dirs: &DirectionField) -> f64 {
        let x = dirs.flat();
        (0..x.len()).map(|a| x[a] * dot(self.row(a), &x)).sum()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_len(tensor: &SpinCorrelationTensor, dirs: &DirectionField) -> Result<()> {
    if tensor.len() != dirs.len() {
        return Err(Error::Parameter(format!(
            "tensor has L = {} but the direction field has {} sites",
            tensor.len(),
            dirs.len()
        )));
    }
    Ok(())
}

/// `F_Q[n]`, evaluated as the `(x, y)` block plus the `z` block.
pub fn qfi_form(tensor: &SpinCorrelationTensor, dirs: &DirectionField) -> Result<f64> {
    check_len(tensor, dirs)?;
    let l = tensor.len();
    let mut re = 0.0;
    let mut im = 0.0;
    for groups in [&[Axis::X, Axis::Y][..], &[Axis::Z][..]] {
        for &a in groups {
            for &b in groups {
                for i in 0..l {
                    let ni = dirs.n[i][a.index()];
                    if ni == 0.0 {
                        continue;
                    }
                    for j in 0..l {
                        let v = tensor.get(a, b, i, j) * (ni * dirs.n[j][b.index()]);
                        re += v.re;
                        im += v.im;
                    }
                }
            }
        }
    }
    if im.abs() > IMAGINARY_TOLERANCE * re.abs().max(1.0) {
        return Err(Error::Numerical(format!(
            "quadratic form has imaginary residual {im:.3e}; correlation tensor is corrupted"
        )));
    }
    Ok(re)
}

/// `H_cl = −F_Q`.
pub fn classical_energy(tensor: &SpinCorrelationTensor, dirs: &DirectionField) -> Result<f64> {
    qfi_form(tensor, dirs).map(|f| -f)
}
