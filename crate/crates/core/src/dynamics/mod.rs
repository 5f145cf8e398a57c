//! Quantum-jump trajectories of the fermionic two-point functions
//! `C_mn = ⟨c_m c†_n⟩` and `F_mn = ⟨c_m c_n⟩`.
//!
//! Between jumps the pair `(C, F)` follows the non-linear drift generated by
//! the non-Hermitian Hamiltonian; it is integrated with a fixed-step
//! fifth-order Runge–Kutta scheme. After every step one uniform number
//! decides whether a projective jump onto spin-up occurs and where.

mod jumps;
mod snapshot;
mod trajectory;

use faer::Mat;

use crate::correlators::MajoranaBlocks;
use crate::linalg::{self, SparseReal};
use crate::{c64, Error, ModelParams, Result};

pub use jumps::{apply_jump, jump_probabilities, sample_jump, select_jump, JumpProbabilities};
pub use snapshot::{read_snapshot, write_snapshot, SNAPSHOT_MAGIC};
pub use trajectory::{
    evolve_trajectory, run_ensemble, CtildeObserver, EntropyObserver, JumpEvent, Observed, Observer,
    QfiObserver, SampleContext, SigmaZObserver, TrajectoryConfig, TrajectoryRecord,
    TrajectoryStepper, TRAJECTORY_SCHEMA,
};

/// Default integration step.
pub const DEFAULT_DT: f64 = 0.005;

/// A pure Gaussian state at a given time.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationState {
    pub c: Mat<c64>,
    pub f: Mat<c64>,
    pub time: f64,
}

impl CorrelationState {
    pub fn new(c: Mat<c64>, f: Mat<c64>, time: f64) -> Result<Self> {
        let l = c.nrows();
        if c.ncols() != l || f.nrows() != l || f.ncols() != l {
            return Err(Error::Parameter(format!(
                "C is {}x{} but F is {}x{}",
                c.nrows(),
                c.ncols(),
                f.nrows(),
                f.ncols()
            )));
        }
        Ok(CorrelationState { c, f, time })
    }

    pub fn len(&self) -> usize {
        self.c.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `⟨σᶻ_j⟩ = 2 C_jj − 1`.
    pub fn sigma_z(&self) -> Vec<f64> {
        (0..self.len()).map(|j| 2.0 * self.c[(j, j)].re - 1.0).collect()
    }

    pub fn hermiticity_error(&self) -> f64 {
        linalg::hermiticity_error(self.c.as_ref())
    }

    pub fn antisymmetry_error(&self) -> f64 {
        linalg::antisymmetry_error(self.f.as_ref())
    }

    /// `‖Γ² + 𝟙‖_max` of the real Majorana covariance.
    pub fn purity_error(&self) -> f64 {
        MajoranaBlocks::from_state(self).purity_error()
    }
}

/// All spins up: `C = 𝟙`, `F = 0`.
pub fn initial_product_state(l: usize) -> Result<CorrelationState> {
    if l == 0 || l % 2 != 0 {
        return Err(Error::Parameter(format!("L must be even (got {l})")));
    }
    Ok(CorrelationState {
        c: Mat::identity(l, l),
        f: Mat::zeros(l, l),
        time: 0.0,
    })
}

/// Hopping (`H₁`, real symmetric) and pairing (`H₂`, real antisymmetric)
/// matrices of the even-parity ring.
#[derive(Clone, Debug, PartialEq)]
pub struct HoppingMatrices {
    pub h1: SparseReal,
    pub h2: SparseReal,
}

impl HoppingMatrices {
    pub fn new(params: &ModelParams) -> Self {
        let l = params.l;
        let mut t1 = Vec::with_capacity(3 * l);
        let mut t2 = Vec::with_capacity(2 * l);
        for m in 0..l {
            t1.push((m, m, params.h));
        }
        for m in 0..l - 1 {
            t1.push((m, m + 1, -0.5));
            t1.push((m + 1, m, -0.5));
            t2.push((m, m + 1, -0.5));
            t2.push((m + 1, m, 0.5));
        }
        t1.push((l - 1, 0, 0.5));
        t1.push((0, l - 1, 0.5));
        t2.push((l - 1, 0, 0.5));
        t2.push((0, l - 1, -0.5));
        HoppingMatrices {
            h1: SparseReal::from_triplets(l, t1),
            h2: SparseReal::from_triplets(l, t2),
        }
    }

    pub fn len(&self) -> usize {
        self.h1.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Scratch space for one drift evaluation.
#[derive(Clone, Debug)]
struct DriftWorkspace {
    /// Lower triangle of the Hermitian `C² − F F†`.
    g: Mat<c64>,
    cf: Mat<c64>,
}

impl DriftWorkspace {
    fn new(l: usize) -> Self {
        DriftWorkspace {
            g: Mat::zeros(l, l),
            cf: Mat::zeros(l, l),
        }
    }
}

/// Writes `(∂ₜC, ∂ₜF)` into `dc`, `df`.
///
/// `F Cᵀ` is taken as `−(C F)ᵀ`, which holds for antisymmetric `F` and
/// saves one dense product.
fn drift_into(
    c: &Mat<c64>,
    f: &Mat<c64>,
    gamma: f64,
    hop: &HoppingMatrices,
    ws: &mut DriftWorkspace,
    dc: &mut Mat<c64>,
    df: &mut Mat<c64>,
) {
    let l = c.nrows();
    let dissipative = gamma != 0.0;
    if dissipative {
        use faer::linalg::matmul::triangular::{matmul, BlockStructure};
        let (lower, full) = (BlockStructure::TriangularLower, BlockStructure::Rectangular);
        matmul(
            ws.g.as_mut(),
            lower,
            faer::Accum::Replace,
            c.as_ref(),
            full,
            c.as_ref(),
            full,
            c64::new(1.0, 0.0),
            faer::Par::Seq,
        );
        matmul(
            ws.g.as_mut(),
            lower,
            faer::Accum::Add,
            f.as_ref(),
            full,
            f.adjoint(),
            full,
            c64::new(-1.0, 0.0),
            faer::Par::Seq,
        );
        linalg::mul_into(ws.cf.as_mut(), c.as_ref(), f.as_ref());
    }
    let (h1, h2) = (&hop.h1, &hop.h2);
    let minus_2i = c64::new(0.0, -2.0);
    let zero = c64::new(0.0, 0.0);
    for n in 0..l {
        let (cs, fs) = (c.col_as_slice(n), f.col_as_slice(n));
        let h1c: Vec<(&[c64], &[c64], f64)> = h1
            .col(n)
            .iter()
            .map(|&(k, v)| (c.col_as_slice(k), f.col_as_slice(k), v))
            .collect();
        let h2c: Vec<(&[c64], &[c64], f64)> = h2
            .col(n)
            .iter()
            .map(|&(k, v)| (c.col_as_slice(k), f.col_as_slice(k), v))
            .collect();
        let dcs = dc.col_as_slice_mut(n);
        let dfs = df.col_as_slice_mut(n);
        for m in 0..l {
            let (mut uc, mut uf) = (zero, zero);
            for &(k, v) in h1.row(m) {
                uc += cs[k] * v;
                uf += fs[k] * v;
            }
            for &(k, v) in h2.row(m) {
                uc -= fs[k].conj() * v;
                uf -= cs[k].conj() * v;
            }
            for &(ck, fk, v) in &h1c {
                uc -= ck[m] * v;
                uf += fk[m] * v;
            }
            for &(ck, fk, v) in &h2c {
                uc += fk[m] * v;
                uf -= ck[m] * v;
            }
            dcs[m] = minus_2i * uc;
            dfs[m] = minus_2i * uf;
        }
        for &(m, v) in h2.col(n) {
            dfs[m] += minus_2i * v;
        }
        if dissipative {
            let (gs, cfs) = (ws.g.col_as_slice(n), ws.cf.col_as_slice(n));
            for m in 0..l {
                let g = if m >= n { gs[m] } else { ws.g[(n, m)].conj() };
                dcs[m] += (g - cs[m]) * gamma;
                dfs[m] += (cfs[m] - fs[m] - ws.cf[(n, m)]) * gamma;
            }
        }
    }
}

/// Right-hand side of the `(C, F)` equations of motion.
pub fn drift_derivatives(
    state: &CorrelationState,
    params: &ModelParams,
    hop: &HoppingMatrices,
) -> Result<(Mat<c64>, Mat<c64>)> {
    let l = state.len();
    if hop.len() != l || params.l != l {
        return Err(Error::Parameter(format!(
            "state has L = {l}, hopping matrices L = {}, params L = {}",
            hop.len(),
            params.l
        )));
    }
    let mut ws = DriftWorkspace::new(l);
    let mut dc = Mat::zeros(l, l);
    let mut df = Mat::zeros(l, l);
    drift_into(&state.c, &state.f, params.gamma, hop, &mut ws, &mut dc, &mut df);
    Ok((dc, df))
}

const RK_A: [[f64; 5]; 6] = [
    [0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0],
];
const RK_B: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];

/// Tolerance on `C_jj ∈ [0, 1]` after a step.
const DIAGONAL_SLACK: f64 = 1e-6;

/// Fixed-step Dormand–Prince fifth-order integrator with preallocated
/// stage buffers.
#[derive(Clone, Debug)]
pub struct Rk5Integrator {
    gamma: f64,
    hop: HoppingMatrices,
    ws: DriftWorkspace,
    kc: Vec<Mat<c64>>,
    kf: Vec<Mat<c64>>,
    yc: Mat<c64>,
    yf: Mat<c64>,
}

impl Rk5Integrator {
    pub fn new(params: &ModelParams) -> Self {
        let l = params.l;
        Rk5Integrator {
            gamma: params.gamma,
            hop: HoppingMatrices::new(params),
            ws: DriftWorkspace::new(l),
            kc: (0..6).map(|_| Mat::zeros(l, l)).collect(),
            kf: (0..6).map(|_| Mat::zeros(l, l)).collect(),
            yc: Mat::zeros(l, l),
            yf: Mat::zeros(l, l),
        }
    }

    pub fn hopping(&self) -> &HoppingMatrices {
        &self.hop
    }

    /// Advances `state` by `dt` in place. On error the state is untouched.
    pub fn step(&mut self, state: &mut CorrelationState, dt: f64) -> Result<()> {
        let l = self.hop.len();
        if state.len() != l {
            return Err(Error::Parameter(format!(
                "integrator built for L = {l}, state has L = {}",
                state.len()
            )));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Parameter(format!("dt must be > 0 (got {dt})")));
        }
        for s in 0..6 {
            self.combine(state, dt, &RK_A[s][..s]);
            let (kc, kf) = (&mut self.kc[s], &mut self.kf[s]);
            drift_into(&self.yc, &self.yf, self.gamma, &self.hop, &mut self.ws, kc, kf);
        }
        self.combine(state, dt, &RK_B);
        linalg::make_hermitian(self.yc.as_mut());
        linalg::make_antisymmetric(self.yf.as_mut());
        linalg::flush_tiny(&mut self.yc);
        linalg::flush_tiny(&mut self.yf);
        for j in 0..l {
            let d = self.yc[(j, j)].re;
            if !(-DIAGONAL_SLACK..=1.0 + DIAGONAL_SLACK).contains(&d) {
                return Err(Error::Numerical(format!(
                    "C[{j},{j}] = {d} left [0, 1] after a step of dt = {dt} at t = {}; reduce dt",
                    state.time + dt
                )));
            }
        }
        std::mem::swap(&mut state.c, &mut self.yc);
        std::mem::swap(&mut state.f, &mut self.yf);
        state.time += dt;
        Ok(())
    }

    /// `y ← state + dt Σ_s w_s k_s`.
    fn combine(&mut self, state: &CorrelationState, dt: f64, weights: &[f64]) {
        let l = state.len();
        let active: Vec<(usize, f64)> = weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w != 0.0)
            .map(|(s, w)| (s, w * dt))
            .collect();
        for n in 0..l {
            let (yc, yf) = (self.yc.col_as_slice_mut(n), self.yf.col_as_slice_mut(n));
            yc.copy_from_slice(state.c.col_as_slice(n));
            yf.copy_from_slice(state.f.col_as_slice(n));
            for &(s, w) in &active {
                for (y, k) in yc.iter_mut().zip(self.kc[s].col_as_slice(n)) {
                    *y += k * w;
                }
                for (y, k) in yf.iter_mut().zip(self.kf[s].col_as_slice(n)) {
                    *y += k * w;
                }
            }
        }
    }
}

/// One RK5 step returning the new state.
pub fn rk5_step(
    state: &CorrelationState,
    params: &ModelParams,
    dt: f64,
) -> Result<CorrelationState> {
    if params.l != state.len() {
        return Err(Error::Parameter(format!(
            "params L = {} but state has L = {}",
            params.l,
            state.len()
        )));
    }
    let mut next = state.clone();
    Rk5Integrator::new(params).step(&mut next, dt)?;
    Ok(next)
}
