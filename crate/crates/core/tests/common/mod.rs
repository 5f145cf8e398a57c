//! Dense state-vector reference for small chains.
//!
//! Basis index bit `j` set means spin `j` points down, i.e. the
//! Jordan–Wigner fermion at site `j` is occupied.

#![allow(dead_code)]

use faer::{Mat, Side};
use mipt_core::c64;
use rand::Rng;

pub const ZERO: c64 = c64 { re: 0.0, im: 0.0 };

#[derive(Clone, Debug)]
pub struct SpinChain {
    pub l: usize,
    pub h: f64,
    pub gamma: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
}

pub const PAULIS: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

pub fn all_up(l: usize) -> Vec<c64> {
    let mut psi = vec![ZERO; 1 << l];
    psi[0] = c64::new(1.0, 0.0);
    psi
}

pub fn norm(psi: &[c64]) -> f64 {
    psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalize(psi: &mut [c64]) {
    let n = norm(psi);
    for a in psi.iter_mut() {
        *a /= n;
    }
}

pub fn inner(a: &[c64], b: &[c64]) -> c64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `σ^α_j |ψ⟩`.
pub fn pauli(psi: &[c64], j: usize, p: Pauli) -> Vec<c64> {
    let mut out = vec![ZERO; psi.len()];
    let bit = 1usize << j;
    for (b, &a) in psi.iter().enumerate() {
        let down = b & bit != 0;
        match p {
            Pauli::X => out[b ^ bit] += a,
            Pauli::Y => out[b ^ bit] += a * if down { c64::new(0.0, -1.0) } else { c64::new(0.0, 1.0) },
            Pauli::Z => out[b] += a * if down { -1.0 } else { 1.0 },
        }
    }
    out
}

fn jw_sign(b: usize, j: usize) -> f64 {
    if (b & ((1 << j) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `c_j |ψ⟩`.
pub fn annihilate(psi: &[c64], j: usize) -> Vec<c64> {
    let mut out = vec![ZERO; psi.len()];
    let bit = 1usize << j;
    for (b, &a) in psi.iter().enumerate() {
        if b & bit != 0 {
            out[b ^ bit] += a * jw_sign(b, j);
        }
    }
    out
}

/// `c†_j |ψ⟩`.
pub fn create(psi: &[c64], j: usize) -> Vec<c64> {
    let mut out = vec![ZERO; psi.len()];
    let bit = 1usize << j;
    for (b, &a) in psi.iter().enumerate() {
        if b & bit == 0 {
            out[b | bit] += a * jw_sign(b, j);
        }
    }
    out
}

impl SpinChain {
    /// `H_eff |ψ⟩` with `H_eff = −Σ σˣσˣ − h Σ σᶻ − i(γ/4) Σ σᶻ` on the ring.
    pub fn apply(&self, psi: &[c64]) -> Vec<c64> {
        let l = self.l;
        let mut out = vec![ZERO; psi.len()];
        let field = c64::new(-self.h, -self.gamma / 4.0);
        for (b, &a) in psi.iter().enumerate() {
            if a == ZERO {
                continue;
            }
            let mut diag = 0.0;
            for j in 0..l {
                diag += if b & (1 << j) != 0 { -1.0 } else { 1.0 };
                let k = (j + 1) % l;
                out[b ^ (1 << j) ^ (1 << k)] -= a;
            }
            out[b] += a * field * diag;
        }
        out
    }

    pub fn dense(&self) -> Mat<c64> {
        let d = 1usize << self.l;
        let mut m = Mat::zeros(d, d);
        for col in 0..d {
            let mut e = vec![ZERO; d];
            e[col] = c64::new(1.0, 0.0);
            for (row, v) in self.apply(&e).into_iter().enumerate() {
                m[(row, col)] = v;
            }
        }
        m
    }

    /// `exp(−i H_eff dt) |ψ⟩` by Taylor series, then normalised.
    pub fn noclick_step(&self, psi: &mut Vec<c64>, dt: f64) {
        let mut term = psi.clone();
        let mut acc = psi.clone();
        for k in 1..60 {
            let next = self.apply(&term);
            let f = c64::new(0.0, -dt / k as f64);
            term = next.into_iter().map(|v| v * f).collect();
            for (a, t) in acc.iter_mut().zip(&term) {
                *a += t;
            }
            if norm(&term) < 1e-18 {
                break;
            }
        }
        normalize(&mut acc);
        *psi = acc;
    }

    /// `p_j = γ dt ⟨(1 + σᶻ_j)/2⟩`.
    pub fn jump_probabilities(&self, psi: &[c64], dt: f64) -> Vec<f64> {
        (0..self.l)
            .map(|j| {
                let up: f64 = psi
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| b & (1 << j) == 0)
                    .map(|(_, a)| a.norm_sqr())
                    .sum();
                self.gamma * dt * up
            })
            .collect()
    }

    /// Projects spin `j` up and renormalises.
    pub fn jump(&self, psi: &mut [c64], j: usize) {
        for (b, a) in psi.iter_mut().enumerate() {
            if b & (1 << j) != 0 {
                *a = ZERO;
            }
        }
        normalize(psi);
    }

    /// One drift step plus at most one jump chosen by the uniform `r`.
    pub fn trajectory_step(&self, psi: &mut Vec<c64>, dt: f64, r: f64) -> Option<usize> {
        self.noclick_step(psi, dt);
        let p = self.jump_probabilities(psi, dt);
        let total: f64 = p.iter().sum();
        if r > total {
            return None;
        }
        let mut acc = 0.0;
        for (j, pj) in p.iter().enumerate() {
            acc += pj;
            if *pj > 0.0 && acc >= r {
                self.jump(psi, j);
                return Some(j);
            }
        }
        None
    }

    /// Longest-lived right eigenvector of `H_eff` in the even-parity sector.
    pub fn noclick_stationary(&self) -> Vec<c64> {
        self.even_extremal(|e| e.im)
    }

    /// Ground state of the Hermitian chain (`γ = 0`) in the even sector.
    pub fn ground_state(&self) -> Vec<c64> {
        assert_eq!(self.gamma, 0.0);
        self.even_extremal(|e| -e.re)
    }

    fn even_extremal(&self, score: impl Fn(c64) -> f64) -> Vec<c64> {
        let d = 1usize << self.l;
        let evd = self.dense().eigen().expect("eigendecomposition");
        let (s, u) = (evd.S(), evd.U());
        let mut best: Option<(f64, usize)> = None;
        for k in 0..d {
            let even: f64 = (0..d)
                .filter(|b| b.count_ones() % 2 == 0)
                .map(|b| u[(b, k)].norm_sqr())
                .sum();
            let total: f64 = (0..d).map(|b| u[(b, k)].norm_sqr()).sum();
            if even / total < 0.5 {
                continue;
            }
            let v = score(s[k]);
            if best.is_none_or(|(b, _)| v > b + 1e-12) {
                best = Some((v, k));
            }
        }
        let k = best.unwrap().1;
        let mut psi: Vec<c64> = (0..d).map(|b| u[(b, k)]).collect();
        normalize(&mut psi);
        psi
    }
}

/// `(C, F)` with `C_mn = ⟨c_m c†_n⟩`, `F_mn = ⟨c_m c_n⟩`.
pub fn fermion_correlations(psi: &[c64], l: usize) -> (Mat<c64>, Mat<c64>) {
    let cd: Vec<Vec<c64>> = (0..l).map(|j| create(psi, j)).collect();
    let c: Vec<Vec<c64>> = (0..l).map(|j| annihilate(psi, j)).collect();
    let cm = Mat::from_fn(l, l, |m, n| inner(&cd[m], &cd[n]));
    let fm = Mat::from_fn(l, l, |m, n| inner(&cd[m], &c[n]));
    (cm, fm)
}

pub fn expect_pauli(psi: &[c64], j: usize, p: Pauli) -> c64 {
    inner(psi, &pauli(psi, j, p))
}

/// Connected `⟨σ^α_i σ^β_j⟩ − ⟨σ^α_i⟩⟨σ^β_j⟩`.
pub fn connected(psi: &[c64], a: Pauli, i: usize, b: Pauli, j: usize) -> c64 {
    let two = inner(psi, &pauli(&pauli(psi, j, b), i, a));
    two - expect_pauli(psi, i, a) * expect_pauli(psi, j, b)
}

/// `F_Q` of `½ Σ n_j·σ_j` as four times the variance.
pub fn qfi_variance(psi: &[c64], l: usize, dirs: &[[f64; 3]]) -> f64 {
    let mut op = vec![ZERO; psi.len()];
    for j in 0..l {
        for (k, p) in PAULIS.iter().enumerate() {
            if dirs[j][k] != 0.0 {
                for (o, v) in op.iter_mut().zip(pauli(psi, j, *p)) {
                    *o += v * (0.5 * dirs[j][k]);
                }
            }
        }
    }
    let mean = inner(psi, &op).re;
    let sq = inner(&op, &op).re;
    4.0 * (sq - mean * mean)
}

/// Von Neumann entropy of sites `start .. start + ell` (periodic).
pub fn block_entropy(psi: &[c64], l: usize, start: usize, ell: usize) -> f64 {
    let sites: Vec<usize> = (0..ell).map(|a| (start + a) % l).collect();
    let rest: Vec<usize> = (0..l).filter(|s| !sites.contains(s)).collect();
    let da = 1usize << ell;
    let db = 1usize << rest.len();
    let index = |ia: usize, ib: usize| {
        let mut b = 0usize;
        for (k, &s) in sites.iter().enumerate() {
            if ia & (1 << k) != 0 {
                b |= 1 << s;
            }
        }
        for (k, &s) in rest.iter().enumerate() {
            if ib & (1 << k) != 0 {
                b |= 1 << s;
            }
        }
        b
    };
    let rho = Mat::from_fn(da, da, |x, y| {
        (0..db).map(|ib| psi[index(x, ib)] * psi[index(y, ib)].conj()).sum::<c64>()
    });
    let ev = rho.self_adjoint_eigenvalues(Side::Lower).expect("eigenvalues");
    ev.iter().filter(|p| **p > 1e-15).map(|p| -p * p.ln()).sum()
}

pub fn max_diff(a: &Mat<c64>, b: &Mat<c64>) -> f64 {
    let mut d = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            d = d.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    d
}

/// A generic pure Gaussian state: a short jump trajectory of the Gaussian
/// engine, together with the matching state vector when `l ≤ 10`.
pub fn trajectory_state(
    l: usize,
    h: f64,
    gamma: f64,
    steps: usize,
    seed: u64,
) -> (mipt_core::dynamics::CorrelationState, Option<Vec<c64>>) {
    let dt = (0.4 / (gamma.max(1e-9) * l as f64)).min(0.005);
    let params = mipt_core::ModelParams::new(l, h, gamma).unwrap();
    let mut stepper = mipt_core::dynamics::TrajectoryStepper::new(params, dt).unwrap();
    let chain = SpinChain { l, h, gamma };
    let mut psi = (l <= 10).then(|| all_up(l));
    let mut rng = mipt_core::rng::stream_rng(seed, 0);
    for _ in 0..steps {
        let r: f64 = rng.random();
        let site = stepper.advance(r).unwrap();
        if let Some(psi) = psi.as_mut() {
            assert_eq!(chain.trajectory_step(psi, dt, r), site);
        }
    }
    (stepper.state().clone(), psi)
}

/// Multi-start projected ascent on the coupling matrix, written
/// independently of the library's optimisers.
pub fn ascent_oracle(tensor: &mipt_core::correlators::SpinCorrelationTensor) -> f64 {
    let l = tensor.len();
    let q = |i: usize, a: usize, j: usize, b: usize| {
        let (ax, bx) = (mipt_core::correlators::Axis::ALL[a], mipt_core::correlators::Axis::ALL[b]);
        0.5 * (tensor.get(ax, bx, i, j) + tensor.get(bx, ax, j, i)).re
    };
    let value = |n: &[[f64; 3]]| {
        let mut v = 0.0;
        for i in 0..l {
            for j in 0..l {
                for a in 0..3 {
                    for b in 0..3 {
                        v += n[i][a] * q(i, a, j, b) * n[j][b];
                    }
                }
            }
        }
        v
    };
    let shift = 4.0 * l as f64;
    let mut rng = mipt_core::rng::stream_rng(31337, 0);
    let mut best = f64::NEG_INFINITY;
    for _ in 0..200 {
        let mut n: Vec<[f64; 3]> = (0..l)
            .map(|_| {
                let v = [rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5];
                let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                [v[0] / r, v[1] / r, v[2] / r]
            })
            .collect();
        for _ in 0..400 {
            for i in 0..l {
                let mut g = [0.0; 3];
                for a in 0..3 {
                    g[a] = shift * n[i][a];
                    for j in 0..l {
                        for b in 0..3 {
                            g[a] += q(i, a, j, b) * n[j][b];
                        }
                    }
                }
                let r = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
                n[i] = [g[0] / r, g[1] / r, g[2] / r];
            }
        }
        best = best.max(value(&n));
    }
    best
}
