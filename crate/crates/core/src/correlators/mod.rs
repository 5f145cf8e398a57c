//! Majorana two-point blocks and connected spin-spin correlators.
//!
//! `σᶻ` correlators follow from Wick's theorem directly; `σˣ`/`σʸ`
//! correlators carry a Jordan–Wigner string and are Pfaffians of the
//! Majorana correlations inside the window between the two sites. Chords
//! that cross the ring seam are evaluated in a relabelled frame whose origin
//! is the first site of the chord.

mod blocks;
mod pfaffian;
mod strings;

use std::fmt;
use std::io::Write;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::dynamics::CorrelationState;
use crate::spectral::PairAmplitudes;
use crate::{c64, par, Error, Result};

pub use blocks::{blocks_from_amplitudes, blocks_from_state, Majorana, MajoranaBlocks};
pub use pfaffian::{pfaffian, ANTISYMMETRY_TOLERANCE};
pub use strings::{spin_xx, spin_xy, spin_yx, spin_yy, spin_zz};

use strings::RingFrame;

/// Agreement required between the two relabellings of an antipodal chord.
/// They coincide only up to the purity error of the state, which grows
/// slowly along long trajectories.
pub const ANTIPODAL_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        })
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            "z" | "Z" => Ok(Axis::Z),
            _ => Err(Error::Parameter(format!("unknown spin axis '{s}'"))),
        }
    }
}

/// Component pair `(α, β)` of `C^{αβ}`.
pub type Pair = (Axis, Axis);

/// The five blocks that can be nonzero; `xz`, `zx`, `yz`, `zy` vanish by
/// fermion parity.
pub const NONZERO_PAIRS: [Pair; 5] = [
    (Axis::X, Axis::X),
    (Axis::Y, Axis::Y),
    (Axis::Z, Axis::Z),
    (Axis::X, Axis::Y),
    (Axis::Y, Axis::X),
];

pub fn parse_pair(s: &str) -> Result<Pair> {
    let mut chars = s.chars();
    match (chars.next(), chars.next(), chars.next()) {
        (Some(a), Some(b), None) => Ok((a.to_string().parse()?, b.to_string().parse()?)),
        _ => Err(Error::Parameter(format!("correlator pair must look like 'xx' (got '{s}')"))),
    }
}

fn slot(pair: Pair) -> Option<usize> {
    NONZERO_PAIRS.iter().position(|p| *p == pair)
}

/// Connected correlators `C^{αβ}_{ij}` for all sites.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinCorrelationTensor {
    l: usize,
    blocks: [Mat<c64>; 5],
    computed: [bool; 5],
}

impl SpinCorrelationTensor {
    /// An all-zero tensor with every block marked as computed.
    pub fn zeros(l: usize) -> Self {
        SpinCorrelationTensor {
            l,
            blocks: std::array::from_fn(|_| Mat::zeros(l, l)),
            computed: [true; 5],
        }
    }

    pub fn len(&self) -> usize {
        self.l
    }

    pub fn is_empty(&self) -> bool {
        self.l == 0
    }

    /// `xz`, `yz`, `zx`, `zy` are identically zero.
    pub fn mixed_z_vanish(&self) -> bool {
        true
    }

    pub fn is_computed(&self, pair: Pair) -> bool {
        slot(pair).is_none_or(|s| self.computed[s])
    }

    pub fn get(&self, alpha: Axis, beta: Axis, i: usize, j: usize) -> c64 {
        match slot((alpha, beta)) {
            Some(s) => self.blocks[s][(i, j)],
            None => c64::new(0.0, 0.0),
        }
    }

    /// The `L × L` block of a nonzero pair.
    pub fn block(&self, pair: Pair) -> Option<&Mat<c64>> {
        slot(pair).map(|s| &self.blocks[s])
    }

    pub fn block_mut(&mut self, pair: Pair) -> Option<&mut Mat<c64>> {
        slot(pair).map(|s| &mut self.blocks[s])
    }

    /// Largest `|C^{αβ}_{ij} − C^{βα}_{ji}|` over computed blocks.
    pub fn exchange_asymmetry(&self) -> f64 {
        let mut err = 0.0f64;
        for &(a, b) in &NONZERO_PAIRS {
            if !self.is_computed((a, b)) || !self.is_computed((b, a)) {
                continue;
            }
            for i in 0..self.l {
                for j in 0..self.l {
                    if i != j {
                        err = err.max((self.get(a, b, i, j) - self.get(b, a, j, i)).norm());
                    }
                }
            }
        }
        err
    }

    pub fn all_finite(&self) -> bool {
        self.blocks
            .iter()
            .all(|m| (0..self.l).all(|j| (0..self.l).all(|i| m[(i, j)].re.is_finite() && m[(i, j)].im.is_finite())))
    }
}

fn chord(frame: &RingFrame<'_>, pair: Pair, ell: usize) -> Result<c64> {
    match pair {
        (Axis::X, Axis::X) => frame.xx(0, ell),
        (Axis::Y, Axis::Y) => frame.yy(0, ell),
        (Axis::X, Axis::Y) => frame.xy(0, ell),
        (Axis::Y, Axis::X) => frame.yx(0, ell),
        _ => unreachable!("chord called for a non-string pair"),
    }
}

/// Every nonzero block. Translation-invariant blocks take the one-row
/// fast path.
pub fn correlation_tensor(blocks: &MajoranaBlocks) -> Result<SpinCorrelationTensor> {
    correlation_tensor_for(blocks, &NONZERO_PAIRS)
}

pub fn correlation_tensor_from_state(state: &CorrelationState) -> Result<SpinCorrelationTensor> {
    correlation_tensor(&MajoranaBlocks::from_state(state))
}

pub fn correlation_tensor_from_amplitudes(
    amps: &[PairAmplitudes],
    l: usize,
) -> Result<SpinCorrelationTensor> {
    correlation_tensor(&MajoranaBlocks::from_amplitudes(amps, l)?)
}

/// Fills only the requested pairs (and their exchange partners); other
/// blocks stay zero and are marked as not computed.
pub fn correlation_tensor_for(
    blocks: &MajoranaBlocks,
    pairs: &[Pair],
) -> Result<SpinCorrelationTensor> {
    let l = blocks.len();
    if l < 2 || l % 2 != 0 {
        return Err(Error::Parameter(format!("L must be even and >= 2 (got {l})")));
    }
    let mut out = SpinCorrelationTensor::zeros(l);
    out.computed = [false; 5];
    let mut strings: Vec<Pair> = Vec::new();
    for &p in pairs {
        let Some(s) = slot(p) else { continue };
        out.computed[s] = true;
        if p == (Axis::Z, Axis::Z) {
            continue;
        }
        let rep = if p == (Axis::Y, Axis::X) { (Axis::X, Axis::Y) } else { p };
        out.computed[slot(rep).unwrap()] = true;
        out.computed[slot((rep.1, rep.0)).unwrap()] = true;
        for q in [rep, (rep.1, rep.0)] {
            if !strings.contains(&q) {
                strings.push(q);
            }
        }
    }

    if out.computed[slot((Axis::Z, Axis::Z)).unwrap()] {
        *out.block_mut((Axis::Z, Axis::Z)).unwrap() = spin_zz(blocks);
    }

    let sz: Vec<f64> = (0..l).map(|j| blocks.ab[(j, j)].re).collect();
    for &p in &strings {
        let m = out.block_mut(p).unwrap();
        for j in 0..l {
            m[(j, j)] = match p {
                (Axis::X, Axis::Y) => c64::new(0.0, sz[j]),
                (Axis::Y, Axis::X) => c64::new(0.0, -sz[j]),
                _ => c64::new(1.0, 0.0),
            };
        }
    }
    if strings.is_empty() {
        return Ok(out);
    }

    let half = l / 2;
    let origins: Vec<usize> = if blocks.translation_invariant {
        vec![0, half]
    } else {
        (0..l).collect()
    };
    let rows = par::map_collect(origins.clone(), |origin| -> Result<Vec<Vec<c64>>> {
        let frame = RingFrame::new(blocks, origin);
        strings
            .iter()
            .map(|&p| (1..=half).map(|ell| chord(&frame, p, ell)).collect())
            .collect()
    });
    let rows: Vec<Vec<Vec<c64>>> = rows.into_iter().collect::<Result<_>>()?;

    let row_of = |origin: usize| -> &Vec<Vec<c64>> {
        let k = origins.iter().position(|&o| o == origin).unwrap_or(0);
        &rows[k]
    };

    // antipodal chords are reachable from both ends
    for i in 0..(if blocks.translation_invariant { 1 } else { half }) {
        let j = i + half;
        for (a, &p) in strings.iter().enumerate() {
            let b = strings.iter().position(|&q| q == (p.1, p.0)).unwrap();
            let forward = row_of(i)[a][half - 1];
            let backward = row_of(j)[b][half - 1];
            if (forward - backward).norm() > ANTIPODAL_TOLERANCE {
                return Err(Error::Numerical(format!(
                    "antipodal chord ({i}, {j}) of C^{}{} disagrees between relabellings: {forward} vs {backward}",
                    p.0, p.1
                )));
            }
        }
    }

    for i in 0..l {
        let row = if blocks.translation_invariant { &rows[0] } else { row_of(i) };
        for (a, &p) in strings.iter().enumerate() {
            for ell in 1..=half {
                let j = (i + ell) % l;
                let v = row[a][ell - 1];
                out.block_mut(p).unwrap()[(i, j)] = v;
                out.block_mut((p.1, p.0)).unwrap()[(j, i)] = v;
            }
        }
    }
    Ok(out)
}

/// `C̃^{αβ}_ℓ = (1/L) Σ_i |C^{αβ}_{i,i+ℓ}|`, indices periodic.
pub fn averaged_abs_correlator(tensor: &SpinCorrelationTensor, pair: Pair, ell: usize) -> Result<f64> {
    let l = tensor.len();
    if ell == 0 || ell > l / 2 {
        return Err(Error::Contract(format!(
            "distance must satisfy 1 <= ell <= L/2 = {} (got {ell})",
            l / 2
        )));
    }
    let sum: f64 = (0..l)
        .map(|i| tensor.get(pair.0, pair.1, i, (i + ell) % l).norm())
        .sum();
    Ok(sum / l as f64)
}

/// `C̃_ℓ` for `ℓ = 1 … L/2`.
pub fn ctilde_profile(tensor: &SpinCorrelationTensor, pair: Pair) -> Result<Vec<f64>> {
    (1..=tensor.len() / 2)
        .map(|ell| averaged_abs_correlator(tensor, pair, ell))
        .collect()
}

/// CSV `alpha,beta,i,j,re,im` over the computed nonzero blocks.
pub fn write_tensor_csv<W: Write>(tensor: &SpinCorrelationTensor, mut out: W) -> Result<()> {
    writeln!(out, "alpha,beta,i,j,re,im")?;
    for &(a, b) in &NONZERO_PAIRS {
        if !tensor.is_computed((a, b)) {
            continue;
        }
        for i in 0..tensor.len() {
            for j in 0..tensor.len() {
                let v = tensor.get(a, b, i, j);
                writeln!(out, "{a},{b},{i},{j},{:e},{:e}", v.re, v.im)?;
            }
        }
    }
    Ok(())
}

/// CSV `alpha,beta,ell,value` of `C̃_ℓ` over the computed nonzero blocks.
pub fn write_ctilde_csv<W: Write>(tensor: &SpinCorrelationTensor, mut out: W) -> Result<()> {
    writeln!(out, "alpha,beta,ell,value")?;
    for &(a, b) in &NONZERO_PAIRS {
        if !tensor.is_computed((a, b)) {
            continue;
        }
        for (k, v) in ctilde_profile(tensor, (a, b))?.into_iter().enumerate() {
            writeln!(out, "{a},{b},{},{v:e}", k + 1)?;
        }
    }
    Ok(())
}
