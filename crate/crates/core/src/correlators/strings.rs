//! Spin-spin correlators as Pfaffians of Majorana strings.

use faer::Mat;

use super::blocks::{Majorana, MajoranaBlocks};
use super::pfaffian::pfaffian_in_place;
use crate::{c64, Error, Result};

use Majorana::{A, B};

/// Antisymmetry violation above which an assembled string matrix is
/// treated as corrupted.
const STRING_TOLERANCE: f64 = 1e-6;

/// Majorana correlations seen from a relabelled ring origin. Local index `a`
/// is site `(origin + a) mod L`; operators past the seam pick up the
/// anti-periodic sign of the even-parity sector.
#[derive(Clone, Copy, Debug)]
pub(crate) struct RingFrame<'a> {
    blocks: &'a MajoranaBlocks,
    origin: usize,
}

impl<'a> RingFrame<'a> {
    pub(crate) fn new(blocks: &'a MajoranaBlocks, origin: usize) -> Self {
        RingFrame { blocks, origin }
    }

    fn site(&self, a: usize) -> (usize, f64) {
        let l = self.blocks.len();
        let s = self.origin + a;
        if s >= l {
            (s - l, -1.0)
        } else {
            (s, 1.0)
        }
    }

    fn get(&self, ka: Majorana, a: usize, kb: Majorana, b: usize) -> c64 {
        let (sa, ea) = self.site(a);
        let (sb, eb) = self.site(b);
        self.blocks.get(ka, kb, sa, sb) * (ea * eb)
    }

    /// `⟨γ_1 γ_2 … γ_2p⟩` for distinct operators, by Wick's theorem.
    pub(crate) fn string(&self, ops: &[(Majorana, usize)]) -> Result<c64> {
        let n = ops.len();
        let mut g = vec![c64::new(0.0, 0.0); n * n];
        let mut asym = 0.0f64;
        for a in 0..n {
            for b in a + 1..n {
                let (ka, ia) = ops[a];
                let (kb, ib) = ops[b];
                let up = self.get(ka, ia, kb, ib);
                let down = self.get(kb, ib, ka, ia);
                asym = asym.max((up + down).norm());
                let v = (up - down) * 0.5;
                g[a * n + b] = v;
                g[b * n + a] = -v;
            }
        }
        if asym > STRING_TOLERANCE {
            return Err(Error::Numerical(format!(
                "Majorana string matrix is not antisymmetric (deviation {asym:.3e}); corrupted blocks"
            )));
        }
        Ok(pfaffian_in_place(&mut g, n))
    }

    fn check(&self, m: usize, n: usize) -> Result<()> {
        if m >= n || n >= self.blocks.len() {
            return Err(Error::Contract(format!(
                "spin string needs 0 <= m < n < L (got m = {m}, n = {n}, L = {})",
                self.blocks.len()
            )));
        }
        Ok(())
    }

    /// `C^xx_{mn}`, `m < n`.
    pub(crate) fn xx(&self, m: usize, n: usize) -> Result<c64> {
        self.check(m, n)?;
        let ops: Vec<_> = (m..n).map(|j| (B, j)).chain((m + 1..=n).map(|j| (A, j))).collect();
        let d = n - m;
        Ok(self.string(&ops)? * parity_sign((d - 1) * d / 2))
    }

    /// `C^yy_{mn}`, `m < n`.
    pub(crate) fn yy(&self, m: usize, n: usize) -> Result<c64> {
        self.check(m, n)?;
        let ops: Vec<_> = (m..n).map(|j| (A, j)).chain((m + 1..=n).map(|j| (B, j))).collect();
        let d = n - m;
        Ok(self.string(&ops)? * parity_sign((d + 1) * d / 2))
    }

    /// `C^xy_{mn}`, `m < n`.
    pub(crate) fn xy(&self, m: usize, n: usize) -> Result<c64> {
        self.check(m, n)?;
        let ops: Vec<_> = (m..=n).map(|j| (B, j)).chain((m + 1..n).map(|j| (A, j))).collect();
        let d = n - m;
        Ok(self.string(&ops)? * c64::new(0.0, XY_PHASE * parity_sign((d + 1) * d / 2)))
    }

    /// `C^yx_{mn} = ⟨σʸ_m σˣ_n⟩`, `m < n`, from the string
    /// `i A_m (A B)_{m+1} … (A B)_{n−1} A_n`.
    pub(crate) fn yx(&self, m: usize, n: usize) -> Result<c64> {
        self.check(m, n)?;
        let mut ops = vec![(A, m)];
        for j in m + 1..n {
            ops.push((A, j));
            ops.push((B, j));
        }
        ops.push((A, n));
        Ok(self.string(&ops)? * c64::new(0.0, 1.0))
    }
}

/// Overall sign of the `xy` string relative to `i (−1)^{d(d+1)/2} Pf(…)`.
const XY_PHASE: f64 = -1.0;

fn parity_sign(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Connected `⟨σᶻ_m σᶻ_n⟩`, all `(m, n)` including the diagonal.
pub fn spin_zz(blocks: &MajoranaBlocks) -> Mat<c64> {
    let l = blocks.len();
    Mat::from_fn(l, l, |m, n| {
        blocks.ab[(m, n)] * blocks.ba[(m, n)] - blocks.aa[(m, n)] * blocks.bb[(m, n)]
    })
}

/// `⟨σˣ_m σˣ_n⟩` for `m < n` (zero-based sites on the open line).
pub fn spin_xx(blocks: &MajoranaBlocks, m: usize, n: usize) -> Result<c64> {
    RingFrame::new(blocks, 0).xx(m, n)
}

/// `⟨σʸ_m σʸ_n⟩` for `m < n`.
pub fn spin_yy(blocks: &MajoranaBlocks, m: usize, n: usize) -> Result<c64> {
    RingFrame::new(blocks, 0).yy(m, n)
}

/// `⟨σˣ_m σʸ_n⟩` for `m < n`.
pub fn spin_xy(blocks: &MajoranaBlocks, m: usize, n: usize) -> Result<c64> {
    RingFrame::new(blocks, 0).xy(m, n)
}

/// `⟨σʸ_m σˣ_n⟩` for `m < n`.
pub fn spin_yx(blocks: &MajoranaBlocks, m: usize, n: usize) -> Result<c64> {
    RingFrame::new(blocks, 0).yx(m, n)
}
