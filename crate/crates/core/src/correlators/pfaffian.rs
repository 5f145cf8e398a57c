use faer::MatRef;

use crate::{c64, Error, Result};

/// Largest `|A + Aᵀ|` entry accepted by [`pfaffian`].
pub const ANTISYMMETRY_TOLERANCE: f64 = 1e-8;

/// Pfaffian of an even-dimensional antisymmetric matrix.
///
/// Parlett–Reid reduction to tridiagonal form with partial pivoting; the
/// Pfaffian accumulates from the pivots. `O(n³)`.
pub fn pfaffian(a: MatRef<'_, c64>) -> Result<c64> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Contract(format!(
            "pfaffian needs a square matrix (got {}x{})",
            n,
            a.ncols()
        )));
    }
    if n % 2 != 0 {
        return Err(Error::Contract(format!(
            "pfaffian of odd dimension {n} is not defined"
        )));
    }
    let mut err = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            err = err.max((a[(i, j)] + a[(j, i)]).norm());
        }
    }
    if err > ANTISYMMETRY_TOLERANCE {
        return Err(Error::Contract(format!(
            "pfaffian input is not antisymmetric (max |A + Aᵀ| = {err:.3e})"
        )));
    }
    let mut work: Vec<c64> = (0..n * n).map(|k| a[(k / n, k % n)]).collect();
    Ok(pfaffian_in_place(&mut work, n))
}

/// Destroys `a` (row-major `n × n`, assumed antisymmetric).
pub(crate) fn pfaffian_in_place(a: &mut [c64], n: usize) -> c64 {
    let mut pf = c64::new(1.0, 0.0);
    let mut tau = vec![c64::new(0.0, 0.0); n];
    let mut col = vec![c64::new(0.0, 0.0); n];
    let mut k = 0;
    while k + 1 < n {
        let mut kp = k + 1;
        let mut best = a[(k + 1) * n + k].norm();
        for i in k + 2..n {
            let v = a[i * n + k].norm();
            if v > best {
                best = v;
                kp = i;
            }
        }
        if kp != k + 1 {
            for j in k..n {
                a.swap((k + 1) * n + j, kp * n + j);
            }
            for i in k..n {
                a.swap(i * n + k + 1, i * n + kp);
            }
            pf = -pf;
        }
        if best == 0.0 {
            return c64::new(0.0, 0.0);
        }
        let pivot = a[k * n + k + 1];
        pf *= pivot;
        if k + 2 < n {
            let inv = pivot.inv();
            for j in k + 2..n {
                tau[j] = a[k * n + j] * inv;
                col[j] = a[j * n + k + 1];
            }
            for i in k + 2..n {
                let (ti, ci) = (tau[i], col[i]);
                let row = &mut a[i * n..(i + 1) * n];
                for j in k + 2..n {
                    row[j] += ti * col[j] - ci * tau[j];
                }
            }
        }
        k += 2;
    }
    pf
}
