use std::f64::consts::PI;

use super::anneal::{polish, random_unit};
use super::{DirectionField, QfiCoupling};
use crate::correlators::SpinCorrelationTensor;
use crate::rng::stream_rng;
use crate::{Error, Result};

pub const BRUTE_FORCE_MAX_L: usize = 8;

const RANDOM_STARTS: usize = 64;

/// Reference maximiser for small chains: multi-start block-coordinate ascent
/// in which every site is moved to the best point of a spherical grid of
/// angular step `resolution`, followed by continuous coordinate polishing.
/// Starts include all uniform and staggered axis-aligned fields.
pub fn brute_force_max(tensor: &SpinCorrelationTensor, resolution: f64) -> Result<f64> {
    let l = tensor.len();
    if l > BRUTE_FORCE_MAX_L {
        return Err(Error::Parameter(format!(
            "brute-force maximisation refuses L = {l} > {BRUTE_FORCE_MAX_L}"
        )));
    }
    if !(resolution > 0.0 && resolution <= PI / 2.0) {
        return Err(Error::Parameter(format!(
            "angular resolution must lie in (0, π/2] (got {resolution})"
        )));
    }
    let q = QfiCoupling::new(tensor);
    let grid = sphere_grid(resolution);

    let mut starts: Vec<Vec<[f64; 3]>> = Vec::new();
    for axis in 0..3 {
        let mut e = [0.0; 3];
        e[axis] = 1.0;
        starts.push(vec![e; l]);
        starts.push((0..l).map(|j| if j % 2 == 0 { e } else { [-e[0], -e[1], -e[2]] }).collect());
    }
    let mut rng = stream_rng(0x5eed, 0);
    for _ in 0..RANDOM_STARTS {
        starts.push((0..l).map(|_| random_unit(&mut rng)).collect());
    }

    let mut best = f64::NEG_INFINITY;
    for start in starts {
        let dirs = grid_ascent(&q, &grid, start);
        let (value, _) = polish(&q, dirs, 200);
        best = best.max(value);
    }
    Ok(best)
}

fn sphere_grid(resolution: f64) -> Vec<[f64; 3]> {
    let nt = (PI / resolution).round() as usize;
    let np = (2.0 * PI / resolution).round() as usize;
    let mut out = vec![[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]];
    for a in 1..nt {
        let theta = a as f64 * PI / nt as f64;
        for b in 0..np {
            let phi = b as f64 * 2.0 * PI / np as f64;
            out.push([theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]);
        }
    }
    out
}

fn grid_ascent(q: &QfiCoupling, grid: &[[f64; 3]], mut n: Vec<[f64; 3]>) -> Vec<[f64; 3]> {
    let l = n.len();
    let mut current = q.value(&DirectionField { n: n.clone() });
    for _ in 0..100 {
        let mut improved = false;
        for i in 0..l {
            let keep = n[i];
            let mut best = (current, keep);
            for &v in grid {
                n[i] = v;
                let val = q.value(&DirectionField { n: n.clone() });
                if val > best.0 + 1e-14 {
                    best = (val, v);
                }
            }
            n[i] = best.1;
            if best.0 > current + 1e-14 {
                improved = true;
            }
            current = best.0;
        }
        if !improved {
            break;
        }
    }
    n
}
