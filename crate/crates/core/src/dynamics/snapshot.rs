//! Binary `(C, F)` snapshots.
//!
//! Layout (all little-endian): 4-byte magic `MIPT`, `L` as `u32`, time as
//! `f64`, then `C` and `F` in row-major order as `(re, im)` `f64` pairs.

use std::io::{Read, Write};

use faer::Mat;

use super::CorrelationState;
use crate::{c64, Error, Result};

pub const SNAPSHOT_MAGIC: [u8; 4] = *b"MIPT";

pub fn write_snapshot<W: Write>(state: &CorrelationState, mut out: W) -> Result<()> {
    let l = state.len();
    let l32 = u32::try_from(l).map_err(|_| Error::Parameter(format!("L = {l} too large")))?;
    out.write_all(&SNAPSHOT_MAGIC)?;
    out.write_all(&l32.to_le_bytes())?;
    out.write_all(&state.time.to_le_bytes())?;
    let mut buf = Vec::with_capacity(16 * l * l);
    for m in [&state.c, &state.f] {
        buf.clear();
        for i in 0..l {
            for j in 0..l {
                buf.extend_from_slice(&m[(i, j)].re.to_le_bytes());
                buf.extend_from_slice(&m[(i, j)].im.to_le_bytes());
            }
        }
        out.write_all(&buf)?;
    }
    Ok(())
}

pub fn read_snapshot<R: Read>(mut input: R) -> Result<CorrelationState> {
    let mut header = [0u8; 16];
    input.read_exact(&mut header)?;
    if header[..4] != SNAPSHOT_MAGIC {
        return Err(Error::Contract("not a snapshot file (bad magic)".into()));
    }
    let l = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    let time = f64::from_le_bytes(header[8..16].try_into().unwrap());
    let mut body = vec![0u8; 32 * l * l];
    input.read_exact(&mut body)?;
    let value = |k: usize| f64::from_le_bytes(body[8 * k..8 * k + 8].try_into().unwrap());
    let block = |offset: usize| {
        Mat::from_fn(l, l, |i, j| {
            let k = offset + 2 * (i * l + j);
            c64::new(value(k), value(k + 1))
        })
    };
    CorrelationState::new(block(0), block(2 * l * l), time)
}
