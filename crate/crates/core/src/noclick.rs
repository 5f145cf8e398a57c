//! Stationary no-click state: vacuum amplitudes → correlators → maximal
//! QFI and entropy, and scans of the scaling exponent `p` of
//! `f_Q^max ∼ L^p` over `(h, γ)`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::analysis::{fit_power_law, FitResult};
use crate::correlators::{correlation_tensor, MajoranaBlocks, SpinCorrelationTensor};
use crate::entanglement::{entanglement_entropy, EntropyRequest};
use crate::qfi::{maximize_qfi, AnnealSchedule, QfiResult};
use crate::rng::child_seed;
use crate::spectral::{critical_rate, noclick_vacuum};
use crate::{par, Error, ModelParams, Result};

/// Sizes used for exponent fits by default.
pub fn default_sizes() -> Vec<usize> {
    (4..=17).map(|k| 10 * k).collect()
}

/// Small sizes for quick scans.
pub fn smoke_sizes() -> Vec<usize> {
    vec![16, 24, 32, 40, 48, 56, 64]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoclickOptions {
    pub schedule: AnnealSchedule,
    pub restarts: usize,
    pub seed: u64,
    /// Entropy block length; `None` means `L/4`.
    pub ell: Option<usize>,
}

impl Default for NoclickOptions {
    fn default() -> Self {
        NoclickOptions {
            schedule: AnnealSchedule::default(),
            restarts: 8,
            seed: 0,
            ell: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct NoclickObservables {
    pub params: ModelParams,
    pub tensor: SpinCorrelationTensor,
    pub qfi: QfiResult,
    /// Entropy of the block `0..ell` (nats).
    pub entropy: f64,
    pub ell: usize,
}

/// The no-click stationary blocks of `params`.
pub fn noclick_blocks(params: &ModelParams) -> Result<MajoranaBlocks> {
    MajoranaBlocks::from_amplitudes(&noclick_vacuum(params)?, params.l)
}

pub fn noclick_observables(params: &ModelParams, options: &NoclickOptions) -> Result<NoclickObservables> {
    let ctx = || format!("no-click point h = {}, gamma = {}, L = {}", params.h, params.gamma, params.l);
    let run = || -> Result<NoclickObservables> {
        let blocks = noclick_blocks(params)?;
        let tensor = correlation_tensor(&blocks)?;
        let qfi = maximize_qfi(&tensor, &options.schedule, options.restarts, options.seed)?;
        let request = match options.ell {
            Some(ell) => EntropyRequest::new(0, ell),
            None => EntropyRequest::quarter(params.l),
        };
        let entropy = entanglement_entropy(&blocks, request)?;
        Ok(NoclickObservables { params: *params, tensor, qfi, entropy, ell: request.ell })
    };
    run().map_err(|e| e.context(ctx()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    /// `(h, γ)` grid points.
    pub points: Vec<(f64, f64)>,
    pub sizes: Vec<usize>,
    pub fit_window: Option<(f64, f64)>,
    pub options: NoclickOptions,
}

impl ScanSpec {
    pub fn validate(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::Parameter("scan grid is empty".into()));
        }
        if self.sizes.len() < 4 {
            return Err(Error::Parameter("a scan needs at least 4 sizes to fit p".into()));
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parameter("sizes must be strictly ascending".into()));
        }
        for &l in &self.sizes {
            ModelParams::new(l, 0.0, 0.0)?;
        }
        for &(h, g) in &self.points {
            ModelParams::new(self.sizes[0], h, g)?;
        }
        Ok(())
    }
}

/// One `(h, γ, L)` evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanSample {
    pub l: usize,
    pub fq_max: f64,
    pub entropy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub h: f64,
    pub gamma: f64,
    pub gamma_over_gc: Option<f64>,
    pub samples: Vec<ScanSample>,
    pub fit: Option<FitResult>,
    /// Failures for this point; the scan itself continues.
    pub errors: Vec<String>,
}

impl ScanPoint {
    pub fn p(&self) -> Option<f64> {
        self.fit.as_ref().map(|f| f.exponent)
    }
}

/// Evaluates every `(point, L)` and fits `p` per point.
pub fn scan_phase_diagram(spec: &ScanSpec) -> Result<Vec<ScanPoint>> {
    spec.validate()?;
    let items: Vec<(usize, usize)> = (0..spec.points.len())
        .flat_map(|p| (0..spec.sizes.len()).map(move |s| (p, s)))
        .collect();
    let results = par::map_collect(items.clone(), |(p, s)| {
        let (h, gamma) = spec.points[p];
        let params = ModelParams::new(spec.sizes[s], h, gamma)?;
        let mut options = spec.options.clone();
        options.seed = child_seed(spec.options.seed, (p * spec.sizes.len() + s) as u64);
        noclick_observables(&params, &options)
    });
    let mut out: Vec<ScanPoint> = spec
        .points
        .iter()
        .map(|&(h, gamma)| ScanPoint {
            h,
            gamma,
            gamma_over_gc: critical_rate(h).ok().map(|gc| gamma / gc),
            samples: Vec::new(),
            fit: None,
            errors: Vec::new(),
        })
        .collect();
    for ((p, s), res) in items.into_iter().zip(results) {
        match res {
            Ok(obs) => out[p].samples.push(ScanSample {
                l: spec.sizes[s],
                fq_max: obs.qfi.fq_density,
                entropy: obs.entropy,
            }),
            Err(e) => out[p].errors.push(e.to_string()),
        }
    }
    for point in &mut out {
        let x: Vec<f64> = point.samples.iter().map(|s| s.l as f64).collect();
        let y: Vec<f64> = point.samples.iter().map(|s| s.fq_max).collect();
        match fit_power_law(&x, &y, spec.fit_window) {
            Ok(f) => point.fit = Some(f),
            Err(e) => point.errors.push(format!("fit: {e}")),
        }
    }
    Ok(out)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

/// CSV `h,gamma,gamma_over_gc,L,fq_max,entropy,p,p_err`: one row per size,
/// then a summary row per point with `L = fit`.
pub fn write_scan_csv<W: Write>(points: &[ScanPoint], mut out: W) -> Result<()> {
    writeln!(out, "h,gamma,gamma_over_gc,L,fq_max,entropy,p,p_err")?;
    for p in points {
        let g = opt(p.gamma_over_gc);
        for s in &p.samples {
            writeln!(out, "{},{},{g},{},{},{},,", p.h, p.gamma, s.l, s.fq_max, s.entropy)?;
        }
        let (pv, pe) = match &p.fit {
            Some(f) => (format!("{}", f.exponent), format!("{}", f.stderr)),
            None => (String::new(), String::new()),
        };
        writeln!(out, "{},{},{g},fit,,,{pv},{pe}", p.h, p.gamma)?;
    }
    Ok(())
}
