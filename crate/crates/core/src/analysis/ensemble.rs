use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dynamics::{Observed, TrajectoryRecord};
use crate::{Error, ModelParams, Result};

/// Default stationary window: the final quarter of the sample times.
pub const DEFAULT_STATIONARY_FRACTION: f64 = 0.25;

/// Pointwise mean and standard error over trajectories.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesStats {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

/// Long-time average of one observable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationaryStat {
    pub mean: f64,
    /// Standard error of the per-trajectory time averages.
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub params: ModelParams,
    pub trajectories: usize,
    pub sample_times: Vec<f64>,
    /// First sample time included in the stationary averages.
    pub stationary_from: f64,
    pub series: BTreeMap<String, SeriesStats>,
    pub stationary: BTreeMap<String, StationaryStat>,
    /// Stationary, ensemble-averaged profiles of vector observables.
    pub stationary_profiles: BTreeMap<String, Vec<f64>>,
}

fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Ensemble statistics over records sharing parameters and sample grid.
/// `stationary_fraction` selects the trailing fraction of sample times used
/// for long-time averages.
pub fn ensemble_summary(records: &[TrajectoryRecord], stationary_fraction: f64) -> Result<EnsembleSummary> {
    let first = records
        .first()
        .ok_or_else(|| Error::Contract("ensemble summary of zero trajectories".into()))?;
    if !(stationary_fraction > 0.0 && stationary_fraction <= 1.0) {
        return Err(Error::Parameter(format!(
            "stationary fraction must lie in (0, 1] (got {stationary_fraction})"
        )));
    }
    for (k, r) in records.iter().enumerate() {
        if r.params != first.params {
            return Err(Error::Contract(format!("record {k} has different model parameters")));
        }
        if r.sample_times.len() != first.sample_times.len()
            || r.sample_times.iter().zip(&first.sample_times).any(|(a, b)| (a - b).abs() > 1e-9)
        {
            return Err(Error::Contract(format!("record {k} has a different sample grid")));
        }
        if r.observables.keys().ne(first.observables.keys()) {
            return Err(Error::Contract(format!("record {k} has different observables")));
        }
    }
    let ns = first.sample_times.len();
    if ns == 0 {
        return Err(Error::Contract("records contain no samples".into()));
    }
    let window = ((ns as f64 * stationary_fraction).ceil() as usize).clamp(1, ns);
    let from = ns - window;

    let mut series = BTreeMap::new();
    let mut stationary = BTreeMap::new();
    let mut stationary_profiles = BTreeMap::new();
    for name in first.observables.keys() {
        match &first.observables[name][0] {
            Observed::Scalar(_) => {
                let table: Vec<Vec<f64>> = records
                    .iter()
                    .map(|r| r.observables[name].iter().map(Observed::scalar).collect::<Result<_>>())
                    .collect::<Result<_>>()?;
                let (mean, stderr) = (0..ns)
                    .map(|t| mean_stderr(&table.iter().map(|row| row[t]).collect::<Vec<_>>()))
                    .unzip();
                series.insert(name.clone(), SeriesStats { mean, stderr });
                let per_traj: Vec<f64> = table
                    .iter()
                    .map(|row| row[from..].iter().sum::<f64>() / window as f64)
                    .collect();
                let (mean, stderr) = mean_stderr(&per_traj);
                stationary.insert(name.clone(), StationaryStat { mean, stderr });
            }
            Observed::Series(v0) => {
                let mut acc = vec![0.0; v0.len()];
                for r in records {
                    for obs in &r.observables[name][from..] {
                        let v = obs.series()?;
                        if v.len() != acc.len() {
                            return Err(Error::Contract(format!("observable {name} changes length")));
                        }
                        for (a, x) in acc.iter_mut().zip(v) {
                            *a += x;
                        }
                    }
                }
                let norm = (records.len() * window) as f64;
                stationary_profiles.insert(name.clone(), acc.into_iter().map(|a| a / norm).collect());
            }
        }
    }
    Ok(EnsembleSummary {
        params: first.params,
        trajectories: records.len(),
        sample_times: first.sample_times.clone(),
        stationary_from: first.sample_times[from],
        series,
        stationary,
        stationary_profiles,
    })
}
