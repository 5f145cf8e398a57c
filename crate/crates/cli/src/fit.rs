//! Refits exponents from any file written by the other subcommands.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use mipt_core::analysis::{ensemble_summary, fit_decay_exponent, fit_power_law, fit_xx_ansatz, FitResult};
use mipt_core::dynamics::{TrajectoryRecord, TRAJECTORY_SCHEMA};
use mipt_core::spectral::gap_momentum;
use serde::Serialize;
use serde_json::{json, Value};

use crate::commands::{Output, CORRELATORS_SCHEMA, ENSEMBLE_SCHEMA, POINT_SCHEMA, SCAN_SCHEMA};
use crate::config::{Format, RunConfig};
use crate::error::CliError;

pub const FIT_SCHEMA: &str = "mipt.fit.v1";

const SCAN_HEADER: &str = "h,gamma,gamma_over_gc,L,fq_max,entropy,p,p_err";
const POINT_HEADER: &str = "quantity,index,value";
const TRAJECTORY_HEADER: &str = "t,observable,index,value";
const ENSEMBLE_HEADER: &str = "kind,observable,t,index,mean,stderr";
const CTILDE_HEADER: &str = "alpha,beta,ell,value";
const TENSOR_HEADER: &str = "alpha,beta,i,j,re,im";

#[derive(Clone, Debug, Serialize)]
pub struct FitRow {
    pub label: String,
    /// `p` for size scalings, `lambda` for decay exponents.
    pub quantity: &'static str,
    pub exponent: Option<f64>,
    pub stderr: Option<f64>,
    pub prefactor: Option<f64>,
    pub r_squared: Option<f64>,
    pub loglinear_r_squared: Option<f64>,
    pub regime: Option<String>,
    pub window: Option<(f64, f64)>,
    pub points: Option<usize>,
    pub error: Option<String>,
}

impl FitRow {
    fn new(label: String, quantity: &'static str, fit: mipt_core::Result<FitResult>) -> Self {
        let mut row = FitRow {
            label,
            quantity,
            exponent: None,
            stderr: None,
            prefactor: None,
            r_squared: None,
            loglinear_r_squared: None,
            regime: None,
            window: None,
            points: None,
            error: None,
        };
        match fit {
            Ok(f) => {
                row.exponent = Some(f.exponent);
                row.stderr = Some(f.stderr);
                row.prefactor = Some(f.prefactor);
                row.r_squared = Some(f.r_squared);
                row.window = Some(f.window);
                row.points = Some(f.points);
            }
            Err(e) => row.error = Some(e.to_string()),
        }
        row
    }
}

fn bad(path: &Path, msg: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{}: {msg}", path.display()))
}

pub fn run(c: &RunConfig) -> Result<Output, CliError> {
    let path = c.input.as_deref().unwrap();
    let text = std::fs::read_to_string(path).map_err(CliError::io(format!("cannot read {}", path.display())))?;
    let (source, rows) = if text.trim_start().starts_with('{') {
        let doc: Value = serde_json::from_str(&text).map_err(|e| bad(path, e))?;
        from_json(c, path, doc)?
    } else {
        from_csv(c, path, &text)?
    };
    if rows.is_empty() {
        return Err(bad(path, "nothing to fit"));
    }
    let body = match c.format {
        Format::Json => {
            let mut b = serde_json::to_vec_pretty(&json!({ "schema": FIT_SCHEMA, "source": source, "fits": rows }))
                .map_err(mipt_core::Error::from)?;
            b.push(b'\n');
            b
        }
        Format::Csv => rows_csv(&rows).into_bytes(),
    };
    Ok(Output { body, meta: json!({ "input": path, "source": source }) })
}

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

fn rows_csv(rows: &[FitRow]) -> String {
    let mut s = String::from(
        "label,quantity,exponent,stderr,prefactor,r_squared,loglinear_r_squared,regime,window_lo,window_hi,points,error\n",
    );
    for r in rows {
        let (lo, hi) = match r.window {
            Some((a, b)) => (a.to_string(), b.to_string()),
            None => (String::new(), String::new()),
        };
        let err = r.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{lo},{hi},{},{err}",
            r.label,
            r.quantity,
            opt(&r.exponent),
            opt(&r.stderr),
            opt(&r.prefactor),
            opt(&r.r_squared),
            opt(&r.loglinear_r_squared),
            opt(&r.regime),
            opt(&r.points),
        )
        .unwrap();
    }
    s
}

fn scan_fit(c: &RunConfig, label: String, ls: &[f64], fq: &[f64]) -> FitRow {
    FitRow::new(label, "p", fit_power_law(ls, fq, c.fit_window))
}

fn decay_fit(c: &RunConfig, label: String, profile: &[f64]) -> FitRow {
    let ells: Vec<f64> = (1..=profile.len()).map(|l| l as f64).collect();
    match fit_decay_exponent(&ells, profile, Some(c.decay_window)) {
        Ok(d) => {
            let mut p = d.power.clone();
            p.exponent = d.lambda;
            let mut row = FitRow::new(label, "lambda", Ok(p));
            row.loglinear_r_squared = Some(d.loglinear_r_squared);
            row.regime = Some(serde_json::to_value(d.regime).unwrap().as_str().unwrap().to_owned());
            row
        }
        Err(e) => FitRow::new(label, "lambda", Err(e)),
    }
}

fn xx_fit(c: &RunConfig, h: f64, row: &[f64]) -> FitRow {
    let fit = gap_momentum(h).and_then(|k| fit_xx_ansatz(row, k, Some(c.decay_window)));
    FitRow::new("cxx_ansatz".into(), "lambda", fit)
}

fn point_label(h: f64, gamma: f64) -> String {
    format!("h={h};gamma={gamma}")
}

fn floats(v: &Value) -> Option<Vec<f64>> {
    v.as_array()?.iter().map(Value::as_f64).collect()
}

fn from_json(c: &RunConfig, path: &Path, doc: Value) -> Result<(String, Vec<FitRow>), CliError> {
    let schema = doc["schema"].as_str().ok_or_else(|| bad(path, "JSON input has no schema field"))?.to_owned();
    let missing = |what: &str| bad(path, format!("{schema} document lacks {what}"));
    let mut rows = Vec::new();
    match schema.as_str() {
        SCAN_SCHEMA => {
            for p in doc["points"].as_array().ok_or_else(|| missing("points"))? {
                let (h, g) = (p["h"].as_f64().unwrap_or(f64::NAN), p["gamma"].as_f64().unwrap_or(f64::NAN));
                let samples = p["samples"].as_array().ok_or_else(|| missing("samples"))?;
                let ls: Vec<f64> = samples.iter().filter_map(|s| s["l"].as_f64()).collect();
                let fq: Vec<f64> = samples.iter().filter_map(|s| s["fq_max"].as_f64()).collect();
                rows.push(scan_fit(c, point_label(h, g), &ls, &fq));
            }
        }
        POINT_SCHEMA => {
            let h = doc["params"]["h"].as_f64().ok_or_else(|| missing("params.h"))?;
            rows.push(xx_fit(c, h, &floats(&doc["cxx_row"]).ok_or_else(|| missing("cxx_row"))?));
            rows.push(decay_fit(c, "xx".into(), &floats(&doc["ctilde_xx"]).ok_or_else(|| missing("ctilde_xx"))?));
        }
        TRAJECTORY_SCHEMA => {
            let record: TrajectoryRecord = serde_json::from_value(doc).map_err(|e| bad(path, e))?;
            let summary = ensemble_summary(&[record], c.stationary_fraction.unwrap())?;
            for (name, prof) in &summary.stationary_profiles {
                if let Some(pair) = name.strip_prefix("ctilde_") {
                    rows.push(decay_fit(c, pair.into(), prof));
                }
            }
        }
        ENSEMBLE_SCHEMA => {
            let profiles = doc["summary"]["stationary_profiles"].as_object().ok_or_else(|| missing("stationary_profiles"))?;
            for (name, prof) in profiles {
                if let (Some(pair), Some(v)) = (name.strip_prefix("ctilde_"), floats(prof)) {
                    rows.push(decay_fit(c, pair.into(), &v));
                }
            }
        }
        CORRELATORS_SCHEMA => {
            for (pair, prof) in doc["ctilde"].as_object().ok_or_else(|| missing("ctilde"))? {
                rows.push(decay_fit(c, pair.clone(), &floats(prof).ok_or_else(|| missing("ctilde values"))?));
            }
        }
        FIT_SCHEMA => return Err(bad(path, "input is already a fit table")),
        other => return Err(bad(path, format!("unknown schema '{other}'"))),
    }
    Ok((schema, rows))
}

fn num(path: &Path, field: &str) -> Result<f64, CliError> {
    field.parse().map_err(|_| bad(path, format!("not a number: '{field}'")))
}

fn from_csv(c: &RunConfig, path: &Path, text: &str) -> Result<(String, Vec<FitRow>), CliError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| bad(path, e))?.iter().collect::<Vec<_>>().join(",");
    let records: Vec<csv::StringRecord> = reader.records().collect::<Result<_, _>>().map_err(|e| bad(path, e))?;
    let mut rows = Vec::new();
    match header.as_str() {
        SCAN_HEADER => {
            let mut points: Vec<((String, String), Vec<f64>, Vec<f64>)> = Vec::new();
            for r in &records {
                if &r[3] == "fit" {
                    continue;
                }
                let key = (r[0].to_owned(), r[1].to_owned());
                if points.last().map(|p| &p.0) != Some(&key) {
                    points.push((key, Vec::new(), Vec::new()));
                }
                let p = points.last_mut().unwrap();
                p.1.push(num(path, &r[3])?);
                p.2.push(num(path, &r[4])?);
            }
            for ((h, g), ls, fq) in points {
                rows.push(scan_fit(c, format!("h={h};gamma={g}"), &ls, &fq));
            }
        }
        POINT_HEADER => {
            let mut h = None;
            let (mut cxx, mut ctilde) = (Vec::new(), Vec::new());
            for r in &records {
                match &r[0] {
                    "h" => h = Some(num(path, &r[2])?),
                    "cxx" => cxx.push(num(path, &r[2])?),
                    "ctilde_xx" => ctilde.push(num(path, &r[2])?),
                    _ => {}
                }
            }
            let h = h.ok_or_else(|| bad(path, "no h row"))?;
            rows.push(xx_fit(c, h, &cxx));
            rows.push(decay_fit(c, "xx".into(), &ctilde));
        }
        TRAJECTORY_HEADER => {
            let mut times: Vec<f64> = Vec::new();
            let mut profiles: BTreeMap<String, BTreeMap<u64, Vec<f64>>> = BTreeMap::new();
            for r in &records {
                let t = num(path, &r[0])?;
                if &r[1] != "jump" {
                    times.push(t);
                }
                if let Some(pair) = r[1].strip_prefix("ctilde_") {
                    let v = num(path, &r[3])?;
                    profiles.entry(pair.to_owned()).or_default().entry(t.to_bits()).or_default().push(v);
                }
            }
            times.sort_by(f64::total_cmp);
            times.dedup();
            let window = ((times.len() as f64 * c.stationary_fraction.unwrap()).ceil() as usize).clamp(1, times.len().max(1));
            let from = times.len().saturating_sub(window);
            let stationary: Vec<u64> = times[from..].iter().map(|t| t.to_bits()).collect();
            for (pair, by_time) in profiles {
                let used: Vec<&Vec<f64>> = stationary.iter().filter_map(|t| by_time.get(t)).collect();
                let Some(first) = used.first() else { continue };
                let mean: Vec<f64> = (0..first.len())
                    .map(|i| used.iter().map(|p| p[i]).sum::<f64>() / used.len() as f64)
                    .collect();
                rows.push(decay_fit(c, pair, &mean));
            }
        }
        ENSEMBLE_HEADER => {
            let mut profiles: BTreeMap<String, Vec<f64>> = BTreeMap::new();
            for r in records.iter().filter(|r| &r[0] == "profile") {
                if let Some(pair) = r[1].strip_prefix("ctilde_") {
                    profiles.entry(pair.to_owned()).or_default().push(num(path, &r[4])?);
                }
            }
            for (pair, prof) in profiles {
                rows.push(decay_fit(c, pair, &prof));
            }
        }
        CTILDE_HEADER => {
            let mut profiles: BTreeMap<String, Vec<f64>> = BTreeMap::new();
            for r in &records {
                profiles.entry(format!("{}{}", &r[0], &r[1])).or_default().push(num(path, &r[3])?);
            }
            for (pair, prof) in profiles {
                rows.push(decay_fit(c, pair, &prof));
            }
        }
        TENSOR_HEADER => {
            let mut blocks: BTreeMap<String, BTreeMap<(usize, usize), f64>> = BTreeMap::new();
            for r in &records {
                let (i, j) = (num(path, &r[2])? as usize, num(path, &r[3])? as usize);
                let (re, im) = (num(path, &r[4])?, num(path, &r[5])?);
                blocks.entry(format!("{}{}", &r[0], &r[1])).or_default().insert((i, j), re.hypot(im));
            }
            for (pair, block) in blocks {
                let l = block.keys().map(|k| k.0).max().map_or(0, |m| m + 1);
                let prof: Vec<f64> = (1..=l / 2)
                    .map(|ell| (0..l).map(|i| block.get(&(i, (i + ell) % l)).copied().unwrap_or(0.0)).sum::<f64>() / l as f64)
                    .collect();
                rows.push(decay_fit(c, pair, &prof));
            }
        }
        h if h.starts_with("label,quantity,exponent") => return Err(bad(path, "input is already a fit table")),
        other => return Err(bad(path, format!("unrecognised CSV header '{other}'"))),
    }
    Ok((header, rows))
}
