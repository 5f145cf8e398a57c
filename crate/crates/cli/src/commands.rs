use std::fmt::Write as _;

use mipt_core::analysis::ensemble_summary;
use mipt_core::correlators::{
    correlation_tensor, ctilde_profile, write_ctilde_csv, write_tensor_csv, Axis, MajoranaBlocks, Pair,
    SpinCorrelationTensor, NONZERO_PAIRS,
};
use mipt_core::dynamics::{
    evolve_trajectory, run_ensemble, CtildeObserver, EntropyObserver, Observed, Observer, QfiObserver,
    SigmaZObserver, TrajectoryConfig, TrajectoryRecord, TrajectoryStepper,
};
use mipt_core::entanglement::EntropyRequest;
use mipt_core::noclick::{noclick_blocks, noclick_observables, scan_phase_diagram, write_scan_csv, NoclickOptions, ScanSpec};
use mipt_core::rng::{child_seed, stream_rng};
use mipt_core::ModelParams;
use rand::Rng;
use serde_json::{json, Value};

use crate::config::{Command, Format, ObservableSpec, RunConfig, StateSource};
use crate::error::CliError;
use crate::fit;

pub const POINT_SCHEMA: &str = "mipt.noclick-point.v1";
pub const SCAN_SCHEMA: &str = "mipt.noclick-scan.v1";
pub const ENSEMBLE_SCHEMA: &str = "mipt.ensemble.v1";
pub const CORRELATORS_SCHEMA: &str = "mipt.correlators.v1";

/// Result body plus command-specific metadata (seeds and notes).
pub struct Output {
    pub body: Vec<u8>,
    pub meta: Value,
}

fn json_body(v: &impl serde::Serialize) -> Result<Vec<u8>, CliError> {
    let mut body = serde_json::to_vec_pretty(v).map_err(mipt_core::Error::from)?;
    body.push(b'\n');
    Ok(body)
}

fn params(c: &RunConfig) -> Result<ModelParams, CliError> {
    Ok(ModelParams::new(c.l.unwrap(), c.h.unwrap(), c.gamma.unwrap())?)
}

fn noclick_options(c: &RunConfig) -> NoclickOptions {
    NoclickOptions { schedule: c.schedule(), restarts: c.anneal_restarts, seed: c.seed, ell: c.ell }
}

fn entropy_note(c: &RunConfig) -> Value {
    match c.ell {
        Some(ell) => json!(format!("entropy block: sites 0..{ell} (contiguous), nats")),
        None => Value::Null,
    }
}

pub fn run(c: &RunConfig) -> Result<Output, CliError> {
    match c.command {
        Command::NoclickPoint => noclick_point(c),
        Command::NoclickScan => noclick_scan(c),
        Command::Trajectory => trajectory(c),
        Command::Ensemble => ensemble(c),
        Command::Correlators => correlators(c),
        Command::Fit => fit::run(c),
    }
}

fn noclick_point(c: &RunConfig) -> Result<Output, CliError> {
    let p = params(c)?;
    let obs = noclick_observables(&p, &noclick_options(c))?;
    let l = p.l;
    let cxx: Vec<f64> = (1..=l / 2).map(|d| obs.tensor.get(Axis::X, Axis::X, 0, d).re).collect();
    let ctilde = ctilde_profile(&obs.tensor, (Axis::X, Axis::X))?;
    let body = match c.format {
        Format::Json => json_body(&json!({
            "schema": POINT_SCHEMA,
            "params": p,
            "gamma_over_gc": p.gamma_over_critical(),
            "fq": obs.qfi.fq,
            "fq_max": obs.qfi.fq_density,
            "entropy": obs.entropy,
            "ell": obs.ell,
            "directions": obs.qfi.directions.n,
            "cxx_row": cxx,
            "ctilde_xx": ctilde,
            "anneal": obs.qfi.diagnostics,
        }))?,
        Format::Csv => {
            let mut s = String::from("quantity,index,value\n");
            let mut row = |q: &str, i: Option<usize>, v: f64| {
                let idx = i.map(|i| i.to_string()).unwrap_or_default();
                writeln!(s, "{q},{idx},{v}").unwrap();
            };
            row("L", None, l as f64);
            row("h", None, p.h);
            row("gamma", None, p.gamma);
            row("fq", None, obs.qfi.fq);
            row("fq_max", None, obs.qfi.fq_density);
            row("entropy", None, obs.entropy);
            row("ell", None, obs.ell as f64);
            for (j, n) in obs.qfi.directions.n.iter().enumerate() {
                row("n_x", Some(j), n[0]);
                row("n_y", Some(j), n[1]);
                row("n_z", Some(j), n[2]);
            }
            for (k, v) in cxx.iter().enumerate() {
                row("cxx", Some(k + 1), *v);
            }
            for (k, v) in ctilde.iter().enumerate() {
                row("ctilde_xx", Some(k + 1), *v);
            }
            s.into_bytes()
        }
    };
    Ok(Output { body, meta: json!({ "anneal_seed": c.seed, "entropy_subsystem": entropy_note(c) }) })
}

fn noclick_scan(c: &RunConfig) -> Result<Output, CliError> {
    let spec = ScanSpec {
        points: c.scan_points()?,
        sizes: c.sizes.clone().unwrap(),
        fit_window: c.fit_window,
        options: NoclickOptions { ell: None, ..noclick_options(c) },
    };
    let points = scan_phase_diagram(&spec)?;
    let body = match c.format {
        Format::Json => json_body(&json!({ "schema": SCAN_SCHEMA, "sizes": spec.sizes, "points": points }))?,
        Format::Csv => {
            let mut buf = Vec::new();
            write_scan_csv(&points, &mut buf)?;
            buf
        }
    };
    let ns = spec.sizes.len();
    let seeds: Vec<Value> = spec
        .points
        .iter()
        .enumerate()
        .flat_map(|(p, &(h, gamma))| {
            spec.sizes.iter().enumerate().map(move |(s, &l)| {
                json!({ "h": h, "gamma": gamma, "L": l, "anneal_seed": child_seed(spec.options.seed, (p * ns + s) as u64) })
            })
        })
        .collect();
    let failures: Vec<Value> = points
        .iter()
        .filter(|p| !p.errors.is_empty())
        .map(|p| json!({ "h": p.h, "gamma": p.gamma, "errors": p.errors }))
        .collect();
    Ok(Output {
        body,
        meta: json!({ "seeds": seeds, "point_errors": failures, "entropy_subsystem": "sites 0..L/4 (contiguous), nats" }),
    })
}

fn trajectory_config(c: &RunConfig) -> Result<TrajectoryConfig, CliError> {
    Ok(TrajectoryConfig {
        params: params(c)?,
        dt: c.dt.unwrap(),
        t_max: c.tmax.unwrap(),
        sample_every: c.sample_every.unwrap(),
        seed: c.seed,
    })
}

fn observers(c: &RunConfig, index: u64) -> Vec<Box<dyn Observer + Send>> {
    let ell = c.ell.unwrap();
    c.observables
        .as_ref()
        .unwrap()
        .iter()
        .map(|o| -> Box<dyn Observer + Send> {
            match o {
                ObservableSpec::Entropy => Box::new(EntropyObserver { request: EntropyRequest::new(0, ell) }),
                ObservableSpec::FqMax => Box::new(QfiObserver {
                    schedule: c.schedule(),
                    restarts: c.anneal_restarts,
                    seed: anneal_seed(c.seed, index),
                }),
                ObservableSpec::SigmaZ => Box::new(SigmaZObserver),
                ObservableSpec::Ctilde(pair) => Box::new(CtildeObserver { pair: *pair }),
            }
        })
        .collect()
}

/// Annealing seeds live on a stream separate from the jump draws.
fn anneal_seed(master: u64, index: u64) -> u64 {
    child_seed(child_seed(master, u64::MAX), index)
}

fn record_csv(r: &TrajectoryRecord) -> Vec<u8> {
    let mut s = String::from("t,observable,index,value\n");
    for (name, values) in &r.observables {
        for (t, v) in r.sample_times.iter().zip(values) {
            match v {
                Observed::Scalar(x) => writeln!(s, "{t},{name},,{x}").unwrap(),
                Observed::Series(xs) => {
                    for (i, x) in xs.iter().enumerate() {
                        writeln!(s, "{t},{name},{},{x}", series_index(name, i)).unwrap();
                    }
                }
            }
        }
    }
    for j in &r.jumps {
        writeln!(s, "{},jump,{},1", j.time, j.site).unwrap();
    }
    s.into_bytes()
}

/// Profiles over distance are indexed by `ℓ = i + 1`, site series by `i`.
fn series_index(name: &str, i: usize) -> usize {
    if name.starts_with("ctilde_") {
        i + 1
    } else {
        i
    }
}

fn trajectory(c: &RunConfig) -> Result<Output, CliError> {
    let config = trajectory_config(c)?;
    let record = evolve_trajectory(&config, &mut observers(c, 0))?;
    let body = match c.format {
        Format::Json => json_body(&record)?,
        Format::Csv => record_csv(&record),
    };
    Ok(Output {
        body,
        meta: json!({
            "jump_seed": config.seed,
            "anneal_seed": anneal_seed(c.seed, 0),
            "jumps": record.jumps.len(),
            "expected_jumps": record.expected_jumps,
            "entropy_subsystem": entropy_note(c),
        }),
    })
}

fn ensemble(c: &RunConfig) -> Result<Output, CliError> {
    let config = trajectory_config(c)?;
    let n = c.trajectories.unwrap();
    let records = run_ensemble(&config, n, |i| observers(c, i as u64))?;
    let summary = ensemble_summary(&records, c.stationary_fraction.unwrap())?;
    let jumps: Vec<usize> = records.iter().map(|r| r.jumps.len()).collect();
    let body = match c.format {
        Format::Json => json_body(&json!({ "schema": ENSEMBLE_SCHEMA, "summary": summary, "jumps": jumps }))?,
        Format::Csv => {
            let mut s = String::from("kind,observable,t,index,mean,stderr\n");
            for (name, st) in &summary.series {
                for ((t, m), e) in summary.sample_times.iter().zip(&st.mean).zip(&st.stderr) {
                    writeln!(s, "series,{name},{t},,{m},{e}").unwrap();
                }
            }
            for (name, st) in &summary.stationary {
                writeln!(s, "stationary,{name},{},,{},{}", summary.stationary_from, st.mean, st.stderr).unwrap();
            }
            for (name, prof) in &summary.stationary_profiles {
                for (i, v) in prof.iter().enumerate() {
                    writeln!(s, "profile,{name},{},{},{v},", summary.stationary_from, series_index(name, i)).unwrap();
                }
            }
            s.into_bytes()
        }
    };
    let seeds: Vec<Value> = (0..n as u64)
        .map(|i| json!({ "trajectory": i, "jump_seed": child_seed(c.seed, i), "anneal_seed": anneal_seed(c.seed, i) }))
        .collect();
    Ok(Output {
        body,
        meta: json!({
            "seeds": seeds,
            "stationary_from": summary.stationary_from,
            "entropy_subsystem": entropy_note(c),
        }),
    })
}

fn trajectory_end_state(c: &RunConfig) -> Result<(MajoranaBlocks, f64), CliError> {
    let p = params(c)?;
    let dt = c.dt.unwrap();
    let mut stepper = TrajectoryStepper::new(p, dt)?;
    let mut rng = stream_rng(c.seed, 0);
    let steps = (c.tmax.unwrap() / dt).round() as u64;
    for _ in 0..steps {
        stepper.advance(rng.random())?;
    }
    Ok((MajoranaBlocks::from_state(stepper.state()), stepper.state().time))
}

fn correlators(c: &RunConfig) -> Result<Output, CliError> {
    let p = params(c)?;
    let (blocks, time) = match c.state.unwrap() {
        StateSource::Noclick => (noclick_blocks(&p)?, None),
        StateSource::Trajectory => {
            let (b, t) = trajectory_end_state(c)?;
            (b, Some(t))
        }
    };
    let tensor = correlation_tensor(&blocks)?;
    let full = c.tensor == Some(true);
    let body = match c.format {
        Format::Json => {
            let mut ctilde = serde_json::Map::new();
            for &pair in &NONZERO_PAIRS {
                ctilde.insert(pair_name(pair), json!(ctilde_profile(&tensor, pair)?));
            }
            let mut doc = json!({ "schema": CORRELATORS_SCHEMA, "params": p, "state": c.state, "time": time, "ctilde": ctilde });
            if full {
                doc["tensor"] = tensor_json(&tensor);
            }
            json_body(&doc)?
        }
        Format::Csv => {
            let mut buf = Vec::new();
            if full {
                write_tensor_csv(&tensor, &mut buf)?;
            } else {
                write_ctilde_csv(&tensor, &mut buf)?;
            }
            buf
        }
    };
    let seed = (c.state == Some(StateSource::Trajectory)).then_some(c.seed);
    Ok(Output { body, meta: json!({ "jump_seed": seed, "time": time }) })
}

pub fn pair_name(p: Pair) -> String {
    format!("{}{}", p.0, p.1)
}

/// `{"xx": {"re": [[..]], "im": [[..]]}, ...}` with rows indexed by `i`.
fn tensor_json(t: &SpinCorrelationTensor) -> Value {
    let l = t.len();
    let mut out = serde_json::Map::new();
    for &(a, b) in &NONZERO_PAIRS {
        let part = |f: fn(mipt_core::c64) -> f64| -> Vec<Vec<f64>> {
            (0..l).map(|i| (0..l).map(|j| f(t.get(a, b, i, j))).collect()).collect()
        };
        out.insert(pair_name((a, b)), json!({ "re": part(|z| z.re), "im": part(|z| z.im) }));
    }
    Value::Object(out)
}
