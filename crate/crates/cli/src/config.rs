use std::path::{Path, PathBuf};

use mipt_core::analysis::{DEFAULT_DECAY_WINDOW, DEFAULT_STATIONARY_FRACTION};
use mipt_core::correlators::{parse_pair, Pair};
use mipt_core::dynamics::DEFAULT_DT;
use mipt_core::noclick::default_sizes;
use mipt_core::qfi::AnnealSchedule;
use mipt_core::spectral::critical_rate;
use serde::Serialize;
use toml::{Table, Value};

use crate::error::CliError;

/// Every key accepted in a config file.
pub const KEYS: &[&str] = &[
    "command",
    "L",
    "h",
    "gamma",
    "dt",
    "tmax",
    "sample_every",
    "trajectories",
    "seed",
    "out",
    "format",
    "threads",
    "ell",
    "anneal_restarts",
    "anneal_sweeps",
    "anneal_cooling",
    "sizes",
    "h_values",
    "gamma_values",
    "gamma_relative",
    "fit_window",
    "decay_window",
    "stationary_fraction",
    "observables",
    "state",
    "tensor",
    "input",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    NoclickScan,
    NoclickPoint,
    Trajectory,
    Ensemble,
    Fit,
    Correlators,
}

impl Command {
    pub const NAMES: [&'static str; 6] =
        ["noclick-scan", "noclick-point", "trajectory", "ensemble", "fit", "correlators"];

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "noclick-scan" => Command::NoclickScan,
            "noclick-point" => Command::NoclickPoint,
            "trajectory" => Command::Trajectory,
            "ensemble" => Command::Ensemble,
            "fit" => Command::Fit,
            "correlators" => Command::Correlators,
            _ => return None,
        })
    }

    fn needs_model(self) -> bool {
        !matches!(self, Command::NoclickScan | Command::Fit)
    }

    fn is_dynamic(self) -> bool {
        matches!(self, Command::Trajectory | Command::Ensemble)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StateSource {
    Noclick,
    Trajectory,
}

/// Observables recorded along trajectories.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(into = "String")]
pub enum ObservableSpec {
    Entropy,
    FqMax,
    SigmaZ,
    Ctilde(Pair),
}

impl From<ObservableSpec> for String {
    fn from(o: ObservableSpec) -> String {
        match o {
            ObservableSpec::Entropy => "entropy".into(),
            ObservableSpec::FqMax => "fq_max".into(),
            ObservableSpec::SigmaZ => "sigma_z".into(),
            ObservableSpec::Ctilde((a, b)) => format!("ctilde_{a}{b}"),
        }
    }
}

impl ObservableSpec {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "entropy" => Some(ObservableSpec::Entropy),
            "fq_max" => Some(ObservableSpec::FqMax),
            "sigma_z" => Some(ObservableSpec::SigmaZ),
            _ => s.strip_prefix("ctilde_").and_then(|p| parse_pair(p).ok()).map(ObservableSpec::Ctilde),
        }
    }
}

/// Fully resolved run configuration. Keys that do not apply to the command
/// are `None`; everything else carries its effective value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    #[serde(rename = "L")]
    pub l: Option<usize>,
    pub h: Option<f64>,
    pub gamma: Option<f64>,
    pub dt: Option<f64>,
    pub tmax: Option<f64>,
    pub sample_every: Option<f64>,
    pub trajectories: Option<usize>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub threads: Option<usize>,
    /// Entropy block `0..ell`.
    pub ell: Option<usize>,
    pub anneal_restarts: usize,
    pub anneal_sweeps: usize,
    pub anneal_cooling: f64,
    pub sizes: Option<Vec<usize>>,
    pub h_values: Option<Vec<f64>>,
    pub gamma_values: Option<Vec<f64>>,
    /// `gamma_values` are in units of `γ_c(h)`.
    pub gamma_relative: Option<bool>,
    pub fit_window: Option<(f64, f64)>,
    pub decay_window: (f64, f64),
    pub stationary_fraction: Option<f64>,
    pub observables: Option<Vec<ObservableSpec>>,
    pub state: Option<StateSource>,
    pub tensor: Option<bool>,
    pub input: Option<PathBuf>,
}

impl RunConfig {
    pub fn schedule(&self) -> AnnealSchedule {
        AnnealSchedule {
            sweeps_per_site: self.anneal_sweeps,
            cooling: self.anneal_cooling,
            ..AnnealSchedule::default()
        }
    }

    /// `(h, γ)` grid of a scan with relative rates converted.
    pub fn scan_points(&self) -> Result<Vec<(f64, f64)>, CliError> {
        let hs = self.h_values.as_deref().unwrap_or_default();
        let gs = self.gamma_values.as_deref().unwrap_or_default();
        let mut points = Vec::with_capacity(hs.len() * gs.len());
        for &h in hs {
            for &g in gs {
                let gamma = if self.gamma_relative == Some(true) {
                    let gc = critical_rate(h).map_err(|_| {
                        CliError::key("gamma_relative", format!("relative rates need |h| < 1 (got h = {h})"))
                    })?;
                    g * gc
                } else {
                    g
                };
                points.push((h, gamma));
            }
        }
        Ok(points)
    }
}

/// Raw flag values; `None` means "not given".
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub command: Option<String>,
    pub l: Option<i64>,
    pub h: Option<f64>,
    pub gamma: Option<f64>,
    pub dt: Option<f64>,
    pub tmax: Option<f64>,
    pub sample_every: Option<f64>,
    pub trajectories: Option<i64>,
    pub seed: Option<i64>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub threads: Option<i64>,
    pub ell: Option<i64>,
    pub anneal_restarts: Option<i64>,
    pub input: Option<PathBuf>,
}

impl Overrides {
    fn apply(self, table: &mut Table) {
        let mut set = |k: &str, v: Option<Value>| {
            if let Some(v) = v {
                table.insert(k.into(), v);
            }
        };
        let path = |p: Option<PathBuf>| p.map(|p| Value::String(p.to_string_lossy().into_owned()));
        set("command", self.command.map(Value::String));
        set("L", self.l.map(Value::Integer));
        set("h", self.h.map(Value::Float));
        set("gamma", self.gamma.map(Value::Float));
        set("dt", self.dt.map(Value::Float));
        set("tmax", self.tmax.map(Value::Float));
        set("sample_every", self.sample_every.map(Value::Float));
        set("trajectories", self.trajectories.map(Value::Integer));
        set("seed", self.seed.map(Value::Integer));
        set("out", path(self.out));
        set("format", self.format.map(Value::String));
        set("threads", self.threads.map(Value::Integer));
        set("ell", self.ell.map(Value::Integer));
        set("anneal_restarts", self.anneal_restarts.map(Value::Integer));
        set("input", path(self.input));
    }
}

/// Reads the optional config file, applies flag overrides and resolves
/// every default.
pub fn parse_config(file: Option<&Path>, overrides: Overrides, env_threads: Option<String>) -> Result<RunConfig, CliError> {
    let mut table = match file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::config(format!("cannot read config file {}: {e}", path.display())))?;
            text.parse::<Table>()
                .map_err(|e| CliError::config(format!("config file {}: {}", path.display(), e.message())))?
        }
        None => Table::new(),
    };
    for key in table.keys() {
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::key(key, format!("unknown key `{key}`")));
        }
    }
    overrides.apply(&mut table);
    if !table.contains_key("threads") {
        if let Some(v) = env_threads {
            let n = v
                .trim()
                .parse::<i64>()
                .map_err(|_| CliError::key("threads", format!("MIPT_THREADS must be an integer (got '{v}')")))?;
            table.insert("threads".into(), Value::Integer(n));
        }
    }
    Resolver { table }.resolve()
}

struct Resolver {
    table: Table,
}

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::String(_) => "string",
        Value::Integer(_) => "integer",
        Value::Float(_) => "float",
        Value::Boolean(_) => "boolean",
        Value::Datetime(_) => "datetime",
        Value::Array(_) => "array",
        Value::Table(_) => "table",
    }
}

fn mismatch(key: &str, want: &str, v: &Value) -> CliError {
    CliError::key(key, format!("key `{key}`: expected {want}, found {}", type_name(v)))
}

fn as_f64(key: &str, v: &Value) -> Result<f64, CliError> {
    match v {
        Value::Float(x) => Ok(*x),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(mismatch(key, "a number", v)),
    }
}

impl Resolver {
    fn float(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.table.get(key).map(|v| as_f64(key, v)).transpose()
    }

    fn int(&self, key: &str) -> Result<Option<i64>, CliError> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::Integer(i)) => Ok(Some(*i)),
            Some(v) => Err(mismatch(key, "an integer", v)),
        }
    }

    fn count(&self, key: &str, min: i64) -> Result<Option<usize>, CliError> {
        match self.int(key)? {
            Some(v) if v < min => Err(CliError::key(key, format!("key `{key}`: {key} ≥ {min} required (got {v})"))),
            v => Ok(v.map(|v| v as usize)),
        }
    }

    fn string(&self, key: &str) -> Result<Option<&str>, CliError> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(v) => Err(mismatch(key, "a string", v)),
        }
    }

    fn boolean(&self, key: &str) -> Result<Option<bool>, CliError> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::Boolean(b)) => Ok(Some(*b)),
            Some(v) => Err(mismatch(key, "a boolean", v)),
        }
    }

    fn array(&self, key: &str) -> Result<Option<&Vec<Value>>, CliError> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::Array(a)) => Ok(Some(a)),
            Some(v) => Err(mismatch(key, "an array", v)),
        }
    }

    fn floats(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        self.array(key)?
            .map(|a| a.iter().map(|v| as_f64(key, v)).collect())
            .transpose()
    }

    fn window(&self, key: &str) -> Result<Option<(f64, f64)>, CliError> {
        match self.floats(key)? {
            None => Ok(None),
            Some(w) if w.len() == 2 && w[0] < w[1] => Ok(Some((w[0], w[1]))),
            Some(_) => Err(CliError::key(key, format!("key `{key}`: expected [lo, hi] with lo < hi"))),
        }
    }

    fn require<T>(&self, key: &str, v: Option<T>, command: Command) -> Result<T, CliError> {
        let name = Command::NAMES[command as usize];
        v.ok_or_else(|| CliError::key(key, format!("missing key `{key}` (required by {name})")))
    }

    fn resolve(self) -> Result<RunConfig, CliError> {
        let name = self
            .string("command")?
            .ok_or_else(|| CliError::key("command", format!("missing key `command` (one of {})", Command::NAMES.join(", "))))?;
        let command = Command::parse(name).ok_or_else(|| {
            CliError::key("command", format!("key `command`: unknown command '{name}' (one of {})", Command::NAMES.join(", ")))
        })?;

        let mut l = self.int("L")?;
        if let Some(v) = l {
            if v < 4 || v % 2 != 0 {
                return Err(CliError::key("L", format!("key `L`: L even and ≥ 4 required (got {v})")));
            }
        }
        let mut h = self.float("h")?;
        if let Some(v) = h {
            if !v.is_finite() {
                return Err(CliError::key("h", "key `h`: h must be finite"));
            }
        }
        let mut gamma = self.float("gamma")?;
        if let Some(v) = gamma {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(CliError::key("gamma", format!("key `gamma`: gamma ≥ 0 required (got {v})")));
            }
        }
        if command.needs_model() {
            l = Some(self.require("L", l, command)?);
            h = Some(self.require("h", h, command)?);
            gamma = Some(self.require("gamma", gamma, command)?);
        }

        let seed = match self.int("seed")? {
            Some(v) if v < 0 => return Err(CliError::key("seed", format!("key `seed`: seed ≥ 0 required (got {v})"))),
            v => v.unwrap_or(0) as u64,
        };
        let format = match self.string("format")?.unwrap_or("csv") {
            "csv" => Format::Csv,
            "json" => Format::Json,
            other => return Err(CliError::key("format", format!("key `format`: expected csv or json (got '{other}')"))),
        };
        let out = self.string("out")?.map(PathBuf::from);
        let input = self.string("input")?.map(PathBuf::from);
        let threads = self.count("threads", 1)?;
        let anneal_restarts = self.count("anneal_restarts", 1)?.unwrap_or(8);
        let anneal_sweeps = self.count("anneal_sweeps", 1)?.unwrap_or(AnnealSchedule::default().sweeps_per_site);
        let anneal_cooling = self.float("anneal_cooling")?.unwrap_or(AnnealSchedule::default().cooling);
        if !(anneal_cooling > 0.0 && anneal_cooling < 1.0) {
            return Err(CliError::key(
                "anneal_cooling",
                format!("key `anneal_cooling`: 0 < anneal_cooling < 1 required (got {anneal_cooling})"),
            ));
        }
        let fit_window = self.window("fit_window")?;
        let decay_window = self.window("decay_window")?.unwrap_or(DEFAULT_DECAY_WINDOW);

        let ell = match (self.count("ell", 1)?, l) {
            (Some(e), Some(l)) if e as i64 >= l => {
                return Err(CliError::key("ell", format!("key `ell`: 1 ≤ ell ≤ L − 1 required (got {e} with L = {l})")))
            }
            (Some(e), _) => Some(e),
            (None, Some(l)) if command != Command::Fit => Some((l as usize / 4).max(1)),
            _ => None,
        };

        let (mut dt, mut tmax, mut sample_every, mut trajectories, mut stationary_fraction, mut observables) =
            (None, None, None, None, None, None);
        let mut state = None;
        if command.is_dynamic() || command == Command::Correlators {
            let (l, g) = (l.unwrap() as f64, gamma.unwrap());
            let src = match self.string("state")?.unwrap_or(if command == Command::Correlators { "noclick" } else { "trajectory" }) {
                "noclick" => StateSource::Noclick,
                "trajectory" => StateSource::Trajectory,
                other => {
                    return Err(CliError::key("state", format!("key `state`: expected noclick or trajectory (got '{other}')")))
                }
            };
            if command.is_dynamic() && src != StateSource::Trajectory {
                return Err(CliError::key("state", "key `state`: only `correlators` accepts state = \"noclick\""));
            }
            state = Some(src);
            if src == StateSource::Trajectory {
                let auto = if g > 0.0 { DEFAULT_DT.min(0.4 / (g * l)) } else { DEFAULT_DT };
                let step = self.float("dt")?.unwrap_or(auto);
                if !(step > 0.0) || !step.is_finite() {
                    return Err(CliError::key("dt", format!("key `dt`: dt > 0 required (got {step})")));
                }
                if step * g * l >= 0.5 {
                    return Err(CliError::key(
                        "dt",
                        format!("key `dt`: dt·gamma·L < 0.5 required (got {:.3}); reduce dt", step * g * l),
                    ));
                }
                let t = self.float("tmax")?.unwrap_or(10.0);
                if !(t >= 0.0) || !t.is_finite() {
                    return Err(CliError::key("tmax", format!("key `tmax`: tmax ≥ 0 required (got {t})")));
                }
                dt = Some(step);
                tmax = Some(t);
            }
        }
        if command.is_dynamic() {
            let (step, t) = (dt.unwrap(), tmax.unwrap());
            let every = self.float("sample_every")?.unwrap_or((t / 20.0).max(step));
            if !(every >= step) {
                return Err(CliError::key(
                    "sample_every",
                    format!("key `sample_every`: sample_every ≥ dt required (got {every} < {step})"),
                ));
            }
            sample_every = Some(every);
            let list = match self.array("observables")? {
                None => vec![ObservableSpec::Entropy, ObservableSpec::FqMax, ObservableSpec::Ctilde((mipt_core::correlators::Axis::X, mipt_core::correlators::Axis::X))],
                Some(a) => a
                    .iter()
                    .map(|v| match v {
                        Value::String(s) => ObservableSpec::parse(s).ok_or_else(|| {
                            CliError::key(
                                "observables",
                                format!("key `observables`: unknown observable '{s}' (entropy, fq_max, sigma_z, ctilde_<ab>)"),
                            )
                        }),
                        other => Err(mismatch("observables", "an array of strings", other)),
                    })
                    .collect::<Result<_, _>>()?,
            };
            if list.is_empty() {
                return Err(CliError::key("observables", "key `observables`: at least one observable is required"));
            }
            observables = Some(list);
        }
        if command == Command::Ensemble || command == Command::Fit {
            let f = self.float("stationary_fraction")?.unwrap_or(DEFAULT_STATIONARY_FRACTION);
            if !(f > 0.0 && f <= 1.0) {
                return Err(CliError::key(
                    "stationary_fraction",
                    format!("key `stationary_fraction`: 0 < stationary_fraction ≤ 1 required (got {f})"),
                ));
            }
            stationary_fraction = Some(f);
        }
        if command == Command::Ensemble {
            trajectories = Some(self.count("trajectories", 1)?.unwrap_or(20));
        }

        let (mut sizes, mut h_values, mut gamma_values, mut gamma_relative) = (None, None, None, None);
        if command == Command::NoclickScan {
            let list = match self.array("sizes")? {
                None => default_sizes(),
                Some(a) => a
                    .iter()
                    .map(|v| match v {
                        Value::Integer(i) if *i >= 4 && i % 2 == 0 => Ok(*i as usize),
                        Value::Integer(i) => Err(CliError::key("sizes", format!("key `sizes`: every L even and ≥ 4 required (got {i})"))),
                        other => Err(mismatch("sizes", "an array of integers", other)),
                    })
                    .collect::<Result<_, _>>()?,
            };
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(CliError::key("sizes", "key `sizes`: sizes must be strictly ascending"));
            }
            sizes = Some(list);
            let hv = match (self.floats("h_values")?, h) {
                (Some(v), _) => v,
                (None, Some(h)) => vec![h],
                (None, None) => return Err(CliError::key("h_values", "missing key `h_values` (or `h`) for noclick-scan")),
            };
            let gv = match (self.floats("gamma_values")?, gamma) {
                (Some(v), _) => v,
                (None, Some(g)) => vec![g],
                (None, None) => {
                    return Err(CliError::key("gamma_values", "missing key `gamma_values` (or `gamma`) for noclick-scan"))
                }
            };
            if let Some(bad) = gv.iter().find(|g| !(**g >= 0.0)) {
                return Err(CliError::key("gamma_values", format!("key `gamma_values`: gamma ≥ 0 required (got {bad})")));
            }
            h_values = Some(hv);
            gamma_values = Some(gv);
            gamma_relative = Some(self.boolean("gamma_relative")?.unwrap_or(false));
        }
        let tensor = if command == Command::Correlators { Some(self.boolean("tensor")?.unwrap_or(false)) } else { None };
        if command == Command::Fit && input.is_none() {
            return Err(CliError::key("input", "missing key `input` (required by fit)"));
        }

        Ok(RunConfig {
            command,
            l: l.map(|v| v as usize),
            h,
            gamma,
            dt,
            tmax,
            sample_every,
            trajectories,
            seed,
            out,
            format,
            threads,
            ell,
            anneal_restarts,
            anneal_sweeps,
            anneal_cooling,
            sizes,
            h_values,
            gamma_values,
            gamma_relative,
            fit_window,
            decay_window,
            stationary_fraction,
            observables,
            state,
            tensor,
            input,
        })
    }
}
