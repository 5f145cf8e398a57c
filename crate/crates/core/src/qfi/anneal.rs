use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{dot, DirectionField, QfiCoupling};
use crate::correlators::SpinCorrelationTensor;
use crate::rng::stream_rng;
use crate::{par, Error, Result};

/// Geometric-cooling Metropolis schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    /// Initial temperature; `None` calibrates it as the standard deviation
    /// of `calibration_moves` random-move energy changes.
    pub initial_temperature: Option<f64>,
    pub calibration_moves: usize,
    /// Temperature factor applied after every sweep.
    pub cooling: f64,
    /// Number of sweeps is `sweeps_per_site · L`; a sweep is `L` proposals.
    pub sweeps_per_site: usize,
    /// Probability of proposing a fresh uniform direction instead of a cone
    /// perturbation.
    pub uniform_fraction: f64,
    /// Half-opening angle of cone perturbations (rad).
    pub cone_angle: f64,
    /// Coordinate-ascent sweeps applied to each restart's final field.
    pub polish_sweeps: usize,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        AnnealSchedule {
            initial_temperature: None,
            calibration_moves: 200,
            cooling: 0.98,
            sweeps_per_site: 50,
            uniform_fraction: 0.5,
            cone_angle: 0.3,
            polish_sweeps: 50,
        }
    }
}

impl AnnealSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.cooling > 0.0 && self.cooling < 1.0) {
            return Err(Error::Parameter(format!(
                "cooling factor must lie in (0, 1) (got {})",
                self.cooling
            )));
        }
        if !(0.0..=1.0).contains(&self.uniform_fraction) {
            return Err(Error::Parameter("uniform_fraction must lie in [0, 1]".into()));
        }
        if let Some(t) = self.initial_temperature {
            if !(t > 0.0) {
                return Err(Error::Parameter("initial temperature must be > 0".into()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealDiagnostics {
    pub restarts: usize,
    pub best_restart: usize,
    /// Sweep at which the winning restart first reached its best energy.
    pub best_sweep: usize,
    pub accepted_fraction: f64,
    pub initial_temperature: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QfiResult {
    pub fq: f64,
    /// `F_Q / L`.
    pub fq_density: f64,
    pub directions: DirectionField,
    pub diagnostics: AnnealDiagnostics,
}

struct RestartOutcome {
    value: f64,
    dirs: Vec<[f64; 3]>,
    best_sweep: usize,
    accepted: u64,
    proposed: u64,
    t0: f64,
}

/// Running state: directions plus local fields `g = Q n`.
struct Field<'a> {
    q: &'a QfiCoupling,
    n: Vec<[f64; 3]>,
    g: Vec<[f64; 3]>,
    value: f64,
}

impl<'a> Field<'a> {
    fn new(q: &'a QfiCoupling, n: Vec<[f64; 3]>) -> Self {
        let mut f = Field { q, g: vec![[0.0; 3]; n.len()], n, value: 0.0 };
        f.refresh();
        f
    }

    fn refresh(&mut self) {
        let x: Vec<f64> = self.n.iter().flat_map(|v| v.iter().copied()).collect();
        let mut value = 0.0;
        for (a, &xa) in x.iter().enumerate() {
            let acc = dot(self.q.row(a), &x);
            self.g[a / 3][a % 3] = acc;
            value += acc * xa;
        }
        self.value = value;
    }

    /// `F(n with n_i → v) − F(n)`.
    fn delta(&self, i: usize, v: &[f64; 3]) -> f64 {
        let d = sub(v, &self.n[i]);
        let mut quad = 0.0;
        let mut lin = 0.0;
        for a in 0..3 {
            lin += d[a] * self.g[i][a];
            for b in 0..3 {
                quad += d[a] * self.q.entry(3 * i + a, 3 * i + b) * d[b];
            }
        }
        2.0 * lin + quad
    }

    fn set(&mut self, i: usize, v: [f64; 3], delta: f64) {
        let d = sub(&v, &self.n[i]);
        let (r0, r1, r2) = (self.q.row(3 * i), self.q.row(3 * i + 1), self.q.row(3 * i + 2));
        for (b, gb) in self.g.iter_mut().flat_map(|g| g.iter_mut()).enumerate() {
            *gb += r0[b] * d[0] + r1[b] * d[1] + r2[b] * d[2];
        }
        self.n[i] = v;
        self.value += delta;
    }

    /// Best unit vector for site `i` with the others frozen: the maximiser
    /// of `vᵀ Q_ii v + 2 vᵀ h` over the sphere, by shifted power iteration.
    fn site_optimum(&self, i: usize) -> [f64; 3] {
        let mut qii = [[0.0; 3]; 3];
        let mut shift = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                qii[a][b] = self.q.entry(3 * i + a, 3 * i + b);
                shift += qii[a][b].abs();
            }
        }
        let mut h = self.g[i];
        for a in 0..3 {
            for b in 0..3 {
                h[a] -= qii[a][b] * self.n[i][b];
            }
        }
        let mut v = self.n[i];
        for _ in 0..200 {
            let mut w = [0.0; 3];
            for a in 0..3 {
                w[a] = h[a] + shift * v[a];
                for b in 0..3 {
                    w[a] += qii[a][b] * v[b];
                }
            }
            let Some(w) = normalized(w) else { return v };
            let step = (0..3).map(|a| (w[a] - v[a]).abs()).fold(0.0, f64::max);
            v = w;
            if step < 1e-14 {
                break;
            }
        }
        v
    }
}

fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn normalized(v: [f64; 3]) -> Option<[f64; 3]> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    (n > 1e-300).then(|| [v[0] / n, v[1] / n, v[2] / n])
}

pub(crate) fn random_unit<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    let z: f64 = 2.0 * rng.random::<f64>() - 1.0;
    let phi = 2.0 * PI * rng.random::<f64>();
    let r = (1.0 - z * z).max(0.0).sqrt();
    [r * phi.cos(), r * phi.sin(), z]
}

/// Uniform point on the spherical cap of half-angle `max_angle` around `n`.
fn cone_move<R: Rng + ?Sized>(rng: &mut R, n: &[f64; 3], max_angle: f64) -> [f64; 3] {
    let cos_a = 1.0 - rng.random::<f64>() * (1.0 - max_angle.cos());
    let sin_a = (1.0 - cos_a * cos_a).max(0.0).sqrt();
    let phi = 2.0 * PI * rng.random::<f64>();
    let helper = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let e1 = normalized(cross(n, &helper)).unwrap_or([0.0, 0.0, 1.0]);
    let e2 = cross(n, &e1);
    let (s, c) = phi.sin_cos();
    let v = [
        cos_a * n[0] + sin_a * (c * e1[0] + s * e2[0]),
        cos_a * n[1] + sin_a * (c * e1[1] + s * e2[1]),
        cos_a * n[2] + sin_a * (c * e1[2] + s * e2[2]),
    ];
    normalized(v).unwrap_or(*n)
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn propose(rng: &mut ChaCha8Rng, n: &[f64; 3], schedule: &AnnealSchedule) -> [f64; 3] {
    if rng.random::<f64>() < schedule.uniform_fraction {
        random_unit(rng)
    } else {
        cone_move(rng, n, schedule.cone_angle)
    }
}

/// Coordinate ascent to a local maximum.
pub(crate) fn polish(q: &QfiCoupling, n: Vec<[f64; 3]>, sweeps: usize) -> (f64, Vec<[f64; 3]>) {
    let mut field = Field::new(q, n);
    for _ in 0..sweeps {
        let before = field.value;
        for i in 0..field.n.len() {
            let v = field.site_optimum(i);
            let d = field.delta(i, &v);
            if d > 0.0 {
                field.set(i, v, d);
            }
        }
        field.refresh();
        if field.value - before <= 1e-13 * field.value.abs().max(1.0) {
            break;
        }
    }
    (field.value, field.n)
}

fn run_restart(q: &QfiCoupling, schedule: &AnnealSchedule, seed: u64, restart: usize) -> RestartOutcome {
    let l = q.len();
    let mut rng = stream_rng(seed, restart as u64);
    let start: Vec<[f64; 3]> = (0..l).map(|_| random_unit(&mut rng)).collect();
    let mut field = Field::new(q, start);

    let t0 = schedule.initial_temperature.unwrap_or_else(|| {
        let deltas: Vec<f64> = (0..schedule.calibration_moves)
            .map(|_| {
                let i = rng.random_range(0..l);
                let v = propose(&mut rng, &field.n[i], schedule);
                field.delta(i, &v)
            })
            .collect();
        let k = deltas.len().max(1) as f64;
        let mean = deltas.iter().sum::<f64>() / k;
        let var = deltas.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / k;
        let sd = var.sqrt();
        if sd > 0.0 { sd } else { 1e-12 }
    });

    let mut temperature = t0;
    let mut best_value = field.value;
    let mut best_dirs = field.n.clone();
    let mut best_sweep = 0;
    let (mut accepted, mut proposed) = (0u64, 0u64);
    let sweeps = schedule.sweeps_per_site * l;
    for sweep in 0..sweeps {
        for _ in 0..l {
            let i = rng.random_range(0..l);
            let v = propose(&mut rng, &field.n[i], schedule);
            let d = field.delta(i, &v);
            proposed += 1;
            // energy change is −d
            if d >= 0.0 || rng.random::<f64>() < (d / temperature).exp() {
                field.set(i, v, d);
                accepted += 1;
            }
        }
        field.refresh();
        if field.value > best_value {
            best_value = field.value;
            best_dirs.clone_from(&field.n);
            best_sweep = sweep + 1;
        }
        temperature *= schedule.cooling;
    }

    let (value, dirs) = polish(q, best_dirs, schedule.polish_sweeps);
    RestartOutcome { value, dirs, best_sweep, accepted, proposed, t0 }
}

/// Best direction field over independent annealing restarts. The returned
/// value is attained by the returned field, so it is a lower bound on the
/// true maximum. Deterministic for a given seed.
pub fn maximize_qfi(
    tensor: &SpinCorrelationTensor,
    schedule: &AnnealSchedule,
    restarts: usize,
    seed: u64,
) -> Result<QfiResult> {
    schedule.validate()?;
    if restarts == 0 {
        return Err(Error::Parameter("at least one annealing restart is required".into()));
    }
    let l = tensor.len();
    let q = QfiCoupling::new(tensor);
    let outcomes = par::map_collect((0..restarts).collect(), |r| run_restart(&q, schedule, seed, r));
    let mut best = 0;
    for (r, o) in outcomes.iter().enumerate() {
        if o.value > outcomes[best].value {
            best = r;
        }
    }
    let accepted: u64 = outcomes.iter().map(|o| o.accepted).sum();
    let proposed: u64 = outcomes.iter().map(|o| o.proposed).sum();
    let win = &outcomes[best];
    let directions = DirectionField { n: win.dirs.clone() };
    let fq = q.value(&directions).max(0.0);
    Ok(QfiResult {
        fq,
        fq_density: fq / l as f64,
        directions,
        diagnostics: AnnealDiagnostics {
            restarts,
            best_restart: best,
            best_sweep: win.best_sweep,
            accepted_fraction: if proposed > 0 { accepted as f64 / proposed as f64 } else { 0.0 },
            initial_temperature: win.t0,
        },
    })
}
