use std::cell::OnceCell;
use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::jumps::{apply_jump, jump_probabilities, select_jump};
use super::{initial_product_state, CorrelationState, Rk5Integrator};
use crate::correlators::{
    correlation_tensor_for, ctilde_profile, MajoranaBlocks, Pair, SpinCorrelationTensor, NONZERO_PAIRS,
};
use crate::entanglement::{entanglement_entropy, EntropyRequest};
use crate::qfi::{maximize_qfi, AnnealSchedule};
use crate::rng::{child_seed, stream_rng};
use crate::{par, Error, ModelParams, Result};

/// Schema tag written into every serialised record.
pub const TRAJECTORY_SCHEMA: &str = "mipt.trajectory.v1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryConfig {
    pub params: ModelParams,
    pub dt: f64,
    pub t_max: f64,
    pub sample_every: f64,
    pub seed: u64,
}

impl TrajectoryConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Parameter(format!("dt must be > 0 (got {})", self.dt)));
        }
        if !(self.t_max >= 0.0) || !self.t_max.is_finite() {
            return Err(Error::Parameter(format!("tmax must be >= 0 (got {})", self.t_max)));
        }
        if !(self.sample_every >= self.dt) {
            return Err(Error::Parameter(format!(
                "sample_every must be >= dt (got {} < {})",
                self.sample_every, self.dt
            )));
        }
        let load = self.dt * self.params.gamma * self.params.l as f64;
        if load >= 0.5 {
            return Err(Error::Config(format!(
                "dt·gamma·L = {load:.3} must stay below 0.5; reduce dt"
            )));
        }
        Ok(())
    }

    pub fn steps(&self) -> u64 {
        (self.t_max / self.dt).round() as u64
    }

    pub fn sample_stride(&self) -> u64 {
        ((self.sample_every / self.dt).round() as u64).max(1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpEvent {
    pub time: f64,
    pub site: usize,
}

/// A sampled observable value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Observed {
    Scalar(f64),
    Series(Vec<f64>),
}

impl Observed {
    pub fn scalar(&self) -> Result<f64> {
        match self {
            Observed::Scalar(v) => Ok(*v),
            Observed::Series(_) => Err(Error::Contract("expected a scalar observable".into())),
        }
    }

    pub fn series(&self) -> Result<&[f64]> {
        match self {
            Observed::Series(v) => Ok(v),
            Observed::Scalar(_) => Err(Error::Contract("expected a series observable".into())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub schema: String,
    pub params: ModelParams,
    pub seed: u64,
    pub dt: f64,
    pub t_max: f64,
    pub sample_every: f64,
    pub sample_times: Vec<f64>,
    pub observables: BTreeMap<String, Vec<Observed>>,
    pub jumps: Vec<JumpEvent>,
    /// `Σ_steps P`, the expected number of jumps along the realised path.
    pub expected_jumps: f64,
}

/// Read-only view of the state at a sample time; derived quantities are
/// computed on first use and shared between observers.
pub struct SampleContext<'a> {
    pub state: &'a CorrelationState,
    pub params: &'a ModelParams,
    pub sample_index: usize,
    blocks: OnceCell<MajoranaBlocks>,
    tensor: OnceCell<SpinCorrelationTensor>,
}

impl<'a> SampleContext<'a> {
    pub fn new(state: &'a CorrelationState, params: &'a ModelParams, sample_index: usize) -> Self {
        SampleContext {
            state,
            params,
            sample_index,
            blocks: OnceCell::new(),
            tensor: OnceCell::new(),
        }
    }

    pub fn blocks(&self) -> &MajoranaBlocks {
        self.blocks.get_or_init(|| MajoranaBlocks::from_state(self.state))
    }

    /// The full correlation tensor.
    pub fn tensor(&self) -> Result<&SpinCorrelationTensor> {
        if let Some(t) = self.tensor.get() {
            return Ok(t);
        }
        let t = correlation_tensor_for(self.blocks(), &NONZERO_PAIRS)?;
        Ok(self.tensor.get_or_init(|| t))
    }
}

/// Callback invoked at every sample time. Instances are trajectory-local.
pub trait Observer {
    fn name(&self) -> String;
    fn observe(&mut self, ctx: &SampleContext<'_>) -> Result<Observed>;
}

/// Entanglement entropy of a block (nats).
#[derive(Clone, Debug)]
pub struct EntropyObserver {
    pub request: EntropyRequest,
}

impl Observer for EntropyObserver {
    fn name(&self) -> String {
        "entropy".into()
    }

    fn observe(&mut self, ctx: &SampleContext<'_>) -> Result<Observed> {
        entanglement_entropy(ctx.blocks(), self.request).map(Observed::Scalar)
    }
}

/// `f_Q^max = F_Q^max / L`, re-optimised at every sample.
#[derive(Clone, Debug)]
pub struct QfiObserver {
    pub schedule: AnnealSchedule,
    pub restarts: usize,
    pub seed: u64,
}

impl Observer for QfiObserver {
    fn name(&self) -> String {
        "fq_max".into()
    }

    fn observe(&mut self, ctx: &SampleContext<'_>) -> Result<Observed> {
        let seed = child_seed(self.seed, ctx.sample_index as u64);
        let r = maximize_qfi(ctx.tensor()?, &self.schedule, self.restarts, seed)?;
        Ok(Observed::Scalar(r.fq_density))
    }
}

/// `C̃^{αβ}_ℓ` for `ℓ = 1 … L/2`. Only the requested block is evaluated
/// unless the full tensor is already available.
#[derive(Clone, Debug)]
pub struct CtildeObserver {
    pub pair: Pair,
}

impl Observer for CtildeObserver {
    fn name(&self) -> String {
        format!("ctilde_{}{}", self.pair.0, self.pair.1)
    }

    fn observe(&mut self, ctx: &SampleContext<'_>) -> Result<Observed> {
        let profile = match ctx.tensor.get() {
            Some(t) => ctilde_profile(t, self.pair)?,
            None => ctilde_profile(&correlation_tensor_for(ctx.blocks(), &[self.pair])?, self.pair)?,
        };
        Ok(Observed::Series(profile))
    }
}

/// `⟨σᶻ_j⟩` for every site.
#[derive(Clone, Debug, Default)]
pub struct SigmaZObserver;

impl Observer for SigmaZObserver {
    fn name(&self) -> String {
        "sigma_z".into()
    }

    fn observe(&mut self, ctx: &SampleContext<'_>) -> Result<Observed> {
        Ok(Observed::Series(ctx.state.sigma_z()))
    }
}

/// Step-by-step driver of one trajectory. Each step is an RK5 drift step
/// followed by at most one jump decided by a single uniform number.
pub struct TrajectoryStepper {
    params: ModelParams,
    dt: f64,
    integrator: Rk5Integrator,
    state: CorrelationState,
    step: u64,
    expected_jumps: f64,
}

impl TrajectoryStepper {
    pub fn new(params: ModelParams, dt: f64) -> Result<Self> {
        params.validate()?;
        Ok(TrajectoryStepper {
            integrator: Rk5Integrator::new(&params),
            state: initial_product_state(params.l)?,
            params,
            dt,
            step: 0,
            expected_jumps: 0.0,
        })
    }

    pub fn state(&self) -> &CorrelationState {
        &self.state
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    pub fn expected_jumps(&self) -> f64 {
        self.expected_jumps
    }

    /// Advances one step with the given uniform draw `r ∈ [0, 1]`; returns
    /// the jump site, if any.
    pub fn advance(&mut self, r: f64) -> Result<Option<usize>> {
        let wrap = |step: u64, time: f64, e: Error| Error::Trajectory {
            time,
            step,
            source: Box::new(e),
        };
        let (step, time) = (self.step, self.state.time);
        self.integrator
            .step(&mut self.state, self.dt)
            .map_err(|e| wrap(step, time, e))?;
        let probs = jump_probabilities(&self.state, self.params.gamma, self.dt)
            .map_err(|e| wrap(step, time, e))?;
        self.expected_jumps += probs.total;
        let site = select_jump(&probs, r).map_err(|e| wrap(step, time, e))?;
        if let Some(j) = site {
            apply_jump(&mut self.state, j).map_err(|e| wrap(step, time, e))?;
        }
        self.step += 1;
        Ok(site)
    }
}

/// Runs one trajectory from the all-up state, sampling the observers at
/// `t = 0` and every `sample_every`. Bit-reproducible for a given config.
pub fn evolve_trajectory(
    config: &TrajectoryConfig,
    observers: &mut [Box<dyn Observer + Send>],
) -> Result<TrajectoryRecord> {
    config.validate()?;
    let mut rng = stream_rng(config.seed, 0);
    let mut stepper = TrajectoryStepper::new(config.params, config.dt)?;
    let mut record = TrajectoryRecord {
        schema: TRAJECTORY_SCHEMA.into(),
        params: config.params,
        seed: config.seed,
        dt: config.dt,
        t_max: config.t_max,
        sample_every: config.sample_every,
        sample_times: Vec::new(),
        observables: observers.iter().map(|o| (o.name(), Vec::new())).collect(),
        jumps: Vec::new(),
        expected_jumps: 0.0,
    };
    if record.observables.len() != observers.len() {
        return Err(Error::Parameter("observer names must be unique".into()));
    }
    let stride = config.sample_stride();
    let steps = config.steps();
    let mut sample = |stepper: &TrajectoryStepper, record: &mut TrajectoryRecord| -> Result<()> {
        let index = record.sample_times.len();
        let ctx = SampleContext::new(stepper.state(), &config.params, index);
        for obs in observers.iter_mut() {
            let value = obs.observe(&ctx).map_err(|e| Error::Trajectory {
                time: stepper.state().time,
                step: stepper.steps_taken(),
                source: Box::new(e.context(format!("observer {}", obs.name()))),
            })?;
            record.observables.get_mut(&obs.name()).unwrap().push(value);
        }
        record.sample_times.push(stepper.state().time);
        Ok(())
    };
    sample(&stepper, &mut record)?;
    for step in 1..=steps {
        let r: f64 = rng.random();
        if let Some(site) = stepper.advance(r)? {
            record.jumps.push(JumpEvent { time: stepper.state().time, site });
        }
        if step % stride == 0 {
            sample(&stepper, &mut record)?;
        }
    }
    record.expected_jumps = stepper.expected_jumps();
    Ok(record)
}

/// Runs `trajectories` independent trajectories; trajectory `i` uses the
/// seed `child_seed(config.seed, i)` and observers built by `observers(i)`.
pub fn run_ensemble<F>(config: &TrajectoryConfig, trajectories: usize, observers: F) -> Result<Vec<TrajectoryRecord>>
where
    F: Fn(usize) -> Vec<Box<dyn Observer + Send>> + Sync,
{
    config.validate()?;
    let results = par::map_collect((0..trajectories).collect(), |i| {
        let mut c = config.clone();
        c.seed = child_seed(config.seed, i as u64);
        evolve_trajectory(&c, &mut observers(i)).map_err(|e| e.context(format!("trajectory {i}")))
    });
    results.into_iter().collect()
}
