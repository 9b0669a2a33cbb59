//! Robustness-guided falsification of toy plant models.
//!
//! The loop samples a vector of control points, turns it into a
//! piecewise-constant input, simulates the model, and scores the output by
//! the positive robustness of the specification. A score of zero or less is a
//! counterexample. [`run_experiment`] pits a plain specification against its
//! refined variant on identical seeds.

mod experiment;
mod model;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

pub use experiment::{
    run_experiment, ExperimentConfig, ExperimentReport, Problem, ProblemReport, TrialRecord, VariantSummary,
};
pub use model::{EngineLag, EngineParams, GearAutomaton, GearParams, Model, ModelSpec, TOY_MODELS_JSON};

use crate::error::{Error, Result};
use crate::ext::ExtendedReal;
use crate::formula::Formula;
use crate::robustness::evaluate;
use crate::signal::FpcSignal;
use crate::trace::Trace;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputChannel {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub control_points: usize,
}

/// Input parameterization: each channel holds `control_points` values on a
/// uniform grid over `[0, horizon)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputSpec {
    pub channels: Vec<InputChannel>,
    pub horizon: f64,
}

impl InputSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::Config("input horizon must be positive".into()));
        }
        if self.channels.is_empty() {
            return Err(Error::Config("input spec has no channels".into()));
        }
        for c in &self.channels {
            if !(c.lo < c.hi) || !c.lo.is_finite() || !c.hi.is_finite() {
                return Err(Error::Config(format!("channel `{}` needs lo < hi", c.name)));
            }
            if c.control_points == 0 {
                return Err(Error::Config(format!("channel `{}` needs a control point", c.name)));
            }
        }
        Ok(())
    }

    /// Length of the search vector.
    pub fn dimension(&self) -> usize {
        self.channels.iter().map(|c| c.control_points).sum()
    }

    fn bounds(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.channels
            .iter()
            .flat_map(|c| std::iter::repeat_n((c.lo, c.hi), c.control_points))
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.bounds().map(|(lo, hi)| rng.random_range(lo..=hi)).collect()
    }

    /// The input trace for a search vector.
    pub fn build(&self, x: &[f64]) -> Result<Trace> {
        if x.len() != self.dimension() {
            return Err(Error::Config(format!(
                "expected {} control values, got {}",
                self.dimension(),
                x.len()
            )));
        }
        let mut channels = Vec::with_capacity(self.channels.len());
        let mut rest = x;
        for c in &self.channels {
            let (vals, tail) = rest.split_at(c.control_points);
            rest = tail;
            let dt = self.horizon / c.control_points as f64;
            let steps: Vec<(f64, f64)> = vals.iter().enumerate().map(|(i, &v)| (i as f64 * dt, v)).collect();
            channels.push((c.name.clone(), FpcSignal::new(steps)?));
        }
        Trace::from_channels(channels, self.horizon)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum OptimizerKind {
    /// Independent uniform resampling.
    Random,
    /// Simulated annealing on positive robustness.
    Anneal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnealConfig {
    pub initial_temperature: f64,
    /// Temperature multiplier per iteration.
    pub cooling_rate: f64,
    /// Proposal standard deviation as a fraction of each coordinate's range.
    pub proposal_stddev: f64,
    /// Restart from a fresh random point after this many iterations without a new best.
    pub restart_after: usize,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        AnnealConfig {
            initial_temperature: 0.1,
            cooling_rate: 0.99,
            proposal_stddev: 0.1,
            restart_after: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub max_iterations: usize,
    pub seed: u64,
    pub anneal: AnnealConfig,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            kind: OptimizerKind::Anneal,
            max_iterations: 1000,
            seed: 0,
            anneal: AnnealConfig::default(),
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        let a = &self.anneal;
        if !(a.cooling_rate > 0.0 && a.cooling_rate < 1.0) {
            return Err(Error::Config("cooling_rate must lie in (0, 1)".into()));
        }
        if !(a.initial_temperature > 0.0) || !(a.proposal_stddev > 0.0) || a.restart_after == 0 {
            return Err(Error::Config(
                "anneal temperature, proposal stddev and restart period must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct FalsifyResult {
    pub success: bool,
    /// Input achieving the lowest robustness seen; the counterexample when `success`.
    pub falsifying_input: Option<Trace>,
    pub iterations_used: usize,
    /// Positive robustness of every evaluated candidate, in order.
    pub robustness_history: Vec<ExtendedReal>,
    pub wall_time: f64,
}

impl FalsifyResult {
    /// Running minimum of the history.
    pub fn best_so_far(&self) -> Vec<ExtendedReal> {
        let mut best = ExtendedReal::POS_INF;
        self.robustness_history
            .iter()
            .map(|&r| {
                best = best.min(r);
                best
            })
            .collect()
    }

    pub fn best(&self) -> Option<ExtendedReal> {
        self.robustness_history.iter().copied().min()
    }
}

/// Positive robustness of `spec` on the model's response to input `x`.
pub fn score(model: &dyn Model, spec: &Formula, input: &InputSpec, x: &[f64]) -> Result<(ExtendedReal, Trace)> {
    let trace = input.build(x)?;
    let out = model.simulate(&trace, input.horizon)?;
    Ok((evaluate(&out, spec)?.pos, trace))
}

/// Searches for an input whose simulated output has positive robustness `<= 0`.
pub fn falsification_loop(
    model: &dyn Model,
    spec: &Formula,
    input: &InputSpec,
    opt: &OptimizerConfig,
) -> Result<FalsifyResult> {
    input.validate()?;
    opt.validate()?;
    if spec.averaged_depth() > 1 {
        return Err(Error::Unsupported("averaged operators may not be nested".into()));
    }
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(opt.seed);
    let ranges: Vec<(f64, f64)> = input.bounds().collect();
    let a = &opt.anneal;

    let mut history = Vec::with_capacity(opt.max_iterations);
    let mut x = input.sample(&mut rng);
    let (mut energy, trace) = score(model, spec, input, &x)?;
    history.push(energy);
    let (mut best, mut best_input) = (energy, trace);
    let mut temperature = a.initial_temperature;
    let mut stale = 0usize;

    while best.value() > 0.0 && history.len() < opt.max_iterations {
        let candidate = match opt.kind {
            OptimizerKind::Random => input.sample(&mut rng),
            OptimizerKind::Anneal if stale >= a.restart_after => {
                stale = 0;
                temperature = a.initial_temperature;
                energy = ExtendedReal::POS_INF;
                input.sample(&mut rng)
            }
            OptimizerKind::Anneal => propose(&x, &ranges, a.proposal_stddev, &mut rng),
        };
        let (e, t) = score(model, spec, input, &candidate)?;
        history.push(e);
        if e < best {
            best = e;
            best_input = t;
            stale = 0;
        } else {
            stale += 1;
        }
        if metropolis(energy.value(), e.value(), temperature, &mut rng) {
            x = candidate;
            energy = e;
        }
        temperature *= a.cooling_rate;
    }
    Ok(FalsifyResult {
        success: best.value() <= 0.0,
        falsifying_input: Some(best_input),
        iterations_used: history.len(),
        robustness_history: history,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

fn propose<R: Rng>(x: &[f64], ranges: &[(f64, f64)], frac: f64, rng: &mut R) -> Vec<f64> {
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    x.iter()
        .zip(ranges)
        .map(|(&v, &(lo, hi))| (v + unit.sample(rng) * frac * (hi - lo)).clamp(lo, hi))
        .collect()
}

fn metropolis<R: Rng>(current: f64, proposed: f64, temperature: f64, rng: &mut R) -> bool {
    if proposed <= current {
        return true;
    }
    let p = (-(proposed - current) / temperature).exp();
    rng.random_bool(p.clamp(0.0, 1.0))
}
