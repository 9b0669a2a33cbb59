//! Built-in toy plants standing in for a closed-loop simulator.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::signal::FpcSignal;
use crate::trace::Trace;

/// Default constants, versioned with the crate so experiment reports are reproducible.
pub const TOY_MODELS_JSON: &str = include_str!("../../config/toy_models.json");

/// A deterministic map from an input trace to an output trace.
pub trait Model: Send + Sync {
    fn name(&self) -> &str;

    /// Input channels the model reads.
    fn inputs(&self) -> Vec<String>;

    /// Output trace covering at least `[0, horizon]`.
    fn simulate(&self, input: &Trace, horizon: f64) -> Result<Trace>;
}

/// Model selection as it appears in configuration files: a name plus
/// optional overrides of the default constants.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Value>,
}

impl ModelSpec {
    pub fn new(name: impl Into<String>) -> Self {
        ModelSpec { name: name.into(), params: None }
    }

    pub fn build(&self) -> Result<Box<dyn Model>> {
        let defaults: Value = serde_json::from_str(TOY_MODELS_JSON)?;
        let mut params = defaults
            .get(&self.name)
            .cloned()
            .ok_or_else(|| Error::Config(format!("unknown model `{}`", self.name)))?;
        if let Some(over) = &self.params {
            let (Value::Object(base), Value::Object(over)) = (&mut params, over) else {
                return Err(Error::Config("model params must be a JSON object".into()));
            };
            for (k, v) in over {
                if !base.contains_key(k) {
                    return Err(Error::Config(format!("unknown parameter `{k}` for {}", self.name)));
                }
                base.insert(k.clone(), v.clone());
            }
        }
        match self.name.as_str() {
            "GEAR_AUTOMATON" => Ok(Box::new(GearAutomaton::new(serde_json::from_value(params)?)?)),
            "ENGINE_LAG" => Ok(Box::new(EngineLag::new(serde_json::from_value(params)?)?)),
            _ => unreachable!("defaults exist only for known models"),
        }
    }
}

fn input_channel<'a>(input: &'a Trace, name: &str) -> Result<&'a FpcSignal> {
    input
        .channel(name)
        .ok_or_else(|| Error::Simulation(format!("input trace lacks channel `{name}`")))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GearParams {
    pub input: String,
    /// Minimum time between two shifts.
    pub dwell: f64,
    /// Throttle above `up_thresholds[g-1]` shifts gear `g` up.
    pub up_thresholds: [f64; 3],
    /// Throttle below `down_thresholds[g-2]` shifts gear `g` down.
    pub down_thresholds: [f64; 3],
}

/// Four-gear shift logic driven by throttle. Starts in first gear and shifts
/// at most one gear per dwell period; emits `gear1`..`gear4` as +1/-1
/// indicator channels and `gear` as the gear number.
#[derive(Clone, Debug)]
pub struct GearAutomaton {
    params: GearParams,
}

impl GearAutomaton {
    pub fn new(params: GearParams) -> Result<Self> {
        if !(params.dwell > 0.0 && params.dwell.is_finite()) {
            return Err(Error::Config("dwell must be positive".into()));
        }
        Ok(GearAutomaton { params })
    }

    pub fn params(&self) -> &GearParams {
        &self.params
    }

    fn next_gear(&self, gear: usize, throttle: f64) -> usize {
        let p = &self.params;
        if gear < 4 && throttle > p.up_thresholds[gear - 1] {
            gear + 1
        } else if gear > 1 && throttle < p.down_thresholds[gear - 2] {
            gear - 1
        } else {
            gear
        }
    }
}

impl Model for GearAutomaton {
    fn name(&self) -> &str {
        "GEAR_AUTOMATON"
    }

    fn inputs(&self) -> Vec<String> {
        vec![self.params.input.clone()]
    }

    fn simulate(&self, input: &Trace, horizon: f64) -> Result<Trace> {
        let throttle = input_channel(input, &self.params.input)?.steps();
        let dwell = self.params.dwell;
        let mut gear = 1usize;
        let mut last_shift = 0.0;
        let mut changes = vec![(0.0, 1usize)];
        let mut t = 0.0;
        let mut k = 0;
        // Shifts can only happen when the throttle changes or a dwell period ends.
        while t <= horizon {
            while k + 1 < throttle.len() && throttle[k + 1].0 <= t {
                k += 1;
            }
            if t - last_shift >= dwell {
                let g = self.next_gear(gear, throttle[k].1);
                if g != gear {
                    gear = g;
                    last_shift = t;
                    changes.push((t, gear));
                }
            }
            let mut next = f64::INFINITY;
            if let Some(&(s, _)) = throttle.get(k + 1) {
                next = s;
            }
            if last_shift + dwell > t {
                next = next.min(last_shift + dwell);
            } else if next.is_infinite() {
                break;
            }
            t = next;
        }
        let mut channels = Vec::with_capacity(5);
        for g in 1..=4 {
            let steps = changes
                .iter()
                .map(|&(t, cur)| (t, if cur == g { 1.0 } else { -1.0 }))
                .collect();
            channels.push((format!("gear{g}"), canonical(steps)?));
        }
        channels.push(("gear".into(), canonical(changes.iter().map(|&(t, g)| (t, g as f64)).collect())?));
        Trace::from_channels(channels, horizon)
    }
}

/// Drops steps that repeat the previous value.
fn canonical(steps: Vec<(f64, f64)>) -> Result<FpcSignal> {
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(steps.len());
    for s in steps {
        if out.last().is_none_or(|l| l.1 != s.1) {
            out.push(s);
        }
    }
    FpcSignal::new(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineParams {
    pub input: String,
    /// Steady-state speed per unit throttle.
    pub gain: f64,
    pub time_constant: f64,
    /// Vehicle speed per unit engine speed before the gear ratio.
    pub speed_factor: f64,
    pub gear_ratio: f64,
    /// Integration step.
    pub step: f64,
}

/// First-order engine lag `w' = (K * throttle - w) / tau`, integrated with
/// fixed-step RK4. Emits `omega` and `speed = c * omega / ratio` sampled once per step.
#[derive(Clone, Debug)]
pub struct EngineLag {
    params: EngineParams,
}

impl EngineLag {
    pub fn new(params: EngineParams) -> Result<Self> {
        let p = &params;
        if !(p.time_constant > 0.0 && p.step > 0.0 && p.gear_ratio != 0.0) {
            return Err(Error::Config(
                "engine lag needs positive time constant and step, nonzero gear ratio".into(),
            ));
        }
        Ok(EngineLag { params })
    }

    pub fn params(&self) -> &EngineParams {
        &self.params
    }
}

impl Model for EngineLag {
    fn name(&self) -> &str {
        "ENGINE_LAG"
    }

    fn inputs(&self) -> Vec<String> {
        vec![self.params.input.clone()]
    }

    fn simulate(&self, input: &Trace, horizon: f64) -> Result<Trace> {
        let p = &self.params;
        let u = input_channel(input, &p.input)?;
        let at = |t: f64| u.value_at(t).map(|v| v.value());
        let f = |w: f64, th: f64| (p.gain * th - w) / p.time_constant;
        let n = (horizon / p.step).ceil().max(1.0) as usize;
        let mut omega = Vec::with_capacity(n + 1);
        let mut speed = Vec::with_capacity(n + 1);
        let mut w = 0.0;
        for i in 0..=n {
            let t = i as f64 * p.step;
            omega.push((t, w));
            speed.push((t, p.speed_factor * w / p.gear_ratio));
            if i == n {
                break;
            }
            let h = p.step;
            let (u0, um, u1) = (at(t)?, at(t + h / 2.0)?, at(t + h)?);
            let k1 = f(w, u0);
            let k2 = f(w + h / 2.0 * k1, um);
            let k3 = f(w + h / 2.0 * k2, um);
            let k4 = f(w + h * k3, u1);
            w += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if !w.is_finite() {
                return Err(Error::Simulation(format!("engine speed diverged at t = {t}")));
            }
        }
        Trace::from_channels(
            vec![
                ("omega".into(), canonical(omega)?),
                ("speed".into(), canonical(speed)?),
            ],
            horizon,
        )
    }
}
