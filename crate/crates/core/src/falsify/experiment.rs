//! Paired plain-versus-refined falsification runs and their report.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::ModelSpec;
use super::{falsification_loop, FalsifyResult, InputSpec, OptimizerConfig};
use crate::error::{Error, Result};
use crate::ext::ExtendedReal;
use crate::formula::{parse, Formula};
use crate::robustness::evaluate;

/// One falsification problem: a model, its input space and two specifications.
///
/// `{T}` in either formula text is replaced by the `T` parameter.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Problem {
    pub name: String,
    pub model: ModelSpec,
    pub input: InputSpec,
    pub plain: String,
    pub refined: String,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
}

impl Problem {
    fn formula(&self, text: &str) -> Result<Formula> {
        let text = match self.t {
            Some(t) => text.replace("{T}", &format!("{t}")),
            None => text.to_string(),
        };
        parse(&text)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub problems: Vec<Problem>,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    pub trials: usize,
    /// Per-trial seeds; derived from `seed` when absent.
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn trial_seeds(&self) -> Result<Vec<u64>> {
        match &self.seeds {
            Some(s) if s.len() < self.trials => Err(Error::Config(format!(
                "{} trials but only {} seeds",
                self.trials,
                s.len()
            ))),
            Some(s) => Ok(s[..self.trials].to_vec()),
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                Ok((0..self.trials).map(|_| rng.random()).collect())
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub success: bool,
    pub iterations: usize,
    pub best_robustness: ExtendedReal,
    pub wall_time: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VariantSummary {
    pub formula: String,
    pub successes: usize,
    pub trials: usize,
    pub mean_iterations: f64,
    /// Mean over successful trials only; absent when none succeeded.
    pub mean_iterations_successful: Option<f64>,
    pub mean_wall_time: f64,
    pub records: Vec<TrialRecord>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProblemReport {
    pub name: String,
    pub model: String,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    pub plain: VariantSummary,
    pub refined: VariantSummary,
    /// Refined-spec counterexamples that, re-simulated, also violate the plain spec.
    pub refined_reverified: usize,
    /// Counterexamples whose re-simulation did not reproduce `pos <= 0` for their own spec.
    pub unsound_successes: usize,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ExperimentReport {
    pub problems: Vec<ProblemReport>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Aligned text table with success counts, mean iterations and mean time.
    pub fn to_table(&self) -> String {
        let mut rows = vec![[
            "problem".to_string(),
            "spec".into(),
            "succ.".into(),
            "iter.".into(),
            "iter. (succ.)".into(),
            "time [s]".into(),
            "reverified".into(),
        ]];
        for p in &self.problems {
            for (label, v) in [("plain", &p.plain), ("refined", &p.refined)] {
                rows.push([
                    p.name.clone(),
                    label.into(),
                    format!("{}/{}", v.successes, v.trials),
                    format!("{:.1}", v.mean_iterations),
                    v.mean_iterations_successful.map_or("-".into(), |m| format!("{m:.1}")),
                    format!("{:.3}", v.mean_wall_time),
                    if label == "refined" {
                        format!("{}/{}", p.refined_reverified, v.successes)
                    } else {
                        "".into()
                    },
                ]);
            }
        }
        let mut widths = [0usize; 7];
        for r in &rows {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.len());
            }
        }
        let mut out = String::new();
        for r in &rows {
            let line: Vec<String> = r
                .iter()
                .zip(widths)
                .enumerate()
                .map(|(i, (c, w))| if i < 2 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                .collect();
            let _ = writeln!(out, "{}", line.join("  ").trim_end());
        }
        out
    }
}

/// Runs every problem with both specifications on the same per-trial seeds.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let seeds = cfg.trial_seeds()?;
    let mut report = ExperimentReport::default();
    if cfg.trials == 0 {
        return Ok(report);
    }
    for p in &cfg.problems {
        let model = p.model.build()?;
        let plain = p.formula(&p.plain)?;
        let refined = p.formula(&p.refined)?;
        let run = |spec: &Formula| -> Result<Vec<FalsifyResult>> {
            seeds
                .par_iter()
                .map(|&seed| {
                    let opt = OptimizerConfig { seed, ..cfg.optimizer.clone() };
                    falsification_loop(model.as_ref(), spec, &p.input, &opt)
                })
                .collect()
        };
        let plain_runs = run(&plain)?;
        let refined_runs = run(&refined)?;

        let mut unsound = 0;
        let mut reverified = 0;
        for (spec, runs) in [(&plain, &plain_runs), (&refined, &refined_runs)] {
            for r in runs.iter().filter(|r| r.success) {
                let input = r.falsifying_input.as_ref().expect("successful runs keep their input");
                let out = model.simulate(input, p.input.horizon)?;
                if evaluate(&out, spec)?.pos.value() > 0.0 {
                    unsound += 1;
                }
                if std::ptr::eq(spec, &refined) && evaluate(&out, &plain)?.pos.value() <= 0.0 {
                    reverified += 1;
                }
            }
        }
        report.problems.push(ProblemReport {
            name: p.name.clone(),
            model: p.model.name.clone(),
            t: p.t,
            plain: summarize(&plain, &seeds, &plain_runs),
            refined: summarize(&refined, &seeds, &refined_runs),
            refined_reverified: reverified,
            unsound_successes: unsound,
        });
    }
    Ok(report)
}

fn summarize(spec: &Formula, seeds: &[u64], runs: &[FalsifyResult]) -> VariantSummary {
    let n = runs.len().max(1) as f64;
    let wins: Vec<&FalsifyResult> = runs.iter().filter(|r| r.success).collect();
    VariantSummary {
        formula: spec.to_string(),
        successes: wins.len(),
        trials: runs.len(),
        mean_iterations: runs.iter().map(|r| r.iterations_used as f64).sum::<f64>() / n,
        mean_iterations_successful: (!wins.is_empty())
            .then(|| wins.iter().map(|r| r.iterations_used as f64).sum::<f64>() / wins.len() as f64),
        mean_wall_time: runs.iter().map(|r| r.wall_time).sum::<f64>() / n,
        records: seeds
            .iter()
            .zip(runs)
            .map(|(&seed, r)| TrialRecord {
                seed,
                success: r.success,
                iterations: r.iterations_used,
                best_robustness: r.best().unwrap_or(ExtendedReal::POS_INF),
                wall_time: r.wall_time,
            })
            .collect(),
    }
}
