//! Seeded random traces and formulas for property tests, oracle checks and benchmarks.
//!
//! Times, thresholds and interval endpoints are drawn from coarse binary
//! grids, so most arithmetic on them is exact and ties between events are
//! common.

use rand::Rng;

use crate::formula::{Formula, Interval, Relation};
use crate::trace::Trace;

#[derive(Clone, Debug)]
pub struct TraceGen {
    pub variables: Vec<String>,
    pub max_segments: usize,
    /// Gaps between samples are multiples of this.
    pub time_step: f64,
    /// Sample values are multiples of this within `[-value_bound, value_bound]`.
    pub value_step: f64,
    pub value_bound: f64,
}

impl Default for TraceGen {
    fn default() -> Self {
        TraceGen {
            variables: vec!["x".into(), "y".into()],
            max_segments: 50,
            time_step: 0.25,
            value_step: 0.5,
            value_bound: 5.0,
        }
    }
}

impl TraceGen {
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Trace {
        let n = rng.random_range(1..=self.max_segments.max(1));
        self.sample_with_len(rng, n)
    }

    /// A trace with exactly `n` sample rows.
    pub fn sample_with_len<R: Rng>(&self, rng: &mut R, n: usize) -> Trace {
        let mut times = Vec::with_capacity(n);
        let mut t = 0.0;
        for _ in 0..n.max(1) {
            times.push(t);
            t += self.time_step * rng.random_range(1..=4) as f64;
        }
        let steps = (self.value_bound / self.value_step).round() as i64;
        let columns: Vec<Vec<f64>> = self
            .variables
            .iter()
            .map(|_| {
                let mut last = 0.0;
                times
                    .iter()
                    .map(|_| {
                        // hold the previous value now and then so equal neighbours occur
                        if rng.random_bool(0.8) {
                            last = rng.random_range(-steps..=steps) as f64 * self.value_step;
                        }
                        last
                    })
                    .collect()
            })
            .collect();
        Trace::from_samples(&times, &self.variables, &columns).expect("generated trace is valid")
    }
}

#[derive(Clone, Debug)]
pub struct FormulaGen {
    pub variables: Vec<String>,
    pub max_depth: usize,
    pub allow_averaged: bool,
    /// Interval endpoints are multiples of this.
    pub time_step: f64,
    pub max_start_steps: u32,
    pub max_length_steps: u32,
    pub unbounded_prob: f64,
}

impl Default for FormulaGen {
    fn default() -> Self {
        FormulaGen {
            variables: vec!["x".into(), "y".into()],
            max_depth: 4,
            allow_averaged: true,
            time_step: 0.5,
            max_start_steps: 4,
            max_length_steps: 6,
            unbounded_prob: 0.1,
        }
    }
}

impl FormulaGen {
    /// A formula of depth at most `max_depth` without nested averaging.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Formula {
        self.node(rng, self.max_depth.max(1), self.allow_averaged, false)
    }

    /// An averaging-free formula.
    pub fn sample_plain<R: Rng>(&self, rng: &mut R) -> Formula {
        self.node(rng, self.max_depth.max(1), false, false)
    }

    /// An averaging-free formula without `true`/`false`, safe to place under an averaged operator.
    pub fn sample_averaged_operand<R: Rng>(&self, rng: &mut R) -> Formula {
        self.node(rng, self.max_depth.max(1), false, true)
    }

    /// Wraps `hole` in `layers` random positive-context constructors
    /// (`|`, `&`, `U`, `R` on either side) with averaging-free side formulas.
    /// Returns the formula and the path to the hole.
    pub fn positive_context<R: Rng>(&self, rng: &mut R, hole: Formula, layers: usize) -> (Formula, Vec<usize>) {
        let side = FormulaGen { max_depth: self.max_depth.saturating_sub(1).max(1), ..self.clone() };
        let mut f = hole;
        let mut path = Vec::with_capacity(layers);
        for _ in 0..layers {
            let other = side.sample_plain(rng);
            let left = rng.random_bool(0.5);
            let (l, r) = if left { (f, other) } else { (other, f) };
            f = match rng.random_range(0..4) {
                0 => Formula::or(l, r),
                1 => Formula::and(l, r),
                2 => Formula::until(self.interval(rng, true), l, r),
                _ => Formula::release(self.interval(rng, true), l, r),
            };
            path.insert(0, if left { 0 } else { 1 });
        }
        (f, path)
    }

    pub fn atom<R: Rng>(&self, rng: &mut R) -> Formula {
        let var = self.variables[rng.random_range(0..self.variables.len())].clone();
        let rel = [Relation::Lt, Relation::Le, Relation::Ge, Relation::Gt][rng.random_range(0..4)];
        let thr = rng.random_range(-8..=8) as f64 * 0.5;
        Formula::atom(var, rel, thr)
    }

    pub fn interval<R: Rng>(&self, rng: &mut R, bounded: bool) -> Interval {
        let lo = rng.random_range(0..=self.max_start_steps) as f64 * self.time_step;
        if !bounded || !rng.random_bool(self.unbounded_prob) {
            let len = rng.random_range(1..=self.max_length_steps.max(1)) as f64 * self.time_step;
            Interval::bounded(lo, lo + len).expect("positive length")
        } else {
            Interval::unbounded(lo).expect("nonnegative start")
        }
    }

    fn node<R: Rng>(&self, rng: &mut R, depth: usize, averaged_ok: bool, under_avg: bool) -> Formula {
        if depth <= 1 || rng.random_bool(0.2) {
            // poles inside an averaged window have no defined average
            if !under_avg && rng.random_bool(0.05) {
                return if rng.random_bool(0.5) { Formula::True } else { Formula::False };
            }
            return self.atom(rng);
        }
        let d = depth - 1;
        let kinds = if averaged_ok { 12 } else { 8 };
        let sub = |rng: &mut R, avg_ok: bool, under: bool| self.node(rng, d, avg_ok, under);
        match rng.random_range(0..kinds) {
            0 => Formula::not(sub(rng, averaged_ok, under_avg)),
            1 => Formula::and(sub(rng, averaged_ok, under_avg), sub(rng, averaged_ok, under_avg)),
            2 => Formula::or(sub(rng, averaged_ok, under_avg), sub(rng, averaged_ok, under_avg)),
            3 => Formula::implies(sub(rng, averaged_ok, under_avg), sub(rng, averaged_ok, under_avg)),
            4 => Formula::eventually(self.interval(rng, true), sub(rng, averaged_ok, under_avg)),
            5 => Formula::always(self.interval(rng, true), sub(rng, averaged_ok, under_avg)),
            6 => Formula::until(
                self.interval(rng, true),
                sub(rng, averaged_ok, under_avg),
                sub(rng, averaged_ok, under_avg),
            ),
            7 => Formula::release(
                self.interval(rng, true),
                sub(rng, averaged_ok, under_avg),
                sub(rng, averaged_ok, under_avg),
            ),
            8 => Formula::avg_eventually(self.interval(rng, true), sub(rng, false, true)),
            9 => Formula::avg_always(self.interval(rng, true), sub(rng, false, true)),
            10 => Formula::avg_until(self.interval(rng, true), sub(rng, false, true), sub(rng, false, true)),
            _ => Formula::avg_release(self.interval(rng, true), sub(rng, false, true), sub(rng, false, true)),
        }
    }
}
