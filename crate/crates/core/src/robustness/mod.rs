//! Positive and negative robustness signals by structural recursion.
//!
//! Each node yields a pair of signals: `pos >= 0` measures how strongly the
//! formula holds and `neg <= 0` how strongly it fails. Atoms clamp the
//! distance to the threshold, negation swaps and negates the channels, `&`/`|`
//! take pointwise min/max per channel, and temporal operators run their
//! window algorithms on each channel separately.
//!
//! ```
//! use avstl::formula::parse;
//! use avstl::robustness::evaluate;
//! use avstl::trace::Trace;
//!
//! let trace = Trace::from_csv_reader("time,v\n0,100\n".as_bytes()).unwrap();
//! let r = evaluate(&trace, &parse("F[0,10] v >= 80").unwrap()).unwrap();
//! assert_eq!((r.pos.value(), r.neg.value()), (20.0, 0.0));
//! ```

mod averaged;
mod until;
mod window;

use std::io::Write;

use serde::Serialize;

pub use averaged::{avg_eventually, avg_until, avg_until_interval};
pub use until::{bounded_until, future_sup, release_via_duality, untimed_until, until};
pub use window::{sliding_window, WindowMode};

use crate::error::{Error, Result};
use crate::ext::ExtendedReal;
use crate::formula::{Formula, Interval};
use crate::numfmt::fmt_g;
use crate::signal::{ClampMode, FplSignal};
use crate::trace::Trace;

/// Robustness at a single instant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RobustnessPair {
    pub pos: ExtendedReal,
    pub neg: ExtendedReal,
}

/// Robustness as functions of time.
#[derive(Clone, Debug, PartialEq)]
pub struct RobustnessSignal {
    pub pos: FplSignal,
    pub neg: FplSignal,
}

impl RobustnessSignal {
    pub fn at(&self, t: f64) -> Result<RobustnessPair> {
        Ok(RobustnessPair {
            pos: self.pos.value_at(t)?,
            neg: self.neg.value_at(t)?,
        })
    }

    /// CSV with columns `time,pos,pos_slope,neg,neg_slope`, one row per breakpoint
    /// of either channel; each row describes the pieces starting there.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut times: Vec<f64> = self.pos.breakpoints();
        times.extend(self.neg.breakpoints());
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        times.dedup();
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["time", "pos", "pos_slope", "neg", "neg_slope"])?;
        for t in times {
            let p = self.pos.segments()[self.pos.index_at(t)];
            let n = self.neg.segments()[self.neg.index_at(t)];
            w.write_record([
                fmt_g(t, 17),
                fmt_g(p.at(t), 17),
                fmt_g(p.slope, 17),
                fmt_g(n.at(t), 17),
                fmt_g(n.slope, 17),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    fn swap_negate(self) -> Self {
        RobustnessSignal {
            pos: self.neg.negate(),
            neg: self.pos.negate(),
        }
    }
}

/// Robustness of `f` over `trace` at time 0.
pub fn evaluate(trace: &Trace, f: &Formula) -> Result<RobustnessPair> {
    robust_signal(trace, f)?.at(0.0)
}

/// Robustness signals of `f` over `trace`.
pub fn robust_signal(trace: &Trace, f: &Formula) -> Result<RobustnessSignal> {
    check_formula(trace, f)?;
    eval(trace, f)
}

/// Rejects nested averaging and variables the trace lacks.
pub fn check_formula(trace: &Trace, f: &Formula) -> Result<()> {
    if f.averaged_depth() > 1 {
        return Err(Error::Unsupported("averaged operators may not be nested".into()));
    }
    for v in f.variables() {
        if trace.channel(&v).is_none() {
            return Err(Error::UnknownVariable(v));
        }
    }
    Ok(())
}

fn eval(trace: &Trace, f: &Formula) -> Result<RobustnessSignal> {
    use Formula::*;
    let both = |pos: FplSignal, neg: FplSignal| Ok(RobustnessSignal { pos, neg });
    match f {
        True => both(FplSignal::constant(f64::INFINITY), FplSignal::constant(0.0)),
        False => both(FplSignal::constant(0.0), FplSignal::constant(f64::NEG_INFINITY)),
        Atom(a) => {
            let x = trace
                .channel(&a.variable)
                .ok_or_else(|| Error::UnknownVariable(a.variable.clone()))?
                .to_fpl();
            let d = if a.relation.is_upper_bound() {
                x.negate().offset(a.threshold)
            } else {
                x.offset(-a.threshold)
            };
            both(d.clamp(ClampMode::NonNegative), d.clamp(ClampMode::NonPositive))
        }
        Not(g) => Ok(eval(trace, g)?.swap_negate()),
        And(l, r) => {
            let (x, y) = (eval(trace, l)?, eval(trace, r)?);
            both(x.pos.min(&y.pos), x.neg.min(&y.neg))
        }
        Or(l, r) => {
            let (x, y) = (eval(trace, l)?, eval(trace, r)?);
            both(x.pos.max(&y.pos), x.neg.max(&y.neg))
        }
        Implies(l, r) => {
            let (x, y) = (eval(trace, l)?.swap_negate(), eval(trace, r)?);
            both(x.pos.max(&y.pos), x.neg.max(&y.neg))
        }
        Eventually(i, g) => per_channel(eval(trace, g)?, |s| eventually(s, *i)),
        Always(i, g) => per_channel(eval(trace, g)?, |s| Ok(eventually(&s.negate(), *i)?.negate())),
        AvgEventually(i, g) => per_channel(eval(trace, g)?, |s| avg_eventually_interval(s, *i)),
        AvgAlways(i, g) => per_channel(eval(trace, g)?, |s| {
            Ok(avg_eventually_interval(&s.negate(), *i)?.negate())
        }),
        Until(i, l, r) => binary_channels(eval(trace, l)?, eval(trace, r)?, |a, b| until(a, b, *i)),
        AvgUntil(i, l, r) => {
            binary_channels(eval(trace, l)?, eval(trace, r)?, |a, b| avg_until_interval(a, b, *i))
        }
        Release(i, l, r) => binary_channels(eval(trace, l)?, eval(trace, r)?, |a, b| {
            release_via_duality(a, b, *i, false)
        }),
        AvgRelease(i, l, r) => binary_channels(eval(trace, l)?, eval(trace, r)?, |a, b| {
            release_via_duality(a, b, *i, true)
        }),
    }
}

fn per_channel(
    x: RobustnessSignal,
    op: impl Fn(&FplSignal) -> Result<FplSignal>,
) -> Result<RobustnessSignal> {
    Ok(RobustnessSignal {
        pos: op(&x.pos)?,
        neg: op(&x.neg)?,
    })
}

fn binary_channels(
    x: RobustnessSignal,
    y: RobustnessSignal,
    op: impl Fn(&FplSignal, &FplSignal) -> Result<FplSignal>,
) -> Result<RobustnessSignal> {
    Ok(RobustnessSignal {
        pos: op(&x.pos, &y.pos)?,
        neg: op(&x.neg, &y.neg)?,
    })
}

fn eventually(s: &FplSignal, i: Interval) -> Result<FplSignal> {
    match i.hi() {
        Some(b) => sliding_window(s, i.lo(), b, WindowMode::Max),
        None => future_sup(s, i.lo()),
    }
}

fn avg_eventually_interval(s: &FplSignal, i: Interval) -> Result<FplSignal> {
    match i.hi() {
        Some(b) => avg_eventually(s, i.lo(), b),
        None => future_sup(s, i.lo()),
    }
}
