//! Sliding sup/inf over `[t+a, t+b]` in one right-to-left pass.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::signal::{eps_at, FplSignal, PointwiseOp, Segment};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WindowMode {
    Max,
    Min,
}

impl WindowMode {
    pub(crate) fn op(self) -> PointwiseOp {
        match self {
            WindowMode::Max => PointwiseOp::Max,
            WindowMode::Min => PointwiseOp::Min,
        }
    }

    fn identity(self) -> f64 {
        match self {
            WindowMode::Max => f64::NEG_INFINITY,
            WindowMode::Min => f64::INFINITY,
        }
    }
}

pub(crate) fn check_window(a: f64, b: f64) -> Result<()> {
    if !(a >= 0.0) || !(b > a) || !b.is_finite() {
        return Err(Error::Domain(format!("window needs 0 <= a < b < inf, got [{a}, {b}]")));
    }
    Ok(())
}

/// `result(t) = sup` (or `inf`) of `s` over `[t+a, t+b]`.
///
/// The extremum of a piecewise-linear function over a closed window is
/// attained at the window ends or at a breakpoint inside it (taking the larger
/// of the value and the left limit there). The ends are the shifted signals
/// `s(t+a)` and `s(t+b)`; the interior breakpoints are handled by a monotone
/// deque swept from right to left.
///
/// ```
/// use avstl::robustness::{sliding_window, WindowMode};
/// use avstl::signal::FpcSignal;
///
/// let s = FpcSignal::new(vec![(0.0, 0.2), (1.0, 0.6), (3.0, 0.2), (4.0, 0.3), (5.0, 0.7), (8.0, 0.9)])
///     .unwrap()
///     .to_fpl();
/// let w = sliding_window(&s, 0.0, 5.0, WindowMode::Max).unwrap();
/// assert_eq!(w.value_at(3.0).unwrap().value(), 0.9);
/// assert_eq!(w.value_at(1.0).unwrap().value(), 0.7);
/// ```
pub fn sliding_window(s: &FplSignal, a: f64, b: f64, mode: WindowMode) -> Result<FplSignal> {
    check_window(a, b)?;
    let op = mode.op();
    let ends = s.shift_unchecked(a).pointwise(&s.shift_unchecked(b), op);
    Ok(ends.pointwise(&interior(s, a, b, mode), op))
}

/// Extremum over the breakpoints strictly inside the window (plus the right end's left limit).
fn interior(s: &FplSignal, a: f64, b: f64, mode: WindowMode) -> FplSignal {
    let segs = s.segments();
    let op = mode.op();
    // Event k (a breakpoint) counts for t in [t_k - b, t_k - a).
    let events: Vec<(f64, f64)> = (1..segs.len())
        .map(|k| {
            let t = segs[k].start;
            (t, op.apply(segs[k].value, segs[k - 1].at(t)))
        })
        .collect();
    if events.is_empty() {
        return FplSignal::constant(mode.identity());
    }

    let cands = descending_candidates(&events, a, b);
    let dominated = |old: f64, new: f64| match mode {
        WindowMode::Max => old <= new,
        WindowMode::Min => old >= new,
    };

    let mut dq: VecDeque<(f64, f64)> = VecDeque::new();
    let mut next = events.len();
    let mut out: Vec<Segment> = Vec::with_capacity(cands.len());
    for &c in &cands {
        let tol = eps_at(c);
        while next > 0 && events[next - 1].0 - a > c + tol {
            let e = events[next - 1];
            while dq.front().is_some_and(|f| dominated(f.1, e.1)) {
                dq.pop_front();
            }
            dq.push_front(e);
            next -= 1;
        }
        while dq.back().is_some_and(|e| e.0 - b > c + tol) {
            dq.pop_back();
        }
        let h = dq.back().map_or(mode.identity(), |e| e.1);
        out.push(Segment::new(c, h, 0.0));
    }
    out.reverse();
    FplSignal::from_parts(out)
}

/// All positive `t_k - a` and `t_k - b`, plus 0, in decreasing order, deduplicated.
fn descending_candidates(events: &[(f64, f64)], a: f64, b: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * events.len() + 1);
    let (mut i, mut j) = (events.len(), events.len());
    loop {
        let ca = if i > 0 { events[i - 1].0 - a } else { f64::NEG_INFINITY };
        let cb = if j > 0 { events[j - 1].0 - b } else { f64::NEG_INFINITY };
        let c = ca.max(cb);
        if c <= 0.0 {
            break;
        }
        if ca >= cb {
            i -= 1;
        } else {
            j -= 1;
        }
        if out.last().is_none_or(|&l: &f64| l - c > eps_at(c)) {
            out.push(c);
        }
    }
    out.push(0.0);
    out
}
