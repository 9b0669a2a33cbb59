//! Until in its untimed, bounded and unbounded forms, and release by duality.
//!
//! Prefix infima are taken over the closed range `[t, tau]`:
//! `U(t) = sup_{tau in t+I} min(s2(tau), inf_{[t,tau]} s1)`.

use super::window::{check_window, sliding_window, WindowMode};
use crate::error::Result;
use crate::formula::Interval;
use crate::signal::{combine, eps_at, FplSignal, PointwiseOp, Segment};

/// `y(t) = sup_{tau >= t} min(s2(tau), inf_{[t,tau]} s1)` in one backward pass.
///
/// On each piece `[p, q)` where both inputs are linear,
/// `y(t) = min(s1(t), max(M(t), c))` with `M(t) = sup_{[t,q)} min(s1, s2)` and
/// `c = min(s1(q-), y(q))`. `M` is the running maximum of a concave function,
/// so it has at most one kink per piece.
pub fn untimed_until(s1: &FplSignal, s2: &FplSignal) -> FplSignal {
    let bps = merged_breakpoints(s1, s2);
    let mut rev: Vec<Segment> = Vec::with_capacity(bps.len() * 2);
    let mut local: Vec<Segment> = Vec::with_capacity(4);
    let mut tmp: Vec<Segment> = Vec::with_capacity(4);
    let mut y_next = f64::NEG_INFINITY;
    let mut q = f64::INFINITY;
    for &p in bps.iter().rev() {
        let l1 = line_at(s1, p);
        let l2 = line_at(s2, p);
        let c = if q.is_finite() {
            s1.left_limit(q).min(y_next)
        } else {
            f64::NEG_INFINITY
        };

        local.clear();
        running_sup_of_min(&l1, &l2, p, q, &mut local);
        tmp.clear();
        combine(&local, &[Segment::new(p, c, 0.0)], q, PointwiseOp::Max, &mut tmp);
        local.clear();
        combine(&[l1], &tmp, q, PointwiseOp::Min, &mut local);

        y_next = local[0].at(p);
        rev.extend(local.iter().rev());
        q = p;
    }
    rev.reverse();
    FplSignal::from_parts(rev)
}

fn merged_breakpoints(s1: &FplSignal, s2: &FplSignal) -> Vec<f64> {
    let (a, b) = (s1.segments(), s2.segments());
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(u), Some(v)) if u.start <= v.start => {
                i += 1;
                u.start
            }
            (Some(_), Some(v)) => {
                j += 1;
                v.start
            }
            (Some(u), None) => {
                i += 1;
                u.start
            }
            (None, Some(v)) => {
                j += 1;
                v.start
            }
            (None, None) => unreachable!(),
        };
        if out.last().is_none_or(|&l: &f64| x - l > eps_at(x)) {
            out.push(x);
        }
    }
    out
}

/// The piece of `s` in force at `p`, restarted at `p`.
fn line_at(s: &FplSignal, p: f64) -> Segment {
    let seg = s.segments()[s.index_at(p)];
    Segment::new(p, seg.at(p), seg.slope)
}

/// Pieces of `t -> sup_{[t,q)} min(l1, l2)` on `[p, q)`.
fn running_sup_of_min(l1: &Segment, l2: &Segment, p: f64, q: f64, out: &mut Vec<Segment>) {
    let mut m: Vec<Segment> = Vec::with_capacity(2);
    combine(&[*l1], &[*l2], q, PointwiseOp::Min, &mut m);
    let first = m[0];
    if first.slope <= 0.0 {
        // min of two lines is concave: nonincreasing from the start means nonincreasing throughout
        out.extend_from_slice(&m);
        return;
    }
    match m.get(1) {
        Some(second) if second.slope <= 0.0 => {
            out.push(Segment::new(p, second.value, 0.0));
            out.push(*second);
        }
        Some(second) => out.push(Segment::new(p, end_value(second, q), 0.0)),
        None => out.push(Segment::new(p, end_value(&first, q), 0.0)),
    }
}

/// Limit of an increasing line at the end of its piece.
fn end_value(s: &Segment, q: f64) -> f64 {
    if q.is_finite() {
        s.at(q)
    } else {
        f64::INFINITY
    }
}

/// `s1 U_[a,b] s2 = min(F_[a,b] s2, G_[0,a] (s1 U s2))`; for `a = 0` the
/// second factor is the untimed until itself.
pub fn bounded_until(s1: &FplSignal, s2: &FplSignal, a: f64, b: f64) -> Result<FplSignal> {
    check_window(a, b)?;
    let g = until_guard(s1, s2, a)?;
    Ok(sliding_window(s2, a, b, WindowMode::Max)?.min(&g))
}

/// `G_[0,a] (s1 U s2)`, the factor shared by timed and averaged until.
pub(crate) fn until_guard(s1: &FplSignal, s2: &FplSignal, a: f64) -> Result<FplSignal> {
    let u = untimed_until(s1, s2);
    if a > 0.0 {
        sliding_window(&u, 0.0, a, WindowMode::Min)
    } else {
        Ok(u)
    }
}

/// Until over any interval, bounded or not.
pub fn until(s1: &FplSignal, s2: &FplSignal, i: Interval) -> Result<FplSignal> {
    match i.hi() {
        Some(b) => bounded_until(s1, s2, i.lo(), b),
        None => until_guard(s1, s2, i.lo()),
    }
}

/// `sup` of `s` over `[t+a, inf)`.
pub fn future_sup(s: &FplSignal, a: f64) -> Result<FplSignal> {
    untimed_until(&FplSignal::constant(f64::INFINITY), s).shift(a)
}

/// Release of one channel as the negated until of the negated operands.
/// With `averaged`, the averaged forms are used on both sides.
pub fn release_via_duality(s1: &FplSignal, s2: &FplSignal, i: Interval, averaged: bool) -> Result<FplSignal> {
    let (n1, n2) = (s1.negate(), s2.negate());
    let u = if averaged {
        super::averaged::avg_until_interval(&n1, &n2, i)?
    } else {
        until(&n1, &n2, i)?
    };
    Ok(u.negate())
}
