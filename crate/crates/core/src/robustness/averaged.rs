//! Averaged eventually and averaged until over piecewise-constant operands.
//!
//! Both sweep `t` from right to left while keeping the step function
//! `tau -> max s2 over [t+a, tau]` for `tau` in the window `[t+a, t+b]` as a
//! deque of `(start, value)` entries, values strictly increasing front to back,
//! together with the exact area under it. The result at `t` is that area
//! divided by `b - a`; between events it moves linearly with slope
//! `(value at the right end - value at the left end) / (b - a)`.

use std::collections::VecDeque;

use super::until::until_guard;
use super::window::check_window;
use crate::error::{Error, Result};
use crate::formula::Interval;
use crate::signal::{eps_at, FplSignal, Segment};

/// Slides between full recomputations of the running area.
const AREA_REFRESH: usize = 4096;

/// `result(t) = 1/(b-a) * integral_a^b (sup of s over [t+a, t+tau]) dtau`.
///
/// ```
/// use avstl::robustness::avg_eventually;
/// use avstl::signal::FpcSignal;
///
/// let step = FpcSignal::new(vec![(0.0, 0.0), (0.5, 1.0)]).unwrap().to_fpl();
/// let r = avg_eventually(&step, 0.0, 1.0).unwrap();
/// assert_eq!(r.value_at(0.0).unwrap().value(), 0.5);
/// ```
pub fn avg_eventually(s: &FplSignal, a: f64, b: f64) -> Result<FplSignal> {
    check_window(a, b)?;
    require_fpc(s)?;
    if let Some(c) = pole_constant(s)? {
        return Ok(FplSignal::constant(c));
    }
    Ok(averaged_window(s.segments(), None, a, b))
}

/// Averaged until given the right operand `phi2_sig` and the guard
/// `g = G_[0,a] (s1 U s2)`: the integrand at `t` is the prefix maximum of
/// `phi2_sig` capped at `g(t)`.
pub fn avg_until(phi2_sig: &FplSignal, g: &FplSignal, a: f64, b: f64) -> Result<FplSignal> {
    check_window(a, b)?;
    require_fpc(phi2_sig)?;
    require_fpc(g)?;
    if let Some(c) = pole_constant(phi2_sig)? {
        return Ok(FplSignal::constant(c).min(g));
    }
    match pole_constant(g)? {
        Some(c) if c > 0.0 => avg_eventually(phi2_sig, a, b),
        Some(c) => Ok(FplSignal::constant(c)),
        None => Ok(averaged_window(phi2_sig.segments(), Some(g.segments()), a, b)),
    }
}

/// Averaged until over any interval; unbounded intervals fall back to plain until.
pub fn avg_until_interval(s1: &FplSignal, s2: &FplSignal, i: Interval) -> Result<FplSignal> {
    let g = until_guard(s1, s2, i.lo())?;
    match i.hi() {
        Some(b) => avg_until(s2, &g, i.lo(), b),
        None => Ok(g),
    }
}

fn require_fpc(s: &FplSignal) -> Result<()> {
    if s.is_piecewise_constant() {
        Ok(())
    } else {
        Err(Error::Unsupported(
            "averaged operators need piecewise-constant operands (no nested averaging)".into(),
        ))
    }
}

/// `Some(pole)` for a constant infinite signal, `None` for an all-finite one;
/// a mix of poles and finite values has no defined average.
fn pole_constant(s: &FplSignal) -> Result<Option<f64>> {
    let segs = s.segments();
    if segs.iter().all(|g| g.value.is_finite()) {
        return Ok(None);
    }
    if segs.len() == 1 {
        return Ok(Some(segs[0].value));
    }
    Err(Error::Unsupported(
        "averaging a signal that is infinite on part of its domain".into(),
    ))
}

#[derive(Clone, Copy, Debug)]
struct Entry {
    pos: f64,
    val: f64,
}

fn window_area(dq: &VecDeque<Entry>, right: f64) -> f64 {
    let mut area = 0.0;
    for (i, e) in dq.iter().enumerate() {
        let end = dq.get(i + 1).map_or(right, |n| n.pos);
        area += e.val * (end - e.pos);
    }
    area
}

fn averaged_window(s: &[Segment], g: Option<&[Segment]>, a: f64, b: f64) -> FplSignal {
    let width = b - a;
    let g_last = g.map_or(0.0, |g| g[g.len() - 1].start);
    let cap = |j: usize| g.map_or(f64::INFINITY, |g| g[j].value);

    // Beyond this point the window sits in the last step of s and g is constant.
    let mut t_cur = (s[s.len() - 1].start - a).max(g_last).max(0.0);
    let mut k = s.len() - 1;
    let mut j = g.map_or(0, |g| g.len() - 1);

    let v0 = s[k].value.min(cap(j));
    let mut dq: VecDeque<Entry> = VecDeque::new();
    dq.push_back(Entry { pos: t_cur + a, val: v0 });
    let mut area = v0 * width;
    let mut rev = vec![Segment::new(t_cur, v0, 0.0)];
    let mut slides = 0usize;

    while t_cur > 0.0 {
        let tol = eps_at(t_cur);

        // Next event to the left: the window's left end reaching a step of s,
        // the right end leaving an entry, or a step of g.
        let mut t_new: f64 = 0.0;
        if s[k].start - a < t_cur - tol {
            t_new = t_new.max(s[k].start - a);
        } else if k > 0 {
            t_new = t_new.max(s[k - 1].start - a);
        }
        if let Some(e) = dq.iter().rev().find(|e| e.pos - b < t_cur - tol) {
            t_new = t_new.max(e.pos - b);
        }
        if let Some(g) = g {
            if g[j].start < t_cur - tol {
                t_new = t_new.max(g[j].start);
            } else if j > 0 {
                t_new = t_new.max(g[j - 1].start);
            }
        }

        let left = t_new + a;
        let right = t_new + b;
        while k > 0 && s[k].start > left + eps_at(left) {
            k -= 1;
        }
        if let Some(g) = g {
            while j > 0 && g[j].start > t_new + eps_at(t_new) {
                j -= 1;
            }
        }

        // Dequeue: drop entries past the new right end, then remove the strip
        // [right, old right) at the value of the entry that covers it.
        while dq.len() > 1 && dq.back().unwrap().pos > right + eps_at(right) {
            dq.pop_back();
        }
        area -= (t_cur - t_new) * dq.back().unwrap().val;

        // Pop entries dominated by the new left value, then push it.
        let c = cap(j);
        let v = s[k].value.min(c);
        while let Some(&e) = dq.front() {
            if e.val > v {
                break;
            }
            dq.pop_front();
            let end = dq.front().map_or(right, |n| n.pos);
            area -= e.val * (end - e.pos);
        }
        let t_pop = dq.front().map_or(right, |n| n.pos);
        let pos = if (s[k].start - left).abs() <= eps_at(left) { s[k].start } else { left };
        dq.push_front(Entry { pos, val: v });
        area += v * (t_pop - pos);

        // Truncate entries above the guard into one entry at the guard value.
        if g.is_some() && dq.back().unwrap().val > c {
            let mut first = right;
            while dq.back().is_some_and(|e| e.val > c) {
                let e = dq.pop_back().unwrap();
                area -= e.val * (first - e.pos);
                first = e.pos;
            }
            if dq.back().is_some_and(|e| e.val == c) {
                area += c * (right - first);
            } else {
                dq.push_back(Entry { pos: first, val: c });
                area += c * (right - first);
            }
        }

        slides += 1;
        if slides % AREA_REFRESH == 0 {
            area = window_area(&dq, right);
        }
        let r_left = dq.front().unwrap().val;
        let r_right = dq.back().unwrap().val;
        rev.push(Segment::new(t_new, area / width, (r_right - r_left) / width));
        t_cur = t_new;
    }
    rev.reverse();
    FplSignal::from_parts(rev)
}
