//! Piecewise-constant (FPC) and piecewise-linear (FPL) signals over `[0, inf)`.
//!
//! A signal is a list of segments `(start, value, slope)`. Segment `i` covers
//! `[start_i, start_{i+1})`, the last one extends to infinity, and the first
//! one starts at 0. The value at `t` inside segment `i` is
//! `value_i + slope_i * (t - start_i)`, so signals are right-continuous and a
//! jump at `start_i` shows up as a left limit differing from `value_i`.
//!
//! Every operation returns a canonical signal: adjacent segments that continue
//! the same line are merged, and crossings that land within `SNAP_EPS` of an
//! existing breakpoint are snapped onto it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext::ExtendedReal;

/// Relative distance under which two time points are treated as the same.
pub const SNAP_EPS: f64 = 1e-12;

pub(crate) fn eps_at(x: f64) -> f64 {
    SNAP_EPS * x.abs().max(1.0)
}

/// One linear piece.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: f64,
    pub value: f64,
    pub slope: f64,
}

impl Segment {
    pub fn new(start: f64, value: f64, slope: f64) -> Self {
        Segment { start, value, slope }
    }

    /// Value of this piece's line at `t`.
    #[inline]
    pub fn at(&self, t: f64) -> f64 {
        if self.slope == 0.0 {
            self.value
        } else {
            self.value + self.slope * (t - self.start)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointwiseOp {
    Min,
    Max,
}

impl PointwiseOp {
    #[inline]
    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            PointwiseOp::Min => a.min(b),
            PointwiseOp::Max => a.max(b),
        }
    }

    /// True when `a` is at least as good as `b` under this operation.
    #[inline]
    fn prefers(self, a: f64, b: f64) -> bool {
        match self {
            PointwiseOp::Min => a <= b,
            PointwiseOp::Max => a >= b,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClampMode {
    /// `max(0, s)`
    NonNegative,
    /// `min(0, s)`
    NonPositive,
}

/// Finite piecewise-linear signal.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FplSignal {
    segs: Vec<Segment>,
}

impl FplSignal {
    /// Validates and canonicalizes a list of segments.
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        let first = segments
            .first()
            .ok_or_else(|| Error::InvalidSignal("a signal needs at least one segment".into()))?;
        if first.start != 0.0 {
            return Err(Error::InvalidSignal(format!(
                "first segment must start at 0, got {}",
                first.start
            )));
        }
        for (i, s) in segments.iter().enumerate() {
            if !s.start.is_finite() {
                return Err(Error::InvalidSignal(format!("segment {i} has a non-finite start")));
            }
            if s.value.is_nan() || s.slope.is_nan() {
                return Err(Error::InvalidSignal(format!("segment {i} contains NaN")));
            }
            if !s.slope.is_finite() {
                return Err(Error::InvalidSignal(format!("segment {i} has an infinite slope")));
            }
            if !s.value.is_finite() && s.slope != 0.0 {
                return Err(Error::InvalidSignal(format!(
                    "segment {i} has an infinite value with nonzero slope"
                )));
            }
            if i > 0 && s.start <= segments[i - 1].start {
                return Err(Error::InvalidSignal(format!(
                    "segment starts must be strictly increasing (segment {i})"
                )));
            }
        }
        Ok(Self::from_parts(segments))
    }

    /// Builds from segments already known to be well-formed, canonicalizing.
    pub(crate) fn from_parts(segments: Vec<Segment>) -> Self {
        debug_assert!(!segments.is_empty());
        let mut out: Vec<Segment> = Vec::with_capacity(segments.len());
        for mut s in segments {
            if !s.value.is_finite() {
                s.slope = 0.0;
            }
            if let Some(last) = out.last_mut() {
                if s.start - last.start <= eps_at(s.start) {
                    // Zero-width piece: the later piece wins at that instant.
                    let start = last.start;
                    *last = Segment::new(start, s.at(start), s.slope);
                    if out.len() >= 2 {
                        let n = out.len();
                        if continues(&out[n - 2], &out[n - 1]) {
                            out.pop();
                        }
                    }
                    continue;
                }
                if continues(last, &s) {
                    continue;
                }
            }
            out.push(s);
        }
        out[0].start = 0.0;
        FplSignal { segs: out }
    }

    pub fn constant(v: f64) -> Self {
        FplSignal {
            segs: vec![Segment::new(0.0, v, 0.0)],
        }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segs
    }

    pub fn len(&self) -> usize {
        self.segs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        self.segs.iter().map(|s| s.start).collect()
    }

    pub fn is_piecewise_constant(&self) -> bool {
        self.segs.iter().all(|s| s.slope == 0.0)
    }

    /// Index of the segment containing `t` (`t >= 0`).
    #[inline]
    pub(crate) fn index_at(&self, t: f64) -> usize {
        self.segs.partition_point(|s| s.start <= t).saturating_sub(1)
    }

    /// Raw value at `t >= 0`.
    #[inline]
    pub(crate) fn eval(&self, t: f64) -> f64 {
        self.segs[self.index_at(t)].at(t)
    }

    /// Limit from the left at `t > 0`; equals the value where there is no jump.
    pub fn left_limit(&self, t: f64) -> f64 {
        let i = self.segs.partition_point(|s| s.start < t).saturating_sub(1);
        self.segs[i].at(t)
    }

    pub fn value_at(&self, t: f64) -> Result<ExtendedReal> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("cannot evaluate a signal at t = {t}")));
        }
        Ok(ExtendedReal::new(self.eval(t)).expect("signal values are never NaN"))
    }

    /// `s'(t) = s(t + d)`.
    pub fn shift(&self, d: f64) -> Result<Self> {
        if !(d >= 0.0) || !d.is_finite() {
            return Err(Error::Domain(format!("shift offset must be finite and >= 0, got {d}")));
        }
        Ok(self.shift_unchecked(d))
    }

    pub(crate) fn shift_unchecked(&self, d: f64) -> Self {
        if d == 0.0 {
            return self.clone();
        }
        let i = self.index_at(d);
        let mut out = Vec::with_capacity(self.segs.len() - i);
        out.push(Segment::new(0.0, self.segs[i].at(d), self.segs[i].slope));
        for s in &self.segs[i + 1..] {
            out.push(Segment::new(s.start - d, s.value, s.slope));
        }
        Self::from_parts(out)
    }

    pub fn negate(&self) -> Self {
        FplSignal {
            segs: self
                .segs
                .iter()
                .map(|s| Segment::new(s.start, -s.value, if s.slope == 0.0 { 0.0 } else { -s.slope }))
                .collect(),
        }
    }

    /// `s(t) + c` for finite `c`.
    pub fn offset(&self, c: f64) -> Self {
        FplSignal {
            segs: self
                .segs
                .iter()
                .map(|s| Segment::new(s.start, s.value + c, s.slope))
                .collect(),
        }
    }

    pub fn pointwise(&self, other: &FplSignal, op: PointwiseOp) -> Self {
        let mut out = Vec::with_capacity(self.segs.len() + other.segs.len());
        combine(&self.segs, &other.segs, f64::INFINITY, op, &mut out);
        Self::from_parts(out)
    }

    pub fn min(&self, other: &FplSignal) -> Self {
        self.pointwise(other, PointwiseOp::Min)
    }

    pub fn max(&self, other: &FplSignal) -> Self {
        self.pointwise(other, PointwiseOp::Max)
    }

    pub fn clamp(&self, mode: ClampMode) -> Self {
        let zero = FplSignal::constant(0.0);
        match mode {
            ClampMode::NonNegative => self.max(&zero),
            ClampMode::NonPositive => self.min(&zero),
        }
    }

    /// Integral over `[lo, hi]`. Poles are absorbing; mixing `+inf` and `-inf`
    /// inside the range is an error.
    pub fn area(&self, lo: f64, hi: f64) -> Result<ExtendedReal> {
        if !(lo >= 0.0) || !(hi >= lo) || !hi.is_finite() {
            return Err(Error::Domain(format!("invalid integration range [{lo}, {hi}]")));
        }
        let mut sum = 0.0;
        let (mut pos_inf, mut neg_inf) = (false, false);
        let first = self.index_at(lo);
        for (i, s) in self.segs.iter().enumerate().skip(first) {
            if s.start >= hi {
                break;
            }
            let end = self.segs.get(i + 1).map_or(f64::INFINITY, |n| n.start);
            let (a, b) = (s.start.max(lo), end.min(hi));
            if b <= a {
                continue;
            }
            if s.value == f64::INFINITY {
                pos_inf = true;
            } else if s.value == f64::NEG_INFINITY {
                neg_inf = true;
            } else {
                sum += 0.5 * (s.at(a) + s.at(b)) * (b - a);
            }
        }
        match (pos_inf, neg_inf) {
            (true, true) => Err(Error::Domain(
                "integral over a range holding both +inf and -inf".into(),
            )),
            (true, false) => Ok(ExtendedReal::POS_INF),
            (false, true) => Ok(ExtendedReal::NEG_INF),
            _ => Ok(ExtendedReal::new(sum).expect("finite area")),
        }
    }
}

/// Does `next` lie on the same line as `prev`?
fn continues(prev: &Segment, next: &Segment) -> bool {
    if !prev.value.is_finite() || !next.value.is_finite() {
        return prev.value == next.value;
    }
    if prev.slope == 0.0 && next.slope == 0.0 {
        return prev.value == next.value;
    }
    let expected = prev.at(next.start);
    let scale = expected.abs().max(next.value.abs()).max(1.0);
    (prev.slope - next.slope).abs() <= SNAP_EPS * prev.slope.abs().max(next.slope.abs()).max(1.0)
        && (expected - next.value).abs() <= SNAP_EPS * scale
}

/// Pointwise `op` of two piece lists sharing the same start, over `[start, end)`.
/// Output pieces are appended to `out` uncanonicalized.
pub(crate) fn combine(a: &[Segment], b: &[Segment], end: f64, op: PointwiseOp, out: &mut Vec<Segment>) {
    let (mut i, mut j) = (0usize, 0usize);
    let mut x = a[0].start;
    loop {
        let na = a.get(i + 1).map_or(end, |s| s.start);
        let nb = b.get(j + 1).map_or(end, |s| s.start);
        let nx = na.min(nb);
        combine_piece(&a[i], &b[j], x, nx, op, out);
        if nx >= end {
            break;
        }
        let tol = eps_at(nx);
        if na - nx <= tol {
            i += 1;
        }
        if nb - nx <= tol {
            j += 1;
        }
        x = nx;
    }
}

fn combine_piece(sa: &Segment, sb: &Segment, x: f64, nx: f64, op: PointwiseOp, out: &mut Vec<Segment>) {
    let probe = |lo: f64, hi: f64| if hi.is_finite() { 0.5 * (lo + hi) } else { lo + 1.0 };
    let pick = |p: f64| if op.prefers(sa.at(p), sb.at(p)) { sa } else { sb };
    let (va, vb) = (sa.at(x), sb.at(x));
    if va.is_finite() && vb.is_finite() && sa.slope != sb.slope {
        let xc = x + (vb - va) / (sa.slope - sb.slope);
        if xc > x + eps_at(x) && (nx.is_infinite() || xc < nx - eps_at(nx)) {
            let w1 = pick(probe(x, xc));
            let w2 = if std::ptr::eq(w1, sa) { sb } else { sa };
            out.push(Segment::new(x, w1.at(x), w1.slope));
            out.push(Segment::new(xc, w2.at(xc), w2.slope));
            return;
        }
    }
    let w = pick(probe(x, nx));
    out.push(Segment::new(x, w.at(x), w.slope));
}

/// Finite piecewise-constant signal: `(start, value)` steps.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FpcSignal {
    steps: Vec<(f64, f64)>,
}

impl FpcSignal {
    pub fn new(steps: Vec<(f64, f64)>) -> Result<Self> {
        let segs = steps.iter().map(|&(t, v)| Segment::new(t, v, 0.0)).collect();
        let fpl = FplSignal::new(segs)?;
        Ok(Self::from_fpl(&fpl).expect("constant segments"))
    }

    pub fn constant(v: f64) -> Self {
        FpcSignal { steps: vec![(0.0, v)] }
    }

    /// `None` if any segment has a nonzero slope.
    pub fn from_fpl(s: &FplSignal) -> Option<Self> {
        if !s.is_piecewise_constant() {
            return None;
        }
        Some(FpcSignal {
            steps: s.segments().iter().map(|g| (g.start, g.value)).collect(),
        })
    }

    pub fn steps(&self) -> &[(f64, f64)] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value_at(&self, t: f64) -> Result<ExtendedReal> {
        self.to_fpl().value_at(t)
    }

    pub fn to_fpl(&self) -> FplSignal {
        FplSignal {
            segs: self.steps.iter().map(|&(t, v)| Segment::new(t, v, 0.0)).collect(),
        }
    }
}

impl From<FpcSignal> for FplSignal {
    fn from(s: FpcSignal) -> Self {
        s.to_fpl()
    }
}
