//! Brute-force reference semantics for cross-checking the evaluator.
//!
//! Evaluates the desugared formula straight from the sup/inf definitions. Each
//! subformula gets a table of its robustness on `[0, inf)`: averaging-free
//! subformulas are piecewise constant, so one evaluation per candidate point
//! suffices; subformulas above an averaged operator are piecewise linear and
//! their pieces are found by sampling and splitting at kinks. Averaged
//! operators integrate with trapezoid sums on grids that contain every event.
//!
//! Shares no window or deque code with [`crate::robustness`]; it is quadratic
//! or worse and meant for small instances only.

use crate::error::{Error, Result};
use crate::ext::ExtendedReal;
use crate::formula::{Formula, Interval};
use crate::robustness::{check_formula, RobustnessPair};
use crate::trace::Trace;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleConfig {
    /// Maximum number of grid halvings for averaged integrals.
    pub integration_refinements: usize,
    /// Convergence threshold between successive trapezoid sums.
    pub abs_tolerance: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            integration_refinements: 20,
            abs_tolerance: 1e-7,
        }
    }
}

impl OracleConfig {
    fn validate(&self) -> Result<()> {
        if self.integration_refinements < 1 || !(self.abs_tolerance > 0.0) {
            return Err(Error::Oracle("need refinements >= 1 and tolerance > 0".into()));
        }
        Ok(())
    }
}

/// Robustness of `f` over `trace` at time 0.
pub fn oracle_evaluate(trace: &Trace, f: &Formula, cfg: &OracleConfig) -> Result<RobustnessPair> {
    cfg.validate()?;
    check_formula(trace, f)?;
    let core = f.desugar();
    let o = Oracle { trace, cfg };
    let kids = core
        .children()
        .into_iter()
        .map(|c| o.tables(c))
        .collect::<Result<Vec<_>>>()?;
    let (pos, neg) = o.value(&core, &kids, 0.0)?;
    Ok(RobustnessPair {
        pos: ExtendedReal::new(pos).ok_or_else(|| Error::Oracle("NaN robustness".into()))?,
        neg: ExtendedReal::new(neg).ok_or_else(|| Error::Oracle("NaN robustness".into()))?,
    })
}

/// Robustness at each of `times`, each computed on the shifted trace.
pub fn oracle_robust_signal_samples(
    trace: &Trace,
    f: &Formula,
    times: &[f64],
    cfg: &OracleConfig,
) -> Result<Vec<RobustnessPair>> {
    times
        .iter()
        .map(|&t| oracle_evaluate(&trace.shift(t)?, f, cfg))
        .collect()
}

/// Piecewise-linear table: on `[pts[i], pts[i+1])` the value is `vals[i] + slopes[i] * (t - pts[i])`.
#[derive(Clone, Debug, Default)]
struct Table {
    pts: Vec<f64>,
    vals: Vec<f64>,
    slopes: Vec<f64>,
}

impl Table {
    fn push(&mut self, p: f64, v: f64, s: f64) {
        self.pts.push(p);
        self.vals.push(v);
        self.slopes.push(if v.is_finite() { s } else { 0.0 });
    }

    fn line(&self, i: usize, t: f64) -> f64 {
        if self.slopes[i] == 0.0 {
            self.vals[i]
        } else {
            self.vals[i] + self.slopes[i] * (t - self.pts[i])
        }
    }

    fn index(&self, t: f64) -> usize {
        self.pts.partition_point(|&p| p <= t).saturating_sub(1)
    }

    fn value(&self, t: f64) -> f64 {
        self.line(self.index(t), t)
    }

    fn slope_at(&self, t: f64) -> f64 {
        self.slopes[self.index(t)]
    }

    /// Breakpoints strictly inside `(lo, hi)`.
    fn inside(&self, lo: f64, hi: f64) -> &[f64] {
        let i = self.pts.partition_point(|&p| p <= lo);
        let j = self.pts.partition_point(|&p| p < hi);
        &self.pts[i..j.max(i)]
    }
}

#[derive(Clone, Debug)]
struct Pair {
    pos: Table,
    neg: Table,
}

impl Pair {
    fn channel(&self, pos: bool) -> &Table {
        if pos {
            &self.pos
        } else {
            &self.neg
        }
    }
}

/// Sup-of-inf (until) or inf-of-sup (release).
#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Until,
    Release,
}

impl Kind {
    fn outer(self, a: f64, b: f64) -> f64 {
        match self {
            Kind::Until => a.max(b),
            Kind::Release => a.min(b),
        }
    }

    fn inner(self, a: f64, b: f64) -> f64 {
        match self {
            Kind::Until => a.min(b),
            Kind::Release => a.max(b),
        }
    }

    fn outer_unit(self) -> f64 {
        match self {
            Kind::Until => f64::NEG_INFINITY,
            Kind::Release => f64::INFINITY,
        }
    }
}

struct Oracle<'a> {
    trace: &'a Trace,
    cfg: &'a OracleConfig,
}

impl Oracle<'_> {
    fn tables(&self, f: &Formula) -> Result<Pair> {
        let kids = f
            .children()
            .into_iter()
            .map(|c| self.tables(c))
            .collect::<Result<Vec<_>>>()?;
        let pts = self.candidate_points(f, &kids);
        let mut pair = Pair {
            pos: Table::default(),
            neg: Table::default(),
        };
        if f.is_averaging_free() {
            for &p in &pts {
                let (a, b) = self.value(f, &kids, p)?;
                pair.pos.push(p, a, 0.0);
                pair.neg.push(p, b, 0.0);
            }
            return Ok(pair);
        }
        for pos in [true, false] {
            let eval = |t: f64| self.value(f, &kids, t).map(|(a, b)| if pos { a } else { b });
            let mut tab = Table::default();
            for (i, &p) in pts.iter().enumerate() {
                let q = pts.get(i + 1).copied().unwrap_or(f64::INFINITY);
                refine_piece(&eval, p, q, 0, &mut tab)?;
            }
            if pos {
                pair.pos = tab;
            } else {
                pair.neg = tab;
            }
        }
        Ok(pair)
    }

    /// Points where the subformula's robustness may jump or bend, apart from
    /// crossings of linear pieces.
    fn candidate_points(&self, f: &Formula, kids: &[Pair]) -> Vec<f64> {
        let mut pts = vec![0.0];
        match f {
            Formula::Atom(a) => {
                let ch = self.trace.channel(&a.variable).expect("checked variable");
                pts.extend(ch.steps().iter().map(|s| s.0));
            }
            _ => {
                let below: Vec<f64> = kids.iter().flat_map(|k| k.pos.pts.iter().chain(&k.neg.pts)).copied().collect();
                match f.interval() {
                    Some(i) => {
                        for &p in &below {
                            pts.push(p);
                            pts.push(p - i.lo());
                            if let Some(b) = i.hi() {
                                pts.push(p - b);
                            }
                        }
                    }
                    None => pts.extend(below),
                }
            }
        }
        pts.retain(|&p| p >= 0.0);
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs().max(1.0));
        pts
    }

    fn value(&self, f: &Formula, kids: &[Pair], t: f64) -> Result<(f64, f64)> {
        use Formula::*;
        Ok(match f {
            True => (f64::INFINITY, 0.0),
            False => (0.0, f64::NEG_INFINITY),
            Atom(a) => {
                let x = self.trace.channel(&a.variable).expect("checked variable");
                let v = x.to_fpl().value_at(t)?.value();
                let d = if a.relation.is_upper_bound() { a.threshold - v } else { v - a.threshold };
                (d.max(0.0), d.min(0.0))
            }
            Not(_) => (-kids[0].neg.value(t), -kids[0].pos.value(t)),
            And(..) => (
                kids[0].pos.value(t).min(kids[1].pos.value(t)),
                kids[0].neg.value(t).min(kids[1].neg.value(t)),
            ),
            Or(..) => (
                kids[0].pos.value(t).max(kids[1].pos.value(t)),
                kids[0].neg.value(t).max(kids[1].neg.value(t)),
            ),
            Until(i, ..) => self.temporal(Kind::Until, *i, false, kids, t)?,
            Release(i, ..) => self.temporal(Kind::Release, *i, false, kids, t)?,
            AvgUntil(i, ..) => self.temporal(Kind::Until, *i, true, kids, t)?,
            AvgRelease(i, ..) => self.temporal(Kind::Release, *i, true, kids, t)?,
            Implies(..) | Eventually(..) | Always(..) | AvgEventually(..) | AvgAlways(..) => {
                return Err(Error::Oracle("formula must be desugared".into()))
            }
        })
    }

    fn temporal(&self, kind: Kind, i: Interval, averaged: bool, kids: &[Pair], t: f64) -> Result<(f64, f64)> {
        let mut out = [0.0; 2];
        for (k, pos) in [true, false].into_iter().enumerate() {
            let (h1, h2) = (kids[0].channel(pos), kids[1].channel(pos));
            out[k] = match (averaged, i.hi()) {
                (true, Some(b)) => self.average(kind, h1, h2, t, i.lo(), b)?,
                (_, hi) => extremum(kind, h1, h2, t, t + i.lo(), hi.map_or(f64::INFINITY, |b| t + b), false),
            };
        }
        Ok((out[0], out[1]))
    }

    /// `1/(b-a) * integral_a^b W(tau) dtau` where `W(tau)` is the operator over `[a, tau]`.
    fn average(&self, kind: Kind, h1: &Table, h2: &Table, t: f64, a: f64, b: f64) -> Result<f64> {
        // The grid lives in absolute time so that events are hit exactly.
        let (lo, hi) = (t + a, t + b);
        let w = |x: f64| extremum(kind, h1, h2, t, lo, x, false);
        let w_left = |x: f64| extremum(kind, h1, h2, t, lo, x, true);
        let mut grid = vec![lo, hi];
        for &p in h1.inside(lo, hi).iter().chain(h2.inside(lo, hi)) {
            if p > lo && p < hi {
                grid.push(p);
            }
        }
        grid.sort_by(|x, y| x.partial_cmp(y).unwrap());
        grid.dedup();

        let trapezoid = |grid: &[f64]| -> Result<f64> {
            let (mut sum, mut pos_inf, mut neg_inf) = (0.0, false, false);
            for win in grid.windows(2) {
                let (x, y) = (win[0], win[1]);
                let (u, v) = (w(x), w_left(y));
                for z in [u, v] {
                    if z == f64::INFINITY {
                        pos_inf = true;
                    } else if z == f64::NEG_INFINITY {
                        neg_inf = true;
                    }
                }
                if u.is_finite() && v.is_finite() {
                    sum += 0.5 * (y - x) * (u + v);
                } else if u.is_finite() || v.is_finite() {
                    return Err(Error::Oracle("integrand is infinite on part of the window".into()));
                }
            }
            match (pos_inf, neg_inf) {
                (false, false) => Ok(sum / (hi - lo)),
                (true, false) if sum == 0.0 => Ok(f64::INFINITY),
                (false, true) if sum == 0.0 => Ok(f64::NEG_INFINITY),
                _ => Err(Error::Oracle("integrand mixes poles and finite values".into())),
            }
        };

        let mut prev = trapezoid(&grid)?;
        if !prev.is_finite() {
            return Ok(prev);
        }
        for _ in 0..self.cfg.integration_refinements {
            let mut finer = Vec::with_capacity(grid.len() * 2);
            for win in grid.windows(2) {
                finer.push(win[0]);
                finer.push(0.5 * (win[0] + win[1]));
            }
            finer.push(hi);
            grid = finer;
            let next = trapezoid(&grid)?;
            if (next - prev).abs() < self.cfg.abs_tolerance {
                return Ok(next);
            }
            prev = next;
        }
        Err(Error::Oracle(format!(
            "averaged integral did not converge after {} refinements",
            self.cfg.integration_refinements
        )))
    }
}

/// Until: `sup_{tau in [lo, hi]} min(h2(tau), inf_{[t,tau]} h1)` in absolute
/// time; release swaps sup and inf. With `right_open`, `tau = hi` itself is
/// excluded (only its left limit counts), which gives the left limit in `hi`.
fn extremum(kind: Kind, h1: &Table, h2: &Table, t: f64, lo: f64, hi: f64, right_open: bool) -> f64 {
    let mut xs: Vec<f64> = vec![t];
    if lo > t {
        xs.push(lo);
    }
    xs.extend(h1.inside(t, hi).iter().chain(h2.inside(t, hi)).copied());
    xs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    xs.dedup();

    let mut best = kind.outer_unit();
    // running inf (until) / sup (release) of h1 over [t, x) including left limits
    let mut run = -kind.outer_unit();
    for (j, &x) in xs.iter().enumerate() {
        let y = xs.get(j + 1).copied().unwrap_or(hi);
        let v1 = h1.value(x);
        let l1 = |tau: f64| v1 + if v1.is_finite() { h1.slope_at(x) * (tau - x) } else { 0.0 };
        let v2 = h2.value(x);
        let l2 = |tau: f64| v2 + if v2.is_finite() { h2.slope_at(x) * (tau - x) } else { 0.0 };
        let start = x.max(lo);
        if start < y || (start == x && x >= lo) {
            let mut taus = vec![start];
            if y.is_finite() && y > start {
                taus.push(y);
            }
            let (q1, q2) = (h1.slope_at(x), h2.slope_at(x));
            if v1.is_finite() && v2.is_finite() && q1 != q2 {
                let xc = x + (v2 - v1) / (q1 - q2);
                if xc > start && xc < y {
                    taus.push(xc);
                }
            }
            for tau in taus {
                let k = kind.inner(kind.inner(l2(tau), l1(tau)), kind.inner(run, v1));
                best = kind.outer(best, k);
            }
        }
        if y.is_finite() {
            run = kind.inner(run, kind.inner(v1, l1(y)));
        }
    }
    if hi.is_finite() && !right_open {
        let k = kind.inner(kind.inner(h2.value(hi), h1.value(hi)), run);
        best = kind.outer(best, k);
    }
    best
}

/// Appends linear pieces of `f` on `[lo, hi)`, splitting at detected kinks.
fn refine_piece(
    f: &dyn Fn(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
    depth: usize,
    out: &mut Table,
) -> Result<()> {
    let v_lo = f(lo)?;
    if !hi.is_finite() {
        out.push(lo, v_lo, 0.0);
        return Ok(());
    }
    let width = hi - lo;
    const FRACTIONS: [f64; 7] = [0.1381966, 0.2763932, 0.381966, 0.5, 0.618034, 0.7236068, 0.8618034];
    let mut xs = vec![lo];
    xs.extend(FRACTIONS.iter().map(|q| lo + q * width));
    xs.push(hi - width * 1e-9);
    let ys = xs.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;

    if ys.iter().any(|y| !y.is_finite()) {
        if ys.iter().all(|&y| y == v_lo) {
            out.push(lo, v_lo, 0.0);
            return Ok(());
        }
        return split(f, lo, hi, 0.5 * (lo + hi), depth, out);
    }
    let slope = (ys[4] - ys[0]) / (xs[4] - xs[0]);
    let scale = 1.0 + ys.iter().fold(0.0f64, |m, y| m.max(y.abs()));
    let linear = xs
        .iter()
        .zip(&ys)
        .all(|(&x, &y)| (v_lo + slope * (x - lo) - y).abs() <= 1e-10 * scale);
    if linear || depth > 60 || width < 1e-10 {
        out.push(lo, v_lo, slope);
        return Ok(());
    }
    // Intersect the tangent lines at both ends to guess a single kink.
    let d = width * 1e-6;
    let (a1, a2) = (f(lo + d)?, f(lo + 2.0 * d)?);
    let (b1, b2) = (f(hi - 2.0 * d)?, f(hi - d)?);
    let (sl, sr) = ((a2 - a1) / d, (b2 - b1) / d);
    let mut cut = 0.5 * (lo + hi);
    if (sl - sr).abs() > 1e-12 {
        let xk = ((b1 - sr * (hi - 2.0 * d)) - (a1 - sl * (lo + d))) / (sl - sr);
        if xk > lo + 4.0 * d && xk < hi - 4.0 * d {
            cut = xk;
        }
    }
    split(f, lo, hi, cut, depth, out)
}

fn split(f: &dyn Fn(f64) -> Result<f64>, lo: f64, hi: f64, cut: f64, depth: usize, out: &mut Table) -> Result<()> {
    if depth > 60 || hi - lo < 1e-10 {
        out.push(lo, f(lo)?, 0.0);
        return Ok(());
    }
    refine_piece(f, lo, cut, depth + 1, out)?;
    refine_piece(f, cut, hi, depth + 1, out)
}
