//! Randomized check suites shared by the acceptance target and the property tests.
#![allow(dead_code)]

use avstl::cli::{compare, instances};
use avstl::formula::{refine_always, refine_eventually, Formula, Interval};
use avstl::gen::{FormulaGen, TraceGen};
use avstl::oracle::{oracle_evaluate, OracleConfig};
use avstl::robustness::{evaluate, RobustnessPair};
use avstl::trace::Trace;
use avstl::ExtendedReal;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Slack for comparisons that hold exactly in real arithmetic.
pub const ORDER_SLACK: f64 = 1e-9;
/// Distance allowed between a long averaged until and its unbounded limit.
pub const LIMIT_TOLERANCE: f64 = 1e-6;
/// Agreement required by the duality identity.
pub const DUALITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Default)]
pub struct Outcome {
    pub checked: usize,
    /// Implication checks whose premise held (the non-vacuous ones).
    pub premises: usize,
    pub violations: Vec<String>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn fail(&mut self, msg: String) {
        self.violations.push(msg);
    }

    pub fn summary(&self) -> String {
        match self.violations.first() {
            None if self.premises > 0 => {
                format!("{} checked ({} with premise), 0 violations", self.checked, self.premises)
            }
            None => format!("{} checked, 0 violations", self.checked),
            Some(v) => format!("{} checked, {} violations; first: {v}", self.checked, self.violations.len()),
        }
    }
}

fn le(a: ExtendedReal, b: ExtendedReal) -> bool {
    a <= b || a.value() <= b.value() + ORDER_SLACK
}

fn small_gen() -> FormulaGen {
    FormulaGen { max_depth: 2, ..FormulaGen::default() }
}

fn eval(t: &Trace, f: &Formula) -> RobustnessPair {
    evaluate(t, f).unwrap_or_else(|e| panic!("evaluating {f}: {e}"))
}

/// Engine against the oracle on the seeded `oracle-check` stream.
pub fn oracle_equivalence(count: usize, seed: u64) -> Outcome {
    let cfg = OracleConfig::default();
    let mut out = Outcome::default();
    for (i, inst) in instances(count, 4, 50, seed).iter().enumerate() {
        out.checked += 1;
        if let Some(msg) = compare(inst, &cfg).unwrap() {
            out.fail(format!("#{i} {}: {msg}", inst.formula));
        }
    }
    out
}

/// Until-type operators grow with the interval's upper end, release-type ones shrink.
pub fn interval_monotonicity(count: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tg = TraceGen::default();
    let fg = small_gen();
    let mut out = Outcome::default();
    for i in 0..count {
        let trace = tg.sample(&mut rng);
        let (p1, p2) = (fg.sample_averaged_operand(&mut rng), fg.sample_averaged_operand(&mut rng));
        let t0 = rng.random_range(0..=4) as f64 * 0.5;
        let t = t0 + rng.random_range(1..=6) as f64 * 0.5;
        let t2 = t + rng.random_range(1..=6) as f64 * 0.5;
        let (short, long) = (Interval::bounded(t0, t).unwrap(), Interval::bounded(t0, t2).unwrap());
        type Ctor = fn(Interval, Formula, Formula) -> Formula;
        let ops: [(&str, Ctor, bool); 4] = [
            ("U", Formula::until, true),
            ("AvU", Formula::avg_until, true),
            ("R", Formula::release, false),
            ("AvR", Formula::avg_release, false),
        ];
        for (name, mk, grows) in ops {
            out.checked += 1;
            let a = eval(&trace, &mk(short, p1.clone(), p2.clone()));
            let b = eval(&trace, &mk(long, p1.clone(), p2.clone()));
            let ok = if grows {
                le(a.pos, b.pos) && le(a.neg, b.neg)
            } else {
                le(b.pos, a.pos) && le(b.neg, a.neg)
            };
            if !ok {
                out.fail(format!(
                    "#{i} ({p1}) {name} ({p2}) on {short} vs {long}: ({}, {}) vs ({}, {})",
                    a.pos, a.neg, b.pos, b.neg
                ));
            }
        }
    }
    out
}

/// Averaged until over `[t0, T]` rises with `T` toward the unbounded until.
pub fn unbounded_limit(count: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tg = TraceGen::default();
    let fg = small_gen();
    let mut out = Outcome::default();
    for i in 0..count {
        out.checked += 1;
        let trace = tg.sample(&mut rng);
        let (p1, p2) = (fg.sample_averaged_operand(&mut rng), fg.sample_averaged_operand(&mut rng));
        let t0 = rng.random_range(0..=4) as f64 * 0.5;
        let limit = eval(&trace, &Formula::until(Interval::unbounded(t0).unwrap(), p1.clone(), p2.clone())).pos;
        let mut prev = ExtendedReal::ZERO;
        let mut last = ExtendedReal::ZERO;
        for d in [0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 64.0, 1024.0, 1e10] {
            let f = Formula::avg_until(Interval::bounded(t0, t0 + d).unwrap(), p1.clone(), p2.clone());
            let v = eval(&trace, &f).pos;
            if !le(prev, v) {
                out.fail(format!("#{i} ({p1}) AvU[{t0},{}] ({p2}) fell from {prev} to {v}", t0 + d));
            }
            prev = v;
            last = v;
        }
        if !last.approx_eq(limit, LIMIT_TOLERANCE) {
            out.fail(format!("#{i} ({p1}) U[{t0},inf) ({p2}): limit {limit}, long average {last}"));
        }
    }
    out
}

/// Soundness and completeness of the eventually and always refinements in random positive contexts.
pub fn refinement_suite(count: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tg = TraceGen::default();
    let fg = small_gen();
    let mut out = Outcome::default();
    let positive = |t: &Trace, f: &Formula| eval(t, f).pos.value() > 0.0;
    for i in 0..count {
        let trace = tg.sample(&mut rng);
        let phi = fg.sample_averaged_operand(&mut rng);
        let a = rng.random_range(0..=4) as f64 * 0.5;
        let b = a + rng.random_range(2..=8) as f64 * 0.5;
        let inside = a + (b - a) * [0.25, 0.5, 0.75][rng.random_range(0..3)];
        let beyond = b + rng.random_range(1..=4) as f64 * 0.5;
        let delta = rng.random_range(1..=4) as f64 * 0.5;
        let layers = rng.random_range(0..=2);

        // eventually: refined > 0 implies plain > 0; plain over [a, b'] with b' < b > 0 implies refined > 0
        let ev = |hi: f64| Formula::eventually(Interval::bounded(a, hi).unwrap(), phi.clone());
        let (plain, path) = fg.positive_context(&mut rng, ev(b), layers);
        let refined = refine_eventually(&plain, &path).unwrap();
        let mut shorter = plain.clone();
        replace(&mut shorter, &path, ev(inside));
        out.checked += 2;
        out.premises += positive(&trace, &refined) as usize + positive(&trace, &shorter) as usize;
        if positive(&trace, &refined) && !positive(&trace, &plain) {
            out.fail(format!("#{i} eventually soundness: {refined} > 0 but {plain} <= 0"));
        }
        if positive(&trace, &shorter) && !positive(&trace, &refined) {
            out.fail(format!("#{i} eventually completeness: {shorter} > 0 but {refined} <= 0"));
        }

        // always: refined > 0 implies plain > 0; plain over [a, b'] with b' > b > 0 implies refined > 0
        let al = |hi: f64| Formula::always(Interval::bounded(a, hi).unwrap(), phi.clone());
        let (plain, path) = fg.positive_context(&mut rng, al(b), layers);
        let refined = refine_always(&plain, &path, delta).unwrap();
        let mut longer = plain.clone();
        replace(&mut longer, &path, al(beyond));
        out.checked += 2;
        out.premises += positive(&trace, &refined) as usize + positive(&trace, &longer) as usize;
        if positive(&trace, &refined) && !positive(&trace, &plain) {
            out.fail(format!("#{i} always soundness: {refined} > 0 but {plain} <= 0"));
        }
        if positive(&trace, &longer) && !positive(&trace, &refined) {
            out.fail(format!("#{i} always completeness: {longer} > 0 but {refined} <= 0"));
        }
    }
    out
}

fn replace(f: &mut Formula, path: &[usize], with: Formula) {
    if path.is_empty() {
        *f = with;
        return;
    }
    let child = match f {
        Formula::And(l, r) | Formula::Or(l, r) | Formula::Until(_, l, r) | Formula::Release(_, l, r) => {
            if path[0] == 0 { l } else { r }
        }
        _ => panic!("contexts only use binary connectives"),
    };
    replace(child, &path[1..], with);
}

/// `pos(f1 R_I f2) = -neg(!f1 U_I !f2)`, for the engine and for the oracle, plain and averaged.
pub fn duality_suite(count: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tg = TraceGen::default();
    let fg = FormulaGen { max_depth: 3, ..FormulaGen::default() };
    let cfg = OracleConfig::default();
    let mut out = Outcome::default();
    for i in 0..count {
        let trace = tg.sample(&mut rng);
        let averaged = rng.random_bool(0.3);
        let (p1, p2) = if averaged {
            (fg.sample_averaged_operand(&mut rng), fg.sample_averaged_operand(&mut rng))
        } else {
            (fg.sample_plain(&mut rng), fg.sample_plain(&mut rng))
        };
        let iv = fg.interval(&mut rng, true);
        let (rel, unt): (Formula, Formula) = if averaged {
            (
                Formula::avg_release(iv, p1.clone(), p2.clone()),
                Formula::avg_until(iv, Formula::not(p1.clone()), Formula::not(p2.clone())),
            )
        } else {
            (
                Formula::release(iv, p1.clone(), p2.clone()),
                Formula::until(iv, Formula::not(p1.clone()), Formula::not(p2.clone())),
            )
        };
        out.checked += 1;
        let (r, u) = (eval(&trace, &rel), eval(&trace, &unt));
        if !r.pos.approx_eq(neg(u.neg), DUALITY_TOLERANCE) || !r.neg.approx_eq(neg(u.pos), DUALITY_TOLERANCE) {
            out.fail(format!("#{i} engine {rel}: ({}, {}) vs {unt}: ({}, {})", r.pos, r.neg, u.pos, u.neg));
        }
        if averaged {
            continue;
        }
        let (r, u) = (oracle_evaluate(&trace, &rel, &cfg).unwrap(), oracle_evaluate(&trace, &unt, &cfg).unwrap());
        if !r.pos.approx_eq(neg(u.neg), DUALITY_TOLERANCE) || !r.neg.approx_eq(neg(u.pos), DUALITY_TOLERANCE) {
            out.fail(format!("#{i} oracle {rel}: ({}, {}) vs {unt}: ({}, {})", r.pos, r.neg, u.pos, u.neg));
        }
    }
    out
}

fn neg(x: ExtendedReal) -> ExtendedReal {
    ExtendedReal::new(-x.value()).unwrap()
}
