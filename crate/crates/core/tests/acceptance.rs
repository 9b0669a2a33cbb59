//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fails.

mod common;

use std::time::{Duration, Instant};

use avstl::cli::{bench, fit_exponent};
use avstl::falsify::{run_experiment, ExperimentConfig};
use avstl::formula::parse;
use avstl::robustness::evaluate;
use avstl::trace::Trace;

const AIRBAG_TOLERANCE: f64 = 1e-9;
const WORKED_VALUE_BUDGET: Duration = Duration::from_millis(1);
const ORACLE_INSTANCES: usize = 1000;
const ORACLE_SEED: u64 = 20_240_501;
const ORACLE_BUDGET: Duration = Duration::from_secs(60);
const MONOTONICITY_INSTANCES: usize = 500;
const REFINEMENT_INSTANCES: usize = 500;
const DUALITY_INSTANCES: usize = 300;
const MAX_DOUBLING_RATIO: f64 = 2.5;
const MAX_FIT_EXPONENT: f64 = 1.2;
const SCALING_REPETITIONS: usize = 7;
const SCALING_BUDGET: Duration = Duration::from_secs(300);
const SCALING_FORMULA: &str = "G[0,20] (x >= 0 -> AvF[0,5] y >= 1)";
const FALSIFY_TRIALS: usize = 20;
const FALSIFY_BUDGET: Duration = Duration::from_secs(600);

struct Report {
    failed: usize,
}

impl Report {
    fn line(&mut self, id: &str, ok: bool, detail: String) {
        if !ok {
            self.failed += 1;
        }
        println!("{} {id}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

fn trace(csv: &str) -> Trace {
    Trace::from_csv_reader(csv.as_bytes()).expect("valid trace")
}

fn worked_value(r: &mut Report) {
    let f = parse("F[0,10] v >= 80").unwrap();
    let high = trace("time,v\n0,100\n");
    let low = trace("time,v\n0,50\n3,79\n6,80\n8,20\n");
    let a = evaluate(&high, &f).unwrap();
    let b = evaluate(&low, &f).unwrap();
    let mut times: Vec<Duration> = (0..21)
        .map(|_| {
            let s = Instant::now();
            std::hint::black_box(evaluate(&high, &f).unwrap());
            s.elapsed()
        })
        .collect();
    times.sort();
    let t = times[times.len() / 2];
    let ok = a.pos.value() == 20.0 && a.neg.value() == 0.0 && b.pos.value() == 0.0 && t < WORKED_VALUE_BUDGET;
    r.line(
        "worked-value",
        ok,
        format!("constant 100: pos={} neg={}; never above 80: pos={}; median {t:?}", a.pos, a.neg, b.pos),
    );
}

fn airbag_family(r: &mut Report) {
    let f = parse("AvF[0,10] airbag").unwrap();
    let mut worst: f64 = 0.0;
    let mut got = Vec::new();
    for x in [0.0, 2.5, 5.0, 7.5, 10.0] {
        let csv = if x == 0.0 { "time,airbag\n0,1\n".to_string() } else { format!("time,airbag\n0,-1\n{x},1\n") };
        let pos = evaluate(&trace(&csv), &f).unwrap().pos.value();
        worst = worst.max((pos - (10.0 - x) / 10.0).abs());
        got.push(format!("{pos}"));
    }
    r.line(
        "airbag-closed-form",
        worst <= AIRBAG_TOLERANCE,
        format!("pos = [{}], max error {worst:.3e} (tol {AIRBAG_TOLERANCE:e})", got.join(", ")),
    );
}

fn oracle(r: &mut Report) {
    let s = Instant::now();
    let o = common::oracle_equivalence(ORACLE_INSTANCES, ORACLE_SEED);
    let t = s.elapsed();
    r.line(
        "oracle-equivalence",
        o.passed() && o.checked == ORACLE_INSTANCES && t < ORACLE_BUDGET,
        format!("{} in {:.1}s (tol 1e-9 averaging-free, 1e-6 averaged)", o.summary(), t.as_secs_f64()),
    );
}

fn interval_bounds(r: &mut Report) {
    let m = common::interval_monotonicity(MONOTONICITY_INSTANCES, 101);
    let l = common::unbounded_limit(MONOTONICITY_INSTANCES, 102);
    r.line(
        "interval-monotonicity-and-limit",
        m.passed() && l.passed(),
        format!("monotonicity: {}; limit: {}", m.summary(), l.summary()),
    );
}

fn refinements(r: &mut Report) {
    let o = common::refinement_suite(REFINEMENT_INSTANCES, 103);
    r.line("refinement-soundness-completeness", o.passed(), o.summary());
}

fn scaling(r: &mut Report) {
    let s = Instant::now();
    let f = parse(SCALING_FORMULA).unwrap();
    let pair = bench(&[10_000, 20_000], &f, SCALING_REPETITIONS, 7).unwrap();
    let ratio = pair[1].median_seconds / pair[0].median_seconds;
    let sweep = bench(&[1_000, 10_000, 100_000], &f, SCALING_REPETITIONS, 8).unwrap();
    let k = fit_exponent(&sweep).unwrap();
    let t = s.elapsed();
    r.line(
        "linear-scaling",
        ratio <= MAX_DOUBLING_RATIO && k <= MAX_FIT_EXPONENT && t < SCALING_BUDGET,
        format!(
            "median 1e4 -> 2e4 ratio {ratio:.3} (max {MAX_DOUBLING_RATIO}), fitted exponent {k:.3} (max {MAX_FIT_EXPONENT})"
        ),
    );
}

fn falsification(r: &mut Report) {
    let s = Instant::now();
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/config/gear_experiment.json");
    let mut cfg = ExperimentConfig::from_json(&std::fs::read_to_string(path).unwrap()).unwrap();
    cfg.trials = FALSIFY_TRIALS;
    let rep = run_experiment(&cfg).unwrap();
    let p = &rep.problems[0];
    let t = s.elapsed();
    let ok = p.refined.successes >= p.plain.successes
        && p.refined_reverified == p.refined.successes
        && p.unsound_successes == 0
        && t < FALSIFY_BUDGET;
    r.line(
        "falsification-direction",
        ok,
        format!(
            "plain {}/{} vs refined {}/{}, refined successes violating plain {}/{}, {:.1}s",
            p.plain.successes,
            p.plain.trials,
            p.refined.successes,
            p.refined.trials,
            p.refined_reverified,
            p.refined.successes,
            t.as_secs_f64()
        ),
    );
}

fn duality(r: &mut Report) {
    let o = common::duality_suite(DUALITY_INSTANCES, 104);
    r.line("release-until-duality", o.passed(), format!("{} (tol 1e-9)", o.summary()));
}

fn main() {
    let mut r = Report { failed: 0 };
    worked_value(&mut r);
    airbag_family(&mut r);
    oracle(&mut r);
    interval_bounds(&mut r);
    refinements(&mut r);
    scaling(&mut r);
    falsification(&mut r);
    duality(&mut r);
    println!("acceptance: {} of 8 criteria failed", r.failed);
    if r.failed > 0 {
        std::process::exit(1);
    }
}
