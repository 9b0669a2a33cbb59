//! Command-line front end.
//!
//! Exit codes: `eval` returns 0 when the positive robustness is above zero and
//! 1 when it is not; `oracle-check` and `bench` return 1 on a mismatch or a
//! failed scaling check. Every error exits with 2.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::falsify::{run_experiment, ExperimentConfig};
use crate::formula::{parse, Formula};
use crate::gen::{FormulaGen, TraceGen};
use crate::oracle::{oracle_evaluate, OracleConfig};
use crate::robustness::{evaluate, robust_signal, RobustnessPair};
use crate::trace::Trace;

/// Tolerance for engine-oracle agreement on averaging-free formulas.
pub const EXACT_TOLERANCE: f64 = 1e-9;
/// Tolerance when an averaged operator is involved.
pub const AVERAGED_TOLERANCE: f64 = 1e-6;
/// Largest acceptable growth of the median time when the trace doubles.
pub const MAX_DOUBLING_RATIO: f64 = 2.5;

#[derive(Debug, Parser)]
#[command(name = "avstl", version, about = "Averaged STL robustness monitor and falsifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Robustness of a formula over a CSV trace at time 0.
    Eval {
        /// CSV with a `time` column and one column per variable.
        #[arg(long)]
        trace: PathBuf,
        #[command(flatten)]
        formula: FormulaArg,
        /// Also write the full robustness signal as CSV.
        #[arg(long, value_name = "PATH")]
        dump_signal: Option<PathBuf>,
        /// Print a JSON object instead of `pos=.. neg=..`.
        #[arg(long)]
        json: bool,
    },
    /// Robustness signal of a formula as CSV (time,pos,pos_slope,neg,neg_slope).
    Signal {
        /// CSV with a `time` column and one column per variable.
        #[arg(long)]
        trace: PathBuf,
        #[command(flatten)]
        formula: FormulaArg,
        /// Output file; stdout when absent.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Compare the engine against the brute-force oracle on random instances.
    OracleCheck {
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[arg(long, default_value_t = 4)]
        max_depth: usize,
        #[arg(long, default_value_t = 50)]
        max_segments: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Time robust_signal on random traces of growing size.
    Bench {
        #[arg(long, value_delimiter = ',', default_values_t = [10_000usize, 20_000])]
        sizes: Vec<usize>,
        #[arg(long, default_value = "G[0,20] (x >= 0 -> AvF[0,5] y >= 1)")]
        formula: String,
        #[arg(long, default_value_t = 5)]
        repetitions: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a plain-versus-refined falsification experiment from a JSON config.
    Falsify {
        /// Experiment config, e.g. config/gear_experiment.json.
        #[arg(long)]
        config: PathBuf,
        /// Write the JSON report here; the text table always goes to stdout.
        #[arg(long, value_name = "PATH")]
        report: Option<PathBuf>,
        /// Override the number of trials in the config.
        #[arg(long)]
        trials: Option<usize>,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct FormulaArg {
    /// Formula text.
    #[arg(long, short)]
    formula: Option<String>,
    /// File holding the formula text.
    #[arg(long)]
    formula_file: Option<PathBuf>,
}

impl FormulaArg {
    fn load(&self) -> Result<Formula> {
        match (&self.formula, &self.formula_file) {
            (Some(text), _) => parse(text),
            (None, Some(path)) => parse(&std::fs::read_to_string(path)?),
            (None, None) => unreachable!("clap requires one of the two"),
        }
    }
}

/// Entry point of the `avstl` binary.
pub fn main() -> i32 {
    run(std::env::args_os())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Eval { trace, formula, dump_signal, json } => {
            let trace = Trace::from_csv_path(trace)?;
            let f = formula.load()?;
            warn_horizon(&trace, &f);
            let r = match &dump_signal {
                Some(path) => {
                    let sig = robust_signal(&trace, &f)?;
                    sig.write_csv(std::fs::File::create(path)?)?;
                    sig.at(0.0)?
                }
                None => evaluate(&trace, &f)?,
            };
            if json {
                println!("{}", serde_json::to_string(&r)?);
            } else {
                println!("pos={} neg={}", r.pos, r.neg);
            }
            Ok(if r.pos.value() > 0.0 { 0 } else { 1 })
        }
        Command::Signal { trace, formula, output } => {
            let trace = Trace::from_csv_path(trace)?;
            let f = formula.load()?;
            warn_horizon(&trace, &f);
            let sig = robust_signal(&trace, &f)?;
            match output {
                Some(path) => sig.write_csv(std::fs::File::create(path)?)?,
                None => sig.write_csv(std::io::stdout().lock())?,
            }
            Ok(0)
        }
        Command::OracleCheck { count, max_depth, max_segments, seed } => {
            oracle_check(count, max_depth, max_segments, seed)
        }
        Command::Bench { sizes, formula, repetitions, seed } => {
            let f = parse(&formula)?;
            let rows = bench(&sizes, &f, repetitions, seed)?;
            let mut out = std::io::stdout().lock();
            Ok(if print_bench(&mut out, &rows)? { 0 } else { 1 })
        }
        Command::Falsify { config, report, trials } => {
            let mut cfg = ExperimentConfig::from_json(&std::fs::read_to_string(config)?)?;
            if let Some(n) = trials {
                cfg.trials = n;
            }
            let rep = run_experiment(&cfg)?;
            print!("{}", rep.to_table());
            if let Some(path) = report {
                std::fs::write(path, rep.to_json()?)?;
            }
            Ok(0)
        }
    }
}

fn warn_horizon(trace: &Trace, f: &Formula) {
    let h = f.temporal_horizon();
    if h > trace.horizon() {
        eprintln!(
            "warning: formula looks {h} time units ahead but the trace ends at {}; the last sample is held",
            trace.horizon()
        );
    }
}

/// A trace and formula to evaluate with both engine and oracle.
#[derive(Clone, Debug)]
pub struct Instance {
    pub trace: Trace,
    pub formula: Formula,
}

/// `Ok(None)` when engine and oracle agree, otherwise a description of the difference.
pub fn compare(inst: &Instance, cfg: &OracleConfig) -> Result<Option<String>> {
    let tol = if inst.formula.is_averaging_free() { EXACT_TOLERANCE } else { AVERAGED_TOLERANCE };
    let e = evaluate(&inst.trace, &inst.formula);
    let o = oracle_evaluate(&inst.trace, &inst.formula, cfg);
    Ok(match (e, o) {
        (Ok(e), Ok(o)) if agree(e, o, tol) => None,
        (Ok(e), Ok(o)) => Some(format!("engine pos={} neg={}, oracle pos={} neg={}", e.pos, e.neg, o.pos, o.neg)),
        (Err(Error::Unsupported(_)), Err(_)) => None,
        (e, o) => Some(format!("engine {:?}, oracle {:?}", e.map_err(|x| x.to_string()), o.map_err(|x| x.to_string()))),
    })
}

fn agree(a: RobustnessPair, b: RobustnessPair, tol: f64) -> bool {
    a.pos.approx_eq(b.pos, tol) && a.neg.approx_eq(b.neg, tol)
}

/// The seeded instance stream used by `oracle-check`.
pub fn instances(count: usize, max_depth: usize, max_segments: usize, seed: u64) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tg = TraceGen { max_segments, ..TraceGen::default() };
    let fg = FormulaGen { max_depth, ..FormulaGen::default() };
    (0..count)
        .map(|_| {
            let trace = tg.sample(&mut rng);
            let formula = fg.sample(&mut rng);
            Instance { trace, formula }
        })
        .collect()
}

fn oracle_check(count: usize, max_depth: usize, max_segments: usize, seed: u64) -> Result<i32> {
    let cfg = OracleConfig::default();
    let start = Instant::now();
    let insts = instances(count, max_depth, max_segments, seed);
    let results: Vec<Option<String>> = insts
        .par_iter()
        .map(|i| compare(i, &cfg))
        .collect::<Result<_>>()?;
    let bad: Vec<usize> = results.iter().enumerate().filter_map(|(i, r)| r.as_ref().map(|_| i)).collect();
    println!(
        "oracle-check: {} instances, {} mismatches, {:.2}s",
        count,
        bad.len(),
        start.elapsed().as_secs_f64()
    );
    let Some(&first) = bad.first() else {
        return Ok(0);
    };
    println!("first mismatch: instance #{first}: {}", results[first].as_ref().unwrap());
    let small = shrink(&insts[first], &cfg);
    println!("minimized formula: {}", small.formula);
    println!("minimized trace:");
    let mut out = std::io::stdout().lock();
    small.trace.to_csv_writer(&mut out)?;
    if let Ok(Some(msg)) = compare(&small, &cfg) {
        println!("{msg}");
    }
    Ok(1)
}

/// Greedily shrinks a failing instance: replaces subformulas by their
/// children and drops trace rows while the mismatch persists.
pub fn shrink(inst: &Instance, cfg: &OracleConfig) -> Instance {
    let fails = |i: &Instance| matches!(compare(i, cfg), Ok(Some(_)));
    let mut cur = inst.clone();
    loop {
        let mut progressed = false;
        for f in smaller_formulas(&cur.formula) {
            let cand = Instance { trace: cur.trace.clone(), formula: f };
            if fails(&cand) {
                cur = cand;
                progressed = true;
                break;
            }
        }
        let rows = trace_rows(&cur.trace);
        for skip in (1..rows.len()).rev() {
            let mut r = rows.clone();
            r.remove(skip);
            if let Some(t) = rows_to_trace(&cur.trace, &r) {
                let cand = Instance { trace: t, formula: cur.formula.clone() };
                if fails(&cand) {
                    cur = cand;
                    progressed = true;
                    break;
                }
            }
        }
        if !progressed {
            return cur;
        }
    }
}

fn smaller_formulas(f: &Formula) -> Vec<Formula> {
    let mut out: Vec<Formula> = f.children().into_iter().cloned().collect();
    for i in 0..f.children().len() {
        for c in smaller_formulas(f.children()[i]) {
            let mut g = f.clone();
            *g.children_mut()[i] = c;
            out.push(g);
        }
    }
    out
}

fn trace_rows(t: &Trace) -> Vec<f64> {
    let mut times: Vec<f64> = t
        .variables()
        .iter()
        .flat_map(|v| t.channel(v).unwrap().steps().iter().map(|s| s.0))
        .collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    times
}

fn rows_to_trace(t: &Trace, times: &[f64]) -> Option<Trace> {
    let vars = t.variables().to_vec();
    let cols: Vec<Vec<f64>> = vars
        .iter()
        .map(|v| {
            let c = t.channel(v).unwrap();
            times.iter().map(|&x| c.value_at(x).map(|e| e.value()).unwrap_or(0.0)).collect()
        })
        .collect();
    Trace::from_samples(times, &vars, &cols).ok()
}

/// Median wall time of `robust_signal` per trace size.
#[derive(Clone, Debug)]
pub struct BenchRow {
    pub size: usize,
    pub median_seconds: f64,
}

pub fn bench(sizes: &[usize], f: &Formula, repetitions: usize, seed: u64) -> Result<Vec<BenchRow>> {
    if repetitions == 0 {
        return Err(Error::Config("repetitions must be at least 1".into()));
    }
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::Config("sizes must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tg = TraceGen { variables: f.variables().into_iter().collect(), ..TraceGen::default() };
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let mut times = Vec::with_capacity(repetitions);
        for _ in 0..repetitions {
            let trace = tg.sample_with_len(&mut rng, n);
            let start = Instant::now();
            std::hint::black_box(robust_signal(&trace, f)?);
            times.push(start.elapsed().as_secs_f64());
        }
        times.sort_by(f64::total_cmp);
        rows.push(BenchRow { size: n, median_seconds: median(&times) });
    }
    Ok(rows)
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Least-squares slope of log(time) against log(size).
pub fn fit_exponent(rows: &[BenchRow]) -> Option<f64> {
    if rows.len() < 2 {
        return None;
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| ((r.size as f64).ln(), r.median_seconds.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Prints the table; false when some doubling step grew by more than [`MAX_DOUBLING_RATIO`].
fn print_bench<W: Write>(out: &mut W, rows: &[BenchRow]) -> Result<bool> {
    writeln!(out, "{:>10}  {:>14}  {:>8}", "segments", "median [ms]", "ratio")?;
    let mut ok = true;
    for (i, r) in rows.iter().enumerate() {
        let ratio = if i == 0 {
            "".to_string()
        } else {
            let prev = &rows[i - 1];
            let q = r.median_seconds / prev.median_seconds;
            let doubled = r.size == 2 * prev.size;
            if doubled && q > MAX_DOUBLING_RATIO {
                ok = false;
                format!("{q:.3} FAIL")
            } else {
                format!("{q:.3}")
            }
        };
        writeln!(out, "{:>10}  {:>14.3}  {:>8}", r.size, r.median_seconds * 1e3, ratio)?;
    }
    if let Some(k) = fit_exponent(rows) {
        writeln!(out, "fitted exponent: {k:.3}")?;
    }
    Ok(ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_of_linear_data() {
        let rows: Vec<BenchRow> = [1000usize, 10_000, 100_000]
            .iter()
            .map(|&n| BenchRow { size: n, median_seconds: n as f64 * 1e-6 })
            .collect();
        assert!((fit_exponent(&rows).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(fit_exponent(&rows[..1]), None);
    }

    #[test]
    fn doubling_failure_is_flagged() {
        let rows = vec![
            BenchRow { size: 10, median_seconds: 1.0 },
            BenchRow { size: 20, median_seconds: 3.0 },
        ];
        let mut out = Vec::new();
        assert!(!print_bench(&mut out, &rows).unwrap());
        assert!(String::from_utf8(out).unwrap().contains("FAIL"));
    }

    #[test]
    fn shrinking_candidates() {
        let f = parse("F[0,1] (a >= 0 & b >= 0)").unwrap();
        let c: Vec<String> = smaller_formulas(&f).iter().map(|g| g.to_string()).collect();
        assert!(c.contains(&"a >= 0 & b >= 0".to_string()));
        assert!(c.contains(&"F[0,1] a >= 0".to_string()));
    }

    #[test]
    fn bench_rejects_zero_repetitions() {
        let f = parse("x >= 0").unwrap();
        assert!(bench(&[10], &f, 0, 0).is_err());
        assert_eq!(bench(&[10], &f, 1, 0).unwrap().len(), 1);
    }
}
