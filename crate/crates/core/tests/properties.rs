mod common;

use avstl::formula::{parse, refine_always, refine_eventually, Formula, Interval};
use avstl::gen::{FormulaGen, TraceGen};
use avstl::oracle::{oracle_evaluate, oracle_robust_signal_samples, OracleConfig};
use avstl::robustness::{evaluate, robust_signal, sliding_window, WindowMode};
use avstl::signal::{FplSignal, PointwiseOp, Segment};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fpl(max_len: usize, constant: bool) -> impl Strategy<Value = FplSignal> {
    prop::collection::vec((1u32..8, -20i32..=20, -4i32..=4), 1..max_len).prop_map(move |raw| {
        let mut t = 0.0;
        let segs = raw
            .iter()
            .enumerate()
            .map(|(i, &(gap, v, k))| {
                if i > 0 {
                    t += gap as f64 * 0.25;
                }
                Segment::new(t, v as f64 * 0.5, if constant { 0.0 } else { k as f64 * 0.5 })
            })
            .collect();
        FplSignal::new(segs).unwrap()
    })
}

fn at(s: &FplSignal, t: f64) -> f64 {
    s.value_at(t).unwrap().value()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #[test]
    fn shift_moves_time(s in fpl(12, false), d in 0u32..40, t in 0u32..80) {
        let (d, t) = (d as f64 * 0.125, t as f64 * 0.1);
        prop_assert!(close(at(&s.shift(d).unwrap(), t), at(&s, t + d)));
    }

    #[test]
    fn pointwise_laws(a in fpl(10, false), b in fpl(10, false), c in fpl(10, false)) {
        for op in [PointwiseOp::Min, PointwiseOp::Max] {
            let ab = a.pointwise(&b, op);
            let ba = b.pointwise(&a, op);
            let l = ab.pointwise(&c, op);
            let r = a.pointwise(&b.pointwise(&c, op), op);
            let aa = a.pointwise(&a, op);
            for i in 0..1000 {
                let t = i as f64 * 0.013;
                prop_assert!(close(at(&ab, t), at(&ba, t)));
                prop_assert!(close(at(&l, t), at(&r, t)));
                prop_assert!(close(at(&aa, t), at(&a, t)));
                prop_assert!(close(at(&ab, t), op.apply(at(&a, t), at(&b, t))));
            }
        }
    }

    #[test]
    fn pointwise_keeps_steps(a in fpl(10, true), b in fpl(10, true)) {
        prop_assert!(a.min(&b).is_piecewise_constant());
        prop_assert!(a.max(&b).is_piecewise_constant());
    }

    #[test]
    fn area_is_additive_and_bounded(s in fpl(10, false), x in 0u32..40, y in 0u32..40, z in 0u32..40) {
        let mut p = [x as f64 * 0.3, y as f64 * 0.3, z as f64 * 0.3];
        p.sort_by(f64::total_cmp);
        let [a, b, c] = p;
        let whole = s.area(a, c).unwrap().value();
        let parts = s.area(a, b).unwrap().value() + s.area(b, c).unwrap().value();
        prop_assert!(close(whole, parts));
        if c > a {
            let samples: Vec<f64> = (0..=400).map(|i| at(&s, a + (c - a) * i as f64 / 400.0)).collect();
            // a left limit can undercut every sample at the right end
            let lo = samples.iter().copied().fold(f64::INFINITY, f64::min).min(s.left_limit(c));
            let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(s.left_limit(c));
            prop_assert!(whole >= (c - a) * lo - 1e-9 && whole <= (c - a) * hi + 1e-9);
        }
    }

    #[test]
    fn sliding_window_matches_dense_extremum(s in fpl(12, true), a in 0u32..6, len in 1u32..8) {
        let (a, b) = (a as f64 * 0.5, (a + len) as f64 * 0.5);
        let mx = sliding_window(&s, a, b, WindowMode::Max).unwrap();
        let mn = sliding_window(&s, a, b, WindowMode::Min).unwrap();
        for i in 0..60 {
            let t = i as f64 * 0.125;
            let pts: Vec<f64> = (0..=64).map(|k| at(&s, t + a + (b - a) * k as f64 / 64.0)).collect();
            let want_max = pts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let want_min = pts.iter().copied().fold(f64::INFINITY, f64::min);
            prop_assert!(close(at(&mx, t), want_max));
            prop_assert!(close(at(&mn, t), want_min));
        }
    }
}

#[test]
fn parse_display_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let fg = FormulaGen { max_depth: 6, ..FormulaGen::default() };
    for _ in 0..1000 {
        let f = fg.sample(&mut rng);
        assert_eq!(parse(&f.to_string()).unwrap(), f, "{f}");
    }
}

#[test]
fn abbreviations_match_their_expansion() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let tg = TraceGen::default();
    let fg = FormulaGen { max_depth: 3, ..FormulaGen::default() };
    for _ in 0..200 {
        let t = tg.sample(&mut rng);
        let f = fg.sample(&mut rng);
        let phi = fg.sample_averaged_operand(&mut rng);
        let i = fg.interval(&mut rng, true);
        for (short, long) in [
            (Formula::eventually(i, phi.clone()), Formula::until(i, Formula::True, phi.clone())),
            (Formula::always(i, phi.clone()), Formula::release(i, Formula::False, phi.clone())),
        ] {
            assert_eq!(evaluate(&t, &short).unwrap(), evaluate(&t, &long).unwrap(), "{short}");
        }
        assert_eq!(evaluate(&t, &f).unwrap(), evaluate(&t, &f.desugar()).unwrap(), "{f}");
    }
}

#[test]
fn channel_signs_exclusion_and_slopes() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let tg = TraceGen::default();
    let fg = FormulaGen::default();
    for _ in 0..300 {
        let t = tg.sample(&mut rng);
        let f = fg.sample(&mut rng);
        let s = robust_signal(&t, &f).unwrap();
        for g in s.pos.segments() {
            assert!(g.value >= -1e-12 && (g.slope == 0.0 || g.value.is_finite()), "{f}");
        }
        assert!(s.neg.segments().iter().all(|g| g.value <= 1e-12), "{f}");
        if f.is_averaging_free() {
            assert!(s.pos.is_piecewise_constant() && s.neg.is_piecewise_constant(), "{f}");
            let mut times = s.pos.breakpoints();
            times.extend(s.neg.breakpoints());
            for x in times {
                let r = s.at(x).unwrap();
                assert!(!(r.pos.value() > 0.0 && r.neg.value() < 0.0), "{f} at {x}");
            }
        }
    }
}

#[test]
fn refinement_keeps_single_averaging_layer() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let fg = FormulaGen::default();
    for _ in 0..200 {
        let phi = fg.sample_plain(&mut rng);
        let i = fg.interval(&mut rng, false);
        let (f, path) = fg.positive_context(&mut rng, Formula::eventually(i, phi.clone()), 2);
        assert!(refine_eventually(&f, &path).unwrap().averaged_depth() <= 1);
        let (f, path) = fg.positive_context(&mut rng, Formula::always(i, phi), 2);
        assert!(refine_always(&f, &path, 1.0).unwrap().averaged_depth() <= 1);
    }
}

#[test]
fn logical_monotonicity_in_positive_contexts() {
    // phi' = phi | psi has pos >= pos(phi) everywhere; contexts must preserve the order.
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let tg = TraceGen::default();
    let fg = FormulaGen { max_depth: 2, ..FormulaGen::default() };
    for _ in 0..300 {
        let t = tg.sample(&mut rng);
        let phi = fg.sample_averaged_operand(&mut rng);
        let stronger = Formula::or(phi.clone(), fg.sample_averaged_operand(&mut rng));
        let layers = rng.random_range(1..=3);
        let (c1, path) = fg.positive_context(&mut rng, phi, layers);
        let mut c2 = c1.clone();
        set(&mut c2, &path, stronger);
        let (a, b) = (evaluate(&t, &c1).unwrap(), evaluate(&t, &c2).unwrap());
        assert!(a.pos <= b.pos || a.pos.value() <= b.pos.value() + 1e-9, "{c1} vs {c2}");
    }
}

fn set(f: &mut Formula, path: &[usize], with: Formula) {
    match (path.split_first(), f) {
        (None, f) => *f = with,
        (Some((&i, rest)), Formula::And(l, r) | Formula::Or(l, r) | Formula::Until(_, l, r) | Formula::Release(_, l, r)) => {
            set(if i == 0 { l } else { r }, rest, with)
        }
        _ => unreachable!(),
    }
}

#[test]
fn oracle_samples_track_the_signal() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let tg = TraceGen { max_segments: 20, ..TraceGen::default() };
    let fg = FormulaGen { max_depth: 3, ..FormulaGen::default() };
    let cfg = OracleConfig::default();
    for _ in 0..20 {
        let t = tg.sample(&mut rng);
        let f = fg.sample(&mut rng);
        let s = robust_signal(&t, &f).unwrap();
        let times: Vec<f64> = (0..50).map(|_| rng.random_range(0.0..15.0)).collect();
        let samples = oracle_robust_signal_samples(&t, &f, &times, &cfg).unwrap();
        for (&x, o) in times.iter().zip(&samples) {
            let e = s.at(x).unwrap();
            assert!(e.pos.approx_eq(o.pos, 1e-6) && e.neg.approx_eq(o.neg, 1e-6), "{f} at {x}");
        }
        let zero = oracle_robust_signal_samples(&t, &f, &[0.0], &cfg).unwrap()[0];
        assert_eq!(zero, oracle_evaluate(&t, &f, &cfg).unwrap());
    }
}

#[test]
fn oracle_equivalence_small_run() {
    let o = common::oracle_equivalence(200, 99);
    assert!(o.passed(), "{}", o.summary());
}

#[test]
fn interval_monotonicity_small_run() {
    let o = common::interval_monotonicity(100, 98);
    assert!(o.passed(), "{}", o.summary());
    let o = common::unbounded_limit(100, 97);
    assert!(o.passed(), "{}", o.summary());
}

#[test]
fn refinements_small_run() {
    let o = common::refinement_suite(100, 96);
    assert!(o.passed(), "{}", o.summary());
    assert!(o.premises > 0);
}

#[test]
fn duality_small_run() {
    let o = common::duality_suite(100, 95);
    assert!(o.passed(), "{}", o.summary());
}

#[test]
fn until_over_full_interval_with_top_is_future_sup() {
    let t = avstl::trace::Trace::from_csv_reader("time,x\n0,1\n1,3\n2,-2\n".as_bytes()).unwrap();
    let f = Formula::until(Interval::full(), Formula::True, parse("x >= 0").unwrap());
    let s = robust_signal(&t, &f).unwrap();
    assert_eq!(s.pos.segments(), &[Segment::new(0.0, 3.0, 0.0), Segment::new(2.0, 0.0, 0.0)]);
}
