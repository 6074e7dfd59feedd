use super::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn osc() -> TailSpec {
    TailSpec::OscSquares
}

fn two_point() -> TailSpec {
    TailSpec::lattice(vec![(0.0, 0.5), (1.0, 0.5)]).unwrap()
}

#[test]
fn closed_form_values() {
    let ln2 = 2f64.ln();
    assert_eq!(eval_g(&TailSpec::exponential(1.0), 2.0).unwrap(), 2.0);
    assert!((eval_g(&TailSpec::pareto(2.0), 1.0).unwrap() - 2.0 * ln2).abs() < 1e-15);
    assert_eq!(eval_g(&osc(), 4.0).unwrap(), 8.0);
    assert_eq!(eval_log_f(&TailSpec::exponential(1.0), 0.0).unwrap(), 0.0);
    assert_eq!(eval_log_f(&TailSpec::exponential(1.0), 1.0).unwrap(), -1.0);
    assert!((eval_log_f(&TailSpec::pareto(2.0), 3.0).unwrap() + 2.0 * 4f64.ln()).abs() < 1e-15);
    // cross-check against the tail probability itself
    let f = (1.0f64 + 1.0).powi(-2);
    assert!((eval_g(&TailSpec::pareto(2.0), 1.0).unwrap() + f.ln()).abs() < 1e-15);
}

#[test]
fn left_limits() {
    assert_eq!(g_left_limit(&TailSpec::exponential(1.0), 5.0).unwrap(), 5.0);
    assert_eq!(g_left_limit(&osc(), 4.0).unwrap(), 3.0);
    assert!((g_left_limit(&two_point(), 1.0).unwrap() - 2f64.ln()).abs() < 1e-15);
    assert!(g_left_limit(&osc(), 0.0).is_err());
}

#[test]
fn inverses() {
    assert_eq!(g_inverse(&TailSpec::exponential(1.0), 3.5).unwrap(), 3.5);
    assert_eq!(g_inverse(&osc(), 5.0).unwrap(), 4.0);
    assert_eq!(g_inverse(&osc(), 3.0).unwrap(), 1.0);
    assert_eq!(g_inverse(&osc(), 3.5).unwrap(), 4.0);
    assert_eq!(g_inverse(&osc(), 0.0).unwrap(), 0.0);
    let p = g_inverse(&TailSpec::pareto(2.0), 2.0 * 2f64.ln()).unwrap();
    assert!((p - 1.0).abs() < 1e-14);
    assert!(matches!(
        g_inverse(&TailSpec::exponential(1.0), f64::INFINITY),
        Err(Error::Unbounded(_))
    ));
}

#[test]
fn measures() {
    let e = TailSpec::exponential(1.0);
    assert_eq!(interval_g_measure(&e, 2.0, 7.0).unwrap(), 5.0);
    assert_eq!(interval_g_measure(&osc(), 4.0, 4.0).unwrap(), 5.0);
    let p = interval_g_measure(&TailSpec::pareto(2.0), 0.0, 1.0).unwrap();
    assert!((p - 2.0 * 2f64.ln()).abs() < 1e-15);
    assert!(interval_g_measure(&e, 3.0, 1.0).is_err());
    assert!(eval_g(&e, -1.0).is_err());
}

#[test]
fn osc_squares_knots() {
    assert_eq!(osc().knots(0.0, 30.0), vec![1.0, 4.0, 9.0, 16.0, 25.0]);
    assert_eq!(osc().knots(4.0, 9.0), vec![4.0, 9.0]);
    assert_eq!(osc().g(24.999), 24.0);
    assert_eq!(osc().g(25.0), 35.0);
}

#[test]
fn lattice_tail_and_atom_at_zero() {
    let l = two_point();
    assert!((l.g(0.0) - 2f64.ln()).abs() < 1e-15);
    assert_eq!(l.g(1.0), f64::INFINITY);
    assert!(l.is_compact());
    let atoms = l.lattice_atoms().unwrap();
    assert_eq!(atoms.len(), 2);
    assert!((atoms[0].1 - 0.5).abs() < 1e-15);
    assert!(TailSpec::lattice(vec![(0.0, 0.5), (1.0, 0.4)]).is_err());
    assert!(TailSpec::lattice(vec![(0.0, 0.0), (1.0, 1.0)]).is_err());
}

#[test]
fn piecewise_normalization() {
    let s = TailSpec::piecewise(Interpolation::Linear, vec![(1.0, 2.0), (2.0, 3.0)]).unwrap();
    assert_eq!(s.g(0.5), 1.0);
    assert_eq!(s.g_left(2.0), 3.0);
    assert_eq!(s.g(2.0), f64::INFINITY);
    let jump =
        TailSpec::piecewise(Interpolation::Linear, vec![(0.0, 0.0), (1.0, 1.0), (1.0, 4.0), (2.0, 5.0)])
            .unwrap();
    assert_eq!(jump.g_left(1.0), 1.0);
    assert_eq!(jump.g(1.0), 4.0);
    assert!(TailSpec::piecewise(Interpolation::Step, vec![(0.0, 0.0), (1.0, 2.0), (2.0, 1.0)]).is_err());
    assert!(TailSpec::piecewise(Interpolation::Step, vec![(0.0, 1.0), (1.0, 2.0)]).is_err());
}

#[test]
fn json_round_trip_and_unknown_fields() {
    let docs = [
        r#"{"family":"exponential","rate":1.0}"#,
        r#"{"family":"pareto","alpha":2.0}"#,
        r#"{"family":"stretched_exp","beta":2.0}"#,
        r#"{"family":"loglog"}"#,
        r#"{"family":"osc_squares"}"#,
        r#"{"family":"piecewise_logtail","interpolation":"step","knots":[[0,0],[1,2],[3,5]]}"#,
        r#"{"family":"lattice","atoms":[[0,0.5],[1,0.5]]}"#,
    ];
    for d in docs {
        let s = TailSpec::from_json(d).unwrap();
        let back = TailSpec::from_json(&s.to_json()).unwrap();
        assert_eq!(s, back);
    }
    assert!(TailSpec::from_json(r#"{"family":"exponential","rate":1.0,"x":1}"#).is_err());
    assert!(TailSpec::from_json(r#"{"family":"loglog","rate":1.0}"#).is_err());
    assert!(TailSpec::from_json(r#"{"family":"osc_squares","k":1}"#).is_err());
    assert!(TailSpec::from_json(r#"{"family":"exponential","rate":-1.0}"#).is_err());
}

#[test]
fn sampling_is_deterministic() {
    let s = TailSpec::pareto(2.0);
    let a = sample(&s, &mut ChaCha8Rng::seed_from_u64(7));
    let b = sample(&s, &mut ChaCha8Rng::seed_from_u64(7));
    assert_eq!(a.to_bits(), b.to_bits());
}

#[test]
fn exponential_sample_mean() {
    let s = TailSpec::exponential(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 100_000;
    let mean: f64 = (0..n).map(|_| sample(&s, &mut rng)).sum::<f64>() / n as f64;
    assert!((mean - 1.0).abs() < 0.03, "mean {mean}");
}

#[test]
fn osc_squares_mass_up_to_one() {
    // X never lands in (0, 1) and has an atom of mass 1 - e^{-3} at 1.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 100_000;
    let mut below = 0usize;
    let mut at_most = 0usize;
    for _ in 0..n {
        let x = sample(&osc(), &mut rng);
        below += (x < 1.0) as usize;
        at_most += (x <= 1.0) as usize;
    }
    assert_eq!(below, 0);
    let p = at_most as f64 / n as f64;
    assert!((p - (1.0 - (-3f64).exp())).abs() < 0.01, "p {p}");
}

#[test]
fn sampling_law_matches_tail() {
    let n = 100_000;
    let cases: Vec<(TailSpec, Vec<f64>)> = vec![
        (TailSpec::pareto(2.0), vec![0.5, 1.0, 3.0]),
        (TailSpec::stretched_exp(2.0), vec![0.3, 1.0]),
        (TailSpec::LogLog, vec![1.0, 10.0]),
        (osc(), vec![2.0, 5.0]),
        (uniform_unit(1000), vec![0.25, 0.5, 0.9]),
    ];
    for (i, (spec, xs)) in cases.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + i as u64);
        let draws: Vec<f64> = (0..n).map(|_| sample(spec, &mut rng)).collect();
        for &x in xs {
            let p = (-spec.g(x)).exp();
            let emp = draws.iter().filter(|&&v| v > x).count() as f64 / n as f64;
            let tol = 4.0 * (p * (1.0 - p) / n as f64).sqrt();
            assert!((emp - p).abs() <= tol, "{} at {x}: {emp} vs {p}", spec.name());
        }
    }
}

fn any_spec() -> impl Strategy<Value = TailSpec> {
    prop_oneof![
        (0.1f64..5.0).prop_map(TailSpec::exponential),
        (0.1f64..5.0).prop_map(TailSpec::pareto),
        (0.2f64..3.0).prop_map(TailSpec::stretched_exp),
        Just(TailSpec::LogLog),
        Just(TailSpec::OscSquares),
        Just(uniform_unit(64)),
        Just(TailSpec::piecewise(Interpolation::Step, vec![(0.0, 0.0), (0.5, 1.0), (1.5, 2.5), (4.0, 3.0)]).unwrap()),
    ]
}

proptest! {
    #[test]
    fn monotone_and_left_limits(spec in any_spec(), x in 0.0f64..50.0, dx in 0.0f64..10.0) {
        prop_assert!(spec.g(x) <= spec.g(x + dx));
        prop_assert!(spec.g_left(x) <= spec.g(x));
        if !matches!(spec, TailSpec::Lattice { .. }) {
            prop_assert_eq!(spec.g(0.0), 0.0);
        }
    }

    #[test]
    fn inverse_consistency(spec in any_spec(), x in 0.0f64..50.0, y in 0.0f64..30.0) {
        let xi = spec.g_inverse(y).unwrap();
        // loglog saturates once e^{e^y} leaves the float range
        prop_assume!(xi < f64::MAX);
        prop_assert!(spec.g(xi) >= y * (1.0 - 1e-12));
        let gx = spec.g(x);
        if gx.is_finite() {
            prop_assert!(spec.g_inverse(gx).unwrap() <= x * (1.0 + 1e-12) + 1e-12);
        }
    }

    #[test]
    fn step_measure_additive(a in 0.0f64..20.0, b in 0.0f64..20.0, c in 0.0f64..20.0) {
        let mut v = [a, b, c];
        v.sort_by(f64::total_cmp);
        let s = osc();
        // b must be a continuity point
        prop_assume!(s.g_left(v[1]) == s.g(v[1]));
        prop_assert_eq!(s.measure(v[0], v[2]), s.measure(v[0], v[1]) + s.measure(v[1], v[2]));
    }
}
