use proptest::prelude::*;

use super::*;
use crate::calculus::RegionMethod;
use crate::convolution::{ratio_log, RatioOptions};
use crate::tail::TailSpec;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn reduction_bound_examples() {
    let e = TailSpec::exponential(1.0);
    assert!(close(reduction_bound(&e, 5.0, 0.0).unwrap(), 10f64.ln(), 1e-9));
    let o = TailSpec::OscSquares;
    assert!(close(reduction_bound(&o, 9.0, 1.0).unwrap(), -2.0 + 24f64.ln(), 1e-9));
    assert!(close(reduction_bound_noniid(&e, &e, 5.0, 0.0, 0).unwrap(), 10f64.ln(), 1e-9));
}

#[test]
fn noniid_swap_symmetry() {
    let e = TailSpec::exponential(1.0);
    let p = TailSpec::pareto(2.0);
    for j in 0..2 {
        let a = reduction_bound_noniid(&e, &p, 5.0, 1.0, j).unwrap();
        let b = reduction_bound_noniid(&p, &e, 5.0, 1.0, 1 - j).unwrap();
        assert!(close(a, b, 1e-9), "{a} vs {b}");
    }
}

#[test]
fn ndim_bound_exp_three() {
    let e = TailSpec::exponential(1.0);
    let w = [1.0 / 3.0; 3];
    let b = reduction_bound_ndim(&e, 2.0, 0.0, &w, RegionMethod::default()).unwrap();
    assert!(b.certified);
    assert!(b.bound <= 18f64.ln() + 1e-9 && b.bound > 18f64.ln() - 0.02, "{b:?}");
    assert!(b.bound <= 25f64.ln());
    let mc = reduction_bound_ndim(&e, 2.0, 0.0, &w, RegionMethod::MonteCarlo { samples: 20_000, seed: 1 }).unwrap();
    assert!(!mc.certified);
}

#[test]
fn doubling_values() {
    let e = TailSpec::exponential(1.0);
    let s = doubling_scan(&e, 2, 1.0, 100.0, 1.1);
    assert!(s.points.iter().all(|p| p.1.abs() < 1e-9));
    let p = TailSpec::pareto(2.0);
    assert!(close(doubling_value(&p, 2, 10.0), 2.0 * (121.0f64 / 21.0).ln(), 1e-9));
}

#[test]
fn oscillating_eta_five() {
    let r = oscillating_construction(&TailSpec::OscSquares, 5.0, 1.0, &WitnessOptions::default()).unwrap();
    assert_eq!(r.trace.m1, Some(25.0));
    assert!(close(r.trace.b.unwrap(), 31.0, 1e-9));
    assert_eq!(r.m, 25.0);
    assert!(r.construction_measure >= 11.0 - 1e-9);
    assert!(r.set_measure >= r.construction_measure);
    assert!(r.certified_log_bound >= -2.0 + 11f64.ln());
    assert!(close(r.certified_log_bound, -r.slack + r.set_measure.ln(), 1e-12));
}

#[test]
fn oscillating_eta_ten_first_square() {
    // f(k²) = 2k + 1 first exceeds 20 at k = 10.
    let r = oscillating_construction(&TailSpec::OscSquares, 10.0, 1.0, &WitnessOptions::default()).unwrap();
    assert_eq!(r.trace.m1, Some(100.0));
    assert_eq!(r.m, 100.0);
    assert!(close(r.construction_measure, 21.0, 1e-9));
}

#[test]
fn oscillating_trace_revalidates() {
    let o = TailSpec::OscSquares;
    let opts = WitnessOptions::default();
    let r = oscillating_construction(&o, 7.0, 1.0, &opts).unwrap();
    let scan = osc::GapScan::new(&o, &opts).unwrap();
    let b = r.trace.b.unwrap();
    assert!(scan.f(b) <= 7.0 + 1e-9);
    let fm = scan.f(r.m);
    assert!(scan.xs.iter().filter(|&&x| x <= b).all(|&x| scan.f(x) <= fm));
    assert!(scan.f(r.trace.m1.unwrap()) > 14.0);
}

#[test]
fn oscillating_range_error() {
    let opts = WitnessOptions { x_max: 100.0, ..WitnessOptions::default() };
    let e = oscillating_construction(&TailSpec::OscSquares, 50.0, 1.0, &opts).unwrap_err();
    assert_eq!(e.code(), "range");
}

#[test]
fn convex_witness_exists() {
    for spec in [TailSpec::exponential(1.0), TailSpec::stretched_exp(2.0)] {
        for eta in [2.0, 5.0, 10.0] {
            let r = iid_witness(&spec, eta, 1.0, &WitnessOptions::default()).unwrap();
            assert_eq!(r.regime, "nearly_convex");
            assert!(r.set_measure >= eta);
        }
    }
}

#[test]
fn concave_witness_uses_doubling() {
    let p = TailSpec::pareto(2.0);
    let r = iid_witness(&p, 5.0, 1.0, &WitnessOptions::default()).unwrap();
    assert_eq!(r.regime, "nearly_concave");
    assert!(close(r.certified_log_bound, doubling_value(&p, 2, r.m), 1e-12));
}

#[test]
fn noniid_identical_specs_take_finite_beta() {
    let e = TailSpec::exponential(1.0);
    let r = noniid_witness(&e, &e, 1.0, 5.0, &NoniidOptions::default()).unwrap();
    assert_eq!(r.trace.case.as_deref(), Some("beta_below_cap"));
    assert!(r.trace.beta.unwrap().abs() < 1e-9);
}

#[test]
fn noniid_exp_osc_is_sound() {
    let e = TailSpec::exponential(1.0);
    let o = TailSpec::OscSquares;
    let r = noniid_witness(&e, &o, 1.0, 5.0, &NoniidOptions::default()).unwrap();
    let truth = ratio_log(&[e, o], &[0.5, 0.5], r.m, &RatioOptions::default()).unwrap();
    assert!(r.certified_log_bound <= truth.log_ratio_hi, "{r:?} {truth:?}");
}

#[test]
fn ndim_osc_box() {
    let o = TailSpec::OscSquares;
    let w = [0.2, 0.3, 0.5];
    let r = ndim_witness(&o, &w, 1.0, 5.0, &WitnessOptions::default()).unwrap();
    assert_eq!(r.m, 64.0);
    assert!(r.set_measure >= 25.0);
    assert!(close(r.set_measure, 289.0, 1e-6), "{r:?}");
    let est = crate::calculus::ndim_region_measure(&o, r.m, r.slack / 3.0, &r.weights, RegionMethod::default()).unwrap();
    assert!(est.hi >= r.set_measure * (1.0 - 1e-9), "{est:?}");
}

#[test]
fn ndim_convex_and_concave() {
    let e = TailSpec::exponential(1.0);
    let r = ndim_witness(&e, &[0.5, 0.3, 0.2], 1.0, 3.0, &WitnessOptions::default()).unwrap();
    assert_eq!(r.regime, "nearly_convex");
    assert!(r.set_measure >= 9.0);
    let p = TailSpec::pareto(2.0);
    let r = ndim_witness(&p, &[0.5, 0.3, 0.2], 1.0, 3.0, &WitnessOptions::default()).unwrap();
    assert_eq!(r.regime, "nearly_concave");
}

#[test]
fn best_bound_grows() {
    let p = TailSpec::pareto(2.0);
    let a = best_certified_bound(&p, 1.0, 1e2, 1.1).unwrap();
    let b = best_certified_bound(&p, 1.0, 1e3, 1.1).unwrap();
    assert!(b.bound >= a.bound);
}

fn family(i: usize) -> TailSpec {
    match i {
        0 => TailSpec::exponential(1.0),
        1 => TailSpec::pareto(2.0),
        2 => TailSpec::stretched_exp(2.0),
        3 => TailSpec::LogLog,
        _ => TailSpec::OscSquares,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn reduction_bound_is_sound(i in 0usize..5, m in 0.5f64..20.0, d in 0.0f64..2.0) {
        let g = family(i);
        let bound = reduction_bound(&g, m, d).unwrap();
        let truth = ratio_log(&[g], &[0.5, 0.5], m, &RatioOptions::default()).unwrap();
        prop_assert!(bound <= truth.log_ratio_hi + 1e-9, "bound {} truth {:?}", bound, truth);
    }
}
