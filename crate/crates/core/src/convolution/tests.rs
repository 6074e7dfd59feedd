use super::*;
use crate::tail::TailSpec;
use std::time::Instant;

fn exp1() -> TailSpec {
    TailSpec::exponential(1.0)
}

fn two(g0: &TailSpec, g1: &TailSpec, lambda: f64, m: f64) -> SumTail {
    sum_tail_two_log(g0, g1, lambda, m, &TwoSumOptions::default()).unwrap()
}

#[test]
fn erlang_two_closed_form() {
    let t = Instant::now();
    for m in [1.0, 5.0, 10.0, 20.0] {
        let s = two(&exp1(), &exp1(), 0.5, m);
        let exact = -2.0 * m + (1.0 + 2.0 * m).ln();
        assert!(s.contains(exact, 1e-12), "m {m}: {s:?} vs {exact}");
        assert!(s.width() <= 1e-4, "width {}", s.width());
    }
    assert!(t.elapsed().as_secs_f64() < 5.0);
    let s = two(&exp1(), &exp1(), 0.5, 1.0);
    assert!((s.mid() - (3f64.ln() - 2.0)).abs() < 1e-4);
}

#[test]
fn event_inclusion_and_single_tail() {
    let p = TailSpec::pareto(2.0);
    for m in [0.5, 2.0, 10.0, 50.0] {
        for lambda in [0.2, 0.5, 0.8] {
            let s = two(&exp1(), &p, lambda, m);
            assert!(s.log_hi >= -exp1().g(m) - p.g(m));
            assert!(s.log_hi >= -p.g(m / (1.0 - lambda)).max(0.0) - 1e-12);
            assert!(s.log_lo <= s.log_hi);
        }
    }
}

#[test]
fn zero_threshold() {
    let s = two(&exp1(), &TailSpec::pareto(2.0), 0.5, 0.0);
    assert_eq!((s.log_lo, s.log_hi), (0.0, 0.0));
    let l = TailSpec::lattice(vec![(0.0, 0.5), (1.0, 0.5)]).unwrap();
    let s = two(&l, &l, 0.5, 0.0);
    assert!(s.contains(0.75f64.ln(), 1e-12), "{s:?}");
}

#[test]
fn lattice_pair_is_exact() {
    let l = TailSpec::lattice(vec![(0.0, 0.5), (1.0, 0.5)]).unwrap();
    let s = two(&l, &l, 0.5, 0.75);
    assert!((s.log_lo - 0.25f64.ln()).abs() < 1e-12 && (s.log_hi - 0.25f64.ln()).abs() < 1e-12);
    let e = exact_lattice_convolution(&[l.clone(), l.clone()], &[0.5, 0.5], 0.75, 1000).unwrap();
    assert_eq!(to_f64(&e), 0.25);
    assert_eq!(to_f64(&exact_lattice_convolution(&[l.clone(), l.clone()], &[0.5, 0.5], -1.0, 1000).unwrap()), 1.0);
    let a = TailSpec::lattice(vec![(2.0, 1.0)]).unwrap();
    let b = TailSpec::lattice(vec![(3.0, 1.0)]).unwrap();
    let ab = |m| to_f64(&exact_lattice_convolution(&[a.clone(), b.clone()], &[0.25, 0.75], m, 10).unwrap());
    assert_eq!(ab(2.74), 1.0);
    assert_eq!(ab(2.75), 0.0);
    assert!(matches!(
        exact_lattice_convolution(&[l.clone(), l.clone(), l], &[0.3, 0.3, 0.4], 1.0, 4),
        Err(crate::Error::Resource(_))
    ));
}

#[test]
fn at_least_event() {
    let l = TailSpec::lattice(vec![(0.0, 0.5), (1.0, 0.5)]).unwrap();
    let geq = sum_tail_two_event(&l, &l, 0.5, 1.0, Event::AtLeast, &TwoSumOptions::default()).unwrap();
    assert!((geq.log_lo - 0.25f64.ln()).abs() < 1e-12);
    let gt = sum_tail_two_event(&l, &l, 0.5, 1.0, Event::Greater, &TwoSumOptions::default()).unwrap();
    assert_eq!(gt.log_hi, f64::NEG_INFINITY);
    let e = sum_tail_two_event(&exp1(), &exp1(), 0.5, 5.0, Event::AtLeast, &TwoSumOptions::default()).unwrap();
    assert!(e.contains(-10.0 + 11f64.ln(), 1e-12));
}

#[test]
fn erlang_three() {
    let w = [1.0 / 3.0; 3];
    let s = sum_tail_n_log(&exp1(), &w, 2.0, SumMethod::default()).unwrap();
    let exact = 25f64.ln() - 6.0;
    assert!(s.contains(exact, 1e-4), "{s:?}");
}

#[test]
fn grid_matches_two_variable_path() {
    let a = sum_tail_n_log(&exp1(), &[0.5, 0.5], 1.0, SumMethod::default()).unwrap();
    let b = two(&exp1(), &exp1(), 0.5, 1.0);
    assert!(a.log_lo <= b.log_hi && b.log_lo <= a.log_hi, "{a:?} {b:?}");
    let p = TailSpec::pareto(2.0);
    let a = sum_tail_n_log(&p, &[0.3, 0.7], 10.0, SumMethod::default()).unwrap();
    let b = two(&p, &p, 0.3, 10.0);
    assert!(a.log_lo <= b.log_hi && b.log_lo <= a.log_hi, "{a:?} {b:?}");
}

#[test]
fn ratio_rows() {
    let r = ratio_log(&[exp1()], &[0.5, 0.5], 10.0, &RatioOptions::default()).unwrap();
    assert!(r.log_ratio_lo <= 21f64.ln() && 21f64.ln() <= r.log_ratio_hi);
    assert_eq!(r.log_ratio_lo, r.log_sum_tail_lo - r.log_product_tail);
    assert_eq!(r.csv_record().len(), RatioSample::CSV_HEADER.len());
    let p = TailSpec::pareto(2.0);
    let r = ratio_log(&[p], &[0.5, 0.5], 10.0, &RatioOptions::default()).unwrap();
    assert!(r.log_ratio_hi >= (11f64.powi(4) / 21f64.powi(2)).ln() - 4f64.ln());
    let z = ratio_log(&[exp1()], &[0.5, 0.5], 0.0, &RatioOptions::default()).unwrap();
    assert_eq!((z.log_product_tail, z.log_ratio_lo, z.log_ratio_hi), (0.0, 0.0, 0.0));
}

#[test]
fn importance_sampling_erlang() {
    for (m, n) in [(2.0, 3usize), (10.0, 2)] {
        let w = vec![1.0 / n as f64; n];
        let e1 = exp1();
        let specs: Vec<&dyn crate::tail::LogTail> = vec![&e1; n];
        let est = sum_tail_mc(&specs, &w, m, 200_000, 9, 0.05).unwrap();
        let nm = n as f64 * m;
        let exact = if n == 3 { -nm + (1.0 + nm + nm * nm / 2.0).ln() } else { -nm + (1.0 + nm).ln() };
        let rel = (est.log_value.exp() / exact.exp() - 1.0).abs();
        assert!(rel <= 4.0 * est.rel_se, "n {n}: {est:?} vs {exact}");
        assert!(est.ess >= 100.0);
    }
}

#[test]
fn lattice_monte_carlo_agrees_with_enumeration() {
    let l = TailSpec::lattice(vec![(0.0, 0.2), (1.0, 0.3), (2.5, 0.5)]).unwrap();
    // dyadic weights keep float sums exact, so ties match the rational path
    let w = [0.25, 0.25, 0.5];
    for m in [0.5, 1.2, 2.0] {
        let exact = to_f64(&exact_lattice_convolution(&[l.clone(), l.clone(), l.clone()], &w, m, 1000).unwrap());
        let specs: Vec<&dyn crate::tail::LogTail> = vec![&l; 3];
        let est = sum_tail_mc(&specs, &w, m, 100_000, 2, 0.1).unwrap();
        let p = est.log_value.exp();
        assert!((p - exact).abs() <= 4.0 * est.rel_se * p, "m {m}: {p} vs {exact}");
        let g = sum_tail_grid(&specs, &w, m, 2000).unwrap();
        assert!(g.contains(exact.ln(), 1e-12), "m {m}: {g:?} vs {}", exact.ln());
    }
}

#[test]
fn monotone_in_threshold() {
    let p = TailSpec::OscSquares;
    let mut prev = 0.0;
    for i in 0..40 {
        let m = i as f64 * 0.7;
        let s = two(&p, &p, 0.4, m);
        assert!(s.log_lo <= prev + 1e-12);
        prev = s.log_hi;
    }
}
