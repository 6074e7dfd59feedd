use crate::calculus::region::{region_contains, validate_weights};
use crate::calculus::{classify_tail, concavity_set, Regime};
use crate::error::{Error, Result};
use crate::tail::LogTail;

use super::osc::{GapScan, WitnessOptions};
use super::{geometric_grid, Trace, WitnessReport};

const PROBES_PER_AXIS: usize = 5;

/// Every point of a `PROBES_PER_AXIS`-per-axis grid over the box lies in the
/// region at threshold `n g(m) + slack`.
fn box_in_region(g: &dyn LogTail, axes: &[(f64, f64)], weights: &[f64], m: f64, slack: f64) -> bool {
    let n = weights.len();
    let k = PROBES_PER_AXIS;
    let total = k.pow(axes.len() as u32);
    let mut xs = vec![0.0; axes.len()];
    (0..total).all(|mut idx| {
        for (x, &(lo, hi)) in xs.iter_mut().zip(axes) {
            *x = lo + (hi - lo) * (idx % k) as f64 / (k - 1) as f64;
            idx /= k;
        }
        region_contains(g, &xs, weights, m, slack / n as f64)
    })
}

fn sorted(weights: &[f64], descending: bool) -> Vec<f64> {
    let mut w = weights.to_vec();
    w.sort_by(|a, b| if descending { b.total_cmp(a) } else { a.total_cmp(b) });
    w
}

/// n-variable witness: a box inside `L^g_{m,·,λ}` whose product g-measure is
/// at least `η^{n-1}` (oscillating) or the first such box on the `m` grid
/// (nearly convex). Nearly concave tails use `n g(m) - g(m / λ_max)`.
pub fn ndim_witness(g: &dyn LogTail, weights: &[f64], d: f64, eta: f64, opts: &WitnessOptions) -> Result<WitnessReport> {
    validate_weights(weights)?;
    if !(eta > 0.0) || !(d > 0.0) {
        return Err(Error::Domain(format!("need eta > 0 and d > 0, got eta = {eta}, d = {d}")));
    }
    let class = classify_tail(g, opts.x_max, &opts.classify)?;
    match class.regime {
        Regime::Oscillating => oscillating(g, weights, d, eta, opts),
        Regime::NearlyConvex { delta } => nearly_convex(g, weights, d, eta, delta, opts),
        Regime::NearlyConcave => Ok(nearly_concave(g, weights, d, eta, opts)),
    }
}

fn nearly_concave(g: &dyn LogTail, weights: &[f64], d: f64, eta: f64, opts: &WitnessOptions) -> WitnessReport {
    let n = weights.len() as f64;
    let lmax = weights.iter().copied().fold(0.0, f64::max);
    let mut best = (1.0, f64::NEG_INFINITY);
    for m in geometric_grid(1.0, 0.8 * opts.x_max, opts.m_ratio) {
        let v = n * g.g(m) - g.g(m / lmax);
        if v > best.1 {
            best = (m, v);
        }
    }
    WitnessReport {
        regime: "nearly_concave".into(),
        d,
        eta,
        weights: weights.to_vec(),
        m: best.0,
        construction_measure: f64::NAN,
        set_measure: f64::NAN,
        slack: 0.0,
        certified_log_bound: best.1,
        certified: true,
        trace: Trace { case: Some("doubling".into()), ..Trace::default() },
    }
}

fn nearly_convex(g: &dyn LogTail, weights: &[f64], d: f64, eta: f64, delta: f64, opts: &WitnessOptions) -> Result<WitnessReport> {
    let w = sorted(weights, true);
    let n = w.len();
    let scan = GapScan::new(g, opts)?;
    let h = &scan.h;
    let de = delta.max(d);
    let slack = n as f64 * (d + 3.0 * de);
    let l_star = w[n - 2] / (w[n - 2] + w[n - 1]);
    let target = eta.powi(n as i32 - 1);
    let top = h.valid_upto;
    for m in geometric_grid(1e-3_f64.max(top * 1e-6), top, opts.m_ratio) {
        let s = h.g_inverse(h.eval(m) + 2.0 * de)?;
        let half = concavity_set(h, m, d)?;
        // The set is one symmetric interval for convex h; take its right end.
        let Some(right) = half.intervals.iter().find(|iv| iv.contains(m)).map(|iv| iv.hi) else { continue };
        // Raising the first n-2 coordinates to s must keep the dual coordinate positive.
        let lead: f64 = w[..n - 2].iter().sum();
        let u = right.min(m / l_star).min((m - lead * s) / w[n - 2]);
        if !(u > m) {
            continue;
        }
        let side = g.g_left(u) - g.g_left(m);
        let square = g.measure(m, s);
        let measure = square.powi(n as i32 - 2) * side;
        if !(measure >= target) {
            continue;
        }
        let mut axes = vec![(m, s); n - 2];
        axes.push((m, m + (u - m) * (1.0 - 1e-9)));
        if !box_in_region(g, &axes, &w, m, slack) {
            continue;
        }
        return Ok(WitnessReport {
            regime: "nearly_convex".into(),
            d,
            eta,
            weights: w,
            m,
            construction_measure: measure,
            set_measure: measure,
            slack,
            certified_log_bound: -slack + measure.ln(),
            certified: true,
            trace: Trace { s: Some(s), case: Some(format!("delta_eff = {de}")), ..Trace::default() },
        });
    }
    Err(Error::Range(format!("no box reaches eta^(n-1) = {target} below {top}; retry with a larger x_max")))
}

fn oscillating(g: &dyn LogTail, weights: &[f64], d: f64, eta: f64, opts: &WitnessOptions) -> Result<WitnessReport> {
    let w = sorted(weights, false);
    let n = w.len();
    let nf = n as f64;
    let scan = GapScan::new(g, opts)?;
    let h = &scan.h;
    let range = |what: &str| Error::Range(format!("{what} below {}; retry with a larger x_max", h.valid_upto));
    let m1 = scan.first_above(nf * eta).ok_or_else(|| range("no point with f > n eta"))?;
    let b = scan.first_at_most_after(m1, eta).ok_or_else(|| range("f never returns below eta after m1"))?;
    let m = scan.argmax_upto(b);
    let hm = h.eval(m);
    let delta = h.g_inverse(hm + eta)? - m;
    if !(m + (nf - 1.0) * delta <= b * (1.0 + 1e-9)) {
        return Err(Error::Inconclusive(format!("m + (n-1) delta = {} exceeds b = {b}", m + (nf - 1.0) * delta)));
    }
    let lo = (m - delta).max(0.0);
    let report = |a: f64, slack: f64, x0: Option<f64>, case: &str| {
        let side = g.measure(a, m);
        let measure = side.powi(n as i32 - 1);
        WitnessReport {
            regime: "oscillating".into(),
            d,
            eta,
            weights: w.clone(),
            m,
            construction_measure: measure,
            set_measure: measure,
            slack,
            certified_log_bound: -slack + measure.ln(),
            certified: true,
            trace: Trace {
                m1: Some(m1),
                b: Some(b),
                a: Some(a),
                delta_step: Some(delta),
                x0,
                case: Some(case.into()),
                ..Trace::default()
            },
        }
    };
    let x0 = scan.last_at_most_in(lo, m, eta);
    let Some(x0) = x0 else {
        let axes = vec![(lo, m); n - 1];
        if box_in_region(g, &axes, &w, m, 0.0) {
            return Ok(report(lo, 0.0, None, "f_above_eta"));
        }
        return Err(Error::Inconclusive("box [m - delta, m] failed re-validation".into()));
    };
    // ℓ is the affine piece of h through (x0, b).
    let mid = 0.5 * (m + b);
    let slope = if mid > m { (h.eval(mid) - hm) / (mid - m) } else { 0.0 };
    let ell = |x: f64| hm + slope * (x - m);
    let tol = d / (nf - 1.0);
    for k in (1..=40).rev() {
        let a = lo + delta * 2f64.powi(-k);
        if !(a < x0) || !(scan.f(a) <= eta) {
            continue;
        }
        let h_ell = std::iter::once(a)
            .chain(scan.xs.iter().copied().filter(|&x| x > a && x <= m))
            .all(|x| hm - h.eval(x) >= ell(m) - ell(x) - tol - 1e-12);
        if h_ell && box_in_region(g, &vec![(a, m); n - 1], &w, m, d) {
            return Ok(report(a, d, Some(x0), "f_at_most_eta"));
        }
    }
    Err(Error::Inconclusive(format!("no a in (m - delta, x0) = ({lo}, {x0}) passed the checks")))
}
