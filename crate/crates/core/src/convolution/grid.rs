use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::logmath::{log_tail_diff, LogSumExp};
use crate::tail::LogTail;

use super::SumTail;

/// Log pmf of `λX` rounded down (`floor`) or up to multiples of `h`, on
/// `0..=k_max` plus a final overflow bucket.
fn lattice_pmf(g: &dyn LogTail, lambda: f64, h: f64, k_max: usize, floor: bool) -> Vec<f64> {
    let at = |k: usize| k as f64 * h / lambda;
    let mut out = Vec::with_capacity(k_max + 2);
    for k in 0..=k_max {
        let v = if floor {
            // P(kh <= λX < (k+1)h)
            log_tail_diff(g.g_left(at(k)), g.g_left(at(k + 1)))
        } else if k == 0 {
            // P(λX <= 0)
            log_tail_diff(0.0, g.g(0.0))
        } else {
            // P((k-1)h < λX <= kh)
            log_tail_diff(g.g(at(k - 1)), g.g(at(k)))
        };
        out.push(v);
    }
    let rest = if floor { -g.g_left(at(k_max + 1)) } else { -g.g(at(k_max)) };
    out.push(rest);
    out
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    // both carry an overflow bucket in the last slot
    let k = a.len() - 1;
    let mut out: Vec<f64> = (0..k)
        .into_par_iter()
        .map(|s| {
            let mut acc = LogSumExp::new();
            for i in 0..=s {
                acc.add(a[i] + b[s - i]);
            }
            acc.value()
        })
        .collect();
    // overflow: P(A + B >= k) summed directly, so deep tails keep their precision
    let mut suffix = vec![f64::NEG_INFINITY; k + 2];
    for j in (0..=k).rev() {
        suffix[j] = crate::logmath::log_add(suffix[j + 1], b[j]);
    }
    let mut over = LogSumExp::new();
    for i in 0..k {
        over.add(a[i] + suffix[k - i]);
    }
    over.add(a[k] + suffix[0]);
    let over = over.value();
    out.push(over);
    out
}

fn one_side(specs: &[&dyn LogTail], weights: &[f64], m: f64, cells: usize, floor: bool) -> f64 {
    let n = weights.len();
    let h = m / cells as f64;
    let mut acc = lattice_pmf(specs[0], weights[0], h, cells, floor);
    for j in 1..n - 1 {
        let next = lattice_pmf(specs[j], weights[j], h, cells, floor);
        acc = convolve(&acc, &next);
    }
    let last = specs[n - 1];
    let ln = weights[n - 1];
    let mut total = LogSumExp::new();
    for k in 0..=cells {
        let rest = m * (cells - k) as f64 / cells as f64 / ln;
        total.add(acc[k] - last.g(rest));
    }
    // the overflow bucket already has the partial sum above m
    total.add(acc[cells + 1]);
    total.value().min(0.0)
}

/// Bracket for `ln P(Σ λ_j X_j > m)` by lattice rounding of all but the last
/// coordinate: rounding down gives the lower bound, rounding up the upper one.
pub fn sum_tail_grid(specs: &[&dyn LogTail], weights: &[f64], m: f64, cells: usize) -> Result<SumTail> {
    if specs.len() != weights.len() || specs.len() < 2 {
        return domain("need matching specs and weights, n >= 2");
    }
    if !(m >= 0.0 && m.is_finite()) {
        return domain(format!("threshold must be finite and >= 0, got {m}"));
    }
    if m == 0.0 {
        // P(Σ > 0) = 1 - Π P(X_j = 0)
        let all_zero: f64 = specs.iter().map(|g| crate::logmath::log1m_exp_neg(g.g(0.0))).sum();
        let v = crate::logmath::log1m_exp_neg(-all_zero);
        return Ok(SumTail { log_lo: v, log_hi: v, method: "grid".into() });
    }
    let cells = cells.max(2);
    let lo = one_side(specs, weights, m, cells, true);
    let hi = one_side(specs, weights, m, cells, false);
    Ok(SumTail { log_lo: lo.min(hi), log_hi: hi, method: "grid".into() })
}
