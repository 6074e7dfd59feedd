//! Certified lower bounds on the tail ratio and witness thresholds.

mod ndim;
mod noniid;
mod osc;

pub use ndim::ndim_witness;
pub use noniid::{noniid_witness, NoniidOptions};
pub use osc::{iid_witness, oscillating_construction, WitnessOptions};

use serde::Serialize;

use crate::calculus::{concavity_set, concavity_set_noniid, ndim_region_measure, RegionMethod};
use crate::error::Result;
use crate::tail::LogTail;

/// Construction values recorded by a witness search.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Trace {
    pub m1: Option<f64>,
    pub b: Option<f64>,
    pub a: Option<f64>,
    pub eps: Option<f64>,
    pub x: Option<f64>,
    pub x_tilde: Option<f64>,
    pub s: Option<f64>,
    pub delta_step: Option<f64>,
    pub x0: Option<f64>,
    pub beta: Option<f64>,
    pub set_index: Option<usize>,
    pub case: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessReport {
    pub regime: String,
    pub d: f64,
    pub eta: f64,
    pub weights: Vec<f64>,
    pub m: f64,
    /// Measure of the constructed interval or box.
    pub construction_measure: f64,
    /// Measure of the set the bound is computed from.
    pub set_measure: f64,
    /// Threshold slack `c`: the set satisfies the defining sum `<= n g(m) + c`.
    pub slack: f64,
    pub certified_log_bound: f64,
    pub certified: bool,
    pub trace: Trace,
}

impl WitnessReport {
    pub const CSV_HEADER: [&'static str; 8] =
        ["regime", "m", "d", "eta", "measure", "certified_log_bound", "true_log_ratio_lo", "true_log_ratio_hi"];

    pub fn csv_record(&self, true_ratio: Option<(f64, f64)>) -> Vec<String> {
        let (lo, hi) = true_ratio.map_or((String::new(), String::new()), |(a, b)| (a.to_string(), b.to_string()));
        vec![
            self.regime.clone(),
            self.m.to_string(),
            self.d.to_string(),
            self.eta.to_string(),
            self.set_measure.to_string(),
            self.certified_log_bound.to_string(),
            lo,
            hi,
        ]
    }
}

/// `-2d + ln |L^g_{m,d}|_g`, a lower bound on `ln P(X+Y > 2m) - 2 ln P(X > m)`.
pub fn reduction_bound(g: &dyn LogTail, m: f64, d: f64) -> Result<f64> {
    let s = concavity_set(g, m, d)?;
    Ok(-2.0 * d + s.measure.ln())
}

/// `-2d + ln |L^j_{m,d}|_{g_j}`, a lower bound on
/// `ln P(X+Y > 2m) - ln P(X > m) - ln P(Y > m)`.
pub fn reduction_bound_noniid(g0: &dyn LogTail, g1: &dyn LogTail, m: f64, d: f64, j: usize) -> Result<f64> {
    let s = concavity_set_noniid(g0, g1, m, d, j)?;
    Ok(-2.0 * d + s.measure.ln())
}

/// Bound for `ln P(Σ λ_j X_j > m) - n ln P(X > m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NdimBound {
    pub bound: f64,
    pub measure: f64,
    pub certified: bool,
}

/// `-n·d + ln |L^g_{m,d,λ}|`; the grid path uses the inner measure and is
/// certified, Monte Carlo never is.
pub fn reduction_bound_ndim(g: &dyn LogTail, m: f64, d: f64, weights: &[f64], method: RegionMethod) -> Result<NdimBound> {
    let est = ndim_region_measure(g, m, d, weights, method)?;
    let n = weights.len() as f64;
    let measure = if est.certified { est.lo } else { est.value };
    Ok(NdimBound { bound: -n * d + measure.ln(), measure, certified: est.certified })
}

/// `n g(m) - g(n m)`.
pub fn doubling_value(g: &dyn LogTail, n: usize, m: f64) -> f64 {
    n as f64 * g.g(m) - g.g(n as f64 * m)
}

/// Geometric grid from `lo` to `hi` (both included) with the given ratio.
pub fn geometric_grid(lo: f64, hi: f64, ratio: f64) -> Vec<f64> {
    let mut out = vec![lo];
    let mut x = lo * ratio;
    while x < hi * (1.0 - 1e-12) {
        out.push(x);
        x *= ratio;
    }
    if hi > lo {
        out.push(hi);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoublingScan {
    pub n: usize,
    pub best_m: f64,
    pub best_value: f64,
    pub points: Vec<(f64, f64)>,
}

/// Scans `n g(m) - g(n m)` over a geometric grid; the smallest maximizer wins.
pub fn doubling_scan(g: &dyn LogTail, n: usize, m_lo: f64, m_hi: f64, ratio: f64) -> DoublingScan {
    let points: Vec<(f64, f64)> = geometric_grid(m_lo, m_hi, ratio).into_iter().map(|m| (m, doubling_value(g, n, m))).collect();
    let mut best = points[0];
    for &p in &points {
        if p.1 > best.1 {
            best = p;
        }
    }
    DoublingScan { n, best_m: best.0, best_value: best.1, points }
}

/// Best certified bound on the i.i.d. pair ratio over a geometric `m` grid in
/// `[1, 0.8 x_max]`, taking the larger of the reduction and doubling bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BestBound {
    pub m: f64,
    pub bound: f64,
    pub method: &'static str,
}

pub fn best_certified_bound(g: &dyn LogTail, d: f64, x_max: f64, ratio: f64) -> Result<BestBound> {
    let mut best = BestBound { m: f64::NAN, bound: f64::NEG_INFINITY, method: "none" };
    let mut grid = geometric_grid(1.0, 0.8 * x_max, ratio);
    grid.extend(g.knots(1.0, 0.8 * x_max));
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    for m in grid {
        let r = reduction_bound(g, m, d)?;
        let dbl = doubling_value(g, 2, m);
        let (b, method) = if r >= dbl { (r, "reduction") } else { (dbl, "doubling") };
        if b > best.bound {
            best = BestBound { m, bound: b, method };
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests;
