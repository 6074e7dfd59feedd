//! Tails of weighted sums of independent variables, in log domain.

mod grid;
mod lattice;
mod mc;
mod two;

pub use grid::sum_tail_grid;
pub use lattice::{exact_lattice_convolution, to_f64};
pub use mc::{sum_tail_mc, McEstimate};
pub use two::{sum_tail_two_event, sum_tail_two_log, TwoSumOptions};

use serde::Serialize;

use crate::error::{domain, Result};
use crate::tail::{LogTail, TailSpec};

/// Which side of the threshold counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Event {
    /// `Σ λ_j X_j > m`
    Greater,
    /// `Σ λ_j X_j >= m`
    AtLeast,
}

/// Bracket `[log_lo, log_hi]` for a log-probability.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SumTail {
    pub log_lo: f64,
    pub log_hi: f64,
    pub method: String,
}

impl SumTail {
    pub fn contains(&self, v: f64, tol: f64) -> bool {
        self.log_lo - tol <= v && v <= self.log_hi + tol
    }

    pub fn width(&self) -> f64 {
        self.log_hi - self.log_lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.log_lo + self.log_hi)
    }
}

/// How to evaluate an n-variable sum tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SumMethod {
    /// Lattice rounding with `cells` steps below `m`.
    Grid { cells: usize },
    MonteCarlo { samples: usize, seed: u64, max_rel_se: f64 },
}

impl Default for SumMethod {
    fn default() -> Self {
        SumMethod::Grid { cells: 4000 }
    }
}

fn check_weights(weights: &[f64]) -> Result<()> {
    crate::calculus::region::validate_weights(weights)
}

/// `ln P(Σ λ_j X_j > m)` for i.i.d. coordinates.
pub fn sum_tail_n_log(spec: &dyn LogTail, weights: &[f64], m: f64, method: SumMethod) -> Result<SumTail> {
    let specs: Vec<&dyn LogTail> = vec![spec; weights.len()];
    sum_tail_n_mixed(&specs, weights, m, method)
}

pub fn sum_tail_n_mixed(specs: &[&dyn LogTail], weights: &[f64], m: f64, method: SumMethod) -> Result<SumTail> {
    check_weights(weights)?;
    if specs.len() != weights.len() {
        return domain("one spec per weight");
    }
    match method {
        SumMethod::Grid { cells } => sum_tail_grid(specs, weights, m, cells),
        SumMethod::MonteCarlo { samples, seed, max_rel_se } => {
            let e = sum_tail_mc(specs, weights, m, samples, seed, max_rel_se)?;
            // two standard errors either side
            let lo = e.log_value + (1.0 - 2.0 * e.rel_se).max(0.0).ln();
            let hi = (e.log_value + (1.0 + 2.0 * e.rel_se).ln()).min(0.0);
            Ok(SumTail { log_lo: lo, log_hi: hi, method: "montecarlo".into() })
        }
    }
}

/// One row of a ratio sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioSample {
    pub m: f64,
    pub log_sum_tail_lo: f64,
    pub log_sum_tail_hi: f64,
    pub log_product_tail: f64,
    pub log_ratio_lo: f64,
    pub log_ratio_hi: f64,
    pub method: String,
}

impl RatioSample {
    pub const CSV_HEADER: [&'static str; 7] = [
        "m",
        "log_sum_tail_lo",
        "log_sum_tail_hi",
        "log_product_tail",
        "log_ratio_lo",
        "log_ratio_hi",
        "method",
    ];

    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.m.to_string(),
            self.log_sum_tail_lo.to_string(),
            self.log_sum_tail_hi.to_string(),
            self.log_product_tail.to_string(),
            self.log_ratio_lo.to_string(),
            self.log_ratio_hi.to_string(),
            self.method.clone(),
        ]
    }
}

/// Options for [`ratio_log`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RatioOptions {
    pub two: TwoSumOptions,
    pub n: SumMethod,
}

/// Log of `P(Σ λ_j X_j > m) / Π P(X_j > m)`; a single spec is broadcast.
pub fn ratio_log(specs: &[TailSpec], weights: &[f64], m: f64, opts: &RatioOptions) -> Result<RatioSample> {
    check_weights(weights)?;
    let specs: Vec<&dyn LogTail> = match specs.len() {
        1 => vec![&specs[0] as &dyn LogTail; weights.len()],
        k if k == weights.len() => specs.iter().map(|s| s as &dyn LogTail).collect(),
        k => return domain(format!("{k} specs for {} weights", weights.len())),
    };
    ratio_log_dyn(&specs, weights, m, opts)
}

pub fn ratio_log_dyn(specs: &[&dyn LogTail], weights: &[f64], m: f64, opts: &RatioOptions) -> Result<RatioSample> {
    let tail = if specs.len() == 2 {
        sum_tail_two_log(specs[0], specs[1], weights[0], m, &opts.two)?
    } else {
        sum_tail_n_mixed(specs, weights, m, opts.n)?
    };
    let prod: f64 = specs.iter().map(|g| -g.g(m)).sum();
    Ok(RatioSample {
        m,
        log_sum_tail_lo: tail.log_lo,
        log_sum_tail_hi: tail.log_hi,
        log_product_tail: prod,
        log_ratio_lo: tail.log_lo - prod,
        log_ratio_hi: tail.log_hi - prod,
        method: tail.method,
    })
}

#[cfg(test)]
mod tests;
