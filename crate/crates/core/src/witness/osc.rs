use crate::calculus::minorant::{gap, sample_points};
use crate::calculus::{classify_tail, concavity_set, convex_minorant, ClassifyPolicy, ConvexMinorant, Regime};
use crate::error::{Error, Result};
use crate::tail::LogTail;

use super::{doubling_scan, geometric_grid, Trace, WitnessReport};

/// Search controls shared by the witness constructions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WitnessOptions {
    pub x_max: f64,
    pub classify: ClassifyPolicy,
    /// Ratio of the geometric `m` grid.
    pub m_ratio: f64,
    pub eps_floor: f64,
}

impl Default for WitnessOptions {
    fn default() -> Self {
        Self {
            x_max: 1e4,
            classify: ClassifyPolicy::default(),
            m_ratio: 1.1,
            eps_floor: 1e-9,
        }
    }
}

/// The gap `f = g - h` sampled on the trusted region, with hull knots added.
pub(crate) struct GapScan<'a> {
    pub g: &'a dyn LogTail,
    pub h: ConvexMinorant,
    pub xs: Vec<f64>,
}

impl<'a> GapScan<'a> {
    pub fn new(g: &'a dyn LogTail, opts: &WitnessOptions) -> Result<Self> {
        let h = convex_minorant(g, opts.x_max, &opts.classify.grid)?;
        let mut xs = sample_points(g, opts.x_max, &opts.classify.grid);
        xs.extend(h.xs.iter().copied());
        xs.retain(|&x| x <= h.valid_upto);
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        Ok(Self { g, h, xs })
    }

    pub fn f(&self, x: f64) -> f64 {
        gap(self.g.g(x), self.h.eval(x))
    }

    /// First sample with `f > level`.
    pub fn first_above(&self, level: f64) -> Option<f64> {
        self.xs.iter().copied().find(|&x| self.f(x) > level)
    }

    /// `inf{x > from : f(x) <= level}`, refined by bisection inside the cell.
    pub fn first_at_most_after(&self, from: f64, level: f64) -> Option<f64> {
        let start = self.xs.partition_point(|&x| x <= from);
        let mut prev = from;
        for &x in &self.xs[start..] {
            if self.f(x) <= level {
                let (mut lo, mut hi) = (prev, x);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if self.f(mid) <= level {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                return Some(hi);
            }
            prev = x;
        }
        None
    }

    /// Smallest maximizer of `f` over the samples in `[0, b]`.
    pub fn argmax_upto(&self, b: f64) -> f64 {
        let mut best = (0.0, f64::NEG_INFINITY);
        for &x in self.xs.iter().take_while(|&&x| x <= b) {
            let v = self.f(x);
            if v > best.1 {
                best = (x, v);
            }
        }
        best.0
    }

    /// `sup{x in (lo, hi) : f(x) <= level}` over samples, `None` if empty.
    pub fn last_at_most_in(&self, lo: f64, hi: f64, level: f64) -> Option<f64> {
        self.xs.iter().copied().filter(|&x| x > lo && x < hi && self.f(x) <= level).last()
    }
}

fn range_error(what: &str, opts: &WitnessOptions) -> Error {
    Error::Range(format!("{what} inside the trusted region [0, {}]; retry with a larger x_max", 0.8 * opts.x_max))
}

/// Oscillating-regime witness: `m₁`, `b`, `m`, `a` and a shrinking `ε` with
/// `[a - ε, m]` inside the concavity set.
pub fn oscillating_construction(g: &dyn LogTail, eta: f64, d: f64, opts: &WitnessOptions) -> Result<WitnessReport> {
    if !(eta > 0.0) || !(d > 0.0) {
        return Err(Error::Domain(format!("need eta > 0 and d > 0, got eta = {eta}, d = {d}")));
    }
    let scan = GapScan::new(g, opts)?;
    let m1 = scan.first_above(2.0 * eta).ok_or_else(|| range_error("no point with f > 2 eta", opts))?;
    let b = scan.first_at_most_after(m1, eta).ok_or_else(|| range_error("f never returns below eta after m1", opts))?;
    let m = scan.argmax_upto(b);
    let a = g.g_inverse(g.g(m) - eta)?.min(m);
    let set = concavity_set(g, m, d)?;
    let mut eps = 1.0;
    while !set.contains_closed((a - eps).max(0.0), m) {
        eps *= 0.5;
        if eps < opts.eps_floor {
            return Err(Error::Precision {
                message: format!("no eps >= {} puts [a - eps, m] inside the concavity set", opts.eps_floor),
                achieved: (a, m),
            });
        }
    }
    let lo = (a - eps).max(0.0);
    Ok(WitnessReport {
        regime: "oscillating".into(),
        d,
        eta,
        weights: vec![0.5, 0.5],
        m,
        construction_measure: g.measure(lo, m),
        set_measure: set.measure,
        slack: 2.0 * d,
        certified_log_bound: -2.0 * d + set.measure.ln(),
        certified: true,
        trace: Trace { m1: Some(m1), b: Some(b), a: Some(a), eps: Some(eps), ..Trace::default() },
    })
}

/// i.i.d. pair witness, dispatched on the classified regime.
pub fn iid_witness(g: &dyn LogTail, eta: f64, d: f64, opts: &WitnessOptions) -> Result<WitnessReport> {
    let class = classify_tail(g, opts.x_max, &opts.classify)?;
    let top = 0.8 * opts.x_max;
    match class.regime {
        Regime::Oscillating => oscillating_construction(g, eta, d, opts),
        Regime::NearlyConvex { delta } => {
            for m in geometric_grid(1e-3_f64.max(top * 1e-6), top, opts.m_ratio) {
                let set = concavity_set(g, m, d)?;
                if set.measure >= eta {
                    return Ok(WitnessReport {
                        regime: "nearly_convex".into(),
                        d,
                        eta,
                        weights: vec![0.5, 0.5],
                        m,
                        construction_measure: set.measure,
                        set_measure: set.measure,
                        slack: 2.0 * d,
                        certified_log_bound: -2.0 * d + set.measure.ln(),
                        certified: true,
                        trace: Trace { beta: None, case: Some(format!("delta = {delta}")), ..Trace::default() },
                    });
                }
            }
            Err(range_error("no concavity set reaches eta", opts))
        }
        Regime::NearlyConcave => {
            let scan = doubling_scan(g, 2, 1.0, top, opts.m_ratio);
            Ok(WitnessReport {
                regime: "nearly_concave".into(),
                d,
                eta,
                weights: vec![0.5, 0.5],
                m: scan.best_m,
                construction_measure: f64::NAN,
                set_measure: f64::NAN,
                slack: 0.0,
                certified_log_bound: scan.best_value,
                certified: true,
                trace: Trace { case: Some("doubling".into()), ..Trace::default() },
            })
        }
    }
}
