use serde::Serialize;

use crate::calculus::{classify_tail, concavity_set_average, concavity_set_noniid, ClassifyPolicy, IntervalSet, Regime};
use crate::error::{Error, Result};
use crate::tail::{AverageTail, LogTail};

use super::{geometric_grid, Trace, WitnessReport};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoniidOptions {
    pub beta_cap: f64,
    pub m_lo: f64,
    pub m_hi: f64,
    pub m_ratio: f64,
    pub x_max: f64,
    pub classify: ClassifyPolicy,
    /// Uniform probes per concavity set when estimating β.
    pub probes: usize,
}

impl Default for NoniidOptions {
    fn default() -> Self {
        Self {
            beta_cap: 50.0,
            m_lo: 1.0,
            m_hi: 8e3,
            m_ratio: 1.1,
            x_max: 1e4,
            classify: ClassifyPolicy::default(),
            probes: 512,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
struct BetaPoint {
    m: f64,
    beta: f64,
}

/// `p^j_m(x) = (g_j(x) + g_{1-j}(2m - x)) / 2`.
fn p(g0: &dyn LogTail, g1: &dyn LogTail, j: usize, m: f64, x: f64) -> f64 {
    let (a, b) = if j == 0 { (g0, g1) } else { (g1, g0) };
    0.5 * (a.g(x) + b.g(2.0 * m - x))
}

fn probes(g0: &dyn LogTail, g1: &dyn LogTail, m: f64, set: &IntervalSet, n: usize) -> Vec<f64> {
    let mut xs: Vec<f64> = (0..=n).map(|i| 2.0 * m * i as f64 / n as f64).collect();
    for k in g0.knots(0.0, 2.0 * m).into_iter().chain(g1.knots(0.0, 2.0 * m)) {
        xs.push(k);
        xs.push(2.0 * m - k);
    }
    for iv in &set.intervals {
        xs.push(iv.lo);
        xs.push(iv.hi);
    }
    xs.retain(|&x| (0.0..=2.0 * m).contains(&x) && set.contains(x));
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

/// Smallest probe maximizing `ḡ(m) - p¹_m(x)` over the average concavity set.
fn beta_at(g0: &dyn LogTail, g1: &dyn LogTail, m: f64, d: f64, n: usize) -> Result<(f64, f64)> {
    let avg = AverageTail { a: g0, b: g1 };
    let set = concavity_set_average(g0, g1, m, d)?;
    let gm = avg.g(m);
    let mut best = (m, 0.0);
    for x in probes(g0, g1, m, &set, n) {
        let v = gm - p(g0, g1, 1, m, x);
        if v > best.1 {
            best = (x, v);
        }
    }
    Ok(best)
}

/// `inf{y > x : p(y) - p(x) > eta}` over `(x, 2m]`, located on a grid and
/// refined by bisection.
fn s_point(g0: &dyn LogTail, g1: &dyn LogTail, j: usize, m: f64, x: f64, eta: f64, n: usize) -> Option<f64> {
    let px = p(g0, g1, j, m, x);
    let top = 2.0 * m;
    let mut ys: Vec<f64> = (1..=n).map(|i| x + (top - x) * i as f64 / n as f64).collect();
    for k in g0.knots(x, top).into_iter().chain(g1.knots(x, top)) {
        ys.push(k);
        ys.push(top - k);
    }
    ys.retain(|&y| y > x && y <= top);
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    let mut prev = x;
    for y in ys {
        if p(g0, g1, j, m, y) - px > eta {
            let (mut lo, mut hi) = (prev, y);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if p(g0, g1, j, m, mid) - px > eta {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Some(hi);
        }
        prev = y;
    }
    None
}

fn concave_route(g0: &dyn LogTail, g1: &dyn LogTail, d: f64, eta: f64, opts: &NoniidOptions) -> WitnessReport {
    let mut best = (opts.m_lo, f64::NEG_INFINITY);
    for m in geometric_grid(opts.m_lo, opts.m_hi, opts.m_ratio) {
        let v = g0.g(m) + g1.g(m) - g0.g(2.0 * m).min(g1.g(2.0 * m));
        if v > best.1 {
            best = (m, v);
        }
    }
    WitnessReport {
        regime: "nearly_concave".into(),
        d,
        eta,
        weights: vec![0.5, 0.5],
        m: best.0,
        construction_measure: f64::NAN,
        set_measure: f64::NAN,
        slack: 0.0,
        certified_log_bound: best.1,
        certified: true,
        trace: Trace { case: Some("doubling".into()), ..Trace::default() },
    }
}

/// Non-i.i.d. pair witness via the β dichotomy.
pub fn noniid_witness(g0: &dyn LogTail, g1: &dyn LogTail, d: f64, eta: f64, opts: &NoniidOptions) -> Result<WitnessReport> {
    if !(eta > 0.0) || !(d >= 0.0) {
        return Err(Error::Domain(format!("need eta > 0 and d >= 0, got eta = {eta}, d = {d}")));
    }
    if !(opts.beta_cap > eta) {
        return Err(Error::Domain(format!("beta cap {} must exceed eta = {eta}", opts.beta_cap)));
    }
    let avg = AverageTail { a: g0, b: g1 };
    let class = classify_tail(&avg, opts.x_max, &opts.classify)?;
    if class.regime == Regime::NearlyConcave {
        return Ok(concave_route(g0, g1, d, eta, opts));
    }
    let regime = match class.regime {
        Regime::Oscillating => "noniid_oscillating",
        _ => "noniid_nearly_convex",
    };
    let mut beta = 0.0_f64;
    let mut history = Vec::new();
    for m in geometric_grid(opts.m_lo, opts.m_hi, opts.m_ratio) {
        let (x, beta_m) = beta_at(g0, g1, m, d, opts.probes)?;
        beta = beta.max(beta_m);
        history.push(BetaPoint { m, beta: beta_m });
        if beta_m > opts.beta_cap {
            // x < m uses p¹; x > m mirrors to 2m - x, where p⁰(2m - x) = p¹(x).
            let (j, xs, mirrored) = if x > m { (0, 2.0 * m - x, Some(2.0 * m - x)) } else { (1, x, None) };
            let gj: &dyn LogTail = if j == 0 { g0 } else { g1 };
            let Some(s) = s_point(g0, g1, j, m, xs, eta, opts.probes) else { continue };
            let set = concavity_set_noniid(g0, g1, m, 0.0, j)?;
            if gj.measure(xs, s) >= 2.0 * eta && set.contains_closed(xs, s) {
                return Ok(WitnessReport {
                    regime: regime.into(),
                    d,
                    eta,
                    weights: vec![0.5, 0.5],
                    m,
                    construction_measure: gj.measure(xs, s),
                    set_measure: set.measure,
                    slack: 0.0,
                    certified_log_bound: set.measure.ln(),
                    certified: true,
                    trace: Trace {
                        x: Some(x),
                        x_tilde: mirrored,
                        s: Some(s),
                        beta: Some(beta_m),
                        set_index: Some(j),
                        case: Some("beta_above_cap".into()),
                        ..Trace::default()
                    },
                });
            }
            continue;
        }
        let d2 = 2.0 * d + beta;
        let set = concavity_set_noniid(g0, g1, m, d2, 0)?;
        if set.measure >= eta {
            return Ok(WitnessReport {
                regime: regime.into(),
                d,
                eta,
                weights: vec![0.5, 0.5],
                m,
                construction_measure: set.measure,
                set_measure: set.measure,
                slack: 2.0 * d2,
                certified_log_bound: -2.0 * d2 + set.measure.ln(),
                certified: true,
                trace: Trace { beta: Some(beta), set_index: Some(0), case: Some("beta_below_cap".into()), ..Trace::default() },
            });
        }
    }
    Err(Error::Range(format!(
        "no witness for m in [{}, {}]; beta trajectory: {}",
        opts.m_lo,
        opts.m_hi,
        serde_json::to_string(&history).unwrap_or_default()
    )))
}
