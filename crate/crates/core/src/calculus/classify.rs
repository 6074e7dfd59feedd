use serde::Serialize;

use super::minorant::{convex_minorant, gap, sample_points, ConvexMinorant, GridPolicy};
use crate::error::{Error, Result};
use crate::tail::LogTail;

/// Asymptotic regime of the gap `f = g - h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum Regime {
    NearlyConvex { delta: f64 },
    NearlyConcave,
    Oscillating,
}

/// Gap statistics over one dyadic window `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowStat {
    pub lo: f64,
    pub hi: f64,
    /// Largest `g(x) - h(x)`.
    pub max: f64,
    /// Smallest `g(x-) - h(x)`.
    pub min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evidence {
    pub valid_upto: f64,
    pub sup_gap: f64,
    pub early_max: f64,
    pub late_max: f64,
    /// Windows ordered from the right edge inward.
    pub windows: Vec<WindowStat>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    #[serde(flatten)]
    pub regime: Regime,
    pub evidence: Evidence,
    pub note: &'static str,
}

/// Thresholds for the finite-horizon verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyPolicy {
    pub grid: GridPolicy,
    pub windows: usize,
    /// Contact tolerance, relative to `max(1, g)`.
    pub contact_tol: f64,
    /// Boundedness slack: late max may exceed early max by this much.
    pub convex_abs: f64,
    pub convex_rel: f64,
    /// Minimal gap size for a concave verdict.
    pub concave_min_gap: f64,
    /// Required growth factor of the window max across all windows.
    pub oscillation_growth: f64,
}

impl Default for ClassifyPolicy {
    fn default() -> Self {
        Self {
            grid: GridPolicy::default(),
            windows: 6,
            contact_tol: 1e-6,
            convex_abs: 1e-6,
            convex_rel: 0.01,
            concave_min_gap: 1.0,
            oscillation_growth: 2.0,
        }
    }
}

const NOTE: &str = "finite-horizon verdict from gap statistics; not a proof of the limit";

pub fn evidence<T: LogTail + ?Sized>(
    g: &T,
    h: &ConvexMinorant,
    policy: &ClassifyPolicy,
) -> Evidence {
    let t = h.valid_upto;
    let xs: Vec<f64> = sample_points(g, h.x_max, &policy.grid)
        .into_iter()
        .filter(|&x| x <= t)
        .collect();
    let stats: Vec<(f64, f64, f64)> = xs
        .iter()
        .map(|&x| {
            let hx = h.eval(x);
            let left = if x == 0.0 { g.g(0.0) } else { g.g_left(x) };
            (x, gap(g.g(x), hx), gap(left, hx))
        })
        .collect();
    let max_over = |lo: f64, hi: f64| {
        stats
            .iter()
            .filter(|s| s.0 >= lo && s.0 <= hi)
            .map(|s| s.1)
            .fold(0.0f64, f64::max)
    };
    let windows = (0..policy.windows)
        .map(|j| {
            let hi = t * 0.5f64.powi(j as i32);
            let lo = hi * 0.5;
            let inside = stats.iter().filter(|s| s.0 >= lo && s.0 <= hi);
            let (mut max, mut min) = (f64::NEG_INFINITY, f64::INFINITY);
            for s in inside {
                max = max.max(s.1);
                min = min.min(s.2);
            }
            WindowStat { lo, hi, max, min }
        })
        .collect();
    let split = 0.8 * t;
    Evidence {
        valid_upto: t,
        sup_gap: max_over(0.0, t),
        early_max: stats.iter().filter(|s| s.0 < split).map(|s| s.1).fold(0.0, f64::max),
        late_max: max_over(split, t),
        windows,
    }
}

fn verdict<T: LogTail + ?Sized>(g: &T, ev: &Evidence, policy: &ClassifyPolicy) -> Option<Regime> {
    let w = &ev.windows;
    let scale = g.g(ev.valid_upto).max(1.0);
    let contact = |s: &WindowStat| s.min <= policy.contact_tol * scale;
    let returns = w.iter().all(contact);
    let increasing = w.windows(2).all(|p| p[0].max > p[1].max);
    let (first, last) = (w[0].max, w[w.len() - 1].max);
    if returns && increasing && first >= 1.0 && first >= policy.oscillation_growth * last {
        return Some(Regime::Oscillating);
    }
    if ev.late_max <= policy.convex_abs + (1.0 + policy.convex_rel) * ev.early_max && contact(&w[0]) {
        return Some(Regime::NearlyConvex { delta: ev.sup_gap });
    }
    if !w.iter().any(contact) && ev.sup_gap > policy.concave_min_gap {
        return Some(Regime::NearlyConcave);
    }
    None
}

/// Classifies a non-compact log-tail from its gap over `[0, 0.8·x_max]`.
pub fn classify_tail<T: LogTail + ?Sized>(
    g: &T,
    x_max: f64,
    policy: &ClassifyPolicy,
) -> Result<Classification> {
    let h = convex_minorant(g, x_max, &policy.grid)?;
    let ev = evidence(g, &h, policy);
    match verdict(g, &ev, policy) {
        Some(regime) => Ok(Classification { regime, evidence: ev, note: NOTE }),
        None => Err(Error::Inconclusive(format!(
            "gap statistics at x_max = {x_max} fit no regime; retry with a larger x_max. evidence: {}",
            serde_json::to_string(&ev).unwrap_or_default()
        ))),
    }
}
