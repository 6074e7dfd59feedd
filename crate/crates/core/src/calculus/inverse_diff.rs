use serde::Serialize;

use super::classify::{classify_tail, ClassifyPolicy, Regime};
use crate::error::{domain, Result};
use crate::tail::LogTail;

/// Outcome of scanning `g⁻¹(y+c) - g⁻¹(y) < g⁻¹(y) - g⁻¹(y-c+2d)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum InverseDifference {
    /// First grid point where the strict inequality fails.
    FailsAt { y: f64, lhs: f64, rhs: f64 },
    NotFound { scanned_to: f64, guidance: String },
}

/// Scans `y` over `points` equally spaced values in `(c, y_max]`.
pub fn inverse_difference_check(
    g: &dyn LogTail,
    c: f64,
    d: f64,
    y_max: f64,
    points: usize,
) -> Result<InverseDifference> {
    if !(d > 0.0 && c > 2.0 * d) {
        return domain(format!("need 0 < 2d < c, got c = {c}, d = {d}"));
    }
    if y_max <= c {
        return Ok(InverseDifference::NotFound {
            scanned_to: y_max,
            guidance: format!("the scan range (c, y_max] is empty; raise y_max above {c}"),
        });
    }
    let x_max = (1.25 * g.g_inverse(y_max + c)?).max(10.0);
    let class = classify_tail(g, x_max, &ClassifyPolicy::default())?;
    if !matches!(class.regime, Regime::NearlyConvex { delta } if delta <= 1e-9) {
        return domain("inverse-difference check needs a convex log-tail");
    }
    let n = points.max(1);
    let step = (y_max - c) / n as f64;
    for i in 1..=n {
        let y = c + step * i as f64;
        let at = g.g_inverse(y)?;
        let lhs = g.g_inverse(y + c)? - at;
        let rhs = at - g.g_inverse(y - c + 2.0 * d)?;
        if lhs >= rhs {
            return Ok(InverseDifference::FailsAt { y, lhs, rhs });
        }
    }
    Ok(InverseDifference::NotFound {
        scanned_to: y_max,
        guidance: format!("no failure up to y = {y_max}; enlarge y_max"),
    })
}
