use crate::error::{domain, Error, Result};
use crate::logmath::{log_tail_diff, LogSumExp};
use crate::tail::{LogTail, Shape};

use super::{Event, SumTail};

/// Accuracy controls for the two-variable Stieltjes sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSumOptions {
    /// Largest change of `g1` across one open cell (log-bracket width).
    pub level_step: f64,
    pub max_points: usize,
    /// Requested bracket width; `None` accepts whatever was achieved.
    pub tolerance: Option<f64>,
}

impl Default for TwoSumOptions {
    fn default() -> Self {
        Self { level_step: 2e-5, max_points: 20_000_000, tolerance: None }
    }
}

/// Partition point `x` of the outer integral with `t = (m - λx)/(1-λ)`.
#[derive(Clone, Copy)]
struct Node {
    x: f64,
    t: f64,
    x_exact: bool,
    t_exact: bool,
}

fn tail_of(g1: &dyn LogTail, t: f64, event: Event) -> f64 {
    // ln P(Y > t) or ln P(Y >= t)
    if t < 0.0 {
        return 0.0;
    }
    match event {
        Event::Greater => -g1.g(t),
        Event::AtLeast => -g1.g_left(t),
    }
}

/// Bracket for `ln P(λX + (1-λ)Y ⋈ m)` with `X ~ g0`, `Y ~ g1`.
pub fn sum_tail_two_event(
    g0: &dyn LogTail,
    g1: &dyn LogTail,
    lambda: f64,
    m: f64,
    event: Event,
    opts: &TwoSumOptions,
) -> Result<SumTail> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return domain(format!("weight must lie in (0, 1), got {lambda}"));
    }
    if !(m >= 0.0 && m.is_finite()) {
        return domain(format!("threshold must be finite and >= 0, got {m}"));
    }
    let mu = 1.0 - lambda;
    let x_cut = m / lambda;
    let t_max = m / mu;
    let t_of = |x: f64| ((m - lambda * x) / mu).max(0.0);
    let x_of = |t: f64| ((m - mu * t) / lambda).clamp(0.0, x_cut);

    let node = |x, t, x_exact, t_exact| Node { x, t, x_exact, t_exact };
    let mut nodes: Vec<Node> = vec![node(0.0, t_max, true, true), node(x_cut, 0.0, true, true)];
    nodes.extend(g0.knots(0.0, x_cut).into_iter().map(|x| node(x, t_of(x), true, false)));
    nodes.extend(g1.knots(0.0, t_max).into_iter().map(|t| node(x_of(t), t, false, true)));
    let mut step = opts.level_step;
    if g1.shape() != Shape::Step && m > 0.0 {
        let (lo, hi) = (g1.g(0.0), g1.g_left(t_max).min(1e300));
        let mut count = ((hi - lo) / step).ceil();
        if count > opts.max_points as f64 {
            step = (hi - lo) / opts.max_points as f64;
            count = opts.max_points as f64;
        }
        for k in 1..count as usize {
            let t = g1.g_inverse(lo + k as f64 * step)?;
            if t > 0.0 && t < t_max {
                nodes.push(node(x_of(t), t, false, true));
            }
        }
    }
    nodes.sort_by(|a, b| a.x.total_cmp(&b.x));
    let mut merged: Vec<Node> = Vec::with_capacity(nodes.len());
    for n in nodes {
        match merged.last_mut() {
            Some(q) if (n.x - q.x).abs() <= 1e-12 * q.x.abs().max(1.0) => {
                if n.x_exact && !q.x_exact {
                    q.x = n.x;
                    q.x_exact = true;
                }
                if n.t_exact && !q.t_exact {
                    q.t = n.t;
                    q.t_exact = true;
                }
            }
            _ => merged.push(n),
        }
    }
    let nodes = merged;

    let (mut lo, mut hi) = (LogSumExp::new(), LogSumExp::new());
    for (i, nd) in nodes.iter().enumerate() {
        // atom of μ0 at the node
        let atom = log_tail_diff(g0.g_left(nd.x), g0.g(nd.x));
        if atom > f64::NEG_INFINITY {
            let v = atom + tail_of(g1, nd.t, event);
            lo.add(v);
            hi.add(v);
        }
        let Some(next) = nodes.get(i + 1) else { break };
        let cell = log_tail_diff(g0.g(nd.x), g0.g_left(next.x));
        if cell == f64::NEG_INFINITY {
            continue;
        }
        // the integrand increases in x: from P(Y >= t_i) to P(Y > t_{i+1})
        lo.add(cell - g1.g_left(nd.t));
        hi.add(cell - g1.g(next.t));
    }
    // beyond the cut the weighted sum exceeds m for every Y >= 0
    let beyond = -g0.g(x_cut);
    lo.add(beyond);
    hi.add(beyond);

    let (l, h) = (lo.value(), hi.value().min(0.0));
    let l = l.min(h);
    if let Some(tol) = opts.tolerance {
        if h - l > tol {
            return Err(Error::Precision {
                message: format!("two-variable bracket width {} exceeds {tol}", h - l),
                achieved: (l, h),
            });
        }
    }
    Ok(SumTail { log_lo: l, log_hi: h, method: "stieltjes".into() })
}

/// Bracket for `ln P(λX + (1-λ)Y > m)`.
pub fn sum_tail_two_log(
    g0: &dyn LogTail,
    g1: &dyn LogTail,
    lambda: f64,
    m: f64,
    opts: &TwoSumOptions,
) -> Result<SumTail> {
    sum_tail_two_event(g0, g1, lambda, m, Event::Greater, opts)
}
