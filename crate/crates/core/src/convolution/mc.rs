use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::tail::LogTail;

/// Importance-sampling estimate of `ln P(Σ λ_j X_j > m)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub log_value: f64,
    pub rel_se: f64,
    pub ess: f64,
    pub tilt: f64,
}

/// Level `e` with `Σ λ_j g_j⁻¹(e) = m`, found by bisection.
fn matching_level(specs: &[&dyn LogTail], weights: &[f64], m: f64) -> f64 {
    let sum_at = |e: f64| -> f64 {
        specs
            .iter()
            .zip(weights)
            .map(|(g, w)| w * g.g_inverse(e).unwrap_or(f64::INFINITY))
            .sum()
    };
    let mut hi = 1.0;
    while sum_at(hi) < m && hi < 1e6 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if sum_at(mid) < m {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Self-normalized estimator with the exponential levels `E_j` drawn at rate
/// `1 - θ`, chosen so the tilted mean level reaches the matching level.
pub fn sum_tail_mc(
    specs: &[&dyn LogTail],
    weights: &[f64],
    m: f64,
    samples: usize,
    seed: u64,
    max_rel_se: f64,
) -> Result<McEstimate> {
    if specs.len() != weights.len() || specs.is_empty() {
        return domain("need matching specs and weights");
    }
    let e_star = matching_level(specs, weights, m);
    let theta = if e_star > 1.0 { 1.0 - 1.0 / e_star } else { 0.0 };
    let rate = 1.0 - theta;
    let log_norm = -(rate.ln());
    const CHUNK: usize = 8192;
    let chunks = samples.max(1).div_ceil(CHUNK);
    let exp = Exp::new(rate).map_err(|e| Error::Domain(e.to_string()))?;
    // per chunk: (max log w, Σ w, Σ w·1, Σ w², Σ w²·1) scaled by exp(-max)
    let parts: Vec<[f64; 5]> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = CHUNK.min(samples.max(1) - c * CHUNK);
            let mut logs = Vec::with_capacity(count);
            for _ in 0..count {
                let mut lw = 0.0;
                let mut s = 0.0;
                for (g, w) in specs.iter().zip(weights) {
                    let e: f64 = exp.sample(&mut rng);
                    lw += -theta * e + log_norm;
                    s += w * g.g_inverse(e).unwrap_or(f64::MAX);
                }
                logs.push((lw, s > m));
            }
            let mx = logs.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
            let mut acc = [mx, 0.0, 0.0, 0.0, 0.0];
            for (lw, hit) in logs {
                let w = (lw - mx).exp();
                acc[1] += w;
                acc[3] += w * w;
                if hit {
                    acc[2] += w;
                    acc[4] += w * w;
                }
            }
            acc
        })
        .collect();
    let mx = parts.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
    let mut tot = [0.0; 4];
    for p in &parts {
        let s = (p[0] - mx).exp();
        tot[0] += p[1] * s;
        tot[1] += p[2] * s;
        tot[2] += p[3] * s * s;
        tot[3] += p[4] * s * s;
    }
    let (sw, sh, sw2, sh2) = (tot[0], tot[1], tot[2], tot[3]);
    let ess = sw * sw / sw2;
    let p = sh / sw;
    // delta-method variance of the ratio estimator
    let var = (sh2 * (1.0 - p) * (1.0 - p) + (sw2 - sh2) * p * p) / (sw * sw);
    let rel_se = if p > 0.0 { var.sqrt() / p } else { f64::INFINITY };
    let est = McEstimate { log_value: p.ln(), rel_se, ess, tilt: theta };
    if ess < 100.0 || rel_se > max_rel_se {
        return Err(Error::Precision {
            message: format!("Monte Carlo rel. s.e. {rel_se:.3e}, ESS {ess:.1}"),
            achieved: (p * (1.0 - 2.0 * rel_se).max(0.0), p * (1.0 + 2.0 * rel_se)),
        });
    }
    Ok(est)
}
