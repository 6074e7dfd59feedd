use serde::Serialize;

use crate::error::{Error, Result};
use crate::tail::{LogTail, Shape};

/// Sample grid used for hulls and gap statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPolicy {
    /// Evenly spaced points on `[0, x_max]`.
    pub uniform: usize,
    /// Log-spaced points on `[x_max·1e-6, x_max]`.
    pub geometric: usize,
    /// Fraction of `x_max` that downstream code may trust.
    pub valid_fraction: f64,
}

impl Default for GridPolicy {
    fn default() -> Self {
        Self {
            uniform: 4097,
            geometric: 2049,
            valid_fraction: 0.8,
        }
    }
}

impl GridPolicy {
    pub fn uniform_only(points: usize) -> Self {
        Self {
            uniform: points,
            geometric: 0,
            ..Self::default()
        }
    }
}

/// Sorted, deduplicated sample abscissae in `[0, x_max]`, knots included.
pub fn sample_points<T: LogTail + ?Sized>(g: &T, x_max: f64, policy: &GridPolicy) -> Vec<f64> {
    let mut xs = g.knots(0.0, x_max);
    xs.push(0.0);
    xs.push(x_max);
    if policy.uniform >= 2 {
        let n = policy.uniform - 1;
        xs.extend((0..=n).map(|i| x_max * i as f64 / n as f64));
    }
    if policy.geometric >= 2 && g.shape() == Shape::Curved {
        let n = policy.geometric - 1;
        let lo = (x_max * 1e-6).ln();
        let hi = x_max.ln();
        xs.extend((0..=n).map(|i| (lo + (hi - lo) * i as f64 / n as f64).exp().min(x_max)));
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

/// Greatest non-decreasing convex minorant of a sampled log-tail.
#[derive(Debug, Clone, Serialize)]
pub struct ConvexMinorant {
    pub xs: Vec<f64>,
    pub hs: Vec<f64>,
    pub slopes: Vec<f64>,
    pub x_max: f64,
    pub valid_upto: f64,
}

/// An interval on which the minorant is affine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AffinePiece {
    pub lo: f64,
    pub hi: f64,
    pub slope: f64,
    pub intercept: f64,
}

pub fn convex_minorant<T: LogTail + ?Sized>(
    g: &T,
    x_max: f64,
    policy: &GridPolicy,
) -> Result<ConvexMinorant> {
    if !(x_max > 0.0 && x_max.is_finite()) {
        return Err(Error::Domain(format!("x_max must be positive, got {x_max}")));
    }
    if g.is_compact() {
        return Err(Error::Unsupported("convex minorant of a compactly supported law".into()));
    }
    let xs = sample_points(g, x_max, policy);
    if xs.len() < 3 {
        return Err(Error::DegenerateGrid(format!("{} sample points", xs.len())));
    }
    // A continuous minorant can only touch a jump from below, so hull the left limits.
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .map(|&x| (x, if x == 0.0 { g.g(0.0) } else { g.g_left(x) }))
        .collect();
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for p in pts {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let slopes: Vec<f64> = hull
        .windows(2)
        .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).max(0.0))
        .collect();
    Ok(ConvexMinorant {
        xs: hull.iter().map(|p| p.0).collect(),
        hs: hull.iter().map(|p| p.1).collect(),
        slopes,
        x_max,
        valid_upto: policy.valid_fraction * x_max,
    })
}

impl ConvexMinorant {
    /// `h(x)`; extended affinely past the last hull knot.
    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return self.hs[0];
        }
        let i = self.xs.partition_point(|&k| k <= x);
        if i == 0 {
            return self.hs[0];
        }
        let i = (i - 1).min(self.slopes.len() - 1);
        self.hs[i] + self.slopes[i] * (x - self.xs[i])
    }

    pub fn affine_pieces(&self) -> Vec<AffinePiece> {
        let mut out: Vec<AffinePiece> = Vec::new();
        for (i, &s) in self.slopes.iter().enumerate() {
            let lo = self.xs[i];
            if lo >= self.valid_upto {
                break;
            }
            let hi = self.xs[i + 1].min(self.valid_upto);
            match out.last_mut() {
                Some(p) if (p.slope - s).abs() <= 1e-9 * p.slope.abs().max(s.abs()).max(1e-300) => {
                    p.hi = hi;
                }
                _ => out.push(AffinePiece {
                    lo,
                    hi,
                    slope: s,
                    intercept: self.hs[i] - s * lo,
                }),
            }
        }
        out
    }
}

/// Gap `g(x) - h(x)` with tiny rounding residue snapped to 0.
pub fn gap(g: f64, h: f64) -> f64 {
    let f = g - h;
    if f.abs() <= 1e-9 * g.abs().max(1.0) {
        0.0
    } else {
        f
    }
}


impl crate::tail::LogTail for ConvexMinorant {
    fn g(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else {
            self.eval(x)
        }
    }

    fn g_left(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            self.eval(x)
        }
    }

    fn knots(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.xs.iter().copied().filter(|&x| x >= lo && x <= hi).collect()
    }

    fn shape(&self) -> Shape {
        Shape::Affine
    }

    fn g_inverse(&self, y: f64) -> Result<f64> {
        crate::tail::bisect_inverse(self, y)
    }
}
