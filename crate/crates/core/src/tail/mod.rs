//! Distributions on `[0, ∞)` described by their log-tail `g(x) = -ln P(X > x)`.

mod piecewise;
mod spec;

pub use piecewise::{Interpolation, PiecewiseMonotone};
pub use spec::{uniform_unit, TailSpec};

use rand::Rng;
use rand_distr::Exp1;

use crate::error::{domain, Error, Result};

/// How a log-tail behaves between the points reported by [`LogTail::knots`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Shape {
    /// Constant between knots.
    Step,
    /// Affine between knots.
    Affine,
    /// Smooth but curved; callers must refine beyond the knots.
    Curved,
}

/// A non-decreasing right-continuous log-tail.
///
/// `g` and `g_left` accept any real; both are 0 for negative arguments and
/// `g_left(0) = 0`.
pub trait LogTail: Sync {
    fn g(&self, x: f64) -> f64;

    fn g_left(&self, x: f64) -> f64;

    /// Discontinuities and kinks inside `[lo, hi]`, sorted.
    fn knots(&self, lo: f64, hi: f64) -> Vec<f64>;

    fn shape(&self) -> Shape;

    /// First point where `g` is infinite, `+∞` if none.
    fn support_end(&self) -> f64 {
        f64::INFINITY
    }

    fn is_compact(&self) -> bool {
        self.support_end().is_finite()
    }

    /// Generalized inverse `inf{x >= 0 : g(x) >= y}`.
    fn g_inverse(&self, y: f64) -> Result<f64> {
        bisect_inverse(self, y)
    }

    /// `|[lo, hi]|_g = g(hi) - g(lo-)`; zero past the support.
    fn measure(&self, lo: f64, hi: f64) -> f64 {
        let a = self.g_left(lo);
        if a.is_infinite() {
            return 0.0;
        }
        self.g(hi) - a
    }
}

pub fn bisect_inverse<T: LogTail + ?Sized>(t: &T, y: f64) -> Result<f64> {
    if y.is_nan() {
        return domain("inverse of NaN");
    }
    if y <= t.g(0.0) {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    while t.g(hi) < y {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::Unbounded(format!("log-tail never reaches {y}")));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if t.g(mid) >= y {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Pointwise average `(g0 + g1) / 2` of two log-tails.
pub struct AverageTail<'a> {
    pub a: &'a dyn LogTail,
    pub b: &'a dyn LogTail,
}

impl LogTail for AverageTail<'_> {
    fn g(&self, x: f64) -> f64 {
        0.5 * (self.a.g(x) + self.b.g(x))
    }
    fn g_left(&self, x: f64) -> f64 {
        0.5 * (self.a.g_left(x) + self.b.g_left(x))
    }
    fn knots(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut k = self.a.knots(lo, hi);
        k.extend(self.b.knots(lo, hi));
        k.sort_by(f64::total_cmp);
        k.dedup();
        k
    }
    fn shape(&self) -> Shape {
        self.a.shape().max(self.b.shape())
    }
    fn support_end(&self) -> f64 {
        self.a.support_end().min(self.b.support_end())
    }
}

/// `g(x)`, rejecting negative arguments.
pub fn eval_g(spec: &TailSpec, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return domain(format!("g({x}) needs x >= 0"));
    }
    Ok(spec.g(x))
}

/// `ln F(x) = -g(x)`.
pub fn eval_log_f(spec: &TailSpec, x: f64) -> Result<f64> {
    eval_g(spec, x).map(|g| -g)
}

pub fn g_left_limit(spec: &TailSpec, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return domain(format!("left limit at {x} needs x > 0"));
    }
    Ok(spec.g_left(x))
}

pub fn g_inverse(spec: &TailSpec, y: f64) -> Result<f64> {
    if !(y >= 0.0) {
        return domain(format!("inverse at {y} needs y >= 0"));
    }
    spec.g_inverse(y)
}

pub fn interval_g_measure(spec: &TailSpec, lo: f64, hi: f64) -> Result<f64> {
    if !(lo >= 0.0) || !(lo <= hi) {
        return domain(format!("interval [{lo}, {hi}] is not ordered in [0, ∞)"));
    }
    Ok(spec.measure(lo, hi))
}

/// Inverse-transform draw `g⁻¹(E)` with `E ~ Exp(1)`.
pub fn sample<R: Rng + ?Sized>(spec: &TailSpec, rng: &mut R) -> f64 {
    let e: f64 = rng.sample(Exp1);
    spec.g_inverse(e)
        .expect("valid specs invert every finite level")
}

#[cfg(test)]
mod tests;
