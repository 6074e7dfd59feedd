use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Behaviour of a piecewise function strictly between consecutive knots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    Step,
    Linear,
}

/// A non-decreasing right-continuous function on `[0, ∞)` given by knots.
///
/// `values[i]` is the value at `knots[i]` and `left_values[i]` the left limit
/// there. Between knots the function is either constant (`values[i]`) or the
/// straight line from `values[i]` to `left_values[i + 1]`. Past the last knot
/// it is constant at the last value, which may be `+∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseMonotone {
    knots: Vec<f64>,
    values: Vec<f64>,
    left_values: Vec<f64>,
    mode: Interpolation,
}

impl PiecewiseMonotone {
    pub fn new(
        knots: Vec<f64>,
        values: Vec<f64>,
        left_values: Vec<f64>,
        mode: Interpolation,
    ) -> Result<Self> {
        let n = knots.len();
        if n == 0 || values.len() != n || left_values.len() != n {
            return Err(Error::InvalidSpec(
                "knots, values and left values must be non-empty and of equal length".into(),
            ));
        }
        if knots[0] != 0.0 {
            return Err(Error::InvalidSpec("first knot must be at 0".into()));
        }
        for i in 0..n {
            if !knots[i].is_finite() || values[i].is_nan() || left_values[i].is_nan() {
                return Err(Error::InvalidSpec("non-finite knot or NaN value".into()));
            }
            if left_values[i] > values[i] || left_values[i] < 0.0 {
                return Err(Error::InvalidSpec(format!(
                    "left value exceeds value at knot {}",
                    knots[i]
                )));
            }
            if i > 0 {
                if knots[i] <= knots[i - 1] {
                    return Err(Error::InvalidSpec("knots must strictly increase".into()));
                }
                let inner = match mode {
                    Interpolation::Step => values[i - 1],
                    Interpolation::Linear => left_values[i],
                };
                if left_values[i] < values[i - 1] || inner < values[i - 1] {
                    return Err(Error::InvalidSpec(format!(
                        "values decrease before knot {}",
                        knots[i]
                    )));
                }
                if mode == Interpolation::Step && left_values[i] != values[i - 1] {
                    return Err(Error::InvalidSpec(
                        "step function left value must equal previous value".into(),
                    ));
                }
                if values[i - 1].is_infinite() {
                    return Err(Error::InvalidSpec("+inf allowed only at the last knot".into()));
                }
            }
        }
        Ok(Self {
            knots,
            values,
            left_values,
            mode,
        })
    }

    /// Step function with `g = values[i]` on `[knots[i], knots[i+1])`.
    pub fn step(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let mut left = Vec::with_capacity(values.len());
        left.push(0.0);
        left.extend_from_slice(&values[..values.len().saturating_sub(1)]);
        Self::new(knots, values, left, Interpolation::Step)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn left_values(&self) -> &[f64] {
        &self.left_values
    }

    pub fn mode(&self) -> Interpolation {
        self.mode
    }

    /// Index of the last knot `<= x`, for `x >= 0`.
    fn segment(&self, x: f64) -> usize {
        self.knots.partition_point(|&k| k <= x) - 1
    }

    fn inside(&self, i: usize, x: f64) -> f64 {
        match self.mode {
            Interpolation::Step => self.values[i],
            Interpolation::Linear => {
                if i + 1 == self.knots.len() {
                    return self.values[i];
                }
                let (x0, x1) = (self.knots[i], self.knots[i + 1]);
                let (y0, y1) = (self.values[i], self.left_values[i + 1]);
                if y1.is_infinite() {
                    return f64::INFINITY;
                }
                let t = (x - x0) / (x1 - x0);
                (y0 + t * (y1 - y0)).min(y1)
            }
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let i = self.segment(x);
        if x == self.knots[i] {
            self.values[i]
        } else {
            self.inside(i, x)
        }
    }

    pub fn eval_left(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let i = self.segment(x);
        if x == self.knots[i] {
            self.left_values[i]
        } else {
            self.inside(i, x)
        }
    }

    /// `inf{x >= 0 : f(x) >= y}`, or `None` when `f` never reaches `y`.
    pub fn inverse(&self, y: f64) -> Option<f64> {
        if y <= self.values[0] {
            return Some(0.0);
        }
        let idx = self.values.partition_point(|&v| v < y);
        if idx > 0 && self.mode == Interpolation::Linear && idx < self.knots.len() {
            let i = idx - 1;
            let (y0, y1) = (self.values[i], self.left_values[idx]);
            if y1 > y {
                let (x0, x1) = (self.knots[i], self.knots[idx]);
                if y1.is_infinite() {
                    return Some(x1);
                }
                let x = x0 + (y - y0) / (y1 - y0) * (x1 - x0);
                return Some(x.clamp(x0, x1));
            }
        }
        self.knots.get(idx).copied()
    }

    pub fn is_compact(&self) -> bool {
        self.values.last().is_some_and(|v| v.is_infinite())
    }
}
