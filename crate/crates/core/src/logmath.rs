//! Log-domain helpers. `f64::INFINITY` / `f64::NEG_INFINITY` are treated as
//! absorbing extended-real values throughout.

/// Streaming accumulator for `ln(sum_i exp(v_i))`.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    max: f64,
    scaled: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSumExp {
    pub fn new() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        if v == f64::NEG_INFINITY {
            return;
        }
        if v <= self.max {
            self.scaled += (v - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - v).exp() + 1.0;
            self.max = v;
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }
}

/// `ln(exp(a) + exp(b))`.
pub fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if hi == f64::INFINITY {
        return f64::INFINITY;
    }
    hi + (lo - hi).exp().ln_1p()
}

pub fn log_sum_exp(values: &[f64]) -> f64 {
    let mut acc = LogSumExp::new();
    for &v in values {
        acc.add(v);
    }
    acc.value()
}

/// `ln(exp(-a) - exp(-b))` for `0 <= a <= b`: the log of the mass that a tail
/// `exp(-g)` loses between levels `a` and `b`.
pub fn log_tail_diff(a: f64, b: f64) -> f64 {
    if a == f64::INFINITY || b <= a {
        return f64::NEG_INFINITY;
    }
    if b == f64::INFINITY {
        return -a;
    }
    -a + (-(-(b - a)).exp_m1()).ln()
}

/// `ln(1 - exp(-a))` for `a >= 0`.
pub fn log1m_exp_neg(a: f64) -> f64 {
    if a <= 0.0 {
        f64::NEG_INFINITY
    } else if a == f64::INFINITY {
        0.0
    } else if a < std::f64::consts::LN_2 {
        (-(-a).exp_m1()).ln()
    } else {
        (-(-a).exp()).ln_1p()
    }
}
