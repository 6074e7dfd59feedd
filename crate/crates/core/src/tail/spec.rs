use serde::{Deserialize, Serialize};

use super::{bisect_inverse, Interpolation, LogTail, PiecewiseMonotone, Shape};
use crate::error::{Error, Result};

/// Built-in and user-supplied distribution families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub enum TailSpec {
    /// `g(x) = rate·x`.
    Exponential { rate: f64 },
    /// `g(x) = alpha·ln(1 + x)`.
    Pareto { alpha: f64 },
    /// `g(x) = x^beta`.
    StretchedExp { beta: f64 },
    /// `F(x) = 1 / ln(x + e)`.
    LogLog,
    /// `g(x) = (⌊√x⌋ + 1)² − 1`.
    OscSquares,
    Piecewise {
        interpolation: Interpolation,
        knots: Vec<(f64, f64)>,
        func: PiecewiseMonotone,
    },
    Lattice {
        atoms: Vec<(f64, f64)>,
        func: PiecewiseMonotone,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", deny_unknown_fields)]
enum RawSpec {
    #[serde(rename = "exponential")]
    Exponential { rate: f64 },
    #[serde(rename = "pareto")]
    Pareto { alpha: f64 },
    #[serde(rename = "stretched_exp")]
    StretchedExp { beta: f64 },
    #[serde(rename = "loglog")]
    LogLog {},
    #[serde(rename = "osc_squares")]
    OscSquares {},
    #[serde(rename = "piecewise_logtail")]
    Piecewise {
        interpolation: Interpolation,
        knots: Vec<(f64, f64)>,
    },
    #[serde(rename = "lattice")]
    Lattice { atoms: Vec<(f64, f64)> },
}

impl TryFrom<RawSpec> for TailSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(Error::InvalidSpec(format!("{name} must be positive and finite, got {v}")))
            }
        };
        Ok(match raw {
            RawSpec::Exponential { rate } => TailSpec::Exponential { rate: positive("rate", rate)? },
            RawSpec::Pareto { alpha } => TailSpec::Pareto { alpha: positive("alpha", alpha)? },
            RawSpec::StretchedExp { beta } => TailSpec::StretchedExp { beta: positive("beta", beta)? },
            RawSpec::LogLog {} => TailSpec::LogLog,
            RawSpec::OscSquares {} => TailSpec::OscSquares,
            RawSpec::Piecewise { interpolation, knots } => TailSpec::piecewise(interpolation, knots)?,
            RawSpec::Lattice { atoms } => TailSpec::lattice(atoms)?,
        })
    }
}

impl From<TailSpec> for RawSpec {
    fn from(s: TailSpec) -> Self {
        match s {
            TailSpec::Exponential { rate } => RawSpec::Exponential { rate },
            TailSpec::Pareto { alpha } => RawSpec::Pareto { alpha },
            TailSpec::StretchedExp { beta } => RawSpec::StretchedExp { beta },
            TailSpec::LogLog => RawSpec::LogLog {},
            TailSpec::OscSquares => RawSpec::OscSquares {},
            TailSpec::Piecewise { interpolation, knots, .. } => RawSpec::Piecewise { interpolation, knots },
            TailSpec::Lattice { atoms, .. } => RawSpec::Lattice { atoms },
        }
    }
}

/// Exact `⌊√x⌋` for `x >= 0`.
fn isqrt_floor(x: f64) -> f64 {
    let mut k = x.sqrt().floor();
    while k * k > x {
        k -= 1.0;
    }
    while (k + 1.0) * (k + 1.0) <= x {
        k += 1.0;
    }
    k
}

impl TailSpec {
    pub fn exponential(rate: f64) -> Self {
        TailSpec::Exponential { rate }
    }

    pub fn pareto(alpha: f64) -> Self {
        TailSpec::Pareto { alpha }
    }

    pub fn stretched_exp(beta: f64) -> Self {
        TailSpec::StretchedExp { beta }
    }

    /// Log-tail given by `(x, g)` knots.
    ///
    /// A leading knot with `x > 0` gets `(0, 0)` prepended. Repeated `x`
    /// encodes a jump: the first value is the left limit, the last the value.
    /// The final knot is the support endpoint, where `g` becomes infinite; in
    /// linear mode its value is the left limit there.
    pub fn piecewise(interpolation: Interpolation, knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::InvalidSpec("piecewise log-tail needs knots".into()));
        }
        let mut pts = knots.clone();
        for w in pts.windows(2) {
            if w[1].0 < w[0].0 || w[1].1 < w[0].1 {
                return Err(Error::InvalidSpec("piecewise knots must be non-decreasing".into()));
            }
        }
        for &(x, g) in &pts {
            if !(x >= 0.0 && x.is_finite() && g >= 0.0 && g.is_finite()) {
                return Err(Error::InvalidSpec(format!("bad knot ({x}, {g})")));
            }
        }
        if pts[0].0 > 0.0 {
            pts.insert(0, (0.0, 0.0));
        } else if pts[0].1 != 0.0 {
            return Err(Error::InvalidSpec("log-tail must start at g(0) = 0".into()));
        }
        // Group repeated abscissae into (x, left, value).
        let mut groups: Vec<(f64, f64, f64)> = Vec::new();
        for (x, g) in pts {
            match groups.last_mut() {
                Some(last) if last.0 == x => last.2 = g,
                _ => groups.push((x, g, g)),
            }
        }
        groups[0].1 = 0.0;
        let n = groups.len();
        let xs: Vec<f64> = groups.iter().map(|g| g.0).collect();
        let func = match interpolation {
            Interpolation::Step => {
                let mut vals: Vec<f64> = groups.iter().map(|g| g.2).collect();
                vals[n - 1] = f64::INFINITY;
                PiecewiseMonotone::step(xs, vals)?
            }
            Interpolation::Linear => {
                let mut vals: Vec<f64> = groups.iter().map(|g| g.2).collect();
                let left: Vec<f64> = groups.iter().map(|g| g.1).collect();
                vals[n - 1] = f64::INFINITY;
                PiecewiseMonotone::new(xs, vals, left, Interpolation::Linear)?
            }
        };
        Ok(TailSpec::Piecewise { interpolation, knots, func })
    }

    /// Discrete law with the given `(x, probability)` atoms.
    pub fn lattice(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidSpec("lattice needs at least one atom".into()));
        }
        let mut sorted = atoms.clone();
        for &(x, p) in &sorted {
            if !(x >= 0.0 && x.is_finite()) || !(p > 0.0 && p.is_finite()) {
                return Err(Error::InvalidSpec(format!("bad atom ({x}, {p})")));
            }
        }
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (x, p) in sorted {
            match merged.last_mut() {
                Some(last) if last.0 == x => last.1 += p,
                _ => merged.push((x, p)),
            }
        }
        let total: f64 = merged.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidSpec(format!("atom probabilities sum to {total}")));
        }
        let mut xs = Vec::new();
        let mut vals = Vec::new();
        if merged[0].0 > 0.0 {
            xs.push(0.0);
            vals.push(0.0);
        }
        let mut suffix = vec![0.0; merged.len() + 1];
        for i in (0..merged.len()).rev() {
            suffix[i] = suffix[i + 1] + merged[i].1 / total;
        }
        for (i, &(x, _)) in merged.iter().enumerate() {
            xs.push(x);
            let s = suffix[i + 1];
            vals.push(if i + 1 == merged.len() { f64::INFINITY } else { -s.ln() });
        }
        let func = PiecewiseMonotone::step(xs, vals)?;
        Ok(TailSpec::Lattice { atoms, func })
    }

    /// Sorted, merged, normalized atoms of a lattice law.
    pub fn lattice_atoms(&self) -> Option<Vec<(f64, f64)>> {
        let TailSpec::Lattice { func, .. } = self else {
            return None;
        };
        let mut out = Vec::new();
        let mut prev = 0.0f64;
        for (&x, &v) in func.knots().iter().zip(func.values()) {
            let tail_prev = (-prev).exp();
            let tail_here = (-v).exp();
            let p = tail_prev - tail_here;
            if p > 0.0 {
                out.push((x, p));
            }
            prev = v;
        }
        Some(out)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec serializes")
    }

    pub fn name(&self) -> String {
        match self {
            TailSpec::Exponential { rate } => format!("exponential({rate})"),
            TailSpec::Pareto { alpha } => format!("pareto({alpha})"),
            TailSpec::StretchedExp { beta } => format!("stretched_exp({beta})"),
            TailSpec::LogLog => "loglog".into(),
            TailSpec::OscSquares => "osc_squares".into(),
            TailSpec::Piecewise { .. } => "piecewise_logtail".into(),
            TailSpec::Lattice { .. } => "lattice".into(),
        }
    }

    fn func(&self) -> Option<&PiecewiseMonotone> {
        match self {
            TailSpec::Piecewise { func, .. } | TailSpec::Lattice { func, .. } => Some(func),
            _ => None,
        }
    }
}

/// Uniform law on `[0, 1]` as a dense linear log-tail with `n` cells.
///
/// The last cell keeps `g` finite up to 1 and leaves an atom of mass
/// `1/(2n)` at the endpoint.
pub fn uniform_unit(n: usize) -> TailSpec {
    let n = n.max(2);
    let mut knots: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let x = i as f64 / n as f64;
            (x, -(-x).ln_1p())
        })
        .collect();
    knots.push((1.0, (2.0 * n as f64).ln()));
    TailSpec::piecewise(Interpolation::Linear, knots).expect("uniform knots are valid")
}

impl LogTail for TailSpec {
    fn g(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        match self {
            TailSpec::Exponential { rate } => rate * x,
            TailSpec::Pareto { alpha } => alpha * x.ln_1p(),
            TailSpec::StretchedExp { beta } => x.powf(*beta),
            TailSpec::LogLog => (x + std::f64::consts::E).ln().ln(),
            TailSpec::OscSquares => {
                let k = isqrt_floor(x) + 1.0;
                k * k - 1.0
            }
            TailSpec::Piecewise { func, .. } | TailSpec::Lattice { func, .. } => func.eval(x),
        }
    }

    fn g_left(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match self {
            TailSpec::OscSquares => {
                let k = isqrt_floor(x);
                if k * k == x {
                    k * k - 1.0
                } else {
                    (k + 1.0) * (k + 1.0) - 1.0
                }
            }
            TailSpec::Piecewise { func, .. } | TailSpec::Lattice { func, .. } => func.eval_left(x),
            _ => self.g(x),
        }
    }

    fn knots(&self, lo: f64, hi: f64) -> Vec<f64> {
        match self {
            TailSpec::OscSquares => {
                let mut k = isqrt_floor(lo.max(0.0));
                if k * k < lo {
                    k += 1.0;
                }
                let mut out = Vec::new();
                while k * k <= hi {
                    if k >= 1.0 {
                        out.push(k * k);
                    }
                    k += 1.0;
                }
                out
            }
            _ => match self.func() {
                Some(f) => {
                    let ks = f.knots();
                    let a = ks.partition_point(|&k| k < lo);
                    let b = ks.partition_point(|&k| k <= hi);
                    ks[a..b].to_vec()
                }
                None => Vec::new(),
            },
        }
    }

    fn shape(&self) -> Shape {
        match self {
            TailSpec::Exponential { .. } => Shape::Affine,
            TailSpec::StretchedExp { beta } if *beta == 1.0 => Shape::Affine,
            TailSpec::OscSquares | TailSpec::Lattice { .. } => Shape::Step,
            TailSpec::Piecewise { interpolation: Interpolation::Step, .. } => Shape::Step,
            TailSpec::Piecewise { .. } => Shape::Affine,
            _ => Shape::Curved,
        }
    }

    fn support_end(&self) -> f64 {
        match self.func() {
            Some(f) => *f.knots().last().expect("non-empty knots"),
            None => f64::INFINITY,
        }
    }

    fn g_inverse(&self, y: f64) -> Result<f64> {
        if y.is_nan() {
            return Err(Error::Domain("inverse of NaN".into()));
        }
        if y <= 0.0 {
            return Ok(0.0);
        }
        if y.is_infinite() && self.func().is_none() {
            return Err(Error::Unbounded("non-compact log-tail never reaches +inf".into()));
        }
        Ok(match self {
            TailSpec::Exponential { rate } => y / rate,
            TailSpec::Pareto { alpha } => (y / alpha).exp_m1(),
            TailSpec::StretchedExp { beta } => y.powf(1.0 / beta),
            TailSpec::LogLog => {
                let x = y.exp().exp() - std::f64::consts::E;
                if x.is_finite() {
                    x
                } else {
                    f64::MAX
                }
            }
            TailSpec::OscSquares => {
                // smallest k >= 1 with (k+1)^2 - 1 >= y
                let mut k = ((y + 1.0).sqrt() - 1.0).ceil().max(1.0);
                while k > 1.0 && k * k - 1.0 >= y {
                    k -= 1.0;
                }
                while (k + 1.0) * (k + 1.0) - 1.0 < y {
                    k += 1.0;
                }
                k * k
            }
            TailSpec::Piecewise { func, .. } | TailSpec::Lattice { func, .. } => match func.inverse(y) {
                Some(x) => x,
                None => return bisect_inverse(self, y),
            },
        })
    }
}
