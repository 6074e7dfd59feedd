//! Brute-force reference scans written directly against the definitions.
//! They use only `g`, `g_left` and `knots` of the laws involved.

use crate::error::{Error, Result};
use crate::tail::LogTail;

/// Cap on partition cells per scan.
pub const MAX_CELLS: usize = 50_000_000;

const REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub inner: f64,
    pub outer: f64,
}

impl Bracket {
    pub fn contains(&self, v: f64, tol: f64) -> bool {
        self.inner - tol <= v && v <= self.outer + tol
    }
}

#[derive(Clone, Copy)]
pub enum Variant<'a> {
    Iid,
    /// Set `L^j` of the pair `(g, other)`, measured under `g_j`.
    Noniid { other: &'a dyn LogTail, j: usize },
    /// Weighted region of one law, `n <= 3`.
    Ndim { weights: &'a [f64] },
}

fn le(v: f64, thr: f64) -> bool {
    v <= thr + REL_TOL * thr.abs().max(1.0)
}

/// Grid `i·step` on `[0, hi]` merged with `extra` points inside the range.
fn partition(hi: f64, step: f64, extra: impl IntoIterator<Item = f64>) -> Result<Vec<f64>> {
    let n = (hi / step).ceil();
    if !(n.is_finite()) || n as usize > MAX_CELLS {
        return Err(Error::Resource(format!("{n} cells exceed the cap of {MAX_CELLS}")));
    }
    let mut pts: Vec<f64> = (0..=n as usize).map(|i| (i as f64 * step).min(hi)).collect();
    pts.extend(extra.into_iter().filter(|&x| (0.0..=hi).contains(&x)));
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    Ok(pts)
}

/// Measure bracket, under `a`, of `{x in [0, α/β] : a(x) + b(α - βx) <= thr}`;
/// the right end `α/β` is dropped unless `include_end`.
fn scan_pair(a: &dyn LogTail, b: &dyn LogTail, alpha: f64, beta: f64, thr: f64, include_end: bool, step: f64) -> Result<Bracket> {
    let hi = alpha / beta;
    let phi = |x: f64| (alpha - beta * x).max(0.0);
    let extra = a.knots(0.0, hi).into_iter().chain(b.knots(0.0, alpha).into_iter().map(|k| (alpha - k) / beta));
    let pts = partition(hi, step, extra)?;
    let (mut inner, mut outer) = (0.0, 0.0);
    for (i, &p) in pts.iter().enumerate() {
        let is_end = i + 1 == pts.len();
        if !is_end || include_end {
            let atom = a.g(p) - if p == 0.0 { 0.0 } else { a.g_left(p) };
            if atom > 0.0 && le(a.g(p) + b.g(phi(p)), thr) {
                inner += atom;
                outer += atom;
            }
        }
        if is_end {
            break;
        }
        let q = pts[i + 1];
        let mass = a.g_left(q) - a.g(p);
        if mass <= 0.0 {
            continue;
        }
        let sup = a.g_left(q) + b.g_left(phi(p));
        let inf = a.g(p) + b.g(phi(q));
        if le(sup, thr) {
            inner += mass;
        }
        if le(inf, thr) {
            outer += mass;
        }
    }
    Ok(Bracket { inner, outer })
}

/// Pieces of one axis: atoms `(value, value, mass)` and open cells
/// `(inf, sup, mass)` with the coordinate range `[x_lo, x_hi]`.
struct Piece {
    x_lo: f64,
    x_hi: f64,
    g_inf: f64,
    g_sup: f64,
    mass: f64,
    atom: bool,
}

fn pieces(g: &dyn LogTail, hi: f64, step: f64, extra: Vec<f64>) -> Result<Vec<Piece>> {
    let pts = partition(hi, step, extra)?;
    let mut out = Vec::with_capacity(2 * pts.len());
    for (i, &p) in pts.iter().enumerate() {
        let atom = g.g(p) - if p == 0.0 { 0.0 } else { g.g_left(p) };
        if atom > 0.0 {
            out.push(Piece { x_lo: p, x_hi: p, g_inf: g.g(p), g_sup: g.g(p), mass: atom, atom: true });
        }
        if let Some(&q) = pts.get(i + 1) {
            let mass = g.g_left(q) - g.g(p);
            if mass > 0.0 {
                out.push(Piece { x_lo: p, x_hi: q, g_inf: g.g(p), g_sup: g.g_left(q), mass, atom: false });
            }
        }
    }
    Ok(out)
}

fn scan_3d(g: &dyn LogTail, w: &[f64], m: f64, d: f64, step: f64) -> Result<Bracket> {
    let thr = 3.0 * (g.g(m) + d);
    let (h1, h2) = (m / w[0], m / w[1]);
    let a1 = pieces(g, h1, step, g.knots(0.0, h1))?;
    let a2 = pieces(g, h2, step, g.knots(0.0, h2))?;
    if a1.len().saturating_mul(a2.len()) > MAX_CELLS {
        return Err(Error::Resource(format!("{} x {} cells exceed the cap of {MAX_CELLS}", a1.len(), a2.len())));
    }
    let dual = |x1: f64, x2: f64| (m - w[0] * x1 - w[1] * x2) / w[2];
    let (mut inner, mut outer) = (0.0, 0.0);
    for p in &a1 {
        for q in &a2 {
            let lo3 = dual(p.x_hi, q.x_hi);
            let hi3 = dual(p.x_lo, q.x_lo);
            if !(hi3 > 0.0) {
                continue;
            }
            let mass = p.mass * q.mass;
            if p.atom && q.atom {
                if le(p.g_inf + q.g_inf + g.g(hi3), thr) {
                    inner += mass;
                    outer += mass;
                }
                continue;
            }
            let inf = p.g_inf + q.g_inf + g.g(lo3.max(0.0));
            let sup = p.g_sup + q.g_sup + g.g_left(hi3);
            if lo3 >= 0.0 && le(sup, thr) {
                inner += mass;
            }
            if le(inf, thr) {
                outer += mass;
            }
        }
    }
    Ok(Bracket { inner, outer })
}

/// Inner and outer g-measure of a concavity set by exhaustive scan at
/// resolution `step`, augmented with the knots of every law involved.
pub fn brute_l_measure(g: &dyn LogTail, m: f64, d: f64, step: f64, variant: Variant<'_>) -> Result<Bracket> {
    if !(step > 0.0) || !(m > 0.0) || !(d >= 0.0) {
        return Err(Error::Domain(format!("need step > 0, m > 0, d >= 0; got {step}, {m}, {d}")));
    }
    match variant {
        Variant::Iid => scan_pair(g, g, 2.0 * m, 1.0, 2.0 * (g.g(m) + d), true, step),
        Variant::Noniid { other, j } => {
            let thr = g.g(m) + other.g(m) + 2.0 * d;
            match j {
                0 => scan_pair(g, other, 2.0 * m, 1.0, thr, true, step),
                1 => scan_pair(other, g, 2.0 * m, 1.0, thr, true, step),
                _ => Err(Error::Domain(format!("j must be 0 or 1, got {j}"))),
            }
        }
        Variant::Ndim { weights } => {
            let sum: f64 = weights.iter().sum();
            if weights.iter().any(|&w| !(w > 0.0)) || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::Domain("weights must be positive and sum to 1".into()));
            }
            match weights.len() {
                2 => scan_pair(g, g, m / weights[1], weights[0] / weights[1], 2.0 * (g.g(m) + d), false, step),
                3 => scan_3d(g, weights, m, d, step),
                n => Err(Error::Unsupported(format!("exhaustive regions need n <= 3, got {n}"))),
            }
        }
    }
}

/// Linear-domain bracket on `P(λX + (1-λ)Y > m)` from a Riemann–Stieltjes
/// scan of `∫ F_Y((m - λx)/(1-λ)) dμ_X(x)` over `[0, m/λ]` plus the exact
/// tail `P(X > m/λ)`.
pub fn brute_sum_tail(g0: &dyn LogTail, g1: &dyn LogTail, lambda: f64, m: f64, step: f64) -> Result<(f64, f64)> {
    if !(lambda > 0.0 && lambda < 1.0) || !(m >= 0.0) || !(step > 0.0) {
        return Err(Error::Domain(format!("need 0 < lambda < 1, m >= 0, step > 0; got {lambda}, {m}, {step}")));
    }
    let mu = 1.0 - lambda;
    let hi = m / lambda;
    let y = |x: f64| (m - lambda * x) / mu;
    // Survival of Y, strict event: P(Y > y).
    let surv = |v: f64| if v < 0.0 { 1.0 } else { (-g1.g(v)).exp() };
    let surv_left = |v: f64| if v <= 0.0 { 1.0 } else { (-g1.g_left(v)).exp() };
    let tail0 = |x: f64| (-g0.g(x)).exp();
    let tail0_left = |x: f64| if x <= 0.0 { 1.0 } else { (-g0.g_left(x)).exp() };
    let extra: Vec<f64> = g0.knots(0.0, hi).into_iter().chain(g1.knots(0.0, m / mu).into_iter().map(|k| (m - mu * k) / lambda)).collect();
    let pts = partition(hi, step, extra)?;
    let (mut lo, mut up) = (0.0, 0.0);
    for (i, &p) in pts.iter().enumerate() {
        let atom = tail0_left(p) - tail0(p);
        if atom > 0.0 {
            let v = atom * surv(y(p));
            lo += v;
            up += v;
        }
        if let Some(&q) = pts.get(i + 1) {
            let mass = tail0(p) - tail0_left(q);
            if mass > 0.0 {
                // y runs over (y(q), y(p)) on the open cell.
                lo += mass * surv_left(y(p));
                up += mass * surv(y(q));
            }
        }
    }
    let beyond = tail0(hi);
    Ok((lo + beyond, up + beyond))
}
