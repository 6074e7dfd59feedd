use serde::Serialize;

use crate::error::{domain, Result};
use crate::tail::{AverageTail, LogTail, Shape};

/// Interval with explicit endpoint closure, so sets stay exact at jumps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_closed: true, hi_closed: true }
    }

    pub fn contains(&self, x: f64) -> bool {
        (x > self.lo || (self.lo_closed && x == self.lo)) && (x < self.hi || (self.hi_closed && x == self.hi))
    }

    /// Stieltjes measure of this interval under `g`.
    pub fn measure<T: LogTail + ?Sized>(&self, g: &T) -> f64 {
        let lower = if self.lo_closed { g.g_left(self.lo) } else { g.g(self.lo) };
        if lower.is_infinite() {
            return 0.0;
        }
        let upper = if self.hi_closed { g.g(self.hi) } else { g.g_left(self.hi) };
        (upper - lower).max(0.0)
    }
}

/// Finite disjoint union of intervals carrying its measure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalSet {
    pub intervals: Vec<Interval>,
    pub measure: f64,
    /// Name of the log-tail the measure was taken under.
    pub measured_under: String,
}

impl IntervalSet {
    pub fn new<T: LogTail + ?Sized>(intervals: Vec<Interval>, g: &T, name: impl Into<String>) -> Self {
        let measure = intervals.iter().map(|i| i.measure(g)).sum();
        Self { intervals, measure, measured_under: name.into() }
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|i| i.contains(x))
    }

    /// Whether the closed interval `[a, b]` lies inside one component.
    pub fn contains_closed(&self, a: f64, b: f64) -> bool {
        self.intervals.iter().any(|i| i.contains(a) && i.contains(b))
    }

    pub fn recompute<T: LogTail + ?Sized>(&self, g: &T) -> f64 {
        self.intervals.iter().map(|i| i.measure(g)).sum()
    }
}

/// Resolution of the curved-family grid (cells per unit of `ℓ_end`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SetPolicy {
    pub cells: usize,
    pub bisections: usize,
}

impl Default for SetPolicy {
    fn default() -> Self {
        Self { cells: 4000, bisections: 60 }
    }
}

#[derive(Clone, Copy)]
struct Break {
    l: f64,
    r: f64,
    l_exact: bool,
    r_exact: bool,
}

/// Sublevel set `{ℓ ∈ [0, α/β] : A(ℓ) + B(α - βℓ) <= thr}`.
///
/// Knot-aligned and exact for step and affine pairs; curved pairs use a grid
/// where a cell joins only if both end limits pass, with bisection at the
/// boundary. `include_end` controls the point `ℓ = α/β`.
pub fn pair_sublevel_set(
    a: &dyn LogTail,
    b: &dyn LogTail,
    alpha: f64,
    beta: f64,
    thr: f64,
    include_end: bool,
    extra: &[(f64, f64)],
    policy: &SetPolicy,
) -> Vec<Interval> {
    let end = alpha / beta;
    let tol = thr + 1e-12 * thr.abs().max(1.0);
    let ok = |v: f64| v <= tol;

    let mut br: Vec<Break> = vec![
        Break { l: 0.0, r: alpha, l_exact: true, r_exact: true },
        Break { l: end, r: 0.0, l_exact: true, r_exact: true },
    ];
    for &(l, r) in extra {
        if l > 0.0 && l < end {
            br.push(Break { l, r, l_exact: true, r_exact: true });
        }
    }
    for k in a.knots(0.0, end) {
        br.push(Break { l: k, r: alpha - beta * k, l_exact: true, r_exact: false });
    }
    for k in b.knots(0.0, alpha) {
        br.push(Break { l: (alpha - k) / beta, r: k, l_exact: false, r_exact: true });
    }
    let curved = a.shape() == Shape::Curved || b.shape() == Shape::Curved;
    if curved {
        let n = policy.cells.max(2);
        for i in 1..n {
            br.push(Break {
                l: end * i as f64 / n as f64,
                r: alpha * (n - i) as f64 / n as f64,
                l_exact: true,
                r_exact: true,
            });
        }
    }
    br.retain(|p| p.l >= 0.0 && p.l <= end);
    br.sort_by(|x, y| x.l.total_cmp(&y.l));
    let mut pts: Vec<Break> = Vec::with_capacity(br.len());
    for p in br {
        match pts.last_mut() {
            Some(q) if (p.l - q.l).abs() <= 1e-12 * q.l.abs().max(1.0) => {
                if p.l_exact && !q.l_exact {
                    q.l = p.l;
                    q.l_exact = true;
                }
                if p.r_exact && !q.r_exact {
                    q.r = p.r;
                    q.r_exact = true;
                }
            }
            _ => pts.push(p),
        }
    }

    let phi = |l: f64| a.g(l) + b.g(alpha - beta * l);
    let mut pieces: Vec<Interval> = Vec::new();
    let mut push = |iv: Interval| match pieces.last_mut() {
        Some(last)
            if last.hi == iv.lo && (last.hi_closed || iv.lo_closed) =>
        {
            last.hi = iv.hi;
            last.hi_closed = iv.hi_closed;
        }
        _ => pieces.push(iv),
    };
    for (i, p) in pts.iter().enumerate() {
        let at_end = i + 1 == pts.len();
        if ok(a.g(p.l) + b.g(p.r)) && (include_end || !at_end) {
            push(Interval::closed(p.l, p.l));
        }
        if at_end {
            break;
        }
        let q = pts[i + 1];
        let left = ok(a.g(p.l) + b.g_left(p.r));
        let right = ok(a.g_left(q.l) + b.g(q.r));
        let open = |lo: f64, hi: f64| Interval { lo, hi, lo_closed: false, hi_closed: false };
        if left && right {
            // the two end limits bound the cell for monotone step/affine pairs
            push(open(p.l, q.l));
        } else if (left || right) && !(a.shape() == Shape::Step && b.shape() == Shape::Step) {
            let (mut inside, mut outside) = if left { (p.l, q.l) } else { (q.l, p.l) };
            for _ in 0..policy.bisections {
                let mid = 0.5 * (inside + outside);
                if mid == inside || mid == outside {
                    break;
                }
                if ok(phi(mid)) {
                    inside = mid;
                } else {
                    outside = mid;
                }
            }
            if left && inside > p.l {
                push(Interval { lo: p.l, hi: inside, lo_closed: false, hi_closed: true });
            } else if right && inside < q.l {
                push(Interval { lo: inside, hi: q.l, lo_closed: true, hi_closed: false });
            }
        }
    }
    pieces
}

fn check(m: f64, d: f64) -> Result<()> {
    if !(m > 0.0 && m.is_finite()) {
        return domain(format!("m must be positive, got {m}"));
    }
    if !(d >= 0.0) {
        return domain(format!("d must be non-negative, got {d}"));
    }
    Ok(())
}

/// `L^g_{m,d} = {ℓ ∈ [0, 2m] : g(ℓ) + g(2m - ℓ) <= 2(g(m) + d)}` with its g-measure.
pub fn concavity_set(g: &dyn LogTail, m: f64, d: f64) -> Result<IntervalSet> {
    concavity_set_with(g, m, d, &SetPolicy::default())
}

pub fn concavity_set_with(g: &dyn LogTail, m: f64, d: f64, policy: &SetPolicy) -> Result<IntervalSet> {
    check(m, d)?;
    let thr = 2.0 * (g.g(m) + d);
    let iv = pair_sublevel_set(g, g, 2.0 * m, 1.0, thr, true, &[(m, m)], policy);
    Ok(IntervalSet::new(iv, g, "g"))
}

/// `L^j_{m,d} = {ℓ ∈ [0, 2m] : p^j_m(ℓ) <= ḡ(m) + d}` for `ḡ = (g0 + g1)/2`,
/// measured under `g_j`.
pub fn concavity_set_noniid(
    g0: &dyn LogTail,
    g1: &dyn LogTail,
    m: f64,
    d: f64,
    j: usize,
) -> Result<IntervalSet> {
    check(m, d)?;
    if j > 1 {
        return domain(format!("j must be 0 or 1, got {j}"));
    }
    let (a, b) = if j == 0 { (g0, g1) } else { (g1, g0) };
    let thr = g0.g(m) + g1.g(m) + 2.0 * d;
    let iv = pair_sublevel_set(a, b, 2.0 * m, 1.0, thr, true, &[(m, m)], &SetPolicy::default());
    Ok(IntervalSet::new(iv, a, format!("g{j}")))
}

/// Concavity set of the average log-tail, measured under that average.
pub fn concavity_set_average(g0: &dyn LogTail, g1: &dyn LogTail, m: f64, d: f64) -> Result<IntervalSet> {
    let avg = AverageTail { a: g0, b: g1 };
    let mut s = concavity_set(&avg, m, d)?;
    s.measured_under = "average".into();
    Ok(s)
}
