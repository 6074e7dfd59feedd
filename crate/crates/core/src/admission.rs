//! r-quantile admission process with veto.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::convolution::{sum_tail_two_event, Event, TwoSumOptions};
use crate::error::{Error, Result};
use crate::tail::{sample, LogTail, TailSpec};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClubState {
    /// Sorted opinions, founder's 0 included.
    pub members: Vec<f64>,
    pub r: f64,
    pub steps: usize,
    pub admitted: usize,
    pub q: f64,
}

/// Index of the r-quantile in a sorted multiset of size `n`: the smallest
/// rank `k` (from 1) with `k / n >= r`.
pub fn quantile_index(n: usize, r: f64) -> usize {
    let k = (r * n as f64 - 1e-9).ceil().max(1.0) as usize;
    k.min(n) - 1
}

impl ClubState {
    pub fn new(r: f64) -> Result<Self> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::Domain(format!("r must lie in (0, 1), got {r}")));
        }
        Ok(Self { members: vec![0.0], r, steps: 0, admitted: 0, q: 0.0 })
    }

    /// Fraction of members whose nearest candidate is `lo` (ties go left).
    pub fn vote_fraction(&self, lo: f64, hi: f64) -> f64 {
        let mid = 0.5 * (lo + hi);
        let left = self.members.partition_point(|&o| o <= mid);
        left as f64 / self.members.len() as f64
    }

    fn insert(&mut self, x: f64) {
        let at = self.members.partition_point(|&o| o <= x);
        self.members.insert(at, x);
        self.q = self.members[quantile_index(self.members.len(), self.r)];
    }

    /// One step with given candidate opinions.
    pub fn step_with(&mut self, c1: f64, c2: f64) -> StepEvent {
        let (lo, hi) = if c1 <= c2 { (c1, c2) } else { (c2, c1) };
        let frac = if lo == hi { 1.0 } else { self.vote_fraction(lo, hi) };
        let admitted = frac >= self.r;
        if admitted {
            self.insert(lo);
            self.admitted += 1;
        }
        self.steps += 1;
        StepEvent {
            step: self.steps,
            candidate_lo: lo,
            candidate_hi: hi,
            vote_fraction: frac,
            admitted,
            club_size: self.members.len(),
            q_t: self.q,
        }
    }

    pub fn step(&mut self, spec: &TailSpec, rng: &mut ChaCha8Rng) -> StepEvent {
        let c1 = sample(spec, rng);
        let c2 = sample(spec, rng);
        self.step_with(c1, c2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepEvent {
    pub step: usize,
    pub candidate_lo: f64,
    pub candidate_hi: f64,
    pub vote_fraction: f64,
    pub admitted: bool,
    pub club_size: usize,
    pub q_t: f64,
}

impl StepEvent {
    pub const CSV_HEADER: [&'static str; 7] =
        ["step", "candidate_lo", "candidate_hi", "vote_fraction", "admitted", "club_size", "q_t"];

    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.step.to_string(),
            self.candidate_lo.to_string(),
            self.candidate_hi.to_string(),
            self.vote_fraction.to_string(),
            u8::from(self.admitted).to_string(),
            self.club_size.to_string(),
            self.q_t.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub events: Vec<StepEvent>,
    /// q_t after each admission.
    pub q_series: Vec<f64>,
    pub state: ClubState,
}

impl Trajectory {
    /// Standard deviation of q_t over the last `fraction` of admissions.
    pub fn tail_std(&self, fraction: f64) -> f64 {
        let n = self.q_series.len();
        let k = ((n as f64 * fraction).ceil() as usize).clamp(1, n.max(1));
        let tail = &self.q_series[n.saturating_sub(k)..];
        if tail.is_empty() {
            return 0.0;
        }
        let mean = tail.iter().sum::<f64>() / tail.len() as f64;
        (tail.iter().map(|q| (q - mean).powi(2)).sum::<f64>() / tail.len() as f64).sqrt()
    }
}

pub fn run(spec: &TailSpec, r: f64, steps: usize, seed: u64) -> Result<Trajectory> {
    if steps == 0 {
        return Err(Error::Domain("steps must be at least 1".into()));
    }
    let mut state = ClubState::new(r)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut events = Vec::with_capacity(steps);
    let mut q_series = Vec::new();
    for _ in 0..steps {
        let ev = state.step(spec, &mut rng);
        if ev.admitted {
            q_series.push(ev.q_t);
        }
        events.push(ev);
    }
    Ok(Trajectory { events, q_series, state })
}

/// Bracket on `P(min(X, Y) > q | (X + Y)/2 >= q)` for i.i.d. `X, Y`.
pub fn conditional_min_ratio_bracket(g: &dyn LogTail, q: f64) -> Result<(f64, f64)> {
    if !(q > 0.0) {
        return Err(Error::Domain(format!("q must be positive, got {q}")));
    }
    let den = sum_tail_two_event(g, g, 0.5, q, Event::AtLeast, &TwoSumOptions::default())?;
    if den.log_lo == f64::NEG_INFINITY {
        return Err(Error::Precision {
            message: "denominator bracket reaches probability 0".into(),
            achieved: (den.log_lo, den.log_hi),
        });
    }
    let num = -2.0 * g.g(q);
    Ok(((num - den.log_hi).exp().min(1.0), (num - den.log_lo).exp().min(1.0)))
}

/// Midpoint (in log space) of [`conditional_min_ratio_bracket`].
pub fn conditional_min_ratio(g: &dyn LogTail, q: f64) -> Result<f64> {
    let (lo, hi) = conditional_min_ratio_bracket(g, q)?;
    Ok(if lo > 0.0 { (0.5 * (lo.ln() + hi.ln())).exp() } else { 0.5 * hi })
}
