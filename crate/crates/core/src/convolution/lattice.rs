use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{domain, Error, Result};
use crate::tail::TailSpec;

fn exact(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::Domain(format!("{x} is not finite")))
}

/// Exact `P(Σ λ_j X_j > m)` for lattice laws, with float inputs converted
/// exactly to rationals.
pub fn exact_lattice_convolution(
    lattices: &[TailSpec],
    weights: &[f64],
    m: f64,
    max_outcomes: usize,
) -> Result<BigRational> {
    if lattices.len() != weights.len() || lattices.is_empty() {
        return domain("need one weight per lattice");
    }
    let mut atoms = Vec::with_capacity(lattices.len());
    let mut count: f64 = 1.0;
    for l in lattices {
        let a = raw_atoms(l).ok_or_else(|| Error::Unsupported(format!("{} is not a lattice law", l.name())))?;
        count *= a.len() as f64;
        atoms.push(a);
    }
    if count > max_outcomes as f64 {
        return Err(Error::Resource(format!("{count} outcomes exceed the cap {max_outcomes}")));
    }
    let mut dist: BTreeMap<BigRational, BigRational> = BTreeMap::new();
    dist.insert(BigRational::zero(), BigRational::one());
    for (atoms, &w) in atoms.iter().zip(weights) {
        if !(w > 0.0) {
            return domain(format!("weights must be positive, got {w}"));
        }
        let w = exact(w)?;
        let mut next = BTreeMap::new();
        for (s, p) in &dist {
            for (x, q) in atoms {
                let key = s + &w * x;
                *next.entry(key).or_insert_with(BigRational::zero) += p * q;
            }
        }
        dist = next;
    }
    let m = exact(m)?;
    let mut total = BigRational::zero();
    for (_, p) in dist.range((std::ops::Bound::Excluded(m), std::ops::Bound::Unbounded)) {
        total += p;
    }
    Ok(total)
}

/// Atoms with exactly converted, normalized probabilities.
fn raw_atoms(l: &TailSpec) -> Option<Vec<(BigRational, BigRational)>> {
    let TailSpec::Lattice { atoms, .. } = l else { return None };
    let mut out: Vec<(BigRational, BigRational)> = Vec::new();
    let mut total = BigRational::zero();
    for &(x, p) in atoms {
        let (x, p) = (BigRational::from_float(x)?, BigRational::from_float(p)?);
        total += &p;
        out.push((x, p));
    }
    for a in &mut out {
        a.1 = &a.1 / &total;
    }
    Some(out)
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
