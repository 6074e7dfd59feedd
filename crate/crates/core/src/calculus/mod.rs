//! Convex minorants, regime classification and concavity-point sets.

pub mod classify;
pub mod inverse_diff;
pub mod lset;
pub mod region;
pub mod minorant;

pub use classify::{classify_tail, Classification, ClassifyPolicy, Regime};
pub use minorant::{convex_minorant, AffinePiece, ConvexMinorant, GridPolicy};
pub use lset::{concavity_set, concavity_set_average, concavity_set_noniid, Interval, IntervalSet, SetPolicy};
pub use region::{ndim_region_measure, region_contains, RegionEstimate, RegionMethod};
pub use inverse_diff::{inverse_difference_check, InverseDifference};
