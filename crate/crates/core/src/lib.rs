//! Log-tail calculus for comparing tails of weighted sums with products of
//! marginal tails.

pub mod admission;
pub mod calculus;
pub mod cli;
pub mod convolution;
pub mod error;
pub mod logmath;
pub mod oracle;
pub mod tail;
pub mod witness;

pub use error::{Error, Result};
pub use tail::{LogTail, TailSpec};
