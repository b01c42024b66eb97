//! Integral bases, periodicity and counting for pure fields `Q(a^{1/n})`.

pub mod arith;
pub mod count;
pub mod disc;
mod error;
pub mod newton;
pub mod shape;
pub mod table;

pub use error::{Error, Result};
