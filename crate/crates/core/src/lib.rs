//! Certified canonical heights for the family f_λ(z) = (z^d + λ)/z over ℚ.
//!
//! - [`arith`]: places, valuations, absolute values, Weil heights.
//! - [`dynamics`]: exact and per-place orbit engines.
//! - [`heights`]: certified local and global canonical heights.
//! - [`generic`]: heights on the generic fiber over ℚ(t).
//! - [`preperiodic`]: preperiodicity verdicts and parameter search.
//! - [`cli`]: the `heightlab` command line.

pub mod arith;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod generic;
pub mod heights;
pub mod interval;
pub mod limits;
pub mod poly;
pub mod preperiodic;

pub use arith::{BigRational, Place, Prime, ProjectivePointQ};
pub use dynamics::FamilyParams;
pub use error::{Error, Result};
pub use heights::CertifiedValue;
pub use limits::Limits;
