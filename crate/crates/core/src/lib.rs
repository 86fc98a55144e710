//! Dense sampling of smooth compact real algebraic varieties, bottleneck and
//! reach computations, and homology recovery from the resulting samples.

pub mod complex;
pub mod error;
pub mod geom;
pub mod poly;
pub mod reach;
pub mod sample;
pub mod solve;
pub mod util;

pub use error::{Error, PolyError, Result, SolveError};
