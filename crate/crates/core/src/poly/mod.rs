//! Exact-coefficient multivariate polynomials and systems.

mod parse;
mod polynomial;
mod system;

pub use parse::parse_polynomials;
pub use polynomial::{rational_from_f64, rational_to_f64, Exponent, Polynomial, Rational};
pub use system::{system_weil_norm, unit_sphere, PolySystem};
