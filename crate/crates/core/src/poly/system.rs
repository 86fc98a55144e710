use std::fmt;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::One;

use super::parse::parse_polynomials;
use super::polynomial::{Polynomial, Rational};
use crate::error::PolyError;
use crate::solve::numeric::NumericSystem;

/// An ordered system `F = (f_1, ..., f_c)` of polynomials in `n` shared
/// variables. Immutable after construction; the symbolic Jacobian and the
/// floating-point compiled form are built lazily, once.
pub struct PolySystem {
    polys: Vec<Polynomial>,
    names: Vec<String>,
    jacobian: OnceLock<Vec<Vec<Polynomial>>>,
    compiled: OnceLock<NumericSystem>,
}

impl Clone for PolySystem {
    fn clone(&self) -> Self {
        Self::from_parts(self.polys.clone(), self.names.clone())
            .expect("clone of a valid system")
    }
}

impl PartialEq for PolySystem {
    fn eq(&self, other: &Self) -> bool {
        self.polys == other.polys && self.names == other.names
    }
}

impl fmt::Debug for PolySystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PolySystem")
            .field("names", &self.names)
            .field("polys", &self.to_text())
            .finish()
    }
}

impl PolySystem {
    /// Builds a system whose polynomials may number at most `n`.
    pub fn new(polys: Vec<Polynomial>, names: Vec<String>) -> Result<Self, PolyError> {
        if polys.len() > names.len() {
            return Err(PolyError::Overdetermined {
                polys: polys.len(),
                vars: names.len(),
            });
        }
        Self::from_parts(polys, names)
    }

    /// Like [`PolySystem::new`] but without the `c <= n` restriction; used
    /// for auxiliary systems (minor lists) that are never solved directly.
    pub(crate) fn from_parts(polys: Vec<Polynomial>, names: Vec<String>) -> Result<Self, PolyError> {
        if polys.is_empty() {
            return Err(PolyError::EmptyInput);
        }
        let n = names.len();
        if let Some(p) = polys.iter().find(|p| p.num_vars() != n) {
            return Err(PolyError::DimensionMismatch {
                expected: n,
                got: p.num_vars(),
            });
        }
        Ok(Self {
            polys,
            names,
            jacobian: OnceLock::new(),
            compiled: OnceLock::new(),
        })
    }

    pub fn parse(text: &str, var_order: Option<&[String]>) -> Result<Self, PolyError> {
        let (polys, names) = parse_polynomials(text, var_order)?;
        Self::new(polys, names)
    }

    /// Builds a system in variables `x0, x1, ...`.
    pub fn with_default_names(polys: Vec<Polynomial>) -> Result<Self, PolyError> {
        let n = polys.first().map(|p| p.num_vars()).unwrap_or(0);
        Self::new(polys, (0..n).map(|i| format!("x{i}")).collect())
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    /// Number of equations; the codimension under the complete-intersection
    /// convention.
    pub fn codim(&self) -> usize {
        self.polys.len()
    }

    pub fn degrees(&self) -> Vec<u32> {
        self.polys.iter().map(Polynomial::degree).collect()
    }

    pub fn max_degree(&self) -> u32 {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    pub fn polys(&self) -> &[Polynomial] {
        &self.polys
    }

    pub fn var_names(&self) -> &[String] {
        &self.names
    }

    pub fn is_homogeneous(&self) -> bool {
        self.polys.iter().all(Polynomial::is_homogeneous)
    }

    /// Symbolic Jacobian, row `i` holding the gradient of `f_i`.
    pub fn jacobian_polys(&self) -> &[Vec<Polynomial>] {
        self.jacobian.get_or_init(|| {
            self.polys
                .iter()
                .map(|p| (0..self.num_vars()).map(|j| p.derivative(j)).collect())
                .collect()
        })
    }

    pub(crate) fn numeric(&self) -> &NumericSystem {
        self.compiled
            .get_or_init(|| NumericSystem::from_polys(&self.polys, self.num_vars(), 0))
    }

    pub fn evaluate(&self, x: &[Complex64]) -> Result<Vec<Complex64>, PolyError> {
        self.check_dim(x.len())?;
        Ok(self.polys.iter().map(|p| p.eval_complex(x)).collect())
    }

    pub fn evaluate_real(&self, x: &[f64]) -> Result<Vec<f64>, PolyError> {
        let z: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Ok(self.evaluate(&z)?.into_iter().map(|v| v.re).collect())
    }

    pub fn jacobian(&self, x: &[Complex64]) -> Result<DMatrix<Complex64>, PolyError> {
        self.check_dim(x.len())?;
        let rows = self.jacobian_polys();
        Ok(DMatrix::from_fn(self.codim(), self.num_vars(), |i, j| {
            rows[i][j].eval_complex(x)
        }))
    }

    pub fn jacobian_real(&self, x: &[f64]) -> Result<DMatrix<f64>, PolyError> {
        let z: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Ok(self.jacobian(&z)?.map(|v| v.re))
    }

    /// Infinity norm of `F(x)` at a real point.
    pub fn residual_real(&self, x: &[f64]) -> f64 {
        let mut vals = vec![Complex64::default(); self.codim()];
        let z: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.numeric().eval_values(&z, &[], &mut vals);
        vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `||F||` with `||F||^2 = sum_i ||f_i||_w^2`.
    pub fn weil_norm(&self) -> Result<f64, PolyError> {
        system_weil_norm(&self.polys)
    }

    /// Homogenizes every polynomial with a fresh last variable `name`.
    pub fn homogenize(&self, name: &str) -> Self {
        let n = self.num_vars();
        let map: Vec<usize> = (0..n).collect();
        let polys = self
            .polys
            .iter()
            .map(|p| {
                let d = p.degree();
                Polynomial::from_terms(
                    n + 1,
                    p.remap(n + 1, &map).terms().map(|(e, c)| {
                        let mut e2 = e.clone();
                        e2[n] = d - e.iter().sum::<u32>();
                        (e2, c.clone())
                    }),
                )
            })
            .collect();
        let mut names = self.names.clone();
        names.push(name.to_string());
        Self::from_parts(polys, names).expect("homogenization preserves shape")
    }

    /// Appends polynomials (same variables) to form a larger system.
    pub fn extended(&self, extra: &[Polynomial]) -> Result<Self, PolyError> {
        let mut polys = self.polys.clone();
        polys.extend_from_slice(extra);
        Self::new(polys, self.names.clone())
    }

    /// Canonical multi-line text form; parses back to an equal system.
    pub fn to_text(&self) -> String {
        self.polys
            .iter()
            .map(|p| p.to_text(&self.names))
            .collect::<Vec<_>>()
            .join("\n")
    }

    fn check_dim(&self, got: usize) -> Result<(), PolyError> {
        if got != self.num_vars() {
            return Err(PolyError::DimensionMismatch {
                expected: self.num_vars(),
                got,
            });
        }
        Ok(())
    }
}

pub fn system_weil_norm(polys: &[Polynomial]) -> Result<f64, PolyError> {
    let mut acc = Rational::default();
    for p in polys {
        acc += p.weil_norm_squared()?;
    }
    Ok(super::polynomial::rational_to_f64(&acc).sqrt())
}

/// `x_1^2 + ... + x_n^2 - 1`.
pub fn unit_sphere(n: usize) -> Polynomial {
    let sq = (0..n).fold(Polynomial::zero(n), |acc, i| &acc + &Polynomial::var(n, i).pow(2));
    &sq - &Polynomial::constant(n, Rational::one())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn evaluate_examples() {
        let circle = PolySystem::parse("x^2 + y^2 - 1", None).unwrap();
        assert_eq!(circle.evaluate(&[c(1.0), c(0.0)]).unwrap(), vec![c(0.0)]);
        assert_eq!(circle.evaluate(&[c(2.0), c(0.0)]).unwrap(), vec![c(3.0)]);
        assert!(matches!(
            circle.evaluate(&[c(1.0)]),
            Err(PolyError::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn jacobian_examples() {
        let circle = PolySystem::parse("x^2 + y^2 - 1", None).unwrap();
        let j = circle.jacobian(&[c(1.0), c(0.0)]).unwrap();
        assert_eq!(j.shape(), (1, 2));
        assert_eq!((j[(0, 0)], j[(0, 1)]), (c(2.0), c(0.0)));

        let order: Vec<String> = ["x", "y", "z", "w"].iter().map(|s| s.to_string()).collect();
        let quad = PolySystem::parse("x*y + y^2 - 2*z*w; x^2+y^2+z^2+w^2-1", Some(&order)).unwrap();
        let j = quad.jacobian(&[c(0.0), c(0.0), c(0.0), c(1.0)]).unwrap();
        let sphere_row: Vec<Complex64> = (0..4).map(|k| j[(1, k)]).collect();
        assert_eq!(sphere_row, vec![c(0.0), c(0.0), c(0.0), c(2.0)]);
        let j = quad.jacobian(&[c(1.0); 4]).unwrap();
        let row: Vec<f64> = (0..4).map(|k| j[(0, k)].re).collect();
        assert_eq!(row, vec![1.0, 3.0, -2.0, -2.0]);
    }

    #[test]
    fn overdetermined_rejected() {
        let err = PolySystem::parse("x - 1; x + 1", None).unwrap_err();
        assert_eq!(err, PolyError::Overdetermined { polys: 2, vars: 1 });
    }

    #[test]
    fn homogenize_adds_variable() {
        let circle = PolySystem::parse("x^2 + y^2 - 1", None).unwrap();
        let h = circle.homogenize("h");
        assert!(h.is_homogeneous());
        assert_eq!(h.to_text(), "x^2 + y^2 - h^2");
    }

    #[test]
    fn system_norm() {
        let sys = PolySystem::parse("x^2 + y^2; x*y", None).unwrap();
        assert!((sys.weil_norm().unwrap() - 2.5f64.sqrt()).abs() < 1e-15);
    }
}
