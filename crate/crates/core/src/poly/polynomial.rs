use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::PolyError;

/// Exact coefficient type.
pub type Rational = BigRational;

/// Exponent multi-index `a = (a_1, ..., a_n)`.
pub type Exponent = Vec<u32>;

/// A multivariate polynomial with exact rational coefficients in a dense
/// exponent-map representation. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    num_vars: usize,
    terms: BTreeMap<Exponent, Rational>,
    degree: u32,
}

impl Polynomial {
    pub fn zero(num_vars: usize) -> Self {
        Self {
            num_vars,
            terms: BTreeMap::new(),
            degree: 0,
        }
    }

    pub fn constant(num_vars: usize, c: Rational) -> Self {
        Self::from_terms(num_vars, [(vec![0; num_vars], c)])
    }

    pub fn one(num_vars: usize) -> Self {
        Self::constant(num_vars, Rational::one())
    }

    /// The coordinate function `x_i`.
    pub fn var(num_vars: usize, i: usize) -> Self {
        assert!(i < num_vars, "variable index {i} out of range");
        let mut e = vec![0; num_vars];
        e[i] = 1;
        Self::from_terms(num_vars, [(e, Rational::one())])
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs, summing
    /// repeated exponents and dropping zeros.
    pub fn from_terms<I>(num_vars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Exponent, Rational)>,
    {
        let mut map: BTreeMap<Exponent, Rational> = BTreeMap::new();
        for (e, c) in terms {
            assert_eq!(e.len(), num_vars, "exponent length mismatch");
            if c.is_zero() {
                continue;
            }
            let slot = map.entry(e).or_insert_with(Rational::zero);
            *slot += c;
        }
        map.retain(|_, c| !c.is_zero());
        let degree = map.keys().map(|e| e.iter().sum()).max().unwrap_or(0);
        Self {
            num_vars,
            terms: map,
            degree,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Total degree; zero for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, e: &[u32]) -> Rational {
        self.terms.get(e).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coefficient(&vec![0; self.num_vars])
    }

    pub fn is_homogeneous(&self) -> bool {
        self.terms
            .keys()
            .all(|e| e.iter().sum::<u32>() == self.degree)
    }

    /// Degree of the polynomial in the variables selected by `mask`.
    pub fn degree_in(&self, mask: &[bool]) -> u32 {
        self.terms
            .keys()
            .map(|e| {
                e.iter()
                    .zip(mask)
                    .filter(|(_, &m)| m)
                    .map(|(a, _)| *a)
                    .sum()
            })
            .max()
            .unwrap_or(0)
    }

    /// The homogeneous component of top degree.
    pub fn leading_form(&self) -> Self {
        let d = self.degree;
        Self::from_terms(
            self.num_vars,
            self.terms
                .iter()
                .filter(|(e, _)| e.iter().sum::<u32>() == d)
                .map(|(e, c)| (e.clone(), c.clone())),
        )
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::from_terms(
            self.num_vars,
            self.terms.iter().map(|(e, a)| (e.clone(), a * c)),
        )
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut result = Self::one(self.num_vars);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Partial derivative with respect to `x_i`.
    pub fn derivative(&self, i: usize) -> Self {
        Self::from_terms(
            self.num_vars,
            self.terms.iter().filter(|(e, _)| e[i] > 0).map(|(e, c)| {
                let mut e2 = e.clone();
                e2[i] -= 1;
                (e2, c * Rational::from_integer(BigInt::from(e[i])))
            }),
        )
    }

    /// Re-embeds the polynomial into `new_num_vars` variables, sending old
    /// variable `i` to new variable `map[i]`.
    pub fn remap(&self, new_num_vars: usize, map: &[usize]) -> Self {
        assert_eq!(map.len(), self.num_vars);
        Self::from_terms(
            new_num_vars,
            self.terms.iter().map(|(e, c)| {
                let mut e2 = vec![0; new_num_vars];
                for (i, &a) in e.iter().enumerate() {
                    e2[map[i]] += a;
                }
                (e2, c.clone())
            }),
        )
    }

    /// Substitutes exact values for a subset of variables; the result keeps
    /// the same variable count (substituted variables no longer appear).
    pub fn substitute(&self, values: &[(usize, Rational)]) -> Self {
        Self::from_terms(
            self.num_vars,
            self.terms.iter().map(|(e, c)| {
                let mut e2 = e.clone();
                let mut c2 = c.clone();
                for (i, v) in values {
                    let a = e2[*i];
                    if a > 0 {
                        c2 *= num_traits::pow(v.clone(), a as usize);
                        e2[*i] = 0;
                    }
                }
                (e2, c2)
            }),
        )
    }

    pub fn eval_rational(&self, x: &[Rational]) -> Rational {
        assert_eq!(x.len(), self.num_vars);
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut m = c.clone();
            for (xi, &a) in x.iter().zip(e) {
                if a > 0 {
                    m *= num_traits::pow(xi.clone(), a as usize);
                }
            }
            acc += m;
        }
        acc
    }

    /// Floating complex evaluation. Terms are visited in the map's fixed
    /// order, so results are deterministic.
    pub fn eval_complex(&self, x: &[Complex64]) -> Complex64 {
        assert_eq!(x.len(), self.num_vars);
        let powers = power_table(x, self.degree as usize);
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut m = Complex64::new(rational_to_f64(c), 0.0);
            for (i, &a) in e.iter().enumerate() {
                if a > 0 {
                    m *= powers[i][a as usize];
                }
            }
            acc += m;
        }
        acc
    }

    /// `p(args_1, ..., args_n)`: substitutes a polynomial for every variable.
    pub fn compose(&self, args: &[Polynomial]) -> Self {
        assert_eq!(args.len(), self.num_vars);
        let m = args.first().map(|a| a.num_vars).unwrap_or(0);
        let mut acc = Self::zero(m);
        for (e, c) in &self.terms {
            let mut t = Self::constant(m, c.clone());
            for (a, &k) in args.iter().zip(e) {
                if k > 0 {
                    t = &t * &a.pow(k);
                }
            }
            acc = &acc + &t;
        }
        acc
    }

    /// Weil norm `sqrt(sum_a h_a^2 / multinomial(d; a))` of a homogeneous
    /// polynomial.
    pub fn weil_norm(&self) -> Result<f64, PolyError> {
        Ok(self.weil_norm_squared()?.to_f64().unwrap_or(f64::NAN).sqrt())
    }

    pub fn weil_norm_squared(&self) -> Result<Rational, PolyError> {
        if !self.is_homogeneous() {
            return Err(PolyError::NotHomogeneous);
        }
        let d = self.degree;
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let inv_multinomial = Rational::new(
                e.iter().map(|&a| factorial(a)).product(),
                factorial(d),
            );
            acc += c * c * inv_multinomial;
        }
        Ok(acc)
    }

    /// Canonical text form: graded-lex order (highest degree first), explicit
    /// `*` and `^`, rational coefficients written as `p/q`.
    pub fn to_text(&self, names: &[String]) -> String {
        assert_eq!(names.len(), self.num_vars);
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (k, (e, c)) in self.graded_lex_terms().into_iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if k == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mut factors: Vec<String> = Vec::new();
            let is_const = e.iter().all(|&a| a == 0);
            if !abs.is_one() || is_const {
                factors.push(format_rational(&abs));
            }
            for (i, &a) in e.iter().enumerate() {
                match a {
                    0 => {}
                    1 => factors.push(names[i].clone()),
                    _ => factors.push(format!("{}^{}", names[i], a)),
                }
            }
            let _ = write!(out, "{}", factors.join("*"));
        }
        out
    }

    fn graded_lex_terms(&self) -> Vec<(&Exponent, &Rational)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|(a, _), (b, _)| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        v
    }
}

fn factorial(k: u32) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

pub(crate) fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact rational value of a finite double.
pub fn rational_from_f64(x: f64) -> Rational {
    Rational::from_float(x).expect("finite float")
}

pub(crate) fn power_table(x: &[Complex64], max_deg: usize) -> Vec<Vec<Complex64>> {
    x.iter()
        .map(|&xi| {
            let mut row = Vec::with_capacity(max_deg + 1);
            let mut p = Complex64::new(1.0, 0.0);
            row.push(p);
            for _ in 0..max_deg {
                p *= xi;
                row.push(p);
            }
            row
        })
        .collect()
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.num_vars, rhs.num_vars);
        Polynomial::from_terms(
            self.num_vars,
            self.terms
                .iter()
                .chain(rhs.terms.iter())
                .map(|(e, c)| (e.clone(), c.clone())),
        )
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial::from_terms(
            self.num_vars,
            self.terms.iter().map(|(e, c)| (e.clone(), -c.clone())),
        )
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.num_vars, rhs.num_vars);
        let mut out: BTreeMap<Exponent, Rational> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: Exponent = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                let slot = out.entry(e).or_insert_with(Rational::zero);
                *slot += ca * cb;
            }
        }
        Polynomial::from_terms(self.num_vars, out)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: Polynomial) -> Polynomial {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn circle() -> Polynomial {
        let x = Polynomial::var(2, 0);
        let y = Polynomial::var(2, 1);
        &(&x.pow(2) + &y.pow(2)) - &Polynomial::one(2)
    }

    #[test]
    fn zero_coefficients_are_dropped() {
        let x = Polynomial::var(1, 0);
        let p = &x - &x;
        assert!(p.is_zero());
        assert_eq!(p.degree(), 0);
    }

    #[test]
    fn constant_term_is_value_at_origin() {
        let p = circle();
        assert_eq!(p.constant_term(), r(-1, 1));
        let z = p.eval_complex(&[Complex64::new(0.0, 0.0); 2]);
        assert_eq!(z, Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn derivative_and_degree() {
        let p = circle();
        assert_eq!(p.degree(), 2);
        let dx = p.derivative(0);
        assert_eq!(dx, Polynomial::var(2, 0).scale(&r(2, 1)));
    }

    #[test]
    fn weil_norms() {
        let x = Polynomial::var(2, 0);
        let y = Polynomial::var(2, 1);
        let h = &x.pow(2) + &y.pow(2);
        assert!((h.weil_norm().unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let xy = &x * &y;
        assert!((xy.weil_norm().unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(matches!(circle().weil_norm(), Err(PolyError::NotHomogeneous)));
    }

    #[test]
    fn substitution_and_remap() {
        let p = circle();
        let s = p.substitute(&[(0, r(1, 2))]);
        // y^2 - 3/4
        assert_eq!(s.coefficient(&[0, 2]), r(1, 1));
        assert_eq!(s.constant_term(), r(-3, 4));
        let q = p.remap(3, &[2, 0]);
        assert_eq!(q.coefficient(&[0, 0, 2]), r(1, 1));
        assert_eq!(q.coefficient(&[2, 0, 0]), r(1, 1));
    }

    #[test]
    fn compose_with_linear_forms() {
        // x^2 + y^2 at (x + y, x - y) = 2x^2 + 2y^2
        let p = circle();
        let (x, y) = (Polynomial::var(2, 0), Polynomial::var(2, 1));
        let q = p.compose(&[&x + &y, &x - &y]);
        assert_eq!(q.coefficient(&[2, 0]), r(2, 1));
        assert_eq!(q.coefficient(&[1, 1]), r(0, 1));
        assert_eq!(q.constant_term(), r(-1, 1));
    }

    #[test]
    fn printer_is_graded_lex() {
        let names = vec!["x".to_string(), "y".to_string()];
        let x = Polynomial::var(2, 0);
        let y = Polynomial::var(2, 1);
        let p = &(&(&x * &y) + &y.pow(3)) - &x.scale(&r(3, 4));
        assert_eq!(p.to_text(&names), "y^3 + x*y - 3/4*x");
    }
}
