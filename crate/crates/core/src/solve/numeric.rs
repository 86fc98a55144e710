//! Floating-point compiled form of a polynomial system, evaluated together
//! with its partial derivatives.

use num_complex::Complex64;

use crate::poly::{rational_to_f64, Polynomial};

type C64 = Complex64;

#[derive(Clone, Debug)]
struct CompiledPoly {
    coeffs: Vec<C64>,
    /// Flat exponent table, `stride` entries per term.
    exps: Vec<u16>,
}

/// A system in `n_unknowns + n_params` variables; the first `n_unknowns`
/// are the unknowns, the rest are parameters fixed during evaluation.
#[derive(Clone, Debug)]
pub struct NumericSystem {
    n_unknowns: usize,
    n_params: usize,
    polys: Vec<CompiledPoly>,
    max_exp: Vec<usize>,
    degrees: Vec<u32>,
}

/// Scratch buffers reused across evaluations.
#[derive(Default)]
pub struct Workspace {
    z: Vec<C64>,
    powers: Vec<C64>,
    prefix: Vec<C64>,
    offsets: Vec<usize>,
}

impl NumericSystem {
    pub fn from_polys(polys: &[Polynomial], n_unknowns: usize, n_params: usize) -> Self {
        let stride = n_unknowns + n_params;
        let mut max_exp = vec![0usize; stride];
        let mask: Vec<bool> = (0..stride).map(|i| i < n_unknowns).collect();
        let compiled = polys
            .iter()
            .map(|p| {
                assert_eq!(p.num_vars(), stride, "variable count mismatch");
                let mut coeffs = Vec::with_capacity(p.num_terms());
                let mut exps = Vec::with_capacity(p.num_terms() * stride);
                for (e, c) in p.terms() {
                    coeffs.push(C64::new(rational_to_f64(c), 0.0));
                    for (i, &a) in e.iter().enumerate() {
                        max_exp[i] = max_exp[i].max(a as usize);
                        exps.push(a as u16);
                    }
                }
                CompiledPoly { coeffs, exps }
            })
            .collect();
        Self {
            n_unknowns,
            n_params,
            polys: compiled,
            max_exp,
            degrees: polys.iter().map(|p| p.degree_in(&mask)).collect(),
        }
    }

    pub fn n_equations(&self) -> usize {
        self.polys.len()
    }

    pub fn n_unknowns(&self) -> usize {
        self.n_unknowns
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    /// Degrees in the unknowns only.
    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    fn load(&self, x: &[C64], p: &[C64], ws: &mut Workspace) {
        debug_assert_eq!(x.len(), self.n_unknowns);
        debug_assert_eq!(p.len(), self.n_params);
        ws.z.clear();
        ws.z.extend_from_slice(x);
        ws.z.extend_from_slice(p);
        ws.offsets.clear();
        ws.powers.clear();
        for (i, &zi) in ws.z.iter().enumerate() {
            ws.offsets.push(ws.powers.len());
            let mut acc = C64::new(1.0, 0.0);
            ws.powers.push(acc);
            for _ in 0..self.max_exp[i] {
                acc *= zi;
                ws.powers.push(acc);
            }
        }
    }

    /// Values only.
    pub fn eval_values(&self, x: &[C64], p: &[C64], out: &mut [C64]) {
        let mut ws = Workspace::default();
        self.eval_values_ws(x, p, out, &mut ws);
    }

    pub fn eval_values_ws(&self, x: &[C64], p: &[C64], out: &mut [C64], ws: &mut Workspace) {
        self.load(x, p, ws);
        let stride = self.n_unknowns + self.n_params;
        for (k, poly) in self.polys.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (t, c) in poly.coeffs.iter().enumerate() {
                let e = &poly.exps[t * stride..(t + 1) * stride];
                let mut m = *c;
                for (i, &a) in e.iter().enumerate() {
                    if a > 0 {
                        m *= ws.powers[ws.offsets[i] + a as usize];
                    }
                }
                acc += m;
            }
            out[k] = acc;
        }
    }

    /// Values, the Jacobian in all variables (row-major, `stride` columns,
    /// unknowns first) and a per-equation sum of absolute term magnitudes
    /// used to scale residuals.
    pub fn eval_full(
        &self,
        x: &[C64],
        p: &[C64],
        values: &mut [C64],
        jac: &mut [C64],
        magnitudes: &mut [f64],
        ws: &mut Workspace,
    ) {
        self.load(x, p, ws);
        let stride = self.n_unknowns + self.n_params;
        jac.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        ws.prefix.resize(stride + 1, C64::new(0.0, 0.0));
        for (k, poly) in self.polys.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            let mut mag = 0.0;
            let row = &mut jac[k * stride..(k + 1) * stride];
            for (t, c) in poly.coeffs.iter().enumerate() {
                let e = &poly.exps[t * stride..(t + 1) * stride];
                // prefix[i] = prod_{j<i} z_j^{a_j}
                ws.prefix[0] = C64::new(1.0, 0.0);
                for i in 0..stride {
                    let a = e[i] as usize;
                    ws.prefix[i + 1] = if a > 0 {
                        ws.prefix[i] * ws.powers[ws.offsets[i] + a]
                    } else {
                        ws.prefix[i]
                    };
                }
                let m = *c * ws.prefix[stride];
                acc += m;
                mag += m.norm();
                // walk backwards with a suffix product
                let mut suffix = *c;
                for i in (0..stride).rev() {
                    let a = e[i] as usize;
                    if a > 0 {
                        let d = ws.prefix[i]
                            * suffix
                            * ws.powers[ws.offsets[i] + a - 1]
                            * a as f64;
                        row[i] += d;
                        suffix *= ws.powers[ws.offsets[i] + a];
                    }
                }
            }
            values[k] = acc;
            magnitudes[k] = mag;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::PolySystem;

    #[test]
    fn full_eval_matches_symbolic() {
        let sys = PolySystem::parse("x^3*y - 2*y^2 + x - 5; x*y*z - z^3 + 1; x + y + z", None).unwrap();
        let num = NumericSystem::from_polys(sys.polys(), 3, 0);
        let x = [C64::new(0.3, -0.2), C64::new(-1.1, 0.4), C64::new(0.7, 0.9)];
        let mut v = [C64::default(); 3];
        let mut j = [C64::default(); 9];
        let mut m = [0.0; 3];
        num.eval_full(&x, &[], &mut v, &mut j, &mut m, &mut Workspace::default());
        let vs = sys.evaluate(&x).unwrap();
        let js = sys.jacobian(&x).unwrap();
        for i in 0..3 {
            assert!((v[i] - vs[i]).norm() < 1e-13);
            for k in 0..3 {
                assert!((j[i * 3 + k] - js[(i, k)]).norm() < 1e-13);
            }
        }
        assert_eq!(num.degrees(), &[4, 3, 1]);
    }

    #[test]
    fn params_split() {
        // y^2 - g with unknown y and parameter g
        let sys = PolySystem::parse("y^2 - g", Some(&["y".into(), "g".into()])).unwrap();
        let num = NumericSystem::from_polys(sys.polys(), 1, 1);
        assert_eq!(num.degrees(), &[2]);
        let mut v = [C64::default()];
        let mut j = [C64::default(); 2];
        let mut m = [0.0];
        num.eval_full(
            &[C64::new(2.0, 0.0)],
            &[C64::new(3.0, 0.0)],
            &mut v,
            &mut j,
            &mut m,
            &mut Workspace::default(),
        );
        assert_eq!(v[0], C64::new(1.0, 0.0));
        assert_eq!(j, [C64::new(4.0, 0.0), C64::new(-1.0, 0.0)]);
        assert_eq!(m[0], 7.0);
    }
}
