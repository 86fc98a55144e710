use num_complex::Complex64;

use super::numeric::{NumericSystem, Workspace};

type C64 = Complex64;

/// Scratch space for homotopy evaluations.
#[derive(Default)]
pub struct HomotopyWork {
    pub(crate) ws: Workspace,
    values: Vec<C64>,
    jac: Vec<C64>,
    mags: Vec<f64>,
}

impl HomotopyWork {
    fn prepare(&mut self, m: usize, stride: usize) {
        self.values.resize(m, C64::default());
        self.jac.resize(m * stride, C64::default());
        self.mags.resize(m, 0.0);
    }
}

/// `H(x, t)` with `t` running from 0 (start) to 1 (target).
pub trait Homotopy: Sync {
    fn dim(&self) -> usize;

    /// Fills `h = H(x,t)`, `hx = dH/dx` (row-major), `ht = dH/dt` and
    /// per-equation term magnitudes (for scaled residuals).
    fn eval(
        &self,
        x: &[C64],
        t: f64,
        work: &mut HomotopyWork,
        h: &mut [C64],
        hx: &mut [C64],
        ht: &mut [C64],
        mags: &mut [f64],
    );
}

/// `H = (1 - t) * gamma * G(x) + t * F(x; p)` with the total-degree start
/// system `G_i = x_i^{d_i} - 1`.
pub struct TotalDegreeHomotopy<'a> {
    pub sys: &'a NumericSystem,
    pub params: &'a [C64],
    pub gamma: C64,
}

impl Homotopy for TotalDegreeHomotopy<'_> {
    fn dim(&self) -> usize {
        self.sys.n_unknowns()
    }

    fn eval(
        &self,
        x: &[C64],
        t: f64,
        work: &mut HomotopyWork,
        h: &mut [C64],
        hx: &mut [C64],
        ht: &mut [C64],
        mags: &mut [f64],
    ) {
        let n = self.dim();
        let stride = n + self.sys.n_params();
        work.prepare(n, stride);
        self.sys.eval_full(
            x,
            self.params,
            &mut work.values,
            &mut work.jac,
            &mut work.mags,
            &mut work.ws,
        );
        let s = 1.0 - t;
        for i in 0..n {
            let d = self.sys.degrees()[i] as i32;
            let xd1 = x[i].powi(d - 1);
            let xd = xd1 * x[i];
            let g = xd - 1.0;
            h[i] = self.gamma * g * s + work.values[i] * t;
            ht[i] = work.values[i] - self.gamma * g;
            mags[i] = work.mags[i] * t + s * (xd.norm() + 1.0);
            for j in 0..n {
                hx[i * n + j] = work.jac[i * stride + j] * t;
            }
            hx[i * n + i] += self.gamma * s * xd1 * d as f64;
        }
    }
}

/// `H(x, s) = F(x; (1 - s) p0 + s p1)`.
pub struct ParameterHomotopy<'a> {
    pub sys: &'a NumericSystem,
    pub p0: &'a [C64],
    pub p1: &'a [C64],
}

impl Homotopy for ParameterHomotopy<'_> {
    fn dim(&self) -> usize {
        self.sys.n_unknowns()
    }

    fn eval(
        &self,
        x: &[C64],
        t: f64,
        work: &mut HomotopyWork,
        h: &mut [C64],
        hx: &mut [C64],
        ht: &mut [C64],
        mags: &mut [f64],
    ) {
        let n = self.dim();
        let np = self.sys.n_params();
        let stride = n + np;
        work.prepare(n, stride);
        let p: Vec<C64> = self
            .p0
            .iter()
            .zip(self.p1)
            .map(|(a, b)| a * (1.0 - t) + b * t)
            .collect();
        self.sys
            .eval_full(x, &p, &mut work.values, &mut work.jac, &mut work.mags, &mut work.ws);
        for i in 0..n {
            h[i] = work.values[i];
            mags[i] = work.mags[i];
            hx[i * n..(i + 1) * n].copy_from_slice(&work.jac[i * stride..i * stride + n]);
            let mut d = C64::default();
            for j in 0..np {
                d += work.jac[i * stride + n + j] * (self.p1[j] - self.p0[j]);
            }
            ht[i] = d;
        }
    }
}
