//! Local reach bounds from the condition number of a homogeneous system on
//! the unit sphere, and the iterative global lower bound.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{bottlenecks_with, bounding_box, BottleneckOptions, BoundingBox};
use crate::poly::{system_weil_norm, unit_sphere, PolySystem, Polynomial};
use crate::sample::{total_sample, SampleOptions};
use crate::solve::TrackSettings;
use crate::util::norm;

/// Tolerance for `| ||x|| - 1 |` before renormalization is refused.
pub const SPHERE_TOL: f64 = 1e-8;
/// Largest number of halvings of `epsilon` in [`reach_lower_bound`].
pub const MAX_HALVINGS: usize = 8;

/// The homogeneous system used for condition numbers: the polynomials of
/// `sys` other than the unit-sphere equation, or the quadratic form
/// `x_1^2 + ... + x_n^2` when only the sphere is given.
#[derive(Clone, Debug)]
pub struct SphereSystem {
    polys: Vec<Polynomial>,
    norm: f64,
    degrees: Vec<u32>,
    max_degree: u32,
}

impl SphereSystem {
    /// Homogeneous forms used as-is (no sphere equation expected).
    pub fn from_forms(polys: Vec<Polynomial>) -> Result<Self> {
        if polys.is_empty() {
            return Err(Error::InvalidArgument("empty system".into()));
        }
        if let Some(p) = polys.iter().find(|p| !p.is_homogeneous() || p.is_zero()) {
            return Err(Error::UnsupportedInput(format!(
                "reach bounds need homogeneous forms on the unit sphere; a polynomial of degree {} is not homogeneous",
                p.degree()
            )));
        }
        let norm = system_weil_norm(&polys)?;
        let degrees: Vec<u32> = polys.iter().map(Polynomial::degree).collect();
        let max_degree = *degrees.iter().max().expect("nonempty");
        Ok(Self {
            polys,
            norm,
            degrees,
            max_degree,
        })
    }

    /// Splits off the sphere equation from `sys`; the rest must be forms.
    pub fn from_system(sys: &PolySystem) -> Result<Self> {
        let n = sys.num_vars();
        let sphere = unit_sphere(n);
        if !sys.polys().contains(&sphere) {
            return Err(Error::UnsupportedInput(
                "reach bounds need X inside the unit sphere: include x_1^2 + ... + x_n^2 - 1 in the system".into(),
            ));
        }
        let rest: Vec<Polynomial> = sys.polys().iter().filter(|p| **p != sphere).cloned().collect();
        if rest.is_empty() {
            let form = &sphere + &Polynomial::one(n);
            return Self::from_forms(vec![form]);
        }
        Self::from_forms(rest)
    }

    pub fn weil_norm(&self) -> f64 {
        self.norm
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn num_vars(&self) -> usize {
        self.polys[0].num_vars()
    }

    fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let n = x.len();
        let z: Vec<num_complex::Complex64> = x.iter().map(|&v| num_complex::Complex64::new(v, 0.0)).collect();
        DMatrix::from_fn(self.polys.len(), n, |i, j| self.polys[i].derivative(j).eval_complex(&z).re)
    }

    /// `||F|| * ||DF(x)^+ Delta||_2` at a unit vector `x`.
    pub fn mu_norm(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.num_vars() {
            return Err(Error::InvalidArgument("point dimension mismatch".into()));
        }
        let off = (norm(x) - 1.0).abs();
        if off > SPHERE_TOL {
            return Err(Error::OffSphere(off));
        }
        let df = self.jacobian(x);
        let sv = df.singular_values();
        let smax = sv.max();
        let smin = sv.min();
        if !(smin > smax * 1e-12) {
            return Err(Error::SingularPoint(smin));
        }
        let gram = &df * df.transpose();
        let inv = gram.try_inverse().ok_or(Error::SingularPoint(smin))?;
        let delta = DMatrix::from_diagonal(&DVector::from_iterator(
            self.degrees.len(),
            self.degrees.iter().map(|&d| (d as f64).sqrt()),
        ));
        let m = df.transpose() * inv * delta;
        Ok(self.norm * m.singular_values().max())
    }

    /// `1 / (7 D^{3/2} mu_norm(F, x))`.
    pub fn eta(&self, x: &[f64]) -> Result<f64> {
        Ok(eta_from_mu(self.mu_norm(x)?, self.max_degree))
    }
}

pub fn eta_from_mu(mu: f64, max_degree: u32) -> f64 {
    1.0 / (7.0 * (max_degree as f64).powf(1.5) * mu)
}

/// Condition number of the homogeneous system `forms` at a unit vector.
pub fn mu_norm(forms: &[Polynomial], x: &[f64]) -> Result<f64> {
    SphereSystem::from_forms(forms.to_vec())?.mu_norm(x)
}

/// Local reach lower bound `eta(x)` for the homogeneous system `forms`.
pub fn eta(forms: &[Polynomial], x: &[f64]) -> Result<f64> {
    SphereSystem::from_forms(forms.to_vec())?.eta(x)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReachEstimate {
    /// `min_e eta(e)` over the last sample.
    pub m: f64,
    /// Density of the last sample.
    pub epsilon: f64,
    /// `m - epsilon`.
    pub lower_bound: f64,
    pub per_point: Vec<(Vec<f64>, f64)>,
    #[serde(rename = "D")]
    pub max_degree: u32,
    pub weil_norm: f64,
    pub iterations: usize,
    pub sample_size: usize,
    pub basic_count: usize,
    pub extra_count: usize,
    pub delta: f64,
    /// Whether the last sample met the density hypothesis for `epsilon`.
    pub sample_certified: bool,
    pub b2: f64,
    pub paths_tracked: u64,
}

impl ReachEstimate {
    /// Certificate line `tau_X > {lower_bound}`.
    pub fn certificate_line(&self) -> String {
        format!("tau_X > {}", self.lower_bound)
    }
}

#[derive(Clone, Debug, Default)]
pub struct ReachOptions {
    pub settings: TrackSettings,
    pub b2_override: Option<f64>,
    /// Fixed grid size for every pass (smoke runs); the sample is then
    /// certified only if the density hypothesis happens to hold.
    pub delta_override: Option<f64>,
    pub bounding_box: Option<BoundingBox>,
}

/// `min eta` over `points`, after projecting each onto the sphere.
pub fn eta_over(forms: &SphereSystem, points: &[Vec<f64>]) -> Result<Vec<(Vec<f64>, f64)>> {
    points
        .par_iter()
        .map(|p| {
            let r = norm(p);
            let off = (r - 1.0).abs();
            if off > 1e-6 {
                return Err(Error::OffSphere(off));
            }
            let u: Vec<f64> = p.iter().map(|v| v / r).collect();
            let e = forms.eta(&u)?;
            Ok((u, e))
        })
        .collect()
}

/// Narrowest bottleneck radius of a variety on the unit sphere. Antipodal
/// pairs always form a continuum of radius 1, so the infimum is the smaller
/// of 1 and the narrowest isolated radius.
pub fn sphere_b2(sys: &PolySystem, bbox: &BoundingBox, settings: &TrackSettings) -> Result<f64> {
    let rep = bottlenecks_with(
        sys,
        settings,
        &BottleneckOptions {
            wfs_override: None,
            bounding_box: Some(bbox.clone()),
        },
    )?;
    if rep.finite {
        return rep.b2.ok_or(Error::NoBottlenecks);
    }
    if !rep.continuum_is_antipodal() {
        return Err(Error::InfiniteBottlenecks);
    }
    Ok(rep.pairs.iter().map(|p| p.radius).fold(1.0, f64::min))
}

/// Start from `epsilon = epsilon0`, sample, take `m = min eta`, halve
/// `epsilon` until `m - epsilon > 0`.
pub fn reach_lower_bound(sys: &PolySystem, epsilon0: f64, opts: &ReachOptions) -> Result<ReachEstimate> {
    if !(epsilon0 > 0.0 && epsilon0.is_finite()) {
        return Err(Error::InvalidArgument(format!("epsilon0 must be positive, got {epsilon0}")));
    }
    let forms = SphereSystem::from_system(sys)?;
    let mut bbox = match &opts.bounding_box {
        Some(b) => b.clone(),
        None => bounding_box(sys, &opts.settings)?,
    };
    let b2 = match opts.b2_override {
        Some(b) => b,
        None => sphere_b2(sys, &bbox, &opts.settings)?,
    };
    let mut epsilon = 2.0 * epsilon0;
    let mut last = (f64::NAN, f64::NAN);
    for pass in 1..=MAX_HALVINGS {
        epsilon /= 2.0;
        let sopts = SampleOptions {
            settings: opts.settings.clone(),
            b2_override: Some(b2),
            delta_override: opts.delta_override,
            bounding_box: Some(bbox.clone()),
            ..Default::default()
        };
        let sample = total_sample(sys, epsilon, &sopts)?;
        bbox = sample.bounding_box.clone();
        let per_point = eta_over(&forms, &sample.points)?;
        let m = per_point.iter().map(|(_, e)| *e).fold(f64::INFINITY, f64::min);
        last = (m, epsilon);
        if m - epsilon > 0.0 {
            return Ok(ReachEstimate {
                m,
                epsilon,
                lower_bound: m - epsilon,
                per_point,
                max_degree: forms.max_degree(),
                weil_norm: forms.weil_norm(),
                iterations: pass,
                sample_size: sample.len(),
                basic_count: sample.basic_count,
                extra_count: sample.extra_count,
                delta: sample.delta,
                sample_certified: sample.epsilon_certified.is_some(),
                b2,
                paths_tracked: sample.paths_tracked,
            });
        }
    }
    Err(Error::ReachIterationCap {
        halvings: MAX_HALVINGS,
        m: last.0,
        epsilon: last.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn forms(text: &str) -> Vec<Polynomial> {
        PolySystem::parse(text, None).unwrap().polys().to_vec()
    }

    #[test]
    fn mu_of_xy_on_circle() {
        let f = forms("x*y");
        let mu = mu_norm(&f, &[1.0, 0.0]).unwrap();
        assert!((mu - 1.0).abs() < 1e-14);
        let e = eta(&f, &[1.0, 0.0]).unwrap();
        assert!((e - 1.0 / (7.0 * 2.0 * 2f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn eta_linear() {
        assert!((eta_from_mu(1.0, 1) - 1.0 / 7.0).abs() < 1e-16);
    }

    #[test]
    fn scale_invariance() {
        let f = forms("x^2*y - 3*z^3 + x*y*z");
        let g: Vec<Polynomial> = f.iter().map(|p| p.scale(&crate::poly::Rational::new(7.into(), 3.into()))).collect();
        let x = [0.48, 0.6, 0.64];
        assert!((mu_norm(&f, &x).unwrap() - mu_norm(&g, &x).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let f = forms("x*y");
        assert!(matches!(mu_norm(&f, &[2.0, 0.0]), Err(Error::OffSphere(_))));
        let names = ["x".to_string(), "y".to_string()];
        let f = PolySystem::parse("x^2", Some(&names)).unwrap().polys().to_vec();
        assert!(matches!(mu_norm(&f, &[0.0, 1.0]), Err(Error::SingularPoint(_))));
        let sys = PolySystem::parse("x^2 + y - 1", None).unwrap();
        assert!(matches!(SphereSystem::from_system(&sys), Err(Error::UnsupportedInput(_))));
        let sys = PolySystem::parse("x^2 + y^2 - 1; x - y - 1", None).unwrap();
        assert!(matches!(SphereSystem::from_system(&sys), Err(Error::UnsupportedInput(_))));
    }

    #[test]
    fn sphere_only_eta_constant() {
        let sys = PolySystem::parse("a^2 + b^2 + c^2 + d^2 - 1", None).unwrap();
        let s = SphereSystem::from_system(&sys).unwrap();
        for x in [[1.0, 0.0, 0.0, 0.0], [0.5, 0.5, 0.5, 0.5]] {
            assert!((s.eta(&x).unwrap() - 1.0 / 28.0).abs() < 1e-14);
        }
    }
}
