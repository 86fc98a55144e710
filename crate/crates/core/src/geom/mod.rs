//! Normal loci, bounding boxes, slices and bottlenecks of a variety
//! `X = {F = 0}`.

mod bottleneck;
mod slice;

pub use bottleneck::{bottlenecks, bottlenecks_with, BottleneckOptions, BottleneckPair, BottleneckReport};
pub use slice::{slice, SliceFamily, SliceKind, SliceResult};

use num_bigint::BigInt;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{PolySystem, Polynomial, Rational};
use crate::solve::{real_points, ParametricSystem, PathStatus, SolutionSet, TrackSettings};
use crate::util::dist;

/// RNG stream ids; each random choice in a run draws from its own stream.
pub(crate) mod streams {
    pub const BOX_Q: u64 = 1;
    pub const BOTTLENECK_MIX: u64 = 2;
    pub const GRID: u64 = 3;
    pub const EXTRA_Q: u64 = 4;
    pub const SLICE_START: u64 = 16;
}

/// Critical points of the squared distance to `q` on `X`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalLocus {
    pub base_point: Vec<f64>,
    pub critical_points: Vec<Vec<f64>>,
    /// Number of converged complex endpoints.
    pub edd_observed: usize,
    pub paths_tracked: u64,
}

/// Axis-aligned cube containing the real points of `X`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub center: Vec<f64>,
    pub half_width: f64,
}

impl BoundingBox {
    pub fn width(&self) -> f64 {
        2.0 * self.half_width
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(&self.center)
            .all(|(a, c)| (a - c).abs() <= self.half_width)
    }
}

/// Relative margin added to the box half-width.
pub const BOX_MARGIN: f64 = 0.01;

/// Rational with denominator 2^20 closest to `x`; keeps random choices exact
/// and short.
pub(crate) fn dyadic(x: f64) -> Rational {
    let scale = (1u64 << 20) as f64;
    Rational::new(BigInt::from((x * scale).round() as i64), BigInt::from(1u64 << 20))
}

/// The Lagrange system `F(x) = 0`, `x_j - q_j - sum_i lambda_i d f_i / d x_j = 0`
/// for `j` in `free`. Variables are `(x, lambda)` followed by `q` when `q`
/// is `None` (free parameters) or with `q` substituted otherwise.
pub(crate) fn lagrange_polys(sys: &PolySystem, q: Option<&[Rational]>, free: &[usize]) -> Vec<Polynomial> {
    let n = sys.num_vars();
    let c = sys.codim();
    let total = if q.is_some() { n + c } else { 2 * n + c };
    let map: Vec<usize> = (0..n).collect();
    let mut out: Vec<Polynomial> = sys.polys().iter().map(|p| p.remap(total, &map)).collect();
    let jac = sys.jacobian_polys();
    for &j in free {
        let qj = match q {
            Some(q) => Polynomial::constant(total, q[j].clone()),
            None => Polynomial::var(total, n + c + j),
        };
        let mut e = &Polynomial::var(total, j) - &qj;
        for (i, row) in jac.iter().enumerate() {
            e = &e - &(&row[j].remap(total, &map) * &Polynomial::var(total, n + i));
        }
        out.push(e);
    }
    out
}

/// The normal-locus system with the base point as parameters, for tracking
/// from one `q` to another.
pub fn normal_locus_family(sys: &PolySystem) -> Result<ParametricSystem> {
    let n = sys.num_vars();
    let free: Vec<usize> = (0..n).collect();
    Ok(ParametricSystem::new(lagrange_polys(sys, None, &free), n + sys.codim(), n)?)
}

/// Solves the normal-locus system at `q` and keeps the real critical points.
pub fn normal_locus(sys: &PolySystem, q: &[f64], settings: &TrackSettings) -> Result<NormalLocus> {
    let n = sys.num_vars();
    if q.len() != n {
        return Err(Error::InvalidArgument(format!(
            "base point has {} coordinates, expected {n}",
            q.len()
        )));
    }
    let qr: Vec<Rational> = q.iter().map(|&v| dyadic(v)).collect();
    let qf: Vec<f64> = qr.iter().map(crate::poly::rational_to_f64).collect();
    let free: Vec<usize> = (0..n).collect();
    let ps = ParametricSystem::new(lagrange_polys(sys, Some(&qr), &free), n + sys.codim(), 0)?;
    let set = ps.solve_at(&[], settings)?;
    normal_locus_from(sys, qf, &set, settings)
}

fn normal_locus_from(sys: &PolySystem, q: Vec<f64>, set: &SolutionSet, settings: &TrackSettings) -> Result<NormalLocus> {
    let n = sys.num_vars();
    let converged = set.count(PathStatus::Converged);
    if converged == 0 && set.paths_tracked > 0 {
        return Err(Error::DegenerateBasePoint {
            paths: set.paths_tracked,
        });
    }
    let mut pts: Vec<Vec<f64>> = Vec::new();
    for p in real_points(set, settings.real_tol) {
        let x = p[..n].to_vec();
        if scaled_residual(sys, &x) <= 1e-8 && !pts.iter().any(|y| dist(y, &x) <= settings.dedup_tol) {
            pts.push(x);
        }
    }
    Ok(NormalLocus {
        base_point: q,
        critical_points: pts,
        edd_observed: converged,
        paths_tracked: set.paths_tracked,
    })
}

/// `max_i |f_i(x)| / (1 + sum of |terms of f_i|)` at a real point.
pub fn scaled_residual(sys: &PolySystem, x: &[f64]) -> f64 {
    let num = sys.numeric();
    let z: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let m = sys.codim();
    let mut vals = vec![Complex64::default(); m];
    let mut jac = vec![Complex64::default(); m * x.len()];
    let mut mags = vec![0.0; m];
    num.eval_full(&z, &[], &mut vals, &mut jac, &mut mags, &mut Default::default());
    vals.iter()
        .zip(&mags)
        .map(|(v, s)| v.norm() / (1.0 + s))
        .fold(0.0, f64::max)
}

/// Bounding cube around a given base point `q`: half-width is the largest
/// distance from `q` to a critical point, plus the margin.
pub fn bounding_box_at(sys: &PolySystem, q: &[f64], settings: &TrackSettings) -> Result<BoundingBox> {
    let nl = normal_locus(sys, q, settings)?;
    if nl.critical_points.is_empty() {
        return Err(Error::EmptyNormalLocus);
    }
    let r = nl
        .critical_points
        .iter()
        .map(|x| dist(x, &nl.base_point))
        .fold(0.0, f64::max);
    Ok(BoundingBox {
        center: nl.base_point,
        half_width: r * (1.0 + BOX_MARGIN),
    })
}

/// Bounding cube around a random base point in `[-1/2, 1/2]^n`; a new point
/// is drawn when the first one is degenerate.
pub fn bounding_box(sys: &PolySystem, settings: &TrackSettings) -> Result<BoundingBox> {
    let mut rng = crate::solve::rng(settings.rng_seed, streams::BOX_Q);
    let mut last = None;
    for _ in 0..4 {
        let q: Vec<f64> = (0..sys.num_vars()).map(|_| rng.gen_range(-0.5..0.5)).collect();
        match bounding_box_at(sys, &q, settings) {
            Err(e @ Error::DegenerateBasePoint { .. }) => last = Some(e),
            other => return other,
        }
    }
    Err(last.expect("at least one attempt"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(text: &str) -> PolySystem {
        PolySystem::parse(text, None).unwrap()
    }

    #[test]
    fn circle_normal_locus() {
        let nl = normal_locus(&sys("x^2 + y^2 - 1"), &[2.0, 0.0], &TrackSettings::default()).unwrap();
        let mut pts = nl.critical_points.clone();
        pts.sort_by(|a, b| a[0].total_cmp(&b[0]));
        assert_eq!(pts.len(), 2);
        assert!(dist(&pts[0], &[-1.0, 0.0]) < 1e-10);
        assert!(dist(&pts[1], &[1.0, 0.0]) < 1e-10);
    }

    #[test]
    fn circle_center_is_degenerate() {
        let err = normal_locus(&sys("x^2 + y^2 - 1"), &[0.0, 0.0], &TrackSettings::default()).unwrap_err();
        assert!(matches!(err, Error::DegenerateBasePoint { .. }));
    }

    #[test]
    fn ellipse_edd() {
        let nl = normal_locus(&sys("x^2/4 + y^2 - 1"), &[0.3, 0.17], &TrackSettings::default()).unwrap();
        assert_eq!(nl.edd_observed, 4);
    }

    #[test]
    fn circle_box() {
        let b = bounding_box_at(&sys("x^2 + y^2 - 1"), &[0.3, 0.1], &TrackSettings::default()).unwrap();
        let expect = (1.0 + (0.1f64).hypot(0.3)) * 1.01;
        assert!((b.half_width - expect).abs() < 1e-6);
    }

    #[test]
    fn empty_variety_box() {
        let err = bounding_box(&sys("x^2 + y^2 + 1"), &TrackSettings::default()).unwrap_err();
        assert_eq!(err, Error::EmptyNormalLocus);
    }
}
