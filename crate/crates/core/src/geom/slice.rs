use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{dyadic, lagrange_polys, scaled_residual, streams};
use crate::error::{Error, Result};
use crate::poly::{PolySystem, Rational};
use crate::solve::{random_complex_vec, real_points, rng, ParametricSystem, PathStatus, TrackSettings};
use crate::util::dist;

type C64 = Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SliceKind {
    /// `X ∩ {x_t = g}` with `|t| = dim X`: finitely many points.
    Points,
    /// Critical points of the distance to a fixed `q` on `X ∩ {x_t = g}`.
    Normal,
}

/// Real points of one slice plus bookkeeping.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SliceResult {
    pub points: Vec<Vec<f64>>,
    pub paths: u64,
    pub singular: usize,
}

/// The family of slices `x_t = g` of `X` as a parameter homotopy in `g`,
/// with start solutions at a generic complex `g0` computed once.
#[derive(Clone, Debug)]
pub struct SliceFamily {
    pub t: Vec<usize>,
    pub kind: SliceKind,
    n: usize,
    free: Vec<usize>,
    ps: ParametricSystem,
    p0: Vec<C64>,
    starts: Vec<Vec<C64>>,
    generic_paths: u64,
}

impl SliceFamily {
    /// Point slices for a coordinate set of size `dim X`.
    pub fn points(sys: &PolySystem, t: &[usize], settings: &TrackSettings) -> Result<Self> {
        let n = sys.num_vars();
        if t.len() + sys.codim() != n {
            return Err(Error::InvalidArgument(format!(
                "point slices need {} fixed coordinates, got {}",
                n - sys.codim(),
                t.len()
            )));
        }
        let ps = ParametricSystem::from_polys(sys.polys(), n, t)?;
        Self::build(n, t, SliceKind::Points, ps, settings)
    }

    /// Normal-locus slices with base point `q`, for any `|t| < dim X`.
    pub fn normal(sys: &PolySystem, t: &[usize], q: &[f64], settings: &TrackSettings) -> Result<Self> {
        let n = sys.num_vars();
        let c = sys.codim();
        if t.len() + c >= n {
            return Err(Error::InvalidArgument(format!(
                "normal slices need fewer than {} fixed coordinates, got {}",
                n - c,
                t.len()
            )));
        }
        let qr: Vec<Rational> = q.iter().map(|&v| dyadic(v)).collect();
        let free: Vec<usize> = (0..n).filter(|j| !t.contains(j)).collect();
        let polys = lagrange_polys(sys, Some(&qr), &free);
        let ps = ParametricSystem::from_polys(&polys, n + c, t)?;
        Self::build(n, t, SliceKind::Normal, ps, settings)
    }

    fn build(n: usize, t: &[usize], kind: SliceKind, ps: ParametricSystem, settings: &TrackSettings) -> Result<Self> {
        let stream = streams::SLICE_START
            + t.iter().fold(0u64, |acc, &j| acc * 31 + j as u64 + 1) * 2
            + (kind == SliceKind::Normal) as u64;
        let mut r = rng(settings.rng_seed, stream);
        let p0 = random_complex_vec(&mut r, t.len());
        // two independent gammas; their union guards against a lost path
        let mut starts: Vec<Vec<C64>> = Vec::new();
        let mut generic_paths = 0;
        for k in 0..2u64 {
            let s = TrackSettings {
                rng_seed: settings.rng_seed ^ (stream << 8) ^ (k + 1),
                ..settings.clone()
            };
            let set = ps.solve_at(&p0, &s)?;
            generic_paths += set.paths_tracked;
            for p in set.converged() {
                if !starts
                    .iter()
                    .any(|q| crate::solve::solution::distance(q, p) <= settings.dedup_tol)
                {
                    starts.push(p.clone());
                }
            }
        }
        let free = (0..n).filter(|j| !t.contains(j)).collect();
        Ok(Self {
            t: t.to_vec(),
            kind,
            n,
            free,
            ps,
            p0,
            starts,
            generic_paths,
        })
    }

    /// Number of paths tracked per slice (the generic root count).
    pub fn paths_per_slice(&self) -> usize {
        self.starts.len()
    }

    /// Paths spent on the one-time generic solve.
    pub fn generic_paths(&self) -> u64 {
        self.generic_paths
    }

    /// Real points of the slice `x_t = g`, embedded in `R^n`, each with
    /// scaled residual at most `1e-8` for `sys`.
    pub fn solve(&self, sys: &PolySystem, g: &[f64], settings: &TrackSettings) -> Result<SliceResult> {
        let p1: Vec<C64> = g.iter().map(|&v| C64::new(v, 0.0)).collect();
        let set = self.ps.track_points(&self.starts, &self.p0, &p1, settings)?;
        let mut points: Vec<Vec<f64>> = Vec::new();
        for p in real_points(&set, settings.real_tol) {
            let mut x = vec![0.0; self.n];
            for (k, &j) in self.t.iter().enumerate() {
                x[j] = g[k];
            }
            for (k, &j) in self.free.iter().enumerate() {
                x[j] = p[k];
            }
            if scaled_residual(sys, &x) <= 1e-8 && !points.iter().any(|y| dist(y, &x) <= settings.dedup_tol) {
                points.push(x);
            }
        }
        Ok(SliceResult {
            points,
            paths: set.paths_tracked,
            singular: set.count(PathStatus::SingularEndpoint),
        })
    }
}

/// Real points of `X ∩ {x_t = g}`. With `|t| < dim X` the slice is a
/// positive-dimensional variety and its normal locus with respect to a
/// seeded random base point is returned instead.
pub fn slice(sys: &PolySystem, t: &[usize], g: &[f64], settings: &TrackSettings) -> Result<Vec<Vec<f64>>> {
    if t.len() != g.len() || t.iter().any(|&j| j >= sys.num_vars()) {
        return Err(Error::InvalidArgument("slice coordinates and values must match".into()));
    }
    let fam = if t.len() + sys.codim() == sys.num_vars() {
        SliceFamily::points(sys, t, settings)?
    } else {
        use rand::Rng;
        let mut r = rng(settings.rng_seed, streams::EXTRA_Q);
        let q: Vec<f64> = (0..sys.num_vars()).map(|_| r.gen_range(-0.5..0.5)).collect();
        SliceFamily::normal(sys, t, &q, settings)?
    };
    Ok(fam.solve(sys, g, settings)?.points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sort(mut v: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    #[test]
    fn circle_slices() {
        let s = PolySystem::parse("x^2 + y^2 - 1", None).unwrap();
        let set = TrackSettings::default();
        let pts = sort(slice(&s, &[0], &[0.0], &set).unwrap());
        assert_eq!(pts.len(), 2);
        assert!(dist(&pts[0], &[0.0, -1.0]) < 1e-10 && dist(&pts[1], &[0.0, 1.0]) < 1e-10);
        assert!(slice(&s, &[0], &[2.0], &set).unwrap().is_empty());
    }

    #[test]
    fn sphere_normal_slice() {
        let s = PolySystem::parse("x^2 + y^2 + z^2 - 1", None).unwrap();
        let set = TrackSettings::default();
        let fam = SliceFamily::normal(&s, &[2], &[0.21, -0.13, 0.4], &set).unwrap();
        let r = fam.solve(&s, &[0.5], &set).unwrap();
        assert_eq!(r.points.len(), 2);
        for p in &r.points {
            assert!((p[2] - 0.5).abs() < 1e-12);
            assert!((p[0].hypot(p[1]) - 0.75f64.sqrt()).abs() < 1e-10);
        }
    }
}
