use nalgebra::DMatrix;
use num_bigint::BigInt;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{bounding_box, scaled_residual, streams, BoundingBox};
use crate::error::{Error, Result};
use crate::poly::{PolySystem, Polynomial, Rational};
use crate::solve::{rng, ParametricSystem, PathStatus, SolutionSet, TrackSettings};
use crate::util::{combinations, dist};

/// A bottleneck: distinct `x, y` on `X` with `x - y` normal at both.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BottleneckPair {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `||x - y|| / 2`.
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BottleneckReport {
    /// Isolated real pairs, sorted by radius.
    pub pairs: Vec<BottleneckPair>,
    /// Narrowest radius; absent when the locus is not finite or empty.
    pub b2: Option<f64>,
    pub finite: bool,
    /// User-declared weak feature size, or `b2` when none was declared.
    pub wfs_declared: Option<f64>,
    pub paths_tracked: u64,
    /// Real off-diagonal endpoints on a positive-dimensional component.
    pub singular_pairs: usize,
    /// A deduplicated selection of those endpoints, for inspection.
    pub continuum: Vec<BottleneckPair>,
    pub diagnosis: String,
}

impl BottleneckReport {
    /// Whether every non-isolated pair found is antipodal (`y = -x`), as
    /// happens for any variety cut out by forms on the unit sphere.
    pub fn continuum_is_antipodal(&self) -> bool {
        self.continuum.iter().all(|p| {
            p.x.iter().zip(&p.y).map(|(a, b)| (a + b) * (a + b)).sum::<f64>().sqrt() <= 1e-4
        })
    }
}

#[derive(Clone, Debug, Default)]
pub struct BottleneckOptions {
    pub wfs_override: Option<f64>,
    /// Reuse a box computed earlier in the run.
    pub bounding_box: Option<BoundingBox>,
}

/// Degree-2 bottlenecks of `X`.
pub fn bottlenecks(sys: &PolySystem, settings: &TrackSettings) -> Result<BottleneckReport> {
    bottlenecks_with(sys, settings, &BottleneckOptions::default())
}

fn determinant(m: &[Vec<Polynomial>]) -> Polynomial {
    let k = m.len();
    if k == 1 {
        return m[0][0].clone();
    }
    let nv = m[0][0].num_vars();
    let mut acc = Polynomial::zero(nv);
    for j in 0..k {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Polynomial>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, p)| p.clone()).collect())
            .collect();
        let term = &m[0][j] * &determinant(&minor);
        acc = if j % 2 == 0 { &acc + &term } else { &acc - &term };
    }
    acc
}

/// All `(c+1)`-minors of `[x - y; J_F(at)]` in the `2n` variables `(x, y)`,
/// where `at` selects the block the Jacobian is evaluated on.
fn minors(sys: &PolySystem, at_y: bool) -> Vec<Polynomial> {
    let n = sys.num_vars();
    let c = sys.codim();
    let shift: Vec<usize> = (0..n).map(|j| if at_y { n + j } else { j }).collect();
    let diff: Vec<Polynomial> = (0..n)
        .map(|j| &Polynomial::var(2 * n, j) - &Polynomial::var(2 * n, n + j))
        .collect();
    let jac: Vec<Vec<Polynomial>> = sys
        .jacobian_polys()
        .iter()
        .map(|row| row.iter().map(|p| p.remap(2 * n, &shift)).collect())
        .collect();
    combinations(n, c + 1)
        .into_iter()
        .map(|cols| {
            let mut m = vec![cols.iter().map(|&j| diff[j].clone()).collect::<Vec<_>>()];
            for row in &jac {
                m.push(cols.iter().map(|&j| row[j].clone()).collect());
            }
            determinant(&m)
        })
        .collect()
}

/// `k` random rational combinations of `polys` (or `polys` itself when
/// there are exactly `k`).
fn squared_down<R: Rng>(polys: Vec<Polynomial>, k: usize, rng: &mut R) -> Vec<Polynomial> {
    if polys.len() == k {
        return polys;
    }
    (0..k)
        .map(|_| {
            polys.iter().fold(Polynomial::zero(polys[0].num_vars()), |acc, p| {
                let mut v = 0;
                while v == 0 {
                    v = rng.gen_range(-1024i64..=1024);
                }
                &acc + &p.scale(&Rational::new(BigInt::from(v), BigInt::from(1024)))
            })
        })
        .collect()
}

/// Smallest singular value of `[x - y; J_F(x)]` with unit rows.
fn normality_defect(sys: &PolySystem, x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let j = match sys.jacobian_real(x) {
        Ok(j) => j,
        Err(_) => return f64::INFINITY,
    };
    let c = j.nrows();
    let mut m = DMatrix::<f64>::zeros(c + 1, n);
    let d = dist(x, y);
    for k in 0..n {
        m[(0, k)] = (x[k] - y[k]) / d;
    }
    for i in 0..c {
        let r = j.row(i).norm();
        if r == 0.0 {
            return 0.0;
        }
        for k in 0..n {
            m[(i + 1, k)] = j[(i, k)] / r;
        }
    }
    m.singular_values().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Candidate classification thresholds.
const RESIDUAL_TOL: f64 = 1e-8;
const RANK_TOL: f64 = 1e-6;
const DIAGONAL_FRACTION: f64 = 1e-4;
const CLUSTER_COUNT: usize = 50;

pub fn bottlenecks_with(sys: &PolySystem, settings: &TrackSettings, opts: &BottleneckOptions) -> Result<BottleneckReport> {
    let n = sys.num_vars();
    let c = sys.codim();
    if c >= n {
        return Err(Error::BadDimension(n as i64 - c as i64));
    }
    let bbox = match &opts.bounding_box {
        Some(b) => b.clone(),
        None => bounding_box(sys, settings)?,
    };
    let mut r = rng(settings.rng_seed, streams::BOTTLENECK_MIX);
    let ymap: Vec<usize> = (n..2 * n).collect();
    let xmap: Vec<usize> = (0..n).collect();
    let mut polys: Vec<Polynomial> = sys.polys().iter().map(|p| p.remap(2 * n, &xmap)).collect();
    polys.extend(sys.polys().iter().map(|p| p.remap(2 * n, &ymap)));
    polys.extend(squared_down(minors(sys, false), n - c, &mut r));
    polys.extend(squared_down(minors(sys, true), n - c, &mut r));
    let ps = ParametricSystem::new(polys, 2 * n, 0)?;
    let set = ps.solve_at(&[], settings)?;
    Ok(classify(sys, &set, &bbox, settings, opts.wfs_override))
}

fn classify(
    sys: &PolySystem,
    set: &SolutionSet,
    bbox: &BoundingBox,
    settings: &TrackSettings,
    wfs_override: Option<f64>,
) -> BottleneckReport {
    let n = sys.num_vars();
    let diag = DIAGONAL_FRACTION * bbox.width();
    let mut pairs: Vec<BottleneckPair> = Vec::new();
    let mut singular_pts: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    for (p, status) in set.points.iter().zip(&set.status) {
        let (conv, sing) = (*status == PathStatus::Converged, *status == PathStatus::SingularEndpoint);
        if !(conv || sing) {
            continue;
        }
        let scale = 1.0 + p.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
        let imag_tol = if conv { settings.real_tol } else { 1e-5 };
        if p.iter().any(|z| z.im.abs() > imag_tol * scale) {
            continue;
        }
        let x: Vec<f64> = p[..n].iter().map(|z| z.re).collect();
        let y: Vec<f64> = p[n..].iter().map(|z| z.re).collect();
        let d = dist(&x, &y);
        if d <= diag {
            continue;
        }
        let (res_tol, rank_tol) = if conv { (RESIDUAL_TOL, RANK_TOL) } else { (1e-7, 1e-4) };
        if scaled_residual(sys, &x) > res_tol || scaled_residual(sys, &y) > res_tol {
            continue;
        }
        if normality_defect(sys, &x, &y) > rank_tol || normality_defect(sys, &y, &x) > rank_tol {
            continue;
        }
        let (x, y) = if x.partial_cmp(&y) == Some(std::cmp::Ordering::Greater) { (y, x) } else { (x, y) };
        if conv {
            let dup = pairs
                .iter()
                .any(|q| dist(&q.x, &x) <= settings.dedup_tol && dist(&q.y, &y) <= settings.dedup_tol);
            if !dup {
                pairs.push(BottleneckPair { radius: d / 2.0, x, y });
            }
        } else if d > 0.01 * bbox.width() {
            singular_pts.push((x, y));
        }
    }
    pairs.sort_by(|a, b| a.radius.total_cmp(&b.radius).then(a.x.partial_cmp(&b.x).unwrap_or(std::cmp::Ordering::Equal)));

    let mut reasons = Vec::new();
    if !singular_pts.is_empty() {
        reasons.push(format!(
            "{} real off-diagonal endpoints lie on a positive-dimensional component",
            singular_pts.len()
        ));
    }
    if let Some(k) = clustered_radius(&pairs, settings.dedup_tol) {
        reasons.push(format!("{k} pairs share one radius with non-isolated endpoints"));
    }
    let mut continuum: Vec<BottleneckPair> = Vec::new();
    for (x, y) in &singular_pts {
        if !continuum.iter().any(|q| dist(&q.x, x) <= 1e-4 && dist(&q.y, y) <= 1e-4) {
            continuum.push(BottleneckPair {
                x: x.clone(),
                y: y.clone(),
                radius: dist(x, y) / 2.0,
            });
        }
    }
    let finite = reasons.is_empty();
    let b2 = if finite { pairs.first().map(|p| p.radius) } else { None };
    let diagnosis = if !finite {
        reasons.join("; ")
    } else if pairs.is_empty() {
        "no real bottleneck pairs".to_string()
    } else {
        format!("{} isolated bottleneck pairs", pairs.len())
    };
    BottleneckReport {
        pairs,
        b2,
        finite,
        wfs_declared: wfs_override.or(b2),
        paths_tracked: set.paths_tracked,
        singular_pairs: singular_pts.len(),
        continuum,
        diagnosis,
    }
}

/// More than `CLUSTER_COUNT` pairs with equal radius whose endpoints have
/// near neighbours signals a continuum of bottlenecks.
fn clustered_radius(pairs: &[BottleneckPair], dedup_tol: f64) -> Option<usize> {
    let mut i = 0;
    while i < pairs.len() {
        let mut j = i;
        while j + 1 < pairs.len() && pairs[j + 1].radius - pairs[i].radius <= 1e-6 {
            j += 1;
        }
        let group = &pairs[i..=j];
        if group.len() > CLUSTER_COUNT {
            let gap = group
                .iter()
                .enumerate()
                .map(|(a, p)| {
                    group
                        .iter()
                        .enumerate()
                        .filter(|(b, _)| *b != a)
                        .map(|(_, q)| dist(&p.x, &q.x))
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(0.0, f64::max);
            if gap < dedup_tol * 10.0 {
                return Some(group.len());
            }
        }
        i = j + 1;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_2x2() {
        let s = PolySystem::parse("x; y", None).unwrap();
        let (x, y) = (s.polys()[0].clone(), s.polys()[1].clone());
        let d = determinant(&[vec![x.clone(), y.clone()], vec![y.clone(), x.clone()]]);
        assert_eq!(d, &(&x * &x) - &(&y * &y));
    }

    #[test]
    fn ellipse_bottlenecks() {
        let s = PolySystem::parse("x^2/4 + y^2 - 1", None).unwrap();
        let rep = bottlenecks(&s, &TrackSettings::default()).unwrap();
        assert!(rep.finite, "{}", rep.diagnosis);
        assert_eq!(rep.pairs.len(), 2);
        assert!((rep.b2.unwrap() - 1.0).abs() < 1e-6);
        assert!((rep.pairs[1].radius - 2.0).abs() < 1e-6);
    }

    #[test]
    fn circle_is_infinite() {
        let s = PolySystem::parse("x^2 + y^2 - 1", None).unwrap();
        let rep = bottlenecks(&s, &TrackSettings::default()).unwrap();
        assert!(!rep.finite);
        assert_eq!(rep.b2, None);
    }
}
