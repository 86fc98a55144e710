use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::tracker::{PathResult, PathStatus};

type C64 = Complex64;

/// Deduplicated endpoints of a batch of tracked paths.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolutionSet {
    pub points: Vec<Vec<C64>>,
    /// Scaled residual at each point (`inf` for failed paths).
    pub residuals: Vec<f64>,
    pub status: Vec<PathStatus>,
    /// Number of paths that ended at each point; above 1 flags a
    /// multiple root or path crossing.
    pub multiplicity: Vec<usize>,
    pub paths_tracked: u64,
    pub dedup_tol: f64,
}

impl SolutionSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn converged(&self) -> impl Iterator<Item = &Vec<C64>> {
        self.points
            .iter()
            .zip(&self.status)
            .filter(|(_, s)| **s == PathStatus::Converged)
            .map(|(p, _)| p)
    }

    pub fn count(&self, status: PathStatus) -> usize {
        self.status.iter().filter(|s| **s == status).count()
    }

    /// Merges raw path results, keeping the best-status representative of
    /// every cluster closer than `dedup_tol`.
    pub(crate) fn from_paths(paths: Vec<PathResult>, paths_tracked: u64, dedup_tol: f64) -> Self {
        let mut order: Vec<usize> = (0..paths.len()).collect();
        order.sort_by(|&a, &b| {
            let (pa, pb) = (&paths[a], &paths[b]);
            pa.status
                .priority()
                .cmp(&pb.status.priority())
                .then(pa.residual.total_cmp(&pb.residual))
                .then(a.cmp(&b))
        });
        let mut set = SolutionSet {
            paths_tracked,
            dedup_tol,
            ..Default::default()
        };
        // representatives sorted by their first real coordinate for a sweep
        let mut keys: Vec<(f64, usize)> = Vec::new();
        for i in order {
            let p = &paths[i];
            let key = p.point.first().map(|z| z.re).unwrap_or(0.0);
            let lo = keys.partition_point(|(k, _)| *k < key - dedup_tol);
            let mut hit = None;
            for &(k, j) in &keys[lo..] {
                if k > key + dedup_tol {
                    break;
                }
                if distance(&set.points[j], &p.point) <= dedup_tol {
                    hit = Some(j);
                    break;
                }
            }
            match hit {
                Some(j) => set.multiplicity[j] += 1,
                None => {
                    let j = set.points.len();
                    set.points.push(p.point.clone());
                    set.residuals.push(p.residual);
                    set.status.push(p.status);
                    set.multiplicity.push(1);
                    let pos = keys.partition_point(|(k, _)| *k <= key);
                    keys.insert(pos, (key, j));
                }
            }
        }
        set.canonicalize();
        set
    }

    /// Sorts points lexicographically so output is independent of path order.
    fn canonicalize(&mut self) {
        let mut idx: Vec<usize> = (0..self.points.len()).collect();
        idx.sort_by(|&a, &b| {
            let (pa, pb) = (&self.points[a], &self.points[b]);
            self.status[a]
                .priority()
                .cmp(&self.status[b].priority())
                .then_with(|| {
                    pa.iter()
                        .zip(pb)
                        .map(|(u, v)| u.re.total_cmp(&v.re).then(u.im.total_cmp(&v.im)))
                        .find(|o| o.is_ne())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
        });
        self.points = idx.iter().map(|&i| self.points[i].clone()).collect();
        self.residuals = idx.iter().map(|&i| self.residuals[i]).collect();
        self.status = idx.iter().map(|&i| self.status[i]).collect();
        self.multiplicity = idx.iter().map(|&i| self.multiplicity[i]).collect();
    }
}

pub(crate) fn distance(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(u, v)| (u - v).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Real parts of converged points whose imaginary parts are all at most
/// `real_tol`, deduplicated.
pub fn real_points(set: &SolutionSet, real_tol: f64) -> Vec<Vec<f64>> {
    let tol = if set.dedup_tol > 0.0 { set.dedup_tol } else { 1e-6 };
    let mut out: Vec<Vec<f64>> = Vec::new();
    for p in set.converged() {
        let scale = 1.0 + p.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
        if p.iter().all(|z| z.im.abs() <= real_tol * scale) {
            let r: Vec<f64> = p.iter().map(|z| z.re).collect();
            let dup = out.iter().any(|q| {
                q.iter().zip(&r).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() <= tol
            });
            if !dup {
                out.push(r);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn set(points: Vec<Vec<C64>>) -> SolutionSet {
        let n = points.len();
        SolutionSet {
            points,
            residuals: vec![0.0; n],
            status: vec![PathStatus::Converged; n],
            multiplicity: vec![1; n],
            paths_tracked: n as u64,
            dedup_tol: 1e-6,
        }
    }

    #[test]
    fn real_filter_examples() {
        let s = set(vec![vec![c(1.0, 0.0), c(0.0, 1e-12)]]);
        assert_eq!(real_points(&s, 1e-8), vec![vec![1.0, 0.0]]);
        let s = set(vec![vec![c(0.0, 0.0), c(0.0, 0.5)]]);
        assert!(real_points(&s, 1e-8).is_empty());
    }

    #[test]
    fn dedup_prefers_converged() {
        let mk = |x: f64, status| PathResult {
            point: vec![c(x, 0.0)],
            status,
            residual: 0.0,
            cond: 1.0,
            steps: 1,
        };
        let paths = vec![
            mk(1.0, PathStatus::SingularEndpoint),
            mk(1.0 + 1e-9, PathStatus::Converged),
            mk(-1.0, PathStatus::Converged),
        ];
        let s = SolutionSet::from_paths(paths, 3, 1e-6);
        assert_eq!(s.len(), 2);
        assert_eq!(s.count(PathStatus::Converged), 2);
        assert_eq!(s.multiplicity.iter().sum::<usize>(), 3);
        assert_eq!(s.points[0][0].re, -1.0);
    }
}
