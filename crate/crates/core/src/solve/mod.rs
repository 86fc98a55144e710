//! Homotopy continuation: total-degree solves of square systems and
//! parameter homotopies between parameter values.

pub mod homotopy;
pub mod numeric;
pub mod settings;
pub mod solution;
pub mod tracker;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

pub use homotopy::{Homotopy, ParameterHomotopy, TotalDegreeHomotopy};
pub use numeric::NumericSystem;
pub use settings::TrackSettings;
pub use solution::{real_points, SolutionSet};
pub use tracker::{PathResult, PathStatus};

use crate::error::SolveError;
use crate::poly::{PolySystem, Polynomial};
use tracker::{track, TrackWork};

type C64 = Complex64;

/// Seeded generator for stream `stream` of run seed `seed`.
pub fn rng(seed: u64, stream: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Random point on the complex unit circle.
pub fn random_unit_complex<R: Rng>(rng: &mut R) -> C64 {
    C64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU))
}

/// Random complex vector with entries of modulus in `[0.5, 1.5)`.
pub fn random_complex_vec<R: Rng>(rng: &mut R, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| C64::from_polar(rng.gen_range(0.5..1.5), rng.gen_range(0.0..std::f64::consts::TAU)))
        .collect()
}

/// A square polynomial system whose trailing variables are parameters.
#[derive(Clone, Debug)]
pub struct ParametricSystem {
    polys: Vec<Polynomial>,
    n_unknowns: usize,
    n_params: usize,
    numeric: NumericSystem,
}

impl ParametricSystem {
    /// `polys` live in `n_unknowns + n_params` variables, unknowns first.
    pub fn new(polys: Vec<Polynomial>, n_unknowns: usize, n_params: usize) -> Result<Self, SolveError> {
        if polys.len() != n_unknowns {
            return Err(SolveError::NotSquare {
                equations: polys.len(),
                unknowns: n_unknowns,
            });
        }
        if polys.iter().any(|p| p.num_vars() != n_unknowns + n_params) {
            return Err(SolveError::ParameterMismatch {
                expected: n_unknowns + n_params,
                got: polys.first().map(|p| p.num_vars()).unwrap_or(0),
            });
        }
        let numeric = NumericSystem::from_polys(&polys, n_unknowns, n_params);
        Ok(Self {
            polys,
            n_unknowns,
            n_params,
            numeric,
        })
    }

    /// Turns the variables `params` of `polys` (in `n` variables) into
    /// parameters, in the given order; the rest stay unknowns in their
    /// original order.
    pub fn from_polys(polys: &[Polynomial], n: usize, params: &[usize]) -> Result<Self, SolveError> {
        let map = param_layout(n, params);
        let remapped = polys.iter().map(|p| p.remap(n, &map)).collect();
        Self::new(remapped, n - params.len(), params.len())
    }

    pub fn n_unknowns(&self) -> usize {
        self.n_unknowns
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn polys(&self) -> &[Polynomial] {
        &self.polys
    }

    pub fn numeric(&self) -> &NumericSystem {
        &self.numeric
    }

    /// Total-degree solve at parameter value `p`.
    pub fn solve_at(&self, p: &[C64], settings: &TrackSettings) -> Result<SolutionSet, SolveError> {
        self.check_params(p)?;
        total_degree(&self.numeric, p, settings)
    }

    /// Tracks `starts` (solutions at `p0`) to `p1`.
    pub fn track_points(
        &self,
        starts: &[Vec<C64>],
        p0: &[C64],
        p1: &[C64],
        settings: &TrackSettings,
    ) -> Result<SolutionSet, SolveError> {
        settings.validate()?;
        self.check_params(p0)?;
        self.check_params(p1)?;
        let hom = ParameterHomotopy {
            sys: &self.numeric,
            p0,
            p1,
        };
        for (index, s) in starts.iter().enumerate() {
            let residual = tracker::residual_at(&hom, s, 0.0);
            if s.len() != self.n_unknowns || !(residual <= 1e-6) {
                return Err(SolveError::BadStartPoint { index, residual });
            }
        }
        let results = run_paths(&hom, starts, settings);
        Ok(SolutionSet::from_paths(results, starts.len() as u64, settings.dedup_tol))
    }

    fn check_params(&self, p: &[C64]) -> Result<(), SolveError> {
        if p.len() != self.n_params {
            return Err(SolveError::ParameterMismatch {
                expected: self.n_params,
                got: p.len(),
            });
        }
        Ok(())
    }
}

/// Variable map sending `params` to the tail and keeping the others in order.
pub(crate) fn param_layout(n: usize, params: &[usize]) -> Vec<usize> {
    let mut map = vec![usize::MAX; n];
    let mut next = 0;
    for (i, m) in map.iter_mut().enumerate() {
        if !params.contains(&i) {
            *m = next;
            next += 1;
        }
    }
    for (k, &j) in params.iter().enumerate() {
        map[j] = next + k;
    }
    map
}

/// Solves a square system by a total-degree homotopy with a seeded random
/// gamma; `paths_tracked` is the Bezout number.
pub fn solve_square(sys: &PolySystem, settings: &TrackSettings) -> Result<SolutionSet, SolveError> {
    if sys.codim() != sys.num_vars() {
        return Err(SolveError::NotSquare {
            equations: sys.codim(),
            unknowns: sys.num_vars(),
        });
    }
    total_degree(sys.numeric(), &[], settings)
}

/// Tracks the converged points of `start` from `p0` to `p1`.
pub fn parameter_track(
    sys: &ParametricSystem,
    start: &SolutionSet,
    p0: &[C64],
    p1: &[C64],
    settings: &TrackSettings,
) -> Result<SolutionSet, SolveError> {
    let starts: Vec<Vec<C64>> = start.converged().cloned().collect();
    sys.track_points(&starts, p0, p1, settings)
}

pub(crate) fn bezout_number(degrees: &[u32]) -> Option<u64> {
    degrees
        .iter()
        .try_fold(1u64, |acc, &d| acc.checked_mul(d as u64))
}

fn total_degree(num: &NumericSystem, params: &[C64], settings: &TrackSettings) -> Result<SolutionSet, SolveError> {
    settings.validate()?;
    let degrees = num.degrees().to_vec();
    let required = bezout_number(&degrees).unwrap_or(u64::MAX);
    if required > settings.max_paths {
        return Err(SolveError::PathBudgetExceeded {
            required,
            limit: settings.max_paths,
        });
    }
    let mut r = rng(settings.rng_seed, 0x9a77a);
    let gamma = random_unit_complex(&mut r);
    let hom = TotalDegreeHomotopy {
        sys: num,
        params,
        gamma,
    };
    let starts: Vec<Vec<C64>> = (0..required).map(|k| start_point(&degrees, k)).collect();
    let results = run_paths(&hom, &starts, settings);
    Ok(SolutionSet::from_paths(results, required, settings.dedup_tol))
}

/// The `k`-th root of `x_i^{d_i} = 1` in mixed-radix order.
fn start_point(degrees: &[u32], mut k: u64) -> Vec<C64> {
    degrees
        .iter()
        .map(|&d| {
            let j = k % d as u64;
            k /= d as u64;
            C64::from_polar(1.0, std::f64::consts::TAU * j as f64 / d as f64)
        })
        .collect()
}

/// Tracks every start in parallel (order preserved), then retracks paths
/// whose converged endpoints coincide with tighter steps.
fn run_paths<H: Homotopy>(hom: &H, starts: &[Vec<C64>], settings: &TrackSettings) -> Vec<PathResult> {
    let mut results: Vec<PathResult> = starts
        .par_iter()
        .map_init(TrackWork::default, |w, s| track(hom, s, settings, w))
        .collect();
    let mut tight = settings.clone();
    for _ in 0..2 {
        let clashes = colliding(&results, settings.dedup_tol);
        if clashes.is_empty() {
            break;
        }
        tight.step_max /= 4.0;
        tight.step_init = (tight.step_init / 4.0).max(tight.step_min);
        tight.max_steps *= 4;
        let redo: Vec<PathResult> = clashes
            .par_iter()
            .map_init(TrackWork::default, |w, &i| track(hom, &starts[i], &tight, w))
            .collect();
        for (i, r) in clashes.into_iter().zip(redo) {
            results[i] = r;
        }
    }
    results
}

/// Indices of converged paths sharing an endpoint with another one.
fn colliding(results: &[PathResult], tol: f64) -> Vec<usize> {
    let mut conv: Vec<(f64, usize)> = results
        .iter()
        .enumerate()
        .filter(|(_, r)| r.status == PathStatus::Converged)
        .map(|(i, r)| (r.point.first().map(|z| z.re).unwrap_or(0.0), i))
        .collect();
    conv.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut hit = vec![false; results.len()];
    for a in 0..conv.len() {
        for b in a + 1..conv.len() {
            if conv[b].0 > conv[a].0 + tol {
                break;
            }
            let (i, j) = (conv[a].1, conv[b].1);
            if solution::distance(&results[i].point, &results[j].point) <= tol {
                hit[i] = true;
                hit[j] = true;
            }
        }
    }
    (0..results.len()).filter(|&i| hit[i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(text: &str) -> PolySystem {
        PolySystem::parse(text, None).unwrap()
    }

    #[test]
    fn univariate_roots() {
        let s = solve_square(&sys("x^2 - 1"), &TrackSettings::default()).unwrap();
        assert_eq!(s.paths_tracked, 2);
        let mut r: Vec<f64> = real_points(&s, 1e-8).into_iter().map(|p| p[0]).collect();
        r.sort_by(f64::total_cmp);
        assert_eq!(r.len(), 2);
        assert!((r[0] + 1.0).abs() < 1e-12 && (r[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn circle_and_line_complex_only() {
        let s = solve_square(&sys("x^2 + y^2 - 1; x - 2"), &TrackSettings::default()).unwrap();
        assert_eq!(s.count(PathStatus::Converged), 2);
        assert!(real_points(&s, 1e-8).is_empty());
    }

    #[test]
    fn budget_enforced() {
        let settings = TrackSettings {
            max_paths: 3,
            ..TrackSettings::default()
        };
        let err = solve_square(&sys("x^2 - 1; y^2 - 1"), &settings).unwrap_err();
        assert!(matches!(err, SolveError::PathBudgetExceeded { required: 4, limit: 3 }));
    }

    #[test]
    fn slice_parameter_track() {
        // circle with x as parameter g
        let s = sys("x^2 + y^2 - 1");
        let ps = ParametricSystem::from_polys(s.polys(), 2, &[0]).unwrap();
        let mut r = rng(7, 1);
        let p0 = random_complex_vec(&mut r, 1);
        let settings = TrackSettings::default();
        let start = ps.solve_at(&p0, &settings).unwrap();
        assert_eq!(start.count(PathStatus::Converged), 2);
        let end = parameter_track(&ps, &start, &p0, &[C64::new(0.0, 0.0)], &settings).unwrap();
        let mut ys: Vec<f64> = real_points(&end, 1e-8).into_iter().map(|p| p[0]).collect();
        ys.sort_by(f64::total_cmp);
        assert_eq!(ys.len(), 2);
        assert!((ys[0] + 1.0).abs() < 1e-10 && (ys[1] - 1.0).abs() < 1e-10);
        let end = parameter_track(&ps, &start, &p0, &[C64::new(2.0, 0.0)], &settings).unwrap();
        assert!(real_points(&end, 1e-8).is_empty());
    }

    #[test]
    fn bad_start_rejected() {
        let s = sys("x^2 + y^2 - 1");
        let ps = ParametricSystem::from_polys(s.polys(), 2, &[0]).unwrap();
        let p0 = [C64::new(0.0, 0.0)];
        let err = ps
            .track_points(&[vec![C64::new(5.0, 0.0)]], &p0, &p0, &TrackSettings::default())
            .unwrap_err();
        assert!(matches!(err, SolveError::BadStartPoint { index: 0, .. }));
        let err = ps
            .track_points(&[], &p0, &[], &TrackSettings::default())
            .unwrap_err();
        assert!(matches!(err, SolveError::ParameterMismatch { .. }));
    }
}
