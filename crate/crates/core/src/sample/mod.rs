//! Grid sampling: basic slices `E_delta`, extra normal-locus slices
//! `E'_delta` and their union, which is an `epsilon`-sample when
//! `delta * sqrt(n) < min(epsilon, 2 b2)`.

pub mod io;

use log::warn;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{bottlenecks_with, bounding_box, streams, BottleneckOptions, BottleneckReport, BoundingBox, SliceFamily};
use crate::poly::PolySystem;
use crate::solve::{rng, TrackSettings};
use crate::util::{combinations, timed, PhaseTime, SpatialHash};

/// Multiplicative slack keeping `delta * sqrt(n)` strictly below the bound.
pub const DELTA_SLACK: f64 = 0.99;

/// The shifted grids `G_t(delta)` for all coordinate subsets `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub delta: f64,
    /// Shared shift, each entry in `[0, delta)`.
    pub translation: Vec<f64>,
    pub bounding_box: BoundingBox,
    pub n: usize,
    /// Dimension of the variety.
    pub d: usize,
}

impl GridSpec {
    pub fn new(delta: f64, translation: Vec<f64>, bounding_box: BoundingBox, d: usize) -> Result<Self> {
        let n = bounding_box.center.len();
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
        }
        if translation.len() != n || translation.iter().any(|&v| !(0.0..delta).contains(&v)) {
            return Err(Error::InvalidArgument("translation must lie in [0, delta)^n".into()));
        }
        if d == 0 || d >= n {
            return Err(Error::BadDimension(d as i64));
        }
        Ok(Self {
            delta,
            translation,
            bounding_box,
            n,
            d,
        })
    }

    /// Grid with a translation drawn uniformly from `[0, delta)^n`.
    pub fn random(delta: f64, bounding_box: BoundingBox, d: usize, seed: u64) -> Result<Self> {
        let mut r = rng(seed, streams::GRID);
        let tr = (0..bounding_box.center.len())
            .map(|_| r.gen_range(0.0..delta))
            .collect();
        Self::new(delta, tr, bounding_box, d)
    }

    /// Grid values `translation_j + delta * m` inside the box along axis `j`.
    pub fn axis_values(&self, j: usize) -> Vec<f64> {
        let c = self.bounding_box.center[j];
        let hw = self.bounding_box.half_width;
        let tr = self.translation[j];
        let lo = ((c - hw - tr) / self.delta).ceil() as i64;
        let hi = ((c + hw - tr) / self.delta).floor() as i64;
        (lo..=hi)
            .map(|m| tr + self.delta * m as f64)
            .filter(|v| (v - c).abs() <= hw)
            .collect()
    }

    /// Points of `G_t(delta)` inside `pi_t(box)`, lexicographic in `t`.
    pub fn points(&self, t: &[usize]) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = t.iter().map(|&j| self.axis_values(j)).collect();
        let mut out = vec![Vec::new()];
        for ax in &axes {
            out = out
                .into_iter()
                .flat_map(|p: Vec<f64>| {
                    ax.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        out
    }

    pub fn count(&self, t: &[usize]) -> u64 {
        t.iter().map(|&j| self.axis_values(j).len() as u64).product()
    }

    /// `sum_{t in T_d} |G_t(delta) ∩ pi_t(box)|`.
    pub fn basic_grid_points(&self) -> u64 {
        combinations(self.n, self.d).iter().map(|t| self.count(t)).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Basic { t: Vec<usize>, g: Vec<f64> },
    Extra { k: usize, t: Vec<usize>, g: Vec<f64> },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SampleTimings {
    pub bottlenecks: PhaseTime,
    pub sampling: PhaseTime,
}

/// A point cloud on `X` with provenance and generation metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub n: usize,
    pub d: usize,
    pub points: Vec<Vec<f64>>,
    pub provenance: Vec<Provenance>,
    pub epsilon_certified: Option<f64>,
    pub delta: f64,
    pub seed: u64,
    pub b2: Option<f64>,
    pub translation: Vec<f64>,
    pub bounding_box: BoundingBox,
    pub basic_count: usize,
    pub extra_count: usize,
    /// Parameter-homotopy paths issued for the slices.
    pub paths_tracked: u64,
    /// Paths of the one-time generic solves that produce start points.
    pub generic_paths: u64,
    /// Generic root count of each point-slice family, keyed like `t`.
    pub slice_degrees: Vec<(Vec<usize>, usize)>,
    pub slices: u64,
    pub singular_endpoints: usize,
    pub timings: SampleTimings,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bottlenecks: Option<BottleneckReport>,
}

impl Sample {
    fn empty(grid: &GridSpec, seed: u64) -> Self {
        Self {
            n: grid.n,
            d: grid.d,
            points: Vec::new(),
            provenance: Vec::new(),
            epsilon_certified: None,
            delta: grid.delta,
            seed,
            b2: None,
            translation: grid.translation.clone(),
            bounding_box: grid.bounding_box.clone(),
            basic_count: 0,
            extra_count: 0,
            paths_tracked: 0,
            generic_paths: 0,
            slice_degrees: Vec::new(),
            slices: 0,
            singular_endpoints: 0,
            timings: SampleTimings::default(),
            bottlenecks: None,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Appends `other`, dropping points within `tol` of an existing one.
    fn absorb(&mut self, other: Sample, tol: f64) {
        let mut hash = SpatialHash::with_points(4.0 * tol, &self.points);
        for (p, prov) in other.points.into_iter().zip(other.provenance) {
            if hash.nearest_within(&p, tol).is_none() {
                hash.insert(p.clone());
                match prov {
                    Provenance::Basic { .. } => self.basic_count += 1,
                    Provenance::Extra { .. } => self.extra_count += 1,
                }
                self.points.push(p);
                self.provenance.push(prov);
            }
        }
        self.paths_tracked += other.paths_tracked;
        self.generic_paths += other.generic_paths;
        self.slice_degrees.extend(other.slice_degrees);
        self.slices += other.slices;
        self.singular_endpoints += other.singular_endpoints;
    }
}

/// `delta = 0.99 * min(epsilon, 2 b2) / sqrt(n)`.
pub fn choose_delta(epsilon: f64, b2: f64, n: usize) -> Result<f64> {
    if !(epsilon > 0.0 && b2 > 0.0 && n > 0) || !epsilon.is_finite() || !b2.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "choose_delta needs positive epsilon and b2, got {epsilon} and {b2}"
        )));
    }
    Ok(DELTA_SLACK * epsilon.min(2.0 * b2) / (n as f64).sqrt())
}

/// Whether `delta * sqrt(n) < min(epsilon, 2 b2)`.
pub fn density_certified(delta: f64, epsilon: f64, b2: f64, n: usize) -> bool {
    delta * (n as f64).sqrt() < epsilon.min(2.0 * b2)
}

fn run_family(
    sys: &PolySystem,
    fam: &SliceFamily,
    grid_points: Vec<Vec<f64>>,
    settings: &TrackSettings,
    tag: impl Fn(&[f64]) -> Provenance + Sync,
    out: &mut Sample,
) {
    let results: Vec<_> = grid_points
        .par_iter()
        .map(|g| (g, fam.solve(sys, g, settings)))
        .collect();
    out.generic_paths += fam.generic_paths();
    out.slices += results.len() as u64;
    for (g, r) in results {
        match r {
            Ok(r) => {
                out.paths_tracked += r.paths;
                out.singular_endpoints += r.singular;
                for p in r.points {
                    out.points.push(p);
                    out.provenance.push(tag(g));
                }
            }
            Err(e) => warn!("slice t={:?} g={g:?} skipped: {e}", fam.t),
        }
    }
}

/// `E_delta`: real points of every slice `x_t = g`, `t` in `T_d`, `g` in the grid.
pub fn basic_sample(sys: &PolySystem, grid: &GridSpec, settings: &TrackSettings) -> Result<Sample> {
    check_grid(sys, grid)?;
    let mut raw = Sample::empty(grid, settings.rng_seed);
    for t in combinations(grid.n, grid.d) {
        let fam = SliceFamily::points(sys, &t, settings)?;
        raw.slice_degrees.push((t.clone(), fam.paths_per_slice()));
        let tt = t.clone();
        run_family(sys, &fam, grid.points(&t), settings, |g| Provenance::Basic { t: tt.clone(), g: g.to_vec() }, &mut raw);
    }
    let mut out = Sample::empty(grid, settings.rng_seed);
    out.absorb(raw, settings.dedup_tol);
    Ok(out)
}

/// `E'_delta`: normal-locus points with respect to `q` of every slice
/// `x_t = g` with `|t| = k`, `1 <= k < d`. Empty for curves.
pub fn extra_sample(sys: &PolySystem, grid: &GridSpec, q: &[f64], settings: &TrackSettings) -> Result<Sample> {
    check_grid(sys, grid)?;
    if q.len() != grid.n {
        return Err(Error::InvalidArgument("base point dimension mismatch".into()));
    }
    let mut raw = Sample::empty(grid, settings.rng_seed);
    for k in 1..grid.d {
        for t in combinations(grid.n, k) {
            let fam = SliceFamily::normal(sys, &t, q, settings)?;
            let tt = t.clone();
            run_family(
                sys,
                &fam,
                grid.points(&t),
                settings,
                |g| Provenance::Extra { k, t: tt.clone(), g: g.to_vec() },
                &mut raw,
            );
        }
    }
    let mut out = Sample::empty(grid, settings.rng_seed);
    out.absorb(raw, settings.dedup_tol);
    Ok(out)
}

fn check_grid(sys: &PolySystem, grid: &GridSpec) -> Result<()> {
    if grid.n != sys.num_vars() {
        return Err(Error::InvalidArgument(format!(
            "grid is in dimension {}, system has {} variables",
            grid.n,
            sys.num_vars()
        )));
    }
    Ok(())
}

/// Knobs for [`total_sample`]. The run seed is `settings.rng_seed`.
#[derive(Clone, Debug, Default)]
pub struct SampleOptions {
    pub settings: TrackSettings,
    pub b2_override: Option<f64>,
    pub delta_override: Option<f64>,
    pub dim_override: Option<usize>,
    pub translation: Option<Vec<f64>>,
    pub bounding_box: Option<BoundingBox>,
    /// Skip the extra sample (only sensible for diagnostics).
    pub basic_only: bool,
}

/// Bounding box, bottlenecks, `delta`, then `E_delta ∪ E'_delta`.
pub fn total_sample(sys: &PolySystem, epsilon: f64, opts: &SampleOptions) -> Result<Sample> {
    let settings = &opts.settings;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    let n = sys.num_vars();
    let d = opts.dim_override.unwrap_or(n - sys.codim());
    if d == 0 || d >= n {
        return Err(Error::BadDimension(d as i64));
    }
    let (found, bn_time) = timed(|| -> Result<_> {
        let bbox = match &opts.bounding_box {
            Some(b) => b.clone(),
            None => bounding_box(sys, settings)?,
        };
        if let Some(b2) = opts.b2_override {
            if !(b2 > 0.0) {
                return Err(Error::InvalidArgument(format!("b2 override must be positive, got {b2}")));
            }
            return Ok((bbox, b2, None));
        }
        let rep = bottlenecks_with(
            sys,
            settings,
            &BottleneckOptions {
                wfs_override: None,
                bounding_box: Some(bbox.clone()),
            },
        )?;
        if !rep.finite {
            return Err(Error::InfiniteBottlenecks);
        }
        let b2 = rep.b2.ok_or(Error::NoBottlenecks)?;
        Ok((bbox, b2, Some(rep)))
    });
    let (bbox, b2, report) = found?;
    let delta = match opts.delta_override {
        Some(dl) => dl,
        None => choose_delta(epsilon, b2, n)?,
    };
    let grid = match &opts.translation {
        Some(tr) => GridSpec::new(delta, tr.clone(), bbox, d)?,
        None => GridSpec::random(delta, bbox, d, settings.rng_seed)?,
    };
    let (sample, s_time) = timed(|| -> Result<Sample> {
        let mut s = basic_sample(sys, &grid, settings)?;
        if !opts.basic_only && d >= 2 {
            let mut r = rng(settings.rng_seed, streams::EXTRA_Q);
            let q: Vec<f64> = grid
                .bounding_box
                .center
                .iter()
                .map(|c| c + r.gen_range(-0.5..0.5) * grid.bounding_box.half_width)
                .collect();
            let extra = extra_sample(sys, &grid, &q, settings)?;
            s.absorb(extra, settings.dedup_tol);
        }
        Ok(s)
    });
    let mut sample = sample?;
    sample.b2 = Some(b2);
    sample.epsilon_certified = density_certified(delta, epsilon, b2, n).then_some(epsilon);
    sample.timings = SampleTimings {
        bottlenecks: bn_time,
        sampling: s_time,
    };
    sample.bottlenecks = report;
    Ok(sample)
}
