//! Simplicial complexes on a point sample: the modified Vietoris-Rips complex
//! (closed balls, witness rule) and the Čech complex (open-ball nerve).

pub mod homology;
pub mod miniball;

use std::collections::HashSet;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{rational_from_f64, Rational};
use crate::util::{dist, SpatialHash};

pub use homology::{
    betti, betti_with, certify, BettiReport, Certificate, CertificateKind, Check, Coefficients, CertifyInputs,
    CertifyMode,
};
pub use miniball::{min_ball, min_ball_radius_sq_exact, Ball};

/// Comparisons closer than this to the threshold are decided exactly.
pub const TIE_TOL: f64 = 1e-12;
/// Highest simplex dimension of the modified Vietoris-Rips complex.
pub const VR_MAX_DIM: usize = 2;
/// Highest simplex dimension a Čech complex may be built to.
pub const CECH_MAX_DIM: usize = 4;
/// Default witness factor: condition (ii) allows `|a - b| <= 2 sqrt(8) eps`.
pub const DEFAULT_WITNESS_FACTOR: f64 = 5.656854249492381;

/// Format tag on the first line of exported complexes.
pub const COMPLEX_FORMAT: &str = "varsample-complex/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComplexKind {
    ModifiedVr,
    Cech,
}

impl ComplexKind {
    pub fn name(self) -> &'static str {
        match self {
            ComplexKind::ModifiedVr => "modified_vr",
            ComplexKind::Cech => "cech",
        }
    }

    pub fn dim_cap(self) -> usize {
        match self {
            ComplexKind::ModifiedVr => VR_MAX_DIM,
            ComplexKind::Cech => CECH_MAX_DIM,
        }
    }
}

/// Simplices stored per dimension as strictly increasing vertex tuples,
/// sorted lexicographically within each dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimplicialComplex {
    pub kind: ComplexKind,
    pub epsilon: f64,
    /// Dimension the complex was built up to.
    pub max_dim: usize,
    pub num_vertices: usize,
    pub simplices: Vec<Vec<Vec<usize>>>,
}

impl SimplicialComplex {
    /// Downward closure of `generators`; each generator is sorted and deduplicated.
    pub fn from_simplices(
        kind: ComplexKind,
        epsilon: f64,
        max_dim: usize,
        num_vertices: usize,
        generators: &[Vec<usize>],
    ) -> Result<Self> {
        if max_dim > kind.dim_cap() {
            return Err(Error::TopDimension {
                requested: max_dim,
                cap: kind.dim_cap(),
            });
        }
        let mut sets: Vec<HashSet<Vec<usize>>> = vec![HashSet::new(); max_dim + 1];
        for v in 0..num_vertices {
            sets[0].insert(vec![v]);
        }
        for g in generators {
            let mut s = g.clone();
            s.sort_unstable();
            s.dedup();
            if s.is_empty() {
                continue;
            }
            if s.len() > max_dim + 1 {
                return Err(Error::InvalidArgument(format!(
                    "simplex {s:?} exceeds dimension {max_dim}"
                )));
            }
            if s.last().is_some_and(|&v| v >= num_vertices) {
                return Err(Error::InvalidArgument(format!("simplex {s:?} has an unknown vertex")));
            }
            let mut stack = vec![s];
            while let Some(s) = stack.pop() {
                let k = s.len() - 1;
                if !sets[k].insert(s.clone()) || k == 0 {
                    continue;
                }
                for i in 0..s.len() {
                    let mut f = s.clone();
                    f.remove(i);
                    stack.push(f);
                }
            }
        }
        let simplices = sets
            .into_iter()
            .map(|s| {
                let mut v: Vec<_> = s.into_iter().collect();
                v.sort_unstable();
                v
            })
            .collect();
        Ok(Self {
            kind,
            epsilon,
            max_dim,
            num_vertices,
            simplices,
        })
    }

    /// Largest dimension holding at least one simplex, `None` when empty.
    pub fn dim(&self) -> Option<usize> {
        self.simplices.iter().rposition(|s| !s.is_empty())
    }

    pub fn count(&self, k: usize) -> usize {
        self.simplices.get(k).map_or(0, Vec::len)
    }

    pub fn counts(&self) -> Vec<usize> {
        self.simplices.iter().map(Vec::len).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.num_vertices == 0
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        self.simplices.get(1).map_or(&[], Vec::as_slice)
    }

    /// Every stored face of every stored simplex is present and tuples increase.
    pub fn is_downward_closed(&self) -> bool {
        let sets: Vec<HashSet<&Vec<usize>>> = self.simplices.iter().map(|s| s.iter().collect()).collect();
        for (k, simplices) in self.simplices.iter().enumerate() {
            for s in simplices {
                if s.len() != k + 1 || s.windows(2).any(|w| w[0] >= w[1]) {
                    return false;
                }
                if s.iter().any(|&v| v >= self.num_vertices) {
                    return false;
                }
                if k == 0 {
                    continue;
                }
                for i in 0..s.len() {
                    let mut f = s.clone();
                    f.remove(i);
                    if !sets[k - 1].contains(&f) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Flat text export; see `docs/formats.md`.
    pub fn write_text<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{COMPLEX_FORMAT}")?;
        writeln!(w, "kind {}", self.kind.name())?;
        writeln!(w, "epsilon {}", self.epsilon)?;
        writeln!(w, "vertices {}", self.num_vertices)?;
        for (k, simplices) in self.simplices.iter().enumerate().skip(1) {
            writeln!(w, "dim {k} {}", simplices.len())?;
            for s in simplices {
                let line: Vec<String> = s.iter().map(usize::to_string).collect();
                writeln!(w, "{}", line.join(" "))?;
            }
        }
        Ok(())
    }
}

fn exact_dist_sq(a: &[f64], b: &[f64]) -> Rational {
    a.iter().zip(b).fold(Rational::default(), |s, (x, y)| {
        let d = rational_from_f64(*x) - rational_from_f64(*y);
        s + &d * &d
    })
}

/// `|a - b| <= r`, decided exactly near the threshold.
pub fn within_closed(a: &[f64], b: &[f64], r: f64) -> bool {
    let d = dist(a, b);
    if (d - r).abs() >= TIE_TOL {
        return d <= r;
    }
    let r = rational_from_f64(r);
    exact_dist_sq(a, b) <= &r * &r
}

/// Options for the modified Vietoris-Rips construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VrOptions {
    /// Edge length bound, in units of `eps`, when a common witness exists.
    pub witness_factor: f64,
}

impl Default for VrOptions {
    fn default() -> Self {
        Self {
            witness_factor: DEFAULT_WITNESS_FACTOR,
        }
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")))
    }
}

fn intersect_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j, mut out) = (0, 0, Vec::new());
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn has_common(a: &[usize], b: &[usize]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

/// Adjacency lists (ascending, self excluded) of the edge set.
fn adjacency(num_vertices: usize, edges: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); num_vertices];
    for e in edges {
        adj[e[0]].push(e[1]);
        adj[e[1]].push(e[0]);
    }
    for a in &mut adj {
        a.sort_unstable();
    }
    adj
}

pub fn build_modified_vr(points: &[Vec<f64>], epsilon: f64) -> Result<SimplicialComplex> {
    build_modified_vr_with(points, epsilon, &VrOptions::default())
}

/// Edge `{a,b}` when `|a-b| <= 2 eps`, or when `|a-b| <= witness_factor * eps`
/// and some third point lies within `2 eps` of both; triangles are the
/// 3-cliques of that graph.
pub fn build_modified_vr_with(points: &[Vec<f64>], epsilon: f64, opts: &VrOptions) -> Result<SimplicialComplex> {
    check_epsilon(epsilon)?;
    if !(opts.witness_factor >= 2.0 && opts.witness_factor.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "witness factor must be at least 2, got {}",
            opts.witness_factor
        )));
    }
    let near_r = 2.0 * epsilon;
    let far_r = opts.witness_factor * epsilon;
    let hash = SpatialHash::with_points(far_r, points);
    let lists: Vec<(Vec<usize>, Vec<usize>)> = (0..points.len())
        .into_par_iter()
        .map(|a| {
            let mut near = Vec::new();
            let mut far = Vec::new();
            for b in hash.within(&points[a], far_r + TIE_TOL) {
                if b == a {
                    continue;
                }
                if within_closed(&points[a], &points[b], near_r) {
                    near.push(b);
                } else if b > a && within_closed(&points[a], &points[b], far_r) {
                    far.push(b);
                }
            }
            (near, far)
        })
        .collect();
    let lists = &lists;
    let edges: Vec<Vec<usize>> = (0..points.len())
        .into_par_iter()
        .flat_map_iter(|a| {
            let (near, far) = &lists[a];
            let direct = near.iter().filter(move |&&b| b > a).map(move |&b| vec![a, b]);
            let witnessed = far
                .iter()
                .filter(move |&&b| has_common(near, &lists[b].0))
                .map(move |&b| vec![a, b]);
            let mut v: Vec<Vec<usize>> = direct.chain(witnessed).collect();
            v.sort_unstable();
            v
        })
        .collect();
    let adj = adjacency(points.len(), &edges);
    let triangles: Vec<Vec<usize>> = edges
        .par_iter()
        .flat_map_iter(|e| {
            let (a, b) = (e[0], e[1]);
            intersect_sorted(&adj[a], &adj[b])
                .into_iter()
                .filter(move |&c| c > b)
                .map(move |c| vec![a, b, c])
        })
        .collect();
    Ok(SimplicialComplex {
        kind: ComplexKind::ModifiedVr,
        epsilon,
        max_dim: VR_MAX_DIM,
        num_vertices: points.len(),
        simplices: vec![(0..points.len()).map(|v| vec![v]).collect(), edges, triangles],
    })
}

/// Open-ball nerve test: the minimum enclosing ball of `vertices` has radius `< eps`.
pub fn cech_simplex(points: &[Vec<f64>], vertices: &[usize], epsilon: f64) -> bool {
    let pts: Vec<&[f64]> = vertices.iter().map(|&v| points[v].as_slice()).collect();
    let r = min_ball(&pts).radius_sq.max(0.0).sqrt();
    if (r - epsilon).abs() >= TIE_TOL {
        return r < epsilon;
    }
    let e = rational_from_f64(epsilon);
    min_ball_radius_sq_exact(&pts) < &e * &e
}

/// Čech complex up to `max_dim`; `k`-simplices are grown from `(k-1)`-simplices
/// whose vertices share a neighbor, then filtered by the minimum-ball radius.
pub fn build_cech(points: &[Vec<f64>], epsilon: f64, max_dim: usize) -> Result<SimplicialComplex> {
    check_epsilon(epsilon)?;
    if max_dim > CECH_MAX_DIM {
        return Err(Error::TopDimension {
            requested: max_dim,
            cap: CECH_MAX_DIM,
        });
    }
    let n = points.len();
    let mut simplices: Vec<Vec<Vec<usize>>> = vec![(0..n).map(|v| vec![v]).collect()];
    if max_dim == 0 {
        return Ok(SimplicialComplex {
            kind: ComplexKind::Cech,
            epsilon,
            max_dim,
            num_vertices: n,
            simplices,
        });
    }
    let r = 2.0 * epsilon;
    let hash = SpatialHash::with_points(r, points);
    let edges: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .flat_map_iter(|a| {
            hash.within(&points[a], r + TIE_TOL)
                .into_iter()
                .filter(move |&b| b > a && cech_simplex(points, &[a, b], epsilon))
                .map(move |b| vec![a, b])
        })
        .collect();
    let adj = adjacency(n, &edges);
    simplices.push(edges);
    for k in 2..=max_dim {
        let prev: HashSet<&Vec<usize>> = simplices[k - 1].iter().collect();
        let next: Vec<Vec<usize>> = simplices[k - 1]
            .par_iter()
            .flat_map_iter(|s| {
                let last = *s.last().expect("nonempty simplex");
                let mut common = adj[s[0]].clone();
                for &v in &s[1..] {
                    common = intersect_sorted(&common, &adj[v]);
                }
                let prev = &prev;
                common
                    .into_iter()
                    .filter(move |&c| c > last)
                    .filter_map(move |c| {
                        let mut t = s.clone();
                        t.push(c);
                        let faces_present = (0..t.len() - 1).all(|i| {
                            let mut f = t.clone();
                            f.remove(i);
                            prev.contains(&f)
                        });
                        (faces_present && cech_simplex(points, &t, epsilon)).then_some(t)
                    })
            })
            .collect();
        simplices.push(next);
    }
    Ok(SimplicialComplex {
        kind: ComplexKind::Cech,
        epsilon,
        max_dim,
        num_vertices: n,
        simplices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vr_far_pair_has_no_edge() {
        let k = build_modified_vr(&[vec![0.0, 0.0], vec![3.0, 0.0]], 1.0).unwrap();
        assert_eq!(k.count(1), 0);
    }

    #[test]
    fn vr_witness_edge() {
        let eps = 1.0;
        let h = (4.0f64 - 1.5625).sqrt() * (1.0 - 1e-9);
        let pts = vec![vec![0.0, 0.0], vec![2.5, 0.0], vec![1.25, h]];
        let k = build_modified_vr(&pts, eps).unwrap();
        assert_eq!(k.edges(), &[vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(k.simplices[2], vec![vec![0, 1, 2]]);
    }

    #[test]
    fn vr_closed_boundary() {
        let k = build_modified_vr(&[vec![0.0], vec![2.0]], 1.0).unwrap();
        assert_eq!(k.count(1), 1);
    }

    #[test]
    fn cech_equilateral() {
        let s = 1.0;
        let pts = vec![vec![0.0, 0.0], vec![s, 0.0], vec![0.5, 3f64.sqrt() / 2.0]];
        let circ = s / 3f64.sqrt();
        let k = build_cech(&pts, circ + 1e-6, 2).unwrap();
        assert_eq!(k.count(2), 1);
        let k = build_cech(&pts, 0.55, 2).unwrap();
        assert_eq!((k.count(1), k.count(2)), (3, 0));
    }

    #[test]
    fn cech_open_boundary() {
        let k = build_cech(&[vec![0.0], vec![2.0]], 1.0, 1).unwrap();
        assert_eq!(k.count(1), 0);
    }

    #[test]
    fn cech_dimension_cap() {
        assert!(matches!(
            build_cech(&[vec![0.0]], 1.0, 5),
            Err(Error::TopDimension { requested: 5, cap: 4 })
        ));
    }

    #[test]
    fn closure_from_generators() {
        let k = SimplicialComplex::from_simplices(ComplexKind::Cech, 1.0, 2, 4, &[vec![2, 1, 0], vec![3, 2]]).unwrap();
        assert_eq!(k.counts(), vec![4, 4, 1]);
        assert!(k.is_downward_closed());
    }

    #[test]
    fn text_export() {
        let k = SimplicialComplex::from_simplices(ComplexKind::ModifiedVr, 0.5, 2, 3, &[vec![0, 1]]).unwrap();
        let mut buf = Vec::new();
        k.write_text(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "varsample-complex/1\nkind modified_vr\nepsilon 0.5\nvertices 3\ndim 1 1\n0 1\ndim 2 0\n"
        );
    }
}
