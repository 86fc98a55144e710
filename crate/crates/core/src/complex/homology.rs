//! Betti numbers by boundary-matrix column reduction, and certificates.

use std::collections::HashMap;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ComplexKind, SimplicialComplex};
use crate::error::{Error, Result};
use crate::poly::Rational;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coefficients {
    #[default]
    Gf2,
    Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    WfsBased,
    ReachBased,
    None,
}

/// One inequality `lhs < rhs` (or `<=`, per `relation`) and its outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub inequality: String,
    pub lhs: f64,
    pub relation: String,
    pub rhs: f64,
    pub holds: bool,
}

impl Check {
    fn less(inequality: &str, lhs: f64, rhs: f64) -> Self {
        Self {
            inequality: inequality.into(),
            lhs,
            relation: "<".into(),
            rhs,
            holds: lhs < rhs,
        }
    }

    fn at_most(inequality: &str, lhs: f64, rhs: f64) -> Self {
        Self {
            inequality: inequality.into(),
            lhs,
            relation: "<=".into(),
            rhs,
            holds: lhs <= rhs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub checks: Vec<Check>,
}

impl Default for Certificate {
    fn default() -> Self {
        Self {
            kind: CertificateKind::None,
            checks: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BettiReport {
    /// `betti[i]` for `i = 0..=top_dim`.
    pub betti: Vec<usize>,
    pub complex_kind: ComplexKind,
    pub epsilon: f64,
    pub coefficients: Coefficients,
    pub simplex_counts: Vec<usize>,
    /// Ranks of the boundary maps `d_1 .. d_{top_dim+1}`.
    pub boundary_ranks: Vec<usize>,
    /// Connected components of the 1-skeleton by union-find.
    pub components: usize,
    pub certificate: Certificate,
}

fn index_of(simplices: &[Vec<usize>]) -> HashMap<&[usize], usize> {
    simplices.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect()
}

/// Boundary columns of the `k`-simplices as (row, sign) lists, rows ascending.
fn boundary_columns(k: &SimplicialComplex, dim: usize) -> Vec<Vec<(usize, bool)>> {
    let (Some(rows), Some(cols)) = (k.simplices.get(dim - 1), k.simplices.get(dim)) else {
        return Vec::new();
    };
    let index = index_of(rows);
    cols.par_iter()
        .map(|s| {
            let mut col: Vec<(usize, bool)> = (0..s.len())
                .map(|i| {
                    let mut f = s.clone();
                    f.remove(i);
                    let r = *index.get(f.as_slice()).expect("complex is downward closed");
                    (r, i % 2 == 1)
                })
                .collect();
            col.sort_unstable();
            col
        })
        .collect()
}

fn sym_diff(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(a.len() + b.len());
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Rank over GF(2) by left-to-right column reduction on lowest entries.
pub fn rank_gf2(columns: Vec<Vec<usize>>) -> usize {
    let mut pivots: HashMap<usize, Vec<usize>> = HashMap::new();
    for mut col in columns {
        while let Some(&low) = col.last() {
            match pivots.get(&low) {
                Some(p) => col = sym_diff(&col, p),
                None => {
                    pivots.insert(low, col);
                    break;
                }
            }
        }
    }
    pivots.len()
}

/// Rank over the rationals by the same reduction with exact fractions.
pub fn rank_rational(columns: Vec<Vec<(usize, Rational)>>) -> usize {
    let mut pivots: HashMap<usize, Vec<(usize, Rational)>> = HashMap::new();
    for mut col in columns {
        while let Some((low, v)) = col.last().cloned() {
            let Some(p) = pivots.get(&low) else {
                pivots.insert(low, col);
                break;
            };
            let f = v / &p.last().expect("pivot column").1;
            let mut merged: Vec<(usize, Rational)> = Vec::with_capacity(col.len() + p.len());
            let (mut i, mut j) = (0, 0);
            while i < col.len() || j < p.len() {
                let take_a = j == p.len() || (i < col.len() && col[i].0 < p[j].0);
                let take_b = i == col.len() || (j < p.len() && p[j].0 < col[i].0);
                if take_a {
                    merged.push(col[i].clone());
                    i += 1;
                } else if take_b {
                    merged.push((p[j].0, -(&f * &p[j].1)));
                    j += 1;
                } else {
                    let v = &col[i].1 - &f * &p[j].1;
                    if !v.is_zero() {
                        merged.push((col[i].0, v));
                    }
                    i += 1;
                    j += 1;
                }
            }
            col = merged;
        }
    }
    pivots.len()
}

fn boundary_rank(k: &SimplicialComplex, dim: usize, coeff: Coefficients) -> usize {
    if dim == 0 || dim >= k.simplices.len() {
        return 0;
    }
    let cols = boundary_columns(k, dim);
    match coeff {
        Coefficients::Gf2 => rank_gf2(cols.into_iter().map(|c| c.into_iter().map(|e| e.0).collect()).collect()),
        Coefficients::Rational => rank_rational(
            cols.into_iter()
                .map(|c| {
                    c.into_iter()
                        .map(|(r, neg)| (r, if neg { -Rational::one() } else { Rational::one() }))
                        .collect()
                })
                .collect(),
        ),
    }
}

/// Number of connected components of the 1-skeleton.
pub fn components(k: &SimplicialComplex) -> usize {
    let mut parent: Vec<usize> = (0..k.num_vertices).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut count = k.num_vertices;
    for e in k.edges() {
        let (a, b) = (find(&mut parent, e[0]), find(&mut parent, e[1]));
        if a != b {
            parent[a.max(b)] = a.min(b);
            count -= 1;
        }
    }
    count
}

pub fn betti(k: &SimplicialComplex, top_dim: usize) -> Result<BettiReport> {
    betti_with(k, top_dim, Coefficients::Gf2)
}

/// `beta_i = dim C_i - rank d_i - rank d_{i+1}` for `i <= top_dim`.
pub fn betti_with(k: &SimplicialComplex, top_dim: usize, coeff: Coefficients) -> Result<BettiReport> {
    if top_dim > k.max_dim {
        return Err(Error::TopDimension {
            requested: top_dim,
            cap: k.max_dim,
        });
    }
    let ranks: Vec<usize> = (1..=top_dim + 1)
        .into_par_iter()
        .map(|d| boundary_rank(k, d, coeff))
        .collect();
    let rank = |d: usize| if d == 0 { 0 } else { ranks[d - 1] };
    let betti: Vec<usize> = (0..=top_dim).map(|i| k.count(i) - rank(i) - rank(i + 1)).collect();
    let comps = components(k);
    assert_eq!(betti[0], comps, "beta_0 disagrees with union-find");
    Ok(BettiReport {
        betti,
        complex_kind: k.kind,
        epsilon: k.epsilon,
        coefficients: coeff,
        simplex_counts: k.counts(),
        boundary_ranks: ranks,
        components: comps,
        certificate: Certificate::default(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertifyMode {
    Wfs,
    Reach,
}

/// Values the certificate inequalities are checked against.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CertifyInputs {
    /// Declared weak feature size, or `b2` when the two agree.
    pub wfs: Option<f64>,
    /// Minimum over the sample of the local reach lower bound.
    pub local_reach_min: Option<f64>,
    /// Density the sample is certified for.
    pub sample_epsilon: Option<f64>,
}

/// Stamps a certificate when every hypothesis of the chosen mode holds.
///
/// `wfs`: `eps < wfs` (plus `sample eps <= eps` when a density is given).
/// `reach`: `eps < 4/5 min eta` and `sample eps <= eps/2`.
pub fn certify(mut report: BettiReport, epsilon: f64, mode: CertifyMode, inputs: &CertifyInputs) -> Result<BettiReport> {
    let missing = |what: &str| Error::MissingCertificateInput(what.into());
    let (kind, checks) = match (mode, report.complex_kind) {
        (CertifyMode::Wfs, ComplexKind::ModifiedVr) => {
            let wfs = inputs.wfs.ok_or_else(|| missing("wfs or b2"))?;
            let mut checks = vec![Check::less("epsilon < wfs", epsilon, wfs)];
            if let Some(s) = inputs.sample_epsilon {
                checks.push(Check::at_most("sample epsilon <= epsilon", s, epsilon));
            }
            (CertificateKind::WfsBased, checks)
        }
        (CertifyMode::Reach, ComplexKind::Cech) => {
            let eta = inputs.local_reach_min.ok_or_else(|| missing("minimum local reach"))?;
            let s = inputs.sample_epsilon.ok_or_else(|| missing("sample density"))?;
            (
                CertificateKind::ReachBased,
                vec![
                    Check::less("epsilon < 4/5 * min eta", epsilon, 0.8 * eta),
                    Check::at_most("sample epsilon <= epsilon / 2", s, epsilon / 2.0),
                ],
            )
        }
        (mode, kind) => {
            return Err(Error::InvalidArgument(format!(
                "certificate mode {mode:?} does not apply to a {} complex",
                kind.name()
            )))
        }
    };
    let ok = checks.iter().all(|c| c.holds);
    report.certificate = Certificate {
        kind: if ok { kind } else { CertificateKind::None },
        checks,
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cx(kind: ComplexKind, max_dim: usize, n: usize, gens: &[Vec<usize>]) -> SimplicialComplex {
        SimplicialComplex::from_simplices(kind, 1.0, max_dim, n, gens).unwrap()
    }

    #[test]
    fn triangles() {
        let hollow = cx(ComplexKind::ModifiedVr, 2, 3, &[vec![0, 1], vec![1, 2], vec![0, 2]]);
        assert_eq!(betti(&hollow, 1).unwrap().betti, vec![1, 1]);
        let filled = cx(ComplexKind::ModifiedVr, 2, 3, &[vec![0, 1, 2]]);
        assert_eq!(betti(&filled, 1).unwrap().betti, vec![1, 0]);
    }

    #[test]
    fn hollow_tetrahedron() {
        let k = cx(
            ComplexKind::Cech,
            3,
            4,
            &[vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]],
        );
        assert_eq!(betti(&k, 2).unwrap().betti, vec![1, 0, 1]);
        assert_eq!(betti_with(&k, 2, Coefficients::Rational).unwrap().betti, vec![1, 0, 1]);
    }

    #[test]
    fn projective_plane_torsion_shows_in_field_choice() {
        // Six-vertex triangulation of RP^2.
        let f = [
            [0, 1, 2],
            [0, 2, 3],
            [0, 3, 4],
            [0, 4, 5],
            [0, 5, 1],
            [1, 2, 4],
            [2, 3, 5],
            [3, 4, 1],
            [4, 5, 2],
            [5, 1, 3],
        ];
        let gens: Vec<Vec<usize>> = f.iter().map(|t| t.to_vec()).collect();
        let k = cx(ComplexKind::Cech, 2, 6, &gens);
        assert_eq!(betti(&k, 2).unwrap().betti, vec![1, 1, 1]);
        assert_eq!(betti_with(&k, 2, Coefficients::Rational).unwrap().betti, vec![1, 0, 0]);
    }

    #[test]
    fn top_dim_cap() {
        let k = cx(ComplexKind::ModifiedVr, 2, 1, &[]);
        assert!(matches!(betti(&k, 3), Err(Error::TopDimension { requested: 3, cap: 2 })));
    }

    #[test]
    fn certify_examples() {
        let vr = betti(&cx(ComplexKind::ModifiedVr, 2, 1, &[]), 1).unwrap();
        let wfs = |w| CertifyInputs {
            wfs: Some(w),
            ..Default::default()
        };
        let r = certify(vr.clone(), 0.06, CertifyMode::Wfs, &wfs(0.13835)).unwrap();
        assert_eq!(r.certificate.kind, CertificateKind::WfsBased);
        let r = certify(vr.clone(), 0.2, CertifyMode::Wfs, &wfs(0.138)).unwrap();
        assert_eq!(r.certificate.kind, CertificateKind::None);
        assert!(!r.certificate.checks[0].holds);
        assert!(matches!(
            certify(vr.clone(), 0.1, CertifyMode::Wfs, &CertifyInputs::default()),
            Err(Error::MissingCertificateInput(_))
        ));
        assert!(certify(vr, 0.1, CertifyMode::Reach, &wfs(1.0)).is_err());

        let cech = betti(&cx(ComplexKind::Cech, 2, 1, &[]), 1).unwrap();
        let inputs = CertifyInputs {
            local_reach_min: Some(0.05),
            sample_epsilon: Some(0.01),
            ..Default::default()
        };
        let r = certify(cech, 0.05, CertifyMode::Reach, &inputs).unwrap();
        assert_eq!(r.certificate.kind, CertificateKind::None);
        assert!((r.certificate.checks[0].rhs - 0.04).abs() < 1e-15);
    }
}
