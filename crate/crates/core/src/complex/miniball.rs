//! Minimum enclosing balls of a handful of points in `R^n`.

use nalgebra::{DMatrix, DVector};
use num_traits::{One, Zero};

use crate::poly::{rational_from_f64, Rational};

/// Squared radius and center of a ball.
#[derive(Clone, Debug)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius_sq: f64,
}

impl Ball {
    fn contains(&self, p: &[f64]) -> bool {
        let d: f64 = p.iter().zip(&self.center).map(|(a, b)| (a - b) * (a - b)).sum();
        d <= self.radius_sq * (1.0 + 1e-12) + 1e-300
    }
}

/// Smallest ball through every point of `r` with center in their affine hull.
fn circumball(r: &[&[f64]], n: usize) -> Ball {
    match r.len() {
        0 => Ball {
            center: vec![0.0; n],
            radius_sq: -1.0,
        },
        1 => Ball {
            center: r[0].to_vec(),
            radius_sq: 0.0,
        },
        k => {
            let p0 = r[0];
            let v: Vec<Vec<f64>> = r[1..]
                .iter()
                .map(|p| p.iter().zip(p0).map(|(a, b)| a - b).collect())
                .collect();
            let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
            let m = k - 1;
            let a = DMatrix::from_fn(m, m, |i, j| 2.0 * dot(&v[i], &v[j]));
            let b = DVector::from_fn(m, |i, _| dot(&v[i], &v[i]));
            let lambda = a
                .clone()
                .lu()
                .solve(&b)
                .filter(|l| l.iter().all(|x| x.is_finite()))
                .unwrap_or_else(|| a.svd(true, true).solve(&b, 1e-14).expect("svd solve"));
            let mut c = p0.to_vec();
            for (j, vj) in v.iter().enumerate() {
                for i in 0..n {
                    c[i] += lambda[j] * vj[i];
                }
            }
            let radius_sq = r
                .iter()
                .map(|p| p.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
                .fold(0.0, f64::max);
            Ball { center: c, radius_sq }
        }
    }
}

fn welzl<'a>(p: &[&'a [f64]], r: &mut Vec<&'a [f64]>, n: usize) -> Ball {
    if p.is_empty() || r.len() == n + 1 {
        return circumball(r, n);
    }
    let (last, rest) = p.split_last().expect("nonempty");
    let b = welzl(rest, r, n);
    if b.radius_sq >= 0.0 && b.contains(last) {
        return b;
    }
    r.push(last);
    let b = welzl(rest, r, n);
    r.pop();
    b
}

/// Minimum enclosing ball by Welzl's recursion.
pub fn min_ball(points: &[&[f64]]) -> Ball {
    let n = points.first().map_or(0, |p| p.len());
    welzl(points, &mut Vec::new(), n)
}

/// Solves a small square rational system; `None` when singular.
fn solve_exact(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let m = b.len();
    for k in 0..m {
        let piv = (k..m).find(|&i| !a[i][k].is_zero())?;
        a.swap(k, piv);
        b.swap(k, piv);
        for i in k + 1..m {
            if a[i][k].is_zero() {
                continue;
            }
            let f = &a[i][k] / &a[k][k];
            for j in k..m {
                let v = &f * &a[k][j];
                a[i][j] -= v;
            }
            let v = &f * &b[k];
            b[i] -= v;
        }
    }
    let mut x = vec![Rational::zero(); m];
    for k in (0..m).rev() {
        let mut s = b[k].clone();
        for j in k + 1..m {
            s -= &a[k][j] * &x[j];
        }
        x[k] = s / &a[k][k];
    }
    Some(x)
}

fn dist_sq_exact(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |s, (x, y)| {
        let d = x - y;
        s + &d * &d
    })
}

/// Exact squared radius of the minimum enclosing ball: the smallest enclosing
/// circumball over affinely independent subsets.
pub fn min_ball_radius_sq_exact(points: &[&[f64]]) -> Rational {
    let pts: Vec<Vec<Rational>> = points
        .iter()
        .map(|p| p.iter().map(|&v| rational_from_f64(v)).collect())
        .collect();
    let k = pts.len();
    if k <= 1 {
        return Rational::zero();
    }
    let n = pts[0].len();
    let mut best: Option<Rational> = None;
    for mask in 1u32..(1 << k) {
        let s: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        if s.len() > n + 1 {
            continue;
        }
        let p0 = &pts[s[0]];
        let v: Vec<Vec<Rational>> = s[1..]
            .iter()
            .map(|&i| pts[i].iter().zip(p0).map(|(a, b)| a - b).collect())
            .collect();
        let dot = |a: &[Rational], b: &[Rational]| {
            a.iter().zip(b).fold(Rational::zero(), |s, (x, y)| s + x * y)
        };
        let two = Rational::one() + Rational::one();
        let a: Vec<Vec<Rational>> = v
            .iter()
            .map(|vi| v.iter().map(|vj| &two * dot(vi, vj)).collect())
            .collect();
        let b: Vec<Rational> = v.iter().map(|vi| dot(vi, vi)).collect();
        let Some(lambda) = solve_exact(a, b) else {
            continue;
        };
        let mut c = p0.clone();
        for (l, vj) in lambda.iter().zip(&v) {
            for i in 0..n {
                c[i] += l * &vj[i];
            }
        }
        let r2 = dist_sq_exact(&c, p0);
        if best.as_ref().is_some_and(|b| &r2 >= b) {
            continue;
        }
        if pts.iter().all(|p| dist_sq_exact(p, &c) <= r2) {
            best = Some(r2);
        }
    }
    best.expect("some circumball encloses all points")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rational_to_f64;

    fn refs(p: &[Vec<f64>]) -> Vec<&[f64]> {
        p.iter().map(Vec::as_slice).collect()
    }

    #[test]
    fn equilateral_circumradius() {
        let s = 1.0;
        let p = vec![vec![0.0, 0.0], vec![s, 0.0], vec![0.5, 3f64.sqrt() / 2.0]];
        let b = min_ball(&refs(&p));
        assert!((b.radius_sq.sqrt() - s / 3f64.sqrt()).abs() < 1e-12);
        let e = rational_to_f64(&min_ball_radius_sq_exact(&refs(&p)));
        assert!((e - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn obtuse_uses_longest_side() {
        let p = vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![1.0, 0.1]];
        let b = min_ball(&refs(&p));
        assert!((b.radius_sq - 1.0).abs() < 1e-12);
        assert_eq!(min_ball_radius_sq_exact(&refs(&p)), Rational::one());
    }

    #[test]
    fn collinear_and_repeated() {
        let p = vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![3.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]];
        let b = min_ball(&refs(&p));
        assert!((b.radius_sq - 2.25).abs() < 1e-12);
        assert_eq!(rational_to_f64(&min_ball_radius_sq_exact(&refs(&p))), 2.25);
    }

    #[test]
    fn regular_tetrahedron() {
        let p = vec![
            vec![1.0, 1.0, 1.0],
            vec![1.0, -1.0, -1.0],
            vec![-1.0, 1.0, -1.0],
            vec![-1.0, -1.0, 1.0],
        ];
        assert!((min_ball(&refs(&p)).radius_sq - 3.0).abs() < 1e-12);
        assert_eq!(rational_to_f64(&min_ball_radius_sq_exact(&refs(&p))), 3.0);
    }
}
