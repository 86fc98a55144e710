mod common;

use std::collections::HashSet;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use varsample::complex::{betti, build_cech, build_modified_vr, min_ball, Coefficients};
use varsample::poly::{Polynomial, PolySystem, Rational};
use varsample::reach::mu_norm;
use varsample::util::dist;

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn poly_strategy(num_vars: usize, max_deg: u32) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec(
        (prop::collection::vec(0..=max_deg, num_vars), -20i64..=20, 1i64..=8),
        1..8,
    )
    .prop_map(move |terms| {
        Polynomial::from_terms(
            num_vars,
            terms.into_iter().map(|(e, n, d)| (e, rat(n, d))),
        )
    })
}

/// Homogeneous form of degree `deg` with small rational coefficients.
fn form_strategy(num_vars: usize, deg: u32) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec((prop::collection::vec(0..num_vars, deg as usize), -9i64..=9), 2..6).prop_map(
        move |terms| {
            let terms = terms.into_iter().filter(|t| t.1 != 0).map(|(vars, c)| {
                let mut e = vec![0u32; num_vars];
                for v in vars {
                    e[v] += 1;
                }
                (e, rat(c, 1))
            });
            let p = Polynomial::from_terms(num_vars, terms);
            if p.is_zero() {
                Polynomial::var(num_vars, 0).pow(deg)
            } else {
                p
            }
        },
    )
}

fn complex_point(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n)
        .prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
}

fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("x{i}")).collect()
}

/// Cayley transform `(I - A)(I + A)^{-1}` of a skew matrix: an exact rational rotation.
fn cayley(a: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let n = a.len();
    let id = |i: usize, j: usize| if i == j { Rational::one() } else { Rational::zero() };
    let mut m: Vec<Vec<Rational>> = (0..n)
        .map(|i| (0..n).map(|j| id(i, j) + &a[i][j]).chain((0..n).map(|j| id(i, j))).collect())
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&r| !m[r][c].is_zero()).expect("I + A is invertible");
        m.swap(c, p);
        let inv = Rational::one() / &m[c][c];
        for v in m[c].iter_mut() {
            *v = &*v * &inv;
        }
        for r in 0..n {
            if r != c && !m[r][c].is_zero() {
                let f = m[r][c].clone();
                let row = m[c].clone();
                for (x, y) in m[r].iter_mut().zip(row) {
                    *x -= &f * y;
                }
            }
        }
    }
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).fold(Rational::zero(), |s, k| s + (id(i, k) - &a[i][k]) * &m[k][n + j]))
                .collect()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jacobian_matches_central_differences(
        polys in prop::collection::vec(poly_strategy(3, 4), 1..3),
        x in complex_point(3),
    ) {
        let sys = PolySystem::new(polys, names(3)).unwrap();
        let j = sys.jacobian(&x).unwrap();
        let h = 1e-5;
        for k in 0..3 {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += h;
            xm[k] -= h;
            let fp = sys.evaluate(&xp).unwrap();
            let fm = sys.evaluate(&xm).unwrap();
            for i in 0..sys.codim() {
                let fd = (fp[i] - fm[i]) / (2.0 * h);
                let scale = j[(i, k)].norm().max(1.0);
                prop_assert!((fd - j[(i, k)]).norm() / scale <= 1e-7, "entry ({i},{k}): {} vs {}", fd, j[(i, k)]);
            }
        }
    }

    #[test]
    fn print_parse_round_trip(p in poly_strategy(3, 5)) {
        let text = p.to_text(&names(3));
        let back = PolySystem::parse(&text, Some(&names(3))).unwrap();
        prop_assert_eq!(&back.polys()[0], &p, "text: {}", text);
    }

    #[test]
    fn product_evaluates_to_product(p in poly_strategy(2, 3), q in poly_strategy(2, 3), x in complex_point(2)) {
        let pq = &p * &q;
        let lhs = pq.eval_complex(&x);
        let rhs = p.eval_complex(&x) * q.eval_complex(&x);
        prop_assert!((lhs - rhs).norm() <= 1e-9 * (1.0 + rhs.norm()));
    }

    #[test]
    fn weil_norm_is_permutation_invariant(f in form_strategy(4, 3), perm in Just(vec![0usize, 1, 2, 3]).prop_shuffle()) {
        let g = f.remap(4, &perm);
        prop_assert!((f.weil_norm().unwrap() - g.weil_norm().unwrap()).abs() <= 1e-12 * f.weil_norm().unwrap());
    }

    #[test]
    fn mu_is_rotation_invariant(
        f1 in form_strategy(4, 2),
        f2 in form_strategy(4, 3),
        skew in prop::collection::vec(-4i64..=4, 6),
        x in prop::collection::vec(-1.0f64..1.0, 4),
    ) {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assume!(r > 0.1);
        let x: Vec<f64> = x.iter().map(|v| v / r).collect();
        let mut a = vec![vec![Rational::zero(); 4]; 4];
        let mut k = 0;
        for i in 0..4 {
            for j in i + 1..4 {
                a[i][j] = rat(skew[k], 4);
                a[j][i] = -rat(skew[k], 4);
                k += 1;
            }
        }
        let q = cayley(&a);
        let args: Vec<Polynomial> = (0..4)
            .map(|i| Polynomial::from_terms(4, (0..4).map(|j| {
                let mut e = vec![0u32; 4];
                e[j] = 1;
                (e, q[i][j].clone())
            })))
            .collect();
        let f = vec![f1, f2];
        let g: Vec<Polynomial> = f.iter().map(|p| p.compose(&args)).collect();
        let qx: Vec<f64> = (0..4)
            .map(|i| (0..4).map(|j| varsample::poly::rational_to_f64(&q[i][j]) * x[j]).sum())
            .collect();
        for (p, r) in f.iter().zip(&g) {
            prop_assert!((p.weil_norm().unwrap() - r.weil_norm().unwrap()).abs() <= 1e-9 * p.weil_norm().unwrap());
        }
        match (mu_norm(&f, &qx), mu_norm(&g, &x)) {
            (Ok(a), Ok(b)) => prop_assert!((a - b).abs() <= 1e-7 * a, "{} vs {}", a, b),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "only one side is regular: {:?} {:?}", a, b),
        }
    }

    #[test]
    fn modified_vr_contains_plain_vr(
        pts in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 2), 1..60),
        eps in 0.03f64..0.2,
    ) {
        let k = build_modified_vr(&pts, eps).unwrap();
        prop_assert!(k.is_downward_closed());
        let edges: HashSet<(usize, usize)> = k.edges().iter().map(|e| (e[0], e[1])).collect();
        for a in 0..pts.len() {
            for b in a + 1..pts.len() {
                let d = dist(&pts[a], &pts[b]);
                if d <= 2.0 * eps {
                    prop_assert!(edges.contains(&(a, b)));
                }
                if edges.contains(&(a, b)) {
                    prop_assert!(d <= 2.0 * 8f64.sqrt() * eps + 1e-12);
                }
            }
        }
    }

    #[test]
    fn cech_is_inside_vr(
        pts in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 3), 1..40),
        eps in 0.05f64..0.3,
    ) {
        let k = build_cech(&pts, eps, 3).unwrap();
        prop_assert!(k.is_downward_closed());
        for dim in 1..=3 {
            for s in &k.simplices[dim] {
                for i in 0..s.len() {
                    for j in i + 1..s.len() {
                        prop_assert!(dist(&pts[s[i]], &pts[s[j]]) <= 2.0 * eps);
                    }
                }
                let refs: Vec<&[f64]> = s.iter().map(|&v| pts[v].as_slice()).collect();
                prop_assert!(min_ball(&refs).radius_sq.sqrt() < eps + 1e-12);
            }
        }
    }

    #[test]
    fn betti_matches_dense_oracle(seed in any::<u64>()) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let k = common::random_complex(&mut rng, 200);
        let top = k.dim().unwrap_or(0).min(3);
        let got = betti(&k, top).unwrap();
        prop_assert_eq!(&got.betti, &common::oracle_betti(&k, top));
        let euler_cells: i64 = k.counts().iter().enumerate().map(|(i, &c)| if i % 2 == 0 { c as i64 } else { -(c as i64) }).sum();
        let q = varsample::complex::betti_with(&k, k.dim().unwrap_or(0), Coefficients::Rational).unwrap();
        let euler_betti: i64 = q.betti.iter().enumerate().map(|(i, &b)| if i % 2 == 0 { b as i64 } else { -(b as i64) }).sum();
        prop_assert_eq!(euler_cells, euler_betti);
    }
}
