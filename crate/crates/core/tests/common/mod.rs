#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use rand::Rng;
use varsample::complex::{ComplexKind, SimplicialComplex};

/// Random downward-closed complex with at most `max_simplices` simplices.
pub fn random_complex<R: Rng>(rng: &mut R, max_simplices: usize) -> SimplicialComplex {
    let n = rng.gen_range(1..=12);
    let mut gens: Vec<Vec<usize>> = Vec::new();
    let mut current = SimplicialComplex::from_simplices(ComplexKind::Cech, 1.0, 4, n, &gens).unwrap();
    for _ in 0..rng.gen_range(0..40) {
        let size = rng.gen_range(1..=5.min(n));
        let mut s: BTreeSet<usize> = BTreeSet::new();
        while s.len() < size {
            s.insert(rng.gen_range(0..n));
        }
        gens.push(s.into_iter().collect());
        let next = SimplicialComplex::from_simplices(ComplexKind::Cech, 1.0, 4, n, &gens).unwrap();
        if next.counts().iter().sum::<usize>() > max_simplices {
            gens.pop();
            continue;
        }
        current = next;
    }
    current
}

/// Rank over GF(2) of a dense matrix by full row reduction.
fn dense_rank(mut m: Vec<Vec<bool>>) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&r| m[r][c]) else {
            continue;
        };
        m.swap(rank, p);
        for r in 0..rows {
            if r != rank && m[r][c] {
                let pivot = m[rank].clone();
                for (x, y) in m[r].iter_mut().zip(pivot) {
                    *x ^= y;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Betti numbers from dense boundary matrices, independent of the library's reduction.
pub fn oracle_betti(k: &SimplicialComplex, top: usize) -> Vec<usize> {
    let rank = |d: usize| -> usize {
        if d == 0 || d >= k.simplices.len() || k.simplices[d].is_empty() {
            return 0;
        }
        let rows: HashMap<&Vec<usize>, usize> = k.simplices[d - 1].iter().enumerate().map(|(i, s)| (s, i)).collect();
        let mut m = vec![vec![false; k.simplices[d].len()]; rows.len()];
        for (j, s) in k.simplices[d].iter().enumerate() {
            for i in 0..s.len() {
                let mut f = s.clone();
                f.remove(i);
                m[rows[&f]][j] = true;
            }
        }
        dense_rank(m)
    };
    (0..=top).map(|i| k.count(i) - rank(i) - rank(i + 1)).collect()
}
