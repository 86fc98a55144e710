//! Small shared helpers.

use std::collections::HashMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

/// All strictly increasing `k`-subsets of `0..n`, in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i as u64 + 1))
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(u, v)| (u - v) * (u - v))
        .sum::<f64>()
        .sqrt()
}

pub fn norm(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Wall and CPU seconds spent in one phase of a run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTime {
    pub wall_s: f64,
    pub cpu_s: f64,
}

/// Process CPU time (user + system) in seconds.
pub fn cpu_seconds() -> f64 {
    // SAFETY: getrusage only writes into the zeroed struct we pass.
    unsafe {
        let mut ru: libc::rusage = std::mem::zeroed();
        if libc::getrusage(libc::RUSAGE_SELF, &mut ru) != 0 {
            return 0.0;
        }
        let tv = |t: libc::timeval| t.tv_sec as f64 + t.tv_usec as f64 * 1e-6;
        tv(ru.ru_utime) + tv(ru.ru_stime)
    }
}

/// Runs `f` and reports how long it took.
pub fn timed<T>(f: impl FnOnce() -> T) -> (T, PhaseTime) {
    let (w0, c0) = (Instant::now(), cpu_seconds());
    let out = f();
    let t = PhaseTime {
        wall_s: w0.elapsed().as_secs_f64(),
        cpu_s: (cpu_seconds() - c0).max(0.0),
    };
    (out, t)
}

/// Uniform grid hash over points in `R^n` for radius queries.
#[derive(Clone, Debug)]
pub struct SpatialHash {
    cell: f64,
    map: HashMap<Vec<i64>, Vec<usize>>,
    points: Vec<Vec<f64>>,
}

impl SpatialHash {
    pub fn new(cell: f64) -> Self {
        assert!(cell > 0.0 && cell.is_finite(), "cell size must be positive");
        Self {
            cell,
            map: HashMap::new(),
            points: Vec::new(),
        }
    }

    pub fn with_points(cell: f64, points: &[Vec<f64>]) -> Self {
        let mut h = Self::new(cell);
        for p in points {
            h.insert(p.clone());
        }
        h
    }

    fn key(&self, x: &[f64]) -> Vec<i64> {
        x.iter().map(|v| (v / self.cell).floor() as i64).collect()
    }

    /// Stores `x` and returns its index.
    pub fn insert(&mut self, x: Vec<f64>) -> usize {
        let i = self.points.len();
        self.map.entry(self.key(&x)).or_default().push(i);
        self.points.push(x);
        i
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Indices of stored points within distance `r` of `x`, ascending.
    pub fn within(&self, x: &[f64], r: f64) -> Vec<usize> {
        let lo: Vec<i64> = x.iter().map(|v| ((v - r) / self.cell).floor() as i64).collect();
        let hi: Vec<i64> = x.iter().map(|v| ((v + r) / self.cell).floor() as i64).collect();
        let mut out = Vec::new();
        let mut key = lo.clone();
        loop {
            if let Some(ids) = self.map.get(&key) {
                out.extend(ids.iter().copied().filter(|&i| dist(&self.points[i], x) <= r));
            }
            let mut j = 0;
            loop {
                if j == key.len() {
                    out.sort_unstable();
                    return out;
                }
                if key[j] < hi[j] {
                    key[j] += 1;
                    break;
                }
                key[j] = lo[j];
                j += 1;
            }
        }
    }

    /// Nearest stored point within `r`, if any.
    pub fn nearest_within(&self, x: &[f64], r: f64) -> Option<(usize, f64)> {
        self.within(x, r)
            .into_iter()
            .map(|i| (i, dist(&self.points[i], x)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinations_small() {
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(combinations(3, 1), vec![vec![0], vec![1], vec![2]]);
        assert_eq!(combinations(2, 0), vec![Vec::<usize>::new()]);
        assert!(combinations(2, 3).is_empty());
        assert_eq!(combinations(5, 3)[..3], [vec![0, 1, 2], vec![0, 1, 3], vec![0, 1, 4]]);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(8, 3), 56);
        assert_eq!(binomial(2, 3), 0);
    }

    #[test]
    fn spatial_hash_queries() {
        let pts: Vec<Vec<f64>> = (0..100).map(|i| vec![i as f64 * 0.1, (i % 7) as f64]).collect();
        let h = SpatialHash::with_points(0.25, &pts);
        let q = [2.03, 3.0];
        let brute: Vec<usize> = (0..100).filter(|&i| dist(&pts[i], &q) <= 0.7).collect();
        assert_eq!(h.within(&q, 0.7), brute);
        assert_eq!(h.nearest_within(&[-5.0, 0.0], 1.0), None);
    }
}
