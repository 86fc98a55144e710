//! Predictor-corrector path tracking along a homotopy `H(x, t)`, `t: 0 -> 1`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::homotopy::{Homotopy, HomotopyWork};
use super::settings::TrackSettings;

type C64 = Complex64;

/// Above this norm a path counts as escaping to infinity.
pub const DIVERGENCE_RADIUS: f64 = 1e8;
/// Endpoints whose Jacobian condition number exceeds this are singular.
pub const SINGULAR_COND: f64 = 1e10;
/// Relative Newton step accepted during tracking (polishing uses `newton_tol`).
const TRACK_TOL: f64 = 1e-8;
/// Remaining `1 - t` below which tracking hands over to the polisher.
const ENDGAME_JUMP: f64 = 1e-8;
/// In the endgame, a step below this fraction of `1 - t` counts as a stall.
const STALL_RATIO: f64 = 1e-2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathStatus {
    Converged,
    Diverged,
    SingularEndpoint,
    Truncated,
}

impl PathStatus {
    /// Ordering used when merging duplicate endpoints.
    pub(crate) fn priority(self) -> u8 {
        match self {
            PathStatus::Converged => 0,
            PathStatus::SingularEndpoint => 1,
            PathStatus::Truncated => 2,
            PathStatus::Diverged => 3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PathResult {
    pub point: Vec<C64>,
    pub status: PathStatus,
    /// Scaled residual `max_i |H_i| / (1 + sum |terms_i|)` at the endpoint.
    pub residual: f64,
    pub cond: f64,
    pub steps: usize,
}

/// Reusable buffers for one tracking worker.
#[derive(Default)]
pub struct TrackWork {
    hw: HomotopyWork,
    h: Vec<C64>,
    hx: Vec<C64>,
    ht: Vec<C64>,
    mags: Vec<f64>,
    lu: Vec<C64>,
    perm: Vec<usize>,
    k: [Vec<C64>; 4],
    tmp: Vec<C64>,
}

impl TrackWork {
    fn prepare(&mut self, n: usize) {
        let z = C64::default();
        self.h.resize(n, z);
        self.hx.resize(n * n, z);
        self.ht.resize(n, z);
        self.mags.resize(n, 0.0);
        self.lu.resize(n * n, z);
        self.perm.resize(n, 0);
        for k in &mut self.k {
            k.resize(n, z);
        }
        self.tmp.resize(n, z);
    }

    fn eval<H: Homotopy>(&mut self, hom: &H, x: &[C64], t: f64) {
        hom.eval(
            x,
            t,
            &mut self.hw,
            &mut self.h,
            &mut self.hx,
            &mut self.ht,
            &mut self.mags,
        );
    }
}

/// In-place LU with partial pivoting of a row-major `n x n` matrix.
fn lu_factor(a: &mut [C64], perm: &mut [usize], n: usize) -> bool {
    for (i, p) in perm.iter_mut().enumerate() {
        *p = i;
    }
    let scale = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if !(scale > 0.0 && scale.is_finite()) {
        return false;
    }
    for k in 0..n {
        let (mut best, mut piv) = (0.0, k);
        for i in k..n {
            let v = a[i * n + k].norm();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best <= scale * 1e-15 {
            return false;
        }
        if piv != k {
            for j in 0..n {
                a.swap(k * n + j, piv * n + j);
            }
            perm.swap(k, piv);
        }
        let d = a[k * n + k];
        for i in k + 1..n {
            let f = a[i * n + k] / d;
            a[i * n + k] = f;
            for j in k + 1..n {
                let u = a[k * n + j];
                a[i * n + j] -= f * u;
            }
        }
    }
    true
}

fn lu_solve(a: &[C64], perm: &[usize], n: usize, b: &[C64], out: &mut [C64]) {
    for i in 0..n {
        out[i] = b[perm[i]];
    }
    for i in 0..n {
        let mut s = out[i];
        for j in 0..i {
            s -= a[i * n + j] * out[j];
        }
        out[i] = s;
    }
    for i in (0..n).rev() {
        let mut s = out[i];
        for j in i + 1..n {
            s -= a[i * n + j] * out[j];
        }
        out[i] = s / a[i * n + i];
    }
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Davidenko direction `dx/dt = -Hx^{-1} Ht` at `(x, t)`, written to `out`.
fn tangent<H: Homotopy>(hom: &H, x: &[C64], t: f64, w: &mut TrackWork, out_slot: usize) -> bool {
    let n = x.len();
    w.eval(hom, x, t);
    w.lu.copy_from_slice(&w.hx);
    if !lu_factor(&mut w.lu, &mut w.perm, n) {
        return false;
    }
    let neg: Vec<C64> = w.ht.iter().map(|v| -v).collect();
    let mut out = std::mem::take(&mut w.k[out_slot]);
    lu_solve(&w.lu, &w.perm, n, &neg, &mut out);
    let ok = out.iter().all(|v| v.re.is_finite() && v.im.is_finite());
    w.k[out_slot] = out;
    ok
}

fn rk4<H: Homotopy>(hom: &H, x: &[C64], t: f64, h: f64, w: &mut TrackWork) -> Option<Vec<C64>> {
    let n = x.len();
    let mut xs = vec![C64::default(); n];
    if !tangent(hom, x, t, w, 0) {
        return None;
    }
    for i in 0..n {
        xs[i] = x[i] + w.k[0][i] * (h / 2.0);
    }
    if !tangent(hom, &xs, t + h / 2.0, w, 1) {
        return None;
    }
    for i in 0..n {
        xs[i] = x[i] + w.k[1][i] * (h / 2.0);
    }
    if !tangent(hom, &xs, t + h / 2.0, w, 2) {
        return None;
    }
    for i in 0..n {
        xs[i] = x[i] + w.k[2][i] * h;
    }
    if !tangent(hom, &xs, t + h, w, 3) {
        return None;
    }
    for i in 0..n {
        xs[i] = x[i] + (w.k[0][i] + w.k[1][i] * 2.0 + w.k[2][i] * 2.0 + w.k[3][i]) * (h / 6.0);
    }
    Some(xs)
}

/// One Newton step at fixed `t`; returns the relative step size or `None`
/// when the Jacobian is numerically singular.
fn newton_step<H: Homotopy>(hom: &H, x: &mut [C64], t: f64, w: &mut TrackWork) -> Option<f64> {
    let n = x.len();
    w.eval(hom, x, t);
    w.lu.copy_from_slice(&w.hx);
    if !lu_factor(&mut w.lu, &mut w.perm, n) {
        return None;
    }
    let neg: Vec<C64> = w.h.iter().map(|v| -v).collect();
    let mut dx = std::mem::take(&mut w.tmp);
    lu_solve(&w.lu, &w.perm, n, &neg, &mut dx);
    let r = norm(&dx) / (1.0 + norm(x));
    for i in 0..n {
        x[i] += dx[i];
    }
    w.tmp = dx;
    r.is_finite().then_some(r)
}

fn correct<H: Homotopy>(
    hom: &H,
    x: &mut [C64],
    t: f64,
    iters: usize,
    w: &mut TrackWork,
) -> bool {
    let mut prev = f64::INFINITY;
    for k in 0..iters.max(2) {
        let Some(r) = newton_step(hom, x, t, w) else {
            return false;
        };
        if k == 0 && r > 0.1 {
            return false;
        }
        if r < TRACK_TOL {
            return true;
        }
        if k > 0 && r > 0.25 * prev {
            return false;
        }
        prev = r;
    }
    false
}

fn scaled_residual(w: &TrackWork) -> f64 {
    w.h.iter()
        .zip(&w.mags)
        .map(|(v, m)| v.norm() / (1.0 + m))
        .fold(0.0, f64::max)
}

fn condition(hx: &[C64], n: usize) -> f64 {
    let m = DMatrix::from_row_slice(n, n, hx);
    let sv = m.singular_values();
    let (mx, mn) = sv
        .iter()
        .fold((0.0f64, f64::INFINITY), |(a, b), &s| (a.max(s), b.min(s)));
    if mn > 0.0 {
        mx / mn
    } else {
        f64::INFINITY
    }
}

/// Newton-polishes a point at `t = 1` and classifies it.
fn finish<H: Homotopy>(
    hom: &H,
    mut x: Vec<C64>,
    settings: &TrackSettings,
    steps: usize,
    w: &mut TrackWork,
) -> PathResult {
    let n = x.len();
    let mut polished = false;
    let mut prev = f64::INFINITY;
    for _ in 0..12 {
        match newton_step(hom, &mut x, 1.0, w) {
            Some(r) if r <= settings.newton_tol => {
                polished = true;
                break;
            }
            Some(r) if r < prev || r < 1e-6 => prev = r,
            _ => break,
        }
    }
    if norm(&x) > DIVERGENCE_RADIUS || x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return PathResult {
            point: x,
            status: PathStatus::Diverged,
            residual: f64::INFINITY,
            cond: f64::INFINITY,
            steps,
        };
    }
    w.eval(hom, &x, 1.0);
    let residual = scaled_residual(w);
    let cond = condition(&w.hx, n);
    let status = if polished && cond < SINGULAR_COND && residual <= 10.0 * settings.newton_tol {
        PathStatus::Converged
    } else {
        PathStatus::SingularEndpoint
    };
    PathResult {
        point: x,
        status,
        residual,
        cond,
        steps,
    }
}

/// Tracks one path from `start` at `t = 0` to `t = 1`.
pub fn track<H: Homotopy>(
    hom: &H,
    start: &[C64],
    settings: &TrackSettings,
    w: &mut TrackWork,
) -> PathResult {
    let n = hom.dim();
    w.prepare(n);
    let mut x = start.to_vec();
    let mut t = 0.0f64;
    let mut step = settings.step_init;
    let mut successes = 0;
    let mut steps = 0;
    let fail = |x: Vec<C64>, status, steps| PathResult {
        point: x,
        status,
        residual: f64::INFINITY,
        cond: f64::INFINITY,
        steps,
    };
    while t < 1.0 {
        if steps >= settings.max_steps {
            return fail(x, PathStatus::Truncated, steps);
        }
        steps += 1;
        let h = step.min(1.0 - t);
        let t1 = if h >= 1.0 - t { 1.0 } else { t + h };
        let accepted = match rk4(hom, &x, t, t1 - t, w) {
            Some(mut xp) => {
                if correct(hom, &mut xp, t1, settings.max_newton_iters, w) {
                    x = xp;
                    true
                } else {
                    false
                }
            }
            None => false,
        };
        if accepted {
            t = t1;
            successes += 1;
            if successes >= 5 {
                step = (step * 2.0).min(settings.step_max);
                successes = 0;
            }
            if norm(&x) > DIVERGENCE_RADIUS {
                return fail(x, PathStatus::Diverged, steps);
            }
            if t < 1.0 && 1.0 - t < ENDGAME_JUMP {
                break;
            }
        } else {
            step /= 2.0;
            successes = 0;
            // Struggling this close to the end means a singular or
            // diverging endpoint; let the polisher decide which.
            if t >= 1.0 - settings.endgame_t && step < STALL_RATIO * (1.0 - t) {
                if norm(&x) > DIVERGENCE_RADIUS.sqrt() {
                    return fail(x, PathStatus::Diverged, steps);
                }
                break;
            }
            if step < settings.step_min {
                if t >= 1.0 - settings.endgame_t {
                    let big = norm(&x) > DIVERGENCE_RADIUS.sqrt();
                    let status = if big {
                        PathStatus::Diverged
                    } else {
                        PathStatus::SingularEndpoint
                    };
                    return fail(x, status, steps);
                }
                return fail(x, PathStatus::Truncated, steps);
            }
        }
    }
    finish(hom, x, settings, steps, w)
}

/// Newton-polishes `x` against `hom` at `t = 1` without tracking.
pub fn polish<H: Homotopy>(hom: &H, x: &[C64], settings: &TrackSettings) -> PathResult {
    let mut w = TrackWork::default();
    w.prepare(hom.dim());
    finish(hom, x.to_vec(), settings, 0, &mut w)
}

/// Scaled residual of `hom` at `(x, t)`.
pub fn residual_at<H: Homotopy>(hom: &H, x: &[C64], t: f64) -> f64 {
    let mut w = TrackWork::default();
    w.prepare(hom.dim());
    w.eval(hom, x, t);
    scaled_residual(&w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_solves_small_system() {
        let mut a = vec![
            C64::new(0.0, 0.0),
            C64::new(2.0, 1.0),
            C64::new(1.0, 0.0),
            C64::new(3.0, 0.0),
        ];
        let orig = a.clone();
        let mut perm = vec![0; 2];
        assert!(lu_factor(&mut a, &mut perm, 2));
        let b = [C64::new(1.0, 0.0), C64::new(2.0, -1.0)];
        let mut x = [C64::default(); 2];
        lu_solve(&a, &perm, 2, &b, &mut x);
        for i in 0..2 {
            let r = orig[i * 2] * x[0] + orig[i * 2 + 1] * x[1] - b[i];
            assert!(r.norm() < 1e-14);
        }
    }

    #[test]
    fn lu_detects_singular() {
        let mut a = vec![C64::new(1.0, 0.0), C64::new(2.0, 0.0), C64::new(2.0, 0.0), C64::new(4.0, 0.0)];
        let mut perm = vec![0; 2];
        assert!(!lu_factor(&mut a, &mut perm, 2));
    }
}
