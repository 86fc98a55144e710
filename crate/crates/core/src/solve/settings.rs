use serde::{Deserialize, Serialize};

use crate::error::SolveError;

/// Path-tracking parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrackSettings {
    pub step_init: f64,
    pub step_min: f64,
    pub step_max: f64,
    /// Relative Newton step size at which an endpoint counts as polished.
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    /// Width of the final stretch `[1 - endgame_t, 1]` in which a collapsing
    /// step marks a singular endpoint instead of a failed path.
    pub endgame_t: f64,
    /// Largest imaginary part tolerated by the real filter.
    pub real_tol: f64,
    pub dedup_tol: f64,
    pub max_steps: usize,
    /// Largest number of total-degree paths a single solve may launch.
    pub max_paths: u64,
    pub rng_seed: u64,
}

impl Default for TrackSettings {
    fn default() -> Self {
        Self {
            step_init: 0.05,
            step_min: 1e-12,
            step_max: 0.1,
            newton_tol: 1e-10,
            max_newton_iters: 3,
            endgame_t: 0.1,
            real_tol: 1e-8,
            dedup_tol: 1e-6,
            max_steps: 20_000,
            max_paths: 1_000_000,
            rng_seed: 0,
        }
    }
}

impl TrackSettings {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            rng_seed: seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        let bad = |m: &str| Err(SolveError::InvalidSettings(m.to_string()));
        let positive = [
            self.step_init,
            self.step_min,
            self.step_max,
            self.newton_tol,
            self.real_tol,
            self.dedup_tol,
        ];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return bad("step sizes and tolerances must be positive and finite");
        }
        if !(self.step_min <= self.step_init && self.step_init <= self.step_max) {
            return bad("require step_min <= step_init <= step_max");
        }
        if !(self.endgame_t > 0.0 && self.endgame_t <= 0.2) {
            return bad("endgame_t must lie in (0, 0.2]");
        }
        if self.max_newton_iters == 0 || self.max_steps == 0 {
            return bad("iteration limits must be positive");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        TrackSettings::default().validate().unwrap();
    }

    #[test]
    fn rejects_inverted_steps() {
        let s = TrackSettings {
            step_min: 0.5,
            ..TrackSettings::default()
        };
        assert!(s.validate().is_err());
        let s = TrackSettings {
            endgame_t: 0.5,
            ..TrackSettings::default()
        };
        assert!(s.validate().is_err());
    }
}
