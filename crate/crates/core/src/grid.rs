//! Uniform time grid on `[0, T]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Uniform grid with `steps + 1` nodes `t_k = k·T/steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid<R> {
    t_final: R,
    steps: usize,
}

impl<R: Real> TimeGrid<R> {
    pub fn new(t_final: R, steps: usize) -> Result<Self> {
        if !(t_final > R::zero()) || !t_final.is_finite() {
            return Err(Error::InvalidGrid(format!("final time must be positive, got {t_final}")));
        }
        if steps < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 steps, got {steps}")));
        }
        Ok(Self { t_final, steps })
    }

    /// Grid sized so that `h ≤ min_width/50` and `h·h_norm ≤ stage_bound`.
    ///
    /// `h_norm` should bound the Hamiltonian magnitude (rad/ns) over the run;
    /// `stage_bound` trades cost for accuracy (0.05 is adequate for
    /// population dynamics, ~0.002 for gradient verification work).
    pub fn with_resolution(t_final: R, min_width: R, h_norm: R, stage_bound: R) -> Result<Self> {
        let h1 = min_width / R::of(50.0);
        let h2 = if h_norm > R::zero() { stage_bound / h_norm } else { h1 };
        let h = h1.min(h2);
        let steps = (t_final / h).ceil().to_usize().unwrap_or(2).max(2);
        Self::new(t_final, steps)
    }

    pub fn t_final(&self) -> R {
        self.t_final
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn node_count(&self) -> usize {
        self.steps + 1
    }

    pub fn step_size(&self) -> R {
        self.t_final / R::of(self.steps as f64)
    }

    pub fn node(&self, k: usize) -> R {
        debug_assert!(k <= self.steps);
        R::of(k as f64) * self.step_size()
    }

    /// Composite trapezoidal quadrature of nodal samples.
    pub fn trapezoid(&self, samples: &[R]) -> R {
        debug_assert_eq!(samples.len(), self.node_count());
        let h = self.step_size();
        let half = R::of(0.5);
        let mut acc = half * (samples[0] + samples[self.steps]);
        for s in &samples[1..self.steps] {
            acc += *s;
        }
        acc * h
    }
}
