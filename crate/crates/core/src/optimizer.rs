//! Trust-region minimization with BFGS curvature and a dogleg subproblem
//! solver.
//!
//! Each iteration minimizes the local quadratic model
//! `m(p) = f + gᵀp + ½ pᵀBp` over `‖p‖ ≤ Δ` along the dogleg path (Newton
//! step if it fits, otherwise the steepest-descent/Newton polyline clipped
//! to the boundary). Steps are accepted when the actual-to-predicted
//! decrease ratio ρ exceeds the acceptance threshold; the radius shrinks by
//! 4 when ρ < 1/4 and doubles (up to the cap) after boundary steps with
//! ρ > 3/4. Curvature is maintained by the BFGS update, skipped whenever
//! the curvature condition yᵀs > 0 fails numerically, which keeps B
//! positive definite.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Relative threshold on yᵀs below which the BFGS update is skipped.
const CURVATURE_RTOL: f64 = 1e-10;

/// Radius below which the minimization halts.
const RADIUS_FLOOR: f64 = 1e-12;

/// Dense symmetric real matrix (full storage).
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix<R> {
    dim: usize,
    data: Vec<R>,
}

impl<R: Real> SymMatrix<R> {
    pub fn identity(dim: usize) -> Self {
        let mut m = Self { dim, data: vec![R::zero(); dim * dim] };
        for i in 0..dim {
            m.data[i * dim + i] = R::one();
        }
        m
    }

    pub fn scaled_identity(dim: usize, value: R) -> Self {
        let mut m = Self { dim, data: vec![R::zero(); dim * dim] };
        for i in 0..dim {
            m.data[i * dim + i] = value;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> R {
        self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: R) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    pub fn matvec(&self, x: &[R]) -> Vec<R> {
        (0..self.dim)
            .map(|i| {
                self.data[i * self.dim..(i + 1) * self.dim]
                    .iter()
                    .zip(x)
                    .fold(R::zero(), |acc, (a, b)| acc + *a * *b)
            })
            .collect()
    }

    pub fn quad_form(&self, x: &[R]) -> R {
        dot(&self.matvec(x), x)
    }

    /// Largest asymmetry |B_ij − B_ji|.
    pub fn symmetry_defect(&self) -> R {
        let mut worst = R::zero();
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Lower Cholesky factor; `None` when the matrix is not positive
    /// definite.
    pub fn cholesky(&self) -> Option<Vec<R>> {
        let n = self.dim;
        let mut l = vec![R::zero(); n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = self.get(i, j);
                for k in 0..j {
                    sum -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if !(sum > R::zero()) {
                        return None;
                    }
                    l[i * n + i] = sum.sqrt();
                } else {
                    l[i * n + j] = sum / l[j * n + j];
                }
            }
        }
        Some(l)
    }

    /// Solve `B x = rhs` through the Cholesky factorization.
    pub fn solve(&self, rhs: &[R]) -> Result<Vec<R>> {
        let l = self.cholesky().ok_or(Error::NotPositiveDefinite)?;
        let n = self.dim;
        let mut y = vec![R::zero(); n];
        for i in 0..n {
            let mut sum = rhs[i];
            for k in 0..i {
                sum -= l[i * n + k] * y[k];
            }
            y[i] = sum / l[i * n + i];
        }
        let mut x = vec![R::zero(); n];
        for i in (0..n).rev() {
            let mut sum = y[i];
            for k in (i + 1)..n {
                sum -= l[k * n + i] * x[k];
            }
            x[i] = sum / l[i * n + i];
        }
        Ok(x)
    }
}

fn dot<R: Real>(a: &[R], b: &[R]) -> R {
    a.iter().zip(b).fold(R::zero(), |acc, (x, y)| acc + *x * *y)
}

fn norm<R: Real>(a: &[R]) -> R {
    dot(a, a).sqrt()
}

/// Local quadratic model `m(p) = f + gᵀp + ½ pᵀBp`.
pub fn quadratic_model<R: Real>(f: R, g: &[R], b: &SymMatrix<R>, p: &[R]) -> R {
    f + dot(g, p) + R::of(0.5) * b.quad_form(p)
}

/// BFGS update `B − (Bs)(Bs)ᵀ/(sᵀBs) + yyᵀ/(yᵀs)`, or `None` when the
/// curvature condition fails and the update must be skipped. The result
/// satisfies the secant condition `B' s = y`.
pub fn bfgs_update<R: Real>(b: &SymMatrix<R>, s: &[R], y: &[R]) -> Option<SymMatrix<R>> {
    let ys = dot(y, s);
    if ys <= R::of(CURVATURE_RTOL) * norm(y) * norm(s) {
        return None;
    }
    let bs = b.matvec(s);
    let sbs = dot(&bs, s);
    if !(sbs > R::zero()) {
        return None;
    }
    let n = b.dim();
    let mut out = b.clone();
    for i in 0..n {
        for j in 0..=i {
            let v = out.get(i, j) - bs[i] * bs[j] / sbs + y[i] * y[j] / ys;
            out.set(i, j, v);
        }
    }
    Some(out)
}

/// Positive root in (0, 1) of the boundary equation
/// `‖p_U + τ (p_N − p_U)‖² = Δ²` for the second dogleg segment.
pub fn dogleg_tau<R: Real>(p_u: &[R], p_n: &[R], delta: R) -> R {
    let d: Vec<R> = p_n.iter().zip(p_u).map(|(n, u)| *n - *u).collect();
    let a = dot(&d, &d);
    let b = R::of(2.0) * dot(p_u, &d);
    let c = dot(p_u, p_u) - delta * delta;
    let disc = (b * b - R::of(4.0) * a * c).max(R::zero()).sqrt();
    (-b + disc) / (R::of(2.0) * a)
}

/// Dogleg solution of the trust-region subproblem for positive-definite B:
/// the Newton step when it fits, otherwise the boundary point along either
/// the steepest-descent direction or the second dogleg segment.
pub fn dogleg_step<R: Real>(g: &[R], b: &SymMatrix<R>, delta: R) -> Result<Vec<R>> {
    let g_norm = norm(g);
    if g_norm.is_zero() {
        return Ok(vec![R::zero(); g.len()]);
    }
    let p_newton: Vec<R> = b.solve(g)?.into_iter().map(|v| -v).collect();
    if norm(&p_newton) <= delta {
        return Ok(p_newton);
    }
    let gbg = b.quad_form(g);
    let p_cauchy: Vec<R> = g.iter().map(|gi| -(g_norm * g_norm / gbg) * *gi).collect();
    if norm(&p_cauchy) >= delta {
        return Ok(g.iter().map(|gi| -delta * *gi / g_norm).collect());
    }
    let tau = dogleg_tau(&p_cauchy, &p_newton, delta);
    Ok(p_cauchy
        .iter()
        .zip(&p_newton)
        .map(|(u, n)| *u + tau * (*n - *u))
        .collect())
}

/// Actual-to-predicted decrease ratio ρ = (f_old − f_new)/model_decrease.
pub fn rho_ratio<R: Real>(f_old: R, f_new: R, model_decrease: R) -> Result<R> {
    if model_decrease <= R::of(1e-16) {
        return Err(Error::DegenerateModel(model_decrease.to_f64().unwrap_or(f64::NAN)));
    }
    Ok((f_old - f_new) / model_decrease)
}

/// Radius update: shrink by 4 when ρ < 1/4, double (capped) after a full-
/// length step with ρ > 3/4, otherwise keep.
pub fn radius_update<R: Real>(rho: R, delta: R, step_norm: R, max_radius: R) -> R {
    let quarter = R::of(0.25);
    if rho < quarter {
        delta * quarter
    } else if rho > R::of(0.75) && (step_norm - delta).abs() <= R::of(1e-12) * delta {
        (delta + delta).min(max_radius)
    } else {
        delta
    }
}

/// Trust-region hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrustRegionConfig<R> {
    /// Initial radius Δ_0.
    pub initial_radius: R,
    /// Radius cap Δ̂.
    pub max_radius: R,
    /// Acceptance threshold η ∈ (0, 1).
    pub acceptance: R,
    /// Stop when ‖g‖ falls below this.
    pub gradient_tolerance: R,
    pub max_iterations: usize,
    /// Diagonal value of B_0.
    pub initial_curvature: R,
}

impl<R: Real> Default for TrustRegionConfig<R> {
    fn default() -> Self {
        Self {
            initial_radius: R::of(0.1),
            max_radius: R::of(1.0),
            acceptance: R::of(0.1),
            gradient_tolerance: R::of(1e-8),
            max_iterations: 200,
            initial_curvature: R::one(),
        }
    }
}

impl<R: Real> TrustRegionConfig<R> {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial_radius > R::zero() && self.initial_radius <= self.max_radius) {
            return Err(Error::InvalidOptimizerConfig(format!(
                "need 0 < Δ_0 ≤ Δ̂, got Δ_0 = {}, Δ̂ = {}",
                self.initial_radius, self.max_radius
            )));
        }
        if !(self.acceptance > R::zero() && self.acceptance < R::one()) {
            return Err(Error::InvalidOptimizerConfig(format!(
                "acceptance threshold must lie in (0, 1), got {}",
                self.acceptance
            )));
        }
        if !(self.initial_curvature > R::zero()) {
            return Err(Error::InvalidOptimizerConfig("initial curvature must be positive".into()));
        }
        Ok(())
    }
}

/// One attempted trust-region step.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord<R> {
    pub iteration: usize,
    pub objective: R,
    pub gradient_norm: R,
    pub radius: R,
    /// `None` when the trial evaluation failed or the model was degenerate.
    pub rho: Option<R>,
    pub step_norm: R,
    pub accepted: bool,
    pub position: Vec<R>,
}

/// Why the loop stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    GradientTolerance,
    RadiusCollapsed,
    MaxIterations,
}

/// Final iterate with its model state and the per-iteration history.
#[derive(Debug, Clone, PartialEq)]
pub struct TrustRegionState<R> {
    pub position: Vec<R>,
    pub objective: R,
    pub gradient: Vec<R>,
    pub matrix: SymMatrix<R>,
    pub radius: R,
    pub iterations: usize,
    pub history: Vec<IterationRecord<R>>,
    pub termination: Termination,
}

/// Minimize `f` from `x0`. The objective returns `(f, ∇f)` or `None` on
/// evaluation failure, which is treated as a rejected step.
pub fn minimize<R, F>(objective: F, x0: &[R], config: &TrustRegionConfig<R>) -> Result<TrustRegionState<R>>
where
    R: Real,
    F: FnMut(&[R]) -> Option<(R, Vec<R>)>,
{
    minimize_projected(objective, |_| {}, x0, config)
}

/// [`minimize`] with a feasibility projection applied to every trial point
/// before evaluation; the projected displacement is what enters the model
/// decrease, the acceptance test, and the BFGS secant pair.
pub fn minimize_projected<R, F, P>(
    mut objective: F,
    project: P,
    x0: &[R],
    config: &TrustRegionConfig<R>,
) -> Result<TrustRegionState<R>>
where
    R: Real,
    F: FnMut(&[R]) -> Option<(R, Vec<R>)>,
    P: Fn(&mut [R]),
{
    config.validate()?;
    let n = x0.len();
    let mut x = x0.to_vec();
    project(&mut x);
    let (mut fx, mut g) = objective(&x).ok_or(Error::ObjectiveEvaluation)?;
    let mut b = SymMatrix::scaled_identity(n, config.initial_curvature);
    let mut delta = config.initial_radius;
    let mut history = Vec::new();
    let mut iterations = 0;

    let termination = loop {
        if norm(&g) < config.gradient_tolerance {
            break Termination::GradientTolerance;
        }
        if delta < R::of(RADIUS_FLOOR) {
            break Termination::RadiusCollapsed;
        }
        if iterations >= config.max_iterations {
            break Termination::MaxIterations;
        }
        iterations += 1;

        let p = dogleg_step(&g, &b, delta)?;
        let mut x_trial: Vec<R> = x.iter().zip(&p).map(|(xi, pi)| *xi + *pi).collect();
        project(&mut x_trial);
        let step: Vec<R> = x_trial.iter().zip(&x).map(|(t, xi)| *t - *xi).collect();
        let step_norm = norm(&step);

        let model_decrease = -(dot(&g, &step) + R::of(0.5) * b.quad_form(&step));
        let trial = objective(&x_trial);
        let rho = match (&trial, rho_is_defined(model_decrease)) {
            (Some((f_new, _)), true) => Some((fx - *f_new) / model_decrease),
            _ => None,
        };
        // failed evaluations and degenerate models reject the step outright
        let rho_effective = rho.unwrap_or(-R::infinity());
        let accepted = rho_effective > config.acceptance;

        delta = radius_update(rho_effective, delta, step_norm, config.max_radius);
        if accepted {
            let (f_new, g_new) = trial.expect("accepted step has an evaluation");
            let y: Vec<R> = g_new.iter().zip(&g).map(|(a, o)| *a - *o).collect();
            if let Some(updated) = bfgs_update(&b, &step, &y) {
                b = updated;
                debug_assert!(b.cholesky().is_some(), "BFGS update lost positive definiteness");
            }
            x = x_trial;
            fx = f_new;
            g = g_new;
        }
        history.push(IterationRecord {
            iteration: iterations,
            objective: fx,
            gradient_norm: norm(&g),
            radius: delta,
            rho,
            step_norm,
            accepted,
            position: x.clone(),
        });
    };

    Ok(TrustRegionState {
        position: x,
        objective: fx,
        gradient: g,
        matrix: b,
        radius: delta,
        iterations,
        history,
        termination,
    })
}

fn rho_is_defined<R: Real>(model_decrease: R) -> bool {
    model_decrease > R::of(1e-16)
}
