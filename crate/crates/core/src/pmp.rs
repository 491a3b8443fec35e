//! Pontryagin-principle machinery: the Bolza objective, backward costate
//! propagation, functional and parameter gradients, and the plain
//! gradient-descent baseline.
//!
//! For a state initialized in |0⟩ the objective is
//!
//! ```text
//! J(u) = w_f (1 − |⟨m|ψ(T)⟩|²) + ∫_0^T [w_1 Σ P_penal + w_leak Σ P_leak] dt,
//! ```
//!
//! with the dynamics constraint dψ/dt = −i H_nh(t; u) ψ. The costate row
//! vector ⟨λ(t)| obeys
//!
//! ```text
//! d/dt ⟨λ| = i ⟨λ| H_nh − ∂L/∂|ψ⟩,     ⟨λ(T)| = −w_f ⟨ψ(T)|m⟩⟨m|,
//! ```
//!
//! i.e. the terminal condition is the Wirtinger derivative ∂φ/∂|ψ⟩ of the
//! terminal cost. Under this normalization the envelope gradient carries a
//! factor of two from the conjugate pair of variations:
//!
//! ```text
//! δJ/δΩ_ch(t) = 2 Im{⟨λ(t)| ∂H/∂Ω_ch |ψ(t)⟩},
//! ```
//!
//! which is the combination verified against central finite differences of
//! the discretized objective (the single source of truth for sign and
//! scale). Parameter gradients follow by the chain rule through the analytic
//! Gaussian derivatives and trapezoidal quadrature on the grid.
//!
//! The adjoint runs backward with RK4 using the same non-Hermitian generator
//! as the forward pass (not its conjugate transpose); forward states at RK4
//! substage times are linearly interpolated between stored nodes.

use num_complex::Complex;
use num_traits::Zero;

use crate::chain::{ChainSystem, SubspacePartition};
use crate::dynamics::{propagate, TimeGrid, Trajectory};
use crate::error::{Error, Result};
use crate::linalg::{vdot, CMatrix, CVector};
use crate::optimizer::{minimize_projected, TrustRegionConfig, TrustRegionState};
use crate::pulses::{Channel, GaussianParams, PARAM_COUNT};
use crate::scalar::Real;

/// Weights of the Bolza objective.
#[derive(Debug, Clone, PartialEq)]
pub struct CostWeights<R> {
    /// Terminal infidelity weight w_f (dimensionless).
    pub terminal: R,
    /// Intermediate-occupation weight w_1 (1/ns).
    pub intermediate: R,
    /// Leakage-occupation weight w_leak (1/ns).
    pub leakage: R,
    /// Levels charged with w_1; level 1 for the transmon chain.
    pub penalized_levels: Vec<usize>,
    /// Target/leakage split; its target level is the transfer target.
    pub partition: SubspacePartition,
}

impl<R: Real> CostWeights<R> {
    /// Standard transfer objective: penalize |1⟩ occupation and leakage.
    pub fn transfer(terminal: R, intermediate: R, leakage: R, partition: SubspacePartition) -> Self {
        Self { terminal, intermediate, leakage, penalized_levels: vec![1], partition }
    }

    pub fn validate(&self) -> Result<()> {
        for (label, w) in [
            ("terminal", self.terminal),
            ("intermediate", self.intermediate),
            ("leakage", self.leakage),
        ] {
            if w < R::zero() || !w.is_finite() {
                return Err(Error::InvalidWeights(format!(
                    "{label} weight must be non-negative, got {w}"
                )));
            }
        }
        for level in &self.penalized_levels {
            if *level >= self.partition.levels() {
                return Err(Error::InvalidWeights(format!(
                    "penalized level {level} outside dimension {}",
                    self.partition.levels()
                )));
            }
        }
        Ok(())
    }

    pub fn target_level(&self) -> usize {
        self.partition.target_level()
    }

    /// Diagonal of W = w_1 Σ Π_penal + w_leak Π_leak.
    pub fn weight_diagonal(&self) -> Vec<R> {
        let n = self.partition.levels();
        let mut w = vec![R::zero(); n];
        for level in &self.penalized_levels {
            w[*level] += self.intermediate;
        }
        for level in self.partition.leakage_levels() {
            w[level] += self.leakage;
        }
        w
    }

    /// Running-cost density L(ψ) = ⟨ψ|W|ψ⟩.
    pub fn running_density(&self, state: &[Complex<R>]) -> R {
        self.weight_diagonal()
            .iter()
            .zip(state)
            .fold(R::zero(), |acc, (w, z)| acc + *w * z.norm_sqr())
    }
}

/// Objective value and its decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveReport<R> {
    /// J = terminal + running.
    pub total: R,
    /// w_f (1 − fidelity).
    pub terminal: R,
    /// Trapezoidal value of the running-cost integral.
    pub running: R,
    /// |⟨m|ψ(T)⟩|².
    pub fidelity: R,
    /// max_t Σ_{n∈leak} P_n(t).
    pub max_leakage: R,
    /// Running-cost density at every node.
    pub running_density: Vec<R>,
}

/// Costate samples on the grid, stored as kets: `costates[k]` is the column
/// vector λ(t_k) whose conjugate transpose is the row ⟨λ(t_k)|.
#[derive(Debug, Clone, PartialEq)]
pub struct CostateTrajectory<R> {
    grid: TimeGrid<R>,
    costates: Vec<CVector<R>>,
}

impl<R: Real> CostateTrajectory<R> {
    pub fn grid(&self) -> &TimeGrid<R> {
        &self.grid
    }

    pub fn costate(&self, k: usize) -> &[Complex<R>] {
        &self.costates[k]
    }

    pub fn terminal(&self) -> &[Complex<R>] {
        self.costates.last().expect("costate trajectory has at least one node")
    }
}

/// Functional gradient samples δJ/δΩ_ch(t_k) for both channels.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalGradient<R> {
    pub pump: Vec<R>,
    pub stokes: Vec<R>,
}

/// Parameter gradient of J, with the intermediate functional gradients and
/// the objective evaluated on the same forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientReport<R> {
    /// ∂J/∂u in the order (A_p, A_s, t_{0p}, t_{0s}, σ_p, σ_s).
    pub gradient: [R; PARAM_COUNT],
    pub functional: FunctionalGradient<R>,
    pub objective: ObjectiveReport<R>,
}

impl<R: Real> GradientReport<R> {
    pub fn gradient_norm(&self) -> R {
        self.gradient.iter().fold(R::zero(), |acc, g| acc + *g * *g).sqrt()
    }
}

/// Assemble the objective from an existing forward trajectory.
pub fn objective_from_trajectory<R: Real>(
    trajectory: &Trajectory<R>,
    weights: &CostWeights<R>,
) -> ObjectiveReport<R> {
    let target = weights.target_level();
    let fidelity = trajectory.final_state()[target].norm_sqr();
    let running_density: Vec<R> =
        trajectory.states().iter().map(|s| weights.running_density(s)).collect();
    let running = trajectory.grid().trapezoid(&running_density);
    let terminal = weights.terminal * (R::one() - fidelity);
    let max_leakage = trajectory
        .states()
        .iter()
        .map(|s| weights.partition.leakage_weight(s))
        .fold(R::zero(), |a, b| a.max(b));
    ObjectiveReport {
        total: terminal + running,
        terminal,
        running,
        fidelity,
        max_leakage,
        running_density,
    }
}

/// Propagate and evaluate the Bolza objective.
pub fn objective<R: Real>(
    system: &ChainSystem<R>,
    params: &GaussianParams<R>,
    weights: &CostWeights<R>,
    grid: &TimeGrid<R>,
    initial: &[Complex<R>],
) -> Result<ObjectiveReport<R>> {
    weights.validate()?;
    let trajectory = propagate(system, params, grid, initial)?;
    Ok(objective_from_trajectory(&trajectory, weights))
}

/// Terminal costate for the infidelity cost φ = w_f (1 − |⟨m|ψ(T)⟩|²):
/// the ket whose bra is ⟨λ(T)| = −w_f ⟨ψ(T)|m⟩⟨m|.
pub fn terminal_costate<R: Real>(
    final_state: &[Complex<R>],
    terminal_weight: R,
    target_level: usize,
) -> CVector<R> {
    let mut lambda = vec![Complex::zero(); final_state.len()];
    lambda[target_level] = -final_state[target_level].scale(terminal_weight);
    lambda
}

/// Integrate the costate backward from its terminal condition with RK4 on
/// the same grid as the forward trajectory.
pub fn backward_costate<R: Real>(
    system: &ChainSystem<R>,
    params: &GaussianParams<R>,
    weights: &CostWeights<R>,
    grid: &TimeGrid<R>,
    trajectory: &Trajectory<R>,
) -> Result<CostateTrajectory<R>> {
    weights.validate()?;
    let steps = grid.steps();
    let h = grid.step_size();
    let half = R::of(0.5);
    let sixth = R::of(1.0 / 6.0);
    let two = R::of(2.0);
    let w_diag = weights.weight_diagonal();

    let h_nh = |t: R| -> CMatrix<R> {
        let values = crate::chain::ChannelValues::real(
            params.envelope(Channel::Pump, t),
            params.envelope(Channel::Stokes, t),
        );
        system.non_hermitian_hamiltonian(&values)
    };

    // ket form of d/dt⟨λ| = i⟨λ|H_nh − ⟨ψ|W:  dλ/dt = −i H_nh† λ − W ψ(t)
    let rhs = |hm: &CMatrix<R>, lambda: &[Complex<R>], psi: &[Complex<R>]| -> CVector<R> {
        let minus_i = Complex::new(R::zero(), -R::one());
        hm.adjoint_matvec(lambda)
            .into_iter()
            .zip(psi.iter().zip(&w_diag))
            .map(|(a, (p, w))| minus_i * a - p.scale(*w))
            .collect()
    };

    let mut costates = vec![CVector::new(); steps + 1];
    let mut lambda = terminal_costate(
        trajectory.final_state(),
        weights.terminal,
        weights.target_level(),
    );
    costates[steps] = lambda.clone();

    for k in (1..=steps).rev() {
        let t1 = grid.node(k);
        let t0 = t1 - h;
        let psi1 = trajectory.state(k);
        let psi0 = trajectory.state(k - 1);
        // forward state at the RK4 midpoint: linear interpolation of nodes
        let psi_mid: CVector<R> =
            psi0.iter().zip(psi1).map(|(a, b)| (*a + *b).scale(half)).collect();

        let hm1 = h_nh(t1);
        let hm_mid = h_nh(t1 - half * h);
        let hm0 = h_nh(t0);

        let k1 = rhs(&hm1, &lambda, psi1);
        let y2: CVector<R> =
            lambda.iter().zip(&k1).map(|(l, s)| *l - s.scale(half * h)).collect();
        let k2 = rhs(&hm_mid, &y2, &psi_mid);
        let y3: CVector<R> =
            lambda.iter().zip(&k2).map(|(l, s)| *l - s.scale(half * h)).collect();
        let k3 = rhs(&hm_mid, &y3, &psi_mid);
        let y4: CVector<R> = lambda.iter().zip(&k3).map(|(l, s)| *l - s.scale(h)).collect();
        let k4 = rhs(&hm0, &y4, psi0);

        for i in 0..lambda.len() {
            let incr = k1[i] + k2[i].scale(two) + k3[i].scale(two) + k4[i];
            lambda[i] -= incr.scale(sixth * h);
        }
        if !lambda.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Divergence { node: k - 1 });
        }
        costates[k - 1] = lambda.clone();
    }
    Ok(CostateTrajectory { grid: *grid, costates })
}

/// Sampled functional gradients δJ/δΩ_p(t_k), δJ/δΩ_s(t_k).
pub fn functional_gradient<R: Real>(
    system: &ChainSystem<R>,
    trajectory: &Trajectory<R>,
    costate: &CostateTrajectory<R>,
) -> FunctionalGradient<R> {
    let two = R::of(2.0);
    let mut out = FunctionalGradient { pump: Vec::new(), stokes: Vec::new() };
    for channel in Channel::BOTH {
        let dh = system.denv_hamiltonian(channel);
        let samples: Vec<R> = trajectory
            .states()
            .iter()
            .zip(&costate.costates)
            .map(|(psi, lam)| two * vdot(lam, &dh.matvec(psi)).im)
            .collect();
        match channel {
            Channel::Pump => out.pump = samples,
            Channel::Stokes => out.stokes = samples,
        }
    }
    out
}

/// Full adjoint gradient of J with respect to the six pulse parameters:
/// forward propagation, backward costate, functional gradient, then the
/// chain rule through the analytic Gaussian derivatives.
pub fn parameter_gradient<R: Real>(
    system: &ChainSystem<R>,
    params: &GaussianParams<R>,
    weights: &CostWeights<R>,
    grid: &TimeGrid<R>,
    initial: &[Complex<R>],
) -> Result<GradientReport<R>> {
    weights.validate()?;
    let trajectory = propagate(system, params, grid, initial)?;
    let costate = backward_costate(system, params, weights, grid, &trajectory)?;
    let functional = functional_gradient(system, &trajectory, &costate);
    let objective = objective_from_trajectory(&trajectory, weights);

    let nodes = grid.node_count();
    let mut integrands: [Vec<R>; PARAM_COUNT] =
        std::array::from_fn(|_| Vec::with_capacity(nodes));
    for k in 0..nodes {
        let t = grid.node(k);
        let dp = params.envelope_derivatives(Channel::Pump, t);
        let ds = params.envelope_derivatives(Channel::Stokes, t);
        let gp = functional.pump[k];
        let gs = functional.stokes[k];
        integrands[0].push(gp * dp.amp);
        integrands[1].push(gs * ds.amp);
        integrands[2].push(gp * dp.center);
        integrands[3].push(gs * ds.center);
        integrands[4].push(gp * dp.width);
        integrands[5].push(gs * ds.width);
    }
    let gradient = std::array::from_fn(|i| grid.trapezoid(&integrands[i]));
    Ok(GradientReport { gradient, functional, objective })
}

/// The real Pontryagin Hamiltonian Im{⟨λ|H|ψ⟩} − L; diagnostic only.
pub fn pontryagin_hamiltonian<R: Real>(
    state: &[Complex<R>],
    costate: &[Complex<R>],
    hamiltonian: &CMatrix<R>,
    running_cost: R,
) -> R {
    vdot(costate, &hamiltonian.matvec(state)).im - running_cost
}

/// Settings for the gradient-descent baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentConfig<R> {
    /// Initial step size η (units of 1/gradient).
    pub step: R,
    /// Smallest step size tried before declaring divergence.
    pub min_step: R,
    /// Stop when the parameter update norm falls below this.
    pub tolerance: R,
    pub max_iterations: usize,
}

impl<R: Real> Default for DescentConfig<R> {
    fn default() -> Self {
        Self {
            step: R::of(0.1),
            min_step: R::of(1e-8),
            tolerance: R::of(1e-7),
            max_iterations: 200,
        }
    }
}

/// One line of the descent log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentRecord<R> {
    pub iteration: usize,
    pub objective: R,
    pub gradient_norm: R,
    pub step: R,
    pub update_norm: R,
    pub moved: bool,
}

/// Iterative first-order update u ← u − η ∇J(u), projected onto the pulse
/// bounds, with the step size halved whenever a trial increases J.
/// Stops when the update norm drops below the tolerance or the iteration
/// budget is exhausted.
pub fn gradient_descent<R: Real>(
    system: &ChainSystem<R>,
    params0: &GaussianParams<R>,
    weights: &CostWeights<R>,
    grid: &TimeGrid<R>,
    initial: &[Complex<R>],
    config: &DescentConfig<R>,
) -> Result<(GaussianParams<R>, Vec<DescentRecord<R>>)> {
    if !(config.step > R::zero()) {
        return Err(Error::InvalidOptimizerConfig(format!(
            "descent step must be positive, got {}",
            config.step
        )));
    }
    let mut params = *params0;
    let mut eta = config.step;
    let mut log = Vec::new();
    let mut stalled = 0_usize;

    for iteration in 0..config.max_iterations {
        let report = parameter_gradient(system, &params, weights, grid, initial)?;
        let j_current = report.objective.total;
        let grad = report.gradient;
        let grad_norm = report.gradient_norm();

        let projected_trial = |eta: R| {
            let u = params.to_array();
            let trial = GaussianParams::from_array(std::array::from_fn(|i| u[i] - eta * grad[i]))
                .project_bounds(grid.t_final());
            let tu = trial.to_array();
            let norm = (0..PARAM_COUNT)
                .fold(R::zero(), |acc, i| acc + (tu[i] - u[i]) * (tu[i] - u[i]))
                .sqrt();
            (trial, norm)
        };

        // shrink the step until the projected move stops increasing J
        let mut moved = false;
        let mut update_norm;
        loop {
            let (trial, norm) = projected_trial(eta);
            update_norm = norm;
            if update_norm.is_zero() {
                break;
            }
            let j_trial = objective(system, &trial, weights, grid, initial)?.total;
            if j_trial < j_current {
                params = trial;
                moved = true;
                break;
            }
            if eta <= config.min_step {
                break;
            }
            eta = (eta * R::of(0.5)).max(config.min_step);
        }

        log.push(DescentRecord {
            iteration,
            objective: j_current,
            gradient_norm: grad_norm,
            step: eta,
            update_norm,
            moved,
        });

        if moved {
            stalled = 0;
        } else if update_norm > R::zero() {
            stalled += 1;
            if stalled >= 10 {
                return Err(Error::StepSizeExhausted { count: stalled });
            }
        }
        if update_norm < config.tolerance {
            break;
        }
    }
    Ok((params, log))
}

/// Trust-region minimization of J over the six pulse parameters.
///
/// The search runs in scaled coordinates — amplitudes as-is (rad/ns), times
/// and widths in units of T — so a single trust radius is meaningful across
/// the heterogeneous units. Trial points are projected onto the pulse bounds
/// before evaluation.
pub fn trust_region_optimize<R: Real>(
    system: &ChainSystem<R>,
    params0: &GaussianParams<R>,
    weights: &CostWeights<R>,
    grid: &TimeGrid<R>,
    initial: &[Complex<R>],
    config: &TrustRegionConfig<R>,
) -> Result<(GaussianParams<R>, TrustRegionState<R>)> {
    weights.validate()?;
    let t_final = grid.t_final();
    let scale = [R::one(), R::one(), t_final, t_final, t_final, t_final];
    let to_params =
        |x: &[R]| GaussianParams::from_array(std::array::from_fn(|i| x[i] * scale[i]));

    let objective = |x: &[R]| -> Option<(R, Vec<R>)> {
        let params = to_params(x);
        parameter_gradient(system, &params, weights, grid, initial).ok().map(|report| {
            let scaled_grad = report.gradient.iter().zip(&scale).map(|(g, s)| *g * *s).collect();
            (report.objective.total, scaled_grad)
        })
    };
    let project = |x: &mut [R]| {
        let projected = to_params(x).project_bounds(t_final).to_array();
        for (xi, (p, s)) in x.iter_mut().zip(projected.iter().zip(&scale)) {
            *xi = *p / *s;
        }
    };
    let x0: Vec<R> =
        params0.to_array().iter().zip(&scale).map(|(u, s)| *u / *s).collect();
    let state = minimize_projected(objective, project, &x0, config)?;
    Ok((to_params(&state.position), state))
}
