//! Forward propagation of the (generally non-Hermitian) Schrödinger equation
//! `dψ/dt = −i H_nh(t) ψ` (ħ = 1) and population diagnostics.
//!
//! The workhorse integrator is fixed-step classical RK4 with the Hamiltonian
//! evaluated at the substage times. A piecewise-constant midpoint
//! matrix-exponential propagator is provided as an independent cross-check.

use num_complex::Complex;
use num_traits::Zero;

use crate::chain::{ChainSystem, ChannelValues, SubspacePartition};
use crate::error::{Error, Result};
use crate::linalg::{expm, vec_norm, CMatrix, CVector};
use crate::pulses::{Channel, GaussianParams};
use crate::scalar::Real;

pub use crate::grid::TimeGrid;

/// Complex state vectors sampled on every node of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<R> {
    grid: TimeGrid<R>,
    states: Vec<CVector<R>>,
}

impl<R: Real> Trajectory<R> {
    pub fn grid(&self) -> &TimeGrid<R> {
        &self.grid
    }

    pub fn state(&self, k: usize) -> &[Complex<R>] {
        &self.states[k]
    }

    pub fn states(&self) -> &[CVector<R>] {
        &self.states
    }

    pub fn final_state(&self) -> &[Complex<R>] {
        self.states.last().expect("trajectory has at least one node")
    }

    pub fn dimension(&self) -> usize {
        self.states[0].len()
    }

    /// Population |⟨n|ψ(t_k)⟩|² (unnormalized weight under dissipation).
    pub fn population(&self, k: usize, level: usize) -> R {
        self.states[k][level].norm_sqr()
    }

    pub fn norms(&self) -> Vec<R> {
        self.states.iter().map(|s| vec_norm(s)).collect()
    }
}

/// Per-level populations, leakage series, and terminal fidelity.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationRecord<R> {
    /// `populations[k][n]` = P_n(t_k).
    pub populations: Vec<Vec<R>>,
    /// Σ_{n∈leak} P_n(t_k).
    pub leakage: Vec<R>,
    pub max_leakage: R,
    /// |⟨m|ψ(T)⟩|² for the partition's target level m.
    pub final_fidelity: R,
}

fn check_finite<R: Real>(state: &[Complex<R>], node: usize) -> Result<()> {
    if state.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Divergence { node })
    }
}

/// Integrate `dψ/dt = −i H(t) ψ` with classical RK4 at fixed step,
/// for an arbitrary matrix-valued `H(t)`.
pub fn integrate_rk4<R: Real>(
    hamiltonian: impl Fn(R) -> CMatrix<R>,
    grid: &TimeGrid<R>,
    initial: &[Complex<R>],
) -> Result<Trajectory<R>> {
    let h = grid.step_size();
    let half = R::of(0.5);
    let sixth = R::of(1.0 / 6.0);
    let minus_i = Complex::new(R::zero(), -R::one());

    let rhs = |hm: &CMatrix<R>, psi: &[Complex<R>]| -> CVector<R> {
        hm.matvec(psi).into_iter().map(|z| minus_i * z).collect()
    };

    let mut states = Vec::with_capacity(grid.node_count());
    states.push(initial.to_vec());
    let mut psi = initial.to_vec();
    for k in 0..grid.steps() {
        let t = grid.node(k);
        let h0 = hamiltonian(t);
        let hm = hamiltonian(t + half * h);
        let h1 = hamiltonian(t + h);

        let k1 = rhs(&h0, &psi);
        let y2: CVector<R> = stage(&psi, &k1, half * h);
        let k2 = rhs(&hm, &y2);
        let y3: CVector<R> = stage(&psi, &k2, half * h);
        let k3 = rhs(&hm, &y3);
        let y4: CVector<R> = stage(&psi, &k3, h);
        let k4 = rhs(&h1, &y4);

        let two = R::of(2.0);
        for i in 0..psi.len() {
            let incr = k1[i] + k2[i].scale(two) + k3[i].scale(two) + k4[i];
            psi[i] += incr.scale(sixth * h);
        }
        check_finite(&psi, k + 1)?;
        states.push(psi.clone());
    }
    Ok(Trajectory { grid: *grid, states })
}

fn stage<R: Real>(base: &[Complex<R>], slope: &[Complex<R>], factor: R) -> CVector<R> {
    base.iter().zip(slope).map(|(b, s)| *b + s.scale(factor)).collect()
}

/// Piecewise-constant midpoint propagation
/// `ψ_{k+1} = exp(−i h H(t_k + h/2)) ψ_k` via dense matrix exponential.
/// Verification propagator; exact for time-independent generators.
pub fn integrate_expm_midpoint<R: Real>(
    hamiltonian: impl Fn(R) -> CMatrix<R>,
    grid: &TimeGrid<R>,
    initial: &[Complex<R>],
) -> Result<Trajectory<R>> {
    let h = grid.step_size();
    let half = R::of(0.5);
    let mut states = Vec::with_capacity(grid.node_count());
    states.push(initial.to_vec());
    let mut psi = initial.to_vec();
    for k in 0..grid.steps() {
        let t_mid = grid.node(k) + half * h;
        let generator = hamiltonian(t_mid).scale(Complex::new(R::zero(), -h));
        psi = expm(&generator).matvec(&psi);
        check_finite(&psi, k + 1)?;
        states.push(psi.clone());
    }
    Ok(Trajectory { grid: *grid, states })
}

fn driven_hamiltonian<'a, R: Real>(
    system: &'a ChainSystem<R>,
    params: &'a GaussianParams<R>,
) -> impl Fn(R) -> CMatrix<R> + 'a {
    |t| {
        let values = ChannelValues::real(
            params.envelope(Channel::Pump, t),
            params.envelope(Channel::Stokes, t),
        );
        system.non_hermitian_hamiltonian(&values)
    }
}

/// RK4 propagation of the driven chain from the given initial state.
pub fn propagate<R: Real>(
    system: &ChainSystem<R>,
    params: &GaussianParams<R>,
    grid: &TimeGrid<R>,
    initial: &[Complex<R>],
) -> Result<Trajectory<R>> {
    integrate_rk4(driven_hamiltonian(system, params), grid, initial)
}

/// Midpoint matrix-exponential propagation of the driven chain; independent
/// of the RK4 path and used to cross-check it.
pub fn propagate_oracle<R: Real>(
    system: &ChainSystem<R>,
    params: &GaussianParams<R>,
    grid: &TimeGrid<R>,
    initial: &[Complex<R>],
) -> Result<Trajectory<R>> {
    integrate_expm_midpoint(driven_hamiltonian(system, params), grid, initial)
}

/// Basis state |n⟩ of the given dimension.
pub fn basis_state<R: Real>(dimension: usize, level: usize) -> CVector<R> {
    let mut v = vec![Complex::zero(); dimension];
    v[level] = Complex::new(R::one(), R::zero());
    v
}

/// Extract level populations, the leakage series, its maximum, and the
/// terminal fidelity onto the partition's target level.
pub fn populations<R: Real>(
    trajectory: &Trajectory<R>,
    partition: &SubspacePartition,
) -> PopulationRecord<R> {
    let n = trajectory.dimension();
    let mut populations = Vec::with_capacity(trajectory.states().len());
    let mut leakage = Vec::with_capacity(trajectory.states().len());
    let mut max_leakage = R::zero();
    for state in trajectory.states() {
        let p: Vec<R> = (0..n).map(|lvl| state[lvl].norm_sqr()).collect();
        let leak = partition.leakage_levels().fold(R::zero(), |acc, lvl| acc + p[lvl]);
        max_leakage = max_leakage.max(leak);
        populations.push(p);
        leakage.push(leak);
    }
    let final_fidelity = trajectory.final_state()[partition.target_level()].norm_sqr();
    PopulationRecord { populations, leakage, max_leakage, final_fidelity }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{Decay, Link};
    use crate::pulses::GaussianPulse;
    use approx::assert_relative_eq;

    type C64 = Complex<f64>;

    fn flat_params(a_p: f64, a_s: f64) -> GaussianParams<f64> {
        // near-constant envelopes over any window of interest
        GaussianParams {
            pump: GaussianPulse { amp: a_p, center: 0.0, width: 1e9 },
            stokes: GaussianPulse { amp: a_s, center: 0.0, width: 1e9 },
        }
    }

    fn stirap_params(a: f64, sep: f64) -> GaussianParams<f64> {
        GaussianParams {
            pump: GaussianPulse { amp: a, center: 40.0 + sep / 2.0, width: 10.0 },
            stokes: GaussianPulse { amp: a, center: 40.0 - sep / 2.0, width: 10.0 },
        }
    }

    fn three_level() -> ChainSystem<f64> {
        ChainSystem::new(
            vec![0.0, 0.0, 0.0],
            vec![
                Link { lower: 0, channel: Channel::Pump, scale: 1.0, phase: 0.0 },
                Link { lower: 1, channel: Channel::Stokes, scale: 1.0, phase: 0.0 },
            ],
            vec![],
        )
        .unwrap()
    }

    fn five_level_reference(gammas: [f64; 5]) -> ChainSystem<f64> {
        let ec = std::f64::consts::TAU * 0.25;
        let spec = crate::transmon::TransmonSpec {
            charging_energy: ec,
            josephson_energy: 50.0 * ec,
            levels: 5,
        };
        let spectrum = crate::transmon::level_spectrum(&spec).unwrap();
        let (wp, ws) = crate::transmon::resonant_frequencies(&spectrum);
        let frame = crate::transmon::build_frame(&spectrum, wp, ws, 0.0, 0.0).unwrap();
        crate::transmon::chain_from_transmon(&spec, &frame, &gammas).unwrap()
    }

    #[test]
    fn zero_generator_leaves_state_unchanged() {
        let sys = three_level();
        let params = flat_params(0.0, 0.0);
        let grid = TimeGrid::new(10.0, 100).unwrap();
        let psi0 = basis_state(3, 0);
        let traj = propagate(&sys, &params, &grid, &psi0).unwrap();
        for k in 0..=100 {
            assert_relative_eq!(traj.population(k, 0), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn rabi_oscillation_matches_analytic() {
        // constant resonant drive Ω on a two-level chain: P_1(t) = sin²(Ωt/2)
        let omega = 0.4_f64;
        let sys = ChainSystem::new(
            vec![0.0, 0.0],
            vec![Link { lower: 0, channel: Channel::Pump, scale: 1.0, phase: 0.0 }],
            vec![],
        )
        .unwrap();
        let t_pi = std::f64::consts::PI / omega;
        let grid = TimeGrid::new(t_pi, 400).unwrap();
        let traj = propagate(&sys, &flat_params(omega, 0.0), &grid, &basis_state(2, 0)).unwrap();
        for k in (0..=400).step_by(50) {
            let t = grid.node(k);
            assert_relative_eq!(
                traj.population(k, 1),
                (omega * t / 2.0).sin().powi(2),
                epsilon = 1e-6
            );
        }
        assert_relative_eq!(traj.population(400, 1), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn pure_decay_matches_exponential() {
        let gamma = 0.07_f64;
        let sys = ChainSystem::new(
            vec![0.0, 0.0],
            vec![],
            vec![Decay { rate: gamma, from: 1, to: 0 }],
        )
        .unwrap();
        let grid = TimeGrid::new(40.0, 800).unwrap();
        let traj = propagate(&sys, &flat_params(0.0, 0.0), &grid, &basis_state(2, 1)).unwrap();
        for k in (0..=800).step_by(100) {
            let t = grid.node(k);
            assert_relative_eq!(traj.population(k, 1), (-gamma * t).exp(), epsilon = 1e-6);
        }
    }

    #[test]
    fn expm_midpoint_exact_for_constant_hamiltonian() {
        // single step of the oracle against the analytic two-level rotation
        let omega = 0.9_f64;
        let mut h = CMatrix::<f64>::zeros(2);
        h[(0, 1)] = C64::new(omega / 2.0, 0.0);
        h[(1, 0)] = C64::new(omega / 2.0, 0.0);
        let grid = TimeGrid::new(3.7, 2).unwrap();
        let traj = integrate_expm_midpoint(|_| h.clone(), &grid, &basis_state(2, 0)).unwrap();
        let t1 = grid.node(1);
        assert_relative_eq!(traj.population(1, 1), (omega * t1 / 2.0).sin().powi(2), epsilon = 1e-13);
        let t2 = grid.node(2);
        assert_relative_eq!(traj.population(2, 1), (omega * t2 / 2.0).sin().powi(2), epsilon = 1e-13);
    }

    #[test]
    fn expm_midpoint_preserves_norm_for_hermitian() {
        let sys = five_level_reference([0.0; 5]);
        let grid = TimeGrid::new(80.0, 200).unwrap();
        let traj =
            propagate_oracle(&sys, &stirap_params(0.5, 12.0), &grid, &basis_state(5, 0)).unwrap();
        for (k, norm) in traj.norms().iter().enumerate() {
            assert!((norm - 1.0).abs() < 1e-12 * (k as f64 + 1.0));
        }
    }

    #[test]
    fn rk4_agrees_with_expm_oracle_on_reference_run() {
        let sys = five_level_reference([0.0, 2e-5, 4e-5, 6e-5, 8e-5]);
        let params = stirap_params(0.5, 12.0);
        let grid = TimeGrid::new(80.0, 4000).unwrap();
        let psi0 = basis_state(5, 0);
        let a = propagate(&sys, &params, &grid, &psi0).unwrap();
        let b = propagate_oracle(&sys, &params, &grid, &psi0).unwrap();
        let diff: f64 = a
            .final_state()
            .iter()
            .zip(b.final_state())
            .map(|(x, y)| (*x - *y).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-6, "terminal max-norm discrepancy {diff}");
    }

    #[test]
    fn fourth_order_convergence_to_oracle() {
        // the oracle at fixed fine resolution is the yardstick; halving the
        // RK4 step must shrink the terminal error by ≳ 8x per refinement
        let sys = three_level();
        let params = stirap_params(1.0, 16.0);
        let psi0 = basis_state(3, 0);
        let reference =
            propagate_oracle(&sys, &params, &TimeGrid::new(80.0, 40000).unwrap(), &psi0).unwrap();
        let terminal_error = |steps: usize| -> f64 {
            let traj =
                propagate(&sys, &params, &TimeGrid::new(80.0, steps).unwrap(), &psi0).unwrap();
            traj.final_state()
                .iter()
                .zip(reference.final_state())
                .map(|(x, y)| (*x - *y).norm())
                .fold(0.0, f64::max)
        };
        let e0 = terminal_error(250);
        let e1 = terminal_error(500);
        let e2 = terminal_error(1000);
        assert!(e0 / e1 >= 8.0, "first refinement ratio {}", e0 / e1);
        assert!(e1 / e2 >= 8.0, "second refinement ratio {}", e1 / e2);
    }

    #[test]
    fn norms_non_increasing_with_dissipation() {
        let sys = five_level_reference([0.0, 1e-3, 2e-3, 3e-3, 4e-3]);
        let grid = TimeGrid::new(80.0, 2000).unwrap();
        let traj = propagate(&sys, &stirap_params(0.5, 12.0), &grid, &basis_state(5, 0)).unwrap();
        let norms = traj.norms();
        for pair in norms.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-9);
        }
    }

    #[test]
    fn propagation_is_linear_in_initial_state() {
        let sys = five_level_reference([0.0, 2e-5, 4e-5, 6e-5, 8e-5]);
        let params = stirap_params(0.5, 12.0);
        let grid = TimeGrid::new(40.0, 1000).unwrap();
        let a = C64::new(0.6, 0.2);
        let b = C64::new(-0.3, 0.7);
        let psi = basis_state::<f64>(5, 0);
        let chi = basis_state::<f64>(5, 2);
        let combined: Vec<C64> =
            psi.iter().zip(&chi).map(|(p, c)| a * *p + b * *c).collect();
        let t_psi = propagate(&sys, &params, &grid, &psi).unwrap();
        let t_chi = propagate(&sys, &params, &grid, &chi).unwrap();
        let t_comb = propagate(&sys, &params, &grid, &combined).unwrap();
        for (x, (p, c)) in t_comb.final_state().iter().zip(
            t_psi.final_state().iter().zip(t_chi.final_state()),
        ) {
            let expect = a * *p + b * *c;
            assert!((*x - expect).norm() < 1e-10);
        }
    }

    #[test]
    fn ideal_three_level_stirap_transfers() {
        // adiabatic regime: A = 1.5 rad/ns, σ = 10 ns, 16 ns separation
        let sys = three_level();
        let grid = TimeGrid::new(80.0, 4000).unwrap();
        let traj = propagate(&sys, &stirap_params(1.5, 16.0), &grid, &basis_state(3, 0)).unwrap();
        assert!(traj.population(4000, 2) >= 0.999, "P2 = {}", traj.population(4000, 2));
    }

    #[test]
    fn population_record_fields() {
        let sys = five_level_reference([0.0; 5]);
        let partition = sys.partition(2).unwrap();
        let grid = TimeGrid::new(80.0, 1000).unwrap();

        // zero drive from |0⟩: no leakage, unit total population
        let traj = propagate(&sys, &flat_params(0.0, 0.0), &grid, &basis_state(5, 0)).unwrap();
        let rec = populations(&traj, &partition);
        assert_eq!(rec.max_leakage, 0.0);
        assert_eq!(rec.final_fidelity, 0.0);

        // Hermitian run: Σ_n P_n = 1 at every node
        let traj = propagate(&sys, &stirap_params(0.5, 12.0), &grid, &basis_state(5, 0)).unwrap();
        let rec = populations(&traj, &partition);
        for p in &rec.populations {
            let total: f64 = p.iter().sum();
            assert!((total - 1.0).abs() < 1e-9);
        }
        assert_eq!(rec.leakage.len(), 1001);
        for (k, leak) in rec.leakage.iter().enumerate() {
            assert_relative_eq!(*leak, rec.populations[k][3] + rec.populations[k][4]);
        }
    }

    #[test]
    fn divergence_reports_failing_node() {
        // feed a non-finite Hamiltonian entry mid-run
        let grid = TimeGrid::new(1.0, 10).unwrap();
        let h = |t: f64| {
            let mut m = CMatrix::<f64>::zeros(2);
            m[(0, 0)] = C64::new(if t > 0.55 { f64::NAN } else { 0.0 }, 0.0);
            m
        };
        let err = integrate_rk4(h, &grid, &basis_state(2, 0)).unwrap_err();
        assert!(matches!(err, Error::Divergence { node } if node >= 6));
    }
}
