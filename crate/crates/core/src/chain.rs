//! Generic N-level nearest-neighbor chain: Hamiltonian assembly, control
//! operators, dark states, and target/leakage partitions.
//!
//! The chain Hamiltonian is tridiagonal with detunings Δ_j on the diagonal
//! and half the complex couplings Ω_{j,j+1}(t) on the off-diagonals. Each
//! link takes its envelope from one of the two drive channels, multiplied by
//! a fixed real scale factor and phase.

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};
use crate::pulses::Channel;
use crate::scalar::Real;

/// Tolerance for the even-sublattice detuning alignment required by the
/// end-to-end dark state (rad/ns).
pub const DARK_STATE_DETUNING_TOL: f64 = 1e-9;

/// One nearest-neighbor coupling `|lower⟩ ↔ |lower+1⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Link<R> {
    pub lower: usize,
    pub channel: Channel,
    /// Real scale multiplying the channel envelope (e.g. √j for a transmon).
    pub scale: R,
    /// Drive phase φ (rad).
    pub phase: R,
}

/// One relaxation channel with collapse operator √rate |to⟩⟨from|.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decay<R> {
    pub rate: R,
    pub from: usize,
    pub to: usize,
}

/// N-level chain model: detunings, drive-channel links, relaxation channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSystem<R> {
    detunings: Vec<R>,
    links: Vec<Link<R>>,
    dissipation: Vec<Decay<R>>,
}

/// Complex envelope values for both channels at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelValues<R> {
    pub pump: Complex<R>,
    pub stokes: Complex<R>,
}

impl<R: Real> ChannelValues<R> {
    pub fn real(pump: R, stokes: R) -> Self {
        Self { pump: Complex::new(pump, R::zero()), stokes: Complex::new(stokes, R::zero()) }
    }

    pub fn get(&self, channel: Channel) -> Complex<R> {
        match channel {
            Channel::Pump => self.pump,
            Channel::Stokes => self.stokes,
        }
    }
}

impl<R: Real> ChainSystem<R> {
    pub fn new(detunings: Vec<R>, links: Vec<Link<R>>, dissipation: Vec<Decay<R>>) -> Result<Self> {
        let n = detunings.len();
        if n < 2 {
            return Err(Error::InvalidChainSystem(format!("need at least 2 levels, got {n}")));
        }
        let mut seen = vec![false; n.saturating_sub(1)];
        for link in &links {
            if link.lower + 1 >= n {
                return Err(Error::InvalidChainSystem(format!(
                    "link at {} does not connect adjacent levels within dimension {n}",
                    link.lower
                )));
            }
            if seen[link.lower] {
                return Err(Error::InvalidChainSystem(format!(
                    "duplicate link at {}-{}",
                    link.lower,
                    link.lower + 1
                )));
            }
            seen[link.lower] = true;
            if !(link.scale > R::zero()) {
                return Err(Error::InvalidChainSystem(format!(
                    "link scale must be positive, got {}",
                    link.scale
                )));
            }
        }
        for d in &dissipation {
            if d.rate < R::zero() {
                return Err(Error::InvalidChainSystem(format!(
                    "decay rate must be non-negative, got {}",
                    d.rate
                )));
            }
            if d.from >= n || d.to >= n {
                return Err(Error::InvalidChainSystem(format!(
                    "decay {} -> {} outside dimension {n}",
                    d.from, d.to
                )));
            }
        }
        Ok(Self { detunings, links, dissipation })
    }

    pub fn dimension(&self) -> usize {
        self.detunings.len()
    }

    pub fn detunings(&self) -> &[R] {
        &self.detunings
    }

    pub fn links(&self) -> &[Link<R>] {
        &self.links
    }

    pub fn dissipation(&self) -> &[Decay<R>] {
        &self.dissipation
    }

    pub fn is_dissipative(&self) -> bool {
        self.dissipation.iter().any(|d| d.rate > R::zero())
    }

    /// Total rate Σγ flowing out of each level (from Σ_μ C_μ†C_μ).
    pub fn outflow_rates(&self) -> Vec<R> {
        let mut out = vec![R::zero(); self.dimension()];
        for d in &self.dissipation {
            out[d.from] += d.rate;
        }
        out
    }

    /// Full complex coupling Ω_{j,j+1} = scale · env_ch · e^{iφ} for a link.
    fn coupling(&self, link: &Link<R>, values: &ChannelValues<R>) -> Complex<R> {
        Complex::from_polar(link.scale, link.phase) * values.get(link.channel)
    }

    /// Hermitian chain Hamiltonian at the given envelope values (ħ = 1):
    /// diagonal Δ_j, off-diagonal Ω_{j,j+1}/2.
    pub fn assemble_hamiltonian(&self, values: &ChannelValues<R>) -> CMatrix<R> {
        let n = self.dimension();
        let mut h = CMatrix::zeros(n);
        for (j, delta) in self.detunings.iter().enumerate() {
            h[(j, j)] = Complex::new(*delta, R::zero());
        }
        let half = R::of(0.5);
        for link in &self.links {
            let v = self.coupling(link, values) * half;
            h[(link.lower, link.lower + 1)] += v;
            h[(link.lower + 1, link.lower)] += v.conj();
        }
        h
    }

    /// Effective non-Hermitian Hamiltonian H − (i/2) Σ_μ C_μ†C_μ; the
    /// dissipative part is diagonal with entries −(i/2) Σ γ out of each level.
    pub fn non_hermitian_hamiltonian(&self, values: &ChannelValues<R>) -> CMatrix<R> {
        let mut h = self.assemble_hamiltonian(values);
        let half = R::of(0.5);
        for (level, gamma) in self.outflow_rates().into_iter().enumerate() {
            if gamma > R::zero() {
                h[(level, level)] -= Complex::new(R::zero(), half * gamma);
            }
        }
        h
    }

    /// Derivative of the Hamiltonian with respect to one channel's (real)
    /// envelope value: Σ_{links on ch} (scale/2)(e^{iφ}|j⟩⟨j+1| + h.c.).
    pub fn denv_hamiltonian(&self, channel: Channel) -> CMatrix<R> {
        let n = self.dimension();
        let mut m = CMatrix::zeros(n);
        let half = R::of(0.5);
        for link in &self.links {
            if link.channel == channel {
                let v = Complex::from_polar(link.scale * half, link.phase);
                m[(link.lower, link.lower + 1)] += v;
                m[(link.lower + 1, link.lower)] += v.conj();
            }
        }
        m
    }

    /// Per-link Hermitian control operators (X_j, Y_j) with
    /// X_j = (|j⟩⟨j+1| + |j+1⟩⟨j|)/2 and Y_j = (i|j⟩⟨j+1| − i|j+1⟩⟨j|)/2,
    /// so that H = H_d + Σ_j (u_x X_j + u_y Y_j) with u_x + i u_y = Ω_{j,j+1}.
    pub fn control_operators(&self) -> Vec<(CMatrix<R>, CMatrix<R>)> {
        let n = self.dimension();
        let half = R::of(0.5);
        self.links
            .iter()
            .map(|link| {
                let j = link.lower;
                let mut x = CMatrix::zeros(n);
                x[(j, j + 1)] = Complex::new(half, R::zero());
                x[(j + 1, j)] = Complex::new(half, R::zero());
                let mut y = CMatrix::zeros(n);
                y[(j, j + 1)] = Complex::new(R::zero(), half);
                y[(j + 1, j)] = Complex::new(R::zero(), -half);
                (x, y)
            })
            .collect()
    }

    /// End-to-end dark state of an odd chain from the product formula
    /// A_k = (−1)^k ∏ Ω*_{even links} ∏ Ω_{odd links}.
    pub fn dark_state(&self, values: &ChannelValues<R>) -> Result<DarkState<R>> {
        let n = self.dimension();
        if n % 2 == 0 {
            return Err(Error::EvenChain { levels: n });
        }
        let pairs = (n - 1) / 2;

        // existence requires the populated even sublattice to be aligned
        let mut spread = R::zero();
        for k in 0..=pairs {
            spread = spread.max((self.detunings[2 * k] - self.detunings[0]).abs());
        }
        if spread > R::of(DARK_STATE_DETUNING_TOL) {
            return Err(Error::MisalignedDetunings {
                spread: spread.to_f64().unwrap_or(f64::NAN),
            });
        }

        let mut couplings = vec![Complex::<R>::zero(); n - 1];
        for link in &self.links {
            couplings[link.lower] = self.coupling(link, values);
        }
        let mut amplitudes = Vec::with_capacity(pairs + 1);
        for k in 0..=pairs {
            let mut a = Complex::new(R::one(), R::zero());
            for m in 0..k {
                a *= couplings[2 * m].conj();
            }
            for m in k..pairs {
                a *= couplings[2 * m + 1];
            }
            if k % 2 == 1 {
                a = -a;
            }
            amplitudes.push(a);
        }
        let norm = amplitudes.iter().fold(R::zero(), |acc, a| acc + a.norm_sqr()).sqrt();
        if norm.is_zero() {
            return Err(Error::DegenerateDarkState);
        }
        Ok(DarkState { amplitudes, norm, dimension: n })
    }

    /// Target/leakage split with target manifold {0..=boundary}.
    pub fn partition(&self, boundary: usize) -> Result<SubspacePartition> {
        SubspacePartition::new(self.dimension(), boundary)
    }
}

/// Even-sublattice dark state |D⟩ ∝ Σ_k A_k |2k⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct DarkState<R> {
    amplitudes: Vec<Complex<R>>,
    norm: R,
    dimension: usize,
}

impl<R: Real> DarkState<R> {
    /// Unnormalized sublattice amplitudes A_k.
    pub fn amplitudes(&self) -> &[Complex<R>] {
        &self.amplitudes
    }

    /// Normalization factor 𝒩 = (Σ|A_k|²)^{1/2}.
    pub fn normalization(&self) -> R {
        self.norm
    }

    /// Normalized state vector, supported on even levels.
    pub fn vector(&self) -> CVector<R> {
        let mut v = vec![Complex::zero(); self.dimension];
        for (k, a) in self.amplitudes.iter().enumerate() {
            v[2 * k] = *a / self.norm;
        }
        v
    }
}

/// Target manifold {0..=boundary} and leakage manifold {boundary+1..N−1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubspacePartition {
    levels: usize,
    boundary: usize,
}

impl SubspacePartition {
    pub fn new(levels: usize, boundary: usize) -> Result<Self> {
        if boundary == 0 || boundary >= levels {
            return Err(Error::PartitionOutOfRange { boundary, levels });
        }
        Ok(Self { levels, boundary })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Highest target level; the transfer target state |m⟩.
    pub fn target_level(&self) -> usize {
        self.boundary
    }

    pub fn is_leakage(&self, level: usize) -> bool {
        level > self.boundary
    }

    pub fn leakage_levels(&self) -> impl Iterator<Item = usize> {
        (self.boundary + 1)..self.levels
    }

    pub fn leakage_rank(&self) -> usize {
        self.levels - self.boundary - 1
    }

    pub fn projector_target<R: Real>(&self) -> CMatrix<R> {
        let mut p = CMatrix::zeros(self.levels);
        for i in 0..=self.boundary {
            p[(i, i)] = Complex::new(R::one(), R::zero());
        }
        p
    }

    pub fn projector_leakage<R: Real>(&self) -> CMatrix<R> {
        let mut p = CMatrix::zeros(self.levels);
        for i in self.leakage_levels() {
            p[(i, i)] = Complex::new(R::one(), R::zero());
        }
        p
    }

    /// Leakage weight ⟨ψ|Π_leak|ψ⟩ of a state.
    pub fn leakage_weight<R: Real>(&self, state: &[Complex<R>]) -> R {
        self.leakage_levels().fold(R::zero(), |acc, n| acc + state[n].norm_sqr())
    }
}

/// Mixing angle of the three-level dark state: tan θ = |Ω_01|/|Ω_12| with
/// θ ∈ [0, π/2], plus the relative phase arg Ω_01 − arg Ω_12. Returns θ = π/2
/// in the completed-transfer limit Ω_12 = 0.
pub fn mixing_angle<R: Real>(
    omega_01: Complex<R>,
    omega_12: Complex<R>,
) -> Result<(R, R)> {
    let (a, b) = (omega_01.norm(), omega_12.norm());
    if a.is_zero() && b.is_zero() {
        return Err(Error::UndefinedMixingAngle);
    }
    let theta = a.atan2(b);
    let phase = omega_01.arg() - omega_12.arg();
    Ok((theta, phase))
}
