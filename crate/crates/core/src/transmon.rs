//! Transmon circuit spectrum, zero-point amplitudes, rotating frame, and the
//! reduction to a five-level driven chain.
//!
//! Units: ħ = 1, energies and frequencies in rad/ns, times in ns. The level
//! energies come from the sixth-order expansion of the cosine potential,
//! giving a cubic polynomial in the level index with no constant term:
//!
//! ```text
//! E_n = (ω0 − E_C/2 + E_C ξ/9) n + (E_C ξ/12 − E_C/2) n² + (E_C ξ/18) n³,
//! ω0 = √(8 E_J E_C),   ξ = √(2 E_C / E_J).
//! ```

use serde::{Deserialize, Serialize};

use crate::chain::{ChainSystem, Decay, Link};
use crate::error::{Error, Result};
use crate::pulses::Channel;
use crate::scalar::Real;

/// Soft lower bound on E_J/E_C below which a warning is logged.
const TRANSMON_RATIO_WARN: f64 = 20.0;

/// Circuit parameters of a fixed-frequency transmon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmonSpec<R> {
    /// Charging energy E_C (rad/ns).
    pub charging_energy: R,
    /// Josephson energy E_J (rad/ns).
    pub josephson_energy: R,
    /// Number of retained levels, ≥ 3.
    pub levels: usize,
}

impl<R: Real> TransmonSpec<R> {
    pub fn validate(&self) -> Result<()> {
        if !(self.charging_energy > R::zero()) || !self.charging_energy.is_finite() {
            return Err(Error::InvalidTransmonSpec(format!(
                "charging energy must be positive, got {}",
                self.charging_energy
            )));
        }
        if !(self.josephson_energy > R::zero()) || !self.josephson_energy.is_finite() {
            return Err(Error::InvalidTransmonSpec(format!(
                "josephson energy must be positive, got {}",
                self.josephson_energy
            )));
        }
        if self.levels < 3 {
            return Err(Error::InvalidTransmonSpec(format!(
                "need at least 3 levels, got {}",
                self.levels
            )));
        }
        let ratio = self.josephson_energy / self.charging_energy;
        if ratio <= R::one() {
            return Err(Error::InvalidTransmonSpec(format!(
                "E_J/E_C = {ratio} is outside the transmon regime (need > 1)"
            )));
        }
        if ratio < R::of(TRANSMON_RATIO_WARN) {
            log::warn!(
                "E_J/E_C = {ratio} is low for a transmon; sixth-order spectrum may be inaccurate"
            );
        }
        Ok(())
    }

    /// Small expansion parameter ξ = √(2 E_C / E_J).
    pub fn xi(&self) -> R {
        (R::of(2.0) * self.charging_energy / self.josephson_energy).sqrt()
    }

    /// Harmonic frequency ω0 = √(8 E_J E_C).
    pub fn omega0(&self) -> R {
        (R::of(8.0) * self.josephson_energy * self.charging_energy).sqrt()
    }
}

/// Level energies relative to the ground state, E_0 = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSpectrum<R> {
    energies: Vec<R>,
}

impl<R: Real> LevelSpectrum<R> {
    /// Construct directly from energies; `energies[0]` is subtracted so the
    /// stored spectrum is always referenced to the ground state.
    pub fn from_energies(energies: Vec<R>) -> Self {
        let e0 = energies[0];
        Self { energies: energies.into_iter().map(|e| e - e0).collect() }
    }

    pub fn level_count(&self) -> usize {
        self.energies.len()
    }

    /// E_n − E_0.
    pub fn energy(&self, n: usize) -> R {
        self.energies[n]
    }

    pub fn energies(&self) -> &[R] {
        &self.energies
    }

    /// Adjacent transition frequency ω_{n+1,n}.
    pub fn transition(&self, n: usize) -> R {
        self.energies[n + 1] - self.energies[n]
    }

    /// Cumulative frequency ω_{n0}.
    pub fn cumulative(&self, n: usize) -> R {
        self.energies[n]
    }

    /// ω_{21} − ω_{10}; negative for a physical transmon.
    pub fn anharmonicity(&self) -> R {
        self.transition(1) - self.transition(0)
    }
}

/// Rotating frame defined by the two drive tones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameSpec<R> {
    pub pump_frequency: R,
    pub stokes_frequency: R,
    pub pump_phase: R,
    pub stokes_phase: R,
    /// Cumulative reference frequencies ν_n, n = 0..4.
    pub references: Vec<R>,
    /// Effective detunings Δ_n = ω_{n0} − ν_n.
    pub detunings: Vec<R>,
}

/// Sixth-order level spectrum of the transmon.
pub fn level_spectrum<R: Real>(spec: &TransmonSpec<R>) -> Result<LevelSpectrum<R>> {
    spec.validate()?;
    let ec = spec.charging_energy;
    let xi = spec.xi();
    let half = R::of(0.5);
    let a = spec.omega0() - half * ec + ec * xi / R::of(9.0);
    let b = ec * xi / R::of(12.0) - half * ec;
    let c = ec * xi / R::of(18.0);
    let energies = (0..spec.levels)
        .map(|n| {
            let n = R::of(n as f64);
            a * n + b * n * n + c * n * n * n
        })
        .collect();
    Ok(LevelSpectrum { energies })
}

/// Zero-point fluctuation amplitudes (φ_zpf, n_zpf).
pub fn zpf_amplitudes<R: Real>(spec: &TransmonSpec<R>) -> Result<(R, R)> {
    spec.validate()?;
    let quarter = R::of(0.25);
    let phi = (R::of(2.0) * spec.charging_energy / spec.josephson_energy).powf(quarter);
    let n = (spec.josephson_energy / (R::of(32.0) * spec.charging_energy)).powf(quarter);
    Ok((phi, n))
}

/// Pump/Stokes frequencies that null Δ_1 and Δ_2: ω_p = ω_{10}, ω_s = ω_{21}.
pub fn resonant_frequencies<R: Real>(spectrum: &LevelSpectrum<R>) -> (R, R) {
    (spectrum.transition(0), spectrum.transition(1))
}

/// Build the five-level rotating frame for given drive frequencies and phases.
///
/// The reference frequencies accumulate alternately: ν = (0, ω_p, ω_p+ω_s,
/// 2ω_p+ω_s, 2ω_p+2ω_s), and Δ_n = ω_{n0} − ν_n. At two-photon resonance
/// Δ_2 = 0.
pub fn build_frame<R: Real>(
    spectrum: &LevelSpectrum<R>,
    pump_frequency: R,
    stokes_frequency: R,
    pump_phase: R,
    stokes_phase: R,
) -> Result<FrameSpec<R>> {
    if spectrum.level_count() < 5 {
        return Err(Error::InvalidTransmonSpec(format!(
            "five-level frame requires at least 5 levels, got {}",
            spectrum.level_count()
        )));
    }
    for (label, f) in [("pump", pump_frequency), ("stokes", stokes_frequency)] {
        if !f.is_finite() {
            return Err(Error::InvalidTransmonSpec(format!("{label} frequency must be finite")));
        }
    }
    let mut references = Vec::with_capacity(5);
    let mut nu = R::zero();
    references.push(nu);
    for n in 0..4 {
        nu += if n % 2 == 0 { pump_frequency } else { stokes_frequency };
        references.push(nu);
    }
    let detunings = references
        .iter()
        .enumerate()
        .map(|(n, nu)| spectrum.cumulative(n) - *nu)
        .collect();
    Ok(FrameSpec {
        pump_frequency,
        stokes_frequency,
        pump_phase,
        stokes_phase,
        references,
        detunings,
    })
}

/// Assemble the driven five-level chain: couplings √j on alternating
/// pump/Stokes channels, detunings from the frame, and nearest-neighbor
/// lowering collapse operators √γ_n |n−1⟩⟨n|.
pub fn chain_from_transmon<R: Real>(
    spec: &TransmonSpec<R>,
    frame: &FrameSpec<R>,
    decay_rates: &[R],
) -> Result<ChainSystem<R>> {
    spec.validate()?;
    if spec.levels != 5 {
        return Err(Error::ChannelMapRequiresFive { levels: spec.levels });
    }
    if decay_rates.len() != spec.levels {
        return Err(Error::InvalidChainSystem(format!(
            "need {} decay rates (γ_0 first), got {}",
            spec.levels,
            decay_rates.len()
        )));
    }
    if decay_rates[0] != R::zero() {
        return Err(Error::InvalidChainSystem("ground state cannot decay (γ_0 must be 0)".into()));
    }
    let links = (1..5)
        .map(|j| {
            let (channel, phase) = if j % 2 == 1 {
                (Channel::Pump, frame.pump_phase)
            } else {
                (Channel::Stokes, frame.stokes_phase)
            };
            Link { lower: j - 1, channel, scale: R::of(j as f64).sqrt(), phase }
        })
        .collect();
    let dissipation = decay_rates
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, g)| **g != R::zero())
        .map(|(n, g)| Decay { rate: *g, from: n, to: n - 1 })
        .collect();
    ChainSystem::new(frame.detunings.clone(), links, dissipation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec(ratio: f64) -> TransmonSpec<f64> {
        let ec = std::f64::consts::TAU * 0.25; // 0.25 GHz charging energy
        TransmonSpec { charging_energy: ec, josephson_energy: ratio * ec, levels: 5 }
    }

    #[test]
    fn ground_energy_is_zero() {
        let s = level_spectrum(&spec(50.0)).unwrap();
        assert_eq!(s.energy(0), 0.0);
    }

    #[test]
    fn anharmonicity_identity() {
        // ω_21 − ω_10 = −E_C + E_C ξ/2, exactly 2b + 6c
        for ratio in [20.0, 50.0, 80.0, 200.0] {
            let sp = spec(ratio);
            let s = level_spectrum(&sp).unwrap();
            let expected = -sp.charging_energy + sp.charging_energy * sp.xi() / 2.0;
            assert_relative_eq!(s.anharmonicity(), expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn transitions_strictly_decreasing() {
        let s = level_spectrum(&spec(50.0)).unwrap();
        for n in 0..3 {
            assert!(s.transition(n + 1) < s.transition(n));
        }
    }

    #[test]
    fn spectrum_is_cubic_through_origin() {
        // reconstruct a, b, c from E_1..E_3 by finite differences and compare
        let sp = spec(50.0);
        let s = level_spectrum(&sp).unwrap();
        let (e1, e2, e3) = (s.energy(1), s.energy(2), s.energy(3));
        let c = (e3 - 3.0 * e2 + 3.0 * e1) / 6.0;
        let b = (e2 - 2.0 * e1) / 2.0 - 3.0 * c;
        let a = e1 - b - c;
        let xi = sp.xi();
        let ec = sp.charging_energy;
        assert_relative_eq!(a, sp.omega0() - ec / 2.0 + ec * xi / 9.0, max_relative = 1e-12);
        assert_relative_eq!(b, ec * xi / 12.0 - ec / 2.0, max_relative = 1e-12);
        assert_relative_eq!(c, ec * xi / 18.0, max_relative = 1e-12);
        // E_4 must then follow from the same cubic
        assert_relative_eq!(
            s.energy(4),
            a * 4.0 + b * 16.0 + c * 64.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn sixth_order_terms_vanish_with_xi() {
        // E_n − quartic part = E_C ξ (n/9 + n²/12 + n³/18)
        let sp = spec(50.0);
        let s = level_spectrum(&sp).unwrap();
        let ec = sp.charging_energy;
        let xi = sp.xi();
        for n in 0..5 {
            let nf = n as f64;
            let quartic = (sp.omega0() - ec / 2.0) * nf - ec / 2.0 * nf * nf;
            let correction = ec * xi * (nf / 9.0 + nf * nf / 12.0 + nf * nf * nf / 18.0);
            assert_relative_eq!(s.energy(n), quartic + correction, max_relative = 1e-12);
        }
    }

    #[test]
    fn zpf_special_cases_and_product() {
        let ec = 0.7;
        let phi_one = TransmonSpec { charging_energy: ec, josephson_energy: 2.0 * ec, levels: 3 };
        assert_relative_eq!(zpf_amplitudes(&phi_one).unwrap().0, 1.0, max_relative = 1e-14);
        let n_one = TransmonSpec { charging_energy: ec, josephson_energy: 32.0 * ec, levels: 3 };
        assert_relative_eq!(zpf_amplitudes(&n_one).unwrap().1, 1.0, max_relative = 1e-14);
        for ratio in [5.0, 20.0, 50.0, 313.0] {
            let (phi, n) = zpf_amplitudes(&spec(ratio)).unwrap();
            assert_relative_eq!(phi * n, 0.5, max_relative = 1e-12);
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut s = spec(50.0);
        s.charging_energy = 0.0;
        assert!(level_spectrum(&s).is_err());
        let mut s = spec(50.0);
        s.josephson_energy = -1.0;
        assert!(zpf_amplitudes(&s).is_err());
        let mut s = spec(50.0);
        s.levels = 2;
        assert!(level_spectrum(&s).is_err());
    }

    #[test]
    fn resonant_frame_nulls_first_two_detunings() {
        let s = level_spectrum(&spec(50.0)).unwrap();
        let (wp, ws) = resonant_frequencies(&s);
        let f = build_frame(&s, wp, ws, 0.0, 0.0).unwrap();
        assert_relative_eq!(f.detunings[0], 0.0);
        assert!(f.detunings[1].abs() < 1e-12);
        assert!(f.detunings[2].abs() < 1e-12);
        assert!(f.detunings[3] < 0.0);
        assert!(f.detunings[4] < f.detunings[3]);
    }

    #[test]
    fn frame_references_accumulate_alternately() {
        let s = level_spectrum(&spec(50.0)).unwrap();
        let (wp, ws) = (31.0, 29.5);
        let f = build_frame(&s, wp, ws, 0.0, 0.0).unwrap();
        assert_relative_eq!(f.references[3], 2.0 * wp + ws, max_relative = 1e-14);
        assert_relative_eq!(f.references[4], 2.0 * wp + 2.0 * ws, max_relative = 1e-14);
        assert_relative_eq!(
            f.detunings[4],
            s.cumulative(4) - 2.0 * wp - 2.0 * ws,
            max_relative = 1e-12
        );
        // Δ_2 is the two-photon detuning
        assert_relative_eq!(
            f.detunings[2],
            s.cumulative(2) - wp - ws,
            max_relative = 1e-14
        );
    }

    #[test]
    fn transmon_chain_has_sqrt_j_couplings() {
        let sp = spec(50.0);
        let s = level_spectrum(&sp).unwrap();
        let (wp, ws) = resonant_frequencies(&s);
        let f = build_frame(&s, wp, ws, 0.0, 0.0).unwrap();
        let chain = chain_from_transmon(&sp, &f, &[0.0; 5]).unwrap();
        let links = chain.links();
        assert_eq!(links.len(), 4);
        assert_eq!(links[1].channel, Channel::Stokes);
        assert_relative_eq!(links[1].scale, 2.0_f64.sqrt());
        assert_eq!(links[3].channel, Channel::Stokes);
        assert_relative_eq!(links[3].scale, 2.0);
        assert_eq!(links[2].channel, Channel::Pump);
        assert_relative_eq!(links[2].scale, 3.0_f64.sqrt());
        // no decay rates -> Hermitian dynamics
        assert!(chain.dissipation().is_empty());
    }

    #[test]
    fn transmon_chain_requires_five_levels_and_valid_rates() {
        let mut sp = spec(50.0);
        let s = level_spectrum(&sp).unwrap();
        let (wp, ws) = resonant_frequencies(&s);
        let f = build_frame(&s, wp, ws, 0.0, 0.0).unwrap();
        sp.levels = 6;
        assert!(matches!(
            chain_from_transmon(&sp, &f, &[0.0; 6]),
            Err(Error::ChannelMapRequiresFive { levels: 6 })
        ));
        sp.levels = 5;
        assert!(chain_from_transmon(&sp, &f, &[0.0; 4]).is_err());
        assert!(chain_from_transmon(&sp, &f, &[0.1, 0.0, 0.0, 0.0, 0.0]).is_err());
        let chain = chain_from_transmon(&sp, &f, &[0.0, 1e-5, 2e-5, 3e-5, 4e-5]).unwrap();
        assert_eq!(chain.dissipation().len(), 4);
    }
}
