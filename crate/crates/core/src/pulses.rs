//! Gaussian pump/Stokes pulse family and its analytic parameter derivatives.
//!
//! The control space is the six-dimensional vector
//! `(A_p, A_s, t_{0p}, t_{0s}, σ_p, σ_s)`: peak amplitudes (rad/ns), center
//! times (ns), and widths (ns) of the two drive envelopes
//! `Ω_μ(t) = A_μ exp(−(t − t_{0μ})² / 2σ_μ²)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::scalar::Real;

/// Number of optimizable pulse parameters.
pub const PARAM_COUNT: usize = 6;

/// Smallest admissible pulse width (ns); keeps the envelopes inside the
/// rotating-wave regime during optimization.
pub const MIN_WIDTH_NS: f64 = 0.5;

/// Drive channel: pump couples the odd links starting at 0-1, Stokes the
/// even links starting at 1-2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Pump,
    Stokes,
}

impl Channel {
    pub const BOTH: [Channel; 2] = [Channel::Pump, Channel::Stokes];
}

/// One Gaussian envelope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPulse<R> {
    /// Peak amplitude A (rad/ns), ≥ 0.
    pub amp: R,
    /// Center time t0 (ns).
    pub center: R,
    /// Width σ (ns), > 0.
    pub width: R,
}

/// The six-parameter control vector, one Gaussian per channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianParams<R> {
    pub pump: GaussianPulse<R>,
    pub stokes: GaussianPulse<R>,
}

/// Derivatives of one envelope with respect to its own (A, t0, σ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeDerivatives<R> {
    pub amp: R,
    pub center: R,
    pub width: R,
}

/// Real envelope values sampled on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeSamples<R> {
    pub pump: Vec<R>,
    pub stokes: Vec<R>,
}

impl<R: Real> GaussianParams<R> {
    pub fn new(pump: GaussianPulse<R>, stokes: GaussianPulse<R>) -> Result<Self> {
        let params = Self { pump, stokes };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        for (label, pulse) in [("pump", &self.pump), ("stokes", &self.stokes)] {
            if !(pulse.width > R::zero()) || !pulse.width.is_finite() {
                return Err(Error::InvalidPulseParams(format!(
                    "{label} width must be positive, got {}",
                    pulse.width
                )));
            }
            if pulse.amp < R::zero() || !pulse.amp.is_finite() {
                return Err(Error::InvalidPulseParams(format!(
                    "{label} amplitude must be non-negative, got {}",
                    pulse.amp
                )));
            }
            if !pulse.center.is_finite() {
                return Err(Error::InvalidPulseParams(format!("{label} center must be finite")));
            }
        }
        Ok(())
    }

    pub fn pulse(&self, channel: Channel) -> &GaussianPulse<R> {
        match channel {
            Channel::Pump => &self.pump,
            Channel::Stokes => &self.stokes,
        }
    }

    /// Ω_μ(t) = A_μ exp(−(t − t_{0μ})² / 2σ_μ²).
    pub fn envelope(&self, channel: Channel, t: R) -> R {
        let p = self.pulse(channel);
        let z = (t - p.center) / p.width;
        p.amp * (-z * z / R::of(2.0)).exp()
    }

    /// Analytic derivatives of Ω_μ(t) with respect to (A_μ, t_{0μ}, σ_μ).
    ///
    /// The amplitude derivative is evaluated as the bare exponential rather
    /// than Ω/A, which stays well-defined at A = 0.
    pub fn envelope_derivatives(&self, channel: Channel, t: R) -> EnvelopeDerivatives<R> {
        let p = self.pulse(channel);
        let dt = t - p.center;
        let z = dt / p.width;
        let gauss = (-z * z / R::of(2.0)).exp();
        let omega = p.amp * gauss;
        EnvelopeDerivatives {
            amp: gauss,
            center: omega * dt / (p.width * p.width),
            width: omega * dt * dt / (p.width * p.width * p.width),
        }
    }

    /// Rescale centers and widths by η_t > 0, leaving amplitudes fixed.
    pub fn apply_time_scaling(&self, eta_t: R) -> Result<Self> {
        if !(eta_t > R::zero()) {
            return Err(Error::InvalidScaling(format!(
                "time scale must be positive, got {eta_t}"
            )));
        }
        let scale = |p: &GaussianPulse<R>| GaussianPulse {
            amp: p.amp,
            center: eta_t * p.center,
            width: eta_t * p.width,
        };
        Ok(Self { pump: scale(&self.pump), stokes: scale(&self.stokes) })
    }

    /// Rescale both amplitudes by η_Ω ≥ 0, leaving timing fixed.
    pub fn apply_amplitude_scaling(&self, eta_omega: R) -> Result<Self> {
        if eta_omega < R::zero() || !eta_omega.is_finite() {
            return Err(Error::InvalidScaling(format!(
                "amplitude scale must be non-negative, got {eta_omega}"
            )));
        }
        let scale = |p: &GaussianPulse<R>| GaussianPulse {
            amp: eta_omega * p.amp,
            center: p.center,
            width: p.width,
        };
        Ok(Self { pump: scale(&self.pump), stokes: scale(&self.stokes) })
    }

    /// Evaluate both envelopes at every grid node.
    pub fn sample_envelopes(&self, grid: &TimeGrid<R>) -> EnvelopeSamples<R> {
        let sample = |ch| (0..grid.node_count()).map(|k| self.envelope(ch, grid.node(k))).collect();
        EnvelopeSamples { pump: sample(Channel::Pump), stokes: sample(Channel::Stokes) }
    }

    /// Canonical flat ordering (A_p, A_s, t_{0p}, t_{0s}, σ_p, σ_s).
    pub fn to_array(&self) -> [R; PARAM_COUNT] {
        [
            self.pump.amp,
            self.stokes.amp,
            self.pump.center,
            self.stokes.center,
            self.pump.width,
            self.stokes.width,
        ]
    }

    pub fn from_array(u: [R; PARAM_COUNT]) -> Self {
        Self {
            pump: GaussianPulse { amp: u[0], center: u[2], width: u[4] },
            stokes: GaussianPulse { amp: u[1], center: u[3], width: u[5] },
        }
    }

    /// Project onto the feasible box: A ≥ 0, t0 ∈ [0, T], σ ≥ [`MIN_WIDTH_NS`].
    pub fn project_bounds(&self, t_final: R) -> Self {
        let clamp = |p: &GaussianPulse<R>| GaussianPulse {
            amp: p.amp.max(R::zero()),
            center: p.center.max(R::zero()).min(t_final),
            width: p.width.max(R::of(MIN_WIDTH_NS)),
        };
        Self { pump: clamp(&self.pump), stokes: clamp(&self.stokes) }
    }

    /// True when the Stokes pulse precedes the pump pulse.
    pub fn counterintuitive_ordering(&self) -> bool {
        self.stokes.center < self.pump.center
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(a_p: f64, a_s: f64, t_p: f64, t_s: f64, s_p: f64, s_s: f64) -> GaussianParams<f64> {
        GaussianParams::from_array([a_p, a_s, t_p, t_s, s_p, s_s])
    }

    #[test]
    fn envelope_peak_and_one_sigma() {
        let p = params(0.8, 0.4, 40.0, 30.0, 10.0, 8.0);
        assert_relative_eq!(p.envelope(Channel::Pump, 40.0), 0.8);
        assert_relative_eq!(p.envelope(Channel::Pump, 50.0), 0.8 * (-0.5_f64).exp());
        assert_relative_eq!(p.envelope(Channel::Stokes, 30.0), 0.4);
    }

    #[test]
    fn zero_amplitude_envelope_is_zero() {
        let p = params(0.0, 0.0, 40.0, 30.0, 10.0, 8.0);
        for t in [0.0, 17.3, 40.0, 80.0] {
            assert_eq!(p.envelope(Channel::Pump, t), 0.0);
            assert_eq!(p.envelope(Channel::Stokes, t), 0.0);
        }
    }

    #[test]
    fn derivatives_vanish_at_center() {
        let p = params(0.8, 0.4, 40.0, 30.0, 10.0, 8.0);
        let d = p.envelope_derivatives(Channel::Pump, 40.0);
        assert_eq!(d.center, 0.0);
        assert_eq!(d.width, 0.0);
        assert_relative_eq!(d.amp, 1.0);
    }

    #[test]
    fn width_derivative_closed_form_at_one_sigma() {
        let p = params(0.8, 0.4, 40.0, 30.0, 10.0, 8.0);
        let d = p.envelope_derivatives(Channel::Pump, 50.0);
        assert_relative_eq!(d.width, 0.8 * (-0.5_f64).exp() / 10.0, max_relative = 1e-14);
    }

    #[test]
    fn amp_derivative_defined_at_zero_amplitude() {
        let p = params(0.0, 0.4, 40.0, 30.0, 10.0, 8.0);
        let d = p.envelope_derivatives(Channel::Pump, 45.0);
        assert_relative_eq!(d.amp, (-(0.5_f64) * 0.25).exp(), max_relative = 1e-14);
        assert_eq!(d.center, 0.0);
    }

    #[test]
    fn derivatives_match_central_differences() {
        // 50 random (params, t) draws; analytic vs FD to 1e-6 relative
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..50 {
            let p = params(
                rng.gen_range(0.05..1.0),
                rng.gen_range(0.05..1.0),
                rng.gen_range(10.0..70.0),
                rng.gen_range(10.0..70.0),
                rng.gen_range(2.0..15.0),
                rng.gen_range(2.0..15.0),
            );
            let t: f64 = rng.gen_range(0.0..80.0);
            for ch in Channel::BOTH {
                let d = p.envelope_derivatives(ch, t);
                let u = p.to_array();
                let fd = |idx: usize| {
                    let eps = 1e-5 * u[idx].abs().max(1.0);
                    let mut up = u;
                    up[idx] += eps;
                    let mut dn = u;
                    dn[idx] -= eps;
                    (GaussianParams::from_array(up).envelope(ch, t)
                        - GaussianParams::from_array(dn).envelope(ch, t))
                        / (2.0 * eps)
                };
                let (ia, it, iw) = match ch {
                    Channel::Pump => (0, 2, 4),
                    Channel::Stokes => (1, 3, 5),
                };
                for (analytic, idx) in [(d.amp, ia), (d.center, it), (d.width, iw)] {
                    let numeric = fd(idx);
                    let denom = numeric.abs().max(1e-12);
                    assert!(
                        ((analytic - numeric) / denom).abs() < 1e-6,
                        "channel {ch:?} param {idx}: {analytic} vs {numeric}"
                    );
                }
            }
        }
    }

    #[test]
    fn time_scaling_scales_centers_and_widths() {
        let p = params(0.8, 0.4, 46.0, 34.0, 10.0, 8.0);
        let q = p.apply_time_scaling(2.0).unwrap();
        assert_eq!(q.pump.center, 92.0);
        assert_eq!(q.stokes.width, 16.0);
        assert_eq!(q.pump.amp, 0.8);
        assert_eq!(p.apply_time_scaling(1.0).unwrap(), p);
        assert!(p.apply_time_scaling(0.0).is_err());
        assert!(p.apply_time_scaling(-1.0).is_err());
    }

    #[test]
    fn amplitude_scaling_is_linear_in_envelope() {
        let p = params(0.8, 0.4, 46.0, 34.0, 10.0, 8.0);
        let q = p.apply_amplitude_scaling(0.37).unwrap();
        for t in [0.0, 20.0, 46.0, 71.5] {
            for ch in Channel::BOTH {
                assert_relative_eq!(q.envelope(ch, t), 0.37 * p.envelope(ch, t));
            }
        }
        assert_eq!(p.apply_amplitude_scaling(0.0).unwrap().envelope(Channel::Pump, 46.0), 0.0);
    }

    #[test]
    fn scalings_preserve_counterintuitive_ordering() {
        let p = params(0.8, 0.4, 46.0, 34.0, 10.0, 8.0);
        assert!(p.counterintuitive_ordering());
        for eta in [0.1, 0.5, 2.0, 7.3] {
            assert!(p.apply_time_scaling(eta).unwrap().counterintuitive_ordering());
            assert!(p.apply_amplitude_scaling(eta).unwrap().counterintuitive_ordering());
        }
    }

    #[test]
    fn sampled_envelopes_symmetric_about_center() {
        let p = params(1.0, 0.0, 40.0, 40.0, 5.0, 5.0);
        let grid = TimeGrid::new(80.0, 160).unwrap();
        let s = p.sample_envelopes(&grid);
        assert_eq!(s.pump.len(), 161);
        for k in 0..=160 {
            assert_relative_eq!(s.pump[k], s.pump[160 - k], max_relative = 1e-12);
        }
        // peak node within one grid step of the peak value
        let peak = s.pump.iter().cloned().fold(0.0_f64, f64::max);
        assert!((peak - 1.0).abs() < 1e-12);
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        assert!(params(0.5, 0.5, 40.0, 30.0, 0.0, 8.0).validate().is_err());
        assert!(params(-0.1, 0.5, 40.0, 30.0, 5.0, 8.0).validate().is_err());
        assert!(params(0.5, 0.5, 40.0, 30.0, 5.0, 8.0).validate().is_ok());
    }

    #[test]
    fn projection_clamps_to_feasible_box() {
        let p = params(-0.5, 0.5, -3.0, 95.0, 0.1, 8.0).project_bounds(80.0);
        assert_eq!(p.pump.amp, 0.0);
        assert_eq!(p.pump.center, 0.0);
        assert_eq!(p.stokes.center, 80.0);
        assert_eq!(p.pump.width, MIN_WIDTH_NS);
        assert_eq!(p.stokes.width, 8.0);
    }
}
