//! Perturbation knobs, improvement factors, and the 1D/2D robustness scan
//! harness comparing an initial against an optimized protocol.
//!
//! Every scan point perturbs the *same* base scenario, rebuilds the chain,
//! propagates both protocols from |0⟩, and records the final target-state
//! fidelities together with the improvement factor
//! `I = (1 − F_init)/(1 − F_opt)`.

use serde::{Deserialize, Serialize};

use crate::chain::{ChainSystem, SubspacePartition};
use crate::dynamics::{basis_state, propagate, TimeGrid};
use crate::error::{Error, Result};
use crate::pmp::CostWeights;
use crate::pulses::GaussianParams;
use crate::scalar::Real;
use crate::transmon::{
    build_frame, chain_from_transmon, level_spectrum, resonant_frequencies, FrameSpec,
    LevelSpectrum, TransmonSpec,
};

/// Floor on 1 − F_opt below which the improvement factor is capped.
pub const IMPROVEMENT_FLOOR: f64 = 1e-12;

/// Envelope threshold (fraction of the peak amplitude) defining the
/// effective protocol duration reported in summaries.
pub const DURATION_THRESHOLD: f64 = 1e-3;

/// A perturbation knob applied to the base scenario or pulse parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Knob {
    /// η_Ω: scale both drive amplitudes.
    AmplitudeScale,
    /// η_t: scale pulse centers, widths, and the grid window.
    TimeScale,
    /// η_α: scale the deviation of the spectrum from the harmonic ladder,
    /// holding ω_10 fixed.
    AnharmonicityScale,
    /// δ: Raman two-photon bias, realized as ω_s → ω_s − δ so that Δ_2
    /// shifts by +δ with Δ_1 untouched.
    RamanBias,
    /// δω_d: common shift of both drive frequencies.
    DriveFrequencyShift,
    /// δω: common drift of every adjacent transition frequency.
    TransitionDrift,
    /// δω_32: offset of the |2⟩↔|3⟩ transition (shifts the ladder above it).
    Offset32,
    /// δω_43: offset of the |3⟩↔|4⟩ transition.
    Offset43,
}

/// One knob with its value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Perturbation<R> {
    pub knob: Knob,
    pub value: R,
}

/// Everything needed to rebuild the driven chain from first principles:
/// circuit spec, (possibly perturbed) spectrum, drive frequencies and
/// phases, relaxation rates, time grid, and the target/leakage split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario<R> {
    pub transmon: TransmonSpec<R>,
    pub spectrum: LevelSpectrum<R>,
    pub pump_frequency: R,
    pub stokes_frequency: R,
    pub pump_phase: R,
    pub stokes_phase: R,
    pub decay_rates: Vec<R>,
    pub grid: TimeGrid<R>,
    pub partition: SubspacePartition,
}

impl<R: Real> Scenario<R> {
    /// The bundled reference configuration: E_J/E_C = 50 with
    /// ω_10/2π ≈ 4.76 GHz, resonant two-photon frame, weak relaxation
    /// (T_1 ≈ 50 µs scale), T = 80 ns.
    pub fn reference() -> Self {
        let transmon = TransmonSpec {
            charging_energy: R::of(std::f64::consts::TAU * 0.25),
            josephson_energy: R::of(std::f64::consts::TAU * 0.25 * 50.0),
            levels: 5,
        };
        let spectrum = level_spectrum(&transmon).expect("reference spec is valid");
        let (pump_frequency, stokes_frequency) = resonant_frequencies(&spectrum);
        Self {
            transmon,
            spectrum,
            pump_frequency,
            stokes_frequency,
            pump_phase: R::zero(),
            stokes_phase: R::zero(),
            decay_rates: [0.0, 2e-5, 4e-5, 6e-5, 8e-5].iter().map(|g| R::of(*g)).collect(),
            grid: TimeGrid::new(R::of(80.0), 8000).expect("reference grid is valid"),
            partition: SubspacePartition::new(5, 2).expect("reference partition is valid"),
        }
    }

    /// Counterintuitive Gaussian pair used as the reference initial protocol.
    pub fn reference_initial_params() -> GaussianParams<R> {
        GaussianParams::from_array([
            R::of(0.5),
            R::of(0.5),
            R::of(46.0),
            R::of(34.0),
            R::of(10.0),
            R::of(10.0),
        ])
    }

    /// Default transfer weights (w_f, w_1, w_leak) = (1, 0.01/ns, 0.05/ns).
    pub fn reference_weights(&self) -> CostWeights<R> {
        CostWeights::transfer(R::one(), R::of(0.01), R::of(0.05), self.partition)
    }

    pub fn frame(&self) -> Result<FrameSpec<R>> {
        build_frame(
            &self.spectrum,
            self.pump_frequency,
            self.stokes_frequency,
            self.pump_phase,
            self.stokes_phase,
        )
    }

    pub fn chain(&self) -> Result<ChainSystem<R>> {
        chain_from_transmon(&self.transmon, &self.frame()?, &self.decay_rates)
    }
}

/// Apply one perturbation, returning the perturbed scenario and parameters.
/// Nominal values (scale 1, offset 0) are exact identities.
pub fn apply_perturbation<R: Real>(
    scenario: &Scenario<R>,
    params: &GaussianParams<R>,
    perturbation: &Perturbation<R>,
) -> Result<(Scenario<R>, GaussianParams<R>)> {
    let mut out = scenario.clone();
    let mut p = *params;
    let v = perturbation.value;
    if !v.is_finite() {
        return Err(Error::InvalidScaling(format!("perturbation value must be finite, got {v}")));
    }
    match perturbation.knob {
        Knob::AmplitudeScale => {
            p = p.apply_amplitude_scaling(v)?;
        }
        Knob::TimeScale => {
            p = p.apply_time_scaling(v)?;
            out.grid = TimeGrid::new(scenario.grid.t_final() * v, scenario.grid.steps())?;
        }
        Knob::RamanBias => {
            out.stokes_frequency -= v;
        }
        Knob::DriveFrequencyShift => {
            out.pump_frequency += v;
            out.stokes_frequency += v;
        }
        Knob::TransitionDrift => {
            let energies = out
                .spectrum
                .energies()
                .iter()
                .enumerate()
                .map(|(n, e)| *e + R::of(n as f64) * v)
                .collect();
            out.spectrum = LevelSpectrum::from_energies(energies);
        }
        Knob::AnharmonicityScale => {
            if v < R::zero() {
                return Err(Error::InvalidScaling(format!(
                    "anharmonicity scale must be non-negative, got {v}"
                )));
            }
            let w10 = out.spectrum.transition(0);
            let energies = out
                .spectrum
                .energies()
                .iter()
                .enumerate()
                .map(|(n, e)| {
                    let harmonic = R::of(n as f64) * w10;
                    harmonic + v * (*e - harmonic)
                })
                .collect();
            out.spectrum = LevelSpectrum::from_energies(energies);
        }
        Knob::Offset32 => {
            let energies = out
                .spectrum
                .energies()
                .iter()
                .enumerate()
                .map(|(n, e)| if n >= 3 { *e + v } else { *e })
                .collect();
            out.spectrum = LevelSpectrum::from_energies(energies);
        }
        Knob::Offset43 => {
            let energies = out
                .spectrum
                .energies()
                .iter()
                .enumerate()
                .map(|(n, e)| if n >= 4 { *e + v } else { *e })
                .collect();
            out.spectrum = LevelSpectrum::from_energies(energies);
        }
    }
    Ok((out, p))
}

/// Improvement factor with its capping flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Improvement<R> {
    pub value: R,
    pub capped: bool,
}

/// I = (1 − F_init)/(1 − F_opt), capped when the denominator falls below
/// [`IMPROVEMENT_FLOOR`].
pub fn improvement_factor<R: Real>(f_init: R, f_opt: R) -> Improvement<R> {
    let err_init = R::one() - f_init;
    let err_opt = R::one() - f_opt;
    let floor = R::of(IMPROVEMENT_FLOOR);
    if err_opt < floor {
        Improvement { value: err_init / floor, capped: true }
    } else {
        Improvement { value: err_init / err_opt, capped: false }
    }
}

/// One evaluated scan point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint<R> {
    pub primary: R,
    pub secondary: Option<R>,
    pub f_init: R,
    pub f_opt: R,
    /// Absent when the denominator was capped or the point failed.
    pub improvement: Option<R>,
    pub capped: bool,
    /// Propagation failure, if any; the scan continues past it.
    pub error: Option<String>,
}

/// Nominal values recorded with every scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanMetadata<R> {
    pub pump_frequency: R,
    pub stokes_frequency: R,
    pub detunings: Vec<R>,
    pub decay_rates: Vec<R>,
    pub t_final: R,
    pub steps: usize,
    pub initial_params: GaussianParams<R>,
    pub optimized_params: GaussianParams<R>,
}

/// Scan output: axes, row-major points, and the nominal metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult<R> {
    pub primary_knob: Knob,
    pub primary_values: Vec<R>,
    pub secondary_knob: Option<Knob>,
    pub secondary_values: Option<Vec<R>>,
    pub points: Vec<ScanPoint<R>>,
    pub metadata: ScanMetadata<R>,
}

/// Terminal target-state fidelity of one protocol under a perturbation
/// stack applied left to right.
pub fn fidelity_under<R: Real>(
    scenario: &Scenario<R>,
    params: &GaussianParams<R>,
    perturbations: &[Perturbation<R>],
) -> Result<R> {
    let mut scn = scenario.clone();
    let mut p = *params;
    for pert in perturbations {
        let (s2, p2) = apply_perturbation(&scn, &p, pert)?;
        scn = s2;
        p = p2;
    }
    let chain = scn.chain()?;
    let traj = propagate(&chain, &p, &scn.grid, &basis_state(chain.dimension(), 0))?;
    Ok(traj.final_state()[scn.partition.target_level()].norm_sqr())
}

/// Nominal metadata block recorded with every scan.
pub fn scan_metadata<R: Real>(
    scenario: &Scenario<R>,
    initial: &GaussianParams<R>,
    optimized: &GaussianParams<R>,
) -> Result<ScanMetadata<R>> {
    Ok(ScanMetadata {
        pump_frequency: scenario.pump_frequency,
        stokes_frequency: scenario.stokes_frequency,
        detunings: scenario.frame()?.detunings,
        decay_rates: scenario.decay_rates.clone(),
        t_final: scenario.grid.t_final(),
        steps: scenario.grid.steps(),
        initial_params: *initial,
        optimized_params: *optimized,
    })
}

/// Evaluate both protocols at one perturbed point; failures are recorded
/// in the point rather than aborting the scan.
pub fn evaluate_point<R: Real>(
    scenario: &Scenario<R>,
    initial: &GaussianParams<R>,
    optimized: &GaussianParams<R>,
    perturbations: &[Perturbation<R>],
    primary: R,
    secondary: Option<R>,
) -> ScanPoint<R> {
    let f_init = fidelity_under(scenario, initial, perturbations);
    let f_opt = fidelity_under(scenario, optimized, perturbations);
    match (f_init, f_opt) {
        (Ok(fi), Ok(fo)) => {
            let imp = improvement_factor(fi, fo);
            ScanPoint {
                primary,
                secondary,
                f_init: fi,
                f_opt: fo,
                improvement: if imp.capped { None } else { Some(imp.value) },
                capped: imp.capped,
                error: None,
            }
        }
        (fi, fo) => ScanPoint {
            primary,
            secondary,
            f_init: fi.unwrap_or(R::nan()),
            f_opt: fo.unwrap_or(R::nan()),
            improvement: None,
            capped: false,
            error: Some("propagation failed at this point".into()),
        },
    }
}

/// Sweep one knob, evaluating both protocols under identical perturbations.
pub fn scan_1d<R: Real>(
    scenario: &Scenario<R>,
    initial: &GaussianParams<R>,
    optimized: &GaussianParams<R>,
    knob: Knob,
    values: &[R],
) -> Result<ScanResult<R>> {
    if values.is_empty() {
        return Err(Error::InvalidScaling("scan needs at least one value".into()));
    }
    let points = values
        .iter()
        .map(|v| {
            let pert = [Perturbation { knob, value: *v }];
            evaluate_point(scenario, initial, optimized, &pert, *v, None)
        })
        .collect();
    Ok(ScanResult {
        primary_knob: knob,
        primary_values: values.to_vec(),
        secondary_knob: None,
        secondary_values: None,
        points,
        metadata: scan_metadata(scenario, initial, optimized)?,
    })
}

/// Cartesian-product sweep over two knobs, row-major in the primary values.
pub fn scan_2d<R: Real>(
    scenario: &Scenario<R>,
    initial: &GaussianParams<R>,
    optimized: &GaussianParams<R>,
    primary: (Knob, &[R]),
    secondary: (Knob, &[R]),
) -> Result<ScanResult<R>> {
    let (knob1, values1) = primary;
    let (knob2, values2) = secondary;
    if values1.is_empty() || values2.is_empty() {
        return Err(Error::InvalidScaling("scan needs at least one value per axis".into()));
    }
    let mut points = Vec::with_capacity(values1.len() * values2.len());
    for v1 in values1 {
        for v2 in values2 {
            let perts = [
                Perturbation { knob: knob1, value: *v1 },
                Perturbation { knob: knob2, value: *v2 },
            ];
            points.push(evaluate_point(scenario, initial, optimized, &perts, *v1, Some(*v2)));
        }
    }
    Ok(ScanResult {
        primary_knob: knob1,
        primary_values: values1.to_vec(),
        secondary_knob: Some(knob2),
        secondary_values: Some(values2.to_vec()),
        points,
        metadata: scan_metadata(scenario, initial, optimized)?,
    })
}

/// Effective protocol duration: total time where either envelope stays at or
/// above [`DURATION_THRESHOLD`] times the larger peak amplitude, clipped to
/// the grid window.
pub fn effective_duration<R: Real>(params: &GaussianParams<R>, t_final: R) -> R {
    let peak = params.pump.amp.max(params.stokes.amp);
    if !(peak > R::zero()) {
        return R::zero();
    }
    let threshold = R::of(DURATION_THRESHOLD) * peak;
    let mut intervals: Vec<(R, R)> = Vec::new();
    for pulse in [&params.pump, &params.stokes] {
        if pulse.amp <= threshold {
            continue;
        }
        let half_width = pulse.width * (R::of(2.0) * (pulse.amp / threshold).ln()).sqrt();
        let lo = (pulse.center - half_width).max(R::zero());
        let hi = (pulse.center + half_width).min(t_final);
        if hi > lo {
            intervals.push((lo, hi));
        }
    }
    intervals.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite interval bounds"));
    let mut total = R::zero();
    let mut current: Option<(R, R)> = None;
    for (lo, hi) in intervals {
        match current {
            Some((clo, chi)) if lo <= chi => current = Some((clo, chi.max(hi))),
            Some((clo, chi)) => {
                total += chi - clo;
                current = Some((lo, hi));
            }
            None => current = Some((lo, hi)),
        }
    }
    if let Some((clo, chi)) = current {
        total += chi - clo;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn reference() -> (Scenario<f64>, GaussianParams<f64>) {
        (Scenario::reference(), Scenario::reference_initial_params())
    }

    #[test]
    fn nominal_perturbations_are_identities() {
        let (scn, params) = reference();
        for (knob, nominal) in [
            (Knob::AmplitudeScale, 1.0),
            (Knob::TimeScale, 1.0),
            (Knob::AnharmonicityScale, 1.0),
            (Knob::RamanBias, 0.0),
            (Knob::DriveFrequencyShift, 0.0),
            (Knob::TransitionDrift, 0.0),
            (Knob::Offset32, 0.0),
            (Knob::Offset43, 0.0),
        ] {
            let (s2, p2) =
                apply_perturbation(&scn, &params, &Perturbation { knob, value: nominal }).unwrap();
            assert_eq!(p2, params, "{knob:?}");
            assert_eq!(s2.frame().unwrap().detunings, scn.frame().unwrap().detunings, "{knob:?}");
            assert_eq!(s2.grid, scn.grid, "{knob:?}");
        }
    }

    #[test]
    fn amplitude_and_time_scalings_commute() {
        let (scn, params) = reference();
        let a = Perturbation { knob: Knob::AmplitudeScale, value: 1.07 };
        let t = Perturbation { knob: Knob::TimeScale, value: 0.93 };
        let (s1, p1) = apply_perturbation(&scn, &params, &a).unwrap();
        let (s1, p1) = apply_perturbation(&s1, &p1, &t).unwrap();
        let (s2, p2) = apply_perturbation(&scn, &params, &t).unwrap();
        let (s2, p2) = apply_perturbation(&s2, &p2, &a).unwrap();
        assert_eq!(p1, p2);
        assert_eq!(s1, s2);
    }

    #[test]
    fn drive_shift_moves_detunings_cumulatively() {
        let (scn, params) = reference();
        let x = 0.017;
        let base = scn.frame().unwrap().detunings;
        let (s2, _) = apply_perturbation(
            &scn,
            &params,
            &Perturbation { knob: Knob::DriveFrequencyShift, value: x },
        )
        .unwrap();
        let shifted = s2.frame().unwrap().detunings;
        for (n, weight) in [(1usize, 1.0), (2, 2.0), (3, 3.0), (4, 4.0)] {
            assert_relative_eq!(shifted[n] - base[n], -weight * x, max_relative = 1e-9);
        }
    }

    #[test]
    fn raman_bias_shifts_two_photon_detuning_only_through_stokes() {
        let (scn, params) = reference();
        let delta = 0.021;
        let base = scn.frame().unwrap().detunings;
        let (s2, _) =
            apply_perturbation(&scn, &params, &Perturbation { knob: Knob::RamanBias, value: delta })
                .unwrap();
        let d = s2.frame().unwrap().detunings;
        assert_relative_eq!(d[1], base[1]); // Δ_1 untouched
        assert_relative_eq!(d[2] - base[2], delta, max_relative = 1e-9);
        assert_relative_eq!(d[3] - base[3], delta, max_relative = 1e-9);
        assert_relative_eq!(d[4] - base[4], 2.0 * delta, max_relative = 1e-9);
    }

    #[test]
    fn ladder_offsets_move_only_upper_detunings() {
        let (scn, params) = reference();
        let x = 0.05;
        let base = scn.frame().unwrap().detunings;
        let (s2, _) =
            apply_perturbation(&scn, &params, &Perturbation { knob: Knob::Offset43, value: x })
                .unwrap();
        let d = s2.frame().unwrap().detunings;
        for n in 0..4 {
            assert_relative_eq!(d[n], base[n]);
        }
        assert_relative_eq!(d[4] - base[4], x, max_relative = 1e-9);

        let (s3, _) =
            apply_perturbation(&scn, &params, &Perturbation { knob: Knob::Offset32, value: x })
                .unwrap();
        let d = s3.frame().unwrap().detunings;
        for n in 0..3 {
            assert_relative_eq!(d[n], base[n]);
        }
        assert_relative_eq!(d[3] - base[3], x, max_relative = 1e-9);
        assert_relative_eq!(d[4] - base[4], x, max_relative = 1e-9);
    }

    #[test]
    fn transition_drift_shifts_each_level_by_index() {
        let (scn, params) = reference();
        let x = -0.013;
        let (s2, _) = apply_perturbation(
            &scn,
            &params,
            &Perturbation { knob: Knob::TransitionDrift, value: x },
        )
        .unwrap();
        for n in 0..5 {
            assert_relative_eq!(
                s2.spectrum.energy(n) - scn.spectrum.energy(n),
                n as f64 * x,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn anharmonicity_scale_fixes_first_transition() {
        let (scn, params) = reference();
        let eta = 1.3;
        let (s2, _) = apply_perturbation(
            &scn,
            &params,
            &Perturbation { knob: Knob::AnharmonicityScale, value: eta },
        )
        .unwrap();
        assert_relative_eq!(
            s2.spectrum.transition(0),
            scn.spectrum.transition(0),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            s2.spectrum.anharmonicity(),
            eta * scn.spectrum.anharmonicity(),
            max_relative = 1e-9
        );
    }

    #[test]
    fn time_scale_stretches_grid_window() {
        let (scn, params) = reference();
        let (s2, p2) =
            apply_perturbation(&scn, &params, &Perturbation { knob: Knob::TimeScale, value: 1.25 })
                .unwrap();
        assert_relative_eq!(s2.grid.t_final(), 100.0);
        assert_eq!(s2.grid.steps(), scn.grid.steps());
        assert_relative_eq!(p2.pump.center, params.pump.center * 1.25);
    }

    #[test]
    fn improvement_factor_values() {
        assert_relative_eq!(improvement_factor(0.9, 0.9).value, 1.0);
        let paper = improvement_factor(0.911, 0.998);
        assert!(!paper.capped);
        assert_relative_eq!(paper.value, 44.5, max_relative = 1e-12);
        let capped = improvement_factor(0.911, 1.0);
        assert!(capped.capped);
        let same = improvement_factor(1.0, 1.0);
        assert!(same.capped);
    }

    #[test]
    fn single_point_scan_reproduces_unperturbed_fidelities() {
        let (scn, params) = reference();
        // use a cheap grid for the test
        let mut scn = scn;
        scn.grid = TimeGrid::new(80.0, 1200).unwrap();
        let scan = scan_1d(&scn, &params, &params, Knob::AmplitudeScale, &[1.0]).unwrap();
        assert_eq!(scan.points.len(), 1);
        let chain = scn.chain().unwrap();
        let traj = propagate(&chain, &params, &scn.grid, &basis_state(5, 0)).unwrap();
        let f = traj.final_state()[2].norm_sqr();
        assert_relative_eq!(scan.points[0].f_init, f, epsilon = 1e-14);
        assert_relative_eq!(scan.points[0].f_opt, f, epsilon = 1e-14);
        assert_relative_eq!(scan.points[0].improvement.unwrap(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn scans_are_deterministic_and_row_major() {
        let (mut scn, params) = reference();
        scn.grid = TimeGrid::new(80.0, 600).unwrap();
        let vals1 = [0.95, 1.0, 1.05];
        let vals2 = [0.9, 1.1];
        let a = scan_2d(
            &scn,
            &params,
            &params,
            (Knob::AmplitudeScale, &vals1),
            (Knob::AnharmonicityScale, &vals2),
        )
        .unwrap();
        let b = scan_2d(
            &scn,
            &params,
            &params,
            (Knob::AmplitudeScale, &vals1),
            (Knob::AnharmonicityScale, &vals2),
        )
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(a.points.len(), 6);
        // row-major: primary varies slowest
        assert_eq!(a.points[0].primary, 0.95);
        assert_eq!(a.points[0].secondary, Some(0.9));
        assert_eq!(a.points[1].primary, 0.95);
        assert_eq!(a.points[1].secondary, Some(1.1));
        assert_eq!(a.points[2].primary, 1.0);
    }

    #[test]
    fn scan_rejects_empty_axes() {
        let (scn, params) = reference();
        assert!(scan_1d(&scn, &params, &params, Knob::RamanBias, &[]).is_err());
    }

    #[test]
    fn effective_duration_for_disjoint_and_overlapping_pulses() {
        // single pulse: width = 2σ√(2 ln(1/θ))
        let p = GaussianParams::from_array([1.0, 0.0, 40.0, 40.0, 5.0, 5.0]);
        let expected = 2.0 * 5.0 * (2.0 * (1.0_f64 / 1e-3).ln()).sqrt();
        assert_relative_eq!(effective_duration(&p, 1e4), expected, max_relative = 1e-12);

        // two identical overlapping pulses cover the same interval
        let p2 = GaussianParams::from_array([1.0, 1.0, 40.0, 40.0, 5.0, 5.0]);
        assert_relative_eq!(effective_duration(&p2, 1e4), expected, max_relative = 1e-12);

        // zero amplitude contributes nothing
        let p3 = GaussianParams::from_array([0.0, 0.0, 40.0, 30.0, 5.0, 5.0]);
        assert_eq!(effective_duration(&p3, 80.0), 0.0);

        // clipping to the window
        let p4 = GaussianParams::from_array([1.0, 0.0, 0.0, 0.0, 5.0, 5.0]);
        let half = 5.0 * (2.0 * (1.0_f64 / 1e-3).ln()).sqrt();
        assert_relative_eq!(effective_duration(&p4, 80.0), half, max_relative = 1e-12);
    }
}
