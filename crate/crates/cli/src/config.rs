//! Run configuration: a single JSON document, with dotted-path `--set`
//! overrides applied before deserialization.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use stirap_pmp_core::chain::{ChainSystem, Decay, Link, SubspacePartition};
use stirap_pmp_core::dynamics::TimeGrid;
use stirap_pmp_core::pmp::{CostWeights, DescentConfig};
use stirap_pmp_core::optimizer::TrustRegionConfig;
use stirap_pmp_core::pulses::GaussianParams;
use stirap_pmp_core::robustness::{Knob, Scenario};
use stirap_pmp_core::transmon::{
    build_frame, chain_from_transmon, level_spectrum, resonant_frequencies, TransmonSpec,
};

use crate::{CliError, ExitKind};

/// Direct N-level chain specification, the alternative to a transmon spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub detunings: Vec<f64>,
    pub links: Vec<Link<f64>>,
    #[serde(default)]
    pub dissipation: Vec<Decay<f64>>,
}

/// Rotating-frame selection: two-photon resonant auto mode, or explicit
/// drive frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum FrameConfig {
    Resonant {
        #[serde(default)]
        pump_phase: f64,
        #[serde(default)]
        stokes_phase: f64,
    },
    Explicit {
        pump_frequency: f64,
        stokes_frequency: f64,
        #[serde(default)]
        pump_phase: f64,
        #[serde(default)]
        stokes_phase: f64,
    },
}

impl Default for FrameConfig {
    fn default() -> Self {
        FrameConfig::Resonant { pump_phase: 0.0, stokes_phase: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsConfig {
    pub terminal: f64,
    pub intermediate: f64,
    pub leakage: f64,
    #[serde(default = "default_penalized")]
    pub penalized_levels: Vec<usize>,
    /// Highest target level m; leakage manifold is {m+1, ..}.
    #[serde(default = "default_boundary")]
    pub target_boundary: usize,
}

fn default_penalized() -> Vec<usize> {
    vec![1]
}

fn default_boundary() -> usize {
    2
}

impl Default for WeightsConfig {
    fn default() -> Self {
        Self {
            terminal: 1.0,
            intermediate: 0.01,
            leakage: 0.05,
            penalized_levels: default_penalized(),
            target_boundary: default_boundary(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Protocol duration T (ns).
    pub duration: f64,
    /// Node spacing count; when absent the resolution rule picks it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    /// Bound on h·‖H‖ used by the automatic resolution rule.
    #[serde(default = "default_stage_bound")]
    pub stage_bound: f64,
}

fn default_stage_bound() -> f64 {
    0.05
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSettings {
    pub initial_radius: f64,
    pub max_radius: f64,
    pub acceptance: f64,
    pub gradient_tolerance: f64,
    pub max_iterations: usize,
    pub initial_curvature: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        let d = TrustRegionConfig::<f64>::default();
        Self {
            initial_radius: d.initial_radius,
            max_radius: d.max_radius,
            acceptance: d.acceptance,
            gradient_tolerance: d.gradient_tolerance,
            max_iterations: 150,
            initial_curvature: d.initial_curvature,
        }
    }
}

impl OptimizerSettings {
    pub fn to_core(self) -> TrustRegionConfig<f64> {
        TrustRegionConfig {
            initial_radius: self.initial_radius,
            max_radius: self.max_radius,
            acceptance: self.acceptance,
            gradient_tolerance: self.gradient_tolerance,
            max_iterations: self.max_iterations,
            initial_curvature: self.initial_curvature,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DescentSettings {
    pub step: f64,
    pub min_step: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for DescentSettings {
    fn default() -> Self {
        let d = DescentConfig::<f64>::default();
        Self {
            step: d.step,
            min_step: d.min_step,
            tolerance: d.tolerance,
            max_iterations: d.max_iterations,
        }
    }
}

impl DescentSettings {
    pub fn to_core(self) -> DescentConfig<f64> {
        DescentConfig {
            step: self.step,
            min_step: self.min_step,
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
        }
    }
}

/// Scan axis values: an explicit list or a uniform range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AxisValues {
    List(Vec<f64>),
    Range { start: f64, stop: f64, count: usize },
}

impl AxisValues {
    pub fn materialize(&self) -> Vec<f64> {
        match self {
            AxisValues::List(v) => v.clone(),
            AxisValues::Range { start, stop, count } => {
                if *count <= 1 {
                    vec![*start]
                } else {
                    (0..*count)
                        .map(|k| start + (stop - start) * k as f64 / (*count as f64 - 1.0))
                        .collect()
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanAxis {
    pub knob: Knob,
    pub values: AxisValues,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub primary: ScanAxis,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secondary: Option<ScanAxis>,
}

/// The whole run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transmon: Option<TransmonSpec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainConfig>,
    #[serde(default)]
    pub frame: FrameConfig,
    /// Per-level nearest-neighbor decay rates γ_n (transmon mode).
    #[serde(default)]
    pub decay_rates: Vec<f64>,
    #[serde(default)]
    pub weights: WeightsConfig,
    /// Initial protocol.
    pub pulses: GaussianParams<f64>,
    /// Optimized protocol, e.g. pasted from `optimize` output; used by the
    /// scan commands.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimized_pulses: Option<GaussianParams<f64>>,
    pub grid: GridConfig,
    #[serde(default)]
    pub optimizer: OptimizerSettings,
    #[serde(default)]
    pub descent: DescentSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanConfig>,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    /// Seed for randomized commands (reserved; all shipped commands are
    /// deterministic).
    #[serde(default)]
    pub seed: u64,
}

fn default_output_dir() -> String {
    "out".into()
}

/// Model built from the config: a full transmon scenario, or a direct chain.
pub enum Model {
    Transmon(Scenario<f64>),
    Direct { system: ChainSystem<f64>, grid: TimeGrid<f64>, partition: SubspacePartition },
}

impl Model {
    pub fn system(&self) -> Result<ChainSystem<f64>, CliError> {
        match self {
            Model::Transmon(s) => s.chain().map_err(CliError::config),
            Model::Direct { system, .. } => Ok(system.clone()),
        }
    }

    pub fn grid(&self) -> TimeGrid<f64> {
        match self {
            Model::Transmon(s) => s.grid,
            Model::Direct { grid, .. } => *grid,
        }
    }

    pub fn partition(&self) -> SubspacePartition {
        match self {
            Model::Transmon(s) => s.partition,
            Model::Direct { partition, .. } => *partition,
        }
    }

    pub fn scenario(&self) -> Result<&Scenario<f64>, CliError> {
        match self {
            Model::Transmon(s) => Ok(s),
            Model::Direct { .. } => Err(CliError::config(
                "this command needs a transmon spec; frequency-level scans are \
                 undefined for a direct chain configuration",
            )),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        let mut value: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        for pair in overrides {
            apply_override(&mut value, pair)?;
        }
        let config: RunConfig = serde_json::from_value(value)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        match (&self.transmon, &self.chain) {
            (Some(_), Some(_)) => {
                return Err(CliError::config(
                    "config must contain exactly one of `transmon` or `chain`, found both",
                ))
            }
            (None, None) => {
                return Err(CliError::config(
                    "config must contain exactly one of `transmon` or `chain`, found neither",
                ))
            }
            _ => {}
        }
        self.pulses.validate().map_err(CliError::config)?;
        if let Some(p) = &self.optimized_pulses {
            p.validate().map_err(CliError::config)?;
        }
        Ok(())
    }

    /// Upper bound on the Hamiltonian magnitude, for the resolution rule.
    fn hamiltonian_norm_bound(&self, system: &ChainSystem<f64>) -> f64 {
        let max_detuning =
            system.detunings().iter().fold(0.0_f64, |acc, d| acc.max(d.abs()));
        let max_scale = system.links().iter().fold(0.0_f64, |acc, l| acc.max(l.scale));
        let max_amp = self.pulses.pump.amp.max(self.pulses.stokes.amp).max(
            self.optimized_pulses
                .map(|p| p.pump.amp.max(p.stokes.amp))
                .unwrap_or(0.0),
        );
        max_detuning + max_amp * max_scale
    }

    fn build_grid(&self, system: &ChainSystem<f64>) -> Result<TimeGrid<f64>, CliError> {
        match self.grid.steps {
            Some(steps) => TimeGrid::new(self.grid.duration, steps).map_err(CliError::config),
            None => {
                let min_width = self.pulses.pump.width.min(self.pulses.stokes.width);
                TimeGrid::with_resolution(
                    self.grid.duration,
                    min_width,
                    self.hamiltonian_norm_bound(system),
                    self.grid.stage_bound,
                )
                .map_err(CliError::config)
            }
        }
    }

    pub fn build_model(&self) -> Result<Model, CliError> {
        if let Some(transmon) = &self.transmon {
            let spectrum = level_spectrum(transmon).map_err(CliError::config)?;
            let (pump_frequency, stokes_frequency, pump_phase, stokes_phase) = match self.frame {
                FrameConfig::Resonant { pump_phase, stokes_phase } => {
                    let (wp, ws) = resonant_frequencies(&spectrum);
                    (wp, ws, pump_phase, stokes_phase)
                }
                FrameConfig::Explicit {
                    pump_frequency,
                    stokes_frequency,
                    pump_phase,
                    stokes_phase,
                } => (pump_frequency, stokes_frequency, pump_phase, stokes_phase),
            };
            let mut decay_rates = self.decay_rates.clone();
            if decay_rates.is_empty() {
                decay_rates = vec![0.0; transmon.levels];
            }
            let frame =
                build_frame(&spectrum, pump_frequency, stokes_frequency, pump_phase, stokes_phase)
                    .map_err(CliError::config)?;
            let system = chain_from_transmon(transmon, &frame, &decay_rates)
                .map_err(CliError::config)?;
            let grid = self.build_grid(&system)?;
            let partition =
                SubspacePartition::new(transmon.levels, self.weights.target_boundary)
                    .map_err(CliError::config)?;
            Ok(Model::Transmon(Scenario {
                transmon: *transmon,
                spectrum,
                pump_frequency,
                stokes_frequency,
                pump_phase,
                stokes_phase,
                decay_rates,
                grid,
                partition,
            }))
        } else {
            let chain = self.chain.as_ref().expect("validated: chain present");
            let system = ChainSystem::new(
                chain.detunings.clone(),
                chain.links.clone(),
                chain.dissipation.clone(),
            )
            .map_err(CliError::config)?;
            let grid = self.build_grid(&system)?;
            let partition =
                SubspacePartition::new(system.dimension(), self.weights.target_boundary)
                    .map_err(CliError::config)?;
            Ok(Model::Direct { system, grid, partition })
        }
    }

    pub fn cost_weights(&self, partition: SubspacePartition) -> CostWeights<f64> {
        CostWeights {
            terminal: self.weights.terminal,
            intermediate: self.weights.intermediate,
            leakage: self.weights.leakage,
            penalized_levels: self.weights.penalized_levels.clone(),
            partition,
        }
    }
}

/// Apply one `key.path=value` override to the raw JSON document. The value
/// is parsed as JSON when possible, falling back to a plain string.
fn apply_override(root: &mut Value, pair: &str) -> Result<(), CliError> {
    let (path, raw) = pair
        .split_once('=')
        .ok_or_else(|| CliError::config(format!("--set expects key=value, got `{pair}`")))?;
    let parsed: Value =
        serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut cursor = root;
    let segments: Vec<&str> = path.split('.').collect();
    for (i, segment) in segments.iter().enumerate() {
        if segment.is_empty() {
            return Err(CliError::config(format!("--set path `{path}` has an empty segment")));
        }
        if !cursor.is_object() {
            return Err(CliError::config(format!(
                "--set path `{path}` walks through a non-object at `{segment}`"
            )));
        }
        let map = cursor.as_object_mut().expect("checked above");
        if i + 1 == segments.len() {
            map.insert(segment.to_string(), parsed);
            return Ok(());
        }
        cursor = map
            .entry(segment.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("loop returns on the last segment");
}

/// The exit-code classification of a CLI failure.
pub fn classify(err: &stirap_pmp_core::Error) -> ExitKind {
    use stirap_pmp_core::Error::*;
    match err {
        Divergence { .. } | NotPositiveDefinite | DegenerateModel(_) | ObjectiveEvaluation
        | StepSizeExhausted { .. } => ExitKind::Numerical,
        _ => ExitKind::Config,
    }
}
