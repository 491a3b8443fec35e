//! `stirap-pmp`: spectrum tables, population-transfer simulation, PMP pulse
//! optimization, gradient verification, and robustness scans for multilevel
//! chain systems, driven by a single JSON configuration.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numerical failure,
//! 3 verification failure (`gradcheck`).

mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use sha2::{Digest, Sha256};

use stirap_pmp_core::dynamics::{basis_state, populations, propagate, TimeGrid, Trajectory};
use stirap_pmp_core::pmp::{
    gradient_descent, objective, parameter_gradient, trust_region_optimize, CostWeights,
};
use stirap_pmp_core::pulses::{GaussianParams, PARAM_COUNT};
use stirap_pmp_core::robustness::{
    effective_duration, evaluate_point, scan_metadata, Perturbation, ScanPoint, ScanResult,
};
use stirap_pmp_core::transmon::zpf_amplitudes;

use config::{classify, Model, RunConfig};
use output::{ensure_dir, fmt_f64, out_path, write_json, write_scan_csv, write_trajectory_csv};

const PARAM_NAMES: [&str; PARAM_COUNT] =
    ["amp_pump", "amp_stokes", "center_pump", "center_stokes", "width_pump", "width_stokes"];

/// Exit-code classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Config = 1,
    Numerical = 2,
    Acceptance = 3,
}

#[derive(Debug)]
pub struct CliError {
    kind: ExitKind,
    message: String,
}

impl CliError {
    pub fn config(msg: impl std::fmt::Display) -> Self {
        Self { kind: ExitKind::Config, message: msg.to_string() }
    }
    pub fn numerical(msg: impl std::fmt::Display) -> Self {
        Self { kind: ExitKind::Numerical, message: msg.to_string() }
    }
    pub fn acceptance(msg: impl std::fmt::Display) -> Self {
        Self { kind: ExitKind::Acceptance, message: msg.to_string() }
    }
    fn from_core(err: stirap_pmp_core::Error) -> Self {
        Self { kind: classify(&err), message: err.to_string() }
    }
}

#[derive(Parser)]
#[command(
    name = "stirap-pmp",
    version,
    about = "STIRAP pulse optimization in multilevel chains via Pontryagin gradients"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output_dir` from the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override a config key by dotted path, e.g. `--set grid.steps=4000`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Backend {
    TrustRegion,
    GradientDescent,
}

#[derive(Subcommand)]
enum Command {
    /// Print and export the level spectrum, transitions, and detunings.
    Spectrum {
        #[command(flatten)]
        common: Common,
    },
    /// Propagate a protocol and export trajectory, populations, summary.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Load pulse parameters from a JSON file (e.g. optimize output)
        /// instead of the config's `pulses`.
        #[arg(long)]
        params_file: Option<PathBuf>,
    },
    /// Optimize the pulse parameters and export convergence data plus
    /// before/after simulations.
    Optimize {
        #[command(flatten)]
        common: Common,
        /// Optimization backend.
        #[arg(long, value_enum, default_value = "trust-region")]
        backend: Backend,
    },
    /// Compare the adjoint parameter gradient against finite differences.
    Gradcheck {
        #[command(flatten)]
        common: Common,
        /// Negative control: corrupt the analytic gradient before comparing.
        #[arg(long, hide = true)]
        corrupt_gradient: bool,
    },
    /// One-dimensional robustness scan over the configured knob.
    Scan1d {
        #[command(flatten)]
        common: Common,
        /// Worker threads for scan-point evaluation.
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Load the optimized protocol from a JSON file instead of the
        /// config's `optimized_pulses`.
        #[arg(long)]
        optimized_file: Option<PathBuf>,
    },
    /// Two-dimensional robustness scan over the configured knob pair.
    Scan2d {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long)]
        optimized_file: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("STIRAP_PMP_LOG", "warn"))
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        Err(e) => {
            // --help / --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.kind as u8)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Spectrum { common } => {
            let (config, out) = setup(&common)?;
            cmd_spectrum(&config, &out)
        }
        Command::Simulate { common, params_file } => {
            let (config, out) = setup(&common)?;
            cmd_simulate(&config, &out, params_file.as_deref())
        }
        Command::Optimize { common, backend } => {
            let (config, out) = setup(&common)?;
            cmd_optimize(&config, &out, backend)
        }
        Command::Gradcheck { common, corrupt_gradient } => {
            let (config, out) = setup(&common)?;
            cmd_gradcheck(&config, &out, corrupt_gradient)
        }
        Command::Scan1d { common, workers, optimized_file } => {
            let (config, out) = setup(&common)?;
            cmd_scan(&config, &out, false, workers, optimized_file.as_deref())
        }
        Command::Scan2d { common, workers, optimized_file } => {
            let (config, out) = setup(&common)?;
            cmd_scan(&config, &out, true, workers, optimized_file.as_deref())
        }
    }
}

fn setup(common: &Common) -> Result<(RunConfig, PathBuf), CliError> {
    let config = RunConfig::load(&common.config, &common.set)?;
    let out = common.out.clone().unwrap_or_else(|| PathBuf::from(&config.output_dir));
    ensure_dir(&out)?;
    write_json(&out_path(&out, "config_used.json"), &config)?;
    Ok((config, out))
}

fn config_hash(config: &RunConfig) -> String {
    let text = serde_json::to_string(config).expect("config serializes");
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    format!("{:x}", hasher.finalize())
}

fn load_params(path: &Path) -> Result<GaussianParams<f64>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let params: GaussianParams<f64> = serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    params.validate().map_err(CliError::config)?;
    Ok(params)
}

fn simulate_protocol(
    config: &RunConfig,
    model: &Model,
    params: &GaussianParams<f64>,
) -> Result<(Trajectory<f64>, serde_json::Value), CliError> {
    let system = model.system()?;
    let grid = model.grid();
    let partition = model.partition();
    let weights = config.cost_weights(partition);
    let psi0 = basis_state(system.dimension(), 0);
    let trajectory = propagate(&system, params, &grid, &psi0).map_err(CliError::from_core)?;
    let record = populations(&trajectory, &partition);
    let report = objective(&system, params, &weights, &grid, &psi0).map_err(CliError::from_core)?;
    let summary = json!({
        "fidelity": record.final_fidelity,
        "max_leakage": record.max_leakage,
        "effective_duration_ns": effective_duration(params, grid.t_final()),
        "objective": {
            "total": report.total,
            "terminal": report.terminal,
            "running": report.running,
        },
        "counterintuitive_ordering": params.counterintuitive_ordering(),
        "grid": {"duration": grid.t_final(), "steps": grid.steps()},
    });
    Ok((trajectory, summary))
}

fn cmd_spectrum(config: &RunConfig, out: &Path) -> Result<(), CliError> {
    let model = config.build_model()?;
    let scenario = model.scenario()?;
    let spectrum = &scenario.spectrum;
    let frame = scenario.frame().map_err(CliError::config)?;
    let xi = scenario.transmon.xi();
    let (phi_zpf, n_zpf) = zpf_amplitudes(&scenario.transmon).map_err(CliError::config)?;
    let n = spectrum.level_count();

    let mut w = output::csv_writer(&out_path(out, "spectrum.csv"))?;
    w.write_record(["level", "energy", "transition", "anharmonicity", "detuning", "xi"])
        .map_err(|e| CliError::config(e.to_string()))?;
    println!(
        "{:>5} {:>14} {:>14} {:>14} {:>14}",
        "level", "E_n (rad/ns)", "w_n+1,n", "anharm", "detuning"
    );
    for lvl in 0..n {
        let transition =
            if lvl + 1 < n { Some(spectrum.transition(lvl)) } else { None };
        let anharm = if lvl >= 1 && lvl + 1 < n {
            Some(spectrum.transition(lvl) - spectrum.transition(lvl - 1))
        } else {
            None
        };
        let detuning = frame.detunings.get(lvl).copied();
        w.write_record([
            lvl.to_string(),
            fmt_f64(spectrum.energy(lvl)),
            transition.map(fmt_f64).unwrap_or_default(),
            anharm.map(fmt_f64).unwrap_or_default(),
            detuning.map(fmt_f64).unwrap_or_default(),
            fmt_f64(xi),
        ])
        .map_err(|e| CliError::config(e.to_string()))?;
        println!(
            "{:>5} {:>14.6} {:>14} {:>14} {:>14}",
            lvl,
            spectrum.energy(lvl),
            transition.map(|t| format!("{t:.6}")).unwrap_or_default(),
            anharm.map(|a| format!("{a:.6}")).unwrap_or_default(),
            detuning.map(|d| format!("{d:.6}")).unwrap_or_default(),
        );
    }
    w.flush().map_err(|e| CliError::config(e.to_string()))?;

    write_json(
        &out_path(out, "spectrum_summary.json"),
        &json!({
            "xi": xi,
            "omega0": scenario.transmon.omega0(),
            "phi_zpf": phi_zpf,
            "n_zpf": n_zpf,
            "anharmonicity": spectrum.anharmonicity(),
            "pump_frequency": scenario.pump_frequency,
            "stokes_frequency": scenario.stokes_frequency,
            "detunings": frame.detunings,
        }),
    )?;
    println!("xi = {xi:.6}, phi_zpf*n_zpf = {:.6}", phi_zpf * n_zpf);
    Ok(())
}

fn cmd_simulate(
    config: &RunConfig,
    out: &Path,
    params_file: Option<&Path>,
) -> Result<(), CliError> {
    let model = config.build_model()?;
    let params = match params_file {
        Some(path) => load_params(path)?,
        None => config.pulses,
    };
    let (trajectory, summary) = simulate_protocol(config, &model, &params)?;
    write_trajectory_csv(&out_path(out, "trajectory.csv"), &trajectory, &model.partition())?;
    write_json(&out_path(out, "summary.json"), &summary)?;
    println!(
        "fidelity {:.6}  max leakage {:.6}  T_eff {:.2} ns",
        summary["fidelity"].as_f64().unwrap_or(f64::NAN),
        summary["max_leakage"].as_f64().unwrap_or(f64::NAN),
        summary["effective_duration_ns"].as_f64().unwrap_or(f64::NAN),
    );
    Ok(())
}

fn cmd_optimize(config: &RunConfig, out: &Path, backend: Backend) -> Result<(), CliError> {
    let model = config.build_model()?;
    let system = model.system()?;
    let grid = model.grid();
    let partition = model.partition();
    let weights: CostWeights<f64> = config.cost_weights(partition);
    let psi0 = basis_state(system.dimension(), 0);

    let optimized = match backend {
        Backend::TrustRegion => {
            let (params, state) = trust_region_optimize(
                &system,
                &config.pulses,
                &weights,
                &grid,
                &psi0,
                &config.optimizer.to_core(),
            )
            .map_err(CliError::from_core)?;
            let mut w = output::csv_writer(&out_path(out, "convergence.csv"))?;
            let mut header =
                vec!["iteration", "objective", "gradient_norm", "radius", "rho", "accepted"];
            header.extend(PARAM_NAMES);
            w.write_record(&header).map_err(|e| CliError::config(e.to_string()))?;
            let t_final = grid.t_final();
            let scale = [1.0, 1.0, t_final, t_final, t_final, t_final];
            for rec in &state.history {
                let mut row = vec![
                    rec.iteration.to_string(),
                    fmt_f64(rec.objective),
                    fmt_f64(rec.gradient_norm),
                    fmt_f64(rec.radius),
                    rec.rho.map(fmt_f64).unwrap_or_default(),
                    rec.accepted.to_string(),
                ];
                row.extend(rec.position.iter().zip(&scale).map(|(x, s)| fmt_f64(x * s)));
                w.write_record(&row).map_err(|e| CliError::config(e.to_string()))?;
            }
            w.flush().map_err(|e| CliError::config(e.to_string()))?;
            params
        }
        Backend::GradientDescent => {
            let (params, log) = gradient_descent(
                &system,
                &config.pulses,
                &weights,
                &grid,
                &psi0,
                &config.descent.to_core(),
            )
            .map_err(CliError::from_core)?;
            let mut w = output::csv_writer(&out_path(out, "convergence.csv"))?;
            w.write_record([
                "iteration",
                "objective",
                "gradient_norm",
                "step",
                "update_norm",
                "accepted",
            ])
            .map_err(|e| CliError::config(e.to_string()))?;
            for rec in &log {
                w.write_record([
                    rec.iteration.to_string(),
                    fmt_f64(rec.objective),
                    fmt_f64(rec.gradient_norm),
                    fmt_f64(rec.step),
                    fmt_f64(rec.update_norm),
                    rec.moved.to_string(),
                ])
                .map_err(|e| CliError::config(e.to_string()))?;
            }
            w.flush().map_err(|e| CliError::config(e.to_string()))?;
            params
        }
    };

    let (before, before_summary) = simulate_protocol(config, &model, &config.pulses)?;
    let (after, after_summary) = simulate_protocol(config, &model, &optimized)?;
    write_trajectory_csv(&out_path(out, "sim_initial.csv"), &before, &partition)?;
    write_trajectory_csv(&out_path(out, "sim_optimized.csv"), &after, &partition)?;
    write_json(&out_path(out, "optimized_params.json"), &optimized)?;
    write_json(
        &out_path(out, "summary.json"),
        &json!({
            "backend_used": match backend {
                Backend::TrustRegion => "trust-region",
                Backend::GradientDescent => "gradient-descent",
            },
            "backends_available": ["trust-region", "gradient-descent"],
            "initial": before_summary,
            "optimized": after_summary,
            "initial_params": config.pulses,
            "optimized_params": optimized,
        }),
    )?;
    println!(
        "fidelity {:.6} -> {:.6}; max leakage {:.6} -> {:.6}",
        before_summary["fidelity"].as_f64().unwrap_or(f64::NAN),
        after_summary["fidelity"].as_f64().unwrap_or(f64::NAN),
        before_summary["max_leakage"].as_f64().unwrap_or(f64::NAN),
        after_summary["max_leakage"].as_f64().unwrap_or(f64::NAN),
    );
    Ok(())
}

fn cmd_gradcheck(config: &RunConfig, out: &Path, corrupt: bool) -> Result<(), CliError> {
    let model = config.build_model()?;
    let system = model.system()?;
    let partition = model.partition();
    let weights = config.cost_weights(partition);
    let psi0 = basis_state(system.dimension(), 0);

    // gradient verification needs a finer grid than population plots; take
    // whichever of the configured and rule-derived grids is finer
    let configured = model.grid();
    let min_width = config.pulses.pump.width.min(config.pulses.stokes.width);
    let h_norm = system
        .detunings()
        .iter()
        .fold(0.0_f64, |acc, d| acc.max(d.abs()))
        + config.pulses.pump.amp.max(config.pulses.stokes.amp)
            * system.links().iter().fold(0.0_f64, |acc, l| acc.max(l.scale));
    let refined = TimeGrid::with_resolution(configured.t_final(), min_width, h_norm, 0.002)
        .map_err(CliError::config)?;
    let grid = if refined.steps() > configured.steps() { refined } else { configured };

    let report = parameter_gradient(&system, &config.pulses, &weights, &grid, &psi0)
        .map_err(CliError::from_core)?;
    let mut analytic = report.gradient;
    if corrupt {
        analytic[0] = -analytic[0] + 0.1;
        log::warn!("gradient corrupted for negative-control testing");
    }

    // per-node functional gradients, for plotting
    let mut w = output::csv_writer(&out_path(out, "functional_gradient.csv"))?;
    w.write_record(["t", "djd_omega_pump", "djd_omega_stokes"])
        .map_err(|e| CliError::config(e.to_string()))?;
    for k in 0..grid.node_count() {
        w.write_record([
            fmt_f64(grid.node(k)),
            fmt_f64(report.functional.pump[k]),
            fmt_f64(report.functional.stokes[k]),
        ])
        .map_err(|e| CliError::config(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::config(e.to_string()))?;
    write_json(
        &out_path(out, "gradient.json"),
        &json!({
            "parameter_names": PARAM_NAMES,
            "gradient": report.gradient,
            "gradient_norm": report.gradient_norm(),
            "objective": {
                "total": report.objective.total,
                "terminal": report.objective.terminal,
                "running": report.objective.running,
            },
            "grid": {"duration": grid.t_final(), "steps": grid.steps()},
        }),
    )?;

    let u = config.pulses.to_array();
    let mut rows = Vec::new();
    let mut all_pass = true;
    println!(
        "{:>14} {:>24} {:>24} {:>12} {:>12} {:>6}",
        "parameter", "analytic", "finite_diff", "abs_err", "rel_err", "pass"
    );
    for k in 0..PARAM_COUNT {
        let eps = 1e-4 * u[k].abs().max(1.0);
        let diff = |e: f64| -> Result<f64, CliError> {
            let mut up = u;
            up[k] += e;
            let mut dn = u;
            dn[k] -= e;
            let jp = objective(&system, &GaussianParams::from_array(up), &weights, &grid, &psi0)
                .map_err(CliError::from_core)?
                .total;
            let jm = objective(&system, &GaussianParams::from_array(dn), &weights, &grid, &psi0)
                .map_err(CliError::from_core)?
                .total;
            Ok((jp - jm) / (2.0 * e))
        };
        // Richardson extrapolation of the central difference
        let numeric = (4.0 * diff(eps / 2.0)? - diff(eps)?) / 3.0;
        let abs_err = (analytic[k] - numeric).abs();
        let rel_err = abs_err / numeric.abs().max(f64::MIN_POSITIVE);
        let pass = rel_err < 1e-5 || abs_err < 1e-8;
        all_pass &= pass;
        println!(
            "{:>14} {:>24} {:>24} {:>12.3e} {:>12.3e} {:>6}",
            PARAM_NAMES[k],
            fmt_f64(analytic[k]),
            fmt_f64(numeric),
            abs_err,
            rel_err,
            pass
        );
        rows.push((PARAM_NAMES[k], analytic[k], numeric, abs_err, rel_err, pass));
    }

    let mut w = output::csv_writer(&out_path(out, "gradcheck.csv"))?;
    w.write_record(["parameter", "analytic", "finite_diff", "abs_err", "rel_err", "pass"])
        .map_err(|e| CliError::config(e.to_string()))?;
    for (name, a, n, abs_err, rel_err, pass) in &rows {
        w.write_record([
            name.to_string(),
            fmt_f64(*a),
            fmt_f64(*n),
            fmt_f64(*abs_err),
            fmt_f64(*rel_err),
            pass.to_string(),
        ])
        .map_err(|e| CliError::config(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::config(e.to_string()))?;

    if all_pass {
        println!("gradient check passed (grid steps: {})", grid.steps());
        Ok(())
    } else {
        Err(CliError::acceptance("analytic gradient disagrees with finite differences"))
    }
}

fn cmd_scan(
    config: &RunConfig,
    out: &Path,
    two_dimensional: bool,
    workers: usize,
    optimized_file: Option<&Path>,
) -> Result<(), CliError> {
    let scan_config = config
        .scan
        .as_ref()
        .ok_or_else(|| CliError::config("config has no `scan` section"))?;
    let model = config.build_model()?;
    let initial = config.pulses;
    let optimized = match optimized_file {
        Some(path) => Some(load_params(path)?),
        None => config.optimized_pulses,
    };
    let optimized = match optimized {
        Some(p) => p,
        None => {
            log::warn!(
                "no optimized protocol given (config `optimized_pulses` or --optimized-file); \
                 scanning the initial protocol against itself"
            );
            initial
        }
    };

    let primary_values = scan_config.primary.values.materialize();
    if primary_values.is_empty() {
        return Err(CliError::config("scan primary axis has no values"));
    }
    let primary_knob = scan_config.primary.knob;
    let (secondary_knob, secondary_values) = if two_dimensional {
        let axis = scan_config
            .secondary
            .as_ref()
            .ok_or_else(|| CliError::config("scan2d needs a `scan.secondary` axis"))?;
        let values = axis.values.materialize();
        if values.is_empty() {
            return Err(CliError::config("scan secondary axis has no values"));
        }
        (Some(axis.knob), Some(values))
    } else {
        (None, None)
    };

    // full Cartesian product, row-major in the primary values
    let mut tasks: Vec<(f64, Option<f64>)> = Vec::new();
    match &secondary_values {
        Some(secondary) => {
            for v1 in &primary_values {
                for v2 in secondary {
                    tasks.push((*v1, Some(*v2)));
                }
            }
        }
        None => tasks.extend(primary_values.iter().map(|v| (*v, None))),
    }

    let scenario = model.scenario()?;
    let evaluate = |&(v1, v2): &(f64, Option<f64>)| -> ScanPoint<f64> {
        let mut perts = vec![Perturbation { knob: primary_knob, value: v1 }];
        if let (Some(knob), Some(value)) = (secondary_knob, v2) {
            perts.push(Perturbation { knob, value });
        }
        evaluate_point(scenario, &initial, &optimized, &perts, v1, v2)
    };
    let points: Vec<ScanPoint<f64>> = if workers > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| CliError::config(format!("cannot build worker pool: {e}")))?;
        pool.install(|| tasks.par_iter().map(evaluate).collect())
    } else {
        tasks.iter().map(evaluate).collect()
    };

    for point in &points {
        if let Some(err) = &point.error {
            log::warn!("scan point ({}, {:?}) failed: {err}", point.primary, point.secondary);
        }
    }

    let scan = ScanResult {
        primary_knob,
        primary_values,
        secondary_knob,
        secondary_values,
        points,
        metadata: scan_metadata(scenario, &initial, &optimized).map_err(CliError::from_core)?,
    };
    write_scan_csv(&out_path(out, "scan.csv"), &scan)?;
    write_json(
        &out_path(out, "scan.json"),
        &json!({
            "config_hash": config_hash(config),
            "workers": workers,
            "result": scan,
        }),
    )?;
    println!(
        "scanned {} points over {:?}{}",
        scan.points.len(),
        scan.primary_knob,
        scan.secondary_knob.map(|k| format!(" x {k:?}")).unwrap_or_default()
    );
    Ok(())
}
