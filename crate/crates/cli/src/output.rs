//! CSV and JSON emission. All floating-point CSV fields carry 17
//! significant digits so downstream consumers can reproduce values bit-wise.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use stirap_pmp_core::chain::SubspacePartition;
use stirap_pmp_core::dynamics::{populations, Trajectory};
use stirap_pmp_core::robustness::ScanResult;

use crate::CliError;

/// 17-significant-digit representation, enough to round-trip an f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::config(format!("cannot create {}: {e}", dir.display())))
}

pub fn out_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let file = File::create(path)
        .map_err(|e| CliError::config(format!("cannot create {}: {e}", path.display())))?;
    serde_json::to_writer_pretty(&file, value)
        .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))?;
    writeln!(&file).ok();
    Ok(())
}

pub fn csv_writer(path: &Path) -> Result<csv::Writer<File>, CliError> {
    let file = File::create(path)
        .map_err(|e| CliError::config(format!("cannot create {}: {e}", path.display())))?;
    Ok(csv::Writer::from_writer(file))
}

fn finish(mut writer: csv::Writer<File>, path: &Path) -> Result<(), CliError> {
    writer
        .flush()
        .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))
}

/// Trajectory CSV: time, real/imaginary amplitudes, level populations, and
/// the leakage series.
pub fn write_trajectory_csv(
    path: &Path,
    trajectory: &Trajectory<f64>,
    partition: &SubspacePartition,
) -> Result<(), CliError> {
    let n = trajectory.dimension();
    let record = populations(trajectory, partition);
    let mut w = csv_writer(path)?;
    let mut header = vec!["t".to_string()];
    header.extend((0..n).map(|i| format!("re_{i}")));
    header.extend((0..n).map(|i| format!("im_{i}")));
    header.extend((0..n).map(|i| format!("p_{i}")));
    header.push("p_leak".into());
    w.write_record(&header).map_err(|e| CliError::config(e.to_string()))?;
    for (k, state) in trajectory.states().iter().enumerate() {
        let mut row = vec![fmt_f64(trajectory.grid().node(k))];
        row.extend(state.iter().map(|z| fmt_f64(z.re)));
        row.extend(state.iter().map(|z| fmt_f64(z.im)));
        row.extend(record.populations[k].iter().map(|p| fmt_f64(*p)));
        row.push(fmt_f64(record.leakage[k]));
        w.write_record(&row).map_err(|e| CliError::config(e.to_string()))?;
    }
    finish(w, path)
}

/// Scan CSV in long format: one row per evaluated point.
pub fn write_scan_csv(path: &Path, scan: &ScanResult<f64>) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    let primary_name = format!("{:?}", scan.primary_knob);
    let mut header = vec![primary_name];
    if let Some(knob) = scan.secondary_knob {
        header.push(format!("{knob:?}"));
    }
    header.extend(["f_init", "f_opt", "improvement", "capped", "error"].map(String::from));
    w.write_record(&header).map_err(|e| CliError::config(e.to_string()))?;
    for point in &scan.points {
        let mut row = vec![fmt_f64(point.primary)];
        if scan.secondary_knob.is_some() {
            row.push(fmt_f64(point.secondary.unwrap_or(f64::NAN)));
        }
        row.push(fmt_f64(point.f_init));
        row.push(fmt_f64(point.f_opt));
        row.push(point.improvement.map(fmt_f64).unwrap_or_default());
        row.push(point.capped.to_string());
        row.push(point.error.clone().unwrap_or_default());
        w.write_record(&row).map_err(|e| CliError::config(e.to_string()))?;
    }
    finish(w, path)
}
