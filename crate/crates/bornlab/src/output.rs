//! Plot-data and report emitters: line-delimited JSON for trajectory
//! streams, plain CSV for everything tabular, and a single structured
//! document per ensemble. All numbers are written with Rust's shortest
//! round-trip float formatting, so outputs are byte-deterministic functions
//! of the data.

use crate::ensemble::{EnsembleRun, ScalingFit};
use crate::error::Result;
use crate::sde::{Outcome, StochasticProcessSpec, TrajectoryRecord};
use serde::Serialize;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

fn create(path: &Path) -> Result<fs::File> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    Ok(fs::File::create(path)?)
}

fn complex_pairs(matrix: &crate::matrix::ComplexMatrix) -> Vec<[f64; 2]> {
    let dim = matrix.dim();
    let mut out = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            let z = matrix[(i, j)];
            out.push([z.re, z.im]);
        }
    }
    out
}

#[derive(Serialize)]
struct SnapshotLine<'a> {
    t: f64,
    amplitudes: Vec<[f64; 2]>,
    projector_weights: &'a [f64],
}

/// One JSON object per sample: `{t, amplitudes, projector_weights}`.
pub fn write_trajectory_jsonl(record: &TrajectoryRecord, path: &Path) -> Result<()> {
    let mut file = create(path)?;
    for ((t, state), weights) in record
        .times
        .iter()
        .zip(&record.states)
        .zip(&record.projector_weights)
    {
        let line = SnapshotLine {
            t: *t,
            amplitudes: state.amplitudes().iter().map(|z| [z.re, z.im]).collect(),
            projector_weights: weights,
        };
        serde_json::to_writer(&mut file, &line).map_err(std::io::Error::other)?;
        writeln!(file)?;
    }
    Ok(())
}

/// ⟨P_n⟩ against time for one trajectory.
pub fn write_weights_csv(record: &TrajectoryRecord, path: &Path) -> Result<()> {
    let mut body = String::new();
    let n_groups = record.projector_weights.first().map_or(0, Vec::len);
    body.push('t');
    for n in 0..n_groups {
        let _ = write!(body, ",w_{n}");
    }
    body.push('\n');
    for (t, weights) in record.times.iter().zip(&record.projector_weights) {
        let _ = write!(body, "{t}");
        for w in weights {
            let _ = write!(body, ",{w}");
        }
        body.push('\n');
    }
    create(path)?.write_all(body.as_bytes())?;
    Ok(())
}

/// Mean monitored weights against time for an ensemble.
pub fn write_mean_weights_csv(run: &EnsembleRun, path: &Path) -> Result<()> {
    let series = run.mean_weights();
    let mut body = String::new();
    let n_groups = series.first().map_or(0, |(_, row)| row.len());
    body.push('t');
    for n in 0..n_groups {
        let _ = write!(body, ",mean_w_{n}");
    }
    body.push('\n');
    for (t, row) in &series {
        let _ = write!(body, "{t}");
        for w in row {
            let _ = write!(body, ",{w}");
        }
        body.push('\n');
    }
    create(path)?.write_all(body.as_bytes())?;
    Ok(())
}

/// Censoring-visible per-trajectory table: `trajectory_index,outcome,hitting_time`.
pub fn write_hitting_times_csv(run: &EnsembleRun, path: &Path) -> Result<()> {
    let mut body = String::from("trajectory_index,outcome,hitting_time\n");
    for (index, record) in &run.records {
        match record.outcome {
            Outcome::Resolved(e) => {
                let t = record.hitting_time.unwrap_or(f64::NAN);
                let _ = writeln!(body, "{index},{e},{t}");
            }
            Outcome::Unresolved => {
                let _ = writeln!(body, "{index},unresolved,");
            }
        }
    }
    for (index, message) in &run.summary.failed {
        let _ = writeln!(body, "{index},failed:{},", message.replace(',', ";"));
    }
    create(path)?.write_all(body.as_bytes())?;
    Ok(())
}

/// Bar data: observed outcome frequency next to the Born prediction, one
/// row per distinct eigenvalue of the monitor.
pub fn write_frequencies_csv(
    run: &EnsembleRun,
    spec: &StochasticProcessSpec,
    path: &Path,
) -> Result<()> {
    let mut body = String::from("outcome_index,eigenvalue,observed_frequency,born_probability\n");
    let n = run.summary.n_trajectories as f64;
    for (index, space) in spec.monitor().spectrum().iter().enumerate() {
        let count = run.summary.outcome_counts.get(&index).copied().unwrap_or(0);
        let born = run
            .summary
            .born_prediction
            .iter()
            .find(|(e, _)| *e == index)
            .map_or(0.0, |(_, p)| *p);
        let _ = writeln!(
            body,
            "{index},{},{},{born}",
            space.eigenvalue,
            count as f64 / n
        );
    }
    create(path)?.write_all(body.as_bytes())?;
    Ok(())
}

/// Scaling points: dispersion, median reduction time, and the log-log
/// coordinates the fit runs on.
pub fn write_scaling_csv(fit: &ScalingFit, path: &Path) -> Result<()> {
    let mut body =
        String::from("delta_e,t_r_median,log10_delta_e,log10_t_r_median,unresolved_fraction\n");
    for ((de, tr), uf) in fit.points.iter().zip(&fit.unresolved_fractions) {
        let _ = writeln!(body, "{de},{tr},{},{},{uf}", de.log10(), tr.log10());
    }
    create(path)?.write_all(body.as_bytes())?;
    Ok(())
}

/// One row of fit parameters.
pub fn write_scaling_fit_csv(fit: &ScalingFit, path: &Path) -> Result<()> {
    let mut body = String::from("slope,slope_stderr\n");
    let _ = writeln!(body, "{},{}", fit.slope, fit.slope_stderr);
    create(path)?.write_all(body.as_bytes())?;
    Ok(())
}

/// Probability table over a Cartesian product of history outcomes.
pub fn write_histories_csv(
    slot_count: usize,
    rows: &[(Vec<usize>, f64)],
    total: f64,
    path: &Path,
) -> Result<()> {
    let mut body = String::new();
    for k in 0..slot_count {
        let _ = write!(body, "slot_{k},");
    }
    body.push_str("probability\n");
    for (choice, p) in rows {
        for c in choice {
            let _ = write!(body, "{c},");
        }
        let _ = writeln!(body, "{p}");
    }
    for _ in 0..slot_count {
        body.push_str("total,");
    }
    let _ = writeln!(body, "{total}");
    create(path)?.write_all(body.as_bytes())?;
    Ok(())
}

#[derive(Serialize)]
struct DensitySample {
    t: f64,
    matrix: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct SummaryDoc<'a> {
    n_trajectories: usize,
    outcome_counts: &'a std::collections::BTreeMap<usize, usize>,
    unresolved: usize,
    failed: &'a [(usize, String)],
    born_prediction: &'a [(usize, f64)],
    hitting_times: &'a [f64],
    mean_density: Vec<DensitySample>,
}

/// The whole ensemble summary as one structured-text document (JSON).
pub fn write_summary_doc(run: &EnsembleRun, path: &Path) -> Result<()> {
    let summary = &run.summary;
    let doc = SummaryDoc {
        n_trajectories: summary.n_trajectories,
        outcome_counts: &summary.outcome_counts,
        unresolved: summary.unresolved,
        failed: &summary.failed,
        born_prediction: &summary.born_prediction,
        hitting_times: &summary.hitting_times,
        mean_density: summary
            .mean_density
            .iter()
            .map(|(t, rho)| DensitySample {
                t: *t,
                matrix: complex_pairs(rho.matrix()),
            })
            .collect(),
    };
    let mut file = create(path)?;
    let text = serde_json::to_string_pretty(&doc).map_err(std::io::Error::other)?;
    file.write_all(text.as_bytes())?;
    file.write_all(b"\n")?;
    Ok(())
}

/// Convenience joining of a prefix and a suffixed filename.
pub fn prefixed(prefix: &str, suffix: &str) -> PathBuf {
    PathBuf::from(format!("{prefix}.{suffix}"))
}
