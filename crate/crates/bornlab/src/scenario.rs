//! Scenario files: a versioned TOML schema describing one run, plus the
//! dispatcher that executes it and writes plot data.
//!
//! Complex numbers are `[re, im]` pairs and matrices are row-major lists of
//! pairs, so documents stay language-neutral and diff-friendly. Presets for
//! the canonical configurations (an energy-driven qubit, a Stern-Gerlach
//! style spin measurement, a localization chain) ship in the binary: the
//! `verify` and `preset` commands need no filesystem inputs.

use crate::ensemble::{
    chi_square_born, compare_mean_to_lindblad, estimate_reduction_scaling, run_ensemble,
    ScalingCell,
};
use crate::error::{Error, Result};
use crate::evolution::hamiltonian_step;
use crate::histories::{exhaustive_family_total, history_probability, History, HistoryEvent};
use crate::matrix::{c64, ComplexMatrix};
use crate::observable::HermitianObservable;
use crate::output;
use crate::sde::{gaussian_localization_ops, run_trajectory, StochasticProcessSpec};
use crate::state::{DensityMatrix, StateVector};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::PathBuf;

/// Schema version this build reads and writes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Simulate,
    Ensemble,
    Scaling,
    Histories,
    Verify,
}

/// A Hermitian operator, by preset name or written out.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    /// `"pauli-x" | "pauli-y" | "pauli-z" | "identity" | "zero"`; collapse
    /// operators may also use `"hamiltonian"` to reuse H (energy-driven).
    Preset(String),
    /// Real diagonal, one entry per dimension.
    Diagonal { diagonal: Vec<f64> },
    /// Row-major dim² entries as [re, im] pairs.
    Entries { entries: Vec<[f64; 2]> },
}

/// The collapse-operator list accepts either explicit operators or a
/// Gaussian chain that expands to one localization operator per site.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CollapseSpec {
    Matrix(MatrixSpec),
    GaussianChain { gaussian_width: f64 },
}

/// Initial state, by preset name or amplitude list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    /// `"plus-x" | "minus-x" | "uniform" | "basis-K"`.
    Preset(String),
    Amplitudes { amplitudes: Vec<[f64; 2]> },
}

/// Gap sweep for scaling mode: each gap builds the two-level Hamiltonian
/// diag(0, gap) with the scenario's initial state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingSection {
    pub gaps: Vec<f64>,
}

/// One time slot of a histories run: the family is the eigenprojector set
/// of `observable`; `propagator` evolves the state into the slot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistorySlot {
    pub observable: MatrixSpec,
    pub propagator: PropagatorSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagatorSpec {
    pub hamiltonian: MatrixSpec,
    pub time: f64,
}

fn default_dt() -> f64 {
    1e-3
}
fn default_epsilon() -> f64 {
    1e-6
}
fn default_trajectories() -> usize {
    1000
}
fn default_true() -> bool {
    true
}

/// One fully described run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub version: u32,
    pub name: String,
    pub mode: Mode,
    pub hilbert_dim: usize,
    pub hamiltonian: MatrixSpec,
    pub collapse_ops: Vec<CollapseSpec>,
    pub initial_state: StateSpec,
    pub sigma: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub t_max: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_trajectories")]
    pub trajectories: usize,
    pub seed: u64,
    #[serde(default = "default_true")]
    pub include_hamiltonian: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_stride: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling: Option<ScalingSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub history_slots: Option<Vec<HistorySlot>>,
}

/// Parse a scenario document and validate every invariant.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let scenario: Scenario =
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    validate_scenario(&scenario)?;
    Ok(scenario)
}

/// Serialize a scenario back to the document format. parse(emit(s)) = s.
pub fn emit_scenario(scenario: &Scenario) -> String {
    toml::to_string_pretty(scenario).expect("scenario serialization cannot fail")
}

/// Check every invariant and collect every violation before reporting.
pub fn validate_scenario(scenario: &Scenario) -> Result<()> {
    let mut violations = Vec::new();
    if scenario.version != SCHEMA_VERSION {
        violations.push(format!(
            "unsupported schema version {} (this build reads {SCHEMA_VERSION})",
            scenario.version
        ));
    }
    if scenario.name.is_empty() {
        violations.push("name must be nonempty".into());
    }
    if scenario.hilbert_dim == 0 {
        violations.push("hilbert_dim must be positive".into());
    }
    if !scenario.sigma.is_finite() || scenario.sigma < 0.0 {
        violations.push(format!("sigma must be >= 0, got {}", scenario.sigma));
    }
    if !scenario.dt.is_finite() || scenario.dt <= 0.0 {
        violations.push(format!("dt must be > 0, got {}", scenario.dt));
    }
    if !scenario.t_max.is_finite() || scenario.t_max <= 0.0 {
        violations.push(format!("t_max must be > 0, got {}", scenario.t_max));
    }
    if !scenario.epsilon.is_finite() || scenario.epsilon <= 0.0 || scenario.epsilon >= 1.0 {
        violations.push(format!(
            "epsilon must be in (0, 1), got {}",
            scenario.epsilon
        ));
    }
    if scenario.trajectories == 0 {
        violations.push("trajectories must be at least 1".into());
    }
    if scenario.sample_stride == Some(0) {
        violations.push("sample_stride must be at least 1".into());
    }
    if scenario.seed > i64::MAX as u64 {
        violations.push(format!(
            "seed {} exceeds the document integer range (TOML integers are signed 64-bit)",
            scenario.seed
        ));
    }

    if scenario.hilbert_dim > 0 {
        if let Err(e) = resolve_matrix(&scenario.hamiltonian, scenario.hilbert_dim, None) {
            violations.push(format!("hamiltonian: {e}"));
        }
        if scenario.collapse_ops.is_empty() {
            violations.push("collapse_ops must be nonempty".into());
        }
        for (k, op) in scenario.collapse_ops.iter().enumerate() {
            if let Err(e) = resolve_collapse(op, scenario) {
                violations.push(format!("collapse_ops[{k}]: {e}"));
            }
        }
        if let Err(e) = resolve_state(&scenario.initial_state, scenario.hilbert_dim) {
            violations.push(format!("initial_state: {e}"));
        }
        if let Some(slots) = &scenario.history_slots {
            for (k, slot) in slots.iter().enumerate() {
                if let Err(e) = resolve_matrix(&slot.observable, scenario.hilbert_dim, None) {
                    violations.push(format!("history_slots[{k}].observable: {e}"));
                }
                if let Err(e) =
                    resolve_matrix(&slot.propagator.hamiltonian, scenario.hilbert_dim, None)
                {
                    violations.push(format!("history_slots[{k}].propagator: {e}"));
                }
            }
        }
    }

    match scenario.mode {
        Mode::Scaling => match &scenario.scaling {
            None => violations.push("scaling mode requires a [scaling] section".into()),
            Some(section) => {
                if section.gaps.len() < 3 {
                    violations.push(format!(
                        "scaling needs at least 3 gap values, got {}",
                        section.gaps.len()
                    ));
                }
                if section.gaps.iter().any(|&g| !g.is_finite() || g <= 0.0) {
                    violations.push("scaling gaps must all be positive".into());
                }
                if scenario.hilbert_dim != 2 {
                    violations.push("scaling mode sweeps a two-level gap; hilbert_dim must be 2".into());
                }
            }
        },
        Mode::Histories if scenario.history_slots.as_ref().is_none_or(Vec::is_empty) => {
            violations.push("histories mode requires nonempty [[history_slots]]".into());
        }
        _ => {}
    }

    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::Validation(violations.join("\n")))
    }
}

/// Warnings that do not block execution (printed by the runner).
pub fn scenario_warnings(scenario: &Scenario) -> Vec<String> {
    let mut warnings = Vec::new();
    if scenario.mode == Mode::Ensemble {
        if let Ok(resolved) = resolve(scenario) {
            if resolved.spec.monitor().has_degeneracies() {
                warnings.push(
                    "monitor observable has degenerate eigenvalues; outcome frequencies compare \
                     eigenspace weights, and the nondegeneracy premise of the pure-limit theorem \
                     does not hold"
                        .into(),
                );
            }
        }
    }
    warnings
}

fn resolve_matrix(
    spec: &MatrixSpec,
    dim: usize,
    hamiltonian: Option<&HermitianObservable>,
) -> Result<HermitianObservable> {
    let matrix = match spec {
        MatrixSpec::Preset(name) => match name.as_str() {
            "pauli-x" => {
                require_dim(dim, 2, name)?;
                ComplexMatrix::pauli_x()
            }
            "pauli-y" => {
                require_dim(dim, 2, name)?;
                ComplexMatrix::pauli_y()
            }
            "pauli-z" => {
                require_dim(dim, 2, name)?;
                ComplexMatrix::pauli_z()
            }
            "identity" => ComplexMatrix::identity(dim),
            "zero" => ComplexMatrix::zeros(dim),
            "hamiltonian" => {
                return hamiltonian.cloned().ok_or_else(|| {
                    Error::Validation(
                        "preset \"hamiltonian\" is only valid for collapse operators".into(),
                    )
                })
            }
            unknown => {
                return Err(Error::Validation(format!(
                    "unknown matrix preset \"{unknown}\""
                )))
            }
        },
        MatrixSpec::Diagonal { diagonal } => {
            if diagonal.len() != dim {
                return Err(Error::Validation(format!(
                    "diagonal has {} entries for dimension {dim}",
                    diagonal.len()
                )));
            }
            ComplexMatrix::from_real_diagonal(diagonal)
        }
        MatrixSpec::Entries { entries } => {
            if entries.len() != dim * dim {
                return Err(Error::Validation(format!(
                    "matrix has {} entries, needs {}",
                    entries.len(),
                    dim * dim
                )));
            }
            ComplexMatrix::from_rows(
                dim,
                &entries.iter().map(|&[re, im]| c64(re, im)).collect::<Vec<_>>(),
            )
        }
    };
    HermitianObservable::new(matrix)
}

fn require_dim(actual: usize, required: usize, name: &str) -> Result<()> {
    if actual != required {
        return Err(Error::Validation(format!(
            "preset \"{name}\" requires hilbert_dim {required}, got {actual}"
        )));
    }
    Ok(())
}

fn resolve_collapse(spec: &CollapseSpec, scenario: &Scenario) -> Result<Vec<HermitianObservable>> {
    match spec {
        CollapseSpec::Matrix(m) => {
            let h = resolve_matrix(&scenario.hamiltonian, scenario.hilbert_dim, None)?;
            Ok(vec![resolve_matrix(m, scenario.hilbert_dim, Some(&h))?])
        }
        CollapseSpec::GaussianChain { gaussian_width } => {
            if !gaussian_width.is_finite() || *gaussian_width <= 0.0 {
                return Err(Error::Validation(format!(
                    "gaussian_width must be positive, got {gaussian_width}"
                )));
            }
            if scenario.hilbert_dim < 2 {
                return Err(Error::Validation(
                    "a gaussian chain needs at least two sites".into(),
                ));
            }
            Ok(gaussian_localization_ops(
                scenario.hilbert_dim,
                *gaussian_width,
            ))
        }
    }
}

fn resolve_state(spec: &StateSpec, dim: usize) -> Result<StateVector> {
    match spec {
        StateSpec::Preset(name) => match name.as_str() {
            "plus-x" => {
                require_dim(dim, 2, name)?;
                Ok(StateVector::plus_x())
            }
            "minus-x" => {
                require_dim(dim, 2, name)?;
                Ok(StateVector::minus_x())
            }
            "uniform" => Ok(StateVector::uniform_superposition(dim)),
            other => {
                if let Some(k) = other.strip_prefix("basis-") {
                    let k: usize = k.parse().map_err(|_| {
                        Error::Validation(format!("unknown state preset \"{other}\""))
                    })?;
                    if k >= dim {
                        return Err(Error::Validation(format!(
                            "basis index {k} out of range for dimension {dim}"
                        )));
                    }
                    Ok(StateVector::basis(dim, k))
                } else {
                    Err(Error::Validation(format!(
                        "unknown state preset \"{other}\""
                    )))
                }
            }
        },
        StateSpec::Amplitudes { amplitudes } => {
            if amplitudes.len() != dim {
                return Err(Error::Validation(format!(
                    "initial state has {} amplitudes for dimension {dim}",
                    amplitudes.len()
                )));
            }
            let state = StateVector::from_amplitudes(
                &amplitudes.iter().map(|&[re, im]| c64(re, im)).collect::<Vec<_>>(),
            );
            if state.norm() < 1e-12 {
                return Err(Error::Validation("initial state has zero norm".into()));
            }
            Ok(state.normalized())
        }
    }
}

/// A scenario resolved into runtime objects.
pub struct ResolvedScenario {
    pub spec: StochasticProcessSpec,
    pub initial_state: StateVector,
}

/// Build the stochastic process and initial state a scenario describes.
pub fn resolve(scenario: &Scenario) -> Result<ResolvedScenario> {
    let hamiltonian = resolve_matrix(&scenario.hamiltonian, scenario.hilbert_dim, None)?;
    let mut collapse_ops = Vec::new();
    for op in &scenario.collapse_ops {
        collapse_ops.extend(resolve_collapse(op, scenario)?);
    }
    let spec = StochasticProcessSpec::new(
        hamiltonian,
        collapse_ops,
        scenario.sigma,
        scenario.dt,
        scenario.include_hamiltonian,
        scenario.seed,
    )?;
    let initial_state = resolve_state(&scenario.initial_state, scenario.hilbert_dim)?;
    Ok(ResolvedScenario {
        spec,
        initial_state,
    })
}

/// Default sampling stride: coarse enough to keep a record near 512 samples.
fn default_stride(scenario: &Scenario) -> usize {
    let steps = (scenario.t_max / scenario.dt).ceil() as usize;
    scenario
        .sample_stride
        .unwrap_or_else(|| (steps / 512).max(1))
}

/// Command-line overrides applied on top of the scenario file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trajectories: Option<usize>,
    pub output: Option<String>,
}

/// Built-in scenario presets; `preset list` prints these names.
pub fn preset_names() -> Vec<&'static str> {
    vec!["energy-driven-qubit", "stern-gerlach", "lattice-localization"]
}

/// A ready-to-run document for each canonical configuration.
pub fn preset(name: &str) -> Option<Scenario> {
    let scenario = match name {
        "energy-driven-qubit" => Scenario {
            version: SCHEMA_VERSION,
            name: "energy-driven-qubit".into(),
            mode: Mode::Ensemble,
            hilbert_dim: 2,
            hamiltonian: MatrixSpec::Diagonal {
                diagonal: vec![0.0, 1.0],
            },
            collapse_ops: vec![CollapseSpec::Matrix(MatrixSpec::Preset(
                "hamiltonian".into(),
            ))],
            initial_state: StateSpec::Amplitudes {
                amplitudes: vec![[0.3f64.sqrt(), 0.0], [0.7f64.sqrt(), 0.0]],
            },
            sigma: 1.0,
            dt: 1e-3,
            t_max: 200.0,
            epsilon: 1e-6,
            trajectories: 2000,
            seed: 42,
            include_hamiltonian: true,
            sample_stride: Some(500),
            output: None,
            scaling: None,
            history_slots: None,
        },
        "stern-gerlach" => Scenario {
            version: SCHEMA_VERSION,
            name: "stern-gerlach".into(),
            mode: Mode::Ensemble,
            hilbert_dim: 2,
            hamiltonian: MatrixSpec::Preset("zero".into()),
            collapse_ops: vec![CollapseSpec::Matrix(MatrixSpec::Preset("pauli-z".into()))],
            initial_state: StateSpec::Preset("plus-x".into()),
            sigma: 1.0,
            dt: 1e-3,
            t_max: 40.0,
            epsilon: 1e-6,
            trajectories: 1000,
            seed: 7,
            include_hamiltonian: false,
            sample_stride: Some(250),
            output: None,
            scaling: None,
            history_slots: None,
        },
        "lattice-localization" => Scenario {
            version: SCHEMA_VERSION,
            name: "lattice-localization".into(),
            mode: Mode::Ensemble,
            hilbert_dim: 8,
            hamiltonian: MatrixSpec::Preset("zero".into()),
            collapse_ops: vec![CollapseSpec::GaussianChain { gaussian_width: 2.0 }],
            initial_state: StateSpec::Preset("uniform".into()),
            sigma: 2.5,
            dt: 1e-3,
            t_max: 120.0,
            epsilon: 1e-4,
            trajectories: 400,
            seed: 11,
            include_hamiltonian: false,
            sample_stride: Some(1000),
            output: None,
            scaling: None,
            history_slots: None,
        },
        _ => return None,
    };
    Some(scenario)
}

/// Outcome of executing one scenario.
pub struct ExecutionReport {
    pub files: Vec<PathBuf>,
    /// Human-readable result lines, already printed by the runner.
    pub lines: Vec<String>,
    /// False when a verify run failed or an ensemble produced failures.
    pub ok: bool,
}

/// Run a scenario end to end, writing output files under the prefix.
pub fn execute(scenario: &Scenario, overrides: &Overrides) -> Result<ExecutionReport> {
    validate_scenario(scenario)?;
    let mut scenario = scenario.clone();
    if let Some(seed) = overrides.seed {
        scenario.seed = seed;
    }
    if let Some(n) = overrides.trajectories {
        scenario.trajectories = n;
    }
    if let Some(out) = &overrides.output {
        scenario.output = Some(out.clone());
    }
    let prefix = scenario
        .output
        .clone()
        .unwrap_or_else(|| scenario.name.clone());

    let mut files = Vec::new();
    let mut lines = Vec::new();
    let mut ok = true;

    for warning in scenario_warnings(&scenario) {
        lines.push(format!("warning: {warning}"));
    }

    match scenario.mode {
        Mode::Simulate => {
            let resolved = resolve(&scenario)?;
            let record = run_trajectory(
                &resolved.spec,
                &resolved.initial_state,
                scenario.t_max,
                scenario.epsilon,
                default_stride(&scenario),
            )?;
            let jsonl = output::prefixed(&prefix, "trajectory.jsonl");
            output::write_trajectory_jsonl(&record, &jsonl)?;
            let weights = output::prefixed(&prefix, "weights.csv");
            output::write_weights_csv(&record, &weights)?;
            lines.push(match record.hitting_time {
                Some(t) => format!(
                    "trajectory resolved to outcome {:?} at t = {t}",
                    record.outcome
                ),
                None => "trajectory unresolved within t_max".into(),
            });
            files.extend([jsonl, weights]);
        }
        Mode::Ensemble => {
            let resolved = resolve(&scenario)?;
            let run = run_ensemble(
                &resolved.spec,
                &resolved.initial_state,
                scenario.t_max,
                scenario.epsilon,
                scenario.trajectories,
                default_stride(&scenario),
            )?;
            let summary_path = output::prefixed(&prefix, "summary.json");
            output::write_summary_doc(&run, &summary_path)?;
            let hitting = output::prefixed(&prefix, "hitting_times.csv");
            output::write_hitting_times_csv(&run, &hitting)?;
            let freq = output::prefixed(&prefix, "frequencies.csv");
            output::write_frequencies_csv(&run, &resolved.spec, &freq)?;
            let mean_w = output::prefixed(&prefix, "mean_weights.csv");
            output::write_mean_weights_csv(&run, &mean_w)?;
            files.extend([summary_path, hitting, freq, mean_w]);

            let summary = &run.summary;
            lines.push(format!(
                "{} trajectories: {} resolved, {} unresolved, {} failed",
                summary.n_trajectories,
                summary.n_trajectories - summary.unresolved - summary.failed.len(),
                summary.unresolved,
                summary.failed.len()
            ));
            for (index, born) in &summary.born_prediction {
                let count = summary.outcome_counts.get(index).copied().unwrap_or(0);
                lines.push(format!(
                    "outcome {index}: frequency {:.4} vs Born {born:.4}",
                    count as f64 / summary.n_trajectories as f64
                ));
            }
            if summary.unresolved == 0 && summary.failed.is_empty() {
                // reported, not exit-gating: a biased custom scenario is a
                // result, not an error
                let chi = chi_square_born(summary)?;
                lines.push(format!(
                    "chi-square {:.3} (dof {}) -> {}",
                    chi.statistic,
                    chi.dof,
                    if chi.pass { "pass" } else { "FAIL" }
                ));
                let comparison = compare_mean_to_lindblad(&run, &resolved.spec)?;
                lines.push(format!(
                    "mean density vs averaged-evolution oracle: max deviation {:.3e}, stat error {:.3e}",
                    comparison.max_deviation, comparison.stat_error
                ));
            }
            ok &= summary.failed.is_empty();
        }
        Mode::Scaling => {
            let section = scenario.scaling.as_ref().expect("validated");
            let psi0 = resolve_state(&scenario.initial_state, scenario.hilbert_dim)?;
            let cells: Vec<ScalingCell> = section
                .gaps
                .iter()
                .enumerate()
                .map(|(k, &gap)| {
                    let h = HermitianObservable::new(ComplexMatrix::from_real_diagonal(&[
                        0.0, gap,
                    ]))?;
                    let spec = StochasticProcessSpec::energy_driven(
                        h,
                        scenario.sigma,
                        scenario.dt,
                        scenario.seed.wrapping_add(k as u64),
                    )?;
                    Ok((spec, psi0.clone()))
                })
                .collect::<Result<_>>()?;
            let fit = estimate_reduction_scaling(
                &cells,
                scenario.t_max,
                scenario.epsilon,
                scenario.trajectories,
            )?;
            let points = output::prefixed(&prefix, "scaling.csv");
            output::write_scaling_csv(&fit, &points)?;
            let fit_path = output::prefixed(&prefix, "fit.csv");
            output::write_scaling_fit_csv(&fit, &fit_path)?;
            lines.push(format!(
                "reduction-time scaling: slope {:.3} +/- {:.3} over {} dispersion points",
                fit.slope,
                fit.slope_stderr,
                fit.points.len()
            ));
            files.extend([points, fit_path]);
        }
        Mode::Histories => {
            let slots = scenario.history_slots.as_ref().expect("validated");
            let psi0 = resolve_state(&scenario.initial_state, scenario.hilbert_dim)?;
            let initial = DensityMatrix::from_pure(&psi0);
            let mut families = Vec::new();
            let mut propagators = Vec::new();
            for slot in slots {
                let obs = resolve_matrix(&slot.observable, scenario.hilbert_dim, None)?;
                families.push(crate::histories::projector_family(&obs));
                let gen = resolve_matrix(&slot.propagator.hamiltonian, scenario.hilbert_dim, None)?;
                propagators.push(hamiltonian_step(&gen, slot.propagator.time));
            }
            let mut rows = Vec::new();
            let mut choice = vec![0usize; families.len()];
            loop {
                let events: Vec<HistoryEvent> = choice
                    .iter()
                    .enumerate()
                    .map(|(slot, &pick)| HistoryEvent {
                        propagator: propagators[slot].clone(),
                        projector: families[slot][pick].clone(),
                    })
                    .collect();
                let p = history_probability(&History {
                    initial: initial.clone(),
                    events,
                })?;
                rows.push((choice.clone(), p));
                // odometer over the Cartesian product
                let mut slot = families.len();
                loop {
                    if slot == 0 {
                        break;
                    }
                    slot -= 1;
                    choice[slot] += 1;
                    if choice[slot] < families[slot].len() {
                        break;
                    }
                    choice[slot] = 0;
                    if slot == 0 {
                        break;
                    }
                }
                if choice.iter().all(|&c| c == 0) {
                    break;
                }
            }
            let total = exhaustive_family_total(&initial, &propagators, &families)?;
            let table = output::prefixed(&prefix, "histories.csv");
            output::write_histories_csv(families.len(), &rows, total, &table)?;
            lines.push(format!(
                "{} histories, exhaustive total {total:.12}",
                rows.len()
            ));
            files.push(table);
        }
        Mode::Verify => {
            let results = crate::verify::run_all();
            for item in &results {
                lines.push(item.describe());
            }
            ok &= results.iter().all(|r| r.passed());
        }
    }

    Ok(ExecutionReport { files, lines, ok })
}

/// Render a preset as a commented scenario document.
pub fn preset_document(name: &str) -> Option<String> {
    let scenario = preset(name)?;
    let mut doc = String::new();
    let _ = writeln!(doc, "# built-in scenario \"{name}\"");
    doc.push_str(&emit_scenario(&scenario));
    Some(doc)
}
