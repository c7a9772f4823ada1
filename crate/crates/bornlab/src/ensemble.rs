//! Monte Carlo orchestration: trajectory fan-out, outcome frequencies,
//! reduction-time statistics, and the comparisons that test whether the
//! Born weights actually emerge from the stochastic dynamics.
//!
//! Determinism contract: trajectory k always draws from substream k of the
//! master seed, the fan-out is join-then-reduce, and every reduction is a
//! sequential pass in trajectory order (Kahan-compensated for the mean
//! density), so a run is a pure function of (spec, ψ0, horizon, N) no
//! matter how many threads execute it.

use crate::error::{Error, Result};
use crate::lindblad::{evolve_lindblad_sampled, LindbladSpec};
use crate::matrix::C64;
use crate::sde::{run_trajectory_stream, Outcome, StochasticProcessSpec, TrajectoryRecord};
use crate::state::{DensityMatrix, StateVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use std::collections::BTreeMap;

/// Substream reserved for resampling; trajectory substreams count up from 0.
const BOOTSTRAP_STREAM: u64 = u64::MAX - 1;

/// Number of bootstrap resamples used for every error bar in this module.
const BOOTSTRAP_RESAMPLES: usize = 200;

/// Kahan-compensated accumulator; keeps ensemble reductions exact enough to
/// be bit-stable under re-ordering-free sequential summation.
#[derive(Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Aggregated results of one ensemble.
#[derive(Clone, Debug)]
pub struct EnsembleSummary {
    pub n_trajectories: usize,
    /// Outcome index (into the monitor's spectrum) → count.
    pub outcome_counts: BTreeMap<usize, usize>,
    pub unresolved: usize,
    /// Noise-averaged density matrix at each sample time.
    pub mean_density: Vec<(f64, DensityMatrix)>,
    /// Hitting times of the resolved trajectories, in trajectory order.
    pub hitting_times: Vec<f64>,
    /// (outcome index, ⟨ψ0|P_e|ψ0⟩): what the Born rule predicts.
    pub born_prediction: Vec<(usize, f64)>,
    /// Trajectories that errored, with the error text; excluded from counts.
    pub failed: Vec<(usize, String)>,
}

/// Summary plus the per-trajectory records backing it (needed for
/// bootstrap error bars and per-trajectory exports).
#[derive(Clone, Debug)]
pub struct EnsembleRun {
    pub summary: EnsembleSummary,
    /// (trajectory index, record), ascending; failed trajectories absent.
    pub records: Vec<(usize, TrajectoryRecord)>,
}

impl EnsembleRun {
    /// Mean monitored eigenspace weights at each sample time.
    pub fn mean_weights(&self) -> Vec<(f64, Vec<f64>)> {
        let Some((_, first)) = self.records.first() else {
            return Vec::new();
        };
        let n_slots = first.times.len();
        let n_groups = first.projector_weights[0].len();
        let mut acc = vec![vec![Kahan::default(); n_groups]; n_slots];
        for (_, record) in &self.records {
            for (slot, row) in record.projector_weights.iter().enumerate() {
                for (g, w) in row.iter().enumerate() {
                    acc[slot][g].add(*w);
                }
            }
        }
        let n = self.records.len() as f64;
        first
            .times
            .iter()
            .zip(acc)
            .map(|(&t, row)| (t, row.into_iter().map(|k| k.sum / n).collect()))
            .collect()
    }
}

/// Run `n` independent trajectories and aggregate. Failed trajectories are
/// reported in the summary instead of aborting the ensemble.
pub fn run_ensemble(
    spec: &StochasticProcessSpec,
    psi0: &StateVector,
    t_max: f64,
    epsilon: f64,
    n: usize,
    stride: usize,
) -> Result<EnsembleRun> {
    assert!(n >= 1, "need at least one trajectory");
    let psi0 = psi0.normalized();
    let born_prediction: Vec<(usize, f64)> = spec
        .monitor()
        .eigenspace_weights(&psi0)
        .into_iter()
        .enumerate()
        .collect();

    let results: Vec<Result<TrajectoryRecord>> = (0..n)
        .into_par_iter()
        .map(|k| run_trajectory_stream(spec, &psi0, t_max, epsilon, stride, k as u64))
        .collect();

    let mut outcome_counts = BTreeMap::new();
    let mut unresolved = 0usize;
    let mut hitting_times = Vec::new();
    let mut failed = Vec::new();
    let mut records = Vec::with_capacity(n);
    for (k, result) in results.into_iter().enumerate() {
        match result {
            Ok(record) => {
                match record.outcome {
                    Outcome::Resolved(e) => {
                        *outcome_counts.entry(e).or_insert(0) += 1;
                        hitting_times.push(record.hitting_time.expect("resolved without time"));
                    }
                    Outcome::Unresolved => unresolved += 1,
                }
                records.push((k, record));
            }
            Err(err) => failed.push((k, err.to_string())),
        }
    }

    let mean_density = mean_density_of(&records);
    Ok(EnsembleRun {
        summary: EnsembleSummary {
            n_trajectories: n,
            outcome_counts,
            unresolved,
            mean_density,
            hitting_times,
            born_prediction,
            failed,
        },
        records,
    })
}

fn mean_density_of(records: &[(usize, TrajectoryRecord)]) -> Vec<(f64, DensityMatrix)> {
    let Some((_, first)) = records.first() else {
        return Vec::new();
    };
    let dim = first.states[0].dim();
    let n_slots = first.times.len();
    let mut re = vec![vec![Kahan::default(); dim * dim]; n_slots];
    let mut im = vec![vec![Kahan::default(); dim * dim]; n_slots];
    for (_, record) in records {
        for (slot, state) in record.states.iter().enumerate() {
            let amps = state.amplitudes();
            for i in 0..dim {
                for j in 0..dim {
                    let v = amps[i] * amps[j].conj();
                    re[slot][i * dim + j].add(v.re);
                    im[slot][i * dim + j].add(v.im);
                }
            }
        }
    }
    let n = records.len() as f64;
    first
        .times
        .iter()
        .enumerate()
        .map(|(slot, &t)| {
            let m = crate::matrix::ComplexMatrix::from_fn(dim, |i, j| {
                C64::new(re[slot][i * dim + j].sum / n, im[slot][i * dim + j].sum / n)
            });
            (t, DensityMatrix::from_matrix_unchecked(m))
        })
        .collect()
}

/// Pearson χ² verdict for the outcome frequencies against the Born
/// prediction.
#[derive(Clone, Debug)]
pub struct ChiSquareReport {
    pub statistic: f64,
    pub dof: usize,
    /// True iff the statistic sits below the 99.9th percentile of χ²(dof).
    pub pass: bool,
}

/// χ² of outcome counts against the Born prediction. Requires a fully
/// resolved ensemble.
pub fn chi_square_born(summary: &EnsembleSummary) -> Result<ChiSquareReport> {
    if summary.unresolved > 0 || !summary.failed.is_empty() {
        return Err(Error::UnresolvedPresent {
            unresolved: summary.unresolved + summary.failed.len(),
            total: summary.n_trajectories,
        });
    }
    let n = summary.n_trajectories as f64;
    let mut statistic = 0.0_f64;
    let mut cells = 0usize;
    for &(e, p) in &summary.born_prediction {
        let observed = summary.outcome_counts.get(&e).copied().unwrap_or(0) as f64;
        if p > 0.0 {
            let expected = n * p;
            statistic += (observed - expected).powi(2) / expected;
            cells += 1;
        } else if observed > 0.0 {
            // an impossible outcome occurred
            statistic = f64::INFINITY;
        }
    }
    let dof = cells.saturating_sub(1);
    let pass = if dof == 0 {
        statistic < 1e-9
    } else {
        statistic <= ChiSquared::new(dof as f64).unwrap().inverse_cdf(0.999)
    };
    Ok(ChiSquareReport {
        statistic,
        dof,
        pass,
    })
}

/// Deviation of the ensemble mean density from the deterministic
/// reference, with a bootstrap scale for the Monte Carlo error.
#[derive(Clone, Debug)]
pub struct LindbladComparison {
    /// max over sample times of ‖mean_density(t) − oracle(t)‖_max.
    pub max_deviation: f64,
    /// Largest bootstrap standard error over (time, matrix entry).
    pub stat_error: f64,
}

/// Integrate the averaged evolution from the same initial state and report
/// the worst-case deviation of the ensemble mean, together with a bootstrap
/// estimate of the Monte Carlo error (200 trajectory resamples).
pub fn compare_mean_to_lindblad(
    run: &EnsembleRun,
    spec: &StochasticProcessSpec,
) -> Result<LindbladComparison> {
    let summary = &run.summary;
    assert!(
        !summary.mean_density.is_empty(),
        "ensemble carries no samples"
    );
    let lspec = LindbladSpec::from(spec);
    let times: Vec<f64> = summary.mean_density.iter().map(|(t, _)| *t).collect();
    let rho0 = summary.mean_density[0].1.clone();
    let oracle = {
        let mut list = Vec::with_capacity(times.len());
        list.push(rho0.clone());
        if times.len() > 1 {
            list.extend(evolve_lindblad_sampled(&rho0, &lspec, &times[1..], spec.dt)?);
        }
        list
    };

    let max_deviation = summary
        .mean_density
        .iter()
        .zip(&oracle)
        .map(|((_, mean), reference)| (mean.matrix() - reference.matrix()).max_norm())
        .fold(0.0_f64, f64::max);

    // Flatten per-trajectory entry series once; bootstrap is then pure
    // index arithmetic over f64 rows.
    let n = run.records.len();
    let dim = rho0.dim();
    let n_slots = times.len();
    let row_len = n_slots * dim * dim * 2;
    let mut flat = vec![0.0_f64; n * row_len];
    for (r, (_, record)) in run.records.iter().enumerate() {
        let row = &mut flat[r * row_len..(r + 1) * row_len];
        for (slot, state) in record.states.iter().enumerate() {
            let amps = state.amplitudes();
            for i in 0..dim {
                for j in 0..dim {
                    let v = amps[i] * amps[j].conj();
                    let base = (slot * dim * dim + i * dim + j) * 2;
                    row[base] = v.re;
                    row[base + 1] = v.im;
                }
            }
        }
    }
    let mut rng = spec.trajectory_rng(BOOTSTRAP_STREAM);
    let mut acc = vec![0.0_f64; row_len];
    let mut acc_sq = vec![0.0_f64; row_len];
    let mut resample_mean = vec![0.0_f64; row_len];
    for _ in 0..BOOTSTRAP_RESAMPLES {
        resample_mean.iter_mut().for_each(|x| *x = 0.0);
        for _ in 0..n {
            let pick = rng.gen_range(0..n);
            let row = &flat[pick * row_len..(pick + 1) * row_len];
            for (m, v) in resample_mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        for ((a, s), m) in acc.iter_mut().zip(&mut acc_sq).zip(&resample_mean) {
            let mean = m / n as f64;
            *a += mean;
            *s += mean * mean;
        }
    }
    let resamples = BOOTSTRAP_RESAMPLES as f64;
    let stat_error = acc
        .iter()
        .zip(&acc_sq)
        .map(|(a, s)| {
            let mean = a / resamples;
            (s / resamples - mean * mean).max(0.0).sqrt()
        })
        .fold(0.0_f64, f64::max);

    Ok(LindbladComparison {
        max_deviation,
        stat_error,
    })
}

/// Reduction-time scaling data: median hitting time against the energy
/// dispersion of the initial state, with a log-log least-squares slope.
#[derive(Clone, Debug)]
pub struct ScalingFit {
    /// (ΔE, median t_R), one per cell, in input order.
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub slope_stderr: f64,
    /// Fraction of unresolved trajectories per cell (reported, not fitted).
    pub unresolved_fractions: Vec<f64>,
}

/// One cell of a scaling sweep: a process and its initial state. The energy
/// dispersion ΔE = √(⟨H²⟩ − ⟨H⟩²) is computed from the pair.
pub type ScalingCell = (StochasticProcessSpec, StateVector);

/// Energy dispersion of a (normalized) state under the given Hamiltonian.
pub fn energy_dispersion(spec: &StochasticProcessSpec, psi: &StateVector) -> f64 {
    let psi = psi.normalized();
    let h = spec.hamiltonian();
    let h_psi = psi.apply_matrix(h.matrix());
    let mean = psi.inner_product(&h_psi).re;
    let mean_sq = h_psi.norm_sqr();
    (mean_sq - mean * mean).max(0.0).sqrt()
}

/// Sweep the cells, run `n` trajectories each, and fit log t_R against
/// log ΔE. Cells with degenerate dispersion are rejected up front; a cell
/// with more than 20% unresolved trajectories aborts the fit.
pub fn estimate_reduction_scaling(
    cells: &[ScalingCell],
    t_max: f64,
    epsilon: f64,
    n: usize,
) -> Result<ScalingFit> {
    if cells.len() < 3 {
        return Err(Error::Validation(format!(
            "scaling fit needs at least 3 dispersion points, got {}",
            cells.len()
        )));
    }
    // the fit is a statement at fixed coupling; a sweep that also varied σ
    // would confound the dispersion scaling
    let sigma = cells[0].0.sigma;
    if cells.iter().any(|(spec, _)| spec.sigma != sigma) {
        return Err(Error::Validation(
            "scaling cells must share one sigma; the dispersion law is fit at fixed coupling"
                .into(),
        ));
    }
    let mut dispersions = Vec::with_capacity(cells.len());
    for (idx, (spec, psi0)) in cells.iter().enumerate() {
        let de = energy_dispersion(spec, psi0);
        if de < 1e-12 {
            return Err(Error::Validation(format!(
                "cell {idx} has zero energy dispersion; no reduction pressure between degenerate states"
            )));
        }
        dispersions.push(de);
    }

    let mut points = Vec::with_capacity(cells.len());
    let mut unresolved_fractions = Vec::with_capacity(cells.len());
    for ((spec, psi0), &de) in cells.iter().zip(&dispersions) {
        // hitting times only; sample as coarsely as possible
        let stride = ((t_max / spec.dt).ceil() as usize).max(1);
        let run = run_ensemble(spec, psi0, t_max, epsilon, n, stride)?;
        let unresolved = run.summary.unresolved + run.summary.failed.len();
        let fraction = unresolved as f64 / n as f64;
        if fraction > 0.2 {
            return Err(Error::InsufficientResolved(format!(
                "cell with dispersion {de:.4} left {unresolved} of {n} trajectories unresolved"
            )));
        }
        let med = median(&run.summary.hitting_times);
        points.push((de, med));
        unresolved_fractions.push(fraction);
    }

    let log_points: Vec<(f64, f64)> = points
        .iter()
        .map(|&(de, t)| (de.ln(), t.ln()))
        .collect();
    let (slope, slope_stderr) = fit_line(&log_points);
    Ok(ScalingFit {
        points,
        slope,
        slope_stderr,
        unresolved_fractions,
    })
}

/// Median of a nonempty slice; mean of the two central values at even length.
pub fn median(xs: &[f64]) -> f64 {
    assert!(!xs.is_empty(), "median of empty data");
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    }
}

/// Least-squares slope and its standard error for (x, y) pairs.
pub fn fit_line(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    assert!(points.len() >= 2, "need at least two points");
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points
        .iter()
        .map(|p| (p.0 - mean_x) * (p.1 - mean_y))
        .sum();
    let slope = sxy / sxx;
    let stderr = if points.len() > 2 {
        let ss_res: f64 = points
            .iter()
            .map(|p| {
                let fitted = mean_y + slope * (p.0 - mean_x);
                (p.1 - fitted).powi(2)
            })
            .sum();
        (ss_res / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    (slope, stderr)
}

/// Bootstrap standard error of the mean of `values` (trajectory-level
/// resampling, 200 resamples), using the given generator.
pub fn bootstrap_se(values: &[f64], rng: &mut impl Rng) -> f64 {
    let n = values.len();
    assert!(n > 0);
    let mut acc = 0.0_f64;
    let mut acc_sq = 0.0_f64;
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let mut sum = 0.0;
        for _ in 0..n {
            sum += values[rng.gen_range(0..n)];
        }
        let mean = sum / n as f64;
        acc += mean;
        acc_sq += mean * mean;
    }
    let r = BOOTSTRAP_RESAMPLES as f64;
    let mean = acc / r;
    (acc_sq / r - mean * mean).max(0.0).sqrt()
}

/// Fresh generator for ad-hoc resampling tied to a master seed.
pub fn resampling_rng(seed: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(BOOTSTRAP_STREAM);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit::energy_driven_qubit;

    #[test]
    fn eigenstate_ensemble_is_unanimous() {
        let spec = energy_driven_qubit(1.0, 1.0, 1e-3, 2);
        let run = run_ensemble(&spec, &StateVector::basis(2, 1), 1.0, 1e-6, 50, 100).unwrap();
        // |1⟩ has H eigenvalue 1 → spectrum index 1, with P_e = 1
        assert_eq!(run.summary.outcome_counts.get(&1), Some(&50));
        assert_eq!(run.summary.unresolved, 0);
        assert!(run.summary.hitting_times.iter().all(|&t| t == 0.0));
        let born = &run.summary.born_prediction;
        assert!((born[1].1 - 1.0).abs() < 1e-12);
        let report = chi_square_born(&run.summary).unwrap();
        assert_eq!(report.statistic, 0.0);
        assert!(report.pass);
    }

    #[test]
    fn ensemble_is_deterministic_across_thread_counts() {
        let spec = energy_driven_qubit(1.0, 1.0, 1e-3, 42);
        let psi0 = StateVector::plus_x();
        let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let pool4 = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = pool1.install(|| run_ensemble(&spec, &psi0, 30.0, 1e-6, 64, 500).unwrap());
        let b = pool4.install(|| run_ensemble(&spec, &psi0, 30.0, 1e-6, 64, 500).unwrap());
        assert_eq!(a.summary.outcome_counts, b.summary.outcome_counts);
        assert_eq!(a.summary.hitting_times, b.summary.hitting_times);
        for ((_, x), (_, y)) in a.summary.mean_density.iter().zip(&b.summary.mean_density) {
            assert_eq!(x.matrix().inner().as_slice(), y.matrix().inner().as_slice());
        }
    }

    #[test]
    fn born_frequencies_emerge_on_a_small_ensemble() {
        let spec = energy_driven_qubit(1.0, 1.0, 1e-3, 7);
        let psi0 = StateVector::from_real(&[0.3f64.sqrt(), 0.7f64.sqrt()]);
        let run = run_ensemble(&spec, &psi0, 100.0, 1e-4, 400, 1_000_000).unwrap();
        assert_eq!(run.summary.unresolved, 0);
        let count1 = *run.summary.outcome_counts.get(&1).unwrap_or(&0) as f64;
        let freq = count1 / 400.0;
        // 4 binomial standard errors at N=400
        assert!(
            (freq - 0.7).abs() < 4.0 * (0.7 * 0.3 / 400.0f64).sqrt(),
            "outcome-1 frequency {freq}"
        );
        assert!(chi_square_born(&run.summary).unwrap().pass);
    }

    #[test]
    fn chi_square_flags_biased_counts() {
        // counts (1300, 700) against (0.5, 0.5): statistic is exactly 180
        let summary = EnsembleSummary {
            n_trajectories: 2000,
            outcome_counts: BTreeMap::from([(0, 1300), (1, 700)]),
            unresolved: 0,
            mean_density: Vec::new(),
            hitting_times: Vec::new(),
            born_prediction: vec![(0, 0.5), (1, 0.5)],
            failed: Vec::new(),
        };
        let report = chi_square_born(&summary).unwrap();
        assert!((report.statistic - 180.0).abs() < 1e-9);
        assert_eq!(report.dof, 1);
        assert!(!report.pass);
    }

    #[test]
    fn chi_square_accepts_exact_proportions() {
        let summary = EnsembleSummary {
            n_trajectories: 2000,
            outcome_counts: BTreeMap::from([(0, 1000), (1, 1000)]),
            unresolved: 0,
            mean_density: Vec::new(),
            hitting_times: Vec::new(),
            born_prediction: vec![(0, 0.5), (1, 0.5)],
            failed: Vec::new(),
        };
        let report = chi_square_born(&summary).unwrap();
        assert_eq!(report.statistic, 0.0);
        assert!(report.pass);
    }

    #[test]
    fn chi_square_requires_resolution() {
        let summary = EnsembleSummary {
            n_trajectories: 10,
            outcome_counts: BTreeMap::from([(0, 8)]),
            unresolved: 2,
            mean_density: Vec::new(),
            hitting_times: Vec::new(),
            born_prediction: vec![(0, 1.0)],
            failed: Vec::new(),
        };
        assert!(matches!(
            chi_square_born(&summary),
            Err(Error::UnresolvedPresent { .. })
        ));
    }

    #[test]
    fn sigma_zero_ensemble_matches_oracle_to_machine_precision() {
        let spec = energy_driven_qubit(1.0, 0.0, 1e-3, 5);
        let run = run_ensemble(&spec, &StateVector::plus_x(), 1.0, 1e-6, 4, 100).unwrap();
        let report = compare_mean_to_lindblad(&run, &spec).unwrap();
        // both sides deterministic and unitary
        assert!(report.max_deviation < 1e-8, "deviation {}", report.max_deviation);
    }

    #[test]
    fn eigenstate_ensemble_is_a_fixed_point_of_both_routes() {
        let spec = energy_driven_qubit(1.0, 1.0, 1e-3, 5);
        let run = run_ensemble(&spec, &StateVector::basis(2, 0), 1.0, 1e-6, 4, 100).unwrap();
        let report = compare_mean_to_lindblad(&run, &spec).unwrap();
        assert!(report.max_deviation < 1e-10);
    }

    #[test]
    fn mean_density_tracks_lindblad_within_noise() {
        let spec = energy_driven_qubit(1.0, 1.0, 1e-3, 11);
        let psi0 = StateVector::from_real(&[0.3f64.sqrt(), 0.7f64.sqrt()]);
        let run = run_ensemble(&spec, &psi0, 4.0, 1e-6, 300, 400).unwrap();
        let report = compare_mean_to_lindblad(&run, &spec).unwrap();
        assert!(
            report.max_deviation <= 3.0 * report.stat_error + 0.5 * spec.dt,
            "deviation {} vs stat error {}",
            report.max_deviation,
            report.stat_error
        );
    }

    #[test]
    fn scaling_fit_recovers_inverse_square_law() {
        let cells: Vec<ScalingCell> = [0.5, 1.0, 2.0]
            .iter()
            .map(|&gap| {
                (
                    energy_driven_qubit(gap, 1.0, 1e-3, 97),
                    StateVector::plus_x(),
                )
            })
            .collect();
        let fit = estimate_reduction_scaling(&cells, 400.0, 1e-3, 60).unwrap();
        assert_eq!(fit.points.len(), 3);
        // ΔE = gap/2 for equal superpositions
        assert!((fit.points[0].0 - 0.25).abs() < 1e-12);
        assert!(
            (fit.slope + 2.0).abs() < 0.5,
            "slope {} (stderr {})",
            fit.slope,
            fit.slope_stderr
        );
    }

    #[test]
    fn scaling_rejects_mixed_couplings() {
        let cells: Vec<ScalingCell> = vec![
            (energy_driven_qubit(0.5, 1.0, 1e-3, 1), StateVector::plus_x()),
            (energy_driven_qubit(1.0, 2.0, 1e-3, 1), StateVector::plus_x()),
            (energy_driven_qubit(2.0, 1.0, 1e-3, 1), StateVector::plus_x()),
        ];
        match estimate_reduction_scaling(&cells, 10.0, 1e-3, 10) {
            Err(Error::Validation(msg)) => assert!(msg.contains("sigma"), "{msg}"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn energy_variance_is_non_increasing_in_the_mean() {
        // reduction squeezes the energy distribution: the ensemble mean of
        // <(H - <H>)^2> can only go down, within Monte Carlo resolution
        let spec = energy_driven_qubit(1.0, 1.0, 1e-3, 29);
        let psi0 = StateVector::from_real(&[0.3f64.sqrt(), 0.7f64.sqrt()]);
        let run = run_ensemble(&spec, &psi0, 6.0, 1e-6, 400, 600).unwrap();
        let h = spec.hamiltonian().clone();
        let n_slots = run.records[0].1.times.len();
        let variance_of = |slot: usize| -> Vec<f64> {
            run.records
                .iter()
                .map(|(_, r)| {
                    let state = &r.states[slot];
                    let h_psi = state.apply_matrix(h.matrix());
                    let mean = state.inner_product(&h_psi).re;
                    (h_psi.norm_sqr() - mean * mean).max(0.0)
                })
                .collect()
        };
        let mut rng = resampling_rng(spec.seed);
        let mut previous: Option<(f64, f64)> = None;
        for slot in 0..n_slots {
            let values = variance_of(slot);
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let se = bootstrap_se(&values, &mut rng);
            if let Some((prev_mean, prev_se)) = previous {
                let slack = 2.0 * (se * se + prev_se * prev_se).sqrt();
                assert!(
                    mean <= prev_mean + slack,
                    "slot {slot}: variance rose {prev_mean:.5} -> {mean:.5} (slack {slack:.5})"
                );
            }
            previous = Some((mean, se));
        }
    }

    #[test]
    fn scaling_rejects_degenerate_dispersion() {
        let cells: Vec<ScalingCell> = vec![
            (energy_driven_qubit(1.0, 1.0, 1e-3, 1), StateVector::plus_x()),
            (energy_driven_qubit(1.0, 1.0, 1e-3, 1), StateVector::basis(2, 0)),
            (energy_driven_qubit(2.0, 1.0, 1e-3, 1), StateVector::plus_x()),
        ];
        assert!(matches!(
            estimate_reduction_scaling(&cells, 10.0, 1e-3, 10),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn scaling_requires_three_points() {
        let cells: Vec<ScalingCell> = vec![
            (energy_driven_qubit(1.0, 1.0, 1e-3, 1), StateVector::plus_x()),
        ];
        assert!(matches!(
            estimate_reduction_scaling(&cells, 10.0, 1e-3, 10),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn scaling_reports_insufficient_resolution() {
        // far too short a horizon: almost everything stays unresolved
        let cells: Vec<ScalingCell> = [0.5, 1.0, 2.0]
            .iter()
            .map(|&gap| {
                (
                    energy_driven_qubit(gap, 1.0, 1e-3, 3),
                    StateVector::plus_x(),
                )
            })
            .collect();
        assert!(matches!(
            estimate_reduction_scaling(&cells, 0.01, 1e-6, 20),
            Err(Error::InsufficientResolved(_))
        ));
    }

    #[test]
    fn martingale_mean_weights_stay_flat() {
        let spec = energy_driven_qubit(1.0, 1.0, 1e-3, 19);
        let psi0 = StateVector::from_real(&[0.3f64.sqrt(), 0.7f64.sqrt()]);
        let run = run_ensemble(&spec, &psi0, 3.0, 1e-6, 400, 300).unwrap();
        let series = run.mean_weights();
        let w0 = series[0].1[1];
        assert!((w0 - 0.7).abs() < 1e-12);
        // per-time bootstrap SE of the mean weight
        let mut rng = resampling_rng(spec.seed);
        for (slot, (_, means)) in series.iter().enumerate() {
            let values: Vec<f64> = run
                .records
                .iter()
                .map(|(_, r)| r.projector_weights[slot][1])
                .collect();
            let se = bootstrap_se(&values, &mut rng);
            assert!(
                (means[1] - w0).abs() <= 3.0 * se + 1e-9,
                "slot {slot}: mean {} vs {} (se {se})",
                means[1],
                w0
            );
        }
    }

    #[test]
    fn median_handles_even_and_odd_lengths() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn fit_line_recovers_exact_slopes() {
        let points: Vec<(f64, f64)> = (1..=5).map(|k| (k as f64, 3.0 - 2.0 * k as f64)).collect();
        let (slope, stderr) = fit_line(&points);
        assert!((slope + 2.0).abs() < 1e-12);
        assert!(stderr < 1e-12);
    }
}
