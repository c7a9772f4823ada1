//! Itô integrator for stochastic modifications of the Schrödinger equation.
//!
//! A pure state |z⟩ evolves under
//!
//! ```text
//! d|z⟩ = [α dt + Σ_j β_j dW_t^j] |z⟩
//! α    = −iH·[H on] − (1/8)σ² Σ_j (A_j − ⟨A_j⟩)²
//! β_j  = (1/2)σ (A_j − ⟨A_j⟩)
//! ⟨A⟩  = ⟨z|A|z⟩ / ⟨z|z⟩
//! ```
//!
//! with independent Gaussian increments dW_t^j of variance dt. The Itô
//! expansion of d⟨z|z⟩ then has both its dt and dW coefficients identically
//! zero, so the flow preserves the norm pathwise; the Euler–Maruyama
//! discretization only leaves discretization drift, which each step removes
//! by renormalizing. The same flow makes every eigenspace weight ⟨P_n⟩ a
//! martingale, which is the mechanism that turns initial weights into
//! outcome frequencies.
//!
//! Discretization: one step applies the exact spectral propagator
//! exp(−iH dt) and then an Euler–Maruyama update of the stochastic terms
//! (Lie splitting). Weak order stays 1; the σ = 0 limit is exact instead of
//! accumulating O(dt) phase error, which keeps the deterministic cross-check
//! against the averaged-evolution oracle at machine precision.
//!
//! The matching density-matrix form is
//!
//! ```text
//! dρ = −i[H,ρ] dt − (1/8)σ² Σ_j [A_j,[A_j,ρ]] dt + (1/2)σ Σ_j [ρ,[ρ,A_j]] dW_t^j
//! ```
//!
//! driven by the same noise stream; `step_density` implements it for
//! cross-checking against the pure-state path.

use crate::error::{Error, Result};
use crate::matrix::{c64, commutator, C64, ComplexMatrix};
use crate::observable::HermitianObservable;
use crate::state::{check_dims, DensityMatrix, StateVector};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

/// Norm-defect threshold above which a step is rejected as a dt failure.
const STEP_REJECT_DEFECT: f64 = 0.1;

/// Complete definition of one stochastic run: Hamiltonian, collapse
/// operators A_j, coupling strength σ, integrator step, and master seed.
#[derive(Clone, Debug)]
pub struct StochasticProcessSpec {
    hamiltonian: HermitianObservable,
    collapse_ops: Vec<HermitianObservable>,
    /// Stochastic coupling strength σ ≥ 0, units 1/√time (ħ = 1).
    pub sigma: f64,
    /// Integrator step, > 0.
    pub dt: f64,
    /// When false, the Schrödinger term −iHz is dropped and only the
    /// stochastic terms are kept (the localization-process approximation).
    pub include_hamiltonian: bool,
    /// Master seed; trajectory k uses the counter-based substream k.
    pub seed: u64,
}

impl StochasticProcessSpec {
    pub fn new(
        hamiltonian: HermitianObservable,
        collapse_ops: Vec<HermitianObservable>,
        sigma: f64,
        dt: f64,
        include_hamiltonian: bool,
        seed: u64,
    ) -> Result<Self> {
        if collapse_ops.is_empty() {
            return Err(Error::Validation(
                "at least one collapse operator is required".into(),
            ));
        }
        for op in &collapse_ops {
            check_dims(hamiltonian.dim(), op.dim())?;
        }
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::Validation(format!("sigma must be >= 0, got {sigma}")));
        }
        if !dt.is_finite() || dt <= 0.0 {
            return Err(Error::Validation(format!("dt must be > 0, got {dt}")));
        }
        Ok(Self {
            hamiltonian,
            collapse_ops,
            sigma,
            dt,
            include_hamiltonian,
            seed,
        })
    }

    /// Energy-driven process: A = H, the case where reduction competes with
    /// nothing and the stationary states are the energy eigenstates.
    pub fn energy_driven(
        hamiltonian: HermitianObservable,
        sigma: f64,
        dt: f64,
        seed: u64,
    ) -> Result<Self> {
        let a = hamiltonian.clone();
        Self::new(hamiltonian, vec![a], sigma, dt, true, seed)
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn hamiltonian(&self) -> &HermitianObservable {
        &self.hamiltonian
    }

    pub fn collapse_ops(&self) -> &[HermitianObservable] {
        &self.collapse_ops
    }

    /// The observable whose eigenspaces are monitored for reduction: the
    /// first collapse operator (identical to H for energy-driven specs).
    pub fn monitor(&self) -> &HermitianObservable {
        &self.collapse_ops[0]
    }

    /// Deterministic per-trajectory generator: master seed, substream k.
    pub fn trajectory_rng(&self, trajectory_index: u64) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(trajectory_index);
        rng
    }
}

/// One Gaussian increment per collapse operator, each ~ N(0, dt).
#[derive(Clone, Debug)]
pub struct NoiseIncrement {
    pub values: Vec<f64>,
}

/// Draw `count` independent increments of variance `dt`, advancing the
/// generator deterministically.
pub fn generate_noise(count: usize, dt: f64, rng: &mut impl Rng) -> NoiseIncrement {
    assert!(dt > 0.0, "dt must be positive");
    let scale = dt.sqrt();
    NoiseIncrement {
        values: (0..count)
            .map(|_| {
                let g: f64 = rng.sample(StandardNormal);
                g * scale
            })
            .collect(),
    }
}

/// Drift vector α·z and diffusion vectors β_j·z for the current state.
///
/// ⟨A_j⟩ is computed with the explicit norm division, so the martingale
/// structure survives states that are slightly off unit norm.
pub fn drift_and_diffusion(
    z: &StateVector,
    spec: &StochasticProcessSpec,
) -> Result<(StateVector, Vec<StateVector>)> {
    check_dims(spec.dim(), z.dim())?;
    let norm_sqr = z.norm_sqr();
    let mut drift = DVector::<C64>::zeros(z.dim());
    if spec.include_hamiltonian {
        let hz = spec.hamiltonian.matrix().apply(z.inner());
        drift += hz.map(|v| v * c64(0.0, -1.0));
    }
    let mut diffusions = Vec::with_capacity(spec.collapse_ops.len());
    for op in &spec.collapse_ops {
        let az = op.matrix().apply(z.inner());
        let expect = z
            .inner()
            .iter()
            .zip(az.iter())
            .map(|(zi, azi)| zi.conj() * azi)
            .sum::<C64>()
            .re
            / norm_sqr;
        // w = (A − ⟨A⟩) z
        let w = &az - &z.inner().map(|v| v * c64(expect, 0.0));
        // (A − ⟨A⟩)² z = (A − ⟨A⟩) w
        let aw = op.matrix().apply(&w);
        let u = aw - w.map(|v| v * c64(expect, 0.0));
        drift += u.map(|v| v * c64(-spec.sigma * spec.sigma / 8.0, 0.0));
        diffusions.push(StateVector::from_inner(
            w.map(|v| v * c64(0.5 * spec.sigma, 0.0)),
        ));
    }
    Ok((StateVector::from_inner(drift), diffusions))
}

/// Scratch buffers for the inner integration loop. One trajectory step does
/// no heap allocation.
struct StepBuffers {
    rotated: DVector<C64>,
    az: DVector<C64>,
    w: DVector<C64>,
    next: DVector<C64>,
    coeffs: DVector<C64>,
}

impl StepBuffers {
    fn new(dim: usize) -> Self {
        Self {
            rotated: DVector::zeros(dim),
            az: DVector::zeros(dim),
            w: DVector::zeros(dim),
            next: DVector::zeros(dim),
            coeffs: DVector::zeros(dim),
        }
    }
}

/// The exact one-step Hamiltonian propagator, when the spec keeps the
/// Schrödinger term.
fn propagator_for(spec: &StochasticProcessSpec) -> Option<DMatrix<C64>> {
    spec.include_hamiltonian
        .then(|| crate::evolution::hamiltonian_step(&spec.hamiltonian, spec.dt).into_inner())
}

/// Canonical split step: exact Hamiltonian rotation (if any), then an
/// Euler–Maruyama update of the stochastic terms. Writes the renormalized
/// next state into `bufs.next` and returns the signed pre-renormalization
/// norm defect.
fn em_step(
    z: &DVector<C64>,
    spec: &StochasticProcessSpec,
    propagator: Option<&DMatrix<C64>>,
    noise: &[f64],
    bufs: &mut StepBuffers,
) -> f64 {
    let base: &DVector<C64> = match propagator {
        Some(u) => {
            bufs.rotated.gemv(C64::ONE, u, z, C64::ZERO);
            &bufs.rotated
        }
        None => z,
    };
    let norm_sqr: f64 = base.iter().map(|v| v.norm_sqr()).sum();
    bufs.next.copy_from(base);
    for (op, &dw) in spec.collapse_ops.iter().zip(noise) {
        bufs.az.gemv(C64::ONE, op.matrix().inner(), base, C64::ZERO);
        let expect = base
            .iter()
            .zip(bufs.az.iter())
            .map(|(zi, azi)| (zi.conj() * azi).re)
            .sum::<f64>()
            / norm_sqr;
        // w = (A − ⟨A⟩) z
        bufs.w.copy_from(&bufs.az);
        bufs.w.axpy(c64(-expect, 0.0), base, C64::ONE);
        // diffusion: next += (σ/2) dW · w
        bufs.next.axpy(c64(0.5 * spec.sigma * dw, 0.0), &bufs.w, C64::ONE);
        // stochastic drift: next −= (σ²/8) dt · (A − ⟨A⟩) w
        bufs.az.gemv(C64::ONE, op.matrix().inner(), &bufs.w, C64::ZERO);
        bufs.az.axpy(c64(-expect, 0.0), &bufs.w, C64::ONE);
        bufs.next.axpy(
            c64(-spec.sigma * spec.sigma * spec.dt / 8.0, 0.0),
            &bufs.az,
            C64::ONE,
        );
    }
    let new_norm: f64 = bufs.next.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let defect = new_norm - 1.0;
    bufs.next /= c64(new_norm, 0.0);
    defect
}

/// One Euler–Maruyama step of the pure-state evolution, renormalized.
pub fn step_pure(
    z: &StateVector,
    spec: &StochasticProcessSpec,
    noise: &NoiseIncrement,
) -> Result<StateVector> {
    step_pure_with_defect(z, spec, noise).map(|(state, _)| state)
}

/// Like [`step_pure`], additionally returning the signed pre-renormalization
/// norm defect ‖z'‖ − 1. Averaged along a trajectory the defect scales as
/// dt^{3/2}: its O(dt) part, (σ²/8)⟨(A−⟨A⟩)²⟩(dW² − dt), is mean-zero
/// because the Itô rule holds on average.
pub fn step_pure_with_defect(
    z: &StateVector,
    spec: &StochasticProcessSpec,
    noise: &NoiseIncrement,
) -> Result<(StateVector, f64)> {
    check_dims(spec.dim(), z.dim())?;
    if noise.values.len() != spec.collapse_ops.len() {
        return Err(Error::DimensionMismatch {
            left: noise.values.len(),
            right: spec.collapse_ops.len(),
        });
    }
    let mut bufs = StepBuffers::new(z.dim());
    let propagator = propagator_for(spec);
    let defect = em_step(z.inner(), spec, propagator.as_ref(), &noise.values, &mut bufs);
    if defect.abs() > STEP_REJECT_DEFECT {
        return Err(Error::StepRejected {
            defect: defect.abs(),
            time: 0.0,
        });
    }
    Ok((StateVector::from_inner(bufs.next.clone()), defect))
}

/// One Euler–Maruyama step of the density-matrix evolution, symmetrized and
/// trace-normalized.
///
/// Pure states sit on the boundary of the positive cone, so the discrete
/// noise term pushes the smallest eigenvalue negative by O(σ²dt) even for a
/// perfectly valid configuration; the positivity guard therefore scales
/// with the step and fires only on excursions beyond that band (dt too
/// large), never below the absolute floor of 1e-6.
pub fn step_density(
    rho: &DensityMatrix,
    spec: &StochasticProcessSpec,
    noise: &NoiseIncrement,
) -> Result<DensityMatrix> {
    check_dims(spec.dim(), rho.dim())?;
    if noise.values.len() != spec.collapse_ops.len() {
        return Err(Error::DimensionMismatch {
            left: noise.values.len(),
            right: spec.collapse_ops.len(),
        });
    }
    // split step: exact unitary conjugation, then the stochastic terms
    let rotated = match propagator_for(spec) {
        Some(u) => {
            let u = ComplexMatrix::from_inner(u);
            &(&u * rho.matrix()) * &u.adjoint()
        }
        None => rho.matrix().clone(),
    };
    let mut next = rotated.clone();
    for (op, &dw) in spec.collapse_ops.iter().zip(&noise.values) {
        let a = op.matrix();
        let a_comm = commutator(a, &rotated);
        let double = commutator(a, &a_comm);
        next = &next + &double.scale_real(-spec.sigma * spec.sigma * spec.dt / 8.0);
        let noise_term = commutator(&rotated, &commutator(&rotated, a));
        next = &next + &noise_term.scale_real(0.5 * spec.sigma * dw);
    }
    let sym = next.symmetrized();
    let trace = sym.trace().re;
    let renormed = sym.scale_real(1.0 / trace);
    let min_eig = crate::state::min_eigenvalue(&renormed);
    let band = 3.0 * spec.sigma * spec.sigma * spec.dt * spec.collapse_ops.len() as f64;
    if min_eig < -band.max(1e-6) {
        return Err(Error::PositivityLost {
            min_eigenvalue: min_eig,
            time: 0.0,
        });
    }
    Ok(DensityMatrix::from_matrix_unchecked(renormed))
}

/// Resolution status of a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// Index into the monitor observable's spectrum.
    Resolved(usize),
    Unresolved,
}

/// One stochastic realization: snapshots on a uniform sample grid, the
/// monitored eigenspace weights, and the reduction outcome.
#[derive(Clone, Debug)]
pub struct TrajectoryRecord {
    /// Sample times, strictly increasing, starting at 0.
    pub times: Vec<f64>,
    /// State snapshot at each sample time. After resolution the state is
    /// frozen (eigenstates of every A_j are fixed points of the flow).
    pub states: Vec<StateVector>,
    /// ⟨P_n⟩ per sample, in the monitor's spectrum order; each row sums to 1.
    pub projector_weights: Vec<Vec<f64>>,
    pub outcome: Outcome,
    /// First time the dominant weight reached 1 − ε, linearly interpolated
    /// between the bracketing steps.
    pub hitting_time: Option<f64>,
}

/// Run one trajectory with the substream `stream`. Steps until the dominant
/// monitored weight reaches 1 − `epsilon` or `t_max` is exhausted, sampling
/// every `stride` steps.
pub fn run_trajectory_stream(
    spec: &StochasticProcessSpec,
    psi0: &StateVector,
    t_max: f64,
    epsilon: f64,
    stride: usize,
    stream: u64,
) -> Result<TrajectoryRecord> {
    check_dims(spec.dim(), psi0.dim())?;
    assert!(t_max > 0.0, "t_max must be positive");
    assert!(epsilon > 0.0 && epsilon < 1.0, "epsilon must be in (0, 1)");
    assert!(stride >= 1, "stride must be at least 1");
    let threshold = 1.0 - epsilon;
    let n_steps = (t_max / spec.dt).ceil() as usize;
    let n_ops = spec.collapse_ops.len();
    let monitor = spec.monitor();
    let basis_adjoint = monitor.basis().adjoint();
    let groups = monitor.group_ranges().to_vec();

    let mut rng = spec.trajectory_rng(stream);
    let mut bufs = StepBuffers::new(spec.dim());
    let mut z = psi0.normalized().inner().clone();
    let mut noise = vec![0.0_f64; n_ops];
    let sqrt_dt = spec.dt.sqrt();
    let propagator = propagator_for(spec);

    let weights_of = |coeffs: &mut DVector<C64>, z: &DVector<C64>| -> Vec<f64> {
        coeffs.gemv(C64::ONE, &basis_adjoint, z, C64::ZERO);
        groups
            .iter()
            .map(|&(start, count)| (start..start + count).map(|k| coeffs[k].norm_sqr()).sum())
            .collect()
    };

    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut weight_rows: Vec<Vec<f64>> = Vec::new();

    let mut weights = weights_of(&mut bufs.coeffs, &z);
    times.push(0.0);
    states.push(StateVector::from_inner(z.clone()));
    weight_rows.push(weights.clone());

    let (mut outcome, mut hitting_time) = (Outcome::Unresolved, None);
    let argmax = |w: &[f64]| {
        w.iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap()
    };
    let mut prev_max = weights[argmax(&weights)];
    if prev_max >= threshold {
        outcome = Outcome::Resolved(argmax(&weights));
        hitting_time = Some(0.0);
    }

    let mut resolved_at = if hitting_time.is_some() { Some(0usize) } else { None };
    if resolved_at.is_none() {
        for step in 1..=n_steps {
            for slot in noise.iter_mut() {
                let g: f64 = rng.sample(StandardNormal);
                *slot = g * sqrt_dt;
            }
            let defect = em_step(&z, spec, propagator.as_ref(), &noise, &mut bufs);
            if defect.abs() > STEP_REJECT_DEFECT {
                return Err(Error::StepRejected {
                    defect: defect.abs(),
                    time: step as f64 * spec.dt,
                });
            }
            std::mem::swap(&mut z, &mut bufs.next);
            weights = weights_of(&mut bufs.coeffs, &z);
            let best = argmax(&weights);
            let best_w = weights[best];
            if step % stride == 0 {
                times.push(step as f64 * spec.dt);
                states.push(StateVector::from_inner(z.clone()));
                weight_rows.push(weights.clone());
            }
            if best_w >= threshold {
                let t_prev = (step - 1) as f64 * spec.dt;
                let frac = if best_w > prev_max {
                    ((threshold - prev_max) / (best_w - prev_max)).clamp(0.0, 1.0)
                } else {
                    1.0
                };
                outcome = Outcome::Resolved(best);
                hitting_time = Some(t_prev + frac * spec.dt);
                resolved_at = Some(step);
                break;
            }
            prev_max = best_w;
        }
    }

    // Freeze the post-resolution state on the remaining sample grid so every
    // record shares the same grid.
    let first_missing = match resolved_at {
        Some(step) => step / stride + 1,
        None => n_steps / stride + 1,
    };
    for k in first_missing..=(n_steps / stride) {
        times.push((k * stride) as f64 * spec.dt);
        states.push(StateVector::from_inner(z.clone()));
        weight_rows.push(weights.clone());
    }

    Ok(TrajectoryRecord {
        times,
        states,
        projector_weights: weight_rows,
        outcome,
        hitting_time,
    })
}

/// Run one trajectory on substream 0 (the same realization that an ensemble
/// assigns to trajectory index 0).
pub fn run_trajectory(
    spec: &StochasticProcessSpec,
    psi0: &StateVector,
    t_max: f64,
    epsilon: f64,
    stride: usize,
) -> Result<TrajectoryRecord> {
    run_trajectory_stream(spec, psi0, t_max, epsilon, stride, 0)
}

/// Gaussian localization operators on an N-site chain with unit spacing:
/// A_j = diag_k exp(−(k − j)²/(2ℓ²)). The exact profile is a free choice;
/// what matters is that the joint fixed points are single sites.
pub fn gaussian_localization_ops(sites: usize, width: f64) -> Vec<HermitianObservable> {
    assert!(sites >= 2, "a chain needs at least two sites");
    assert!(width > 0.0, "localization width must be positive");
    (0..sites)
        .map(|j| {
            let diag: Vec<f64> = (0..sites)
                .map(|k| {
                    let d = k as f64 - j as f64;
                    (-d * d / (2.0 * width * width)).exp()
                })
                .collect();
            HermitianObservable::new(ComplexMatrix::from_real_diagonal(&diag))
                .expect("diagonal matrices are Hermitian")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::hamiltonian_step;
    use crate::testkit::{energy_driven_qubit, lattice_localization};

    fn sz_spec(sigma: f64, dt: f64) -> StochasticProcessSpec {
        let h = HermitianObservable::new(ComplexMatrix::pauli_z()).unwrap();
        StochasticProcessSpec::energy_driven(h, sigma, dt, 1)
            .unwrap()
    }

    #[test]
    fn sigma_zero_reduces_to_schrodinger_drift() {
        let spec = sz_spec(0.0, 1e-3);
        let z = StateVector::plus_x();
        let (drift, diffusions) = drift_and_diffusion(&z, &spec).unwrap();
        let expected = z.apply_matrix(&ComplexMatrix::pauli_z().scale(c64(0.0, -1.0)));
        assert!(drift.distance(&expected) < 1e-15);
        for d in &diffusions {
            assert!(d.norm() < 1e-15);
        }
    }

    #[test]
    fn identity_collapse_operator_contributes_nothing() {
        let h = HermitianObservable::new(ComplexMatrix::pauli_z()).unwrap();
        let a = HermitianObservable::new(ComplexMatrix::identity(2)).unwrap();
        let spec = StochasticProcessSpec::new(h, vec![a], 2.0, 1e-3, true, 1).unwrap();
        let z = StateVector::plus_x();
        let (drift, diffusions) = drift_and_diffusion(&z, &spec).unwrap();
        let expected = z.apply_matrix(&ComplexMatrix::pauli_z().scale(c64(0.0, -1.0)));
        assert!(drift.distance(&expected) < 1e-14);
        assert!(diffusions[0].norm() < 1e-14);
    }

    #[test]
    fn collapse_eigenstates_are_fixed_points_of_the_noise() {
        let spec = sz_spec(1.5, 1e-3);
        let z = StateVector::basis(2, 0);
        let (_, diffusions) = drift_and_diffusion(&z, &spec).unwrap();
        assert!(diffusions[0].norm() < 1e-14);
        // a full step only rotates the phase
        let noise = NoiseIncrement { values: vec![0.02] };
        let stepped = step_pure(&z, &spec, &noise).unwrap();
        assert!(stepped.distance_up_to_phase(&z) < 1e-6);
    }

    #[test]
    fn step_pure_matches_exact_unitary_in_deterministic_limit() {
        // the Hamiltonian half of the split step is the spectral propagator
        let dt = 1e-4;
        let spec = sz_spec(0.0, dt);
        let z = StateVector::plus_x();
        let noise = NoiseIncrement { values: vec![0.0] };
        let stepped = step_pure(&z, &spec, &noise).unwrap();
        let exact = z
            .evolve_unitary(&hamiltonian_step(spec.hamiltonian(), dt))
            .unwrap();
        assert!(stepped.distance(&exact) < 1e-14);
    }

    #[test]
    fn step_pure_agrees_with_drift_and_diffusion_assembly() {
        // the plain Euler–Maruyama assembly from the published drift and
        // diffusion coefficients differs from the split step only at O(dt²)
        // deterministic + O(dt^{3/2}) stochastic order
        let spec = sz_spec(1.0, 1e-3);
        let z = StateVector::from_real(&[0.6, 0.8]);
        let mut rng = spec.trajectory_rng(0);
        let noise = generate_noise(1, spec.dt, &mut rng);
        let stepped = step_pure(&z, &spec, &noise).unwrap();

        let (drift, diffusions) = drift_and_diffusion(&z, &spec).unwrap();
        let mut assembled = z.inner() + drift.inner().map(|v| v * c64(spec.dt, 0.0));
        for (d, &dw) in diffusions.iter().zip(&noise.values) {
            assembled += d.inner().map(|v| v * c64(dw, 0.0));
        }
        let assembled = StateVector::from_inner(assembled).normalized();
        let gap = stepped.distance(&assembled);
        assert!(gap < 20.0 * spec.dt.powi(2).max(spec.dt.powf(1.5) * 0.1), "gap {gap}");
    }

    #[test]
    fn single_step_weight_change_is_centered() {
        // martingale at the single-step level: the ensemble mean of the
        // change in ⟨P_n⟩ vanishes within Monte Carlo error
        let spec = sz_spec(1.0, 1e-3);
        let z = StateVector::from_real(&[0.6, 0.8]);
        let monitor = spec.monitor().clone();
        let w0 = monitor.eigenspace_weights(&z)[0];
        let n = 100_000;
        let mut rng = spec.trajectory_rng(77);
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let noise = generate_noise(1, spec.dt, &mut rng);
            let stepped = step_pure(&z, &spec, &noise).unwrap();
            let dw = monitor.eigenspace_weights(&stepped)[0] - w0;
            sum += dw;
            sum_sq += dw * dw;
        }
        let mean = sum / n as f64;
        let std_err = ((sum_sq / n as f64 - mean * mean) / n as f64).sqrt();
        assert!(
            mean.abs() < 4.0 * std_err + 1e-7,
            "single-step weight drift {mean:.3e} exceeds 4 SE {std_err:.3e}"
        );
    }

    #[test]
    fn step_rejected_when_dt_is_absurd() {
        let spec = sz_spec(30.0, 1.0);
        let z = StateVector::plus_x();
        let noise = NoiseIncrement { values: vec![1.0] };
        assert!(matches!(
            step_pure(&z, &spec, &noise),
            Err(Error::StepRejected { .. })
        ));
    }

    #[test]
    fn density_step_fixed_point_when_everything_commutes() {
        let spec = sz_spec(0.7, 1e-3);
        let rho = DensityMatrix::new(ComplexMatrix::from_real_diagonal(&[0.3, 0.7])).unwrap();
        let noise = NoiseIncrement { values: vec![0.03] };
        let stepped = step_density(&rho, &spec, &noise).unwrap();
        assert!((stepped.matrix() - rho.matrix()).max_norm() < 1e-14);
    }

    #[test]
    fn density_step_deterministic_limit_matches_unitary() {
        let dt = 1e-4;
        let spec = sz_spec(0.0, dt);
        let rho = DensityMatrix::from_pure(&StateVector::plus_x());
        let noise = NoiseIncrement { values: vec![0.0] };
        let stepped = step_density(&rho, &spec, &noise).unwrap();
        let exact = rho
            .evolve_unitary(&hamiltonian_step(spec.hamiltonian(), dt))
            .unwrap();
        assert!((stepped.matrix() - exact.matrix()).max_norm() < 1e-13);
    }

    #[test]
    fn pure_and_density_steps_stay_equivalent_with_shared_noise() {
        // state-vector and density-matrix routes driven by the same stream
        let dt = 1e-3;
        let spec = sz_spec(1.0, dt);
        let mut z = StateVector::from_real(&[0.6, 0.8]);
        let mut rho = DensityMatrix::from_pure(&z);
        let mut rng = spec.trajectory_rng(3);
        let mut max_dev: f64 = 0.0;
        for _ in 0..500 {
            let noise = generate_noise(1, dt, &mut rng);
            z = step_pure(&z, &spec, &noise).unwrap();
            rho = step_density(&rho, &spec, &noise).unwrap();
            max_dev = max_dev.max((rho.matrix() - &z.outer()).max_norm());
        }
        assert!(max_dev < 50.0 * dt, "pure/density divergence {max_dev}");
    }

    #[test]
    fn noise_moments_and_determinism() {
        let dt = 1e-2;
        let n = 1_000_000;
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let draws = generate_noise(n, dt, &mut rng);
        let mean: f64 = draws.values.iter().sum::<f64>() / n as f64;
        let var: f64 = draws.values.iter().map(|x| x * x).sum::<f64>() / n as f64 - mean * mean;
        assert!(mean.abs() < 4e-3 * dt.sqrt(), "noise mean {mean}");
        assert!((var - dt).abs() < 0.01 * dt, "noise variance {var}");

        let mut rng2 = ChaCha12Rng::seed_from_u64(5);
        let again = generate_noise(10, dt, &mut rng2);
        assert_eq!(&draws.values[..10], &again.values[..]);
    }

    #[test]
    fn eigenstate_initial_condition_resolves_immediately() {
        let spec = sz_spec(1.0, 1e-3);
        let record = run_trajectory(&spec, &StateVector::basis(2, 0), 0.05, 1e-6, 10).unwrap();
        assert_eq!(record.hitting_time, Some(0.0));
        // |0⟩ has σz = +1, the larger eigenvalue → spectrum index 1
        assert_eq!(record.outcome, Outcome::Resolved(1));
        assert_eq!(record.times.len(), record.states.len());
        assert_eq!(record.times.len(), 6);
    }

    #[test]
    fn no_noise_means_no_reduction() {
        let spec = sz_spec(0.0, 1e-3);
        let record = run_trajectory(&spec, &StateVector::plus_x(), 0.2, 1e-6, 50).unwrap();
        assert_eq!(record.outcome, Outcome::Unresolved);
        assert_eq!(record.hitting_time, None);
        for row in &record.projector_weights {
            assert!((row[0] - 0.5).abs() < 1e-10);
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn energy_driven_qubit_resolves_to_an_eigenstate() {
        let spec = energy_driven_qubit(1.0, 1.0, 1e-3, 42);
        let record = run_trajectory(&spec, &StateVector::plus_x(), 200.0, 1e-6, 100).unwrap();
        match record.outcome {
            Outcome::Resolved(n) => {
                assert!(n < 2);
                let t = record.hitting_time.unwrap();
                assert!(t > 0.0 && t <= 200.0);
                // final snapshot concentrated on the outcome eigenspace
                let last = record.projector_weights.last().unwrap();
                assert!(last[n] > 0.999);
            }
            Outcome::Unresolved => panic!("expected resolution within the horizon"),
        }
    }

    #[test]
    fn trajectory_grid_is_strictly_increasing_and_weights_normalized() {
        let spec = lattice_localization(6, 2.0, 1.2, 1e-3, 9);
        let psi0 = StateVector::uniform_superposition(6);
        let record = run_trajectory(&spec, &psi0, 5.0, 1e-4, 100).unwrap();
        for pair in record.times.windows(2) {
            assert!(pair[1] > pair[0]);
        }
        for row in &record.projector_weights {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn localization_concentrates_on_a_single_site() {
        let spec = lattice_localization(6, 2.0, 2.0, 1e-3, 4);
        let psi0 = StateVector::uniform_superposition(6);
        let record = run_trajectory(&spec, &psi0, 100.0, 1e-4, 100).unwrap();
        match record.outcome {
            Outcome::Resolved(site_group) => {
                // monitor is A_0, whose 6 Gaussian diagonal entries are distinct
                assert!(site_group < 6);
            }
            Outcome::Unresolved => panic!("localization did not resolve"),
        }
    }

    #[test]
    fn fixed_seed_reproduces_the_trajectory_exactly() {
        let spec = sz_spec(1.0, 1e-3);
        let a = run_trajectory(&spec, &StateVector::plus_x(), 1.0, 1e-6, 10).unwrap();
        let b = run_trajectory(&spec, &StateVector::plus_x(), 1.0, 1e-6, 10).unwrap();
        assert_eq!(a.times, b.times);
        assert_eq!(a.hitting_time, b.hitting_time);
        for (x, y) in a.states.iter().zip(&b.states) {
            assert_eq!(x.amplitudes(), y.amplitudes());
        }
    }
}
