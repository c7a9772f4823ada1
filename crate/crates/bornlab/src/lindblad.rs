//! Deterministic reference integrator for the noise-averaged density matrix.
//!
//! Averaging the stochastic pure-state flow over the Wiener increments
//! yields a double-commutator Lindblad-type equation,
//!
//! ```text
//! dE[ρ]/dt = −i[H, E[ρ]] − (1/8)σ² Σ_j [A_j, [A_j, E[ρ]]]
//! ```
//!
//! (E[·] is the stochastic expectation, not the quantum one). This module
//! integrates it with classical fixed-step RK4 and checks the stationarity
//! theorem: a stationary E[ρ] must commute with H and with every A_j,
//! because the dissipation rate is a sum of traces of positive-semidefinite
//! products and can only vanish commutator by commutator.
//!
//! Ensemble means from the stochastic integrator are validated against this
//! oracle; the two routes share no integration code.

use crate::error::{Error, Result};
use crate::matrix::{c64, commutator, ComplexMatrix};
use crate::observable::HermitianObservable;
use crate::sde::StochasticProcessSpec;
use crate::state::{check_dims, min_eigenvalue, DensityMatrix};

/// Averaged-evolution parameters: the stochastic spec minus step and seed.
#[derive(Clone, Debug)]
pub struct LindbladSpec {
    hamiltonian: HermitianObservable,
    collapse_ops: Vec<HermitianObservable>,
    pub sigma: f64,
    /// Mirrors the stochastic spec: when false the Hamiltonian term is
    /// dropped (localization approximation).
    pub include_hamiltonian: bool,
}

impl LindbladSpec {
    pub fn new(
        hamiltonian: HermitianObservable,
        collapse_ops: Vec<HermitianObservable>,
        sigma: f64,
        include_hamiltonian: bool,
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
        Ok(Self {
            hamiltonian,
            collapse_ops,
            sigma,
            include_hamiltonian,
        })
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
}

impl From<&StochasticProcessSpec> for LindbladSpec {
    fn from(spec: &StochasticProcessSpec) -> Self {
        Self {
            hamiltonian: spec.hamiltonian().clone(),
            collapse_ops: spec.collapse_ops().to_vec(),
            sigma: spec.sigma,
            include_hamiltonian: spec.include_hamiltonian,
        }
    }
}

fn rhs_matrix(m: &ComplexMatrix, spec: &LindbladSpec) -> ComplexMatrix {
    let mut rhs = if spec.include_hamiltonian {
        commutator(spec.hamiltonian.matrix(), m).scale(c64(0.0, -1.0))
    } else {
        ComplexMatrix::zeros(m.dim())
    };
    let strength = -spec.sigma * spec.sigma / 8.0;
    for op in &spec.collapse_ops {
        let double = commutator(op.matrix(), &commutator(op.matrix(), m));
        rhs = &rhs + &double.scale_real(strength);
    }
    rhs
}

/// Right-hand side of the averaged evolution. Hermitian and traceless for
/// any valid input.
pub fn lindblad_rhs(rho: &DensityMatrix, spec: &LindbladSpec) -> Result<ComplexMatrix> {
    check_dims(spec.dim(), rho.dim())?;
    Ok(rhs_matrix(rho.matrix(), spec))
}

fn rk4_step(m: &ComplexMatrix, spec: &LindbladSpec, dt: f64) -> ComplexMatrix {
    let k1 = rhs_matrix(m, spec);
    let k2 = rhs_matrix(&(m + &k1.scale_real(dt / 2.0)), spec);
    let k3 = rhs_matrix(&(m + &k2.scale_real(dt / 2.0)), spec);
    let k4 = rhs_matrix(&(m + &k3.scale_real(dt)), spec);
    let incr = &(&k1 + &k4) + &(&k2 + &k3).scale_real(2.0);
    (m + &incr.scale_real(dt / 6.0)).symmetrized()
}

/// Integrate the averaged evolution to time `t` with fixed-step RK4,
/// symmetrizing each step. Positivity is a diagnostic: RK4 can transiently
/// dip to −1e-8, anything below −1e-6 errors.
pub fn evolve_lindblad(
    rho0: &DensityMatrix,
    spec: &LindbladSpec,
    t: f64,
    dt: f64,
) -> Result<DensityMatrix> {
    let samples = evolve_lindblad_sampled(rho0, spec, &[t], dt)?;
    Ok(samples.into_iter().next().unwrap())
}

/// Integrate and return the state at each requested time (strictly
/// increasing, ≥ 0).
pub fn evolve_lindblad_sampled(
    rho0: &DensityMatrix,
    spec: &LindbladSpec,
    times: &[f64],
    dt: f64,
) -> Result<Vec<DensityMatrix>> {
    check_dims(spec.dim(), rho0.dim())?;
    assert!(dt > 0.0, "dt must be positive");
    assert!(
        times.windows(2).all(|w| w[1] > w[0]) && times.first().is_none_or(|&t| t >= 0.0),
        "sample times must be nonnegative and strictly increasing"
    );
    let mut out = Vec::with_capacity(times.len());
    let mut m = rho0.matrix().clone();
    let mut now = 0.0_f64;
    for &target in times {
        let span = target - now;
        let whole = (span / dt).floor() as usize;
        for _ in 0..whole {
            m = rk4_step(&m, spec, dt);
        }
        let remainder = span - whole as f64 * dt;
        if remainder > 1e-12 * dt.max(1.0) {
            m = rk4_step(&m, spec, remainder);
        }
        now = target;

        let trace = m.trace();
        debug_assert!((trace.re - 1.0).abs() < 1e-10 && trace.im.abs() < 1e-10);
        let min_eig = min_eigenvalue(&m);
        if min_eig < -1e-6 {
            return Err(Error::PositivityLost {
                min_eigenvalue: min_eig,
                time: now,
            });
        }
        out.push(DensityMatrix::from_matrix_unchecked(m.clone()));
    }
    Ok(out)
}

/// Stationarity diagnostics for a candidate E[ρ].
#[derive(Clone, Debug)]
pub struct StationarityReport {
    /// True iff ‖rhs‖_max ≤ tol.
    pub is_stationary: bool,
    /// ‖[H, Eρ]‖_max.
    pub hamiltonian_commutator_norm: f64,
    /// max_j ‖[A_j, Eρ]‖_max.
    pub max_collapse_commutator_norm: f64,
    /// (1/8)σ² Σ_j Tr [A_j,Eρ][A_j,Eρ]† ≥ 0; the rate at which purity is
    /// dissipated. Zero exactly when every [A_j, Eρ] vanishes.
    pub dissipation: f64,
    /// ‖rhs‖_max, the quantity compared against tol.
    pub rhs_norm: f64,
}

/// Evaluate the stationarity theorem's chain for one state: dissipation is
/// nonnegative always, and a vanishing right-hand side forces both
/// commutators to vanish.
pub fn stationarity_check(
    rho: &DensityMatrix,
    spec: &LindbladSpec,
    tol: f64,
) -> StationarityReport {
    let rhs_norm = rhs_matrix(rho.matrix(), spec).max_norm();
    let h_comm = commutator(spec.hamiltonian.matrix(), rho.matrix()).max_norm();
    let mut max_a_comm = 0.0_f64;
    let mut dissipation = 0.0_f64;
    for op in &spec.collapse_ops {
        let comm = commutator(op.matrix(), rho.matrix());
        max_a_comm = max_a_comm.max(comm.max_norm());
        // Tr X X† = Σ |X_ij|²
        let frob_sqr: f64 = comm.inner().iter().map(|z| z.norm_sqr()).sum();
        dissipation += spec.sigma * spec.sigma / 8.0 * frob_sqr;
    }
    StationarityReport {
        is_stationary: rhs_norm <= tol,
        hamiltonian_commutator_norm: h_comm,
        max_collapse_commutator_norm: max_a_comm,
        dissipation,
        rhs_norm,
    }
}
