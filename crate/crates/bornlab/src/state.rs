//! Pure states and density matrices.
//!
//! A `StateVector` is a general complex vector; normalization is a property
//! checked or imposed where an operation requires it (infinitesimal
//! increments |dψ⟩ are deliberately unnormalized). A `DensityMatrix` is
//! validated at construction: self-adjoint, positive semidefinite, unit
//! trace.

use crate::error::{Error, Result};
use crate::matrix::{c64, C64, ComplexMatrix};
use nalgebra::DVector;

/// Tolerance for the density-matrix invariants.
const DM_TOL: f64 = 1e-12;
/// Positivity slack: eigenvalues may dip this far below zero from roundoff.
const DM_EIG_TOL: f64 = -1e-12;

/// Complex vector in a finite-dimensional Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    inner: DVector<C64>,
}

impl StateVector {
    /// Wrap a complex vector. Panics on empty or non-finite input.
    pub fn from_inner(inner: DVector<C64>) -> Self {
        assert!(!inner.is_empty(), "state dimension must be positive");
        assert!(
            inner.iter().all(|z| z.re.is_finite() && z.im.is_finite()),
            "amplitudes must be finite"
        );
        Self { inner }
    }

    pub fn from_amplitudes(amplitudes: &[C64]) -> Self {
        Self::from_inner(DVector::from_row_slice(amplitudes))
    }

    /// Real amplitude list, e.g. `(√0.3, √0.7)`.
    pub fn from_real(amplitudes: &[f64]) -> Self {
        Self::from_amplitudes(&amplitudes.iter().map(|&x| c64(x, 0.0)).collect::<Vec<_>>())
    }

    /// Basis state |k⟩.
    pub fn basis(dim: usize, k: usize) -> Self {
        assert!(k < dim, "basis index out of range");
        let mut v = DVector::zeros(dim);
        v[k] = C64::ONE;
        Self { inner: v }
    }

    /// Equal superposition of all basis states.
    pub fn uniform_superposition(dim: usize) -> Self {
        let amp = c64(1.0 / (dim as f64).sqrt(), 0.0);
        Self::from_inner(DVector::from_element(dim, amp))
    }

    /// Qubit |+x⟩ = (|0⟩ + |1⟩)/√2.
    pub fn plus_x() -> Self {
        Self::uniform_superposition(2)
    }

    /// Qubit |−x⟩ = (|0⟩ − |1⟩)/√2.
    pub fn minus_x() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_amplitudes(&[c64(s, 0.0), c64(-s, 0.0)])
    }

    pub fn dim(&self) -> usize {
        self.inner.len()
    }

    pub fn inner(&self) -> &DVector<C64> {
        &self.inner
    }

    pub fn amplitudes(&self) -> &[C64] {
        self.inner.as_slice()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.inner.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    /// Rescale to unit norm. Panics on (numerically) null vectors.
    pub fn normalized(&self) -> Self {
        let n = self.norm();
        assert!(n > 1e-300, "cannot normalize a null vector");
        Self {
            inner: self.inner.map(|z| z / n),
        }
    }

    /// ⟨self|other⟩, conjugate-linear in `self`.
    pub fn inner_product(&self, other: &StateVector) -> C64 {
        assert_eq!(self.dim(), other.dim(), "inner product requires matching dims");
        self.inner
            .iter()
            .zip(other.inner.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// ‖self − other‖₂.
    pub fn distance(&self, other: &StateVector) -> f64 {
        (&self.inner - &other.inner)
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Distance modulo global phase: min over φ of ‖self − e^{iφ} other‖₂.
    pub fn distance_up_to_phase(&self, other: &StateVector) -> f64 {
        let overlap = self.inner_product(other);
        let phase = if overlap.norm() > 1e-300 {
            overlap.conj() / overlap.norm()
        } else {
            C64::ONE
        };
        let rotated = StateVector {
            inner: other.inner.map(|z| z * phase),
        };
        self.distance(&rotated)
    }

    /// Outer product |ψ⟩⟨ψ|.
    pub fn outer(&self) -> ComplexMatrix {
        let d = self.dim();
        ComplexMatrix::from_fn(d, |i, j| self.inner[i] * self.inner[j].conj())
    }

    /// ψ → Uψ. Errors unless ‖U†U − 1‖_max ≤ 1e-10.
    pub fn evolve_unitary(&self, u: &ComplexMatrix) -> Result<StateVector> {
        check_unitary(u)?;
        check_dims(u.dim(), self.dim())?;
        Ok(StateVector {
            inner: u.apply(&self.inner),
        })
    }

    /// Unchecked matrix application, for callers that validated `m` already.
    pub fn apply_matrix(&self, m: &ComplexMatrix) -> StateVector {
        StateVector {
            inner: m.apply(&self.inner),
        }
    }
}

pub(crate) fn check_unitary(u: &ComplexMatrix) -> Result<()> {
    let defect = u.unitarity_defect();
    if defect > 1e-10 {
        return Err(Error::NotUnitary { defect });
    }
    Ok(())
}

pub(crate) fn check_dims(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::DimensionMismatch { left, right });
    }
    Ok(())
}

/// Self-adjoint, positive semidefinite, unit-trace matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validate all three invariants and wrap.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let herm = matrix.hermiticity_defect();
        if herm > DM_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "not self-adjoint: max |\u{3c1} - \u{3c1}\u{2020}| = {herm:.3e}"
            )));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > DM_TOL || tr.im.abs() > DM_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "trace = {tr} instead of 1"
            )));
        }
        let min_eig = min_eigenvalue(&matrix);
        if min_eig < DM_EIG_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self { matrix })
    }

    /// Wrap without validation. For integrator internals that re-impose the
    /// invariants themselves.
    pub(crate) fn from_matrix_unchecked(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    /// ρ = |ψ⟩⟨ψ| from a normalized state.
    pub fn from_pure(psi: &StateVector) -> Self {
        let psi = psi.normalized();
        Self { matrix: psi.outer() }
    }

    /// ρ = 1/dim.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    /// Convex mixture Σ wᵢ |ψᵢ⟩⟨ψᵢ| (weights need not be normalized).
    pub fn mixture(parts: &[(f64, StateVector)]) -> Result<Self> {
        assert!(!parts.is_empty());
        let total: f64 = parts.iter().map(|(w, _)| *w).sum();
        let dim = parts[0].1.dim();
        let mut m = ComplexMatrix::zeros(dim);
        for (w, psi) in parts {
            m = &m + &psi.normalized().outer().scale_real(w / total);
        }
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Tr ρ².
    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// True iff ‖ρ² − ρ‖_max ≤ tol (idempotency, the pure-state criterion).
    pub fn is_pure(&self, tol: f64) -> bool {
        let sq = &self.matrix * &self.matrix;
        (&sq - &self.matrix).max_norm() <= tol
    }

    /// Eigenvalues of ρ sorted ascending (the spectral weights ρ_n).
    pub fn spectral_weights(&self) -> Vec<f64> {
        let mut eigs: Vec<f64> = self
            .matrix
            .inner()
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        eigs.sort_by(f64::total_cmp);
        eigs
    }

    /// ρ → UρU⁻¹. Errors unless U is unitary within 1e-10.
    pub fn evolve_unitary(&self, u: &ComplexMatrix) -> Result<DensityMatrix> {
        check_unitary(u)?;
        check_dims(u.dim(), self.dim())?;
        Ok(DensityMatrix {
            matrix: &(u * &self.matrix) * &u.adjoint(),
        })
    }
}

/// Smallest eigenvalue of a (nearly) Hermitian matrix.
pub(crate) fn min_eigenvalue(m: &ComplexMatrix) -> f64 {
    m.inner()
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}
