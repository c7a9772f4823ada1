//! Observables as self-adjoint operators with a cached spectral
//! decomposition S = Σ_n s_n P_n, where the P_n are orthogonal projectors
//! onto (possibly degenerate) eigenspaces.
//!
//! Eigenvalues closer than a grouping tolerance share one projector: exact
//! degeneracies get split by floating-point eigensolvers, and the degeneracy
//! structure is what the reduction postulate and the reduction monitor act
//! on, so it must be reconstructed explicitly.

use crate::error::{Error, Result};
use crate::matrix::{c64, C64, ComplexMatrix};
use crate::state::{check_dims, DensityMatrix, StateVector};
use nalgebra::DMatrix;

/// One eigenspace: eigenvalue, orthogonal projector, and its rank.
#[derive(Clone, Debug)]
pub struct EigenSpace {
    pub eigenvalue: f64,
    pub projector: ComplexMatrix,
    pub multiplicity: usize,
}

/// Self-adjoint operator with cached spectral data.
///
/// `spectrum` is sorted ascending by eigenvalue. The orthonormal eigenbasis
/// is kept alongside the projectors so basis changes (fast weight
/// evaluation, exact propagators) do not have to be re-derived.
#[derive(Clone, Debug)]
pub struct HermitianObservable {
    matrix: ComplexMatrix,
    spectrum: Vec<EigenSpace>,
    /// Columns are the orthonormal eigenvectors, ordered to match `spectrum`.
    basis: DMatrix<C64>,
    /// Column ranges of `basis` per eigenspace.
    groups: Vec<(usize, usize)>,
}

impl HermitianObservable {
    /// Spectral decomposition with the default grouping tolerance
    /// 1e-9 · max(1, spectral radius).
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let radius = matrix
            .inner()
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(0.0_f64, |acc, &v| acc.max(v.abs()));
        Self::spectral_decompose(matrix, 1e-9 * radius.max(1.0))
    }

    /// Spectral decomposition with an explicit degeneracy-grouping tolerance:
    /// eigenvalues whose neighbouring gap is ≤ `group_tol` are merged into a
    /// single projector.
    pub fn spectral_decompose(matrix: ComplexMatrix, group_tol: f64) -> Result<Self> {
        assert!(group_tol > 0.0, "group_tol must be positive");
        let defect = matrix.hermiticity_defect();
        if defect > 1e-10 {
            return Err(Error::NotHermitian { defect });
        }
        let dim = matrix.dim();
        let eig = matrix.inner().clone().symmetric_eigen();

        // Sort eigenpairs ascending by eigenvalue.
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

        let mut basis = DMatrix::<C64>::zeros(dim, dim);
        for (col, &k) in order.iter().enumerate() {
            basis.set_column(col, &eig.eigenvectors.column(k));
        }
        let sorted: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();

        // Chain-merge adjacent eigenvalues whose gap is within group_tol.
        let mut spectrum = Vec::new();
        let mut groups = Vec::new();
        let mut start = 0;
        while start < dim {
            let mut end = start + 1;
            while end < dim && sorted[end] - sorted[end - 1] <= group_tol {
                end += 1;
            }
            let count = end - start;
            let mean: f64 = sorted[start..end].iter().sum::<f64>() / count as f64;
            let mut proj = DMatrix::<C64>::zeros(dim, dim);
            for col in start..end {
                let v = basis.column(col);
                for i in 0..dim {
                    for j in 0..dim {
                        proj[(i, j)] += v[i] * v[j].conj();
                    }
                }
            }
            spectrum.push(EigenSpace {
                eigenvalue: mean,
                projector: ComplexMatrix::from_inner(proj),
                multiplicity: count,
            });
            groups.push((start, count));
            start = end;
        }

        Ok(Self {
            matrix,
            spectrum,
            basis,
            groups,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Eigenspaces sorted ascending by eigenvalue.
    pub fn spectrum(&self) -> &[EigenSpace] {
        &self.spectrum
    }

    pub fn eigenvalues(&self) -> impl Iterator<Item = f64> + '_ {
        self.spectrum.iter().map(|e| e.eigenvalue)
    }

    /// Number of distinct eigenspaces.
    pub fn n_outcomes(&self) -> usize {
        self.spectrum.len()
    }

    /// Orthonormal eigenbasis (columns), ordered to match `spectrum`.
    pub(crate) fn basis(&self) -> &DMatrix<C64> {
        &self.basis
    }

    /// Column ranges of the eigenbasis per eigenspace.
    pub(crate) fn group_ranges(&self) -> &[(usize, usize)] {
        &self.groups
    }

    pub fn has_degeneracies(&self) -> bool {
        self.spectrum.iter().any(|e| e.multiplicity > 1)
    }

    /// Σ_n exp(f(s_n)) … more precisely Σ_n g(s_n) P_n for a scalar function
    /// g of the eigenvalues. Exact on the cached spectral data.
    pub fn apply_spectral_function(&self, g: impl Fn(f64) -> C64) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim());
        for space in &self.spectrum {
            acc = &acc + &space.projector.scale(g(space.eigenvalue));
        }
        acc
    }

    /// ⟨S⟩ = Tr ρS. The imaginary residue (pure roundoff for valid inputs)
    /// is asserted small and discarded.
    pub fn expectation(&self, rho: &DensityMatrix) -> Result<f64> {
        check_dims(self.dim(), rho.dim())?;
        let val = (rho.matrix() * &self.matrix).trace();
        assert!(
            val.im.abs() <= 1e-10 * (1.0 + val.re.abs()),
            "Tr \u{3c1}S picked up an imaginary part: {}",
            val.im
        );
        Ok(val.re)
    }

    /// ⟨S⟩ for a pure normalized state.
    pub fn expectation_pure(&self, psi: &StateVector) -> Result<f64> {
        check_dims(self.dim(), psi.dim())?;
        let val = psi.inner_product(&psi.apply_matrix(&self.matrix));
        Ok(val.re)
    }

    /// Eigenspace weights ⟨ψ|P_n|ψ⟩ in spectrum order, computed in the
    /// eigenbasis (one matrix-vector product for all weights).
    pub fn eigenspace_weights(&self, psi: &StateVector) -> Vec<f64> {
        assert_eq!(self.dim(), psi.dim());
        let coeffs = self.basis.ad_mul(psi.inner());
        self.groups
            .iter()
            .map(|&(start, count)| {
                (start..start + count).map(|k| coeffs[k].norm_sqr()).sum()
            })
            .collect()
    }

    /// Born probabilities: list of (s_n, p_n) with p_n = ⟨ψ|P_n|ψ⟩.
    pub fn born_probabilities(&self, psi: &StateVector) -> Result<Vec<(f64, f64)>> {
        check_dims(self.dim(), psi.dim())?;
        let psi = psi.normalized();
        Ok(self
            .spectrum
            .iter()
            .map(|space| {
                let projected = psi.apply_matrix(&space.projector);
                (space.eigenvalue, psi.inner_product(&projected).re.max(0.0))
            })
            .collect())
    }

    /// Reduction postulate: project onto eigenspace `n` and renormalize,
    /// ψ → P_n ψ / ⟨ψ|P_n|ψ⟩^{1/2}.
    pub fn reduce(&self, psi: &StateVector, n: usize) -> Result<StateVector> {
        check_dims(self.dim(), psi.dim())?;
        assert!(n < self.spectrum.len(), "outcome index out of range");
        let projected = psi.apply_matrix(&self.spectrum[n].projector);
        let p = projected.norm_sqr();
        if p <= 1e-14 {
            return Err(Error::ZeroProbabilityOutcome {
                index: n,
                probability: p,
            });
        }
        Ok(StateVector::from_inner(
            projected.inner().map(|z| z / p.sqrt()),
        ))
    }

    /// Check completeness (ΣP = 1), orthogonality (P_n P_m = δ_nm P_n), and
    /// reconstruction (Σ s_n P_n = S) of the cached spectral data.
    pub fn validate_spectrum(&self, tol: f64) -> std::result::Result<(), String> {
        let dim = self.dim();
        let mut sum = ComplexMatrix::zeros(dim);
        let mut reconstruction = ComplexMatrix::zeros(dim);
        for space in &self.spectrum {
            sum = &sum + &space.projector;
            reconstruction = &reconstruction + &space.projector.scale(c64(space.eigenvalue, 0.0));
        }
        let completeness = (&sum - &ComplexMatrix::identity(dim)).max_norm();
        if completeness > tol {
            return Err(format!("projectors not complete: defect {completeness:.3e}"));
        }
        for (i, a) in self.spectrum.iter().enumerate() {
            for (j, b) in self.spectrum.iter().enumerate() {
                let prod = &a.projector * &b.projector;
                let expected = if i == j {
                    a.projector.clone()
                } else {
                    ComplexMatrix::zeros(dim)
                };
                let defect = (&prod - &expected).max_norm();
                if defect > tol {
                    return Err(format!(
                        "projector orthogonality violated for ({i},{j}): defect {defect:.3e}"
                    ));
                }
            }
        }
        let rec_defect = (&reconstruction - &self.matrix).max_norm();
        if rec_defect > tol {
            return Err(format!("reconstruction defect {rec_defect:.3e}"));
        }
        Ok(())
    }
}
