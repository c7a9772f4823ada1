//! Dense square complex matrices in ħ = 1 units.
//!
//! `ComplexMatrix` is the representation substrate for observables, density
//! matrices, unitaries, and Hamiltonians. It wraps `nalgebra::DMatrix` and
//! enforces squareness and finiteness at construction; everything else
//! (Hermiticity, unitarity, positivity) is checked by the types and
//! operations built on top of it.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::ops::{Add, Index, Mul, Neg, Sub};

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

/// Shorthand for a complex number literal.
#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Square complex matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<C64>,
}

impl ComplexMatrix {
    /// Wrap an `nalgebra` matrix. Panics if the matrix is not square or has
    /// non-finite entries.
    pub fn from_inner(inner: DMatrix<C64>) -> Self {
        assert_eq!(inner.nrows(), inner.ncols(), "matrix must be square");
        assert!(inner.nrows() > 0, "matrix dimension must be positive");
        assert!(
            inner.iter().all(|z| z.re.is_finite() && z.im.is_finite()),
            "matrix entries must be finite"
        );
        Self { inner }
    }

    /// Build from entries listed row by row.
    pub fn from_rows(dim: usize, entries: &[C64]) -> Self {
        assert_eq!(entries.len(), dim * dim, "need dim*dim entries");
        Self::from_inner(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self::from_inner(DMatrix::from_fn(dim, dim, f))
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_inner(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_inner(DMatrix::identity(dim, dim))
    }

    /// Diagonal matrix with real entries.
    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        Self::from_fn(diag.len(), |i, j| {
            if i == j {
                c64(diag[i], 0.0)
            } else {
                C64::ZERO
            }
        })
    }

    pub fn pauli_x() -> Self {
        Self::from_rows(2, &[C64::ZERO, C64::ONE, C64::ONE, C64::ZERO])
    }

    pub fn pauli_y() -> Self {
        Self::from_rows(2, &[C64::ZERO, c64(0.0, -1.0), c64(0.0, 1.0), C64::ZERO])
    }

    pub fn pauli_z() -> Self {
        Self::from_rows(2, &[C64::ONE, C64::ZERO, C64::ZERO, -C64::ONE])
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.inner
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.inner
    }

    pub fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint(),
        }
    }

    pub fn trace(&self) -> C64 {
        self.inner.trace()
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            inner: self.inner.map(|z| z * factor),
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(c64(factor, 0.0))
    }

    /// Max-modulus norm: max over entries of |M_ij|. Dimension-independent,
    /// used for all tolerance statements in this crate.
    pub fn max_norm(&self) -> f64 {
        self.inner.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// ‖M − M†‖_max.
    pub fn hermiticity_defect(&self) -> f64 {
        let adj = self.inner.adjoint();
        (&self.inner - adj).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// ‖U†U − 1‖_max.
    pub fn unitarity_defect(&self) -> f64 {
        let dim = self.dim();
        let prod = self.inner.adjoint() * &self.inner;
        (prod - DMatrix::<C64>::identity(dim, dim))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    /// (M + M†)/2, the Hermitian part.
    pub fn symmetrized(&self) -> Self {
        let adj = self.inner.adjoint();
        Self {
            inner: (&self.inner + adj).map(|z| z * 0.5),
        }
    }

    /// Matrix-vector product M·v.
    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        &self.inner * v
    }
}

/// AB − BA. Panics on dimension mismatch; callers exposed to user input
/// validate dimensions first.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    assert_eq!(a.dim(), b.dim(), "commutator requires matching dims");
    ComplexMatrix {
        inner: &a.inner * &b.inner - &b.inner * &a.inner,
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.inner[idx]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner + &rhs.inner,
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner - &rhs.inner,
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner * &rhs.inner,
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix {
            inner: -&self.inner,
        }
    }
}
