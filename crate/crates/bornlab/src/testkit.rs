//! Seeded constructors for randomized checks, shared by the unit tests, the
//! acceptance suite, the verification command, and the examples.

use crate::matrix::{c64, ComplexMatrix};
use crate::observable::HermitianObservable;
use crate::sde::{gaussian_localization_ops, StochasticProcessSpec};
use crate::state::StateVector;
use rand::Rng;

/// Random matrix with entries uniform in the complex unit square,
/// symmetrized into a Hermitian operator.
pub fn random_hermitian(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |_, _| {
        c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
    .symmetrized()
}

/// Random normalized state with uniformly drawn amplitudes.
pub fn random_state(dim: usize, rng: &mut impl Rng) -> StateVector {
    loop {
        let amps: Vec<_> = (0..dim)
            .map(|_| c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let psi = StateVector::from_amplitudes(&amps);
        if psi.norm() > 1e-3 {
            return psi.normalized();
        }
    }
}

/// Random unitary exp(−iHt) from a random Hermitian generator and a random
/// time; unitary to machine precision by spectral construction.
pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let h = HermitianObservable::new(random_hermitian(dim, rng))
        .expect("symmetrized matrix is Hermitian");
    crate::evolution::hamiltonian_step(&h, rng.gen_range(-6.0..6.0))
}

/// Energy-driven qubit: H = A = diag(0, gap).
pub fn energy_driven_qubit(gap: f64, sigma: f64, dt: f64, seed: u64) -> StochasticProcessSpec {
    let h = HermitianObservable::new(ComplexMatrix::from_real_diagonal(&[0.0, gap]))
        .expect("diagonal matrices are Hermitian");
    StochasticProcessSpec::energy_driven(h, sigma, dt, seed).expect("valid spec")
}

/// Lattice localization process with the Schrödinger term dropped.
pub fn lattice_localization(
    sites: usize,
    width: f64,
    sigma: f64,
    dt: f64,
    seed: u64,
) -> StochasticProcessSpec {
    let h = HermitianObservable::new(ComplexMatrix::zeros(sites))
        .expect("zero matrix is Hermitian");
    StochasticProcessSpec::new(h, gaussian_localization_ops(sites, width), sigma, dt, false, seed)
        .expect("valid spec")
}
