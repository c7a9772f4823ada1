//! Deterministic unitary dynamics and its decomposition into infinitesimal
//! unitary segments.
//!
//! `hamiltonian_step` builds exp(−iHδt) spectrally, so the result is unitary
//! to machine precision regardless of δt — exact unitarity matters more than
//! speed at the dimensions this crate targets. `infinitesimal_unitary` and
//! `unitary_path` realize the observation that any curve through the unit
//! sphere of Hilbert space can be generated by a succession of infinitesimal
//! unitaries U = 1 + |dψ⟩⟨ψ| − |ψ⟩⟨dψ| with ⟨ψ|dψ⟩ = 0.

use crate::error::{Error, Result};
use crate::matrix::{c64, C64, ComplexMatrix};
use crate::observable::HermitianObservable;
use crate::state::{check_dims, StateVector};

/// exp(−iHδt) = Σ_n exp(−i s_n δt) P_n.
pub fn hamiltonian_step(hamiltonian: &HermitianObservable, dt: f64) -> ComplexMatrix {
    hamiltonian.apply_spectral_function(|s| {
        let phase = -s * dt;
        c64(phase.cos(), phase.sin())
    })
}

/// U = 1 + |dψ⟩⟨ψ| − |ψ⟩⟨dψ|.
///
/// Requires ⟨ψ|dψ⟩ = 0 (within 1e-10) and a normalized ψ; then
/// U|ψ⟩ = |ψ⟩ + |dψ⟩ exactly and ‖U†U − 1‖ = O(‖dψ‖²).
pub fn infinitesimal_unitary(psi: &StateVector, dpsi: &StateVector) -> Result<ComplexMatrix> {
    check_dims(psi.dim(), dpsi.dim())?;
    let overlap = psi.inner_product(dpsi).norm();
    if overlap > 1e-10 {
        return Err(Error::NotOrthogonal { overlap });
    }
    let dim = psi.dim();
    let p = psi.inner();
    let d = dpsi.inner();
    Ok(ComplexMatrix::from_fn(dim, |i, j| {
        let delta = if i == j { C64::ONE } else { C64::ZERO };
        delta + d[i] * p[j].conj() - p[i] * d[j].conj()
    }))
}

/// Split the great circle from `start` to `end` into `steps` orthogonal
/// increments and convert each into an infinitesimal unitary.
///
/// The relative phase of `end` is absorbed first, so the interpolation runs
/// along arccos|⟨start|end⟩|. For (anti)podal pairs — |⟨start|end⟩| = 0 —
/// the great circle is not unique; the plane spanned by the two states is
/// used, which is deterministic in every dimension.
///
/// The composed product maps `start` to `end` up to a global phase with
/// error O(1/steps).
pub fn unitary_path(
    start: &StateVector,
    end: &StateVector,
    steps: usize,
) -> Result<Vec<ComplexMatrix>> {
    check_dims(start.dim(), end.dim())?;
    assert!(steps >= 1, "need at least one step");
    let start = start.normalized();
    let end = end.normalized();

    let overlap = start.inner_product(&end);
    // Absorb the relative phase into the target.
    let phase = if overlap.norm() > 1e-12 {
        overlap.conj() / overlap.norm()
    } else {
        C64::ONE
    };
    let end = StateVector::from_inner(end.inner().map(|z| z * phase));
    let cos_theta = start.inner_product(&end).re.clamp(-1.0, 1.0);
    let theta = cos_theta.acos();

    if theta < 1e-14 {
        return Ok(vec![ComplexMatrix::identity(start.dim()); steps]);
    }

    // Unit tangent at `start` pointing toward `end`.
    let tangent = {
        let mut t = end.inner() - start.inner().map(|z| z * c64(cos_theta, 0.0));
        let n = t.norm();
        t /= c64(n, 0.0);
        t
    };

    let dtheta = theta / steps as f64;
    let mut unitaries = Vec::with_capacity(steps);
    for k in 0..steps {
        let a = k as f64 * dtheta;
        // Geodesic point and its unit tangent at angle a.
        let psi_k = StateVector::from_inner(
            start.inner().map(|z| z * c64(a.cos(), 0.0))
                + tangent.map(|z| z * c64(a.sin(), 0.0)),
        );
        let tau_k = tangent.map(|z| z * c64(a.cos(), 0.0))
            - start.inner().map(|z| z * c64(a.sin(), 0.0));
        // ⟨ψ_k|dψ_k⟩ = 0 exactly up to roundoff.
        let dpsi = StateVector::from_inner(tau_k.map(|z| z * c64(dtheta.sin(), 0.0)));
        unitaries.push(infinitesimal_unitary(&psi_k, &dpsi)?);
    }
    Ok(unitaries)
}

/// Apply a path of unitaries in order (first element acts first).
pub fn compose_path(path: &[ComplexMatrix], psi: &StateVector) -> StateVector {
    let mut state = psi.clone();
    for u in path {
        state = state.apply_matrix(u);
    }
    state
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::c64;
    use crate::state::DensityMatrix;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn sigma_z_obs() -> HermitianObservable {
        HermitianObservable::new(ComplexMatrix::pauli_z()).unwrap()
    }

    #[test]
    fn zero_time_step_is_identity() {
        let u = hamiltonian_step(&sigma_z_obs(), 0.0);
        assert!((&u - &ComplexMatrix::identity(2)).max_norm() < 1e-15);
    }

    #[test]
    fn pauli_z_half_period_is_minus_identity() {
        // exp(−iσz π) = diag(e^{−iπ}, e^{iπ}) = −1
        let u = hamiltonian_step(&sigma_z_obs(), std::f64::consts::PI);
        assert!((&u - &ComplexMatrix::identity(2).scale_real(-1.0)).max_norm() < 1e-12);
    }

    #[test]
    fn semigroup_composition_matches_single_step() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let h = HermitianObservable::new(
            ComplexMatrix::from_fn(3, |_, _| c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .symmetrized(),
        )
        .unwrap();
        let t = 2.7;
        let k = 64;
        let single = hamiltonian_step(&h, t);
        let mut composed = ComplexMatrix::identity(3);
        let step = hamiltonian_step(&h, t / k as f64);
        for _ in 0..k {
            composed = &step * &composed;
        }
        assert!((&single - &composed).max_norm() < 1e-10);
    }

    #[test]
    fn hamiltonian_step_is_unitary_and_conserves_energy() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..10 {
            let h = HermitianObservable::new(
                ComplexMatrix::from_fn(4, |_, _| {
                    c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                })
                .symmetrized(),
            )
            .unwrap();
            let u = hamiltonian_step(&h, rng.gen_range(-5.0..5.0));
            assert!(u.unitarity_defect() < 1e-12);

            let psi = random_state(4, &mut rng);
            let rho = DensityMatrix::from_pure(&psi);
            let evolved = rho.evolve_unitary(&u).unwrap();
            let before = h.expectation(&rho).unwrap();
            let after = h.expectation(&evolved).unwrap();
            assert!((before - after).abs() < 1e-12);
        }
    }

    fn random_state(dim: usize, rng: &mut impl Rng) -> StateVector {
        StateVector::from_amplitudes(
            &(0..dim)
                .map(|_| c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect::<Vec<_>>(),
        )
        .normalized()
    }

    #[test]
    fn evolve_unitary_preserves_spectrum() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let rho = DensityMatrix::mixture(&[
            (0.3, random_state(3, &mut rng)),
            (0.7, random_state(3, &mut rng)),
        ])
        .unwrap();
        let h = HermitianObservable::new(
            ComplexMatrix::from_fn(3, |_, _| c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .symmetrized(),
        )
        .unwrap();
        let u = hamiltonian_step(&h, 1.3);
        let evolved = rho.evolve_unitary(&u).unwrap();
        let before = rho.spectral_weights();
        let after = evolved.spectral_weights();
        for (a, b) in before.iter().zip(&after) {
            assert!((a - b).abs() < 1e-12, "spectrum changed: {a} vs {b}");
        }
    }

    #[test]
    fn evolve_unitary_rejects_non_unitary() {
        let m = ComplexMatrix::identity(2).scale_real(1.1);
        assert!(matches!(
            StateVector::basis(2, 0).evolve_unitary(&m),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn sigma_x_flips_basis_state() {
        let flipped = StateVector::basis(2, 0)
            .evolve_unitary(&ComplexMatrix::pauli_x())
            .unwrap();
        assert!(flipped.distance(&StateVector::basis(2, 1)) < 1e-15);
    }

    #[test]
    fn infinitesimal_unitary_identity_for_zero_increment() {
        let psi = StateVector::basis(2, 0);
        let zero = StateVector::from_amplitudes(&[C64::ZERO, C64::ZERO]);
        let u = infinitesimal_unitary(&psi, &zero).unwrap();
        assert!((&u - &ComplexMatrix::identity(2)).max_norm() < 1e-15);
    }

    #[test]
    fn infinitesimal_unitary_quadratic_defect_and_exact_action() {
        let psi = StateVector::basis(2, 0);
        for &eps in &[1e-2, 1e-3, 1e-4] {
            let dpsi = StateVector::from_amplitudes(&[C64::ZERO, c64(eps, 0.0)]);
            let u = infinitesimal_unitary(&psi, &dpsi).unwrap();
            assert!(u.unitarity_defect() <= 2.0 * eps * eps + 1e-15);
            // U|ψ⟩ = |ψ⟩ + |dψ⟩ exactly
            let moved = psi.apply_matrix(&u);
            let expected =
                StateVector::from_inner(psi.inner() + dpsi.inner());
            assert_eq!(moved.distance(&expected), 0.0);
        }
    }

    #[test]
    fn infinitesimal_unitary_rejects_non_orthogonal_increment() {
        let psi = StateVector::basis(2, 0);
        let dpsi = StateVector::from_amplitudes(&[c64(1e-3, 0.0), c64(1e-3, 0.0)]);
        assert!(matches!(
            infinitesimal_unitary(&psi, &dpsi),
            Err(Error::NotOrthogonal { .. })
        ));
    }

    #[test]
    fn identical_endpoints_give_identity_path() {
        let psi = StateVector::plus_x();
        let path = unitary_path(&psi, &psi, 5).unwrap();
        assert_eq!(path.len(), 5);
        for u in &path {
            assert!((u - &ComplexMatrix::identity(2)).max_norm() < 1e-13);
        }
    }

    #[test]
    fn path_between_orthogonal_states_converges_at_first_order() {
        // Orthogonal increments always inflate the norm: ‖ψ + dψ‖² =
        // 1 + ‖dψ‖², so a K-step composition carries an error floor of
        // θ²/2K. The law is error ∝ 1/K; the constant is θ²/2.
        let zero = StateVector::basis(2, 0);
        let one = StateVector::basis(2, 1);
        let error_for = |k: usize| {
            let path = unitary_path(&zero, &one, k).unwrap();
            compose_path(&path, &zero).distance_up_to_phase(&one)
        };
        let e100 = error_for(100);
        let e200 = error_for(200);
        let ratio = e200 / e100;
        assert!(
            (ratio - 0.5).abs() < 0.1,
            "halving ratio {ratio} not consistent with O(1/K)"
        );
        let theta = std::f64::consts::FRAC_PI_2;
        let predicted = theta * theta / 2.0 / 100.0;
        assert!(
            (e100 - predicted).abs() < 0.2 * predicted,
            "K=100 error {e100} far from the θ²/2K prediction {predicted}"
        );
        // the 1/K law reaches 1e-3 once K ≥ θ²/2e-3 ≈ 1234
        assert!(error_for(2000) <= 1e-3);
    }

    #[test]
    fn path_works_in_higher_dimensions() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let a = random_state(4, &mut rng);
        let b = random_state(4, &mut rng);
        let path = unitary_path(&a, &b, 400).unwrap();
        let arrived = compose_path(&path, &a);
        assert!(arrived.distance_up_to_phase(&b) < 5e-3);
    }
}
