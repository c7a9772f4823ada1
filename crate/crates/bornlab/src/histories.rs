//! Chain-operator probabilities for ordered sequences of projected events.
//!
//! A history is an initial density matrix followed by events, each a
//! propagator applied before a projector. Its probability is the
//! chain-operator trace
//!
//! ```text
//! p = Tr[ E_n U_n ⋯ E_1 U_1 ρ U_1†E_1 ⋯ U_n†E_n ]
//! ```
//!
//! The time dependence of the projectors is realized through the explicit
//! inter-event propagators (the Heisenberg-picture reading); callers
//! typically generate them with [`crate::evolution::hamiltonian_step`].
//! Summing a complete orthogonal family at each slot over all combinations
//! recovers total probability one; no consistency (decoherence-functional)
//! condition is evaluated here.

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::state::{check_dims, check_unitary, DensityMatrix};

/// One event: the unitary evolution since the previous event, then a
/// projected property.
#[derive(Clone, Debug)]
pub struct HistoryEvent {
    pub propagator: ComplexMatrix,
    pub projector: ComplexMatrix,
}

/// Ordered sequence of projected properties on an initial state.
#[derive(Clone, Debug)]
pub struct History {
    pub initial: DensityMatrix,
    pub events: Vec<HistoryEvent>,
}

fn check_projector(e: &ComplexMatrix) -> Result<()> {
    let herm = e.hermiticity_defect();
    if herm > 1e-10 {
        return Err(Error::InvalidProjector(format!(
            "not self-adjoint: defect {herm:.3e}"
        )));
    }
    let idem = (&(e * e) - e).max_norm();
    if idem > 1e-10 {
        return Err(Error::InvalidProjector(format!(
            "not idempotent: |E\u{b2} - E| = {idem:.3e}"
        )));
    }
    Ok(())
}

/// Probability of one history. The result is real up to roundoff and is
/// clamped into [0, 1] after asserting the overshoot is negligible.
pub fn history_probability(history: &History) -> Result<f64> {
    let dim = history.initial.dim();
    let mut sandwich = history.initial.matrix().clone();
    for event in &history.events {
        check_dims(dim, event.projector.dim())?;
        check_dims(dim, event.propagator.dim())?;
        check_projector(&event.projector)?;
        check_unitary(&event.propagator)?;
        let evolved = &(&event.propagator * &sandwich) * &event.propagator.adjoint();
        sandwich = &(&event.projector * &evolved) * &event.projector;
    }
    let p = sandwich.trace();
    assert!(
        p.im.abs() <= 1e-12,
        "chain probability has imaginary residue {}",
        p.im
    );
    assert!(
        p.re >= -1e-10 && p.re <= 1.0 + 1e-10,
        "chain probability {p} outside [0, 1]"
    );
    Ok(p.re.clamp(0.0, 1.0))
}

/// Sum the probability over the full Cartesian product of the per-slot
/// projector families. Each family must resolve the identity within 1e-10;
/// completeness then forces the total to one.
///
/// `propagators[k]` is applied before slot k's projector, matching the
/// [`History`] event convention.
pub fn exhaustive_family_total(
    initial: &DensityMatrix,
    propagators: &[ComplexMatrix],
    families: &[Vec<ComplexMatrix>],
) -> Result<f64> {
    assert_eq!(
        propagators.len(),
        families.len(),
        "one propagator per time slot"
    );
    let dim = initial.dim();
    for family in families {
        let mut sum = ComplexMatrix::zeros(dim);
        for e in family {
            check_dims(dim, e.dim())?;
            check_projector(e)?;
            sum = &sum + e;
        }
        let defect = (&sum - &ComplexMatrix::identity(dim)).max_norm();
        if defect > 1e-10 {
            return Err(Error::IncompleteFamily { defect });
        }
    }
    for u in propagators {
        check_dims(dim, u.dim())?;
        check_unitary(u)?;
    }

    // Shared-prefix recursion over the product tree; each node reuses the
    // sandwich of its prefix.
    fn descend(
        sandwich: &ComplexMatrix,
        slot: usize,
        propagators: &[ComplexMatrix],
        families: &[Vec<ComplexMatrix>],
    ) -> f64 {
        if slot == families.len() {
            return sandwich.trace().re;
        }
        let u = &propagators[slot];
        let evolved = &(u * sandwich) * &u.adjoint();
        families[slot]
            .iter()
            .map(|e| descend(&(&(e * &evolved) * e), slot + 1, propagators, families))
            .sum()
    }

    Ok(descend(initial.matrix(), 0, propagators, families))
}

/// The eigenspace projectors of an observable, the canonical way to build a
/// complete orthogonal family.
pub fn projector_family(observable: &crate::observable::HermitianObservable) -> Vec<ComplexMatrix> {
    observable
        .spectrum()
        .iter()
        .map(|space| space.projector.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::hamiltonian_step;
    use crate::observable::HermitianObservable;
    use crate::state::StateVector;
    use crate::testkit::{random_hermitian, random_state, random_unitary};
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn qubit_projectors() -> (ComplexMatrix, ComplexMatrix) {
        (
            StateVector::basis(2, 0).outer(),
            StateVector::basis(2, 1).outer(),
        )
    }

    #[test]
    fn empty_history_has_probability_one() {
        let h = History {
            initial: DensityMatrix::maximally_mixed(3),
            events: Vec::new(),
        };
        assert_eq!(history_probability(&h).unwrap(), 1.0);
    }

    #[test]
    fn single_event_reproduces_the_born_value() {
        let (e0, _) = qubit_projectors();
        let h = History {
            initial: DensityMatrix::from_pure(&StateVector::plus_x()),
            events: vec![HistoryEvent {
                propagator: ComplexMatrix::identity(2),
                projector: e0,
            }],
        };
        assert!((history_probability(&h).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn orthogonal_chain_has_probability_zero() {
        let (e0, e1) = qubit_projectors();
        let h = History {
            initial: DensityMatrix::from_pure(&StateVector::plus_x()),
            events: vec![
                HistoryEvent {
                    propagator: ComplexMatrix::identity(2),
                    projector: e0,
                },
                HistoryEvent {
                    propagator: ComplexMatrix::identity(2),
                    projector: e1,
                },
            ],
        };
        assert_eq!(history_probability(&h).unwrap(), 0.0);
    }

    #[test]
    fn refinement_never_increases_probability() {
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        for _ in 0..25 {
            let initial = DensityMatrix::from_pure(&random_state(3, &mut rng));
            let obs_a = HermitianObservable::new(random_hermitian(3, &mut rng)).unwrap();
            let obs_b = HermitianObservable::new(random_hermitian(3, &mut rng)).unwrap();
            let event_a = HistoryEvent {
                propagator: random_unitary(3, &mut rng),
                projector: obs_a.spectrum()[0].projector.clone(),
            };
            let event_b = HistoryEvent {
                propagator: random_unitary(3, &mut rng),
                projector: obs_b.spectrum()[1].projector.clone(),
            };
            let shorter = History {
                initial: initial.clone(),
                events: vec![event_a.clone()],
            };
            let longer = History {
                initial,
                events: vec![event_a, event_b],
            };
            let p_short = history_probability(&shorter).unwrap();
            let p_long = history_probability(&longer).unwrap();
            assert!(p_long <= p_short + 1e-12, "{p_long} > {p_short}");
            assert!(p_long >= -1e-12);
        }
    }

    #[test]
    fn one_slot_family_totals_one() {
        let (e0, e1) = qubit_projectors();
        let total = exhaustive_family_total(
            &DensityMatrix::from_pure(&StateVector::plus_x()),
            &[ComplexMatrix::identity(2)],
            &[vec![e0, e1]],
        )
        .unwrap();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_slot_total_matches_brute_force_enumeration() {
        // independent oracle: enumerate all four histories explicitly
        let (e0, e1) = qubit_projectors();
        let rotation = hamiltonian_step(
            &HermitianObservable::new(ComplexMatrix::pauli_y()).unwrap(),
            std::f64::consts::FRAC_PI_4,
        );
        let initial = DensityMatrix::from_pure(&StateVector::plus_x());
        let propagators = [rotation.clone(), rotation.clone()];
        let families = [vec![e0.clone(), e1.clone()], vec![e0.clone(), e1.clone()]];

        let mut brute = 0.0;
        for first in [&e0, &e1] {
            for second in [&e0, &e1] {
                brute += history_probability(&History {
                    initial: initial.clone(),
                    events: vec![
                        HistoryEvent {
                            propagator: rotation.clone(),
                            projector: first.clone(),
                        },
                        HistoryEvent {
                            propagator: rotation.clone(),
                            projector: second.clone(),
                        },
                    ],
                })
                .unwrap();
            }
        }
        let total = exhaustive_family_total(&initial, &propagators, &families).unwrap();
        assert!((brute - 1.0).abs() < 1e-12);
        assert!((total - brute).abs() < 1e-13);
    }

    #[test]
    fn randomized_families_total_one() {
        let mut rng = ChaCha12Rng::seed_from_u64(47);
        for _ in 0..20 {
            let initial = DensityMatrix::from_pure(&random_state(3, &mut rng));
            let fam_a = projector_family(
                &HermitianObservable::new(random_hermitian(3, &mut rng)).unwrap(),
            );
            let fam_b = projector_family(
                &HermitianObservable::new(random_hermitian(3, &mut rng)).unwrap(),
            );
            let props = [random_unitary(3, &mut rng), random_unitary(3, &mut rng)];
            let total = exhaustive_family_total(&initial, &props, &[fam_a, fam_b]).unwrap();
            assert!((total - 1.0).abs() < 1e-10, "total {total}");
        }
    }

    #[test]
    fn incomplete_family_is_rejected() {
        let (e0, _) = qubit_projectors();
        let err = exhaustive_family_total(
            &DensityMatrix::maximally_mixed(2),
            &[ComplexMatrix::identity(2)],
            &[vec![e0]],
        );
        assert!(matches!(err, Err(Error::IncompleteFamily { .. })));
    }

    #[test]
    fn invalid_projector_and_propagator_are_rejected() {
        let not_projector = ComplexMatrix::identity(2).scale_real(0.5);
        let h = History {
            initial: DensityMatrix::maximally_mixed(2),
            events: vec![HistoryEvent {
                propagator: ComplexMatrix::identity(2),
                projector: not_projector,
            }],
        };
        assert!(matches!(
            history_probability(&h),
            Err(Error::InvalidProjector(_))
        ));

        let (e0, _) = qubit_projectors();
        let h = History {
            initial: DensityMatrix::maximally_mixed(2),
            events: vec![HistoryEvent {
                propagator: ComplexMatrix::identity(2).scale_real(1.1),
                projector: e0,
            }],
        };
        assert!(matches!(history_probability(&h), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn single_event_history_agrees_with_born_probabilities() {
        // reduction consistency on the evolved pure state
        let mut rng = ChaCha12Rng::seed_from_u64(53);
        for _ in 0..10 {
            let psi = random_state(3, &mut rng);
            let u = random_unitary(3, &mut rng);
            let obs = HermitianObservable::new(random_hermitian(3, &mut rng)).unwrap();
            let evolved = psi.evolve_unitary(&u).unwrap();
            let born = obs.born_probabilities(&evolved).unwrap();
            for (k, space) in obs.spectrum().iter().enumerate() {
                let h = History {
                    initial: DensityMatrix::from_pure(&psi),
                    events: vec![HistoryEvent {
                        propagator: u.clone(),
                        projector: space.projector.clone(),
                    }],
                };
                let p = history_probability(&h).unwrap();
                assert!(
                    (p - born[k].1).abs() < 1e-12,
                    "slot {k}: {p} vs {}",
                    born[k].1
                );
            }
        }
    }
}
