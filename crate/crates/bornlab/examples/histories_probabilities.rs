//! Chain-operator probabilities for ordered sequences of projected events:
//! p = Tr[E_n U_n ... E_1 U_1 rho U_1^† E_1 ... U_n^† E_n]. Complete
//! families at every slot sum to probability one.
//!
//! ```bash
//! cargo run --release --example histories_probabilities
//! ```

use bornlab::evolution::hamiltonian_step;
use bornlab::histories::{
    exhaustive_family_total, history_probability, projector_family, History, HistoryEvent,
};
use bornlab::matrix::ComplexMatrix;
use bornlab::observable::HermitianObservable;
use bornlab::state::{DensityMatrix, StateVector};

fn main() {
    // measure sigma_z twice, with a quarter-turn rotation about y in between
    let sz = HermitianObservable::new(ComplexMatrix::pauli_z()).unwrap();
    let sy = HermitianObservable::new(ComplexMatrix::pauli_y()).unwrap();
    let rotation = hamiltonian_step(&sy, std::f64::consts::FRAC_PI_4);
    let family = projector_family(&sz);
    let initial = DensityMatrix::from_pure(&StateVector::plus_x());

    println!("two sigma_z slots separated by a rotation, starting from |+x>:\n");
    println!("{:>7} {:>7} {:>14}", "first", "second", "probability");
    let mut total = 0.0;
    for (i, first) in family.iter().enumerate() {
        for (j, second) in family.iter().enumerate() {
            let p = history_probability(&History {
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
            println!("{i:>7} {j:>7} {p:>14.8}");
            total += p;
        }
    }
    println!("{:>15} {total:>14.8}", "sum");

    let checked = exhaustive_family_total(
        &initial,
        &[rotation.clone(), rotation.clone()],
        &[family.clone(), family],
    )
    .unwrap();
    println!("\nexhaustive total via shared-prefix recursion: {checked:.12}");

    // refining a history can only remove probability
    let one_slot = History {
        initial: initial.clone(),
        events: vec![HistoryEvent {
            propagator: rotation.clone(),
            projector: projector_family(&sz)[0].clone(),
        }],
    };
    let mut two_slot = one_slot.clone();
    two_slot.events.push(HistoryEvent {
        propagator: rotation,
        projector: projector_family(&sz)[1].clone(),
    });
    println!(
        "\nrefinement: p(one event) = {:.6} >= p(same + one more) = {:.6}",
        history_probability(&one_slot).unwrap(),
        history_probability(&two_slot).unwrap()
    );
}
