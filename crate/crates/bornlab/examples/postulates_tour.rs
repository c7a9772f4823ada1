//! Tour of the exact Hilbert-space layer: spectral decomposition, Born
//! probabilities, expectation values, and the projection postulate.
//!
//! ```bash
//! cargo run --release --example postulates_tour
//! ```

use bornlab::matrix::ComplexMatrix;
use bornlab::observable::HermitianObservable;
use bornlab::state::{DensityMatrix, StateVector};

fn main() {
    // σx decomposes into the |±x⟩ projectors
    let sx = HermitianObservable::new(ComplexMatrix::pauli_x()).unwrap();
    println!("spectral decomposition of sigma_x:");
    for space in sx.spectrum() {
        println!(
            "  eigenvalue {:+.1}, multiplicity {}, projector trace {:.1}",
            space.eigenvalue,
            space.multiplicity,
            space.projector.trace().re
        );
    }

    // Born probabilities of σz outcomes in a tilted state
    let sz = HermitianObservable::new(ComplexMatrix::pauli_z()).unwrap();
    let psi = StateVector::from_real(&[(1.0f64 / 3.0).sqrt(), (2.0f64 / 3.0).sqrt()]);
    println!("\nBorn probabilities of sigma_z in (sqrt(1/3), sqrt(2/3)):");
    for (value, p) in sz.born_probabilities(&psi).unwrap() {
        println!("  outcome {value:+.1}: p = {p:.6}");
    }

    // reduction: project onto the +1 eigenspace and renormalize
    let reduced = sz.reduce(&psi, 1).unwrap();
    println!(
        "\nafter reducing onto the +1 outcome: amplitudes {:?}",
        reduced
            .amplitudes()
            .iter()
            .map(|z| (z.re, z.im))
            .collect::<Vec<_>>()
    );
    let again = sz.born_probabilities(&reduced).unwrap();
    println!("re-measuring sigma_z now gives +1 with p = {:.12}", again[1].1);

    // expectations in mixed states
    let mixed = DensityMatrix::mixture(&[
        (0.25, StateVector::basis(2, 0)),
        (0.75, StateVector::basis(2, 1)),
    ])
    .unwrap();
    println!(
        "\n<sigma_z> in the 1:3 mixture = {:+.4} (purity {:.4})",
        sz.expectation(&mixed).unwrap(),
        mixed.purity()
    );

    // a degenerate observable keeps whole eigenspaces intact
    let block = HermitianObservable::new(ComplexMatrix::from_real_diagonal(&[1.0, 1.0, -1.0]))
        .unwrap();
    println!(
        "\ndiag(1,1,-1) has {} outcomes; the +1 eigenspace has multiplicity {}",
        block.n_outcomes(),
        block.spectrum()[1].multiplicity
    );
}
