//! The deterministic side of the story: averaging the stochastic flow over
//! the noise yields a double-commutator Lindblad-type equation. For a
//! two-level system it has a closed form, and its stationary states are
//! exactly the operators commuting with H and A.
//!
//! ```bash
//! cargo run --release --example lindblad_decoherence
//! ```

use bornlab::lindblad::{evolve_lindblad, stationarity_check, LindbladSpec};
use bornlab::matrix::ComplexMatrix;
use bornlab::observable::HermitianObservable;
use bornlab::state::{DensityMatrix, StateVector};

fn main() {
    let (omega, sigma) = (1.0, 1.0);
    let h = HermitianObservable::new(ComplexMatrix::from_real_diagonal(&[0.0, omega])).unwrap();
    let spec = LindbladSpec::new(h.clone(), vec![h.clone()], sigma, true).unwrap();
    let rho0 = DensityMatrix::from_pure(&StateVector::from_real(&[
        0.3f64.sqrt(),
        0.7f64.sqrt(),
    ]));

    let rate = sigma * sigma * omega * omega / 8.0;
    println!("two-level averaged evolution, decay rate sigma^2 omega^2 / 8 = {rate}\n");
    println!("{:>8} {:>14} {:>14} {:>12}", "t", "|rho01| RK4", "closed form", "rho11");
    let coh0 = rho0.matrix()[(0, 1)].norm();
    for t in [0.0, 4.0, 8.0, 16.0, 32.0] {
        let evolved = evolve_lindblad(&rho0, &spec, t, 1e-3).unwrap();
        println!(
            "{t:>8.1} {:>14.8} {:>14.8} {:>12.6}",
            evolved.matrix()[(0, 1)].norm(),
            coh0 * (-rate * t).exp(),
            evolved.matrix()[(1, 1)].re
        );
    }
    println!("\ncoherences die, populations (the Born weights) never move.");

    // stationarity: functions of H are fixed points, coherent states are not
    let dephased = DensityMatrix::new(ComplexMatrix::from_real_diagonal(&[0.3, 0.7])).unwrap();
    let coherent = DensityMatrix::from_pure(&StateVector::plus_x());
    for (label, rho) in [("diag(0.3, 0.7)", &dephased), ("|+x><+x|", &coherent)] {
        let report = stationarity_check(rho, &spec, 1e-12);
        println!(
            "\n{label}: stationary = {}, |[H,rho]| = {:.3e}, dissipation = {:.3e}",
            report.is_stationary, report.hamiltonian_commutator_norm, report.dissipation
        );
    }
    println!("\na stationary state must commute with H and with every collapse");
    println!("operator: the dissipation is a sum of Tr X X^dagger terms and can");
    println!("only vanish commutator by commutator.");
}
