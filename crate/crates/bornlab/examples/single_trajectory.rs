//! One realization of the energy-driven stochastic process: watch the
//! eigenspace weights wander as a martingale until one of them wins.
//!
//! ```bash
//! cargo run --release --example single_trajectory
//! ```

use bornlab::sde::{run_trajectory, Outcome};
use bornlab::state::StateVector;
use bornlab::testkit::energy_driven_qubit;

fn main() {
    let spec = energy_driven_qubit(1.0, 1.0, 1e-3, 2024);
    let psi0 = StateVector::from_real(&[0.3f64.sqrt(), 0.7f64.sqrt()]);
    let record = run_trajectory(&spec, &psi0, 120.0, 1e-6, 2000).unwrap();

    println!("energy-driven qubit, psi0 = (sqrt(0.3), sqrt(0.7)), sigma = 1\n");
    println!("{:>8} {:>12} {:>12}", "t", "<P_0>", "<P_1>");
    for (t, weights) in record.times.iter().zip(&record.projector_weights) {
        println!("{t:>8.2} {:>12.6} {:>12.6}", weights[0], weights[1]);
    }

    match record.outcome {
        Outcome::Resolved(index) => println!(
            "\nreduced to eigenvalue index {index} at t = {:.3}",
            record.hitting_time.unwrap()
        ),
        Outcome::Unresolved => println!("\nstill unresolved at t_max"),
    }
    println!("(weights start at the Born values 0.3 / 0.7 and drift without bias;");
    println!(" rerun with other seeds to see both outcomes occur)");
}
