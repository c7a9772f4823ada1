//! Why measurement cannot be one deterministic unitary: unitaries preserve
//! inner products, so no single U can send the same input onto two
//! orthogonal detector states. Checked numerically over random unitaries.
//!
//! ```bash
//! cargo run --release --example unitary_no_go
//! ```

use bornlab::state::StateVector;
use bornlab::testkit::random_unitary;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn main() {
    let mut rng = ChaCha12Rng::seed_from_u64(12);
    let psi = StateVector::plus_x();
    let up = StateVector::basis(2, 0);
    let down = StateVector::basis(2, 1);

    let mut worst_drift: f64 = 0.0;
    let mut best_attempt = f64::INFINITY;
    for _ in 0..1000 {
        let u = random_unitary(2, &mut rng);
        let moved = psi.evolve_unitary(&u).unwrap();

        // inner products with a fixed reference are untouched
        let drift = (moved.inner_product(&up.evolve_unitary(&u).unwrap())
            - psi.inner_product(&up))
        .norm();
        worst_drift = worst_drift.max(drift);

        // to "measure", one U would need to reach both detector states
        best_attempt = best_attempt.min(moved.distance(&up).max(moved.distance(&down)));
    }

    println!("1000 random unitaries applied to |+x>:");
    println!("  worst inner-product drift           {worst_drift:.3e}");
    println!("  best simultaneous approach to both  {best_attempt:.6}");
    println!("  geometric floor sqrt(2)/2           {:.6}", 0.5f64.sqrt());
    println!();
    println!("orthonormal targets sit sqrt(2) apart, so no unitary image can be");
    println!("within 0.7 of both: a deterministic unitary cannot play the role of");
    println!("the reduction step. A *stochastic* unitary process can; see the");
    println!("single_trajectory and born_rule_emergence examples.");
}
