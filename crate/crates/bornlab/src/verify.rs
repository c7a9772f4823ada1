//! Self-check suite behind `bornlab verify`: one quick, seeded check per
//! structural property, printable as a pass/fail line each. The acceptance
//! tests exercise the same properties at full statistical weight; this
//! suite is sized to finish in seconds with no filesystem inputs.

use crate::ensemble::{bootstrap_se, chi_square_born, resampling_rng, run_ensemble};
use crate::evolution::{compose_path, hamiltonian_step, infinitesimal_unitary, unitary_path};
use crate::histories::{exhaustive_family_total, projector_family};
use crate::lindblad::{evolve_lindblad, lindblad_rhs, stationarity_check, LindbladSpec};
use crate::matrix::{c64, commutator, ComplexMatrix};
use crate::observable::HermitianObservable;
use crate::scenario::{emit_scenario, parse_scenario, preset, preset_names};
use crate::sde::{generate_noise, step_density, step_pure, step_pure_with_defect};
use crate::state::{DensityMatrix, StateVector};
use crate::testkit::{energy_driven_qubit, random_hermitian, random_state, random_unitary};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub struct CheckResult {
    pub name: &'static str,
    pub outcome: Result<(), String>,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.outcome.is_ok()
    }

    pub fn describe(&self) -> String {
        match &self.outcome {
            Ok(()) => format!("PASS {}", self.name),
            Err(msg) => format!("FAIL {}: {msg}", self.name),
        }
    }
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(), String>) -> CheckResult {
    CheckResult { name, outcome: f() }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Run every check; order is fixed and output is deterministic.
pub fn run_all() -> Vec<CheckResult> {
    vec![
        check("spectral projectors complete, orthogonal, reconstructive", || {
            let mut rng = ChaCha12Rng::seed_from_u64(101);
            for _ in 0..20 {
                let obs = HermitianObservable::new(random_hermitian(4, &mut rng))
                    .map_err(|e| e.to_string())?;
                obs.validate_spectrum(1e-10)?;
            }
            Ok(())
        }),
        check("born probabilities nonnegative and normalized", || {
            let mut rng = ChaCha12Rng::seed_from_u64(102);
            for _ in 0..50 {
                let obs = HermitianObservable::new(random_hermitian(3, &mut rng))
                    .map_err(|e| e.to_string())?;
                let psi = random_state(3, &mut rng);
                let probs = obs.born_probabilities(&psi).map_err(|e| e.to_string())?;
                let total: f64 = probs.iter().map(|(_, p)| p).sum();
                ensure((total - 1.0).abs() <= 1e-12, || {
                    format!("probabilities sum to {total}")
                })?;
                ensure(probs.iter().all(|&(_, p)| p >= 0.0), || {
                    "negative probability".into()
                })?;
            }
            Ok(())
        }),
        check("reduction makes the observed outcome certain", || {
            let mut rng = ChaCha12Rng::seed_from_u64(103);
            for _ in 0..25 {
                let obs = HermitianObservable::new(random_hermitian(3, &mut rng))
                    .map_err(|e| e.to_string())?;
                let psi = random_state(3, &mut rng);
                let probs = obs.born_probabilities(&psi).map_err(|e| e.to_string())?;
                let Some(n) = probs.iter().position(|&(_, p)| p > 0.1) else {
                    continue;
                };
                let reduced = obs.reduce(&psi, n).map_err(|e| e.to_string())?;
                let after = obs.born_probabilities(&reduced).map_err(|e| e.to_string())?;
                ensure((after[n].1 - 1.0).abs() <= 1e-12, || {
                    format!("reduced branch has probability {}", after[n].1)
                })?;
            }
            Ok(())
        }),
        check("unitaries preserve inner products", || {
            let mut rng = ChaCha12Rng::seed_from_u64(104);
            for _ in 0..100 {
                let u = random_unitary(3, &mut rng);
                let a = random_state(3, &mut rng);
                let b = random_state(3, &mut rng);
                let before = a.inner_product(&b);
                let after = a
                    .evolve_unitary(&u)
                    .map_err(|e| e.to_string())?
                    .inner_product(&b.evolve_unitary(&u).map_err(|e| e.to_string())?);
                ensure((after - before).norm() <= 1e-10, || {
                    format!("inner product drifted by {:.3e}", (after - before).norm())
                })?;
            }
            Ok(())
        }),
        check("no single unitary reaches two orthogonal targets", || {
            let mut rng = ChaCha12Rng::seed_from_u64(105);
            let up = StateVector::basis(2, 0);
            let down = StateVector::basis(2, 1);
            for _ in 0..100 {
                let u = random_unitary(2, &mut rng);
                let moved = StateVector::plus_x().evolve_unitary(&u).map_err(|e| e.to_string())?;
                let both_close = moved.distance(&up) <= 0.7 && moved.distance(&down) <= 0.7;
                ensure(!both_close, || {
                    "a unitary image came within 0.7 of two orthonormal targets".into()
                })?;
            }
            Ok(())
        }),
        check("spectral propagator conserves energy", || {
            let mut rng = ChaCha12Rng::seed_from_u64(106);
            for _ in 0..20 {
                let h = HermitianObservable::new(random_hermitian(4, &mut rng))
                    .map_err(|e| e.to_string())?;
                let u = hamiltonian_step(&h, rng.gen_range(-3.0..3.0));
                let rho = DensityMatrix::from_pure(&random_state(4, &mut rng));
                let before = h.expectation(&rho).map_err(|e| e.to_string())?;
                let after = h
                    .expectation(&rho.evolve_unitary(&u).map_err(|e| e.to_string())?)
                    .map_err(|e| e.to_string())?;
                ensure((before - after).abs() <= 1e-12, || {
                    format!("energy drifted by {:.3e}", (before - after).abs())
                })?;
            }
            Ok(())
        }),
        check("infinitesimal unitaries act exactly with quadratic defect", || {
            let psi = StateVector::basis(3, 0);
            for &eps in &[1e-2, 1e-3] {
                let dpsi = StateVector::from_amplitudes(&[
                    c64(0.0, 0.0),
                    c64(eps, 0.0),
                    c64(0.0, -eps),
                ]);
                let u = infinitesimal_unitary(&psi, &dpsi).map_err(|e| e.to_string())?;
                let moved = psi.apply_matrix(&u);
                let expected = StateVector::from_inner(psi.inner() + dpsi.inner());
                ensure(moved.distance(&expected) == 0.0, || {
                    "action on the base state is not exact".into()
                })?;
                let defect = u.unitarity_defect();
                ensure(defect <= 2.0 * dpsi.norm_sqr() + 1e-15, || {
                    format!("unitarity defect {defect:.3e} beyond quadratic bound")
                })?;
            }
            Ok(())
        }),
        check("composed path error halves when steps double", || {
            let zero = StateVector::basis(2, 0);
            let one = StateVector::basis(2, 1);
            let error_for = |k: usize| -> Result<f64, String> {
                let path = unitary_path(&zero, &one, k).map_err(|e| e.to_string())?;
                Ok(compose_path(&path, &zero).distance_up_to_phase(&one))
            };
            let e100 = error_for(100)?;
            let e200 = error_for(200)?;
            let ratio = e200 / e100;
            ensure((ratio - 0.5).abs() <= 0.1, || {
                format!("halving ratio {ratio:.3}")
            })
        }),
        check("trajectory-averaged norm defect scales like dt^1.5", || {
            let slope = norm_defect_slope(&[1e-3, 1e-4], 24, 107)?;
            ensure((slope - 1.5).abs() <= 0.3, || format!("slope {slope:.3}"))
        }),
        check("noise increments have the right moments", || {
            let dt = 4e-3;
            let mut rng = ChaCha12Rng::seed_from_u64(108);
            let draws = generate_noise(100_000, dt, &mut rng);
            let n = draws.values.len() as f64;
            let mean = draws.values.iter().sum::<f64>() / n;
            let var = draws.values.iter().map(|x| x * x).sum::<f64>() / n - mean * mean;
            ensure(mean.abs() <= 4.0 * dt.sqrt() / n.sqrt() * 3.0, || {
                format!("mean {mean:.3e}")
            })?;
            ensure((var - dt).abs() <= 0.02 * dt, || format!("variance {var:.3e}"))
        }),
        check("averaged evolution is traceless and cyclic", || {
            let mut rng = ChaCha12Rng::seed_from_u64(109);
            for _ in 0..20 {
                let h = HermitianObservable::new(random_hermitian(3, &mut rng))
                    .map_err(|e| e.to_string())?;
                let a = HermitianObservable::new(random_hermitian(3, &mut rng))
                    .map_err(|e| e.to_string())?;
                let spec = LindbladSpec::new(h.clone(), vec![a], 1.0, true)
                    .map_err(|e| e.to_string())?;
                let rho = DensityMatrix::from_pure(&random_state(3, &mut rng));
                let rhs = lindblad_rhs(&rho, &spec).map_err(|e| e.to_string())?;
                ensure(rhs.trace().norm() <= 1e-12, || "trace leaked".into())?;
                let cyclic = (rho.matrix() * &commutator(h.matrix(), rho.matrix())).trace();
                ensure(cyclic.norm() <= 1e-12, || "cyclic identity violated".into())?;
            }
            Ok(())
        }),
        check("stationary states commute; dissipation is nonnegative", || {
            let mut rng = ChaCha12Rng::seed_from_u64(110);
            for _ in 0..20 {
                let h = HermitianObservable::new(random_hermitian(3, &mut rng))
                    .map_err(|e| e.to_string())?;
                let spec = LindbladSpec::new(h.clone(), vec![h.clone()], 1.0, true)
                    .map_err(|e| e.to_string())?;
                // stationary construction: positive function of H
                let mut m = ComplexMatrix::zeros(3);
                let mut weights = Vec::new();
                for space in h.spectrum() {
                    weights.push((rng.gen_range(0.1..1.0), space));
                }
                let total: f64 = weights
                    .iter()
                    .map(|(w, s)| w * s.multiplicity as f64)
                    .sum();
                for (w, space) in &weights {
                    m = &m + &space.projector.scale_real(w / total);
                }
                let rho = DensityMatrix::new(m).map_err(|e| e.to_string())?;
                let report = stationarity_check(&rho, &spec, 1e-12);
                ensure(report.is_stationary, || {
                    format!("rhs norm {:.3e}", report.rhs_norm)
                })?;
                ensure(report.dissipation >= -1e-14, || {
                    format!("dissipation {:.3e}", report.dissipation)
                })?;

                let coherent = DensityMatrix::from_pure(&random_state(3, &mut rng));
                let coherent_report = stationarity_check(&coherent, &spec, 1e-12);
                ensure(coherent_report.dissipation >= -1e-14, || {
                    "dissipation negative".into()
                })?;
            }
            Ok(())
        }),
        check("two-level coherences decay at the closed-form rate", || {
            let omega = 1.0;
            let sigma = 1.0;
            let h = HermitianObservable::new(ComplexMatrix::from_real_diagonal(&[0.0, omega]))
                .map_err(|e| e.to_string())?;
            let spec =
                LindbladSpec::new(h.clone(), vec![h], sigma, true).map_err(|e| e.to_string())?;
            let rho0 = DensityMatrix::from_pure(&StateVector::plus_x());
            for &t in &[1.0, 10.0] {
                let evolved = evolve_lindblad(&rho0, &spec, t, 2e-3).map_err(|e| e.to_string())?;
                let expected = 0.5 * (-sigma * sigma * omega * omega * t / 8.0).exp();
                let actual = evolved.matrix()[(0, 1)].norm();
                ensure((actual - expected).abs() <= 1e-6 * expected, || {
                    format!("t={t}: |rho01| {actual:.9e} vs {expected:.9e}")
                })?;
            }
            Ok(())
        }),
        check("pure and density routes agree under shared noise", || {
            let spec = energy_driven_qubit(1.0, 1.0, 1e-3, 111);
            let mut z = StateVector::from_real(&[0.6, 0.8]);
            let mut rho = DensityMatrix::from_pure(&z);
            let mut rng = spec.trajectory_rng(0);
            let mut max_dev = 0.0_f64;
            for _ in 0..300 {
                let noise = generate_noise(1, spec.dt, &mut rng);
                z = step_pure(&z, &spec, &noise).map_err(|e| e.to_string())?;
                rho = step_density(&rho, &spec, &noise).map_err(|e| e.to_string())?;
                max_dev = max_dev.max((rho.matrix() - &z.outer()).max_norm());
            }
            ensure(max_dev <= 50.0 * spec.dt, || {
                format!("pure/density divergence {max_dev:.3e}")
            })
        }),
        check("eigenspace weights are martingales of the ensemble", || {
            let spec = energy_driven_qubit(1.0, 1.0, 1e-3, 112);
            let psi0 = StateVector::from_real(&[0.3f64.sqrt(), 0.7f64.sqrt()]);
            let run = run_ensemble(&spec, &psi0, 2.0, 1e-6, 200, 250)
                .map_err(|e| e.to_string())?;
            let series = run.mean_weights();
            let w0 = series[0].1[1];
            let mut rng = resampling_rng(spec.seed);
            for (slot, (_, means)) in series.iter().enumerate() {
                let values: Vec<f64> = run
                    .records
                    .iter()
                    .map(|(_, r)| r.projector_weights[slot][1])
                    .collect();
                let se = bootstrap_se(&values, &mut rng);
                ensure((means[1] - w0).abs() <= 3.0 * se + 1e-9, || {
                    format!("slot {slot} drifted: {} vs {w0} (se {se:.3e})", means[1])
                })?;
            }
            Ok(())
        }),
        check("outcome frequencies match the Born weights", || {
            let spec = energy_driven_qubit(1.0, 1.0, 1e-3, 113);
            let psi0 = StateVector::from_real(&[0.3f64.sqrt(), 0.7f64.sqrt()]);
            let run = run_ensemble(&spec, &psi0, 120.0, 1e-4, 400, 10_000)
                .map_err(|e| e.to_string())?;
            ensure(run.summary.unresolved == 0 && run.summary.failed.is_empty(), || {
                format!("{} unresolved", run.summary.unresolved)
            })?;
            let freq = *run.summary.outcome_counts.get(&1).unwrap_or(&0) as f64 / 400.0;
            let bound = 4.0 * (0.7f64 * 0.3 / 400.0).sqrt();
            ensure((freq - 0.7).abs() <= bound, || {
                format!("frequency {freq:.4} vs 0.7 +/- {bound:.4}")
            })?;
            let chi = chi_square_born(&run.summary).map_err(|e| e.to_string())?;
            ensure(chi.pass, || format!("chi-square {:.3}", chi.statistic))
        }),
        check("ensembles are identical across thread counts", || {
            let spec = energy_driven_qubit(1.0, 1.0, 1e-3, 114);
            let psi0 = StateVector::plus_x();
            let run_with = |threads: usize| {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build()
                    .map_err(|e| e.to_string())?;
                pool.install(|| run_ensemble(&spec, &psi0, 10.0, 1e-6, 48, 1000))
                    .map_err(|e| e.to_string())
            };
            let a = run_with(1)?;
            let b = run_with(4)?;
            ensure(a.summary.outcome_counts == b.summary.outcome_counts, || {
                "outcome counts differ".into()
            })?;
            ensure(a.summary.hitting_times == b.summary.hitting_times, || {
                "hitting times differ".into()
            })?;
            for ((_, x), (_, y)) in a.summary.mean_density.iter().zip(&b.summary.mean_density) {
                ensure(
                    x.matrix().inner().as_slice() == y.matrix().inner().as_slice(),
                    || "mean densities differ".into(),
                )?;
            }
            Ok(())
        }),
        check("exhaustive history families total one", || {
            let mut rng = ChaCha12Rng::seed_from_u64(115);
            for _ in 0..20 {
                let initial = DensityMatrix::from_pure(&random_state(3, &mut rng));
                let fam_a = projector_family(
                    &HermitianObservable::new(random_hermitian(3, &mut rng))
                        .map_err(|e| e.to_string())?,
                );
                let fam_b = projector_family(
                    &HermitianObservable::new(random_hermitian(3, &mut rng))
                        .map_err(|e| e.to_string())?,
                );
                let props = [random_unitary(3, &mut rng), random_unitary(3, &mut rng)];
                let total = exhaustive_family_total(&initial, &props, &[fam_a, fam_b])
                    .map_err(|e| e.to_string())?;
                ensure((total - 1.0).abs() <= 1e-10, || format!("total {total}"))?;
            }
            Ok(())
        }),
        check("scenario documents round-trip", || {
            for name in preset_names() {
                let scenario = preset(name).expect("preset exists");
                let reparsed =
                    parse_scenario(&emit_scenario(&scenario)).map_err(|e| e.to_string())?;
                ensure(scenario == reparsed, || format!("{name} did not round-trip"))?;
            }
            Ok(())
        }),
    ]
}

/// Fit the log-log slope of the |trajectory-averaged signed norm defect|
/// against dt, ensemble-averaged over `reps` trajectories per dt.
pub fn norm_defect_slope(dts: &[f64], reps: usize, seed: u64) -> Result<f64, String> {
    let horizon = 2.0;
    let mut points = Vec::with_capacity(dts.len());
    for (i, &dt) in dts.iter().enumerate() {
        let spec = energy_driven_qubit(1.0, 1.0, dt, seed.wrapping_add(i as u64));
        let steps = (horizon / dt).round() as usize;
        let mut mean_abs = 0.0_f64;
        for rep in 0..reps {
            let mut rng = spec.trajectory_rng(rep as u64);
            let mut z = StateVector::plus_x();
            let mut defect_sum = 0.0_f64;
            for _ in 0..steps {
                let noise = generate_noise(1, dt, &mut rng);
                let (next, defect) =
                    step_pure_with_defect(&z, &spec, &noise).map_err(|e| e.to_string())?;
                z = next;
                defect_sum += defect;
            }
            mean_abs += (defect_sum / steps as f64).abs();
        }
        mean_abs /= reps as f64;
        points.push((dt.ln(), mean_abs.ln()));
    }
    let (slope, _) = crate::ensemble::fit_line(&points);
    Ok(slope)
}
