//! Acceptance gate: one criterion per test, each printing a single
//! pass/fail line (run with `--nocapture` to see the lines for passing
//! criteria as well). Every criterion carries its runtime budget.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qubitfield::classify::{catalogued_eoms, classify, factorize_determinant, EomType};
use qubitfield::dynamics::{
    ansatz_bundle, time_reversal_error, type7_charge, wave_conservation_run, Slice,
};
use qubitfield::lattice::{
    ansatz_field, convergence_orders, dalembertian_triples, fd_derivatives, gauge_checks,
    gauge_potential, hamiltonian_commutant_norm, hamiltonian_evolution_residual,
    hamiltonian_field_from, type1_residual_floor, EomSpec, HarmonicScalar, Lattice, ModeKind,
    ScalarMode,
};
use qubitfield::matrix::{identity, random_unitary, scale};
use qubitfield::state::{entanglement_witness, local_density, DensityOperator};
use qubitfield::superop::{
    check_associativity, dimension_obstruction, extract_structure_constants,
    omega_on_qtriple_table, table1_comparison, EQ21_COEFFS,
};
use qubitfield::triple::QubitTriple;
use qubitfield::verify::verify_algebra;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)*) => {
        if !($cond) {
            return Err(format!($($msg)*));
        }
    };
}

fn criterion(
    number: u32,
    name: &str,
    limit_seconds: f64,
    body: impl FnOnce() -> Result<(), String>,
) {
    let start = std::time::Instant::now();
    let outcome = body();
    let elapsed = start.elapsed().as_secs_f64();
    match outcome {
        Ok(()) if elapsed <= limit_seconds => {
            println!("[PASS] criterion {number:02} {name} ({elapsed:.2}s)");
        }
        Ok(()) => {
            println!(
                "[FAIL] criterion {number:02} {name}: runtime {elapsed:.2}s \
                 exceeds budget {limit_seconds}s"
            );
            panic!("criterion {number:02} exceeded its runtime budget");
        }
        Err(msg) => {
            println!("[FAIL] criterion {number:02} {name}: {msg}");
            panic!("criterion {number:02}: {msg}");
        }
    }
}

fn standing_mode(length: f64) -> HarmonicScalar {
    HarmonicScalar::new(
        length,
        vec![ScalarMode {
            amplitude: 0.4,
            wavenumber: 2.0 * std::f64::consts::PI / length,
            phase: 0.3,
            kind: ModeKind::Standing,
        }],
    )
    .unwrap()
}

#[test]
fn criterion_01_pauli_algebra() {
    criterion(1, "pauli-algebra", 1.0, || {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for n in [2usize, 4, 8] {
            let t = QubitTriple::embed(n).map_err(|e| e.to_string())?;
            let r = t.verify(1e-12).algebra_residual;
            ensure!(r <= 1e-12, "embedded dim {n} residual {r:.3e}");
            for i in 0..20 {
                let u = random_unitary(n, &mut rng);
                let r = t
                    .conjugated(&u)
                    .map_err(|e| e.to_string())?
                    .verify(1e-12)
                    .algebra_residual;
                ensure!(r <= 1e-12, "conjugate {i} dim {n} residual {r:.3e}");
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_02_triple_coefficient_table() {
    criterion(2, "triple-coefficient-table", 1.0, || {
        for n in [4usize, 8] {
            let t = QubitTriple::embed(n).map_err(|e| e.to_string())?;
            let table = omega_on_qtriple_table(&t).map_err(|e| e.to_string())?;
            for (alpha, c) in table.iter().enumerate() {
                ensure!(
                    (c.coefficient - EQ21_COEFFS[alpha]).abs() <= 1e-10
                        && c.residual <= 1e-10,
                    "dim {n} map {alpha}: coefficient {} residual {:.3e}",
                    c.coefficient,
                    c.residual
                );
            }
        }
        // in dimension 2 the conjugation map takes +3 on the commutant
        // (which is only the scalars), obstructing any triple there
        let obs = dimension_obstruction(&QubitTriple::embed(2).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        ensure!(
            (obs.coeff_on_unit - 3.0).abs() <= 1e-10,
            "dim-2 commutant coefficient {} should be +3",
            obs.coeff_on_unit
        );
        ensure!(
            obs.degenerate && obs.commutant_dim == 1,
            "dim-2 commutant should be trivial"
        );
        Ok(())
    });
}

#[test]
fn criterion_03_composition_table() {
    criterion(3, "composition-table", 10.0, || {
        let t = QubitTriple::embed(4).map_err(|e| e.to_string())?;
        let sc = extract_structure_constants(&t, 0).map_err(|e| e.to_string())?;
        ensure!(
            sc.max_residual <= 1e-9 && sc.max_integer_distance <= 1e-6,
            "extraction residual {:.3e}, integer distance {:.3e}",
            sc.max_residual,
            sc.max_integer_distance
        );
        let cmp = table1_comparison(&sc);
        if cmp.matches_alpha_after_beta != 36 {
            let mut cells = Vec::new();
            for a in 0..6 {
                for b in 0..6 {
                    if !cmp.agree_alpha_after_beta[a][b] {
                        cells.push(format!("(col {a}, row {b})"));
                    }
                }
            }
            return Err(format!(
                "{}/36 cells agree; disagreements: {}",
                cmp.matches_alpha_after_beta,
                cells.join(", ")
            ));
        }
        Ok(())
    });
}

#[test]
fn criterion_04_associativity() {
    criterion(4, "associativity", 1.0, || {
        let t = QubitTriple::embed(4).map_err(|e| e.to_string())?;
        let sc = extract_structure_constants(&t, 0).map_err(|e| e.to_string())?;
        ensure!(
            check_associativity(&sc),
            "exact integer associativity identity fails"
        );
        Ok(())
    });
}

#[test]
fn criterion_05_determinant_oracle() {
    criterion(5, "determinant-oracle", 30.0, || {
        let t = QubitTriple::embed(4).map_err(|e| e.to_string())?;
        let sc = extract_structure_constants(&t, 0).map_err(|e| e.to_string())?;
        // building the factorization cross-checks the symbolic determinant
        // against an exact integer evaluation at 1000 random points, divides
        // out both linear factors and takes an exact square root
        let f = factorize_determinant(&sc).map_err(|e| e.to_string())?;
        ensure!(f.overall == 1, "overall factor {} should be 1", f.overall);
        // the exact quadratic factor differs from the catalogued one in
        // exactly two monomials; publish the diff
        ensure!(
            f.published_quadratic_diff.len() == 2,
            "expected a two-monomial diff, got {:?}",
            f.published_quadratic_diff
        );
        println!(
            "       determinant quadratic-factor diff vs catalogued: {:?}",
            f.published_quadratic_diff
        );
        Ok(())
    });
}

#[test]
fn criterion_06_classification() {
    criterion(6, "classification", 1.0, || {
        let t = QubitTriple::embed(4).map_err(|e| e.to_string())?;
        let sc = extract_structure_constants(&t, 0).map_err(|e| e.to_string())?;
        let f = factorize_determinant(&sc).map_err(|e| e.to_string())?;
        let dual = classify(&[0.0, 0.0, 1.0, 0.0, 0.0, 1.0], &f);
        ensure!(
            dual.eom_type == EomType::VIII && dual.published_type == EomType::VII && dual.conflict,
            "divergence-pair vector: exact {}, catalogued {}, conflict {}",
            dual.eom_type,
            dual.published_type,
            dual.conflict
        );
        for (label, lambda, expected) in catalogued_eoms() {
            let c = classify(&lambda, &f);
            ensure!(
                c.eom_type == expected,
                "row {label}: exact type {} vs expected {expected}",
                c.eom_type
            );
        }
        Ok(())
    });
}

#[test]
fn criterion_07_field_configuration() {
    criterion(7, "field-configuration", 60.0, || {
        let hs = standing_mode(1.0);
        let nx = 64;
        let lat = Lattice::new(64, nx, 0.5 / nx as f64, 1.0 / nx as f64)
            .map_err(|e| e.to_string())?;
        let (q, _, _, boxq) = ansatz_bundle(&lat, &hs).map_err(|e| e.to_string())?;
        let r = q.max_algebra_residual();
        ensure!(r <= 1e-12, "per-site algebra residual {r:.3e}");

        fn max_res(
            spec: &EomSpec,
            q: &qubitfield::lattice::TripleField,
            boxq: &qubitfield::lattice::TripleField,
        ) -> Result<f64, String> {
            Ok(qubitfield::lattice::eom_residual(q, boxq, spec)
                .map_err(|e| e.to_string())?
                .into_iter()
                .fold(0.0, f64::max))
        }
        let divergence_pair = EomSpec {
            lambda: [0.0, 0.0, 1.0, 0.0, 0.0, 1.0],
            mu: 0.0,
        };
        let r = max_res(&divergence_pair, &q, &boxq)?;
        ensure!(r <= 1e-10, "divergence-pair equation residual {r:.3e}");

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut specs = vec![divergence_pair];
        for _ in 0..3 {
            let l1: f64 = rng.random_range(-2.0..2.0);
            let l2: f64 = rng.random_range(-2.0..2.0);
            let spec = EomSpec {
                lambda: [2.0 * l1, 0.0, l2, -l1, -l1, l2],
                mu: 0.0,
            };
            let r = max_res(&spec, &q, &boxq)?;
            ensure!(
                r <= 1e-10,
                "two-parameter family (l1={l1:.3}, l2={l2:.3}) residual {r:.3e}"
            );
            specs.push(spec);
        }

        // finite-difference wave operator: same equations at second order
        for spec in &specs {
            let mut errs = Vec::new();
            for nx in [16usize, 32, 64] {
                let lat = Lattice::new(nx, nx, 0.5 / nx as f64, 1.0 / nx as f64)
                    .map_err(|e| e.to_string())?;
                let q = ansatz_field(&lat, &hs.sample(&lat).map_err(|e| e.to_string())?);
                let fd_box = dalembertian_triples(&q);
                errs.push(max_res(spec, &q, &fd_box)?);
            }
            for o in convergence_orders(&errs) {
                ensure!(
                    o > 1.8 && o < 2.2,
                    "finite-difference residual order {o:.2} for {errs:?}"
                );
            }
        }

        // no-go: the same field solves no plain wave equation
        let floor = type1_residual_floor(&q, &boxq).map_err(|e| e.to_string())?;
        ensure!(
            floor > 0.5,
            "plain-wave-equation residual floor {floor:.3} should be bounded below"
        );
        Ok(())
    });
}

#[test]
fn criterion_08_gauge_hamiltonian_identities() {
    criterion(8, "gauge-hamiltonian-identities", 30.0, || {
        let hs = standing_mode(1.0);
        // exact identities with analytic derivatives
        let nx = 32;
        let lat =
            Lattice::new(16, nx, 0.5 / nx as f64, 1.0 / nx as f64).map_err(|e| e.to_string())?;
        let (q, qt, qx, _) = ansatz_bundle(&lat, &hs).map_err(|e| e.to_string())?;
        let g = gauge_potential(&lat, &hs);
        let checks = gauge_checks(&lat, &hs, &q, &g);
        ensure!(
            checks.reconstruction <= 1e-12,
            "conjugated reconstruction residual {:.3e}",
            checks.reconstruction
        );
        ensure!(
            checks.evolution_residual <= 1e-12,
            "gauge evolution residual {:.3e}",
            checks.evolution_residual
        );
        ensure!(
            checks.commutator <= 1e-12,
            "gauge component commutator {:.3e}",
            checks.commutator
        );
        let h = hamiltonian_field_from(&q, &qt, &qx);
        let r = hamiltonian_evolution_residual(&q, &qt, &qx, &h);
        ensure!(r <= 1e-12, "Hamiltonian evolution residual {r:.3e}");
        let pi = hamiltonian_commutant_norm(&q, &h);
        ensure!(pi <= 1e-10, "commutant projection of H {pi:.3e}");

        // finite-difference versions converge at second order
        let mut evo = Vec::new();
        let mut first_id = Vec::new();
        let mut curl = Vec::new();
        for nx in [16usize, 32, 64] {
            let lat = Lattice::new(nx, nx, 0.5 / nx as f64, 1.0 / nx as f64)
                .map_err(|e| e.to_string())?;
            let (q, _, _, boxq) = ansatz_bundle(&lat, &hs).map_err(|e| e.to_string())?;
            let (qt, qx) = fd_derivatives(&q);
            let h = hamiltonian_field_from(&q, &qt, &qx);
            evo.push(hamiltonian_evolution_residual(&q, &qt, &qx, &h));
            first_id.push(qubitfield::lattice::first_derivative_identity_residual(
                &q, &qt, &qx, &boxq,
            ));
            let g = gauge_potential(&lat, &hs);
            curl.push(gauge_checks(&lat, &hs, &q, &g).curl);
        }
        for (name, errs) in [
            ("hamiltonian evolution", &evo),
            ("first-derivative identity", &first_id),
            ("gauge curl", &curl),
        ] {
            for o in convergence_orders(errs) {
                ensure!(
                    o > 1.8 && o < 2.2,
                    "{name} finite-difference order {o:.2} for {errs:?}"
                );
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_09_conservation() {
    criterion(9, "conservation", 60.0, || {
        // two box-crossing times at each resolution; the discrete charge is
        // a bilinear invariant of the leapfrog update, so its drift sits at
        // machine precision (well inside any C dt^2 envelope), and the
        // second-order convergence is measured on the deviation from the
        // continuum charge of the exact solution
        let mut charge_errs = Vec::new();
        for nx in [16usize, 32, 64] {
            let run = wave_conservation_run(nx, 4 * nx, 1.0, 7).map_err(|e| e.to_string())?;
            ensure!(
                run.charge_norm > 1e-3,
                "nx {nx}: conserved charge should be nonzero"
            );
            let dt = 0.5 / nx as f64;
            ensure!(
                run.relative_drift <= dt * dt,
                "nx {nx}: drift {:.3e} above the dt^2 envelope",
                run.relative_drift
            );
            charge_errs.push(run.charge_error);
        }
        for o in convergence_orders(&charge_errs) {
            ensure!(
                o > 1.8 && o < 2.2,
                "charge discretization order {o:.2} for {charge_errs:?}"
            );
        }

        // exact time reversal
        let hs = standing_mode(1.0);
        let nx = 16;
        let dx = 1.0 / nx as f64;
        let dt = dx / 2.0;
        let lat = Lattice::new(4, nx, dt, dx).map_err(|e| e.to_string())?;
        let q = ansatz_field(&lat, &hs.sample(&lat).map_err(|e| e.to_string())?);
        let s0: Slice = (0..nx).map(|ix| q.site(0, ix).clone()).collect();
        let s1: Slice = (0..nx).map(|ix| q.site(1, ix).clone()).collect();
        let err = time_reversal_error(nx, dt, dx, s0, s1, 0.0, 50).map_err(|e| e.to_string())?;
        ensure!(err <= 1e-10, "time-reversal recovery error {err:.3e}");

        // the two integral forms of the type-VII charge agree on the field
        // configuration: exactly with analytic derivatives, at second order
        // with finite differences
        let traveling = HarmonicScalar::new(
            1.0,
            vec![ScalarMode {
                amplitude: 0.4,
                wavenumber: 2.0 * std::f64::consts::PI,
                phase: 0.2,
                kind: ModeKind::Right,
            }],
        )
        .map_err(|e| e.to_string())?;
        let lat = Lattice::new(4, nx, dt, dx).map_err(|e| e.to_string())?;
        let (q, qt, _, _) = ansatz_bundle(&lat, &traveling).map_err(|e| e.to_string())?;
        let qs: Slice = (0..nx).map(|ix| q.site(1, ix).clone()).collect();
        let ds: Slice = (0..nx).map(|ix| qt.site(1, ix).clone()).collect();
        let t7 = type7_charge(&qs, &ds, dx).map_err(|e| e.to_string())?;
        ensure!(
            t7.difference <= 1e-10,
            "charge forms differ by {:.3e} on exact data",
            t7.difference
        );
        let mut diffs = Vec::new();
        for nx in [16usize, 32, 64] {
            let run = qubitfield::dynamics::conservation_run(nx, nx, &traveling)
                .map_err(|e| e.to_string())?;
            diffs.push(run.type7_difference);
        }
        for o in convergence_orders(&diffs) {
            ensure!(
                o > 1.6 && o < 2.4,
                "charge-form finite-difference order {o:.2} for {diffs:?}"
            );
        }
        Ok(())
    });
}

#[test]
fn criterion_10_state_diagnostics() {
    criterion(10, "state-diagnostics", 10.0, || {
        let t = QubitTriple::embed(4).map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(3);

        // the local state reproduces every qubit-observable expectation
        for i in 0..100 {
            let rho = DensityOperator::random_mixed(4, &mut rng);
            let ld = local_density(&rho, &t).map_err(|e| e.to_string())?;
            let mut a = scale(&identity(4), Complex64::new(rng.random_range(-1.0..1.0), 0.0));
            for j in 0..3 {
                a += scale(t.q(j), Complex64::new(rng.random_range(-1.0..1.0), 0.0));
            }
            let local = (&a * &ld.rho_local).trace() / ld.rho_local.trace();
            let global = qubitfield::state::expectation(&rho, &a).map_err(|e| e.to_string())?;
            let dev = (local - Complex64::new(global, 0.0)).norm();
            ensure!(dev <= 1e-12, "pair {i}: local-state residual {dev:.3e}");
        }

        // witness separation
        for i in 0..100 {
            let rho = DensityOperator::random_product(2, 2, &mut rng);
            let w = entanglement_witness(&rho, &t).map_err(|e| e.to_string())?;
            ensure!(w.norm <= 1e-10, "product {i}: witness {:.3e}", w.norm);
        }
        let mut min_norm = f64::INFINITY;
        for _ in 0..100 {
            let rho = DensityOperator::random_pure(4, &mut rng);
            let w = entanglement_witness(&rho, &t).map_err(|e| e.to_string())?;
            min_norm = min_norm.min(w.norm);
        }
        ensure!(
            min_norm > 1e-6,
            "minimum witness over entangled sample {min_norm:.3e}"
        );

        // the witness-derivative trace relation, on a stationary homogeneous
        // product configuration (where its right side vanishes)
        let hs = HarmonicScalar::new(1.0, vec![]).map_err(|e| e.to_string())?;
        let nx = 8;
        let lat =
            Lattice::new(6, nx, 0.5 / nx as f64, 1.0 / nx as f64).map_err(|e| e.to_string())?;
        let (q, qt, qx, _) = ansatz_bundle(&lat, &hs).map_err(|e| e.to_string())?;
        let h = hamiltonian_field_from(&q, &qt, &qx);
        let rho = DensityOperator::random_product(2, 2, &mut rng);
        let c = qubitfield::state::dtrace_identity_check(&rho, &q, &h, 2, 3, 1e-8)
            .map_err(|e| e.to_string())?;
        ensure!(
            c.max_difference <= 1e-10,
            "trace-relation disagreement {:.3e} on a static uniform background",
            c.max_difference
        );
        Ok(())
    });
}

#[test]
fn criterion_11_determinism() {
    criterion(11, "determinism", 120.0, || {
        let a = verify_algebra(0).map_err(|e| e.to_string())?;
        let b = verify_algebra(0).map_err(|e| e.to_string())?;
        ensure!(a.pass, "battery fails:\n{}", a.summary_lines());
        ensure!(
            a.render() == b.render(),
            "two seed-0 runs produced different report bodies"
        );
        Ok(())
    });
}
