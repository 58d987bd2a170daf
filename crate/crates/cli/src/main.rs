//! Command-line driver: verification batteries, composition-table reports,
//! equation-of-motion classification, lattice simulation time series, and
//! per-site state diagnostics. Reports are deterministic JSON on stdout;
//! progress and summaries go to stderr. Exit codes: 0 all checks pass,
//! 1 a check failed, 2 usage or configuration error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Deserialize;

use qubitfield::classify::{classify, type1_reduction, EomType};
use qubitfield::dynamics::{
    conservation_run, energy_charge, evolve_type1, wave_conservation_run, MatrixWave, Slice,
};
use qubitfield::lattice::{
    analytic_derivatives_ansatz, ansatz_field, convergence_orders, hamiltonian_field_from,
    HarmonicScalar, Lattice, ModeKind, ScalarMode,
};
use qubitfield::matrix::{fro_norm, parse_matrix};
use qubitfield::report::Report;
use qubitfield::state::{
    entanglement_witness, local_density, stationarity_check, DensityOperator,
    DEFAULT_WITNESS_THRESHOLD,
};
use qubitfield::triple::QubitTriple;
use qubitfield::verify::{oracle_factors, structure_constants_report, verify_algebra};

const CONFIG_ENV: &str = "QFLAB_CONFIG";

#[derive(Parser)]
#[command(name = "qflab", version, about = "qubit-field numerical laboratory")]
struct Cli {
    /// TOML scenario config (defaults to $QFLAB_CONFIG when set)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// seed for all randomized suites
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// cap the worker thread count
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the full operator-algebra verification battery
    VerifyAlgebra {
        /// verify a triple fixture (three matrix dumps) instead of only the
        /// built-in constructions
        #[arg(long)]
        fixture: Option<PathBuf>,
    },
    /// Extract the 6x6x6 integer composition tensor and compare it cell by
    /// cell against the catalogued table
    StructureConstants,
    /// Classify a super-operator coefficient vector into one of the eight
    /// equation-of-motion types
    Classify {
        #[arg(long, default_value_t = 0.0)]
        l0: f64,
        #[arg(long, default_value_t = 0.0)]
        l1: f64,
        #[arg(long, default_value_t = 0.0)]
        l2: f64,
        #[arg(long, default_value_t = 0.0)]
        l3: f64,
        #[arg(long, default_value_t = 0.0)]
        l4: f64,
        #[arg(long, default_value_t = 0.0)]
        l5: f64,
        /// mass parameter; for invertible (type I) vectors the equivalent
        /// plain wave-equation mass is reported
        #[arg(long)]
        mu: Option<f64>,
    },
    /// Evolve a matrix-valued field and persist the conserved-charge series
    Simulate {
        #[arg(long)]
        nx: Option<usize>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        mu: Option<f64>,
        /// initial data: "wave" (random exact solution with nonzero charge)
        /// or "ansatz" (swap-power field of the configured scalar)
        #[arg(long)]
        field: Option<String>,
        /// CSV output path for the time series
        #[arg(long)]
        csv: Option<PathBuf>,
        /// spatial resolutions for the refinement summary
        #[arg(long, value_delimiter = ',')]
        resolutions: Option<Vec<usize>>,
    },
    /// Per-site state diagnostics for a named global state preset
    Diagnose {
        /// one of: maximally-mixed, bell, product
        #[arg(long)]
        preset: Option<String>,
        /// Bloch vector for the product preset, e.g. 0,0,1
        #[arg(long, value_delimiter = ',')]
        bloch: Option<Vec<f64>>,
    },
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    lattice: Option<LatticeCfg>,
    #[serde(default)]
    modes: Vec<ModeCfg>,
    simulate: Option<SimulateCfg>,
    diagnose: Option<DiagnoseCfg>,
    tolerances: Option<TolerancesCfg>,
}

#[derive(Debug, Deserialize, Clone, Copy)]
#[serde(deny_unknown_fields)]
struct LatticeCfg {
    nx: Option<usize>,
    /// box circumference
    length: Option<f64>,
    /// dt as a fraction of dx (default 0.5)
    courant: Option<f64>,
}

#[derive(Debug, Deserialize, Clone, Copy)]
#[serde(deny_unknown_fields)]
struct ModeCfg {
    kind: ModeKind,
    amplitude: f64,
    /// wavenumber in whole cycles around the box
    #[serde(default)]
    cycles: u32,
    #[serde(default)]
    phase: f64,
}

#[derive(Debug, Deserialize, Default, Clone)]
#[serde(deny_unknown_fields)]
struct SimulateCfg {
    steps: Option<usize>,
    mu: Option<f64>,
    field: Option<String>,
    csv: Option<PathBuf>,
    resolutions: Option<Vec<usize>>,
}

#[derive(Debug, Deserialize, Default, Clone)]
#[serde(deny_unknown_fields)]
struct DiagnoseCfg {
    preset: Option<String>,
    bloch: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize, Default, Clone, Copy)]
#[serde(deny_unknown_fields)]
struct TolerancesCfg {
    witness_threshold: Option<f64>,
}

enum CliError {
    /// configuration / usage problems -> exit 2
    Usage(String),
    /// infrastructure failure inside a run -> exit 2
    Internal(qubitfield::Error),
}

impl From<qubitfield::Error> for CliError {
    fn from(e: qubitfield::Error) -> Self {
        match e {
            qubitfield::Error::CflViolation { .. }
            | qubitfield::Error::IncommensurateMode(_)
            | qubitfield::Error::Parse(_)
            | qubitfield::Error::LatticeTooSmall(_) => CliError::Usage(e.to_string()),
            other => CliError::Internal(other),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap renders its own message; usage problems exit 2
            let code = if e.exit_code() == 0 { 0 } else { 2 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(pass) => {
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Internal(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn load_config(cli: &Cli) -> Result<FileConfig, CliError> {
    let path = cli
        .config
        .clone()
        .or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(&p)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", p.display())))?;
            toml::from_str(&text)
                .map_err(|e| CliError::Usage(format!("config {}: {e}", p.display())))
        }
    }
}

fn scalar_from_modes(length: f64, modes: &[ModeCfg]) -> Result<HarmonicScalar, CliError> {
    let modes = modes
        .iter()
        .map(|m| ScalarMode {
            amplitude: m.amplitude,
            wavenumber: 2.0 * std::f64::consts::PI * m.cycles as f64 / length,
            phase: m.phase,
            kind: m.kind,
        })
        .collect();
    Ok(HarmonicScalar::new(length, modes)?)
}

fn emit(report: &Report) -> bool {
    print!("{}", report.render());
    eprint!("{}", report.summary_lines());
    report.pass
}

fn run(cli: Cli) -> Result<bool, CliError> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
    }
    let config = load_config(&cli)?;
    match &cli.cmd {
        Cmd::VerifyAlgebra { fixture } => {
            let mut report = verify_algebra(cli.seed)?;
            if let Some(path) = fixture {
                verify_fixture(&mut report, path)?;
            }
            Ok(emit(&report))
        }
        Cmd::StructureConstants => {
            let report = structure_constants_report(cli.seed)?;
            Ok(emit(&report))
        }
        Cmd::Classify {
            l0,
            l1,
            l2,
            l3,
            l4,
            l5,
            mu,
        } => {
            let lambda = [*l0, *l1, *l2, *l3, *l4, *l5];
            if lambda.iter().all(|x| *x == 0.0) {
                return Err(CliError::Usage(
                    "the coefficient vector is zero; pass at least one of --l0..--l5".into(),
                ));
            }
            run_classify(cli.seed, lambda, *mu)
        }
        Cmd::Simulate {
            nx,
            steps,
            mu,
            field,
            csv,
            resolutions,
        } => {
            let sim = config.simulate.clone().unwrap_or_default();
            let lat_cfg = config.lattice;
            let params = SimParams {
                nx: nx.or(lat_cfg.and_then(|l| l.nx)).unwrap_or(64),
                length: lat_cfg.and_then(|l| l.length).unwrap_or(1.0),
                courant: lat_cfg.and_then(|l| l.courant).unwrap_or(0.5),
                steps: steps.or(sim.steps).unwrap_or(200),
                mu: mu.or(sim.mu).unwrap_or(0.0),
                field: field.clone().or(sim.field).unwrap_or_else(|| "wave".into()),
                csv: csv
                    .clone()
                    .or(sim.csv)
                    .unwrap_or_else(|| PathBuf::from("charges.csv")),
                resolutions: resolutions.clone().or(sim.resolutions).unwrap_or_default(),
            };
            run_simulate(cli.seed, &params, &config.modes)
        }
        Cmd::Diagnose { preset, bloch } => {
            let diag = config.diagnose.clone().unwrap_or_default();
            let preset = preset
                .clone()
                .or(diag.preset)
                .unwrap_or_else(|| "maximally-mixed".into());
            let bloch = bloch.clone().or(diag.bloch);
            let witness_tol = config
                .tolerances
                .and_then(|t| t.witness_threshold)
                .unwrap_or(DEFAULT_WITNESS_THRESHOLD);
            let lat_cfg = config.lattice;
            run_diagnose(
                &preset,
                bloch.as_deref(),
                witness_tol,
                lat_cfg.and_then(|l| l.nx).unwrap_or(16),
                lat_cfg.and_then(|l| l.length).unwrap_or(1.0),
                &config.modes,
            )
        }
    }
}

/// Reads a fixture of three concatenated matrix dumps and checks the algebra.
fn verify_fixture(report: &mut Report, path: &PathBuf) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let mut blocks: Vec<String> = Vec::new();
    for line in text.lines() {
        if line.starts_with("dims ") {
            blocks.push(String::new());
        }
        if let Some(b) = blocks.last_mut() {
            b.push_str(line);
            b.push('\n');
        }
    }
    if blocks.len() != 3 {
        return Err(CliError::Usage(format!(
            "fixture {} holds {} matrix blocks, expected 3",
            path.display(),
            blocks.len()
        )));
    }
    let q: Vec<_> = blocks
        .iter()
        .map(|b| parse_matrix(b))
        .collect::<qubitfield::Result<_>>()?;
    let t = QubitTriple::from_matrices([q[0].clone(), q[1].clone(), q[2].clone()])?;
    let check = t.verify(1e-10);
    report.check("fixture_hermiticity_residual", check.hermiticity_residual, 1e-10);
    report.check("fixture_algebra_residual", check.algebra_residual, 1e-10);
    Ok(())
}

fn run_classify(seed: u64, lambda: [f64; 6], mu: Option<f64>) -> Result<bool, CliError> {
    let (sc, factors) = oracle_factors(seed)?;
    let c = classify(&lambda, &factors);
    let mut report = Report::new(
        "classify",
        seed,
        serde_json::json!({"lambda": lambda, "mu": mu}),
    );
    report.detail("classification", serde_json::to_value(&c).unwrap());
    if c.conflict {
        report.conflict(format!(
            "exact factors give type {}, the catalogued quadratic gives type {}",
            c.eom_type, c.published_type
        ));
    }
    if c.eom_type == EomType::I {
        if let Some(mu) = mu {
            let red = type1_reduction(&lambda, mu, &sc)?;
            report.detail("wave_equation_reduction", serde_json::to_value(&red).unwrap());
        }
    }
    Ok(emit(&report))
}

struct SimParams {
    nx: usize,
    length: f64,
    courant: f64,
    steps: usize,
    mu: f64,
    field: String,
    csv: PathBuf,
    resolutions: Vec<usize>,
}

fn run_simulate(seed: u64, p: &SimParams, modes: &[ModeCfg]) -> Result<bool, CliError> {
    let mut report = Report::new(
        "simulate",
        seed,
        serde_json::json!({
            "nx": p.nx, "length": p.length, "courant": p.courant,
            "steps": p.steps, "mu": p.mu, "field": p.field,
            "resolutions": p.resolutions,
        }),
    );
    let dx = p.length / p.nx as f64;
    let dt = p.courant * dx;
    if dt > dx {
        return Err(CliError::Usage(format!(
            "time step {dt} exceeds the grid spacing {dx}"
        )));
    }

    let mut csv = String::from("step,time,charge_norm,relative_drift,algebra_residual\n");
    if p.steps > 0 {
        let (s0, s1): (Slice, Slice) = match p.field.as_str() {
            "wave" => {
                let wave = MatrixWave::random(4, p.length, seed);
                (wave.slice(p.nx, 0.0), wave.slice(p.nx, dt))
            }
            "ansatz" => {
                let default_mode = [ModeCfg {
                    kind: ModeKind::Standing,
                    amplitude: 0.4,
                    cycles: 1,
                    phase: 0.3,
                }];
                let hs = scalar_from_modes(
                    p.length,
                    if modes.is_empty() { &default_mode } else { modes },
                )?;
                let lat = Lattice::new(4, p.nx, dt, dx)?;
                let q = ansatz_field(&lat, &hs.sample(&lat)?);
                let at = |it: usize| (0..p.nx).map(|ix| q.site(it, ix).clone()).collect();
                (at(0), at(1))
            }
            other => {
                return Err(CliError::Usage(format!(
                    "unknown field kind '{other}' (expected wave or ansatz)"
                )))
            }
        };
        let traj = evolve_type1(p.nx, dt, dx, s0, s1, p.mu, p.steps)?;
        let stride = (p.steps / 64).max(1);
        let mut charge0: Option<f64> = None;
        let mut worst_drift: f64 = 0.0;
        for n in (1..traj.slices.len() - 1).step_by(stride) {
            let qd = traj.time_derivative(n)?;
            let e = energy_charge(&traj.slices[n], &qd, dx)?;
            let norm = fro_norm(&e);
            let drift = match charge0 {
                None => {
                    charge0 = Some(norm);
                    0.0
                }
                // absolute drift when the conserved charge is itself zero
                Some(c0) if c0 > 1e-10 => (norm - c0).abs() / c0,
                Some(c0) => (norm - c0).abs(),
            };
            worst_drift = worst_drift.max(drift);
            csv.push_str(&format!(
                "{n},{:.6},{:.12e},{:.12e},{:.12e}\n",
                n as f64 * dt,
                norm,
                drift,
                traj.algebra_drift(n)
            ));
        }
        report.check("hermiticity_preserved", traj.max_herm_deviation(), 1e-10);
        if p.field == "wave" {
            report.check("charge_norm_drift", worst_drift, 1e-10);
        } else {
            report.detail("charge_norm_drift", serde_json::json!(worst_drift));
        }
    }
    std::fs::write(&p.csv, csv).map_err(qubitfield::Error::Io)?;
    report.detail("csv", serde_json::json!(p.csv.display().to_string()));

    if p.resolutions.len() >= 2 {
        let mut charge_errs = Vec::new();
        let mut sol_errs = Vec::new();
        for &nx in &p.resolutions {
            let run = match p.field.as_str() {
                "wave" => {
                    let r = wave_conservation_run(nx, 4 * nx, p.length, seed)?;
                    charge_errs.push(r.charge_error);
                    sol_errs.push(r.solution_error);
                    serde_json::to_value(&r).unwrap()
                }
                _ => {
                    let default_mode = [ModeCfg {
                        kind: ModeKind::Right,
                        amplitude: 0.4,
                        cycles: 1,
                        phase: 0.2,
                    }];
                    let hs = scalar_from_modes(
                        p.length,
                        if modes.is_empty() { &default_mode } else { modes },
                    )?;
                    let r = conservation_run(nx, 4 * nx, &hs)?;
                    sol_errs.push(r.solution_error);
                    serde_json::to_value(&r).unwrap()
                }
            };
            report.detail(&format!("refinement_nx{nx}"), run);
        }
        let orders = convergence_orders(&sol_errs);
        report.detail("solution_error_orders", serde_json::json!(orders));
        for o in &orders {
            report.check("solution_error_second_order", (o - 2.0).abs(), 0.2);
        }
        if !charge_errs.is_empty() {
            let orders = convergence_orders(&charge_errs);
            report.detail("charge_error_orders", serde_json::json!(orders));
            for o in &orders {
                report.check("charge_error_second_order", (o - 2.0).abs(), 0.2);
            }
        }
    }
    Ok(emit(&report))
}

fn run_diagnose(
    preset: &str,
    bloch: Option<&[f64]>,
    witness_tol: f64,
    nx: usize,
    length: f64,
    modes: &[ModeCfg],
) -> Result<bool, CliError> {
    let rho = match preset {
        "maximally-mixed" => DensityOperator::maximally_mixed(4),
        "bell" => DensityOperator::bell(),
        "product" => {
            let b = match bloch {
                Some([x, y, z]) => [*x, *y, *z],
                Some(other) => {
                    return Err(CliError::Usage(format!(
                        "--bloch expects three components, got {}",
                        other.len()
                    )))
                }
                None => [0.0, 0.0, 0.0],
            };
            let qubit = DensityOperator::bloch_qubit(b)?;
            let rest = DensityOperator::maximally_mixed(2);
            DensityOperator::product(&qubit, rest.matrix())?
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown preset '{other}' (expected maximally-mixed, bell or product)"
            )))
        }
    };
    let mut report = Report::new(
        "diagnose",
        0,
        serde_json::json!({
            "preset": preset, "bloch": bloch, "witness_threshold": witness_tol,
            "nx": nx, "length": length,
        }),
    );
    let hs = scalar_from_modes(length, modes)?;
    let dx = length / nx as f64;
    let lat = Lattice::new(6, nx, 0.5 * dx, dx)?;
    let q = ansatz_field(&lat, &hs.sample(&lat)?);
    let (qt, qx) = analytic_derivatives_ansatz(&lat, &hs);
    let h = hamiltonian_field_from(&q, &qt, &qx);
    let it = 2;
    let mut sites = Vec::new();
    let mut max_witness: f64 = 0.0;
    let mut min_witness = f64::INFINITY;
    let mut max_bloch_dev: f64 = 0.0;
    for ix in 0..nx {
        let t = QubitTriple::from_matrices(q.site(it, ix).clone())?;
        let ld = local_density(&rho, &t)?;
        let w = entanglement_witness(&rho, &t)?;
        let st = stationarity_check(&rho, h.ht.site(it, ix), h.hx.site(it, ix), &t, [1.0, 0.0])?;
        let hm = stationarity_check(&rho, h.ht.site(it, ix), h.hx.site(it, ix), &t, [0.0, 1.0])?;
        max_witness = max_witness.max(w.norm);
        min_witness = min_witness.min(w.norm);
        if let Some([x, y, z]) = bloch {
            let dev = (ld.bloch[0] - x)
                .abs()
                .max((ld.bloch[1] - y).abs())
                .max((ld.bloch[2] - z).abs());
            max_bloch_dev = max_bloch_dev.max(dev);
        }
        sites.push(serde_json::json!({
            "ix": ix,
            "x": lat.x(ix),
            "bloch": ld.bloch,
            "witness_norm": w.norm,
            "entangled": w.norm > witness_tol,
            "stationary_t": st,
            "homogeneous_x": hm,
        }));
    }
    report.detail("sites", serde_json::Value::Array(sites));
    let uniform_background = modes.is_empty();
    match preset {
        "maximally-mixed" => {
            report.check("witness_vanishes", max_witness, 1e-10);
        }
        "bell" => {
            report.check_bool("entanglement_detected_everywhere", min_witness > witness_tol);
        }
        "product" if uniform_background => {
            report.check("witness_vanishes", max_witness, 1e-10);
            if bloch.is_some() {
                report.check("bloch_vector_reproduced", max_bloch_dev, 1e-10);
            }
        }
        _ => {}
    }
    Ok(emit(&report))
}
