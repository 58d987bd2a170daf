//! Global density operators, expectation values, the induced local qubit
//! state, the commutant-based entanglement witness, and stationarity /
//! trace-identity diagnostics against lattice backgrounds.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::lattice::{HamiltonianField, TripleField};
use crate::matrix::{
    commutator, ensure_hermitian, epsilon, fro_norm, identity, kron, pauli, scale, CMatrix, C_I,
};
use crate::triple::QubitTriple;

/// Default decision threshold on the witness norm separating "product" from
/// "entangled" verdicts.
pub const DEFAULT_WITNESS_THRESHOLD: f64 = 1e-8;

/// A validated global state: Hermitian, positive semidefinite (eigenvalues
/// down to -1e-12 tolerated), unit trace.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    rho: CMatrix,
}

impl DensityOperator {
    pub fn new(rho: CMatrix) -> Result<Self> {
        if rho.nrows() != rho.ncols() || rho.nrows() == 0 {
            return Err(Error::InvalidDensity(format!(
                "expected a square matrix, got {}x{}",
                rho.nrows(),
                rho.ncols()
            )));
        }
        ensure_hermitian(&rho, 1e-10)?;
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::InvalidDensity(format!("trace {tr} is not 1")));
        }
        let eigs = rho.clone().symmetric_eigen().eigenvalues;
        let min_eig = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < -1e-12 {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self { rho })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn maximally_mixed(n: usize) -> Self {
        Self {
            rho: scale(&identity(n), Complex64::new(1.0 / n as f64, 0.0)),
        }
    }

    /// Pure state from an amplitude vector (normalized internally).
    pub fn from_pure(v: &[Complex64]) -> Result<Self> {
        let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if norm2 <= 0.0 {
            return Err(Error::InvalidDensity("zero state vector".into()));
        }
        let n = v.len();
        let rho = CMatrix::from_fn(n, n, |r, c| v[r] * v[c].conj() / norm2);
        Self::new(rho)
    }

    /// A 2x2 qubit density operator from a Bloch vector, |b| <= 1.
    pub fn bloch_qubit(b: [f64; 3]) -> Result<CMatrix> {
        let len = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
        if len > 1.0 + 1e-12 {
            return Err(Error::InvalidDensity(format!(
                "Bloch vector length {len} exceeds 1"
            )));
        }
        let mut m = identity(2);
        for j in 0..3 {
            m += scale(&pauli(j + 1)?, Complex64::new(b[j], 0.0));
        }
        Ok(scale(&m, Complex64::new(0.5, 0.0)))
    }

    /// Product state a (x) b from two density matrices.
    pub fn product(a: &CMatrix, b: &CMatrix) -> Result<Self> {
        Self::new(kron(a, b))
    }

    /// The maximally entangled two-qubit state (|00> + |11>)/sqrt(2).
    pub fn bell() -> Self {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let z = Complex64::new(0.0, 0.0);
        Self::from_pure(&[h, z, z, h]).expect("bell state is valid")
    }

    pub fn random_mixed<R: Rng>(n: usize, rng: &mut R) -> Self {
        let g = CMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let m = &g * g.adjoint();
        let tr = m.trace();
        Self {
            rho: scale(&m, Complex64::new(1.0, 0.0) / tr),
        }
    }

    pub fn random_pure<R: Rng>(n: usize, rng: &mut R) -> Self {
        let v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self::from_pure(&v).expect("random pure state is valid")
    }

    pub fn random_product<R: Rng>(na: usize, nb: usize, rng: &mut R) -> Self {
        let a = Self::random_mixed(na, rng);
        let b = Self::random_mixed(nb, rng);
        Self {
            rho: kron(&a.rho, &b.rho),
        }
    }

    /// rho -> u^dag rho u (the same frame change applied to operators).
    pub fn conjugated(&self, u: &CMatrix) -> Self {
        Self {
            rho: u.adjoint() * &self.rho * u,
        }
    }
}

/// Tr(A rho) for a Hermitian observable; the imaginary part must be noise.
pub fn expectation(rho: &DensityOperator, a: &CMatrix) -> Result<f64> {
    ensure_hermitian(a, 1e-10)?;
    let v = (a * rho.matrix()).trace();
    if v.im.abs() > 1e-10 {
        return Err(Error::InvalidDensity(format!(
            "expectation has imaginary part {:.3e}",
            v.im
        )));
    }
    Ok(v.re)
}

/// Tr(A rho) without Hermiticity assumptions (internal commutator traces).
fn complex_expectation(rho: &DensityOperator, a: &CMatrix) -> Complex64 {
    (a * rho.matrix()).trace()
}

/// The local qubit state 1/2 (1 + m_j q^j) induced by a global state on a
/// triple, with its built-in consistency residuals.
#[derive(Debug, Clone)]
pub struct LocalDensity {
    pub bloch: [f64; 3],
    pub rho_local: CMatrix,
    /// |Tr(rho_local) - N/2|
    pub trace_deviation: f64,
    /// worst |Tr(A rho_local)/Tr(rho_local) - <A>| over the observable basis
    /// {1, q_1, q_2, q_3}; by linearity this covers every qubit observable
    pub observable_residual: f64,
}

pub fn local_density(rho: &DensityOperator, t: &QubitTriple) -> Result<LocalDensity> {
    let n = t.dim();
    if rho.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "state dim {} vs triple dim {n}",
            rho.dim()
        )));
    }
    let bloch: [f64; 3] = [
        expectation(rho, t.q(0))?,
        expectation(rho, t.q(1))?,
        expectation(rho, t.q(2))?,
    ];
    let mut rho_local = identity(n);
    for j in 0..3 {
        rho_local += scale(t.q(j), Complex64::new(bloch[j], 0.0));
    }
    rho_local = scale(&rho_local, Complex64::new(0.5, 0.0));
    let half_n = n as f64 / 2.0;
    let trace_deviation = (rho_local.trace() - Complex64::new(half_n, 0.0)).norm();
    let mut observable_residual: f64 = 0.0;
    let mut check = |a: &CMatrix| -> Result<()> {
        let local = (a * &rho_local).trace() / rho_local.trace();
        let global = expectation(rho, a)?;
        observable_residual =
            observable_residual.max((local - Complex64::new(global, 0.0)).norm());
        Ok(())
    };
    check(&identity(n))?;
    for j in 0..3 {
        check(t.q(j))?;
    }
    Ok(LocalDensity {
        bloch,
        rho_local,
        trace_deviation,
        observable_residual,
    })
}

/// The witness operator
/// D = 3 rho - q_j rho q^j - ({q_j, rho} + i eps^{jkl} q_l rho q_k) <q^j>,
/// which vanishes exactly when the state is a product across the triple's
/// qubit/rest split.
#[derive(Debug, Clone)]
pub struct Witness {
    pub d: CMatrix,
    /// Frobenius norm of D
    pub norm: f64,
}

pub fn entanglement_witness(rho: &DensityOperator, t: &QubitTriple) -> Result<Witness> {
    let n = t.dim();
    if rho.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "state dim {} vs triple dim {n}",
            rho.dim()
        )));
    }
    let r = rho.matrix();
    let mut d = scale(r, Complex64::new(3.0, 0.0));
    for j in 0..3 {
        let qj = t.q(j);
        d -= qj * r * qj;
    }
    for j in 0..3 {
        let qj = t.q(j);
        let m = (qj * r).trace().re;
        let mut term = qj * r + r * qj;
        for k in 0..3 {
            for l in 0..3 {
                let w = epsilon(j, k, l);
                if w != 0.0 {
                    term += scale(&(t.q(l) * r * t.q(k)), C_I * w);
                }
            }
        }
        d -= scale(&term, Complex64::new(m, 0.0));
    }
    let norm = fro_norm(&d);
    Ok(Witness { d, norm })
}

/// max_j |n^mu <[H_mu, q_j]>|: zero iff the state looks stationary (timelike
/// n) or homogeneous (spacelike n) to every local observable at the site.
pub fn stationarity_check(
    rho: &DensityOperator,
    ht: &CMatrix,
    hx: &CMatrix,
    t: &QubitTriple,
    n: [f64; 2],
) -> Result<f64> {
    let h = scale(ht, Complex64::new(n[0], 0.0)) + scale(hx, Complex64::new(n[1], 0.0));
    let mut worst: f64 = 0.0;
    for j in 0..3 {
        let c = commutator(&h, t.q(j))?;
        worst = worst.max(complex_expectation(rho, &c).norm());
    }
    Ok(worst)
}

/// Both sides of the trace relation Tr(q_m D_{;mu}) = 4i <[H_mu, q_m]> at a
/// lattice site, with D finite-differenced along the lattice (the state held
/// fixed, the triple varying site to site).
#[derive(Debug, Clone)]
pub struct DtraceCheck {
    /// witness norm at the probed site (precondition: ~ 0)
    pub witness_at_site: f64,
    /// Tr(q_m D_{;mu}) indexed [mu][m], mu = (t, x)
    pub lhs: [[Complex64; 3]; 2],
    /// 4i <[H_mu, q_m]> indexed [mu][m]
    pub rhs: [[Complex64; 3]; 2],
    pub max_lhs: f64,
    pub max_rhs: f64,
    pub max_difference: f64,
}

pub fn dtrace_identity_check(
    rho: &DensityOperator,
    q: &TripleField,
    h: &HamiltonianField,
    it: usize,
    ix: usize,
    witness_tol: f64,
) -> Result<DtraceCheck> {
    let lat = q.lat;
    if it == 0 || it + 1 >= lat.nt {
        return Err(Error::IndexOutOfRange(format!(
            "site it={it} has no centered time neighbors"
        )));
    }
    let triple_at = |it: usize, ix: usize| QubitTriple::from_matrices(q.site(it, ix).clone());
    let here = triple_at(it, ix)?;
    let w0 = entanglement_witness(rho, &here)?;
    if w0.norm > witness_tol {
        return Err(Error::PreconditionViolated(format!(
            "witness norm {:.3e} at the probed site exceeds {witness_tol:.3e}; \
             the trace relation only applies to product states",
            w0.norm
        )));
    }
    let d_of = |it: usize, ix: usize| -> Result<CMatrix> {
        Ok(entanglement_witness(rho, &triple_at(it, ix)?)?.d)
    };
    let d_t = (d_of(it + 1, ix)? - d_of(it - 1, ix)?).map(|z| z / (2.0 * lat.dt));
    let d_x = (d_of(it, lat.xp(ix))? - d_of(it, lat.xm(ix))?).map(|z| z / (2.0 * lat.dx));
    let hmu = [h.ht.site(it, ix), h.hx.site(it, ix)];
    let dmu = [&d_t, &d_x];
    let mut lhs = [[Complex64::new(0.0, 0.0); 3]; 2];
    let mut rhs = [[Complex64::new(0.0, 0.0); 3]; 2];
    let (mut max_lhs, mut max_rhs, mut max_diff): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for mu in 0..2 {
        for m in 0..3 {
            let qm = here.q(m);
            let l = (qm * dmu[mu]).trace();
            let r = complex_expectation(rho, &commutator(hmu[mu], qm)?) * C_I * 4.0;
            lhs[mu][m] = l;
            rhs[mu][m] = r;
            max_lhs = max_lhs.max(l.norm());
            max_rhs = max_rhs.max(r.norm());
            max_diff = max_diff.max((l - r).norm());
        }
    }
    Ok(DtraceCheck {
        witness_at_site: w0.norm,
        lhs,
        rhs,
        max_lhs,
        max_rhs,
        max_difference: max_diff,
    })
}
