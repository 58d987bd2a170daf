//! Flat 1+1-dimensional Minkowski lattice with signature (+,-), periodic in
//! space: harmonic scalar fields, the swap-power ansatz field, gauge and
//! Hamiltonian fields, and residual evaluation for the equation-of-motion and
//! identity checks.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{
    anticommutator, commutator, epsilon, format_matrix, fro_norm, hermitian_part, hs_inner,
    identity, kron, max_abs, parse_matrix, pauli, scale, CMatrix, C_I,
};
use crate::superop::{omega_apply, project_commutant, swap_minus_projector, swap_power};
use crate::triple::QubitTriple;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Lattice {
    pub nt: usize,
    pub nx: usize,
    pub dt: f64,
    pub dx: f64,
}

impl Lattice {
    pub fn new(nt: usize, nx: usize, dt: f64, dx: f64) -> Result<Self> {
        if nt < 4 || nx < 4 {
            return Err(Error::LatticeTooSmall(format!(
                "need nt, nx >= 4, got {nt} x {nx}"
            )));
        }
        if !(dt > 0.0 && dx > 0.0) {
            return Err(Error::LatticeTooSmall("spacings must be positive".into()));
        }
        if dt > dx * (1.0 + 1e-12) {
            return Err(Error::CflViolation { dt, dx });
        }
        Ok(Self { nt, nx, dt, dx })
    }

    pub fn length(&self) -> f64 {
        self.nx as f64 * self.dx
    }

    pub fn t(&self, it: usize) -> f64 {
        it as f64 * self.dt
    }

    pub fn x(&self, ix: usize) -> f64 {
        ix as f64 * self.dx
    }

    pub fn idx(&self, it: usize, ix: usize) -> usize {
        it * self.nx + ix
    }

    pub fn n_sites(&self) -> usize {
        self.nt * self.nx
    }

    pub fn xp(&self, ix: usize) -> usize {
        (ix + 1) % self.nx
    }

    pub fn xm(&self, ix: usize) -> usize {
        (ix + self.nx - 1) % self.nx
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeKind {
    Right,
    Left,
    Standing,
    /// phi = amplitude * t + phase; uniform in space.
    LinearTime,
}

#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct ScalarMode {
    pub amplitude: f64,
    pub wavenumber: f64,
    pub phase: f64,
    pub kind: ModeKind,
}

/// Mode-sum scalar field, an exact continuum solution of the wave equation,
/// carrying analytic derivatives of all orders.
#[derive(Debug, Clone)]
pub struct HarmonicScalar {
    pub modes: Vec<ScalarMode>,
    pub length: f64,
}

impl HarmonicScalar {
    /// Checks each wavenumber against the periodic box of circumference
    /// `length`: k L / 2 pi must be a nonzero integer (or k = 0 for the
    /// spatially uniform kind).
    pub fn new(length: f64, modes: Vec<ScalarMode>) -> Result<Self> {
        if !(length > 0.0) {
            return Err(Error::LatticeTooSmall("box length must be positive".into()));
        }
        for m in &modes {
            if m.kind == ModeKind::LinearTime {
                if m.wavenumber != 0.0 {
                    return Err(Error::IncommensurateMode(
                        "uniform mode must have wavenumber 0".into(),
                    ));
                }
                continue;
            }
            let cycles = m.wavenumber * length / (2.0 * std::f64::consts::PI);
            if (cycles - cycles.round()).abs() > 1e-9 || cycles.round() == 0.0 {
                return Err(Error::IncommensurateMode(format!(
                    "k = {} gives {cycles} cycles around the box",
                    m.wavenumber
                )));
            }
        }
        Ok(Self { modes, length })
    }

    pub fn phi(&self, t: f64, x: f64) -> f64 {
        self.modes
            .iter()
            .map(|m| match m.kind {
                ModeKind::Right => m.amplitude * (m.wavenumber * (x - t) + m.phase).cos(),
                ModeKind::Left => m.amplitude * (m.wavenumber * (x + t) + m.phase).cos(),
                ModeKind::Standing => {
                    m.amplitude * (m.wavenumber * x + m.phase).cos() * (m.wavenumber * t).cos()
                }
                ModeKind::LinearTime => m.amplitude * t + m.phase,
            })
            .sum()
    }

    /// (d phi / dt, d phi / dx), exact.
    pub fn dphi(&self, t: f64, x: f64) -> [f64; 2] {
        let mut pt = 0.0;
        let mut px = 0.0;
        for m in &self.modes {
            let (a, k, p) = (m.amplitude, m.wavenumber, m.phase);
            match m.kind {
                ModeKind::Right => {
                    let s = (k * (x - t) + p).sin();
                    pt += a * k * s;
                    px -= a * k * s;
                }
                ModeKind::Left => {
                    let s = (k * (x + t) + p).sin();
                    pt -= a * k * s;
                    px -= a * k * s;
                }
                ModeKind::Standing => {
                    pt -= a * k * (k * x + p).cos() * (k * t).sin();
                    px -= a * k * (k * x + p).sin() * (k * t).cos();
                }
                ModeKind::LinearTime => pt += a,
            }
        }
        [pt, px]
    }

    /// (phi_tt, phi_tx, phi_xx), exact.
    pub fn d2phi(&self, t: f64, x: f64) -> [f64; 3] {
        let mut out = [0.0; 3];
        for m in &self.modes {
            let (a, k, p) = (m.amplitude, m.wavenumber, m.phase);
            match m.kind {
                ModeKind::Right => {
                    let c = (k * (x - t) + p).cos();
                    out[0] -= a * k * k * c;
                    out[1] += a * k * k * c;
                    out[2] -= a * k * k * c;
                }
                ModeKind::Left => {
                    let c = (k * (x + t) + p).cos();
                    out[0] -= a * k * k * c;
                    out[1] -= a * k * k * c;
                    out[2] -= a * k * k * c;
                }
                ModeKind::Standing => {
                    let cx = (k * x + p).cos();
                    let sx = (k * x + p).sin();
                    let ct = (k * t).cos();
                    let st = (k * t).sin();
                    out[0] -= a * k * k * cx * ct;
                    out[1] += a * k * k * sx * st;
                    out[2] -= a * k * k * cx * ct;
                }
                ModeKind::LinearTime => {}
            }
        }
        out
    }

    /// phi_,mu phi^,mu = phi_t^2 - phi_x^2 in the (+,-) signature.
    pub fn gradient_square(&self, t: f64, x: f64) -> f64 {
        let [pt, px] = self.dphi(t, x);
        pt * pt - px * px
    }

    pub fn sample(&self, lat: &Lattice) -> Result<ScalarField> {
        if (lat.length() - self.length).abs() > 1e-9 * self.length {
            return Err(Error::DimensionMismatch(format!(
                "scalar box length {} vs lattice circumference {}",
                self.length,
                lat.length()
            )));
        }
        let values = (0..lat.n_sites())
            .map(|s| self.phi(lat.t(s / lat.nx), lat.x(s % lat.nx)))
            .collect();
        Ok(ScalarField { lat: *lat, values })
    }
}

#[derive(Debug, Clone)]
pub struct ScalarField {
    pub lat: Lattice,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn get(&self, it: usize, ix: usize) -> f64 {
        self.values[self.lat.idx(it, ix)]
    }
}

/// Second-order central-difference wave operator on a scalar field. Periodic
/// in x; only interior time slices are populated, the first and last stay 0.
pub fn dalembertian_scalar(f: &ScalarField) -> ScalarField {
    let lat = f.lat;
    let mut values = vec![0.0; lat.n_sites()];
    for it in 1..lat.nt - 1 {
        for ix in 0..lat.nx {
            let c = f.get(it, ix);
            let tt = (f.get(it + 1, ix) - 2.0 * c + f.get(it - 1, ix)) / (lat.dt * lat.dt);
            let xx = (f.get(it, lat.xp(ix)) - 2.0 * c + f.get(it, lat.xm(ix))) / (lat.dx * lat.dx);
            values[lat.idx(it, ix)] = tt - xx;
        }
    }
    ScalarField { lat, values }
}

/// A matrix triple at every lattice site.
#[derive(Debug, Clone)]
pub struct TripleField {
    pub lat: Lattice,
    pub n: usize,
    pub sites: Vec<[CMatrix; 3]>,
}

impl TripleField {
    pub fn from_fn<F>(lat: &Lattice, n: usize, f: F) -> Self
    where
        F: Fn(usize, usize) -> [CMatrix; 3] + Sync,
    {
        let sites: Vec<[CMatrix; 3]> = (0..lat.n_sites())
            .into_par_iter()
            .map(|s| f(s / lat.nx, s % lat.nx))
            .collect();
        Self {
            lat: *lat,
            n,
            sites,
        }
    }

    pub fn site(&self, it: usize, ix: usize) -> &[CMatrix; 3] {
        &self.sites[self.lat.idx(it, ix)]
    }

    /// Worst algebra residual over all sites.
    pub fn max_algebra_residual(&self) -> f64 {
        self.sites
            .par_iter()
            .map(|q| {
                let t = QubitTriple::from_matrices(q.clone()).expect("square matrices");
                t.verify(f64::INFINITY).algebra_residual
            })
            .reduce(|| 0.0, f64::max)
    }
}

/// One matrix at every lattice site.
#[derive(Debug, Clone)]
pub struct MatrixField {
    pub lat: Lattice,
    pub data: Vec<CMatrix>,
}

impl MatrixField {
    pub fn site(&self, it: usize, ix: usize) -> &CMatrix {
        &self.data[self.lat.idx(it, ix)]
    }
}

/// Central-difference wave operator on a triple field; interior time slices
/// only, zero matrices elsewhere.
pub fn dalembertian_triples(f: &TripleField) -> TripleField {
    let lat = f.lat;
    let n = f.n;
    let dt2 = lat.dt * lat.dt;
    let dx2 = lat.dx * lat.dx;
    let sites: Vec<[CMatrix; 3]> = (0..lat.n_sites())
        .into_par_iter()
        .map(|s| {
            let (it, ix) = (s / lat.nx, s % lat.nx);
            if it == 0 || it == lat.nt - 1 {
                return [
                    CMatrix::zeros(n, n),
                    CMatrix::zeros(n, n),
                    CMatrix::zeros(n, n),
                ];
            }
            std::array::from_fn(|j| {
                let c = &f.site(it, ix)[j];
                let tt = (&f.site(it + 1, ix)[j] + &f.site(it - 1, ix)[j]
                    - c.map(|z| z * 2.0))
                .map(|z| z / dt2);
                let xx = (&f.site(it, lat.xp(ix))[j] + &f.site(it, lat.xm(ix))[j]
                    - c.map(|z| z * 2.0))
                .map(|z| z / dx2);
                tt - xx
            })
        })
        .collect();
    TripleField {
        lat,
        n,
        sites,
    }
}

fn eps_bilinear(j: usize) -> CMatrix {
    // sum_{kl} eps_{jkl} sigma_k (x) sigma_l
    let mut e = CMatrix::zeros(4, 4);
    for k in 0..3 {
        for l in 0..3 {
            let w = epsilon(j, k, l);
            if w != 0.0 {
                let sk = pauli(k + 1).expect("pauli");
                let sl = pauli(l + 1).expect("pauli");
                e += scale(&kron(&sk, &sl), Complex64::new(w, 0.0));
            }
        }
    }
    e
}

/// The swap-power solution triple at scalar value phi:
/// q_j = 1/2((1 - cos pi phi) I (x) sigma_j + (1 + cos pi phi) sigma_j (x) I
///        - sin pi phi eps_j^{kl} sigma_k (x) sigma_l).
pub fn ansatz_site(phi: f64) -> [CMatrix; 3] {
    let c = (std::f64::consts::PI * phi).cos();
    let sn = (std::f64::consts::PI * phi).sin();
    let i2 = identity(2);
    std::array::from_fn(|j| {
        let sj = pauli(j + 1).expect("pauli");
        let m = scale(&kron(&i2, &sj), Complex64::new(0.5 * (1.0 - c), 0.0))
            + scale(&kron(&sj, &i2), Complex64::new(0.5 * (1.0 + c), 0.0))
            - scale(&eps_bilinear(j), Complex64::new(0.5 * sn, 0.0));
        m
    })
}

/// d q_j / d phi for the ansatz, exact.
pub fn ansatz_dq_dphi(phi: f64) -> [CMatrix; 3] {
    let pi = std::f64::consts::PI;
    let c = (pi * phi).cos();
    let sn = (pi * phi).sin();
    let i2 = identity(2);
    std::array::from_fn(|j| {
        let sj = pauli(j + 1).expect("pauli");
        let asym = kron(&i2, &sj) - kron(&sj, &i2);
        scale(&asym, Complex64::new(0.5 * pi * sn, 0.0))
            - scale(&eps_bilinear(j), Complex64::new(0.5 * pi * c, 0.0))
    })
}

/// The closed-form wave operator applied to the ansatz:
/// box q_j = (pi/2)(sin pi phi (I (x) s_j - s_j (x) I) - cos pi phi E_j) box phi
///         + (pi^2/2)(cos pi phi (I (x) s_j - s_j (x) I) + sin pi phi E_j) dphi2
/// with E_j the epsilon bilinear and dphi2 = phi_,mu phi^,mu.
pub fn box_ansatz_site(phi: f64, box_phi: f64, dphi2: f64) -> [CMatrix; 3] {
    let pi = std::f64::consts::PI;
    let c = (pi * phi).cos();
    let sn = (pi * phi).sin();
    let i2 = identity(2);
    std::array::from_fn(|j| {
        let sj = pauli(j + 1).expect("pauli");
        let asym = kron(&i2, &sj) - kron(&sj, &i2);
        let e = eps_bilinear(j);
        let first = scale(&asym, Complex64::new(sn, 0.0)) - scale(&e, Complex64::new(c, 0.0));
        let second = scale(&asym, Complex64::new(c, 0.0)) + scale(&e, Complex64::new(sn, 0.0));
        scale(&first, Complex64::new(0.5 * pi * box_phi, 0.0))
            + scale(&second, Complex64::new(0.5 * pi * pi * dphi2, 0.0))
    })
}

/// The 4-dimensional ansatz field sampled over the lattice.
pub fn ansatz_field(lat: &Lattice, phi: &ScalarField) -> TripleField {
    TripleField::from_fn(lat, 4, |it, ix| ansatz_site(phi.get(it, ix)))
}

/// The exact wave operator of the ansatz field from the analytic mode data
/// (box phi = 0 for harmonic scalars, so only the gradient-square bracket
/// survives).
pub fn analytic_box_ansatz(lat: &Lattice, hs: &HarmonicScalar) -> TripleField {
    TripleField::from_fn(lat, 4, |it, ix| {
        let (t, x) = (lat.t(it), lat.x(ix));
        box_ansatz_site(hs.phi(t, x), 0.0, hs.gradient_square(t, x))
    })
}

/// Exact first derivatives (d_t q, d_x q) of the ansatz field.
pub fn analytic_derivatives_ansatz(lat: &Lattice, hs: &HarmonicScalar) -> (TripleField, TripleField) {
    let qt = TripleField::from_fn(lat, 4, |it, ix| {
        let (t, x) = (lat.t(it), lat.x(ix));
        let d = ansatz_dq_dphi(hs.phi(t, x));
        let [pt, _] = hs.dphi(t, x);
        std::array::from_fn(|j| scale(&d[j], Complex64::new(pt, 0.0)))
    });
    let qx = TripleField::from_fn(lat, 4, |it, ix| {
        let (t, x) = (lat.t(it), lat.x(ix));
        let d = ansatz_dq_dphi(hs.phi(t, x));
        let [_, px] = hs.dphi(t, x);
        std::array::from_fn(|j| scale(&d[j], Complex64::new(px, 0.0)))
    });
    (qt, qx)
}

/// Per-site unitary U = W^phi and the gauge potential
/// J_mu = -i U^dag_{;mu} U = -pi d_mu phi P_-.
#[derive(Debug, Clone)]
pub struct GaugeField {
    pub u: MatrixField,
    pub jt: MatrixField,
    pub jx: MatrixField,
}

pub fn gauge_potential(lat: &Lattice, hs: &HarmonicScalar) -> GaugeField {
    let pm = swap_minus_projector();
    let pi = std::f64::consts::PI;
    let mut u = Vec::with_capacity(lat.n_sites());
    let mut jt = Vec::with_capacity(lat.n_sites());
    let mut jx = Vec::with_capacity(lat.n_sites());
    for s in 0..lat.n_sites() {
        let (t, x) = (lat.t(s / lat.nx), lat.x(s % lat.nx));
        u.push(swap_power(hs.phi(t, x)).w);
        let [pt, px] = hs.dphi(t, x);
        jt.push(scale(&pm, Complex64::new(-pi * pt, 0.0)));
        jx.push(scale(&pm, Complex64::new(-pi * px, 0.0)));
    }
    GaugeField {
        u: MatrixField { lat: *lat, data: u },
        jt: MatrixField { lat: *lat, data: jt },
        jx: MatrixField { lat: *lat, data: jx },
    }
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct GaugeChecks {
    /// max | q_j - U^dag (sigma_j (x) I) U |
    pub reconstruction: f64,
    /// max | q_{j;mu} - i [J_mu, q_j] | with analytic derivatives
    pub evolution_residual: f64,
    /// max | [J_t, J_x] |
    pub commutator: f64,
    /// max | J_{t;x} - J_{x;t} | by central differences on the gauge field
    pub curl: f64,
}

pub fn gauge_checks(
    lat: &Lattice,
    hs: &HarmonicScalar,
    q: &TripleField,
    g: &GaugeField,
) -> GaugeChecks {
    let base: Vec<CMatrix> = (1..=3)
        .map(|j| kron(&pauli(j).expect("pauli"), &identity(2)))
        .collect();
    let (qt, qx) = analytic_derivatives_ansatz(lat, hs);
    let mut rec: f64 = 0.0;
    let mut evo: f64 = 0.0;
    let mut com: f64 = 0.0;
    let mut curl: f64 = 0.0;
    for it in 0..lat.nt {
        for ix in 0..lat.nx {
            let u = g.u.site(it, ix);
            let jt = g.jt.site(it, ix);
            let jx = g.jx.site(it, ix);
            for j in 0..3 {
                let qj = &q.site(it, ix)[j];
                rec = rec.max(max_abs(&(qj - u.adjoint() * &base[j] * u)));
                let rt = &qt.site(it, ix)[j]
                    - scale(&commutator(jt, qj).expect("dims"), C_I);
                let rx = &qx.site(it, ix)[j]
                    - scale(&commutator(jx, qj).expect("dims"), C_I);
                evo = evo.max(max_abs(&rt)).max(max_abs(&rx));
            }
            com = com.max(max_abs(&commutator(jt, jx).expect("dims")));
            if it >= 1 && it < lat.nt - 1 {
                let djt_dx = (g.jt.site(it, lat.xp(ix)) - g.jt.site(it, lat.xm(ix)))
                    .map(|z| z / (2.0 * lat.dx));
                let djx_dt = (g.jx.site(it + 1, ix) - g.jx.site(it - 1, ix))
                    .map(|z| z / (2.0 * lat.dt));
                curl = curl.max(max_abs(&(djt_dx - djx_dt)));
            }
        }
    }
    GaugeChecks {
        reconstruction: rec,
        evolution_residual: evo,
        commutator: com,
        curl,
    }
}

/// Per-site pair of Hermitian matrices (H_t, H_x) with
/// H_mu = -(i/4) q_{j;mu} q^j.
#[derive(Debug, Clone)]
pub struct HamiltonianField {
    pub ht: MatrixField,
    pub hx: MatrixField,
    /// worst Hermiticity deviation removed by symmetrization
    pub asymmetry: f64,
}

fn h_from_derivatives(q: &[CMatrix; 3], dq: &[CMatrix; 3]) -> CMatrix {
    let n = q[0].nrows();
    let mut h = CMatrix::zeros(n, n);
    for j in 0..3 {
        h += &dq[j] * &q[j];
    }
    scale(&h, C_I * -0.25)
}

/// Hamiltonian field from supplied derivative fields (analytic or FD).
pub fn hamiltonian_field_from(
    q: &TripleField,
    qt: &TripleField,
    qx: &TripleField,
) -> HamiltonianField {
    let lat = q.lat;
    let mut asym: f64 = 0.0;
    let mut build = |dq: &TripleField| -> MatrixField {
        let data: Vec<CMatrix> = (0..lat.n_sites())
            .map(|s| {
                let h = h_from_derivatives(&q.sites[s], &dq.sites[s]);
                asym = asym.max(crate::matrix::herm_deviation(&h));
                hermitian_part(&h)
            })
            .collect();
        MatrixField { lat, data }
    };
    let ht = build(qt);
    let hx = build(qx);
    HamiltonianField {
        ht,
        hx,
        asymmetry: asym,
    }
}

/// Central-difference derivatives of a triple field: time interior only
/// (zeros on the first and last slice of the time derivative), periodic x.
pub fn fd_derivatives(q: &TripleField) -> (TripleField, TripleField) {
    let lat = q.lat;
    let n = q.n;
    let qt = TripleField::from_fn(&lat, n, |it, ix| {
        if it == 0 || it == lat.nt - 1 {
            return std::array::from_fn(|_| CMatrix::zeros(n, n));
        }
        std::array::from_fn(|j| {
            (&q.site(it + 1, ix)[j] - &q.site(it - 1, ix)[j]).map(|z| z / (2.0 * lat.dt))
        })
    });
    let qx = TripleField::from_fn(&lat, n, |it, ix| {
        std::array::from_fn(|j| {
            (&q.site(it, lat.xp(ix))[j] - &q.site(it, lat.xm(ix))[j]).map(|z| z / (2.0 * lat.dx))
        })
    });
    (qt, qx)
}

/// max over interior sites and mu of | q_{j;mu} - i [H_mu, q_j] |.
pub fn hamiltonian_evolution_residual(
    q: &TripleField,
    qt: &TripleField,
    qx: &TripleField,
    h: &HamiltonianField,
) -> f64 {
    let lat = q.lat;
    let mut worst: f64 = 0.0;
    for it in 1..lat.nt - 1 {
        for ix in 0..lat.nx {
            for j in 0..3 {
                let qj = &q.site(it, ix)[j];
                let rt = &qt.site(it, ix)[j]
                    - scale(&commutator(h.ht.site(it, ix), qj).expect("dims"), C_I);
                let rx = &qx.site(it, ix)[j]
                    - scale(&commutator(h.hx.site(it, ix), qj).expect("dims"), C_I);
                worst = worst.max(max_abs(&rt)).max(max_abs(&rx));
            }
        }
    }
    worst
}

/// max over interior sites of | Pi(H_mu) |: the Hamiltonian lies outside the
/// commutant.
pub fn hamiltonian_commutant_norm(q: &TripleField, h: &HamiltonianField) -> f64 {
    let lat = q.lat;
    let mut worst: f64 = 0.0;
    for it in 1..lat.nt - 1 {
        for ix in 0..lat.nx {
            let t = QubitTriple::from_matrices(q.site(it, ix).clone()).expect("square");
            for m in [h.ht.site(it, ix), h.hx.site(it, ix)] {
                worst = worst.max(max_abs(&project_commutant(&t, m).expect("dims")));
            }
        }
    }
    worst
}

/// Coefficients of a linear equation of motion
/// lambda_alpha Omega^(alpha) box q_j + mu q_j = 0.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct EomSpec {
    pub lambda: [f64; 6],
    pub mu: f64,
}

/// Frobenius norm of the equation-of-motion residual per interior site
/// (boundary time slices are skipped and reported as 0).
pub fn eom_residual(q: &TripleField, boxq: &TripleField, spec: &EomSpec) -> Result<Vec<f64>> {
    if q.n != boxq.n || q.lat != boxq.lat {
        return Err(Error::DimensionMismatch("eom_residual field shapes".into()));
    }
    let lat = q.lat;
    (0..lat.n_sites())
        .into_par_iter()
        .map(|s| {
            let it = s / lat.nx;
            if it == 0 || it == lat.nt - 1 {
                return Ok(0.0);
            }
            let t = QubitTriple::from_matrices(q.sites[s].clone())?;
            let n = q.n;
            let mut acc = [
                CMatrix::zeros(n, n),
                CMatrix::zeros(n, n),
                CMatrix::zeros(n, n),
            ];
            for alpha in 0..6 {
                if spec.lambda[alpha] == 0.0 {
                    continue;
                }
                let img = omega_apply(alpha, &t, &boxq.sites[s])?;
                for j in 0..3 {
                    acc[j] += scale(&img[j], Complex64::new(spec.lambda[alpha], 0.0));
                }
            }
            let mut norm2 = 0.0;
            for j in 0..3 {
                let r = &acc[j] + scale(t.q(j), Complex64::new(spec.mu, 0.0));
                norm2 += fro_norm(&r).powi(2);
            }
            Ok(norm2.sqrt())
        })
        .collect()
}

/// The best type-I fit: minimizes || box q + mu q || over mu across interior
/// sites and returns the minimized residual relative to || box q ||.
/// A value bounded away from zero under refinement exhibits the no-go for
/// plain wave equations on the ansatz.
pub fn type1_residual_floor(q: &TripleField, boxq: &TripleField) -> Result<f64> {
    if q.lat != boxq.lat {
        return Err(Error::DimensionMismatch("type1_residual_floor".into()));
    }
    let lat = q.lat;
    let mut inner = 0.0;
    let mut qq = 0.0;
    let mut bb = 0.0;
    for it in 1..lat.nt - 1 {
        for ix in 0..lat.nx {
            let s = lat.idx(it, ix);
            for j in 0..3 {
                inner += hs_inner(&q.sites[s][j], &boxq.sites[s][j]).re;
                qq += fro_norm(&q.sites[s][j]).powi(2);
                bb += fro_norm(&boxq.sites[s][j]).powi(2);
            }
        }
    }
    if bb == 0.0 {
        return Ok(0.0);
    }
    let mu = -inner / qq;
    // || box q + mu q ||^2 = bb + 2 mu inner + mu^2 qq
    let res2 = (bb + 2.0 * mu * inner + mu * mu * qq).max(0.0);
    Ok((res2 / bb).sqrt())
}

/// Residual of the first-derivative contraction identity
/// q_j^{;mu} q_{k;mu} = 1/2 (i eps_{jk}^l box q_l - box q_j q_k - q_j box q_k)
/// evaluated with supplied derivative and wave-operator fields; max over
/// interior sites and j, k.
pub fn first_derivative_identity_residual(
    q: &TripleField,
    qt: &TripleField,
    qx: &TripleField,
    boxq: &TripleField,
) -> f64 {
    let lat = q.lat;
    let mut worst: f64 = 0.0;
    for it in 1..lat.nt - 1 {
        for ix in 0..lat.nx {
            let s = lat.idx(it, ix);
            for j in 0..3 {
                for k in 0..3 {
                    // (+,-) signature: a^mu b_mu = a_t b_t - a_x b_x
                    let lhs =
                        &qt.sites[s][j] * &qt.sites[s][k] - &qx.sites[s][j] * &qx.sites[s][k];
                    let mut eps_term = CMatrix::zeros(q.n, q.n);
                    for l in 0..3 {
                        let w = epsilon(j, k, l);
                        if w != 0.0 {
                            eps_term += scale(&boxq.sites[s][l], C_I * w);
                        }
                    }
                    let rhs = scale(
                        &(eps_term
                            - &boxq.sites[s][j] * &q.sites[s][k]
                            - &q.sites[s][j] * &boxq.sites[s][k]),
                        Complex64::new(0.5, 0.0),
                    );
                    worst = worst.max(max_abs(&(lhs - rhs)));
                }
            }
        }
    }
    worst
}

/// The explicit anticommutator form of the type-VIII equation:
/// sum_k { q^k, [q_[k, A_j] ] } with the antisymmetrization [k ... j] carrying
/// weight 1/2.
pub fn anticommutator_form(q: &[CMatrix; 3], a: &[CMatrix; 3]) -> Result<[CMatrix; 3]> {
    let n = q[0].nrows();
    let mut out: [CMatrix; 3] =
        std::array::from_fn(|_| CMatrix::zeros(n, n));
    for j in 0..3 {
        for k in 0..3 {
            let anti = scale(
                &(commutator(&q[k], &a[j])? - commutator(&q[j], &a[k])?),
                Complex64::new(0.5, 0.0),
            );
            out[j] += anticommutator(&q[k], &anti)?;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct AnticommutatorFormFit {
    /// fitted constant in `anticommutator form = c * (Omega2 + Omega5) A`
    pub constant: [f64; 2],
    pub residual: f64,
}

/// Measures the proportionality constant between the explicit anticommutator
/// form and (Omega^(2) + Omega^(5)) applied to the same operand.
pub fn anticommutator_form_fit(t: &QubitTriple, a: &[CMatrix; 3]) -> Result<AnticommutatorFormFit> {
    let lhs = anticommutator_form(t.components(), a)?;
    let o2 = omega_apply(2, t, a)?;
    let o5 = omega_apply(5, t, a)?;
    let rhs: [CMatrix; 3] = std::array::from_fn(|j| &o2[j] + &o5[j]);
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for j in 0..3 {
        num += hs_inner(&rhs[j], &lhs[j]);
        den += fro_norm(&rhs[j]).powi(2);
    }
    if den == 0.0 {
        return Ok(AnticommutatorFormFit {
            constant: [0.0, 0.0],
            residual: lhs.iter().map(max_abs).fold(0.0, f64::max),
        });
    }
    let c = num / den;
    let residual = (0..3)
        .map(|j| max_abs(&(&lhs[j] - scale(&rhs[j], c))))
        .fold(0.0, f64::max);
    Ok(AnticommutatorFormFit {
        constant: [c.re, c.im],
        residual,
    })
}

/// Writes a triple field in the text snapshot format: a lattice header, then
/// per site and component `site <it> <ix> <j>` followed by the matrix dump.
pub fn format_triple_field(f: &TripleField) -> String {
    let mut out = format!(
        "lattice {} {} {} {} {}\n",
        f.lat.nt, f.lat.nx, f.lat.dt, f.lat.dx, f.n
    );
    for it in 0..f.lat.nt {
        for ix in 0..f.lat.nx {
            for j in 0..3 {
                out.push_str(&format!("site {it} {ix} {j}\n"));
                out.push_str(&format_matrix(&f.site(it, ix)[j]));
            }
        }
    }
    out
}

pub fn parse_triple_field(text: &str) -> Result<TripleField> {
    let mut lines = text.lines().peekable();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty snapshot".into()))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 6 || parts[0] != "lattice" {
        return Err(Error::Parse(format!("bad snapshot header `{header}`")));
    }
    let nt: usize = parts[1].parse().map_err(|_| Error::Parse("bad nt".into()))?;
    let nx: usize = parts[2].parse().map_err(|_| Error::Parse("bad nx".into()))?;
    let dt: f64 = parts[3].parse().map_err(|_| Error::Parse("bad dt".into()))?;
    let dx: f64 = parts[4].parse().map_err(|_| Error::Parse("bad dx".into()))?;
    let n: usize = parts[5].parse().map_err(|_| Error::Parse("bad N".into()))?;
    let lat = Lattice::new(nt, nx, dt, dx)?;
    let mut sites: Vec<[CMatrix; 3]> = Vec::with_capacity(lat.n_sites());
    let mut current: Vec<CMatrix> = Vec::new();
    while let Some(line) = lines.next() {
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 4 || parts[0] != "site" {
            return Err(Error::Parse(format!("expected site line, got `{line}`")));
        }
        let dims = lines
            .next()
            .ok_or_else(|| Error::Parse("missing matrix header".into()))?;
        let dparts: Vec<&str> = dims.split_whitespace().collect();
        if dparts.len() != 3 || dparts[0] != "dims" {
            return Err(Error::Parse(format!("bad matrix header `{dims}`")));
        }
        let rows: usize = dparts[1].parse().map_err(|_| Error::Parse("bad rows".into()))?;
        let mut text = format!("{dims}\n");
        for _ in 0..rows {
            let row = lines
                .next()
                .ok_or_else(|| Error::Parse("truncated matrix".into()))?;
            text.push_str(row);
            text.push('\n');
        }
        current.push(parse_matrix(&text)?);
        if current.len() == 3 {
            let three: Vec<CMatrix> = current.drain(..).collect();
            sites.push(
                three
                    .try_into()
                    .map_err(|_| Error::Parse("triple pack".into()))?,
            );
        }
    }
    if sites.len() != lat.n_sites() || !current.is_empty() {
        return Err(Error::Parse(format!(
            "expected {} sites, found {}",
            lat.n_sites(),
            sites.len()
        )));
    }
    for site in &sites {
        for m in site {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::Parse("matrix dimension differs from header".into()));
            }
        }
    }
    Ok(TripleField { lat, n, sites })
}

/// Pairwise convergence orders log2(e_i / e_{i+1}) for a refinement sequence
/// where each level halves the spacing.
pub fn convergence_orders(errors: &[f64]) -> Vec<f64> {
    errors
        .windows(2)
        .map(|w| (w[0] / w[1]).log2())
        .collect()
}
