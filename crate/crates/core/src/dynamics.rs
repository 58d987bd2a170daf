//! Leapfrog evolution of type-I fields as a matrix-valued wave equation,
//! conserved-charge monitoring, and the divergence identities behind the
//! conservation laws.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{
    analytic_box_ansatz, analytic_derivatives_ansatz, ansatz_field, HarmonicScalar, Lattice,
    TripleField,
};
use crate::matrix::{epsilon, fro_norm, herm_deviation, max_abs, scale, CMatrix, C_I};
use crate::superop::omega_apply;
use crate::triple::QubitTriple;

pub type Slice = Vec<[CMatrix; 3]>;

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub nx: usize,
    pub dt: f64,
    pub dx: f64,
    pub mu: f64,
    /// time-indexed slices, slices[0] and slices[1] are the initial data
    pub slices: Vec<Slice>,
}

impl Trajectory {
    /// Centered time derivative at step n (1 <= n <= len-2).
    pub fn time_derivative(&self, n: usize) -> Result<Slice> {
        if n == 0 || n + 1 >= self.slices.len() {
            return Err(Error::IndexOutOfRange(format!(
                "no centered derivative at step {n}"
            )));
        }
        Ok((0..self.nx)
            .map(|ix| {
                std::array::from_fn(|j| {
                    (&self.slices[n + 1][ix][j] - &self.slices[n - 1][ix][j])
                        .map(|z| z / (2.0 * self.dt))
                })
            })
            .collect())
    }

    /// Worst Hermiticity deviation over all slices.
    pub fn max_herm_deviation(&self) -> f64 {
        self.slices
            .par_iter()
            .map(|s| {
                s.iter()
                    .flat_map(|t| t.iter())
                    .map(herm_deviation)
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Worst Pauli-algebra residual on a slice (measured, not asserted: the
    /// wave flow does not preserve the algebra for generic data).
    pub fn algebra_drift(&self, n: usize) -> f64 {
        self.slices[n]
            .par_iter()
            .map(|q| {
                QubitTriple::from_matrices(q.clone())
                    .map(|t| t.verify(f64::INFINITY).algebra_residual)
                    .unwrap_or(f64::INFINITY)
            })
            .reduce(|| 0.0, f64::max)
    }
}

fn check_slice(s: &Slice, nx: usize) -> Result<usize> {
    if s.len() != nx {
        return Err(Error::DimensionMismatch(format!(
            "slice length {} vs nx {nx}",
            s.len()
        )));
    }
    let n = s[0][0].nrows();
    for t in s {
        for m in t {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::DimensionMismatch("ragged slice".into()));
            }
            crate::matrix::ensure_hermitian(m, 1e-10)?;
        }
    }
    Ok(n)
}

/// Leapfrog integration of (box + mu) q_j = 0:
/// q^{n+1} = 2 q^n - q^{n-1} + dt^2 (d_x^2 q^n - mu q^n), periodic in x.
/// Each step is a real linear combination of Hermitian matrices, so
/// Hermiticity is preserved exactly.
pub fn evolve_type1(
    nx: usize,
    dt: f64,
    dx: f64,
    q_prev: Slice,
    q_curr: Slice,
    mu: f64,
    steps: usize,
) -> Result<Trajectory> {
    if dt > dx * (1.0 + 1e-12) {
        return Err(Error::CflViolation { dt, dx });
    }
    check_slice(&q_prev, nx)?;
    check_slice(&q_curr, nx)?;
    let mut slices = Vec::with_capacity(steps + 2);
    slices.push(q_prev);
    slices.push(q_curr);
    let dt2 = dt * dt;
    let dx2 = dx * dx;
    for _ in 0..steps {
        let n = slices.len();
        let (prev, curr) = (&slices[n - 2], &slices[n - 1]);
        let next: Slice = (0..nx)
            .into_par_iter()
            .map(|ix| {
                let xp = (ix + 1) % nx;
                let xm = (ix + nx - 1) % nx;
                std::array::from_fn(|j| {
                    let lap = (&curr[xp][j] + &curr[xm][j] - curr[ix][j].map(|z| z * 2.0))
                        .map(|z| z / dx2);
                    curr[ix][j].map(|z| z * 2.0) - &prev[ix][j]
                        + (lap - curr[ix][j].map(|z| z * mu)).map(|z| z * dt2)
                })
            })
            .collect();
        slices.push(next);
    }
    Ok(Trajectory {
        nx,
        dt,
        dx,
        mu,
        slices,
    })
}

/// The conserved slice observable
/// E = (i/8) sum_x dx (q_j qdot^j - qdot_j q^j); Hermitian by construction.
pub fn energy_charge(q: &Slice, qdot: &Slice, dx: f64) -> Result<CMatrix> {
    if q.len() != qdot.len() || q.is_empty() {
        return Err(Error::DimensionMismatch("energy_charge slices".into()));
    }
    let n = q[0][0].nrows();
    let mut acc = CMatrix::zeros(n, n);
    for (qs, ds) in q.iter().zip(qdot.iter()) {
        for j in 0..3 {
            acc += &qs[j] * &ds[j] - &ds[j] * &qs[j];
        }
    }
    Ok(scale(&acc, C_I * (dx / 8.0)))
}

#[derive(Debug, Clone)]
pub struct Type7Charge {
    pub via_omega2: [CMatrix; 3],
    pub via_omega5: [CMatrix; 3],
    /// max entry difference between the two forms
    pub difference: f64,
}

/// The slice integrals sum_x dx Omega^(2)(qdot) and sum_x dx Omega^(5)(qdot)
/// with the super-operators taken at each site's own triple.
pub fn type7_charge(q: &Slice, qdot: &Slice, dx: f64) -> Result<Type7Charge> {
    if q.len() != qdot.len() || q.is_empty() {
        return Err(Error::DimensionMismatch("type7_charge slices".into()));
    }
    let n = q[0][0].nrows();
    let zero: [CMatrix; 3] = std::array::from_fn(|_| CMatrix::zeros(n, n));
    let mut via2 = zero.clone();
    let mut via5 = zero;
    for (qs, ds) in q.iter().zip(qdot.iter()) {
        let t = QubitTriple::from_matrices(qs.clone())?;
        let o2 = omega_apply(2, &t, ds)?;
        let o5 = omega_apply(5, &t, ds)?;
        for j in 0..3 {
            via2[j] += scale(&o2[j], Complex64::new(dx, 0.0));
            via5[j] += scale(&o5[j], Complex64::new(dx, 0.0));
        }
    }
    let difference = (0..3)
        .map(|j| max_abs(&(&via2[j] - &via5[j])))
        .fold(0.0, f64::max);
    Ok(Type7Charge {
        via_omega2: via2,
        via_omega5: via5,
        difference,
    })
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct DivergenceResiduals {
    /// (q_{j;mu} q^j)^{;mu} - 1/2 (box q_j q^j - q^j box q_j)
    pub first: f64,
    /// (eps^{jkl} q_j q_{k;mu} q_l)^{;mu}
    pub second: f64,
}

/// Evaluates both divergence identities on supplied field data. The
/// divergences are taken by central differences over the lattice, with the
/// per-site currents built from the supplied derivative fields.
pub fn divergence_identity_check(
    q: &TripleField,
    qt: &TripleField,
    qx: &TripleField,
    boxq: &TripleField,
) -> DivergenceResiduals {
    let lat = q.lat;
    let n = q.n;
    let current = |sites: &dyn Fn(usize, usize) -> CMatrix| -> Vec<CMatrix> {
        (0..lat.n_sites())
            .map(|s| sites(s / lat.nx, s % lat.nx))
            .collect()
    };
    let f_t = current(&|it, ix| {
        let mut m = CMatrix::zeros(n, n);
        for j in 0..3 {
            m += &qt.site(it, ix)[j] * &q.site(it, ix)[j];
        }
        m
    });
    let f_x = current(&|it, ix| {
        let mut m = CMatrix::zeros(n, n);
        for j in 0..3 {
            m += &qx.site(it, ix)[j] * &q.site(it, ix)[j];
        }
        m
    });
    let e_current = |d: &TripleField| {
        current(&|it, ix| {
            let mut m = CMatrix::zeros(n, n);
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let w = epsilon(j, k, l);
                        if w != 0.0 {
                            m += scale(
                                &(&q.site(it, ix)[j] * &d.site(it, ix)[k] * &q.site(it, ix)[l]),
                                Complex64::new(w, 0.0),
                            );
                        }
                    }
                }
            }
            m
        })
    };
    let e_t = e_current(qt);
    let e_x = e_current(qx);
    // divergence with upper index in the (+,-) signature:
    // V^mu_{;mu} = d_t V_t - d_x V_x
    let div = |vt: &[CMatrix], vx: &[CMatrix], it: usize, ix: usize| -> CMatrix {
        let dtp = &vt[lat.idx(it + 1, ix)];
        let dtm = &vt[lat.idx(it - 1, ix)];
        let dxp = &vx[lat.idx(it, lat.xp(ix))];
        let dxm = &vx[lat.idx(it, lat.xm(ix))];
        (dtp - dtm).map(|z| z / (2.0 * lat.dt)) - (dxp - dxm).map(|z| z / (2.0 * lat.dx))
    };
    let mut first: f64 = 0.0;
    let mut second: f64 = 0.0;
    for it in 1..lat.nt - 1 {
        for ix in 0..lat.nx {
            let d1 = div(&f_t, &f_x, it, ix);
            let mut rhs = CMatrix::zeros(n, n);
            for j in 0..3 {
                rhs += &boxq.site(it, ix)[j] * &q.site(it, ix)[j]
                    - &q.site(it, ix)[j] * &boxq.site(it, ix)[j];
            }
            first = first.max(max_abs(&(d1 - rhs.map(|z| z * 0.5))));
            second = second.max(max_abs(&div(&e_t, &e_x, it, ix)));
        }
    }
    DivergenceResiduals { first, second }
}

/// Evolves the ansatz field of a right-moving scalar (an exact solution of
/// box q = 0) and reports the relative drift of the conserved charge over the
/// run, plus the worst deviation from the exact solution.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ConservationRun {
    pub nx: usize,
    pub steps: usize,
    pub charge_norm: f64,
    pub relative_drift: f64,
    pub solution_error: f64,
    pub type7_difference: f64,
    pub algebra_drift: f64,
}

pub fn conservation_run(nx: usize, steps: usize, hs: &HarmonicScalar) -> Result<ConservationRun> {
    let dx = hs.length / nx as f64;
    let dt = dx / 2.0;
    // sample the exact solution on a lattice long enough for the run
    let nt = steps + 2;
    let lat = Lattice::new(nt, nx, dt, dx)?;
    let phi = hs.sample(&lat)?;
    let exact = ansatz_field(&lat, &phi);
    let slice_at = |it: usize| -> Slice { (0..nx).map(|ix| exact.site(it, ix).clone()).collect() };
    let traj = evolve_type1(nx, dt, dx, slice_at(0), slice_at(1), 0.0, steps)?;
    let mut charge0 = None;
    let mut drift: f64 = 0.0;
    let mut t7diff: f64 = 0.0;
    for n in (1..traj.slices.len() - 1).step_by((steps / 16).max(1)) {
        let qd = traj.time_derivative(n)?;
        let e = energy_charge(&traj.slices[n], &qd, dx)?;
        let t7 = type7_charge(&traj.slices[n], &qd, dx)?;
        t7diff = t7diff.max(t7.difference);
        match &charge0 {
            None => charge0 = Some(e),
            Some(e0) => {
                let denom = fro_norm(e0).max(1e-300);
                drift = drift.max(fro_norm(&(&e - e0)) / denom);
            }
        }
    }
    let charge_norm = charge0.as_ref().map(fro_norm).unwrap_or(0.0);
    let mut solution_error: f64 = 0.0;
    for (n, s) in traj.slices.iter().enumerate() {
        for (ix, t) in s.iter().enumerate() {
            for j in 0..3 {
                solution_error = solution_error.max(max_abs(&(&t[j] - &exact.site(n, ix)[j])));
            }
        }
    }
    let algebra_drift = traj.algebra_drift(traj.slices.len() - 1);
    Ok(ConservationRun {
        nx,
        steps,
        charge_norm,
        relative_drift: drift,
        solution_error,
        type7_difference: t7diff,
        algebra_drift,
    })
}

/// A generic matrix-valued d'Alembert solution
/// q_j(t,x) = B_j cos(k(x-t) + p_j) + C_j cos(k(x-t) + r_j)
///          + D_j cos(k(x+t) + s_j)
/// with random Hermitian B_j, C_j, D_j. The two co-moving components with a
/// phase offset make the conserved charge generically nonzero: their
/// commutator contributes a constant k sin(r_j - p_j) [B_j, C_j] to the
/// charge integrand, while counter-moving cross terms integrate to zero
/// (as does the whole integrand of the swap ansatz).
pub struct MatrixWave {
    pub length: f64,
    b: [CMatrix; 3],
    c: [CMatrix; 3],
    d: [CMatrix; 3],
    p: [f64; 3],
    r: [f64; 3],
    s: [f64; 3],
}

impl MatrixWave {
    pub fn random(n: usize, length: f64, seed: u64) -> Self {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let b = std::array::from_fn(|_| crate::matrix::random_hermitian(n, &mut rng));
        let c = std::array::from_fn(|_| crate::matrix::random_hermitian(n, &mut rng));
        let d = std::array::from_fn(|_| crate::matrix::random_hermitian(n, &mut rng));
        let p = std::array::from_fn(|_| rng.random_range(0.0..std::f64::consts::TAU));
        let r = std::array::from_fn(|_| rng.random_range(0.0..std::f64::consts::TAU));
        let s = std::array::from_fn(|_| rng.random_range(0.0..std::f64::consts::TAU));
        Self {
            length,
            b,
            c,
            d,
            p,
            r,
            s,
        }
    }

    pub fn at(&self, t: f64, x: f64) -> [CMatrix; 3] {
        let k = 2.0 * std::f64::consts::PI / self.length;
        std::array::from_fn(|j| {
            self.b[j].map(|z| z * (k * (x - t) + self.p[j]).cos())
                + self.c[j].map(|z| z * (k * (x - t) + self.r[j]).cos())
                + self.d[j].map(|z| z * (k * (x + t) + self.s[j]).cos())
        })
    }

    pub fn dt_at(&self, t: f64, x: f64) -> [CMatrix; 3] {
        let k = 2.0 * std::f64::consts::PI / self.length;
        std::array::from_fn(|j| {
            self.b[j].map(|z| z * k * (k * (x - t) + self.p[j]).sin())
                + self.c[j].map(|z| z * k * (k * (x - t) + self.r[j]).sin())
                - self.d[j].map(|z| z * k * (k * (x + t) + self.s[j]).sin())
        })
    }

    pub fn slice(&self, nx: usize, t: f64) -> Slice {
        let dx = self.length / nx as f64;
        (0..nx).map(|ix| self.at(t, ix as f64 * dx)).collect()
    }

    pub fn dt_slice(&self, nx: usize, t: f64) -> Slice {
        let dx = self.length / nx as f64;
        (0..nx).map(|ix| self.dt_at(t, ix as f64 * dx)).collect()
    }

    /// The continuum conserved charge. For a trigonometric integrand the
    /// periodic trapezoid rule is exact, so any nx above the bandwidth gives
    /// the integral to machine precision.
    pub fn exact_charge(&self, nx: usize) -> Result<CMatrix> {
        energy_charge(
            &self.slice(nx, 0.0),
            &self.dt_slice(nx, 0.0),
            self.length / nx as f64,
        )
    }
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct WaveRun {
    pub nx: usize,
    pub steps: usize,
    pub charge_norm: f64,
    /// max relative change of the discrete charge over the run; the centered
    /// commutator charge is a bilinear invariant of the leapfrog update, so
    /// this sits at machine precision
    pub relative_drift: f64,
    /// max relative deviation of the discrete charge from the continuum
    /// charge of the exact solution; O(dt^2)
    pub charge_error: f64,
    pub solution_error: f64,
}

/// Evolves a random matrix wave and measures conserved-charge drift and the
/// deviation from the closed-form solution.
pub fn wave_conservation_run(
    nx: usize,
    steps: usize,
    length: f64,
    seed: u64,
) -> Result<WaveRun> {
    let wave = MatrixWave::random(4, length, seed);
    let dx = length / nx as f64;
    let dt = dx / 2.0;
    let traj = evolve_type1(
        nx,
        dt,
        dx,
        wave.slice(nx, 0.0),
        wave.slice(nx, dt),
        0.0,
        steps,
    )?;
    let exact_charge = wave.exact_charge(nx)?;
    let exact_norm = fro_norm(&exact_charge).max(1e-300);
    let mut charge0: Option<CMatrix> = None;
    let mut drift: f64 = 0.0;
    let mut charge_error: f64 = 0.0;
    for n in (1..traj.slices.len() - 1).step_by((steps / 16).max(1)) {
        let qd = traj.time_derivative(n)?;
        let e = energy_charge(&traj.slices[n], &qd, dx)?;
        charge_error = charge_error.max(fro_norm(&(&e - &exact_charge)) / exact_norm);
        match &charge0 {
            None => charge0 = Some(e),
            Some(e0) => {
                drift = drift.max(fro_norm(&(&e - e0)) / fro_norm(e0).max(1e-300));
            }
        }
    }
    let mut solution_error: f64 = 0.0;
    for (n, s) in traj.slices.iter().enumerate() {
        let exact = wave.slice(nx, n as f64 * dt);
        for (a, b) in s.iter().zip(exact.iter()) {
            for j in 0..3 {
                solution_error = solution_error.max(max_abs(&(&a[j] - &b[j])));
            }
        }
    }
    Ok(WaveRun {
        nx,
        steps,
        charge_norm: charge0.as_ref().map(fro_norm).unwrap_or(0.0),
        relative_drift: drift,
        charge_error,
        solution_error,
    })
}

/// Runs forward `steps`, then backward from the last two slices, and returns
/// the worst deviation from the initial data.
pub fn time_reversal_error(
    nx: usize,
    dt: f64,
    dx: f64,
    q_prev: Slice,
    q_curr: Slice,
    mu: f64,
    steps: usize,
) -> Result<f64> {
    let fwd = evolve_type1(nx, dt, dx, q_prev.clone(), q_curr.clone(), mu, steps)?;
    let m = fwd.slices.len();
    let back = evolve_type1(
        nx,
        dt,
        dx,
        fwd.slices[m - 1].clone(),
        fwd.slices[m - 2].clone(),
        mu,
        steps,
    )?;
    let final_slices = &back.slices[back.slices.len() - 2..];
    let mut worst: f64 = 0.0;
    for (a, b) in final_slices[1].iter().zip(q_prev.iter()) {
        for j in 0..3 {
            worst = worst.max(max_abs(&(&a[j] - &b[j])));
        }
    }
    for (a, b) in final_slices[0].iter().zip(q_curr.iter()) {
        for j in 0..3 {
            worst = worst.max(max_abs(&(&a[j] - &b[j])));
        }
    }
    Ok(worst)
}

/// Assembles the analytic field data for a harmonic scalar on a lattice:
/// the ansatz field, its exact derivatives and exact wave operator.
pub fn ansatz_bundle(
    lat: &Lattice,
    hs: &HarmonicScalar,
) -> Result<(TripleField, TripleField, TripleField, TripleField)> {
    let phi = hs.sample(lat)?;
    let q = ansatz_field(lat, &phi);
    let (qt, qx) = analytic_derivatives_ansatz(lat, hs);
    let boxq = analytic_box_ansatz(lat, hs);
    Ok((q, qt, qx, boxq))
}
