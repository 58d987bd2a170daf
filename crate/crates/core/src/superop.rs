//! The six super-operators Omega^(0)..Omega^(5) acting on indexed operator
//! triples, the commutant projector, the swap super-operator and its real
//! powers, monoid composition, structure constants and inverses.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::{
    epsilon, fro_norm, identity, kron, max_abs, pauli, random_hermitian, scale, CMatrix, C_I,
};
use crate::triple::QubitTriple;

/// Action of each Omega^(alpha) on the triple (q1,q2,q3) itself:
/// Omega^(alpha) q_j = EQ21_COEFFS[alpha] * q_j.
pub const EQ21_COEFFS: [f64; 6] = [1.0, -1.0, 0.0, -4.0, 6.0, 0.0];

/// Commutant projector: (1/4)(A + q_j A q^j). The result commutes with all
/// three q_j.
pub fn project_commutant(t: &QubitTriple, a: &CMatrix) -> Result<CMatrix> {
    let n = t.dim();
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::DimensionMismatch("project_commutant operand".into()));
    }
    let mut out = a.clone();
    for j in 0..3 {
        out += t.q(j) * a * t.q(j);
    }
    Ok(out.map(|z| z * 0.25))
}

/// Applies Omega^(alpha) to an indexed triple of operators.
pub fn omega_apply(alpha: usize, t: &QubitTriple, a: &[CMatrix; 3]) -> Result<[CMatrix; 3]> {
    let n = t.dim();
    for m in a {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch("omega_apply operand".into()));
        }
    }
    if alpha > 5 {
        return Err(Error::IndexOutOfRange(format!("alpha {alpha} not in 0..=5")));
    }
    let mut out = [
        CMatrix::zeros(n, n),
        CMatrix::zeros(n, n),
        CMatrix::zeros(n, n),
    ];
    for (j, out_j) in out.iter_mut().enumerate() {
        match alpha {
            0 => *out_j = a[j].clone(),
            1 => {
                for k in 0..3 {
                    *out_j += t.q(k) * &a[j] * t.q(k);
                }
            }
            2 | 3 => {
                for k in 0..3 {
                    for l in 0..3 {
                        let e = epsilon(j, k, l);
                        if e == 0.0 {
                            continue;
                        }
                        let qa = t.q(k) * &a[l];
                        let aq = &a[l] * t.q(k);
                        if alpha == 2 {
                            *out_j += scale(&(qa + aq), Complex64::new(e, 0.0));
                        } else {
                            *out_j += scale(&(qa - aq), C_I * e);
                        }
                    }
                }
            }
            4 => {
                for k in 0..3 {
                    *out_j += t.q(k) * &a[k] * t.q(j) + t.q(j) * &a[k] * t.q(k);
                }
            }
            5 => {
                for k in 0..3 {
                    *out_j += scale(&(t.q(k) * &a[k] * t.q(j) - t.q(j) * &a[k] * t.q(k)), C_I);
                }
            }
            _ => unreachable!(),
        }
    }
    Ok(out)
}

/// The coefficient c and residual of Omega^(alpha)(q1,q2,q3) = c (q1,q2,q3).
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct OmegaCoeff {
    pub coefficient: f64,
    pub residual: f64,
    pub proportional: bool,
}

/// Applies each Omega^(alpha) to the triple and fits the proportionality
/// coefficient by Hilbert-Schmidt projection.
pub fn omega_on_qtriple_table(t: &QubitTriple) -> Result<[OmegaCoeff; 6]> {
    let mut out = [OmegaCoeff {
        coefficient: 0.0,
        residual: 0.0,
        proportional: false,
    }; 6];
    let qnorm2: f64 = (0..3).map(|j| fro_norm(t.q(j)).powi(2)).sum();
    for (alpha, slot) in out.iter_mut().enumerate() {
        let r = omega_apply(alpha, t, t.components())?;
        let inner: f64 = (0..3)
            .map(|j| crate::matrix::hs_inner(t.q(j), &r[j]).re)
            .sum();
        let c = inner / qnorm2;
        let resid = (0..3)
            .map(|j| max_abs(&(&r[j] - scale(t.q(j), Complex64::new(c, 0.0)))))
            .fold(0.0, f64::max);
        *slot = OmegaCoeff {
            coefficient: c,
            residual: resid,
            proportional: resid < 1e-9 * t.dim() as f64,
        };
    }
    Ok(out)
}

/// The 2-dimensional obstruction. At N = 2 the commutant of the triple
/// collapses to multiples of the unit, where Omega^(1) = 4 Pi - 1 acts as
/// multiplication by +3; on the triple itself Omega^(1) acts as -1. The two
/// coefficients cannot agree, which is the no-go for 2-dimensional fields.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct DimensionObstruction {
    /// Omega^(1) coefficient measured on the triple (q1,q2,q3); -1 at all N.
    pub coeff_on_triple: f64,
    /// Omega^(1) coefficient measured on the commutant (here on the unit
    /// operator); +3 at all N, and at N = 2 the commutant is ONLY the unit.
    pub coeff_on_unit: f64,
    /// Hilbert-Schmidt dimension of the commutant range, (N/2)^2.
    pub commutant_dim: usize,
    /// True when the commutant is trivial (N = 2), so the two coefficients
    /// would have to coincide for a field of this dimension to exist.
    pub degenerate: bool,
}

pub fn dimension_obstruction(t: &QubitTriple) -> Result<DimensionObstruction> {
    let table = omega_on_qtriple_table(t)?;
    let n = t.dim();
    let id = identity(n);
    let unit = [id.clone(), id.clone(), id.clone()];
    let r = omega_apply(1, t, &unit)?;
    let coeff_on_unit = r[0][(0, 0)].re;
    Ok(DimensionObstruction {
        coeff_on_triple: table[1].coefficient,
        coeff_on_unit,
        commutant_dim: (n / 2) * (n / 2),
        degenerate: n == 2,
    })
}

/// Explicit (3N^2) x (3N^2) matrix realization of a super-operator over
/// vectorized operator triples. Used as the oracle route for composition.
#[derive(Debug, Clone)]
pub struct TripleMap {
    pub m: CMatrix,
    pub dim: usize,
}

impl TripleMap {
    pub fn from_omega(alpha: usize, t: &QubitTriple) -> Result<Self> {
        let n = t.dim();
        let d = 3 * n * n;
        let mut m = CMatrix::zeros(d, d);
        for col in 0..d {
            let comp = col / (n * n);
            let idx = col % (n * n);
            let mut basis = [
                CMatrix::zeros(n, n),
                CMatrix::zeros(n, n),
                CMatrix::zeros(n, n),
            ];
            // vectorization is row-major within each component
            basis[comp][(idx / n, idx % n)] = Complex64::new(1.0, 0.0);
            let img = omega_apply(alpha, t, &basis)?;
            for (comp_o, img_c) in img.iter().enumerate() {
                for r in 0..n {
                    for c in 0..n {
                        m[(comp_o * n * n + r * n + c, col)] = img_c[(r, c)];
                    }
                }
            }
        }
        Ok(Self { m, dim: n })
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self {
            m: &self.m * &other.m,
            dim: self.dim,
        }
    }

    pub fn apply(&self, a: &[CMatrix; 3]) -> [CMatrix; 3] {
        let n = self.dim;
        let mut v = DVector::zeros(3 * n * n);
        for (comp, a_c) in a.iter().enumerate() {
            for r in 0..n {
                for c in 0..n {
                    v[comp * n * n + r * n + c] = a_c[(r, c)];
                }
            }
        }
        let w = &self.m * v;
        let mut out = [
            CMatrix::zeros(n, n),
            CMatrix::zeros(n, n),
            CMatrix::zeros(n, n),
        ];
        for (comp, out_c) in out.iter_mut().enumerate() {
            for r in 0..n {
                for c in 0..n {
                    out_c[(r, c)] = w[comp * n * n + r * n + c];
                }
            }
        }
        out
    }
}

/// The 6x6x6 integer tensor of monoid composition,
/// `Omega^(alpha) o Omega^(beta) = c^{alpha beta}_gamma Omega^(gamma)`
/// (beta applied first).
#[derive(Debug, Clone, serde::Serialize)]
pub struct StructureConstants {
    pub c: [[[i64; 6]; 6]; 6],
    /// Largest expansion residual across all 36 compositions.
    pub max_residual: f64,
    /// Largest distance of any raw coefficient from the nearest integer.
    pub max_integer_distance: f64,
}

/// Table 1 as printed, indexed `[alpha][beta]` where alpha is the column and
/// beta the row of the printed table.
pub const TABLE1_PRINTED: [[[i64; 6]; 6]; 6] = [
    [
        [1, 0, 0, 0, 0, 0],
        [0, 1, 0, 0, 0, 0],
        [0, 0, 1, 0, 0, 0],
        [0, 0, 0, 1, 0, 0],
        [0, 0, 0, 0, 1, 0],
        [0, 0, 0, 0, 0, 1],
    ],
    [
        [0, 1, 0, 0, 0, 0],
        [3, 2, 0, 0, 0, 0],
        [0, 0, 1, 0, 0, 2],
        [0, 0, 0, -1, 0, 0],
        [2, 2, 0, 0, -1, 0],
        [0, 0, 2, 0, 0, 1],
    ],
    [
        [0, 0, 1, 0, 0, 0],
        [0, 0, 1, 0, 0, -2],
        [-4, -2, 0, 1, 1, 0],
        [0, 0, -1, 0, 0, -1],
        [0, 0, -1, 0, 0, -3],
        [0, 2, 0, 1, 1, 0],
    ],
    [
        [0, 0, 0, 1, 0, 0],
        [0, 0, 0, -1, 0, 0],
        [0, 0, -1, 0, 0, 1],
        [4, -2, 0, -1, 1, 0],
        [0, 2, 0, 1, -3, 0],
        [0, 0, 1, 0, 0, -1],
    ],
    [
        [0, 0, 0, 0, 1, 0],
        [2, 2, 0, 0, -1, 0],
        [0, 0, -1, 0, 0, 3],
        [0, 2, 0, 1, -3, 0],
        [8, -2, 0, -5, 1, 0],
        [0, 0, 3, 0, 0, -1],
    ],
    [
        [0, 0, 0, 0, 0, 1],
        [0, 0, -2, 0, 0, 1],
        [0, -2, 0, -1, -1, 0],
        [0, 0, -1, 0, 0, -1],
        [0, 0, -3, 0, 0, -1],
        [4, 2, 0, -1, -1, 0],
    ],
];

fn flatten_triple(a: &[CMatrix; 3]) -> Vec<Complex64> {
    a.iter().flat_map(|m| m.iter().copied()).collect()
}

/// Expands every pairwise composition of the six super-operators in the
/// six-element basis by least squares over a spanning set of random Gaussian
/// Hermitian triples, then rounds to integers.
///
/// The composition order convention is `c[alpha][beta]` = coefficients of
/// `Omega^(alpha) o Omega^(beta)` with beta applied first; this is the
/// convention under which the printed composition table reproduces (see
/// [`table1_comparison`]).
pub fn extract_structure_constants(t: &QubitTriple, seed: u64) -> Result<StructureConstants> {
    let n = t.dim();
    if n < 4 {
        return Err(Error::BasisDegeneracy(
            "structure-constant extraction requires N >= 4; \
             the N = 2 commutant is trivial"
                .into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    const SAMPLES: usize = 40;
    let samples: Vec<[CMatrix; 3]> = (0..SAMPLES)
        .map(|_| {
            [
                random_hermitian(n, &mut rng),
                random_hermitian(n, &mut rng),
                random_hermitian(n, &mut rng),
            ]
        })
        .collect();

    // images of each basis map over all samples, flattened end-to-end
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(6);
    for alpha in 0..6 {
        let mut v = Vec::new();
        for s in &samples {
            v.extend(flatten_triple(&omega_apply(alpha, t, s)?));
        }
        basis.push(v);
    }
    let inner = |x: &[Complex64], y: &[Complex64]| -> f64 {
        x.iter().zip(y).map(|(a, b)| (a.conj() * b).re).sum()
    };
    let gram = DMatrix::<f64>::from_fn(6, 6, |i, j| inner(&basis[i], &basis[j]));
    let svd = gram.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin < 1e-10 * smax {
        return Err(Error::BasisDegeneracy(format!(
            "six maps not independent over the sample set (sigma_min/sigma_max = {:.3e})",
            smin / smax
        )));
    }
    let gram_lu = gram.lu();

    let mut c = [[[0i64; 6]; 6]; 6];
    let mut max_residual: f64 = 0.0;
    let mut max_int_dist: f64 = 0.0;
    for alpha in 0..6 {
        for beta in 0..6 {
            let mut w = Vec::new();
            for s in &samples {
                let inner_img = omega_apply(beta, t, s)?;
                w.extend(flatten_triple(&omega_apply(alpha, t, &inner_img)?));
            }
            let rhs = DVector::<f64>::from_fn(6, |g, _| inner(&basis[g], &w));
            let coef = gram_lu
                .solve(&rhs)
                .ok_or_else(|| Error::BasisDegeneracy("gram solve failed".into()))?;
            // residual of the expansion
            let mut diff2 = 0.0;
            let mut norm2 = 0.0;
            for (idx, wv) in w.iter().enumerate() {
                let fit: Complex64 = (0..6).map(|g| basis[g][idx] * coef[g]).sum();
                diff2 += (wv - fit).norm_sqr();
                norm2 += wv.norm_sqr();
            }
            let resid = (diff2 / norm2.max(1.0)).sqrt();
            max_residual = max_residual.max(resid);
            if resid > 1e-9 {
                return Err(Error::BasisDegeneracy(format!(
                    "composition ({alpha},{beta}) leaves the span (residual {resid:.3e})"
                )));
            }
            for g in 0..6 {
                let rounded = coef[g].round();
                let dist = (coef[g] - rounded).abs();
                max_int_dist = max_int_dist.max(dist);
                if dist > 1e-6 {
                    return Err(Error::NonIntegerCoefficient {
                        value: coef[g],
                        distance: dist,
                    });
                }
                c[alpha][beta][g] = rounded as i64;
            }
        }
    }
    Ok(StructureConstants {
        c,
        max_residual,
        max_integer_distance: max_int_dist,
    })
}

/// Per-cell verdicts of the computed constants against the printed table,
/// for both possible readings of the printed table's header.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Table1Comparison {
    /// cell(col alpha, row beta) read as Omega^(alpha) o Omega^(beta)
    pub agree_alpha_after_beta: [[bool; 6]; 6],
    pub matches_alpha_after_beta: usize,
    /// cell(col alpha, row beta) read as Omega^(beta) o Omega^(alpha)
    pub matches_beta_after_alpha: usize,
    /// the reading with the most matches
    pub detected_convention: String,
}

pub fn table1_comparison(sc: &StructureConstants) -> Table1Comparison {
    let mut agree = [[false; 6]; 6];
    let mut m1 = 0;
    let mut m2 = 0;
    for a in 0..6 {
        for b in 0..6 {
            let cell = &TABLE1_PRINTED[a][b];
            if &sc.c[a][b] == cell {
                agree[a][b] = true;
                m1 += 1;
            }
            if &sc.c[b][a] == cell {
                m2 += 1;
            }
        }
    }
    let detected = if m1 >= m2 {
        "cell(col alpha, row beta) = Omega^(alpha) o Omega^(beta), beta applied first"
    } else {
        "cell(col alpha, row beta) = Omega^(beta) o Omega^(alpha), alpha applied first"
    };
    Table1Comparison {
        agree_alpha_after_beta: agree,
        matches_alpha_after_beta: m1,
        matches_beta_after_alpha: m2,
        detected_convention: detected.to_string(),
    }
}

/// Exact associativity of the composition tensor:
/// c^{ab}_d c^{dg}_e = c^{bg}_d c^{ad}_e for all a,b,g,e.
pub fn check_associativity(sc: &StructureConstants) -> bool {
    for a in 0..6 {
        for b in 0..6 {
            for g in 0..6 {
                for e in 0..6 {
                    let lhs: i64 = (0..6).map(|d| sc.c[a][b][d] * sc.c[d][g][e]).sum();
                    let rhs: i64 = (0..6).map(|d| sc.c[b][g][d] * sc.c[a][d][e]).sum();
                    if lhs != rhs {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Composition in coefficient space: (lambda o mu)_gamma =
/// lambda_alpha mu_beta c^{alpha beta}_gamma.
pub fn compose_coeffs(sc: &StructureConstants, lambda: &[f64; 6], mu: &[f64; 6]) -> [f64; 6] {
    let mut out = [0.0; 6];
    for a in 0..6 {
        for b in 0..6 {
            let w = lambda[a] * mu[b];
            if w == 0.0 {
                continue;
            }
            for (g, out_g) in out.iter_mut().enumerate() {
                *out_g += w * sc.c[a][b][g] as f64;
            }
        }
    }
    out
}

#[derive(Debug, Clone, serde::Serialize)]
pub enum MonoidInverse {
    Inverse([f64; 6]),
    Singular { rank: usize },
}

/// Solves `lambda_alpha lambdabar_beta c^{alpha beta}_gamma = delta_gamma^0`
/// as a 6x6 linear system, or reports the rank of the composition matrix
/// when it is singular.
pub fn monoid_inverse(lambda: &[f64; 6], sc: &StructureConstants) -> MonoidInverse {
    // M[beta][gamma] = lambda_alpha c^{alpha beta}_gamma
    let m = DMatrix::<f64>::from_fn(6, 6, |beta, gamma| {
        (0..6).map(|a| lambda[a] * sc.c[a][beta][gamma] as f64).sum()
    });
    let scale: f64 = lambda.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    let svd = m.transpose().svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > 1e-9 * smax.max(scale))
        .count();
    if rank < 6 {
        return MonoidInverse::Singular { rank };
    }
    let rhs = DVector::<f64>::from_fn(6, |g, _| if g == 0 { 1.0 } else { 0.0 });
    match svd.solve(&rhs, 1e-12 * smax) {
        Ok(sol) => {
            let mut out = [0.0; 6];
            for (i, o) in out.iter_mut().enumerate() {
                *o = sol[i];
            }
            MonoidInverse::Inverse(out)
        }
        Err(_) => MonoidInverse::Singular { rank },
    }
}

/// The 4x4 swap matrix W = (1/2)(I (x) I + sigma_j (x) sigma^j).
pub fn swap_matrix() -> CMatrix {
    swap_power(1.0).w
}

/// Projector onto the -1 eigenspace of the swap (the singlet).
pub fn swap_minus_projector() -> CMatrix {
    (identity(4) - swap_matrix()).map(|z| z * 0.5)
}

/// W^phi together with the conjugation map A -> W^{-phi} A W^{phi}.
#[derive(Debug, Clone)]
pub struct SwapPower {
    pub w: CMatrix,
    pub phi: f64,
}

/// The phi-th power of the swap:
/// W^phi = (1/4)((3 + e^{i pi phi}) I (x) I + (1 - e^{i pi phi}) sigma_j (x) sigma^j).
pub fn swap_power(phi: f64) -> SwapPower {
    let e = Complex64::from_polar(1.0, std::f64::consts::PI * phi);
    let mut w = scale(&identity(4), (Complex64::new(3.0, 0.0) + e) * 0.25);
    for j in 1..=3 {
        let s = pauli(j).expect("pauli index");
        w += scale(&kron(&s, &s), (Complex64::new(1.0, 0.0) - e) * 0.25);
    }
    SwapPower { w, phi }
}

impl SwapPower {
    /// A -> W^{-phi} A W^{phi}; W is unitary so W^{-phi} = (W^{phi})^dag.
    pub fn conjugate(&self, a: &CMatrix) -> CMatrix {
        self.w.adjoint() * a * &self.w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{hs_inner, random_unitary};
    use rand::Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(1234)
    }

    #[test]
    fn commutant_projection_properties() {
        let mut rng = rng();
        for n in [4usize, 8] {
            let t = QubitTriple::embed(n).unwrap();
            // A = 1 -> 1
            let p = project_commutant(&t, &identity(n)).unwrap();
            assert!(max_abs(&(p - identity(n))) < 1e-13);
            // A = q1 -> 0
            let p = project_commutant(&t, t.q(0)).unwrap();
            assert!(max_abs(&p) < 1e-13);
            for _ in 0..10 {
                let a = random_hermitian(n, &mut rng);
                let pa = project_commutant(&t, &a).unwrap();
                // idempotent
                let ppa = project_commutant(&t, &pa).unwrap();
                assert!(max_abs(&(&ppa - &pa)) < 1e-12);
                // result commutes with all q_j
                for j in 0..3 {
                    assert!(max_abs(&crate::matrix::commutator(&pa, t.q(j)).unwrap()) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn commutant_projector_self_adjoint() {
        let mut rng = rng();
        let t = QubitTriple::embed(4).unwrap();
        for _ in 0..20 {
            let a = random_hermitian(4, &mut rng);
            let b = random_hermitian(4, &mut rng);
            let lhs = hs_inner(&project_commutant(&t, &a).unwrap(), &b);
            let rhs = hs_inner(&a, &project_commutant(&t, &b).unwrap());
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn omega1_is_four_pi_minus_one() {
        let mut rng = rng();
        for n in [4usize, 8] {
            let t = QubitTriple::embed(n).unwrap();
            for _ in 0..100 {
                let a = random_hermitian(n, &mut rng);
                let sandwich = omega_apply(1, &t, &[a.clone(), a.clone(), a.clone()]).unwrap();
                let pi = project_commutant(&t, &a).unwrap();
                let expect = pi.map(|z| z * 4.0) - &a;
                assert!(max_abs(&(&sandwich[0] - &expect)) < 1e-12);
            }
        }
    }

    #[test]
    fn eq21_table_all_dims() {
        for n in [4usize, 8] {
            let t = QubitTriple::embed(n).unwrap();
            let table = omega_on_qtriple_table(&t).unwrap();
            for (alpha, expect) in EQ21_COEFFS.iter().enumerate() {
                assert!(table[alpha].proportional, "N={n} alpha={alpha}");
                assert!(
                    (table[alpha].coefficient - expect).abs() < 1e-10,
                    "N={n} alpha={alpha}: {}",
                    table[alpha].coefficient
                );
            }
        }
    }

    #[test]
    fn dimension_two_obstruction() {
        let t = QubitTriple::embed(2).unwrap();
        let obs = dimension_obstruction(&t).unwrap();
        assert!((obs.coeff_on_triple - -1.0).abs() < 1e-12);
        assert!((obs.coeff_on_unit - 3.0).abs() < 1e-12);
        assert!(obs.degenerate);
        assert_eq!(obs.commutant_dim, 1);
        // extraction refuses N = 2
        assert!(extract_structure_constants(&t, 0).is_err());
    }

    #[test]
    fn omega_alpha_out_of_range() {
        let t = QubitTriple::embed(4).unwrap();
        let a = [identity(4), identity(4), identity(4)];
        assert!(omega_apply(6, &t, &a).is_err());
    }

    #[test]
    fn structure_constants_match_table1() {
        let t = QubitTriple::embed(4).unwrap();
        let sc = extract_structure_constants(&t, 0).unwrap();
        let cmp = table1_comparison(&sc);
        assert_eq!(cmp.matches_alpha_after_beta, 36);
        assert!(check_associativity(&sc));
        // unit element rows/columns
        for b in 0..6 {
            for g in 0..6 {
                assert_eq!(sc.c[0][b][g], i64::from(b == g));
                assert_eq!(sc.c[b][0][g], i64::from(b == g));
            }
        }
    }

    #[test]
    fn structure_constants_frame_and_dim_independent() {
        let mut rng = rng();
        let base = extract_structure_constants(&QubitTriple::embed(4).unwrap(), 0).unwrap();
        let t8 = QubitTriple::embed(8).unwrap();
        let sc8 = extract_structure_constants(&t8, 1).unwrap();
        assert_eq!(base.c, sc8.c);
        let u = random_unitary(4, &mut rng);
        let tc = QubitTriple::embed(4).unwrap().conjugated(&u).unwrap();
        let scc = extract_structure_constants(&tc, 2).unwrap();
        assert_eq!(base.c, scc.c);
    }

    #[test]
    fn triple_map_oracle_agrees_with_sample_expansion() {
        // brute-force route: explicit matrices, compose, expand over matrix
        // entries
        let t = QubitTriple::embed(4).unwrap();
        let sc = extract_structure_constants(&t, 0).unwrap();
        let maps: Vec<TripleMap> = (0..6)
            .map(|a| TripleMap::from_omega(a, &t).unwrap())
            .collect();
        for a in 0..6 {
            for b in 0..6 {
                let comp = maps[a].compose(&maps[b]);
                let mut fit = CMatrix::zeros(comp.m.nrows(), comp.m.ncols());
                for g in 0..6 {
                    fit += maps[g].m.map(|z| z * sc.c[a][b][g] as f64);
                }
                assert!(max_abs(&(&comp.m - &fit)) < 1e-9, "({a},{b})");
            }
        }
    }

    #[test]
    fn triple_maps_are_linear() {
        let mut rng = rng();
        let t = QubitTriple::embed(4).unwrap();
        let map = TripleMap::from_omega(3, &t).unwrap();
        let a = [
            random_hermitian(4, &mut rng),
            random_hermitian(4, &mut rng),
            random_hermitian(4, &mut rng),
        ];
        let direct = omega_apply(3, &t, &a).unwrap();
        let via_matrix = map.apply(&a);
        for j in 0..3 {
            assert!(max_abs(&(&direct[j] - &via_matrix[j])) < 1e-12);
        }
    }

    #[test]
    fn monoid_inverse_examples() {
        let t = QubitTriple::embed(4).unwrap();
        let sc = extract_structure_constants(&t, 0).unwrap();
        // unit element
        match monoid_inverse(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0], &sc) {
            MonoidInverse::Inverse(inv) => {
                assert!((inv[0] - 1.0).abs() < 1e-12);
                assert!(inv[1..].iter().all(|x| x.abs() < 1e-12));
            }
            MonoidInverse::Singular { .. } => panic!("unit must be invertible"),
        }
        // Omega^(1): inverse (-2/3, 1/3, 0,0,0,0) from O1 o O1 = 3 O0 + 2 O1
        match monoid_inverse(&[0.0, 1.0, 0.0, 0.0, 0.0, 0.0], &sc) {
            MonoidInverse::Inverse(inv) => {
                assert!((inv[0] + 2.0 / 3.0).abs() < 1e-10, "{inv:?}");
                assert!((inv[1] - 1.0 / 3.0).abs() < 1e-10);
                let prod = compose_coeffs(&sc, &[0.0, 1.0, 0.0, 0.0, 0.0, 0.0], &inv);
                assert!((prod[0] - 1.0).abs() < 1e-10);
                assert!(prod[1..].iter().all(|x| x.abs() < 1e-10));
            }
            MonoidInverse::Singular { .. } => panic!("Omega1 must be invertible"),
        }
        // 4 Pi = Omega0 + Omega1 is a projector, hence singular
        match monoid_inverse(&[1.0, 1.0, 0.0, 0.0, 0.0, 0.0], &sc) {
            MonoidInverse::Singular { rank } => assert!(rank < 6),
            MonoidInverse::Inverse(_) => panic!("projector cannot be invertible"),
        }
    }

    #[test]
    fn swap_basics() {
        let mut rng = rng();
        // phi = 0 -> identity
        assert!(max_abs(&(swap_power(0.0).w - identity(4))) < 1e-14);
        // phi = 1 swaps factors
        let w1 = swap_power(1.0);
        let a = random_hermitian(2, &mut rng);
        let b = random_hermitian(2, &mut rng);
        let swapped = w1.conjugate(&kron(&a, &b));
        assert!(max_abs(&(swapped - kron(&b, &a))) < 1e-12);
        // unitarity and the group law W^a W^b = W^{a+b}
        for _ in 0..10 {
            let x: f64 = rng.random_range(-2.0..2.0);
            let y: f64 = rng.random_range(-2.0..2.0);
            let wx = swap_power(x);
            assert!(max_abs(&(wx.w.adjoint() * &wx.w - identity(4))) < 1e-12);
            let prod = &wx.w * swap_power(y).w;
            assert!(max_abs(&(prod - swap_power(x + y).w)) < 1e-12);
        }
    }
}
