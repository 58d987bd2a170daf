//! Qubit triples: three N x N Hermitian operators realizing the Pauli
//! algebra `q_j q_k = delta_jk 1 + i eps_jk^l q_l` at one event, plus the
//! product frame that brings a triple to `sigma_j (x) I` form.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{
    self, epsilon, identity, kron, max_abs, pauli, scale, CMatrix, C_I,
};

/// Three N x N Hermitian matrices obeying the Pauli algebra.
#[derive(Debug, Clone)]
pub struct QubitTriple {
    q: [CMatrix; 3],
}

/// Outcome of a triple verification: Hermiticity and algebra residuals are
/// reported separately so a non-Hermitian input is distinguishable from an
/// algebra failure.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct TripleCheck {
    pub hermiticity_residual: f64,
    pub algebra_residual: f64,
    pub pass: bool,
}

impl QubitTriple {
    /// Wraps three square matrices of common dimension. Algebra and
    /// Hermiticity are checked by [`QubitTriple::verify`], not here.
    pub fn from_matrices(q: [CMatrix; 3]) -> Result<Self> {
        let n = q[0].nrows();
        for m in &q {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "triple components must all be {n}x{n}"
                )));
            }
        }
        Ok(Self { q })
    }

    /// The canonical embedding q_j = sigma_j (x) I_{N/2}.
    pub fn embed(n: usize) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(Error::OddDimension(n));
        }
        let rest = identity(n / 2);
        let q = [
            kron(&pauli(1)?, &rest),
            kron(&pauli(2)?, &rest),
            kron(&pauli(3)?, &rest),
        ];
        Ok(Self { q })
    }

    pub fn dim(&self) -> usize {
        self.q[0].nrows()
    }

    pub fn q(&self, j: usize) -> &CMatrix {
        &self.q[j]
    }

    pub fn components(&self) -> &[CMatrix; 3] {
        &self.q
    }

    /// U^dag q_j U for a unitary U; the algebra is preserved.
    pub fn conjugated(&self, u: &CMatrix) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch("unitary size".into()));
        }
        let ud = u.adjoint();
        Ok(Self {
            q: [
                &ud * &self.q[0] * u,
                &ud * &self.q[1] * u,
                &ud * &self.q[2] * u,
            ],
        })
    }

    /// Max residual of `q_j q_k - delta_jk 1 - i eps_jk^l q_l` over j,k,
    /// with the Hermiticity deviation reported separately.
    pub fn verify(&self, tol: f64) -> TripleCheck {
        let n = self.dim();
        let herm = self
            .q
            .iter()
            .map(matrix::herm_deviation)
            .fold(0.0, f64::max);
        let id = identity(n);
        let mut worst: f64 = 0.0;
        for j in 0..3 {
            for k in 0..3 {
                let mut r = &self.q[j] * &self.q[k];
                if j == k {
                    r -= &id;
                }
                for l in 0..3 {
                    let e = epsilon(j, k, l);
                    if e != 0.0 {
                        r -= scale(&self.q[l], C_I * e);
                    }
                }
                worst = worst.max(max_abs(&r));
            }
        }
        TripleCheck {
            hermiticity_residual: herm,
            algebra_residual: worst,
            pass: herm <= tol && worst <= tol,
        }
    }

    /// The change of basis V with V^dag q_j V = sigma_j (x) I, built from the
    /// spectral projector (1+q3)/2 and the action of q1.
    pub fn product_frame(&self) -> Result<ProductFrame> {
        let n = self.dim();
        let half = n / 2;
        let id = identity(n);
        let p_plus = (&id + &self.q[2]).map(|z| z * 0.5);
        // orthonormal basis of range(P+) by modified Gram-Schmidt over its
        // columns
        let mut basis: Vec<nalgebra::DVector<Complex64>> = Vec::with_capacity(half);
        for c in 0..n {
            let mut v = p_plus.column(c).clone_owned();
            for b in &basis {
                let proj = b.dotc(&v);
                v -= b.map(|z| z * proj);
            }
            let norm = v.norm();
            if norm > 1e-8 {
                basis.push(v.map(|z| z / Complex64::new(norm, 0.0)));
                if basis.len() == half {
                    break;
                }
            }
        }
        if basis.len() != half {
            return Err(Error::BasisDegeneracy(format!(
                "spectral projector of q3 has rank {} != {}",
                basis.len(),
                half
            )));
        }
        let mut v = CMatrix::zeros(n, n);
        for (k, e) in basis.iter().enumerate() {
            v.set_column(k, e);
            // q1 maps the +1 eigenspace of q3 onto the -1 eigenspace
            let f = &self.q[0] * e;
            v.set_column(half + k, &f);
        }
        // sanity: V must be unitary
        let dev = max_abs(&(v.adjoint() * &v - &id));
        if dev > 1e-8 {
            return Err(Error::BasisDegeneracy(format!(
                "product frame basis not unitary (deviation {dev:.3e}); \
                 triple does not satisfy the Pauli algebra"
            )));
        }
        Ok(ProductFrame { v })
    }
}

/// Unitary change of basis to the frame in which the triple is
/// `sigma_j (x) I_{N/2}`.
#[derive(Debug, Clone)]
pub struct ProductFrame {
    v: CMatrix,
}

impl ProductFrame {
    pub fn basis(&self) -> &CMatrix {
        &self.v
    }

    pub fn to_frame(&self, a: &CMatrix) -> CMatrix {
        self.v.adjoint() * a * &self.v
    }

    pub fn from_frame(&self, a: &CMatrix) -> CMatrix {
        &self.v * a * self.v.adjoint()
    }
}

/// Coefficients of A = I (x) A0 + sigma_j (x) A_j in a triple's product
/// frame.
#[derive(Debug, Clone)]
pub struct ProductDecomposition {
    pub a0: CMatrix,
    pub aj: [CMatrix; 3],
}

impl ProductDecomposition {
    /// Reassembles I (x) A0 + sigma_j (x) A_j (still in the product frame).
    pub fn reconstruct(&self) -> Result<CMatrix> {
        let half = self.a0.nrows();
        let mut out = kron(&identity(2), &self.a0);
        for j in 0..3 {
            if self.aj[j].nrows() != half {
                return Err(Error::DimensionMismatch("decomposition blocks".into()));
            }
            out += kron(&pauli(j + 1)?, &self.aj[j]);
        }
        Ok(out)
    }
}

/// Splits an operator (given in the lab frame) into I (x) A0 + sigma_j (x) A_j
/// with respect to the triple's product structure.
pub fn decompose(t: &QubitTriple, frame: &ProductFrame, a: &CMatrix) -> Result<ProductDecomposition> {
    let n = t.dim();
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::DimensionMismatch("operator size".into()));
    }
    let half = n / 2;
    let b = frame.to_frame(a);
    let blk = |r: usize, c: usize| -> CMatrix {
        b.view((r * half, c * half), (half, half)).clone_owned()
    };
    let (b00, b01, b10, b11) = (blk(0, 0), blk(0, 1), blk(1, 0), blk(1, 1));
    let a0 = (&b00 + &b11).map(|z| z * 0.5);
    let a1 = (&b01 + &b10).map(|z| z * 0.5);
    let a2 = (&b10 - &b01).map(|z| z * 0.5 / C_I);
    let a3 = (&b00 - &b11).map(|z| z * 0.5);
    Ok(ProductDecomposition { a0, aj: [a1, a2, a3] })
}

/// Trace over the (N/2)-dimensional cofactor in the triple's product frame,
/// i.e. the unique 2x2 m with Tr(A (sigma_a (x) I)) = Tr(m sigma_a) for
/// sigma_a in {I, sigma_1, sigma_2, sigma_3}.
pub fn partial_trace_rest(t: &QubitTriple, frame: &ProductFrame, a: &CMatrix) -> Result<CMatrix> {
    let n = t.dim();
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::DimensionMismatch("operator size".into()));
    }
    let half = n / 2;
    let b = frame.to_frame(a);
    let mut m = CMatrix::zeros(2, 2);
    for r in 0..2 {
        for c in 0..2 {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..half {
                s += b[(r * half + k, c * half + k)];
            }
            m[(r, c)] = s;
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{random_hermitian, random_unitary};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn embed_satisfies_algebra_exactly() {
        for n in [2usize, 4, 8] {
            let t = QubitTriple::embed(n).unwrap();
            let chk = t.verify(1e-12);
            assert!(chk.pass, "N={n}: {chk:?}");
            assert_eq!(chk.algebra_residual, 0.0);
        }
        assert!(QubitTriple::embed(3).is_err());
        assert!(QubitTriple::embed(0).is_err());
    }

    #[test]
    fn embed_two_is_paulis() {
        let t = QubitTriple::embed(2).unwrap();
        for j in 0..3 {
            assert!(max_abs(&(t.q(j) - pauli(j + 1).unwrap())) == 0.0);
        }
    }

    #[test]
    fn conjugation_preserves_algebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let t = QubitTriple::embed(4).unwrap();
        let u = random_unitary(4, &mut rng);
        let tc = t.conjugated(&u).unwrap();
        assert!(tc.verify(1e-12).pass);
    }

    #[test]
    fn orientation_flip_breaks_algebra() {
        let t = QubitTriple::embed(4).unwrap();
        let flipped = QubitTriple::from_matrices([
            t.q(0).clone(),
            t.q(1).clone(),
            t.q(2).map(|z| -z),
        ])
        .unwrap();
        let chk = flipped.verify(1e-12);
        assert!(!chk.pass);
        // the epsilon term doubles: residual is 2 on the q3-scale entries
        assert!((chk.algebra_residual - 2.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_scaling_shows_in_delta_term() {
        let t = QubitTriple::embed(4).unwrap();
        let scaled = QubitTriple::from_matrices([
            t.q(0).map(|z| z * 1.01),
            t.q(1).map(|z| z * 1.01),
            t.q(2).map(|z| z * 1.01),
        ])
        .unwrap();
        let chk = scaled.verify(1e-12);
        // diagonal products pick up 1.01^2 - 1 ~ 0.02; the eps term only
        // 0.01 x 1.01
        assert!((chk.algebra_residual - (1.01f64.powi(2) - 1.0)).abs() < 1e-9);
    }

    #[test]
    fn product_frame_recovers_sigma_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [4usize, 8] {
            let u = random_unitary(n, &mut rng);
            let t = QubitTriple::embed(n).unwrap().conjugated(&u).unwrap();
            let frame = t.product_frame().unwrap();
            let canon = QubitTriple::embed(n).unwrap();
            for j in 0..3 {
                let back = frame.to_frame(t.q(j));
                assert!(max_abs(&(back - canon.q(j))) < 1e-10, "N={n} j={j}");
            }
        }
    }

    #[test]
    fn partial_trace_examples() {
        let t = QubitTriple::embed(4).unwrap();
        let frame = t.product_frame().unwrap();
        // A = I_N -> (N/2) I_2
        let m = partial_trace_rest(&t, &frame, &identity(4)).unwrap();
        assert!(max_abs(&(m - identity(2).map(|z| z * 2.0))) < 1e-12);
        // A = sigma1 (x) I2 -> 2 sigma1
        let a = kron(&pauli(1).unwrap(), &identity(2));
        let m = partial_trace_rest(&t, &frame, &a).unwrap();
        assert!(max_abs(&(m - pauli(1).unwrap().map(|z| z * 2.0))) < 1e-12);
    }

    /// Brute-force index-contraction oracle for the partial trace in the
    /// canonical frame.
    fn partial_trace_oracle(a: &CMatrix, half: usize) -> CMatrix {
        let mut m = CMatrix::zeros(2, 2);
        for r in 0..2 {
            for c in 0..2 {
                for k in 0..half {
                    m[(r, c)] += a[(r * half + k, c * half + k)];
                }
            }
        }
        m
    }

    #[test]
    fn partial_trace_matches_bruteforce() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for n in [4usize, 8] {
            let t = QubitTriple::embed(n).unwrap();
            let frame = t.product_frame().unwrap();
            for _ in 0..100 {
                let a = random_hermitian(n, &mut rng);
                let got = partial_trace_rest(&t, &frame, &a).unwrap();
                let want = partial_trace_oracle(&a, n / 2);
                assert!(max_abs(&(got - want)) < 1e-12);
            }
        }
    }

    #[test]
    fn decompose_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in [4usize, 8] {
            let u = random_unitary(n, &mut rng);
            let t = QubitTriple::embed(n).unwrap().conjugated(&u).unwrap();
            let frame = t.product_frame().unwrap();
            for _ in 0..20 {
                let a = random_hermitian(n, &mut rng);
                let dec = decompose(&t, &frame, &a).unwrap();
                let back = frame.from_frame(&dec.reconstruct().unwrap());
                assert!(max_abs(&(back - a)) < 1e-12);
            }
        }
    }
}
