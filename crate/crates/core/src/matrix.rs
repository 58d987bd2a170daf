//! Dense complex-matrix foundation: Pauli matrices, tensor products,
//! commutators, random Hermitian/unitary generation and the text dump format.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Default tolerance for algebra checks in double precision at N <= 16.
pub const ALGEBRA_TOL: f64 = 1e-10;

pub const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const C_ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const C_I: Complex64 = Complex64::new(0.0, 1.0);

/// Totally antisymmetric symbol with eps(0,1,2) = +1 (zero-based indices).
pub fn epsilon(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// The 2x2 Pauli matrix sigma_j, j in 1..=3.
pub fn pauli(j: usize) -> Result<CMatrix> {
    let m = match j {
        1 => CMatrix::from_row_slice(2, 2, &[C_ZERO, C_ONE, C_ONE, C_ZERO]),
        2 => CMatrix::from_row_slice(2, 2, &[C_ZERO, -C_I, C_I, C_ZERO]),
        3 => CMatrix::from_row_slice(2, 2, &[C_ONE, C_ZERO, C_ZERO, -C_ONE]),
        _ => {
            return Err(Error::IndexOutOfRange(format!(
                "Pauli index {j} not in 1..=3"
            )))
        }
    };
    Ok(m)
}

/// Kronecker product A (x) B.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

fn check_same_square(a: &CMatrix, b: &CMatrix) -> Result<()> {
    if a.nrows() != a.ncols() || b.nrows() != b.ncols() || a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    Ok(())
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    check_same_square(a, b)?;
    Ok(a * b - b * a)
}

pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    check_same_square(a, b)?;
    Ok(a * b + b * a)
}

pub fn dagger(a: &CMatrix) -> CMatrix {
    a.adjoint()
}

pub fn scale(a: &CMatrix, s: Complex64) -> CMatrix {
    a.map(|z| z * s)
}

pub fn scale_re(a: &CMatrix, s: f64) -> CMatrix {
    a.map(|z| z * s)
}

/// Largest entry magnitude.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn fro_norm(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Hilbert-Schmidt inner product tr(A^dag B).
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Max entry deviation from Hermiticity.
pub fn herm_deviation(a: &CMatrix) -> f64 {
    max_abs(&(a - a.adjoint()))
}

pub fn ensure_hermitian(a: &CMatrix, tol: f64) -> Result<()> {
    let d = herm_deviation(a);
    if d > tol {
        return Err(Error::NotHermitian { deviation: d, tol });
    }
    Ok(())
}

pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).map(|z| z * 0.5)
}

pub fn random_hermitian<R: Rng>(n: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| {
        Complex64::new(
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        )
    });
    hermitian_part(&g)
}

/// Haar-distributed unitary via QR of a complex Ginibre matrix, with the
/// phases of R's diagonal absorbed into Q.
pub fn random_unitary<R: Rng>(n: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| {
        Complex64::new(
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        )
    });
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..n {
        let d = r[(k, k)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { C_ONE };
        for i in 0..n {
            q[(i, k)] *= ph;
        }
    }
    q
}

/// Writes the text dump format: header `dims R C`, then row-major lines with
/// one `re+imi` token per entry.
pub fn format_matrix(a: &CMatrix) -> String {
    let mut out = format!("dims {} {}\n", a.nrows(), a.ncols());
    for i in 0..a.nrows() {
        let row: Vec<String> = (0..a.ncols())
            .map(|j| {
                let z = a[(i, j)];
                format!("{}{:+}i", z.re, z.im)
            })
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

fn parse_token(tok: &str) -> Result<Complex64> {
    let body = tok
        .strip_suffix('i')
        .ok_or_else(|| Error::Parse(format!("token `{tok}` lacks trailing i")))?;
    // split at the sign of the imaginary part (not a leading sign, not an
    // exponent sign)
    let bytes = body.as_bytes();
    let mut split = None;
    for idx in (1..bytes.len()).rev() {
        let c = bytes[idx] as char;
        if (c == '+' || c == '-') && !matches!(bytes[idx - 1] as char, 'e' | 'E') {
            split = Some(idx);
            break;
        }
    }
    let idx = split.ok_or_else(|| Error::Parse(format!("token `{tok}` has no imaginary part")))?;
    let re: f64 = body[..idx]
        .parse()
        .map_err(|_| Error::Parse(format!("bad real part in `{tok}`")))?;
    let im: f64 = body[idx..]
        .parse()
        .map_err(|_| Error::Parse(format!("bad imaginary part in `{tok}`")))?;
    Ok(Complex64::new(re, im))
}

pub fn parse_matrix(text: &str) -> Result<CMatrix> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty matrix dump".into()))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 3 || parts[0] != "dims" {
        return Err(Error::Parse(format!("bad header `{header}`")));
    }
    let rows: usize = parts[1]
        .parse()
        .map_err(|_| Error::Parse("bad row count".into()))?;
    let cols: usize = parts[2]
        .parse()
        .map_err(|_| Error::Parse("bad col count".into()))?;
    let mut entries = Vec::with_capacity(rows * cols);
    for line in lines {
        for tok in line.split_whitespace() {
            entries.push(parse_token(tok)?);
        }
    }
    if entries.len() != rows * cols {
        return Err(Error::Parse(format!(
            "expected {} entries, found {}",
            rows * cols,
            entries.len()
        )));
    }
    Ok(CMatrix::from_row_slice(rows, cols, &entries))
}
