//! Exact sparse integer polynomials in six variables, with the operations
//! needed to expand and factor the composition-matrix determinant: arithmetic,
//! evaluation, exact multivariate division and exact square roots. Also a
//! fraction-free (Bareiss) integer determinant used as a numeric cross-check.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Exponent vector for the six variables l0..l5.
pub type Expo = [u8; 6];

/// Sparse polynomial with i128 coefficients, keyed by exponent vector.
/// BTreeMap iteration order doubles as the lexicographic monomial order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IntPoly {
    terms: BTreeMap<Expo, i128>,
}

impl IntPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: i128) -> Self {
        let mut p = Self::zero();
        if c != 0 {
            p.terms.insert([0; 6], c);
        }
        p
    }

    pub fn var(i: usize) -> Self {
        let mut e = [0u8; 6];
        e[i] = 1;
        let mut p = Self::zero();
        p.terms.insert(e, 1);
        p
    }

    pub fn monomial(e: Expo, c: i128) -> Self {
        let mut p = Self::zero();
        if c != 0 {
            p.terms.insert(e, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Expo, &i128)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &Expo) -> i128 {
        self.terms.get(e).copied().unwrap_or(0)
    }

    fn insert_add(&mut self, e: Expo, c: i128) {
        if c == 0 {
            return;
        }
        let entry = self.terms.entry(e).or_insert(0);
        *entry = entry.checked_add(c).expect("coefficient overflow");
        if *entry == 0 {
            self.terms.remove(&e);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert_add(*e, *c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert_add(*e, -c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            out.terms.insert(*e, -c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let mut e = [0u8; 6];
                for k in 0..6 {
                    e[k] = e1[k].checked_add(e2[k]).expect("degree overflow");
                }
                out.insert_add(e, c1.checked_mul(*c2).expect("coefficient overflow"));
            }
        }
        out
    }

    pub fn scale(&self, s: i128) -> Self {
        let mut out = Self::zero();
        if s == 0 {
            return out;
        }
        for (e, c) in &self.terms {
            out.terms.insert(*e, c.checked_mul(s).expect("overflow"));
        }
        out
    }

    pub fn eval_f64(&self, x: &[f64; 6]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut v = *c as f64;
                for k in 0..6 {
                    for _ in 0..e[k] {
                        v *= x[k];
                    }
                }
                v
            })
            .sum()
    }

    pub fn eval_i128(&self, x: &[i128; 6]) -> i128 {
        let mut acc: i128 = 0;
        for (e, c) in &self.terms {
            let mut v = *c;
            for k in 0..6 {
                for _ in 0..e[k] {
                    v = v.checked_mul(x[k]).expect("evaluation overflow");
                }
            }
            acc = acc.checked_add(v).expect("evaluation overflow");
        }
        acc
    }

    /// Total degree of the highest monomial, or 0 for the zero polynomial.
    pub fn total_degree(&self) -> usize {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| x as usize).sum())
            .max()
            .unwrap_or(0)
    }

    /// gcd of all coefficients (0 for the zero polynomial).
    pub fn content(&self) -> i128 {
        fn gcd(a: i128, b: i128) -> i128 {
            if b == 0 {
                a.abs()
            } else {
                gcd(b, a % b)
            }
        }
        self.terms.values().fold(0, |acc, &c| gcd(acc, c))
    }

    fn leading(&self) -> Option<(Expo, i128)> {
        self.terms.iter().next_back().map(|(e, c)| (*e, *c))
    }

    /// Exact division. Returns None unless `self = q * divisor` exactly over
    /// the integers.
    pub fn exact_div(&self, divisor: &Self) -> Option<Self> {
        let (de, dc) = divisor.leading()?;
        let mut rem = self.clone();
        let mut quot = Self::zero();
        while let Some((re, rc)) = rem.leading() {
            let mut qe = [0u8; 6];
            for k in 0..6 {
                qe[k] = re[k].checked_sub(de[k])?;
            }
            if rc % dc != 0 {
                return None;
            }
            let qt = Self::monomial(qe, rc / dc);
            quot = quot.add(&qt);
            rem = rem.sub(&qt.mul(divisor));
        }
        Some(quot)
    }

    /// Exact polynomial square root in lexicographic order. Returns None if
    /// `self` is not a perfect square over the integers.
    pub fn sqrt_exact(&self) -> Option<Self> {
        if self.is_zero() {
            return Some(Self::zero());
        }
        let (le, lc) = self.leading()?;
        if lc < 0 {
            return None;
        }
        let root_c = integer_sqrt(lc)?;
        let mut root_e = [0u8; 6];
        for k in 0..6 {
            if le[k] % 2 != 0 {
                return None;
            }
            root_e[k] = le[k] / 2;
        }
        let mut s = Self::monomial(root_e, root_c);
        let mut rem = self.sub(&s.mul(&s));
        let lead2 = 2 * root_c;
        while let Some((re, rc)) = rem.leading() {
            let mut qe = [0u8; 6];
            for k in 0..6 {
                qe[k] = re[k].checked_sub(root_e[k])?;
            }
            if rc % lead2 != 0 {
                return None;
            }
            let t = Self::monomial(qe, rc / lead2);
            // (s + t)^2 = s^2 + 2 s t + t^2
            rem = rem.sub(&s.mul(&t).scale(2)).sub(&t.mul(&t));
            s = s.add(&t);
        }
        Some(s)
    }
}

fn integer_sqrt(n: i128) -> Option<i128> {
    if n < 0 {
        return None;
    }
    let r = (n as f64).sqrt().round() as i128;
    for cand in [r - 1, r, r + 1] {
        if cand >= 0 && cand * cand == n {
            return Some(cand);
        }
    }
    None
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            if first {
                if *c < 0 {
                    write!(f, "-")?;
                }
                first = false;
            } else if *c < 0 {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mag = c.abs();
            let is_const = e.iter().all(|&x| x == 0);
            if mag != 1 || is_const {
                write!(f, "{mag}")?;
            }
            for (k, &p) in e.iter().enumerate() {
                match p {
                    0 => {}
                    1 => write!(f, "l{k}")?,
                    _ => write!(f, "l{k}^{p}")?,
                }
            }
        }
        Ok(())
    }
}

/// Symbolic determinant of a square matrix of polynomials by cofactor
/// expansion along the first row.
pub fn poly_determinant(m: &[Vec<IntPoly>]) -> Result<IntPoly> {
    let n = m.len();
    for row in m {
        if row.len() != n {
            return Err(Error::DimensionMismatch("poly_determinant input".into()));
        }
    }
    Ok(det_rec(m, &(0..n).collect::<Vec<_>>(), 0))
}

fn det_rec(m: &[Vec<IntPoly>], cols: &[usize], row: usize) -> IntPoly {
    if cols.len() == 1 {
        return m[row][cols[0]].clone();
    }
    let mut acc = IntPoly::zero();
    for (i, &col) in cols.iter().enumerate() {
        let entry = &m[row][col];
        if entry.is_zero() {
            continue;
        }
        let sub: Vec<usize> = cols.iter().copied().filter(|&c| c != col).collect();
        let minor = det_rec(m, &sub, row + 1);
        let term = entry.mul(&minor);
        acc = if i % 2 == 0 {
            acc.add(&term)
        } else {
            acc.sub(&term)
        };
    }
    acc
}

/// Fraction-free Bareiss determinant of an integer matrix. Exact for inputs
/// whose intermediate values fit in i128.
pub fn bareiss_determinant(m: &[Vec<i128>]) -> Result<i128> {
    let n = m.len();
    for row in m {
        if row.len() != n {
            return Err(Error::DimensionMismatch("bareiss_determinant input".into()));
        }
    }
    if n == 0 {
        return Ok(1);
    }
    let mut a: Vec<Vec<i128>> = m.to_vec();
    let mut sign: i128 = 1;
    let mut prev: i128 = 1;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            let swap = (k + 1..n).find(|&r| a[r][k] != 0);
            match swap {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return Ok(0),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = a[i][j]
                    .checked_mul(a[k][k])
                    .and_then(|x| x.checked_sub(a[i][k].checked_mul(a[k][j])?))
                    .ok_or_else(|| Error::PolynomialOracle("bareiss overflow".into()))?;
                a[i][j] = num / prev;
            }
            a[i][k] = 0;
        }
        prev = a[k][k];
    }
    Ok(sign * a[n - 1][n - 1])
}
