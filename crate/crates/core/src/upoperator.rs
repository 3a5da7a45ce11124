//! The U(p) transition matrix, its triangular eigenbasis and eigen-exponents.
//!
//! Conventions: coefficient vectors are rows and the basis `{E(w_i)}` is a
//! column, so U(p) acts by `p^{n(k/2−s)}·M` and the `i`-th eigenfunction is
//! row `i` of `B`. The identity checked throughout is `B·M = Λ·B` with
//! `Λ = diag(X^{−i} p^{−i(i+1)/2})`.

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactscalar::{rational_pow, QuadScalar};
use crate::fpforms::{is_prime, legendre, CharacterKind};
use crate::ratfunc::{AffineExponent, AffineExponentJson, RatFunc, RatFuncError, RatFuncJson};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContextError {
    #[error("p = {0} is not an odd prime")]
    InvalidPrime(u64),
    #[error("degree n must be at least 1")]
    InvalidDegree,
    #[error("parity violation: psi(-1) = {psi_minus_one} but (-1)^k = {sign} for k = {k}")]
    ParityViolation { k: i64, psi_minus_one: i8, sign: i8 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EigenError {
    #[error("coincident diagonal entries at positions {0} and {1}")]
    DegenerateSpectrum(usize, usize),
    #[error("matrix is not lower triangular")]
    NotLowerTriangular,
    #[error("eigenvalue list does not match the diagonal")]
    EigenvalueMismatch,
    #[error("eigenvector check failed for column {0}")]
    VerificationFailed(usize),
    #[error(transparent)]
    RatFunc(#[from] RatFuncError),
}

/// The data `(p, n, k, ψ)` fixing a space of Eisenstein series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EisensteinContext {
    pub p: u64,
    pub n: u32,
    pub k: i64,
    pub psi: CharacterKind,
}

impl EisensteinContext {
    pub fn new(p: u64, n: u32, k: i64, psi: CharacterKind) -> Result<Self, ContextError> {
        if p == 2 || !is_prime(p) {
            return Err(ContextError::InvalidPrime(p));
        }
        if n == 0 {
            return Err(ContextError::InvalidDegree);
        }
        let psi_minus_one = match psi {
            CharacterKind::Trivial => 1,
            CharacterKind::Quadratic => legendre(-1, p),
        };
        let sign = if k.rem_euclid(2) == 0 { 1 } else { -1 };
        if psi_minus_one != sign {
            return Err(ContextError::ParityViolation { k, psi_minus_one, sign });
        }
        Ok(EisensteinContext { p, n, k, psi })
    }

    /// Smallest positive weight compatible with `ψ(−1) = (−1)^k`.
    pub fn minimal_weight(p: u64, psi: CharacterKind) -> i64 {
        match psi {
            CharacterKind::Quadratic if legendre(-1, p) == -1 => 1,
            _ => 2,
        }
    }

    pub fn size(&self) -> usize {
        self.n as usize + 1
    }
}

/// Square matrix of rational functions sharing one prime tag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RFMatrix {
    p: u64,
    size: usize,
    entries: Vec<RatFunc>,
}

impl RFMatrix {
    pub fn from_fn(p: u64, size: usize, f: impl Fn(usize, usize) -> RatFunc + Sync) -> Self {
        let entries: Vec<RatFunc> = (0..size * size).into_par_iter().map(|idx| f(idx / size, idx % size)).collect();
        for e in &entries {
            assert_eq!(e.prime(), p, "ring tag mismatch in matrix entry");
        }
        RFMatrix { p, size, entries }
    }

    pub fn zero(p: u64, size: usize) -> Self {
        RFMatrix { p, size, entries: vec![RatFunc::zero(p); size * size] }
    }

    pub fn identity(p: u64, size: usize) -> Self {
        Self::from_fn(p, size, |i, j| if i == j { RatFunc::one(p) } else { RatFunc::zero(p) })
    }

    pub fn diagonal(p: u64, d: Vec<RatFunc>) -> Self {
        let size = d.len();
        Self::from_fn(p, size, |i, j| if i == j { d[i].clone() } else { RatFunc::zero(p) })
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> &RatFunc {
        &self.entries[i * self.size + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: RatFunc) {
        assert_eq!(v.prime(), self.p, "ring tag mismatch in matrix entry");
        self.entries[i * self.size + j] = v;
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &RatFunc)> {
        self.entries.iter().enumerate().map(move |(idx, e)| (idx / self.size, idx % self.size, e))
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.size, o.size, "dimension mismatch");
        assert_eq!(self.p, o.p, "ring tag mismatch");
        let n = self.size;
        Self::from_fn(self.p, n, |i, j| {
            (0..n).fold(RatFunc::zero(self.p), |acc, k| {
                let a = self.get(i, k);
                let b = o.get(k, j);
                if a.is_zero() || b.is_zero() {
                    acc
                } else {
                    acc.add(&a.mul(b))
                }
            })
        })
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.p, self.size, |i, j| self.get(j, i).clone())
    }

    pub fn map(&self, f: impl Fn(&RatFunc) -> RatFunc + Sync) -> Self {
        Self::from_fn(self.p, self.size, |i, j| f(self.get(i, j)))
    }

    pub fn is_identity(&self) -> bool {
        self.entries().all(|(i, j, e)| if i == j { e.is_one() } else { e.is_zero() })
    }

    pub fn is_upper_triangular(&self) -> bool {
        self.entries().all(|(i, j, e)| i <= j || e.is_zero())
    }

    pub fn is_lower_triangular(&self) -> bool {
        self.entries().all(|(i, j, e)| i >= j || e.is_zero())
    }

    pub fn is_unit_upper_triangular(&self) -> bool {
        self.is_upper_triangular() && (0..self.size).all(|i| self.get(i, i).is_one())
    }

    pub fn is_anti_diagonal(&self) -> bool {
        let n = self.size - 1;
        self.entries().all(|(i, j, e)| i + j == n || e.is_zero())
    }

    /// True when every entry lies in Q(X).
    pub fn is_rational_over_q(&self) -> bool {
        self.entries.iter().all(RatFunc::is_rational_over_q)
    }

    /// Inverse of a unit upper-triangular matrix by back-substitution.
    pub fn unit_upper_inverse(&self) -> Self {
        assert!(self.is_unit_upper_triangular(), "unit upper-triangular matrix expected");
        let n = self.size;
        let p = self.p;
        let mut inv = Self::identity(p, n);
        for i in 0..n {
            for j in i + 1..n {
                let s = (i..j).fold(RatFunc::zero(p), |acc, r| acc.add(&inv.get(i, r).mul(self.get(r, j))));
                inv.set(i, j, s.neg());
            }
        }
        inv
    }

    pub fn to_json(&self) -> Vec<Vec<RatFuncJson>> {
        (0..self.size).map(|i| (0..self.size).map(|j| self.get(i, j).to_json()).collect()).collect()
    }

    pub fn from_json(p: u64, rows: &[Vec<RatFuncJson>]) -> Result<Self, RatFuncError> {
        let size = rows.len();
        let mut entries = Vec::with_capacity(size * size);
        for r in rows {
            assert_eq!(r.len(), size, "square matrix expected");
            for e in r {
                entries.push(RatFunc::from_json(p, e)?);
            }
        }
        Ok(RFMatrix { p, size, entries })
    }
}

fn prod_pm1(p: u64, lo: u32, hi: u32, step: u32) -> BigRational {
    (lo..=hi).fold(rational_pow(p, 0), |acc, r| acc * (rational_pow(p, (step * r) as i64) - rational_pow(p, 0)))
}

/// `m_ψ(s)_{ij}` as a rational function of `X`.
pub fn m_entry(ctx: &EisensteinContext, i: usize, j: usize) -> RatFunc {
    let p = ctx.p;
    if i > j {
        return RatFunc::zero(p);
    }
    let d = (j - i) as i64;
    let (ji, jj) = (i as u32, j as u32);
    let base = -((j * (j + 1)) as i64) / 2;
    let (four_exp, half, sign) = match ctx.psi {
        CharacterKind::Trivial if d % 2 == 0 => (d * (d + 2), d / 2, 1),
        CharacterKind::Trivial => (d * d - 1, (d - 1) / 2, 1),
        CharacterKind::Quadratic if d % 2 == 0 => {
            let s = if legendre(-1, p) == -1 && (d / 2) % 2 == 1 { -1 } else { 1 };
            (d * d, d / 2, s)
        }
        CharacterKind::Quadratic => return RatFunc::zero(p),
    };
    debug_assert_eq!(four_exp % 4, 0);
    let coeff = rational_pow(p, base + four_exp / 4) * prod_pm1(p, ji + 1, jj, 1) / prod_pm1(p, 1, half as u32, 2)
        * BigRational::from_integer(BigInt::from(sign));
    RatFunc::monomial(QuadScalar::from_rational(p, coeff), -(i as i64))
}

/// `X^{−i}·p^{−i(i+1)/2}`, the `i`-th diagonal entry of `M` and of `Λ`.
pub fn normalized_eigenvalue(p: u64, i: usize) -> RatFunc {
    RatFunc::monomial(QuadScalar::p_power(p, -((i * (i + 1)) as i64) / 2), -(i as i64))
}

/// `M_ψ(s)` and the prefactor exponent `n(k/2 − s)`.
pub fn up_matrix(ctx: &EisensteinContext) -> (RFMatrix, AffineExponent) {
    let m = RFMatrix::from_fn(ctx.p, ctx.size(), |i, j| m_entry(ctx, i, j));
    (m, AffineExponent::prefactor(ctx.n as i64, ctx.k))
}

/// `Λ(s) = diag(X^{−i} p^{−i(i+1)/2})`.
pub fn lambda_matrix(ctx: &EisensteinContext) -> RFMatrix {
    RFMatrix::diagonal(ctx.p, (0..ctx.size()).map(|i| normalized_eigenvalue(ctx.p, i)).collect())
}

/// `B_ψ(s)` by the recursion
/// `b_ij = −p^{−2si+i(i+1)/2}/(p^{(j−i)(2s−(j+i+1)/2)} − 1) · Σ_{r=i}^{j−1} m_rj b_ir`.
pub fn b_matrix(ctx: &EisensteinContext) -> RFMatrix {
    let p = ctx.p;
    let n = ctx.size();
    let (m, _) = up_matrix(ctx);
    let rows: Vec<Vec<RatFunc>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![RatFunc::zero(p); n];
            row[i] = RatFunc::one(p);
            // p^{-2si + i(i+1)/2} = X^i p^{i(i+1)/2}
            let lead = RatFunc::monomial(QuadScalar::p_power(p, ((i * (i + 1)) / 2) as i64), i as i64);
            for j in i + 1..n {
                let d = (j - i) as i64;
                let pw = RatFunc::monomial(QuadScalar::p_power(p, -d * (i + j + 1) as i64 / 2), -d);
                let den = pw.sub(&RatFunc::one(p));
                let sum = (i..j).fold(RatFunc::zero(p), |acc, r| {
                    let t = m.get(r, j);
                    if t.is_zero() || row[r].is_zero() {
                        acc
                    } else {
                        acc.add(&t.mul(&row[r]))
                    }
                });
                row[j] = lead.div(&den).expect("nonzero denominator").mul(&sum).neg();
            }
            row
        })
        .collect();
    RFMatrix::from_fn(p, n, |i, j| rows[i][j].clone())
}

/// `B_ψ(s)^{−1}`; its `(ν, r)` entry is the local Siegel series `S_r^ν(ψ, 0, 2s)_p`.
pub fn b_inverse(ctx: &EisensteinContext) -> RFMatrix {
    b_matrix(ctx).unit_upper_inverse()
}

/// Eigenvectors of a lower-triangular `A` with distinct diagonal `λ`.
///
/// Column `i` is `v^{(i)}` with `v_i = 1`, `v_j = −(λ_j − λ_i)^{−1} Σ_{k=i}^{j−1} a_jk v_k`.
/// Each column is checked against `A·v = λ_i·v` before returning.
pub fn triangular_eigenvectors(a: &RFMatrix, lambda: &[RatFunc]) -> Result<RFMatrix, EigenError> {
    let n = a.size();
    let p = a.prime();
    if !a.is_lower_triangular() {
        return Err(EigenError::NotLowerTriangular);
    }
    if lambda.len() != n || (0..n).any(|i| a.get(i, i) != &lambda[i]) {
        return Err(EigenError::EigenvalueMismatch);
    }
    for i in 0..n {
        for j in i + 1..n {
            if lambda[i] == lambda[j] {
                return Err(EigenError::DegenerateSpectrum(i, j));
            }
        }
    }
    let cols: Vec<Vec<RatFunc>> = (0..n)
        .into_par_iter()
        .map(|i| -> Result<Vec<RatFunc>, EigenError> {
            let mut v = vec![RatFunc::zero(p); n];
            v[i] = RatFunc::one(p);
            for j in i + 1..n {
                let s = (i..j).fold(RatFunc::zero(p), |acc, k| acc.add(&a.get(j, k).mul(&v[k])));
                v[j] = s.div(&lambda[j].sub(&lambda[i]))?.neg();
            }
            for r in 0..n {
                let av = (0..n).fold(RatFunc::zero(p), |acc, k| acc.add(&a.get(r, k).mul(&v[k])));
                if av != lambda[i].mul(&v[r]) {
                    return Err(EigenError::VerificationFailed(i));
                }
            }
            Ok(v)
        })
        .collect::<Result<_, _>>()?;
    Ok(RFMatrix::from_fn(p, n, |j, i| cols[i][j].clone()))
}

/// Eigen-exponent data of U(p).
#[derive(Clone, Debug, PartialEq)]
pub struct EigenData {
    pub exponents: Vec<AffineExponent>,
    pub prefactor: AffineExponent,
    pub normalized_eigs: Vec<RatFunc>,
}

pub fn eigen_data(ctx: &EisensteinContext) -> Result<EigenData, RatFuncError> {
    let n = ctx.n as i64;
    let prefactor = AffineExponent::prefactor(n, ctx.k);
    let exponents: Vec<_> = (0..=n).map(|j| AffineExponent::exponent_l(n, ctx.k, j)).collect();
    let normalized_eigs =
        exponents.iter().map(|e| e.sub(&prefactor).to_monomial(ctx.p)).collect::<Result<Vec<_>, _>>()?;
    Ok(EigenData { exponents, prefactor, normalized_eigs })
}

/// JSON view of the U(p) data of a context.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpOperatorJson {
    pub context: EisensteinContext,
    pub prefactor: AffineExponentJson,
    #[serde(rename = "M")]
    pub m: Vec<Vec<RatFuncJson>>,
    #[serde(rename = "B", skip_serializing_if = "Option::is_none", default)]
    pub b: Option<Vec<Vec<RatFuncJson>>>,
    #[serde(rename = "B_inv", skip_serializing_if = "Option::is_none", default)]
    pub b_inv: Option<Vec<Vec<RatFuncJson>>>,
    pub eigen_exponents: Vec<AffineExponentJson>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactscalar::rat;
    use crate::ratfunc::Poly;

    fn ctx(p: u64, n: u32, psi: CharacterKind) -> EisensteinContext {
        EisensteinContext::new(p, n, EisensteinContext::minimal_weight(p, psi), psi).unwrap()
    }

    #[test]
    fn parity_rules() {
        assert!(EisensteinContext::new(3, 1, 4, CharacterKind::Trivial).is_ok());
        assert!(matches!(
            EisensteinContext::new(3, 1, 3, CharacterKind::Trivial),
            Err(ContextError::ParityViolation { .. })
        ));
        assert!(EisensteinContext::new(3, 1, 3, CharacterKind::Quadratic).is_ok());
        assert!(EisensteinContext::new(5, 1, 2, CharacterKind::Quadratic).is_ok());
        assert!(EisensteinContext::new(5, 1, 3, CharacterKind::Quadratic).is_err());
        assert_eq!(EisensteinContext::new(9, 1, 2, CharacterKind::Trivial), Err(ContextError::InvalidPrime(9)));
        assert_eq!(EisensteinContext::new(2, 1, 2, CharacterKind::Trivial), Err(ContextError::InvalidPrime(2)));
    }

    #[test]
    fn m_entry_examples() {
        let t = ctx(5, 3, CharacterKind::Trivial);
        let q = ctx(5, 3, CharacterKind::Quadratic);
        assert!(m_entry(&t, 0, 0).is_one());
        assert!(m_entry(&q, 0, 1).is_zero());
        assert_eq!(m_entry(&t, 0, 1), RatFunc::from_rational(5, rat(4, 5)));
        assert!(m_entry(&t, 2, 1).is_zero());
        for i in 0..4 {
            assert_eq!(m_entry(&t, i, i), normalized_eigenvalue(5, i));
            assert_eq!(m_entry(&q, i, i), normalized_eigenvalue(5, i));
        }
    }

    #[test]
    fn n1_trivial_matrices() {
        let c = ctx(3, 1, CharacterKind::Trivial);
        let (m, pre) = up_matrix(&c);
        assert_eq!(pre, AffineExponent::new(rat(1, 1), rat(-1, 1)));
        assert_eq!(m.get(0, 1), &RatFunc::from_rational(3, rat(2, 3)));
        assert_eq!(m.get(1, 1), &RatFunc::new(Poly::one(3), Poly::from_ints(3, &[0, 3])).unwrap());
        let b = b_matrix(&c);
        let expect = RatFunc::new(Poly::from_ints(3, &[0, -2]), Poly::from_ints(3, &[1, -3])).unwrap();
        assert_eq!(b.get(0, 1), &expect);
        assert_eq!(b_inverse(&c).get(0, 1), &expect.neg());
    }

    #[test]
    fn quadratic_n2_zeros() {
        let b = b_matrix(&ctx(3, 2, CharacterKind::Quadratic));
        assert!(b.get(0, 1).is_zero());
        assert!(b.get(1, 2).is_zero());
        assert!(!b.get(0, 2).is_zero());
    }

    #[test]
    fn eigenvectors_match_b_rows() {
        for psi in [CharacterKind::Trivial, CharacterKind::Quadratic] {
            let c = ctx(3, 3, psi);
            let (m, _) = up_matrix(&c);
            let lam: Vec<_> = (0..4).map(|i| normalized_eigenvalue(3, i)).collect();
            let v = triangular_eigenvectors(&m.transpose(), &lam).unwrap();
            assert_eq!(v, b_matrix(&c).transpose());
        }
    }

    #[test]
    fn eigenvectors_of_diagonal() {
        let lam: Vec<_> = (0..3).map(|i| normalized_eigenvalue(7, i)).collect();
        let a = RFMatrix::diagonal(7, lam.clone());
        assert!(triangular_eigenvectors(&a, &lam).unwrap().is_identity());
    }

    #[test]
    fn degenerate_spectrum() {
        let lam = vec![RatFunc::one(3), RatFunc::one(3)];
        let a = RFMatrix::diagonal(3, lam.clone());
        assert_eq!(triangular_eigenvectors(&a, &lam), Err(EigenError::DegenerateSpectrum(0, 1)));
        let mut u = RFMatrix::identity(3, 2);
        u.set(0, 1, RatFunc::one(3));
        assert_eq!(triangular_eigenvectors(&u, &lam), Err(EigenError::NotLowerTriangular));
    }

    #[test]
    fn eigen_data_examples() {
        let c = EisensteinContext::new(3, 2, 2, CharacterKind::Trivial).unwrap();
        let e = eigen_data(&c).unwrap();
        assert!(e.normalized_eigs[0].is_one());
        assert_eq!(e.exponents[2], AffineExponent::new(rat(-1, 1), rat(2, 1)));
        assert_eq!(e.exponents[2].eval_at(&rat(1, 1)), rat(1, 1));
        for j in 0..3 {
            assert_eq!(e.normalized_eigs[j], normalized_eigenvalue(3, j));
        }
    }
}
