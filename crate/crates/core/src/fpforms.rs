//! Symmetric bilinear forms over F_p.
//!
//! Rank, the discriminant character ψ̂, the character sums `W^l_m(ψ)` in
//! closed form and by enumeration, and orders of orthogonal and general
//! linear groups.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default bound on the number of objects an enumeration may visit.
pub const DEFAULT_MAX_ENUM: u64 = 1 << 26;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumError {
    #[error("enumeration of {size} objects exceeds the limit {limit}")]
    TooLarge { size: u128, limit: u64 },
}

/// Checks `base^exp ≤ limit` and returns `base^exp`.
pub fn enum_size(base: u64, exp: u32, limit: u64) -> Result<u64, EnumError> {
    let size = (base as u128).checked_pow(exp).unwrap_or(u128::MAX);
    if size > limit as u128 {
        return Err(EnumError::TooLarge { size, limit });
    }
    Ok(size as u64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CharacterKind {
    Trivial,
    Quadratic,
}

impl CharacterKind {
    pub fn name(self) -> &'static str {
        match self {
            CharacterKind::Trivial => "trivial",
            CharacterKind::Quadratic => "quadratic",
        }
    }

    /// `ψ(a)` for ψ the trivial or quadratic character mod `p`.
    pub fn eval(self, a: i64, p: u64) -> i8 {
        match self {
            CharacterKind::Trivial => (a.rem_euclid(p as i64) != 0) as i8,
            CharacterKind::Quadratic => legendre(a, p),
        }
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = ((acc as u128 * b as u128) % m as u128) as u64;
        }
        b = ((b as u128 * b as u128) % m as u128) as u64;
        e >>= 1;
    }
    acc
}

/// Legendre symbol `(a/p)` by Euler's criterion.
pub fn legendre(a: i64, p: u64) -> i8 {
    let r = a.rem_euclid(p as i64) as u64;
    if r == 0 {
        return 0;
    }
    if pow_mod(r, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

/// Smallest positive quadratic non-residue mod `p`.
pub fn smallest_nonresidue(p: u64) -> u64 {
    (2..p).find(|&a| legendre(a as i64, p) == -1).expect("odd prime has a non-residue")
}

fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

/// Symmetric matrix over F_p, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FpSymMatrix {
    p: u64,
    size: usize,
    entries: Vec<u64>,
}

impl FpSymMatrix {
    /// Builds from rows; entries are reduced mod `p` and symmetry is checked.
    pub fn new(p: u64, rows: &[Vec<i64>]) -> Self {
        let size = rows.len();
        let mut entries = Vec::with_capacity(size * size);
        for r in rows {
            assert_eq!(r.len(), size, "square matrix expected");
            entries.extend(r.iter().map(|&x| x.rem_euclid(p as i64) as u64));
        }
        let m = FpSymMatrix { p, size, entries };
        for i in 0..size {
            for j in 0..i {
                assert_eq!(m.get(i, j), m.get(j, i), "matrix is not symmetric");
            }
        }
        m
    }

    pub fn zero(p: u64, size: usize) -> Self {
        FpSymMatrix { p, size, entries: vec![0; size * size] }
    }

    pub fn identity(p: u64, size: usize) -> Self {
        Self::diagonal(p, &vec![1; size])
    }

    pub fn diagonal(p: u64, d: &[u64]) -> Self {
        let mut m = Self::zero(p, d.len());
        for (i, &x) in d.iter().enumerate() {
            m.entries[i * d.len() + i] = x % p;
        }
        m
    }

    /// `1_{m−1} ⊕ δ` with δ the smallest non-residue.
    pub fn e_form(p: u64, m: usize) -> Self {
        let mut d = vec![1; m];
        d[m - 1] = smallest_nonresidue(p);
        Self::diagonal(p, &d)
    }

    /// Decodes the `idx`-th element of Sym^l(F_p) (upper triangle in base p).
    pub fn from_index(p: u64, size: usize, mut idx: u64) -> Self {
        let mut m = Self::zero(p, size);
        for i in 0..size {
            for j in i..size {
                let v = idx % p;
                idx /= p;
                m.entries[i * size + j] = v;
                m.entries[j * size + i] = v;
            }
        }
        m
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.size + j]
    }

    /// `ᵗγ·self·γ` for a square matrix `γ` (row-major, size `l×l`).
    pub fn congruent(&self, gamma: &[u64]) -> Self {
        let l = self.size;
        let p = self.p;
        let mut tmp = vec![0u64; l * l];
        for i in 0..l {
            for j in 0..l {
                let mut s = 0u64;
                for k in 0..l {
                    s = (s + self.get(i, k) * gamma[k * l + j]) % p;
                }
                tmp[i * l + j] = s;
            }
        }
        let mut out = Self::zero(p, l);
        for i in 0..l {
            for j in 0..l {
                let mut s = 0u64;
                for k in 0..l {
                    s = (s + gamma[k * l + i] * tmp[k * l + j]) % p;
                }
                out.entries[i * l + j] = s;
            }
        }
        out
    }
}

/// Rank over F_p of an arbitrary `rows×cols` matrix by Gaussian elimination.
pub fn rank_mod_p(p: u64, rows: usize, cols: usize, entries: &[u64]) -> usize {
    let mut a: Vec<u64> = entries.iter().map(|x| x % p).collect();
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows).find(|&r| a[r * cols + c] != 0) else { continue };
        for k in 0..cols {
            a.swap(piv * cols + k, rank * cols + k);
        }
        let inv = inv_mod(a[rank * cols + c], p);
        for r in 0..rows {
            if r != rank && a[r * cols + c] != 0 {
                let f = a[r * cols + c] * inv % p;
                for k in 0..cols {
                    a[r * cols + k] = (a[r * cols + k] + p * p - f * a[rank * cols + k] % p) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

pub fn sym_rank(u: &FpSymMatrix) -> usize {
    rank_mod_p(u.p, u.size, u.size, &u.entries)
}

/// Congruence diagonalization: the nonzero diagonal entries of some `ᵗγuγ`.
fn congruence_diagonal(u: &FpSymMatrix) -> Vec<u64> {
    let p = u.p;
    let l = u.size;
    let mut a = u.entries.clone();
    let at = |a: &Vec<u64>, i: usize, j: usize| a[i * l + j];
    let mut diag = Vec::new();
    for i in 0..l {
        if at(&a, i, i) == 0 {
            // bring a nonzero diagonal entry to position i, or create one
            if let Some(j) = (i + 1..l).find(|&j| at(&a, j, j) != 0) {
                for k in 0..l {
                    a.swap(i * l + k, j * l + k);
                }
                for k in 0..l {
                    a.swap(k * l + i, k * l + j);
                }
            } else if let Some(j) = (i + 1..l).find(|&j| at(&a, i, j) != 0) {
                // row_i += row_j, col_i += col_j gives a_ii = 2 a_ij
                for k in 0..l {
                    a[i * l + k] = (a[i * l + k] + a[j * l + k]) % p;
                }
                for k in 0..l {
                    a[k * l + i] = (a[k * l + i] + a[k * l + j]) % p;
                }
            } else {
                continue;
            }
        }
        let d = at(&a, i, i);
        let dinv = inv_mod(d, p);
        for j in i + 1..l {
            let f = at(&a, j, i) * dinv % p;
            if f == 0 {
                continue;
            }
            for k in 0..l {
                a[j * l + k] = (a[j * l + k] + p * p - f * a[i * l + k] % p) % p;
            }
            for k in 0..l {
                a[k * l + j] = (a[k * l + j] + p * p - f * a[k * l + i] % p) % p;
            }
        }
        diag.push(d);
    }
    diag
}

/// ψ̂(u): ψ of the determinant of the nondegenerate part of `u`.
pub fn disc_character(u: &FpSymMatrix, psi: CharacterKind) -> i8 {
    match psi {
        CharacterKind::Trivial => 1,
        CharacterKind::Quadratic => {
            let p = u.p;
            let det = congruence_diagonal(u).iter().fold(1u64, |acc, &d| acc * d % p);
            legendre(det as i64, p)
        }
    }
}

fn big_pow(p: u64, e: u32) -> BigInt {
    num_traits::pow(BigInt::from(p), e as usize)
}

/// `∏_{r=lo}^{hi} (p^{step·r} − 1)`.
fn prod_pm1(p: u64, lo: u32, hi: u32, step: u32) -> BigInt {
    (lo..=hi).fold(BigInt::one(), |acc, r| acc * (big_pow(p, step * r) - 1))
}

/// Closed form of `W^l_m(ψ)`.
pub fn w_count_closed(l: u32, m: u32, psi: CharacterKind, p: u64) -> BigInt {
    assert!(m <= l, "rank exceeds size");
    if m == 0 {
        return BigInt::one();
    }
    let num = prod_pm1(p, l - m + 1, l, 1);
    match (psi, m % 2) {
        (CharacterKind::Trivial, 0) => big_pow(p, m * (m + 2) / 4) * num / prod_pm1(p, 1, m / 2, 2),
        (CharacterKind::Trivial, _) => big_pow(p, (m * m - 1) / 4) * num / prod_pm1(p, 1, (m - 1) / 2, 2),
        (CharacterKind::Quadratic, 0) => {
            let sign = if legendre(-1, p) == -1 && (m / 2) % 2 == 1 { -1 } else { 1 };
            BigInt::from(sign) * big_pow(p, m * m / 4) * num / prod_pm1(p, 1, m / 2, 2)
        }
        (CharacterKind::Quadratic, _) => BigInt::zero(),
    }
}

/// `W^l_m(ψ)` by enumerating Sym^l(F_p).
pub fn w_count_bruteforce(l: u32, m: u32, psi: CharacterKind, p: u64, limit: u64) -> Result<BigInt, EnumError> {
    let total = enum_size(p, l * (l + 1) / 2, limit)?;
    let sum: i64 = (0..total)
        .into_par_iter()
        .map(|idx| {
            let u = FpSymMatrix::from_index(p, l as usize, idx);
            if sym_rank(&u) == m as usize {
                disc_character(&u, psi) as i64
            } else {
                0
            }
        })
        .sum();
    Ok(BigInt::from(sum))
}

/// Number of symmetric `l×l` matrices over F_p of each rank `0..=l`.
pub fn rank_counts(l: u32, p: u64, limit: u64) -> Result<Vec<u64>, EnumError> {
    let total = enum_size(p, l * (l + 1) / 2, limit)?;
    let counts = (0..total)
        .into_par_iter()
        .fold(
            || vec![0u64; l as usize + 1],
            |mut acc, idx| {
                acc[sym_rank(&FpSymMatrix::from_index(p, l as usize, idx))] += 1;
                acc
            },
        )
        .reduce(|| vec![0u64; l as usize + 1], |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect());
    Ok(counts)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrthForm {
    /// The identity form `1_m`.
    Identity,
    /// `E_m = diag(1, …, 1, δ)` with δ a non-residue.
    E,
}

impl OrthForm {
    pub fn matrix(self, p: u64, m: usize) -> FpSymMatrix {
        match self {
            OrthForm::Identity => FpSymMatrix::identity(p, m),
            OrthForm::E => FpSymMatrix::e_form(p, m),
        }
    }
}

/// Closed form of `♯O_m(1_m)` and `♯O_m(E_m)`.
pub fn orth_order_closed(m: u32, form: OrthForm, p: u64) -> BigInt {
    assert!(m >= 1);
    if m % 2 == 1 {
        return 2 * big_pow(p, (m - 1) * (m - 1) / 4) * prod_pm1(p, 1, (m - 1) / 2, 2);
    }
    let h = m / 2;
    let chi = if legendre(-1, p) == -1 && h % 2 == 1 { -1 } else { 1 };
    let mid = match form {
        OrthForm::Identity => big_pow(p, h) - chi,
        OrthForm::E => big_pow(p, h) + chi,
    };
    2 * big_pow(p, (m * m - 2 * m) / 4) * mid * prod_pm1(p, 1, h - 1, 2)
}

/// `♯{γ ∈ GL_m(F_p) : ᵗγAγ = A}` by enumerating all `m×m` matrices.
pub fn orth_order_bruteforce(a: &FpSymMatrix, limit: u64) -> Result<u64, EnumError> {
    let m = a.size;
    let p = a.p;
    let total = enum_size(p, (m * m) as u32, limit)?;
    let count = (0..total)
        .into_par_iter()
        .filter(|&idx| {
            let mut g = vec![0u64; m * m];
            let mut x = idx;
            for e in g.iter_mut() {
                *e = x % p;
                x /= p;
            }
            rank_mod_p(p, m, m, &g) == m && a.congruent(&g) == *a
        })
        .count();
    Ok(count as u64)
}

/// `♯GL_l(F_p) = p^{l(l−1)/2} ∏_{r=1}^{l} (p^r − 1)`.
pub fn gl_order(l: u32, p: u64) -> BigInt {
    big_pow(p, l * (l.saturating_sub(1)) / 2) * prod_pm1(p, 1, l, 1)
}

/// Order of the stabilizer in GL_l of `T = form ⊕ 0_{l−m}` under `u ↦ ᵗγuγ`.
pub fn stabilizer_order(l: u32, m: u32, form: OrthForm, p: u64) -> BigInt {
    let orth = if m == 0 { BigInt::one() } else { orth_order_closed(m, form, p) };
    orth * big_pow(p, m * (l - m)) * gl_order(l - m, p)
}

/// Number of rank-`m` matrices in Sym^l(F_p) whose nondegenerate part has discriminant class `form`.
pub fn class_count_bruteforce(l: u32, m: u32, form: OrthForm, p: u64, limit: u64) -> Result<u64, EnumError> {
    let total = enum_size(p, l * (l + 1) / 2, limit)?;
    let target = disc_character(&form.matrix(p, m.max(1) as usize), CharacterKind::Quadratic);
    let count = (0..total)
        .into_par_iter()
        .filter(|&idx| {
            let u = FpSymMatrix::from_index(p, l as usize, idx);
            sym_rank(&u) == m as usize && (m == 0 || disc_character(&u, CharacterKind::Quadratic) == target)
        })
        .count();
    Ok(count as u64)
}
