//! Degree-two local data for positive-definite half-integral binary forms.
//!
//! Covers the discriminant split `det(2N) = D_N·𝔣²`, the `p`-adic normal
//! form `N ≅ p^m(α, p^tβ)`, the character `χ_N^*`, the closed-form local
//! factor `F_N^{(p)}`, elementary-divisor data of rational symmetric
//! matrices, and an exact brute-force oracle for truncated local Siegel
//! series. The oracle sums `e(Tr(RN))` exactly: terms are bucketed by trace,
//! reduced modulo the cyclotomic polynomial and read off in the basis
//! `{1, g}` with `g` the quadratic Gauss sum.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactscalar::{rat_int, QuadScalar};
use crate::fpforms::{enum_size, is_prime, legendre, CharacterKind, EnumError};
use crate::ratfunc::{Poly, RatFunc};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Deg2Error {
    #[error("form ({0}, {1}, {2}) is not positive definite")]
    NotPositiveDefinite(i64, i64, i64),
    #[error("p = {0} is not an odd prime")]
    InvalidPrime(u64),
    #[error("inconsistent local invariants: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Enum(#[from] EnumError),
    #[error("exponential sum at level {level}, ord {ord} does not lie in Q(sqrt(q*))")]
    NonRationalSum { level: u32, ord: u32 },
    #[error("series did not stabilize: level {0} contributes")]
    NotStabilized(u32),
    #[error("quotient by the degenerate factor is not a polynomial: {0}")]
    NotPolynomial(String),
}

/// `N = [[a, b/2], [b/2, c]]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BinaryForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl BinaryForm {
    pub fn new(a: i64, b: i64, c: i64) -> Result<Self, Deg2Error> {
        if a <= 0 || 4 * a * c - b * b <= 0 {
            return Err(Deg2Error::NotPositiveDefinite(a, b, c));
        }
        Ok(BinaryForm { a, b, c })
    }

    /// `det(2N) = 4ac − b²`.
    pub fn det2n(&self) -> i64 {
        4 * self.a * self.c - self.b * self.b
    }
}

impl std::fmt::Display for BinaryForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.a, self.b, self.c)
    }
}

/// Reduced forms `0 ≤ b ≤ a ≤ c` with `det(2N) ≤ max_det`.
pub fn reduced_forms(max_det: i64) -> Vec<BinaryForm> {
    let mut out = Vec::new();
    for a in 1..=max_det {
        for b in 0..=a {
            for c in a..=max_det {
                let d = 4 * a * c - b * b;
                if d > max_det {
                    break;
                }
                if d > 0 {
                    out.push(BinaryForm { a, b, c });
                }
            }
        }
    }
    out
}

/// `v_q(n)` for `n ≠ 0`.
pub fn valuation(mut n: i64, q: u64) -> u32 {
    assert!(n != 0, "valuation of zero");
    let q = q as i64;
    let mut v = 0;
    while n % q == 0 {
        n /= q;
        v += 1;
    }
    v
}

fn valuation_or_inf(n: i64, q: u64) -> u32 {
    if n == 0 {
        u32::MAX
    } else {
        valuation(n, q)
    }
}

/// Prime factorization by trial division.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            let mut e = 0;
            while n.is_multiple_of(d) {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// `(a/q)` for `q` prime; at `q = 2` the table `0` (a even), `1` (a ≡ ±1 mod 8), `−1` (a ≡ ±5 mod 8).
pub fn kronecker(a: i64, q: u64) -> i8 {
    if q == 2 {
        return match a.rem_euclid(8) {
            1 | 7 => 1,
            3 | 5 => -1,
            _ => 0,
        };
    }
    legendre(a, q)
}

/// The Kronecker symbol `(a/n)` for `n ≥ 1`.
pub fn kronecker_symbol(a: i64, n: u64) -> i8 {
    assert!(n >= 1);
    factorize(n).iter().fold(1i8, |acc, &(q, e)| acc * kronecker(a, q).pow(e))
}

/// `det(2N) = D_N·𝔣²` with `−D_N` a fundamental discriminant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscriminantSplit {
    pub det2n: i64,
    pub d_n: i64,
    pub f: i64,
    pub f_q: BTreeMap<u64, u32>,
}

pub fn discriminant_split(n: &BinaryForm) -> DiscriminantSplit {
    let det = n.det2n();
    let mut sq = 1i64;
    let mut core = det;
    for (q, e) in factorize(det as u64) {
        sq *= (q as i64).pow(e / 2);
        core /= (q as i64).pow(2 * (e / 2));
    }
    let s = -core;
    let (d, f) = if s.rem_euclid(4) == 1 { (s, sq) } else { (4 * s, sq / 2) };
    let f_q = factorize(f as u64).into_iter().collect();
    DiscriminantSplit { det2n: det, d_n: -d, f, f_q }
}

/// `N ≅ p^m(α, p^tβ)` over Z_p.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalForm {
    pub m: u32,
    pub t: u32,
    /// `χ_p(α)`.
    pub alpha_class: i8,
}

pub fn padic_normal_form(n: &BinaryForm, p: u64) -> NormalForm {
    let (va, vb, vc) = (valuation_or_inf(n.a, p), valuation_or_inf(n.b, p), valuation_or_inf(n.c, p));
    let m = va.min(vb).min(vc);
    let pm = (p as i64).pow(m);
    // value of the form at a primitive vector with minimal valuation
    let alpha = if va == m {
        n.a
    } else if vc == m {
        n.c
    } else {
        n.a + n.b + n.c
    };
    let t = valuation(n.det2n(), p) - 2 * m;
    NormalForm { m, t, alpha_class: legendre(alpha / pm, p) }
}

/// Local invariants of `N` at an odd prime `p`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalProfile {
    pub p: u64,
    pub d_n: i64,
    pub f: i64,
    pub f_q: BTreeMap<u64, u32>,
    pub m: u32,
    pub t: u32,
    pub alpha_class: i8,
    pub chi_n_star_at_p: i8,
    pub l_n: u32,
    pub d_n_star: i64,
}

/// `p* = (−1)^{(p−1)/2} p`.
pub fn p_star(p: u64) -> i64 {
    if p % 4 == 1 {
        p as i64
    } else {
        -(p as i64)
    }
}

/// True when `d` is a fundamental discriminant (or 1).
pub fn is_fundamental_discriminant(d: i64) -> bool {
    if d == 1 {
        return true;
    }
    let squarefree = |n: i64| factorize(n.unsigned_abs()).iter().all(|&(_, e)| e == 1);
    match d.rem_euclid(4) {
        1 => squarefree(d),
        0 => {
            let e = d / 4;
            matches!(e.rem_euclid(4), 2 | 3) && squarefree(e)
        }
        _ => false,
    }
}

pub fn chi_n_star_data(n: &BinaryForm, p: u64) -> Result<LocalProfile, Deg2Error> {
    if p == 2 || !is_prime(p) {
        return Err(Deg2Error::InvalidPrime(p));
    }
    let split = discriminant_split(n);
    let nf = padic_normal_form(n, p);
    let d_n = split.d_n;
    let ps = p_star(p);
    // signed discriminant of χ_N^*
    let (d_star_signed, chi, l_n) = if nf.t.is_multiple_of(2) {
        (-d_n * ps, 0, nf.t / 2)
    } else {
        if d_n % p as i64 != 0 {
            return Err(Deg2Error::Inconsistent(format!("t odd but p does not divide D_N for {n}")));
        }
        let d = -d_n / ps;
        (d, kronecker(d, p), nf.t.div_ceil(2))
    };
    let f_p = split.f_q.get(&p).copied().unwrap_or(0);
    let ord_d = valuation(d_n, p);
    if (l_n + nf.m) as i64 != f_p as i64 + ord_d as i64 {
        return Err(Deg2Error::Inconsistent(format!("l_N mismatch for {n} at p = {p}")));
    }
    let d_n_star = d_star_signed.abs();
    let expected = if d_n % p as i64 == 0 { d_n / p as i64 } else { d_n * p as i64 };
    if d_n_star != expected || !is_fundamental_discriminant(d_star_signed) {
        return Err(Deg2Error::Inconsistent(format!("conductor mismatch for {n} at p = {p}")));
    }
    // χ^*(−1) read from the character table: (D/·) has period |D|
    let chi_minus_one = if d_n_star == 1 { 1 } else { kronecker_symbol(d_star_signed, (d_n_star - 1) as u64) };
    if chi_minus_one != -legendre(-1, p) {
        return Err(Deg2Error::Inconsistent(format!("chi*(-1) = {chi_minus_one} for {n} at p = {p}")));
    }
    Ok(LocalProfile {
        p,
        d_n,
        f: split.f,
        f_q: split.f_q,
        m: nf.m,
        t: nf.t,
        alpha_class: nf.alpha_class,
        chi_n_star_at_p: chi,
        l_n,
        d_n_star,
    })
}

/// `F_N^{(p)}` and the full `S_2^{(1)}(χ_p, N, 2s)` in `X = p^{−2s}`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalFactor {
    pub profile: LocalProfile,
    pub f: RatFunc,
    pub s_full: RatFunc,
}

fn p3x2_pow(p: u64, e: u32) -> RatFunc {
    RatFunc::monomial(QuadScalar::p_power(p, 3 * e as i64), 2 * e as i64)
}

pub fn f_local_p(n: &BinaryForm, p: u64) -> Result<LocalFactor, Deg2Error> {
    let prof = chi_n_star_data(n, p)?;
    let (m, l, chi) = (prof.m, prof.l_n, prof.chi_n_star_at_p as i64);
    let one = RatFunc::one(p);
    let mut bracket = one.sub(&p3x2_pow(p, l));
    if chi != 0 {
        let px = RatFunc::monomial(QuadScalar::from_int(p, chi * p as i64), 1);
        bracket = bracket.sub(&px.mul(&one.sub(&p3x2_pow(p, l - 1))));
    }
    // p^{(2−2s)m + 3/2 − 2s} = p^{2m} X^m · p√p · X
    let pre = RatFunc::monomial(QuadScalar::embed(p, rat_int(1), 4 * m as i64 + 3), m as i64 + 1);
    let f = pre.mul(&bracket).div(&one.sub(&p3x2_pow(p, 1))).expect("nonzero");
    let tail = RatFunc::one_minus(QuadScalar::p_power(p, 2), 2)
        .div(&RatFunc::one_minus(QuadScalar::from_int(p, chi * p as i64), 1))
        .expect("nonzero");
    let unit = QuadScalar::epsilon(p).scale(&rat_int(prof.alpha_class as i64));
    let s_full = f.mul(&tail).scale(&unit);
    Ok(LocalFactor { profile: prof, f, s_full })
}

/// `F(p^{−3}X^{−1}) = (p³X²)^{−(m+l_N)}·F(X)`.
pub fn verify_f_local_fe(n: &BinaryForm, p: u64) -> Result<bool, Deg2Error> {
    let lf = f_local_p(n, p)?;
    let e = lf.profile.m + lf.profile.l_n;
    let lhs = lf.f.substitute_fe(2);
    let rhs = lf.f.div(&p3x2_pow(p, e)).expect("nonzero");
    Ok(lhs == rhs)
}

type IMat = Vec<Vec<BigInt>>;

fn identity(r: usize) -> IMat {
    (0..r).map(|i| (0..r).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect()
}

fn mat_mul(a: &IMat, b: &IMat) -> IMat {
    let r = a.len();
    (0..r).map(|i| (0..r).map(|j| (0..r).map(|k| &a[i][k] * &b[k][j]).sum()).collect()).collect()
}

fn det(a: &IMat) -> BigInt {
    match a.len() {
        0 => BigInt::one(),
        1 => a[0][0].clone(),
        r => (0..r)
            .map(|j| {
                let minor: IMat =
                    (1..r).map(|i| (0..r).filter(|&k| k != j).map(|k| a[i][k].clone()).collect()).collect();
                let s = if j % 2 == 0 { BigInt::one() } else { -BigInt::one() };
                s * &a[0][j] * det(&minor)
            })
            .sum(),
    }
}

/// Inverse of a unimodular integer matrix via the adjugate.
fn unimodular_inverse(a: &IMat) -> IMat {
    let r = a.len();
    let d = det(a);
    assert!(d.abs().is_one(), "matrix is not unimodular");
    (0..r)
        .map(|i| {
            (0..r)
                .map(|j| {
                    let minor: IMat = (0..r)
                        .filter(|&k| k != j)
                        .map(|k| (0..r).filter(|&l| l != i).map(|l| a[k][l].clone()).collect())
                        .collect();
                    let s = if (i + j) % 2 == 0 { BigInt::one() } else { -BigInt::one() };
                    s * det(&minor) * &d
                })
                .collect()
        })
        .collect()
}

/// Smith normal form `P·A·Q = diag(d_1, …)` with `P, Q` unimodular.
fn smith(a: &IMat) -> (IMat, IMat, IMat) {
    let r = a.len();
    let mut d = a.clone();
    let mut p = identity(r);
    let mut q = identity(r);
    for k in 0..r {
        loop {
            // pivot: nonzero entry of smallest absolute value in the lower-right block
            let mut best: Option<(usize, usize)> = None;
            for i in k..r {
                for j in k..r {
                    if !d[i][j].is_zero() && best.is_none_or(|(bi, bj)| d[i][j].abs() < d[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else { return (p, d, q) };
            d.swap(k, bi);
            p.swap(k, bi);
            for row in d.iter_mut() {
                row.swap(k, bj);
            }
            for row in q.iter_mut() {
                row.swap(k, bj);
            }
            let mut clean = true;
            for i in k + 1..r {
                let f = d[i][k].div_floor(&d[k][k]);
                if !f.is_zero() {
                    for j in 0..r {
                        let t = &f * &d[k][j];
                        d[i][j] -= t;
                        let t = &f * &p[k][j];
                        p[i][j] -= t;
                    }
                }
                clean &= d[i][k].is_zero();
            }
            for j in k + 1..r {
                let f = d[k][j].div_floor(&d[k][k]);
                if !f.is_zero() {
                    for i in 0..r {
                        let t = &f * &d[i][k];
                        d[i][j] -= t;
                        let t = &f * &q[i][k];
                        q[i][j] -= t;
                    }
                }
                clean &= d[k][j].is_zero();
            }
            if !clean {
                continue;
            }
            // enforce d_k | every remaining entry
            let bad = (k + 1..r)
                .flat_map(|i| (k + 1..r).map(move |j| (i, j)))
                .find(|&(i, j)| !(&d[i][j] % &d[k][k]).is_zero());
            match bad {
                Some((i, _)) => {
                    for j in 0..r {
                        let t = d[i][j].clone();
                        d[k][j] += t;
                        let t = p[i][j].clone();
                        p[k][j] += t;
                    }
                }
                None => break,
            }
        }
    }
    (p, d, q)
}

/// Elementary-divisor data of a rational symmetric matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalSymClass {
    pub r: usize,
    /// `R` modulo Sym^r(Z), entries in `[0, 1)`.
    pub matrix: Vec<Vec<BigRational>>,
    pub delta: BigInt,
    pub nu: usize,
    pub psi_tilde: i8,
}

fn psi_big(psi: CharacterKind, a: &BigInt, p: u64) -> i8 {
    let r = a.mod_floor(&BigInt::from(p));
    let r: i64 = r.try_into().expect("residue fits");
    psi.eval(r, p)
}

/// `R = U·diag(λ_i/δ_i)·V` with `U, V ∈ SL_r(Z)`, `δ_1 | δ_2 | …`;
/// `δ(R) = ∏δ_i`, `ν = #{i : p ∤ δ_i}`, `ψ̃(R) = ψ(det W_4)∏_{i≤ν}ψ(δ_i)∏_{i>ν}ψ(λ_i)`, `W = V·ᵗU^{−1}`.
pub fn smith_profile(rm: &[Vec<BigRational>], p: u64, psi: CharacterKind) -> RationalSymClass {
    let r = rm.len();
    assert!(r <= 3, "size at most 3");
    for (i, row) in rm.iter().enumerate() {
        assert_eq!(row.len(), r, "square matrix expected");
        for (j, x) in row.iter().enumerate().take(i) {
            assert_eq!(x, &rm[j][i], "matrix is not symmetric");
        }
    }
    let l = rm.iter().flatten().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let a: IMat = rm
        .iter()
        .map(|row| row.iter().map(|x| (x * BigRational::from_integer(l.clone())).to_integer()).collect())
        .collect();
    let (pm, d, qm) = smith(&a);
    let mut u = unimodular_inverse(&pm);
    let mut v = unimodular_inverse(&qm);
    // reduced fractions λ_i/δ_i, δ_i > 0
    let mut fr: Vec<(BigInt, BigInt)> = (0..r)
        .map(|i| {
            let x = BigRational::new(d[i][i].clone(), l.clone());
            (x.numer().clone(), x.denom().clone())
        })
        .collect();
    // order by increasing δ (a divisibility chain)
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&x, &y| fr[x].1.cmp(&fr[y].1));
    u = (0..r).map(|i| order.iter().map(|&k| u[i][k].clone()).collect()).collect();
    v = order.iter().map(|&k| v[k].clone()).collect();
    fr = order.iter().map(|&k| fr[k].clone()).collect();
    // determinant +1 by flipping column 0 of U and row 0 of V
    if det(&u).is_negative() {
        for row in u.iter_mut() {
            row[0] = -&row[0];
        }
        fr[0].0 = -&fr[0].0;
    }
    if det(&v).is_negative() {
        for x in v[0].iter_mut() {
            *x = -&*x;
        }
        fr[0].0 = -&fr[0].0;
    }
    let pb = BigInt::from(p);
    let nu = fr.iter().filter(|(_, dl)| !(dl % &pb).is_zero()).count();
    let delta: BigInt = fr.iter().map(|(_, dl)| dl.clone()).product();
    let ut_inv = unimodular_inverse(&(0..r).map(|i| (0..r).map(|j| u[j][i].clone()).collect()).collect());
    let w = mat_mul(&v, &ut_inv);
    let w4: IMat = (nu..r).map(|i| (nu..r).map(|j| w[i][j].clone()).collect()).collect();
    let mut psi_tilde = psi_big(psi, &det(&w4), p);
    for (i, (lam, dl)) in fr.iter().enumerate() {
        psi_tilde *= if i < nu { psi_big(psi, dl, p) } else { psi_big(psi, lam, p) };
    }
    let matrix = rm.iter().map(|row| row.iter().map(|x| x - x.floor()).collect()).collect();
    RationalSymClass { r, matrix, delta, nu, psi_tilde }
}

/// Which local Siegel series the oracle sums.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesKind {
    /// `S_2^ν(ψ, N, 2s)_q`: classes with `ν(R) = ν`, weighted by `ψ̃_q(R)`.
    Stratified { nu: u32, psi: CharacterKind },
    /// The ordinary series: all classes, weight 1.
    Ordinary,
}

/// Exact contributions of the classes of each denominator level `e = 0..=depth`.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelSums {
    pub q: u64,
    pub depth: u32,
    pub by_level: Vec<Poly>,
}

impl LevelSums {
    /// The truncated series over classes of level at most `depth`.
    pub fn truncated(&self, depth: u32) -> Poly {
        let q = self.q;
        self.by_level.iter().take(depth as usize + 1).fold(Poly::zero(q), |acc, x| acc.add(x))
    }

    /// Smallest `d` such that no level in `(d, self.depth]` contributes.
    pub fn first_stable_depth(&self) -> u32 {
        (0..=self.depth).rev().find(|&e| !self.by_level[e as usize].is_zero()).unwrap_or(0)
    }
}

/// Reduces `Σ c_t ζ^t` (ζ a primitive `q^e`-th root of unity) modulo `Φ_{q^e}`.
fn cyclotomic_reduce(c: &mut [i64], q: usize) -> usize {
    let big = c.len();
    let step = big / q;
    let phi = big - step;
    for k in (phi..big).rev() {
        let v = c[k];
        if v != 0 {
            for j in 0..q - 1 {
                c[k - phi + j * step] -= v;
            }
            c[k] = 0;
        }
    }
    phi
}

/// Exact value of `Σ c_t ζ^t` as an element of Q(√q*) ⊂ Q(i)(√q).
fn cyclotomic_value(counts: &[i64], q: u64) -> Option<QuadScalar> {
    let mut z = counts.to_vec();
    let phi = cyclotomic_reduce(&mut z, q as usize);
    if z[1..phi].iter().all(|&x| x == 0) {
        return Some(QuadScalar::from_int(q, z[0]));
    }
    if q == 2 {
        return None;
    }
    let big = z.len();
    let step = big / q as usize;
    let mut g = vec![0i64; big];
    for t in 1..q {
        g[t as usize * step] = legendre(t as i64, q) as i64;
    }
    cyclotomic_reduce(&mut g, q as usize);
    let idx = (1..phi).find(|&k| g[k] != 0)?;
    let b = BigRational::new(BigInt::from(z[idx]), BigInt::from(g[idx]));
    let a = BigRational::from_integer(BigInt::from(z[0])) - &b * BigRational::from_integer(BigInt::from(g[0]));
    for k in 1..phi {
        if BigRational::from_integer(BigInt::from(z[k])) != &b * BigRational::from_integer(BigInt::from(g[k])) {
            return None;
        }
    }
    let gauss = &QuadScalar::epsilon(q) * &QuadScalar::sqrt_p(q);
    Some(&QuadScalar::from_rational(q, a) + &gauss.scale(&b))
}

/// `min(v_q(x), cap)` for `x ≥ 0`.
fn capped_val(mut x: i64, q: i64, cap: u32) -> u32 {
    if x == 0 {
        return cap;
    }
    let mut v = 0;
    while v < cap && x % q == 0 {
        x /= q;
        v += 1;
    }
    v
}

/// Sums over `R = u/q^depth`, `u ∈ Sym²(Z/q^depth)`, split by the exact level of `R`.
pub fn local_series_levels(
    n: &BinaryForm,
    q: u64,
    kind: SeriesKind,
    depth: u32,
    limit: u64,
) -> Result<LevelSums, Deg2Error> {
    if !is_prime(q) {
        return Err(Deg2Error::InvalidPrime(q));
    }
    if let SeriesKind::Stratified { psi: CharacterKind::Quadratic, .. } = kind {
        if q == 2 {
            return Err(Deg2Error::InvalidPrime(q));
        }
    }
    enum_size(q, 3 * depth, limit)?;
    let e = depth;
    let qi = q as i64;
    let big = qi.pow(e);
    let levels = e as usize + 1;
    let ords = 2 * e as usize + 1;
    let (a, b, c) = (n.a.rem_euclid(big), n.b.rem_euclid(big), n.c.rem_euclid(big));
    let slot = |lv: usize, ord: usize| (lv * ords + ord) * big as usize;
    let size = levels * ords * big as usize;
    let acc = (0..big)
        .into_par_iter()
        .fold(
            || vec![0i64; size],
            |mut acc, u1| {
                let v1 = capped_val(u1, qi, e);
                for u2 in 0..big {
                    let v12 = v1.min(capped_val(u2, qi, e));
                    for u3 in 0..big {
                        let b1 = v12.min(capped_val(u3, qi, e));
                        let tr = ((a * u1 + b * u2 + c * u3) % big) as usize;
                        if b1 == e {
                            let include = match kind {
                                SeriesKind::Ordinary => true,
                                SeriesKind::Stratified { nu, .. } => nu == 2,
                            };
                            if include {
                                acc[slot(0, 0) + tr] += 1;
                            }
                            continue;
                        }
                        let modulus = qi.pow(e + b1);
                        let d = (u1 * u3 - u2 * u2).rem_euclid(modulus);
                        let vd = capped_val(d, qi, e + b1);
                        let b2 = (vd - b1).min(e);
                        let nu_here = if b2 == e { 1 } else { 0 };
                        let level = (e - b1) as usize;
                        let ord = level + (e - b2) as usize;
                        let weight: i64 = match kind {
                            SeriesKind::Ordinary => 1,
                            SeriesKind::Stratified { nu, .. } if nu != nu_here => 0,
                            SeriesKind::Stratified { psi: CharacterKind::Trivial, .. } => 1,
                            SeriesKind::Stratified { psi: CharacterKind::Quadratic, .. } => {
                                let pb1 = qi.pow(b1);
                                if nu_here == 1 {
                                    let x = u1 / pb1;
                                    let unit = if x % qi != 0 { x } else { u3 / pb1 };
                                    legendre(unit, q) as i64
                                } else {
                                    legendre(d / qi.pow(vd), q) as i64
                                }
                            }
                        };
                        if weight != 0 {
                            acc[slot(level, ord) + tr] += weight;
                        }
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0i64; size],
            |mut x, y| {
                x.iter_mut().zip(&y).for_each(|(s, t)| *s += t);
                x
            },
        );
    let mut by_level = Vec::with_capacity(levels);
    for lv in 0..levels {
        let mut coeffs = Vec::with_capacity(ords);
        for ord in 0..ords {
            let s = slot(lv, ord);
            let bucket = &acc[s..s + big as usize];
            let v = if bucket.iter().all(|&x| x == 0) {
                QuadScalar::zero(q)
            } else {
                cyclotomic_value(bucket, q).ok_or(Deg2Error::NonRationalSum { level: lv as u32, ord: ord as u32 })?
            };
            coeffs.push(v);
        }
        by_level.push(Poly::new(q, coeffs));
    }
    Ok(LevelSums { q, depth, by_level })
}

/// `S_2^ν(ψ, N, 2s)_p` truncated to classes with denominator dividing `p^depth`.
pub fn local_series_bruteforce(
    n: &BinaryForm,
    p: u64,
    nu: u32,
    psi: CharacterKind,
    depth: u32,
    limit: u64,
) -> Result<Poly, Deg2Error> {
    Ok(local_series_levels(n, p, SeriesKind::Stratified { nu, psi }, depth, limit)?.truncated(depth))
}

/// A local series summed one level past the bound `v_q(det 2N) + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilizedSeries {
    pub series: Poly,
    pub bound: u32,
    pub checked_depth: u32,
    pub first_stable_depth: u32,
    pub levels: LevelSums,
}

pub fn stabilized_series(n: &BinaryForm, q: u64, kind: SeriesKind, limit: u64) -> Result<StabilizedSeries, Deg2Error> {
    let bound = valuation(n.det2n(), q) + 1;
    let levels = local_series_levels(n, q, kind, bound + 1, limit)?;
    if !levels.by_level[bound as usize + 1].is_zero() {
        return Err(Deg2Error::NotStabilized(bound + 1));
    }
    Ok(StabilizedSeries {
        series: levels.truncated(bound),
        bound,
        checked_depth: bound + 1,
        first_stable_depth: levels.first_stable_depth(),
        levels,
    })
}

/// `F_N^{(q)}` recovered from the ordinary local series at `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct FqExtraction {
    pub q: u64,
    pub f_q: u32,
    pub chi_n_at_q: i8,
    pub series: Poly,
    pub f_poly: Poly,
    pub fe_ok: bool,
    pub first_stable_depth: u32,
}

/// Divides the ordinary series by `(1 − X)(1 − q²X²)/(1 − χ_N(q)qX)` and checks
/// `F(q^{−3}X^{−1}) = (q³X²)^{−f_q}F(X)`.
pub fn extract_f_q(n: &BinaryForm, q: u64, limit: u64) -> Result<FqExtraction, Deg2Error> {
    let split = discriminant_split(n);
    let f_q = split.f_q.get(&q).copied().unwrap_or(0);
    let chi = kronecker(-split.d_n, q);
    let st = stabilized_series(n, q, SeriesKind::Ordinary, limit)?;
    let factor = RatFunc::one_minus(QuadScalar::one(q), 1)
        .mul(&RatFunc::one_minus(QuadScalar::p_power(q, 2), 2))
        .div(&RatFunc::one_minus(QuadScalar::from_int(q, chi as i64 * q as i64), 1))
        .expect("nonzero");
    let quotient = RatFunc::from_poly(st.series.clone()).div(&factor).expect("nonzero");
    if !quotient.is_polynomial() {
        return Err(Deg2Error::NotPolynomial(format!("{quotient} for {n} at q = {q}")));
    }
    let lhs = quotient.substitute_reciprocal(&QuadScalar::p_power(q, -3));
    let rhs = quotient.div(&p3x2_pow(q, f_q)).expect("nonzero");
    Ok(FqExtraction {
        q,
        f_q,
        chi_n_at_q: chi,
        series: st.series,
        f_poly: quotient.num().clone(),
        fe_ok: lhs == rhs,
        first_stable_depth: st.first_stable_depth,
    })
}
