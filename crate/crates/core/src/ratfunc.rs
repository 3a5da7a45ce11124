//! Polynomials and rational functions in `X = p^{-2s}` over Q(i)(√p).
//!
//! `RatFunc` is kept in canonical form: numerator and denominator coprime,
//! denominator scaled so that its lowest-degree nonzero coefficient is 1,
//! and zero represented as `0/1`. Exponents `c0 + c1·s` of `p` that are not
//! yet folded into `X` are tracked separately by [`AffineExponent`].

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactscalar::{format_rational, parse_rational, rat, rational_pow, QuadScalar, QuadScalarJson, ScalarError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RatFuncError {
    #[error("division by the zero rational function")]
    DivisionByZero,
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("exponent {0} is not representable as p^c0·X^j with half-integral c0 and integral j")]
    NotRepresentable(String),
    #[error("pole at the evaluation point")]
    Pole,
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// Dense polynomial in `X`; `coeffs[d]` is the coefficient of `X^d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    p: u64,
    coeffs: Vec<QuadScalar>,
}

impl Poly {
    /// Builds a polynomial and strips trailing zeros.
    pub fn new(p: u64, coeffs: Vec<QuadScalar>) -> Self {
        for c in &coeffs {
            assert_eq!(c.prime(), p, "ring tag mismatch in polynomial coefficients");
        }
        let mut out = Poly { p, coeffs };
        out.trim();
        out
    }

    pub fn zero(p: u64) -> Self {
        Poly { p, coeffs: Vec::new() }
    }

    pub fn one(p: u64) -> Self {
        Self::constant(QuadScalar::one(p))
    }

    pub fn constant(c: QuadScalar) -> Self {
        Self::new(c.prime(), vec![c])
    }

    /// `c·X^d`.
    pub fn monomial(c: QuadScalar, d: usize) -> Self {
        let p = c.prime();
        let mut coeffs = vec![QuadScalar::zero(p); d];
        coeffs.push(c);
        Self::new(p, coeffs)
    }

    /// Polynomial with integer coefficients, lowest degree first.
    pub fn from_ints(p: u64, coeffs: &[i64]) -> Self {
        Self::new(p, coeffs.iter().map(|&c| QuadScalar::from_int(p, c)).collect())
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn coeffs(&self) -> &[QuadScalar] {
        &self.coeffs
    }

    /// Coefficient of `X^d`, zero beyond the degree.
    pub fn coeff(&self, d: usize) -> QuadScalar {
        self.coeffs.get(d).cloned().unwrap_or_else(|| QuadScalar::zero(self.p))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> Option<&QuadScalar> {
        self.coeffs.last()
    }

    /// Index of the lowest nonzero coefficient.
    pub fn low_degree(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    fn check(&self, o: &Self) {
        assert_eq!(self.p, o.p, "ring tag mismatch: p = {} vs p = {}", self.p, o.p);
    }

    pub fn add(&self, o: &Self) -> Self {
        self.check(o);
        let n = self.coeffs.len().max(o.coeffs.len());
        let coeffs = (0..n)
            .map(|d| match (self.coeffs.get(d), o.coeffs.get(d)) {
                (Some(x), Some(y)) => x + y,
                (Some(x), None) => x.clone(),
                (None, Some(y)) => y.clone(),
                (None, None) => unreachable!(),
            })
            .collect();
        Self::new(self.p, coeffs)
    }

    pub fn neg(&self) -> Self {
        Poly { p: self.p, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.check(o);
        if self.is_zero() || o.is_zero() {
            return Self::zero(self.p);
        }
        if self.is_one() {
            return o.clone();
        }
        if o.is_one() {
            return self.clone();
        }
        let mut out = vec![QuadScalar::zero(self.p); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, x) in self.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in o.coeffs.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                out[i + j] = &out[i + j] + &(x * y);
            }
        }
        Self::new(self.p, out)
    }

    pub fn scale(&self, c: &QuadScalar) -> Self {
        if c.is_one() {
            return self.clone();
        }
        Self::new(self.p, self.coeffs.iter().map(|x| x * c).collect())
    }

    /// Multiplies by `X^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut coeffs = vec![QuadScalar::zero(self.p); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Poly { p: self.p, coeffs }
    }

    /// Scales so the leading coefficient is 1.
    pub fn monic(&self) -> Self {
        match self.lead() {
            None => self.clone(),
            Some(l) if l.is_one() => self.clone(),
            Some(l) => self.scale(&l.inv().expect("nonzero lead")),
        }
    }

    /// Euclidean division `self = q·d + r` with `deg r < deg d`.
    pub fn div_rem(&self, d: &Self) -> Result<(Self, Self), RatFuncError> {
        self.check(d);
        let dd = d.degree().ok_or(RatFuncError::DivisionByZero)?;
        let lead_inv = d.lead().unwrap().inv()?;
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return Ok((Self::zero(self.p), self.clone()));
        }
        let mut q = vec![QuadScalar::zero(self.p); r.len() - dd];
        for top in (dd..r.len()).rev() {
            if r[top].is_zero() {
                continue;
            }
            let c = &r[top] * &lead_inv;
            let shift = top - dd;
            for (j, y) in d.coeffs.iter().enumerate() {
                if !y.is_zero() {
                    r[shift + j] = &r[shift + j] - &(&c * y);
                }
            }
            q[shift] = c;
        }
        r.truncate(dd);
        Ok((Self::new(self.p, q), Self::new(self.p, r)))
    }

    /// Division known to be exact; panics otherwise.
    pub fn exact_div(&self, d: &Self) -> Self {
        if d.is_one() {
            return self.clone();
        }
        let (q, r) = self.div_rem(d).expect("nonzero divisor");
        assert!(r.is_zero(), "inexact polynomial division");
        q
    }

    /// Monic greatest common divisor; `gcd(0, 0) = 0`.
    pub fn gcd(&self, o: &Self) -> Self {
        self.check(o);
        if self.is_zero() {
            return o.monic();
        }
        if o.is_zero() {
            return self.monic();
        }
        if self.is_constant() || o.is_constant() {
            return Self::one(self.p);
        }
        let (mut a, mut b) =
            if self.coeffs.len() >= o.coeffs.len() { (self.clone(), o.monic()) } else { (o.clone(), self.monic()) };
        loop {
            let (_, r) = a.div_rem(&b).expect("nonzero divisor");
            if r.is_zero() {
                return b;
            }
            if r.is_constant() {
                return Self::one(self.p);
            }
            a = b;
            b = r.monic();
        }
    }

    pub fn eval(&self, x: &QuadScalar) -> QuadScalar {
        let mut acc = QuadScalar::zero(self.p);
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * x) + c;
        }
        acc
    }

    /// `X^D · self(c/X)` for `D ≥ deg self`.
    fn reflect(&self, c: &QuadScalar, big_d: usize) -> Self {
        let mut out = vec![QuadScalar::zero(self.p); big_d + 1];
        let mut cp = QuadScalar::one(self.p);
        for (i, a) in self.coeffs.iter().enumerate() {
            if !a.is_zero() {
                out[big_d - i] = a * &cp;
            }
            cp = &cp * c;
        }
        Self::new(self.p, out)
    }

    pub fn all_coeffs(&self, pred: impl Fn(&QuadScalar) -> bool) -> bool {
        self.coeffs.iter().all(pred)
    }
}

fn fmt_term(c: &QuadScalar, d: usize, first: bool) -> String {
    let s = c.to_string();
    let simple = !s.contains(' ');
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) if simple => (true, rest.to_string()),
        _ => (false, s.clone()),
    };
    let body = if simple { body } else { format!("({body})") };
    let mono = match d {
        0 => body,
        _ => {
            let x = if d == 1 { "X".to_string() } else { format!("X^{d}") };
            if body == "1" {
                x
            } else {
                format!("{body}*{x}")
            }
        }
    };
    match (first, neg) {
        (true, false) => mono,
        (true, true) => format!("-{mono}"),
        (false, false) => format!(" + {mono}"),
        (false, true) => format!(" - {mono}"),
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (d, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            write!(f, "{}", fmt_term(c, d, first))?;
            first = false;
        }
        Ok(())
    }
}

/// Canonical rational function `num/den` in `X = p^{-2s}`.
#[derive(Clone, Debug)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl PartialEq for RatFunc {
    /// Cross-multiplication, independent of the normal form.
    fn eq(&self, o: &Self) -> bool {
        self.num.p == o.num.p && self.num.mul(&o.den) == o.num.mul(&self.den)
    }
}

impl Eq for RatFunc {}

impl RatFunc {
    /// Canonicalizes `num/den`.
    pub fn new(num: Poly, den: Poly) -> Result<Self, RatFuncError> {
        if den.is_zero() {
            return Err(RatFuncError::ZeroDenominator);
        }
        num.check(&den);
        let g = num.gcd(&den);
        Ok(Self::normalize_coprime(num.exact_div(&g), den.exact_div(&g)))
    }

    /// Scales a coprime pair into canonical form.
    fn normalize_coprime(num: Poly, den: Poly) -> Self {
        let p = num.p;
        if num.is_zero() {
            return Self::zero(p);
        }
        let low = den.low_degree().expect("nonzero denominator");
        let c = &den.coeffs[low];
        if c.is_one() {
            return RatFunc { num, den };
        }
        let ci = c.inv().expect("nonzero");
        RatFunc { num: num.scale(&ci), den: den.scale(&ci) }
    }

    pub fn zero(p: u64) -> Self {
        RatFunc { num: Poly::zero(p), den: Poly::one(p) }
    }

    pub fn one(p: u64) -> Self {
        Self::constant(QuadScalar::one(p))
    }

    pub fn constant(c: QuadScalar) -> Self {
        let p = c.prime();
        RatFunc { num: Poly::constant(c), den: Poly::one(p) }
    }

    pub fn from_int(p: u64, n: i64) -> Self {
        Self::constant(QuadScalar::from_int(p, n))
    }

    pub fn from_rational(p: u64, r: BigRational) -> Self {
        Self::constant(QuadScalar::from_rational(p, r))
    }

    pub fn from_poly(num: Poly) -> Self {
        let p = num.p;
        RatFunc { num, den: Poly::one(p) }
    }

    /// `c·X^j` for any integer `j`.
    pub fn monomial(c: QuadScalar, j: i64) -> Self {
        let p = c.prime();
        if c.is_zero() {
            return Self::zero(p);
        }
        if j >= 0 {
            RatFunc { num: Poly::monomial(c, j as usize), den: Poly::one(p) }
        } else {
            RatFunc { num: Poly::constant(c), den: Poly::monomial(QuadScalar::one(p), j.unsigned_abs() as usize) }
        }
    }

    /// `X^j`.
    pub fn x_pow(p: u64, j: i64) -> Self {
        Self::monomial(QuadScalar::one(p), j)
    }

    /// `1 − c·X^d`.
    pub fn one_minus(c: QuadScalar, d: usize) -> Self {
        let p = c.prime();
        Self::from_poly(Poly::one(p).sub(&Poly::monomial(c, d)))
    }

    pub fn prime(&self) -> u64 {
        self.num.p
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    /// Structural identity of canonical representations.
    pub fn identical(&self, o: &Self) -> bool {
        self.num == o.num && self.den == o.den
    }

    /// Single-term value `c·X^j`, if it is one.
    pub fn as_monomial(&self) -> Option<(QuadScalar, i64)> {
        let single = |q: &Poly| {
            let lo = q.low_degree()?;
            (lo == q.degree()?).then(|| (q.coeffs[lo].clone(), lo as i64))
        };
        let (cn, dn) = single(&self.num)?;
        let (cd, dd) = single(&self.den)?;
        Some((cn.checked_div(&cd).ok()?, dn - dd))
    }

    pub fn add(&self, o: &Self) -> Self {
        self.num.check(&o.num);
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            let num = self.num.add(&o.num);
            return Self::new(num, self.den.clone()).expect("nonzero den");
        }
        let d1 = self.den.gcd(&o.den);
        if d1.is_one() {
            let num = self.num.mul(&o.den).add(&o.num.mul(&self.den));
            return Self::normalize_coprime(num, self.den.mul(&o.den));
        }
        let b1 = self.den.exact_div(&d1);
        let d2 = o.den.exact_div(&d1);
        let t = self.num.mul(&d2).add(&o.num.mul(&b1));
        if t.is_zero() {
            return Self::zero(self.prime());
        }
        let g = t.gcd(&d1);
        let num = t.exact_div(&g);
        let den = b1.mul(&o.den.exact_div(&g));
        Self::normalize_coprime(num, den)
    }

    pub fn neg(&self) -> Self {
        RatFunc { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.num.check(&o.num);
        if self.is_zero() || o.is_zero() {
            return Self::zero(self.prime());
        }
        if self.is_one() {
            return o.clone();
        }
        if o.is_one() {
            return self.clone();
        }
        let g1 = self.num.gcd(&o.den);
        let g2 = o.num.gcd(&self.den);
        let num = self.num.exact_div(&g1).mul(&o.num.exact_div(&g2));
        let den = self.den.exact_div(&g2).mul(&o.den.exact_div(&g1));
        Self::normalize_coprime(num, den)
    }

    pub fn inv(&self) -> Result<Self, RatFuncError> {
        if self.is_zero() {
            return Err(RatFuncError::DivisionByZero);
        }
        Ok(Self::normalize_coprime(self.den.clone(), self.num.clone()))
    }

    pub fn div(&self, o: &Self) -> Result<Self, RatFuncError> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn scale(&self, c: &QuadScalar) -> Self {
        if c.is_zero() {
            return Self::zero(self.prime());
        }
        RatFunc { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn pow(&self, e: i64) -> Result<Self, RatFuncError> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc = Self::one(self.prime());
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base);
        }
        Ok(acc)
    }

    /// The substitution `s ↦ κ_n − s`, i.e. `X ↦ p^{−(n+1)}/X`.
    pub fn substitute_fe(&self, n: u32) -> Self {
        let p = self.prime();
        let c = QuadScalar::p_power(p, -(n as i64 + 1));
        self.substitute_reciprocal(&c)
    }

    /// `X ↦ c/X` for a nonzero scalar `c`.
    pub fn substitute_reciprocal(&self, c: &QuadScalar) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let big_d = self.num.degree().unwrap().max(self.den.degree().unwrap());
        Self::normalize_coprime(self.num.reflect(c, big_d), self.den.reflect(c, big_d))
    }

    pub fn eval(&self, x: &QuadScalar) -> Result<QuadScalar, RatFuncError> {
        let d = self.den.eval(x);
        if d.is_zero() {
            return Err(RatFuncError::Pole);
        }
        Ok(self.num.eval(x).checked_div(&d)?)
    }

    /// True when every coefficient of the canonical form satisfies `pred`.
    pub fn all_coeffs(&self, pred: impl Fn(&QuadScalar) -> bool + Copy) -> bool {
        self.num.all_coeffs(pred) && self.den.all_coeffs(pred)
    }

    /// True when the function lies in Q(X).
    pub fn is_rational_over_q(&self) -> bool {
        self.all_coeffs(QuadScalar::is_rational)
    }

    pub fn to_json(&self) -> RatFuncJson {
        RatFuncJson {
            num: self.num.coeffs.iter().map(QuadScalar::to_json).collect(),
            den: self.den.coeffs.iter().map(QuadScalar::to_json).collect(),
        }
    }

    pub fn from_json(p: u64, j: &RatFuncJson) -> Result<Self, RatFuncError> {
        let poly = |v: &[QuadScalarJson]| -> Result<Poly, RatFuncError> {
            let coeffs = v.iter().map(|c| QuadScalar::from_json(p, c)).collect::<Result<Vec<_>, _>>()?;
            Ok(Poly::new(p, coeffs))
        };
        Self::new(poly(&j.num)?, poly(&j.den)?)
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            return write!(f, "{}", self.num);
        }
        let wrap = |q: &Poly| {
            let s = q.to_string();
            if q.coeffs.iter().filter(|c| !c.is_zero()).count() > 1 {
                format!("({s})")
            } else {
                s
            }
        };
        write!(f, "{} / {}", wrap(&self.num), wrap(&self.den))
    }
}

/// Wire form of a `RatFunc`; index is the degree in `X`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatFuncJson {
    pub num: Vec<QuadScalarJson>,
    pub den: Vec<QuadScalarJson>,
}

/// The exponent `c0 + c1·s` of `p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffineExponent {
    pub c0: BigRational,
    pub c1: BigRational,
}

impl AffineExponent {
    pub fn new(c0: BigRational, c1: BigRational) -> Self {
        AffineExponent { c0, c1 }
    }

    pub fn zero() -> Self {
        Self::new(BigRational::zero(), BigRational::zero())
    }

    /// `l(s, j) = n(k/2 − s) + 2sj − j(j+1)/2`.
    pub fn exponent_l(n: i64, k: i64, j: i64) -> Self {
        Self::new(rat(n * k, 2) - rat(j * (j + 1), 2), rat(2 * j - n, 1))
    }

    /// The global prefactor exponent `n(k/2 − s)`.
    pub fn prefactor(n: i64, k: i64) -> Self {
        Self::new(rat(n * k, 2), rat(-n, 1))
    }

    /// Composition with `s ↦ κ_n − s`, `κ_n = (n+1)/2`.
    pub fn reflect(&self, n: i64) -> Self {
        let kappa = rat(n + 1, 2);
        Self::new(&self.c0 + &self.c1 * kappa, -&self.c1)
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(&self.c0 + &o.c0, &self.c1 + &o.c1)
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::new(&self.c0 - &o.c0, &self.c1 - &o.c1)
    }

    pub fn eval_at(&self, s: &BigRational) -> BigRational {
        &self.c0 + &self.c1 * s
    }

    /// `p^{c0 + c1·s} = p^{c0}·X^{−c1/2}`.
    pub fn to_monomial(&self, p: u64) -> Result<RatFunc, RatFuncError> {
        let two = BigRational::from_integer(BigInt::from(2));
        let half_c1 = &self.c1 / &two;
        let twice_c0 = &self.c0 * &two;
        if !half_c1.is_integer() || !twice_c0.is_integer() {
            return Err(RatFuncError::NotRepresentable(self.to_string()));
        }
        let j: i64 =
            (-half_c1).to_integer().try_into().map_err(|_| RatFuncError::NotRepresentable(self.to_string()))?;
        let h: i64 = twice_c0.to_integer().try_into().map_err(|_| RatFuncError::NotRepresentable(self.to_string()))?;
        Ok(RatFunc::monomial(QuadScalar::embed(p, BigRational::one(), h), j))
    }

    /// Inverse of [`to_monomial`](Self::to_monomial): reads `p^{h/2}·X^j` back as an exponent.
    pub fn from_monomial(f: &RatFunc) -> Option<Self> {
        let p = f.prime();
        let (c, j) = f.as_monomial()?;
        let (r, half) = if c.is_rational() {
            (c.as_rational()?.clone(), 0)
        } else if c.a().is_zero() && c.b().is_real() {
            (c.b().re.clone(), 1)
        } else {
            return None;
        };
        let e = p_adic_power(&r, p)?;
        Some(Self::new(rat(2 * e + half, 2), rat(-2 * j, 1)))
    }

    pub fn to_json(&self) -> AffineExponentJson {
        AffineExponentJson { c0: format_rational(&self.c0), c1: format_rational(&self.c1) }
    }

    pub fn from_json(j: &AffineExponentJson) -> Result<Self, ScalarError> {
        Ok(Self::new(parse_rational(&j.c0)?, parse_rational(&j.c1)?))
    }
}

/// `e` with `r = p^e`, if `r` is an exact power of `p`.
fn p_adic_power(r: &BigRational, p: u64) -> Option<i64> {
    if !r.is_positive() {
        return None;
    }
    let pb = BigInt::from(p);
    let strip = |mut n: BigInt| {
        let mut e = 0i64;
        while (&n % &pb).is_zero() {
            n /= &pb;
            e += 1;
        }
        (n, e)
    };
    let (nr, en) = strip(r.numer().clone());
    let (dr, ed) = strip(r.denom().clone());
    (nr.is_one() && dr.is_one()).then_some(en - ed)
}

impl fmt::Display for AffineExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + ({})*s", self.c0, self.c1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineExponentJson {
    pub c0: String,
    pub c1: String,
}

/// `p^e` as a `QuadScalar` constant rational function.
pub fn p_power_rf(p: u64, e: i64) -> RatFunc {
    RatFunc::from_rational(p, rational_pow(p, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactscalar::rat_int;

    fn lin(p: u64, c0: i64, c1: i64) -> Poly {
        Poly::from_ints(p, &[c0, c1])
    }

    #[test]
    fn cancellation_to_one() {
        let p = 3;
        let f = RatFunc::new(lin(p, 1, -3), lin(p, 1, -9)).unwrap();
        let g = RatFunc::new(lin(p, 1, -9), lin(p, 1, -3)).unwrap();
        assert!(f.mul(&g).is_one());
        assert!(f.mul(&f.inv().unwrap()).is_one());
    }

    #[test]
    fn geometric_sum() {
        let p = 5;
        let f = RatFunc::new(Poly::from_ints(p, &[0, 1]), lin(p, 1, -1)).unwrap();
        let g = f.add(&RatFunc::one(p));
        assert!(g.identical(&RatFunc::new(Poly::one(p), lin(p, 1, -1)).unwrap()));
    }

    #[test]
    fn canonical_denominator() {
        let p = 3;
        let f = RatFunc::new(Poly::from_ints(p, &[2, 2]), Poly::from_ints(p, &[0, 4, 4])).unwrap();
        assert!(f.identical(&RatFunc::new(Poly::from_ints(p, &[0, 2]), Poly::from_ints(p, &[0, 0, 4])).unwrap()));
        assert_eq!(f.den().coeffs()[1], QuadScalar::one(p));
        assert_eq!(f.num().coeffs()[0], QuadScalar::from_rational(p, rat(1, 2)));
        assert!(f.den().coeffs()[0].is_zero());
    }

    #[test]
    fn substitute_x_n1() {
        let f = RatFunc::x_pow(3, 1);
        let g = f.substitute_fe(1);
        let expect = RatFunc::new(Poly::one(3), Poly::from_ints(3, &[0, 9])).unwrap();
        assert!(g.identical(&expect));
        assert!(g.substitute_fe(1).identical(&f));
        let c = RatFunc::from_int(3, 7);
        assert!(c.substitute_fe(4).identical(&c));
    }

    #[test]
    fn exponent_examples() {
        let e = AffineExponent::exponent_l(2, 4, 0);
        assert_eq!(e, AffineExponent::new(rat_int(4), rat_int(-2)));
        assert!(AffineExponent::zero().to_monomial(3).unwrap().is_one());
        let m = AffineExponent::new(rat_int(-1), rat_int(-2)).to_monomial(3).unwrap();
        assert!(m.identical(&RatFunc::monomial(QuadScalar::from_rational(3, rat(1, 3)), 1)));
        let m = AffineExponent::new(rat(3, 2), rat_int(-2)).to_monomial(3).unwrap();
        assert!(m.identical(&RatFunc::monomial(QuadScalar::embed(3, rat_int(1), 3), 1)));
        assert_eq!(AffineExponent::from_monomial(&m), Some(AffineExponent::new(rat(3, 2), rat_int(-2))));
        assert!(matches!(
            AffineExponent::new(rat_int(0), rat_int(-1)).to_monomial(3),
            Err(RatFuncError::NotRepresentable(_))
        ));
    }

    #[test]
    fn display() {
        let p = 3;
        let f = RatFunc::new(lin(p, 1, -9), Poly::from_ints(p, &[1, 0, -243])).unwrap();
        assert_eq!(f.to_string(), "(1 - 9*X) / (1 - 243*X^2)");
    }

    #[test]
    fn zero_denominator_rejected() {
        assert_eq!(RatFunc::new(Poly::one(3), Poly::zero(3)).unwrap_err(), RatFuncError::ZeroDenominator);
        assert_eq!(RatFunc::zero(3).inv().unwrap_err(), RatFuncError::DivisionByZero);
    }
}
