//! Exact scalars: rationals, Gaussian rationals and the field Q(i)(√p).
//!
//! Every symbolic value in the crate has coefficients in `QuadScalar`, an
//! element `a + b·√p` with `a, b ∈ Q(i)`. The prime `p` is carried as a ring
//! tag and checked on every binary operation.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("ring tag mismatch: p = {left} vs p = {right}")]
    RingMismatch { left: u64, right: u64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("malformed rational literal {0:?}")]
    Parse(String),
}

/// Builds the rational `n/d`.
pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Builds the integer `n` as a rational.
pub fn rat_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Formats a rational as `"n/d"`, always with an explicit denominator.
pub fn format_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `"n/d"` or `"n"`.
pub fn parse_rational(s: &str) -> Result<BigRational, ScalarError> {
    let bad = || ScalarError::Parse(s.to_string());
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

/// `base^e` as an exact rational, `e` may be negative.
pub fn rational_pow(base: u64, e: i64) -> BigRational {
    let mag = num_traits::pow(BigInt::from(base), e.unsigned_abs() as usize);
    if e >= 0 {
        BigRational::from_integer(mag)
    } else {
        BigRational::new(BigInt::one(), mag)
    }
}

/// An element `re + im·i` of Q(i).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GaussRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRational { re, im }
    }

    pub fn zero() -> Self {
        Self::new(BigRational::zero(), BigRational::zero())
    }

    pub fn one() -> Self {
        Self::from_rational(BigRational::one())
    }

    pub fn i() -> Self {
        Self::new(BigRational::zero(), BigRational::one())
    }

    pub fn from_rational(r: BigRational) -> Self {
        Self::new(r, BigRational::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -&self.im)
    }

    /// `re² + im²`.
    pub fn norm(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        if r.is_one() {
            return self.clone();
        }
        Self::new(&self.re * r, &self.im * r)
    }

    pub fn inv(&self) -> Result<Self, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        if self.is_real() {
            return Ok(Self::from_rational(self.re.recip()));
        }
        let n = self.norm();
        Ok(Self::new(&self.re / &n, -&self.im / &n))
    }
}

impl<'a> Add<&'a GaussRational> for &'a GaussRational {
    type Output = GaussRational;
    fn add(self, o: &GaussRational) -> GaussRational {
        GaussRational::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl<'a> Sub<&'a GaussRational> for &'a GaussRational {
    type Output = GaussRational;
    fn sub(self, o: &GaussRational) -> GaussRational {
        GaussRational::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl<'a> Mul<&'a GaussRational> for &'a GaussRational {
    type Output = GaussRational;
    fn mul(self, o: &GaussRational) -> GaussRational {
        if self.is_zero() || o.is_zero() {
            return GaussRational::zero();
        }
        match (self.is_real(), o.is_real()) {
            (true, true) => GaussRational::from_rational(&self.re * &o.re),
            (true, false) => o.scale(&self.re),
            (false, true) => self.scale(&o.re),
            (false, false) => {
                GaussRational::new(&self.re * &o.re - &self.im * &o.im, &self.re * &o.im + &self.im * &o.re)
            }
        }
    }
}

impl Neg for &GaussRational {
    type Output = GaussRational;
    fn neg(self) -> GaussRational {
        GaussRational::new(-&self.re, -&self.im)
    }
}

/// An element `a + b·√p` of Q(i)(√p), tagged with `p`.
///
/// The tag is normally an odd prime. The local-series oracle at `q = 2`
/// reuses the same type with tag 2, where only the rational part is used.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadScalar {
    p: u64,
    a: GaussRational,
    b: GaussRational,
}

impl QuadScalar {
    pub fn new(p: u64, a: GaussRational, b: GaussRational) -> Self {
        QuadScalar { p, a, b }
    }

    pub fn zero(p: u64) -> Self {
        Self::new(p, GaussRational::zero(), GaussRational::zero())
    }

    pub fn one(p: u64) -> Self {
        Self::from_rational(p, BigRational::one())
    }

    pub fn from_rational(p: u64, r: BigRational) -> Self {
        Self::new(p, GaussRational::from_rational(r), GaussRational::zero())
    }

    pub fn from_int(p: u64, n: i64) -> Self {
        Self::from_rational(p, rat_int(n))
    }

    pub fn from_bigint(p: u64, n: BigInt) -> Self {
        Self::from_rational(p, BigRational::from_integer(n))
    }

    /// The imaginary unit `i`.
    pub fn i_unit(p: u64) -> Self {
        Self::new(p, GaussRational::i(), GaussRational::zero())
    }

    /// `√p`.
    pub fn sqrt_p(p: u64) -> Self {
        Self::new(p, GaussRational::zero(), GaussRational::one())
    }

    /// `r · p^{h/2}`.
    pub fn embed(p: u64, r: BigRational, half_p_power: i64) -> Self {
        let whole = rational_pow(p, half_p_power.div_euclid(2));
        let v = r * whole;
        if half_p_power.rem_euclid(2) == 0 {
            Self::from_rational(p, v)
        } else {
            Self::new(p, GaussRational::zero(), GaussRational::from_rational(v))
        }
    }

    /// `p^e` for an integer exponent.
    pub fn p_power(p: u64, e: i64) -> Self {
        Self::from_rational(p, rational_pow(p, e))
    }

    /// `ε_p`: 1 when `p ≡ 1 mod 4`, `i` when `p ≡ 3 mod 4`.
    pub fn epsilon(p: u64) -> Self {
        if p % 4 == 1 {
            Self::one(p)
        } else {
            Self::i_unit(p)
        }
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn a(&self) -> &GaussRational {
        &self.a
    }

    pub fn b(&self) -> &GaussRational {
        &self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.b.is_zero() && self.a.im.is_zero() && self.a.re.is_one()
    }

    /// True when the value lies in Q.
    pub fn is_rational(&self) -> bool {
        self.b.is_zero() && self.a.is_real()
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        if self.is_rational() {
            Some(&self.a.re)
        } else {
            None
        }
    }

    /// The conjugate `a − b·√p`.
    pub fn conj_sqrt(&self) -> Self {
        Self::new(self.p, self.a.clone(), -&self.b)
    }

    /// The conjugate `ā + b̄·√p` under `i ↦ −i`.
    pub fn conj_i(&self) -> Self {
        Self::new(self.p, self.a.conj(), self.b.conj())
    }

    /// `a² − p·b²`, an element of Q(i).
    pub fn norm(&self) -> GaussRational {
        let pb2 = (&self.b * &self.b).scale(&rat_int(self.p as i64));
        &(&self.a * &self.a) - &pb2
    }

    fn check(&self, o: &Self) -> Result<(), ScalarError> {
        if self.p == o.p {
            Ok(())
        } else {
            Err(ScalarError::RingMismatch { left: self.p, right: o.p })
        }
    }

    fn tag(&self, o: &Self) {
        if let Err(e) = self.check(o) {
            panic!("{e}");
        }
    }

    pub fn checked_add(&self, o: &Self) -> Result<Self, ScalarError> {
        self.check(o)?;
        Ok(Self::new(self.p, &self.a + &o.a, &self.b + &o.b))
    }

    pub fn checked_sub(&self, o: &Self) -> Result<Self, ScalarError> {
        self.check(o)?;
        Ok(Self::new(self.p, &self.a - &o.a, &self.b - &o.b))
    }

    pub fn checked_mul(&self, o: &Self) -> Result<Self, ScalarError> {
        self.check(o)?;
        if self.is_zero() || o.is_zero() {
            return Ok(Self::zero(self.p));
        }
        if self.b.is_zero() && o.b.is_zero() {
            return Ok(Self::new(self.p, &self.a * &o.a, GaussRational::zero()));
        }
        let pr = rat_int(self.p as i64);
        let a = &(&self.a * &o.a) + &(&self.b * &o.b).scale(&pr);
        let b = &(&self.a * &o.b) + &(&self.b * &o.a);
        Ok(Self::new(self.p, a, b))
    }

    pub fn checked_div(&self, o: &Self) -> Result<Self, ScalarError> {
        self.check(o)?;
        self.checked_mul(&o.inv()?)
    }

    /// Multiplicative inverse via `(a − b√p)/(a² − p·b²)`.
    pub fn inv(&self) -> Result<Self, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        if self.b.is_zero() {
            return Ok(Self::new(self.p, self.a.inv()?, GaussRational::zero()));
        }
        let n_inv = self.norm().inv()?;
        let c = self.conj_sqrt();
        Ok(Self::new(self.p, &c.a * &n_inv, &c.b * &n_inv))
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        Self::new(self.p, self.a.scale(r), self.b.scale(r))
    }

    pub fn pow(&self, e: i64) -> Result<Self, ScalarError> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc = Self::one(self.p);
        for _ in 0..e.unsigned_abs() {
            acc = &acc * &base;
        }
        Ok(acc)
    }

    pub fn to_json(&self) -> QuadScalarJson {
        QuadScalarJson {
            a_re: format_rational(&self.a.re),
            a_im: format_rational(&self.a.im),
            b_re: format_rational(&self.b.re),
            b_im: format_rational(&self.b.im),
        }
    }

    pub fn from_json(p: u64, j: &QuadScalarJson) -> Result<Self, ScalarError> {
        Ok(Self::new(
            p,
            GaussRational::new(parse_rational(&j.a_re)?, parse_rational(&j.a_im)?),
            GaussRational::new(parse_rational(&j.b_re)?, parse_rational(&j.b_im)?),
        ))
    }
}

impl<'a> Add<&'a QuadScalar> for &'a QuadScalar {
    type Output = QuadScalar;
    fn add(self, o: &QuadScalar) -> QuadScalar {
        self.tag(o);
        QuadScalar::new(self.p, &self.a + &o.a, &self.b + &o.b)
    }
}

impl<'a> Sub<&'a QuadScalar> for &'a QuadScalar {
    type Output = QuadScalar;
    fn sub(self, o: &QuadScalar) -> QuadScalar {
        self.tag(o);
        QuadScalar::new(self.p, &self.a - &o.a, &self.b - &o.b)
    }
}

impl<'a> Mul<&'a QuadScalar> for &'a QuadScalar {
    type Output = QuadScalar;
    fn mul(self, o: &QuadScalar) -> QuadScalar {
        self.tag(o);
        self.checked_mul(o).expect("tags already checked")
    }
}

impl Neg for &QuadScalar {
    type Output = QuadScalar;
    fn neg(self) -> QuadScalar {
        QuadScalar::new(self.p, -&self.a, -&self.b)
    }
}

impl Neg for QuadScalar {
    type Output = QuadScalar;
    fn neg(self) -> QuadScalar {
        -&self
    }
}

/// Wire form of a `QuadScalar`; the prime is supplied by the enclosing context.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadScalarJson {
    pub a_re: String,
    pub a_im: String,
    pub b_re: String,
    pub b_im: String,
}

fn fmt_gauss(g: &GaussRational) -> (String, bool) {
    let re = (!g.re.is_zero()).then(|| g.re.to_string());
    let im = (!g.im.is_zero()).then(|| {
        if g.im.is_one() {
            "i".to_string()
        } else if (-&g.im).is_one() {
            "-i".to_string()
        } else {
            format!("{}*i", g.im)
        }
    });
    match (re, im) {
        (Some(r), None) => (r, false),
        (None, Some(i)) => (i, false),
        (Some(r), Some(i)) => {
            let sep = if g.im.is_negative() { " - " } else { " + " };
            (format!("{r}{sep}{}", i.trim_start_matches('-')), true)
        }
        (None, None) => ("0".to_string(), false),
    }
}

impl fmt::Display for QuadScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, a_compound) = fmt_gauss(&self.a);
        if self.b.is_zero() {
            return write!(f, "{a}");
        }
        let (b, b_compound) = fmt_gauss(&self.b);
        let b_term = if b_compound {
            format!("({b})*sqrt({})", self.p)
        } else if b == "1" {
            format!("sqrt({})", self.p)
        } else if b == "-1" {
            format!("-sqrt({})", self.p)
        } else {
            format!("{b}*sqrt({})", self.p)
        };
        if self.a.is_zero() {
            write!(f, "{b_term}")
        } else if a_compound {
            write!(f, "({a}) + {b_term}")
        } else {
            write!(f, "{a} + {b_term}")
        }
    }
}
