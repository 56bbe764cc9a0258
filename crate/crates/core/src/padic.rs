//! Truncated p-adic integers: residues modulo `p^N`.
//!
//! Every statement made by the rest of the crate (unit-ness, ideal equality,
//! norm relations) is decided in `Z/p^N`, so this is the scalar type for all
//! group rings and matrices. Valuations are exact below `N`; the zero residue
//! reports valuation `N`, which stands for "at least `N`".

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest modulus we accept; keeps `a * b` inside `u128` with room to spare.
const MAX_MODULUS: u64 = 1 << 62;

/// The ring `Z/p^N` with `p > 3` prime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PadicContext {
    p: u64,
    prec: u32,
    modulus: u64,
}

impl PadicContext {
    pub fn new(p: u64, prec: u32) -> Result<Self> {
        if p <= 3 || !is_prime(p) {
            return Err(Error::BadContext(format!("p = {p} must be a prime > 3")));
        }
        if prec == 0 {
            return Err(Error::BadContext("precision must be at least 1".into()));
        }
        let mut modulus: u64 = 1;
        for _ in 0..prec {
            modulus = modulus
                .checked_mul(p)
                .filter(|&m| m <= MAX_MODULUS)
                .ok_or_else(|| Error::BadContext(format!("{p}^{prec} exceeds 2^62")))?;
        }
        Ok(PadicContext { p, prec, modulus })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// The precision exponent `N`.
    pub fn prec(&self) -> u32 {
        self.prec
    }

    /// `p^N`.
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Same prime, lower precision.
    pub fn truncate(&self, prec: u32) -> Result<Self> {
        if prec > self.prec {
            return Err(Error::BadContext(format!(
                "cannot raise precision from {} to {prec}",
                self.prec
            )));
        }
        PadicContext::new(self.p, prec)
    }

    pub fn reduce(&self, n: i128) -> PadicInt {
        PadicInt {
            ctx: *self,
            value: n.rem_euclid(self.modulus as i128) as u64,
        }
    }

    pub fn zero(&self) -> PadicInt {
        PadicInt { ctx: *self, value: 0 }
    }

    pub fn one(&self) -> PadicInt {
        PadicInt { ctx: *self, value: 1 }
    }

    /// `p^k`, zero once `k >= N`.
    pub fn p_pow(&self, k: u32) -> PadicInt {
        if k >= self.prec {
            return self.zero();
        }
        PadicInt {
            ctx: *self,
            value: self.p.pow(k),
        }
    }

    // Raw residue arithmetic, shared with the matrix and group-ring kernels.

    #[inline]
    pub(crate) fn add_raw(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }

    #[inline]
    pub(crate) fn sub_raw(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.modulus - b
        }
    }

    #[inline]
    pub(crate) fn mul_raw(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.modulus as u128) as u64
    }

    #[inline]
    pub(crate) fn neg_raw(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    pub(crate) fn valuation_raw(&self, mut a: u64) -> u32 {
        if a == 0 {
            return self.prec;
        }
        let mut v = 0;
        while a.is_multiple_of(self.p) {
            a /= self.p;
            v += 1;
        }
        v
    }

    /// Inverse of a residue that is prime to `p`.
    pub(crate) fn inv_raw(&self, a: u64) -> Option<u64> {
        let (g, x) = ext_gcd(a as i128, self.modulus as i128);
        if g != 1 {
            return None;
        }
        Some(x.rem_euclid(self.modulus as i128) as u64)
    }

    /// Splits a nonzero residue as `p^v * u` with `u` prime to `p`, returned as
    /// `(v, u)`; `u` is the exact integer quotient, a unit mod `p^N`.
    pub(crate) fn split_raw(&self, a: u64) -> (u32, u64) {
        debug_assert!(a != 0);
        let v = self.valuation_raw(a);
        (v, a / self.p.pow(v))
    }

    pub(crate) fn pow_raw(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.modulus;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul_raw(acc, base);
            }
            base = self.mul_raw(base, base);
            exp >>= 1;
        }
        acc
    }
}

impl fmt::Display for PadicContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z/{}^{}", self.p, self.prec)
    }
}

/// A residue modulo `p^N`, always kept in `[0, p^N)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PadicInt {
    ctx: PadicContext,
    value: u64,
}

impl PadicInt {
    pub fn new(ctx: PadicContext, n: i128) -> Self {
        ctx.reduce(n)
    }

    pub(crate) fn from_raw(ctx: PadicContext, value: u64) -> Self {
        debug_assert!(value < ctx.modulus);
        PadicInt { ctx, value }
    }

    pub fn ctx(&self) -> PadicContext {
        self.ctx
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    /// Largest `k <= N` with `p^k | value`; zero gives `N`.
    pub fn valuation(&self) -> u32 {
        self.ctx.valuation_raw(self.value)
    }

    pub fn is_unit(&self) -> bool {
        !self.value.is_multiple_of(self.ctx.p)
    }

    pub fn invert(&self) -> Result<Self> {
        self.ctx
            .inv_raw(self.value)
            .map(|v| PadicInt::from_raw(self.ctx, v))
            .ok_or(Error::NotAUnit)
    }

    pub fn pow(&self, exp: u64) -> Self {
        PadicInt::from_raw(self.ctx, self.ctx.pow_raw(self.value, exp))
    }

    /// Signed exponent; negative powers need a unit.
    pub fn pow_signed(&self, exp: i64) -> Result<Self> {
        if exp >= 0 {
            Ok(self.pow(exp as u64))
        } else {
            Ok(self.invert()?.pow(exp.unsigned_abs()))
        }
    }

    /// Representative in `(-p^N/2, p^N/2]`.
    pub fn signed(&self) -> i128 {
        let m = self.ctx.modulus as i128;
        let v = self.value as i128;
        if 2 * v > m {
            v - m
        } else {
            v
        }
    }

    fn check(&self, other: &Self) {
        assert_eq!(self.ctx, other.ctx, "p-adic context mismatch");
    }
}

impl fmt::Display for PadicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Add for PadicInt {
    type Output = PadicInt;
    fn add(self, rhs: Self) -> Self {
        self.check(&rhs);
        PadicInt::from_raw(self.ctx, self.ctx.add_raw(self.value, rhs.value))
    }
}

impl Sub for PadicInt {
    type Output = PadicInt;
    fn sub(self, rhs: Self) -> Self {
        self.check(&rhs);
        PadicInt::from_raw(self.ctx, self.ctx.sub_raw(self.value, rhs.value))
    }
}

impl Mul for PadicInt {
    type Output = PadicInt;
    fn mul(self, rhs: Self) -> Self {
        self.check(&rhs);
        PadicInt::from_raw(self.ctx, self.ctx.mul_raw(self.value, rhs.value))
    }
}

impl Neg for PadicInt {
    type Output = PadicInt;
    fn neg(self) -> Self {
        PadicInt::from_raw(self.ctx, self.ctx.neg_raw(self.value))
    }
}

impl AddAssign for PadicInt {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl SubAssign for PadicInt {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl MulAssign for PadicInt {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

#[derive(Serialize, Deserialize)]
struct PadicIntWire {
    p: u64,
    #[serde(rename = "N")]
    prec: u32,
    value: String,
}

impl Serialize for PadicInt {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PadicIntWire {
            p: self.ctx.p,
            prec: self.ctx.prec,
            value: self.value.to_string(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PadicInt {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let w = PadicIntWire::deserialize(d)?;
        let ctx = PadicContext::new(w.p, w.prec).map_err(D::Error::custom)?;
        let n: i128 = w.value.parse().map_err(D::Error::custom)?;
        Ok(ctx.reduce(n))
    }
}

pub(crate) fn is_prime(n: u64) -> bool {
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

/// Returns `(g, x)` with `a*x = g (mod m)`, `g = gcd(a, m)`.
fn ext_gcd(a: i128, m: i128) -> (i128, i128) {
    let (mut old_r, mut r) = (a.rem_euclid(m), m);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    (old_r, old_s)
}

/// Smallest primitive root modulo the prime `p`.
pub(crate) fn primitive_root(p: u64) -> u64 {
    let phi = p - 1;
    let mut factors = Vec::new();
    let mut m = phi;
    let mut d = 2;
    while d * d <= m {
        if m.is_multiple_of(d) {
            factors.push(d);
            while m.is_multiple_of(d) {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        factors.push(m);
    }
    (2..p)
        .find(|&g| {
            factors.iter().all(|&q| {
                let mut acc = 1u64;
                for _ in 0..phi / q {
                    acc = acc * g % p;
                }
                acc != 1
            })
        })
        .expect("primes have primitive roots")
}

/// Teichmüller lift of `a mod p`: the unique root of unity of order dividing
/// `p - 1` congruent to `a`.
pub fn teichmuller(ctx: PadicContext, a: u64) -> PadicInt {
    let mut x = ctx.reduce((a % ctx.p) as i128);
    // x <- x^p converges in N steps
    for _ in 0..ctx.prec {
        x = x.pow(ctx.p);
    }
    x
}
