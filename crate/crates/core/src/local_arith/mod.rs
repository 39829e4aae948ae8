//! Exact arithmetic in the truncated local ring `Z/q^k` and in square
//! matrices over it.
//!
//! The ring models the completion of a ring of integers at an unramified
//! prime, with the rational prime `q` playing the role of the uniformizer.
//! Every value carries its ring; combining values from different rings is an
//! error rather than a silent truncation.

mod matrix;
mod residue;

pub use matrix::{reduced_norm_preimage, LocalMatrix};
pub use residue::{first_dependence, residue_rank, ResidueMatrix};

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("{q} is not prime")]
    NotPrime { q: u64 },
    #[error("precision must be at least 1")]
    ZeroPrecision,
    #[error("modulus {q}^{k} does not fit in 62 bits")]
    ModulusTooLarge { q: u64, k: u32 },
    #[error("ring mismatch: {left} vs {right}")]
    RingMismatch { left: LocalRing, right: LocalRing },
    #[error("{value} is not a unit in {ring}")]
    NonUnitInverse { ring: LocalRing, value: u64 },
    #[error("conjugating matrix is not invertible (det {det} in {ring})")]
    NonInvertibleConjugator { ring: LocalRing, det: u64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("expected {expected} entries, found {found}")]
    EntryCount { expected: usize, found: usize },
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// The ring `Z/q^k` for a prime `q` and precision `k >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LocalRing {
    q: u64,
    k: u32,
    modulus: u64,
}

impl LocalRing {
    pub fn new(q: u64, k: u32) -> Result<Self, ArithError> {
        if !is_prime(q) {
            return Err(ArithError::NotPrime { q });
        }
        if k == 0 {
            return Err(ArithError::ZeroPrecision);
        }
        let modulus = q.checked_pow(k).filter(|m| *m < (1 << 62)).ok_or(ArithError::ModulusTooLarge { q, k })?;
        Ok(Self { q, k, modulus })
    }

    #[inline]
    pub fn q(&self) -> u64 {
        self.q
    }

    #[inline]
    pub fn k(&self) -> u32 {
        self.k
    }

    /// `q^k`.
    #[inline]
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// The same prime at a different precision.
    pub fn with_precision(&self, k: u32) -> Result<Self, ArithError> {
        Self::new(self.q, k)
    }

    /// The residue field `Z/q` viewed as the precision-one ring.
    pub fn residue_ring(&self) -> Self {
        Self { q: self.q, k: 1, modulus: self.q }
    }

    pub fn zero(&self) -> LocalScalar {
        LocalScalar { ring: *self, value: 0 }
    }

    pub fn one(&self) -> LocalScalar {
        LocalScalar { ring: *self, value: 1 % self.modulus }
    }

    /// Embeds a signed integer, reducing it into `[0, q^k)`.
    pub fn scalar(&self, value: i64) -> LocalScalar {
        LocalScalar { ring: *self, value: self.reduce_signed(value as i128) }
    }

    #[inline]
    pub(crate) fn reduce(&self, value: u64) -> u64 {
        value % self.modulus
    }

    #[inline]
    pub(crate) fn reduce_signed(&self, value: i128) -> u64 {
        value.rem_euclid(self.modulus as i128) as u64
    }

    #[inline]
    pub(crate) fn add_raw(&self, a: u64, b: u64) -> u64 {
        ((a as u128 + b as u128) % self.modulus as u128) as u64
    }

    #[inline]
    pub(crate) fn sub_raw(&self, a: u64, b: u64) -> u64 {
        ((a as u128 + self.modulus as u128 - b as u128) % self.modulus as u128) as u64
    }

    #[inline]
    pub(crate) fn mul_raw(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.modulus as u128) as u64
    }

    #[inline]
    pub(crate) fn neg_raw(&self, a: u64) -> u64 {
        self.sub_raw(0, a)
    }

    /// Capped valuation: `valuation(0) = k`.
    pub(crate) fn valuation_raw(&self, mut a: u64) -> u32 {
        a %= self.modulus;
        if a == 0 {
            return self.k;
        }
        let mut v = 0;
        while a.is_multiple_of(self.q) {
            a /= self.q;
            v += 1;
        }
        v
    }

    #[inline]
    pub(crate) fn is_unit_raw(&self, a: u64) -> bool {
        !a.is_multiple_of(self.q)
    }

    pub(crate) fn inv_raw(&self, a: u64) -> Option<u64> {
        if !self.is_unit_raw(a) {
            return None;
        }
        // extended Euclid on (a, q^k)
        let (mut r0, mut r1) = (self.modulus as i128, (a % self.modulus) as i128);
        let (mut s0, mut s1) = (0i128, 1i128);
        while r1 != 0 {
            let t = r0 / r1;
            (r0, r1) = (r1, r0 - t * r1);
            (s0, s1) = (s1, s0 - t * s1);
        }
        debug_assert_eq!(r0, 1);
        Some(self.reduce_signed(s0))
    }

    fn check(&self, other: &LocalRing) -> Result<(), ArithError> {
        if self == other {
            Ok(())
        } else {
            Err(ArithError::RingMismatch { left: *self, right: *other })
        }
    }
}

impl fmt::Display for LocalRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z/{}^{}", self.q, self.k)
    }
}

/// An element of a [`LocalRing`], stored as its residue in `[0, q^k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LocalScalar {
    ring: LocalRing,
    value: u64,
}

impl LocalScalar {
    pub fn new(ring: LocalRing, value: u64) -> Self {
        Self { ring, value: ring.reduce(value) }
    }

    #[inline]
    pub fn ring(&self) -> LocalRing {
        self.ring
    }

    #[inline]
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn add(&self, other: &Self) -> Result<Self, ArithError> {
        self.ring.check(&other.ring)?;
        Ok(Self { ring: self.ring, value: self.ring.add_raw(self.value, other.value) })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, ArithError> {
        self.ring.check(&other.ring)?;
        Ok(Self { ring: self.ring, value: self.ring.sub_raw(self.value, other.value) })
    }

    pub fn mul(&self, other: &Self) -> Result<Self, ArithError> {
        self.ring.check(&other.ring)?;
        Ok(Self { ring: self.ring, value: self.ring.mul_raw(self.value, other.value) })
    }

    pub fn neg(&self) -> Self {
        Self { ring: self.ring, value: self.ring.neg_raw(self.value) }
    }

    /// Inverse of a unit; `x * x.inv() == 1` exactly modulo `q^k`.
    pub fn inv(&self) -> Result<Self, ArithError> {
        self.ring
            .inv_raw(self.value)
            .map(|value| Self { ring: self.ring, value })
            .ok_or(ArithError::NonUnitInverse { ring: self.ring, value: self.value })
    }

    /// Number of factors of `q`, capped at `k` (so `valuation(0) == k`).
    pub fn valuation(&self) -> u32 {
        self.ring.valuation_raw(self.value)
    }

    pub fn is_unit(&self) -> bool {
        self.ring.is_unit_raw(self.value)
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    /// Reduction into the residue field `Z/q`.
    pub fn residue(&self) -> u64 {
        self.value % self.ring.q
    }
}

impl fmt::Display for LocalScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}
