use std::fmt;

use super::{ArithError, LocalRing, LocalScalar, ResidueMatrix};

/// Cofactor expansion is used up to this dimension; larger determinants go
/// through valuation-pivoted elimination.
const COFACTOR_MAX_DIM: usize = 4;

/// A square matrix over [`LocalRing`], entries stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LocalMatrix {
    ring: LocalRing,
    n: usize,
    entries: Vec<u64>,
}

impl LocalMatrix {
    pub fn new(ring: LocalRing, n: usize, entries: Vec<u64>) -> Result<Self, ArithError> {
        if entries.len() != n * n {
            return Err(ArithError::EntryCount { expected: n * n, found: entries.len() });
        }
        let entries = entries.into_iter().map(|e| ring.reduce(e)).collect();
        Ok(Self { ring, n, entries })
    }

    /// Builds a matrix from signed rows; every row must have `rows.len()` entries.
    pub fn from_rows(ring: LocalRing, rows: &[Vec<i64>]) -> Result<Self, ArithError> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(ArithError::DimensionMismatch { left: n, right: row.len() });
            }
            entries.extend(row.iter().map(|&x| ring.reduce_signed(x as i128)));
        }
        Ok(Self { ring, n, entries })
    }

    pub(crate) fn from_raw(ring: LocalRing, n: usize, entries: Vec<u64>) -> Self {
        debug_assert_eq!(entries.len(), n * n);
        Self { ring, n, entries }
    }

    pub fn zero(ring: LocalRing, n: usize) -> Self {
        Self { ring, n, entries: vec![0; n * n] }
    }

    pub fn identity(ring: LocalRing, n: usize) -> Self {
        let mut m = Self::zero(ring, n);
        for i in 0..n {
            m.entries[i * n + i] = ring.one().value();
        }
        m
    }

    pub fn diagonal(ring: LocalRing, diag: &[u64]) -> Self {
        let n = diag.len();
        let mut m = Self::zero(ring, n);
        for (i, d) in diag.iter().enumerate() {
            m.entries[i * n + i] = ring.reduce(*d);
        }
        m
    }

    #[inline]
    pub fn ring(&self) -> LocalRing {
        self.ring
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Entry in row `r`, column `c` (zero-based).
    #[inline]
    pub fn get(&self, r: usize, c: usize) -> LocalScalar {
        LocalScalar { ring: self.ring, value: self.entries[r * self.n + c] }
    }

    #[inline]
    pub(crate) fn raw(&self, r: usize, c: usize) -> u64 {
        self.entries[r * self.n + c]
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.entries.chunks(self.n.max(1)).map(|c| c.to_vec()).take(self.n).collect()
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.ring, self.n)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&e| e == 0)
    }

    fn check(&self, other: &Self) -> Result<(), ArithError> {
        self.ring.check(&other.ring)?;
        if self.n != other.n {
            return Err(ArithError::DimensionMismatch { left: self.n, right: other.n });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, ArithError> {
        self.check(other)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(&a, &b)| self.ring.add_raw(a, b)).collect();
        Ok(Self::from_raw(self.ring, self.n, entries))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, ArithError> {
        self.check(other)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(&a, &b)| self.ring.sub_raw(a, b)).collect();
        Ok(Self::from_raw(self.ring, self.n, entries))
    }

    pub fn scale(&self, s: &LocalScalar) -> Result<Self, ArithError> {
        self.ring.check(&s.ring())?;
        Ok(self.scale_raw(s.value()))
    }

    pub(crate) fn scale_raw(&self, s: u64) -> Self {
        let entries = self.entries.iter().map(|&a| self.ring.mul_raw(a, s)).collect();
        Self::from_raw(self.ring, self.n, entries)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, ArithError> {
        self.check(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        let n = self.n;
        let m = self.ring.modulus() as u128;
        let mut entries = vec![0u64; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0u128;
                for l in 0..n {
                    acc = (acc + self.entries[i * n + l] as u128 * other.entries[l * n + j] as u128) % m;
                }
                entries[i * n + j] = acc as u64;
            }
        }
        Self::from_raw(self.ring, n, entries)
    }

    /// Matrix times column vector.
    pub fn mul_vec(&self, v: &[u64]) -> Result<Vec<u64>, ArithError> {
        if v.len() != self.n {
            return Err(ArithError::DimensionMismatch { left: self.n, right: v.len() });
        }
        let m = self.ring.modulus() as u128;
        Ok((0..self.n)
            .map(|i| {
                let acc = (0..self.n).fold(0u128, |acc, j| {
                    (acc + self.entries[i * self.n + j] as u128 * (v[j] % self.ring.modulus()) as u128) % m
                });
                acc as u64
            })
            .collect())
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut entries = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[j * n + i] = self.entries[i * n + j];
            }
        }
        Self::from_raw(self.ring, n, entries)
    }

    /// Exact determinant modulo `q^k`.
    pub fn det(&self) -> LocalScalar {
        let value = if self.n <= COFACTOR_MAX_DIM { self.det_cofactor() } else { self.det_elimination() };
        LocalScalar { ring: self.ring, value }
    }

    pub(crate) fn det_cofactor(&self) -> u64 {
        let idx: Vec<usize> = (0..self.n).collect();
        self.cofactor_rec(0, &idx)
    }

    fn cofactor_rec(&self, row: usize, cols: &[usize]) -> u64 {
        match cols.len() {
            0 => self.ring.one().value(),
            1 => self.raw(row, cols[0]),
            _ => {
                let mut acc = 0u64;
                for (pos, &c) in cols.iter().enumerate() {
                    let a = self.raw(row, c);
                    if a == 0 {
                        continue;
                    }
                    let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
                    let term = self.ring.mul_raw(a, self.cofactor_rec(row + 1, &rest));
                    acc = if pos % 2 == 0 { self.ring.add_raw(acc, term) } else { self.ring.sub_raw(acc, term) };
                }
                acc
            }
        }
    }

    /// Triangularisation over `Z/q^k`. In each column the pivot is an entry of
    /// minimal valuation, which divides every other entry in that column, so
    /// the row operations are determinant-preserving and exact.
    pub(crate) fn det_elimination(&self) -> u64 {
        let ring = self.ring;
        let n = self.n;
        let mut a = self.entries.clone();
        let mut det = ring.one().value();
        for col in 0..n {
            let pivot_row =
                (col..n).filter(|&r| a[r * n + col] != 0).min_by_key(|&r| ring.valuation_raw(a[r * n + col]));
            let Some(pr) = pivot_row else {
                return 0;
            };
            if pr != col {
                for c in 0..n {
                    a.swap(pr * n + c, col * n + c);
                }
                det = ring.neg_raw(det);
            }
            let p = a[col * n + col];
            let v = ring.valuation_raw(p);
            let qv = ring.q().pow(v);
            let unit_inv = ring.inv_raw(p / qv).expect("unit part of pivot");
            for r in col + 1..n {
                let e = a[r * n + col];
                if e == 0 {
                    continue;
                }
                // e = p * factor, with factor = (e / q^v) * unit^{-1}
                let factor = ring.mul_raw(e / qv, unit_inv);
                for c in col..n {
                    let t = ring.mul_raw(factor, a[col * n + c]);
                    a[r * n + c] = ring.sub_raw(a[r * n + c], t);
                }
            }
            det = ring.mul_raw(det, p);
        }
        det
    }

    /// Coefficients `a_0, ..., a_{n-1}` of the characteristic polynomial
    /// `x^n + a_{n-1} x^{n-1} + ... + a_0`, where `a_{n-j}` is `(-1)^j` times
    /// the sum of the principal `j x j` minors.
    pub fn char_poly(&self) -> Vec<u64> {
        let n = self.n;
        let ring = self.ring;
        let mut coeffs = vec![0u64; n];
        for mask in 1u32..(1 << n) {
            let idx: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
            let j = idx.len();
            let entries =
                idx.iter().flat_map(|&r| idx.iter().map(move |&c| (r, c))).map(|(r, c)| self.raw(r, c)).collect();
            let minor = Self::from_raw(ring, j, entries).det().value();
            let term = if j.is_multiple_of(2) { minor } else { ring.neg_raw(minor) };
            coeffs[n - j] = ring.add_raw(coeffs[n - j], term);
        }
        coeffs
    }

    pub fn is_invertible(&self) -> bool {
        self.det().is_unit()
    }

    /// Inverse by Gauss-Jordan elimination with unit pivots.
    pub fn inverse(&self) -> Result<Self, ArithError> {
        let ring = self.ring;
        let n = self.n;
        let mut a = self.entries.clone();
        let mut inv = Self::identity(ring, n).entries;
        for col in 0..n {
            let pr = (col..n)
                .find(|&r| ring.is_unit_raw(a[r * n + col]))
                .ok_or_else(|| ArithError::NonInvertibleConjugator { ring, det: self.det().value() })?;
            if pr != col {
                for c in 0..n {
                    a.swap(pr * n + c, col * n + c);
                    inv.swap(pr * n + c, col * n + c);
                }
            }
            let pinv = ring.inv_raw(a[col * n + col]).expect("unit pivot");
            for c in 0..n {
                a[col * n + c] = ring.mul_raw(a[col * n + c], pinv);
                inv[col * n + c] = ring.mul_raw(inv[col * n + c], pinv);
            }
            for r in 0..n {
                if r == col || a[r * n + col] == 0 {
                    continue;
                }
                let f = a[r * n + col];
                for c in 0..n {
                    a[r * n + c] = ring.sub_raw(a[r * n + c], ring.mul_raw(f, a[col * n + c]));
                    inv[r * n + c] = ring.sub_raw(inv[r * n + c], ring.mul_raw(f, inv[col * n + c]));
                }
            }
        }
        Ok(Self::from_raw(ring, n, inv))
    }

    /// `U^{-1} M U`, where `self` is `M`.
    pub fn conjugated_by(&self, u: &Self) -> Result<Self, ArithError> {
        self.check(u)?;
        let u_inv = u.inverse()?;
        Ok(u_inv.mul_unchecked(self).mul_unchecked(u))
    }

    /// Reduces every entry modulo `q`.
    pub fn residue(&self) -> ResidueMatrix {
        let q = self.ring.q();
        ResidueMatrix::from_raw(q, self.n, self.entries.iter().map(|&e| e % q).collect())
    }

    /// Reduction to a lower precision of the same prime.
    pub fn reduce_to(&self, ring: LocalRing) -> Result<Self, ArithError> {
        if ring.q() != self.ring.q() || ring.k() > self.ring.k() {
            return Err(ArithError::RingMismatch { left: self.ring, right: ring });
        }
        Ok(Self::from_raw(ring, self.n, self.entries.iter().map(|&e| ring.reduce(e)).collect()))
    }
}

impl fmt::Display for LocalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.rows())
    }
}

/// `diag(f, 1, ..., 1)`, a matrix of determinant `f`.
pub fn reduced_norm_preimage(f: &LocalScalar, n: usize) -> LocalMatrix {
    let ring = f.ring();
    let mut m = LocalMatrix::identity(ring, n);
    if n > 0 {
        m.entries[0] = f.value();
    }
    m
}
