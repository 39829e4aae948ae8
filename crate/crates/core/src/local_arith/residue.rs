use std::fmt;

use super::{ArithError, LocalMatrix, LocalRing};

/// A square matrix over the residue field with `q` elements.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResidueMatrix {
    q: u64,
    n: usize,
    entries: Vec<u64>,
}

impl ResidueMatrix {
    pub fn new(q: u64, n: usize, entries: Vec<u64>) -> Result<Self, ArithError> {
        if entries.len() != n * n {
            return Err(ArithError::EntryCount { expected: n * n, found: entries.len() });
        }
        Ok(Self { q, n, entries: entries.into_iter().map(|e| e % q).collect() })
    }

    pub(crate) fn from_raw(q: u64, n: usize, entries: Vec<u64>) -> Self {
        Self { q, n, entries }
    }

    pub fn identity(q: u64, n: usize) -> Self {
        let mut entries = vec![0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1 % q;
        }
        Self { q, n, entries }
    }

    #[inline]
    pub fn q(&self) -> u64 {
        self.q
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.entries[r * self.n + c]
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&e| e == 0)
    }

    /// The same matrix over the precision-one local ring.
    pub fn to_local(&self) -> Result<LocalMatrix, ArithError> {
        let ring = LocalRing::new(self.q, 1)?;
        Ok(LocalMatrix::from_raw(ring, self.n, self.entries.clone()))
    }

    pub fn det(&self) -> Result<u64, ArithError> {
        Ok(self.to_local()?.det().value())
    }

    pub fn conjugated_by(&self, u: &Self) -> Result<Self, ArithError> {
        Ok(self.to_local()?.conjugated_by(&u.to_local()?)?.residue())
    }
}

impl fmt::Display for ResidueMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[u64]> = self.entries.chunks(self.n.max(1)).collect();
        write!(f, "{rows:?} mod {}", self.q)
    }
}

fn inv_mod_prime(a: u64, q: u64) -> u64 {
    // Fermat; q is prime and small
    let mut result = 1u64;
    let mut base = a % q;
    let mut e = q - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % q;
        }
        base = base * base % q;
        e >>= 1;
    }
    result
}

/// Rank over `Z/q` of the matrix whose rows are `rows`, each flattened.
pub fn residue_rank(rows: &[ResidueMatrix]) -> usize {
    let Some(first) = rows.first() else {
        return 0;
    };
    let q = first.q;
    let vectors: Vec<Vec<u64>> = rows.iter().map(|m| m.entries.clone()).collect();
    rank_mod_prime(vectors, q)
}

pub(crate) fn rank_mod_prime(mut rows: Vec<Vec<u64>>, q: u64) -> usize {
    let width = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..width {
        let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][col].is_multiple_of(q)) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = inv_mod_prime(rows[rank][col], q);
        for c in col..width {
            rows[rank][c] = rows[rank][c] * inv % q;
        }
        for r in 0..rows.len() {
            if r == rank || rows[r][col].is_multiple_of(q) {
                continue;
            }
            let f = rows[r][col] % q;
            for c in col..width {
                rows[r][c] = (rows[r][c] + q * q - f * rows[rank][c] % q) % q;
            }
        }
        rank += 1;
    }
    rank
}

/// The first linear dependence among `vectors` over `Z/q`.
///
/// If `vectors[m]` is the first vector lying in the span of its predecessors,
/// returns `c` with `c[m] = 1`, `c[i] = 0` for `i > m`, and
/// `sum c[i] * vectors[i] = 0`. Returns `None` when the vectors are independent.
pub fn first_dependence(vectors: &[Vec<u64>], q: u64) -> Option<Vec<u64>> {
    let count = vectors.len();
    // echelon rows, each tagged with its coefficients in terms of the inputs
    let mut basis: Vec<(usize, Vec<u64>, Vec<u64>)> = Vec::new();
    for (m, v) in vectors.iter().enumerate() {
        let mut v: Vec<u64> = v.iter().map(|x| x % q).collect();
        let mut coeffs = vec![0u64; count];
        coeffs[m] = 1;
        for (pivot, row, row_coeffs) in &basis {
            let f = v[*pivot];
            if f == 0 {
                continue;
            }
            for (x, y) in v.iter_mut().zip(row) {
                *x = (*x + q * q - f * y % q) % q;
            }
            for (x, y) in coeffs.iter_mut().zip(row_coeffs) {
                *x = (*x + q * q - f * y % q) % q;
            }
        }
        match v.iter().position(|&x| x != 0) {
            None => return Some(coeffs),
            Some(pivot) => {
                let inv = inv_mod_prime(v[pivot], q);
                v.iter_mut().for_each(|x| *x = *x * inv % q);
                coeffs.iter_mut().for_each(|x| *x = *x * inv % q);
                basis.push((pivot, v, coeffs));
            }
        }
    }
    None
}
