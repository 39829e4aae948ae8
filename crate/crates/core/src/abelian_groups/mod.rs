//! Finite abelian groups `Z/d_1 ⊕ ... ⊕ Z/d_r` with subgroups, quotients,
//! indices and exponents.
//!
//! A subgroup `S` is stored through the lattice `L ⊆ Z^r` of all integer
//! lifts of its elements, which contains `diag(d) Z^r`. Its Hermite basis is
//! canonical, so membership, equality and index all read off the basis.

mod normal_form;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use normal_form::{smith_form, HermiteBasis};

/// Groups larger than this are rejected.
pub const MAX_GROUP_ORDER: u64 = 1 << 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("cyclic order {0} must be at least 2")]
    TrivialFactor(u64),
    #[error("group order exceeds {MAX_GROUP_ORDER}")]
    TooLarge,
    #[error("vector {vector:?} is out of range for {group}")]
    OutOfRangeVector { vector: Vec<u64>, group: FiniteAbelianGroup },
    #[error("subgroups of different groups: {0} vs {1}")]
    AmbientMismatch(FiniteAbelianGroup, FiniteAbelianGroup),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FiniteAbelianGroup {
    cyclic_orders: Vec<u64>,
}

impl FiniteAbelianGroup {
    pub fn new(cyclic_orders: Vec<u64>) -> Result<Self, GroupError> {
        if let Some(&d) = cyclic_orders.iter().find(|&&d| d < 2) {
            return Err(GroupError::TrivialFactor(d));
        }
        let order = cyclic_orders.iter().try_fold(1u64, |acc, &d| acc.checked_mul(d)).ok_or(GroupError::TooLarge)?;
        if order > MAX_GROUP_ORDER {
            return Err(GroupError::TooLarge);
        }
        Ok(Self { cyclic_orders })
    }

    pub fn trivial() -> Self {
        Self { cyclic_orders: Vec::new() }
    }

    pub fn cyclic_orders(&self) -> &[u64] {
        &self.cyclic_orders
    }

    pub fn rank(&self) -> usize {
        self.cyclic_orders.len()
    }

    pub fn order(&self) -> u64 {
        self.cyclic_orders.iter().product()
    }

    /// Least common multiple of the cyclic orders.
    pub fn exponent(&self) -> u64 {
        self.cyclic_orders.iter().fold(1, |acc, &d| lcm(acc, d))
    }

    pub fn zero(&self) -> Vec<u64> {
        vec![0; self.rank()]
    }

    pub fn check(&self, v: &[u64]) -> Result<(), GroupError> {
        if v.len() != self.rank() || v.iter().zip(&self.cyclic_orders).any(|(&x, &d)| x >= d) {
            return Err(GroupError::OutOfRangeVector { vector: v.to_vec(), group: self.clone() });
        }
        Ok(())
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).zip(&self.cyclic_orders).map(|((&x, &y), &d)| (x + y) % d).collect()
    }

    pub fn scale(&self, m: u64, a: &[u64]) -> Vec<u64> {
        a.iter().zip(&self.cyclic_orders).map(|(&x, &d)| ((x as u128 * m as u128) % d as u128) as u64).collect()
    }

    /// All elements in lexicographic order. Intended for small groups.
    pub fn elements(&self) -> impl Iterator<Item = Vec<u64>> + '_ {
        let orders = self.cyclic_orders.clone();
        (0..self.order()).map(move |mut code| {
            let mut v = vec![0; orders.len()];
            for (x, &d) in v.iter_mut().zip(&orders).rev() {
                *x = code % d;
                code /= d;
            }
            v
        })
    }

    pub fn is_trivial(&self) -> bool {
        self.cyclic_orders.is_empty()
    }

    pub fn full_subgroup(&self) -> Subgroup {
        let gens = (0..self.rank())
            .map(|i| {
                let mut e = self.zero();
                e[i] = 1;
                e
            })
            .collect();
        Subgroup::new(self, gens).expect("unit vectors are in range")
    }

    pub fn trivial_subgroup(&self) -> Subgroup {
        Subgroup::new(self, Vec::new()).expect("no generators")
    }

    /// `{m g : g in G}`.
    pub fn power_subgroup(&self, m: u64) -> Subgroup {
        let gens = (0..self.rank())
            .map(|i| {
                let mut e = self.zero();
                e[i] = m % self.cyclic_orders[i];
                e
            })
            .collect();
        Subgroup::new(self, gens).expect("in range")
    }

    /// Kernel of the character `v -> sum chi_i v_i mod p`. Each `chi_i` must
    /// satisfy `d_i chi_i ≡ 0 mod p` for the character to be well defined.
    pub fn character_kernel(&self, chi: &[u64], p: u64) -> Result<Subgroup, GroupError> {
        if chi.len() != self.rank()
            || chi
                .iter()
                .zip(&self.cyclic_orders)
                .any(|(&c, &d)| c >= p || !(c as u128 * d as u128).is_multiple_of(p as u128))
        {
            return Err(GroupError::OutOfRangeVector { vector: chi.to_vec(), group: self.clone() });
        }
        let Some(pivot) = chi.iter().position(|&c| c != 0) else {
            return Ok(self.full_subgroup());
        };
        let inv = mod_inverse(chi[pivot], p);
        let mut gens = Vec::with_capacity(self.rank());
        let mut e = self.zero();
        e[pivot] = p % self.cyclic_orders[pivot];
        gens.push(e);
        for i in (0..self.rank()).filter(|&i| i != pivot) {
            // e_i - (chi_i / chi_pivot) e_pivot
            let c = chi[i] * inv % p;
            let d = self.cyclic_orders[pivot];
            let mut g = self.zero();
            g[i] = 1;
            g[pivot] = (d - c % d) % d;
            gens.push(g);
        }
        Subgroup::new(self, gens)
    }
}

impl fmt::Display for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.cyclic_orders.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.cyclic_orders.iter().map(|d| format!("Z/{d}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    let (_, s, _) = normal_form::ext_gcd(a as i128, p as i128);
    s.rem_euclid(p as i128) as u64
}

/// A subgroup given by generators, with its canonical lattice basis.
#[derive(Debug, Clone)]
pub struct Subgroup {
    ambient: FiniteAbelianGroup,
    generators: Vec<Vec<u64>>,
    basis: HermiteBasis,
}

impl PartialEq for Subgroup {
    fn eq(&self, other: &Self) -> bool {
        self.ambient == other.ambient && self.basis == other.basis
    }
}

impl Eq for Subgroup {}

impl Subgroup {
    pub fn new(ambient: &FiniteAbelianGroup, generators: Vec<Vec<u64>>) -> Result<Self, GroupError> {
        let mut basis = HermiteBasis::diagonal(ambient.cyclic_orders());
        for g in &generators {
            ambient.check(g)?;
            basis.insert(g, ambient.cyclic_orders());
        }
        Ok(Self { ambient: ambient.clone(), generators, basis })
    }

    pub fn ambient(&self) -> &FiniteAbelianGroup {
        &self.ambient
    }

    pub fn generators(&self) -> &[Vec<u64>] {
        &self.generators
    }

    /// A canonical generating set read off the normal form: the rows of the
    /// Hermite basis with nonzero image, reduced into range.
    pub fn canonical_generators(&self) -> Vec<Vec<u64>> {
        let orders = self.ambient.cyclic_orders();
        self.basis
            .rows()
            .iter()
            .map(|row| row.iter().zip(orders).map(|(&x, &d)| x.rem_euclid(d as i128) as u64).collect::<Vec<u64>>())
            .filter(|v| v.iter().any(|&x| x != 0))
            .collect()
    }

    pub fn contains(&self, v: &[u64]) -> Result<bool, GroupError> {
        self.ambient.check(v)?;
        Ok(self.basis.remainder(v).iter().all(|&x| x == 0))
    }

    /// `[ambient : S]`, the product of the Hermite pivots.
    pub fn index(&self) -> u64 {
        self.basis.pivots().product()
    }

    pub fn order(&self) -> u64 {
        self.ambient.order() / self.index()
    }

    pub fn is_full(&self) -> bool {
        self.index() == 1
    }

    pub fn is_trivial(&self) -> bool {
        self.order() == 1
    }

    fn same_ambient(&self, other: &Self) -> Result<(), GroupError> {
        if self.ambient != other.ambient {
            return Err(GroupError::AmbientMismatch(self.ambient.clone(), other.ambient.clone()));
        }
        Ok(())
    }

    pub fn is_subgroup_of(&self, other: &Self) -> Result<bool, GroupError> {
        self.same_ambient(other)?;
        for g in self.canonical_generators() {
            if !other.contains(&g)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The subgroup generated by `self` and `other`.
    pub fn join(&self, other: &Self) -> Result<Self, GroupError> {
        self.same_ambient(other)?;
        let mut gens = self.generators.clone();
        gens.extend(other.generators.iter().cloned());
        Self::new(&self.ambient, gens)
    }

    /// `[other : self]` for `self ⊆ other`.
    pub fn relative_index(&self, other: &Self) -> Result<u64, GroupError> {
        debug_assert!(self.is_subgroup_of(other)?);
        Ok(self.index() / other.index())
    }

    /// All elements by closure over the generators. Intended for small groups.
    pub fn enumerate(&self) -> Vec<Vec<u64>> {
        let mut seen = std::collections::BTreeSet::new();
        let zero = self.ambient.zero();
        seen.insert(zero.clone());
        let mut frontier = vec![zero];
        while let Some(x) = frontier.pop() {
            for g in &self.generators {
                let y = self.ambient.add(&x, g);
                if seen.insert(y.clone()) {
                    frontier.push(y);
                }
            }
        }
        seen.into_iter().collect()
    }

    /// The quotient `ambient / S` in invariant-factor form with its projection.
    pub fn quotient(&self) -> Quotient {
        let (diag, transform) = smith_form(self.basis.rows());
        let keep: Vec<usize> = (0..diag.len()).filter(|&i| diag[i] > 1).collect();
        let cyclic_orders: Vec<u64> = keep.iter().map(|&i| diag[i] as u64).collect();
        let projection =
            keep.iter().map(|&i| transform.iter().map(|row| row[i].rem_euclid(diag[i])).collect()).collect();
        Quotient { group: FiniteAbelianGroup { cyclic_orders }, projection, source: self.ambient.clone() }
    }

    /// Image of this subgroup in a quotient of the same ambient group.
    pub fn image_in(&self, quotient: &Quotient) -> Result<Subgroup, GroupError> {
        if quotient.source != self.ambient {
            return Err(GroupError::AmbientMismatch(self.ambient.clone(), quotient.source.clone()));
        }
        let gens = self.generators.iter().map(|g| quotient.project(g)).collect();
        Subgroup::new(&quotient.group, gens)
    }
}

impl fmt::Display for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{:?}> in {}", self.canonical_generators(), self.ambient)
    }
}

/// `G / S` with the projection `G -> G / S`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quotient {
    group: FiniteAbelianGroup,
    /// Column `i` of the Smith transform, reduced modulo the `i`-th factor.
    projection: Vec<Vec<i128>>,
    source: FiniteAbelianGroup,
}

impl Quotient {
    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn source(&self) -> &FiniteAbelianGroup {
        &self.source
    }

    pub fn project(&self, v: &[u64]) -> Vec<u64> {
        self.projection
            .iter()
            .zip(self.group.cyclic_orders())
            .map(|(col, &d)| {
                let d = d as i128;
                let s = v.iter().zip(col).fold(0i128, |acc, (&x, &c)| (acc + (x as i128 % d) * c) % d);
                s.rem_euclid(d) as u64
            })
            .collect()
    }
}
