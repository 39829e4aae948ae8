//! Rank-`n` commutative orders over [`LocalRing`] given by structure
//! constants on a basis `e_1, ..., e_n` with `e_1 = 1`.
//!
//! Indices in the API are zero-based (`e_1` is index 0). Violation reports
//! use one-based basis labels so they read like the usual notation.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::local_arith::{ArithError, LocalMatrix, LocalRing, LocalScalar};

/// Classification certificates are produced only up to this degree.
pub const MAX_CLASSIFY_DEGREE: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrderError {
    #[error("rank must be at least 2, got {0}")]
    RankTooSmall(usize),
    #[error("structure constants have the wrong shape: {0}")]
    Shape(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("invalid order: {0}")]
    Invalid(#[from] OrderViolation),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    Identity,
    Commutativity,
    Associativity,
}

/// The first violated ring axiom, with one-based basis labels.
///
/// For `Identity` and `Commutativity` the product is `e_i * e_j`; for
/// `Associativity` it is `(e_i e_j) e_m` against `e_i (e_j e_m)`. `component`
/// is the basis coordinate `l` at which the two sides differ.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[error("{axiom:?} fails at {indices:?}, component e_{component}")]
pub struct OrderViolation {
    pub axiom: Axiom,
    pub indices: Vec<usize>,
    pub component: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderPresentation {
    ring: LocalRing,
    n: usize,
    /// `c[(i * n + j) * n + l]`: coefficient of `e_l` in `e_i * e_j`.
    constants: Vec<u64>,
    /// `a_0, ..., a_{n-1}` when built from `x^n + a_{n-1} x^{n-1} + ... + a_0`.
    monic: Option<Vec<u64>>,
}

impl OrderPresentation {
    /// The order `R[x]/(f)` on the basis `1, x, ..., x^{n-1}`.
    pub fn from_monic_poly(ring: LocalRing, coeffs: &[LocalScalar]) -> Result<Self, OrderError> {
        for c in coeffs {
            if c.ring() != ring {
                return Err(ArithError::RingMismatch { left: ring, right: c.ring() }.into());
            }
        }
        let raw: Vec<u64> = coeffs.iter().map(LocalScalar::value).collect();
        Self::from_monic_raw(ring, &raw)
    }

    /// Same as [`from_monic_poly`](Self::from_monic_poly) with signed integer
    /// coefficients reduced into the ring.
    pub fn from_monic_coeffs(ring: LocalRing, coeffs: &[i64]) -> Result<Self, OrderError> {
        let raw: Vec<u64> = coeffs.iter().map(|&c| ring.scalar(c).value()).collect();
        Self::from_monic_raw(ring, &raw)
    }

    fn from_monic_raw(ring: LocalRing, coeffs: &[u64]) -> Result<Self, OrderError> {
        let n = coeffs.len();
        if n < 2 {
            return Err(OrderError::RankTooSmall(n));
        }
        // powers[m] = coordinates of x^m for m < 2n - 1
        let mut powers: Vec<Vec<u64>> = Vec::with_capacity(2 * n - 1);
        for m in 0..n {
            let mut v = vec![0u64; n];
            v[m] = 1 % ring.modulus();
            powers.push(v);
        }
        for _ in n..2 * n - 1 {
            let prev = powers.last().expect("non-empty");
            // x * (sum v_l x^l) = sum v_l x^{l+1}, with x^n = -sum a_l x^l
            let top = prev[n - 1];
            let mut next = vec![0u64; n];
            next[1..n].copy_from_slice(&prev[..n - 1]);
            for l in 0..n {
                next[l] = ring.sub_raw(next[l], ring.mul_raw(top, coeffs[l]));
            }
            powers.push(next);
        }
        let mut constants = vec![0u64; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    constants[(i * n + j) * n + l] = powers[i + j][l];
                }
            }
        }
        Ok(Self { ring, n, constants, monic: Some(coeffs.to_vec()) })
    }

    /// Accepts arbitrary constants `c[i][j][l]`; only the shape is checked.
    /// Use [`validate`](Self::validate) for the ring axioms.
    pub fn from_structure_constants(ring: LocalRing, c: &[Vec<Vec<i64>>]) -> Result<Self, OrderError> {
        let n = c.len();
        if n < 2 {
            return Err(OrderError::RankTooSmall(n));
        }
        let mut constants = Vec::with_capacity(n * n * n);
        for (i, plane) in c.iter().enumerate() {
            if plane.len() != n {
                return Err(OrderError::Shape(format!("c[{i}] has {} rows, expected {n}", plane.len())));
            }
            for (j, row) in plane.iter().enumerate() {
                if row.len() != n {
                    return Err(OrderError::Shape(format!("c[{i}][{j}] has {} entries, expected {n}", row.len())));
                }
                constants.extend(row.iter().map(|&x| ring.scalar(x).value()));
            }
        }
        Ok(Self { ring, n, constants, monic: None })
    }

    #[inline]
    pub fn ring(&self) -> LocalRing {
        self.ring
    }

    #[inline]
    pub fn rank(&self) -> usize {
        self.n
    }

    /// Coefficient of `e_l` in `e_i * e_j` (zero-based).
    #[inline]
    pub fn constant(&self, i: usize, j: usize, l: usize) -> LocalScalar {
        LocalScalar::new(self.ring, self.raw(i, j, l))
    }

    #[inline]
    pub(crate) fn raw(&self, i: usize, j: usize, l: usize) -> u64 {
        self.constants[(i * self.n + j) * self.n + l]
    }

    pub fn monic_coefficients(&self) -> Option<&[u64]> {
        self.monic.as_deref()
    }

    pub fn is_monogenic(&self) -> bool {
        self.monic.is_some()
    }

    /// Constants as nested arrays `c[i][j][l]`.
    pub fn structure_constants(&self) -> Vec<Vec<Vec<u64>>> {
        let n = self.n;
        (0..n).map(|i| (0..n).map(|j| (0..n).map(|l| self.raw(i, j, l)).collect()).collect()).collect()
    }

    /// Flips the constant `c[i][j][l]` to `c + delta`. Used to build mutants
    /// for the cross-check harness.
    pub fn perturbed(&self, i: usize, j: usize, l: usize, delta: u64) -> Self {
        let mut out = self.clone();
        let idx = (i * self.n + j) * self.n + l;
        out.constants[idx] = self.ring.add_raw(out.constants[idx], delta);
        out.monic = None;
        out
    }

    /// The same order with constants reduced to a lower precision.
    pub fn with_precision(&self, k: u32) -> Result<Self, OrderError> {
        if k > self.ring.k() {
            return Err(OrderError::Shape(format!("cannot raise precision from {} to {k}", self.ring.k())));
        }
        let ring = self.ring.with_precision(k)?;
        Ok(Self {
            ring,
            n: self.n,
            constants: self.constants.iter().map(|&c| ring.reduce(c)).collect(),
            monic: self.monic.as_ref().map(|m| m.iter().map(|&c| ring.reduce(c)).collect()),
        })
    }

    /// Product of two elements given in basis coordinates.
    pub fn mul_elements(&self, x: &[u64], y: &[u64]) -> Vec<u64> {
        let ring = self.ring;
        let n = self.n;
        let mut out = vec![0u64; n];
        for i in 0..n {
            if x[i] == 0 {
                continue;
            }
            for j in 0..n {
                if y[j] == 0 {
                    continue;
                }
                let xy = ring.mul_raw(x[i], y[j]);
                for (l, o) in out.iter_mut().enumerate() {
                    *o = ring.add_raw(*o, ring.mul_raw(xy, self.raw(i, j, l)));
                }
            }
        }
        out
    }

    /// Checks the identity, commutativity and associativity axioms over all
    /// index triples and reports the first failure.
    pub fn validate(&self) -> Result<(), OrderViolation> {
        let n = self.n;
        let ring = self.ring;
        let delta = |a: usize, b: usize| if a == b { 1 % ring.modulus() } else { 0 };
        for j in 0..n {
            for l in 0..n {
                if self.raw(0, j, l) != delta(j, l) {
                    return Err(OrderViolation { axiom: Axiom::Identity, indices: vec![1, j + 1], component: l + 1 });
                }
                if self.raw(j, 0, l) != delta(j, l) {
                    return Err(OrderViolation { axiom: Axiom::Identity, indices: vec![j + 1, 1], component: l + 1 });
                }
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                for l in 0..n {
                    if self.raw(i, j, l) != self.raw(j, i, l) {
                        return Err(OrderViolation {
                            axiom: Axiom::Commutativity,
                            indices: vec![i + 1, j + 1],
                            component: l + 1,
                        });
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for m in 0..n {
                    for r in 0..n {
                        // (e_i e_j) e_m = sum_l c_ijl c_lmr;  e_i (e_j e_m) = sum_l c_jml c_ilr
                        let mut lhs = 0u64;
                        let mut rhs = 0u64;
                        for l in 0..n {
                            lhs = ring.add_raw(lhs, ring.mul_raw(self.raw(i, j, l), self.raw(l, m, r)));
                            rhs = ring.add_raw(rhs, ring.mul_raw(self.raw(j, m, l), self.raw(i, l, r)));
                        }
                        if lhs != rhs {
                            return Err(OrderViolation {
                                axiom: Axiom::Associativity,
                                indices: vec![i + 1, j + 1, m + 1],
                                component: r + 1,
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Classifies `S / qS` for monogenic orders by factoring the defining
    /// polynomial modulo `q`.
    pub fn classify_residue_algebra(&self) -> ResidueAlgebraClass {
        let Some(coeffs) = &self.monic else {
            return ResidueAlgebraClass::other(None, Some("order is not monogenic; no certificate".into()));
        };
        let n = self.n;
        let q = self.ring.q();
        let precision_sensitive = self.discriminant_vanishes();
        if n > MAX_CLASSIFY_DEGREE {
            let mut class = ResidueAlgebraClass::other(
                None,
                Some(format!("degree {n} exceeds the certificate bound {MAX_CLASSIFY_DEGREE}")),
            );
            class.precision_sensitive = precision_sensitive;
            return class;
        }
        let mut residue_poly: Vec<u64> = coeffs.iter().map(|c| c % q).collect();
        residue_poly.push(1);
        let roots: Vec<u64> = (0..q).filter(|&r| poly_eval(&residue_poly, r, q) == 0).collect();
        let quadratic_factor = if n == 4 && roots.is_empty() {
            (0..q * q).map(|t| [t % q, t / q]).find(|&[b0, b1]| poly_divides(&[b0, b1, 1], &residue_poly, q))
        } else {
            None
        };
        let irreducible = roots.is_empty() && quadratic_factor.is_none();
        let tag = if roots.len() == n {
            ResidueAlgebraTag::SplitEtale
        } else if irreducible {
            ResidueAlgebraTag::UnramifiedField
        } else {
            ResidueAlgebraTag::Other
        };
        ResidueAlgebraClass {
            tag,
            certificate: Some(FactorCertificate { residue_poly, roots, irreducible, quadratic_factor }),
            precision_sensitive,
            note: None,
        }
    }

    /// True when the discriminant of the defining polynomial is zero modulo
    /// `q^k`, i.e. the truncated data cannot tell `f` apart from a polynomial
    /// with a repeated root.
    fn discriminant_vanishes(&self) -> bool {
        let Some(a) = &self.monic else {
            return false;
        };
        let ring = self.ring;
        let n = self.n;
        // Sylvester matrix of f and f', size 2n - 1
        let mut f: Vec<u64> = a.clone();
        f.push(1 % ring.modulus());
        let df: Vec<u64> = (1..=n).map(|i| ring.mul_raw(f[i], i as u64 % ring.modulus())).collect();
        let size = 2 * n - 1;
        let mut entries = vec![0u64; size * size];
        for r in 0..n - 1 {
            for (d, &c) in f.iter().rev().enumerate() {
                entries[r * size + r + d] = c;
            }
        }
        for r in 0..n {
            for (d, &c) in df.iter().rev().enumerate() {
                entries[(n - 1 + r) * size + r + d] = c;
            }
        }
        let m = LocalMatrix::new(ring, size, entries).expect("square sylvester matrix");
        m.det().is_zero()
    }
}

impl fmt::Display for OrderPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.monic {
            Some(a) => write!(f, "{}[x]/(x^{} + {:?})", self.ring, self.n, a),
            None => write!(f, "rank-{} order over {}", self.n, self.ring),
        }
    }
}

fn poly_eval(coeffs: &[u64], x: u64, q: u64) -> u64 {
    coeffs.iter().rev().fold(0, |acc, &c| (acc * x + c) % q)
}

/// Whether the monic `divisor` divides `poly` over `Z/q` (coefficients low to high).
fn poly_divides(divisor: &[u64], poly: &[u64], q: u64) -> bool {
    let mut rem: Vec<u64> = poly.to_vec();
    let d = divisor.len() - 1;
    while rem.len() > d {
        let lead = *rem.last().expect("non-empty") % q;
        let shift = rem.len() - 1 - d;
        for (i, &c) in divisor.iter().enumerate() {
            rem[shift + i] = (rem[shift + i] + q * q - lead * c % q) % q;
        }
        rem.pop();
    }
    rem.iter().all(|&c| c % q == 0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidueAlgebraTag {
    SplitEtale,
    UnramifiedField,
    Other,
}

/// Factorisation data of `f mod q`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FactorCertificate {
    /// `f mod q`, coefficients from the constant term up to the leading 1.
    pub residue_poly: Vec<u64>,
    pub roots: Vec<u64>,
    pub irreducible: bool,
    /// A monic quadratic factor `x^2 + b1 x + b0` as `[b0, b1]` (degree 4 only).
    pub quadratic_factor: Option<[u64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResidueAlgebraClass {
    pub tag: ResidueAlgebraTag,
    pub certificate: Option<FactorCertificate>,
    /// Set when the discriminant vanishes at the working precision.
    pub precision_sensitive: bool,
    pub note: Option<String>,
}

impl ResidueAlgebraClass {
    fn other(certificate: Option<FactorCertificate>, note: Option<String>) -> Self {
        Self { tag: ResidueAlgebraTag::Other, certificate, precision_sensitive: false, note }
    }

    /// Split étale or an unramified field: the cases where the local
    /// uniqueness theorem applies.
    pub fn is_unramified(&self) -> bool {
        matches!(self.tag, ResidueAlgebraTag::SplitEtale | ResidueAlgebraTag::UnramifiedField)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(q: u64, k: u32) -> LocalRing {
        LocalRing::new(q, k).unwrap()
    }

    #[test]
    fn x_squared_minus_one() {
        let o = OrderPresentation::from_monic_coeffs(ring(3, 2), &[8, 0]).unwrap();
        assert_eq!(o.constant(1, 1, 0).value(), 1);
        assert_eq!(o.constant(1, 1, 1).value(), 0);
        assert!(o.validate().is_ok());
    }

    #[test]
    fn x_squared_minus_nine_collapses_at_precision_two() {
        let o = OrderPresentation::from_monic_coeffs(ring(3, 2), &[-9, 0]).unwrap();
        assert_eq!(o.constant(1, 1, 0).value(), 0);
        let class = o.classify_residue_algebra();
        assert_eq!(class.tag, ResidueAlgebraTag::Other);
        assert!(class.precision_sensitive);
    }

    #[test]
    fn x_squared_plus_x_plus_one_mod_two() {
        let o = OrderPresentation::from_monic_coeffs(ring(2, 1), &[1, 1]).unwrap();
        assert_eq!(o.constant(1, 1, 0).value(), 1);
        assert_eq!(o.constant(1, 1, 1).value(), 1);
    }

    #[test]
    fn monic_constructions_validate() {
        for (q, k) in [(2, 1), (2, 3), (3, 2), (5, 1)] {
            let r = ring(q, k);
            let m = r.modulus() as i64;
            for n in 2..=4 {
                for seed in 0..20i64 {
                    let coeffs: Vec<i64> = (0..n).map(|i| (seed * 7 + i as i64 * 13) % m).collect();
                    let o = OrderPresentation::from_monic_coeffs(r, &coeffs).unwrap();
                    assert_eq!(o.validate(), Ok(()), "{o}");
                }
            }
        }
    }

    #[test]
    fn rank_two_with_identity_is_always_valid() {
        // exhaustive over c[2][2][.] at q=3, k=2
        let r = ring(3, 2);
        for a in 0..9 {
            for b in 0..9 {
                let c = vec![vec![vec![1, 0], vec![0, 1]], vec![vec![0, 1], vec![a, b]]];
                let o = OrderPresentation::from_structure_constants(r, &c).unwrap();
                assert_eq!(o.validate(), Ok(()));
            }
        }
    }

    #[test]
    fn commutativity_violation_is_reported() {
        let r = ring(3, 1);
        let c = OrderPresentation::from_monic_coeffs(r, &[0, 0, 0]).unwrap().structure_constants();
        let mut c: Vec<Vec<Vec<i64>>> =
            c.iter().map(|p| p.iter().map(|row| row.iter().map(|&x| x as i64).collect()).collect()).collect();
        c[1][2][0] = 1;
        let o = OrderPresentation::from_structure_constants(r, &c).unwrap();
        let v = o.validate().unwrap_err();
        assert_eq!(v.axiom, Axiom::Commutativity);
        assert_eq!(v.indices, vec![2, 3]);
    }

    #[test]
    fn identity_violation_is_reported() {
        let r = ring(2, 1);
        let c = vec![vec![vec![1, 0], vec![1, 1]], vec![vec![0, 1], vec![1, 0]]];
        let v = OrderPresentation::from_structure_constants(r, &c).unwrap().validate().unwrap_err();
        assert_eq!(v.axiom, Axiom::Identity);
        assert_eq!(v.indices, vec![1, 2]);
    }

    #[test]
    fn associativity_violation_is_reported() {
        // e_2 e_2 = e_3, e_2 e_3 = e_1, e_3 e_3 = e_3:
        // (e_2 e_2) e_3 = e_3 but e_2 (e_2 e_3) = e_2
        let r = ring(5, 1);
        let c = vec![
            vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]],
            vec![vec![0, 1, 0], vec![0, 0, 1], vec![1, 0, 0]],
            vec![vec![0, 0, 1], vec![1, 0, 0], vec![0, 0, 1]],
        ];
        let v = OrderPresentation::from_structure_constants(r, &c).unwrap().validate().unwrap_err();
        assert_eq!(v.axiom, Axiom::Associativity);
    }

    #[test]
    fn classification_examples() {
        let split = OrderPresentation::from_monic_coeffs(ring(3, 1), &[-1, 0]).unwrap().classify_residue_algebra();
        assert_eq!(split.tag, ResidueAlgebraTag::SplitEtale);
        assert_eq!(split.certificate.unwrap().roots, vec![1, 2]);

        let inert = OrderPresentation::from_monic_coeffs(ring(2, 1), &[1, 1]).unwrap().classify_residue_algebra();
        assert_eq!(inert.tag, ResidueAlgebraTag::UnramifiedField);
        assert!(!inert.precision_sensitive);

        let double = OrderPresentation::from_monic_coeffs(ring(3, 1), &[0, 0]).unwrap().classify_residue_algebra();
        assert_eq!(double.tag, ResidueAlgebraTag::Other);
    }

    #[test]
    fn quartic_with_two_irreducible_quadratics_is_not_a_field() {
        // (x^2 + x + 1)^2 = x^4 + 2x^3 + 3x^2 + 2x + 1 = x^4 + x^2 + 1 mod 2
        let o = OrderPresentation::from_monic_coeffs(ring(2, 1), &[1, 0, 1, 0]).unwrap();
        let class = o.classify_residue_algebra();
        assert_eq!(class.tag, ResidueAlgebraTag::Other);
        assert_eq!(class.certificate.unwrap().quadratic_factor, Some([1, 1]));
        // x^4 + x + 1 is irreducible over F_2
        let o = OrderPresentation::from_monic_coeffs(ring(2, 1), &[1, 1, 0, 0]).unwrap();
        assert_eq!(o.classify_residue_algebra().tag, ResidueAlgebraTag::UnramifiedField);
    }

    #[test]
    fn classification_is_invariant_under_unit_rescaling() {
        // x -> u x sends f(x) to u^n f(x / u), coefficients a_i u^{n-i}
        for (q, k) in [(3, 1), (5, 1), (5, 2), (7, 1)] {
            let r = ring(q, k);
            for n in 2..=3usize {
                for code in 0..r.modulus().pow(n as u32).min(400) {
                    let coeffs: Vec<i64> =
                        (0..n).map(|i| ((code / r.modulus().pow(i as u32)) % r.modulus()) as i64).collect();
                    let base = OrderPresentation::from_monic_coeffs(r, &coeffs).unwrap().classify_residue_algebra();
                    for u in 1..q {
                        let scaled: Vec<i64> = coeffs
                            .iter()
                            .enumerate()
                            .map(|(i, &a)| {
                                (a as i128 * (u as i128).pow((n - i) as u32)).rem_euclid(r.modulus() as i128) as i64
                            })
                            .collect();
                        let other =
                            OrderPresentation::from_monic_coeffs(r, &scaled).unwrap().classify_residue_algebra();
                        assert_eq!(base.tag, other.tag);
                        assert_eq!(base.precision_sensitive, other.precision_sensitive);
                    }
                }
            }
        }
    }

    #[test]
    fn non_monogenic_orders_classify_as_other() {
        let c = vec![vec![vec![1, 0], vec![0, 1]], vec![vec![0, 1], vec![1, 0]]];
        let o = OrderPresentation::from_structure_constants(ring(3, 1), &c).unwrap();
        let class = o.classify_residue_algebra();
        assert_eq!(class.tag, ResidueAlgebraTag::Other);
        assert!(class.note.is_some());
    }

    #[test]
    fn rank_one_is_rejected() {
        assert_eq!(OrderPresentation::from_monic_coeffs(ring(3, 1), &[1]), Err(OrderError::RankTooSmall(1)));
    }
}
