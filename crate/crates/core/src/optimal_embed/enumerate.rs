//! Exhaustive enumeration of embeddings of a monogenic order at a fixed
//! precision and their conjugacy classes under `GL_n(Z/q^k)`.

use serde::Serialize;

use super::{EmbedError, LocalEmbedding};
use crate::local_arith::{LocalMatrix, LocalRing};
use crate::orders::{OrderPresentation, ResidueAlgebraClass, ResidueAlgebraTag};

/// Limits for the exhaustive searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SizeGuards {
    pub max_q: u64,
    pub max_n: usize,
    pub max_k: u32,
    /// Upper bound on `q^(k n^2)`, the number of matrices scanned.
    pub max_search: u64,
    pub max_group_order: u64,
}

impl Default for SizeGuards {
    fn default() -> Self {
        Self { max_q: 5, max_n: 3, max_k: 2, max_search: 2_000_000, max_group_order: 1 << 32 }
    }
}

impl SizeGuards {
    fn check(&self, ring: LocalRing, n: usize) -> Result<u64, EmbedError> {
        let guard = |what, value: u64, limit: u64| {
            if value > limit {
                Err(EmbedError::SizeGuardExceeded { what, value, limit })
            } else {
                Ok(())
            }
        };
        guard("q", ring.q(), self.max_q)?;
        guard("n", n as u64, self.max_n as u64)?;
        guard("k", ring.k() as u64, self.max_k as u64)?;
        let space = ring.modulus().checked_pow((n * n) as u32).unwrap_or(u64::MAX);
        guard("q^(k n^2)", space, self.max_search)?;
        Ok(space)
    }
}

/// One solution of `f(A) = 0` with its homomorphism `x -> A`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateEmbedding {
    pub embedding: LocalEmbedding,
    /// No nonzero element of `S / q^k S` maps to zero.
    pub injective: bool,
    pub optimal: bool,
}

/// All homomorphisms `R[x]/(f) -> M_n(Z/q^k)`, in lexicographic order of the
/// entries of the image of `x`.
///
/// `injective` is decided on the socle: a nonzero kernel always contains an
/// element `q^(k-1) c`, so the map is injective iff `q^(k-1) sum c_i A_i` is
/// nonzero for every nonzero residue vector `c`. `optimal` comes from the
/// residue rank criterion. For maps between free modules over `Z/q^k` the two
/// coincide; they are computed separately as a cross-check.
pub fn enumerate_embeddings(
    order: &OrderPresentation,
    guards: &SizeGuards,
) -> Result<Vec<CandidateEmbedding>, EmbedError> {
    let coeffs = order.monic_coefficients().ok_or(EmbedError::NotMonogenic)?.to_vec();
    let ring = order.ring();
    let n = order.rank();
    let space = guards.check(ring, n)?;
    let modulus = ring.modulus();
    let identity = LocalMatrix::identity(ring, n);
    let mut out = Vec::new();
    let mut entries = vec![0u64; n * n];
    for code in 0..space {
        decode(code, modulus, &mut entries);
        let a = LocalMatrix::from_raw(ring, n, entries.clone());
        // powers A^0 .. A^n
        let mut powers = Vec::with_capacity(n + 1);
        powers.push(identity.clone());
        for i in 1..=n {
            powers.push(powers[i - 1].mul_unchecked(&a));
        }
        let mut f_of_a = powers[n].clone();
        for (l, &c) in coeffs.iter().enumerate() {
            if c != 0 {
                f_of_a = f_of_a.add(&powers[l].scale_raw(c))?;
            }
        }
        if !f_of_a.is_zero() {
            continue;
        }
        powers.truncate(n);
        let embedding = LocalEmbedding::new(order.clone(), powers)?;
        let optimal = embedding.is_optimal_independence()?;
        let injective = socle_injective(&embedding);
        out.push(CandidateEmbedding { embedding, injective, optimal });
    }
    Ok(out)
}

fn decode(mut code: u64, base: u64, out: &mut [u64]) {
    for e in out.iter_mut().rev() {
        *e = code % base;
        code /= base;
    }
}

fn socle_injective(emb: &LocalEmbedding) -> bool {
    let ring = emb.ring();
    let q = ring.q();
    let n = emb.dim();
    let socle = q.pow(ring.k() - 1);
    (1..q.pow(n as u32)).all(|code| {
        let mut sum = LocalMatrix::zero(ring, n);
        for (i, a) in emb.matrices().iter().enumerate() {
            let c = code / q.pow(i as u32) % q;
            if c != 0 {
                sum = sum.add(&a.scale_raw(ring.mul_raw(c, socle))).expect("same ring");
            }
        }
        !sum.is_zero()
    })
}

/// Conjugacy classes of optimal embeddings at one precision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitCount {
    pub ring: LocalRing,
    pub n: usize,
    /// Every solution of `f(A) = 0`, including degenerate maps.
    pub homomorphisms: usize,
    /// Injective homomorphisms.
    pub total_embeddings: usize,
    pub optimal_embeddings: usize,
    /// Number of `GL_n(Z/q^k)`-orbits on the optimal embeddings.
    pub m: usize,
    /// First element (in enumeration order) of each orbit.
    pub representatives: Vec<LocalEmbedding>,
    pub orbit_sizes: Vec<usize>,
}

/// Partitions the optimal candidates into orbits by sweeping all of
/// `GL_n(Z/q^k)` from each unvisited representative.
pub fn count_orbits(candidates: &[CandidateEmbedding], guards: &SizeGuards) -> Result<OrbitCount, EmbedError> {
    let Some(first) = candidates.first() else {
        return Err(EmbedError::DimensionMismatch("no candidates to count".into()));
    };
    let ring = first.embedding.ring();
    let n = first.embedding.dim();
    let space = guards.check(ring, n)?;

    let optimal: Vec<&LocalEmbedding> = candidates.iter().filter(|c| c.optimal).map(|c| &c.embedding).collect();
    let index: std::collections::HashMap<&LocalMatrix, usize> =
        optimal.iter().enumerate().map(|(i, e)| (&e.matrices()[1], i)).collect();
    let mut orbit_of = vec![usize::MAX; optimal.len()];
    let mut representatives = Vec::new();
    let mut orbit_sizes = Vec::new();

    for start in 0..optimal.len() {
        if orbit_of[start] != usize::MAX {
            continue;
        }
        let orbit = representatives.len();
        let a = &optimal[start].matrices()[1];
        let mut size = 0;
        for (u, u_inv) in GeneralLinear::new(ring, n, space) {
            let b = u_inv.mul_unchecked(a).mul_unchecked(&u);
            let j = *index.get(&b).ok_or_else(|| {
                EmbedError::DimensionMismatch("candidate list is not closed under conjugation".into())
            })?;
            if orbit_of[j] == usize::MAX {
                orbit_of[j] = orbit;
                size += 1;
            }
        }
        representatives.push(optimal[start].clone());
        orbit_sizes.push(size);
    }

    Ok(OrbitCount {
        ring,
        n,
        homomorphisms: candidates.len(),
        total_embeddings: candidates.iter().filter(|c| c.injective).count(),
        optimal_embeddings: optimal.len(),
        m: representatives.len(),
        representatives,
        orbit_sizes,
    })
}

/// Streams the invertible matrices of `M_n(Z/q^k)` with their inverses.
struct GeneralLinear {
    ring: LocalRing,
    n: usize,
    code: u64,
    space: u64,
    entries: Vec<u64>,
}

impl GeneralLinear {
    fn new(ring: LocalRing, n: usize, space: u64) -> Self {
        Self { ring, n, code: 0, space, entries: vec![0; n * n] }
    }
}

impl Iterator for GeneralLinear {
    type Item = (LocalMatrix, LocalMatrix);

    fn next(&mut self) -> Option<Self::Item> {
        while self.code < self.space {
            decode(self.code, self.ring.modulus(), &mut self.entries);
            self.code += 1;
            let u = LocalMatrix::from_raw(self.ring, self.n, self.entries.clone());
            if let Ok(u_inv) = u.inverse() {
                return Some((u, u_inv));
            }
        }
        None
    }
}

/// Exhaustive search for `U` with `U^{-1} a U = b`.
pub fn find_conjugator(
    a: &LocalMatrix,
    b: &LocalMatrix,
    guards: &SizeGuards,
) -> Result<Option<LocalMatrix>, EmbedError> {
    let ring = a.ring();
    let n = a.dim();
    let space = guards.check(ring, n)?;
    let mut entries = vec![0u64; n * n];
    for code in 0..space {
        decode(code, ring.modulus(), &mut entries);
        let u = LocalMatrix::from_raw(ring, n, entries.clone());
        // U^{-1} a U = b  <=>  a U = U b, for invertible U
        if a.mul_unchecked(&u) == u.mul_unchecked(b) && u.is_invertible() {
            return Ok(Some(u));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum AlgebraKind {
    /// `M_n(F_p)` with maximal order `M_n(R_p)`.
    Matrix,
    /// A local division algebra with its valuation ring; `maximal` asserts
    /// that the order is integrally closed.
    Division { maximal: bool },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrbitLevel {
    pub k: u32,
    pub m: usize,
    pub exceeds_one: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocalEmbeddingNumber {
    pub value: usize,
    /// The residue algebra is split étale or a field, so the local theorem
    /// predicts `value == 1`.
    pub theorem_applies: bool,
    pub class: ResidueAlgebraClass,
    /// Orbit counts for every precision up to the order's own (matrix case).
    pub levels: Vec<OrbitLevel>,
    pub caveat: String,
}

/// The number of optimal embeddings of `order` into the maximal order of a
/// local algebra of the given kind, up to conjugation by its normaliser.
pub fn local_embedding_number(
    order: &OrderPresentation,
    kind: AlgebraKind,
    guards: &SizeGuards,
) -> Result<LocalEmbeddingNumber, EmbedError> {
    let class = order.classify_residue_algebra();
    match kind {
        AlgebraKind::Matrix => {
            let theorem_applies = class.is_unramified();
            let mut levels = Vec::new();
            for k in 1..=order.ring().k() {
                let reduced = order.with_precision(k)?;
                let candidates = enumerate_embeddings(&reduced, guards)?;
                let m = if candidates.is_empty() { 0 } else { count_orbits(&candidates, guards)?.m };
                levels.push(OrbitLevel { k, m, exceeds_one: m > 1 });
            }
            let value = levels.last().map_or(0, |l| l.m);
            let caveat = format!(
                "orbits counted under GL_{}(Z/{}^k) for k = 1..{}; exact R-orbits are not computed",
                order.rank(),
                order.ring().q(),
                order.ring().k()
            );
            Ok(LocalEmbeddingNumber { value, theorem_applies, class, levels, caveat })
        }
        AlgebraKind::Division { maximal } => {
            let is_field = class.tag == ResidueAlgebraTag::UnramifiedField;
            let value = usize::from(is_field && maximal);
            let caveat = if !is_field {
                "K_p is not modelled as a field, so no embedding into the division algebra".to_string()
            } else if !maximal {
                "order is not integrally closed, so no optimal embedding".to_string()
            } else {
                "unique maximal order; the normaliser is the whole unit group".to_string()
            };
            Ok(LocalEmbeddingNumber { value, theorem_applies: true, class, levels: Vec::new(), caveat })
        }
    }
}
