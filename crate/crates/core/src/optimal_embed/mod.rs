//! Optimal embeddings of a local order `S` into `M_n(R)`.
//!
//! An embedding is given by the images `A_1 = I, A_2, ..., A_n` of the basis
//! of `S`. It is optimal when `phi(K) ∩ M_n(R) = phi(S)`, which is decided
//! here by four independent routes that must always agree:
//!
//! * rank of the residues `Ã_i` over the residue field,
//! * a nonvanishing `n x n` minor of the matrix `X` built from entry positions,
//! * exhaustive search for a residue dependence (the oracle),
//! * for `n = 2`, the closed form "`b`, `c` or `d - a` is a unit".

mod enumerate;

pub use enumerate::{
    count_orbits, enumerate_embeddings, find_conjugator, local_embedding_number, AlgebraKind, CandidateEmbedding,
    LocalEmbeddingNumber, OrbitCount, OrbitLevel, SizeGuards,
};

use serde::Serialize;
use thiserror::Error;

use crate::local_arith::{
    first_dependence, residue_rank, ArithError, LocalMatrix, LocalRing, LocalScalar, ResidueMatrix,
};
use crate::orders::{OrderError, OrderPresentation, OrderViolation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmbedError {
    #[error("invalid order: {0}")]
    InvalidOrder(#[from] OrderViolation),
    #[error("A_1 is not the identity")]
    IdentityNotPreserved,
    #[error("not a homomorphism: A_{i} A_{j} differs from sum_l c[{i}][{j}][l] A_l")]
    NotAHomomorphism { i: usize, j: usize },
    #[error("expected dimension {expected}, found {found}")]
    WrongDimension { expected: usize, found: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("order is not monogenic")]
    NotMonogenic,
    #[error("size guard exceeded: {what} = {value} > {limit}")]
    SizeGuardExceeded { what: &'static str, value: u64, limit: u64 },
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Order(#[from] OrderError),
}

/// The images `A_1, ..., A_n` of the basis of an order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalEmbedding {
    order: OrderPresentation,
    matrices: Vec<LocalMatrix>,
}

/// Certificate returned by the minor criterion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimalityWitness {
    /// One-based positions `(s_i, t_i)` whose minor has nonzero residue determinant.
    Minor { selection: Vec<(usize, usize)>, det: u64 },
    /// Residue coefficients `c` with `sum c_i Ã_i = 0`.
    Dependence { coefficients: Vec<u64> },
}

impl OptimalityWitness {
    /// Re-checks the witness against `emb` without trusting the search that
    /// produced it.
    pub fn verify(&self, emb: &LocalEmbedding) -> bool {
        let q = emb.ring().q();
        let n = emb.dim();
        match self {
            Self::Minor { selection, .. } => {
                if selection.len() != n {
                    return false;
                }
                let positions: Vec<(usize, usize)> = selection.iter().map(|&(s, t)| (s - 1, t - 1)).collect();
                emb.minor_residue_det(&positions) != 0
            }
            Self::Dependence { coefficients } => {
                coefficients.len() == n
                    && coefficients.iter().any(|&c| c % q != 0)
                    && emb.residue_combination_vanishes(coefficients)
            }
        }
    }
}

impl LocalEmbedding {
    /// Pairs an order with candidate images. Shapes are checked here; the
    /// homomorphism property is checked by [`verify_homomorphism`](Self::verify_homomorphism).
    pub fn new(order: OrderPresentation, matrices: Vec<LocalMatrix>) -> Result<Self, EmbedError> {
        let n = order.rank();
        if matrices.len() != n {
            return Err(EmbedError::DimensionMismatch(format!("{} matrices for an order of rank {n}", matrices.len())));
        }
        for m in &matrices {
            if m.dim() != n {
                return Err(EmbedError::WrongDimension { expected: n, found: m.dim() });
            }
            if m.ring() != order.ring() {
                return Err(ArithError::RingMismatch { left: order.ring(), right: m.ring() }.into());
            }
        }
        Ok(Self { order, matrices })
    }

    /// The embedding `x -> a` of `R[x]/(f)`, with `f` the characteristic
    /// polynomial of `a`; the images are `I, a, ..., a^{n-1}`.
    pub fn from_generator(a: &LocalMatrix) -> Result<Self, EmbedError> {
        let ring = a.ring();
        let n = a.dim();
        let coeffs: Vec<LocalScalar> = a.char_poly().into_iter().map(|c| LocalScalar::new(ring, c)).collect();
        let order = OrderPresentation::from_monic_poly(ring, &coeffs)?;
        let mut matrices = Vec::with_capacity(n);
        let mut power = LocalMatrix::identity(ring, n);
        for _ in 0..n {
            let next = power.mul(a)?;
            matrices.push(power);
            power = next;
        }
        Self::new(order, matrices)
    }

    pub fn order(&self) -> &OrderPresentation {
        &self.order
    }

    pub fn matrices(&self) -> &[LocalMatrix] {
        &self.matrices
    }

    pub fn ring(&self) -> LocalRing {
        self.order.ring()
    }

    pub fn dim(&self) -> usize {
        self.order.rank()
    }

    pub fn residues(&self) -> Vec<ResidueMatrix> {
        self.matrices.iter().map(LocalMatrix::residue).collect()
    }

    /// `A_1 = I` and `A_i A_j = sum_l c[i][j][l] A_l` exactly modulo `q^k`.
    pub fn verify_homomorphism(&self) -> Result<(), EmbedError> {
        if !self.matrices[0].is_identity() {
            return Err(EmbedError::IdentityNotPreserved);
        }
        let n = self.dim();
        let ring = self.ring();
        for i in 0..n {
            for j in 0..n {
                let lhs = self.matrices[i].mul_unchecked(&self.matrices[j]);
                let mut rhs = LocalMatrix::zero(ring, n);
                for l in 0..n {
                    let c = self.order.raw(i, j, l);
                    if c != 0 {
                        rhs = rhs.add(&self.matrices[l].scale_raw(c))?;
                    }
                }
                if lhs != rhs {
                    return Err(EmbedError::NotAHomomorphism { i: i + 1, j: j + 1 });
                }
            }
        }
        Ok(())
    }

    /// Conjugates every image by `u`: `A_i -> U^{-1} A_i U`.
    pub fn conjugated_by(&self, u: &LocalMatrix) -> Result<Self, EmbedError> {
        let matrices = self.matrices.iter().map(|a| a.conjugated_by(u)).collect::<Result<Vec<_>, _>>()?;
        Ok(Self { order: self.order.clone(), matrices })
    }

    /// Residue-field rank criterion: the `Ã_i` are linearly independent.
    pub fn is_optimal_independence(&self) -> Result<bool, EmbedError> {
        self.verify_homomorphism()?;
        Ok(residue_rank(&self.residues()) == self.dim())
    }

    /// Minor criterion: searches the `C(n^2, n)` position selections in
    /// lexicographic order for one whose residue determinant is nonzero.
    /// On failure returns the first residue dependence among the `Ã_i`.
    pub fn is_optimal_minor(&self) -> Result<(bool, OptimalityWitness), EmbedError> {
        self.verify_homomorphism()?;
        let n = self.dim();
        let positions: Vec<(usize, usize)> = (0..n).flat_map(|s| (0..n).map(move |t| (s, t))).collect();
        for combo in Combinations::new(positions.len(), n) {
            let selection: Vec<(usize, usize)> = combo.iter().map(|&p| positions[p]).collect();
            let det = self.minor_residue_det(&selection);
            if det != 0 {
                let selection = selection.into_iter().map(|(s, t)| (s + 1, t + 1)).collect();
                return Ok((true, OptimalityWitness::Minor { selection, det }));
            }
        }
        let q = self.ring().q();
        let flat: Vec<Vec<u64>> = self.residues().iter().map(|m| m.entries().to_vec()).collect();
        let coefficients = first_dependence(&flat, q).expect("no nonzero minor implies a dependence");
        Ok((false, OptimalityWitness::Dependence { coefficients }))
    }

    /// Brute-force oracle: scans all `q^n - 1` nonzero residue vectors for one
    /// with `sum c_i Ã_i = 0`.
    pub fn is_optimal_oracle(&self) -> Result<bool, EmbedError> {
        Ok(self.oracle_dependence()?.is_none())
    }

    /// The first vanishing residue combination in the oracle's scan order.
    pub fn oracle_dependence(&self) -> Result<Option<Vec<u64>>, EmbedError> {
        self.verify_homomorphism()?;
        let q = self.ring().q();
        let n = self.dim();
        let total = q.pow(n as u32);
        Ok((1..total)
            .map(|code| (0..n).map(|i| code / q.pow(i as u32) % q).collect::<Vec<u64>>())
            .find(|c| self.residue_combination_vanishes(c)))
    }

    /// `n = 2` closed form: with `A_2 = [[a, b], [c, d]]`, optimal iff one of
    /// `b`, `c`, `d - a` is a unit.
    pub fn quadratic_criterion(&self) -> Result<bool, EmbedError> {
        if self.dim() != 2 {
            return Err(EmbedError::WrongDimension { expected: 2, found: self.dim() });
        }
        self.verify_homomorphism()?;
        let a2 = &self.matrices[1];
        let (a, b, c, d) = (a2.get(0, 0), a2.get(0, 1), a2.get(1, 0), a2.get(1, 1));
        Ok(b.is_unit() || c.is_unit() || d.sub(&a)?.is_unit())
    }

    /// `V = (A_1 alpha, ..., A_n alpha)`.
    pub fn assemble_v(&self, alpha: &[LocalScalar]) -> Result<LocalMatrix, EmbedError> {
        let n = self.dim();
        if alpha.len() != n {
            return Err(EmbedError::DimensionMismatch(format!("alpha has length {}, expected {n}", alpha.len())));
        }
        let ring = self.ring();
        let raw: Vec<u64> = alpha
            .iter()
            .map(|a| {
                if a.ring() == ring {
                    Ok(a.value())
                } else {
                    Err(ArithError::RingMismatch { left: ring, right: a.ring() })
                }
            })
            .collect::<Result<_, _>>()?;
        let mut entries = vec![0u64; n * n];
        for (col, a) in self.matrices.iter().enumerate() {
            for (row, v) in a.mul_vec(&raw)?.into_iter().enumerate() {
                entries[row * n + col] = v;
            }
        }
        Ok(LocalMatrix::new(ring, n, entries)?)
    }

    /// `det V` through the minor expansion
    /// `sum over (t_1..t_n) of det X_{(1,t_1),...,(n,t_n)} * prod alpha_{t_i}`.
    pub fn det_v_by_minors(&self, alpha: &[LocalScalar]) -> Result<LocalScalar, EmbedError> {
        let n = self.dim();
        if alpha.len() != n {
            return Err(EmbedError::DimensionMismatch(format!("alpha has length {}, expected {n}", alpha.len())));
        }
        let ring = self.ring();
        let mut total = ring.zero();
        for code in 0..n.pow(n as u32) {
            let t: Vec<usize> = (0..n).map(|i| code / n.pow(i as u32) % n).collect();
            let mut weight = ring.one();
            for &ti in &t {
                weight = weight.mul(&alpha[ti])?;
            }
            if weight.is_zero() {
                continue;
            }
            let selection: Vec<(usize, usize)> = t.iter().enumerate().map(|(s, &ti)| (s, ti)).collect();
            total = total.add(&self.minor_matrix(&selection).det().mul(&weight)?)?;
        }
        Ok(total)
    }

    /// `X` for zero-based positions: row `r` is `((A_1)_{s_r t_r}, ..., (A_n)_{s_r t_r})`.
    pub fn minor_matrix(&self, selection: &[(usize, usize)]) -> LocalMatrix {
        let n = self.dim();
        let mut entries = Vec::with_capacity(n * n);
        for &(s, t) in selection {
            entries.extend(self.matrices.iter().map(|a| a.raw(s, t)));
        }
        LocalMatrix::from_raw(self.ring(), n, entries)
    }

    fn minor_residue_det(&self, selection: &[(usize, usize)]) -> u64 {
        self.minor_matrix(selection).residue().det().expect("prime residue field")
    }

    fn residue_combination_vanishes(&self, c: &[u64]) -> bool {
        let q = self.ring().q();
        let n = self.dim();
        (0..n * n).all(|pos| {
            let (r, col) = (pos / n, pos % n);
            let s: u64 = self.matrices.iter().zip(c).map(|(a, &ci)| (a.raw(r, col) % q) * (ci % q) % q).sum();
            s.is_multiple_of(q)
        })
    }
}

/// The regular representation of `S` on itself: column `j` of `A_i` holds
/// the coordinates of `e_i e_j`, so `(A_i)_{l, j} = c[i][j][l]`.
pub fn regular_representation(order: &OrderPresentation) -> Result<LocalEmbedding, EmbedError> {
    order.validate()?;
    let n = order.rank();
    let ring = order.ring();
    let matrices = (0..n)
        .map(|i| {
            let mut entries = vec![0u64; n * n];
            for j in 0..n {
                for l in 0..n {
                    entries[l * n + j] = order.raw(i, j, l);
                }
            }
            LocalMatrix::from_raw(ring, n, entries)
        })
        .collect();
    LocalEmbedding::new(order.clone(), matrices)
}

/// Lexicographic `k`-subsets of `0..n`.
struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        Self { n, current: (k <= n).then(|| (0..k).collect()) }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let k = out.len();
        let mut next = out.clone();
        let mut i = k;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if next[i] < self.n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                break;
            }
        }
        Some(out)
    }
}
