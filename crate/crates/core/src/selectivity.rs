//! Selectivity of a maximal-order genus for a degree-`p` field `K`, decided in
//! a finite model where every idelic norm group is replaced by its image in
//! the class group `Cl`.
//!
//! Notation: `U_O` is the image of `GN(O)` (the `p`-th powers together with
//! the classes of primes ramified in `B`), `U_K` the image of the norms from
//! `K`, and `T = Cl / U_O` the type group.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abelian_groups::{FiniteAbelianGroup, GroupError, Quotient, Subgroup};
use crate::local_arith::is_prime;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SelectivityError {
    #[error("degree {0} is not prime")]
    DegreeNotPrime(u64),
    #[error("ramified prime #{0} has no Frobenius data")]
    MissingFrobenius(usize),
    #[error("inconsistent instance: {0}")]
    InconsistentInstance(String),
    #[error(transparent)]
    Group(#[from] GroupError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frobenius {
    Split,
    Inert,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RamifiedPrime {
    pub class: Vec<u64>,
    pub frobenius: Option<Frobenius>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldData {
    pub galois: bool,
    pub abelian: bool,
    pub unramified_finite: bool,
    pub unramified_real: bool,
    /// `U_K`, required when `K` is abelian and unramified everywhere.
    pub norm_subgroup: Option<Subgroup>,
}

impl FieldData {
    pub fn unramified(&self) -> bool {
        self.unramified_finite && self.unramified_real
    }

    /// `K` lies inside the Hilbert class field, so `U_K` is housed in `Cl`.
    pub fn housed_in_class_group(&self) -> bool {
        self.galois && self.abelian && self.unramified()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobalInstance {
    pub degree_p: u64,
    pub class_group: FiniteAbelianGroup,
    pub ramified_primes: Vec<RamifiedPrime>,
    pub k: FieldData,
    pub local_embedding_numbers: Option<Vec<u64>>,
}

impl GlobalInstance {
    /// Checks the structural invariants and the Frobenius data against `U_K`.
    pub fn validate(&self) -> Result<(), SelectivityError> {
        let p = self.degree_p;
        if !is_prime(p) {
            return Err(SelectivityError::DegreeNotPrime(p));
        }
        for prime in &self.ramified_primes {
            self.class_group.check(&prime.class)?;
        }
        if self.k.galois && !self.k.abelian {
            return Err(SelectivityError::InconsistentInstance(format!(
                "a Galois extension of prime degree {p} is cyclic, but K is flagged non-abelian"
            )));
        }
        if self.k.abelian && !self.k.galois {
            return Err(SelectivityError::InconsistentInstance("K is flagged abelian but not Galois".into()));
        }
        if !self.k.housed_in_class_group() {
            return Ok(());
        }
        let Some(u_k) = &self.k.norm_subgroup else {
            return Err(SelectivityError::InconsistentInstance(
                "K is abelian and unramified but no norm subgroup was supplied".into(),
            ));
        };
        if u_k.ambient() != &self.class_group {
            return Err(SelectivityError::InconsistentInstance(format!(
                "norm subgroup lives in {} but the class group is {}",
                u_k.ambient(),
                self.class_group
            )));
        }
        if u_k.index() != p {
            return Err(SelectivityError::InconsistentInstance(format!(
                "norm subgroup has index {} in the class group, expected {p}",
                u_k.index()
            )));
        }
        // In an unramified abelian K a prime splits iff its class is a norm.
        for (i, prime) in self.ramified_primes.iter().enumerate() {
            let is_norm = u_k.contains(&prime.class)?;
            match prime.frobenius {
                Some(Frobenius::Split) if !is_norm => {
                    return Err(SelectivityError::InconsistentInstance(format!(
                        "ramified prime #{i} is marked split but its class {:?} is not a norm from K",
                        prime.class
                    )));
                }
                Some(Frobenius::Inert) if is_norm => {
                    return Err(SelectivityError::InconsistentInstance(format!(
                        "ramified prime #{i} is marked inert but its class {:?} is a norm from K",
                        prime.class
                    )));
                }
                Some(Frobenius::NotApplicable) => {
                    return Err(SelectivityError::InconsistentInstance(format!(
                        "ramified prime #{i} has no Frobenius although K is unramified"
                    )));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// True iff no prime ramified in `B` splits in `K`.
pub fn can_embed_globally(inst: &GlobalInstance) -> Result<bool, SelectivityError> {
    let mut embeddable = true;
    for (i, prime) in inst.ramified_primes.iter().enumerate() {
        match prime.frobenius {
            None => return Err(SelectivityError::MissingFrobenius(i)),
            Some(Frobenius::Split) => embeddable = false,
            Some(_) => {}
        }
    }
    Ok(embeddable)
}

/// `T = Cl / U_O` together with `U_O` and the projection.
#[derive(Debug, Clone)]
pub struct TypeGroup {
    pub u_o: Subgroup,
    pub quotient: Quotient,
}

impl TypeGroup {
    pub fn group(&self) -> &FiniteAbelianGroup {
        self.quotient.group()
    }

    pub fn type_number(&self) -> u64 {
        self.group().order()
    }
}

pub fn type_group(inst: &GlobalInstance) -> Result<TypeGroup, SelectivityError> {
    let cl = &inst.class_group;
    let classes = inst.ramified_primes.iter().map(|prime| prime.class.clone()).collect();
    let ramified = Subgroup::new(cl, classes)?;
    let u_o = cl.power_subgroup(inst.degree_p).join(&ramified)?;
    let quotient = u_o.quotient();
    Ok(TypeGroup { u_o, quotient })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SandwichRole {
    LeftGroup,
    MiddleGroup,
    RightGroup,
}

#[derive(Debug, Clone)]
pub struct NormImageSubgroup {
    pub role: SandwichRole,
    /// `None` when the group is not housed in `Cl` (ramified `K`); only its
    /// index is then known, from the formal model.
    pub subgroup: Option<Subgroup>,
    /// Index in the ambient idele class quotient.
    pub index: u64,
}

#[derive(Debug, Clone)]
pub struct Sandwich {
    pub groups: [NormImageSubgroup; 3],
    /// Indices of `Left ⊆ Middle`, `Middle ⊆ Right` and `Right ⊆ ambient`.
    pub indices: [u64; 3],
    pub formal: bool,
}

pub fn sandwich_report(inst: &GlobalInstance) -> Result<Sandwich, SelectivityError> {
    inst.validate()?;
    let cl = &inst.class_group;
    let p = inst.degree_p;
    let full = cl.full_subgroup();
    let housed = |role, s: Subgroup| NormImageSubgroup { role, index: s.index(), subgroup: Some(s) };

    if !inst.k.galois {
        return Ok(Sandwich {
            groups: [
                housed(SandwichRole::LeftGroup, full.clone()),
                housed(SandwichRole::MiddleGroup, full.clone()),
                housed(SandwichRole::RightGroup, full),
            ],
            indices: [1, 1, 1],
            formal: false,
        });
    }
    if !inst.k.housed_in_class_group() {
        // Galois but ramified: K meets the class field of GN(O) only in F.
        return Ok(Sandwich {
            groups: [
                NormImageSubgroup { role: SandwichRole::LeftGroup, subgroup: None, index: p },
                housed(SandwichRole::MiddleGroup, full.clone()),
                housed(SandwichRole::RightGroup, full),
            ],
            indices: [p, 1, 1],
            formal: true,
        });
    }
    let u_k = inst.k.norm_subgroup.clone().expect("validated");
    let u_o = type_group(inst)?.u_o;
    let middle = u_k.join(&u_o)?;
    // maximal orders: Nr(K^)Nr(N(O^)) = Nr(E^), so the right group equals the middle one
    let right = middle.clone();
    let indices = [u_k.index() / middle.index(), 1, right.index()];
    Ok(Sandwich {
        groups: [
            housed(SandwichRole::LeftGroup, u_k),
            housed(SandwichRole::MiddleGroup, middle),
            housed(SandwichRole::RightGroup, right),
        ],
        indices,
        formal: false,
    })
}

#[derive(Debug, Clone)]
pub enum AdmittingTypes {
    All,
    /// Image of `U_K` in `T`.
    Subgroup(Subgroup),
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Proportion {
    pub numerator: u64,
    pub denominator: u64,
}

impl fmt::Display for Proportion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denominator == 1 {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "{}/{}", self.numerator, self.denominator)
        }
    }
}

#[derive(Debug, Clone)]
pub struct SelectivityReport {
    pub can_embed: bool,
    pub type_group: FiniteAbelianGroup,
    pub type_number: u64,
    pub selective: bool,
    /// `U_O`, whose class field is `H_{GN(O)}`.
    pub h_subgroup: Subgroup,
    pub admitting_types: AdmittingTypes,
    pub proportion: Proportion,
    pub sandwich_indices: [u64; 3],
    pub notes: Vec<String>,
}

impl SelectivityReport {
    pub fn admitting_count(&self) -> u64 {
        match &self.admitting_types {
            AdmittingTypes::All => self.type_number,
            AdmittingTypes::Subgroup(s) => s.order(),
            AdmittingTypes::None => 0,
        }
    }
}

pub fn decide_selectivity(inst: &GlobalInstance) -> Result<SelectivityReport, SelectivityError> {
    inst.validate()?;
    let can_embed = can_embed_globally(inst)?;
    let types = type_group(inst)?;
    let sandwich = sandwich_report(inst)?;
    let p = inst.degree_p;
    let mut notes = vec![
        "type group computed as Cl / (Cl^p + ramified classes)".to_string(),
        "embedding statements are read as optimal embeddings".to_string(),
    ];
    if p == 2 {
        notes.push("degree 2 lies outside the odd-degree hypothesis; sign conditions are not modeled".into());
    }
    if sandwich.formal {
        notes.push("K is ramified, so its norm group is not housed in the class group".into());
    }
    if !inst.k.galois {
        notes.push("K is not Galois and is treated as non-selective".into());
    }

    let base = |selective, admitting_types, proportion, notes| SelectivityReport {
        can_embed,
        type_group: types.group().clone(),
        type_number: types.type_number(),
        selective,
        h_subgroup: types.u_o.clone(),
        admitting_types,
        proportion,
        sandwich_indices: sandwich.indices,
        notes,
    };

    if !can_embed {
        notes.push("some ramified prime of B splits in K, so no order in the genus admits K".into());
        return Ok(base(false, AdmittingTypes::None, Proportion { numerator: 0, denominator: 1 }, notes));
    }

    let selective = match (&inst.k.norm_subgroup, inst.k.housed_in_class_group()) {
        (Some(u_k), true) => types.u_o.is_subgroup_of(u_k)?,
        _ => false,
    };
    if !selective {
        return Ok(base(false, AdmittingTypes::All, Proportion { numerator: 1, denominator: 1 }, notes));
    }
    if !inst.ramified_primes.is_empty() {
        return Err(SelectivityError::InconsistentInstance(
            "selective instance with ramified primes: a ramified class lies in U_K but its prime does not split".into(),
        ));
    }
    let u_k = inst.k.norm_subgroup.as_ref().expect("selective implies U_K");
    let admitting = u_k.image_in(&types.quotient)?;
    debug_assert_eq!(admitting.index(), p);
    Ok(base(true, AdmittingTypes::Subgroup(admitting), Proportion { numerator: 1, denominator: p }, notes))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbeddingCount {
    pub value: u64,
    pub violations: Vec<String>,
}

/// Product of the local embedding numbers. Each factor is 1 for maximal
/// orders; anything else is reported as a hypothesis violation.
pub fn global_embedding_count(local_numbers: &[u64]) -> EmbeddingCount {
    let mut violations = Vec::new();
    for (i, &m) in local_numbers.iter().enumerate() {
        match m {
            1 => {}
            0 => violations.push(format!("local factor #{i} is 0: no local optimal embedding")),
            _ => violations.push(format!("local factor #{i} is {m}, not 1 as maximal orders predict")),
        }
    }
    let value = local_numbers.iter().fold(1u64, |acc, &m| acc.saturating_mul(m));
    EmbeddingCount { value, violations }
}

/// Shape of a randomly drawn instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldShape {
    NonGalois,
    GaloisUnramified,
    GaloisRamified,
}

/// Draws a consistent instance: `Cl` a product of up to three cyclic groups
/// of order at most 27, `p ∈ {3, 5}`, and Frobenius data derived from `U_K`
/// whenever `K` is unramified.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R) -> GlobalInstance {
    let p = *[3u64, 5].choose(rng).expect("nonempty");
    let rank = rng.gen_range(1..=3);
    let mut orders: Vec<u64> = (0..rank).map(|_| rng.gen_range(2..=27)).collect();
    let shape = *[FieldShape::NonGalois, FieldShape::GaloisUnramified, FieldShape::GaloisRamified]
        .choose(rng)
        .expect("nonempty");
    if shape == FieldShape::GaloisUnramified && orders.iter().all(|d| d % p != 0) {
        // an unramified cyclic extension of degree p needs p | h
        let i = rng.gen_range(0..orders.len());
        orders[i] = p * rng.gen_range(1..=27 / p);
    }
    let cl = FiniteAbelianGroup::new(orders).expect("orders in range");

    let k = match shape {
        FieldShape::GaloisUnramified => {
            let candidates: Vec<usize> = (0..cl.rank()).filter(|&i| cl.cyclic_orders()[i].is_multiple_of(p)).collect();
            let mut chi = vec![0u64; cl.rank()];
            for &i in &candidates {
                chi[i] = rng.gen_range(0..p);
            }
            let forced = *candidates.choose(rng).expect("p divides some order");
            chi[forced] = rng.gen_range(1..p);
            let u_k = cl.character_kernel(&chi, p).expect("well-defined character");
            FieldData {
                galois: true,
                abelian: true,
                unramified_finite: true,
                unramified_real: true,
                norm_subgroup: Some(u_k),
            }
        }
        FieldShape::GaloisRamified => {
            let real_only = rng.gen_bool(0.25);
            FieldData {
                galois: true,
                abelian: true,
                unramified_finite: real_only,
                unramified_real: !real_only,
                norm_subgroup: None,
            }
        }
        FieldShape::NonGalois => FieldData {
            galois: false,
            abelian: false,
            unramified_finite: rng.gen_bool(0.5),
            unramified_real: rng.gen_bool(0.5),
            norm_subgroup: None,
        },
    };

    let n_ramified = *[0usize, 0, 1, 2, 3].choose(rng).expect("nonempty");
    let ramified_primes = (0..n_ramified)
        .map(|_| {
            let class: Vec<u64> = cl.cyclic_orders().iter().map(|&d| rng.gen_range(0..d)).collect();
            let frobenius = match &k.norm_subgroup {
                Some(u_k) => {
                    if u_k.contains(&class).expect("in range") {
                        Frobenius::Split
                    } else {
                        Frobenius::Inert
                    }
                }
                None if rng.gen_bool(0.75) => Frobenius::Inert,
                None => Frobenius::Split,
            };
            RamifiedPrime { class, frobenius: Some(frobenius) }
        })
        .collect();

    let local_embedding_numbers = Some(vec![1; rng.gen_range(0..4)]);
    GlobalInstance { degree_p: p, class_group: cl, ramified_primes, k, local_embedding_numbers }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn z3() -> FiniteAbelianGroup {
        FiniteAbelianGroup::new(vec![3]).unwrap()
    }

    fn unramified_k(cl: &FiniteAbelianGroup) -> FieldData {
        FieldData {
            galois: true,
            abelian: true,
            unramified_finite: true,
            unramified_real: true,
            norm_subgroup: Some(cl.trivial_subgroup()),
        }
    }

    fn non_galois() -> FieldData {
        FieldData { galois: false, abelian: false, unramified_finite: true, unramified_real: true, norm_subgroup: None }
    }

    fn instance(cl: FiniteAbelianGroup, ramified: Vec<RamifiedPrime>, k: FieldData) -> GlobalInstance {
        GlobalInstance { degree_p: 3, class_group: cl, ramified_primes: ramified, k, local_embedding_numbers: None }
    }

    fn prime(class: u64, frobenius: Frobenius) -> RamifiedPrime {
        RamifiedPrime { class: vec![class], frobenius: Some(frobenius) }
    }

    #[test]
    fn can_embed_examples() {
        let cl = z3();
        let ramified_k = FieldData { unramified_finite: false, norm_subgroup: None, ..unramified_k(&cl) };
        assert!(can_embed_globally(&instance(cl.clone(), vec![], non_galois())).unwrap());
        assert!(
            can_embed_globally(&instance(cl.clone(), vec![prime(1, Frobenius::Inert)], ramified_k.clone())).unwrap()
        );
        assert!(!can_embed_globally(&instance(cl.clone(), vec![prime(1, Frobenius::Split)], ramified_k)).unwrap());
        let missing = instance(cl, vec![RamifiedPrime { class: vec![1], frobenius: None }], non_galois());
        assert_eq!(can_embed_globally(&missing), Err(SelectivityError::MissingFrobenius(0)));
    }

    #[test]
    fn type_group_examples() {
        let t = type_group(&instance(z3(), vec![], non_galois())).unwrap();
        assert_eq!(t.type_number(), 3);
        let t = type_group(&instance(z3(), vec![prime(1, Frobenius::Inert)], non_galois())).unwrap();
        assert_eq!(t.type_number(), 1);
        let z2 = FiniteAbelianGroup::new(vec![2]).unwrap();
        let t = type_group(&instance(z2, vec![], non_galois())).unwrap();
        assert!(t.group().is_trivial());
    }

    #[test]
    fn selective_unramified_instance() {
        let cl = z3();
        let report = decide_selectivity(&instance(cl.clone(), vec![], unramified_k(&cl))).unwrap();
        assert!(report.can_embed);
        assert!(report.selective);
        assert_eq!(report.type_number, 3);
        assert_eq!(report.admitting_count(), 1);
        assert_eq!(report.proportion.to_string(), "1/3");
        assert_eq!(report.sandwich_indices, [1, 1, 3]);
    }

    #[test]
    fn non_galois_instance_admits_everything() {
        let report = decide_selectivity(&instance(z3(), vec![], non_galois())).unwrap();
        assert!(!report.selective);
        assert!(matches!(report.admitting_types, AdmittingTypes::All));
        assert_eq!(report.admitting_count(), 3);
        assert_eq!(report.sandwich_indices, [1, 1, 1]);
    }

    #[test]
    fn ramified_generator_kills_selectivity() {
        let cl = z3();
        let k = FieldData { unramified_finite: false, norm_subgroup: None, ..unramified_k(&cl) };
        let inst = instance(cl, vec![prime(1, Frobenius::Inert)], k);
        let report = decide_selectivity(&inst).unwrap();
        assert!(!report.selective);
        assert_eq!(report.type_number, 1);
        assert_eq!(report.admitting_count(), 1);
        assert_eq!(report.sandwich_indices, [3, 1, 1]);
    }

    #[test]
    fn sandwich_with_u_o_outside_u_k() {
        // U_K = 0 and a ramified generator; consistency forces the prime inert.
        let cl = z3();
        let inst = instance(cl.clone(), vec![prime(1, Frobenius::Inert)], unramified_k(&cl));
        let s = sandwich_report(&inst).unwrap();
        assert_eq!(s.indices, [3, 1, 1]);
        assert!(s.groups[2].subgroup.as_ref().unwrap().is_full());
        assert!(!decide_selectivity(&inst).unwrap().selective);
    }

    #[test]
    fn inconsistent_frobenius_is_flagged() {
        let cl = FiniteAbelianGroup::new(vec![3, 3]).unwrap();
        let u_k = Subgroup::new(&cl, vec![vec![1, 0]]).unwrap();
        let k = FieldData { norm_subgroup: Some(u_k), ..unramified_k(&cl) };
        let inst = GlobalInstance {
            degree_p: 3,
            class_group: cl,
            ramified_primes: vec![RamifiedPrime { class: vec![2, 0], frobenius: Some(Frobenius::Inert) }],
            k,
            local_embedding_numbers: None,
        };
        assert!(matches!(decide_selectivity(&inst), Err(SelectivityError::InconsistentInstance(_))));
    }

    #[test]
    fn missing_or_wrong_norm_subgroup_is_flagged() {
        let cl = z3();
        let k = FieldData { norm_subgroup: None, ..unramified_k(&cl) };
        assert!(matches!(
            sandwich_report(&instance(cl.clone(), vec![], k)),
            Err(SelectivityError::InconsistentInstance(_))
        ));
        let k = FieldData { norm_subgroup: Some(cl.full_subgroup()), ..unramified_k(&cl) };
        assert!(matches!(sandwich_report(&instance(cl, vec![], k)), Err(SelectivityError::InconsistentInstance(_))));
    }

    #[test]
    fn split_ramified_prime_blocks_embedding() {
        let cl = FiniteAbelianGroup::new(vec![3, 3]).unwrap();
        let u_k = Subgroup::new(&cl, vec![vec![1, 0]]).unwrap();
        let k = FieldData { norm_subgroup: Some(u_k), ..unramified_k(&cl) };
        let inst = GlobalInstance {
            degree_p: 3,
            class_group: cl,
            ramified_primes: vec![RamifiedPrime { class: vec![1, 0], frobenius: Some(Frobenius::Split) }],
            k,
            local_embedding_numbers: None,
        };
        let report = decide_selectivity(&inst).unwrap();
        assert!(!report.can_embed);
        assert!(!report.selective);
        assert_eq!(report.admitting_count(), 0);
    }

    #[test]
    fn global_count_examples() {
        assert_eq!(global_embedding_count(&[]).value, 1);
        let c = global_embedding_count(&[1, 1, 1]);
        assert_eq!((c.value, c.violations.len()), (1, 0));
        let c = global_embedding_count(&[1, 0]);
        assert_eq!((c.value, c.violations.len()), (0, 1));
    }

    #[test]
    fn random_instances_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let inst = random_instance(&mut rng);
            inst.validate().unwrap();
            let report = decide_selectivity(&inst).unwrap();
            assert_eq!(inst.degree_p % report.type_group.exponent(), 0);
            if report.selective {
                assert!(inst.ramified_primes.is_empty());
                assert_eq!(report.admitting_count() * inst.degree_p, report.type_number);
            }
        }
    }
}
