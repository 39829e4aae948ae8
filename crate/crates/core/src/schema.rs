//! Versioned JSON shapes read and written by the command-line tool.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abelian_groups::{FiniteAbelianGroup, GroupError, Subgroup};
use crate::local_arith::{LocalMatrix, LocalRing};
use crate::optimal_embed::{
    count_orbits, enumerate_embeddings, local_embedding_number, regular_representation, AlgebraKind, EmbedError,
    LocalEmbedding, OptimalityWitness, OrbitLevel, SizeGuards,
};
use crate::orders::{OrderError, OrderPresentation, ResidueAlgebraClass};
use crate::selectivity::{
    decide_selectivity, global_embedding_count, sandwich_report, AdmittingTypes, FieldData, Frobenius, GlobalInstance,
    RamifiedPrime, SandwichRole, SelectivityError,
};

pub const SCHEMA_VERSION: &str = "v1";

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema version {0:?}, expected \"v1\"")]
    Version(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Selectivity(#[from] SelectivityError),
    #[error("optimality criteria disagree: {0}")]
    CriteriaDisagree(String),
    #[error("size guard exceeded: {0}")]
    SizeGuard(String),
}

impl SchemaError {
    pub fn is_size_guard(&self) -> bool {
        matches!(self, Self::SizeGuard(_) | Self::Embed(EmbedError::SizeGuardExceeded { .. }))
    }
}

fn check_version(schema: &Option<String>) -> Result<(), SchemaError> {
    match schema {
        Some(v) if v != SCHEMA_VERSION => Err(SchemaError::Version(v.clone())),
        _ => Ok(()),
    }
}

fn default_precision() -> u32 {
    1
}

fn v1() -> String {
    SCHEMA_VERSION.to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderSpec {
    MonicPoly(Vec<i64>),
    StructureConstants(Vec<Vec<Vec<i64>>>),
}

/// An order, optionally with the images `A_1, ..., A_n` of its basis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemInput {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub q: u64,
    #[serde(default = "default_precision")]
    pub k: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<OrderSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrices: Option<Vec<Vec<Vec<i64>>>>,
}

impl ProblemInput {
    pub fn parse(text: &str) -> Result<Self, SchemaError> {
        let input: Self = serde_json::from_str(text)?;
        check_version(&input.schema)?;
        Ok(input)
    }

    pub fn ring(&self) -> Result<LocalRing, SchemaError> {
        Ok(LocalRing::new(self.q, self.k).map_err(OrderError::from)?)
    }

    pub fn order(&self) -> Result<OrderPresentation, SchemaError> {
        let ring = self.ring()?;
        let order = match &self.order {
            Some(OrderSpec::MonicPoly(coeffs)) => OrderPresentation::from_monic_coeffs(ring, coeffs)?,
            Some(OrderSpec::StructureConstants(c)) => OrderPresentation::from_structure_constants(ring, c)?,
            None => return Err(SchemaError::Input("missing \"order\"".into())),
        };
        if let Some(n) = self.n {
            if n != order.rank() {
                return Err(SchemaError::Input(format!("n = {n} but the order has rank {}", order.rank())));
            }
        }
        order.validate().map_err(OrderError::from)?;
        Ok(order)
    }

    /// The embedding given by `matrices`. Without an explicit order the
    /// second matrix generates one through its characteristic polynomial.
    pub fn embedding(&self) -> Result<LocalEmbedding, SchemaError> {
        let ring = self.ring()?;
        let rows = self.matrices.as_ref().ok_or_else(|| SchemaError::Input("missing \"matrices\"".into()))?;
        let matrices = rows
            .iter()
            .map(|m| LocalMatrix::from_rows(ring, m))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| SchemaError::Input(e.to_string()))?;
        if let Some(first) = matrices.first() {
            if !first.is_identity() {
                return Err(EmbedError::IdentityNotPreserved.into());
            }
        }
        let emb = match self.order {
            Some(_) => LocalEmbedding::new(self.order()?, matrices)?,
            None => {
                if matrices.len() != 2 {
                    return Err(SchemaError::Input(
                        "an embedding without \"order\" must list exactly [A_1, A_2]".into(),
                    ));
                }
                LocalEmbedding::from_generator(&matrices[1])?
            }
        };
        if let Some(n) = self.n {
            if n != emb.dim() {
                return Err(SchemaError::Input(format!("n = {n} but the matrices have size {}", emb.dim())));
            }
        }
        emb.verify_homomorphism()?;
        Ok(emb)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessJson {
    Minor(Vec<[usize; 2]>),
    Dependence(Vec<u64>),
}

impl From<&OptimalityWitness> for WitnessJson {
    fn from(w: &OptimalityWitness) -> Self {
        match w {
            OptimalityWitness::Minor { selection, .. } => Self::Minor(selection.iter().map(|&(s, t)| [s, t]).collect()),
            OptimalityWitness::Dependence { coefficients } => Self::Dependence(coefficients.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriteriaJson {
    pub independence: bool,
    pub minor: bool,
    pub oracle: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadratic: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptimalReport {
    pub schema: String,
    pub optimal: bool,
    pub witness: WitnessJson,
    pub criteria: CriteriaJson,
}

/// Runs every applicable criterion and fails unless they agree and the
/// witness re-verifies.
pub fn optimal_report(emb: &LocalEmbedding) -> Result<OptimalReport, SchemaError> {
    let independence = emb.is_optimal_independence()?;
    let (minor, witness) = emb.is_optimal_minor()?;
    let oracle = emb.is_optimal_oracle()?;
    let quadratic = if emb.dim() == 2 { Some(emb.quadratic_criterion()?) } else { None };
    let criteria = CriteriaJson { independence, minor, oracle, quadratic };
    if minor != independence || oracle != independence || quadratic.is_some_and(|v| v != independence) {
        return Err(SchemaError::CriteriaDisagree(format!("{criteria:?}")));
    }
    if !witness.verify(emb) {
        return Err(SchemaError::CriteriaDisagree(format!("witness {witness:?} does not re-verify")));
    }
    Ok(OptimalReport { schema: v1(), optimal: independence, witness: (&witness).into(), criteria })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub schema: String,
    pub q: u64,
    pub k: u32,
    pub n: usize,
    pub matrices: Vec<Vec<Vec<u64>>>,
    pub optimal: bool,
    pub witness: WitnessJson,
}

pub fn regrep_report(order: &OrderPresentation) -> Result<EmbeddingReport, SchemaError> {
    let emb = regular_representation(order)?;
    let check = optimal_report(&emb)?;
    if !check.optimal {
        return Err(SchemaError::CriteriaDisagree("regular representation is not optimal".into()));
    }
    let ring = order.ring();
    Ok(EmbeddingReport {
        schema: v1(),
        q: ring.q(),
        k: ring.k(),
        n: order.rank(),
        matrices: emb.matrices().iter().map(LocalMatrix::rows).collect(),
        optimal: true,
        witness: check.witness,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountReport {
    pub schema: String,
    pub q: u64,
    pub k: u32,
    pub n: usize,
    pub m: usize,
    pub homomorphisms: usize,
    pub total_embeddings: usize,
    pub optimal_embeddings: usize,
    pub orbit_sizes: Vec<usize>,
    /// Image of `x` for the first member of each orbit.
    pub representatives: Vec<Vec<Vec<u64>>>,
    pub levels: Vec<OrbitLevel>,
    pub residue_class: ResidueAlgebraClass,
    pub theorem_applies: bool,
    pub caveat: String,
}

pub fn count_report(order: &OrderPresentation, guards: &SizeGuards) -> Result<CountReport, SchemaError> {
    let candidates = enumerate_embeddings(order, guards)?;
    let orbits = count_orbits(&candidates, guards)?;
    let number = local_embedding_number(order, AlgebraKind::Matrix, guards)?;
    let ring = order.ring();
    Ok(CountReport {
        schema: v1(),
        q: ring.q(),
        k: ring.k(),
        n: order.rank(),
        m: orbits.m,
        homomorphisms: orbits.homomorphisms,
        total_embeddings: orbits.total_embeddings,
        optimal_embeddings: orbits.optimal_embeddings,
        orbit_sizes: orbits.orbit_sizes,
        representatives: orbits
            .representatives
            .iter()
            .map(|e| e.matrices().get(1).map(LocalMatrix::rows).unwrap_or_default())
            .collect(),
        levels: number.levels,
        residue_class: number.class,
        theorem_applies: number.theorem_applies,
        caveat: number.caveat,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupJson {
    pub cyclic_orders: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgroupJson {
    pub generators: Vec<Vec<u64>>,
}

impl From<&Subgroup> for SubgroupJson {
    fn from(s: &Subgroup) -> Self {
        Self { generators: s.canonical_generators() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RamifiedPrimeJson {
    pub class: Vec<u64>,
    #[serde(rename = "frobenius_in_K", default, skip_serializing_if = "Option::is_none")]
    pub frobenius_in_k: Option<Frobenius>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldJson {
    pub galois: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abelian: Option<bool>,
    pub unramified_finite: bool,
    pub unramified_real: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_subgroup: Option<SubgroupJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceInput {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub degree_p: u64,
    pub class_group: GroupJson,
    #[serde(default)]
    pub ramified_primes: Vec<RamifiedPrimeJson>,
    #[serde(rename = "K")]
    pub k: FieldJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local_embedding_numbers: Option<Vec<u64>>,
}

impl InstanceInput {
    pub fn parse(text: &str) -> Result<Self, SchemaError> {
        let input: Self = serde_json::from_str(text)?;
        check_version(&input.schema)?;
        Ok(input)
    }

    pub fn to_instance(&self, max_group_order: u64) -> Result<GlobalInstance, SchemaError> {
        let orders = &self.class_group.cyclic_orders;
        let order = orders.iter().try_fold(1u64, |acc, &d| acc.checked_mul(d)).unwrap_or(u64::MAX);
        if order > max_group_order {
            return Err(SchemaError::SizeGuard(format!("class group order {order} > {max_group_order}")));
        }
        let cl = FiniteAbelianGroup::new(orders.clone())?;
        let norm_subgroup = match &self.k.norm_subgroup {
            Some(s) => Some(Subgroup::new(&cl, s.generators.clone())?),
            None => None,
        };
        let inst = GlobalInstance {
            degree_p: self.degree_p,
            class_group: cl,
            ramified_primes: self
                .ramified_primes
                .iter()
                .map(|r| RamifiedPrime { class: r.class.clone(), frobenius: r.frobenius_in_k })
                .collect(),
            k: FieldData {
                galois: self.k.galois,
                abelian: self.k.abelian.unwrap_or(self.k.galois),
                unramified_finite: self.k.unramified_finite,
                unramified_real: self.k.unramified_real,
                norm_subgroup,
            },
            local_embedding_numbers: self.local_embedding_numbers.clone(),
        };
        inst.validate()?;
        Ok(inst)
    }
}

impl From<&GlobalInstance> for InstanceInput {
    fn from(inst: &GlobalInstance) -> Self {
        Self {
            schema: Some(v1()),
            degree_p: inst.degree_p,
            class_group: GroupJson { cyclic_orders: inst.class_group.cyclic_orders().to_vec() },
            ramified_primes: inst
                .ramified_primes
                .iter()
                .map(|r| RamifiedPrimeJson { class: r.class.clone(), frobenius_in_k: r.frobenius })
                .collect(),
            k: FieldJson {
                galois: inst.k.galois,
                abelian: Some(inst.k.abelian),
                unramified_finite: inst.k.unramified_finite,
                unramified_real: inst.k.unramified_real,
                norm_subgroup: inst
                    .k
                    .norm_subgroup
                    .as_ref()
                    .map(|s| SubgroupJson { generators: s.generators().to_vec() }),
            },
            local_embedding_numbers: inst.local_embedding_numbers.clone(),
        }
    }
}

/// Either a count of admitting types or the literal `"all"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AdmittingJson {
    Count(u64),
    Label(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingCountJson {
    pub value: u64,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecideReport {
    pub schema: String,
    pub can_embed: bool,
    pub selective: bool,
    pub proportion: String,
    pub admitting: AdmittingJson,
    pub of: u64,
    pub type_group: GroupJson,
    pub type_number: u64,
    pub h_subgroup: SubgroupJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub admitting_types: Option<SubgroupJson>,
    pub sandwich_indices: [u64; 3],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub global_embedding_count: Option<EmbeddingCountJson>,
    pub notes: Vec<String>,
}

pub fn decide_report(inst: &GlobalInstance) -> Result<DecideReport, SchemaError> {
    let report = decide_selectivity(inst)?;
    let (admitting, admitting_types) = match &report.admitting_types {
        AdmittingTypes::All => (AdmittingJson::Label("all".into()), None),
        AdmittingTypes::Subgroup(s) => (AdmittingJson::Count(s.order()), Some(s.into())),
        AdmittingTypes::None => (AdmittingJson::Count(0), None),
    };
    let global = inst.local_embedding_numbers.as_deref().map(|numbers| {
        let c = global_embedding_count(numbers);
        EmbeddingCountJson { value: c.value, violations: c.violations }
    });
    Ok(DecideReport {
        schema: v1(),
        can_embed: report.can_embed,
        selective: report.selective,
        proportion: report.proportion.to_string(),
        admitting,
        of: report.type_number,
        type_group: GroupJson { cyclic_orders: report.type_group.cyclic_orders().to_vec() },
        type_number: report.type_number,
        h_subgroup: (&report.h_subgroup).into(),
        admitting_types,
        sandwich_indices: report.sandwich_indices,
        global_embedding_count: global,
        notes: report.notes,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SandwichGroupJson {
    pub role: SandwichRole,
    pub index: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<Vec<u64>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub schema: String,
    pub indices: [u64; 3],
    pub formal: bool,
    pub groups: Vec<SandwichGroupJson>,
}

pub fn sandwich_json(inst: &GlobalInstance) -> Result<SandwichReport, SchemaError> {
    let s = sandwich_report(inst)?;
    Ok(SandwichReport {
        schema: v1(),
        indices: s.indices,
        formal: s.formal,
        groups: s
            .groups
            .iter()
            .map(|g| SandwichGroupJson {
                role: g.role,
                index: g.index,
                generators: g.subgroup.as_ref().map(Subgroup::canonical_generators),
            })
            .collect(),
    })
}
