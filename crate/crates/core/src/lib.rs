//! Optimal embeddings of local orders into matrix algebras and selectivity
//! decisions for global embeddings.
//!
//! The local side works over `Z/q^k` with exact arithmetic: orders are given
//! by structure constants, embeddings by the images of a basis, and
//! optimality is decided by several independent criteria. The global side
//! models class groups as finite abelian groups and decides selectivity from
//! norm-group containments.

#![allow(clippy::needless_range_loop)]

pub mod abelian_groups;
pub mod crosscheck;
pub mod local_arith;
pub mod optimal_embed;
pub mod orders;
pub mod schema;
pub mod selectivity;

pub use abelian_groups::{FiniteAbelianGroup, GroupError, Quotient, Subgroup};
pub use local_arith::{ArithError, LocalMatrix, LocalRing, LocalScalar, ResidueMatrix};
pub use optimal_embed::{
    regular_representation, AlgebraKind, EmbedError, LocalEmbedding, OptimalityWitness, OrbitCount, SizeGuards,
};
pub use orders::{OrderError, OrderPresentation, ResidueAlgebraClass, ResidueAlgebraTag};
pub use selectivity::{
    can_embed_globally, decide_selectivity, global_embedding_count, sandwich_report, type_group, GlobalInstance,
    SelectivityError, SelectivityReport,
};
