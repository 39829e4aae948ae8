//! Seeded property suite behind `selectis verify`.
//!
//! Every family draws from its own generator derived from the seed, so the
//! report depends only on the configuration. Families run in a fixed order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::local_arith::{LocalMatrix, LocalRing, LocalScalar};
use crate::optimal_embed::{
    count_orbits, enumerate_embeddings, local_embedding_number, regular_representation, AlgebraKind, EmbedError,
    LocalEmbedding, SizeGuards,
};
use crate::orders::{OrderPresentation, ResidueAlgebraTag};
use crate::schema::InstanceInput;
use crate::selectivity::{
    can_embed_globally, decide_selectivity, global_embedding_count, random_instance, sandwich_report, type_group,
    AdmittingTypes, Frobenius, GlobalInstance, RamifiedPrime,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyConfig {
    pub seed: u64,
    pub guards: SizeGuards,
    /// Feeds the minor criterion a copy of each embedding with one entry of
    /// `A_2` bumped, which the suite must detect.
    pub mutant: bool,
    pub random_cubics: usize,
    pub random_orders: usize,
    pub instances: usize,
}

impl VerifyConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            guards: SizeGuards::default(),
            mutant: false,
            random_cubics: 1000,
            random_orders: 500,
            instances: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyReport {
    pub name: &'static str,
    pub cases: usize,
    pub passed: usize,
    pub failed: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Value>,
}

impl FamilyReport {
    fn new(name: &'static str) -> Self {
        Self { name, cases: 0, passed: 0, failed: 0, counterexample: None }
    }

    fn record(&mut self, ok: bool, counterexample: impl FnOnce() -> Value) {
        self.cases += 1;
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
            if self.counterexample.is_none() {
                self.counterexample = Some(counterexample());
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifySummary {
    pub schema: &'static str,
    pub seed: u64,
    pub mutant: bool,
    pub families: Vec<FamilyReport>,
    pub all_passed: bool,
}

impl VerifySummary {
    pub fn first_failure(&self) -> Option<&FamilyReport> {
        self.families.iter().find(|f| f.failed > 0)
    }
}

pub fn run(config: &VerifyConfig) -> Result<VerifySummary, EmbedError> {
    let g = &config.guards;
    if g.max_n < 2 {
        return Err(EmbedError::SizeGuardExceeded { what: "n", value: 2, limit: g.max_n as u64 });
    }
    let rng = |family: u64| ChaCha8Rng::seed_from_u64(config.seed ^ family.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let corpus = instance_corpus(&mut rng(100), config);

    let families = vec![
        criterion_equivalence(config, &mut rng(1)),
        quadratic_closed_form(config),
        regular_representation_family(config, &mut rng(3)),
        orbit_uniqueness(config),
        det_v_expansion(config),
        type_group_exponent(&corpus),
        main_theorem_proportions(&corpus),
        sandwich_product(&corpus),
        emergent_no_ramification(&corpus),
        monotonicity(&corpus, &mut rng(10)),
        product_formula(config, &corpus, &mut rng(11)),
    ];
    let all_passed = families.iter().all(|f| f.failed == 0);
    Ok(VerifySummary {
        schema: crate::schema::SCHEMA_VERSION,
        seed: config.seed,
        mutant: config.mutant,
        families,
        all_passed,
    })
}

fn rings(guards: &SizeGuards, qs: &[u64]) -> Vec<LocalRing> {
    let mut out = Vec::new();
    for &q in qs.iter().filter(|&&q| q <= guards.max_q) {
        for k in 1..=guards.max_k.min(2) {
            out.push(LocalRing::new(q, k).expect("small prime power"));
        }
    }
    out
}

/// Every `2 x 2` matrix over the ring, in lexicographic order of entries.
fn all_quadratic_generators(ring: LocalRing) -> impl Iterator<Item = LocalMatrix> {
    let m = ring.modulus();
    (0..m.pow(4)).map(move |code| {
        let entries = (0..4).map(|i| code / m.pow(3 - i) % m).collect();
        LocalMatrix::new(ring, 2, entries).expect("in range")
    })
}

fn random_matrix(rng: &mut ChaCha8Rng, ring: LocalRing, n: usize) -> LocalMatrix {
    let m = ring.modulus();
    LocalMatrix::new(ring, n, (0..n * n).map(|_| rng.gen_range(0..m)).collect()).expect("in range")
}

/// Random generators, a third of them scalar modulo `q` so that
/// non-optimal embeddings are well represented.
fn random_generator(rng: &mut ChaCha8Rng, ring: LocalRing, n: usize) -> LocalMatrix {
    let a = random_matrix(rng, ring, n);
    if rng.gen_ratio(1, 3) {
        let lambda = rng.gen_range(0..ring.q());
        let scalar = LocalMatrix::identity(ring, n).scale_raw(lambda);
        let q = LocalScalar::new(ring, ring.reduce(ring.q()));
        scalar.add(&a.scale(&q).expect("same ring")).expect("same ring")
    } else {
        a
    }
}

fn mutate(emb: &LocalEmbedding) -> LocalEmbedding {
    let a2 = &emb.matrices()[1];
    let ring = a2.ring();
    let mut entries = a2.entries().to_vec();
    entries[1] = ring.add_raw(entries[1], 1);
    let bumped = LocalMatrix::new(ring, a2.dim(), entries).expect("in range");
    LocalEmbedding::from_generator(&bumped).expect("characteristic polynomial order")
}

fn embedding_json(emb: &LocalEmbedding) -> Value {
    let ring = emb.ring();
    json!({
        "q": ring.q(),
        "k": ring.k(),
        "n": emb.dim(),
        "matrices": emb.matrices().iter().map(LocalMatrix::rows).collect::<Vec<_>>(),
    })
}

fn check_criteria(emb: &LocalEmbedding, mutant: bool) -> (bool, Value) {
    let verdicts = (|| -> Result<_, EmbedError> {
        let independence = emb.is_optimal_independence()?;
        let target = if mutant { mutate(emb) } else { emb.clone() };
        let (minor, witness) = target.is_optimal_minor()?;
        let witness_ok = witness.verify(&target);
        let oracle = emb.is_optimal_oracle()?;
        let quadratic = if emb.dim() == 2 { Some(emb.quadratic_criterion()?) } else { None };
        Ok((independence, minor, oracle, quadratic, witness_ok))
    })();
    match verdicts {
        Ok((independence, minor, oracle, quadratic, witness_ok)) => {
            let ok = minor == independence
                && oracle == independence
                && quadratic.is_none_or(|v| v == independence)
                && witness_ok;
            let detail = json!({
                "independence": independence,
                "minor": minor,
                "oracle": oracle,
                "quadratic": quadratic,
                "witness_verifies": witness_ok,
            });
            (ok, detail)
        }
        Err(e) => (false, json!({ "error": e.to_string() })),
    }
}

fn criterion_equivalence(config: &VerifyConfig, rng: &mut ChaCha8Rng) -> FamilyReport {
    let mut report = FamilyReport::new("criterion_equivalence");
    for ring in rings(&config.guards, &[2, 3]) {
        for a in all_quadratic_generators(ring) {
            let emb = LocalEmbedding::from_generator(&a).expect("characteristic polynomial order");
            let (ok, detail) = check_criteria(&emb, config.mutant);
            report.record(ok, || json!({ "embedding": embedding_json(&emb), "verdicts": detail }));
        }
    }
    if config.guards.max_n >= 3 {
        let cubic_rings = rings(&config.guards, &[2, 3, 5]);
        for _ in 0..config.random_cubics {
            let ring = cubic_rings[rng.gen_range(0..cubic_rings.len())];
            let emb = LocalEmbedding::from_generator(&random_generator(rng, ring, 3))
                .expect("characteristic polynomial order");
            let (ok, detail) = check_criteria(&emb, config.mutant);
            report.record(ok, || json!({ "embedding": embedding_json(&emb), "verdicts": detail }));
        }
    }
    report
}

fn quadratic_closed_form(config: &VerifyConfig) -> FamilyReport {
    let mut report = FamilyReport::new("quadratic_closed_form");
    for ring in rings(&config.guards, &[2, 3]) {
        let q = ring.q();
        for a in all_quadratic_generators(ring) {
            let e = a.entries();
            let expected = e[1] % q != 0 || e[2] % q != 0 || (e[3] + q * q - e[0] % q) % q != 0;
            let emb = LocalEmbedding::from_generator(&a).expect("characteristic polynomial order");
            let verdict = emb.is_optimal_independence().ok();
            let closed = emb.quadratic_criterion().ok();
            report.record(verdict == Some(expected) && closed == Some(expected), || {
                json!({ "embedding": embedding_json(&emb), "expected": expected, "rank": verdict, "closed_form": closed })
            });
        }
    }
    report
}

fn random_monic(rng: &mut ChaCha8Rng, ring: LocalRing, n: usize) -> OrderPresentation {
    let coeffs: Vec<LocalScalar> = (0..n).map(|_| LocalScalar::new(ring, rng.gen_range(0..ring.modulus()))).collect();
    OrderPresentation::from_monic_poly(ring, &coeffs).expect("monic order")
}

fn regular_representation_family(config: &VerifyConfig, rng: &mut ChaCha8Rng) -> FamilyReport {
    let mut report = FamilyReport::new("regular_representation");
    let ranks: Vec<usize> = (2..=config.guards.max_n.min(3)).collect();
    let all = rings(&config.guards, &[2, 3, 5]);
    for _ in 0..config.random_orders {
        let ring = all[rng.gen_range(0..all.len())];
        let n = ranks[rng.gen_range(0..ranks.len())];
        let order = random_monic(rng, ring, n);
        let outcome = regular_representation(&order).map(|emb| {
            let (agree, detail) = check_criteria(&emb, config.mutant);
            let optimal = emb.is_optimal_independence().unwrap_or(false);
            (agree && optimal && emb.verify_homomorphism().is_ok(), detail)
        });
        let (ok, detail) = outcome.unwrap_or_else(|e| (false, json!({ "error": e.to_string() })));
        report.record(
            ok,
            || json!({ "q": ring.q(), "k": ring.k(), "monic_poly": order.monic_coefficients(), "verdicts": detail }),
        );
    }
    report
}

fn all_monic(ring: LocalRing, n: usize) -> impl Iterator<Item = OrderPresentation> {
    let m = ring.modulus();
    (0..m.pow(n as u32)).map(move |code| {
        let coeffs: Vec<LocalScalar> = (0..n).map(|i| LocalScalar::new(ring, code / m.pow(i as u32) % m)).collect();
        OrderPresentation::from_monic_poly(ring, &coeffs).expect("monic order")
    })
}

fn orbit_uniqueness(config: &VerifyConfig) -> FamilyReport {
    let mut report = FamilyReport::new("orbit_uniqueness");
    let g = &config.guards;
    for (n, q, k) in [(2, 2, 1), (2, 3, 1), (3, 2, 1), (2, 2, 2), (2, 3, 2)] {
        if n > g.max_n || q > g.max_q || k > g.max_k {
            continue;
        }
        let ring = LocalRing::new(q, k).expect("small prime power");
        for order in all_monic(ring, n) {
            let class = order.classify_residue_algebra();
            if !matches!(class.tag, ResidueAlgebraTag::SplitEtale | ResidueAlgebraTag::UnramifiedField) {
                continue;
            }
            let m = enumerate_embeddings(&order, g).and_then(|c| count_orbits(&c, g)).map(|o| o.m);
            if matches!(m, Err(EmbedError::SizeGuardExceeded { .. })) {
                continue;
            }
            report.record(matches!(m, Ok(1)), || {
                json!({ "q": q, "k": k, "monic_poly": order.monic_coefficients(), "class": class.tag, "m": m.map_err(|e| e.to_string()) })
            });
        }
    }
    report
}

fn det_v_expansion(config: &VerifyConfig) -> FamilyReport {
    let mut report = FamilyReport::new("det_v_expansion");
    for ring in rings(&config.guards, &[2, 3]) {
        let q = ring.q();
        let alphas: Vec<[LocalScalar; 2]> =
            (0..q * q).map(|c| [LocalScalar::new(ring, c % q), LocalScalar::new(ring, c / q)]).collect();
        for a in all_quadratic_generators(ring) {
            let emb = LocalEmbedding::from_generator(&a).expect("characteristic polynomial order");
            for alpha in &alphas {
                let direct = emb.assemble_v(alpha).map(|v| v.det().value());
                let expanded = emb.det_v_by_minors(alpha).map(|d| d.value());
                let ok = matches!((&direct, &expanded), (Ok(x), Ok(y)) if x == y);
                report.record(ok, || {
                    json!({
                        "embedding": embedding_json(&emb),
                        "alpha": [alpha[0].value(), alpha[1].value()],
                        "direct": direct.map_err(|e| e.to_string()),
                        "expanded": expanded.map_err(|e| e.to_string()),
                    })
                });
            }
        }
    }
    report
}

fn instance_corpus(rng: &mut ChaCha8Rng, config: &VerifyConfig) -> Vec<GlobalInstance> {
    let mut out = Vec::with_capacity(config.instances);
    let mut attempts = 0;
    while out.len() < config.instances && attempts < 20 * config.instances.max(1) {
        attempts += 1;
        let inst = random_instance(rng);
        if inst.class_group.order() <= config.guards.max_group_order {
            out.push(inst);
        }
    }
    out
}

fn instance_json(inst: &GlobalInstance) -> Value {
    serde_json::to_value(InstanceInput::from(inst)).expect("serializable")
}

fn type_group_exponent(corpus: &[GlobalInstance]) -> FamilyReport {
    let mut report = FamilyReport::new("type_group_exponent");
    for inst in corpus {
        let p = inst.degree_p;
        let ok = type_group(inst).is_ok_and(|t| {
            let cl_mod_p = inst.class_group.power_subgroup(p).index();
            p % t.group().exponent() == 0 && cl_mod_p % t.type_number() == 0
        });
        report.record(ok, || instance_json(inst));
    }
    report
}

fn main_theorem_proportions(corpus: &[GlobalInstance]) -> FamilyReport {
    let mut report = FamilyReport::new("main_theorem_proportions");
    for inst in corpus {
        let ok = match decide_selectivity(inst) {
            Ok(r) if !r.can_embed => true,
            Ok(r) if r.selective => match &r.admitting_types {
                AdmittingTypes::Subgroup(s) => s.index() == inst.degree_p && s.order() * inst.degree_p == r.type_number,
                _ => false,
            },
            Ok(r) => matches!(r.admitting_types, AdmittingTypes::All),
            Err(_) => false,
        };
        report.record(ok, || instance_json(inst));
    }
    report
}

fn sandwich_product(corpus: &[GlobalInstance]) -> FamilyReport {
    let mut report = FamilyReport::new("sandwich_product");
    for inst in corpus {
        let ok = sandwich_report(inst).is_ok_and(|s| {
            let product: u64 = s.indices.iter().product();
            let strict = s.indices.iter().filter(|&&i| i > 1).count();
            if inst.k.galois {
                product == inst.degree_p && strict == 1
            } else {
                product == 1
            }
        });
        report.record(ok, || instance_json(inst));
    }
    report
}

fn emergent_no_ramification(corpus: &[GlobalInstance]) -> FamilyReport {
    let mut report = FamilyReport::new("emergent_no_ramification");
    for inst in corpus {
        let ok = match (can_embed_globally(inst), decide_selectivity(inst)) {
            (Ok(true), Ok(r)) => !r.selective || inst.ramified_primes.is_empty(),
            (Ok(false), Ok(r)) => !r.selective,
            _ => false,
        };
        report.record(ok, || instance_json(inst));
    }
    report
}

/// Adds one ramified prime, with Frobenius dictated by `U_K` when `K` is
/// unramified, and checks that non-selective instances stay non-selective.
fn monotonicity(corpus: &[GlobalInstance], rng: &mut ChaCha8Rng) -> FamilyReport {
    let mut report = FamilyReport::new("monotonicity");
    for inst in corpus {
        let Ok(before) = decide_selectivity(inst) else {
            report.record(false, || instance_json(inst));
            continue;
        };
        if before.selective {
            continue;
        }
        let mut larger = inst.clone();
        let class: Vec<u64> = inst.class_group.cyclic_orders().iter().map(|&d| rng.gen_range(0..d)).collect();
        let frobenius = match &inst.k.norm_subgroup {
            Some(u_k) if u_k.contains(&class).unwrap_or(false) => Frobenius::Split,
            _ => Frobenius::Inert,
        };
        larger.ramified_primes.push(RamifiedPrime { class, frobenius: Some(frobenius) });
        let after = decide_selectivity(&larger);
        report.record(after.is_ok_and(|r| !r.selective), || instance_json(&larger));
    }
    report
}

fn product_formula(config: &VerifyConfig, corpus: &[GlobalInstance], rng: &mut ChaCha8Rng) -> FamilyReport {
    let mut report = FamilyReport::new("product_formula");
    let g = &config.guards;
    for inst in corpus {
        let numbers = inst.local_embedding_numbers.clone().unwrap_or_default();
        let count = global_embedding_count(&numbers);
        report.record(count.value == 1 && count.violations.is_empty(), || instance_json(inst));
    }
    let small = rings(g, &[2, 3]);
    let mut factors = Vec::new();
    let mut attempts = 0;
    while factors.len() < 20 && attempts < 400 {
        attempts += 1;
        let ring = small[rng.gen_range(0..small.len())];
        let order = random_monic(rng, ring, 2);
        let class = order.classify_residue_algebra();
        let kind = match class.tag {
            ResidueAlgebraTag::SplitEtale => AlgebraKind::Matrix,
            ResidueAlgebraTag::UnramifiedField if rng.gen_bool(0.5) => AlgebraKind::Division { maximal: true },
            ResidueAlgebraTag::UnramifiedField => AlgebraKind::Matrix,
            ResidueAlgebraTag::Other => continue,
        };
        let number = local_embedding_number(&order, kind, g);
        let value = number.as_ref().map(|n| n.value as u64).unwrap_or(0);
        report.record(value == 1, || {
            json!({ "q": ring.q(), "k": ring.k(), "monic_poly": order.monic_coefficients(), "kind": kind, "value": value })
        });
        factors.push(value);
    }
    let total = global_embedding_count(&factors);
    report.record(total.value == 1 && total.violations.is_empty(), || json!({ "factors": factors }));
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(seed: u64) -> VerifyConfig {
        VerifyConfig {
            guards: SizeGuards { max_k: 1, ..SizeGuards::default() },
            random_cubics: 100,
            random_orders: 50,
            instances: 60,
            ..VerifyConfig::new(seed)
        }
    }

    #[test]
    fn quick_suite_passes_and_is_deterministic() {
        let a = run(&quick(7)).unwrap();
        assert!(a.all_passed, "{:?}", a.first_failure());
        assert!(a.families.len() >= 7);
        assert_eq!(a, run(&quick(7)).unwrap());
    }

    #[test]
    fn mutant_is_caught_by_criterion_equivalence() {
        let summary = run(&VerifyConfig { mutant: true, ..quick(7) }).unwrap();
        let failure = summary.first_failure().expect("mutant must be detected");
        assert_eq!(failure.name, "criterion_equivalence");
        assert!(failure.counterexample.is_some());
    }

    #[test]
    fn dimension_guard_below_two_is_rejected() {
        let config = VerifyConfig { guards: SizeGuards { max_n: 1, ..SizeGuards::default() }, ..quick(1) };
        assert!(matches!(run(&config), Err(EmbedError::SizeGuardExceeded { .. })));
    }
}
