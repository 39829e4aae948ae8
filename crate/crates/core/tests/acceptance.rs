//! Acceptance suite. Runs without the libtest harness so every criterion
//! prints exactly one PASS/FAIL line; the process fails if any criterion does.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use selectis::optimal_embed::{count_orbits, enumerate_embeddings, local_embedding_number};
use selectis::selectivity::{random_instance, AdmittingTypes};
use selectis::{
    decide_selectivity, global_embedding_count, regular_representation, sandwich_report, type_group, AlgebraKind,
    GlobalInstance, LocalEmbedding, LocalMatrix, LocalRing, LocalScalar, OrderPresentation, ResidueAlgebraTag,
    SizeGuards,
};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn ring(q: u64, k: u32) -> LocalRing {
    LocalRing::new(q, k).unwrap()
}

fn all_2x2(r: LocalRing) -> impl Iterator<Item = LocalMatrix> {
    let m = r.modulus();
    (0..m.pow(4)).map(move |code| {
        let entries = (0..4).map(|i| code / m.pow(i) % m).collect();
        LocalMatrix::new(r, 2, entries).unwrap()
    })
}

fn random_matrix(rng: &mut ChaCha8Rng, r: LocalRing, n: usize) -> LocalMatrix {
    let entries = (0..n * n).map(|_| rng.gen_range(0..r.modulus())).collect();
    LocalMatrix::new(r, n, entries).unwrap()
}

fn all_monic(r: LocalRing, n: usize) -> Vec<OrderPresentation> {
    let m = r.modulus();
    (0..m.pow(n as u32))
        .map(|code| {
            let coeffs: Vec<LocalScalar> = (0..n).map(|i| LocalScalar::new(r, code / m.pow(i as u32) % m)).collect();
            OrderPresentation::from_monic_poly(r, &coeffs).unwrap()
        })
        .collect()
}

fn unit(x: u64, q: u64) -> bool {
    !x.is_multiple_of(q)
}

/// Independent statement of the `n = 2` closed form on `A_2 = [[a, b], [c, d]]`.
fn closed_form(a2: &LocalMatrix) -> bool {
    let q = a2.ring().q();
    let e = a2.entries();
    unit(e[1], q) || unit(e[2], q) || unit((e[3] % q + q - e[0] % q) % q, q)
}

fn criteria_agree(emb: &LocalEmbedding) -> Result<bool, String> {
    let independence = emb.is_optimal_independence().map_err(|e| e.to_string())?;
    let (minor, witness) = emb.is_optimal_minor().map_err(|e| e.to_string())?;
    let oracle = emb.is_optimal_oracle().map_err(|e| e.to_string())?;
    let quadratic = if emb.dim() == 2 { Some(emb.quadratic_criterion().map_err(|e| e.to_string())?) } else { None };
    if minor != independence || oracle != independence || quadratic.is_some_and(|v| v != independence) {
        return Err(format!(
            "criteria disagree on {:?}: independence {independence}, minor {minor}, oracle {oracle}, quadratic {quadratic:?}",
            emb.matrices().iter().map(LocalMatrix::rows).collect::<Vec<_>>()
        ));
    }
    if !witness.verify(emb) {
        return Err(format!("witness {witness:?} does not re-verify"));
    }
    Ok(independence)
}

fn criterion_equivalence() -> Outcome {
    let mut exhaustive = 0;
    let mut optimal = 0;
    for (q, k) in [(2, 1), (2, 2), (3, 1), (3, 2)] {
        for a in all_2x2(ring(q, k)) {
            let emb = LocalEmbedding::from_generator(&a).map_err(|e| e.to_string())?;
            optimal += usize::from(criteria_agree(&emb)?);
            exhaustive += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5E1E_C715);
    let mut cubic_optimal = 0;
    for i in 0..1000 {
        let r = ring([2, 3, 5][i % 3], 1 + (i / 3 % 2) as u32);
        let mut a = random_matrix(&mut rng, r, 3);
        if i % 4 == 0 {
            // scalar modulo q, so the embedding is never optimal
            let q = LocalScalar::new(r, r.q());
            let lambda = rng.gen_range(0..r.q());
            a = LocalMatrix::identity(r, 3)
                .scale(&LocalScalar::new(r, lambda))
                .unwrap()
                .add(&a.scale(&q).unwrap())
                .unwrap();
        }
        let emb = LocalEmbedding::from_generator(&a).map_err(|e| e.to_string())?;
        cubic_optimal += usize::from(criteria_agree(&emb)?);
    }
    Ok(format!("{exhaustive} exhaustive n=2 embeddings ({optimal} optimal), 1000 random n=3 ({cubic_optimal} optimal)"))
}

fn quadratic_truth_table() -> Outcome {
    let mut rows = 0;
    for (q, k) in [(2, 1), (2, 2), (3, 1), (3, 2)] {
        for a in all_2x2(ring(q, k)) {
            let emb = LocalEmbedding::from_generator(&a).map_err(|e| e.to_string())?;
            let verdict = emb.is_optimal_independence().map_err(|e| e.to_string())?;
            if verdict != closed_form(&a) {
                return Err(format!("A_2 = {:?} over Z/{q}^{k}: verdict {verdict}", a.rows()));
            }
            rows += 1;
        }
    }
    Ok(format!("{rows} rows agree with \"b, c or d - a is a unit\""))
}

fn regular_representation_optimal() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0E6E_0500);
    for i in 0..500 {
        let n = 2 + i % 2;
        let r = ring([2, 3, 5][rng.gen_range(0..3)], rng.gen_range(1..=2));
        let coeffs: Vec<LocalScalar> = (0..n).map(|_| LocalScalar::new(r, rng.gen_range(0..r.modulus()))).collect();
        let order = OrderPresentation::from_monic_poly(r, &coeffs).map_err(|e| e.to_string())?;
        let emb = regular_representation(&order).map_err(|e| e.to_string())?;
        emb.verify_homomorphism().map_err(|e| e.to_string())?;
        if !criteria_agree(&emb)? {
            return Err(format!(
                "regular representation of {:?} over Z/{}^{} is not optimal",
                order.monic_coefficients(),
                r.q(),
                r.k()
            ));
        }
    }
    Ok("500 orders, all optimal under every criterion".into())
}

fn local_uniqueness() -> Outcome {
    let guards = SizeGuards::default();
    let mut checked = 0;
    for (n, q, k) in [(2, 2, 1), (2, 3, 1), (3, 2, 1), (2, 2, 2), (2, 3, 2)] {
        for order in all_monic(ring(q, k), n) {
            let tag = order.classify_residue_algebra().tag;
            if !matches!(tag, ResidueAlgebraTag::SplitEtale | ResidueAlgebraTag::UnramifiedField) {
                continue;
            }
            let candidates = enumerate_embeddings(&order, &guards).map_err(|e| e.to_string())?;
            let m = count_orbits(&candidates, &guards).map_err(|e| e.to_string())?.m;
            if m != 1 {
                return Err(format!("f = {:?} over Z/{q}^{k} ({tag:?}): m = {m}", order.monic_coefficients()));
            }
            checked += 1;
        }
    }
    Ok(format!("m = 1 for all {checked} unramified monogenic orders"))
}

fn det_v_identity() -> Outcome {
    let mut checks = 0;
    for (q, k) in [(2, 1), (2, 2), (3, 1), (3, 2)] {
        let r = ring(q, k);
        for a in all_2x2(r) {
            let emb = LocalEmbedding::from_generator(&a).map_err(|e| e.to_string())?;
            for code in 0..q * q {
                let alpha = [LocalScalar::new(r, code % q), LocalScalar::new(r, code / q)];
                let v = emb.assemble_v(&alpha).map_err(|e| e.to_string())?;
                let expanded = emb.det_v_by_minors(&alpha).map_err(|e| e.to_string())?;
                if v.det() != expanded {
                    return Err(format!("A_2 = {:?}, alpha = ({}, {})", a.rows(), code % q, code / q));
                }
                checks += 1;
            }
        }
    }
    Ok(format!("{checks} (embedding, alpha) pairs"))
}

fn corpus(seed: u64, size: usize) -> Vec<GlobalInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..size).map(|_| random_instance(&mut rng)).collect()
}

fn type_group_structure() -> Outcome {
    for inst in corpus(0x7E_0200, 200) {
        let p = inst.degree_p;
        let t = type_group(&inst).map_err(|e| e.to_string())?;
        let cl_mod_p = inst.class_group.power_subgroup(p).index();
        if p % t.group().exponent() != 0 || cl_mod_p % t.type_number() != 0 {
            return Err(format!("Cl = {}, p = {p}: T = {}", inst.class_group, t.group()));
        }
    }
    Ok("200 instances, exponent divides p and |T| divides |Cl/Cl^p|".into())
}

fn proportions(instances: &[GlobalInstance]) -> Outcome {
    let (mut selective, mut all) = (0, 0);
    for inst in instances {
        let report = decide_selectivity(inst).map_err(|e| e.to_string())?;
        if !report.can_embed {
            continue;
        }
        match (&report.admitting_types, report.selective) {
            (AdmittingTypes::Subgroup(s), true) if s.index() == inst.degree_p && s.ambient() == &report.type_group => {
                selective += 1
            }
            (AdmittingTypes::All, false) => all += 1,
            _ => {
                return Err(format!(
                    "Cl = {}: selective {} with {:?}",
                    inst.class_group, report.selective, report.admitting_types
                ))
            }
        }
    }
    if selective == 0 {
        return Err("corpus contains no selective instance".into());
    }
    Ok(format!("{selective} selective with index p, {all} embeddable non-selective with all types"))
}

fn sandwich_arithmetic(instances: &[GlobalInstance]) -> Outcome {
    let (mut galois, mut other) = (0, 0);
    for inst in instances {
        let s = sandwich_report(inst).map_err(|e| e.to_string())?;
        let product: u64 = s.indices.iter().product();
        let strict = s.indices.iter().filter(|&&i| i > 1).count();
        let ok = if inst.k.galois { product == inst.degree_p && strict <= 1 } else { s.indices == [1, 1, 1] };
        if !ok {
            return Err(format!("Cl = {}, galois {}: indices {:?}", inst.class_group, inst.k.galois, s.indices));
        }
        if inst.k.galois {
            galois += 1;
        } else {
            other += 1;
        }
    }
    Ok(format!("{galois} Galois instances multiply to p, {other} non-Galois are (1,1,1)"))
}

fn emergent_consistency(instances: &[GlobalInstance]) -> Outcome {
    let mut selective = 0;
    for inst in instances {
        let report = decide_selectivity(inst).map_err(|e| e.to_string())?;
        if report.selective {
            if !inst.ramified_primes.is_empty() {
                return Err(format!(
                    "selective with {} ramified primes in Cl = {}",
                    inst.ramified_primes.len(),
                    inst.class_group
                ));
            }
            selective += 1;
        }
    }
    Ok(format!("{selective} selective instances among {}, none ramified", instances.len()))
}

fn product_formula() -> Outcome {
    for len in 0..8 {
        let c = global_embedding_count(&vec![1; len]);
        if c.value != 1 || !c.violations.is_empty() {
            return Err(format!("{len} unit factors give {}", c.value));
        }
    }
    let guards = SizeGuards::default();
    let mut factors = Vec::new();
    for (n, q, k) in [(2, 2, 1), (2, 3, 1), (3, 2, 1), (2, 2, 2), (2, 3, 2)] {
        for order in all_monic(ring(q, k), n) {
            let class = order.classify_residue_algebra();
            let kinds: &[AlgebraKind] = match class.tag {
                ResidueAlgebraTag::SplitEtale => &[AlgebraKind::Matrix],
                ResidueAlgebraTag::UnramifiedField => &[AlgebraKind::Matrix, AlgebraKind::Division { maximal: true }],
                ResidueAlgebraTag::Other => continue,
            };
            for &kind in kinds {
                let number = local_embedding_number(&order, kind, &guards).map_err(|e| e.to_string())?;
                if number.value != 1 {
                    return Err(format!(
                        "f = {:?} over Z/{q}^{k}, {kind:?}: {}",
                        order.monic_coefficients(),
                        number.value
                    ));
                }
                factors.push(number.value as u64);
            }
        }
    }
    let total = global_embedding_count(&factors);
    if total.value != 1 || !total.violations.is_empty() {
        return Err(format!("product of {} local factors is {}", factors.len(), total.value));
    }
    Ok(format!("{} local factors all 1, product 1", factors.len()))
}

fn main() {
    let instances = corpus(0xC0_5E1E, 1000);
    let criteria: Vec<Criterion> = vec![
        ("criterion equivalence", Box::new(criterion_equivalence)),
        ("n=2 closed form", Box::new(quadratic_truth_table)),
        ("regular representation optimality", Box::new(regular_representation_optimal)),
        ("local uniqueness m = 1", Box::new(local_uniqueness)),
        ("det V expansion identity", Box::new(det_v_identity)),
        ("type group structure", Box::new(type_group_structure)),
        ("main theorem proportions", Box::new(|| proportions(&instances))),
        ("sandwich arithmetic", Box::new(|| sandwich_arithmetic(&instances))),
        ("emergent consistency", Box::new(|| emergent_consistency(&instances))),
        ("product formula", Box::new(product_formula)),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.2}s]", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
