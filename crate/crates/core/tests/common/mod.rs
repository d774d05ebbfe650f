//! Property checks shared by the `properties` and `acceptance` targets.
//!
//! Each check runs a fixed number of randomized cases from a fixed RNG seed,
//! so failures reproduce.

#![allow(dead_code)]

use std::collections::HashSet;

use adjprobe_core::denotation::{
    intersectivity_holds, jaccard_distance, IndividualSet, JaccardRatio,
};
use adjprobe_core::embed::{toy_word_vector, EmbeddingStore};
use adjprobe_core::lexicon::{parse_lexicon, Adjective, AdjectiveType, Lexicon};
use adjprobe_core::phrasegen::{generate_pair_quadruples, generate_phrases, Phrase};
use adjprobe_core::relations::{
    aggregate, eval_intersectivity, eval_nonsubsectivity, eval_pair_intersectivity, overall,
    Grouping, RelationId, RelationOutcome, TIE_EPSILON,
};
use adjprobe_core::{cosine_distance, mean_pool, EmbeddingVector, Execution};
use proptest::collection::{btree_set, vec};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

pub const CASES: u32 = 1000;

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn run<S, F>(cases: u32, strategy: S, test: F) -> Result<(), String>
where
    S: Strategy,
    S::Value: std::fmt::Debug,
    F: Fn(S::Value) -> Result<(), TestCaseError>,
{
    runner(cases)
        .run(&strategy, test)
        .map_err(|e| e.to_string())
}

fn vector(dim: usize) -> impl Strategy<Value = EmbeddingVector> {
    vec(-10.0..10.0f64, dim)
        .prop_filter("nonzero", |v| v.iter().any(|&x| x != 0.0))
        .prop_map(|v| EmbeddingVector::new(v).unwrap())
}

fn vector_pair() -> impl Strategy<Value = (EmbeddingVector, EmbeddingVector)> {
    (2usize..32).prop_flat_map(|d| (vector(d), vector(d)))
}

fn vectors(count: usize) -> impl Strategy<Value = Vec<EmbeddingVector>> {
    (2usize..16).prop_flat_map(move |d| vec(vector(d), count))
}

fn small_lexicon() -> Lexicon {
    parse_lexicon("red\tS-I\nfake\tNS-PR\ndog\tNOUN\ncat\tNOUN\n").unwrap()
}

fn texts_of(lex: &Lexicon) -> Vec<String> {
    let phrases = generate_phrases(lex, 2);
    let mut texts: Vec<String> = phrases.iter().map(|p| p.text().to_string()).collect();
    texts.extend(lex.adjectives().iter().map(|a| a.surface.clone()));
    texts.extend(lex.nouns().iter().cloned());
    texts
}

fn every_outcome(
    lex: &Lexicon,
    emb: &std::collections::HashMap<String, EmbeddingVector>,
) -> Vec<RelationOutcome> {
    let phrases = generate_phrases(lex, 2);
    let mut out = Vec::new();
    for p in &phrases {
        out.push(eval_intersectivity(p, emb).unwrap());
        if p.adjective_count() == 1 {
            out.push(eval_nonsubsectivity(p, emb).unwrap());
        }
    }
    for q in generate_pair_quadruples(lex) {
        out.push(eval_pair_intersectivity(&q, emb).unwrap());
    }
    out
}

pub fn cosine_symmetry(cases: u32) -> Result<(), String> {
    run(cases, vector_pair(), |(u, v)| {
        let a = cosine_distance(&u, &v).unwrap();
        let b = cosine_distance(&v, &u).unwrap();
        prop_assert_eq!(a.to_bits(), b.to_bits());
        prop_assert!((0.0..=2.0).contains(&a));
        Ok(())
    })
}

pub fn cosine_scale_invariance(cases: u32) -> Result<(), String> {
    run(cases, (vector_pair(), 1e-3..1e3f64), |((u, v), alpha)| {
        let base = cosine_distance(&u, &v).unwrap();
        let scaled = cosine_distance(&u.scaled(alpha).unwrap(), &v).unwrap();
        prop_assert!((base - scaled).abs() <= 1e-9, "{} vs {}", base, scaled);
        let both =
            cosine_distance(&u.scaled(alpha).unwrap(), &v.scaled(1.0 / alpha).unwrap()).unwrap();
        prop_assert!((base - both).abs() <= 1e-9);
        Ok(())
    })
}

pub fn mean_of_copies(cases: u32) -> Result<(), String> {
    run(
        cases,
        ((2usize..32).prop_flat_map(vector), 1usize..12),
        |(v, k)| {
            let copies = vec![&v; k];
            prop_assert_eq!(mean_pool(&copies).unwrap(), v.clone());
            Ok(())
        },
    )
}

/// The max/min form of intersectivity against the explicit two-conjunct
/// check for AN phrases. Margins within the tie tolerance count as ties on
/// both sides.
pub fn an_reduction(cases: u32) -> Result<(), String> {
    let lex = parse_lexicon("red\tS-I\ndog\tNOUN\n").unwrap();
    let phrase = Phrase::new(&[&lex.adjectives()[0]], "dog");
    run(cases, vectors(3), move |vs| {
        let emb: std::collections::HashMap<String, EmbeddingVector> = ["red dog", "red", "dog"]
            .iter()
            .map(|t| t.to_string())
            .zip(vs.iter().cloned())
            .collect();
        let (p, a, n) = (&vs[0], &vs[1], &vs[2]);
        let d = |x, y| cosine_distance(x, y).unwrap();
        let explicit = d(p, a) <= d(a, n) + TIE_EPSILON && d(p, n) <= d(a, n) + TIE_EPSILON;
        let outcome = eval_intersectivity(&phrase, &emb).unwrap();
        prop_assert_eq!(outcome.satisfied, explicit);
        Ok(())
    })
}

pub fn relation_scale_invariance(cases: u32) -> Result<(), String> {
    let lex = small_lexicon();
    let texts = texts_of(&lex);
    let n = texts.len();
    run(cases, (vectors(n), 1e-2..1e2f64), move |(vs, alpha)| {
        let emb = texts.iter().cloned().zip(vs.iter().cloned()).collect();
        let scaled = texts
            .iter()
            .cloned()
            .zip(vs.iter().map(|v| v.scaled(alpha).unwrap()))
            .collect();
        let a = every_outcome(&lex, &emb);
        let b = every_outcome(&lex, &scaled);
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(x.satisfied, y.satisfied, "{} flipped", x.input);
        }
        Ok(())
    })
}

fn outcome_strategy() -> impl Strategy<Value = (Vec<AdjectiveType>, bool, f64)> {
    let ty = (0usize..5).prop_map(|i| AdjectiveType::ALL[i]);
    (
        prop_oneof![vec(ty.clone(), 1), vec(ty, 2)],
        any::<bool>(),
        -1.0..1.0f64,
    )
}

pub fn aggregation_conservation(cases: u32) -> Result<(), String> {
    run(cases, vec(outcome_strategy(), 0..300), |raw| {
        let outcomes: Vec<RelationOutcome> = raw
            .into_iter()
            .enumerate()
            .map(|(i, (types, satisfied, margin))| RelationOutcome {
                relation: RelationId::Intersectivity,
                input: format!("p{i}"),
                types,
                satisfied,
                margin,
            })
            .collect();
        let total = overall(&outcomes);
        let (single, double): (Vec<_>, Vec<_>) =
            outcomes.iter().cloned().partition(|o| o.types.len() == 1);
        let a = aggregate(&single, Grouping::ByType).unwrap();
        let b = aggregate(&double, Grouping::ByOrderedTypePair).unwrap();
        let sat: usize = a.iter().chain(&b).map(|c| c.satisfied).sum();
        let tot: usize = a.iter().chain(&b).map(|c| c.total).sum();
        prop_assert_eq!(sat, total.satisfied);
        prop_assert_eq!(tot, total.total);
        prop_assert_eq!(total.total, outcomes.len());
        prop_assert!(a
            .iter()
            .chain(&b)
            .all(|c| c.total > 0 && c.satisfied <= c.total));
        // mixing arities under one grouping is a contract error
        if !single.is_empty() && !double.is_empty() {
            prop_assert!(aggregate(&outcomes, Grouping::ByType).is_err());
        }
        Ok(())
    })
}

pub fn pair_antisymmetry(cases: u32) -> Result<(), String> {
    let lex = small_lexicon();
    let quads: Vec<_> = generate_pair_quadruples(&lex).map(|q| q.key()).collect();
    let texts = ["red dog", "red cat", "fake dog", "fake cat"];
    // also a degenerate case where both sides tie exactly
    let tie = prop_oneof![Just(false), Just(true)];
    run(cases, (vectors(4), tie), move |(vs, force_tie)| {
        let mut vs = vs;
        if force_tie {
            vs[2] = vs[0].clone();
            vs[3] = vs[1].clone();
        }
        let emb: std::collections::HashMap<String, EmbeddingVector> =
            texts.iter().map(|t| t.to_string()).zip(vs).collect();
        let red = Adjective {
            surface: "red".into(),
            kind: AdjectiveType::SubsectiveIntersective,
        };
        let fake = Adjective {
            surface: "fake".into(),
            kind: AdjectiveType::NonSubsectivePrivative,
        };
        let q = adjprobe_core::PairQuadruple {
            a1: &red,
            a2: &fake,
            n1: "dog",
            n2: "cat",
        };
        prop_assert!(quads.contains(&q.key()));
        let fwd = eval_pair_intersectivity(&q, &emb).unwrap();
        let back = eval_pair_intersectivity(&q.swapped(), &emb).unwrap();
        prop_assert!(!(fwd.satisfied && back.satisfied));
        prop_assert_eq!(fwd.margin, -back.margin);
        if force_tie {
            prop_assert!(!fwd.satisfied && !back.satisfied);
        }
        Ok(())
    })
}

fn surface() -> impl Strategy<Value = String> {
    "[^\\s#][^\\s]{0,10}"
}

fn lexicon_strategy() -> impl Strategy<Value = Lexicon> {
    (
        vec((surface(), 0usize..5), 1..25),
        btree_set(surface(), 1..15),
    )
        .prop_filter_map("needs disjoint, nonempty sections", |(adjs, nouns)| {
            let mut seen = HashSet::new();
            let adjectives: Vec<Adjective> = adjs
                .into_iter()
                .filter(|(s, _)| seen.insert(s.clone()))
                .map(|(surface, k)| Adjective {
                    surface,
                    kind: AdjectiveType::ALL[k],
                })
                .collect();
            let nouns: Vec<String> = nouns.into_iter().filter(|n| !seen.contains(n)).collect();
            if nouns.is_empty() {
                return None;
            }
            Lexicon::new(adjectives, nouns).ok()
        })
}

pub fn lexicon_roundtrip(cases: u32) -> Result<(), String> {
    run(cases, lexicon_strategy(), |lex| {
        let back = parse_lexicon(&lex.to_tsv()).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(&back, &lex);
        prop_assert_eq!(back.content_hash(), lex.content_hash());
        let per_type: usize = lex.count_by_type().values().sum();
        prop_assert_eq!(per_type, lex.adjectives().len());
        Ok(())
    })
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO,
        -1.0..1.0f64,
    ]
}

pub fn vector_file_roundtrip(cases: u32) -> Result<(), String> {
    let strategy = (1usize..12).prop_flat_map(|d| {
        (
            "\\PC{0,12}",
            prop::collection::hash_map(any::<String>(), vec(finite(), d), 0..20),
        )
    });
    run(cases, strategy, |(model, records)| {
        let mut store = EmbeddingStore::new(model);
        for (text, v) in records {
            store
                .insert(text, EmbeddingVector::new(v).unwrap())
                .unwrap();
        }
        let mut buf = Vec::new();
        store.write_to(&mut buf).unwrap();
        let back =
            EmbeddingStore::read_from(&buf[..]).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(back.model(), store.model());
        prop_assert_eq!(back.len(), store.len());
        for ((t1, v1), (t2, v2)) in store.iter().zip(back.iter()) {
            prop_assert_eq!(t1, t2);
            let bits1: Vec<u64> = v1.iter().map(|x| x.to_bits()).collect();
            let bits2: Vec<u64> = v2.iter().map(|x| x.to_bits()).collect();
            prop_assert_eq!(bits1, bits2);
        }
        Ok(())
    })
}

pub fn toy_unit_norm(cases: u32) -> Result<(), String> {
    run(
        cases,
        (any::<u64>(), 2usize..300, "[^ ]{1,16}"),
        |(seed, dim, word)| {
            let v = toy_word_vector(seed, dim, &word).unwrap();
            prop_assert!((v.norm() - 1.0).abs() < 1e-9);
            prop_assert_eq!(v.clone(), toy_word_vector(seed, dim, &word).unwrap());
            Ok(())
        },
    )
}

fn set_triple() -> impl Strategy<Value = (usize, IndividualSet, IndividualSet, IndividualSet)> {
    (1usize..=128, any::<u128>(), any::<u128>(), any::<u128>()).prop_map(|(n, a, b, c)| {
        let u = IndividualSet::universe(n);
        let m = |x: u128| IndividualSet::from_bits(x).intersection(u);
        (n, m(a), m(b), m(c))
    })
}

fn brute_jaccard(x: IndividualSet, y: IndividualSet, n: usize) -> (usize, usize) {
    let xs: HashSet<usize> = (0..n).filter(|&i| x.contains(i)).collect();
    let ys: HashSet<usize> = (0..n).filter(|&i| y.contains(i)).collect();
    let inter = xs.intersection(&ys).count();
    let union = xs.union(&ys).count();
    if union == 0 {
        (0, 1)
    } else {
        (union - inter, union)
    }
}

/// Exact Jaccard arithmetic against a hash-set recount, plus the metric
/// axioms and the intersective theorem on large universes.
pub fn jaccard_oracle(cases: u32) -> Result<(), String> {
    run(cases, set_triple(), |(n, x, y, z)| {
        let (num, den) = brute_jaccard(x, y, n);
        prop_assert_eq!(jaccard_distance(x, y), num as f64 / den as f64);
        prop_assert_eq!(jaccard_distance(x, y), jaccard_distance(y, x));
        prop_assert_eq!(jaccard_distance(x, x), 0.0);
        let (num2, den2) = brute_jaccard(y, z, n);
        let ours = JaccardRatio::of(x, y).cmp(&JaccardRatio::of(y, z));
        prop_assert_eq!(ours, (num * den2).cmp(&(num2 * den)));
        // triangle inequality (Jaccard distance is a metric)
        let dxz = jaccard_distance(x, z);
        prop_assert!(dxz <= jaccard_distance(x, y) + jaccard_distance(y, z) + 1e-12);
        if !x.is_empty() && !y.is_empty() {
            prop_assert!(intersectivity_holds(x.intersection(y), y, x));
        }
        // privative: anything disjoint from a nonempty noun is at distance 1
        let outside = z.difference(y);
        if !y.is_empty() {
            prop_assert_eq!(jaccard_distance(outside, y), 1.0);
        }
        // subsective: P ⊆ N gives 1 - |P|/|N| (up to rounding of the formula)
        let inside = z.intersection(y);
        if !y.is_empty() {
            let expected = 1.0 - inside.len() as f64 / y.len() as f64;
            prop_assert!((jaccard_distance(inside, y) - expected).abs() <= 1e-15);
        }
        Ok(())
    })
}

/// Sequential and parallel evaluation agree bit for bit on random vectors.
pub fn execution_agreement(cases: u32) -> Result<(), String> {
    let lex = small_lexicon();
    let texts = texts_of(&lex);
    let n = texts.len();
    run(cases, vectors(n), move |vs| {
        let emb: std::collections::HashMap<String, EmbeddingVector> =
            texts.iter().cloned().zip(vs).collect();
        let phrases = generate_phrases(&lex, 2);
        let seq = adjprobe_core::relations::evaluate_intersectivity(
            &phrases,
            &emb,
            Execution::Sequential,
        )
        .unwrap();
        let par =
            adjprobe_core::relations::evaluate_intersectivity(&phrases, &emb, Execution::Parallel)
                .unwrap();
        prop_assert_eq!(seq, par);
        Ok(())
    })
}

pub type Property = (&'static str, fn(u32) -> Result<(), String>);

pub const PROPERTIES: &[Property] = &[
    ("cosine symmetry and range", cosine_symmetry),
    ("cosine scale invariance", cosine_scale_invariance),
    ("mean of identical vectors", mean_of_copies),
    ("AN reduction equivalence", an_reduction),
    ("relation scale invariance", relation_scale_invariance),
    ("aggregation conservation", aggregation_conservation),
    ("pair-relation antisymmetry", pair_antisymmetry),
    ("lexicon file round trip", lexicon_roundtrip),
    ("vector file round trip", vector_file_roundtrip),
    ("toy word vectors unit norm", toy_unit_norm),
    ("jaccard oracle", jaccard_oracle),
    ("sequential/parallel agreement", execution_agreement),
];
