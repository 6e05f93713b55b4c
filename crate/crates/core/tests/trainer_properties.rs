use std::collections::{BTreeMap, HashMap};

use fixrank::trainer::{corpus_fingerprint, proportional_plan, stratified_sample, train, CorpusRecord};
use fixrank::{BugCategory, Catalog, Error, ExactFrequency, FrequencyModel, PatchKind};
use num_traits::{One, Zero};
use proptest::prelude::*;

const SIGS: [&str; 5] = ["", "null_check.add", "conditional.add", "loop.add", "null_check.add+throw.add"];

fn record(i: usize, c: usize, k: usize) -> CorpusRecord {
    CorpusRecord {
        triple_id: format!("t{i:05}"),
        category: BugCategory::ALL[c],
        kind: PatchKind::parse(SIGS[k], &Catalog::default()).unwrap(),
        catalog_version: Catalog::default().version().into(),
        repo_id: "r".into(),
        pre_commit: "a".into(),
        post_commit: "b".into(),
    }
}

fn records() -> impl Strategy<Value = Vec<CorpusRecord>> {
    prop::collection::vec((0usize..3, 0usize..5), 1..200)
        .prop_map(|v| v.into_iter().enumerate().map(|(i, (c, k))| record(i, c, k)).collect())
}

proptest! {
    #[test]
    fn counts_match_a_naive_tally(rs in records()) {
        let model = train(&rs, &Catalog::default()).unwrap();
        let mut naive: HashMap<(BugCategory, String), u64> = HashMap::new();
        for r in &rs {
            *naive.entry((r.category, r.kind.to_string())).or_default() += 1;
        }
        for ((c, sig), n) in &naive {
            prop_assert_eq!(model.count(*c, &PatchKind::parse(sig, &Catalog::default()).unwrap()), *n);
        }
        for c in BugCategory::ALL {
            let expected: u64 = naive.iter().filter(|((cc, _), _)| *cc == c).map(|(_, n)| n).sum();
            prop_assert_eq!(model.total(c), expected);
        }
    }

    #[test]
    fn record_order_is_irrelevant(rs in records(), seed in any::<u64>()) {
        use rand::{seq::SliceRandom, SeedableRng};
        let mut shuffled = rs.clone();
        shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let a = train(&rs, &Catalog::default()).unwrap();
        let b = train(&shuffled, &Catalog::default()).unwrap();
        prop_assert_eq!(a.to_text(), b.to_text());
    }

    #[test]
    fn training_is_additive(rs in records(), split in any::<prop::sample::Index>()) {
        let at = split.index(rs.len() + 1);
        let whole = train(&rs, &Catalog::default()).unwrap();
        let (left, right) = rs.split_at(at);
        let mut merged = FrequencyModel::new(Catalog::default().version(), "");
        for part in [left, right] {
            if !part.is_empty() {
                merged.merge(&train(part, &Catalog::default()).unwrap());
            }
        }
        for c in BugCategory::ALL {
            let a: Vec<_> = whole.kinds(c).map(|(k, n)| (k.clone(), n)).collect();
            let b: Vec<_> = merged.kinds(c).map(|(k, n)| (k.clone(), n)).collect();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn frequencies_sum_to_one(rs in records()) {
        let model = train(&rs, &Catalog::default()).unwrap();
        for c in model.nonempty_categories() {
            let sum = model.kinds(c).fold(ExactFrequency::zero(), |a, (k, _)| a + model.frequency::<ExactFrequency>(c, k).unwrap());
            prop_assert!(sum.is_one());
        }
    }

    #[test]
    fn frequencies_ignore_uniform_scaling(rs in records(), factor in 2usize..5) {
        let scaled: Vec<CorpusRecord> = (0..factor)
            .flat_map(|f| rs.iter().map(move |r| CorpusRecord { triple_id: format!("{}-{f}", r.triple_id), ..r.clone() }))
            .collect();
        let a = train(&rs, &Catalog::default()).unwrap();
        let b = train(&scaled, &Catalog::default()).unwrap();
        for c in a.nonempty_categories() {
            for (k, _) in a.kinds(c) {
                prop_assert_eq!(a.frequency::<ExactFrequency>(c, k).unwrap(), b.frequency::<ExactFrequency>(c, k).unwrap());
            }
        }
    }

    #[test]
    fn fingerprint_ignores_order(ids in prop::collection::vec("[a-z0-9]{1,8}", 0..20)) {
        let mut rev = ids.clone();
        rev.reverse();
        prop_assert_eq!(corpus_fingerprint(ids.iter().map(String::as_str)), corpus_fingerprint(rev.iter().map(String::as_str)));
    }

    #[test]
    fn proportional_plan_hits_the_target(rs in records(), pct in 1u32..=100) {
        let fraction = pct as f64 / 100.0;
        let plan = proportional_plan(&rs, fraction);
        let target = (fraction * rs.len() as f64).round() as usize;
        prop_assert_eq!(plan.values().sum::<usize>(), target);
        let sample = stratified_sample(&rs, &plan, 1).unwrap();
        prop_assert_eq!(sample.len(), target);
    }
}

#[test]
fn sample_has_exact_sizes_and_uniform_marginals() {
    let rs: Vec<CorpusRecord> = (0..60).map(|i| record(i, i % 3, i % 5)).collect();
    let sizes = BTreeMap::from([(BugCategory::Logic, 5), (BugCategory::NullPointer, 10), (BugCategory::Overflow, 0)]);
    let mut hits: HashMap<String, usize> = HashMap::new();
    let trials = 4000;
    for seed in 0..trials {
        let s = stratified_sample(&rs, &sizes, seed).unwrap();
        for c in BugCategory::ALL {
            assert_eq!(s.iter().filter(|r| r.category == c).count(), sizes[&c]);
        }
        assert!(s.windows(2).all(|w| w[0].triple_id < w[1].triple_id));
        for r in s {
            *hits.entry(r.triple_id).or_default() += 1;
        }
    }
    // Each logic record is drawn with probability 5/20, each null-pointer record with 10/20.
    for r in &rs {
        let p = match r.category {
            BugCategory::Logic => 0.25,
            BugCategory::NullPointer => 0.5,
            BugCategory::Overflow => 0.0,
        };
        let got = hits.get(&r.triple_id).copied().unwrap_or(0) as f64 / trials as f64;
        assert!((got - p).abs() < 0.04, "{}: {got} vs {p}", r.triple_id);
    }
}

#[test]
fn oversized_requests_fail() {
    let rs: Vec<CorpusRecord> = (0..6).map(|i| record(i, 0, 0)).collect();
    let sizes = BTreeMap::from([(BugCategory::Logic, 7)]);
    assert!(matches!(stratified_sample(&rs, &sizes, 0), Err(Error::InsufficientRecords { requested: 7, available: 6, .. })));
    assert!(matches!(train(&[], &Catalog::default()), Err(Error::EmptyCorpus)));
}
