//! Counting kinds per category over an accepted corpus, model persistence,
//! and stratified sampling of training sets.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use tracing::warn;

use crate::catalog::Catalog;
use crate::category::BugCategory;
use crate::corpus::{ReviewStatus, TripleRecord};
use crate::error::{Error, Result};
use crate::kind::PatchKind;
use crate::model::FrequencyModel;
use crate::patchclass::PatchClassifier;
use crate::unidiff::SourceFilter;

/// One training data point with both labels attached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusRecord {
    pub triple_id: String,
    pub category: BugCategory,
    pub kind: PatchKind,
    /// Catalog the kind was computed with.
    pub catalog_version: String,
    pub repo_id: String,
    pub pre_commit: String,
    pub post_commit: String,
}

/// Content hash of the sorted triple ids.
pub fn corpus_fingerprint<'a>(ids: impl IntoIterator<Item = &'a str>) -> String {
    let mut ids: Vec<&str> = ids.into_iter().collect();
    ids.sort_unstable();
    let mut h = Sha256::new();
    for id in ids {
        h.update(id.as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

pub fn train(records: &[CorpusRecord], catalog: &Catalog) -> Result<FrequencyModel> {
    if records.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    for r in records {
        if r.catalog_version != catalog.version() {
            return Err(Error::CatalogMismatch { expected: catalog.version().to_string(), found: r.catalog_version.clone() });
        }
        r.kind.signature(catalog)?;
    }
    let mut model = FrequencyModel::new(catalog.version(), corpus_fingerprint(records.iter().map(|r| r.triple_id.as_str())));
    for r in records {
        model.add(r.category, r.kind.clone(), 1);
    }
    Ok(model)
}

pub fn save_model(model: &FrequencyModel, path: &Path) -> Result<()> {
    fs::write(path, model.to_text()).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path, catalog: &Catalog) -> Result<FrequencyModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    FrequencyModel::from_text(&text, catalog)
}

/// What happened to each stored triple on the way to training records.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PrepareSummary {
    pub used: usize,
    pub not_accepted: usize,
    pub uncategorized: usize,
    pub unparseable: usize,
    /// Records whose kind was computed now rather than read from the file.
    pub classified: usize,
}

/// Turns stored triples into training records.
///
/// Only accepted triples are used, unless `no_review` is set, in which case
/// every triple with a proposed category counts. Kinds already stored under
/// the classifier's catalog version are reused; missing ones are computed
/// and written back into `triples` so the caller can persist them.
pub fn prepare_records(
    triples: &mut [TripleRecord],
    classifier: &PatchClassifier,
    filter: &SourceFilter,
    no_review: bool,
) -> Result<(Vec<CorpusRecord>, PrepareSummary)> {
    let catalog = classifier.catalog();
    let version = catalog.version().to_string();
    let outcomes: Vec<Result<Option<(PatchKind, bool)>>> = triples
        .par_iter()
        .map(|t| {
            if t.category.is_none() || !(no_review || t.status() == ReviewStatus::Accepted) {
                return Ok(None);
            }
            if let Some((v, sig)) = &t.kind {
                if *v == version {
                    return Ok(Some((PatchKind::parse(sig, catalog)?, false)));
                }
            }
            let pairs = t.triple.source_pairs(filter)?;
            match classifier.classify_patch(&pairs) {
                Ok(kind) => Ok(Some((kind, true))),
                Err(Error::Unparseable(why)) => {
                    warn!(id = %t.id, "unparseable fix: {why}");
                    Ok(None)
                }
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut summary = PrepareSummary::default();
    let mut records = Vec::new();
    for (t, outcome) in triples.iter_mut().zip(outcomes) {
        let Some(category) = t.category else {
            summary.uncategorized += 1;
            continue;
        };
        if !(no_review || t.status() == ReviewStatus::Accepted) {
            summary.not_accepted += 1;
            continue;
        }
        let Some((kind, fresh)) = outcome? else {
            summary.unparseable += 1;
            continue;
        };
        if fresh {
            summary.classified += 1;
            t.kind = Some((version.clone(), kind.signature(catalog)?));
        }
        summary.used += 1;
        records.push(CorpusRecord {
            triple_id: t.id.clone(),
            category,
            kind,
            catalog_version: version.clone(),
            repo_id: t.triple.repo_id.clone(),
            pre_commit: t.triple.pre_commit.clone(),
            post_commit: t.triple.post_commit.clone(),
        });
    }
    Ok((records, summary))
}

/// Records per category.
pub fn category_sizes(records: &[CorpusRecord]) -> BTreeMap<BugCategory, usize> {
    let mut sizes = BTreeMap::new();
    for r in records {
        *sizes.entry(r.category).or_insert(0) += 1;
    }
    sizes
}

/// Per-category sizes summing to `round(fraction * |records|)`, split in
/// proportion to the category sizes by largest remainder.
pub fn proportional_plan(records: &[CorpusRecord], fraction: f64) -> BTreeMap<BugCategory, usize> {
    let sizes = category_sizes(records);
    let target = (fraction * records.len() as f64).round() as usize;
    let total = records.len().max(1) as f64;
    let mut plan: BTreeMap<BugCategory, usize> = BTreeMap::new();
    let mut remainders = Vec::new();
    for (&c, &n) in &sizes {
        let exact = target as f64 * n as f64 / total;
        plan.insert(c, exact.floor() as usize);
        remainders.push((exact - exact.floor(), c));
    }
    let mut missing = target.saturating_sub(plan.values().sum());
    remainders.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    for (_, c) in remainders {
        if missing == 0 {
            break;
        }
        if plan[&c] < sizes[&c] {
            *plan.get_mut(&c).expect("planned category") += 1;
            missing -= 1;
        }
    }
    plan
}

/// Uniform random subset of exactly `sizes[c]` records of each category `c`
/// (zero for absent categories), in original corpus order.
pub fn stratified_sample(records: &[CorpusRecord], sizes: &BTreeMap<BugCategory, usize>, seed: u64) -> Result<Vec<CorpusRecord>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = Vec::new();
    for c in BugCategory::ALL {
        let want = sizes.get(&c).copied().unwrap_or(0);
        let pool: Vec<usize> = records.iter().enumerate().filter(|(_, r)| r.category == c).map(|(i, _)| i).collect();
        if want > pool.len() {
            return Err(Error::InsufficientRecords { category: c, requested: want, available: pool.len() });
        }
        chosen.extend(rand::seq::index::sample(&mut rng, pool.len(), want).into_iter().map(|i| pool[i]));
    }
    chosen.sort_unstable();
    Ok(chosen.into_iter().map(|i| records[i].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: usize, c: BugCategory, sig: &str) -> CorpusRecord {
        let catalog = Catalog::default();
        CorpusRecord {
            triple_id: format!("t{id:04}"),
            category: c,
            kind: PatchKind::parse(sig, &catalog).unwrap(),
            catalog_version: catalog.version().to_string(),
            repo_id: "r".into(),
            pre_commit: "a".into(),
            post_commit: "b".into(),
        }
    }

    #[test]
    fn train_examples() {
        let catalog = Catalog::default();
        let mut corpus: Vec<_> = (0..3).map(|i| rec(i, BugCategory::NullPointer, "conditional.add")).collect();
        corpus.push(rec(3, BugCategory::NullPointer, "null_check.add"));
        let m = train(&corpus, &catalog).unwrap();
        let k = PatchKind::parse("null_check.add", &catalog).unwrap();
        assert_eq!(m.frequency::<f64>(BugCategory::NullPointer, &k).unwrap(), 0.25);

        let same: Vec<_> = (0..5).map(|i| rec(i, BugCategory::Logic, "return.add")).collect();
        let m = train(&same, &catalog).unwrap();
        let k = PatchKind::parse("return.add", &catalog).unwrap();
        assert_eq!(m.frequency::<f64>(BugCategory::Logic, &k).unwrap(), 1.0);
    }

    #[test]
    fn train_errors() {
        let catalog = Catalog::default();
        assert!(matches!(train(&[], &catalog), Err(Error::EmptyCorpus)));
        let mut r = rec(0, BugCategory::Logic, "");
        r.catalog_version = "0.9.0".into();
        assert!(matches!(train(&[r], &catalog), Err(Error::CatalogMismatch { .. })));
    }

    #[test]
    fn fingerprint_ignores_order() {
        assert_eq!(corpus_fingerprint(["b", "a"]), corpus_fingerprint(["a", "b"]));
        assert_ne!(corpus_fingerprint(["a"]), corpus_fingerprint(["a", "b"]));
    }

    fn big_corpus() -> Vec<CorpusRecord> {
        let mut v = Vec::new();
        for (c, n) in [(BugCategory::Logic, 1093), (BugCategory::NullPointer, 5161), (BugCategory::Overflow, 329)] {
            for _ in 0..n {
                v.push(rec(v.len(), c, ""));
            }
        }
        v
    }

    #[test]
    fn sample_sizes_are_exact() {
        let corpus = big_corpus();
        let plan = BTreeMap::from([(BugCategory::Logic, 87), (BugCategory::Overflow, 28), (BugCategory::NullPointer, 385)]);
        let s = stratified_sample(&corpus, &plan, 7).unwrap();
        assert_eq!(category_sizes(&s), plan);
        assert_eq!(s, stratified_sample(&corpus, &plan, 7).unwrap());
        assert_ne!(s, stratified_sample(&corpus, &plan, 8).unwrap());
        assert!(s.windows(2).all(|w| w[0].triple_id < w[1].triple_id));
        let full = category_sizes(&corpus);
        assert_eq!(stratified_sample(&corpus, &full, 1).unwrap(), corpus);
        let too_many = BTreeMap::from([(BugCategory::Overflow, 330)]);
        assert!(matches!(
            stratified_sample(&corpus, &too_many, 1),
            Err(Error::InsufficientRecords { category: BugCategory::Overflow, requested: 330, available: 329 })
        ));
    }

    #[test]
    fn proportional_plans() {
        let corpus = big_corpus();
        for f in [0.08, 0.3, 0.6, 1.0] {
            let plan = proportional_plan(&corpus, f);
            assert_eq!(plan.values().sum::<usize>(), (f * 6583.0).round() as usize);
        }
        assert_eq!(proportional_plan(&corpus, 1.0), category_sizes(&corpus));
    }
}
