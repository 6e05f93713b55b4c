use std::collections::BTreeMap;

use sha2::{Digest, Sha256};

use crate::catalog::Catalog;
use crate::category::BugCategory;
use crate::error::{Error, Result};
use crate::kind::PatchKind;
use crate::scalar::Scalar;

pub const MODEL_VERSION: &str = "1";

/// Per-category counts of patch kinds.
///
/// Only integer counts are stored. Frequencies are computed on demand in
/// whatever [`Scalar`] the caller asks for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyModel {
    counts: BTreeMap<BugCategory, BTreeMap<PatchKind, u64>>,
    totals: BTreeMap<BugCategory, u64>,
    catalog_version: String,
    corpus_fingerprint: String,
}

impl FrequencyModel {
    pub fn new(catalog_version: impl Into<String>, corpus_fingerprint: impl Into<String>) -> FrequencyModel {
        FrequencyModel {
            counts: BTreeMap::new(),
            totals: BTreeMap::new(),
            catalog_version: catalog_version.into(),
            corpus_fingerprint: corpus_fingerprint.into(),
        }
    }

    /// Adds `n` observations of `kind` for category `c`.
    pub fn add(&mut self, c: BugCategory, kind: PatchKind, n: u64) {
        if n == 0 {
            return;
        }
        *self.counts.entry(c).or_default().entry(kind).or_insert(0) += n;
        *self.totals.entry(c).or_insert(0) += n;
    }

    /// Adds every count of `other` into `self`.
    pub fn merge(&mut self, other: &FrequencyModel) {
        for (c, kinds) in &other.counts {
            for (k, n) in kinds {
                self.add(*c, k.clone(), *n);
            }
        }
    }

    pub fn catalog_version(&self) -> &str {
        &self.catalog_version
    }

    pub fn corpus_fingerprint(&self) -> &str {
        &self.corpus_fingerprint
    }

    pub fn set_corpus_fingerprint(&mut self, fingerprint: impl Into<String>) {
        self.corpus_fingerprint = fingerprint.into();
    }

    pub fn count(&self, c: BugCategory, kind: &PatchKind) -> u64 {
        self.counts.get(&c).and_then(|m| m.get(kind)).copied().unwrap_or(0)
    }

    pub fn total(&self, c: BugCategory) -> u64 {
        self.totals.get(&c).copied().unwrap_or(0)
    }

    /// Stored kinds of `c` with their counts, in kind order.
    pub fn kinds(&self, c: BugCategory) -> impl Iterator<Item = (&PatchKind, u64)> {
        self.counts.get(&c).into_iter().flat_map(|m| m.iter().map(|(k, n)| (k, *n)))
    }

    /// Categories with at least one record, in canonical order.
    pub fn nonempty_categories(&self) -> impl Iterator<Item = BugCategory> + '_ {
        BugCategory::ALL.into_iter().filter(|c| self.total(*c) > 0)
    }

    pub fn is_empty(&self) -> bool {
        self.totals.values().all(|&t| t == 0)
    }

    /// `N(c, k) / totals(c)`, zero for kinds never seen with `c`.
    pub fn frequency<T: Scalar>(&self, c: BugCategory, kind: &PatchKind) -> Result<T> {
        let total = self.total(c);
        if total == 0 {
            return Err(Error::EmptyCategory(c));
        }
        Ok(T::ratio(self.count(c, kind), total))
    }

    /// Serialized form: four header lines, then sorted
    /// `category<TAB>signature<TAB>count` lines. The checksum covers every
    /// other line.
    pub fn to_text(&self) -> String {
        let body = self.body_text();
        let checksum = checksum(&body);
        let mut out = String::new();
        out.push_str(&format!("checksum: {checksum}\n"));
        out.push_str(&body);
        out
    }

    fn body_text(&self) -> String {
        let mut out = format!(
            "model-version: {MODEL_VERSION}\ncatalog-version: {}\ncorpus-fingerprint: {}\n",
            self.catalog_version, self.corpus_fingerprint
        );
        // PatchKind order is member-wise; the file wants signature order.
        for (c, kinds) in &self.counts {
            let mut rows: Vec<(String, u64)> = kinds.iter().map(|(k, n)| (k.to_string(), *n)).collect();
            rows.sort();
            for (sig, n) in rows {
                out.push_str(&format!("{c}\t{sig}\t{n}\n"));
            }
        }
        out
    }

    /// Parses [`FrequencyModel::to_text`] output, checking integrity first
    /// and then that the model was trained with `catalog`.
    pub fn from_text(text: &str, catalog: &Catalog) -> Result<FrequencyModel> {
        let malformed = |line: usize, message: &str| Error::MalformedRecord {
            path: format!("model line {line}"),
            message: message.to_string(),
        };
        let (first, body) = text.split_once('\n').ok_or_else(|| malformed(1, "truncated model file"))?;
        let expected = first.strip_prefix("checksum: ").ok_or_else(|| malformed(1, "expected checksum header"))?;
        let actual = checksum(body);
        if expected != actual {
            return Err(Error::ChecksumMismatch { expected: expected.to_string(), actual });
        }
        let mut lines = body.lines().enumerate().map(|(i, l)| (i + 2, l));
        let mut header = |key: &str| -> Result<String> {
            let (n, line) = lines.next().ok_or_else(|| malformed(0, "truncated header"))?;
            line.strip_prefix(key)
                .and_then(|rest| rest.strip_prefix(": "))
                .map(str::to_string)
                .ok_or_else(|| malformed(n, &format!("expected `{key}` header")))
        };
        let version = header("model-version")?;
        if version != MODEL_VERSION {
            return Err(Error::VersionMismatch(format!("model-version {version}")));
        }
        let catalog_version = header("catalog-version")?;
        if catalog_version != catalog.version() {
            return Err(Error::VersionMismatch(format!(
                "model uses catalog {catalog_version}, loaded catalog is {}",
                catalog.version()
            )));
        }
        let fingerprint = header("corpus-fingerprint")?;
        let mut model = FrequencyModel::new(catalog_version, fingerprint);
        for (n, line) in lines {
            let fields: Vec<&str> = line.split('\t').collect();
            let [c, sig, count] = fields[..] else {
                return Err(malformed(n, "expected three tab-separated fields"));
            };
            let c: BugCategory = c.parse()?;
            let kind = PatchKind::parse(sig, catalog)?;
            let count: u64 = count.parse().map_err(|_| malformed(n, "count is not an integer"))?;
            if count == 0 || model.count(c, &kind) != 0 {
                return Err(malformed(n, "zero or duplicate count"));
            }
            model.add(c, kind, count);
        }
        Ok(model)
    }
}

fn checksum(body: &str) -> String {
    hex::encode(Sha256::digest(body.as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    fn k(ids: &[&str]) -> PatchKind {
        let c = Catalog::default();
        ids.iter().map(|id| c.lookup(id).unwrap()).collect()
    }

    #[test]
    fn frequency_examples() {
        let mut m = FrequencyModel::new("1.0.0", "");
        m.add(BugCategory::NullPointer, k(&["null_check.add"]), 16);
        m.add(BugCategory::NullPointer, k(&["conditional.add"]), 84);
        assert_eq!(m.frequency::<f64>(BugCategory::NullPointer, &k(&["null_check.add"])).unwrap(), 0.16);

        let mut m = FrequencyModel::new("1.0.0", "");
        m.add(BugCategory::Logic, k(&["return.add"]), 7);
        assert_eq!(m.frequency::<f64>(BugCategory::Logic, &k(&["return.add"])).unwrap(), 1.0);
        assert_eq!(m.frequency::<f64>(BugCategory::Logic, &k(&["loop.add"])).unwrap(), 0.0);
        assert!(matches!(
            m.frequency::<f64>(BugCategory::Overflow, &k(&["loop.add"])),
            Err(Error::EmptyCategory(BugCategory::Overflow))
        ));
    }

    #[test]
    fn totals_track_counts() {
        let mut m = FrequencyModel::new("1.0.0", "");
        m.add(BugCategory::Logic, k(&["return.add"]), 2);
        m.add(BugCategory::Logic, k(&["return.add"]), 3);
        m.add(BugCategory::Logic, PatchKind::empty(), 1);
        m.add(BugCategory::Logic, k(&["loop.add"]), 0);
        assert_eq!(m.total(BugCategory::Logic), 6);
        assert_eq!(m.kinds(BugCategory::Logic).count(), 2);
        let sum: Ratio<u64> = m
            .kinds(BugCategory::Logic)
            .map(|(kind, _)| m.frequency::<Ratio<u64>>(BugCategory::Logic, kind).unwrap())
            .fold(Ratio::new(0, 1), |a, b| a + b);
        assert_eq!(sum, Ratio::new(1, 1));
    }

    #[test]
    fn text_round_trip_and_tampering() {
        let c = Catalog::default();
        let mut m = FrequencyModel::new(c.version(), "abc");
        m.add(BugCategory::Overflow, k(&["loop.modify.condition_other", "return.add"]), 5);
        m.add(BugCategory::Overflow, PatchKind::empty(), 2);
        m.add(BugCategory::Logic, k(&["conditional.modify.condition_strengthen"]), 9);
        let text = m.to_text();
        let back = FrequencyModel::from_text(&text, &c).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_text(), text);

        let tampered = text.replace("\t9\n", "\t8\n");
        assert!(matches!(FrequencyModel::from_text(&tampered, &c), Err(Error::ChecksumMismatch { .. })));

        let other = Catalog::parse(&c.to_text().replace("1.0.0", "2.0.0")).unwrap();
        assert!(matches!(FrequencyModel::from_text(&text, &other), Err(Error::VersionMismatch(_))));
    }
}
