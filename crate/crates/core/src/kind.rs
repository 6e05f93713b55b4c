use std::collections::BTreeSet;
use std::fmt;

use crate::catalog::{Catalog, FeatureModification};
use crate::error::{Error, Result};

/// A set of feature/modification combinations; the empty set is a valid kind.
///
/// The canonical signature is the sorted member ids joined with `+`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PatchKind(BTreeSet<FeatureModification>);

impl PatchKind {
    pub fn empty() -> PatchKind {
        PatchKind::default()
    }

    pub fn members(&self) -> impl Iterator<Item = &FeatureModification> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, fm: &FeatureModification) -> bool {
        self.0.contains(fm)
    }

    pub fn insert(&mut self, fm: FeatureModification) -> bool {
        self.0.insert(fm)
    }

    pub fn union(&self, other: &PatchKind) -> PatchKind {
        PatchKind(self.0.union(&other.0).copied().collect())
    }

    /// Signature checked against `catalog`.
    pub fn signature(&self, catalog: &Catalog) -> Result<String> {
        if let Some(bad) = self.0.iter().find(|m| !catalog.contains(m)) {
            return Err(Error::UnknownFeature(bad.id()));
        }
        Ok(self.to_string())
    }

    /// Inverse of [`PatchKind::signature`].
    pub fn parse(signature: &str, catalog: &Catalog) -> Result<PatchKind> {
        if signature.is_empty() {
            return Ok(PatchKind::empty());
        }
        signature.split('+').map(|id| catalog.lookup(id)).collect()
    }
}

impl fmt::Display for PatchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Member order is identifier order (see `catalog`), so this is sorted.
        for (i, m) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

impl FromIterator<FeatureModification> for PatchKind {
    fn from_iter<I: IntoIterator<Item = FeatureModification>>(iter: I) -> PatchKind {
        PatchKind(iter.into_iter().collect())
    }
}

impl From<BTreeSet<FeatureModification>> for PatchKind {
    fn from(set: BTreeSet<FeatureModification>) -> PatchKind {
        PatchKind(set)
    }
}
