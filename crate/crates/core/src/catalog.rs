//! The feature/modification vocabulary and the versioned catalog file that
//! selects which combinations are in use.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Text of the catalog shipped with the crate.
pub const DEFAULT_CATALOG: &str = include_str!("../data/default.catalog");

macro_rules! string_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal,)+ }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name {
            $($variant,)+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant,)+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text,)+
                }
            }

            fn lookup(s: &str) -> Option<$name> {
                match s {
                    $($text => Some($name::$variant),)+
                    _ => None,
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

// Variants are declared in the lexicographic order of their text so that the
// derived `Ord` on `FeatureModification` agrees with identifier order.

string_enum! {
    /// Syntactic construct touched by a patch.
    Feature {
        Assertion => "assertion",
        Assignment => "assignment",
        BlockScope => "block_scope",
        Break => "break",
        Conditional => "conditional",
        Continue => "continue",
        ElseBranch => "else_branch",
        FieldDeclaration => "field_declaration",
        InstanceCreation => "instance_creation",
        LocalVariable => "local_variable",
        Loop => "loop",
        MethodCall => "method_call",
        MethodDeclaration => "method_declaration",
        NullCheck => "null_check",
        Return => "return",
        SynchronizedBlock => "synchronized_block",
        Throw => "throw",
        TryCatch => "try_catch",
    }
}

string_enum! {
    Modification {
        Add => "add",
        Modify => "modify",
        Remove => "remove",
    }
}

string_enum! {
    /// Which part of a construct a modification affects.
    Qualifier {
        Block => "block",
        CallArguments => "call_arguments",
        Callee => "callee",
        CatchClause => "catch_clause",
        ConditionOther => "condition_other",
        ConditionStrengthen => "condition_strengthen",
        ConditionWeaken => "condition_weaken",
        ExceptionType => "exception_type",
        Expression => "expression",
        FinallyClause => "finally_clause",
        Initialization => "initialization",
        LockObject => "lock_object",
        PredicateOther => "predicate_other",
        PredicateStrengthen => "predicate_strengthen",
        PredicateWeaken => "predicate_weaken",
        ReturnedValue => "returned_value",
        Signature => "signature",
        Target => "target",
    }
}

/// One `feature.modification[.qualifier]` combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeatureModification {
    pub feature: Feature,
    pub modification: Modification,
    pub qualifier: Option<Qualifier>,
}

impl FeatureModification {
    pub const fn new(feature: Feature, modification: Modification) -> FeatureModification {
        FeatureModification { feature, modification, qualifier: None }
    }

    pub const fn with(feature: Feature, modification: Modification, qualifier: Qualifier) -> FeatureModification {
        FeatureModification { feature, modification, qualifier: Some(qualifier) }
    }

    pub fn id(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for FeatureModification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.feature, self.modification)?;
        if let Some(q) = self.qualifier {
            write!(f, ".{q}")?;
        }
        Ok(())
    }
}

impl FromStr for FeatureModification {
    type Err = Error;

    fn from_str(s: &str) -> Result<FeatureModification> {
        let unknown = || Error::UnknownFeature(s.to_string());
        let mut parts = s.split('.');
        let feature = parts.next().and_then(Feature::lookup).ok_or_else(unknown)?;
        let modification = parts.next().and_then(Modification::lookup).ok_or_else(unknown)?;
        let qualifier = match parts.next() {
            None => None,
            Some(q) => Some(Qualifier::lookup(q).ok_or_else(unknown)?),
        };
        if parts.next().is_some() {
            return Err(unknown());
        }
        Ok(FeatureModification { feature, modification, qualifier })
    }
}

/// A versioned set of allowed combinations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Catalog {
    version: String,
    entries: BTreeSet<FeatureModification>,
}

impl Catalog {
    pub fn parse(text: &str) -> Result<Catalog> {
        let mut version = None;
        let mut entries = BTreeSet::new();
        let mut previous: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if version.is_none() {
                let v = line.strip_prefix("catalog-version:").ok_or_else(|| Error::MalformedCatalog {
                    line: line_no,
                    message: "expected `catalog-version:` header".into(),
                })?;
                let v = v.trim();
                if !is_semver(v) {
                    return Err(Error::MalformedCatalog { line: line_no, message: format!("bad version `{v}`") });
                }
                version = Some(v.to_string());
                continue;
            }
            let entry: FeatureModification = line.parse()?;
            if let Some(prev) = &previous {
                if prev.as_str() >= line {
                    return Err(Error::MalformedCatalog {
                        line: line_no,
                        message: format!("`{line}` is duplicated or out of order"),
                    });
                }
            }
            previous = Some(line.to_string());
            entries.insert(entry);
        }
        let version = version.ok_or(Error::MalformedCatalog { line: 0, message: "missing header".into() })?;
        Ok(Catalog { version, entries })
    }

    pub fn load(path: &Path) -> Result<Catalog> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Catalog::parse(&text)
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, fm: &FeatureModification) -> bool {
        self.entries.contains(fm)
    }

    pub fn entries(&self) -> impl Iterator<Item = &FeatureModification> {
        self.entries.iter()
    }

    /// Resolves an identifier, rejecting ones this catalog does not list.
    pub fn lookup(&self, id: &str) -> Result<FeatureModification> {
        let fm: FeatureModification = id.parse()?;
        if self.contains(&fm) {
            Ok(fm)
        } else {
            Err(Error::UnknownFeature(id.to_string()))
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("catalog-version: {}\n", self.version);
        for e in &self.entries {
            out.push_str(&e.to_string());
            out.push('\n');
        }
        out
    }
}

impl Default for Catalog {
    fn default() -> Catalog {
        Catalog::parse(DEFAULT_CATALOG).expect("bundled catalog is well-formed")
    }
}

fn is_semver(v: &str) -> bool {
    let parts: Vec<&str> = v.split('.').collect();
    parts.len() == 3 && parts.iter().all(|p| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_catalog_has_at_least_67_entries() {
        let c = Catalog::default();
        assert_eq!(c.version(), "1.0.0");
        assert!(c.len() >= 67, "{}", c.len());
    }

    #[test]
    fn derived_order_matches_identifier_order() {
        let c = Catalog::default();
        let ids: Vec<String> = c.entries().map(|e| e.id()).collect();
        let mut sorted = ids.clone();
        sorted.sort();
        assert_eq!(ids, sorted);
    }

    #[test]
    fn identifiers_round_trip() {
        for e in Catalog::default().entries() {
            assert_eq!(e.id().parse::<FeatureModification>().unwrap(), *e);
        }
    }

    #[test]
    fn unknown_identifiers_are_rejected() {
        let c = Catalog::default();
        for bad in ["conditional", "conditional.rename", "loop.add.x", "goto.add", "null_check.add.signature.x"] {
            assert!(matches!(c.lookup(bad), Err(Error::UnknownFeature(_))), "{bad}");
        }
        // Parses as a combination but is not listed.
        assert!(matches!(c.lookup("break.modify"), Err(Error::UnknownFeature(_))));
    }

    #[test]
    fn malformed_catalogs() {
        assert!(matches!(Catalog::parse("loop.add\n"), Err(Error::MalformedCatalog { .. })));
        assert!(matches!(
            Catalog::parse("catalog-version: 1.0.0\nloop.remove\nloop.add\n"),
            Err(Error::MalformedCatalog { line: 3, .. })
        ));
        assert!(matches!(
            Catalog::parse("catalog-version: 1.0.0\nloop.add\nloop.add\n"),
            Err(Error::MalformedCatalog { .. })
        ));
        assert!(matches!(Catalog::parse("catalog-version: one\n"), Err(Error::MalformedCatalog { .. })));
    }

    #[test]
    fn text_round_trip() {
        let c = Catalog::default();
        assert_eq!(Catalog::parse(&c.to_text()).unwrap(), c);
    }
}
