//! Commit-message classification into bug categories.

use std::path::Path;

use regex::{Regex, RegexBuilder};

use crate::category::BugCategory;
use crate::error::{Error, Result};

pub const DEFAULT_PATTERNS: &str = include_str!("../data/default.patterns");

/// Specific exception names beat the generic logic keywords.
pub const PRECEDENCE: [BugCategory; 3] = [BugCategory::Overflow, BugCategory::NullPointer, BugCategory::Logic];

#[derive(Debug, Clone)]
pub struct NamedPattern {
    pub category: BugCategory,
    pub name: String,
    pub regex: Regex,
}

/// Evidence for a message's category.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryMatch {
    pub category: BugCategory,
    pub matched_patterns: Vec<String>,
    /// `(offset, length)` in bytes, one per matched pattern.
    pub matched_spans: Vec<(usize, usize)>,
}

#[derive(Debug, Clone)]
pub struct PatternSet {
    patterns: Vec<NamedPattern>,
}

impl PatternSet {
    /// Parses `category<TAB>name<TAB>regex` lines. `#` starts a comment line.
    pub fn parse(text: &str) -> Result<PatternSet> {
        let mut patterns = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |message: String| Error::MalformedCatalog { line: i + 1, message };
            let mut fields = line.splitn(3, '\t');
            let (Some(c), Some(name), Some(re)) = (fields.next(), fields.next(), fields.next()) else {
                return Err(bad("expected category, name and regex separated by tabs".into()));
            };
            let category: BugCategory = c.parse().map_err(|_| bad(format!("unknown category `{c}`")))?;
            let regex = RegexBuilder::new(re).case_insensitive(true).build().map_err(|e| bad(e.to_string()))?;
            if regex.is_match("") {
                return Err(bad(format!("pattern `{name}` matches the empty message")));
            }
            patterns.push(NamedPattern { category, name: name.to_string(), regex });
        }
        if patterns.is_empty() {
            return Err(Error::MalformedCatalog { line: 0, message: "no patterns".into() });
        }
        Ok(PatternSet { patterns })
    }

    pub fn load(path: &Path) -> Result<PatternSet> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        PatternSet::parse(&text)
    }

    pub fn patterns(&self) -> &[NamedPattern] {
        &self.patterns
    }

    /// First category in [`PRECEDENCE`] order with a matching pattern.
    pub fn classify(&self, message: &str) -> Option<CategoryMatch> {
        PRECEDENCE.into_iter().find_map(|category| {
            let mut matched_patterns = Vec::new();
            let mut matched_spans = Vec::new();
            for p in self.patterns.iter().filter(|p| p.category == category) {
                if let Some(m) = p.regex.find(message) {
                    matched_patterns.push(p.name.clone());
                    matched_spans.push((m.start(), m.len()));
                }
            }
            (!matched_patterns.is_empty()).then_some(CategoryMatch { category, matched_patterns, matched_spans })
        })
    }

    /// True if any pattern of any category matches.
    pub fn is_match(&self, message: &str) -> bool {
        self.patterns.iter().any(|p| p.regex.is_match(message))
    }
}

impl Default for PatternSet {
    fn default() -> PatternSet {
        PatternSet::parse(DEFAULT_PATTERNS).expect("bundled patterns are valid")
    }
}

/// Classifies with the default patterns.
pub fn classify_message(message: &str) -> Option<CategoryMatch> {
    PatternSet::default().classify(message)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cat(m: &str) -> Option<BugCategory> {
        classify_message(m).map(|c| c.category)
    }

    #[test]
    fn message_examples() {
        assert_eq!(cat("Fix NullPointerException when cache is empty"), Some(BugCategory::NullPointer));
        assert_eq!(cat("ArrayIndexOutOfBoundsException in parser loop"), Some(BugCategory::Overflow));
        assert_eq!(cat("Refactor imports"), None);
        assert_eq!(cat("fix wrong result of rounding"), Some(BugCategory::Logic));
    }

    #[test]
    fn overflow_alternatives() {
        for m in [
            "array overflow when resizing",
            "index out of bounds in reader",
            "value out of range",
            "integer overflow in size computation",
            "StringIndexOutOfBoundsException on empty input",
            "guard against BufferOverflowException",
        ] {
            assert_eq!(cat(m), Some(BugCategory::Overflow), "{m}");
        }
    }

    #[test]
    fn precedence_and_evidence() {
        let m = classify_message("fix bug: NPE in logic that hit an IndexOutOfBoundsException").unwrap();
        assert_eq!(m.category, BugCategory::Overflow);
        assert_eq!(m.matched_patterns, ["out_of_bounds_exception"]);
        let m = classify_message("Fix npe in handler").unwrap();
        assert_eq!(m.category, BugCategory::NullPointer);
        assert_eq!(m.matched_spans, [(4, 3)]);
        let m = classify_message("Logical fix: wrong output for empty lists").unwrap();
        assert_eq!(m.matched_patterns, ["logic_fix", "bug_keyword", "wrong_output"]);
    }

    #[test]
    fn case_insensitive() {
        assert_eq!(cat("NULL POINTER on startup"), Some(BugCategory::NullPointer));
        assert_eq!(cat("HEAP OVERFLOW"), Some(BugCategory::Overflow));
    }

    #[test]
    fn rejects_patterns_matching_everything() {
        assert!(PatternSet::parse("logic\tall\tfoo|\n").is_err());
        assert!(PatternSet::parse("logic\tbroken\t(\n").is_err());
        assert!(PatternSet::parse("weird\tx\tfoo\n").is_err());
    }
}
