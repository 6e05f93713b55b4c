//! File-based two-reviewer validation of proposed bug categories.
//!
//! A review file is a header line followed by blank-line separated blocks:
//!
//! ```text
//! id: repo-000003-1a2b3c4d5e
//! category: null_pointer
//! message: Fix NPE in loader\nsecond line
//! diff: @@ -4,1 +4,2 @@
//! diff: +    if (x == null) return;
//! verdict[reviewer-1]:
//! verdict[reviewer-2]:
//! ```
//!
//! Reviewers fill in `accept` or `reject`. Empty slots are ignored on import.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::corpus::{Corpus, ReviewStatus, TripleRecord};
use crate::error::{Error, Result};

pub const REVIEW_HEADER: &str = "# review-queue 1";
pub const DEFAULT_REVIEWERS: [&str; 2] = ["reviewer-1", "reviewer-2"];
const DIFF_EXCERPT_LINES: usize = 20;

/// Escapes backslashes and newlines so a message fits on one line.
pub fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('\n', "\\n").replace('\r', "\\r")
}

pub fn unescape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some(other) => out.push(other),
            None => out.push('\\'),
        }
    }
    out
}

/// Pending, classified records in corpus order, as review-file text.
pub fn render_queue<'a>(records: impl IntoIterator<Item = &'a TripleRecord>) -> String {
    let mut out = format!("{REVIEW_HEADER}\n");
    for r in records {
        let Some(category) = r.category else { continue };
        if r.status() != ReviewStatus::Pending {
            continue;
        }
        out.push('\n');
        let _ = writeln!(out, "id: {}", r.id);
        let _ = writeln!(out, "category: {category}");
        let _ = writeln!(out, "message: {}", escape(&r.triple.message));
        for line in r.triple.diff.to_text().lines().take(DIFF_EXCERPT_LINES) {
            let _ = writeln!(out, "diff: {line}");
        }
        let mut reviewers: Vec<&str> = r.verdicts.iter().map(|v| v.reviewer.as_str()).collect();
        for d in DEFAULT_REVIEWERS {
            if reviewers.len() >= 2 {
                break;
            }
            if !reviewers.contains(&d) {
                reviewers.push(d);
            }
        }
        for name in reviewers {
            let verdict = r.verdicts.iter().find(|v| v.reviewer == name).map(|v| if v.accept { "accept" } else { "reject" });
            match verdict {
                Some(v) => writeln!(out, "verdict[{name}]: {v}"),
                None => writeln!(out, "verdict[{name}]:"),
            }
            .expect("writing to a String");
        }
    }
    out
}

/// Writes the review queue of `corpus` to `destination`; returns the number
/// of records exported.
pub fn export_review_queue(corpus: &Corpus, destination: &Path) -> Result<usize> {
    let records = corpus.load_all()?;
    let text = render_queue(&records);
    let count = text.lines().filter(|l| l.starts_with("id: ")).count();
    fs::write(destination, text).map_err(|e| Error::io(destination, e))?;
    Ok(count)
}

/// One reviewed block of a review file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReviewEntry {
    pub triple_id: String,
    /// `(reviewer, accept)` for every filled-in slot.
    pub verdicts: Vec<(String, bool)>,
}

pub fn parse_review_file(text: &str) -> Result<Vec<ReviewEntry>> {
    let mut entries: Vec<ReviewEntry> = Vec::new();
    let mut current: Option<(ReviewEntry, BTreeSet<String>)> = None;
    let mut seen_ids = BTreeSet::new();
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim_end() == REVIEW_HEADER => {}
        _ => return Err(Error::MalformedReviewFile { line: 1, message: format!("expected `{REVIEW_HEADER}`") }),
    }
    let finish = |cur: &mut Option<(ReviewEntry, BTreeSet<String>)>, entries: &mut Vec<ReviewEntry>| {
        if let Some((e, _)) = cur.take() {
            entries.push(e);
        }
    };
    for (i, raw) in lines {
        let n = i + 1;
        let bad = |message: String| Error::MalformedReviewFile { line: n, message };
        let line = raw.trim_end();
        if line.is_empty() {
            finish(&mut current, &mut entries);
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once(':')
            .map(|(k, v)| (k, v.trim()))
            .ok_or_else(|| bad(format!("expected `key: value`, found {line:?}")))?;
        if key == "id" {
            if current.is_some() {
                return Err(bad("`id` inside a block; separate blocks by a blank line".into()));
            }
            if !seen_ids.insert(value.to_string()) {
                return Err(bad(format!("triple `{value}` appears twice")));
            }
            current = Some((ReviewEntry { triple_id: value.to_string(), verdicts: Vec::new() }, BTreeSet::new()));
            continue;
        }
        let (entry, reviewers) = current.as_mut().ok_or_else(|| bad("block does not start with `id:`".into()))?;
        if let Some(reviewer) = key.strip_prefix("verdict[").and_then(|r| r.strip_suffix(']')) {
            if reviewer.is_empty() {
                return Err(bad("empty reviewer id".into()));
            }
            if !reviewers.insert(reviewer.to_string()) {
                return Err(bad(format!("reviewer `{reviewer}` listed twice")));
            }
            let accept = match value {
                "" => continue,
                "accept" => true,
                "reject" => false,
                other => return Err(bad(format!("verdict must be accept or reject, found `{other}`"))),
            };
            entry.verdicts.push((reviewer.to_string(), accept));
        } else if !matches!(key, "category" | "message" | "diff") {
            return Err(bad(format!("unknown field `{key}`")));
        }
    }
    finish(&mut current, &mut entries);
    Ok(entries)
}

/// Status counts after an import.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ImportSummary {
    pub accepted: usize,
    pub rejected: usize,
    pub pending: usize,
}

/// Applies the verdicts of a review file to the corpus. Every id is checked
/// before anything is written, so a bad file leaves the corpus untouched.
pub fn import_review_verdicts(corpus: &Corpus, review_file: &Path) -> Result<ImportSummary> {
    let text = fs::read_to_string(review_file).map_err(|e| Error::io(review_file, e))?;
    let entries = parse_review_file(&text)?;
    let mut updated = Vec::with_capacity(entries.len());
    for e in &entries {
        let mut record = corpus.read(&e.triple_id)?;
        for (reviewer, accept) in &e.verdicts {
            record.set_verdict(reviewer, *accept);
        }
        updated.push(record);
    }
    let mut summary = ImportSummary::default();
    for record in &updated {
        corpus.write(record)?;
        match record.status() {
            ReviewStatus::Accepted => summary.accepted += 1,
            ReviewStatus::Rejected => summary.rejected += 1,
            ReviewStatus::Pending => summary.pending += 1,
        }
    }
    Ok(summary)
}
