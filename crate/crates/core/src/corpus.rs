//! Mined triples and their on-disk corpus: one text file per triple.
//!
//! A record file starts with `key: value` header lines followed by content
//! sections. A section is a `message:`, `diff:` or `source: <path>` line and
//! then the content, one `|`-prefixed line per line of text.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::category::BugCategory;
use crate::error::{Error, Result};
use crate::patchclass::SourcePair;
use crate::unidiff::{Diff, SourceFilter};

const RECORD_EXT: &str = "triple";

/// One training data point: the buggy snapshot of the touched files, the
/// fixing diff and the fixing commit's message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitTriple {
    pub repo_id: String,
    pub pre_commit: String,
    pub post_commit: String,
    pub message: String,
    pub diff: Diff,
    /// Content at `pre_commit` of each touched source file, by path.
    pub buggy_source: BTreeMap<String, String>,
}

impl CommitTriple {
    /// Before/after text of every touched source file. The after side is
    /// the diff applied to the buggy source.
    pub fn source_pairs(&self, filter: &SourceFilter) -> Result<Vec<SourcePair>> {
        let mut pairs = Vec::new();
        for f in &self.diff.files {
            if f.binary || !filter.is_source(f.path()) {
                continue;
            }
            let before = match &f.old_path {
                Some(p) => self
                    .buggy_source
                    .get(p)
                    .ok_or_else(|| Error::InvalidInput(format!("no buggy source recorded for {p}")))?
                    .clone(),
                None => String::new(),
            };
            let after = if f.new_path.is_some() { f.apply(&before)? } else { String::new() };
            pairs.push(SourcePair::new(f.path(), before, after));
        }
        Ok(pairs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ReviewStatus {
    Pending,
    Accepted,
    Rejected,
}

impl ReviewStatus {
    /// Accepted needs at least two verdicts, all accepting; any reject
    /// rejects.
    pub fn from_verdicts(verdicts: &[Verdict]) -> ReviewStatus {
        if verdicts.iter().any(|v| !v.accept) {
            ReviewStatus::Rejected
        } else if verdicts.len() >= 2 {
            ReviewStatus::Accepted
        } else {
            ReviewStatus::Pending
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ReviewStatus::Pending => "pending",
            ReviewStatus::Accepted => "accepted",
            ReviewStatus::Rejected => "rejected",
        }
    }
}

impl fmt::Display for ReviewStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReviewStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<ReviewStatus> {
        match s {
            "pending" => Ok(ReviewStatus::Pending),
            "accepted" => Ok(ReviewStatus::Accepted),
            "rejected" => Ok(ReviewStatus::Rejected),
            _ => Err(Error::InvalidInput(format!("unknown review status `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub reviewer: String,
    pub accept: bool,
}

/// A triple plus its annotations, as stored in the corpus directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripleRecord {
    pub id: String,
    pub triple: CommitTriple,
    /// Category proposed by the message classifier, if any pattern matched.
    pub category: Option<BugCategory>,
    pub verdicts: Vec<Verdict>,
    /// Catalog version and kind signature, once the patch is classified.
    pub kind: Option<(String, String)>,
}

impl TripleRecord {
    pub fn new(id: impl Into<String>, triple: CommitTriple, category: Option<BugCategory>) -> TripleRecord {
        TripleRecord { id: id.into(), triple, category, verdicts: Vec::new(), kind: None }
    }

    pub fn status(&self) -> ReviewStatus {
        ReviewStatus::from_verdicts(&self.verdicts)
    }

    /// Records a verdict, replacing an earlier one by the same reviewer.
    pub fn set_verdict(&mut self, reviewer: &str, accept: bool) {
        match self.verdicts.iter_mut().find(|v| v.reviewer == reviewer) {
            Some(v) => v.accept = accept,
            None => self.verdicts.push(Verdict { reviewer: reviewer.to_string(), accept }),
        }
    }

    pub fn to_text(&self) -> String {
        let t = &self.triple;
        let mut out = String::new();
        let mut header = |k: &str, v: &str| {
            out.push_str(k);
            out.push_str(": ");
            out.push_str(v);
            out.push('\n');
        };
        header("id", &self.id);
        header("repo", &t.repo_id);
        header("pre-commit", &t.pre_commit);
        header("post-commit", &t.post_commit);
        if let Some(c) = self.category {
            header("category", c.as_str());
        }
        header("status", self.status().as_str());
        for v in &self.verdicts {
            header(&format!("verdict[{}]", v.reviewer), if v.accept { "accept" } else { "reject" });
        }
        if let Some((version, sig)) = &self.kind {
            header("catalog-version", version);
            header("kind", sig);
        }
        push_section(&mut out, "message:", &t.message);
        push_section(&mut out, "diff:", &t.diff.to_text());
        for (path, content) in &t.buggy_source {
            push_section(&mut out, &format!("source: {path}"), content);
        }
        out
    }

    pub fn parse(text: &str, origin: &str) -> Result<TripleRecord> {
        let bad = |message: String| Error::MalformedRecord { path: origin.to_string(), message };
        let mut headers: Vec<(String, String)> = Vec::new();
        let mut sections: Vec<(String, Vec<&str>)> = Vec::new();
        for line in text.split('\n') {
            if let Some(content) = line.strip_prefix('|') {
                sections
                    .last_mut()
                    .ok_or_else(|| bad("content line before any section".into()))?
                    .1
                    .push(content);
            } else if line == "message:" || line == "diff:" || line.starts_with("source: ") {
                sections.push((line.to_string(), Vec::new()));
            } else if line.is_empty() {
                continue;
            } else if !sections.is_empty() {
                return Err(bad(format!("header line after sections: {line:?}")));
            } else {
                let (k, v) = line.split_once(": ").or_else(|| line.strip_suffix(':').map(|k| (k, "")))
                    .ok_or_else(|| bad(format!("expected `key: value`, found {line:?}")))?;
                headers.push((k.to_string(), v.to_string()));
            }
        }
        let get = |key: &str| headers.iter().find(|(k, _)| k == key).map(|(_, v)| v.clone());
        let need = |key: &str| get(key).ok_or_else(|| bad(format!("missing `{key}`")));
        let category = get("category").map(|c| c.parse::<BugCategory>()).transpose()?;
        let mut verdicts = Vec::new();
        for (k, v) in &headers {
            if let Some(reviewer) = k.strip_prefix("verdict[").and_then(|r| r.strip_suffix(']')) {
                let accept = match v.as_str() {
                    "accept" => true,
                    "reject" => false,
                    _ => return Err(bad(format!("bad verdict `{v}`"))),
                };
                verdicts.push(Verdict { reviewer: reviewer.to_string(), accept });
            }
        }
        let kind = match (get("catalog-version"), get("kind")) {
            (Some(v), Some(k)) => Some((v, k)),
            (None, None) => None,
            _ => return Err(bad("`kind` and `catalog-version` go together".into())),
        };
        let section = |name: &str| sections.iter().find(|(n, _)| n == name).map(|(_, lines)| lines.join("\n"));
        let message = section("message:").ok_or_else(|| bad("missing message".into()))?;
        let diff = Diff::parse(&section("diff:").ok_or_else(|| bad("missing diff".into()))?)?;
        let buggy_source = sections
            .iter()
            .filter_map(|(n, lines)| n.strip_prefix("source: ").map(|p| (p.to_string(), lines.join("\n"))))
            .collect();
        let record = TripleRecord {
            id: need("id")?,
            triple: CommitTriple {
                repo_id: need("repo")?,
                pre_commit: need("pre-commit")?,
                post_commit: need("post-commit")?,
                message,
                diff,
                buggy_source,
            },
            category,
            verdicts,
            kind,
        };
        if let Some(stated) = get("status") {
            if stated.parse::<ReviewStatus>()? != record.status() {
                return Err(bad(format!("status `{stated}` disagrees with the verdicts")));
            }
        }
        Ok(record)
    }
}

fn push_section(out: &mut String, title: &str, content: &str) {
    out.push_str(title);
    out.push('\n');
    for line in content.split('\n') {
        out.push('|');
        out.push_str(line);
        out.push('\n');
    }
}

/// A directory of record files. Corpus order is file-name order.
#[derive(Debug, Clone)]
pub struct Corpus {
    dir: PathBuf,
}

impl Corpus {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Corpus> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(Corpus { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_of(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.{RECORD_EXT}"))
    }

    pub fn write(&self, record: &TripleRecord) -> Result<()> {
        let path = self.path_of(&record.id);
        fs::write(&path, record.to_text()).map_err(|e| Error::io(&path, e))
    }

    pub fn read(&self, id: &str) -> Result<TripleRecord> {
        let path = self.path_of(id);
        if !path.exists() {
            return Err(Error::UnknownTripleId(id.to_string()));
        }
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        TripleRecord::parse(&text, &path.display().to_string())
    }

    pub fn contains(&self, id: &str) -> bool {
        self.path_of(id).exists()
    }

    pub fn ids(&self) -> Result<Vec<String>> {
        let mut ids = Vec::new();
        for entry in fs::read_dir(&self.dir).map_err(|e| Error::io(&self.dir, e))? {
            let path = entry.map_err(|e| Error::io(&self.dir, e))?.path();
            if path.extension().is_some_and(|e| e == RECORD_EXT) {
                if let Some(stem) = path.file_stem() {
                    ids.push(stem.to_string_lossy().into_owned());
                }
            }
        }
        ids.sort();
        Ok(ids)
    }

    pub fn load_all(&self) -> Result<Vec<TripleRecord>> {
        self.ids()?.iter().map(|id| self.read(id)).collect()
    }
}

/// File-name-safe identifier for the `seq`-th triple mined from a repository.
pub fn triple_id(repo_id: &str, seq: usize, post_commit: &str) -> String {
    let slug: String = repo_id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    let short: String = post_commit.chars().take(10).collect();
    format!("{slug}-{seq:06}-{short}")
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn sample_triple() -> CommitTriple {
        let diff = "--- a/src/A.java\n+++ b/src/A.java\n@@ -1,3 +1,4 @@\n class A {\n   void m() {\n+    b();\n   }\n";
        CommitTriple {
            repo_id: "demo".into(),
            pre_commit: "aaaa".into(),
            post_commit: "bbbb".into(),
            message: "Fix NPE in m\n\nDetails: |pipes| and\ttabs".into(),
            diff: Diff::parse(diff).unwrap(),
            buggy_source: [("src/A.java".to_string(), "class A {\n  void m() {\n  }\n}\n".to_string())].into(),
        }
    }

    #[test]
    fn record_text_round_trip() {
        let mut r = TripleRecord::new("demo-000001-bbbb", sample_triple(), Some(BugCategory::NullPointer));
        r.set_verdict("ann", true);
        r.kind = Some(("1.0.0".into(), "method_call.add".into()));
        let text = r.to_text();
        assert_eq!(TripleRecord::parse(&text, "t").unwrap(), r);
        assert!(text.contains("status: pending\n"));
    }

    #[test]
    fn source_pairs_apply_the_diff() {
        let pairs = sample_triple().source_pairs(&SourceFilter::default()).unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].after, "class A {\n  void m() {\n    b();\n  }\n}\n");
    }

    #[test]
    fn verdicts_decide_status() {
        let v = |a: &[bool]| -> Vec<Verdict> {
            a.iter().enumerate().map(|(i, &accept)| Verdict { reviewer: format!("r{i}"), accept }).collect()
        };
        assert_eq!(ReviewStatus::from_verdicts(&v(&[true, true])), ReviewStatus::Accepted);
        assert_eq!(ReviewStatus::from_verdicts(&v(&[true, false])), ReviewStatus::Rejected);
        assert_eq!(ReviewStatus::from_verdicts(&v(&[true])), ReviewStatus::Pending);
        assert_eq!(ReviewStatus::from_verdicts(&v(&[])), ReviewStatus::Pending);
    }

    #[test]
    fn corpus_directory() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = Corpus::open(dir.path()).unwrap();
        for seq in [2, 1] {
            let id = triple_id("org/repo.git", seq, "0123456789abcdef");
            corpus.write(&TripleRecord::new(id, sample_triple(), None)).unwrap();
        }
        assert_eq!(corpus.ids().unwrap(), ["org_repo_git-000001-0123456789", "org_repo_git-000002-0123456789"]);
        assert!(matches!(corpus.read("nope"), Err(Error::UnknownTripleId(_))));
        assert_eq!(corpus.load_all().unwrap().len(), 2);
    }

    #[test]
    fn inconsistent_status_is_rejected() {
        let r = TripleRecord::new("x", sample_triple(), None);
        let text = r.to_text().replace("status: pending", "status: accepted");
        assert!(matches!(TripleRecord::parse(&text, "t"), Err(Error::MalformedRecord { .. })));
    }
}
