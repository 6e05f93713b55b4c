//! Extraction of candidate fix triples from a repository's branch history.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

use git2::{BranchType, Commit, DiffFormat, DiffOptions, ObjectType, Oid, Repository};
use regex::{Regex, RegexBuilder};
use tracing::{debug, info};

use crate::bugclass::PatternSet;
use crate::corpus::{triple_id, CommitTriple, Corpus, TripleRecord};
use crate::error::{Error, Result};
use crate::unidiff::{changed_line_count, Diff, SourceFilter};

pub const DEFAULT_MAX_CHANGED_LINES: usize = 5;

#[derive(Debug, Clone)]
pub struct MinerConfig {
    pub max_changed_lines: usize,
    /// A message is a bug fix if any of these matches.
    pub bugfix_keywords: Vec<Regex>,
    /// Local branch name, or any revision git can resolve (e.g. `HEAD`).
    pub branch: String,
    pub filter: SourceFilter,
}

impl MinerConfig {
    /// Uses the category patterns as the bug-fix keywords.
    pub fn new(branch: impl Into<String>, patterns: &PatternSet) -> MinerConfig {
        MinerConfig {
            max_changed_lines: DEFAULT_MAX_CHANGED_LINES,
            bugfix_keywords: patterns.patterns().iter().map(|p| p.regex.clone()).collect(),
            branch: branch.into(),
            filter: SourceFilter::default(),
        }
    }

    pub fn with_keywords(mut self, keywords: &[&str]) -> Result<MinerConfig> {
        self.bugfix_keywords = keywords
            .iter()
            .map(|k| RegexBuilder::new(k).case_insensitive(true).build())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_changed_lines == 0 {
            return Err(Error::InvalidInput("max_changed_lines must be at least 1".into()));
        }
        Ok(())
    }

    pub fn is_bug_fix(&self, message: &str) -> bool {
        self.bugfix_keywords.iter().any(|k| k.is_match(message))
    }
}

impl Default for MinerConfig {
    fn default() -> MinerConfig {
        MinerConfig::new("HEAD", &PatternSet::default())
    }
}

/// Result of walking one branch: candidate triples oldest first.
#[derive(Debug, Clone)]
pub struct Walk {
    pub triples: Vec<CommitTriple>,
    pub skipped_merges: usize,
}

fn open(path: &Path) -> Result<Repository> {
    Repository::open(path).map_err(|e| Error::RepoUnreadable { path: path.display().to_string(), message: e.message().to_string() })
}

fn branch_tip<'r>(repo: &'r Repository, branch: &str) -> Result<Commit<'r>> {
    if let Ok(b) = repo.find_branch(branch, BranchType::Local) {
        return Ok(b.get().peel_to_commit()?);
    }
    repo.revparse_single(branch)
        .and_then(|o| o.peel_to_commit())
        .map_err(|_| Error::BranchMissing(branch.to_string()))
}

/// First-parent chain from the root to `tip`.
fn first_parent_chain(tip: Commit<'_>) -> Result<Vec<Oid>> {
    let mut chain = vec![tip.id()];
    let mut current = tip;
    while current.parent_count() > 0 {
        current = current.parent(0)?;
        chain.push(current.id());
    }
    chain.reverse();
    Ok(chain)
}

fn blob_text(repo: &Repository, commit: &Commit<'_>, path: &str) -> Result<Option<String>> {
    let tree = commit.tree()?;
    let Ok(entry) = tree.get_path(Path::new(path)) else { return Ok(None) };
    if entry.kind() != Some(ObjectType::Blob) {
        return Ok(None);
    }
    let blob = repo.find_blob(entry.id())?;
    Ok(Some(String::from_utf8_lossy(blob.content()).into_owned()))
}

fn pair_triple(repo: &Repository, repo_id: &str, pre: &Commit<'_>, post: &Commit<'_>, filter: &SourceFilter) -> Result<CommitTriple> {
    let mut opts = DiffOptions::new();
    opts.context_lines(3);
    let git_diff = repo.diff_tree_to_tree(Some(&pre.tree()?), Some(&post.tree()?), Some(&mut opts))?;
    let mut buf = Vec::new();
    git_diff.print(DiffFormat::Patch, |_, _, line| {
        if matches!(line.origin(), '+' | '-' | ' ') {
            buf.push(line.origin() as u8);
        }
        buf.extend_from_slice(line.content());
        true
    })?;
    let text = String::from_utf8_lossy(&buf).into_owned();
    let diff = Diff::parse(&text)?;
    let mut buggy_source = BTreeMap::new();
    for f in &diff.files {
        if let Some(old) = &f.old_path {
            if !f.binary && filter.is_source(old) {
                if let Some(content) = blob_text(repo, pre, old)? {
                    buggy_source.insert(old.clone(), content);
                }
            }
        }
    }
    Ok(CommitTriple {
        repo_id: repo_id.to_string(),
        pre_commit: pre.id().to_string(),
        post_commit: post.id().to_string(),
        message: post.message().unwrap_or_default().trim_end().to_string(),
        diff,
        buggy_source,
    })
}

/// One candidate triple per consecutive commit pair on the branch's
/// first-parent chain, oldest first. Pairs whose later commit is a merge are
/// skipped and counted.
pub fn walk_commit_pairs(path: &Path, repo_id: &str, config: &MinerConfig) -> Result<Walk> {
    config.validate()?;
    let repo = open(path)?;
    let chain = first_parent_chain(branch_tip(&repo, &config.branch)?)?;
    let mut triples = Vec::new();
    let mut skipped_merges = 0;
    for w in chain.windows(2) {
        let pre = repo.find_commit(w[0])?;
        let post = repo.find_commit(w[1])?;
        if post.parent_count() > 1 {
            skipped_merges += 1;
            continue;
        }
        triples.push(pair_triple(&repo, repo_id, &pre, &post, &config.filter)?);
    }
    if skipped_merges > 0 {
        info!(repo = repo_id, skipped_merges, "skipped merge commits");
    }
    Ok(Walk { triples, skipped_merges })
}

/// Size, keyword and source-file filter for one candidate.
pub fn filter_triple(t: &CommitTriple, config: &MinerConfig) -> bool {
    let touches_source = t.diff.files.iter().any(|f| !f.binary && config.filter.is_source(f.path()));
    touches_source && changed_line_count(&t.diff, &config.filter) <= config.max_changed_lines && config.is_bug_fix(&t.message)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MineSummary {
    pub pairs: usize,
    pub skipped_merges: usize,
    pub emitted: usize,
}

/// Walks, filters, proposes a category from the message, and writes the
/// surviving triples to `corpus`. Ids number the walked pairs, so re-mining
/// the same history rewrites the same files.
pub fn mine_into(path: &Path, repo_id: &str, config: &MinerConfig, patterns: &PatternSet, corpus: &Corpus) -> Result<MineSummary> {
    let walk = walk_commit_pairs(path, repo_id, config)?;
    let mut summary = MineSummary { pairs: walk.triples.len(), skipped_merges: walk.skipped_merges, emitted: 0 };
    for (seq, t) in walk.triples.into_iter().enumerate() {
        if !filter_triple(&t, config) {
            continue;
        }
        let category = patterns.classify(&t.message).map(|m| m.category);
        let id = triple_id(repo_id, seq + 1, &t.post_commit);
        debug!(%id, ?category, "emitting triple");
        let mut record = TripleRecord::new(id, t, category);
        if corpus.contains(&record.id) {
            // Keep verdicts already given for this triple.
            record.verdicts = corpus.read(&record.id)?.verdicts;
        }
        corpus.write(&record)?;
        summary.emitted += 1;
    }
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub location: String,
    pub branch: String,
}

impl ManifestEntry {
    /// Repository id derived from the location's last path component.
    pub fn repo_id(&self) -> String {
        let trimmed = self.location.trim_end_matches('/');
        let last = trimmed.rsplit(['/', ':']).next().unwrap_or(trimmed);
        last.strip_suffix(".git").unwrap_or(last).to_string()
    }

    pub fn is_remote(&self) -> bool {
        self.location.contains("://") || self.location.starts_with("git@")
    }
}

/// Parses `url<TAB>branch` lines; blank lines and `#` comments are skipped.
pub fn parse_repo_manifest(text: &str) -> Result<Vec<ManifestEntry>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (location, branch) = line
            .split_once('\t')
            .ok_or_else(|| Error::MalformedManifest { line: i + 1, message: "expected `url<TAB>branch`".into() })?;
        if location.is_empty() || branch.is_empty() || branch.contains('\t') {
            return Err(Error::MalformedManifest { line: i + 1, message: "empty or extra field".into() });
        }
        out.push(ManifestEntry { location: location.to_string(), branch: branch.to_string() });
    }
    Ok(out)
}

/// Local checkout for a manifest entry. Remote repositories are cloned into
/// `work_dir` with the `git` command-line tool, or reused if already there.
pub fn checkout(entry: &ManifestEntry, work_dir: &Path) -> Result<PathBuf> {
    if !entry.is_remote() {
        return Ok(PathBuf::from(&entry.location));
    }
    let dest = work_dir.join(entry.repo_id());
    if dest.join(".git").exists() || dest.join("HEAD").exists() {
        return Ok(dest);
    }
    std::fs::create_dir_all(work_dir).map_err(|e| Error::io(work_dir, e))?;
    let status = Command::new("git")
        .args(["clone", "--quiet", "--branch", &entry.branch, &entry.location])
        .arg(&dest)
        .status()
        .map_err(|e| Error::io(&dest, e))?;
    if !status.success() {
        return Err(Error::RepoUnreadable { path: dest.display().to_string(), message: format!("git clone exited with {status}") });
    }
    Ok(dest)
}

/// Mines every manifest entry, one thread per repository.
pub fn mine_manifest(
    entries: &[ManifestEntry],
    work_dir: &Path,
    base: &MinerConfig,
    patterns: &PatternSet,
    corpus: &Corpus,
) -> Result<Vec<(String, MineSummary)>> {
    std::thread::scope(|s| {
        let handles: Vec<_> = entries
            .iter()
            .map(|e| {
                s.spawn(move || {
                    let path = checkout(e, work_dir)?;
                    let config = MinerConfig { branch: e.branch.clone(), ..base.clone() };
                    let id = e.repo_id();
                    let summary = mine_into(&path, &id, &config, patterns, corpus)?;
                    Ok((id, summary))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("mining thread panicked")).collect()
    })
}
