//! Unified diff parsing, application and changed-line counting.

use std::fmt::Write as _;

use glob::Pattern;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Line {
    Context(String),
    Removed(String),
    Added(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hunk {
    pub old_start: usize,
    pub old_len: usize,
    pub new_start: usize,
    pub new_len: usize,
    pub lines: Vec<Line>,
    /// The old side's last line has no trailing newline.
    pub old_no_newline: bool,
    pub new_no_newline: bool,
}

impl Hunk {
    /// Sizes of each contiguous run of changed lines as `(removed, added)`.
    pub fn change_runs(&self) -> Vec<(usize, usize)> {
        let mut runs = Vec::new();
        let mut cur = (0, 0);
        for line in &self.lines {
            match line {
                Line::Removed(_) => cur.0 += 1,
                Line::Added(_) => cur.1 += 1,
                Line::Context(_) => {
                    if cur != (0, 0) {
                        runs.push(cur);
                    }
                    cur = (0, 0);
                }
            }
        }
        if cur != (0, 0) {
            runs.push(cur);
        }
        runs
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileDiff {
    /// `None` for created files.
    pub old_path: Option<String>,
    /// `None` for deleted files.
    pub new_path: Option<String>,
    pub hunks: Vec<Hunk>,
    pub binary: bool,
}

impl FileDiff {
    /// The path the change is best known by.
    pub fn path(&self) -> &str {
        self.new_path.as_deref().or(self.old_path.as_deref()).unwrap_or("")
    }

    /// Applies the hunks to `before`, checking context and removed lines.
    pub fn apply(&self, before: &str) -> Result<String> {
        let old: Vec<&str> = before.split_inclusive('\n').collect();
        let mut out = String::with_capacity(before.len());
        let mut cursor = 0usize;
        let mismatch = |n: usize, msg: String| Error::MalformedDiff { line: n, message: format!("{}: {msg}", self.path()) };
        for hunk in &self.hunks {
            // A zero-length old range names the line *after which* to insert.
            let start = if hunk.old_len == 0 { hunk.old_start } else { hunk.old_start.saturating_sub(1) };
            if start < cursor || start > old.len() {
                return Err(mismatch(hunk.old_start, "hunk out of range".into()));
            }
            for l in &old[cursor..start] {
                out.push_str(l);
            }
            cursor = start;
            let last_new = hunk.lines.iter().rposition(|l| !matches!(l, Line::Removed(_)));
            for (i, line) in hunk.lines.iter().enumerate() {
                match line {
                    Line::Context(text) | Line::Removed(text) => {
                        let have = old.get(cursor).ok_or_else(|| mismatch(cursor + 1, "past end of file".into()))?;
                        if have.trim_end_matches('\n').trim_end_matches('\r') != text.trim_end_matches('\r') {
                            return Err(mismatch(cursor + 1, format!("expected {text:?}, found {have:?}")));
                        }
                        if matches!(line, Line::Context(_)) {
                            out.push_str(have);
                        }
                        cursor += 1;
                    }
                    Line::Added(text) => {
                        out.push_str(text);
                        if !(hunk.new_no_newline && Some(i) == last_new) {
                            out.push('\n');
                        }
                    }
                }
            }
            if hunk.new_no_newline && matches!(last_new.map(|i| &hunk.lines[i]), Some(Line::Context(_))) && out.ends_with('\n') {
                out.pop();
            }
        }
        for l in &old[cursor..] {
            out.push_str(l);
        }
        Ok(out)
    }
}

/// A parsed multi-file unified diff.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Diff {
    pub files: Vec<FileDiff>,
}

impl Diff {
    pub fn parse(text: &str) -> Result<Diff> {
        Parser { lines: text.lines().collect(), pos: 0 }.run()
    }

    pub fn is_empty(&self) -> bool {
        self.files.iter().all(|f| f.hunks.is_empty() && !f.binary)
    }

    pub fn file(&self, path: &str) -> Option<&FileDiff> {
        self.files.iter().find(|f| f.path() == path)
    }

    /// Renders back to unified format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for f in &self.files {
            let a = f.old_path.as_ref().map_or("/dev/null".to_string(), |p| format!("a/{p}"));
            let b = f.new_path.as_ref().map_or("/dev/null".to_string(), |p| format!("b/{p}"));
            let _ = writeln!(out, "--- {a}\n+++ {b}");
            for h in &f.hunks {
                let _ = writeln!(out, "@@ -{},{} +{},{} @@", h.old_start, h.old_len, h.new_start, h.new_len);
                let last_old = h.lines.iter().rposition(|l| !matches!(l, Line::Added(_)));
                let last_new = h.lines.iter().rposition(|l| !matches!(l, Line::Removed(_)));
                for (i, l) in h.lines.iter().enumerate() {
                    let (sign, text) = match l {
                        Line::Context(t) => (' ', t),
                        Line::Removed(t) => ('-', t),
                        Line::Added(t) => ('+', t),
                    };
                    let _ = writeln!(out, "{sign}{text}");
                    let old_end = h.old_no_newline && Some(i) == last_old;
                    let new_end = h.new_no_newline && Some(i) == last_new;
                    if old_end || new_end {
                        out.push_str("\\ No newline at end of file\n");
                    }
                }
            }
        }
        out
    }
}

struct Parser<'a> {
    lines: Vec<&'a str>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::MalformedDiff { line: self.pos + 1, message: message.into() }
    }

    fn peek(&self) -> Option<&'a str> {
        self.lines.get(self.pos).copied()
    }

    fn run(mut self) -> Result<Diff> {
        let mut files = Vec::new();
        let mut pending: Option<FileDiff> = None;
        while let Some(line) = self.peek() {
            if let Some(rest) = line.strip_prefix("diff --git ") {
                files.extend(pending.take());
                let (a, b) = split_git_header(rest).ok_or_else(|| self.err("bad `diff --git` header"))?;
                pending = Some(FileDiff { old_path: Some(a), new_path: Some(b), hunks: Vec::new(), binary: false });
                self.pos += 1;
            } else if line.starts_with("--- ") && self.lines.get(self.pos + 1).is_some_and(|l| l.starts_with("+++ ")) {
                let old_path = strip_path(&line[4..], "a/");
                let new_path = strip_path(&self.lines[self.pos + 1][4..], "b/");
                match pending.as_mut() {
                    Some(f) if f.hunks.is_empty() => {
                        f.old_path = old_path;
                        f.new_path = new_path;
                    }
                    _ => {
                        files.extend(pending.take());
                        pending = Some(FileDiff { old_path, new_path, hunks: Vec::new(), binary: false });
                    }
                }
                self.pos += 2;
            } else if line.starts_with("@@") {
                let hunk = self.hunk()?;
                pending.as_mut().ok_or_else(|| self.err("hunk before file header"))?.hunks.push(hunk);
            } else if let Some(f) = pending.as_mut() {
                if line.starts_with("new file mode") {
                    f.old_path = None;
                } else if line.starts_with("deleted file mode") {
                    f.new_path = None;
                } else if line.starts_with("Binary files") || line.starts_with("GIT binary patch") {
                    f.binary = true;
                }
                self.pos += 1;
            } else {
                // Preamble such as a commit header.
                self.pos += 1;
            }
        }
        files.extend(pending);
        Ok(Diff { files })
    }

    fn hunk(&mut self) -> Result<Hunk> {
        let header = self.peek().unwrap_or_default();
        let (old_start, old_len, new_start, new_len) =
            parse_hunk_header(header).ok_or_else(|| self.err(format!("bad hunk header {header:?}")))?;
        self.pos += 1;
        let mut hunk = Hunk { old_start, old_len, new_start, new_len, lines: Vec::new(), old_no_newline: false, new_no_newline: false };
        let (mut old_seen, mut new_seen) = (0, 0);
        while old_seen < old_len || new_seen < new_len {
            let line = self.peek().ok_or_else(|| self.err("hunk ends early"))?;
            match line.as_bytes().first() {
                Some(b' ') | None => {
                    hunk.lines.push(Line::Context(line.get(1..).unwrap_or("").to_string()));
                    old_seen += 1;
                    new_seen += 1;
                }
                Some(b'-') => {
                    hunk.lines.push(Line::Removed(line[1..].to_string()));
                    old_seen += 1;
                }
                Some(b'+') => {
                    hunk.lines.push(Line::Added(line[1..].to_string()));
                    new_seen += 1;
                }
                Some(b'\\') => self.no_newline(&mut hunk),
                _ => return Err(self.err(format!("unexpected line in hunk {line:?}"))),
            }
            self.pos += 1;
            if old_seen > old_len || new_seen > new_len {
                return Err(self.err("hunk longer than its header says"));
            }
        }
        if self.peek().is_some_and(|l| l.starts_with('\\')) {
            self.no_newline(&mut hunk);
            self.pos += 1;
        }
        Ok(hunk)
    }

    fn no_newline(&self, hunk: &mut Hunk) {
        match hunk.lines.last() {
            Some(Line::Removed(_)) => hunk.old_no_newline = true,
            Some(Line::Added(_)) => hunk.new_no_newline = true,
            Some(Line::Context(_)) => {
                hunk.old_no_newline = true;
                hunk.new_no_newline = true;
            }
            None => {}
        }
    }
}

fn split_git_header(rest: &str) -> Option<(String, String)> {
    let rest = rest.strip_prefix("a/")?;
    let idx = rest.find(" b/")?;
    Some((rest[..idx].to_string(), rest[idx + 3..].to_string()))
}

fn strip_path(raw: &str, prefix: &str) -> Option<String> {
    let raw = raw.split('\t').next().unwrap_or(raw).trim_end();
    if raw == "/dev/null" {
        return None;
    }
    Some(raw.strip_prefix(prefix).unwrap_or(raw).to_string())
}

fn parse_hunk_header(line: &str) -> Option<(usize, usize, usize, usize)> {
    let rest = line.strip_prefix("@@ -")?;
    let end = rest.find(" @@")?;
    let (old, new) = rest[..end].split_once(" +")?;
    let range = |s: &str| -> Option<(usize, usize)> {
        match s.split_once(',') {
            Some((a, b)) => Some((a.parse().ok()?, b.parse().ok()?)),
            None => Some((s.parse().ok()?, 1)),
        }
    };
    let (a, b) = range(old)?;
    let (c, d) = range(new)?;
    Some((a, b, c, d))
}

/// Decides which files count as object-language source.
#[derive(Debug, Clone)]
pub struct SourceFilter {
    extensions: Vec<String>,
    excludes: Vec<Pattern>,
}

impl SourceFilter {
    pub fn new<S: AsRef<str>>(extensions: &[S], exclude_globs: &[S]) -> Result<SourceFilter> {
        let excludes = exclude_globs
            .iter()
            .map(|g| Pattern::new(g.as_ref()).map_err(|e| Error::InvalidInput(format!("glob {:?}: {e}", g.as_ref()))))
            .collect::<Result<_>>()?;
        Ok(SourceFilter { extensions: extensions.iter().map(|e| e.as_ref().to_string()).collect(), excludes })
    }

    pub fn is_source(&self, path: &str) -> bool {
        self.extensions.iter().any(|e| path.ends_with(e.as_str())) && !self.is_excluded(path)
    }

    pub fn is_excluded(&self, path: &str) -> bool {
        self.excludes.iter().any(|p| p.matches(path))
    }
}

pub const DEFAULT_EXTENSIONS: &[&str] = &[".java"];
pub const DEFAULT_EXCLUDES: &[&str] = &[
    "**/test/**",
    "**/tests/**",
    "**/*Test.java",
    "**/*Tests.java",
    "**/doc/**",
    "**/docs/**",
];

impl Default for SourceFilter {
    fn default() -> SourceFilter {
        SourceFilter::new(DEFAULT_EXTENSIONS, DEFAULT_EXCLUDES).expect("default globs are valid")
    }
}

/// Affected source lines. In each contiguous run of changes, removed and
/// added lines pair up positionally, so a run counts `max(removed, added)`.
/// Files that are not source, or are excluded, count zero.
pub fn changed_line_count(diff: &Diff, filter: &SourceFilter) -> usize {
    diff.files
        .iter()
        .filter(|f| filter.is_source(f.path()))
        .flat_map(|f| f.hunks.iter())
        .flat_map(|h| h.change_runs())
        .map(|(r, a)| r.max(a))
        .sum()
}

/// Parses and counts in one step.
pub fn changed_line_count_text(diff: &str, filter: &SourceFilter) -> Result<usize> {
    Ok(changed_line_count(&Diff::parse(diff)?, filter))
}
