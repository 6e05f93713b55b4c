//! Re-ranking of candidate patches for one bug by the frequency of their
//! kind in the estimated bug category.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::catalog::Catalog;
use crate::category::BugCategory;
use crate::error::{Error, Result};
use crate::kind::PatchKind;
use crate::model::FrequencyModel;
use crate::patchclass::{PatchClassifier, SourcePair};
use crate::scalar::Scalar;
use crate::unidiff::Diff;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Correctness {
    Correct,
    PlausibleIncorrect,
}

impl fmt::Display for Correctness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Correctness::Correct => "correct",
            Correctness::PlausibleIncorrect => "plausible_incorrect",
        })
    }
}

impl FromStr for Correctness {
    type Err = Error;

    fn from_str(s: &str) -> Result<Correctness> {
        match s {
            "correct" => Ok(Correctness::Correct),
            "plausible_incorrect" | "incorrect" => Ok(Correctness::PlausibleIncorrect),
            _ => Err(Error::InvalidInput(format!("unknown correctness label `{s}`"))),
        }
    }
}

/// A plausible patch from a repair tool, with the tool's own rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatchCandidate {
    pub patch_id: String,
    pub bug_id: String,
    pub tool_id: String,
    /// 1-based rank assigned by the tool.
    pub original_rank: u32,
    pub source_pairs: Vec<SourcePair>,
    /// Evaluation label. Ranking never reads it.
    pub correctness: Option<Correctness>,
}

impl PatchCandidate {
    pub fn new(
        patch_id: impl Into<String>,
        bug_id: impl Into<String>,
        tool_id: impl Into<String>,
        original_rank: u32,
        source_pairs: Vec<SourcePair>,
    ) -> PatchCandidate {
        PatchCandidate {
            patch_id: patch_id.into(),
            bug_id: bug_id.into(),
            tool_id: tool_id.into(),
            original_rank,
            source_pairs,
            correctness: None,
        }
    }

    pub fn is_correct(&self) -> bool {
        self.correctness == Some(Correctness::Correct)
    }
}

/// A candidate with its kind. Unparseable candidates carry the empty kind and
/// the reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassifiedCandidate {
    pub candidate: PatchCandidate,
    pub kind: PatchKind,
    pub diagnostic: Option<String>,
}

pub fn classify_candidate(classifier: &PatchClassifier, candidate: PatchCandidate) -> Result<ClassifiedCandidate> {
    match classifier.classify_patch(&candidate.source_pairs) {
        Ok(kind) => Ok(ClassifiedCandidate { candidate, kind, diagnostic: None }),
        Err(Error::Unparseable(why)) => {
            tracing::warn!(patch = %candidate.patch_id, "unparseable candidate: {why}");
            Ok(ClassifiedCandidate { candidate, kind: PatchKind::empty(), diagnostic: Some(why) })
        }
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedPatch<T> {
    pub candidate: PatchCandidate,
    pub kind: PatchKind,
    pub score: T,
    /// 1-based position in the new ranking.
    pub final_rank: usize,
    pub estimated_category: BugCategory,
    pub diagnostic: Option<String>,
}

fn category_score<T: Scalar>(model: &FrequencyModel, c: BugCategory, kinds: &[&PatchKind]) -> Result<T> {
    let mut sum = T::zero();
    for k in kinds {
        sum = sum + model.frequency::<T>(c, k)?;
    }
    Ok(sum)
}

/// The category whose summed frequencies over `kinds` (a multiset) is
/// largest. Ties go to the category with more training records, then to the
/// earlier category in canonical order.
pub fn estimate_category<T: Scalar>(model: &FrequencyModel, kinds: &[&PatchKind]) -> Result<BugCategory> {
    if kinds.is_empty() {
        return Err(Error::EmptyPatchSet);
    }
    let mut best: Option<(BugCategory, T)> = None;
    for c in model.nonempty_categories() {
        let s: T = category_score(model, c, kinds)?;
        let better = match &best {
            None => true,
            Some((bc, bs)) => match s.partial_cmp(bs) {
                Some(Ordering::Greater) => true,
                Some(Ordering::Equal) => model.total(c) > model.total(*bc),
                _ => false,
            },
        };
        if better {
            best = Some((c, s));
        }
    }
    best.map(|(c, _)| c).ok_or(Error::EmptyModel)
}

/// Positions of `items` in final order: descending score, then ascending
/// tie key. The sort is stable, so fully equal entries keep input order.
pub fn final_order<T: PartialOrd, K: Ord>(items: &[(T, K)]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| {
        let (sa, ka) = &items[a];
        let (sb, kb) = &items[b];
        sb.partial_cmp(sa).unwrap_or(Ordering::Equal).then_with(|| ka.cmp(kb))
    });
    order
}

/// Ranks classified candidates by descending score. Equal scores are ordered
/// by ascending tie key. The output is a permutation of the input.
pub fn rank_by_key<T: Scalar, K: Ord>(
    model: &FrequencyModel,
    items: Vec<(ClassifiedCandidate, K)>,
) -> Result<Vec<RankedPatch<T>>> {
    let kinds: Vec<&PatchKind> = items.iter().map(|(c, _)| &c.kind).collect();
    let category = estimate_category::<T>(model, &kinds)?;
    let mut keyed = Vec::with_capacity(items.len());
    let mut candidates = Vec::with_capacity(items.len());
    for (c, key) in items {
        keyed.push((model.frequency::<T>(category, &c.kind)?, key));
        candidates.push(Some(c));
    }
    let order = final_order(&keyed);
    let mut scores: Vec<Option<T>> = keyed.into_iter().map(|(s, _)| Some(s)).collect();
    Ok(order
        .into_iter()
        .enumerate()
        .map(|(i, at)| {
            let c = candidates[at].take().expect("each position is used once");
            RankedPatch {
                candidate: c.candidate,
                kind: c.kind,
                score: scores[at].take().expect("each position is used once"),
                final_rank: i + 1,
                estimated_category: category,
                diagnostic: c.diagnostic,
            }
        })
        .collect())
}

fn check_set(set: &[ClassifiedCandidate], bug: &mut Option<String>) -> Result<()> {
    let mut ranks = BTreeSet::new();
    for c in set {
        let c = &c.candidate;
        match bug {
            None => *bug = Some(c.bug_id.clone()),
            Some(b) if *b != c.bug_id => return Err(Error::MixedBugIds(b.clone(), c.bug_id.clone())),
            _ => {}
        }
        if c.original_rank == 0 || !ranks.insert((c.tool_id.clone(), c.original_rank)) {
            return Err(Error::InvalidInput(format!(
                "original rank {} of {} is zero or repeated for tool {}",
                c.original_rank, c.patch_id, c.tool_id
            )));
        }
    }
    Ok(())
}

/// Ranks already-classified candidates of one bug.
pub fn rank_classified<T: Scalar>(model: &FrequencyModel, candidates: Vec<ClassifiedCandidate>) -> Result<Vec<RankedPatch<T>>> {
    if candidates.is_empty() {
        return Err(Error::EmptyPatchSet);
    }
    check_set(&candidates, &mut None)?;
    let items = candidates
        .into_iter()
        .map(|c| {
            let rank = c.candidate.original_rank;
            (c, rank)
        })
        .collect();
    rank_by_key(model, items)
}

/// Classifies and ranks the candidates one tool produced for one bug.
pub fn rank_patches<T: Scalar>(
    model: &FrequencyModel,
    classifier: &PatchClassifier,
    candidates: Vec<PatchCandidate>,
) -> Result<Vec<RankedPatch<T>>> {
    let classified = candidates.into_iter().map(|c| classify_candidate(classifier, c)).collect::<Result<Vec<_>>>()?;
    rank_classified(model, classified)
}

/// Ranks the union of several tools' candidate lists for one bug. Ties are
/// broken by tool order as given, then by each tool's original rank.
pub fn rank_cumulative_classified<T: Scalar>(
    model: &FrequencyModel,
    sets: Vec<Vec<ClassifiedCandidate>>,
) -> Result<Vec<RankedPatch<T>>> {
    let mut bug = None;
    for s in &sets {
        check_set(s, &mut bug)?;
    }
    let items: Vec<_> = sets
        .into_iter()
        .enumerate()
        .flat_map(|(tool, set)| {
            set.into_iter().map(move |c| {
                let rank = c.candidate.original_rank;
                (c, (tool, rank))
            })
        })
        .collect();
    if items.is_empty() {
        return Err(Error::EmptyPatchSet);
    }
    rank_by_key(model, items)
}

pub fn rank_cumulative<T: Scalar>(
    model: &FrequencyModel,
    classifier: &PatchClassifier,
    sets: Vec<Vec<PatchCandidate>>,
) -> Result<Vec<RankedPatch<T>>> {
    let classified = sets
        .into_iter()
        .map(|s| s.into_iter().map(|c| classify_candidate(classifier, c)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    rank_cumulative_classified(model, classified)
}

/// `bug_id, final_rank, patch_id, score, kind, category` rows, tab separated.
pub fn ranking_tsv<T: Scalar>(ranked: &[RankedPatch<T>], catalog: &Catalog) -> Result<String> {
    let mut out = String::new();
    for r in ranked {
        writeln!(
            out,
            "{}\t{}\t{}\t{:.6}\t{}\t{}",
            r.candidate.bug_id,
            r.final_rank,
            r.candidate.patch_id,
            r.score.to_f64(),
            r.kind.signature(catalog)?,
            r.estimated_category
        )
        .expect("writing to a String");
    }
    Ok(out)
}

/// Candidate lists of one bug, grouped by tool in file order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BugManifest {
    pub bug_id: String,
    pub tools: Vec<(String, Vec<PatchCandidate>)>,
}

impl BugManifest {
    pub fn all_candidates(&self) -> impl Iterator<Item = &PatchCandidate> {
        self.tools.iter().flat_map(|(_, c)| c)
    }
}

/// Reads a per-bug manifest:
///
/// ```text
/// bug: Lang-7
/// tool: ToolA
/// p1<TAB>1<TAB>patches/p1.diff<TAB>src[<TAB>correct|plausible_incorrect]
/// tool: ToolB
/// ...
/// ```
///
/// Diff and base paths are relative to the manifest's directory. The base is
/// either a source directory against which diff paths resolve, or a single
/// file used for every file of the diff.
pub fn load_bug_manifest(path: &Path) -> Result<BugManifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_bug_manifest(&text, &dir)
}

pub fn parse_bug_manifest(text: &str, dir: &Path) -> Result<BugManifest> {
    let mut bug_id: Option<String> = None;
    let mut tools: Vec<(String, Vec<PatchCandidate>)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let bad = |message: String| Error::MalformedManifest { line: i + 1, message };
        let line = raw.trim_end();
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(b) = line.strip_prefix("bug:") {
            if bug_id.is_some() {
                return Err(bad("second `bug:` line".into()));
            }
            bug_id = Some(b.trim().to_string());
            continue;
        }
        if let Some(t) = line.strip_prefix("tool:") {
            tools.push((t.trim().to_string(), Vec::new()));
            continue;
        }
        let bug = bug_id.clone().ok_or_else(|| bad("patch line before `bug:`".into()))?;
        let (tool, list) = tools.last_mut().ok_or_else(|| bad("patch line before `tool:`".into()))?;
        let fields: Vec<&str> = line.split('\t').collect();
        if !(4..=5).contains(&fields.len()) {
            return Err(bad("expected patch_id, rank, diff path, base path and an optional label".into()));
        }
        let rank: u32 = fields[1].parse().map_err(|_| bad(format!("bad rank `{}`", fields[1])))?;
        let pairs = pairs_from_diff_file(&dir.join(fields[2]), &dir.join(fields[3]))?;
        let mut c = PatchCandidate::new(fields[0], bug, tool.clone(), rank, pairs);
        if let Some(label) = fields.get(4) {
            c.correctness = Some(label.parse()?);
        }
        list.push(c);
    }
    let bug_id = bug_id.ok_or_else(|| Error::MalformedManifest { line: 0, message: "missing `bug:` line".into() })?;
    Ok(BugManifest { bug_id, tools })
}

/// Before/after pairs of a unified diff applied to base sources.
pub fn pairs_from_diff_file(diff_path: &Path, base: &Path) -> Result<Vec<SourcePair>> {
    let text = fs::read_to_string(diff_path).map_err(|e| Error::io(diff_path, e))?;
    let diff = Diff::parse(&text)?;
    let mut sources = BTreeMap::new();
    for f in &diff.files {
        let Some(old) = &f.old_path else { continue };
        let file: PathBuf = if base.is_dir() { base.join(old) } else { base.to_path_buf() };
        let content = fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
        sources.insert(old.clone(), content);
    }
    pairs_from_diff(&diff, &sources)
}

pub fn pairs_from_diff(diff: &Diff, sources: &BTreeMap<String, String>) -> Result<Vec<SourcePair>> {
    let mut pairs = Vec::new();
    for f in diff.files.iter().filter(|f| !f.binary) {
        let before = match &f.old_path {
            Some(p) => sources.get(p).cloned().ok_or_else(|| Error::InvalidInput(format!("no base source for {p}")))?,
            None => String::new(),
        };
        let after = if f.new_path.is_some() { f.apply(&before)? } else { String::new() };
        pairs.push(SourcePair::new(f.path(), before, after));
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    fn kind(sig: &str) -> PatchKind {
        PatchKind::parse(sig, &Catalog::default()).unwrap()
    }

    fn classified(id: &str, rank: u32, sig: &str) -> ClassifiedCandidate {
        ClassifiedCandidate { candidate: PatchCandidate::new(id, "bug", "tool", rank, Vec::new()), kind: kind(sig), diagnostic: None }
    }

    fn table2_row() -> FrequencyModel {
        let mut m = FrequencyModel::new("1.0.0", "");
        let nc = kind("null_check.add");
        let other = kind("conditional.add");
        for (c, n) in [(BugCategory::Logic, 1), (BugCategory::NullPointer, 16), (BugCategory::Overflow, 3)] {
            m.add(c, nc.clone(), n);
            m.add(c, other.clone(), 100 - n);
        }
        m
    }

    #[test]
    fn null_check_estimates_null_pointer() {
        let m = table2_row();
        let k = kind("null_check.add");
        assert_eq!(estimate_category::<f64>(&m, &[&k]).unwrap(), BugCategory::NullPointer);
        assert_eq!(estimate_category::<Ratio<u64>>(&m, &[&k, &k]).unwrap(), BugCategory::NullPointer);
    }

    #[test]
    fn degenerate_ties() {
        let mut m = FrequencyModel::new("1.0.0", "");
        m.add(BugCategory::Logic, kind("return.add"), 2);
        m.add(BugCategory::Overflow, kind("return.add"), 5);
        let unseen = kind("loop.add");
        // All scores zero: the larger category wins.
        assert_eq!(estimate_category::<f64>(&m, &[&unseen]).unwrap(), BugCategory::Overflow);
        let mut m = FrequencyModel::new("1.0.0", "");
        m.add(BugCategory::Overflow, kind("return.add"), 5);
        m.add(BugCategory::Logic, kind("return.add"), 5);
        assert_eq!(estimate_category::<f64>(&m, &[&unseen]).unwrap(), BugCategory::Logic);
        assert!(matches!(estimate_category::<f64>(&m, &[]), Err(Error::EmptyPatchSet)));
        let empty = FrequencyModel::new("1.0.0", "");
        assert!(matches!(estimate_category::<f64>(&empty, &[&unseen]), Err(Error::EmptyModel)));
    }

    #[test]
    fn final_order_uses_scores_then_keys() {
        // p4, p3, p2, p1 in tool order.
        let items = [(0.5, 1), (0.7, 2), (0.3, 3), (0.5, 4)];
        assert_eq!(final_order(&items), [1, 0, 3, 2]);
    }

    #[test]
    fn worked_tie_break_example() {
        // Scores p3 = 0.7, p1 = p4 = 0.5, p2 = 0.3; the tool ranked p4, p3, p2, p1.
        let mut m = FrequencyModel::new("1.0.0", "");
        m.add(BugCategory::Logic, kind("return.add"), 7);
        m.add(BugCategory::Logic, kind("loop.add"), 5);
        m.add(BugCategory::Logic, kind("break.add"), 3);
        m.add(BugCategory::Logic, kind(""), 85);
        let set = vec![
            classified("p4", 1, "loop.add"),
            classified("p3", 2, "return.add"),
            classified("p2", 3, "break.add"),
            classified("p1", 4, "loop.add"),
        ];
        let ranked = rank_classified::<f64>(&m, set).unwrap();
        let ids: Vec<&str> = ranked.iter().map(|r| r.candidate.patch_id.as_str()).collect();
        assert_eq!(ids, ["p3", "p4", "p1", "p2"]);
        assert_eq!(ranked[0].score, 0.07);
    }

    #[test]
    fn set_validation() {
        let m = table2_row();
        assert!(matches!(rank_classified::<f64>(&m, vec![]), Err(Error::EmptyPatchSet)));
        let mut other = classified("b", 2, "");
        other.candidate.bug_id = "other".into();
        assert!(matches!(rank_classified::<f64>(&m, vec![classified("a", 1, ""), other]), Err(Error::MixedBugIds(..))));
        let dup = vec![classified("a", 1, ""), classified("b", 1, "")];
        assert!(matches!(rank_classified::<f64>(&m, dup), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn cumulative_tool_order_breaks_ties() {
        let m = table2_row();
        let mut a = classified("a1", 1, "null_check.add");
        a.candidate.tool_id = "A".into();
        let mut b = classified("b1", 1, "null_check.add");
        b.candidate.tool_id = "B".into();
        let r = rank_cumulative_classified::<f64>(&m, vec![vec![b.clone()], vec![a.clone()]]).unwrap();
        assert_eq!(r[0].candidate.patch_id, "b1");
        let r = rank_cumulative_classified::<f64>(&m, vec![vec![a], vec![b]]).unwrap();
        assert_eq!(r[0].candidate.patch_id, "a1");
    }

    #[test]
    fn manifest_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir_all(dir.path().join("src")).unwrap();
        fs::write(dir.path().join("src/A.java"), "class A {\n  void m() {\n  }\n}\n").unwrap();
        fs::write(
            dir.path().join("p1.diff"),
            "--- a/A.java\n+++ b/A.java\n@@ -2,2 +2,3 @@\n   void m() {\n+    go();\n   }\n",
        )
        .unwrap();
        let manifest = "bug: B-1\ntool: T\np1\t1\tp1.diff\tsrc\tcorrect\n";
        let m = parse_bug_manifest(manifest, dir.path()).unwrap();
        assert_eq!(m.bug_id, "B-1");
        let c = &m.tools[0].1[0];
        assert!(c.is_correct());
        assert!(c.source_pairs[0].after.contains("go();"));
        let k = PatchClassifier::default().classify_patch(&c.source_pairs).unwrap();
        assert_eq!(k.to_string(), "method_call.add");
        assert!(parse_bug_manifest("tool: T\n", dir.path()).is_err());
    }
}
