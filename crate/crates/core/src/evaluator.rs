//! Measurements over re-ranked bugs: first-correct ranks, top-k scenario
//! partitions, rank statistics and training-set robustness sweeps.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::catalog::Catalog;
use crate::category::BugCategory;
use crate::error::{Error, Result};
use crate::ranker::{rank_classified, ClassifiedCandidate, RankedPatch};
use crate::scalar::Scalar;
use crate::trainer::{stratified_sample, train, CorpusRecord};

pub const DEFAULT_KS: [usize; 4] = [1, 3, 5, 10];

/// First-correct ranks of one bug's candidates under both orders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BugOutcome {
    pub bug_id: String,
    pub tool_id: String,
    pub original_first_correct_rank: usize,
    pub reranked_first_correct_rank: usize,
    pub num_patches: usize,
    pub category: BugCategory,
}

/// Outcome of one ranked candidate list, or `None` if no candidate is
/// labelled correct. Original positions follow the tool ranks.
pub fn outcome_of<T>(ranked: &[RankedPatch<T>]) -> Option<BugOutcome> {
    let first = ranked.first()?;
    let reranked = ranked.iter().find(|r| r.candidate.is_correct())?.final_rank;
    let mut by_original: Vec<&RankedPatch<T>> = ranked.iter().collect();
    by_original.sort_by_key(|r| r.candidate.original_rank);
    let original = by_original.iter().position(|r| r.candidate.is_correct())? + 1;
    let tool_id = if ranked.iter().all(|r| r.candidate.tool_id == first.candidate.tool_id) {
        first.candidate.tool_id.clone()
    } else {
        "cumulative".to_string()
    };
    Some(BugOutcome {
        bug_id: first.candidate.bug_id.clone(),
        tool_id,
        original_first_correct_rank: original,
        reranked_first_correct_rank: reranked,
        num_patches: ranked.len(),
        category: first.estimated_category,
    })
}

/// Subject selection for evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubjectFilter {
    pub min_patches: usize,
}

impl Default for SubjectFilter {
    fn default() -> SubjectFilter {
        SubjectFilter { min_patches: 4 }
    }
}

impl SubjectFilter {
    pub fn keep(&self, o: &BugOutcome) -> bool {
        o.num_patches >= self.min_patches
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TopKPartition {
    pub k: usize,
    /// Neither order has a correct patch in the top k.
    pub n_count: usize,
    /// Both do.
    pub b_count: usize,
    /// Only the original order does.
    pub o_count: usize,
    /// Only the re-ranked order does.
    pub p_count: usize,
}

impl TopKPartition {
    pub fn total(&self) -> usize {
        self.n_count + self.b_count + self.o_count + self.p_count
    }
}

pub fn partition_topk(outcomes: &[BugOutcome], k: usize) -> Result<TopKPartition> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    let mut p = TopKPartition { k, ..TopKPartition::default() };
    for o in outcomes {
        match (o.original_first_correct_rank <= k, o.reranked_first_correct_rank <= k) {
            (false, false) => p.n_count += 1,
            (true, true) => p.b_count += 1,
            (true, false) => p.o_count += 1,
            (false, true) => p.p_count += 1,
        }
    }
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub min: usize,
    pub mean: f64,
    /// Lower middle element for even counts.
    pub median: usize,
    pub max: usize,
}

impl Stats {
    fn of(values: &mut [usize]) -> Stats {
        values.sort_unstable();
        let n = values.len();
        Stats {
            min: values[0],
            mean: values.iter().sum::<usize>() as f64 / n as f64,
            median: values[(n - 1) / 2],
            max: values[n - 1],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankStatistics {
    pub original: Stats,
    pub reranked: Stats,
}

pub fn rank_statistics(outcomes: &[BugOutcome]) -> Result<RankStatistics> {
    if outcomes.is_empty() {
        return Err(Error::EmptyOutcomes);
    }
    let mut orig: Vec<usize> = outcomes.iter().map(|o| o.original_first_correct_rank).collect();
    let mut re: Vec<usize> = outcomes.iter().map(|o| o.reranked_first_correct_rank).collect();
    Ok(RankStatistics { original: Stats::of(&mut orig), reranked: Stats::of(&mut re) })
}

/// `k, N, B, O, P, total` rows.
pub fn topk_table(outcomes: &[BugOutcome], ks: &[usize]) -> Result<String> {
    let mut out = String::from("k\tN\tB\tO\tP\ttotal\n");
    for &k in ks {
        let p = partition_topk(outcomes, k)?;
        let _ = writeln!(out, "{}\t{}\t{}\t{}\t{}\t{}", k, p.n_count, p.b_count, p.o_count, p.p_count, p.total());
    }
    Ok(out)
}

/// `ranking, min, mean, median, max` rows.
pub fn stats_table(outcomes: &[BugOutcome]) -> Result<String> {
    let s = rank_statistics(outcomes)?;
    let mut out = String::from("ranking\tmin\tmean\tmedian\tmax\n");
    for (name, st) in [("original", s.original), ("reranked", s.reranked)] {
        let _ = writeln!(out, "{name}\t{}\t{:.2}\t{}\t{}", st.min, st.mean, st.median, st.max);
    }
    Ok(out)
}

/// Per-bug rows: `bug, tool, category, patches, original, reranked`.
pub fn outcomes_table(outcomes: &[BugOutcome]) -> String {
    let mut out = String::from("bug\ttool\tcategory\tpatches\toriginal\treranked\n");
    for o in outcomes {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            o.bug_id, o.tool_id, o.category, o.num_patches, o.original_first_correct_rank, o.reranked_first_correct_rank
        );
    }
    out
}

pub fn scatter_text(outcomes: &[BugOutcome]) -> String {
    let mut out = String::from("tool\tbug\tx_original_rank\ty_reranked_rank\n");
    for o in outcomes {
        let _ = writeln!(out, "{}\t{}\t{}\t{}", o.tool_id, o.bug_id, o.original_first_correct_rank, o.reranked_first_correct_rank);
    }
    out
}

/// Writes rank-versus-rank plot data.
pub fn scatter_export(outcomes: &[BugOutcome], path: &Path) -> Result<()> {
    fs::write(path, scatter_text(outcomes)).map_err(|e| Error::io(path, e))
}

/// Per-category training sizes for one sweep step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplePlan {
    pub name: String,
    pub sizes: BTreeMap<BugCategory, usize>,
}

/// Averages over the seeds of one plan.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub plan: String,
    pub seeds: usize,
    /// Bugs whose first correct rank got worse than under the full corpus.
    pub worse: f64,
    pub same: f64,
    pub better: f64,
    /// Bugs whose first correct patch is ranked first.
    pub rank1: f64,
    pub bugs: usize,
    pub topk: Vec<(usize, [f64; 4])>,
}

impl SweepRow {
    pub fn rank1_rate(&self) -> f64 {
        if self.bugs == 0 {
            0.0
        } else {
            self.rank1 / self.bugs as f64
        }
    }
}

fn outcomes_under<T: Scalar>(records: &[CorpusRecord], catalog: &Catalog, bugs: &[Vec<ClassifiedCandidate>]) -> Result<Vec<BugOutcome>> {
    let model = train(records, catalog)?;
    let mut out = Vec::new();
    for set in bugs {
        let ranked = rank_classified::<T>(&model, set.clone())?;
        out.extend(outcome_of(&ranked));
    }
    Ok(out)
}

/// Retrains on every plan and seed, re-ranks every bug and compares each
/// bug's first correct rank with the full-corpus ranking. Bugs without a
/// correct candidate are skipped. Per-plan numbers are means over seeds.
pub fn robustness_sweep<T: Scalar>(
    corpus: &[CorpusRecord],
    catalog: &Catalog,
    plans: &[SamplePlan],
    seeds: &[u64],
    bugs: &[Vec<ClassifiedCandidate>],
) -> Result<Vec<SweepRow>> {
    if seeds.is_empty() {
        return Err(Error::EmptySeeds);
    }
    let baseline = outcomes_under::<T>(corpus, catalog, bugs)?;
    let mut rows = Vec::new();
    for plan in plans {
        let per_seed: Vec<Result<Vec<BugOutcome>>> = seeds
            .par_iter()
            .map(|&seed| {
                let sample = stratified_sample(corpus, &plan.sizes, seed)?;
                outcomes_under::<T>(&sample, catalog, bugs)
            })
            .collect();
        let mut row = SweepRow {
            plan: plan.name.clone(),
            seeds: seeds.len(),
            worse: 0.0,
            same: 0.0,
            better: 0.0,
            rank1: 0.0,
            bugs: baseline.len(),
            topk: DEFAULT_KS.iter().map(|&k| (k, [0.0; 4])).collect(),
        };
        for outcomes in per_seed {
            let outcomes = outcomes?;
            for (base, o) in baseline.iter().zip(&outcomes) {
                let (b, s) = (base.reranked_first_correct_rank, o.reranked_first_correct_rank);
                if s > b {
                    row.worse += 1.0;
                } else if s < b {
                    row.better += 1.0;
                } else {
                    row.same += 1.0;
                }
                if s == 1 {
                    row.rank1 += 1.0;
                }
            }
            for (k, acc) in &mut row.topk {
                let p = partition_topk(&outcomes, *k)?;
                for (a, v) in acc.iter_mut().zip([p.n_count, p.b_count, p.o_count, p.p_count]) {
                    *a += v as f64;
                }
            }
        }
        let n = seeds.len() as f64;
        row.worse /= n;
        row.same /= n;
        row.better /= n;
        row.rank1 /= n;
        for (_, acc) in &mut row.topk {
            for a in acc.iter_mut() {
                *a /= n;
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

/// `plan, seeds, bugs, worse, same, better, rank1` rows.
pub fn sweep_table(rows: &[SweepRow]) -> String {
    let mut out = String::from("plan\tseeds\tbugs\tworse\tsame\tbetter\trank1\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{:.2}\t{:.2}\t{:.2}\t{:.2}",
            r.plan, r.seeds, r.bugs, r.worse, r.same, r.better, r.rank1
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(orig: usize, re: usize) -> BugOutcome {
        BugOutcome {
            bug_id: format!("b{orig}-{re}"),
            tool_id: "t".into(),
            original_first_correct_rank: orig,
            reranked_first_correct_rank: re,
            num_patches: orig.max(re),
            category: BugCategory::Logic,
        }
    }

    #[test]
    fn partition_examples() {
        let p = partition_topk(&[o(7, 2)], 3).unwrap();
        assert_eq!(p.p_count, 1);
        for k in 1..10 {
            assert_eq!(partition_topk(&[o(1, 1)], k).unwrap().b_count, 1);
        }
        assert!(partition_topk(&[], 0).is_err());
    }

    #[test]
    fn statistics_examples() {
        let s = rank_statistics(&[o(5, 2)]).unwrap();
        assert_eq!((s.original.mean, s.reranked.mean), (5.0, 2.0));
        let s = rank_statistics(&[o(1, 1), o(3, 3)]).unwrap();
        assert_eq!(s.original.median, 1);
        assert!(matches!(rank_statistics(&[]), Err(Error::EmptyOutcomes)));
    }

    #[test]
    fn scatter_rows() {
        assert_eq!(scatter_text(&[]).lines().count(), 1);
        assert_eq!(scatter_text(&[o(2, 1)]).lines().count(), 2);
    }

    #[test]
    fn sweep_needs_seeds() {
        let err = robustness_sweep::<f64>(&[], &Catalog::default(), &[], &[], &[]).unwrap_err();
        assert!(matches!(err, Error::EmptySeeds));
    }
}
