//! Synthetic corpora and candidate sets with a known ("planted") kind
//! distribution per category.
//!
//! Every kind the generator can plant has a textual realization: a set of
//! replacements applied to a fixed Java class of about a hundred lines. The
//! resulting triples and candidates go through the same diff, message and
//! patch classification as mined data.

use std::collections::BTreeMap;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use similar::TextDiff;

use crate::bugclass::PatternSet;
use crate::category::BugCategory;
use crate::corpus::{CommitTriple, TripleRecord};
use crate::error::{Error, Result};
use crate::patchclass::SourcePair;
use crate::ranker::{Correctness, PatchCandidate};
use crate::unidiff::Diff;

/// Category sizes of the reference corpus (logic, null pointer, overflow).
pub const REFERENCE_SPLIT: [(BugCategory, usize); 3] =
    [(BugCategory::Logic, 1093), (BugCategory::NullPointer, 5161), (BugCategory::Overflow, 329)];

const TEMPLATE: &str = r#"package synth.w@ID@;

import java.util.List;
import java.util.Map;

public class Worker@ID@ {
    private static final int LIMIT = @LIMIT@;
    private String[] items = new String[LIMIT];
    private int count;
    private int limit = LIMIT;
    private Map<String, Integer> index;
    private final Object lock = new Object();

    public Worker@ID@(int limit) {
        this.limit = limit;
    }

    public int size() {
        return count;
    }

    public boolean isEmpty() {
        return count == 0;
    }

    public void add(String item) {
        if (count >= items.length) {
            throw new IllegalStateException("full");
        }
        items[count] = item;
        count++;
    }

    public String get(int i) {
        return items[i];
    }

    public int total() {
        int sum = 0;
        for (int i = 0; i < count; i++) {
            sum += items[i].length();
        }
        return sum;
    }

    public String longest() {
        String best = null;
        for (String s : items) {
            if (best == null || s.length() > best.length()) {
                best = s;
            }
        }
        return best;
    }

    public int process(String key, int value) {
        int result = value;
        if (result > limit) {
            log(key);
        }
        while (count > 0 && result > 0) {
            result = scale(result);
            count--;
        }
        try {
            result = result + key.length();
        } catch (RuntimeException e) {
            log("failed");
        }
        return result;
    }

    public void clear() {
        synchronized (lock) {
            for (int i = 0; i < count; i++) {
                items[i] = null;
            }
            count = 0;
        }
    }

    public int find(String key) {
        for (int i = 0; i < count; i++) {
            if (items[i].equals(key)) {
                return i;
            }
        }
        return -1;
    }

    private void log(String message) {
        System.out.println(message);
    }

    private int scale(int v) {
        return v * @FACTOR@ / 2;
    }

    public String describe() {
        StringBuilder sb = new StringBuilder();
        sb.append("Worker@ID@[");
        sb.append(count);
        sb.append("]");
        return sb.toString();
    }
}
"#;

const TRY_BLOCK: &str = "        try {
            result = result + key.length();
        } catch (RuntimeException e) {
            log(\"failed\");
        }
";

const IF_TAIL: &str = "            log(key);
        }
        while";

/// Kind signature and the replacements that realize it on the template.
pub const REALIZATIONS: &[(&str, &[(&str, &str)])] = &[
    ("null_check.add", &[("        int result = value;\n", "        if (key == null) {\n            return 0;\n        }\n        int result = value;\n")]),
    ("conditional.modify.condition_strengthen", &[("if (result > limit) {", "if (result > limit && key != null) {")]),
    ("loop.modify.condition_other", &[("while (count > 0 && result > 0)", "while (count > 0 && result >= 0)")]),
    ("method_call.add", &[("        int result = value;\n", "        int result = value;\n        log(key);\n")]),
    ("method_call.modify.call_arguments", &[("result = scale(result);", "result = scale(result + 1);")]),
    ("assignment.modify.expression", &[("result = scale(result);", "result = scale(result) - 1;")]),
    ("return.modify.returned_value", &[("return result;", "return result + count;")]),
    ("conditional.add", &[("        int result = value;\n", "        int result = value;\n        if (value < 0) {\n            log(\"negative\");\n        }\n")]),
    ("local_variable.add", &[("        int result = value;\n", "        int result = value;\n        int offset = key.length();\n")]),
    ("field_declaration.add.initialization", &[("    private int count;\n", "    private int count = 0;\n")]),
    ("method_call.modify.callee", &[("            log(key);\n", "            warn(key);\n")]),
    ("throw.add", &[(IF_TAIL, "            log(key);\n            throw new IllegalStateException(key);\n        }\n        while")]),
    ("else_branch.add", &[(IF_TAIL, "            log(key);\n        } else {\n            log(\"ok\");\n        }\n        while")]),
    (
        "try_catch.add.catch_clause",
        &[("        } catch (RuntimeException e) {\n", "        } catch (IllegalStateException e) {\n            log(\"state\");\n        } catch (RuntimeException e) {\n")],
    ),
    (
        "block_scope.modify+conditional.add",
        &[(
            TRY_BLOCK,
            "        if (value != 0) {
            try {
                result = result + key.length();
            } catch (RuntimeException e) {
                log(\"failed\");
            }
        }
",
        )],
    ),
];

/// Randomized surface details of one generated class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Variant {
    pub id: u32,
    pub limit: u32,
    pub factor: u32,
}

impl Variant {
    pub fn random(rng: &mut impl Rng) -> Variant {
        Variant { id: rng.gen_range(1..100_000), limit: rng.gen_range(8..4096), factor: rng.gen_range(2..9) }
    }

    pub fn file_path(&self) -> String {
        format!("src/main/java/synth/w{0}/Worker{0}.java", self.id)
    }

    pub fn source(&self) -> String {
        TEMPLATE
            .replace("@ID@", &self.id.to_string())
            .replace("@LIMIT@", &self.limit.to_string())
            .replace("@FACTOR@", &self.factor.to_string())
    }
}

/// Before/after sources whose patch has kind `signature`.
pub fn realize(signature: &str, variant: Variant) -> Result<SourcePair> {
    let (_, edits) = REALIZATIONS
        .iter()
        .find(|(s, _)| *s == signature)
        .ok_or_else(|| Error::InvalidInput(format!("no realization for kind `{signature}`")))?;
    let before = variant.source();
    let mut after = before.clone();
    for (from, to) in edits.iter() {
        debug_assert_eq!(after.matches(from).count(), 1, "{signature}: anchor {from:?}");
        after = after.replacen(from, to, 1);
    }
    Ok(SourcePair::new(variant.file_path(), before, after))
}

const MESSAGES: [(BugCategory, &[&str]); 3] = [
    (
        BugCategory::Logic,
        &["Fix wrong result in Worker@ID@.process", "Correct condition in process", "Fix logic error in scale handling", "fix incorrect output of process for negative values"],
    ),
    (
        BugCategory::NullPointer,
        &["Fix NullPointerException in Worker@ID@.process", "Avoid NPE when key is missing", "fix null pointer dereference in process"],
    ),
    (
        BugCategory::Overflow,
        &["Fix ArrayIndexOutOfBoundsException in Worker@ID@", "prevent integer overflow in scale", "fix index out of bounds in process loop"],
    ),
];

pub fn message_for(category: BugCategory, variant: Variant, rng: &mut impl Rng) -> String {
    let (_, templates) = MESSAGES.iter().find(|(c, _)| *c == category).expect("every category has messages");
    templates.choose(rng).expect("non-empty").replace("@ID@", &variant.id.to_string())
}

/// Per-category kind distribution: one dominant kind per category, a small
/// share of every other category's dominant kind, and the rest spread evenly
/// over category-neutral background kinds.
#[derive(Debug, Clone, PartialEq)]
pub struct Plant {
    pub dominant: BTreeMap<BugCategory, &'static str>,
    pub dominant_share: f64,
    pub cross_share: f64,
    pub background: Vec<&'static str>,
}

impl Plant {
    pub fn standard() -> Plant {
        Plant {
            dominant: BTreeMap::from([
                (BugCategory::Logic, "conditional.modify.condition_strengthen"),
                (BugCategory::NullPointer, "null_check.add"),
                (BugCategory::Overflow, "loop.modify.condition_other"),
            ]),
            dominant_share: 0.30,
            cross_share: 0.02,
            background: REALIZATIONS
                .iter()
                .map(|(s, _)| *s)
                .filter(|s| !matches!(*s, "null_check.add" | "conditional.modify.condition_strengthen" | "loop.modify.condition_other"))
                .collect(),
        }
    }

    pub fn with_dominant_share(mut self, share: f64) -> Plant {
        self.dominant_share = share;
        self
    }

    /// `(signature, probability)` for category `c`; probabilities sum to 1.
    pub fn distribution(&self, c: BugCategory) -> Vec<(&'static str, f64)> {
        let mut out = Vec::new();
        let mut rest = 1.0;
        for (&other, &sig) in &self.dominant {
            let p = if other == c { self.dominant_share } else { self.cross_share };
            out.push((sig, p));
            rest -= p;
        }
        let each = rest / self.background.len() as f64;
        out.extend(self.background.iter().map(|&s| (s, each)));
        out
    }
}

/// Category sizes for an `n`-triple corpus in the reference proportions,
/// rounded by largest remainder.
pub fn category_counts(n: usize) -> BTreeMap<BugCategory, usize> {
    let total: usize = REFERENCE_SPLIT.iter().map(|(_, k)| k).sum();
    let mut counts = BTreeMap::new();
    let mut rem = Vec::new();
    for (c, k) in REFERENCE_SPLIT {
        let exact = n as f64 * k as f64 / total as f64;
        counts.insert(c, exact.floor() as usize);
        rem.push((exact - exact.floor(), c));
    }
    rem.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let missing = n - counts.values().sum::<usize>();
    for (_, c) in rem.into_iter().take(missing) {
        *counts.get_mut(&c).expect("category present") += 1;
    }
    counts
}

fn hex_id(rng: &mut impl Rng) -> String {
    (0..20).map(|_| format!("{:02x}", rng.gen::<u8>())).collect()
}

/// A generated triple and the kind that was planted in it.
#[derive(Debug, Clone)]
pub struct PlantedTriple {
    pub record: TripleRecord,
    pub planted: &'static str,
}

/// An `n`-triple corpus with categories in the reference proportions and
/// kinds drawn from `plant`. Categories come from classifying the generated
/// messages; records carry no verdicts.
pub fn generate_corpus(n: usize, plant: &Plant, seed: u64) -> Result<Vec<PlantedTriple>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let patterns = PatternSet::default();
    let mut categories: Vec<BugCategory> =
        category_counts(n).into_iter().flat_map(|(c, k)| std::iter::repeat_n(c, k)).collect();
    categories.shuffle(&mut rng);
    let mut out = Vec::with_capacity(n);
    for (seq, c) in categories.into_iter().enumerate() {
        let dist = plant.distribution(c);
        let pick = WeightedIndex::new(dist.iter().map(|(_, p)| *p)).map_err(|e| Error::InvalidInput(e.to_string()))?;
        let planted = dist[pick.sample(&mut rng)].0;
        let variant = Variant::random(&mut rng);
        let pair = realize(planted, variant)?;
        let diff_text = TextDiff::from_lines(&pair.before, &pair.after)
            .unified_diff()
            .context_radius(3)
            .header(&format!("a/{}", pair.file_path), &format!("b/{}", pair.file_path))
            .to_string();
        let message = message_for(c, variant, &mut rng);
        let category = patterns.classify(&message).map(|m| m.category);
        let post = hex_id(&mut rng);
        let triple = CommitTriple {
            repo_id: "synthetic".into(),
            pre_commit: hex_id(&mut rng),
            post_commit: post.clone(),
            message,
            diff: Diff::parse(&diff_text)?,
            buggy_source: BTreeMap::from([(pair.file_path.clone(), pair.before)]),
        };
        let id = format!("synthetic-{:06}-{}", seq + 1, &post[..10]);
        out.push(PlantedTriple { record: TripleRecord::new(id, triple, category), planted });
    }
    Ok(out)
}

/// `size` candidates for one bug: exactly one of kind `correct` (labelled
/// correct, at a random original rank) and the rest drawn from `others`.
/// Each candidate comes with the signature planted in it.
pub fn candidate_set<'a>(
    bug_id: &str,
    correct: &'a str,
    others: &[&'a str],
    size: usize,
    rng: &mut impl Rng,
) -> Result<Vec<(PatchCandidate, &'a str)>> {
    if size == 0 || others.is_empty() {
        return Err(Error::InvalidInput("candidate set needs a size and background kinds".into()));
    }
    let correct_at = rng.gen_range(0..size);
    let variant = Variant::random(rng);
    (0..size)
        .map(|i| {
            let (sig, label) = if i == correct_at {
                (correct, Correctness::Correct)
            } else {
                (*others.choose(rng).expect("non-empty"), Correctness::PlausibleIncorrect)
            };
            let mut c = PatchCandidate::new(format!("{bug_id}-p{}", i + 1), bug_id, "synthetic-tool", i as u32 + 1, vec![realize(sig, variant)?]);
            c.correctness = Some(label);
            Ok((c, sig))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patchclass::PatchClassifier;

    #[test]
    fn template_size() {
        let lines = Variant { id: 1, limit: 10, factor: 3 }.source().lines().count();
        assert!((90..=120).contains(&lines), "{lines}");
    }

    #[test]
    fn realizations_have_their_kind() {
        let classifier = PatchClassifier::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (sig, _) in REALIZATIONS {
            let pair = realize(sig, Variant::random(&mut rng)).unwrap();
            assert_eq!(classifier.classify_patch(&[pair]).unwrap().to_string(), *sig);
        }
    }

    #[test]
    fn messages_classify_to_their_category() {
        let patterns = PatternSet::default();
        let v = Variant { id: 7, limit: 1, factor: 2 };
        for (c, templates) in MESSAGES {
            for t in templates {
                let m = t.replace("@ID@", &v.id.to_string());
                assert_eq!(patterns.classify(&m).map(|x| x.category), Some(c), "{m}");
            }
        }
    }

    #[test]
    fn distributions_sum_to_one() {
        let p = Plant::standard();
        for c in BugCategory::ALL {
            let s: f64 = p.distribution(c).iter().map(|(_, p)| p).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
        assert_eq!(p.background.len(), 12);
    }

    #[test]
    fn reference_proportions() {
        assert_eq!(category_counts(6583).values().copied().collect::<Vec<_>>(), [1093, 5161, 329]);
        assert_eq!(category_counts(5000).values().sum::<usize>(), 5000);
    }

    #[test]
    fn generated_diffs_apply() {
        let corpus = generate_corpus(30, &Plant::standard(), 1).unwrap();
        for t in &corpus {
            let pairs = t.record.triple.source_pairs(&Default::default()).unwrap();
            assert_eq!(pairs.len(), 1);
            assert_ne!(pairs[0].before, pairs[0].after);
        }
    }
}
