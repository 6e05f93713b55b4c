//! Node matching between two syntax trees.
//!
//! Follows the classic GumTree strategy: a greedy top-down phase maps the
//! largest isomorphic subtrees, a bottom-up phase maps containers that share
//! enough matched descendants (Dice coefficient), and a recovery step aligns
//! the remaining children of every mapped pair with longest-common-subsequence
//! passes of decreasing strictness.

use std::collections::HashMap;

use crate::tree::{NodeId, Tree};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatcherConfig {
    /// Subtrees lower than this are left to the bottom-up phase.
    pub min_height: usize,
    /// Minimum Dice similarity for a bottom-up container match.
    pub min_dice: f64,
}

impl Default for MatcherConfig {
    fn default() -> Self {
        MatcherConfig { min_height: 2, min_dice: 0.5 }
    }
}

/// One-to-one partial mapping between the nodes of a source and a destination tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mapping {
    src_to_dst: Vec<Option<NodeId>>,
    dst_to_src: Vec<Option<NodeId>>,
}

impl Mapping {
    pub fn new(src_len: usize, dst_len: usize) -> Mapping {
        Mapping { src_to_dst: vec![None; src_len], dst_to_src: vec![None; dst_len] }
    }

    pub fn link(&mut self, src: NodeId, dst: NodeId) {
        debug_assert!(self.src_to_dst[src].is_none() && self.dst_to_src[dst].is_none());
        self.src_to_dst[src] = Some(dst);
        self.dst_to_src[dst] = Some(src);
    }

    pub fn dst(&self, src: NodeId) -> Option<NodeId> {
        self.src_to_dst[src]
    }

    pub fn src(&self, dst: NodeId) -> Option<NodeId> {
        self.dst_to_src[dst]
    }

    pub fn has_src(&self, src: NodeId) -> bool {
        self.src_to_dst[src].is_some()
    }

    pub fn has_dst(&self, dst: NodeId) -> bool {
        self.dst_to_src[dst].is_some()
    }

    pub fn len(&self) -> usize {
        self.src_to_dst.iter().filter(|m| m.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pairs(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.src_to_dst.iter().enumerate().filter_map(|(s, d)| d.map(|d| (s, d)))
    }
}

/// Computes a mapping between `src` and `dst`. Deterministic for fixed inputs.
pub fn match_trees(src: &Tree, dst: &Tree, config: &MatcherConfig) -> Mapping {
    let mut m = Matcher { src, dst, config, mapping: Mapping::new(src.len(), dst.len()) };
    m.top_down();
    m.bottom_up();
    m.mapping
}

struct Matcher<'a> {
    src: &'a Tree,
    dst: &'a Tree,
    config: &'a MatcherConfig,
    mapping: Mapping,
}

/// Pre-order ids make descendant checks a range test.
fn is_descendant(tree: &Tree, node: NodeId, ancestor: NodeId) -> bool {
    node > ancestor && node < ancestor + tree.size(ancestor)
}

impl Matcher<'_> {
    fn link_subtrees(&mut self, a: NodeId, b: NodeId) {
        let xs = self.src.preorder_from(a);
        let ys = self.dst.preorder_from(b);
        for (x, y) in xs.into_iter().zip(ys) {
            if !self.mapping.has_src(x) && !self.mapping.has_dst(y) {
                self.mapping.link(x, y);
            }
        }
    }

    fn top_down(&mut self) {
        let min_h = self.config.min_height;
        let mut l1: Vec<NodeId> = vec![self.src.root()];
        let mut l2: Vec<NodeId> = vec![self.dst.root()];
        let mut ambiguous: Vec<(NodeId, NodeId)> = Vec::new();

        loop {
            let h1 = l1.iter().map(|&n| self.src.height(n)).max().unwrap_or(0);
            let h2 = l2.iter().map(|&n| self.dst.height(n)).max().unwrap_or(0);
            if h1.min(h2) < min_h {
                break;
            }
            if h1 != h2 {
                if h1 > h2 {
                    open(self.src, &mut l1, h1);
                } else {
                    open(self.dst, &mut l2, h2);
                }
                continue;
            }
            let hs1: Vec<NodeId> = take_height(self.src, &mut l1, h1);
            let hs2: Vec<NodeId> = take_height(self.dst, &mut l2, h2);

            let mut by_hash2: HashMap<u64, Vec<NodeId>> = HashMap::new();
            for &t2 in &hs2 {
                by_hash2.entry(self.dst.structure_hash(t2)).or_default().push(t2);
            }
            let mut by_hash1: HashMap<u64, Vec<NodeId>> = HashMap::new();
            for &t1 in &hs1 {
                by_hash1.entry(self.src.structure_hash(t1)).or_default().push(t1);
            }
            let mut used1 = vec![false; hs1.len()];
            let mut used2: HashMap<NodeId, bool> = HashMap::new();
            for (i, &t1) in hs1.iter().enumerate() {
                let h = self.src.structure_hash(t1);
                let partners: Vec<NodeId> = by_hash2
                    .get(&h)
                    .map(|v| v.iter().copied().filter(|&t2| self.src.isomorphic(t1, self.dst, t2)).collect())
                    .unwrap_or_default();
                if partners.is_empty() {
                    continue;
                }
                let same_side =
                    by_hash1.get(&h).map(|v| v.iter().filter(|&&o| self.src.isomorphic(o, self.src, t1)).count()).unwrap_or(1);
                used1[i] = true;
                for &t2 in &partners {
                    used2.insert(t2, true);
                }
                if partners.len() == 1 && same_side == 1 {
                    self.link_subtrees(t1, partners[0]);
                } else {
                    for &t2 in &partners {
                        ambiguous.push((t1, t2));
                    }
                }
            }
            for (i, &t1) in hs1.iter().enumerate() {
                if !used1[i] {
                    l1.extend_from_slice(self.src.children(t1));
                }
            }
            for &t2 in &hs2 {
                if !used2.contains_key(&t2) {
                    l2.extend_from_slice(self.dst.children(t2));
                }
            }
        }

        // Resolve ambiguous candidates, most similar parents first.
        let mut scored: Vec<(f64, usize, NodeId, NodeId)> = ambiguous
            .into_iter()
            .map(|(a, b)| {
                let dice = match (self.src.parent(a), self.dst.parent(b)) {
                    (Some(pa), Some(pb)) => self.dice(pa, pb),
                    _ => 0.0,
                };
                let pos_gap = self
                    .src
                    .position_in_parent(a)
                    .unwrap_or(0)
                    .abs_diff(self.dst.position_in_parent(b).unwrap_or(0));
                (dice, pos_gap, a, b)
            })
            .collect();
        scored.sort_by(|x, y| {
            y.0.partial_cmp(&x.0)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(x.1.cmp(&y.1))
                .then(x.2.cmp(&y.2))
                .then(x.3.cmp(&y.3))
        });
        for (_, _, a, b) in scored {
            if !self.mapping.has_src(a) && !self.mapping.has_dst(b) {
                self.link_subtrees(a, b);
            }
        }
    }

    /// Dice coefficient over mapped descendants.
    fn dice(&self, a: NodeId, b: NodeId) -> f64 {
        let da = self.src.size(a) - 1;
        let db = self.dst.size(b) - 1;
        if da + db == 0 {
            return 0.0;
        }
        let common = (a + 1..a + self.src.size(a))
            .filter(|&d| self.mapping.dst(d).is_some_and(|m| is_descendant(self.dst, m, b)))
            .count();
        2.0 * common as f64 / (da + db) as f64
    }

    fn bottom_up(&mut self) {
        // A container whose best candidate sits under a different kind of
        // parent is decided only after everything else, so that its parent
        // gets the chance to match first and pull it along during recovery.
        // This keeps a method body matched to the method body when part of
        // it moves into a new nested block.
        let mut deferred = Vec::new();
        for t1 in self.src.postorder() {
            if t1 == self.src.root() {
                let r2 = self.dst.root();
                if !self.mapping.has_src(t1) && !self.mapping.has_dst(r2) && self.src.kind(t1) == self.dst.kind(r2) {
                    self.mapping.link(t1, r2);
                }
                if let Some(t2) = self.mapping.dst(t1) {
                    self.recover(t1, t2);
                }
                continue;
            }
            if self.mapping.has_src(t1) || self.src.children(t1).is_empty() {
                continue;
            }
            match self.best_candidate(t1) {
                Some((true, t2)) => {
                    self.mapping.link(t1, t2);
                    self.recover(t1, t2);
                }
                Some((false, _)) => deferred.push(t1),
                None => {}
            }
        }
        for t1 in deferred {
            if self.mapping.has_src(t1) {
                continue;
            }
            if let Some((_, t2)) = self.best_candidate(t1) {
                self.mapping.link(t1, t2);
                self.recover(t1, t2);
            }
        }
    }

    /// The unmatched destination container most similar to `t1`, preferring
    /// one whose parent has the same kind. The flag tells which was found.
    fn best_candidate(&self, t1: NodeId) -> Option<(bool, NodeId)> {
        let mut candidates: Vec<NodeId> = Vec::new();
        for d in t1 + 1..t1 + self.src.size(t1) {
            if let Some(m) = self.mapping.dst(d) {
                for anc in self.dst.ancestors(m) {
                    if !self.mapping.has_dst(anc) && self.dst.kind(anc) == self.src.kind(t1) && !candidates.contains(&anc) {
                        candidates.push(anc);
                    }
                }
            }
        }
        let parent_kind = |t: &Tree, n: NodeId| t.parent(n).map(|p| t.kind(p));
        let mut best: Option<(bool, f64, NodeId)> = None;
        for c in candidates {
            let sim = self.dice(t1, c);
            if sim < self.config.min_dice {
                continue;
            }
            let same_parent = parent_kind(self.src, t1) == parent_kind(self.dst, c);
            let better = match best {
                None => true,
                Some((p, s, b)) => (same_parent, sim) > (p, s) || (same_parent == p && sim == s && c < b),
            };
            if better {
                best = Some((same_parent, sim, c));
            }
        }
        best.map(|(same, _, c)| (same, c))
    }

    /// Aligns the unmatched children of a mapped pair and recurses.
    fn recover(&mut self, a: NodeId, b: NodeId) {
        let free1 = |m: &Self| -> Vec<NodeId> {
            m.src.children(a).iter().copied().filter(|&c| !m.mapping.has_src(c)).collect()
        };
        let free2 = |m: &Self| -> Vec<NodeId> {
            m.dst.children(b).iter().copied().filter(|&c| !m.mapping.has_dst(c)).collect()
        };

        // 1. isomorphic children
        let (c1, c2) = (free1(self), free2(self));
        for (x, y) in lcs(&c1, &c2, |x, y| self.src.isomorphic(x, self.dst, y)) {
            self.link_subtrees(x, y);
        }
        // 2. same kind and label
        let (c1, c2) = (free1(self), free2(self));
        let pairs = lcs(&c1, &c2, |x, y| {
            self.src.kind(x) == self.dst.kind(y) && self.src.label(x) == self.dst.label(y)
        });
        for (x, y) in pairs {
            self.mapping.link(x, y);
            self.recover(x, y);
        }
        // 3. kinds that occur once on each side
        let (c1, c2) = (free1(self), free2(self));
        for &x in &c1 {
            let k = self.src.kind(x);
            let n1 = c1.iter().filter(|&&o| self.src.kind(o) == k).count();
            let same: Vec<NodeId> = c2.iter().copied().filter(|&o| self.dst.kind(o) == k).collect();
            if n1 == 1 && same.len() == 1 {
                self.mapping.link(x, same[0]);
                self.recover(x, same[0]);
            }
        }
        // Mapped children may have unmatched grandchildren of their own.
        let mapped_children: Vec<(NodeId, NodeId)> = self
            .src
            .children(a)
            .iter()
            .filter_map(|&c| self.mapping.dst(c).filter(|&d| self.dst.parent(d) == Some(b)).map(|d| (c, d)))
            .collect();
        for (x, y) in mapped_children {
            if self.src.size(x) != self.dst.size(y) || !self.src.isomorphic(x, self.dst, y) {
                self.recover_shallow(x, y);
            }
        }
    }

    /// Like `recover` but only descends when something below is still free.
    fn recover_shallow(&mut self, a: NodeId, b: NodeId) {
        let has_free1 = self.src.children(a).iter().any(|&c| !self.mapping.has_src(c));
        let has_free2 = self.dst.children(b).iter().any(|&c| !self.mapping.has_dst(c));
        if has_free1 && has_free2 {
            self.recover(a, b);
        } else {
            let mapped: Vec<(NodeId, NodeId)> = self
                .src
                .children(a)
                .iter()
                .filter_map(|&c| self.mapping.dst(c).filter(|&d| self.dst.parent(d) == Some(b)).map(|d| (c, d)))
                .collect();
            for (x, y) in mapped {
                if !self.src.isomorphic(x, self.dst, y) {
                    self.recover_shallow(x, y);
                }
            }
        }
    }
}

fn open(tree: &Tree, list: &mut Vec<NodeId>, height: usize) {
    let mut i = 0;
    while i < list.len() {
        if tree.height(list[i]) == height {
            let n = list.remove(i);
            list.extend_from_slice(tree.children(n));
        } else {
            i += 1;
        }
    }
}

fn take_height(tree: &Tree, list: &mut Vec<NodeId>, height: usize) -> Vec<NodeId> {
    let mut taken: Vec<NodeId> = list.iter().copied().filter(|&n| tree.height(n) == height).collect();
    list.retain(|&n| tree.height(n) != height);
    taken.sort_unstable();
    taken
}

/// Longest common subsequence of two id lists under `eq`, as matched pairs.
pub(crate) fn lcs<F>(a: &[NodeId], b: &[NodeId], eq: F) -> Vec<(NodeId, NodeId)>
where
    F: Fn(NodeId, NodeId) -> bool,
{
    let (n, m) = (a.len(), b.len());
    if n == 0 || m == 0 {
        return Vec::new();
    }
    let mut table = vec![vec![0u32; m + 1]; n + 1];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            table[i][j] = if eq(a[i], b[j]) {
                table[i + 1][j + 1] + 1
            } else {
                table[i + 1][j].max(table[i][j + 1])
            };
        }
    }
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < n && j < m {
        if eq(a[i], b[j]) {
            out.push((a[i], b[j]));
            i += 1;
            j += 1;
        } else if table[i + 1][j] >= table[i][j + 1] {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_as, ParseMode};

    fn trees(a: &str, b: &str) -> (Tree, Tree) {
        (parse_as(a, ParseMode::Statements).unwrap(), parse_as(b, ParseMode::Statements).unwrap())
    }

    #[test]
    fn identical_trees_map_completely() {
        let (a, b) = trees("if (x > 1) { f(x); } return y;", "if (x > 1) { f(x); } return y;");
        let m = match_trees(&a, &b, &MatcherConfig::default());
        assert_eq!(m.len(), a.len());
        assert!(m.pairs().all(|(s, d)| s == d));
    }

    #[test]
    fn moved_statement_keeps_its_mapping() {
        let (a, b) = trees("f(a); g(b, c);", "g(b, c); f(a);");
        let m = match_trees(&a, &b, &MatcherConfig::default());
        assert_eq!(m.len(), a.len());
    }

    #[test]
    fn renamed_leaf_maps_by_position() {
        let (a, b) = trees("return x;", "return y;");
        let m = match_trees(&a, &b, &MatcherConfig::default());
        assert_eq!(m.len(), a.len());
    }

    #[test]
    fn lcs_basic() {
        let pairs = lcs(&[1, 2, 3, 4], &[2, 4, 5], |x, y| x == y);
        assert_eq!(pairs, vec![(2, 2), (4, 4)]);
    }
}
