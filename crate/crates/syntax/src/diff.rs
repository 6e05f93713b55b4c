//! Edit script generation from a tree mapping (Chawathe et al. algorithm,
//! as used by GumTree).

use std::collections::VecDeque;
use std::fmt;

use crate::matcher::{lcs, match_trees, Mapping, MatcherConfig};
use crate::parser::{parse_as, ParseMode};
use crate::tree::{NodeId, NodeKind, Tree, WorkingTree};
use crate::{ParseError, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Insert,
    Delete,
    Update,
    Move,
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Action::Insert => "insert",
            Action::Delete => "delete",
            Action::Update => "update",
            Action::Move => "move",
        })
    }
}

/// One edit action.
///
/// `before_node` / `after_node` index into the script's before and after
/// trees; inserts have no before node and deletes no after node. The
/// `work_*` fields address the replay tree and are what [`EditScript::replay`]
/// consumes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edit {
    pub action: Action,
    pub node_kind: NodeKind,
    pub before_span: Option<Span>,
    pub after_span: Option<Span>,
    pub before_node: Option<NodeId>,
    pub after_node: Option<NodeId>,
    pub label: String,
    pub work_node: NodeId,
    pub work_parent: Option<NodeId>,
    pub position: usize,
}

impl fmt::Display for Edit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.action, self.node_kind)?;
        if !self.label.is_empty() {
            write!(f, " {:?}", self.label)?;
        }
        Ok(())
    }
}

/// The edits turning `before` into `after`, together with both trees and the
/// node mapping they were derived from.
#[derive(Debug, Clone)]
pub struct EditScript {
    pub before: Tree,
    pub after: Tree,
    pub mapping: Mapping,
    pub edits: Vec<Edit>,
}

impl EditScript {
    pub fn is_empty(&self) -> bool {
        self.edits.is_empty()
    }

    pub fn len(&self) -> usize {
        self.edits.len()
    }

    /// True when `after_node` has no counterpart in the before tree.
    pub fn is_inserted(&self, after_node: NodeId) -> bool {
        !self.mapping.has_dst(after_node)
    }

    /// True when `before_node` has no counterpart in the after tree.
    pub fn is_deleted(&self, before_node: NodeId) -> bool {
        !self.mapping.has_src(before_node)
    }

    /// Applies the edits to a copy of the before tree.
    pub fn replay(&self) -> Tree {
        let mut work = WorkingTree::from_tree(&self.before);
        for e in &self.edits {
            match e.action {
                Action::Insert => {
                    let id = work.add_node(e.node_kind, &e.label);
                    debug_assert_eq!(id, e.work_node);
                    work.attach(id, e.work_parent.expect("insert has a parent"), e.position);
                }
                Action::Update => work.nodes[e.work_node].label = e.label.clone(),
                Action::Move => work.attach(e.work_node, e.work_parent.expect("move has a parent"), e.position),
                Action::Delete => work.detach(e.work_node),
            }
        }
        work.freeze()
    }

    /// Checks that replaying the script reproduces the after tree.
    pub fn verify(&self) -> bool {
        let replayed = self.replay();
        replayed.isomorphic(replayed.root(), &self.after, self.after.root())
    }
}

/// Differences two trees with the default matcher settings.
pub fn diff(before: Tree, after: Tree) -> EditScript {
    diff_with(before, after, &MatcherConfig::default())
}

pub fn diff_with(before: Tree, after: Tree, config: &MatcherConfig) -> EditScript {
    let mapping = match_trees(&before, &after, config);
    let edits = Generator::new(&before, &after, &mapping).run();
    EditScript { before, after, mapping, edits }
}

/// Parses both sides with the first [`ParseMode`] that accepts both, then diffs.
pub fn diff_sources(before: &str, after: &str) -> Result<EditScript, ParseError> {
    let mut first_err = None;
    for mode in ParseMode::FALLBACK_ORDER {
        let a = parse_as(before, mode);
        let b = parse_as(after, mode);
        match (a, b) {
            (Ok(a), Ok(b)) => return Ok(diff(a, b)),
            (Err(e), _) | (_, Err(e)) => {
                first_err.get_or_insert(e);
            }
        }
    }
    Err(first_err.expect("at least one mode was tried"))
}

struct Generator<'a> {
    src: &'a Tree,
    dst: &'a Tree,
    work: WorkingTree,
    // work id <-> dst id
    w2d: Vec<Option<NodeId>>,
    d2w: Vec<Option<NodeId>>,
    work_in_order: Vec<bool>,
    dst_in_order: Vec<bool>,
    edits: Vec<Edit>,
}

impl<'a> Generator<'a> {
    fn new(src: &'a Tree, dst: &'a Tree, mapping: &Mapping) -> Self {
        let mut w2d = vec![None; src.len()];
        let mut d2w = vec![None; dst.len()];
        for (s, d) in mapping.pairs() {
            w2d[s] = Some(d);
            d2w[d] = Some(s);
        }
        Generator {
            src,
            dst,
            work: WorkingTree::from_tree(src),
            w2d,
            d2w,
            work_in_order: vec![false; src.len()],
            dst_in_order: vec![false; dst.len()],
            edits: Vec::new(),
        }
    }

    fn src_id(&self, w: NodeId) -> Option<NodeId> {
        (w < self.src.len()).then_some(w)
    }

    fn run(mut self) -> Vec<Edit> {
        let droot = self.dst.root();
        let wroot = self.work.root;
        if self.d2w[droot].is_none() {
            // Roots always correspond; parse modes guarantee equal root kinds.
            if let Some(old) = self.w2d[wroot] {
                self.d2w[old] = None;
            }
            self.w2d[wroot] = Some(droot);
            self.d2w[droot] = Some(wroot);
        }

        let mut queue: VecDeque<NodeId> = VecDeque::from([droot]);
        while let Some(x) = queue.pop_front() {
            queue.extend(self.dst.children(x).iter().copied());
            let w = if x == droot {
                let w = wroot;
                self.update_label(w, x);
                w
            } else {
                let y = self.dst.parent(x).expect("non-root has a parent");
                let z = self.d2w[y].expect("parents are processed first");
                match self.d2w[x] {
                    None => {
                        let k = self.find_pos(x);
                        let dn = self.dst.node(x);
                        let w = self.work.add_node(dn.kind, &dn.label);
                        self.w2d.push(Some(x));
                        self.work_in_order.push(false);
                        self.d2w[x] = Some(w);
                        self.work.attach(w, z, k);
                        self.edits.push(Edit {
                            action: Action::Insert,
                            node_kind: dn.kind,
                            before_span: None,
                            after_span: Some(dn.span),
                            before_node: None,
                            after_node: Some(x),
                            label: dn.label.clone(),
                            work_node: w,
                            work_parent: Some(z),
                            position: k,
                        });
                        w
                    }
                    Some(w) => {
                        self.update_label(w, x);
                        let v = self.work.nodes[w].parent;
                        if v != Some(z) {
                            self.work.detach(w);
                            let k = self.find_pos(x);
                            self.work.attach(w, z, k);
                            self.push_move(w, x, z, k);
                        }
                        w
                    }
                }
            };
            self.work_in_order[w] = true;
            self.dst_in_order[x] = true;
            self.align_children(w, x);
        }

        // Deletions, children before parents.
        let order = self.src.postorder();
        for w in order {
            if self.w2d[w].is_none() {
                let node = self.src.node(w);
                self.edits.push(Edit {
                    action: Action::Delete,
                    node_kind: node.kind,
                    before_span: Some(node.span),
                    after_span: None,
                    before_node: Some(w),
                    after_node: None,
                    label: node.label.clone(),
                    work_node: w,
                    work_parent: None,
                    position: 0,
                });
                self.work.detach(w);
            }
        }
        self.edits
    }

    fn update_label(&mut self, w: NodeId, x: NodeId) {
        let new_label = self.dst.label(x);
        if self.work.nodes[w].label != new_label {
            self.work.nodes[w].label = new_label.to_string();
            let s = self.src_id(w);
            self.edits.push(Edit {
                action: Action::Update,
                node_kind: self.dst.kind(x),
                before_span: s.map(|s| self.src.node(s).span),
                after_span: Some(self.dst.node(x).span),
                before_node: s,
                after_node: Some(x),
                label: new_label.to_string(),
                work_node: w,
                work_parent: None,
                position: 0,
            });
        }
    }

    fn push_move(&mut self, w: NodeId, x: NodeId, parent: NodeId, k: usize) {
        let s = self.src_id(w);
        self.edits.push(Edit {
            action: Action::Move,
            node_kind: self.dst.kind(x),
            before_span: s.map(|s| self.src.node(s).span),
            after_span: Some(self.dst.node(x).span),
            before_node: s,
            after_node: Some(x),
            label: String::new(),
            work_node: w,
            work_parent: Some(parent),
            position: k,
        });
    }

    fn align_children(&mut self, w: NodeId, x: NodeId) {
        let wc: Vec<NodeId> = self.work.nodes[w].children.clone();
        let xc: Vec<NodeId> = self.dst.children(x).to_vec();
        for &c in &wc {
            self.work_in_order[c] = false;
        }
        for &c in &xc {
            self.dst_in_order[c] = false;
        }
        let s1: Vec<NodeId> = wc.iter().copied().filter(|&a| self.w2d[a].is_some_and(|d| xc.contains(&d))).collect();
        let s2: Vec<NodeId> = xc.iter().copied().filter(|&b| self.d2w[b].is_some_and(|a| wc.contains(&a))).collect();
        let common = lcs(&s1, &s2, |a, b| self.w2d[a] == Some(b));
        for &(a, b) in &common {
            self.work_in_order[a] = true;
            self.dst_in_order[b] = true;
        }
        for &b in &s2 {
            let a = self.d2w[b].expect("filtered to mapped");
            if !common.contains(&(a, b)) {
                // Positions are relative to the sibling list without `a`.
                self.work.detach(a);
                let k = self.find_pos(b);
                self.work.attach(a, w, k);
                self.push_move(a, b, w, k);
                self.work_in_order[a] = true;
                self.dst_in_order[b] = true;
            }
        }
    }

    /// Insertion index in the working tree for dst node `x`.
    fn find_pos(&self, x: NodeId) -> usize {
        let y = self.dst.parent(x).expect("non-root");
        let siblings = self.dst.children(y);
        let xpos = siblings.iter().position(|&c| c == x).expect("child of its parent");
        let v = siblings[..xpos].iter().rev().find(|&&c| self.dst_in_order[c]);
        let Some(&v) = v else { return 0 };
        let u = self.d2w[v].expect("in-order nodes are mapped");
        let up = self.work.nodes[u].parent.expect("mapped non-root has a parent");
        let upos = self.work.nodes[up].children.iter().position(|&c| c == u).expect("child of its parent");
        upos + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn script(a: &str, b: &str) -> EditScript {
        diff_sources(a, b).unwrap()
    }

    fn summary(s: &EditScript) -> Vec<String> {
        s.edits.iter().map(|e| e.to_string()).collect()
    }

    #[test]
    fn no_change_no_edits() {
        let s = script("int x = 1; f(x);", "int x = 1; f(x);");
        assert!(s.is_empty());
        assert!(s.verify());
    }

    #[test]
    fn update_of_renamed_variable() {
        let s = script("return x;", "return y;");
        assert_eq!(summary(&s), vec!["update Name \"y\""]);
        assert!(s.verify());
    }

    #[test]
    fn insert_statement() {
        let s = script("a(); c();", "a(); b(); c();");
        assert!(s.edits.iter().all(|e| e.action == Action::Insert));
        assert_eq!(s.edits[0].node_kind, NodeKind::ExprStmt);
        assert!(s.verify());
    }

    #[test]
    fn delete_statement() {
        let s = script("a(); b(); c();", "a(); c();");
        assert!(s.edits.iter().all(|e| e.action == Action::Delete));
        assert!(s.verify());
    }

    #[test]
    fn swap_is_a_move() {
        let s = script("first(1); second(2);", "second(2); first(1);");
        assert_eq!(s.edits.len(), 1);
        assert_eq!(s.edits[0].action, Action::Move);
        assert!(s.verify());
    }

    #[test]
    fn guard_strengthening_moves_old_condition() {
        let s = script(
            "if (buffered.getBuffer().length > 65536) { reset(); }",
            "if (buffered.getBuffer() != null && buffered.getBuffer().length > 65536) { reset(); }",
        );
        assert!(s.verify());
        let moved: Vec<_> = s.edits.iter().filter(|e| e.action == Action::Move).collect();
        assert_eq!(moved.len(), 1);
        assert_eq!(moved[0].node_kind, NodeKind::Binary);
        assert!(s.edits.iter().any(|e| e.action == Action::Insert && e.label == "&&"));
        assert!(!s.edits.iter().any(|e| e.action == Action::Delete));
    }

    #[test]
    fn wrapping_in_new_if_moves_statement() {
        let s = script("foo(); bar();", "if (ok) { foo(); } bar();");
        assert!(s.verify());
        assert!(s.edits.iter().any(|e| e.action == Action::Move && e.node_kind == NodeKind::ExprStmt));
    }

    #[test]
    fn whole_classes_round_trip() {
        let a = "class A { int f; void m(int x) { if (x > 0) { f = x; } else { f = -x; } } }";
        let b = "class A { int f = 0; void m(int x, int y) { try { f = x + y; } catch (Exception e) { } } int g() { return f; } }";
        let s = script(a, b);
        assert!(s.verify());
        let back = script(b, a);
        assert!(back.verify());
    }
}
