//! Patch kinds from tree differences.
//!
//! Each touched file is parsed before and after the change and diffed. The
//! edit script is then read at the level of constructs:
//!
//! * an inserted (deleted) subtree whose parent survives is reported as the
//!   `add` (`remove`) of the construct at its root, if that construct has a
//!   catalog feature. Inner nodes of the subtree are not reported.
//! * other edits are attributed to the nearest enclosing construct part,
//!   found by climbing from the edited node up to the enclosing statement
//!   (a call's arguments, an if's condition, an assignment's target, ...).
//! * moved statements become `block_scope.modify` when they enter or leave a
//!   new container, `synchronized_block.modify.block` when they cross a
//!   synchronized body, nothing when only braces changed, and remove + add of
//!   the construct otherwise.

use std::collections::{BTreeMap, BTreeSet};

use fixrank_syntax::{diff_sources, parse_as, Action, EditScript, NodeId, NodeKind, ParseMode, Tree};

use crate::catalog::{Catalog, Feature, FeatureModification, Modification, Qualifier};
use crate::error::{Error, Result};
use crate::kind::PatchKind;

/// The object language all fixtures and the bundled grammar target.
pub const DEFAULT_LANGUAGE: &str = "java";

/// Before and after text of one touched file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourcePair {
    pub file_path: String,
    pub language: String,
    pub before: String,
    pub after: String,
}

impl SourcePair {
    pub fn new(file_path: impl Into<String>, before: impl Into<String>, after: impl Into<String>) -> SourcePair {
        SourcePair {
            file_path: file_path.into(),
            language: DEFAULT_LANGUAGE.to_string(),
            before: before.into(),
            after: after.into(),
        }
    }
}

/// Effect of a boolean condition edit on the set of accepted states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionChange {
    Strengthen,
    Weaken,
    Other,
}

impl ConditionChange {
    fn condition(self) -> Qualifier {
        match self {
            ConditionChange::Strengthen => Qualifier::ConditionStrengthen,
            ConditionChange::Weaken => Qualifier::ConditionWeaken,
            ConditionChange::Other => Qualifier::ConditionOther,
        }
    }

    fn predicate(self) -> Qualifier {
        match self {
            ConditionChange::Strengthen => Qualifier::PredicateStrengthen,
            ConditionChange::Weaken => Qualifier::PredicateWeaken,
            ConditionChange::Other => Qualifier::PredicateOther,
        }
    }
}

/// Compares two boolean expressions by their top-level `&&` / `||` operands.
///
/// More conjuncts or fewer disjuncts strengthen; fewer conjuncts or more
/// disjuncts weaken. Operands compare structurally and order-insensitively.
pub fn analyze_condition_change(before: &Tree, b: NodeId, after: &Tree, a: NodeId) -> ConditionChange {
    let (b, a) = (strip_parens(before, b), strip_parens(after, a));
    let conj_b = operands(before, b, "&&");
    let conj_a = operands(after, a, "&&");
    let disj_b = operands(before, b, "||");
    let disj_a = operands(after, a, "||");
    if strict_superset(&conj_a, &conj_b) || strict_superset(&disj_b, &disj_a) {
        ConditionChange::Strengthen
    } else if strict_superset(&conj_b, &conj_a) || strict_superset(&disj_a, &disj_b) {
        ConditionChange::Weaken
    } else {
        ConditionChange::Other
    }
}

/// [`analyze_condition_change`] on expression source text.
pub fn analyze_condition_sources(before: &str, after: &str) -> Result<ConditionChange> {
    let parse = |s: &str| parse_as(s, ParseMode::Expression).map_err(|e| Error::Unparseable(e.to_string()));
    let (b, a) = (parse(before)?, parse(after)?);
    Ok(analyze_condition_change(&b, b.root(), &a, a.root()))
}

fn strip_parens(t: &Tree, mut n: NodeId) -> NodeId {
    while t.kind(n) == NodeKind::Parens {
        match t.children(n).first() {
            Some(&c) => n = c,
            None => break,
        }
    }
    n
}

fn operands(t: &Tree, n: NodeId, op: &str) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    let mut stack = vec![n];
    while let Some(x) = stack.pop() {
        let x = strip_parens(t, x);
        if t.kind(x) == NodeKind::Binary && t.label(x) == op {
            stack.extend(t.children(x).iter().rev());
        } else {
            *out.entry(canonical(t, x)).or_insert(0) += 1;
        }
    }
    out
}

fn canonical(t: &Tree, n: NodeId) -> String {
    let n = strip_parens(t, n);
    let mut s = format!("({} {:?}", t.kind(n), t.label(n));
    for &c in t.children(n) {
        s.push(' ');
        s.push_str(&canonical(t, c));
    }
    s.push(')');
    s
}

fn strict_superset(big: &BTreeMap<String, usize>, small: &BTreeMap<String, usize>) -> bool {
    let total = |m: &BTreeMap<String, usize>| m.values().sum::<usize>();
    total(big) > total(small) && small.iter().all(|(k, n)| big.get(k).is_some_and(|m| m >= n))
}

fn first_child(t: &Tree, n: NodeId) -> Option<NodeId> {
    t.children(n).first().copied()
}

fn is_null_comparison(t: &Tree, n: NodeId) -> bool {
    t.kind(n) == NodeKind::Binary
        && matches!(t.label(n), "==" | "!=")
        && t.children(n).iter().any(|&c| t.kind(c) == NodeKind::Literal && t.label(c) == "null")
}

fn contains_null_comparison(t: &Tree, n: NodeId) -> bool {
    t.preorder_from(n).into_iter().any(|x| is_null_comparison(t, x))
}

/// A `Block` that only serves as the body of an enclosing construct, so that
/// adding or dropping its braces changes nothing.
fn is_body_block(t: &Tree, n: NodeId) -> bool {
    use NodeKind::*;
    t.kind(n) == Block
        && t.parent(n)
            .is_some_and(|p| matches!(t.kind(p), Then | Else | While | Do | For | ForEach | Labeled))
}

/// A `Block` that is not a block-scope construct of its own: a body of a
/// loop, branch, method, try, and so on. New or removed ones are looked
/// through when locating the roots of changed subtrees.
fn is_transparent_block(t: &Tree, n: NodeId) -> bool {
    use NodeKind::*;
    t.kind(n) == Block && !t.parent(n).is_some_and(|p| matches!(t.kind(p), Block | Fragment | SwitchCase))
}

/// Nearest ancestor that is not a body block.
fn container(t: &Tree, n: NodeId) -> Option<NodeId> {
    let mut p = t.parent(n)?;
    while is_body_block(t, p) {
        p = t.parent(p)?;
    }
    Some(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Before,
    After,
}

struct Detector<'a> {
    script: &'a EditScript,
    found: BTreeSet<FeatureModification>,
}

impl<'a> Detector<'a> {
    fn tree(&self, side: Side) -> &'a Tree {
        match side {
            Side::Before => &self.script.before,
            Side::After => &self.script.after,
        }
    }

    fn counterpart(&self, side: Side, n: NodeId) -> Option<NodeId> {
        match side {
            Side::Before => self.script.mapping.dst(n),
            Side::After => self.script.mapping.src(n),
        }
    }

    fn mapped(&self, side: Side, n: NodeId) -> bool {
        self.counterpart(side, n).is_some()
    }

    fn add(&mut self, feature: Feature, modification: Modification, qualifier: Option<Qualifier>) {
        self.found.insert(FeatureModification { feature, modification, qualifier });
    }

    fn run(mut self) -> BTreeSet<FeatureModification> {
        for side in [Side::After, Side::Before] {
            let t = self.tree(side);
            for n in t.preorder() {
                if !self.mapped(side, n) && self.in_root_position(side, n) {
                    self.changed_subtree(side, n);
                }
            }
        }
        for e in &self.script.edits {
            match e.action {
                Action::Update => {
                    if let Some(a) = e.after_node {
                        self.updated(a);
                    }
                }
                Action::Move => {
                    if let (Some(b), Some(a)) = (e.before_node, e.after_node) {
                        self.moved(b, a);
                    }
                }
                Action::Insert | Action::Delete => {}
            }
        }
        self.found
    }

    /// Whether an unmapped node is the top of a reported subtree: its parent
    /// survives, or its parent is a new/removed transparent block that is
    /// itself in root position.
    fn in_root_position(&self, side: Side, n: NodeId) -> bool {
        let t = self.tree(side);
        !is_transparent_block(t, n) && self.below_surviving(side, n)
    }

    fn below_surviving(&self, side: Side, n: NodeId) -> bool {
        let t = self.tree(side);
        match t.parent(n) {
            Some(p) if self.mapped(side, p) => true,
            Some(p) => is_transparent_block(t, p) && self.below_surviving(side, p),
            None => false,
        }
    }

    fn changed_subtree(&mut self, side: Side, n: NodeId) {
        let op = match side {
            Side::After => Modification::Add,
            Side::Before => Modification::Remove,
        };
        if let Some((f, m, q)) = self.construct(side, n, op) {
            self.add(f, m, q);
        } else if let Some(p) = self.tree(side).parent(n) {
            self.climb(side, p, Some(n));
        }
    }

    /// The catalog construct rooted at `n`, for an add or remove.
    fn construct(&self, side: Side, n: NodeId, op: Modification) -> Option<(Feature, Modification, Option<Qualifier>)> {
        use NodeKind::*;
        let t = self.tree(side);
        let plain = |f: Feature| Some((f, op, None));
        match t.kind(n) {
            If => {
                let cond = first_child(t, n);
                if cond.is_some_and(|c| contains_null_comparison(t, c)) {
                    plain(Feature::NullCheck)
                } else {
                    plain(Feature::Conditional)
                }
            }
            Switch => plain(Feature::Conditional),
            Else => plain(Feature::ElseBranch),
            While | Do | For | ForEach => plain(Feature::Loop),
            NodeKind::Break => plain(Feature::Break),
            NodeKind::Continue => plain(Feature::Continue),
            NodeKind::Return => plain(Feature::Return),
            NodeKind::Throw => plain(Feature::Throw),
            Try => plain(Feature::TryCatch),
            Catch => Some((Feature::TryCatch, op, Some(Qualifier::CatchClause))),
            Finally => Some((Feature::TryCatch, op, Some(Qualifier::FinallyClause))),
            Synchronized => plain(Feature::SynchronizedBlock),
            FieldDecl => plain(Feature::FieldDeclaration),
            MethodDecl | ConstructorDecl => plain(Feature::MethodDeclaration),
            Assert => plain(Feature::Assertion),
            LocalVarDecl => plain(Feature::LocalVariable),
            VarDeclarator => match t.parent(n).map(|p| t.kind(p)) {
                Some(FieldDecl) => plain(Feature::FieldDeclaration),
                Some(LocalVarDecl) => plain(Feature::LocalVariable),
                _ => None,
            },
            Block => {
                let standalone = t.parent(n).is_some_and(|p| matches!(t.kind(p), Block | Fragment | SwitchCase));
                standalone.then_some((Feature::BlockScope, op, None))
            }
            ExprStmt => {
                let e = strip_parens(t, first_child(t, n)?);
                match t.kind(e) {
                    Assignment => plain(Feature::Assignment),
                    Unary | Postfix if matches!(t.label(e), "++" | "--") => plain(Feature::Assignment),
                    MethodCall => plain(Feature::MethodCall),
                    New => plain(Feature::InstanceCreation),
                    _ => None,
                }
            }
            Init => {
                let decl = t.parent(n).and_then(|d| t.parent(d)).map(|d| t.kind(d));
                match decl {
                    Some(FieldDecl) => Some((Feature::FieldDeclaration, op, Some(Qualifier::Initialization))),
                    Some(LocalVarDecl) => {
                        Some((Feature::LocalVariable, Modification::Modify, Some(Qualifier::Initialization)))
                    }
                    _ => None,
                }
            }
            _ => None,
        }
    }

    fn updated(&mut self, a: NodeId) {
        let t = &self.script.after;
        match t.kind(a) {
            NodeKind::MethodCall => self.add(Feature::MethodCall, Modification::Modify, Some(Qualifier::Callee)),
            NodeKind::MethodDecl | NodeKind::ConstructorDecl => {
                self.add(Feature::MethodDeclaration, Modification::Modify, Some(Qualifier::Signature))
            }
            NodeKind::Assignment => self.add(Feature::Assignment, Modification::Modify, Some(Qualifier::Expression)),
            _ => self.climb(Side::After, a, None),
        }
    }

    fn moved(&mut self, b: NodeId, a: NodeId) {
        let (bt, at) = (&self.script.before, &self.script.after);
        let kind = at.kind(a);
        if kind.is_member() && !kind.is_statement() {
            return;
        }
        if kind.is_statement() {
            if is_body_block(bt, b) && is_body_block(at, a) {
                return;
            }
            let (Some(cb), Some(ca)) = (container(bt, b), container(at, a)) else { return };
            let ca_mapped = self.mapped(Side::After, ca);
            let cb_mapped = self.mapped(Side::Before, cb);
            if self.script.mapping.dst(cb) == Some(ca) {
                let (pb, pa) = (bt.parent(b), at.parent(a));
                let same_parent = pb.is_some() && pb.and_then(|p| self.script.mapping.dst(p)) == pa;
                if same_parent {
                    self.remove_and_add(b, a);
                }
                return;
            }
            if !ca_mapped || !cb_mapped {
                self.add(Feature::BlockScope, Modification::Modify, None);
                return;
            }
            let synchronized_body = |t: &Tree, c: NodeId| t.parent(c).is_some_and(|p| t.kind(p) == NodeKind::Synchronized);
            if synchronized_body(at, ca) || synchronized_body(bt, cb) {
                self.add(Feature::SynchronizedBlock, Modification::Modify, Some(Qualifier::Block));
                return;
            }
            self.remove_and_add(b, a);
            return;
        }
        if self.construct(Side::After, a, Modification::Add).is_some() {
            self.remove_and_add(b, a);
            return;
        }
        if let Some(p) = bt.parent(b) {
            self.climb(Side::Before, p, Some(b));
        }
        if let Some(p) = at.parent(a) {
            self.climb(Side::After, p, Some(a));
        }
    }

    fn remove_and_add(&mut self, b: NodeId, a: NodeId) {
        for (side, n, op) in [(Side::Before, b, Modification::Remove), (Side::After, a, Modification::Add)] {
            if let Some((f, m, q)) = self.construct(side, n, op) {
                self.add(f, m, q);
            }
        }
    }

    /// Attributes a change at or below `start` to the nearest enclosing
    /// construct part. `prev` is the child of `start` the change came from.
    fn climb(&mut self, side: Side, start: NodeId, prev: Option<NodeId>) {
        let t = self.tree(side);
        let mut null_comparison = prev.is_some_and(|p| self.stable_null_comparison(side, p));
        let mut prev = prev;
        let mut cur = start;
        loop {
            null_comparison |= self.stable_null_comparison(side, cur);
            if let Some((f, m, q)) = self.rule(side, cur, prev, null_comparison) {
                self.add(f, m, q);
                return;
            }
            let k = t.kind(cur);
            if k.is_statement() || k.is_member() {
                return;
            }
            match t.parent(cur) {
                Some(p) => {
                    prev = Some(cur);
                    cur = p;
                }
                None => return,
            }
        }
    }

    fn stable_null_comparison(&self, side: Side, n: NodeId) -> bool {
        is_null_comparison(self.tree(side), n)
            && self.counterpart(side, n).is_some_and(|m| {
                let other = match side {
                    Side::Before => Side::After,
                    Side::After => Side::Before,
                };
                is_null_comparison(self.tree(other), m)
            })
    }

    fn rule(
        &self,
        side: Side,
        n: NodeId,
        prev: Option<NodeId>,
        null_comparison: bool,
    ) -> Option<(Feature, Modification, Option<Qualifier>)> {
        use NodeKind::*;
        let t = self.tree(side);
        let modify = |f: Feature, q: Qualifier| Some((f, Modification::Modify, Some(q)));
        let parent_kind = t.parent(n).map(|p| t.kind(p));
        let prev_kind = prev.map(|p| t.kind(p));
        match t.kind(n) {
            Condition => match parent_kind? {
                If if null_comparison => Some((Feature::NullCheck, Modification::Modify, None)),
                If => modify(Feature::Conditional, self.condition_change(side, n).condition()),
                Switch => modify(Feature::Conditional, Qualifier::ConditionOther),
                While | Do | For => modify(Feature::Loop, self.condition_change(side, n).condition()),
                ForEach => modify(Feature::Loop, Qualifier::ConditionOther),
                Assert => modify(Feature::Assertion, self.condition_change(side, n).predicate()),
                _ => None,
            },
            Lock => modify(Feature::SynchronizedBlock, Qualifier::LockObject),
            Args => match parent_kind? {
                MethodCall => modify(Feature::MethodCall, Qualifier::CallArguments),
                New => modify(Feature::InstanceCreation, Qualifier::CallArguments),
                _ => None,
            },
            MethodCall if prev.is_some() && prev_kind != Some(Args) => modify(Feature::MethodCall, Qualifier::Callee),
            NodeKind::Return => modify(Feature::Return, Qualifier::ReturnedValue),
            NodeKind::Throw => modify(Feature::Throw, Qualifier::Expression),
            Assignment => {
                let target = t.children(n).first().copied();
                if prev.is_some() && prev == target {
                    modify(Feature::Assignment, Qualifier::Target)
                } else {
                    modify(Feature::Assignment, Qualifier::Expression)
                }
            }
            Init => match t.parent(n).and_then(|d| t.parent(d)).map(|d| t.kind(d)) {
                Some(FieldDecl) => modify(Feature::FieldDeclaration, Qualifier::Initialization),
                Some(LocalVarDecl) => modify(Feature::LocalVariable, Qualifier::Initialization),
                _ => None,
            },
            FieldDecl if prev.is_some() => modify(Feature::FieldDeclaration, Qualifier::Signature),
            LocalVarDecl if prev.is_some() => modify(Feature::LocalVariable, Qualifier::Signature),
            MethodDecl | ConstructorDecl if prev.is_some() && prev_kind != Some(Block) => {
                modify(Feature::MethodDeclaration, Qualifier::Signature)
            }
            CatchParameter => modify(Feature::TryCatch, Qualifier::ExceptionType),
            _ => None,
        }
    }

    fn condition_change(&self, side: Side, cond: NodeId) -> ConditionChange {
        let Some(other) = self.counterpart(side, cond) else { return ConditionChange::Other };
        let (bc, ac) = match side {
            Side::Before => (cond, other),
            Side::After => (other, cond),
        };
        let (bt, at) = (&self.script.before, &self.script.after);
        match (first_child(bt, bc), first_child(at, ac)) {
            (Some(b), Some(a)) => analyze_condition_change(bt, b, at, a),
            _ => ConditionChange::Other,
        }
    }
}

/// Every feature/modification the script exhibits, before catalog filtering.
pub fn detect_feature_modifications(script: &EditScript) -> BTreeSet<FeatureModification> {
    Detector { script, found: BTreeSet::new() }.run()
}

/// Outcome of classifying one file pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PairOutcome {
    Classified(BTreeSet<FeatureModification>),
    Unparseable(String),
}

/// Classifies patches against one catalog.
#[derive(Debug, Clone, Default)]
pub struct PatchClassifier {
    catalog: Catalog,
}

impl PatchClassifier {
    pub fn new(catalog: Catalog) -> PatchClassifier {
        PatchClassifier { catalog }
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn classify_pair(&self, pair: &SourcePair) -> PairOutcome {
        if pair.language != DEFAULT_LANGUAGE {
            return PairOutcome::Unparseable(format!("{}: unsupported language `{}`", pair.file_path, pair.language));
        }
        if pair.before == pair.after {
            return PairOutcome::Classified(BTreeSet::new());
        }
        match diff_sources(&pair.before, &pair.after) {
            Ok(script) => PairOutcome::Classified(
                detect_feature_modifications(&script).into_iter().filter(|m| self.catalog.contains(m)).collect(),
            ),
            Err(e) => PairOutcome::Unparseable(format!("{}: {e}", pair.file_path)),
        }
    }

    /// Union of the kinds of every pair that parses on both sides. Fails only
    /// when no pair parses.
    pub fn classify_patch(&self, pairs: &[SourcePair]) -> Result<PatchKind> {
        let mut kind = PatchKind::empty();
        let mut failures = Vec::new();
        let mut parsed = 0;
        for pair in pairs {
            match self.classify_pair(pair) {
                PairOutcome::Classified(set) => {
                    parsed += 1;
                    for m in set {
                        kind.insert(m);
                    }
                }
                PairOutcome::Unparseable(why) => {
                    tracing::debug!("skipping unparseable pair: {why}");
                    failures.push(why);
                }
            }
        }
        if parsed == 0 {
            let why = if failures.is_empty() { "no source pairs".to_string() } else { failures.join("; ") };
            return Err(Error::Unparseable(why));
        }
        Ok(kind)
    }
}
