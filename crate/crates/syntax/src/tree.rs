use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};

use crate::Span;

pub type NodeId = usize;

/// Grammar node types produced by the parser.
///
/// Several kinds are role wrappers (`Condition`, `Then`, `Else`, `Args`,
/// `Init`, `Lock`, ...) whose only job is to make a child's syntactic role
/// visible to the tree differ and to feature detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    CompilationUnit,
    Fragment,
    PackageDecl,
    ImportDecl,
    ClassDecl,
    InterfaceDecl,
    EnumDecl,
    EnumConstant,
    ClassBody,
    Modifiers,
    Modifier,
    Annotation,
    TypeParameters,
    SuperClass,
    Interfaces,
    Type,
    FieldDecl,
    VarDeclarator,
    Init,
    MethodDecl,
    ConstructorDecl,
    Parameters,
    Parameter,
    Throws,
    Initializer,
    Block,
    LocalVarDecl,
    If,
    Condition,
    Then,
    Else,
    While,
    Do,
    For,
    ForInit,
    ForUpdate,
    ForEach,
    Try,
    Resources,
    Catch,
    CatchParameter,
    Finally,
    Switch,
    SwitchCase,
    Return,
    Throw,
    Break,
    Continue,
    Yield,
    Synchronized,
    Lock,
    Assert,
    Message,
    Labeled,
    ExprStmt,
    Empty,
    Assignment,
    Ternary,
    Binary,
    InstanceOf,
    Unary,
    Postfix,
    Cast,
    Literal,
    Name,
    This,
    Super,
    FieldAccess,
    ArrayAccess,
    MethodCall,
    Args,
    New,
    ArrayCreation,
    ArrayInit,
    Lambda,
    LambdaParams,
    MethodRef,
    ClassLiteral,
    Parens,
}

impl NodeKind {
    pub fn name(self) -> &'static str {
        use NodeKind::*;
        match self {
            CompilationUnit => "CompilationUnit",
            Fragment => "Fragment",
            PackageDecl => "PackageDecl",
            ImportDecl => "ImportDecl",
            ClassDecl => "ClassDecl",
            InterfaceDecl => "InterfaceDecl",
            EnumDecl => "EnumDecl",
            EnumConstant => "EnumConstant",
            ClassBody => "ClassBody",
            Modifiers => "Modifiers",
            Modifier => "Modifier",
            Annotation => "Annotation",
            TypeParameters => "TypeParameters",
            SuperClass => "SuperClass",
            Interfaces => "Interfaces",
            Type => "Type",
            FieldDecl => "FieldDecl",
            VarDeclarator => "VarDeclarator",
            Init => "Init",
            MethodDecl => "MethodDecl",
            ConstructorDecl => "ConstructorDecl",
            Parameters => "Parameters",
            Parameter => "Parameter",
            Throws => "Throws",
            Initializer => "Initializer",
            Block => "Block",
            LocalVarDecl => "LocalVarDecl",
            If => "If",
            Condition => "Condition",
            Then => "Then",
            Else => "Else",
            While => "While",
            Do => "Do",
            For => "For",
            ForInit => "ForInit",
            ForUpdate => "ForUpdate",
            ForEach => "ForEach",
            Try => "Try",
            Resources => "Resources",
            Catch => "Catch",
            CatchParameter => "CatchParameter",
            Finally => "Finally",
            Switch => "Switch",
            SwitchCase => "SwitchCase",
            Return => "Return",
            Throw => "Throw",
            Break => "Break",
            Continue => "Continue",
            Yield => "Yield",
            Synchronized => "Synchronized",
            Lock => "Lock",
            Assert => "Assert",
            Message => "Message",
            Labeled => "Labeled",
            ExprStmt => "ExprStmt",
            Empty => "Empty",
            Assignment => "Assignment",
            Ternary => "Ternary",
            Binary => "Binary",
            InstanceOf => "InstanceOf",
            Unary => "Unary",
            Postfix => "Postfix",
            Cast => "Cast",
            Literal => "Literal",
            Name => "Name",
            This => "This",
            Super => "Super",
            FieldAccess => "FieldAccess",
            ArrayAccess => "ArrayAccess",
            MethodCall => "MethodCall",
            Args => "Args",
            New => "New",
            ArrayCreation => "ArrayCreation",
            ArrayInit => "ArrayInit",
            Lambda => "Lambda",
            LambdaParams => "LambdaParams",
            MethodRef => "MethodRef",
            ClassLiteral => "ClassLiteral",
            Parens => "Parens",
        }
    }

    pub fn is_statement(self) -> bool {
        use NodeKind::*;
        matches!(
            self,
            Block
                | LocalVarDecl
                | If
                | While
                | Do
                | For
                | ForEach
                | Try
                | Switch
                | Return
                | Throw
                | Break
                | Continue
                | Yield
                | Synchronized
                | Assert
                | Labeled
                | ExprStmt
                | Empty
                | ClassDecl
        )
    }

    pub fn is_member(self) -> bool {
        use NodeKind::*;
        matches!(
            self,
            FieldDecl | MethodDecl | ConstructorDecl | Initializer | ClassDecl | InterfaceDecl | EnumDecl
        )
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub kind: NodeKind,
    pub label: String,
    pub span: Span,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
}

/// Arena-allocated syntax tree with precomputed structural metadata.
#[derive(Debug, Clone)]
pub struct Tree {
    nodes: Vec<Node>,
    root: NodeId,
    heights: Vec<usize>,
    sizes: Vec<usize>,
    hashes: Vec<u64>,
}

impl Tree {
    /// Builds a tree from raw nodes, keeping only what is reachable from
    /// `root` and renumbering in pre-order so that the root is node 0.
    pub fn from_nodes(raw: &[Node], root: NodeId) -> Tree {
        let mut nodes: Vec<Node> = Vec::new();
        let mut stack = vec![(root, None::<NodeId>)];
        while let Some((old, parent)) = stack.pop() {
            let id = nodes.len();
            let src = &raw[old];
            nodes.push(Node {
                kind: src.kind,
                label: src.label.clone(),
                span: src.span,
                parent,
                children: Vec::with_capacity(src.children.len()),
            });
            if let Some(p) = parent {
                nodes[p].children.push(id);
            }
            for &c in src.children.iter().rev() {
                stack.push((c, Some(id)));
            }
        }
        // The stack pushes children in reverse; pre-order ids are assigned in
        // visit order, but child lists were appended in visit order too, so
        // they are already left to right.
        let mut tree = Tree { nodes, root: 0, heights: vec![], sizes: vec![], hashes: vec![] };
        tree.recompute();
        tree
    }

    fn recompute(&mut self) {
        let n = self.nodes.len();
        self.heights = vec![1; n];
        self.sizes = vec![1; n];
        self.hashes = vec![0; n];
        for id in self.postorder() {
            let node = &self.nodes[id];
            let mut h = DefaultHasher::new();
            node.kind.hash(&mut h);
            node.label.hash(&mut h);
            let mut height = 1;
            let mut size = 1;
            for &c in &node.children {
                self.hashes[c].hash(&mut h);
                height = height.max(self.heights[c] + 1);
                size += self.sizes[c];
            }
            self.hashes[id] = h.finish();
            self.heights[id] = height;
            self.sizes[id] = size;
        }
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn kind(&self, id: NodeId) -> NodeKind {
        self.nodes[id].kind
    }

    pub fn label(&self, id: NodeId) -> &str {
        &self.nodes[id].label
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id].parent
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id].children
    }

    pub fn height(&self, id: NodeId) -> usize {
        self.heights[id]
    }

    pub fn size(&self, id: NodeId) -> usize {
        self.sizes[id]
    }

    /// Hash of kind, label and all descendants. Equal hashes on two trees
    /// mean isomorphic subtrees (modulo collisions, which `isomorphic` rules out).
    pub fn structure_hash(&self, id: NodeId) -> u64 {
        self.hashes[id]
    }

    pub fn position_in_parent(&self, id: NodeId) -> Option<usize> {
        let p = self.parent(id)?;
        self.children(p).iter().position(|&c| c == id)
    }

    pub fn ancestors(&self, id: NodeId) -> Ancestors<'_> {
        Ancestors { tree: self, next: self.parent(id) }
    }

    pub fn is_ancestor(&self, ancestor: NodeId, id: NodeId) -> bool {
        self.ancestors(id).any(|a| a == ancestor)
    }

    pub fn preorder(&self) -> Vec<NodeId> {
        self.preorder_from(self.root)
    }

    pub fn preorder_from(&self, start: NodeId) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.sizes.get(start).copied().unwrap_or(1));
        let mut stack = vec![start];
        while let Some(id) = stack.pop() {
            out.push(id);
            stack.extend(self.nodes[id].children.iter().rev());
        }
        out
    }

    pub fn postorder(&self) -> Vec<NodeId> {
        self.postorder_from(self.root)
    }

    pub fn postorder_from(&self, start: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![(start, false)];
        while let Some((id, expanded)) = stack.pop() {
            if expanded {
                out.push(id);
            } else {
                stack.push((id, true));
                for &c in self.nodes[id].children.iter().rev() {
                    stack.push((c, false));
                }
            }
        }
        out
    }

    /// Proper descendants of `id` in pre-order.
    pub fn descendants(&self, id: NodeId) -> Vec<NodeId> {
        let mut v = self.preorder_from(id);
        v.remove(0);
        v
    }

    pub fn isomorphic(&self, a: NodeId, other: &Tree, b: NodeId) -> bool {
        if self.hashes[a] != other.hashes[b] {
            return false;
        }
        let (na, nb) = (&self.nodes[a], &other.nodes[b]);
        na.kind == nb.kind
            && na.label == nb.label
            && na.children.len() == nb.children.len()
            && na
                .children
                .iter()
                .zip(&nb.children)
                .all(|(&x, &y)| self.isomorphic(x, other, y))
    }

    /// Compact s-expression rendering, mainly for tests and diagnostics.
    pub fn to_sexpr(&self, id: NodeId) -> String {
        let mut out = String::new();
        self.write_sexpr(id, &mut out);
        out
    }

    fn write_sexpr(&self, id: NodeId, out: &mut String) {
        let node = &self.nodes[id];
        out.push('(');
        out.push_str(node.kind.name());
        if !node.label.is_empty() {
            out.push_str(" \"");
            out.push_str(&node.label);
            out.push('"');
        }
        for &c in &node.children {
            out.push(' ');
            self.write_sexpr(c, out);
        }
        out.push(')');
    }

    /// First node (pre-order) of the given kind.
    pub fn find_kind(&self, kind: NodeKind) -> Option<NodeId> {
        self.preorder().into_iter().find(|&id| self.kind(id) == kind)
    }
}

pub struct Ancestors<'a> {
    tree: &'a Tree,
    next: Option<NodeId>,
}

impl Iterator for Ancestors<'_> {
    type Item = NodeId;

    fn next(&mut self) -> Option<NodeId> {
        let cur = self.next?;
        self.next = self.tree.parent(cur);
        Some(cur)
    }
}

/// Mutable tree used when replaying edit scripts. Node ids are stable: new
/// nodes are appended and deleted nodes are detached, never reused.
#[derive(Debug, Clone)]
pub struct WorkingTree {
    pub nodes: Vec<Node>,
    pub root: NodeId,
}

impl WorkingTree {
    pub fn from_tree(tree: &Tree) -> WorkingTree {
        WorkingTree { nodes: tree.nodes.clone(), root: tree.root }
    }

    pub fn add_node(&mut self, kind: NodeKind, label: &str) -> NodeId {
        self.nodes.push(Node {
            kind,
            label: label.to_string(),
            span: Span::default(),
            parent: None,
            children: Vec::new(),
        });
        self.nodes.len() - 1
    }

    pub fn detach(&mut self, id: NodeId) {
        if let Some(p) = self.nodes[id].parent.take() {
            self.nodes[p].children.retain(|&c| c != id);
        }
    }

    pub fn attach(&mut self, id: NodeId, parent: NodeId, pos: usize) {
        self.detach(id);
        let children = &mut self.nodes[parent].children;
        let pos = pos.min(children.len());
        children.insert(pos, id);
        self.nodes[id].parent = Some(parent);
    }

    pub fn freeze(&self) -> Tree {
        Tree::from_nodes(&self.nodes, self.root)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(kind: NodeKind, label: &str, children: Vec<NodeId>) -> Node {
        Node { kind, label: label.into(), span: Span::default(), parent: None, children }
    }

    #[test]
    fn renumbers_in_preorder_and_drops_garbage() {
        let nodes = vec![
            raw(NodeKind::Name, "a", vec![]),
            raw(NodeKind::Name, "garbage", vec![]),
            raw(NodeKind::Name, "b", vec![]),
            raw(NodeKind::Binary, "+", vec![0, 2]),
        ];
        let t = Tree::from_nodes(&nodes, 3);
        assert_eq!(t.len(), 3);
        assert_eq!(t.to_sexpr(0), "(Binary \"+\" (Name \"a\") (Name \"b\"))");
        assert_eq!(t.parent(1), Some(0));
        assert_eq!(t.height(0), 2);
        assert_eq!(t.size(0), 3);
        assert_eq!(t.postorder(), vec![1, 2, 0]);
    }
}
