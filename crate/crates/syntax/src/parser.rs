//! Recursive-descent parser for a practical subset of Java.
//!
//! The grammar covers what shows up in small bug fixes: type declarations,
//! members, all statement forms, and the full expression precedence ladder
//! including lambdas, casts and generic types. Ambiguities (casts, generic
//! local declarations, lambdas) are resolved by speculative parsing with
//! backtracking over the token stream.

use crate::lexer::{tokenize, Token, TokenKind};
use crate::tree::{Node, NodeId, NodeKind, Tree};
use crate::{ParseError, Span};

/// Which syntactic unit the source text is expected to be.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParseMode {
    /// A full compilation unit (package, imports, type declarations).
    CompilationUnit,
    /// A sequence of class body declarations.
    Members,
    /// A sequence of block statements.
    Statements,
    /// A single expression.
    Expression,
}

impl ParseMode {
    /// Modes tried by [`parse`], most specific source shape first.
    pub const FALLBACK_ORDER: [ParseMode; 3] =
        [ParseMode::CompilationUnit, ParseMode::Members, ParseMode::Statements];
}

/// Parses `src`, trying a compilation unit first, then class members, then
/// statements. Fragments get a [`NodeKind::Fragment`] root.
pub fn parse(src: &str) -> Result<Tree, ParseError> {
    let mut first_err = None;
    for mode in ParseMode::FALLBACK_ORDER {
        match parse_as(src, mode) {
            Ok(tree) => return Ok(tree),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    Err(first_err.expect("at least one mode was tried"))
}

pub fn parse_as(src: &str, mode: ParseMode) -> Result<Tree, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0, nodes: Vec::new(), no_lambda: false };
    let root = match mode {
        ParseMode::CompilationUnit => p.compilation_unit()?,
        ParseMode::Members => p.fragment(|p| p.member_list_until_eof())?,
        ParseMode::Statements => p.fragment(|p| p.statement_list_until_eof())?,
        ParseMode::Expression => {
            let e = p.expression()?;
            p.expect_eof()?;
            e
        }
    };
    Ok(Tree::from_nodes(&p.nodes, root))
}

type PResult<T> = Result<T, ParseError>;

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    nodes: Vec<Node>,
    no_lambda: bool,
}

const PRIMITIVES: &[&str] = &["boolean", "byte", "char", "short", "int", "long", "float", "double", "void"];

const MODIFIER_WORDS: &[&str] = &[
    "public", "private", "protected", "static", "final", "abstract", "native", "synchronized",
    "transient", "volatile", "strictfp", "default",
];

impl Parser {
    // ---- token helpers ----

    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_at(&self, n: usize) -> &Token {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i]
    }

    fn at(&self, text: &str) -> bool {
        self.peek().is(text)
    }

    fn at_ident(&self) -> bool {
        self.peek().kind == TokenKind::Ident
    }

    fn at_ident_text(&self, text: &str) -> bool {
        self.at_ident() && self.peek().text == text
    }

    fn at_eof(&self) -> bool {
        self.peek().kind == TokenKind::Eof
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, text: &str) -> bool {
        if self.at(text) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, text: &str) -> PResult<Token> {
        if self.at(text) {
            Ok(self.bump())
        } else {
            Err(self.error(format!("expected `{text}`")))
        }
    }

    fn expect_ident(&mut self) -> PResult<String> {
        if self.at_ident() {
            Ok(self.bump().text)
        } else {
            Err(self.error("expected identifier"))
        }
    }

    fn expect_eof(&self) -> PResult<()> {
        if self.at_eof() {
            Ok(())
        } else {
            Err(self.error("expected end of input"))
        }
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        let tok = self.peek();
        let found = if tok.kind == TokenKind::Eof { "end of input".to_string() } else { format!("`{}`", tok.text) };
        ParseError::new(format!("{}, found {found}", msg.into()), tok.span.start)
    }

    /// True when the token at `pos + n` starts immediately where the previous one ends.
    fn adjacent(&self, n: usize) -> bool {
        n > 0 && self.peek_at(n - 1).span.end == self.peek_at(n).span.start
    }

    // ---- node helpers ----

    fn span_from(&self, start_tok: usize) -> Span {
        let start = self.toks[start_tok].span.start;
        let end = if self.pos > start_tok { self.toks[self.pos - 1].span.end } else { start };
        Span::new(start, end.max(start))
    }

    fn mk(&mut self, kind: NodeKind, label: impl Into<String>, children: Vec<NodeId>, start_tok: usize) -> NodeId {
        let span = self.span_from(start_tok);
        self.mk_span(kind, label, children, span)
    }

    fn mk_span(&mut self, kind: NodeKind, label: impl Into<String>, children: Vec<NodeId>, span: Span) -> NodeId {
        let id = self.nodes.len();
        for &c in &children {
            self.nodes[c].parent = Some(id);
        }
        self.nodes.push(Node { kind, label: label.into(), span, parent: None, children });
        id
    }

    /// Runs `f`; on failure restores the token position and returns `None`.
    fn attempt<T>(&mut self, f: impl FnOnce(&mut Self) -> PResult<T>) -> Option<T> {
        let saved = self.pos;
        match f(self) {
            Ok(v) => Some(v),
            Err(_) => {
                self.pos = saved;
                None
            }
        }
    }

    // ---- top level ----

    fn fragment(&mut self, f: impl FnOnce(&mut Self) -> PResult<Vec<NodeId>>) -> PResult<NodeId> {
        let start = self.pos;
        let children = f(self)?;
        Ok(self.mk(NodeKind::Fragment, "", children, start))
    }

    fn compilation_unit(&mut self) -> PResult<NodeId> {
        let start = self.pos;
        let mut children = Vec::new();
        let saved = self.pos;
        let _annotations = self.modifiers()?;
        if self.at("package") {
            let s = self.pos;
            self.bump();
            let name = self.qualified_name()?;
            self.expect(";")?;
            children.push(self.mk(NodeKind::PackageDecl, name, vec![], s));
        } else {
            self.pos = saved;
        }
        while self.at("import") {
            let s = self.pos;
            self.bump();
            let mut name = String::new();
            if self.eat("static") {
                name.push_str("static ");
            }
            name.push_str(&self.qualified_name()?);
            if self.eat(".") {
                self.expect("*")?;
                name.push_str(".*");
            }
            self.expect(";")?;
            children.push(self.mk(NodeKind::ImportDecl, name, vec![], s));
        }
        while !self.at_eof() {
            if self.eat(";") {
                continue;
            }
            let s = self.pos;
            let mods = self.modifiers()?;
            if !self.at_type_decl_start() {
                return Err(self.error("expected type declaration"));
            }
            children.push(self.type_decl(mods, s)?);
        }
        Ok(self.mk(NodeKind::CompilationUnit, "", children, start))
    }

    fn member_list_until_eof(&mut self) -> PResult<Vec<NodeId>> {
        let mut members = Vec::new();
        while !self.at_eof() {
            if self.eat(";") {
                continue;
            }
            members.push(self.member()?);
        }
        if members.is_empty() {
            return Err(self.error("expected class member"));
        }
        Ok(members)
    }

    fn statement_list_until_eof(&mut self) -> PResult<Vec<NodeId>> {
        let mut stmts = Vec::new();
        while !self.at_eof() {
            stmts.push(self.block_statement()?);
        }
        Ok(stmts)
    }

    fn qualified_name(&mut self) -> PResult<String> {
        let mut name = self.expect_ident()?;
        while self.at(".") && self.peek_at(1).kind == TokenKind::Ident {
            self.bump();
            name.push('.');
            name.push_str(&self.bump().text);
        }
        Ok(name)
    }

    // ---- declarations ----

    fn at_type_decl_start(&self) -> bool {
        self.at("class")
            || self.at("interface")
            || self.at("enum")
            || (self.at("@") && self.peek_at(1).is("interface"))
            || (self.at_ident_text("record") && self.peek_at(1).kind == TokenKind::Ident && self.peek_at(2).is("("))
    }

    fn modifiers(&mut self) -> PResult<NodeId> {
        let start = self.pos;
        let mut children = Vec::new();
        loop {
            if self.at("@") && !self.peek_at(1).is("interface") {
                let s = self.pos;
                self.bump();
                let name = self.qualified_name()?;
                if self.at("(") {
                    self.skip_balanced("(", ")")?;
                }
                children.push(self.mk(NodeKind::Annotation, name, vec![], s));
                continue;
            }
            let t = self.peek();
            let is_mod = t.kind == TokenKind::Keyword && MODIFIER_WORDS.contains(&t.text.as_str());
            // `synchronized (` starts a statement, `default:` a switch label.
            if is_mod && !(t.text == "synchronized" && self.peek_at(1).is("("))
                && !(t.text == "default" && (self.peek_at(1).is(":") || self.peek_at(1).is("->")))
            {
                let s = self.pos;
                let word = self.bump().text;
                children.push(self.mk(NodeKind::Modifier, word, vec![], s));
                continue;
            }
            if t.kind == TokenKind::Ident
                && matches!(t.text.as_str(), "sealed" | "non")
                && matches!(self.peek_at(1).kind, TokenKind::Keyword | TokenKind::Ident | TokenKind::Punct)
            {
                // `sealed`, `non-sealed`
                if t.text == "non" && self.peek_at(1).is("-") && self.peek_at(2).text == "sealed" {
                    let s = self.pos;
                    self.bump();
                    self.bump();
                    self.bump();
                    children.push(self.mk(NodeKind::Modifier, "non-sealed", vec![], s));
                    continue;
                }
                if t.text == "sealed" && (self.peek_at(1).is("class") || self.peek_at(1).is("interface") || self.peek_at(1).kind == TokenKind::Keyword) {
                    let s = self.pos;
                    self.bump();
                    children.push(self.mk(NodeKind::Modifier, "sealed", vec![], s));
                    continue;
                }
            }
            break;
        }
        Ok(self.mk(NodeKind::Modifiers, "", children, start))
    }

    fn skip_balanced(&mut self, open: &str, close: &str) -> PResult<()> {
        self.expect(open)?;
        let mut depth = 1;
        while depth > 0 {
            if self.at_eof() {
                return Err(self.error(format!("unbalanced `{open}`")));
            }
            if self.at(open) {
                depth += 1;
            } else if self.at(close) {
                depth -= 1;
            }
            self.bump();
        }
        Ok(())
    }

    fn type_decl(&mut self, mods: NodeId, start: usize) -> PResult<NodeId> {
        let mut children = vec![mods];
        if self.eat("class") {
            let name = self.expect_ident()?;
            if self.at("<") {
                children.push(self.type_parameters()?);
            }
            if self.eat("extends") {
                let s = self.pos;
                let ty = self.type_node()?;
                children.push(self.mk(NodeKind::SuperClass, "", vec![ty], s));
            }
            if self.at("implements") {
                children.push(self.type_list_node("implements")?);
            }
            if self.at_ident_text("permits") {
                self.bump();
                self.type_list()?;
            }
            children.push(self.class_body()?);
            Ok(self.mk(NodeKind::ClassDecl, name, children, start))
        } else if self.at("interface") || self.at("@") {
            self.eat("@");
            self.expect("interface")?;
            let name = self.expect_ident()?;
            if self.at("<") {
                children.push(self.type_parameters()?);
            }
            if self.at("extends") {
                children.push(self.type_list_node("extends")?);
            }
            if self.at_ident_text("permits") {
                self.bump();
                self.type_list()?;
            }
            children.push(self.class_body()?);
            Ok(self.mk(NodeKind::InterfaceDecl, name, children, start))
        } else if self.eat("enum") {
            let name = self.expect_ident()?;
            if self.at("implements") {
                children.push(self.type_list_node("implements")?);
            }
            children.push(self.enum_body()?);
            Ok(self.mk(NodeKind::EnumDecl, name, children, start))
        } else if self.at_ident_text("record") {
            self.bump();
            let name = self.expect_ident()?;
            if self.at("<") {
                children.push(self.type_parameters()?);
            }
            children.push(self.parameters()?);
            if self.at("implements") {
                children.push(self.type_list_node("implements")?);
            }
            children.push(self.class_body()?);
            Ok(self.mk(NodeKind::ClassDecl, name, children, start))
        } else {
            Err(self.error("expected class, interface, enum or record"))
        }
    }

    fn type_list_node(&mut self, keyword: &str) -> PResult<NodeId> {
        let s = self.pos;
        self.expect(keyword)?;
        let types = self.type_list()?;
        Ok(self.mk(NodeKind::Interfaces, "", types, s))
    }

    fn type_list(&mut self) -> PResult<Vec<NodeId>> {
        let mut types = vec![self.type_node()?];
        while self.eat(",") {
            types.push(self.type_node()?);
        }
        Ok(types)
    }

    fn type_parameters(&mut self) -> PResult<NodeId> {
        let s = self.pos;
        let text = self.angle_text()?;
        Ok(self.mk(NodeKind::TypeParameters, text, vec![], s))
    }

    /// Consumes a balanced `<...>` group and returns its compact text.
    fn angle_text(&mut self) -> PResult<String> {
        self.expect("<")?;
        let mut text = String::from("<");
        let mut depth = 1;
        while depth > 0 {
            if self.at_eof() || self.at(";") || self.at("{") {
                return Err(self.error("unbalanced `<`"));
            }
            let t = self.bump();
            match t.text.as_str() {
                "<" => depth += 1,
                ">" => depth -= 1,
                _ => {}
            }
            if matches!(t.kind, TokenKind::Keyword | TokenKind::Ident) && text.ends_with(|c: char| c.is_alphanumeric()) {
                text.push(' ');
            }
            text.push_str(&t.text);
        }
        Ok(text)
    }

    fn class_body(&mut self) -> PResult<NodeId> {
        let s = self.pos;
        self.expect("{")?;
        let mut members = Vec::new();
        while !self.at("}") {
            if self.at_eof() {
                return Err(self.error("expected `}`"));
            }
            if self.eat(";") {
                continue;
            }
            members.push(self.member()?);
        }
        self.bump();
        Ok(self.mk(NodeKind::ClassBody, "", members, s))
    }

    fn enum_body(&mut self) -> PResult<NodeId> {
        let s = self.pos;
        self.expect("{")?;
        let mut members = Vec::new();
        while !self.at(";") && !self.at("}") {
            let cs = self.pos;
            let _mods = self.modifiers()?;
            let name = self.expect_ident()?;
            let mut children = Vec::new();
            if self.at("(") {
                children.push(self.arguments()?);
            }
            if self.at("{") {
                children.push(self.class_body()?);
            }
            members.push(self.mk(NodeKind::EnumConstant, name, children, cs));
            if !self.eat(",") {
                break;
            }
        }
        if self.eat(";") {
            while !self.at("}") {
                if self.at_eof() {
                    return Err(self.error("expected `}`"));
                }
                if self.eat(";") {
                    continue;
                }
                members.push(self.member()?);
            }
        }
        self.expect("}")?;
        Ok(self.mk(NodeKind::ClassBody, "", members, s))
    }

    fn member(&mut self) -> PResult<NodeId> {
        let start = self.pos;
        if self.at("{") || (self.at("static") && self.peek_at(1).is("{")) {
            let label = if self.eat("static") { "static" } else { "" };
            let body = self.block()?;
            return Ok(self.mk(NodeKind::Initializer, label, vec![body], start));
        }
        let mods = self.modifiers()?;
        if self.at_type_decl_start() {
            return self.type_decl(mods, start);
        }
        let mut children = vec![mods];
        if self.at("<") {
            children.push(self.type_parameters()?);
        }
        // constructor
        if self.at_ident() && self.peek_at(1).is("(") {
            let name = self.bump().text;
            children.push(self.parameters()?);
            if self.at("throws") {
                children.push(self.throws()?);
            }
            children.push(self.block()?);
            return Ok(self.mk(NodeKind::ConstructorDecl, name, children, start));
        }
        // compact record constructor
        if self.at_ident() && self.peek_at(1).is("{") {
            let name = self.bump().text;
            children.push(self.block()?);
            return Ok(self.mk(NodeKind::ConstructorDecl, name, children, start));
        }
        let ty = self.type_node()?;
        children.push(ty);
        if self.at_ident() && self.peek_at(1).is("(") {
            let name = self.bump().text;
            children.push(self.parameters()?);
            while self.at("[") && self.peek_at(1).is("]") {
                self.bump();
                self.bump();
            }
            if self.at("throws") {
                children.push(self.throws()?);
            }
            if self.eat("default") {
                // annotation element default value
                self.element_value()?;
                self.expect(";")?;
            } else if !self.eat(";") {
                children.push(self.block()?);
            }
            return Ok(self.mk(NodeKind::MethodDecl, name, children, start));
        }
        children.extend(self.var_declarators()?);
        self.expect(";")?;
        Ok(self.mk(NodeKind::FieldDecl, "", children, start))
    }

    fn element_value(&mut self) -> PResult<()> {
        if self.at("{") {
            self.skip_balanced("{", "}")
        } else if self.at("@") {
            self.modifiers().map(|_| ())
        } else {
            self.ternary().map(|_| ())
        }
    }

    fn throws(&mut self) -> PResult<NodeId> {
        let s = self.pos;
        self.expect("throws")?;
        let types = self.type_list()?;
        Ok(self.mk(NodeKind::Throws, "", types, s))
    }

    fn parameters(&mut self) -> PResult<NodeId> {
        let s = self.pos;
        self.expect("(")?;
        let mut params = Vec::new();
        if !self.at(")") {
            loop {
                params.push(self.parameter()?);
                if !self.eat(",") {
                    break;
                }
            }
        }
        self.expect(")")?;
        Ok(self.mk(NodeKind::Parameters, "", params, s))
    }

    fn parameter(&mut self) -> PResult<NodeId> {
        let s = self.pos;
        let mods = self.modifiers()?;
        let ts = self.pos;
        let mut ty = self.type_text()?;
        if self.eat("...") {
            ty.push_str("...");
        }
        let name = if self.at("this") { self.bump().text } else { self.expect_ident()? };
        while self.at("[") && self.peek_at(1).is("]") {
            self.bump();
            self.bump();
            ty.push_str("[]");
        }
        let span = Span::new(self.toks[ts].span.start, self.toks[ts].span.end);
        let ty = self.mk_span(NodeKind::Type, ty, vec![], span);
        Ok(self.mk(NodeKind::Parameter, name, vec![mods, ty], s))
    }

    fn var_declarators(&mut self) -> PResult<Vec<NodeId>> {
        let mut decls = Vec::new();
        loop {
            let s = self.pos;
            let mut name = self.expect_ident()?;
            while self.at("[") && self.peek_at(1).is("]") {
                self.bump();
                self.bump();
                name.push_str("[]");
            }
            let mut children = Vec::new();
            if self.eat("=") {
                let is = self.pos;
                let value = self.var_init()?;
                children.push(self.mk(NodeKind::Init, "", vec![value], is));
            }
            decls.push(self.mk(NodeKind::VarDeclarator, name, children, s));
            if !self.eat(",") {
                break;
            }
        }
        Ok(decls)
    }

    fn var_init(&mut self) -> PResult<NodeId> {
        if self.at("{") {
            self.array_init()
        } else {
            self.expression()
        }
    }

    fn array_init(&mut self) -> PResult<NodeId> {
        let s = self.pos;
        self.expect("{")?;
        let mut items = Vec::new();
        while !self.at("}") {
            items.push(self.var_init()?);
            if !self.eat(",") {
                break;
            }
        }
        self.expect("}")?;
        Ok(self.mk(NodeKind::ArrayInit, "", items, s))
    }

    // ---- types ----

    fn type_node(&mut self) -> PResult<NodeId> {
        let s = self.pos;
        let text = self.type_text()?;
        Ok(self.mk(NodeKind::Type, text, vec![], s))
    }

    /// Parses a type and returns its compact textual form, e.g. `Map<K,List<V>>[]`.
    fn type_text(&mut self) -> PResult<String> {
        let mut text = self.type_text_no_dims()?;
        while self.at("[") && self.peek_at(1).is("]") {
            self.bump();
            self.bump();
            text.push_str("[]");
        }
        Ok(text)
    }

    fn type_text_no_dims(&mut self) -> PResult<String> {
        while self.at("@") {
            self.bump();
            self.qualified_name()?;
            if self.at("(") {
                self.skip_balanced("(", ")")?;
            }
        }
        let t = self.peek().clone();
        if t.kind == TokenKind::Keyword && PRIMITIVES.contains(&t.text.as_str()) {
            self.bump();
            return Ok(t.text);
        }
        let mut text = self.expect_ident()?;
        loop {
            if self.at("<") {
                text.push_str(&self.type_arguments()?);
            }
            if self.at(".") && self.peek_at(1).kind == TokenKind::Ident {
                self.bump();
                text.push('.');
                text.push_str(&self.bump().text);
            } else {
                break;
            }
        }
        Ok(text)
    }

    fn type_arguments(&mut self) -> PResult<String> {
        self.expect("<")?;
        let mut text = String::from("<");
        if self.eat(">") {
            text.push('>');
            return Ok(text);
        }
        loop {
            if self.eat("?") {
                text.push('?');
                if self.eat("extends") {
                    text.push_str(" extends ");
                    text.push_str(&self.type_text()?);
                } else if self.eat("super") {
                    text.push_str(" super ");
                    text.push_str(&self.type_text()?);
                }
            } else {
                text.push_str(&self.type_text()?);
            }
            if self.eat(",") {
                text.push(',');
            } else {
                break;
            }
        }
        self.expect(">")?;
        text.push('>');
        Ok(text)
    }

    // ---- statements ----

    fn block(&mut self) -> PResult<NodeId> {
        let s = self.pos;
        self.expect("{")?;
        let mut stmts = Vec::new();
        while !self.at("}") {
            if self.at_eof() {
                return Err(self.error("expected `}`"));
            }
            stmts.push(self.block_statement()?);
        }
        self.bump();
        Ok(self.mk(NodeKind::Block, "", stmts, s))
    }

    fn block_statement(&mut self) -> PResult<NodeId> {
        let start = self.pos;
        // local class
        if let Some(id) = self.attempt(|p| {
            let mods = p.modifiers()?;
            if p.at("class") || p.at("interface") || p.at("enum") {
                p.type_decl(mods, start)
            } else {
                Err(p.error("not a local type"))
            }
        }) {
            return Ok(id);
        }
        if let Some(id) = self.attempt(|p| {
            let d = p.local_var_decl()?;
            p.expect(";")?;
            Ok(d)
        }) {
            // re-span to include the semicolon
            let span = self.span_from(start);
            self.nodes[id].span = span;
            return Ok(id);
        }
        self.statement()
    }

    /// `[mods] Type name [= init] (, name [= init])*` without the terminator.
    fn local_var_decl(&mut self) -> PResult<NodeId> {
        let s = self.pos;
        let mods = self.modifiers()?;
        if self.at_ident_text("yield") && !self.peek_at(1).is("=") {
            return Err(self.error("yield statement"));
        }
        let ty = self.type_node()?;
        if !self.at_ident() {
            return Err(self.error("expected variable name"));
        }
        let next = self.peek_at(1);
        if !(next.is("=") || next.is(";") || next.is(",") || next.is("[") || next.is(":")) {
            return Err(self.error("not a declaration"));
        }
        let mut children = vec![mods, ty];
        children.extend(self.var_declarators()?);
        Ok(self.mk(NodeKind::LocalVarDecl, "", children, s))
    }

    fn statement(&mut self) -> PResult<NodeId> {
        let s = self.pos;
        let tok = self.peek().clone();
        if tok.kind == TokenKind::Punct {
            if tok.text == "{" {
                return self.block();
            }
            if tok.text == ";" {
                self.bump();
                return Ok(self.mk(NodeKind::Empty, "", vec![], s));
            }
        }
        if tok.kind == TokenKind::Keyword {
            match tok.text.as_str() {
                "if" => return self.if_statement(),
                "while" => {
                    self.bump();
                    let cond = self.paren_condition()?;
                    let body = self.statement()?;
                    return Ok(self.mk(NodeKind::While, "", vec![cond, body], s));
                }
                "do" => {
                    self.bump();
                    let body = self.statement()?;
                    self.expect("while")?;
                    let cond = self.paren_condition()?;
                    self.expect(";")?;
                    return Ok(self.mk(NodeKind::Do, "", vec![body, cond], s));
                }
                "for" => return self.for_statement(),
                "try" => return self.try_statement(),
                "switch" => return self.switch_block(),
                "return" => {
                    self.bump();
                    let mut children = Vec::new();
                    if !self.at(";") {
                        children.push(self.expression()?);
                    }
                    self.expect(";")?;
                    return Ok(self.mk(NodeKind::Return, "", children, s));
                }
                "throw" => {
                    self.bump();
                    let e = self.expression()?;
                    self.expect(";")?;
                    return Ok(self.mk(NodeKind::Throw, "", vec![e], s));
                }
                "break" | "continue" => {
                    self.bump();
                    let label = if self.at_ident() { self.bump().text } else { String::new() };
                    self.expect(";")?;
                    let kind = if tok.text == "break" { NodeKind::Break } else { NodeKind::Continue };
                    return Ok(self.mk(kind, label, vec![], s));
                }
                "synchronized" => {
                    self.bump();
                    self.expect("(")?;
                    let ls = self.pos;
                    let e = self.expression()?;
                    let lock = self.mk(NodeKind::Lock, "", vec![e], ls);
                    self.expect(")")?;
                    let body = self.block()?;
                    return Ok(self.mk(NodeKind::Synchronized, "", vec![lock, body], s));
                }
                "assert" => {
                    self.bump();
                    let cs = self.pos;
                    let e = self.expression()?;
                    let mut children = vec![self.mk(NodeKind::Condition, "", vec![e], cs)];
                    if self.eat(":") {
                        let ms = self.pos;
                        let m = self.expression()?;
                        children.push(self.mk(NodeKind::Message, "", vec![m], ms));
                    }
                    self.expect(";")?;
                    return Ok(self.mk(NodeKind::Assert, "", children, s));
                }
                _ => {}
            }
        }
        if tok.kind == TokenKind::Ident {
            if self.peek_at(1).is(":") {
                self.bump();
                self.bump();
                let body = self.statement()?;
                return Ok(self.mk(NodeKind::Labeled, tok.text, vec![body], s));
            }
            if tok.text == "yield" && !self.at_yield_expression_use() {
                self.bump();
                let e = self.expression()?;
                self.expect(";")?;
                return Ok(self.mk(NodeKind::Yield, "", vec![e], s));
            }
        }
        let e = self.expression()?;
        self.expect(";")?;
        Ok(self.mk(NodeKind::ExprStmt, "", vec![e], s))
    }

    fn at_yield_expression_use(&self) -> bool {
        let n = self.peek_at(1);
        n.is("=") || n.is("(") || n.is(".") || n.is("[") || n.is("++") || n.is("--") || n.is(";")
    }

    fn paren_condition(&mut self) -> PResult<NodeId> {
        self.expect("(")?;
        let s = self.pos;
        let e = self.expression()?;
        let cond = self.mk(NodeKind::Condition, "", vec![e], s);
        self.expect(")")?;
        Ok(cond)
    }

    fn if_statement(&mut self) -> PResult<NodeId> {
        let s = self.pos;
        self.expect("if")?;
        let cond = self.paren_condition()?;
        let ts = self.pos;
        let then = self.statement()?;
        let then = self.mk(NodeKind::Then, "", vec![then], ts);
        let mut children = vec![cond, then];
        if self.at("else") {
            let es = self.pos;
            self.bump();
            let other = self.statement()?;
            children.push(self.mk(NodeKind::Else, "", vec![other], es));
        }
        Ok(self.mk(NodeKind::If, "", children, s))
    }

    fn for_statement(&mut self) -> PResult<NodeId> {
        let s = self.pos;
        self.expect("for")?;
        self.expect("(")?;
        if let Some((param, _)) = self.attempt(|p| {
            let ps = p.pos;
            let mods = p.modifiers()?;
            let ty = p.type_node()?;
            let name = p.expect_ident()?;
            p.expect(":")?;
            Ok((p.mk(NodeKind::Parameter, name, vec![mods, ty], ps), ()))
        }) {
            let cs = self.pos;
            let iterable = self.expression()?;
            let cond = self.mk(NodeKind::Condition, "", vec![iterable], cs);
            self.expect(")")?;
            let body = self.statement()?;
            return Ok(self.mk(NodeKind::ForEach, "", vec![param, cond, body], s));
        }
        let is = self.pos;
        let mut init = Vec::new();
        if !self.at(";") {
            if let Some(d) = self.attempt(|p| p.local_var_decl()) {
                init.push(d);
            } else {
                init = self.expression_list()?;
            }
        }
        let init = self.mk(NodeKind::ForInit, "", init, is);
        self.expect(";")?;
        let mut children = vec![init];
        if !self.at(";") {
            let cs = self.pos;
            let e = self.expression()?;
            children.push(self.mk(NodeKind::Condition, "", vec![e], cs));
        }
        self.expect(";")?;
        let us = self.pos;
        let update = if self.at(")") { Vec::new() } else { self.expression_list()? };
        children.push(self.mk(NodeKind::ForUpdate, "", update, us));
        self.expect(")")?;
        children.push(self.statement()?);
        Ok(self.mk(NodeKind::For, "", children, s))
    }

    fn expression_list(&mut self) -> PResult<Vec<NodeId>> {
        let mut v = vec![self.expression()?];
        while self.eat(",") {
            v.push(self.expression()?);
        }
        Ok(v)
    }

    fn try_statement(&mut self) -> PResult<NodeId> {
        let s = self.pos;
        self.expect("try")?;
        let mut children = Vec::new();
        if self.at("(") {
            let rs = self.pos;
            self.bump();
            let mut resources = Vec::new();
            while !self.at(")") {
                if let Some(d) = self.attempt(|p| p.local_var_decl()) {
                    resources.push(d);
                } else {
                    resources.push(self.expression()?);
                }
                if !self.eat(";") {
                    break;
                }
            }
            self.expect(")")?;
            children.push(self.mk(NodeKind::Resources, "", resources, rs));
        }
        children.push(self.block()?);
        while self.at("catch") {
            let cs = self.pos;
            self.bump();
            self.expect("(")?;
            let ps = self.pos;
            let mods = self.modifiers()?;
            let mut pchildren = vec![mods, self.type_node()?];
            while self.eat("|") {
                pchildren.push(self.type_node()?);
            }
            let name = self.expect_ident()?;
            let param = self.mk(NodeKind::CatchParameter, name, pchildren, ps);
            self.expect(")")?;
            let body = self.block()?;
            children.push(self.mk(NodeKind::Catch, "", vec![param, body], cs));
        }
        if self.at("finally") {
            let fs = self.pos;
            self.bump();
            let body = self.block()?;
            children.push(self.mk(NodeKind::Finally, "", vec![body], fs));
        }
        if !children.iter().any(|&c| matches!(self.nodes[c].kind, NodeKind::Catch | NodeKind::Finally))
            && !children.iter().any(|&c| self.nodes[c].kind == NodeKind::Resources)
        {
            return Err(self.error("`try` without `catch` or `finally`"));
        }
        Ok(self.mk(NodeKind::Try, "", children, s))
    }

    /// `switch (selector) { cases }`, used for both statements and expressions.
    fn switch_block(&mut self) -> PResult<NodeId> {
        let s = self.pos;
        self.expect("switch")?;
        let cond = self.paren_condition()?;
        self.expect("{")?;
        let mut children = vec![cond];
        while !self.at("}") {
            if self.at_eof() {
                return Err(self.error("expected `}`"));
            }
            let cs = self.pos;
            let mut case_children = Vec::new();
            let label = if self.eat("default") {
                "default"
            } else {
                self.expect("case")?;
                let saved = self.no_lambda;
                self.no_lambda = true;
                loop {
                    case_children.push(self.ternary()?);
                    if !self.eat(",") {
                        break;
                    }
                }
                self.no_lambda = saved;
                "case"
            };
            if self.eat("->") {
                if self.at("{") {
                    case_children.push(self.block()?);
                } else if self.at("throw") {
                    case_children.push(self.statement()?);
                } else {
                    let es = self.pos;
                    let e = self.expression()?;
                    self.expect(";")?;
                    case_children.push(self.mk(NodeKind::ExprStmt, "", vec![e], es));
                }
            } else {
                self.expect(":")?;
                while !self.at("case") && !self.at("default") && !self.at("}") {
                    if self.at_eof() {
                        return Err(self.error("expected `}`"));
                    }
                    case_children.push(self.block_statement()?);
                }
                // `default` used as a modifier-less label only
            }
            children.push(self.mk(NodeKind::SwitchCase, label, case_children, cs));
        }
        self.bump();
        Ok(self.mk(NodeKind::Switch, "", children, s))
    }

    // ---- expressions ----

    fn expression(&mut self) -> PResult<NodeId> {
        let s = self.pos;
        let lhs = self.ternary()?;
        if let Some((op, len)) = self.assignment_op() {
            for _ in 0..len {
                self.bump();
            }
            let rhs = self.expression()?;
            return Ok(self.mk(NodeKind::Assignment, op, vec![lhs, rhs], s));
        }
        Ok(lhs)
    }

    /// Assignment operator at the cursor and how many tokens it spans.
    fn assignment_op(&self) -> Option<(String, usize)> {
        let t = self.peek();
        if t.kind != TokenKind::Punct {
            return None;
        }
        match t.text.as_str() {
            "=" | "+=" | "-=" | "*=" | "/=" | "%=" | "&=" | "|=" | "^=" | "<<=" => Some((t.text.clone(), 1)),
            ">" => {
                if self.peek_at(1).is(">=") && self.adjacent(1) {
                    Some((">>=".into(), 2))
                } else if self.peek_at(1).is(">") && self.peek_at(2).is(">=") && self.adjacent(1) && self.adjacent(2) {
                    Some((">>>=".into(), 3))
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    fn ternary(&mut self) -> PResult<NodeId> {
        let s = self.pos;
        let cond = self.binary(1)?;
        if self.eat("?") {
            let a = self.ternary_branch()?;
            self.expect(":")?;
            let b = self.ternary_branch()?;
            return Ok(self.mk(NodeKind::Ternary, "", vec![cond, a, b], s));
        }
        Ok(cond)
    }

    fn ternary_branch(&mut self) -> PResult<NodeId> {
        if self.lambda_ahead() {
            self.lambda()
        } else {
            self.ternary()
        }
    }

    /// Binary operator at the cursor: (text, precedence, token count).
    fn binary_op(&self) -> Option<(String, u8, usize)> {
        let t = self.peek();
        if t.is("instanceof") {
            return Some(("instanceof".into(), 7, 1));
        }
        if t.kind != TokenKind::Punct {
            return None;
        }
        let prec = match t.text.as_str() {
            "||" => 1,
            "&&" => 2,
            "|" => 3,
            "^" => 4,
            "&" => 5,
            "==" | "!=" => 6,
            "<" | "<=" | ">=" => 7,
            "<<" => 8,
            "+" | "-" => 9,
            "*" | "/" | "%" => 10,
            ">" => {
                if self.peek_at(1).is(">") && self.adjacent(1) {
                    if self.peek_at(2).is(">") && self.adjacent(2) {
                        if self.peek_at(3).is(">=") && self.adjacent(3) {
                            return None;
                        }
                        return Some((">>>".into(), 8, 3));
                    }
                    if self.peek_at(2).is(">=") && self.adjacent(2) {
                        return None;
                    }
                    return Some((">>".into(), 8, 2));
                }
                if self.peek_at(1).is(">=") && self.adjacent(1) {
                    return None;
                }
                7
            }
            _ => return None,
        };
        Some((t.text.clone(), prec, 1))
    }

    fn binary(&mut self, min_prec: u8) -> PResult<NodeId> {
        let s = self.pos;
        let mut lhs = self.unary()?;
        while let Some((op, prec, len)) = self.binary_op() {
            if prec < min_prec {
                break;
            }
            for _ in 0..len {
                self.bump();
            }
            if op == "instanceof" {
                self.eat("final");
                let ty = self.type_node()?;
                let mut label = String::new();
                if self.at_ident() {
                    label = self.bump().text;
                }
                lhs = self.mk(NodeKind::InstanceOf, label, vec![lhs, ty], s);
                continue;
            }
            let rhs = self.binary(prec + 1)?;
            lhs = self.mk(NodeKind::Binary, op, vec![lhs, rhs], s);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<NodeId> {
        let s = self.pos;
        let t = self.peek().clone();
        if t.kind == TokenKind::Punct {
            match t.text.as_str() {
                "+" | "-" | "++" | "--" | "!" | "~" => {
                    self.bump();
                    let e = self.unary()?;
                    return Ok(self.mk(NodeKind::Unary, t.text, vec![e], s));
                }
                "(" => {
                    if self.lambda_ahead() {
                        return self.lambda();
                    }
                    if let Some(cast) = self.attempt(|p| p.cast()) {
                        return Ok(cast);
                    }
                }
                _ => {}
            }
        }
        self.postfix()
    }

    fn cast(&mut self) -> PResult<NodeId> {
        let s = self.pos;
        self.expect("(")?;
        let ts = self.pos;
        let mut ty = self.type_text()?;
        while self.eat("&") {
            ty.push('&');
            ty.push_str(&self.type_text()?);
        }
        let ty_node = self.mk(NodeKind::Type, ty.clone(), vec![], ts);
        self.expect(")")?;
        let base = ty.trim_end_matches("[]");
        let primitive = PRIMITIVES.contains(&base) && !ty.ends_with("[]");
        let next = self.peek();
        let operand_start = match next.kind {
            TokenKind::Ident | TokenKind::Number | TokenKind::Str | TokenKind::Char => true,
            TokenKind::Keyword => matches!(
                next.text.as_str(),
                "this" | "super" | "new" | "true" | "false" | "null" | "switch"
            ) || PRIMITIVES.contains(&next.text.as_str()),
            TokenKind::Punct => {
                matches!(next.text.as_str(), "(" | "!" | "~")
                    || (primitive && matches!(next.text.as_str(), "+" | "-" | "++" | "--"))
            }
            TokenKind::Eof => false,
        };
        if !operand_start {
            return Err(self.error("not a cast"));
        }
        let e = self.unary()?;
        Ok(self.mk(NodeKind::Cast, "", vec![ty_node, e], s))
    }

    fn lambda_ahead(&self) -> bool {
        if self.no_lambda {
            return false;
        }
        if self.at_ident() {
            return self.peek_at(1).is("->");
        }
        if !self.at("(") {
            return false;
        }
        let mut depth = 0usize;
        let mut i = self.pos;
        while i < self.toks.len() {
            let t = &self.toks[i];
            if t.is("(") {
                depth += 1;
            } else if t.is(")") {
                depth -= 1;
                if depth == 0 {
                    return self.toks.get(i + 1).is_some_and(|n| n.is("->"));
                }
            } else if t.kind == TokenKind::Eof || t.is(";") || t.is("{") {
                return false;
            }
            i += 1;
        }
        false
    }

    fn lambda(&mut self) -> PResult<NodeId> {
        let s = self.pos;
        let mut names = Vec::new();
        if self.at_ident() {
            names.push(self.bump().text);
        } else {
            self.expect("(")?;
            while !self.at(")") {
                // either `a, b` or typed `(String a, int b)`
                let _ = self.modifiers()?;
                let first = self.type_text()?;
                if self.at_ident() {
                    names.push(self.bump().text);
                } else {
                    names.push(first);
                }
                if !self.eat(",") {
                    break;
                }
            }
            self.expect(")")?;
        }
        let params = self.mk(NodeKind::LambdaParams, names.join(","), vec![], s);
        self.expect("->")?;
        let saved = self.no_lambda;
        self.no_lambda = false;
        let body = if self.at("{") { self.block() } else { self.expression() };
        self.no_lambda = saved;
        let body = body?;
        Ok(self.mk(NodeKind::Lambda, "", vec![params, body], s))
    }

    fn arguments(&mut self) -> PResult<NodeId> {
        let s = self.pos;
        self.expect("(")?;
        let saved = self.no_lambda;
        self.no_lambda = false;
        let mut args = Vec::new();
        if !self.at(")") {
            loop {
                args.push(self.expression()?);
                if !self.eat(",") {
                    break;
                }
            }
        }
        self.no_lambda = saved;
        self.expect(")")?;
        Ok(self.mk(NodeKind::Args, "", args, s))
    }

    fn postfix(&mut self) -> PResult<NodeId> {
        let s = self.pos;
        let mut e = self.primary()?;
        loop {
            if self.at(".") {
                self.bump();
                if self.at("<") {
                    self.type_arguments()?;
                }
                if self.eat("new") {
                    // inner class creation: outer.new Inner()
                    let created = self.creator(s)?;
                    self.nodes[created].children.insert(0, e);
                    self.nodes[e].parent = Some(created);
                    e = created;
                    continue;
                }
                if self.at("this") || self.at("class") || self.at("super") {
                    let word = self.bump().text;
                    if word == "super" && self.at("(") {
                        let args = self.arguments()?;
                        e = self.mk(NodeKind::MethodCall, "super", vec![e, args], s);
                    } else {
                        e = self.mk(NodeKind::FieldAccess, word, vec![e], s);
                    }
                    continue;
                }
                let name = self.expect_ident()?;
                if self.at("(") {
                    let args = self.arguments()?;
                    e = self.mk(NodeKind::MethodCall, name, vec![e, args], s);
                } else {
                    e = self.mk(NodeKind::FieldAccess, name, vec![e], s);
                }
            } else if self.at("[") {
                self.bump();
                let idx = self.expression()?;
                self.expect("]")?;
                e = self.mk(NodeKind::ArrayAccess, "", vec![e, idx], s);
            } else if self.at("::") {
                self.bump();
                let name = if self.eat("new") { "new".to_string() } else { self.expect_ident()? };
                e = self.mk(NodeKind::MethodRef, name, vec![e], s);
            } else if self.at("++") || self.at("--") {
                let op = self.bump().text;
                e = self.mk(NodeKind::Postfix, op, vec![e], s);
            } else {
                break;
            }
        }
        Ok(e)
    }

    fn primary(&mut self) -> PResult<NodeId> {
        let s = self.pos;
        let t = self.peek().clone();
        match t.kind {
            TokenKind::Number | TokenKind::Str | TokenKind::Char => {
                self.bump();
                Ok(self.mk(NodeKind::Literal, t.text, vec![], s))
            }
            TokenKind::Ident => {
                if self.lambda_ahead() {
                    return self.lambda();
                }
                // generic type method reference / array class literal: `String[].class`
                if self.peek_at(1).is("[") && self.peek_at(2).is("]") {
                    if let Some(id) = self.attempt(|p| {
                        let ty = p.type_text()?;
                        if p.eat("::") {
                            let ts = s;
                            let tyn = p.mk(NodeKind::Type, ty, vec![], ts);
                            let name = if p.eat("new") { "new".to_string() } else { p.expect_ident()? };
                            return Ok(p.mk(NodeKind::MethodRef, name, vec![tyn], s));
                        }
                        p.expect(".")?;
                        p.expect("class")?;
                        Ok(p.mk(NodeKind::ClassLiteral, ty, vec![], s))
                    }) {
                        return Ok(id);
                    }
                }
                self.bump();
                if self.at("(") {
                    let args = self.arguments()?;
                    return Ok(self.mk(NodeKind::MethodCall, t.text, vec![args], s));
                }
                Ok(self.mk(NodeKind::Name, t.text, vec![], s))
            }
            TokenKind::Keyword => match t.text.as_str() {
                "true" | "false" | "null" => {
                    self.bump();
                    Ok(self.mk(NodeKind::Literal, t.text, vec![], s))
                }
                "this" => {
                    self.bump();
                    if self.at("(") {
                        let args = self.arguments()?;
                        return Ok(self.mk(NodeKind::MethodCall, "this", vec![args], s));
                    }
                    Ok(self.mk(NodeKind::This, "", vec![], s))
                }
                "super" => {
                    self.bump();
                    if self.at("(") {
                        let args = self.arguments()?;
                        return Ok(self.mk(NodeKind::MethodCall, "super", vec![args], s));
                    }
                    Ok(self.mk(NodeKind::Super, "", vec![], s))
                }
                "new" => {
                    self.bump();
                    self.creator(s)
                }
                "switch" => self.switch_block(),
                w if PRIMITIVES.contains(&w) => {
                    let ty = self.type_text()?;
                    if self.eat("::") {
                        let tyn = self.mk(NodeKind::Type, ty, vec![], s);
                        self.expect("new")?;
                        return Ok(self.mk(NodeKind::MethodRef, "new", vec![tyn], s));
                    }
                    self.expect(".")?;
                    self.expect("class")?;
                    Ok(self.mk(NodeKind::ClassLiteral, ty, vec![], s))
                }
                _ => Err(self.error("expected expression")),
            },
            TokenKind::Punct if t.text == "(" => {
                self.bump();
                let saved = self.no_lambda;
                self.no_lambda = false;
                let e = self.expression();
                self.no_lambda = saved;
                let e = e?;
                self.expect(")")?;
                Ok(self.mk(NodeKind::Parens, "", vec![e], s))
            }
            _ => Err(self.error("expected expression")),
        }
    }

    /// After `new`: class instance creation or array creation.
    fn creator(&mut self, s: usize) -> PResult<NodeId> {
        if self.at("<") {
            self.type_arguments()?;
        }
        let ts = self.pos;
        let ty = self.type_text_no_dims()?;
        if self.at("[") {
            let mut dims = Vec::new();
            let mut label = ty;
            while self.at("[") {
                self.bump();
                if self.eat("]") {
                    label.push_str("[]");
                } else {
                    dims.push(self.expression()?);
                    self.expect("]")?;
                    label.push_str("[]");
                }
            }
            if self.at("{") {
                dims.push(self.array_init()?);
            }
            return Ok(self.mk(NodeKind::ArrayCreation, label, dims, s));
        }
        let ty = self.mk(NodeKind::Type, ty, vec![], ts);
        let args = self.arguments()?;
        let mut children = vec![ty, args];
        if self.at("{") {
            children.push(self.class_body()?);
        }
        Ok(self.mk(NodeKind::New, "", children, s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn expr(src: &str) -> String {
        let t = parse_as(src, ParseMode::Expression).unwrap();
        t.to_sexpr(t.root())
    }

    fn stmts(src: &str) -> String {
        let t = parse_as(src, ParseMode::Statements).unwrap();
        t.to_sexpr(t.root())
    }

    #[test]
    fn precedence() {
        assert_eq!(
            expr("a || b && c == d + e * f"),
            "(Binary \"||\" (Name \"a\") (Binary \"&&\" (Name \"b\") (Binary \"==\" (Name \"c\") \
             (Binary \"+\" (Name \"d\") (Binary \"*\" (Name \"e\") (Name \"f\"))))))"
        );
    }

    #[test]
    fn shifts_and_generics_share_angle_tokens() {
        assert_eq!(expr("a >> 2"), "(Binary \">>\" (Name \"a\") (Literal \"2\"))");
        assert_eq!(expr("a >>> 2"), "(Binary \">>>\" (Name \"a\") (Literal \"2\"))");
        assert_eq!(expr("a > b"), "(Binary \">\" (Name \"a\") (Name \"b\"))");
        assert_eq!(
            stmts("List<List<String>> x = y; x >>= 1;"),
            "(Fragment (LocalVarDecl (Modifiers) (Type \"List<List<String>>\") (VarDeclarator \"x\" (Init (Name \"y\")))) \
             (ExprStmt (Assignment \">>=\" (Name \"x\") (Literal \"1\"))))"
        );
    }

    #[test]
    fn less_than_is_not_a_declaration() {
        assert_eq!(
            stmts("a < b;"),
            "(Fragment (ExprStmt (Binary \"<\" (Name \"a\") (Name \"b\"))))"
        );
    }

    #[test]
    fn casts_versus_parens() {
        assert_eq!(expr("(int) x"), "(Cast (Type \"int\") (Name \"x\"))");
        assert_eq!(expr("(String) o.get()"), "(Cast (Type \"String\") (MethodCall \"get\" (Name \"o\") (Args)))");
        assert_eq!(expr("(a) + b"), "(Binary \"+\" (Parens (Name \"a\")) (Name \"b\"))");
        assert_eq!(expr("(int) -1"), "(Cast (Type \"int\") (Unary \"-\" (Literal \"1\")))");
    }

    #[test]
    fn lambdas_and_method_refs() {
        assert_eq!(
            expr("list.forEach(x -> f(x))"),
            "(MethodCall \"forEach\" (Name \"list\") (Args (Lambda (LambdaParams \"x\") (MethodCall \"f\" (Args (Name \"x\"))))))"
        );
        assert_eq!(expr("(a, b) -> a"), "(Lambda (LambdaParams \"a,b\") (Name \"a\"))");
        assert_eq!(expr("String::valueOf"), "(MethodRef \"valueOf\" (Name \"String\"))");
    }

    #[test]
    fn listing_guard() {
        let src = "if (buffered.getBuffer() != null && buffered.getBuffer().length > 65536) { reset(); }";
        let s = stmts(src);
        assert!(s.starts_with("(Fragment (If (Condition (Binary \"&&\" (Binary \"!=\""), "{s}");
    }

    #[test]
    fn statements_of_every_shape() {
        let src = r#"
            for (int i = 0; i < n; i++) { if (i == 2) continue; else break; }
            for (String s : items) total += s.length();
            while (x) x = next();
            do { y--; } while (y > 0);
            try (Reader r = open()) { r.read(); } catch (IOException | RuntimeException e) { log(e); } finally { close(); }
            synchronized (lock) { count++; }
            assert x != null : "x";
            switch (k) { case 1: a(); break; case 2, 3 -> b(); default: c(); }
            outer: for (;;) { throw new IllegalStateException("x"); }
            int[] arr = new int[] {1, 2};
            Object o = new Object() { public String toString() { return "o"; } };
            return;
        "#;
        let t = parse_as(src, ParseMode::Statements).unwrap();
        let kinds: Vec<_> = t.children(t.root()).iter().map(|&c| t.kind(c)).collect();
        assert_eq!(
            kinds,
            vec![
                NodeKind::For,
                NodeKind::ForEach,
                NodeKind::While,
                NodeKind::Do,
                NodeKind::Try,
                NodeKind::Synchronized,
                NodeKind::Assert,
                NodeKind::Switch,
                NodeKind::Labeled,
                NodeKind::LocalVarDecl,
                NodeKind::LocalVarDecl,
                NodeKind::Return,
            ]
        );
    }

    #[test]
    fn compilation_unit_with_members() {
        let src = r#"
            package a.b;
            import java.util.*;
            import static java.lang.Math.max;
            @SuppressWarnings("x")
            public final class Foo<T extends Comparable<T>> extends Base implements Runnable, Cloneable {
                private static final int MAX = 10, MIN = 0;
                private Map<String, List<T>> cache = new HashMap<>();
                static { init(); }
                public Foo(int x) throws IOException { super(x); this.x = x; }
                @Override public <R> R run(final T[] items, String... rest) { return null; }
                abstract void f();
                enum Color { RED, GREEN("g") { void f() {} }; Color() {} Color(String s) {} }
                interface I { default void g() {} }
            }
        "#;
        let t = parse(src).unwrap();
        assert_eq!(t.kind(t.root()), NodeKind::CompilationUnit);
        let class = t.find_kind(NodeKind::ClassDecl).unwrap();
        assert_eq!(t.label(class), "Foo");
        assert!(t.find_kind(NodeKind::ConstructorDecl).is_some());
        assert!(t.find_kind(NodeKind::EnumDecl).is_some());
    }

    #[test]
    fn falls_back_to_members_then_statements() {
        let t = parse("private int x = 1; void f() {}").unwrap();
        assert_eq!(t.kind(t.root()), NodeKind::Fragment);
        assert_eq!(t.kind(t.children(t.root())[0]), NodeKind::FieldDecl);
        let t = parse("x = 1; f();").unwrap();
        assert_eq!(t.kind(t.children(t.root())[0]), NodeKind::ExprStmt);
    }

    #[test]
    fn reports_errors() {
        assert!(parse("if (x { }").is_err());
        assert!(parse_as("a +", ParseMode::Expression).is_err());
    }
}
