//! Java-family source parsing and GumTree-style tree differencing.
//!
//! [`parse`] turns source text (a compilation unit, a list of members or a
//! list of statements) into a [`Tree`]. [`diff`] matches two trees and derives
//! an [`EditScript`] of insert, delete, update and move actions that turns
//! the first tree into the second.

pub mod diff;
pub mod lexer;
pub mod matcher;
pub mod parser;
pub mod tree;

use std::fmt;

pub use diff::{diff, diff_sources, Action, Edit, EditScript};
pub use matcher::{match_trees, Mapping, MatcherConfig};
pub use parser::{parse, parse_as, ParseMode};
pub use tree::{Node, NodeId, NodeKind, Tree};

/// Half-open byte range into the source text.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Span {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("parse error at byte {offset}: {message}")]
pub struct ParseError {
    pub message: String,
    pub offset: usize,
}

impl ParseError {
    pub fn new(message: impl Into<String>, offset: usize) -> ParseError {
        ParseError { message: message.into(), offset }
    }
}
