//! Tokenizer for Java-family source text.

use crate::{ParseError, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    Keyword,
    Number,
    Char,
    Str,
    Punct,
    Eof,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub span: Span,
}

impl Token {
    pub fn is(&self, text: &str) -> bool {
        matches!(self.kind, TokenKind::Punct | TokenKind::Keyword) && self.text == text
    }
}

const KEYWORDS: &[&str] = &[
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char", "class", "const",
    "continue", "default", "do", "double", "else", "enum", "extends", "final", "finally", "float",
    "for", "goto", "if", "implements", "import", "instanceof", "int", "interface", "long",
    "native", "new", "package", "private", "protected", "public", "return", "short", "static",
    "strictfp", "super", "switch", "synchronized", "this", "throw", "throws", "transient", "try",
    "void", "volatile", "while", "true", "false", "null",
];

// Longest first so that greedy matching picks `>>>=` over `>>`.
const PUNCTS: &[&str] = &[
    ">>>=", "<<=", ">>=", "<<", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=", ">=",
    "+=", "-=", "*=", "/=", "&=", "|=", "^=", "%=", "(", ")", "{", "}", "[", "]", ";", ",", ".",
    "@", "=", ">", "<", "!", "~", "?", ":", "+", "-", "*", "/", "&", "|", "^", "%",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

/// Splits `src` into tokens. Comments and whitespace are dropped.
///
/// Shift operators are never produced as single tokens; `>>` lexes as two `>`
/// so that nested generic type arguments close correctly. The expression
/// parser re-joins adjacent `>` tokens.
pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'/') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'*') {
            let start = i;
            i += 2;
            loop {
                if i + 1 >= bytes.len() {
                    return Err(ParseError::new("unterminated comment", start));
                }
                if bytes[i] == b'*' && bytes[i + 1] == b'/' {
                    i += 2;
                    break;
                }
                i += 1;
            }
            continue;
        }
        let start = i;
        if c == b'_' || c == b'$' || c.is_ascii_alphabetic() || c >= 0x80 {
            while i < bytes.len() {
                let d = bytes[i];
                if d == b'_' || d == b'$' || d.is_ascii_alphanumeric() || d >= 0x80 {
                    i += 1;
                } else {
                    break;
                }
            }
            let text = &src[start..i];
            let kind = if is_keyword(text) { TokenKind::Keyword } else { TokenKind::Ident };
            tokens.push(Token { kind, text: text.to_string(), span: Span::new(start, i) });
            continue;
        }
        if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            i = scan_number(bytes, i);
            tokens.push(Token {
                kind: TokenKind::Number,
                text: src[start..i].to_string(),
                span: Span::new(start, i),
            });
            continue;
        }
        if c == b'"' {
            i = if src[i..].starts_with("\"\"\"") {
                scan_text_block(src, i)?
            } else {
                scan_quoted(bytes, i, b'"')?
            };
            tokens.push(Token {
                kind: TokenKind::Str,
                text: src[start..i].to_string(),
                span: Span::new(start, i),
            });
            continue;
        }
        if c == b'\'' {
            i = scan_quoted(bytes, i, b'\'')?;
            tokens.push(Token {
                kind: TokenKind::Char,
                text: src[start..i].to_string(),
                span: Span::new(start, i),
            });
            continue;
        }
        let rest = &src[i..];
        let punct = PUNCTS
            .iter()
            .filter(|p| !matches!(**p, ">>>=" | ">>="))
            .find(|p| rest.starts_with(**p));
        match punct {
            Some(p) => {
                i += p.len();
                tokens.push(Token {
                    kind: TokenKind::Punct,
                    text: p.to_string(),
                    span: Span::new(start, i),
                });
            }
            None => {
                return Err(ParseError::new(
                    format!("unexpected character {:?}", rest.chars().next().unwrap_or('?')),
                    start,
                ))
            }
        }
    }
    tokens.push(Token { kind: TokenKind::Eof, text: String::new(), span: Span::new(src.len(), src.len()) });
    Ok(tokens)
}

fn scan_number(bytes: &[u8], mut i: usize) -> usize {
    if bytes[i] == b'0' && matches!(bytes.get(i + 1), Some(b'x' | b'X' | b'b' | b'B')) {
        i += 2;
        while i < bytes.len() && (bytes[i].is_ascii_hexdigit() || bytes[i] == b'_') {
            i += 1;
        }
    } else {
        while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'_') {
            i += 1;
        }
        if i < bytes.len() && bytes[i] == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit) {
            i += 1;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'_') {
                i += 1;
            }
        } else if i < bytes.len()
            && bytes[i] == b'.'
            && !bytes.get(i + 1).is_some_and(|b| b.is_ascii_alphabetic() || *b == b'.')
        {
            // `1.` is a valid double literal
            i += 1;
        }
        if i < bytes.len() && matches!(bytes[i], b'e' | b'E') {
            let mut j = i + 1;
            if j < bytes.len() && matches!(bytes[j], b'+' | b'-') {
                j += 1;
            }
            if j < bytes.len() && bytes[j].is_ascii_digit() {
                i = j;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
        }
    }
    if i < bytes.len() && matches!(bytes[i], b'l' | b'L' | b'f' | b'F' | b'd' | b'D') {
        i += 1;
    }
    i
}

fn scan_quoted(bytes: &[u8], start: usize, quote: u8) -> Result<usize, ParseError> {
    let mut i = start + 1;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'\n' => break,
            b if b == quote => return Ok(i + 1),
            _ => i += 1,
        }
    }
    Err(ParseError::new("unterminated literal", start))
}

fn scan_text_block(src: &str, start: usize) -> Result<usize, ParseError> {
    match src[start + 3..].find("\"\"\"") {
        Some(end) => Ok(start + 3 + end + 3),
        None => Err(ParseError::new("unterminated text block", start)),
    }
}
