//! Tokenizer for mapping files, plus definition grouping and the lenient
//! missing-colon repair.

use crate::diag::{Diagnostic, Span};
use crate::strings;
use std::ops::Range;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DslTokKind {
    Ident(String),
    Int(i64),
    /// Escape-resolved string body.
    Str(String),
    LBracket,
    RBracket,
    Colon,
    Dot,
    Star,
    Question,
    Plus,
    LParen,
    RParen,
    Pipe,
    Less,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DslToken {
    pub kind: DslTokKind,
    pub span: Span,
    /// First token on its physical line.
    pub line_start: bool,
    /// 1-based character column.
    pub col: usize,
}

pub fn tokenize_mapping(src: &str) -> (Vec<DslToken>, Vec<Diagnostic>) {
    let mut toks = Vec::new();
    let mut diags = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0;
    let mut col = 1usize;
    let mut line_start = true;
    while i < src.len() {
        let c = src[i..].chars().next().unwrap();
        if c == '\n' {
            i += 1;
            col = 1;
            line_start = true;
            continue;
        }
        if c.is_whitespace() {
            i += c.len_utf8();
            col += 1;
            continue;
        }
        if c == '#' {
            while i < src.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let start_col = col;
        let push = |kind: DslTokKind, end: usize, toks: &mut Vec<DslToken>| {
            toks.push(DslToken {
                kind,
                span: Span::new(start, end),
                line_start,
                col: start_col,
            });
        };
        let simple = match c {
            '[' => Some(DslTokKind::LBracket),
            ']' => Some(DslTokKind::RBracket),
            ':' => Some(DslTokKind::Colon),
            '.' => Some(DslTokKind::Dot),
            '*' => Some(DslTokKind::Star),
            '?' => Some(DslTokKind::Question),
            '+' => Some(DslTokKind::Plus),
            '(' => Some(DslTokKind::LParen),
            ')' => Some(DslTokKind::RParen),
            '|' => Some(DslTokKind::Pipe),
            '<' => Some(DslTokKind::Less),
            _ => None,
        };
        if let Some(kind) = simple {
            push(kind, i + 1, &mut toks);
            i += 1;
            col += 1;
            line_start = false;
            continue;
        }
        if c == '"' {
            let mut j = i + 1;
            let body_start = j;
            let mut escaped = false;
            let mut closed = false;
            while j < src.len() {
                let b = bytes[j];
                if escaped {
                    escaped = false;
                } else if b == b'\\' {
                    escaped = true;
                } else if b == b'"' {
                    closed = true;
                    break;
                } else if b == b'\n' {
                    break;
                }
                j += 1;
            }
            if !closed {
                diags.push(
                    Diagnostic::error("dsl.unterminated-string", "unterminated string")
                        .at(Span::new(i, j)),
                );
                col += src[i..j].chars().count();
                i = j;
                line_start = false;
                continue;
            }
            match strings::unescape(&src[body_start..j]) {
                Ok(text) => push(DslTokKind::Str(text), j + 1, &mut toks),
                Err((off, msg)) => diags.push(
                    Diagnostic::error("dsl.bad-escape", msg).at(Span::point(body_start + off)),
                ),
            }
            col += src[i..=j].chars().count();
            i = j + 1;
            line_start = false;
            continue;
        }
        if c.is_ascii_digit() {
            let mut j = i;
            while j < src.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            match src[i..j].parse::<i64>() {
                Ok(n) => push(DslTokKind::Int(n), j, &mut toks),
                Err(_) => diags.push(
                    Diagnostic::error(
                        "dsl.bad-number",
                        format!("number `{}` out of range", &src[i..j]),
                    )
                    .at(Span::new(i, j)),
                ),
            }
            col += j - i;
            i = j;
            line_start = false;
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let mut j = i;
            while j < src.len() {
                let c = src[j..].chars().next().unwrap();
                if c.is_alphanumeric() || c == '_' {
                    j += c.len_utf8();
                } else {
                    break;
                }
            }
            let text = src[i..j].to_string();
            col += text.chars().count();
            push(DslTokKind::Ident(text), j, &mut toks);
            i = j;
            line_start = false;
            continue;
        }
        diags.push(
            Diagnostic::error("dsl.stray-character", format!("unexpected character `{c}`"))
                .at(Span::new(i, i + c.len_utf8())),
        );
        i += c.len_utf8();
        col += 1;
        line_start = false;
    }
    (toks, diags)
}

/// Splits a token stream into definition ranges.
///
/// A new definition starts at a token that (a) is first on its line at
/// column 1, (b) sits outside any `[` `]` `(` `)` nesting, (c) is an
/// identifier (nothing else can start a definition), and (d) does not follow
/// a dangling `:`, `<` or `|`. Everything else continues the previous
/// definition, which is how indented continuation lines work.
pub fn group_definitions(toks: &[DslToken]) -> Vec<Range<usize>> {
    let mut ranges: Vec<Range<usize>> = Vec::new();
    let mut depth = 0usize;
    let mut start: Option<usize> = None;
    for (i, tok) in toks.iter().enumerate() {
        let starts_new = depth == 0
            && tok.line_start
            && tok.col == 1
            && matches!(tok.kind, DslTokKind::Ident(_))
            && !matches!(
                toks.get(i.wrapping_sub(1)).map(|t| &t.kind),
                Some(DslTokKind::Colon) | Some(DslTokKind::Less) | Some(DslTokKind::Pipe)
            );
        if starts_new || start.is_none() {
            if let Some(s) = start {
                ranges.push(s..i);
            }
            start = Some(i);
        }
        match tok.kind {
            DslTokKind::LBracket | DslTokKind::LParen => depth += 1,
            DslTokKind::RBracket | DslTokKind::RParen => depth = depth.saturating_sub(1),
            _ => {}
        }
    }
    if let Some(s) = start {
        ranges.push(s..toks.len());
    }
    ranges
}

/// Where a definition's tokens are missing the `:` before the constraint:
/// returns the index (within the slice) at which a colon belongs.
fn missing_colon_at(def: &[DslToken]) -> Option<usize> {
    let mut i = 0;
    // target path
    if !matches!(def.first().map(|t| &t.kind), Some(DslTokKind::Ident(_))) {
        return None;
    }
    i += 1;
    while matches!(def.get(i).map(|t| &t.kind), Some(DslTokKind::Dot))
        && matches!(def.get(i + 1).map(|t| &t.kind), Some(DslTokKind::Ident(_)))
    {
        i += 2;
    }
    // optional [constraintID]
    if matches!(def.get(i).map(|t| &t.kind), Some(DslTokKind::LBracket))
        && matches!(def.get(i + 1).map(|t| &t.kind), Some(DslTokKind::Ident(_)))
        && matches!(def.get(i + 2).map(|t| &t.kind), Some(DslTokKind::RBracket))
    {
        i += 3;
    }
    match def.get(i).map(|t| &t.kind) {
        None | Some(DslTokKind::Colon) => None,
        Some(_) => Some(i),
    }
}

/// Inserts the colons lenient mode tolerates being absent. One warning per
/// repair; the returned stream parses like a well-formed file.
pub fn lenient_repair(toks: &[DslToken]) -> (Vec<DslToken>, Vec<Diagnostic>) {
    let mut out = Vec::with_capacity(toks.len());
    let mut diags = Vec::new();
    for range in group_definitions(toks) {
        let def = &toks[range.clone()];
        let repair = missing_colon_at(def);
        for (i, tok) in def.iter().enumerate() {
            if repair == Some(i) {
                // Splice right after the token the colon should follow.
                let at = def[i - 1].span.end;
                diags.push(
                    Diagnostic::warning("dsl.missing-colon", "definition is missing `:`; inserted")
                        .at(Span::point(at)),
                );
                out.push(DslToken {
                    kind: DslTokKind::Colon,
                    span: Span::point(at),
                    line_start: false,
                    col: tok.col,
                });
            }
            out.push(tok.clone());
        }
    }
    (out, diags)
}

/// The textual counterpart of [`lenient_repair`]: returns the source with
/// missing colons spliced in, for handing to a generated parser.
pub fn repair_source(src: &str) -> (String, Vec<Diagnostic>) {
    let (toks, _) = tokenize_mapping(src);
    let mut offsets = Vec::new();
    let mut diags = Vec::new();
    for range in group_definitions(&toks) {
        let def = &toks[range.clone()];
        if let Some(i) = missing_colon_at(def) {
            let at = def[i - 1].span.end;
            offsets.push(at);
            diags.push(
                Diagnostic::warning("dsl.missing-colon", "definition is missing `:`; inserted")
                    .at(Span::point(at)),
            );
        }
    }
    let mut text = src.to_string();
    for at in offsets.into_iter().rev() {
        text.insert(at, ':');
    }
    (text, diags)
}
