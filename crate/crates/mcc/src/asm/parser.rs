//! Text format for models.
//!
//! ```text
//! language tiny                      # required header
//! skip "[ \t\r\n]+"                  # lexer skip patterns
//! element Expr = Add | Lit           # alternative
//! element Add @Priority(2) {         # composite with annotations
//!   left: Expr
//!   right: Expr @Prefix("+")
//! }
//! token Lit @Pattern("[0-9]+")       # token
//! ```
//!
//! Member multiplicities are suffixes on the target: `?` `*` `+` or
//! `{m}` / `{m,}` / `{m,n}`. Members may start with `id` or `ref` markers.
//! `@Optional`, `@Minimum(n)`, `@Maximum(n)`, `@ID`, `@Reference` are
//! accepted as annotation spellings of the same facts and fold into the
//! member; they do not survive as annotations.

use super::{AnnotationUse, AnnotationValue, ElementDef, ElementKind, MemberDef, Model, SkipPattern};
use crate::constraints::ConstraintKind;
use crate::diag::{Diagnostic, Span};
use crate::strings;

#[derive(Debug, Clone, PartialEq)]
enum TokKind {
    Ident(String),
    Int(i64),
    Str(String),
    At,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Eq,
    Pipe,
    Colon,
    Comma,
    Question,
    Star,
    Plus,
}

#[derive(Debug, Clone)]
struct Tok {
    kind: TokKind,
    span: Span,
}

fn lex(src: &str, diags: &mut Vec<Diagnostic>) -> Vec<Tok> {
    let mut toks = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0;
    while i < src.len() {
        let c = src[i..].chars().next().unwrap();
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        if c == '#' {
            while i < src.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let kind = match c {
            '@' => Some(TokKind::At),
            '(' => Some(TokKind::LParen),
            ')' => Some(TokKind::RParen),
            '{' => Some(TokKind::LBrace),
            '}' => Some(TokKind::RBrace),
            '=' => Some(TokKind::Eq),
            '|' => Some(TokKind::Pipe),
            ':' => Some(TokKind::Colon),
            ',' => Some(TokKind::Comma),
            '?' => Some(TokKind::Question),
            '*' => Some(TokKind::Star),
            '+' => Some(TokKind::Plus),
            _ => None,
        };
        if let Some(kind) = kind {
            i += 1;
            toks.push(Tok { kind, span: Span::new(start, i) });
            continue;
        }
        if c == '"' {
            i += 1;
            let body_start = i;
            let mut escaped = false;
            let mut closed = false;
            while i < src.len() {
                let b = bytes[i];
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
                i += 1;
            }
            if !closed {
                diags.push(
                    Diagnostic::error("asm.unterminated-string", "unterminated string")
                        .at(Span::new(start, i)),
                );
                continue;
            }
            let body = &src[body_start..i];
            i += 1;
            match strings::unescape(body) {
                Ok(text) => toks.push(Tok { kind: TokKind::Str(text), span: Span::new(start, i) }),
                Err((off, msg)) => {
                    diags.push(
                        Diagnostic::error("asm.bad-escape", msg)
                            .at(Span::point(body_start + off)),
                    );
                }
            }
            continue;
        }
        if c.is_ascii_digit() {
            while i < src.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let text = &src[start..i];
            match text.parse::<i64>() {
                Ok(n) => toks.push(Tok { kind: TokKind::Int(n), span: Span::new(start, i) }),
                Err(_) => diags.push(
                    Diagnostic::error("asm.bad-number", format!("number `{text}` out of range"))
                        .at(Span::new(start, i)),
                ),
            }
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            while i < src.len() {
                let c = src[i..].chars().next().unwrap();
                if c.is_alphanumeric() || c == '_' {
                    i += c.len_utf8();
                } else {
                    break;
                }
            }
            toks.push(Tok {
                kind: TokKind::Ident(src[start..i].to_string()),
                span: Span::new(start, i),
            });
            continue;
        }
        diags.push(
            Diagnostic::error("asm.stray-character", format!("unexpected character `{c}`"))
                .at(Span::new(start, start + c.len_utf8())),
        );
        i += c.len_utf8();
    }
    toks
}

struct Parser<'a> {
    toks: &'a [Tok],
    pos: usize,
    diags: Vec<Diagnostic>,
    end: usize,
}

/// Annotations that restate member structure fold into the member fields.
enum Folded {
    Optional,
    Minimum(i64),
    Maximum(i64),
    Id,
    Ref,
}

enum Ann {
    Keep(AnnotationUse),
    Fold(Folded, Span),
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&TokKind> {
        self.toks.get(self.pos).map(|t| &t.kind)
    }

    fn peek_at(&self, n: usize) -> Option<&TokKind> {
        self.toks.get(self.pos + n).map(|t| &t.kind)
    }

    fn span(&self) -> Span {
        self.toks
            .get(self.pos)
            .map(|t| t.span)
            .unwrap_or(Span::point(self.end))
    }

    fn bump(&mut self) -> Option<&Tok> {
        let t = self.toks.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn error(&mut self, msg: impl Into<String>) {
        let span = self.span();
        self.diags.push(Diagnostic::error("asm.syntax", msg).at(span));
    }

    fn eat(&mut self, kind: &TokKind) -> bool {
        if self.peek() == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokKind, what: &str) -> bool {
        if self.eat(&kind) {
            true
        } else {
            self.error(format!("expected {what}"));
            false
        }
    }

    fn ident(&mut self, what: &str) -> Option<(String, Span)> {
        match self.peek() {
            Some(TokKind::Ident(_)) => {
                let t = self.bump().unwrap();
                if let TokKind::Ident(name) = &t.kind {
                    Some((name.clone(), t.span))
                } else {
                    unreachable!()
                }
            }
            _ => {
                self.error(format!("expected {what}"));
                None
            }
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(TokKind::Ident(w)) if w == kw)
    }

    /// Skips ahead to the next top-level declaration keyword.
    fn sync(&mut self) {
        while let Some(kind) = self.peek() {
            if let TokKind::Ident(w) = kind {
                if matches!(w.as_str(), "language" | "skip" | "element" | "token") {
                    return;
                }
            }
            self.pos += 1;
        }
    }

    fn annotations(&mut self) -> Vec<Ann> {
        let mut out = Vec::new();
        while self.eat(&TokKind::At) {
            let start = self.toks[self.pos - 1].span;
            let Some((name, _)) = self.ident("annotation name after `@`") else {
                continue;
            };
            let mut value = AnnotationValue::Flag;
            let mut end = self.toks[self.pos - 1].span;
            if self.eat(&TokKind::LParen) {
                value = self.annotation_args();
                if !self.expect(TokKind::RParen, "`)` after annotation arguments") {
                    continue;
                }
                end = self.toks[self.pos - 1].span;
            }
            let span = start.join(end);
            let folded = match name.as_str() {
                "Optional" => Some(Folded::Optional),
                "Minimum" => match value {
                    AnnotationValue::Int(n) => Some(Folded::Minimum(n)),
                    _ => {
                        self.diags.push(
                            Diagnostic::error("asm.bad-annotation", "@Minimum takes an integer")
                                .at(span),
                        );
                        continue;
                    }
                },
                "Maximum" => match value {
                    AnnotationValue::Int(n) => Some(Folded::Maximum(n)),
                    _ => {
                        self.diags.push(
                            Diagnostic::error("asm.bad-annotation", "@Maximum takes an integer")
                                .at(span),
                        );
                        continue;
                    }
                },
                "ID" => Some(Folded::Id),
                "Reference" => Some(Folded::Ref),
                _ => None,
            };
            if let Some(f) = folded {
                if matches!(f, Folded::Optional | Folded::Id | Folded::Ref)
                    && value != AnnotationValue::Flag
                {
                    self.diags.push(
                        Diagnostic::error("asm.bad-annotation", format!("@{name} takes no arguments"))
                            .at(span),
                    );
                    continue;
                }
                out.push(Ann::Fold(f, span));
                continue;
            }
            let kind = match name.as_str() {
                "Pattern" => ConstraintKind::Pattern,
                "Value" => ConstraintKind::Value,
                "Prefix" => ConstraintKind::Prefix,
                "Suffix" => ConstraintKind::Suffix,
                "Separator" => ConstraintKind::Separator,
                "Associativity" => ConstraintKind::Associativity,
                "Composition" => ConstraintKind::Composition,
                "Priority" => ConstraintKind::Priority,
                _ => {
                    self.diags.push(
                        Diagnostic::error(
                            "asm.unknown-annotation",
                            format!("unknown annotation `@{name}`"),
                        )
                        .at(span),
                    );
                    continue;
                }
            };
            out.push(Ann::Keep(AnnotationUse { kind, value, span }));
        }
        out
    }

    fn annotation_args(&mut self) -> AnnotationValue {
        match self.peek() {
            Some(TokKind::Str(_)) => {
                let mut texts = Vec::new();
                loop {
                    match self.peek() {
                        Some(TokKind::Str(_)) => {
                            if let Some(Tok { kind: TokKind::Str(s), .. }) = self.bump() {
                                texts.push(s.clone());
                            }
                        }
                        _ => {
                            self.error("expected string");
                            break;
                        }
                    }
                    if !self.eat(&TokKind::Comma) {
                        break;
                    }
                }
                AnnotationValue::Texts(texts)
            }
            Some(TokKind::Int(n)) => {
                let n = *n;
                self.bump();
                AnnotationValue::Int(n)
            }
            Some(TokKind::Ident(w)) => {
                let w = w.clone();
                self.bump();
                AnnotationValue::Word(w)
            }
            _ => {
                self.error("expected annotation argument");
                AnnotationValue::Flag
            }
        }
    }

    /// Splits parsed annotations for an element: folded ones are an error
    /// there, since they describe members.
    fn element_annotations(&mut self, anns: Vec<Ann>) -> Vec<AnnotationUse> {
        let mut out = Vec::new();
        for ann in anns {
            match ann {
                Ann::Keep(a) => out.push(a),
                Ann::Fold(_, span) => self.diags.push(
                    Diagnostic::error(
                        "asm.bad-annotation",
                        "this annotation applies to members, not elements",
                    )
                    .at(span),
                ),
            }
        }
        out
    }

    fn multiplicity(&mut self) -> Option<(u32, Option<u32>, bool)> {
        match self.peek() {
            Some(TokKind::Question) => {
                self.bump();
                Some((0, Some(1), true))
            }
            Some(TokKind::Star) => {
                self.bump();
                Some((0, None, true))
            }
            Some(TokKind::Plus) => {
                self.bump();
                Some((1, None, true))
            }
            Some(TokKind::LBrace) if matches!(self.peek_at(1), Some(TokKind::Int(_))) => {
                self.bump();
                let min = match self.bump() {
                    Some(Tok { kind: TokKind::Int(n), .. }) => *n as u32,
                    _ => 0,
                };
                let max = if self.eat(&TokKind::Comma) {
                    match self.peek() {
                        Some(TokKind::Int(n)) => {
                            let n = *n as u32;
                            self.bump();
                            Some(n)
                        }
                        _ => None, // `{m,}`
                    }
                } else {
                    Some(min) // `{m}`
                };
                self.expect(TokKind::RBrace, "`}` after multiplicity");
                Some((min, max, true))
            }
            _ => None,
        }
    }

    fn member(&mut self) -> Option<MemberDef> {
        let mut is_id = false;
        let mut is_ref = false;
        // `id` / `ref` are markers only when another name follows before `:`.
        if let (Some(TokKind::Ident(w)), Some(TokKind::Ident(_)), Some(TokKind::Colon)) =
            (self.peek(), self.peek_at(1), self.peek_at(2))
        {
            match w.as_str() {
                "id" => {
                    is_id = true;
                    self.bump();
                }
                "ref" => {
                    is_ref = true;
                    self.bump();
                }
                _ => {}
            }
        }
        let (name, name_span) = self.ident("member name")?;
        if !self.expect(TokKind::Colon, "`:` after member name") {
            return None;
        }
        let (target, _) = self.ident("member target element")?;
        let (mut min, mut max, explicit_mult) =
            self.multiplicity().unwrap_or((1, Some(1), false));
        let anns = self.annotations();
        let mut kept = Vec::new();
        for ann in anns {
            match ann {
                Ann::Keep(a) => kept.push(a),
                Ann::Fold(Folded::Optional, span) => {
                    if explicit_mult && (min, max) != (0, Some(1)) {
                        self.diags.push(
                            Diagnostic::error(
                                "asm.bad-annotation",
                                "@Optional conflicts with the multiplicity suffix",
                            )
                            .at(span),
                        );
                    } else {
                        min = 0;
                        max = Some(1);
                    }
                }
                Ann::Fold(Folded::Minimum(n), span) => {
                    if n < 0 {
                        self.diags.push(
                            Diagnostic::error("asm.bad-annotation", "@Minimum must be non-negative")
                                .at(span),
                        );
                    } else {
                        min = n as u32;
                    }
                }
                Ann::Fold(Folded::Maximum(n), span) => {
                    if n < 1 {
                        self.diags.push(
                            Diagnostic::error("asm.bad-annotation", "@Maximum must be positive")
                                .at(span),
                        );
                    } else {
                        max = Some(n as u32);
                    }
                }
                Ann::Fold(Folded::Id, _) => is_id = true,
                Ann::Fold(Folded::Ref, _) => is_ref = true,
            }
        }
        Some(MemberDef {
            name,
            target,
            min,
            max,
            is_id,
            is_ref,
            annotations: kept,
            span: name_span,
        })
    }

    fn element_body(&mut self, name: String, name_span: Span, annotations: Vec<AnnotationUse>) -> Option<ElementDef> {
        if self.eat(&TokKind::Eq) {
            let mut variants = Vec::new();
            loop {
                let (v, _) = self.ident("variant element name")?;
                variants.push(v);
                if !self.eat(&TokKind::Pipe) {
                    break;
                }
            }
            return Some(ElementDef {
                name,
                kind: ElementKind::Alternative(variants),
                members: Vec::new(),
                annotations,
                span: name_span,
            });
        }
        if !self.expect(TokKind::LBrace, "`{` or `=` after element name") {
            return None;
        }
        let mut members: Vec<MemberDef> = Vec::new();
        while !self.eat(&TokKind::RBrace) {
            if self.peek().is_none() {
                self.error("unclosed element body");
                return None;
            }
            match self.member() {
                Some(m) => {
                    if members.iter().any(|x| x.name == m.name) {
                        self.diags.push(
                            Diagnostic::error(
                                "asm.duplicate-member",
                                format!("element `{name}` already has a member `{}`", m.name),
                            )
                            .at(m.span),
                        );
                    } else {
                        members.push(m);
                    }
                }
                None => {
                    // Abandon the rest of this body.
                    while let Some(kind) = self.peek() {
                        if *kind == TokKind::RBrace {
                            break;
                        }
                        self.pos += 1;
                    }
                }
            }
        }
        Some(ElementDef {
            name,
            kind: ElementKind::Composite,
            members,
            annotations,
            span: name_span,
        })
    }
}

/// Parses a model file. Returns `None` only when the `language` header is
/// missing; everything else is reported through diagnostics on a best-effort
/// model.
pub fn parse_model(src: &str) -> (Option<Model>, Vec<Diagnostic>) {
    let mut diags = Vec::new();
    let toks = lex(src, &mut diags);
    let mut p = Parser { toks: &toks, pos: 0, diags, end: src.len() };

    if !p.at_keyword("language") {
        p.error("a model file must start with `language <name>`");
        return (None, p.diags);
    }
    p.bump();
    let name = match p.ident("language name") {
        Some((n, _)) => n,
        None => return (None, p.diags),
    };

    let mut model = Model { name, skips: Vec::new(), elements: Vec::new() };
    while let Some(kind) = p.peek() {
        let TokKind::Ident(word) = kind else {
            p.error("expected a declaration");
            p.sync();
            continue;
        };
        match word.as_str() {
            "language" => {
                p.error("duplicate `language` declaration");
                p.bump();
                p.bump();
            }
            "skip" => {
                p.bump();
                match p.peek() {
                    Some(TokKind::Str(_)) => {
                        let t = p.bump().unwrap();
                        if let TokKind::Str(s) = &t.kind {
                            model.skips.push(SkipPattern { pattern: s.clone(), span: t.span });
                        }
                    }
                    _ => {
                        p.error("expected a quoted pattern after `skip`");
                        p.sync();
                    }
                }
            }
            "token" => {
                p.bump();
                let Some((name, name_span)) = p.ident("token name") else {
                    p.sync();
                    continue;
                };
                let anns = p.annotations();
                let annotations = p.element_annotations(anns);
                push_element(
                    &mut model,
                    ElementDef {
                        name,
                        kind: ElementKind::Token,
                        members: Vec::new(),
                        annotations,
                        span: name_span,
                    },
                    &mut p.diags,
                );
            }
            "element" => {
                p.bump();
                let Some((name, name_span)) = p.ident("element name") else {
                    p.sync();
                    continue;
                };
                let anns = p.annotations();
                let annotations = p.element_annotations(anns);
                match p.element_body(name, name_span, annotations) {
                    Some(def) => push_element(&mut model, def, &mut p.diags),
                    None => p.sync(),
                }
            }
            _ => {
                p.error(format!("unexpected `{word}`, expected a declaration"));
                p.sync();
            }
        }
    }

    (Some(model), p.diags)
}

fn push_element(model: &mut Model, def: ElementDef, diags: &mut Vec<Diagnostic>) {
    if model.element(&def.name).is_some() {
        diags.push(
            Diagnostic::error(
                "asm.duplicate-element",
                format!("element `{}` is already declared; keeping the first", def.name),
            )
            .at(def.span),
        );
    } else {
        model.elements.push(def);
    }
}
