//! Recursive-descent parser for mapping files. Works per definition, so one
//! malformed definition never takes down the rest of the file.

use super::lexer::{group_definitions, lenient_repair, tokenize_mapping, DslTokKind, DslToken};
use super::{ConstraintDef, ConstraintExpr, MappingDocument, Name, PathRef};
use crate::diag::{Diagnostic, Span};

pub fn parse_mapping(src: &str, lenient: bool) -> (MappingDocument, Vec<Diagnostic>) {
    let (toks, mut diags) = tokenize_mapping(src);
    let toks = if lenient {
        let (mended, warnings) = lenient_repair(&toks);
        diags.extend(warnings);
        mended
    } else {
        toks
    };
    let mut doc = MappingDocument::default();
    for range in group_definitions(&toks) {
        let slice = &toks[range];
        let mut p = P { toks: slice, pos: 0, diags: &mut diags };
        if let Some(def) = p.definition() {
            doc.definitions.push(def);
        }
    }
    (doc, diags)
}

struct P<'a> {
    toks: &'a [DslToken],
    pos: usize,
    diags: &'a mut Vec<Diagnostic>,
}

impl<'a> P<'a> {
    fn peek(&self) -> Option<&DslTokKind> {
        self.toks.get(self.pos).map(|t| &t.kind)
    }

    fn span(&self) -> Span {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|t| t.span)
            .unwrap_or(Span::point(0))
    }

    fn bump(&mut self) -> &'a DslToken {
        let t = &self.toks[self.pos];
        self.pos += 1;
        t
    }

    fn eat(&mut self, kind: &DslTokKind) -> bool {
        if self.peek() == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn error(&mut self, msg: impl Into<String>) {
        let span = self.span();
        self.diags
            .push(Diagnostic::error("dsl.syntax", msg).at(span));
    }

    fn definition(&mut self) -> Option<ConstraintDef> {
        let target = self.path()?;
        let mut constraint_id = None;
        if self.eat(&DslTokKind::LBracket) {
            match self.peek() {
                Some(DslTokKind::Ident(_)) => {
                    let t = self.bump();
                    if let DslTokKind::Ident(name) = &t.kind {
                        constraint_id = Some(Name { text: name.clone(), span: t.span });
                    }
                }
                _ => {
                    self.error("expected a constraint id inside `[ ]`");
                    return None;
                }
            }
            if !self.eat(&DslTokKind::RBracket) {
                self.error("expected `]`");
                return None;
            }
        }
        let mut constraint = None;
        if self.eat(&DslTokKind::Colon) {
            constraint = Some(self.expr()?);
        }
        if self.pos < self.toks.len() {
            let got = &self.toks[self.pos];
            self.error(match got.kind {
                DslTokKind::Str(_) | DslTokKind::Ident(_) if constraint.is_none() => {
                    "expected `:` before the constraint".to_string()
                }
                _ => "unexpected trailing tokens in definition".to_string(),
            });
            return None;
        }
        let span = self.toks[0].span.join(self.toks[self.toks.len() - 1].span);
        Some(ConstraintDef { target, constraint_id, constraint, span })
    }

    fn path(&mut self) -> Option<PathRef> {
        let first = match self.peek() {
            Some(DslTokKind::Ident(_)) => self.bump(),
            _ => {
                self.error("expected a name");
                return None;
            }
        };
        let DslTokKind::Ident(name) = &first.kind else { unreachable!() };
        let mut segments = vec![name.clone()];
        let mut span = first.span;
        while self.peek() == Some(&DslTokKind::Dot) {
            self.pos += 1;
            match self.peek() {
                Some(DslTokKind::Ident(_)) => {
                    let t = self.bump();
                    if let DslTokKind::Ident(n) = &t.kind {
                        segments.push(n.clone());
                        span = span.join(t.span);
                    }
                }
                _ => {
                    self.error("expected a name after `.`");
                    return None;
                }
            }
        }
        Some(PathRef { segments, span })
    }

    fn expr(&mut self) -> Option<ConstraintExpr> {
        let mut arms = vec![self.precedence()?];
        while self.eat(&DslTokKind::Pipe) {
            arms.push(self.precedence()?);
        }
        Some(if arms.len() == 1 {
            arms.pop().unwrap()
        } else {
            ConstraintExpr::Alternation(arms)
        })
    }

    fn precedence(&mut self) -> Option<ConstraintExpr> {
        let mut items = vec![self.sequence()?];
        while self.eat(&DslTokKind::Less) {
            items.push(self.sequence()?);
        }
        Some(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            ConstraintExpr::Precedence(items)
        })
    }

    fn sequence(&mut self) -> Option<ConstraintExpr> {
        let mut items = vec![self.postfix()?];
        while matches!(
            self.peek(),
            Some(DslTokKind::Str(_))
                | Some(DslTokKind::Int(_))
                | Some(DslTokKind::Ident(_))
                | Some(DslTokKind::LParen)
        ) {
            items.push(self.postfix()?);
        }
        Some(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            ConstraintExpr::Sequence(items)
        })
    }

    fn postfix(&mut self) -> Option<ConstraintExpr> {
        let mut expr = self.atom()?;
        loop {
            let (kind, op_span) = match self.toks.get(self.pos) {
                Some(t @ DslToken { kind: DslTokKind::Star, .. }) => ('*', t.span),
                Some(t @ DslToken { kind: DslTokKind::Plus, .. }) => ('+', t.span),
                Some(t @ DslToken { kind: DslTokKind::Question, .. }) => ('?', t.span),
                _ => break,
            };
            self.pos += 1;
            let span = expr.span().join(op_span);
            let inner = Box::new(expr);
            expr = match kind {
                '*' => ConstraintExpr::Many0 { inner, span },
                '+' => ConstraintExpr::Many1 { inner, span },
                _ => ConstraintExpr::Maybe { inner, span },
            };
        }
        Some(expr)
    }

    fn atom(&mut self) -> Option<ConstraintExpr> {
        match self.peek() {
            Some(DslTokKind::Str(_)) => {
                let t = self.bump();
                let DslTokKind::Str(text) = &t.kind else { unreachable!() };
                Some(ConstraintExpr::Literal { text: text.clone(), span: t.span })
            }
            Some(DslTokKind::Int(_)) => {
                let t = self.bump();
                let DslTokKind::Int(value) = t.kind else { unreachable!() };
                Some(ConstraintExpr::Number { value, span: t.span })
            }
            Some(DslTokKind::Ident(_)) => Some(ConstraintExpr::Ref(self.path()?)),
            Some(DslTokKind::LParen) => {
                let open = self.bump().span;
                let inner = self.expr()?;
                if !self.eat(&DslTokKind::RParen) {
                    self.error("expected `)`");
                    return None;
                }
                let close = self.toks[self.pos - 1].span;
                Some(ConstraintExpr::Group { inner: Box::new(inner), span: open.join(close) })
            }
            _ => {
                self.error("expected a constraint");
                None
            }
        }
    }
}
