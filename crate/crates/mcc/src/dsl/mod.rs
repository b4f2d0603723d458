//! The constraint mapping DSL.
//!
//! A mapping file is a sequence of definitions, one per line:
//!
//! ```text
//! target[constraintID]: constraint
//! ```
//!
//! `target` is an element or `Element.member` path. The bracketed constraint
//! id names a property (`prefix`, `suffix`, `separator`, `pattern`,
//! `precedes`, ...); without it the constraint is read as a grammar-style
//! description of the target's concrete syntax. The constraint expression
//! language has postfix `*` `?` `+` binding tightest, then juxtaposition
//! (sequencing), then `<` chains (precedence: left operand binds tighter),
//! then `|` chains (alternation), loosest. Parentheses group. Quoted strings
//! are delimiter or pattern text, integers and bare words are values.
//!
//! A definition normally starts at column 1 and indented lines continue the
//! previous definition; lines can also continue after a trailing `:`, `<` or
//! `|`. Comments run from `#` to end of line.

mod lexer;
mod parser;

pub use lexer::{
    group_definitions, lenient_repair, repair_source, tokenize_mapping, DslTokKind, DslToken,
};
pub use parser::parse_mapping;

use crate::diag::Span;
use crate::strings;
use std::fmt;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MappingDocument {
    pub definitions: Vec<ConstraintDef>,
}

#[derive(Debug, Clone)]
pub struct ConstraintDef {
    pub target: PathRef,
    pub constraint_id: Option<Name>,
    pub constraint: Option<ConstraintExpr>,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct PathRef {
    pub segments: Vec<String>,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct Name {
    pub text: String,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub enum ConstraintExpr {
    /// A quoted string: delimiter text or pattern source.
    Literal { text: String, span: Span },
    Number { value: i64, span: Span },
    /// A (possibly dotted) reference to an element, member or keyword.
    Ref(PathRef),
    Sequence(Vec<ConstraintExpr>),
    Precedence(Vec<ConstraintExpr>),
    Alternation(Vec<ConstraintExpr>),
    /// Postfix `*`.
    Many0 { inner: Box<ConstraintExpr>, span: Span },
    /// Postfix `+`.
    Many1 { inner: Box<ConstraintExpr>, span: Span },
    /// Postfix `?`.
    Maybe { inner: Box<ConstraintExpr>, span: Span },
    Group { inner: Box<ConstraintExpr>, span: Span },
}

impl ConstraintExpr {
    pub fn span(&self) -> Span {
        match self {
            ConstraintExpr::Literal { span, .. }
            | ConstraintExpr::Number { span, .. }
            | ConstraintExpr::Many0 { span, .. }
            | ConstraintExpr::Many1 { span, .. }
            | ConstraintExpr::Maybe { span, .. }
            | ConstraintExpr::Group { span, .. } => *span,
            ConstraintExpr::Ref(p) => p.span,
            ConstraintExpr::Sequence(items)
            | ConstraintExpr::Precedence(items)
            | ConstraintExpr::Alternation(items) => items
                .first()
                .map(|f| {
                    items
                        .iter()
                        .fold(f.span(), |acc, item| acc.join(item.span()))
                })
                .unwrap_or(Span::point(0)),
        }
    }
}

// Equality ignores spans throughout, so round-tripping through the renderer
// compares equal.

impl PartialEq for ConstraintDef {
    fn eq(&self, other: &Self) -> bool {
        self.target == other.target
            && self.constraint_id == other.constraint_id
            && self.constraint == other.constraint
    }
}
impl Eq for ConstraintDef {}

impl PartialEq for PathRef {
    fn eq(&self, other: &Self) -> bool {
        self.segments == other.segments
    }
}
impl Eq for PathRef {}

impl PartialEq for Name {
    fn eq(&self, other: &Self) -> bool {
        self.text == other.text
    }
}
impl Eq for Name {}

impl PartialEq for ConstraintExpr {
    fn eq(&self, other: &Self) -> bool {
        use ConstraintExpr::*;
        match (self, other) {
            (Literal { text: a, .. }, Literal { text: b, .. }) => a == b,
            (Number { value: a, .. }, Number { value: b, .. }) => a == b,
            (Ref(a), Ref(b)) => a == b,
            (Sequence(a), Sequence(b))
            | (Precedence(a), Precedence(b))
            | (Alternation(a), Alternation(b)) => a == b,
            (Many0 { inner: a, .. }, Many0 { inner: b, .. })
            | (Many1 { inner: a, .. }, Many1 { inner: b, .. })
            | (Maybe { inner: a, .. }, Maybe { inner: b, .. })
            | (Group { inner: a, .. }, Group { inner: b, .. }) => a == b,
            _ => false,
        }
    }
}
impl Eq for ConstraintExpr {}

impl fmt::Display for ConstraintExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintExpr::Literal { text, .. } => f.write_str(&strings::quote(text)),
            ConstraintExpr::Number { value, .. } => write!(f, "{value}"),
            ConstraintExpr::Ref(p) => f.write_str(&p.segments.join(".")),
            ConstraintExpr::Sequence(items) => join(f, items, " "),
            ConstraintExpr::Precedence(items) => join(f, items, " < "),
            ConstraintExpr::Alternation(items) => join(f, items, " | "),
            ConstraintExpr::Many0 { inner, .. } => write!(f, "{inner}*"),
            ConstraintExpr::Many1 { inner, .. } => write!(f, "{inner}+"),
            ConstraintExpr::Maybe { inner, .. } => write!(f, "{inner}?"),
            ConstraintExpr::Group { inner, .. } => write!(f, "({inner})"),
        }
    }
}

fn join(f: &mut fmt::Formatter<'_>, items: &[ConstraintExpr], sep: &str) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        write!(f, "{item}")?;
    }
    Ok(())
}

/// Renders a document in canonical layout: one definition per line.
/// Assumes parser-shaped expressions (nesting is always through groups), as
/// produced by [`parse_mapping`] or the instance graph converter.
pub fn render_mapping(doc: &MappingDocument) -> String {
    let mut out = String::new();
    for def in &doc.definitions {
        out.push_str(&def.target.segments.join("."));
        if let Some(id) = &def.constraint_id {
            out.push('[');
            out.push_str(&id.text);
            out.push(']');
        }
        if let Some(expr) = &def.constraint {
            out.push_str(": ");
            out.push_str(&expr.to_string());
        }
        out.push('\n');
    }
    out
}
