//! Abstract syntax models: the element/member structure of a language,
//! independent of any concrete syntax.
//!
//! A model has three kinds of elements. *Tokens* carry text matched by a
//! pattern. *Composites* own an ordered list of typed members, each with a
//! multiplicity. *Alternatives* name a choice between other elements and
//! never appear in instance graphs themselves. Members may be flagged `id`
//! (their token text names the owning instance) or `ref` (their token text
//! refers to some other instance, resolved after parsing).
//!
//! Annotations on elements and members carry default constraints. Structural
//! annotations (`@Optional`, `@Minimum`, `@Maximum`, `@ID`, `@Reference`)
//! fold into the member fields while parsing; the rest stay attached and
//! become the model's default constraint set.

mod parser;
mod render;

pub use parser::parse_model;
pub use render::render_model;

use crate::constraints::ConstraintKind;
use crate::diag::{self, Diagnostic, Span};
use std::collections::BTreeSet;

#[derive(Debug, Clone)]
pub struct Model {
    pub name: String,
    pub skips: Vec<SkipPattern>,
    pub elements: Vec<ElementDef>,
}

#[derive(Debug, Clone)]
pub struct SkipPattern {
    pub pattern: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ElementKind {
    Token,
    Composite,
    Alternative(Vec<String>),
}

#[derive(Debug, Clone)]
pub struct ElementDef {
    pub name: String,
    pub kind: ElementKind,
    pub members: Vec<MemberDef>,
    pub annotations: Vec<AnnotationUse>,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct MemberDef {
    pub name: String,
    pub target: String,
    pub min: u32,
    /// `None` means unbounded.
    pub max: Option<u32>,
    pub is_id: bool,
    pub is_ref: bool,
    pub annotations: Vec<AnnotationUse>,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct AnnotationUse {
    pub kind: ConstraintKind,
    pub value: AnnotationValue,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnnotationValue {
    /// Bare `@Name`.
    Flag,
    Texts(Vec<String>),
    Int(i64),
    Word(String),
}

// Spans are positions, not meaning: equality ignores them so that parsing
// a rendered model compares equal to the original.

impl PartialEq for Model {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.skips == other.skips && self.elements == other.elements
    }
}
impl Eq for Model {}

impl PartialEq for SkipPattern {
    fn eq(&self, other: &Self) -> bool {
        self.pattern == other.pattern
    }
}
impl Eq for SkipPattern {}

impl PartialEq for ElementDef {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.kind == other.kind
            && self.members == other.members
            && self.annotations == other.annotations
    }
}
impl Eq for ElementDef {}

impl PartialEq for MemberDef {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.target == other.target
            && self.min == other.min
            && self.max == other.max
            && self.is_id == other.is_id
            && self.is_ref == other.is_ref
            && self.annotations == other.annotations
    }
}
impl Eq for MemberDef {}

impl PartialEq for AnnotationUse {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.value == other.value
    }
}
impl Eq for AnnotationUse {}

impl Model {
    pub fn element(&self, name: &str) -> Option<&ElementDef> {
        self.elements.iter().find(|e| e.name == name)
    }

    pub fn element_index(&self, name: &str) -> Option<usize> {
        self.elements.iter().position(|e| e.name == name)
    }

    /// The first declared element, which is the default start symbol.
    pub fn default_start(&self) -> Option<&ElementDef> {
        self.elements.first()
    }

    /// Concrete elements an instance typed as `name` can actually be:
    /// alternatives expand transitively, everything else is itself.
    pub fn variant_closure(&self, name: &str) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut stack = vec![name.to_string()];
        let mut seen = BTreeSet::new();
        while let Some(n) = stack.pop() {
            if !seen.insert(n.clone()) {
                continue;
            }
            match self.element(&n).map(|e| &e.kind) {
                Some(ElementKind::Alternative(variants)) => {
                    stack.extend(variants.iter().cloned());
                }
                Some(_) => {
                    out.insert(n);
                }
                None => {}
            }
        }
        out
    }

    /// Whether instances of `name` can contain instances of `name` as a
    /// direct member (the situation associativity is about).
    pub fn is_self_nesting(&self, name: &str) -> bool {
        let Some(element) = self.element(name) else {
            return false;
        };
        element.members.iter().any(|m| {
            m.target == name || self.variant_closure(&m.target).contains(name)
        })
    }
}

impl ElementDef {
    pub fn member(&self, name: &str) -> Option<&MemberDef> {
        self.members.iter().find(|m| m.name == name)
    }

    /// Name of a token's value slot: `@Value(word)` or `value`.
    pub fn value_member_name(&self) -> &str {
        self.annotations
            .iter()
            .find(|a| a.kind == ConstraintKind::Value)
            .and_then(|a| match &a.value {
                AnnotationValue::Word(w) => Some(w.as_str()),
                _ => None,
            })
            .unwrap_or("value")
    }

    pub fn annotation(&self, kind: ConstraintKind) -> Option<&AnnotationUse> {
        self.annotations.iter().find(|a| a.kind == kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathTarget<'m> {
    Element(&'m ElementDef),
    Member(&'m ElementDef, &'m MemberDef),
    /// A token's value slot addressed as `Token.slot`.
    TokenValue(&'m ElementDef),
}

/// Resolves a dotted path (`Element` or `Element.member`) against a model.
pub fn resolve_path<'m>(model: &'m Model, segments: &[String]) -> Result<PathTarget<'m>, Diagnostic> {
    match segments {
        [] => Err(Diagnostic::error("asm.empty-path", "empty path")),
        [element] => match model.element(element) {
            Some(e) => Ok(PathTarget::Element(e)),
            None => Err(unknown_element(model, element)),
        },
        [element, member] => {
            let e = model.element(element).ok_or_else(|| unknown_element(model, element))?;
            if let Some(m) = e.member(member) {
                return Ok(PathTarget::Member(e, m));
            }
            if matches!(e.kind, ElementKind::Token) && e.value_member_name() == member {
                return Ok(PathTarget::TokenValue(e));
            }
            let mut d = Diagnostic::error(
                "asm.unknown-member",
                format!("`{element}` has no member `{member}`"),
            );
            let candidates = e.members.iter().map(|m| m.name.as_str());
            if let Some(n) = diag::nearest(member, candidates) {
                d = d.note(format!("did you mean `{n}`?"));
            } else if matches!(e.kind, ElementKind::Token) {
                d = d.note(format!("the value slot of `{element}` is `{}`", e.value_member_name()));
            }
            Err(d)
        }
        more => Err(Diagnostic::error(
            "asm.deep-path",
            format!(
                "nested member paths are not supported (`{}` has {} segments, at most 2 allowed)",
                more.join("."),
                more.len()
            ),
        )),
    }
}

fn unknown_element(model: &Model, name: &str) -> Diagnostic {
    let mut d = Diagnostic::error("asm.unknown-element", format!("unknown element `{name}`"));
    if let Some(n) = diag::nearest(name, model.elements.iter().map(|e| e.name.as_str())) {
        d = d.note(format!("did you mean `{n}`?"));
    }
    d
}

/// Structural checks beyond what the parser enforces. Errors mean later
/// stages may not assume anything; warnings are advisory.
pub fn validate_model(model: &Model) -> Vec<Diagnostic> {
    let mut diags = Vec::new();

    for skip in &model.skips {
        if let Err(e) = crate::pattern::Pattern::compile(&skip.pattern) {
            diags.push(
                Diagnostic::error("asm.bad-pattern", format!("bad skip pattern: {e}"))
                    .at(skip.span),
            );
        }
    }

    for element in &model.elements {
        validate_annotations(model, element, &mut diags);

        match &element.kind {
            ElementKind::Token => {}
            ElementKind::Composite => {
                for member in &element.members {
                    let target = model.element(&member.target);
                    if target.is_none() {
                        diags.push(
                            Diagnostic::error(
                                "asm.unknown-element",
                                format!(
                                    "member `{}.{}` targets unknown element `{}`",
                                    element.name, member.name, member.target
                                ),
                            )
                            .at(member.span),
                        );
                    }
                    if let Some(max) = member.max {
                        if max == 0 || member.min > max {
                            diags.push(
                                Diagnostic::error(
                                    "asm.bad-multiplicity",
                                    format!(
                                        "member `{}.{}` has impossible multiplicity ({}, {})",
                                        element.name, member.name, member.min, max
                                    ),
                                )
                                .at(member.span),
                            );
                        }
                    }
                    if member.is_id && member.is_ref {
                        diags.push(
                            Diagnostic::error(
                                "asm.id-and-ref",
                                format!(
                                    "member `{}.{}` cannot be both id and ref",
                                    element.name, member.name
                                ),
                            )
                            .at(member.span),
                        );
                    }
                    if member.is_id {
                        let target_is_token = target
                            .map(|t| matches!(t.kind, ElementKind::Token))
                            .unwrap_or(true);
                        if !target_is_token {
                            diags.push(
                                Diagnostic::error(
                                    "asm.id-needs-token",
                                    format!(
                                        "id member `{}.{}` must target a token element",
                                        element.name, member.name
                                    ),
                                )
                                .at(member.span),
                            );
                        }
                    }
                }
            }
            ElementKind::Alternative(variants) => {
                let mut seen = BTreeSet::new();
                for v in variants {
                    if model.element(v).is_none() {
                        diags.push(
                            Diagnostic::error(
                                "asm.unknown-element",
                                format!(
                                    "alternative `{}` lists unknown element `{v}`",
                                    element.name
                                ),
                            )
                            .at(element.span),
                        );
                    }
                    if !seen.insert(v) {
                        diags.push(
                            Diagnostic::warning(
                                "asm.duplicate-variant",
                                format!("alternative `{}` lists `{v}` twice", element.name),
                            )
                            .at(element.span),
                        );
                    }
                }
            }
        }
    }

    // An alternative reachable from itself purely through alternatives can
    // never produce a concrete instance.
    for element in &model.elements {
        if let ElementKind::Alternative(variants) = &element.kind {
            let mut stack: Vec<&str> = variants.iter().map(String::as_str).collect();
            let mut seen: BTreeSet<&str> = BTreeSet::new();
            while let Some(n) = stack.pop() {
                if n == element.name {
                    diags.push(
                        Diagnostic::error(
                            "asm.alternative-cycle",
                            format!(
                                "alternative `{}` reaches itself through its variants",
                                element.name
                            ),
                        )
                        .at(element.span),
                    );
                    break;
                }
                if !seen.insert(n) {
                    continue;
                }
                if let Some(ElementKind::Alternative(vs)) = model.element(n).map(|e| &e.kind) {
                    stack.extend(vs.iter().map(String::as_str));
                }
            }
        }
    }

    diags
}

fn validate_annotations(model: &Model, element: &ElementDef, diags: &mut Vec<Diagnostic>) {
    let is_token = matches!(element.kind, ElementKind::Token);
    let mut check = |owner: &str, anns: &[AnnotationUse], on_member: bool| {
        let mut seen = BTreeSet::new();
        for ann in anns {
            if !seen.insert(ann.kind) {
                diags.push(
                    Diagnostic::error(
                        "asm.duplicate-annotation",
                        format!("`{owner}` repeats the {} annotation", ann.kind),
                    )
                    .at(ann.span),
                );
            }
            let bad_shape = |d: &mut Vec<Diagnostic>| {
                d.push(
                    Diagnostic::error(
                        "asm.bad-annotation",
                        format!("`{owner}`: malformed value for {}", ann.kind),
                    )
                    .at(ann.span),
                );
            };
            match ann.kind {
                ConstraintKind::Pattern => match &ann.value {
                    AnnotationValue::Texts(ts) if ts.len() == 1 => {
                        if !is_token || on_member {
                            diags.push(
                                Diagnostic::error(
                                    "asm.bad-annotation",
                                    format!("`{owner}`: pattern belongs on token elements"),
                                )
                                .at(ann.span),
                            );
                        } else if let Err(e) = crate::pattern::Pattern::compile(&ts[0]) {
                            diags.push(
                                Diagnostic::error(
                                    "asm.bad-pattern",
                                    format!("`{owner}`: bad pattern: {e}"),
                                )
                                .at(ann.span),
                            );
                        }
                    }
                    _ => bad_shape(diags),
                },
                ConstraintKind::Value => match &ann.value {
                    AnnotationValue::Word(_) if is_token && !on_member => {}
                    _ => bad_shape(diags),
                },
                ConstraintKind::Prefix | ConstraintKind::Suffix => match &ann.value {
                    AnnotationValue::Texts(ts) if !ts.is_empty() && ts.iter().all(|t| !t.is_empty()) => {}
                    _ => bad_shape(diags),
                },
                ConstraintKind::Separator => match &ann.value {
                    AnnotationValue::Texts(ts) if !ts.is_empty() && ts.iter().all(|t| !t.is_empty()) => {
                        if !on_member {
                            diags.push(
                                Diagnostic::error(
                                    "asm.bad-annotation",
                                    format!("`{owner}`: separator belongs on members"),
                                )
                                .at(ann.span),
                            );
                        }
                    }
                    _ => bad_shape(diags),
                },
                ConstraintKind::Associativity => match &ann.value {
                    AnnotationValue::Word(w) if matches!(w.as_str(), "left" | "right" | "non") => {
                        if !model.is_self_nesting(&element.name) {
                            diags.push(
                                Diagnostic::warning(
                                    "asm.inert-annotation",
                                    format!(
                                        "`{owner}`: associativity on an element that never nests within itself"
                                    ),
                                )
                                .at(ann.span),
                            );
                        }
                    }
                    _ => bad_shape(diags),
                },
                ConstraintKind::Composition => match &ann.value {
                    AnnotationValue::Word(w) if matches!(w.as_str(), "eager" | "lazy") => {}
                    _ => bad_shape(diags),
                },
                ConstraintKind::Priority => match &ann.value {
                    AnnotationValue::Int(n) if *n >= 0 && !on_member => {}
                    _ => bad_shape(diags),
                },
                // Structural kinds fold into member fields at parse time.
                _ => bad_shape(diags),
            }
        }
    };
    check(&element.name, &element.annotations, false);
    for member in &element.members {
        let owner = format!("{}.{}", element.name, member.name);
        check(&owner, &member.annotations, true);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(src: &str) -> (Model, Vec<Diagnostic>) {
        let (m, diags) = parse_model(src);
        (m.expect("model should parse"), diags)
    }

    #[test]
    fn closure_expands_alternatives() {
        let (m, _) = model(
            "language t\nelement E = A | B\nelement A = C\nelement B { x: C }\ntoken C @Pattern(\"c\")\n",
        );
        let c = m.variant_closure("E");
        assert_eq!(c.iter().collect::<Vec<_>>(), ["B", "C"]);
        assert_eq!(m.variant_closure("B").iter().collect::<Vec<_>>(), ["B"]);
    }

    #[test]
    fn self_nesting_detection() {
        let (m, _) = model(
            "language t\nelement Expr = Add | Lit\nelement Add { l: Expr  r: Expr }\ntoken Lit @Pattern(\"[0-9]+\")\n",
        );
        assert!(m.is_self_nesting("Add"));
        assert!(!m.is_self_nesting("Lit"));
    }

    #[test]
    fn path_resolution() {
        let (m, _) = model(
            "language t\nelement Pair { a: Item  b: Item }\ntoken Item @Pattern(\"x\") @Value(text)\n",
        );
        assert!(matches!(
            resolve_path(&m, &["Pair".into()]),
            Ok(PathTarget::Element(e)) if e.name == "Pair"
        ));
        assert!(matches!(
            resolve_path(&m, &["Pair".into(), "b".into()]),
            Ok(PathTarget::Member(_, mm)) if mm.name == "b"
        ));
        assert!(matches!(
            resolve_path(&m, &["Item".into(), "text".into()]),
            Ok(PathTarget::TokenValue(_))
        ));
        let err = resolve_path(&m, &["Pair".into(), "c".into()]).unwrap_err();
        assert_eq!(err.code, "asm.unknown-member");
        let err = resolve_path(&m, &["Pair".into(), "a".into(), "x".into()]).unwrap_err();
        assert_eq!(err.code, "asm.deep-path");
        let err = resolve_path(&m, &["Pare".into()]).unwrap_err();
        assert!(err.notes.iter().any(|n| n.contains("Pair")));
    }

    #[test]
    fn validate_catches_unknown_targets_and_cycles() {
        let (m, _) = model("language t\nelement A { x: Missing }\n");
        let diags = validate_model(&m);
        assert!(diags.iter().any(|d| d.code == "asm.unknown-element"));

        let (m, _) = model("language t\nelement A = B\nelement B = A\n");
        let diags = validate_model(&m);
        assert!(diags.iter().any(|d| d.code == "asm.alternative-cycle"));
    }

    #[test]
    fn validate_checks_annotation_shapes() {
        let (m, _) = model("language t\nelement A @Priority(x) { m: B }\nelement B { }\n");
        let diags = validate_model(&m);
        assert!(diags.iter().any(|d| d.code == "asm.bad-annotation"));

        let (m, _) = model("language t\ntoken T @Pattern(\"[\")\n");
        let diags = validate_model(&m);
        assert!(diags.iter().any(|d| d.code == "asm.bad-pattern"));
    }

    #[test]
    fn validate_id_member_rules() {
        let (m, _) = model(
            "language t\nelement A { id x: B }\nelement B { }\n",
        );
        let diags = validate_model(&m);
        assert!(diags.iter().any(|d| d.code == "asm.id-needs-token"));
    }
}
