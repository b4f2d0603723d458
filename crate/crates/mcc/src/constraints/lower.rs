//! Lowering: from parsed mapping documents (and model annotations) to
//! canonical constraint sets.
//!
//! Property-like definitions translate almost one-to-one. Grammar-like
//! definitions are walked as small regular expressions over an element's
//! members: literals become delimiters of the member they sit next to,
//! `m (sep m)*` becomes a separator, explicit `? * +` markers become
//! multiplicity assertions, and the member mention order becomes an order
//! assertion. Assertions that merely restate the model are dropped by
//! canonicalization, so only genuinely new facts survive.
//!
//! Constraints naming unknown elements or members are reported as warnings
//! and ignored; they never poison the rest of the document.

use super::{
    canonicalize, CanonicalConstraintSet, ConstraintKind, ConstraintValue, EntryKey,
};
use crate::asm::{
    resolve_path, AnnotationValue, ElementDef, ElementKind, Model, PathTarget,
};
use crate::diag::{Diagnostic, Severity, Span};
use crate::dsl::{ConstraintDef, ConstraintExpr, MappingDocument};

/// The constraint set implied by the model's own annotations. These act as
/// defaults under a mapping file: merge them first, the file's set second.
pub fn model_defaults(model: &Model) -> CanonicalConstraintSet {
    let mut set = CanonicalConstraintSet::new();
    for element in &model.elements {
        for ann in &element.annotations {
            if let Some(value) = annotation_value(ann.kind, &ann.value) {
                set.insert(EntryKey::element(&element.name, ann.kind), value);
            }
        }
        for member in &element.members {
            for ann in &member.annotations {
                if let Some(value) = annotation_value(ann.kind, &ann.value) {
                    set.insert(
                        EntryKey::member(&element.name, &member.name, ann.kind),
                        value,
                    );
                }
            }
        }
    }
    canonicalize(&set, model).0
}

fn annotation_value(kind: ConstraintKind, value: &AnnotationValue) -> Option<ConstraintValue> {
    Some(match (kind, value) {
        (ConstraintKind::Pattern, AnnotationValue::Texts(ts)) if ts.len() == 1 => {
            ConstraintValue::Text(ts[0].clone())
        }
        (_, AnnotationValue::Texts(ts)) => ConstraintValue::Texts(ts.clone()),
        (_, AnnotationValue::Int(n)) => ConstraintValue::Int(*n),
        (_, AnnotationValue::Word(w)) => ConstraintValue::Word(w.clone()),
        (_, AnnotationValue::Flag) => ConstraintValue::Bool(true),
    })
}

/// Lowers a mapping document against a model. The returned set is already
/// canonicalized, so equal-by-meaning documents produce equal sets.
pub fn lower(model: &Model, doc: &MappingDocument) -> (CanonicalConstraintSet, Vec<Diagnostic>) {
    let mut ctx = Lowerer {
        model,
        set: CanonicalConstraintSet::new(),
        diags: Vec::new(),
    };
    for def in &doc.definitions {
        ctx.definition(def);
    }
    let (canon, mut extra) = canonicalize(&ctx.set, model);
    let mut diags = ctx.diags;
    diags.append(&mut extra);
    (canon, diags)
}

struct Lowerer<'m> {
    model: &'m Model,
    set: CanonicalConstraintSet,
    diags: Vec<Diagnostic>,
}

/// One member mention inside a grammar-like definition, with everything the
/// walk has attached to it so far.
struct Occurrence {
    member: String,
    prefix: Vec<String>,
    suffix: Vec<String>,
    separator: Vec<String>,
    min: u32,
    max: Option<u32>,
    /// Whether the mention carries an explicit multiplicity (marker or list
    /// idiom). Plain mentions assert nothing about multiplicity.
    explicit: bool,
    span: Span,
}

impl Occurrence {
    fn plain(member: &str, span: Span) -> Occurrence {
        Occurrence {
            member: member.to_string(),
            prefix: Vec::new(),
            suffix: Vec::new(),
            separator: Vec::new(),
            min: 1,
            max: Some(1),
            explicit: false,
            span,
        }
    }
}

impl<'m> Lowerer<'m> {
    fn warn(&mut self, code: &'static str, message: String, span: Span) {
        self.diags.push(Diagnostic::warning(code, message).at(span));
    }

    /// Resolution failures downgrade to warnings here: the document stays
    /// usable, the offending definition is dropped.
    fn demoted(&mut self, mut diag: Diagnostic, span: Span) {
        diag.severity = Severity::Warning;
        if diag.span.is_none() {
            diag = diag.at(span);
        }
        self.diags.push(diag);
    }

    fn put(&mut self, key: EntryKey, value: ConstraintValue, span: Span) {
        if self.set.entries.contains_key(&key) {
            self.warn(
                "dsl.duplicate-constraint",
                format!("{key} is defined more than once; the last definition wins"),
                span,
            );
        }
        self.set.insert(key, value);
    }

    fn definition(&mut self, def: &ConstraintDef) {
        let target = match resolve_path(self.model, &def.target.segments) {
            Ok(t) => t,
            Err(diag) => {
                self.demoted(diag, def.target.span);
                return;
            }
        };

        match (&def.constraint_id, &def.constraint) {
            (None, None) => {
                self.warn(
                    "dsl.empty-definition",
                    format!(
                        "definition of `{}` has neither a constraint id nor a constraint",
                        def.target.segments.join(".")
                    ),
                    def.span,
                );
            }
            (Some(id), _) => self.keyed(def, target, &id.text),
            (None, Some(expr)) => self.bare(def, target, expr),
        }
    }

    /// `target[id]: value` definitions.
    fn keyed(&mut self, def: &ConstraintDef, target: PathTarget<'m>, id: &str) {
        if id == "precedes" {
            self.precedes_def(def, target);
            return;
        }
        let kind = match ConstraintKind::from_id(id) {
            Some(k) => k,
            None => {
                let mut d = Diagnostic::warning(
                    "dsl.unknown-constraint-id",
                    format!("unknown constraint id `{id}`; definition ignored"),
                )
                .at(def.constraint_id.as_ref().map(|n| n.span).unwrap_or(def.span));
                let known = [
                    "pattern", "value", "prefix", "suffix", "separator", "optional",
                    "minimum", "maximum", "associativity", "composition", "priority",
                    "id", "reference", "order", "precedes",
                ];
                if let Some(n) = crate::diag::nearest(id, known.iter().copied()) {
                    d = d.note(format!("did you mean `{n}`?"));
                }
                self.diags.push(d);
                return;
            }
        };
        let Some(expr) = &def.constraint else {
            self.warn(
                "dsl.bad-constraint-value",
                format!("`[{id}]` needs a value after `:`"),
                def.span,
            );
            return;
        };
        let value = match keyed_value(kind, expr) {
            Ok(v) => v,
            Err(expected) => {
                self.warn(
                    "dsl.bad-constraint-value",
                    format!("`[{id}]` expects {expected}; definition ignored"),
                    expr.span(),
                );
                return;
            }
        };
        let key = match target {
            PathTarget::Element(e) => EntryKey::element(&e.name, kind),
            PathTarget::Member(e, m) => EntryKey::member(&e.name, &m.name, kind),
            // Constraints addressed to a token's value slot describe the
            // token itself.
            PathTarget::TokenValue(e) => EntryKey::element(&e.name, kind),
        };
        self.put(key, value, def.span);
    }

    /// `target[precedes]: A B ...`: the target outranks every listed element.
    fn precedes_def(&mut self, def: &ConstraintDef, target: PathTarget<'m>) {
        let name = match target {
            PathTarget::Element(e) => &e.name,
            PathTarget::Member(..) | PathTarget::TokenValue(..) => {
                self.warn(
                    "dsl.bad-constraint-value",
                    "`[precedes]` applies to elements, not members".to_string(),
                    def.span,
                );
                return;
            }
        };
        let refs = match def.constraint.as_ref().and_then(ref_names) {
            Some(rs) if !rs.is_empty() => rs,
            _ => {
                self.warn(
                    "dsl.bad-constraint-value",
                    "`[precedes]` expects one or more element names".to_string(),
                    def.span,
                );
                return;
            }
        };
        let mut pairs = Vec::new();
        for r in &refs {
            if self.model.element(r).is_none() {
                let d = Diagnostic::error(
                    "asm.unknown-element",
                    format!("unknown element `{r}`"),
                );
                self.demoted(d, def.span);
                return;
            }
            pairs.push((name.clone(), r.clone()));
        }
        self.set.precedes.extend(pairs);
    }

    /// Definitions with no `[id]`: pattern shorthands, precedence chains on
    /// alternatives, and full grammar-like productions on composites.
    fn bare(&mut self, def: &ConstraintDef, target: PathTarget<'m>, expr: &ConstraintExpr) {
        match target {
            PathTarget::TokenValue(e) => self.token_pattern(e, expr),
            PathTarget::Element(e) if matches!(e.kind, ElementKind::Token) => {
                self.token_pattern(e, expr)
            }
            PathTarget::Element(e) => {
                if let ElementKind::Alternative(_) = e.kind {
                    self.precedence_chain(e, expr);
                } else {
                    self.production(def, e, expr);
                }
            }
            PathTarget::Member(e, m) => {
                self.warn(
                    "dsl.bad-constraint-value",
                    format!(
                        "a bare constraint on member `{}.{}` has no meaning; use `[prefix]`, `[suffix]`, ... or a grammar-like definition on `{}`",
                        e.name, m.name, e.name
                    ),
                    def.span,
                );
            }
        }
    }

    /// `Token.value: "regex"` or `Token: "regex"`.
    fn token_pattern(&mut self, element: &ElementDef, expr: &ConstraintExpr) {
        match expr {
            ConstraintExpr::Literal { text, span } => {
                self.put(
                    EntryKey::element(&element.name, ConstraintKind::Pattern),
                    ConstraintValue::Text(text.clone()),
                    *span,
                );
            }
            other => self.warn(
                "dsl.bad-constraint-value",
                format!("a pattern for token `{}` must be a quoted literal", element.name),
                other.span(),
            ),
        }
    }

    /// `Alt: A < B < C` records that A outranks B outranks C.
    fn precedence_chain(&mut self, element: &ElementDef, expr: &ConstraintExpr) {
        let links = match expr {
            ConstraintExpr::Precedence(items) => items,
            _ => {
                self.warn(
                    "dsl.bad-constraint-value",
                    format!(
                        "a bare constraint on alternative `{}` must be a `<` chain of element names",
                        element.name
                    ),
                    expr.span(),
                );
                return;
            }
        };
        let mut names = Vec::new();
        for link in links {
            let Some(name) = ref_name(link) else {
                self.warn(
                    "dsl.bad-constraint-value",
                    "`<` chains may only contain element names".to_string(),
                    link.span(),
                );
                return;
            };
            if self.model.element(name).is_none() {
                let d = Diagnostic::error(
                    "asm.unknown-element",
                    format!("unknown element `{name}`"),
                );
                self.demoted(d, link.span());
                return;
            }
            names.push(name.to_string());
        }
        for pair in names.windows(2) {
            self.set.precedes.insert((pair[0].clone(), pair[1].clone()));
        }
    }

    /// Grammar-like definition on a composite element.
    fn production(&mut self, def: &ConstraintDef, element: &ElementDef, expr: &ConstraintExpr) {
        let mut walk = Walk {
            model: self.model,
            element,
            failure: None,
        };
        let scope = walk.scope(seq_items(expr));
        if let Some(diag) = walk.failure {
            self.demoted(diag, def.span);
            return;
        }

        let occurrences = scope.occurrences;
        if occurrences.is_empty() && !scope.dangling.is_empty() {
            // No members at all: the literals frame the element itself.
            self.put(
                EntryKey::element(&element.name, ConstraintKind::Prefix),
                ConstraintValue::Texts(scope.dangling),
                def.span,
            );
        }

        if occurrences.len() > 1 {
            self.put(
                EntryKey::element(&element.name, ConstraintKind::MemberOrder),
                ConstraintValue::Members(occurrences.iter().map(|o| o.member.clone()).collect()),
                def.span,
            );
        }
        for occ in occurrences {
            let at = |kind| EntryKey::member(&element.name, &occ.member, kind);
            if !occ.prefix.is_empty() {
                self.put(at(ConstraintKind::Prefix), ConstraintValue::Texts(occ.prefix), occ.span);
            }
            if !occ.suffix.is_empty() {
                self.put(at(ConstraintKind::Suffix), ConstraintValue::Texts(occ.suffix), occ.span);
            }
            if !occ.separator.is_empty() {
                self.put(
                    at(ConstraintKind::Separator),
                    ConstraintValue::Texts(occ.separator),
                    occ.span,
                );
            }
            if occ.explicit {
                self.put(at(ConstraintKind::Minimum), ConstraintValue::Int(occ.min as i64), occ.span);
                let max = match occ.max {
                    Some(n) => ConstraintValue::Int(n as i64),
                    None => ConstraintValue::Unbounded,
                };
                self.put(at(ConstraintKind::Maximum), max, occ.span);
            }
        }
    }
}

/// Result of walking one parenthesis scope: the member occurrences found,
/// plus literals left hanging at the end (they become a suffix of the last
/// occurrence, or bubble outward if the scope had no members).
struct Scope {
    occurrences: Vec<Occurrence>,
    dangling: Vec<String>,
}

struct Walk<'m> {
    model: &'m Model,
    element: &'m ElementDef,
    failure: Option<Diagnostic>,
}

impl<'m> Walk<'m> {
    fn fail(&mut self, diag: Diagnostic) {
        if self.failure.is_none() {
            self.failure = Some(diag);
        }
    }

    fn unsupported(&mut self, what: &str, span: Span) {
        self.fail(
            Diagnostic::warning(
                "dsl.unsupported-constraint",
                format!("{what} cannot be expressed as a model constraint; definition ignored"),
            )
            .at(span),
        );
    }

    fn scope(&mut self, items: &[ConstraintExpr]) -> Scope {
        let mut occurrences: Vec<Occurrence> = Vec::new();
        let mut pending: Vec<String> = Vec::new();

        for item in items {
            if self.failure.is_some() {
                break;
            }
            match item {
                ConstraintExpr::Literal { text, .. } => pending.push(text.clone()),
                ConstraintExpr::Ref(path) => {
                    if let Some(mut occ) = self.member_occurrence(path) {
                        occ.prefix = std::mem::take(&mut pending);
                        occurrences.push(occ);
                    }
                }
                ConstraintExpr::Group { inner, .. } => {
                    let sub = self.scope(seq_items(inner));
                    self.splice(&mut occurrences, &mut pending, sub);
                }
                ConstraintExpr::Many0 { inner, span }
                | ConstraintExpr::Many1 { inner, span }
                | ConstraintExpr::Maybe { inner, span } => {
                    let (rep_min, rep_max) = match item {
                        ConstraintExpr::Many0 { .. } => (0, None),
                        ConstraintExpr::Many1 { .. } => (1, None),
                        _ => (0, Some(1)),
                    };
                    self.repeated(&mut occurrences, &mut pending, inner, rep_min, rep_max, *span);
                }
                ConstraintExpr::Sequence(nested) => {
                    // Flattened by the parser in practice; treat inline.
                    let sub = self.scope(nested);
                    self.splice(&mut occurrences, &mut pending, sub);
                }
                ConstraintExpr::Precedence(_) => {
                    self.unsupported("a `<` chain inside a production", item.span())
                }
                ConstraintExpr::Alternation(_) => {
                    self.unsupported("an alternation inside a production", item.span())
                }
                ConstraintExpr::Number { .. } => {
                    self.unsupported("a number inside a production", item.span())
                }
            }
        }

        if !pending.is_empty() {
            if let Some(last) = occurrences.last_mut() {
                last.suffix.append(&mut pending);
            }
        }
        Scope { occurrences, dangling: pending }
    }

    fn splice(
        &mut self,
        occurrences: &mut Vec<Occurrence>,
        pending: &mut Vec<String>,
        mut sub: Scope,
    ) {
        if let Some(first) = sub.occurrences.first_mut() {
            let mut all = std::mem::take(pending);
            all.append(&mut first.prefix);
            first.prefix = all;
            occurrences.append(&mut sub.occurrences);
        }
        pending.append(&mut sub.dangling);
    }

    fn repeated(
        &mut self,
        occurrences: &mut Vec<Occurrence>,
        pending: &mut Vec<String>,
        inner: &ConstraintExpr,
        rep_min: u32,
        rep_max: Option<u32>,
        span: Span,
    ) {
        // `m (sep m)*` and friends: fold into the previous mention of m.
        if let ConstraintExpr::Group { inner: group, .. } = inner {
            if self.try_list_idiom(occurrences, group, rep_min, rep_max) {
                return;
            }
        }
        match inner {
            ConstraintExpr::Ref(path) => {
                if let Some(mut occ) = self.member_occurrence(path) {
                    occ.prefix = std::mem::take(pending);
                    occ.min = rep_min;
                    occ.max = rep_max;
                    occ.explicit = true;
                    occ.span = span;
                    occurrences.push(occ);
                }
            }
            ConstraintExpr::Group { inner: group, .. } => {
                let mut sub = self.scope(seq_items(group));
                if sub.occurrences.is_empty() {
                    self.unsupported("repetition of bare literals", span);
                    return;
                }
                for occ in &mut sub.occurrences {
                    occ.min *= rep_min;
                    occ.max = match (occ.max, rep_max) {
                        (Some(a), Some(b)) => Some(a * b),
                        _ => None,
                    };
                    occ.explicit = true;
                }
                self.splice(occurrences, pending, sub);
            }
            // Stacked markers like `m?*`: multiply the bounds out.
            ConstraintExpr::Many0 { inner: deeper, .. } => {
                self.repeated(occurrences, pending, deeper, 0, None, span)
            }
            ConstraintExpr::Many1 { inner: deeper, .. } => {
                self.repeated(occurrences, pending, deeper, rep_min, None, span)
            }
            ConstraintExpr::Maybe { inner: deeper, .. } => {
                self.repeated(occurrences, pending, deeper, 0, rep_max, span)
            }
            other => self.unsupported("this repetition", other.span()),
        }
    }

    /// Recognizes `(LIT... m)` repeated right after a plain mention of `m`.
    fn try_list_idiom(
        &mut self,
        occurrences: &mut [Occurrence],
        group: &ConstraintExpr,
        rep_min: u32,
        rep_max: Option<u32>,
    ) -> bool {
        let items = seq_items(group);
        if items.len() < 2 {
            return false;
        }
        let (seps, last) = items.split_at(items.len() - 1);
        let mut sep_texts = Vec::new();
        for s in seps {
            match s {
                ConstraintExpr::Literal { text, .. } => sep_texts.push(text.clone()),
                _ => return false,
            }
        }
        let Some(member) = ref_name(&last[0]) else {
            return false;
        };
        let Some(prev) = occurrences.last_mut() else {
            return false;
        };
        let foldable = prev.member == member
            && !prev.explicit
            && prev.suffix.is_empty()
            && prev.separator.is_empty();
        if !foldable {
            return false;
        }
        prev.separator = sep_texts;
        prev.min = 1 + rep_min;
        prev.max = rep_max.map(|r| 1 + r);
        prev.explicit = true;
        true
    }

    fn member_occurrence(&mut self, path: &crate::dsl::PathRef) -> Option<Occurrence> {
        if path.segments.len() != 1 {
            self.unsupported("a dotted path inside a production", path.span);
            return None;
        }
        let name = &path.segments[0];
        if self.element.member(name).is_none() {
            let mut d = Diagnostic::error(
                "asm.unknown-member",
                format!("`{}` has no member `{name}`", self.element.name),
            )
            .at(path.span);
            let members = self.element.members.iter().map(|m| m.name.as_str());
            if let Some(n) = crate::diag::nearest(name, members) {
                d = d.note(format!("did you mean `{n}`?"));
            } else if self.model.element(name).is_some() {
                d = d.note(format!(
                    "`{name}` is an element; productions refer to members of `{}`",
                    self.element.name
                ));
            }
            self.fail(d);
            return None;
        }
        Some(Occurrence::plain(name, path.span))
    }
}

fn seq_items(expr: &ConstraintExpr) -> &[ConstraintExpr] {
    match expr {
        ConstraintExpr::Sequence(items) => items,
        other => std::slice::from_ref(other),
    }
}

fn ref_name(expr: &ConstraintExpr) -> Option<&str> {
    match expr {
        ConstraintExpr::Ref(p) if p.segments.len() == 1 => Some(&p.segments[0]),
        _ => None,
    }
}

/// `A` or `A B C`, all single-segment references.
fn ref_names(expr: &ConstraintExpr) -> Option<Vec<String>> {
    match expr {
        ConstraintExpr::Ref(_) => ref_name(expr).map(|n| vec![n.to_string()]),
        ConstraintExpr::Sequence(items) => items
            .iter()
            .map(|i| ref_name(i).map(str::to_string))
            .collect(),
        _ => None,
    }
}

fn keyed_value(kind: ConstraintKind, expr: &ConstraintExpr) -> Result<ConstraintValue, &'static str> {
    match kind {
        ConstraintKind::Prefix | ConstraintKind::Suffix | ConstraintKind::Separator => {
            literal_texts(expr)
                .filter(|ts| !ts.is_empty())
                .map(ConstraintValue::Texts)
                .ok_or("one or more quoted delimiter texts")
        }
        ConstraintKind::Pattern => match expr {
            ConstraintExpr::Literal { text, .. } => Ok(ConstraintValue::Text(text.clone())),
            _ => Err("a quoted pattern"),
        },
        ConstraintKind::Value => ref_name(expr)
            .map(|w| ConstraintValue::Word(w.to_string()))
            .ok_or("a member name"),
        ConstraintKind::Optional | ConstraintKind::Id | ConstraintKind::Reference => {
            match ref_name(expr) {
                Some("true") => Ok(ConstraintValue::Bool(true)),
                Some("false") => Ok(ConstraintValue::Bool(false)),
                _ => Err("`true` or `false`"),
            }
        }
        ConstraintKind::Minimum => match expr {
            ConstraintExpr::Number { value, .. } if *value >= 0 => Ok(ConstraintValue::Int(*value)),
            _ => Err("a non-negative number"),
        },
        ConstraintKind::Maximum => match expr {
            ConstraintExpr::Number { value, .. } if *value >= 0 => Ok(ConstraintValue::Int(*value)),
            _ if ref_name(expr) == Some("unbounded") => Ok(ConstraintValue::Unbounded),
            _ => Err("a non-negative number or `unbounded`"),
        },
        ConstraintKind::Priority => match expr {
            ConstraintExpr::Number { value, .. } if *value >= 0 => Ok(ConstraintValue::Int(*value)),
            _ => Err("a non-negative number"),
        },
        ConstraintKind::Associativity => match ref_name(expr) {
            Some(w @ ("left" | "right" | "non")) => Ok(ConstraintValue::Word(w.to_string())),
            _ => Err("`left`, `right` or `non`"),
        },
        ConstraintKind::Composition => match ref_name(expr) {
            Some(w @ ("eager" | "lazy")) => Ok(ConstraintValue::Word(w.to_string())),
            _ => Err("`eager` or `lazy`"),
        },
        ConstraintKind::MemberOrder => ref_names(expr)
            .filter(|ns| !ns.is_empty())
            .map(ConstraintValue::Members)
            .ok_or("a list of member names"),
    }
}

fn literal_texts(expr: &ConstraintExpr) -> Option<Vec<String>> {
    match expr {
        ConstraintExpr::Literal { text, .. } => Some(vec![text.clone()]),
        ConstraintExpr::Group { inner, .. } => literal_texts(inner),
        ConstraintExpr::Sequence(items) => items
            .iter()
            .map(|i| match i {
                ConstraintExpr::Literal { text, .. } => Some(text.clone()),
                _ => None,
            })
            .collect(),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asm::parse_model;
    use crate::constraints::{check_consistency, equivalent};
    use crate::diag::{error_count, has_errors, warning_count};
    use crate::dsl::parse_mapping;

    fn mini() -> Model {
        let src = "\
language mini
element Def {
    target: Name
    tag: Word?
    body: Name?
}
element Name { parts: Word+ }
element Wrap { inner: Name }
element Choice = Def | Wrap | Name
token Word @Pattern(\"[a-z]+\")
";
        let (model, diags) = parse_model(src);
        assert!(diags.is_empty(), "{diags:?}");
        model.unwrap()
    }

    fn lowered(model: &Model, src: &str) -> (CanonicalConstraintSet, Vec<Diagnostic>) {
        let (doc, diags) = parse_mapping(src, false);
        assert!(!has_errors(&diags), "{diags:?}");
        lower(model, &doc)
    }

    fn texts(ts: &[&str]) -> ConstraintValue {
        ConstraintValue::Texts(ts.iter().map(|s| s.to_string()).collect())
    }

    #[test]
    fn property_like_definitions() {
        let model = mini();
        let (set, diags) = lowered(
            &model,
            "Def.tag[prefix]: \"[\"\nDef.tag[suffix]: \"]\"\nName.parts[separator]: \".\"\nWord.value: \"[a-z]+\"\n",
        );
        assert!(diags.is_empty(), "{diags:?}");
        assert_eq!(set.get_member("Def", "tag", ConstraintKind::Prefix), Some(&texts(&["["])));
        assert_eq!(set.get_member("Def", "tag", ConstraintKind::Suffix), Some(&texts(&["]"])));
        assert_eq!(
            set.get_member("Name", "parts", ConstraintKind::Separator),
            Some(&texts(&["."]))
        );
        assert_eq!(
            set.get_element("Word", ConstraintKind::Pattern),
            Some(&ConstraintValue::Text("[a-z]+".into()))
        );
        assert_eq!(set.entries.len(), 4);
    }

    #[test]
    fn grammar_like_production_with_optional_groups() {
        let model = mini();
        let (set, diags) = lowered(
            &model,
            "Def: target (\"[\" tag \"]\")? (\":\" body)?\n",
        );
        assert!(diags.is_empty(), "{diags:?}");
        // Delimiters attach to the members inside each group; redundant
        // multiplicity and order assertions vanish in canonicalization.
        assert_eq!(set.get_member("Def", "tag", ConstraintKind::Prefix), Some(&texts(&["["])));
        assert_eq!(set.get_member("Def", "tag", ConstraintKind::Suffix), Some(&texts(&["]"])));
        assert_eq!(set.get_member("Def", "body", ConstraintKind::Prefix), Some(&texts(&[":"])));
        assert_eq!(set.entries.len(), 3, "{set:?}");
    }

    #[test]
    fn list_idiom_becomes_separator() {
        let model = mini();
        let (set, diags) = lowered(&model, "Name: parts (\".\" parts)*\n");
        assert!(diags.is_empty(), "{diags:?}");
        assert_eq!(
            set.get_member("Name", "parts", ConstraintKind::Separator),
            Some(&texts(&["."]))
        );
        assert_eq!(set.entries.len(), 1, "{set:?}");
    }

    #[test]
    fn contradicting_multiplicity_survives_and_conflicts() {
        // Same production as above, but against a model where `tag` is
        // mandatory: the `?` becomes a real Minimum=0 assertion and exactly
        // one conflict.
        let src = "\
language mini2
element Def {
    target: Name
    tag: Word
    body: Name?
}
element Name { parts: Word+ }
token Word @Pattern(\"[a-z]+\")
";
        let (model, _) = parse_model(src);
        let model = model.unwrap();
        let (set, diags) = lowered(&model, "Def: target (\"[\" tag \"]\")? (\":\" body)?\n");
        assert!(diags.is_empty(), "{diags:?}");
        assert_eq!(
            set.get_member("Def", "tag", ConstraintKind::Minimum),
            Some(&ConstraintValue::Int(0))
        );
        let conflicts: Vec<_> = check_consistency(&model, &set)
            .into_iter()
            .filter(|d| d.code == "constraints.conflict")
            .collect();
        assert_eq!(conflicts.len(), 1, "{conflicts:?}");
    }

    #[test]
    fn member_order_kept_only_when_reordered() {
        let model = mini();
        let (set, _) = lowered(&model, "Def: target (\":\" body)? (\"[\" tag \"]\")?\n");
        assert_eq!(
            set.get_element("Def", ConstraintKind::MemberOrder),
            Some(&ConstraintValue::Members(vec![
                "target".into(),
                "body".into(),
                "tag".into()
            ]))
        );
    }

    #[test]
    fn property_and_grammar_styles_lower_equally() {
        let model = mini();
        let (a, _) = lowered(&model, "Wrap[prefix]: \"(\"\nWrap[suffix]: \")\"\n");
        let (b, _) = lowered(&model, "Wrap: \"(\" inner \")\"\n");
        assert_eq!(a, b, "\n{a:?}\nvs\n{b:?}");
        assert!(equivalent(&a, &b, &model));
    }

    #[test]
    fn precedes_chain_and_pairs_agree() {
        let model = mini();
        let (a, da) = lowered(&model, "Choice: Def < Wrap < Name\n");
        let (b, db) = lowered(&model, "Def[precedes]: Wrap Name\nWrap[precedes]: Name\n");
        assert!(da.is_empty() && db.is_empty(), "{da:?} {db:?}");
        assert_eq!(a.precedes, b.precedes);
        assert_eq!(a.precedes.len(), 3);
        assert!(a.precedes.contains(&("Def".into(), "Name".into())));
    }

    #[test]
    fn unknown_member_is_one_warning_and_ignored() {
        let model = mini();
        let (set, diags) = lowered(&model, "Def.missing[prefix]: \"x\"\n");
        assert!(set.is_empty(), "{set:?}");
        assert_eq!(error_count(&diags), 0);
        assert_eq!(warning_count(&diags), 1);
        assert_eq!(diags[0].code, "asm.unknown-member");

        // Same inside a grammar-like walk.
        let (set, diags) = lowered(&model, "Def: target missing\n");
        assert!(set.is_empty());
        assert_eq!((error_count(&diags), warning_count(&diags)), (0, 1));
    }

    #[test]
    fn unknown_constraint_id_is_one_warning_and_ignored() {
        let model = mini();
        let (set, diags) = lowered(&model, "Def.tag[prefics]: \"[\"\n");
        assert!(set.is_empty());
        assert_eq!((error_count(&diags), warning_count(&diags)), (0, 1));
        assert_eq!(diags[0].code, "dsl.unknown-constraint-id");
        assert!(diags[0].notes.iter().any(|n| n.contains("prefix")));
    }

    #[test]
    fn duplicate_keys_warn_and_last_wins() {
        let model = mini();
        let (set, diags) = lowered(&model, "Def.tag[prefix]: \"[\"\nDef.tag[prefix]: \"<\"\n");
        assert_eq!(set.get_member("Def", "tag", ConstraintKind::Prefix), Some(&texts(&["<"])));
        assert!(diags.iter().any(|d| d.code == "dsl.duplicate-constraint"));
    }

    #[test]
    fn bare_definition_warns() {
        let model = mini();
        let (set, diags) = lowered(&model, "Def\n");
        assert!(set.is_empty());
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, "dsl.empty-definition");
    }

    #[test]
    fn keyword_values() {
        let model = mini();
        let (set, diags) = lowered(
            &model,
            "Def[composition]: eager\nDef[priority]: 3\nWrap[associativity]: left\nDef.tag[optional]: true\n",
        );
        assert!(diags.is_empty(), "{diags:?}");
        assert_eq!(
            set.get_element("Def", ConstraintKind::Composition),
            Some(&ConstraintValue::Word("eager".into()))
        );
        assert_eq!(
            set.get_element("Def", ConstraintKind::Priority),
            Some(&ConstraintValue::Int(3))
        );
        // `tag` is already optional in the model, so the assertion drops out.
        assert!(set.get_member("Def", "tag", ConstraintKind::Optional).is_none());
    }

    #[test]
    fn defaults_come_from_annotations() {
        let src = "\
language annotated
element List @Prefix(\"{\") @Suffix(\"}\") {
    items: Item* @Separator(\",\")
}
token Item @Pattern(\"[0-9]+\") @Value(digits)
";
        let (model, diags) = parse_model(src);
        assert!(diags.is_empty(), "{diags:?}");
        let model = model.unwrap();
        let set = model_defaults(&model);
        assert_eq!(set.get_element("List", ConstraintKind::Prefix), Some(&texts(&["{"])));
        assert_eq!(set.get_element("List", ConstraintKind::Suffix), Some(&texts(&["}"])));
        assert_eq!(
            set.get_member("List", "items", ConstraintKind::Separator),
            Some(&texts(&[","]))
        );
        assert_eq!(
            set.get_element("Item", ConstraintKind::Pattern),
            Some(&ConstraintValue::Text("[0-9]+".into()))
        );
        assert_eq!(
            set.get_element("Item", ConstraintKind::Value),
            Some(&ConstraintValue::Word("digits".into()))
        );
    }

    #[test]
    fn trailing_literal_after_sole_member_lifts_to_element() {
        let model = mini();
        let (a, _) = lowered(&model, "Wrap: inner \"!\"\n");
        let (b, _) = lowered(&model, "Wrap[suffix]: \"!\"\n");
        assert_eq!(a, b);
    }
}
