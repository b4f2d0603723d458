//! Canonical constraint sets: the normalized middle layer between mapping
//! files and grammar derivation.
//!
//! Whatever style a mapping is written in, lowering produces the same flat
//! currency: a map from (element, optional member, constraint kind) to a
//! normalized value, plus an explicit `precedes` relation between elements.
//! Two mappings are equivalent exactly when their canonicalized sets are
//! equal, which is what makes the property/grammar/mixed styles
//! interchangeable and testable against each other.

mod lower;

pub use lower::{lower, model_defaults};

use crate::asm::{ElementKind, Model};
use crate::diag::Diagnostic;
use serde_json::{json, Value};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Every kind of fact a constraint can state. The `Display` form doubles as
/// the constraint id vocabulary of the mapping DSL (`target[prefix]: ...`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ConstraintKind {
    Pattern,
    Value,
    Prefix,
    Suffix,
    Separator,
    Optional,
    Minimum,
    Maximum,
    Associativity,
    Composition,
    Priority,
    Id,
    Reference,
    MemberOrder,
}

impl ConstraintKind {
    /// Maps a constraint id as written in a mapping file. `precedes` is not
    /// here: it feeds the relation, not the entry map.
    pub fn from_id(id: &str) -> Option<ConstraintKind> {
        Some(match id {
            "pattern" => ConstraintKind::Pattern,
            "value" => ConstraintKind::Value,
            "prefix" => ConstraintKind::Prefix,
            "suffix" => ConstraintKind::Suffix,
            "separator" => ConstraintKind::Separator,
            "optional" => ConstraintKind::Optional,
            "minimum" => ConstraintKind::Minimum,
            "maximum" => ConstraintKind::Maximum,
            "associativity" => ConstraintKind::Associativity,
            "composition" => ConstraintKind::Composition,
            "priority" => ConstraintKind::Priority,
            "id" => ConstraintKind::Id,
            "reference" => ConstraintKind::Reference,
            "order" => ConstraintKind::MemberOrder,
            _ => return None,
        })
    }
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ConstraintKind::Pattern => "pattern",
            ConstraintKind::Value => "value",
            ConstraintKind::Prefix => "prefix",
            ConstraintKind::Suffix => "suffix",
            ConstraintKind::Separator => "separator",
            ConstraintKind::Optional => "optional",
            ConstraintKind::Minimum => "minimum",
            ConstraintKind::Maximum => "maximum",
            ConstraintKind::Associativity => "associativity",
            ConstraintKind::Composition => "composition",
            ConstraintKind::Priority => "priority",
            ConstraintKind::Id => "id",
            ConstraintKind::Reference => "reference",
            ConstraintKind::MemberOrder => "order",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum ConstraintValue {
    /// Delimiter texts, in order. Prefix/Suffix/Separator.
    Texts(Vec<String>),
    /// A single pattern source. Pattern.
    Text(String),
    Int(i64),
    /// An explicitly unbounded Maximum.
    Unbounded,
    Bool(bool),
    /// A keyword: associativity/composition modes, value slot names.
    Word(String),
    /// Member names in concrete-syntax order. MemberOrder.
    Members(Vec<String>),
}

impl ConstraintValue {
    fn to_json(&self) -> Value {
        match self {
            ConstraintValue::Texts(ts) => json!({ "texts": ts }),
            ConstraintValue::Text(t) => json!({ "text": t }),
            ConstraintValue::Int(n) => json!({ "int": n }),
            ConstraintValue::Unbounded => json!("unbounded"),
            ConstraintValue::Bool(b) => json!({ "bool": b }),
            ConstraintValue::Word(w) => json!({ "word": w }),
            ConstraintValue::Members(ms) => json!({ "members": ms }),
        }
    }
}

impl fmt::Display for ConstraintValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct EntryKey {
    pub element: String,
    pub member: Option<String>,
    pub kind: ConstraintKind,
}

impl EntryKey {
    pub fn element(element: &str, kind: ConstraintKind) -> EntryKey {
        EntryKey { element: element.to_string(), member: None, kind }
    }

    pub fn member(element: &str, member: &str, kind: ConstraintKind) -> EntryKey {
        EntryKey {
            element: element.to_string(),
            member: Some(member.to_string()),
            kind,
        }
    }
}

impl fmt::Display for EntryKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.member {
            Some(m) => write!(f, "{}.{}[{}]", self.element, m, self.kind),
            None => write!(f, "{}[{}]", self.element, self.kind),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CanonicalConstraintSet {
    pub entries: BTreeMap<EntryKey, ConstraintValue>,
    /// Explicit "binds tighter than" pairs, exactly as declared.
    pub precedes: BTreeSet<(String, String)>,
}

impl CanonicalConstraintSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts, returning the value it replaced if the key was taken.
    pub fn insert(&mut self, key: EntryKey, value: ConstraintValue) -> Option<ConstraintValue> {
        self.entries.insert(key, value)
    }

    pub fn get(&self, key: &EntryKey) -> Option<&ConstraintValue> {
        self.entries.get(key)
    }

    pub fn get_element(&self, element: &str, kind: ConstraintKind) -> Option<&ConstraintValue> {
        self.entries.get(&EntryKey::element(element, kind))
    }

    pub fn get_member(
        &self,
        element: &str,
        member: &str,
        kind: ConstraintKind,
    ) -> Option<&ConstraintValue> {
        self.entries.get(&EntryKey::member(element, member, kind))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty() && self.precedes.is_empty()
    }

    /// Stable JSON form; equal sets serialize identically.
    pub fn to_stable_json(&self) -> Value {
        let entries: Vec<Value> = self
            .entries
            .iter()
            .map(|(k, v)| {
                let mut obj = serde_json::Map::new();
                obj.insert("element".into(), json!(k.element));
                if let Some(m) = &k.member {
                    obj.insert("member".into(), json!(m));
                }
                obj.insert("kind".into(), json!(k.kind.to_string()));
                obj.insert("value".into(), v.to_json());
                Value::Object(obj)
            })
            .collect();
        let precedes: Vec<Value> = self.precedes.iter().map(|(a, b)| json!([a, b])).collect();
        json!({ "entries": entries, "precedes": precedes })
    }
}

/// Transitive closure of a precedes relation. Returns the closed relation
/// and the list of elements involved in cycles (empty when acyclic).
pub fn close_precedes(
    pairs: &BTreeSet<(String, String)>,
) -> (BTreeSet<(String, String)>, Vec<String>) {
    let mut names: BTreeSet<&str> = BTreeSet::new();
    for (a, b) in pairs {
        names.insert(a);
        names.insert(b);
    }
    let names: Vec<&str> = names.into_iter().collect();
    let index: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let n = names.len();
    let mut reach = vec![false; n * n];
    for (a, b) in pairs {
        reach[index[a.as_str()] * n + index[b.as_str()]] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i * n + k] {
                for j in 0..n {
                    if reach[k * n + j] {
                        reach[i * n + j] = true;
                    }
                }
            }
        }
    }
    let mut closed = BTreeSet::new();
    let mut cyclic = Vec::new();
    for i in 0..n {
        if reach[i * n + i] {
            cyclic.push(names[i].to_string());
        }
        for j in 0..n {
            if reach[i * n + j] {
                closed.insert((names[i].to_string(), names[j].to_string()));
            }
        }
    }
    (closed, cyclic)
}

/// Normalizes a set relative to a model:
///
/// * member-level Prefix/Suffix entries are lifted to element level when the
///   element has exactly one member and that member is mandatory and single
///   (the two spellings denote the same concrete syntax);
/// * entries that merely restate model facts (Minimum equal to the declared
///   bound, redundant Optional/Id/Reference, MemberOrder matching declaration
///   order) are dropped;
/// * the precedes relation is transitively closed, with an error on cycles.
pub fn canonicalize(
    set: &CanonicalConstraintSet,
    model: &Model,
) -> (CanonicalConstraintSet, Vec<Diagnostic>) {
    let mut diags = Vec::new();
    let mut out = CanonicalConstraintSet::new();

    for (key, value) in &set.entries {
        let element = match model.element(&key.element) {
            Some(e) => e,
            None => {
                out.insert(key.clone(), value.clone());
                continue;
            }
        };

        // Lift prefix/suffix on the sole mandatory member to element level;
        // the two spellings describe the same concrete syntax. No lift when
        // the element already carries its own entry of that kind: delimiter
        // text lists are alternatives, so the two entries stay distinct.
        if let (Some(member_name), ConstraintKind::Prefix | ConstraintKind::Suffix) =
            (&key.member, key.kind)
        {
            let sole = element.members.len() == 1
                && element.members[0].name == *member_name
                && element.members[0].min == 1
                && element.members[0].max == Some(1);
            let lifted = EntryKey::element(&key.element, key.kind);
            if sole
                && matches!(value, ConstraintValue::Texts(_))
                && !out.entries.contains_key(&lifted)
                && !set.entries.contains_key(&lifted)
            {
                out.insert(lifted, value.clone());
                continue;
            }
        }

        // Drop entries that restate the model.
        let member = key
            .member
            .as_ref()
            .and_then(|m| element.members.iter().find(|md| md.name == *m));
        let redundant = match (key.kind, value, member) {
            (ConstraintKind::Minimum, ConstraintValue::Int(n), Some(md)) => *n as u32 == md.min,
            (ConstraintKind::Maximum, ConstraintValue::Int(n), Some(md)) => {
                md.max == Some(*n as u32)
            }
            (ConstraintKind::Maximum, ConstraintValue::Unbounded, Some(md)) => md.max.is_none(),
            (ConstraintKind::Optional, ConstraintValue::Bool(b), Some(md)) => {
                *b == (md.min == 0 && md.max == Some(1))
            }
            (ConstraintKind::Id, ConstraintValue::Bool(b), Some(md)) => *b == md.is_id,
            (ConstraintKind::Reference, ConstraintValue::Bool(b), Some(md)) => *b == md.is_ref,
            (ConstraintKind::MemberOrder, ConstraintValue::Members(ms), None) => {
                is_subsequence(ms, element.members.iter().map(|m| m.name.as_str()))
            }
            _ => false,
        };
        if !redundant {
            out.insert(key.clone(), value.clone());
        }
    }

    let (closed, cyclic) = close_precedes(&set.precedes);
    if !cyclic.is_empty() {
        diags.push(Diagnostic::error(
            "constraints.precedes-cycle",
            format!("precedes relation is cyclic through {}", cyclic.join(", ")),
        ));
    }
    out.precedes = closed;
    (out, diags)
}

fn is_subsequence<'a>(needle: &[String], hay: impl Iterator<Item = &'a str>) -> bool {
    let mut want = needle.iter();
    let mut next = want.next();
    for h in hay {
        if let Some(w) = next {
            if w == h {
                next = want.next();
            }
        }
    }
    next.is_none()
}

/// Two sets describe the same concrete syntax for `model` iff their
/// canonical forms are equal.
pub fn equivalent(a: &CanonicalConstraintSet, b: &CanonicalConstraintSet, model: &Model) -> bool {
    let (ca, _) = canonicalize(a, model);
    let (cb, _) = canonicalize(b, model);
    ca == cb
}

/// Folds sets left to right; later sets override earlier ones key by key
/// (that is how mappings override model defaults), precedes pairs union.
pub fn merge(sets: &[&CanonicalConstraintSet]) -> CanonicalConstraintSet {
    let mut out = CanonicalConstraintSet::new();
    for set in sets {
        for (k, v) in &set.entries {
            out.entries.insert(k.clone(), v.clone());
        }
        out.precedes.extend(set.precedes.iter().cloned());
    }
    out
}

/// Checks a (typically merged) set against the model. Errors are genuine
/// conflicts: the constraint cannot be honored as stated. Warnings flag
/// constraints that are well-formed but inert.
pub fn check_consistency(model: &Model, set: &CanonicalConstraintSet) -> Vec<Diagnostic> {
    let mut diags = Vec::new();

    for (key, value) in &set.entries {
        let element = match model.element(&key.element) {
            Some(e) => e,
            None => {
                diags.push(Diagnostic::error(
                    "constraints.unknown-element",
                    format!("constraint {key} names unknown element `{}`", key.element),
                ));
                continue;
            }
        };
        let member = match &key.member {
            None => None,
            Some(name) => match element.members.iter().find(|m| m.name == *name) {
                Some(m) => Some(m),
                None => {
                    diags.push(Diagnostic::error(
                        "constraints.unknown-member",
                        format!("constraint {key} names unknown member `{}`", name),
                    ));
                    continue;
                }
            },
        };
        let is_token = matches!(element.kind, ElementKind::Token);

        let conflict = |msg: String| Diagnostic::error("constraints.conflict", msg);
        match (key.kind, value) {
            (ConstraintKind::Pattern, ConstraintValue::Text(src)) => {
                if !is_token {
                    diags.push(conflict(format!(
                        "{key}: pattern on non-token element `{}`",
                        element.name
                    )));
                } else if let Err(e) = crate::pattern::Pattern::compile(src) {
                    diags.push(conflict(format!("{key}: bad pattern: {e}")));
                }
            }
            (ConstraintKind::Value, ConstraintValue::Word(_)) => {
                if !is_token {
                    diags.push(conflict(format!(
                        "{key}: value slot name on non-token element `{}`",
                        element.name
                    )));
                }
            }
            (ConstraintKind::Prefix | ConstraintKind::Suffix, ConstraintValue::Texts(ts)) => {
                if ts.iter().any(String::is_empty) {
                    diags.push(conflict(format!("{key}: empty delimiter text")));
                }
            }
            (ConstraintKind::Separator, ConstraintValue::Texts(ts)) => {
                if ts.iter().any(String::is_empty) {
                    diags.push(conflict(format!("{key}: empty separator text")));
                }
                match member {
                    None => diags.push(conflict(format!(
                        "{key}: separator must target a member, not an element"
                    ))),
                    Some(md) if md.max == Some(1) => diags.push(
                        Diagnostic::warning(
                            "constraints.inert",
                            format!("{key}: separator on a member that cannot repeat"),
                        ),
                    ),
                    _ => {}
                }
            }
            (ConstraintKind::Minimum, ConstraintValue::Int(n)) => match member {
                None => diags.push(conflict(format!("{key}: minimum must target a member"))),
                Some(md) => {
                    if (*n as u32) < md.min {
                        diags.push(conflict(format!(
                            "{key}: minimum {n} is below the declared minimum {}",
                            md.min
                        )));
                    }
                    if let Some(max) = md.max {
                        if *n as u32 > max {
                            diags.push(conflict(format!(
                                "{key}: minimum {n} exceeds the declared maximum {max}"
                            )));
                        }
                    }
                }
            },
            (ConstraintKind::Maximum, ConstraintValue::Int(n)) => match member {
                None => diags.push(conflict(format!("{key}: maximum must target a member"))),
                Some(md) => {
                    if let Some(max) = md.max {
                        if *n as u32 > max {
                            diags.push(conflict(format!(
                                "{key}: maximum {n} is above the declared maximum {max}"
                            )));
                        }
                    }
                    if (*n as u32) < md.min {
                        diags.push(conflict(format!(
                            "{key}: maximum {n} is below the declared minimum {}",
                            md.min
                        )));
                    }
                }
            },
            (ConstraintKind::Maximum, ConstraintValue::Unbounded) => match member {
                None => diags.push(conflict(format!("{key}: maximum must target a member"))),
                Some(md) if md.max.is_some() => diags.push(conflict(format!(
                    "{key}: unbounded repetition, but the model caps it at {}",
                    md.max.unwrap()
                ))),
                _ => {}
            },
            (ConstraintKind::Optional, ConstraintValue::Bool(b)) => match member {
                None => diags.push(conflict(format!("{key}: optional must target a member"))),
                Some(md) => {
                    if *b && md.min > 0 {
                        diags.push(conflict(format!(
                            "{key}: member is mandatory in the model (minimum {})",
                            md.min
                        )));
                    }
                    if *b && md.max != Some(1) {
                        diags.push(conflict(format!(
                            "{key}: optional applies to single members, this one repeats"
                        )));
                    }
                }
            },
            (ConstraintKind::Associativity, ConstraintValue::Word(w)) => {
                if !matches!(w.as_str(), "left" | "right" | "non") {
                    diags.push(conflict(format!(
                        "{key}: associativity must be left, right or non, got `{w}`"
                    )));
                } else if !model.is_self_nesting(&element.name) {
                    diags.push(Diagnostic::warning(
                        "constraints.inert",
                        format!("{key}: element never nests within itself"),
                    ));
                }
            }
            (ConstraintKind::Composition, ConstraintValue::Word(w)) => {
                if !matches!(w.as_str(), "eager" | "lazy") {
                    diags.push(conflict(format!(
                        "{key}: composition must be eager or lazy, got `{w}`"
                    )));
                }
            }
            (ConstraintKind::Priority, ConstraintValue::Int(n)) => {
                if key.member.is_some() {
                    diags.push(conflict(format!("{key}: priority applies to elements")));
                }
                if *n < 0 {
                    diags.push(conflict(format!("{key}: priority must be non-negative")));
                }
            }
            (ConstraintKind::Id | ConstraintKind::Reference, ConstraintValue::Bool(_)) => {
                match member {
                    None => diags.push(conflict(format!("{key}: must target a member"))),
                    Some(md) => {
                        if key.kind == ConstraintKind::Id {
                            let target_is_token = model
                                .element(&md.target)
                                .map(|t| matches!(t.kind, ElementKind::Token))
                                .unwrap_or(false);
                            if !target_is_token {
                                diags.push(conflict(format!(
                                    "{key}: id members must target a token element"
                                )));
                            }
                        }
                    }
                }
            }
            (ConstraintKind::MemberOrder, ConstraintValue::Members(ms)) => {
                let mut seen = BTreeSet::new();
                for m in ms {
                    if element.members.iter().all(|md| md.name != *m) {
                        diags.push(conflict(format!("{key}: `{m}` is not a member")));
                    }
                    if !seen.insert(m) {
                        diags.push(conflict(format!("{key}: `{m}` listed twice")));
                    }
                }
            }
            (kind, value) => {
                diags.push(conflict(format!(
                    "{key}: malformed value {value} for kind {kind}"
                )));
            }
        }
    }

    for (a, b) in &set.precedes {
        for name in [a, b] {
            if model.element(name).is_none() {
                diags.push(Diagnostic::error(
                    "constraints.unknown-element",
                    format!("precedes pair ({a}, {b}) names unknown element `{name}`"),
                ));
            }
        }
    }
    let (_, cyclic) = close_precedes(&set.precedes);
    if !cyclic.is_empty() {
        diags.push(Diagnostic::error(
            "constraints.precedes-cycle",
            format!("precedes relation is cyclic through {}", cyclic.join(", ")),
        ));
    }

    diags
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asm::parse_model;

    fn texts(ts: &[&str]) -> ConstraintValue {
        ConstraintValue::Texts(ts.iter().map(|s| s.to_string()).collect())
    }

    fn small_model() -> Model {
        let src = "\
language t
element Wrap { inner: Item }
element Pair { a: Item  b: Item? }
element List { items: Item+ }
token Item @Pattern(\"[a-z]+\")
";
        let (model, diags) = parse_model(src);
        assert!(diags.is_empty(), "{diags:?}");
        model.unwrap()
    }

    #[test]
    fn closure_is_transitive_and_reports_cycles() {
        let mut pairs = BTreeSet::new();
        pairs.insert(("A".to_string(), "B".to_string()));
        pairs.insert(("B".to_string(), "C".to_string()));
        let (closed, cyclic) = close_precedes(&pairs);
        assert!(cyclic.is_empty());
        assert!(closed.contains(&("A".to_string(), "C".to_string())));
        assert_eq!(closed.len(), 3);

        pairs.insert(("C".to_string(), "A".to_string()));
        let (_, cyclic) = close_precedes(&pairs);
        assert_eq!(cyclic, vec!["A", "B", "C"]);
    }

    #[test]
    fn lift_prefix_suffix_on_sole_member() {
        let model = small_model();
        let mut set = CanonicalConstraintSet::new();
        set.insert(EntryKey::member("Wrap", "inner", ConstraintKind::Prefix), texts(&["("]));
        set.insert(EntryKey::member("Wrap", "inner", ConstraintKind::Suffix), texts(&[")"]));
        let (canon, diags) = canonicalize(&set, &model);
        assert!(diags.is_empty());
        assert_eq!(canon.get_element("Wrap", ConstraintKind::Prefix), Some(&texts(&["("])));
        assert_eq!(canon.get_element("Wrap", ConstraintKind::Suffix), Some(&texts(&[")"])));
        assert!(canon.get_member("Wrap", "inner", ConstraintKind::Prefix).is_none());
    }

    #[test]
    fn lift_does_not_apply_to_multi_member_elements() {
        let model = small_model();
        let mut set = CanonicalConstraintSet::new();
        set.insert(EntryKey::member("Pair", "a", ConstraintKind::Prefix), texts(&["<"]));
        let (canon, _) = canonicalize(&set, &model);
        assert!(canon.get_element("Pair", ConstraintKind::Prefix).is_none());
        assert_eq!(canon.get_member("Pair", "a", ConstraintKind::Prefix), Some(&texts(&["<"])));
    }

    #[test]
    fn lift_keeps_member_entry_when_element_already_delimited() {
        let model = small_model();
        let mut set = CanonicalConstraintSet::new();
        set.insert(EntryKey::element("Wrap", ConstraintKind::Prefix), texts(&["outer"]));
        set.insert(EntryKey::member("Wrap", "inner", ConstraintKind::Prefix), texts(&["in"]));
        set.insert(EntryKey::member("Wrap", "inner", ConstraintKind::Suffix), texts(&["end"]));
        let (canon, _) = canonicalize(&set, &model);
        assert_eq!(canon.get_element("Wrap", ConstraintKind::Prefix), Some(&texts(&["outer"])));
        assert_eq!(
            canon.get_member("Wrap", "inner", ConstraintKind::Prefix),
            Some(&texts(&["in"]))
        );
        // The suffix slot is free, so that one still lifts.
        assert_eq!(canon.get_element("Wrap", ConstraintKind::Suffix), Some(&texts(&["end"])));
        assert!(canon.get_member("Wrap", "inner", ConstraintKind::Suffix).is_none());
    }

    #[test]
    fn redundant_entries_drop() {
        let model = small_model();
        let mut set = CanonicalConstraintSet::new();
        set.insert(EntryKey::member("List", "items", ConstraintKind::Minimum), ConstraintValue::Int(1));
        set.insert(EntryKey::member("List", "items", ConstraintKind::Maximum), ConstraintValue::Unbounded);
        set.insert(EntryKey::member("Pair", "b", ConstraintKind::Optional), ConstraintValue::Bool(true));
        set.insert(
            EntryKey::element("Pair", ConstraintKind::MemberOrder),
            ConstraintValue::Members(vec!["a".into(), "b".into()]),
        );
        let (canon, _) = canonicalize(&set, &model);
        assert!(canon.entries.is_empty(), "{canon:?}");

        // A narrowing bound is a real constraint and must survive.
        let mut set = CanonicalConstraintSet::new();
        set.insert(EntryKey::member("List", "items", ConstraintKind::Maximum), ConstraintValue::Int(5));
        let (canon, _) = canonicalize(&set, &model);
        assert_eq!(
            canon.get_member("List", "items", ConstraintKind::Maximum),
            Some(&ConstraintValue::Int(5))
        );
    }

    #[test]
    fn merge_later_wins_and_unions_precedes() {
        let mut a = CanonicalConstraintSet::new();
        a.insert(EntryKey::element("X", ConstraintKind::Pattern), ConstraintValue::Text("a+".into()));
        a.precedes.insert(("X".into(), "Y".into()));
        let mut b = CanonicalConstraintSet::new();
        b.insert(EntryKey::element("X", ConstraintKind::Pattern), ConstraintValue::Text("b+".into()));
        b.precedes.insert(("Y".into(), "Z".into()));
        let m = merge(&[&a, &b]);
        assert_eq!(
            m.get_element("X", ConstraintKind::Pattern),
            Some(&ConstraintValue::Text("b+".into()))
        );
        assert_eq!(m.precedes.len(), 2);
    }

    #[test]
    fn consistency_flags_widening_bounds() {
        let model = small_model();
        let mut set = CanonicalConstraintSet::new();
        set.insert(EntryKey::member("Pair", "b", ConstraintKind::Minimum), ConstraintValue::Int(0));
        assert!(check_consistency(&model, &set).is_empty());

        // Pair.a is mandatory; asserting minimum 0 widens it.
        let mut set = CanonicalConstraintSet::new();
        set.insert(EntryKey::member("Pair", "a", ConstraintKind::Minimum), ConstraintValue::Int(0));
        let diags = check_consistency(&model, &set);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, "constraints.conflict");

        let mut set = CanonicalConstraintSet::new();
        set.insert(EntryKey::member("Wrap", "inner", ConstraintKind::Maximum), ConstraintValue::Unbounded);
        let diags = check_consistency(&model, &set);
        assert_eq!(diags.len(), 1);
    }

    #[test]
    fn consistency_checks_kind_shapes() {
        let model = small_model();
        let mut set = CanonicalConstraintSet::new();
        set.insert(EntryKey::element("Wrap", ConstraintKind::Pattern), ConstraintValue::Text("a".into()));
        set.insert(EntryKey::element("Item", ConstraintKind::Pattern), ConstraintValue::Text("[".into()));
        set.insert(EntryKey::member("Pair", "a", ConstraintKind::Separator), texts(&[","]));
        set.insert(EntryKey::element("Wrap", ConstraintKind::Associativity), ConstraintValue::Word("up".into()));
        let diags = check_consistency(&model, &set);
        let errors: Vec<_> = diags.iter().filter(|d| d.is_error()).collect();
        // Separator on a non-repeating member is inert, not a conflict.
        assert_eq!(errors.len(), 3, "{diags:?}");
        assert!(diags.iter().any(|d| d.code == "constraints.inert"));
    }

    #[test]
    fn stable_json_is_deterministic() {
        let mut a = CanonicalConstraintSet::new();
        a.insert(EntryKey::element("B", ConstraintKind::Pattern), ConstraintValue::Text("x".into()));
        a.insert(EntryKey::member("A", "m", ConstraintKind::Prefix), texts(&["("]));
        let mut b = CanonicalConstraintSet::new();
        b.insert(EntryKey::member("A", "m", ConstraintKind::Prefix), texts(&["("]));
        b.insert(EntryKey::element("B", ConstraintKind::Pattern), ConstraintValue::Text("x".into()));
        assert_eq!(a.to_stable_json().to_string(), b.to_stable_json().to_string());
    }
}
