//! Concrete syntax derivation.
//!
//! `derive_grammar` turns a model plus a canonical constraint set into an
//! executable [`Grammar`]: token specs for the lexer, productions for the
//! parser, and the disambiguation data (precedes pairs, associativity,
//! composition) the forest filters consume.
//!
//! Shape of the translation, per element:
//!
//! - token: one [`TokenSpec`]; its pattern must be present in the set.
//! - alternative: one pass-through production per variant, ordered so that
//!   tighter-binding variants come first.
//! - composite: one production `E ::= prefix members... suffix`. Optional
//!   members become an `E.m.opt` helper nonterminal, repeated members a
//!   left-recursive `E.m.list` helper with the separator between steps.
//!
//! Delimiter literals become their own tokens with lex priority 1 so that
//! keywords win against identifier-shaped patterns of equal length.

pub mod export;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::asm::{ElementDef, ElementKind, MemberDef, Model};
use crate::constraints::{
    close_precedes, CanonicalConstraintSet, ConstraintKind, ConstraintValue,
};
use crate::diag::{nearest, Diagnostic};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Symbol {
    Token(String),
    Nonterminal(String),
}

impl Symbol {
    pub fn name(&self) -> &str {
        match self {
            Symbol::Token(n) | Symbol::Nonterminal(n) => n,
        }
    }
}

/// What the symbol at an rhs position contributes to the instance built
/// from the production.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Role {
    /// Punctuation; dropped when instances are built.
    Delim,
    /// Fills (or appends to) the named member.
    Member(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum ProductionKind {
    /// Recognizing this production builds an instance of the element.
    Element(String),
    /// One arm of an alternative element; the single child passes through.
    Variant { alternative: String, variant: String },
    /// Plumbing for an optional or repeated member; children splice into
    /// the enclosing instance.
    Helper { element: String, member: String },
    /// Plumbing for a delimiter with several spellings; the whole subtree
    /// is punctuation.
    Delims,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Production {
    pub lhs: String,
    pub rhs: Vec<Symbol>,
    /// Aligned with `rhs` for element and helper productions; empty for
    /// variant and delims productions.
    pub roles: Vec<Role>,
    pub kind: ProductionKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TokenSpec {
    pub name: String,
    pub pattern: String,
    /// Fixed spelling for delimiter and keyword tokens. The lexer matches
    /// the text directly instead of compiling the pattern.
    pub literal: Option<String>,
    /// Lexing tie-break on equal match length: higher wins, then earlier
    /// declaration.
    pub priority: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Grammar {
    pub tokens: Vec<TokenSpec>,
    pub skips: Vec<String>,
    pub productions: Vec<Production>,
    pub start: String,
    /// Transitively closed: (tighter, looser).
    pub precedes: BTreeSet<(String, String)>,
    pub associativity: BTreeMap<String, String>,
    pub composition: BTreeMap<String, String>,
    /// Raw priority numbers; same number means same binding strength,
    /// which matters to the associativity filter.
    pub priorities: BTreeMap<String, i64>,
}

impl Grammar {
    pub fn token(&self, name: &str) -> Option<&TokenSpec> {
        self.tokens.iter().find(|t| t.name == name)
    }

    pub fn is_token(&self, name: &str) -> bool {
        self.token(name).is_some()
    }

    pub fn productions_for<'g>(&'g self, lhs: &'g str) -> impl Iterator<Item = &'g Production> {
        self.productions.iter().filter(move |p| p.lhs == lhs)
    }

    /// Symbols used on some rhs (or as start) without a token spec or a
    /// production. A derived grammar must have none.
    pub fn undefined_symbols(&self) -> Vec<String> {
        let defined: BTreeSet<&str> = self
            .tokens
            .iter()
            .map(|t| t.name.as_str())
            .chain(self.productions.iter().map(|p| p.lhs.as_str()))
            .collect();
        let mut missing = BTreeSet::new();
        for p in &self.productions {
            for s in &p.rhs {
                if !defined.contains(s.name()) {
                    missing.insert(s.name().to_string());
                }
            }
        }
        if !defined.contains(self.start.as_str()) {
            missing.insert(self.start.clone());
        }
        missing.into_iter().collect()
    }
}

pub fn derive_grammar(
    model: &Model,
    set: &CanonicalConstraintSet,
    start: Option<&str>,
) -> (Grammar, Vec<Diagnostic>) {
    let mut d = Derive {
        model,
        set,
        diags: Vec::new(),
        productions: Vec::new(),
        pending: Vec::new(),
        literals: BTreeSet::new(),
        delim_nts: BTreeSet::new(),
    };

    let start_name = match start {
        Some(s) => {
            if model.element(s).is_none() {
                let mut diag = Diagnostic::error(
                    "csm.unknown-start",
                    format!("start symbol `{s}` is not an element of `{}`", model.name),
                );
                if let Some(n) = nearest(s, model.elements.iter().map(|e| e.name.as_str())) {
                    diag = diag.note(format!("did you mean `{n}`?"));
                }
                d.diags.push(diag);
            }
            s.to_string()
        }
        None => match model.default_start() {
            Some(e) => e.name.clone(),
            None => {
                d.diags.push(Diagnostic::error(
                    "csm.empty-model",
                    format!("model `{}` declares no elements", model.name),
                ));
                String::new()
            }
        },
    };

    let mut tokens = Vec::new();
    for element in &model.elements {
        match &element.kind {
            ElementKind::Token => {
                if let Some(spec) = d.token_spec(element) {
                    tokens.push(spec);
                }
            }
            ElementKind::Alternative(variants) => d.alternative(element, variants),
            ElementKind::Composite => d.composite(element),
        }
        d.productions.append(&mut d.pending);
    }
    for text in &d.literals {
        tokens.push(TokenSpec {
            name: crate::strings::quote(text),
            pattern: literal_pattern(text),
            literal: Some(text.clone()),
            priority: 1,
        });
    }

    let (precedes, associativity, composition) = d.disambiguation();
    let mut priorities = BTreeMap::new();
    for (key, value) in &set.entries {
        if key.member.is_none() && key.kind == ConstraintKind::Priority {
            if let ConstraintValue::Int(n) = value {
                priorities.insert(key.element.clone(), *n);
            }
        }
    }

    let mut grammar = Grammar {
        tokens,
        skips: model.skips.iter().map(|s| s.pattern.clone()).collect(),
        productions: d.productions,
        start: start_name,
        precedes,
        associativity,
        composition,
        priorities,
    };
    let mut diags = d.diags;
    warn_unreachable(model, &grammar, &mut diags);
    grammar.productions.shrink_to_fit();
    (grammar, diags)
}

/// A pattern source that matches exactly `text`.
fn literal_pattern(text: &str) -> String {
    let mut out = String::new();
    for c in text.chars() {
        if !c.is_alphanumeric() && c != '_' {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

struct Derive<'a> {
    model: &'a Model,
    set: &'a CanonicalConstraintSet,
    diags: Vec<Diagnostic>,
    productions: Vec<Production>,
    /// Helper productions for the element currently being translated; kept
    /// after its main production so exports read top-down.
    pending: Vec<Production>,
    literals: BTreeSet<String>,
    delim_nts: BTreeSet<String>,
}

impl<'a> Derive<'a> {
    fn token_spec(&mut self, element: &ElementDef) -> Option<TokenSpec> {
        let pattern = match self.set.get_element(&element.name, ConstraintKind::Pattern) {
            Some(ConstraintValue::Text(p)) => p.clone(),
            Some(ConstraintValue::Texts(ts)) if ts.len() == 1 => ts[0].clone(),
            Some(other) => {
                self.diags.push(
                    Diagnostic::error(
                        "csm.missing-pattern",
                        format!(
                            "token `{}` has a malformed pattern constraint ({other:?})",
                            element.name
                        ),
                    )
                    .at(element.span),
                );
                return None;
            }
            None => {
                self.diags.push(
                    Diagnostic::error(
                        "csm.missing-pattern",
                        format!(
                            "token `{}` has no pattern; add @Pattern to the model or a \
                             `{}: \"...\"` mapping constraint",
                            element.name, element.name
                        ),
                    )
                    .at(element.span),
                );
                return None;
            }
        };
        for kind in [ConstraintKind::Prefix, ConstraintKind::Suffix] {
            if self.set.get_element(&element.name, kind).is_some() {
                self.diags.push(
                    Diagnostic::error(
                        "csm.unsupported",
                        format!(
                            "{kind} on token `{}` is not supported; wrap it in a composite",
                            element.name
                        ),
                    )
                    .at(element.span),
                );
            }
        }
        let priority = match self.set.get_element(&element.name, ConstraintKind::Priority) {
            Some(ConstraintValue::Int(n)) => *n,
            _ => 0,
        };
        Some(TokenSpec { name: element.name.clone(), pattern, literal: None, priority })
    }

    fn alternative(&mut self, element: &ElementDef, variants: &[String]) {
        for v in variants {
            if self.model.element(v).is_none() {
                let mut diag = Diagnostic::error(
                    "csm.unknown-variant",
                    format!("`{}` has an undeclared variant `{v}`", element.name),
                )
                .at(element.span);
                if let Some(n) = nearest(v, self.model.elements.iter().map(|e| e.name.as_str())) {
                    diag = diag.note(format!("did you mean `{n}`?"));
                }
                self.diags.push(diag);
            }
        }
        for v in self.order_variants(variants) {
            self.productions.push(Production {
                lhs: element.name.clone(),
                rhs: vec![self.symbol_for(&v)],
                roles: Vec::new(),
                kind: ProductionKind::Variant {
                    alternative: element.name.clone(),
                    variant: v,
                },
            });
        }
    }

    /// Variants sorted so tighter-binding ones come first; declaration
    /// order breaks ties. Priorities have not been folded into `precedes`
    /// yet at this point, so consult both.
    fn order_variants(&self, variants: &[String]) -> Vec<String> {
        let tighter = |a: &str, b: &str| -> bool {
            if self.set.precedes.contains(&(a.to_string(), b.to_string())) {
                return true;
            }
            match (self.priority_of(a), self.priority_of(b)) {
                (Some(x), Some(y)) => x < y,
                _ => false,
            }
        };
        let mut remaining: Vec<String> = variants.to_vec();
        let mut out = Vec::new();
        while !remaining.is_empty() {
            let pick = remaining
                .iter()
                .position(|v| !remaining.iter().any(|u| u != v && tighter(u, v)))
                .unwrap_or(0);
            out.push(remaining.remove(pick));
        }
        out
    }

    fn priority_of(&self, element: &str) -> Option<i64> {
        match self.set.get_element(element, ConstraintKind::Priority) {
            Some(ConstraintValue::Int(n)) => Some(*n),
            _ => None,
        }
    }

    fn composite(&mut self, element: &ElementDef) {
        let mut rhs = Vec::new();
        let mut roles = Vec::new();
        self.push_delims(&mut rhs, &mut roles, self.element_texts(element, ConstraintKind::Prefix));
        for name in self.member_order(element) {
            let member = element.member(&name).expect("ordered member exists");
            self.member_occurrence(element, member, &mut rhs, &mut roles);
        }
        self.push_delims(&mut rhs, &mut roles, self.element_texts(element, ConstraintKind::Suffix));
        self.productions.push(Production {
            lhs: element.name.clone(),
            rhs,
            roles,
            kind: ProductionKind::Element(element.name.clone()),
        });
    }

    /// Member names in concrete order: a MemberOrder entry if present,
    /// declaration order otherwise. Names missing from the entry keep
    /// their declared position at the end; unknown names were already
    /// rejected by the consistency check and are skipped here.
    fn member_order(&self, element: &ElementDef) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(ConstraintValue::Members(names)) =
            self.set.get_element(&element.name, ConstraintKind::MemberOrder)
        {
            for n in names {
                if element.member(n).is_some() && !out.contains(n) {
                    out.push(n.clone());
                }
            }
        }
        for m in &element.members {
            if !out.contains(&m.name) {
                out.push(m.name.clone());
            }
        }
        out
    }

    fn member_occurrence(
        &mut self,
        element: &ElementDef,
        member: &MemberDef,
        rhs: &mut Vec<Symbol>,
        roles: &mut Vec<Role>,
    ) {
        let (min, max) = self.effective_bounds(element, member);
        if max == Some(0) {
            return;
        }
        let Some(item) = self.item_symbol(element, member) else {
            return;
        };
        let pre = self.member_texts(element, member, ConstraintKind::Prefix);
        let suf = self.member_texts(element, member, ConstraintKind::Suffix);
        let sep = self.member_texts(element, member, ConstraintKind::Separator);
        let role = Role::Member(member.name.clone());

        if (min, max) == (1, Some(1)) {
            self.push_delims(rhs, roles, pre);
            rhs.push(item);
            roles.push(role);
            self.push_delims(rhs, roles, suf);
            return;
        }

        // The body a present member expands to: the item itself, or the
        // nonempty list helper when it may repeat.
        let body = if max == Some(1) {
            item
        } else {
            self.list_helper(element, member, item, &sep, min.max(1), max)
        };

        if min == 0 {
            let opt = format!("{}.{}.opt", element.name, member.name);
            let mut body_rhs = Vec::new();
            let mut body_roles = Vec::new();
            self.push_delims(&mut body_rhs, &mut body_roles, pre);
            body_rhs.push(body);
            body_roles.push(role.clone());
            self.push_delims(&mut body_rhs, &mut body_roles, suf);
            let kind = ProductionKind::Helper {
                element: element.name.clone(),
                member: member.name.clone(),
            };
            self.pending.push(Production {
                lhs: opt.clone(),
                rhs: Vec::new(),
                roles: Vec::new(),
                kind: kind.clone(),
            });
            self.pending.push(Production { lhs: opt.clone(), rhs: body_rhs, roles: body_roles, kind });
            rhs.push(Symbol::Nonterminal(opt));
            roles.push(role);
        } else {
            self.push_delims(rhs, roles, pre);
            rhs.push(body);
            roles.push(role);
            self.push_delims(rhs, roles, suf);
        }
    }

    /// Builds `E.m.list` for a member that can repeat and returns its
    /// symbol. `min` here is the smallest *nonempty* count (at least 1);
    /// an enclosing opt helper handles absence.
    fn list_helper(
        &mut self,
        element: &ElementDef,
        member: &MemberDef,
        item: Symbol,
        sep: &[String],
        min: u32,
        max: Option<u32>,
    ) -> Symbol {
        let name = format!("{}.{}.list", element.name, member.name);
        let kind = ProductionKind::Helper {
            element: element.name.clone(),
            member: member.name.clone(),
        };
        let role = Role::Member(member.name.clone());

        match max {
            None => {
                let (rhs, roles) = self.flat_items(&item, sep, &role, min);
                self.pending.push(Production { lhs: name.clone(), rhs, roles, kind: kind.clone() });
                let mut rhs = vec![Symbol::Nonterminal(name.clone())];
                let mut roles = vec![role.clone()];
                self.push_delims(&mut rhs, &mut roles, sep.to_vec());
                rhs.push(item);
                roles.push(role);
                self.pending.push(Production { lhs: name.clone(), rhs, roles, kind });
            }
            Some(n) => {
                for count in min..=n.max(min) {
                    let (rhs, roles) = self.flat_items(&item, sep, &role, count);
                    self.pending.push(Production {
                        lhs: name.clone(),
                        rhs,
                        roles,
                        kind: kind.clone(),
                    });
                }
            }
        }
        Symbol::Nonterminal(name)
    }

    /// `count` items with the separator between consecutive ones.
    fn flat_items(
        &mut self,
        item: &Symbol,
        sep: &[String],
        role: &Role,
        count: u32,
    ) -> (Vec<Symbol>, Vec<Role>) {
        let mut rhs = Vec::new();
        let mut roles = Vec::new();
        for i in 0..count {
            if i > 0 {
                self.push_delims(&mut rhs, &mut roles, sep.to_vec());
            }
            rhs.push(item.clone());
            roles.push(role.clone());
        }
        (rhs, roles)
    }

    /// The symbol a member occurrence produces. Reference members match
    /// the identifier token of their target, not the target itself.
    fn item_symbol(&mut self, element: &ElementDef, member: &MemberDef) -> Option<Symbol> {
        let Some(target) = self.model.element(&member.target) else {
            let mut diag = Diagnostic::error(
                "csm.unknown-target",
                format!(
                    "member `{}.{}` targets undeclared element `{}`",
                    element.name, member.name, member.target
                ),
            )
            .at(member.span);
            if let Some(n) =
                nearest(&member.target, self.model.elements.iter().map(|e| e.name.as_str()))
            {
                diag = diag.note(format!("did you mean `{n}`?"));
            }
            self.diags.push(diag);
            return None;
        };
        if member.is_ref {
            return self.id_token_of(element, member, target).map(Symbol::Token);
        }
        Some(self.symbol_for(&target.name))
    }

    fn symbol_for(&self, name: &str) -> Symbol {
        match self.model.element(name).map(|e| &e.kind) {
            Some(ElementKind::Token) => Symbol::Token(name.to_string()),
            _ => Symbol::Nonterminal(name.to_string()),
        }
    }

    /// The token type that identifies instances of `target`: the target of
    /// its id member, for every concrete variant, and they must all agree.
    fn id_token_of(
        &mut self,
        element: &ElementDef,
        member: &MemberDef,
        target: &ElementDef,
    ) -> Option<String> {
        let mut id_tokens = BTreeSet::new();
        for concrete in self.model.variant_closure(&target.name) {
            let Some(def) = self.model.element(&concrete) else { continue };
            for m in &def.members {
                if !m.is_id {
                    continue;
                }
                match self.model.element(&m.target).map(|e| &e.kind) {
                    Some(ElementKind::Token) => {
                        id_tokens.insert(m.target.clone());
                    }
                    _ => {
                        self.diags.push(
                            Diagnostic::error(
                                "csm.ref-target",
                                format!(
                                    "id member `{concrete}.{}` must target a token",
                                    m.name
                                ),
                            )
                            .at(m.span),
                        );
                        return None;
                    }
                }
            }
        }
        match id_tokens.len() {
            1 => Some(id_tokens.into_iter().next().unwrap()),
            0 => {
                self.diags.push(
                    Diagnostic::error(
                        "csm.ref-target",
                        format!(
                            "`{}.{}` references `{}`, which declares no id member",
                            element.name, member.name, target.name
                        ),
                    )
                    .at(member.span),
                );
                None
            }
            _ => {
                self.diags.push(
                    Diagnostic::error(
                        "csm.ref-target",
                        format!(
                            "`{}.{}` references `{}`, whose variants use different id \
                             token types ({})",
                            element.name,
                            member.name,
                            target.name,
                            id_tokens.into_iter().collect::<Vec<_>>().join(", ")
                        ),
                    )
                    .at(member.span),
                );
                None
            }
        }
    }

    fn effective_bounds(&self, element: &ElementDef, member: &MemberDef) -> (u32, Option<u32>) {
        let mut min = member.min;
        let mut max = member.max;
        if let Some(ConstraintValue::Int(n)) =
            self.set.get_member(&element.name, &member.name, ConstraintKind::Minimum)
        {
            min = (*n).max(0) as u32;
        }
        match self.set.get_member(&element.name, &member.name, ConstraintKind::Maximum) {
            Some(ConstraintValue::Int(n)) => max = Some((*n).max(0) as u32),
            Some(ConstraintValue::Unbounded) => max = None,
            _ => {}
        }
        if let Some(ConstraintValue::Bool(optional)) =
            self.set.get_member(&element.name, &member.name, ConstraintKind::Optional)
        {
            if *optional {
                (min, max) = (0, Some(1));
            } else {
                min = min.max(1);
            }
        }
        (min, max)
    }

    fn push_delims(&mut self, rhs: &mut Vec<Symbol>, roles: &mut Vec<Role>, texts: Vec<String>) {
        match texts.len() {
            0 => {}
            1 => {
                rhs.push(self.literal(&texts[0]));
                roles.push(Role::Delim);
            }
            _ => {
                // Several spellings are alternatives; give them a shared
                // helper nonterminal named after the choice itself.
                let name = texts
                    .iter()
                    .map(|t| crate::strings::quote(t))
                    .collect::<Vec<_>>()
                    .join("|");
                if self.delim_nts.insert(name.clone()) {
                    for t in &texts {
                        let sym = self.literal(t);
                        self.pending.push(Production {
                            lhs: name.clone(),
                            rhs: vec![sym],
                            roles: Vec::new(),
                            kind: ProductionKind::Delims,
                        });
                    }
                }
                rhs.push(Symbol::Nonterminal(name));
                roles.push(Role::Delim);
            }
        }
    }

    fn literal(&mut self, text: &str) -> Symbol {
        self.literals.insert(text.to_string());
        Symbol::Token(crate::strings::quote(text))
    }

    fn element_texts(&self, element: &ElementDef, kind: ConstraintKind) -> Vec<String> {
        texts_of(self.set.get_element(&element.name, kind))
    }

    fn member_texts(
        &self,
        element: &ElementDef,
        member: &MemberDef,
        kind: ConstraintKind,
    ) -> Vec<String> {
        texts_of(self.set.get_member(&element.name, &member.name, kind))
    }

    /// Folds per-alternative priorities into precedes pairs, closes the
    /// union, and collects the associativity and composition tables.
    fn disambiguation(&mut self) -> (BTreeSet<(String, String)>, WordTable, WordTable) {
        let mut pairs = self.set.precedes.clone();
        for element in &self.model.elements {
            let ElementKind::Alternative(variants) = &element.kind else { continue };
            let ranked: Vec<(&String, i64)> = variants
                .iter()
                .filter_map(|v| self.priority_of(v).map(|p| (v, p)))
                .collect();
            for (a, pa) in &ranked {
                for (b, pb) in &ranked {
                    if pa < pb {
                        pairs.insert(((*a).clone(), (*b).clone()));
                    }
                }
            }
        }
        let (closed, cyclic) = close_precedes(&pairs);
        if !cyclic.is_empty() {
            self.diags.push(Diagnostic::error(
                "csm.precedes-cycle",
                format!("evaluation order is cyclic through {}", cyclic.join(", ")),
            ));
        }

        let mut associativity = BTreeMap::new();
        let mut composition = BTreeMap::new();
        for (key, value) in &self.set.entries {
            if key.member.is_some() {
                continue;
            }
            if let ConstraintValue::Word(w) = value {
                match key.kind {
                    ConstraintKind::Associativity => {
                        associativity.insert(key.element.clone(), w.clone());
                    }
                    ConstraintKind::Composition => {
                        composition.insert(key.element.clone(), w.clone());
                    }
                    _ => {}
                }
            }
        }
        (closed, associativity, composition)
    }
}

/// Per-element keyword settings, e.g. associativity or composition words.
type WordTable = BTreeMap<String, String>;

fn texts_of(value: Option<&ConstraintValue>) -> Vec<String> {
    match value {
        Some(ConstraintValue::Texts(ts)) => ts.clone(),
        Some(ConstraintValue::Text(t)) => vec![t.clone()],
        _ => Vec::new(),
    }
}

fn warn_unreachable(model: &Model, grammar: &Grammar, diags: &mut Vec<Diagnostic>) {
    let mut reached: BTreeSet<String> = BTreeSet::new();
    let mut stack = vec![grammar.start.clone()];
    while let Some(name) = stack.pop() {
        if !reached.insert(name.clone()) {
            continue;
        }
        for p in grammar.productions_for(&name) {
            for s in &p.rhs {
                if !reached.contains(s.name()) {
                    stack.push(s.name().to_string());
                }
            }
        }
    }
    for element in &model.elements {
        if !reached.contains(&element.name) {
            diags.push(
                Diagnostic::warning(
                    "csm.unreachable",
                    format!(
                        "element `{}` cannot be reached from start symbol `{}`",
                        element.name, grammar.start
                    ),
                )
                .at(element.span),
            );
        }
    }
}
