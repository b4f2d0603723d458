//! Forest resolution: pick one derivation per node.
//!
//! Candidate derivations at a node are filtered in a fixed order:
//!
//! 1. viability: a derivation that revisits a (symbol, extent) already on
//!    the current same-extent chain is circular and dropped;
//! 2. precedes: among variant candidates, looser-binding tops win the
//!    wider extent;
//! 3. associativity: a left-associative element may not have an
//!    equally-strong element as its last member, mirrored for right,
//!    both edges for `non`;
//! 4. composition: `eager` elements prefer interpretations that start
//!    their instances earlier and stretch them longer, `lazy` the
//!    opposite.
//!
//! Whatever survives beyond one candidate is an ambiguity: an error,
//! plus a deterministic pick so callers still get a tree. The error
//! travels with the picked candidate and only surfaces if that subtree
//! makes it into the final tree; leftover ambiguity inside an
//! interpretation that a parent filter discards anyway is not the
//! input's problem.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};

use crate::csm::{Grammar, ProductionKind, Role};
use crate::diag::Diagnostic;

use super::earley::{Forest, NodeKey};
use super::lexer::Token;
use super::{Tree, TreeKind};

pub fn disambiguate(
    grammar: &Grammar,
    forest: &Forest,
    tokens: &[Token],
) -> (Option<Tree>, Vec<Diagnostic>) {
    let mut r = Resolver {
        grammar,
        forest,
        tokens,
        memo: HashMap::new(),
    };
    let resolved = r.resolve(&forest.root, &BTreeSet::new());
    debug_assert!(resolved.is_some(), "a recognized input must resolve");
    match resolved {
        Some(res) => (Some(res.tree), res.notes),
        None => (None, Vec::new()),
    }
}

/// Derivations that survive the circularity rule, counted over the whole
/// forest. A brute-force enumeration of readings must match this for
/// small inputs.
pub fn count_derivations(forest: &Forest) -> u64 {
    count(forest, &forest.root, &BTreeSet::new())
}

fn count(forest: &Forest, key: &NodeKey, chain: &BTreeSet<NodeKey>) -> u64 {
    if forest.is_leaf(key) {
        return 1;
    }
    if chain.contains(key) {
        return 0;
    }
    let mut total = 0u64;
    for choice in &forest.choices[key] {
        let mut ways = 1u64;
        for child in &choice.children {
            let child_chain = chain_for(key, child, chain);
            ways = ways.saturating_mul(count(forest, child, &child_chain));
            if ways == 0 {
                break;
            }
        }
        total = total.saturating_add(ways);
    }
    total
}

/// The same-extent ancestor chain a child sees: grows while extents
/// stay equal, resets once they shrink.
fn chain_for(key: &NodeKey, child: &NodeKey, chain: &BTreeSet<NodeKey>) -> BTreeSet<NodeKey> {
    if child.1 == key.1 && child.2 == key.2 {
        let mut c = chain.clone();
        c.insert(key.clone());
        c
    } else {
        BTreeSet::new()
    }
}

/// A resolved subtree together with the ambiguity reports born inside
/// it. Reports only become diagnostics if this subtree survives.
#[derive(Clone)]
struct Resolved {
    tree: Tree,
    notes: Vec<Diagnostic>,
}

struct Resolver<'a> {
    grammar: &'a Grammar,
    forest: &'a Forest,
    tokens: &'a [Token],
    /// Only holds results computed under an empty chain; those are
    /// context-free and safe to reuse.
    memo: HashMap<NodeKey, Resolved>,
}

impl<'a> Resolver<'a> {
    fn resolve(&mut self, key: &NodeKey, chain: &BTreeSet<NodeKey>) -> Option<Resolved> {
        if self.forest.is_leaf(key) {
            return Some(Resolved {
                tree: Tree {
                    symbol: key.0.clone(),
                    start: key.1,
                    end: key.2,
                    kind: TreeKind::Leaf,
                },
                notes: Vec::new(),
            });
        }
        if chain.is_empty() {
            if let Some(r) = self.memo.get(key) {
                return Some(r.clone());
            }
        } else if chain.contains(key) {
            return None;
        }

        let choices = self.forest.choices[key].clone();
        let mut candidates: Vec<Resolved> = Vec::new();
        for choice in &choices {
            let mut children = Vec::new();
            let mut notes = Vec::new();
            let mut ok = true;
            for child in &choice.children {
                let child_chain = chain_for(key, child, chain);
                match self.resolve(child, &child_chain) {
                    Some(r) => {
                        children.push(r.tree);
                        notes.extend(r.notes);
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                candidates.push(Resolved {
                    tree: Tree {
                        symbol: key.0.clone(),
                        start: key.1,
                        end: key.2,
                        kind: TreeKind::Node { prod: choice.prod, children },
                    },
                    notes,
                });
            }
        }
        if candidates.is_empty() {
            return None;
        }

        let candidates = self.filter_precedes(candidates);
        let candidates = self.filter_associativity(candidates);
        let candidates = self.filter_composition(candidates);

        let leftover = if candidates.len() > 1 {
            let tops: Vec<String> = candidates
                .iter()
                .map(|c| self.top_name(&c.tree).unwrap_or("?").to_string())
                .collect();
            let span = self.extent_span(key.1, key.2);
            Some(
                Diagnostic::error(
                    "engine.ambiguous",
                    format!(
                        "{} readings of `{}` survive disambiguation",
                        candidates.len(),
                        self.extent_text(key.1, key.2),
                    ),
                )
                .at(span)
                .note(format!("candidate interpretations: {}", tops.join(", "))),
            )
        } else {
            None
        };

        let mut resolved = candidates.into_iter().next().unwrap();
        resolved.notes.extend(leftover);
        if chain.is_empty() {
            self.memo.insert(key.clone(), resolved.clone());
        }
        Some(resolved)
    }

    fn extent_span(&self, i: usize, j: usize) -> crate::diag::Span {
        use crate::diag::Span;
        if i < j && j <= self.tokens.len() {
            self.tokens[i].span.join(self.tokens[j - 1].span)
        } else if i < self.tokens.len() {
            Span::point(self.tokens[i].span.start)
        } else {
            Span::point(self.tokens.last().map(|t| t.span.end).unwrap_or(0))
        }
    }

    fn extent_text(&self, i: usize, j: usize) -> String {
        let texts: Vec<&str> = self.tokens[i..j].iter().map(|t| t.text.as_str()).collect();
        let mut s = texts.join(" ");
        if s.len() > 40 {
            s.truncate(37);
            s.push_str("...");
        }
        s
    }

    /// The element (or token kind) a resolved tree presents at its top,
    /// seen through variant wrappers.
    fn top_name<'t>(&'t self, tree: &'t Tree) -> Option<&'t str> {
        match &tree.kind {
            TreeKind::Leaf => Some(&tree.symbol),
            TreeKind::Node { prod, children } => {
                match &self.grammar.productions[*prod].kind {
                    ProductionKind::Element(e) => Some(e),
                    ProductionKind::Variant { .. } => self.top_name(&children[0]),
                    _ => None,
                }
            }
        }
    }

    /// The element-production node a candidate resolves to, if any.
    fn principal<'t>(&self, tree: &'t Tree) -> Option<&'t Tree> {
        match &tree.kind {
            TreeKind::Leaf => None,
            TreeKind::Node { prod, children } => match &self.grammar.productions[*prod].kind {
                ProductionKind::Element(_) => Some(tree),
                ProductionKind::Variant { .. } => self.principal(&children[0]),
                _ => None,
            },
        }
    }

    /// Keep candidates whose top binds loosest; precedes is closed, so a
    /// single sweep suffices.
    fn filter_precedes(&self, candidates: Vec<Resolved>) -> Vec<Resolved> {
        if candidates.len() < 2 {
            return candidates;
        }
        let tops: Vec<Option<String>> = candidates
            .iter()
            .map(|c| self.top_name(&c.tree).map(str::to_string))
            .collect();
        let keep: Vec<bool> = tops
            .iter()
            .map(|t| {
                let Some(t) = t else { return true };
                !tops.iter().flatten().any(|u| {
                    self.grammar.precedes.contains(&(t.clone(), u.clone()))
                })
            })
            .collect();
        retain_marked(candidates, &keep)
    }

    fn filter_associativity(&self, candidates: Vec<Resolved>) -> Vec<Resolved> {
        if candidates.len() < 2 {
            return candidates;
        }
        let keep: Vec<bool> = candidates.iter().map(|c| !self.assoc_violation(&c.tree)).collect();
        retain_marked(candidates, &keep)
    }

    fn assoc_violation(&self, candidate: &Tree) -> bool {
        let Some(node) = self.principal(candidate) else { return false };
        let TreeKind::Node { prod, children } = &node.kind else { return false };
        let p = &self.grammar.productions[*prod];
        let ProductionKind::Element(e) = &p.kind else { return false };
        let Some(word) = self.grammar.associativity.get(e) else { return false };
        let members: Vec<&Tree> = children
            .iter()
            .zip(&p.roles)
            .filter(|(_, r)| matches!(r, Role::Member(_)))
            .map(|(c, _)| c)
            .collect();
        let same_strength = |child: Option<&&Tree>| -> bool {
            let Some(t) = child.and_then(|c| self.top_name(c)) else {
                return false;
            };
            t == e
                || matches!(
                    (self.grammar.priorities.get(t), self.grammar.priorities.get(e)),
                    (Some(a), Some(b)) if a == b
                )
        };
        match word.as_str() {
            "left" => same_strength(members.last()),
            "right" => same_strength(members.first()),
            "non" => same_strength(members.first()) || same_strength(members.last()),
            _ => false,
        }
    }

    fn filter_composition(&self, mut candidates: Vec<Resolved>) -> Vec<Resolved> {
        for (element, word) in &self.grammar.composition {
            if candidates.len() < 2 {
                break;
            }
            let eager = word == "eager";
            let seqs: Vec<Vec<(usize, usize)>> = candidates
                .iter()
                .map(|c| {
                    let mut out = Vec::new();
                    self.collect_extents(&c.tree, element, &mut out);
                    out
                })
                .collect();
            let mut best = 0;
            for i in 1..seqs.len() {
                if cmp_sequences(&seqs[i], &seqs[best], eager) == Ordering::Less {
                    best = i;
                }
            }
            let keep: Vec<bool> = seqs.iter().map(|s| *s == seqs[best]).collect();
            candidates = retain_marked(candidates, &keep);
        }
        candidates
    }

    /// Extents of the outermost `element` instances inside `tree`, in
    /// token order.
    fn collect_extents(&self, tree: &Tree, element: &str, out: &mut Vec<(usize, usize)>) {
        if let TreeKind::Node { prod, children } = &tree.kind {
            if matches!(&self.grammar.productions[*prod].kind,
                        ProductionKind::Element(e) if e == element)
            {
                out.push((tree.start, tree.end));
                return;
            }
            for c in children {
                self.collect_extents(c, element, out);
            }
        }
    }
}

/// `Less` means `a` is preferred over `b`.
fn cmp_sequences(a: &[(usize, usize)], b: &[(usize, usize)], eager: bool) -> Ordering {
    for k in 0..a.len().max(b.len()) {
        let ord = match (a.get(k), b.get(k)) {
            (Some(_), None) => {
                // A present instance: eager wants it, lazy does not.
                if eager { Ordering::Less } else { Ordering::Greater }
            }
            (None, Some(_)) => {
                if eager { Ordering::Greater } else { Ordering::Less }
            }
            (Some(x), Some(y)) => {
                let starts = if eager { x.0.cmp(&y.0) } else { y.0.cmp(&x.0) };
                let ends = if eager { y.1.cmp(&x.1) } else { x.1.cmp(&y.1) };
                starts.then(ends)
            }
            (None, None) => unreachable!(),
        };
        if ord != Ordering::Equal {
            return ord;
        }
    }
    Ordering::Equal
}

fn retain_marked<T>(candidates: Vec<T>, keep: &[bool]) -> Vec<T> {
    if !keep.iter().any(|k| *k) {
        return candidates;
    }
    candidates
        .into_iter()
        .zip(keep)
        .filter(|(_, k)| **k)
        .map(|(c, _)| c)
        .collect()
}
