//! Earley recognition over the token stream, then a packed forest read
//! back out of the chart.
//!
//! Forest nodes are keyed by (symbol, start, end) over token indices, so
//! shared subderivations appear once. Every admissible split of every
//! production becomes one choice; disambiguation happens later.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::csm::{Grammar, Symbol};
use crate::diag::{Diagnostic, Span};

use super::lexer::Token;

pub type NodeKey = (String, usize, usize);

#[derive(Debug, Clone, PartialEq)]
pub struct Choice {
    pub prod: usize,
    pub children: Vec<NodeKey>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    pub root: NodeKey,
    /// Nonterminal nodes and their derivations. A key absent here is a
    /// token leaf.
    pub choices: BTreeMap<NodeKey, Vec<Choice>>,
    pub n_tokens: usize,
}

impl Forest {
    pub fn is_leaf(&self, key: &NodeKey) -> bool {
        !self.choices.contains_key(key)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Item {
    prod: usize,
    dot: usize,
    origin: usize,
}

pub fn recognize(grammar: &Grammar, tokens: &[Token]) -> Result<Forest, Diagnostic> {
    let n = tokens.len();

    // A token as start symbol: the input must be exactly that token.
    if grammar.is_token(&grammar.start) {
        return if n == 1 && tokens[0].kind == grammar.start {
            Ok(Forest {
                root: (grammar.start.clone(), 0, 1),
                choices: BTreeMap::new(),
                n_tokens: 1,
            })
        } else {
            Err(Diagnostic::error(
                "engine.parse",
                format!("expected a single `{}` token", grammar.start),
            )
            .at(token_span(tokens, if n == 0 { 0 } else { 1 })))
        };
    }

    let mut by_lhs: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, p) in grammar.productions.iter().enumerate() {
        by_lhs.entry(&p.lhs).or_default().push(i);
    }
    if !by_lhs.contains_key(grammar.start.as_str()) {
        return Err(Diagnostic::error(
            "engine.parse",
            format!("start symbol `{}` has no productions", grammar.start),
        ));
    }
    let nullable = nullable_set(grammar);

    let mut chart: Vec<Vec<Item>> = vec![Vec::new(); n + 1];
    let mut seen: Vec<HashSet<Item>> = vec![HashSet::new(); n + 1];
    // Items in set `k` waiting on nonterminal `sym`.
    let mut waiting: HashMap<(usize, String), Vec<Item>> = HashMap::new();
    let mut predicted: HashSet<(usize, String)> = HashSet::new();
    // (lhs, end) -> origins of completed derivations, for the forest.
    let mut completed: HashMap<(String, usize), BTreeSet<usize>> = HashMap::new();

    let add = |chart: &mut Vec<Vec<Item>>, seen: &mut Vec<HashSet<Item>>, k: usize, item: Item| {
        if seen[k].insert(item) {
            chart[k].push(item);
        }
    };
    for &p in &by_lhs[grammar.start.as_str()] {
        add(&mut chart, &mut seen, 0, Item { prod: p, dot: 0, origin: 0 });
    }

    for k in 0..=n {
        let mut idx = 0;
        while idx < chart[k].len() {
            let item = chart[k][idx];
            idx += 1;
            let prod = &grammar.productions[item.prod];
            match prod.rhs.get(item.dot) {
                None => {
                    // Empty extents are covered by the nullable shortcut
                    // at prediction time.
                    if item.origin == k {
                        continue;
                    }
                    completed
                        .entry((prod.lhs.clone(), k))
                        .or_default()
                        .insert(item.origin);
                    let waiters = waiting
                        .get(&(item.origin, prod.lhs.clone()))
                        .cloned()
                        .unwrap_or_default();
                    for w in waiters {
                        add(&mut chart, &mut seen, k, Item { dot: w.dot + 1, ..w });
                    }
                }
                Some(Symbol::Token(t)) => {
                    if k < n && tokens[k].kind == *t {
                        add(&mut chart, &mut seen, k + 1, Item { dot: item.dot + 1, ..item });
                    }
                }
                Some(Symbol::Nonterminal(b)) => {
                    // Completions over k..k' run while processing set k',
                    // after this set is done, so registering here is early
                    // enough. Empty extents go through the nullable
                    // shortcut below instead.
                    waiting.entry((k, b.clone())).or_default().push(item);
                    if predicted.insert((k, b.clone())) {
                        if let Some(ps) = by_lhs.get(b.as_str()) {
                            for &p in ps {
                                add(&mut chart, &mut seen, k, Item { prod: p, dot: 0, origin: k });
                            }
                        }
                    }
                    if nullable.contains(b.as_str()) {
                        add(&mut chart, &mut seen, k, Item { dot: item.dot + 1, ..item });
                    }
                }
            }
        }
    }

    let accepted = chart[n].iter().any(|it| {
        it.origin == 0
            && grammar.productions[it.prod].lhs == grammar.start
            && grammar.productions[it.prod].rhs.len() == it.dot
    }) || (n == 0 && nullable.contains(grammar.start.as_str()));
    if !accepted {
        return Err(rejection(grammar, tokens, &chart));
    }

    let items: HashSet<(usize, usize, usize, usize)> = chart
        .iter()
        .enumerate()
        .flat_map(|(k, set)| set.iter().map(move |it| (it.prod, it.dot, it.origin, k)))
        .collect();

    Ok(build_forest(grammar, tokens, &by_lhs, &nullable, &completed, &items))
}

fn nullable_set(grammar: &Grammar) -> BTreeSet<&str> {
    let mut nullable: BTreeSet<&str> = BTreeSet::new();
    loop {
        let before = nullable.len();
        for p in &grammar.productions {
            if nullable.contains(p.lhs.as_str()) {
                continue;
            }
            let all = p.rhs.iter().all(|s| match s {
                Symbol::Token(_) => false,
                Symbol::Nonterminal(b) => nullable.contains(b.as_str()),
            });
            if all {
                nullable.insert(&p.lhs);
            }
        }
        if nullable.len() == before {
            break;
        }
    }
    nullable
}

fn token_span(tokens: &[Token], at: usize) -> Span {
    if at < tokens.len() {
        tokens[at].span
    } else {
        Span::point(tokens.last().map(|t| t.span.end).unwrap_or(0))
    }
}

fn rejection(grammar: &Grammar, tokens: &[Token], chart: &[Vec<Item>]) -> Diagnostic {
    let k = chart
        .iter()
        .rposition(|set| !set.is_empty())
        .unwrap_or(0);
    let pick = |progressed_only: bool| -> BTreeSet<String> {
        chart[k]
            .iter()
            .filter(|it| !progressed_only || it.dot > 0)
            .filter_map(|it| grammar.productions[it.prod].rhs.get(it.dot))
            .map(|s| s.name().to_string())
            .collect()
    };
    let mut expected = pick(true);
    if expected.is_empty() {
        expected = pick(false);
    }
    let expected = if expected.is_empty() {
        grammar.start.clone()
    } else {
        expected.into_iter().collect::<Vec<_>>().join(", ")
    };
    let found = match tokens.get(k) {
        Some(t) => format!("`{}`", t.text),
        None => "end of input".to_string(),
    };
    Diagnostic::error(
        "engine.parse",
        format!("syntax error at position {k}: expected {expected}, found {found}"),
    )
    .at(token_span(tokens, k))
}

fn build_forest(
    grammar: &Grammar,
    tokens: &[Token],
    by_lhs: &BTreeMap<&str, Vec<usize>>,
    nullable: &BTreeSet<&str>,
    completed: &HashMap<(String, usize), BTreeSet<usize>>,
    items: &HashSet<(usize, usize, usize, usize)>,
) -> Forest {
    let n = tokens.len();
    let root: NodeKey = (grammar.start.clone(), 0, n);
    let mut choices: BTreeMap<NodeKey, Vec<Choice>> = BTreeMap::new();
    let mut work = vec![root.clone()];

    while let Some(key) = work.pop() {
        if choices.contains_key(&key) {
            continue;
        }
        let (ref sym, i, j) = key;
        let mut node_choices = Vec::new();
        for &p in by_lhs.get(sym.as_str()).into_iter().flatten() {
            let prod = &grammar.productions[p];
            // The whole production must span i..j.
            if !items.contains(&(p, prod.rhs.len(), i, j)) {
                continue;
            }
            splits(grammar, tokens, completed, nullable, items, p, i, j, &mut node_choices);
        }
        for c in &node_choices {
            for child in &c.children {
                if by_lhs.contains_key(child.0.as_str()) && !choices.contains_key(child) {
                    work.push(child.clone());
                }
            }
        }
        choices.insert(key, node_choices);
    }

    Forest { root, choices, n_tokens: n }
}

/// Appends one choice per admissible boundary assignment of production
/// `p` over tokens `i..j`.
#[allow(clippy::too_many_arguments)]
fn splits(
    grammar: &Grammar,
    tokens: &[Token],
    completed: &HashMap<(String, usize), BTreeSet<usize>>,
    nullable: &BTreeSet<&str>,
    items: &HashSet<(usize, usize, usize, usize)>,
    p: usize,
    i: usize,
    j: usize,
    out: &mut Vec<Choice>,
) {
    struct Ctx<'a> {
        tokens: &'a [Token],
        completed: &'a HashMap<(String, usize), BTreeSet<usize>>,
        nullable: &'a BTreeSet<&'a str>,
        items: &'a HashSet<(usize, usize, usize, usize)>,
        rhs: &'a [Symbol],
        p: usize,
        i: usize,
    }

    // Walks the rhs right to left: symbol t-1 covers some suffix whose
    // start is constrained by the chart, then recurse on the prefix.
    fn rec(ctx: &Ctx, t: usize, end: usize, rev_children: &mut Vec<NodeKey>, out: &mut Vec<Choice>) {
        if t == 0 {
            if end == ctx.i {
                let mut children: Vec<NodeKey> = rev_children.clone();
                children.reverse();
                out.push(Choice { prod: ctx.p, children });
            }
            return;
        }
        match &ctx.rhs[t - 1] {
            Symbol::Token(name) => {
                if end > ctx.i
                    && ctx.tokens[end - 1].kind == *name
                    && ctx.items.contains(&(ctx.p, t - 1, ctx.i, end - 1))
                {
                    rev_children.push((name.clone(), end - 1, end));
                    rec(ctx, t - 1, end - 1, rev_children, out);
                    rev_children.pop();
                }
            }
            Symbol::Nonterminal(b) => {
                let mut starts: BTreeSet<usize> = ctx
                    .completed
                    .get(&(b.clone(), end))
                    .map(|s| s.iter().copied().filter(|&s| s >= ctx.i).collect())
                    .unwrap_or_default();
                if ctx.nullable.contains(b.as_str()) {
                    starts.insert(end);
                }
                for s in starts {
                    if ctx.items.contains(&(ctx.p, t - 1, ctx.i, s)) {
                        rev_children.push((b.clone(), s, end));
                        rec(ctx, t - 1, s, rev_children, out);
                        rev_children.pop();
                    }
                }
            }
        }
    }

    let rhs = &grammar.productions[p].rhs;
    let ctx = Ctx { tokens, completed, nullable, items, rhs, p, i };
    let mut rev = Vec::new();
    rec(&ctx, rhs.len(), j, &mut rev, out);
}
