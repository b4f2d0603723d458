//! Grammar serialization: a readable EBNF text and a stable JSON form.

use std::fmt::Write;

use super::{Grammar, Symbol};
use crate::diag::Diagnostic;

pub fn export_grammar(grammar: &Grammar, format: &str) -> Result<String, Diagnostic> {
    match format {
        "ebnf" => Ok(ebnf(grammar)),
        "json" => Ok(json(grammar)),
        other => Err(Diagnostic::error(
            "csm.unknown-format",
            format!("unknown grammar format `{other}`; use `ebnf` or `json`"),
        )),
    }
}

fn symbol(s: &Symbol, grammar: &Grammar) -> String {
    match s {
        Symbol::Token(name) => match grammar.token(name).and_then(|t| t.literal.as_ref()) {
            Some(text) => crate::strings::quote(text),
            None => name.clone(),
        },
        Symbol::Nonterminal(name) => name.clone(),
    }
}

// Pattern sources can contain literal tabs and newlines; those would tear
// the line apart, so they print as escapes.
fn pattern_text(source: &str) -> String {
    source
        .replace('\\', "\\\\")
        .replace('\n', "\\n")
        .replace('\t', "\\t")
        .replace('\r', "\\r")
}

fn ebnf(grammar: &Grammar) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# grammar, start: {}", grammar.start);
    out.push('\n');

    for skip in &grammar.skips {
        let _ = writeln!(out, "skip /{}/", pattern_text(skip.as_str()));
    }
    for t in &grammar.tokens {
        if t.literal.is_none() {
            let _ = writeln!(out, "{} ::= /{}/", t.name, pattern_text(&t.pattern));
        }
    }
    out.push('\n');

    // Group alternatives under one head, in first-appearance order.
    let mut heads: Vec<&str> = Vec::new();
    for p in &grammar.productions {
        if !heads.contains(&p.lhs.as_str()) {
            heads.push(&p.lhs);
        }
    }
    for head in heads {
        let alts: Vec<String> = grammar
            .productions_for(head)
            .map(|p| {
                if p.rhs.is_empty() {
                    "ε".to_string()
                } else {
                    p.rhs.iter().map(|s| symbol(s, grammar)).collect::<Vec<_>>().join(" ")
                }
            })
            .collect();
        let _ = writeln!(out, "{head} ::= {}", alts.join(" | "));
    }

    let mut notes = Vec::new();
    for (tight, loose) in &grammar.precedes {
        notes.push(format!("# {tight} binds tighter than {loose}"));
    }
    for (element, word) in &grammar.associativity {
        notes.push(format!("# {element} is {word}-associative"));
    }
    for (element, word) in &grammar.composition {
        notes.push(format!("# {element} composes {word}ly"));
    }
    if !notes.is_empty() {
        out.push('\n');
        for n in notes {
            out.push_str(&n);
            out.push('\n');
        }
    }
    out
}

fn json(grammar: &Grammar) -> String {
    let mut text = serde_json::to_string_pretty(grammar).expect("grammar serializes");
    text.push('\n');
    text
}
