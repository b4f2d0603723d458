//! Maximal-munch lexer driven by the grammar's token specs.
//!
//! At each position the longest match wins. Ties go to the higher
//! priority spec, then to the earlier declaration; a token beats a skip
//! of the same length. Unmatchable input is skipped one character at a
//! time and reported as a single diagnostic per run.

use crate::csm::Grammar;
use crate::diag::{Diagnostic, Span};
use crate::pattern::Pattern;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: String,
    pub text: String,
    pub span: Span,
}

pub fn lex(grammar: &Grammar, input: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let mut diags = Vec::new();

    let mut bad_pattern = |what: &str, source: &str, err: String| {
        diags.push(Diagnostic::error(
            "engine.bad-pattern",
            format!("{what} /{source}/ does not compile: {err}"),
        ));
    };
    let skips: Vec<Pattern> = grammar
        .skips
        .iter()
        .filter_map(|p| match Pattern::compile(p) {
            Ok(x) => Some(x),
            Err(e) => {
                bad_pattern("skip pattern", p, e.to_string());
                None
            }
        })
        .collect();
    // One compiled pattern per non-literal spec, aligned with tokens.
    let compiled: Vec<Option<Pattern>> = grammar
        .tokens
        .iter()
        .map(|spec| {
            if spec.literal.is_some() {
                return None;
            }
            match Pattern::compile(&spec.pattern) {
                Ok(p) => Some(p),
                Err(e) => {
                    bad_pattern(&format!("pattern for `{}`", spec.name), &spec.pattern, e.to_string());
                    None
                }
            }
        })
        .collect();

    let mut tokens = Vec::new();
    let mut stray: Option<usize> = None;
    let flush = |stray: &mut Option<usize>, upto: usize, diags: &mut Vec<Diagnostic>| {
        if let Some(from) = stray.take() {
            let shown: String = input[from..upto].chars().take(20).collect();
            diags.push(
                Diagnostic::error(
                    "engine.stray-input",
                    format!("cannot match input here: `{shown}`"),
                )
                .at(Span::new(from, upto)),
            );
        }
    };

    let mut i = 0;
    while i < input.len() {
        let skip_len = skips
            .iter()
            .filter_map(|p| p.longest_match_at(input, i))
            .max()
            .unwrap_or(0);

        let mut best: Option<(usize, i64, usize)> = None; // (len, priority, index)
        for (idx, spec) in grammar.tokens.iter().enumerate() {
            let len = match &spec.literal {
                Some(text) => {
                    if input[i..].starts_with(text.as_str()) {
                        text.len()
                    } else {
                        0
                    }
                }
                None => match &compiled[idx] {
                    Some(p) => p.longest_match_at(input, i).unwrap_or(0),
                    None => 0,
                },
            };
            if len == 0 {
                continue;
            }
            let wins = match best {
                None => true,
                Some((bl, bp, _)) => len > bl || (len == bl && spec.priority > bp),
            };
            if wins {
                best = Some((len, spec.priority, idx));
            }
        }

        match best {
            Some((len, _, idx)) if len >= skip_len => {
                flush(&mut stray, i, &mut diags);
                tokens.push(Token {
                    kind: grammar.tokens[idx].name.clone(),
                    text: input[i..i + len].to_string(),
                    span: Span::new(i, i + len),
                });
                i += len;
            }
            _ if skip_len > 0 => {
                flush(&mut stray, i, &mut diags);
                i += skip_len;
            }
            _ => {
                if stray.is_none() {
                    stray = Some(i);
                }
                i += input[i..].chars().next().map(char::len_utf8).unwrap_or(1);
            }
        }
    }
    flush(&mut stray, i, &mut diags);
    (tokens, diags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csm::TokenSpec;

    fn grammar(tokens: Vec<TokenSpec>, skips: Vec<&str>) -> Grammar {
        Grammar {
            tokens,
            skips: skips.into_iter().map(String::from).collect(),
            productions: Vec::new(),
            start: String::new(),
            precedes: Default::default(),
            associativity: Default::default(),
            composition: Default::default(),
            priorities: Default::default(),
        }
    }

    fn spec(name: &str, pattern: &str, priority: i64) -> TokenSpec {
        TokenSpec { name: name.into(), pattern: pattern.into(), literal: None, priority }
    }

    fn lit(text: &str) -> TokenSpec {
        TokenSpec {
            name: crate::strings::quote(text),
            pattern: String::new(),
            literal: Some(text.into()),
            priority: 1,
        }
    }

    fn kinds(g: &Grammar, input: &str) -> Vec<String> {
        let (toks, diags) = lex(g, input);
        assert!(diags.is_empty(), "{diags:?}");
        toks.into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn longest_match_wins() {
        let g = grammar(vec![lit("<"), lit("<=")], vec!["[ ]+"]);
        assert_eq!(kinds(&g, "< <= <"), ["\"<\"", "\"<=\"", "\"<\""]);
    }

    #[test]
    fn keyword_beats_identifier_on_priority() {
        let g = grammar(vec![spec("Ident", "[a-z]+", 0), lit("goto")], vec!["[ ]+"]);
        assert_eq!(kinds(&g, "goto gotos go"), ["\"goto\"", "Ident", "Ident"]);
    }

    #[test]
    fn declaration_order_breaks_exact_ties() {
        let g = grammar(
            vec![spec("Boolean", "true|false", 0), spec("Ident", "[a-z]+", 0)],
            vec!["[ ]+"],
        );
        assert_eq!(kinds(&g, "true trueish"), ["Boolean", "Ident"]);
    }

    #[test]
    fn skips_and_comments_vanish() {
        let g = grammar(vec![spec("N", "[0-9]+", 0)], vec!["[ \t\n]+", "#[^\n]*"]);
        let (toks, diags) = lex(&g, "1 # note\n  2");
        assert!(diags.is_empty());
        let texts: Vec<_> = toks.iter().map(|t| t.text.as_str()).collect();
        assert_eq!(texts, ["1", "2"]);
        assert_eq!(toks[1].span, Span::new(11, 12));
    }

    #[test]
    fn stray_runs_coalesce_into_one_diagnostic() {
        let g = grammar(vec![spec("N", "[0-9]+", 0)], vec!["[ ]+"]);
        let (toks, diags) = lex(&g, "1 ??! 2");
        assert_eq!(toks.len(), 2);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, "engine.stray-input");
        assert_eq!(diags[0].span, Some(Span::new(2, 5)));
    }

    #[test]
    fn token_beats_skip_of_equal_length() {
        // A pathological skip that could swallow digits.
        let g = grammar(vec![spec("N", "[0-9]", 0)], vec!["[0-9 ]"]);
        let (toks, _) = lex(&g, "1");
        assert_eq!(toks.len(), 1);
    }
}
