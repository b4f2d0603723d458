//! Watch priorities and associativity prune an ambiguous forest.
//!
//! `1+2*3+4` has five ways to bracket three operators. The forest keeps
//! all of them; the priority constraint (Mul binds tighter) and left
//! associativity then leave exactly one.
//!
//! Run with: cargo run --example disambiguation

use mcc::asm::parse_model;
use mcc::constraints::model_defaults;
use mcc::csm::derive_grammar;
use mcc::engine::{count_derivations, disambiguate, lex, recognize, Tree, TreeKind};

const MODEL: &str = include_str!("../fixtures/arith.asm");

fn main() {
    let (model, _) = parse_model(MODEL);
    let model = model.expect("fixture parses");
    let (grammar, _) = derive_grammar(&model, &model_defaults(&model), None);

    for input in ["1+2", "1+2*3", "1+2*3+4", "1+2+3+4+5"] {
        let (tokens, diags) = lex(&grammar, input);
        assert!(diags.is_empty());
        let forest = recognize(&grammar, &tokens).expect("input recognized");
        let (tree, diags) = disambiguate(&grammar, &forest, &tokens);
        assert!(diags.is_empty(), "{diags:?}");
        println!(
            "{input:<10} {} derivation(s) in the forest, picked: {}",
            count_derivations(&forest),
            show(&tree.expect("disambiguated"), &tokens.iter().map(|t| t.text.as_str()).collect::<Vec<_>>()),
        );
    }
}

/// Fully parenthesized rendering of the chosen derivation.
fn show(tree: &Tree, texts: &[&str]) -> String {
    match &tree.kind {
        TreeKind::Leaf => texts[tree.start].to_string(),
        TreeKind::Node { children, .. } => {
            let parts: Vec<String> = children.iter().map(|c| show(c, texts)).collect();
            if parts.len() == 1 {
                parts.into_iter().next().unwrap()
            } else {
                format!("({})", parts.join(""))
            }
        }
    }
}
