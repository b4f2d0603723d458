//! Derive a grammar from a model and print it.
//!
//! The EBNF form is for reading, the JSON form for tooling; both are
//! deterministic for a given model and constraint set.
//!
//! Run with: cargo run --example export_grammar

use mcc::asm::parse_model;
use mcc::constraints::model_defaults;
use mcc::csm::export::export_grammar;
use mcc::csm::derive_grammar;

const MODEL: &str = include_str!("../fixtures/arith.asm");

fn main() {
    let (model, _) = parse_model(MODEL);
    let model = model.expect("fixture parses");

    // This model carries all its concrete syntax inline, so the defaults
    // alone are a complete constraint set.
    let set = model_defaults(&model);
    let (grammar, diags) = derive_grammar(&model, &set, None);
    assert!(diags.is_empty(), "{diags:?}");

    println!("{}", export_grammar(&grammar, "ebnf").unwrap());
    println!("--- json ---");
    println!("{}", export_grammar(&grammar, "json").unwrap());
}
