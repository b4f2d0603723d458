//! Lower a mapping file onto a model and check the result.
//!
//! Constraints written in three styles end up in one canonical set; the
//! checker then compares the set with what the model declares. Constraints
//! on members that do not exist are reported and ignored, contradictions
//! are errors.
//!
//! Run with: cargo run --example check_mapping

use mcc::asm::parse_model;
use mcc::constraints::{check_consistency, lower, merge, model_defaults};
use mcc::diag::render;
use mcc::dsl::parse_mapping;

const MODEL: &str = include_str!("../fixtures/refdemo.asm");

// Overrides and additions on top of the annotations in the model: the
// label keyword gets a shorter spelling, statements get a separator.
const MAPPING: &str = r#"
Label[prefix]: "lbl"
Program.stmts[separator]: ";"
Stmt.bogus[suffix]: "!"     # no such member: reported, then ignored
"#;

// `stmts` is declared mandatory; a grammar-style `stmts?` contradicts it.
const CONFLICTING: &str = "Program: stmts?\n";

fn main() {
    let (model, _) = parse_model(MODEL);
    let model = model.expect("fixture parses");

    let (doc, diags) = parse_mapping(MAPPING, true);
    let (set, lower_diags) = lower(&model, &doc);
    for d in diags.iter().chain(&lower_diags) {
        print!("{}", render(d, "demo.mcd", MAPPING, false));
    }

    // Inline annotation defaults first, then the mapping; the mapping's
    // `lbl` wins over the model's `label`.
    let merged = merge(&[&model_defaults(&model), &set]);
    println!("merged canonical set:");
    for (key, value) in &merged.entries {
        println!("  {key} = {value}");
    }

    let issues = check_consistency(&model, &merged);
    println!("consistency: {} issue(s)", issues.len());

    // Now the contradiction.
    let (doc, _) = parse_mapping(CONFLICTING, true);
    let (set, _) = lower(&model, &doc);
    let merged = merge(&[&model_defaults(&model), &set]);
    println!("\nwith `Program: stmts?` merged in:");
    for d in check_consistency(&model, &merged) {
        print!("{}", render(&d, "conflict.mcd", CONFLICTING, false));
    }
}
