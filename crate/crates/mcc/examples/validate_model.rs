//! Parse an abstract syntax model and validate it.
//!
//! Run with: cargo run --example validate_model

use mcc::asm::{parse_model, validate_model};
use mcc::diag::render;

const GOOD: &str = include_str!("../fixtures/arith.asm");

// Same language, two mistakes: an alternative naming an element that does
// not exist, and a member whose type is misspelled.
const BROKEN: &str = r#"
language arith

element Expr = Mul | Add | Literal

element Add @Priority(2) @Associativity(left) {
  left: Exp
  right: Expr @Prefix("+")
}

element Mul @Priority(1) @Associativity(left) {
  left: Expr
  right: Expr @Prefix("*")
}

token Lit @Pattern("[0-9]+")
"#;

fn main() {
    let (model, diags) = parse_model(GOOD);
    let model = model.expect("fixture parses");
    assert!(diags.is_empty());

    println!("language `{}`, {} elements:", model.name, model.elements.len());
    for e in &model.elements {
        let members: Vec<&str> = e.members.iter().map(|m| m.name.as_str()).collect();
        println!("  {} ({:?}) members: {members:?}", e.name, e.kind);
    }

    // Validation catches what the parser cannot: names that do not line up.
    let (model, _) = parse_model(BROKEN);
    let issues = validate_model(&model.expect("still parses"));
    println!("\nbroken variant reports {} issue(s):", issues.len());
    for d in &issues {
        print!("{}", render(d, "broken.asm", BROKEN, false));
    }
}
