//! Parse input text into a typed instance graph.
//!
//! No grammar file and no tree-walking code: the model plus its
//! constraints produce the parser, and the parser produces instances of
//! the model, not parse-tree nodes.
//!
//! Run with: cargo run --example parse_input

use mcc::asm::parse_model;
use mcc::constraints::model_defaults;
use mcc::csm::derive_grammar;
use mcc::engine::parse_text;

const MODEL: &str = include_str!("../fixtures/arith.asm");
const INPUT: &str = include_str!("../fixtures/arith_input.txt");

fn main() {
    let (model, _) = parse_model(MODEL);
    let model = model.expect("fixture parses");
    let (grammar, _) = derive_grammar(&model, &model_defaults(&model), None);

    let (graph, diags) = parse_text(&grammar, &model, INPUT);
    assert!(diags.is_empty(), "{diags:?}");
    let graph = graph.expect("input parses");

    println!("parsed {:?}:", INPUT.trim_end());
    for node in &graph.nodes {
        let value = node.value.as_deref().unwrap_or("");
        println!(
            "  #{} {} {:?} {}",
            node.id,
            node.element,
            (node.span.start, node.span.end),
            value
        );
    }

    println!("\nstable JSON:");
    println!("{}", serde_json::to_string_pretty(&graph.to_stable_json(&model)).unwrap());
}
