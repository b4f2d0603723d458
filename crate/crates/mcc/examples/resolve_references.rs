//! Cross-references: `id` members label instances, `ref` members bind to
//! them by name, turning the tree into a graph.
//!
//! Run with: cargo run --example resolve_references

use mcc::asm::parse_model;
use mcc::constraints::model_defaults;
use mcc::csm::derive_grammar;
use mcc::diag::render;
use mcc::engine::parse_text;

const MODEL: &str = include_str!("../fixtures/refdemo.asm");
const OK: &str = include_str!("../fixtures/ref_ok.txt");
const UNKNOWN: &str = include_str!("../fixtures/ref_unknown.txt");

fn main() {
    let (model, _) = parse_model(MODEL);
    let model = model.expect("fixture parses");
    let (grammar, _) = derive_grammar(&model, &model_defaults(&model), None);

    let (graph, diags) = parse_text(&grammar, &model, OK);
    assert!(diags.is_empty(), "{diags:?}");
    let graph = graph.expect("input parses");
    let json = graph.to_stable_json(&model);
    println!("input: {OK:?}");
    println!("edges: {}", json["edges"]);

    // A typo in the referenced name is caught at resolution time, with a
    // suggestion when something close exists.
    let (_, diags) = parse_text(&grammar, &model, UNKNOWN);
    println!("\ninput: {UNKNOWN:?}");
    for d in &diags {
        print!("{}", render(d, "ref_unknown.txt", UNKNOWN, false));
    }
}
