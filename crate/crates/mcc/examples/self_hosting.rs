//! The mapping notation read by a parser generated from its own mapping.
//!
//! The bundled model describes the constraint notation; three bundled
//! mapping files describe its concrete syntax in three styles. Any of
//! them is enough to derive a parser that reads all of them, and what
//! that parser reads lowers back to the very constraint set it was
//! derived from.
//!
//! Run with: cargo run --example self_hosting

use mcc::constraints::{equivalent, lower};
use mcc::dsl::repair_source;
use mcc::engine::parse_text;
use mcc::selfhost::{
    bootstrap_document, generated_grammar, graph_to_document, mapping_set, meta_model, Style,
};

fn main() {
    let model = meta_model();

    // The three styles agree before any generated parser exists.
    let property = mapping_set(Style::Property);
    for style in [Style::Grammar, Style::Mixed] {
        assert!(equivalent(&property, &mapping_set(style), &model));
        println!("{} style lowers to the property-style set", style.name());
    }

    // Derive a parser from one style, read the others with it.
    let grammar = generated_grammar(Style::Property);
    for style in Style::ALL {
        let (text, _) = repair_source(style.source());
        let (graph, diags) = parse_text(&grammar, &model, &text);
        let graph = graph.expect("bundled mapping parses");
        assert!(diags.is_empty(), "{diags:?}");

        let rebuilt = graph_to_document(&graph);
        assert_eq!(rebuilt, bootstrap_document(style));
        let (set, _) = lower(&model, &rebuilt);
        assert_eq!(set, mapping_set(style));
        println!(
            "{} style: reparsed {} definitions, same document, same set",
            style.name(),
            rebuilt.definitions.len()
        );
    }

    println!("the loop is closed: run `mcc selftest` for the stage-by-stage report");
}
