//! The runtime half: lexing, recognition, disambiguation, and instance
//! graphs for a derived grammar.
//!
//! `parse_text` chains the stages. Each stage is public on its own so
//! callers can stop early (for example to inspect the raw forest or to
//! count derivations).

mod disambig;
mod earley;
mod instances;
mod lexer;

pub use disambig::{count_derivations, disambiguate};
pub use earley::{recognize, Choice, Forest, NodeKey};
pub use instances::{
    build_instances, resolve_references, InstanceGraph, InstanceNode, Value,
};
pub use lexer::{lex, Token};

use crate::asm::Model;
use crate::csm::Grammar;
use crate::diag::Diagnostic;

/// One derivation, picked out of the forest.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub symbol: String,
    /// Token index range.
    pub start: usize,
    pub end: usize,
    pub kind: TreeKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeKind {
    /// The token at index `start`.
    Leaf,
    Node { prod: usize, children: Vec<Tree> },
}

impl Tree {
    pub fn leaf_indices(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<usize>) {
        match &self.kind {
            TreeKind::Leaf => out.push(self.start),
            TreeKind::Node { children, .. } => {
                for c in children {
                    c.collect_leaves(out);
                }
            }
        }
    }
}

/// Lex, recognize, disambiguate, build instances, resolve references.
/// A `None` graph means the input was rejected outright; diagnostics may
/// carry errors (ambiguity, unresolved references) even when a graph
/// comes back.
pub fn parse_text(
    grammar: &Grammar,
    model: &Model,
    input: &str,
) -> (Option<InstanceGraph>, Vec<Diagnostic>) {
    let (tokens, mut diags) = lex(grammar, input);
    let forest = match recognize(grammar, &tokens) {
        Ok(f) => f,
        Err(d) => {
            diags.push(d);
            return (None, diags);
        }
    };
    let (tree, more) = disambiguate(grammar, &forest, &tokens);
    diags.extend(more);
    let Some(tree) = tree else {
        return (None, diags);
    };
    let mut graph = build_instances(grammar, model, &tokens, &tree);
    diags.extend(resolve_references(model, &mut graph));
    (Some(graph), diags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asm::parse_model;
    use crate::constraints::model_defaults;
    use crate::csm::derive_grammar;
    use crate::diag::has_errors;

    fn setup(src: &str) -> (Model, Grammar) {
        let (model, diags) = parse_model(src);
        assert!(!has_errors(&diags), "{diags:?}");
        let model = model.unwrap();
        let (grammar, diags) = derive_grammar(&model, &model_defaults(&model), None);
        assert!(!has_errors(&diags), "{diags:?}");
        (model, grammar)
    }

    const ARITH: &str = r#"language arith
skip "[ \t\r\n]+"
element Expr = Mul | Add | Lit
element Add @Priority(2) @Associativity(left) {
  left: Expr
  right: Expr @Prefix("+")
}
element Mul @Priority(1) @Associativity(left) {
  left: Expr
  right: Expr @Prefix("*")
}
token Lit @Pattern("[0-9]+")
"#;

    /// Renders the operator nesting of an arithmetic instance graph.
    fn bracketed(graph: &InstanceGraph, id: usize) -> String {
        let node = &graph.nodes[id];
        match node.element.as_str() {
            "Lit" => node.value.clone().unwrap(),
            op => {
                let sym = if op == "Add" { "+" } else { "*" };
                let pick = |name: &str| match node.members[name].first() {
                    Some(Value::Node(n)) => bracketed(graph, *n),
                    other => panic!("unexpected slot {other:?}"),
                };
                format!("({}{}{})", pick("left"), sym, pick("right"))
            }
        }
    }

    fn arith_parse(input: &str) -> String {
        let (model, grammar) = setup(ARITH);
        let (graph, diags) = parse_text(&grammar, &model, input);
        assert!(!has_errors(&diags), "{diags:?}");
        bracketed(&graph.unwrap(), 0)
    }

    #[test]
    fn precedence_puts_multiplication_inside() {
        assert_eq!(arith_parse("1+2*3"), "(1+(2*3))");
        assert_eq!(arith_parse("1*2+3"), "((1*2)+3)");
    }

    #[test]
    fn left_associativity_nests_left() {
        assert_eq!(arith_parse("1+2+3"), "((1+2)+3)");
        assert_eq!(arith_parse("1+2+3+4"), "(((1+2)+3)+4)");
        assert_eq!(arith_parse("2*3*4"), "((2*3)*4)");
    }

    #[test]
    fn forest_counts_are_catalan_before_filtering() {
        let (_, grammar) = setup(ARITH);
        for (input, expect) in
            [("1+2", 1), ("1+2+3", 2), ("1+2+3+4", 5), ("1+2+3+4+5", 14)]
        {
            let (tokens, diags) = lex(&grammar, input);
            assert!(diags.is_empty());
            let forest = recognize(&grammar, &tokens).unwrap();
            assert_eq!(count_derivations(&forest), expect, "{input}");
        }
    }

    #[test]
    fn rejection_names_the_stall_point() {
        let (model, grammar) = setup(ARITH);
        let (graph, diags) = parse_text(&grammar, &model, "1+");
        assert!(graph.is_none());
        let err = diags.iter().find(|d| d.code == "engine.parse").unwrap();
        assert!(err.message.contains("Expr"), "{err:?}");
        assert!(err.message.contains("position 2"), "{err:?}");
    }

    #[test]
    fn dotted_name_list_flattens() {
        let (model, grammar) = setup(
            "language t\nelement Element { name: Identifier+ @Separator(\".\") }\n\
             token Identifier @Pattern(\"[a-zA-Z][a-zA-Z0-9_]*\")\n",
        );
        let (graph, diags) = parse_text(&grammar, &model, "x.y.z");
        assert!(!has_errors(&diags), "{diags:?}");
        let graph = graph.unwrap();
        let root = &graph.nodes[graph.root];
        let names: Vec<&str> = root.members["name"]
            .iter()
            .map(|v| match v {
                Value::Text(t) => t.as_str(),
                other => panic!("{other:?}"),
            })
            .collect();
        assert_eq!(names, ["x", "y", "z"]);
    }

    #[test]
    fn lazy_composition_keeps_sequences_flat() {
        let (model, grammar) = setup(
            "language seqdemo
skip \"[ ]+\"
element CS = SeqS | Atom
element SeqS @Composition(lazy) { constraints: CS+ }
token Atom @Pattern(\"[a-z]\")
",
        );
        let (graph, diags) = parse_text(&grammar, &model, "a b c");
        assert!(!has_errors(&diags), "{diags:?}");
        let graph = graph.unwrap();
        let root = &graph.nodes[graph.root];
        assert_eq!(root.element, "SeqS");
        // Three flat atoms, not a nested sequence.
        assert_eq!(root.members["constraints"].len(), 3);
        for v in &root.members["constraints"] {
            let Value::Node(id) = v else { panic!("{v:?}") };
            assert_eq!(graph.nodes[*id].element, "Atom");
        }
    }

    #[test]
    fn eager_composition_absorbs_the_tail() {
        let (model, grammar) = setup(
            "language defdemo
skip \"[ \\n]+\"
element File { defs: Def+ }
element Def @Composition(eager) { head: Name  args: Name* }
token Name @Pattern(\"[a-z]+\")
",
        );
        let (graph, diags) = parse_text(&grammar, &model, "f x y");
        assert!(!has_errors(&diags), "{diags:?}");
        let graph = graph.unwrap();
        let root = &graph.nodes[graph.root];
        // One greedy def, not several one-name defs.
        assert_eq!(root.members["defs"].len(), 1);
        let Value::Node(def) = root.members["defs"][0] else { panic!() };
        assert_eq!(graph.nodes[def].members["args"].len(), 2);
    }

    #[test]
    fn residual_ambiguity_is_an_error() {
        // Two optional slots for the same token: one `x` fits either.
        let (model, grammar) = setup(
            "language amb\nelement E { a: Tok?  b: Tok? }\ntoken Tok @Pattern(\"x\")\n",
        );
        let (_, diags) = parse_text(&grammar, &model, "x");
        assert!(diags.iter().any(|d| d.code == "engine.ambiguous" && d.is_error()));
    }

    #[test]
    fn parse_covers_every_token_in_order() {
        let (_, grammar) = setup(ARITH);
        let input = "10+2*33+4";
        let (tokens, _) = lex(&grammar, input);
        let forest = recognize(&grammar, &tokens).unwrap();
        let (tree, _) = disambiguate(&grammar, &forest, &tokens);
        let leaves = tree.unwrap().leaf_indices();
        assert_eq!(leaves, (0..tokens.len()).collect::<Vec<_>>());
        let text: String = leaves.iter().map(|i| tokens[*i].text.as_str()).collect();
        assert_eq!(text, input);
    }

    #[test]
    fn token_start_symbol_accepts_exactly_one_token() {
        let (model, _) = setup(ARITH);
        let set = model_defaults(&model);
        let (grammar, _) = derive_grammar(&model, &set, Some("Lit"));
        let (graph, diags) = parse_text(&grammar, &model, "42");
        assert!(!has_errors(&diags), "{diags:?}");
        let graph = graph.unwrap();
        assert_eq!(graph.nodes[graph.root].value.as_deref(), Some("42"));
        let (graph, diags) = parse_text(&grammar, &model, "4 2");
        assert!(graph.is_none());
        assert!(has_errors(&diags));
    }

    #[test]
    fn empty_input_parses_when_start_is_nullable() {
        let (model, grammar) =
            setup("language t\nelement E { xs: Tok* }\ntoken Tok @Pattern(\"x\")\n");
        let (graph, diags) = parse_text(&grammar, &model, "");
        assert!(!has_errors(&diags), "{diags:?}");
        assert!(graph.unwrap().nodes[0].members["xs"].is_empty());
    }
}
