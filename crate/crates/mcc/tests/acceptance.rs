//! End-to-end acceptance checks, one test per shipped guarantee.
//!
//! Each test prints a single `criterion N PASS/FAIL` line, so a plain
//! `cargo test --test acceptance -- --nocapture` doubles as a checklist.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use mcc::asm::{parse_model, render_model, Model};
use mcc::constraints::{
    canonicalize, check_consistency, lower, merge, model_defaults, CanonicalConstraintSet,
    ConstraintKind, ConstraintValue, EntryKey,
};
use mcc::csm::derive_grammar;
use mcc::diag::{error_count, has_errors, warning_count, Span};
use mcc::dsl::{parse_mapping, render_mapping, repair_source, ConstraintDef, ConstraintExpr, MappingDocument, Name, PathRef};
use mcc::engine::{count_derivations, disambiguate, lex, parse_text, recognize, Token, Tree, TreeKind};
use mcc::selfhost::{
    bootstrap_document, generated_grammar, graph_to_document, mapping_set, meta_model, Style,
    GRAMMAR_MCD,
};

const ARITH_ASM: &str = include_str!("../fixtures/arith.asm");
const REFDEMO_ASM: &str = include_str!("../fixtures/refdemo.asm");
const REF_OK: &str = include_str!("../fixtures/ref_ok.txt");
const REF_DUP: &str = include_str!("../fixtures/ref_dup.txt");
const REF_UNKNOWN: &str = include_str!("../fixtures/ref_unknown.txt");

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn criterion(n: usize, name: &str, body: impl FnOnce() -> Result<(), String>) {
    match body() {
        Ok(()) => println!("criterion {n} PASS: {name}"),
        Err(why) => {
            println!("criterion {n} FAIL: {name}");
            panic!("criterion {n} ({name}) failed: {why}");
        }
    }
}

/// The canonical set all three bundled mapping styles must denote,
/// written out by hand entry by entry.
fn expected_set() -> CanonicalConstraintSet {
    use ConstraintKind::*;
    let texts = |ts: &[&str]| ConstraintValue::Texts(ts.iter().map(|t| t.to_string()).collect());
    let mut s = CanonicalConstraintSet::new();
    s.insert(EntryKey::member("ConstraintDefinition", "constraintID", Prefix), texts(&["["]));
    s.insert(EntryKey::member("ConstraintDefinition", "constraintID", Suffix), texts(&["]"]));
    s.insert(EntryKey::member("ConstraintDefinition", "constraint", Prefix), texts(&[":"]));
    s.insert(EntryKey::member("Element", "name", Separator), texts(&["."]));
    s.insert(EntryKey::element("Identifier", Pattern), ConstraintValue::Text("[a-zA-Z][a-zA-Z0-9_]*".into()));
    s.insert(EntryKey::element("ClausureSpecification", Suffix), texts(&["*"]));
    s.insert(EntryKey::element("OptionalSpecification", Suffix), texts(&["?"]));
    s.insert(EntryKey::element("PositiveClauseSpecification", Suffix), texts(&["+"]));
    s.insert(EntryKey::element("ParenthesizedSpecification", Prefix), texts(&["("]));
    s.insert(EntryKey::element("ParenthesizedSpecification", Suffix), texts(&[")"]));
    s.insert(EntryKey::member("AlternationSpecification", "constraints", Separator), texts(&["|"]));
    s.insert(EntryKey::member("PrecedenceSpecification", "constraints", Separator), texts(&["<"]));
    s.insert(EntryKey::element("Boolean", Pattern), ConstraintValue::Text("true|false".into()));
    s.insert(EntryKey::element("Integer", Pattern), ConstraintValue::Text("[0-9]+".into()));
    s.precedes = [
        ("PrecedenceSpecification", "AlternationSpecification"),
        ("SequenceSpecification", "AlternationSpecification"),
        ("SequenceSpecification", "PrecedenceSpecification"),
    ]
    .iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect();
    s
}

#[test]
fn criterion_1_triple_equivalence() {
    criterion(1, "three mapping styles lower to one canonical set", || {
        let expected = expected_set();
        let mut serialized = Vec::new();
        for style in Style::ALL {
            let set = mapping_set(style);
            ensure!(
                set == expected,
                "{} style deviates from the hand-written expectation",
                style.name()
            );
            serialized.push(serde_json::to_string(&set.to_stable_json()).unwrap());
        }
        ensure!(
            serialized[0] == serialized[1] && serialized[1] == serialized[2],
            "serialized canonical forms differ"
        );
        Ok(())
    });
}

#[test]
fn criterion_2_self_hosting_fixpoint() {
    criterion(2, "generated parser re-reads all three mapping files", || {
        let model = meta_model();
        let grammar = generated_grammar(Style::Grammar);
        for style in Style::ALL {
            let (text, _) = repair_source(style.source());
            let (graph, diags) = parse_text(&grammar, &model, &text);
            ensure!(
                graph.is_some() && !has_errors(&diags),
                "{} fixture rejected: {diags:?}",
                style.name()
            );
            let rebuilt = graph_to_document(&graph.unwrap());
            let (set, _) = lower(&model, &rebuilt);
            let bootstrap = mapping_set(style);
            ensure!(
                set.entries == bootstrap.entries,
                "{} entries differ from bootstrap",
                style.name()
            );
            ensure!(
                set.precedes == bootstrap.precedes,
                "{} precedes pairs differ from bootstrap",
                style.name()
            );
        }
        Ok(())
    });
}

#[test]
fn criterion_3_precedes_closure() {
    criterion(3, "precedes pairs close to the same three-element order", || {
        let expected: std::collections::BTreeSet<(String, String)> = [
            ("PrecedenceSpecification", "AlternationSpecification"),
            ("SequenceSpecification", "AlternationSpecification"),
            ("SequenceSpecification", "PrecedenceSpecification"),
        ]
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
        // The property file states pairs directly, the grammar file only a
        // `<` chain whose transitive closure must produce the same pairs.
        for style in [Style::Property, Style::Grammar] {
            let set = mapping_set(style);
            ensure!(
                set.precedes == expected,
                "{} style closed to {:?}",
                style.name(),
                set.precedes
            );
        }
        Ok(())
    });
}

fn model_with_mandatory(member: &str) -> Model {
    let mut model = meta_model();
    let def = model
        .elements
        .iter_mut()
        .find(|e| e.name == "ConstraintDefinition")
        .expect("meta-model has ConstraintDefinition");
    let m = def
        .members
        .iter_mut()
        .find(|m| m.name == member)
        .expect("member exists");
    m.min = 1;
    model
}

#[test]
fn criterion_4_consistency_checking() {
    criterion(4, "optionality markers conflict only against a mandatory member", || {
        let doc = bootstrap_document(Style::Grammar);

        let model = meta_model();
        let (set, _) = lower(&model, &doc);
        let merged = merge(&[&model_defaults(&model), &set]);
        let issues = check_consistency(&model, &merged);
        ensure!(
            error_count(&issues) == 0,
            "pristine model reports {issues:?}"
        );

        // The grammar-style file marks `constraintID` and `constraint`
        // optional; making either member mandatory in the model turns the
        // matching marker into exactly one conflict.
        for member in ["constraintID", "constraint"] {
            let model = model_with_mandatory(member);
            let (set, _) = lower(&model, &doc);
            let merged = merge(&[&model_defaults(&model), &set]);
            let issues = check_consistency(&model, &merged);
            ensure!(
                error_count(&issues) == 1,
                "mandatory `{member}` yields {} errors: {issues:?}",
                error_count(&issues)
            );
            ensure!(
                issues.iter().any(|d| d.code == "constraints.conflict"),
                "mandatory `{member}` reports the wrong code: {issues:?}"
            );
        }
        Ok(())
    });
}

#[test]
fn criterion_5_ignore_and_report() {
    criterion(5, "constraints on unknown members warn once and change nothing", || {
        let model = meta_model();
        let with_bogus = format!("{GRAMMAR_MCD}ConstraintDefinition.bogus[prefix]: \"!\"\n");

        let (doc, parse_diags) = parse_mapping(GRAMMAR_MCD, false);
        ensure!(parse_diags.is_empty(), "clean fixture reports {parse_diags:?}");
        let (clean_set, clean_diags) = lower(&model, &doc);
        ensure!(clean_diags.is_empty(), "clean fixture lowers with {clean_diags:?}");

        let (doc, parse_diags) = parse_mapping(&with_bogus, false);
        ensure!(parse_diags.is_empty(), "bogus line breaks parsing: {parse_diags:?}");
        let (set, diags) = lower(&model, &doc);
        ensure!(
            warning_count(&diags) == 1 && error_count(&diags) == 0,
            "expected exactly one warning, got {diags:?}"
        );
        ensure!(set == clean_set, "canonical set changed");
        Ok(())
    });
}

// Brute-force disambiguation oracle: every bracketing of the operand
// sequence, then the two documented rules as filters.

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Leaf(usize),
    Node(char, Box<Shape>, Box<Shape>),
}

fn bracketings(ops: &[char], lo: usize, hi: usize) -> Vec<Shape> {
    if hi - lo == 1 {
        return vec![Shape::Leaf(lo)];
    }
    let mut out = Vec::new();
    for split in lo + 1..hi {
        for l in bracketings(ops, lo, split) {
            for r in bracketings(ops, split, hi) {
                out.push(Shape::Node(ops[split - 1], Box::new(l.clone()), Box::new(r)));
            }
        }
    }
    out
}

/// Lower number binds tighter.
fn strength(op: char) -> u8 {
    if op == '*' {
        1
    } else {
        2
    }
}

fn allowed(shape: &Shape) -> bool {
    match shape {
        Shape::Leaf(_) => true,
        Shape::Node(op, l, r) => {
            let ok = |child: &Shape, is_right: bool| match child {
                Shape::Leaf(_) => true,
                Shape::Node(c, ..) => {
                    // priority: a looser operator may not sit below a
                    // tighter one; associativity: left grouping forbids a
                    // same-strength operator as the right child.
                    strength(*c) <= strength(*op) && !(is_right && strength(*c) == strength(*op))
                }
            };
            ok(l, false) && ok(r, true) && allowed(l) && allowed(r)
        }
    }
}

fn shape_text(shape: &Shape, operands: &[String]) -> String {
    match shape {
        Shape::Leaf(i) => operands[*i].clone(),
        Shape::Node(op, l, r) => {
            format!("({}{op}{})", shape_text(l, operands), shape_text(r, operands))
        }
    }
}

fn tree_text(tree: &Tree, tokens: &[Token]) -> String {
    match &tree.kind {
        TreeKind::Leaf => tokens[tree.start].text.clone(),
        TreeKind::Node { children, .. } => {
            let parts: Vec<String> = children.iter().map(|c| tree_text(c, tokens)).collect();
            if parts.len() == 1 {
                parts.into_iter().next().unwrap()
            } else {
                format!("({})", parts.join(""))
            }
        }
    }
}

fn catalan(n: usize) -> u64 {
    match n {
        1 => 1,
        2 => 2,
        3 => 5,
        4 => 14,
        _ => unreachable!(),
    }
}

#[test]
fn criterion_6_disambiguation_oracle() {
    criterion(6, "chosen trees match the brute-force bracketing oracle", || {
        let (model, _) = parse_model(ARITH_ASM);
        let model = model.expect("arith fixture parses");
        let (grammar, _) = derive_grammar(&model, &model_defaults(&model), None);

        for operand_count in 2..=5usize {
            for mask in 0..(1u32 << (operand_count - 1)) {
                let ops: Vec<char> = (0..operand_count - 1)
                    .map(|i| if mask & (1 << i) != 0 { '*' } else { '+' })
                    .collect();
                let operands: Vec<String> = (1..=operand_count).map(|d| d.to_string()).collect();
                let input: String = operands
                    .iter()
                    .enumerate()
                    .map(|(i, o)| {
                        if i == 0 {
                            o.clone()
                        } else {
                            format!("{}{o}", ops[i - 1])
                        }
                    })
                    .collect();

                let all = bracketings(&ops, 0, operand_count);
                ensure!(
                    all.len() as u64 == catalan(operand_count - 1),
                    "{input}: enumerator produced {} bracketings",
                    all.len()
                );
                let survivors: Vec<&Shape> = all.iter().filter(|s| allowed(s)).collect();
                ensure!(
                    survivors.len() == 1,
                    "{input}: {} bracketings survive the filter rules",
                    survivors.len()
                );

                let (tokens, diags) = lex(&grammar, &input);
                ensure!(diags.is_empty(), "{input}: lexing failed: {diags:?}");
                let forest = match recognize(&grammar, &tokens) {
                    Ok(f) => f,
                    Err(d) => return Err(format!("{input}: rejected: {d:?}")),
                };
                ensure!(
                    count_derivations(&forest) == catalan(operand_count - 1),
                    "{input}: forest holds {} derivations",
                    count_derivations(&forest)
                );
                let (tree, diags) = disambiguate(&grammar, &forest, &tokens);
                ensure!(diags.is_empty(), "{input}: ambiguity left over: {diags:?}");
                let got = tree_text(&tree.unwrap(), &tokens);
                let want = shape_text(survivors[0], &operands);
                ensure!(got == want, "{input}: engine picked {got}, oracle wants {want}");
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_7_reference_resolution() {
    criterion(7, "id/ref members resolve to edges, with duplicate and unknown errors", || {
        let (model, _) = parse_model(REFDEMO_ASM);
        let model = model.expect("refdemo fixture parses");
        let (grammar, _) = derive_grammar(&model, &model_defaults(&model), None);

        let (graph, diags) = parse_text(&grammar, &model, REF_OK);
        ensure!(diags.is_empty(), "clean input reports {diags:?}");
        let graph = graph.expect("clean input parses");
        ensure!(graph.nodes.len() == 3, "expected 3 nodes, got {}", graph.nodes.len());
        let json = graph.to_stable_json(&model);
        let edges = json["edges"].as_array().unwrap();
        ensure!(edges.len() == 1, "expected 1 edge, got {edges:?}");

        let (_, diags) = parse_text(&grammar, &model, REF_DUP);
        ensure!(
            error_count(&diags) == 1 && diags.iter().any(|d| d.code == "engine.duplicate-id"),
            "duplicate labels report {diags:?}"
        );

        let (_, diags) = parse_text(&grammar, &model, REF_UNKNOWN);
        ensure!(
            error_count(&diags) == 1 && diags.iter().any(|d| d.code == "engine.unknown-ref"),
            "unknown label reports {diags:?}"
        );
        Ok(())
    });
}

fn random_doc(rng: &mut StdRng, model: &Model) -> MappingDocument {
    let span = Span::point(0);
    let words = ["left", "right", "non", "eager", "lazy", "true", "false", "unbounded", "wat"];
    let texts = ["<", "{", "::", "end", "!"];
    let kinds = [
        "prefix", "suffix", "separator", "pattern", "minimum", "maximum", "priority",
        "associativity", "composition", "optional", "precedes", "bogus",
    ];

    let mut leaf = |rng: &mut StdRng| -> ConstraintExpr {
        match rng.random_range(0..4) {
            0 => ConstraintExpr::Literal { text: texts[rng.random_range(0..texts.len())].into(), span },
            1 => ConstraintExpr::Number { value: rng.random_range(0..4), span },
            2 => {
                let e = &model.elements[rng.random_range(0..model.elements.len())];
                ConstraintExpr::Ref(PathRef { segments: vec![e.name.clone()], span })
            }
            _ => ConstraintExpr::Ref(PathRef {
                segments: vec![words[rng.random_range(0..words.len())].into()],
                span,
            }),
        }
    };

    fn grow(rng: &mut StdRng, leaf: &mut impl FnMut(&mut StdRng) -> ConstraintExpr, depth: usize) -> ConstraintExpr {
        let span = Span::point(0);
        if depth == 0 || rng.random_range(0..3) == 0 {
            return leaf(rng);
        }
        match rng.random_range(0..7) {
            0 => ConstraintExpr::Sequence((0..rng.random_range(2..4)).map(|_| grow(rng, leaf, depth - 1)).collect()),
            1 => ConstraintExpr::Alternation((0..rng.random_range(2..4)).map(|_| grow(rng, leaf, depth - 1)).collect()),
            2 => ConstraintExpr::Precedence((0..rng.random_range(2..4)).map(|_| grow(rng, leaf, depth - 1)).collect()),
            3 => ConstraintExpr::Many0 { inner: Box::new(grow(rng, leaf, depth - 1)), span },
            4 => ConstraintExpr::Many1 { inner: Box::new(grow(rng, leaf, depth - 1)), span },
            5 => ConstraintExpr::Maybe { inner: Box::new(grow(rng, leaf, depth - 1)), span },
            _ => ConstraintExpr::Group { inner: Box::new(grow(rng, leaf, depth - 1)), span },
        }
    }

    let mut definitions = Vec::new();
    for _ in 0..rng.random_range(1..=8) {
        let e = &model.elements[rng.random_range(0..model.elements.len())];
        let segments = if !e.members.is_empty() && rng.random_range(0..2) == 0 {
            let m = &e.members[rng.random_range(0..e.members.len())];
            vec![e.name.clone(), m.name.clone()]
        } else {
            vec![e.name.clone()]
        };
        let constraint_id = if rng.random_range(0..3) > 0 {
            Some(Name { text: kinds[rng.random_range(0..kinds.len())].into(), span })
        } else {
            None
        };
        let constraint = if rng.random_range(0..5) > 0 {
            Some(grow(rng, &mut leaf, 3))
        } else {
            None
        };
        definitions.push(ConstraintDef {
            target: PathRef { segments, span },
            constraint_id,
            constraint,
            span,
        });
    }
    MappingDocument { definitions }
}

#[test]
fn criterion_8_round_trips() {
    criterion(8, "renderers round-trip and canonicalization is idempotent", || {
        // Models: parse, pretty-print, parse again, compare.
        for (name, src) in [
            ("meta", mcc::selfhost::META_ASM),
            ("arith", ARITH_ASM),
            ("refdemo", REFDEMO_ASM),
        ] {
            let (model, diags) = parse_model(src);
            let model = model.ok_or_else(|| format!("{name} does not parse: {diags:?}"))?;
            let rendered = render_model(&model);
            let (again, diags) = parse_model(&rendered);
            let again = again.ok_or_else(|| format!("rendered {name} does not parse: {diags:?}"))?;
            ensure!(model == again, "{name} changes across render + parse");
        }

        // Mappings likewise; the renderer always emits the repaired form,
        // so the second parse can be strict.
        for style in Style::ALL {
            let doc = bootstrap_document(style);
            let rendered = render_mapping(&doc);
            let (again, diags) = parse_mapping(&rendered, false);
            ensure!(
                diags.is_empty(),
                "rendered {} mapping reports {diags:?}",
                style.name()
            );
            ensure!(doc == again, "{} mapping changes across render + parse", style.name());
        }

        // Canonicalizing an already-lowered set must be a no-op, whatever
        // the mapping looked like.
        let model = meta_model();
        let mut rng = StdRng::seed_from_u64(0x6d6363);
        for i in 0..100 {
            let doc = random_doc(&mut rng, &model);
            let (set, _) = lower(&model, &doc);
            let (again, _) = canonicalize(&set, &model);
            ensure!(again == set, "canonicalize changed lowered set #{i} for {doc:?}");
        }
        Ok(())
    });
}
