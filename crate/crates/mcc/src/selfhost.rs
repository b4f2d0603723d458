//! The mapping notation, hosted on itself.
//!
//! `fixtures/meta.asm` models the constraint mapping language: a mapping
//! file is a list of definitions, a definition is a target path plus an
//! optional bracketed constraint id and an optional constraint, and
//! constraints are built from juxtaposition, `<` chains, `|` chains, the
//! postfix operators and parentheses. Three bundled mapping files give
//! that model its concrete syntax in three styles: one property per
//! definition, grammar-style productions, and a mixture of the two. All
//! three lower to the same canonical constraint set, so a parser derived
//! from any one of them reads the others' source text.
//!
//! [`selftest`] drives the whole loop. It bootstrap-parses the mappings
//! with the handwritten parser, checks the three lowered sets agree,
//! derives a parser from them, re-reads the same mapping files with that
//! parser, converts the resulting instance graphs back into documents,
//! and confirms both the canonical set and the derived grammar come out
//! unchanged.

use crate::asm::{parse_model, validate_model, Model};
use crate::constraints::{self, CanonicalConstraintSet};
use crate::csm::{derive_grammar, Grammar};
use crate::diag::{has_errors, Diagnostic};
use crate::dsl::{
    self, ConstraintDef, ConstraintExpr, MappingDocument, Name, PathRef,
};
use crate::engine::{parse_text, InstanceGraph, InstanceNode, Value};
use crate::strings;

/// The abstract syntax of the mapping notation.
pub const META_ASM: &str = include_str!("../fixtures/meta.asm");
/// One constraint property per definition.
pub const PROPERTY_MCD: &str = include_str!("../fixtures/property_style.mcd");
/// Grammar-style productions, one per element.
pub const GRAMMAR_MCD: &str = include_str!("../fixtures/grammar_style.mcd");
/// Properties and productions mixed in one file.
pub const MIXED_MCD: &str = include_str!("../fixtures/mixed_style.mcd");

/// Selects one of the bundled mapping files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Property,
    Grammar,
    Mixed,
}

impl Style {
    pub const ALL: [Style; 3] = [Style::Property, Style::Grammar, Style::Mixed];

    pub fn source(self) -> &'static str {
        match self {
            Style::Property => PROPERTY_MCD,
            Style::Grammar => GRAMMAR_MCD,
            Style::Mixed => MIXED_MCD,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Style::Property => "property",
            Style::Grammar => "grammar",
            Style::Mixed => "mixed",
        }
    }
}

/// The bundled model, parsed. Panics if the fixture is broken, which
/// would be a bug in this crate rather than in caller input.
pub fn meta_model() -> Model {
    let (model, diags) = parse_model(META_ASM);
    assert!(!has_errors(&diags), "bundled model does not parse: {diags:?}");
    model.expect("bundled model does not parse")
}

/// One bundled mapping, parsed with the handwritten parser. Lenient mode,
/// because the property-style file spells two definitions without the
/// colon on purpose. Panics on broken fixtures, like [`meta_model`].
pub fn bootstrap_document(style: Style) -> MappingDocument {
    let (doc, diags) = dsl::parse_mapping(style.source(), true);
    assert!(
        !has_errors(&diags),
        "bundled {} mapping does not parse: {diags:?}",
        style.name()
    );
    doc
}

/// The canonical constraint set of one bundled mapping.
pub fn mapping_set(style: Style) -> CanonicalConstraintSet {
    let model = meta_model();
    let (set, diags) = constraints::lower(&model, &bootstrap_document(style));
    assert!(
        !has_errors(&diags),
        "bundled {} mapping does not lower: {diags:?}",
        style.name()
    );
    set
}

/// The parser for the mapping notation, derived from the model defaults
/// plus one bundled mapping. The styles are equivalent, so every choice
/// yields the same grammar.
pub fn generated_grammar(style: Style) -> Grammar {
    let model = meta_model();
    let merged = constraints::merge(&[&constraints::model_defaults(&model), &mapping_set(style)]);
    let (grammar, diags) = derive_grammar(&model, &merged, None);
    assert!(
        !has_errors(&diags),
        "bundled {} mapping does not derive: {diags:?}",
        style.name()
    );
    grammar
}

/// Rebuilds a mapping document from an instance graph of the bundled
/// model. The inverse of parsing as far as document equality goes:
/// spans are approximated by node spans (equality ignores them) and
/// string literals come back unescaped, exactly as the handwritten
/// parser stores them.
pub fn graph_to_document(graph: &InstanceGraph) -> MappingDocument {
    let root = &graph.nodes[graph.root];
    let definitions = member_values(root, "definitions")
        .filter_map(|v| as_node(graph, v))
        .map(|n| definition(graph, n))
        .collect();
    MappingDocument { definitions }
}

fn member_values<'g>(node: &'g InstanceNode, member: &str) -> impl Iterator<Item = &'g Value> {
    node.members.get(member).into_iter().flatten()
}

fn as_node<'g>(graph: &'g InstanceGraph, value: &Value) -> Option<&'g InstanceNode> {
    match value {
        Value::Node(id) => Some(&graph.nodes[*id]),
        _ => None,
    }
}

fn definition(graph: &InstanceGraph, node: &InstanceNode) -> ConstraintDef {
    let target = member_values(node, "target")
        .find_map(|v| as_node(graph, v))
        .map(path)
        .unwrap_or(PathRef { segments: Vec::new(), span: node.span });
    let constraint_id = member_values(node, "constraintID").find_map(|v| match v {
        Value::Text(t) => Some(Name { text: t.clone(), span: node.span }),
        _ => None,
    });
    let constraint = member_values(node, "constraint")
        .find_map(|v| as_node(graph, v))
        .map(|n| expr(graph, n));
    ConstraintDef { target, constraint_id, constraint, span: node.span }
}

fn path(node: &InstanceNode) -> PathRef {
    let segments = member_values(node, "name")
        .filter_map(|v| match v {
            Value::Text(t) => Some(t.clone()),
            _ => None,
        })
        .collect();
    PathRef { segments, span: node.span }
}

fn expr(graph: &InstanceGraph, node: &InstanceNode) -> ConstraintExpr {
    let span = node.span;
    match node.element.as_str() {
        "SequenceSpecification" => ConstraintExpr::Sequence(items(graph, node)),
        "PrecedenceSpecification" => ConstraintExpr::Precedence(items(graph, node)),
        "AlternationSpecification" => ConstraintExpr::Alternation(items(graph, node)),
        "ClausureSpecification" => ConstraintExpr::Many0 { inner: sole(graph, node), span },
        "PositiveClauseSpecification" => ConstraintExpr::Many1 { inner: sole(graph, node), span },
        "OptionalSpecification" => ConstraintExpr::Maybe { inner: sole(graph, node), span },
        "ParenthesizedSpecification" => ConstraintExpr::Group { inner: sole(graph, node), span },
        "Element" => ConstraintExpr::Ref(path(node)),
        "PatternLiteral" => ConstraintExpr::Literal {
            text: unquote(node.value.as_deref().unwrap_or("")),
            span,
        },
        "Integer" => ConstraintExpr::Number {
            value: node.value.as_deref().unwrap_or("0").parse().unwrap_or(0),
            span,
        },
        // The handwritten parser has no boolean syntax of its own; `true`
        // and `false` read back as plain references.
        other => ConstraintExpr::Ref(PathRef {
            segments: vec![node.value.clone().unwrap_or_else(|| other.to_string())],
            span,
        }),
    }
}

fn items(graph: &InstanceGraph, node: &InstanceNode) -> Vec<ConstraintExpr> {
    member_values(node, "constraints")
        .filter_map(|v| as_node(graph, v))
        .map(|n| expr(graph, n))
        .collect()
}

fn sole(graph: &InstanceGraph, node: &InstanceNode) -> Box<ConstraintExpr> {
    Box::new(
        member_values(node, "constraint")
            .find_map(|v| as_node(graph, v))
            .map(|n| expr(graph, n))
            .unwrap_or(ConstraintExpr::Sequence(Vec::new())),
    )
}

/// Strips the quotes off a pattern literal's matched text and resolves
/// its escapes, mirroring what the handwritten lexer does to the same
/// characters.
fn unquote(raw: &str) -> String {
    let body = raw
        .strip_prefix('"')
        .and_then(|r| r.strip_suffix('"'))
        .unwrap_or(raw);
    strings::unescape(body).unwrap_or_else(|_| body.to_string())
}

/// One line of [`selftest`] output.
#[derive(Debug, Clone)]
pub struct StageReport {
    pub stage: &'static str,
    pub ok: bool,
    pub detail: String,
}

impl StageReport {
    fn pass(stage: &'static str, detail: impl Into<String>) -> StageReport {
        StageReport { stage, ok: true, detail: detail.into() }
    }

    fn fail(stage: &'static str, detail: impl Into<String>) -> StageReport {
        StageReport { stage, ok: false, detail: detail.into() }
    }
}

fn first_problem(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .find(|d| d.is_error())
        .or_else(|| diags.first())
        .map(|d| format!("{}: {}", d.code, d.message))
        .unwrap_or_else(|| "no diagnostics".to_string())
}

/// Runs the self-hosting loop end to end, stopping at the first failed
/// stage. The loop passed when every returned report has `ok` set.
pub fn selftest() -> Vec<StageReport> {
    let mut reports = Vec::new();

    // The model itself.
    let (model, mut diags) = parse_model(META_ASM);
    if let Some(m) = &model {
        diags.extend(validate_model(m));
    }
    let model = match model {
        Some(m) if !has_errors(&diags) => {
            reports.push(StageReport::pass("model", format!("{} elements", m.elements.len())));
            m
        }
        _ => {
            reports.push(StageReport::fail("model", first_problem(&diags)));
            return reports;
        }
    };

    // Bootstrap-parse the three mappings with the handwritten parser.
    let mut docs = Vec::new();
    for style in Style::ALL {
        let (doc, diags) = dsl::parse_mapping(style.source(), true);
        if has_errors(&diags) {
            reports.push(StageReport::fail(
                "bootstrap",
                format!("{}: {}", style.name(), first_problem(&diags)),
            ));
            return reports;
        }
        docs.push(doc);
    }
    let counts: Vec<usize> = docs.iter().map(|d| d.definitions.len()).collect();
    if counts != [17, 12, 13] {
        reports.push(StageReport::fail(
            "bootstrap",
            format!("definition counts {counts:?}, expected [17, 12, 13]"),
        ));
        return reports;
    }
    reports.push(StageReport::pass("bootstrap", "17 + 12 + 13 definitions"));

    // Lower each document to its canonical set.
    let mut sets = Vec::new();
    for (style, doc) in Style::ALL.iter().zip(&docs) {
        let (set, diags) = constraints::lower(&model, doc);
        if has_errors(&diags) {
            reports.push(StageReport::fail(
                "lower",
                format!("{}: {}", style.name(), first_problem(&diags)),
            ));
            return reports;
        }
        sets.push(set);
    }
    reports.push(StageReport::pass(
        "lower",
        format!("{} canonical entries", sets[0].entries.len()),
    ));

    // The three styles must mean the same thing.
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            if !constraints::equivalent(&sets[i], &sets[j], &model) {
                reports.push(StageReport::fail(
                    "equivalence",
                    format!("{} and {} disagree", Style::ALL[i].name(), Style::ALL[j].name()),
                ));
                return reports;
            }
        }
    }
    reports.push(StageReport::pass("equivalence", "all styles lower to the same set"));

    // Model defaults plus mapping must be conflict-free.
    let merged = constraints::merge(&[&constraints::model_defaults(&model), &sets[1]]);
    let issues = constraints::check_consistency(&model, &merged);
    if has_errors(&issues) {
        reports.push(StageReport::fail("consistency", first_problem(&issues)));
        return reports;
    }
    reports.push(StageReport::pass("consistency", "no conflicts"));

    // Derive the parser.
    let (grammar, diags) = derive_grammar(&model, &merged, None);
    if has_errors(&diags) {
        reports.push(StageReport::fail("grammar", first_problem(&diags)));
        return reports;
    }
    reports.push(StageReport::pass(
        "grammar",
        format!("{} productions", grammar.productions.len()),
    ));

    // Read the mapping files back with the parser they produced. The
    // colon-less property definitions get the same textual repair the
    // lenient bootstrap parser applies.
    let mut graphs = Vec::new();
    for style in Style::ALL {
        let (repaired, _) = dsl::repair_source(style.source());
        let (graph, diags) = parse_text(&grammar, &model, &repaired);
        match graph {
            Some(g) if !has_errors(&diags) => graphs.push(g),
            _ => {
                reports.push(StageReport::fail(
                    "reparse",
                    format!("{}: {}", style.name(), first_problem(&diags)),
                ));
                return reports;
            }
        }
    }
    reports.push(StageReport::pass("reparse", "derived parser reads all three styles"));

    // The instance graphs must rebuild the bootstrap documents, and those
    // must lower to the sets we started from.
    let mut rebuilt_sets = Vec::new();
    for ((style, graph), (doc, set)) in Style::ALL
        .iter()
        .zip(&graphs)
        .zip(docs.iter().zip(&sets))
    {
        let rebuilt = graph_to_document(graph);
        if rebuilt != *doc {
            reports.push(StageReport::fail(
                "round-trip",
                format!("{}: reconstructed document differs", style.name()),
            ));
            return reports;
        }
        let (lowered, diags) = constraints::lower(&model, &rebuilt);
        if has_errors(&diags) || lowered != *set {
            reports.push(StageReport::fail(
                "round-trip",
                format!("{}: reconstructed set differs", style.name()),
            ));
            return reports;
        }
        rebuilt_sets.push(lowered);
    }
    reports.push(StageReport::pass(
        "round-trip",
        "instance graphs rebuild the bootstrap documents",
    ));

    // Deriving again from the reconstructed set must close the loop.
    let remerged = constraints::merge(&[&constraints::model_defaults(&model), &rebuilt_sets[1]]);
    let (regrammar, diags) = derive_grammar(&model, &remerged, None);
    if has_errors(&diags) || regrammar != grammar {
        reports.push(StageReport::fail("fixpoint", "rederived grammar differs"));
        return reports;
    }
    reports.push(StageReport::pass("fixpoint", "rederived grammar is identical"));

    reports
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::{equivalent, ConstraintKind, ConstraintValue, EntryKey};

    #[test]
    fn bundled_fixtures_are_clean() {
        let model = meta_model();
        assert!(validate_model(&model).is_empty());
        let counts: Vec<usize> = Style::ALL
            .iter()
            .map(|s| bootstrap_document(*s).definitions.len())
            .collect();
        assert_eq!(counts, [17, 12, 13]);
    }

    #[test]
    fn all_styles_lower_to_one_set() {
        let model = meta_model();
        let sets: Vec<_> = Style::ALL.iter().map(|s| mapping_set(*s)).collect();
        assert!(equivalent(&sets[0], &sets[1], &model), "property vs grammar");
        assert!(equivalent(&sets[0], &sets[2], &model), "property vs mixed");

        // Spot checks on the shared set.
        assert_eq!(
            sets[0]
                .entries
                .get(&EntryKey::member("Element", "name", ConstraintKind::Separator)),
            Some(&ConstraintValue::Texts(vec![".".into()]))
        );
        assert_eq!(
            sets[0]
                .entries
                .get(&EntryKey::element("ParenthesizedSpecification", ConstraintKind::Prefix)),
            Some(&ConstraintValue::Texts(vec!["(".into()]))
        );
        let pairs: Vec<_> = sets[0].precedes.iter().cloned().collect();
        assert_eq!(
            pairs,
            [
                ("PrecedenceSpecification".to_string(), "AlternationSpecification".to_string()),
                ("SequenceSpecification".to_string(), "AlternationSpecification".to_string()),
                ("SequenceSpecification".to_string(), "PrecedenceSpecification".to_string()),
            ]
        );
    }

    #[test]
    fn derived_parser_reads_a_single_definition() {
        let model = meta_model();
        let grammar = generated_grammar(Style::Property);
        let (graph, diags) = parse_text(&grammar, &model, "Element.name[separator]: \".\"");
        assert!(!has_errors(&diags), "{diags:?}");
        let doc = graph_to_document(&graph.unwrap());
        assert_eq!(doc.definitions.len(), 1);
        let def = &doc.definitions[0];
        assert_eq!(def.target.segments, ["Element", "name"]);
        assert_eq!(def.constraint_id.as_ref().map(|n| n.text.as_str()), Some("separator"));
        match &def.constraint {
            Some(ConstraintExpr::Literal { text, .. }) => assert_eq!(text, "."),
            other => panic!("expected a literal constraint, got {other:?}"),
        }
    }

    #[test]
    fn selftest_reaches_the_fixpoint() {
        let reports = selftest();
        for r in &reports {
            assert!(r.ok, "stage {} failed: {}", r.stage, r.detail);
        }
        assert_eq!(reports.len(), 9);
    }
}
