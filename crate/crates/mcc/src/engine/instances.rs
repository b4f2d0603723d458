//! Typed instance graphs built from a resolved derivation.
//!
//! Delimiters disappear, helper nodes splice their items into the
//! enclosing member slot, and token-targeted members keep plain text.
//! Reference members hold the referenced identifier text plus, after
//! `resolve_references`, the node id it names.

use std::collections::BTreeMap;

use serde_json::{json, Value as Json};

use crate::asm::Model;
use crate::csm::{Grammar, ProductionKind, Role};
use crate::diag::{nearest, Diagnostic, Span};

use super::lexer::Token;
use super::{Tree, TreeKind};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    /// A child instance.
    Node(usize),
    /// Token text captured directly.
    Text(String),
    /// A reference by name; `target` is filled in by resolution.
    Ref { text: String, target: Option<usize> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceNode {
    pub id: usize,
    pub element: String,
    pub span: Span,
    /// Token instances carry their matched text.
    pub value: Option<String>,
    /// Member slots in model order; lists keep item order.
    pub members: BTreeMap<String, Vec<Value>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceGraph {
    pub language: String,
    pub root: usize,
    pub nodes: Vec<InstanceNode>,
}

impl InstanceGraph {
    /// JSON with deterministic key order. Nodes are numbered in pre-order;
    /// member slots are shaped by the model (single-valued members serialize
    /// as one value or null, repeatable ones as arrays). Child instances
    /// appear as node ids, token text as strings. Resolved references are
    /// listed again as explicit edges, since they are what makes the result
    /// a graph rather than a tree.
    pub fn to_stable_json(&self, model: &Model) -> Json {
        let nodes: Vec<Json> = self.nodes.iter().map(|n| self.node_json(n, model)).collect();
        let mut edges = Vec::new();
        for node in &self.nodes {
            for (member, values) in &node.members {
                for v in values {
                    if let Value::Ref { target: Some(t), .. } = v {
                        edges.push(json!({ "from": node.id, "member": member, "to": t }));
                    }
                }
            }
        }
        json!({
            "language": self.language,
            "roots": [self.root],
            "nodes": nodes,
            "edges": edges,
        })
    }

    fn node_json(&self, node: &InstanceNode, model: &Model) -> Json {
        let mut obj = serde_json::Map::new();
        obj.insert("id".into(), json!(node.id));
        obj.insert("element".into(), json!(node.element));
        obj.insert("span".into(), json!([node.span.start, node.span.end]));
        if let Some(v) = &node.value {
            obj.insert("value".into(), json!(v));
        }
        if !node.members.is_empty() {
            let mut members = serde_json::Map::new();
            for (name, values) in &node.members {
                let single = model
                    .element(&node.element)
                    .and_then(|e| e.member(name))
                    .is_some_and(|m| m.max == Some(1));
                let rendered = if single {
                    values.first().map(value_json).unwrap_or(Json::Null)
                } else {
                    Json::Array(values.iter().map(value_json).collect())
                };
                members.insert(name.clone(), rendered);
            }
            obj.insert("members".into(), Json::Object(members));
        }
        Json::Object(obj)
    }
}

fn value_json(v: &Value) -> Json {
    match v {
        Value::Node(id) => json!(id),
        Value::Text(t) => json!(t),
        // The referenced text; the resolved target is in the edges array.
        Value::Ref { text, .. } => json!(text),
    }
}

pub fn build_instances(
    grammar: &Grammar,
    model: &Model,
    tokens: &[Token],
    tree: &Tree,
) -> InstanceGraph {
    let mut b = Builder { grammar, model, tokens, nodes: Vec::new() };
    let root = b.node(tree);
    InstanceGraph { language: model.name.clone(), root, nodes: b.nodes }
}

struct Builder<'a> {
    grammar: &'a Grammar,
    model: &'a Model,
    tokens: &'a [Token],
    nodes: Vec<InstanceNode>,
}

impl<'a> Builder<'a> {
    fn span_of(&self, tree: &Tree) -> Span {
        if tree.start < tree.end {
            self.tokens[tree.start].span.join(self.tokens[tree.end - 1].span)
        } else if tree.start < self.tokens.len() {
            Span::point(self.tokens[tree.start].span.start)
        } else {
            Span::point(self.tokens.last().map(|t| t.span.end).unwrap_or(0))
        }
    }

    /// Builds the instance a tree stands for: a token leaf or an element
    /// production, possibly through variant wrappers.
    fn node(&mut self, tree: &Tree) -> usize {
        match &tree.kind {
            TreeKind::Leaf => {
                let token = &self.tokens[tree.start];
                self.push(InstanceNode {
                    id: 0,
                    element: token.kind.clone(),
                    span: token.span,
                    value: Some(token.text.clone()),
                    members: BTreeMap::new(),
                })
            }
            TreeKind::Node { prod, children } => {
                match &self.grammar.productions[*prod].kind {
                    ProductionKind::Variant { .. } => self.node(&children[0]),
                    ProductionKind::Element(element) => {
                        let element = element.clone();
                        let mut members: BTreeMap<String, Vec<Value>> = BTreeMap::new();
                        if let Some(def) = self.model.element(&element) {
                            for m in &def.members {
                                members.insert(m.name.clone(), Vec::new());
                            }
                        }
                        let id = self.push(InstanceNode {
                            id: 0,
                            element: element.clone(),
                            span: self.span_of(tree),
                            value: None,
                            members: BTreeMap::new(),
                        });
                        self.fill(&element, tree, &mut members);
                        self.nodes[id].members = members;
                        id
                    }
                    other => unreachable!("not an instance production: {other:?}"),
                }
            }
        }
    }

    fn push(&mut self, mut node: InstanceNode) -> usize {
        let id = self.nodes.len();
        node.id = id;
        self.nodes.push(node);
        id
    }

    /// Walks a production's children, dropping delimiters and splicing
    /// helpers, collecting member values.
    fn fill(&mut self, element: &str, tree: &Tree, members: &mut BTreeMap<String, Vec<Value>>) {
        let TreeKind::Node { prod, children } = &tree.kind else { return };
        let p = &self.grammar.productions[*prod];
        for (child, role) in children.iter().zip(&p.roles) {
            let Role::Member(member) = role else { continue };
            self.member_value(element, member, child, members);
        }
    }

    fn member_value(
        &mut self,
        element: &str,
        member: &str,
        child: &Tree,
        members: &mut BTreeMap<String, Vec<Value>>,
    ) {
        match &child.kind {
            TreeKind::Leaf => {
                let text = self.tokens[child.start].text.clone();
                let is_ref = self
                    .model
                    .element(element)
                    .and_then(|e| e.member(member))
                    .is_some_and(|m| m.is_ref);
                let value = if is_ref { Value::Ref { text, target: None } } else { Value::Text(text) };
                members.entry(member.to_string()).or_default().push(value);
            }
            TreeKind::Node { prod, .. } => match &self.grammar.productions[*prod].kind {
                ProductionKind::Helper { .. } => self.fill(element, child, members),
                ProductionKind::Delims => {}
                _ => {
                    let id = self.node(child);
                    members.entry(member.to_string()).or_default().push(Value::Node(id));
                }
            },
        }
    }
}

/// Fills `Ref` targets from the id members declared in the model.
/// Duplicate ids, unknown names, and names matching several instances
/// are errors.
pub fn resolve_references(model: &Model, graph: &mut InstanceGraph) -> Vec<Diagnostic> {
    let mut diags = Vec::new();

    // (concrete element, id text) -> node ids.
    let mut table: BTreeMap<(String, String), Vec<usize>> = BTreeMap::new();
    for node in &graph.nodes {
        let Some(def) = model.element(&node.element) else { continue };
        for m in &def.members {
            if !m.is_id {
                continue;
            }
            for v in node.members.get(&m.name).into_iter().flatten() {
                if let Value::Text(t) = v {
                    table.entry((node.element.clone(), t.clone())).or_default().push(node.id);
                }
            }
        }
    }
    for ((element, text), ids) in &table {
        if ids.len() > 1 {
            let mut d = Diagnostic::error(
                "engine.duplicate-id",
                format!("`{text}` identifies {} `{element}` instances", ids.len()),
            )
            .at(graph.nodes[ids[1]].span);
            for id in ids {
                d = d.note(format!(
                    "defined at offsets {}..{}",
                    graph.nodes[*id].span.start, graph.nodes[*id].span.end
                ));
            }
            diags.push(d);
        }
    }

    // Collect target assignments immutably, then apply.
    let mut assignments: Vec<(usize, String, usize, usize)> = Vec::new();
    for node in &graph.nodes {
        let Some(def) = model.element(&node.element) else { continue };
        for m in &def.members {
            if !m.is_ref {
                continue;
            }
            let closure = model.variant_closure(&m.target);
            for (idx, v) in node.members.get(&m.name).into_iter().flatten().enumerate() {
                let Value::Ref { text, .. } = v else { continue };
                let matches: Vec<usize> = closure
                    .iter()
                    .filter_map(|c| table.get(&(c.clone(), text.clone())))
                    .flatten()
                    .copied()
                    .collect();
                match matches.len() {
                    0 => {
                        let mut d = Diagnostic::error(
                            "engine.unknown-ref",
                            format!("`{text}` does not name any `{}`", m.target),
                        )
                        .at(node.span);
                        let known = table
                            .keys()
                            .filter(|(e, _)| closure.contains(e))
                            .map(|(_, t)| t.as_str());
                        if let Some(n) = nearest(text, known) {
                            d = d.note(format!("did you mean `{n}`?"));
                        }
                        diags.push(d);
                    }
                    1 => assignments.push((node.id, m.name.clone(), idx, matches[0])),
                    _ => {
                        // Same-element duplicates were already reported.
                        let buckets: std::collections::BTreeSet<&String> = closure
                            .iter()
                            .filter(|c| table.contains_key(&((*c).clone(), text.clone())))
                            .collect();
                        if buckets.len() > 1 {
                            diags.push(
                                Diagnostic::error(
                                    "engine.ambiguous-ref",
                                    format!(
                                        "`{text}` matches instances of {}",
                                        buckets
                                            .iter()
                                            .map(|b| format!("`{b}`"))
                                            .collect::<Vec<_>>()
                                            .join(" and ")
                                    ),
                                )
                                .at(node.span),
                            );
                        }
                    }
                }
            }
        }
    }
    for (node, member, idx, target) in assignments {
        if let Some(Value::Ref { target: t, .. }) =
            graph.nodes[node].members.get_mut(&member).and_then(|vs| vs.get_mut(idx))
        {
            *t = Some(target);
        }
    }
    diags
}
