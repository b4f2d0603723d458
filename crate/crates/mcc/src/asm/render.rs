//! Canonical text output for models. Parsing the rendered text yields the
//! same model; the layout is fixed and says nothing about the original file.

use super::{AnnotationUse, AnnotationValue, ElementKind, MemberDef, Model};
use crate::constraints::ConstraintKind;
use crate::strings;
use std::fmt::Write;

pub fn render_model(model: &Model) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "language {}", model.name);
    if !model.skips.is_empty() {
        out.push('\n');
        for skip in &model.skips {
            let _ = writeln!(out, "skip {}", strings::quote(&skip.pattern));
        }
    }
    for element in &model.elements {
        out.push('\n');
        match &element.kind {
            ElementKind::Token => {
                let _ = write!(out, "token {}", element.name);
                render_annotations(&mut out, &element.annotations);
                out.push('\n');
            }
            ElementKind::Alternative(variants) => {
                let _ = write!(out, "element {}", element.name);
                render_annotations(&mut out, &element.annotations);
                let _ = writeln!(out, " = {}", variants.join(" | "));
            }
            ElementKind::Composite => {
                let _ = write!(out, "element {}", element.name);
                render_annotations(&mut out, &element.annotations);
                if element.members.is_empty() {
                    out.push_str(" { }\n");
                } else {
                    out.push_str(" {\n");
                    for member in &element.members {
                        render_member(&mut out, member);
                    }
                    out.push_str("}\n");
                }
            }
        }
    }
    out
}

fn render_member(out: &mut String, member: &MemberDef) {
    out.push_str("  ");
    if member.is_id {
        out.push_str("id ");
    }
    if member.is_ref {
        out.push_str("ref ");
    }
    let _ = write!(out, "{}: {}", member.name, member.target);
    match (member.min, member.max) {
        (1, Some(1)) => {}
        (0, Some(1)) => out.push('?'),
        (0, None) => out.push('*'),
        (1, None) => out.push('+'),
        (min, Some(max)) if min == max => {
            let _ = write!(out, "{{{min}}}");
        }
        (min, Some(max)) => {
            let _ = write!(out, "{{{min},{max}}}");
        }
        (min, None) => {
            let _ = write!(out, "{{{min},}}");
        }
    }
    render_annotations(out, &member.annotations);
    out.push('\n');
}

fn render_annotations(out: &mut String, annotations: &[AnnotationUse]) {
    for ann in annotations {
        let name = match ann.kind {
            ConstraintKind::Pattern => "Pattern",
            ConstraintKind::Value => "Value",
            ConstraintKind::Prefix => "Prefix",
            ConstraintKind::Suffix => "Suffix",
            ConstraintKind::Separator => "Separator",
            ConstraintKind::Associativity => "Associativity",
            ConstraintKind::Composition => "Composition",
            ConstraintKind::Priority => "Priority",
            // Structural kinds fold at parse time and never get here, but
            // render them as themselves rather than panic.
            ConstraintKind::Optional => "Optional",
            ConstraintKind::Minimum => "Minimum",
            ConstraintKind::Maximum => "Maximum",
            ConstraintKind::Id => "ID",
            ConstraintKind::Reference => "Reference",
            ConstraintKind::MemberOrder => "Order",
        };
        let _ = write!(out, " @{name}");
        match &ann.value {
            AnnotationValue::Flag => {}
            AnnotationValue::Texts(ts) => {
                let quoted: Vec<String> = ts.iter().map(|t| strings::quote(t)).collect();
                let _ = write!(out, "({})", quoted.join(", "));
            }
            AnnotationValue::Int(n) => {
                let _ = write!(out, "({n})");
            }
            AnnotationValue::Word(w) => {
                let _ = write!(out, "({w})");
            }
        }
    }
}
