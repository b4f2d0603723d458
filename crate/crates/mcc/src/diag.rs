//! Diagnostics shared by every stage: byte spans, two severities, stable
//! symbolic codes, and plain or colored terminal rendering.
//!
//! Codes are dotted strings (`"asm.duplicate-element"`) and are part of the
//! crate's contract: tests and downstream tooling match on them, messages are
//! free to change.

use serde::Serialize;
use std::fmt;

/// Half-open byte range into some source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn point(at: usize) -> Self {
        Span { start: at, end: at }
    }

    /// Smallest span covering both.
    pub fn join(self, other: Span) -> Span {
        Span {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Warning => write!(f, "warning"),
            Severity::Error => write!(f, "error"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    /// Stable symbolic code, e.g. `"dsl.unknown-constraint-id"`.
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub span: Option<Span>,
    /// Which input the span refers to, when several are in play.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub origin: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Diagnostic {
    pub fn error(code: &'static str, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code,
            message: message.into(),
            span: None,
            origin: None,
            notes: Vec::new(),
        }
    }

    pub fn warning(code: &'static str, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            ..Diagnostic::error(code, message)
        }
    }

    pub fn at(mut self, span: Span) -> Self {
        self.span = Some(span);
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn from_origin(mut self, origin: impl Into<String>) -> Self {
        if self.origin.is_none() {
            self.origin = Some(origin.into());
        }
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}

pub fn error_count(diags: &[Diagnostic]) -> usize {
    diags.iter().filter(|d| d.is_error()).count()
}

pub fn warning_count(diags: &[Diagnostic]) -> usize {
    diags.iter().filter(|d| !d.is_error()).count()
}

/// Maps byte offsets to 1-based line and column numbers.
pub struct LineIndex {
    line_starts: Vec<usize>,
}

impl LineIndex {
    pub fn new(text: &str) -> Self {
        let mut line_starts = vec![0];
        for (i, b) in text.bytes().enumerate() {
            if b == b'\n' {
                line_starts.push(i + 1);
            }
        }
        LineIndex { line_starts }
    }

    /// Column counts characters, not bytes, so multibyte text lines up.
    pub fn locate(&self, text: &str, offset: usize) -> (usize, usize) {
        let line = match self.line_starts.binary_search(&offset) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        let start = self.line_starts[line];
        let col = text[start..offset.min(text.len())].chars().count();
        (line + 1, col + 1)
    }
}

/// Closest candidate within edit distance 2, for "did you mean" notes.
pub(crate) fn nearest<'a>(
    want: &str,
    candidates: impl Iterator<Item = &'a str>,
) -> Option<&'a str> {
    candidates
        .map(|c| (edit_distance(want, c), c))
        .filter(|(d, _)| *d <= 2)
        .min_by_key(|(d, _)| *d)
        .map(|(_, c)| c)
}

fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut prev = row[0];
        row[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let cost = if ca == cb { prev } else { prev + 1 };
            prev = row[j + 1];
            row[j + 1] = cost.min(row[j] + 1).min(row[j + 1] + 1);
        }
    }
    row[b.len()]
}

const RESET: &str = "\x1b[0m";
const BOLD: &str = "\x1b[1m";
const RED: &str = "\x1b[31m";
const YELLOW: &str = "\x1b[33m";
const BLUE: &str = "\x1b[34m";

/// Render one diagnostic against the text it refers to.
///
/// `source_name` is whatever should appear in the `-->` line, typically a
/// file path; the diagnostic's own `origin` wins if set.
pub fn render(diag: &Diagnostic, source_name: &str, text: &str, color: bool) -> String {
    let mut out = String::new();
    let (sev_color, sev) = match diag.severity {
        Severity::Error => (RED, "error"),
        Severity::Warning => (YELLOW, "warning"),
    };
    if color {
        out.push_str(BOLD);
        out.push_str(sev_color);
    }
    out.push_str(sev);
    out.push('[');
    out.push_str(diag.code);
    out.push(']');
    if color {
        out.push_str(RESET);
        out.push_str(BOLD);
    }
    out.push_str(": ");
    out.push_str(&diag.message);
    if color {
        out.push_str(RESET);
    }
    out.push('\n');
    if let Some(span) = diag.span {
        let name = diag.origin.as_deref().unwrap_or(source_name);
        let index = LineIndex::new(text);
        let (line, col) = index.locate(text, span.start);
        if color {
            out.push_str(BLUE);
        }
        out.push_str("  --> ");
        if color {
            out.push_str(RESET);
        }
        out.push_str(&format!("{name}:{line}:{col}\n"));
    }
    for note in &diag.notes {
        out.push_str("  = note: ");
        out.push_str(note);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_index_locates_offsets() {
        let text = "ab\ncd\n\nefg";
        let idx = LineIndex::new(text);
        assert_eq!(idx.locate(text, 0), (1, 1));
        assert_eq!(idx.locate(text, 2), (1, 3));
        assert_eq!(idx.locate(text, 3), (2, 1));
        assert_eq!(idx.locate(text, 6), (3, 1));
        assert_eq!(idx.locate(text, 7), (4, 1));
        assert_eq!(idx.locate(text, 10), (4, 4));
    }

    #[test]
    fn line_index_counts_chars_not_bytes() {
        let text = "αβ\nγx";
        let idx = LineIndex::new(text);
        // γ is 2 bytes; x sits at byte 7 but column 2.
        assert_eq!(idx.locate(text, 7), (2, 2));
    }

    #[test]
    fn render_plain() {
        let d = Diagnostic::error("asm.test", "boom")
            .at(Span::new(3, 4))
            .note("context");
        let out = render(&d, "m.asm", "ab\ncd", false);
        assert_eq!(out, "error[asm.test]: boom\n  --> m.asm:2:1\n  = note: context\n");
    }

    #[test]
    fn render_color_wraps_severity() {
        let d = Diagnostic::warning("x.y", "w");
        let out = render(&d, "f", "", true);
        assert!(out.starts_with("\x1b[1m\x1b[33mwarning"));
        assert!(out.contains("\x1b[0m"));
    }

    #[test]
    fn nearest_suggests_close_names() {
        let names = ["prefix", "suffix", "separator"];
        assert_eq!(nearest("prefx", names.iter().copied()), Some("prefix"));
        assert_eq!(nearest("sufix", names.iter().copied()), Some("suffix"));
        assert_eq!(nearest("wildly_off", names.iter().copied()), None);
    }

    #[test]
    fn severity_ordering() {
        assert!(Severity::Error > Severity::Warning);
        let diags = vec![
            Diagnostic::warning("a.b", "w"),
            Diagnostic::error("c.d", "e"),
        ];
        assert!(has_errors(&diags));
        assert_eq!(error_count(&diags), 1);
        assert_eq!(warning_count(&diags), 1);
    }
}
