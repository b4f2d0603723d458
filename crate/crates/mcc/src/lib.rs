//! Model-based parser generation.
//!
//! Instead of writing a grammar and then bolting an abstract syntax tree onto
//! it, you start from the tree: an *abstract syntax model* (ASM) declares the
//! elements of a language and how they compose. A separate *mapping* layer
//! states, as individual constraints, how those elements look in text: which
//! delimiters wrap a member, which separator joins a list, which pattern
//! defines a token, which of two operators binds tighter. From the model and
//! the constraint set the crate derives a working grammar, parses input with
//! it, and returns typed instance graphs of the model rather than parse trees.
//!
//! The pieces line up as a pipeline:
//!
//! ```text
//! .asm file ──> asm::parse_model ──> Model
//! .mcd files ─> dsl::parse_mapping ─> MappingDocument
//!                      │
//!                      v
//!        constraints::lower / merge ──> CanonicalConstraintSet
//!                      │
//!                      v
//!            csm::derive_grammar ──> Grammar
//!                      │
//!                      v
//!    engine::{lex, recognize, disambiguate} / parse_text
//!                      │
//!                      v
//!               InstanceGraph (+ resolved references)
//! ```
//!
//! Constraints can be written property-style (`Expr.items[separator]: ","`),
//! grammar-style (`Expr: item ("," item)*`), or any mixture; the lowering step
//! normalizes all of them into the same canonical form, so equivalent mapping
//! files are interchangeable. The mapping language is expressive enough to
//! describe itself, and [`selfhost`] ships that description: a model of the
//! mapping notation plus three stylistically different mapping files for it,
//! used as an end-to-end fixture.
//!
//! The `examples/` directory is the guided tour; each example exercises one
//! capability against the bundled fixtures. A small `mcc` binary wraps the
//! same entry points for shell use.

pub mod asm;
pub mod cli;
pub mod constraints;
pub mod csm;
pub mod diag;
pub mod dsl;
pub mod engine;
pub mod pattern;
pub mod selfhost;
mod strings;

pub use asm::Model;
pub use constraints::CanonicalConstraintSet;
pub use csm::Grammar;
pub use diag::{Diagnostic, Severity, Span};
pub use engine::InstanceGraph;
