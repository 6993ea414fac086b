//! umt — a constraint-driven model transformation engine.
//!
//! A transformation is specified as assumptions plus an ordered list of
//! constraints in conjunctive-implicative form (`∀ s : S · SCond implies
//! ∃ t : T · Post`), written in a small first-order/OCL-style expression
//! language. The engine:
//!
//! 1. parses and validates the metamodels the models conform to
//!    ([`metamodel`]),
//! 2. loads models in a line-oriented text format ([`model`]),
//! 3. parses, resolves and classifies the transformation spec ([`spec`]),
//! 4. derives a phased design — one phase per constraint, ordered by the
//!    target-entity dependency relation — and statically checks each
//!    constraint's non-interference condition ([`planner`]),
//! 5. executes the plan by constructive interpretation of the succedents
//!    ([`engine`]), and
//! 6. re-verifies every constraint declaratively over the result
//!    ([`engine::verify_cons`]).
//!
//! The `umt` binary exposes all of this as `check`, `plan`, `run` and
//! `verify` commands over the textual formats.

pub mod cli;
pub mod engine;
pub mod error;
pub mod expr;
pub mod lexer;
pub mod metamodel;
pub mod model;
pub mod planner;
pub mod spec;

pub use error::{Diagnostic, Pos, Result, UmtError};
