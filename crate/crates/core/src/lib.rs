//! Neuro-symbolic logical reasoning toolkit.
//!
//! A natural-language problem is translated (by a text-generation provider,
//! or from fixtures) into one of three symbolic languages, solved by a
//! deterministic engine, and mapped back to a multiple-choice answer:
//!
//! | language | parser | engine |
//! |---|---|---|
//! | logic program | [`syntax::parse_lp`] | [`lp`] forward/backward chaining |
//! | first-order logic | [`syntax::parse_fol`] | [`fol`] CNF + resolution |
//! | constraint model | [`syntax::parse_csp`] | [`csp`] propagation + backtracking |
//!
//! Invalid formulations are repaired by the [`pipeline`]'s self-refinement
//! loop, which feeds parser and solver error messages back to the provider.

pub mod csp;
pub mod fol;
pub mod ir;
pub mod lp;
pub mod pipeline;
pub mod syntax;

pub use ir::{Atom, Clause, Formula, Literal, SourceSpan, Term, TruthValue, Verdict};
