//! Parsers and printers for the three textual formulation languages.
//!
//! * [`lp`]: logic programs with `Predicates:`, `Facts:`, `Rules:` and
//!   `Query:` sections; rules are written `A($x, True) && B($x) >>> C($x)`.
//! * [`fol`]: first-order formulas in constructor notation
//!   (`Forall($x, Implies(Atom('P', $x), Atom('Q', $x)))`) under `Facts:` and
//!   `Query:`.
//! * [`csp`]: finite-domain models with `Domain:`, `Variables:`,
//!   `Constraints:` and `Query:` sections.
//!
//! Every parser gathers all recoverable errors instead of stopping at the
//! first, and every error carries a [`SourceSpan`](crate::ir::SourceSpan) and
//! a message quoting the offending token. Text after `:::` on a line is a
//! natural-language gloss and never changes the logical content.

pub mod csp;
pub mod error;
pub mod fol;
pub mod lexer;
pub mod lp;
pub mod sections;

use crate::ir::{SourceSpan, Term};

pub use csp::{parse_csp, print_csp};
pub use error::{ParseError, ParseErrorKind, ParseErrors};
pub use fol::{parse_fol, print_fol};
pub use lp::{parse_lp, print_lp};

use lexer::{is_plain_ident, Cursor, Tok};

/// A successful parse plus non-fatal warnings (ignored chatter, lint).
#[derive(Clone, Debug, PartialEq)]
pub struct Parsed<T> {
    pub value: T,
    pub warnings: Vec<String>,
}

pub type ParseResult<T> = Result<Parsed<T>, ParseErrors>;

/// Renders a name, quoting it when it would not lex back as a bare
/// identifier. Single quotes are canonical.
pub(crate) fn quote(name: &str) -> String {
    if name.contains('\'') {
        format!("\"{name}\"")
    } else {
        format!("'{name}'")
    }
}

pub(crate) fn constant_needs_quotes(name: &str) -> bool {
    !is_plain_ident(name) || name == "True" || name == "False"
}

/// Term syntax shared by logic programs and FOL formulas.
pub(crate) fn parse_term(cur: &mut Cursor<'_>) -> Result<(Term, SourceSpan), ParseError> {
    let span = cur.here();
    let Some(tok) = cur.peek_tok() else {
        return Err(cur.error("a term"));
    };
    let term = match tok {
        Tok::Var(v) => Term::Variable(v.clone()),
        Tok::Ident(s) if s == "True" => Term::Bool(true),
        Tok::Ident(s) if s == "False" => Term::Bool(false),
        Tok::Ident(s) | Tok::Str(s) => Term::Constant(s.clone()),
        Tok::Int(i) => Term::Int(*i),
        Tok::Minus => {
            cur.next();
            return match cur.peek_tok() {
                Some(Tok::Int(i)) => {
                    let i = *i;
                    let end = cur.here();
                    cur.next();
                    Ok((
                        Term::Int(-i),
                        SourceSpan::new(span.line, span.column, end.column + end.length - span.column),
                    ))
                }
                _ => Err(cur.error("an integer after '-'")),
            };
        }
        _ => return Err(cur.error("a term (variable, constant, number or boolean)")),
    };
    cur.next();
    Ok((term, span))
}

pub(crate) fn print_term(term: &Term, quote_constants: bool) -> String {
    match term {
        Term::Constant(c) if quote_constants || constant_needs_quotes(c) => quote(c),
        other => other.to_string(),
    }
}

/// Records the arity a predicate is first seen with and reports later
/// conflicting uses.
#[derive(Default)]
pub(crate) struct ArityTable {
    seen: indexmap::IndexMap<String, usize>,
}

impl ArityTable {
    pub fn check(&mut self, predicate: &str, arity: usize, span: SourceSpan) -> Option<ParseError> {
        match self.seen.get(predicate) {
            Some(&expected) if expected != arity => Some(ParseError::new(
                ParseErrorKind::ArityMismatch,
                span,
                format!("predicate '{predicate}' is used with {arity} argument(s) but was first used with {expected}"),
            )),
            Some(_) => None,
            None => {
                self.seen.insert(predicate.to_string(), arity);
                None
            }
        }
    }

    pub fn nullary_warnings(&self) -> Vec<String> {
        self.seen
            .iter()
            .filter(|(_, &a)| a == 0)
            .map(|(p, _)| format!("predicate '{p}' has arity 0"))
            .collect()
    }
}

pub(crate) fn finish<T>(value: Option<T>, mut errors: Vec<ParseError>, warnings: Vec<String>) -> ParseResult<T> {
    match value {
        Some(value) if errors.is_empty() => Ok(Parsed { value, warnings }),
        _ => {
            errors.sort_by_key(|e| (e.span.line, e.span.column));
            if errors.is_empty() {
                errors.push(ParseError::new(
                    ParseErrorKind::Syntax,
                    SourceSpan::new(1, 1, 0),
                    "no program found",
                ));
            }
            Err(ParseErrors(errors))
        }
    }
}
