//! First-order formulations in constructor notation.
//!
//! ```text
//! Facts:
//! Forall($x1, Implies(Atom('RegularlyDrinkCoffee', $x1), Atom('DependentOnCaffeine', $x1))) ::: ...
//! Query:
//! Xor(Atom('Joke', 'rina'), Atom('Unaware', 'rina'))
//! ```
//!
//! Predicate and constant names may use either quote style; variables may be
//! bare (`$x1`) or quoted (`'$x1'`). List connectives accept both
//! `AndList([a, b])` and `AndList(a, b)`.

use serde::{Deserialize, Serialize};

use crate::ir::{Atom, Formula, SourceSpan, Term};

use super::error::{ParseError, ParseErrorKind};
use super::lexer::{tokenize, Cursor, Tok};
use super::sections::{split_sections, Line};
use super::{finish, parse_term, print_term, quote, ArityTable, ParseResult};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FolStatement {
    pub formula: Formula,
    pub gloss: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FolProblem {
    pub facts: Vec<FolStatement>,
    pub query: FolStatement,
}

impl FolProblem {
    pub fn fact_formulas(&self) -> Vec<Formula> {
        self.facts.iter().map(|f| f.formula.clone()).collect()
    }

    pub fn without_glosses(&self) -> FolProblem {
        let strip = |s: &FolStatement| FolStatement {
            formula: s.formula.clone(),
            gloss: None,
        };
        FolProblem {
            facts: self.facts.iter().map(strip).collect(),
            query: strip(&self.query),
        }
    }
}

struct FormulaParser<'c, 'a> {
    cur: &'c mut Cursor<'a>,
    scope: Vec<String>,
    /// Free variable occurrences, reported after the statement parses.
    unbound: Vec<(String, SourceSpan)>,
    atoms: Vec<(String, usize, SourceSpan)>,
}

impl FormulaParser<'_, '_> {
    fn formula(&mut self) -> Result<Formula, ParseError> {
        let name = match self.cur.peek_tok() {
            Some(Tok::Ident(name)) => name.clone(),
            _ => return Err(self.cur.error("a formula constructor (Atom, Not, And, Or, ...)")),
        };
        let head_span = self.cur.here();
        self.cur.next();
        self.cur.expect(&Tok::LParen, &format!("'(' after '{name}'"))?;
        let f = match name.as_str() {
            "Atom" => self.atom(head_span)?,
            "Not" => Formula::not(self.formula()?),
            "And" | "Or" | "Implies" | "Equiv" | "Xor" => {
                let a = self.formula()?;
                self.cur.expect(&Tok::Comma, &format!("',' between the two arguments of '{name}'"))?;
                let b = self.formula()?;
                match name.as_str() {
                    "And" => Formula::and(a, b),
                    "Or" => Formula::or(a, b),
                    "Implies" => Formula::implies(a, b),
                    "Equiv" => Formula::equiv(a, b),
                    _ => Formula::xor(a, b),
                }
            }
            "AndList" | "OrList" => {
                let bracketed = self.cur.eat(&Tok::LBracket);
                let mut items = vec![self.formula()?];
                while self.cur.eat(&Tok::Comma) {
                    items.push(self.formula()?);
                }
                if bracketed {
                    self.cur.expect(&Tok::RBracket, "',' or ']'")?;
                }
                if items.len() < 2 {
                    return Err(ParseError::new(
                        ParseErrorKind::Syntax,
                        head_span,
                        format!("'{name}' needs at least two members"),
                    ));
                }
                if name == "AndList" {
                    Formula::AndList(items)
                } else {
                    Formula::OrList(items)
                }
            }
            "Exists" | "Forall" => {
                let var = match self.cur.peek_tok() {
                    Some(Tok::Var(v)) => v.clone(),
                    _ => return Err(self.cur.error(&format!("a variable such as '$x1' after '{name}('"))),
                };
                self.cur.next();
                self.cur.expect(&Tok::Comma, "',' after the quantified variable")?;
                self.scope.push(var.clone());
                let body = self.formula();
                self.scope.pop();
                let body = body?;
                if name == "Exists" {
                    Formula::exists(var, body)
                } else {
                    Formula::forall(var, body)
                }
            }
            other => {
                return Err(ParseError::new(
                    ParseErrorKind::Syntax,
                    head_span,
                    format!(
                        "unknown constructor '{other}'; expected one of Atom, Not, And, AndList, Or, OrList, Implies, Equiv, Xor, Exists, Forall"
                    ),
                ))
            }
        };
        self.cur.expect(&Tok::RParen, &format!("')' closing '{name}'"))?;
        Ok(f)
    }

    /// Parses the inside of `Atom(...)` up to, not including, the `)`.
    fn atom(&mut self, head_span: SourceSpan) -> Result<Formula, ParseError> {
        let pred_span = self.cur.here();
        let predicate = match self.cur.peek_tok() {
            Some(Tok::Str(s)) | Some(Tok::Ident(s)) => s.clone(),
            _ => return Err(self.cur.error("a predicate name")),
        };
        self.cur.next();
        let mut args = Vec::new();
        while self.cur.eat(&Tok::Comma) {
            let (term, span) = parse_term(self.cur)?;
            if let Term::Variable(v) = &term {
                if !self.scope.contains(v) {
                    self.unbound.push((v.clone(), span));
                }
            }
            args.push(term);
        }
        if !matches!(self.cur.peek_tok(), Some(Tok::RParen)) {
            return Err(self.cur.error("',' or ')' in atom arguments"));
        }
        let _ = head_span;
        self.atoms.push((predicate.clone(), args.len(), pred_span));
        Ok(Formula::Atom(Atom::new(predicate, args)))
    }
}

struct ParsedStatement {
    statement: FolStatement,
    atoms: Vec<(String, usize, SourceSpan)>,
}

fn parse_statement(line: &Line) -> Result<ParsedStatement, Vec<ParseError>> {
    let (stmt, gloss) = line.split_gloss();
    let tokens = tokenize(stmt, line.number, line.first_column).map_err(|e| vec![e])?;
    let mut cur = Cursor::new(&tokens, line.number, line.first_column + stmt.len());
    let mut p = FormulaParser {
        cur: &mut cur,
        scope: Vec::new(),
        unbound: Vec::new(),
        atoms: Vec::new(),
    };
    let formula = p.formula().map_err(|e| vec![e])?;
    let unbound = std::mem::take(&mut p.unbound);
    let atoms = std::mem::take(&mut p.atoms);
    cur.expect_end().map_err(|e| vec![e])?;
    if !unbound.is_empty() {
        return Err(unbound
            .into_iter()
            .map(|(v, span)| {
                ParseError::new(
                    ParseErrorKind::UnboundVariable,
                    span,
                    format!("free variable '${v}' is not bound by any quantifier"),
                )
            })
            .collect());
    }
    Ok(ParsedStatement {
        statement: FolStatement { formula, gloss },
        atoms,
    })
}

/// Parses one formula in constructor notation (no sections, no gloss).
pub fn parse_formula(text: &str) -> Result<Formula, Vec<ParseError>> {
    let line = Line {
        number: 1,
        chars: text.trim().chars().collect(),
        first_column: 1 + text.chars().take_while(|c| c.is_whitespace()).count(),
    };
    parse_statement(&line).map(|p| p.statement.formula)
}

pub fn parse_fol(text: &str) -> ParseResult<FolProblem> {
    let sections = split_sections(text, &["Predicates", "Facts", "Query"]);
    let mut errors = sections.errors.clone();
    let mut warnings = sections.warnings.clone();
    if let Some(p) = sections.get("Predicates") {
        if !p.lines.is_empty() {
            warnings.push(format!("ignored {} line(s) in the Predicates section", p.lines.len()));
        }
    }
    let fact_sec = sections.require("Facts", &mut errors);
    let query_sec = sections.require("Query", &mut errors);
    let mut arities = ArityTable::default();

    let mut facts = Vec::new();
    for line in fact_sec.map(|s| s.lines.as_slice()).unwrap_or_default() {
        match parse_statement(line) {
            Ok(p) => {
                for (pred, n, span) in &p.atoms {
                    errors.extend(arities.check(pred, *n, *span));
                }
                facts.push(p.statement);
            }
            Err(es) => errors.extend(es),
        }
    }

    let mut query = None;
    if let Some(sec) = query_sec {
        match sec.lines.split_first() {
            None => errors.push(ParseError::new(
                ParseErrorKind::EmptySection,
                SourceSpan::new(sec.header_line, 1, 0),
                "the 'Query:' section is empty; expected one formula",
            )),
            Some((first, rest)) => {
                match parse_statement(first) {
                    Ok(p) => {
                        for (pred, n, span) in &p.atoms {
                            errors.extend(arities.check(pred, *n, *span));
                        }
                        query = Some(p.statement);
                    }
                    Err(es) => errors.extend(es),
                }
                if !rest.is_empty() {
                    warnings.push(format!(
                        "ignored {} trailing line(s) after the query (starting with '{}')",
                        rest.len(),
                        rest[0].text()
                    ));
                }
            }
        }
    }
    warnings.extend(arities.nullary_warnings());
    finish(query.map(|query| FolProblem { facts, query }), errors, warnings)
}

pub fn print_formula(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(f, &mut out);
    out
}

fn write_formula(f: &Formula, out: &mut String) {
    let binary = |name: &str, a: &Formula, b: &Formula, out: &mut String| {
        out.push_str(name);
        out.push('(');
        write_formula(a, out);
        out.push_str(", ");
        write_formula(b, out);
        out.push(')');
    };
    let list = |name: &str, fs: &[Formula], out: &mut String| {
        out.push_str(name);
        out.push_str("([");
        for (i, f) in fs.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            write_formula(f, out);
        }
        out.push_str("])");
    };
    match f {
        Formula::Atom(a) => {
            out.push_str("Atom(");
            out.push_str(&quote(&a.predicate));
            for t in &a.args {
                out.push_str(", ");
                out.push_str(&print_term(t, true));
            }
            out.push(')');
        }
        Formula::Not(g) => {
            out.push_str("Not(");
            write_formula(g, out);
            out.push(')');
        }
        Formula::And(a, b) => binary("And", a, b, out),
        Formula::Or(a, b) => binary("Or", a, b, out),
        Formula::Implies(a, b) => binary("Implies", a, b, out),
        Formula::Equiv(a, b) => binary("Equiv", a, b, out),
        Formula::Xor(a, b) => binary("Xor", a, b, out),
        Formula::AndList(fs) => list("AndList", fs, out),
        Formula::OrList(fs) => list("OrList", fs, out),
        Formula::Exists(v, g) | Formula::Forall(v, g) => {
            out.push_str(if matches!(f, Formula::Exists(..)) {
                "Exists($"
            } else {
                "Forall($"
            });
            out.push_str(v);
            out.push_str(", ");
            write_formula(g, out);
            out.push(')');
        }
    }
}

fn push_statement(out: &mut String, s: &FolStatement) {
    write_formula(&s.formula, out);
    if let Some(g) = &s.gloss {
        out.push_str(" ::: ");
        out.push_str(g);
    }
    out.push('\n');
}

pub fn print_fol(p: &FolProblem) -> String {
    let mut out = String::from("Facts:\n");
    for f in &p.facts {
        push_statement(&mut out, f);
    }
    out.push_str("\nQuery:\n");
    push_statement(&mut out, &p.query);
    out
}
