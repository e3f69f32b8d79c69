//! Logic-program formulations: predicate signatures, ground facts, Horn-style
//! rules with conjunctive heads, and a single query atom.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ir::{Atom, SourceSpan, Term};

use super::error::{ParseError, ParseErrorKind};
use super::lexer::{tokenize, Cursor, Tok};
use super::sections::{split_sections, Line};
use super::{finish, parse_term, print_term, ArityTable, ParseResult};

/// Declared signature, e.g. `Jompus($x, bool) ::: Does x belong to Jompus?`.
/// Sort markers such as `bool` are recorded as constants and not checked.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateDecl {
    pub name: String,
    pub params: Vec<Term>,
    pub gloss: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LpFact {
    pub atom: Atom,
    pub gloss: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LpRule {
    pub body: Vec<Atom>,
    pub head: Vec<Atom>,
    pub gloss: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LpProgram {
    pub predicates: Vec<PredicateDecl>,
    pub facts: Vec<LpFact>,
    pub rules: Vec<LpRule>,
    pub query: Atom,
    pub query_gloss: Option<String>,
}

impl LpProgram {
    /// The program with every gloss removed; equal for any two texts that
    /// differ only in their `:::` annotations.
    pub fn without_glosses(&self) -> LpProgram {
        LpProgram {
            predicates: self
                .predicates
                .iter()
                .map(|p| PredicateDecl {
                    gloss: None,
                    ..p.clone()
                })
                .collect(),
            facts: self
                .facts
                .iter()
                .map(|f| LpFact {
                    gloss: None,
                    ..f.clone()
                })
                .collect(),
            rules: self
                .rules
                .iter()
                .map(|r| LpRule {
                    gloss: None,
                    ..r.clone()
                })
                .collect(),
            query: self.query.clone(),
            query_gloss: None,
        }
    }
}

struct SpannedAtom {
    atom: Atom,
    span: SourceSpan,
    vars: Vec<(String, SourceSpan)>,
}

fn parse_atom(cur: &mut Cursor<'_>) -> Result<SpannedAtom, ParseError> {
    let span = cur.here();
    let predicate = match cur.peek_tok() {
        Some(Tok::Ident(name)) => name.clone(),
        _ => return Err(cur.error("a predicate name")),
    };
    cur.next();
    cur.expect(&Tok::LParen, "'(' after predicate name")?;
    let mut args = Vec::new();
    let mut vars = Vec::new();
    if !cur.eat(&Tok::RParen) {
        loop {
            let (term, tspan) = parse_term(cur)?;
            if let Term::Variable(v) = &term {
                vars.push((v.clone(), tspan));
            }
            args.push(term);
            if cur.eat(&Tok::Comma) {
                continue;
            }
            cur.expect(&Tok::RParen, "',' or ')'")?;
            break;
        }
    }
    Ok(SpannedAtom {
        atom: Atom::new(predicate, args),
        span,
        vars,
    })
}

fn parse_conjunction(cur: &mut Cursor<'_>) -> Result<Vec<SpannedAtom>, ParseError> {
    let mut atoms = vec![parse_atom(cur)?];
    while cur.eat(&Tok::AndAnd) {
        atoms.push(parse_atom(cur)?);
    }
    Ok(atoms)
}

/// Tokenizes a line's statement part and hands a cursor to `f`.
fn with_statement<T>(
    line: &Line,
    f: impl FnOnce(&mut Cursor<'_>) -> Result<T, ParseError>,
) -> Result<(T, Option<String>), ParseError> {
    let (stmt, gloss) = line.split_gloss();
    let tokens = tokenize(stmt, line.number, line.first_column)?;
    let end = line.first_column + stmt.len();
    let mut cur = Cursor::new(&tokens, line.number, end);
    let value = f(&mut cur)?;
    cur.expect_end()?;
    Ok((value, gloss))
}

struct SpannedRule {
    body: Vec<SpannedAtom>,
    head: Vec<SpannedAtom>,
    gloss: Option<String>,
}

pub fn parse_lp(text: &str) -> ParseResult<LpProgram> {
    let sections = split_sections(text, &["Predicates", "Facts", "Rules", "Query"]);
    let mut errors = sections.errors.clone();
    let mut warnings = sections.warnings.clone();

    let pred_sec = sections.require("Predicates", &mut errors);
    let fact_sec = sections.require("Facts", &mut errors);
    let rule_sec = sections.require("Rules", &mut errors);
    let query_sec = sections.require("Query", &mut errors);

    let mut predicates = Vec::new();
    let mut decl_spans = Vec::new();
    for line in pred_sec.map(|s| s.lines.as_slice()).unwrap_or_default() {
        match with_statement(line, parse_atom) {
            Ok((sa, gloss)) => {
                decl_spans.push(sa.span);
                predicates.push(PredicateDecl {
                    name: sa.atom.predicate,
                    params: sa.atom.args,
                    gloss,
                });
            }
            Err(e) => errors.push(e),
        }
    }

    let mut facts = Vec::new();
    for line in fact_sec.map(|s| s.lines.as_slice()).unwrap_or_default() {
        match with_statement(line, |cur| {
            let atom = parse_atom(cur)?;
            if cur.peek_tok() == Some(&Tok::Arrow) || cur.peek_tok() == Some(&Tok::AndAnd) {
                return Err(ParseError::new(
                    ParseErrorKind::Syntax,
                    cur.here(),
                    format!(
                        "expected a single fact, found '{}'; rules belong in the Rules section",
                        cur.peek_tok().unwrap()
                    ),
                ));
            }
            Ok(atom)
        }) {
            Ok((sa, gloss)) => facts.push((sa, gloss)),
            Err(e) => errors.push(e),
        }
    }

    let mut rules = Vec::new();
    for line in rule_sec.map(|s| s.lines.as_slice()).unwrap_or_default() {
        match with_statement(line, |cur| {
            let body = parse_conjunction(cur)?;
            cur.expect(&Tok::Arrow, "'>>>' or '&&'")?;
            let head = parse_conjunction(cur)?;
            Ok((body, head))
        }) {
            Ok(((body, head), gloss)) => rules.push(SpannedRule { body, head, gloss }),
            Err(e) => errors.push(e),
        }
    }

    let mut query = None;
    if let Some(sec) = query_sec {
        match sec.lines.split_first() {
            None => errors.push(ParseError::new(
                ParseErrorKind::EmptySection,
                SourceSpan::new(sec.header_line, 1, 0),
                "the 'Query:' section is empty; expected one query atom",
            )),
            Some((first, rest)) => {
                match with_statement(first, parse_atom) {
                    Ok(q) => query = Some(q),
                    Err(e) => errors.push(e),
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

    // Semantic checks.
    let mut arities = ArityTable::default();
    let mut declared: BTreeMap<&str, ()> = BTreeMap::new();
    for (p, span) in predicates.iter().zip(&decl_spans) {
        declared.insert(&p.name, ());
        errors.extend(arities.check(&p.name, p.params.len(), *span));
    }
    let check_known = |sa: &SpannedAtom, errors: &mut Vec<ParseError>| {
        if !declared.is_empty() && !declared.contains_key(sa.atom.predicate.as_str()) {
            errors.push(ParseError::new(
                ParseErrorKind::UnknownPredicate,
                sa.span,
                format!(
                    "predicate '{}' is not declared in the Predicates section",
                    sa.atom.predicate
                ),
            ));
        }
    };
    for (sa, _) in &facts {
        check_known(sa, &mut errors);
        errors.extend(arities.check(&sa.atom.predicate, sa.atom.arity(), sa.span));
        for (v, span) in &sa.vars {
            errors.push(ParseError::new(
                ParseErrorKind::UnboundVariable,
                *span,
                format!("fact '{}' contains variable '${v}'; facts must be ground", sa.atom),
            ));
        }
    }
    for rule in &rules {
        let mut body_vars = Vec::new();
        for sa in &rule.body {
            check_known(sa, &mut errors);
            errors.extend(arities.check(&sa.atom.predicate, sa.atom.arity(), sa.span));
            body_vars.extend(sa.vars.iter().map(|(v, _)| v.as_str()));
        }
        for sa in &rule.head {
            check_known(sa, &mut errors);
            errors.extend(arities.check(&sa.atom.predicate, sa.atom.arity(), sa.span));
            for (v, span) in &sa.vars {
                if !body_vars.contains(&v.as_str()) {
                    errors.push(ParseError::new(
                        ParseErrorKind::UnboundVariable,
                        *span,
                        format!("variable '${v}' in the rule head does not occur in the rule body"),
                    ));
                }
            }
        }
    }
    if let Some((sa, _)) = &query {
        check_known(sa, &mut errors);
        errors.extend(arities.check(&sa.atom.predicate, sa.atom.arity(), sa.span));
    }
    warnings.extend(arities.nullary_warnings());

    let program = query.map(|(q, query_gloss)| LpProgram {
        predicates,
        facts: facts
            .into_iter()
            .map(|(sa, gloss)| LpFact { atom: sa.atom, gloss })
            .collect(),
        rules: rules
            .into_iter()
            .map(|r| LpRule {
                body: r.body.into_iter().map(|a| a.atom).collect(),
                head: r.head.into_iter().map(|a| a.atom).collect(),
                gloss: r.gloss,
            })
            .collect(),
        query: q.atom,
        query_gloss,
    });
    finish(program, errors, warnings)
}

pub fn print_atom(atom: &Atom) -> String {
    let args: Vec<String> = atom.args.iter().map(|t| print_term(t, false)).collect();
    format!("{}({})", atom.predicate, args.join(", "))
}

pub fn print_rule(rule: &LpRule) -> String {
    let side = |atoms: &[Atom]| atoms.iter().map(print_atom).collect::<Vec<_>>().join(" && ");
    format!("{} >>> {}", side(&rule.body), side(&rule.head))
}

fn with_gloss(out: &mut String, stmt: &str, gloss: &Option<String>) {
    out.push_str(stmt);
    if let Some(g) = gloss {
        out.push_str(" ::: ");
        out.push_str(g);
    }
    out.push('\n');
}

pub fn print_lp(p: &LpProgram) -> String {
    let mut out = String::from("Predicates:\n");
    for d in &p.predicates {
        let args: Vec<String> = d.params.iter().map(|t| print_term(t, false)).collect();
        with_gloss(&mut out, &format!("{}({})", d.name, args.join(", ")), &d.gloss);
    }
    out.push_str("\nFacts:\n");
    for f in &p.facts {
        with_gloss(&mut out, &print_atom(&f.atom), &f.gloss);
    }
    out.push_str("\nRules:\n");
    for r in &p.rules {
        with_gloss(&mut out, &print_rule(r), &r.gloss);
    }
    out.push_str("\nQuery:\n");
    with_gloss(&mut out, &print_atom(&p.query), &p.query_gloss);
    out
}
