//! Constraint-satisfaction formulations.
//!
//! ```text
//! Domain:
//! 1: oldest
//! 3: newest
//! Variables:
//! station_wagon [IN] [1, 2, 3]
//! Constraints:
//! station_wagon == 1 ::: The station wagon is the oldest.
//! AllDifferentConstraint([station_wagon, convertible, minivan])
//! Query:
//! A) station_wagon == 2 ::: The station wagon is the second-newest.
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ir::SourceSpan;

use super::error::{ParseError, ParseErrorKind};
use super::lexer::{tokenize, Cursor, Tok};
use super::sections::{split_sections, Line};
use super::{finish, ParseResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
}

impl CmpOp {
    pub fn holds(self, a: i64, b: i64) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Gt => a > b,
            CmpOp::Le => a <= b,
            CmpOp::Ge => a >= b,
        }
    }

    fn from_tok(t: &Tok) -> Option<CmpOp> {
        Some(match t {
            Tok::Eq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            Tok::Lt => CmpOp::Lt,
            Tok::Gt => CmpOp::Gt,
            Tok::Le => CmpOp::Le,
            Tok::Ge => CmpOp::Ge,
            _ => return None,
        })
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
            CmpOp::Le => "<=",
            CmpOp::Ge => ">=",
        })
    }
}

/// One side of a comparison.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Operand {
    Var(String),
    Int(i64),
    /// `var + offset` (printed as `var - n` for negative offsets).
    Sum(String, i64),
}

impl Operand {
    pub fn var(&self) -> Option<&str> {
        match self {
            Operand::Var(v) | Operand::Sum(v, _) => Some(v),
            Operand::Int(_) => None,
        }
    }

    /// Value under `lookup`; `None` when the variable is unassigned.
    pub fn eval(&self, lookup: impl Fn(&str) -> Option<i64>) -> Option<i64> {
        match self {
            Operand::Var(v) => lookup(v),
            Operand::Int(i) => Some(*i),
            Operand::Sum(v, k) => lookup(v).and_then(|x| x.checked_add(*k)),
        }
    }
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Var(v) => f.write_str(v),
            Operand::Int(i) => write!(f, "{i}"),
            Operand::Sum(v, k) if *k < 0 => write!(f, "{v} - {}", k.unsigned_abs()),
            Operand::Sum(v, k) => write!(f, "{v} + {k}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConstraintExpr {
    Cmp { lhs: Operand, op: CmpOp, rhs: Operand },
    AllDifferent(Vec<String>),
}

impl ConstraintExpr {
    pub fn cmp(lhs: Operand, op: CmpOp, rhs: Operand) -> Self {
        ConstraintExpr::Cmp { lhs, op, rhs }
    }

    /// Variables mentioned, in order of appearance, without duplicates.
    pub fn variables(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        let all: Vec<&str> = match self {
            ConstraintExpr::Cmp { lhs, rhs, .. } => [lhs.var(), rhs.var()].into_iter().flatten().collect(),
            ConstraintExpr::AllDifferent(vs) => vs.iter().map(String::as_str).collect(),
        };
        for v in all {
            if !out.contains(&v) {
                out.push(v);
            }
        }
        out
    }

    /// Truth under a total lookup; `None` if any mentioned variable is
    /// unassigned. Integer overflow in `x + k` makes the comparison false.
    pub fn eval(&self, lookup: impl Fn(&str) -> Option<i64>) -> Option<bool> {
        match self {
            ConstraintExpr::Cmp { lhs, op, rhs } => {
                for v in [lhs.var(), rhs.var()].into_iter().flatten() {
                    lookup(v)?;
                }
                match (lhs.eval(&lookup), rhs.eval(&lookup)) {
                    (Some(a), Some(b)) => Some(op.holds(a, b)),
                    _ => Some(false),
                }
            }
            ConstraintExpr::AllDifferent(vs) => {
                let mut seen = BTreeSet::new();
                for v in vs {
                    if !seen.insert(lookup(v)?) {
                        return Some(false);
                    }
                }
                Some(true)
            }
        }
    }
}

impl fmt::Display for ConstraintExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintExpr::Cmp { lhs, op, rhs } => write!(f, "{lhs} {op} {rhs}"),
            ConstraintExpr::AllDifferent(vs) => write!(f, "AllDifferentConstraint([{}])", vs.join(", ")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CspVariable {
    pub name: String,
    pub domain: BTreeSet<i64>,
    pub gloss: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CspConstraint {
    pub expr: ConstraintExpr,
    pub gloss: Option<String>,
}

/// A finite-domain model: variables with domains, constraints, the value
/// legend from the `Domain:` block, and one lettered constraint per answer
/// option.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CspModel {
    pub legend: BTreeMap<i64, String>,
    pub variables: Vec<CspVariable>,
    pub constraints: Vec<CspConstraint>,
    pub options: BTreeMap<char, CspConstraint>,
}

impl CspModel {
    pub fn variable(&self, name: &str) -> Option<&CspVariable> {
        self.variables.iter().find(|v| v.name == name)
    }

    pub fn without_glosses(&self) -> CspModel {
        let strip = |c: &CspConstraint| CspConstraint {
            expr: c.expr.clone(),
            gloss: None,
        };
        CspModel {
            legend: self.legend.clone(),
            variables: self
                .variables
                .iter()
                .map(|v| CspVariable {
                    gloss: None,
                    ..v.clone()
                })
                .collect(),
            constraints: self.constraints.iter().map(strip).collect(),
            options: self.options.iter().map(|(k, c)| (*k, strip(c))).collect(),
        }
    }
}

fn statement_cursor<T>(
    line: &Line,
    skip: usize,
    f: impl FnOnce(&mut Cursor<'_>) -> Result<T, ParseError>,
) -> Result<(T, Option<String>), ParseError> {
    let (stmt, gloss) = line.split_gloss();
    let tokens = tokenize(stmt, line.number, line.first_column)?;
    let mut cur = Cursor::new(&tokens, line.number, line.first_column + stmt.len());
    for _ in 0..skip {
        cur.next();
    }
    let v = f(&mut cur)?;
    cur.expect_end()?;
    Ok((v, gloss))
}

fn signed_int(cur: &mut Cursor<'_>) -> Option<i64> {
    let neg = cur.peek_tok() == Some(&Tok::Minus) && matches!(cur.peek_nth(1), Some(Tok::Int(_)));
    if neg {
        cur.next();
    }
    match cur.peek_tok() {
        Some(Tok::Int(i)) => {
            let i = *i;
            cur.next();
            Some(if neg { -i } else { i })
        }
        _ => None,
    }
}

struct Refs(Vec<(String, SourceSpan)>);

fn operand(cur: &mut Cursor<'_>, refs: &mut Refs) -> Result<Operand, ParseError> {
    if let Some(i) = signed_int(cur) {
        return Ok(Operand::Int(i));
    }
    let span = cur.here();
    let name = match cur.peek_tok() {
        Some(Tok::Ident(v)) => v.clone(),
        _ => return Err(cur.error("a variable name or integer")),
    };
    cur.next();
    refs.0.push((name.clone(), span));
    let sign = match cur.peek_tok() {
        Some(Tok::Plus) => 1,
        Some(Tok::Minus) => -1,
        _ => return Ok(Operand::Var(name)),
    };
    cur.next();
    match cur.peek_tok() {
        Some(Tok::Int(k)) => {
            let k = *k;
            cur.next();
            Ok(Operand::Sum(name, sign * k))
        }
        _ => Err(cur.error("an integer offset")),
    }
}

fn constraint(cur: &mut Cursor<'_>, refs: &mut Refs) -> Result<ConstraintExpr, ParseError> {
    if let (Some(Tok::Ident(name)), Some(Tok::LParen)) = (cur.peek_tok(), cur.peek_nth(1)) {
        if name == "AllDifferentConstraint" || name == "AllDifferent" {
            let head = cur.here();
            cur.next();
            cur.next();
            let bracketed = cur.eat(&Tok::LBracket);
            let mut vars = Vec::new();
            loop {
                let span = cur.here();
                match cur.peek_tok() {
                    Some(Tok::Ident(v)) => {
                        vars.push(v.clone());
                        refs.0.push((v.clone(), span));
                        cur.next();
                    }
                    _ => return Err(cur.error("a variable name")),
                }
                if !cur.eat(&Tok::Comma) {
                    break;
                }
            }
            if bracketed {
                cur.expect(&Tok::RBracket, "',' or ']'")?;
            }
            cur.expect(&Tok::RParen, "')'")?;
            if vars.len() < 2 {
                return Err(ParseError::new(
                    ParseErrorKind::Syntax,
                    head,
                    "'AllDifferentConstraint' needs at least two variables",
                ));
            }
            return Ok(ConstraintExpr::AllDifferent(vars));
        }
    }
    let lhs = operand(cur, refs)?;
    let op = match cur.peek_tok().and_then(CmpOp::from_tok) {
        Some(op) => op,
        None => return Err(cur.error("a comparison operator (==, !=, <, >, <=, >=)")),
    };
    cur.next();
    let rhs = operand(cur, refs)?;
    Ok(ConstraintExpr::Cmp { lhs, op, rhs })
}

pub fn parse_csp(text: &str) -> ParseResult<CspModel> {
    let sections = split_sections(text, &["Domain", "Variables", "Constraints", "Query"]);
    let mut errors = sections.errors.clone();
    let mut warnings = sections.warnings.clone();
    let dom_sec = sections.require("Domain", &mut errors);
    let var_sec = sections.require("Variables", &mut errors);
    let con_sec = sections.require("Constraints", &mut errors);
    let query_sec = sections.require("Query", &mut errors);

    let mut model = CspModel::default();

    for line in dom_sec.map(|s| s.lines.as_slice()).unwrap_or_default() {
        let chars = &line.chars;
        let colon = chars.iter().position(|&c| c == ':');
        let parsed = colon.and_then(|i| {
            let value: String = chars[..i].iter().collect();
            let meaning: String = chars[i + 1..].iter().collect();
            value
                .trim()
                .parse::<i64>()
                .ok()
                .map(|v| (v, meaning.trim().to_string()))
        });
        match parsed {
            Some((v, meaning)) => {
                model.legend.insert(v, meaning);
            }
            None => errors.push(ParseError::new(
                ParseErrorKind::Syntax,
                line.span(),
                format!(
                    "expected a domain legend line 'value: meaning', found '{}'",
                    line.text()
                ),
            )),
        }
    }

    let mut var_spans = BTreeMap::new();
    for line in var_sec.map(|s| s.lines.as_slice()).unwrap_or_default() {
        let res = statement_cursor(line, 0, |cur| {
            let span = cur.here();
            let name = match cur.peek_tok() {
                Some(Tok::Ident(n)) => n.clone(),
                _ => return Err(cur.error("a variable name")),
            };
            cur.next();
            cur.expect(&Tok::LBracket, "'[IN]'")?;
            match cur.peek_tok() {
                Some(Tok::Ident(k)) if k == "IN" => {
                    cur.next();
                }
                _ => return Err(cur.error("'IN'")),
            }
            cur.expect(&Tok::RBracket, "']' closing '[IN'")?;
            cur.expect(&Tok::LBracket, "'[' opening the domain list")?;
            let mut domain = BTreeSet::new();
            if !cur.eat(&Tok::RBracket) {
                loop {
                    match signed_int(cur) {
                        Some(v) => {
                            domain.insert(v);
                        }
                        None => return Err(cur.error("an integer domain value")),
                    }
                    if cur.eat(&Tok::Comma) {
                        continue;
                    }
                    cur.expect(&Tok::RBracket, "',' or ']'")?;
                    break;
                }
            }
            if domain.is_empty() {
                return Err(ParseError::new(
                    ParseErrorKind::Syntax,
                    span,
                    format!("variable '{name}' has an empty domain"),
                ));
            }
            Ok((name, span, domain))
        });
        match res {
            Ok(((name, span, domain), gloss)) => {
                if var_spans.contains_key(&name) {
                    errors.push(ParseError::new(
                        ParseErrorKind::Syntax,
                        span,
                        format!("variable '{name}' is declared twice"),
                    ));
                    continue;
                }
                var_spans.insert(name.clone(), span);
                model.variables.push(CspVariable { name, domain, gloss });
            }
            Err(e) => errors.push(e),
        }
    }
    if let Some(sec) = var_sec {
        if sec.lines.is_empty() {
            errors.push(ParseError::new(
                ParseErrorKind::EmptySection,
                SourceSpan::new(sec.header_line, 1, 0),
                "the 'Variables:' section is empty; declare each variable as 'name [IN] [v1, v2, ...]'",
            ));
        }
    }

    let mut refs = Refs(Vec::new());
    for line in con_sec.map(|s| s.lines.as_slice()).unwrap_or_default() {
        match statement_cursor(line, 0, |cur| constraint(cur, &mut refs)) {
            Ok((expr, gloss)) => model.constraints.push(CspConstraint { expr, gloss }),
            Err(e) => errors.push(e),
        }
    }

    if let Some(sec) = query_sec {
        let mut trailing = Vec::new();
        for line in &sec.lines {
            let letter = match (line.chars.first(), line.chars.get(1)) {
                (Some(&c), Some(&')')) if c.is_ascii_uppercase() => c,
                _ => {
                    trailing.push(line.text());
                    continue;
                }
            };
            match statement_cursor(line, 2, |cur| constraint(cur, &mut refs)) {
                Ok((expr, gloss)) => match model.options.entry(letter) {
                    std::collections::btree_map::Entry::Occupied(_) => errors.push(ParseError::new(
                        ParseErrorKind::Syntax,
                        SourceSpan::new(line.number, line.first_column, 2),
                        format!("option '{letter})' appears twice"),
                    )),
                    std::collections::btree_map::Entry::Vacant(slot) => {
                        slot.insert(CspConstraint { expr, gloss });
                    }
                },
                Err(e) => errors.push(e),
            }
        }
        if !trailing.is_empty() {
            warnings.push(format!(
                "ignored {} line(s) in the Query section that are not lettered options (starting with '{}')",
                trailing.len(),
                trailing[0]
            ));
        }
        if model.options.is_empty() {
            errors.push(ParseError::new(
                ParseErrorKind::EmptySection,
                SourceSpan::new(sec.header_line, 1, 0),
                "the 'Query:' section has no lettered options such as 'A) x == 1'",
            ));
        }
    }

    for (name, span) in refs.0 {
        if !var_spans.contains_key(&name) {
            errors.push(ParseError::new(
                ParseErrorKind::UndeclaredVariable,
                span,
                format!("variable '{name}' is used but not declared in the Variables section"),
            ));
        }
    }

    finish(Some(model), errors, warnings)
}

fn push_gloss(out: &mut String, gloss: &Option<String>) {
    if let Some(g) = gloss {
        out.push_str(" ::: ");
        out.push_str(g);
    }
    out.push('\n');
}

pub fn print_csp(m: &CspModel) -> String {
    let mut out = String::from("Domain:\n");
    for (v, meaning) in &m.legend {
        out.push_str(&format!("{v}: {meaning}\n"));
    }
    out.push_str("\nVariables:\n");
    for v in &m.variables {
        let dom: Vec<String> = v.domain.iter().map(i64::to_string).collect();
        out.push_str(&format!("{} [IN] [{}]", v.name, dom.join(", ")));
        push_gloss(&mut out, &v.gloss);
    }
    out.push_str("\nConstraints:\n");
    for c in &m.constraints {
        out.push_str(&c.expr.to_string());
        push_gloss(&mut out, &c.gloss);
    }
    out.push_str("\nQuery:\n");
    for (letter, c) in &m.options {
        out.push_str(&format!("{letter}) {}", c.expr));
        push_gloss(&mut out, &c.gloss);
    }
    out
}
