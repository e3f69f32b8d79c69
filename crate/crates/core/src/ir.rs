//! Symbolic intermediate representation shared by the parsers and engines.
//!
//! All three formulation languages (logic programs, first-order formulas and
//! constraint models) bottom out in the same [`Term`] and [`Atom`] types. The
//! first-order formula tree ([`Formula`]) also feeds the clause normal form
//! used by the resolution prover.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// An argument position in an atom.
///
/// Variables are stored without their `$` marker; the marker is re-added by
/// [`fmt::Display`] and by the printers.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Term {
    Constant(String),
    Variable(String),
    Int(i64),
    Bool(bool),
    /// Only produced by Skolemization; never by a parser.
    Func(String, Vec<Term>),
}

impl Term {
    pub fn constant(name: impl Into<String>) -> Self {
        Term::Constant(name.into())
    }

    pub fn var(name: impl Into<String>) -> Self {
        Term::Variable(name.into())
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Variable(_) => false,
            Term::Func(_, args) => args.iter().all(Term::is_ground),
            _ => true,
        }
    }

    /// Nesting depth of function applications; plain symbols have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Term::Func(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
            _ => 0,
        }
    }

    pub fn collect_variables(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Variable(v) => {
                out.insert(v.clone());
            }
            Term::Func(_, args) => args.iter().for_each(|a| a.collect_variables(out)),
            _ => {}
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Constant(c) => write!(f, "{c}"),
            Term::Variable(v) => write!(f, "${v}"),
            Term::Int(i) => write!(f, "{i}"),
            Term::Bool(true) => f.write_str("True"),
            Term::Bool(false) => f.write_str("False"),
            Term::Func(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Atom {
            predicate: predicate.into(),
            args,
        }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.args.iter().for_each(|a| a.collect_variables(&mut out));
        out
    }

    pub fn depth(&self) -> usize {
        self.args.iter().map(Term::depth).max().unwrap_or(0)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.predicate)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

/// A first-order formula in the constructor vocabulary of the textual FOL
/// notation (`Atom`, `Not`, `And`, `AndList`, ... `Forall`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Formula {
    Atom(Atom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    AndList(Vec<Formula>),
    Or(Box<Formula>, Box<Formula>),
    OrList(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Equiv(Box<Formula>, Box<Formula>),
    Xor(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
}

impl Formula {
    pub fn atom(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Formula::Atom(Atom::new(predicate, args))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn equiv(a: Formula, b: Formula) -> Self {
        Formula::Equiv(Box::new(a), Box::new(b))
    }

    pub fn xor(a: Formula, b: Formula) -> Self {
        Formula::Xor(Box::new(a), Box::new(b))
    }

    pub fn exists(var: impl Into<String>, f: Formula) -> Self {
        Formula::Exists(var.into(), Box::new(f))
    }

    pub fn forall(var: impl Into<String>, f: Formula) -> Self {
        Formula::Forall(var.into(), Box::new(f))
    }

    /// Variables occurring outside the scope of any quantifier binding them.
    pub fn free_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(a) => {
                for v in a.variables() {
                    if !bound.contains(&v) {
                        out.insert(v);
                    }
                }
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Equiv(a, b)
            | Formula::Xor(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::AndList(fs) | Formula::OrList(fs) => fs.iter().for_each(|f| f.collect_free(bound, out)),
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                bound.push(v.clone());
                f.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_variables().is_empty()
    }

    /// Rewrites `Xor`, `Equiv`, `AndList` and `OrList` into the core
    /// connectives. Lists fold left-associatively.
    pub fn desugar(&self) -> Formula {
        match self {
            Formula::Atom(a) => Formula::Atom(a.clone()),
            Formula::Not(f) => Formula::not(f.desugar()),
            Formula::And(a, b) => Formula::and(a.desugar(), b.desugar()),
            Formula::Or(a, b) => Formula::or(a.desugar(), b.desugar()),
            Formula::Implies(a, b) => Formula::implies(a.desugar(), b.desugar()),
            Formula::Equiv(a, b) => {
                let (a, b) = (a.desugar(), b.desugar());
                Formula::and(Formula::implies(a.clone(), b.clone()), Formula::implies(b, a))
            }
            Formula::Xor(a, b) => {
                let (a, b) = (a.desugar(), b.desugar());
                Formula::and(Formula::or(a.clone(), b.clone()), Formula::not(Formula::and(a, b)))
            }
            Formula::AndList(fs) => fold_list(fs, Formula::and),
            Formula::OrList(fs) => fold_list(fs, Formula::or),
            Formula::Exists(v, f) => Formula::exists(v.clone(), f.desugar()),
            Formula::Forall(v, f) => Formula::forall(v.clone(), f.desugar()),
        }
    }

    /// Every atom in the formula, in left-to-right order.
    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.visit_atoms(&mut |a| out.push(a));
        out
    }

    pub fn visit_atoms<'a>(&'a self, visit: &mut impl FnMut(&'a Atom)) {
        match self {
            Formula::Atom(a) => visit(a),
            Formula::Not(f) | Formula::Exists(_, f) | Formula::Forall(_, f) => f.visit_atoms(visit),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Equiv(a, b)
            | Formula::Xor(a, b) => {
                a.visit_atoms(visit);
                b.visit_atoms(visit);
            }
            Formula::AndList(fs) | Formula::OrList(fs) => fs.iter().for_each(|f| f.visit_atoms(visit)),
        }
    }
}

fn fold_list(fs: &[Formula], join: fn(Formula, Formula) -> Formula) -> Formula {
    let mut it = fs.iter().map(Formula::desugar);
    // Lists are parsed with at least two members; a singleton degrades to
    // its only element.
    let first = it.next().expect("formula list must not be empty");
    it.fold(first, join)
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::fol::print_formula(self))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Literal {
    pub positive: bool,
    pub atom: Atom,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Literal { positive: true, atom }
    }

    pub fn neg(atom: Atom) -> Self {
        Literal { positive: false, atom }
    }

    pub fn negated(&self) -> Self {
        Literal {
            positive: !self.positive,
            atom: self.atom.clone(),
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.positive {
            f.write_str("~")?;
        }
        write!(f, "{}", self.atom)
    }
}

/// A disjunction of literals. Literals are kept sorted and deduplicated, so
/// structural equality is set equality.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Clause {
    literals: Vec<Literal>,
}

impl Clause {
    pub fn new(literals: impl IntoIterator<Item = Literal>) -> Self {
        let mut literals: Vec<Literal> = literals.into_iter().collect();
        literals.sort();
        literals.dedup();
        Clause { literals }
    }

    pub fn empty() -> Self {
        Clause::default()
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    /// True when the clause contains a literal and its complement.
    pub fn is_tautology(&self) -> bool {
        self.literals
            .iter()
            .any(|l| l.positive && self.literals.iter().any(|m| !m.positive && m.atom == l.atom))
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for l in &self.literals {
            l.atom.args.iter().for_each(|a| a.collect_variables(&mut out));
        }
        out
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.literals.is_empty() {
            return f.write_str("[]");
        }
        for (i, l) in self.literals.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Three-valued verdict of every engine.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TruthValue {
    Proved,
    Disproved,
    Unknown,
}

impl fmt::Display for TruthValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TruthValue::Proved => "Proved",
            TruthValue::Disproved => "Disproved",
            TruthValue::Unknown => "Unknown",
        })
    }
}

/// An engine verdict plus any resource warnings raised on the way to it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub value: TruthValue,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl Verdict {
    pub fn new(value: TruthValue) -> Self {
        Verdict {
            value,
            warnings: Vec::new(),
        }
    }

    pub fn unknown_with(warning: impl Into<String>) -> Self {
        Verdict {
            value: TruthValue::Unknown,
            warnings: vec![warning.into()],
        }
    }
}

/// Location of a token in formulation text. Line and column are 1-based and
/// counted in characters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl SourceSpan {
    pub fn new(line: usize, column: usize, length: usize) -> Self {
        debug_assert!(line >= 1 && column >= 1);
        SourceSpan { line, column, length }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}
