//! Normal forms: NNF, standardizing apart, Skolemization and clause form.

use std::collections::{BTreeSet, HashMap};

use crate::ir::{Atom, Clause, Formula, Literal, Term};

use super::FolError;

/// Pushes negations down to the atoms. Implications, equivalences and
/// exclusive-or are eliminated first; list connectives stay lists.
pub fn to_nnf(f: &Formula) -> Formula {
    nnf(&f.desugar(), true)
}

fn nnf(f: &Formula, positive: bool) -> Formula {
    use Formula::*;
    match (f, positive) {
        (Atom(_), true) => f.clone(),
        (Atom(_), false) => Formula::not(f.clone()),
        (Not(inner), _) => nnf(inner, !positive),
        (And(a, b), true) => Formula::and(nnf(a, true), nnf(b, true)),
        (And(a, b), false) => Formula::or(nnf(a, false), nnf(b, false)),
        (Or(a, b), true) => Formula::or(nnf(a, true), nnf(b, true)),
        (Or(a, b), false) => Formula::and(nnf(a, false), nnf(b, false)),
        (AndList(xs), true) => AndList(xs.iter().map(|x| nnf(x, true)).collect()),
        (AndList(xs), false) => OrList(xs.iter().map(|x| nnf(x, false)).collect()),
        (OrList(xs), true) => OrList(xs.iter().map(|x| nnf(x, true)).collect()),
        (OrList(xs), false) => AndList(xs.iter().map(|x| nnf(x, false)).collect()),
        (Implies(a, b), true) => Formula::or(nnf(a, false), nnf(b, true)),
        (Implies(a, b), false) => Formula::and(nnf(a, true), nnf(b, false)),
        (Forall(v, body), true) => Formula::forall(v.clone(), nnf(body, true)),
        (Forall(v, body), false) => Formula::exists(v.clone(), nnf(body, false)),
        (Exists(v, body), true) => Formula::exists(v.clone(), nnf(body, true)),
        (Exists(v, body), false) => Formula::forall(v.clone(), nnf(body, false)),
        // desugar() has already removed these.
        (Equiv(..), _) | (Xor(..), _) => nnf(&f.desugar(), positive),
    }
}

fn substitute_term(t: &Term, env: &HashMap<String, Term>) -> Term {
    match t {
        Term::Variable(v) => env.get(v).cloned().unwrap_or_else(|| t.clone()),
        Term::Func(name, args) => Term::Func(name.clone(), args.iter().map(|a| substitute_term(a, env)).collect()),
        _ => t.clone(),
    }
}

fn substitute_atom(a: &Atom, env: &HashMap<String, Term>) -> Atom {
    Atom::new(
        a.predicate.clone(),
        a.args.iter().map(|t| substitute_term(t, env)).collect(),
    )
}

/// Renames every bound variable to `v<N>`, drawing N from a counter shared
/// across calls so that separately clausified formulas never share names.
pub fn standardize_apart(f: &Formula, counter: &mut usize) -> Formula {
    fn go(f: &Formula, env: &mut HashMap<String, Term>, counter: &mut usize) -> Formula {
        use Formula::*;
        let bind = |v: &String, body: &Formula, env: &mut HashMap<String, Term>, counter: &mut usize| {
            *counter += 1;
            let fresh = format!("v{counter}");
            let saved = env.insert(v.clone(), Term::Variable(fresh.clone()));
            let body = go(body, env, counter);
            match saved {
                Some(old) => env.insert(v.clone(), old),
                None => env.remove(v),
            };
            (fresh, body)
        };
        match f {
            Atom(a) => Atom(substitute_atom(a, env)),
            Not(x) => Formula::not(go(x, env, counter)),
            And(a, b) => Formula::and(go(a, env, counter), go(b, env, counter)),
            Or(a, b) => Formula::or(go(a, env, counter), go(b, env, counter)),
            Implies(a, b) => Formula::implies(go(a, env, counter), go(b, env, counter)),
            Equiv(a, b) => Formula::equiv(go(a, env, counter), go(b, env, counter)),
            Xor(a, b) => Formula::xor(go(a, env, counter), go(b, env, counter)),
            AndList(xs) => AndList(xs.iter().map(|x| go(x, env, counter)).collect()),
            OrList(xs) => OrList(xs.iter().map(|x| go(x, env, counter)).collect()),
            Forall(v, body) => {
                let (fresh, body) = bind(v, body, env, counter);
                Formula::forall(fresh, body)
            }
            Exists(v, body) => {
                let (fresh, body) = bind(v, body, env, counter);
                Formula::exists(fresh, body)
            }
        }
    }
    go(f, &mut HashMap::new(), counter)
}

/// Source of fresh Skolem symbols. Names are `skc<N>` for constants and
/// `skf<N>` for functions, sharing one counter; any name already used by the
/// problem is skipped.
#[derive(Clone, Debug, Default)]
pub struct SkolemState {
    counter: usize,
    reserved: BTreeSet<String>,
}

impl SkolemState {
    pub fn new(reserved: BTreeSet<String>) -> Self {
        SkolemState { counter: 0, reserved }
    }

    /// Reserves every constant and function name occurring in `formulas`.
    pub fn for_formulas<'a>(formulas: impl IntoIterator<Item = &'a Formula>) -> Self {
        fn symbols(t: &Term, out: &mut BTreeSet<String>) {
            match t {
                Term::Constant(c) => {
                    out.insert(c.clone());
                }
                Term::Func(name, args) => {
                    out.insert(name.clone());
                    args.iter().for_each(|a| symbols(a, out));
                }
                _ => {}
            }
        }
        let mut reserved = BTreeSet::new();
        for f in formulas {
            f.visit_atoms(&mut |a| a.args.iter().for_each(|t| symbols(t, &mut reserved)));
        }
        SkolemState::new(reserved)
    }

    pub fn counter(&self) -> usize {
        self.counter
    }

    fn fresh(&mut self, prefix: &str) -> String {
        loop {
            self.counter += 1;
            let name = format!("{prefix}{}", self.counter);
            if !self.reserved.contains(&name) {
                return name;
            }
        }
    }

    pub fn fresh_constant(&mut self) -> String {
        self.fresh("skc")
    }

    pub fn fresh_function(&mut self) -> String {
        self.fresh("skf")
    }
}

/// Replaces existentials by Skolem terms over the enclosing universals and
/// drops the universal quantifiers. The input must be in NNF with distinct
/// bound variable names.
pub fn skolemize(f: &Formula, state: &mut SkolemState) -> Formula {
    fn go(
        f: &Formula,
        universals: &mut Vec<String>,
        env: &mut HashMap<String, Term>,
        state: &mut SkolemState,
    ) -> Formula {
        use Formula::*;
        match f {
            Atom(a) => Atom(substitute_atom(a, env)),
            Not(x) => Formula::not(go(x, universals, env, state)),
            And(a, b) => Formula::and(go(a, universals, env, state), go(b, universals, env, state)),
            Or(a, b) => Formula::or(go(a, universals, env, state), go(b, universals, env, state)),
            AndList(xs) => AndList(xs.iter().map(|x| go(x, universals, env, state)).collect()),
            OrList(xs) => OrList(xs.iter().map(|x| go(x, universals, env, state)).collect()),
            Forall(v, body) => {
                universals.push(v.clone());
                let out = go(body, universals, env, state);
                universals.pop();
                out
            }
            Exists(v, body) => {
                let witness = if universals.is_empty() {
                    Term::Constant(state.fresh_constant())
                } else {
                    Term::Func(
                        state.fresh_function(),
                        universals.iter().map(|u| Term::Variable(u.clone())).collect(),
                    )
                };
                env.insert(v.clone(), witness);
                go(body, universals, env, state)
            }
            Implies(..) | Equiv(..) | Xor(..) => go(&to_nnf(f), universals, env, state),
        }
    }
    go(f, &mut Vec::new(), &mut HashMap::new(), state)
}

/// Clause-form conversion with shared naming state, so that several formulas
/// can be clausified into one consistent clause set.
#[derive(Clone, Debug)]
pub struct Clausifier {
    pub skolem: SkolemState,
    variables: usize,
    max_clauses: usize,
}

impl Clausifier {
    pub fn new(skolem: SkolemState, max_clauses: usize) -> Self {
        Clausifier {
            skolem,
            variables: 0,
            max_clauses,
        }
    }

    pub fn clausify(&mut self, f: &Formula) -> Result<Vec<Clause>, FolError> {
        let free = f.free_variables();
        if !free.is_empty() {
            return Err(FolError::OpenFormula(free.into_iter().collect()));
        }
        let nnf = to_nnf(f);
        let apart = standardize_apart(&nnf, &mut self.variables);
        let matrix = skolemize(&apart, &mut self.skolem);
        let cnf = distribute(&matrix, self.max_clauses)?;
        let mut out: Vec<Clause> = Vec::new();
        for lits in cnf {
            let c = Clause::new(lits);
            if !c.is_tautology() && !out.contains(&c) {
                out.push(c);
            }
        }
        Ok(out)
    }
}

/// Full pipeline for a single closed formula: desugar, NNF, standardize
/// apart, Skolemize and distribute. Tautological clauses are dropped.
pub fn clausify(f: &Formula, max_clauses: usize) -> Result<Vec<Clause>, FolError> {
    Clausifier::new(SkolemState::for_formulas([f]), max_clauses).clausify(f)
}

fn distribute(f: &Formula, limit: usize) -> Result<Vec<Vec<Literal>>, FolError> {
    use Formula::*;
    let explode = || FolError::ClauseExplosion { limit };
    let conj = |parts: Vec<Vec<Vec<Literal>>>| -> Result<Vec<Vec<Literal>>, FolError> {
        let out: Vec<Vec<Literal>> = parts.into_iter().flatten().collect();
        if out.len() > limit {
            return Err(explode());
        }
        Ok(out)
    };
    let disj = |parts: Vec<Vec<Vec<Literal>>>| -> Result<Vec<Vec<Literal>>, FolError> {
        let mut acc: Vec<Vec<Literal>> = vec![Vec::new()];
        for part in parts {
            if acc.len().saturating_mul(part.len()) > limit {
                return Err(explode());
            }
            let mut next = Vec::with_capacity(acc.len() * part.len());
            for a in &acc {
                for b in &part {
                    let mut c = a.clone();
                    c.extend(b.iter().cloned());
                    next.push(c);
                }
            }
            acc = next;
        }
        Ok(acc)
    };
    match f {
        Atom(a) => Ok(vec![vec![Literal::pos(a.clone())]]),
        Not(inner) => match inner.as_ref() {
            Atom(a) => Ok(vec![vec![Literal::neg(a.clone())]]),
            other => distribute(&nnf(other, false), limit),
        },
        And(a, b) => conj(vec![distribute(a, limit)?, distribute(b, limit)?]),
        AndList(xs) => conj(xs.iter().map(|x| distribute(x, limit)).collect::<Result<_, _>>()?),
        Or(a, b) => disj(vec![distribute(a, limit)?, distribute(b, limit)?]),
        OrList(xs) => disj(xs.iter().map(|x| distribute(x, limit)).collect::<Result<_, _>>()?),
        Forall(_, body) => distribute(body, limit),
        Exists(..) | Implies(..) | Equiv(..) | Xor(..) => distribute(&to_nnf(f), limit),
    }
}
