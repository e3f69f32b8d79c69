//! Given-clause resolution.
//!
//! Clauses are interned into a compact form: symbols become integers and
//! every clause numbers its variables from zero, so two parents are renamed
//! apart by offsetting the second one's variables.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};

use crate::ir::{Atom, Clause, Literal, Term};

use super::log::{Derivation, Step, StepRule};
use super::ProverLimits;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum T {
    V(u32),
    C(u32),
    F(u32, Vec<T>),
}

impl T {
    fn depth(&self) -> usize {
        match self {
            T::F(_, args) => 1 + args.iter().map(T::depth).max().unwrap_or(0),
            _ => 0,
        }
    }

    fn max_var(&self) -> Option<u32> {
        match self {
            T::V(v) => Some(*v),
            T::C(_) => None,
            T::F(_, args) => args.iter().filter_map(T::max_var).max(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Lit {
    pred: u32,
    pos: bool,
    args: Vec<T>,
}

#[derive(Default)]
struct Symbols {
    constants: Vec<Term>,
    constant_ids: HashMap<Term, u32>,
    functions: Vec<String>,
    function_ids: HashMap<String, u32>,
    predicates: Vec<(String, usize)>,
    predicate_ids: HashMap<(String, usize), u32>,
}

fn intern<K: Clone + Eq + std::hash::Hash>(table: &mut Vec<K>, ids: &mut HashMap<K, u32>, key: K) -> u32 {
    *ids.entry(key.clone()).or_insert_with(|| {
        table.push(key);
        table.len() as u32 - 1
    })
}

impl Symbols {
    fn term(&mut self, t: &Term, vars: &mut Vec<String>) -> T {
        match t {
            Term::Variable(v) => {
                let id = match vars.iter().position(|x| x == v) {
                    Some(i) => i,
                    None => {
                        vars.push(v.clone());
                        vars.len() - 1
                    }
                };
                T::V(id as u32)
            }
            Term::Func(name, args) => {
                let f = intern(&mut self.functions, &mut self.function_ids, name.clone());
                T::F(f, args.iter().map(|a| self.term(a, vars)).collect())
            }
            ground => T::C(intern(&mut self.constants, &mut self.constant_ids, ground.clone())),
        }
    }

    fn clause(&mut self, c: &Clause) -> Vec<Lit> {
        let mut vars = Vec::new();
        c.literals()
            .iter()
            .map(|l| {
                let key = (l.atom.predicate.clone(), l.atom.args.len());
                Lit {
                    pred: intern(&mut self.predicates, &mut self.predicate_ids, key),
                    pos: l.positive,
                    args: l.atom.args.iter().map(|t| self.term(t, &mut vars)).collect(),
                }
            })
            .collect()
    }

    fn extern_term(&self, t: &T, var_name: &dyn Fn(u32) -> String) -> Term {
        match t {
            T::V(v) => Term::Variable(var_name(*v)),
            T::C(c) => self.constants[*c as usize].clone(),
            T::F(f, args) => Term::Func(
                self.functions[*f as usize].clone(),
                args.iter().map(|a| self.extern_term(a, var_name)).collect(),
            ),
        }
    }

    fn extern_lits(&self, lits: &[Lit], var_name: &dyn Fn(u32) -> String) -> Vec<Literal> {
        lits.iter()
            .map(|l| Literal {
                positive: l.pos,
                atom: Atom::new(
                    self.predicates[l.pred as usize].0.clone(),
                    l.args.iter().map(|t| self.extern_term(t, var_name)).collect(),
                ),
            })
            .collect()
    }
}

/// Triangular substitution over a fixed number of variables.
struct Subst(Vec<Option<T>>);

impl Subst {
    fn new(n: usize) -> Self {
        Subst(vec![None; n])
    }

    fn walk<'a>(&'a self, mut t: &'a T) -> &'a T {
        while let T::V(v) = t {
            match &self.0[*v as usize] {
                Some(next) => t = next,
                None => break,
            }
        }
        t
    }

    fn occurs(&self, v: u32, t: &T) -> bool {
        match self.walk(t) {
            T::V(w) => *w == v,
            T::C(_) => false,
            T::F(_, args) => args.iter().any(|a| self.occurs(v, a)),
        }
    }

    fn unify(&mut self, a: &T, b: &T) -> bool {
        let (a, b) = (self.walk(a).clone(), self.walk(b).clone());
        match (&a, &b) {
            (T::V(x), T::V(y)) if x == y => true,
            (T::V(x), _) => {
                if self.occurs(*x, &b) {
                    return false;
                }
                self.0[*x as usize] = Some(b);
                true
            }
            (_, T::V(_)) => self.unify(&b, &a),
            (T::C(x), T::C(y)) => x == y,
            (T::F(f, xs), T::F(g, ys)) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| self.unify(x, y))
            }
            _ => false,
        }
    }

    fn unify_args(&mut self, xs: &[T], ys: &[T]) -> bool {
        xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| self.unify(x, y))
    }

    fn apply(&self, t: &T) -> T {
        match self.walk(t) {
            T::F(f, args) => T::F(*f, args.iter().map(|a| self.apply(a)).collect()),
            other => other.clone(),
        }
    }

    fn apply_lit(&self, l: &Lit) -> Lit {
        Lit {
            pred: l.pred,
            pos: l.pos,
            args: l.args.iter().map(|t| self.apply(t)).collect(),
        }
    }

    fn bindings(&self) -> Vec<(u32, T)> {
        (0..self.0.len() as u32)
            .filter(|&v| self.0[v as usize].is_some())
            .map(|v| (v, self.apply(&T::V(v))))
            .collect()
    }
}

fn shift(t: &T, by: u32) -> T {
    match t {
        T::V(v) => T::V(v + by),
        T::C(c) => T::C(*c),
        T::F(f, args) => T::F(*f, args.iter().map(|a| shift(a, by)).collect()),
    }
}

fn shift_lit(l: &Lit, by: u32) -> Lit {
    Lit {
        pred: l.pred,
        pos: l.pos,
        args: l.args.iter().map(|t| shift(t, by)).collect(),
    }
}

fn rename(t: &T, map: &mut Vec<(u32, u32)>) -> T {
    match t {
        T::V(v) => match map.iter().find(|(from, _)| from == v) {
            Some((_, to)) => T::V(*to),
            None => {
                let to = map.len() as u32;
                map.push((*v, to));
                T::V(to)
            }
        },
        T::C(c) => T::C(*c),
        T::F(f, args) => T::F(*f, args.iter().map(|a| rename(a, map)).collect()),
    }
}

/// Deduplicates, sorts and renumbers variables by first occurrence.
fn normalize(mut lits: Vec<Lit>) -> Vec<Lit> {
    let mut seen = HashSet::new();
    lits.retain(|l| seen.insert(l.clone()));
    let renumber = |lits: &[Lit]| -> Vec<Lit> {
        let mut map = Vec::new();
        lits.iter()
            .map(|l| Lit {
                pred: l.pred,
                pos: l.pos,
                args: l.args.iter().map(|t| rename(t, &mut map)).collect(),
            })
            .collect()
    };
    let mut lits = renumber(&lits);
    lits.sort();
    renumber(&lits)
}

fn num_vars(lits: &[Lit]) -> u32 {
    lits.iter()
        .flat_map(|l| l.args.iter())
        .filter_map(T::max_var)
        .max()
        .map_or(0, |m| m + 1)
}

fn is_tautology(lits: &[Lit]) -> bool {
    lits.iter()
        .any(|l| l.pos && lits.iter().any(|m| !m.pos && m.pred == l.pred && m.args == l.args))
}

/// One-way matching: binds variables of `pattern` only.
fn match_term(pattern: &T, target: &T, theta: &mut Vec<Option<T>>) -> bool {
    match pattern {
        T::V(v) => match &theta[*v as usize] {
            Some(bound) => bound == target,
            None => {
                theta[*v as usize] = Some(target.clone());
                true
            }
        },
        T::C(c) => matches!(target, T::C(d) if c == d),
        T::F(f, xs) => match target {
            T::F(g, ys) if f == g && xs.len() == ys.len() => xs.iter().zip(ys).all(|(x, y)| match_term(x, y, theta)),
            _ => false,
        },
    }
}

/// True when some instance of `c` is a subset of `d`.
fn subsumes(c: &[Lit], d: &[Lit]) -> bool {
    fn go(c: &[Lit], d: &[Lit], theta: &mut Vec<Option<T>>) -> bool {
        let Some((first, rest)) = c.split_first() else {
            return true;
        };
        for target in d {
            if target.pred != first.pred || target.pos != first.pos {
                continue;
            }
            let saved = theta.clone();
            if first
                .args
                .iter()
                .zip(&target.args)
                .all(|(p, t)| match_term(p, t, theta))
                && go(rest, d, theta)
            {
                return true;
            }
            *theta = saved;
        }
        false
    }
    if c.len() > d.len() {
        return false;
    }
    let mut theta = vec![None; num_vars(c) as usize];
    go(c, d, &mut theta)
}

#[derive(Clone, Debug)]
enum Origin {
    Input(usize),
    Resolve {
        left: usize,
        left_lit: usize,
        right: usize,
        right_lit: usize,
        unifier: Vec<(u32, T)>,
        left_vars: u32,
    },
    Factor {
        parent: usize,
        first: usize,
        second: usize,
        unifier: Vec<(u32, T)>,
    },
}

struct Stored {
    lits: Vec<Lit>,
    support: bool,
    origin: Origin,
}

/// How a saturation run ended.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Saturation {
    /// The empty clause was derived. `uses_support` is false when the
    /// refutation did not need any clause marked as support.
    Refuted {
        uses_support: bool,
    },
    /// No new clauses; `depth_capped` records whether clauses were dropped
    /// for exceeding the term-depth cap.
    Saturated {
        depth_capped: bool,
    },
    LimitReached(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct ProverStats {
    pub resolution_steps: usize,
    pub clauses_kept: usize,
    pub given_clauses: usize,
}

#[derive(Clone, Debug)]
pub struct RefutationResult {
    pub outcome: Saturation,
    pub stats: ProverStats,
    /// Present when the run refuted its input.
    pub derivation: Option<Derivation>,
}

struct Prover<'a> {
    limits: &'a ProverLimits,
    symbols: Symbols,
    clauses: Vec<Stored>,
    seen: HashSet<Vec<Lit>>,
    passive: BinaryHeap<Reverse<(usize, usize, usize)>>,
    active: Vec<usize>,
    index: HashMap<(u32, bool), Vec<(usize, usize)>>,
    stats: ProverStats,
    depth_capped: bool,
}

enum Added {
    Kept,
    Dropped,
    Empty(usize),
}

impl Prover<'_> {
    fn forward_subsumed(&self, lits: &[Lit]) -> bool {
        self.active.iter().any(|&id| subsumes(&self.clauses[id].lits, lits))
    }

    fn add(&mut self, lits: Vec<Lit>, support: bool, origin: Origin) -> Result<Added, String> {
        if is_tautology(&lits) {
            return Ok(Added::Dropped);
        }
        let lits = normalize(lits);
        let depth = lits.iter().flat_map(|l| l.args.iter()).map(T::depth).max().unwrap_or(0);
        if depth > self.limits.max_term_depth {
            self.depth_capped = true;
            return Ok(Added::Dropped);
        }
        if self.seen.contains(&lits) || self.forward_subsumed(&lits) {
            return Ok(Added::Dropped);
        }
        if self.clauses.len() >= self.limits.max_clauses {
            return Err(format!("clause limit of {} reached", self.limits.max_clauses));
        }
        let id = self.clauses.len();
        self.seen.insert(lits.clone());
        let empty = lits.is_empty();
        self.passive.push(Reverse((lits.len(), depth, id)));
        self.clauses.push(Stored { lits, support, origin });
        self.stats.clauses_kept = self.clauses.len();
        Ok(if empty { Added::Empty(id) } else { Added::Kept })
    }

    fn step(&mut self) -> Result<(), String> {
        self.stats.resolution_steps += 1;
        if self.stats.resolution_steps > self.limits.max_resolution_steps {
            return Err(format!(
                "resolution step limit of {} reached",
                self.limits.max_resolution_steps
            ));
        }
        Ok(())
    }

    fn factors(&mut self, id: usize) -> Result<Option<usize>, String> {
        let lits = self.clauses[id].lits.clone();
        let n = num_vars(&lits) as usize;
        for i in 0..lits.len() {
            for j in i + 1..lits.len() {
                if lits[i].pred != lits[j].pred || lits[i].pos != lits[j].pos {
                    continue;
                }
                let mut s = Subst::new(n);
                if !s.unify_args(&lits[i].args, &lits[j].args) {
                    continue;
                }
                self.step()?;
                let out: Vec<Lit> = lits
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != j)
                    .map(|(_, l)| s.apply_lit(l))
                    .collect();
                let origin = Origin::Factor {
                    parent: id,
                    first: i,
                    second: j,
                    unifier: s.bindings(),
                };
                let support = self.clauses[id].support;
                if let Added::Empty(e) = self.add(out, support, origin)? {
                    return Ok(Some(e));
                }
            }
        }
        Ok(None)
    }

    fn resolvents(&mut self, given: usize) -> Result<Option<usize>, String> {
        let g = self.clauses[given].lits.clone();
        let g_vars = num_vars(&g);
        for (gi, gl) in g.iter().enumerate() {
            let partners = self.index.get(&(gl.pred, !gl.pos)).cloned().unwrap_or_default();
            for (other, oi) in partners {
                let o = self.clauses[other].lits.clone();
                let o_vars = num_vars(&o);
                let mut s = Subst::new((g_vars + o_vars) as usize);
                let shifted = shift_lit(&o[oi], g_vars);
                if !s.unify_args(&gl.args, &shifted.args) {
                    continue;
                }
                self.step()?;
                let mut out: Vec<Lit> = Vec::with_capacity(g.len() + o.len() - 2);
                out.extend(
                    g.iter()
                        .enumerate()
                        .filter(|&(k, _)| k != gi)
                        .map(|(_, l)| s.apply_lit(l)),
                );
                out.extend(
                    o.iter()
                        .enumerate()
                        .filter(|&(k, _)| k != oi)
                        .map(|(_, l)| s.apply_lit(&shift_lit(l, g_vars))),
                );
                let origin = Origin::Resolve {
                    left: given,
                    left_lit: gi,
                    right: other,
                    right_lit: oi,
                    unifier: s.bindings(),
                    left_vars: g_vars,
                };
                let support = self.clauses[given].support || self.clauses[other].support;
                if let Added::Empty(e) = self.add(out, support, origin)? {
                    return Ok(Some(e));
                }
            }
        }
        Ok(None)
    }

    fn run(&mut self) -> Result<Option<usize>, String> {
        if let Some(id) = self.clauses.iter().position(|c| c.lits.is_empty()) {
            return Ok(Some(id));
        }
        while let Some(Reverse((_, _, given))) = self.passive.pop() {
            let lits = self.clauses[given].lits.clone();
            if self.forward_subsumed(&lits) {
                continue;
            }
            self.stats.given_clauses += 1;
            if let Some(e) = self.factors(given)? {
                return Ok(Some(e));
            }
            self.active.push(given);
            for (i, l) in lits.iter().enumerate() {
                self.index.entry((l.pred, l.pos)).or_default().push((given, i));
            }
            if let Some(e) = self.resolvents(given)? {
                return Ok(Some(e));
            }
        }
        Ok(None)
    }

    fn derivation(&self, empty: usize) -> Derivation {
        let mut needed = vec![false; self.clauses.len()];
        let mut stack = vec![empty];
        while let Some(id) = stack.pop() {
            if std::mem::replace(&mut needed[id], true) {
                continue;
            }
            match &self.clauses[id].origin {
                Origin::Input(_) => {}
                Origin::Resolve { left, right, .. } => stack.extend([*left, *right]),
                Origin::Factor { parent, .. } => stack.push(*parent),
            }
        }
        let clause_var = |v: u32| format!("x{v}");
        let steps = (0..self.clauses.len())
            .filter(|&id| needed[id])
            .map(|id| {
                let c = &self.clauses[id];
                let rule = match &c.origin {
                    Origin::Input(index) => StepRule::Input { index: *index },
                    Origin::Resolve {
                        left,
                        left_lit,
                        right,
                        right_lit,
                        unifier,
                        left_vars,
                    } => {
                        let lv = *left_vars;
                        let name = move |v: u32| {
                            if v < lv {
                                format!("L{v}")
                            } else {
                                format!("R{}", v - lv)
                            }
                        };
                        StepRule::Resolve {
                            left: *left,
                            left_lit: *left_lit,
                            right: *right,
                            right_lit: *right_lit,
                            unifier: unifier
                                .iter()
                                .map(|(v, t)| (name(*v), self.symbols.extern_term(t, &name)))
                                .collect(),
                        }
                    }
                    Origin::Factor {
                        parent,
                        first,
                        second,
                        unifier,
                    } => {
                        let name = |v: u32| format!("L{v}");
                        StepRule::Factor {
                            parent: *parent,
                            first: *first,
                            second: *second,
                            unifier: unifier
                                .iter()
                                .map(|(v, t)| (name(*v), self.symbols.extern_term(t, &name)))
                                .collect(),
                        }
                    }
                };
                Step {
                    id,
                    literals: self.symbols.extern_lits(&c.lits, &clause_var),
                    rule,
                }
            })
            .collect();
        Derivation { steps }
    }
}

/// Saturates `inputs` looking for the empty clause. `support[i]` marks
/// input clauses whose participation is tracked (the negated goal).
pub fn refute(inputs: &[Clause], support: &[bool], limits: &ProverLimits) -> RefutationResult {
    let mut p = Prover {
        limits,
        symbols: Symbols::default(),
        clauses: Vec::new(),
        seen: HashSet::new(),
        passive: BinaryHeap::new(),
        active: Vec::new(),
        index: HashMap::new(),
        stats: ProverStats::default(),
        depth_capped: false,
    };
    let mut early = None;
    for (i, c) in inputs.iter().enumerate() {
        let lits = p.symbols.clause(c);
        let flag = support.get(i).copied().unwrap_or(false);
        match p.add(lits, flag, Origin::Input(i)) {
            Ok(Added::Empty(e)) => {
                early = Some(e);
                break;
            }
            Ok(_) => {}
            Err(msg) => {
                return RefutationResult {
                    outcome: Saturation::LimitReached(msg),
                    stats: p.stats,
                    derivation: None,
                }
            }
        }
    }
    let result = match early {
        Some(e) => Ok(Some(e)),
        None => p.run(),
    };
    match result {
        Ok(Some(e)) => RefutationResult {
            outcome: Saturation::Refuted {
                uses_support: p.clauses[e].support,
            },
            stats: p.stats,
            derivation: Some(p.derivation(e)),
        },
        Ok(None) => RefutationResult {
            outcome: Saturation::Saturated {
                depth_capped: p.depth_capped,
            },
            stats: p.stats,
            derivation: None,
        },
        Err(msg) => RefutationResult {
            outcome: Saturation::LimitReached(msg),
            stats: p.stats,
            derivation: None,
        },
    }
}
