//! Finite-domain constraint solving.
//!
//! [`propagate`] enforces arc consistency; [`solve_all`] enumerates every
//! solution by backtracking with forward checking; [`evaluate_option`] reads
//! an answer option as a claim over the full solution set.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ir::TruthValue;
use crate::syntax::csp::{ConstraintExpr, CspModel};

pub const DEFAULT_MAX_SOLUTIONS: usize = 10_000;

/// A total assignment of values to the model's variables.
pub type Assignment = BTreeMap<String, i64>;

/// Live domains in declaration order.
pub type Domains = IndexMap<String, BTreeSet<i64>>;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CspError {
    #[error("no value of {0} satisfies the constraints")]
    Unsatisfiable(String),
    #[error("more than {cap} solutions; enumeration stopped")]
    SolutionCapExceeded { cap: usize },
    #[error("the constraints have no solution")]
    UnsatisfiableModel,
    #[error("'{0}' is not a declared variable")]
    UnknownVariable(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub nodes_expanded: u64,
    pub backtracks: u64,
    pub solutions_found: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Solutions {
    pub solutions: Vec<Assignment>,
    pub stats: SearchStats,
}

enum Con<'m> {
    /// A comparison over at most two distinct variables.
    Cmp {
        expr: &'m ConstraintExpr,
        scope: Vec<usize>,
    },
    AllDifferent(Vec<usize>),
}

struct Compiled<'m> {
    names: Vec<&'m str>,
    index: HashMap<&'m str, usize>,
    domains: Vec<Vec<i64>>,
    cons: Vec<Con<'m>>,
}

impl<'m> Compiled<'m> {
    fn new(model: &'m CspModel) -> Result<Self, CspError> {
        let names: Vec<&str> = model.variables.iter().map(|v| v.name.as_str()).collect();
        let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        let domains = model
            .variables
            .iter()
            .map(|v| v.domain.iter().copied().collect())
            .collect();
        let mut cons = Vec::new();
        for c in &model.constraints {
            let mut scope = Vec::new();
            for v in c.expr.variables() {
                let i = *index.get(v).ok_or_else(|| CspError::UnknownVariable(v.to_string()))?;
                if !scope.contains(&i) {
                    scope.push(i);
                }
            }
            cons.push(match &c.expr {
                ConstraintExpr::AllDifferent(_) => Con::AllDifferent(scope),
                expr => Con::Cmp { expr, scope },
            });
        }
        Ok(Compiled {
            names,
            index,
            domains,
            cons,
        })
    }

    fn eval(&self, expr: &ConstraintExpr, values: &[Option<i64>]) -> Option<bool> {
        expr.eval(|name| self.index.get(name).and_then(|&i| values[i]))
    }
}

/// Binary arcs: (constraint index, x, y) meaning "x needs support in y".
fn arcs(c: &Compiled) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for (ci, con) in c.cons.iter().enumerate() {
        match con {
            Con::Cmp { scope, .. } if scope.len() == 2 => {
                out.push((ci, scope[0], scope[1]));
                out.push((ci, scope[1], scope[0]));
            }
            Con::AllDifferent(scope) => {
                for &x in scope {
                    for &y in scope {
                        if x != y {
                            out.push((ci, x, y));
                        }
                    }
                }
            }
            _ => {}
        }
    }
    out
}

fn supported(c: &Compiled, ci: usize, x: usize, vx: i64, y: usize, dy: &[i64]) -> bool {
    let mut values = vec![None; c.names.len()];
    values[x] = Some(vx);
    dy.iter().any(|&vy| match &c.cons[ci] {
        Con::AllDifferent(_) => vx != vy,
        Con::Cmp { expr, .. } => {
            values[y] = Some(vy);
            c.eval(expr, &values) == Some(true)
        }
    })
}

/// On failure, returns the variable whose domain emptied, or None when a
/// variable-free constraint is false.
fn ac3(c: &Compiled, domains: &mut [Vec<i64>]) -> Result<(), Option<usize>> {
    // Node consistency for constraints over one variable (or none).
    for con in &c.cons {
        if let Con::Cmp { expr, scope } = con {
            match scope.as_slice() {
                [] => {
                    if c.eval(expr, &[]) != Some(true) {
                        return Err(None);
                    }
                }
                [x] => {
                    let mut values = vec![None; c.names.len()];
                    domains[*x].retain(|&v| {
                        values[*x] = Some(v);
                        c.eval(expr, &values) == Some(true)
                    });
                    if domains[*x].is_empty() {
                        return Err(Some(*x));
                    }
                }
                _ => {}
            }
        }
    }
    let all = arcs(c);
    let mut queue: VecDeque<(usize, usize, usize)> = all.iter().copied().collect();
    while let Some((ci, x, y)) = queue.pop_front() {
        let dy = domains[y].clone();
        let before = domains[x].len();
        domains[x].retain(|&vx| supported(c, ci, x, vx, y, &dy));
        if domains[x].is_empty() {
            return Err(Some(x));
        }
        if domains[x].len() != before {
            for &(cj, z, w) in &all {
                if w == x && z != y && !queue.contains(&(cj, z, w)) {
                    queue.push_back((cj, z, w));
                }
            }
        }
    }
    Ok(())
}

/// Removes every value that has no support under some binary constraint,
/// to a fixpoint. AllDifferent constraints take part as pairwise
/// inequalities.
pub fn propagate(model: &CspModel) -> Result<Domains, CspError> {
    let c = Compiled::new(model)?;
    let mut domains = c.domains.clone();
    ac3(&c, &mut domains).map_err(|x| {
        CspError::Unsatisfiable(x.map_or_else(|| "a constant constraint".to_string(), |x| c.names[x].to_string()))
    })?;
    Ok(c.names
        .iter()
        .zip(domains)
        .map(|(n, d)| (n.to_string(), d.into_iter().collect()))
        .collect())
}

struct Search<'c, 'm> {
    c: &'c Compiled<'m>,
    values: Vec<Option<i64>>,
    cap: usize,
    out: Vec<Assignment>,
    stats: SearchStats,
}

impl Search<'_, '_> {
    /// Checks constraints touching `x` whose scope is now fully assigned.
    fn consistent(&self, x: usize) -> bool {
        let v = self.values[x];
        self.c.cons.iter().all(|con| match con {
            Con::Cmp { expr, scope } => {
                !scope.contains(&x)
                    || scope.iter().any(|&s| self.values[s].is_none())
                    || self.c.eval(expr, &self.values) == Some(true)
            }
            Con::AllDifferent(scope) => !scope.contains(&x) || scope.iter().all(|&s| s == x || self.values[s] != v),
        })
    }

    /// Filters the domains of unassigned variables against `x`'s new value.
    /// Returns None on a wipeout.
    fn forward_check(&mut self, x: usize, domains: &[Vec<i64>]) -> Option<Vec<Vec<i64>>> {
        let mut next = domains.to_vec();
        let vx = self.values[x];
        for con in &self.c.cons {
            match con {
                Con::Cmp { expr, scope } if scope.contains(&x) => {
                    let open: Vec<usize> = scope.iter().copied().filter(|&s| self.values[s].is_none()).collect();
                    if let [y] = open.as_slice() {
                        let y = *y;
                        let mut values = self.values.clone();
                        next[y].retain(|&vy| {
                            values[y] = Some(vy);
                            self.c.eval(expr, &values) == Some(true)
                        });
                        if next[y].is_empty() {
                            return None;
                        }
                    }
                }
                Con::AllDifferent(scope) if scope.contains(&x) => {
                    for &y in scope {
                        if self.values[y].is_none() {
                            next[y].retain(|&vy| Some(vy) != vx);
                            if next[y].is_empty() {
                                return None;
                            }
                        }
                    }
                }
                _ => {}
            }
        }
        Some(next)
    }

    fn run(&mut self, domains: &[Vec<i64>]) -> Result<(), CspError> {
        // Minimum remaining values; ties go to the earlier declaration.
        let pick = (0..self.values.len())
            .filter(|&i| self.values[i].is_none())
            .min_by_key(|&i| domains[i].len());
        let Some(x) = pick else {
            if self.out.len() == self.cap {
                return Err(CspError::SolutionCapExceeded { cap: self.cap });
            }
            self.stats.solutions_found += 1;
            self.out.push(
                self.c
                    .names
                    .iter()
                    .zip(&self.values)
                    .map(|(n, v)| (n.to_string(), v.expect("all assigned")))
                    .collect(),
            );
            return Ok(());
        };
        for &v in &domains[x] {
            self.stats.nodes_expanded += 1;
            self.values[x] = Some(v);
            if !self.consistent(x) {
                self.stats.backtracks += 1;
                continue;
            }
            match self.forward_check(x, domains) {
                Some(next) => self.run(&next)?,
                None => self.stats.backtracks += 1,
            }
        }
        self.values[x] = None;
        Ok(())
    }
}

/// Enumerates every solution. Fails with `SolutionCapExceeded` if there are
/// more than `max_solutions`.
pub fn solve_all(model: &CspModel, max_solutions: usize) -> Result<Solutions, CspError> {
    let c = Compiled::new(model)?;
    let mut domains = c.domains.clone();
    let mut search = Search {
        c: &c,
        values: vec![None; c.names.len()],
        cap: max_solutions,
        out: Vec::new(),
        stats: SearchStats::default(),
    };
    if ac3(&c, &mut domains).is_ok() {
        search.run(&domains)?;
    }
    Ok(Solutions {
        solutions: search.out,
        stats: search.stats,
    })
}

fn classify(opt: &ConstraintExpr, solutions: &[Assignment]) -> Result<TruthValue, CspError> {
    let mut holds = 0;
    for s in solutions {
        let v = opt.eval(|n| s.get(n).copied()).ok_or_else(|| {
            let missing = opt
                .variables()
                .into_iter()
                .find(|v| !s.contains_key(*v))
                .unwrap_or_default();
            CspError::UnknownVariable(missing.to_string())
        })?;
        holds += v as usize;
    }
    Ok(if holds == solutions.len() {
        TruthValue::Proved
    } else if holds == 0 {
        TruthValue::Disproved
    } else {
        TruthValue::Unknown
    })
}

/// Proved if `opt` holds in every solution, Disproved if in none, Unknown
/// otherwise.
pub fn evaluate_option(model: &CspModel, opt: &ConstraintExpr) -> Result<TruthValue, CspError> {
    let all = solve_all(model, DEFAULT_MAX_SOLUTIONS)?;
    if all.solutions.is_empty() {
        return Err(CspError::UnsatisfiableModel);
    }
    classify(opt, &all.solutions)
}

/// Evaluates every lettered option of the model against one enumeration.
pub fn evaluate_options(model: &CspModel, max_solutions: usize) -> Result<BTreeMap<char, TruthValue>, CspError> {
    let all = solve_all(model, max_solutions)?;
    if all.solutions.is_empty() {
        return Err(CspError::UnsatisfiableModel);
    }
    model
        .options
        .iter()
        .map(|(&letter, opt)| Ok((letter, classify(&opt.expr, &all.solutions)?)))
        .collect()
}
