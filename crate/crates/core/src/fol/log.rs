//! Refutation logs and their independent replay.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ir::{Atom, Clause, Literal, Term};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepRule {
    Input {
        index: usize,
    },
    /// Resolves literal `left_lit` of `left` against `right_lit` of `right`.
    /// Unifier variables are named `L<n>` for the left parent's `x<n>` and
    /// `R<n>` for the right parent's.
    Resolve {
        left: usize,
        left_lit: usize,
        right: usize,
        right_lit: usize,
        unifier: Vec<(String, Term)>,
    },
    /// Merges literal `second` of `parent` into `first`. Unifier variables
    /// are named `L<n>`.
    Factor {
        parent: usize,
        first: usize,
        second: usize,
        unifier: Vec<(String, Term)>,
    },
}

/// A derived clause. Literal order matters: rules refer to literals by index.
/// Variables are named `x0`, `x1`, ...
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub id: usize,
    pub literals: Vec<Literal>,
    pub rule: StepRule,
}

/// The steps a refutation used, in derivation order, ending with the empty
/// clause.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Derivation {
    pub steps: Vec<Step>,
}

fn write_unifier(f: &mut fmt::Formatter<'_>, unifier: &[(String, Term)]) -> fmt::Result {
    f.write_str("{")?;
    for (i, (v, t)) in unifier.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "${v} := {t}")?;
    }
    f.write_str("}")
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.id)?;
        if self.literals.is_empty() {
            f.write_str("[]")?;
        }
        for (i, l) in self.literals.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            write!(f, "{l}")?;
        }
        match &self.rule {
            StepRule::Input { index } => write!(f, " <- input {index}"),
            StepRule::Resolve {
                left,
                left_lit,
                right,
                right_lit,
                unifier,
            } => {
                write!(f, " <- resolve {left}.{left_lit} {right}.{right_lit} ")?;
                write_unifier(f, unifier)
            }
            StepRule::Factor {
                parent,
                first,
                second,
                unifier,
            } => {
                write!(f, " <- factor {parent}.{first},{second} ")?;
                write_unifier(f, unifier)
            }
        }
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.steps {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

fn rename_term(t: &Term, prefix: &str) -> Term {
    match t {
        Term::Variable(v) => Term::Variable(format!("{prefix}{}", v.trim_start_matches('x'))),
        Term::Func(n, args) => Term::Func(n.clone(), args.iter().map(|a| rename_term(a, prefix)).collect()),
        other => other.clone(),
    }
}

fn rename(lits: &[Literal], prefix: &str) -> Vec<Literal> {
    lits.iter()
        .map(|l| Literal {
            positive: l.positive,
            atom: Atom::new(
                l.atom.predicate.clone(),
                l.atom.args.iter().map(|t| rename_term(t, prefix)).collect(),
            ),
        })
        .collect()
}

fn apply_term(t: &Term, theta: &HashMap<&str, &Term>) -> Term {
    match t {
        Term::Variable(v) => theta.get(v.as_str()).map_or_else(|| t.clone(), |&b| b.clone()),
        Term::Func(n, args) => Term::Func(n.clone(), args.iter().map(|a| apply_term(a, theta)).collect()),
        other => other.clone(),
    }
}

fn apply(l: &Literal, theta: &HashMap<&str, &Term>) -> Literal {
    Literal {
        positive: l.positive,
        atom: Atom::new(
            l.atom.predicate.clone(),
            l.atom.args.iter().map(|t| apply_term(t, theta)).collect(),
        ),
    }
}

fn match_term(p: &Term, t: &Term, theta: &mut HashMap<String, Term>) -> bool {
    match p {
        Term::Variable(v) => match theta.get(v) {
            Some(bound) => bound == t,
            None => {
                theta.insert(v.clone(), t.clone());
                true
            }
        },
        Term::Func(f, xs) => match t {
            Term::Func(g, ys) if f == g && xs.len() == ys.len() => {
                xs.iter().zip(ys).all(|(x, y)| match_term(x, y, theta))
            }
            _ => false,
        },
        other => other == t,
    }
}

fn instance_subset(a: &[Literal], b: &[Literal], theta: &mut HashMap<String, Term>) -> bool {
    let Some((first, rest)) = a.split_first() else {
        return true;
    };
    for target in b {
        if target.positive != first.positive
            || target.atom.predicate != first.atom.predicate
            || target.atom.args.len() != first.atom.args.len()
        {
            continue;
        }
        let saved = theta.clone();
        if first
            .atom
            .args
            .iter()
            .zip(&target.atom.args)
            .all(|(p, t)| match_term(p, t, theta))
            && instance_subset(rest, b, theta)
        {
            return true;
        }
        *theta = saved;
    }
    false
}

/// Equal up to a renaming of variables, as sets of literals.
fn variant(a: &[Literal], b: &[Literal]) -> bool {
    let a = Clause::new(a.iter().cloned());
    let b = Clause::new(b.iter().cloned());
    a.len() == b.len()
        && instance_subset(a.literals(), b.literals(), &mut HashMap::new())
        && instance_subset(b.literals(), a.literals(), &mut HashMap::new())
}

impl Derivation {
    /// Replays every step against `inputs`, the clause list the prover was
    /// given. Each resolvent and factor is recomputed from its parents under
    /// the recorded unifier and compared with the recorded clause.
    pub fn verify(&self, inputs: &[Clause]) -> Result<(), String> {
        let mut known: HashMap<usize, &Step> = HashMap::new();
        for step in &self.steps {
            let fail = |why: &str| Err(format!("step {}: {why}", step.id));
            let parent = |id: usize| -> Result<&Step, String> {
                known
                    .get(&id)
                    .copied()
                    .ok_or_else(|| format!("step {}: parent {id} is not an earlier step", step.id))
            };
            let expected = match &step.rule {
                StepRule::Input { index } => match inputs.get(*index) {
                    Some(c) => c.literals().to_vec(),
                    None => return fail("input index out of range"),
                },
                StepRule::Resolve {
                    left,
                    left_lit,
                    right,
                    right_lit,
                    unifier,
                } => {
                    let l = rename(&parent(*left)?.literals, "L");
                    let r = rename(&parent(*right)?.literals, "R");
                    let (Some(ll), Some(rl)) = (l.get(*left_lit), r.get(*right_lit)) else {
                        return fail("literal index out of range");
                    };
                    let theta: HashMap<&str, &Term> = unifier.iter().map(|(v, t)| (v.as_str(), t)).collect();
                    if ll.positive == rl.positive || apply(ll, &theta).atom != apply(rl, &theta).atom {
                        return fail("resolved literals are not complementary under the unifier");
                    }
                    l.iter()
                        .enumerate()
                        .filter(|&(i, _)| i != *left_lit)
                        .map(|(_, x)| apply(x, &theta))
                        .chain(
                            r.iter()
                                .enumerate()
                                .filter(|&(i, _)| i != *right_lit)
                                .map(|(_, x)| apply(x, &theta)),
                        )
                        .collect()
                }
                StepRule::Factor {
                    parent: p,
                    first,
                    second,
                    unifier,
                } => {
                    let lits = rename(&parent(*p)?.literals, "L");
                    let (Some(a), Some(b)) = (lits.get(*first), lits.get(*second)) else {
                        return fail("literal index out of range");
                    };
                    let theta: HashMap<&str, &Term> = unifier.iter().map(|(v, t)| (v.as_str(), t)).collect();
                    if first == second || apply(a, &theta) != apply(b, &theta) {
                        return fail("factored literals are not identical under the unifier");
                    }
                    lits.iter()
                        .enumerate()
                        .filter(|&(i, _)| i != *second)
                        .map(|(_, x)| apply(x, &theta))
                        .collect()
                }
            };
            if !variant(&expected, &step.literals) {
                return fail("recorded clause does not match the replayed one");
            }
            known.insert(step.id, step);
        }
        match self.steps.last() {
            Some(s) if s.literals.is_empty() => Ok(()),
            _ => Err("derivation does not end with the empty clause".into()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(positive: bool, pred: &str, args: &[Term]) -> Literal {
        Literal {
            positive,
            atom: Atom::new(pred, args.to_vec()),
        }
    }

    fn sample() -> (Vec<Clause>, Derivation) {
        let a = Term::constant("a");
        let x0 = Term::var("x0");
        let inputs = vec![
            Clause::new([lit(true, "P", std::slice::from_ref(&a))]),
            Clause::new([lit(false, "P", &[Term::var("v1")]), lit(true, "Q", &[Term::var("v1")])]),
            Clause::new([lit(false, "Q", std::slice::from_ref(&a))]),
        ];
        let d = Derivation {
            steps: vec![
                Step {
                    id: 0,
                    literals: vec![lit(true, "P", std::slice::from_ref(&a))],
                    rule: StepRule::Input { index: 0 },
                },
                Step {
                    id: 1,
                    literals: vec![lit(false, "P", std::slice::from_ref(&x0)), lit(true, "Q", &[x0])],
                    rule: StepRule::Input { index: 1 },
                },
                Step {
                    id: 2,
                    literals: vec![lit(false, "Q", std::slice::from_ref(&a))],
                    rule: StepRule::Input { index: 2 },
                },
                Step {
                    id: 3,
                    literals: vec![lit(true, "Q", std::slice::from_ref(&a))],
                    rule: StepRule::Resolve {
                        left: 0,
                        left_lit: 0,
                        right: 1,
                        right_lit: 0,
                        unifier: vec![("R0".into(), a.clone())],
                    },
                },
                Step {
                    id: 4,
                    literals: vec![],
                    rule: StepRule::Resolve {
                        left: 3,
                        left_lit: 0,
                        right: 2,
                        right_lit: 0,
                        unifier: vec![],
                    },
                },
            ],
        };
        (inputs, d)
    }

    #[test]
    fn valid_log_replays() {
        let (inputs, d) = sample();
        d.verify(&inputs).unwrap();
        let text = d.to_string();
        assert_eq!(text.lines().count(), 5);
        assert!(text.contains("3: Q(a) <- resolve 0.0 1.0 {$R0 := a}"));
        assert!(text.ends_with("4: [] <- resolve 3.0 2.0 {}\n"));
    }

    #[test]
    fn wrong_unifier_is_caught() {
        let (inputs, mut d) = sample();
        if let StepRule::Resolve { unifier, .. } = &mut d.steps[3].rule {
            unifier[0].1 = Term::constant("b");
        }
        assert!(d.verify(&inputs).unwrap_err().starts_with("step 3"));
    }

    #[test]
    fn wrong_result_is_caught() {
        let (inputs, mut d) = sample();
        d.steps[3].literals = vec![lit(true, "Q", &[Term::constant("b")])];
        assert!(d.verify(&inputs).is_err());
    }

    #[test]
    fn forward_reference_is_caught() {
        let (inputs, mut d) = sample();
        d.steps.swap(0, 3);
        assert!(d.verify(&inputs).is_err());
    }
}
