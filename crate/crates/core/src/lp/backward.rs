//! Goal-directed proof search.
//!
//! Goals are ground atoms. A rule is tried by matching its head against the
//! goal and proving its body left to right, grounding any body variable that
//! the head does not fix over the program's constants. A goal already on the
//! ancestor stack is cut, which guarantees termination on cyclic rules.
//!
//! Proved goals are cached unconditionally. A failed goal is cached only once
//! the failure no longer depends on a cut ancestor: failures that do are
//! parked until the oldest ancestor they depend on fails too. Meanwhile
//! they are remembered per stack level, so siblings under the same
//! ancestors do not search them again; a level is forgotten when the frame
//! above it returns.

use std::collections::{HashMap, HashSet};
use std::fmt;

use indexmap::IndexSet;
use serde::{Deserialize, Serialize};

use crate::ir::{Atom, Term};
use crate::syntax::lp::LpProgram;

use super::{flatten_rules, Bindings, FactSet, FlatRule, LpError, LpLimits};

/// Which rule (and which atom of its head) justified a proof step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RuleRef {
    pub rule_index: usize,
    pub head_index: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofTree {
    pub root: Atom,
    pub rule: Option<RuleRef>,
    pub children: Vec<ProofTree>,
}

impl ProofTree {
    pub fn leaf(root: Atom) -> Self {
        ProofTree {
            root,
            rule: None,
            children: Vec::new(),
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.rule.is_none()
    }

    pub fn depth(&self) -> usize {
        self.children.iter().map(|c| 1 + c.depth()).max().unwrap_or(0)
    }

    /// Checks every step against `p`: leaves are base facts, and each
    /// internal node's children instantiate its rule body under the single
    /// substitution that maps the rule head onto the node.
    pub fn validate(&self, p: &LpProgram) -> bool {
        match self.rule {
            None => self.children.is_empty() && p.facts.iter().any(|f| f.atom == self.root),
            Some(r) => {
                let Some(rule) = p.rules.get(r.rule_index) else {
                    return false;
                };
                let Some(head) = rule.head.get(r.head_index) else {
                    return false;
                };
                if rule.body.len() != self.children.len() {
                    return false;
                }
                let mut b = match Bindings::default().match_atom(head, &self.root) {
                    Some(b) => b,
                    None => return false,
                };
                for (pattern, child) in rule.body.iter().zip(&self.children) {
                    match b.match_atom(pattern, &child.root) {
                        Some(next) => b = next,
                        None => return false,
                    }
                    if !child.validate(p) {
                        return false;
                    }
                }
                true
            }
        }
    }

    fn write_indented(&self, f: &mut fmt::Formatter<'_>, indent: usize) -> fmt::Result {
        let how = match self.rule {
            None => "fact".to_string(),
            Some(r) => format!("rule {}", r.rule_index + 1),
        };
        writeln!(
            f,
            "{:indent$}{}  [{how}]",
            "",
            crate::syntax::lp::print_atom(&self.root),
            indent = indent
        )?;
        for c in &self.children {
            c.write_indented(f, indent + 2)?;
        }
        Ok(())
    }
}

impl fmt::Display for ProofTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_indented(f, 0)
    }
}

enum Outcome {
    Proved(ProofTree),
    /// `low` is the shallowest ancestor depth whose cut this failure relied
    /// on, or `usize::MAX` when the failure is unconditional.
    Failed {
        low: usize,
    },
}

struct Search {
    rules: Vec<FlatRule>,
    base: FactSet,
    universe: Vec<Term>,
    proven: HashMap<Atom, ProofTree>,
    failed: HashSet<Atom>,
    stack: Vec<Atom>,
    parked: Vec<Atom>,
    /// `conditional[d]`: goals that failed at stack depth `d` relying on a
    /// cut ancestor, with the `low` they reported.
    conditional: Vec<HashMap<Atom, usize>>,
    steps: usize,
    max_steps: usize,
}

impl Search {
    fn prove(&mut self, goal: &Atom) -> Result<Outcome, LpError> {
        if self.base.contains(goal) {
            return Ok(Outcome::Proved(ProofTree::leaf(goal.clone())));
        }
        if let Some(t) = self.proven.get(goal) {
            return Ok(Outcome::Proved(t.clone()));
        }
        if self.failed.contains(goal) {
            return Ok(Outcome::Failed { low: usize::MAX });
        }
        if let Some(depth) = self.stack.iter().position(|a| a == goal) {
            return Ok(Outcome::Failed { low: depth });
        }
        if let Some(&low) = self.conditional.iter().find_map(|level| level.get(goal)) {
            return Ok(Outcome::Failed { low });
        }
        self.steps += 1;
        if self.steps > self.max_steps {
            return Err(LpError::ResourceExhausted(format!(
                "backward chaining expanded more than {} goals",
                self.max_steps
            )));
        }

        let depth = self.stack.len();
        let parked_mark = self.parked.len();
        self.stack.push(goal.clone());
        let mut low = usize::MAX;
        let mut found = None;
        for ri in 0..self.rules.len() {
            let Some(b) = Bindings::default().match_atom(&self.rules[ri].head, goal) else {
                continue;
            };
            let body = self.rules[ri].body.clone();
            let remaining: Vec<usize> = (0..body.len()).collect();
            if let Some(mut children) = self.solve_body(&body, remaining, b, &mut low)? {
                children.sort_by_key(|(i, _)| *i);
                found = Some(ProofTree {
                    root: goal.clone(),
                    rule: Some(self.rules[ri].origin),
                    children: children.into_iter().map(|(_, t)| t).collect(),
                });
                break;
            }
        }
        self.stack.pop();
        self.conditional.truncate(depth + 1);

        if let Some(tree) = found {
            // Parked failures below this goal may have been waiting on it.
            self.parked.truncate(parked_mark);
            self.proven.insert(goal.clone(), tree.clone());
            return Ok(Outcome::Proved(tree));
        }
        if low >= depth {
            for a in self.parked.drain(parked_mark..) {
                self.failed.insert(a);
            }
            self.failed.insert(goal.clone());
            Ok(Outcome::Failed { low: usize::MAX })
        } else {
            self.parked.push(goal.clone());
            if self.conditional.len() <= depth {
                self.conditional.resize_with(depth + 1, HashMap::new);
            }
            self.conditional[depth].insert(goal.clone(), low);
            Ok(Outcome::Failed { low })
        }
    }

    fn solve_body(
        &mut self,
        body: &[Atom],
        remaining: Vec<usize>,
        bindings: Bindings,
        low: &mut usize,
    ) -> Result<Option<Vec<(usize, ProofTree)>>, LpError> {
        if remaining.is_empty() {
            return Ok(Some(Vec::new()));
        }
        // Most-instantiated atom first; ties keep body order.
        let (pos, &idx) = remaining
            .iter()
            .enumerate()
            .min_by_key(|(_, &i)| bindings.apply(&body[i]).variables().len())
            .unwrap();
        let mut rest = remaining.clone();
        rest.remove(pos);
        let pattern = bindings.apply(&body[idx]);
        let vars: Vec<String> = pattern.variables().into_iter().collect();

        let n = self.universe.len();
        if !vars.is_empty() && n == 0 {
            return Ok(None);
        }
        let mut odometer = vec![0usize; vars.len()];
        loop {
            let mut b = bindings.clone();
            for (v, &k) in vars.iter().zip(&odometer) {
                b.bind(v, self.universe[k].clone());
            }
            let ground = b.apply(&body[idx]);
            match self.prove(&ground)? {
                Outcome::Proved(tree) => {
                    if let Some(mut others) = self.solve_body(body, rest.clone(), b, low)? {
                        others.push((idx, tree));
                        return Ok(Some(others));
                    }
                }
                Outcome::Failed { low: l } => *low = (*low).min(l),
            }
            // Advance the odometer.
            let mut carry = true;
            for digit in odometer.iter_mut().rev() {
                if !carry {
                    break;
                }
                *digit += 1;
                carry = *digit == n;
                if carry {
                    *digit = 0;
                }
            }
            if carry {
                return Ok(None);
            }
        }
    }
}

fn universe(p: &LpProgram, goal: &Atom) -> Vec<Term> {
    let mut out = IndexSet::new();
    let mut add = |a: &Atom| {
        for t in &a.args {
            if t.is_ground() {
                out.insert(t.clone());
            }
        }
    };
    p.facts.iter().for_each(|f| add(&f.atom));
    for r in &p.rules {
        r.body.iter().chain(&r.head).for_each(&mut add);
    }
    add(&p.query);
    add(goal);
    out.into_iter().collect()
}

/// Searches for a proof of the ground `goal`. Returns `Ok(None)` when the
/// goal is not provable.
pub fn backward_prove(p: &LpProgram, goal: &Atom, limits: &LpLimits) -> Result<Option<ProofTree>, LpError> {
    if !goal.is_ground() {
        return Err(LpError::NonGroundQuery(goal.clone()));
    }
    let mut search = Search {
        rules: flatten_rules(p),
        base: p.facts.iter().map(|f| f.atom.clone()).collect(),
        universe: universe(p, goal),
        proven: HashMap::new(),
        failed: HashSet::new(),
        stack: Vec::new(),
        parked: Vec::new(),
        conditional: Vec::new(),
        steps: 0,
        max_steps: limits.max_derived_facts,
    };
    match search.prove(goal)? {
        Outcome::Proved(t) => Ok(Some(t)),
        Outcome::Failed { .. } => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_lp;

    fn program(facts: &str, rules: &str, query: &str) -> LpProgram {
        parse_lp(&format!(
            "Predicates:\nFacts:\n{facts}\nRules:\n{rules}\nQuery:\n{query}\n"
        ))
        .unwrap()
        .value
    }

    #[test]
    fn base_fact_is_a_leaf() {
        let p = program("A(k)", "", "A(k)");
        let t = backward_prove(&p, &p.query, &LpLimits::default()).unwrap().unwrap();
        assert!(t.is_leaf());
        assert!(t.validate(&p));
    }

    #[test]
    fn circuit_goal_has_two_children() {
        let p = program(
            "Complete(Circuit, True)\nHas(Circuit, LightBulb)",
            "Complete(Circuit, True) && Has(Circuit, LightBulb) >>> Glowing(LightBulb, True)",
            "Glowing(LightBulb, True)",
        );
        let t = backward_prove(&p, &p.query, &LpLimits::default()).unwrap().unwrap();
        assert_eq!(t.depth(), 1);
        assert_eq!(t.children.len(), 2);
        assert!(t.children.iter().all(ProofTree::is_leaf));
        assert!(t.validate(&p));
    }

    #[test]
    fn cyclic_rules_terminate() {
        let p = program("", "A(k) >>> B(k)\nB(k) >>> A(k)", "A(k)");
        assert_eq!(backward_prove(&p, &p.query, &LpLimits::default()).unwrap(), None);
    }

    #[test]
    fn existential_body_variables_are_grounded() {
        let p = program(
            "Parent(ann, bob)\nParent(bob, cy)",
            "Parent($x, $y) && Parent($y, $z) >>> Grand($x, $z)",
            "Grand(ann, cy)",
        );
        let t = backward_prove(&p, &p.query, &LpLimits::default()).unwrap().unwrap();
        assert!(t.validate(&p));
        assert_eq!(t.children[1].root.to_string(), "Parent(bob, cy)");
    }

    #[test]
    fn left_recursion_through_a_cut() {
        // P(c) needs P(b) which needs P(a); the rule's first body atom is the
        // recursive one, so the search must not cache the cut failure.
        let p = program("P(a)\nQ(a, b)\nQ(b, c)", "P($y) && Q($y, $x) >>> P($x)", "P(c)");
        let t = backward_prove(&p, &p.query, &LpLimits::default()).unwrap().unwrap();
        assert!(t.validate(&p));
        assert_eq!(t.depth(), 2);
    }

    #[test]
    fn tampered_tree_fails_validation() {
        let p = program("A(k)", "A($x) >>> B($x)", "B(k)");
        let mut t = backward_prove(&p, &p.query, &LpLimits::default()).unwrap().unwrap();
        assert!(t.validate(&p));
        t.children[0].root = Atom::new("A", vec![Term::constant("j")]);
        assert!(!t.validate(&p));
    }
}
