//! Constraint models: a generator and a brute-force solver.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use logiclm::ir::TruthValue;
use logiclm::syntax::csp::{CmpOp, ConstraintExpr, CspConstraint, CspModel, CspVariable, Operand};

use super::{random_gloss, TestRng};

const NAMES: [&str; 6] = ["amy", "eli", "eve", "blue_book", "v2", "minivan"];
const OPS: [CmpOp; 6] = [CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Gt, CmpOp::Le, CmpOp::Ge];

pub type Solution = BTreeMap<String, i64>;

fn operand(rng: &mut TestRng, vars: &[String]) -> Operand {
    let v = vars[rng.random_range(0..vars.len())].clone();
    match rng.random_range(0..6) {
        0 | 1 => Operand::Int(rng.random_range(0..=6)),
        2 => {
            let k = rng.random_range(1..=2);
            Operand::Sum(v, if rng.random_bool(0.5) { k } else { -k })
        }
        _ => Operand::Var(v),
    }
}

fn comparison(rng: &mut TestRng, vars: &[String]) -> ConstraintExpr {
    let lhs = operand(rng, vars);
    let mut rhs = operand(rng, vars);
    // At least one side names a variable.
    if lhs.var().is_none() && rhs.var().is_none() {
        rhs = Operand::Var(vars[rng.random_range(0..vars.len())].clone());
    }
    ConstraintExpr::cmp(lhs, OPS[rng.random_range(0..OPS.len())], rhs)
}

fn constraint(rng: &mut TestRng, vars: &[String]) -> ConstraintExpr {
    if vars.len() >= 2 && rng.random_bool(0.2) {
        let picked: Vec<String> = vars.iter().filter(|_| rng.random_bool(0.7)).cloned().collect();
        if picked.len() >= 2 {
            return ConstraintExpr::AllDifferent(picked);
        }
    }
    comparison(rng, vars)
}

/// At most five variables with domains drawn from 1..=5.
pub fn random_model(rng: &mut TestRng) -> CspModel {
    let n = rng.random_range(1..=5);
    let variables: Vec<CspVariable> = NAMES[..n]
        .iter()
        .map(|name| {
            let mut domain: BTreeSet<i64> = (1..=5).filter(|_| rng.random_bool(0.6)).collect();
            if domain.is_empty() {
                domain.insert(rng.random_range(1..=5));
            }
            CspVariable {
                name: name.to_string(),
                domain,
                gloss: random_gloss(rng),
            }
        })
        .collect();
    let names: Vec<String> = variables.iter().map(|v| v.name.clone()).collect();
    let constraints = (0..rng.random_range(0..=5))
        .map(|_| CspConstraint {
            expr: constraint(rng, &names),
            gloss: random_gloss(rng),
        })
        .collect();
    let options = ('A'..='E')
        .take(rng.random_range(1..=4))
        .map(|l| {
            (
                l,
                CspConstraint {
                    expr: comparison(rng, &names),
                    gloss: random_gloss(rng),
                },
            )
        })
        .collect();
    let mut legend = BTreeMap::new();
    if rng.random_bool(0.7) {
        legend.insert(1, "first".to_string());
        legend.insert(5, "last one".to_string());
    }
    CspModel {
        legend,
        variables,
        constraints,
        options,
    }
}

fn value(o: &Operand, s: &Solution) -> i64 {
    match o {
        Operand::Int(i) => *i,
        Operand::Var(v) => s[v],
        Operand::Sum(v, k) => s[v] + k,
    }
}

pub fn holds(c: &ConstraintExpr, s: &Solution) -> bool {
    match c {
        ConstraintExpr::AllDifferent(vs) => {
            let values: BTreeSet<i64> = vs.iter().map(|v| s[v]).collect();
            values.len() == vs.len()
        }
        ConstraintExpr::Cmp { lhs, op, rhs } => {
            let (a, b) = (value(lhs, s), value(rhs, s));
            match op {
                CmpOp::Eq => a == b,
                CmpOp::Ne => a != b,
                CmpOp::Lt => a < b,
                CmpOp::Gt => a > b,
                CmpOp::Le => a <= b,
                CmpOp::Ge => a >= b,
            }
        }
    }
}

/// Every assignment in the product of the domains that satisfies all
/// constraints.
pub fn brute_force(m: &CspModel) -> BTreeSet<Solution> {
    let mut out = BTreeSet::new();
    let mut current = Solution::new();
    fn go(m: &CspModel, i: usize, current: &mut Solution, out: &mut BTreeSet<Solution>) {
        if i == m.variables.len() {
            if m.constraints.iter().all(|c| holds(&c.expr, current)) {
                out.insert(current.clone());
            }
            return;
        }
        let v = &m.variables[i];
        for &x in &v.domain {
            current.insert(v.name.clone(), x);
            go(m, i + 1, current, out);
        }
        current.remove(&v.name);
    }
    go(m, 0, &mut current, &mut out);
    out
}

/// Option verdicts over the brute-force solutions; `None` when there are
/// none.
pub fn brute_options(m: &CspModel) -> Option<BTreeMap<char, TruthValue>> {
    let sols = brute_force(m);
    if sols.is_empty() {
        return None;
    }
    Some(
        m.options
            .iter()
            .map(|(&l, c)| {
                let n = sols.iter().filter(|s| holds(&c.expr, s)).count();
                let t = if n == sols.len() {
                    TruthValue::Proved
                } else if n == 0 {
                    TruthValue::Disproved
                } else {
                    TruthValue::Unknown
                };
                (l, t)
            })
            .collect(),
    )
}
