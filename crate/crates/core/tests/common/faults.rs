//! A corpus of broken formulations derived from the gold set by textual
//! mutations that a careless translator might plausibly make.

use logiclm::pipeline::run::{Attempt, Formulation, SolveLimits};
use logiclm::pipeline::{Problem, TaskKind, TemplateSet};

/// Index of the first line equal to `header`.
fn header_line(lines: &[String], header: &str) -> Option<usize> {
    lines.iter().position(|l| l.trim() == header)
}

/// A header the prompt does not already supply as its continuation.
fn inner_header(kind: TaskKind) -> &'static str {
    match kind {
        TaskKind::Deductive => "Rules:",
        TaskKind::Fol => "Query:",
        TaskKind::Csp => "Variables:",
    }
}

/// Removes the first `)` of the first line holding a parenthesis.
fn drop_paren(lines: &mut [String]) -> bool {
    for l in lines.iter_mut() {
        if let (Some(open), Some(close)) = (l.find('('), l.find(')')) {
            if close > open {
                l.remove(close);
                return true;
            }
        }
    }
    false
}

/// Misspells a predicate or variable name, or unbinds a quantified variable.
fn misname(kind: TaskKind, lines: &mut [String]) -> bool {
    let (section, from, to) = match kind {
        TaskKind::Deductive => ("Facts:", None, "Quite"),
        TaskKind::Fol => ("Facts:", Some("Forall($x, "), "Forall($w, "),
        TaskKind::Csp => ("Constraints:", None, "benn"),
    };
    let Some(start) = header_line(lines, section) else {
        return false;
    };
    for l in lines[start + 1..].iter_mut() {
        if l.trim().is_empty() {
            break;
        }
        match from {
            Some(f) if l.contains(f) => {
                *l = l.replacen(f, to, 1);
                return true;
            }
            Some(_) => {}
            None => {
                let end = l.find(|c: char| !(c.is_alphanumeric() || c == '_')).unwrap_or(l.len());
                if end > 0 {
                    l.replace_range(..end, to);
                    return true;
                }
            }
        }
    }
    false
}

fn drop_header(kind: TaskKind, lines: &mut Vec<String>) -> bool {
    match header_line(lines, inner_header(kind)) {
        Some(i) => {
            lines.remove(i);
            true
        }
        None => false,
    }
}

/// Adds statements that contradict each other.
fn contradict(kind: TaskKind, lines: &mut Vec<String>) -> bool {
    let (section, extra): (&str, Vec<String>) = match kind {
        TaskKind::Deductive => {
            let Some(q) = header_line(lines, "Query:").and_then(|i| lines.get(i + 1)) else {
                return false;
            };
            let stmt = q.split(":::").next().unwrap().trim().to_string();
            let flipped = if stmt.contains("True") {
                stmt.replace("True", "False")
            } else {
                stmt.replace("False", "True")
            };
            if flipped == stmt {
                return false;
            }
            ("Facts:", vec![stmt, flipped])
        }
        TaskKind::Fol => ("Facts:", vec!["Atom('Zz', 'q')".into(), "Not(Atom('Zz', 'q'))".into()]),
        TaskKind::Csp => {
            let Some(v) = header_line(lines, "Variables:").and_then(|i| lines.get(i + 1)) else {
                return false;
            };
            let name = v.split_whitespace().next().unwrap_or_default().to_string();
            ("Constraints:", vec![format!("{name} != {name}")])
        }
    };
    match header_line(lines, section) {
        Some(i) => {
            for (k, e) in extra.into_iter().enumerate() {
                lines.insert(i + 1 + k, e);
            }
            true
        }
        None => false,
    }
}

pub const OPERATORS: [&str; 5] = ["drop_paren", "misname", "drop_header", "contradict", "empty"];

/// Applies the named mutation; `None` when it does not apply to this text.
pub fn mutate(kind: TaskKind, text: &str, op: &str) -> Option<String> {
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let applied = match op {
        "drop_paren" => drop_paren(&mut lines),
        "misname" => misname(kind, &mut lines),
        "drop_header" => drop_header(kind, &mut lines),
        "contradict" => contradict(kind, &mut lines),
        "empty" => {
            lines.clear();
            true
        }
        _ => unreachable!("unknown operator {op}"),
    };
    applied.then(|| {
        let mut s = lines.join("\n");
        s.push('\n');
        s
    })
}

/// Whether the pipeline would accept `text` as the first response for `p`.
pub fn is_valid(p: &Problem, text: &str) -> bool {
    let templates = TemplateSet::shipped();
    let continuation = templates.get(p.template_name()).unwrap().continuation();
    let f = Formulation::new(p.task_kind, 0, String::new(), text.to_string(), continuation);
    Attempt::execute(f, &SolveLimits::default()).is_valid()
}

pub struct Fault {
    pub problem: Problem,
    pub operator: &'static str,
    pub broken: String,
    pub fixed: String,
}

/// `n` broken variants of the gold problems, cycling through problems and
/// operators. Every variant is checked to be invalid.
pub fn fault_corpus(gold: &[Problem], n: usize) -> Vec<Fault> {
    let mut out = Vec::new();
    let mut k = 0;
    while out.len() < n {
        let p = &gold[k % gold.len()];
        let operator = OPERATORS[(k / gold.len() + k) % OPERATORS.len()];
        k += 1;
        assert!(k < 100 * n, "cannot build {n} faults");
        let fixed = p.formulation.clone().expect("gold problems carry formulations");
        let Some(broken) = mutate(p.task_kind, &fixed, operator) else {
            continue;
        };
        if is_valid(p, &broken) {
            continue;
        }
        let mut problem = p.clone();
        problem.id = format!("fault-{:02}-{}", out.len(), p.id);
        out.push(Fault {
            problem,
            operator,
            broken,
            fixed,
        });
    }
    out
}
