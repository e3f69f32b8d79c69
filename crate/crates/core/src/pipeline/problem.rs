//! Problems and the line-oriented dataset format.
//!
//! A dataset file holds one JSON object per line:
//!
//! ```text
//! {"id": "pw-1", "task_kind": "deductive", "context": "...", "question": "...",
//!  "options": ["A) True", "B) False", "C) Unknown"], "gold": "A"}
//! ```
//!
//! Optional fields: `dataset` (used to group accuracy in reports),
//! `template` (overrides the default prompt template for the task kind) and
//! `formulation` (a reference symbolic formulation, served by the identity
//! provider).

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    /// Rule-based deduction, formulated as a logic program.
    Deductive,
    /// First-order logic facts and a query.
    Fol,
    /// Constraint satisfaction over finite integer domains.
    Csp,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Deductive => "deductive",
            TaskKind::Fol => "fol",
            TaskKind::Csp => "csp",
        }
    }

    pub fn default_template(self) -> &'static str {
        match self {
            TaskKind::Deductive => "proofwriter",
            TaskKind::Fol => "folio",
            TaskKind::Csp => "logical_deduction",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What an option text claims, for entailment-style tasks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OptionMeaning {
    True,
    False,
    Unknown,
}

/// Maps an option text onto a truth claim via a keyword table.
pub fn option_meaning(text: &str) -> Option<OptionMeaning> {
    let norm: String = text
        .chars()
        .filter(|c| c.is_alphanumeric() || c.is_whitespace())
        .collect::<String>()
        .to_lowercase();
    let norm = norm.split_whitespace().collect::<Vec<_>>().join(" ");
    match norm.as_str() {
        "true" | "yes" | "proved" | "correct" | "entailed" => Some(OptionMeaning::True),
        "false" | "no" | "disproved" | "incorrect" | "contradicted" => Some(OptionMeaning::False),
        "unknown" | "uncertain" | "undetermined" | "cannot be determined" | "neither" => Some(OptionMeaning::Unknown),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawProblem", into = "RawProblem")]
pub struct Problem {
    pub id: String,
    pub task_kind: TaskKind,
    pub context: String,
    pub question: String,
    /// Lettered options, consecutive from `A`.
    pub options: Vec<(char, String)>,
    pub gold: Option<char>,
    pub dataset: Option<String>,
    pub template: Option<String>,
    pub formulation: Option<String>,
}

impl Problem {
    pub fn letters(&self) -> impl Iterator<Item = char> + '_ {
        self.options.iter().map(|(l, _)| *l)
    }

    pub fn option_text(&self, letter: char) -> Option<&str> {
        self.options.iter().find(|(l, _)| *l == letter).map(|(_, t)| t.as_str())
    }

    pub fn template_name(&self) -> &str {
        self.template.as_deref().unwrap_or(self.task_kind.default_template())
    }

    /// The options as prompt lines, `A) True` and so on.
    pub fn options_block(&self) -> String {
        self.options
            .iter()
            .map(|(l, t)| format!("{l}) {t}"))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RawProblem {
    id: String,
    task_kind: TaskKind,
    context: String,
    question: String,
    options: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gold: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dataset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    template: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    formulation: Option<String>,
}

fn split_option(text: &str) -> Option<(char, &str)> {
    let mut chars = text.chars();
    let letter = chars.next()?;
    let rest = chars.as_str().strip_prefix(')')?;
    letter.is_ascii_uppercase().then(|| (letter, rest.trim()))
}

impl TryFrom<RawProblem> for Problem {
    type Error = String;

    fn try_from(raw: RawProblem) -> Result<Self, String> {
        if raw.options.len() < 2 {
            return Err(format!("problem '{}' needs at least two options", raw.id));
        }
        if raw.options.len() > 26 {
            return Err(format!("problem '{}' has more than 26 options", raw.id));
        }
        let mut options = Vec::new();
        for (i, text) in raw.options.iter().enumerate() {
            let expected = (b'A' + i as u8) as char;
            match split_option(text) {
                Some((letter, body)) if letter == expected => options.push((letter, body.to_string())),
                Some((letter, _)) => {
                    return Err(format!(
                        "problem '{}': option {} is lettered {letter}, expected {expected}",
                        raw.id,
                        i + 1
                    ))
                }
                None => options.push((expected, text.trim().to_string())),
            }
        }
        if raw.task_kind != TaskKind::Csp {
            if let Some((l, t)) = options.iter().find(|(_, t)| option_meaning(t).is_none()) {
                return Err(format!(
                    "problem '{}': option {l}) '{t}' is not one of true/false/unknown",
                    raw.id
                ));
            }
        }
        let gold = match raw.gold.as_deref().map(str::trim) {
            None | Some("") => None,
            Some(g) => {
                let letter = g.chars().next().filter(|c| g.len() == 1 && c.is_ascii_uppercase());
                match letter {
                    Some(l) if options.iter().any(|(o, _)| *o == l) => Some(l),
                    _ => {
                        return Err(format!(
                            "problem '{}': gold label '{g}' is not an option letter",
                            raw.id
                        ))
                    }
                }
            }
        };
        Ok(Problem {
            id: raw.id,
            task_kind: raw.task_kind,
            context: raw.context,
            question: raw.question,
            options,
            gold,
            dataset: raw.dataset,
            template: raw.template,
            formulation: raw.formulation,
        })
    }
}

impl From<Problem> for RawProblem {
    fn from(p: Problem) -> Self {
        RawProblem {
            options: p.options.iter().map(|(l, t)| format!("{l}) {t}")).collect(),
            id: p.id,
            task_kind: p.task_kind,
            context: p.context,
            question: p.question,
            gold: p.gold.map(String::from),
            dataset: p.dataset,
            template: p.template,
            formulation: p.formulation,
        }
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Format { path: String, line: usize, message: String },
}

/// Parses dataset text; `origin` names the source in error messages.
pub fn parse_dataset(text: &str, origin: &str) -> Result<Vec<Problem>, DatasetError> {
    let mut out: Vec<Problem> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fail = |message: String| DatasetError::Format {
            path: origin.to_string(),
            line: i + 1,
            message,
        };
        let p: Problem = serde_json::from_str(line).map_err(|e| fail(e.to_string()))?;
        if out.iter().any(|q| q.id == p.id) {
            return Err(fail(format!("duplicate problem id '{}'", p.id)));
        }
        out.push(p);
    }
    Ok(out)
}

pub fn load_dataset(path: &Path) -> Result<Vec<Problem>, DatasetError> {
    let text = std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_dataset(&text, &path.display().to_string())
}
