//! Prompt templates.
//!
//! A template file is plain text split into blocks by marker lines:
//!
//! ```text
//! === TASK ===
//! Task Description: ...
//! === EXAMPLE ===
//! Context: ...
//! === EXAMPLE ===
//! ...
//! === TARGET ===
//! Context: [[CONTEXT]]
//!
//! Question: [[QUESTION]]
//!
//! Predicates:
//! ```
//!
//! Rendering keeps the task block, the first `n` examples and the target,
//! joined by `------` separator lines. Placeholders of the form `[[NAME]]`
//! are filled in the target only.

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use super::problem::Problem;

pub const SEPARATOR: &str = "------";

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum TemplateError {
    #[error("no template named '{0}'")]
    MissingTemplate(String),
    #[error("template '{name}': {message}")]
    Malformed { name: String, message: String },
    #[error("template '{name}' needs a value for [[{placeholder}]]")]
    MissingValue { name: String, placeholder: String },
    #[error("cannot read template {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Template {
    pub name: String,
    pub task: String,
    pub examples: Vec<String>,
    pub target: String,
}

fn placeholders(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(start) = rest.find("[[") {
        let after = &rest[start + 2..];
        match after.find("]]") {
            Some(end) => {
                let name = &after[..end];
                if !name.is_empty()
                    && name.chars().all(|c| c.is_ascii_uppercase() || c == '_')
                    && !out.iter().any(|n| n == name)
                {
                    out.push(name.to_string());
                }
                rest = &after[end + 2..];
            }
            None => break,
        }
    }
    out
}

impl Template {
    pub fn parse(name: &str, text: &str) -> Result<Template, TemplateError> {
        let malformed = |message: &str| TemplateError::Malformed {
            name: name.to_string(),
            message: message.to_string(),
        };
        let mut task = None;
        let mut examples = Vec::new();
        let mut target = None;
        let mut current: Option<(&str, Vec<&str>)> = None;
        let mut flush = |block: Option<(&str, Vec<&str>)>| -> Result<(), TemplateError> {
            if let Some((kind, lines)) = block {
                let body = lines.join("\n").trim_matches('\n').trim_end().to_string();
                match kind {
                    "TASK" if task.is_none() => task = Some(body),
                    "EXAMPLE" => examples.push(body),
                    "TARGET" if target.is_none() => target = Some(body),
                    _ => return Err(malformed(&format!("duplicate {kind} block"))),
                }
            }
            Ok(())
        };
        for line in text.lines() {
            let marker = line
                .trim()
                .strip_prefix("===")
                .and_then(|m| m.strip_suffix("==="))
                .map(str::trim);
            match marker {
                Some(kind @ ("TASK" | "EXAMPLE" | "TARGET")) => {
                    flush(current.take())?;
                    current = Some((kind, Vec::new()));
                }
                Some(other) => return Err(malformed(&format!("unknown block marker '{other}'"))),
                None => match &mut current {
                    Some((_, lines)) => lines.push(line),
                    None if line.trim().is_empty() => {}
                    None => return Err(malformed("text before the first block marker")),
                },
            }
        }
        flush(current.take())?;
        let task = task.ok_or_else(|| malformed("missing TASK block"))?;
        let target = target.ok_or_else(|| malformed("missing TARGET block"))?;
        if target.is_empty() {
            return Err(malformed("empty TARGET block"));
        }
        Ok(Template {
            name: name.to_string(),
            task,
            examples,
            target,
        })
    }

    /// Placeholder names used by the target block.
    pub fn placeholders(&self) -> Vec<String> {
        placeholders(&self.target)
    }

    /// The trailing section header the target ends on, if any. A completion
    /// model continues right after it, so its output may lack the header.
    pub fn continuation(&self) -> Option<&str> {
        let last = self.target.lines().last()?.trim();
        (last.ends_with(':') && !last.contains("[[") && last.len() > 1).then_some(last)
    }

    pub fn render(&self, num_examples: usize, values: &BTreeMap<&str, String>) -> Result<String, TemplateError> {
        for p in self.placeholders() {
            if !values.contains_key(p.as_str()) {
                return Err(TemplateError::MissingValue {
                    name: self.name.clone(),
                    placeholder: p,
                });
            }
        }
        // Single pass, so inserted text is never scanned for placeholders.
        let mut target = String::with_capacity(self.target.len());
        let mut rest = self.target.as_str();
        while let Some(start) = rest.find("[[") {
            target.push_str(&rest[..start]);
            let after = &rest[start + 2..];
            match after
                .find("]]")
                .and_then(|end| values.get(&after[..end]).map(|v| (end, v)))
            {
                Some((end, v)) => {
                    target.push_str(v.trim_end());
                    rest = &after[end + 2..];
                }
                None => {
                    target.push_str("[[");
                    rest = after;
                }
            }
        }
        target.push_str(rest);
        let mut blocks: Vec<&str> = Vec::new();
        if !self.task.is_empty() {
            blocks.push(&self.task);
        }
        blocks.extend(self.examples.iter().take(num_examples).map(String::as_str));
        blocks.push(&target);
        let mut out = blocks.join(&format!("\n{SEPARATOR}\n"));
        out.push('\n');
        Ok(out)
    }
}

macro_rules! shipped {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../../templates/", $name, ".txt")))),*]
    };
}

const SHIPPED: &[(&str, &str)] = shipped![
    "prontoqa",
    "proofwriter",
    "folio",
    "logical_deduction",
    "refine_deductive",
    "refine_fol",
    "refine_csp",
];

/// Named templates. [`TemplateSet::shipped`] holds the built-in set; a
/// directory of `<name>.txt` files can add to or replace them.
#[derive(Clone, Debug, Default)]
pub struct TemplateSet {
    templates: BTreeMap<String, Template>,
}

impl TemplateSet {
    pub fn shipped() -> TemplateSet {
        let mut set = TemplateSet::default();
        for (name, text) in SHIPPED {
            let t = Template::parse(name, text).expect("shipped templates are well formed");
            set.templates.insert(name.to_string(), t);
        }
        set
    }

    pub fn insert(&mut self, t: Template) {
        self.templates.insert(t.name.clone(), t);
    }

    pub fn load_dir(&mut self, dir: &Path) -> Result<usize, TemplateError> {
        let io = |e: std::io::Error| TemplateError::Io {
            path: dir.display().to_string(),
            message: e.to_string(),
        };
        let mut paths: Vec<_> = std::fs::read_dir(dir)
            .map_err(io)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "txt"))
            .collect();
        paths.sort();
        for path in &paths {
            let name = path.file_stem().unwrap_or_default().to_string_lossy().to_string();
            let text = std::fs::read_to_string(path).map_err(io)?;
            self.insert(Template::parse(&name, &text)?);
        }
        Ok(paths.len())
    }

    pub fn get(&self, name: &str) -> Result<&Template, TemplateError> {
        self.templates
            .get(name)
            .ok_or_else(|| TemplateError::MissingTemplate(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.templates.keys().map(String::as_str)
    }
}

/// Fills the problem's template with its context, question and options.
pub fn build_prompt(p: &Problem, templates: &TemplateSet, num_examples: usize) -> Result<String, TemplateError> {
    let t = templates.get(p.template_name())?;
    let values = BTreeMap::from([
        ("CONTEXT", p.context.clone()),
        ("QUESTION", p.question.clone()),
        ("OPTIONS", p.options_block()),
    ]);
    t.render(num_examples, &values)
}

pub fn refine_template_name(p: &Problem) -> String {
    format!("refine_{}", p.task_kind.name())
}

/// The repair prompt: the failed formulation, the error report and the
/// correction demonstrations.
pub fn build_refine_prompt(
    p: &Problem,
    templates: &TemplateSet,
    num_examples: usize,
    program: &str,
    error: &str,
) -> Result<String, TemplateError> {
    let t = templates.get(&refine_template_name(p))?;
    let values = BTreeMap::from([
        ("CONTEXT", p.context.clone()),
        ("QUESTION", p.question.clone()),
        ("OPTIONS", p.options_block()),
        ("PROGRAM", program.trim().to_string()),
        ("ERROR", error.trim().to_string()),
    ]);
    t.render(num_examples, &values)
}
