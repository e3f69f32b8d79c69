//! Splits formulation text into named sections (`Facts:`, `Query:`, ...).
//!
//! Headers are matched case-insensitively and may be decorated with markdown
//! (`## Facts:` or `**Facts**:`). Anything before the first header is
//! treated as preamble and skipped with a warning.

use crate::ir::SourceSpan;

use super::error::{ParseError, ParseErrorKind};

/// One non-blank content line.
#[derive(Clone, Debug)]
pub struct Line {
    /// 1-based line number in the original text.
    pub number: usize,
    pub chars: Vec<char>,
    /// 1-based column of `chars[0]` in the original line.
    pub first_column: usize,
}

impl Line {
    pub fn text(&self) -> String {
        self.chars.iter().collect()
    }

    /// Span covering the trimmed line content.
    pub fn span(&self) -> SourceSpan {
        SourceSpan::new(self.number, self.first_column, self.chars.len())
    }

    /// Splits off a `::: gloss` suffix (outside quotes). Returns the
    /// statement characters and the trimmed gloss, if any.
    pub fn split_gloss(&self) -> (&[char], Option<String>) {
        let mut quote: Option<char> = None;
        let c = &self.chars;
        let mut i = 0;
        while i < c.len() {
            match quote {
                Some(q) if c[i] == q => quote = None,
                Some(_) => {}
                None if c[i] == '\'' || c[i] == '"' => quote = Some(c[i]),
                None if c[i] == ':' && c.get(i + 1) == Some(&':') && c.get(i + 2) == Some(&':') => {
                    let gloss: String = c[i + 3..].iter().collect();
                    let gloss = gloss.trim().to_string();
                    return (&c[..i], Some(gloss));
                }
                None => {}
            }
            i += 1;
        }
        (c, None)
    }
}

#[derive(Clone, Debug)]
pub struct Section {
    pub name: &'static str,
    pub header_line: usize,
    pub lines: Vec<Line>,
}

#[derive(Debug, Default)]
pub struct Sections {
    pub sections: Vec<Section>,
    pub warnings: Vec<String>,
    pub errors: Vec<ParseError>,
}

impl Sections {
    pub fn get(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    /// Looks up a required section, recording `MissingSection` if absent.
    pub fn require(&self, name: &str, errors: &mut Vec<ParseError>) -> Option<&Section> {
        let s = self.get(name);
        if s.is_none() {
            errors.push(ParseError::new(
                ParseErrorKind::MissingSection,
                SourceSpan::new(1, 1, 0),
                format!("missing section '{name}:'"),
            ));
        }
        s
    }
}

/// Returns the matched header name and the column/character offset of any
/// content following the colon on the same line.
fn match_header(chars: &[char], vocabulary: &[&'static str]) -> Option<(&'static str, usize)> {
    let mut i = 0;
    let skip_ws = |i: &mut usize| {
        while *i < chars.len() && chars[*i].is_whitespace() {
            *i += 1;
        }
    };
    skip_ws(&mut i);
    while i < chars.len() && (chars[i] == '#' || chars[i] == '*') {
        i += 1;
    }
    skip_ws(&mut i);
    let start = i;
    while i < chars.len() && chars[i].is_alphabetic() {
        i += 1;
    }
    let word: String = chars[start..i].iter().collect();
    let name = vocabulary.iter().find(|v| v.eq_ignore_ascii_case(&word))?;
    while i < chars.len() && (chars[i] == '*' || chars[i].is_whitespace()) {
        i += 1;
    }
    if chars.get(i) != Some(&':') || chars.get(i + 1) == Some(&':') {
        return None;
    }
    i += 1;
    while i < chars.len() && chars[i] == '*' {
        i += 1;
    }
    Some((name, i))
}

fn trimmed_line(number: usize, chars: &[char], offset: usize) -> Option<Line> {
    let rest = &chars[offset..];
    let lead = rest.iter().take_while(|c| c.is_whitespace()).count();
    let trail = rest.iter().rev().take_while(|c| c.is_whitespace()).count();
    if lead == rest.len() {
        return None;
    }
    let content = rest[lead..rest.len() - trail].to_vec();
    if content.starts_with(&['`', '`', '`']) {
        return None;
    }
    Some(Line {
        number,
        chars: content,
        first_column: offset + lead + 1,
    })
}

pub fn split_sections(text: &str, vocabulary: &[&'static str]) -> Sections {
    let mut out = Sections::default();
    let mut preamble = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let number = idx + 1;
        let chars: Vec<char> = raw.chars().collect();
        if let Some((name, offset)) = match_header(&chars, vocabulary) {
            if out.get(name).is_some() {
                out.errors.push(ParseError::new(
                    ParseErrorKind::Syntax,
                    SourceSpan::new(number, 1, chars.len()),
                    format!("duplicate section '{name}:'"),
                ));
            }
            let mut section = Section {
                name,
                header_line: number,
                lines: Vec::new(),
            };
            if let Some(line) = trimmed_line(number, &chars, offset) {
                section.lines.push(line);
            }
            out.sections.push(section);
            continue;
        }
        let Some(line) = trimmed_line(number, &chars, 0) else {
            continue;
        };
        match out.sections.last_mut() {
            Some(section) => section.lines.push(line),
            None => preamble += 1,
        }
    }
    if preamble > 0 && !out.sections.is_empty() {
        out.warnings.push(format!(
            "ignored {preamble} line(s) of text before the first section header"
        ));
    }
    out
}
