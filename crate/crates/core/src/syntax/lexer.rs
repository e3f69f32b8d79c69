//! Line-level tokenizer shared by the three formulation languages.
//!
//! Every statement occupies exactly one line, so tokens carry only a column;
//! the line number is attached when spans are built.

use std::fmt;

use crate::ir::SourceSpan;

use super::error::{ParseError, ParseErrorKind};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// `$name`, stored without the marker.
    Var(String),
    Int(i64),
    /// Quoted name; the quote character is not retained.
    Str(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    AndAnd,
    Arrow,
    Eq,
    Ne,
    Le,
    Ge,
    Lt,
    Gt,
    Plus,
    Minus,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "{s}"),
            Tok::Var(s) => write!(f, "${s}"),
            Tok::Int(i) => write!(f, "{i}"),
            Tok::Str(s) => write!(f, "'{s}'"),
            Tok::LParen => f.write_str("("),
            Tok::RParen => f.write_str(")"),
            Tok::LBracket => f.write_str("["),
            Tok::RBracket => f.write_str("]"),
            Tok::Comma => f.write_str(","),
            Tok::AndAnd => f.write_str("&&"),
            Tok::Arrow => f.write_str(">>>"),
            Tok::Eq => f.write_str("=="),
            Tok::Ne => f.write_str("!="),
            Tok::Le => f.write_str("<="),
            Tok::Ge => f.write_str(">="),
            Tok::Lt => f.write_str("<"),
            Tok::Gt => f.write_str(">"),
            Tok::Plus => f.write_str("+"),
            Tok::Minus => f.write_str("-"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    /// 1-based character column.
    pub column: usize,
    pub length: usize,
}

impl Token {
    pub fn span(&self, line: usize) -> SourceSpan {
        SourceSpan::new(line, self.column, self.length)
    }
}

pub fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

pub fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// True when `s` would lex back as a single identifier token.
pub fn is_plain_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if is_ident_start(c)) && chars.all(is_ident_char)
}

/// Tokenizes `chars`, whose first character sits at `first_column`.
pub fn tokenize(chars: &[char], line: usize, first_column: usize) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut i = 0;
    let col = |i: usize| first_column + i;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = if is_ident_start(c) {
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            match text.parse::<i64>() {
                Ok(v) => Tok::Int(v),
                Err(_) => {
                    return Err(ParseError::new(
                        ParseErrorKind::Syntax,
                        SourceSpan::new(line, col(start), i - start),
                        format!("integer literal '{text}' is out of range"),
                    ))
                }
            }
        } else if c == '$' {
            i += 1;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            if i == start + 1 {
                return Err(ParseError::new(
                    ParseErrorKind::Syntax,
                    SourceSpan::new(line, col(start), 1),
                    "expected a variable name after '$'",
                ));
            }
            Tok::Var(chars[start + 1..i].iter().collect())
        } else if c == '\'' || c == '"' {
            i += 1;
            while i < chars.len() && chars[i] != c {
                i += 1;
            }
            if i == chars.len() {
                return Err(ParseError::new(
                    ParseErrorKind::Syntax,
                    SourceSpan::new(line, col(start), i - start),
                    format!("unterminated quoted name starting with {c}"),
                ));
            }
            let inner: String = chars[start + 1..i].iter().collect();
            i += 1;
            if let Some(name) = inner.strip_prefix('$') {
                if is_plain_ident(name) {
                    Tok::Var(name.to_string())
                } else {
                    return Err(ParseError::new(
                        ParseErrorKind::Syntax,
                        SourceSpan::new(line, col(start), i - start),
                        format!("invalid variable name '{inner}'"),
                    ));
                }
            } else {
                Tok::Str(inner)
            }
        } else {
            let next = chars.get(i + 1).copied();
            let next2 = chars.get(i + 2).copied();
            let (tok, len) = match (c, next, next2) {
                ('>', Some('>'), Some('>')) => (Tok::Arrow, 3),
                ('&', Some('&'), _) => (Tok::AndAnd, 2),
                ('=', Some('='), _) => (Tok::Eq, 2),
                ('!', Some('='), _) => (Tok::Ne, 2),
                ('<', Some('='), _) => (Tok::Le, 2),
                ('>', Some('='), _) => (Tok::Ge, 2),
                ('<', _, _) => (Tok::Lt, 1),
                ('>', _, _) => (Tok::Gt, 1),
                ('(', _, _) => (Tok::LParen, 1),
                (')', _, _) => (Tok::RParen, 1),
                ('[', _, _) => (Tok::LBracket, 1),
                (']', _, _) => (Tok::RBracket, 1),
                (',', _, _) => (Tok::Comma, 1),
                ('+', _, _) => (Tok::Plus, 1),
                ('-', _, _) => (Tok::Minus, 1),
                _ => {
                    return Err(ParseError::new(
                        ParseErrorKind::Syntax,
                        SourceSpan::new(line, col(start), 1),
                        format!("unexpected character '{c}'"),
                    ))
                }
            };
            i += len;
            tok
        };
        out.push(Token {
            tok,
            column: col(start),
            length: i - start,
        });
    }
    Ok(out)
}

/// A cursor over one line's tokens with "expected X, found Y" reporting.
pub struct Cursor<'a> {
    tokens: &'a [Token],
    pos: usize,
    line: usize,
    /// Column just past the statement, used for end-of-line errors.
    end_column: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(tokens: &'a [Token], line: usize, end_column: usize) -> Self {
        Cursor {
            tokens,
            pos: 0,
            line,
            end_column,
        }
    }

    pub fn line(&self) -> usize {
        self.line
    }

    pub fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    pub fn peek_tok(&self) -> Option<&'a Tok> {
        self.peek().map(|t| &t.tok)
    }

    pub fn peek_nth(&self, n: usize) -> Option<&'a Tok> {
        self.tokens.get(self.pos + n).map(|t| &t.tok)
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    #[allow(clippy::should_implement_trait)]
    pub fn next(&mut self) -> Option<&'a Token> {
        let t = self.tokens.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek_tok() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn here(&self) -> SourceSpan {
        match self.peek() {
            Some(t) => t.span(self.line),
            None => SourceSpan::new(self.line, self.end_column, 0),
        }
    }

    pub fn error(&self, expected: &str) -> ParseError {
        let found = match self.peek() {
            Some(t) => format!("found '{}'", t.tok),
            None => "found end of line".to_string(),
        };
        ParseError::new(
            ParseErrorKind::Syntax,
            self.here(),
            format!("expected {expected}, {found}"),
        )
    }

    pub fn expect(&mut self, tok: &Tok, expected: &str) -> Result<&'a Token, ParseError> {
        if self.peek_tok() == Some(tok) {
            Ok(self.next().unwrap())
        } else {
            Err(self.error(expected))
        }
    }

    pub fn expect_end(&self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error("end of statement"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        let chars: Vec<char> = s.chars().collect();
        tokenize(&chars, 1, 1).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn lexes_rule_arrow_and_conjunction() {
        assert_eq!(
            toks("A($x) && B(c) >>> C(True)"),
            vec![
                Tok::Ident("A".into()),
                Tok::LParen,
                Tok::Var("x".into()),
                Tok::RParen,
                Tok::AndAnd,
                Tok::Ident("B".into()),
                Tok::LParen,
                Tok::Ident("c".into()),
                Tok::RParen,
                Tok::Arrow,
                Tok::Ident("C".into()),
                Tok::LParen,
                Tok::Ident("True".into()),
                Tok::RParen,
            ]
        );
    }

    #[test]
    fn quoted_dollar_names_are_variables() {
        assert_eq!(
            toks("'$x1' \"a b\""),
            vec![Tok::Var("x1".into()), Tok::Str("a b".into())]
        );
    }

    #[test]
    fn comparison_operators() {
        assert_eq!(
            toks("a >= b > c <= d < e == f != g"),
            vec![
                Tok::Ident("a".into()),
                Tok::Ge,
                Tok::Ident("b".into()),
                Tok::Gt,
                Tok::Ident("c".into()),
                Tok::Le,
                Tok::Ident("d".into()),
                Tok::Lt,
                Tok::Ident("e".into()),
                Tok::Eq,
                Tok::Ident("f".into()),
                Tok::Ne,
                Tok::Ident("g".into()),
            ]
        );
    }

    #[test]
    fn columns_are_character_based() {
        let chars: Vec<char> = "é  P".chars().collect();
        let t = tokenize(&chars, 3, 5).unwrap();
        assert_eq!(t[0].column, 5);
        assert_eq!(t[0].length, 1);
        assert_eq!(t[1].column, 8);
    }

    #[test]
    fn unterminated_quote_is_an_error() {
        let chars: Vec<char> = "Atom('P".chars().collect();
        let e = tokenize(&chars, 2, 1).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Syntax);
        assert_eq!(e.span.line, 2);
        assert_eq!(e.span.column, 6);
    }
}
