use num_bigint::BigInt;

use crate::diag::{DiagCode, Diagnostic, SourceSpan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(BigInt),
    /// Keywords and punctuation.
    Sym(&'static str),
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(x) => format!("identifier `{x}`"),
            Tok::Int(n) => format!("integer `{n}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub start: Pos,
    pub end: Pos,
}

impl Token {
    pub fn span(&self) -> SourceSpan {
        span(self.start, self.end)
    }
}

pub fn span(start: Pos, end: Pos) -> SourceSpan {
    SourceSpan {
        file: None,
        start_line: start.line,
        start_col: start.col,
        end_line: end.line,
        end_col: end.col,
    }
}

const KEYWORDS: &[&str] = &[
    "memory", "proc", "mains", "while", "if", "else", "atomic", "true", "false",
];

// Longest match first.
const PUNCT: &[&str] = &[
    ":=", "!=", "<=", "&&", "||", "{", "}", "(", ")", "[", "]", ";", ",", ":", "+", "-", "*",
    "=", "<", "!", "&",
];

struct Cursor<'a> {
    src: &'a str,
    at: usize,
    pos: Pos,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<char> {
        self.src[self.at..].chars().next()
    }

    fn rest(&self) -> &str {
        &self.src[self.at..]
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.at += c.len_utf8();
        if c == '\n' {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
        Some(c)
    }

    fn bump_n(&mut self, n: usize) {
        for _ in 0..n {
            self.bump();
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_' || c == '$'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '$' || c == '#'
}

/// Splits the source into tokens. Comments (`// ...` and `/* ... */`) are
/// skipped. Stops at the first lexical error.
pub fn tokenize(src: &str) -> Result<Vec<Token>, Box<Diagnostic>> {
    let mut cur = Cursor {
        src,
        at: 0,
        pos: Pos { line: 1, col: 1 },
    };
    let mut out = Vec::new();
    loop {
        while let Some(c) = cur.peek() {
            if c.is_whitespace() {
                cur.bump();
            } else if cur.rest().starts_with("//") {
                while cur.peek().is_some_and(|c| c != '\n') {
                    cur.bump();
                }
            } else if cur.rest().starts_with("/*") {
                let start = cur.pos;
                cur.bump_n(2);
                loop {
                    if cur.rest().starts_with("*/") {
                        cur.bump_n(2);
                        break;
                    }
                    if cur.bump().is_none() {
                        return Err(Box::new(
                            Diagnostic::error(DiagCode::Syntax, "unterminated comment")
                                .with_span(span(start, cur.pos)),
                        ));
                    }
                }
            } else {
                break;
            }
        }
        let start = cur.pos;
        let Some(c) = cur.peek() else {
            out.push(Token {
                tok: Tok::Eof,
                start,
                end: start,
            });
            return Ok(out);
        };
        let tok = if is_ident_start(c) {
            let from = cur.at;
            while cur.peek().is_some_and(is_ident_char) {
                cur.bump();
            }
            let word = &src[from..cur.at];
            match KEYWORDS.iter().find(|k| **k == word) {
                Some(k) => Tok::Sym(k),
                None => Tok::Ident(word.to_string()),
            }
        } else if c.is_ascii_digit() {
            let from = cur.at;
            while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
                cur.bump();
            }
            Tok::Int(src[from..cur.at].parse().expect("digits"))
        } else if let Some(p) = PUNCT.iter().find(|p| cur.rest().starts_with(**p)) {
            cur.bump_n(p.len());
            Tok::Sym(p)
        } else {
            cur.bump();
            return Err(Box::new(
                Diagnostic::error(DiagCode::Syntax, format!("unexpected character `{c}`"))
                    .with_span(span(start, cur.pos)),
            ));
        };
        out.push(Token {
            tok,
            start,
            end: cur.pos,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        tokenize(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn keywords_idents_and_symbols() {
        assert_eq!(
            toks("while x<=10 { $tmp#2 := &c; }"),
            vec![
                Tok::Sym("while"),
                Tok::Ident("x".into()),
                Tok::Sym("<="),
                Tok::Int(10.into()),
                Tok::Sym("{"),
                Tok::Ident("$tmp#2".into()),
                Tok::Sym(":="),
                Tok::Sym("&"),
                Tok::Ident("c".into()),
                Tok::Sym(";"),
                Tok::Sym("}"),
                Tok::Eof,
            ]
        );
    }

    #[test]
    fn comments_are_skipped() {
        assert_eq!(
            toks("/*1,2*/ x // tail\n /* a\n b */ y"),
            vec![Tok::Ident("x".into()), Tok::Ident("y".into()), Tok::Eof]
        );
    }

    #[test]
    fn positions_track_lines() {
        let t = tokenize("a\n  bc").unwrap();
        assert_eq!((t[1].start.line, t[1].start.col), (2, 3));
        assert_eq!((t[1].end.line, t[1].end.col), (2, 5));
    }

    #[test]
    fn errors_carry_spans() {
        let d = tokenize("x := 1 @").unwrap_err();
        assert_eq!(d.code, DiagCode::Syntax);
        assert_eq!(d.span.unwrap().start_col, 8);
        assert!(tokenize("/* open").is_err());
    }

    #[test]
    fn big_literals() {
        assert_eq!(
            toks("123456789012345678901234567890")[0],
            Tok::Int("123456789012345678901234567890".parse().unwrap())
        );
    }
}
