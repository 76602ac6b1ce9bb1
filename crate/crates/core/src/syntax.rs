//! Tokenizer shared by the MILL1, D and sequent parsers.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{line}:{col}: {msg}")]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl SyntaxError {
    pub fn new(line: usize, col: usize, msg: impl Into<String>) -> SyntaxError {
        SyntaxError {
            line,
            col,
            msg: msg.into(),
        }
    }

    /// Shifts the reported line, for text embedded in a larger file.
    pub fn at_line(mut self, line: usize) -> SyntaxError {
        self.line = line;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dir {
    Gt,
    Lt,
    Undirected,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    QVar(String),
    Int(u32),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Dot,
    Lolli,
    Star,
    Forall,
    Exists,
    Turnstile,
    Slash,
    Backslash,
    Wrap(Dir),
    Up(Dir),
    Down(Dir),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "'{}'", s),
            Tok::QVar(s) => write!(f, "'?{}'", s),
            Tok::Int(n) => write!(f, "'{}'", n),
            Tok::Eof => f.write_str("end of input"),
            other => write!(f, "{:?}", other),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub fn tokenize(text: &str) -> Result<Vec<Spanned>, SyntaxError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let dir_at = |j: usize| match chars.get(j) {
        Some('>') => Dir::Gt,
        Some('<') => Dir::Lt,
        _ => Dir::Undirected,
    };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let mut adv = 1;
        let tok = match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
                continue;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBrack,
            ']' => Tok::RBrack,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            '*' | '⊗' | '•' => Tok::Star,
            '⊸' => Tok::Lolli,
            '∀' => Tok::Forall,
            '∃' => Tok::Exists,
            '⊢' => Tok::Turnstile,
            '/' => Tok::Slash,
            '\\' => Tok::Backslash,
            '-' if chars.get(i + 1) == Some(&'o') => {
                adv = 2;
                Tok::Lolli
            }
            '|' if chars.get(i + 1) == Some(&'-') => {
                adv = 2;
                Tok::Turnstile
            }
            '^' | '↑' | '!' | '↓' | '⊙' => {
                let d = dir_at(i + 1);
                if d != Dir::Undirected {
                    adv = 2;
                }
                match c {
                    '^' | '↑' => Tok::Up(d),
                    '!' | '↓' => Tok::Down(d),
                    _ => Tok::Wrap(d),
                }
            }
            '?' => {
                let start = i + 1;
                let mut j = start;
                while j < chars.len() && is_ident_char(chars[j]) {
                    j += 1;
                }
                if j == start {
                    return Err(SyntaxError::new(l0, c0, "expected a variable name after '?'"));
                }
                adv = j - i;
                Tok::QVar(chars[start..j].iter().collect())
            }
            c if c.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                adv = j - i;
                let s: String = chars[i..j].iter().collect();
                Tok::Int(s.parse().map_err(|_| SyntaxError::new(l0, c0, "integer out of range"))?)
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && is_ident_char(chars[j]) {
                    j += 1;
                }
                let s: String = chars[i..j].iter().collect();
                if s == "o" && matches!(chars.get(j), Some('>') | Some('<')) {
                    adv = 2;
                    Tok::Wrap(dir_at(j))
                } else {
                    adv = j - i;
                    match s.as_str() {
                        "forall" => Tok::Forall,
                        "exists" => Tok::Exists,
                        _ => Tok::Ident(s),
                    }
                }
            }
            other => return Err(SyntaxError::new(l0, c0, format!("unexpected character '{}'", other))),
        };
        out.push(Spanned {
            tok,
            line: l0,
            col: c0,
        });
        i += adv;
        col += adv;
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

/// A cursor over a token vector.
pub struct Cursor {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Cursor {
    pub fn new(text: &str) -> Result<Cursor, SyntaxError> {
        Ok(Cursor {
            toks: tokenize(text)?,
            pos: 0,
        })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    pub fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.next();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, t: &Tok) -> Result<(), SyntaxError> {
        if self.eat(t) {
            Ok(())
        } else {
            Err(self.error(format!("expected {}, found {}", t, self.peek())))
        }
    }

    pub fn error(&self, msg: impl Into<String>) -> SyntaxError {
        let s = &self.toks[self.pos];
        SyntaxError::new(s.line, s.col, msg)
    }

    pub fn expect_eof(&self) -> Result<(), SyntaxError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.error(format!("unexpected {}", self.peek())))
        }
    }
}
