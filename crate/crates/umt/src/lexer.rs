//! Shared tokenizer for the three textual formats (metamodels, models,
//! transformation specs) and the expression language embedded in specs.
//!
//! `--` starts a line comment in every format. Strings are double-quoted
//! with no escape sequences. Integers are unsigned decimal literals.

use crate::error::{Pos, Result, UmtError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Dot,
    Comma,
    Colon,
    Semi,
    Pipe,
    Eq,      // =
    Ne,      // /=
    Subset,  // <:
    Union,   // \/
    Minus,   // -
    Amp,     // &
    Implies, // =>
    Arrow,   // ->
    AtPre,   // @pre
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Str(s) => write!(f, "\"{s}\""),
            Tok::LBrace => write!(f, "`{{`"),
            Tok::RBrace => write!(f, "`}}`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::LBracket => write!(f, "`[`"),
            Tok::RBracket => write!(f, "`]`"),
            Tok::Dot => write!(f, "`.`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Colon => write!(f, "`:`"),
            Tok::Semi => write!(f, "`;`"),
            Tok::Pipe => write!(f, "`|`"),
            Tok::Eq => write!(f, "`=`"),
            Tok::Ne => write!(f, "`/=`"),
            Tok::Subset => write!(f, "`<:`"),
            Tok::Union => write!(f, "`\\/`"),
            Tok::Minus => write!(f, "`-`"),
            Tok::Amp => write!(f, "`&`"),
            Tok::Implies => write!(f, "`=>`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::AtPre => write!(f, "`@pre`"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

pub fn lex(input: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let mut chars = input.chars().peekable();
    let mut line: u32 = 1;
    let mut col: u32 = 1;

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if let Some(ch) = c {
                if ch == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
            }
            c
        }};
    }

    loop {
        let pos = Pos { line, col };
        let c = match chars.peek() {
            Some(c) => *c,
            None => break,
        };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        let tok = match c {
            '{' => {
                bump!();
                Tok::LBrace
            }
            '}' => {
                bump!();
                Tok::RBrace
            }
            '(' => {
                bump!();
                Tok::LParen
            }
            ')' => {
                bump!();
                Tok::RParen
            }
            '[' => {
                bump!();
                Tok::LBracket
            }
            ']' => {
                bump!();
                Tok::RBracket
            }
            '.' => {
                bump!();
                Tok::Dot
            }
            ',' => {
                bump!();
                Tok::Comma
            }
            ':' => {
                bump!();
                Tok::Colon
            }
            ';' => {
                bump!();
                Tok::Semi
            }
            '|' => {
                bump!();
                Tok::Pipe
            }
            '&' => {
                bump!();
                Tok::Amp
            }
            '=' => {
                bump!();
                if chars.peek() == Some(&'>') {
                    bump!();
                    Tok::Implies
                } else {
                    Tok::Eq
                }
            }
            '/' => {
                bump!();
                if chars.peek() == Some(&'=') {
                    bump!();
                    Tok::Ne
                } else {
                    return Err(UmtError::syntax(pos, "expected `/=`"));
                }
            }
            '<' => {
                bump!();
                if chars.peek() == Some(&':') {
                    bump!();
                    Tok::Subset
                } else {
                    return Err(UmtError::syntax(pos, "expected `<:`"));
                }
            }
            '\\' => {
                bump!();
                if chars.peek() == Some(&'/') {
                    bump!();
                    Tok::Union
                } else {
                    return Err(UmtError::syntax(pos, "expected `\\/`"));
                }
            }
            '-' => {
                bump!();
                match chars.peek() {
                    Some('>') => {
                        bump!();
                        Tok::Arrow
                    }
                    Some('-') => {
                        // comment to end of line
                        while let Some(&ch) = chars.peek() {
                            if ch == '\n' {
                                break;
                            }
                            bump!();
                        }
                        continue;
                    }
                    _ => Tok::Minus,
                }
            }
            '@' => {
                bump!();
                let mut word = String::new();
                while let Some(&ch) = chars.peek() {
                    if ch.is_ascii_alphanumeric() || ch == '_' {
                        word.push(ch);
                        bump!();
                    } else {
                        break;
                    }
                }
                if word == "pre" {
                    Tok::AtPre
                } else {
                    return Err(UmtError::syntax(
                        pos,
                        format!("expected `@pre`, found `@{word}`"),
                    ));
                }
            }
            '"' => {
                bump!();
                let mut s = String::new();
                loop {
                    match chars.peek() {
                        Some('"') => {
                            bump!();
                            break;
                        }
                        Some('\n') | None => {
                            return Err(UmtError::syntax(pos, "unterminated string literal"));
                        }
                        Some(&ch) => {
                            s.push(ch);
                            bump!();
                        }
                    }
                }
                Tok::Str(s)
            }
            c if c.is_ascii_digit() => {
                let mut n: i64 = 0;
                while let Some(&ch) = chars.peek() {
                    if let Some(d) = ch.to_digit(10) {
                        n = n
                            .checked_mul(10)
                            .and_then(|n| n.checked_add(d as i64))
                            .ok_or_else(|| UmtError::syntax(pos, "integer literal too large"))?;
                        bump!();
                    } else {
                        break;
                    }
                }
                Tok::Int(n)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut word = String::new();
                while let Some(&ch) = chars.peek() {
                    if ch.is_ascii_alphanumeric() || ch == '_' {
                        word.push(ch);
                        bump!();
                    } else {
                        break;
                    }
                }
                Tok::Ident(word)
            }
            other => {
                return Err(UmtError::syntax(
                    pos,
                    format!("unexpected character `{other}`"),
                ));
            }
        };
        out.push(Token { tok, pos });
    }
    Ok(out)
}

/// Token cursor shared by the recursive-descent parsers.
pub struct Cursor {
    toks: Vec<Token>,
    idx: usize,
    end: Pos,
}

impl Cursor {
    pub fn new(toks: Vec<Token>) -> Self {
        let end = toks
            .last()
            .map(|t| t.pos)
            .unwrap_or(Pos { line: 1, col: 1 });
        Cursor { toks, idx: 0, end }
    }

    pub fn from_source(text: &str) -> Result<Self> {
        Ok(Cursor::new(lex(text)?))
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|t| &t.tok)
    }

    pub fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.idx + 1).map(|t| &t.tok)
    }

    pub fn pos(&self) -> Pos {
        self.toks.get(self.idx).map(|t| t.pos).unwrap_or(self.end)
    }

    pub fn at_end(&self) -> bool {
        self.idx >= self.toks.len()
    }

    pub fn advance(&mut self) -> Option<Token> {
        let t = self.toks.get(self.idx).cloned();
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.idx += 1;
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, tok: &Tok) -> Result<Pos> {
        let pos = self.pos();
        if self.eat(tok) {
            Ok(pos)
        } else {
            let found = self
                .peek()
                .map(|t| t.to_string())
                .unwrap_or_else(|| "end of input".to_string());
            Err(UmtError::syntax(
                pos,
                format!("expected {tok}, found {found}"),
            ))
        }
    }

    /// Consume an identifier with the exact given spelling (contextual keyword).
    pub fn eat_kw(&mut self, kw: &str) -> bool {
        if let Some(Tok::Ident(s)) = self.peek() {
            if s == kw {
                self.idx += 1;
                return true;
            }
        }
        false
    }

    pub fn peek_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    pub fn expect_kw(&mut self, kw: &str) -> Result<Pos> {
        let pos = self.pos();
        if self.eat_kw(kw) {
            Ok(pos)
        } else {
            let found = self
                .peek()
                .map(|t| t.to_string())
                .unwrap_or_else(|| "end of input".to_string());
            Err(UmtError::syntax(
                pos,
                format!("expected `{kw}`, found {found}"),
            ))
        }
    }

    pub fn expect_ident(&mut self) -> Result<(String, Pos)> {
        let pos = self.pos();
        match self.advance() {
            Some(Token {
                tok: Tok::Ident(s),
                pos,
            }) => Ok((s, pos)),
            Some(Token { tok, pos }) => Err(UmtError::syntax(
                pos,
                format!("expected identifier, found {tok}"),
            )),
            None => Err(UmtError::syntax(
                pos,
                "expected identifier, found end of input",
            )),
        }
    }
}
