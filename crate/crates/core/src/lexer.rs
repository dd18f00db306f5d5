//! Lexer for `.gt` programs and `.sched` schedule files.
//!
//! Both languages share one token set. Comments run from `%` or `//` to end
//! of line. `#name#` produces a label token; a `#` not closed on the same
//! line is an error.

use crate::token::{Pos, Token, TokenKind};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LexError {
    #[error("illegal character `{ch}` at {pos}")]
    IllegalCharacter { ch: char, pos: Pos },
    #[error("unterminated label at {pos}")]
    UnterminatedLabel { pos: Pos },
    #[error("unterminated string at {pos}")]
    UnterminatedString { pos: Pos },
    #[error("malformed number `{text}` at {pos}")]
    MalformedNumber { text: String, pos: Pos },
}

struct Lexer<'a> {
    src: &'a [u8],
    at: usize,
    line: u32,
    col: u32,
}

/// Reduction operators that lex as a single token when immediately
/// followed by `=` (e.g. `min=`).
const REDUCE_WORDS: &[(&str, fn() -> TokenKind)] = &[
    ("min", || TokenKind::MinEq),
    ("max", || TokenKind::MaxEq),
    ("asyncMin", || TokenKind::AsyncMinEq),
    ("asyncMax", || TokenKind::AsyncMaxEq),
];

pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    let mut lx = Lexer { src: source.as_bytes(), at: 0, line: 1, col: 1 };
    let mut out = Vec::new();
    loop {
        lx.skip_trivia();
        let pos = lx.pos();
        let Some(c) = lx.peek() else {
            out.push(Token { kind: TokenKind::Eof, pos });
            return Ok(out);
        };
        let kind = match c {
            b'#' => lx.label()?,
            b'"' => lx.string()?,
            b'0'..=b'9' => lx.number()?,
            c if c.is_ascii_alphabetic() || c == b'_' => lx.word(),
            _ => lx.punct()?,
        };
        out.push(Token { kind, pos });
    }
}

impl<'a> Lexer<'a> {
    fn pos(&self) -> Pos {
        Pos { line: self.line, col: self.col }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.at).copied()
    }

    fn peek2(&self) -> Option<u8> {
        self.src.get(self.at + 1).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.at += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b'%') => self.skip_line(),
                Some(b'/') if self.peek2() == Some(b'/') => self.skip_line(),
                _ => return,
            }
        }
    }

    fn skip_line(&mut self) {
        while let Some(c) = self.peek() {
            if c == b'\n' {
                return;
            }
            self.bump();
        }
    }

    fn label(&mut self) -> Result<TokenKind, LexError> {
        let pos = self.pos();
        self.bump(); // '#'
        let mut name = String::new();
        loop {
            match self.peek() {
                Some(b'#') => {
                    self.bump();
                    return Ok(TokenKind::Label(name));
                }
                Some(c) if c != b'\n' => {
                    name.push(c as char);
                    self.bump();
                }
                _ => return Err(LexError::UnterminatedLabel { pos }),
            }
        }
    }

    fn string(&mut self) -> Result<TokenKind, LexError> {
        let pos = self.pos();
        self.bump(); // '"'
        let mut s = String::new();
        loop {
            match self.bump() {
                Some(b'"') => return Ok(TokenKind::StringLit(s)),
                Some(b'\n') | None => return Err(LexError::UnterminatedString { pos }),
                Some(c) => s.push(c as char),
            }
        }
    }

    fn number(&mut self) -> Result<TokenKind, LexError> {
        let pos = self.pos();
        let start = self.at;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.bump();
        }
        let mut is_float = false;
        // A dot only continues the number when followed by a digit, so
        // `1:maxIters` and method calls on literals stay unambiguous.
        if self.peek() == Some(b'.') && matches!(self.peek2(), Some(b'0'..=b'9')) {
            is_float = true;
            self.bump();
            while matches!(self.peek(), Some(b'0'..=b'9')) {
                self.bump();
            }
        }
        if matches!(self.peek(), Some(b'e') | Some(b'E')) {
            let save = (self.at, self.line, self.col);
            self.bump();
            if matches!(self.peek(), Some(b'+') | Some(b'-')) {
                self.bump();
            }
            if matches!(self.peek(), Some(b'0'..=b'9')) {
                is_float = true;
                while matches!(self.peek(), Some(b'0'..=b'9')) {
                    self.bump();
                }
            } else {
                (self.at, self.line, self.col) = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.at]).unwrap();
        if is_float {
            text.parse::<f64>()
                .map(TokenKind::FloatLit)
                .map_err(|_| LexError::MalformedNumber { text: text.to_string(), pos })
        } else {
            text.parse::<i64>()
                .map(TokenKind::IntLit)
                .map_err(|_| LexError::MalformedNumber { text: text.to_string(), pos })
        }
    }

    fn word(&mut self) -> TokenKind {
        let start = self.at;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            self.bump();
        }
        let text = std::str::from_utf8(&self.src[start..self.at]).unwrap();
        for (word, make) in REDUCE_WORDS {
            if text == *word && self.peek() == Some(b'=') && self.peek2() != Some(b'=') {
                self.bump();
                return make();
            }
        }
        match text {
            "and" => TokenKind::AndAnd,
            "or" => TokenKind::OrOr,
            "not" => TokenKind::Not,
            _ => TokenKind::Ident(text.to_string()),
        }
    }

    fn punct(&mut self) -> Result<TokenKind, LexError> {
        let pos = self.pos();
        let c = self.bump().unwrap();
        let two = |lx: &mut Self, kind| {
            lx.bump();
            kind
        };
        Ok(match (c, self.peek()) {
            (b'+', Some(b'=')) => two(self, TokenKind::PlusEq),
            (b'+', _) => TokenKind::Plus,
            (b'-', Some(b'>')) => two(self, TokenKind::Arrow),
            (b'-', _) => TokenKind::Minus,
            (b'*', _) => TokenKind::Star,
            (b'/', _) => TokenKind::Slash,
            (b'=', Some(b'=')) => two(self, TokenKind::EqEq),
            (b'=', _) => TokenKind::Assign,
            (b'!', Some(b'=')) => two(self, TokenKind::NotEq),
            (b'!', _) => TokenKind::Not,
            (b'<', Some(b'=')) => two(self, TokenKind::Le),
            (b'<', _) => TokenKind::Lt,
            (b'>', Some(b'=')) => two(self, TokenKind::Ge),
            (b'>', _) => TokenKind::Gt,
            (b'&', Some(b'&')) => two(self, TokenKind::AndAnd),
            (b'|', Some(b'|')) => two(self, TokenKind::OrOr),
            (b'.', _) => TokenKind::Dot,
            (b',', _) => TokenKind::Comma,
            (b';', _) => TokenKind::Semicolon,
            (b':', _) => TokenKind::Colon,
            (b'(', _) => TokenKind::LParen,
            (b')', _) => TokenKind::RParen,
            (b'{', _) => TokenKind::LBrace,
            (b'}', _) => TokenKind::RBrace,
            (b'[', _) => TokenKind::LBracket,
            (b']', _) => TokenKind::RBracket,
            (b'%', _) => TokenKind::Percent,
            _ => return Err(LexError::IllegalCharacter { ch: c as char, pos }),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn labeled_chain_start() {
        let ks = kinds("#s1# edges.from(frontier)");
        assert_eq!(
            &ks[..5],
            &[
                TokenKind::Label("s1".into()),
                TokenKind::Ident("edges".into()),
                TokenKind::Dot,
                TokenKind::Ident("from".into()),
                TokenKind::LParen,
            ]
        );
    }

    #[test]
    fn empty_input_is_just_eof() {
        assert_eq!(kinds(""), vec![TokenKind::Eof]);
    }

    #[test]
    fn min_eq_is_one_token() {
        assert_eq!(
            kinds("min="),
            vec![TokenKind::MinEq, TokenKind::Eof]
        );
        assert_eq!(
            kinds("SP[dst] min= (SP[src] + weight);")
                .iter()
                .filter(|k| **k == TokenKind::MinEq)
                .count(),
            1
        );
        // `min == x` must not fuse
        assert_eq!(
            kinds("min == 1")[..2],
            [TokenKind::Ident("min".into()), TokenKind::EqEq]
        );
    }

    #[test]
    fn async_min_eq() {
        assert_eq!(kinds("asyncMin=")[0], TokenKind::AsyncMinEq);
    }

    #[test]
    fn positions_track_lines() {
        let toks = tokenize("a\n  b").unwrap();
        assert_eq!(toks[0].pos, Pos { line: 1, col: 1 });
        assert_eq!(toks[1].pos, Pos { line: 2, col: 3 });
    }

    #[test]
    fn comments_are_stripped() {
        assert_eq!(kinds("a % comment\nb // also\nc"), kinds("a\nb\nc"));
    }

    #[test]
    fn illegal_character_reports_position() {
        let err = tokenize("a @").unwrap_err();
        assert_eq!(
            err,
            LexError::IllegalCharacter { ch: '@', pos: Pos { line: 1, col: 3 } }
        );
    }

    #[test]
    fn range_does_not_eat_dot() {
        // `1:10` keeps the colon; `1.0` is a float
        assert_eq!(
            kinds("1:10"),
            vec![TokenKind::IntLit(1), TokenKind::Colon, TokenKind::IntLit(10), TokenKind::Eof]
        );
        assert_eq!(kinds("1.0")[0], TokenKind::FloatLit(1.0));
    }
}
