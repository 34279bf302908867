use super::{ParseError, Pos};
use crate::name::Val;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(Val),
    Kw(&'static str),
    Sym(&'static str),
    Eof,
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(v) => write!(f, "`{v}`"),
            Tok::Kw(k) | Tok::Sym(k) => write!(f, "`{k}`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

pub const KEYWORDS: &[&str] = &[
    "thread", "load", "swap", "skip", "if", "then", "else", "fi", "while", "do", "od", "until",
    "true", "false", "init", "locations", "registers", "allow", "forbid", "name", "outline",
    "aux", "parent", "pre", "post", "rely", "guarantee", "cutoff",
];

// Longest symbols first so that `:=` wins over `:` and so on.
const SYMBOLS: &[&str] = &[
    ":=", "||", "&&", "|=", "|>", "<|", "=>", "!=", "<=", ">=", ";", ",", ":", "{", "}", "(",
    ")", "[", "]", "!", "=", "<", ">", "+", "-", "*",
];

pub fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut out = Vec::new();
    let bytes = src.as_bytes();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && bytes.get(i + 1) == Some(&b'/') || c == '#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let pos = Pos { line, col };
        if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let text = &src[start..i];
            let v = text.parse::<Val>().map_err(|_| ParseError::new(pos, format!("integer literal `{text}` out of range")))?;
            col += i - start;
            out.push((Tok::Int(v), pos));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'') {
                i += 1;
            }
            let text = &src[start..i];
            col += i - start;
            match KEYWORDS.iter().find(|k| **k == text) {
                Some(k) => out.push((Tok::Kw(k), pos)),
                None => out.push((Tok::Ident(text.to_owned()), pos)),
            }
            continue;
        }
        match SYMBOLS.iter().find(|s| src[i..].starts_with(**s)) {
            Some(s) => {
                i += s.len();
                col += s.len();
                out.push((Tok::Sym(s), pos));
            }
            None => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(ParseError::new(pos, format!("unexpected character `{ch}`")));
            }
        }
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}
