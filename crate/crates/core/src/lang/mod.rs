//! Concrete syntax, abstract syntax and static checks for programs,
//! assertions, litmus files and proof outlines.

mod ast;
mod lexer;
mod parser;
mod pretty;
mod wf;

pub use ast::*;
pub use parser::{parse_assertion_in, parse_cmd_in, parse_outline, parse_program};
pub use wf::{desugar_do_until, remove_aux, tids_of, unroll, well_formed, well_formed_pool, AuxError};

use std::fmt;

/// 1-based source position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default, serde::Serialize)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{pos}: {msg}")]
pub struct ParseError {
    pub pos: Pos,
    pub msg: String,
}

impl ParseError {
    pub fn new(pos: Pos, msg: impl Into<String>) -> ParseError {
        ParseError { pos, msg: msg.into() }
    }
}
