//! ASCII B notation: lexer, precedence-climbing parser, canonical printer and
//! DEFINITIONS tables.

mod ast;
mod defs;
mod lexer;
mod parser;
mod render;

pub use ast::{BinOp, Builtin, Expr, Quantifier};
pub use defs::{parse_definition_line, parse_definitions, DefinitionTable};
pub use parser::parse_predicate;
pub use render::render;
pub(crate) use render::render_operand;

use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}, column {column}: unexpected '{found}', expected {expected}")]
    Syntax {
        line: usize,
        column: usize,
        found: String,
        expected: String,
    },
    #[error("line {line}, column {column}: unbalanced parentheses near '{found}'")]
    Unbalanced {
        line: usize,
        column: usize,
        found: String,
    },
    #[error("line {line}, column {column}: unknown operator '{found}'")]
    UnknownOperator {
        line: usize,
        column: usize,
        found: String,
    },
    #[error("line {line}, column {column}: {message}")]
    BadQuantifier {
        line: usize,
        column: usize,
        message: String,
    },
}

impl ParseError {
    pub fn line(&self) -> usize {
        match self {
            ParseError::Syntax { line, .. }
            | ParseError::Unbalanced { line, .. }
            | ParseError::UnknownOperator { line, .. }
            | ParseError::BadQuantifier { line, .. } => *line,
        }
    }

    pub fn column(&self) -> usize {
        match self {
            ParseError::Syntax { column, .. }
            | ParseError::Unbalanced { column, .. }
            | ParseError::UnknownOperator { column, .. }
            | ParseError::BadQuantifier { column, .. } => *column,
        }
    }

    /// Re-bases a single-line error onto `line` of an enclosing document.
    pub fn at_line(mut self, line_no: usize) -> Self {
        match &mut self {
            ParseError::Syntax { line, .. }
            | ParseError::Unbalanced { line, .. }
            | ParseError::UnknownOperator { line, .. }
            | ParseError::BadQuantifier { line, .. } => *line = line_no,
        }
        self
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum DefinitionError {
    #[error("definition '{name}' is declared twice")]
    Duplicate { name: String, line: Option<usize> },
    #[error("cyclic definition: {}", path.join(" -> "))]
    Cycle { path: Vec<String> },
    #[error(transparent)]
    Parse(#[from] ParseError),
}
