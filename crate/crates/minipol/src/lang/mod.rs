//! The mini-lang front end: AST, parser, type checker, pretty-printer.
//!
//! Mini-lang is a small imperative language over `bool`, `int` (checked
//! 64-bit), `real` (binary64) and arrays thereof. Functions take values
//! and return one value; calls inside expressions target a fixed set of
//! pure built-ins (`len`, `floor`, `int`, `real`, `sort`). Source files
//! use the `.mini` extension.

pub mod ast;
pub mod check;
mod lexer;
mod parser;
pub mod pretty;

pub use ast::{
    BinaryOp, Block, Builtin, ElemType, ExprKind, Expression, Function, LValue, NodeId, Param,
    Program, SourceLoc, Statement, StmtKind, Type, UnaryOp, Value,
};
pub use check::{check_expression, type_check, FnSig, TypedProgram};
pub use parser::parse_program;
pub use pretty::{pretty_expr, pretty_program, pretty_stmt};

use thiserror::Error;

#[derive(Debug, Clone, Error)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub msg: String,
}

impl ParseError {
    pub(crate) fn syntax(line: u32, col: u32, msg: impl Into<String>) -> Self {
        ParseError {
            line,
            col,
            msg: msg.into(),
        }
    }
}

#[derive(Debug, Clone, Error)]
#[error("{file}:{line}:{col}: {msg}")]
pub struct TypeError {
    pub file: String,
    pub line: u32,
    pub col: u32,
    pub msg: String,
}

/// Convenience: parse then type-check in one step.
pub fn load_program(source: &str, file: &str) -> Result<TypedProgram, LoadError> {
    let program = parse_program(source, file)?;
    type_check(program).map_err(LoadError::Types)
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("{}", format_type_errors(.0))]
    Types(Vec<TypeError>),
}

fn format_type_errors(errors: &[TypeError]) -> String {
    errors
        .iter()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join("\n")
}
