//! OpenQASM 2.0 subset: parsing and flattening to `U`/`CX`.
//!
//! Supported: the `OPENQASM 2.0;` header, `include "qelib1.inc";` (resolved against the shipped
//! library or a caller-supplied replacement), `qreg`, `creg`, `gate` definitions with
//! parameters, `U`, `CX`, named gate calls with register broadcasting, `measure` (only at the
//! end of each qubit's history) and `barrier` (treated as a fence across every qubit).
//! `if`, `opaque`, `reset` and any other include are rejected by name.

mod ast;
mod flatten;
mod lexer;
mod parser;

use thiserror::Error;

pub use ast::{BinOp, BodyCall, Expr, GateDef, MathFn, Operand, Program, Register, Statement, StatementKind};
pub use flatten::flatten;

use crate::circuit::Circuit;

/// The gate library resolved by `include "qelib1.inc";`.
pub const STDLIB: &str = include_str!("../../stdlib/qelib1.inc");

/// File name that `include` accepts.
pub const STDLIB_NAME: &str = "qelib1.inc";

#[derive(Clone, Debug, Error, PartialEq)]
pub enum QasmError {
    #[error("line {line}, column {col}: syntax error: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("line {line}: unsupported construct '{construct}'")]
    Unsupported { line: usize, construct: String },
    #[error("line {line}: index {index} out of bounds for register '{register}' of size {size}")]
    IndexOutOfBounds {
        line: usize,
        register: String,
        index: u32,
        size: u32,
    },
    #[error("line {line}: undefined register '{name}'")]
    UndefinedRegister { line: usize, name: String },
    #[error("line {line}: undefined gate '{name}'")]
    UndefinedGate { line: usize, name: String },
    #[error("recursive gate definition: {}", cycle.join(" -> "))]
    RecursiveDefinition { cycle: Vec<String> },
    #[error("line {line}: '{name}' {message}")]
    Arity {
        line: usize,
        name: String,
        message: String,
    },
    #[error("line {line}: '{name}' is already defined")]
    Redefinition { line: usize, name: String },
    #[error("line {line}: {message}")]
    Semantic { line: usize, message: String },
    #[error("in included file '{file}': {inner}")]
    Include { file: String, inner: Box<QasmError> },
}

impl QasmError {
    pub(crate) fn syntax(line: usize, col: usize, message: impl Into<String>) -> Self {
        QasmError::Syntax {
            line,
            col,
            message: message.into(),
        }
    }

    pub(crate) fn semantic(line: usize, message: impl Into<String>) -> Self {
        QasmError::Semantic {
            line,
            message: message.into(),
        }
    }
}

/// Parses `text`, resolving `include "qelib1.inc";` to the shipped library.
pub fn parse(text: &str) -> Result<Program, QasmError> {
    parse_with_stdlib(text, STDLIB)
}

/// Parses `text`, resolving `include "qelib1.inc";` to `stdlib`.
pub fn parse_with_stdlib(text: &str, stdlib: &str) -> Result<Program, QasmError> {
    parser::parse_program(text, stdlib)
}

/// Parses and flattens in one step.
pub fn parse_circuit(text: &str) -> Result<Circuit, QasmError> {
    flatten(&parse(text)?)
}

/// Parses and flattens with a custom library.
pub fn parse_circuit_with_stdlib(text: &str, stdlib: &str) -> Result<Circuit, QasmError> {
    flatten(&parse_with_stdlib(text, stdlib)?)
}
