//! Pulse-sequence language.
//!
//! ```text
//! program := stmt*
//! stmt    := "init" IDENT
//!          | "repeat" INT "{" stmt* "}"
//!          | "delay" NUMBER "ms"
//!          | "pulse" ("S"|"E") ("x"|"y") SIGNED_INT
//!          | "measure" IDENT
//!          | "acquire"
//! ```
//!
//! `#` starts a comment that runs to the end of the line. Whitespace is
//! insignificant, so `delay 0.3ms` and `delay 0.3 ms` are the same. Pulse
//! angles are in degrees; a negative angle rotates about the negative axis.

mod compile;
mod lexer;
mod parser;
pub mod templates;

use std::fmt;

use thiserror::Error;

use crate::channels::{Axis, Spin};

pub use compile::{compile_sequence, execute, CompileError, ChannelProgram, Instruction};
pub use parser::{parse_sequence, parse_sequence_with};

/// Measurement names understood by default.
pub const MEASUREMENT_NAMES: [&str; 3] = ["Mplus", "Mminus", "Mideal"];
/// Names accepted by `init`.
pub const INIT_NAMES: [&str; 2] = ["plus", "zero"];

/// 1-based source position.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Lexical,
    Syntax,
    Semantic,
    /// A duration that is not a whole number of integration steps.
    Grid,
    /// A statement the configured mode cannot run.
    Unsupported,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ErrorKind::Lexical => "lexical error",
            ErrorKind::Syntax => "syntax error",
            ErrorKind::Semantic => "semantic error",
            ErrorKind::Grid => "grid misalignment",
            ErrorKind::Unsupported => "unsupported statement",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
#[error("{span}: {kind}: {message}")]
pub struct SeqError {
    pub kind: ErrorKind,
    pub span: Span,
    pub message: String,
}

impl SeqError {
    pub(crate) fn new(kind: ErrorKind, span: Span, message: impl Into<String>) -> Self {
        Self {
            kind,
            span,
            message: message.into(),
        }
    }
}

#[derive(Clone, Debug)]
pub enum StmtKind {
    Init(String),
    Repeat { count: u64, body: Vec<Stmt> },
    Delay { ms: f64 },
    Pulse { target: Spin, axis: Axis, degrees: i64 },
    Measure(String),
    Acquire,
}

impl PartialEq for StmtKind {
    fn eq(&self, other: &Self) -> bool {
        use StmtKind::*;
        match (self, other) {
            (Init(a), Init(b)) | (Measure(a), Measure(b)) => a == b,
            (Repeat { count: c1, body: b1 }, Repeat { count: c2, body: b2 }) => {
                c1 == c2 && b1 == b2
            }
            // bit equality, so 0.0 and -0.0 differ and printing must preserve both
            (Delay { ms: a }, Delay { ms: b }) => a.to_bits() == b.to_bits(),
            (
                Pulse {
                    target: t1,
                    axis: a1,
                    degrees: d1,
                },
                Pulse {
                    target: t2,
                    axis: a2,
                    degrees: d2,
                },
            ) => t1 == t2 && a1 == a2 && d1 == d2,
            (Acquire, Acquire) => true,
            _ => false,
        }
    }
}

/// A statement and where it starts. Equality ignores the span.
#[derive(Clone, Debug)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

impl PartialEq for Stmt {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Stmt {
    pub fn new(kind: StmtKind) -> Self {
        Self {
            kind,
            span: Span::default(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SequenceProgram {
    pub statements: Vec<Stmt>,
}

impl SequenceProgram {
    /// Spans of top-level `repeat` blocks that never `acquire`.
    pub fn silent_repeats(&self) -> Vec<Span> {
        fn acquires(stmts: &[Stmt]) -> bool {
            stmts.iter().any(|s| match &s.kind {
                StmtKind::Acquire => true,
                StmtKind::Repeat { body, .. } => acquires(body),
                _ => false,
            })
        }
        self.statements
            .iter()
            .filter(|s| matches!(&s.kind, StmtKind::Repeat { body, .. } if !acquires(body)))
            .map(|s| s.span)
            .collect()
    }
}

fn spin_str(s: Spin) -> &'static str {
    match s {
        Spin::S => "S",
        Spin::E => "E",
    }
}

fn axis_str(a: Axis) -> &'static str {
    match a {
        Axis::X => "x",
        Axis::Y => "y",
    }
}

fn write_block(f: &mut fmt::Formatter<'_>, stmts: &[Stmt], depth: usize) -> fmt::Result {
    for s in stmts {
        let pad = "  ".repeat(depth);
        match &s.kind {
            StmtKind::Init(name) => writeln!(f, "{pad}init {name}")?,
            StmtKind::Repeat { count, body } => {
                writeln!(f, "{pad}repeat {count} {{")?;
                write_block(f, body, depth + 1)?;
                writeln!(f, "{pad}}}")?;
            }
            // `{}` on f64 is the shortest string that parses back to the same value
            StmtKind::Delay { ms } => writeln!(f, "{pad}delay {ms}ms")?,
            StmtKind::Pulse {
                target,
                axis,
                degrees,
            } => writeln!(
                f,
                "{pad}pulse {} {} {degrees}",
                spin_str(*target),
                axis_str(*axis)
            )?,
            StmtKind::Measure(name) => writeln!(f, "{pad}measure {name}")?,
            StmtKind::Acquire => writeln!(f, "{pad}acquire")?,
        }
    }
    Ok(())
}

/// Canonical source form: one statement per line, two-space indentation.
impl fmt::Display for SequenceProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_block(f, &self.statements, 0)
    }
}
