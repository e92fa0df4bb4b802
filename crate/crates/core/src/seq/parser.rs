use crate::channels::{Axis, Spin};

use super::lexer::{lex, Tok, Token};
use super::{ErrorKind, SeqError, SequenceProgram, Span, Stmt, StmtKind, INIT_NAMES, MEASUREMENT_NAMES};

/// Parses with the default measurement names `Mplus`, `Mminus`, `Mideal`.
pub fn parse_sequence(text: &str) -> Result<SequenceProgram, SeqError> {
    parse_sequence_with(text, &MEASUREMENT_NAMES)
}

/// Parses and checks that every `measure` uses one of `measurements`.
pub fn parse_sequence_with(text: &str, measurements: &[&str]) -> Result<SequenceProgram, SeqError> {
    let tokens = lex(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        measurements,
        end: end_span(text),
    };
    let statements = p.block(None)?;
    Ok(SequenceProgram { statements })
}

fn end_span(text: &str) -> Span {
    let line = text.lines().count().max(1);
    let col = text.lines().last().map_or(0, |l| l.chars().count()) + 1;
    Span { line, col }
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    measurements: &'a [&'a str],
    end: Span,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self, what: &str) -> Result<Token, SeqError> {
        match self.tokens.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t.clone())
            }
            None => Err(SeqError::new(
                ErrorKind::Syntax,
                self.end,
                format!("unexpected end of input, expected {what}"),
            )),
        }
    }

    /// Statements up to a closing brace (when `open` is set) or end of input.
    fn block(&mut self, open: Option<Span>) -> Result<Vec<Stmt>, SeqError> {
        let mut out = Vec::new();
        loop {
            match self.peek() {
                None => {
                    return match open {
                        Some(span) => Err(SeqError::new(
                            ErrorKind::Syntax,
                            self.end,
                            format!("unclosed '{{' opened at {span}"),
                        )),
                        None => Ok(out),
                    };
                }
                Some(Token { tok: Tok::RBrace, span }) => {
                    let span = *span;
                    if open.is_none() {
                        return Err(SeqError::new(ErrorKind::Syntax, span, "unmatched '}'"));
                    }
                    self.pos += 1;
                    return Ok(out);
                }
                Some(_) => out.push(self.stmt()?),
            }
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Span), SeqError> {
        let t = self.next(what)?;
        match t.tok {
            Tok::Ident(s) => Ok((s, t.span)),
            other => Err(unexpected(&other, t.span, what)),
        }
    }

    fn number(&mut self, what: &str) -> Result<(String, Span), SeqError> {
        let t = self.next(what)?;
        match t.tok {
            Tok::Number(s) => Ok((s, t.span)),
            other => Err(unexpected(&other, t.span, what)),
        }
    }

    fn stmt(&mut self) -> Result<Stmt, SeqError> {
        let (word, span) = self.ident("a statement")?;
        let kind = match word.as_str() {
            "init" => {
                let (name, at) = self.ident("an initial-state name")?;
                if !INIT_NAMES.contains(&name.as_str()) {
                    return Err(SeqError::new(
                        ErrorKind::Semantic,
                        at,
                        format!("unknown initial state '{name}' (known: {})", INIT_NAMES.join(", ")),
                    ));
                }
                StmtKind::Init(name)
            }
            "repeat" => {
                let (text, at) = self.number("a repeat count")?;
                let count = parse_int(&text, at, "repeat count")?;
                if count < 1 {
                    return Err(SeqError::new(
                        ErrorKind::Semantic,
                        at,
                        format!("repeat count must be at least 1, got {count}"),
                    ));
                }
                let t = self.next("'{'")?;
                if t.tok != Tok::LBrace {
                    return Err(unexpected(&t.tok, t.span, "'{'"));
                }
                let body = self.block(Some(t.span))?;
                StmtKind::Repeat {
                    count: count as u64,
                    body,
                }
            }
            "delay" => {
                let (text, at) = self.number("a duration")?;
                let ms: f64 = text.parse().map_err(|_| {
                    SeqError::new(ErrorKind::Syntax, at, format!("bad duration '{text}'"))
                })?;
                let (unit, uat) = self.ident("the unit 'ms'")?;
                if unit != "ms" {
                    return Err(SeqError::new(
                        ErrorKind::Syntax,
                        uat,
                        format!("expected unit 'ms', found '{unit}'"),
                    ));
                }
                if !(ms >= 0.0 && ms.is_finite()) {
                    return Err(SeqError::new(
                        ErrorKind::Semantic,
                        at,
                        format!("duration must be finite and non-negative, got {text} ms"),
                    ));
                }
                StmtKind::Delay { ms }
            }
            "pulse" => {
                let (spin, at) = self.ident("a spin (S or E)")?;
                let target = match spin.as_str() {
                    "S" => Spin::S,
                    "E" => Spin::E,
                    _ => {
                        return Err(SeqError::new(
                            ErrorKind::Syntax,
                            at,
                            format!("expected spin S or E, found '{spin}'"),
                        ))
                    }
                };
                let (ax, at) = self.ident("an axis (x or y)")?;
                let axis = match ax.as_str() {
                    "x" => Axis::X,
                    "y" => Axis::Y,
                    _ => {
                        return Err(SeqError::new(
                            ErrorKind::Syntax,
                            at,
                            format!("expected axis x or y, found '{ax}'"),
                        ))
                    }
                };
                let (text, at) = self.number("an angle in degrees")?;
                let degrees = parse_int(&text, at, "pulse angle")?;
                StmtKind::Pulse {
                    target,
                    axis,
                    degrees,
                }
            }
            "measure" => {
                let (name, at) = self.ident("a measurement name")?;
                if !self.measurements.contains(&name.as_str()) {
                    return Err(SeqError::new(
                        ErrorKind::Semantic,
                        at,
                        format!(
                            "unknown measurement '{name}' (known: {})",
                            self.measurements.join(", ")
                        ),
                    ));
                }
                StmtKind::Measure(name)
            }
            "acquire" => StmtKind::Acquire,
            other => {
                return Err(SeqError::new(
                    ErrorKind::Syntax,
                    span,
                    format!("unknown statement '{other}'"),
                ))
            }
        };
        Ok(Stmt { kind, span })
    }
}

fn unexpected(tok: &Tok, span: Span, what: &str) -> SeqError {
    let found = match tok {
        Tok::Ident(s) => format!("'{s}'"),
        Tok::Number(s) => format!("number {s}"),
        Tok::LBrace => "'{'".into(),
        Tok::RBrace => "'}'".into(),
    };
    SeqError::new(ErrorKind::Syntax, span, format!("expected {what}, found {found}"))
}

fn parse_int(text: &str, span: Span, what: &str) -> Result<i64, SeqError> {
    text.parse::<i64>().map_err(|_| {
        SeqError::new(
            ErrorKind::Syntax,
            span,
            format!("{what} must be an integer, found '{text}'"),
        )
    })
}
