use super::{ErrorKind, SeqError, Span};

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    /// Numeric literal, kept as written so the parser can tell integers apart.
    Number(String),
    LBrace,
    RBrace,
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub(crate) fn lex(text: &str) -> Result<Vec<Token>, SeqError> {
    let mut out = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let span = Span {
                line: li + 1,
                col: i + 1,
            };
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c == '{' || c == '}' {
                let tok = if c == '{' { Tok::LBrace } else { Tok::RBrace };
                out.push(Token { tok, span });
                i += 1;
                continue;
            }
            if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Token {
                    tok: Tok::Ident(chars[start..i].iter().collect()),
                    span,
                });
                continue;
            }
            if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' {
                let start = i;
                i = scan_number(&chars, i).ok_or_else(|| {
                    SeqError::new(ErrorKind::Lexical, span, format!("malformed number at '{c}'"))
                })?;
                out.push(Token {
                    tok: Tok::Number(chars[start..i].iter().collect()),
                    span,
                });
                continue;
            }
            return Err(SeqError::new(
                ErrorKind::Lexical,
                span,
                format!("unexpected character '{c}'"),
            ));
        }
    }
    Ok(out)
}

/// `[+-]? digits ('.' digits?)? ([eE] [+-]? digits)?` or `[+-]? '.' digits ...`.
/// Returns the index after the literal.
fn scan_number(chars: &[char], mut i: usize) -> Option<usize> {
    let digits = |i: &mut usize| {
        let s = *i;
        while *i < chars.len() && chars[*i].is_ascii_digit() {
            *i += 1;
        }
        *i > s
    };
    if matches!(chars.get(i), Some('-' | '+')) {
        i += 1;
    }
    let mut any = digits(&mut i);
    if chars.get(i) == Some(&'.') {
        i += 1;
        any |= digits(&mut i);
    }
    if !any {
        return None;
    }
    // an exponent needs digits; otherwise the 'e' starts the next identifier
    if matches!(chars.get(i), Some('e' | 'E')) {
        let mut j = i + 1;
        if matches!(chars.get(j), Some('-' | '+')) {
            j += 1;
        }
        if digits(&mut j) {
            i = j;
        }
    }
    Some(i)
}
