use super::error::FrontendError;
use super::source::{Pos, SourceProgram, Span};
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Name(String),
    Int(i64),
    Real(f64),
    Str(String),
    Op(&'static str),
    Newline,
    Indent,
    Dedent,
    EndMarker,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Name(n) => write!(f, "NAME({n})"),
            Tok::Int(v) => write!(f, "INT({v})"),
            Tok::Real(v) => write!(f, "REAL({v})"),
            Tok::Str(s) => write!(f, "STRING({s:?})"),
            Tok::Op(o) => write!(f, "OP({o})"),
            Tok::Newline => f.write_str("NEWLINE"),
            Tok::Indent => f.write_str("INDENT"),
            Tok::Dedent => f.write_str("DEDENT"),
            Tok::EndMarker => f.write_str("ENDMARKER"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

// Longest operators first so that prefix matching picks the maximal munch.
const OPERATORS: &[&str] = &[
    "**=", "//=", ">>=", "<<=", "...", "**", "//", "==", "!=", "<=", ">=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "->", ":=",
    "<<", ">>", "+", "-", "*", "/", "%", "(", ")", "[", "]", "{", "}", ",", ":", ".", "=", "<", ">", "@", ";", "&", "|", "^", "~",
];

const STRING_PREFIXES: &[&str] = &["r", "b", "f", "u", "rb", "br", "fr", "rf", "R", "B", "F", "U"];

struct Lexer {
    chars: Vec<char>,
    i: usize,
    line: u32,
    col: u32,
    depth: usize,
    indents: Vec<u32>,
    out: Vec<Token>,
}

/// Convert program text into tokens, synthesizing INDENT/DEDENT from leading
/// spaces. Comments and blank lines produce no tokens.
pub fn tokenize(src: &SourceProgram) -> Result<Vec<Token>, FrontendError> {
    let mut lx = Lexer { chars: src.body().chars().collect(), i: 0, line: 1, col: 1, depth: 0, indents: vec![0], out: Vec::new() };
    lx.run()?;
    Ok(lx.out)
}

impl Lexer {
    fn pos(&self) -> Pos {
        Pos::new(self.line, self.col)
    }

    fn peek(&self, k: usize) -> Option<char> {
        self.chars.get(self.i + k).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.i).copied()?;
        self.i += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn push(&mut self, tok: Tok, start: Pos) {
        let end = self.pos();
        self.out.push(Token { tok, span: Span::new(start, end) });
    }

    fn run(&mut self) -> Result<(), FrontendError> {
        let mut at_line_start = true;
        loop {
            if at_line_start && self.depth == 0 {
                if !self.indentation()? {
                    break;
                }
                at_line_start = false;
            }
            let Some(c) = self.peek(0) else { break };
            let start = self.pos();
            match c {
                '\n' => {
                    if self.depth == 0 {
                        self.bump();
                        self.out.push(Token { tok: Tok::Newline, span: Span::new(start, Pos::new(start.line, start.col + 1)) });
                        at_line_start = true;
                    } else {
                        self.bump();
                    }
                }
                ' ' | '\t' | '\r' | '\x0c' => {
                    self.bump();
                }
                '#' => {
                    while matches!(self.peek(0), Some(c) if c != '\n') {
                        self.bump();
                    }
                }
                '\\' => {
                    if self.peek(1) == Some('\n') {
                        self.bump();
                        self.bump();
                    } else if self.peek(1) == Some('\r') && self.peek(2) == Some('\n') {
                        self.bump();
                        self.bump();
                        self.bump();
                    } else {
                        return Err(FrontendError::InvalidCharacter { pos: start, ch: c });
                    }
                }
                '"' | '\'' => self.string(start)?,
                c if c.is_ascii_digit() => self.number(start)?,
                '.' if self.peek(1).is_some_and(|d| d.is_ascii_digit()) => self.number(start)?,
                c if c == '_' || c.is_alphabetic() => {
                    let mut name = String::new();
                    while let Some(c) = self.peek(0) {
                        if c == '_' || c.is_alphanumeric() {
                            name.push(c);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    if matches!(self.peek(0), Some('"' | '\'')) && STRING_PREFIXES.contains(&name.as_str()) {
                        return Err(FrontendError::UnsupportedFeature {
                            span: Span::new(start, self.pos()),
                            feature: format!("string prefix `{name}`"),
                        });
                    }
                    self.push(Tok::Name(name), start);
                }
                _ => {
                    let op = OPERATORS.iter().find(|op| op.chars().enumerate().all(|(k, oc)| self.peek(k) == Some(oc)));
                    let Some(op) = op else {
                        return Err(FrontendError::InvalidCharacter { pos: start, ch: c });
                    };
                    for _ in 0..op.len() {
                        self.bump();
                    }
                    match *op {
                        "(" | "[" | "{" => self.depth += 1,
                        ")" | "]" | "}" => self.depth = self.depth.saturating_sub(1),
                        _ => {}
                    }
                    self.push(Tok::Op(op), start);
                }
            }
        }
        let end = self.pos();
        let needs_newline = !matches!(self.out.last().map(|t| &t.tok), None | Some(Tok::Newline | Tok::Indent | Tok::Dedent));
        if needs_newline {
            self.out.push(Token { tok: Tok::Newline, span: Span::new(end, end) });
        }
        while self.indents.len() > 1 {
            self.indents.pop();
            self.out.push(Token { tok: Tok::Dedent, span: Span::new(end, end) });
        }
        self.out.push(Token { tok: Tok::EndMarker, span: Span::new(end, end) });
        Ok(())
    }

    /// Handle leading whitespace of a physical line. Returns false at end of input.
    fn indentation(&mut self) -> Result<bool, FrontendError> {
        loop {
            let mut width = 0u32;
            loop {
                match self.peek(0) {
                    Some(' ') => {
                        width += 1;
                        self.bump();
                    }
                    Some('\t') => return Err(FrontendError::TabSpaceMix { pos: self.pos() }),
                    Some('\x0c') => {
                        self.bump();
                    }
                    _ => break,
                }
            }
            match self.peek(0) {
                None => return Ok(false),
                Some('\n') => {
                    self.bump();
                    continue;
                }
                Some('\r') if self.peek(1) == Some('\n') => {
                    self.bump();
                    self.bump();
                    continue;
                }
                Some('#') => {
                    while matches!(self.peek(0), Some(c) if c != '\n') {
                        self.bump();
                    }
                    continue;
                }
                _ => {}
            }
            let here = self.pos();
            let top = *self.indents.last().unwrap_or(&0);
            if width > top {
                self.indents.push(width);
                self.out.push(Token { tok: Tok::Indent, span: Span::new(Pos::new(here.line, 1), here) });
            } else if width < top {
                while width < *self.indents.last().unwrap_or(&0) {
                    self.indents.pop();
                    self.out.push(Token { tok: Tok::Dedent, span: Span::new(here, here) });
                }
                if width != *self.indents.last().unwrap_or(&0) {
                    return Err(FrontendError::Indentation {
                        pos: here,
                        message: "unindent does not match any outer indentation level".into(),
                    });
                }
            }
            return Ok(true);
        }
    }

    fn string(&mut self, start: Pos) -> Result<(), FrontendError> {
        let quote = self.peek(0).unwrap_or('"');
        if self.peek(1) == Some(quote) && self.peek(2) == Some(quote) {
            return Err(FrontendError::UnsupportedFeature {
                span: Span::new(start, Pos::new(start.line, start.col + 3)),
                feature: "triple-quoted string".into(),
            });
        }
        self.bump();
        let mut text = String::new();
        loop {
            match self.peek(0) {
                None | Some('\n') => return Err(FrontendError::UnterminatedString { pos: start }),
                Some(c) if c == quote => {
                    self.bump();
                    break;
                }
                Some('\\') => {
                    self.bump();
                    let Some(e) = self.peek(0) else {
                        return Err(FrontendError::UnterminatedString { pos: start });
                    };
                    match e {
                        'n' => text.push('\n'),
                        't' => text.push('\t'),
                        'r' => text.push('\r'),
                        '0' => text.push('\0'),
                        '\\' | '\'' | '"' => text.push(e),
                        '\n' => {}
                        'x' => {
                            let hex: String = [self.peek(1), self.peek(2)].iter().flatten().collect();
                            let value = (hex.len() == 2).then(|| u8::from_str_radix(&hex, 16).ok()).flatten();
                            let Some(value) = value else {
                                return Err(FrontendError::InvalidLiteral { pos: self.pos(), message: "bad \\x escape".into() });
                            };
                            text.push(value as char);
                            self.bump();
                            self.bump();
                        }
                        other => {
                            text.push('\\');
                            text.push(other);
                        }
                    }
                    self.bump();
                }
                Some(c) => {
                    text.push(c);
                    self.bump();
                }
            }
        }
        self.push(Tok::Str(text), start);
        Ok(())
    }

    fn number(&mut self, start: Pos) -> Result<(), FrontendError> {
        let mut text = String::new();
        let take_digits = |lx: &mut Self, text: &mut String| {
            while let Some(c) = lx.peek(0) {
                if c.is_ascii_digit() {
                    text.push(c);
                    lx.bump();
                } else if c == '_' && lx.peek(1).is_some_and(|d| d.is_ascii_digit()) {
                    lx.bump();
                } else {
                    break;
                }
            }
        };
        if self.peek(0) == Some('0') && matches!(self.peek(1), Some('x' | 'X' | 'o' | 'O' | 'b' | 'B')) {
            let radix = match self.peek(1) {
                Some('x' | 'X') => 16,
                Some('o' | 'O') => 8,
                _ => 2,
            };
            self.bump();
            self.bump();
            while let Some(c) = self.peek(0) {
                if c.is_digit(radix) {
                    text.push(c);
                    self.bump();
                } else if c == '_' {
                    self.bump();
                } else {
                    break;
                }
            }
            let value = i64::from_str_radix(&text, radix)
                .map_err(|_| FrontendError::InvalidLiteral { pos: start, message: "integer literal out of range".into() })?;
            self.push(Tok::Int(value), start);
            return Ok(());
        }
        let mut is_real = false;
        take_digits(self, &mut text);
        if self.peek(0) == Some('.') {
            is_real = true;
            text.push('.');
            self.bump();
            take_digits(self, &mut text);
        }
        if matches!(self.peek(0), Some('e' | 'E')) {
            let sign = matches!(self.peek(1), Some('+' | '-'));
            let digit_at = if sign { 2 } else { 1 };
            if self.peek(digit_at).is_some_and(|d| d.is_ascii_digit()) {
                is_real = true;
                text.push('e');
                self.bump();
                if sign {
                    text.push(self.bump().unwrap_or('+'));
                }
                take_digits(self, &mut text);
            }
        }
        if matches!(self.peek(0), Some('j' | 'J')) {
            self.bump();
            return Err(FrontendError::UnsupportedFeature { span: Span::new(start, self.pos()), feature: "imaginary literal".into() });
        }
        if self.peek(0).is_some_and(|c| c == '_' || c.is_alphanumeric()) {
            return Err(FrontendError::InvalidLiteral { pos: start, message: format!("malformed number `{text}`") });
        }
        if is_real {
            let value: f64 =
                text.parse().map_err(|_| FrontendError::InvalidLiteral { pos: start, message: format!("bad real `{text}`") })?;
            self.push(Tok::Real(value), start);
        } else {
            if text.len() > 1 && text.starts_with('0') && text.chars().any(|c| c != '0') {
                return Err(FrontendError::InvalidLiteral { pos: start, message: "leading zeros in decimal integer".into() });
            }
            let value: i64 =
                text.parse().map_err(|_| FrontendError::InvalidLiteral { pos: start, message: "integer literal out of range".into() })?;
            self.push(Tok::Int(value), start);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(&SourceProgram::new("t.py", s)).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn minimal_statement() {
        assert_eq!(toks("x = 1\n"), vec![Tok::Name("x".into()), Tok::Op("="), Tok::Int(1), Tok::Newline, Tok::EndMarker]);
    }

    #[test]
    fn single_block_has_one_indent_and_dedent() {
        let t = toks("def f():\n  return 1\n");
        assert_eq!(t.iter().filter(|t| **t == Tok::Indent).count(), 1);
        assert_eq!(t.iter().filter(|t| **t == Tok::Dedent).count(), 1);
    }

    #[test]
    fn tab_in_indentation_is_rejected() {
        let err = tokenize(&SourceProgram::new("t.py", "if x:\n\ty = 1\n")).unwrap_err();
        assert_eq!(err, FrontendError::TabSpaceMix { pos: Pos::new(2, 1) });
    }

    #[test]
    fn unterminated_string_reports_opening_quote() {
        let err = tokenize(&SourceProgram::new("t.py", "print(\"abc\n")).unwrap_err();
        assert_eq!(err, FrontendError::UnterminatedString { pos: Pos::new(1, 7) });
    }

    #[test]
    fn comments_and_blank_lines_vanish() {
        assert_eq!(toks("# c\n\n   \nx=2 # trailing\n"), toks("x=2\n"));
    }

    #[test]
    fn brackets_join_lines() {
        let t = toks("v = [1,\n     2]\n");
        assert_eq!(t.iter().filter(|t| **t == Tok::Newline).count(), 1);
    }

    #[test]
    fn numeric_forms() {
        assert_eq!(toks("1.5")[0], Tok::Real(1.5));
        assert_eq!(toks("1e-05")[0], Tok::Real(1e-5));
        assert_eq!(toks(".25")[0], Tok::Real(0.25));
        assert_eq!(toks("3.")[0], Tok::Real(3.0));
        assert_eq!(toks("0x1F")[0], Tok::Int(31));
        assert_eq!(toks("1_000")[0], Tok::Int(1000));
    }

    #[test]
    fn maximal_munch_operators() {
        assert_eq!(toks("a //= b")[1], Tok::Op("//="));
        assert_eq!(toks("a<=b")[1], Tok::Op("<="));
    }

    #[test]
    fn inconsistent_dedent() {
        let err = tokenize(&SourceProgram::new("t.py", "if x:\n    y = 1\n  z = 2\n")).unwrap_err();
        assert!(matches!(err, FrontendError::Indentation { .. }));
    }

    #[test]
    fn string_escapes() {
        assert_eq!(toks(r#""a\tb\n\x41""#)[0], Tok::Str("a\tb\nA".into()));
    }

    #[test]
    fn missing_final_newline_is_synthesized() {
        assert_eq!(toks("x"), vec![Tok::Name("x".into()), Tok::Newline, Tok::EndMarker]);
    }
}
