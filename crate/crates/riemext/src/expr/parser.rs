//! Lexer and recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr     := term (("+" | "-") term)*
//! term     := unary (("*" | "/") unary)*
//! unary    := "-" unary | power
//! power    := atom ("^" exponent)*
//! exponent := ["-"] INT | "(" expr ")"        (must fold to an integer)
//! atom     := INT | IDENT | "exp" "(" expr ")" | "(" expr ")"
//! ```
//!
//! Only `exp` is a known function name. Exponents must be (expressions that
//! normalize to) integers. The lexer is shared with the manifold file parser.

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::expr::Expression;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Eq,
    Newline,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Int(n) => format!("number `{n}`"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Newline => "end of line".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Spanned {
    pub tok: Tok,
    pub line: u32,
    pub col: u32,
}

/// Syntax error with 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at line {line}, column {col}: {message}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(line: u32, col: u32, message: impl Into<String>) -> ParseError {
        ParseError { line, col, message: message.into() }
    }
}

struct Lexer {
    chars: Vec<char>,
    i: usize,
    line: u32,
    col: u32,
}

impl Lexer {
    fn peek_ch(&self) -> Option<char> {
        self.chars.get(self.i).copied()
    }

    fn bump(&mut self) -> char {
        let c = self.chars[self.i];
        self.i += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        c
    }
}

pub(crate) fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out: Vec<Spanned> = Vec::new();
    let mut lx = Lexer { chars: src.chars().collect(), i: 0, line: 1, col: 1 };
    while let Some(c) = lx.peek_ch() {
        let (tline, tcol) = (lx.line, lx.col);
        match c {
            '#' => {
                while let Some(c) = lx.peek_ch() {
                    if c == '\n' {
                        break;
                    }
                    lx.bump();
                }
            }
            '\n' => {
                lx.bump();
                if !matches!(out.last(), Some(Spanned { tok: Tok::Newline, .. }) | None) {
                    out.push(Spanned { tok: Tok::Newline, line: tline, col: tcol });
                }
            }
            c if c.is_whitespace() => {
                lx.bump();
            }
            c if c.is_ascii_digit() => {
                let mut digits = String::new();
                while let Some(c) = lx.peek_ch() {
                    if c.is_ascii_digit() {
                        digits.push(lx.bump());
                    } else {
                        break;
                    }
                }
                let n: BigInt = digits.parse().expect("digits");
                out.push(Spanned { tok: Tok::Int(n), line: tline, col: tcol });
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut name = String::new();
                while let Some(c) = lx.peek_ch() {
                    if c.is_alphanumeric() || c == '_' {
                        name.push(lx.bump());
                    } else {
                        break;
                    }
                }
                out.push(Spanned { tok: Tok::Ident(name), line: tline, col: tcol });
            }
            _ => {
                let c = lx.bump();
                let tok = match c {
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    '/' => Tok::Slash,
                    '^' => Tok::Caret,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    ',' => Tok::Comma,
                    ';' => Tok::Semi,
                    '=' => Tok::Eq,
                    other => {
                        return Err(ParseError::new(
                            tline,
                            tcol,
                            format!("unexpected character `{other}`"),
                        ))
                    }
                };
                out.push(Spanned { tok, line: tline, col: tcol });
            }
        }
    }
    Ok(out)
}

pub(crate) struct TokenStream {
    toks: Vec<Spanned>,
    pos: usize,
    end_line: u32,
    end_col: u32,
    /// When false, newline tokens are skipped (standalone expression mode).
    pub newline_significant: bool,
}

impl TokenStream {
    pub fn new(src: &str, newline_significant: bool) -> Result<TokenStream, ParseError> {
        let toks = lex(src)?;
        let lines: Vec<&str> = src.lines().collect();
        let end_line = lines.len().max(1) as u32;
        let end_col = lines.last().map(|l| l.chars().count() + 1).unwrap_or(1) as u32;
        Ok(TokenStream { toks, pos: 0, end_line, end_col, newline_significant })
    }

    fn skip_insignificant(&mut self) {
        if !self.newline_significant {
            while matches!(self.toks.get(self.pos), Some(Spanned { tok: Tok::Newline, .. })) {
                self.pos += 1;
            }
        }
    }

    pub fn peek(&mut self) -> Option<&Spanned> {
        self.skip_insignificant();
        self.toks.get(self.pos)
    }

    pub fn next_tok(&mut self) -> Option<Spanned> {
        self.skip_insignificant();
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub fn end_pos(&self) -> (u32, u32) {
        (self.end_line, self.end_col)
    }

    pub fn here(&mut self) -> (u32, u32) {
        match self.peek() {
            Some(s) => (s.line, s.col),
            None => self.end_pos(),
        }
    }

    pub fn error_here(&mut self, message: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError::new(line, col, message)
    }

    pub fn expect(&mut self, tok: &Tok, what: &str) -> Result<Spanned, ParseError> {
        match self.next_tok() {
            Some(s) if &s.tok == tok => Ok(s),
            Some(s) => Err(ParseError::new(
                s.line,
                s.col,
                format!("expected {what}, found {}", s.tok.describe()),
            )),
            None => {
                let (line, col) = self.end_pos();
                Err(ParseError::new(line, col, format!("expected {what}, found end of input")))
            }
        }
    }
}

/// Parses a complete expression, consuming all input.
pub fn parse_expression(text: &str) -> Result<Expression, ParseError> {
    let mut ts = TokenStream::new(text, false)?;
    let expr = parse_expr(&mut ts)?;
    match ts.peek() {
        None => Ok(expr),
        Some(s) => Err(ParseError::new(
            s.line,
            s.col,
            format!("unexpected {} after expression", s.tok.describe()),
        )),
    }
}

/// Expression sub-parser usable inside a larger token stream (manifold
/// files): stops at separators instead of requiring end of input.
pub(crate) fn parse_expr(ts: &mut TokenStream) -> Result<Expression, ParseError> {
    let mut acc = parse_term(ts)?;
    loop {
        match ts.peek().map(|s| s.tok.clone()) {
            Some(Tok::Plus) => {
                ts.next_tok();
                acc = acc + parse_term(ts)?;
            }
            Some(Tok::Minus) => {
                ts.next_tok();
                acc = acc - parse_term(ts)?;
            }
            _ => return Ok(acc),
        }
    }
}

fn parse_term(ts: &mut TokenStream) -> Result<Expression, ParseError> {
    let mut acc = parse_unary(ts)?;
    loop {
        match ts.peek().map(|s| (s.tok.clone(), s.line, s.col)) {
            Some((Tok::Star, _, _)) => {
                ts.next_tok();
                acc = acc * parse_unary(ts)?;
            }
            Some((Tok::Slash, line, col)) => {
                ts.next_tok();
                let rhs = parse_unary(ts)?;
                acc = acc
                    .checked_div(&rhs)
                    .ok_or_else(|| ParseError::new(line, col, "division by zero"))?;
            }
            _ => return Ok(acc),
        }
    }
}

fn parse_unary(ts: &mut TokenStream) -> Result<Expression, ParseError> {
    if let Some(Spanned { tok: Tok::Minus, .. }) = ts.peek() {
        ts.next_tok();
        return Ok(-parse_unary(ts)?);
    }
    parse_power(ts)
}

fn parse_power(ts: &mut TokenStream) -> Result<Expression, ParseError> {
    let mut base = parse_atom(ts)?;
    while let Some(Spanned { tok: Tok::Caret, line, col }) = ts.peek().cloned() {
        ts.next_tok();
        let exp = parse_exponent(ts)?;
        base = base
            .pow(exp)
            .ok_or_else(|| ParseError::new(line, col, "division by zero"))?;
    }
    Ok(base)
}

fn parse_exponent(ts: &mut TokenStream) -> Result<i64, ParseError> {
    let (line, col) = ts.here();
    let expr = match ts.peek().map(|s| s.tok.clone()) {
        Some(Tok::Minus) => {
            ts.next_tok();
            -parse_exponent_atom(ts)?
        }
        _ => parse_exponent_atom(ts)?,
    };
    match expr.as_rational() {
        Some(r) if r.is_integer() => r
            .to_integer()
            .to_i64()
            .ok_or_else(|| ParseError::new(line, col, "exponent out of range")),
        _ => Err(ParseError::new(line, col, "exponent must be an integer")),
    }
}

fn parse_exponent_atom(ts: &mut TokenStream) -> Result<Expression, ParseError> {
    match ts.next_tok() {
        Some(Spanned { tok: Tok::Int(n), .. }) => {
            Ok(Expression::from_rat(num_rational::BigRational::from_integer(n)))
        }
        Some(Spanned { tok: Tok::LParen, line, col }) => {
            let e = parse_expr(ts)?;
            match ts.next_tok() {
                Some(Spanned { tok: Tok::RParen, .. }) => Ok(e),
                _ => Err(ParseError::new(
                    line,
                    col,
                    "unclosed parenthesis in exponent".to_string(),
                )),
            }
        }
        Some(s) => Err(ParseError::new(
            s.line,
            s.col,
            format!("expected integer exponent, found {}", s.tok.describe()),
        )),
        None => {
            let (line, col) = ts.end_pos();
            Err(ParseError::new(line, col, "expected integer exponent, found end of input"))
        }
    }
}

fn parse_atom(ts: &mut TokenStream) -> Result<Expression, ParseError> {
    match ts.next_tok() {
        Some(Spanned { tok: Tok::Int(n), .. }) => {
            Ok(Expression::from_rat(num_rational::BigRational::from_integer(n)))
        }
        Some(Spanned { tok: Tok::Ident(name), line, col }) => {
            if let Some(Spanned { tok: Tok::LParen, .. }) = ts.peek() {
                if name != "exp" {
                    return Err(ParseError::new(line, col, format!("unknown function `{name}`")));
                }
                ts.next_tok();
                let arg = parse_expr(ts)?;
                match ts.next_tok() {
                    Some(Spanned { tok: Tok::RParen, .. }) => Ok(Expression::exp_of(&arg)),
                    _ => Err(ParseError::new(
                        line,
                        col,
                        "unclosed parenthesis in function call".to_string(),
                    )),
                }
            } else {
                Ok(Expression::var(crate::symbol::Symbol::new(&name)))
            }
        }
        Some(Spanned { tok: Tok::LParen, line, col }) => {
            let e = parse_expr(ts)?;
            match ts.next_tok() {
                Some(Spanned { tok: Tok::RParen, .. }) => Ok(e),
                _ => Err(ParseError::new(
                    line,
                    col,
                    "unclosed parenthesis".to_string(),
                )),
            }
        }
        Some(s) => Err(ParseError::new(
            s.line,
            s.col,
            format!("expected expression, found {}", s.tok.describe()),
        )),
        None => {
            let (line, col) = ts.end_pos();
            Err(ParseError::new(line, col, "expected expression, found end of input"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_basic_grammar() {
        for src in [
            "1/y^2",
            "exp(-2*t)*g0",
            "-2*x/(1 + x^2 + y^2)",
            "x^-2",
            "x^(-2)",
            "(x + y)^3 - x^3",
            "2^10",
        ] {
            Expression::parse(src).unwrap_or_else(|e| panic!("{src}: {e}"));
        }
    }

    #[test]
    fn unclosed_paren_reports_location() {
        let err = Expression::parse("x + (y").unwrap_err();
        assert_eq!((err.line, err.col), (1, 5));
        assert!(err.message.contains("unclosed parenthesis"), "{err}");
    }

    #[test]
    fn unknown_function_rejected() {
        let err = Expression::parse("sin(x)").unwrap_err();
        assert!(err.message.contains("unknown function `sin`"), "{err}");
    }

    #[test]
    fn non_integer_exponent_rejected() {
        let err = Expression::parse("x^y").unwrap_err();
        assert!(err.message.contains("integer exponent"), "{err}");
        let err = Expression::parse("x^(1/2)").unwrap_err();
        assert!(err.message.contains("must be an integer"), "{err}");
        // Constant-folding integers is fine.
        let e = Expression::parse("x^(3-1)").unwrap();
        assert_eq!(e, Expression::parse("x^2").unwrap());
    }

    #[test]
    fn division_by_zero_rejected() {
        let err = Expression::parse("1/0").unwrap_err();
        assert!(err.message.contains("division by zero"), "{err}");
        let err = Expression::parse("(x - x)^-1").unwrap_err();
        assert!(err.message.contains("division by zero"), "{err}");
    }

    #[test]
    fn error_columns_are_one_based() {
        let err = Expression::parse("x + $").unwrap_err();
        assert_eq!((err.line, err.col), (1, 5));
    }
}
