//! Recursive-descent parser.
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := primary ("^" exponent)*          right-associative
//! primary := number | "z" | ident | ident "(" expr ")" | "(" expr ")"
//! exponent:= ["-"|"+"] number | "(" ["-"] number ["/" number] ")"
//! ```
//!
//! `−` (U+2212) is accepted as a minus sign. Offsets in errors are byte
//! offsets into the source.

use num_rational::Rational64;
use num_traits::CheckedMul;
use num_traits::{Signed, ToPrimitive, Zero};

use super::{BinaryOp, ExprError, ExprNode, UnaryOp};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Number(String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Number(n) => format!("number `{n}`"),
            Tok::Ident(i) => format!("identifier `{i}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    offset: usize,
}

fn lex(source: &str) -> Result<Vec<Token>, ExprError> {
    let bytes = source.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = source[i..].chars().next().expect("char boundary");
        let start = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '+' => out.push(Token { tok: Tok::Plus, offset: start }),
            '-' | '\u{2212}' => out.push(Token { tok: Tok::Minus, offset: start }),
            '*' | '\u{00d7}' => out.push(Token { tok: Tok::Star, offset: start }),
            '/' | '\u{00f7}' => out.push(Token { tok: Tok::Slash, offset: start }),
            '^' => out.push(Token { tok: Tok::Caret, offset: start }),
            '(' => out.push(Token { tok: Tok::LParen, offset: start }),
            ')' => out.push(Token { tok: Tok::RParen, offset: start }),
            '0'..='9' | '.' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_digit() || bytes[j] == b'.') {
                    j += 1;
                }
                // optional exponent, only if followed by digits
                if j < bytes.len() && (bytes[j] == b'e' || bytes[j] == b'E') {
                    let mut k = j + 1;
                    if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                        k += 1;
                    }
                    if k < bytes.len() && bytes[k].is_ascii_digit() {
                        while k < bytes.len() && bytes[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                let text = &source[i..j];
                if text.parse::<f64>().is_err() {
                    return Err(ExprError::Syntax {
                        offset: start,
                        expected: vec!["number".into()],
                        found: format!("`{text}`"),
                    });
                }
                out.push(Token { tok: Tok::Number(text.to_string()), offset: start });
                i = j;
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                    j += 1;
                }
                out.push(Token { tok: Tok::Ident(source[i..j].to_string()), offset: start });
                i = j;
                continue;
            }
            other => {
                return Err(ExprError::Syntax {
                    offset: start,
                    expected: vec!["expression".into()],
                    found: format!("character `{other}`"),
                })
            }
        }
        i += c.len_utf8();
    }
    out.push(Token { tok: Tok::Eof, offset: source.len() });
    Ok(out)
}

/// Parses `source` into an expression tree.
pub fn parse(source: &str) -> Result<ExprNode, ExprError> {
    let tokens = lex(source)?;
    let mut p = Parser { tokens, pos: 0 };
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

const OPERAND: [&str; 5] = ["number", "`z`", "identifier", "`(`", "`-`"];

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ExprError {
        let t = self.peek();
        ExprError::Syntax {
            offset: t.offset,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: t.tok.describe(),
        }
    }

    fn expect_eof(&self) -> Result<(), ExprError> {
        if self.peek().tok == Tok::Eof {
            Ok(())
        } else {
            Err(self.error(&["operator", "end of input"]))
        }
    }

    fn expr(&mut self) -> Result<ExprNode, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => BinaryOp::Add,
                Tok::Minus => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = ExprNode::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<ExprNode, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Star => BinaryOp::Mul,
                Tok::Slash => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = ExprNode::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<ExprNode, ExprError> {
        if self.peek().tok == Tok::Minus {
            self.bump();
            let inner = self.unary()?;
            return Ok(match inner {
                ExprNode::Const(c) => ExprNode::Const(-c),
                other => ExprNode::unary(UnaryOp::Neg, other),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<ExprNode, ExprError> {
        let base = self.primary()?;
        if self.peek().tok != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let exponent = self.exponent_chain()?;
        Ok(ExprNode::pow(base, exponent))
    }

    /// Parses `e1 (^ e2)*` right-associatively, folding to a single rational.
    fn exponent_chain(&mut self) -> Result<Rational64, ExprError> {
        let offset = self.peek().offset;
        let first = self.exponent()?;
        if self.peek().tok != Tok::Caret {
            return Ok(first);
        }
        self.bump();
        let rest = self.exponent_chain()?;
        if !rest.is_integer() {
            return Err(ExprError::NonRationalExponent { offset });
        }
        let n = rest.numer().to_i32().ok_or(ExprError::NonRationalExponent { offset })?;
        if first.is_zero() && n < 0 {
            return Err(ExprError::NonRationalExponent { offset });
        }
        checked_pow(first, n).ok_or(ExprError::NonRationalExponent { offset })
    }

    fn exponent(&mut self) -> Result<Rational64, ExprError> {
        let offset = self.peek().offset;
        match self.peek().tok.clone() {
            Tok::Minus | Tok::Plus => {
                let negate = self.bump().tok == Tok::Minus;
                let r = self.exponent_number()?;
                Ok(if negate { -r } else { r })
            }
            Tok::Number(_) => self.exponent_number(),
            Tok::LParen => {
                self.bump();
                let negate = if self.peek().tok == Tok::Minus {
                    self.bump();
                    true
                } else {
                    false
                };
                let mut r = self.exponent_number()?;
                if self.peek().tok == Tok::Slash {
                    self.bump();
                    let den_negative = if self.peek().tok == Tok::Minus {
                        self.bump();
                        true
                    } else {
                        false
                    };
                    let den = self.exponent_number()?;
                    if den.is_zero() {
                        return Err(ExprError::NonRationalExponent { offset });
                    }
                    r /= if den_negative { -den } else { den };
                }
                if self.peek().tok != Tok::RParen {
                    // anything else inside the parentheses is not a rational constant
                    return Err(match self.peek().tok {
                        Tok::Eof => self.error(&["`)`"]),
                        _ => ExprError::NonRationalExponent { offset },
                    });
                }
                self.bump();
                Ok(if negate { -r } else { r })
            }
            Tok::Eof => Err(self.error(&["rational exponent"])),
            _ => Err(ExprError::NonRationalExponent { offset }),
        }
    }

    fn exponent_number(&mut self) -> Result<Rational64, ExprError> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Number(text) => {
                self.bump();
                decimal_to_rational(text).ok_or(ExprError::NonRationalExponent { offset: t.offset })
            }
            Tok::Eof => Err(self.error(&["number"])),
            _ => Err(ExprError::NonRationalExponent { offset: t.offset }),
        }
    }

    fn primary(&mut self) -> Result<ExprNode, ExprError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Number(text) => {
                self.bump();
                Ok(ExprNode::Const(text.parse().expect("validated by lexer")))
            }
            Tok::Ident(name) => {
                self.bump();
                if self.peek().tok == Tok::LParen {
                    let op = UnaryOp::from_name(&name)
                        .ok_or(ExprError::UnknownFunction { name: name.clone(), offset: t.offset })?;
                    self.bump();
                    let arg = self.expr()?;
                    self.close_paren()?;
                    return Ok(ExprNode::unary(op, arg));
                }
                if name == "z" {
                    Ok(ExprNode::Var)
                } else if UnaryOp::from_name(&name).is_some() {
                    // a bare function name is not a parameter
                    Err(self.error(&["`(`"]))
                } else {
                    Ok(ExprNode::Param(name))
                }
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.close_paren()?;
                Ok(inner)
            }
            _ => Err(self.error(&OPERAND)),
        }
    }

    fn close_paren(&mut self) -> Result<(), ExprError> {
        if self.peek().tok == Tok::RParen {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&["operator", "`)`"]))
        }
    }
}

fn checked_pow(base: Rational64, n: i32) -> Option<Rational64> {
    let (mut num, mut den) = (1i64, 1i64);
    for _ in 0..n.unsigned_abs() {
        num = num.checked_mul(*base.numer())?;
        den = den.checked_mul(*base.denom())?;
    }
    let r = Rational64::new(num, den);
    Some(if n < 0 { r.recip() } else { r })
}

/// Exact rational value of a decimal literal such as `2`, `0.75` or `1.5e-2`.
fn decimal_to_rational(text: &str) -> Option<Rational64> {
    let (mantissa, exp10) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits = format!("{int_part}{frac_part}");
    let digits = if digits.is_empty() { "0" } else { digits.as_str() };
    let num: i64 = digits.parse().ok()?;
    let scale = exp10 - frac_part.len() as i32;
    let ten = Rational64::from_integer(10);
    let factor = checked_pow(ten, scale)?;
    let value = Rational64::from_integer(num).checked_mul(&factor)?;
    if value.is_negative() {
        return None;
    }
    Some(value)
}
