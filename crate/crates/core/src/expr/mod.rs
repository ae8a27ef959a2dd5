//! Arithmetic expressions in `z` with named parameters.
//!
//! Expressions are parsed from text ([`parse`]), evaluated in any [`Real`]
//! scalar ([`ExprNode::evaluate`]) and differentiated symbolically
//! ([`ExprNode::differentiate`]). Exponents are restricted to rational
//! constants so derivatives stay closed-form and no branch cuts appear.

mod parser;

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::num::Real;

pub use parser::parse;

/// Function names recognised by the parser; any other identifier is a parameter.
pub const FUNCTIONS: [&str; 5] = ["sqrt", "exp", "ln", "sin", "cos"];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: expected {}, found {found}", expected.join(" or "))]
    Syntax { offset: usize, expected: Vec<String>, found: String },

    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { name: String, offset: usize },

    #[error("exponent at byte {offset} must be a rational constant")]
    NonRationalExponent { offset: usize },

    #[error("domain error in `{subexpr}`: {reason}")]
    Domain { subexpr: String, reason: String },

    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },
}

impl ExprError {
    /// Byte offset for positioned diagnostics, when there is one.
    pub fn offset(&self) -> Option<usize> {
        match self {
            ExprError::Syntax { offset, .. }
            | ExprError::UnknownFunction { offset, .. }
            | ExprError::NonRationalExponent { offset } => Some(*offset),
            _ => None,
        }
    }
}

/// Parameter bindings. Names are unique (map keys); values must be finite.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamSet(BTreeMap<String, f64>);

impl ParamSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Binds `name`, replacing any previous value.
    pub fn set(&mut self, name: impl Into<String>, value: f64) -> Result<(), ExprError> {
        let name = name.into();
        if !value.is_finite() {
            return Err(ExprError::InvalidParameter { name, reason: format!("value {value} is not finite") });
        }
        self.0.insert(name, value);
        Ok(())
    }

    /// Builder-style [`ParamSet::set`].
    pub fn with(mut self, name: impl Into<String>, value: f64) -> Result<Self, ExprError> {
        self.set(name, value)?;
        Ok(self)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Parses `name=value` pairs separated by commas, e.g. `E=-0.5,Z=1,l=0`.
    pub fn parse_list(text: &str) -> Result<Self, ExprError> {
        let mut out = ParamSet::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (name, value) = item.split_once('=').ok_or_else(|| ExprError::InvalidParameter {
                name: item.to_string(),
                reason: "expected name=value".into(),
            })?;
            let name = name.trim();
            let value: f64 = value.trim().parse().map_err(|_| ExprError::InvalidParameter {
                name: name.to_string(),
                reason: format!("`{}` is not a number", value.trim()),
            })?;
            out.set(name, value)?;
        }
        Ok(out)
    }
}

impl<S: Into<String>> FromIterator<(S, f64)> for ParamSet {
    /// Collects pairs; non-finite values are dropped by [`ParamSet::set`] semantics
    /// only through the fallible API, so this panics on them.
    fn from_iter<I: IntoIterator<Item = (S, f64)>>(iter: I) -> Self {
        let mut out = ParamSet::new();
        for (k, v) in iter {
            out.set(k, v).expect("finite parameter value");
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Sqrt,
    Exp,
    Ln,
    Sin,
    Cos,
}

impl UnaryOp {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sqrt" => UnaryOp::Sqrt,
            "exp" => UnaryOp::Exp,
            "ln" => UnaryOp::Ln,
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Exp => "exp",
            UnaryOp::Ln => "ln",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
        }
    }
}

/// Expression tree. Trees are immutable once built and cheap to share.
#[derive(Debug, Clone, PartialEq)]
pub enum ExprNode {
    Const(f64),
    /// The independent variable `z`.
    Var,
    Param(String),
    Unary(UnaryOp, Box<ExprNode>),
    Binary(BinaryOp, Box<ExprNode>, Box<ExprNode>),
    /// `base ^ exponent` with a rational constant exponent.
    Pow(Box<ExprNode>, Rational64),
}

impl ExprNode {
    pub fn constant(c: f64) -> Self {
        ExprNode::Const(c)
    }

    pub fn param(name: impl Into<String>) -> Self {
        ExprNode::Param(name.into())
    }

    pub fn unary(op: UnaryOp, arg: ExprNode) -> Self {
        ExprNode::Unary(op, Box::new(arg))
    }

    pub fn binary(op: BinaryOp, lhs: ExprNode, rhs: ExprNode) -> Self {
        ExprNode::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn pow(base: ExprNode, exponent: Rational64) -> Self {
        ExprNode::Pow(Box::new(base), exponent)
    }

    /// True when the tree references `z`.
    pub fn depends_on_z(&self) -> bool {
        match self {
            ExprNode::Var => true,
            ExprNode::Const(_) | ExprNode::Param(_) => false,
            ExprNode::Unary(_, a) | ExprNode::Pow(a, _) => a.depends_on_z(),
            ExprNode::Binary(_, a, b) => a.depends_on_z() || b.depends_on_z(),
        }
    }

    /// Names of all parameters referenced, sorted and deduplicated.
    pub fn parameters(&self) -> Vec<String> {
        fn walk(e: &ExprNode, out: &mut Vec<String>) {
            match e {
                ExprNode::Param(p) => out.push(p.clone()),
                ExprNode::Const(_) | ExprNode::Var => {}
                ExprNode::Unary(_, a) | ExprNode::Pow(a, _) => walk(a, out),
                ExprNode::Binary(_, a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out.sort();
        out.dedup();
        out
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            ExprNode::Const(_) | ExprNode::Var | ExprNode::Param(_) => 1,
            ExprNode::Unary(_, a) | ExprNode::Pow(a, _) => 1 + a.size(),
            ExprNode::Binary(_, a, b) => 1 + a.size() + b.size(),
        }
    }

    /// True if some division (or negative power) has a denominator that vanishes at `z = 0`.
    pub fn has_pole_at_zero(&self, params: &ParamSet) -> bool {
        match self {
            ExprNode::Const(_) | ExprNode::Var | ExprNode::Param(_) => false,
            ExprNode::Unary(_, a) => a.has_pole_at_zero(params),
            ExprNode::Pow(a, r) => {
                (r.is_negative() && a.depends_on_z() && vanishes_at_zero(a, params)) || a.has_pole_at_zero(params)
            }
            ExprNode::Binary(op, a, b) => {
                (*op == BinaryOp::Div && b.depends_on_z() && vanishes_at_zero(b, params))
                    || a.has_pole_at_zero(params)
                    || b.has_pole_at_zero(params)
            }
        }
    }

    /// Evaluates the tree at `z`.
    ///
    /// Division by zero, `ln`/`sqrt` of non-positive arguments, negative
    /// bases under even-denominator exponents and non-finite results are
    /// reported as [`ExprError::Domain`] naming the offending subexpression.
    pub fn evaluate<T: Real>(&self, z: T, params: &ParamSet) -> Result<T, ExprError> {
        let value = match self {
            ExprNode::Const(c) => T::lit(*c),
            ExprNode::Var => z,
            ExprNode::Param(name) => {
                T::lit(params.get(name).ok_or_else(|| ExprError::UnboundParameter(name.clone()))?)
            }
            ExprNode::Unary(op, a) => {
                let x = a.evaluate(z, params)?;
                match op {
                    UnaryOp::Neg => -x,
                    UnaryOp::Sqrt => {
                        if x <= T::zero() {
                            return Err(self.domain("square root of a non-positive argument"));
                        }
                        x.sqrt()
                    }
                    UnaryOp::Exp => x.exp(),
                    UnaryOp::Ln => {
                        if x <= T::zero() {
                            return Err(self.domain("logarithm of a non-positive argument"));
                        }
                        x.ln()
                    }
                    UnaryOp::Sin => x.sin(),
                    UnaryOp::Cos => x.cos(),
                }
            }
            ExprNode::Binary(op, a, b) => {
                let x = a.evaluate(z, params)?;
                let y = b.evaluate(z, params)?;
                match op {
                    BinaryOp::Add => x + y,
                    BinaryOp::Sub => x - y,
                    BinaryOp::Mul => x * y,
                    BinaryOp::Div => {
                        if y == T::zero() {
                            return Err(self.domain("division by zero"));
                        }
                        x / y
                    }
                }
            }
            ExprNode::Pow(a, r) => {
                let x = a.evaluate(z, params)?;
                rational_pow(x, *r).ok_or_else(|| self.domain("power outside its real domain"))?
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(self.domain("non-finite result"))
        }
    }

    fn domain(&self, reason: &str) -> ExprError {
        ExprError::Domain { subexpr: self.to_string(), reason: reason.to_string() }
    }

    /// Symbolic derivative with respect to `z`; parameters are constants.
    ///
    /// Trivial products and sums with 0 or 1 are folded while building, but no
    /// further simplification is attempted.
    pub fn differentiate(&self) -> ExprNode {
        use ExprNode as E;
        match self {
            E::Const(_) | E::Param(_) => E::Const(0.0),
            E::Var => E::Const(1.0),
            E::Unary(op, a) => {
                let da = a.differentiate();
                if is_zero(&da) {
                    return E::Const(0.0);
                }
                let u = (**a).clone();
                match op {
                    UnaryOp::Neg => neg(da),
                    UnaryOp::Sqrt => div(da, mul(E::Const(2.0), self.clone())),
                    UnaryOp::Exp => mul(self.clone(), da),
                    UnaryOp::Ln => div(da, u),
                    UnaryOp::Sin => mul(E::unary(UnaryOp::Cos, u), da),
                    UnaryOp::Cos => neg(mul(E::unary(UnaryOp::Sin, u), da)),
                }
            }
            E::Binary(op, a, b) => {
                let (da, db) = (a.differentiate(), b.differentiate());
                let (u, v) = ((**a).clone(), (**b).clone());
                match op {
                    BinaryOp::Add => add(da, db),
                    BinaryOp::Sub => sub(da, db),
                    BinaryOp::Mul => add(mul(da, v), mul(u, db)),
                    BinaryOp::Div => {
                        if is_zero(&db) {
                            div(da, v)
                        } else {
                            div(sub(mul(da, v.clone()), mul(u, db)), E::pow(v, Rational64::from_integer(2)))
                        }
                    }
                }
            }
            E::Pow(a, r) => {
                let da = a.differentiate();
                if is_zero(&da) || r.is_zero() {
                    return E::Const(0.0);
                }
                let coeff = E::Const(r.to_f64().expect("finite rational"));
                let lowered = *r - Rational64::one();
                let power = if lowered.is_zero() { E::Const(1.0) } else { E::pow((**a).clone(), lowered) };
                mul(mul(coeff, power), da)
            }
        }
    }
}

fn vanishes_at_zero(e: &ExprNode, params: &ParamSet) -> bool {
    match e.evaluate(0.0_f64, params) {
        Ok(v) => v == 0.0,
        Err(ExprError::Domain { .. }) => true,
        Err(_) => false,
    }
}

/// `x^r` for rational `r`, or `None` outside the real domain.
fn rational_pow<T: Real>(x: T, r: Rational64) -> Option<T> {
    let (num, den) = (*r.numer(), *r.denom());
    if x == T::zero() {
        return if num > 0 { Some(T::zero()) } else { None };
    }
    if den == 1 {
        return i32::try_from(num).ok().map(|n| x.powi(n)).or_else(|| Some(x.powf(T::lit(num as f64))));
    }
    let exponent = T::lit(num as f64) / T::lit(den as f64);
    if x > T::zero() {
        if den == 2 {
            let root = x.sqrt();
            return i32::try_from(num).ok().map(|n| root.powi(n));
        }
        return Some(x.powf(exponent));
    }
    // negative base: real only for odd denominators
    if den % 2 == 0 {
        return None;
    }
    let magnitude = (-x).powf(exponent.abs());
    let magnitude = if num < 0 { magnitude.recip() } else { magnitude };
    Some(if num % 2 == 0 { magnitude } else { -magnitude })
}

fn is_zero(e: &ExprNode) -> bool {
    matches!(e, ExprNode::Const(c) if *c == 0.0)
}

fn is_one(e: &ExprNode) -> bool {
    matches!(e, ExprNode::Const(c) if *c == 1.0)
}

fn neg(a: ExprNode) -> ExprNode {
    match a {
        ExprNode::Const(c) => ExprNode::Const(-c),
        ExprNode::Unary(UnaryOp::Neg, inner) => *inner,
        other => ExprNode::unary(UnaryOp::Neg, other),
    }
}

fn add(a: ExprNode, b: ExprNode) -> ExprNode {
    if is_zero(&a) {
        b
    } else if is_zero(&b) {
        a
    } else {
        ExprNode::binary(BinaryOp::Add, a, b)
    }
}

fn sub(a: ExprNode, b: ExprNode) -> ExprNode {
    if is_zero(&b) {
        a
    } else if is_zero(&a) {
        neg(b)
    } else {
        ExprNode::binary(BinaryOp::Sub, a, b)
    }
}

fn mul(a: ExprNode, b: ExprNode) -> ExprNode {
    if is_zero(&a) || is_zero(&b) {
        ExprNode::Const(0.0)
    } else if is_one(&a) {
        b
    } else if is_one(&b) {
        a
    } else {
        ExprNode::binary(BinaryOp::Mul, a, b)
    }
}

fn div(a: ExprNode, b: ExprNode) -> ExprNode {
    if is_zero(&a) {
        ExprNode::Const(0.0)
    } else if is_one(&b) {
        a
    } else {
        ExprNode::binary(BinaryOp::Div, a, b)
    }
}

fn fmt_rational(r: Rational64) -> String {
    if r.is_integer() {
        if r.is_negative() {
            format!("({})", r.numer())
        } else {
            r.numer().to_string()
        }
    } else {
        format!("({}/{})", r.numer(), r.denom())
    }
}

/// Prints a fully parenthesised form that [`parse`] reads back to an
/// equivalent tree.
impl fmt::Display for ExprNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprNode::Const(c) => {
                if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) {
                    write!(f, "(-{:?})", -c)
                } else {
                    write!(f, "{c:?}")
                }
            }
            ExprNode::Var => f.write_str("z"),
            ExprNode::Param(p) => f.write_str(p),
            ExprNode::Unary(UnaryOp::Neg, a) => write!(f, "(-{a})"),
            ExprNode::Unary(op, a) => write!(f, "{}({a})", op.name()),
            ExprNode::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            ExprNode::Pow(a, r) => write!(f, "({a})^{}", fmt_rational(*r)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(src: &str, z: f64, params: &ParamSet) -> Result<f64, ExprError> {
        parse(src).unwrap().evaluate(z, params)
    }

    #[test]
    fn evaluates_simple_forms() {
        let none = ParamSet::new();
        assert_eq!(eval("z^2/4", 2.0, &none).unwrap(), 1.0);
        assert_eq!(eval("sqrt(z)", 4.0, &none).unwrap(), 2.0);
        assert!((eval("exp(ln(z))", 3.0, &none).unwrap() - 3.0).abs() < 1e-15);
        let p = ParamSet::new().with("E", -0.5).unwrap().with("l", 0.0).unwrap();
        assert_eq!(eval("2*E + 2/z - l*(l+1)/z^2", 2.0, &p).unwrap(), 0.0);
    }

    #[test]
    fn domain_errors_are_reported() {
        let none = ParamSet::new();
        match eval("1/z", 0.0, &none) {
            Err(ExprError::Domain { subexpr, .. }) => assert_eq!(subexpr, "(1.0 / z)"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(eval("ln(z)", 0.0, &none), Err(ExprError::Domain { .. })));
        assert!(matches!(eval("sqrt(z)", -1.0, &none), Err(ExprError::Domain { .. })));
        assert!(matches!(eval("z^(1/2)", -1.0, &none), Err(ExprError::Domain { .. })));
        assert!(matches!(eval("z^(-1)", 0.0, &none), Err(ExprError::Domain { .. })));
        assert!(matches!(eval("exp(z)", 1e4, &none), Err(ExprError::Domain { .. })));
    }

    #[test]
    fn unbound_parameter_is_an_error() {
        assert_eq!(eval("a*z", 1.0, &ParamSet::new()), Err(ExprError::UnboundParameter("a".into())));
    }

    #[test]
    fn odd_root_of_negative_base() {
        let v = eval("z^(1/3)", -8.0, &ParamSet::new()).unwrap();
        assert!((v + 2.0).abs() < 1e-14);
        let v = eval("z^(2/3)", -8.0, &ParamSet::new()).unwrap();
        assert!((v - 4.0).abs() < 1e-14);
        let v = eval("z^(-1/3)", -8.0, &ParamSet::new()).unwrap();
        assert!((v + 0.5).abs() < 1e-15);
    }

    #[test]
    fn derivative_examples() {
        let none = ParamSet::new();
        let d = parse("z^3").unwrap().differentiate();
        assert_eq!(d.evaluate(2.0, &none).unwrap(), 12.0);
        let d = parse("c").unwrap().differentiate();
        assert_eq!(d, ExprNode::Const(0.0));
        let d = parse("2/z").unwrap().differentiate();
        assert_eq!(d.evaluate(2.0, &none).unwrap(), -0.5);
    }

    #[test]
    fn derivative_of_functions() {
        let none = ParamSet::new();
        let cases: [(&str, f64, f64); 6] = [
            ("sqrt(z)", 4.0, 0.25),
            ("exp(2*z)", 0.0, 2.0),
            ("ln(z)", 2.0, 0.5),
            ("sin(z)", 0.0, 1.0),
            ("cos(z)", 0.0, 0.0),
            ("-z^(1/2)", 1.0, -0.5),
        ];
        for (src, z, expected) in cases {
            let d = parse(src).unwrap().differentiate();
            let got = d.evaluate(z, &none).unwrap();
            assert!((got - expected).abs() < 1e-15, "{src}: {got} vs {expected}");
        }
    }

    #[test]
    fn pole_detection() {
        let p = ParamSet::new().with("l", 1.0).unwrap();
        assert!(parse("2/z").unwrap().has_pole_at_zero(&p));
        assert!(parse("l*(l+1)/z^2").unwrap().has_pole_at_zero(&p));
        assert!(parse("z^(-1/2)").unwrap().has_pole_at_zero(&p));
        assert!(!parse("z^2 + 1").unwrap().has_pole_at_zero(&p));
        assert!(!parse("1/(z+1)").unwrap().has_pole_at_zero(&p));
    }

    #[test]
    fn display_round_trips() {
        for src in ["-z^2", "2*E + 2/z - l*(l+1)/z^2", "z^(-3/2)", "sin(-0.5*z)"] {
            let e = parse(src).unwrap();
            let again = parse(&e.to_string()).unwrap();
            assert_eq!(e, again, "{src} -> {e}");
        }
    }

    #[test]
    fn param_list_parsing() {
        let p = ParamSet::parse_list("E=-0.5, Z=1,l=0").unwrap();
        assert_eq!(p.get("E"), Some(-0.5));
        assert_eq!(p.len(), 3);
        assert!(ParamSet::parse_list("E").is_err());
        assert!(ParamSet::parse_list("E=x").is_err());
        assert!(ParamSet::new().with("a", f64::NAN).is_err());
    }
}
