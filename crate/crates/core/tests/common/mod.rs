#![allow(dead_code)]

use num_rational::Rational64;
use pim_core::expr::{BinaryOp, UnaryOp};
use pim_core::{ExprNode, ParamSet};
use proptest::prelude::*;

/// Parameter values bound for every generated expression.
pub fn params() -> ParamSet {
    ParamSet::parse_list("a=1.3,b=0.7").unwrap()
}

fn leaf() -> impl Strategy<Value = ExprNode> {
    prop_oneof![
        3 => Just(ExprNode::Var),
        2 => (0.5f64..3.0).prop_map(ExprNode::Const),
        1 => prop::sample::select(vec!["a", "b"]).prop_map(ExprNode::param),
    ]
}

/// Random expression trees of depth ≤ 6 over every operator the grammar has.
pub fn expression() -> impl Strategy<Value = ExprNode> {
    leaf().prop_recursive(6, 48, 2, |inner| {
        let unary = prop::sample::select(vec![
            UnaryOp::Neg,
            UnaryOp::Sqrt,
            UnaryOp::Exp,
            UnaryOp::Ln,
            UnaryOp::Sin,
            UnaryOp::Cos,
        ]);
        let binary = prop::sample::select(vec![BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div]);
        let exponent = prop::sample::select(vec![(2, 1), (3, 1), (-1, 1), (-2, 1), (1, 2), (-1, 2), (3, 2), (1, 3)]);
        prop_oneof![
            (unary, inner.clone()).prop_map(|(op, e)| ExprNode::unary(op, e)),
            (binary, inner.clone(), inner.clone()).prop_map(|(op, l, r)| ExprNode::binary(op, l, r)),
            (inner, exponent).prop_map(|(e, (n, d))| ExprNode::pow(e, Rational64::new(n, d))),
        ]
    })
}

/// `z` values well inside (0, ∞), where generated trees are usually defined.
pub fn safe_z() -> impl Strategy<Value = f64> {
    0.5f64..2.5
}

/// Smallest |argument| of any √, ln, divisor or non-integer/negative power
/// in `e` at `z`; `None` if a subexpression fails to evaluate.
fn nearest_branch_point(e: &ExprNode, z: f64, params: &ParamSet) -> Option<f64> {
    let arg = |a: &ExprNode| a.evaluate::<f64>(z, params).ok().map(f64::abs);
    let own = match e {
        ExprNode::Unary(UnaryOp::Sqrt | UnaryOp::Ln, a) => arg(a)?,
        ExprNode::Binary(BinaryOp::Div, _, d) => arg(d)?,
        ExprNode::Pow(b, q) if !q.is_integer() || *q.numer() < 0 => arg(b)?,
        _ => f64::INFINITY,
    };
    let children = match e {
        ExprNode::Unary(_, a) | ExprNode::Pow(a, _) => nearest_branch_point(a, z, params)?,
        ExprNode::Binary(_, l, r) => nearest_branch_point(l, z, params)?.min(nearest_branch_point(r, z, params)?),
        _ => f64::INFINITY,
    };
    Some(own.min(children))
}

/// True when `z` is in the safe domain of `e` for finite-difference checks:
/// `e` evaluates to moderate finite values on a small neighbourhood of `z`,
/// `z` is away from poles and branch points of every subexpression (a
/// cancellation such as `z/sqrt(z) - sqrt(z)` under a root leaves only
/// rounding noise there), its first two derivatives are
/// moderate (no oscillation too fast for the step), and |e| is at most 100
/// times max(1, |e′|), which keeps the difference quotient's rounding error,
/// about 3ε|e|/h, well below 1e−8 of the derivative.
pub fn is_tame(e: &ExprNode, z: f64, params: &ParamSet) -> bool {
    let limit = 1e4;
    let dz = 1e-2 * z.abs().max(1.0);
    let tame = |x: f64| e.evaluate(x, params).is_ok_and(|v: f64| v.is_finite() && v.abs() < limit);
    let value = |d: &ExprNode| d.evaluate(z, params).ok().filter(|v: &f64| v.is_finite() && v.abs() < limit);
    let first = e.differentiate();
    let (Some(f), Some(df), Some(_)) = (value(e), value(&first), value(&first.differentiate())) else {
        return false;
    };
    f.abs() <= 100.0 * df.abs().max(1.0)
        && nearest_branch_point(e, z, params).is_some_and(|d| d > 1e-3)
        && (-4..=4).all(|k| tame(z + dz * k as f64 / 4.0))
}
