//! Adaptive Gauss–Kronrod (G7/K15) quadrature on real intervals.
//!
//! Panels are kept in a priority queue keyed by their error estimate
//! |K15 − G7|; the worst panel is bisected until the summed estimate drops
//! below max(abs_tol, rel_tol·|value|).

// node and weight tables are quoted to more digits than f64 holds
#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::num::Real;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];

/// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Evaluations per panel.
const PANEL_EVALS: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    pub error_estimate: T,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_evaluations: usize,
}

impl<T: Real> QuadOptions<T> {
    pub fn new(abs_tol: T, rel_tol: T) -> Self {
        Self { abs_tol, rel_tol, max_evaluations: 1_000_000 }
    }
}

impl<T: Real> Default for QuadOptions<T> {
    /// abs 1e−12, rel 1e−10 (raised to 100ε for coarser types), at most 10⁶ evaluations.
    fn default() -> Self {
        let floor = T::lit(100.0) * T::epsilon();
        Self::new(T::lit(1e-12).max(floor), T::lit(1e-10).max(floor))
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

impl<T: Real> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Real> Eq for Panel<T> {}

impl<T: Real> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Real> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(Ordering::Equal)
            // ties broken by position keep the split order deterministic
            .then_with(|| other.a.partial_cmp(&self.a).unwrap_or(Ordering::Equal))
    }
}

fn kronrod_panel<T, F>(f: &mut F, a: T, b: T) -> Result<Panel<T>>
where
    T: Real,
    F: FnMut(T) -> Result<T>,
{
    let center = T::half() * (a + b);
    let half = T::half() * (b - a);
    let mut check = |x: T| -> Result<T> {
        let v = f(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite { z: x.as_f64() })
        }
    };
    let fc = check(center)?;
    let mut kronrod = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let sum = check(center - dx)? + check(center + dx)?;
        kronrod = kronrod + T::lit(WGK[j]) * sum;
        if j % 2 == 1 {
            gauss = gauss + T::lit(WG[j / 2]) * sum;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    Ok(Panel { a, b, value, error })
}

/// ∫ₐᵇ f for an infallible integrand.
pub fn integrate<T, F>(mut f: F, a: T, b: T, abs_tol: T, rel_tol: T) -> Result<QuadResult<T>>
where
    T: Real,
    F: FnMut(T) -> T,
{
    try_integrate(|x| Ok(f(x)), a, b, &QuadOptions::new(abs_tol, rel_tol))
}

/// ∫ₐᵇ f for an integrand that may fail (e.g. on entering a forbidden region).
///
/// `b < a` gives the oriented integral. Fails with [`Error::Quadrature`] when
/// the evaluation budget runs out or panels can no longer be split, which
/// signals a (near-)singular integrand.
pub fn try_integrate<T, F>(mut f: F, a: T, b: T, opts: &QuadOptions<T>) -> Result<QuadResult<T>>
where
    T: Real,
    F: FnMut(T) -> Result<T>,
{
    if !(opts.abs_tol > T::zero()) || !(opts.rel_tol > T::zero()) {
        return Err(Error::InvalidArgument("quadrature tolerances must be positive".into()));
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidArgument(format!("integration limits must be finite, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadResult { value: T::zero(), error_estimate: T::zero(), evaluations: 0 });
    }
    let (lo, hi, sign) = if a < b { (a, b, T::one()) } else { (b, a, -T::one()) };

    let first = kronrod_panel(&mut f, lo, hi)?;
    let mut evaluations = PANEL_EVALS;
    let mut value = first.value;
    let mut error = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);

    let fail = |evaluations: usize, error: T| Error::Quadrature {
        a: a.as_f64(),
        b: b.as_f64(),
        evaluations,
        error_estimate: error.as_f64(),
    };

    loop {
        if error <= opts.abs_tol.max(opts.rel_tol * value.abs()) {
            // resum to shed drift from the running totals
            value = heap.iter().fold(T::zero(), |acc, p| acc + p.value);
            error = heap.iter().fold(T::zero(), |acc, p| acc + p.error);
            if error <= opts.abs_tol.max(opts.rel_tol * value.abs()) {
                return Ok(QuadResult { value: sign * value, error_estimate: error, evaluations });
            }
        }
        if evaluations + 2 * PANEL_EVALS > opts.max_evaluations {
            return Err(fail(evaluations, error));
        }
        let worst = heap.pop().expect("at least one panel");
        let mid = T::half() * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b || (worst.b - worst.a) <= T::lit(4.0) * T::epsilon() * mid.abs() {
            return Err(fail(evaluations, error));
        }
        let left = kronrod_panel(&mut f, worst.a, mid)?;
        let right = kronrod_panel(&mut f, mid, worst.b)?;
        evaluations += 2 * PANEL_EVALS;
        value = value - worst.value + left.value + right.value;
        error = error - worst.error + left.error + right.error;
        heap.push(left);
        heap.push(right);
    }
}

/// ∫ from `a` to a simple turning point `tp` of an integrand behaving like
/// C·|z − tp|^{±1/2} there.
///
/// Substitutes z = tp + σu² (σ = sign(a − tp)), which turns the endpoint
/// behaviour into a smooth integrand in u. Exact in character for √(tp − z).
/// The result is oriented: it is the integral *from* `a` *to* `tp`.
pub fn integrate_to_turning_point<T, F>(mut f: F, a: T, tp: T, abs_tol: T) -> Result<QuadResult<T>>
where
    T: Real,
    F: FnMut(T) -> T,
{
    let opts = QuadOptions { abs_tol, ..QuadOptions::default() };
    try_integrate_to_turning_point(|x| Ok(f(x)), a, tp, &opts)
}

pub fn try_integrate_to_turning_point<T, F>(mut f: F, a: T, tp: T, opts: &QuadOptions<T>) -> Result<QuadResult<T>>
where
    T: Real,
    F: FnMut(T) -> Result<T>,
{
    let d = a - tp;
    if d == T::zero() {
        return Ok(QuadResult { value: T::zero(), error_estimate: T::zero(), evaluations: 0 });
    }
    let sigma = d.signum();
    let u_max = d.abs().sqrt();
    // ∫_a^tp f dz = −σ ∫_0^{√|d|} 2u f(tp + σu²) du
    let inner = try_integrate(|u: T| Ok(T::two() * u * f(tp + sigma * u * u)?), T::zero(), u_max, opts)?;
    Ok(QuadResult { value: -sigma * inner.value, ..inner })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_sqrt() {
        let r = integrate(|_| 1.0, 0.0, 1.0, 1e-12, 1e-10).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.evaluations, 15);
        let r = integrate(|z: f64| z.sqrt(), 1.0, 4.0, 1e-12, 1e-14).unwrap();
        assert!((r.value - 14.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn reversed_limits_are_oriented() {
        let fwd = integrate(|z: f64| z.exp(), 0.0, 2.0, 1e-13, 1e-13).unwrap();
        let rev = integrate(|z: f64| z.exp(), 2.0, 0.0, 1e-13, 1e-13).unwrap();
        assert_eq!(fwd.value, -rev.value);
        assert!((fwd.value - (2f64.exp() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn polynomials_are_exact() {
        // G7 is exact to degree 13, so K15 − G7 vanishes up to rounding
        let p = |z: f64| 3.0 * z.powi(13) - 2.0 * z.powi(7) + z.powi(2) - 5.0;
        let exact = |z: f64| 3.0 / 14.0 * z.powi(14) - 0.25 * z.powi(8) + z.powi(3) / 3.0 - 5.0 * z;
        let r = integrate(p, -1.0, 1.5, 1e-12, 1e-12).unwrap();
        assert!((r.value - (exact(1.5) - exact(-1.0))).abs() < 1e-12);
        assert_eq!(r.evaluations, 15);
    }

    #[test]
    fn near_singular_endpoint() {
        let a = 1e-8;
        let r = integrate(|z: f64| z.powf(-0.5), a, 1.0, 1e-10, 1e-10).unwrap();
        let exact = 2.0 * (1.0 - a.sqrt());
        assert!((r.value - exact).abs() < 1e-9, "{} vs {exact}", r.value);
        assert!((r.value - 1.9998).abs() < 1e-12 + 1e-9);
    }

    #[test]
    fn singular_integrand_exhausts_budget() {
        let opts = QuadOptions { max_evaluations: 20_000, ..QuadOptions::default() };
        let err = try_integrate(|z: f64| Ok(1.0 / z), 0.0, 1.0, &opts).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }

    #[test]
    fn integrand_errors_propagate() {
        let err = try_integrate(|z: f64| if z > 0.5 { Err(Error::Forbidden { z, q2: -1.0 }) } else { Ok(z) }, 0.0, 1.0, &QuadOptions::default())
            .unwrap_err();
        assert!(matches!(err, Error::Forbidden { .. }));
        let err = try_integrate(|_: f64| Ok(f64::NAN), 0.0, 1.0, &QuadOptions::default()).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
    }

    #[test]
    fn turning_point_substitution() {
        let r = integrate_to_turning_point(|z: f64| (1.0 - z).max(0.0).sqrt(), 0.0, 1.0, 1e-12).unwrap();
        assert!((r.value - 2.0 / 3.0).abs() < 1e-10);
        // oriented: from 0.25 down to the turning point at 0
        let r = integrate_to_turning_point(|z: f64| z.max(0.0).sqrt(), 0.25, 0.0, 1e-12).unwrap();
        assert!((r.value + 1.0 / 12.0).abs() < 1e-10);
        // inverse square-root endpoint is regularised too
        let r = integrate_to_turning_point(|z: f64| 1.0 / z.sqrt(), 1.0, 0.0, 1e-12).unwrap();
        assert!((r.value + 2.0).abs() < 1e-10);
    }

    #[test]
    fn deterministic() {
        let f = |z: f64| (5.0 * z).sin() / (1.0 + z * z);
        let a = integrate(f, -3.0, 7.0, 1e-13, 1e-13).unwrap();
        let b = integrate(f, -3.0, 7.0, 1e-13, 1e-13).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_precision_defaults() {
        let r = try_integrate(|z: f32| Ok(z * z), 0.0f32, 3.0, &QuadOptions::default()).unwrap();
        assert!((r.value - 9.0).abs() < 1e-5);
    }
}
