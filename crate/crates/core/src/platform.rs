//! The platform function P_s = ½ z^s d/dz (1/(z^s Q)), its derivative, the
//! third-order correction Y₂ and the conventional ε₀ it generalises.
//!
//! Everything is evaluated from the expanded algebraic form
//!
//! ```text
//! P_s  = −s/(2zQ) − Q′/(2Q²)
//! P_s′ = s/(2z²Q) + sQ′/(2zQ²) − Q″/(2Q²) + Q′²/Q³
//! Y₂   = −½P_s² + ½P_s′/Q − (Q² − R − s(s−2)/(4z²))/(2Q²)
//! ```
//!
//! so no numerical differentiation is involved. dP_s/dζ is P_s′/Q; ζ itself
//! is never formed. All functions refuse points with Q² ≤ 1e−12.

use crate::base::{BaseFunction, LocalBase};
use crate::error::{Error, Result};
use crate::num::Real;

/// P_s and friends at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlatformEval<T> {
    pub z: T,
    pub p: T,
    pub dp_dz: T,
    pub y2: T,
}

fn check_origin<T: Real>(s: T, z: T) -> Result<()> {
    if s != T::zero() && z == T::zero() {
        Err(Error::SingularPoint { s: s.as_f64() })
    } else {
        Ok(())
    }
}

pub(crate) fn p_local<T: Real>(s: T, loc: &LocalBase<T>) -> T {
    let q = loc.q;
    let curvature = -loc.dq / (T::two() * q * q);
    if s == T::zero() {
        curvature
    } else {
        -s / (T::two() * loc.z * q) + curvature
    }
}

pub(crate) fn dp_local<T: Real>(s: T, loc: &LocalBase<T>) -> T {
    let (z, q, dq) = (loc.z, loc.q, loc.dq);
    let q2 = q * q;
    let base = -loc.d2q / (T::two() * q2) + dq * dq / (q2 * q);
    if s == T::zero() {
        base
    } else {
        s / (T::two() * z * z * q) + s * dq / (T::two() * z * q2) + base
    }
}

fn y2_local<T: Real>(s: T, loc: &LocalBase<T>) -> T {
    let p = p_local(s, loc);
    -T::half() * p * p + T::half() * dp_local(s, loc) / loc.q - loc.mismatch / (T::two() * loc.q2)
}

/// Q^{−3/2} d²/dz² Q^{−1/2} = ¾Q′²/Q⁴ − ½Q″/Q³.
fn schwarzian_like<T: Real>(loc: &LocalBase<T>) -> T {
    let q = loc.q;
    let q3 = q * q * q;
    T::lit(0.75) * loc.dq * loc.dq / (q3 * q) - T::half() * loc.d2q / q3
}

/// P_s(z).
pub fn platform_value<T: Real>(b: &BaseFunction<T>, z: T) -> Result<T> {
    check_origin(b.s(), z)?;
    Ok(p_local(b.s(), &b.local(z)?))
}

/// dP_s/dz. Divide by Q for dP_s/dζ.
pub fn platform_derivative<T: Real>(b: &BaseFunction<T>, z: T) -> Result<T> {
    check_origin(b.s(), z)?;
    Ok(dp_local(b.s(), &b.local(z)?))
}

/// Third-order relative correction Y₂(z).
pub fn y2<T: Real>(b: &BaseFunction<T>, z: T) -> Result<T> {
    check_origin(b.s(), z)?;
    Ok(y2_local(b.s(), &b.local(z)?))
}

/// ε₀ computed the conventional way, Q^{−3/2}(Q^{−1/2})″ + (R − Q²)/Q².
/// Independent of P_s; equals 2Y₂ when s = 0.
pub fn epsilon0<T: Real>(b: &BaseFunction<T>, z: T) -> Result<T> {
    let loc = b.local(z)?;
    Ok(schwarzian_like(&loc) + (loc.r - loc.q2) / loc.q2)
}

/// All platform quantities at `z`.
pub fn evaluate<T: Real>(b: &BaseFunction<T>, z: T) -> Result<PlatformEval<T>> {
    check_origin(b.s(), z)?;
    let loc = b.local(z)?;
    let s = b.s();
    Ok(PlatformEval { z, p: p_local(s, &loc), dp_dz: dp_local(s, &loc), y2: y2_local(s, &loc) })
}

/// Pluggable P_s evaluators, so the identity checks can be pointed at a
/// deliberately broken implementation.
#[derive(Clone, Copy)]
pub struct PlatformOps<T> {
    pub value: fn(&BaseFunction<T>, T) -> Result<T>,
    pub derivative: fn(&BaseFunction<T>, T) -> Result<T>,
}

impl<T: Real> PlatformOps<T> {
    pub fn standard() -> Self {
        Self { value: platform_value, derivative: platform_derivative }
    }
}

impl<T: Real> Default for PlatformOps<T> {
    fn default() -> Self {
        Self::standard()
    }
}

impl<T> std::fmt::Debug for PlatformOps<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PlatformOps").finish_non_exhaustive()
    }
}

/// |LHS − RHS| of
/// Q^{−3/2}(Q^{−1/2})″ = P_s′/Q − P_s² + s(s−2)/(4z²Q²).
pub fn identity_residual<T: Real>(b: &BaseFunction<T>, z: T) -> Result<T> {
    identity_residual_with(&PlatformOps::standard(), b, z)
}

pub fn identity_residual_with<T: Real>(ops: &PlatformOps<T>, b: &BaseFunction<T>, z: T) -> Result<T> {
    check_origin(b.s(), z)?;
    let loc = b.local(z)?;
    let lhs = schwarzian_like(&loc);
    let p = (ops.value)(b, z)?;
    let dp = (ops.derivative)(b, z)?;
    let c = b.spec().s_term();
    let centrifugal = if c == T::zero() { T::zero() } else { c / (z * z * loc.q2) };
    let rhs = dp / loc.q - p * p + centrifugal;
    Ok((lhs - rhs).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::BaseSpec;
    use crate::expr::{parse, ParamSet};
    use crate::num::Interval;
    use crate::oracle::fd_derivative;
    use crate::potential::Potential;

    fn builtin(name: &str, list: &str) -> Potential<f64> {
        Potential::builtin(name, &ParamSet::parse_list(list).unwrap()).unwrap()
    }

    fn airy() -> BaseFunction<f64> {
        BaseFunction::new(builtin("airy", ""), BaseSpec::unmodified()).unwrap()
    }

    fn constant_q(s: f64) -> BaseFunction<f64> {
        let src = if s == 0.0 { "1" } else { "1 + 1/(4*z^2)" };
        let domain = if s == 0.0 { Interval::real_line() } else { Interval::positive() };
        let p = Potential::parse(src, &ParamSet::new(), domain).unwrap();
        BaseFunction::new(p, BaseSpec::custom(s)).unwrap()
    }

    #[test]
    fn constant_q_platform() {
        let b = constant_q(0.0);
        for z in [-3.0, 0.0, 0.5, 7.0] {
            assert_eq!(platform_value(&b, z).unwrap(), 0.0);
            assert_eq!(platform_derivative(&b, z).unwrap(), 0.0);
            assert_eq!(y2(&b, z).unwrap(), 0.0);
            assert_eq!(epsilon0(&b, z).unwrap(), 0.0);
            assert_eq!(identity_residual(&b, z).unwrap(), 0.0);
        }
        // R = 1 + 1/(4z²), s = 1 gives Q ≡ 1
        let b = constant_q(1.0);
        assert!((b.q(2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((platform_value(&b, 2.0).unwrap() + 0.25).abs() < 1e-15);
        assert!((platform_derivative(&b, 2.0).unwrap() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn airy_closed_forms() {
        let b = airy();
        // P₀ = −¼ z^{−3/2}
        assert!((platform_value(&b, 1.0).unwrap() + 0.25).abs() < 1e-15);
        assert!((platform_derivative(&b, 1.0).unwrap() - 0.375).abs() < 1e-15);
        assert!((y2(&b, 2.0).unwrap() - 0.01953125).abs() < 1e-16);
        assert!((epsilon0(&b, 2.0).unwrap() - 5.0 / 128.0).abs() < 1e-16);
    }

    #[test]
    fn airy_platform_against_finite_differences() {
        let b = airy();
        // ½ d/dz (1/Q) by finite differences
        for z in [1.0, 2.0, 5.5] {
            let fd = 0.5 * fd_derivative(|x| b.q(x).map(|q| 1.0 / q), z, 1).unwrap();
            assert!((platform_value(&b, z).unwrap() - fd).abs() < 1e-10);
            let fd = fd_derivative(|x| platform_value(&b, x), z, 1).unwrap();
            assert!((platform_derivative(&b, z).unwrap() - fd).abs() < 1e-7);
        }
        let fd = fd_derivative(|x| platform_value(&b, x), 2.0, 1).unwrap();
        assert!((fd - platform_derivative(&b, 2.0).unwrap()).abs() < 1e-7);
    }

    #[test]
    fn override_y2_and_epsilon0() {
        let one = Potential::parse("1", &ParamSet::new(), Interval::real_line()).unwrap();
        let b = BaseFunction::with_q2_override(one, BaseSpec::unmodified(), &parse("2").unwrap(), &ParamSet::new())
            .unwrap();
        for z in [-1.0, 0.0, 3.0] {
            assert_eq!(platform_value(&b, z).unwrap(), 0.0);
            assert_eq!(y2(&b, z).unwrap(), -0.25);
            assert_eq!(epsilon0(&b, z).unwrap(), -0.5);
        }
    }

    #[test]
    fn identity_holds_on_examples() {
        let b = airy();
        for i in 1..=10 {
            assert!(identity_residual(&b, i as f64).unwrap() < 1e-10);
        }
        let c = BaseFunction::new(builtin("coulomb", "E=-0.5,Z=1,l=0"), BaseSpec::kramers_langer()).unwrap();
        assert!(identity_residual(&c, 1.0).unwrap() < 1e-10);
    }

    #[test]
    fn identity_detects_wrong_sign() {
        // sign error in the s-term of P_s
        fn wrong_sign(b: &BaseFunction<f64>, z: f64) -> Result<f64> {
            let q = b.q(z)?;
            platform_value(b, z).map(|p| p + b.s() / (z * q))
        }
        let ops = PlatformOps { value: wrong_sign, derivative: platform_derivative };
        let c = BaseFunction::new(builtin("coulomb", "E=-0.5,Z=1,l=0"), BaseSpec::kramers_langer()).unwrap();
        assert!(identity_residual_with(&ops, &c, 1.0).unwrap() > 1e-3);
        let ops = PlatformOps {
            value: platform_value,
            derivative: |b: &BaseFunction<f64>, z| platform_derivative(b, z).map(|d| -d),
        };
        assert!(identity_residual_with(&ops, &airy(), 2.0).unwrap() > 1e-3);
    }

    #[test]
    fn singular_origin_and_forbidden_points() {
        let c = BaseFunction::new(builtin("radial-free", "k=1,l=1"), BaseSpec::no_centrifugal(1.0)).unwrap();
        assert!(matches!(platform_value(&c, 0.0), Err(Error::SingularPoint { .. })));
        assert!(matches!(c.q(0.0), Err(Error::SingularPoint { .. } | Error::OutsideDomain { .. })));
        let b = airy();
        assert!(matches!(y2(&b, -0.5), Err(Error::Forbidden { .. })));
        assert!(matches!(platform_value(&b, 1e-13), Err(Error::Forbidden { .. })));
    }

    #[test]
    fn single_precision_airy() {
        let p = Potential::<f32>::builtin("airy", &ParamSet::new()).unwrap();
        let b = BaseFunction::new(p, BaseSpec::unmodified()).unwrap();
        let v = y2(&b, 2.0f32).unwrap();
        assert!((v - 0.019_531_25).abs() < 1e-7);
    }
}
