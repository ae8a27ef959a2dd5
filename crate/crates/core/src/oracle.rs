//! Reference solutions of ψ″ + R(z)ψ = 0 and accuracy comparisons.
//!
//! The equation is integrated as the first-order system (ψ, ψ′) with the
//! Dormand–Prince 5(4) embedded pair and standard step-size control. ψ is
//! complex; R is real.

use num_complex::Complex;

use crate::base::{BaseFunction, BaseSpec};
use crate::error::{Error, Result};
use crate::num::Real;
use crate::pim::{ExpansionOrder, PhaseApprox};
use crate::potential::Potential;

/// Numerical solution sampled on a strictly monotone grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution<T> {
    pub grid: Vec<T>,
    pub psi: Vec<Complex<T>>,
    pub dpsi: Vec<Complex<T>>,
    pub tol: T,
}

impl<T: Real> OracleSolution<T> {
    /// Value at the last grid point.
    pub fn last(&self) -> (T, Complex<T>, Complex<T>) {
        let i = self.grid.len() - 1;
        (self.grid[i], self.psi[i], self.dpsi[i])
    }
}

/// Relative errors of ψ₊ at a probe point for both orders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderComparison<T> {
    pub err_first: T,
    pub err_third: T,
}

impl<T: Real> OrderComparison<T> {
    /// err_third / err_first.
    pub fn ratio(&self) -> T {
        self.err_third / self.err_first
    }
}

/// Central difference with one Richardson extrapolation step, (4D(h/2) − D(h))/3.
///
/// First derivatives use h = max(1e−5, 1e−5·|z|). Second derivatives use
/// h = max(1e−3, 1e−3·|z|): the second difference divides rounding noise by
/// h², and the smaller step would leave only ~5 correct digits.
pub fn fd_derivative<T, F, E>(f: F, z: T, order: u8) -> Result<T>
where
    T: Real,
    F: Fn(T) -> Result<T, E>,
    Error: From<E>,
{
    let scale = z.abs().max(T::one());
    match order {
        1 => {
            let h = T::lit(1e-5) * scale;
            let d = |h: T| -> Result<T> { Ok((f(z + h)? - f(z - h)?) / (T::two() * h)) };
            let (coarse, fine) = (d(h)?, d(T::half() * h)?);
            Ok((T::lit(4.0) * fine - coarse) / T::lit(3.0))
        }
        2 => {
            let h = T::lit(1e-3) * scale;
            let center = f(z)?;
            let d = |h: T| -> Result<T> { Ok((f(z + h)? - T::two() * center + f(z - h)?) / (h * h)) };
            let (coarse, fine) = (d(h)?, d(T::half() * h)?);
            Ok((T::lit(4.0) * fine - coarse) / T::lit(3.0))
        }
        other => Err(Error::InvalidArgument(format!("finite-difference order must be 1 or 2, got {other}"))),
    }
}

// Dormand–Prince 5(4)
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Difference between the 5th- and 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const MAX_STEPS: usize = 10_000_000;

#[derive(Clone, Copy)]
struct State<T> {
    psi: Complex<T>,
    dpsi: Complex<T>,
}

struct Stepper<'a, T> {
    potential: &'a Potential<T>,
    tol: T,
}

impl<T: Real> Stepper<'_, T> {
    fn rhs(&self, z: T, y: State<T>) -> Result<State<T>> {
        Ok(State { psi: y.dpsi, dpsi: -y.psi * self.potential.r(z)? })
    }

    /// One trial step; returns the 5th-order solution and the scaled error norm.
    fn attempt(&self, z: T, y: State<T>, k1: State<T>, h: T) -> Result<(State<T>, State<T>, T)> {
        let mut k = [k1; 7];
        for i in 1..7 {
            let mut psi = y.psi;
            let mut dpsi = y.dpsi;
            for j in 0..i {
                let a = T::lit(A[i][j]) * h;
                if a != T::zero() {
                    psi = psi + k[j].psi * a;
                    dpsi = dpsi + k[j].dpsi * a;
                }
            }
            k[i] = self.rhs(z + T::lit(C[i]) * h, State { psi, dpsi })?;
        }
        // the last stage is evaluated at the new point (FSAL)
        let mut psi_new = y.psi;
        let mut dpsi_new = y.dpsi;
        for j in 0..6 {
            psi_new = psi_new + k[j].psi * (T::lit(A[6][j]) * h);
            dpsi_new = dpsi_new + k[j].dpsi * (T::lit(A[6][j]) * h);
        }
        let mut err_psi = Complex::new(T::zero(), T::zero());
        let mut err_dpsi = err_psi;
        for j in 0..7 {
            err_psi = err_psi + k[j].psi * (T::lit(E[j]) * h);
            err_dpsi = err_dpsi + k[j].dpsi * (T::lit(E[j]) * h);
        }
        let sc = |old: Complex<T>, new: Complex<T>| self.tol * (T::one() + old.norm().max(new.norm()));
        let norm = (err_psi.norm() / sc(y.psi, psi_new)).max(err_dpsi.norm() / sc(y.dpsi, dpsi_new));
        Ok((State { psi: psi_new, dpsi: dpsi_new }, k[6], norm))
    }
}

fn validate<T: Real>(p: &Potential<T>, z0: T, points: &[T], tol: T) -> Result<()> {
    if !(tol >= T::lit(1e-13) && tol <= T::lit(1e-6)) {
        return Err(Error::InvalidArgument(format!("oracle tolerance must lie in [1e-13, 1e-6], got {tol}")));
    }
    let domain = p.domain();
    for &z in std::iter::once(&z0).chain(points) {
        if !domain.contains(z) {
            return Err(Error::OutsideDomain { z: z.as_f64(), lo: domain.lo.as_f64(), hi: domain.hi.as_f64() });
        }
    }
    Ok(())
}

/// Integrates from `z0` to `z1`, recording every accepted step.
pub fn solve_ivp<T: Real>(
    p: &Potential<T>,
    z0: T,
    psi0: Complex<T>,
    dpsi0: Complex<T>,
    z1: T,
    tol: T,
) -> Result<OracleSolution<T>> {
    integrate(p, z0, psi0, dpsi0, &[z1], tol, true)
}

/// Integrates from `z0` through `grid`, which must be strictly monotone and
/// lead away from `z0`; the solution is reported at exactly those points.
pub fn solve_on_grid<T: Real>(
    p: &Potential<T>,
    z0: T,
    psi0: Complex<T>,
    dpsi0: Complex<T>,
    grid: &[T],
    tol: T,
) -> Result<OracleSolution<T>> {
    integrate(p, z0, psi0, dpsi0, grid, tol, false)
}

fn integrate<T: Real>(
    p: &Potential<T>,
    z0: T,
    psi0: Complex<T>,
    dpsi0: Complex<T>,
    targets: &[T],
    tol: T,
    record_steps: bool,
) -> Result<OracleSolution<T>> {
    validate(p, z0, targets, tol)?;
    let Some(&last) = targets.last() else {
        return Err(Error::InvalidArgument("empty output grid".into()));
    };
    let direction = if last >= z0 { T::one() } else { -T::one() };
    let mut previous = z0;
    for &t in targets {
        if (t - previous) * direction < T::zero() || (t == previous && t != z0) {
            return Err(Error::InvalidArgument("output grid must be strictly monotone away from z0".into()));
        }
        previous = t;
    }

    let stepper = Stepper { potential: p, tol };
    let mut z = z0;
    let mut y = State { psi: psi0, dpsi: dpsi0 };
    let mut out = OracleSolution { grid: vec![z0], psi: vec![psi0], dpsi: vec![dpsi0], tol };
    if !record_steps {
        out = OracleSolution { grid: Vec::new(), psi: Vec::new(), dpsi: Vec::new(), tol };
    }
    let mut k1 = stepper.rhs(z, y)?;

    let span = (last - z0).abs();
    let r0 = p.r(z0)?.abs();
    let mut h = (T::lit(0.01) * span).min(T::lit(0.1) / (r0.sqrt() + T::one())).max(T::lit(1e-6) * span) * direction;
    let mut steps = 0usize;

    for &target in targets {
        while (target - z) * direction > T::zero() {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::StepUnderflow { z: z.as_f64() });
            }
            let remaining = target - z;
            let landing = h.abs() >= remaining.abs();
            let step = if landing { remaining } else { h };
            if step.abs() < T::lit(1e-14) * z.abs().max(T::one()) && !landing {
                return Err(Error::StepUnderflow { z: z.as_f64() });
            }
            let (y_new, k_new, err) = stepper.attempt(z, y, k1, step)?;
            let factor = if err == T::zero() {
                T::lit(5.0)
            } else {
                (T::lit(0.9) * err.powf(T::lit(-0.2))).min(T::lit(5.0)).max(T::lit(0.2))
            };
            if err <= T::one() {
                z = if landing { target } else { z + step };
                y = y_new;
                k1 = k_new;
                if record_steps {
                    out.grid.push(z);
                    out.psi.push(y.psi);
                    out.dpsi.push(y.dpsi);
                }
                // keep the unclamped step length after landing on a target
                if !landing || factor < T::one() {
                    h = step * factor;
                }
            } else {
                h = step * factor.min(T::one());
                if h.abs() < T::lit(1e-14) * z.abs().max(T::one()) {
                    return Err(Error::StepUnderflow { z: z.as_f64() });
                }
            }
        }
        if !record_steps {
            out.grid.push(target);
            out.psi.push(y.psi);
            out.dpsi.push(y.dpsi);
        }
    }
    if out.psi.iter().chain(&out.dpsi).any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::NonFinite { z: z.as_f64() });
    }
    Ok(out)
}

/// Builds ψ₊ at both orders, seeds the oracle at `anchor` with the
/// third-order ψ₊ and its Richardson-differenced derivative, integrates to
/// `probe`, and reports |ψ₊⁽ᵏ⁾ − ψ| / |ψ| there.
///
/// Seeding from the third-order solution picks the exact solution being
/// approximated, so err_third vanishes at the anchor by construction.
pub fn compare_orders<T: Real>(
    p: &Potential<T>,
    spec: BaseSpec<T>,
    anchor: T,
    probe: T,
    tol: T,
) -> Result<OrderComparison<T>> {
    let base = BaseFunction::new(p.clone(), spec)?;
    let first = PhaseApprox::new(base.clone(), ExpansionOrder::First, anchor)?;
    let third = PhaseApprox::new(base, ExpansionOrder::Third, anchor)?;
    let psi0 = third.value(anchor)?;
    let dpsi0 = third.derivative(anchor)?;
    let solution = solve_on_grid(p, anchor, psi0, dpsi0, &[probe], tol)?;
    let (_, exact, _) = solution.last();
    let rel = |approx: Complex<T>| (approx - exact).norm() / exact.norm();
    Ok(OrderComparison { err_first: rel(first.value(probe)?), err_third: rel(third.value(probe)?) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ParamSet;
    use crate::num::Interval;

    fn expr(src: &str) -> Potential<f64> {
        Potential::parse(src, &ParamSet::new(), Interval::real_line()).unwrap()
    }

    fn c(re: f64) -> Complex<f64> {
        Complex::new(re, 0.0)
    }

    #[test]
    fn finite_difference_examples() {
        let d = fd_derivative(|z: f64| Ok::<_, Error>(z * z), 3.0, 1).unwrap();
        assert!((d - 6.0).abs() < 1e-10);
        let d = fd_derivative(|z: f64| Ok::<_, Error>(z.powf(-0.5)), 1.0, 2).unwrap();
        assert!((d - 0.75).abs() < 1e-7);
        assert!(fd_derivative(|z: f64| Ok::<_, Error>(z), 1.0, 3).is_err());
    }

    #[test]
    fn fd_matches_platform_derivative() {
        let base = BaseFunction::<f64>::new(
            Potential::builtin("airy", &ParamSet::new()).unwrap(),
            BaseSpec::unmodified(),
        )
        .unwrap();
        let fd = fd_derivative(|z| crate::platform::platform_value(&base, z), 2.0, 1).unwrap();
        assert!((fd - crate::platform::platform_derivative(&base, 2.0).unwrap()).abs() < 1e-7);
    }

    #[test]
    fn exponential_growth() {
        let sol = solve_ivp(&expr("-1"), 0.0, c(1.0), c(1.0), 1.0, 1e-12).unwrap();
        let (z, psi, _) = sol.last();
        assert_eq!(z, 1.0);
        assert!((psi.re - std::f64::consts::E).abs() < 1e-10);
        assert!(sol.grid.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn sine() {
        let half_pi = std::f64::consts::FRAC_PI_2;
        let sol = solve_ivp(&expr("1"), 0.0, c(0.0), c(1.0), half_pi, 1e-12).unwrap();
        let (_, psi, dpsi) = sol.last();
        assert!((psi.re - 1.0).abs() < 1e-10);
        assert!(dpsi.re.abs() < 1e-10);
    }

    #[test]
    fn backward_integration_on_grid() {
        let grid = [2.0, 1.0, 0.0];
        let sol = solve_on_grid(&expr("1"), 3.0, c(3f64.sin()), c(3f64.cos()), &grid, 1e-12).unwrap();
        assert_eq!(sol.grid, grid.to_vec());
        for (z, psi) in sol.grid.iter().zip(&sol.psi) {
            assert!((psi.re - z.sin()).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let coulomb = Potential::builtin("coulomb", &ParamSet::parse_list("E=-0.5,Z=1,l=0").unwrap()).unwrap();
        assert!(matches!(solve_ivp(&coulomb, 1.0, c(1.0), c(0.0), -1.0, 1e-10), Err(Error::OutsideDomain { .. })));
        assert!(matches!(solve_ivp(&expr("1"), 0.0, c(1.0), c(0.0), 1.0, 1e-3), Err(Error::InvalidArgument(_))));
        assert!(matches!(
            solve_on_grid(&expr("1"), 0.0, c(1.0), c(0.0), &[1.0, 0.5], 1e-10),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn airy_amplitude_law() {
        let base = BaseFunction::new(Potential::builtin("airy", &ParamSet::new()).unwrap(), BaseSpec::unmodified())
            .unwrap();
        let third = PhaseApprox::new(base, ExpansionOrder::Third, 10.0).unwrap();
        let p = Potential::builtin("airy", &ParamSet::new()).unwrap();
        let grid: Vec<f64> = (0..=28).map(|i| 10.0 - 0.25 * i as f64).collect();
        let sol = solve_on_grid(&p, 10.0, third.value(10.0).unwrap(), third.derivative(10.0).unwrap(), &grid[1..], 1e-12)
            .unwrap();
        for (z, psi) in sol.grid.iter().zip(&sol.psi) {
            let law = z.powf(-0.25);
            assert!((psi.norm() / law - 1.0).abs() < 0.01, "z = {z}");
        }
    }

    #[test]
    fn compare_orders_exact_case() {
        let cmp = compare_orders(&expr("1"), BaseSpec::unmodified(), 0.0, 3.0, 1e-12).unwrap();
        assert!(cmp.err_first < 1e-9 && cmp.err_third < 1e-9, "{cmp:?}");
    }

    #[test]
    fn compare_orders_coulomb() {
        let coulomb = Potential::builtin("coulomb", &ParamSet::parse_list("E=0.5,Z=1,l=0").unwrap()).unwrap();
        let cmp = compare_orders(&coulomb, BaseSpec::kramers_langer(), 30.0, 10.0, 1e-12).unwrap();
        assert!(cmp.err_third < cmp.err_first, "{cmp:?}");
    }
}
