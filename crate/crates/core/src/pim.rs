//! First- and third-order phase-integral solutions ψ± of ψ″ + R(z)ψ = 0.
//!
//! With q₁ = Q and
//!
//! ```text
//! q₃ = ½P_s′ + (1 − ½P_s²)Q − (Q² − R − s(s−2)/(4z²))/(2Q)
//! ```
//!
//! the solutions are ψ± = q^{−1/2} exp(±iφ) where φ′ = q. For the third
//! order the ½P_s′ piece of the integrand is a total derivative, so the
//! phase is assembled as a boundary term plus a smooth integral:
//!
//! ```text
//! φ₃(z) = ½[P_s(z) − P_s(a)] + ∫ₐᶻ ((1 − ½P_s²)Q − mismatch/(2Q)) dz
//! ```
//!
//! The anchor `a` must be a regular point. Turning points are excluded
//! because P_s diverges there, so phases are always measured from a
//! user-chosen anchor in the allowed region. The mismatch term vanishes for
//! the default Q²; with an overridden Q² the third-order output is
//! experimental.

use num_complex::Complex;

use crate::base::BaseFunction;
use crate::error::{Error, Result};
use crate::num::{Real, TURNING_POINT_GUARD};
use crate::platform::{dp_local, p_local};
use crate::quad::{try_integrate, QuadOptions};

/// Truncation order of the expansion q = Q(Y₀ + Y₂ + …).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExpansionOrder {
    /// q = Q
    First,
    /// q = Q(1 + Y₂)
    Third,
}

impl ExpansionOrder {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "1" | "first" => Ok(ExpansionOrder::First),
            "3" | "third" => Ok(ExpansionOrder::Third),
            other => Err(Error::InvalidArgument(format!("order must be 1 or 3, got `{other}`"))),
        }
    }
}

/// Which of ψ₊ / ψ₋ [`PhaseApprox::value`] returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Plus,
    Minus,
}

/// An assembled first- or third-order approximation anchored at a regular point.
#[derive(Debug, Clone)]
pub struct PhaseApprox<T> {
    base: BaseFunction<T>,
    order: ExpansionOrder,
    anchor: T,
    branch: Branch,
    quad: QuadOptions<T>,
}

impl<T: Real> PhaseApprox<T> {
    /// Fails if the anchor is a turning point or lies in a forbidden region.
    pub fn new(base: BaseFunction<T>, order: ExpansionOrder, anchor: T) -> Result<Self> {
        let q2 = base.q2(anchor)?;
        if !(q2 > T::lit(TURNING_POINT_GUARD)) {
            return Err(Error::Forbidden { z: anchor.as_f64(), q2: q2.as_f64() });
        }
        if base.s() != T::zero() && anchor == T::zero() {
            return Err(Error::SingularPoint { s: base.s().as_f64() });
        }
        Ok(Self { base, order, anchor, branch: Branch::Plus, quad: QuadOptions::default() })
    }

    pub fn with_branch(mut self, branch: Branch) -> Self {
        self.branch = branch;
        self
    }

    pub fn with_quad_options(mut self, quad: QuadOptions<T>) -> Self {
        self.quad = quad;
        self
    }

    pub fn base(&self) -> &BaseFunction<T> {
        &self.base
    }

    pub fn order(&self) -> ExpansionOrder {
        self.order
    }

    pub fn anchor(&self) -> T {
        self.anchor
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    /// Same approximation re-anchored at `anchor`.
    pub fn reanchored(&self, anchor: T) -> Result<Self> {
        let mut out = Self::new(self.base.clone(), self.order, anchor)?;
        out.branch = self.branch;
        out.quad = self.quad;
        Ok(out)
    }

    /// Rejects paths from the anchor that touch the turning-point guard.
    fn check_path(&self, z: T) -> Result<()> {
        const SAMPLES: usize = 32;
        let guard = T::lit(TURNING_POINT_GUARD);
        for i in 1..=SAMPLES {
            let x = self.anchor + (z - self.anchor) * T::lit(i as f64 / SAMPLES as f64);
            let q2 = self.base.q2(x)?;
            if !(q2 > guard) {
                return Err(Error::Forbidden { z: x.as_f64(), q2: q2.as_f64() });
            }
        }
        Ok(())
    }

    fn smooth_integrand(&self, x: T) -> Result<T> {
        let loc = self.base.local(x)?;
        let p = p_local(self.base.s(), &loc);
        Ok((T::one() - T::half() * p * p) * loc.q - loc.mismatch / (T::two() * loc.q))
    }

    /// φ(z), the phase accumulated from the anchor.
    pub fn phase(&self, z: T) -> Result<T> {
        self.check_path(z)?;
        match self.order {
            ExpansionOrder::First => Ok(try_integrate(|x| self.base.q(x), self.anchor, z, &self.quad)?.value),
            ExpansionOrder::Third => {
                let s = self.base.s();
                let boundary = T::half() * (p_local(s, &self.base.local(z)?) - p_local(s, &self.base.local(self.anchor)?));
                let integral = try_integrate(|x| self.smooth_integrand(x), self.anchor, z, &self.quad)?;
                Ok(boundary + integral.value)
            }
        }
    }

    /// Phase from integrating Q(1 + Y₂) directly, without the boundary term.
    /// Kept as an independent route for testing the third-order phase.
    #[doc(hidden)]
    pub fn phase_direct(&self, z: T) -> Result<T> {
        self.check_path(z)?;
        let integrand = |x: T| -> Result<T> {
            match self.order {
                ExpansionOrder::First => self.base.q(x),
                ExpansionOrder::Third => Ok(self.base.q(x)? * (T::one() + crate::platform::y2(&self.base, x)?)),
            }
        };
        Ok(try_integrate(integrand, self.anchor, z, &self.quad)?.value)
    }

    /// The effective q(z): Q at first order, q₃ at third order. May be ≤ 0
    /// where the third-order approximation has broken down.
    pub fn effective_q(&self, z: T) -> Result<T> {
        let loc = self.base.local(z)?;
        Ok(match self.order {
            ExpansionOrder::First => loc.q,
            ExpansionOrder::Third => {
                let s = self.base.s();
                let p = p_local(s, &loc);
                T::half() * dp_local(s, &loc) + (T::one() - T::half() * p * p) * loc.q
                    - loc.mismatch / (T::two() * loc.q)
            }
        })
    }

    /// q(z)^{−1/2}.
    pub fn amplitude(&self, z: T) -> Result<T> {
        let q = self.effective_q(z)?;
        if q > T::zero() {
            Ok(q.sqrt().recip())
        } else {
            Err(Error::Breakdown { z: z.as_f64(), q: q.as_f64() })
        }
    }

    /// (ψ₊(z), ψ₋(z)).
    pub fn wavefunction(&self, z: T) -> Result<(Complex<T>, Complex<T>)> {
        let amplitude = self.amplitude(z)?;
        let phase = self.phase(z)?;
        Ok((Complex::from_polar(amplitude, phase), Complex::from_polar(amplitude, -phase)))
    }

    /// ψ on the selected branch.
    pub fn value(&self, z: T) -> Result<Complex<T>> {
        let (plus, minus) = self.wavefunction(z)?;
        Ok(match self.branch {
            Branch::Plus => plus,
            Branch::Minus => minus,
        })
    }

    /// dψ/dz on the selected branch by Richardson-extrapolated central differences.
    pub fn derivative(&self, z: T) -> Result<Complex<T>> {
        let local = self.reanchored(z)?;
        let offset = Complex::from_polar(T::one(), self.phase_sign() * self.phase(z)?);
        let h = T::lit(1e-6) * z.abs().max(T::one());
        Ok(richardson(|x| local.value(x), z, h)? * offset)
    }

    fn phase_sign(&self) -> T {
        match self.branch {
            Branch::Plus => T::one(),
            Branch::Minus => -T::one(),
        }
    }

    /// |W + 2i| where W = ψ₊ψ₋′ − ψ₋ψ₊′ is formed from Richardson-differenced
    /// derivatives with h = 1e−6·max(1, |z|). The exact forms give W = −2i.
    ///
    /// A constant phase offset cancels in W, so the differences are taken
    /// with the approximation re-anchored at `z`.
    pub fn wronskian_check(&self, z: T) -> Result<T> {
        let local = self.reanchored(z)?;
        let h = T::lit(1e-6) * z.abs().max(T::one());
        let (plus, minus) = local.wavefunction(z)?;
        let d_plus = richardson(|x| Ok(local.wavefunction(x)?.0), z, h)?;
        let d_minus = richardson(|x| Ok(local.wavefunction(x)?.1), z, h)?;
        let w = plus * d_minus - minus * d_plus;
        Ok((w + Complex::new(T::zero(), T::two())).norm())
    }
}

/// Central difference with one Richardson step: (4D(h/2) − D(h))/3.
pub(crate) fn richardson<T, F>(f: F, z: T, h: T) -> Result<Complex<T>>
where
    T: Real,
    F: Fn(T) -> Result<Complex<T>>,
{
    let central = |h: T| -> Result<Complex<T>> { Ok((f(z + h)? - f(z - h)?) / (T::two() * h)) };
    let coarse = central(h)?;
    let fine = central(T::half() * h)?;
    Ok((fine * T::lit(4.0) - coarse) / T::lit(3.0))
}
