//! The coefficient function R(z) of ψ″ + R(z)ψ = 0.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{ExprError, ExprNode, ParamSet};
use crate::num::{Interval, Real};
use crate::oracle::fd_derivative;

/// Built-in potential families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// R = z
    Airy,
    /// R = a − z²/4
    Weber,
    /// R = 2E + 2Z/z − l(l+1)/z², atomic units
    Coulomb,
    /// R = k² − l(l+1)/z²
    RadialFree,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Airy, Family::Weber, Family::Coulomb, Family::RadialFree];

    pub fn from_name(name: &str) -> Result<Self> {
        Ok(match name {
            "airy" => Family::Airy,
            "weber" => Family::Weber,
            "coulomb" => Family::Coulomb,
            "radial-free" => Family::RadialFree,
            other => return Err(Error::UnknownFamily(other.to_string())),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Airy => "airy",
            Family::Weber => "weber",
            Family::Coulomb => "coulomb",
            Family::RadialFree => "radial-free",
        }
    }

    /// Parameters the family needs.
    pub fn required_params(self) -> &'static [&'static str] {
        match self {
            Family::Airy => &[],
            Family::Weber => &["a"],
            Family::Coulomb => &["E", "Z", "l"],
            Family::RadialFree => &["k", "l"],
        }
    }

    /// Default real domain of the family.
    pub fn default_domain<T: Real>(self) -> Interval<T> {
        match self {
            Family::Airy | Family::Weber => Interval::real_line(),
            Family::Coulomb | Family::RadialFree => Interval::positive(),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
enum Kind<T> {
    Airy,
    Weber { a: T },
    Coulomb { energy: T, charge: T, centrifugal: T },
    RadialFree { k2: T, centrifugal: T },
    Expr(Arc<ExprDerivatives>),
}

#[derive(Debug)]
struct ExprDerivatives {
    r: ExprNode,
    dr: ExprNode,
    d2r: ExprNode,
}

/// R(z) together with analytic R′ and R″, its declared singular points and
/// the open real interval on which it is evaluated.
#[derive(Debug, Clone)]
pub struct Potential<T> {
    kind: Kind<T>,
    params: ParamSet,
    domain: Interval<T>,
    singularities: Vec<T>,
    label: String,
}

impl<T: Real> Potential<T> {
    /// Builds one of the built-in families from its parameters.
    pub fn builtin(name: &str, params: &ParamSet) -> Result<Self> {
        let family = Family::from_name(name)?;
        Self::family(family, params)
    }

    pub fn family(family: Family, params: &ParamSet) -> Result<Self> {
        let get = |name: &str| -> Result<T> {
            params
                .get(name)
                .map(T::lit)
                .ok_or_else(|| Error::MissingParameter { family: family.name().into(), name: name.into() })
        };
        let centrifugal = |l: T| l * (l + T::one());
        let (kind, singularities) = match family {
            Family::Airy => (Kind::Airy, vec![]),
            Family::Weber => (Kind::Weber { a: get("a")? }, vec![]),
            Family::Coulomb => (
                Kind::Coulomb { energy: get("E")?, charge: get("Z")?, centrifugal: centrifugal(get("l")?) },
                vec![T::zero()],
            ),
            Family::RadialFree => {
                let k = get("k")?;
                (Kind::RadialFree { k2: k * k, centrifugal: centrifugal(get("l")?) }, vec![T::zero()])
            }
        };
        let label = if params.is_empty() {
            family.name().to_string()
        } else {
            let list: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            format!("{}({})", family.name(), list.join(","))
        };
        Ok(Self { kind, params: params.clone(), domain: family.default_domain(), singularities, label })
    }

    /// Wraps a parsed expression. Derivatives are obtained symbolically and
    /// checked against finite differences at 33 interior points.
    pub fn from_expression(e: &ExprNode, params: &ParamSet, domain: Interval<T>) -> Result<Self> {
        if let Some(missing) = e.parameters().into_iter().find(|p| params.get(p).is_none()) {
            return Err(ExprError::UnboundParameter(missing).into());
        }
        if !(domain.lo < domain.hi) {
            return Err(Error::InvalidArgument(format!("empty domain ({}, {})", domain.lo, domain.hi)));
        }
        let mut singularities = Vec::new();
        if e.has_pole_at_zero(params) && domain.closure_contains(T::zero()) {
            singularities.push(T::zero());
        }
        let dr = e.differentiate();
        let d2r = dr.differentiate();
        let potential = Self {
            kind: Kind::Expr(Arc::new(ExprDerivatives { r: e.clone(), dr, d2r })),
            params: params.clone(),
            domain,
            singularities,
            label: format!("expr:{e}"),
        };
        potential.check_singularities()?;
        potential.check_derivatives()?;
        Ok(potential)
    }

    /// Parses `source` and calls [`Potential::from_expression`].
    pub fn parse(source: &str, params: &ParamSet, domain: Interval<T>) -> Result<Self> {
        let e = crate::expr::parse(source)?;
        Self::from_expression(&e, params, domain)
    }

    /// Same potential on a different domain.
    pub fn with_domain(mut self, domain: Interval<T>) -> Result<Self> {
        if !(domain.lo < domain.hi) {
            return Err(Error::InvalidArgument(format!("empty domain ({}, {})", domain.lo, domain.hi)));
        }
        self.domain = domain;
        self.check_singularities()?;
        Ok(self)
    }

    /// Rebinds one parameter (e.g. the energy `E`) keeping the domain.
    pub fn with_param(&self, name: &str, value: f64) -> Result<Self> {
        let mut params = self.params.clone();
        params.set(name, value)?;
        let rebuilt = match &self.kind {
            Kind::Expr(_) => {
                let mut p = self.clone();
                p.params = params;
                p.check_derivatives()?;
                p
            }
            _ => {
                let family = self.family_kind().expect("builtin");
                Self::family(family, &params)?
            }
        };
        rebuilt.with_domain(self.domain)
    }

    fn family_kind(&self) -> Option<Family> {
        Some(match self.kind {
            Kind::Airy => Family::Airy,
            Kind::Weber { .. } => Family::Weber,
            Kind::Coulomb { .. } => Family::Coulomb,
            Kind::RadialFree { .. } => Family::RadialFree,
            Kind::Expr(_) => return None,
        })
    }

    /// The built-in family, or `None` for expression potentials.
    pub fn builtin_family(&self) -> Option<Family> {
        self.family_kind()
    }

    fn check_singularities(&self) -> Result<()> {
        match self.singularities.iter().find(|&&s| self.domain.contains(s)) {
            Some(s) => Err(Error::DomainConflict(format!(
                "singular point z = {s} lies inside the domain ({}, {})",
                self.domain.lo, self.domain.hi
            ))),
            None => Ok(()),
        }
    }

    /// Sample points used by the derivative consistency check.
    fn sample_points(&self, n: usize) -> Vec<f64> {
        let (lo, hi) = (self.domain.lo.as_f64(), self.domain.hi.as_f64());
        let (a, b) = match (lo.is_finite(), hi.is_finite()) {
            (true, true) => (lo, hi),
            (true, false) => (lo, lo + 10.0 * lo.abs().max(1.0)),
            (false, true) => (hi - 10.0 * hi.abs().max(1.0), hi),
            (false, false) => (-10.0, 10.0),
        };
        (0..n).map(|i| a + (b - a) * (i as f64 + 0.5) / n as f64).collect()
    }

    fn check_derivatives(&self) -> Result<()> {
        let Kind::Expr(d) = &self.kind else { return Ok(()) };
        let p = &self.params;
        for z in self.sample_points(33) {
            let r = d.r.evaluate(z, p)?;
            let dr = d.dr.evaluate(z, p)?;
            let d2r = d.d2r.evaluate(z, p)?;
            let fd1 = fd_derivative(|x: f64| d.r.evaluate(x, p), z, 1)?;
            let fd2 = fd_derivative(|x: f64| d.dr.evaluate(x, p), z, 1)?;
            if (dr - fd1).abs() > 1e-8 * dr.abs().max(r.abs()).max(1.0) {
                return Err(Error::InconsistentDerivative { z, what: format!("R' = {dr:e}, finite difference {fd1:e}") });
            }
            if (d2r - fd2).abs() > 1e-8 * d2r.abs().max(dr.abs()).max(1.0) {
                return Err(Error::InconsistentDerivative {
                    z,
                    what: format!("R'' = {d2r:e}, finite difference {fd2:e}"),
                });
            }
        }
        Ok(())
    }

    fn check_domain(&self, z: T) -> Result<()> {
        if self.domain.contains(z) {
            Ok(())
        } else {
            Err(Error::OutsideDomain { z: z.as_f64(), lo: self.domain.lo.as_f64(), hi: self.domain.hi.as_f64() })
        }
    }

    /// Coefficient c of an explicit c/z² term in R (zero if there is none).
    pub(crate) fn inverse_square(&self) -> T {
        match &self.kind {
            Kind::Coulomb { centrifugal, .. } | Kind::RadialFree { centrifugal, .. } => -*centrifugal,
            _ => T::zero(),
        }
    }

    /// R − c/z² and its first two derivatives, with c = [`Self::inverse_square`].
    ///
    /// Lets callers combine the 1/z² coefficients before evaluating, so that
    /// exact cancellations (e.g. a removed centrifugal term) stay exact.
    pub(crate) fn regular_part(&self, z: T) -> Result<[T; 3]> {
        self.check_domain(z)?;
        let two = T::two();
        Ok(match &self.kind {
            Kind::Coulomb { energy, charge, .. } => {
                let z2 = z * z;
                [two * *energy + two * *charge / z, -two * *charge / z2, T::lit(4.0) * *charge / (z2 * z)]
            }
            Kind::RadialFree { k2, .. } => [*k2, T::zero(), T::zero()],
            _ => [self.r(z)?, self.dr(z)?, self.d2r(z)?],
        })
    }

    pub fn r(&self, z: T) -> Result<T> {
        self.check_domain(z)?;
        let two = T::two();
        Ok(match &self.kind {
            Kind::Airy => z,
            Kind::Weber { a } => *a - z * z / T::lit(4.0),
            Kind::Coulomb { energy, charge, centrifugal } => two * *energy + two * *charge / z - *centrifugal / (z * z),
            Kind::RadialFree { k2, centrifugal } => *k2 - *centrifugal / (z * z),
            Kind::Expr(d) => d.r.evaluate(z, &self.params)?,
        })
    }

    pub fn dr(&self, z: T) -> Result<T> {
        self.check_domain(z)?;
        let two = T::two();
        Ok(match &self.kind {
            Kind::Airy => T::one(),
            Kind::Weber { .. } => -z / two,
            Kind::Coulomb { charge, centrifugal, .. } => -two * *charge / (z * z) + two * *centrifugal / (z * z * z),
            Kind::RadialFree { centrifugal, .. } => two * *centrifugal / (z * z * z),
            Kind::Expr(d) => d.dr.evaluate(z, &self.params)?,
        })
    }

    pub fn d2r(&self, z: T) -> Result<T> {
        self.check_domain(z)?;
        let z2 = z * z;
        Ok(match &self.kind {
            Kind::Airy => T::zero(),
            Kind::Weber { .. } => -T::half(),
            Kind::Coulomb { charge, centrifugal, .. } => {
                T::lit(4.0) * *charge / (z2 * z) - T::lit(6.0) * *centrifugal / (z2 * z2)
            }
            Kind::RadialFree { centrifugal, .. } => -T::lit(6.0) * *centrifugal / (z2 * z2),
            Kind::Expr(d) => d.d2r.evaluate(z, &self.params)?,
        })
    }

    pub fn domain(&self) -> Interval<T> {
        self.domain
    }

    pub fn singularities(&self) -> &[T] {
        &self.singularities
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    /// Looks up a construction parameter (e.g. `l`).
    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.get(name)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// The expression tree for expression-backed potentials.
    pub fn expression(&self) -> Option<&ExprNode> {
        match &self.kind {
            Kind::Expr(d) => Some(&d.r),
            _ => None,
        }
    }
}
