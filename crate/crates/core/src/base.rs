//! Base function Q(z) with Q² = R(z) + s(s−2)/(4z²), and turning points.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{ExprError, ExprNode, ParamSet};
use crate::num::{Real, TURNING_POINT_GUARD};
use crate::potential::Potential;

/// Named choices of the platform parameter `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    /// s = 0, Q² = R
    Unmodified,
    /// s = 1, Q² = R − 1/(4z²)
    KramersLanger,
    /// s = −2l, Q² = R + l(l+1)/z²
    NoCentrifugal,
}

impl Preset {
    pub fn from_name(name: &str) -> Result<Self> {
        Ok(match name {
            "unmodified" => Preset::Unmodified,
            "kramers-langer" | "langer" => Preset::KramersLanger,
            "no-centrifugal" => Preset::NoCentrifugal,
            other => return Err(Error::InvalidArgument(format!("unknown preset `{other}`"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Unmodified => "unmodified",
            Preset::KramersLanger => "kramers-langer",
            Preset::NoCentrifugal => "no-centrifugal",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Platform parameter `s`, optionally tagged with the preset it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseSpec<T> {
    pub s: T,
    pub preset: Option<Preset>,
}

impl<T: Real> BaseSpec<T> {
    pub fn custom(s: T) -> Self {
        Self { s, preset: None }
    }

    pub fn unmodified() -> Self {
        Self { s: T::zero(), preset: Some(Preset::Unmodified) }
    }

    pub fn kramers_langer() -> Self {
        Self { s: T::one(), preset: Some(Preset::KramersLanger) }
    }

    pub fn no_centrifugal(l: T) -> Self {
        Self { s: -T::two() * l, preset: Some(Preset::NoCentrifugal) }
    }

    /// Resolves a preset against a potential; `no-centrifugal` reads `l` from it.
    pub fn from_preset(preset: Preset, potential: &Potential<T>) -> Result<Self> {
        Ok(match preset {
            Preset::Unmodified => Self::unmodified(),
            Preset::KramersLanger => Self::kramers_langer(),
            Preset::NoCentrifugal => Self::no_centrifugal(T::lit(centrifugal_l(potential)?)),
        })
    }

    /// Coefficient s(s−2)/4 of the 1/z² term added to R.
    pub fn s_term(&self) -> T {
        self.s * (self.s - T::two()) / T::lit(4.0)
    }

    fn validate(&self, potential: &Potential<T>) -> Result<()> {
        let expected = match self.preset {
            None => return Ok(()),
            Some(Preset::Unmodified) => T::zero(),
            Some(Preset::KramersLanger) => T::one(),
            Some(Preset::NoCentrifugal) => -T::two() * T::lit(centrifugal_l(potential)?),
        };
        if (self.s - expected).abs() > T::lit(1e-12) * expected.abs().max(T::one()) {
            return Err(Error::InvalidArgument(format!(
                "preset {} requires s = {expected}, got s = {}",
                self.preset.expect("preset"),
                self.s
            )));
        }
        Ok(())
    }
}

fn centrifugal_l<T: Real>(potential: &Potential<T>) -> Result<f64> {
    potential.param("l").ok_or_else(|| Error::MissingParameter {
        family: potential.label().to_string(),
        name: "l".into(),
    })
}

/// Explicit Q² replacing the default R + s(s−2)/(4z²).
#[derive(Debug)]
struct Q2Override {
    q2: ExprNode,
    dq2: ExprNode,
    d2q2: ExprNode,
    params: ParamSet,
}

/// Values of Q and its derivatives at one point of the allowed region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalBase<T> {
    pub z: T,
    pub r: T,
    pub q2: T,
    pub q: T,
    pub dq: T,
    pub d2q: T,
    /// Q² − R − s(s−2)/(4z²); identically zero for the default Q².
    pub mismatch: T,
}

/// Q(z) built from a potential and a [`BaseSpec`].
#[derive(Debug, Clone)]
pub struct BaseFunction<T> {
    potential: Arc<Potential<T>>,
    spec: BaseSpec<T>,
    q2_override: Option<Arc<Q2Override>>,
}

impl<T: Real> BaseFunction<T> {
    /// Composes Q² = R + s(s−2)/(4z²).
    pub fn new(potential: Potential<T>, spec: BaseSpec<T>) -> Result<Self> {
        spec.validate(&potential)?;
        if spec.s_term() != T::zero() && potential.domain().contains(T::zero()) {
            return Err(Error::DomainConflict(format!(
                "s = {} adds a 1/z² term but z = 0 lies inside the domain of {}",
                spec.s,
                potential.label()
            )));
        }
        Ok(Self { potential: Arc::new(potential), spec, q2_override: None })
    }

    /// Uses an explicit Q² expression instead of the default composition.
    ///
    /// The third-order formulas then carry the mismatch term
    /// Q² − R − s(s−2)/(4z²); results in this mode are experimental.
    pub fn with_q2_override(potential: Potential<T>, spec: BaseSpec<T>, q2: &ExprNode, params: &ParamSet) -> Result<Self> {
        let mut base = Self::new(potential, spec)?;
        if let Some(missing) = q2.parameters().into_iter().find(|p| params.get(p).is_none()) {
            return Err(ExprError::UnboundParameter(missing).into());
        }
        if q2.has_pole_at_zero(params) && base.potential.domain().contains(T::zero()) {
            return Err(Error::DomainConflict("override Q² is singular at z = 0 inside the domain".into()));
        }
        let dq2 = q2.differentiate();
        let d2q2 = dq2.differentiate();
        base.q2_override = Some(Arc::new(Q2Override { q2: q2.clone(), dq2, d2q2, params: params.clone() }));
        Ok(base)
    }

    pub fn potential(&self) -> &Potential<T> {
        &self.potential
    }

    pub fn spec(&self) -> BaseSpec<T> {
        self.spec
    }

    pub fn s(&self) -> T {
        self.spec.s
    }

    /// True when Q² is the default R + s(s−2)/(4z²).
    pub fn is_canonical(&self) -> bool {
        self.q2_override.is_none()
    }

    fn s_term_at(&self, z: T) -> Result<(T, T, T)> {
        let c = self.spec.s_term();
        if c == T::zero() {
            return Ok((T::zero(), T::zero(), T::zero()));
        }
        if z == T::zero() {
            return Err(Error::SingularPoint { s: self.spec.s.as_f64() });
        }
        let z2 = z * z;
        Ok((c / z2, -T::two() * c / (z2 * z), T::lit(6.0) * c / (z2 * z2)))
    }

    /// Canonical Q² and derivatives. The 1/z² coefficients of R and of the
    /// s-term are added first, so that a cancelled centrifugal term is
    /// exactly zero instead of a difference of two large numbers.
    fn canonical(&self, z: T) -> Result<[T; 3]> {
        let s_term = self.spec.s_term();
        if s_term != T::zero() && z == T::zero() {
            return Err(Error::SingularPoint { s: self.spec.s.as_f64() });
        }
        let [r, dr, d2r] = self.potential.regular_part(z)?;
        let c = s_term + self.potential.inverse_square();
        if c == T::zero() {
            return Ok([r, dr, d2r]);
        }
        let z2 = z * z;
        Ok([r + c / z2, dr - T::two() * c / (z2 * z), d2r + T::lit(6.0) * c / (z2 * z2)])
    }

    /// Q²(z). No guard: may be negative.
    pub fn q2(&self, z: T) -> Result<T> {
        match &self.q2_override {
            Some(o) => Ok(o.q2.evaluate(z, &o.params)?),
            None => Ok(self.canonical(z)?[0]),
        }
    }

    /// dQ²/dz.
    pub fn dq2(&self, z: T) -> Result<T> {
        match &self.q2_override {
            Some(o) => Ok(o.dq2.evaluate(z, &o.params)?),
            None => Ok(self.canonical(z)?[1]),
        }
    }

    /// d²Q²/dz².
    pub fn d2q2(&self, z: T) -> Result<T> {
        match &self.q2_override {
            Some(o) => Ok(o.d2q2.evaluate(z, &o.params)?),
            None => Ok(self.canonical(z)?[2]),
        }
    }

    /// Q² − R − s(s−2)/(4z²).
    pub fn mismatch(&self, z: T) -> Result<T> {
        match &self.q2_override {
            None => Ok(T::zero()),
            Some(o) => Ok(o.q2.evaluate(z, &o.params)? - self.potential.r(z)? - self.s_term_at(z)?.0),
        }
    }

    fn guarded_q2(&self, z: T) -> Result<T> {
        let q2 = self.q2(z)?;
        if q2 > T::lit(TURNING_POINT_GUARD) {
            Ok(q2)
        } else {
            Err(Error::Forbidden { z: z.as_f64(), q2: q2.as_f64() })
        }
    }

    /// Principal root Q = +√Q²; errors in forbidden regions and at turning points.
    pub fn q(&self, z: T) -> Result<T> {
        Ok(self.guarded_q2(z)?.sqrt())
    }

    /// Q′ = (Q²)′/(2Q).
    pub fn dq(&self, z: T) -> Result<T> {
        Ok(self.local(z)?.dq)
    }

    /// Q″ = ((Q²)″/2 − Q′²)/Q.
    pub fn d2q(&self, z: T) -> Result<T> {
        Ok(self.local(z)?.d2q)
    }

    /// Evaluates Q, Q′, Q″ and the related quantities at once.
    pub fn local(&self, z: T) -> Result<LocalBase<T>> {
        let q2 = self.guarded_q2(z)?;
        let q = q2.sqrt();
        let dq = self.dq2(z)? / (T::two() * q);
        let d2q = (T::half() * self.d2q2(z)? - dq * dq) / q;
        let r = self.potential.r(z)?;
        let mismatch = self.mismatch(z)?;
        Ok(LocalBase { z, r, q2, q, dq, d2q, mismatch })
    }

    /// Real zeros of Q² found by scanning `n_scan` uniform points of
    /// `[lo, hi]` for sign changes and bisecting each bracket to
    /// |Δz| < 1e−12·max(1, |z|).
    ///
    /// Points where Q² cannot be evaluated (e.g. a singular endpoint) are
    /// skipped. A tangential double root shows up as zero or two roots
    /// depending on the sign pattern the scan sees.
    pub fn turning_points(&self, lo: T, hi: T, n_scan: usize) -> Result<Vec<T>> {
        if !(lo < hi) || n_scan < 2 {
            return Err(Error::InvalidArgument(format!("turning point scan needs lo < hi and n_scan >= 2 (got [{lo}, {hi}], {n_scan})")));
        }
        let domain = self.potential.domain();
        if !domain.closure_contains(lo) || !domain.closure_contains(hi) {
            return Err(Error::OutsideDomain { z: lo.as_f64(), lo: domain.lo.as_f64(), hi: domain.hi.as_f64() });
        }
        let n = T::lit((n_scan - 1) as f64);
        let points: Vec<T> = (0..n_scan).map(|i| lo + (hi - lo) * T::lit(i as f64) / n).collect();
        Ok(self.roots_on(&points))
    }

    /// Sign-change scan over arbitrary increasing sample points.
    pub(crate) fn roots_on(&self, points: &[T]) -> Vec<T> {
        let values: Vec<Option<T>> = points.iter().map(|&z| self.q2(z).ok().filter(|v| v.is_finite())).collect();
        let mut roots: Vec<T> = Vec::new();
        let push = |r: T, roots: &mut Vec<T>| {
            if roots.last().is_none_or(|&last| last != r) {
                roots.push(r);
            }
        };
        for i in 0..points.len() {
            let Some(a) = values[i] else { continue };
            if a == T::zero() {
                push(points[i], &mut roots);
                continue;
            }
            if let Some(Some(b)) = values.get(i + 1) {
                if *b != T::zero() && (a < T::zero()) != (*b < T::zero()) {
                    push(self.bisect(points[i], points[i + 1], a), &mut roots);
                }
            }
        }
        roots
    }

    fn bisect(&self, mut lo: T, mut hi: T, f_lo: T) -> T {
        let lo_negative = f_lo < T::zero();
        for _ in 0..200 {
            let mid = T::half() * (lo + hi);
            let tol = T::lit(1e-12) * mid.abs().max(T::one());
            if hi - lo < tol || mid <= lo || mid >= hi {
                return mid;
            }
            match self.q2(mid) {
                Ok(v) if v == T::zero() => return mid,
                Ok(v) if (v < T::zero()) == lo_negative => lo = mid,
                _ => hi = mid,
            }
        }
        T::half() * (lo + hi)
    }
}
