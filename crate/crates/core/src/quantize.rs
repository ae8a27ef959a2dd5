//! First-order Bohr–Sommerfeld quantization.
//!
//! The condition is ∫_{r₁}^{r₂} Q dz = (n_r + ½)π between the two classical
//! turning points. Only the first order is used. The third-order boundary
//! term ½P_s diverges at turning points, so higher-order quantization needs
//! contour integrals in the complex plane, which are not implemented here.
//!
//! With the Kramers–Langer base (s = 1) the first-order condition reproduces
//! the hydrogen spectrum −Z²/(2n²) exactly. With the unmodified base it does
//! not.

use crate::base::{BaseFunction, BaseSpec};
use crate::error::{Error, Result};
use crate::expr::ParamSet;
use crate::num::Real;
use crate::potential::Potential;
use crate::quad::{try_integrate_to_turning_point, QuadOptions};

const FINE_SCAN: usize = 4096;
const ENERGY_TOL: f64 = 1e-11;

/// Ends of the classically allowed interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalRegion<T> {
    pub lo: T,
    pub hi: T,
    /// `lo` is a singular endpoint of the domain (e.g. z = 0 for l = 0
    /// without the Langer term) rather than a zero of Q².
    pub singular_lo: bool,
}

fn probe_points<T: Real>(lo: T, hi: T) -> Vec<T> {
    // 2^{k/8} from ~1e−6 to ~1e12
    let offsets: Vec<T> = (-160..=320).map(|k| T::lit(2f64.powf(k as f64 / 8.0))).collect();
    let mut out = Vec::new();
    if lo.is_finite() {
        out.extend(offsets.iter().map(|&d| lo + d).filter(|&z| z < hi));
    } else if hi.is_finite() {
        out.extend(offsets.iter().rev().map(|&d| hi - d));
    } else {
        out.extend(offsets.iter().rev().map(|&d| -d));
        out.push(T::zero());
        out.extend(offsets.iter().copied());
    }
    out
}

/// Locates the allowed region of Q²: either two simple zeros, or a declared
/// singular lower domain endpoint followed by one zero.
pub fn classical_region<T: Real>(base: &BaseFunction<T>) -> Result<ClassicalRegion<T>> {
    let domain = base.potential().domain();
    let probes = probe_points(domain.lo, domain.hi);
    let allowed: Vec<T> = probes.iter().copied().filter(|&z| base.q2(z).is_ok_and(|v| v > T::zero())).collect();
    let (Some(&first), Some(&last)) = (allowed.first(), allowed.last()) else {
        return Err(Error::TurningPointCount(0));
    };

    let four = T::lit(4.0);
    let points: Vec<T> = if domain.lo.is_finite() {
        let reach = (last - domain.lo) * four;
        let upper = if domain.hi.is_finite() { reach.min(domain.hi - domain.lo) } else { reach };
        // the region may extend down to a singular endpoint; start well below
        // the first allowed probe
        let delta = T::lit(1e-6) * (first - domain.lo).min(T::one());
        let ratio = (upper / delta).ln() / T::lit((FINE_SCAN - 1) as f64);
        (0..FINE_SCAN)
            .map(|i| domain.lo + delta * (ratio * T::lit(i as f64)).exp())
            .filter(|&z| z < domain.hi)
            .collect()
    } else {
        let reach = four * first.abs().max(last.abs());
        let (lo, hi) = (-reach, reach);
        let (lo, hi) = if domain.hi.is_finite() { (lo.min(domain.hi - reach), domain.hi) } else { (lo, hi) };
        let n = T::lit((FINE_SCAN - 1) as f64);
        (0..FINE_SCAN).map(|i| lo + (hi - lo) * T::lit(i as f64) / n).filter(|&z| z < domain.hi).collect()
    };

    let roots = base.roots_on(&points);
    match roots.as_slice() {
        &[r1, r2] => Ok(ClassicalRegion { lo: r1, hi: r2, singular_lo: false }),
        &[r] => {
            let singular = domain.lo.is_finite() && base.potential().singularities().contains(&domain.lo);
            let opens_at_lo = points.first().is_some_and(|&z| z < r && base.q2(z).is_ok_and(|v| v > T::zero()));
            if singular && opens_at_lo {
                Ok(ClassicalRegion { lo: domain.lo, hi: r, singular_lo: true })
            } else {
                Err(Error::TurningPointCount(1))
            }
        }
        other => Err(Error::TurningPointCount(other.len())),
    }
}

/// ∫ Q dz over the allowed region of `p` with its `E` parameter set to `energy`.
///
/// Each half of the region is integrated towards its end with the
/// square-root endpoint substitution; the halves meet at the midpoint.
pub fn action<T: Real>(p: &Potential<T>, spec: BaseSpec<T>, energy: T) -> Result<T> {
    if p.param("E").is_none() {
        return Err(Error::MissingParameter { family: p.label().to_string(), name: "E".into() });
    }
    let base = BaseFunction::new(p.with_param("E", energy.as_f64())?, spec)?;
    let region = classical_region(&base)?;
    let opts = QuadOptions::new(T::lit(1e-13), T::lit(1e-13));
    let q = |z: T| -> Result<T> { Ok(base.q2(z)?.max(T::zero()).sqrt()) };
    let mid = T::half() * (region.lo + region.hi);
    let left = try_integrate_to_turning_point(q, mid, region.lo, &opts)?.value;
    let right = try_integrate_to_turning_point(q, mid, region.hi, &opts)?.value;
    Ok(right - left)
}

/// A hydrogen-like bound state: Coulomb potential with charge `charge`,
/// angular momentum `l`, and `radial_quantum_number` nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundStateProblem<T> {
    pub charge: T,
    pub l: u32,
    pub radial_quantum_number: u32,
    pub spec: BaseSpec<T>,
}

impl<T: Real> BoundStateProblem<T> {
    /// Uses the Kramers–Langer base.
    pub fn new(charge: T, l: u32, radial_quantum_number: u32) -> Self {
        Self { charge, l, radial_quantum_number, spec: BaseSpec::kramers_langer() }
    }

    pub fn with_spec(mut self, spec: BaseSpec<T>) -> Self {
        self.spec = spec;
        self
    }

    /// n = n_r + l + 1.
    pub fn principal(&self) -> u32 {
        self.radial_quantum_number + self.l + 1
    }

    /// −Z²/(2n²).
    pub fn bohr_energy(&self) -> T {
        self.energy_at(T::lit(self.principal() as f64))
    }

    /// (n_r + ½)π.
    pub fn target_action(&self) -> T {
        (T::lit(self.radial_quantum_number as f64) + T::half()) * T::PI()
    }

    fn energy_at(&self, nu: T) -> T {
        -self.charge * self.charge / (T::two() * nu * nu)
    }

    pub fn potential(&self, energy: T) -> Result<Potential<T>> {
        let params: ParamSet = [
            ("E".to_string(), energy.as_f64()),
            ("Z".to_string(), self.charge.as_f64()),
            ("l".to_string(), self.l as f64),
        ]
        .into_iter()
        .collect();
        Potential::builtin("coulomb", &params)
    }

    /// action(E) − (n_r + ½)π.
    pub fn mismatch(&self, energy: T) -> Result<T> {
        Ok(action(&self.potential(energy)?, self.spec, energy)? - self.target_action())
    }

    /// Energies at effective principal numbers n ∓ ¼.
    pub fn bohr_bracket(&self) -> (T, T) {
        let n = T::lit(self.principal() as f64);
        let quarter = T::lit(0.25);
        (self.energy_at(n - quarter), self.energy_at(n + quarter))
    }

    /// Scans E = −Z²/(2ν²) for ν = 0.05, 0.10, … up to n + 3 and returns
    /// the first pair of neighbouring energies where the mismatch changes sign.
    pub fn find_bracket(&self) -> Result<(T, T)> {
        if !(self.charge > T::zero()) {
            return Err(Error::InvalidArgument(format!("bound states need a positive charge, got {}", self.charge)));
        }
        let steps = (self.principal() + 3) * 20;
        let mut previous: Option<(T, T)> = None;
        for k in 1..=steps {
            let energy = self.energy_at(T::lit(k as f64 * 0.05));
            let Ok(g) = self.mismatch(energy) else {
                previous = None;
                continue;
            };
            if let Some((e0, g0)) = previous {
                if (g0 < T::zero()) != (g < T::zero()) || g == T::zero() {
                    return Ok((e0, energy));
                }
            }
            previous = Some((energy, g));
        }
        let (lo, hi) = (self.energy_at(T::lit(0.05)), self.energy_at(T::lit(steps as f64 * 0.05)));
        Err(Error::NoSignChange { lo: lo.as_f64(), hi: hi.as_f64() })
    }

    /// Finds a bracket by scanning and solves.
    pub fn solve(&self) -> Result<T> {
        eigenvalue(self, self.find_bracket()?)
    }
}

/// Bisection on action(E) − (n_r + ½)π until the bracket is narrower than 1e−11.
pub fn eigenvalue<T: Real>(prob: &BoundStateProblem<T>, bracket: (T, T)) -> Result<T> {
    let (mut lo, mut hi) = if bracket.0 <= bracket.1 { bracket } else { (bracket.1, bracket.0) };
    let mut g_lo = prob.mismatch(lo)?;
    let g_hi = prob.mismatch(hi)?;
    if g_lo == T::zero() {
        return Ok(lo);
    }
    if g_hi == T::zero() {
        return Ok(hi);
    }
    if (g_lo < T::zero()) == (g_hi < T::zero()) {
        return Err(Error::NoSignChange { lo: lo.as_f64(), hi: hi.as_f64() });
    }
    let tol = T::lit(ENERGY_TOL).max(T::lit(4.0) * T::epsilon() * lo.abs().max(hi.abs()));
    while hi - lo >= tol {
        let mid = T::half() * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g = prob.mismatch(mid)?;
        if g == T::zero() {
            return Ok(mid);
        }
        if (g < T::zero()) == (g_lo < T::zero()) {
            lo = mid;
            g_lo = g;
        } else {
            hi = mid;
        }
    }
    Ok(T::half() * (lo + hi))
}
