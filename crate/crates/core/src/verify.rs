//! Self-consistency suite over a corpus of potentials.
//!
//! Each check samples every corpus entry on its own allowed interval and
//! reports the worst residual it saw. The platform evaluators are
//! injectable so the suite can be shown to catch a broken implementation.

use std::fmt;

use crate::base::{BaseFunction, BaseSpec};
use crate::error::{Error, Result};
use crate::expr::{parse, ParamSet};
use crate::pim::{ExpansionOrder, PhaseApprox};
use crate::platform::{epsilon0, identity_residual_with, y2, PlatformOps};
use crate::potential::Potential;
use crate::quad::{try_integrate, QuadOptions};

/// One potential + base choice and the allowed interval to sample.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub name: String,
    pub base: BaseFunction<f64>,
    pub interval: (f64, f64),
    /// Two anchors for the anchor-invariance check.
    pub anchors: Option<(f64, f64)>,
}

impl CorpusEntry {
    pub fn new(name: impl Into<String>, base: BaseFunction<f64>, interval: (f64, f64)) -> Self {
        Self { name: name.into(), base, interval, anchors: None }
    }

    pub fn with_anchors(mut self, a: f64, b: f64) -> Self {
        self.anchors = Some((a, b));
        self
    }

    /// `n` equally spaced points including both ends.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        let (lo, hi) = self.interval;
        if n == 1 {
            return vec![0.5 * (lo + hi)];
        }
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }
}

fn builtin_entry(name: &str, params: &str, spec: BaseSpec<f64>, interval: (f64, f64)) -> Result<CorpusEntry> {
    let potential = Potential::builtin(name, &ParamSet::parse_list(params)?)?;
    let label = potential.label().to_string();
    Ok(CorpusEntry::new(format!("{label}/s={}", spec.s), BaseFunction::new(potential, spec)?, interval))
}

/// The four builtin families at standard parameters, plus an Airy case with
/// a non-canonical Q² = z + 1.
pub fn builtin_corpus() -> Result<Vec<CorpusEntry>> {
    let mut corpus = vec![
        builtin_entry("airy", "", BaseSpec::unmodified(), (1.0, 10.0))?.with_anchors(1.5, 2.5),
        builtin_entry("weber", "a=5", BaseSpec::unmodified(), (-4.0, 4.0))?,
        builtin_entry("coulomb", "E=-0.5,Z=1,l=0", BaseSpec::kramers_langer(), (0.3, 1.7))?.with_anchors(0.5, 0.8),
        builtin_entry("radial-free", "k=1,l=1", BaseSpec::no_centrifugal(1.0), (1.5, 10.0))?,
    ];
    let airy = Potential::builtin("airy", &ParamSet::new())?;
    let shifted = BaseFunction::with_q2_override(airy, BaseSpec::unmodified(), &parse("z + 1")?, &ParamSet::new())?;
    corpus.push(CorpusEntry::new("airy/Q²=z+1", shifted, (1.0, 10.0)));
    Ok(corpus)
}

/// The individual checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Check {
    /// Q^{−3/2}(Q^{−1/2})″ = P_s′/Q − P_s² + s(s−2)/(4z²Q²)
    Identity,
    /// 2Y₂ = ε₀ on s = 0 entries
    Reduction,
    /// ∫ₐᶻ ½P_s′ dz = ½[P_s(z) − P_s(a)]
    TotalDerivative,
    /// Phase differences do not depend on the anchor
    AnchorInvariance,
    /// ψ₊ψ₋′ − ψ₋ψ₊′ = −2i at both orders
    Wronskian,
}

impl Check {
    pub const ALL: [Check; 5] =
        [Check::Identity, Check::Reduction, Check::TotalDerivative, Check::AnchorInvariance, Check::Wronskian];

    pub fn name(self) -> &'static str {
        match self {
            Check::Identity => "identity",
            Check::Reduction => "reduction",
            Check::TotalDerivative => "total-derivative",
            Check::AnchorInvariance => "anchor-invariance",
            Check::Wronskian => "wronskian",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown check `{name}`")))
    }

    pub fn threshold(self) -> f64 {
        match self {
            Check::Identity | Check::Reduction | Check::AnchorInvariance => 1e-9,
            Check::TotalDerivative => 1e-10,
            Check::Wronskian => 1e-7,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub check: Check,
    pub worst: f64,
    /// Entry name and z of the worst residual.
    pub worst_at: Option<(String, f64)>,
    pub threshold: f64,
    pub samples: usize,
    pub passed: bool,
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {:<18} worst {:.3e} (threshold {:.0e}, {} samples", self.check, self.worst, self.threshold, self.samples)?;
        if let Some((entry, z)) = &self.worst_at {
            write!(f, ", at {entry} z={z}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<CheckReport>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

struct Worst {
    value: f64,
    at: Option<(String, f64)>,
    samples: usize,
}

impl Worst {
    fn new() -> Self {
        Self { value: 0.0, at: None, samples: 0 }
    }

    fn record(&mut self, entry: &CorpusEntry, z: f64, residual: f64) {
        self.samples += 1;
        // NaN counts as worst
        if !(residual <= self.value) {
            self.value = residual;
            self.at = Some((entry.name.clone(), z));
        }
    }

    fn report(self, check: Check) -> CheckReport {
        let threshold = check.threshold();
        CheckReport {
            check,
            passed: self.samples > 0 && self.value < threshold,
            worst: self.value,
            worst_at: self.at,
            threshold,
            samples: self.samples,
        }
    }
}

const IDENTITY_POINTS: usize = 100;
const PHASE_POINTS: usize = 10;
const WRONSKIAN_POINTS: usize = 20;

fn phase_options() -> QuadOptions<f64> {
    QuadOptions::new(1e-13, 1e-13)
}

/// Runs one check over a corpus.
pub fn run_check(check: Check, corpus: &[CorpusEntry], ops: &PlatformOps<f64>) -> Result<CheckReport> {
    let mut worst = Worst::new();
    for entry in corpus {
        match check {
            Check::Identity => {
                for z in entry.grid(IDENTITY_POINTS) {
                    worst.record(entry, z, identity_residual_with(ops, &entry.base, z)?);
                }
            }
            Check::Reduction => {
                if entry.base.s() != 0.0 {
                    continue;
                }
                for z in entry.grid(IDENTITY_POINTS) {
                    worst.record(entry, z, (2.0 * y2(&entry.base, z)? - epsilon0(&entry.base, z)?).abs());
                }
            }
            Check::TotalDerivative => {
                let anchor = entry.anchors.map_or(0.5 * (entry.interval.0 + entry.interval.1), |a| a.0);
                let p_anchor = (ops.value)(&entry.base, anchor)?;
                for z in entry.grid(PHASE_POINTS) {
                    let integral = try_integrate(|x| (ops.derivative)(&entry.base, x), anchor, z, &phase_options())?;
                    let boundary = (ops.value)(&entry.base, z)? - p_anchor;
                    worst.record(entry, z, 0.5 * (integral.value - boundary).abs());
                }
            }
            Check::AnchorInvariance => {
                let Some((a1, a2)) = entry.anchors else { continue };
                let first = PhaseApprox::new(entry.base.clone(), ExpansionOrder::Third, a1)?
                    .with_quad_options(phase_options());
                let second = first.reanchored(a2)?;
                let offset = first.phase(a2)?;
                for z in entry.grid(PHASE_POINTS) {
                    worst.record(entry, z, (first.phase(z)? - second.phase(z)? - offset).abs());
                }
            }
            Check::Wronskian => {
                let mid = 0.5 * (entry.interval.0 + entry.interval.1);
                for order in [ExpansionOrder::First, ExpansionOrder::Third] {
                    let pa = PhaseApprox::new(entry.base.clone(), order, mid)?;
                    for z in entry.grid(WRONSKIAN_POINTS) {
                        worst.record(entry, z, pa.wronskian_check(z)?);
                    }
                }
            }
        }
    }
    Ok(worst.report(check))
}

/// A selection of checks over a corpus.
#[derive(Debug, Clone)]
pub struct Suite {
    pub corpus: Vec<CorpusEntry>,
    pub checks: Vec<Check>,
    pub ops: PlatformOps<f64>,
}

impl Suite {
    /// All checks over the builtin corpus.
    pub fn builtin() -> Result<Self> {
        Ok(Self { corpus: builtin_corpus()?, checks: Check::ALL.to_vec(), ops: PlatformOps::standard() })
    }

    pub fn with_corpus(mut self, corpus: Vec<CorpusEntry>) -> Self {
        self.corpus = corpus;
        self
    }

    pub fn with_checks(mut self, checks: Vec<Check>) -> Self {
        self.checks = checks;
        self
    }

    pub fn with_ops(mut self, ops: PlatformOps<f64>) -> Self {
        self.ops = ops;
        self
    }

    pub fn run(&self) -> Result<VerifyReport> {
        if self.corpus.is_empty() || self.checks.is_empty() {
            return Err(Error::NoChecksSelected);
        }
        let checks = self.checks.iter().map(|&c| run_check(c, &self.corpus, &self.ops)).collect::<Result<_>>()?;
        Ok(VerifyReport { checks })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::platform::platform_value;

    #[test]
    fn builtin_suite_passes() {
        let report = Suite::builtin().unwrap().run().unwrap();
        for c in &report.checks {
            assert!(c.passed, "{c}");
        }
    }

    #[test]
    fn empty_corpus_is_an_error() {
        let suite = Suite::builtin().unwrap().with_corpus(vec![]);
        assert_eq!(suite.run().unwrap_err().to_string(), "no checks selected");
        let suite = Suite::builtin().unwrap().with_checks(vec![]);
        assert_eq!(suite.run().unwrap_err(), Error::NoChecksSelected);
    }

    #[test]
    fn wrong_sign_fails_identity() {
        fn wrong_sign(b: &BaseFunction<f64>, z: f64) -> Result<f64> {
            let q = b.q(z)?;
            platform_value(b, z).map(|p| p + b.s() / (z * q))
        }
        let suite = Suite::builtin()
            .unwrap()
            .with_checks(vec![Check::Identity])
            .with_ops(PlatformOps { value: wrong_sign, derivative: crate::platform::platform_derivative });
        let report = suite.run().unwrap();
        assert!(!report.passed());
        assert!(report.checks[0].worst_at.as_ref().unwrap().0.starts_with("coulomb"));
    }
}
