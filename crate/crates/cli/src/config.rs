//! Run configuration: a flat `key = value` file overlaid with command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use pim_core::{BaseFunction, BaseSpec, ExpansionOrder, Family, Interval, ParamSet, Potential, Preset, QuadOptions};

use crate::CliError;

/// Keys accepted in config files. Flags use the same names with `--`.
pub const KEYS: [&str; 20] = [
    "potential", "params", "expr", "domain", "s", "preset", "q2", "order", "anchor", "grid", "probe", "format",
    "abs-tol", "rel-tol", "out", "charge", "l", "nr", "corpus", "checks",
];

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Flag,
    Line(usize),
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Flag => f.write_str("flag"),
            Source::Line(n) => write!(f, "config line {n}"),
        }
    }
}

/// Raw string settings with where each one came from.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: BTreeMap<&'static str, (String, Source)>,
}

fn canonical_key(key: &str) -> Option<&'static str> {
    let normalized = key.trim().replace('_', "-");
    KEYS.iter().copied().find(|k| *k == normalized)
}

impl Settings {
    /// Parses `key = value` lines; `#` starts a comment, blank lines are ignored.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut settings = Settings::default();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::usage(format!("config line {line_no}: expected `key = value`, got `{line}`")));
            };
            let Some(key) = canonical_key(key) else {
                return Err(CliError::usage(format!("config line {line_no}: unknown key `{}`", key.trim())));
            };
            if settings.values.contains_key(key) {
                return Err(CliError::usage(format!("config line {line_no}, field `{key}`: duplicate key")));
            }
            settings.values.insert(key, (value.trim().to_string(), Source::Line(line_no)));
        }
        Ok(settings)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Sets `key` from a flag, overriding any file value.
    pub fn set_flag(&mut self, key: &str, value: Option<&str>) {
        if let (Some(key), Some(value)) = (canonical_key(key), value) {
            self.values.insert(key, (value.to_string(), Source::Flag));
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|(v, _)| v.as_str())
    }

    /// Parses one field, attaching its origin to any error.
    pub fn field<T>(&self, key: &'static str, parse: impl FnOnce(&str) -> Result<T, String>) -> Result<Option<T>, CliError> {
        match self.values.get(key) {
            None => Ok(None),
            Some((value, Source::Flag)) => {
                parse(value).map(Some).map_err(|e| CliError::usage(format!("flag --{key}: {e}")))
            }
            Some((value, source)) => {
                parse(value).map(Some).map_err(|e| CliError::usage(format!("{source}, field `{key}`: {e}")))
            }
        }
    }
}

pub fn parse_real(text: &str) -> Result<f64, String> {
    let t = text.trim();
    let value = match t {
        "inf" | "+inf" | "infinity" => f64::INFINITY,
        "-inf" | "-infinity" => f64::NEG_INFINITY,
        _ => t.replace('\u{2212}', "-").parse::<f64>().map_err(|_| format!("`{t}` is not a number"))?,
    };
    if value.is_nan() {
        return Err("NaN is not allowed".into());
    }
    Ok(value)
}

pub(crate) fn parse_finite(text: &str) -> Result<f64, String> {
    let v = parse_real(text)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{}` must be finite", text.trim()))
    }
}

pub(crate) fn parse_pair(text: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = text.split_once(':').ok_or_else(|| format!("expected `lo:hi`, got `{text}`"))?;
    let (lo, hi) = (parse_real(lo)?, parse_real(hi)?);
    if lo < hi {
        Ok((lo, hi))
    } else {
        Err(format!("need lo < hi, got {lo}:{hi}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Grid {
    pub fn parse(text: &str) -> Result<Self, String> {
        let parts: Vec<&str> = text.split(':').collect();
        let [lo, hi, n] = parts.as_slice() else {
            return Err(format!("expected `lo:hi:n`, got `{text}`"));
        };
        let (lo, hi) = (parse_finite(lo)?, parse_finite(hi)?);
        let n: usize = n.trim().parse().map_err(|_| format!("`{}` is not a point count", n.trim()))?;
        if n < 2 {
            return Err(format!("a grid needs at least 2 points, got {n}"));
        }
        if lo >= hi {
            return Err(format!("need lo < hi, got {lo}:{hi}"));
        }
        Ok(Grid { lo, hi, n })
    }

    /// Equally spaced points, both ends included.
    pub fn points(&self) -> Vec<f64> {
        let last = (self.n - 1) as f64;
        (0..self.n)
            .map(|i| if i + 1 == self.n { self.hi } else { self.lo + (self.hi - self.lo) * i as f64 / last })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(text: &str) -> Result<Self, String> {
        match text.trim() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("format must be csv or json, got `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSelector {
    Family(Family),
    Expression(String),
}

impl PotentialSelector {
    pub fn parse(text: &str) -> Result<Self, String> {
        let text = text.trim();
        if let Some(source) = text.strip_prefix("expr:") {
            return Ok(PotentialSelector::Expression(source.to_string()));
        }
        let name = text.strip_prefix("family:").unwrap_or(text);
        Family::from_name(name).map(PotentialSelector::Family).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaseChoice {
    S(f64),
    Preset(Preset),
}

/// Fully parsed settings shared by the subcommands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub potential: Option<PotentialSelector>,
    pub params: ParamSet,
    pub domain: Option<(f64, f64)>,
    pub base: Option<BaseChoice>,
    pub q2: Option<String>,
    pub order: ExpansionOrder,
    pub anchor: Option<f64>,
    pub grid: Option<Grid>,
    pub probe: Option<f64>,
    pub format: Format,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub out: Option<PathBuf>,
}

fn positive(text: &str) -> Result<f64, String> {
    let v = parse_finite(text)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("tolerance must be positive, got {v}"))
    }
}

impl RunConfig {
    pub fn from_settings(settings: &Settings) -> Result<Self, CliError> {
        let selector = settings.field("potential", PotentialSelector::parse)?;
        let expr = settings.field("expr", |t| Ok(t.to_string()))?;
        let potential = match (selector, expr) {
            (Some(_), Some(_)) => {
                return Err(CliError::usage("give either --potential or --expr, not both"));
            }
            (Some(p), None) => Some(p),
            (None, Some(e)) => Some(PotentialSelector::Expression(e)),
            (None, None) => None,
        };
        let s = settings.field("s", parse_finite)?;
        let preset = settings.field("preset", |t| Preset::from_name(t.trim()).map_err(|e| e.to_string()))?;
        let base = match (s, preset) {
            (Some(_), Some(_)) => return Err(CliError::usage("give either --s or --preset, not both")),
            (Some(s), None) => Some(BaseChoice::S(s)),
            (None, Some(p)) => Some(BaseChoice::Preset(p)),
            (None, None) => None,
        };
        Ok(RunConfig {
            potential,
            params: settings.field("params", |t| ParamSet::parse_list(t).map_err(|e| e.to_string()))?.unwrap_or_default(),
            domain: settings.field("domain", parse_pair)?,
            base,
            q2: settings.field("q2", |t| Ok(t.to_string()))?,
            order: settings
                .field("order", |t| ExpansionOrder::from_name(t.trim()).map_err(|e| e.to_string()))?
                .unwrap_or(ExpansionOrder::Third),
            anchor: settings.field("anchor", parse_finite)?,
            grid: settings.field("grid", Grid::parse)?,
            probe: settings.field("probe", parse_finite)?,
            format: settings.field("format", Format::parse)?.unwrap_or(Format::Csv),
            abs_tol: settings.field("abs-tol", positive)?.unwrap_or(1e-12),
            rel_tol: settings.field("rel-tol", positive)?.unwrap_or(1e-10),
            out: settings.field("out", |t| Ok(PathBuf::from(t)))?,
        })
    }

    pub fn quad_options(&self) -> QuadOptions {
        QuadOptions::new(self.abs_tol, self.rel_tol)
    }

    pub fn require_grid(&self) -> Result<Grid, CliError> {
        self.grid.ok_or_else(|| CliError::usage("missing --grid lo:hi:n"))
    }

    pub fn build_potential(&self) -> Result<Potential, CliError> {
        let selector = self.potential.as_ref().ok_or_else(|| CliError::usage("missing --potential or --expr"))?;
        let potential = match selector {
            PotentialSelector::Family(family) => {
                let p = Potential::family(*family, &self.params)?;
                match self.domain {
                    Some((lo, hi)) => p.with_domain(Interval::new(lo, hi))?,
                    None => p,
                }
            }
            PotentialSelector::Expression(source) => {
                let domain = self.domain.map_or(Interval::real_line(), |(lo, hi)| Interval::new(lo, hi));
                Potential::parse(source, &self.params, domain).map_err(|e| CliError::expression(source, e))?
            }
        };
        Ok(potential)
    }

    pub fn build_spec(&self, potential: &Potential, default: Preset) -> Result<BaseSpec, CliError> {
        Ok(match self.base.unwrap_or(BaseChoice::Preset(default)) {
            BaseChoice::S(s) => BaseSpec::custom(s),
            BaseChoice::Preset(p) => BaseSpec::from_preset(p, potential)?,
        })
    }

    /// The base function; `default` applies when neither `s` nor `preset` is given.
    pub fn build_base(&self, default: Preset) -> Result<BaseFunction, CliError> {
        let potential = self.build_potential()?;
        let spec = self.build_spec(&potential, default)?;
        Ok(match &self.q2 {
            None => BaseFunction::new(potential, spec)?,
            Some(src) => {
                let q2 = pim_core::parse(src).map_err(|e| CliError::expression(src, e.into()))?;
                BaseFunction::with_q2_override(potential, spec, &q2, &self.params)?
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_values_and_flag_overrides() {
        let mut s = Settings::parse("# comment\npotential = family:airy\ngrid = 1:4:4\n\norder = 1 # trailing\n").unwrap();
        assert_eq!(s.get("grid"), Some("1:4:4"));
        s.set_flag("grid", Some("2:3:2"));
        s.set_flag("anchor", None);
        let cfg = RunConfig::from_settings(&s).unwrap();
        assert_eq!(cfg.grid, Some(Grid { lo: 2.0, hi: 3.0, n: 2 }));
        assert_eq!(cfg.order, ExpansionOrder::First);
        assert_eq!(cfg.anchor, None);
    }

    #[test]
    fn diagnostics_name_line_and_field() {
        let err = Settings::parse("potential = airy\nbogus = 3\n").unwrap_err();
        assert!(err.message.contains("line 2") && err.message.contains("bogus"), "{err}");
        let s = Settings::parse("potential = airy\n\ngrid = 1:4\n").unwrap();
        let err = RunConfig::from_settings(&s).unwrap_err();
        assert!(err.message.starts_with("config line 3, field `grid`"), "{err}");
        let err = Settings::parse("just text").unwrap_err();
        assert!(err.message.contains("line 1"));
    }

    #[test]
    fn grid_points_hit_both_ends() {
        let g = Grid::parse("1:4:4").unwrap();
        assert_eq!(g.points(), vec![1.0, 2.0, 3.0, 4.0]);
        assert!(Grid::parse("1:4:1").is_err());
        assert!(Grid::parse("4:1:3").is_err());
    }

    #[test]
    fn selectors() {
        assert_eq!(PotentialSelector::parse("family:weber").unwrap(), PotentialSelector::Family(Family::Weber));
        assert_eq!(PotentialSelector::parse("coulomb").unwrap(), PotentialSelector::Family(Family::Coulomb));
        assert_eq!(PotentialSelector::parse("expr:z^2").unwrap(), PotentialSelector::Expression("z^2".into()));
        assert!(PotentialSelector::parse("family:morse").is_err());
        assert_eq!(parse_pair("-inf:0").unwrap(), (f64::NEG_INFINITY, 0.0));
    }
}
