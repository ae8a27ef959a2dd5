//! The `pim` command-line tool.
//!
//! Every subcommand reads its settings from an optional `key = value`
//! config file overlaid with flags, and writes a table (CSV or JSON) to
//! standard output or `--out`.

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod output;

use config::Settings;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const NUMERICAL: i32 = 2;
    pub const VERIFICATION: i32 = 3;
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub message: String,
    pub code: i32,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { message: message.into(), code: exit::USAGE }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self { message: message.into(), code: exit::NUMERICAL }
    }

    /// An error in an expression, with a caret under the offending byte when known.
    pub fn expression(source: &str, err: pim_core::Error) -> Self {
        let mut out = Self::from(err.clone());
        if let pim_core::Error::Expr(e) = &err {
            if let Some(offset) = e.offset() {
                let column = source[..offset.min(source.len())].chars().count();
                out.message = format!("{e}\n  {source}\n  {}^", " ".repeat(column));
            }
        }
        out
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<pim_core::Error> for CliError {
    fn from(err: pim_core::Error) -> Self {
        use pim_core::Error as E;
        let code = match &err {
            E::Expr(_)
            | E::UnknownFamily(_)
            | E::MissingParameter { .. }
            | E::DomainConflict(_)
            | E::InvalidArgument(_)
            | E::OutsideDomain { .. }
            | E::NoChecksSelected => exit::USAGE,
            E::Forbidden { .. }
            | E::SingularPoint { .. }
            | E::Quadrature { .. }
            | E::Breakdown { .. }
            | E::StepUnderflow { .. }
            | E::TurningPointCount(_)
            | E::NoSignChange { .. }
            | E::InconsistentDerivative { .. }
            | E::NonFinite { .. } => exit::NUMERICAL,
        };
        Self { message: err.to_string(), code }
    }
}

#[derive(Debug, Parser)]
#[command(name = "pim", version, about = "Phase-integral approximations with the platform function P_s")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate Q², Q, P_s, dP_s/dz and Y₂ on a grid
    Eval(CommonArgs),
    /// Tabulate the phase-integral wave function ψ₊ on a grid
    Wavefunction(CommonArgs),
    /// Compare first- and third-order ψ₊ against a numerical solution
    Compare(CommonArgs),
    /// Run the self-consistency suite
    Verify(VerifyArgs),
    /// Bohr–Sommerfeld energy of a hydrogen-like bound state
    Quantize(QuantizeArgs),
    /// Parse an expression and print it with its derivative
    ParseCheck(ParseCheckArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Potential: a family name (`airy`, `family:weber`, …) or `expr:<R(z)>`
    #[arg(long, allow_hyphen_values = true)]
    pub potential: Option<String>,
    /// Parameter bindings, e.g. `E=-0.5,Z=1,l=0`
    #[arg(long, allow_hyphen_values = true)]
    pub params: Option<String>,
    /// R(z) as an expression (same as `--potential expr:<R(z)>`)
    #[arg(long, allow_hyphen_values = true)]
    pub expr: Option<String>,
    /// Domain `lo:hi`; `inf` and `-inf` are allowed
    #[arg(long, allow_hyphen_values = true)]
    pub domain: Option<String>,
    /// Base parameter s
    #[arg(long, allow_hyphen_values = true)]
    pub s: Option<String>,
    /// Base preset: unmodified, kramers-langer or no-centrifugal
    #[arg(long)]
    pub preset: Option<String>,
    /// Replace the canonical Q² by this expression (experimental)
    #[arg(long, allow_hyphen_values = true)]
    pub q2: Option<String>,
    /// Expansion order: 1 or 3
    #[arg(long)]
    pub order: Option<String>,
    /// Anchor point of the phase
    #[arg(long, allow_hyphen_values = true)]
    pub anchor: Option<String>,
    /// Grid `lo:hi:n`
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Probe point for `compare`
    #[arg(long, allow_hyphen_values = true)]
    pub probe: Option<String>,
    /// Output format: csv or json
    #[arg(long)]
    pub format: Option<String>,
    /// Absolute tolerance (also the ODE tolerance for `compare`)
    #[arg(long)]
    pub abs_tol: Option<String>,
    /// Relative tolerance
    #[arg(long)]
    pub rel_tol: Option<String>,
    /// Output path (default standard output)
    #[arg(long)]
    pub out: Option<String>,
    /// Config file of `key = value` lines; flags override it
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl CommonArgs {
    pub fn settings(&self) -> Result<Settings, CliError> {
        let mut settings = match &self.config {
            Some(path) => Settings::load(path)?,
            None => Settings::default(),
        };
        let flags: [(&str, &Option<String>); 15] = [
            ("potential", &self.potential),
            ("params", &self.params),
            ("expr", &self.expr),
            ("domain", &self.domain),
            ("s", &self.s),
            ("preset", &self.preset),
            ("q2", &self.q2),
            ("order", &self.order),
            ("anchor", &self.anchor),
            ("grid", &self.grid),
            ("probe", &self.probe),
            ("format", &self.format),
            ("abs-tol", &self.abs_tol),
            ("rel-tol", &self.rel_tol),
            ("out", &self.out),
        ];
        for (key, value) in flags {
            settings.set_flag(key, value.as_deref());
        }
        Ok(settings)
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct VerifyArgs {
    /// Corpus file replacing the builtin corpus; one entry per line as
    /// `potential=… params=… s=… interval=lo:hi [anchors=a:b]`
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Comma-separated subset of checks
    #[arg(long)]
    pub checks: Option<String>,
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct QuantizeArgs {
    /// Nuclear charge Z
    #[arg(long, allow_hyphen_values = true)]
    pub charge: Option<String>,
    /// Angular momentum l
    #[arg(long)]
    pub l: Option<String>,
    /// Radial quantum number n_r
    #[arg(long)]
    pub nr: Option<String>,
    /// Energy bracket `lo:hi`; scanned for when absent
    #[arg(long, allow_hyphen_values = true)]
    pub bracket: Option<String>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ParseCheckArgs {
    /// Expression to parse
    #[arg(allow_hyphen_values = true)]
    pub expression: String,
}

/// Runs a parsed command line, writing results to stdout or `--out` and
/// warnings to stderr. Returns the exit code.
pub fn run(cli: Cli) -> i32 {
    match commands::dispatch(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            err.code
        }
    }
}
