//! Subcommand implementations.

use std::io::Write;
use std::path::Path;

use pim_core::oracle::compare_orders;
use pim_core::platform::evaluate;
use pim_core::quantize::eigenvalue;
use pim_core::verify::{builtin_corpus, Check, CorpusEntry, Suite};
use pim_core::{
    BaseFunction, BaseSpec, BoundStateProblem, Error, Interval, ParamSet, PhaseApprox, Potential, Preset,
    TURNING_POINT_GUARD,
};

use crate::config::{parse_finite, parse_pair, Format, PotentialSelector, RunConfig};
use crate::output::{Cell, Table};
use crate::{exit, CliError, Command, ParseCheckArgs, QuantizeArgs, VerifyArgs};

pub fn dispatch(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Eval(args) => eval(&RunConfig::from_settings(&args.settings()?)?),
        Command::Wavefunction(args) => wavefunction(&RunConfig::from_settings(&args.settings()?)?),
        Command::Compare(args) => compare(&RunConfig::from_settings(&args.settings()?)?),
        Command::Verify(args) => verify(&args),
        Command::Quantize(args) => quantize(&args),
        Command::ParseCheck(args) => parse_check(&args),
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::usage(format!("cannot write output: {e}")))
        }
    }
}

fn emit_table(table: &Table, cfg: &RunConfig) -> Result<(), CliError> {
    emit(&table.render(cfg.format), cfg.out.as_deref())
}

/// Why a grid point was skipped, or `None` if the error is not a guard violation.
fn skip_reason(err: &Error) -> Option<&'static str> {
    match err {
        Error::Forbidden { q2, .. } if q2.abs() <= TURNING_POINT_GUARD => Some("turning point"),
        Error::Forbidden { .. } => Some("forbidden"),
        Error::SingularPoint { .. } => Some("singular"),
        Error::OutsideDomain { .. } => Some("outside domain"),
        _ => None,
    }
}

pub fn eval(cfg: &RunConfig) -> Result<i32, CliError> {
    let base = cfg.build_base(Preset::Unmodified)?;
    let grid = cfg.require_grid()?;
    let mut table = Table::new(vec!["z", "Q2", "Q", "P_s", "dP_s/dz", "Y2", "reason"]);
    let mut skipped = 0usize;
    for z in grid.points() {
        let row = match base.q(z).and_then(|q| Ok((q, evaluate(&base, z)?))) {
            Ok((q, e)) => vec![z.into(), (q * q).into(), q.into(), e.p.into(), e.dp_dz.into(), e.y2.into(), Cell::Empty],
            Err(err) => {
                let reason = skip_reason(&err).ok_or_else(|| CliError::from(err.clone()))?;
                skipped += 1;
                let q2 = base.q2(z).map_or(Cell::Empty, Cell::Num);
                vec![z.into(), q2, Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, reason.into()]
            }
        };
        table.push(row);
    }
    emit_table(&table, cfg)?;
    if skipped > 0 {
        eprintln!("warning: {skipped} of {} grid points skipped", grid.n);
    }
    Ok(exit::OK)
}

pub fn wavefunction(cfg: &RunConfig) -> Result<i32, CliError> {
    let base = cfg.build_base(Preset::Unmodified)?;
    let grid = cfg.require_grid()?;
    let anchor = cfg.anchor.unwrap_or(grid.lo);
    let pa = PhaseApprox::new(base, cfg.order, anchor)?.with_quad_options(cfg.quad_options());
    let mut table = Table::new(vec!["z", "re_psi", "im_psi", "amplitude", "phase"]);
    for z in grid.points() {
        let (psi, _) = pa.wavefunction(z)?;
        table.push(vec![z.into(), psi.re.into(), psi.im.into(), pa.amplitude(z)?.into(), pa.phase(z)?.into()]);
    }
    emit_table(&table, cfg)?;
    Ok(exit::OK)
}

pub fn compare(cfg: &RunConfig) -> Result<i32, CliError> {
    if cfg.q2.is_some() {
        return Err(CliError::usage("compare does not support --q2"));
    }
    let potential = cfg.build_potential()?;
    let spec = cfg.build_spec(&potential, Preset::Unmodified)?;
    let anchor = cfg.anchor.ok_or_else(|| CliError::usage("compare needs --anchor"))?;
    let probe = cfg.probe.ok_or_else(|| CliError::usage("compare needs --probe"))?;
    let cmp = compare_orders(&potential, spec, anchor, probe, cfg.abs_tol)?;
    let mut table = Table::new(vec!["anchor", "probe", "err_first", "err_third", "ratio"]);
    table.push(vec![anchor.into(), probe.into(), cmp.err_first.into(), cmp.err_third.into(), cmp.ratio().into()]);
    emit_table(&table, cfg)?;
    Ok(exit::OK)
}

pub fn quantize(args: &QuantizeArgs) -> Result<i32, CliError> {
    let mut settings = args.common.settings()?;
    settings.set_flag("charge", args.charge.as_deref());
    settings.set_flag("l", args.l.as_deref());
    settings.set_flag("nr", args.nr.as_deref());
    let cfg = RunConfig::from_settings(&settings)?;
    if cfg.potential.is_some() || cfg.q2.is_some() {
        return Err(CliError::usage("quantize builds its own Coulomb potential; drop --potential/--expr/--q2"));
    }
    let count = |t: &str| t.trim().parse::<u32>().map_err(|_| format!("`{}` is not a non-negative integer", t.trim()));
    let charge = settings.field("charge", parse_finite)?.unwrap_or(1.0);
    let l = settings.field("l", count)?.unwrap_or(0);
    let nr = settings.field("nr", count)?.unwrap_or(0);
    let bracket = match &args.bracket {
        Some(text) => Some(parse_pair(text).map_err(|e| CliError::usage(format!("flag --bracket: {e}")))?),
        None => None,
    };

    let mut prob = BoundStateProblem::new(charge, l, nr);
    // presets that read `l` resolve against the problem's own potential
    let probe_potential = prob.potential(prob.bohr_energy())?;
    prob = prob.with_spec(cfg.build_spec(&probe_potential, Preset::KramersLanger)?);
    let energy = match bracket {
        Some(b) => eigenvalue(&prob, b)?,
        None => prob.solve()?,
    };
    let mut table = Table::new(vec!["charge", "l", "n_r", "s", "energy", "bohr_energy"]);
    table.push(vec![
        charge.into(),
        (l as f64).into(),
        (nr as f64).into(),
        prob.spec.s.into(),
        energy.into(),
        prob.bohr_energy().into(),
    ]);
    emit_table(&table, &cfg)?;
    Ok(exit::OK)
}

/// One corpus entry per non-blank line:
/// `potential=airy s=0 interval=1:10 [params=…] [preset=…] [domain=lo:hi] [anchors=a:b] [q2=…] [name=…]`.
pub fn parse_corpus(text: &str) -> Result<Vec<CorpusEntry>, CliError> {
    let mut corpus = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = |field: &str, msg: String| CliError::usage(format!("corpus line {line_no}, field `{field}`: {msg}"));
        let mut fields = std::collections::BTreeMap::new();
        for token in line.split_whitespace() {
            let (k, v) = token
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("corpus line {line_no}: expected `key=value`, got `{token}`")))?;
            if !["potential", "params", "s", "preset", "interval", "domain", "anchors", "q2", "name"].contains(&k) {
                return Err(CliError::usage(format!("corpus line {line_no}: unknown key `{k}`")));
            }
            fields.insert(k, v);
        }
        let get = |k: &str| fields.get(k).copied();
        let params = ParamSet::parse_list(get("params").unwrap_or("")).map_err(|e| at("params", e.to_string()))?;
        let selector = PotentialSelector::parse(get("potential").ok_or_else(|| at("potential", "missing".into()))?)
            .map_err(|e| at("potential", e))?;
        let domain = get("domain").map(parse_pair).transpose().map_err(|e| at("domain", e))?;
        let potential = match selector {
            PotentialSelector::Family(f) => {
                let p = Potential::family(f, &params).map_err(|e| at("potential", e.to_string()))?;
                match domain {
                    Some((lo, hi)) => p.with_domain(Interval::new(lo, hi)).map_err(|e| at("domain", e.to_string()))?,
                    None => p,
                }
            }
            PotentialSelector::Expression(src) => {
                let d = domain.map_or(Interval::real_line(), |(lo, hi)| Interval::new(lo, hi));
                Potential::parse(&src, &params, d).map_err(|e| at("potential", e.to_string()))?
            }
        };
        let spec = match (get("s"), get("preset")) {
            (Some(_), Some(_)) => return Err(at("s", "give either s or preset, not both".into())),
            (Some(s), None) => BaseSpec::custom(parse_finite(s).map_err(|e| at("s", e))?),
            (None, Some(p)) => {
                let preset = Preset::from_name(p).map_err(|e| at("preset", e.to_string()))?;
                BaseSpec::from_preset(preset, &potential).map_err(|e| at("preset", e.to_string()))?
            }
            (None, None) => BaseSpec::unmodified(),
        };
        let interval = parse_pair(get("interval").ok_or_else(|| at("interval", "missing".into()))?)
            .map_err(|e| at("interval", e))?;
        let name = get("name").map_or_else(|| format!("{}/s={}", potential.label(), spec.s), str::to_string);
        let base = match get("q2") {
            None => BaseFunction::new(potential, spec),
            Some(src) => {
                let q2 = pim_core::parse(src).map_err(|e| at("q2", e.to_string()))?;
                BaseFunction::with_q2_override(potential, spec, &q2, &params)
            }
        }
        .map_err(|e| at("potential", e.to_string()))?;
        let mut entry = CorpusEntry::new(name, base, interval);
        if let Some(a) = get("anchors") {
            let (a1, a2) = parse_pair(a).map_err(|e| at("anchors", e))?;
            entry = entry.with_anchors(a1, a2);
        }
        corpus.push(entry);
    }
    Ok(corpus)
}

pub fn verify(args: &VerifyArgs) -> Result<i32, CliError> {
    let corpus = match &args.corpus {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::usage(format!("cannot read corpus {}: {e}", path.display())))?;
            parse_corpus(&text)?
        }
        None => builtin_corpus()?,
    };
    let checks = match &args.checks {
        Some(list) => list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(Check::from_name)
            .collect::<Result<Vec<_>, _>>()?,
        None => Check::ALL.to_vec(),
    };
    let format = match &args.format {
        Some(f) => Some(Format::parse(f).map_err(|e| CliError::usage(format!("flag --format: {e}")))?),
        None => None,
    };
    let report = Suite::builtin()?.with_corpus(corpus).with_checks(checks).run()?;

    let text = match format {
        None => report.checks.iter().map(|c| format!("{c}\n")).collect::<String>(),
        Some(format) => {
            let mut table = Table::new(vec!["check", "worst", "threshold", "samples", "passed", "worst_at", "worst_z"]);
            for c in &report.checks {
                let (entry, z) = match &c.worst_at {
                    Some((entry, z)) => (Cell::Text(entry.clone()), Cell::Num(*z)),
                    None => (Cell::Empty, Cell::Empty),
                };
                table.push(vec![
                    c.check.name().into(),
                    c.worst.into(),
                    c.threshold.into(),
                    (c.samples as f64).into(),
                    if c.passed { "true" } else { "false" }.into(),
                    entry,
                    z,
                ]);
            }
            table.render(format)
        }
    };
    emit(&text, args.out.as_deref().map(Path::new))?;
    if report.passed() {
        Ok(exit::OK)
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.check.name()).collect();
        eprintln!("verification failed: {}", failed.join(", "));
        Ok(exit::VERIFICATION)
    }
}

pub fn parse_check(args: &ParseCheckArgs) -> Result<i32, CliError> {
    let source = &args.expression;
    let e = pim_core::parse(source).map_err(|err| CliError::expression(source, err.into()))?;
    let params = e.parameters();
    let text = format!(
        "expression: {e}\nderivative: {}\nparameters: {}\n",
        e.differentiate(),
        if params.is_empty() { "(none)".to_string() } else { params.join(", ") }
    );
    emit(&text, None)?;
    Ok(exit::OK)
}
