use poussin::bounds::published;
use poussin::sieve::SieveConfig;
use poussin::theta::load_or_build;
use poussin::{
    lookup, BoundFamily, CheckOutcome, Coefficient, Dd, DerivedBound, EnvelopeFn, Error,
    ThetaTable, Threshold, Verdict, Verifier,
};

use crate::report::{Record, Report, Value};
use crate::{exit, Cli, Command, DeriveArgs, Failure, FamilyArgs, Global, VerifyArgs, Which};

type CmdResult = Result<(i32, Report), Failure>;

pub(crate) fn execute(cli: &Cli) -> CmdResult {
    let g = &cli.global;
    match &cli.command {
        Command::Derive(args) => derive(args),
        Command::Tables { which: Which::III } => table_iii(g),
        Command::Tables { which: Which::IV } => table_iv(),
        Command::Verify(args) => verify(g, args),
        Command::Xstar {
            tilde_a,
            tilde_c,
            x0,
        } => xstar(g, tilde_a, tilde_c, *x0),
        Command::MinPrefactor { tilde_c, from, to } => min_prefactor(g, tilde_c, *from, *to),
    }
}

fn coefficient(name: &str, text: &str) -> Result<Coefficient, Failure> {
    Coefficient::parse(text.to_owned()).map_err(|e| Failure::usage(format!("--{name}: {e}")))
}

fn number(name: &str, text: &str) -> Result<Dd, Failure> {
    coefficient(name, text).map(|c| c.value())
}

fn plain(x: f64) -> Value {
    Value::Float(x, format!("{x}"))
}

/// Catalog family, optionally with a, b, c overridden, or an explicit one.
fn resolve_family(args: &FamilyArgs, x0: Option<&str>) -> Result<BoundFamily, Failure> {
    let base = args.source.as_deref().map(lookup).transpose()?;
    let pick = |name: &str,
                given: &Option<String>,
                from_base: Option<&Coefficient>,
                default: Option<&str>| {
        match (given, from_base, default) {
            (Some(t), _, _) => coefficient(name, t),
            (None, Some(c), _) => Ok(c.clone()),
            (None, None, Some(d)) => coefficient(name, d),
            (None, None, None) => Err(Failure::usage(format!("--{name} or --source is required"))),
        }
    };
    let a = pick("a", &args.a, base.as_ref().map(|f| f.a()), None)?;
    let b = pick("b", &args.b, base.as_ref().map(|f| f.b()), Some("0"))?;
    let c = pick("c", &args.c, base.as_ref().map(|f| f.c()), None)?;
    let x0 = match (x0, &base) {
        (Some(t), _) => Threshold::parse(t).map_err(|e| Failure::usage(format!("--x0: {e}")))?,
        (None, Some(f)) => f.x0().clone(),
        (None, None) => Threshold::finite(2.0),
    };
    let modified = args.a.is_some() || args.b.is_some() || args.c.is_some();
    let source = match &base {
        Some(f) if !modified => f.source().to_owned(),
        Some(f) => format!("{} (modified)", f.source()),
        None => "explicit".to_owned(),
    };
    Ok(BoundFamily::new(a, b, c, x0, source)?)
}

fn table_for(g: &Global, hi: f64) -> Result<ThetaTable, Failure> {
    if hi > g.sieve_limit as f64 {
        return Err(Failure {
            code: exit::RANGE,
            message: format!("x = {hi} is beyond the sieve limit {}", g.sieve_limit),
        });
    }
    let cfg = SieveConfig::default();
    let table = match &g.cache_dir {
        Some(dir) => load_or_build(dir, g.sieve_limit, &cfg, &g.exec()),
        None => ThetaTable::build((hi.ceil() as u64).max(2), &cfg, &g.exec()),
    };
    table.map_err(|e| match e {
        Error::Io(_) | Error::Cache(_) => Failure {
            code: exit::IO,
            message: format!("theta table cache: {e}"),
        },
        e => e.into(),
    })
}

fn check_bounds(from: f64, to: f64) -> Result<(), Failure> {
    if !(from.is_finite() && to.is_finite()) || from >= to {
        return Err(Failure::usage(format!("empty range [{from}, {to}]")));
    }
    Ok(())
}

fn derive(args: &DeriveArgs) -> CmdResult {
    let family = resolve_family(&args.family, args.x0.as_deref())?;
    let tilde_c = number("ctilde", &args.ctilde)?;
    let bound = DerivedBound::from_lemma(&family, tilde_c)?;
    let tilde_a = bound.tilde_a();
    let peak = if family.b().value() > Dd::ZERO {
        let p = poussin::peak_location(family.b().value(), family.c().value(), tilde_c)?;
        let text = p.ln_x.to_sig_string(17);
        Value::Float(text.parse().unwrap_or(f64::NAN), text)
    } else {
        Value::Missing
    };
    let record = Record::new()
        .text("source", family.source())
        .text("a", family.a().text())
        .text("b", family.b().text())
        .text("c", family.c().text())
        .text("x0", family.x0().to_string())
        .text("ctilde", args.ctilde.clone())
        .text("tilde_a", tilde_a.to_sig_string(32))
        .with("tilde_a_10", Value::sig10(tilde_a))
        .with("ln_x_peak", peak);
    Ok((exit::HOLDS, Report::Single(record)))
}

fn table_iii(g: &Global) -> CmdResult {
    let rows = published::WIDELY_APPLICABLE;
    let x0_max = rows
        .iter()
        .filter_map(|r| lookup(r.0).ok()?.x0().as_f64())
        .fold(2.0, f64::max);
    let table = table_for(g, x0_max)?;
    let verifier = Verifier::new(&table, g.verify_options());
    let mut out = Vec::new();
    for (source, ctilde, paper, xs_paper) in rows {
        let family = lookup(source)?;
        let tilde_c = number("ctilde", ctilde)?;
        let tilde_a = DerivedBound::from_lemma(&family, tilde_c)?.tilde_a();
        let paper_value = number("tilde_a", paper)?;
        let x0 = family
            .x0()
            .as_f64()
            .expect("widely applicable families have finite thresholds");
        // x_* of the bound as printed.
        let env = EnvelopeFn::poussin(paper_value, tilde_c)?;
        let xs = verifier.find_x_star(&env, x0)?;
        out.push(
            Record::new()
                .text("source", source)
                .with("ctilde", Value::sig10(tilde_c))
                .with("tilde_a_recomputed", Value::sig10(tilde_a))
                .with(
                    "tilde_a_paper",
                    Value::Float(paper_value.to_f64(), paper.to_owned()),
                )
                .with("delta", Value::sig10(tilde_a - paper_value))
                .with("x_star_recomputed", Value::Int(xs.x_star))
                .with("x_star_paper", Value::Int(xs_paper)),
        );
    }
    Ok((exit::HOLDS, Report::Table(out)))
}

fn table_iv() -> CmdResult {
    let mut out = Vec::new();
    for (source, ctilde, paper, xs_paper) in published::ASYMPTOTIC {
        let family = lookup(source)?;
        let tilde_c = number("ctilde", ctilde)?;
        let tilde_a = DerivedBound::from_lemma(&family, tilde_c)?.tilde_a();
        let paper_value = number("tilde_a", paper)?;
        out.push(
            Record::new()
                .text("source", source)
                .with("ctilde", Value::sig10(tilde_c))
                .with("tilde_a_recomputed", Value::sig10(tilde_a))
                .with(
                    "tilde_a_paper",
                    Value::Float(paper_value.to_f64(), paper.to_owned()),
                )
                .with("delta", Value::sig10(tilde_a - paper_value))
                .with("x_star_recomputed", Value::Missing)
                .text("x_star_paper", xs_paper),
        );
    }
    Ok((exit::HOLDS, Report::Table(out)))
}

fn envelope(args: &VerifyArgs) -> Result<EnvelopeFn, Failure> {
    let f = &args.family;
    let generalized = f.source.is_some() || f.a.is_some() || f.b.is_some() || f.c.is_some();
    match (&args.tilde_a, &args.tilde_c) {
        (Some(a), Some(c)) if !generalized => Ok(EnvelopeFn::poussin(
            number("tilde-a", a)?,
            number("tilde-c", c)?,
        )?),
        (None, None) if generalized => Ok(EnvelopeFn::from_family(&resolve_family(f, None)?)),
        _ => Err(Failure::usage(
            "give either --tilde-a and --tilde-c, or --source / --a --b --c",
        )),
    }
}

fn outcome_record(out: &CheckOutcome) -> Record {
    Record::new()
        .text("status", out.status.as_str())
        .with("from", plain(out.lo))
        .with("to", plain(out.hi))
        .with("witness_x", out.witness_x.map_or(Value::Missing, plain))
        .with("lhs", out.lhs.map_or(Value::Missing, plain))
        .with("rhs", out.rhs.map_or(Value::Missing, plain))
        .with("slack", Value::opt_float(out.slack))
        .with("limit_touch", Value::Bool(out.limit_touch))
        .with("theta_err", Value::float(out.theta_err))
        .with("envelope_err", Value::float(out.envelope_err))
        .with("escalations", Value::Int(out.escalations))
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::Holds => exit::HOLDS,
        Verdict::Fails => exit::FAILS,
        Verdict::Inconclusive => exit::INCONCLUSIVE,
    }
}

fn verify(g: &Global, args: &VerifyArgs) -> CmdResult {
    let env = envelope(args)?;
    check_bounds(args.from, args.to)?;
    let table = table_for(g, args.to)?;
    let out = Verifier::new(&table, g.verify_options()).check_range(&env, args.from, args.to)?;
    Ok((
        verdict_code(out.status),
        Report::Single(outcome_record(&out)),
    ))
}

fn xstar(g: &Global, tilde_a: &str, tilde_c: &str, x0: f64) -> CmdResult {
    let env = EnvelopeFn::poussin(number("tilde-a", tilde_a)?, number("tilde-c", tilde_c)?)?;
    if !x0.is_finite() || x0 < 2.0 {
        return Err(Failure::usage(format!(
            "--x0 {x0} must be a finite number >= 2"
        )));
    }
    let table = table_for(g, x0)?;
    let xs = Verifier::new(&table, g.verify_options()).find_x_star(&env, x0)?;
    let record = Record::new()
        .with("x_star", Value::Int(xs.x_star))
        .with("verified_from", Value::Int(xs.x_star))
        .with("verified_to", plain(xs.x0))
        .with("not_extendable", Value::Bool(xs.not_extendable))
        .text("provenance", xs.provenance());
    Ok((exit::HOLDS, Report::Single(record)))
}

fn min_prefactor(g: &Global, tilde_c: &str, from: f64, to: f64) -> CmdResult {
    let c = number("tilde-c", tilde_c)?;
    check_bounds(from, to)?;
    let table = table_for(g, to)?;
    let m = Verifier::new(&table, g.verify_options()).min_prefactor(c, from, to)?;
    let record = Record::new()
        .text("tilde_c", tilde_c)
        .with("from", plain(from))
        .with("to", plain(to))
        .with("tilde_a_min", plain(m.value))
        .with("tilde_a_fails", plain(m.lower))
        .with("slack", Value::opt_float(m.outcome.slack));
    Ok((exit::HOLDS, Report::Single(record)))
}
