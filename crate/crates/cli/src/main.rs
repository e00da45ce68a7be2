use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use kodaira::config_curve::{genus_closed_form, genus_recursion, projection_degree};
use kodaira::elliptic::{discriminant, EllipticCurve, EllipticPoint, JInvariant};
use kodaira::generic_points::{find_generic_points, Certificate, Parameter, SearchOptions, SearchStrategy};
use kodaira::intersection::{build_table, derive_k_squared};
use kodaira::invariants::{slope_table, slope_table_csv, GammaMode, InvariantReport};
use kodaira::scalar::{Field, QuadExt, QuadField, Symbol, SymbolicScalar};
use kodaira::verifier::{verify_claim, VerifyOptions};
use kodaira::{ApproxCtx, Error, SCHEMA_VERSION};

const EXIT_USAGE: u8 = 2;
const EXIT_FAILED: u8 = 3;
const EXIT_PRECISION: u8 = 4;
const EXIT_BAD_LAMBDA: u8 = 5;
const EXIT_ODD_R: u8 = 6;

/// Explicit Kodaira fibrations: curves, configuration curves and invariants.
#[derive(Parser, Debug)]
#[command(name = "kodaira", version)]
struct Cli {
    #[command(flatten)]
    run: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct RunConfig {
    /// Curve parameter: "num/den" (exact) or "re,im" (approximate).
    #[arg(long, global = true, default_value = "1/1", allow_hyphen_values = true)]
    lambda: String,
    /// Working precision in bits for approximate arithmetic.
    #[arg(long, global = true, env = "KODAIRA_PRECISION", default_value_t = 256)]
    precision: usize,
    /// Equality tolerance for approximate arithmetic.
    #[arg(long, global = true, default_value_t = 1e-30)]
    tol: f64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Height bound for the rational point search.
    #[arg(long, global = true, default_value_t = 50)]
    bound: u64,
    /// Output format; each subcommand picks a default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Strategy {
    Rational,
    Branch,
    Approximate,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Discriminant, j-invariant, branch images and δ.
    CurveInfo,
    /// Search for generic points and print the certificate.
    FindPoints {
        #[arg(long)]
        r: usize,
        #[arg(long, value_enum)]
        strategy: Option<Strategy>,
    },
    /// Sample the configuration curve and check its claimed properties.
    VerifyConfigCurve {
        #[arg(long)]
        r: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        max_escalations: u32,
    },
    /// Genus of the configuration curve, by recursion and closed form.
    Genus {
        #[arg(long)]
        r: u32,
    },
    /// Derive K² from the intersection table.
    KSquared {
        #[arg(long, conflicts_with = "symbolic", allow_hyphen_values = true)]
        gamma: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        r: Option<i64>,
        #[arg(long)]
        symbolic: bool,
    },
    /// Euler number, K², signature and slope of the surface.
    Invariants {
        #[arg(long)]
        r: u32,
        #[arg(long, conflicts_with = "deg_zeta", allow_hyphen_values = true)]
        gamma: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        deg_zeta: Option<i64>,
    },
    /// Exact slopes for even r in a range.
    SlopeTable {
        #[arg(long)]
        r_min: u32,
        #[arg(long)]
        r_max: u32,
    },
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::SingularCurve(_) => EXIT_BAD_LAMBDA,
            Error::PrecisionExhausted(_) => EXIT_PRECISION,
            Error::InvalidArgument(_) => EXIT_USAGE,
            _ => EXIT_FAILED,
        };
        Failure::new(code, e.to_string())
    }
}

/// Rendered output and whether the run counts as a pass.
struct Outcome {
    body: String,
    passed: bool,
}

impl Outcome {
    fn ok(body: String) -> Self {
        Outcome { body, passed: true }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            if let Err(f) = emit(&cli.run, &outcome.body) {
                eprintln!("error: {}", f.message);
                return ExitCode::from(f.code);
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FAILED)
            }
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn emit(cfg: &RunConfig, body: &str) -> Result<(), Failure> {
    let mut text = body.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match &cfg.output {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::new(EXIT_USAGE, format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn ctx(cfg: &RunConfig) -> Result<ApproxCtx, Failure> {
    if cfg.precision < 64 {
        return Err(Failure::new(EXIT_USAGE, format!("precision must be at least 64 bits, got {}", cfg.precision)));
    }
    if !(cfg.tol.is_finite() && cfg.tol > 0.0) {
        return Err(Failure::new(EXIT_USAGE, format!("tolerance must be positive, got {}", cfg.tol)));
    }
    Ok(ApproxCtx::new(cfg.precision, cfg.tol))
}

fn parameter(cfg: &RunConfig, ctx: ApproxCtx) -> Result<Parameter, Failure> {
    let lambda = Parameter::parse(&cfg.lambda, ctx)
        .map_err(|e| Failure::new(EXIT_BAD_LAMBDA, format!("cannot parse λ = {:?}: {e}", cfg.lambda)))?;
    let singular = match &lambda {
        Parameter::Exact(q) => EllipticCurve::new(q.clone()).is_err(),
        Parameter::Approx(z) => EllipticCurve::new(z.clone()).is_err(),
    };
    if singular {
        return Err(Failure::new(EXIT_BAD_LAMBDA, format!("λ = {} gives a singular curve", cfg.lambda)));
    }
    Ok(lambda)
}

fn require_even(r: u32) -> Result<(), Failure> {
    if r % 2 == 1 {
        return Err(Failure::new(EXIT_ODD_R, format!("r must be even, got {r}")));
    }
    Ok(())
}

fn format_or(cfg: &RunConfig, default: Format, allowed: &[Format]) -> Result<Format, Failure> {
    let f = cfg.format.unwrap_or(default);
    if !allowed.contains(&f) {
        return Err(Failure::new(EXIT_USAGE, format!("format {f:?} is not available for this subcommand")));
    }
    Ok(f)
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes")
}

fn csv_rows<R: Serialize>(rows: &[R]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| Failure::new(EXIT_FAILED, e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::new(EXIT_FAILED, e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    let cfg = &cli.run;
    match &cli.command {
        Command::CurveInfo => curve_info(cfg),
        Command::FindPoints { r, strategy } => find_points(cfg, *r, *strategy),
        Command::VerifyConfigCurve { r, samples, max_escalations } => verify(cfg, *r, *samples, *max_escalations),
        Command::Genus { r } => genus(cfg, *r),
        Command::KSquared { gamma, r, symbolic } => k_squared(cfg, *gamma, *r, *symbolic),
        Command::Invariants { r, gamma, deg_zeta } => invariants(cfg, *r, *gamma, *deg_zeta),
        Command::SlopeTable { r_min, r_max } => slopes(cfg, *r_min, *r_max),
    }
}

#[derive(Serialize)]
struct CurveInfo<F> {
    schema: &'static str,
    lambda: String,
    discriminant: F,
    j_invariant: JInvariant<F>,
    s_plus: EllipticPoint<F>,
    s_minus: EllipticPoint<F>,
    delta: EllipticPoint<F>,
}

fn describe<F: Field + Serialize>(lambda: String, curve: &EllipticCurve<F>) -> Result<CurveInfo<F>, Failure> {
    Ok(CurveInfo {
        schema: SCHEMA_VERSION,
        lambda,
        discriminant: discriminant(curve.lambda()),
        j_invariant: curve.j_invariant(),
        s_plus: curve.branch_image_plus()?,
        s_minus: curve.branch_image_minus()?,
        delta: curve.delta()?,
    })
}

fn render_info<F: Field + Serialize>(info: &CurveInfo<F>, format: Format) -> Result<String, Failure> {
    let rows = [
        ("lambda", info.lambda.clone()),
        ("discriminant", info.discriminant.to_string()),
        ("j_ratio", info.j_invariant.ratio.to_string()),
        ("j_standard", info.j_invariant.standard.to_string()),
        ("s_plus", info.s_plus.to_string()),
        ("s_minus", info.s_minus.to_string()),
        ("delta", info.delta.to_string()),
    ];
    Ok(match format {
        Format::Json => json(info),
        Format::Csv => csv_rows(&rows.iter().map(|(k, v)| KeyValue { key: k, value: v.clone() }).collect::<Vec<_>>())?,
        Format::Text => rows.iter().fold(String::new(), |mut s, (k, v)| {
            let _ = writeln!(s, "{k:<13} {v}");
            s
        }),
    })
}

#[derive(Serialize)]
struct KeyValue<'a> {
    key: &'a str,
    value: String,
}

fn curve_info(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let format = format_or(cfg, Format::Json, &[Format::Json, Format::Csv, Format::Text])?;
    let ctx = ctx(cfg)?;
    let body = match parameter(cfg, ctx)? {
        Parameter::Exact(q) => {
            let field = QuadField::new(q.clone()).map_err(Error::from)?;
            let curve = EllipticCurve::new(QuadExt::rational(q.clone(), &field))?;
            render_info(&describe(q.to_string(), &curve)?, format)?
        }
        Parameter::Approx(z) => {
            let curve = EllipticCurve::new(z.clone())?;
            render_info(&describe(cfg.lambda.clone(), &curve)?, format)?
        }
    };
    Ok(Outcome::ok(body))
}

fn search_options(cfg: &RunConfig, ctx: ApproxCtx, strategy: Option<Strategy>, lambda: &Parameter) -> SearchOptions {
    let strategy = match strategy {
        Some(Strategy::Rational) => SearchStrategy::MultiplesOfRationalPoint,
        Some(Strategy::Branch) => SearchStrategy::MultiplesOfBranchImage,
        Some(Strategy::Approximate) => SearchStrategy::Approximate,
        None if lambda.is_exact() => SearchStrategy::MultiplesOfRationalPoint,
        None => SearchStrategy::Approximate,
    };
    SearchOptions {
        strategy,
        bound: cfg.bound,
        ctx,
        ..SearchOptions::default()
    }
}

#[derive(Serialize)]
struct PointRow {
    index: usize,
    multiplier: i64,
    point: String,
}

fn find_points(cfg: &RunConfig, r: usize, strategy: Option<Strategy>) -> Result<Outcome, Failure> {
    let format = format_or(cfg, Format::Json, &[Format::Json, Format::Csv, Format::Text])?;
    let ctx = ctx(cfg)?;
    let lambda = parameter(cfg, ctx)?;
    let opts = search_options(cfg, ctx, strategy, &lambda);
    let cert = find_generic_points(&lambda, r, &opts)?;
    let passed = cert.verify();
    let (multipliers, points): (&[i64], Vec<String>) = match &cert {
        Certificate::Exact(c) => (&c.multipliers, c.points.iter().map(ToString::to_string).collect()),
        Certificate::Approximate(c) => (&c.multipliers, c.points.iter().map(ToString::to_string).collect()),
    };
    let rows: Vec<PointRow> = multipliers
        .iter()
        .zip(points)
        .enumerate()
        .map(|(i, (&m, p))| PointRow {
            index: i + 2,
            multiplier: m,
            point: p,
        })
        .collect();
    let body = match format {
        Format::Json => cert.to_json(),
        Format::Csv => csv_rows(&rows)?,
        Format::Text => {
            let mut s = format!("{:?} certificate for r = {r}, verified: {passed}\n", cert.kind());
            for row in &rows {
                let _ = writeln!(s, "e_{} = [{}]P = {}", row.index, row.multiplier, row.point);
            }
            s
        }
    };
    Ok(Outcome { body, passed })
}

fn verify(cfg: &RunConfig, r: usize, samples: usize, max_escalations: u32) -> Result<Outcome, Failure> {
    let format = format_or(cfg, Format::Json, &[Format::Json, Format::Csv, Format::Text])?;
    let ctx = ctx(cfg)?;
    let lambda = parameter(cfg, ctx)?;
    let opts = VerifyOptions {
        samples,
        seed: cfg.seed,
        ctx,
        search: search_options(cfg, ctx, None, &lambda),
        max_escalations,
        ..VerifyOptions::default()
    };
    let run = verify_claim(&lambda, r, &opts)?;
    let body = match format {
        Format::Json => run.to_json(),
        Format::Csv => csv_rows(&run.tallies)?,
        Format::Text => {
            let mut s = format!(
                "λ = {}, r = {r}, {} samples at {} bits (escalations: {})\n",
                run.lambda,
                run.samples,
                run.precision_schedule.last().copied().unwrap_or(cfg.precision),
                run.escalations
            );
            for t in &run.tallies {
                let _ = writeln!(s, "{:<22} passed {:>5}  failed {:>3}  ambiguous {:>3}", t.name, t.passed, t.failed, t.ambiguous);
            }
            let _ = writeln!(s, "{}", if run.passed { "PASS" } else { "FAIL" });
            s
        }
    };
    Ok(Outcome { body, passed: run.passed })
}

#[derive(Serialize)]
struct GenusReport {
    schema: &'static str,
    r: u32,
    recursion: u128,
    closed_form: u128,
    branch_points: u128,
    projection_degree: u128,
    agree: bool,
}

fn genus(cfg: &RunConfig, r: u32) -> Result<Outcome, Failure> {
    let format = format_or(cfg, Format::Json, &[Format::Json, Format::Csv, Format::Text])?;
    let recursion = genus_recursion(r)?;
    let closed_form = genus_closed_form(r)?;
    let report = GenusReport {
        schema: SCHEMA_VERSION,
        r,
        recursion,
        closed_form,
        branch_points: 1u128 << r,
        projection_degree: projection_degree(r),
        agree: recursion == closed_form,
    };
    let body = match format {
        Format::Json => json(&report),
        Format::Csv => csv_rows(&[&report])?,
        Format::Text => format!("genus by recursion {recursion}, closed form {closed_form}"),
    };
    Ok(Outcome { body, passed: report.agree })
}

#[derive(Serialize)]
struct KSquaredReport {
    schema: &'static str,
    gamma: Option<i64>,
    r: Option<i64>,
    k_squared: SymbolicScalar,
    derivation: kodaira::intersection::KSquaredDerivation,
}

fn k_squared(cfg: &RunConfig, gamma: Option<i64>, r: Option<i64>, symbolic: bool) -> Result<Outcome, Failure> {
    let format = format_or(cfg, Format::Json, &[Format::Json, Format::Text])?;
    let (gamma, r) = if symbolic { (None, None) } else { (gamma, r) };
    if let Some(g) = gamma {
        if g < 2 {
            return Err(Failure::new(EXIT_USAGE, format!("base genus must be at least 2, got {g}")));
        }
    }
    if let Some(r) = r {
        if r < 2 || r % 2 == 1 {
            return Err(Failure::new(EXIT_ODD_R, format!("r must be even and at least 2, got {r}")));
        }
    }
    let derivation = derive_k_squared()?;
    let mut value = derivation.k_squared.clone();
    if let Some(g) = gamma {
        value = value.substitute(Symbol::Gamma, &SymbolicScalar::int(g)).map_err(Error::from)?;
    }
    if let Some(r) = r {
        value = value.substitute(Symbol::R, &SymbolicScalar::int(r)).map_err(Error::from)?;
    }
    let body = match format {
        Format::Text => {
            let mut s = derivation.transcript.to_text(&build_table());
            let _ = writeln!(s, "K² = {value}");
            s
        }
        _ => json(&KSquaredReport {
            schema: SCHEMA_VERSION,
            gamma,
            r,
            k_squared: value,
            derivation,
        }),
    };
    Ok(Outcome::ok(body))
}

fn invariants(cfg: &RunConfig, r: u32, gamma: Option<i64>, deg_zeta: Option<i64>) -> Result<Outcome, Failure> {
    let format = format_or(cfg, Format::Json, &[Format::Json, Format::Csv, Format::Text])?;
    require_even(r)?;
    let mode = match (gamma, deg_zeta) {
        (Some(gamma), _) => GammaMode::Numeric { gamma },
        (None, Some(deg_zeta)) => GammaMode::FromDegZeta { deg_zeta },
        (None, None) => GammaMode::Symbolic,
    };
    let report = InvariantReport::new(r, mode)?;
    let passed = report.identities_hold() && report.range.all_hold();
    let rows = [
        ("r", report.r.to_string()),
        ("gamma", report.gamma.to_string()),
        ("g", report.g.to_string()),
        ("e", report.e.to_string()),
        ("k_squared", report.k_squared.to_string()),
        ("tau", report.tau.to_string()),
        ("upsilon", report.upsilon.to_string()),
        ("identities_hold", report.identities_hold().to_string()),
        ("range_holds", report.range.all_hold().to_string()),
    ];
    let body = match format {
        Format::Json => json(&report),
        Format::Csv => csv_rows(&rows.iter().map(|(k, v)| KeyValue { key: k, value: v.clone() }).collect::<Vec<_>>())?,
        Format::Text => rows.iter().fold(String::new(), |mut s, (k, v)| {
            let _ = writeln!(s, "{k:<16} {v}");
            s
        }),
    };
    Ok(Outcome { body, passed })
}

fn slopes(cfg: &RunConfig, r_min: u32, r_max: u32) -> Result<Outcome, Failure> {
    let format = format_or(cfg, Format::Csv, &[Format::Json, Format::Csv, Format::Text])?;
    if r_min > r_max {
        return Err(Failure::new(EXIT_USAGE, format!("empty range {r_min}..={r_max}")));
    }
    let rows = slope_table(r_min, r_max)?;
    let body = match format {
        Format::Csv => slope_table_csv(&rows)?,
        Format::Json => json(&rows),
        Format::Text => rows.iter().fold(String::new(), |mut s, row| {
            let _ = writeln!(s, "r = {:<4} g = {:<4} υ = {}/{}", row.r, row.g, row.upsilon_num, row.upsilon_den);
            s
        }),
    };
    Ok(Outcome::ok(body))
}
