//! Numeric verification of the configuration-curve claims: sampled fibres
//! with membership and Jacobian rank, branch counts of the tower, fibre
//! degrees of the coordinate projections, and the genus formula.
//!
//! Every random draw comes from a ChaCha stream keyed by `(seed, purpose)`,
//! so a run is reproducible regardless of thread scheduling.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config_curve::{genus_closed_form, genus_recursion, ConfigCurve, ConfigTuple, Verdict};
use crate::elliptic::EllipticCurve;
use crate::error::{Error, Result};
use crate::generic_points::{find_generic_points, Certificate, CertificateKind, Parameter, SearchOptions};
use crate::genus2::{GenusTwoCurve, GenusTwoPoint};
use crate::scalar::{ApproxCtx, Complex};
use crate::SCHEMA_VERSION;

const PROJECTION_STREAM: u64 = 1 << 40;
const MAX_COUNTEREXAMPLES: usize = 5;
const MAX_REDRAWS: usize = 64;

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub samples: usize,
    pub seed: u64,
    pub ctx: ApproxCtx,
    pub search: SearchOptions,
    /// Number of precision doublings allowed for an ambiguous check.
    pub max_escalations: u32,
    /// Generic values per projection, besides `s±`.
    pub generic_values: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            samples: 100,
            seed: 0,
            ctx: ApproxCtx::default(),
            search: SearchOptions::default(),
            max_escalations: 1,
            generic_values: 10,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub name: &'static str,
    pub passed: u64,
    pub failed: u64,
    /// Still ambiguous after escalation; counts as a failure.
    pub ambiguous: u64,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally {
            name,
            ..Tally::default()
        }
    }

    fn record(&mut self, ok: bool) {
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
        }
    }

    pub fn ok(&self) -> bool {
        self.failed == 0 && self.ambiguous == 0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Counterexample {
    pub check: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample: Option<usize>,
    pub precision_bits: usize,
    pub detail: String,
    pub data: serde_json::Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationRun {
    pub schema: &'static str,
    pub seed: u64,
    pub lambda: String,
    pub r: usize,
    pub tol: f64,
    pub precision_schedule: Vec<usize>,
    pub escalations: u32,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate_kind: Option<CertificateKind>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub multipliers: Vec<i64>,
    pub branch_count: Option<usize>,
    pub projection_degree: Option<usize>,
    #[serde(serialize_with = "ser_opt_u128")]
    pub genus_by_recursion: Option<u128>,
    #[serde(serialize_with = "ser_opt_u128")]
    pub genus_closed_form: Option<u128>,
    pub tallies: Vec<Tally>,
    pub counterexamples: Vec<Counterexample>,
    pub passed: bool,
    /// Excluded from JSON so that reports are byte-reproducible.
    #[serde(skip)]
    pub wall_time: Duration,
}

fn ser_opt_u128<S: serde::Serializer>(v: &Option<u128>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(n) => s.collect_str(n),
        None => s.serialize_none(),
    }
}

impl VerificationRun {
    pub fn tally(&self, name: &str) -> Option<&Tally> {
        self.tallies.iter().find(|t| t.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("run serializes")
    }
}

/// Runs `f` at `ctx`, doubling the precision while it reports
/// [`Error::PrecisionExhausted`], at most `max` times.
pub fn with_escalation<T>(ctx: ApproxCtx, max: u32, f: impl Fn(ApproxCtx) -> Result<T>) -> (Result<T>, ApproxCtx, u32) {
    let mut ctx = ctx;
    let mut used = 0;
    loop {
        match f(ctx) {
            Err(Error::PrecisionExhausted(_)) if used < max => {
                ctx = ctx.escalated();
                used += 1;
            }
            other => return (other, ctx, used),
        }
    }
}

fn ambiguous(what: &str) -> Error {
    Error::PrecisionExhausted(what.to_string())
}

struct Setup<'a> {
    lambda: &'a Parameter,
    cert: Option<&'a Certificate>,
}

impl Setup<'_> {
    fn curve(&self, ctx: ApproxCtx) -> Result<ConfigCurve<Complex>> {
        let x = GenusTwoCurve::new(self.lambda.to_complex(ctx))?;
        let e = self.cert.map(|c| c.points_complex(ctx)).unwrap_or_default();
        ConfigCurve::new(x, e)
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Abscissa uniform in the disk of radius 2, away from `x = 0`, as `f64`
/// parts so it is exact at every precision.
fn draw_x(rng: &mut ChaCha8Rng, tol: f64) -> Result<(f64, f64, bool)> {
    for _ in 0..MAX_REDRAWS {
        let u: f64 = rng.gen();
        let v: f64 = rng.gen();
        let sign: bool = rng.gen();
        let rad = 2.0 * u.sqrt();
        let theta = std::f64::consts::TAU * v;
        if rad >= 10.0 * tol {
            return Ok((rad * theta.cos(), rad * theta.sin(), sign));
        }
    }
    Err(Error::InvalidArgument(format!("tolerance {tol} leaves no room to sample |x| ≥ 10·tol inside |x| < 2")))
}

fn point_at(curve: &GenusTwoCurve<Complex>, draw: (f64, f64, bool), ctx: ApproxCtx) -> Result<GenusTwoPoint<Complex>> {
    let x = Complex::from_f64(draw.0, draw.1, ctx);
    let y = curve.rhs(&x).sqrt().ok_or_else(|| Error::InvalidArgument("square root failed".into()))?;
    Ok(GenusTwoPoint::affine(x, if draw.2 { y } else { crate::scalar::Field::neg(&y) }))
}

fn tuple_json(t: &ConfigTuple<Complex>) -> serde_json::Value {
    serde_json::to_value(t).expect("tuple serializes")
}

#[derive(Default)]
struct SampleResult {
    fiber_ok: bool,
    membership: (u64, u64),
    rank: (u64, u64),
    counterexamples: Vec<Counterexample>,
}

fn check_sample(setup: &Setup, draw: (f64, f64, bool), index: usize, ctx: ApproxCtx) -> Result<SampleResult> {
    let curve = setup.curve(ctx)?;
    let r = curve.r();
    let p1 = point_at(curve.curve(), draw, ctx)?;
    let fiber = curve.fiber_over_p1(&p1)?;
    let count = ConfigCurve::distinct_count(&fiber)?;
    let mut out = SampleResult {
        fiber_ok: count == 1 << (r - 1),
        ..SampleResult::default()
    };
    if !out.fiber_ok {
        out.counterexamples.push(Counterexample {
            check: "fiber_size",
            sample: Some(index),
            precision_bits: ctx.bits,
            detail: format!("{count} distinct tuples over p1, expected {}", 1 << (r - 1)),
            data: serde_json::to_value(&p1).expect("point serializes"),
        });
    }
    for t in &fiber {
        match curve.membership_verdict(t)? {
            Verdict::Holds => out.membership.0 += 1,
            Verdict::Ambiguous => return Err(ambiguous("membership")),
            Verdict::Fails => {
                out.membership.1 += 1;
                out.counterexamples.push(Counterexample {
                    check: "membership",
                    sample: Some(index),
                    precision_bits: ctx.bits,
                    detail: "tuple from fiber enumeration fails membership".into(),
                    data: tuple_json(t),
                });
                continue;
            }
        }
        let jac = curve.jacobian_at(t)?;
        if jac.rank == r - 1 {
            out.rank.0 += 1;
        } else {
            out.rank.1 += 1;
            out.counterexamples.push(Counterexample {
                check: "jacobian_rank",
                sample: Some(index),
                precision_bits: ctx.bits,
                detail: format!("rank {} < {}", jac.rank, r - 1),
                data: tuple_json(t),
            });
        }
    }
    Ok(out)
}

struct BranchResult {
    count: usize,
    membership: (u64, u64),
    rank: (u64, u64),
    riemann_hurwitz: (u64, u64),
    counterexamples: Vec<Counterexample>,
}

fn check_branch(setup: &Setup, ctx: ApproxCtx) -> Result<BranchResult> {
    let curve = setup.curve(ctx)?;
    let r = curve.r();
    let report = curve.tower_report()?;
    let branch = curve.branch_points_of_tower()?;
    let mut out = BranchResult {
        count: report.branch_count,
        membership: (0, 0),
        rank: (0, 0),
        riemann_hurwitz: (0, 0),
        counterexamples: Vec::new(),
    };
    for level in &report.levels {
        if level.riemann_hurwitz && level.connected && level.branch_count == 1 << level.r {
            out.riemann_hurwitz.0 += 1;
        } else {
            out.riemann_hurwitz.1 += 1;
            out.counterexamples.push(Counterexample {
                check: "riemann_hurwitz",
                sample: None,
                precision_bits: ctx.bits,
                detail: format!("level {} has {} branch points", level.r, level.branch_count),
                data: serde_json::to_value(level).expect("level serializes"),
            });
        }
    }
    for t in &branch {
        match curve.membership_verdict(t)? {
            Verdict::Holds => out.membership.0 += 1,
            Verdict::Ambiguous => return Err(ambiguous("branch membership")),
            Verdict::Fails => {
                out.membership.1 += 1;
                out.counterexamples.push(Counterexample {
                    check: "branch_membership",
                    sample: None,
                    precision_bits: ctx.bits,
                    detail: "branch point fails membership".into(),
                    data: tuple_json(t),
                });
                continue;
            }
        }
        let jac = curve.jacobian_at(t)?;
        if jac.rank == r - 1 && jac.critical == vec![r] {
            out.rank.0 += 1;
        } else {
            out.rank.1 += 1;
            out.counterexamples.push(Counterexample {
                check: "branch_rank",
                sample: None,
                precision_bits: ctx.bits,
                detail: format!("rank {} with critical coordinates {:?}", jac.rank, jac.critical),
                data: tuple_json(t),
            });
        }
    }
    Ok(out)
}

/// `(j, degree)` per projection, plus any counterexamples.
type ProjectionOutcome = (Vec<(usize, usize)>, Vec<Counterexample>);

fn check_projections(setup: &Setup, seed: u64, generic: usize, ctx: ApproxCtx) -> Result<ProjectionOutcome> {
    let curve = setup.curve(ctx)?;
    let r = curve.r();
    let x = curve.curve();
    let mut results = Vec::with_capacity(r);
    let mut cex = Vec::new();
    for j in 1..=r {
        let mut values = vec![x.s_plus()?, x.s_minus()?];
        let mut rng = rng_for(seed, PROJECTION_STREAM + j as u64);
        let mut redraws = 0;
        while values.len() < generic + 2 {
            let p = point_at(x, draw_x(&mut rng, ctx.tol)?, ctx)?;
            if curve.is_branch_value(j, &p)? {
                redraws += 1;
                if redraws > MAX_REDRAWS {
                    return Err(Error::SearchExhausted(format!("no generic value for π_{j}")));
                }
                continue;
            }
            values.push(p);
        }
        let expected = 1usize << (r - 1);
        match curve.projection_degree_estimate(j, &values) {
            Ok(d) => {
                if d != expected {
                    cex.push(Counterexample {
                        check: "projection_degree",
                        sample: None,
                        precision_bits: ctx.bits,
                        detail: format!("π_{j} has fibre size {d}, expected {expected}"),
                        data: serde_json::Value::Null,
                    });
                }
                results.push((j, d));
            }
            Err(Error::Inconsistent(msg)) => {
                cex.push(Counterexample {
                    check: "projection_degree",
                    sample: None,
                    precision_bits: ctx.bits,
                    detail: msg,
                    data: serde_json::Value::Null,
                });
                results.push((j, 0));
            }
            Err(e) => return Err(e),
        }
    }
    Ok((results, cex))
}

/// The full pipeline: discriminant, genericity certificate, sampled fibres,
/// branch points of the tower, projection degrees and genus.
pub fn verify_claim(lambda: &Parameter, r: usize, opts: &VerifyOptions) -> Result<VerificationRun> {
    let start = Instant::now();
    if r == 0 {
        return Err(Error::InvalidArgument("r must be at least 1".into()));
    }
    let ctx = opts.ctx;
    match lambda {
        Parameter::Exact(q) => EllipticCurve::new(q.clone()).map(|_| ())?,
        Parameter::Approx(z) => EllipticCurve::new(z.with_ctx(ctx)).map(|_| ())?,
    }
    let names = [
        "discriminant",
        "genericity_certificate",
        "fiber_size",
        "membership",
        "jacobian_rank",
        "branch_count",
        "branch_membership",
        "branch_rank",
        "riemann_hurwitz",
        "projection_degree",
        "genus",
    ];
    let mut tallies: Vec<Tally> = names.iter().map(|n| Tally::new(n)).collect();
    let idx = |name: &str| names.iter().position(|n| *n == name).expect("known tally");
    tallies[idx("discriminant")].record(true);
    let mut counterexamples = Vec::new();
    let mut schedule = vec![ctx.bits];
    let mut escalations = 0;

    let search = SearchOptions { ctx, ..opts.search };
    let cert = if r >= 2 { Some(find_generic_points(lambda, r, &search)?) } else { None };
    if let Some(c) = &cert {
        let ok = c.verify();
        tallies[idx("genericity_certificate")].record(ok);
        if !ok {
            counterexamples.push(Counterexample {
                check: "genericity_certificate",
                sample: None,
                precision_bits: ctx.bits,
                detail: "certificate failed re-verification".into(),
                data: serde_json::from_str(&c.to_json()).expect("certificate json"),
            });
        }
    }
    let setup = Setup {
        lambda,
        cert: cert.as_ref(),
    };

    let draws: Vec<(f64, f64, bool)> = (0..opts.samples)
        .map(|s| draw_x(&mut rng_for(opts.seed, s as u64), ctx.tol))
        .collect::<Result<_>>()?;
    let sample_results: Vec<_> = draws
        .par_iter()
        .enumerate()
        .map(|(i, d)| with_escalation(ctx, opts.max_escalations, |c| check_sample(&setup, *d, i, c)))
        .collect();
    for (res, used_ctx, used) in sample_results {
        escalations += used;
        schedule.push(used_ctx.bits);
        match res {
            Ok(s) => {
                tallies[idx("fiber_size")].record(s.fiber_ok);
                let m = &mut tallies[idx("membership")];
                m.passed += s.membership.0;
                m.failed += s.membership.1;
                let k = &mut tallies[idx("jacobian_rank")];
                k.passed += s.rank.0;
                k.failed += s.rank.1;
                counterexamples.extend(s.counterexamples);
            }
            Err(Error::PrecisionExhausted(_)) => tallies[idx("fiber_size")].ambiguous += 1,
            Err(e) => return Err(e),
        }
    }

    let (branch, used_ctx, used) = with_escalation(ctx, opts.max_escalations, |c| check_branch(&setup, c));
    escalations += used;
    schedule.push(used_ctx.bits);
    let mut branch_count = None;
    match branch {
        Ok(b) => {
            branch_count = Some(b.count);
            let ok = b.count == 1 << r;
            tallies[idx("branch_count")].record(ok);
            if !ok {
                counterexamples.push(Counterexample {
                    check: "branch_count",
                    sample: None,
                    precision_bits: used_ctx.bits,
                    detail: format!("{} distinct branch points, expected {}", b.count, 1usize << r),
                    data: serde_json::Value::Null,
                });
            }
            for (name, (p, f)) in [("branch_membership", b.membership), ("branch_rank", b.rank), ("riemann_hurwitz", b.riemann_hurwitz)] {
                let t = &mut tallies[idx(name)];
                t.passed += p;
                t.failed += f;
            }
            counterexamples.extend(b.counterexamples);
        }
        Err(Error::PrecisionExhausted(_)) => tallies[idx("branch_count")].ambiguous += 1,
        Err(e) => return Err(e),
    }

    let (proj, used_ctx, used) = with_escalation(ctx, opts.max_escalations, |c| check_projections(&setup, opts.seed, opts.generic_values, c));
    escalations += used;
    schedule.push(used_ctx.bits);
    let mut projection_degree = None;
    match proj {
        Ok((degrees, cex)) => {
            for &(_, d) in &degrees {
                tallies[idx("projection_degree")].record(d == 1 << (r - 1));
            }
            projection_degree = degrees.first().map(|&(_, d)| d);
            counterexamples.extend(cex);
        }
        Err(Error::PrecisionExhausted(_)) => tallies[idx("projection_degree")].ambiguous += 1,
        Err(e) => return Err(e),
    }

    let (genus_by_recursion, genus_closed) = if r as u32 <= crate::config_curve::MAX_GENUS_R {
        let a = genus_recursion(r as u32)?;
        let b = genus_closed_form(r as u32)?;
        tallies[idx("genus")].record(a == b);
        (Some(a), Some(b))
    } else {
        (None, None)
    };

    counterexamples.truncate(MAX_COUNTEREXAMPLES * names.len());
    let mut per_check: Vec<Counterexample> = Vec::new();
    for name in names {
        per_check.extend(counterexamples.iter().filter(|c| c.check == name).take(MAX_COUNTEREXAMPLES).cloned());
    }
    schedule.sort_unstable();
    schedule.dedup();
    let passed = tallies.iter().all(Tally::ok);
    Ok(VerificationRun {
        schema: SCHEMA_VERSION,
        seed: opts.seed,
        lambda: lambda.to_string(),
        r,
        tol: ctx.tol,
        precision_schedule: schedule,
        escalations,
        samples: opts.samples,
        certificate_kind: cert.as_ref().map(Certificate::kind),
        multipliers: match &cert {
            Some(Certificate::Exact(c)) => c.multipliers.clone(),
            Some(Certificate::Approximate(c)) => c.multipliers.clone(),
            None => Vec::new(),
        },
        branch_count,
        projection_degree,
        genus_by_recursion,
        genus_closed_form: genus_closed,
        tallies,
        counterexamples: per_check,
        passed,
        wall_time: start.elapsed(),
    })
}
