//! End-to-end acceptance suite. Each criterion prints one PASS/FAIL line;
//! the process exits nonzero if any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use kodaira::config_curve::{genus_closed_form, genus_recursion, ConfigCurve};
use kodaira::elliptic::EllipticPoint;
use kodaira::generic_points::{find_generic_points, find_generic_points_exact, verify_certificate, CertificateKind, Parameter, SearchOptions};
use kodaira::genus2::{GenusTwoCurve, GenusTwoPoint};
use kodaira::intersection::derive_k_squared;
use kodaira::invariants::{slope_value, GammaMode, InvariantReport};
use kodaira::scalar::{ApproxCtx, Complex, Rational, Symbol, SymbolicScalar};
use kodaira::verifier::{verify_claim, VerifyOptions};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_kodaira"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("kodaira {args:?} exited with {}: {}", out.status, String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn slope_formula() -> Outcome {
    let out = String::from_utf8(cli(&["slope-table", "--r-min", "8", "--r-max", "40"])?).map_err(|e| e.to_string())?;
    let mut lines = out.lines();
    ensure(lines.next() == Some("r,g,upsilon_num,upsilon_den,tau_formula"), || "unexpected header".into())?;
    let mut seen = 0;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let r: i64 = f[0].parse().map_err(|_| format!("bad row {line}"))?;
        let (num, den) = (4 * r + 19, 2 * r + 8);
        let g = gcd(num, den);
        let expected = (num / g, den / g);
        let got: (i64, i64) = (f[2].parse().unwrap_or(0), f[3].parse().unwrap_or(0));
        ensure(got == expected, || format!("r = {r}: {got:?} ≠ {expected:?}"))?;
        if r == 8 {
            ensure(got == (17, 8), || "r = 8 is not 17/8".into())?;
        }
        seen += 1;
    }
    ensure(seen == 17, || format!("expected 17 even rows, got {seen}"))?;
    Ok("17 rows exact, r = 8 gives 17/8".into())
}

fn s(sym: Symbol) -> SymbolicScalar {
    SymbolicScalar::symbol(sym)
}

fn k_squared_identity() -> Outcome {
    let d = derive_k_squared().map_err(|e| e.to_string())?;
    let (r, g, one) = (s(Symbol::R), s(Symbol::Gamma), SymbolicScalar::one());
    let two = SymbolicScalar::int(2);
    let closed = SymbolicScalar::int(8)
        .add(&two.mul(&r))
        .mul(&two.mul(&g).sub(&two))
        .add(&SymbolicScalar::int(3).mul(&g.sub(&one)));
    ensure(d.k_squared == closed, || format!("derived {} vs {closed}", d.k_squared))?;
    ensure(d.via_three_halves == closed, || "three-halves route disagrees".into())?;
    Ok(format!("K² = {}", d.k_squared))
}

fn adjunction_relation() -> Outcome {
    let d = derive_k_squared().map_err(|e| e.to_string())?;
    let half_x1 = SymbolicScalar::ratio(-1, 2).mul(&s(Symbol::X1));
    ensure(d.adjunction.section_square == half_x1, || format!("R² = {}", d.adjunction.section_square))?;
    ensure(d.adjunction.x2 == s(Symbol::X1), || "x2 ≠ x1".into())?;
    let expected = s(Symbol::Gamma)
        .sub(&SymbolicScalar::one())
        .neg()
        .div(&s(Symbol::R))
        .map_err(|e| e.to_string())?;
    ensure(d.section_square == expected, || format!("R² after counts = {}", d.section_square))?;
    Ok(format!("R² = −x1/2 = {}", d.section_square))
}

fn genus_claim() -> Outcome {
    for r in 1..=16u32 {
        let (a, b) = (genus_recursion(r).map_err(|e| e.to_string())?, genus_closed_form(r).map_err(|e| e.to_string())?);
        let independent = r as u128 * (1u128 << (r - 1)) + 1;
        ensure(a == b && b == independent, || format!("r = {r}: {a}, {b}, {independent}"))?;
    }
    ensure(genus_recursion(1) == Ok(2) && genus_recursion(8) == Ok(1025), || "g(1), g(8)".into())?;
    let out: serde_json::Value = serde_json::from_slice(&cli(&["genus", "--r", "8"])?).map_err(|e| e.to_string())?;
    ensure(out["recursion"] == 1025 && out["closed_form"] == 1025, || format!("cli: {out}"))?;
    Ok("r = 1..16 agree, g(8) = 1025".into())
}

fn config_curve(lambda: &str, r: usize, ctx: ApproxCtx) -> Result<ConfigCurve<Complex>, String> {
    let param = Parameter::parse(lambda, ctx).map_err(|e| e.to_string())?;
    let opts = SearchOptions { ctx, ..SearchOptions::default() };
    let cert = find_generic_points(&param, r, &opts).map_err(|e| e.to_string())?;
    let x = GenusTwoCurve::new(param.to_complex(ctx)).map_err(|e| e.to_string())?;
    ConfigCurve::new(x, cert.points_complex(ctx)).map_err(|e| e.to_string())
}

fn branch_count() -> Outcome {
    let ctx = ApproxCtx::new(256, 1e-30);
    let mut slowest = Duration::ZERO;
    for lambda in ["1/1", "0.5,0.25"] {
        for r in 2..=5usize {
            let start = Instant::now();
            let report = config_curve(lambda, r, ctx)?.tower_report().map_err(|e| e.to_string())?;
            for level in &report.levels {
                ensure(level.branch_count == 1 << level.r, || format!("λ = {lambda}, r = {}: {} branch points", level.r, level.branch_count))?;
            }
            let t = start.elapsed();
            ensure(t < Duration::from_secs(10), || format!("λ = {lambda}, r = {r} took {t:?}"))?;
            slowest = slowest.max(t);
        }
    }
    Ok(format!("2^r distinct points for r ≤ 5, slowest case {:.2} s", slowest.as_secs_f64()))
}

fn smoothness() -> Outcome {
    let ctx = ApproxCtx::new(256, 1e-30);
    let lambda = Parameter::parse("1/1", ctx).map_err(|e| e.to_string())?;
    let mut total = 0;
    for r in 2..=6usize {
        let opts = VerifyOptions {
            samples: 100,
            seed: r as u64,
            ctx,
            ..VerifyOptions::default()
        };
        let run = verify_claim(&lambda, r, &opts).map_err(|e| e.to_string())?;
        let t = run.tally("jacobian_rank").ok_or("no rank tally")?;
        ensure(t.failed == 0 && t.ambiguous == 0 && t.passed >= 100, || format!("r = {r}: {t:?}"))?;
        total += t.passed;
    }
    Ok(format!("{total} rank checks, zero failures"))
}

fn generic_values(curve: &GenusTwoCurve<Complex>, ctx: ApproxCtx) -> Vec<GenusTwoPoint<Complex>> {
    (0..10)
        .map(|k| {
            let x = Complex::from_f64(0.37 + 0.11 * k as f64, 0.23 - 0.07 * k as f64, ctx);
            let y = curve.rhs(&x).sqrt().expect("complex square root");
            GenusTwoPoint::affine(x, y)
        })
        .collect()
}

fn projection_degrees() -> Outcome {
    let ctx = ApproxCtx::new(256, 1e-30);
    for r in 2..=5usize {
        let cc = config_curve("1/1", r, ctx)?;
        let x = cc.curve();
        let mut values = vec![x.s_plus().map_err(|e| e.to_string())?, x.s_minus().map_err(|e| e.to_string())?];
        values.extend(generic_values(x, ctx));
        for j in 1..=r {
            let deg = cc.projection_degree_estimate(j, &values).map_err(|e| format!("r = {r}, j = {j}: {e}"))?;
            ensure(deg == 1 << (r - 1), || format!("r = {r}, j = {j}: degree {deg}"))?;
        }
    }
    Ok("fibres over s₁, t₁ and 10 generic values have 2^(r−1) points".into())
}

fn genericity_search() -> Outcome {
    let one = Rational::one();
    let opts = SearchOptions::default();
    for r in 2..=12usize {
        let cert = find_generic_points_exact(&one, r, &opts).map_err(|e| e.to_string())?;
        ensure(cert.kind == CertificateKind::Exact, || format!("r = {r}: not exact"))?;
        ensure(verify_certificate(&cert), || format!("r = {r}: does not verify"))?;
        for i in 0..cert.points.len() {
            let mut bad = cert.clone();
            bad.points[i] = cert.delta.clone();
            ensure(!verify_certificate(&bad), || format!("r = {r}: e_{} = δ still verifies", i + 2))?;
        }
        if r == 12 {
            ensure(cert.points.iter().all(|p| !matches!(p, EllipticPoint::Infinity)), || "∞ in certificate".into())?;
        }
    }
    Ok("exact certificates for r = 2..12, every δ substitution rejected".into())
}

fn invariant_coherence() -> Outcome {
    let report = InvariantReport::new(8, GammaMode::Numeric { gamma: 2 }).map_err(|e| e.to_string())?;
    let val = |v: &SymbolicScalar| v.as_rational().ok_or_else(|| format!("{v} is not a number"));
    let q = |n, d| Rational::new(n, d).expect("nonzero denominator");
    let (e, k2, u, tau) = (val(&report.e)?, val(&report.k_squared)?, val(&report.upsilon)?, val(&report.tau)?);
    ensure(e == q(24, 1) && k2 == q(51, 1) && u == q(17, 8) && tau == q(1, 1), || format!("e = {e}, K² = {k2}, υ = {u}, τ = {tau}"))?;
    let from_slope = &(&e * &(&u - &q(2, 1))) / &q(3, 1);
    ensure(tau == from_slope && tau == q(2 - 1, 1), || "signature identities".into())?;
    ensure(report.identities_hold(), || "report identities".into())?;
    for r in (2..=200u32).step_by(2) {
        let v = slope_value(r).map_err(|e| e.to_string())?;
        ensure(v > q(2, 1) && v < q(8, 3), || format!("r = {r}: υ = {v}"))?;
    }
    Ok("e = 24, K² = 51, υ = 17/8, τ = 1; υ ∈ (2, 8/3) for even r ≤ 200".into())
}

fn determinism() -> Outcome {
    let args = ["verify-config-curve", "--r", "3", "--samples", "40", "--seed", "7"];
    let a = cli(&args)?;
    let b = cli(&args)?;
    ensure(a == b, || "outputs differ".into())?;
    let v: serde_json::Value = serde_json::from_slice(&a).map_err(|e| e.to_string())?;
    ensure(v["schema"] == "1" && v["passed"] == true, || "run did not pass".into())?;
    Ok(format!("{} identical bytes", a.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("slope formula", slope_formula, Some(Duration::from_secs(1))),
        ("K² identity", k_squared_identity, Some(Duration::from_secs(1))),
        ("adjunction relation", adjunction_relation, None),
        ("genus claim", genus_claim, Some(Duration::from_secs(1))),
        ("branch count", branch_count, None),
        ("smoothness", smoothness, Some(Duration::from_secs(30))),
        ("projection degrees", projection_degrees, None),
        ("genericity search", genericity_search, Some(Duration::from_secs(5))),
        ("invariant coherence", invariant_coherence, None),
        ("determinism", determinism, None),
    ];
    let mut failures = 0;
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut outcome = check();
        let elapsed = start.elapsed();
        if let (Ok(_), Some(limit)) = (&outcome, budget) {
            if elapsed >= *limit {
                outcome = Err(format!("took {:.2} s, budget {:.0} s", elapsed.as_secs_f64(), limit.as_secs_f64()));
            }
        }
        match outcome {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({:.2} s) {detail}", i + 1, elapsed.as_secs_f64()),
            Err(why) => {
                failures += 1;
                println!("criterion {:>2} {name}: FAIL ({:.2} s) {why}", i + 1, elapsed.as_secs_f64());
            }
        }
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all 10 acceptance criteria passed");
}
