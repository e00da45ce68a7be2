//! Search for auxiliary points `e₂, …, e_r ∈ E_λ` such that every `e_i` and
//! every difference `e_i ⊖ e_j` avoids `∞`, `δ` and `⊖δ`, where
//! `δ = π(s₊) ⊖ π(s₋)`.
//!
//! The default strategy takes multiples `e_i = [m·i]P` of one base point `P`
//! and increases the stride `m` until every exclusion holds. Nothing about
//! the rank of `E_λ` is assumed: each exclusion is decided by evaluating the
//! group law.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;

use crate::elliptic::{EllipticCurve, EllipticPoint};
use crate::error::{Error, Result};
use crate::scalar::{ApproxCtx, Complex, Field, QuadExt, QuadField, Rational, ScalarError, Separation};
use crate::SCHEMA_VERSION;

/// The curve parameter, either exact or a complex approximation.
#[derive(Clone, Debug)]
pub enum Parameter {
    Exact(Rational),
    Approx(Complex),
}

impl Parameter {
    /// `"n/d"` or `"n"` is exact; `"re,im"` (decimal or rational parts) is
    /// approximate at `ctx`.
    pub fn parse(s: &str, ctx: ApproxCtx) -> std::result::Result<Self, ScalarError> {
        if s.contains(',') {
            Ok(Parameter::Approx(Complex::parse_with(s, ctx)?))
        } else if let Ok(q) = s.parse::<Rational>() {
            Ok(Parameter::Exact(q))
        } else {
            Ok(Parameter::Approx(Complex::parse_with(&format!("{s},0"), ctx)?))
        }
    }

    pub fn to_complex(&self, ctx: ApproxCtx) -> Complex {
        match self {
            Parameter::Exact(q) => q.to_complex(ctx),
            Parameter::Approx(z) => z.with_ctx(ctx),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Parameter::Exact(_))
    }
}

impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parameter::Exact(q) => q.fmt(f),
            Parameter::Approx(z) => z.fmt(f),
        }
    }
}

impl FromStr for Parameter {
    type Err = ScalarError;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Parameter::parse(s, ApproxCtx::default())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStrategy {
    /// A rational point found by x-coordinate search, else `(0, √λ)`.
    MultiplesOfRationalPoint,
    /// `(0, √λ) ∈ E_λ(ℚ(√λ))` directly.
    MultiplesOfBranchImage,
    /// Complex points with tolerance-certified separations.
    Approximate,
}

#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    pub strategy: SearchStrategy,
    /// Bound on `|a|` and `b` for candidate abscissae `a/b`.
    pub bound: u64,
    pub first_stride: i64,
    pub max_stride: i64,
    /// `[k]P ≠ ∞` is checked for `1 ≤ k ≤ torsion_bound`.
    pub torsion_bound: i64,
    pub ctx: ApproxCtx,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            strategy: SearchStrategy::MultiplesOfRationalPoint,
            bound: 50,
            first_stride: 1,
            max_stride: 64,
            torsion_bound: 24,
            ctx: ApproxCtx::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    Exact,
    Approximate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Excluded {
    Infinity,
    Delta,
    NegDelta,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub subject: String,
    pub excluded: Excluded,
    pub holds: bool,
}

/// The point a group of checks was evaluated on.
#[derive(Clone, Debug, Serialize)]
pub struct Witness<F> {
    pub subject: String,
    pub value: EllipticPoint<F>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GenericityCertificate<F> {
    pub schema: &'static str,
    pub kind: CertificateKind,
    pub strategy: SearchStrategy,
    pub lambda: F,
    pub base_point: EllipticPoint<F>,
    pub stride: i64,
    /// `n_i` with `e_i = [n_i]P`, for `i = 2, …, r`.
    pub multipliers: Vec<i64>,
    pub delta: EllipticPoint<F>,
    /// `e₂, …, e_r`.
    pub points: Vec<EllipticPoint<F>>,
    pub checks: Vec<Check>,
    pub witnesses: Vec<Witness<F>>,
}

impl<F: Field + Serialize> GenericityCertificate<F> {
    pub fn r(&self) -> usize {
        self.points.len() + 1
    }

    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    /// Canonical JSON: fixed field order, rationals as `"num/den"`.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }
}

/// A certificate of either kind.
#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum Certificate {
    Exact(GenericityCertificate<QuadExt>),
    Approximate(GenericityCertificate<Complex>),
}

impl Certificate {
    pub fn kind(&self) -> CertificateKind {
        match self {
            Certificate::Exact(_) => CertificateKind::Exact,
            Certificate::Approximate(_) => CertificateKind::Approximate,
        }
    }

    pub fn r(&self) -> usize {
        match self {
            Certificate::Exact(c) => c.r(),
            Certificate::Approximate(c) => c.r(),
        }
    }

    pub fn verify(&self) -> bool {
        match self {
            Certificate::Exact(c) => verify_certificate(c),
            Certificate::Approximate(c) => verify_certificate(c),
        }
    }

    pub fn to_json(&self) -> String {
        match self {
            Certificate::Exact(c) => c.to_json(),
            Certificate::Approximate(c) => c.to_json(),
        }
    }

    /// The points `e₂, …, e_r` embedded in the complex numbers.
    pub fn points_complex(&self, ctx: ApproxCtx) -> Vec<EllipticPoint<Complex>> {
        match self {
            Certificate::Exact(c) => c.points.iter().map(|p| p.map(|v| v.to_complex(ctx))).collect(),
            Certificate::Approximate(c) => c.points.iter().map(|p| p.map(|v| v.with_ctx(ctx))).collect(),
        }
    }
}

fn verdict(s: Separation) -> bool {
    s == Separation::Distinct
}

fn exclusions<F: Field>(
    subject: String,
    value: &EllipticPoint<F>,
    delta: &EllipticPoint<F>,
    neg_delta: &EllipticPoint<F>,
) -> [Check; 3] {
    [
        Check {
            subject: subject.clone(),
            excluded: Excluded::Infinity,
            holds: verdict(value.separation(&EllipticPoint::Infinity)),
        },
        Check {
            subject: subject.clone(),
            excluded: Excluded::Delta,
            holds: verdict(value.separation(delta)),
        },
        Check {
            subject,
            excluded: Excluded::NegDelta,
            holds: verdict(value.separation(neg_delta)),
        },
    ]
}

/// Every exclusion for `e₂, …, e_r` (indexed from 2) and for `e_j ⊖ e_i`
/// with `i < j`. The excluded set is closed under negation, so `e_i ⊖ e_j`
/// needs no separate check.
pub fn exclusion_checks<F: Field>(
    curve: &EllipticCurve<F>,
    delta: &EllipticPoint<F>,
    points: &[EllipticPoint<F>],
) -> (Vec<Check>, Vec<Witness<F>>) {
    let neg_delta = curve.neg(delta);
    let mut subjects: Vec<(String, usize, Option<usize>)> = Vec::new();
    for i in 0..points.len() {
        subjects.push((format!("e_{}", i + 2), i, None));
    }
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            subjects.push((format!("e_{} - e_{}", j + 2, i + 2), j, Some(i)));
        }
    }
    let evaluated: Vec<([Check; 3], Witness<F>)> = subjects
        .into_par_iter()
        .map(|(name, a, b)| {
            let value = match b {
                None => points[a].clone(),
                Some(b) => curve.add_unchecked(&points[a], &curve.neg(&points[b])),
            };
            let checks = exclusions(name.clone(), &value, delta, &neg_delta);
            (checks, Witness { subject: name, value })
        })
        .collect();
    let mut checks = Vec::with_capacity(3 * evaluated.len());
    let mut witnesses = Vec::with_capacity(evaluated.len());
    for (c, w) in evaluated {
        checks.extend(c);
        witnesses.push(w);
    }
    (checks, witnesses)
}

/// Recomputes every exclusion from `cert.lambda` and `cert.points` alone.
/// The recorded checks and `δ` must agree with the recomputation.
pub fn verify_certificate<F: Field>(cert: &GenericityCertificate<F>) -> bool {
    let Ok(curve) = EllipticCurve::new(cert.lambda.clone()) else {
        return false;
    };
    let Ok(delta) = curve.delta() else {
        return false;
    };
    if cert.points.is_empty() || cert.delta.separation(&delta) != Separation::Equal {
        return false;
    }
    if cert.points.iter().any(|p| !curve.contains(p)) {
        return false;
    }
    let (checks, _) = exclusion_checks(&curve, &delta, &cert.points);
    checks.iter().all(|c| c.holds) && checks == cert.checks
}

/// Candidate abscissae `a/b` in lowest terms with `|a|, b ≤ bound`, ordered
/// by height, then denominator, then `|a|`, positive first.
pub fn candidate_abscissae(bound: u64) -> Vec<Rational> {
    let bound = bound as i64;
    let mut out = vec![Rational::zero()];
    for h in 1..=bound {
        for b in 1..=h {
            for a in 1..=h {
                if a.max(b) == h && a.gcd(&b) == 1 {
                    out.push(Rational::new(a, b).expect("b ≥ 1"));
                    out.push(Rational::new(-a, b).expect("b ≥ 1"));
                }
            }
        }
    }
    out
}

fn looks_non_torsion<F: Field>(curve: &EllipticCurve<F>, p: &EllipticPoint<F>, bound: i64) -> bool {
    let mut acc = EllipticPoint::Infinity;
    for _ in 1..=bound {
        acc = curve.add_unchecked(&acc, p);
        if acc.separation(&EllipticPoint::Infinity) != Separation::Distinct {
            return false;
        }
    }
    true
}

struct Found<F> {
    base: EllipticPoint<F>,
    stride: i64,
    multipliers: Vec<i64>,
    points: Vec<EllipticPoint<F>>,
    checks: Vec<Check>,
    witnesses: Vec<Witness<F>>,
}

fn stride_search<F: Field>(
    curve: &EllipticCurve<F>,
    delta: &EllipticPoint<F>,
    base: &EllipticPoint<F>,
    r: usize,
    opts: &SearchOptions,
) -> Option<Found<F>> {
    if !looks_non_torsion(curve, base, opts.torsion_bound) {
        return None;
    }
    for m in opts.first_stride.max(1)..=opts.max_stride {
        let multipliers: Vec<i64> = (2..=r as i64).map(|i| m * i).collect();
        let points: Vec<EllipticPoint<F>> = multipliers
            .iter()
            .map(|&n| curve.mul(base, n).expect("base point is on the curve"))
            .collect();
        let (checks, witnesses) = exclusion_checks(curve, delta, &points);
        if checks.iter().all(|c| c.holds) {
            return Some(Found {
                base: base.clone(),
                stride: m,
                multipliers,
                points,
                checks,
                witnesses,
            });
        }
    }
    None
}

fn check_r(r: usize) -> Result<()> {
    if r < 2 {
        return Err(Error::InvalidArgument(format!("need r ≥ 2, got {r}")));
    }
    Ok(())
}

/// Exact search over `ℚ(√λ)`.
pub fn find_generic_points_exact(lambda: &Rational, r: usize, opts: &SearchOptions) -> Result<GenericityCertificate<QuadExt>> {
    check_r(r)?;
    let field = QuadField::new(lambda.clone())?;
    let curve = EllipticCurve::new(QuadExt::rational(lambda.clone(), &field))?;
    let delta = curve.delta()?;
    let branch_image = curve.branch_image_plus()?;

    let mut bases: Vec<(SearchStrategy, EllipticPoint<QuadExt>)> = Vec::new();
    if opts.strategy == SearchStrategy::MultiplesOfRationalPoint {
        let rational_points: Vec<EllipticPoint<QuadExt>> = candidate_abscissae(opts.bound)
            .into_par_iter()
            .filter_map(|x| {
                let rhs = &(&(&x * &x) * &x) + &(&(lambda * &x) + lambda);
                let y = rhs.sqrt_exact()?;
                Some(EllipticPoint::affine(QuadExt::rational(x, &field), QuadExt::rational(y, &field)))
            })
            .collect();
        bases.extend(rational_points.into_iter().map(|p| (SearchStrategy::MultiplesOfRationalPoint, p)));
    }
    if bases.iter().all(|(_, p)| p.separation(&branch_image) != Separation::Equal) {
        bases.push((SearchStrategy::MultiplesOfBranchImage, branch_image));
    }
    for (strategy, base) in bases {
        if let Some(found) = stride_search(&curve, &delta, &base, r, opts) {
            return Ok(GenericityCertificate {
                schema: SCHEMA_VERSION,
                kind: CertificateKind::Exact,
                strategy,
                lambda: curve.lambda().clone(),
                base_point: found.base,
                stride: found.stride,
                multipliers: found.multipliers,
                delta,
                points: found.points,
                checks: found.checks,
                witnesses: found.witnesses,
            });
        }
    }
    Err(Error::SearchExhausted(format!(
        "no base point with |a|, b ≤ {} and stride ≤ {} passes all exclusions for λ = {lambda}",
        opts.bound, opts.max_stride
    )))
}

/// Search over complex approximations; separations are decided at `opts.ctx`
/// and a value inside the tolerance band never counts as separated.
pub fn find_generic_points_approx(lambda: &Complex, r: usize, opts: &SearchOptions) -> Result<GenericityCertificate<Complex>> {
    check_r(r)?;
    let lambda = lambda.with_ctx(opts.ctx);
    let curve = EllipticCurve::new(lambda.clone())?;
    let delta = curve.delta()?;
    for x in candidate_abscissae(opts.bound) {
        let xc = x.to_complex(opts.ctx);
        let Some(y) = curve.rhs(&xc).sqrt() else { continue };
        let base = EllipticPoint::affine(xc, y);
        if let Some(found) = stride_search(&curve, &delta, &base, r, opts) {
            return Ok(GenericityCertificate {
                schema: SCHEMA_VERSION,
                kind: CertificateKind::Approximate,
                strategy: SearchStrategy::Approximate,
                lambda,
                base_point: found.base,
                stride: found.stride,
                multipliers: found.multipliers,
                delta,
                points: found.points,
                checks: found.checks,
                witnesses: found.witnesses,
            });
        }
    }
    Err(Error::SearchExhausted(format!(
        "no approximate base point with |a|, b ≤ {} passes all exclusions",
        opts.bound
    )))
}

/// Exact search when `λ` is rational, falling back to approximate points
/// if it is exhausted or the strategy asks for them.
pub fn find_generic_points(lambda: &Parameter, r: usize, opts: &SearchOptions) -> Result<Certificate> {
    match lambda {
        Parameter::Exact(q) if opts.strategy != SearchStrategy::Approximate => match find_generic_points_exact(q, r, opts) {
            Ok(c) => Ok(Certificate::Exact(c)),
            Err(Error::SearchExhausted(_)) => {
                find_generic_points_approx(&q.to_complex(opts.ctx), r, opts).map(Certificate::Approximate)
            }
            Err(e) => Err(e),
        },
        other => find_generic_points_approx(&other.to_complex(opts.ctx), r, opts).map(Certificate::Approximate),
    }
}

/// Points `e_i = [n_i]P` for given multipliers, with their checks; used to
/// evaluate a chosen stride without searching.
pub fn certificate_for_multipliers(
    lambda: &Rational,
    base: EllipticPoint<Rational>,
    multipliers: &[i64],
) -> Result<GenericityCertificate<QuadExt>> {
    let field = QuadField::new(lambda.clone())?;
    let curve = EllipticCurve::new(QuadExt::rational(lambda.clone(), &field))?;
    let base = base.map(|v| QuadExt::rational(v.clone(), &field));
    let delta = curve.delta()?;
    let points: Vec<_> = multipliers.iter().map(|&n| curve.mul(&base, n)).collect::<Result<_>>()?;
    let (checks, witnesses) = exclusion_checks(&curve, &delta, &points);
    Ok(GenericityCertificate {
        schema: SCHEMA_VERSION,
        kind: CertificateKind::Exact,
        strategy: SearchStrategy::MultiplesOfRationalPoint,
        lambda: curve.lambda().clone(),
        base_point: base,
        stride: 0,
        multipliers: multipliers.to_vec(),
        delta,
        points,
        checks,
        witnesses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn p0() -> EllipticPoint<Rational> {
        EllipticPoint::affine(q("0"), q("1"))
    }

    #[test]
    fn candidates_are_ordered_by_height() {
        let c = candidate_abscissae(2);
        let s: Vec<String> = c.iter().map(|x| x.to_string()).collect();
        assert_eq!(s, ["0/1", "1/1", "-1/1", "2/1", "-2/1", "1/2", "-1/2"]);
    }

    #[test]
    fn lambda_one_uses_stride_three_from_origin() {
        let cert = find_generic_points_exact(&q("1"), 4, &SearchOptions::default()).unwrap();
        assert_eq!(cert.base_point, p0().map(|v| QuadExt::rational(v.clone(), cert.lambda.field())));
        assert_eq!(cert.stride, 3);
        assert_eq!(cert.multipliers, vec![6, 9, 12]);
        assert!(verify_certificate(&cert));
    }

    #[test]
    fn stride_two_is_rejected_for_three_points() {
        // e₃ ⊖ e₂ = [2]P = δ.
        let cert = certificate_for_multipliers(&q("1"), p0(), &[4, 6]).unwrap();
        assert!(!cert.all_hold());
        let failing: Vec<_> = cert.checks.iter().filter(|c| !c.holds).collect();
        assert_eq!(failing.len(), 1);
        assert_eq!(failing[0].subject, "e_3 - e_2");
        assert_eq!(failing[0].excluded, Excluded::Delta);
    }

    #[test]
    fn stride_one_hits_delta() {
        let cert = certificate_for_multipliers(&q("1"), p0(), &[2]).unwrap();
        assert!(!cert.all_hold());
        assert!(cert.checks.iter().any(|c| c.subject == "e_2" && c.excluded == Excluded::Delta && !c.holds));
        let r2 = find_generic_points_exact(&q("1"), 2, &SearchOptions::default()).unwrap();
        assert_eq!(r2.stride, 2);
    }

    #[test]
    fn identity_candidate_rejected() {
        let cert = certificate_for_multipliers(&q("1"), p0(), &[0]).unwrap();
        assert!(cert.checks.iter().any(|c| c.excluded == Excluded::Infinity && !c.holds));
    }

    #[test]
    fn tampering_is_detected() {
        let cert = find_generic_points_exact(&q("1"), 3, &SearchOptions::default()).unwrap();
        let mut bad = cert.clone();
        bad.points[0] = cert.delta.clone();
        assert!(!verify_certificate(&bad));
        let mut dup = cert.clone();
        dup.points[1] = dup.points[0].clone();
        assert!(!verify_certificate(&dup));
        let mut forged = cert.clone();
        forged.checks[0].holds = false;
        assert!(!verify_certificate(&forged));
    }

    #[test]
    fn irrational_branch_image_fallback() {
        // y² = x³ + 3x + 3 has no point with small rational abscissa.
        let opts = SearchOptions {
            bound: 3,
            ..SearchOptions::default()
        };
        let cert = find_generic_points_exact(&q("3"), 3, &opts).unwrap();
        assert!(verify_certificate(&cert));
        assert_eq!(cert.kind, CertificateKind::Exact);
    }

    #[test]
    fn approximate_certificate_for_complex_lambda() {
        let ctx = ApproxCtx::default();
        let lambda = Parameter::parse("0.5,0.25", ctx).unwrap();
        let cert = find_generic_points(&lambda, 5, &SearchOptions::default()).unwrap();
        assert_eq!(cert.kind(), CertificateKind::Approximate);
        assert!(cert.verify());
        assert_eq!(cert.r(), 5);
    }

    #[test]
    fn json_field_order_is_fixed() {
        let cert = find_generic_points_exact(&q("1"), 2, &SearchOptions::default()).unwrap();
        let json = cert.to_json();
        let order = ["\"schema\"", "\"kind\"", "\"strategy\"", "\"lambda\"", "\"base_point\"", "\"stride\"", "\"multipliers\"", "\"delta\"", "\"points\"", "\"checks\""];
        let pos: Vec<usize> = order.iter().map(|k| json.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        assert!(json.contains("\"1/4\""));
    }

    #[test]
    fn parameter_parsing() {
        assert!(matches!("7/3".parse::<Parameter>().unwrap(), Parameter::Exact(_)));
        assert!(matches!("0.5,0.25".parse::<Parameter>().unwrap(), Parameter::Approx(_)));
        assert!(matches!("0.5".parse::<Parameter>().unwrap(), Parameter::Approx(_)));
        assert!("abc".parse::<Parameter>().is_err());
    }
}
