//! Chern numbers, signature and slope of `S_{λ,r}`.
//!
//! The fibre genus is `g = 3 + r/2`, so `2g − 2 = 4 + r` and
//! `e = (4 + r)(2γ − 2)`. With `K²` from the intersection engine,
//! `υ = K²/e` and `τ = e(υ − 2)/3`.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::intersection::derive_k_squared;
use crate::scalar::{Rational, Symbol, SymbolicScalar};
use crate::SCHEMA_VERSION;

fn sym(s: Symbol) -> SymbolicScalar {
    SymbolicScalar::symbol(s)
}

fn int(n: i64) -> SymbolicScalar {
    SymbolicScalar::int(n)
}

/// `K²(r, γ)` as produced by the intersection engine, computed once.
pub fn k_squared_symbolic() -> &'static SymbolicScalar {
    static K2: OnceLock<SymbolicScalar> = OnceLock::new();
    K2.get_or_init(|| derive_k_squared().expect("derivation is consistent").k_squared)
}

/// `g = 3 + r/2`; odd `r` has no fibre of integral genus.
pub fn fibre_genus(r: u32) -> Result<u32> {
    if r % 2 == 1 {
        return Err(Error::InvalidArgument(format!("r = {r} is odd; the fibre genus 3 + r/2 needs even r")));
    }
    Ok(3 + r / 2)
}

pub fn fibre_genus_symbolic() -> SymbolicScalar {
    int(3).add(&sym(Symbol::R).mul(&SymbolicScalar::ratio(1, 2)))
}

/// `e = (2g − 2)(2γ − 2)`.
pub fn euler_characteristic(g: &SymbolicScalar, gamma: &SymbolicScalar) -> SymbolicScalar {
    int(2).mul(g).sub(&int(2)).mul(&int(2).mul(gamma).sub(&int(2)))
}

fn substitute_r_gamma(x: &SymbolicScalar, r: &SymbolicScalar, gamma: &SymbolicScalar) -> Result<SymbolicScalar> {
    Ok(x.substitute(Symbol::R, r)?.substitute(Symbol::Gamma, gamma)?)
}

/// `2 + 3/(2(4 + r))`.
pub fn slope_closed_form(r: &SymbolicScalar) -> SymbolicScalar {
    let den = int(2).mul(&int(4).add(r));
    int(2).add(&int(3).div(&den).expect("4 + r is a nonzero polynomial"))
}

/// `υ = K²/e`; fails unless the result is free of `γ`.
pub fn slope(r: &SymbolicScalar, gamma: &SymbolicScalar) -> Result<SymbolicScalar> {
    let k2 = substitute_r_gamma(k_squared_symbolic(), r, gamma)?;
    let g = fibre_genus_symbolic().substitute(Symbol::R, r)?;
    let e = euler_characteristic(&g, gamma);
    let upsilon = k2.div(&e)?;
    if upsilon.contains(Symbol::Gamma) || upsilon.contains(Symbol::DegZeta) {
        return Err(Error::Inconsistent(format!("slope {upsilon} still depends on γ")));
    }
    Ok(upsilon)
}

/// `τ = e(υ − 2)/3`.
pub fn signature(r: &SymbolicScalar, gamma: &SymbolicScalar) -> Result<SymbolicScalar> {
    let g = fibre_genus_symbolic().substitute(Symbol::R, r)?;
    let e = euler_characteristic(&g, gamma);
    let upsilon = slope(r, gamma)?;
    Ok(e.mul(&upsilon.sub(&int(2))).mul(&SymbolicScalar::ratio(1, 3)))
}

/// Exact `υ(r)` for even `r ≥ 2`.
pub fn slope_value(r: u32) -> Result<Rational> {
    if r < 2 {
        return Err(Error::InvalidArgument(format!("need r ≥ 2, got {r}")));
    }
    fibre_genus(r)?;
    let v = slope(&int(r as i64), &sym(Symbol::Gamma))?;
    v.as_rational()
        .ok_or_else(|| Error::Inconsistent(format!("slope at r = {r} is not a number: {v}")))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RangeReport {
    pub r: u32,
    pub g: u32,
    pub upsilon: Rational,
    /// `2 < υ < 3`.
    pub in_kodaira_interval: bool,
    /// `υ < 2 + 2/3`.
    pub below_two_thirds_bound: bool,
    pub fibre_genus_at_least_three: bool,
    /// `r ≥ 8`, which the construction requires.
    pub within_hypotheses: bool,
}

impl RangeReport {
    pub fn all_hold(&self) -> bool {
        self.in_kodaira_interval && self.below_two_thirds_bound && self.fibre_genus_at_least_three
    }
}

pub fn range_checks(r: u32) -> Result<RangeReport> {
    let upsilon = slope_value(r)?;
    let g = fibre_genus(r)?;
    let two = Rational::from(2);
    Ok(RangeReport {
        r,
        g,
        in_kodaira_interval: upsilon > two && upsilon < Rational::from(3),
        below_two_thirds_bound: upsilon < Rational::new(8, 3).expect("nonzero"),
        fibre_genus_at_least_three: g >= 3,
        within_hypotheses: r >= 8,
        upsilon,
    })
}

/// How `γ` entered a report.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum GammaMode {
    Symbolic,
    Numeric { gamma: i64 },
    /// `γ = 1 + deg ζ · r · 2^(r−1)` from Riemann–Hurwitz.
    FromDegZeta { deg_zeta: i64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct Identities {
    pub upsilon_times_e_is_k_squared: bool,
    pub tau_from_slope: bool,
    pub tau_is_gamma_minus_one: bool,
    pub slope_matches_closed_form: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct InvariantReport {
    pub schema: &'static str,
    pub r: u32,
    pub gamma_mode: GammaMode,
    pub gamma: SymbolicScalar,
    pub g: u32,
    pub e: SymbolicScalar,
    pub k_squared: SymbolicScalar,
    pub tau: SymbolicScalar,
    pub upsilon: SymbolicScalar,
    pub identities: Identities,
    pub range: RangeReport,
    pub provenance: BTreeMap<&'static str, &'static str>,
}

impl InvariantReport {
    pub fn new(r: u32, mode: GammaMode) -> Result<Self> {
        let g = fibre_genus(r)?;
        if r < 2 {
            return Err(Error::InvalidArgument(format!("need r ≥ 2, got {r}")));
        }
        let gamma = match &mode {
            GammaMode::Symbolic => sym(Symbol::Gamma),
            GammaMode::Numeric { gamma } => {
                if *gamma < 2 {
                    return Err(Error::InvalidArgument(format!("base genus γ = {gamma} must be at least 2")));
                }
                int(*gamma)
            }
            GammaMode::FromDegZeta { deg_zeta } => {
                if *deg_zeta < 1 || r > 56 {
                    return Err(Error::InvalidArgument(format!("deg ζ = {deg_zeta}, r = {r} out of range")));
                }
                SymbolicScalar::rational(Rational::from(1 + deg_zeta * r as i64 * (1i64 << (r - 1))))
            }
        };
        let r_s = int(r as i64);
        let k_squared = substitute_r_gamma(k_squared_symbolic(), &r_s, &gamma)?;
        let e = euler_characteristic(&int(g as i64), &gamma);
        let upsilon = slope(&r_s, &gamma)?;
        let tau = signature(&r_s, &gamma)?;
        let identities = Identities {
            upsilon_times_e_is_k_squared: upsilon.mul(&e) == k_squared,
            tau_from_slope: tau.mul(&int(3)) == e.mul(&upsilon.sub(&int(2))) && tau.mul(&int(3)) == k_squared.sub(&int(2).mul(&e)),
            tau_is_gamma_minus_one: tau == gamma.sub(&int(1)),
            slope_matches_closed_form: upsilon == slope_closed_form(&r_s),
        };
        let provenance = BTreeMap::from([
            ("g", "3 + r/2"),
            ("e", "(2g − 2)(2γ − 2)"),
            ("k_squared", "intersection engine: div(W1)·div(W2) with adjunction"),
            ("upsilon", "K²/e"),
            ("tau", "e(υ − 2)/3"),
            (
                "gamma",
                match mode {
                    GammaMode::Symbolic => "symbolic",
                    GammaMode::Numeric { .. } => "supplied",
                    GammaMode::FromDegZeta { .. } => "1 + deg ζ · r · 2^(r−1)",
                },
            ),
        ]);
        Ok(InvariantReport {
            schema: SCHEMA_VERSION,
            r,
            gamma_mode: mode,
            gamma,
            g,
            e,
            k_squared,
            tau,
            upsilon,
            identities,
            range: range_checks(r)?,
            provenance,
        })
    }

    pub fn identities_hold(&self) -> bool {
        let i = &self.identities;
        i.upsilon_times_e_is_k_squared && i.tau_from_slope && i.tau_is_gamma_minus_one && i.slope_matches_closed_form
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlopeRow {
    pub r: u32,
    pub g: u32,
    pub upsilon_num: String,
    pub upsilon_den: String,
    pub tau_formula: String,
}

/// One row per even `r` in `lo..=hi`.
pub fn slope_table(lo: u32, hi: u32) -> Result<Vec<SlopeRow>> {
    let tau = signature(&sym(Symbol::R), &sym(Symbol::Gamma))?;
    (lo.max(2)..=hi)
        .filter(|r| r % 2 == 0)
        .map(|r| {
            let v = slope_value(r)?;
            Ok(SlopeRow {
                r,
                g: fibre_genus(r)?,
                upsilon_num: v.numer().to_string(),
                upsilon_den: v.denom().to_string(),
                tau_formula: tau.to_string(),
            })
        })
        .collect()
}

pub fn slope_table_csv(rows: &[SlopeRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    }
    if rows.is_empty() {
        w.write_record(["r", "g", "upsilon_num", "upsilon_den", "tau_formula"])
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
