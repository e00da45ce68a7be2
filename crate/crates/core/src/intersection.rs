//! Intersection numbers on the fibred surface `S → B` with fibre map
//! `g : S → X_λ`.
//!
//! Two holomorphic 2-forms `W₁, W₂` give canonical divisors
//! `div(W_k) = Σ_{i=1}^{2γ−2} F_{b_i^k} + g⁻¹(D_k) + R`, where `F_b` is the
//! fibre over `b ∈ B`, `D₁ = s₁ + t₁` and `D₂ = s₂ + t₂` are the divisors of
//! `x dx/y` and `dx/y` on `X_λ`, and `R = Σ_j R_j` is the union of `r`
//! disjoint sections. The engine expands `div(W₁)·div(W₂)` over these
//! classes, keeping the `2γ − 2` fibres and the `r` sections as unexpanded
//! families, and eliminates the unknown numbers `R_j²` and `R_j·g⁻¹(D_k)`
//! with adjunction.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{Rational, Symbol, SymbolicScalar};
use crate::SCHEMA_VERSION;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PointLabel {
    S1,
    T1,
    S2,
    T2,
}

impl PointLabel {
    /// Which of `D₁`, `D₂` the point belongs to.
    pub fn divisor(self) -> u8 {
        match self {
            PointLabel::S1 | PointLabel::T1 => 1,
            PointLabel::S2 | PointLabel::T2 => 2,
        }
    }

    pub fn of_divisor(k: u8) -> [PointLabel; 2] {
        if k == 1 {
            [PointLabel::S1, PointLabel::T1]
        } else {
            [PointLabel::S2, PointLabel::T2]
        }
    }
}

impl fmt::Display for PointLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PointLabel::S1 => "s1",
            PointLabel::T1 => "t1",
            PointLabel::S2 => "s2",
            PointLabel::T2 => "t2",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BasisClass {
    /// `F_{b_i^k}`, a fibre over a zero of the base form attached to `W_k`.
    Fiber { k: u8, i: u32 },
    /// `R_j`.
    Section { j: u32 },
    /// `g⁻¹(s)`.
    Pullback(PointLabel),
}

/// Placeholder index for "some member of the family".
const MEMBER: u32 = u32::MAX;
const OTHER_MEMBER: u32 = u32::MAX - 1;

impl fmt::Display for BasisClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let idx = |n: u32| match n {
            MEMBER => "i".to_string(),
            OTHER_MEMBER => "i'".to_string(),
            n => n.to_string(),
        };
        match self {
            BasisClass::Fiber { k, i } => write!(f, "F{k}[{}]", idx(*i)),
            BasisClass::Section { j } => write!(f, "R[{}]", idx(*j)),
            BasisClass::Pullback(p) => write!(f, "g^-1({p})"),
        }
    }
}

impl Serialize for BasisClass {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// An index family kept as a symbolic multiple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    /// The `2γ − 2` fibres `F_{b_i^k}`.
    Fibers(u8),
    /// The `r` sections `R_j`.
    Sections,
}

impl Family {
    pub fn size(self) -> SymbolicScalar {
        match self {
            Family::Fibers(_) => two_gamma_minus_two(),
            Family::Sections => SymbolicScalar::symbol(Symbol::R),
        }
    }

    fn member(self, index: u32) -> BasisClass {
        match self {
            Family::Fibers(k) => BasisClass::Fiber { k, i: index },
            Family::Sections => BasisClass::Section { j: index },
        }
    }

    fn contains(self, c: &BasisClass) -> bool {
        match (self, c) {
            (Family::Fibers(k), BasisClass::Fiber { k: k2, .. }) => k == *k2,
            (Family::Sections, BasisClass::Section { .. }) => true,
            _ => false,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Fibers(k) => write!(f, "ΣF{k}"),
            Family::Sections => f.write_str("ΣR"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Class(BasisClass),
    Family(Family),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Class(c) => c.fmt(f),
            Term::Family(fam) => fam.fmt(f),
        }
    }
}

/// A formal sum of basis classes and families with symbolic coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DivisorExpr {
    terms: BTreeMap<Term, SymbolicScalar>,
}

impl DivisorExpr {
    pub fn zero() -> Self {
        DivisorExpr::default()
    }

    pub fn class(c: BasisClass) -> Self {
        DivisorExpr::zero().plus(Term::Class(c), SymbolicScalar::one())
    }

    pub fn family(f: Family) -> Self {
        DivisorExpr::zero().plus(Term::Family(f), SymbolicScalar::one())
    }

    /// `self + coeff·term`, dropping zero coefficients.
    pub fn plus(mut self, term: Term, coeff: SymbolicScalar) -> Self {
        let c = match self.terms.remove(&term) {
            Some(old) => old.add(&coeff),
            None => coeff,
        };
        if !c.is_zero() {
            self.terms.insert(term, c);
        }
        self
    }

    pub fn add(&self, other: &DivisorExpr) -> DivisorExpr {
        other
            .terms
            .iter()
            .fold(self.clone(), |acc, (t, c)| acc.plus(*t, c.clone()))
    }

    pub fn scale(&self, k: &SymbolicScalar) -> DivisorExpr {
        self.terms
            .iter()
            .fold(DivisorExpr::zero(), |acc, (t, c)| acc.plus(*t, c.mul(k)))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Term, &SymbolicScalar)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, t: &Term) -> SymbolicScalar {
        self.terms.get(t).cloned().unwrap_or_else(SymbolicScalar::zero)
    }

    /// Intersection number with one fibre of the fibration: each section and
    /// each `g⁻¹(s)` meet it, fibres do not.
    pub fn degree_on_fiber(&self, table: &IntersectionTable) -> SymbolicScalar {
        intersect(self, &DivisorExpr::class(BasisClass::Fiber { k: 1, i: 1 }), table)
    }
}

impl fmt::Display for DivisorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(t, c)| {
                if *c == SymbolicScalar::one() {
                    t.to_string()
                } else {
                    format!("({c})·{t}")
                }
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

impl Serialize for DivisorExpr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

fn two_gamma_minus_two() -> SymbolicScalar {
    SymbolicScalar::int(2)
        .mul(&SymbolicScalar::symbol(Symbol::Gamma))
        .sub(&SymbolicScalar::int(2))
}

fn sym(s: Symbol) -> SymbolicScalar {
    SymbolicScalar::symbol(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleId {
    FibresOfOneFibration,
    FibreSquare,
    CriticalFibresDisjoint,
    SectionMeetsFibre,
    FibreCoversCurveTwice,
    PullbacksDisjoint,
    PullbackSquare,
    SectionsDisjoint,
    SectionSquare,
    SectionMeetsPullback,
}

#[derive(Clone, Debug, Serialize)]
pub struct Rule {
    pub id: RuleId,
    pub pattern: &'static str,
    pub value: SymbolicScalar,
    pub justification: &'static str,
}

/// The pairing on basis classes.
#[derive(Clone, Debug, Serialize)]
pub struct IntersectionTable {
    rules: Vec<Rule>,
    #[serde(skip_serializing_if = "Option::is_none")]
    solution: Option<AdjunctionSolution>,
}

/// The listed rules, with `R_j²` and `R_j·g⁻¹(D_k)` left as the unknowns
/// `Rsq`, `x1`, `x2`.
pub fn build_table() -> IntersectionTable {
    let half = SymbolicScalar::ratio(1, 2);
    let rules = vec![
        Rule {
            id: RuleId::FibresOfOneFibration,
            pattern: "F{k}[i]·F{k}[i'], i ≠ i'",
            value: SymbolicScalar::zero(),
            justification: "fibres over distinct points of the base are disjoint",
        },
        Rule {
            id: RuleId::FibreSquare,
            pattern: "F{k}[i]·F{k}[i]",
            value: SymbolicScalar::zero(),
            justification: "a fibre is algebraically equivalent to a disjoint fibre",
        },
        Rule {
            id: RuleId::CriticalFibresDisjoint,
            pattern: "F1[i]·F2[i']",
            value: SymbolicScalar::zero(),
            justification: "the zeros of the two base forms are disjoint sets of points of B, so the fibres over them are disjoint",
        },
        Rule {
            id: RuleId::SectionMeetsFibre,
            pattern: "F{k}[i]·R[j]",
            value: SymbolicScalar::one(),
            justification: "a section meets every fibre transversally in exactly one point",
        },
        Rule {
            id: RuleId::FibreCoversCurveTwice,
            pattern: "F{k}[i]·g^-1(s)",
            value: SymbolicScalar::int(2),
            justification: "g restricted to a fibre is a double cover of X_λ, unbranched over s, so g^-1(s) meets the fibre transversally in two points",
        },
        Rule {
            id: RuleId::PullbacksDisjoint,
            pattern: "g^-1(s)·g^-1(t), s ≠ t",
            value: SymbolicScalar::zero(),
            justification: "preimages of distinct points under g are disjoint",
        },
        Rule {
            id: RuleId::PullbackSquare,
            pattern: "g^-1(s)·g^-1(s)",
            value: SymbolicScalar::zero(),
            justification: "a fibre of g is algebraically equivalent to a disjoint fibre of g",
        },
        Rule {
            id: RuleId::SectionsDisjoint,
            pattern: "R[j]·R[j'], j ≠ j'",
            value: SymbolicScalar::zero(),
            justification: "the sections are distinct connected components of a fixed locus, hence disjoint",
        },
        Rule {
            id: RuleId::SectionSquare,
            pattern: "R[j]·R[j]",
            value: sym(Symbol::SectionSquare),
            justification: "unknown; all sections have the same self-intersection Rsq",
        },
        Rule {
            id: RuleId::SectionMeetsPullback,
            pattern: "R[j]·g^-1(s), s ∈ D_k",
            value: sym(Symbol::X1).mul(&half),
            justification: "unknown; the two points of D_k are exchanged by an automorphism of X_λ preserving the configuration, so each carries half of x_k = R[j]·g^-1(D_k)",
        },
    ];
    IntersectionTable { rules, solution: None }
}

/// Values for the unknowns found by [`solve_adjunction`].
#[derive(Clone, Debug, Serialize)]
pub struct AdjunctionSolution {
    /// `Rsq` in terms of `x1`.
    pub section_square: SymbolicScalar,
    /// `x2` in terms of `x1`.
    pub x2: SymbolicScalar,
    /// `x1 − x2` after substitution; zero.
    pub symmetry_residual: SymbolicScalar,
}

impl IntersectionTable {
    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, id: RuleId) -> &Rule {
        self.rules.iter().find(|r| r.id == id).expect("every rule id is in the table")
    }

    fn classify(a: &BasisClass, b: &BasisClass) -> RuleId {
        use BasisClass::*;
        match (a, b) {
            (Fiber { k: k1, i: i1 }, Fiber { k: k2, i: i2 }) => {
                if k1 != k2 {
                    RuleId::CriticalFibresDisjoint
                } else if i1 == i2 {
                    RuleId::FibreSquare
                } else {
                    RuleId::FibresOfOneFibration
                }
            }
            (Fiber { .. }, Section { .. }) | (Section { .. }, Fiber { .. }) => RuleId::SectionMeetsFibre,
            (Fiber { .. }, Pullback(_)) | (Pullback(_), Fiber { .. }) => RuleId::FibreCoversCurveTwice,
            (Pullback(p), Pullback(q)) => {
                if p == q {
                    RuleId::PullbackSquare
                } else {
                    RuleId::PullbacksDisjoint
                }
            }
            (Section { j: j1 }, Section { j: j2 }) => {
                if j1 == j2 {
                    RuleId::SectionSquare
                } else {
                    RuleId::SectionsDisjoint
                }
            }
            (Section { .. }, Pullback(_)) | (Pullback(_), Section { .. }) => RuleId::SectionMeetsPullback,
        }
    }

    /// `a·b` for two basis classes.
    pub fn lookup(&self, a: &BasisClass, b: &BasisClass) -> SymbolicScalar {
        let id = Self::classify(a, b);
        let mut value = self.rule(id).value.clone();
        if id == RuleId::SectionMeetsPullback {
            let k = match (a, b) {
                (BasisClass::Pullback(p), _) | (_, BasisClass::Pullback(p)) => p.divisor(),
                _ => unreachable!("classified as section·pullback"),
            };
            if k == 2 {
                value = value
                    .substitute(Symbol::X1, &sym(Symbol::X2))
                    .expect("substituting a symbol for a symbol is total");
            }
        }
        match &self.solution {
            Some(sol) => value
                .substitute(Symbol::SectionSquare, &sol.section_square)
                .and_then(|v| v.substitute(Symbol::X2, &sol.x2))
                .expect("polynomial substitution"),
            None => value,
        }
    }

    /// The table with the adjunction solution applied to every lookup.
    pub fn resolved(&self, sol: &AdjunctionSolution) -> IntersectionTable {
        IntersectionTable {
            rules: self.rules.clone(),
            solution: Some(sol.clone()),
        }
    }

    /// Symmetry of the pairing on all pairs of the listed representatives.
    pub fn is_symmetric(&self) -> bool {
        let reps = representatives();
        reps.iter()
            .all(|a| reps.iter().all(|b| self.lookup(a, b) == self.lookup(b, a)))
    }
}

/// One class of each shape, with two distinct indices per family.
pub fn representatives() -> Vec<BasisClass> {
    let mut v = vec![
        BasisClass::Fiber { k: 1, i: 1 },
        BasisClass::Fiber { k: 1, i: 2 },
        BasisClass::Fiber { k: 2, i: 1 },
        BasisClass::Fiber { k: 2, i: 2 },
        BasisClass::Section { j: 1 },
        BasisClass::Section { j: 2 },
    ];
    v.extend([PointLabel::S1, PointLabel::T1, PointLabel::S2, PointLabel::T2].map(BasisClass::Pullback));
    v
}

#[derive(Clone, Debug, Serialize)]
pub struct Step {
    pub action: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule: Option<RuleId>,
    pub result: SymbolicScalar,
}

/// Ordered log of every rule application and algebraic step.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Transcript {
    pub steps: Vec<Step>,
}

impl Transcript {
    pub fn note(&mut self, action: impl Into<String>, result: &SymbolicScalar) {
        self.steps.push(Step {
            action: action.into(),
            rule: None,
            result: result.clone(),
        });
    }

    fn rule(&mut self, action: String, rule: RuleId, result: &SymbolicScalar) {
        self.steps.push(Step {
            action,
            rule: Some(rule),
            result: result.clone(),
        });
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transcript serializes")
    }

    /// Numbered human-readable proof log.
    pub fn to_text(&self, table: &IntersectionTable) -> String {
        let mut out = String::new();
        for (n, s) in self.steps.iter().enumerate() {
            out.push_str(&format!("{:>3}. {} = {}\n", n + 1, s.action, s.result));
            if let Some(id) = s.rule {
                out.push_str(&format!("     by {:?}: {}\n", id, table.rule(id).justification));
            }
        }
        out
    }
}

/// `A·B`, expanded bilinearly over terms and families.
pub fn intersect(a: &DivisorExpr, b: &DivisorExpr, table: &IntersectionTable) -> SymbolicScalar {
    intersect_impl(a, b, table, None)
}

/// Like [`intersect`], logging every rule application.
pub fn intersect_traced(a: &DivisorExpr, b: &DivisorExpr, table: &IntersectionTable, log: &mut Transcript) -> SymbolicScalar {
    intersect_impl(a, b, table, Some(log))
}

fn intersect_impl(a: &DivisorExpr, b: &DivisorExpr, table: &IntersectionTable, mut log: Option<&mut Transcript>) -> SymbolicScalar {
    let mut total = SymbolicScalar::zero();
    for (ta, ca) in a.terms() {
        for (tb, cb) in b.terms() {
            let v = pair_terms(ta, tb, table, log.as_deref_mut());
            total = total.add(&ca.mul(cb).mul(&v));
        }
    }
    total
}

fn pair_terms(ta: &Term, tb: &Term, table: &IntersectionTable, mut log: Option<&mut Transcript>) -> SymbolicScalar {
    // (multiplicity, left, right) contributions
    let mut parts: Vec<(SymbolicScalar, BasisClass, BasisClass)> = Vec::new();
    match (ta, tb) {
        (Term::Class(a), Term::Class(b)) => parts.push((SymbolicScalar::one(), *a, *b)),
        (Term::Class(c), Term::Family(f)) | (Term::Family(f), Term::Class(c)) => {
            if f.contains(c) {
                let other = match c {
                    BasisClass::Fiber { k, i } => BasisClass::Fiber { k: *k, i: if *i == MEMBER { OTHER_MEMBER } else { MEMBER } },
                    BasisClass::Section { j } => BasisClass::Section { j: if *j == MEMBER { OTHER_MEMBER } else { MEMBER } },
                    BasisClass::Pullback(_) => unreachable!("families contain no pullbacks"),
                };
                parts.push((SymbolicScalar::one(), *c, *c));
                parts.push((f.size().sub(&SymbolicScalar::one()), *c, other));
            } else {
                parts.push((f.size(), *c, f.member(MEMBER)));
            }
        }
        (Term::Family(f), Term::Family(g)) => {
            if f == g {
                let n = f.size();
                parts.push((n.clone(), f.member(MEMBER), f.member(MEMBER)));
                parts.push((n.mul(&n).sub(&n), f.member(MEMBER), f.member(OTHER_MEMBER)));
            } else {
                parts.push((f.size().mul(&g.size()), f.member(MEMBER), g.member(OTHER_MEMBER)));
            }
        }
    }
    let mut total = SymbolicScalar::zero();
    for (mult, a, b) in parts {
        let v = table.lookup(&a, &b);
        let contribution = mult.mul(&v);
        if let Some(log) = log.as_deref_mut() {
            log.rule(format!("{ta}·{tb}: ({mult})·[{a}·{b}]"), IntersectionTable::classify(&a, &b), &contribution);
        }
        total = total.add(&contribution);
    }
    total
}

/// `div(W_k) = ΣF{k} + g⁻¹(s_k) + g⁻¹(t_k) + ΣR`.
pub fn canonical_divisor(k: u8) -> Result<DivisorExpr> {
    if k != 1 && k != 2 {
        return Err(Error::InvalidArgument(format!("canonical divisor index must be 1 or 2, got {k}")));
    }
    let [s, t] = PointLabel::of_divisor(k);
    Ok(DivisorExpr::family(Family::Fibers(k))
        .add(&DivisorExpr::class(BasisClass::Pullback(s)))
        .add(&DivisorExpr::class(BasisClass::Pullback(t)))
        .add(&DivisorExpr::family(Family::Sections)))
}

/// `g⁻¹(D_k)`.
pub fn pullback_divisor(k: u8) -> DivisorExpr {
    let [s, t] = PointLabel::of_divisor(k);
    DivisorExpr::class(BasisClass::Pullback(s)).add(&DivisorExpr::class(BasisClass::Pullback(t)))
}

fn unknown_coefficients(eq: &SymbolicScalar) -> Result<[SymbolicScalar; 3]> {
    let a = eq.derivative(Symbol::SectionSquare);
    let b = eq.derivative(Symbol::X2);
    for d in [&a, &b] {
        if d.contains(Symbol::SectionSquare) || d.contains(Symbol::X2) {
            return Err(Error::Inconsistent(format!("adjunction equation {eq} is not linear in Rsq, x2")));
        }
    }
    let c = eq
        .substitute(Symbol::SectionSquare, &SymbolicScalar::zero())?
        .substitute(Symbol::X2, &SymbolicScalar::zero())?;
    Ok([a, b, c])
}

/// Equates `R_j·div(W_k)` with the adjunction value `(2γ − 2) − R_j²` for
/// `k = 1, 2` and solves the resulting linear system for `Rsq` and `x2`.
pub fn solve_adjunction(table: &IntersectionTable, log: &mut Transcript) -> Result<AdjunctionSolution> {
    let section = DivisorExpr::class(BasisClass::Section { j: 1 });
    let self_int = intersect(&section, &section, table);
    let adjunction = two_gamma_minus_two().sub(&self_int);
    log.note("adjunction for R[1] ≅ B of genus γ: R[1]·K = (2γ − 2) − R[1]²", &adjunction);
    let mut rows = Vec::with_capacity(2);
    for k in 1..=2u8 {
        let expansion = intersect_traced(&section, &canonical_divisor(k)?, table, log);
        log.note(format!("R[1]·div(W{k})"), &expansion);
        let eq = expansion.sub(&adjunction);
        log.note(format!("R[1]·div(W{k}) − R[1]·K"), &eq);
        rows.push(unknown_coefficients(&eq)?);
    }
    let [a1, b1, c1] = rows[0].clone();
    let [a2, b2, c2] = rows[1].clone();
    let det = a1.mul(&b2).sub(&a2.mul(&b1));
    if det.is_zero() {
        return Err(Error::Inconsistent("adjunction system is singular".into()));
    }
    let section_square = c2.mul(&b1).sub(&c1.mul(&b2)).div(&det)?;
    let x2 = a2.mul(&c1).sub(&a1.mul(&c2)).div(&det)?;
    log.note("solved Rsq", &section_square);
    log.note("solved x2", &x2);
    let symmetry_residual = sym(Symbol::X1).sub(&x2);
    log.note("x1 − x2", &symmetry_residual);
    if !symmetry_residual.is_zero() {
        return Err(Error::Inconsistent(format!("x1 − x2 = {symmetry_residual}")));
    }
    let sol = AdjunctionSolution {
        section_square,
        x2,
        symmetry_residual,
    };
    let resolved = table.resolved(&sol);
    for k in 1..=2u8 {
        let lhs = intersect(&section, &canonical_divisor(k)?, &resolved);
        let rhs = two_gamma_minus_two().sub(&intersect(&section, &section, &resolved));
        if !lhs.sub(&rhs).is_zero() {
            return Err(Error::Inconsistent(format!("R[1]·div(W{k}) = {lhs} but adjunction gives {rhs}")));
        }
    }
    Ok(sol)
}

/// Counts behind `R_j·g⁻¹(s₁)` for a concrete number of sections.
#[derive(Clone, Debug, Serialize)]
pub struct PointCounts {
    pub r: u32,
    pub deg_zeta: SymbolicScalar,
    /// `|π_j⁻¹(s₁)| = 2^(r−1)`.
    pub projection_fiber: SymbolicScalar,
    /// `deg ζ · 2^(r−1)`.
    pub per_point_from_degree: SymbolicScalar,
    /// `γ = 1 + deg ζ · r · 2^(r−1)`, from `2γ − 2 = deg ζ · r · 2^r`.
    pub gamma: SymbolicScalar,
    /// `(γ − 1)/r` with the `γ` above.
    pub per_point_from_gamma: SymbolicScalar,
    /// `Σ_j R_j·g⁻¹(D₁) = 2r · count`.
    pub sum_over_sections: SymbolicScalar,
    /// `2(γ − 1)`.
    pub sum_expected: SymbolicScalar,
    pub agree: bool,
}

pub fn point_counts(r: u32, deg_zeta: &SymbolicScalar) -> Result<PointCounts> {
    if r == 0 || r > 62 {
        return Err(Error::InvalidArgument(format!("r = {r} outside 1..=62")));
    }
    let fiber = SymbolicScalar::rational(Rational::from(1i64 << (r - 1)));
    let r_s = SymbolicScalar::int(r as i64);
    let per_point_from_degree = deg_zeta.mul(&fiber);
    let gamma = SymbolicScalar::one().add(&deg_zeta.mul(&r_s).mul(&fiber));
    let per_point_from_gamma = gamma.sub(&SymbolicScalar::one()).div(&r_s)?;
    let sum_over_sections = SymbolicScalar::int(2).mul(&r_s).mul(&per_point_from_degree);
    let sum_expected = SymbolicScalar::int(2).mul(&gamma.sub(&SymbolicScalar::one()));
    let agree = per_point_from_degree == per_point_from_gamma && sum_over_sections == sum_expected;
    Ok(PointCounts {
        r,
        deg_zeta: deg_zeta.clone(),
        projection_fiber: fiber,
        per_point_from_degree,
        gamma,
        per_point_from_gamma,
        sum_over_sections,
        sum_expected,
        agree,
    })
}

/// `N = |g⁻¹(s₁) ∩ R_j|` with `r` symbolic: each of the `r` sections meets
/// `g⁻¹(s₁)` and `g⁻¹(t₁)` in `N = deg ζ · 2^(r−1)` points, and
/// `2γ − 2 = deg ζ · r · 2^r = 2r·N`, so `N = (γ − 1)/r`.
pub fn point_count_symbolic(log: &mut Transcript) -> Result<SymbolicScalar> {
    let r = sym(Symbol::R);
    let eq = two_gamma_minus_two().sub(&SymbolicScalar::int(2).mul(&r).mul(&sym(Symbol::PointCount)));
    log.note("Riemann–Hurwitz for the unramified cover of the configuration curve: (2γ − 2) − 2r·N", &eq);
    let slope = eq.derivative(Symbol::PointCount);
    let constant = eq.substitute(Symbol::PointCount, &SymbolicScalar::zero())?;
    let n = constant.neg().div(&slope)?;
    log.note("N", &n);
    Ok(n)
}

/// Closed form `(8 + 2r)(2γ − 2) + 3(γ − 1)`.
pub fn k_squared_closed_form() -> SymbolicScalar {
    let r = sym(Symbol::R);
    let g = sym(Symbol::Gamma);
    SymbolicScalar::int(8)
        .add(&SymbolicScalar::int(2).mul(&r))
        .mul(&two_gamma_minus_two())
        .add(&SymbolicScalar::int(3).mul(&g.sub(&SymbolicScalar::one())))
}

#[derive(Clone, Debug, Serialize)]
pub struct KSquaredDerivation {
    pub schema: &'static str,
    /// `div(W₁)·div(W₂)` with the unknowns still present.
    pub expansion: SymbolicScalar,
    pub adjunction: AdjunctionSolution,
    /// After eliminating `Rsq` and `x2`; contains `x1`.
    pub in_terms_of_x1: SymbolicScalar,
    /// `x1 = R_j·g⁻¹(D₁) = 2N`.
    pub x1: SymbolicScalar,
    /// `R_j² = −x1/2` after the count.
    pub section_square: SymbolicScalar,
    pub k_squared: SymbolicScalar,
    /// `(2r + 8)(2γ − 2) + (3/2)Σ_j R_j·g⁻¹(D₁)`.
    pub via_three_halves: SymbolicScalar,
    pub closed_form: SymbolicScalar,
    pub matches_closed_form: bool,
    pub transcript: Transcript,
}

/// Runs the whole derivation from the table rules and adjunction.
pub fn derive_k_squared() -> Result<KSquaredDerivation> {
    let table = build_table();
    let mut log = Transcript::default();
    let w1 = canonical_divisor(1)?;
    let w2 = canonical_divisor(2)?;
    let expansion = intersect_traced(&w1, &w2, &table, &mut log);
    log.note("K² = div(W1)·div(W2)", &expansion);
    let adjunction = solve_adjunction(&table, &mut log)?;
    let in_terms_of_x1 = expansion
        .substitute(Symbol::SectionSquare, &adjunction.section_square)?
        .substitute(Symbol::X2, &adjunction.x2)?;
    log.note("K² after adjunction", &in_terms_of_x1);
    let n = point_count_symbolic(&mut log)?;
    let x1 = SymbolicScalar::int(2).mul(&n);
    log.note("x1 = R[j]·g^-1(s1) + R[j]·g^-1(t1) = 2N", &x1);
    let section_square = adjunction.section_square.substitute(Symbol::X1, &x1)?;
    log.note("R[j]²", &section_square);
    let k_squared = in_terms_of_x1.substitute(Symbol::X1, &x1)?;
    log.note("K²", &k_squared);
    let r = sym(Symbol::R);
    let via_three_halves = SymbolicScalar::int(2)
        .mul(&r)
        .add(&SymbolicScalar::int(8))
        .mul(&two_gamma_minus_two())
        .add(&SymbolicScalar::ratio(3, 2).mul(&r).mul(&x1));
    log.note("K² via (2r + 8)(2γ − 2) + (3/2)·Σ R[j]·g^-1(D1)", &via_three_halves);
    let closed_form = k_squared_closed_form();
    let matches_closed_form = k_squared.sub(&closed_form).is_zero() && via_three_halves.sub(&closed_form).is_zero();
    log.note("K² − (8 + 2r)(2γ − 2) − 3(γ − 1)", &k_squared.sub(&closed_form));
    if !matches_closed_form {
        return Err(Error::Inconsistent(format!("derived K² = {k_squared} differs from {closed_form}")));
    }
    Ok(KSquaredDerivation {
        schema: SCHEMA_VERSION,
        expansion,
        adjunction,
        in_terms_of_x1,
        x1,
        section_square,
        k_squared,
        via_three_halves,
        closed_form,
        matches_closed_form,
        transcript: log,
    })
}

/// `K²` at concrete `r`, `γ`.
pub fn k_squared_value(r: i64, gamma: i64) -> Rational {
    Rational::from((8 + 2 * r) * (2 * gamma - 2) + 3 * (gamma - 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(n: i64) -> SymbolicScalar {
        SymbolicScalar::int(n)
    }

    #[test]
    fn table_lookups() {
        let t = build_table();
        let f1 = BasisClass::Fiber { k: 1, i: 1 };
        let f2 = BasisClass::Fiber { k: 2, i: 1 };
        let r1 = BasisClass::Section { j: 1 };
        let r2 = BasisClass::Section { j: 2 };
        assert_eq!(t.lookup(&f1, &r1), s(1));
        assert_eq!(t.lookup(&f1, &f2), s(0));
        assert_eq!(t.lookup(&r1, &r2), s(0));
        assert_eq!(t.lookup(&r1, &r1), sym(Symbol::SectionSquare));
        assert_eq!(t.lookup(&r1, &BasisClass::Pullback(PointLabel::T2)), sym(Symbol::X2).mul(&SymbolicScalar::ratio(1, 2)));
        assert!(t.is_symmetric());
    }

    #[test]
    fn family_products() {
        let t = build_table();
        let f1 = DivisorExpr::family(Family::Fibers(1));
        let f2 = DivisorExpr::family(Family::Fibers(2));
        assert!(intersect(&f1, &f2, &t).is_zero());
        assert!(intersect(&f1, &f1, &t).is_zero());
        let v = intersect(&f1, &pullback_divisor(2), &t);
        assert_eq!(v, s(4).mul(&two_gamma_minus_two()));
        let rr = intersect(&DivisorExpr::family(Family::Sections), &DivisorExpr::family(Family::Sections), &t);
        assert_eq!(rr, sym(Symbol::R).mul(&sym(Symbol::SectionSquare)));
    }

    #[test]
    fn expansion_before_solving() {
        let t = build_table();
        let k2 = intersect(&canonical_divisor(1).unwrap(), &canonical_divisor(2).unwrap(), &t);
        let r = sym(Symbol::R);
        let expected = s(2)
            .mul(&r)
            .add(&s(8))
            .mul(&two_gamma_minus_two())
            .add(&r.mul(&sym(Symbol::SectionSquare)))
            .add(&r.mul(&sym(Symbol::X1)))
            .add(&r.mul(&sym(Symbol::X2)));
        assert_eq!(k2, expected);
    }

    #[test]
    fn adjunction_gives_half_relation() {
        let mut log = Transcript::default();
        let sol = solve_adjunction(&build_table(), &mut log).unwrap();
        assert_eq!(sol.section_square, sym(Symbol::X1).mul(&SymbolicScalar::ratio(-1, 2)));
        assert_eq!(sol.x2, sym(Symbol::X1));
        assert!(sol.symmetry_residual.is_zero());
        assert!(!log.steps.is_empty());
    }

    #[test]
    fn derivation_reaches_closed_form() {
        let d = derive_k_squared().unwrap();
        assert!(d.matches_closed_form);
        let expected_rsq = sym(Symbol::Gamma).sub(&s(1)).div(&sym(Symbol::R)).unwrap().neg();
        assert_eq!(d.section_square, expected_rsq);
        let at = d
            .k_squared
            .substitute(Symbol::R, &s(8))
            .unwrap()
            .substitute(Symbol::Gamma, &s(2))
            .unwrap();
        assert_eq!(at, s(51));
        assert_eq!(k_squared_value(8, 2), Rational::from(51));
        let text = d.transcript.to_text(&build_table());
        assert!(text.contains("SectionMeetsFibre"));
    }

    #[test]
    fn point_counts_agree() {
        let c = point_counts(8, &s(1)).unwrap();
        assert_eq!(c.gamma, s(1025));
        assert_eq!(c.per_point_from_degree, s(128));
        assert!(c.agree);
        let c1 = point_counts(1, &s(1)).unwrap();
        assert_eq!(c1.gamma, s(2));
        assert_eq!(c1.per_point_from_gamma, s(1));
        let symbolic = point_counts(5, &sym(Symbol::DegZeta)).unwrap();
        assert!(symbolic.agree);
    }

    #[test]
    fn canonical_divisor_shape() {
        let t = build_table();
        let k1 = canonical_divisor(1).unwrap();
        assert_eq!(k1.coefficient(&Term::Family(Family::Fibers(1))), s(1));
        assert_eq!(k1.coefficient(&Term::Class(BasisClass::Pullback(PointLabel::T1))), s(1));
        // one point per section plus two per pullback point
        assert_eq!(k1.degree_on_fiber(&t), sym(Symbol::R).add(&s(4)));
        let fibres = DivisorExpr::family(Family::Fibers(1));
        assert_eq!(intersect(&fibres, &DivisorExpr::class(BasisClass::Section { j: 3 }), &t), two_gamma_minus_two());
        assert!(canonical_divisor(3).is_err());
    }
}
