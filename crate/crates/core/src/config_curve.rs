//! The configuration curve
//! `C_{λ,r} = {(p₁, …, p_r) ∈ X_λ^r : π(p_i) = π(p₁) ⊕ e_i, 2 ≤ i ≤ r}`.
//!
//! Forgetting the last coordinate gives a double cover
//! `C_{λ,r} → C_{λ,r−1}` branched where `p_r = s±`; iterating it down to
//! `C_{λ,1} = X_λ → E_λ` is the tower whose genera and branch points are
//! computed here.

use rayon::prelude::*;
use serde::Serialize;

use crate::elliptic::{EllipticCurve, EllipticPoint};
use crate::error::{Error, Result};
use crate::genus2::{GenusTwoCurve, GenusTwoPoint};
use crate::scalar::{ApproxCtx, Complex, Field, Separation};
use crate::SCHEMA_VERSION;

/// Largest `r` whose genus fits in a `u128`.
pub const MAX_GENUS_R: u32 = 120;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ConfigTuple<F> {
    pub points: Vec<GenusTwoPoint<F>>,
}

impl<F: Field> ConfigTuple<F> {
    pub fn new(points: Vec<GenusTwoPoint<F>>) -> Self {
        ConfigTuple { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn separation(&self, other: &Self) -> Separation {
        if self.len() != other.len() {
            return Separation::Distinct;
        }
        self.points
            .iter()
            .zip(&other.points)
            .fold(Separation::Equal, |acc, (a, b)| acc.combine(a.separation(b)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    /// Some comparison fell in the tolerance band; retry at higher precision.
    Ambiguous,
}

impl From<Separation> for Verdict {
    fn from(s: Separation) -> Self {
        match s {
            Separation::Equal => Verdict::Holds,
            Separation::Distinct => Verdict::Fails,
            Separation::Ambiguous => Verdict::Ambiguous,
        }
    }
}

impl Verdict {
    fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::Fails, _) | (_, Verdict::Fails) => Verdict::Fails,
            (Verdict::Ambiguous, _) | (_, Verdict::Ambiguous) => Verdict::Ambiguous,
            _ => Verdict::Holds,
        }
    }
}

/// The `(r−1) × r` Jacobian of `Ψ_i = π(p_{i+1}) ⊖ π(p₁) ⊖ e_{i+1}`.
#[derive(Clone, Debug, Serialize)]
pub struct JacobianMatrix<F> {
    pub entries: Vec<Vec<F>>,
    pub rank: usize,
    /// 1-based indices of coordinates at a branch point `s±`.
    pub critical: Vec<usize>,
}

impl<F> JacobianMatrix<F> {
    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn is_maximal_rank(&self) -> bool {
        self.rank == self.rows()
    }

    /// More than one branch-point coordinate cannot happen for generic `e_i`.
    pub fn violates_genericity(&self) -> bool {
        self.critical.len() > 1
    }
}

#[derive(Clone, Debug)]
pub struct ConfigCurve<F> {
    x: GenusTwoCurve<F>,
    /// `e₁ = ∞, e₂, …, e_r`.
    e: Vec<EllipticPoint<F>>,
}

impl<F: Field> ConfigCurve<F> {
    /// `e_points` are `e₂, …, e_r`; an empty list gives `C_{λ,1} = X_λ`.
    pub fn new(x: GenusTwoCurve<F>, e_points: Vec<EllipticPoint<F>>) -> Result<Self> {
        for (i, p) in e_points.iter().enumerate() {
            if !x.elliptic().contains(p) {
                return Err(Error::OffCurve(format!("e_{} = {p}", i + 2)));
            }
        }
        let mut e = Vec::with_capacity(e_points.len() + 1);
        e.push(EllipticPoint::Infinity);
        e.extend(e_points);
        Ok(ConfigCurve { x, e })
    }

    pub fn r(&self) -> usize {
        self.e.len()
    }

    pub fn curve(&self) -> &GenusTwoCurve<F> {
        &self.x
    }

    pub fn elliptic(&self) -> &EllipticCurve<F> {
        self.x.elliptic()
    }

    /// `e_i` for `1 ≤ i ≤ r`, with `e₁ = ∞`.
    pub fn e(&self, i: usize) -> &EllipticPoint<F> {
        &self.e[i - 1]
    }

    /// `C_{λ,k}` for `k ≤ r`, using `e₂, …, e_k`.
    pub fn truncated(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.r() {
            return Err(Error::InvalidArgument(format!("level {k} outside 1..={}", self.r())));
        }
        Ok(ConfigCurve {
            x: self.x.clone(),
            e: self.e[..k].to_vec(),
        })
    }

    pub fn to_complex(&self, ctx: ApproxCtx) -> Result<ConfigCurve<Complex>> {
        let x = GenusTwoCurve::new(self.x.lambda().to_complex(ctx))?;
        let e = self.e.iter().map(|p| p.map(|v| v.to_complex(ctx))).collect();
        Ok(ConfigCurve { x, e })
    }

    fn check_len(&self, tuple: &ConfigTuple<F>) -> Result<()> {
        if tuple.len() != self.r() {
            return Err(Error::InvalidArgument(format!("tuple has {} coordinates, expected {}", tuple.len(), self.r())));
        }
        Ok(())
    }

    /// All `r − 1` defining equations, the curve equation for every
    /// coordinate, and pairwise distinctness of the coordinates.
    pub fn membership_verdict(&self, tuple: &ConfigTuple<F>) -> Result<Verdict> {
        self.check_len(tuple)?;
        if tuple.points.iter().any(|p| !self.x.contains(p)) {
            return Ok(Verdict::Fails);
        }
        let base = self.x.pi_unchecked(&tuple.points[0]);
        let e = self.elliptic();
        let mut verdict = Verdict::Holds;
        for (i, p) in tuple.points.iter().enumerate().skip(1) {
            let expected = e.add_unchecked(&base, &self.e[i]);
            verdict = verdict.and(self.x.pi_unchecked(p).separation(&expected).into());
        }
        for i in 0..tuple.len() {
            for j in i + 1..tuple.len() {
                let s = tuple.points[i].separation(&tuple.points[j]);
                verdict = verdict.and(match s {
                    Separation::Equal => Verdict::Fails,
                    Separation::Ambiguous => Verdict::Ambiguous,
                    Separation::Distinct => Verdict::Holds,
                });
            }
        }
        Ok(verdict)
    }

    pub fn membership(&self, tuple: &ConfigTuple<F>) -> Result<bool> {
        Ok(self.membership_verdict(tuple)? == Verdict::Holds)
    }

    /// The fibre of the `j`-th coordinate projection `π_j : C_{λ,r} → X_λ`
    /// over `p`, in lexicographic order of sign patterns (`+√` first).
    ///
    /// Fails with [`Error::NotRepresentable`] when a needed square root is
    /// outside the scalar field.
    pub fn fiber_of_projection(&self, j: usize, p: &GenusTwoPoint<F>) -> Result<Vec<ConfigTuple<F>>> {
        let r = self.r();
        if j == 0 || j > r {
            return Err(Error::InvalidArgument(format!("projection index {j} outside 1..={r}")));
        }
        let e = self.elliptic();
        let image = self.x.pi_cover(p)?;
        // π(p₁) = π(p_j) ⊖ e_j
        let base = e.add_unchecked(&image, &e.neg(&self.e[j - 1]));
        let mut slots = Vec::with_capacity(r);
        for i in 0..r {
            if i == j - 1 {
                slots.push(vec![p.clone()]);
            } else {
                let q = e.add_unchecked(&base, &self.e[i]);
                slots.push(self.x.pi_fiber_unchecked(&q)?);
            }
        }
        Ok(cartesian(&slots))
    }

    /// `π₁⁻¹(p₁)`: one tuple per choice of square root in each later slot.
    pub fn fiber_over_p1(&self, p1: &GenusTwoPoint<F>) -> Result<Vec<ConfigTuple<F>>> {
        self.fiber_of_projection(1, p1)
    }

    /// `true` when some coordinate other than the `j`-th is forced onto a
    /// branch point, so the fibre over `p` is smaller than `2^(r−1)`.
    pub fn is_branch_value(&self, j: usize, p: &GenusTwoPoint<F>) -> Result<bool> {
        let r = self.r();
        if j == 0 || j > r {
            return Err(Error::InvalidArgument(format!("projection index {j} outside 1..={r}")));
        }
        let e = self.elliptic();
        let image = self.x.pi_cover(p)?;
        let base = e.add_unchecked(&image, &e.neg(&self.e[j - 1]));
        Ok((0..r).filter(|&i| i != j - 1).any(|i| match e.add_unchecked(&base, &self.e[i]) {
            EllipticPoint::Affine { x, .. } => x.is_zero(),
            EllipticPoint::Infinity => false,
        }))
    }

    /// The Jacobian at a tuple that lies on the curve.
    pub fn jacobian_at(&self, tuple: &ConfigTuple<F>) -> Result<JacobianMatrix<F>> {
        match self.membership_verdict(tuple)? {
            Verdict::Holds => Ok(self.jacobian_matrix(tuple)),
            Verdict::Ambiguous => Err(Error::PrecisionExhausted("membership undecided at this tolerance".into())),
            Verdict::Fails => Err(Error::InvalidArgument("tuple is not on the configuration curve".into())),
        }
    }

    /// The Jacobian pattern at an arbitrary tuple, without the membership
    /// check; used for negative controls.
    pub fn jacobian_matrix(&self, tuple: &ConfigTuple<F>) -> JacobianMatrix<F> {
        let r = tuple.len();
        let d: Vec<F> = tuple.points.iter().map(|p| self.x.pi_derivative(p)).collect();
        let zero = self.x.lambda().zero_like();
        let entries: Vec<Vec<F>> = (1..r)
            .map(|i| {
                let mut row = vec![zero.clone(); r];
                row[0] = d[0].neg();
                row[i] = d[i].clone();
                row
            })
            .collect();
        let rank = if entries.is_empty() { 0 } else { F::matrix_rank(&entries) };
        let critical = tuple
            .points
            .iter()
            .enumerate()
            .filter(|(_, p)| self.x.pi_is_critical(p))
            .map(|(i, _)| i + 1)
            .collect();
        JacobianMatrix { entries, rank, critical }
    }

    /// The branch points of `C_{λ,r} → C_{λ,r−1}`: all tuples with
    /// `p_r = s₊` followed by those with `p_r = s₋`.
    pub fn branch_points_of_tower(&self) -> Result<Vec<ConfigTuple<F>>> {
        let s = [self.x.s_plus()?, self.x.s_minus()?];
        let r = self.r();
        let mut out = Vec::new();
        for branch in &s {
            out.extend(self.fiber_of_projection(r, branch)?);
        }
        Ok(out)
    }
}

impl ConfigCurve<Complex> {
    /// Number of pairwise distinct tuples; a pair inside the tolerance band
    /// is a [`Error::PrecisionExhausted`] so callers can escalate.
    pub fn distinct_count(tuples: &[ConfigTuple<Complex>]) -> Result<usize> {
        let mut reps: Vec<&ConfigTuple<Complex>> = Vec::new();
        for t in tuples {
            let mut merged = false;
            for rep in &reps {
                match t.separation(rep) {
                    Separation::Equal => {
                        merged = true;
                        break;
                    }
                    Separation::Ambiguous => {
                        return Err(Error::PrecisionExhausted("two enumerated tuples are within 2·tol".into()));
                    }
                    Separation::Distinct => {}
                }
            }
            if !merged {
                reps.push(t);
            }
        }
        Ok(reps.len())
    }

    /// Common fibre size of `π_j` over every value in `values`; disagreement
    /// is an [`Error::Inconsistent`].
    pub fn projection_degree_estimate(&self, j: usize, values: &[GenusTwoPoint<Complex>]) -> Result<usize> {
        let counts: Vec<usize> = values
            .par_iter()
            .map(|p| {
                let fiber = self.fiber_of_projection(j, p)?;
                ConfigCurve::distinct_count(&fiber)
            })
            .collect::<Result<_>>()?;
        let first = *counts
            .first()
            .ok_or_else(|| Error::InvalidArgument("no sample values".into()))?;
        if counts.iter().any(|&c| c != first) {
            return Err(Error::Inconsistent(format!("fibre sizes of π_{j} disagree: {counts:?}")));
        }
        Ok(first)
    }

    /// Branch counts, genus and fibre degree for every level of the tower.
    pub fn tower_report(&self) -> Result<TowerReport> {
        let r = self.r();
        let mut levels = Vec::with_capacity(r);
        for k in 1..=r {
            let sub = self.truncated(k)?;
            let branch = sub.branch_points_of_tower()?;
            let half = branch.len() / 2;
            let plus = ConfigCurve::distinct_count(&branch[..half])?;
            let minus = ConfigCurve::distinct_count(&branch[half..])?;
            let count = ConfigCurve::distinct_count(&branch)?;
            let genus = genus_recursion(k as u32)?;
            let base_genus = if k == 1 { 1 } else { genus_recursion(k as u32 - 1)? };
            levels.push(TowerLevel {
                r: k,
                branch_count: count,
                branch_count_plus: plus,
                branch_count_minus: minus,
                genus,
                riemann_hurwitz: 2 * (2 * base_genus - 2) + count as u128 == 2 * genus - 2,
                connected: count > 0,
            });
        }
        let s = [self.x.s_plus()?, self.x.s_minus()?];
        let fiber_degree_estimate = self.projection_degree_estimate(r, &s)?;
        let top = levels.last().expect("r ≥ 1");
        Ok(TowerReport {
            schema: SCHEMA_VERSION,
            r,
            branch_count: top.branch_count,
            genus_by_recursion: genus_recursion(r as u32)?,
            genus_closed_form: genus_closed_form(r as u32)?,
            fiber_degree_estimate,
            levels,
        })
    }
}

fn cartesian<F: Clone + Send + Sync>(slots: &[Vec<GenusTwoPoint<F>>]) -> Vec<ConfigTuple<F>> {
    let total: usize = slots.iter().map(Vec::len).product();
    (0..total)
        .into_par_iter()
        .map(|mut idx| {
            let mut points = vec![None; slots.len()];
            for (k, slot) in slots.iter().enumerate().rev() {
                points[k] = Some(slot[idx % slot.len()].clone());
                idx /= slot.len();
            }
            ConfigTuple {
                points: points.into_iter().map(|p| p.expect("filled")).collect(),
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TowerLevel {
    pub r: usize,
    pub branch_count: usize,
    pub branch_count_plus: usize,
    pub branch_count_minus: usize,
    #[serde(serialize_with = "ser_u128")]
    pub genus: u128,
    /// `2(2g_{r−1} − 2) + #branch = 2g_r − 2`, with `g₀ = 1` for `E_λ`.
    pub riemann_hurwitz: bool,
    /// A double cover with a branch point over a connected curve is connected.
    pub connected: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TowerReport {
    pub schema: &'static str,
    pub r: usize,
    pub branch_count: usize,
    #[serde(serialize_with = "ser_u128")]
    pub genus_by_recursion: u128,
    #[serde(serialize_with = "ser_u128")]
    pub genus_closed_form: u128,
    pub fiber_degree_estimate: usize,
    pub levels: Vec<TowerLevel>,
}

fn ser_u128<S: serde::Serializer>(v: &u128, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

fn check_genus_r(r: u32) -> Result<()> {
    if r == 0 || r > MAX_GENUS_R {
        return Err(Error::InvalidArgument(format!("r = {r} outside 1..={MAX_GENUS_R}")));
    }
    Ok(())
}

/// `g₁ = 2` and `2g_r − 2 = 2(2g_{r−1} − 2) + 2^r`.
pub fn genus_recursion(r: u32) -> Result<u128> {
    check_genus_r(r)?;
    let mut euler: u128 = 2;
    for k in 2..=r {
        euler = 2 * euler + (1u128 << k);
    }
    Ok(euler / 2 + 1)
}

/// `r·2^(r−1) + 1`.
pub fn genus_closed_form(r: u32) -> Result<u128> {
    check_genus_r(r)?;
    Ok(r as u128 * (1u128 << (r - 1)) + 1)
}

/// Degree of `π_j : C_{λ,r} → X_λ`.
pub fn projection_degree(r: u32) -> u128 {
    1u128 << (r.max(1) - 1)
}

/// One row per tuple, two columns per coordinate; points at infinity are
/// written as `infinity_plus` / `infinity_minus` in the `x` column.
pub fn tuples_to_csv<F: Field>(tuples: &[ConfigTuple<F>]) -> Result<String> {
    let r = tuples.first().map_or(0, ConfigTuple::len);
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<String> = (1..=r).flat_map(|i| [format!("p{i}_x"), format!("p{i}_y")]).collect();
    w.write_record(&header).map_err(csv_err)?;
    for t in tuples {
        let mut row = Vec::with_capacity(2 * r);
        for p in &t.points {
            match p {
                GenusTwoPoint::Affine { x, y } => {
                    row.push(x.to_string());
                    row.push(y.to_string());
                }
                GenusTwoPoint::InfinityPlus => row.extend(["infinity_plus".to_string(), String::new()]),
                GenusTwoPoint::InfinityMinus => row.extend(["infinity_minus".to_string(), String::new()]),
            }
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidArgument(e.to_string())
}
