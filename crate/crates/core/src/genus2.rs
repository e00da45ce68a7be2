//! The genus-two curve `X_λ : y² = x⁶ + λx² + λ` and the double cover
//! `π : X_λ → E_λ, (x, y) ↦ (x², y)`.
//!
//! The sextic model has two points at infinity. They are labelled by the sign
//! of `v` in the chart `(u, v) = (1/x, y/x³)`, where the curve reads
//! `v² = 1 + λu⁴ + λu⁶` and `u = 0` gives `v = ±1`. Both map to the neutral
//! element of `E_λ`.
//!
//! `π` ramifies exactly at `s± = (0, ±√λ)`. The derivative used for the
//! Jacobian of the configuration map is `dπ/dx = 2x` in the affine chart and
//! `dt/du = 1/v = ±1` at infinity, where `t = X/Y` is the local parameter of
//! `E_λ` at its neutral element.

use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::elliptic::{EllipticCurve, EllipticPoint};
use crate::error::{Error, Result};
use crate::scalar::{ApproxCtx, Complex, Field, NotRepresentable, Separation};

#[derive(Clone, Debug, PartialEq)]
pub enum GenusTwoPoint<F> {
    Affine { x: F, y: F },
    /// Chart point `(u, v) = (0, 1)`.
    InfinityPlus,
    /// Chart point `(u, v) = (0, −1)`.
    InfinityMinus,
}

impl<F: Field> GenusTwoPoint<F> {
    pub fn affine(x: F, y: F) -> Self {
        GenusTwoPoint::Affine { x, y }
    }

    pub fn is_infinite(&self) -> bool {
        !matches!(self, GenusTwoPoint::Affine { .. })
    }

    pub fn separation(&self, other: &Self) -> Separation {
        use GenusTwoPoint::*;
        match (self, other) {
            (Affine { x: x1, y: y1 }, Affine { x: x2, y: y2 }) => x1.separation(x2).combine(y1.separation(y2)),
            (InfinityPlus, InfinityPlus) | (InfinityMinus, InfinityMinus) => Separation::Equal,
            _ => Separation::Distinct,
        }
    }

    pub fn map<G>(&self, f: impl Fn(&F) -> G) -> GenusTwoPoint<G> {
        match self {
            GenusTwoPoint::Affine { x, y } => GenusTwoPoint::Affine { x: f(x), y: f(y) },
            GenusTwoPoint::InfinityPlus => GenusTwoPoint::InfinityPlus,
            GenusTwoPoint::InfinityMinus => GenusTwoPoint::InfinityMinus,
        }
    }

    pub fn to_complex(&self, ctx: ApproxCtx) -> GenusTwoPoint<Complex> {
        self.map(|v| v.to_complex(ctx))
    }
}

impl<F: fmt::Display> fmt::Display for GenusTwoPoint<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenusTwoPoint::Affine { x, y } => write!(f, "({x}, {y})"),
            GenusTwoPoint::InfinityPlus => f.write_str("∞₊"),
            GenusTwoPoint::InfinityMinus => f.write_str("∞₋"),
        }
    }
}

/// `"infinity_plus"`, `"infinity_minus"` or `{"x": .., "y": ..}`.
impl<F: Serialize> Serialize for GenusTwoPoint<F> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            GenusTwoPoint::InfinityPlus => serializer.serialize_str("infinity_plus"),
            GenusTwoPoint::InfinityMinus => serializer.serialize_str("infinity_minus"),
            GenusTwoPoint::Affine { x, y } => {
                let mut st = serializer.serialize_struct("GenusTwoPoint", 2)?;
                st.serialize_field("x", x)?;
                st.serialize_field("y", y)?;
                st.end()
            }
        }
    }
}

/// The fibre of `π` over a point, possibly computed in a coarser field.
#[derive(Clone, Debug)]
pub enum Fiber<F> {
    Exact(Vec<GenusTwoPoint<F>>),
    /// Square roots left the exact tower; the points are approximations.
    Approximate(Vec<GenusTwoPoint<Complex>>),
}

impl<F> Fiber<F> {
    pub fn len(&self) -> usize {
        match self {
            Fiber::Exact(v) => v.len(),
            Fiber::Approximate(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_approximate(&self) -> bool {
        matches!(self, Fiber::Approximate(_))
    }
}

#[derive(Clone, Debug)]
pub struct GenusTwoCurve<F> {
    elliptic: EllipticCurve<F>,
}

impl<F: Field> GenusTwoCurve<F> {
    /// Fails for the same parameters as `E_λ`: `x⁶ + λx² + λ` has a repeated
    /// root iff `t³ + λt + λ` does or `λ = 0`.
    pub fn new(lambda: F) -> Result<Self> {
        Ok(GenusTwoCurve {
            elliptic: EllipticCurve::new(lambda)?,
        })
    }

    pub fn lambda(&self) -> &F {
        self.elliptic.lambda()
    }

    /// The quotient curve `E_λ`.
    pub fn elliptic(&self) -> &EllipticCurve<F> {
        &self.elliptic
    }

    pub fn genus(&self) -> u32 {
        2
    }

    /// `x⁶ + λx² + λ`.
    pub fn rhs(&self, x: &F) -> F {
        let x2 = x.square();
        let lam = self.lambda();
        x2.square().mul(&x2).add(&lam.mul(&x2)).add(lam)
    }

    pub fn contains(&self, p: &GenusTwoPoint<F>) -> bool {
        match p {
            GenusTwoPoint::Affine { x, y } => y.square().approx_eq(&self.rhs(x)),
            _ => true,
        }
    }

    fn check(&self, p: &GenusTwoPoint<F>) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::OffCurve(format!("{p} on y² = x⁶ + {0}x² + {0}", self.lambda())))
        }
    }

    /// `s₊ = (0, √λ)`.
    pub fn s_plus(&self) -> Result<GenusTwoPoint<F>> {
        let root = self.lambda().sqrt().ok_or(NotRepresentable)?;
        Ok(GenusTwoPoint::affine(self.lambda().zero_like(), root))
    }

    /// `s₋ = (0, −√λ)`.
    pub fn s_minus(&self) -> Result<GenusTwoPoint<F>> {
        let root = self.lambda().sqrt().ok_or(NotRepresentable)?;
        Ok(GenusTwoPoint::affine(self.lambda().zero_like(), root.neg()))
    }

    /// The deck transformation `(x, y) ↦ (−x, y)` of `π`; it swaps the two
    /// points at infinity since `v = y/x³` changes sign.
    pub fn deck_involution(&self, p: &GenusTwoPoint<F>) -> GenusTwoPoint<F> {
        match p {
            GenusTwoPoint::Affine { x, y } => GenusTwoPoint::affine(x.neg(), y.clone()),
            GenusTwoPoint::InfinityPlus => GenusTwoPoint::InfinityMinus,
            GenusTwoPoint::InfinityMinus => GenusTwoPoint::InfinityPlus,
        }
    }

    /// `π(x, y) = (x², y)`; both points at infinity go to `∞`.
    pub fn pi_cover(&self, p: &GenusTwoPoint<F>) -> Result<EllipticPoint<F>> {
        self.check(p)?;
        Ok(self.pi_unchecked(p))
    }

    pub(crate) fn pi_unchecked(&self, p: &GenusTwoPoint<F>) -> EllipticPoint<F> {
        match p {
            GenusTwoPoint::Affine { x, y } => EllipticPoint::affine(x.square(), y.clone()),
            _ => EllipticPoint::Infinity,
        }
    }

    /// `π⁻¹(q)` inside the scalar field of the curve.
    ///
    /// Two points `(±√X, y)` in general, the single branch point when `X = 0`,
    /// and both points at infinity over `∞`. Fails with
    /// [`Error::NotRepresentable`] when `√X` is not in the field.
    pub fn pi_fiber(&self, q: &EllipticPoint<F>) -> Result<Vec<GenusTwoPoint<F>>> {
        if !self.elliptic.contains(q) {
            return Err(Error::OffCurve(format!("{q} is not on E_λ")));
        }
        Ok(self.pi_fiber_unchecked(q)?)
    }

    pub(crate) fn pi_fiber_unchecked(&self, q: &EllipticPoint<F>) -> std::result::Result<Vec<GenusTwoPoint<F>>, NotRepresentable> {
        match q {
            EllipticPoint::Infinity => Ok(vec![GenusTwoPoint::InfinityPlus, GenusTwoPoint::InfinityMinus]),
            EllipticPoint::Affine { x, y } => {
                if x.is_zero() {
                    return Ok(vec![GenusTwoPoint::affine(x.zero_like(), y.clone())]);
                }
                let root = x.sqrt().ok_or(NotRepresentable)?;
                Ok(vec![
                    GenusTwoPoint::affine(root.clone(), y.clone()),
                    GenusTwoPoint::affine(root.neg(), y.clone()),
                ])
            }
        }
    }

    /// Like [`GenusTwoCurve::pi_fiber`], falling back to complex
    /// approximations at `ctx` when an exact root does not exist.
    pub fn pi_fiber_or_approx(&self, q: &EllipticPoint<F>, ctx: ApproxCtx) -> Result<Fiber<F>> {
        match self.pi_fiber(q) {
            Ok(points) => Ok(Fiber::Exact(points)),
            Err(Error::NotRepresentable(_)) => {
                let curve = GenusTwoCurve::new(self.lambda().to_complex(ctx))?;
                let qc = q.map(|v| v.to_complex(ctx));
                Ok(Fiber::Approximate(curve.pi_fiber(&qc)?))
            }
            Err(e) => Err(e),
        }
    }

    /// `true` iff `p` is one of the branch points `s±`.
    pub fn pi_is_critical(&self, p: &GenusTwoPoint<F>) -> bool {
        match p {
            GenusTwoPoint::Affine { x, y } => {
                if !x.is_zero() {
                    return false;
                }
                match self.lambda().sqrt() {
                    Some(root) => y.sub(&root).is_zero() || y.add(&root).is_zero(),
                    // Without √λ in the field, x = 0 cannot lie on the curve.
                    None => false,
                }
            }
            _ => false,
        }
    }

    /// Derivative of `π` in local coordinates: `2x` in the affine chart, and
    /// `±1` at the points at infinity.
    pub fn pi_derivative(&self, p: &GenusTwoPoint<F>) -> F {
        let lam = self.lambda();
        match p {
            GenusTwoPoint::Affine { x, .. } => x.from_i64_like(2).mul(x),
            GenusTwoPoint::InfinityPlus => lam.one_like(),
            GenusTwoPoint::InfinityMinus => lam.one_like().neg(),
        }
    }

    /// Support of the divisor of `w₁ = x dx / y` (k = 1) or `w₂ = dx / y`
    /// (k = 2). Each has degree `2g − 2 = 2`.
    pub fn differential_divisor(&self, k: u8) -> Result<[GenusTwoPoint<F>; 2]> {
        match k {
            1 => Ok([self.s_plus()?, self.s_minus()?]),
            2 => Ok([GenusTwoPoint::InfinityPlus, GenusTwoPoint::InfinityMinus]),
            _ => Err(Error::InvalidArgument(format!("differential index must be 1 or 2, got {k}"))),
        }
    }
}
