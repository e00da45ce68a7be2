//! The elliptic curve `E_λ : y² = x³ + λx + λ` and its chord-tangent group law.

use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{Field, NotRepresentable, Rational, Separation, Symbol, SymbolicScalar};

/// A point of `E_λ`: the neutral element at infinity or an affine point.
#[derive(Clone, Debug, PartialEq)]
pub enum EllipticPoint<F> {
    Infinity,
    Affine { x: F, y: F },
}

impl<F: Field> EllipticPoint<F> {
    pub fn affine(x: F, y: F) -> Self {
        EllipticPoint::Affine { x, y }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, EllipticPoint::Infinity)
    }

    pub fn x(&self) -> Option<&F> {
        match self {
            EllipticPoint::Affine { x, .. } => Some(x),
            EllipticPoint::Infinity => None,
        }
    }

    pub fn y(&self) -> Option<&F> {
        match self {
            EllipticPoint::Affine { y, .. } => Some(y),
            EllipticPoint::Infinity => None,
        }
    }

    pub fn separation(&self, other: &Self) -> Separation {
        match (self, other) {
            (EllipticPoint::Infinity, EllipticPoint::Infinity) => Separation::Equal,
            (EllipticPoint::Affine { x: x1, y: y1 }, EllipticPoint::Affine { x: x2, y: y2 }) => {
                x1.separation(x2).combine(y1.separation(y2))
            }
            _ => Separation::Distinct,
        }
    }

    pub fn map<G>(&self, f: impl Fn(&F) -> G) -> EllipticPoint<G> {
        match self {
            EllipticPoint::Infinity => EllipticPoint::Infinity,
            EllipticPoint::Affine { x, y } => EllipticPoint::Affine { x: f(x), y: f(y) },
        }
    }
}

impl<F: fmt::Display> fmt::Display for EllipticPoint<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EllipticPoint::Infinity => f.write_str("∞"),
            EllipticPoint::Affine { x, y } => write!(f, "({x}, {y})"),
        }
    }
}

/// `"infinity"` or `{"x": .., "y": ..}`.
impl<F: Serialize> Serialize for EllipticPoint<F> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            EllipticPoint::Infinity => serializer.serialize_str("infinity"),
            EllipticPoint::Affine { x, y } => {
                let mut st = serializer.serialize_struct("EllipticPoint", 2)?;
                st.serialize_field("x", x)?;
                st.serialize_field("y", y)?;
                st.end()
            }
        }
    }
}

/// Both normalizations of the j-invariant of `E_λ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JInvariant<T> {
    /// `λ³ / (4λ³ + 27λ²)`, without the conventional factor.
    pub ratio: T,
    /// `1728 · 4λ³ / (4λ³ + 27λ²)`, the standard normalization.
    pub standard: T,
}

/// The curve `y² = x³ + λx + λ`.
#[derive(Clone, Debug)]
pub struct EllipticCurve<F> {
    lambda: F,
}

/// `4λ³ + 27λ²`, which vanishes exactly at the singular parameters.
pub(crate) fn singular_factor<F: Field>(lambda: &F) -> F {
    let l2 = lambda.square();
    let l3 = l2.mul(lambda);
    lambda.from_i64_like(4).mul(&l3).add(&lambda.from_i64_like(27).mul(&l2))
}

/// `Δ = −16(4λ³ + 27λ²)`; defined for every `λ`, including singular ones.
pub fn discriminant<F: Field>(lambda: &F) -> F {
    lambda.from_i64_like(-16).mul(&singular_factor(lambda))
}

impl<F: Field> EllipticCurve<F> {
    pub fn new(lambda: F) -> Result<Self> {
        if singular_factor(&lambda).is_zero() {
            return Err(Error::SingularCurve(lambda.to_string()));
        }
        Ok(EllipticCurve { lambda })
    }

    pub fn lambda(&self) -> &F {
        &self.lambda
    }

    pub fn discriminant(&self) -> F {
        discriminant(&self.lambda)
    }

    /// `x³ + λx + λ`.
    pub fn rhs(&self, x: &F) -> F {
        x.square().mul(x).add(&self.lambda.mul(x)).add(&self.lambda)
    }

    pub fn contains(&self, p: &EllipticPoint<F>) -> bool {
        match p {
            EllipticPoint::Infinity => true,
            EllipticPoint::Affine { x, y } => y.square().approx_eq(&self.rhs(x)),
        }
    }

    fn check(&self, p: &EllipticPoint<F>) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::OffCurve(format!("{p} on y² = x³ + {0}x + {0}", self.lambda)))
        }
    }

    pub fn neg(&self, p: &EllipticPoint<F>) -> EllipticPoint<F> {
        match p {
            EllipticPoint::Infinity => EllipticPoint::Infinity,
            EllipticPoint::Affine { x, y } => EllipticPoint::affine(x.clone(), y.neg()),
        }
    }

    /// `P ⊕ Q`, rejecting points off the curve.
    pub fn add(&self, p: &EllipticPoint<F>, q: &EllipticPoint<F>) -> Result<EllipticPoint<F>> {
        self.check(p)?;
        self.check(q)?;
        Ok(self.add_unchecked(p, q))
    }

    /// `P ⊖ Q`.
    pub fn sub(&self, p: &EllipticPoint<F>, q: &EllipticPoint<F>) -> Result<EllipticPoint<F>> {
        self.add(p, &self.neg(q))
    }

    pub(crate) fn add_unchecked(&self, p: &EllipticPoint<F>, q: &EllipticPoint<F>) -> EllipticPoint<F> {
        let (x1, y1, x2, y2) = match (p, q) {
            (EllipticPoint::Infinity, _) => return q.clone(),
            (_, EllipticPoint::Infinity) => return p.clone(),
            (EllipticPoint::Affine { x: x1, y: y1 }, EllipticPoint::Affine { x: x2, y: y2 }) => (x1, y1, x2, y2),
        };
        if x1.approx_eq(x2) {
            if y1.add(y2).is_zero() {
                return EllipticPoint::Infinity;
            }
            return self.double(p);
        }
        let m = y2.sub(y1).div(&x2.sub(x1)).expect("distinct x-coordinates");
        let x3 = m.square().sub(x1).sub(x2);
        let y3 = m.mul(&x1.sub(&x3)).sub(y1);
        EllipticPoint::affine(x3, y3)
    }

    /// Tangent doubling with slope `(3x² + λ) / (2y)`.
    pub fn double(&self, p: &EllipticPoint<F>) -> EllipticPoint<F> {
        let EllipticPoint::Affine { x, y } = p else {
            return EllipticPoint::Infinity;
        };
        if y.is_zero() {
            return EllipticPoint::Infinity;
        }
        let num = x.from_i64_like(3).mul(&x.square()).add(&self.lambda);
        let m = num.div(&y.from_i64_like(2).mul(y)).expect("y is nonzero");
        let x3 = m.square().sub(&x.from_i64_like(2).mul(x));
        let y3 = m.mul(&x.sub(&x3)).sub(y);
        EllipticPoint::affine(x3, y3)
    }

    /// `[n]P` by double-and-add; negative `n` uses `[−n](⊖P)`.
    pub fn mul(&self, p: &EllipticPoint<F>, n: i64) -> Result<EllipticPoint<F>> {
        self.check(p)?;
        let base = if n < 0 { self.neg(p) } else { p.clone() };
        let mut k = n.unsigned_abs();
        let mut acc = EllipticPoint::Infinity;
        let mut pow = base;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add_unchecked(&acc, &pow);
            }
            pow = self.double(&pow);
            k >>= 1;
        }
        Ok(acc)
    }

    /// `(0, √λ)`, the image of the branch point `s₊`.
    pub fn branch_image_plus(&self) -> Result<EllipticPoint<F>> {
        let root = self.lambda.sqrt().ok_or(NotRepresentable)?;
        Ok(EllipticPoint::affine(self.lambda.zero_like(), root))
    }

    /// `(0, −√λ)`, the image of `s₋`.
    pub fn branch_image_minus(&self) -> Result<EllipticPoint<F>> {
        Ok(self.neg(&self.branch_image_plus()?))
    }

    /// `δ = π(s₊) ⊖ π(s₋) = [2](0, √λ)`, the excluded difference point.
    pub fn delta(&self) -> Result<EllipticPoint<F>> {
        let plus = self.branch_image_plus()?;
        let minus = self.branch_image_minus()?;
        self.sub(&plus, &minus)
    }

    pub fn j_invariant(&self) -> JInvariant<F> {
        let l3 = self.lambda.square().mul(&self.lambda);
        let ratio = l3.div(&singular_factor(&self.lambda)).expect("curve is nonsingular");
        let standard = ratio.mul(&self.lambda.from_i64_like(1728 * 4));
        JInvariant { ratio, standard }
    }
}

/// The j-invariant with `λ` kept as a formal symbol.
pub fn j_invariant_symbolic() -> JInvariant<SymbolicScalar> {
    let l = SymbolicScalar::symbol(Symbol::Lambda);
    let l2 = l.mul(&l);
    let l3 = l2.mul(&l);
    let den = SymbolicScalar::int(4).mul(&l3).add(&SymbolicScalar::int(27).mul(&l2));
    let ratio = l3.div(&den).expect("nonzero polynomial");
    let standard = ratio.mul(&SymbolicScalar::int(1728 * 4));
    JInvariant { ratio, standard }
}

/// The singular parameters `{0, −27/4}`.
pub fn singular_parameters() -> [Rational; 2] {
    [Rational::zero(), Rational::new(-27, 4).expect("nonzero denominator")]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Complex, QuadExt, QuadField};

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn e1() -> EllipticCurve<Rational> {
        EllipticCurve::new(q("1")).unwrap()
    }

    fn pt(x: &str, y: &str) -> EllipticPoint<Rational> {
        EllipticPoint::affine(q(x), q(y))
    }

    #[test]
    fn identity_and_inverse() {
        let e = e1();
        let p = pt("0", "1");
        assert_eq!(e.add(&p, &EllipticPoint::Infinity).unwrap(), p);
        assert_eq!(e.add(&p, &pt("0", "-1")).unwrap(), EllipticPoint::Infinity);
    }

    #[test]
    fn doubling_matches_substitution_oracle() {
        let e = e1();
        let d = e.mul(&pt("0", "1"), 2).unwrap();
        assert_eq!(d, pt("1/4", "-9/8"));
        // (−9/8)² = 81/64 and (1/4)³ + 1/4 + 1 = 1/64 + 16/64 + 64/64.
        assert_eq!(&q("-9/8") * &q("-9/8"), &(&q("1/64") + &q("1/4")) + &q("1"));
    }

    #[test]
    fn off_curve_rejected() {
        let e = e1();
        assert!(matches!(e.add(&pt("1", "1"), &pt("0", "1")), Err(Error::OffCurve(_))));
    }

    #[test]
    fn discriminant_values() {
        assert_eq!(discriminant(&q("1")), q("-496"));
        assert_eq!(discriminant(&q("0")), q("0"));
        assert_eq!(discriminant(&q("-27/4")), q("0"));
        assert!(matches!(EllipticCurve::new(q("-27/4")), Err(Error::SingularCurve(_))));
        assert!(EllipticCurve::new(q("0")).is_err());
    }

    #[test]
    fn j_invariant_at_one() {
        let j = e1().j_invariant();
        assert_eq!(j.ratio, q("1/31"));
        assert_eq!(j.standard, q("6912/31"));
    }

    #[test]
    fn j_invariant_symbolic_reduces() {
        let j = j_invariant_symbolic();
        let l = SymbolicScalar::symbol(Symbol::Lambda);
        let expected = l.div(&SymbolicScalar::int(4).mul(&l).add(&SymbolicScalar::int(27))).unwrap();
        assert_eq!(j.ratio, expected);
    }

    #[test]
    fn delta_at_one() {
        let e = e1();
        let d = e.delta().unwrap();
        assert_eq!(d, pt("1/4", "-9/8"));
        assert_eq!(e.add(&d, &e.neg(&d)).unwrap(), EllipticPoint::Infinity);
        let rev = e.sub(&e.branch_image_minus().unwrap(), &e.branch_image_plus().unwrap()).unwrap();
        assert_eq!(rev, e.neg(&d));
    }

    #[test]
    fn delta_closed_form_in_quadratic_extension() {
        // δ = (λ/4, −√λ(λ+8)/8) for λ = 2, 3, −5, 7/3.
        for l in ["2", "3", "-5", "7/3"] {
            let k = QuadField::new(q(l)).unwrap();
            let lam = QuadExt::rational(q(l), &k);
            let e = EllipticCurve::new(lam.clone()).unwrap();
            let d = e.delta().unwrap();
            let expected_x = QuadExt::rational(&q(l) / &q("4"), &k);
            let expected_y = QuadExt::new(q("0"), -&(&(&q(l) + &q("8")) / &q("8")), &k);
            assert_eq!(d, EllipticPoint::affine(expected_x, expected_y));
            assert!(e.contains(&d));
        }
        // Without the extension the root is not available.
        let e2 = EllipticCurve::new(q("2")).unwrap();
        assert!(matches!(e2.delta(), Err(Error::NotRepresentable(_))));
    }

    #[test]
    fn approximate_group_law() {
        let lam: Complex = "0.5,0.25".parse().unwrap();
        let e = EllipticCurve::new(lam).unwrap();
        let p = e.branch_image_plus().unwrap();
        let three = e.mul(&p, 3).unwrap();
        let alt = e.add(&e.double(&p), &p).unwrap();
        assert_eq!(three.separation(&alt), Separation::Equal);
        assert!(e.contains(&three));
    }
}
