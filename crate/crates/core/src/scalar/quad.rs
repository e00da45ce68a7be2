use std::fmt;
use std::sync::Arc;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::{ApproxCtx, Complex, Field, NotRepresentable, Rational, ScalarError, Separation};

/// The field `ℚ(√λ)` for a fixed nonzero rational `λ`.
///
/// When `λ` is itself a rational square the "extension" is `ℚ` and every
/// element is folded onto its rational part, so the canonical form is still
/// unique.
#[derive(Debug, PartialEq, Eq, Hash)]
pub struct QuadField {
    radicand: Rational,
    rational_root: Option<Rational>,
}

impl QuadField {
    pub fn new(radicand: Rational) -> Result<Arc<Self>, ScalarError> {
        if radicand == Rational::zero() {
            return Err(ScalarError::DivisionByZero);
        }
        let rational_root = radicand.sqrt_exact();
        Ok(Arc::new(QuadField {
            radicand,
            rational_root,
        }))
    }

    pub fn radicand(&self) -> &Rational {
        &self.radicand
    }

    /// `true` when `√λ` is rational and the extension is trivial.
    pub fn is_trivial(&self) -> bool {
        self.rational_root.is_some()
    }
}

/// `a + b·√λ` in canonical form.
#[derive(Clone)]
pub struct QuadExt {
    a: Rational,
    b: Rational,
    field: Arc<QuadField>,
}

impl QuadExt {
    pub fn new(a: Rational, b: Rational, field: &Arc<QuadField>) -> Self {
        QuadExt {
            a,
            b,
            field: Arc::clone(field),
        }
        .normalized()
    }

    pub fn rational(a: Rational, field: &Arc<QuadField>) -> Self {
        QuadExt::new(a, Rational::zero(), field)
    }

    /// The distinguished root `√λ` itself.
    pub fn sqrt_radicand(field: &Arc<QuadField>) -> Self {
        QuadExt::new(Rational::zero(), Rational::one(), field)
    }

    fn normalized(mut self) -> Self {
        if let Some(root) = &self.field.rational_root {
            if self.b != Rational::zero() {
                self.a = &self.a + &(&self.b * root);
                self.b = Rational::zero();
            }
        }
        self
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn field(&self) -> &Arc<QuadField> {
        &self.field
    }

    /// The rational value, when the `√λ` part vanishes.
    pub fn as_rational(&self) -> Option<&Rational> {
        (self.b == Rational::zero()).then_some(&self.a)
    }

    pub fn conjugate(&self) -> Self {
        QuadExt::new(self.a.clone(), -&self.b, &self.field)
    }

    /// `a² − b²λ`.
    pub fn norm(&self) -> Rational {
        &(&self.a * &self.a) - &(&(&self.b * &self.b) * &self.field.radicand)
    }

    fn same_field(&self, other: &Self) {
        assert!(
            Arc::ptr_eq(&self.field, &other.field) || self.field == other.field,
            "quadratic extension mismatch: sqrt({}) vs sqrt({})",
            self.field.radicand,
            other.field.radicand
        );
    }
}

impl PartialEq for QuadExt {
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a && self.b == other.b && self.field.radicand == other.field.radicand
    }
}

impl Eq for QuadExt {}

impl fmt::Display for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b == Rational::zero() {
            write!(f, "{}", self.a)
        } else {
            write!(f, "{} + {}*sqrt({})", self.a, self.b, self.field.radicand)
        }
    }
}

impl fmt::Debug for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Serialized as `{"a": "num/den", "b": "num/den"}`; the radicand is recorded
/// once by the enclosing document.
impl Serialize for QuadExt {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("QuadExt", 2)?;
        st.serialize_field("a", &self.a)?;
        st.serialize_field("b", &self.b)?;
        st.end()
    }
}

impl Field for QuadExt {
    const EXACT: bool = true;

    fn zero_like(&self) -> Self {
        QuadExt::rational(Rational::zero(), &self.field)
    }
    fn one_like(&self) -> Self {
        QuadExt::rational(Rational::one(), &self.field)
    }
    fn from_i64_like(&self, n: i64) -> Self {
        QuadExt::rational(Rational::from(n), &self.field)
    }
    fn from_rational_like(&self, q: &Rational) -> Self {
        QuadExt::rational(q.clone(), &self.field)
    }

    fn add(&self, other: &Self) -> Self {
        self.same_field(other);
        QuadExt::new(&self.a + &other.a, &self.b + &other.b, &self.field)
    }

    fn sub(&self, other: &Self) -> Self {
        self.same_field(other);
        QuadExt::new(&self.a - &other.a, &self.b - &other.b, &self.field)
    }

    fn mul(&self, other: &Self) -> Self {
        self.same_field(other);
        let lam = &self.field.radicand;
        let a = &(&self.a * &other.a) + &(&(&self.b * &other.b) * lam);
        let b = &(&self.a * &other.b) + &(&self.b * &other.a);
        QuadExt::new(a, b, &self.field)
    }

    fn neg(&self) -> Self {
        QuadExt::new(-&self.a, -&self.b, &self.field)
    }

    fn inv(&self) -> Result<Self, ScalarError> {
        let n = self.norm();
        let n_inv = n.recip()?;
        Ok(QuadExt::new(&self.a * &n_inv, -&(&self.b * &n_inv), &self.field))
    }

    fn is_zero(&self) -> bool {
        self.a == Rational::zero() && self.b == Rational::zero()
    }

    fn separation(&self, other: &Self) -> Separation {
        if self == other {
            Separation::Equal
        } else {
            Separation::Distinct
        }
    }

    /// Solves `(c + d√λ)² = a + b√λ` inside `ℚ(√λ)`.
    fn sqrt(&self) -> Option<Self> {
        if self.b == Rational::zero() {
            return sqrt_in_tower(&self.field, &self.a).ok();
        }
        // c² − λd² = ±√N with N = a² − λb², and c² + λd² = a.
        let n = self.norm().sqrt_exact()?;
        let two = Rational::from(2);
        for c_sq in [&(&self.a + &n) / &two, &(&self.a - &n) / &two] {
            let Some(c) = c_sq.sqrt_exact() else { continue };
            if c == Rational::zero() {
                continue;
            }
            let d = &self.b / &(&two * &c);
            let cand = QuadExt::new(c, d, &self.field);
            if cand.square() == *self {
                return Some(cand);
            }
        }
        None
    }

    fn to_complex(&self, ctx: ApproxCtx) -> Complex {
        let root = Complex::from_rational(&self.field.radicand, ctx)
            .sqrt()
            .expect("complex square roots always exist");
        let a = Complex::from_rational(&self.a, ctx);
        let b = Complex::from_rational(&self.b, ctx);
        a.add(&b.mul(&root))
    }
}

/// Square root of a rational inside `ℚ(√λ)`.
///
/// Succeeds when `x` is a rational square or `λ` times a rational square;
/// otherwise reports [`NotRepresentable`].
pub fn sqrt_in_tower(field: &Arc<QuadField>, x: &Rational) -> Result<QuadExt, NotRepresentable> {
    if let Some(s) = x.sqrt_exact() {
        return Ok(QuadExt::rational(s, field));
    }
    let ratio = x / &field.radicand;
    match ratio.sqrt_exact() {
        Some(d) => Ok(QuadExt::new(Rational::zero(), d, field)),
        None => Err(NotRepresentable),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn field(l: &str) -> Arc<QuadField> {
        QuadField::new(q(l)).unwrap()
    }

    #[test]
    fn norm_identity() {
        let k = field("2");
        let x = QuadExt::new(q("3/2"), q("-5/7"), &k);
        let prod = x.mul(&x.conjugate());
        let expected = &(&q("3/2") * &q("3/2")) - &(&(&q("5/7") * &q("5/7")) * &q("2"));
        assert_eq!(prod, QuadExt::rational(expected, &k));
    }

    #[test]
    fn sqrt_in_tower_cases() {
        let k1 = field("1");
        assert_eq!(sqrt_in_tower(&k1, &q("9/4")).unwrap(), QuadExt::rational(q("3/2"), &k1));
        assert_eq!(sqrt_in_tower(&k1, &q("1")).unwrap(), QuadExt::rational(q("1"), &k1));

        let k2 = field("2");
        let r = sqrt_in_tower(&k2, &q("2")).unwrap();
        assert_eq!(r.a(), &q("0"));
        assert_eq!(r.b(), &q("1"));
        assert_eq!(sqrt_in_tower(&k2, &q("3")), Err(NotRepresentable));
    }

    #[test]
    fn trivial_extension_folds_root() {
        let k = field("9/4");
        let r = QuadExt::sqrt_radicand(&k);
        assert_eq!(r.as_rational(), Some(&q("3/2")));
        assert!(k.is_trivial());
    }

    #[test]
    fn inverse_and_division_by_zero() {
        let k = field("3");
        let x = QuadExt::new(q("1"), q("1"), &k);
        assert_eq!(x.mul(&x.inv().unwrap()), x.one_like());
        assert_eq!(x.zero_like().inv(), Err(ScalarError::DivisionByZero));
    }

    #[test]
    fn sqrt_of_general_element() {
        let k = field("2");
        // (1 + √2)² = 3 + 2√2
        let x = QuadExt::new(q("3"), q("2"), &k);
        let s = x.sqrt().unwrap();
        assert_eq!(s.square(), x);
        // 1 + √2 has norm −1, not a square
        assert!(QuadExt::new(q("1"), q("1"), &k).sqrt().is_none());
    }
}
