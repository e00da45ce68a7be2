use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use nalgebra::DMatrix;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::{Field, Rational, ScalarError, Separation};

const RM: RoundingMode = RoundingMode::ToEven;

/// Relative singular-value threshold used by [`Complex`]'s rank.
pub const RANK_REL_THRESHOLD: f64 = 1e-12;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constants cache"));
}

/// Working precision (mantissa bits) and equality tolerance of approximate
/// arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproxCtx {
    pub bits: usize,
    pub tol: f64,
}

impl ApproxCtx {
    pub const DEFAULT_BITS: usize = 256;
    pub const DEFAULT_TOL: f64 = 1e-30;

    pub fn new(bits: usize, tol: f64) -> Self {
        assert!(tol > 0.0, "tolerance must be positive");
        assert!(bits >= 64, "precision below 64 bits is not supported");
        ApproxCtx { bits, tol }
    }

    /// Doubles the precision and shrinks the tolerance by the same number of
    /// bits, so that the gap between roundoff and `tol` widens.
    pub fn escalated(&self) -> Self {
        let tol = self.tol * 2f64.powi(-(self.bits as i32).min(900));
        ApproxCtx {
            bits: self.bits * 2,
            tol: if tol > 0.0 { tol } else { f64::MIN_POSITIVE },
        }
    }

    fn tol_float(&self) -> BigFloat {
        BigFloat::from_f64(self.tol, self.bits)
    }
}

impl Default for ApproxCtx {
    fn default() -> Self {
        ApproxCtx::new(Self::DEFAULT_BITS, Self::DEFAULT_TOL)
    }
}

/// A complex number with arbitrary-precision real and imaginary parts.
///
/// Equality is approximate: two values compare equal when `|z − w| < tol`.
/// Binary operations run at the precision and tolerance of the left operand.
#[derive(Clone)]
pub struct Complex {
    re: BigFloat,
    im: BigFloat,
    ctx: ApproxCtx,
}

impl Complex {
    pub fn new(re: BigFloat, im: BigFloat, ctx: ApproxCtx) -> Self {
        Complex { re, im, ctx }
    }

    pub fn zero(ctx: ApproxCtx) -> Self {
        Complex::from_f64(0.0, 0.0, ctx)
    }

    pub fn from_f64(re: f64, im: f64, ctx: ApproxCtx) -> Self {
        Complex {
            re: BigFloat::from_f64(re, ctx.bits),
            im: BigFloat::from_f64(im, ctx.bits),
            ctx,
        }
    }

    pub fn from_rational(q: &Rational, ctx: ApproxCtx) -> Self {
        let n = parse_decimal(&q.numer().to_string(), ctx.bits);
        let d = parse_decimal(&q.denom().to_string(), ctx.bits);
        Complex {
            re: n.div(&d, ctx.bits, RM),
            im: BigFloat::from_i64(0, ctx.bits),
            ctx,
        }
    }

    pub fn from_rationals(re: &Rational, im: &Rational, ctx: ApproxCtx) -> Self {
        let r = Complex::from_rational(re, ctx);
        let i = Complex::from_rational(im, ctx);
        Complex {
            re: r.re,
            im: i.re,
            ctx,
        }
    }

    pub fn ctx(&self) -> ApproxCtx {
        self.ctx
    }

    pub fn re(&self) -> &BigFloat {
        &self.re
    }

    pub fn im(&self) -> &BigFloat {
        &self.im
    }

    /// Re-rounds to another context.
    pub fn with_ctx(&self, ctx: ApproxCtx) -> Self {
        let mut re = self.re.clone();
        let mut im = self.im.clone();
        re.set_precision(ctx.bits, RM).ok();
        im.set_precision(ctx.bits, RM).ok();
        Complex { re, im, ctx }
    }

    pub fn norm_sqr(&self) -> BigFloat {
        let p = self.ctx.bits;
        self.re.mul(&self.re, p, RM).add(&self.im.mul(&self.im, p, RM), p, RM)
    }

    pub fn abs(&self) -> BigFloat {
        self.norm_sqr().sqrt(self.ctx.bits, RM)
    }

    pub fn abs_f64(&self) -> f64 {
        float_to_f64(&self.abs())
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (float_to_f64(&self.re), float_to_f64(&self.im))
    }

    pub fn scale_f64(&self, s: f64) -> Self {
        let f = BigFloat::from_f64(s, self.ctx.bits);
        Complex {
            re: self.re.mul(&f, self.ctx.bits, RM),
            im: self.im.mul(&f, self.ctx.bits, RM),
            ctx: self.ctx,
        }
    }

    /// Principal square root (branch cut along the negative real axis).
    pub fn sqrt(&self) -> Option<Self> {
        let p = self.ctx.bits;
        if self.re.is_zero() && self.im.is_zero() {
            return Some(self.clone());
        }
        let two = BigFloat::from_i64(2, p);
        let modulus = self.abs();
        // t = sqrt((|z| + |re|) / 2) avoids cancellation on either half-plane.
        let t = modulus.add(&self.re.abs(), p, RM).div(&two, p, RM).sqrt(p, RM);
        let two_t = t.mul(&two, p, RM);
        let (re, im) = if self.re.is_negative() {
            let im = if self.im.is_negative() { t.neg() } else { t };
            (self.im.abs().div(&two_t, p, RM), im)
        } else {
            (t, self.im.div(&two_t, p, RM))
        };
        Some(Complex { re, im, ctx: self.ctx })
    }

    /// Lexicographic order on (re, im), used only to make enumeration output
    /// deterministic.
    pub fn lex_cmp(&self, other: &Self) -> Ordering {
        cmp_float(&self.re, &other.re).then_with(|| cmp_float(&self.im, &other.im))
    }

    /// Distance as a float at working precision.
    pub fn distance(&self, other: &Self) -> BigFloat {
        Field::sub(self, other).abs()
    }
}

fn cmp_float(a: &BigFloat, b: &BigFloat) -> Ordering {
    match a.cmp(b) {
        Some(c) if c < 0 => Ordering::Less,
        Some(c) if c > 0 => Ordering::Greater,
        _ => Ordering::Equal,
    }
}

fn parse_decimal(s: &str, bits: usize) -> BigFloat {
    CONSTS.with(|c| BigFloat::parse(s, Radix::Dec, bits, RM, &mut c.borrow_mut()))
}

/// Full-precision decimal rendering of a float.
pub(crate) fn float_to_string(x: &BigFloat) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    CONSTS
        .with(|c| x.format(Radix::Dec, RM, &mut c.borrow_mut()))
        .unwrap_or_else(|_| x.to_string())
}

pub(crate) fn float_to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    float_to_string(x).parse().unwrap_or(f64::NAN)
}

impl fmt::Display for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let im = &self.im;
        if im.is_negative() {
            write!(f, "{} - {}i", float_to_string(&self.re), float_to_string(&im.abs()))
        } else {
            write!(f, "{} + {}i", float_to_string(&self.re), float_to_string(im))
        }
    }
}

impl fmt::Debug for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Serialized as `{"re": "...", "im": "..."}` with full-precision decimals.
impl Serialize for Complex {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("Complex", 2)?;
        st.serialize_field("re", &float_to_string(&self.re))?;
        st.serialize_field("im", &float_to_string(&self.im))?;
        st.end()
    }
}

impl FromStr for Complex {
    type Err = ScalarError;

    /// Parses `"re,im"` where each part is a rational `n/d` or a decimal
    /// literal, at the default context.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Complex::parse_with(s, ApproxCtx::default())
    }
}

impl Complex {
    pub fn parse_with(s: &str, ctx: ApproxCtx) -> Result<Self, ScalarError> {
        let bad = || ScalarError::Parse(s.to_string());
        let (re, im) = s.split_once(',').ok_or_else(bad)?;
        let part = |t: &str| -> Result<BigFloat, ScalarError> {
            let t = t.trim();
            if let Ok(q) = t.parse::<Rational>() {
                return Ok(Complex::from_rational(&q, ctx).re);
            }
            let v = parse_decimal(t, ctx.bits);
            if v.is_nan() || t.is_empty() || t.parse::<f64>().is_err() {
                return Err(bad());
            }
            Ok(v)
        };
        Ok(Complex {
            re: part(re)?,
            im: part(im)?,
            ctx,
        })
    }
}

impl Field for Complex {
    const EXACT: bool = false;

    fn zero_like(&self) -> Self {
        Complex::zero(self.ctx)
    }
    fn one_like(&self) -> Self {
        Complex::from_f64(1.0, 0.0, self.ctx)
    }
    fn from_i64_like(&self, n: i64) -> Self {
        Complex {
            re: BigFloat::from_i64(n, self.ctx.bits),
            im: BigFloat::from_i64(0, self.ctx.bits),
            ctx: self.ctx,
        }
    }
    fn from_rational_like(&self, q: &Rational) -> Self {
        Complex::from_rational(q, self.ctx)
    }

    fn add(&self, other: &Self) -> Self {
        let p = self.ctx.bits;
        Complex {
            re: self.re.add(&other.re, p, RM),
            im: self.im.add(&other.im, p, RM),
            ctx: self.ctx,
        }
    }

    fn sub(&self, other: &Self) -> Self {
        let p = self.ctx.bits;
        Complex {
            re: self.re.sub(&other.re, p, RM),
            im: self.im.sub(&other.im, p, RM),
            ctx: self.ctx,
        }
    }

    fn mul(&self, other: &Self) -> Self {
        let p = self.ctx.bits;
        let re = self.re.mul(&other.re, p, RM).sub(&self.im.mul(&other.im, p, RM), p, RM);
        let im = self.re.mul(&other.im, p, RM).add(&self.im.mul(&other.re, p, RM), p, RM);
        Complex { re, im, ctx: self.ctx }
    }

    fn neg(&self) -> Self {
        Complex {
            re: self.re.neg(),
            im: self.im.neg(),
            ctx: self.ctx,
        }
    }

    fn inv(&self) -> Result<Self, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        let p = self.ctx.bits;
        let n = self.norm_sqr();
        Ok(Complex {
            re: self.re.div(&n, p, RM),
            im: self.im.neg().div(&n, p, RM),
            ctx: self.ctx,
        })
    }

    fn is_zero(&self) -> bool {
        let t = self.ctx.tol_float();
        cmp_float(&self.abs(), &t) == Ordering::Less
    }

    fn separation(&self, other: &Self) -> Separation {
        let d = self.distance(other);
        let t = self.ctx.tol_float();
        if cmp_float(&d, &t) == Ordering::Less {
            return Separation::Equal;
        }
        let two_t = t.mul(&BigFloat::from_i64(2, self.ctx.bits), self.ctx.bits, RM);
        if cmp_float(&d, &two_t) == Ordering::Less {
            Separation::Ambiguous
        } else {
            Separation::Distinct
        }
    }

    fn sqrt(&self) -> Option<Self> {
        Complex::sqrt(self)
    }

    fn to_complex(&self, ctx: ApproxCtx) -> Complex {
        self.with_ctx(ctx)
    }

    /// Counts singular values above [`RANK_REL_THRESHOLD`] times the largest.
    fn matrix_rank(rows: &[Vec<Self>]) -> usize {
        complex_rank(rows, RANK_REL_THRESHOLD)
    }
}

/// Numerical rank via singular values with a relative threshold.
pub fn complex_rank(rows: &[Vec<Complex>], rel_threshold: f64) -> usize {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 {
        return 0;
    }
    let m = DMatrix::from_fn(nrows, ncols, |i, j| {
        let (re, im) = rows[i][j].to_f64_pair();
        num_complex::Complex::new(re, im)
    });
    let sv = m.singular_values();
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_threshold * max).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> ApproxCtx {
        ApproxCtx::default()
    }

    #[test]
    fn principal_sqrt_on_all_quadrants() {
        for (re, im) in [(4.0, 0.0), (-4.0, 0.0), (0.0, 2.0), (-3.0, -4.0), (3.0, -4.0), (-1.0, 1e-40)] {
            let z = Complex::from_f64(re, im, ctx());
            let s = z.sqrt().unwrap();
            assert!(s.square().approx_eq(&z), "sqrt({re},{im}) = {s}");
            let (sr, _) = s.to_f64_pair();
            assert!(sr >= 0.0);
        }
        let s = Complex::from_f64(-4.0, 0.0, ctx()).sqrt().unwrap();
        assert!(s.approx_eq(&Complex::from_f64(0.0, 2.0, ctx())));
    }

    #[test]
    fn rational_inputs_reproduce_exact_results() {
        let c = ctx();
        let a: Rational = "1/3".parse().unwrap();
        let b: Rational = "-7/11".parse().unwrap();
        let exact = &(&a * &b) + &a;
        let approx = Complex::from_rational(&a, c)
            .mul(&Complex::from_rational(&b, c))
            .add(&Complex::from_rational(&a, c));
        let err = approx.distance(&Complex::from_rational(&exact, c));
        let bound = BigFloat::from_f64(2f64.powi(-(c.bits as i32) + 8), c.bits);
        assert_eq!(cmp_float(&err, &bound), Ordering::Less);
    }

    #[test]
    fn separation_bands() {
        let c = ApproxCtx::new(128, 1e-10);
        let z = Complex::from_f64(1.0, 0.0, c);
        assert_eq!(z.separation(&Complex::from_f64(1.0 + 5e-11, 0.0, c)), Separation::Equal);
        assert_eq!(z.separation(&Complex::from_f64(1.0 + 1.5e-10, 0.0, c)), Separation::Ambiguous);
        assert_eq!(z.separation(&Complex::from_f64(1.0 + 3e-10, 0.0, c)), Separation::Distinct);
    }

    #[test]
    fn inverse_of_near_zero_fails() {
        assert_eq!(Complex::from_f64(1e-40, 0.0, ctx()).inv().unwrap_err(), ScalarError::DivisionByZero);
        let z = Complex::from_f64(0.5, -0.25, ctx());
        assert!(z.mul(&z.inv().unwrap()).approx_eq(&z.one_like()));
    }

    #[test]
    fn parse_forms() {
        let z: Complex = "0.5,0.25".parse().unwrap();
        assert!(z.approx_eq(&Complex::from_f64(0.5, 0.25, ctx())));
        let w: Complex = "1/3,-2".parse().unwrap();
        assert!(w.approx_eq(&Complex::from_rationals(&"1/3".parse().unwrap(), &"-2".parse().unwrap(), ctx())));
        assert!("1.0".parse::<Complex>().is_err());
        assert!("a,b".parse::<Complex>().is_err());
    }

    #[test]
    fn rank_threshold() {
        let c = ctx();
        let one = Complex::from_f64(1.0, 0.0, c);
        let zero = Complex::zero(c);
        let rows = vec![vec![one.clone(), one.clone()], vec![one.clone(), one.clone()]];
        assert_eq!(Complex::matrix_rank(&rows), 1);
        let rows = vec![vec![one.clone(), zero.clone()], vec![zero, one]];
        assert_eq!(Complex::matrix_rank(&rows), 2);
    }

    #[test]
    fn escalation_doubles_bits_and_tightens_tol() {
        let e = ctx().escalated();
        assert_eq!(e.bits, 512);
        assert!(e.tol < 1e-100);
    }
}
