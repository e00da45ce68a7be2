//! Exact symbolic scalars: polynomial fractions over ℚ in a fixed set of
//! formal symbols, kept in a canonical form so that identities are decided by
//! structural equality.
//!
//! Polynomials are sparse maps from exponent vectors to rational coefficients.
//! Fractions are reduced by a multivariate gcd (recursive primitive
//! pseudo-remainder sequences) and scaled so that the denominator's leading
//! coefficient is one. Two [`SymbolicScalar`]s are equal as rational functions
//! iff their canonical forms are identical.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Serialize, Serializer};

use super::{Rational, ScalarError};

/// Number of formal symbols.
pub const NVARS: usize = 9;

/// The formal symbols a [`SymbolicScalar`] may contain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Symbol {
    /// Genus of the base curve of the fibration.
    Gamma,
    /// Number of sections (equivalently, of marked points).
    R,
    /// Degree of the unramified cover of the configuration curve.
    DegZeta,
    /// Genus of the fibre.
    G,
    /// The curve parameter.
    Lambda,
    /// Common self-intersection of the sections `R_j²`.
    SectionSquare,
    /// `R_j · g⁻¹(D₁)`.
    X1,
    /// `R_j · g⁻¹(D₂)`.
    X2,
    /// `|g⁻¹(s) ∩ R_j|` for a single point `s` of `D₁`.
    PointCount,
}

impl Symbol {
    pub const ALL: [Symbol; NVARS] = [
        Symbol::Gamma,
        Symbol::R,
        Symbol::DegZeta,
        Symbol::G,
        Symbol::Lambda,
        Symbol::SectionSquare,
        Symbol::X1,
        Symbol::X2,
        Symbol::PointCount,
    ];

    fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Symbol::Gamma => "gamma",
            Symbol::R => "r",
            Symbol::DegZeta => "deg_zeta",
            Symbol::G => "g",
            Symbol::Lambda => "lambda",
            Symbol::SectionSquare => "Rsq",
            Symbol::X1 => "x1",
            Symbol::X2 => "x2",
            Symbol::PointCount => "N",
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Exponent vector, ordered lexicographically with `Gamma` most significant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial([u32; NVARS]);

impl Monomial {
    fn of(sym: Symbol, e: u32) -> Self {
        let mut m = [0; NVARS];
        m[sym.index()] = e;
        Monomial(m)
    }

    fn mul(&self, other: &Self) -> Self {
        let mut m = self.0;
        for (a, b) in m.iter_mut().zip(other.0) {
            *a += b;
        }
        Monomial(m)
    }

    fn div(&self, other: &Self) -> Option<Self> {
        let mut m = self.0;
        for (a, b) in m.iter_mut().zip(other.0) {
            *a = a.checked_sub(b)?;
        }
        Some(Monomial(m))
    }

    fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }
}

/// A polynomial in the formal symbols with rational coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        let mut p = Poly::zero();
        p.add_term(Monomial::default(), c);
        p
    }

    pub fn int(n: i64) -> Self {
        Poly::constant(Rational::from(n))
    }

    pub fn var(sym: Symbol) -> Self {
        let mut p = Poly::zero();
        p.add_term(Monomial::of(sym, 1), Rational::one());
        p
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c == Rational::zero() {
            return;
        }
        let entry = self.terms.entry(m).or_insert_with(Rational::zero);
        *entry = &*entry + &c;
        if *entry == Rational::zero() {
            self.terms.remove(&m);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut p = self.clone();
        for (m, c) in &other.terms {
            p.add_term(*m, c.clone());
        }
        p
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
        }
    }

    pub fn scale(&self, k: &Rational) -> Poly {
        if *k == Rational::zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, c)| (*m, c * k)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut p = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                p.add_term(m1.mul(m2), c1 * c2);
            }
        }
        p
    }

    pub fn pow(&self, mut e: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Leading term in lex order.
    fn leading(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coefficient(&self) -> Rational {
        self.leading().map_or_else(Rational::zero, |(_, c)| c.clone())
    }

    /// Scales so that the leading coefficient is one.
    pub fn monic(&self) -> Poly {
        match self.leading() {
            None => Poly::zero(),
            Some((_, c)) => self.scale(&c.recip().expect("nonzero leading coefficient")),
        }
    }

    pub fn degree_in(&self, sym: Symbol) -> u32 {
        self.terms.keys().map(|m| m.0[sym.index()]).max().unwrap_or(0)
    }

    pub fn contains(&self, sym: Symbol) -> bool {
        self.degree_in(sym) > 0
    }

    pub fn symbols(&self) -> Vec<Symbol> {
        Symbol::ALL.into_iter().filter(|&s| self.contains(s)).collect()
    }

    fn main_symbol(&self) -> Option<Symbol> {
        Symbol::ALL.into_iter().rev().find(|&s| self.contains(s))
    }

    /// Coefficient of `sym^k`, as a polynomial free of `sym`.
    pub fn coeff_in(&self, sym: Symbol, k: u32) -> Poly {
        let i = sym.index();
        let mut p = Poly::zero();
        for (m, c) in &self.terms {
            if m.0[i] == k {
                let mut mm = *m;
                mm.0[i] = 0;
                p.add_term(mm, c.clone());
            }
        }
        p
    }

    fn mul_var_pow(&self, sym: Symbol, k: u32) -> Poly {
        let shift = Monomial::of(sym, k);
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.mul(&shift), c.clone())).collect(),
        }
    }

    pub fn derivative(&self, sym: Symbol) -> Poly {
        let i = sym.index();
        let mut p = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e > 0 {
                let mut mm = *m;
                mm.0[i] = e - 1;
                p.add_term(mm, c * &Rational::from(e as i64));
            }
        }
        p
    }

    /// Evaluates with the given symbol values; `None` if a symbol present in
    /// the polynomial has no value.
    pub fn eval(&self, values: &BTreeMap<Symbol, Rational>) -> Option<Rational> {
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for s in Symbol::ALL {
                let e = m.0[s.index()];
                if e > 0 {
                    t = &t * &values.get(&s)?.pow(e as i32);
                }
            }
            acc = &acc + &t;
        }
        Some(acc)
    }

    /// Exact quotient by `d`, or `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        let (lm_d, lc_d) = d.leading()?;
        let lc_d_inv = lc_d.recip().ok()?;
        let mut rem = self.clone();
        let mut q = Poly::zero();
        while let Some((lm, lc)) = rem.leading() {
            let m = lm.div(lm_d)?;
            let c = lc * &lc_d_inv;
            let mut t = Poly::zero();
            t.add_term(m, c);
            rem = rem.sub(&t.mul(d));
            q = q.add(&t);
        }
        Some(q)
    }

    /// Pseudo-remainder of `self` by `g` with respect to `sym`.
    fn prem(&self, g: &Poly, sym: Symbol) -> Poly {
        let dg = g.degree_in(sym);
        let lc_g = g.coeff_in(sym, dg);
        let mut r = self.clone();
        while !r.is_zero() && r.degree_in(sym) >= dg {
            let dr = r.degree_in(sym);
            let lc_r = r.coeff_in(sym, dr);
            r = r.mul(&lc_g).sub(&lc_r.mul(&g.mul_var_pow(sym, dr - dg)));
        }
        r
    }

    /// Gcd of the coefficients of `self` viewed as a polynomial in `sym`.
    fn content_in(&self, sym: Symbol) -> Poly {
        (0..=self.degree_in(sym))
            .map(|k| self.coeff_in(sym, k))
            .filter(|c| !c.is_zero())
            .fold(Poly::zero(), |acc, c| Poly::gcd(&acc, &c))
    }

    fn primitive_part(&self, sym: Symbol) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let c = self.content_in(sym);
        self.div_exact(&c).expect("content divides").monic()
    }

    /// Monic greatest common divisor over ℚ.
    pub fn gcd(a: &Poly, b: &Poly) -> Poly {
        if a.is_zero() {
            return b.monic();
        }
        if b.is_zero() {
            return a.monic();
        }
        if a.is_constant() || b.is_constant() {
            return Poly::one();
        }
        let v = a.main_symbol().max(b.main_symbol()).expect("non-constant");
        if !a.contains(v) {
            return Poly::gcd(a, &b.content_in(v));
        }
        if !b.contains(v) {
            return Poly::gcd(&a.content_in(v), b);
        }
        let ca = a.content_in(v);
        let cb = b.content_in(v);
        let c = Poly::gcd(&ca, &cb);
        let pa = a.div_exact(&ca).expect("content divides");
        let pb = b.div_exact(&cb).expect("content divides");
        let (mut f, mut g) = if pa.degree_in(v) >= pb.degree_in(v) {
            (pa, pb)
        } else {
            (pb, pa)
        };
        while !g.is_zero() {
            let r = f.prem(&g, v);
            f = g;
            g = r.primitive_part(v);
        }
        f.primitive_part(v).mul(&c).monic()
    }

    fn fmt_terms(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|(a, _), (b, _)| b.total_degree().cmp(&a.total_degree()).then(b.cmp(a)));
        for (k, (m, c)) in terms.into_iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if k == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            let coeff = if abs.is_integer() {
                abs.numer().to_string()
            } else {
                format!("{}/{}", abs.numer(), abs.denom())
            };
            let vars: Vec<String> = Symbol::ALL
                .iter()
                .filter_map(|&s| match m.0[s.index()] {
                    0 => None,
                    1 => Some(s.name().to_string()),
                    e => Some(format!("{}^{}", s.name(), e)),
                })
                .collect();
            if vars.is_empty() {
                f.write_str(&coeff)?;
            } else {
                if abs != Rational::one() {
                    write!(f, "{coeff}*")?;
                }
                f.write_str(&vars.join("*"))?;
            }
        }
        Ok(())
    }

    fn term_count(&self) -> usize {
        self.terms.len()
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_terms(f)
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_terms(f)
    }
}

/// A canonical rational function in the formal symbols.
///
/// Invariants: numerator and denominator are coprime, the denominator's
/// leading coefficient is one, and zero is stored as `0/1`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SymbolicScalar {
    num: Poly,
    den: Poly,
}

impl SymbolicScalar {
    pub fn new(num: Poly, den: Poly) -> Result<Self, ScalarError> {
        if den.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(SymbolicScalar { num, den }.canonical())
    }

    fn canonical(self) -> Self {
        if self.num.is_zero() {
            return SymbolicScalar {
                num: Poly::zero(),
                den: Poly::one(),
            };
        }
        let g = Poly::gcd(&self.num, &self.den);
        let num = self.num.div_exact(&g).expect("gcd divides numerator");
        let den = self.den.div_exact(&g).expect("gcd divides denominator");
        let lc = den.leading_coefficient().recip().expect("nonzero denominator");
        SymbolicScalar {
            num: num.scale(&lc),
            den: den.scale(&lc),
        }
    }

    /// Re-canonicalizes; a no-op on values built through the public API.
    pub fn normalized(&self) -> Self {
        self.clone().canonical()
    }

    pub fn zero() -> Self {
        SymbolicScalar::from_poly(Poly::zero())
    }

    pub fn one() -> Self {
        SymbolicScalar::from_poly(Poly::one())
    }

    pub fn int(n: i64) -> Self {
        SymbolicScalar::from_poly(Poly::int(n))
    }

    pub fn rational(q: Rational) -> Self {
        SymbolicScalar::from_poly(Poly::constant(q))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        SymbolicScalar::rational(Rational::new(n, d).expect("nonzero denominator"))
    }

    pub fn symbol(s: Symbol) -> Self {
        SymbolicScalar::from_poly(Poly::var(s))
    }

    pub fn from_poly(p: Poly) -> Self {
        SymbolicScalar {
            num: p,
            den: Poly::one(),
        }
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant()
    }

    pub fn as_rational(&self) -> Option<Rational> {
        let n = self.num.as_constant()?;
        let d = self.den.as_constant()?;
        Some(&n / &d)
    }

    pub fn contains(&self, s: Symbol) -> bool {
        self.num.contains(s) || self.den.contains(s)
    }

    pub fn symbols(&self) -> Vec<Symbol> {
        Symbol::ALL.into_iter().filter(|&s| self.contains(s)).collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.den == other.den {
            return SymbolicScalar {
                num: self.num.add(&other.num),
                den: self.den.clone(),
            }
            .canonical();
        }
        SymbolicScalar {
            num: self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            den: self.den.mul(&other.den),
        }
        .canonical()
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        SymbolicScalar {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        SymbolicScalar {
            num: self.num.mul(&other.num),
            den: self.den.mul(&other.den),
        }
        .canonical()
    }

    pub fn inv(&self) -> Result<Self, ScalarError> {
        SymbolicScalar::new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, other: &Self) -> Result<Self, ScalarError> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn scale(&self, k: &Rational) -> Self {
        self.mul(&SymbolicScalar::rational(k.clone()))
    }

    pub fn derivative(&self, s: Symbol) -> Self {
        let num = self
            .num
            .derivative(s)
            .mul(&self.den)
            .sub(&self.num.mul(&self.den.derivative(s)));
        SymbolicScalar {
            num,
            den: self.den.mul(&self.den),
        }
        .canonical()
    }

    /// Replaces every occurrence of `s` by `value`.
    pub fn substitute(&self, s: Symbol, value: &SymbolicScalar) -> Result<Self, ScalarError> {
        let n = substitute_poly(&self.num, s, value);
        let d = substitute_poly(&self.den, s, value);
        n.div(&d)
    }

    pub fn eval(&self, values: &BTreeMap<Symbol, Rational>) -> Option<Result<Rational, ScalarError>> {
        let n = self.num.eval(values)?;
        let d = self.den.eval(values)?;
        Some(if d == Rational::zero() {
            Err(ScalarError::DivisionByZero)
        } else {
            Ok(&n / &d)
        })
    }

    /// Number of stored terms, a rough size measure.
    pub fn size(&self) -> usize {
        self.num.term_count() + self.den.term_count()
    }
}

fn substitute_poly(p: &Poly, s: Symbol, value: &SymbolicScalar) -> SymbolicScalar {
    let deg = p.degree_in(s);
    let mut acc = SymbolicScalar::zero();
    // Horner in `s` with polynomial coefficients free of `s`.
    for k in (0..=deg).rev() {
        let c = SymbolicScalar::from_poly(p.coeff_in(s, k));
        acc = acc.mul(value).add(&c);
    }
    acc
}

impl From<Poly> for SymbolicScalar {
    fn from(p: Poly) -> Self {
        SymbolicScalar::from_poly(p)
    }
}

impl fmt::Display for SymbolicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == Poly::one() {
            return write!(f, "{}", self.num);
        }
        let wrap = |p: &Poly| {
            if p.term_count() > 1 {
                format!("({p})")
            } else {
                p.to_string()
            }
        };
        write!(f, "{}/{}", wrap(&self.num), wrap(&self.den))
    }
}

impl fmt::Debug for SymbolicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for SymbolicScalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}
