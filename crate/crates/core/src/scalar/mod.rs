//! Scalar arithmetic underlying every curve computation.
//!
//! Three concrete kinds implement [`Field`]:
//!
//! * [`Rational`]: exact arbitrary-precision rationals,
//! * [`QuadExt`]: exact elements `a + b·√λ` of the quadratic extension `ℚ(√λ)`,
//! * [`Complex`]: arbitrary-precision complex approximations with a
//!   tolerance-based notion of equality.
//!
//! The symbolic layer ([`SymbolicScalar`]) is not a [`Field`] instance; it
//! carries polynomial fractions in a fixed set of formal symbols and is used by
//! the intersection engine and the invariant calculator.

mod complex;
mod quad;
mod rational;
pub mod symbolic;

use std::fmt;

pub use complex::{ApproxCtx, Complex};
pub use quad::{sqrt_in_tower, QuadExt, QuadField};
pub use rational::Rational;
pub use symbolic::{Poly, Symbol, SymbolicScalar};

use thiserror::Error;

/// Failures of scalar arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands live in different quadratic extensions")]
    ExtensionMismatch,
    #[error("cannot parse scalar from {0:?}")]
    Parse(String),
}

/// A square root that does not exist in the requested exact field.
///
/// This is an ordinary outcome: callers fall back to [`Complex`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("square root not representable in the exact scalar tower")]
pub struct NotRepresentable;

/// Outcome of comparing two values.
///
/// Exact scalars only ever produce `Equal` or `Distinct`. Approximate scalars
/// report `Ambiguous` when the distance falls inside the band `[tol, 2·tol)`,
/// where neither verdict is safe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Separation {
    Equal,
    Distinct,
    Ambiguous,
}

impl Separation {
    /// Combines per-coordinate verdicts for a composite value: distinct as
    /// soon as one coordinate is distinct, equal only if all are equal.
    pub fn combine(self, other: Separation) -> Separation {
        use Separation::*;
        match (self, other) {
            (Distinct, _) | (_, Distinct) => Distinct,
            (Ambiguous, _) | (_, Ambiguous) => Ambiguous,
            (Equal, Equal) => Equal,
        }
    }
}

/// Field operations shared by the exact and approximate scalar kinds.
///
/// Constructors take `&self` so that values carrying context (the radicand of
/// a quadratic extension, the precision of an approximation) can build
/// constants in the same context.
pub trait Field: Clone + fmt::Debug + fmt::Display + Send + Sync {
    /// `true` for kinds whose equality is decided exactly.
    const EXACT: bool;

    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    #[allow(clippy::wrong_self_convention)]
    fn from_i64_like(&self, n: i64) -> Self;
    #[allow(clippy::wrong_self_convention)]
    fn from_rational_like(&self, q: &Rational) -> Self;

    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn inv(&self) -> Result<Self, ScalarError>;

    fn div(&self, other: &Self) -> Result<Self, ScalarError> {
        Ok(self.mul(&other.inv()?))
    }

    fn square(&self) -> Self {
        self.mul(self)
    }

    /// Exact zero test, or `|z| < tol` for approximations.
    fn is_zero(&self) -> bool;

    fn separation(&self, other: &Self) -> Separation;

    fn approx_eq(&self, other: &Self) -> bool {
        self.separation(other) == Separation::Equal
    }

    /// A square root inside the same field, if one exists there.
    fn sqrt(&self) -> Option<Self>;

    /// Embeds the value into the complex approximations.
    fn to_complex(&self, ctx: ApproxCtx) -> Complex;

    /// Rank of a dense matrix. Exact kinds use fraction-free elimination;
    /// approximations override this with a singular-value threshold.
    fn matrix_rank(rows: &[Vec<Self>]) -> usize {
        gaussian_rank(rows)
    }
}

/// Rank by Gaussian elimination using the field's own zero test.
pub(crate) fn gaussian_rank<F: Field>(rows: &[Vec<F>]) -> usize {
    let mut m: Vec<Vec<F>> = rows.to_vec();
    let ncols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot) = (rank..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pivot);
        let inv = m[rank][col].inv().expect("pivot is nonzero");
        for i in 0..m.len() {
            if i == rank || m[i][col].is_zero() {
                continue;
            }
            let factor = m[i][col].mul(&inv);
            #[allow(clippy::needless_range_loop)]
            for c in col..ncols {
                let t = factor.mul(&m[rank][c]);
                m[i][c] = m[i][c].sub(&t);
            }
        }
        rank += 1;
    }
    rank
}

/// Square-and-multiply power with a nonnegative exponent.
pub fn pow<F: Field>(x: &F, mut e: u32) -> F {
    let mut base = x.clone();
    let mut acc = x.one_like();
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.mul(&base);
        }
        base = base.square();
        e >>= 1;
    }
    acc
}
