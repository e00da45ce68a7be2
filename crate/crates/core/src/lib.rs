//! Explicit Kodaira fibrations from a genus-two double cover of an elliptic
//! curve.
//!
//! For a parameter `λ ∉ {0, −27/4}` the crate builds the elliptic curve
//! `E_λ : y² = x³ + λx + λ`, the genus-two curve `X_λ : y² = x⁶ + λx² + λ`
//! with its double cover `π(x, y) = (x², y)`, and the configuration curves
//! `C_{λ,r} ⊂ X_λ^r` cut out by `π(p_i) = π(p₁) ⊕ e_i`. On top of these it
//! verifies the computable facts about the resulting fibred surfaces:
//!
//! * smoothness of `C_{λ,r}` (Jacobian rank), its branch points over
//!   `C_{λ,r−1}` and its genus `r·2^(r−1) + 1`,
//! * the intersection-theoretic derivation of `K²` from the canonical
//!   sections `W_k`, re-derived symbolically rather than transcribed,
//! * the Euler number, signature and slope `2 + 3/(2(4 + r))`.
//!
//! See the book under `book/` for a guided tour.

pub mod config_curve;
pub mod elliptic;
pub mod error;
pub mod generic_points;
pub mod genus2;
pub mod intersection;
pub mod invariants;
pub mod scalar;
pub mod verifier;

/// Version tag written into every JSON document produced by the crate.
pub const SCHEMA_VERSION: &str = "1";

pub use config_curve::{ConfigCurve, ConfigTuple, JacobianMatrix, TowerReport};
pub use error::{Error, Result};
pub use elliptic::{EllipticCurve, EllipticPoint, JInvariant};
pub use generic_points::{GenericityCertificate, SearchStrategy};
pub use genus2::{GenusTwoCurve, GenusTwoPoint};
pub use intersection::{BasisClass, DivisorExpr, IntersectionTable};
pub use invariants::InvariantReport;
pub use scalar::{ApproxCtx, Complex, Field, QuadExt, QuadField, Rational, Symbol, SymbolicScalar};
pub use verifier::VerificationRun;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/scalars.md")]
    mod scalars {}
    #[doc = include_str!("../../../book/src/curves.md")]
    mod curves {}
    #[doc = include_str!("../../../book/src/generic-points.md")]
    mod generic_points {}
    #[doc = include_str!("../../../book/src/configuration-curve.md")]
    mod configuration_curve {}
    #[doc = include_str!("../../../book/src/intersection.md")]
    mod intersection {}
    #[doc = include_str!("../../../book/src/invariants.md")]
    mod invariants {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
}
