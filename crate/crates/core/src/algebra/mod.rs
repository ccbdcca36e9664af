//! Exact polynomial algebra over the rationals and plane-curve resolution.

pub mod conic;
pub mod curve;
pub mod gcd;
pub mod poly;
pub mod roots;
pub mod surd;
pub mod univariate;

use thiserror::Error;

pub use conic::{derive_conic_parametrization, ConicParametrization};
pub use curve::{
    blowup_strict_transform, genus, genus_of_curve, homogenize, iterate_critical, local_equation,
    multiplicity, resolve, singular_points_rational, tangent_cone_directions, CriticalQuotient,
    Direction, GenusReport, ProjectivePoint, RationalFunction, ResolutionReport, SingularSearch,
    TangentDirection,
};
pub use poly::{vars, MultiPoly, Rational, Vars};
pub use surd::QuadSurd;
pub use univariate::UniPoly;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("period {n} exceeds the symbolic budget (max {max})")]
    BudgetExceeded { n: u32, max: u32 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("requested degree {requested} is below the polynomial degree {degree}")]
    DegreeTooLow { requested: u32, degree: u32 },
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("point {point} has zero {chart}-coordinate")]
    PointNotOnChart { point: String, chart: String },
    #[error("point {0} is not on the curve")]
    PointNotOnCurve(String),
    #[error("strict transform division left a remainder")]
    InexactDivision,
    #[error("tangent direction is irrational (root of {0}); recentering needs a field extension")]
    NeedsExtension(String),
    #[error("base point is not on the conic")]
    BaseNotOnCurve,
    #[error("singular-point search incomplete: {0}")]
    IncompleteSearch(String),
    #[error("genus formula gave {0}: curve is reducible or a singularity was missed")]
    NegativeGenus(i64),
}
