//! One-parameter families covering V1 through V4, and the pixel grid that
//! feeds them screen parameters.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::conic::{derive_conic_parametrization, ConicParametrization};
use crate::algebra::curve::iterate_critical;
use crate::algebra::poly::{rat, ratio, rational_to_f64};
use crate::algebra::QuadSurd;
use crate::sphere::{DynamicsError, QuadMap};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    V1,
    V2,
    V3,
    /// V4 projected from `(-1, 0)` along the lines `c = t (b + 1)`.
    V4A,
    /// V4 projected from `(0, c0)`, `c0 = (-3 + sqrt 5)/2`, along `c = c0 + t b`.
    V4B,
}

pub const ALL_FAMILIES: [Family; 5] = [Family::V1, Family::V2, Family::V3, Family::V4A, Family::V4B];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FamilyParseError {
    #[error("no parametrization: genus 1")]
    GenusOne,
    #[error("unknown family {0:?} (expected v1, v2, v3, v4a or v4b)")]
    Unknown(String),
}

impl FromStr for Family {
    type Err = FamilyParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "v1" => Ok(Family::V1),
            "v2" => Ok(Family::V2),
            "v3" => Ok(Family::V3),
            "v4a" => Ok(Family::V4A),
            "v4b" => Ok(Family::V4B),
            "v5" => Err(FamilyParseError::GenusOne),
            _ => Err(FamilyParseError::Unknown(s.to_string())),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    /// `a = 0` in V2.
    ZeroA,
    /// `c = 0`: the map drops degree.
    ZeroC,
    /// The line through the base point meets the conic only there.
    Pole,
    /// The parameter or the resulting coefficients are not finite.
    NonFinite,
}

impl fmt::Display for ExclusionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExclusionReason::ZeroA => "a = 0 degenerates the map",
            ExclusionReason::ZeroC => "c = 0 degenerates the map",
            ExclusionReason::Pole => "pole of the parametrization",
            ExclusionReason::NonFinite => "non-finite coefficients",
        })
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq)]
#[error("{family} parameter t = {t} is excluded: {reason}")]
pub struct ExcludedParameter {
    pub family: Family,
    pub t: Complex64,
    pub reason: ExclusionReason,
}

/// Floating-point form of a conic projection `(b0 + s, c0 + t s)`,
/// `s = -(l0 + l1 t)/(q0 + q1 t + q2 t^2)`.
#[derive(Clone, Debug)]
pub struct Projection {
    pub exact: ConicParametrization,
    base: (f64, f64),
    l: [f64; 2],
    q: [f64; 3],
}

impl Projection {
    fn new(exact: ConicParametrization) -> Self {
        let base = exact.base_f64();
        let l = [exact.linear()[0].to_f64(), exact.linear()[1].to_f64()];
        let pq = exact.pole_polynomial();
        let q = [rational_to_f64(&pq[0]), rational_to_f64(&pq[1]), rational_to_f64(&pq[2])];
        Projection { exact, base, l, q }
    }

    /// `(b(t), c(t))`, or `None` at a pole.
    pub fn eval(&self, t: Complex64) -> Option<(Complex64, Complex64)> {
        let q = self.q[0] + t * (self.q[1] + t * self.q[2]);
        if q.re == 0.0 && q.im == 0.0 {
            return None;
        }
        let s = -(self.l[0] + self.l[1] * t) / q;
        Some((self.base.0 + s, self.base.1 + t * s))
    }
}

fn p4_projection(base: (QuadSurd, QuadSurd)) -> Projection {
    let p4 = iterate_critical(4).expect("period 4 is within budget").p;
    let exact = derive_conic_parametrization(&p4, base).expect("base point lies on P4");
    debug_assert!(exact.verify_identity(&p4));
    Projection::new(exact)
}

/// Projection of V4 from `(-1, 0)`.
pub fn projection_a() -> &'static Projection {
    static CELL: OnceLock<Projection> = OnceLock::new();
    CELL.get_or_init(|| {
        p4_projection((QuadSurd::from_rational(rat(-1), 5), QuadSurd::from_rational(rat(0), 5)))
    })
}

/// Projection of V4 from `(0, (-3 + sqrt 5)/2)`.
pub fn projection_b() -> &'static Projection {
    static CELL: OnceLock<Projection> = OnceLock::new();
    CELL.get_or_init(|| {
        p4_projection((
            QuadSurd::from_rational(rat(0), 5),
            QuadSurd::new(ratio(-3, 2), ratio(1, 2), 5),
        ))
    })
}

impl Family {
    pub fn tag(&self) -> &'static str {
        match self {
            Family::V1 => "v1",
            Family::V2 => "v2",
            Family::V3 => "v3",
            Family::V4A => "v4a",
            Family::V4B => "v4b",
        }
    }

    /// Length of the critical cycle.
    pub fn period(&self) -> usize {
        match self {
            Family::V1 => 1,
            Family::V2 => 2,
            Family::V3 => 3,
            Family::V4A | Family::V4B => 4,
        }
    }

    pub fn parameter_meaning(&self) -> &'static str {
        match self {
            Family::V1 => "c in z^2 + c",
            Family::V2 => "a in a/(z^2 + 2z)",
            Family::V3 => "c in 1 + (-1-c)/z + c/z^2",
            Family::V4A => "slope t of the line c = t(b + 1) through (-1, 0) on P4 = 0",
            Family::V4B => "slope t of the line c = c0 + t b through (0, c0), c0 = (-3 + sqrt 5)/2, on P4 = 0",
        }
    }

    pub fn excluded_values(&self) -> &'static str {
        match self {
            Family::V1 => "none",
            Family::V2 => "a = 0",
            Family::V3 => "c = 0",
            Family::V4A => "t = 0 (c = 0), t = -1 and t = -2 (poles)",
            Family::V4B => "roots of 2 + 3t + t^2 (poles) and t with c(t) = 0",
        }
    }

    pub fn projection(&self) -> Option<&'static Projection> {
        match self {
            Family::V4A => Some(projection_a()),
            Family::V4B => Some(projection_b()),
            _ => None,
        }
    }

    /// The map at screen parameter `t`.
    pub fn map_for(&self, t: Complex64) -> Result<QuadMap, ExcludedParameter> {
        let excluded = |reason| ExcludedParameter { family: *self, t, reason };
        if !(t.re.is_finite() && t.im.is_finite()) {
            return Err(excluded(ExclusionReason::NonFinite));
        }
        let built = match self {
            Family::V1 => QuadMap::v1(t),
            Family::V2 => QuadMap::v2(t),
            Family::V3 => QuadMap::vbc(-1.0 - t, t),
            Family::V4A | Family::V4B => {
                let proj = self.projection().expect("V4 families have a projection");
                let (b, c) = proj.eval(t).ok_or_else(|| excluded(ExclusionReason::Pole))?;
                QuadMap::vbc(b, c)
            }
        };
        built.map_err(|e| {
            excluded(match e {
                DynamicsError::ZeroA => ExclusionReason::ZeroA,
                DynamicsError::ZeroC => ExclusionReason::ZeroC,
                _ => ExclusionReason::NonFinite,
            })
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WindowError {
    #[error("window needs at least one pixel in each direction")]
    Empty,
    #[error("half-width must be positive and finite, got {0}")]
    BadHalfWidth(f64),
    #[error("center must be finite")]
    BadCenter,
    #[error("pixel ({i}, {j}) outside {w}x{h}")]
    OutOfRange { i: u32, j: u32, w: u32, h: u32 },
}

/// A rectangle of the parameter plane sampled at pixel centers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamWindow {
    pub center: Complex64,
    pub half_width: f64,
    pub pixels_x: u32,
    pub pixels_y: u32,
}

impl ParamWindow {
    pub fn new(
        center: Complex64,
        half_width: f64,
        pixels_x: u32,
        pixels_y: u32,
    ) -> Result<Self, WindowError> {
        let w = ParamWindow { center, half_width, pixels_x, pixels_y };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<(), WindowError> {
        if self.pixels_x == 0 || self.pixels_y == 0 {
            return Err(WindowError::Empty);
        }
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return Err(WindowError::BadHalfWidth(self.half_width));
        }
        if !(self.center.re.is_finite() && self.center.im.is_finite()) {
            return Err(WindowError::BadCenter);
        }
        Ok(())
    }

    /// Vertical half-extent, keeping pixels square.
    pub fn half_height(&self) -> f64 {
        self.half_width * self.pixels_y as f64 / self.pixels_x as f64
    }

    /// Center of pixel `(i, j)`; row 0 is the top. Offsets are formed from
    /// integer numerators so mirrored pixels get exactly opposite offsets.
    pub fn pixel_to_parameter(&self, i: u32, j: u32) -> Result<Complex64, WindowError> {
        let (w, h) = (self.pixels_x, self.pixels_y);
        if i >= w || j >= h {
            return Err(WindowError::OutOfRange { i, j, w, h });
        }
        Ok(self.pixel_center(i, j))
    }

    #[inline]
    pub(crate) fn pixel_center(&self, i: u32, j: u32) -> Complex64 {
        let (w, h) = (self.pixels_x as i64, self.pixels_y as i64);
        let x = (2 * i as i64 + 1 - w) as f64 / w as f64;
        let y = (h - (2 * j as i64 + 1)) as f64 / h as f64;
        Complex64::new(
            self.center.re + self.half_width * x,
            self.center.im + self.half_height() * y,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn family_maps() {
        let m = Family::V3.map_for(c(1.0, 0.0)).unwrap();
        assert_eq!(m, QuadMap::vbc(c(-2.0, 0.0), c(1.0, 0.0)).unwrap());
        let e = Family::V4A.map_for(c(0.0, 0.0)).unwrap_err();
        assert_eq!(e.reason, ExclusionReason::ZeroC);
        assert_eq!(Family::V2.map_for(c(0.0, 0.0)).unwrap_err().reason, ExclusionReason::ZeroA);
        assert_eq!(Family::V4A.map_for(c(-1.0, 0.0)).unwrap_err().reason, ExclusionReason::Pole);
        assert_eq!(Family::V4A.map_for(c(-2.0, 0.0)).unwrap_err().reason, ExclusionReason::Pole);
    }

    #[test]
    fn v4a_at_zero_slope() {
        let (b, cc) = projection_a().eval(c(0.0, 0.0)).unwrap();
        assert_eq!((b, cc), (c(-0.5, 0.0), c(0.0, 0.0)));
        // large slopes approach the base point
        let (b, cc) = projection_a().eval(c(1e8, 0.0)).unwrap();
        assert!((b - c(-1.0, 0.0)).norm() < 1e-7 && cc.norm() < 1e-7);
    }

    #[test]
    fn parse() {
        assert_eq!("V4A".parse::<Family>(), Ok(Family::V4A));
        assert_eq!("v5".parse::<Family>(), Err(FamilyParseError::GenusOne));
        assert_eq!(FamilyParseError::GenusOne.to_string(), "no parametrization: genus 1");
    }

    #[test]
    fn pixel_centers() {
        let w = ParamWindow::new(c(0.0, 0.0), 2.0, 4, 4).unwrap();
        assert_eq!(w.pixel_to_parameter(0, 0).unwrap(), c(-1.5, 1.5));
        let w = ParamWindow::new(c(1.0, 0.0), 1.0, 2, 2).unwrap();
        assert_eq!(w.pixel_to_parameter(1, 1).unwrap(), c(1.5, -0.5));
        let w = ParamWindow::new(c(0.25, -3.0), 0.7, 5, 5).unwrap();
        assert_eq!(w.pixel_to_parameter(2, 2).unwrap(), c(0.25, -3.0));
        assert!(w.pixel_to_parameter(5, 0).is_err());
        assert_eq!(ParamWindow::new(c(0.0, 0.0), 1.0, 0, 3), Err(WindowError::Empty));
    }
}
