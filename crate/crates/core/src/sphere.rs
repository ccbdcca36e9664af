//! Quadratic rational maps on the Riemann sphere and attraction to the
//! critical cycle.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Squared modulus above which a value is treated as the point at infinity.
pub const OVERFLOW_NORM_SQR: f64 = 1e300;

/// Chordal tolerance for closing the critical cycle.
pub const CYCLE_CLOSE_TOL: f64 = 1e-9;

/// Chordal radius of the periodicity check: an orbit that returns this close
/// to an earlier point has settled on some cycle.
const PERIODICITY_EPS: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpherePoint {
    Finite(Complex64),
    Infinity,
}

impl SpherePoint {
    pub const ZERO: SpherePoint = SpherePoint::Finite(Complex64::new(0.0, 0.0));
    pub const ONE: SpherePoint = SpherePoint::Finite(Complex64::new(1.0, 0.0));

    /// Non-finite values and values past the overflow clamp become infinity.
    #[inline]
    pub fn new(z: Complex64) -> Self {
        if z.norm_sqr() <= OVERFLOW_NORM_SQR {
            SpherePoint::Finite(z)
        } else {
            SpherePoint::Infinity
        }
    }

    pub fn from_re_im(re: f64, im: f64) -> Self {
        Self::new(Complex64::new(re, im))
    }

    pub fn finite(&self) -> Option<Complex64> {
        match *self {
            SpherePoint::Finite(z) => Some(z),
            SpherePoint::Infinity => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, SpherePoint::Infinity)
    }

    /// `z -> 1/z`, exchanging 0 and infinity.
    #[inline]
    pub fn invert(&self) -> Self {
        match *self {
            SpherePoint::Infinity => SpherePoint::ZERO,
            SpherePoint::Finite(z) if z.re == 0.0 && z.im == 0.0 => SpherePoint::Infinity,
            SpherePoint::Finite(z) => SpherePoint::new(z.inv()),
        }
    }
}

impl fmt::Display for SpherePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpherePoint::Finite(z) => write!(f, "{}{:+}i", z.re, z.im),
            SpherePoint::Infinity => write!(f, "inf"),
        }
    }
}

/// Finite points serialize as `[re, im]`, infinity as the string `"infinity"`.
impl Serialize for SpherePoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            SpherePoint::Finite(z) => [z.re, z.im].serialize(s),
            SpherePoint::Infinity => s.serialize_str("infinity"),
        }
    }
}

/// `2|p-q| / sqrt((1+|p|^2)(1+|q|^2))`, with `d(p, inf) = 2/sqrt(1+|p|^2)`.
pub fn chordal_distance(p: SpherePoint, q: SpherePoint) -> f64 {
    match (p, q) {
        (SpherePoint::Infinity, SpherePoint::Infinity) => 0.0,
        (SpherePoint::Finite(z), SpherePoint::Infinity)
        | (SpherePoint::Infinity, SpherePoint::Finite(z)) => 2.0 / (1.0 + z.norm_sqr()).sqrt(),
        (SpherePoint::Finite(z), SpherePoint::Finite(w)) => {
            // hypot-style scaling keeps huge arguments finite
            let d = (z - w).norm();
            2.0 * d / ((1.0 + z.norm_sqr()).sqrt() * (1.0 + w.norm_sqr()).sqrt())
        }
    }
}

/// `chordal_distance(p, q) < eps` without square roots.
#[inline]
pub fn chordal_within(p: SpherePoint, q: SpherePoint, eps: f64) -> bool {
    match (p, q) {
        (SpherePoint::Infinity, SpherePoint::Infinity) => true,
        (SpherePoint::Finite(z), SpherePoint::Infinity)
        | (SpherePoint::Infinity, SpherePoint::Finite(z)) => 4.0 < eps * eps * (1.0 + z.norm_sqr()),
        (SpherePoint::Finite(z), SpherePoint::Finite(w)) => {
            4.0 * (z - w).norm_sqr() < eps * eps * (1.0 + z.norm_sqr()) * (1.0 + w.norm_sqr())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MapFamily {
    /// `z^2 + c`
    V1,
    /// `a / (z^2 + 2z)`
    V2,
    /// `1 + b/z + c/z^2`
    Vbc,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("a = 0 is excluded: the map degenerates")]
    ZeroA,
    #[error("c = 0 is excluded: the map is no longer quadratic")]
    ZeroC,
    #[error("parameters must be finite")]
    NonFinite,
    #[error("family {family:?} has no critical cycle of length {n}")]
    WrongPeriod { family: MapFamily, n: usize },
    #[error("critical orbit does not close: f^{}(1) is at chordal distance {distance:e} from 0", n - 2)]
    NotOnCurve { n: usize, distance: f64 },
}

/// A quadratic map in one of the three normal forms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadMap {
    family: MapFamily,
    // V1: (c, 0); V2: (a, 0); Vbc: (b, c)
    p: Complex64,
    q: Complex64,
}

fn finite(z: Complex64) -> Result<Complex64, DynamicsError> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(DynamicsError::NonFinite)
    }
}

impl QuadMap {
    pub fn v1(c: Complex64) -> Result<Self, DynamicsError> {
        Ok(QuadMap {
            family: MapFamily::V1,
            p: finite(c)?,
            q: Complex64::new(0.0, 0.0),
        })
    }

    pub fn v2(a: Complex64) -> Result<Self, DynamicsError> {
        if finite(a)? == Complex64::new(0.0, 0.0) {
            return Err(DynamicsError::ZeroA);
        }
        Ok(QuadMap {
            family: MapFamily::V2,
            p: a,
            q: Complex64::new(0.0, 0.0),
        })
    }

    pub fn vbc(b: Complex64, c: Complex64) -> Result<Self, DynamicsError> {
        if finite(c)? == Complex64::new(0.0, 0.0) {
            return Err(DynamicsError::ZeroC);
        }
        Ok(QuadMap {
            family: MapFamily::Vbc,
            p: finite(b)?,
            q: c,
        })
    }

    pub fn family(&self) -> MapFamily {
        self.family
    }

    /// Named parameters: `[("c", c)]`, `[("a", a)]` or `[("b", b), ("c", c)]`.
    pub fn params(&self) -> Vec<(&'static str, Complex64)> {
        match self.family {
            MapFamily::V1 => vec![("c", self.p)],
            MapFamily::V2 => vec![("a", self.p)],
            MapFamily::Vbc => vec![("b", self.p), ("c", self.q)],
        }
    }

    /// `f(z)`, total on the sphere.
    #[inline]
    pub fn eval(&self, z: SpherePoint) -> SpherePoint {
        let SpherePoint::Finite(z) = z else {
            return match self.family {
                MapFamily::V1 => SpherePoint::Infinity,
                MapFamily::V2 => SpherePoint::ZERO,
                MapFamily::Vbc => SpherePoint::ONE,
            };
        };
        match self.family {
            MapFamily::V1 => {
                if z.norm_sqr() > 1e151 {
                    return SpherePoint::Infinity;
                }
                SpherePoint::new(z * z + self.p)
            }
            MapFamily::V2 => {
                if z.norm_sqr() > 1.0 {
                    // a w^2 / (1 + 2w) with w = 1/z avoids overflow in z^2
                    let w = z.inv();
                    let d = 1.0 + 2.0 * w;
                    if d.re == 0.0 && d.im == 0.0 {
                        return SpherePoint::Infinity;
                    }
                    SpherePoint::new(self.p * w * w / d)
                } else {
                    let d = z * (z + 2.0);
                    if d.re == 0.0 && d.im == 0.0 {
                        return SpherePoint::Infinity;
                    }
                    SpherePoint::new(self.p / d)
                }
            }
            MapFamily::Vbc => {
                if z.re == 0.0 && z.im == 0.0 {
                    return SpherePoint::Infinity;
                }
                let r = 1.0 / z.norm_sqr();
                let w = Complex64::new(z.re * r, -z.im * r);
                SpherePoint::new(1.0 + w * (self.p + self.q * w))
            }
        }
    }

    /// `f^k(z)`.
    pub fn iterate(&self, z: SpherePoint, k: usize) -> SpherePoint {
        (0..k).fold(z, |z, _| self.eval(z))
    }

    /// The critical point off the critical cycle.
    pub fn free_critical_point(&self) -> SpherePoint {
        match self.family {
            MapFamily::V1 => SpherePoint::ZERO,
            MapFamily::V2 => SpherePoint::Finite(Complex64::new(-1.0, 0.0)),
            MapFamily::Vbc => {
                // f'(z) = -(b z + 2c)/z^3
                if self.p.re == 0.0 && self.p.im == 0.0 {
                    SpherePoint::Infinity
                } else {
                    SpherePoint::new(-2.0 * self.q / self.p)
                }
            }
        }
    }

    /// Cycle containing the marked critical point: `[inf]` for V1,
    /// `[0, inf]` for V2 and `[0, inf, 1, f(1), ...]` for the `(b, c)` family.
    pub fn critical_cycle(&self, n: usize) -> Result<Vec<SpherePoint>, DynamicsError> {
        match (self.family, n) {
            (MapFamily::V1, 1) => Ok(vec![SpherePoint::Infinity]),
            (MapFamily::V2, 2) => Ok(vec![SpherePoint::ZERO, SpherePoint::Infinity]),
            (MapFamily::Vbc, n) if n >= 3 => {
                let mut cycle = vec![SpherePoint::ZERO, SpherePoint::Infinity, SpherePoint::ONE];
                let mut z = SpherePoint::ONE;
                for _ in 3..n {
                    z = self.eval(z);
                    cycle.push(z);
                }
                let closing = self.eval(z);
                let distance = chordal_distance(closing, SpherePoint::ZERO);
                if distance < CYCLE_CLOSE_TOL {
                    Ok(cycle)
                } else {
                    Err(DynamicsError::NotOnCurve { n, distance })
                }
            }
            (family, n) => Err(DynamicsError::WrongPeriod { family, n }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterConfig {
    /// Chordal radius counted as "at the cycle point".
    pub eps_attract: f64,
    pub max_iter: u32,
    /// Steps the orbit must follow the cycle after the first hit; `None`
    /// means twice the cycle length.
    pub confirm_steps: Option<u32>,
}

impl Default for IterConfig {
    fn default() -> Self {
        IterConfig {
            eps_attract: 1e-6,
            max_iter: 20000,
            confirm_steps: None,
        }
    }
}

impl IterConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.eps_attract > 0.0 && self.eps_attract.is_finite()) {
            return Err(format!("eps must be positive, got {}", self.eps_attract));
        }
        if self.max_iter == 0 {
            return Err("max_iter must be positive".into());
        }
        if self.confirm_steps == Some(0) {
            return Err("confirm_steps must be positive".into());
        }
        Ok(())
    }

    pub fn confirm_for(&self, n: usize) -> usize {
        self.confirm_steps.map_or(2 * n, |k| k as usize)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attraction {
    /// Index of the cycle point that `f^(n m)(z0)` converges to.
    pub phase: usize,
    /// Iterations before the orbit first came within `eps_attract`.
    pub steps: u32,
}

/// Index of the first cycle point within `eps` of `z`.
#[inline]
fn near_cycle(z: SpherePoint, cycle: &[SpherePoint], eps: f64) -> Option<usize> {
    cycle.iter().position(|&p| chordal_within(z, p, eps))
}

/// Follows the orbit of `z0` until it is captured by the cycle, returning the
/// phase and the capture time. A capture must persist for the confirmation
/// window. Orbits that revisit an earlier point (Brent's cycle detection)
/// have settled elsewhere and end the search early.
pub fn detect_attraction(
    map: &QuadMap,
    z0: SpherePoint,
    cycle: &[SpherePoint],
    cfg: &IterConfig,
) -> Option<Attraction> {
    let n = cycle.len();
    let confirm = cfg.confirm_for(n);
    let eps = cfg.eps_attract;
    let mut z = z0;
    let mut saved = z0;
    let mut power = 1u32;
    for j in 0..cfg.max_iter {
        if let Some(k) = near_cycle(z, cycle, eps) {
            let mut w = z;
            let confirmed = (1..=confirm).all(|s| {
                w = map.eval(w);
                chordal_within(w, cycle[(k + s) % n], eps)
            });
            if confirmed {
                let phase = (k + n - (j as usize % n)) % n;
                return Some(Attraction { phase, steps: j });
            }
        } else if j > 0 && chordal_within(z, saved, PERIODICITY_EPS) {
            return None;
        }
        if j + 1 == power {
            saved = z;
            power = power.saturating_mul(2);
        }
        z = map.eval(z);
    }
    None
}

/// Index of the cycle point that `f^(n m)(z0)` approaches, judged by the
/// first time the orbit comes within `eps_attract` of any cycle point.
/// Cheaper than [`detect_attraction`] and used for the many samples of the
/// basin tests.
pub fn limit_phase(
    map: &QuadMap,
    z0: SpherePoint,
    cycle: &[SpherePoint],
    cfg: &IterConfig,
) -> Option<usize> {
    limit_phase_timed(map, z0, cycle, cfg).map(|(phase, _)| phase)
}

fn limit_phase_timed(
    map: &QuadMap,
    z0: SpherePoint,
    cycle: &[SpherePoint],
    cfg: &IterConfig,
) -> Option<(usize, u32)> {
    let n = cycle.len();
    let eps = cfg.eps_attract;
    let mut z = z0;
    let mut saved = z0;
    let mut power = 1u32;
    for j in 0..cfg.max_iter {
        if let Some(k) = near_cycle(z, cycle, eps) {
            return Some(((k + n - (j as usize % n)) % n, j));
        }
        if j > 0 && chordal_within(z, saved, PERIODICITY_EPS) {
            return None;
        }
        if j + 1 == power {
            saved = z;
            power = power.saturating_mul(2);
        }
        z = map.eval(z);
    }
    None
}

/// Orbits advanced together by [`limit_phases`]. Each orbit is a serial
/// chain of dependent operations; interleaving several keeps the pipeline busy.
pub const LANES: usize = 4;

/// [`limit_phase`] for each start point; `out[k]` receives the result for
/// `starts[k]`.
pub fn limit_phases(
    map: &QuadMap,
    starts: &[SpherePoint],
    cycle: &[SpherePoint],
    cfg: &IterConfig,
    out: &mut [Option<usize>],
) {
    assert_eq!(starts.len(), out.len());
    let mut times = [0u32; LANES];
    for (chunk, res) in starts.chunks(LANES).zip(out.chunks_mut(LANES)) {
        limit_phase_lanes(map, chunk, cycle, cfg, res, &mut times[..chunk.len()]);
    }
}

/// Phase of `z0` as in [`limit_phases`] together with its capture time: the
/// first step at which the orbit is near the cycle point at infinity (or,
/// for a cycle without infinity, near any cycle point).
pub fn timed_limit_phase(
    map: &QuadMap,
    z0: SpherePoint,
    cycle: &[SpherePoint],
    cfg: &IterConfig,
) -> Option<(usize, u32)> {
    let (mut out, mut time) = ([None], [0]);
    limit_phase_lanes(map, &[z0], cycle, cfg, &mut out, &mut time);
    out[0].map(|phase| (phase, time[0]))
}

fn limit_phase_lanes(
    map: &QuadMap,
    starts: &[SpherePoint],
    cycle: &[SpherePoint],
    cfg: &IterConfig,
    out: &mut [Option<usize>],
    times: &mut [u32],
) {
    // every captured orbit passes near infinity, where the chordal test is a
    // single comparison of |z|^2
    let Some(at_inf) = cycle.iter().position(|p| p.is_infinite()) else {
        for ((o, t), &z) in out.iter_mut().zip(times.iter_mut()).zip(starts) {
            (*o, *t) = match limit_phase_timed(map, z, cycle, cfg) {
                Some((phase, j)) => (Some(phase), j),
                None => (None, 0),
            };
        }
        return;
    };
    let (p, q) = (map.p, map.q);
    match map.family {
        MapFamily::V1 => lanes_kernel(starts, cycle.len(), at_inf, cfg, out, times, |x, y| {
            (x * x - y * y + p.re, 2.0 * x * y + p.im)
        }),
        MapFamily::V2 => lanes_kernel(starts, cycle.len(), at_inf, cfg, out, times, |x, y| {
            // a / (z (z + 2))
            let (dx, dy) = (x * (x + 2.0) - y * y, y * (2.0 * x + 2.0));
            let r = 1.0 / (dx * dx + dy * dy);
            ((p.re * dx + p.im * dy) * r, (p.im * dx - p.re * dy) * r)
        }),
        MapFamily::Vbc => lanes_kernel(starts, cycle.len(), at_inf, cfg, out, times, |x, y| {
            // 1 + w (b + c w), w = 1/z
            let r = 1.0 / (x * x + y * y);
            let (wx, wy) = (x * r, -y * r);
            // grouped as in `eval` so both round identically
            let (tx, ty) = (p.re + (q.re * wx - q.im * wy), p.im + (q.re * wy + q.im * wx));
            (1.0 + (wx * tx - wy * ty), wx * ty + wy * tx)
        }),
    }
}

/// Runs up to [`LANES`] orbits of `step` in plain floating point. Poles
/// produce infinities or NaNs, which count as reaching infinity, the same
/// limit as the exact evaluation on the sphere.
#[inline(always)]
fn lanes_kernel<F: Fn(f64, f64) -> (f64, f64)>(
    starts: &[SpherePoint],
    n: usize,
    at_inf: usize,
    cfg: &IterConfig,
    out: &mut [Option<usize>],
    times: &mut [u32],
    step: F,
) {
    let eps = cfg.eps_attract;
    let far = 4.0 / (eps * eps) - 1.0;
    let pe2 = PERIODICITY_EPS * PERIODICITY_EPS;
    let lanes = starts.len();
    let mut x = [0.0f64; LANES];
    let mut y = [0.0f64; LANES];
    for (k, z) in starts.iter().enumerate() {
        (x[k], y[k]) = match *z {
            SpherePoint::Finite(w) => (w.re, w.im),
            SpherePoint::Infinity => (f64::INFINITY, 0.0),
        };
    }
    let (mut sx, mut sy) = (x, y);
    let mut active = [false; LANES];
    active[..lanes].iter_mut().for_each(|a| *a = true);
    let mut remaining = lanes;
    out.iter_mut().for_each(|o| *o = None);
    let mut power = 1u32;
    for j in 0..cfg.max_iter {
        for k in 0..lanes {
            if !active[k] {
                continue;
            }
            let ns = x[k] * x[k] + y[k] * y[k];
            // negated so that NaN counts as captured
            if !(ns <= far) {
                out[k] = Some((at_inf + n - (j as usize % n)) % n);
                times[k] = j;
                active[k] = false;
                remaining -= 1;
            } else if j > 0 {
                let (dx, dy) = (x[k] - sx[k], y[k] - sy[k]);
                let nss = sx[k] * sx[k] + sy[k] * sy[k];
                if 4.0 * (dx * dx + dy * dy) < pe2 * (1.0 + ns) * (1.0 + nss) {
                    active[k] = false;
                    remaining -= 1;
                }
            }
        }
        if remaining == 0 {
            return;
        }
        if j + 1 == power {
            (sx, sy) = (x, y);
            power = power.saturating_mul(2);
        }
        for k in 0..LANES {
            (x[k], y[k]) = step(x[k], y[k]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn poles_and_infinity() {
        let f = QuadMap::vbc(c(-2.0, 0.0), c(1.0, 0.0)).unwrap();
        assert_eq!(f.eval(SpherePoint::ZERO), SpherePoint::Infinity);
        assert_eq!(f.eval(SpherePoint::Infinity), SpherePoint::ONE);
        assert_eq!(f.eval(SpherePoint::ONE), SpherePoint::ZERO);
        let g = QuadMap::v2(c(1.0, 0.0)).unwrap();
        assert_eq!(g.eval(SpherePoint::ZERO), SpherePoint::Infinity);
        assert_eq!(g.eval(SpherePoint::from_re_im(-2.0, 0.0)), SpherePoint::Infinity);
        assert_eq!(g.eval(SpherePoint::Infinity), SpherePoint::ZERO);
        let v = g.eval(SpherePoint::ONE).finite().unwrap();
        assert!((v - c(1.0 / 3.0, 0.0)).norm() < 1e-15);
        let h = QuadMap::v1(c(0.3, 0.0)).unwrap();
        assert_eq!(h.eval(SpherePoint::Infinity), SpherePoint::Infinity);
        assert_eq!(h.eval(SpherePoint::from_re_im(1e200, 0.0)), SpherePoint::Infinity);
    }

    #[test]
    fn construction_rejects_degenerate_maps() {
        assert_eq!(QuadMap::v2(c(0.0, 0.0)), Err(DynamicsError::ZeroA));
        assert_eq!(QuadMap::vbc(c(-0.5, 0.0), c(0.0, 0.0)), Err(DynamicsError::ZeroC));
        assert_eq!(QuadMap::v1(c(f64::NAN, 0.0)), Err(DynamicsError::NonFinite));
    }

    #[test]
    fn chordal_examples() {
        assert_eq!(chordal_distance(SpherePoint::ZERO, SpherePoint::ZERO), 0.0);
        assert_eq!(chordal_distance(SpherePoint::ZERO, SpherePoint::Infinity), 2.0);
        let d = chordal_distance(SpherePoint::ONE, SpherePoint::from_re_im(1.0 + 1e-9, 0.0));
        assert!((d - 1e-9).abs() < 1e-11);
    }

    #[test]
    fn cycles() {
        let g = QuadMap::v2(c(2.0, 0.0)).unwrap();
        assert_eq!(g.critical_cycle(2).unwrap(), vec![SpherePoint::ZERO, SpherePoint::Infinity]);
        let f = QuadMap::vbc(c(-2.0, 0.0), c(1.0, 0.0)).unwrap();
        assert_eq!(
            f.critical_cycle(3).unwrap(),
            vec![SpherePoint::ZERO, SpherePoint::Infinity, SpherePoint::ONE]
        );
        assert!(matches!(f.critical_cycle(4), Err(DynamicsError::NotOnCurve { .. })));
        assert!(matches!(g.critical_cycle(3), Err(DynamicsError::WrongPeriod { .. })));
    }

    #[test]
    fn free_critical_points() {
        assert_eq!(QuadMap::v2(c(3.0, 1.0)).unwrap().free_critical_point(), SpherePoint::from_re_im(-1.0, 0.0));
        let f = QuadMap::vbc(c(-2.0, 0.0), c(1.0, 0.0)).unwrap();
        assert_eq!(f.free_critical_point(), SpherePoint::ONE);
        let g = QuadMap::vbc(c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        assert_eq!(g.free_critical_point(), SpherePoint::Infinity);
    }

    #[test]
    fn attraction_examples() {
        let cfg = IterConfig::default();
        let f = QuadMap::vbc(c(-2.0, 0.0), c(1.0, 0.0)).unwrap();
        let cycle = f.critical_cycle(3).unwrap();
        assert_eq!(
            detect_attraction(&f, SpherePoint::ONE, &cycle, &cfg),
            Some(Attraction { phase: 2, steps: 0 })
        );
        let m = QuadMap::v1(c(1.0, 0.0)).unwrap();
        let inf = [SpherePoint::Infinity];
        assert_eq!(detect_attraction(&m, SpherePoint::ZERO, &inf, &cfg).map(|a| a.phase), Some(0));
        let m = QuadMap::v1(c(-1.0, 0.0)).unwrap();
        assert_eq!(detect_attraction(&m, SpherePoint::ZERO, &inf, &cfg), None);
    }
}
