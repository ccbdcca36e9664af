//! Critical-orbit polynomials of `f(z) = 1 + b/z + c/z^2` and resolution of
//! plane-curve singularities by blowing up.

use std::fmt;

use num_complex::Complex64;
use num_traits::{One, Zero};

use super::gcd::{gcd, resultant};
use super::poly::{rat, rational_to_f64, vars, MultiPoly, Rational, Vars};
use super::roots::complex_roots;
use super::univariate::UniPoly;
use super::AlgebraError;

/// Largest cycle length accepted by [`iterate_critical`]; degrees double per step.
pub const MAX_CRITICAL_PERIOD: u32 = 8;

/// A reduced quotient `num / den` of polynomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalFunction {
    num: MultiPoly,
    den: MultiPoly,
}

impl RationalFunction {
    /// Cancels the gcd and normalizes the denominator to coprime integer
    /// coefficients with a positive leading coefficient.
    pub fn new(num: MultiPoly, den: MultiPoly) -> Result<Self, AlgebraError> {
        if den.is_zero() {
            return Err(AlgebraError::ZeroDenominator);
        }
        let g = gcd(&num, &den);
        let num = num.div_exact(&g).expect("gcd divides numerator");
        let den = den.div_exact(&g).expect("gcd divides denominator");
        let (s, den) = den.primitive_integer();
        let num = num.scale(&s.recip());
        Ok(RationalFunction { num, den })
    }

    pub fn num(&self) -> &MultiPoly {
        &self.num
    }

    pub fn den(&self) -> &MultiPoly {
        &self.den
    }

    pub fn eval(&self, point: &[Complex64]) -> Complex64 {
        self.num.eval(point) / self.den.eval(point)
    }
}

/// `P_n / Q_n`, the reduced form of `f^(n-2)(1)` in `Q[b, c]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriticalQuotient {
    pub n: u32,
    pub p: MultiPoly,
    pub q: MultiPoly,
}

/// Composes `z -> 1 + b/z + c/z^2` starting from `z = 1`, `n - 2` times,
/// keeping numerator and denominator coprime. The pair is scaled so that
/// `P_n` has constant term `+1`.
pub fn iterate_critical(n: u32) -> Result<CriticalQuotient, AlgebraError> {
    if n < 3 {
        return Err(AlgebraError::InvalidArgument(format!(
            "critical period {n} has no (b, c) curve; need n >= 3"
        )));
    }
    if n > MAX_CRITICAL_PERIOD {
        return Err(AlgebraError::BudgetExceeded {
            n,
            max: MAX_CRITICAL_PERIOD,
        });
    }
    let v = vars(&["b", "c"]);
    let b = MultiPoly::var(&v, 0);
    let c = MultiPoly::var(&v, 1);
    let mut z = RationalFunction::new(MultiPoly::one(&v), MultiPoly::one(&v))?;
    for _ in 0..n - 2 {
        let (num, den) = (&z.num, &z.den);
        let nn = num * num;
        let next = &(&nn + &(&(&b * num) * den)) + &(&c * &(den * den));
        z = RationalFunction::new(next, nn)?;
    }
    let k = z.num.constant_term();
    let (p, q) = if k.is_zero() {
        (z.num, z.den)
    } else {
        let s = k.recip();
        (z.num.scale(&s), z.den.scale(&s))
    };
    Ok(CriticalQuotient { n, p, q })
}

/// `b^i c^j -> a^(d-i-j) b^i c^j`, prepending `a` to the variable list.
pub fn homogenize(p: &MultiPoly, d: u32) -> Result<MultiPoly, AlgebraError> {
    let deg = p.total_degree().unwrap_or(0);
    if d < deg {
        return Err(AlgebraError::DegreeTooLow { requested: d, degree: deg });
    }
    let mut names: Vec<&str> = vec!["a"];
    names.extend(p.vars().iter().map(String::as_str));
    let target = vars(&names);
    Ok(MultiPoly::from_terms(
        &target,
        p.terms().map(|(m, c)| {
            let mut e = vec![d - m.degree()];
            e.extend_from_slice(m.exponents());
            (e, c.clone())
        }),
    ))
}

/// Sets the first variable to one and drops it.
pub fn dehomogenize(h: &MultiPoly) -> MultiPoly {
    let names: Vec<&str> = h.vars()[1..].iter().map(String::as_str).collect();
    let target = vars(&names);
    MultiPoly::from_terms(
        &target,
        h.terms().map(|(m, c)| (m.exponents()[1..].to_vec(), c.clone())),
    )
}

/// A point of the projective plane with rational coordinates `[a:b:c]`.
///
/// Scaled so that the middle coordinate is one when it is nonzero, otherwise
/// the first nonzero coordinate is one.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ProjectivePoint(pub [Rational; 3]);

impl ProjectivePoint {
    pub fn new(coords: [Rational; 3]) -> Self {
        let pivot = [1usize, 0, 2]
            .into_iter()
            .find(|&i| !coords[i].is_zero())
            .expect("projective point has a nonzero coordinate");
        let s = coords[pivot].clone();
        ProjectivePoint(coords.map(|x| x / &s))
    }

    pub fn from_ints(a: i64, b: i64, c: i64) -> Self {
        Self::new([rat(a), rat(b), rat(c)])
    }

    pub fn coords(&self) -> &[Rational; 3] {
        &self.0
    }

    pub fn to_f64(&self) -> [f64; 3] {
        [
            rational_to_f64(&self.0[0]),
            rational_to_f64(&self.0[1]),
            rational_to_f64(&self.0[2]),
        ]
    }
}

impl fmt::Display for ProjectivePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}:{}:{}]", self.0[0], self.0[1], self.0[2])
    }
}

/// A polynomial factor the singular-point search could not reduce to
/// rational points.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchWarning {
    pub location: String,
    pub factor: String,
    pub degree: usize,
    /// `false` when numerical evidence shows the factor carries no singular point.
    pub blocking: bool,
}

impl fmt::Display for SearchWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: unexplored factor of degree {} ({}){}",
            self.location,
            self.degree,
            self.factor,
            if self.blocking { "" } else { " [no singular point found numerically]" }
        )
    }
}

#[derive(Clone, Debug, Default)]
pub struct SingularSearch {
    pub points: Vec<ProjectivePoint>,
    pub warnings: Vec<SearchWarning>,
}

impl SingularSearch {
    pub fn has_blocking_warnings(&self) -> bool {
        self.warnings.iter().any(|w| w.blocking)
    }
}

fn is_singular_at(partials: &[MultiPoly; 3], p: &[Rational; 3]) -> bool {
    partials.iter().all(|g| g.eval(p).is_zero())
}

/// Rational singular points of a homogeneous curve `H(a, b, c) = 0`.
///
/// Points with `a != 0` are found on the chart `a = 1` by eliminating `c`
/// from pairs of partial derivatives; points on the line `a = 0` come from an
/// exact univariate gcd. Candidates are verified exactly. Factors that could
/// not be split into rational roots are reported as warnings.
pub fn singular_points_rational(h: &MultiPoly) -> SingularSearch {
    assert_eq!(h.nvars(), 3, "projective plane curve in three variables");
    assert!(h.is_homogeneous(), "curve must be homogeneous");
    let mut out = SingularSearch::default();
    if h.is_zero() {
        return out;
    }
    let partials = [h.derivative(0), h.derivative(1), h.derivative(2)];
    let vn: Vec<String> = h.vars().to_vec();

    // line a = 0, chart b = 1
    let line: Vec<UniPoly> = std::iter::once(h)
        .chain(partials.iter())
        .map(|g| {
            let restricted = g
                .substitute(0, &MultiPoly::zero(h.vars()))
                .substitute(1, &MultiPoly::one(h.vars()));
            UniPoly::from_multipoly(&restricted, 2).expect("only c remains")
        })
        .collect();
    let common = line.iter().fold(UniPoly::zero(), |g, p| g.gcd(p));
    if common.is_zero() {
        out.warnings.push(SearchWarning {
            location: format!("line {}=0", vn[0]),
            factor: "0".into(),
            degree: 0,
            blocking: true,
        });
    } else {
        let (roots, rest) = common.strip_rational_roots();
        for r in roots {
            out.points
                .push(ProjectivePoint::new([Rational::zero(), Rational::one(), r]));
        }
        if rest.degree() > 0 {
            out.warnings.push(SearchWarning {
                location: format!("line {}=0, chart {}=1", vn[0], vn[1]),
                factor: rest.display_in(&vn[2]),
                degree: rest.degree(),
                blocking: true,
            });
        }
    }
    let corner = [Rational::zero(), Rational::zero(), Rational::one()];
    if is_singular_at(&partials, &corner) {
        out.points.push(ProjectivePoint::new(corner));
    }

    // chart a = 1
    let affine: Vec<MultiPoly> = partials.iter().map(dehomogenize).collect();
    let mut elim = UniPoly::zero();
    let mut any_nonzero = false;
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let r = eliminate_second(&affine[i], &affine[j]);
        if r.is_zero() {
            continue;
        }
        any_nonzero = true;
        let u = UniPoly::from_multipoly(&r, 0).expect("resultant eliminates c");
        elim = elim.gcd(&u);
    }
    if !any_nonzero {
        out.warnings.push(SearchWarning {
            location: format!("chart {}=1", vn[0]),
            factor: "partial derivatives share a component".into(),
            degree: 0,
            blocking: true,
        });
        return out;
    }
    let (roots, rest) = elim.strip_rational_roots();
    for b0 in roots {
        let fiber: Vec<UniPoly> = affine
            .iter()
            .map(|g| {
                let s = g.substitute(0, &MultiPoly::constant(g.vars(), b0.clone()));
                UniPoly::from_multipoly(&s, 1).expect("only c remains")
            })
            .collect();
        let common = fiber.iter().fold(UniPoly::zero(), |g, p| g.gcd(p));
        if common.is_zero() {
            out.warnings.push(SearchWarning {
                location: format!("chart {}=1, {}={}", vn[0], vn[1], b0),
                factor: "whole fibre singular".into(),
                degree: 0,
                blocking: true,
            });
            continue;
        }
        let (cs, crest) = common.strip_rational_roots();
        for c0 in cs {
            let p = [Rational::one(), b0.clone(), c0];
            if is_singular_at(&partials, &p) {
                out.points.push(ProjectivePoint::new(p));
            }
        }
        if crest.degree() > 0 {
            out.warnings.push(SearchWarning {
                location: format!("chart {}=1, {}={}", vn[0], vn[1], b0),
                factor: crest.display_in(&vn[2]),
                degree: crest.degree(),
                blocking: true,
            });
        }
    }
    if rest.degree() > 0 {
        let blocking = irrational_factor_may_be_singular(&rest, &affine);
        out.warnings.push(SearchWarning {
            location: format!("chart {}=1 projection to {}", vn[0], vn[1]),
            factor: rest.display_in(&vn[1]),
            degree: rest.degree(),
            blocking,
        });
    }
    out.points.sort();
    out.points.dedup();
    out
}

/// A polynomial in the first variable vanishing on the projection of the
/// common zeros of `f` and `g`.
fn eliminate_second(f: &MultiPoly, g: &MultiPoly) -> MultiPoly {
    match (f.degree_in(1).unwrap_or(0), g.degree_in(1).unwrap_or(0)) {
        (0, 0) => gcd(f, g),
        (0, _) => f.clone(),
        (_, 0) => g.clone(),
        _ => resultant(f, g, 1),
    }
}

/// Numerically checks whether some root `beta` of `factor` has a common zero
/// `(beta, gamma)` of all three affine partials.
fn irrational_factor_may_be_singular(factor: &UniPoly, affine: &[MultiPoly]) -> bool {
    for beta in complex_roots(&factor.to_complex()) {
        let fibres: Vec<Vec<Complex64>> = affine
            .iter()
            .map(|g| {
                g.to_univariate(1)
                    .iter()
                    .map(|coef| coef.eval(&[beta, Complex64::new(0.0, 0.0)]))
                    .collect()
            })
            .collect();
        let Some(pivot) = fibres.iter().max_by(|x, y| {
            let nx: f64 = x.iter().map(|z| z.norm()).sum();
            let ny: f64 = y.iter().map(|z| z.norm()).sum();
            nx.total_cmp(&ny)
        }) else {
            continue;
        };
        for gamma in complex_roots(pivot) {
            let all_small = affine.iter().all(|g| {
                let val = g.eval(&[beta, gamma]).norm();
                let scale: f64 = g
                    .terms()
                    .map(|(m, c)| {
                        let e = m.exponents();
                        rational_to_f64(c).abs()
                            * beta.norm().powi(e[0] as i32)
                            * gamma.norm().powi(e[1] as i32)
                    })
                    .sum();
                val <= 1e-7 * scale.max(1e-300)
            });
            if all_small {
                return true;
            }
        }
    }
    false
}

/// Local equation of `h` at `point` on the chart where coordinate `chart`
/// is one, translated so the point is the origin. The local coordinates keep
/// the names of the two remaining projective variables.
pub fn local_equation(
    h: &MultiPoly,
    point: &ProjectivePoint,
    chart: usize,
) -> Result<MultiPoly, AlgebraError> {
    let p = point.coords();
    if p[chart].is_zero() {
        return Err(AlgebraError::PointNotOnChart {
            point: point.to_string(),
            chart: h.vars()[chart].clone(),
        });
    }
    let others: Vec<usize> = (0..3).filter(|&i| i != chart).collect();
    let names: Vec<&str> = others.iter().map(|&i| h.vars()[i].as_str()).collect();
    let local = vars(&names);
    let images: Vec<MultiPoly> = (0..3)
        .map(|i| {
            if i == chart {
                MultiPoly::one(&local)
            } else {
                let k = others.iter().position(|&o| o == i).expect("other index");
                let shift = &p[i] / &p[chart];
                &MultiPoly::var(&local, k) + &MultiPoly::constant(&local, shift)
            }
        })
        .collect();
    let eq = h.compose(&local, &images);
    if !eq.constant_term().is_zero() {
        return Err(AlgebraError::PointNotOnCurve(point.to_string()));
    }
    Ok(eq)
}

/// Multiplicity of a local equation at the origin: its lowest total degree.
pub fn multiplicity(local: &MultiPoly) -> Result<u32, AlgebraError> {
    local.min_degree().ok_or(AlgebraError::ZeroPolynomial)
}

/// A tangent line of the cone at the origin in local coordinates `(u, v)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Direction {
    /// `u = slope * v`
    Slope(Rational),
    /// `u = lambda * v` for every root `lambda` of an irreducible-over-Q
    /// factor without rational roots.
    Irrational(UniPoly),
    /// `v = 0`
    Horizontal,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TangentDirection {
    pub direction: Direction,
    /// Multiplicity of the line in the tangent cone.
    pub multiplicity: u32,
}

impl TangentDirection {
    /// Number of distinct lines this entry stands for.
    pub fn line_count(&self) -> usize {
        match &self.direction {
            Direction::Irrational(f) => f.degree(),
            _ => 1,
        }
    }

    pub fn describe(&self, u: &str, v: &str) -> String {
        let line = match &self.direction {
            Direction::Slope(s) if s.is_zero() => format!("{u} = 0"),
            Direction::Slope(s) => format!("{u} = {s}*{v}"),
            Direction::Irrational(f) => {
                format!("{u} = s*{v} with {} = 0", f.display_in("s"))
            }
            Direction::Horizontal => format!("{v} = 0"),
        };
        format!("{line} (mult {})", self.multiplicity)
    }
}

/// Lines of the tangent cone: the lowest homogeneous part, with the power of
/// `v` split off and the rest read as a polynomial in `s = u/v`.
/// Ordered by slope, irrational factors next, `v = 0` last.
pub fn tangent_cone_directions(local: &MultiPoly) -> Result<Vec<TangentDirection>, AlgebraError> {
    assert_eq!(local.nvars(), 2, "local equation in two variables");
    let m = multiplicity(local)?;
    let cone = local.homogeneous_part(m);
    let mut coeffs = vec![Rational::zero(); m as usize + 1];
    for (mon, c) in cone.terms() {
        coeffs[mon.exponents()[0] as usize] = c.clone();
    }
    let in_s = UniPoly::new(coeffs);
    let v_power = m as usize - in_s.degree();
    let mut out = Vec::new();
    for (factor, mu) in in_s.squarefree() {
        let (roots, rest) = factor.strip_rational_roots();
        for r in roots {
            out.push(TangentDirection {
                direction: Direction::Slope(r),
                multiplicity: mu,
            });
        }
        if rest.degree() > 0 {
            out.push(TangentDirection {
                direction: Direction::Irrational(rest.monic()),
                multiplicity: mu,
            });
        }
    }
    out.sort_by(|x, y| match (&x.direction, &y.direction) {
        (Direction::Slope(a), Direction::Slope(b)) => a.cmp(b),
        (Direction::Slope(_), _) => std::cmp::Ordering::Less,
        (_, Direction::Slope(_)) => std::cmp::Ordering::Greater,
        _ => std::cmp::Ordering::Equal,
    });
    if v_power > 0 {
        out.push(TangentDirection {
            direction: Direction::Horizontal,
            multiplicity: v_power as u32,
        });
    }
    Ok(out)
}

fn fresh_name(taken: &[String]) -> String {
    ["x", "y", "w", "t"]
        .iter()
        .map(|s| s.to_string())
        .chain((1..).map(|k| format!("x{k}")))
        .find(|n| !taken.contains(n))
        .expect("infinitely many names")
}

/// Strict transform of `local` in the blowup chart over `direction`, recentered
/// at the point above it.
///
/// For `u = s*v` the chart is `u = v*(x + s)` with new coordinates `(x, v)`;
/// for `v = 0` it is `v = u*x` with new coordinates `(x, u)`. The total
/// transform is divided by the exceptional divisor to the power of the
/// multiplicity.
pub fn blowup_strict_transform(
    local: &MultiPoly,
    direction: &Direction,
) -> Result<MultiPoly, AlgebraError> {
    assert_eq!(local.nvars(), 2, "local equation in two variables");
    let m = multiplicity(local)?;
    let (un, vn) = (local.vars()[0].clone(), local.vars()[1].clone());
    let x = fresh_name(local.vars());
    let ring: Vars = vars(&[&un, &vn, &x]);
    let lifted = local.with_vars(&ring);
    let u = MultiPoly::var(&ring, 0);
    let v = MultiPoly::var(&ring, 1);
    let xv = MultiPoly::var(&ring, 2);
    let (total, exceptional, keep) = match direction {
        Direction::Slope(s) => {
            let shifted = &xv + &MultiPoly::constant(&ring, s.clone());
            (lifted.substitute(0, &(&v * &shifted)), v.clone(), vn.clone())
        }
        Direction::Horizontal => (lifted.substitute(1, &(&u * &xv)), u.clone(), un.clone()),
        Direction::Irrational(f) => {
            return Err(AlgebraError::NeedsExtension(f.display_in("s")));
        }
    };
    let strict = total
        .div_exact(&exceptional.pow(m))
        .ok_or(AlgebraError::InexactDivision)?;
    Ok(strict.with_vars(&vars(&[&x, &keep])))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlowupStep {
    pub depth: usize,
    /// Chart substitution that produced this local equation.
    pub substitution: String,
    pub local_equation: String,
    pub multiplicity: u32,
    pub directions: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResolutionReport {
    pub point: ProjectivePoint,
    pub chart: String,
    pub multiplicity_sequence: Vec<u32>,
    pub steps: Vec<BlowupStep>,
}

impl ResolutionReport {
    /// `sum k(k-1)/2` over the infinitely near points.
    pub fn delta(&self) -> u64 {
        self.multiplicity_sequence
            .iter()
            .map(|&k| (k as u64) * (k as u64 - 1) / 2)
            .sum()
    }
}

/// Chart used for a projective point: the middle coordinate when nonzero.
pub fn default_chart(point: &ProjectivePoint) -> usize {
    [1usize, 0, 2]
        .into_iter()
        .find(|&i| !point.coords()[i].is_zero())
        .expect("nonzero coordinate")
}

/// Multiplicities of all infinitely near points of `h` at `point`,
/// depth first. A tangent line of cone multiplicity one contributes a single
/// `1` (the smooth point above it); lines of higher multiplicity are blown up.
pub fn resolve(h: &MultiPoly, point: &ProjectivePoint) -> Result<ResolutionReport, AlgebraError> {
    let chart = default_chart(point);
    let local = local_equation(h, point, chart)?;
    let mut steps = Vec::new();
    let seq = resolve_local(&local, 0, "translate to origin".into(), &mut steps)?;
    Ok(ResolutionReport {
        point: point.clone(),
        chart: h.vars()[chart].clone(),
        multiplicity_sequence: seq,
        steps,
    })
}

fn resolve_local(
    local: &MultiPoly,
    depth: usize,
    substitution: String,
    steps: &mut Vec<BlowupStep>,
) -> Result<Vec<u32>, AlgebraError> {
    // deep enough for any curve of degree below a few hundred
    if depth > 64 {
        return Err(AlgebraError::InvalidArgument("blowup recursion too deep".into()));
    }
    let m = multiplicity(local)?;
    let dirs = tangent_cone_directions(local)?;
    let (un, vn) = (local.vars()[0].clone(), local.vars()[1].clone());
    steps.push(BlowupStep {
        depth,
        substitution,
        local_equation: local.to_string(),
        multiplicity: m,
        directions: dirs.iter().map(|d| d.describe(&un, &vn)).collect(),
    });
    let mut seq = vec![m];
    if m == 1 {
        return Ok(seq);
    }
    for d in &dirs {
        if d.multiplicity == 1 {
            seq.extend(std::iter::repeat(1).take(d.line_count()));
            continue;
        }
        let strict = blowup_strict_transform(local, &d.direction)?;
        let x = strict.vars()[0].clone();
        let sub = match &d.direction {
            Direction::Slope(s) => format!("{un} = {vn}*({x} + {s})"),
            Direction::Horizontal => format!("{vn} = {un}*{x}"),
            Direction::Irrational(_) => unreachable!("rejected by blowup"),
        };
        seq.extend(resolve_local(&strict, depth + 1, sub, steps)?);
    }
    Ok(seq)
}

/// `(d-1)(d-2)/2 - sum k(k-1)/2` over every multiplicity in every report.
pub fn genus(d: u32, reports: &[ResolutionReport]) -> Result<u64, AlgebraError> {
    let d = d as i64;
    let arithmetic = (d - 1) * (d - 2) / 2;
    let delta: i64 = reports.iter().map(|r| r.delta() as i64).sum();
    let g = arithmetic - delta;
    if g < 0 {
        return Err(AlgebraError::NegativeGenus(g));
    }
    Ok(g as u64)
}

/// Degree, singular points, their resolutions, and the geometric genus.
#[derive(Clone, Debug)]
pub struct GenusReport {
    pub degree: u32,
    pub search: SingularSearch,
    pub resolutions: Vec<ResolutionReport>,
    pub genus: u64,
}

pub fn genus_of_curve(h: &MultiPoly) -> Result<GenusReport, AlgebraError> {
    let degree = h.total_degree().ok_or(AlgebraError::ZeroPolynomial)?;
    let search = singular_points_rational(h);
    if let Some(w) = search.warnings.iter().find(|w| w.blocking) {
        return Err(AlgebraError::IncompleteSearch(w.to_string()));
    }
    let resolutions = search
        .points
        .iter()
        .map(|p| resolve(h, p))
        .collect::<Result<Vec<_>, _>>()?;
    let genus = genus(degree, &resolutions)?;
    Ok(GenusReport {
        degree,
        search,
        resolutions,
        genus,
    })
}

/// Projective closure of the period-`n` curve `P_n = 0`.
pub fn projective_period_curve(n: u32) -> Result<MultiPoly, AlgebraError> {
    let cq = iterate_critical(n)?;
    let d = cq.p.total_degree().ok_or(AlgebraError::ZeroPolynomial)?;
    homogenize(&cq.p, d)
}
