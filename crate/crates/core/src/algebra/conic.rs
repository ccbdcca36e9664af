//! Rational parametrization of a conic by projection from a point on it.
//!
//! Lines through the base point `(b0, c0)` are `(b, c) = (b0 + s, c0 + t s)`.
//! Substituting into a conic `C` gives `C(b0, c0) + s L(t) + s^2 Q(t)`, where
//! `L` is the gradient at the base applied to `(1, t)` and `Q` is the
//! quadratic part evaluated at `(1, t)`. The constant vanishes on the curve,
//! so the second intersection is `s = -L(t)/Q(t)`.

use num_complex::Complex64;
use num_traits::{One, Zero};

use super::poly::{rat, vars, MultiPoly, Rational};
use super::surd::QuadSurd;
use super::AlgebraError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConicParametrization {
    base: (QuadSurd, QuadSurd),
    /// `L(t) = linear[0] + linear[1] t`
    linear: [QuadSurd; 2],
    /// `Q(t) = quadratic[0] + quadratic[1] t + quadratic[2] t^2`
    quadratic: [Rational; 3],
}

fn eval_surd(p: &MultiPoly, point: &[QuadSurd; 2]) -> QuadSurd {
    let d = point[0].radicand;
    let mut acc = QuadSurd::from_rational(Rational::zero(), d);
    for (m, c) in p.terms() {
        let mut t = QuadSurd::from_rational(c.clone(), d);
        for (i, &e) in m.exponents().iter().enumerate() {
            for _ in 0..e {
                t = &t * &point[i];
            }
        }
        acc = &acc + &t;
    }
    acc
}

/// Parametrizes the conic `conic(b, c) = 0` from a base point with
/// coordinates in a real quadratic field.
pub fn derive_conic_parametrization(
    conic: &MultiPoly,
    base: (QuadSurd, QuadSurd),
) -> Result<ConicParametrization, AlgebraError> {
    if conic.nvars() != 2 || conic.total_degree() != Some(2) {
        return Err(AlgebraError::InvalidArgument(
            "expected a conic in two variables".into(),
        ));
    }
    let point = [base.0.clone(), base.1.clone()];
    if !eval_surd(conic, &point).is_zero() {
        return Err(AlgebraError::BaseNotOnCurve);
    }
    let linear = [
        eval_surd(&conic.derivative(0), &point),
        eval_surd(&conic.derivative(1), &point),
    ];
    let quadratic = [
        conic.coeff(&[2, 0]),
        conic.coeff(&[1, 1]),
        conic.coeff(&[0, 2]),
    ];
    Ok(ConicParametrization {
        base,
        linear,
        quadratic,
    })
}

impl ConicParametrization {
    pub fn base(&self) -> &(QuadSurd, QuadSurd) {
        &self.base
    }

    /// Coefficients of `L(t)`.
    pub fn linear(&self) -> &[QuadSurd; 2] {
        &self.linear
    }

    pub fn base_f64(&self) -> (f64, f64) {
        (self.base.0.to_f64(), self.base.1.to_f64())
    }

    fn q_complex(&self, t: Complex64) -> Complex64 {
        let q: Vec<f64> = self
            .quadratic
            .iter()
            .map(super::poly::rational_to_f64)
            .collect();
        q[0] + t * (q[1] + t * q[2])
    }

    /// Slopes where the line meets the conic only at the base (poles of the
    /// parametrization), as roots of `Q(t)`.
    pub fn pole_polynomial(&self) -> &[Rational; 3] {
        &self.quadratic
    }

    /// `(b(t), c(t))`, or `None` at a pole.
    pub fn eval(&self, t: Complex64) -> Option<(Complex64, Complex64)> {
        let q = self.q_complex(t);
        if q.norm_sqr() == 0.0 {
            return None;
        }
        let l = self.linear[0].to_f64() + t * self.linear[1].to_f64();
        let s = -l / q;
        let (b0, c0) = self.base_f64();
        let b = b0 + s;
        let c = c0 + t * s;
        if !(b.is_finite() && c.is_finite()) {
            return None;
        }
        Some((b, c))
    }

    /// Exact `(b(t), c(t))` at a rational slope, or `None` at a pole.
    pub fn eval_exact(&self, t: &Rational) -> Option<(QuadSurd, QuadSurd)> {
        let d = self.base.0.radicand;
        let q = &self.quadratic[0] + t * (&self.quadratic[1] + t * &self.quadratic[2]);
        if q.is_zero() {
            return None;
        }
        let tt = QuadSurd::from_rational(t.clone(), d);
        let l = &self.linear[0] + &(&self.linear[1] * &tt);
        let s = &(-&l) / &QuadSurd::from_rational(q, d);
        Some((&self.base.0 + &s, &self.base.1 + &(&tt * &s)))
    }

    /// Checks `Q(t)^2 C(b(t), c(t)) = 0` as a polynomial identity in `t`,
    /// with `sqrt d` carried as a symbol `r` reduced by `r^2 = d`.
    pub fn verify_identity(&self, conic: &MultiPoly) -> bool {
        let ring = vars(&["t", "r"]);
        let d = self.base.0.radicand;
        let t = MultiPoly::var(&ring, 0);
        let r = MultiPoly::var(&ring, 1);
        let lift = |x: &QuadSurd| {
            &MultiPoly::constant(&ring, x.rational.clone())
                + &r.scale(&x.irrational)
        };
        let q = &(&MultiPoly::constant(&ring, self.quadratic[0].clone())
            + &t.scale(&self.quadratic[1]))
            + &(&t * &t).scale(&self.quadratic[2]);
        let l = &lift(&self.linear[0]) + &(&t * &lift(&self.linear[1]));
        // homogeneous numerators over the common denominator Q(t)
        let b_num = &(&lift(&self.base.0) * &q) - &l;
        let c_num = &(&lift(&self.base.1) * &q) - &(&t * &l);
        let mut total = MultiPoly::zero(&ring);
        for (m, coef) in conic.terms() {
            let e = m.exponents();
            let term = &(&b_num.pow(e[0]) * &c_num.pow(e[1])) * &q.pow(2 - m.degree());
            total = &total + &term.scale(coef);
        }
        reduce_radical(&total, 1, d).is_zero()
    }

    pub fn describe(&self) -> String {
        format!(
            "(b, c) = ({} + s, {} + t*s), s = -({} + ({})*t) / ({} + {}*t + {}*t^2)",
            self.base.0,
            self.base.1,
            self.linear[0],
            self.linear[1],
            self.quadratic[0],
            self.quadratic[1],
            self.quadratic[2]
        )
    }
}

/// Replaces `r^k` by `d^(k/2) r^(k mod 2)` for the variable `r` at index `var`.
fn reduce_radical(p: &MultiPoly, var: usize, d: i64) -> MultiPoly {
    MultiPoly::from_terms(
        p.vars(),
        p.terms().map(|(m, c)| {
            let mut e = m.exponents().to_vec();
            let k = e[var];
            e[var] = k % 2;
            let mut f = Rational::one();
            for _ in 0..k / 2 {
                f *= rat(d);
            }
            (e, c * f)
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::super::poly::ratio;
    use super::*;

    fn p4() -> MultiPoly {
        MultiPoly::from_int_terms(
            &vars(&["b", "c"]),
            &[
                (&[0, 0], 1),
                (&[1, 0], 3),
                (&[2, 0], 2),
                (&[0, 1], 3),
                (&[1, 1], 3),
                (&[0, 2], 1),
            ],
        )
    }

    fn rational_point(b: Rational, c: Rational) -> (QuadSurd, QuadSurd) {
        (QuadSurd::from_rational(b, 5), QuadSurd::from_rational(c, 5))
    }

    #[test]
    fn projection_from_minus_one_zero() {
        let par = derive_conic_parametrization(&p4(), rational_point(rat(-1), rat(0))).unwrap();
        // b(t) = -(1+3t+t^2)/((t+1)(t+2)), c(t) = t (b(t) + 1)
        for k in [-7i64, -4, 0, 1, 2, 5, 11] {
            let t = ratio(k, 3);
            let (b, c) = par.eval_exact(&t).unwrap();
            let expect_b = -(rat(1) + rat(3) * &t + &t * &t) / ((&t + rat(1)) * (&t + rat(2)));
            assert_eq!(b, QuadSurd::from_rational(expect_b.clone(), 5));
            assert_eq!(c, QuadSurd::from_rational(&t * (expect_b + rat(1)), 5));
        }
        assert!(par.eval_exact(&rat(-1)).is_none());
        assert!(par.eval_exact(&rat(-2)).is_none());
        assert!(par.verify_identity(&p4()));
    }

    #[test]
    fn projection_from_golden_point() {
        let c0 = QuadSurd::new(ratio(-3, 2), ratio(1, 2), 5);
        let base = (QuadSurd::from_rational(rat(0), 5), c0);
        let par = derive_conic_parametrization(&p4(), base).unwrap();
        assert!(par.verify_identity(&p4()));
        let (b1, c1) = par.eval_exact(&rat(1)).unwrap();
        assert!(eval_surd(&p4(), &[b1, c1]).is_zero());
    }

    #[test]
    fn off_curve_base_is_rejected() {
        // (0, (3 + sqrt5)/2) is not on P4
        let base = (
            QuadSurd::from_rational(rat(0), 5),
            QuadSurd::new(ratio(3, 2), ratio(1, 2), 5),
        );
        assert_eq!(
            derive_conic_parametrization(&p4(), base),
            Err(AlgebraError::BaseNotOnCurve)
        );
    }

    #[test]
    fn broken_parametrization_fails_identity() {
        let mut par =
            derive_conic_parametrization(&p4(), rational_point(rat(-1), rat(0))).unwrap();
        par.quadratic[0] = rat(3);
        assert!(!par.verify_identity(&p4()));
    }
}
