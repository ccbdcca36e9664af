//! Exact arithmetic in a real quadratic field `Q(sqrt d)`.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::Zero;

use super::poly::{rat, rational_to_f64, Rational};

/// `rational + irrational * sqrt(radicand)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadSurd {
    pub rational: Rational,
    pub irrational: Rational,
    pub radicand: i64,
}

impl QuadSurd {
    pub fn new(rational: Rational, irrational: Rational, radicand: i64) -> Self {
        assert!(radicand > 1, "radicand must exceed one");
        QuadSurd {
            rational,
            irrational,
            radicand,
        }
    }

    pub fn from_rational(q: Rational, radicand: i64) -> Self {
        Self::new(q, Rational::zero(), radicand)
    }

    pub fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.irrational.is_zero()
    }

    pub fn conjugate(&self) -> Self {
        Self::new(self.rational.clone(), -self.irrational.clone(), self.radicand)
    }

    /// `x^2 - d y^2`, a rational number.
    pub fn norm(&self) -> Rational {
        &self.rational * &self.rational
            - &self.irrational * &self.irrational * rat(self.radicand)
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.rational)
            + rational_to_f64(&self.irrational) * (self.radicand as f64).sqrt()
    }

    fn check(&self, other: &Self) {
        assert_eq!(self.radicand, other.radicand, "mixed quadratic fields");
    }
}

impl Add for &QuadSurd {
    type Output = QuadSurd;
    fn add(self, o: &QuadSurd) -> QuadSurd {
        self.check(o);
        QuadSurd::new(
            &self.rational + &o.rational,
            &self.irrational + &o.irrational,
            self.radicand,
        )
    }
}

impl Sub for &QuadSurd {
    type Output = QuadSurd;
    fn sub(self, o: &QuadSurd) -> QuadSurd {
        self + &(-o)
    }
}

impl Neg for &QuadSurd {
    type Output = QuadSurd;
    fn neg(self) -> QuadSurd {
        QuadSurd::new(-self.rational.clone(), -self.irrational.clone(), self.radicand)
    }
}

impl Mul for &QuadSurd {
    type Output = QuadSurd;
    fn mul(self, o: &QuadSurd) -> QuadSurd {
        self.check(o);
        let d = rat(self.radicand);
        QuadSurd::new(
            &self.rational * &o.rational + &self.irrational * &o.irrational * d,
            &self.rational * &o.irrational + &self.irrational * &o.rational,
            self.radicand,
        )
    }
}

impl Div for &QuadSurd {
    type Output = QuadSurd;
    fn div(self, o: &QuadSurd) -> QuadSurd {
        let n = o.norm();
        assert!(!n.is_zero(), "division by zero in quadratic field");
        let num = self * &o.conjugate();
        QuadSurd::new(num.rational / &n, num.irrational / &n, self.radicand)
    }
}

impl fmt::Display for QuadSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} + {}*sqrt({})",
            self.rational, self.irrational, self.radicand
        )
    }
}

#[cfg(test)]
mod tests {
    use super::super::poly::ratio;
    use super::*;

    #[test]
    fn golden_root_satisfies_quadratic() {
        // c0 = (-3 + sqrt5)/2 solves c^2 + 3c + 1 = 0
        let c0 = QuadSurd::new(ratio(-3, 2), ratio(1, 2), 5);
        let three = QuadSurd::from_rational(rat(3), 5);
        let one = QuadSurd::from_rational(rat(1), 5);
        let v = &(&(&c0 * &c0) + &(&three * &c0)) + &one;
        assert!(v.is_zero());
        let inv = &one / &c0;
        assert_eq!(&inv * &c0, one);
    }
}
