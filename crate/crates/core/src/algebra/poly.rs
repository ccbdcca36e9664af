//! Sparse multivariate polynomials with exact rational coefficients.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

/// Ordered variable names shared between polynomials of one ring.
pub type Vars = Arc<[String]>;

pub fn vars(names: &[&str]) -> Vars {
    names.iter().map(|s| s.to_string()).collect::<Vec<_>>().into()
}

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Exponent vector. Ordered graded-lexicographically: total degree first,
/// then lexicographically with the first variable largest.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    fn div(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Values a polynomial can be evaluated at.
pub trait Scalar: Clone {
    fn zero_value() -> Self;
    fn one_value() -> Self;
    fn from_rational(q: &Rational) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
}

impl Scalar for Rational {
    fn zero_value() -> Self {
        Zero::zero()
    }
    fn one_value() -> Self {
        One::one()
    }
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // numerator or denominator too large for f64 on its own
        let shift = q.numer().bits().max(q.denom().bits()) as i64 - 900;
        let (n, d) = if shift > 0 {
            (q.numer() >> shift as usize, q.denom() >> shift as usize)
        } else {
            (q.numer().clone(), q.denom().clone())
        };
        n.to_f64().unwrap_or(0.0) / d.to_f64().unwrap_or(1.0)
    })
}

impl Scalar for f64 {
    fn zero_value() -> Self {
        0.0
    }
    fn one_value() -> Self {
        1.0
    }
    fn from_rational(q: &Rational) -> Self {
        rational_to_f64(q)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
}

impl Scalar for Complex64 {
    fn zero_value() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one_value() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_rational(q: &Rational) -> Self {
        Complex64::new(rational_to_f64(q), 0.0)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct MultiPoly {
    vars: Vars,
    terms: BTreeMap<Monomial, Rational>,
}

impl MultiPoly {
    pub fn zero(vars: &Vars) -> Self {
        MultiPoly {
            vars: vars.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: &Vars, c: Rational) -> Self {
        let mut p = Self::zero(vars);
        if !c.is_zero() {
            p.terms.insert(Monomial(vec![0; vars.len()]), c);
        }
        p
    }

    pub fn one(vars: &Vars) -> Self {
        Self::constant(vars, Rational::one())
    }

    pub fn var(vars: &Vars, i: usize) -> Self {
        let mut e = vec![0; vars.len()];
        e[i] = 1;
        Self::monomial(vars, e, Rational::one())
    }

    pub fn monomial(vars: &Vars, exponents: Vec<u32>, c: Rational) -> Self {
        assert_eq!(exponents.len(), vars.len(), "exponent arity mismatch");
        let mut p = Self::zero(vars);
        if !c.is_zero() {
            p.terms.insert(Monomial(exponents), c);
        }
        p
    }

    pub fn from_terms<I>(vars: &Vars, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u32>, Rational)>,
    {
        let mut p = Self::zero(vars);
        for (e, c) in terms {
            assert_eq!(e.len(), vars.len(), "exponent arity mismatch");
            p.add_term(Monomial(e), c);
        }
        p
    }

    /// Integer-coefficient convenience constructor.
    pub fn from_int_terms(vars: &Vars, terms: &[(&[u32], i64)]) -> Self {
        Self::from_terms(vars, terms.iter().map(|(e, c)| (e.to_vec(), rat(*c))))
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.degree() == 0)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exponents: &[u32]) -> Rational {
        self.terms
            .get(&Monomial(exponents.to_vec()))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(&vec![0; self.nvars()])
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    /// Lowest total degree among the stored terms.
    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).min()
    }

    pub fn degree_in(&self, i: usize) -> Option<u32> {
        self.terms.keys().map(|m| m.0[i]).max()
    }

    pub fn leading(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coeff(&self) -> Rational {
        self.leading()
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Rational::zero)
    }

    pub fn homogeneous_part(&self, d: u32) -> Self {
        MultiPoly {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == d)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        match self.total_degree() {
            None => true,
            Some(d) => self.terms.keys().all(|m| m.degree() == d),
        }
    }

    /// Variables that occur with positive exponent.
    pub fn used_vars(&self) -> Vec<usize> {
        (0..self.nvars())
            .filter(|&i| self.terms.keys().any(|m| m.0[i] > 0))
            .collect()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(&self.vars);
        }
        MultiPoly {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (m.clone(), v * c))
                .collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut result = Self::one(&self.vars);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub fn derivative(&self, i: usize) -> Self {
        let mut p = Self::zero(&self.vars);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut n = m.0.clone();
            n[i] -= 1;
            p.add_term(Monomial(n), c * rat(e as i64));
        }
        p
    }

    pub fn eval<T: Scalar>(&self, point: &[T]) -> T {
        assert_eq!(point.len(), self.nvars(), "evaluation point arity");
        let mut powers: Vec<Vec<T>> = Vec::with_capacity(point.len());
        for (i, x) in point.iter().enumerate() {
            let d = self.degree_in(i).unwrap_or(0) as usize;
            let mut pw = Vec::with_capacity(d + 1);
            pw.push(T::one_value());
            for k in 1..=d {
                let next = pw[k - 1].mul(x);
                pw.push(next);
            }
            powers.push(pw);
        }
        let mut acc = T::zero_value();
        for (m, c) in &self.terms {
            let mut t = T::from_rational(c);
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t = t.mul(&powers[i][e as usize]);
                }
            }
            acc = acc.add(&t);
        }
        acc
    }

    /// Replaces every variable by a polynomial over `target`.
    pub fn compose(&self, target: &Vars, images: &[MultiPoly]) -> Self {
        assert_eq!(images.len(), self.nvars(), "one image per variable");
        let mut powers: Vec<Vec<MultiPoly>> = Vec::with_capacity(images.len());
        for (i, img) in images.iter().enumerate() {
            assert_eq!(img.vars, *target, "image lives in the target ring");
            let d = self.degree_in(i).unwrap_or(0) as usize;
            let mut pw = vec![MultiPoly::one(target)];
            for k in 1..=d {
                let next = &pw[k - 1] * img;
                pw.push(next);
            }
            powers.push(pw);
        }
        let mut acc = MultiPoly::zero(target);
        for (m, c) in &self.terms {
            let mut t = MultiPoly::constant(target, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t = &t * &powers[i][e as usize];
                }
            }
            acc = &acc + &t;
        }
        acc
    }

    /// Substitutes variable `i` by `value` (a polynomial in the same ring).
    pub fn substitute(&self, i: usize, value: &MultiPoly) -> Self {
        let images: Vec<MultiPoly> = (0..self.nvars())
            .map(|k| {
                if k == i {
                    value.clone()
                } else {
                    MultiPoly::var(&self.vars, k)
                }
            })
            .collect();
        self.compose(&self.vars.clone(), &images)
    }

    /// Re-expresses the polynomial over another variable list, matching by name.
    /// Panics if a variable in use is absent from `target`.
    pub fn with_vars(&self, target: &Vars) -> Self {
        let map: Vec<Option<usize>> = self
            .vars
            .iter()
            .map(|v| target.iter().position(|t| t == v))
            .collect();
        let mut p = MultiPoly::zero(target);
        for (m, c) in &self.terms {
            let mut e = vec![0; target.len()];
            for (i, &x) in m.0.iter().enumerate() {
                if x > 0 {
                    let j = map[i].unwrap_or_else(|| {
                        panic!("variable {} missing from target ring", self.vars[i])
                    });
                    e[j] += x;
                }
            }
            p.add_term(Monomial(e), c.clone());
        }
        p
    }

    /// Exact quotient, or `None` when `divisor` does not divide `self`.
    pub fn div_exact(&self, divisor: &MultiPoly) -> Option<MultiPoly> {
        assert_eq!(self.vars, divisor.vars, "ring mismatch");
        let (lm, lc) = divisor.leading()?;
        let (lm, lc) = (lm.clone(), lc.clone());
        let mut rem = self.clone();
        let mut quot = MultiPoly::zero(&self.vars);
        while let Some((m, c)) = rem.leading() {
            if !lm.divides(m) {
                return None;
            }
            let qm = m.div(&lm);
            let qc = c / &lc;
            for (dm, dc) in &divisor.terms {
                rem.add_term(dm.mul(&qm), -(dc * &qc));
            }
            quot.add_term(qm, qc);
        }
        Some(quot)
    }

    /// Coefficients of the powers of variable `i`, lowest power first.
    pub fn to_univariate(&self, i: usize) -> Vec<MultiPoly> {
        let d = self.degree_in(i).unwrap_or(0) as usize;
        let mut coeffs = vec![MultiPoly::zero(&self.vars); d + 1];
        if self.is_zero() {
            return Vec::new();
        }
        for (m, c) in &self.terms {
            let k = m.0[i] as usize;
            let mut e = m.0.clone();
            e[i] = 0;
            coeffs[k].add_term(Monomial(e), c.clone());
        }
        coeffs
    }

    pub fn from_univariate(vars: &Vars, coeffs: &[MultiPoly], i: usize) -> Self {
        let mut p = MultiPoly::zero(vars);
        for (k, c) in coeffs.iter().enumerate() {
            for (m, v) in &c.terms {
                let mut e = m.0.clone();
                e[i] += k as u32;
                p.add_term(Monomial(e), v.clone());
            }
        }
        p
    }

    /// Splits `self = scale * primitive`, where `primitive` has coprime integer
    /// coefficients and a positive leading coefficient.
    pub fn primitive_integer(&self) -> (Rational, MultiPoly) {
        if self.is_zero() {
            return (Rational::zero(), self.clone());
        }
        let mut den_lcm = BigInt::one();
        for c in self.terms.values() {
            den_lcm = den_lcm.lcm(c.denom());
        }
        let mut num_gcd = BigInt::zero();
        for c in self.terms.values() {
            let n = c.numer() * (&den_lcm / c.denom());
            num_gcd = num_gcd.gcd(&n);
        }
        let mut scale = Rational::new(num_gcd, den_lcm);
        if self.leading_coeff().is_negative() {
            scale = -scale;
        }
        let prim = self.scale(&scale.recip());
        (scale, prim)
    }

    /// Scales so the leading coefficient is one.
    pub fn monic(&self) -> MultiPoly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&self.leading_coeff().recip())
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.vars, rhs.vars, "ring mismatch");
        let mut p = self.clone();
        for (m, c) in &rhs.terms {
            p.add_term(m.clone(), c.clone());
        }
        p
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.vars, rhs.vars, "ring mismatch");
        let mut p = self.clone();
        for (m, c) in &rhs.terms {
            p.add_term(m.clone(), -c.clone());
        }
        p
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.vars, rhs.vars, "ring mismatch");
        let mut p = MultiPoly::zero(&self.vars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                p.add_term(ma.mul(mb), ca * cb);
            }
        }
        p
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        self.scale(&rat(-1))
    }
}

impl Add for MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: MultiPoly) -> MultiPoly {
        &self + &rhs
    }
}

impl Sub for MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: MultiPoly) -> MultiPoly {
        &self - &rhs
    }
}

impl Mul for MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: MultiPoly) -> MultiPoly {
        &self * &rhs
    }
}

impl fmt::Display for MultiPoly {
    /// Ascending total degree; within one degree, the first variable's
    /// highest powers come first. Example: `1 + 3*b + 3*c + 2*b^2 + 3*b*c + c^2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut by_degree: BTreeMap<u32, Vec<(&Monomial, &Rational)>> = BTreeMap::new();
        for (m, c) in &self.terms {
            by_degree.entry(m.degree()).or_default().push((m, c));
        }
        let mut first = true;
        for terms in by_degree.values() {
            for (m, c) in terms.iter().rev() {
                let neg = c.is_negative();
                let abs = c.abs();
                if first {
                    if neg {
                        write!(f, "-")?;
                    }
                } else {
                    write!(f, " {} ", if neg { '-' } else { '+' })?;
                }
                first = false;
                let factors: Vec<String> = m
                    .0
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| {
                        if e == 1 {
                            self.vars[i].clone()
                        } else {
                            format!("{}^{}", self.vars[i], e)
                        }
                    })
                    .collect();
                if factors.is_empty() {
                    write!(f, "{abs}")?;
                } else if abs.is_one() {
                    write!(f, "{}", factors.join("*"))?;
                } else {
                    write!(f, "{abs}*{}", factors.join("*"))?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiPoly[{}]({})", self.vars.join(","), self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bc() -> Vars {
        vars(&["b", "c"])
    }

    #[test]
    fn grlex_order() {
        let b2 = Monomial::new(vec![2, 0]);
        let bc = Monomial::new(vec![1, 1]);
        let c3 = Monomial::new(vec![0, 3]);
        assert!(b2 > bc);
        assert!(c3 > b2);
    }

    #[test]
    fn display_is_canonical() {
        let v = bc();
        let b = MultiPoly::var(&v, 0);
        let c = MultiPoly::var(&v, 1);
        let p3 = &(&MultiPoly::one(&v) + &b) + &c;
        assert_eq!(p3.to_string(), "1 + b + c");
        let q = &(&b * &b).scale(&ratio(-3, 2)) + &c;
        assert_eq!(q.to_string(), "c - 3/2*b^2");
        assert_eq!(MultiPoly::zero(&v).to_string(), "0");
    }

    #[test]
    fn cancellation_leaves_no_zero_terms() {
        let v = bc();
        let b = MultiPoly::var(&v, 0);
        let z = &b - &b;
        assert!(z.is_zero());
        assert_eq!(z.num_terms(), 0);
    }

    #[test]
    fn exact_division() {
        let v = bc();
        let b = MultiPoly::var(&v, 0);
        let c = MultiPoly::var(&v, 1);
        let p = &(&b + &c) * &(&b - &c);
        assert_eq!(p.div_exact(&(&b + &c)).unwrap(), &b - &c);
        assert!(p.div_exact(&(&b + &MultiPoly::one(&v))).is_none());
    }

    #[test]
    fn substitution_and_derivative() {
        let v = bc();
        let b = MultiPoly::var(&v, 0);
        let c = MultiPoly::var(&v, 1);
        let p = &(&b * &b) * &c;
        assert_eq!(p.derivative(0), (&b * &c).scale(&rat(2)));
        let s = p.substitute(1, &(&b + &MultiPoly::one(&v)));
        assert_eq!(s, &(&(&b * &b) * &b) + &(&b * &b));
    }

    #[test]
    fn univariate_round_trip() {
        let v = bc();
        let p = MultiPoly::from_int_terms(&v, &[(&[2, 1], 3), (&[0, 2], -1), (&[1, 0], 5)]);
        let u = p.to_univariate(0);
        assert_eq!(u.len(), 3);
        assert_eq!(MultiPoly::from_univariate(&v, &u, 0), p);
    }

    #[test]
    fn primitive_part() {
        let v = bc();
        let p = MultiPoly::from_terms(&v, [(vec![1, 0], ratio(-2, 3)), (vec![0, 0], ratio(4, 9))]);
        let (s, q) = p.primitive_integer();
        assert_eq!(q, MultiPoly::from_int_terms(&v, &[(&[1, 0], 3), (&[0, 0], -2)]));
        assert_eq!(q.scale(&s), p);
    }
}
