//! Dense univariate polynomials over the rationals: squarefree decomposition
//! and rational root extraction.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::poly::{rat, rational_to_f64, MultiPoly, Rational};
use super::roots::complex_roots;

/// Coefficients lowest power first, no trailing zeros.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct UniPoly {
    coeffs: Vec<Rational>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| rat(c)).collect())
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::new(vec![Rational::one()])
    }

    /// `x - r`
    pub fn linear(root: &Rational) -> Self {
        Self::new(vec![-root.clone(), Rational::one()])
    }

    /// Reads a polynomial that uses only variable `var` (others absent).
    pub fn from_multipoly(p: &MultiPoly, var: usize) -> Option<Self> {
        if p.used_vars().iter().any(|&i| i != var) {
            return None;
        }
        let d = p.degree_in(var).unwrap_or(0) as usize;
        let mut coeffs = vec![Rational::zero(); d + 1];
        for (m, c) in p.terms() {
            coeffs[m.exponents()[var] as usize] = c.clone();
        }
        Some(Self::new(coeffs))
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0 as well (check `is_zero`).
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn lc(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * rat(k as i64))
                .collect(),
        )
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let l = self.lc();
        Self::new(self.coeffs.iter().map(|c| c / &l).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new(
            (0..n)
                .map(|k| {
                    let a = self.coeffs.get(k).cloned().unwrap_or_else(Rational::zero);
                    let b = other.coeffs.get(k).cloned().unwrap_or_else(Rational::zero);
                    a + b
                })
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&rat(-1)))
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "division by the zero polynomial");
        let mut r = self.coeffs.clone();
        let dd = d.degree();
        let ld = d.lc();
        if r.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let mut q = vec![Rational::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let t = &r[k + dd] / &ld;
            if !t.is_zero() {
                for (j, c) in d.coeffs.iter().enumerate() {
                    r[k + j] -= &t * c;
                }
            }
            q[k] = t;
        }
        (Self::new(q), Self::new(r))
    }

    /// Monic gcd by the Euclidean algorithm.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r.monic();
        }
        a.monic()
    }

    /// Squarefree decomposition (Yun): factors `(s_i, i)` with
    /// `self = lc * prod s_i^i`, each `s_i` monic, squarefree and pairwise coprime.
    pub fn squarefree(&self) -> Vec<(UniPoly, u32)> {
        let mut out = Vec::new();
        if self.degree() == 0 {
            return out;
        }
        let f = self.monic();
        let df = f.derivative();
        let a0 = f.gcd(&df);
        let mut b = f.div_rem(&a0).0;
        let c = df.div_rem(&a0).0;
        let mut d = c.sub(&b.derivative());
        let mut i = 1;
        while b.degree() > 0 {
            let a = b.gcd(&d);
            let nb = b.div_rem(&a).0;
            let nc = d.div_rem(&a).0;
            if a.degree() > 0 {
                out.push((a.monic(), i));
            }
            d = nc.sub(&nb.derivative());
            b = nb;
            i += 1;
        }
        out
    }

    /// Coprime integer coefficients with positive leading coefficient.
    pub fn primitive_integer(&self) -> Vec<BigInt> {
        let mut lcm = BigInt::one();
        for c in &self.coeffs {
            lcm = lcm.lcm(c.denom());
        }
        let ints: Vec<BigInt> = self
            .coeffs
            .iter()
            .map(|c| c.numer() * (&lcm / c.denom()))
            .collect();
        let mut g = BigInt::zero();
        for n in &ints {
            g = g.gcd(n);
        }
        if g.is_zero() {
            return ints;
        }
        if ints.last().is_some_and(|l| l.is_negative()) {
            g = -g;
        }
        ints.into_iter().map(|n| n / &g).collect()
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        self.coeffs
            .iter()
            .map(|c| Complex64::new(rational_to_f64(c), 0.0))
            .collect()
    }

    /// All distinct rational roots.
    ///
    /// Candidates `p/q` obey the rational root theorem (`q` divides the leading
    /// coefficient, `p` the constant term). When both are small enough to
    /// factor by trial division the candidates are enumerated exhaustively;
    /// otherwise they are read off numerical roots. Every reported root is
    /// verified exactly.
    pub fn rational_roots(&self) -> Vec<Rational> {
        if self.is_zero() || self.degree() == 0 {
            return Vec::new();
        }
        let mut roots = Vec::new();
        let mut p = self.clone();
        if p.coeffs[0].is_zero() {
            roots.push(Rational::zero());
            let k = p.coeffs.iter().position(|c| !c.is_zero()).unwrap_or(0);
            p = Self::new(p.coeffs[k..].to_vec());
        }
        // squarefree part keeps the numeric fallback well conditioned
        let sq = p.div_rem(&p.gcd(&p.derivative())).0;
        if sq.degree() == 0 {
            return roots;
        }
        let ints = sq.primitive_integer();
        let a0 = ints[0].abs();
        let an = ints.last().expect("nonzero polynomial").abs();
        let mut candidates: Vec<Rational> = Vec::new();
        match (small_divisors(&a0), small_divisors(&an)) {
            (Some(ps), Some(qs)) => {
                for pn in &ps {
                    for qd in &qs {
                        for s in [1i64, -1] {
                            candidates.push(Rational::new(pn * s, qd.clone()));
                        }
                    }
                }
            }
            (_, qs) => {
                let qs = qs.unwrap_or_else(|| vec![BigInt::one()]);
                for z in complex_roots(&sq.to_complex()) {
                    if z.im.abs() > 1e-6 * (1.0 + z.re.abs()) {
                        continue;
                    }
                    for qd in &qs {
                        let qf = qd.to_f64().unwrap_or(f64::MAX);
                        if let Some(c) = refine_numerator(&sq, z.re * qf, qd) {
                            candidates.push(c);
                        }
                    }
                }
            }
        }
        for cand in candidates {
            if !roots.contains(&cand) && sq.eval(&cand).is_zero() {
                roots.push(cand);
            }
        }
        roots.sort();
        roots
    }

    /// Removes every rational linear factor; what remains has no rational root.
    pub fn strip_rational_roots(&self) -> (Vec<Rational>, UniPoly) {
        let roots = self.rational_roots();
        let mut rest = self.clone();
        for r in &roots {
            let lin = UniPoly::linear(r);
            loop {
                let (q, rem) = rest.div_rem(&lin);
                if !rem.is_zero() {
                    break;
                }
                rest = q;
            }
        }
        (roots, rest)
    }

    pub fn display_in(&self, var: &str) -> String {
        let v = super::poly::vars(&[var]);
        let p = MultiPoly::from_terms(
            &v,
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| (vec![k as u32], c.clone())),
        );
        p.to_string()
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_in("x"))
    }
}

/// Integer Newton iteration on the numerator `p` of a root `p/q`.
fn refine_numerator(f: &UniPoly, approx: f64, q: &BigInt) -> Option<Rational> {
    let mut p = BigInt::from_f64_checked(approx.round())?;
    let df = f.derivative();
    let qr = Rational::from_integer(q.clone());
    for _ in 0..12 {
        let x = Rational::new(p.clone(), q.clone());
        let v = f.eval(&x);
        if v.is_zero() {
            return Some(x);
        }
        let d = df.eval(&x);
        if d.is_zero() {
            return None;
        }
        let step = (v / d * &qr).round().to_integer();
        if step.is_zero() {
            return None;
        }
        p -= step;
    }
    None
}

trait FromF64Checked: Sized {
    fn from_f64_checked(x: f64) -> Option<Self>;
}

impl FromF64Checked for BigInt {
    fn from_f64_checked(x: f64) -> Option<Self> {
        if x.is_finite() {
            num_traits::FromPrimitive::from_f64(x)
        } else {
            None
        }
    }
}

const TRIAL_LIMIT: u64 = 1_000_000;

/// Positive divisors of `n`, if `n` fits the trial-division budget.
fn small_divisors(n: &BigInt) -> Option<Vec<BigInt>> {
    let mut n = n.to_u64()?;
    if n == 0 {
        return None;
    }
    let mut factors: Vec<(u64, u32)> = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if p > TRIAL_LIMIT {
            return None;
        }
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e > 0 {
            factors.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        factors.push((n, 1));
    }
    let mut divs = vec![1u64];
    for (p, e) in factors {
        let mut next = Vec::with_capacity(divs.len() * (e as usize + 1));
        for d in &divs {
            let mut pk = 1u64;
            for _ in 0..=e {
                next.push(d * pk);
                pk = pk.saturating_mul(p);
            }
        }
        divs = next;
    }
    Some(divs.into_iter().map(BigInt::from).collect())
}

#[cfg(test)]
mod tests {
    use super::super::poly::ratio;
    use super::*;

    #[test]
    fn yun_decomposition() {
        // (x - 1)^2 (x + 2)^3 (x^2 + 1)
        let a = UniPoly::from_ints(&[-1, 1]);
        let b = UniPoly::from_ints(&[2, 1]);
        let c = UniPoly::from_ints(&[1, 0, 1]);
        let f = a.mul(&a).mul(&b).mul(&b).mul(&b).mul(&c).scale(&rat(7));
        let sq = f.squarefree();
        assert_eq!(sq, vec![(c, 1), (a, 2), (b, 3)]);
    }

    #[test]
    fn rational_roots_exact() {
        // (3x - 2)(x + 5)(x^2 - 5)
        let f = UniPoly::from_ints(&[-2, 3])
            .mul(&UniPoly::from_ints(&[5, 1]))
            .mul(&UniPoly::from_ints(&[-5, 0, 1]));
        assert_eq!(f.rational_roots(), vec![rat(-5), ratio(2, 3)]);
        let (_, rest) = f.strip_rational_roots();
        assert_eq!(rest.monic(), UniPoly::from_ints(&[-5, 0, 1]));
    }

    #[test]
    fn zero_root_and_repeated() {
        let f = UniPoly::from_ints(&[0, 0, 1, -2, 1]); // x^2 (x-1)^2
        assert_eq!(f.rational_roots(), vec![rat(0), rat(1)]);
    }

    #[test]
    fn large_coefficients_use_numeric_candidates() {
        let big = 1_000_000_007i64 * 998_244_353;
        // (x - big/7)(x^2 + 3)
        let f = UniPoly::new(vec![-ratio(big, 7), rat(1)]).mul(&UniPoly::from_ints(&[3, 0, 1]));
        assert_eq!(f.rational_roots(), vec![ratio(big, 7)]);
    }
}
