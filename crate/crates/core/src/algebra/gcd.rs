//! Multivariate gcd and resultants over the rationals.
//!
//! Polynomials are viewed recursively as univariate in their first used
//! variable with coefficients in the remaining ones. The gcd runs the
//! subresultant remainder sequence on primitive parts; the content is handled
//! by recursion into the coefficient ring.

use num_traits::{One, Zero};

use super::poly::{rat, MultiPoly, Rational};

/// Monic gcd (leading coefficient one under graded-lex). `gcd(0, 0) = 0`.
pub fn gcd(a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
    assert_eq!(a.vars(), b.vars(), "ring mismatch");
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    let main = a
        .used_vars()
        .into_iter()
        .chain(b.used_vars())
        .min();
    let Some(x) = main else {
        return MultiPoly::one(a.vars());
    };
    let ua = a.to_univariate(x);
    let ub = b.to_univariate(x);
    let ca = content(&ua);
    let cb = content(&ub);
    let c = gcd(&ca, &cb);
    let pa = divide_coeffs(&ua, &ca);
    let pb = divide_coeffs(&ub, &cb);
    let g = if pa.len() >= pb.len() {
        subresultant_gcd(pa, pb)
    } else {
        subresultant_gcd(pb, pa)
    };
    let g = primitive(&g);
    let vars = a.vars().clone();
    (&MultiPoly::from_univariate(&vars, &g, x) * &c).monic()
}

/// Gcd of the coefficients of a recursive univariate polynomial.
fn content(coeffs: &[MultiPoly]) -> MultiPoly {
    let mut g: Option<MultiPoly> = None;
    for c in coeffs.iter().filter(|c| !c.is_zero()) {
        g = Some(match g {
            None => c.monic(),
            Some(g) => gcd(&g, c),
        });
        if g.as_ref().is_some_and(|g| g.is_constant()) {
            break;
        }
    }
    g.unwrap_or_else(|| MultiPoly::one(coeffs[0].vars()))
}

fn primitive(coeffs: &[MultiPoly]) -> Vec<MultiPoly> {
    let c = content(coeffs);
    divide_coeffs(coeffs, &c)
}

fn divide_coeffs(coeffs: &[MultiPoly], d: &MultiPoly) -> Vec<MultiPoly> {
    coeffs
        .iter()
        .map(|c| c.div_exact(d).expect("content divides every coefficient"))
        .collect()
}

fn trim(mut p: Vec<MultiPoly>) -> Vec<MultiPoly> {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

fn deg(p: &[MultiPoly]) -> usize {
    p.len() - 1
}

/// Pseudo-remainder `lc(b)^(deg a - deg b + 1) * a mod b`.
fn prem(a: &[MultiPoly], b: &[MultiPoly]) -> Vec<MultiPoly> {
    let mut r = a.to_vec();
    let db = deg(b);
    let lb = &b[db];
    let mut steps = (deg(a) + 1).saturating_sub(db);
    while !r.is_empty() && r.len() > db {
        let dr = deg(&r);
        let lr = r[dr].clone();
        let shift = dr - db;
        let mut next: Vec<MultiPoly> = r.iter().map(|c| c * lb).collect();
        for (k, bc) in b.iter().enumerate() {
            next[k + shift] = &next[k + shift] - &(bc * &lr);
        }
        r = trim(next);
        steps -= 1;
    }
    if steps > 0 {
        let f = lb.pow(steps as u32);
        r = r.iter().map(|c| c * &f).collect();
    }
    r
}

/// Subresultant PRS gcd of primitive `a`, `b` with `deg a >= deg b`.
fn subresultant_gcd(mut a: Vec<MultiPoly>, mut b: Vec<MultiPoly>) -> Vec<MultiPoly> {
    let vars = a[0].vars().clone();
    let mut g = MultiPoly::one(&vars);
    let mut h = MultiPoly::one(&vars);
    loop {
        let delta = deg(&a) - deg(&b);
        let r = trim(prem(&a, &b));
        if r.is_empty() {
            return b;
        }
        if r.len() == 1 {
            return vec![MultiPoly::one(&vars)];
        }
        let divisor = &g * &h.pow(delta as u32);
        a = b;
        b = r
            .iter()
            .map(|c| c.div_exact(&divisor).expect("subresultant division is exact"))
            .collect();
        g = a[deg(&a)].clone();
        h = if delta == 0 {
            h
        } else {
            g.pow(delta as u32)
                .div_exact(&h.pow(delta as u32 - 1))
                .expect("subresultant h update is exact")
        };
    }
}

/// Resultant of `f` and `g` with respect to variable `x`, computed as the
/// Sylvester determinant by fraction-free (Bareiss) elimination.
pub fn resultant(f: &MultiPoly, g: &MultiPoly, x: usize) -> MultiPoly {
    assert_eq!(f.vars(), g.vars(), "ring mismatch");
    let vars = f.vars().clone();
    if f.is_zero() || g.is_zero() {
        return MultiPoly::zero(&vars);
    }
    let fu = f.to_univariate(x);
    let gu = g.to_univariate(x);
    let (m, n) = (deg(&fu), deg(&gu));
    if m == 0 {
        return fu[0].pow(n as u32);
    }
    if n == 0 {
        return gu[0].pow(m as u32);
    }
    let size = m + n;
    let zero = MultiPoly::zero(&vars);
    let mut rows: Vec<Vec<MultiPoly>> = Vec::with_capacity(size);
    for i in 0..n {
        let mut row = vec![zero.clone(); size];
        for (k, c) in fu.iter().rev().enumerate() {
            row[i + k] = c.clone();
        }
        rows.push(row);
    }
    for i in 0..m {
        let mut row = vec![zero.clone(); size];
        for (k, c) in gu.iter().rev().enumerate() {
            row[i + k] = c.clone();
        }
        rows.push(row);
    }
    bareiss_det(rows)
}

fn bareiss_det(mut a: Vec<Vec<MultiPoly>>) -> MultiPoly {
    let n = a.len();
    let vars = a[0][0].vars().clone();
    let mut sign = Rational::one();
    let mut prev = MultiPoly::one(&vars);
    for k in 0..n {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&r| !a[r][k].is_zero()) else {
                return MultiPoly::zero(&vars);
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &(&a[i][j] * &a[k][k]) - &(&a[i][k] * &a[k][j]);
                a[i][j] = num.div_exact(&prev).expect("Bareiss division is exact");
            }
            a[i][k] = MultiPoly::zero(&vars);
        }
        prev = a[k][k].clone();
    }
    let det = a[n - 1][n - 1].clone();
    if sign == rat(-1) {
        -&det
    } else {
        det
    }
}

/// Whether `a` and `b` are coprime (their gcd is a nonzero constant).
pub fn coprime(a: &MultiPoly, b: &MultiPoly) -> bool {
    let g = gcd(a, b);
    !g.is_zero() && g.is_constant() && !g.constant_term().is_zero()
}

#[cfg(test)]
mod tests {
    use super::super::poly::vars;
    use super::*;

    #[test]
    fn gcd_recovers_common_factor() {
        let v = vars(&["b", "c"]);
        let b = MultiPoly::var(&v, 0);
        let c = MultiPoly::var(&v, 1);
        let one = MultiPoly::one(&v);
        let common = &(&b * &c) + &one;
        let x = &common * &(&b + &c);
        let y = &common * &(&(&b * &b) - &c);
        assert_eq!(gcd(&x, &y), common.monic());
        assert!(coprime(&(&b + &c), &(&b - &c)));
    }

    #[test]
    fn gcd_with_powers() {
        let v = vars(&["a", "b", "c"]);
        let a = MultiPoly::var(&v, 0);
        let b = MultiPoly::var(&v, 1);
        let c = MultiPoly::var(&v, 2);
        let f = &(&a + &b) + &c;
        let x = &f.pow(3) * &(&a - &c);
        let y = &f.pow(2) * &(&b * &b + a.clone());
        assert_eq!(gcd(&x, &y), f.pow(2).monic());
    }

    #[test]
    fn resultant_of_lines() {
        // Res_y(y - x, y + x - 2) = -(2 - 2x) up to sign convention; root x = 1.
        let v = vars(&["x", "y"]);
        let x = MultiPoly::var(&v, 0);
        let y = MultiPoly::var(&v, 1);
        let two = MultiPoly::constant(&v, rat(2));
        let r = resultant(&(&y - &x), &(&(&y + &x) - &two), 1);
        assert_eq!(r.degree_in(1), Some(0));
        let at_one = r.eval(&[rat(1), rat(0)]);
        assert!(at_one.is_zero());
        assert!(!r.is_zero());
    }

    #[test]
    fn resultant_detects_common_root() {
        // Res_y(y^2 - x, y - 1) = 1 - x.
        let v = vars(&["x", "y"]);
        let x = MultiPoly::var(&v, 0);
        let y = MultiPoly::var(&v, 1);
        let one = MultiPoly::one(&v);
        let r = resultant(&(&(&y * &y) - &x), &(&y - &one), 1);
        assert_eq!(r, &one - &x);
    }
}
