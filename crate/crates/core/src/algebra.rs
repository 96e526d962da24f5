//! Exact division, greatest common divisors and resultants.
//!
//! GCDs use primitive pseudo-remainder sequences in the highest occurring
//! variable, with contents handled recursively in the remaining variables.
//! Resultants are Sylvester determinants evaluated by fraction-free (Bareiss)
//! elimination over the coefficient ring.

use crate::error::{Error, Result};
use crate::poly::{Monomial, MultiPoly};
use crate::scalar::GaussRat;

/// `p / q` when `q` divides `p` exactly, else `None`.
pub fn exact_div(p: &MultiPoly, q: &MultiPoly) -> Option<MultiPoly> {
    assert_eq!(p.nvars(), q.nvars());
    let (lm_q, lc_q) = q.leading_term()?;
    let (lm_q, lc_q) = (lm_q.clone(), lc_q.clone());
    let n = p.nvars();
    if q.is_constant() {
        return Some(p.scale(&lc_q.inv()?));
    }
    let mut rem = p.clone();
    let mut quot = MultiPoly::zero(n);
    while let Some((lm, lc)) = rem.leading_term() {
        let mut e = Vec::with_capacity(n);
        for (a, b) in lm.exps().iter().zip(lm_q.exps()) {
            if a < b {
                return None;
            }
            e.push(a - b);
        }
        let m = Monomial(e);
        let c = lc / &lc_q;
        quot = &quot + &MultiPoly::monomial(m.0.clone(), c.clone());
        rem = &rem - &q.mul_monomial(&m, &c);
    }
    Some(quot)
}

fn highest_var(p: &MultiPoly, q: &MultiPoly) -> Option<usize> {
    (0..p.nvars()).rev().find(|&v| p.involves(v) || q.involves(v))
}

/// Leading coefficient in `var`, as a polynomial free of `var`.
pub fn lead_coeff_in(p: &MultiPoly, var: usize) -> MultiPoly {
    p.as_univariate(var).pop().unwrap_or_else(|| MultiPoly::zero(p.nvars()))
}

/// GCD of the coefficients of `p` viewed as univariate in `var`.
pub fn content_in(p: &MultiPoly, var: usize) -> MultiPoly {
    let mut acc = MultiPoly::zero(p.nvars());
    for c in p.as_univariate(var).into_iter().filter(|c| !c.is_zero()) {
        acc = gcd_inner(&acc, &c);
        if acc.is_constant() && !acc.is_zero() {
            return MultiPoly::one(p.nvars());
        }
    }
    acc
}

pub fn primitive_part_in(p: &MultiPoly, var: usize) -> MultiPoly {
    if p.is_zero() {
        return p.clone();
    }
    let c = content_in(p, var);
    exact_div(p, &c).expect("content divides").monic()
}

/// Pseudo-remainder of `a` by `b` in `var`.
pub fn pseudo_rem(a: &MultiPoly, b: &MultiPoly, var: usize) -> MultiPoly {
    let nv = a.nvars();
    let n = b.degree_in(var);
    if n == 0 {
        return MultiPoly::zero(nv);
    }
    let lc_b = lead_coeff_in(b, var);
    let mut r = a.clone();
    while !r.is_zero() && r.degree_in(var) >= n {
        let dr = r.degree_in(var);
        let lc_r = lead_coeff_in(&r, var);
        let mut shift = vec![0; nv];
        shift[var] = dr - n;
        let t = &lc_r * &MultiPoly::monomial(shift, GaussRat::one());
        r = &(&lc_b * &r) - &(&t * b);
    }
    r
}

fn gcd_inner(p: &MultiPoly, q: &MultiPoly) -> MultiPoly {
    if p.is_zero() {
        return q.monic();
    }
    if q.is_zero() {
        return p.monic();
    }
    let n = p.nvars();
    if crate::modp::certify_coprime(p, q) {
        return MultiPoly::one(n);
    }
    let Some(v) = highest_var(p, q) else {
        return MultiPoly::one(n);
    };
    match (p.involves(v), q.involves(v)) {
        (true, false) => return gcd_inner(&content_in(p, v), q),
        (false, true) => return gcd_inner(p, &content_in(q, v)),
        _ => {}
    }
    let cp = content_in(p, v);
    let cq = content_in(q, v);
    let c = gcd_inner(&cp, &cq);
    let mut a = exact_div(p, &cp).expect("content divides");
    let mut b = exact_div(q, &cq).expect("content divides");
    if a.degree_in(v) < b.degree_in(v) {
        std::mem::swap(&mut a, &mut b);
    }
    let g = loop {
        let r = pseudo_rem(&a, &b, v);
        if r.is_zero() {
            break primitive_part_in(&b, v);
        }
        if !r.involves(v) {
            break MultiPoly::one(n);
        }
        a = b;
        b = primitive_part_in(&r, v);
    };
    (&c * &g).monic()
}

/// Greatest common divisor, normalized so its lexicographically leading
/// coefficient is 1. A constant result means no common factor.
pub fn gcd_poly(p: &MultiPoly, q: &MultiPoly) -> Result<MultiPoly> {
    if p.nvars() != q.nvars() {
        return Err(Error::DimensionMismatch { expected: p.nvars(), got: q.nvars() });
    }
    if p.is_zero() && q.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    Ok(gcd_inner(p, q))
}

/// GCD of a list of polynomials, skipping zeros. `None` if all are zero.
pub fn gcd_many(ps: &[MultiPoly]) -> Option<MultiPoly> {
    let mut it = ps.iter().filter(|p| !p.is_zero());
    let first = it.next()?.monic();
    Some(it.fold(first, |acc, p| gcd_inner(&acc, p)))
}

/// Determinant by Bareiss fraction-free elimination over ℚ(i)[vars].
pub fn det_bareiss(mut m: Vec<Vec<MultiPoly>>, nvars: usize) -> MultiPoly {
    let n = m.len();
    if n == 0 {
        return MultiPoly::one(nvars);
    }
    let mut sign = false;
    let mut prev = MultiPoly::one(nvars);
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    sign = !sign;
                }
                None => return MultiPoly::zero(nvars),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &(&m[i][j] * &m[k][k]) - &(&m[i][k] * &m[k][j]);
                m[i][j] = exact_div(&num, &prev).expect("Bareiss division is exact");
            }
            m[i][k] = MultiPoly::zero(nvars);
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if sign { -&d } else { d }
}

/// Sylvester matrix of `p` and `q` in `var`: `deg q` rows of p's coefficients
/// (highest degree first) on top, then `deg p` rows of q's.
pub fn sylvester_matrix(p: &MultiPoly, q: &MultiPoly, var: usize) -> Vec<Vec<MultiPoly>> {
    let nv = p.nvars();
    let m = p.degree_in(var) as usize;
    let n = q.degree_in(var) as usize;
    let size = m + n;
    let pc = p.as_univariate(var);
    let qc = q.as_univariate(var);
    let mut rows = Vec::with_capacity(size);
    for r in 0..n {
        let mut row = vec![MultiPoly::zero(nv); size];
        for (k, c) in pc.iter().rev().enumerate() {
            row[r + k] = c.clone();
        }
        rows.push(row);
    }
    for r in 0..m {
        let mut row = vec![MultiPoly::zero(nv); size];
        for (k, c) in qc.iter().rev().enumerate() {
            row[r + k] = c.clone();
        }
        rows.push(row);
    }
    rows
}

/// Resultant of `p` and `q` with respect to `var`, as the Sylvester
/// determinant with p's rows on top. With this convention
/// `Res(y − a, y − b) = a − b`. If exactly one input is constant in `var` the
/// result is that constant raised to the other's degree.
pub fn resultant(p: &MultiPoly, q: &MultiPoly, var: usize) -> Result<MultiPoly> {
    if p.nvars() != q.nvars() {
        return Err(Error::DimensionMismatch { expected: p.nvars(), got: q.nvars() });
    }
    if var >= p.nvars() {
        return Err(Error::VariableOutOfRange { index: var, nvars: p.nvars() });
    }
    if p.is_zero() || q.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let m = p.degree_in(var);
    let n = q.degree_in(var);
    match (m, n) {
        (0, 0) => Err(Error::ConstantInVariable { var }),
        (0, _) => Ok(p.pow(n)),
        (_, 0) => Ok(q.pow(m)),
        _ => Ok(det_bareiss(sylvester_matrix(p, q, var), p.nvars())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_poly;

    fn pp(s: &str, vars: &[&str]) -> MultiPoly {
        parse_poly(s, vars).unwrap()
    }

    const XYZ: [&str; 3] = ["x", "y", "z"];

    #[test]
    fn exact_division() {
        let p = pp("x^2*y - y^3", &XYZ);
        let q = pp("x - y", &XYZ);
        let d = exact_div(&p, &q).unwrap();
        assert_eq!(d, pp("x*y + y^2", &XYZ));
        assert!(exact_div(&p, &pp("x + z", &XYZ)).is_none());
    }

    #[test]
    fn gcd_examples() {
        let g = gcd_poly(&pp("x*y", &XYZ), &pp("x*z", &XYZ)).unwrap();
        assert_eq!(g, pp("x", &XYZ));
        let g = gcd_poly(&pp("y^3", &XYZ), &pp("z^3", &XYZ)).unwrap();
        assert!(g.is_constant());
        assert!(gcd_poly(&MultiPoly::zero(3), &MultiPoly::zero(3)).is_err());
        let g = gcd_poly(&MultiPoly::zero(3), &pp("2*x+2", &XYZ)).unwrap();
        assert_eq!(g, pp("x+1", &XYZ));
    }

    #[test]
    fn gcd_recovers_shared_factor() {
        let r = pp("x*y - z^2 + i", &XYZ);
        let p = &pp("x^2 + y", &XYZ) * &r;
        let q = &pp("y*z - 3", &XYZ) * &r;
        let g = gcd_poly(&p, &q).unwrap();
        assert_eq!(g, r.monic());
    }

    #[test]
    fn resultant_linear_pair() {
        let vars = ["a", "b", "y"];
        let r = resultant(&pp("y - a", &vars), &pp("y - b", &vars), 2).unwrap();
        assert_eq!(r, pp("a - b", &vars));
    }

    #[test]
    fn resultant_with_monomial() {
        let vars = ["x", "y"];
        let r = resultant(&pp("y^2 - x", &vars), &pp("y", &vars), 1).unwrap();
        assert_eq!(r, pp("-x", &vars));
    }

    #[test]
    fn resultant_vanishes_on_shared_factor() {
        let p = pp("x*y + z", &XYZ);
        let q = &p * &pp("y^2 - x", &XYZ);
        assert!(resultant(&p, &q, 1).unwrap().is_zero());
    }

    #[test]
    fn resultant_constant_cases() {
        let vars = ["x", "y"];
        let r = resultant(&pp("2*x", &vars), &pp("y^3 + 1", &vars), 1).unwrap();
        assert_eq!(r, pp("8*x^3", &vars));
        assert!(matches!(
            resultant(&pp("x", &vars), &pp("x+1", &vars), 1),
            Err(Error::ConstantInVariable { var: 1 })
        ));
        assert!(matches!(resultant(&MultiPoly::zero(2), &pp("y", &vars), 1), Err(Error::ZeroPolynomial)));
    }
}
