//! Modular shortcuts for gcd questions over ℚ(i).
//!
//! For a prime `p ≡ 1 (mod 4)` the map `i ↦ √−1 mod p` sends ℚ(i) (minus
//! elements with `p` in a denominator) onto `F_p`. If `p` divides no
//! denominator and not the leading coefficient, the image of `gcd(a, b)`
//! divides `gcd(a mod p, b mod p)`, so a constant modular gcd certifies a
//! constant exact gcd. A nonconstant modular gcd proves nothing and callers
//! fall back to exact arithmetic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::poly::MultiPoly;
use crate::roots::UPoly;
use crate::scalar::GaussRat;

/// `998244353 = 119·2²³ + 1`, with primitive root 3.
const P: u64 = 998_244_353;

fn mul(a: u64, b: u64) -> u64 {
    a * b % P
}

fn pow(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mul(r, a);
        }
        a = mul(a, a);
        e >>= 1;
    }
    r
}

fn inv(a: u64) -> u64 {
    pow(a, P - 2)
}

fn sqrt_minus_one() -> u64 {
    pow(3, (P - 1) / 4)
}

fn int_mod(n: &BigInt) -> u64 {
    let r = (n % BigInt::from(P)).to_i64().expect("reduced");
    r.rem_euclid(P as i64) as u64
}

fn rat_mod(q: &BigRational) -> Option<u64> {
    let d = int_mod(q.denom());
    (d != 0).then(|| mul(int_mod(q.numer()), inv(d)))
}

fn reduce(g: &GaussRat) -> Option<u64> {
    Some((rat_mod(&g.re)? + mul(rat_mod(&g.im)?, sqrt_minus_one())) % P)
}

fn trim(mut a: Vec<u64>) -> Vec<u64> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

/// Degree of the monic gcd in `F_p[x]`; coefficients lowest first, both nonzero.
fn gcd_degree(a: Vec<u64>, b: Vec<u64>) -> usize {
    let (mut a, mut b) = (trim(a), trim(b));
    while !b.is_empty() {
        let lc_inv = inv(*b.last().expect("nonempty"));
        while a.len() >= b.len() {
            let q = mul(*a.last().expect("nonempty"), lc_inv);
            let shift = a.len() - b.len();
            for (k, c) in b.iter().enumerate() {
                a[k + shift] = (a[k + shift] + P - mul(q, *c)) % P;
            }
            a = trim(a);
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len().saturating_sub(1)
}

fn reduce_all(c: &[GaussRat]) -> Option<Vec<u64>> {
    c.iter().map(reduce).collect()
}

/// `true` certifies that `u` is square-free; `false` is inconclusive.
pub fn certify_squarefree(u: &UPoly) -> bool {
    if u.degree() <= 1 {
        return true;
    }
    let Some(a) = reduce_all(&u.0) else { return false };
    if a.last() == Some(&0) {
        return false;
    }
    let da: Vec<u64> = a.iter().enumerate().skip(1).map(|(k, c)| mul(k as u64 % P, *c)).collect();
    gcd_degree(a, da) == 0
}

/// Dense coefficients in `var` after fixing every other variable.
fn specialize(p: &MultiPoly, var: usize, values: &[u64]) -> Option<Vec<u64>> {
    let mut c = vec![0u64; p.degree_in(var) as usize + 1];
    for (m, a) in p.terms() {
        let mut t = reduce(a)?;
        for (k, &e) in m.exps().iter().enumerate() {
            if k != var {
                t = mul(t, pow(values[k], e as u64));
            }
        }
        let slot = &mut c[m.exps()[var] as usize];
        *slot = (*slot + t) % P;
    }
    Some(c)
}

/// `true` certifies that `a` and `b` share no nonconstant factor; `false`
/// is inconclusive. A common factor involves some variable `v`; fixing the
/// others at a point where both `v`-leading coefficients survive keeps its
/// `v`-degree, so a constant univariate gcd for every `v` rules it out.
pub fn certify_coprime(a: &MultiPoly, b: &MultiPoly) -> bool {
    let n = a.nvars();
    if n != b.nvars() || a.is_zero() || b.is_zero() {
        return false;
    }
    if a.is_constant() || b.is_constant() {
        return true;
    }
    // Fixed, spread-out evaluation points; several tries per variable.
    let seeds: [u64; 4] = [1_000_003, 7_777_777, 123_456_789, 31_415_926];
    'var: for v in 0..n {
        if !a.involves(v) && !b.involves(v) {
            continue;
        }
        if !a.involves(v) || !b.involves(v) {
            // A factor involving v would divide both; one side lacks v.
            continue;
        }
        for s in seeds {
            let values: Vec<u64> = (0..n).map(|k| pow(s, k as u64 + 1)).collect();
            let (Some(ca), Some(cb)) = (specialize(a, v, &values), specialize(b, v, &values)) else {
                return false;
            };
            if ca.last() == Some(&0) || cb.last() == Some(&0) {
                continue;
            }
            if gcd_degree(ca, cb) == 0 {
                continue 'var;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_poly;

    fn up(c: &[i64]) -> UPoly {
        UPoly::new(c.iter().map(|&k| GaussRat::from_int(k)).collect())
    }

    #[test]
    fn unit_is_a_square_root_of_minus_one() {
        let i = sqrt_minus_one();
        assert_eq!(mul(i, i), P - 1);
        assert_eq!(reduce(&GaussRat::i()), Some(i));
    }

    #[test]
    fn squarefree_certificates() {
        assert!(certify_squarefree(&up(&[-1, 0, 1])));
        assert!(!certify_squarefree(&up(&[1, 2, 1])));
        // x² + 1 = (x − i)(x + i) is square-free over ℚ(i).
        assert!(certify_squarefree(&up(&[1, 0, 1])));
    }

    #[test]
    fn coprime_certificates() {
        let v = ["x", "y", "z"];
        let p = |s: &str| parse_poly(s, &v).unwrap();
        assert!(certify_coprime(&p("x^2 + y^2 - z^2"), &p("x - 2*y")));
        assert!(!certify_coprime(&p("x*(y - z)"), &p("y*(y - z)")));
        assert!(!certify_coprime(&p("z*y^2"), &p("z*x")));
        assert!(certify_coprime(&p("y^3"), &p("z^3")));
    }
}
