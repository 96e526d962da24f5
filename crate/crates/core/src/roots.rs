//! Univariate root finding.
//!
//! Multiplicities come from an exact square-free decomposition (Yun's
//! algorithm over ℚ(i)); only root locations are numeric, from
//! Aberth–Ehrlich iteration on each square-free factor followed by Newton
//! polishing. Roots of different factors are never merged.

use crate::error::{Error, Result};
use crate::poly::MultiPoly;
use crate::scalar::{ComplexF, GaussRat};

/// Dense univariate polynomial over ℚ(i), lowest degree first, no trailing zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct UPoly(pub Vec<GaussRat>);

impl UPoly {
    pub fn new(mut c: Vec<GaussRat>) -> Self {
        while c.last().is_some_and(GaussRat::is_zero) {
            c.pop();
        }
        UPoly(c)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn lc(&self) -> &GaussRat {
        self.0.last().expect("nonzero polynomial")
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let inv = self.lc().inv().expect("nonzero");
        UPoly(self.0.iter().map(|c| c * &inv).collect())
    }

    pub fn derivative(&self) -> Self {
        UPoly::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * &GaussRat::from_int(k as i64))
                .collect(),
        )
    }

    /// Quotient and remainder.
    pub fn div_rem(&self, d: &UPoly) -> (UPoly, UPoly) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let mut r = self.0.clone();
        let dd = d.degree();
        if r.len() < d.0.len() {
            return (UPoly(vec![]), self.clone());
        }
        let inv = d.lc().inv().expect("nonzero");
        let mut q = vec![GaussRat::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let c = &r[k + dd] * &inv;
            if !c.is_zero() {
                for (j, dc) in d.0.iter().enumerate() {
                    let t = &c * dc;
                    r[k + j] -= &t;
                }
            }
            q[k] = c;
        }
        r.truncate(dd);
        (UPoly::new(q), UPoly::new(r))
    }

    pub fn gcd(&self, other: &UPoly) -> UPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r.monic();
        }
        a.monic()
    }

    pub fn sub(&self, o: &UPoly) -> UPoly {
        let n = self.0.len().max(o.0.len());
        UPoly::new(
            (0..n)
                .map(|k| {
                    let a = self.0.get(k).cloned().unwrap_or_else(GaussRat::zero);
                    let b = o.0.get(k).cloned().unwrap_or_else(GaussRat::zero);
                    &a - &b
                })
                .collect(),
        )
    }

    pub fn to_complex(&self) -> Vec<ComplexF> {
        self.0.iter().map(GaussRat::to_complex).collect()
    }

    /// Square-free factors `(factor, multiplicity)` with Σ mult·deg = deg.
    pub fn square_free(&self) -> Vec<(UPoly, usize)> {
        let mut out = Vec::new();
        if self.degree() == 0 {
            return out;
        }
        if crate::modp::certify_squarefree(self) {
            return vec![(self.monic(), 1)];
        }
        let f = self.monic();
        let fp = f.derivative();
        let a0 = f.gcd(&fp);
        let mut b = f.div_rem(&a0).0;
        let c = fp.div_rem(&a0).0;
        let mut d = c.sub(&b.derivative());
        let mut i = 1;
        while b.degree() > 0 {
            let a = b.gcd(&d);
            let nb = b.div_rem(&a).0;
            let c = d.div_rem(&a).0;
            if a.degree() > 0 {
                out.push((a, i));
            }
            d = c.sub(&nb.derivative());
            b = nb;
            i += 1;
        }
        out
    }
}

/// Extract the dense univariate form of a polynomial that involves at most
/// the variable `var`.
pub fn to_upoly(p: &MultiPoly, var: usize) -> Option<UPoly> {
    let mut c = vec![GaussRat::zero(); p.degree_in(var) as usize + 1];
    for (m, a) in p.terms() {
        if m.exps().iter().enumerate().any(|(k, &e)| k != var && e > 0) {
            return None;
        }
        c[m.exps()[var] as usize] = a.clone();
    }
    Some(UPoly::new(c))
}

fn horner(c: &[ComplexF], z: ComplexF) -> (ComplexF, ComplexF) {
    let mut p = ComplexF::new(0.0, 0.0);
    let mut dp = ComplexF::new(0.0, 0.0);
    for &a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// All complex roots (with repetition) of a float-coefficient polynomial,
/// lowest degree first. Leading zeros are trimmed.
pub fn numeric_roots(coeffs: &[ComplexF]) -> Vec<ComplexF> {
    let mut c: Vec<ComplexF> = coeffs.to_vec();
    while c.last().is_some_and(|z| z.norm() == 0.0) {
        c.pop();
    }
    let n = c.len().saturating_sub(1);
    if n == 0 {
        return vec![];
    }
    let mut zeros_at_origin = 0;
    while c[0].norm() == 0.0 {
        c.remove(0);
        zeros_at_origin += 1;
    }
    let deg = c.len() - 1;
    let mut roots = vec![ComplexF::new(0.0, 0.0); zeros_at_origin];
    if deg == 0 {
        return roots;
    }
    let lc = c[deg];
    if deg == 1 {
        roots.push(-c[0] / lc);
        return roots;
    }
    // Initial guesses on a circle sized by the Fujiwara-like bound.
    let radius = (0..deg)
        .map(|k| (c[k] / lc).norm().powf(1.0 / (deg - k) as f64))
        .fold(0.0, f64::max)
        .max(1e-3);
    let mut z: Vec<ComplexF> = (0..deg)
        .map(|k| {
            ComplexF::from_polar(radius, 2.0 * std::f64::consts::PI * k as f64 / deg as f64 + 0.4)
        })
        .collect();
    for _ in 0..500 {
        let mut max_step: f64 = 0.0;
        for k in 0..deg {
            let (p, dp) = horner(&c, z[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let mut s = ComplexF::new(0.0, 0.0);
            for j in 0..deg {
                if j != k {
                    s += 1.0 / (z[k] - z[j]);
                }
            }
            let step = ratio / (1.0 - ratio * s);
            if step.re.is_finite() && step.im.is_finite() {
                z[k] -= step;
                max_step = max_step.max(step.norm() / z[k].norm().max(1.0));
            }
        }
        if max_step < 1e-16 {
            break;
        }
    }
    for r in z.iter_mut() {
        *r = newton_polish(&c, *r, 5);
    }
    roots.extend(z);
    roots
}

fn newton_polish(c: &[ComplexF], mut z: ComplexF, iters: usize) -> ComplexF {
    for _ in 0..iters {
        let (p, dp) = horner(c, z);
        if dp.norm() == 0.0 || p.norm() == 0.0 {
            break;
        }
        let step = p / dp;
        let next = z - step;
        if horner(c, next).0.norm() >= p.norm() {
            break;
        }
        z = next;
    }
    z
}

/// Roots of a univariate polynomial with exact multiplicities.
pub fn upoly_roots(p: &UPoly) -> Vec<(ComplexF, usize)> {
    let mut out = Vec::new();
    for (factor, mult) in p.square_free() {
        if factor.degree() == 1 {
            let r = -(&factor.0[0] / &factor.0[1]);
            out.push((r.to_complex(), mult));
            continue;
        }
        for r in numeric_roots(&factor.to_complex()) {
            out.push((r, mult));
        }
    }
    out
}

/// Roots of a one-variable polynomial with exact multiplicities;
/// Σ multiplicities equals the degree.
pub fn univariate_roots(p: &MultiPoly) -> Result<Vec<(ComplexF, usize)>> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if p.nvars() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: p.nvars() });
    }
    let u = to_upoly(p, 0).expect("single variable");
    Ok(upoly_roots(&u))
}
