//! Sparse multivariate polynomials over ℚ(i).
//!
//! Terms are kept in a map keyed by exponent vectors ordered graded
//! lexicographically, so iteration from the back yields the leading term and
//! the canonical rendering is a plain reverse walk.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::{ComplexF, GaussRat};

/// Exponent vector with graded-lexicographic ordering.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
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

/// A polynomial in `nvars` variables with Gaussian-rational coefficients.
/// No zero coefficient is ever stored; the zero polynomial has no terms.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Monomial, GaussRat>,
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: GaussRat) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::one(nvars), c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, GaussRat::one())
    }

    /// The coordinate function `x_index`.
    pub fn var(nvars: usize, index: usize) -> Self {
        let mut e = vec![0; nvars];
        e[index] = 1;
        Self::monomial(e, GaussRat::one())
    }

    pub fn monomial(exps: Vec<u32>, c: GaussRat) -> Self {
        let mut p = Self::zero(exps.len());
        p.add_term(Monomial(exps), c);
        p
    }

    /// Build from `(exponents, coefficient)` pairs, merging duplicates.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u32>, GaussRat)>,
    {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent vector length mismatch");
            p.add_term(Monomial(e), c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: GaussRat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += &c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &GaussRat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exps: &[u32]) -> GaussRat {
        self.terms.get(&Monomial(exps.to_vec())).cloned().unwrap_or_else(GaussRat::zero)
    }

    /// Constant iff there are no terms of positive degree.
    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.degree() == 0)
    }

    pub fn constant_value(&self) -> Option<GaussRat> {
        if self.is_constant() {
            Some(self.coeff(&vec![0; self.nvars]))
        } else {
            None
        }
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(Monomial::degree)
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|m| m.0[var]).max().unwrap_or(0)
    }

    pub fn involves(&self, var: usize) -> bool {
        self.terms.keys().any(|m| m.0[var] > 0)
    }

    /// Leading term in graded-lex order.
    pub fn leading_term(&self) -> Option<(&Monomial, &GaussRat)> {
        self.terms.iter().next_back()
    }

    /// Leading term in pure lexicographic order (x0 > x1 > …).
    pub fn lex_leading_term(&self) -> Option<(&Monomial, &GaussRat)> {
        self.terms.iter().max_by(|a, b| a.0 .0.cmp(&b.0 .0))
    }

    pub fn scale(&self, c: &GaussRat) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &GaussRat) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(k, a)| (k.mul(m), a * c)).collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.nvars);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Normalize so the lexicographically leading coefficient is 1.
    pub fn monic(&self) -> Self {
        match self.lex_leading_term() {
            None => self.clone(),
            Some((_, c)) => self.scale(&c.inv().expect("nonzero leading coefficient")),
        }
    }

    pub fn conj(&self) -> Self {
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.conj())).collect(),
        }
    }

    /// Exact formal partial derivative. Panics if `var` is out of range.
    pub fn partial_derivative(&self, var: usize) -> Self {
        assert!(var < self.nvars, "variable {var} out of range");
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[var];
            if e == 0 {
                continue;
            }
            let mut nm = m.clone();
            nm.0[var] -= 1;
            out.add_term(nm, c * &GaussRat::from_int(e as i64));
        }
        out
    }

    pub fn gradient(&self) -> Vec<MultiPoly> {
        (0..self.nvars).map(|i| self.partial_derivative(i)).collect()
    }

    /// Exact evaluation with cached powers per variable.
    pub fn evaluate_exact(&self, point: &[GaussRat]) -> Result<GaussRat> {
        self.check_dim(point.len())?;
        let mut powers: Vec<Vec<GaussRat>> = Vec::with_capacity(self.nvars);
        for (v, x) in point.iter().enumerate() {
            let d = self.degree_in(v) as usize;
            let mut row = Vec::with_capacity(d + 1);
            row.push(GaussRat::one());
            for k in 1..=d {
                let next = &row[k - 1] * x;
                row.push(next);
            }
            powers.push(row);
        }
        let mut acc = GaussRat::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t *= &powers[v][e as usize];
                }
            }
            acc += &t;
        }
        Ok(acc)
    }

    pub fn evaluate_num(&self, point: &[ComplexF]) -> Result<ComplexF> {
        self.check_dim(point.len())?;
        Ok(self.to_numeric().eval(point))
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, got });
        }
        Ok(())
    }

    /// True iff every term has total degree `d` and the Euler identity
    /// `Σ xᵢ ∂ᵢp = d·p` holds exactly. The zero polynomial is homogeneous of every degree.
    pub fn check_homogeneous(&self, d: u32) -> std::result::Result<(), (Monomial, GaussRat)> {
        if let Some((m, c)) = self.terms.iter().find(|(m, _)| m.degree() != d) {
            return Err((m.clone(), c.clone()));
        }
        let mut euler = Self::zero(self.nvars);
        for i in 0..self.nvars {
            euler = &euler + &(&Self::var(self.nvars, i) * &self.partial_derivative(i));
        }
        let residual = &euler - &self.scale(&GaussRat::from_int(d as i64));
        match residual.leading_term() {
            None => Ok(()),
            Some((m, c)) => Err((m.clone(), c.clone())),
        }
    }

    pub fn is_homogeneous(&self, d: u32) -> bool {
        self.check_homogeneous(d).is_ok()
    }

    /// Substitute `x_i = 1` and drop that variable, keeping the remaining
    /// variables in their original relative order.
    pub fn dehomogenize(&self, i: usize) -> Result<Self> {
        if i >= self.nvars {
            return Err(Error::VariableOutOfRange { index: i, nvars: self.nvars });
        }
        let d = self.total_degree().unwrap_or(0);
        if !self.is_homogeneous(d) {
            return Err(Error::NotHomogeneous { degree: d });
        }
        Ok(self.set_var_to_one(i))
    }

    /// Substitute `x_i = 1` and drop the variable, with no homogeneity requirement.
    pub fn set_var_to_one(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars - 1);
        for (m, c) in &self.terms {
            let mut e = m.0.clone();
            e.remove(i);
            out.add_term(Monomial(e), c.clone());
        }
        out
    }

    /// Insert a new variable at position `i` and pad every term up to degree `d`.
    pub fn homogenize(&self, i: usize, d: u32) -> Result<Self> {
        if i > self.nvars {
            return Err(Error::VariableOutOfRange { index: i, nvars: self.nvars + 1 });
        }
        let mut out = Self::zero(self.nvars + 1);
        for (m, c) in &self.terms {
            let k = m.degree();
            if k > d {
                return Err(Error::NotHomogeneous { degree: d });
            }
            let mut e = m.0.clone();
            e.insert(i, d - k);
            out.add_term(Monomial(e), c.clone());
        }
        Ok(out)
    }

    /// Drop a variable that does not occur.
    pub fn remove_var(&self, i: usize) -> Self {
        debug_assert!(!self.involves(i));
        self.set_var_to_one(i)
    }

    /// Substitute variable `var` by a constant, keeping `nvars`.
    pub fn substitute(&self, var: usize, value: &GaussRat) -> Self {
        let mut out = Self::zero(self.nvars);
        let d = self.degree_in(var) as usize;
        let mut pw = vec![GaussRat::one()];
        for k in 1..=d {
            let next = &pw[k - 1] * value;
            pw.push(next);
        }
        for (m, c) in &self.terms {
            let mut e = m.clone();
            let k = e.0[var] as usize;
            e.0[var] = 0;
            out.add_term(e, c * &pw[k]);
        }
        out
    }

    /// Replace variable `j` by `images[j]`; all images share one target ring.
    pub fn compose(&self, images: &[MultiPoly]) -> Result<Self> {
        self.check_dim(images.len())?;
        let target = images.first().map(|p| p.nvars).unwrap_or(0);
        let mut powers: Vec<Vec<MultiPoly>> = Vec::with_capacity(self.nvars);
        for (v, img) in images.iter().enumerate() {
            if img.nvars != target {
                return Err(Error::DimensionMismatch { expected: target, got: img.nvars });
            }
            let d = self.degree_in(v) as usize;
            let mut row = vec![Self::one(target)];
            for k in 1..=d {
                let next = &row[k - 1] * img;
                row.push(next);
            }
            powers.push(row);
        }
        let mut acc = Self::zero(target);
        for (m, c) in &self.terms {
            let mut t = Self::constant(target, c.clone());
            for (v, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t = &t * &powers[v][e as usize];
                }
            }
            acc = &acc + &t;
        }
        Ok(acc)
    }

    /// Apply a linear change of variables `x_j ↦ Σ_k m[j][k]·x_k`.
    pub fn linear_change(&self, m: &[Vec<GaussRat>]) -> Result<Self> {
        let images: Vec<MultiPoly> = m
            .iter()
            .map(|row| {
                MultiPoly::from_terms(
                    self.nvars,
                    row.iter().enumerate().map(|(k, c)| {
                        let mut e = vec![0; self.nvars];
                        e[k] = 1;
                        (e, c.clone())
                    }),
                )
            })
            .collect();
        self.compose(&images)
    }

    /// Coefficients in `var`, lowest degree first; each coefficient is free of `var`.
    pub fn as_univariate(&self, var: usize) -> Vec<MultiPoly> {
        let d = self.degree_in(var) as usize;
        let mut out = vec![Self::zero(self.nvars); d + 1];
        for (m, c) in &self.terms {
            let mut e = m.clone();
            let k = e.0[var] as usize;
            e.0[var] = 0;
            out[k].add_term(e, c.clone());
        }
        out
    }

    pub fn from_univariate(var: usize, coeffs: &[MultiPoly], nvars: usize) -> Self {
        let mut out = Self::zero(nvars);
        for (k, c) in coeffs.iter().enumerate() {
            for (m, a) in &c.terms {
                let mut e = m.clone();
                e.0[var] += k as u32;
                out.add_term(e, a.clone());
            }
        }
        out
    }

    /// Float-coefficient copy for fast repeated evaluation.
    pub fn to_numeric(&self) -> NumPoly {
        NumPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.0.clone(), c.to_complex())).collect(),
        }
    }

    /// Largest coefficient modulus, as a float.
    pub fn coeff_norm(&self) -> f64 {
        self.terms.values().map(|c| c.to_complex().norm()).fold(0.0, f64::max)
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiPoly[{}]({})", self.nvars, crate::parse::render_poly_default(self))
    }
}

impl<'a> Add<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;
    fn add(self, o: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, o.nvars, "variable count mismatch");
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;
    fn sub(self, o: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, o.nvars, "variable count mismatch");
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl<'a> Mul<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;
    fn mul(self, o: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, o.nvars, "variable count mismatch");
        let mut out = MultiPoly::zero(self.nvars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        self.scale(&GaussRat::from_int(-1))
    }
}

impl Add for MultiPoly {
    type Output = MultiPoly;
    fn add(self, o: MultiPoly) -> MultiPoly {
        &self + &o
    }
}

impl Sub for MultiPoly {
    type Output = MultiPoly;
    fn sub(self, o: MultiPoly) -> MultiPoly {
        &self - &o
    }
}

impl Mul for MultiPoly {
    type Output = MultiPoly;
    fn mul(self, o: MultiPoly) -> MultiPoly {
        &self * &o
    }
}

/// Float-coefficient polynomial for the numeric path.
#[derive(Clone, Debug)]
pub struct NumPoly {
    pub nvars: usize,
    pub terms: Vec<(Vec<u32>, ComplexF)>,
}

impl NumPoly {
    pub fn eval(&self, point: &[ComplexF]) -> ComplexF {
        debug_assert_eq!(point.len(), self.nvars);
        let mut acc = ComplexF::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut t = *c;
            for (x, &k) in point.iter().zip(e) {
                if k > 0 {
                    t *= x.powu(k);
                }
            }
            acc += t;
        }
        acc
    }

    /// Sum of coefficient moduli times monomial moduli; the natural scale for
    /// relative residuals.
    pub fn eval_abs(&self, point: &[ComplexF]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                c.norm() * point.iter().zip(e).map(|(x, &k)| x.norm().powi(k as i32)).product::<f64>()
            })
            .sum()
    }

    pub fn partial_derivative(&self, var: usize) -> NumPoly {
        NumPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e[var] > 0)
                .map(|(e, c)| {
                    let mut ne = e.clone();
                    ne[var] -= 1;
                    (ne, c * e[var] as f64)
                })
                .collect(),
        }
    }
}
