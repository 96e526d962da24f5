//! Coefficient fields: exact Gaussian rationals and double-precision complex numbers.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Double-precision complex number used on every numeric path.
pub type ComplexF = num_complex::Complex64;

/// An element of the field ℚ(i), stored as two reduced big rationals.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct GaussRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRat { re, im }
    }

    pub fn zero() -> Self {
        GaussRat { re: BigRational::zero(), im: BigRational::zero() }
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        GaussRat { re: BigRational::zero(), im: BigRational::one() }
    }

    pub fn from_int(n: i64) -> Self {
        GaussRat { re: BigRational::from_integer(BigInt::from(n)), im: BigRational::zero() }
    }

    pub fn from_ints(re: i64, im: i64) -> Self {
        GaussRat {
            re: BigRational::from_integer(BigInt::from(re)),
            im: BigRational::from_integer(BigInt::from(im)),
        }
    }

    /// `(re_num/re_den) + (im_num/im_den)·i`. Denominators must be nonzero.
    pub fn from_fracs(re_num: i64, re_den: i64, im_num: i64, im_den: i64) -> Self {
        GaussRat {
            re: BigRational::new(BigInt::from(re_num), BigInt::from(re_den)),
            im: BigRational::new(BigInt::from(im_num), BigInt::from(im_den)),
        }
    }

    pub fn from_rational(re: BigRational) -> Self {
        GaussRat { re, im: BigRational::zero() }
    }

    /// Exact conversion of a finite double-precision complex number (every
    /// finite `f64` is a dyadic rational). Returns `None` for NaN or infinity.
    pub fn from_complex_exact(z: ComplexF) -> Option<Self> {
        Some(GaussRat { re: BigRational::from_float(z.re)?, im: BigRational::from_float(z.im)? })
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussRat { re: self.re.clone(), im: -self.im.clone() }
    }

    /// The field norm `re² + im²`.
    pub fn norm(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm();
        Some(GaussRat { re: &self.re / &n, im: -(&self.im / &n) })
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = GaussRat::one();
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

    pub fn to_complex(&self) -> ComplexF {
        ComplexF::new(rat_to_f64(&self.re), rat_to_f64(&self.im))
    }

    /// Largest denominator bit length among the two parts; a rough size measure.
    pub fn height_bits(&self) -> u64 {
        let bits = |r: &BigRational| r.numer().bits().max(r.denom().bits());
        bits(&self.re).max(bits(&self.im))
    }
}

fn rat_to_f64(r: &BigRational) -> f64 {
    if let Some(v) = r.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Fall back to a scaled division for very large numerators/denominators.
    let n = r.numer();
    let d = r.denom();
    let shift = n.bits().max(d.bits()).saturating_sub(1000) as usize;
    let nf = (n >> shift).to_f64().unwrap_or(f64::NAN);
    let df = (d >> shift).to_f64().unwrap_or(f64::NAN);
    nf / df
}

fn fmt_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for GaussRat {
    /// Canonical coefficient syntax: `a/b+c/d*i`, zero parts omitted, `i` for a unit imaginary part.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return write!(f, "{}", fmt_rational(&self.re));
        }
        let imag = if self.im.abs().is_one() {
            if self.im.is_negative() { "-i".to_string() } else { "i".to_string() }
        } else {
            format!("{}*i", fmt_rational(&self.im))
        };
        if self.re.is_zero() {
            write!(f, "{imag}")
        } else if imag.starts_with('-') {
            write!(f, "{}{imag}", fmt_rational(&self.re))
        } else {
            write!(f, "{}+{imag}", fmt_rational(&self.re))
        }
    }
}

impl fmt::Debug for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GaussRat({self})")
    }
}

impl<'a> Add<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn add(self, o: &GaussRat) -> GaussRat {
        GaussRat { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

impl<'a> Sub<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn sub(self, o: &GaussRat) -> GaussRat {
        GaussRat { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}

impl<'a> Mul<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn mul(self, o: &GaussRat) -> GaussRat {
        if self.im.is_zero() && o.im.is_zero() {
            return GaussRat { re: &self.re * &o.re, im: BigRational::zero() };
        }
        GaussRat {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl<'a> Div<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    /// Panics on division by zero, like integer division.
    fn div(self, o: &GaussRat) -> GaussRat {
        let inv = o.inv().expect("division by zero Gaussian rational");
        self * &inv
    }
}

impl Neg for &GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat { re: -self.re.clone(), im: -self.im.clone() }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<GaussRat> for GaussRat {
            type Output = GaussRat;
            fn $m(self, o: GaussRat) -> GaussRat {
                (&self).$m(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat { re: -self.re, im: -self.im }
    }
}

impl AddAssign<&GaussRat> for GaussRat {
    fn add_assign(&mut self, o: &GaussRat) {
        self.re += &o.re;
        self.im += &o.im;
    }
}

impl SubAssign<&GaussRat> for GaussRat {
    fn sub_assign(&mut self, o: &GaussRat) {
        self.re -= &o.re;
        self.im -= &o.im;
    }
}

impl MulAssign<&GaussRat> for GaussRat {
    fn mul_assign(&mut self, o: &GaussRat) {
        *self = &*self * o;
    }
}

/// The arithmetic shared by the exact and numeric coordinate paths.
pub trait Field:
    Clone
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    /// Modulus as a float, for pivot and normalization choices.
    fn modulus(&self) -> f64;
}

impl Field for GaussRat {
    fn zero() -> Self {
        GaussRat::zero()
    }
    fn one() -> Self {
        GaussRat::one()
    }
    fn is_zero(&self) -> bool {
        GaussRat::is_zero(self)
    }
    fn modulus(&self) -> f64 {
        self.to_complex().norm()
    }
}

impl Field for ComplexF {
    fn zero() -> Self {
        ComplexF::new(0.0, 0.0)
    }
    fn one() -> Self {
        ComplexF::new(1.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn modulus(&self) -> f64 {
        self.norm()
    }
}

/// Best rational approximation of `x` with denominator at most `max_den`,
/// by continued fractions.
pub fn rationalize(x: f64, max_den: i64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut v = x;
    for _ in 0..64 {
        let a = v.floor();
        if a.abs() > 1e15 {
            break;
        }
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > max_den as i128 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = v - a;
        if frac.abs() < 1e-15 {
            break;
        }
        v = 1.0 / frac;
    }
    if k1 == 0 {
        return None;
    }
    Some(BigRational::new(BigInt::from(h1), BigInt::from(k1)))
}

/// Snap a complex number to a nearby Gaussian rational with small denominators,
/// if one lies within `tol`.
pub fn rationalize_complex(z: ComplexF, max_den: i64, tol: f64) -> Option<GaussRat> {
    let re = rationalize(z.re, max_den)?;
    let im = rationalize(z.im, max_den)?;
    let g = GaussRat::new(re, im);
    if (g.to_complex() - z).norm() <= tol {
        Some(g)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_omits_zero_parts() {
        assert_eq!(GaussRat::from_fracs(-2, 3, 2, 3).to_string(), "-2/3+2/3*i");
        assert_eq!(GaussRat::from_ints(0, -1).to_string(), "-i");
        assert_eq!(GaussRat::from_ints(5, 0).to_string(), "5");
        assert_eq!(GaussRat::from_ints(1, 1).to_string(), "1+i");
        assert_eq!(GaussRat::zero().to_string(), "0");
    }

    #[test]
    fn inverse_and_division() {
        let a = GaussRat::from_ints(1, 2);
        let b = a.inv().unwrap();
        assert!((&a * &b).is_one());
        assert_eq!(b, GaussRat::from_fracs(1, 5, -2, 5));
        assert!(GaussRat::zero().inv().is_none());
    }

    #[test]
    fn i_to_the_fourth_is_one() {
        assert!(GaussRat::i().pow(4).is_one());
        assert_eq!(GaussRat::i().pow(2), GaussRat::from_int(-1));
    }

    #[test]
    fn exact_float_conversion() {
        let z = ComplexF::new(0.1, -2.5);
        let g = GaussRat::from_complex_exact(z).unwrap();
        assert_eq!(g.to_complex(), z);
        assert!(GaussRat::from_complex_exact(ComplexF::new(f64::NAN, 0.0)).is_none());
    }

    #[test]
    fn rationalize_small_fractions() {
        let r = rationalize(0.333333333333, 100).unwrap();
        assert_eq!(r, BigRational::new(1.into(), 3.into()));
        let g = rationalize_complex(ComplexF::new(-0.5, 1e-17), 50, 1e-12).unwrap();
        assert_eq!(g, GaussRat::from_fracs(-1, 2, 0, 1));
    }
}
