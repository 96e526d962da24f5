//! Points of CP² and CP³, the standard affine charts, and chart transitions.
//!
//! Chart `i` is the open set `x_i ≠ 0`; its affine coordinates are
//! `x_j / x_i` for `j ≠ i` in increasing `j`, so chart 1 of CP³ has
//! coordinates `(y0, y2, y3)`, chart 2 has `(w0, w1, w3)` and chart 3 has
//! `(v0, v1, v2)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parse::parse_coeff;
use crate::poly::MultiPoly;
use crate::scalar::{ComplexF, Field, GaussRat};

/// Index of the coordinate that is nonzero on the chart.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ChartId(pub usize);

impl ChartId {
    /// Homogeneous indices of the chart-local coordinates, in order.
    pub fn local_vars(self, dim: usize) -> Vec<usize> {
        (0..dim).filter(|&j| j != self.0).collect()
    }

    /// Position of homogeneous coordinate `j` among the chart-local coordinates.
    pub fn local_index(self, j: usize) -> Option<usize> {
        match j.cmp(&self.0) {
            std::cmp::Ordering::Less => Some(j),
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Greater => Some(j - 1),
        }
    }
}

/// A point of projective space; at least one coordinate is nonzero.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjPoint<F> {
    coords: Vec<F>,
}

pub type ProjPointNum = ProjPoint<ComplexF>;

impl<F: Field> ProjPoint<F> {
    pub fn new(coords: Vec<F>) -> Result<Self> {
        if coords.iter().all(Field::is_zero) {
            return Err(Error::ZeroPoint);
        }
        Ok(ProjPoint { coords })
    }

    pub fn coords(&self) -> &[F] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Scale so the first nonzero coordinate is 1.
    pub fn normalize(&self) -> Self {
        let lead = self.coords.iter().find(|c| !c.is_zero()).expect("nonzero point").clone();
        ProjPoint { coords: self.coords.iter().map(|c| c.clone() / lead.clone()).collect() }
    }

    pub fn scale(&self, s: &F) -> Result<Self> {
        Self::new(self.coords.iter().map(|c| c.clone() * s.clone()).collect())
    }

    /// Index of the coordinate with largest modulus (first on ties).
    pub fn max_modulus_index(&self) -> usize {
        let mut best = 0;
        for (k, c) in self.coords.iter().enumerate() {
            if c.modulus() > self.coords[best].modulus() {
                best = k;
            }
        }
        best
    }

    pub fn to_chart(&self, chart: ChartId) -> Result<AffineCoords<F>> {
        if chart.0 >= self.dim() {
            return Err(Error::BadChart(chart.0));
        }
        let d = &self.coords[chart.0];
        if d.is_zero() {
            return Err(Error::NotInChart { chart: chart.0 });
        }
        let values = chart
            .local_vars(self.dim())
            .into_iter()
            .map(|j| self.coords[j].clone() / d.clone())
            .collect();
        Ok(AffineCoords { chart, values })
    }
}

impl ProjPoint<GaussRat> {
    /// Exact projective equality: all 2×2 minors vanish.
    pub fn proj_eq(&self, other: &Self) -> bool {
        if self.dim() != other.dim() {
            return false;
        }
        let n = self.dim();
        for i in 0..n {
            for j in i + 1..n {
                let lhs = &self.coords[i] * &other.coords[j];
                let rhs = &self.coords[j] * &other.coords[i];
                if lhs != rhs {
                    return false;
                }
            }
        }
        true
    }

    pub fn to_numeric(&self) -> ProjPointNum {
        ProjPoint { coords: self.coords.iter().map(GaussRat::to_complex).collect() }
    }

    pub fn to_json(&self) -> ExactPointJson {
        ExactPointJson { coords: self.coords.iter().map(|c| c.to_string()).collect() }
    }

    pub fn from_json(j: &ExactPointJson) -> Result<Self> {
        let coords = j.coords.iter().map(|s| parse_coeff(s)).collect::<Result<Vec<_>>>()?;
        Self::new(coords)
    }
}

impl ProjPointNum {
    /// Scale so the max-modulus coordinate is exactly 1.
    pub fn normalize_max(&self) -> Self {
        let k = self.max_modulus_index();
        let d = self.coords[k];
        let mut coords: Vec<ComplexF> = self.coords.iter().map(|c| c / d).collect();
        coords[k] = ComplexF::new(1.0, 0.0);
        ProjPoint { coords }
    }

    /// Scale-free approximate equality with relative tolerance `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        if self.dim() != other.dim() {
            return false;
        }
        let a = self.normalize_max();
        let k = self.max_modulus_index();
        if other.coords[k].norm() <= tol * other.coords[other.max_modulus_index()].norm() {
            return false;
        }
        let s = other.coords[k];
        a.coords.iter().zip(&other.coords).all(|(x, y)| (x - y / s).norm() <= tol)
    }

    pub fn to_json(&self) -> NumPointJson {
        NumPointJson { coords: self.coords.iter().map(|c| [c.re, c.im]).collect() }
    }

    pub fn from_json(j: &NumPointJson) -> Result<Self> {
        Self::new(j.coords.iter().map(|c| ComplexF::new(c[0], c[1])).collect())
    }
}

/// JSON form of an exact point, coefficients in polynomial coefficient syntax.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactPointJson {
    pub coords: Vec<String>,
}

/// JSON form of a numeric point, coordinates as `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumPointJson {
    pub coords: Vec<[f64; 2]>,
}

/// Affine coordinates on one chart.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineCoords<F> {
    pub chart: ChartId,
    pub values: Vec<F>,
}

impl<F: Field> AffineCoords<F> {
    pub fn dim(&self) -> usize {
        self.values.len() + 1
    }

    pub fn from_chart(&self) -> ProjPoint<F> {
        let mut coords = self.values.clone();
        coords.insert(self.chart.0, F::one());
        ProjPoint { coords }
    }

    /// Re-express the same point in chart `target`.
    pub fn transition(&self, target: ChartId) -> Result<AffineCoords<F>> {
        self.from_chart().to_chart(target)
    }

    /// Jacobian of the transition map at this point: row `r` holds the
    /// differential of target coordinate `r` in terms of the source
    /// coordinates. Built from the closed forms `d(u_j/u_t) = du_j/u_t −
    /// u_j du_t/u_t²` and `d(1/u_t) = −du_t/u_t²`.
    pub fn transition_jacobian(&self, target: ChartId) -> Result<Vec<Vec<F>>> {
        let n = self.values.len();
        if target.0 > n {
            return Err(Error::BadChart(target.0));
        }
        if target == self.chart {
            return Ok((0..n)
                .map(|r| (0..n).map(|c| if r == c { F::one() } else { F::zero() }).collect())
                .collect());
        }
        let t = self.chart.local_index(target.0).expect("distinct charts");
        let ut = self.values[t].clone();
        if ut.is_zero() {
            return Err(Error::NotInChart { chart: target.0 });
        }
        let ut2 = ut.clone() * ut.clone();
        let mut jac = Vec::with_capacity(n);
        for j in target.local_vars(n + 1) {
            let mut row = vec![F::zero(); n];
            if j == self.chart.0 {
                row[t] = -(F::one() / ut2.clone());
            } else {
                let s = self.chart.local_index(j).expect("j differs from source chart");
                row[s] = F::one() / ut.clone();
                row[t] = row[t].clone() - self.values[s].clone() / ut2.clone();
            }
            jac.push(row);
        }
        Ok(jac)
    }
}

/// Result of the chart-0/chart-1 transition-identity check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransitionIdentity {
    /// `−z1³·f_{y0}` equals `z1 f_{z1} + z2 f_{z2} + z3 f_{z3} − 4 f(1,z)`
    /// as polynomials.
    pub exact_identity: bool,
    /// The bare identity without the `4 f(1,z)` term, which holds on the surface only.
    pub holds_without_surface_term: bool,
}

/// Certify the chart-0/chart-1 partial-derivative identity for a quartic by
/// substituting `y = (1/z1, z2/z1, z3/z1)` into the chart-1 partial `f_{y0}`
/// and clearing denominators with `z1³`. The identity holds on the surface;
/// off it the two sides differ by exactly `4 f(1, z)`, which is what is checked.
pub fn verify_transition_identity(f: &MultiPoly) -> Result<TransitionIdentity> {
    if f.nvars() != 4 || f.is_zero() || !f.is_homogeneous(4) {
        return Err(Error::NotQuartic);
    }
    let f0 = f.dehomogenize(0)?;
    let f1 = f.dehomogenize(1)?;
    let fy0 = f1.partial_derivative(0);
    let mut lhs = MultiPoly::zero(3);
    for (m, c) in fy0.terms() {
        let e = m.exps();
        let k = e[0] + e[1] + e[2];
        debug_assert!(k <= 3);
        lhs = &lhs + &MultiPoly::monomial(vec![3 - k, e[1], e[2]], -c);
    }
    let mut euler = MultiPoly::zero(3);
    for i in 0..3 {
        euler = &euler + &(&MultiPoly::var(3, i) * &f0.partial_derivative(i));
    }
    let surface_term = f0.scale(&GaussRat::from_int(4));
    Ok(TransitionIdentity {
        exact_identity: lhs == &euler - &surface_term,
        holds_without_surface_term: lhs == euler,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_poly;

    fn ip(v: &[i64]) -> ProjPoint<GaussRat> {
        ProjPoint::new(v.iter().map(|&k| GaussRat::from_int(k)).collect()).unwrap()
    }

    fn r(n: i64, d: i64) -> GaussRat {
        GaussRat::from_fracs(n, d, 0, 1)
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(ip(&[2, 2, 6, 10]).normalize(), ip(&[1, 1, 3, 5]));
        assert_eq!(ip(&[0, 0, 0, 3]).normalize(), ip(&[0, 0, 0, 1]));
        assert_eq!(ProjPoint::new(vec![GaussRat::zero(); 3]), Err(Error::ZeroPoint));
    }

    #[test]
    fn to_chart_examples() {
        let p = ip(&[1, 2, 3, 5]);
        assert_eq!(p.to_chart(ChartId(0)).unwrap().values, vec![r(2, 1), r(3, 1), r(5, 1)]);
        assert_eq!(p.to_chart(ChartId(1)).unwrap().values, vec![r(1, 2), r(3, 2), r(5, 2)]);
        assert!(p.to_chart(ChartId(1)).unwrap().from_chart().proj_eq(&p));
        assert_eq!(ip(&[0, 1, 0, 0]).to_chart(ChartId(0)), Err(Error::NotInChart { chart: 0 }));
    }

    #[test]
    fn transition_examples() {
        let z = AffineCoords { chart: ChartId(0), values: vec![r(2, 1), r(3, 1), r(5, 1)] };
        let y = z.transition(ChartId(1)).unwrap();
        assert_eq!(y.values, vec![r(1, 2), r(3, 2), r(5, 2)]);
        assert_eq!(y.transition(ChartId(0)).unwrap(), z);
        let off = AffineCoords { chart: ChartId(0), values: vec![r(0, 1), r(3, 1), r(5, 1)] };
        assert!(off.transition(ChartId(1)).is_err());
    }

    #[test]
    fn jacobian_matches_closed_form_for_charts_0_to_1() {
        // dy0 = -dz1/z1², dy2 = (z1 dz2 - z2 dz1)/z1², dy3 = (z1 dz3 - z3 dz1)/z1²
        let z = AffineCoords { chart: ChartId(0), values: vec![r(2, 1), r(3, 1), r(5, 1)] };
        let j = z.transition_jacobian(ChartId(1)).unwrap();
        assert_eq!(j[0], vec![r(-1, 4), r(0, 1), r(0, 1)]);
        assert_eq!(j[1], vec![r(-3, 4), r(1, 2), r(0, 1)]);
        assert_eq!(j[2], vec![r(-5, 4), r(0, 1), r(1, 2)]);
    }

    #[test]
    fn json_round_trip() {
        let p = ProjPoint::new(vec![
            GaussRat::one(),
            r(1, 2),
            GaussRat::zero(),
            GaussRat::from_ints(3, 2),
        ])
        .unwrap();
        let j = p.to_json();
        assert_eq!(j.coords, vec!["1", "1/2", "0", "3+2*i"]);
        let s = serde_json::to_string(&j).unwrap();
        let back: ExactPointJson = serde_json::from_str(&s).unwrap();
        assert_eq!(ProjPoint::<GaussRat>::from_json(&back).unwrap(), p);
        let parsed = ProjPoint::<GaussRat>::from_json(&ExactPointJson {
            coords: vec!["1".into(), "1/2".into(), "0".into(), "3+2i".into()],
        })
        .unwrap();
        assert_eq!(parsed, p);
    }

    #[test]
    fn transition_identity_examples() {
        let fermat = parse_poly("x0^4+x1^4+x2^4+x3^4", &["x0", "x1", "x2", "x3"]).unwrap();
        let t = verify_transition_identity(&fermat).unwrap();
        assert!(t.exact_identity);
        assert!(!t.holds_without_surface_term);
        let x0 = parse_poly("x0^4", &["x0", "x1", "x2", "x3"]).unwrap();
        assert!(verify_transition_identity(&x0).unwrap().exact_identity);
        let cubic = parse_poly("x0^3", &["x0", "x1", "x2", "x3"]).unwrap();
        assert_eq!(verify_transition_identity(&cubic), Err(Error::NotQuartic));
    }

    #[test]
    fn numeric_approx_eq_is_scale_free() {
        let p = ProjPoint::new(vec![ComplexF::new(1.0, 2.0), ComplexF::new(-3.0, 0.5), ComplexF::new(0.0, 0.0)]).unwrap();
        let q = p.scale(&ComplexF::new(-0.3, 7.0)).unwrap();
        assert!(p.approx_eq(&q, 1e-10));
        let s = ProjPoint::new(vec![ComplexF::new(1.0, 2.0), ComplexF::new(-3.0, 0.6), ComplexF::new(0.0, 0.0)]).unwrap();
        assert!(!p.approx_eq(&s, 1e-10));
    }
}
