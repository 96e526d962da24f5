//! Plane projective curves, Bézout counting and the C∩D∩E finiteness analysis.
//!
//! Intersection multiplicity is defined operationally: after a generic
//! linear change of coordinates, the multiplicity of a point is the root
//! multiplicity of `Res_z` at its `[x:y]` projection. Multiplicities come
//! from exact square-free decomposition, so `Σ = n·m` holds exactly; only
//! point coordinates may be numeric.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{exact_div, gcd_many, gcd_poly, resultant};
use crate::error::{Error, Result};
use crate::par::item_rng;
use crate::parse::render_poly;
use crate::poly::{MultiPoly, NumPoly};
use crate::projective::{ExactPointJson, NumPointJson, ProjPoint, ProjPointNum};
use crate::roots::{numeric_roots, to_upoly, UPoly};
use crate::scalar::{ComplexF, GaussRat};
use crate::surface::{det_exact, verify_witness, Witness};

/// Residual bound for recovered intersection points.
pub const POINT_TOL: f64 = 1e-8;
const MAX_ATTEMPTS: usize = 10;
/// Relative size below which a numeric slice coefficient is treated as zero.
pub const CHOP_TOL: f64 = 1e-12;

pub const PLANE_VARS: [&str; 3] = ["x", "y", "z"];

#[derive(Clone, Debug, PartialEq)]
pub struct PlaneCurve {
    poly: MultiPoly,
    degree: u32,
}

impl PlaneCurve {
    pub fn new(poly: MultiPoly) -> Result<Self> {
        if poly.nvars() != 3 {
            return Err(Error::DimensionMismatch { expected: 3, got: poly.nvars() });
        }
        if poly.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let degree = poly.total_degree().unwrap_or(0);
        if degree == 0 {
            return Err(Error::Degenerate("a curve needs degree at least 1".into()));
        }
        if !poly.is_homogeneous(degree) {
            return Err(Error::NotHomogeneous { degree });
        }
        Ok(PlaneCurve { poly, degree })
    }

    pub fn poly(&self) -> &MultiPoly {
        &self.poly
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn render(&self, vars: &[&str]) -> String {
        render_poly(&self.poly, vars)
    }
}

/// Nonconstant gcd of the two defining polynomials, if any.
pub fn common_component(c: &PlaneCurve, d: &PlaneCurve) -> Option<PlaneCurve> {
    let g = gcd_poly(&c.poly, &d.poly).ok()?;
    if g.is_constant() {
        None
    } else {
        PlaneCurve::new(g).ok()
    }
}

/// A dense random curve of degree `deg` with small Gaussian-integer coefficients.
pub fn random_curve(rng: &mut ChaCha8Rng, deg: u32) -> PlaneCurve {
    loop {
        let mut terms = Vec::new();
        for a in 0..=deg {
            for b in 0..=deg - a {
                terms.push((vec![a, b, deg - a - b], GaussRat::from_ints(rng.gen_range(-5..=5), rng.gen_range(-2..=2))));
            }
        }
        if let Ok(c) = PlaneCurve::new(MultiPoly::from_terms(3, terms)) {
            if c.degree == deg {
                return c;
            }
        }
    }
}

/// The `k`-th member of a deterministic family of coprime curve pairs whose
/// degrees cycle through every `(n, m)` with `1 ≤ n, m ≤ 4`.
pub fn random_coprime_pair(seed: u64, k: usize) -> (PlaneCurve, PlaneCurve) {
    let mut rng = item_rng(seed, k as u64);
    let (n, m) = (1 + (k % 4) as u32, 1 + ((k / 4) % 4) as u32);
    loop {
        let c = random_curve(&mut rng, n);
        let d = random_curve(&mut rng, m);
        if common_component(&c, &d).is_none() {
            return (c, d);
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntersectionPoint {
    pub point: ProjPointNum,
    pub exact: Option<ProjPoint<GaussRat>>,
    pub multiplicity: usize,
}

#[derive(Clone, Debug)]
pub struct IntersectionReport {
    pub points: Vec<IntersectionPoint>,
    pub total: usize,
    pub degrees: (u32, u32),
    pub common_component: Option<PlaneCurve>,
    pub coordinate_change_used: Option<Vec<Vec<GaussRat>>>,
    pub attempts: usize,
}

fn random_integer_change(rng: &mut ChaCha8Rng) -> Vec<Vec<GaussRat>> {
    loop {
        let m: Vec<Vec<GaussRat>> =
            (0..3).map(|_| (0..3).map(|_| GaussRat::from_int(rng.gen_range(-10..=10))).collect()).collect();
        if !det_exact(&m).is_zero() {
            return m;
        }
    }
}

fn apply_exact(m: &[Vec<GaussRat>], q: &[GaussRat]) -> Vec<GaussRat> {
    m.iter().map(|row| row.iter().zip(q).fold(GaussRat::zero(), |acc, (a, b)| &acc + &(a * b))).collect()
}

fn apply_num(m: &[Vec<GaussRat>], q: &[ComplexF]) -> Vec<ComplexF> {
    m.iter().map(|row| row.iter().zip(q).map(|(a, b)| a.to_complex() * b).sum()).collect()
}

/// `|p(x)| / Σ|coeffs|` at the max-normalized point.
pub fn curve_residual(p: &NumPoly, scale: f64, x: &ProjPointNum) -> f64 {
    p.eval(x.normalize_max().coords()).norm() / scale.max(f64::MIN_POSITIVE)
}

fn coeff_scale(p: &MultiPoly) -> f64 {
    p.terms().map(|(_, c)| c.to_complex().norm()).sum()
}

/// Coefficients in `z` of `p(x0, y0, z)`, lowest first.
fn specialize_num(p: &MultiPoly, x0: ComplexF, y0: ComplexF) -> Vec<ComplexF> {
    let mut c = vec![ComplexF::new(0.0, 0.0); p.degree_in(2) as usize + 1];
    for (m, a) in p.terms() {
        let e = m.exps();
        c[e[2] as usize] += a.to_complex() * x0.powu(e[0]) * y0.powu(e[1]);
    }
    c
}

fn specialize_exact(p: &MultiPoly, x0: &GaussRat, y0: &GaussRat) -> UPoly {
    let q = p.substitute(0, x0).substitute(1, y0);
    to_upoly(&q, 2).expect("only z remains")
}

enum Lift {
    Exact(GaussRat),
    Numeric(ComplexF),
    NotSeparated,
}

fn lift_exact(a: &MultiPoly, b: &MultiPoly, x0: &GaussRat, y0: &GaussRat) -> Lift {
    let g = specialize_exact(a, x0, y0).gcd(&specialize_exact(b, x0, y0));
    let sf: Vec<(UPoly, usize)> = g.square_free();
    let distinct: usize = sf.iter().map(|(f, _)| f.degree()).sum();
    if distinct != 1 {
        return Lift::NotSeparated;
    }
    let f = &sf[0].0;
    Lift::Exact(-(&f.0[0] / &f.0[1]))
}

fn lift_numeric(a: &MultiPoly, b: &MultiPoly, x0: ComplexF, y0: ComplexF) -> Lift {
    let ra = numeric_roots(&specialize_num(a, x0, y0));
    let rb = numeric_roots(&specialize_num(b, x0, y0));
    let mut centers: Vec<ComplexF> = Vec::new();
    for za in &ra {
        let Some(zb) = rb.iter().min_by(|p, q| (*p - za).norm().total_cmp(&(*q - za).norm())) else {
            continue;
        };
        if (zb - za).norm() <= 1e-4 * za.norm().max(1.0) {
            let z = (za + zb) * 0.5;
            if !centers.iter().any(|c| (c - z).norm() <= 1e-4 * z.norm().max(1.0)) {
                centers.push(z);
            }
        }
    }
    match centers.as_slice() {
        [z] => Lift::Numeric(*z),
        _ => Lift::NotSeparated,
    }
}

/// `Res_z(a, b)` at `y = 1` as a polynomial in `x`, from exact values at
/// `nm + 1` integer abscissae. Specializing first is sound because the
/// `z`-leading coefficients of `a` and `b` are nonzero constants.
fn dehomogenized_resultant(a: &MultiPoly, b: &MultiPoly, nm: usize) -> Result<UPoly> {
    let one = GaussRat::one();
    let xs: Vec<GaussRat> = (0..=nm as i64).map(GaussRat::from_int).collect();
    let mut coef = Vec::with_capacity(xs.len());
    for x in &xs {
        let pa = a.substitute(0, x).substitute(1, &one);
        let pb = b.substitute(0, x).substitute(1, &one);
        coef.push(resultant(&pa, &pb, 2)?.constant_value().unwrap_or_else(GaussRat::zero));
    }
    // Newton divided differences, then expansion into the monomial basis.
    let k = xs.len();
    for j in 1..k {
        for i in (j..k).rev() {
            coef[i] = &(&coef[i] - &coef[i - 1]) / &(&xs[i] - &xs[i - j]);
        }
    }
    let mut p = vec![coef[k - 1].clone()];
    for j in (0..k - 1).rev() {
        let mut q = vec![GaussRat::zero(); p.len() + 1];
        for (i, c) in p.iter().enumerate() {
            q[i + 1] = &q[i + 1] + c;
            q[i] = &q[i] - &(c * &xs[j]);
        }
        q[0] = &q[0] + &coef[j];
        p = q;
    }
    Ok(UPoly::new(p))
}

/// All intersection points of two curves with multiplicities.
pub fn intersect(c: &PlaneCurve, d: &PlaneCurve, seed: u64) -> Result<IntersectionReport> {
    let (n, m) = (c.degree, d.degree);
    if let Some(cc) = common_component(c, d) {
        return Ok(IntersectionReport {
            points: vec![],
            total: 0,
            degrees: (n, m),
            common_component: Some(cc),
            coordinate_change_used: None,
            attempts: 0,
        });
    }
    let (sc, sd) = (coeff_scale(&c.poly), coeff_scale(&d.poly));
    let (cn, dn) = (c.poly.to_numeric(), d.poly.to_numeric());
    let mut rng = item_rng(seed, 0xbe20);
    let mut last = Error::NonGeneric { attempts: MAX_ATTEMPTS };
    'attempt: for attempt in 1..=MAX_ATTEMPTS {
        let mat = random_integer_change(&mut rng);
        let a = c.poly.linear_change(&mat)?;
        let b = d.poly.linear_change(&mat)?;
        if a.coeff(&[0, 0, n]).is_zero() || b.coeff(&[0, 0, m]).is_zero() {
            continue;
        }
        let nm = (n * m) as usize;
        let ru = dehomogenized_resultant(&a, &b, nm)?;
        if ru.is_zero() {
            return Err(Error::CommonComponent);
        }
        let at_infinity = nm - ru.degree();
        // (x0, y0, multiplicity), exact where the square-free factor is linear.
        let mut bases: Vec<(Option<(GaussRat, GaussRat)>, ComplexF, ComplexF, usize)> = Vec::new();
        for (factor, mult) in ru.square_free() {
            if factor.degree() == 1 {
                let x0 = -(&factor.0[0] / &factor.0[1]);
                let xc = x0.to_complex();
                bases.push((Some((x0, GaussRat::one())), xc, ComplexF::new(1.0, 0.0), mult));
            } else {
                for x0 in numeric_roots(&factor.to_complex()) {
                    bases.push((None, x0, ComplexF::new(1.0, 0.0), mult));
                }
            }
        }
        if at_infinity > 0 {
            bases.push((Some((GaussRat::one(), GaussRat::zero())), ComplexF::new(1.0, 0.0), ComplexF::new(0.0, 0.0), at_infinity));
        }
        let mut points = Vec::with_capacity(bases.len());
        for (exact, x0, y0, mult) in bases {
            let lifted = match &exact {
                Some((xe, ye)) => lift_exact(&a, &b, xe, ye),
                None => lift_numeric(&a, &b, x0, y0),
            };
            let (pt, ex) = match lifted {
                Lift::NotSeparated => {
                    last = Error::NonGeneric { attempts: attempt };
                    continue 'attempt;
                }
                Lift::Exact(z0) => {
                    let (xe, ye) = exact.expect("exact base");
                    let q = apply_exact(&mat, &[xe, ye, z0]);
                    let p = ProjPoint::new(q)?.normalize();
                    (p.to_numeric(), Some(p))
                }
                Lift::Numeric(z0) => (ProjPoint::new(apply_num(&mat, &[x0, y0, z0]))?, None),
            };
            let pt = pt.normalize_max();
            let residual = curve_residual(&cn, sc, &pt).max(curve_residual(&dn, sd, &pt));
            if residual > POINT_TOL {
                last = Error::RootRecovery { residual };
                continue 'attempt;
            }
            points.push(IntersectionPoint { point: pt, exact: ex, multiplicity: mult });
        }
        let total: usize = points.iter().map(|p| p.multiplicity).sum();
        debug_assert_eq!(total, nm);
        return Ok(IntersectionReport {
            points,
            total,
            degrees: (n, m),
            common_component: None,
            coordinate_change_used: Some(mat),
            attempts: attempt,
        });
    }
    Err(last)
}

/// The slice parameter `σ` of `x1 = σ x0`.
#[derive(Clone, Debug, PartialEq)]
pub enum Sigma {
    Exact(GaussRat),
    Numeric(ComplexF),
}

impl Sigma {
    pub fn to_complex(&self) -> ComplexF {
        match self {
            Sigma::Exact(s) => s.to_complex(),
            Sigma::Numeric(z) => *z,
        }
    }
}

/// The curves `C = g`, `D = g_{z2}`, `E = g_{z3}` of the slice `g(z2, z3) =
/// f(1, σ, z2, z3)`, homogenized in `[u : z2 : z3]`. Any of `D`, `E` may be zero.
#[derive(Clone, Debug)]
pub struct CdeCurves {
    pub c: MultiPoly,
    pub d: MultiPoly,
    pub e: MultiPoly,
    /// Unchopped numeric forms used for residual filtering.
    pub numeric: [NumPoly; 3],
    pub scales: [f64; 3],
    pub exact_sigma: bool,
}

impl CdeCurves {
    pub fn degrees(&self) -> [Option<u32>; 3] {
        [self.c.total_degree(), self.d.total_degree(), self.e.total_degree()]
    }

    fn curves(&self) -> [&MultiPoly; 3] {
        [&self.c, &self.d, &self.e]
    }
}

pub const CDE_VARS: [&str; 3] = ["u", "z2", "z3"];

fn slice_images(sigma: &GaussRat) -> Vec<MultiPoly> {
    let u = MultiPoly::var(3, 0);
    vec![u.clone(), u.scale(sigma), MultiPoly::var(3, 1), MultiPoly::var(3, 2)]
}

/// Drop coefficients below `CHOP_TOL` relative to the largest and round the
/// rest to double precision, as exact dyadic rationals.
fn chop(p: &MultiPoly) -> MultiPoly {
    let big = p.terms().map(|(_, c)| c.to_complex().norm()).fold(0.0, f64::max);
    MultiPoly::from_terms(
        p.nvars(),
        p.terms().filter_map(|(m, c)| {
            let z = c.to_complex();
            (z.norm() > CHOP_TOL * big).then(|| (m.exps().to_vec(), GaussRat::from_complex_exact(z).expect("finite")))
        }),
    )
}

/// Restrict a form in `x0..x3` to the slice `[u : σu : z2 : z3]`.
fn restrict(p: &MultiPoly, sigma: &Sigma) -> Result<(MultiPoly, NumPoly, f64)> {
    let s = match sigma {
        Sigma::Exact(s) => s.clone(),
        Sigma::Numeric(z) => GaussRat::from_complex_exact(*z).ok_or_else(|| Error::Config("sigma must be finite".into()))?,
    };
    let raw = p.compose(&slice_images(&s))?;
    let num = raw.to_numeric();
    let scale = coeff_scale(&raw);
    let used = match sigma {
        Sigma::Exact(_) => raw,
        Sigma::Numeric(_) => chop(&raw),
    };
    Ok((used, num, scale))
}

pub fn build_cde(f: &MultiPoly, sigma: &Sigma) -> Result<CdeCurves> {
    if f.nvars() != 4 || !f.is_homogeneous(4) || f.is_zero() {
        return Err(Error::NotQuartic);
    }
    let (c, cn, cs) = restrict(f, sigma)?;
    if c.is_zero() {
        return Err(Error::DegenerateSlice);
    }
    let (d, e) = (c.partial_derivative(1), c.partial_derivative(2));
    let (dn, en) = (cn.partial_derivative(1), cn.partial_derivative(2));
    let scale = |p: &NumPoly| p.terms.iter().map(|(_, c)| c.norm()).sum::<f64>();
    let (ds, es) = (scale(&dn), scale(&en));
    Ok(CdeCurves { c, d, e, numeric: [cn, dn, en], scales: [cs, ds, es], exact_sigma: matches!(sigma, Sigma::Exact(_)) })
}

#[derive(Clone, Debug)]
pub enum CdeVerdict {
    /// `C ∩ D ∩ E` is finite; the listed points are all of it.
    Finite { points: Vec<IntersectionPoint>, via: String },
    /// `C, D, E` share a component and a singular point of `f` was found on it.
    Case1Witness { component: MultiPoly, witness: Witness },
    Inconclusive(String),
}

impl CdeVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            CdeVerdict::Finite { .. } => "finite",
            CdeVerdict::Case1Witness { .. } => "case1-witness",
            CdeVerdict::Inconclusive(_) => "inconclusive",
        }
    }
}

fn is_coprime(a: &MultiPoly, b: &MultiPoly) -> bool {
    !a.is_zero() && !b.is_zero() && gcd_poly(a, b).map(|g| g.is_constant()).unwrap_or(false)
}

fn random_line(rng: &mut ChaCha8Rng) -> MultiPoly {
    loop {
        let l = MultiPoly::from_terms(
            3,
            (0..3).map(|k| {
                let mut e = vec![0; 3];
                e[k] = 1;
                (e, GaussRat::from_ints(rng.gen_range(-5..=5), rng.gen_range(-5..=5)))
            }),
        );
        if !l.is_zero() {
            return l;
        }
    }
}

fn on_curve(cur: &CdeCurves, which: usize, p: &IntersectionPoint) -> bool {
    if let (true, Some(ex)) = (cur.exact_sigma, &p.exact) {
        return cur.curves()[which].evaluate_exact(ex.coords()).map(|v| v.is_zero()).unwrap_or(false);
    }
    curve_residual(&cur.numeric[which], cur.scales[which], &p.point) <= POINT_TOL
}

fn push_unique(out: &mut Vec<IntersectionPoint>, p: IntersectionPoint) {
    if !out.iter().any(|q| q.point.approx_eq(&p.point, 1e-8)) {
        out.push(p);
    }
}

/// Case analysis for `C ∩ D ∩ E`.
pub fn cde_finiteness(f: &MultiPoly, sigma: &Sigma, seed: u64) -> Result<CdeVerdict> {
    let cur = build_cde(f, sigma)?;
    let nonzero: Vec<MultiPoly> = cur.curves().into_iter().filter(|p| !p.is_zero()).cloned().collect();
    let p = gcd_many(&nonzero).expect("C is nonzero");
    if !p.is_constant() {
        return case_one(f, sigma, p, seed);
    }

    let names = ["C", "D", "E"];
    let pairs = [(0, 1, 2), (0, 2, 1), (1, 2, 0)];
    let polys = cur.curves();
    let coprime = pairs
        .iter()
        .filter(|(i, j, _)| is_coprime(polys[*i], polys[*j]))
        .min_by_key(|(i, j, _)| polys[*i].total_degree().unwrap_or(0) * polys[*j].total_degree().unwrap_or(0));
    let mut points = Vec::new();
    if let Some(&(i, j, k)) = coprime {
        let rep = intersect(&PlaneCurve::new(polys[i].clone())?, &PlaneCurve::new(polys[j].clone())?, seed)?;
        for q in rep.points {
            if on_curve(&cur, k, &q) {
                push_unique(&mut points, q);
            }
        }
        return Ok(CdeVerdict::Finite { points, via: format!("{}∩{}, filtered by {}", names[i], names[j], names[k]) });
    }

    // No coprime pair: V(C) ∩ V(D) = V(g) ∪ V(C/g, D/g) with g = gcd(C, D),
    // and gcd(g, E) divides the constant P.
    let g = if cur.d.is_zero() { cur.c.monic() } else { gcd_poly(&cur.c, &cur.d)? };
    if cur.e.is_zero() {
        return Ok(CdeVerdict::Inconclusive("E vanishes and C, D share a component".into()));
    }
    if !g.is_constant() {
        let rep = intersect(&PlaneCurve::new(g.clone())?, &PlaneCurve::new(cur.e.clone())?, seed)?;
        for q in rep.points {
            if on_curve(&cur, 0, &q) && on_curve(&cur, 1, &q) {
                push_unique(&mut points, q);
            }
        }
    }
    if !cur.d.is_zero() {
        let c1 = exact_div(&cur.c, &g).expect("gcd divides");
        let d1 = exact_div(&cur.d, &g).expect("gcd divides");
        if !c1.is_constant() && !d1.is_constant() {
            let rep = intersect(&PlaneCurve::new(c1)?, &PlaneCurve::new(d1)?, seed.wrapping_add(1))?;
            for q in rep.points {
                if on_curve(&cur, 2, &q) {
                    push_unique(&mut points, q);
                }
            }
        }
    }
    Ok(CdeVerdict::Finite { points, via: "gcd(C,D) split, filtered by E".into() })
}

fn case_one(f: &MultiPoly, sigma: &Sigma, component: MultiPoly, seed: u64) -> Result<CdeVerdict> {
    let (f1, _, _) = restrict(&f.partial_derivative(1), sigma)?;
    let comp = PlaneCurve::new(component.clone())?;
    let other = if f1.is_zero() || !is_coprime(&component, &f1) {
        // Every point of the shared part already kills f_{x1}; cut it with a line.
        let shared = if f1.is_zero() { component.clone() } else { gcd_poly(&component, &f1)? };
        let mut rng = item_rng(seed, 0x11);
        let line = random_line(&mut rng);
        let rep = intersect(&PlaneCurve::new(shared)?, &PlaneCurve::new(line)?, seed)?;
        return Ok(lift_case_one(f, sigma, component, rep.points));
    } else {
        PlaneCurve::new(f1)?
    };
    let rep = intersect(&comp, &other, seed)?;
    Ok(lift_case_one(f, sigma, component, rep.points))
}

fn lift_case_one(f: &MultiPoly, sigma: &Sigma, component: MultiPoly, pts: Vec<IntersectionPoint>) -> CdeVerdict {
    let s = sigma.to_complex();
    for q in pts {
        let c = q.point.coords();
        let x = [c[0], s * c[0], c[1], c[2]];
        if let Some(w) = verify_witness(f, &x) {
            return CdeVerdict::Case1Witness { component, witness: w };
        }
    }
    CdeVerdict::Inconclusive("shared component found but no point lifted to a singular point".into())
}

#[derive(Clone, Debug, Serialize)]
pub struct IntersectionPointJson {
    pub point: NumPointJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactPointJson>,
    pub multiplicity: usize,
}

impl From<&IntersectionPoint> for IntersectionPointJson {
    fn from(p: &IntersectionPoint) -> Self {
        IntersectionPointJson { point: p.point.to_json(), exact: p.exact.as_ref().map(|e| e.to_json()), multiplicity: p.multiplicity }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IntersectionReportJson {
    pub points: Vec<IntersectionPointJson>,
    pub total: usize,
    pub degrees: [u32; 2],
    pub common_component: Option<String>,
    pub coordinate_change_used: Option<Vec<Vec<String>>>,
}

impl From<&IntersectionReport> for IntersectionReportJson {
    fn from(r: &IntersectionReport) -> Self {
        IntersectionReportJson {
            points: r.points.iter().map(Into::into).collect(),
            total: r.total,
            degrees: [r.degrees.0, r.degrees.1],
            common_component: r.common_component.as_ref().map(|c| c.render(&PLANE_VARS)),
            coordinate_change_used: r
                .coordinate_change_used
                .as_ref()
                .map(|m| m.iter().map(|row| row.iter().map(|c| c.to_string()).collect()).collect()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_poly;
    use crate::surface::certify_nonsingular;

    fn curve(s: &str) -> PlaneCurve {
        PlaneCurve::new(parse_poly(s, &PLANE_VARS).unwrap()).unwrap()
    }

    fn has_point(r: &IntersectionReport, coords: [f64; 3], mult: usize) -> bool {
        let target = ProjPoint::new(coords.map(|v| ComplexF::new(v, 0.0)).to_vec()).unwrap();
        r.points.iter().any(|p| p.multiplicity == mult && p.point.approx_eq(&target, 1e-8))
    }

    #[test]
    fn curve_validation() {
        assert!(PlaneCurve::new(parse_poly("x^2 + y", &PLANE_VARS).unwrap()).is_err());
        assert!(PlaneCurve::new(parse_poly("3", &PLANE_VARS).unwrap()).is_err());
        assert!(PlaneCurve::new(MultiPoly::zero(3)).is_err());
    }

    #[test]
    fn common_components() {
        let l = "(x + 2*y - z)";
        let c = curve(&format!("x*{l}"));
        let d = curve(&format!("y*{l}"));
        assert_eq!(common_component(&c, &d).unwrap().poly(), &parse_poly(l, &PLANE_VARS).unwrap().monic());
        assert!(common_component(&curve("4*y^3"), &curve("4*z^3")).is_none());
        let r = intersect(&c, &d, 1).unwrap();
        assert!(r.common_component.is_some() && r.points.is_empty());
    }

    #[test]
    fn two_lines() {
        let r = intersect(&curve("x"), &curve("y"), 1).unwrap();
        assert_eq!(r.total, 1);
        assert!(has_point(&r, [0.0, 0.0, 1.0], 1));
        assert!(r.points[0].exact.is_some());
    }

    #[test]
    fn conic_tangent_to_line() {
        let r = intersect(&curve("y*z - x^2"), &curve("y"), 2).unwrap();
        assert_eq!(r.points.len(), 1);
        assert!(has_point(&r, [0.0, 0.0, 1.0], 2));
    }

    #[test]
    fn cubes_meet_once_with_multiplicity_nine() {
        let r = intersect(&curve("4*y^3"), &curve("4*z^3"), 3).unwrap();
        assert_eq!(r.total, 9);
        assert!(has_point(&r, [1.0, 0.0, 0.0], 9));
    }

    #[test]
    fn conics_in_general_position() {
        let r = intersect(&curve("x^2 + y^2 - z^2"), &curve("x*y - 2*z^2"), 4).unwrap();
        assert_eq!(r.total, 4);
        assert_eq!(r.points.len(), 4);
    }

    #[test]
    fn coordinate_change_invariance() {
        let c = curve("x^3 + y^3 - 2*z^3 + x*y*z");
        let d = curve("x^2 - y*z + i*z^2");
        let a = intersect(&c, &d, 10).unwrap();
        let b = intersect(&c, &d, 11).unwrap();
        assert_ne!(a.coordinate_change_used, b.coordinate_change_used);
        assert_eq!(a.total, 6);
        for p in &a.points {
            assert!(b.points.iter().any(|q| q.multiplicity == p.multiplicity && q.point.approx_eq(&p.point, 1e-8)));
        }
    }

    const V4: [&str; 4] = ["x0", "x1", "x2", "x3"];

    #[test]
    fn fermat_slice_curves() {
        let f = parse_poly("x0^4+x1^4+x2^4+x3^4", &V4).unwrap();
        let cur = build_cde(&f, &Sigma::Exact(GaussRat::one())).unwrap();
        assert_eq!(cur.c, parse_poly("2*u^4 + z2^4 + z3^4", &CDE_VARS).unwrap());
        assert_eq!(cur.d, parse_poly("4*z2^3", &CDE_VARS).unwrap());
        assert_eq!(cur.e, parse_poly("4*z3^3", &CDE_VARS).unwrap());
        assert_eq!(cur.degrees(), [Some(4), Some(3), Some(3)]);
    }

    #[test]
    fn slice_derivative_matches_restricted_partial() {
        let f = parse_poly("x0^3*x1 + x1^2*x2*x3 + (2+i)*x2^4 - x3^4 + x0*x1*x2^2", &V4).unwrap();
        let s = GaussRat::from_fracs(1, 2, -3, 4);
        let cur = build_cde(&f, &Sigma::Exact(s.clone())).unwrap();
        let (fd, _, _) = restrict(&f.partial_derivative(2), &Sigma::Exact(s)).unwrap();
        assert_eq!(cur.d, fd);
    }

    #[test]
    fn degenerate_slice() {
        let f = parse_poly("(x1 - x0)*(x0^3 + x2^3 + x3^3)", &V4).unwrap();
        assert!(matches!(build_cde(&f, &Sigma::Exact(GaussRat::one())), Err(Error::DegenerateSlice)));
    }

    #[test]
    fn fermat_rational_slices_are_empty() {
        let f = parse_poly("x0^4+x1^4+x2^4+x3^4", &V4).unwrap();
        for (k, s) in [(1, 0), (0, 1), (1, 1), (2, -1), (-3, 5)].iter().enumerate() {
            let v = cde_finiteness(&f, &Sigma::Exact(GaussRat::from_fracs(s.0, 2, s.1, 3)), k as u64).unwrap();
            match v {
                CdeVerdict::Finite { points, .. } => assert!(points.is_empty()),
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn fermat_omega_slice() {
        let f = parse_poly("x0^4+x1^4+x2^4+x3^4", &V4).unwrap();
        let w = ComplexF::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        match cde_finiteness(&f, &Sigma::Numeric(w), 5).unwrap() {
            CdeVerdict::Finite { points, .. } => {
                assert_eq!(points.len(), 1);
                let one = ComplexF::new(1.0, 0.0);
                let o = ComplexF::new(0.0, 0.0);
                assert!(points[0].point.approx_eq(&ProjPoint::new(vec![one, o, o]).unwrap(), 1e-8));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn singular_quartic_gives_case_one_witness() {
        let f = parse_poly("x0^4+x1^4+x2^4", &V4).unwrap();
        let w = ComplexF::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        match cde_finiteness(&f, &Sigma::Numeric(w), 6).unwrap() {
            CdeVerdict::Case1Witness { witness, .. } => {
                let p = witness.to_numeric();
                let s = crate::surface::QuarticSurface::new(f.clone()).unwrap();
                assert!(s.eval_all(p.normalize_max().coords()).iter().all(|v| v.norm() < 1e-12));
                let o = ComplexF::new(0.0, 0.0);
                assert!(p.approx_eq(&ProjPoint::new(vec![o, o, o, ComplexF::new(1.0, 0.0)]).unwrap(), 1e-12));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn other_certified_quartics_never_give_case_one() {
        for s in ["x0^3*x1 + x1^4 + x2^4 + x3^4", "x0^4 + 2*x1^4 + 3*x2^4 + 5*x3^4"] {
            let f = parse_poly(s, &V4).unwrap();
            assert_eq!(certify_nonsingular(&f, 1).status, crate::surface::SingularityStatus::CertifiedNonsingular, "{s}");
            for k in 0..3 {
                let sigma = Sigma::Exact(GaussRat::from_fracs(k + 1, 3, 1 - k, 2));
                let v = cde_finiteness(&f, &sigma, k as u64).unwrap();
                assert!(matches!(v, CdeVerdict::Finite { .. }), "{s}: {v:?}");
            }
        }
    }
}
