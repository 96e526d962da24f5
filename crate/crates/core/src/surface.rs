//! The quartic surface `X = {f = 0} ⊂ CP³`.
//!
//! Nonsingularity is certified chart by chart. On chart `i` the singular
//! points are the common zeros of the dehomogenized `f̂` and its three
//! partials (the remaining homogeneous partial is a combination of these by
//! the Euler identity). Variables are eliminated with resultants, last
//! variable first; if the surviving univariate polynomials have a constant
//! gcd the chart is clean. Otherwise candidate zeros are back-substituted
//! and the resulting point is verified against all five defining
//! polynomials.

use std::time::Instant;

use rand::Rng;
use serde::Serialize;

use crate::algebra::{exact_div, gcd_many, resultant};
use crate::error::{Error, Result};
use crate::par::{item_rng, map_indexed, Exec};
use crate::poly::{MultiPoly, NumPoly};
use crate::projective::{ChartId, ExactPointJson, NumPointJson, ProjPoint, ProjPointNum};
use crate::roots::{numeric_roots, to_upoly, upoly_roots, UPoly};
use crate::scalar::{rationalize_complex, ComplexF, GaussRat};

/// Residual bound for points accepted as lying on the surface.
pub const ON_SURFACE_TOL: f64 = 1e-10;
/// Below this modulus every chart-local partial is treated as vanishing.
pub const NEAR_SINGULAR_TOL: f64 = 1e-12;
const MAX_COORD_CHANGES: usize = 5;
const MAX_SAMPLE_ATTEMPTS: usize = 100;

/// A singular point found by the certifier.
#[derive(Clone, Debug, PartialEq)]
pub enum Witness {
    Exact(ProjPoint<GaussRat>),
    Numeric(ProjPointNum),
}

impl Witness {
    pub fn to_numeric(&self) -> ProjPointNum {
        match self {
            Witness::Exact(p) => p.to_numeric(),
            Witness::Numeric(p) => p.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub enum SingularityStatus {
    #[default]
    Unchecked,
    CertifiedNonsingular,
    Singular(Witness),
    Inconclusive(String),
}

impl SingularityStatus {
    pub fn label(&self) -> &'static str {
        match self {
            SingularityStatus::Unchecked => "unchecked",
            SingularityStatus::CertifiedNonsingular => "certified-nonsingular",
            SingularityStatus::Singular(_) => "singular",
            SingularityStatus::Inconclusive(_) => "inconclusive",
        }
    }
}

/// Per-chart data used by the numeric path.
#[derive(Clone, Debug)]
struct ChartPolys {
    exact: MultiPoly,
    num: NumPoly,
    grad: [NumPoly; 3],
}

#[derive(Clone, Debug)]
pub struct QuarticSurface {
    f: MultiPoly,
    partials: Vec<MultiPoly>,
    f_num: NumPoly,
    partials_num: Vec<NumPoly>,
    charts: Vec<ChartPolys>,
    coeff_scale: f64,
    status: SingularityStatus,
}

impl QuarticSurface {
    pub fn new(f: MultiPoly) -> Result<Self> {
        if f.nvars() != 4 || f.is_zero() || !f.is_homogeneous(4) {
            return Err(Error::NotQuartic);
        }
        let partials = f.gradient();
        let charts = (0..4)
            .map(|i| {
                let exact = f.dehomogenize(i).expect("homogeneous");
                let num = exact.to_numeric();
                let grad = [0, 1, 2].map(|k| exact.partial_derivative(k).to_numeric());
                ChartPolys { exact, num, grad }
            })
            .collect();
        let coeff_scale = f.terms().map(|(_, c)| c.to_complex().norm()).sum();
        Ok(QuarticSurface {
            f_num: f.to_numeric(),
            partials_num: partials.iter().map(MultiPoly::to_numeric).collect(),
            partials,
            f,
            charts,
            coeff_scale,
            status: SingularityStatus::Unchecked,
        })
    }

    pub fn poly(&self) -> &MultiPoly {
        &self.f
    }

    pub fn partials(&self) -> &[MultiPoly] {
        &self.partials
    }

    pub fn status(&self) -> &SingularityStatus {
        &self.status
    }

    /// Run the certifier and store its verdict.
    pub fn certify(&mut self, seed: u64) -> &SingularityStatus {
        self.status = certify_nonsingular(&self.f, seed).status;
        &self.status
    }

    /// Dehomogenized polynomial on `chart`, in chart-local variables.
    pub fn chart_poly(&self, chart: ChartId) -> &MultiPoly {
        &self.charts[chart.0].exact
    }

    pub fn contains_exact(&self, p: &ProjPoint<GaussRat>) -> bool {
        p.dim() == 4 && self.f.evaluate_exact(p.coords()).map(|v| v.is_zero()).unwrap_or(false)
    }

    pub fn contains_num(&self, p: &ProjPointNum) -> bool {
        p.dim() == 4 && self.residual(p) <= ON_SURFACE_TOL
    }

    /// `|f(p)|` with `p` scaled to unit max-modulus, relative to the sum of
    /// coefficient moduli.
    pub fn residual(&self, p: &ProjPointNum) -> f64 {
        let q = p.normalize_max();
        self.f_num.eval(q.coords()).norm() / self.coeff_scale
    }

    /// Chart-local value and gradient of `f̂` at affine point `u`.
    pub fn chart_gradient(&self, chart: ChartId, u: &[ComplexF; 3]) -> [ComplexF; 3] {
        let c = &self.charts[chart.0];
        [c.grad[0].eval(u), c.grad[1].eval(u), c.grad[2].eval(u)]
    }

    pub fn chart_value(&self, chart: ChartId, u: &[ComplexF; 3]) -> ComplexF {
        self.charts[chart.0].num.eval(u)
    }

    /// Homogeneous value and partials at a numeric point.
    pub fn eval_all(&self, x: &[ComplexF]) -> [ComplexF; 5] {
        [
            self.f_num.eval(x),
            self.partials_num[0].eval(x),
            self.partials_num[1].eval(x),
            self.partials_num[2].eval(x),
            self.partials_num[3].eval(x),
        ]
    }
}

/// A numerically sampled surface point, scaled so its max-modulus coordinate is 1.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfacePointNum {
    pub coords: [ComplexF; 4],
    pub chart: ChartId,
    pub residual: f64,
}

impl SurfacePointNum {
    pub fn from_point(x: &X, p: &ProjPointNum) -> Self {
        let q = p.normalize_max();
        let chart = ChartId(q.max_modulus_index());
        let c = q.coords();
        SurfacePointNum { coords: [c[0], c[1], c[2], c[3]], chart, residual: x.residual(&q) }
    }

    pub fn proj(&self) -> ProjPointNum {
        ProjPoint::new(self.coords.to_vec()).expect("max coordinate is 1")
    }

    /// Chart-local affine coordinates in `chart`.
    pub fn local(&self, chart: ChartId) -> Result<[ComplexF; 3]> {
        let a = self.proj().to_chart(chart)?;
        Ok([a.values[0], a.values[1], a.values[2]])
    }
}

type X = QuarticSurface;

/// Outcome of [`certify_nonsingular`].
#[derive(Clone, Debug)]
pub struct Certificate {
    pub status: SingularityStatus,
    pub charts_checked: usize,
    pub coordinate_changes: usize,
    pub elapsed_ms: u128,
}

enum ChartOutcome {
    Clean,
    Candidates(Vec<[ComplexF; 3]>),
    Excess(String),
}

/// Decide whether the quartic `f` is nonsingular.
pub fn certify_nonsingular(f: &MultiPoly, seed: u64) -> Certificate {
    let start = Instant::now();
    let done = |status, charts_checked, coordinate_changes| Certificate {
        status,
        charts_checked,
        coordinate_changes,
        elapsed_ms: start.elapsed().as_millis(),
    };
    if f.nvars() != 4 || !f.is_homogeneous(4) || f.is_zero() {
        return done(SingularityStatus::Inconclusive("not a homogeneous quartic".into()), 0, 0);
    }
    let mut rng = item_rng(seed, 0x5151);
    let mut charts_checked = 0;
    let mut last_reason = String::new();
    for attempt in 0..=MAX_COORD_CHANGES {
        let change = if attempt == 0 { None } else { Some(random_invertible(&mut rng, 4)) };
        let g = match &change {
            None => f.clone(),
            Some(m) => f.linear_change(m).expect("4x4 change"),
        };
        let outcomes = map_indexed(4, Exec::default(), |i| certify_chart(&g, i));
        charts_checked += 4;
        let mut all_clean = true;
        for (i, outcome) in outcomes.into_iter().enumerate() {
            match outcome {
                ChartOutcome::Clean => {}
                ChartOutcome::Excess(why) => {
                    all_clean = false;
                    last_reason = format!("chart {i}: {why}");
                }
                ChartOutcome::Candidates(cands) => {
                    all_clean = false;
                    for u in cands {
                        let mut x: Vec<ComplexF> = u.to_vec();
                        x.insert(i, ComplexF::new(1.0, 0.0));
                        if let Some(m) = &change {
                            x = apply_matrix_num(m, &x);
                        }
                        if let Some(w) = verify_witness(f, &x) {
                            return done(SingularityStatus::Singular(w), charts_checked, attempt);
                        }
                    }
                    last_reason = format!("chart {i}: elimination candidates did not lift to a singular point");
                }
            }
        }
        if all_clean {
            return done(SingularityStatus::CertifiedNonsingular, charts_checked, attempt);
        }
    }
    done(
        SingularityStatus::Inconclusive(format!(
            "{last_reason} (after {MAX_COORD_CHANGES} coordinate changes)"
        )),
        charts_checked,
        MAX_COORD_CHANGES,
    )
}

/// Random invertible matrix with small Gaussian-integer entries.
pub fn random_invertible<R: Rng>(rng: &mut R, n: usize) -> Vec<Vec<GaussRat>> {
    loop {
        let m: Vec<Vec<GaussRat>> = (0..n)
            .map(|_| (0..n).map(|_| GaussRat::from_ints(rng.gen_range(-3..=3), rng.gen_range(-3..=3))).collect())
            .collect();
        if !det_exact(&m).is_zero() {
            return m;
        }
    }
}

/// Exact determinant over ℚ(i) by Gaussian elimination.
pub fn det_exact(m: &[Vec<GaussRat>]) -> GaussRat {
    let n = m.len();
    let mut a: Vec<Vec<GaussRat>> = m.to_vec();
    let mut det = GaussRat::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !a[i][k].is_zero()) else {
            return GaussRat::zero();
        };
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        det = &det * &a[k][k];
        let inv = a[k][k].inv().expect("nonzero pivot");
        for i in k + 1..n {
            let factor = &a[i][k] * &inv;
            if factor.is_zero() {
                continue;
            }
            for j in k..n {
                let t = &factor * &a[k][j];
                a[i][j] -= &t;
            }
        }
    }
    det
}

fn apply_matrix_num(m: &[Vec<GaussRat>], x: &[ComplexF]) -> Vec<ComplexF> {
    m.iter()
        .map(|row| row.iter().zip(x).map(|(a, b)| a.to_complex() * b).sum())
        .collect()
}

fn apply_matrix_exact(m: &[Vec<GaussRat>], x: &[GaussRat]) -> Vec<GaussRat> {
    m.iter()
        .map(|row| row.iter().zip(x).fold(GaussRat::zero(), |acc, (a, b)| &acc + &(a * b)))
        .collect()
}

/// Check that `f` and its four partials vanish at `x`: exactly if `x` snaps
/// to a Gaussian-rational point, otherwise numerically after Newton polishing.
pub fn verify_witness(f: &MultiPoly, x: &[ComplexF]) -> Option<Witness> {
    let p = ProjPoint::new(x.to_vec()).ok()?.normalize_max();
    let partials = f.gradient();
    let snapped: Option<Vec<GaussRat>> =
        p.coords().iter().map(|&c| rationalize_complex(c, 1000, 1e-7)).collect();
    if let Some(exact) = snapped {
        let all_vanish = f.evaluate_exact(&exact).ok()?.is_zero()
            && partials.iter().all(|d| d.evaluate_exact(&exact).map(|v| v.is_zero()).unwrap_or(false));
        if all_vanish {
            return Some(Witness::Exact(ProjPoint::new(exact).ok()?.normalize()));
        }
    }
    let num: Vec<NumPoly> = partials.iter().map(MultiPoly::to_numeric).collect();
    let polished = polish_singular(&num, p.coords().to_vec());
    let q = ProjPoint::new(polished).ok()?.normalize_max();
    let scale: f64 = f.terms().map(|(_, c)| c.to_complex().norm()).sum();
    let fv = f.to_numeric().eval(q.coords()).norm() / scale;
    let worst = num.iter().map(|d| d.eval(q.coords()).norm()).fold(fv, f64::max) / scale.max(1.0);
    (worst <= ON_SURFACE_TOL).then_some(Witness::Numeric(q))
}

/// Newton on the four homogeneous partials with the max coordinate pinned to 1.
fn polish_singular(partials: &[NumPoly], mut x: Vec<ComplexF>) -> Vec<ComplexF> {
    let pin = ProjPoint::new(x.clone()).map(|p| p.max_modulus_index()).unwrap_or(0);
    let free: Vec<usize> = (0..4).filter(|&k| k != pin).collect();
    for _ in 0..20 {
        let vals: Vec<ComplexF> = partials.iter().map(|d| d.eval(&x)).collect();
        // Jacobian of the 4 partials w.r.t. the 3 free coordinates; solve
        // the 3x3 normal equations.
        let jac: Vec<Vec<ComplexF>> = partials
            .iter()
            .map(|d| free.iter().map(|&k| d.partial_derivative(k).eval(&x)).collect())
            .collect();
        let mut a = [[ComplexF::new(0.0, 0.0); 3]; 3];
        let mut b = [ComplexF::new(0.0, 0.0); 3];
        for r in 0..4 {
            for i in 0..3 {
                b[i] += jac[r][i].conj() * vals[r];
                for j in 0..3 {
                    a[i][j] += jac[r][i].conj() * jac[r][j];
                }
            }
        }
        let Some(step) = solve3(a, b) else { break };
        for (i, &k) in free.iter().enumerate() {
            x[k] -= step[i];
        }
        if step.iter().map(|s| s.norm()).fold(0.0, f64::max) < 1e-15 {
            break;
        }
    }
    x
}

pub(crate) fn solve3(mut a: [[ComplexF; 3]; 3], mut b: [ComplexF; 3]) -> Option<[ComplexF; 3]> {
    for k in 0..3 {
        let p = (k..3).max_by(|&i, &j| a[i][k].norm().total_cmp(&a[j][k].norm()))?;
        if a[p][k].norm() < 1e-300 {
            return None;
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..3 {
            let f = a[i][k] / a[k][k];
            for j in k..3 {
                let t = a[k][j];
                a[i][j] -= f * t;
            }
            let t = b[k];
            b[i] -= f * t;
        }
    }
    let mut x = [ComplexF::new(0.0, 0.0); 3];
    for k in (0..3).rev() {
        let mut s = b[k];
        for j in k + 1..3 {
            s -= a[k][j] * x[j];
        }
        x[k] = s / a[k][k];
    }
    Some(x)
}

/// Square-free part `p / gcd(p, ∇p)`; same zero set, lower degrees.
pub fn radical(p: &MultiPoly) -> MultiPoly {
    if p.is_constant() {
        return p.clone();
    }
    let mut parts = vec![p.clone()];
    parts.extend((0..p.nvars()).filter(|&v| p.involves(v)).map(|v| p.partial_derivative(v)));
    match gcd_many(&parts) {
        Some(g) if !g.is_constant() => exact_div(p, &g).expect("gcd divides").monic(),
        _ => p.monic(),
    }
}

fn reduce_set(set: Vec<MultiPoly>) -> Vec<MultiPoly> {
    let mut out: Vec<MultiPoly> = Vec::with_capacity(set.len());
    for p in set.iter().filter(|p| !p.is_zero()).map(radical) {
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

fn has_nonzero_constant(set: &[MultiPoly]) -> bool {
    set.iter().any(|p| p.is_constant() && !p.is_zero())
}

/// Eliminate `var` from `set`: polynomials free of `var` pass through; the
/// rest are paired against the one of least degree in `var`.
fn eliminate_var(set: &[MultiPoly], var: usize) -> std::result::Result<Vec<MultiPoly>, String> {
    let (with, without): (Vec<&MultiPoly>, Vec<&MultiPoly>) = set.iter().partition(|p| p.involves(var));
    let mut out: Vec<MultiPoly> = without.into_iter().cloned().collect();
    if with.len() < 2 {
        return Ok(out);
    }
    let pivot_idx = (0..with.len())
        .min_by_key(|&k| (with[k].degree_in(var), with[k].num_terms()))
        .expect("nonempty");
    let pivot = with[pivot_idx];
    for (k, q) in with.iter().enumerate() {
        if k == pivot_idx {
            continue;
        }
        let r = resultant(pivot, q, var).map_err(|e| e.to_string())?;
        if r.is_zero() {
            return Err(format!("resultant in variable {var} vanishes identically"));
        }
        out.push(r);
    }
    Ok(out)
}

/// The three levels of one elimination order: `order[2]` is eliminated
/// first, then `order[1]`; `last` is the gcd of what remains, a univariate
/// polynomial in `order[0]`.
struct Elimination {
    order: [usize; 3],
    levels: [Vec<MultiPoly>; 2],
    last: MultiPoly,
}

enum Eliminated {
    Clean,
    Pending(Elimination),
}

fn eliminate_in_order(level0: &[MultiPoly], order: [usize; 3]) -> std::result::Result<Eliminated, String> {
    let level1 = reduce_set(eliminate_var(level0, order[2])?);
    if has_nonzero_constant(&level1) {
        return Ok(Eliminated::Clean);
    }
    let level2 = reduce_set(eliminate_var(&level1, order[1])?);
    if has_nonzero_constant(&level2) {
        return Ok(Eliminated::Clean);
    }
    if level2.iter().any(|p| p.involves(order[1]) || p.involves(order[2])) {
        return Err("elimination left more than one variable".into());
    }
    let Some(last) = gcd_many(&level2) else {
        return Err(format!("elimination left no constraint on variable {}", order[0]));
    };
    if last.is_constant() {
        return Ok(Eliminated::Clean);
    }
    Ok(Eliminated::Pending(Elimination { order, levels: [level0.to_vec(), level1], last }))
}

const ORDERS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

fn certify_chart(g: &MultiPoly, chart: usize) -> ChartOutcome {
    let fh = g.dehomogenize(chart).expect("homogeneous");
    let mut level0: Vec<MultiPoly> = vec![fh.clone()];
    level0.extend((0..3).map(|k| fh.partial_derivative(k)));
    let level0 = reduce_set(level0);
    if has_nonzero_constant(&level0) {
        return ChartOutcome::Clean;
    }
    // A single order can pick up extraneous factors from vanishing leading
    // coefficients; any order that ends in a constant settles the chart.
    let mut first: Option<Elimination> = None;
    let mut failure = String::new();
    for order in ORDERS {
        match eliminate_in_order(&level0, order) {
            Ok(Eliminated::Clean) => return ChartOutcome::Clean,
            Ok(Eliminated::Pending(e)) => {
                if first.as_ref().is_none_or(|f| e.last.total_degree() < f.last.total_degree()) {
                    first = Some(e);
                }
            }
            Err(e) => failure = e,
        }
    }
    let Some(elim) = first else {
        return ChartOutcome::Excess(failure);
    };
    match back_substitute(&elim) {
        Ok(cands) if cands.is_empty() => ChartOutcome::Clean,
        Ok(cands) => ChartOutcome::Candidates(cands),
        Err(e) => ChartOutcome::Excess(e),
    }
}

#[derive(Clone, Debug)]
enum Val {
    Exact(GaussRat),
    Num(ComplexF),
}

impl Val {
    fn num(&self) -> ComplexF {
        match self {
            Val::Exact(g) => g.to_complex(),
            Val::Num(z) => *z,
        }
    }
}

/// Roots of a univariate polynomial: exact for linear square-free factors.
fn exact_roots(u: &UPoly) -> Vec<Val> {
    let mut out = Vec::new();
    for (factor, _) in u.square_free() {
        if factor.degree() == 1 {
            out.push(Val::Exact(-(&factor.0[0] / &factor.0[1])));
        } else {
            out.extend(numeric_roots(&factor.to_complex()).into_iter().map(Val::Num));
        }
    }
    out
}

/// Common roots in `var` of `set` with other variables fixed. Exact when every
/// fixed value is exact.
fn solve_level(set: &[MultiPoly], fixed: &[(usize, Val)], var: usize) -> std::result::Result<Vec<Val>, String> {
    if fixed.iter().all(|(_, v)| matches!(v, Val::Exact(_))) {
        let mut polys = Vec::new();
        for p in set {
            let mut q = p.clone();
            for (k, v) in fixed {
                if let Val::Exact(g) = v {
                    q = q.substitute(*k, g);
                }
            }
            if q.is_zero() {
                continue;
            }
            if q.is_constant() {
                return Ok(vec![]);
            }
            polys.push(q);
        }
        let Some(g) = gcd_many(&polys) else {
            return Err("a fibre of the projection is not finite".into());
        };
        return Ok(exact_roots(&to_upoly(&g, var).expect("univariate after substitution")));
    }
    let nums: Vec<(usize, ComplexF)> = fixed.iter().map(|(k, v)| (*k, v.num())).collect();
    common_roots(set, &nums, var).map(|r| r.into_iter().map(Val::Num).collect())
}

fn back_substitute(e: &Elimination) -> std::result::Result<Vec<[ComplexF; 3]>, String> {
    let [v0, v1, v2] = e.order;
    let mut out = Vec::new();
    for r0 in exact_roots(&to_upoly(&e.last, v0).expect("univariate")) {
        for r1 in solve_level(&e.levels[1], &[(v0, r0.clone())], v1)? {
            for r2 in solve_level(&e.levels[0], &[(v0, r0.clone()), (v1, r1.clone())], v2)? {
                let mut p = [ComplexF::new(0.0, 0.0); 3];
                p[v0] = r0.num();
                p[v1] = r1.num();
                p[v2] = r2.num();
                out.push(p);
            }
        }
    }
    Ok(out)
}

/// Numeric common roots in `var` of `set` after fixing the given variables.
fn common_roots(set: &[MultiPoly], fixed: &[(usize, ComplexF)], var: usize) -> std::result::Result<Vec<ComplexF>, String> {
    let mut polys: Vec<Vec<ComplexF>> = Vec::new();
    for p in set {
        let mut c = vec![ComplexF::new(0.0, 0.0); p.degree_in(var) as usize + 1];
        let mut mags = vec![0.0f64; c.len()];
        for (m, a) in p.terms() {
            let mut t = a.to_complex();
            for &(v, x) in fixed {
                t *= x.powu(m.exps()[v]);
            }
            c[m.exps()[var] as usize] += t;
            mags[m.exps()[var] as usize] += t.norm();
        }
        // Cancellation down to rounding level counts as an exact zero.
        for (z, m) in c.iter_mut().zip(&mags) {
            if z.norm() <= 1e-9 * m.max(f64::MIN_POSITIVE) {
                *z = ComplexF::new(0.0, 0.0);
            }
        }
        while c.last().is_some_and(|z| z.norm() == 0.0) {
            c.pop();
        }
        match c.len() {
            0 => {}
            1 => return Ok(vec![]),
            _ => polys.push(c),
        }
    }
    let Some(base) = polys.iter().min_by_key(|c| c.len()) else {
        return Err("a fibre of the projection is not finite".into());
    };
    let mut out: Vec<ComplexF> = Vec::new();
    for r in numeric_roots(base) {
        let ok = polys.iter().all(|c| {
            let scale: f64 = c.iter().enumerate().map(|(k, a)| a.norm() * r.norm().powi(k as i32)).sum();
            let v: ComplexF = c.iter().rev().fold(ComplexF::new(0.0, 0.0), |acc, a| acc * r + a);
            v.norm() <= 1e-6 * scale.max(f64::MIN_POSITIVE)
        });
        if ok && !out.iter().any(|o| (o - r).norm() < 1e-9) {
            out.push(r);
        }
    }
    Ok(out)
}

/// Draw `n` points on `X` deterministically from `seed`. Each point fixes two
/// random chart coordinates and solves the resulting univariate quartic.
pub fn sample_points(x: &X, n: usize, seed: u64, exec: Exec) -> Result<Vec<SurfacePointNum>> {
    if n == 0 {
        return Err(Error::Sampling("sample count must be at least 1".into()));
    }
    map_indexed(n, exec, |k| sample_one(x, seed, k as u64)).into_iter().collect()
}

fn random_gauss_rat<R: Rng>(rng: &mut R) -> GaussRat {
    GaussRat::from_fracs(rng.gen_range(-1500..=1500), 1000, rng.gen_range(-1500..=1500), 1000)
}

fn sample_one(x: &X, seed: u64, index: u64) -> Result<SurfacePointNum> {
    let mut rng = item_rng(seed, index);
    for _ in 0..MAX_SAMPLE_ATTEMPTS {
        let chart = rng.gen_range(0..4usize);
        let solve = rng.gen_range(0..3usize);
        let fixed: Vec<(usize, GaussRat)> =
            (0..3).filter(|&k| k != solve).map(|k| (k, random_gauss_rat(&mut rng))).collect();
        let mut slice = x.charts[chart].exact.clone();
        for (k, v) in &fixed {
            slice = slice.substitute(*k, v);
        }
        let Some(u) = to_upoly(&slice, solve) else { continue };
        if u.is_zero() || u.degree() == 0 {
            continue;
        }
        let roots = upoly_roots(&u);
        let (root, _) = roots[rng.gen_range(0..roots.len())];
        let mut local = [ComplexF::new(0.0, 0.0); 3];
        for (k, v) in &fixed {
            local[*k] = v.to_complex();
        }
        local[solve] = root;
        let local = newton_to_surface(x, ChartId(chart), local);
        let mut hom = local.to_vec();
        hom.insert(chart, ComplexF::new(1.0, 0.0));
        let Ok(p) = ProjPoint::new(hom) else { continue };
        let sp = SurfacePointNum::from_point(x, &p);
        if sp.residual <= ON_SURFACE_TOL && sp.coords.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            return Ok(sp);
        }
    }
    Err(Error::Sampling(format!("no valid point after {MAX_SAMPLE_ATTEMPTS} attempts")))
}

/// Minimal-norm Newton steps toward `f̂ = 0` along the conjugate gradient.
fn newton_to_surface(x: &X, chart: ChartId, mut u: [ComplexF; 3]) -> [ComplexF; 3] {
    for _ in 0..3 {
        let v = x.chart_value(chart, &u);
        let g = x.chart_gradient(chart, &u);
        let gn: f64 = g.iter().map(|z| z.norm_sqr()).sum();
        if gn == 0.0 || v.norm() == 0.0 {
            break;
        }
        let next = [0, 1, 2].map(|k| u[k] - v * g[k].conj() / gn);
        if x.chart_value(chart, &next).norm() >= v.norm() {
            break;
        }
        u = next;
    }
    u
}

/// Tangent vectors and dual covectors at a surface point, in one chart.
///
/// With pivot `p` and the other local indices `q = p+1`, `r = p+2` (mod 3),
/// `V1 = e_q − (f_q/f_p) e_p` and `V2 = e_r − (f_r/f_p) e_p`.
#[derive(Clone, Debug)]
pub struct TangentFrame {
    pub base: SurfacePointNum,
    pub chart: ChartId,
    pub local: [ComplexF; 3],
    pub partials: [ComplexF; 3],
    pub pivot: usize,
    pub v1: [ComplexF; 3],
    pub v2: [ComplexF; 3],
    pub phi1: [ComplexF; 3],
    pub phi2: [ComplexF; 3],
    pub alpha: f64,
    pub theta1: f64,
}

impl TangentFrame {
    /// `(q, r)`: the two non-pivot local indices in cyclic order.
    pub fn others(&self) -> (usize, usize) {
        ((self.pivot + 1) % 3, (self.pivot + 2) % 3)
    }

    pub fn pivot_partial(&self) -> ComplexF {
        self.partials[self.pivot]
    }

    /// `max |φⁱ(V_j) − δ_ij|`.
    pub fn duality_defect(&self) -> f64 {
        let pair = |phi: &[ComplexF; 3], v: &[ComplexF; 3]| -> ComplexF { (0..3).map(|k| phi[k] * v[k]).sum() };
        let one = ComplexF::new(1.0, 0.0);
        [
            (pair(&self.phi1, &self.v1) - one).norm(),
            pair(&self.phi1, &self.v2).norm(),
            pair(&self.phi2, &self.v1).norm(),
            (pair(&self.phi2, &self.v2) - one).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// `max_k |∇f̂ · V_k|` relative to `|∇f̂|`.
    pub fn tangency_defect(&self) -> f64 {
        let g = self.partials;
        let gn = g.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let dot = |v: &[ComplexF; 3]| (0..3).map(|k| g[k] * v[k]).sum::<ComplexF>().norm();
        dot(&self.v1).max(dot(&self.v2)) / gn
    }

    /// `S = Σ|f_k|² / |f_pivot|²`.
    pub fn s_ratio(&self) -> f64 {
        let fp = self.pivot_partial().norm_sqr();
        self.partials.iter().map(|z| z.norm_sqr()).sum::<f64>() / fp
    }
}

/// Frame in the point's own chart (its max-modulus coordinate).
pub fn tangent_frame(x: &X, p: &SurfacePointNum) -> Result<TangentFrame> {
    tangent_frame_in(x, p, p.chart)
}

pub fn tangent_frame_in(x: &X, p: &SurfacePointNum, chart: ChartId) -> Result<TangentFrame> {
    let local = p.local(chart)?;
    let partials = x.chart_gradient(chart, &local);
    let pivot = (0..3)
        .max_by(|&a, &b| partials[a].norm().total_cmp(&partials[b].norm()))
        .expect("three partials");
    frame_with_pivot(p, chart, local, partials, pivot)
}

/// Frame with an explicitly chosen pivot, which must be nonvanishing.
pub fn frame_with_pivot(
    p: &SurfacePointNum,
    chart: ChartId,
    local: [ComplexF; 3],
    partials: [ComplexF; 3],
    pivot: usize,
) -> Result<TangentFrame> {
    if partials.iter().all(|z| z.norm() < NEAR_SINGULAR_TOL) || partials[pivot].norm() < NEAR_SINGULAR_TOL {
        return Err(Error::NearSingular { threshold: NEAR_SINGULAR_TOL });
    }
    let (q, r) = ((pivot + 1) % 3, (pivot + 2) % 3);
    let fp = partials[pivot];
    let a = partials[q] / fp;
    let b = partials[r] / fp;
    let zero = ComplexF::new(0.0, 0.0);
    let one = ComplexF::new(1.0, 0.0);
    let mut v1 = [zero; 3];
    let mut v2 = [zero; 3];
    v1[pivot] = -a;
    v1[q] = one;
    v2[pivot] = -b;
    v2[r] = one;
    let alpha = 1.0 / (1.0 + a.norm_sqr() + b.norm_sqr());
    let mut phi1 = [zero; 3];
    let mut phi2 = [zero; 3];
    phi1[pivot] = -a.conj() * alpha;
    phi1[q] = ComplexF::new(1.0 - a.norm_sqr() * alpha, 0.0);
    phi1[r] = -a.conj() * b * alpha;
    phi2[pivot] = -b.conj() * alpha;
    phi2[q] = -a * b.conj() * alpha;
    phi2[r] = ComplexF::new(1.0 - b.norm_sqr() * alpha, 0.0);
    Ok(TangentFrame {
        base: p.clone(),
        chart,
        local,
        partials,
        pivot,
        v1,
        v2,
        phi1,
        phi2,
        alpha,
        theta1: fp.arg(),
    })
}

/// JSON-facing status for reports.
#[derive(Clone, Debug, Serialize)]
pub struct SurfaceStatusJson {
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<ExactPointJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_numeric: Option<NumPointJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub charts_checked: usize,
    pub coordinate_changes: usize,
}

impl From<&Certificate> for SurfaceStatusJson {
    fn from(c: &Certificate) -> Self {
        let (witness, witness_numeric, reason) = match &c.status {
            SingularityStatus::Singular(Witness::Exact(p)) => (Some(p.to_json()), None, None),
            SingularityStatus::Singular(Witness::Numeric(p)) => (None, Some(p.to_json()), None),
            SingularityStatus::Inconclusive(r) => (None, None, Some(r.clone())),
            _ => (None, None, None),
        };
        SurfaceStatusJson {
            status: c.status.label().to_string(),
            witness,
            witness_numeric,
            reason,
            charts_checked: c.charts_checked,
            coordinate_changes: c.coordinate_changes,
        }
    }
}

/// Map a witness of `f∘M` back to a witness of `f`.
pub fn map_exact_point(m: &[Vec<GaussRat>], x: &[GaussRat]) -> Vec<GaussRat> {
    apply_matrix_exact(m, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_poly;
    use rand::SeedableRng;

    const V: [&str; 4] = ["x0", "x1", "x2", "x3"];

    fn surface(s: &str) -> QuarticSurface {
        QuarticSurface::new(parse_poly(s, &V).unwrap()).unwrap()
    }

    #[test]
    fn rejects_non_quartics() {
        assert!(QuarticSurface::new(parse_poly("x0^3*x1 + x2", &V).unwrap()).is_err());
        assert!(QuarticSurface::new(parse_poly("x0^3", &V).unwrap()).is_err());
    }

    #[test]
    fn fermat_is_certified() {
        let c = certify_nonsingular(&parse_poly("x0^4+x1^4+x2^4+x3^4", &V).unwrap(), 1);
        assert_eq!(c.status, SingularityStatus::CertifiedNonsingular);
        assert_eq!(c.charts_checked, 4);
    }

    #[test]
    fn missing_variable_gives_exact_witness() {
        let f = parse_poly("x0^4+x1^4+x2^4", &V).unwrap();
        let c = certify_nonsingular(&f, 1);
        let expect = ProjPoint::new(vec![GaussRat::zero(), GaussRat::zero(), GaussRat::zero(), GaussRat::one()]).unwrap();
        match c.status {
            SingularityStatus::Singular(Witness::Exact(w)) => assert!(w.proj_eq(&expect)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn quadric_cone_squared_style_singularity() {
        // Singular at [1:0:0:0]: all terms have degree ≥ 2 in x1..x3.
        let f = parse_poly("x0^2*x1*x2 + x1^4 + x2^4 + x3^4", &V).unwrap();
        let c = certify_nonsingular(&f, 3);
        let w = match c.status {
            SingularityStatus::Singular(w) => w.to_numeric(),
            other => panic!("unexpected {other:?}"),
        };
        let s = QuarticSurface::new(f).unwrap();
        let vals = s.eval_all(w.normalize_max().coords());
        assert!(vals.iter().all(|v| v.norm() < 1e-10));
    }

    #[test]
    fn exact_membership() {
        let x = surface("x0^4+x1^4+x2^4+x3^4");
        let p = ProjPoint::new(vec![GaussRat::one(), GaussRat::from_ints(1, 1), GaussRat::zero(), GaussRat::zero()]).unwrap();
        assert!(!x.contains_exact(&p)); // f = 1 + (1+i)^4 = -3
        let w = ComplexF::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        let o = ComplexF::new(0.0, 0.0);
        let q = ProjPoint::new(vec![ComplexF::new(1.0, 0.0), w, o, o]).unwrap();
        assert!(x.contains_num(&q));
    }

    /// No Gaussian rational satisfies t⁴ = −1: |t⁴| = 1 forces a unit, and the
    /// four units all have t⁴ = 1. Spot-check a grid of small ones.
    #[test]
    fn no_gaussian_rational_point_of_form_1_t_0_0() {
        let x = surface("x0^4+x1^4+x2^4+x3^4");
        for a in -6..=6 {
            for b in -6..=6 {
                for d in 1..=4 {
                    let t = GaussRat::from_fracs(a, d, b, d);
                    let p = ProjPoint::new(vec![GaussRat::one(), t, GaussRat::zero(), GaussRat::zero()]).unwrap();
                    assert!(!x.contains_exact(&p));
                }
            }
        }
    }

    #[test]
    fn sampling_is_deterministic_and_on_surface() {
        let x = surface("x0^4+x1^4+x2^4+x3^4");
        let a = sample_points(&x, 40, 7, Exec::Parallel).unwrap();
        let b = sample_points(&x, 40, 7, Exec::Sequential).unwrap();
        assert_eq!(a, b);
        for p in &a {
            assert!(p.residual <= ON_SURFACE_TOL);
            assert!((p.coords[p.chart.0] - ComplexF::new(1.0, 0.0)).norm() == 0.0);
            assert!(p.coords.iter().all(|c| c.norm() <= 1.0 + 1e-15));
        }
        assert!(sample_points(&x, 0, 7, Exec::Sequential).is_err());
    }

    #[test]
    fn frame_matches_closed_form_and_is_dual() {
        let x = surface("x0^4+x1^4+x2^4+x3^4");
        for p in sample_points(&x, 50, 11, Exec::Sequential).unwrap() {
            let fr = tangent_frame(&x, &p).unwrap();
            assert!(fr.duality_defect() <= 1e-10);
            assert!(fr.tangency_defect() <= 1e-10);
            let (q, r) = fr.others();
            let fp = fr.pivot_partial();
            assert_eq!(fr.v1[q], ComplexF::new(1.0, 0.0));
            assert!((fr.v1[fr.pivot] + fr.partials[q] / fp).norm() < 1e-15);
            assert!((fr.v2[fr.pivot] + fr.partials[r] / fp).norm() < 1e-15);
            assert!((fr.alpha - 1.0 / fr.s_ratio()).abs() <= 1e-12);
            assert!(fr.theta1 > -std::f64::consts::PI && fr.theta1 <= std::f64::consts::PI);
        }
    }

    #[test]
    fn frame_refuses_singular_point() {
        let x = surface("x0^4+x1^4+x2^4");
        let p = SurfacePointNum::from_point(
            &x,
            &ProjPoint::new(vec![ComplexF::new(0.0, 0.0), ComplexF::new(0.0, 0.0), ComplexF::new(0.0, 0.0), ComplexF::new(1.0, 0.0)]).unwrap(),
        );
        assert!(matches!(tangent_frame(&x, &p), Err(Error::NearSingular { .. })));
    }

    #[test]
    fn random_change_is_invertible() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let m = random_invertible(&mut rng, 4);
        assert!(!det_exact(&m).is_zero());
    }
}
