//! Hyperkähler structure on a quartic surface and the Kähler-angle identity.
//!
//! Real tangent vectors are written in the frame basis as
//! `(Re a, Im a, Re b, Im b)` where `X^{1,0} = a V1 + b V2`. In this basis
//! `J¹` is multiplication by `i`, `J²` is the anti-linear map
//! `ξ ↦ M ξ̄` with `M = [[τ̄, −μE], [λE, −τE²]]`, `E = e^{iθ₁}`, and
//! `J³ = J¹J²`. The constraint `λμ = |τ|² + 1` is exactly `M M̄ = −1`.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::algebra::exact_div;
use crate::error::{Error, Result};
use crate::par::{item_rng, map_indexed, max_f64, Exec};
use crate::parse::render_poly;
use crate::poly::MultiPoly;
use crate::scalar::{ComplexF, GaussRat};
use crate::surface::{QuarticSurface, SurfacePointNum, TangentFrame};

pub type Mat4 = [[f64; 4]; 4];

pub const CONSTRAINT_TOL: f64 = 1e-12;

fn c(re: f64, im: f64) -> ComplexF {
    ComplexF::new(re, im)
}

pub fn mat_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn transpose(a: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = a[j][i];
        }
    }
    out
}

pub fn identity() -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    out
}

fn neg(a: &Mat4) -> Mat4 {
    a.map(|r| r.map(|x| -x))
}

/// Largest entrywise difference.
pub fn max_diff(a: &Mat4, b: &Mat4) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            d = d.max((a[i][j] - b[i][j]).abs());
        }
    }
    d
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HKParams {
    pub rho: f64,
    pub lambda: f64,
    pub mu: f64,
    pub tau: ComplexF,
    pub theta1: f64,
}

impl HKParams {
    /// Validating constructor.
    pub fn new(rho: f64, lambda: f64, mu: f64, tau: ComplexF, theta1: f64) -> Result<Self> {
        let p = HKParams { rho, lambda, mu, tau, theta1 };
        p.validate()?;
        Ok(p)
    }

    pub fn constraint_defect(&self) -> f64 {
        (self.lambda * self.mu - self.tau.norm_sqr() - 1.0).abs() / (self.lambda * self.mu).max(1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.lambda > 0.0 && self.mu > 0.0) {
            return Err(Error::Config("rho, lambda and mu must be positive".into()));
        }
        let defect = self.constraint_defect();
        if defect > CONSTRAINT_TOL {
            return Err(Error::ConstraintViolated { defect });
        }
        Ok(())
    }

    /// `τ` complex Gaussian, `λ` log-normal, `μ = (|τ|²+1)/λ`.
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        let g = |rng: &mut R| -> f64 { StandardNormal.sample(rng) };
        let tau = c(g(rng), g(rng));
        let lambda = (0.5 * g(rng)).exp();
        HKParams {
            rho: rng.gen_range(0.5..4.0),
            lambda,
            mu: (tau.norm_sqr() + 1.0) / lambda,
            tau,
            theta1: std::f64::consts::PI - rng.gen_range(0.0..2.0 * std::f64::consts::PI),
        }
    }

    pub fn with_theta(mut self, theta1: f64) -> Self {
        self.theta1 = theta1;
        self
    }

    fn e(&self) -> ComplexF {
        ComplexF::from_polar(1.0, self.theta1)
    }
}

/// Hermitian matrix `h_{ij̄}` of the metric in the `(φ¹, φ²)` coframe.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MetricAtPoint {
    pub h: [[ComplexF; 2]; 2],
    pub s: f64,
    pub f1abs: f64,
}

impl MetricAtPoint {
    pub fn det(&self) -> f64 {
        (self.h[0][0] * self.h[1][1] - self.h[0][1] * self.h[1][0]).re
    }

    pub fn is_positive_definite(&self) -> bool {
        self.h[0][0].re > 0.0 && self.det() > 0.0
    }

    /// Gram matrix of `g(X, Y) = 2 Re Σ h_{ij̄} ξ_X^i conj(ξ_Y^j)` in the real basis.
    pub fn gram(&self) -> Mat4 {
        let basis = |k: usize| -> [ComplexF; 2] {
            let mut xi = [c(0.0, 0.0); 2];
            xi[k / 2] = if k % 2 == 0 { c(1.0, 0.0) } else { c(0.0, 1.0) };
            xi
        };
        let mut g = [[0.0; 4]; 4];
        for (k, row) in g.iter_mut().enumerate() {
            for (l, entry) in row.iter_mut().enumerate() {
                let (x, y) = (basis(k), basis(l));
                let mut s = c(0.0, 0.0);
                for i in 0..2 {
                    for j in 0..2 {
                        s += self.h[i][j] * x[i] * y[j].conj();
                    }
                }
                *entry = 2.0 * s.re;
            }
        }
        g
    }
}

/// Metric from explicit `S` and `|f_pivot|`.
pub fn build_metric_raw(params: &HKParams, s: f64, f1abs: f64) -> Result<MetricAtPoint> {
    params.validate()?;
    if !(s >= 1.0 - 1e-12 && f1abs > 0.0) {
        return Err(Error::Config("S must be at least 1 and |f_pivot| positive".into()));
    }
    let k = params.rho * s / (2.0 * f1abs);
    let e = params.e();
    let h12 = -params.tau * e * k;
    Ok(MetricAtPoint {
        h: [[c(params.lambda * k, 0.0), h12], [h12.conj(), c(params.mu * k, 0.0)]],
        s,
        f1abs,
    })
}

/// Metric at a frame, with `S` and `|f_pivot|` taken relative to the frame's pivot.
pub fn build_metric(params: &HKParams, frame: &TangentFrame) -> Result<MetricAtPoint> {
    build_metric_raw(params, frame.s_ratio(), frame.pivot_partial().norm())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JTriple {
    pub j1: Mat4,
    pub j2: Mat4,
    pub j3: Mat4,
}

/// Realification of `a ↦ m ā` on one complex coordinate.
fn antilinear_block(m: ComplexF) -> [[f64; 2]; 2] {
    [[m.re, m.im], [m.im, -m.re]]
}

pub fn build_jtriple(params: &HKParams) -> Result<JTriple> {
    params.validate()?;
    let e = params.e();
    let m = [[params.tau.conj(), -params.mu * e], [params.lambda * e, -params.tau * e * e]];
    let mut j1 = [[0.0; 4]; 4];
    let mut j2 = [[0.0; 4]; 4];
    for blk in 0..2 {
        j1[2 * blk][2 * blk + 1] = -1.0;
        j1[2 * blk + 1][2 * blk] = 1.0;
    }
    for (bi, row) in m.iter().enumerate() {
        for (bj, &entry) in row.iter().enumerate() {
            let b = antilinear_block(entry);
            for r in 0..2 {
                for s in 0..2 {
                    j2[2 * bi + r][2 * bj + s] = b[r][s];
                }
            }
        }
    }
    Ok(JTriple { j1, j2, j3: mat_mul(&j1, &j2) })
}

/// Breakdown of [`check_quaternion`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuaternionCheck {
    pub squares: f64,
    pub triple_product: f64,
    pub metric: f64,
}

impl QuaternionCheck {
    pub fn max(&self) -> f64 {
        self.squares.max(self.triple_product).max(self.metric)
    }
}

/// Deviations from `(J^p)² = −1`, `J¹J²J³ = −1` and `(J^p)ᵀ G J^p = G`;
/// the metric part is relative to the largest Gram entry.
pub fn check_quaternion_detail(t: &JTriple, gram: &Mat4) -> QuaternionCheck {
    let minus = neg(&identity());
    let js = [&t.j1, &t.j2, &t.j3];
    let squares = js.iter().map(|j| max_diff(&mat_mul(j, j), &minus)).fold(0.0, f64::max);
    let triple_product = max_diff(&mat_mul(&mat_mul(&t.j1, &t.j2), &t.j3), &minus);
    let scale = gram.iter().flatten().fold(0.0f64, |a, &b| a.max(b.abs())).max(f64::MIN_POSITIVE);
    let metric = js
        .iter()
        .map(|j| max_diff(&mat_mul(&mat_mul(&transpose(j), gram), j), gram) / scale)
        .fold(0.0, f64::max);
    QuaternionCheck { squares, triple_product, metric }
}

pub fn check_quaternion(t: &JTriple, m: &MetricAtPoint) -> f64 {
    check_quaternion_detail(t, &m.gram()).max()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KahlerAngles {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

impl KahlerAngles {
    pub fn cosines(&self) -> [f64; 3] {
        [self.a1.cos(), self.a2.cos(), self.a3.cos()]
    }

    /// Random triple on the identity: `a1` away from 0 and π, then
    /// `(cos a2, cos a3)` on the circle of radius `sin a1`.
    pub fn random_valid<R: Rng>(rng: &mut R) -> Self {
        let a1: f64 = rng.gen_range(0.2..std::f64::consts::PI - 0.2);
        let t: f64 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
        KahlerAngles { a1, a2: (a1.sin() * t.cos()).acos(), a3: (a1.sin() * t.sin()).acos() }
    }
}

/// `|cos²a1 + cos²a2 + cos²a3 − 1|`.
pub fn angle_identity_residual(angles: &KahlerAngles) -> f64 {
    let [c1, c2, c3] = angles.cosines();
    (c1 * c1 + c2 * c2 + c3 * c3 - 1.0).abs()
}

/// The adapted-frame matrices for given Kähler angles, as
/// operators acting on column vectors. The classical tables list `J e_i` in
/// row `i` (so that `cos a_p = ⟨J^p e_1, e_2⟩` sits in entry (1,2)); the
/// operator is their transpose.
pub fn angle_matrices(angles: &KahlerAngles) -> Result<JTriple> {
    let [c1, c2, c3] = angles.cosines();
    let s1 = angles.a1.sin();
    if s1.abs() < 1e-12 {
        return Err(Error::Degenerate("sin a1 vanishes".into()));
    }
    let j1 = [[0.0, c1, s1, 0.0], [-c1, 0.0, 0.0, -s1], [-s1, 0.0, 0.0, c1], [0.0, s1, -c1, 0.0]];
    let (p, q) = (c2 * c1 / s1, c3 / s1);
    let j2 = [[0.0, c2, -p, q], [-c2, 0.0, q, p], [p, -q, 0.0, c2], [-q, -p, -c2, 0.0]];
    let (r, s) = (c3 * c1 / s1, c2 / s1);
    let j3 = [[0.0, c3, -r, -s], [-c3, 0.0, -s, r], [r, s, 0.0, c3], [s, -r, -c3, 0.0]];
    Ok(JTriple { j1: transpose(&j1), j2: transpose(&j2), j3: transpose(&j3) })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RotationMatrix {
    pub a: [[f64; 3]; 3],
}

impl RotationMatrix {
    pub fn identity() -> Self {
        RotationMatrix { a: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] }
    }

    /// Haar-random rotation from a normalized Gaussian quaternion.
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        let mut q = [0.0f64; 4];
        loop {
            for v in q.iter_mut() {
                *v = StandardNormal.sample(rng);
            }
            let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
            if n > 1e-8 {
                q.iter_mut().for_each(|v| *v /= n);
                break;
            }
        }
        let [w, x, y, z] = q;
        RotationMatrix {
            a: [
                [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
                [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
                [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
            ],
        }
    }

    /// `max |AᵀA − 1|` and `|det A − 1|`.
    pub fn defects(&self) -> (f64, f64) {
        let a = &self.a;
        let mut orth: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| a[k][i] * a[k][j]).sum();
                orth = orth.max((v - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
        (orth, (det - 1.0).abs())
    }

    /// `a_{pj} x^j` for `p = 1, 2, 3`.
    pub fn apply(&self, x: &S2Point) -> [f64; 3] {
        self.a.map(|row| (0..3).map(|j| row[j] * x.x[j]).sum())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct S2Point {
    pub x: [f64; 3],
}

impl S2Point {
    pub fn new(x: [f64; 3]) -> Result<Self> {
        let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("point not on the unit sphere (|x| = {n})")));
        }
        Ok(S2Point { x })
    }

    pub fn random<R: Rng>(rng: &mut R) -> Self {
        loop {
            let v: [f64; 3] = [0; 3].map(|_| StandardNormal.sample(rng));
            let n = v.iter().map(|t| t * t).sum::<f64>().sqrt();
            if n > 1e-8 {
                return S2Point { x: v.map(|t| t / n) };
            }
        }
    }
}

/// `∂φ², ∂φ³` together with the conjugate slots `∂φ̄², ∂φ̄³`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PullbackData {
    pub dphi2: ComplexF,
    pub dphi3: ComplexF,
    pub dphi2bar: ComplexF,
    pub dphi3bar: ComplexF,
}

fn factor(a: &RotationMatrix, x: &S2Point) -> Result<(f64, f64, f64)> {
    let [p1, p2, p3] = a.apply(x);
    if (1.0 + p1).abs() < 1e-12 {
        return Err(Error::Degenerate("1 + a_1·x vanishes".into()));
    }
    Ok((p1, p2, p3))
}

/// The two right-hand sides of the chart form of the triholomorphy system,
/// without the leading `i(1 + a_1·x)` factor.
fn rhs(params: &HKParams, p2: f64, p3: f64, d: &PullbackData) -> (ComplexF, ComplexF) {
    let e = params.e();
    let k = -c(p2, p3);
    (
        k * (params.tau.conj() * d.dphi2bar - params.mu * e * d.dphi3bar),
        k * (params.lambda * e * d.dphi2bar - params.tau * e * e * d.dphi3bar),
    )
}

/// Max modulus of the two triholomorphy equation residuals.
pub fn triholo_residual(a: &RotationMatrix, x: &S2Point, params: &HKParams, d: &PullbackData) -> Result<f64> {
    let (p1, p2, p3) = factor(a, x)?;
    let lead = c(0.0, 1.0 + p1);
    let (r2, r3) = rhs(params, p2, p3, d);
    Ok((lead * d.dphi2 - r2).norm().max((lead * d.dphi3 - r3).norm()))
}

/// Solve the system for `(∂φ², ∂φ³)` given the conjugate slots. The equations
/// are linear in `∂φ²`, `∂φ³` with the slots as independent data.
pub fn solve_triholo(
    a: &RotationMatrix,
    x: &S2Point,
    params: &HKParams,
    dphi2bar: ComplexF,
    dphi3bar: ComplexF,
) -> Result<PullbackData> {
    let (p1, p2, p3) = factor(a, x)?;
    let mut d = PullbackData { dphi2: c(0.0, 0.0), dphi3: c(0.0, 0.0), dphi2bar, dphi3bar };
    let lead = c(0.0, 1.0 + p1);
    let (r2, r3) = rhs(params, p2, p3, &d);
    d.dphi2 = r2 / lead;
    d.dphi3 = r3 / lead;
    Ok(d)
}

/// Cosines from the pullback identities, before conversion to angles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AngleCosines {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl AngleCosines {
    /// `cos a1 = −a_1·x`, `cos a_p = −2 a_p·x/(ρS)` for `p = 2, 3`.
    pub fn from_rotation(a: &RotationMatrix, x: &S2Point, rho_s: f64) -> Self {
        let [p1, p2, p3] = a.apply(x);
        AngleCosines { c1: -p1, c2: -2.0 * p2 / rho_s, c3: -2.0 * p3 / rho_s }
    }

    pub fn identity_residual(&self) -> f64 {
        (self.c1 * self.c1 + self.c2 * self.c2 + self.c3 * self.c3 - 1.0).abs()
    }

    pub fn to_angles(&self) -> Result<KahlerAngles> {
        let ok = |v: f64| v.abs() <= 1.0 + 1e-12;
        if !(ok(self.c1) && ok(self.c2) && ok(self.c3)) {
            return Err(Error::Degenerate("cosine outside [-1, 1]".into()));
        }
        let ac = |v: f64| v.clamp(-1.0, 1.0).acos();
        Ok(KahlerAngles { a1: ac(self.c1), a2: ac(self.c2), a3: ac(self.c3) })
    }
}

/// Density of the pulled-back volume form against `(i/2) dz∧dz̄`.
pub fn volume_density(a: &RotationMatrix, x: &S2Point, params: &HKParams, s: f64, f1abs: f64, d: &PullbackData) -> Result<f64> {
    let (p1, _, _) = factor(a, x)?;
    let (u, v) = (d.dphi2bar, d.dphi3bar);
    let quad = params.lambda * u.norm_sqr() + params.mu * v.norm_sqr()
        - 2.0 * (params.tau * params.e() * u.conj() * v).re;
    Ok(params.rho * s / (f1abs * (1.0 + p1)) * quad)
}

/// Kähler angles of a triholomorphic pullback at one point.
pub fn angles_from_pullback(
    a: &RotationMatrix,
    x: &S2Point,
    params: &HKParams,
    s: f64,
    f1abs: f64,
    d: &PullbackData,
) -> Result<(AngleCosines, f64)> {
    let residual = triholo_residual(a, x, params, d)?;
    if residual > 1e-10 {
        return Err(Error::Degenerate(format!("pullback data violates the system (residual {residual:e})")));
    }
    let density = volume_density(a, x, params, s, f1abs, d)?;
    if density <= 1e-300 {
        return Err(Error::Degenerate("pullback volume density vanishes".into()));
    }
    Ok((AngleCosines::from_rotation(a, x, params.rho * s), density))
}

/// `S` at every sample and where `ρS = 2` holds.
#[derive(Clone, Debug, Serialize)]
pub struct SConstancyReport {
    pub rho: f64,
    pub samples: usize,
    pub s_min: f64,
    pub s_max: f64,
    /// Indices of samples with `|ρS − 2| ≤ tol`.
    pub holds_at: Vec<usize>,
    /// Indices where the two non-pivot partials vanish (relative to the pivot).
    pub partials_vanish_at: Vec<usize>,
    /// Eq.-(20) residual of the induced cosines at each sample.
    pub identity_residuals: Vec<f64>,
}

impl SConstancyReport {
    /// For `ρ = 2` the two index sets must coincide.
    pub fn consistent(&self) -> bool {
        (self.rho - 2.0).abs() > 1e-15 || self.holds_at == self.partials_vanish_at
    }
}

pub fn s_constancy_witness(
    x_surf: &QuarticSurface,
    params: &HKParams,
    a: &RotationMatrix,
    sphere: &S2Point,
    samples: &[SurfacePointNum],
) -> SConstancyReport {
    let tol = 1e-10;
    let mut rep = SConstancyReport {
        rho: params.rho,
        samples: samples.len(),
        s_min: f64::INFINITY,
        s_max: 0.0,
        holds_at: vec![],
        partials_vanish_at: vec![],
        identity_residuals: vec![],
    };
    for (k, p) in samples.iter().enumerate() {
        let Ok(local) = p.local(p.chart) else { continue };
        let g = x_surf.chart_gradient(p.chart, &local);
        let piv = (0..3).max_by(|&i, &j| g[i].norm().total_cmp(&g[j].norm())).expect("three");
        let s = g.iter().map(|z| z.norm_sqr()).sum::<f64>() / g[piv].norm_sqr();
        rep.s_min = rep.s_min.min(s);
        rep.s_max = rep.s_max.max(s);
        if (params.rho * s - 2.0).abs() <= tol {
            rep.holds_at.push(k);
        }
        let others = g[(piv + 1) % 3].norm() + g[(piv + 2) % 3].norm();
        if others <= tol * g[piv].norm() {
            rep.partials_vanish_at.push(k);
        }
        rep.identity_residuals.push(AngleCosines::from_rotation(a, sphere, params.rho * s).identity_residual());
    }
    rep
}

/// Outcome of the exact check of `h(z1, z2) = [z1 : ωz1 : z2 : ωz2]`, `ω = e^{iπ/4}`.
#[derive(Clone, Debug, Serialize)]
pub struct MapHReport {
    pub symbolic_identity: bool,
    pub holomorphic: bool,
    pub origin_singular: bool,
    pub z1_constant: String,
    pub numeric_residual: f64,
}

impl MapHReport {
    pub fn passed(&self) -> bool {
        self.symbolic_identity && self.holomorphic && self.origin_singular && self.z1_constant == "omega"
            && self.numeric_residual <= 1e-14
    }
}

/// Rewrite `ω^e` as `(−1)^{e div 4} ω^{e mod 4}` in variable `w`.
pub fn reduce_omega(p: &MultiPoly, w: usize) -> MultiPoly {
    MultiPoly::from_terms(
        p.nvars(),
        p.terms().map(|(m, c)| {
            let mut e = m.exps().to_vec();
            let q = e[w] / 4;
            e[w] %= 4;
            let c = if q % 2 == 1 { -c } else { c.clone() };
            (e, c)
        }),
    )
}

/// The Fermat quartic composed with `h`, in `ℚ(i)[z1, z2, ω]/(ω⁴ + 1)`.
pub fn verify_map_h() -> MapHReport {
    let (z1, z2, w) = (MultiPoly::var(3, 0), MultiPoly::var(3, 1), MultiPoly::var(3, 2));
    let comps = [z1.clone(), &w * &z1, z2.clone(), &w * &z2];
    let fermat = MultiPoly::from_terms(4, (0..4).map(|k| {
        let mut e = vec![0; 4];
        e[k] = 4;
        (e, GaussRat::one())
    }));
    let composed = fermat.compose(&comps).expect("four images");
    let symbolic_identity = reduce_omega(&composed, 2).is_zero();

    // Each component is a polynomial in z1, z2 and the constant ω only, with
    // no conjugate variables in the representation.
    let holomorphic = comps.iter().all(|p| p.total_degree().unwrap_or(0) <= 2 && p.nvars() == 3);

    // h is linear; a unit 2x2 minor of its coefficient matrix means the four
    // components vanish together only at the origin, where all do vanish.
    let coeff = |p: &MultiPoly, var: usize| reduce_omega(&p.partial_derivative(var), 2);
    let mut unit_minor = false;
    for i in 0..4 {
        for j in i + 1..4 {
            let m = &(&coeff(&comps[i], 0) * &coeff(&comps[j], 1)) - &(&coeff(&comps[i], 1) * &coeff(&comps[j], 0));
            let m = reduce_omega(&m, 2);
            unit_minor |= m.is_constant() && !m.is_zero();
        }
    }
    let zero = [GaussRat::zero(), GaussRat::zero(), GaussRat::one()];
    let vanish_at_origin = comps.iter().all(|p| p.evaluate_exact(&zero).map(|v| v.is_zero()).unwrap_or(false));
    let origin_singular = unit_minor && vanish_at_origin;

    let ratio = exact_div(&comps[1], &comps[0]).map(|q| render_poly(&q, &["z1", "z2", "omega"]));
    let z1_constant = ratio.unwrap_or_else(|| "not constant".into());

    let om = ComplexF::from_polar(1.0, std::f64::consts::FRAC_PI_4);
    let img = [c(1.0, 0.0), om, c(1.0, 0.0), om];
    let numeric_residual = fermat.to_numeric().eval(&img).norm();
    MapHReport { symbolic_identity, holomorphic, origin_singular, z1_constant, numeric_residual }
}

/// Aggregate of the randomized structure checks.
#[derive(Clone, Debug, Serialize)]
pub struct HkSweep {
    pub trials: usize,
    pub quaternion_max_dev: f64,
    pub angle_frame_max_dev: f64,
    pub angle_frame_perturbed_min_ratio: f64,
    pub angle_identity_max_dev: f64,
    pub triholo_residual_max: f64,
    pub s_constancy_iff_dev: f64,
    pub s_perturbed_min_violation: f64,
    pub rotation_max_defect: f64,
}

struct Trial {
    quaternion: f64,
    frame_valid: f64,
    frame_ratio: f64,
    angle_identity: f64,
    triholo: f64,
    s_exact: f64,
    s_perturbed: f64,
    rotation: f64,
}

fn one_trial(seed: u64, k: usize) -> Result<Trial> {
    let mut rng = item_rng(seed, k as u64);
    let params = HKParams::random(&mut rng);
    let gauss = |rng: &mut rand_chacha::ChaCha8Rng| -> f64 { StandardNormal.sample(rng) };
    let s = 1.0 + gauss(&mut rng).abs();
    let f1abs = gauss(&mut rng).exp();
    let metric = build_metric_raw(&params, s, f1abs)?;
    let quaternion = check_quaternion(&build_jtriple(&params)?, &metric);

    let angles = KahlerAngles::random_valid(&mut rng);
    let angle_identity = angle_identity_residual(&angles);
    let frame_valid = check_quaternion_detail(&angle_matrices(&angles)?, &identity()).max();
    let delta: f64 = 10f64.powf(rng.gen_range(-3.0..-1.0));
    let [c1, c2, c3] = angles.cosines();
    let c2p = if c2 * c2 + delta <= 1.0 { (c2 * c2 + delta).sqrt() * c2.signum() } else { (c2 * c2 - delta).sqrt() };
    let bad = KahlerAngles { a1: c1.acos(), a2: c2p.acos(), a3: c3.acos() };
    let bad_dev = check_quaternion_detail(&angle_matrices(&bad)?, &identity()).max();
    let frame_ratio = bad_dev / angle_identity_residual(&bad);

    let a = RotationMatrix::random(&mut rng);
    let (orth, det) = a.defects();
    let mut x = S2Point::random(&mut rng);
    while 1.0 - a.apply(&x)[0].powi(2) < 0.1 {
        x = S2Point::random(&mut rng);
    }
    let slots = (c(gauss(&mut rng), gauss(&mut rng)), c(gauss(&mut rng), gauss(&mut rng)));
    let data = solve_triholo(&a, &x, &params, slots.0, slots.1)?;
    let triholo = triholo_residual(&a, &x, &params, &data)?;

    let tuned = HKParams { rho: 2.0 / s, ..params };
    let (cos_exact, _) = angles_from_pullback(&a, &x, &tuned, s, f1abs, &solve_triholo(&a, &x, &tuned, slots.0, slots.1)?)?;
    let eps: f64 = rng.gen_range(0.01..0.2) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let off = HKParams { rho: 2.0 * (1.0 + eps) / s, ..params };
    let (cos_off, _) = angles_from_pullback(&a, &x, &off, s, f1abs, &solve_triholo(&a, &x, &off, slots.0, slots.1)?)?;
    Ok(Trial {
        quaternion,
        frame_valid,
        frame_ratio,
        angle_identity,
        triholo,
        s_exact: cos_exact.identity_residual(),
        s_perturbed: cos_off.identity_residual(),
        rotation: orth.max(det),
    })
}

/// Randomized checks of the J-triple, the adapted angle frames and S-constancy.
pub fn hk_sweep(trials: usize, seed: u64, exec: Exec) -> Result<HkSweep> {
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let rs = map_indexed(trials, exec, |k| one_trial(seed, k)).into_iter().collect::<Result<Vec<_>>>()?;
    Ok(HkSweep {
        trials,
        quaternion_max_dev: max_f64(rs.iter().map(|t| t.quaternion)),
        angle_frame_max_dev: max_f64(rs.iter().map(|t| t.frame_valid)),
        angle_frame_perturbed_min_ratio: rs.iter().map(|t| t.frame_ratio).fold(f64::INFINITY, f64::min),
        angle_identity_max_dev: max_f64(rs.iter().map(|t| t.angle_identity)),
        triholo_residual_max: max_f64(rs.iter().map(|t| t.triholo)),
        s_constancy_iff_dev: max_f64(rs.iter().map(|t| t.s_exact)),
        s_perturbed_min_violation: rs.iter().map(|t| t.s_perturbed).fold(f64::INFINITY, f64::min),
        rotation_max_defect: max_f64(rs.iter().map(|t| t.rotation)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_poly;
    use crate::projective::{ChartId, ProjPoint};
    use crate::surface::{sample_points, tangent_frame};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

    fn flat() -> HKParams {
        HKParams::new(2.0, 1.0, 1.0, c(0.0, 0.0), 0.0).unwrap()
    }

    #[test]
    fn constraint_is_enforced() {
        assert!(matches!(HKParams::new(1.0, 1.0, 1.0, c(0.5, 0.0), 0.0), Err(Error::ConstraintViolated { .. })));
        assert!(HKParams::new(-1.0, 1.0, 1.0, c(0.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn flat_metric_is_identity() {
        let m = build_metric_raw(&flat(), 1.0, 1.0).unwrap();
        assert_eq!(m.h, [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]);
    }

    #[test]
    fn metric_determinant_and_positivity() {
        let mut rng = item_rng(1, 0);
        for _ in 0..1000 {
            let p = HKParams::random(&mut rng);
            let (s, f) = (1.0 + rng.gen_range(0.0..3.0), rng.gen_range(0.1..5.0));
            let m = build_metric_raw(&p, s, f).unwrap();
            let k = p.rho * s / (2.0 * f);
            assert!((m.det() - k * k).abs() <= 1e-9 * k * k * p.lambda * p.mu);
            assert!(m.is_positive_definite());
            assert_eq!(m.h[1][0], m.h[0][1].conj());
        }
    }

    #[test]
    fn flat_j2_realification() {
        let t = build_jtriple(&flat()).unwrap();
        // a' = -conj(b), b' = conj(a)
        let expect = [[0.0, 0.0, -1.0, 0.0], [0.0, 0.0, 0.0, 1.0], [1.0, 0.0, 0.0, 0.0], [0.0, -1.0, 0.0, 0.0]];
        assert_eq!(t.j2, expect);
        assert_eq!(mat_mul(&t.j1, &t.j1), neg(&identity()));
    }

    #[test]
    fn quaternion_relations_for_random_params() {
        let mut rng = item_rng(2, 0);
        for _ in 0..1000 {
            let p = HKParams::random(&mut rng);
            let m = build_metric_raw(&p, 1.7, 0.8).unwrap();
            let t = build_jtriple(&p).unwrap();
            assert!(check_quaternion(&t, &m) <= 1e-12, "{p:?}");
        }
    }

    #[test]
    fn broken_triples_are_detected() {
        let p = flat();
        let m = build_metric_raw(&p, 1.0, 1.0).unwrap();
        let mut t = build_jtriple(&p).unwrap();
        t.j1 = neg(&t.j1);
        assert!((check_quaternion_detail(&t, &m.gram()).triple_product - 2.0).abs() < 1e-15);
        let id = JTriple { j1: identity(), j2: identity(), j3: identity() };
        assert!((check_quaternion_detail(&id, &m.gram()).squares - 2.0).abs() < 1e-15);
    }

    #[test]
    fn metric_from_surface_frame() {
        let x = QuarticSurface::new(parse_poly("x0^4+x1^4+x2^4+x3^4", &["x0", "x1", "x2", "x3"]).unwrap()).unwrap();
        for pt in sample_points(&x, 20, 1, Exec::Sequential).unwrap() {
            let fr = tangent_frame(&x, &pt).unwrap();
            let p = HKParams::random(&mut item_rng(3, 0)).with_theta(fr.theta1);
            let m = build_metric(&p, &fr).unwrap();
            assert!(m.s >= 1.0);
            assert!(check_quaternion(&build_jtriple(&p).unwrap(), &m) <= 1e-12);
        }
    }

    #[test]
    fn angle_residual_examples() {
        let r = |a1, a2, a3| angle_identity_residual(&KahlerAngles { a1, a2, a3 });
        assert!(r(0.0, FRAC_PI_2, FRAC_PI_2) < 1e-15);
        assert!(r(FRAC_PI_3, FRAC_PI_3, FRAC_PI_4) < 1e-15);
        assert!((r(0.0, 0.0, FRAC_PI_2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn block_diagonal_j2() {
        let t = angle_matrices(&KahlerAngles { a1: FRAC_PI_2, a2: 0.0, a3: FRAC_PI_2 }).unwrap();
        // Row form [[0,1],[-1,0]] ⊕ [[0,1],[-1,0]]; J e_1 = e_2.
        let rows = [[0.0, 1.0, 0.0, 0.0], [-1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0], [0.0, 0.0, -1.0, 0.0]];
        assert!(max_diff(&transpose(&t.j2), &rows) < 1e-15);
        assert_eq!(t.j2[1][0], 1.0);
        assert!(angle_matrices(&KahlerAngles { a1: 0.0, a2: 0.0, a3: FRAC_PI_2 }).is_err());
    }

    #[test]
    fn angle_frames_valid_and_perturbed() {
        let mut rng = item_rng(4, 0);
        for _ in 0..1000 {
            let a = KahlerAngles::random_valid(&mut rng);
            assert!(angle_identity_residual(&a) <= 1e-12);
            assert!(check_quaternion_detail(&angle_matrices(&a).unwrap(), &identity()).max() <= 1e-12);
        }
        let bad = KahlerAngles { a1: 1.0, a2: 1.2, a3: 0.9 };
        let delta = angle_identity_residual(&bad);
        let dev = check_quaternion_detail(&angle_matrices(&bad).unwrap(), &identity()).squares;
        assert!(dev >= delta / 10.0);
    }

    #[test]
    fn rotations_are_special_orthogonal() {
        let mut rng = item_rng(5, 0);
        for _ in 0..200 {
            let (o, d) = RotationMatrix::random(&mut rng).defects();
            assert!(o <= 1e-12 && d <= 1e-12);
        }
    }

    #[test]
    fn triholo_examples() {
        let p = flat();
        let id = RotationMatrix::identity();
        let x = S2Point::new([1.0, 0.0, 0.0]).unwrap();
        let z = c(0.0, 0.0);
        let zero = PullbackData { dphi2: z, dphi3: z, dphi2bar: z, dphi3bar: z };
        assert_eq!(triholo_residual(&id, &x, &p, &zero).unwrap(), 0.0);
        let d = PullbackData { dphi2: c(0.5, 0.0), dphi3: c(0.0, -0.75), dphi2bar: c(3.0, 1.0), dphi3bar: z };
        assert!((triholo_residual(&id, &x, &p, &d).unwrap() - 1.5).abs() < 1e-15);
        let south = S2Point::new([-1.0, 0.0, 0.0]).unwrap();
        assert!(triholo_residual(&id, &south, &p, &d).is_err());
    }

    #[test]
    fn solved_data_has_small_residual() {
        let mut rng = item_rng(6, 0);
        for _ in 0..200 {
            let p = HKParams::random(&mut rng);
            let a = RotationMatrix::random(&mut rng);
            let x = S2Point::random(&mut rng);
            let d = solve_triholo(&a, &x, &p, c(0.3, -0.2), c(-1.1, 0.4)).unwrap();
            let scale = 1.0 + d.dphi2.norm().max(d.dphi3.norm());
            assert!(triholo_residual(&a, &x, &p, &d).unwrap() <= 1e-12 * scale);
        }
    }

    #[test]
    fn cosines_at_north_pole() {
        let x = S2Point::new([0.0, 0.0, 1.0]).unwrap();
        let cs = AngleCosines::from_rotation(&RotationMatrix::identity(), &x, 4.0);
        assert_eq!((cs.c1, cs.c2, cs.c3), (0.0, 0.0, -0.5));
        let exact = AngleCosines::from_rotation(&RotationMatrix::identity(), &x, 2.0);
        assert!(exact.identity_residual() < 1e-15);
    }

    #[test]
    fn s_constancy_iff() {
        let mut rng = item_rng(7, 0);
        for _ in 0..200 {
            let a = RotationMatrix::random(&mut rng);
            let x = S2Point::random(&mut rng);
            assert!(AngleCosines::from_rotation(&a, &x, 2.0).identity_residual() <= 1e-12);
            let c1 = a.apply(&x)[0];
            let off = AngleCosines::from_rotation(&a, &x, 2.02).identity_residual();
            let predicted = (1.0 - c1 * c1) * (1.0 - 4.0 / (2.02f64 * 2.02));
            assert!((off - predicted).abs() < 1e-12);
        }
    }

    #[test]
    fn s_witness_on_fermat() {
        let x = QuarticSurface::new(parse_poly("x0^4+x1^4+x2^4+x3^4", &["x0", "x1", "x2", "x3"]).unwrap()).unwrap();
        let mut pts = sample_points(&x, 30, 2, Exec::Sequential).unwrap();
        // [1 : ω : 0 : 0] lies on the S = 1 locus.
        let om = ComplexF::from_polar(1.0, PI / 4.0);
        let special = SurfacePointNum::from_point(&x, &ProjPoint::new(vec![c(1.0, 0.0), om, c(0.0, 0.0), c(0.0, 0.0)]).unwrap());
        assert_eq!(special.chart, ChartId(0));
        pts.push(special);
        let p = flat();
        let rep = s_constancy_witness(&x, &p, &RotationMatrix::identity(), &S2Point::new([0.0, 1.0, 0.0]).unwrap(), &pts);
        assert_eq!(rep.holds_at, vec![30]);
        assert!(rep.consistent());
        assert!(rep.s_min >= 1.0);
        assert!(rep.identity_residuals[30] < 1e-12);
    }

    #[test]
    fn map_h_is_certified() {
        let r = verify_map_h();
        assert!(r.symbolic_identity);
        assert!(r.origin_singular);
        assert_eq!(r.z1_constant, "omega");
        assert!(r.numeric_residual <= 1e-14);
        assert!(r.passed());
    }

    #[test]
    fn omega_reduction() {
        let w = MultiPoly::var(3, 2);
        assert_eq!(reduce_omega(&w.pow(4), 2), -&MultiPoly::one(3));
        assert_eq!(reduce_omega(&w.pow(9), 2), w);
    }

    #[test]
    fn sweep_is_deterministic() {
        let a = hk_sweep(100, 9, Exec::Parallel).unwrap();
        let b = hk_sweep(100, 9, Exec::Sequential).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert!(a.quaternion_max_dev <= 1e-12);
        assert!(a.angle_frame_max_dev <= 1e-12);
        assert!(a.angle_frame_perturbed_min_ratio >= 0.1);
        assert!(a.triholo_residual_max <= 1e-10);
        assert!(a.s_constancy_iff_dev <= 1e-10);
        assert!(a.s_perturbed_min_violation >= 1e-3);
    }
}
