//! The holomorphic symplectic form Ω on a quartic surface.
//!
//! On chart `i` with local coordinates `(l0, l1, l2)` and pivot `p` (a local
//! index with `∂f̂/∂l_p ≠ 0`), Ω is `± dl_q ∧ dl_r / f̂_p` with `q = p+1`,
//! `r = p+2` mod 3. The sign depends only on the chart: charts 0 and 2 use
//! the cyclic order, charts 1 and 3 the reversed one. These are exactly the
//! patches that glue to a single global form.
//!
//! Closedness is automatic: every holomorphic 3-form on a complex surface
//! vanishes, so only the gluing identities are checked numerically.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::par::{map_slice, max_f64, Exec};
use crate::projective::{AffineCoords, ChartId};
use crate::scalar::ComplexF;
use crate::surface::{tangent_frame_in, QuarticSurface, SurfacePointNum, NEAR_SINGULAR_TOL};

/// A partial at least this large may serve as pivot.
pub const PIVOT_TOL: f64 = 1e-8;
/// Relative size of the chart coordinate required to use a chart.
pub const OVERLAP_TOL: f64 = 1e-6;
/// Relative tangency residual accepted by [`omega_eval`].
pub const TANGENCY_TOL: f64 = 1e-8;
/// Finite-difference step for pullbacks.
pub const FD_STEP: f64 = 1e-5;

/// One of the twelve local expressions of Ω.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct OmegaPatch {
    pub chart: ChartId,
    pub pivot: usize,
}

impl OmegaPatch {
    pub fn new(chart: ChartId, pivot: usize) -> Result<Self> {
        if chart.0 > 3 {
            return Err(Error::BadChart(chart.0));
        }
        if pivot > 2 {
            return Err(Error::VariableOutOfRange { index: pivot, nvars: 3 });
        }
        Ok(OmegaPatch { chart, pivot })
    }

    pub fn all() -> Vec<OmegaPatch> {
        (0..4).flat_map(|c| (0..3).map(move |p| OmegaPatch { chart: ChartId(c), pivot: p })).collect()
    }

    /// `+1` for the cyclic numerator `dl_q ∧ dl_r`, `-1` for the reversed one.
    pub fn sign(&self) -> f64 {
        if self.chart.0 % 2 == 0 { 1.0 } else { -1.0 }
    }

    /// Local indices `(q, r)` of the numerator wedge in cyclic order.
    pub fn wedge(&self) -> (usize, usize) {
        ((self.pivot + 1) % 3, (self.pivot + 2) % 3)
    }

    /// Evaluate on chart-local vectors given the pivot partial `fp`.
    pub fn eval(&self, fp: ComplexF, v: &[ComplexF; 3], w: &[ComplexF; 3]) -> ComplexF {
        let (q, r) = self.wedge();
        (v[q] * w[r] - v[r] * w[q]) * self.sign() / fp
    }
}

/// Ω evaluated on a tangent pair.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoFormSample {
    pub point: SurfacePointNum,
    pub v: [ComplexF; 3],
    pub w: [ComplexF; 3],
    pub value: ComplexF,
}

fn max_pivot(g: &[ComplexF; 3]) -> usize {
    (0..3).max_by(|&a, &b| g[a].norm().total_cmp(&g[b].norm())).expect("three entries")
}

fn tangency_residual(g: &[ComplexF; 3], v: &[ComplexF; 3]) -> f64 {
    let gn = g.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let vn = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if vn == 0.0 {
        return 0.0;
    }
    (0..3).map(|k| g[k] * v[k]).sum::<ComplexF>().norm() / (gn * vn)
}

/// Ω at `local` in `chart`, with the max-modulus pivot.
pub fn omega_in_chart(
    x: &QuarticSurface,
    chart: ChartId,
    local: &[ComplexF; 3],
    v: &[ComplexF; 3],
    w: &[ComplexF; 3],
) -> Result<ComplexF> {
    let g = x.chart_gradient(chart, local);
    let p = max_pivot(&g);
    if g[p].norm() < NEAR_SINGULAR_TOL {
        return Err(Error::NearSingular { threshold: NEAR_SINGULAR_TOL });
    }
    let residual = tangency_residual(&g, v).max(tangency_residual(&g, w));
    if residual > TANGENCY_TOL {
        return Err(Error::NotTangent { residual });
    }
    Ok(OmegaPatch { chart, pivot: p }.eval(g[p], v, w))
}

/// Ω at a sampled point, in the point's own chart.
pub fn omega_eval(x: &QuarticSurface, point: &SurfacePointNum, v: &[ComplexF; 3], w: &[ComplexF; 3]) -> Result<TwoFormSample> {
    let local = point.local(point.chart)?;
    let value = omega_in_chart(x, point.chart, &local, v, w)?;
    Ok(TwoFormSample { point: point.clone(), v: *v, w: *w, value })
}

fn rel_dev(a: ComplexF, b: ComplexF) -> f64 {
    let s = a.norm().max(b.norm());
    if s == 0.0 { 0.0 } else { (a - b).norm() / s }
}

/// Evaluate Ω(V1, V2) with every admissible pivot and return the largest
/// pairwise relative deviation.
pub fn pivot_consistency(x: &QuarticSurface, point: &SurfacePointNum) -> Result<f64> {
    let fr = tangent_frame_in(x, point, point.chart)?;
    let values: Vec<ComplexF> = (0..3)
        .filter(|&p| fr.partials[p].norm() > PIVOT_TOL)
        .map(|p| OmegaPatch { chart: fr.chart, pivot: p }.eval(fr.partials[p], &fr.v1, &fr.v2))
        .collect();
    if values.len() < 2 {
        return Err(Error::TooFewPivots);
    }
    let mut dev: f64 = 0.0;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            dev = dev.max(rel_dev(values[i], values[j]));
        }
    }
    Ok(dev)
}

fn in_chart(point: &SurfacePointNum, c: ChartId) -> bool {
    point.coords[c.0].norm() >= OVERLAP_TOL
}

/// Push the frame of chart `a` into chart `b` through the transition
/// differential and compare Ω computed in each chart.
pub fn overlap_consistency(x: &QuarticSurface, point: &SurfacePointNum, a: ChartId, b: ChartId) -> Result<f64> {
    for c in [a, b] {
        if c.0 > 3 {
            return Err(Error::BadChart(c.0));
        }
        if !in_chart(point, c) {
            return Err(Error::NotInChart { chart: c.0 });
        }
    }
    if a == b {
        return Ok(0.0);
    }
    let fr = tangent_frame_in(x, point, a)?;
    let src = AffineCoords { chart: a, values: fr.local.to_vec() };
    let jac = src.transition_jacobian(b)?;
    let push = |v: &[ComplexF; 3]| -> [ComplexF; 3] { [0, 1, 2].map(|r| (0..3).map(|c| jac[r][c] * v[c]).sum()) };
    let (v1, v2) = (push(&fr.v1), push(&fr.v2));
    let tgt = src.transition(b)?;
    let local_b = [tgt.values[0], tgt.values[1], tgt.values[2]];
    let omega_a = omega_in_chart(x, a, &fr.local, &fr.v1, &fr.v2)?;
    let omega_b = omega_in_chart(x, b, &local_b, &v1, &v2)?;
    Ok(rel_dev(omega_a, omega_b))
}

/// `|Ω(V1, V2)|` in the point's chart; equals `1/|f̂_pivot|`.
pub fn nondegeneracy(x: &QuarticSurface, point: &SurfacePointNum) -> Result<f64> {
    let fr = tangent_frame_in(x, point, point.chart)?;
    Ok(omega_in_chart(x, fr.chart, &fr.local, &fr.v1, &fr.v2)?.norm())
}

/// Coefficient of `dz ∧ dz̄` in `ψ*Ω` for a map `ψ` from a disk into `chart`,
/// using the given pivot. Derivatives by central differences.
pub fn pullback_on_disk<F>(
    x: &QuarticSurface,
    patch: OmegaPatch,
    psi: F,
    grid: &[ComplexF],
) -> Result<Vec<ComplexF>>
where
    F: Fn(ComplexF) -> [ComplexF; 3],
{
    let h = FD_STEP;
    let (q, r) = patch.wedge();
    let mut out = Vec::with_capacity(grid.len());
    for &t in grid {
        let u = psi(t);
        if u.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NotInChart { chart: patch.chart.0 });
        }
        let scale = 1.0 + u.iter().map(|c| c.norm()).fold(0.0, f64::max).powi(4);
        let residual = x.chart_value(patch.chart, &u).norm() / scale;
        if residual > 1e-6 {
            return Err(Error::OffSurface { residual });
        }
        let fp = x.chart_gradient(patch.chart, &u)[patch.pivot];
        if fp.norm() < PIVOT_TOL {
            return Err(Error::NearSingular { threshold: PIVOT_TOL });
        }
        let dx = {
            let (a, b) = (psi(t + h), psi(t - h));
            [0, 1, 2].map(|k| (a[k] - b[k]) / (2.0 * h))
        };
        let dy = {
            let i = ComplexF::new(0.0, h);
            let (a, b) = (psi(t + i), psi(t - i));
            [0, 1, 2].map(|k| (a[k] - b[k]) / (2.0 * h))
        };
        let i = ComplexF::new(0.0, 1.0);
        let d = |k: usize| (dx[k] - i * dy[k]) * 0.5;
        let dbar = |k: usize| (dx[k] + i * dy[k]) * 0.5;
        out.push((d(q) * dbar(r) - d(r) * dbar(q)) * patch.sign() / fp);
    }
    Ok(out)
}

/// Aggregate of a consistency sweep.
#[derive(Clone, Debug, Serialize)]
pub struct OmegaSweep {
    pub samples: usize,
    pub pivot_max_dev: f64,
    pub pivot_points: usize,
    /// Keyed by `"a-b"`.
    pub overlap_max_dev: BTreeMap<String, f64>,
    pub overlap_points: BTreeMap<String, usize>,
    pub nondegeneracy_min: f64,
}

impl OmegaSweep {
    pub fn overlap_worst(&self) -> f64 {
        max_f64(self.overlap_max_dev.values().copied())
    }
}

pub fn chart_pairs() -> Vec<(ChartId, ChartId)> {
    (0..4).flat_map(|a| (a + 1..4).map(move |b| (ChartId(a), ChartId(b)))).collect()
}

/// Run every consistency check over `points`; results are merged by max/min
/// so the outcome does not depend on the execution order.
pub fn omega_sweep(x: &QuarticSurface, points: &[SurfacePointNum], exec: Exec) -> Result<OmegaSweep> {
    struct PerPoint {
        pivot: Option<f64>,
        overlaps: Vec<Option<f64>>,
        nondeg: f64,
    }
    let pairs = chart_pairs();
    let per: Vec<Result<PerPoint>> = map_slice(points, exec, |p| {
        let pivot = match pivot_consistency(x, p) {
            Ok(d) => Some(d),
            Err(Error::TooFewPivots) => None,
            Err(e) => return Err(e),
        };
        let overlaps = pairs
            .iter()
            .map(|&(a, b)| {
                if in_chart(p, a) && in_chart(p, b) {
                    overlap_consistency(x, p, a, b).map(Some)
                } else {
                    Ok(None)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PerPoint { pivot, overlaps, nondeg: nondegeneracy(x, p)? })
    });
    let per = per.into_iter().collect::<Result<Vec<_>>>()?;
    let mut overlap_max_dev = BTreeMap::new();
    let mut overlap_points = BTreeMap::new();
    for (k, (a, b)) in pairs.iter().enumerate() {
        let vals: Vec<f64> = per.iter().filter_map(|r| r.overlaps[k]).collect();
        let key = format!("{}-{}", a.0, b.0);
        overlap_points.insert(key.clone(), vals.len());
        overlap_max_dev.insert(key, max_f64(vals).max(0.0));
    }
    let pivots: Vec<f64> = per.iter().filter_map(|r| r.pivot).collect();
    Ok(OmegaSweep {
        samples: points.len(),
        pivot_points: pivots.len(),
        pivot_max_dev: max_f64(pivots).max(0.0),
        overlap_max_dev,
        overlap_points,
        nondegeneracy_min: per.iter().map(|r| r.nondeg).fold(f64::INFINITY, f64::min),
    })
}
