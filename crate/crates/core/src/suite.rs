//! Certification suites and machine-readable reports.
//!
//! A [`RunConfig`] names a suite; [`run`] executes it and returns a
//! [`Report`] whose checks each carry a status, the measured deviation, the
//! threshold it was held to and an [`Anchor`] naming the step it certifies.
//! With `omit_timing` set the serialized report is a pure function of the
//! configuration.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::atlas::{chart_pairs, omega_sweep};
use crate::bezout::{
    build_cde, cde_finiteness, curve_residual, intersect, random_coprime_pair, CdeVerdict, IntersectionPointJson,
    IntersectionReportJson, PlaneCurve, Sigma, CDE_VARS, PLANE_VARS,
};
use crate::error::{Error, Result};
use crate::hyperkahler::{hk_sweep, verify_map_h};
use crate::par::{item_rng, Exec};
use crate::parse::{default_vars, parse_coeff, parse_poly, render_poly_default};
use crate::poly::MultiPoly;
use crate::projective::{verify_transition_identity, ProjPointNum};
use crate::scalar::{ComplexF, GaussRat};
use crate::surface::{certify_nonsingular, sample_points, QuarticSurface, SingularityStatus, SurfaceStatusJson, Witness};

/// Default seed when none is given.
pub const DEFAULT_SEED: u64 = 20_240_917;
pub const DEFAULT_SAMPLES: usize = 100;
pub const DEFAULT_TRIALS: usize = 1000;
pub const DEFAULT_BEZOUT_PAIRS: usize = 20;
pub const DEFAULT_SIGMAS: usize = 10;

/// Named surfaces accepted in place of a polynomial.
pub const REGISTRY: [(&str, &str); 1] = [("fermat", "x0^4 + x1^4 + x2^4 + x3^4")];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    CheckSurface,
    CheckOmega,
    CheckHk,
    VerifyH,
    Bezout,
    Cde,
    All,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::CheckSurface => "check-surface",
            Command::CheckOmega => "check-omega",
            Command::CheckHk => "check-hk",
            Command::VerifyH => "verify-h",
            Command::Bezout => "bezout",
            Command::Cde => "cde",
            Command::All => "all",
        }
    }
}

/// Where a polynomial comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum PolySource {
    /// Polynomial text or a registry name.
    Inline(String),
    File(PathBuf),
}

impl PolySource {
    fn text(&self) -> Result<String> {
        match self {
            PolySource::Inline(s) => Ok(s.clone()),
            PolySource::File(p) => {
                std::fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))
            }
        }
    }
}

/// Expand a registry name, otherwise parse as a quartic in `x0..x3`.
pub fn resolve_quartic(text: &str) -> Result<MultiPoly> {
    let key = text.trim();
    let body = REGISTRY.iter().find(|(name, _)| name.eq_ignore_ascii_case(key)).map(|(_, p)| *p).unwrap_or(key);
    let f = parse_poly(body, &default_vars(4))?;
    if f.is_zero() || !f.is_homogeneous(4) {
        return Err(Error::NotQuartic);
    }
    Ok(f)
}

/// Tolerances; every field defaults to the value used by the acceptance suite.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    pub omega: f64,
    pub quaternion: f64,
    pub angle_frame_ratio: f64,
    pub triholomorphic: f64,
    pub s_constancy: f64,
    pub s_violation: f64,
    pub point_residual: f64,
    pub map_h: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            omega: 1e-9,
            quaternion: 1e-12,
            angle_frame_ratio: 0.1,
            triholomorphic: 1e-10,
            s_constancy: 1e-10,
            s_violation: 1e-3,
            point_residual: 1e-8,
            map_h: 1e-14,
        }
    }
}

impl Tolerances {
    fn validate(&self) -> Result<()> {
        let all = [
            self.omega,
            self.quaternion,
            self.angle_frame_ratio,
            self.triholomorphic,
            self.s_constancy,
            self.s_violation,
            self.point_residual,
            self.map_h,
        ];
        if all.iter().all(|t| t.is_finite() && *t > 0.0) {
            Ok(())
        } else {
            Err(Error::Config("tolerances must be positive and finite".into()))
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    /// Quartic for the surface suites; `fermat` when absent.
    pub poly: Option<PolySource>,
    pub curve1: Option<String>,
    pub curve2: Option<String>,
    pub sigma: Option<String>,
    /// Interpret `sigma` as a floating-point complex number.
    pub numeric: bool,
    pub seed: u64,
    pub samples: usize,
    pub trials: usize,
    pub tolerances: Tolerances,
    /// Drop every elapsed-time field so reports are byte-identical.
    pub omit_timing: bool,
    pub exec: Exec,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            poly: None,
            curve1: None,
            curve2: None,
            sigma: None,
            numeric: false,
            seed: DEFAULT_SEED,
            samples: DEFAULT_SAMPLES,
            trials: DEFAULT_TRIALS,
            tolerances: Tolerances::default(),
            omit_timing: false,
            exec: Exec::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.samples == 0 || self.trials == 0 {
            return Err(Error::Config("samples and trials must be at least 1".into()));
        }
        self.tolerances.validate()?;
        if self.command == Command::Bezout && (self.curve1.is_none() || self.curve2.is_none()) {
            return Err(Error::Config("bezout needs two curves".into()));
        }
        if self.command == Command::Cde && self.sigma.is_none() {
            return Err(Error::Config("cde needs a value for sigma".into()));
        }
        Ok(())
    }

    fn quartic(&self) -> Result<MultiPoly> {
        match &self.poly {
            Some(src) => resolve_quartic(&src.text()?),
            None => resolve_quartic("fermat"),
        }
    }
}

/// The construction step a check certifies. Serialized names form a closed
/// vocabulary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Anchor {
    NonsingularQuartic,
    ChartTransitionIdentity,
    OmegaPivotIndependence,
    OmegaChartOverlap,
    OmegaNondegeneracy,
    QuaternionRelations,
    KahlerAngleIdentity,
    AngleFrameQuaternion,
    TriholomorphicSystem,
    SConstancy,
    RotationGroup,
    ExampleMapH,
    BezoutCount,
    CdeFiniteness,
}

impl Anchor {
    pub const ALL: [Anchor; 14] = [
        Anchor::NonsingularQuartic,
        Anchor::ChartTransitionIdentity,
        Anchor::OmegaPivotIndependence,
        Anchor::OmegaChartOverlap,
        Anchor::OmegaNondegeneracy,
        Anchor::QuaternionRelations,
        Anchor::KahlerAngleIdentity,
        Anchor::AngleFrameQuaternion,
        Anchor::TriholomorphicSystem,
        Anchor::SConstancy,
        Anchor::RotationGroup,
        Anchor::ExampleMapH,
        Anchor::BezoutCount,
        Anchor::CdeFiniteness,
    ];

    pub fn name(self) -> String {
        serde_json::to_value(self).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

/// How `measured` is compared against `threshold`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    AtMost,
    AtLeast,
    Above,
    Equal,
}

impl Comparison {
    fn holds(self, measured: f64, threshold: f64) -> bool {
        match self {
            Comparison::AtMost => measured <= threshold,
            Comparison::AtLeast => measured >= threshold,
            Comparison::Above => measured > threshold,
            Comparison::Equal => measured == threshold,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub anchor: Anchor,
    pub status: Status,
    /// `None` for boolean checks and for non-finite measurements.
    pub measured: Option<f64>,
    pub threshold: Option<f64>,
    pub comparison: Option<Comparison>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

impl Check {
    fn measure(name: &str, anchor: Anchor, measured: f64, cmp: Comparison, threshold: f64) -> Self {
        let status = if measured.is_nan() {
            Status::Inconclusive
        } else if cmp.holds(measured, threshold) {
            Status::Pass
        } else {
            Status::Fail
        };
        Check {
            name: name.into(),
            anchor,
            status,
            measured: measured.is_finite().then_some(measured),
            threshold: Some(threshold),
            comparison: Some(cmp),
            detail: None,
            elapsed_ms: None,
        }
    }

    fn boolean(name: &str, anchor: Anchor, ok: bool) -> Self {
        Check {
            name: name.into(),
            anchor,
            status: if ok { Status::Pass } else { Status::Fail },
            measured: None,
            threshold: None,
            comparison: None,
            detail: None,
            elapsed_ms: None,
        }
    }

    fn errored(name: &str, anchor: Anchor, e: &Error) -> Self {
        Check { detail: Some(e.to_string()), status: Status::Inconclusive, ..Check::boolean(name, anchor, false) }
    }

    fn with_detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }
}

/// Echo of the configuration that produced a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub command: Command,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub poly: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curve1: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curve2: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<String>,
    pub numeric: bool,
    pub samples: usize,
    pub trials: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: ConfigEcho,
    pub checks: Vec<Check>,
    /// Structured results per section (witnesses, points, sweep aggregates).
    pub details: BTreeMap<String, Value>,
    pub overall: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.overall == Status::Pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// One line per check, for humans.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let m = c.measured.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "-".into());
            let t = c.threshold.map(|v| format!("{v:.1e}")).unwrap_or_else(|| "-".into());
            s.push_str(&format!("{:<13} {:<40} measured {m:<10} threshold {t}\n", status_word(c.status), c.name));
        }
        s.push_str(&format!("overall: {}\n", status_word(self.overall)));
        s
    }
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::Fail => "FAIL",
        Status::Inconclusive => "inconclusive",
    }
}

/// Structured error object for failed runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub error: ErrorBody,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub kind: String,
    pub message: String,
}

impl From<&Error> for ErrorReport {
    fn from(e: &Error) -> Self {
        let kind = match e {
            Error::Syntax { .. }
            | Error::UnknownVariable { .. }
            | Error::NonConstantDivision { .. }
            | Error::DivisionByZero { .. } => "parse",
            Error::Io(_) => "io",
            Error::Config(_) => "config",
            Error::NotQuartic | Error::NotHomogeneous { .. } | Error::ZeroPolynomial | Error::DimensionMismatch { .. } => {
                "invalid-input"
            }
            _ => "computation",
        };
        ErrorReport { error: ErrorBody { kind: kind.into(), message: e.to_string() } }
    }
}

/// Parse a slice parameter. Exact values use coefficient syntax
/// (`1/2 + 3*i`); numeric values also accept decimals (`0.5-1.25i`) and
/// `exp(c*pi)` with `c` in coefficient syntax (`exp(i*pi/4)`).
pub fn parse_sigma(text: &str, numeric: bool) -> Result<Sigma> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if !numeric {
        return Ok(Sigma::Exact(parse_coeff(&t)?));
    }
    if let Some(inner) = t.strip_prefix("exp(").and_then(|r| r.strip_suffix(')')) {
        let p = parse_poly(inner, &["pi"])?;
        let c = p.coeff(&[1]);
        if p.num_terms() != 1 || c.is_zero() {
            return Err(Error::Config(format!("expected exp(c*pi), got `{text}`")));
        }
        return Ok(Sigma::Numeric((c.to_complex() * PI).exp()));
    }
    if let Ok(g) = parse_coeff(&t) {
        return Ok(Sigma::Numeric(g.to_complex()));
    }
    parse_decimal_complex(&t).map(Sigma::Numeric).ok_or_else(|| Error::Config(format!("cannot read `{text}` as a complex number")))
}

fn parse_decimal_complex(t: &str) -> Option<ComplexF> {
    if let Some(im) = t.strip_suffix('i') {
        // Split at the last sign that is not an exponent sign.
        let b = im.as_bytes();
        let split = (1..b.len()).rev().find(|&k| (b[k] == b'+' || b[k] == b'-') && !matches!(b[k - 1], b'e' | b'E'));
        return match split {
            Some(k) => {
                let re: f64 = im[..k].parse().ok()?;
                let imv = match &im[k..] {
                    "+" => 1.0,
                    "-" => -1.0,
                    s => s.parse().ok()?,
                };
                Some(ComplexF::new(re, imv))
            }
            None => {
                let imv = match im {
                    "" | "+" => 1.0,
                    "-" => -1.0,
                    s => s.parse().ok()?,
                };
                Some(ComplexF::new(0.0, imv))
            }
        };
    }
    t.parse().ok().map(|re| ComplexF::new(re, 0.0))
}

/// A random Gaussian rational with small numerators and denominators.
pub fn random_sigma(seed: u64, k: usize) -> GaussRat {
    use rand::Rng;
    let mut rng = item_rng(seed, k as u64);
    GaussRat::from_fracs(rng.gen_range(-9..=9), rng.gen_range(1..=9), rng.gen_range(-9..=9), rng.gen_range(1..=9))
}

struct Builder {
    checks: Vec<Check>,
    details: BTreeMap<String, Value>,
    timing: bool,
}

impl Builder {
    fn timed<T>(&mut self, f: impl FnOnce() -> T) -> (T, Option<u64>) {
        let start = Instant::now();
        let out = f();
        (out, self.timing.then(|| start.elapsed().as_millis() as u64))
    }

    fn push(&mut self, mut c: Check, elapsed: Option<u64>) {
        c.elapsed_ms = elapsed;
        self.checks.push(c);
    }

    fn detail(&mut self, key: &str, v: Value) {
        self.details.insert(key.into(), v);
    }
}

/// Execute the suite named by `config`.
pub fn run(config: &RunConfig) -> Result<Report> {
    config.validate()?;
    let start = Instant::now();
    let mut b = Builder { checks: Vec::new(), details: BTreeMap::new(), timing: !config.omit_timing };
    let mut echo = ConfigEcho {
        command: config.command,
        seed: config.seed,
        poly: None,
        curve1: config.curve1.clone(),
        curve2: config.curve2.clone(),
        sigma: config.sigma.clone(),
        numeric: config.numeric,
        samples: config.samples,
        trials: config.trials,
    };
    let tol = &config.tolerances;
    match config.command {
        Command::CheckSurface => {
            let f = config.quartic()?;
            echo.poly = Some(render_poly_default(&f));
            surface_suite(&mut b, &f, config.seed);
        }
        Command::CheckOmega => {
            let f = config.quartic()?;
            echo.poly = Some(render_poly_default(&f));
            omega_suite(&mut b, &f, config, tol);
        }
        Command::CheckHk => hk_suite(&mut b, config, tol),
        Command::VerifyH => map_h_suite(&mut b, tol),
        Command::Bezout => {
            let c = parse_curve(config.curve1.as_deref().unwrap_or_default())?;
            let d = parse_curve(config.curve2.as_deref().unwrap_or_default())?;
            bezout_single(&mut b, &c, &d, config.seed);
        }
        Command::Cde => {
            let f = config.quartic()?;
            echo.poly = Some(render_poly_default(&f));
            let sigma = parse_sigma(config.sigma.as_deref().unwrap_or_default(), config.numeric)?;
            cde_single(&mut b, "cde", &f, &sigma, config.seed, tol);
        }
        Command::All => {
            let f = config.quartic()?;
            echo.poly = Some(render_poly_default(&f));
            let certified = surface_suite(&mut b, &f, config.seed);
            omega_suite(&mut b, &f, config, tol);
            hk_suite(&mut b, config, tol);
            map_h_suite(&mut b, tol);
            bezout_suite(&mut b, config.seed);
            cde_suite(&mut b, &f, certified, config.seed, tol);
        }
    }
    let overall = if b.checks.iter().all(|c| c.status == Status::Pass) {
        Status::Pass
    } else if b.checks.iter().any(|c| c.status == Status::Fail) {
        Status::Fail
    } else {
        Status::Inconclusive
    };
    Ok(Report {
        config: echo,
        checks: b.checks,
        details: b.details,
        overall,
        elapsed_ms: b.timing.then(|| start.elapsed().as_millis() as u64),
    })
}

pub fn parse_curve(text: &str) -> Result<PlaneCurve> {
    PlaneCurve::new(parse_poly(text, &PLANE_VARS)?)
}

/// Nonsingularity and the chart transition identity. Returns whether the
/// surface was certified nonsingular.
fn surface_suite(b: &mut Builder, f: &MultiPoly, seed: u64) -> bool {
    let (cert, ms) = b.timed(|| certify_nonsingular(f, seed));
    let status = match cert.status {
        SingularityStatus::CertifiedNonsingular => Status::Pass,
        SingularityStatus::Singular(_) => Status::Fail,
        _ => Status::Inconclusive,
    };
    let mut check = Check::boolean("surface-nonsingular", Anchor::NonsingularQuartic, status == Status::Pass);
    check.status = status;
    check.detail = Some(cert.status.label().into());
    b.push(check, ms);
    b.detail("surface", serde_json::to_value(SurfaceStatusJson::from(&cert)).expect("serializable"));

    let (ti, ms) = b.timed(|| verify_transition_identity(f));
    match ti {
        Ok(t) => {
            b.push(Check::boolean("transition-identity", Anchor::ChartTransitionIdentity, t.exact_identity), ms);
            b.detail("transition_identity", serde_json::to_value(t).expect("serializable"));
        }
        Err(e) => b.push(Check::errored("transition-identity", Anchor::ChartTransitionIdentity, &e), ms),
    }
    matches!(cert.status, SingularityStatus::CertifiedNonsingular)
}

fn omega_suite(b: &mut Builder, f: &MultiPoly, config: &RunConfig, tol: &Tolerances) {
    let (res, ms) = b.timed(|| {
        let x = QuarticSurface::new(f.clone())?;
        let pts = sample_points(&x, config.samples, config.seed, config.exec)?;
        omega_sweep(&x, &pts, config.exec)
    });
    let sweep = match res {
        Ok(s) => s,
        Err(e) => {
            b.push(Check::errored("omega-sweep", Anchor::OmegaPivotIndependence, &e), ms);
            return;
        }
    };
    let pivot = if sweep.pivot_points == 0 {
        Check::errored("omega-pivot", Anchor::OmegaPivotIndependence, &Error::TooFewPivots)
    } else {
        Check::measure("omega-pivot", Anchor::OmegaPivotIndependence, sweep.pivot_max_dev, Comparison::AtMost, tol.omega)
    };
    b.push(pivot, ms);
    for (a, c) in chart_pairs() {
        let key = format!("{}-{}", a.0, c.0);
        let name = format!("omega-overlap-{key}");
        let points = sweep.overlap_points.get(&key).copied().unwrap_or(0);
        let check = if points == 0 {
            Check::boolean(&name, Anchor::OmegaChartOverlap, false).with_detail("no sample lies on this overlap")
        } else {
            let dev = sweep.overlap_max_dev.get(&key).copied().unwrap_or(f64::NAN);
            Check::measure(&name, Anchor::OmegaChartOverlap, dev, Comparison::AtMost, tol.omega)
        };
        b.push(check, None);
    }
    b.push(
        Check::measure("omega-nondegenerate", Anchor::OmegaNondegeneracy, sweep.nondegeneracy_min, Comparison::Above, 0.0),
        None,
    );
    b.detail("omega", serde_json::to_value(&sweep).expect("serializable"));
}

fn hk_suite(b: &mut Builder, config: &RunConfig, tol: &Tolerances) {
    let (res, ms) = b.timed(|| hk_sweep(config.trials, config.seed, config.exec));
    let s = match res {
        Ok(s) => s,
        Err(e) => {
            b.push(Check::errored("hk-sweep", Anchor::QuaternionRelations, &e), ms);
            return;
        }
    };
    use Comparison::*;
    let checks = [
        Check::measure("hk-quaternion-relations", Anchor::QuaternionRelations, s.quaternion_max_dev, AtMost, tol.quaternion),
        Check::measure("hk-angle-identity", Anchor::KahlerAngleIdentity, s.angle_identity_max_dev, AtMost, tol.quaternion),
        Check::measure("hk-angle-frame-valid", Anchor::AngleFrameQuaternion, s.angle_frame_max_dev, AtMost, tol.quaternion),
        Check::measure(
            "hk-angle-frame-perturbed",
            Anchor::AngleFrameQuaternion,
            s.angle_frame_perturbed_min_ratio,
            AtLeast,
            tol.angle_frame_ratio,
        ),
        Check::measure("hk-triholomorphic", Anchor::TriholomorphicSystem, s.triholo_residual_max, AtMost, tol.triholomorphic),
        Check::measure("hk-s-constancy-exact", Anchor::SConstancy, s.s_constancy_iff_dev, AtMost, tol.s_constancy),
        Check::measure("hk-s-constancy-perturbed", Anchor::SConstancy, s.s_perturbed_min_violation, AtLeast, tol.s_violation),
        Check::measure("hk-rotation", Anchor::RotationGroup, s.rotation_max_defect, AtMost, tol.quaternion),
    ];
    for (k, c) in checks.into_iter().enumerate() {
        b.push(c, if k == 0 { ms } else { None });
    }
    b.detail("hk", serde_json::to_value(&s).expect("serializable"));
}

fn map_h_suite(b: &mut Builder, tol: &Tolerances) {
    let (r, ms) = b.timed(verify_map_h);
    b.push(Check::boolean("map-h-on-surface", Anchor::ExampleMapH, r.symbolic_identity), ms);
    b.push(Check::boolean("map-h-holomorphic", Anchor::ExampleMapH, r.holomorphic), None);
    b.push(Check::boolean("map-h-origin-singular", Anchor::ExampleMapH, r.origin_singular), None);
    b.push(Check::boolean("map-h-slice-constant", Anchor::ExampleMapH, r.z1_constant == "omega"), None);
    b.push(Check::measure("map-h-numeric", Anchor::ExampleMapH, r.numeric_residual, Comparison::AtMost, tol.map_h), None);
    b.detail("map_h", serde_json::to_value(&r).expect("serializable"));
}

fn bezout_single(b: &mut Builder, c: &PlaneCurve, d: &PlaneCurve, seed: u64) {
    let (res, ms) = b.timed(|| intersect(c, d, seed));
    match res {
        Ok(r) => {
            let expected = (r.degrees.0 * r.degrees.1) as f64;
            let check = if r.common_component.is_some() {
                Check::boolean("bezout-count", Anchor::BezoutCount, false).with_detail("curves share a component")
            } else {
                Check::measure("bezout-count", Anchor::BezoutCount, r.total as f64, Comparison::Equal, expected)
            };
            b.push(check, ms);
            b.detail("intersection", serde_json::to_value(IntersectionReportJson::from(&r)).expect("serializable"));
        }
        Err(e) => b.push(Check::errored("bezout-count", Anchor::BezoutCount, &e), ms),
    }
}

/// Tangency example plus a family of random coprime pairs.
fn bezout_suite(b: &mut Builder, seed: u64) {
    let conic = parse_curve("y*z - x^2").expect("valid");
    let line = parse_curve("y").expect("valid");
    let (res, ms) = b.timed(|| intersect(&conic, &line, seed));
    let tangency = match res {
        Ok(r) => {
            let m = r.points.iter().map(|p| p.multiplicity).max().unwrap_or(0);
            Check::measure("bezout-tangency", Anchor::BezoutCount, m as f64, Comparison::Equal, 2.0)
        }
        Err(e) => Check::errored("bezout-tangency", Anchor::BezoutCount, &e),
    };
    b.push(tangency, ms);

    let (res, ms) = b.timed(|| {
        (0..DEFAULT_BEZOUT_PAIRS)
            .map(|k| {
                let (c, d) = random_coprime_pair(seed, k);
                intersect(&c, &d, seed.wrapping_add(k as u64)).map(|r| (r.total as i64 - (r.degrees.0 * r.degrees.1) as i64).abs())
            })
            .collect::<Result<Vec<_>>>()
    });
    match res {
        Ok(gaps) => {
            let worst = gaps.iter().copied().max().unwrap_or(0) as f64;
            b.push(Check::measure("bezout-random-pairs", Anchor::BezoutCount, worst, Comparison::Equal, 0.0), ms);
            b.detail("bezout", json!({ "pairs": gaps.len(), "max_count_gap": worst }));
        }
        Err(e) => b.push(Check::errored("bezout-random-pairs", Anchor::BezoutCount, &e), ms),
    }
}

#[derive(Serialize)]
struct CdeJson {
    sigma: [f64; 2],
    verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    via: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    points: Vec<IntersectionPointJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    component: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
    max_residual: Option<f64>,
}

fn witness_json(w: &Witness) -> Value {
    match w {
        Witness::Exact(p) => serde_json::to_value(p.to_json()),
        Witness::Numeric(p) => serde_json::to_value(p.to_json()),
    }
    .expect("serializable")
}

/// Largest residual of the verdict's points on the three curves.
fn cde_residual(f: &MultiPoly, sigma: &Sigma, points: &[ProjPointNum]) -> Result<f64> {
    let cur = build_cde(f, sigma)?;
    let mut worst: f64 = 0.0;
    for p in points {
        for k in 0..3 {
            if cur.scales[k] > 0.0 {
                worst = worst.max(curve_residual(&cur.numeric[k], cur.scales[k], p));
            }
        }
    }
    Ok(worst)
}

fn cde_eval(f: &MultiPoly, sigma: &Sigma, seed: u64) -> Result<(CdeVerdict, f64, CdeJson)> {
    let v = cde_finiteness(f, sigma, seed)?;
    let z = sigma.to_complex();
    let mut j = CdeJson {
        sigma: [z.re, z.im],
        verdict: v.label(),
        via: None,
        points: vec![],
        component: None,
        witness: None,
        reason: None,
        max_residual: None,
    };
    let mut residual = 0.0;
    match &v {
        CdeVerdict::Finite { points, via } => {
            let nums: Vec<ProjPointNum> = points.iter().map(|p| p.point.clone()).collect();
            residual = cde_residual(f, sigma, &nums)?;
            j.via = Some(via.clone());
            j.points = points.iter().map(Into::into).collect();
            j.max_residual = Some(residual);
        }
        CdeVerdict::Case1Witness { component, witness } => {
            j.component = Some(crate::parse::render_poly(component, &CDE_VARS));
            j.witness = Some(witness_json(witness));
        }
        CdeVerdict::Inconclusive(r) => j.reason = Some(r.clone()),
    }
    Ok((v, residual, j))
}

fn cde_single(b: &mut Builder, name: &str, f: &MultiPoly, sigma: &Sigma, seed: u64, tol: &Tolerances) {
    let (res, ms) = b.timed(|| cde_eval(f, sigma, seed));
    match res {
        Ok((v, residual, j)) => {
            let check = match v {
                CdeVerdict::Finite { .. } => {
                    Check::measure(name, Anchor::CdeFiniteness, residual, Comparison::AtMost, tol.point_residual)
                }
                CdeVerdict::Case1Witness { .. } => {
                    Check::boolean(name, Anchor::CdeFiniteness, false).with_detail("shared component; singular point found")
                }
                CdeVerdict::Inconclusive(r) => {
                    Check { status: Status::Inconclusive, ..Check::boolean(name, Anchor::CdeFiniteness, false) }.with_detail(r)
                }
            };
            b.push(check, ms);
            b.detail(name, serde_json::to_value(j).expect("serializable"));
        }
        Err(e) => b.push(Check::errored(name, Anchor::CdeFiniteness, &e), ms),
    }
}

/// Random exact slices and the slice through the image of the example map.
fn cde_suite(b: &mut Builder, f: &MultiPoly, certified: bool, seed: u64, tol: &Tolerances) {
    let (res, ms) = b.timed(|| {
        (0..DEFAULT_SIGMAS)
            .map(|k| cde_eval(f, &Sigma::Exact(random_sigma(seed, k)), seed.wrapping_add(k as u64)))
            .collect::<Result<Vec<_>>>()
    });
    match res {
        Ok(rs) => {
            let finite = rs.iter().all(|(v, _, _)| matches!(v, CdeVerdict::Finite { .. }));
            let witness = rs.iter().any(|(v, _, _)| matches!(v, CdeVerdict::Case1Witness { .. }));
            let worst = rs.iter().map(|(_, r, _)| *r).fold(0.0, f64::max);
            let check = if finite {
                Check::measure("cde-random-sigma", Anchor::CdeFiniteness, worst, Comparison::AtMost, tol.point_residual)
            } else if witness && certified {
                Check::boolean("cde-random-sigma", Anchor::CdeFiniteness, false)
                    .with_detail("shared component reported on a certified-nonsingular surface")
            } else {
                Check { status: Status::Inconclusive, ..Check::boolean("cde-random-sigma", Anchor::CdeFiniteness, false) }
            };
            b.push(check, ms);
            let all: Vec<CdeJson> = rs.into_iter().map(|(_, _, j)| j).collect();
            b.detail("cde_random_sigma", serde_json::to_value(all).expect("serializable"));
        }
        Err(e) => b.push(Check::errored("cde-random-sigma", Anchor::CdeFiniteness, &e), ms),
    }
    let omega = Sigma::Numeric(ComplexF::from_polar(1.0, PI / 4.0));
    cde_single(b, "cde-omega-slice", f, &omega, seed, tol);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(command: Command) -> RunConfig {
        RunConfig { samples: 12, trials: 40, omit_timing: true, ..RunConfig::new(command) }
    }

    #[test]
    fn registry_expands_fermat() {
        let f = resolve_quartic("fermat").unwrap();
        assert_eq!(f, resolve_quartic("x0^4+x1^4+x2^4+x3^4").unwrap());
        assert!(resolve_quartic("x0^3").is_err());
    }

    #[test]
    fn singular_surface_fails_with_witness() {
        let cfg = RunConfig { poly: Some(PolySource::Inline("x0^4+x1^4+x2^4".into())), ..quick(Command::CheckSurface) };
        let r = run(&cfg).unwrap();
        assert_eq!(r.overall, Status::Fail);
        assert_eq!(r.details["surface"]["witness"]["coords"], json!(["0", "0", "0", "1"]));
    }

    #[test]
    fn anchors_are_closed_vocabulary() {
        let names: Vec<String> = Anchor::ALL.iter().map(|a| a.name()).collect();
        assert!(names.iter().all(|n| !n.is_empty()));
        let r = run(&quick(Command::All)).unwrap();
        for c in &r.checks {
            assert!(names.contains(&c.anchor.name()), "{}", c.name);
        }
    }

    #[test]
    fn overall_is_pass_iff_every_check_passes() {
        for cmd in [Command::CheckSurface, Command::VerifyH, Command::CheckHk] {
            let r = run(&quick(cmd)).unwrap();
            assert_eq!(r.passed(), r.checks.iter().all(|c| c.status == Status::Pass));
        }
    }

    #[test]
    fn identical_config_identical_report() {
        let cfg = quick(Command::CheckOmega);
        assert_eq!(run(&cfg).unwrap().to_json(), run(&cfg).unwrap().to_json());
    }

    #[test]
    fn sigma_parsing() {
        assert_eq!(parse_sigma("1/2 + 3*i", false).unwrap(), Sigma::Exact(GaussRat::from_fracs(1, 2, 3, 1)));
        let w = parse_sigma("exp(i*pi/4)", true).unwrap().to_complex();
        assert!((w - ComplexF::from_polar(1.0, PI / 4.0)).norm() < 1e-15);
        assert_eq!(parse_sigma("0.5-1.25i", true).unwrap(), Sigma::Numeric(ComplexF::new(0.5, -1.25)));
        assert_eq!(parse_sigma("-2e-3+i", true).unwrap(), Sigma::Numeric(ComplexF::new(-2e-3, 1.0)));
        assert_eq!(parse_sigma("-i", true).unwrap(), Sigma::Numeric(ComplexF::new(0.0, -1.0)));
        assert!(parse_sigma("0.5", false).is_err());
        assert!(parse_sigma("exp(pi^2)", true).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(run(&RunConfig { samples: 0, ..quick(Command::CheckOmega) }).is_err());
        assert!(run(&quick(Command::Bezout)).is_err());
        let mut bad = quick(Command::VerifyH);
        bad.tolerances.omega = -1.0;
        assert!(matches!(run(&bad), Err(Error::Config(_))));
    }

    #[test]
    fn bezout_command_reports_points() {
        let cfg = RunConfig { curve1: Some("y*z - x^2".into()), curve2: Some("y".into()), ..quick(Command::Bezout) };
        let r = run(&cfg).unwrap();
        assert!(r.passed());
        assert_eq!(r.details["intersection"]["points"][0]["multiplicity"], json!(2));
    }

    #[test]
    fn cde_command_on_omega_slice() {
        let cfg = RunConfig { sigma: Some("exp(i*pi/4)".into()), numeric: true, ..quick(Command::Cde) };
        let r = run(&cfg).unwrap();
        assert!(r.passed(), "{}", r.to_json());
        assert_eq!(r.details["cde"]["points"].as_array().unwrap().len(), 1);
    }
}
