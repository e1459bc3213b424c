//! Verification suites: every check compares one measured number against
//! an entry of the tolerance table.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extrinsic::{
    analyze_jet, appendix_classify, codazzi_residual, dupin_leaf_residual, frames, gauss_equation_residual,
    perturb_jet, profile_delta_check, second_fundamental_form, simultaneous_eigenbasis, solve_generic_relations,
    AppendixRecord, EpsilonFormField, ShapeOperatorSet,
};
use crate::geometry::{ricci_fd, BaseKind, ChartSpec, FiberSpec, MetricField};
use crate::immersions::TOL_PULLBACK_QUADRATURE;
use crate::immersions::{
    clifford_immersion, example_one, example_two, extra_codim_default, profile_1b, profile_surface_immersion,
    rotational_immersion, schwarzschild_default, BaseCurvature, ImmersionSpec, Pullback, Surface, TorusPlacement,
};
use crate::warpfunc::{
    embeddability_margin, fmt17, gauss_curvature_l, integrate, schwarzschild_identity_residual, schwarzschild_params,
    Warp,
};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = 42;

/// Every default tolerance in one table. Reports echo the values used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Integrated `n = 5` warp against `sqrt(t^2 + 1)`.
    pub closed_form: f64,
    /// First-integral drift along a solution.
    pub drift: f64,
    /// Least drift improvement when the step is halved.
    pub drift_halving: f64,
    pub identity: f64,
    /// `|margin(0)|` for the Schwarzschild warp.
    pub margin_at_zero: f64,
    pub einstein: f64,
    /// Sectional spread bound for constant curvature fixtures.
    pub spread_constant: f64,
    /// Least sectional spread of the Schwarzschild fixtures.
    pub spread_schwarzschild: f64,
    /// Least residual a negative control must show.
    pub negative: f64,
    pub pullback_analytic: f64,
    pub pullback_quadrature: f64,
    pub flat_normal: f64,
    pub umbilic: f64,
    /// Grouping tolerance for principal normals.
    pub grouping: f64,
    pub delta: f64,
    pub intrinsic_extrinsic: f64,
    pub gauss: f64,
    pub dupin: f64,
    pub codazzi: f64,
    pub appendix: f64,
    pub fd_step: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            closed_form: 1e-9,
            drift: 1e-8,
            drift_halving: 8.0,
            identity: 1e-9,
            margin_at_zero: 1e-12,
            einstein: 5e-5,
            spread_constant: 1e-4,
            spread_schwarzschild: 1e-2,
            negative: 1e-3,
            pullback_analytic: 1e-8,
            pullback_quadrature: 1e-6,
            flat_normal: 1e-6,
            umbilic: 1e-6,
            grouping: 1e-5,
            delta: 1e-6,
            intrinsic_extrinsic: 1e-4,
            gauss: 1e-4,
            dupin: 1e-4,
            codazzi: 1e-3,
            appendix: 1e-6,
            fd_step: 1e-3,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let v = serde_json::to_value(self)?;
        for (k, x) in v.as_object().into_iter().flatten() {
            match x.as_f64() {
                Some(t) if t > 0.0 && t.is_finite() => {}
                _ => {
                    return Err(Error::Config(format!(
                        "tolerance {k} must be positive and finite, got {x}"
                    )))
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
}

/// How `measured` is compared with `tolerance`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    AtMost,
    AtLeast,
    Above,
    Equal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    /// Absent when the quantity could not be formed.
    pub measured: Option<f64>,
    pub tolerance: f64,
    pub bound: Bound,
    pub anchor: String,
}

impl Check {
    pub fn new(name: impl Into<String>, measured: Option<f64>, bound: Bound, tolerance: f64, anchor: &str) -> Self {
        let ok = measured.is_some_and(|m| match bound {
            Bound::AtMost => m <= tolerance,
            Bound::AtLeast => m >= tolerance,
            Bound::Above => m > tolerance,
            Bound::Equal => m == tolerance,
        });
        Self {
            name: name.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            measured,
            tolerance,
            bound,
            anchor: anchor.into(),
        }
    }

    pub fn at_most(name: impl Into<String>, measured: f64, tolerance: f64, anchor: &str) -> Self {
        Self::new(name, Some(measured), Bound::AtMost, tolerance, anchor)
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub checks: Vec<Check>,
    pub overall: Status,
}

impl VerificationReport {
    pub fn new(suite: &str, seed: u64, tolerances: &Tolerances, checks: Vec<Check>) -> Self {
        let overall = if checks.iter().all(Check::passed) {
            Status::Pass
        } else {
            Status::Fail
        };
        Self {
            suite: suite.into(),
            seed,
            tolerances: *tolerances,
            checks,
            overall,
        }
    }

    pub fn passed(&self) -> bool {
        self.overall == Status::Pass
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullReport {
    pub schema_version: u32,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub suites: Vec<VerificationReport>,
    pub overall: Status,
}

impl FullReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

fn max_of(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

fn min_of(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(f64::INFINITY, f64::min)
}

/// Integrated `n = 5` Schwarzschild warp on `[0, 5]` against `sqrt(t^2 + 1)`.
pub fn closed_form_suite(tol: &Tolerances, step: f64) -> Result<VerificationReport> {
    let sol = integrate(&schwarzschild_params(5)?, 5.0, step)?;
    let err = max_of(sol.samples.iter().map(|s| (s.phi - (s.t * s.t + 1.0).sqrt()).abs()));
    let checks = vec![
        Check::at_most("closed_form_n5", err, tol.closed_form, "phi(t) = sqrt(t^2 + 1)"),
        Check::new(
            "closed_form_n5_reaches_t5",
            Some(sol.t_last()),
            Bound::AtLeast,
            5.0 - 0.5 * step,
            "integration covers [0, 5]",
        ),
    ];
    Ok(VerificationReport::new("closed_form", 0, tol, checks))
}

/// Drift of the first integral on `[0, 5]` and its improvement on halving.
pub fn conservation_suite(tol: &Tolerances, dims: &[usize], step: f64) -> Result<VerificationReport> {
    let mut checks = Vec::new();
    for &n in dims {
        let p = schwarzschild_params(n)?;
        let sol = integrate(&p, 5.0, step)?;
        checks.push(Check::at_most(
            format!("drift_n{n}"),
            sol.max_drift(),
            tol.drift,
            "c = (phi'^2 - eps + rho/(n-1) phi^2) phi^(n-3)",
        ));
        let coarse = integrate(&p, 5.0, 0.02)?.max_drift();
        let fine = integrate(&p, 5.0, 0.01)?.max_drift();
        checks.push(Check::new(
            format!("drift_halving_n{n}"),
            Some(coarse / fine),
            Bound::AtLeast,
            tol.drift_halving,
            "drift improves on halving the step (0.02 -> 0.01)",
        ));
    }
    Ok(VerificationReport::new("conservation", 0, tol, checks))
}

/// The Schwarzschild identity and the embeddability margin along solutions.
pub fn identity_suite(tol: &Tolerances, dims: &[usize], step: f64) -> Result<VerificationReport> {
    let mut checks = Vec::new();
    for &n in dims {
        let p = schwarzschild_params(n)?;
        let sol = integrate(&p, 5.0, step)?;
        let mut worst = 0.0f64;
        for s in &sol.samples {
            worst = worst.max(schwarzschild_identity_residual(&p, s)?.abs());
        }
        checks.push(Check::at_most(
            format!("identity_n{n}"),
            worst,
            tol.identity,
            "2 phi phi'' + (n-3)(phi'^2 - 1) = 0 with phi'^2 = 1 + c/phi^(n-3)",
        ));
        checks.push(Check::at_most(
            format!("margin_at_zero_n{n}"),
            embeddability_margin(&sol.samples[0]).abs(),
            tol.margin_at_zero,
            "1 - phi'^2 - phi''^2 = 0 at t = 0",
        ));
        let positive = min_of(sol.samples.iter().filter(|s| s.t >= 0.1).map(embeddability_margin));
        checks.push(Check::new(
            format!("margin_positive_n{n}"),
            Some(positive),
            Bound::Above,
            0.0,
            "1 - phi'^2 - phi''^2 > 0 for t > 0",
        ));
    }
    Ok(VerificationReport::new("identity", 0, tol, checks))
}

/// A metric field with its Einstein constant and the expected sectional
/// structure.
pub struct IntrinsicFixture {
    pub name: String,
    pub field: Box<dyn MetricField>,
    pub rho: f64,
    pub points: Vec<Vec<f64>>,
    pub spread: Option<Spread>,
    /// Negative control: the Einstein residual must exceed the negative
    /// tolerance instead of meeting the Einstein bound.
    pub negative: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spread {
    Constant,
    Schwarzschild,
}

struct OwnedPullback(ImmersionSpec);

impl MetricField for OwnedPullback {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        Pullback(&self.0).metric(x)
    }
}

const SAMPLE_MARGIN: f64 = 0.05;

fn chart_fixture(name: &str, chart: ChartSpec, rho: f64, count: usize, seed: u64) -> IntrinsicFixture {
    let points = chart.sample_points(count, seed, SAMPLE_MARGIN);
    IntrinsicFixture {
        name: name.into(),
        field: Box::new(chart),
        rho,
        points,
        spread: None,
        negative: false,
    }
}

/// Einstein checks on the pullback metric of an immersion.
pub fn immersion_fixture(name: &str, spec: ImmersionSpec, count: usize, seed: u64) -> Result<IntrinsicFixture> {
    let n = spec.dim();
    let rho = spec
        .chart
        .warp
        .params(n)
        .map(|p| p.rho)
        .ok_or_else(|| Error::Config(format!("{name}: warp has no Einstein constant")))?;
    let points = spec.chart.sample_points(count, seed, SAMPLE_MARGIN);
    Ok(IntrinsicFixture {
        name: name.into(),
        field: Box::new(OwnedPullback(spec)),
        rho,
        points,
        spread: None,
        negative: false,
    })
}

pub fn clifford_fixture(n: usize, rho: f64, count: usize, seed: u64) -> Result<IntrinsicFixture> {
    Ok(chart_fixture(
        &format!("clifford_n{n}_rho{rho}"),
        ChartSpec::clifford(n, rho)?,
        rho,
        count,
        seed,
    ))
}

/// Clifford product with the second radius scaled by `1 + perturbation`.
pub fn perturbed_clifford_fixture(
    n: usize,
    rho: f64,
    perturbation: f64,
    count: usize,
    seed: u64,
) -> Result<IntrinsicFixture> {
    let (r1, r2) = crate::geometry::clifford_radii(n, rho)?;
    let chart = ChartSpec::clifford_with_radii(n, r1, r2 * (1.0 + perturbation))?;
    let mut f = chart_fixture(&format!("clifford_perturbed_n{n}"), chart, rho, count, seed);
    f.negative = true;
    Ok(f)
}

/// Schwarzschild chart on `t in [0.5, 2]`.
pub fn schwarzschild_chart_fixture(n: usize, step: f64, count: usize, seed: u64) -> Result<IntrinsicFixture> {
    let sol = integrate(&schwarzschild_params(n)?, 2.5, step)?;
    let chart = ChartSpec::new(
        Warp::integrated(sol),
        FiberSpec::round_sphere(n - 2, 1.0)?,
        BaseKind::WarpedCoords,
        (0.5, 2.0),
        (-PI, PI),
    )?;
    let mut f = chart_fixture(&format!("schwarzschild_chart_n{n}"), chart, 0.0, count, seed);
    f.spread = Some(Spread::Schwarzschild);
    Ok(f)
}

/// `c = 0` warps: `sin t` (the round sphere) and `t` (Euclidean space).
pub fn constant_curvature_fixtures(n: usize, count: usize, seed: u64) -> Result<Vec<IntrinsicFixture>> {
    let fiber = FiberSpec::round_sphere(n - 2, 1.0)?;
    let sine = ChartSpec::new(
        Warp::Sine { a: 1.0 },
        fiber.clone(),
        BaseKind::WarpedCoords,
        (0.2, 1.3),
        (-PI, PI),
    )?;
    let linear = ChartSpec::new(Warp::Linear, fiber, BaseKind::WarpedCoords, (0.5, 2.0), (-PI, PI))?;
    let mut out = vec![
        chart_fixture(&format!("sine_warp_n{n}"), sine, n as f64 - 1.0, count, seed),
        chart_fixture(&format!("linear_warp_n{n}"), linear, 0.0, count, seed),
    ];
    for f in &mut out {
        f.spread = Some(Spread::Constant);
    }
    Ok(out)
}

pub fn example_fixtures(count: usize, seed: u64) -> Result<Vec<IntrinsicFixture>> {
    Ok(vec![
        immersion_fixture("example_one_n7_m2", example_one(7, 2, (0.5, 2.0))?, count, seed)?,
        immersion_fixture(
            "example_two_k1_n7_m2",
            example_two(7, 2, BaseCurvature::One, TorusPlacement::Lifted)?,
            count,
            seed,
        )?,
        immersion_fixture(
            "example_two_k0_n7_m2",
            example_two(7, 2, BaseCurvature::Zero, TorusPlacement::Lifted)?,
            count,
            seed,
        )?,
    ])
}

/// Einstein residual, and sectional spread where the fixture prescribes it.
pub fn intrinsic_checks(f: &IntrinsicFixture, tol: &Tolerances) -> Result<Vec<Check>> {
    let mut residuals = Vec::with_capacity(f.points.len());
    let mut spreads = Vec::with_capacity(f.points.len());
    for x in &f.points {
        let r = ricci_fd(f.field.as_ref(), x, tol.fd_step, f.rho)?;
        residuals.push(r.einstein_residual);
        spreads.push(r.sectional_spread());
    }
    let mut checks = Vec::new();
    if f.negative {
        checks.push(Check::new(
            format!("{}_einstein_rejected", f.name),
            Some(min_of(residuals.iter().copied())),
            Bound::Above,
            tol.negative,
            "Ric != rho g off the Einstein radii",
        ));
    } else {
        checks.push(Check::at_most(
            format!("{}_einstein", f.name),
            max_of(residuals.iter().copied()),
            tol.einstein,
            "Ric = rho g",
        ));
    }
    match f.spread {
        Some(Spread::Constant) => checks.push(Check::at_most(
            format!("{}_sectional_spread", f.name),
            max_of(spreads),
            tol.spread_constant,
            "constant curvature K = rho/(n-1) for c = 0",
        )),
        Some(Spread::Schwarzschild) => checks.push(Check::new(
            format!("{}_sectional_spread", f.name),
            Some(min_of(spreads)),
            Bound::AtLeast,
            tol.spread_schwarzschild,
            "non-constant curvature for c < 0",
        )),
        None => {}
    }
    checks.push(Check::new(
        format!("{}_points", f.name),
        Some(f.points.len() as f64),
        Bound::AtLeast,
        1.0,
        "sample set",
    ));
    Ok(checks)
}

pub fn intrinsic_fixtures(count: usize, seed: u64, step: f64) -> Result<Vec<IntrinsicFixture>> {
    let mut out = vec![
        clifford_fixture(5, 1.0, count, seed)?,
        clifford_fixture(6, 2.0, count, seed)?,
        schwarzschild_chart_fixture(5, step, count, seed)?,
        schwarzschild_chart_fixture(6, step, count, seed)?,
    ];
    out.extend(constant_curvature_fixtures(5, count, seed)?);
    out.extend(example_fixtures(count, seed)?);
    out.push(perturbed_clifford_fixture(5, 1.0, 0.05, count, seed)?);
    Ok(out)
}

pub fn intrinsic_suite(tol: &Tolerances, seed: u64, count: usize, step: f64) -> Result<VerificationReport> {
    let mut checks = Vec::new();
    for f in intrinsic_fixtures(count, seed, step)? {
        checks.extend(intrinsic_checks(&f, tol)?);
    }
    Ok(VerificationReport::new("intrinsic", seed, tol, checks))
}

/// Every constructor with its name.
pub fn pullback_fixtures(step: f64) -> Result<Vec<(String, ImmersionSpec)>> {
    let closed = Warp::ClosedFormN5 { c: -1.0 };
    let mut out = vec![
        ("clifford_n5".to_string(), clifford_immersion(5, 1.0)?),
        ("clifford_n6".to_string(), clifford_immersion(6, 2.0)?),
        (
            "rotational_closed_form_n5".to_string(),
            rotational_immersion(
                Surface::RotationProfile(profile_1b(closed.clone(), (0.1, 3.0))?),
                closed.clone(),
                3,
                (0.1, 3.0),
            )?,
        ),
    ];
    for n in [4, 5, 6] {
        out.push((format!("schwarzschild_n{n}"), schwarzschild_default(n, 3.0, step)?));
    }
    let sol = integrate(&schwarzschild_params(5)?, 3.0, step)?;
    out.push((
        "profile_surface_n5".to_string(),
        profile_surface_immersion(profile_1b(Warp::integrated(sol), (0.1, 2.9))?)?,
    ));
    out.push(("example_one_n7_m2".into(), example_one(7, 2, (0.5, 2.0))?));
    out.push((
        "example_two_k1_n7_m2".into(),
        example_two(7, 2, BaseCurvature::One, TorusPlacement::Lifted)?,
    ));
    out.push((
        "example_two_k0_n7_m2".into(),
        example_two(7, 2, BaseCurvature::Zero, TorusPlacement::Lifted)?,
    ));
    out.push(("extra_codim_n7_m2".into(), extra_codim_default(7, 2, 3.0, step)?));
    Ok(out)
}

pub fn pullback_tolerance(spec: &ImmersionSpec, tol: &Tolerances) -> f64 {
    if spec.pullback_tolerance() == TOL_PULLBACK_QUADRATURE {
        tol.pullback_quadrature
    } else {
        tol.pullback_analytic
    }
}

pub fn pullback_check(name: &str, spec: &ImmersionSpec, tol: &Tolerances, count: usize, seed: u64) -> Result<Check> {
    let points = spec.chart.sample_points(count, seed, SAMPLE_MARGIN);
    Ok(Check::at_most(
        format!("{name}_pullback"),
        spec.max_pullback_error(&points)?,
        pullback_tolerance(spec, tol),
        "f* <,> = chart metric",
    ))
}

pub fn pullback_suite(tol: &Tolerances, seed: u64, count: usize, step: f64) -> Result<VerificationReport> {
    let mut checks = Vec::new();
    for (name, spec) in pullback_fixtures(step)? {
        checks.push(pullback_check(&name, &spec, tol, count, seed)?);
    }
    let literal = example_two(7, 2, BaseCurvature::One, TorusPlacement::Literal)?;
    let points = literal.chart.sample_points(count, seed, SAMPLE_MARGIN);
    checks.push(Check::new(
        "example_two_literal_rejected",
        Some(literal.max_pullback_error(&points)?),
        Bound::Above,
        tol.negative,
        "torus in the sphere of radius^2 (n-4)/(n-3) is not isometric",
    ));
    Ok(VerificationReport::new("pullback", seed, tol, checks))
}

/// Options of [`extrinsic_checks`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtrinsicOptions {
    pub rho: f64,
    /// Expected umbilical dimension.
    pub umbilical_dim: Option<usize>,
    /// Check `A_delta = phi'' I` on the profile surface.
    pub profile_delta: bool,
    /// Compare `K(U^perp)` with the Gauss curvature of the base.
    pub base_curvature: bool,
    /// Seeded second-order perturbation of every jet.
    pub perturbation: Option<f64>,
    /// Points on which Codazzi and Dupin are evaluated.
    pub derivative_points: usize,
}

fn umbilic_anchor() -> &'static str {
    "rho - K(U^perp) - (n-2)<alpha11, eta>, <alpha11 - alpha22, eta>, <alpha12, eta>, rho - (n-3)|eta|^2 - 2<alpha11, eta>"
}

/// The extrinsic identities at every point of `points`.
pub fn extrinsic_checks(
    name: &str,
    spec: &ImmersionSpec,
    points: &[Vec<f64>],
    opts: &ExtrinsicOptions,
    tol: &Tolerances,
    seed: u64,
) -> Result<Vec<Check>> {
    let n = spec.dim();
    let mut fnb = Vec::new();
    let mut dims = Vec::new();
    let mut umb = Vec::new();
    let mut kperp = Vec::new();
    let mut gauss = Vec::new();
    let mut delta = Vec::new();
    let mut sym = Vec::new();
    let profile = if opts.profile_delta {
        let (t0, t1) = (spec.chart.lower[0], spec.chart.upper[0]);
        Some(profile_surface_immersion(profile_1b(
            spec.chart.warp.clone(),
            (t0, t1),
        )?)?)
    } else {
        None
    };
    for (i, x) in points.iter().enumerate() {
        let mut jet = spec.jet(x)?;
        if let Some(a) = opts.perturbation {
            jet = perturb_jet(&jet, a, seed.wrapping_add(i as u64));
        }
        let (frame, ops, report) = analyze_jet(&jet, x, opts.rho, tol.grouping, None)?;
        fnb.push(report.flat_normal_bundle_residual);
        sym.push(ops.max_asymmetry());
        match &report.umbilical {
            Some(u) => {
                dims.push(Some(u.umbilical_dim));
                umb.push(u.residuals.map(|r| r.max_abs()));
                if opts.base_curvature {
                    let w = spec.chart.warp.sample(x[0])?;
                    let p = spec.chart.warp.params(n).ok_or(Error::WrongRegime)?;
                    kperp.push(u.residuals.map(|r| (r.k_perp - gauss_curvature_l(&p, &w)).abs()));
                }
            }
            None => {
                dims.push(None);
                umb.push(None);
                kperp.push(None);
            }
        }
        let ric = ricci_fd(&spec.chart, x, tol.fd_step, opts.rho)?.ricci_matrix();
        gauss.push(gauss_equation_residual(&ops, &ric, &frame)?);
        if let Some(ps) = &profile {
            let pj = ps.jet(&x[..2])?;
            let pf = frames(&pj, None)?;
            delta.push(profile_delta_check(&pj, &spec.chart.warp.sample(x[0])?, &pf)?);
        }
    }
    let all = |v: &[Option<f64>]| -> Option<f64> { v.iter().try_fold(0.0f64, |m, x| x.map(|x| m.max(x))) };
    let mut checks = vec![
        Check::at_most(
            format!("{name}_alpha_symmetry"),
            max_of(sym),
            1e-12,
            "alpha(X, Y) = alpha(Y, X)",
        ),
        Check::at_most(
            format!("{name}_flat_normal_bundle"),
            max_of(fnb),
            tol.flat_normal,
            "[A_xi, A_zeta] = 0",
        ),
    ];
    if let Some(d) = opts.umbilical_dim {
        let worst = dims
            .iter()
            .map(|x| x.map(|k| k as f64))
            .try_fold(d as f64, |w, x| x.map(|x| if x != d as f64 { x } else { w }));
        checks.push(Check::new(
            format!("{name}_umbilical_dim"),
            worst,
            Bound::Equal,
            d as f64,
            "alpha(X, Y) = <X, Y> eta on U, dim U = n - 2",
        ));
        checks.push(Check::new(
            format!("{name}_umbilic_identities"),
            all(&umb),
            Bound::AtMost,
            tol.umbilic,
            umbilic_anchor(),
        ));
    }
    if opts.base_curvature {
        checks.push(Check::new(
            format!("{name}_k_perp_matches_base"),
            all(&kperp),
            Bound::AtMost,
            tol.intrinsic_extrinsic,
            "K(U^perp) = -phi'''/phi'",
        ));
    }
    checks.push(Check::at_most(
        format!("{name}_gauss_equation"),
        max_of(gauss),
        tol.gauss,
        "Ric(X, Y) = n<alpha(X, Y), H> - sum <alpha(X, X_i), alpha(Y, X_i)>",
    ));
    if opts.profile_delta {
        checks.push(Check::at_most(
            format!("{name}_profile_delta"),
            max_of(delta),
            tol.delta,
            "A_delta = phi'' I",
        ));
    }
    if opts.perturbation.is_none() && opts.derivative_points > 0 {
        let take = &points[..opts.derivative_points.min(points.len())];
        let mut cod = 0.0f64;
        for x in take {
            cod = cod.max(codazzi_residual(spec, x, tol.fd_step)?);
        }
        checks.push(Check::at_most(
            format!("{name}_codazzi"),
            cod,
            tol.codazzi,
            "(grad_X alpha)(Y, Z) = (grad_Y alpha)(X, Z)",
        ));
        if opts.umbilical_dim.is_some() {
            let dupin = dupin_leaf_residual(spec, &take[0], 4, tol.fd_step, tol.grouping)?;
            checks.push(Check::at_most(
                format!("{name}_dupin_leaf"),
                dupin,
                tol.dupin,
                "grad^perp eta = 0 along the leaves of U",
            ));
        }
    }
    Ok(checks)
}

/// Interior points of an immersion chart suitable for the derivative tests.
pub fn extrinsic_points(spec: &ImmersionSpec, count: usize, seed: u64) -> Vec<Vec<f64>> {
    spec.chart.sample_points(count, seed, 0.1)
}

pub fn schwarzschild_extrinsic_options(n: usize) -> ExtrinsicOptions {
    ExtrinsicOptions {
        rho: 0.0,
        umbilical_dim: Some(n - 2),
        profile_delta: true,
        base_curvature: true,
        perturbation: None,
        derivative_points: 2,
    }
}

pub fn extrinsic_suite(tol: &Tolerances, seed: u64, count: usize, step: f64) -> Result<VerificationReport> {
    let mut checks = Vec::new();
    for n in [4, 5, 6] {
        let spec = schwarzschild_default(n, 3.0, step)?;
        let pts = extrinsic_points(&spec, count, seed);
        checks.extend(extrinsic_checks(
            &format!("schwarzschild_n{n}"),
            &spec,
            &pts,
            &schwarzschild_extrinsic_options(n),
            tol,
            seed,
        )?);
    }
    let clifford = clifford_immersion(5, 1.0)?;
    let pts = extrinsic_points(&clifford, count, seed);
    checks.extend(extrinsic_checks(
        "clifford_n5",
        &clifford,
        &pts,
        &ExtrinsicOptions {
            rho: 1.0,
            umbilical_dim: Some(3),
            profile_delta: false,
            base_curvature: false,
            perturbation: None,
            derivative_points: 2,
        },
        tol,
        seed,
    )?);
    let spec = schwarzschild_default(5, 3.0, step)?;
    let pts = extrinsic_points(&spec, count, seed);
    let negative = perturbed_flat_normal(&spec, &pts, 0.05, seed)?;
    checks.push(Check::new(
        "perturbed_schwarzschild_n5_rejected",
        Some(negative),
        Bound::Above,
        tol.negative,
        "perturbed second fundamental form has non-commuting shape operators",
    ));
    Ok(VerificationReport::new("extrinsic", seed, tol, checks))
}

/// Smallest commutator residual over `points` after a seeded perturbation
/// of the jets.
pub fn perturbed_flat_normal(spec: &ImmersionSpec, points: &[Vec<f64>], amplitude: f64, seed: u64) -> Result<f64> {
    let mut least = f64::INFINITY;
    for (i, x) in points.iter().enumerate() {
        let jet = perturb_jet(&spec.jet(x)?, amplitude, seed.wrapping_add(i as u64));
        let frame = frames(&jet, None)?;
        let ops = second_fundamental_form(&jet, &frame)?;
        least = least.min(crate::extrinsic::flat_normal_bundle_residual(&ops));
    }
    Ok(least)
}

/// Diagonal entries of each shape operator in a simultaneous eigenbasis.
pub fn diagonal_entries(ops: &ShapeOperatorSet, tol: f64) -> Vec<Vec<f64>> {
    let dirs = simultaneous_eigenbasis(&ops.ops, tol);
    ops.ops
        .iter()
        .map(|a| dirs.iter().map(|v| (v.transpose() * a * v)[(0, 0)]).collect())
        .collect()
}

/// Appendix normal form at one point of a four-dimensional codimension-two
/// immersion.
pub fn classify_at(spec: &ImmersionSpec, x: &[f64], tol: &Tolerances) -> Result<AppendixRecord> {
    let jet = spec.jet(x)?;
    let frame = frames(&jet, None)?;
    let ops = second_fundamental_form(&jet, &frame)?;
    if ops.dim() != 4 || ops.codim() != 2 {
        return Err(Error::BadDimension(ops.dim()));
    }
    let d = diagonal_entries(&ops, tol.grouping);
    let a1: [f64; 4] = [d[0][0], d[0][1], d[0][2], d[0][3]];
    let a2: [f64; 4] = [d[1][0], d[1][1], d[1][2], d[1][3]];
    appendix_classify(&a1, &a2, tol.appendix)
}

pub fn appendix_suite(tol: &Tolerances, seed: u64, count: usize, step: f64) -> Result<VerificationReport> {
    let spec = schwarzschild_default(4, 3.0, step)?;
    let pts = extrinsic_points(&spec, count, seed);
    let mut hits = 0usize;
    let mut worst: Option<f64> = Some(0.0);
    for x in &pts {
        match classify_at(&spec, x, tol)? {
            AppendixRecord::EpsilonForm { eps: 1.0, residual, .. } => {
                hits += 1;
                worst = worst.map(|w| w.max(residual));
            }
            _ => worst = None,
        }
    }
    let mut checks = vec![
        Check::new(
            "schwarzschild_n4_epsilon_plus_one",
            Some(hits as f64),
            Bound::Equal,
            pts.len() as f64,
            "eps = 1 form at every point",
        ),
        Check::new(
            "schwarzschild_n4_epsilon_residual",
            worst,
            Bound::AtMost,
            tol.appendix,
            "pq = eps (a^2 - b^2)",
        ),
    ];
    let sols = solve_generic_relations(2.0, 1.0, 1.0, 1.0, 1e-12);
    let dist = sols
        .iter()
        .map(|s| max_of(s.iter().map(|v| (v - 1.0).abs())))
        .reduce(f64::min);
    checks.push(Check::new(
        "generic_2111_solution",
        dist,
        Bound::AtMost,
        tol.appendix,
        "pq = ad - bc, pr = ac - bd, qr = ab - cd gives p = q = r = 1",
    ));
    let (residual, positivity) = match appendix_classify(&[2.0, 1.0, 1.0, 1.0], &[0.0, 1.0, 1.0, 1.0], tol.appendix)? {
        AppendixRecord::GenericForm {
            residuals, positivity, ..
        } => (Some(max_of(residuals.iter().map(|r| r.abs()))), Some(positivity)),
        _ => (None, None),
    };
    checks.push(Check::new(
        "generic_2111_residuals",
        residual,
        Bound::AtMost,
        tol.appendix,
        "pq = ad - bc, pr = ac - bd, qr = ab - cd",
    ));
    checks.push(Check::new(
        "generic_2111_positivity",
        positivity,
        Bound::Above,
        0.0,
        "(ba - cd)(ca - bd)(da - bc) > 0",
    ));
    let field = EpsilonFormField { eps: -1.0 };
    let x = [0.2, -0.1, 0.3, 0.4];
    let coarse = codazzi_residual(&field, &x, 1e-2)?;
    let fine = codazzi_residual(&field, &x, 5e-3)?;
    checks.push(Check::new(
        "epsilon_minus_one_codazzi_persists",
        Some(coarse.min(fine)),
        Bound::Above,
        tol.negative,
        "eps = -1 form violates Codazzi under refinement",
    ));
    Ok(VerificationReport::new("appendix", seed, tol, checks))
}

/// One row of an extrinsic point scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub point: Vec<f64>,
    pub fnb_residual: f64,
    /// Zero when the normal bundle is not flat.
    pub umb_dim: usize,
    pub ga1_res: Option<f64>,
    pub eqalpha1_res: Option<f64>,
    pub gauss_res: f64,
}

/// Per-point extrinsic diagnostics; `perturbation` perturbs every jet.
pub fn extrinsic_scan(
    spec: &ImmersionSpec,
    points: &[Vec<f64>],
    rho: f64,
    perturbation: Option<f64>,
    tol: &Tolerances,
    seed: u64,
) -> Result<Vec<ScanRow>> {
    points
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let mut jet = spec.jet(x)?;
            if let Some(a) = perturbation {
                jet = perturb_jet(&jet, a, seed.wrapping_add(i as u64));
            }
            let (frame, ops, report) = analyze_jet(&jet, x, rho, tol.grouping, None)?;
            let ric = ricci_fd(&spec.chart, x, tol.fd_step, rho)?.ricci_matrix();
            let res = report.umbilical.as_ref().and_then(|u| u.residuals);
            Ok(ScanRow {
                point: x.clone(),
                fnb_residual: report.flat_normal_bundle_residual,
                umb_dim: report.umbilical.as_ref().map_or(0, |u| u.umbilical_dim),
                ga1_res: res.map(|r| r.ga1),
                eqalpha1_res: res.map(|r| r.eqalpha1),
                gauss_res: gauss_equation_residual(&ops, &ric, &frame)?,
            })
        })
        .collect()
}

/// CSV with header `t,u,x2,...,fnb_residual,umb_dim,ga1_res,eqalpha1_res,gauss_res`;
/// missing residuals are empty fields.
pub fn write_scan_csv<W: std::io::Write>(rows: &[ScanRow], mut w: W) -> std::io::Result<()> {
    let dim = rows.first().map_or(0, |r| r.point.len());
    let mut head: Vec<String> = vec!["t".into(), "u".into()];
    head.extend((2..dim).map(|i| format!("x{i}")));
    head.extend(["fnb_residual", "umb_dim", "ga1_res", "eqalpha1_res", "gauss_res"].map(String::from));
    writeln!(w, "{}", head.join(","))?;
    let opt = |x: Option<f64>| x.map(fmt17).unwrap_or_default();
    for r in rows {
        let mut cells: Vec<String> = r.point.iter().map(|&x| fmt17(x)).collect();
        cells.push(fmt17(r.fnb_residual));
        cells.push(r.umb_dim.to_string());
        cells.push(opt(r.ga1_res));
        cells.push(opt(r.eqalpha1_res));
        cells.push(fmt17(r.gauss_res));
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Sample counts used by [`full_report`].
pub const INTRINSIC_POINTS: usize = 20;
pub const PULLBACK_POINTS: usize = 20;
pub const EXTRINSIC_POINTS: usize = 10;
pub const APPENDIX_POINTS: usize = 10;

/// All suites at default sample counts.
pub fn full_report(tol: &Tolerances, seed: u64) -> Result<FullReport> {
    tol.validate()?;
    let step = crate::warpfunc::DEFAULT_STEP;
    let suites = vec![
        closed_form_suite(tol, step)?,
        conservation_suite(tol, &[4, 5, 6, 7, 9], step)?,
        identity_suite(tol, &[4, 5, 6], step)?,
        intrinsic_suite(tol, seed, INTRINSIC_POINTS, step)?,
        pullback_suite(tol, seed, PULLBACK_POINTS, step)?,
        extrinsic_suite(tol, seed, EXTRINSIC_POINTS, step)?,
        appendix_suite(tol, seed, APPENDIX_POINTS, step)?,
    ];
    let overall = if suites.iter().all(VerificationReport::passed) {
        Status::Pass
    } else {
        Status::Fail
    };
    Ok(FullReport {
        schema_version: SCHEMA_VERSION,
        seed,
        tolerances: *tol,
        suites,
        overall,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds() {
        assert!(Check::at_most("a", 1.0, 1.0, "").passed());
        assert!(!Check::new("a", Some(1.0), Bound::Above, 1.0, "").passed());
        assert!(Check::new("a", Some(3.0), Bound::Equal, 3.0, "").passed());
        assert!(!Check::new("a", None, Bound::AtMost, 1.0, "").passed());
    }

    #[test]
    fn overall_is_conjunction() {
        let t = Tolerances::default();
        let r = VerificationReport::new(
            "x",
            0,
            &t,
            vec![Check::at_most("a", 0.0, 1.0, ""), Check::at_most("b", 2.0, 1.0, "")],
        );
        assert_eq!(r.overall, Status::Fail);
    }

    #[test]
    fn tolerances_reject_unknown_and_nonpositive() {
        assert!(serde_json::from_str::<Tolerances>(r#"{"nope": 1.0}"#).is_err());
        let t: Tolerances = serde_json::from_str(r#"{"einstein": 0.0}"#).unwrap();
        assert!(t.validate().is_err());
        Tolerances::default().validate().unwrap();
    }

    #[test]
    fn closed_form_passes() {
        let r = closed_form_suite(&Tolerances::default(), 1e-3).unwrap();
        assert!(r.passed(), "{r:?}");
    }
}
