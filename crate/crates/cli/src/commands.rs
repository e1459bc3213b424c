use std::f64::consts::PI;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use einsub::extrinsic::{appendix_classify, AppendixRecord};
use einsub::geometry::BaseKind;
use einsub::immersions::{
    clifford_immersion, example_one, example_two, export_mesh, extra_codim_default, profile_1b,
    profile_surface_immersion, rotational_immersion, schwarzschild_default, BaseCurvature, ImmersionDescriptor,
    ImmersionSpec, MeshSlice, MeshSummary, Surface, TorusPlacement,
};
use einsub::io::write_atomic;
use einsub::verify::{
    appendix_suite, clifford_fixture, constant_curvature_fixtures, extrinsic_checks, extrinsic_points, extrinsic_scan,
    full_report, immersion_fixture, intrinsic_checks, perturbed_clifford_fixture, pullback_check,
    schwarzschild_chart_fixture, schwarzschild_extrinsic_options, write_scan_csv, Check, ExtrinsicOptions,
    IntrinsicFixture, Status, VerificationReport,
};
use einsub::warpfunc::{
    closed_form_n5, gauss_curvature_l, integrate, integrate_with_tolerance, ricci_flat_params, schwarzschild_params,
    Warp, WarpEnvelope, WarpParams,
};

use crate::config::{config_err, Family, Placement, Settings};

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    write_atomic(path, |w| w.write_all(text.as_bytes())).with_context(|| format!("writing {}", path.display()))
}

fn print_report(r: &VerificationReport) {
    for c in &r.checks {
        let tag = if c.passed() { "PASS" } else { "FAIL" };
        let m = c.measured.map_or("n/a".to_string(), |m| format!("{m:.6e}"));
        println!("{tag} {} measured {m} ({:?} {:e})", c.name, c.bound, c.tolerance);
    }
    println!("overall: {}", if r.passed() { "pass" } else { "fail" });
}

fn unsupported(family: Family, command: &str) -> anyhow::Error {
    config_err(format!("family {family:?} is not available for {command}"))
}

fn turning_point(n: usize, eps: f64, rho: f64, c: f64) -> Result<f64> {
    let nf = n as f64;
    if rho == 0.0 && -c / eps > 0.0 {
        Ok((-c / eps).powf(1.0 / (nf - 3.0)))
    } else if c == 0.0 && eps * (nf - 1.0) / rho > 0.0 {
        Ok((eps * (nf - 1.0) / rho).sqrt())
    } else {
        Err(config_err(
            "no closed-form turning point for these parameters; give --phi0",
        ))
    }
}

pub fn warp_params(s: &Settings) -> Result<WarpParams> {
    let n = s.n_or(5);
    let family = s.family.unwrap_or(if s.c.is_some() {
        Family::Custom
    } else {
        Family::Schwarzschild
    });
    Ok(match family {
        Family::Schwarzschild => schwarzschild_params(n)?,
        Family::RicciFlat => ricci_flat_params(n, s.eps.unwrap_or(1.0))?,
        Family::Custom => {
            let eps = s.eps.unwrap_or(1.0);
            let rho = s.rho.unwrap_or(0.0);
            let c = s.c.ok_or_else(|| config_err("the custom family needs --c"))?;
            let (phi0, dphi0) = match (s.phi0, s.dphi0) {
                (Some(p), Some(d)) => (p, d),
                (Some(p), None) => {
                    let d2 = c / p.powi(n as i32 - 3) + eps - rho / (n as f64 - 1.0) * p * p;
                    if d2 < 0.0 {
                        return Err(config_err(format!("phi0 = {p} admits no real phi'(0) for c = {c}")));
                    }
                    (p, d2.sqrt())
                }
                (None, _) => (turning_point(n, eps, rho, c)?, 0.0),
            };
            WarpParams::with_c(n, eps, rho, c, 0.0, phi0, dphi0)?
        }
        other => return Err(unsupported(other, "warp")),
    })
}

#[derive(Serialize)]
struct CurvatureRange {
    k_min: f64,
    k_max: f64,
}

#[derive(Serialize)]
struct WarpOutput {
    envelope: WarpEnvelope,
    base_curvature: CurvatureRange,
    report: VerificationReport,
}

/// 5, or 95% of the way to the zero `t = pi/(2a)` of `cos(a t)/a` for
/// `c = 0`, `rho > 0` started at the turning point.
fn default_t_end(p: &WarpParams) -> f64 {
    let a2 = p.rho / (p.eps * (p.n as f64 - 1.0));
    if p.c == 0.0 && a2 > 0.0 && p.dphi0 == 0.0 && p.t0 == 0.0 {
        (0.95 * std::f64::consts::FRAC_PI_2 / a2.sqrt()).min(5.0)
    } else {
        5.0
    }
}

pub fn warp(s: &Settings, compare_closed_form: bool) -> Result<bool> {
    let p = warp_params(s)?;
    let t_end = s.t_end.unwrap_or_else(|| default_t_end(&p));
    let sol = integrate_with_tolerance(&p, t_end, s.step, s.tol.drift)?;
    let mut checks = vec![Check::at_most(
        "max_drift",
        sol.max_drift(),
        s.tol.drift,
        "c = (phi'^2 - eps + rho/(n-1) phi^2) phi^(n-3)",
    )];
    if compare_closed_form {
        if p.n != 5 || p.eps != 1.0 || p.rho != 0.0 {
            return Err(config_err("the closed form needs n = 5, eps = 1, rho = 0"));
        }
        let mut err = 0.0f64;
        for x in &sol.samples {
            err = err.max((x.phi - closed_form_n5(p.c, x.t)?.phi).abs());
        }
        checks.push(Check::at_most(
            "closed_form_error",
            err,
            s.tol.closed_form,
            "phi(t) = sqrt(t^2 - c)",
        ));
    }
    let (k_min, k_max) = sol
        .samples
        .iter()
        .map(|x| gauss_curvature_l(&p, x))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), k| (lo.min(k), hi.max(k)));
    let report = VerificationReport::new("warp", s.seed, &s.tol, checks);
    let csv = s.out.join("warp.csv");
    write_atomic(&csv, |w| sol.write_csv(w)).with_context(|| format!("writing {}", csv.display()))?;
    let envelope = sol.envelope();
    println!(
        "n = {}, c = {:.6e}, {} samples on [{}, {}], halt {:?}",
        p.n, p.c, envelope.samples, envelope.t_start, envelope.t_last, envelope.halt
    );
    println!("max drift {:.3e}", envelope.max_drift);
    println!("base curvature K in [{k_min:.12}, {k_max:.12}]");
    print_report(&report);
    let ok = report.passed();
    write_json(
        &s.out.join("warp.json"),
        &WarpOutput {
            envelope,
            base_curvature: CurvatureRange { k_min, k_max },
            report,
        },
    )?;
    Ok(ok)
}

fn base_curvature(s: &Settings) -> BaseCurvature {
    match s.k {
        Some(0) => BaseCurvature::Zero,
        _ => BaseCurvature::One,
    }
}

fn placement(s: &Settings) -> TorusPlacement {
    match s.placement {
        Placement::Lifted => TorusPlacement::Lifted,
        Placement::Literal => TorusPlacement::Literal,
    }
}

pub fn verify_intrinsic(s: &Settings) -> Result<bool> {
    let count = s.points_or(20);
    let n = s.n;
    let family = s.family.unwrap_or(Family::Clifford);
    let fixture: IntrinsicFixture = match family {
        Family::Clifford => clifford_fixture(n.unwrap_or(5), s.rho.unwrap_or(1.0), count, s.seed)?,
        Family::CliffordPerturbed => {
            let mut f = perturbed_clifford_fixture(n.unwrap_or(5), s.rho.unwrap_or(1.0), 0.05, count, s.seed)?;
            // checked as an ordinary Einstein fixture, so it fails
            f.negative = false;
            f
        }
        Family::Schwarzschild => schwarzschild_chart_fixture(n.unwrap_or(5), s.step, count, s.seed)?,
        Family::Sine | Family::Linear => {
            let mut v = constant_curvature_fixtures(n.unwrap_or(5), count, s.seed)?;
            v.swap_remove(usize::from(family == Family::Linear))
        }
        Family::ExampleOne => {
            let (n, m) = (n.unwrap_or(7), s.m.unwrap_or(2));
            immersion_fixture(
                &format!("example_one_n{n}_m{m}"),
                example_one(n, m, (0.5, 2.0))?,
                count,
                s.seed,
            )?
        }
        Family::ExampleTwo => {
            let (n, m) = (n.unwrap_or(7), s.m.unwrap_or(2));
            immersion_fixture(
                &format!("example_two_n{n}_m{m}"),
                example_two(n, m, base_curvature(s), placement(s))?,
                count,
                s.seed,
            )?
        }
        Family::ExtraCodim => {
            let (n, m) = (n.unwrap_or(7), s.m.unwrap_or(2));
            immersion_fixture(
                &format!("extra_codim_n{n}_m{m}"),
                extra_codim_default(n, m, s.t_end.unwrap_or(3.0), s.step)?,
                count,
                s.seed,
            )?
        }
        other => return Err(unsupported(other, "verify-intrinsic")),
    };
    let report = VerificationReport::new("intrinsic", s.seed, &s.tol, intrinsic_checks(&fixture, &s.tol)?);
    print_report(&report);
    write_json(&s.out.join("verify_intrinsic.json"), &report)?;
    Ok(report.passed())
}

fn build_spec(s: &Settings, family: Family) -> Result<ImmersionSpec> {
    let t_end = s.t_end.unwrap_or(3.0);
    Ok(match family {
        Family::Clifford => clifford_immersion(s.n_or(5), s.rho.unwrap_or(1.0))?,
        Family::Schwarzschild => schwarzschild_default(s.n_or(5), t_end, s.step)?,
        Family::Rotational => {
            if s.n_or(5) != 5 {
                return Err(config_err("the rotational closed-form fixture has n = 5"));
            }
            let warp = Warp::ClosedFormN5 { c: s.c.unwrap_or(-1.0) };
            let range = (0.1, t_end);
            rotational_immersion(
                Surface::RotationProfile(profile_1b(warp.clone(), range)?),
                warp,
                3,
                range,
            )?
        }
        Family::ProfileSurface => {
            let sol = integrate(&schwarzschild_params(s.n_or(5))?, t_end, s.step)?;
            let last = sol.t_last();
            profile_surface_immersion(profile_1b(Warp::integrated(sol), (0.1, last))?)?
        }
        Family::ExampleOne => example_one(s.n_or(7), s.m.unwrap_or(2), (0.5, 2.0))?,
        Family::ExampleTwo => example_two(s.n_or(7), s.m.unwrap_or(2), base_curvature(s), placement(s))?,
        Family::ExtraCodim => extra_codim_default(s.n_or(7), s.m.unwrap_or(2), t_end, s.step)?,
        other => return Err(unsupported(other, "build")),
    })
}

fn default_slice(spec: &ImmersionSpec) -> MeshSlice {
    let c = &spec.chart;
    let first = if matches!(c.base, BaseKind::RoundBase { .. }) {
        (0.05 * PI, 0.95 * PI)
    } else {
        let w = c.upper[0] - c.lower[0];
        (c.lower[0] + 0.01 * w, c.upper[0] - 0.01 * w)
    };
    let full_turn = c.lower[1] == -PI && c.upper[1] == PI;
    MeshSlice {
        base: spec.reference_point(),
        coords: vec![0, 1],
        ranges: vec![first, (c.lower[1], c.upper[1])],
        resolution: vec![24, 32],
        periodic: vec![false, full_turn],
    }
}

#[derive(Serialize)]
struct BuildOutput {
    family: Family,
    descriptor: ImmersionDescriptor,
    mesh: MeshSummary,
    report: VerificationReport,
}

pub fn build(s: &Settings) -> Result<bool> {
    let family = s.family.unwrap_or(Family::Schwarzschild);
    let spec = build_spec(s, family)?;
    let stem = family.slug();
    let mesh = export_mesh(&spec, &default_slice(&spec), &s.out.join(&stem))?;
    let check = pullback_check(&stem, &spec, &s.tol, s.points_or(20), s.seed)?;
    let report = VerificationReport::new("build", s.seed, &s.tol, vec![check]);
    let descriptor = spec.descriptor();
    if let Some(scale) = descriptor.scale {
        println!("calibrated scale s = {scale:.17}");
    }
    println!(
        "{} vertices, {} faces -> {}, {}",
        mesh.vertices,
        mesh.faces,
        mesh.obj_path.display(),
        mesh.csv_path.display()
    );
    print_report(&report);
    let ok = report.passed();
    write_json(
        &s.out.join(format!("{stem}_spec.json")),
        &BuildOutput {
            family,
            descriptor,
            mesh,
            report,
        },
    )?;
    Ok(ok)
}

pub fn verify_extrinsic(s: &Settings) -> Result<bool> {
    let count = s.points_or(10);
    let family = s.family.unwrap_or(Family::Schwarzschild);
    let t_end = s.t_end.unwrap_or(3.0);
    let (name, spec, opts) = match family {
        Family::Schwarzschild | Family::Perturbed => {
            let n = s.n_or(5);
            let mut opts = schwarzschild_extrinsic_options(n);
            if family == Family::Perturbed {
                opts.perturbation = Some(0.05);
            }
            (
                format!("{}_n{n}", family.slug()),
                schwarzschild_default(n, t_end, s.step)?,
                opts,
            )
        }
        Family::Clifford => {
            let n = s.n_or(5);
            let rho = s.rho.unwrap_or(1.0);
            let opts = ExtrinsicOptions {
                rho,
                umbilical_dim: Some(n - 2),
                profile_delta: false,
                base_curvature: false,
                perturbation: None,
                derivative_points: 2,
            };
            (format!("clifford_n{n}"), clifford_immersion(n, rho)?, opts)
        }
        Family::ExtraCodim => {
            let (n, m) = (s.n_or(7), s.m.unwrap_or(2));
            let opts = ExtrinsicOptions {
                rho: 0.0,
                umbilical_dim: None,
                profile_delta: false,
                base_curvature: false,
                perturbation: None,
                derivative_points: 2,
            };
            (
                format!("extra_codim_n{n}_m{m}"),
                extra_codim_default(n, m, t_end, s.step)?,
                opts,
            )
        }
        other => return Err(unsupported(other, "verify-extrinsic")),
    };
    let points = extrinsic_points(&spec, count, s.seed);
    let mut checks = extrinsic_checks(&name, &spec, &points, &opts, &s.tol, s.seed)?;
    if family == Family::Schwarzschild {
        checks.extend(appendix_suite(&s.tol, s.seed, count, s.step)?.checks);
    }
    let rows = extrinsic_scan(&spec, &points, opts.rho, opts.perturbation, &s.tol, s.seed)?;
    let csv = s.out.join("extrinsic_scan.csv");
    write_atomic(&csv, |w| write_scan_csv(&rows, w)).with_context(|| format!("writing {}", csv.display()))?;
    let report = VerificationReport::new("extrinsic", s.seed, &s.tol, checks);
    print_report(&report);
    write_json(&s.out.join("verify_extrinsic.json"), &report)?;
    Ok(report.passed())
}

fn parse_diagonal(text: &str) -> Result<[f64; 4]> {
    let v: Vec<f64> = text
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| config_err(format!("bad diagonal {text:?}: {e}")))?;
    v.try_into()
        .map_err(|v: Vec<f64>| config_err(format!("a diagonal needs 4 entries, got {}", v.len())))
}

#[derive(Serialize)]
struct AppendixOutput {
    a1: [f64; 4],
    a2: [f64; 4],
    record: AppendixRecord,
}

pub fn classify_appendix(s: &Settings, a1: Option<&str>, a2: Option<&str>) -> Result<bool> {
    match (a1, a2) {
        (Some(a1), Some(a2)) => {
            let (a1, a2) = (parse_diagonal(a1)?, parse_diagonal(a2)?);
            let record = appendix_classify(&a1, &a2, s.tol.appendix)?;
            println!("{}", serde_json::to_string(&record)?);
            let ok = !matches!(record, AppendixRecord::Unclassified { .. });
            write_json(&s.out.join("appendix.json"), &AppendixOutput { a1, a2, record })?;
            Ok(ok)
        }
        (None, None) => {
            let report = appendix_suite(&s.tol, s.seed, s.points_or(10), s.step)?;
            print_report(&report);
            write_json(&s.out.join("appendix.json"), &report)?;
            Ok(report.passed())
        }
        _ => Err(config_err("give both --a1 and --a2, or neither")),
    }
}

pub fn report(s: &Settings) -> Result<bool> {
    let r = full_report(&s.tol, s.seed)?;
    for suite in &r.suites {
        let failed = suite.checks.iter().filter(|c| !c.passed()).count();
        println!(
            "{:<12} {} ({} checks, {failed} failed)",
            suite.suite,
            if suite.passed() { "pass" } else { "fail" },
            suite.checks.len()
        );
    }
    println!("overall: {}", if r.overall == Status::Pass { "pass" } else { "fail" });
    let path = s.out.join("report.json");
    let text = r.to_json()?;
    write_atomic(&path, |w| w.write_all(text.as_bytes())).with_context(|| format!("writing {}", path.display()))?;
    Ok(r.overall == Status::Pass)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn turning_points() {
        assert!((turning_point(5, 1.0, 0.0, -4.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((turning_point(5, 1.0, 4.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(turning_point(5, 1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn diagonals() {
        assert_eq!(parse_diagonal(" 2, 1,1 ,-1").unwrap(), [2.0, 1.0, 1.0, -1.0]);
        assert!(parse_diagonal("1,2,x,4").is_err());
    }

    #[test]
    fn sine_default_stops_before_the_zero() {
        let p = WarpParams::with_c(5, 1.0, 4.0, 0.0, 0.0, 1.0, 0.0).unwrap();
        let t = default_t_end(&p);
        assert!(t < std::f64::consts::FRAC_PI_2 && t > 1.4);
    }
}
