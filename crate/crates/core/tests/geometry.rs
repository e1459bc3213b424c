use std::f64::consts::PI;

use einsub::geometry::{
    christoffel_fd, clifford_radii, einstein_conditions_residual, einstein_radii, product_condition, ricci_fd,
    BaseKind, RadiiFamily,
};
use einsub::warpfunc::{gauss_curvature_l, integrate, schwarzschild_params};
use einsub::{ChartSpec, FiberSpec, MetricField, Warp};

fn schwarzschild_chart(n: usize) -> ChartSpec {
    let sol = integrate(&schwarzschild_params(n).unwrap(), 3.0, 1e-3).unwrap();
    ChartSpec::new(
        Warp::integrated(sol),
        FiberSpec::round_sphere(n - 2, 1.0).unwrap(),
        BaseKind::WarpedCoords,
        (0.5, 2.5),
        (-PI, PI),
    )
    .unwrap()
}

fn generic_point(n: usize, t: f64) -> Vec<f64> {
    let mut x = vec![t, 0.3];
    for i in 0..n - 2 {
        // polar angles first, the azimuth last
        x.push(if i + 1 < n - 2 { 1.2 + 0.1 * i as f64 } else { 0.4 });
    }
    x
}

#[test]
fn clifford_and_schwarzschild_einstein_at_t1() {
    let c = ChartSpec::clifford(5, 1.0).unwrap();
    let r = ricci_fd(&c, &generic_point(5, 1.0), 1e-3, 1.0).unwrap();
    assert!(r.einstein_residual <= 5e-5, "{}", r.einstein_residual);
    for n in [5, 6] {
        let s = schwarzschild_chart(n);
        let r = ricci_fd(&s, &generic_point(n, 1.0), 1e-3, 0.0).unwrap();
        assert!(r.einstein_residual <= 5e-5, "n={n}: {}", r.einstein_residual);
    }
}

#[test]
fn sine_warp_has_unit_sectional_curvature() {
    let c = ChartSpec::new(
        Warp::Sine { a: 1.0 },
        FiberSpec::round_sphere(3, 1.0).unwrap(),
        BaseKind::WarpedCoords,
        (0.2, 1.3),
        (-PI, PI),
    )
    .unwrap();
    for x in c.sample_points(5, 7, 0.05) {
        let r = ricci_fd(&c, &x, 1e-3, 4.0).unwrap();
        for s in &r.sectional_samples {
            assert!((s.k - 1.0).abs() < 1e-6, "{s:?}");
        }
    }
}

#[test]
fn christoffel_t_uu() {
    let c = schwarzschild_chart(5);
    let x = generic_point(5, 1.3);
    let g = christoffel_fd(&c, &x, 1e-3).unwrap();
    let w = c.warp.sample(1.3).unwrap();
    assert!((g.get(0, 1, 1) + w.dphi * w.d2phi).abs() < 1e-8);
}

#[test]
fn product_law_and_perturbation() {
    for n in [5, 6, 8] {
        let (r1, r2) = clifford_radii(n, 1.0).unwrap();
        let k1 = 1.0 / (r1 * r1);
        let k2 = 1.0 / (r2 * r2);
        assert!(product_condition(n, 2, k1, k2).abs() < 1e-12);
    }
    let (r1, r2) = clifford_radii(5, 1.0).unwrap();
    let bad = ChartSpec::clifford_with_radii(5, r1, 1.05 * r2).unwrap();
    let r = ricci_fd(&bad, &generic_point(5, 1.0), 1e-3, 1.0).unwrap();
    assert!(r.einstein_residual > 1e-3);
}

#[test]
fn torus_radii_families() {
    let r = einstein_radii(7, RadiiFamily::NormalizedTorus { m: 2 }).unwrap();
    assert!((r.r1 * r.r1 + r.r2 * r.r2 - 0.75).abs() < 1e-14);
    let u = einstein_radii(7, RadiiFamily::UnitSphereTorus { m: 2 }).unwrap();
    assert!((u.r1 * u.r1 + u.r2 * u.r2 - 1.0).abs() < 1e-14);
    assert!(einstein_radii(7, RadiiFamily::NormalizedTorus { m: 4 }).is_err());
}

#[test]
fn ricci_refinement_improves_residual() {
    let c = schwarzschild_chart(5);
    let x = generic_point(5, 1.0);
    let coarse = ricci_fd(&c, &x, 0.1, 0.0).unwrap().einstein_residual;
    let fine = ricci_fd(&c, &x, 0.05, 0.0).unwrap().einstein_residual;
    assert!(coarse / fine >= 4.0, "{coarse} {fine}");
}

#[test]
fn flat_chart_without_fiber() {
    let c = ChartSpec::new(
        Warp::Constant { value: 1.0 },
        FiberSpec::absent(),
        BaseKind::FlatBase,
        (-1.0, 1.0),
        (-1.0, 1.0),
    )
    .unwrap();
    assert_eq!(c.dim(), 2);
    let r = ricci_fd(&c, &[0.1, 0.2], 1e-3, 0.0).unwrap();
    assert_eq!(r.einstein_residual, 0.0);
    assert_eq!(r.scalar, 0.0);
}

#[test]
fn warped_conditions_along_schwarzschild() {
    let p = schwarzschild_params(6).unwrap();
    let sol = integrate(&p, 3.0, 1e-3).unwrap();
    for s in sol.samples.iter().step_by(250).skip(1) {
        let k = gauss_curvature_l(&p, s);
        let (r1, r2) = einstein_conditions_residual(&p, s, k);
        assert!(r1.abs() < 1e-9 && r2.abs() < 1e-9, "t={} {r1} {r2}", s.t);
    }
}

#[test]
fn chart_rejects_poles_and_outside_points() {
    let c = schwarzschild_chart(5);
    assert!(c.metric(&[1.0, 0.0, 0.0, 1.0, 0.0]).is_err());
    assert!(c.metric(&[2.9, 0.0, 1.0, 1.0, 0.0]).is_err());
}
