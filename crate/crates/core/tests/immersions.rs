use std::f64::consts::PI;
use std::fs;

use einsub::immersions::{
    example_two, export_mesh, schwarzschild_default, schwarzschild_immersion, BaseCurvature, MeshSlice, TorusPlacement,
};
use einsub::verify::{pullback_fixtures, pullback_tolerance, Tolerances};
use einsub::warpfunc::{integrate, schwarzschild_params};
use einsub::Warp;

#[test]
fn every_constructor_is_isometric() {
    let tol = Tolerances::default();
    for (name, spec) in pullback_fixtures(1e-3).unwrap() {
        let pts = spec.chart.sample_points(20, 42, 0.05);
        let err = spec.max_pullback_error(&pts).unwrap();
        assert!(err <= pullback_tolerance(&spec, &tol), "{name}: {err}");
    }
}

#[test]
fn literal_torus_placement_is_not_isometric() {
    let spec = example_two(7, 2, BaseCurvature::One, TorusPlacement::Literal).unwrap();
    let pts = spec.chart.sample_points(5, 42, 0.05);
    assert!(spec.max_pullback_error(&pts).unwrap() > 1e-3);
}

#[test]
fn fiber_block_has_radius_phi() {
    let spec = schwarzschild_default(6, 3.0, 1e-3).unwrap();
    let start = spec.fiber_block_start();
    for x in spec.chart.sample_points(10, 3, 0.05) {
        let p = spec.point(&x).unwrap();
        let r = p.rows(start, p.len() - start).norm();
        let phi = spec.chart.warp.sample(x[0]).unwrap().phi;
        assert!((r - phi).abs() < 1e-12);
    }
}

#[test]
fn integrated_and_closed_form_agree_for_n5() {
    let sol = integrate(&schwarzschild_params(5).unwrap(), 3.0, 1e-3).unwrap();
    let a = schwarzschild_immersion(5, Warp::integrated(sol), (0.1, 2.9)).unwrap();
    let b = schwarzschild_immersion(5, Warp::ClosedFormN5 { c: -1.0 }, (0.1, 2.9)).unwrap();
    for x in a.chart.sample_points(20, 11, 0.05) {
        let ga = a.chart.metric_at(&x).unwrap();
        let gb = b.chart.metric_at(&x).unwrap();
        assert!((ga - gb).amax() <= 1e-9);
        let pa = a.point(&x).unwrap();
        let pb = b.point(&x).unwrap();
        assert!((pa - pb).amax() <= 1e-9);
    }
}

#[test]
fn jets_match_finite_differences() {
    for (name, spec) in pullback_fixtures(1e-3).unwrap() {
        for x in spec.chart.sample_points(3, 5, 0.1) {
            let e = spec.jet_difference_error(&x, 1e-4).unwrap();
            assert!(e < 1e-5, "{name}: {e}");
        }
    }
}

#[test]
fn mesh_slice_export() {
    let spec = schwarzschild_default(5, 3.0, 1e-3).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let slice = MeshSlice {
        base: spec.reference_point(),
        coords: vec![0, 1],
        ranges: vec![(0.2, 2.5), (-PI, PI)],
        resolution: vec![12, 16],
        periodic: vec![false, true],
    };
    let s = export_mesh(&spec, &slice, &dir.path().join("schw")).unwrap();
    assert_eq!(s.vertices, 12 * 16);
    assert_eq!(s.faces, 2 * 11 * 16);
    assert_eq!(s.degenerate_faces, 0);
    let obj = fs::read_to_string(&s.obj_path).unwrap();
    assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 192);
    assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), s.faces);
    let csv = fs::read_to_string(&s.csv_path).unwrap();
    assert_eq!(csv.lines().count(), 193);
}

#[test]
fn calibrated_scale_recorded() {
    let spec = example_two(7, 2, BaseCurvature::One, TorusPlacement::Lifted).unwrap();
    let d = spec.descriptor();
    let s = d.scale.unwrap();
    assert!((s - 1.0).abs() < 1e-12);
    let json = serde_json::to_string(&d).unwrap();
    assert!(json.contains("\"scale\""));
}
