use proptest::prelude::*;

use einsub::extrinsic::{appendix_classify, AppendixRecord, TOL_APPENDIX};
use einsub::immersions::schwarzschild_default;
use einsub::verify::{Bound, Check};
use einsub::warpfunc::{integrate, WarpParams};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn first_integral_conserved(n in 4usize..10, c in -2.0f64..-0.1) {
        // start at the turning point phi^(n-3) = -c
        let phi0 = (-c).powf(1.0 / (n as f64 - 3.0));
        let p = WarpParams::with_c(n, 1.0, 0.0, c, 0.0, phi0, 0.0).unwrap();
        let sol = integrate(&p, 3.0, 1e-3).unwrap();
        prop_assert!(sol.max_drift() <= 1e-8);
    }

    #[test]
    fn alpha_is_symmetric(t in 0.3f64..2.5, u in -3.0f64..3.0, a in 0.6f64..2.5, b in -3.0f64..3.0) {
        let spec = schwarzschild_default(5, 3.0, 1e-3).unwrap();
        let jet = spec.jet(&[t, u, a, 1.3, b]).unwrap();
        let f = einsub::extrinsic::frames(&jet, None).unwrap();
        let ops = einsub::extrinsic::second_fundamental_form(&jet, &f).unwrap();
        prop_assert!(ops.max_asymmetry() <= 1e-12);
    }

    #[test]
    fn rotated_epsilon_forms_are_recovered(
        a in 0.5f64..2.0,
        db in 0.3f64..1.5,
        p in 0.5f64..2.0,
        theta in -3.0f64..3.0,
        neg in any::<bool>(),
    ) {
        let eps = if neg { -1.0 } else { 1.0 };
        let b = a + db;
        let q = eps * (a * a - b * b) / p;
        let a1 = [a, eps * a, b, eps * b];
        let a2 = [0.0, 0.0, p, q];
        let (s, c) = f64::sin_cos(theta);
        let r1: Vec<f64> = (0..4).map(|i| c * a1[i] + s * a2[i]).collect();
        let r2: Vec<f64> = (0..4).map(|i| -s * a1[i] + c * a2[i]).collect();
        let rec = appendix_classify(
            &[r1[0], r1[1], r1[2], r1[3]],
            &[r2[0], r2[1], r2[2], r2[3]],
            TOL_APPENDIX,
        ).unwrap();
        match rec {
            AppendixRecord::EpsilonForm { eps: e, residual, .. } => {
                prop_assert_eq!(e, eps);
                prop_assert!(residual <= 1e-8);
            }
            other => prop_assert!(false, "{:?}", other),
        }
    }

    #[test]
    fn at_most_matches_comparison(m in -1.0f64..1.0, t in -1.0f64..1.0) {
        prop_assert_eq!(Check::new("x", Some(m), Bound::AtMost, t, "").passed(), m <= t);
        prop_assert_eq!(Check::new("x", Some(m), Bound::Above, t, "").passed(), m > t);
    }
}
