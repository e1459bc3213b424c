//! Acceptance criteria 1-8, one PASS/FAIL line each.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use einsub::verify::{
    appendix_suite, closed_form_suite, conservation_suite, extrinsic_suite, full_report, identity_suite,
    intrinsic_suite, pullback_suite, Tolerances, VerificationReport, APPENDIX_POINTS, DEFAULT_SEED, INTRINSIC_POINTS,
    PULLBACK_POINTS,
};
use einsub::warpfunc::DEFAULT_STEP;

struct Outcome {
    pass: bool,
    detail: String,
}

fn failures(r: &VerificationReport) -> Vec<String> {
    r.checks
        .iter()
        .filter(|c| !c.passed())
        .map(|c| {
            format!(
                "{} measured {:?} vs {:?} {:e}",
                c.name, c.measured, c.bound, c.tolerance
            )
        })
        .collect()
}

fn from_report(r: einsub::Result<VerificationReport>, extra: Option<(bool, String)>) -> Outcome {
    match r {
        Ok(r) => {
            let mut bad = failures(&r);
            let mut detail = format!("{} checks", r.checks.len());
            if let Some((ok, msg)) = extra {
                detail.push_str(&format!(", {msg}"));
                if !ok {
                    bad.push(msg);
                }
            }
            if bad.is_empty() {
                Outcome { pass: true, detail }
            } else {
                Outcome {
                    pass: false,
                    detail: bad.join("; "),
                }
            }
        }
        Err(e) => Outcome {
            pass: false,
            detail: format!("error: {e}"),
        },
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn max_measured(r: &VerificationReport, name: &str) -> String {
    r.check(name)
        .and_then(|c| c.measured)
        .map_or("n/a".into(), |m| format!("{m:.3e}"))
}

fn main() -> ExitCode {
    let tol = Tolerances::default();
    let seed = DEFAULT_SEED;
    let mut outcomes: Vec<(&str, Outcome)> = Vec::new();

    let (r, dt) = timed(|| closed_form_suite(&tol, DEFAULT_STEP));
    let err = r
        .as_ref()
        .map(|r| max_measured(r, "closed_form_n5"))
        .unwrap_or_default();
    outcomes.push((
        "n=5 closed form, max error <= 1e-9, runtime < 1 s",
        from_report(
            r,
            Some((dt < Duration::from_secs(1), format!("max error {err}, {dt:.2?}"))),
        ),
    ));

    outcomes.push((
        "first-integral drift <= 1e-8 for n in {4,5,6,7,9}; halving improves >= 8x",
        from_report(conservation_suite(&tol, &[4, 5, 6, 7, 9], DEFAULT_STEP), None),
    ));

    outcomes.push((
        "Schwarzschild identity <= 1e-9 for n in {4,5,6}; margin(0) = 0, margin > 0 for t >= 0.1",
        from_report(identity_suite(&tol, &[4, 5, 6], DEFAULT_STEP), None),
    ));

    let (r, dt) = timed(|| intrinsic_suite(&tol, seed, INTRINSIC_POINTS, DEFAULT_STEP));
    outcomes.push((
        "FD Einstein <= 5e-5 at 20 points; spread structure; perturbed Clifford rejected; runtime < 60 s",
        from_report(
            r,
            Some((
                dt < Duration::from_secs(60) && INTRINSIC_POINTS >= 20,
                format!("{INTRINSIC_POINTS} points per fixture, {dt:.2?}"),
            )),
        ),
    ));

    outcomes.push((
        "pullback <= 1e-8 (analytic) / 1e-6 (quadrature) for every constructor",
        from_report(pullback_suite(&tol, seed, PULLBACK_POINTS, DEFAULT_STEP), None),
    ));

    outcomes.push((
        "extrinsic suite on Schwarzschild n=4,5,6",
        from_report(extrinsic_suite(&tol, seed, 10, DEFAULT_STEP), None),
    ));

    outcomes.push((
        "appendix: n=4 eps=+1 at >= 10 points; (2,1,1,1) gives (1,1,1), positivity > 0",
        from_report(
            appendix_suite(&tol, seed, APPENDIX_POINTS, DEFAULT_STEP),
            Some((APPENDIX_POINTS >= 10, format!("{APPENDIX_POINTS} points"))),
        ),
    ));

    let determinism = (|| -> einsub::Result<(bool, usize)> {
        let a = full_report(&tol, seed)?.to_json()?;
        let b = full_report(&tol, seed)?.to_json()?;
        Ok((a == b, a.len()))
    })();
    outcomes.push((
        "two full runs with the same seed give byte-identical JSON",
        match determinism {
            Ok((same, len)) => Outcome {
                pass: same,
                detail: format!("{len} bytes, identical: {same}"),
            },
            Err(e) => Outcome {
                pass: false,
                detail: format!("error: {e}"),
            },
        },
    ));

    let mut all = true;
    for (i, (what, o)) in outcomes.iter().enumerate() {
        all &= o.pass;
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {}: {tag} - {what} ({})", i + 1, o.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
