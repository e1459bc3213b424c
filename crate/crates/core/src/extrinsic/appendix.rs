//! Normal forms of commuting shape operators of a four-dimensional
//! Einstein submanifold of codimension two.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance for gauge fixing and for the relations.
pub const TOL_APPENDIX: f64 = 1e-6;
const GRID: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum AppendixRecord {
    /// `A_1 = diag(a, b, c, d)`, `A_2 = diag(0, p, q, r)` with
    /// `pq = ad - bc`, `pr = ac - bd`, `qr = ab - cd`.
    GenericForm {
        a: f64,
        b: f64,
        c: f64,
        d: f64,
        p: f64,
        q: f64,
        r: f64,
        /// `pq - (ad - bc)`, `pr - (ac - bd)`, `qr - (ab - cd)`.
        residuals: [f64; 3],
        /// `(ba - cd)(ca - bd)(da - bc)`.
        positivity: f64,
        theta: f64,
        order: [usize; 4],
    },
    /// `A_1 = diag(a, eps a, b, eps b)`, `A_2 = diag(0, 0, p, q)` with
    /// `pq = eps (a^2 - b^2)`.
    EpsilonForm {
        a: f64,
        b: f64,
        p: f64,
        q: f64,
        eps: f64,
        residual: f64,
        theta: f64,
        order: [usize; 4],
    },
    Unclassified {
        best_residual: f64,
    },
}

impl AppendixRecord {
    pub fn label(&self) -> &'static str {
        match self {
            AppendixRecord::GenericForm { .. } => "generic_form",
            AppendixRecord::EpsilonForm { .. } => "epsilon_form",
            AppendixRecord::Unclassified { .. } => "unclassified",
        }
    }
}

fn rotate(a1: &[f64; 4], a2: &[f64; 4], theta: f64) -> ([f64; 4], [f64; 4]) {
    let (s, c) = theta.sin_cos();
    let mut r1 = [0.0; 4];
    let mut r2 = [0.0; 4];
    for i in 0..4 {
        r1[i] = c * a1[i] + s * a2[i];
        r2[i] = -s * a1[i] + c * a2[i];
    }
    (r1, r2)
}

/// Normal rotation angle zeroing the `k`-th entry of `A_2` with a positive
/// `k`-th entry of `A_1`: grid search then golden section on `|A_2[k]|`.
fn gauge_angle(a: f64, p: f64) -> f64 {
    let g = |t: f64| (-t.sin() * a + t.cos() * p).abs();
    let pos = |t: f64| t.cos() * a + t.sin() * p > 0.0;
    let step = 2.0 * PI / GRID as f64;
    let mut best = (f64::INFINITY, 0.0);
    for j in 0..GRID {
        let t = -PI + j as f64 * step;
        if pos(t) && g(t) < best.0 {
            best = (g(t), t);
        }
    }
    let (mut lo, mut hi) = (best.1 - step, best.1 + step);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (g(x1), g(x2));
    for _ in 0..200 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = g(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = g(x2);
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn close(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs()))
}

fn epsilon_at(r1: &[f64; 4], r2: &[f64; 4], k: usize, theta: f64, tol: f64, best: &mut f64) -> Option<AppendixRecord> {
    let a = r1[k];
    let others: Vec<usize> = (0..4).filter(|&i| i != k).collect();
    for &l in &others {
        if r2[l].abs() > tol {
            continue;
        }
        for eps in [1.0, -1.0] {
            if !close(r1[l], eps * a, tol) {
                continue;
            }
            let rest: Vec<usize> = others.iter().copied().filter(|&i| i != l).collect();
            let (m1, m2) = (rest[0], rest[1]);
            if !close(r1[m2], eps * r1[m1], tol) {
                continue;
            }
            let (b, p, q) = (r1[m1], r2[m1], r2[m2]);
            if p.abs() <= tol || q.abs() <= tol {
                continue;
            }
            let residual = (p * q - eps * (a * a - b * b)).abs();
            *best = best.min(residual);
            if residual <= tol {
                return Some(AppendixRecord::EpsilonForm {
                    a,
                    b,
                    p,
                    q,
                    eps,
                    residual,
                    theta,
                    order: [k, l, m1, m2],
                });
            }
        }
    }
    None
}

fn generic_at(r1: &[f64; 4], r2: &[f64; 4], k: usize, theta: f64, tol: f64, best: &mut f64) -> Option<AppendixRecord> {
    let a = r1[k];
    let o: Vec<usize> = (0..4).filter(|&i| i != k).collect();
    let (b, c, d) = (r1[o[0]], r1[o[1]], r1[o[2]]);
    let (p, q, r) = (r2[o[0]], r2[o[1]], r2[o[2]]);
    let residuals = [
        p * q - (a * d - b * c),
        p * r - (a * c - b * d),
        q * r - (a * b - c * d),
    ];
    let worst = residuals.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    *best = best.min(worst);
    (worst <= tol).then(|| AppendixRecord::GenericForm {
        a,
        b,
        c,
        d,
        p,
        q,
        r,
        residuals,
        positivity: (b * a - c * d) * (c * a - b * d) * (d * a - b * c),
        theta,
        order: [k, o[0], o[1], o[2]],
    })
}

/// Brings diagonal shape operators into one of the two normal forms.
///
/// Each entry `k` fixes a normal gauge with `A_2[k] = 0`: the given frame
/// when that entry already vanishes, a rotated one otherwise. The
/// `eps`-form is reported when some gauge has exactly two vanishing
/// entries of `A_2`; otherwise the first gauge satisfying the generic
/// relations is reported.
pub fn appendix_classify(a1: &[f64; 4], a2: &[f64; 4], tol: f64) -> Result<AppendixRecord> {
    let mut best = f64::INFINITY;
    let gauges: Vec<(usize, f64, [f64; 4], [f64; 4])> = (0..4)
        .filter(|&k| a1[k].abs() > tol || a2[k].abs() > tol)
        .filter_map(|k| {
            let theta = if a2[k].abs() <= tol && a1[k].abs() > tol {
                0.0
            } else {
                gauge_angle(a1[k], a2[k])
            };
            let (r1, r2) = rotate(a1, a2, theta);
            (r2[k].abs() <= tol && r1[k].abs() > tol).then_some((k, theta, r1, r2))
        })
        .collect();
    if gauges.is_empty() {
        return Err(Error::NotNormalForm);
    }
    for (k, theta, r1, r2) in &gauges {
        if let Some(r) = epsilon_at(r1, r2, *k, *theta, tol, &mut best) {
            return Ok(r);
        }
    }
    for (k, theta, r1, r2) in &gauges {
        if let Some(r) = generic_at(r1, r2, *k, *theta, tol, &mut best) {
            return Ok(r);
        }
    }
    Ok(AppendixRecord::Unclassified { best_residual: best })
}

/// All `(p, q, r)` with `pq = ad - bc`, `pr = ac - bd`, `qr = ab - cd`,
/// found by trying every sign choice of the magnitudes the relations force.
pub fn solve_generic_relations(a: f64, b: f64, c: f64, d: f64, tol: f64) -> Vec<[f64; 3]> {
    let (x, y, z) = (a * d - b * c, a * c - b * d, a * b - c * d);
    if x == 0.0 || y == 0.0 || z == 0.0 {
        return Vec::new();
    }
    let (pp, qq, rr) = (x * y / z, x * z / y, y * z / x);
    if pp < 0.0 || qq < 0.0 || rr < 0.0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for mask in 0..8u8 {
        let sign = |bit: u8| if mask & (1 << bit) != 0 { -1.0 } else { 1.0 };
        let (p, q, r) = (sign(0) * pp.sqrt(), sign(1) * qq.sqrt(), sign(2) * rr.sqrt());
        if (p * q - x).abs() <= tol && (p * r - y).abs() <= tol && (q * r - z).abs() <= tol {
            out.push([p, q, r]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epsilon_form_by_construction() {
        let r = appendix_classify(&[1.0, 1.0, 2.0, 2.0], &[0.0, 0.0, 1.0, -3.0], TOL_APPENDIX).unwrap();
        match r {
            AppendixRecord::EpsilonForm {
                eps, residual, theta, ..
            } => {
                assert_eq!(eps, 1.0);
                assert_eq!(residual, 0.0);
                assert_eq!(theta, 0.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn generic_example() {
        let r = appendix_classify(&[2.0, 1.0, 1.0, 1.0], &[0.0, 1.0, 1.0, 1.0], TOL_APPENDIX).unwrap();
        match r {
            AppendixRecord::GenericForm {
                residuals,
                positivity,
                p,
                q,
                r,
                ..
            } => {
                assert_eq!(residuals, [0.0; 3]);
                assert_eq!(positivity, 1.0);
                assert_eq!([p, q, r], [1.0; 3]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn brute_force_relations() {
        let s = solve_generic_relations(2.0, 1.0, 1.0, 1.0, 1e-12);
        assert_eq!(s, vec![[1.0, 1.0, 1.0], [-1.0, -1.0, -1.0]]);
    }

    #[test]
    fn rotated_input_is_gauged() {
        let (r1, r2) = rotate(&[1.0, 1.0, 2.0, 2.0], &[0.0, 0.0, 1.0, -3.0], 0.37);
        let r = appendix_classify(&r1, &r2, TOL_APPENDIX).unwrap();
        match r {
            AppendixRecord::EpsilonForm { eps, residual, a, .. } => {
                assert_eq!(eps, 1.0);
                assert!(residual < 1e-12);
                assert!((a - 1.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_operators_have_no_gauge() {
        assert!(matches!(
            appendix_classify(&[0.0; 4], &[0.0; 4], TOL_APPENDIX),
            Err(Error::NotNormalForm)
        ));
    }
}
