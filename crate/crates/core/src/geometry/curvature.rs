//! Levi-Civita connection and curvature of a metric field by central
//! differences.
//!
//! Derivatives use the five-point stencil
//! `(f(x-2h) - 8 f(x-h) + 8 f(x+h) - f(x+2h)) / 12h`, so Christoffel symbols
//! need a ball of radius `2h` and the Riemann tensor a ball of radius `4h`.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::chart::MetricField;
use crate::error::Result;

pub const DEFAULT_FD_STEP: f64 = 1e-3;
const SECTIONAL_SEED: u64 = 0x5EC7_10AA;
const SECTIONAL_PLANES: usize = 10;

/// `gamma[k][i][j] = Gamma^k_{ij}`, stored flat.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    pub n: usize,
    pub data: Vec<f64>,
}

impl Christoffel {
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.n + i) * self.n + j]
    }

    fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    fn at_mut(&mut self, k: usize, i: usize, j: usize) -> &mut f64 {
        &mut self.data[(k * self.n + i) * self.n + j]
    }
}

/// `R^a_{bcd}` with `R(d_c, d_d) d_b = R^a_{bcd} d_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct Riemann {
    pub n: usize,
    pub data: Vec<f64>,
}

impl Riemann {
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        let n = self.n;
        self.data[((a * n + b) * n + c) * n + d]
    }

    /// All-lower components `R_{abcd} = g_{ae} R^e_{bcd}`.
    pub fn lowered(&self, g: &DMatrix<f64>) -> Riemann {
        let n = self.n;
        let mut out = vec![0.0; n * n * n * n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        out[((a * n + b) * n + c) * n + d] = (0..n).map(|e| g[(a, e)] * self.get(e, b, c, d)).sum();
                    }
                }
            }
        }
        Riemann { n, data: out }
    }

    pub fn ricci(&self) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |b, d| (0..n).map(|a| self.get(a, b, a, d)).sum())
    }
}

fn five_point<T, F>(x: &[f64], dir: usize, h: f64, mut f: F) -> Result<Vec<T>>
where
    F: FnMut(&[f64]) -> Result<T>,
{
    let mut p = x.to_vec();
    let mut out = Vec::with_capacity(4);
    for k in [-2.0, -1.0, 1.0, 2.0] {
        p[dir] = x[dir] + k * h;
        out.push(f(&p)?);
    }
    Ok(out)
}

/// Derivatives `dg[l] = d g / d x_l`.
fn metric_derivatives<M: MetricField + ?Sized>(field: &M, x: &[f64], h: f64) -> Result<Vec<DMatrix<f64>>> {
    (0..field.dim())
        .map(|l| {
            let v = five_point(x, l, h, |p| field.metric(p))?;
            Ok((&v[0] - &v[1] * 8.0 + &v[2] * 8.0 - &v[3]) / (12.0 * h))
        })
        .collect()
}

/// Christoffel symbols from the metric and its first derivatives.
pub fn christoffel_from(g: &DMatrix<f64>, dg: &[DMatrix<f64>]) -> Christoffel {
    let n = g.nrows();
    let ginv = g
        .clone()
        .try_inverse()
        .unwrap_or_else(|| DMatrix::from_element(n, n, f64::NAN));
    let mut gamma = Christoffel::zeros(n);
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                let v: f64 = (0..n)
                    .map(|l| 0.5 * ginv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]))
                    .sum();
                *gamma.at_mut(k, i, j) = v;
                *gamma.at_mut(k, j, i) = v;
            }
        }
    }
    gamma
}

/// `Gamma^k_{ij}` at `x` from central differences of the metric.
pub fn christoffel_fd<M: MetricField + ?Sized>(field: &M, x: &[f64], h: f64) -> Result<Christoffel> {
    let g = field.metric(x)?;
    let dg = metric_derivatives(field, x, h)?;
    Ok(christoffel_from(&g, &dg))
}

/// Riemann tensor from central differences of [`christoffel_fd`].
pub fn riemann_fd<M: MetricField + ?Sized>(field: &M, x: &[f64], h: f64) -> Result<Riemann> {
    let n = field.dim();
    let gamma = christoffel_fd(field, x, h)?;
    // dgamma[m] = d Gamma / d x_m
    let dgamma: Vec<Vec<f64>> = (0..n)
        .map(|m| {
            let v = five_point(x, m, h, |p| christoffel_fd(field, p, h))?;
            Ok((0..n * n * n)
                .map(|q| (v[0].data[q] - 8.0 * v[1].data[q] + 8.0 * v[2].data[q] - v[3].data[q]) / (12.0 * h))
                .collect())
        })
        .collect::<Result<_>>()?;
    let dg = |m: usize, k: usize, i: usize, j: usize| dgamma[m][(k * n + i) * n + j];
    let mut data = vec![0.0; n * n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut r = dg(c, a, d, b) - dg(d, a, c, b);
                    for e in 0..n {
                        r += gamma.get(a, c, e) * gamma.get(e, d, b) - gamma.get(a, d, e) * gamma.get(e, c, b);
                    }
                    data[((a * n + b) * n + c) * n + d] = r;
                }
            }
        }
    }
    Ok(Riemann { n, data })
}

/// Sectional curvature of a coordinate plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionalSample {
    pub plane: (usize, usize),
    pub k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub point: Vec<f64>,
    pub rho: f64,
    pub ricci: Vec<Vec<f64>>,
    pub scalar: f64,
    pub einstein_residual: f64,
    /// Asymmetry of the raw Ricci matrix before symmetrization.
    pub ricci_asymmetry: f64,
    /// Largest violation of `R_abcd = -R_bacd`.
    pub pair_antisymmetry: f64,
    pub sectional_samples: Vec<SectionalSample>,
    pub fd_step: f64,
}

impl CurvatureReport {
    pub fn sectional_spread(&self) -> f64 {
        let (lo, hi) = self
            .sectional_samples
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
                (lo.min(s.k), hi.max(s.k))
            });
        hi - lo
    }

    pub fn ricci_matrix(&self) -> DMatrix<f64> {
        let n = self.ricci.len();
        DMatrix::from_fn(n, n, |i, j| self.ricci[i][j])
    }
}

/// The fixed pseudo-random set of coordinate planes used for sectional
/// samples in dimension `n`.
pub fn sample_planes(n: usize) -> Vec<(usize, usize)> {
    let mut all: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(SECTIONAL_SEED);
    all.shuffle(&mut rng);
    all.truncate(SECTIONAL_PLANES);
    all
}

/// `max |Ric - rho g| / (1 + max |g|)`.
pub fn einstein_residual(ricci: &DMatrix<f64>, g: &DMatrix<f64>, rho: f64) -> f64 {
    (ricci - g * rho).amax() / (1.0 + g.amax())
}

/// Ricci tensor, scalar curvature, Einstein residual against `rho` and
/// sectional samples at `x`.
pub fn ricci_fd<M: MetricField + ?Sized>(field: &M, x: &[f64], h: f64, rho: f64) -> Result<CurvatureReport> {
    let n = field.dim();
    let g = field.metric(x)?;
    let riem = riemann_fd(field, x, h)?;
    let raw = riem.ricci();
    let asym = (&raw - raw.transpose()).amax();
    let ricci = (&raw + raw.transpose()) * 0.5;
    let ginv = g
        .clone()
        .try_inverse()
        .unwrap_or_else(|| DMatrix::from_element(n, n, f64::NAN));
    let scalar = (&ginv * &ricci).trace();
    let low = riem.lowered(&g);
    let mut pair = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    pair = pair.max((low.get(a, b, c, d) + low.get(b, a, c, d)).abs());
                }
            }
        }
    }
    let sectional_samples = sample_planes(n)
        .into_iter()
        .map(|(a, b)| SectionalSample {
            plane: (a, b),
            k: low.get(a, b, a, b) / (g[(a, a)] * g[(b, b)] - g[(a, b)] * g[(a, b)]),
        })
        .collect();
    Ok(CurvatureReport {
        point: x.to_vec(),
        rho,
        ricci: (0..n).map(|i| (0..n).map(|j| ricci[(i, j)]).collect()).collect(),
        scalar,
        einstein_residual: einstein_residual(&ricci, &g, rho),
        ricci_asymmetry: asym,
        pair_antisymmetry: pair,
        sectional_samples,
        fd_step: h,
    })
}
