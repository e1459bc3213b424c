use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::fiber::FiberSpec;
use crate::error::{Error, Result};
use crate::warpfunc::{Warp, WarpDescriptor};

/// Anything that yields a Riemannian metric in a fixed coordinate system.
pub trait MetricField {
    fn dim(&self) -> usize;
    fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>>;
}

/// Metric of the two-dimensional base `L^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaseKind {
    /// `dt^2 + phi'(t)^2 du^2`.
    WarpedCoords,
    /// Round sphere `R^2 (d theta^2 + sin^2 theta d u^2)`.
    RoundBase { radius: f64 },
    /// Euclidean `dt^2 + du^2`.
    FlatBase,
}

/// Smallest admissible `|phi'|` on a warped chart; below it `g_uu` degenerates.
const MIN_DPHI: f64 = 1e-8;

/// Chart `(t, u, fiber angles...)` on `L^2 x_phi F^(n-2)`.
#[derive(Debug, Clone)]
pub struct ChartSpec {
    pub warp: Warp,
    pub fiber: FiberSpec,
    pub base: BaseKind,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ChartSpec {
    /// Chart on `[t_lo, t_hi] x [u_lo, u_hi] x (fiber angles)`.
    pub fn new(warp: Warp, fiber: FiberSpec, base: BaseKind, t_range: (f64, f64), u_range: (f64, f64)) -> Result<Self> {
        if !(t_range.0 < t_range.1) || !(u_range.0 < u_range.1) {
            return Err(Error::BadRange(format!("empty base box {t_range:?} x {u_range:?}")));
        }
        let (wlo, whi) = warp.domain();
        if matches!(base, BaseKind::WarpedCoords | BaseKind::FlatBase) && (t_range.0 < wlo || t_range.1 > whi) {
            return Err(Error::BadRange(format!(
                "t range {t_range:?} exceeds warp domain ({wlo}, {whi})"
            )));
        }
        let fdim = fiber.dim();
        let polar = fiber.polar_indices();
        let mut lower = vec![t_range.0, u_range.0];
        let mut upper = vec![t_range.1, u_range.1];
        for i in 0..fdim {
            if polar.contains(&i) {
                lower.push(0.0);
                upper.push(PI);
            } else {
                lower.push(-PI);
                upper.push(PI);
            }
        }
        Ok(Self {
            warp,
            fiber,
            base,
            lower,
            upper,
        })
    }

    /// `S^2(1/sqrt(rho)) x S^(n-2)(sqrt((n-3)/rho))` as a product chart with a
    /// constant unit warp.
    pub fn clifford(n: usize, rho: f64) -> Result<Self> {
        let radii = super::einstein::clifford_radii(n, rho)?;
        Self::clifford_with_radii(n, radii.0, radii.1)
    }

    /// Product chart `S^2(r1) x S^(n-2)(r2)`, Einstein only for the Clifford
    /// radii.
    pub fn clifford_with_radii(n: usize, r1: f64, r2: f64) -> Result<Self> {
        let fiber = FiberSpec::round_sphere(n - 2, r2)?;
        Self::new(
            Warp::Constant { value: 1.0 },
            fiber,
            BaseKind::RoundBase { radius: r1 },
            (0.0, PI),
            (-PI, PI),
        )
    }

    pub fn dim(&self) -> usize {
        2 + self.fiber.dim()
    }

    /// Rejects points outside the box or at a fiber coordinate pole.
    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        self.check_box(x)?;
        self.fiber.check_poles(&x[2..], 2)
    }

    fn check_box(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::BadRange(format!(
                "point has {} coordinates, chart has {}",
                x.len(),
                self.dim()
            )));
        }
        for (i, &v) in x.iter().enumerate() {
            if !(v >= self.lower[i] && v <= self.upper[i]) {
                return Err(Error::OutsideDomain {
                    index: i,
                    value: v,
                    lo: self.lower[i],
                    hi: self.upper[i],
                });
            }
        }
        Ok(())
    }

    /// The chart metric at `x`.
    pub fn metric_at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point(x)?;
        let n = self.dim();
        let mut g = DMatrix::zeros(n, n);
        let t = x[0];
        let phi = match self.base {
            BaseKind::WarpedCoords => {
                let s = self.warp.sample(t)?;
                if s.dphi.abs() < MIN_DPHI {
                    return Err(Error::SingularChartPoint(format!(
                        "phi'({t}) = {} degenerates the base metric",
                        s.dphi
                    )));
                }
                g[(0, 0)] = 1.0;
                g[(1, 1)] = s.dphi * s.dphi;
                s.phi
            }
            BaseKind::RoundBase { radius } => {
                let st = t.sin();
                if st.abs() < super::fiber::TOL_POLE.sin() {
                    return Err(Error::SingularChartPoint(format!("base angle {t} is at a pole")));
                }
                g[(0, 0)] = radius * radius;
                g[(1, 1)] = radius * radius * st * st;
                self.warp.sample(t)?.phi
            }
            BaseKind::FlatBase => {
                g[(0, 0)] = 1.0;
                g[(1, 1)] = 1.0;
                self.warp.sample(t)?.phi
            }
        };
        let gf = self.fiber.metric(&x[2..])?;
        let p2 = phi * phi;
        for i in 0..gf.nrows() {
            for j in 0..gf.ncols() {
                g[(2 + i, 2 + j)] = p2 * gf[(i, j)];
            }
        }
        Ok(g)
    }

    /// Deterministic interior sample points, away from coordinate poles and
    /// at relative distance `margin` from the ends of the base box.
    pub fn sample_points(&self, count: usize, seed: u64, margin: f64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let polar = self.fiber.polar_indices();
        (0..count)
            .map(|_| {
                (0..self.dim())
                    .map(|i| {
                        let polar_like = (i >= 2 && polar.contains(&(i - 2)))
                            || (i == 0 && matches!(self.base, BaseKind::RoundBase { .. }));
                        let (lo, hi) = if polar_like {
                            (0.25 * PI, 0.75 * PI)
                        } else {
                            let w = self.upper[i] - self.lower[i];
                            (self.lower[i] + margin * w, self.upper[i] - margin * w)
                        };
                        rng.random_range(lo..=hi)
                    })
                    .collect()
            })
            .collect()
    }

    pub fn descriptor(&self) -> ChartDescriptor {
        ChartDescriptor {
            warp: self.warp.descriptor(),
            fiber: self.fiber.clone(),
            base: self.base,
            lower: self.lower.clone(),
            upper: self.upper.clone(),
        }
    }
}

impl MetricField for ChartSpec {
    fn dim(&self) -> usize {
        ChartSpec::dim(self)
    }

    fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.metric_at(x)
    }
}

/// Serializable view of a [`ChartSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartDescriptor {
    pub warp: WarpDescriptor,
    pub fiber: FiberSpec,
    pub base: BaseKind,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::warpfunc::{integrate, schwarzschild_params};

    #[test]
    fn schwarzschild_origin_is_singular() {
        let sol = integrate(&schwarzschild_params(5).unwrap(), 3.0, 1e-3).unwrap();
        let fiber = FiberSpec::round_sphere(3, 1.0).unwrap();
        let chart = ChartSpec::new(
            Warp::integrated(sol),
            fiber,
            BaseKind::WarpedCoords,
            (0.0, 3.0),
            (-PI, PI),
        )
        .unwrap();
        let err = chart.metric_at(&[0.0, 0.0, 1.0, 1.0, 0.0]);
        assert!(matches!(err, Err(Error::SingularChartPoint(_))));
        let g = chart.metric_at(&[1.0, 0.0, 1.0, 1.0, 0.0]).unwrap();
        assert_eq!(g[(0, 0)], 1.0);
        assert_eq!(g[(0, 1)], 0.0);
    }

    #[test]
    fn clifford_blocks() {
        let chart = ChartSpec::clifford(5, 1.0).unwrap();
        let x = [1.0, 0.2, 0.7, 1.3, 0.4];
        let g = chart.metric_at(&x).unwrap();
        let s = 1.0f64.sin();
        assert!((g[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((g[(1, 1)] - s * s).abs() < 1e-15);
        assert!((g[(2, 2)] - 2.0).abs() < 1e-15);
        let s7 = 0.7f64.sin();
        assert!((g[(3, 3)] - 2.0 * s7 * s7).abs() < 1e-14);
        assert_eq!(g[(0, 2)], 0.0);
    }

    #[test]
    fn flat_base_linear_warp() {
        let fiber = FiberSpec::product([2, 1], [(1.0f64 / 3.0).sqrt(), 1.0]).unwrap();
        let chart = ChartSpec::new(Warp::Linear, fiber, BaseKind::FlatBase, (0.5, 2.0), (-1.0, 1.0)).unwrap();
        let g = chart.metric_at(&[1.5, 0.0, 1.0, 0.3, 0.2]).unwrap();
        assert_eq!(g[(0, 0)], 1.0);
        assert_eq!(g[(1, 1)], 1.0);
        assert!((g[(2, 2)] - 2.25 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn outside_domain_rejected() {
        let chart = ChartSpec::clifford(5, 1.0).unwrap();
        assert!(matches!(
            chart.metric_at(&[1.0, 4.0, 0.7, 1.3, 0.4]),
            Err(Error::OutsideDomain { index: 1, .. })
        ));
    }

    #[test]
    fn sample_points_are_deterministic() {
        let chart = ChartSpec::clifford(6, 2.0).unwrap();
        let a = chart.sample_points(5, 42, 0.1);
        let b = chart.sample_points(5, 42, 0.1);
        assert_eq!(a, b);
        for p in &a {
            assert!(chart.metric_at(p).is_ok());
        }
    }
}
