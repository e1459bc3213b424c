use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::profile::{Profile, DEFAULT_T_MIN};
use super::sphere::FiberEmbedding;
use super::surface::{Surface, SurfaceDescriptor};
use crate::error::{Error, Result};
use crate::geometry::{einstein_radii, BaseKind, ChartDescriptor, ChartSpec, FiberSpec, MetricField, RadiiFamily};
use crate::jet::{Dual2, Jet2};
use crate::warpfunc::{integrate, ricci_flat_params, Warp, WarpParams};

/// Pullback tolerance for analytic jets.
pub const TOL_PULLBACK_ANALYTIC: f64 = 1e-8;
/// Pullback tolerance where `psi` comes from quadrature.
pub const TOL_PULLBACK_QUADRATURE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImmersionKind {
    Clifford,
    Rotational,
    Schwarzschild,
    ProfileSurface1b,
    WarpedComposite,
    ExtraCodimExample,
}

#[derive(Debug, Clone)]
enum Construction {
    /// `f(t, u, y) = (h(t, u), phi(t) j(y))`.
    Rotational { surface: Surface, fiber: FiberEmbedding },
    /// `f(x, y) = (h1(x) off e, s <h1(x), e> h2(y))`.
    Composite {
        surface: Surface,
        e: DVector<f64>,
        /// Rows form an orthonormal basis of `e^perp`.
        perp: DMatrix<f64>,
        fiber: FiberEmbedding,
        scale: f64,
    },
}

/// An immersion of a chart into `R^N`, evaluable to second order.
#[derive(Debug, Clone)]
pub struct ImmersionSpec {
    pub kind: ImmersionKind,
    pub chart: ChartSpec,
    pub ambient_dim: usize,
    construction: Construction,
}

fn lin_comb(coeffs: impl Iterator<Item = f64>, comps: &[Dual2]) -> Dual2 {
    let dim = comps[0].dim();
    comps
        .iter()
        .zip(coeffs)
        .fold(Dual2::constant(0.0, dim), |acc, (c, k)| &acc + &c.scale(k))
}

/// Orthonormal basis of the complement of the unit vector `e`, from
/// Gram-Schmidt on the coordinate axes.
fn complement_basis(e: &DVector<f64>) -> DMatrix<f64> {
    let dim = e.len();
    let mut basis: Vec<DVector<f64>> = vec![e.clone()];
    for k in 0..dim {
        let mut v = DVector::zeros(dim);
        v[k] = 1.0;
        for b in &basis {
            v -= b * b.dot(&v);
        }
        let nrm = v.norm();
        if nrm > 1e-8 {
            basis.push(v / nrm);
        }
        if basis.len() == dim {
            break;
        }
    }
    DMatrix::from_fn(dim - 1, dim, |i, j| basis[i + 1][j])
}

impl ImmersionSpec {
    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    /// Calibrated scale of a composite, `None` otherwise.
    pub fn scale(&self) -> Option<f64> {
        match &self.construction {
            Construction::Composite { scale, .. } => Some(*scale),
            _ => None,
        }
    }

    /// Index of the first fiber-block coordinate in `R^N`.
    pub fn fiber_block_start(&self) -> usize {
        match &self.construction {
            Construction::Rotational { surface, .. } => surface.ambient_dim(),
            Construction::Composite { perp, .. } => perp.nrows(),
        }
    }

    fn components(&self, x: &[f64]) -> Result<Vec<Dual2>> {
        self.chart.check_point(x)?;
        self.components_unchecked(x)
    }

    /// Image of `x` without the chart admissibility check, so that
    /// coordinate poles can be evaluated.
    pub fn point_unchecked(&self, x: &[f64]) -> Result<DVector<f64>> {
        Ok(Jet2::from_components(&self.components_unchecked(x)?).value)
    }

    fn components_unchecked(&self, x: &[f64]) -> Result<Vec<Dual2>> {
        let n = x.len();
        let vars: Vec<Dual2> = x.iter().enumerate().map(|(i, &v)| Dual2::variable(v, i, n)).collect();
        match &self.construction {
            Construction::Rotational { surface, fiber } => {
                let mut out = surface.components(&vars[0], &vars[1])?;
                if fiber.ambient_dim() > 0 {
                    let s = self.chart.warp.sample(x[0])?;
                    let phi = vars[0].compose(s.phi, s.dphi, s.d2phi);
                    out.extend(fiber.components(&vars[2..], n).iter().map(|c| &phi * c));
                }
                Ok(out)
            }
            Construction::Composite {
                surface,
                e,
                perp,
                fiber,
                scale,
            } => {
                let h1 = surface.components(&vars[0], &vars[1])?;
                let sigma = lin_comb(e.iter().copied(), &h1);
                if !(sigma.v > 0.0) {
                    return Err(Error::NonPositiveWarp(sigma.v));
                }
                let mut out: Vec<Dual2> = perp.row_iter().map(|row| lin_comb(row.iter().copied(), &h1)).collect();
                let w = sigma.scale(*scale);
                out.extend(fiber.components(&vars[2..], n).iter().map(|c| &w * c));
                Ok(out)
            }
        }
    }

    /// Value, first and second partials at `x`.
    pub fn jet(&self, x: &[f64]) -> Result<Jet2> {
        Ok(Jet2::from_components(&self.components(x)?))
    }

    pub fn point(&self, x: &[f64]) -> Result<DVector<f64>> {
        Ok(self.jet(x)?.value)
    }

    /// `|| J^T J - metric_at ||_inf` at `x`.
    pub fn pullback_error(&self, x: &[f64]) -> Result<f64> {
        let j = self.jet(x)?;
        Ok((j.pullback_metric() - self.chart.metric_at(x)?).amax())
    }

    pub fn max_pullback_error(&self, points: &[Vec<f64>]) -> Result<f64> {
        points
            .iter()
            .try_fold(0.0f64, |m, p| Ok(m.max(self.pullback_error(p)?)))
    }

    /// The pullback tolerance appropriate to this construction.
    pub fn pullback_tolerance(&self) -> f64 {
        let quadrature = match &self.construction {
            Construction::Rotational { surface, .. } | Construction::Composite { surface, .. } => {
                matches!(surface, Surface::RotationProfile(_) | Surface::ProfileGraph(_))
            }
        };
        if quadrature {
            TOL_PULLBACK_QUADRATURE
        } else {
            TOL_PULLBACK_ANALYTIC
        }
    }

    /// Largest difference between the jet and central differences of the
    /// map with step `h`.
    pub fn jet_difference_error(&self, x: &[f64], h: f64) -> Result<f64> {
        let j = self.jet(x)?;
        let n = x.len();
        let at = |dx: &[(usize, f64)]| -> Result<DVector<f64>> {
            let mut y = x.to_vec();
            for &(i, d) in dx {
                y[i] += d;
            }
            self.point(&y)
        };
        let mut err = 0.0f64;
        for i in 0..n {
            let d1 = (at(&[(i, h)])? - at(&[(i, -h)])?) / (2.0 * h);
            err = err.max((d1 - j.first.column(i)).amax());
            for k in i..n {
                let d2 = if i == k {
                    (at(&[(i, h)])? - &j.value * 2.0 + at(&[(i, -h)])?) / (h * h)
                } else {
                    (at(&[(i, h), (k, h)])? - at(&[(i, h), (k, -h)])? - at(&[(i, -h), (k, h)])?
                        + at(&[(i, -h), (k, -h)])?)
                        / (4.0 * h * h)
                };
                err = err.max((d2 - j.d2(i, k)).amax());
            }
        }
        Ok(err)
    }

    /// A deterministic interior reference point: box center with polar
    /// angles at `pi/2` and azimuths at `0`.
    pub fn reference_point(&self) -> Vec<f64> {
        reference_point(&self.chart)
    }

    pub fn descriptor(&self) -> ImmersionDescriptor {
        let n = self.dim();
        let (surface, fiber, e, scale) = match &self.construction {
            Construction::Rotational { surface, fiber } => (surface, fiber, None, None),
            Construction::Composite {
                surface,
                e,
                fiber,
                scale,
                ..
            } => (surface, fiber, Some(e.iter().copied().collect()), Some(*scale)),
        };
        ImmersionDescriptor {
            kind: self.kind,
            n,
            ambient_dim: self.ambient_dim,
            chart: self.chart.descriptor(),
            warp_params: self.chart.warp.params(n),
            surface: surface.descriptor(),
            fiber_embedding: (fiber.ambient_dim() > 0).then(|| fiber.clone()),
            splitting_vector: e,
            scale,
        }
    }
}

fn reference_point(chart: &ChartSpec) -> Vec<f64> {
    let polar = chart.fiber.polar_indices();
    (0..chart.dim())
        .map(|i| {
            if i >= 2 && polar.contains(&(i - 2)) {
                FRAC_PI_2
            } else if i >= 2 {
                0.0
            } else {
                0.5 * (chart.lower[i] + chart.upper[i])
            }
        })
        .collect()
}

/// Metric field induced by an immersion.
pub struct Pullback<'a>(pub &'a ImmersionSpec);

impl MetricField for Pullback<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        Ok(self.0.jet(x)?.pullback_metric())
    }
}

/// JSON view of an [`ImmersionSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImmersionDescriptor {
    pub kind: ImmersionKind,
    pub n: usize,
    pub ambient_dim: usize,
    pub chart: ChartDescriptor,
    pub warp_params: Option<WarpParams>,
    pub surface: SurfaceDescriptor,
    pub fiber_embedding: Option<FiberEmbedding>,
    pub splitting_vector: Option<Vec<f64>>,
    pub scale: Option<f64>,
}

/// `S^2(1/sqrt(rho)) x S^(n-2)(sqrt((n-3)/rho))` in `R^3 x R^(n-1)`.
pub fn clifford_immersion(n: usize, rho: f64) -> Result<ImmersionSpec> {
    let (r1, r2) = crate::geometry::clifford_radii(n, rho)?;
    clifford_immersion_with_radii(n, r1, r2)
}

/// Product of round spheres `S^2(r1) x S^(n-2)(r2)`; Einstein only for the
/// Clifford radii.
pub fn clifford_immersion_with_radii(n: usize, r1: f64, r2: f64) -> Result<ImmersionSpec> {
    if n < 4 {
        return Err(Error::BadDimension(n));
    }
    let chart = ChartSpec::clifford_with_radii(n, r1, r2)?;
    let fiber = FiberEmbedding::new(chart.fiber.clone());
    Ok(ImmersionSpec {
        kind: ImmersionKind::Clifford,
        ambient_dim: n + 2,
        chart,
        construction: Construction::Rotational {
            surface: Surface::RoundSphere { radius: r1 },
            fiber,
        },
    })
}

/// `f(t, u, y) = (h(t, u), phi(t) y)` with `y` on the unit `S^fiber_dim`.
pub fn rotational_immersion(
    surface: Surface,
    warp: Warp,
    fiber_dim: usize,
    t_range: (f64, f64),
) -> Result<ImmersionSpec> {
    let fiber = FiberSpec::round_sphere(fiber_dim, 1.0)?;
    let chart = ChartSpec::new(warp, fiber.clone(), BaseKind::WarpedCoords, t_range, (-PI, PI))?;
    Ok(ImmersionSpec {
        kind: ImmersionKind::Rotational,
        ambient_dim: surface.ambient_dim() + fiber_dim + 1,
        chart,
        construction: Construction::Rotational {
            surface,
            fiber: FiberEmbedding::new(fiber),
        },
    })
}

/// The rotation surface `g(t, theta)` of a warp on `[t_min, t_max]`.
pub fn profile_1b(warp: Warp, t_range: (f64, f64)) -> Result<Arc<Profile>> {
    let step = match &warp {
        Warp::Integrated(sol) => sol.step,
        _ => crate::warpfunc::DEFAULT_STEP,
    };
    Ok(Arc::new(Profile::new(warp, t_range.0, t_range.1, step)?))
}

/// The rotation surface as a two-dimensional immersion into `R^4`.
pub fn profile_surface_immersion(profile: Arc<Profile>) -> Result<ImmersionSpec> {
    let chart = ChartSpec::new(
        profile.warp().clone(),
        FiberSpec::absent(),
        BaseKind::WarpedCoords,
        profile.range(),
        (-PI, PI),
    )?;
    Ok(ImmersionSpec {
        kind: ImmersionKind::ProfileSurface1b,
        ambient_dim: 4,
        chart,
        construction: Construction::Rotational {
            surface: Surface::ProfileGraph(profile),
            fiber: FiberEmbedding::new(FiberSpec::absent()),
        },
    })
}

fn check_schwarzschild(n: usize, warp: &Warp) -> Result<()> {
    match warp.params(n) {
        Some(p) if p.n == n && p.is_schwarzschild() => Ok(()),
        other => Err(Error::WrongFamily(format!(
            "expected the Schwarzschild warp for n = {n}, got {other:?}"
        ))),
    }
}

/// The `(n-2)`-rotational Ricci-flat immersion `(h_0(t, theta), phi(t) y)`
/// into `R^(n+2)` over `[t_min, t_max]`.
pub fn schwarzschild_immersion(n: usize, warp: Warp, t_range: (f64, f64)) -> Result<ImmersionSpec> {
    check_schwarzschild(n, &warp)?;
    let profile = profile_1b(warp.clone(), t_range)?;
    let mut spec = rotational_immersion(Surface::RotationProfile(profile), warp, n - 2, t_range)?;
    spec.kind = ImmersionKind::Schwarzschild;
    Ok(spec)
}

/// [`schwarzschild_immersion`] over a freshly integrated warp on
/// `[DEFAULT_T_MIN, t_end]`.
pub fn schwarzschild_default(n: usize, t_end: f64, step: f64) -> Result<ImmersionSpec> {
    let sol = integrate(&crate::warpfunc::schwarzschild_params(n)?, t_end, step)?;
    let t_last = sol.t_last();
    schwarzschild_immersion(n, Warp::integrated(sol), (DEFAULT_T_MIN, t_last))
}

/// `f(x, y) = (h1(x) projected off e, s <h1(x), e> h2(y))` with `s`
/// calibrated so that the fiber block of the pullback equals
/// `phi^2 g_F` at the chart's reference point.
pub fn warped_composite(
    surface: Surface,
    e: DVector<f64>,
    fiber: FiberEmbedding,
    chart: ChartSpec,
) -> Result<ImmersionSpec> {
    if e.len() != surface.ambient_dim() || (e.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::BadRange(format!(
            "splitting vector must be a unit vector in R^{}",
            surface.ambient_dim()
        )));
    }
    if fiber.fiber.dim() != chart.fiber.dim() {
        return Err(Error::BadRange("fiber embedding does not match chart".into()));
    }
    let perp = complement_basis(&e);
    let ambient_dim = perp.nrows() + fiber.ambient_dim();
    let mut spec = ImmersionSpec {
        kind: ImmersionKind::WarpedComposite,
        ambient_dim,
        chart,
        construction: Construction::Composite {
            surface,
            e,
            perp,
            fiber,
            scale: 1.0,
        },
    };
    let x0 = spec.reference_point();
    let got = spec.jet(&x0)?.pullback_metric();
    let want = spec.chart.metric_at(&x0)?;
    let n = spec.dim();
    let tr = |m: &DMatrix<f64>| (2..n).map(|i| m[(i, i)]).sum::<f64>();
    let s = (tr(&want) / tr(&got)).sqrt();
    if let Construction::Composite { scale, .. } = &mut spec.construction {
        *scale = s;
    }
    Ok(spec)
}

/// Fiber torus `S^m(r1) x S^(n-m-2)(r2)` with `r1^2 = (m-1)/(n-3)`,
/// `r2^2 = (n-m-3)/(n-3)`, placed in the unit `S^n` by a constant
/// coordinate `sqrt(1/(n-3))`.
fn lifted_torus(n: usize, m: usize) -> Result<FiberEmbedding> {
    let r = einstein_radii(n, RadiiFamily::NormalizedTorus { m })?;
    let fiber = FiberSpec::product([r.dims.0, r.dims.1], [r.r1, r.r2])?;
    Ok(FiberEmbedding::lifted(fiber, (1.0 / (n as f64 - 3.0)).sqrt()))
}

/// Ricci-flat, non-flat example over the flat plane with `phi = t`.
pub fn example_one(n: usize, m: usize, t_range: (f64, f64)) -> Result<ImmersionSpec> {
    let fiber = lifted_torus(n, m)?;
    let chart = ChartSpec::new(
        Warp::Linear,
        fiber.fiber.clone(),
        BaseKind::FlatBase,
        t_range,
        (-1.0, 1.0),
    )?;
    warped_composite(Surface::Plane, DVector::from_vec(vec![0.0, 1.0]), fiber, chart)
}

/// Gauss curvature of the base in the second non-rotational example.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseCurvature {
    One,
    Zero,
}

/// How the fiber torus of the second example is placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TorusPlacement {
    /// In the unit `S^n` via a constant coordinate; ambient `R^(n+3)`.
    Lifted,
    /// In `S^(n-1)(sqrt((n-4)/(n-3)))`; ambient `R^(n+2)`, not isometric.
    Literal,
}

pub fn example_two(n: usize, m: usize, curvature: BaseCurvature, placement: TorusPlacement) -> Result<ImmersionSpec> {
    let fiber = match placement {
        TorusPlacement::Lifted => lifted_torus(n, m)?,
        TorusPlacement::Literal => FiberEmbedding::new(lifted_torus(n, m)?.fiber),
    };
    let (surface, warp, t_range) = match curvature {
        BaseCurvature::One => (Surface::SphereLatitude, Warp::Sine { a: 1.0 }, (0.2, 1.3)),
        BaseCurvature::Zero => (Surface::Cylinder, Warp::Linear, (0.5, 2.0)),
    };
    let chart = ChartSpec::new(warp, fiber.fiber.clone(), BaseKind::WarpedCoords, t_range, (-PI, PI))?;
    warped_composite(surface, DVector::from_vec(vec![0.0, 0.0, 1.0]), fiber, chart)
}

/// Warp parameters of the codimension-three example: Ricci flat over a
/// fiber of normalized Ricci curvature `(n-4)/(n-3)`.
pub fn extra_codim_params(n: usize) -> Result<WarpParams> {
    if n < 6 {
        return Err(Error::BadDimension(n));
    }
    ricci_flat_params(n, (n as f64 - 4.0) / (n as f64 - 3.0))
}

/// `(h(t, theta), phi(t) j(y))` into `R^(n+3)` with `j` the torus
/// `S^m(r1) x S^(n-m-2)(r2) ⊂ S^(n-1)(1)`, `r1^2 = (m-1)/(n-4)`,
/// `r2^2 = (n-m-3)/(n-4)`.
pub fn extra_codim_example(n: usize, m: usize, warp: Warp, t_range: (f64, f64)) -> Result<ImmersionSpec> {
    let r = einstein_radii(n, RadiiFamily::UnitSphereTorus { m })?;
    let fiber = FiberSpec::product([r.dims.0, r.dims.1], [r.r1, r.r2])?;
    let profile = profile_1b(warp.clone(), t_range)?;
    let chart = ChartSpec::new(warp, fiber.clone(), BaseKind::WarpedCoords, t_range, (-PI, PI))?;
    Ok(ImmersionSpec {
        kind: ImmersionKind::ExtraCodimExample,
        ambient_dim: n + 3,
        chart,
        construction: Construction::Rotational {
            surface: Surface::RotationProfile(profile),
            fiber: FiberEmbedding::new(fiber),
        },
    })
}

/// [`extra_codim_example`] over a freshly integrated warp.
pub fn extra_codim_default(n: usize, m: usize, t_end: f64, step: f64) -> Result<ImmersionSpec> {
    let sol = integrate(&extra_codim_params(n)?, t_end, step)?;
    let t_last = sol.t_last();
    extra_codim_example(n, m, Warp::integrated(sol), (DEFAULT_T_MIN, t_last))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clifford_north_poles() {
        let f = clifford_immersion(5, 1.0).unwrap();
        // Both spheres at their north poles; t = 0 is a chart pole so only
        // the map itself is evaluated.
        let c = f.point_unchecked(&[0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let want = [0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2f64.sqrt()];
        for (a, b) in c.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn complement_of_axis_drops_coordinate() {
        let p = complement_basis(&DVector::from_vec(vec![0.0, 0.0, 1.0]));
        assert_eq!(p, DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]));
        let e = DVector::from_vec(vec![0.6, 0.8]);
        let q = complement_basis(&e);
        assert!((q.row(0).transpose().dot(&e)).abs() < 1e-15);
    }

    #[test]
    fn composite_scale_is_one_for_lifted_examples() {
        for spec in [
            example_one(7, 2, (0.5, 2.0)).unwrap(),
            example_two(7, 2, BaseCurvature::One, TorusPlacement::Lifted).unwrap(),
            example_two(6, 2, BaseCurvature::Zero, TorusPlacement::Lifted).unwrap(),
        ] {
            assert!((spec.scale().unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn non_positive_warp_rejected() {
        let spec = example_two(6, 2, BaseCurvature::Zero, TorusPlacement::Lifted).unwrap();
        let mut chart = spec.chart.clone();
        chart.lower[0] = -1.0;
        let bad = ImmersionSpec { chart, ..spec };
        assert!(matches!(
            bad.jet(&[-0.5, 0.0, 1.0, 0.0, 1.0, 0.0]),
            Err(Error::NonPositiveWarp(_))
        ));
    }
}
