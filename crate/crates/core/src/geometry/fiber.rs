use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distance in radians from a coordinate pole below which a chart point is
/// rejected.
pub const TOL_POLE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiberKind {
    RoundSphere,
    ProductOfSpheres,
    /// Zero-dimensional fiber; the chart is the base surface alone.
    Absent,
}

/// A round sphere or a product of round spheres in hyperspherical angles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberSpec {
    pub kind: FiberKind,
    pub dims: Vec<usize>,
    pub radii: Vec<f64>,
    /// Claimed normalized Ricci curvature, if the fiber is Einstein.
    pub eps: Option<f64>,
}

impl FiberSpec {
    pub fn round_sphere(dim: usize, radius: f64) -> Result<Self> {
        if dim == 0 || !(radius > 0.0) {
            return Err(Error::BadRange(format!(
                "sphere needs dim >= 1 and radius > 0, got ({dim}, {radius})"
            )));
        }
        let mut f = Self {
            kind: FiberKind::RoundSphere,
            dims: vec![dim],
            radii: vec![radius],
            eps: None,
        };
        f.eps = f.normalized_ricci();
        Ok(f)
    }

    pub fn product(dims: [usize; 2], radii: [f64; 2]) -> Result<Self> {
        if dims.contains(&0) || radii.iter().any(|&r| !(r > 0.0)) {
            return Err(Error::BadRange(format!(
                "product factors need dim >= 1 and radius > 0, got {dims:?} {radii:?}"
            )));
        }
        let mut f = Self {
            kind: FiberKind::ProductOfSpheres,
            dims: dims.to_vec(),
            radii: radii.to_vec(),
            eps: None,
        };
        f.eps = f.normalized_ricci();
        Ok(f)
    }

    pub fn absent() -> Self {
        Self {
            kind: FiberKind::Absent,
            dims: Vec::new(),
            radii: Vec::new(),
            eps: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().sum()
    }

    /// Ricci constant `(d-1)/r^2` of each factor.
    pub fn factor_ricci(&self) -> Vec<f64> {
        self.dims
            .iter()
            .zip(&self.radii)
            .map(|(&d, &r)| (d as f64 - 1.0) / (r * r))
            .collect()
    }

    /// Normalized Ricci curvature `Ric / (dim - 1)` when every factor has the
    /// same Ricci constant, `None` otherwise.
    pub fn normalized_ricci(&self) -> Option<f64> {
        let ric = self.factor_ricci();
        let first = *ric.first()?;
        if ric.iter().all(|r| (r - first).abs() <= 1e-12 * (1.0 + first.abs())) {
            let d = self.dim() as f64;
            (d > 1.0).then(|| first / (d - 1.0))
        } else {
            None
        }
    }

    /// Metric of the fiber at the given angles.
    pub fn metric(&self, angles: &[f64]) -> Result<DMatrix<f64>> {
        let dim = self.dim();
        debug_assert_eq!(angles.len(), dim);
        let mut g = DMatrix::zeros(dim, dim);
        let mut offset = 0;
        for (&d, &r) in self.dims.iter().zip(&self.radii) {
            let a = &angles[offset..offset + d];
            let mut w = r * r;
            for i in 0..d {
                g[(offset + i, offset + i)] = w;
                if i + 1 < d {
                    let s = a[i].sin();
                    w *= s * s;
                }
            }
            offset += d;
        }
        Ok(g)
    }

    /// Rejects angles within [`TOL_POLE`] of a coordinate pole. The last
    /// angle of each factor is azimuthal and has no pole.
    pub fn check_poles(&self, angles: &[f64], chart_offset: usize) -> Result<()> {
        let mut offset = 0;
        for &d in &self.dims {
            for i in 0..d.saturating_sub(1) {
                let a = angles[offset + i];
                let s = a.sin();
                if s.abs() < TOL_POLE.sin() {
                    return Err(Error::SingularChartPoint(format!(
                        "fiber angle {} = {a} is at a pole",
                        chart_offset + offset + i
                    )));
                }
            }
            offset += d;
        }
        Ok(())
    }

    /// Indices (within the fiber) of polar angles, whose natural range is
    /// `(0, pi)`.
    pub fn polar_indices(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut offset = 0;
        for &d in &self.dims {
            out.extend(offset..offset + d - 1);
            offset += d;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_sphere_ricci() {
        let f = FiberSpec::round_sphere(3, 2f64.sqrt()).unwrap();
        assert!((f.normalized_ricci().unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(f.dim(), 3);
    }

    #[test]
    fn product_einstein_law() {
        // S^2(r1) x S^3(r2) is Einstein iff 1/r1^2 = 2/r2^2.
        let f = FiberSpec::product([2, 3], [1.0, 2f64.sqrt()]).unwrap();
        assert!(f.eps.is_some());
        let g = FiberSpec::product([2, 3], [1.0, 1.05 * 2f64.sqrt()]).unwrap();
        assert!(g.eps.is_none());
    }

    #[test]
    fn hyperspherical_metric() {
        let f = FiberSpec::round_sphere(3, 2.0).unwrap();
        let g = f.metric(&[0.5, 1.0, 0.3]).unwrap();
        let s0 = 0.5f64.sin();
        let s1 = 1.0f64.sin();
        assert!((g[(0, 0)] - 4.0).abs() < 1e-15);
        assert!((g[(1, 1)] - 4.0 * s0 * s0).abs() < 1e-15);
        assert!((g[(2, 2)] - 4.0 * s0 * s0 * s1 * s1).abs() < 1e-15);
    }

    #[test]
    fn poles_rejected() {
        let f = FiberSpec::round_sphere(2, 1.0).unwrap();
        assert!(f.check_poles(&[1e-4, 0.0], 2).is_err());
        assert!(f.check_poles(&[std::f64::consts::PI - 1e-4, 0.0], 2).is_err());
        assert!(f.check_poles(&[0.5, 0.0], 2).is_ok());
        let c = FiberSpec::round_sphere(1, 1.0).unwrap();
        assert!(c.check_poles(&[0.0], 2).is_ok());
    }

    #[test]
    fn absent_fiber() {
        let f = FiberSpec::absent();
        assert_eq!(f.dim(), 0);
        assert_eq!(f.normalized_ricci(), None);
        assert_eq!(f.metric(&[]).unwrap().nrows(), 0);
    }
}
