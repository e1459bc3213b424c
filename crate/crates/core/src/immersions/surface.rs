use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::profile::{Profile, ProfileDescriptor};
use super::sphere::sphere_components;
use crate::error::Result;
use crate::jet::Dual2;

/// A map from the base chart `(t, u)` into Euclidean space.
#[derive(Debug, Clone)]
pub enum Surface {
    /// `(R sin t sin u, R sin t cos u, R cos t)`.
    RoundSphere { radius: f64 },
    /// `(psi, phi' sin u, phi' cos u)`, the rotation surface without its
    /// axis coordinate.
    RotationProfile(Arc<Profile>),
    /// `(psi, phi' sin u, phi' cos u, phi)`.
    ProfileGraph(Arc<Profile>),
    /// `(u, t)`.
    Plane,
    /// `(cos t sin u, cos t cos u, sin t)`.
    SphereLatitude,
    /// `(sin u, cos u, t)`.
    Cylinder,
}

impl Surface {
    pub fn ambient_dim(&self) -> usize {
        match self {
            Surface::Plane => 2,
            Surface::ProfileGraph(_) => 4,
            _ => 3,
        }
    }

    pub fn components(&self, t: &Dual2, u: &Dual2) -> Result<Vec<Dual2>> {
        Ok(match self {
            Surface::RoundSphere { radius } => sphere_components(&[t.clone(), u.clone()], *radius),
            Surface::RotationProfile(p) | Surface::ProfileGraph(p) => {
                let ([psi, d1, d2], s) = p.psi_jet(t.v)?;
                let dphi = t.compose(s.dphi, s.d2phi, s.d3phi);
                let mut out = vec![t.compose(psi, d1, d2), &dphi * &u.sin(), &dphi * &u.cos()];
                if matches!(self, Surface::ProfileGraph(_)) {
                    out.push(t.compose(s.phi, s.dphi, s.d2phi));
                }
                out
            }
            Surface::Plane => vec![u.clone(), t.clone()],
            Surface::SphereLatitude => {
                let ct = t.cos();
                vec![&ct * &u.sin(), &ct * &u.cos(), t.sin()]
            }
            Surface::Cylinder => vec![u.sin(), u.cos(), t.clone()],
        })
    }

    pub fn descriptor(&self) -> SurfaceDescriptor {
        match self {
            Surface::RoundSphere { radius } => SurfaceDescriptor::RoundSphere { radius: *radius },
            Surface::RotationProfile(p) => SurfaceDescriptor::RotationProfile {
                profile: p.descriptor(),
            },
            Surface::ProfileGraph(p) => SurfaceDescriptor::ProfileGraph {
                profile: p.descriptor(),
            },
            Surface::Plane => SurfaceDescriptor::Plane,
            Surface::SphereLatitude => SurfaceDescriptor::SphereLatitude,
            Surface::Cylinder => SurfaceDescriptor::Cylinder,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SurfaceDescriptor {
    RoundSphere { radius: f64 },
    RotationProfile { profile: ProfileDescriptor },
    ProfileGraph { profile: ProfileDescriptor },
    Plane,
    SphereLatitude,
    Cylinder,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::Jet2;
    use crate::warpfunc::Warp;

    fn jet(s: &Surface, t: f64, u: f64) -> Jet2 {
        let c = s
            .components(&Dual2::variable(t, 0, 2), &Dual2::variable(u, 1, 2))
            .unwrap();
        Jet2::from_components(&c)
    }

    #[test]
    fn latitude_metric() {
        let g = jet(&Surface::SphereLatitude, 0.4, 1.0).pullback_metric();
        let c = 0.4f64.cos();
        assert!((g[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((g[(1, 1)] - c * c).abs() < 1e-15);
        assert!(g[(0, 1)].abs() < 1e-15);
    }

    #[test]
    fn profile_graph_is_isometric_to_base() {
        let p = Arc::new(Profile::new(Warp::ClosedFormN5 { c: -1.0 }, 0.1, 3.0, 1e-3).unwrap());
        let s = Surface::ProfileGraph(p.clone());
        for t in [0.1f64, 0.77, 2.9] {
            let j = jet(&s, t, 0.6);
            let w = p.warp().sample(t).unwrap();
            let g = j.pullback_metric();
            assert!((g[(0, 0)] - 1.0).abs() < 1e-12);
            assert!((g[(1, 1)] - w.dphi * w.dphi).abs() < 1e-14);
            assert!(g[(0, 1)].abs() < 1e-14);
            assert_eq!(j.value[3], w.phi);
        }
    }
}
