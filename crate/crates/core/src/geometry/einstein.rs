//! Closed-form Einstein conditions, used as the oracle for the
//! finite-difference curvature engine.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::warpfunc::{WarpParams, WarpSample};

/// Residuals of `(n-2) Hess phi = (K - rho) phi I` and
/// `Lap phi + (n-3)/phi (|grad phi|^2 - eps) + rho phi = 0` in the warped
/// chart, where `Hess phi = phi'' I` and `Lap phi = 2 phi''`.
pub fn einstein_conditions_residual(params: &WarpParams, s: &WarpSample, k: f64) -> (f64, f64) {
    let nf = params.n as f64;
    let r1 = (nf - 2.0) * s.d2phi - (k - params.rho) * s.phi;
    let r2 = 2.0 * s.d2phi + (nf - 3.0) / s.phi * (s.dphi * s.dphi - params.eps) + params.rho * s.phi;
    (r1, r2)
}

/// Which Einstein radii to produce.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadiiFamily {
    /// `S^2(1/sqrt(rho)) x S^(n-2)(sqrt((n-3)/rho))`.
    Clifford { rho: f64 },
    /// Fiber torus `S^m(r1) x S^(n-m-2)(r2)` of normalized Ricci 1:
    /// `r1^2 = (m-1)/(n-3)`, `r2^2 = (n-m-3)/(n-3)`.
    NormalizedTorus { m: usize },
    /// Fiber torus lying in the unit sphere:
    /// `r1^2 = (m-1)/(n-4)`, `r2^2 = (n-m-3)/(n-4)`.
    UnitSphereTorus { m: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EinsteinRadii {
    /// Dimensions of the two factors.
    pub dims: (usize, usize),
    pub r1: f64,
    pub r2: f64,
}

pub fn clifford_radii(n: usize, rho: f64) -> Result<(f64, f64)> {
    if n < 4 {
        return Err(Error::BadDimension(n));
    }
    if !(rho > 0.0) {
        return Err(Error::BadRange(format!("Clifford torus needs rho > 0, got {rho}")));
    }
    Ok((1.0 / rho.sqrt(), ((n as f64 - 3.0) / rho).sqrt()))
}

pub fn einstein_radii(n: usize, family: RadiiFamily) -> Result<EinsteinRadii> {
    if n < 4 {
        return Err(Error::BadDimension(n));
    }
    let nf = n as f64;
    match family {
        RadiiFamily::Clifford { rho } => {
            let (r1, r2) = clifford_radii(n, rho)?;
            Ok(EinsteinRadii {
                dims: (2, n - 2),
                r1,
                r2,
            })
        }
        RadiiFamily::NormalizedTorus { m } | RadiiFamily::UnitSphereTorus { m } => {
            // The second factor S^(n-m-2) needs n-m-3 >= 1 for a positive
            // radius, hence m <= n-4 in both families.
            if m < 2 || m + 4 > n {
                return Err(Error::BadRange(format!(
                    "torus needs 2 <= m <= n-4, got m = {m}, n = {n}"
                )));
            }
            let denom = match family {
                RadiiFamily::NormalizedTorus { .. } => nf - 3.0,
                _ => nf - 4.0,
            };
            let mf = m as f64;
            Ok(EinsteinRadii {
                dims: (m, n - m - 2),
                r1: ((mf - 1.0) / denom).sqrt(),
                r2: ((nf - mf - 3.0) / denom).sqrt(),
            })
        }
    }
}

/// `(p-1) c1 - (n-p-1) c2` for a product `M^p_{c1} x M^(n-p)_{c2}` of space
/// forms; zero iff the product is Einstein.
pub fn product_condition(n: usize, p: usize, c1: f64, c2: f64) -> f64 {
    (p as f64 - 1.0) * c1 - (n as f64 - p as f64 - 1.0) * c2
}
