//! The rotation surface `g(t, theta) = (psi, phi' sin theta, phi' cos theta, phi)`
//! with `psi'^2 = 1 - phi'^2 - phi''^2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::warpfunc::{embeddability_margin, Warp, WarpDescriptor, WarpSample};

/// Negative margins above `-TOL_MARGIN` are treated as zero.
pub const TOL_MARGIN: f64 = 1e-10;

/// Default lower end of the profile range; the Schwarzschild margin
/// vanishes at `t = 0`.
pub const DEFAULT_T_MIN: f64 = 0.1;

/// `psi` tabulated by composite Simpson quadrature of `sqrt(margin)`.
#[derive(Debug, Clone)]
pub struct Profile {
    warp: Warp,
    step: f64,
    nodes: Vec<f64>,
    psi: Vec<f64>,
    min_margin: f64,
    boundary_margin: f64,
}

fn speed(s: &WarpSample) -> Result<f64> {
    let m = embeddability_margin(s);
    if m < -TOL_MARGIN {
        return Err(Error::MarginViolated { t: s.t, margin: m });
    }
    Ok(m.max(0.0).sqrt())
}

impl Profile {
    /// Tabulates `psi` on `[t_min, t_max]` with `psi(t_min) = 0`.
    pub fn new(warp: Warp, t_min: f64, t_max: f64, step: f64) -> Result<Self> {
        if !(t_min < t_max) || !(step > 0.0) {
            return Err(Error::BadRange(format!(
                "profile range [{t_min}, {t_max}] with step {step}"
            )));
        }
        let (lo, hi) = warp.domain();
        if t_min < lo || t_max > hi {
            return Err(Error::BadRange(format!(
                "profile range [{t_min}, {t_max}] exceeds warp domain ({lo}, {hi})"
            )));
        }
        let count = ((t_max - t_min) / step).ceil() as usize;
        let mut nodes: Vec<f64> = (0..count).map(|k| t_min + k as f64 * step).collect();
        nodes.push(t_max);
        let first = warp.sample(t_min)?;
        let boundary_margin = embeddability_margin(&first);
        let mut min_margin = boundary_margin;
        let mut psi = vec![0.0];
        let mut f_lo = speed(&first)?;
        for w in nodes.windows(2) {
            let (a, b) = (w[0], w[1]);
            let sm = warp.sample(0.5 * (a + b))?;
            let sb = warp.sample(b)?;
            min_margin = min_margin.min(embeddability_margin(&sm)).min(embeddability_margin(&sb));
            let (f_mid, f_hi) = (speed(&sm)?, speed(&sb)?);
            let last = psi[psi.len() - 1];
            psi.push(last + (b - a) / 6.0 * (f_lo + 4.0 * f_mid + f_hi));
            f_lo = f_hi;
        }
        Ok(Self {
            warp,
            step,
            nodes,
            psi,
            min_margin,
            boundary_margin,
        })
    }

    /// Profile over the integrated range of `warp` clipped below at `t_min`,
    /// on the warp's own grid when it has one.
    pub fn over_warp(warp: Warp, t_min: f64) -> Result<Self> {
        let (_, hi) = warp.domain();
        let step = match &warp {
            Warp::Integrated(sol) => sol.step,
            _ => crate::warpfunc::DEFAULT_STEP,
        };
        Self::new(warp, t_min, hi, step)
    }

    pub fn warp(&self) -> &Warp {
        &self.warp
    }

    pub fn range(&self) -> (f64, f64) {
        (self.nodes[0], self.nodes[self.nodes.len() - 1])
    }

    pub fn min_margin(&self) -> f64 {
        self.min_margin
    }

    /// Margin at `t_min`, exported as a boundary diagnostic.
    pub fn boundary_margin(&self) -> f64 {
        self.boundary_margin
    }

    /// `(psi, psi', psi'')` together with the warp sample at `t`.
    pub fn psi_jet(&self, t: f64) -> Result<([f64; 3], WarpSample)> {
        let (lo, hi) = self.range();
        let slack = 1e-12 * (1.0 + hi.abs());
        if !(t >= lo - slack && t <= hi + slack) {
            return Err(Error::OutsideDomain {
                index: 0,
                value: t,
                lo,
                hi,
            });
        }
        let k = (((t - lo) / self.step).floor().max(0.0) as usize).min(self.nodes.len() - 2);
        let a = self.nodes[k];
        let s = self.warp.sample(t)?;
        let d1 = speed(&s)?;
        let psi = if t == a {
            self.psi[k]
        } else {
            let sa = self.warp.sample(a)?;
            let sm = self.warp.sample(0.5 * (a + t))?;
            self.psi[k] + (t - a) / 6.0 * (speed(&sa)? + 4.0 * speed(&sm)? + d1)
        };
        let d2 = if d1 > 0.0 {
            -(s.dphi * s.d2phi + s.d2phi * s.d3phi) / d1
        } else {
            0.0
        };
        Ok(([psi, d1, d2], s))
    }

    pub fn descriptor(&self) -> ProfileDescriptor {
        let (t_min, t_max) = self.range();
        ProfileDescriptor {
            warp: self.warp.descriptor(),
            t_min,
            t_max,
            step: self.step,
            min_margin: self.min_margin,
            boundary_margin: self.boundary_margin,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileDescriptor {
    pub warp: WarpDescriptor,
    pub t_min: f64,
    pub t_max: f64,
    pub step: f64,
    pub min_margin: f64,
    pub boundary_margin: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::warpfunc::{integrate, schwarzschild_params};

    #[test]
    fn schwarzschild_boundary_margin_vanishes() {
        let p = Profile::new(Warp::ClosedFormN5 { c: -1.0 }, 0.0, 1.0, 1e-2).unwrap();
        assert!(p.boundary_margin().abs() < 1e-15);
        assert!(p.min_margin() >= 0.0);
    }

    #[test]
    fn psi_matches_fine_quadrature() {
        // psi' = sqrt(1 - t^2/(t^2+1) - 1/(t^2+1)^3) for phi = sqrt(t^2+1).
        let p = Profile::new(Warp::ClosedFormN5 { c: -1.0 }, 0.1, 2.0, 1e-3).unwrap();
        let f = |t: f64| {
            let q = t * t + 1.0;
            (1.0 - t * t / q - 1.0 / (q * q * q)).sqrt()
        };
        let n = 200_000;
        let h = 1.2 / n as f64;
        let mut reference = 0.0;
        for k in 0..n {
            let a = 0.1 + k as f64 * h;
            reference += h / 6.0 * (f(a) + 4.0 * f(a + 0.5 * h) + f(a + h));
        }
        let (j, _) = p.psi_jet(1.3).unwrap();
        assert!((j[0] - reference).abs() < 1e-12);
        assert!((j[1] - f(1.3)).abs() < 1e-15);
    }

    #[test]
    fn psi_second_derivative_by_differences() {
        let sol = integrate(&schwarzschild_params(6).unwrap(), 3.0, 1e-3).unwrap();
        let p = Profile::over_warp(Warp::integrated(sol), DEFAULT_T_MIN).unwrap();
        let h = 1e-4;
        for t in [0.5f64, 1.2, 2.3] {
            let (j, _) = p.psi_jet(t).unwrap();
            let (jp, _) = p.psi_jet(t + h).unwrap();
            let (jm, _) = p.psi_jet(t - h).unwrap();
            assert!(((jp[0] - jm[0]) / (2.0 * h) - j[1]).abs() < 1e-8);
            assert!(((jp[1] - jm[1]) / (2.0 * h) - j[2]).abs() < 1e-6);
        }
    }

    #[test]
    fn margin_violation_is_reported() {
        // phi = sin(2t)/2 has phi'^2 + phi''^2 = cos^2 + 4 sin^2 > 1 away from 0.
        let err = Profile::new(Warp::Sine { a: 2.0 }, 0.2, 1.0, 1e-2);
        assert!(matches!(err, Err(Error::MarginViolated { .. })));
    }
}
