//! The warping-function ODE `2 phi phi'' + (n-3)(phi'^2 - eps) + rho phi^2 = 0`,
//! its first integral `phi'^2 = eps - rho/(n-1) phi^2 + c / phi^(n-3)`, the
//! closed-form special solutions and the pointwise curvature formulas that
//! follow from them.
//!
//! The second-order equation is the evolution law. The first integral is
//! only ever used as a conserved monitor (it has a square-root branch at
//! every turning point `phi' = 0`).

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for a user-supplied `c` against the initial data.
pub const TOL_CONSISTENCY: f64 = 1e-12;
/// Integration halts once `phi` drops to this value.
pub const PHI_FLOOR: f64 = 1e-8;
/// Below this `|phi'|` the Gauss curvature uses the removable-singularity form.
pub const TOL_TURNING: f64 = 1e-6;
pub const TOL_DRIFT: f64 = 1e-8;
pub const DEFAULT_STEP: f64 = 1e-3;

/// The data `(n, eps, rho, c)` of the warping problem plus initial values.
///
/// `eps` is the normalized Ricci curvature of the fiber. The constant
/// curvature fibers have `eps` in `{-1, 0, 1}`; products of spheres used as
/// fibers can carry any positive value, so arbitrary finite reals are
/// accepted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarpParams {
    pub n: usize,
    pub eps: f64,
    pub rho: f64,
    pub c: f64,
    pub t0: f64,
    pub phi0: f64,
    pub dphi0: f64,
}

/// One point of a solution with its derivatives up to third order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarpSample {
    pub t: f64,
    pub phi: f64,
    pub dphi: f64,
    pub d2phi: f64,
    pub d3phi: f64,
}

fn check_dimension(n: usize) -> Result<()> {
    if n < 4 {
        return Err(Error::BadDimension(n));
    }
    Ok(())
}

fn check_phi(phi: f64) -> Result<()> {
    if !(phi > 0.0) {
        return Err(Error::NonPositivePhi(phi));
    }
    Ok(())
}

/// The value of `c` that puts `(phi, dphi)` on the conserved level set.
pub fn c_from_state(n: usize, eps: f64, rho: f64, phi: f64, dphi: f64) -> Result<f64> {
    check_dimension(n)?;
    check_phi(phi)?;
    let nf = n as f64;
    Ok((dphi * dphi - eps + rho / (nf - 1.0) * phi * phi) * phi.powi(n as i32 - 3))
}

impl WarpParams {
    /// Builds parameters with `c` derived from the initial state, so the
    /// initial data lie exactly on the first-integral level set.
    pub fn from_initial(n: usize, eps: f64, rho: f64, t0: f64, phi0: f64, dphi0: f64) -> Result<Self> {
        let c = c_from_state(n, eps, rho, phi0, dphi0)?;
        Ok(Self {
            n,
            eps,
            rho,
            c,
            t0,
            phi0,
            dphi0,
        })
    }

    /// Builds parameters with an explicit `c`, validated against the initial
    /// data to `TOL_CONSISTENCY * (1 + |c|)`.
    pub fn with_c(n: usize, eps: f64, rho: f64, c: f64, t0: f64, phi0: f64, dphi0: f64) -> Result<Self> {
        let derived = c_from_state(n, eps, rho, phi0, dphi0)?;
        let tol = TOL_CONSISTENCY * (1.0 + c.abs());
        if (derived - c).abs() > tol {
            return Err(Error::Inconsistent {
                residual: (derived - c).abs(),
                tol,
            });
        }
        Ok(Self {
            n,
            eps,
            rho,
            c,
            t0,
            phi0,
            dphi0,
        })
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    /// `phi''` from the second-order equation.
    pub fn rhs_second_order(&self, phi: f64, dphi: f64) -> Result<f64> {
        check_phi(phi)?;
        Ok(self.rhs_unchecked(phi, dphi))
    }

    fn rhs_unchecked(&self, phi: f64, dphi: f64) -> f64 {
        -((self.nf() - 3.0) * (dphi * dphi - self.eps) + self.rho * phi * phi) / (2.0 * phi)
    }

    /// `phi'^2 - eps + rho/(n-1) phi^2 - c / phi^(n-3)`.
    pub fn first_integral_residual(&self, phi: f64, dphi: f64) -> Result<f64> {
        check_phi(phi)?;
        Ok(dphi * dphi - self.eps + self.rho / (self.nf() - 1.0) * phi * phi - self.c / phi.powi(self.n as i32 - 3))
    }

    /// `phi'''` obtained by differentiating the second-order equation once:
    /// `-phi' ((n-2) phi'' + rho phi) / phi`.
    pub fn third_derivative(&self, phi: f64, dphi: f64) -> Result<f64> {
        let d2 = self.rhs_second_order(phi, dphi)?;
        Ok(-dphi * ((self.nf() - 2.0) * d2 + self.rho * phi) / phi)
    }

    /// Completes `(t, phi, phi')` to a full 3-jet using the closed forms.
    pub fn sample(&self, t: f64, phi: f64, dphi: f64) -> Result<WarpSample> {
        Ok(WarpSample {
            t,
            phi,
            dphi,
            d2phi: self.rhs_second_order(phi, dphi)?,
            d3phi: self.third_derivative(phi, dphi)?,
        })
    }

    pub fn initial_sample(&self) -> Result<WarpSample> {
        self.sample(self.t0, self.phi0, self.dphi0)
    }

    /// `((n-3)/2)^(n-3)`-shaped check used by the Schwarzschild identity.
    pub fn is_schwarzschild(&self) -> bool {
        let a = (self.nf() - 3.0) / 2.0;
        let c = -a.powi(self.n as i32 - 3);
        self.rho == 0.0 && self.eps == 1.0 && (self.c - c).abs() <= 1e-12 * (1.0 + c.abs())
    }

    fn rk4_step(&self, phi: f64, dphi: f64, h: f64) -> (f64, f64) {
        let f = |p: f64, q: f64| (q, self.rhs_unchecked(p, q));
        let (k1p, k1q) = f(phi, dphi);
        let (k2p, k2q) = f(phi + 0.5 * h * k1p, dphi + 0.5 * h * k1q);
        let (k3p, k3q) = f(phi + 0.5 * h * k2p, dphi + 0.5 * h * k2q);
        let (k4p, k4q) = f(phi + h * k3p, dphi + h * k3q);
        (
            phi + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p),
            dphi + h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q),
        )
    }
}

/// Parameters of the Ricci-flat Generalized Schwarzschild warp:
/// `eps = 1, rho = 0, phi(0) = (n-3)/2, phi'(0) = 0, c = -((n-3)/2)^(n-3)`.
pub fn schwarzschild_params(n: usize) -> Result<WarpParams> {
    check_dimension(n)?;
    let a = (n as f64 - 3.0) / 2.0;
    Ok(WarpParams {
        n,
        eps: 1.0,
        rho: 0.0,
        c: -a.powi(n as i32 - 3),
        t0: 0.0,
        phi0: a,
        dphi0: 0.0,
    })
}

/// Ricci-flat warp over a fiber of normalized Ricci curvature `eps > 0`,
/// starting at its turning point with `phi(0) = (n-3)/2`.
///
/// For `eps = 1` this is [`schwarzschild_params`]. Other values rescale the
/// same metric: `sqrt(1/eps) * phi` solves the `eps = 1` problem.
pub fn ricci_flat_params(n: usize, eps: f64) -> Result<WarpParams> {
    if !(eps > 0.0) {
        return Err(Error::BadRange(format!("eps must be positive, got {eps}")));
    }
    WarpParams::from_initial(n, eps, 0.0, 0.0, (n as f64 - 3.0) / 2.0, 0.0)
}

/// The full 3-jet of `sqrt(t^2 - c)`, the general `n = 5`, `rho = 0`,
/// `eps = 1` solution.
pub fn closed_form_n5(c: f64, t: f64) -> Result<WarpSample> {
    let q = t * t - c;
    if !(q > 0.0) {
        return Err(Error::OutOfDomain {
            what: "closed form needs t^2 > c",
            value: t,
        });
    }
    let phi = q.sqrt();
    let p3 = phi * phi * phi;
    Ok(WarpSample {
        t,
        phi,
        dphi: t / phi,
        d2phi: -c / p3,
        d3phi: 3.0 * c * t / (p3 * phi * phi),
    })
}

/// Gauss curvature `K = -phi'''/phi'` of the base in the warped chart.
///
/// Near a turning point the equivalent form `((n-2) phi'' + rho phi)/phi`
/// is used; the two agree identically on solutions.
pub fn gauss_curvature_l(params: &WarpParams, s: &WarpSample) -> f64 {
    if s.dphi.abs() < TOL_TURNING {
        ((params.nf() - 2.0) * s.d2phi + params.rho * s.phi) / s.phi
    } else {
        -s.d3phi / s.dphi
    }
}

/// `1 - phi'^2 - phi''^2`; positive iff the rotation-surface profile exists.
pub fn embeddability_margin(s: &WarpSample) -> f64 {
    1.0 - s.dphi * s.dphi - s.d2phi * s.d2phi
}

/// `(phi'^2 + phi''^2) - [1 - (a/phi)^(n-3) + (a/phi)^(2(n-2))]`, `a = (n-3)/2`.
pub fn schwarzschild_identity_residual(params: &WarpParams, s: &WarpSample) -> Result<f64> {
    if !params.is_schwarzschild() {
        return Err(Error::WrongFamily(format!(
            "eps = {}, rho = {}, c = {}",
            params.eps, params.rho, params.c
        )));
    }
    let n = params.n as i32;
    let ratio = (params.nf() - 3.0) / (2.0 * s.phi);
    let rhs = 1.0 - ratio.powi(n - 3) + ratio.powi(2 * (n - 2));
    Ok(s.dphi * s.dphi + s.d2phi * s.d2phi - rhs)
}

/// Residuals of the Ricci-flat identities
/// `K = -(n-2)(n-3)c / (2 phi^(n-1))`, `Lap phi = -(n-3)c / phi^(n-2)` and
/// `Hess phi = -(n-3)c / (2 phi^(n-2)) I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fact1Residuals {
    pub curvature: f64,
    pub laplacian: f64,
    pub hessian: f64,
}

pub fn fact1_diagnostics(params: &WarpParams, s: &WarpSample) -> Result<Fact1Residuals> {
    if params.rho != 0.0 || params.eps != 1.0 {
        return Err(Error::WrongRegime);
    }
    let nf = params.nf();
    let n = params.n as i32;
    let c = params.c;
    let k = gauss_curvature_l(params, s);
    // In the chart ds^2 = dt^2 + phi'^2 du^2 the Hessian of phi(t) is phi'' I.
    let laplacian = 2.0 * s.d2phi;
    Ok(Fact1Residuals {
        curvature: k + (nf - 2.0) * (nf - 3.0) * c / (2.0 * s.phi.powi(n - 1)),
        laplacian: laplacian + (nf - 3.0) * c / s.phi.powi(n - 2),
        hessian: s.d2phi + (nf - 3.0) * c / (2.0 * s.phi.powi(n - 2)),
    })
}

/// `inf phi = (-c)^(1/(n-3))`, the value at the unique critical point.
pub fn critical_value(params: &WarpParams) -> Result<f64> {
    if params.c >= 0.0 {
        return Err(Error::WrongFamily("critical value needs c < 0".into()));
    }
    Ok((-params.c).powf(1.0 / (params.nf() - 3.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum HaltReason {
    Completed,
    PhiFloor { t: f64 },
    NonFinite { t: f64 },
}

/// A uniformly sampled trajectory with its first-integral log.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpSolution {
    pub params: WarpParams,
    pub samples: Vec<WarpSample>,
    pub step: f64,
    pub drift_log: Vec<f64>,
    pub halt: HaltReason,
}

/// Fixed-step classical RK4 on `(phi, phi')` from `t0` to `t_end`.
pub fn integrate(params: &WarpParams, t_end: f64, step: f64) -> Result<WarpSolution> {
    integrate_with_tolerance(params, t_end, step, TOL_DRIFT)
}

pub fn integrate_with_tolerance(params: &WarpParams, t_end: f64, step: f64, tol_drift: f64) -> Result<WarpSolution> {
    check_dimension(params.n)?;
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::BadRange(format!("step must be positive, got {step}")));
    }
    if !(t_end > params.t0) {
        return Err(Error::BadRange(format!(
            "t_end = {t_end} must exceed t0 = {}",
            params.t0
        )));
    }
    if params.phi0 <= PHI_FLOOR {
        return Err(Error::DomainExhausted {
            t: params.t0,
            floor: PHI_FLOOR,
        });
    }
    let steps = ((t_end - params.t0) / step).round().max(1.0) as usize;
    let h = (t_end - params.t0) / steps as f64;

    let mut samples = Vec::with_capacity(steps + 1);
    let mut drift_log = Vec::with_capacity(steps + 1);
    let (mut phi, mut dphi) = (params.phi0, params.dphi0);
    let mut halt = HaltReason::Completed;
    for k in 0..=steps {
        let t = params.t0 + k as f64 * h;
        if k > 0 {
            (phi, dphi) = params.rk4_step(phi, dphi, h);
            if !phi.is_finite() || !dphi.is_finite() {
                halt = HaltReason::NonFinite { t };
                break;
            }
            if phi <= PHI_FLOOR {
                halt = HaltReason::PhiFloor { t };
                break;
            }
        }
        let sample = params.sample(t, phi, dphi)?;
        let drift = params.first_integral_residual(phi, dphi)?;
        if drift.abs() > tol_drift {
            return Err(Error::StepTooLarge {
                drift: drift.abs(),
                tol: tol_drift,
            });
        }
        samples.push(sample);
        drift_log.push(drift);
    }
    if samples.len() < 2 {
        return Err(Error::DomainExhausted {
            t: params.t0,
            floor: PHI_FLOOR,
        });
    }
    Ok(WarpSolution {
        params: *params,
        samples,
        step: h,
        drift_log,
        halt,
    })
}

impl WarpSolution {
    pub fn t_start(&self) -> f64 {
        self.samples[0].t
    }

    pub fn t_last(&self) -> f64 {
        self.samples[self.samples.len() - 1].t
    }

    pub fn max_drift(&self) -> f64 {
        self.drift_log.iter().fold(0.0, |m, d| m.max(d.abs()))
    }

    /// State at an arbitrary `t` inside the sampled range: one RK4 step from
    /// the nearest grid node. The local error is `O(step^5)`, far below the
    /// global error of the grid itself.
    pub fn state_at(&self, t: f64) -> Result<WarpSample> {
        let (lo, hi) = (self.t_start(), self.t_last());
        let slack = 1e-12 * (1.0 + hi.abs());
        if !(t >= lo - slack && t <= hi + slack) {
            return Err(Error::OutsideDomain {
                index: 0,
                value: t,
                lo,
                hi,
            });
        }
        let k = (((t - lo) / self.step).round() as usize).min(self.samples.len() - 1);
        let node = &self.samples[k];
        let delta = t - node.t;
        if delta == 0.0 {
            return Ok(*node);
        }
        let (phi, dphi) = self.params.rk4_step(node.phi, node.dphi, delta);
        self.params.sample(t, phi, dphi)
    }

    /// CSV with header `t,phi,dphi,d2phi,d3phi,first_integral_residual`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,phi,dphi,d2phi,d3phi,first_integral_residual")?;
        for (s, d) in self.samples.iter().zip(&self.drift_log) {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                fmt17(s.t),
                fmt17(s.phi),
                fmt17(s.dphi),
                fmt17(s.d2phi),
                fmt17(s.d3phi),
                fmt17(*d)
            )?;
        }
        Ok(())
    }

    pub fn envelope(&self) -> WarpEnvelope {
        WarpEnvelope {
            params: self.params,
            step: self.step,
            samples: self.samples.len(),
            t_start: self.t_start(),
            t_last: self.t_last(),
            halt: self.halt,
            max_drift: self.max_drift(),
        }
    }
}

/// JSON summary written alongside the CSV trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarpEnvelope {
    pub params: WarpParams,
    pub step: f64,
    pub samples: usize,
    pub t_start: f64,
    pub t_last: f64,
    pub halt: HaltReason,
    pub max_drift: f64,
}

/// Decimal rendering with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// A warping function usable by charts and immersions.
#[derive(Debug, Clone)]
pub enum Warp {
    Integrated(Arc<WarpSolution>),
    /// `sqrt(t^2 - c)`.
    ClosedFormN5 {
        c: f64,
    },
    /// `sin(a t)/a`, the `c = 0`, `rho = (n-1) a^2`, `eps = 1` solution.
    Sine {
        a: f64,
    },
    /// `phi(t) = t`.
    Linear,
    Constant {
        value: f64,
    },
}

impl Warp {
    pub fn integrated(solution: WarpSolution) -> Self {
        Warp::Integrated(Arc::new(solution))
    }

    pub fn sample(&self, t: f64) -> Result<WarpSample> {
        match self {
            Warp::Integrated(sol) => sol.state_at(t),
            Warp::ClosedFormN5 { c } => closed_form_n5(*c, t),
            Warp::Sine { a } => {
                let (s, c) = (a * t).sin_cos();
                if !(s / a > 0.0) {
                    return Err(Error::NonPositivePhi(s / a));
                }
                Ok(WarpSample {
                    t,
                    phi: s / a,
                    dphi: c,
                    d2phi: -a * s,
                    d3phi: -a * a * c,
                })
            }
            Warp::Linear => {
                check_phi(t)?;
                Ok(WarpSample {
                    t,
                    phi: t,
                    dphi: 1.0,
                    d2phi: 0.0,
                    d3phi: 0.0,
                })
            }
            Warp::Constant { value } => {
                check_phi(*value)?;
                Ok(WarpSample {
                    t,
                    phi: *value,
                    dphi: 0.0,
                    d2phi: 0.0,
                    d3phi: 0.0,
                })
            }
        }
    }

    /// Open interval of `t` on which [`Warp::sample`] is defined.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            Warp::Integrated(sol) => (sol.t_start(), sol.t_last()),
            Warp::ClosedFormN5 { c } if *c > 0.0 => (c.sqrt(), f64::INFINITY),
            Warp::ClosedFormN5 { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Warp::Sine { a } => (0.0, std::f64::consts::PI / a),
            Warp::Linear => (0.0, f64::INFINITY),
            Warp::Constant { .. } => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// The ODE parameters this warp solves in dimension `n`.
    pub fn params(&self, n: usize) -> Option<WarpParams> {
        match self {
            Warp::Integrated(sol) => Some(sol.params),
            Warp::ClosedFormN5 { c } => {
                let s = closed_form_n5(*c, c.abs().sqrt() + 1.0).ok()?;
                Some(WarpParams {
                    n: 5,
                    eps: 1.0,
                    rho: 0.0,
                    c: *c,
                    t0: s.t,
                    phi0: s.phi,
                    dphi0: s.dphi,
                })
            }
            Warp::Sine { a } => Some(WarpParams {
                n,
                eps: 1.0,
                rho: (n as f64 - 1.0) * a * a,
                c: 0.0,
                t0: std::f64::consts::FRAC_PI_2 / a,
                phi0: 1.0 / a,
                dphi0: 0.0,
            }),
            Warp::Linear => Some(WarpParams {
                n,
                eps: 1.0,
                rho: 0.0,
                c: 0.0,
                t0: 1.0,
                phi0: 1.0,
                dphi0: 1.0,
            }),
            Warp::Constant { .. } => None,
        }
    }

    pub fn descriptor(&self) -> WarpDescriptor {
        match self {
            Warp::Integrated(sol) => WarpDescriptor::Integrated {
                params: sol.params,
                step: sol.step,
                t_start: sol.t_start(),
                t_last: sol.t_last(),
            },
            Warp::ClosedFormN5 { c } => WarpDescriptor::ClosedFormN5 { c: *c },
            Warp::Sine { a } => WarpDescriptor::Sine { a: *a },
            Warp::Linear => WarpDescriptor::Linear,
            Warp::Constant { value } => WarpDescriptor::Constant { value: *value },
        }
    }
}

/// Serializable description of a [`Warp`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WarpDescriptor {
    Integrated {
        params: WarpParams,
        step: f64,
        t_start: f64,
        t_last: f64,
    },
    ClosedFormN5 {
        c: f64,
    },
    Sine {
        a: f64,
    },
    Linear,
    Constant {
        value: f64,
    },
}
