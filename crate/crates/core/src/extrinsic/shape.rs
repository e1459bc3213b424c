use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::frames::FrameData;
use crate::error::{Error, Result};
use crate::jet::Jet2;
use crate::warpfunc::WarpSample;

/// `1 - phi'^2` below this makes the profile normal `delta` degenerate.
pub const TOL_DELTA: f64 = 1e-8;

/// Second fundamental form in an orthonormal tangent frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeOperatorSet {
    /// `ops[a]` is the shape operator `A_a` of the `a`-th normal.
    pub ops: Vec<DMatrix<f64>>,
    /// `alpha[i][j]` holds the normal components of `alpha(e_i, e_j)`.
    pub alpha: Vec<Vec<DVector<f64>>>,
    /// Normal components of `H = (1/n) tr alpha`.
    pub mean: DVector<f64>,
}

impl ShapeOperatorSet {
    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn codim(&self) -> usize {
        self.ops.len()
    }

    /// Builds the set from the frame-components of `alpha`.
    pub fn from_alpha(alpha: Vec<Vec<DVector<f64>>>) -> Self {
        let n = alpha.len();
        let k = alpha.first().map_or(0, |r| r[0].len());
        let ops: Vec<DMatrix<f64>> = (0..k).map(|a| DMatrix::from_fn(n, n, |i, j| alpha[i][j][a])).collect();
        let mean = DVector::from_iterator(k, ops.iter().map(|m| m.trace() / n as f64));
        Self { ops, alpha, mean }
    }

    /// Shape operators given directly, as for synthetic fixtures.
    pub fn from_operators(ops: Vec<DMatrix<f64>>) -> Self {
        let n = ops.first().map_or(0, |m| m.nrows());
        let k = ops.len();
        let alpha = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| DVector::from_iterator(k, ops.iter().map(|m| m[(i, j)])))
                    .collect()
            })
            .collect();
        Self::from_alpha(alpha)
    }

    pub fn max_asymmetry(&self) -> f64 {
        self.ops.iter().map(|m| (m - m.transpose()).amax()).fold(0.0, f64::max)
    }
}

/// `alpha(e_a, e_b) = C^T (P_N f_ij) C` projected on the normal frame.
pub fn second_fundamental_form(jet: &Jet2, frame: &FrameData) -> Result<ShapeOperatorSet> {
    let n = jet.chart_dim();
    if frame.dim() != n || frame.tangent.nrows() != jet.ambient_dim() {
        return Err(Error::FrameMismatch(format!(
            "frame is {}x{}, jet is {}x{n}",
            frame.tangent.nrows(),
            frame.dim(),
            jet.ambient_dim()
        )));
    }
    let k = frame.codim();
    let c = &frame.chart_to_frame;
    // chart components: normal parts of f_ij
    let chart: Vec<Vec<DVector<f64>>> = (0..n)
        .map(|i| (0..n).map(|j| frame.normal.transpose() * jet.d2(i, j)).collect())
        .collect();
    let mut alpha = vec![vec![DVector::zeros(k); n]; n];
    for a in 0..n {
        for b in a..n {
            let mut v = DVector::zeros(k);
            for i in 0..n {
                for j in 0..n {
                    let w = c[(i, a)] * c[(j, b)];
                    if w != 0.0 {
                        v += &chart[i][j] * w;
                    }
                }
            }
            alpha[b][a] = v.clone();
            alpha[a][b] = v;
        }
    }
    Ok(ShapeOperatorSet::from_alpha(alpha))
}

/// Largest entry of `[A_a, A_b]` over all normal pairs.
pub fn flat_normal_bundle_residual(ops: &ShapeOperatorSet) -> f64 {
    let mut r = 0.0f64;
    for a in 0..ops.codim() {
        for b in a + 1..ops.codim() {
            let (x, y) = (&ops.ops[a], &ops.ops[b]);
            r = r.max((x * y - y * x).amax());
        }
    }
    r
}

/// `|| A_delta - phi'' I ||_inf` for the profile surface `g = (h, phi)` and
/// the normal `delta = (-phi' h_t, 1 - phi'^2)`, used without
/// normalization.
pub fn profile_delta_check(jet: &Jet2, warp: &WarpSample, frame: &FrameData) -> Result<f64> {
    let big_n = jet.ambient_dim();
    if jet.chart_dim() != 2 || big_n < 2 {
        return Err(Error::FrameMismatch("profile jet must be a surface".into()));
    }
    let w = 1.0 - warp.dphi * warp.dphi;
    if !(w > TOL_DELTA) {
        return Err(Error::DegenerateDelta(w));
    }
    let mut delta = jet.first.column(0) * (-warp.dphi);
    delta[big_n - 1] = w;
    let c = &frame.chart_to_frame;
    let chart = DMatrix::from_fn(2, 2, |i, j| jet.d2(i, j).dot(&delta));
    let a = c.transpose() * chart * c;
    Ok((a - DMatrix::identity(2, 2) * warp.d2phi).amax())
}

/// `max | n <alpha_ab, H> - sum_c <alpha_ac, alpha_bc> - Ric_ab |` with the
/// chart Ricci matrix moved into the frame.
pub fn gauss_equation_residual(ops: &ShapeOperatorSet, ricci: &DMatrix<f64>, frame: &FrameData) -> Result<f64> {
    let n = ops.dim();
    if ricci.nrows() != n || ricci.ncols() != n || frame.dim() != n {
        return Err(Error::FrameMismatch(format!(
            "Ricci is {}x{}, shape operators are {n}x{n}, frame has {} tangents",
            ricci.nrows(),
            ricci.ncols(),
            frame.dim()
        )));
    }
    let c = &frame.chart_to_frame;
    let ric = c.transpose() * ricci * c;
    let nf = n as f64;
    let mut r = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            let mut lhs = nf * ops.alpha[a][b].dot(&ops.mean);
            for k in 0..n {
                lhs -= ops.alpha[a][k].dot(&ops.alpha[b][k]);
            }
            r = r.max((lhs - ric[(a, b)]).abs());
        }
    }
    Ok(r)
}

/// Adds a seeded symmetric second-order term to every ambient component,
/// the jet of `f + (amplitude/2) S_k(x - x0, x - x0)` at `x0`.
pub fn perturb_jet(jet: &Jet2, amplitude: f64, seed: u64) -> Jet2 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = jet.chart_dim();
    let mut out = jet.clone();
    for h in &mut out.second {
        for i in 0..n {
            for j in i..n {
                let v = amplitude * rng.random_range(-1.0..1.0);
                h[(i, j)] += v;
                if i != j {
                    h[(j, i)] += v;
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extrinsic::frames::frames;
    use crate::jet::Dual2;

    #[test]
    fn round_sphere_is_umbilic() {
        // S^2(2) in R^3 at a generic point
        let t = Dual2::variable(0.9, 0, 2);
        let u = Dual2::variable(0.4, 1, 2);
        let comps = crate::immersions::sphere::sphere_components(&[t, u], 2.0);
        let jet = Jet2::from_components(&comps);
        let f = frames(&jet, None).unwrap();
        let s = second_fundamental_form(&jet, &f).unwrap();
        // inward normal
        let sign = -f.normal.column(0).dot(&jet.value).signum();
        let a = &s.ops[0] * sign;
        assert!((a - DMatrix::identity(2, 2) * 0.5).amax() < 1e-14);
    }

    #[test]
    fn perturbation_breaks_commutation() {
        let x: Vec<Dual2> = (0..3).map(|i| Dual2::variable(0.1 * i as f64, i, 3)).collect();
        let zero = Dual2::constant(0.0, 3);
        let jet = Jet2::from_components(&[x[0].clone(), x[1].clone(), x[2].clone(), zero.clone(), zero]);
        let f = frames(&jet, None).unwrap();
        let flat = second_fundamental_form(&jet, &f).unwrap();
        assert_eq!(flat_normal_bundle_residual(&flat), 0.0);
        let p = perturb_jet(&jet, 0.5, 7);
        let s = second_fundamental_form(&p, &frames(&p, None).unwrap()).unwrap();
        assert!(flat_normal_bundle_residual(&s) > 1e-3);
    }
}
