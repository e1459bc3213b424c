use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::frames::frames;
use super::shape::{flat_normal_bundle_residual, second_fundamental_form, ShapeOperatorSet};
use crate::error::{Error, Result};
use crate::immersions::ImmersionSpec;

/// Default grouping tolerance for principal normals.
pub const TOL_UMBILIC: f64 = 1e-5;
/// Commutator bound above which simultaneous diagonalization is refused.
pub const TOL_FLAT_NORMAL: f64 = 1e-6;

/// Residuals of the four identities on `U^perp = span{e1, e2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UmbilicResiduals {
    /// `K(U^perp) = <alpha_11, alpha_22> - |alpha_12|^2`.
    pub k_perp: f64,
    /// `rho - K(U^perp) - (n-2) <alpha_11, eta>`.
    pub ga1: f64,
    /// `<alpha_11 - alpha_22, eta>`.
    pub eqalpha: f64,
    /// `<alpha_12, eta>`.
    pub eqalpha2: f64,
    /// `rho - (n-3) |eta|^2 - 2 <alpha_11, eta>`.
    pub eqalpha1: f64,
}

impl UmbilicResiduals {
    pub fn max_abs(&self) -> f64 {
        [self.ga1, self.eqalpha, self.eqalpha2, self.eqalpha1]
            .iter()
            .fold(0.0, |m, r| m.max(r.abs()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UmbilicalReport {
    pub umbilical_dim: usize,
    /// Normal-frame components of the principal normal of `U`.
    pub eta: Vec<f64>,
    /// Tangent-frame components of an orthonormal basis of `U`.
    pub leaf_basis: Vec<Vec<f64>>,
    /// Tangent-frame components of an orthonormal basis of `U^perp`.
    pub complement_basis: Vec<Vec<f64>>,
    /// Principal normals of all simultaneous eigendirections.
    pub principal_normals: Vec<Vec<f64>>,
    pub rho: f64,
    /// Present when `U^perp` is two-dimensional.
    pub residuals: Option<UmbilicResiduals>,
}

/// Orthonormal simultaneous eigenbasis of a commuting family, found by
/// refining eigenspace clusters one operator at a time.
pub fn simultaneous_eigenbasis(ops: &[DMatrix<f64>], tol: f64) -> Vec<DVector<f64>> {
    let n = ops.first().map_or(0, |m| m.nrows());
    let mut clusters = vec![DMatrix::<f64>::identity(n, n)];
    for a in ops {
        let scale = 1.0 + a.amax();
        let mut next = Vec::new();
        for b in &clusters {
            let m = b.transpose() * a * b;
            let m = (&m + m.transpose()) * 0.5;
            let eig = SymmetricEigen::new(m);
            let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
            order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
            let mut start = 0;
            for k in 1..=order.len() {
                let split = k == order.len() || eig.eigenvalues[order[k]] - eig.eigenvalues[order[k - 1]] > tol * scale;
                if split {
                    let cols: Vec<DVector<f64>> = order[start..k]
                        .iter()
                        .map(|&i| b * eig.eigenvectors.column(i))
                        .collect();
                    next.push(DMatrix::from_columns(&cols));
                    start = k;
                }
            }
        }
        clusters = next;
    }
    clusters
        .iter()
        .flat_map(|b| b.column_iter().map(|c| c.into_owned()).collect::<Vec<_>>())
        .collect()
}

fn alpha_on(ops: &ShapeOperatorSet, v: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(ops.codim(), ops.ops.iter().map(|a| (v.transpose() * a * w)[(0, 0)]))
}

/// The largest umbilical subspace `U` and the identities on `U^perp`.
pub fn umbilical_structure(ops: &ShapeOperatorSet, rho: f64, tol: f64) -> Result<UmbilicalReport> {
    let fnb = flat_normal_bundle_residual(ops);
    if fnb > TOL_FLAT_NORMAL.max(tol) {
        return Err(Error::NotFlatNormal(fnb));
    }
    let n = ops.dim();
    let dirs = simultaneous_eigenbasis(&ops.ops, tol);
    let kappas: Vec<DVector<f64>> = dirs.iter().map(|v| alpha_on(ops, v, v)).collect();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, k) in kappas.iter().enumerate() {
        let hit = groups.iter_mut().find(|g| {
            let rep = &kappas[g[0]];
            (k - rep).norm() < tol * (1.0 + rep.norm())
        });
        match hit {
            Some(g) => g.push(i),
            None => groups.push(vec![i]),
        }
    }
    let best = groups
        .iter()
        .enumerate()
        .fold(0, |b, (i, g)| if g.len() > groups[b].len() { i } else { b });
    let members = &groups[best];
    let eta = members.iter().fold(DVector::zeros(ops.codim()), |s, &i| s + &kappas[i]) / members.len() as f64;
    let perp: Vec<&DVector<f64>> = (0..n).filter(|i| !members.contains(i)).map(|i| &dirs[i]).collect();
    let residuals = (perp.len() == 2).then(|| {
        let (e1, e2) = (perp[0], perp[1]);
        let a11 = alpha_on(ops, e1, e1);
        let a22 = alpha_on(ops, e2, e2);
        let a12 = alpha_on(ops, e1, e2);
        let k_perp = a11.dot(&a22) - a12.norm_squared();
        let nf = n as f64;
        UmbilicResiduals {
            k_perp,
            ga1: rho - k_perp - (nf - 2.0) * a11.dot(&eta),
            eqalpha: (&a11 - &a22).dot(&eta),
            eqalpha2: a12.dot(&eta),
            eqalpha1: rho - (nf - 3.0) * eta.norm_squared() - 2.0 * a11.dot(&eta),
        }
    });
    let to_vec = |v: &DVector<f64>| v.iter().copied().collect::<Vec<f64>>();
    Ok(UmbilicalReport {
        umbilical_dim: members.len(),
        eta: to_vec(&eta),
        leaf_basis: members.iter().map(|&i| to_vec(&dirs[i])).collect(),
        complement_basis: perp.iter().map(|v| to_vec(v)).collect(),
        principal_normals: kappas.iter().map(to_vec).collect(),
        rho,
        residuals,
    })
}

/// Principal normal of `U` at `x` as an ambient vector, with the normal
/// projector there.
fn ambient_eta(spec: &ImmersionSpec, x: &[f64], tol: f64) -> Result<(DVector<f64>, DMatrix<f64>, usize)> {
    let jet = spec.jet(x)?;
    let f = frames(&jet, None)?;
    let ops = second_fundamental_form(&jet, &f)?;
    let u = umbilical_structure(&ops, 0.0, tol)?;
    let eta = &f.normal * DVector::from_vec(u.eta);
    Ok((eta, f.normal_projector(), u.umbilical_dim))
}

/// `max |grad^perp_X eta| / |X|` over the fiber coordinate directions `X`
/// at `points` along a leaf circle through `x`: the last fiber angle takes
/// `count` equally spaced values.
pub fn dupin_leaf_residual(spec: &ImmersionSpec, x: &[f64], count: usize, h: f64, tol: f64) -> Result<f64> {
    let n = spec.dim();
    if n < 3 {
        return Err(Error::BadRange("immersion has no fiber".into()));
    }
    let lo = spec.chart.lower[n - 1];
    let hi = spec.chart.upper[n - 1];
    let mut worst = 0.0f64;
    for s in 0..count {
        let mut p = x.to_vec();
        p[n - 1] = lo + 2.0 * h + (hi - lo - 4.0 * h) * (s as f64 + 0.5) / count as f64;
        let (_, proj, dim) = ambient_eta(spec, &p, tol)?;
        let jet = spec.jet(&p)?;
        for k in 2..n {
            let at = |d: f64| -> Result<DVector<f64>> {
                let mut q = p.clone();
                q[k] += d;
                let (eta, _, dq) = ambient_eta(spec, &q, tol)?;
                if dq != dim {
                    return Err(Error::FrameMismatch(format!(
                        "umbilical dimension changes from {dim} to {dq} along the leaf"
                    )));
                }
                Ok(eta)
            };
            let d = (at(-2.0 * h)? - at(-h)? * 8.0 + at(h)? * 8.0 - at(2.0 * h)?) / (12.0 * h);
            let len = jet.first.column(k).norm();
            worst = worst.max((&proj * d).norm() / len);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clusters_split_across_operators() {
        let a1 = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 0.0, 0.0]));
        let a2 = DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 2.0, 3.0, 3.0]));
        let ops = ShapeOperatorSet::from_operators(vec![a1, a2]);
        let r = umbilical_structure(&ops, 0.0, TOL_UMBILIC).unwrap();
        assert_eq!(r.umbilical_dim, 2);
        assert!((r.eta[1] - 3.0).abs() < 1e-14);
        assert!(r.residuals.is_some());
    }

    #[test]
    fn round_sphere_totally_umbilical() {
        let ops = ShapeOperatorSet::from_operators(vec![DMatrix::identity(4, 4) * 0.5]);
        let r = umbilical_structure(&ops, 0.0, TOL_UMBILIC).unwrap();
        assert_eq!(r.umbilical_dim, 4);
        assert!(r.residuals.is_none());
    }

    #[test]
    fn non_commuting_rejected() {
        let a1 = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let a2 = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let ops = ShapeOperatorSet::from_operators(vec![a1, a2]);
        assert!(matches!(
            umbilical_structure(&ops, 0.0, TOL_UMBILIC),
            Err(Error::NotFlatNormal(_))
        ));
    }
}
