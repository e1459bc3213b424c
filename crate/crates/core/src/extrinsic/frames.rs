use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::jet::Jet2;

/// Relative residual below which a Gram-Schmidt candidate counts as
/// dependent.
const TOL_RANK: f64 = 1e-10;

/// Orthonormal tangent and normal frames at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameData {
    /// `N x n`, columns orthonormal, spanning the image of `Jet2::first`.
    pub tangent: DMatrix<f64>,
    /// `N x (N - n)`, columns orthonormal.
    pub normal: DMatrix<f64>,
    /// Chart-to-frame change: `tangent = first * chart_to_frame`.
    pub chart_to_frame: DMatrix<f64>,
}

impl FrameData {
    pub fn dim(&self) -> usize {
        self.tangent.ncols()
    }

    pub fn codim(&self) -> usize {
        self.normal.ncols()
    }

    /// `|| F^T F - I ||_inf` for the full frame `F = [tangent | normal]`.
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.dim();
        let k = self.codim();
        let mut f = DMatrix::zeros(self.tangent.nrows(), n + k);
        f.columns_mut(0, n).copy_from(&self.tangent);
        f.columns_mut(n, k).copy_from(&self.normal);
        (f.transpose() * &f - DMatrix::identity(n + k, n + k)).amax()
    }

    /// Orthogonal projector onto the normal space.
    pub fn normal_projector(&self) -> DMatrix<f64> {
        &self.normal * self.normal.transpose()
    }
}

fn orthogonalize(v: &mut DVector<f64>, basis: &[DVector<f64>]) {
    // two passes keep the defect at rounding level
    for _ in 0..2 {
        for b in basis {
            let d = b.dot(v);
            *v -= b * d;
        }
    }
}

/// Frames at a point: Gram-Schmidt on the chart tangents in index order,
/// then normals from the seed directions (the columns of `seed`, or the
/// ambient axes), taking at each step the candidate with the largest
/// residual and the lowest index among equals.
pub fn frames(jet: &Jet2, seed: Option<&DMatrix<f64>>) -> Result<FrameData> {
    let big_n = jet.ambient_dim();
    let n = jet.chart_dim();
    let scale = jet.first.amax().max(1.0);
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(big_n);
    for i in 0..n {
        let mut v = jet.first.column(i).into_owned();
        orthogonalize(&mut v, &basis);
        let nrm = v.norm();
        if !(nrm > TOL_RANK * scale) {
            return Err(Error::RankDeficient);
        }
        basis.push(v / nrm);
    }
    let tangent = DMatrix::from_columns(&basis);
    let r = tangent.transpose() * &jet.first;
    let chart_to_frame = r.try_inverse().ok_or(Error::RankDeficient)?;

    let candidates: Vec<DVector<f64>> = match seed {
        Some(q) => {
            if q.nrows() != big_n {
                return Err(Error::FrameMismatch(format!(
                    "seed has {} rows, ambient dimension is {big_n}",
                    q.nrows()
                )));
            }
            q.column_iter().map(|c| c.into_owned()).collect()
        }
        None => (0..big_n)
            .map(|k| {
                let mut e = DVector::zeros(big_n);
                e[k] = 1.0;
                e
            })
            .collect(),
    };
    let mut normals = Vec::with_capacity(big_n - n);
    while basis.len() < big_n {
        let mut best: Option<(f64, DVector<f64>)> = None;
        for c in &candidates {
            let mut v = c.clone();
            orthogonalize(&mut v, &basis);
            let nrm = v.norm();
            if best.as_ref().is_none_or(|(b, _)| nrm > b + 1e-12) {
                best = Some((nrm, v));
            }
        }
        let (nrm, v) = best.ok_or(Error::RankDeficient)?;
        if !(nrm > TOL_RANK) {
            return Err(Error::RankDeficient);
        }
        let v = v / nrm;
        basis.push(v.clone());
        normals.push(v);
    }
    let normal = if normals.is_empty() {
        DMatrix::zeros(big_n, 0)
    } else {
        DMatrix::from_columns(&normals)
    };
    Ok(FrameData {
        tangent,
        normal,
        chart_to_frame,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::Dual2;

    #[test]
    fn flat_graph_normals_are_axes() {
        let x = [Dual2::variable(0.3, 0, 2), Dual2::variable(-0.2, 1, 2)];
        let zero = Dual2::constant(0.0, 2);
        let jet = Jet2::from_components(&[x[0].clone(), x[1].clone(), zero.clone(), zero]);
        let f = frames(&jet, None).unwrap();
        assert_eq!(
            f.normal.column(0).iter().copied().collect::<Vec<_>>(),
            vec![0.0, 0.0, 1.0, 0.0]
        );
        assert_eq!(
            f.normal.column(1).iter().copied().collect::<Vec<_>>(),
            vec![0.0, 0.0, 0.0, 1.0]
        );
        assert!(f.orthonormality_defect() < 1e-15);
    }

    #[test]
    fn rank_deficiency() {
        let x = Dual2::variable(0.3, 0, 2);
        let jet = Jet2::from_components(&[x.clone(), x.clone(), x]);
        assert!(matches!(frames(&jet, None), Err(Error::RankDeficient)));
    }
}
