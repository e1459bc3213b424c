//! Finite-difference Codazzi defect `(grad^perp_X alpha)(Y, Z) - (grad^perp_Y alpha)(X, Z)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::immersions::ImmersionSpec;

/// Second fundamental form data in chart coordinates at one point.
#[derive(Debug, Clone)]
pub struct AlphaData {
    /// `alpha[i][j] = alpha(d_i, d_j)` as vectors of a fixed ambient space.
    pub alpha: Vec<Vec<DVector<f64>>>,
    /// Orthogonal projector onto the normal space.
    pub projector: DMatrix<f64>,
    /// `christoffel[(l * n + k) * n + i] = Gamma^l_{ki}`.
    pub christoffel: Vec<f64>,
    pub metric: DMatrix<f64>,
}

/// A field of second fundamental forms over a chart.
pub trait AlphaField {
    fn dim(&self) -> usize;
    fn local(&self, x: &[f64]) -> Result<AlphaData>;
}

impl AlphaField for ImmersionSpec {
    fn dim(&self) -> usize {
        ImmersionSpec::dim(self)
    }

    fn local(&self, x: &[f64]) -> Result<AlphaData> {
        let jet = self.jet(x)?;
        let n = jet.chart_dim();
        let big_n = jet.ambient_dim();
        let metric = jet.pullback_metric();
        let ginv = metric.clone().try_inverse().ok_or(Error::RankDeficient)?;
        let projector = DMatrix::identity(big_n, big_n) - &jet.first * &ginv * jet.first.transpose();
        let d2: Vec<Vec<DVector<f64>>> = (0..n).map(|i| (0..n).map(|j| jet.d2(i, j)).collect()).collect();
        let alpha = d2
            .iter()
            .map(|row| row.iter().map(|v| &projector * v).collect())
            .collect();
        let mut christoffel = vec![0.0; n * n * n];
        for k in 0..n {
            for i in 0..n {
                let low = jet.first.transpose() * &d2[k][i];
                let up = &ginv * low;
                for l in 0..n {
                    christoffel[(l * n + k) * n + i] = up[l];
                }
            }
        }
        Ok(AlphaData {
            alpha,
            projector,
            christoffel,
            metric,
        })
    }
}

/// Largest frame component of the Codazzi defect at `x`, from five-point
/// differences of `alpha` with step `h`.
pub fn codazzi_residual<F: AlphaField + ?Sized>(field: &F, x: &[f64], h: f64) -> Result<f64> {
    let n = field.dim();
    let here = field.local(x)?;
    let shifted = |k: usize, d: f64| {
        let mut y = x.to_vec();
        y[k] += d;
        field.local(&y)
    };
    // dalpha[k][i][j] = P_N d_k alpha_ij
    let mut dalpha = Vec::with_capacity(n);
    for k in 0..n {
        let m2 = shifted(k, -2.0 * h)?;
        let m1 = shifted(k, -h)?;
        let p1 = shifted(k, h)?;
        let p2 = shifted(k, 2.0 * h)?;
        let rows: Vec<Vec<DVector<f64>>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let d = (&m2.alpha[i][j] - &m1.alpha[i][j] * 8.0 + &p1.alpha[i][j] * 8.0 - &p2.alpha[i][j])
                            / (12.0 * h);
                        &here.projector * d
                    })
                    .collect()
            })
            .collect();
        dalpha.push(rows);
    }
    let gam = |l: usize, k: usize, i: usize| here.christoffel[(l * n + k) * n + i];
    let cov = |k: usize, i: usize, j: usize| -> DVector<f64> {
        let mut v = dalpha[k][i][j].clone();
        for l in 0..n {
            v -= &here.alpha[l][j] * gam(l, k, i);
            v -= &here.alpha[i][l] * gam(l, k, j);
        }
        v
    };
    let dim_amb = here.projector.nrows();
    let mut defect = vec![DVector::zeros(dim_amb); n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                defect[(k * n + i) * n + j] = cov(k, i, j) - cov(i, k, j);
            }
        }
    }
    let chol = here.metric.clone().cholesky().ok_or(Error::RankDeficient)?;
    let c = chol.l().transpose().try_inverse().ok_or(Error::RankDeficient)?;
    let mut worst = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            for e in 0..n {
                let mut v = DVector::zeros(dim_amb);
                for k in 0..n {
                    for i in 0..n {
                        for j in 0..n {
                            let w = c[(k, a)] * c[(i, b)] * c[(j, e)];
                            if w != 0.0 {
                                v += &defect[(k * n + i) * n + j] * w;
                            }
                        }
                    }
                }
                worst = worst.max(v.norm());
            }
        }
    }
    Ok(worst)
}

/// Shape operators of the appendix `eps`-form on Euclidean `R^4` with a
/// parallel normal frame:
/// `A_1 = diag(a, eps a, b, eps b)`, `A_2 = diag(0, 0, p, q)`,
/// `pq = eps (a^2 - b^2)`, with `a`, `b`, `p` affine in `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonFormField {
    pub eps: f64,
}

impl EpsilonFormField {
    pub fn coefficients(&self, x: &[f64]) -> [f64; 4] {
        let a = 1.0 + 0.3 * x[0] + 0.1 * x[2];
        let b = 2.0 + 0.2 * x[1] - 0.1 * x[3];
        let p = 1.0 + 0.25 * x[2];
        let q = self.eps * (a * a - b * b) / p;
        [a, b, p, q]
    }
}

impl AlphaField for EpsilonFormField {
    fn dim(&self) -> usize {
        4
    }

    fn local(&self, x: &[f64]) -> Result<AlphaData> {
        let [a, b, p, q] = self.coefficients(x);
        let d1 = [a, self.eps * a, b, self.eps * b];
        let d2 = [0.0, 0.0, p, q];
        let alpha = (0..4)
            .map(|i| {
                (0..4)
                    .map(|j| {
                        if i == j {
                            DVector::from_vec(vec![d1[i], d2[i]])
                        } else {
                            DVector::zeros(2)
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(AlphaData {
            alpha,
            projector: DMatrix::identity(2, 2),
            christoffel: vec![0.0; 64],
            metric: DMatrix::identity(4, 4),
        })
    }
}
