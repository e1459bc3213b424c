//! Second-order forward-mode differentiation.
//!
//! [`Dual2`] carries a scalar together with its gradient and Hessian with
//! respect to the chart coordinates. Every immersion is written once in
//! terms of `Dual2` arithmetic and the chain rule does the rest, so the
//! first and second partials of a composite map are exact up to rounding.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, PartialEq)]
pub struct Dual2 {
    pub v: f64,
    pub g: DVector<f64>,
    pub h: DMatrix<f64>,
}

impl Dual2 {
    pub fn constant(v: f64, dim: usize) -> Self {
        Self {
            v,
            g: DVector::zeros(dim),
            h: DMatrix::zeros(dim, dim),
        }
    }

    /// The `index`-th chart coordinate evaluated at `v`.
    pub fn variable(v: f64, index: usize, dim: usize) -> Self {
        let mut g = DVector::zeros(dim);
        g[index] = 1.0;
        Self {
            v,
            g,
            h: DMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    /// Compose with a univariate function given its value and first two
    /// derivatives at `self.v`.
    pub fn compose(&self, f: f64, df: f64, d2f: f64) -> Self {
        Self {
            v: f,
            g: &self.g * df,
            h: &self.h * df + (&self.g * self.g.transpose()) * d2f,
        }
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.compose(s, c, -s)
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.compose(c, -s, -c)
    }

    pub fn sqrt(&self) -> Self {
        let r = self.v.sqrt();
        self.compose(r, 0.5 / r, -0.25 / (r * self.v))
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            v: self.v * k,
            g: &self.g * k,
            h: &self.h * k,
        }
    }

    pub fn offset(&self, k: f64) -> Self {
        Self {
            v: self.v + k,
            g: self.g.clone(),
            h: self.h.clone(),
        }
    }
}

impl Add for &Dual2 {
    type Output = Dual2;
    fn add(self, o: &Dual2) -> Dual2 {
        Dual2 {
            v: self.v + o.v,
            g: &self.g + &o.g,
            h: &self.h + &o.h,
        }
    }
}

impl Sub for &Dual2 {
    type Output = Dual2;
    fn sub(self, o: &Dual2) -> Dual2 {
        Dual2 {
            v: self.v - o.v,
            g: &self.g - &o.g,
            h: &self.h - &o.h,
        }
    }
}

impl Mul for &Dual2 {
    type Output = Dual2;
    fn mul(self, o: &Dual2) -> Dual2 {
        let cross = &self.g * o.g.transpose();
        Dual2 {
            v: self.v * o.v,
            g: &self.g * o.v + &o.g * self.v,
            h: &self.h * o.v + &o.h * self.v + &cross + cross.transpose(),
        }
    }
}

impl Neg for &Dual2 {
    type Output = Dual2;
    fn neg(self) -> Dual2 {
        self.scale(-1.0)
    }
}

/// Value, Jacobian and second partials of a map from an `n`-dimensional
/// chart into `R^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub value: DVector<f64>,
    /// `N x n` matrix of first partials.
    pub first: DMatrix<f64>,
    /// `second[k]` is the `n x n` Hessian of ambient component `k`.
    pub second: Vec<DMatrix<f64>>,
}

impl Jet2 {
    pub fn from_components(components: &[Dual2]) -> Self {
        let big_n = components.len();
        let n = components.first().map_or(0, Dual2::dim);
        let value = DVector::from_iterator(big_n, components.iter().map(|c| c.v));
        let first = DMatrix::from_fn(big_n, n, |k, i| components[k].g[i]);
        let second = components.iter().map(|c| c.h.clone()).collect();
        Self { value, first, second }
    }

    pub fn ambient_dim(&self) -> usize {
        self.value.len()
    }

    pub fn chart_dim(&self) -> usize {
        self.first.ncols()
    }

    /// Ambient vector of the mixed partial `d^2 f / dx_i dx_j`.
    pub fn d2(&self, i: usize, j: usize) -> DVector<f64> {
        DVector::from_iterator(self.second.len(), self.second.iter().map(|h| h[(i, j)]))
    }

    /// Induced metric `J^T J`.
    pub fn pullback_metric(&self) -> DMatrix<f64> {
        self.first.transpose() * &self.first
    }

    /// Largest asymmetry of the second partials in their chart indices.
    pub fn second_asymmetry(&self) -> f64 {
        self.second
            .iter()
            .map(|h| (h - h.transpose()).amax())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_matches_closed_form() {
        // f(x, y) = sin(x) * y^2 at (0.3, 1.7)
        let x = Dual2::variable(0.3, 0, 2);
        let y = Dual2::variable(1.7, 1, 2);
        let f = &x.sin() * &(&y * &y);
        let (s, c) = 0.3f64.sin_cos();
        assert!((f.v - s * 1.7 * 1.7).abs() < 1e-15);
        assert!((f.g[0] - c * 1.7 * 1.7).abs() < 1e-15);
        assert!((f.g[1] - 2.0 * s * 1.7).abs() < 1e-15);
        assert!((f.h[(0, 0)] + s * 1.7 * 1.7).abs() < 1e-15);
        assert!((f.h[(0, 1)] - 2.0 * c * 1.7).abs() < 1e-15);
        assert!((f.h[(1, 0)] - 2.0 * c * 1.7).abs() < 1e-15);
        assert!((f.h[(1, 1)] - 2.0 * s).abs() < 1e-15);
    }

    #[test]
    fn sqrt_chain() {
        let x = Dual2::variable(2.0, 0, 1);
        let f = (&x * &x).offset(1.0).sqrt();
        // d/dx sqrt(x^2+1) = x / sqrt(x^2+1), d2 = 1/(x^2+1)^{3/2}
        assert!((f.g[0] - 2.0 / 5f64.sqrt()).abs() < 1e-15);
        assert!((f.h[(0, 0)] - 1.0 / 5f64.powf(1.5)).abs() < 1e-15);
    }
}
