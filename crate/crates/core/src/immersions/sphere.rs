use serde::{Deserialize, Serialize};

use crate::geometry::{FiberKind, FiberSpec};
use crate::jet::Dual2;

/// Inclusion `S^d(r) -> R^(d+1)` in hyperspherical angles `a_0..a_(d-1)`:
/// the last coordinate is `r cos a_0`, so all-zero angles map to the north
/// pole `(0, ..., 0, r)`.
pub fn sphere_components(angles: &[Dual2], radius: f64) -> Vec<Dual2> {
    let d = angles.len();
    let dim = angles.first().map_or(0, Dual2::dim);
    let mut out = vec![Dual2::constant(0.0, dim); d + 1];
    let mut prefix = Dual2::constant(radius, dim);
    for (i, a) in angles.iter().enumerate() {
        out[d - i] = &prefix * &a.cos();
        prefix = &prefix * &a.sin();
    }
    out[0] = prefix;
    out
}

/// Isometric embedding of a fiber into a round sphere: the product of the
/// factor inclusions, optionally followed by one constant coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberEmbedding {
    pub fiber: FiberSpec,
    pub lift: Option<f64>,
}

impl FiberEmbedding {
    pub fn new(fiber: FiberSpec) -> Self {
        Self { fiber, lift: None }
    }

    pub fn lifted(fiber: FiberSpec, lift: f64) -> Self {
        Self {
            fiber,
            lift: Some(lift),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        if self.fiber.kind == FiberKind::Absent {
            return 0;
        }
        self.fiber.dims.iter().map(|d| d + 1).sum::<usize>() + usize::from(self.lift.is_some())
    }

    /// Radius of the sphere containing the image.
    pub fn radius(&self) -> f64 {
        let r2: f64 = self.fiber.radii.iter().map(|r| r * r).sum();
        (r2 + self.lift.map_or(0.0, |l| l * l)).sqrt()
    }

    pub fn components(&self, angles: &[Dual2], dim: usize) -> Vec<Dual2> {
        let mut out = Vec::with_capacity(self.ambient_dim());
        let mut offset = 0;
        for (&d, &r) in self.fiber.dims.iter().zip(&self.fiber.radii) {
            out.extend(sphere_components(&angles[offset..offset + d], r));
            offset += d;
        }
        if let Some(l) = self.lift {
            out.push(Dual2::constant(l, dim));
        }
        out
    }
}
