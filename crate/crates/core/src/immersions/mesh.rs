//! OBJ and CSV export of two- or three-parameter slices of an immersion.

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::spec::ImmersionSpec;
use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::warpfunc::fmt17;

/// Which chart coordinates vary, over which ranges, at what resolution.
/// Remaining coordinates are fixed at `base`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshSlice {
    pub base: Vec<f64>,
    pub coords: Vec<usize>,
    pub ranges: Vec<(f64, f64)>,
    pub resolution: Vec<usize>,
    /// Periodic axes are sampled on a half-open range and wrap around.
    pub periodic: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshSummary {
    pub vertices: usize,
    pub faces: usize,
    pub degenerate_faces: usize,
    pub obj_path: PathBuf,
    pub csv_path: PathBuf,
    /// Rows are the orthonormal ambient directions used for the OBJ.
    pub projection: Vec<Vec<f64>>,
}

fn axis_values(range: (f64, f64), res: usize, periodic: bool) -> Vec<f64> {
    let (lo, hi) = range;
    let div = if periodic { res } else { res.saturating_sub(1).max(1) };
    (0..res).map(|k| lo + (hi - lo) * k as f64 / div as f64).collect()
}

/// Top three principal directions of a point cloud, largest first.
fn principal_projection(points: &[DVector<f64>]) -> DMatrix<f64> {
    let dim = points[0].len();
    let mean = points.iter().fold(DVector::zeros(dim), |a, p| a + p) / points.len() as f64;
    let mut cov = DMatrix::zeros(dim, dim);
    for p in points {
        let d = p - &mean;
        cov += &d * d.transpose();
    }
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let mut proj = DMatrix::zeros(3, dim);
    for (r, &k) in order.iter().take(3).enumerate() {
        let mut v = eig.eigenvectors.column(k).into_owned();
        let imax = v.iamax();
        if v[imax] < 0.0 {
            v = -v;
        }
        proj.set_row(r, &v.transpose());
    }
    proj
}

/// Writes `<stem>.obj` and `<stem>.csv`. Faces are emitted for
/// two-parameter slices only.
pub fn export_mesh(spec: &ImmersionSpec, slice: &MeshSlice, stem: &Path) -> Result<MeshSummary> {
    let k = slice.coords.len();
    if !(k == 2 || k == 3)
        || slice.ranges.len() != k
        || slice.resolution.len() != k
        || slice.periodic.len() != k
        || slice.resolution.iter().any(|&r| r < 2)
        || slice.base.len() != spec.dim()
    {
        return Err(Error::BadRange("malformed mesh slice".into()));
    }
    let axes: Vec<Vec<f64>> = (0..k)
        .map(|a| axis_values(slice.ranges[a], slice.resolution[a], slice.periodic[a]))
        .collect();
    let total: usize = slice.resolution.iter().product();
    let mut points = Vec::with_capacity(total);
    let mut idx = vec![0usize; k];
    for _ in 0..total {
        let mut x = slice.base.clone();
        for a in 0..k {
            x[slice.coords[a]] = axes[a][idx[a]];
        }
        spec.chart.check_point(&x)?;
        points.push(spec.point(&x)?);
        // last axis varies fastest
        for a in (0..k).rev() {
            idx[a] += 1;
            if idx[a] < slice.resolution[a] {
                break;
            }
            idx[a] = 0;
        }
    }

    let proj = principal_projection(&points);
    let projected: Vec<DVector<f64>> = points.iter().map(|p| &proj * p).collect();
    let mut faces = Vec::new();
    if k == 2 {
        let (r0, r1) = (slice.resolution[0], slice.resolution[1]);
        let id = |i: usize, j: usize| i * r1 + j;
        let i_end = if slice.periodic[0] { r0 } else { r0 - 1 };
        let j_end = if slice.periodic[1] { r1 } else { r1 - 1 };
        for i in 0..i_end {
            for j in 0..j_end {
                let (i2, j2) = ((i + 1) % r0, (j + 1) % r1);
                faces.push([id(i, j), id(i2, j), id(i2, j2)]);
                faces.push([id(i, j), id(i2, j2), id(i, j2)]);
            }
        }
    }
    let extent = projected.iter().map(|p| p.amax()).fold(0.0f64, f64::max).max(1.0);
    let degenerate_faces = faces
        .iter()
        .filter(|f| {
            let a = &projected[f[1]] - &projected[f[0]];
            let b = &projected[f[2]] - &projected[f[0]];
            let area = 0.5 * a.cross(&b).norm();
            !(area > 1e-14 * extent * extent)
        })
        .count();

    let obj_path = stem.with_extension("obj");
    let csv_path = stem.with_extension("csv");
    write_atomic(&obj_path, |w| {
        writeln!(w, "# {} vertices, {} faces", projected.len(), faces.len())?;
        for p in &projected {
            writeln!(w, "v {} {} {}", fmt17(p[0]), fmt17(p[1]), fmt17(p[2]))?;
        }
        for f in &faces {
            writeln!(w, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
        }
        Ok(())
    })?;
    write_atomic(&csv_path, |w| {
        let header: Vec<String> = (0..spec.ambient_dim).map(|i| format!("coord_{i}")).collect();
        writeln!(w, "{}", header.join(","))?;
        for p in &points {
            let row: Vec<String> = p.iter().map(|&v| fmt17(v)).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    })?;
    Ok(MeshSummary {
        vertices: points.len(),
        faces: faces.len(),
        degenerate_faces,
        obj_path,
        csv_path,
        projection: proj.row_iter().map(|r| r.iter().copied().collect()).collect(),
    })
}
