//! Second fundamental forms, umbilical structure and the identities they
//! satisfy on the constructed immersions.

pub mod appendix;
pub mod codazzi;
pub mod frames;
pub mod shape;
pub mod umbilic;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use appendix::{appendix_classify, solve_generic_relations, AppendixRecord, TOL_APPENDIX};
pub use codazzi::{codazzi_residual, AlphaField, EpsilonFormField};
pub use frames::{frames, FrameData};
pub use shape::{
    flat_normal_bundle_residual, gauss_equation_residual, perturb_jet, profile_delta_check, second_fundamental_form,
    ShapeOperatorSet,
};
pub use umbilic::{
    dupin_leaf_residual, simultaneous_eigenbasis, umbilical_structure, UmbilicResiduals, UmbilicalReport, TOL_UMBILIC,
};

use crate::error::Result;
use crate::geometry::ricci_fd;
use crate::immersions::ImmersionSpec;
use crate::jet::Jet2;

/// Extrinsic diagnostics at one chart point; frames are omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtrinsicReport {
    pub point: Vec<f64>,
    pub orthonormality_defect: f64,
    pub alpha_asymmetry: f64,
    /// `shape_operators[a][i][j]`.
    pub shape_operators: Vec<Vec<Vec<f64>>>,
    pub mean_curvature: Vec<f64>,
    pub flat_normal_bundle_residual: f64,
    /// Absent when the normal bundle is not flat.
    pub umbilical: Option<UmbilicalReport>,
    pub gauss_residual: Option<f64>,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Frames, shape operators and umbilical data from a jet.
pub fn analyze_jet(
    jet: &Jet2,
    x: &[f64],
    rho: f64,
    tol: f64,
    seed: Option<&DMatrix<f64>>,
) -> Result<(FrameData, ShapeOperatorSet, ExtrinsicReport)> {
    let frame = frames(jet, seed)?;
    let ops = second_fundamental_form(jet, &frame)?;
    let fnb = flat_normal_bundle_residual(&ops);
    let umbilical = umbilical_structure(&ops, rho, tol).ok();
    let asym = (0..ops.dim())
        .flat_map(|i| (0..ops.dim()).map(move |j| (i, j)))
        .map(|(i, j)| (&ops.alpha[i][j] - &ops.alpha[j][i]).amax())
        .fold(0.0, f64::max);
    let report = ExtrinsicReport {
        point: x.to_vec(),
        orthonormality_defect: frame.orthonormality_defect(),
        alpha_asymmetry: asym,
        shape_operators: ops.ops.iter().map(rows).collect(),
        mean_curvature: ops.mean.iter().copied().collect(),
        flat_normal_bundle_residual: fnb,
        umbilical,
        gauss_residual: None,
    };
    Ok((frame, ops, report))
}

/// [`analyze_jet`] at `x`, plus the Gauss equation against the
/// finite-difference Ricci tensor of the chart when `ricci_step` is given.
pub fn extrinsic_report(
    spec: &ImmersionSpec,
    x: &[f64],
    rho: f64,
    tol: f64,
    ricci_step: Option<f64>,
) -> Result<ExtrinsicReport> {
    let jet = spec.jet(x)?;
    let (frame, ops, mut report) = analyze_jet(&jet, x, rho, tol, None)?;
    if let Some(h) = ricci_step {
        let ric = ricci_fd(&spec.chart, x, h, rho)?.ricci_matrix();
        report.gauss_residual = Some(gauss_equation_residual(&ops, &ric, &frame)?);
    }
    Ok(report)
}
