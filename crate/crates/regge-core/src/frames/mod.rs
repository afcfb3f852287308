//! Orthonormal frame fields, their construction across a mesh, and the
//! curvature pairing computed from them.
//!
//! A compatible frame on a surface is built from a smooth frame `f(0)`,
//! orthonormal for a flat background `g₀`, by evolving it along
//! `g(t) = (1 − t) g₀ + t g₁`. On each edge the skew generator `K` is chosen
//! so the frame keeps fixed coordinates in the edge-adapted frame
//! `(τ, n)`; inside a cell `K` is blended from the edge values.

pub mod extension;
pub mod ode;

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::elemgeom::{christoffels, dihedral_angle, face_frame_at, jump_ii, riemann, GeomError};
use crate::functional::{cholesky_frame, FunctionalError, TermValue};
use crate::gauss2d::GaussError;
use crate::mesh::{MeshComplex, MeshError, QuadratureRule, Shape};
use crate::metric::expr::{Expr, ExprError};
use crate::metric::{MetricError, ReggeMetric};
pub use extension::{blend_weights, face_extension_weights, project_to_face, FaceData, FaceExtension};
pub use ode::{
    evolve_frame, ldl_orthonormalize, ldl_orthonormalize_with, EvolveOptions, FrameHomotopy, MetricPath,
    Orthonormalization,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameError {
    #[error("metric is singular")]
    SingularMetric,
    #[error("metric signature changes at step {step}")]
    SignatureChange { step: usize },
    #[error("generator is not skew at t = {t} (residual {residual:e})")]
    NonSkewK { t: f64, residual: f64 },
    #[error("orthonormality drift {drift:e} exceeds {bound:e}")]
    DriftExceeded { drift: f64, bound: f64 },
    #[error("initial frame is not orthonormal (residual {residual:e})")]
    NotOrthonormal { residual: f64 },
    #[error("face data disagree on faces {faces:?} by {gap:e}")]
    FaceDataMismatch { faces: (usize, usize), gap: f64 },
    #[error("incompatible frame: {0}")]
    IncompatibleFrame(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Functional(Box<FunctionalError>),
    #[error(transparent)]
    Gauss(#[from] GaussError),
}

impl From<FunctionalError> for FrameError {
    fn from(e: FunctionalError) -> Self {
        FrameError::Functional(Box::new(e))
    }
}

type CellSampler = Arc<dyn Fn(usize, &[f64]) -> Result<DMatrix<f64>, FrameError> + Send + Sync>;

/// Frame field given cell by cell; columns are frame vectors in the
/// reference coordinates of the cell.
#[derive(Clone)]
pub struct Frame {
    num_cells: usize,
    sampler: CellSampler,
    /// Metric at the start of the homotopy that produced the frame.
    background: Option<ReggeMetric>,
}

impl std::fmt::Debug for Frame {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Frame")
            .field("num_cells", &self.num_cells)
            .finish_non_exhaustive()
    }
}

fn rotation(angle: f64) -> DMatrix<f64> {
    let (s, c) = angle.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
}

fn jacobian(complex: &MeshComplex, cell: usize, xi: &[f64]) -> Result<DMatrix<f64>, FrameError> {
    let rows = complex.cell(cell).map.jacobian(xi)?;
    Ok(DMatrix::from_row_slice(rows.len(), complex.dim(), &rows.concat()))
}

/// Frame in `cell` that is the Cholesky frame of the chart metric, mapped
/// back to reference coordinates.
fn chart_cholesky(
    metric: &ReggeMetric,
    complex: &MeshComplex,
    cell: usize,
    xi: &[f64],
) -> Result<DMatrix<f64>, FrameError> {
    let jac = jacobian(complex, cell, xi)?;
    let jinv = jac.try_inverse().ok_or(FrameError::SingularMetric)?;
    let g = metric.value(cell, xi)?;
    let chart = jinv.transpose() * g * &jinv;
    let chart = (&chart + chart.transpose()) * 0.5;
    Ok(jinv * cholesky_frame(&chart, cell)?)
}

impl Frame {
    pub fn from_fn(
        num_cells: usize,
        f: impl Fn(usize, &[f64]) -> Result<DMatrix<f64>, FrameError> + Send + Sync + 'static,
    ) -> Frame {
        Frame {
            num_cells,
            sampler: Arc::new(f),
            background: None,
        }
    }

    /// Chart Cholesky frame of `metric`; continuous across cells whenever
    /// the metric is, and its own background.
    pub fn chart(metric: &ReggeMetric, complex: &MeshComplex) -> Result<Frame, FrameError> {
        if complex.ambient_dim() != complex.dim() {
            return Err(FrameError::IncompatibleFrame(
                "chart frames need as many chart coordinates as cell dimensions".into(),
            ));
        }
        let (m, c) = (metric.clone(), complex.clone());
        let mut frame = Frame::from_fn(complex.num_cells(), move |cell, xi| chart_cholesky(&m, &c, cell, xi));
        frame.background = Some(metric.clone());
        Ok(frame)
    }

    pub fn with_background(mut self, background: ReggeMetric) -> Frame {
        self.background = Some(background);
        self
    }

    pub fn background(&self) -> Option<&ReggeMetric> {
        self.background.as_ref()
    }

    pub fn num_cells(&self) -> usize {
        self.num_cells
    }

    pub fn at(&self, cell: usize, xi: &[f64]) -> Result<DMatrix<f64>, FrameError> {
        if cell >= self.num_cells {
            return Err(FrameError::InvalidInput(format!("cell {cell} out of range")));
        }
        (self.sampler)(cell, xi)
    }

    /// Same frame with the vectors of `cell` rotated by `angle` (2D only).
    pub fn rotated_in(&self, cell: usize, angle: f64) -> Frame {
        let inner = self.sampler.clone();
        Frame {
            num_cells: self.num_cells,
            sampler: Arc::new(move |c, xi| {
                let f = inner(c, xi)?;
                Ok(if c == cell { f * rotation(angle) } else { f })
            }),
            background: self.background.clone(),
        }
    }

    /// Frame matrices at the quadrature points of every cell, as JSON.
    pub fn dump(&self, complex: &MeshComplex, degree: usize) -> Result<serde_json::Value, FrameError> {
        let mut cells = Vec::new();
        for c in 0..self.num_cells {
            let rule = QuadratureRule::new(complex.cell(c).shape, complex.dim(), degree)?;
            let mut samples = Vec::new();
            for xi in &rule.points {
                let f = self.at(c, xi)?;
                let rows: Vec<Vec<f64>> = f.row_iter().map(|r| r.iter().copied().collect()).collect();
                samples.push(serde_json::json!({ "xi": xi, "frame": rows }));
            }
            cells.push(serde_json::json!({ "cell": c, "samples": samples }));
        }
        Ok(serde_json::json!({ "cells": cells }))
    }
}

/// Mesh face opposite local vertex `local` of a simplex cell.
fn face_opposite(complex: &MeshComplex, cell: usize, local: usize) -> Result<usize, FrameError> {
    complex
        .cell_faces(cell)
        .iter()
        .copied()
        .find(|&f| {
            complex.faces()[f]
                .incidence(cell)
                .is_some_and(|inc| !inc.local.contains(&local))
        })
        .ok_or_else(|| FrameError::InvalidInput(format!("cell {cell} has no face opposite vertex {local}")))
}

fn skew_part(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m - m.transpose()) * 0.5
}

/// Everything needed to evaluate the compatible frame inside one cell.
struct CellConstruction {
    complex: Arc<MeshComplex>,
    start: Arc<ReggeMetric>,
    end: Arc<ReggeMetric>,
    steps: usize,
}

impl CellConstruction {
    fn path(&self, cell: usize, xi: &[f64]) -> Result<MetricPath, FrameError> {
        Ok(MetricPath::affine(
            self.start.value(cell, xi)?,
            self.end.value(cell, xi)?,
        ))
    }

    fn seed(&self, cell: usize, xi: &[f64]) -> Result<DMatrix<f64>, FrameError> {
        chart_cholesky(&self.start, &self.complex, cell, xi)
    }

    /// `u_e(t) = f₀⁻¹ E(t) μ` with `μ = E(0)⁻¹ f₀` fixed, on face `face`.
    fn edge_factor(
        &self,
        face: usize,
        cell: usize,
        y: &[f64],
        path: &MetricPath,
        seed: &DMatrix<f64>,
        t: f64,
    ) -> Result<DMatrix<f64>, FrameError> {
        let adapted = |t: f64| -> Result<DMatrix<f64>, FrameError> {
            Ok(face_frame_at(&self.complex, face, cell, y.to_vec(), path.at(t))?.matrix())
        };
        let e0 = adapted(0.0)?;
        let mu = e0.try_inverse().ok_or(FrameError::SingularMetric)? * seed;
        let sinv = seed.clone().try_inverse().ok_or(FrameError::SingularMetric)?;
        Ok(sinv * adapted(t)? * mu)
    }

    /// Skew generator that keeps the frame fixed relative to `(τ, n)`:
    /// `K = skew(u⁻¹ u̇ + ½ uᵀ σ̃ u)`.
    fn edge_skew(&self, face: usize, cell: usize, y: &[f64], t: f64) -> Result<DMatrix<f64>, FrameError> {
        let path = self.path(cell, y)?;
        let seed = self.seed(cell, y)?;
        let h = 1e-3;
        let u = |s: f64| self.edge_factor(face, cell, y, &path, &seed, s);
        let du = (u(t - 2.0 * h)? - u(t + 2.0 * h)? + (u(t + h)? - u(t - h)?) * 8.0) / (12.0 * h);
        let ut = u(t)?;
        let sigma = seed.transpose() * path.rate() * &seed;
        let uinv = ut.clone().try_inverse().ok_or(FrameError::SingularMetric)?;
        Ok(skew_part(&(uinv * du + ut.transpose() * sigma * &ut * 0.5)))
    }

    fn generator(&self, cell: usize, xi: &[f64], t: f64) -> Result<DMatrix<f64>, FrameError> {
        let n = self.complex.dim();
        let listed: Vec<usize> = (0..=n).collect();
        let Some(weights) = blend_weights(xi, &listed) else {
            return Err(FrameError::InvalidInput(format!(
                "frame undefined at the vertex {xi:?}"
            )));
        };
        let mut k = DMatrix::zeros(n, n);
        for (&local, w) in listed.iter().zip(weights) {
            if w == 0.0 {
                continue;
            }
            let face = face_opposite(&self.complex, cell, local)?;
            k += self.edge_skew(face, cell, &project_to_face(xi, local), t)? * w;
        }
        Ok(k)
    }

    fn homotopy(&self, cell: usize, xi: &[f64]) -> Result<FrameHomotopy, FrameError> {
        let path = self.path(cell, xi)?;
        let seed = self.seed(cell, xi)?;
        let failure = std::cell::Cell::new(None);
        let k = |t: f64| match self.generator(cell, xi, t) {
            Ok(k) => k,
            Err(e) => {
                failure.set(Some(e));
                DMatrix::zeros(xi.len(), xi.len())
            }
        };
        let h = evolve_frame(&path, &seed, &k, self.steps, EvolveOptions::default());
        if let Some(e) = failure.take() {
            return Err(e);
        }
        h
    }
}

/// Compatible frame for `metric` on a surface, evolved from the chart
/// Cholesky frame of the flat `background` with `steps` RK4 steps.
pub fn compatible_frame(
    background: &ReggeMetric,
    metric: &ReggeMetric,
    complex: &MeshComplex,
    steps: usize,
) -> Result<Frame, FrameError> {
    if complex.dim() != 2 || complex.ambient_dim() != 2 {
        return Err(FrameError::IncompatibleFrame(
            "compatible frames are constructed for planar-chart surfaces only".into(),
        ));
    }
    if complex.cells().iter().any(|c| c.shape != Shape::Simplex) {
        return Err(FrameError::IncompatibleFrame(
            "compatible frames need simplex cells".into(),
        ));
    }
    let build = Arc::new(CellConstruction {
        complex: Arc::new(complex.clone()),
        start: Arc::new(background.clone()),
        end: Arc::new(metric.clone()),
        steps,
    });
    let frame = Frame::from_fn(complex.num_cells(), move |cell, xi| {
        let h = build.homotopy(cell, xi)?;
        Ok(h.final_frame())
    });
    Ok(frame.with_background(background.clone()))
}

/// Homotopy of the compatible frame at one point, for inspection.
pub fn compatible_homotopy(
    background: &ReggeMetric,
    metric: &ReggeMetric,
    complex: &MeshComplex,
    cell: usize,
    xi: &[f64],
    steps: usize,
) -> Result<FrameHomotopy, FrameError> {
    CellConstruction {
        complex: Arc::new(complex.clone()),
        start: Arc::new(background.clone()),
        end: Arc::new(metric.clone()),
        steps,
    }
    .homotopy(cell, xi)
}

/// Residuals of the compatibility conditions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompatibilityReport {
    /// Per interior face, `max |μ^{T'} − diag(I, −1) μ^T|` over face points.
    pub faces: Vec<TermValue>,
    /// Per interior vertex (surfaces with a background), `|Σ_j r_j + Θ_p|`
    /// with `r_j = θ_j(g₁) − θ_j(g₀)`.
    pub hinges: Vec<TermValue>,
    pub max_face_residual: f64,
    pub max_hinge_residual: f64,
    pub tol: f64,
    pub passed: bool,
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |a, v| a.max(v.abs()))
}

/// `μ = E⁻¹ f` for the face-adapted frame `E` of `face` seen from `cell`.
fn adapted_coordinates(
    metric: &ReggeMetric,
    complex: &MeshComplex,
    frame: &Frame,
    face: usize,
    cell: usize,
    eta: &[f64],
) -> Result<(DMatrix<f64>, DMatrix<f64>, Vec<f64>), FrameError> {
    let inc = complex.faces()[face]
        .incidence(cell)
        .ok_or(MeshError::NotIncident { polytope: face, cell })?;
    let xi = inc.to_cell(eta);
    let e = face_frame_at(complex, face, cell, xi.clone(), metric.value(cell, &xi)?)?.matrix();
    let f = frame.at(cell, &xi)?;
    let mu = e.clone().try_inverse().ok_or(FrameError::SingularMetric)? * f;
    Ok((mu, e, xi))
}

/// Per-vertex angle changes `r_j = θ_j(g₁) − θ_j(g₀)` over the fan.
fn rotation_angles(
    metric: &ReggeMetric,
    background: &ReggeMetric,
    complex: &MeshComplex,
    hinge: usize,
) -> Result<Vec<f64>, FrameError> {
    let fan = complex.hinge_fan(hinge)?;
    fan.entries
        .iter()
        .map(|e| {
            Ok(dihedral_angle(metric, complex, hinge, e.cell, &[])?
                - dihedral_angle(background, complex, hinge, e.cell, &[])?)
        })
        .collect()
}

fn angle_defect_2d(metric: &ReggeMetric, complex: &MeshComplex, hinge: usize) -> Result<f64, FrameError> {
    Ok(crate::elemgeom::angle_defect(metric, complex, hinge, &[])?)
}

/// Check the face condition on every interior face and, on surfaces whose
/// frame carries a background metric, the vertex closure `Σ r = −Θ`.
pub fn verify_compatibility(
    metric: &ReggeMetric,
    complex: &MeshComplex,
    frame: &Frame,
    tol: f64,
) -> Result<CompatibilityReport, FrameError> {
    let n = complex.dim();
    let q = 4;
    let rule = QuadratureRule::new(Shape::Simplex, n - 1, q)?;
    let box_rule = QuadratureRule::new(Shape::Box, n - 1, q)?;
    let mut flip = DMatrix::identity(n, n);
    flip[(n - 1, n - 1)] = -1.0;
    let interior: Vec<usize> = (0..complex.faces().len())
        .filter(|&f| !complex.faces()[f].boundary)
        .collect();
    let faces: Vec<Result<TermValue, FrameError>> = interior
        .par_iter()
        .map(|&face| {
            let f = &complex.faces()[face];
            let points = if f.shape == Shape::Box {
                &box_rule.points
            } else {
                &rule.points
            };
            let (a, b) = (f.incidences[0].cell, f.incidences[1].cell);
            let mut worst = 0.0_f64;
            for eta in points {
                let (mu_a, _, _) = adapted_coordinates(metric, complex, frame, face, a, eta)?;
                let (mu_b, _, _) = adapted_coordinates(metric, complex, frame, face, b, eta)?;
                worst = worst.max(max_abs(&(mu_b - &flip * mu_a)));
            }
            Ok(TermValue { id: face, value: worst })
        })
        .collect();
    let faces = faces.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut hinges = Vec::new();
    if let (2, Some(background)) = (n, frame.background()) {
        for p in 0..complex.hinges().len() {
            if complex.hinges()[p].boundary {
                continue;
            }
            let r: f64 = rotation_angles(metric, background, complex, p)?.iter().sum();
            let theta = angle_defect_2d(metric, complex, p)?;
            hinges.push(TermValue {
                id: p,
                value: (r + theta).abs(),
            });
        }
    }
    let max_face_residual = faces.iter().fold(0.0_f64, |m, t| m.max(t.value));
    let max_hinge_residual = hinges.iter().fold(0.0_f64, |m, t| m.max(t.value));
    Ok(CompatibilityReport {
        passed: max_face_residual <= tol && max_hinge_residual <= tol,
        faces,
        hinges,
        max_face_residual,
        max_hinge_residual,
        tol,
    })
}

/// Frame-based pairing with `½ φ w²₁` on a surface.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FramePairing {
    /// `∫_T φ Ω(f₁, f₂) θ¹∧θ²`.
    pub cells: Vec<TermValue>,
    /// `∫_e φ det(μ^T) [[II]]` along `e` oriented by `T`.
    pub edges: Vec<TermValue>,
    /// `−φ(p) Σ_j r_j`.
    pub vertices: Vec<TermValue>,
    pub total: f64,
    pub compatibility: CompatibilityReport,
}

/// Tolerance on the compatibility residuals accepted by
/// [`frame_based_functional`].
pub const COMPATIBILITY_TOL: f64 = 1e-6;

/// Curvature of `metric` paired with `φ` through the connection of a
/// compatible `frame`: cell curvature forms, adjoint-transported jumps of
/// the second fundamental form, and vertex rotation angles.
pub fn frame_based_functional(
    metric: &ReggeMetric,
    complex: &MeshComplex,
    frame: &Frame,
    phi: &Expr,
    quadrature_degree: usize,
) -> Result<FramePairing, FrameError> {
    if complex.dim() != 2 {
        return Err(FrameError::IncompatibleFrame(
            "frame pairing is implemented on surfaces".into(),
        ));
    }
    let background = frame
        .background()
        .ok_or_else(|| FrameError::IncompatibleFrame("frame has no homotopy background".into()))?;
    let compatibility = verify_compatibility(metric, complex, frame, COMPATIBILITY_TOL)?;
    if !compatibility.passed {
        return Err(FrameError::IncompatibleFrame(format!(
            "compatibility residuals {:e} (faces), {:e} (vertices)",
            compatibility.max_face_residual, compatibility.max_hinge_residual
        )));
    }
    let q = quadrature_degree;
    let cells: Vec<Result<TermValue, FrameError>> = (0..complex.num_cells())
        .into_par_iter()
        .map(|c| {
            let rule = QuadratureRule::new(complex.cell(c).shape, 2, q)?;
            let mut total = 0.0;
            for (xi, w) in rule.points.iter().zip(&rule.weights) {
                let f = frame.at(c, xi)?;
                let omega = riemann(metric, c, xi)?.in_basis(&f).get(0, 1, 0, 1);
                let x = complex.cell(c).map.point(xi)?;
                // θ¹∧θ² evaluated on the reference cell is 1/det f.
                total += w * omega * phi.eval(&x)? / f.determinant();
            }
            Ok(TermValue { id: c, value: total })
        })
        .collect();
    let cells = cells.into_iter().collect::<Result<Vec<_>, _>>()?;

    let edge_rule = QuadratureRule::new(Shape::Simplex, 1, q)?;
    let interior: Vec<usize> = (0..complex.faces().len())
        .filter(|&e| !complex.faces()[e].boundary)
        .collect();
    let edges: Vec<Result<TermValue, FrameError>> = interior
        .par_iter()
        .map(|&e| {
            let inc = &complex.faces()[e].incidences[0];
            let cell = inc.cell;
            let mut total = 0.0;
            for (eta, w) in edge_rule.points.iter().zip(&edge_rule.weights) {
                let (mu, adapted, xi) = adapted_coordinates(metric, complex, frame, e, cell, eta)?;
                let jump = jump_ii(metric, complex, e, eta)?[(0, 0)];
                // Ad(μ⁻¹) acts on so(2) by det μ; the jump is read along the
                // tangent making (τ, n) positive.
                let orientation = mu.determinant().signum() * adapted.determinant().signum();
                let tau = DVector::from_column_slice(&inc.axes[0]);
                let ds = (tau.transpose() * metric.value(cell, &xi)? * &tau)[(0, 0)].sqrt();
                let x = complex.cell(cell).map.point(&xi)?;
                total += w * orientation * jump * ds * phi.eval(&x)?;
            }
            Ok(TermValue { id: e, value: total })
        })
        .collect();
    let edges = edges.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut vertices = Vec::new();
    for p in 0..complex.hinges().len() {
        if complex.hinges()[p].boundary {
            continue;
        }
        let r: f64 = rotation_angles(metric, background, complex, p)?.iter().sum();
        let x = complex.polytope_point(0, p, &[])?;
        vertices.push(TermValue {
            id: p,
            value: -r * phi.eval(&x)?,
        });
    }
    let total = cells.iter().chain(&edges).chain(&vertices).map(|t| t.value).sum();
    Ok(FramePairing {
        cells,
        edges,
        vertices,
        total,
        compatibility,
    })
}

/// Connection matrices `ω_k = f⁻¹(∂_k f + Γ_k f)` of a frame at an interior
/// point, one per reference direction; `(Γ_k)^i_j = Γ^i_{kj}`. Frame
/// derivatives use a fourth-order central difference.
pub fn connection_form(
    metric: &ReggeMetric,
    frame: &dyn Fn(&[f64]) -> Result<DMatrix<f64>, FrameError>,
    cell: usize,
    xi: &[f64],
) -> Result<Vec<DMatrix<f64>>, FrameError> {
    let n = xi.len();
    let h = 1e-4;
    let gamma = christoffels(metric, cell, xi)?;
    let f = frame(xi)?;
    let finv = f.clone().try_inverse().ok_or(FrameError::SingularMetric)?;
    (0..n)
        .map(|k| {
            let at = |s: f64| {
                let mut p = xi.to_vec();
                p[k] += s;
                frame(&p)
            };
            let df = (at(-2.0 * h)? - at(2.0 * h)? + (at(h)? - at(-h)?) * 8.0) / (12.0 * h);
            let gk = DMatrix::from_fn(n, n, |i, j| gamma.get(i, k, j));
            Ok(&finv * (df + gk * &f))
        })
        .collect()
}

/// Rotation of the frame needed to carry the closure relation around an
/// interior vertex: `Σ_j r_j` (equals `−Θ_p` for a flat background).
pub fn vertex_rotation(
    metric: &ReggeMetric,
    background: &ReggeMetric,
    complex: &MeshComplex,
    vertex: usize,
) -> Result<f64, FrameError> {
    Ok(rotation_angles(metric, background, complex, vertex)?.iter().sum())
}

/// Background angle sum check: `2π − Σθ(g₀)` at an interior vertex.
pub fn background_defect(background: &ReggeMetric, complex: &MeshComplex, vertex: usize) -> Result<f64, FrameError> {
    let fan = complex.hinge_fan(vertex)?;
    let total: f64 = fan
        .entries
        .iter()
        .map(|e| dihedral_angle(background, complex, vertex, e.cell, &[]))
        .sum::<Result<f64, _>>()?;
    Ok(2.0 * PI - total)
}

#[cfg(test)]
mod tests;
