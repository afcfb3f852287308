//! Distributional Gauss curvature of surfaces, boundary terms included.
//!
//! `⟨K, φ⟩ = Σ ∫K φ dA + Σ_int ∫[[k]] φ ds + Σ_int Θ_p φ(p)
//!          + Σ_bdry ∫k φ ds + Σ_bdry (π − Σθ) φ(p)`,
//! with `k = ⟨∇_τ n, τ⟩` for the outward normal `n`, so a round disk of
//! radius `r` has `k = 1/r`. With `φ ≡ 1` the total is `2πχ`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::elemgeom::{
    angle_defect, angle_sum, christoffels_from, clamp_to_cell, face_frame_at, gauss_curvature_at, jump_ii,
    second_fundamental_form_at, GeomError,
};
use crate::functional::{BoundaryTerms, CurvatureMeasure, TermValue};
use crate::mesh::{MeshComplex, MeshError, QuadratureRule};
use crate::metric::expr::{coordinate_names, Expr, ExprError};
use crate::metric::{MetricError, ReggeMetric};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaussError {
    #[error("surface routines need a 2-dimensional mesh, got dimension {0}")]
    WrongDimension(usize),
    #[error("edge {edge} is interior")]
    InteriorEdge { edge: usize },
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Per-polytope contributions of the Gauss pairing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussReport {
    /// `∫_T K φ dA`.
    pub cells: Vec<TermValue>,
    /// `∫_e [[k]] φ ds`.
    pub interior_edges: Vec<TermValue>,
    /// `Θ_p φ(p)`.
    pub interior_vertices: Vec<TermValue>,
    /// `∫_e k φ ds`.
    pub boundary_edges: Vec<TermValue>,
    /// `(π − Σθ) φ(p)`.
    pub boundary_vertices: Vec<TermValue>,
    pub cell_total: f64,
    pub interior_edge_total: f64,
    pub interior_vertex_total: f64,
    pub boundary_edge_total: f64,
    pub boundary_vertex_total: f64,
    pub total: f64,
    pub euler_characteristic: i64,
    /// `2πχ`.
    pub target: f64,
    /// `|total − 2πχ|`; meaningful for `φ ≡ 1`.
    pub defect: f64,
    pub quadrature_degree: usize,
}

fn sum(terms: &[TermValue]) -> f64 {
    terms.iter().fold(0.0, |s, t| s + t.value)
}

impl GaussReport {
    /// Same numbers laid out as a curvature measure, boundary terms kept
    /// separately.
    pub fn to_measure(&self) -> CurvatureMeasure {
        CurvatureMeasure::new(
            self.cells.clone(),
            self.interior_edges.clone(),
            self.interior_vertices.clone(),
            Some(BoundaryTerms {
                faces: self.boundary_edges.clone(),
                hinges: self.boundary_vertices.clone(),
            }),
            self.quadrature_degree,
        )
    }

    /// Interior part of the pairing: cells, interior edges, interior vertices.
    pub fn interior_total(&self) -> f64 {
        self.cell_total + self.interior_edge_total + self.interior_vertex_total
    }
}

fn require_surface(complex: &MeshComplex) -> Result<(), GaussError> {
    match complex.dim() {
        2 => Ok(()),
        d => Err(GaussError::WrongDimension(d)),
    }
}

/// Gauss curvature `R_1212 / det g` at a reference point of `cell`.
pub fn gauss_curvature(metric: &ReggeMetric, cell: usize, xi: &[f64]) -> Result<f64, GaussError> {
    if metric.dim() != 2 {
        return Err(GaussError::WrongDimension(metric.dim()));
    }
    Ok(gauss_curvature_at(metric, cell, xi)?)
}

/// Geodesic curvature of a boundary edge at edge parameter `eta`, seen from
/// its only cell.
pub fn geodesic_curvature(
    metric: &ReggeMetric,
    complex: &MeshComplex,
    edge: usize,
    eta: &[f64],
) -> Result<f64, GaussError> {
    require_surface(complex)?;
    let e = &complex.faces()[edge];
    if !e.boundary {
        return Err(GaussError::InteriorEdge { edge });
    }
    let (k, _, _) = boundary_point(metric, complex, edge, eta)?;
    Ok(k)
}

/// Geodesic curvature, length element and reference point on a boundary edge.
fn boundary_point(
    metric: &ReggeMetric,
    complex: &MeshComplex,
    edge: usize,
    eta: &[f64],
) -> Result<(f64, f64, (usize, Vec<f64>)), GaussError> {
    let inc = &complex.faces()[edge].incidences[0];
    let cell = inc.cell;
    let xi = clamp_to_cell(complex.cell(cell).shape, &inc.to_cell(eta));
    let sample = metric.evaluate(cell, &xi, 1)?;
    let gamma = christoffels_from(&sample, cell)?;
    let ds = length_element(&sample.g, &inc.axes[0]);
    let frame = face_frame_at(complex, edge, cell, xi.clone(), sample.g)?;
    let ii = second_fundamental_form_at(&frame, &gamma);
    Ok((ii[(0, 0)], ds, (cell, xi)))
}

fn length_element(g: &DMatrix<f64>, axis: &[f64]) -> f64 {
    let a = DVector::from_column_slice(axis);
    (a.transpose() * g * &a)[(0, 0)].sqrt()
}

fn phi_at(phi: &Expr, complex: &MeshComplex, cell: usize, xi: &[f64]) -> Result<f64, GaussError> {
    let x = complex.cell(cell).map.point(xi)?;
    Ok(phi.eval(&x)?)
}

fn cell_integral(
    metric: &ReggeMetric,
    complex: &MeshComplex,
    cell: usize,
    phi: &Expr,
    rule: &QuadratureRule,
) -> Result<f64, GaussError> {
    let mut total = 0.0;
    for (xi, w) in rule.points.iter().zip(&rule.weights) {
        let k = gauss_curvature_at(metric, cell, xi)?;
        let area = metric.value(cell, xi)?.determinant().sqrt();
        total += w * k * area * phi_at(phi, complex, cell, xi)?;
    }
    Ok(total)
}

fn interior_edge_integral(
    metric: &ReggeMetric,
    complex: &MeshComplex,
    edge: usize,
    phi: &Expr,
    rule: &QuadratureRule,
) -> Result<f64, GaussError> {
    let inc = &complex.faces()[edge].incidences[0];
    let mut total = 0.0;
    for (eta, w) in rule.points.iter().zip(&rule.weights) {
        let jump = jump_ii(metric, complex, edge, eta)?;
        let xi = clamp_to_cell(complex.cell(inc.cell).shape, &inc.to_cell(eta));
        let ds = length_element(&metric.value(inc.cell, &xi)?, &inc.axes[0]);
        total += w * jump[(0, 0)] * ds * phi_at(phi, complex, inc.cell, &xi)?;
    }
    Ok(total)
}

fn boundary_edge_integral(
    metric: &ReggeMetric,
    complex: &MeshComplex,
    edge: usize,
    phi: &Expr,
    rule: &QuadratureRule,
) -> Result<f64, GaussError> {
    let mut total = 0.0;
    for (eta, w) in rule.points.iter().zip(&rule.weights) {
        let (k, ds, (cell, xi)) = boundary_point(metric, complex, edge, eta)?;
        total += w * k * ds * phi_at(phi, complex, cell, &xi)?;
    }
    Ok(total)
}

fn vertex_value(metric: &ReggeMetric, complex: &MeshComplex, vertex: usize, phi: &Expr) -> Result<f64, GaussError> {
    let x = complex.polytope_point(0, vertex, &[])?;
    let weight = if complex.hinges()[vertex].boundary {
        PI - angle_sum(metric, complex, vertex, &[])?
    } else {
        angle_defect(metric, complex, vertex, &[])?
    };
    Ok(weight * phi.eval(&x)?)
}

fn terms(ids: Vec<usize>, f: impl Fn(usize) -> Result<f64, GaussError> + Sync) -> Result<Vec<TermValue>, GaussError> {
    let values: Vec<Result<TermValue, GaussError>> = ids
        .into_par_iter()
        .map(|id| f(id).map(|value| TermValue { id, value }))
        .collect();
    values.into_iter().collect()
}

/// Pair the distributional Gauss curvature with `φ`, given in chart
/// coordinates `x1..xm`.
pub fn pair_gauss(
    metric: &ReggeMetric,
    complex: &MeshComplex,
    phi: &Expr,
    quadrature_degree: usize,
) -> Result<GaussReport, GaussError> {
    require_surface(complex)?;
    if metric.dim() != 2 || metric.num_cells() != complex.num_cells() {
        return Err(MetricError::InvalidInput("metric does not match the mesh".into()).into());
    }
    let q = quadrature_degree;
    let edge_rule = QuadratureRule::new(crate::mesh::Shape::Simplex, 1, q)?;
    let cells = terms((0..complex.num_cells()).collect(), |c| {
        let rule = QuadratureRule::new(complex.cell(c).shape, 2, q)?;
        cell_integral(metric, complex, c, phi, &rule)
    })?;
    let (bdry_edges, int_edges): (Vec<usize>, Vec<usize>) =
        (0..complex.faces().len()).partition(|&e| complex.faces()[e].boundary);
    let (bdry_verts, int_verts): (Vec<usize>, Vec<usize>) =
        (0..complex.hinges().len()).partition(|&p| complex.hinges()[p].boundary);
    let interior_edges = terms(int_edges, |e| {
        interior_edge_integral(metric, complex, e, phi, &edge_rule)
    })?;
    let interior_vertices = terms(int_verts, |p| vertex_value(metric, complex, p, phi))?;
    let boundary_edges = terms(bdry_edges, |e| {
        boundary_edge_integral(metric, complex, e, phi, &edge_rule)
    })?;
    let boundary_vertices = terms(bdry_verts, |p| vertex_value(metric, complex, p, phi))?;

    let cell_total = sum(&cells);
    let interior_edge_total = sum(&interior_edges);
    let interior_vertex_total = sum(&interior_vertices);
    let boundary_edge_total = sum(&boundary_edges);
    let boundary_vertex_total = sum(&boundary_vertices);
    let total = cell_total + interior_edge_total + interior_vertex_total + boundary_edge_total + boundary_vertex_total;
    let chi = complex.euler_characteristic();
    let target = 2.0 * PI * chi as f64;
    Ok(GaussReport {
        cells,
        interior_edges,
        interior_vertices,
        boundary_edges,
        boundary_vertices,
        cell_total,
        interior_edge_total,
        interior_vertex_total,
        boundary_edge_total,
        boundary_vertex_total,
        total,
        euler_characteristic: chi,
        target,
        defect: (total - target).abs(),
        quadrature_degree: q,
    })
}

/// `pair_gauss` with `φ ≡ 1`; `defect` measures the Gauss-Bonnet error.
pub fn gauss_bonnet_check(
    metric: &ReggeMetric,
    complex: &MeshComplex,
    quadrature_degree: usize,
) -> Result<GaussReport, GaussError> {
    let one = Expr::parse("1", &coordinate_names("x", complex.ambient_dim()))?;
    pair_gauss(metric, complex, &one, quadrature_degree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meshes;
    use crate::metric::{parse_metric_expression, MetricExpression};

    fn phi(text: &str, m: usize) -> Expr {
        Expr::parse(text, &coordinate_names("x", m)).unwrap()
    }

    fn exact(complex: &MeshComplex, text: &str) -> ReggeMetric {
        let e: MetricExpression = parse_metric_expression(text).unwrap();
        ReggeMetric::from_expression(complex, &e).unwrap()
    }

    #[test]
    fn closed_surfaces() {
        let cube = meshes::cube_surface().build().unwrap();
        let r = gauss_bonnet_check(&ReggeMetric::induced(&cube), &cube, 4).unwrap();
        assert!((r.total - 4.0 * PI).abs() < 1e-12);
        assert!(r.interior_vertices.iter().all(|t| (t.value - PI / 2.0).abs() < 1e-12));
        let torus = meshes::flat_torus().build().unwrap();
        let r = gauss_bonnet_check(&ReggeMetric::induced(&torus), &torus, 4).unwrap();
        assert!(r.total.abs() < 1e-12);
    }

    #[test]
    fn square_corners() {
        let sq = meshes::square_pair().build().unwrap();
        let m = ReggeMetric::induced(&sq);
        let r = pair_gauss(&m, &sq, &phi("1 + x1 + 2*x2", 2), 6).unwrap();
        // corners weigh π/2 each: φ = 1, 2, 3, 4.
        assert!((r.boundary_vertex_total - PI / 2.0 * 10.0).abs() < 1e-12);
        assert!(r.interior_total().abs() < 1e-12);
        assert!(r.boundary_edge_total.abs() < 1e-12);
    }

    #[test]
    fn disk_boundary_curvature() {
        let d = meshes::disk(16, 2.0).build().unwrap();
        let m = ReggeMetric::induced(&d);
        let edge = (0..d.faces().len()).find(|&e| d.faces()[e].boundary).unwrap();
        assert!((geodesic_curvature(&m, &d, edge, &[0.3]).unwrap() - 0.5).abs() < 1e-10);
        let inner = (0..d.faces().len()).find(|&e| !d.faces()[e].boundary).unwrap();
        assert_eq!(
            geodesic_curvature(&m, &d, inner, &[0.3]),
            Err(GaussError::InteriorEdge { edge: inner })
        );
        let r = gauss_bonnet_check(&m, &d, 12).unwrap();
        assert!(r.defect < 1e-8, "{}", r.defect);
    }

    #[test]
    fn conformal_curvature() {
        let t = meshes::triangle([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).build().unwrap();
        let m = exact(&t, "[[exp(2*x1^2), 0], [0, exp(2*x1^2)]]");
        let xi = [0.4, 0.3];
        let k = gauss_curvature(&m, 0, &xi).unwrap();
        assert!((k + 2.0 * (-2.0 * 0.16_f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn geodesic_edge_of_sphere_chart() {
        let t = meshes::triangle([[0.2, -0.1], [0.9, 0.3], [-0.1, 0.6]])
            .build()
            .unwrap();
        let m = exact(&t, meshes::GNOMONIC_SPHERE);
        assert!((gauss_curvature(&m, 0, &[0.2, 0.3]).unwrap() - 1.0).abs() < 1e-12);
        for e in 0..3 {
            assert!(geodesic_curvature(&m, &t, e, &[0.37]).unwrap().abs() < 1e-8);
        }
    }

    #[test]
    fn linear_in_phi() {
        let h = meshes::hexagon([0.1, 0.0], 1.0).build().unwrap();
        let m = exact(&h, "[[1 + x1^2, 0.2*x2], [0.2*x2, 1 + x2^2]]")
            .interpolate(1)
            .unwrap();
        let a = pair_gauss(&m, &h, &phi("1 + x1", 2), 8).unwrap().total;
        let b = pair_gauss(&m, &h, &phi("x2^2", 2), 8).unwrap().total;
        let c = pair_gauss(&m, &h, &phi("2*(1 + x1) - 3*x2^2", 2), 8).unwrap().total;
        assert!((c - (2.0 * a - 3.0 * b)).abs() < 1e-12);
        let one = pair_gauss(&m, &h, &phi("1", 2), 8).unwrap();
        assert_eq!(one.total, gauss_bonnet_check(&m, &h, 8).unwrap().total);
        assert!((one.to_measure().total - one.total).abs() < 1e-14);
    }

    #[test]
    fn rejects_volumes() {
        let t = meshes::tetrahedra().build().unwrap();
        let m = ReggeMetric::induced(&t);
        assert_eq!(gauss_bonnet_check(&m, &t, 2), Err(GaussError::WrongDimension(3)));
    }
}
