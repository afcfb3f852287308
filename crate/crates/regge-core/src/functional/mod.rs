//! Frame-free distributional curvature functional.
//!
//! For a test field `A` the pairing is
//!
//! ```text
//!   Σ_T ∫_T ½ Σ R_{klij} A_{klij} dV
//! + Σ_e 2 ∫_e Σ [[II]](E_k, E_j) A(E_k, n, E_j, n) dS
//! + Σ_p 2 ∫_p Θ_p A(ν, n, ν, n) dV_p
//! ```
//!
//! with components over orthonormal frames, `n` the outward normal of the
//! designated side of a face, and `(ν, n)` an oriented orthonormal basis of
//! the plane normal to a hinge (`ν` tangent to a face of the fan). The
//! canonical Gauss field `½(g∧g)φ` turns this into
//! `∫Kφ + ∫[[k]]φ + Σ Θ_p φ(p)` on surfaces.
//!
//! Totals are summed sequentially in the order cells, faces, hinges, each in
//! ascending id, so results do not depend on the thread count.

pub mod exterior;
pub mod field;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::elemgeom::{
    angle_defect, christoffels_from, clamp_to_cell, face_frame_at, hinge_frame, riemann_from,
    second_fundamental_form_at, GeomError,
};
use crate::mesh::{MeshComplex, MeshError, QuadratureRule, Shape};
use crate::metric::expr::ExprError;
use crate::metric::{MetricError, ReggeMetric};
use exterior::{trace_wedge, Form};
pub use field::{transform4, FieldInput, FieldKind, TestFieldA};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FunctionalError {
    #[error("invalid test field: {0}")]
    InvalidField(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("{kind} {id}: {source}")]
    Term {
        kind: &'static str,
        id: usize,
        source: Box<FunctionalError>,
    },
}

impl FunctionalError {
    fn at(self, kind: &'static str, id: usize) -> FunctionalError {
        FunctionalError::Term {
            kind,
            id,
            source: Box::new(self),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TermValue {
    pub id: usize,
    pub value: f64,
}

/// Boundary parts of a pairing, filled by the surface path only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryTerms {
    pub faces: Vec<TermValue>,
    pub hinges: Vec<TermValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureMeasure {
    pub cells: Vec<TermValue>,
    pub faces: Vec<TermValue>,
    pub hinges: Vec<TermValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary: Option<BoundaryTerms>,
    pub total: f64,
    pub quadrature_degree: usize,
}

impl CurvatureMeasure {
    pub fn new(
        cells: Vec<TermValue>,
        faces: Vec<TermValue>,
        hinges: Vec<TermValue>,
        boundary: Option<BoundaryTerms>,
        quadrature_degree: usize,
    ) -> CurvatureMeasure {
        let mut m = CurvatureMeasure {
            cells,
            faces,
            hinges,
            boundary,
            total: 0.0,
            quadrature_degree,
        };
        m.total = m.sum_parts();
        m
    }

    /// Sequential sum of all parts in the documented order.
    pub fn sum_parts(&self) -> f64 {
        let mut total = 0.0;
        let mut add = |terms: &[TermValue]| {
            for t in terms {
                total += t.value;
            }
        };
        add(&self.cells);
        add(&self.faces);
        add(&self.hinges);
        if let Some(b) = &self.boundary {
            add(&b.faces);
            add(&b.hinges);
        }
        total
    }

    pub fn cell_total(&self) -> f64 {
        self.cells.iter().fold(0.0, |s, t| s + t.value)
    }

    pub fn face_total(&self) -> f64 {
        self.faces.iter().fold(0.0, |s, t| s + t.value)
    }

    pub fn hinge_total(&self) -> f64 {
        self.hinges.iter().fold(0.0, |s, t| s + t.value)
    }
}

/// Smooth orthogonal-matrix field `h(x)`: the Cayley transform of a skew
/// matrix with entries `c0 sin(c1 x1 + c2 x2 + c3 x3 + c4)`, optionally
/// followed by a reflection of the first axis.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationField {
    waves: Vec<[f64; 5]>,
    reflect: bool,
}

impl RotationField {
    /// One wave per skew entry, reused cyclically.
    pub fn new(waves: Vec<[f64; 5]>, reflect: bool) -> RotationField {
        assert!(!waves.is_empty(), "rotation field needs at least one wave");
        RotationField { waves, reflect }
    }

    /// `k × k` orthogonal matrix at the physical point `x`.
    pub fn at(&self, x: &[f64], k: usize) -> DMatrix<f64> {
        let coord = |i: usize| x.get(i).copied().unwrap_or(0.0);
        let mut skew = DMatrix::zeros(k, k);
        let mut w = 0;
        for a in 0..k {
            for b in a + 1..k {
                let c = &self.waves[w % self.waves.len()];
                w += 1;
                let v = c[0] * (c[1] * coord(0) + c[2] * coord(1) + c[3] * coord(2) + c[4]).sin();
                skew[(a, b)] = v;
                skew[(b, a)] = -v;
            }
        }
        let id = DMatrix::<f64>::identity(k, k);
        let mut q = (&id - &skew).try_inverse().expect("I − S is invertible for skew S") * (&id + &skew);
        if self.reflect && k > 0 {
            q.column_mut(0).neg_mut();
        }
        q
    }
}

/// Quadrature degree used when none is given: `2·degree + 4` for
/// polynomial metrics, 12 otherwise.
pub fn default_quadrature_degree(metric: &ReggeMetric) -> usize {
    metric.degree().map_or(12, |d| 2 * d + 4)
}

fn rule(shape: Shape, dim: usize, degree: usize) -> Result<QuadratureRule, FunctionalError> {
    Ok(QuadratureRule::new(shape, dim, degree)?)
}

/// Physical point and Jacobian (`m × n`) of a cell map.
fn placement(complex: &MeshComplex, cell: usize, xi: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>), FunctionalError> {
    let map = &complex.cell(cell).map;
    let x = map.point(xi)?;
    let rows = map.jacobian(xi)?;
    let jac = DMatrix::from_row_slice(rows.len(), complex.dim(), &rows.concat());
    Ok((x, jac))
}

/// `F = L^{-T}` for `g = L Lᵀ`, so that `Fᵀ g F = I`.
pub fn cholesky_frame(g: &DMatrix<f64>, cell: usize) -> Result<DMatrix<f64>, FunctionalError> {
    let chol = g.clone().cholesky().ok_or(GeomError::SingularMetric { cell })?;
    let linv = chol.l().try_inverse().ok_or(GeomError::SingularMetric { cell })?;
    Ok(linv.transpose())
}

fn gram_det(g: &DMatrix<f64>, axes: &[Vec<f64>]) -> f64 {
    if axes.is_empty() {
        return 1.0;
    }
    let a = DMatrix::from_columns(&axes.iter().map(|v| DVector::from_column_slice(v)).collect::<Vec<_>>());
    (a.transpose() * g * a).determinant()
}

fn at4(t: &[f64], n: usize, a: usize, b: usize, c: usize, d: usize) -> f64 {
    t[((a * n + b) * n + c) * n + d]
}

/// Frame components of `R` and `A` at a cell point.
struct CellPoint {
    riemann: Vec<f64>,
    field: Vec<f64>,
    n: usize,
}

impl CellPoint {
    fn integrand(&self) -> f64 {
        0.5 * self.riemann.iter().zip(&self.field).map(|(r, a)| r * a).sum::<f64>()
    }
}

fn cell_point(
    metric: &ReggeMetric,
    complex: &MeshComplex,
    cell: usize,
    xi: &[f64],
    field: &TestFieldA,
    gauge: Option<&RotationField>,
) -> Result<(CellPoint, f64), FunctionalError> {
    let n = complex.dim();
    let sample = metric.evaluate(cell, xi, 2)?;
    let riemann = riemann_from(&sample, cell)?;
    let (x, jac) = placement(complex, cell, xi)?;
    let mut frame = cholesky_frame(&sample.g, cell)?;
    if let Some(h) = gauge {
        frame *= h.at(&x, n);
    }
    let rf = riemann.in_basis(&frame);
    let mut r = vec![0.0; n.pow(4)];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    r[((i * n + j) * n + k) * n + l] = rf.get(i, j, k, l);
                }
            }
        }
    }
    let a = transform4(&field.reference_components(&sample.g, &x, &jac)?, n, &frame);
    let volume = sample.g.determinant().sqrt();
    Ok((
        CellPoint {
            riemann: r,
            field: a,
            n,
        },
        volume,
    ))
}

fn cell_value(
    metric: &ReggeMetric,
    complex: &MeshComplex,
    cell: usize,
    field: &TestFieldA,
    rule: &QuadratureRule,
    gauge: Option<&RotationField>,
) -> Result<f64, FunctionalError> {
    let mut total = 0.0;
    for (xi, w) in rule.points.iter().zip(&rule.weights) {
        let (p, vol) = cell_point(metric, complex, cell, xi, field, gauge)?;
        total += w * vol * p.integrand();
    }
    Ok(total)
}

/// `∫_T ½ Σ R(f_k,f_l,f_i,f_j) A(f_k,f_l,f_i,f_j) dV` over Cholesky frames.
pub fn cell_term(
    metric: &ReggeMetric,
    complex: &MeshComplex,
    cell: usize,
    field: &TestFieldA,
    rule: &QuadratureRule,
) -> Result<f64, FunctionalError> {
    cell_value(metric, complex, cell, field, rule, None)
}

/// Data of one side of a face at one face point.
struct FaceSide {
    cell: usize,
    xi: Vec<f64>,
    g: DMatrix<f64>,
    tangents: DMatrix<f64>,
    normal: DVector<f64>,
    ii: DMatrix<f64>,
}

fn face_side(
    metric: &ReggeMetric,
    complex: &MeshComplex,
    face: usize,
    side: usize,
    eta: &[f64],
) -> Result<FaceSide, FunctionalError> {
    let inc = &complex.faces()[face].incidences[side];
    let cell = inc.cell;
    let xi = clamp_to_cell(complex.cell(cell).shape, &inc.to_cell(eta));
    let sample = metric.evaluate(cell, &xi, 1)?;
    let gamma = christoffels_from(&sample, cell)?;
    let frame = face_frame_at(complex, face, cell, xi.clone(), sample.g.clone())?;
    let ii = second_fundamental_form_at(&frame, &gamma);
    let n = complex.dim();
    let tangents = if frame.tangents.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&frame.tangents)
    };
    Ok(FaceSide {
        cell,
        xi,
        g: sample.g,
        tangents,
        normal: frame.normal,
        ii,
    })
}

fn face_value(
    metric: &ReggeMetric,
    complex: &MeshComplex,
    face: usize,
    side: usize,
    field: &TestFieldA,
    rule: &QuadratureRule,
    gauge: Option<&RotationField>,
) -> Result<f64, FunctionalError> {
    let n = complex.dim();
    let f = &complex.faces()[face];
    if f.boundary || f.incidences.len() != 2 {
        return Err(GeomError::BoundaryFace { face }.into());
    }
    let mut total = 0.0;
    for (eta, w) in rule.points.iter().zip(&rule.weights) {
        let a = face_side(metric, complex, face, 0, eta)?;
        let b = face_side(metric, complex, face, 1, eta)?;
        let mut jump = &a.ii + &b.ii;
        let d = if side == 0 { a } else { b };
        let (x, jac) = placement(complex, d.cell, &d.xi)?;
        let mut tangents = d.tangents.clone();
        if let Some(h) = gauge {
            let q = h.at(&x, n - 1);
            tangents = &tangents * &q;
            jump = q.transpose() * jump * &q;
        }
        let mut cols: Vec<DVector<f64>> = tangents.column_iter().map(|c| c.into_owned()).collect();
        cols.push(d.normal.clone());
        let basis = DMatrix::from_columns(&cols);
        let af = transform4(&field.reference_components(&d.g, &x, &jac)?, n, &basis);
        let mut integrand = 0.0;
        for k in 0..n - 1 {
            for j in 0..n - 1 {
                integrand += jump[(k, j)] * at4(&af, n, k, n - 1, j, n - 1);
            }
        }
        let axes = &f.incidences[side].axes;
        total += w * 2.0 * integrand * gram_det(&d.g, axes).sqrt();
    }
    Ok(total)
}

/// `2 ∫_e Σ [[II]](E_k,E_j) A(E_k, n, E_j, n) dS` with the first incident
/// cell as the designated side.
pub fn face_term(
    metric: &ReggeMetric,
    complex: &MeshComplex,
    face: usize,
    field: &TestFieldA,
    rule: &QuadratureRule,
) -> Result<f64, FunctionalError> {
    face_value(metric, complex, face, 0, field, rule, None)
}

/// Face term with the designated side given by incidence index (0 or 1).
pub fn face_term_from_side(
    metric: &ReggeMetric,
    complex: &MeshComplex,
    face: usize,
    side: usize,
    field: &TestFieldA,
    rule: &QuadratureRule,
) -> Result<f64, FunctionalError> {
    face_value(metric, complex, face, side, field, rule, None)
}

fn hinge_value(
    metric: &ReggeMetric,
    complex: &MeshComplex,
    hinge: usize,
    cell: usize,
    field: &TestFieldA,
    rule: &QuadratureRule,
    gauge: Option<&RotationField>,
) -> Result<f64, FunctionalError> {
    let n = complex.dim();
    let h = &complex.hinges()[hinge];
    if h.boundary {
        return Err(GeomError::BoundaryHinge { hinge }.into());
    }
    let inc = h
        .incidence(cell)
        .ok_or(MeshError::NotIncident { polytope: hinge, cell })?;
    let mut total = 0.0;
    for (eta, w) in rule.points.iter().zip(&rule.weights) {
        let theta = angle_defect(metric, complex, hinge, eta)?;
        let hf = hinge_frame(metric, complex, hinge, cell, eta)?;
        let (x, jac) = placement(complex, cell, &hf.xi)?;
        let mut plane = DMatrix::from_columns(&[hf.nu.clone(), hf.normal.clone()]);
        if let Some(rot) = gauge {
            let q = rot.at(&x, 2);
            plane *= q;
        }
        let af = transform4(&field.reference_components(&hf.g, &x, &jac)?, n, &plane);
        total += w * 2.0 * theta * at4(&af, 2, 0, 1, 0, 1) * gram_det(&hf.g, &inc.axes).sqrt();
    }
    Ok(total)
}

/// `2 ∫_p Θ_p A(ν, n, ν, n) dV_p` using the frame of the first fan cell.
pub fn hinge_term(
    metric: &ReggeMetric,
    complex: &MeshComplex,
    hinge: usize,
    field: &TestFieldA,
    rule: &QuadratureRule,
) -> Result<f64, FunctionalError> {
    let cell = complex.hinge_fan(hinge)?.entries[0].cell;
    hinge_value(metric, complex, hinge, cell, field, rule, None)
}

/// Hinge term with the normal-plane frame taken in `cell`.
pub fn hinge_term_in(
    metric: &ReggeMetric,
    complex: &MeshComplex,
    hinge: usize,
    cell: usize,
    field: &TestFieldA,
    rule: &QuadratureRule,
) -> Result<f64, FunctionalError> {
    hinge_value(metric, complex, hinge, cell, field, rule, None)
}

fn collect(values: Vec<Result<(usize, f64), FunctionalError>>) -> Result<Vec<TermValue>, FunctionalError> {
    values
        .into_iter()
        .map(|r| r.map(|(id, value)| TermValue { id, value }))
        .collect()
}

fn assemble_impl(
    metric: &ReggeMetric,
    complex: &MeshComplex,
    field: &TestFieldA,
    quadrature_degree: usize,
    gauge: Option<&RotationField>,
) -> Result<CurvatureMeasure, FunctionalError> {
    let n = complex.dim();
    if metric.dim() != n || metric.num_cells() != complex.num_cells() {
        return Err(MetricError::InvalidInput("metric does not match the mesh".into()).into());
    }
    let q = quadrature_degree;
    let cells = collect(
        (0..complex.num_cells())
            .into_par_iter()
            .map(|c| {
                let r = rule(complex.cell(c).shape, n, q)?;
                cell_value(metric, complex, c, field, &r, gauge)
                    .map(|v| (c, v))
                    .map_err(|e| e.at("cell", c))
            })
            .collect(),
    )?;
    let interior_faces: Vec<usize> = (0..complex.faces().len())
        .filter(|&f| !complex.faces()[f].boundary)
        .collect();
    let faces = collect(
        interior_faces
            .par_iter()
            .map(|&f| {
                let r = rule(complex.faces()[f].shape, n - 1, q)?;
                face_value(metric, complex, f, 0, field, &r, gauge)
                    .map(|v| (f, v))
                    .map_err(|e| e.at("face", f))
            })
            .collect(),
    )?;
    let interior_hinges: Vec<usize> = if n >= 2 {
        (0..complex.hinges().len())
            .filter(|&h| !complex.hinges()[h].boundary)
            .collect()
    } else {
        Vec::new()
    };
    let hinges = collect(
        interior_hinges
            .par_iter()
            .map(|&h| {
                let r = rule(complex.hinges()[h].shape, n - 2, q)?;
                let cell = complex.hinge_fan(h)?.entries[0].cell;
                hinge_value(metric, complex, h, cell, field, &r, gauge)
                    .map(|v| (h, v))
                    .map_err(|e| e.at("hinge", h))
            })
            .collect(),
    )?;
    Ok(CurvatureMeasure::new(cells, faces, hinges, None, q))
}

/// Pair the distributional curvature with `field` over interior cells,
/// faces and hinges.
pub fn assemble(
    metric: &ReggeMetric,
    complex: &MeshComplex,
    field: &TestFieldA,
    quadrature_degree: usize,
) -> Result<CurvatureMeasure, FunctionalError> {
    assemble_impl(metric, complex, field, quadrature_degree, None)
}

/// Same pairing with every orthonormal frame replaced by a rotated one:
/// cell frames by `F·h`, face tangents by an `O(n−1)` field and hinge
/// normal planes by an `O(2)` field, all drawn from `gauge`.
pub fn assemble_with_gauge(
    metric: &ReggeMetric,
    complex: &MeshComplex,
    field: &TestFieldA,
    quadrature_degree: usize,
    gauge: &RotationField,
) -> Result<CurvatureMeasure, FunctionalError> {
    assemble_impl(metric, complex, field, quadrature_degree, Some(gauge))
}

/// Maximum discrepancies between the wedge-trace and contraction forms of
/// the three term families.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub cell_samples: usize,
    pub face_samples: usize,
    pub hinge_samples: usize,
    pub cell_discrepancy: f64,
    pub face_discrepancy: f64,
    pub hinge_discrepancy: f64,
    /// Largest change of a wedge-trace value under the frame rotation.
    pub gauge_discrepancy: f64,
    pub max_discrepancy: f64,
    /// Largest wedge-trace value seen, for scale.
    pub max_magnitude: f64,
}

/// `φ̂[i][j] = ½ Σ_{k,l} A(f_k, f_l, f_i, f_j) ⋆(f^k ∧ f^l)`.
fn test_form(a: &[f64], n: usize) -> Vec<Vec<Form>> {
    let stars: Vec<Vec<Form>> = (0..n)
        .map(|k| {
            (0..n)
                .map(|l| {
                    if k == l {
                        Form::zero(n)
                    } else {
                        Form::basis(n, &[k, l]).star()
                    }
                })
                .collect()
        })
        .collect();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut f = Form::zero(n);
                    for k in 0..n {
                        for l in 0..n {
                            f.add_scaled(0.5 * at4(a, n, k, l, i, j), &stars[k][l]);
                        }
                    }
                    f
                })
                .collect()
        })
        .collect()
}

fn restrict_all(m: &[Vec<Form>], k: usize) -> Vec<Vec<Form>> {
    m.iter()
        .map(|row| row.iter().map(|f| f.restrict(k)).collect())
        .collect()
}

/// Part 1: `⟨R̂ ∧ φ̂⟩` against `½ Σ ⟨R(f_k,f_l) f_i, f_j⟩ A_{klij}`; the
/// latter equals minus the cell integrand.
fn cell_identity(p: &CellPoint) -> (f64, f64) {
    let n = p.n;
    let r = &p.riemann;
    // ⟨R(f_c,f_d) f_i, f_j⟩ = R_{jicd}
    let curvature: Vec<Vec<Form>> = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| {
                    let mut f = Form::zero(n);
                    for c in 0..n {
                        for d in c + 1..n {
                            f.add_scaled(at4(r, n, j, i, c, d), &Form::basis(n, &[c, d]));
                        }
                    }
                    f
                })
                .collect()
        })
        .collect();
    let lhs = trace_wedge(&curvature, &test_form(&p.field, n)).top();
    let mut rhs = 0.0;
    for k in 0..n {
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    rhs += 0.5 * at4(r, n, j, i, k, l) * at4(&p.field, n, k, l, i, j);
                }
            }
        }
    }
    (lhs, rhs)
}

/// Part 2 on one side of a face: `⟨IÎ ∧ i*φ̂⟩` in units of the induced face
/// volume form against `2 Σ II(E_k,E_j) A(E_k, n, E_j, n)`.
fn face_identity(ii: &DMatrix<f64>, a: &[f64], n: usize) -> (f64, f64) {
    let k = n - 1;
    let shape: Vec<Vec<Form>> = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| {
                    let mut f = Form::zero(k);
                    for m in 0..k {
                        let c = if i == n - 1 && j < n - 1 {
                            ii[(m, j)]
                        } else if j == n - 1 && i < n - 1 {
                            -ii[(m, i)]
                        } else {
                            0.0
                        };
                        f.add_scaled(c, &Form::basis(k, &[m]));
                    }
                    f
                })
                .collect()
        })
        .collect();
    let phi = restrict_all(&test_form(a, n), k);
    let sign = if (n - 1).is_multiple_of(2) { 1.0 } else { -1.0 };
    let lhs = sign * trace_wedge(&shape, &phi).top();
    let mut rhs = 0.0;
    for kk in 0..k {
        for j in 0..k {
            rhs += 2.0 * ii[(kk, j)] * at4(a, n, kk, n - 1, j, n - 1);
        }
    }
    (lhs, rhs)
}

/// Part 3 at a hinge point: `⟨Θ̂ ∧ i*φ̂⟩` against `2Θ A(μ, ν, μ, ν)` with
/// `(μ, ν)` the last two frame vectors. The index order follows from
/// `φ^i_{jkl} = A(f_k, f_l, f_i, f_j)`; `A(μ, ν, ν, μ)` has the opposite sign.
fn hinge_identity(theta: f64, a: &[f64], n: usize) -> (f64, f64) {
    let k = n - 2;
    let mut defect: Vec<Vec<Form>> = (0..n).map(|_| (0..n).map(|_| Form::zero(k)).collect()).collect();
    defect[n - 1][n - 2] = {
        let mut f = Form::zero(k);
        f.add_scaled(theta, &Form::basis(k, &[]));
        f
    };
    defect[n - 2][n - 1] = {
        let mut f = Form::zero(k);
        f.add_scaled(-theta, &Form::basis(k, &[]));
        f
    };
    let phi = restrict_all(&test_form(a, n), k);
    let lhs = trace_wedge(&defect, &phi).top();
    let rhs = 2.0 * theta * at4(a, n, n - 2, n - 1, n - 2, n - 1);
    (lhs, rhs)
}

/// Evaluate both sides of the three term identities by explicit exterior
/// algebra over orthonormal frames: part 1 at the given cell points, part 2
/// on every side of every face and part 3 in every fan cell of every
/// interior hinge (at degree-2 quadrature points). With `gauge`, each
/// left side is also evaluated in the rotated frame and compared.
pub fn bruteforce_equivalence_check(
    metric: &ReggeMetric,
    complex: &MeshComplex,
    field: &TestFieldA,
    points: &[(usize, Vec<f64>)],
    gauge: Option<&RotationField>,
) -> Result<EquivalenceReport, FunctionalError> {
    let n = complex.dim();
    let mut rep = EquivalenceReport {
        cell_samples: 0,
        face_samples: 0,
        hinge_samples: 0,
        cell_discrepancy: 0.0,
        face_discrepancy: 0.0,
        hinge_discrepancy: 0.0,
        gauge_discrepancy: 0.0,
        max_discrepancy: 0.0,
        max_magnitude: 0.0,
    };
    let frames: Vec<Option<&RotationField>> = match gauge {
        Some(g) => vec![None, Some(g)],
        None => vec![None],
    };

    for (cell, xi) in points {
        let mut lhs_values = Vec::new();
        for &h in &frames {
            let (p, _) = cell_point(metric, complex, *cell, xi, field, h)?;
            let (lhs, rhs) = cell_identity(&p);
            let tied = (rhs + p.integrand()).abs();
            rep.cell_discrepancy = rep.cell_discrepancy.max((lhs - rhs).abs()).max(tied);
            rep.max_magnitude = rep.max_magnitude.max(lhs.abs());
            lhs_values.push(lhs);
        }
        rep.cell_samples += 1;
        gauge_update(&mut rep, &lhs_values);
    }

    for (face, f) in complex.faces().iter().enumerate() {
        let r = rule(f.shape, n - 1, 2)?;
        for eta in &r.points {
            for side in 0..f.incidences.len() {
                let s = face_side(metric, complex, face, side, eta)?;
                let (x, jac) = placement(complex, s.cell, &s.xi)?;
                let a_ref = field.reference_components(&s.g, &x, &jac)?;
                let mut lhs_values = Vec::new();
                for &h in &frames {
                    let q = h.map_or_else(|| DMatrix::identity(n - 1, n - 1), |h| h.at(&x, n - 1));
                    let tangents = &s.tangents * &q;
                    let ii = q.transpose() * &s.ii * &q;
                    let mut cols: Vec<DVector<f64>> = tangents.column_iter().map(|c| c.into_owned()).collect();
                    cols.push(s.normal.clone());
                    let af = transform4(&a_ref, n, &DMatrix::from_columns(&cols));
                    let (lhs, rhs) = face_identity(&ii, &af, n);
                    rep.face_discrepancy = rep.face_discrepancy.max((lhs - rhs).abs());
                    rep.max_magnitude = rep.max_magnitude.max(lhs.abs());
                    lhs_values.push(lhs);
                }
                rep.face_samples += 1;
                gauge_update(&mut rep, &lhs_values);
            }
        }
    }

    if n >= 2 {
        for (hinge, h) in complex.hinges().iter().enumerate() {
            if h.boundary {
                continue;
            }
            let r = rule(h.shape, n - 2, 2)?;
            for eta in &r.points {
                let theta = angle_defect(metric, complex, hinge, eta)?;
                for entry in &complex.hinge_fan(hinge)?.entries {
                    let hf = hinge_frame(metric, complex, hinge, entry.cell, eta)?;
                    let (x, jac) = placement(complex, entry.cell, &hf.xi)?;
                    let a_ref = field.reference_components(&hf.g, &x, &jac)?;
                    let mut lhs_values = Vec::new();
                    for &g in &frames {
                        let q = g.map_or_else(|| DMatrix::identity(2, 2), |g| g.at(&x, 2));
                        let plane = DMatrix::from_columns(&[hf.nu.clone(), hf.normal.clone()]) * q;
                        let mut cols = hf.tangents.clone();
                        cols.extend(plane.column_iter().map(|c| c.into_owned()));
                        let af = transform4(&a_ref, n, &DMatrix::from_columns(&cols));
                        let (lhs, rhs) = hinge_identity(theta, &af, n);
                        rep.hinge_discrepancy = rep.hinge_discrepancy.max((lhs - rhs).abs());
                        rep.max_magnitude = rep.max_magnitude.max(lhs.abs());
                        lhs_values.push(lhs);
                    }
                    rep.hinge_samples += 1;
                    gauge_update(&mut rep, &lhs_values);
                }
            }
        }
    }
    rep.max_discrepancy = rep
        .cell_discrepancy
        .max(rep.face_discrepancy)
        .max(rep.hinge_discrepancy);
    Ok(rep)
}

fn gauge_update(rep: &mut EquivalenceReport, values: &[f64]) {
    if values.len() == 2 {
        rep.gauge_discrepancy = rep.gauge_discrepancy.max((values[0] - values[1]).abs());
    }
}

#[cfg(test)]
mod tests;
