//! Regge metrics: per-cell symmetric positive definite matrix fields in
//! reference coordinates, with tangential-tangential continuity as a
//! checkable property.

pub mod expr;

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mesh::quadrature::gauss_legendre;
use crate::mesh::{CellMap, MeshComplex, MeshError, QuadratureRule, Shape};
use crate::poly::PolySpace;
use crate::taylor::{Jet, Scalar};
use expr::{coordinate_names, Expr, ExprError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error(transparent)]
    Parse(#[from] ExprError),
    #[error("metric expression is not symmetric at entry ({row}, {col})")]
    Asymmetric { row: usize, col: usize },
    #[error("cell {cell}: {msg}")]
    Evaluation { cell: usize, msg: String },
    #[error("cell {cell}: metric not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { cell: usize, min_eigenvalue: f64 },
    #[error("point {point:?} lies outside reference cell {cell}")]
    OutOfCell { cell: usize, point: Vec<f64> },
    #[error("invalid metric input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// A symmetric matrix of closed-form expressions in the coordinates
/// `x1..xm`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricExpression {
    entries: Vec<Vec<Expr>>,
}

impl MetricExpression {
    pub fn new(entries: Vec<Vec<Expr>>) -> Result<MetricExpression, MetricError> {
        let m = entries.len();
        if m == 0 || entries.iter().any(|r| r.len() != m) {
            return Err(MetricError::InvalidInput(
                "metric must be a non-empty square matrix".into(),
            ));
        }
        for i in 0..m {
            for j in i + 1..m {
                if entries[i][j] != entries[j][i] {
                    return Err(MetricError::Asymmetric { row: i, col: j });
                }
            }
        }
        Ok(MetricExpression { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> &Expr {
        &self.entries[i][j]
    }

    pub fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<Vec<S>>, ExprError> {
        self.entries
            .iter()
            .map(|row| row.iter().map(|e| e.eval(x)).collect())
            .collect()
    }

    /// Entry-wise symbolic derivative in `x_{var+1}`.
    pub fn diff(&self, var: usize) -> MetricExpression {
        MetricExpression {
            entries: self
                .entries
                .iter()
                .map(|row| row.iter().map(|e| e.diff(var)).collect())
                .collect(),
        }
    }
}

impl fmt::Display for MetricExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = coordinate_names("x", self.dim().max(3));
        write!(f, "[")?;
        for (i, row) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "[")?;
            for (j, e) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", e.display_with(&names))?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// Parse a bracketed matrix such as `[[1,0],[0,sin(x1)^2]]`. Coordinates are
/// `x1..xm` with `m` the matrix size.
pub fn parse_metric_expression(text: &str) -> Result<MetricExpression, MetricError> {
    let rows = text.matches('[').count().saturating_sub(1).max(1);
    let names = coordinate_names("x", rows);
    MetricExpression::new(Expr::parse_matrix(text, &names)?)
}

/// Build from a table of entry strings.
pub fn metric_expression_from_entries(entries: &[Vec<String>]) -> Result<MetricExpression, MetricError> {
    let names = coordinate_names("x", entries.len());
    let parsed = entries
        .iter()
        .map(|row| {
            row.iter()
                .map(|s| Expr::parse(s, &names))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    MetricExpression::new(parsed)
}

#[derive(Debug, Clone)]
enum CellMetric {
    /// Polynomial entries `coefs[i * n + j]` over `space`.
    Poly { space: PolySpace, coefs: Vec<Vec<f64>> },
    /// Exact pullback `Jᵀ g(x(ξ)) J` of an ambient metric expression.
    Pullback { map: CellMap, expr: Arc<MetricExpression> },
    /// Pullback of the ambient Euclidean metric.
    Induced { map: CellMap },
}

/// Metric and derivatives in the reference coordinates of a cell:
/// `dg[k] = ∂_k g`, `d2g[k][l] = ∂_k ∂_l g`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSample {
    pub g: DMatrix<f64>,
    pub dg: Vec<DMatrix<f64>>,
    pub d2g: Vec<Vec<DMatrix<f64>>>,
}

#[derive(Debug, Clone)]
pub struct ReggeMetric {
    dim: usize,
    shapes: Vec<Shape>,
    cells: Vec<CellMetric>,
    source: Option<String>,
}

impl ReggeMetric {
    /// Polynomial metric from monomial terms per cell: `(exponents, n×n
    /// coefficient matrix)`.
    pub fn polynomial(
        complex: &MeshComplex,
        terms: &[Vec<(Vec<u8>, Vec<Vec<f64>>)>],
    ) -> Result<ReggeMetric, MetricError> {
        let n = complex.dim();
        if terms.len() != complex.num_cells() {
            return Err(MetricError::InvalidInput(format!(
                "{} cell metrics for {} cells",
                terms.len(),
                complex.num_cells()
            )));
        }
        let mut cells = Vec::with_capacity(terms.len());
        for (c, cell_terms) in terms.iter().enumerate() {
            let degree = cell_terms
                .iter()
                .map(|(e, _)| e.iter().map(|&k| k as usize).sum::<usize>())
                .max()
                .unwrap_or(0);
            let space = PolySpace::new(Shape::Simplex, n, degree);
            let mut coefs = vec![vec![0.0; space.len()]; n * n];
            for (e, mat) in cell_terms {
                if e.len() != n || mat.len() != n || mat.iter().any(|r| r.len() != n) {
                    return Err(MetricError::InvalidInput(format!("cell {c}: term has wrong shape")));
                }
                let k = space.exps.iter().position(|x| x == e).expect("monomial in space");
                for i in 0..n {
                    for j in 0..n {
                        if (mat[i][j] - mat[j][i]).abs() > 1e-14 * (1.0 + mat[i][j].abs()) {
                            return Err(MetricError::Asymmetric { row: i, col: j });
                        }
                        coefs[i * n + j][k] += mat[i][j];
                    }
                }
            }
            cells.push(CellMetric::Poly { space, coefs });
        }
        Ok(ReggeMetric {
            dim: n,
            shapes: complex.cells().iter().map(|c| c.shape).collect(),
            cells,
            source: None,
        })
    }

    /// The same constant matrix on every cell, in reference coordinates.
    pub fn constant(complex: &MeshComplex, g: &[Vec<f64>]) -> Result<ReggeMetric, MetricError> {
        let n = complex.dim();
        let terms = vec![vec![(vec![0u8; n], g.to_vec())]; complex.num_cells()];
        ReggeMetric::polynomial(complex, &terms)
    }

    /// Exact pullback of an expression in ambient coordinates.
    pub fn from_expression(complex: &MeshComplex, expr: &MetricExpression) -> Result<ReggeMetric, MetricError> {
        if expr.dim() != complex.ambient_dim() {
            return Err(MetricError::InvalidInput(format!(
                "metric is {0}×{0} but vertices have {1} coordinates",
                expr.dim(),
                complex.ambient_dim()
            )));
        }
        let shared = Arc::new(expr.clone());
        Ok(ReggeMetric {
            dim: complex.dim(),
            shapes: complex.cells().iter().map(|c| c.shape).collect(),
            cells: complex
                .cells()
                .iter()
                .map(|c| CellMetric::Pullback {
                    map: c.map.clone(),
                    expr: shared.clone(),
                })
                .collect(),
            source: Some(expr.to_string()),
        })
    }

    /// Metric induced by the ambient Euclidean metric through the cell maps.
    pub fn induced(complex: &MeshComplex) -> ReggeMetric {
        ReggeMetric {
            dim: complex.dim(),
            shapes: complex.cells().iter().map(|c| c.shape).collect(),
            cells: complex
                .cells()
                .iter()
                .map(|c| CellMetric::Induced { map: c.map.clone() })
                .collect(),
            source: Some("induced".into()),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    /// Expression text this metric was built from, if any.
    pub fn source(&self) -> Option<&str> {
        self.source.as_deref()
    }

    /// Highest polynomial degree over cells; `None` for exact closed-form data.
    pub fn degree(&self) -> Option<usize> {
        let mut d = 0;
        for c in &self.cells {
            match c {
                CellMetric::Poly { space, .. } => d = d.max(space.degree),
                _ => return None,
            }
        }
        Some(d)
    }

    /// Whether the cell metric is a polynomial in reference coordinates.
    pub fn is_polynomial(&self) -> bool {
        self.degree().is_some()
    }

    /// Cellwise sum of two polynomial metrics on the same mesh, represented
    /// at the larger of the two degrees.
    pub fn sum(&self, other: &ReggeMetric) -> Result<ReggeMetric, MetricError> {
        if self.dim != other.dim || self.shapes != other.shapes {
            return Err(MetricError::InvalidInput(
                "summed metrics live on different meshes".into(),
            ));
        }
        let (Some(da), Some(db)) = (self.degree(), other.degree()) else {
            return Err(MetricError::InvalidInput(
                "only polynomial metrics can be summed".into(),
            ));
        };
        let d = da.max(db);
        let (a, b) = (self.interpolate(d)?, other.interpolate(d)?);
        let cells = a
            .cells
            .into_iter()
            .zip(b.cells)
            .map(|(x, y)| match (x, y) {
                (CellMetric::Poly { space, coefs }, CellMetric::Poly { coefs: other, .. }) => {
                    let coefs = coefs
                        .iter()
                        .zip(&other)
                        .map(|(p, q)| p.iter().zip(q).map(|(u, v)| u + v).collect())
                        .collect();
                    CellMetric::Poly { space, coefs }
                }
                _ => unreachable!("interpolation yields polynomial cells"),
            })
            .collect();
        Ok(ReggeMetric {
            dim: self.dim,
            shapes: self.shapes.clone(),
            cells,
            source: None,
        })
    }

    fn poly_entries<S: Scalar>(space: &PolySpace, coefs: &[Vec<f64>], n: usize, xi: &[S]) -> Vec<Vec<S>> {
        (0..n)
            .map(|i| (0..n).map(|j| space.eval(&coefs[i * n + j], xi)).collect())
            .collect()
    }

    /// Entries of the cell metric as Taylor jets of the given order at `xi`.
    pub fn jets(&self, cell: usize, xi: &[f64], order: usize) -> Result<Vec<Vec<Jet>>, MetricError> {
        let n = self.dim;
        let vars = Jet::variables(xi, order);
        let eval_err = |msg: String| MetricError::Evaluation { cell, msg };
        match &self.cells[cell] {
            CellMetric::Poly { space, coefs } => Ok(Self::poly_entries(space, coefs, n, &vars)),
            CellMetric::Induced { map } | CellMetric::Pullback { map, .. } => {
                let x = map
                    .eval(&Jet::variables(xi, order + 1))
                    .map_err(|e| eval_err(e.to_string()))?;
                let jac: Vec<Vec<Jet>> = x.iter().map(|xa| (0..n).map(|i| xa.derivative(i)).collect()).collect();
                let m = x.len();
                let g: Option<Vec<Vec<Jet>>> = match &self.cells[cell] {
                    CellMetric::Pullback { expr, .. } => Some(expr.eval(&x).map_err(|e| eval_err(e.to_string()))?),
                    _ => None,
                };
                let mut out = vec![vec![Jet::constant(0.0); n]; n];
                for i in 0..n {
                    for j in i..n {
                        let mut acc = Jet::constant(0.0);
                        for a in 0..m {
                            match &g {
                                None => acc = acc + jac[a][i] * jac[a][j],
                                Some(g) => {
                                    for b in 0..m {
                                        if g[a][b].value() == 0.0 && g[a][b].order() == 0 {
                                            continue;
                                        }
                                        acc = acc + jac[a][i] * g[a][b] * jac[b][j];
                                    }
                                }
                            }
                        }
                        let acc = acc.truncate(order);
                        out[i][j] = acc;
                        out[j][i] = acc;
                    }
                }
                Ok(out)
            }
        }
    }

    fn check_in_cell(&self, cell: usize, xi: &[f64]) -> Result<(), MetricError> {
        let tol = 1e-12;
        let inside = xi.len() == self.dim
            && xi.iter().all(|&x| x >= -tol)
            && match self.shapes[cell] {
                Shape::Simplex => xi.iter().sum::<f64>() <= 1.0 + tol,
                Shape::Box => xi.iter().all(|&x| x <= 1.0 + tol),
            };
        if inside {
            Ok(())
        } else {
            Err(MetricError::OutOfCell {
                cell,
                point: xi.to_vec(),
            })
        }
    }

    /// Metric value in reference coordinates.
    pub fn value(&self, cell: usize, xi: &[f64]) -> Result<DMatrix<f64>, MetricError> {
        Ok(self.evaluate(cell, xi, 0)?.g)
    }

    /// Metric and derivatives up to `order` (0, 1 or 2) in reference
    /// coordinates of `cell`.
    pub fn evaluate(&self, cell: usize, xi: &[f64], order: usize) -> Result<MetricSample, MetricError> {
        self.check_in_cell(cell, xi)?;
        let jets = self.jets(cell, xi, order.min(2))?;
        Ok(sample_from_jets(&jets, self.dim, order))
    }

    /// Metric and derivatives in the chart coordinates of the physical
    /// point `x(xi)`; needs as many ambient coordinates as cell dimensions.
    pub fn evaluate_chart(
        &self,
        complex: &MeshComplex,
        cell: usize,
        xi: &[f64],
        order: usize,
    ) -> Result<MetricSample, MetricError> {
        self.check_in_cell(cell, xi)?;
        let n = self.dim;
        if complex.ambient_dim() != n {
            return Err(MetricError::InvalidInput(
                "chart evaluation needs ambient dimension = cell dimension".into(),
            ));
        }
        let order = order.min(2);
        let map = &complex.cell(cell).map;
        let jac = DMatrix::from_vec(n, n, map.jacobian(xi)?.concat()).transpose();
        let jinv = jac.try_inverse().ok_or_else(|| MetricError::Evaluation {
            cell,
            msg: "singular geometry map".into(),
        })?;
        // Inverse map ξ(x) as jets in x by Newton iteration; each step gains
        // one order.
        let x0 = map.point(xi)?;
        let xv = Jet::variables(&x0, order + 1);
        let mut xi_of_x: Vec<Jet> = (0..n).map(|i| Jet::constant(xi[i])).collect();
        for _ in 0..=order + 1 {
            let resid: Vec<Jet> = map.eval(&xi_of_x)?.iter().zip(&xv).map(|(a, b)| *a - *b).collect();
            for i in 0..n {
                for a in 0..n {
                    xi_of_x[i] = xi_of_x[i] - resid[a].scale(jinv[(i, a)]);
                }
            }
        }
        let gref = self.jets(cell, xi, order)?;
        let jet_g: Vec<Vec<Jet>> = gref
            .iter()
            .map(|row| row.iter().map(|e| e.substitute(&xi_of_x)).collect())
            .collect();
        // ∂ξ/∂x as jets in x
        let dxi: Vec<Vec<Jet>> = xi_of_x
            .iter()
            .map(|f| (0..n).map(|a| f.derivative(a)).collect())
            .collect();
        let mut chart = vec![vec![Jet::constant(0.0); n]; n];
        for a in 0..n {
            for b in 0..n {
                let mut acc = Jet::constant(0.0);
                for i in 0..n {
                    for j in 0..n {
                        acc = acc + dxi[i][a] * jet_g[i][j] * dxi[j][b];
                    }
                }
                chart[a][b] = acc.truncate(order);
            }
        }
        Ok(sample_from_jets(&chart, n, order))
    }

    /// Smallest eigenvalue of the metric over the quadrature points of each
    /// cell; errors if any is ≤ 1e-10.
    pub fn check_positive_definite(&self, quadrature_degree: usize) -> Result<f64, MetricError> {
        let mut lowest = f64::INFINITY;
        for c in 0..self.cells.len() {
            let rule = QuadratureRule::new(self.shapes[c], self.dim, quadrature_degree)?;
            for p in &rule.points {
                let g = self.value(c, p)?;
                let min = SymmetricEigen::new(g).eigenvalues.min();
                if !(min > 1e-10) {
                    return Err(MetricError::NotPositiveDefinite {
                        cell: c,
                        min_eigenvalue: min,
                    });
                }
                lowest = lowest.min(min);
            }
        }
        Ok(lowest)
    }

    /// Polynomial interpolant of degree `degree` at the equispaced nodes of
    /// every cell. At degree 0 on simplices the nodes are the edges: the
    /// constant metric reproduces the mean of `g(t, t)` along each edge, so
    /// tangential-tangential components stay continuous.
    pub fn interpolate(&self, degree: usize) -> Result<ReggeMetric, MetricError> {
        let n = self.dim;
        let mut cells = Vec::with_capacity(self.cells.len());
        for c in 0..self.cells.len() {
            let space = PolySpace::new(self.shapes[c], n, degree);
            let values = if degree == 0 && self.shapes[c] == Shape::Simplex {
                vec![self.edge_constant(c)?]
            } else {
                space
                    .nodes()
                    .iter()
                    .map(|p| {
                        let g = self.jets(c, p, 0)?;
                        Ok((0..n * n).map(|k| g[k / n][k % n].value()).collect())
                    })
                    .collect::<Result<Vec<Vec<f64>>, MetricError>>()?
            };
            if values.iter().flatten().any(|v| !v.is_finite()) {
                return Err(MetricError::Evaluation {
                    cell: c,
                    msg: "non-finite metric value at an interpolation node".into(),
                });
            }
            let coefs = space.interpolate(&values);
            cells.push(CellMetric::Poly { space, coefs });
        }
        Ok(ReggeMetric {
            dim: n,
            shapes: self.shapes.clone(),
            cells,
            source: self.source.clone(),
        })
    }
}

impl ReggeMetric {
    /// Constant symmetric matrix (row-major) whose edge lengths squared match
    /// the edge means of `g(t, t)` on simplex cell `cell`.
    fn edge_constant(&self, cell: usize) -> Result<Vec<f64>, MetricError> {
        let n = self.dim;
        let (nodes, weights) = gauss_legendre(12);
        let vertices: Vec<Vec<f64>> = (0..=n).map(|v| Shape::Simplex.ref_vertex(n, v)).collect();
        let unknowns: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
        let mut system = DMatrix::zeros(unknowns.len(), unknowns.len());
        let mut rhs = nalgebra::DVector::zeros(unknowns.len());
        let mut row = 0;
        for a in 0..=n {
            for b in a + 1..=n {
                let t: Vec<f64> = vertices[b].iter().zip(&vertices[a]).map(|(p, q)| p - q).collect();
                let mut mean = 0.0;
                for (s, w) in nodes.iter().zip(&weights) {
                    let xi: Vec<f64> = vertices[a].iter().zip(&t).map(|(p, d)| p + s * d).collect();
                    let g = self.value(cell, &xi)?;
                    mean += w
                        * (0..n)
                            .flat_map(|i| (0..n).map(move |j| (i, j)))
                            .map(|(i, j)| t[i] * g[(i, j)] * t[j])
                            .sum::<f64>();
                }
                for (col, &(i, j)) in unknowns.iter().enumerate() {
                    system[(row, col)] = if i == j { t[i] * t[i] } else { 2.0 * t[i] * t[j] };
                }
                rhs[row] = mean;
                row += 1;
            }
        }
        let sol = system.lu().solve(&rhs).ok_or_else(|| MetricError::Evaluation {
            cell,
            msg: "edge vectors do not determine a constant metric".into(),
        })?;
        let mut out = vec![0.0; n * n];
        for (&(i, j), v) in unknowns.iter().zip(sol.iter()) {
            out[i * n + j] = *v;
            out[j * n + i] = *v;
        }
        Ok(out)
    }
}

fn sample_from_jets(jets: &[Vec<Jet>], n: usize, order: usize) -> MetricSample {
    let g = DMatrix::from_fn(n, n, |i, j| jets[i][j].value());
    let dg = if order >= 1 {
        (0..n)
            .map(|k| DMatrix::from_fn(n, n, |i, j| jets[i][j].d1(k)))
            .collect()
    } else {
        Vec::new()
    };
    let d2g = if order >= 2 {
        (0..n)
            .map(|k| {
                (0..n)
                    .map(|l| DMatrix::from_fn(n, n, |i, j| jets[i][j].d2(k, l)))
                    .collect()
            })
            .collect()
    } else {
        Vec::new()
    };
    MetricSample { g, dg, d2g }
}

/// Interpolate the pullback of `expression` on every cell at degree `degree`.
pub fn interpolate(
    expression: &MetricExpression,
    complex: &MeshComplex,
    degree: usize,
) -> Result<ReggeMetric, MetricError> {
    ReggeMetric::from_expression(complex, expression)?.interpolate(degree)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FaceResidual {
    pub face: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TtReport {
    pub faces: Vec<FaceResidual>,
    pub max_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Tangential-tangential residual `max |g_T(u_i,u_j) − g_T'(u_i,u_j)|` on
/// every interior face, over a face quadrature set and the face's
/// parametrisation tangents.
pub fn check_tt_continuity(
    metric: &ReggeMetric,
    complex: &MeshComplex,
    tol: f64,
    quadrature_degree: usize,
) -> Result<TtReport, MetricError> {
    let n = complex.dim();
    let mut faces = Vec::new();
    for (f, face) in complex.faces().iter().enumerate() {
        if face.incidences.len() != 2 {
            continue;
        }
        let rule = QuadratureRule::new(face.shape, n - 1, quadrature_degree)?;
        let mut worst: f64 = 0.0;
        for eta in &rule.points {
            let mut tangential = Vec::with_capacity(2);
            for inc in &face.incidences {
                let g = metric.value(inc.cell, &clamp(&inc.to_cell(eta)))?;
                let t: Vec<Vec<f64>> = inc
                    .axes
                    .iter()
                    .map(|u| {
                        inc.axes
                            .iter()
                            .map(|v| {
                                let mut s = 0.0;
                                for i in 0..n {
                                    for j in 0..n {
                                        s += u[i] * g[(i, j)] * v[j];
                                    }
                                }
                                s
                            })
                            .collect()
                    })
                    .collect();
                tangential.push(t);
            }
            for (ra, rb) in tangential[0].iter().zip(&tangential[1]) {
                for (a, b) in ra.iter().zip(rb) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
        faces.push(FaceResidual {
            face: f,
            residual: worst,
        });
    }
    let max_residual = faces.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(TtReport {
        faces,
        max_residual,
        tol,
        pass: max_residual <= tol,
    })
}

fn clamp(xi: &[f64]) -> Vec<f64> {
    xi.iter().map(|&x| x.clamp(0.0, 1.0)).collect()
}

/// Metric input as JSON.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MetricInput {
    /// Closed-form entries in ambient coordinates, either as a matrix of
    /// strings or as one bracketed text. With `degree` the pullback is
    /// interpolated, otherwise it is used exactly.
    Expression {
        #[serde(default)]
        entries: Option<Vec<Vec<String>>>,
        #[serde(default)]
        text: Option<String>,
        #[serde(default)]
        degree: Option<usize>,
    },
    /// Per-cell polynomial terms in reference coordinates.
    Coefficients { per_cell: Vec<CellTerms> },
    /// The metric induced by the ambient Euclidean metric.
    #[serde(alias = "flat")]
    Induced,
}

#[derive(Debug, Clone, Deserialize)]
pub struct CellTerms {
    pub terms: Vec<Term>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Term {
    pub exp: Vec<u8>,
    pub coeffs: Vec<Vec<f64>>,
}

impl MetricInput {
    pub fn from_json(text: &str) -> Result<MetricInput, MetricError> {
        serde_json::from_str(text).map_err(|e| MetricError::InvalidInput(e.to_string()))
    }

    pub fn build(&self, complex: &MeshComplex) -> Result<ReggeMetric, MetricError> {
        match self {
            MetricInput::Expression { entries, text, degree } => {
                let expr = match (entries, text) {
                    (Some(e), None) => metric_expression_from_entries(e)?,
                    (None, Some(t)) => parse_metric_expression(t)?,
                    _ => {
                        return Err(MetricError::InvalidInput(
                            "expression metric needs exactly one of `entries` or `text`".into(),
                        ))
                    }
                };
                match degree {
                    Some(d) => interpolate(&expr, complex, *d),
                    None => ReggeMetric::from_expression(complex, &expr),
                }
            }
            MetricInput::Coefficients { per_cell } => {
                let terms: Vec<Vec<(Vec<u8>, Vec<Vec<f64>>)>> = per_cell
                    .iter()
                    .map(|c| c.terms.iter().map(|t| (t.exp.clone(), t.coeffs.clone())).collect())
                    .collect();
                ReggeMetric::polynomial(complex, &terms)
            }
            MetricInput::Induced => Ok(ReggeMetric::induced(complex)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_complex, CellSpec};

    fn tri(verts: Vec<Vec<f64>>) -> MeshComplex {
        build_complex(
            2,
            verts,
            vec![CellSpec {
                shape: Shape::Simplex,
                verts: vec![0, 1, 2],
                map: None,
            }],
            &[],
        )
        .unwrap()
    }

    #[test]
    fn parse_identity_and_sphere() {
        let id = parse_metric_expression("[[1,0],[0,1]]").unwrap();
        assert_eq!(id.dim(), 2);
        let s = parse_metric_expression("[[1,0],[0,sin(x1)^2]]").unwrap();
        let g = s.eval(&[std::f64::consts::FRAC_PI_2, 0.0]).unwrap();
        assert_eq!(g, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let reparsed = parse_metric_expression(&s.to_string()).unwrap();
        assert_eq!(reparsed, s);
    }

    #[test]
    fn parse_errors() {
        match parse_metric_expression("[[1,0],[0,sin(x1)]") {
            Err(MetricError::Parse(ExprError::Syntax { pos, .. })) => assert_eq!(pos, 18),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_metric_expression("[[1,y],[y,1]]"),
            Err(MetricError::Parse(ExprError::UnknownSymbol { .. }))
        ));
        assert!(matches!(
            parse_metric_expression("[[1,x1],[0,1]]"),
            Err(MetricError::Asymmetric { row: 0, col: 1 })
        ));
    }

    #[test]
    fn sphere_chart_derivatives() {
        let half = std::f64::consts::FRAC_PI_2;
        let m = tri(vec![vec![half, 0.0], vec![half + 0.3, 0.0], vec![half, 0.3]]);
        let s = parse_metric_expression("[[1,0],[0,sin(x1)^2]]").unwrap();
        let metric = ReggeMetric::from_expression(&m, &s).unwrap();
        let e = metric.evaluate_chart(&m, 0, &[0.0, 0.0], 2).unwrap();
        assert!((e.g[(1, 1)] - 1.0).abs() < 1e-15);
        assert!(e.dg[0][(1, 1)].abs() < 1e-15);
        assert!((e.d2g[0][0][(1, 1)] + 2.0).abs() < 1e-13);
        let r = metric.evaluate(0, &[0.0, 0.0], 2).unwrap();
        assert!((r.d2g[0][0][(1, 1)] + 2.0 * 0.09 * 0.09).abs() < 1e-13);
        assert!(matches!(
            metric.evaluate(0, &[0.8, 0.8], 0),
            Err(MetricError::OutOfCell { .. })
        ));
    }

    #[test]
    fn chart_evaluation_on_sheared_cell() {
        // Affine but non-diagonal map, quadratic metric: chart values must
        // match direct evaluation of the expression.
        let m = tri(vec![vec![0.2, 0.1], vec![1.1, 0.4], vec![0.5, 1.3]]);
        let s = parse_metric_expression("[[1+x1^2,x1*x2],[x1*x2,2+x2^2]]").unwrap();
        let metric = ReggeMetric::from_expression(&m, &s).unwrap();
        let xi = [0.3, 0.2];
        let x = m.cell(0).map.point(&xi).unwrap();
        let e = metric.evaluate_chart(&m, 0, &xi, 2).unwrap();
        assert!((e.g[(0, 1)] - x[0] * x[1]).abs() < 1e-13);
        assert!((e.dg[1][(0, 1)] - x[0]).abs() < 1e-13);
        assert!((e.d2g[0][1][(0, 1)] - 1.0).abs() < 1e-12);
        assert!((e.d2g[0][0][(0, 0)] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn identity_interpolates_exactly() {
        let m = tri(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]);
        let id = parse_metric_expression("[[1,0],[0,1]]").unwrap();
        for d in 0..4 {
            let g = interpolate(&id, &m, d).unwrap();
            let e = g.evaluate(0, &[0.3, 0.4], 2).unwrap();
            assert!((e.g.clone() - DMatrix::identity(2, 2)).abs().max() < 1e-13);
            assert!(e.dg.iter().all(|d| d.abs().max() < 1e-12));
        }
    }

    #[test]
    fn interpolation_of_quadratic_is_exact() {
        let m = tri(vec![vec![0.0, 0.0], vec![2.0, 0.5], vec![0.3, 1.0]]);
        let s = parse_metric_expression("[[1+x1^2,x1*x2],[x1*x2,2+x2^2-x1*x2/4]]").unwrap();
        let exact = ReggeMetric::from_expression(&m, &s).unwrap();
        let interp = exact.interpolate(2).unwrap();
        for p in [[0.1, 0.1], [0.5, 0.2], [0.05, 0.9]] {
            let d = exact.value(0, &p).unwrap() - interp.value(0, &p).unwrap();
            assert!(d.abs().max() < 1e-12);
        }
        let again = interp.interpolate(2).unwrap();
        let d = again.value(0, &[0.2, 0.3]).unwrap() - interp.value(0, &[0.2, 0.3]).unwrap();
        assert!(d.abs().max() < 1e-13);
    }

    #[test]
    fn lowest_order_interpolant_keeps_edge_lengths() {
        let text = "[[1.5 + 0.2*x1*x2*x3, 0.1*x2, 0.05*x1^2], [0.1*x2, 1.5 - 0.3*x3^2, 0.2*x1], [0.05*x1^2, 0.2*x1, 1.5 + 0.3*x1*x2]]";
        let ball = crate::meshes::octahedral_ball().build().unwrap();
        let g0 = interpolate(&parse_metric_expression(text).unwrap(), &ball, 0).unwrap();
        assert!(check_tt_continuity(&g0, &ball, 1e-12, 4).unwrap().pass);
        // Normal components do jump.
        let c = ball.faces().iter().position(|f| !f.boundary).unwrap();
        let cells = ball.faces()[c].cells();
        let (a, b) = (
            g0.value(cells[0], &[0.2, 0.2, 0.2]).unwrap(),
            g0.value(cells[1], &[0.2, 0.2, 0.2]).unwrap(),
        );
        assert!((a - b).abs().max() > 1e-4);

        let hex = crate::meshes::hexagon([0.1, 0.0], 1.0).build().unwrap();
        let s = parse_metric_expression("[[1 + x1^2, 0.5*x2], [0.5*x2, 1 + 2*x2^2 + x1]]").unwrap();
        let h0 = interpolate(&s, &hex, 0).unwrap();
        assert!(check_tt_continuity(&h0, &hex, 1e-12, 4).unwrap().pass);
        // A constant metric is reproduced.
        let k = parse_metric_expression("[[2, 0.3], [0.3, 1]]").unwrap();
        let k0 = interpolate(&k, &hex, 0).unwrap();
        let d = k0.value(2, &[0.1, 0.6]).unwrap()
            - ReggeMetric::from_expression(&hex, &k)
                .unwrap()
                .value(2, &[0.1, 0.6])
                .unwrap();
        assert!(d.abs().max() < 1e-13);
    }

    #[test]
    fn sum_of_metrics() {
        let hex = crate::meshes::hexagon([0.1, 0.0], 1.0).build().unwrap();
        let a = interpolate(
            &parse_metric_expression("[[1 + x1^2, 0.5*x2], [0.5*x2, 1 + x1]]").unwrap(),
            &hex,
            0,
        )
        .unwrap();
        let b = interpolate(
            &parse_metric_expression("[[x2^2, 0], [0, 0.5 + x1*x2]]").unwrap(),
            &hex,
            2,
        )
        .unwrap();
        let s = a.sum(&b).unwrap();
        assert_eq!(s.degree(), Some(2));
        let xi = [0.3, 0.25];
        let d = s.value(4, &xi).unwrap() - a.value(4, &xi).unwrap() - b.value(4, &xi).unwrap();
        assert!(d.abs().max() < 1e-13);
        assert!(check_tt_continuity(&s, &hex, 1e-12, 4).unwrap().pass);
        assert!(a.sum(&ReggeMetric::induced(&hex)).is_err());
    }

    #[test]
    fn tangential_continuity_examples() {
        // Edge (0,0)-(1,0) shared with a cell whose first reference axis
        // runs along it; then an edge along the second axis.
        let along_first = build_complex(
            2,
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, -1.0]],
            vec![
                CellSpec {
                    shape: Shape::Simplex,
                    verts: vec![0, 1, 2],
                    map: None,
                },
                CellSpec {
                    shape: Shape::Simplex,
                    verts: vec![1, 0, 3],
                    map: None,
                },
            ],
            &[],
        )
        .unwrap();
        let id = vec![vec![(vec![0, 0], vec![vec![1.0, 0.0], vec![0.0, 1.0]])]];
        let stretched = vec![(vec![0, 0], vec![vec![1.0, 0.0], vec![0.0, 4.0]])];
        let terms = [id.clone(), vec![stretched.clone()]].concat();
        let g = ReggeMetric::polynomial(&along_first, &terms).unwrap();
        let r = check_tt_continuity(&g, &along_first, 1e-10, 4).unwrap();
        assert!(r.pass && r.max_residual < 1e-15);

        let along_second = build_complex(
            2,
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 1.0]],
            vec![
                CellSpec {
                    shape: Shape::Simplex,
                    verts: vec![0, 1, 2],
                    map: None,
                },
                CellSpec {
                    shape: Shape::Simplex,
                    verts: vec![2, 3, 0],
                    map: None,
                },
            ],
            &[],
        )
        .unwrap();
        let terms = [id, vec![stretched]].concat();
        let g = ReggeMetric::polynomial(&along_second, &terms).unwrap();
        let r = check_tt_continuity(&g, &along_second, 1e-10, 4).unwrap();
        assert!(!r.pass);
        assert!((r.max_residual - 3.0).abs() < 1e-14);
    }

    #[test]
    fn finite_difference_derivatives() {
        let m = tri(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]);
        let terms = vec![vec![
            (vec![0, 0], vec![vec![2.0, 0.1], vec![0.1, 1.5]]),
            (vec![1, 0], vec![vec![0.3, -0.2], vec![-0.2, 0.1]]),
            (vec![1, 2], vec![vec![0.7, 0.4], vec![0.4, -0.9]]),
            (vec![0, 3], vec![vec![-0.5, 0.0], vec![0.0, 0.2]]),
        ]];
        let g = ReggeMetric::polynomial(&m, &terms).unwrap();
        let p = [0.3, 0.25];
        let h = 1e-5;
        let e = g.evaluate(0, &p, 1).unwrap();
        for k in 0..2 {
            let mut a = p;
            let mut b = p;
            a[k] += h;
            b[k] -= h;
            let fd = (g.value(0, &a).unwrap() - g.value(0, &b).unwrap()) / (2.0 * h);
            assert!((fd - &e.dg[k]).abs().max() < 1e-6);
        }
    }

    #[test]
    fn json_kinds() {
        let m = tri(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]);
        let a = MetricInput::from_json(r#"{"kind":"expression","entries":[["1","0"],["0","1+x1"]],"degree":1}"#)
            .unwrap()
            .build(&m)
            .unwrap();
        assert_eq!(a.degree(), Some(1));
        let b = MetricInput::from_json(
            r#"{"kind":"coefficients","per_cell":[{"terms":[{"exp":[0,0],"coeffs":[[1,0],[0,1]]}]}]}"#,
        )
        .unwrap()
        .build(&m)
        .unwrap();
        assert_eq!(b.value(0, &[0.1, 0.1]).unwrap(), DMatrix::identity(2, 2));
        let c = MetricInput::from_json(r#"{"kind":"flat"}"#).unwrap().build(&m).unwrap();
        assert!((c.value(0, &[0.2, 0.2]).unwrap() - DMatrix::identity(2, 2)).abs().max() < 1e-15);
        assert!(c.check_positive_definite(4).is_ok());
    }
}
