//! Pointwise Riemannian geometry of a cell metric in reference coordinates:
//! Levi-Civita connection, curvature, face frames, second fundamental forms,
//! dihedral angles and angle defects.
//!
//! Faces and hinges are flat in reference coordinates, so the outward face
//! conormal is a constant covector there and the second fundamental form
//! follows from the Christoffel symbols alone.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::mesh::{det, MeshComplex, MeshError, Shape};
use crate::metric::{MetricError, MetricSample, ReggeMetric};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("singular metric in cell {cell}")]
    SingularMetric { cell: usize },
    #[error("face {face} is degenerate under the metric")]
    DegenerateFace { face: usize },
    #[error("hinge {hinge} is degenerate under the metric")]
    DegenerateHinge { hinge: usize },
    #[error("face {face} lies on the boundary")]
    BoundaryFace { face: usize },
    #[error("hinge {hinge} lies on the boundary")]
    BoundaryHinge { hinge: usize },
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// `gamma[i][(j, k)] = Γ^i_{jk}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffels {
    pub gamma: Vec<DMatrix<f64>>,
}

impl Christoffels {
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.gamma[i][(j, k)]
    }

    /// Components of `∇_u v` for constant-coefficient fields `u`, `v`.
    pub fn apply(&self, u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.gamma.len(),
            self.gamma.iter().map(|g| (u.transpose() * g * v)[(0, 0)]),
        )
    }
}

/// Lowered curvature `R_{ijkl} = g_{im} R^m_{jkl}` with
/// `R^i_{jkl} = ∂_k Γ^i_{lj} − ∂_l Γ^i_{kj} + Γ^i_{km} Γ^m_{lj} − Γ^i_{lm} Γ^m_{kj}`,
/// so that `R_{1212} = K det g` in two dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct RiemannTensor {
    n: usize,
    lowered: Vec<f64>,
    mixed: Vec<f64>,
}

impl RiemannTensor {
    fn idx(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.n + j) * self.n + k) * self.n + l
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `R_{ijkl}`.
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.lowered[self.idx(i, j, k, l)]
    }

    /// `R^i_{jkl}`, the endomorphism-valued 2-form.
    pub fn mixed(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.mixed[self.idx(i, j, k, l)]
    }

    pub fn max_abs(&self) -> f64 {
        self.lowered.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `R(u_a, u_b, u_c, u_d)` for vectors given as matrix columns.
    pub fn in_basis(&self, basis: &DMatrix<f64>) -> RiemannTensor {
        let n = self.n;
        let mut lowered = vec![0.0; n.pow(4)];
        // Contract one slot at a time.
        let mut cur = self.lowered.clone();
        for slot in 0..4 {
            let mut next = vec![0.0; n.pow(4)];
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        for d in 0..n {
                            let idx = [a, b, c, d];
                            let mut s = 0.0;
                            for m in 0..n {
                                let mut src = idx;
                                src[slot] = m;
                                s += basis[(m, idx[slot])] * cur[self.idx(src[0], src[1], src[2], src[3])];
                            }
                            next[self.idx(a, b, c, d)] = s;
                        }
                    }
                }
            }
            cur = next;
        }
        lowered.copy_from_slice(&cur);
        RiemannTensor {
            n,
            lowered,
            mixed: Vec::new(),
        }
    }

    /// Largest violation of the antisymmetries and pair symmetry, relative
    /// to the largest component.
    pub fn symmetry_residual(&self) -> f64 {
        let n = self.n;
        let scale = self.max_abs().max(1e-300);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let r = self.get(i, j, k, l);
                        worst = worst
                            .max((r + self.get(j, i, k, l)).abs())
                            .max((r + self.get(i, j, l, k)).abs())
                            .max((r - self.get(k, l, i, j)).abs());
                    }
                }
            }
        }
        worst / scale
    }

    /// Largest violation of `R_{ijkl} + R_{iklj} + R_{iljk} = 0`, relative.
    pub fn bianchi_residual(&self) -> f64 {
        let n = self.n;
        let scale = self.max_abs().max(1e-300);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let s = self.get(i, j, k, l) + self.get(i, k, l, j) + self.get(i, l, j, k);
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst / scale
    }
}

pub(crate) fn invert(g: &DMatrix<f64>, cell: usize) -> Result<DMatrix<f64>, GeomError> {
    let inv = g.clone().try_inverse().ok_or(GeomError::SingularMetric { cell })?;
    if inv.iter().all(|v| v.is_finite()) {
        Ok(inv)
    } else {
        Err(GeomError::SingularMetric { cell })
    }
}

/// Christoffel symbols from a metric sample of order ≥ 1.
pub fn christoffels_from(sample: &MetricSample, cell: usize) -> Result<Christoffels, GeomError> {
    let n = sample.g.nrows();
    let ginv = invert(&sample.g, cell)?;
    let s = lowered_first_kind(sample, n);
    let gamma = (0..n)
        .map(|i| {
            DMatrix::from_fn(n, n, |j, k| {
                0.5 * (0..n).map(|l| ginv[(i, l)] * s[l][(j, k)]).sum::<f64>()
            })
        })
        .collect();
    Ok(Christoffels { gamma })
}

/// `S_l(j,k) = ∂_j g_{lk} + ∂_k g_{lj} − ∂_l g_{jk}`.
fn lowered_first_kind(sample: &MetricSample, n: usize) -> Vec<DMatrix<f64>> {
    (0..n)
        .map(|l| {
            DMatrix::from_fn(n, n, |j, k| {
                sample.dg[j][(l, k)] + sample.dg[k][(l, j)] - sample.dg[l][(j, k)]
            })
        })
        .collect()
}

pub fn christoffels(metric: &ReggeMetric, cell: usize, xi: &[f64]) -> Result<Christoffels, GeomError> {
    christoffels_from(&metric.evaluate(cell, xi, 1)?, cell)
}

/// Riemann tensor from a metric sample of order 2.
pub fn riemann_from(sample: &MetricSample, cell: usize) -> Result<RiemannTensor, GeomError> {
    let n = sample.g.nrows();
    let ginv = invert(&sample.g, cell)?;
    let s = lowered_first_kind(sample, n);
    let gamma: Vec<DMatrix<f64>> = (0..n)
        .map(|i| {
            DMatrix::from_fn(n, n, |j, k| {
                0.5 * (0..n).map(|l| ginv[(i, l)] * s[l][(j, k)]).sum::<f64>()
            })
        })
        .collect();
    // ∂_m Γ^i_{jk}
    let dginv: Vec<DMatrix<f64>> = (0..n).map(|m| -&ginv * &sample.dg[m] * &ginv).collect();
    let dgamma = |m: usize, i: usize, j: usize, k: usize| -> f64 {
        let mut v = 0.0;
        for l in 0..n {
            let ds = sample.d2g[m][j][(l, k)] + sample.d2g[m][k][(l, j)] - sample.d2g[m][l][(j, k)];
            v += dginv[m][(i, l)] * s[l][(j, k)] + ginv[(i, l)] * ds;
        }
        0.5 * v
    };
    let mut t = RiemannTensor {
        n,
        lowered: vec![0.0; n.pow(4)],
        mixed: vec![0.0; n.pow(4)],
    };
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut r = dgamma(k, i, l, j) - dgamma(l, i, k, j);
                    for m in 0..n {
                        r += gamma[i][(k, m)] * gamma[m][(l, j)] - gamma[i][(l, m)] * gamma[m][(k, j)];
                    }
                    let id = t.idx(i, j, k, l);
                    t.mixed[id] = r;
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let v: f64 = (0..n).map(|m| sample.g[(i, m)] * t.mixed(m, j, k, l)).sum();
                    let id = t.idx(i, j, k, l);
                    t.lowered[id] = v;
                }
            }
        }
    }
    Ok(t)
}

pub fn riemann(metric: &ReggeMetric, cell: usize, xi: &[f64]) -> Result<RiemannTensor, GeomError> {
    riemann_from(&metric.evaluate(cell, xi, 2)?, cell)
}

/// Gauss curvature `R_{1212} / det g` of a two-dimensional cell metric.
pub fn gauss_curvature_at(metric: &ReggeMetric, cell: usize, xi: &[f64]) -> Result<f64, GeomError> {
    let s = metric.evaluate(cell, xi, 2)?;
    let r = riemann_from(&s, cell)?;
    Ok(r.get(0, 1, 0, 1) / s.g.determinant())
}

/// Face frame at one face point, in reference coordinates of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceFrame {
    pub cell: usize,
    /// Reference coordinates of the point in the cell.
    pub xi: Vec<f64>,
    /// g-orthonormal face tangents (Gram-Schmidt of the face axes).
    pub tangents: Vec<DVector<f64>>,
    /// Outward unit normal.
    pub normal: DVector<f64>,
    /// Outward conormal covector of the reference face, Euclidean unit.
    pub conormal: DVector<f64>,
    /// Metric at the point.
    pub g: DMatrix<f64>,
}

impl FaceFrame {
    /// Frame as matrix columns: tangents followed by the normal.
    pub fn matrix(&self) -> DMatrix<f64> {
        let mut cols = self.tangents.clone();
        cols.push(self.normal.clone());
        DMatrix::from_columns(&cols)
    }
}

pub(crate) fn inner(g: &DMatrix<f64>, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    (u.transpose() * g * v)[(0, 0)]
}

/// g-orthonormalise `vectors` in order; `None` if they are dependent.
pub(crate) fn gram_schmidt(g: &DMatrix<f64>, vectors: &[DVector<f64>]) -> Option<Vec<DVector<f64>>> {
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let scale = inner(g, v, v).sqrt();
        let mut w = v.clone();
        for _ in 0..2 {
            for e in &out {
                w -= e * inner(g, e, &w);
            }
        }
        let len = inner(g, &w, &w).sqrt();
        if !(len > 1e-12 * scale.max(1e-300)) {
            return None;
        }
        out.push(w / len);
    }
    Some(out)
}

/// Euclidean covector annihilating `axes` (n−1 vectors in n dimensions),
/// with `⟨ν, e_i⟩ = det(e_i, axes)`.
fn annihilator(axes: &[Vec<f64>], n: usize) -> DVector<f64> {
    DVector::from_iterator(
        n,
        (0..n).map(|i| {
            let mut cols: Vec<Vec<f64>> = vec![(0..n).map(|k| if k == i { 1.0 } else { 0.0 }).collect()];
            cols.extend(axes.iter().cloned());
            let rows: Vec<Vec<f64>> = (0..n).map(|r| cols.iter().map(|c| c[r]).collect()).collect();
            det(&rows)
        }),
    )
}

fn cell_centroid(shape: Shape, n: usize) -> Vec<f64> {
    let k = shape.vertex_count(n);
    let mut c = vec![0.0; n];
    for l in 0..k {
        for (x, r) in c.iter_mut().zip(shape.ref_vertex(n, l)) {
            *x += r / k as f64;
        }
    }
    c
}

pub(crate) fn clamp_to_cell(shape: Shape, xi: &[f64]) -> Vec<f64> {
    let mut p: Vec<f64> = xi.iter().map(|&x| x.clamp(0.0, 1.0)).collect();
    if shape == Shape::Simplex {
        let s: f64 = p.iter().sum();
        if s > 1.0 {
            p.iter_mut().for_each(|x| *x /= s);
        }
    }
    p
}

/// Outward conormal covector of `face` as seen from `cell`, Euclidean unit.
pub fn outward_conormal(complex: &MeshComplex, face: usize, cell: usize) -> Result<DVector<f64>, GeomError> {
    let n = complex.dim();
    let f = &complex.faces()[face];
    let inc = f
        .incidence(cell)
        .ok_or(MeshError::NotIncident { polytope: face, cell })?;
    let shape = complex.cell(cell).shape;
    let mut nu = annihilator(&inc.axes, n);
    let fc = inc.ref_centroid(shape, n);
    let cc = cell_centroid(shape, n);
    let out: f64 = (0..n).map(|i| nu[i] * (fc[i] - cc[i])).sum();
    if out < 0.0 {
        nu = -nu;
    }
    let len = nu.norm();
    Ok(nu / len)
}

/// Frame from a metric value at a known reference point of `cell`.
pub fn face_frame_at(
    complex: &MeshComplex,
    face: usize,
    cell: usize,
    xi: Vec<f64>,
    g: DMatrix<f64>,
) -> Result<FaceFrame, GeomError> {
    let f = &complex.faces()[face];
    let inc = f
        .incidence(cell)
        .ok_or(MeshError::NotIncident { polytope: face, cell })?;
    let conormal = outward_conormal(complex, face, cell)?;
    let axes: Vec<DVector<f64>> = inc.axes.iter().map(|a| DVector::from_column_slice(a)).collect();
    let tangents = gram_schmidt(&g, &axes).ok_or(GeomError::DegenerateFace { face })?;
    let ginv = invert(&g, cell)?;
    let raised = &ginv * &conormal;
    let len2 = conormal.dot(&raised);
    if !(len2 > 0.0) {
        return Err(GeomError::DegenerateFace { face });
    }
    let normal = raised / len2.sqrt();
    Ok(FaceFrame {
        cell,
        xi,
        tangents,
        normal,
        conormal,
        g,
    })
}

/// Face frame at face parameter `eta`, seen from `cell`.
pub fn face_frame(
    metric: &ReggeMetric,
    complex: &MeshComplex,
    face: usize,
    cell: usize,
    eta: &[f64],
) -> Result<FaceFrame, GeomError> {
    let f = &complex.faces()[face];
    let inc = f
        .incidence(cell)
        .ok_or(MeshError::NotIncident { polytope: face, cell })?;
    let xi = clamp_to_cell(complex.cell(cell).shape, &inc.to_cell(eta));
    let g = metric.value(cell, &xi)?;
    face_frame_at(complex, face, cell, xi, g)
}

/// `II(Z, X) = ⟨∇_Z n, X⟩ = −Γ^j_{kl} Z^k X^l ν_j / |ν|_g` for constant
/// tangent fields of a flat reference face.
pub fn second_fundamental_form_at(frame: &FaceFrame, gamma: &Christoffels) -> DMatrix<f64> {
    let m = frame.tangents.len();
    let ginv = frame
        .g
        .clone()
        .try_inverse()
        .unwrap_or_else(|| DMatrix::zeros(frame.g.nrows(), frame.g.ncols()));
    let len = frame.conormal.dot(&(&ginv * &frame.conormal)).sqrt();
    let mut ii = DMatrix::zeros(m, m);
    for a in 0..m {
        for b in a..m {
            let cov = gamma.apply(&frame.tangents[a], &frame.tangents[b]);
            let v = -frame.conormal.dot(&cov) / len;
            ii[(a, b)] = v;
            ii[(b, a)] = v;
        }
    }
    ii
}

/// Second fundamental form of `face` in `cell` on the face's orthonormal
/// tangent basis, with the outward normal.
pub fn second_fundamental_form(
    metric: &ReggeMetric,
    complex: &MeshComplex,
    face: usize,
    cell: usize,
    eta: &[f64],
) -> Result<DMatrix<f64>, GeomError> {
    let f = &complex.faces()[face];
    let inc = f
        .incidence(cell)
        .ok_or(MeshError::NotIncident { polytope: face, cell })?;
    let xi = clamp_to_cell(complex.cell(cell).shape, &inc.to_cell(eta));
    let sample = metric.evaluate(cell, &xi, 1)?;
    let gamma = christoffels_from(&sample, cell)?;
    let frame = face_frame_at(complex, face, cell, xi, sample.g)?;
    Ok(second_fundamental_form_at(&frame, &gamma))
}

/// `[[II]] = II^T + II^{T'}` on the shared tangent basis.
pub fn jump_ii(
    metric: &ReggeMetric,
    complex: &MeshComplex,
    face: usize,
    eta: &[f64],
) -> Result<DMatrix<f64>, GeomError> {
    let f = &complex.faces()[face];
    if f.incidences.len() != 2 {
        return Err(GeomError::BoundaryFace { face });
    }
    let a = second_fundamental_form(metric, complex, face, f.incidences[0].cell, eta)?;
    let b = second_fundamental_form(metric, complex, face, f.incidences[1].cell, eta)?;
    Ok(a + b)
}

/// Orthonormal data at a hinge point in one cell of its fan.
#[derive(Debug, Clone, PartialEq)]
pub struct HingeFrame {
    pub cell: usize,
    pub xi: Vec<f64>,
    /// g-orthonormal hinge tangents.
    pub tangents: Vec<DVector<f64>>,
    /// Unit vector orthogonal to the hinge, tangent to the entering face
    /// and pointing into it.
    pub nu: DVector<f64>,
    /// Completes a positively oriented orthonormal frame `(tangents, nu, normal)`.
    pub normal: DVector<f64>,
    /// Same construction for the leaving face.
    pub nu_leave: DVector<f64>,
    /// Outward normal of the entering face.
    pub enter_normal: DVector<f64>,
    pub g: DMatrix<f64>,
}

impl HingeFrame {
    /// Interior angle between the two faces of the fan entry, in (0, 2π).
    pub fn dihedral_angle(&self) -> f64 {
        let c = inner(&self.g, &self.nu, &self.nu_leave);
        let s = -inner(&self.g, &self.nu_leave, &self.enter_normal);
        let t = s.atan2(c);
        if t <= 0.0 {
            t + 2.0 * PI
        } else {
            t
        }
    }
}

/// Hinge frame at hinge parameter `eta` in `cell`.
pub fn hinge_frame(
    metric: &ReggeMetric,
    complex: &MeshComplex,
    hinge: usize,
    cell: usize,
    eta: &[f64],
) -> Result<HingeFrame, GeomError> {
    let n = complex.dim();
    let h = &complex.hinges()[hinge];
    let inc = h
        .incidence(cell)
        .ok_or(MeshError::NotIncident { polytope: hinge, cell })?;
    let shape = complex.cell(cell).shape;
    let (enter, leave) = complex.hinge_faces_in_cell(hinge, cell)?;
    let xi = clamp_to_cell(shape, &inc.to_cell(eta));
    let g = metric.value(cell, &xi)?;
    let axes: Vec<DVector<f64>> = inc.axes.iter().map(|a| DVector::from_column_slice(a)).collect();
    let tangents = gram_schmidt(&g, &axes).ok_or(GeomError::DegenerateHinge { hinge })?;
    let hc = inc.ref_centroid(shape, n);
    let into = |face: usize| -> Result<DVector<f64>, GeomError> {
        let fi = complex.faces()[face].incidence(cell).expect("face of cell");
        let fc = fi.ref_centroid(shape, n);
        let d = DVector::from_iterator(n, fc.iter().zip(&hc).map(|(a, b)| a - b));
        let mut basis = tangents.clone();
        basis.push(d);
        let ortho = gram_schmidt(&g, &basis).ok_or(GeomError::DegenerateHinge { hinge })?;
        Ok(ortho[n - 2].clone())
    };
    let nu = into(enter)?;
    let nu_leave = into(leave)?;
    let mut basis = tangents.clone();
    basis.push(nu.clone());
    // Any vector outside span(tangents, ν) completes the frame.
    let candidate = (0..n)
        .map(|k| DVector::from_fn(n, |i, _| if i == k { 1.0 } else { 0.0 }))
        .max_by(|a, b| {
            let resid = |v: &DVector<f64>| {
                let mut w = v.clone();
                for e in tangents.iter().chain(std::iter::once(&nu)) {
                    w -= e * inner(&g, e, &w);
                }
                inner(&g, &w, &w)
            };
            resid(a).total_cmp(&resid(b))
        })
        .expect("n ≥ 2");
    basis.push(candidate);
    let ortho = gram_schmidt(&g, &basis).ok_or(GeomError::DegenerateHinge { hinge })?;
    let mut normal = ortho[n - 1].clone();
    let mut cols = tangents.clone();
    cols.push(nu.clone());
    cols.push(normal.clone());
    if DMatrix::from_columns(&cols).determinant() < 0.0 {
        normal = -normal;
    }
    let enter_normal = face_frame_at(complex, enter, cell, xi.clone(), g.clone())?.normal;
    Ok(HingeFrame {
        cell,
        xi,
        tangents,
        nu,
        normal,
        nu_leave,
        enter_normal,
        g,
    })
}

/// Interior angle of `cell` at the hinge point between its two fan faces.
pub fn dihedral_angle(
    metric: &ReggeMetric,
    complex: &MeshComplex,
    hinge: usize,
    cell: usize,
    eta: &[f64],
) -> Result<f64, GeomError> {
    Ok(hinge_frame(metric, complex, hinge, cell, eta)?.dihedral_angle())
}

/// Sum of interior angles over the fan of `hinge`.
pub fn angle_sum(metric: &ReggeMetric, complex: &MeshComplex, hinge: usize, eta: &[f64]) -> Result<f64, GeomError> {
    let fan = complex.hinge_fan(hinge)?;
    fan.entries
        .iter()
        .map(|e| dihedral_angle(metric, complex, hinge, e.cell, eta))
        .sum()
}

/// `Θ = 2π − Σ θ` at an interior hinge.
pub fn angle_defect(metric: &ReggeMetric, complex: &MeshComplex, hinge: usize, eta: &[f64]) -> Result<f64, GeomError> {
    if complex.hinges()[hinge].boundary {
        return Err(GeomError::BoundaryHinge { hinge });
    }
    Ok(2.0 * PI - angle_sum(metric, complex, hinge, eta)?)
}
