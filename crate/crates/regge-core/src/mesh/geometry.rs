//! Reference-to-physical cell maps.

use std::sync::Arc;

use super::{MeshError, Shape};
use crate::metric::expr::Expr;
use crate::poly::PolySpace;
use crate::taylor::{Jet, Scalar};

#[derive(Debug, Clone)]
pub enum BaseMap {
    /// `x = origin + Σ ξ_i axes[i]`.
    Affine { origin: Vec<f64>, axes: Vec<Vec<f64>> },
    /// Tensor-product interpolation of the `2^n` box corners (bit order).
    Multilinear { corners: Vec<Vec<f64>> },
    /// Polynomial map through equispaced Lagrange nodes.
    Lagrange { space: PolySpace, coefs: Vec<Vec<f64>> },
    /// Closed-form map in the reference coordinates `r1..rn`.
    Expression { comps: Vec<Expr> },
}

/// A base map optionally precomposed with an affine map of the reference
/// cell, as produced by refinement.
#[derive(Debug, Clone)]
pub struct CellMap {
    base: Arc<BaseMap>,
    pre: Option<(Vec<f64>, Vec<Vec<f64>>)>,
}

impl CellMap {
    pub fn new(base: BaseMap) -> CellMap {
        CellMap {
            base: Arc::new(base),
            pre: None,
        }
    }

    pub fn affine_simplex(corners: &[Vec<f64>]) -> CellMap {
        let origin = corners[0].clone();
        let axes = corners[1..]
            .iter()
            .map(|c| c.iter().zip(&origin).map(|(a, b)| a - b).collect())
            .collect();
        CellMap::new(BaseMap::Affine { origin, axes })
    }

    pub fn multilinear(corners: &[Vec<f64>]) -> CellMap {
        CellMap::new(BaseMap::Multilinear {
            corners: corners.to_vec(),
        })
    }

    pub fn base(&self) -> &BaseMap {
        &self.base
    }

    /// Polynomial degree of the map, `None` for closed-form maps.
    pub fn degree(&self) -> Option<usize> {
        match &*self.base {
            BaseMap::Affine { .. } => Some(1),
            BaseMap::Multilinear { corners } => Some(corners.len().trailing_zeros() as usize),
            BaseMap::Lagrange { space, .. } => {
                Some(space.degree * if space.shape == Shape::Box { space.nvars } else { 1 })
            }
            BaseMap::Expression { .. } => None,
        }
    }

    pub fn is_affine(&self) -> bool {
        matches!(&*self.base, BaseMap::Affine { .. })
    }

    /// Compose with `ξ_parent = offset + matrix · ξ`.
    pub fn precompose(&self, offset: &[f64], matrix: &[Vec<f64>]) -> CellMap {
        let (off, mat) = match &self.pre {
            None => (offset.to_vec(), matrix.to_vec()),
            Some((o0, m0)) => {
                let n = o0.len();
                let mut off = o0.clone();
                for i in 0..n {
                    for k in 0..n {
                        off[i] += m0[i][k] * offset[k];
                    }
                }
                let mat = (0..n)
                    .map(|i| (0..n).map(|j| (0..n).map(|k| m0[i][k] * matrix[k][j]).sum()).collect())
                    .collect();
                (off, mat)
            }
        };
        CellMap {
            base: self.base.clone(),
            pre: Some((off, mat)),
        }
    }

    pub fn eval<S: Scalar>(&self, xi: &[S]) -> Result<Vec<S>, MeshError> {
        let local: Vec<S> = match &self.pre {
            None => xi.to_vec(),
            Some((off, mat)) => (0..off.len())
                .map(|i| {
                    let mut acc = S::cst(off[i]);
                    for (k, x) in xi.iter().enumerate() {
                        if mat[i][k] != 0.0 {
                            acc = acc + S::cst(mat[i][k]) * *x;
                        }
                    }
                    acc
                })
                .collect(),
        };
        match &*self.base {
            BaseMap::Affine { origin, axes } => Ok((0..origin.len())
                .map(|c| {
                    let mut acc = S::cst(origin[c]);
                    for (k, ax) in axes.iter().enumerate() {
                        acc = acc + S::cst(ax[c]) * local[k];
                    }
                    acc
                })
                .collect()),
            BaseMap::Multilinear { corners } => {
                let m = corners[0].len();
                let mut out = vec![S::cst(0.0); m];
                for (bits, corner) in corners.iter().enumerate() {
                    let mut w = S::cst(1.0);
                    for (k, x) in local.iter().enumerate() {
                        w = w * if bits >> k & 1 == 1 { *x } else { S::cst(1.0) - *x };
                    }
                    for c in 0..m {
                        out[c] = out[c] + w * S::cst(corner[c]);
                    }
                }
                Ok(out)
            }
            BaseMap::Lagrange { space, coefs } => Ok(coefs.iter().map(|c| space.eval(c, &local)).collect()),
            BaseMap::Expression { comps } => comps
                .iter()
                .map(|e| e.eval(&local).map_err(|err| MeshError::Geometry(err.to_string())))
                .collect(),
        }
    }

    pub fn point(&self, xi: &[f64]) -> Result<Vec<f64>, MeshError> {
        self.eval(xi)
    }

    /// Jacobian `∂x_a/∂ξ_i` as rows `a`, columns `i`.
    pub fn jacobian(&self, xi: &[f64]) -> Result<Vec<Vec<f64>>, MeshError> {
        let jets = self.eval(&Jet::variables(xi, 1))?;
        Ok(jets.iter().map(|j| (0..xi.len()).map(|i| j.d1(i)).collect()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precomposition_chains() {
        let m = CellMap::affine_simplex(&[vec![1.0, 1.0], vec![3.0, 1.0], vec![1.0, 2.0]]);
        let child = m.precompose(&[0.5, 0.0], &[vec![0.5, 0.0], vec![0.0, 0.5]]);
        let grand = child.precompose(&[0.0, 0.5], &[vec![0.5, 0.0], vec![0.0, 0.5]]);
        let p = grand.point(&[0.2, 0.4]).unwrap();
        let direct = m.point(&[0.5 + 0.25 * 0.2, 0.25 + 0.25 * 0.4]).unwrap();
        assert!((p[0] - direct[0]).abs() < 1e-15 && (p[1] - direct[1]).abs() < 1e-15);
    }

    #[test]
    fn multilinear_corners() {
        let c = vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![0.0, 1.0], vec![2.0, 1.5]];
        let m = CellMap::multilinear(&c);
        for (bits, corner) in c.iter().enumerate() {
            let xi = [(bits & 1) as f64, (bits >> 1 & 1) as f64];
            assert_eq!(&m.point(&xi).unwrap(), corner);
        }
        let j = m.jacobian(&[0.0, 0.0]).unwrap();
        assert_eq!(j, vec![vec![2.0, 0.0], vec![0.0, 1.0]]);
    }
}
