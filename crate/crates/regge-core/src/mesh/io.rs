//! JSON mesh input.
//!
//! ```json
//! { "dim": 2,
//!   "vertices": [[0,0],[1,0],[0,1]],
//!   "cells": [{ "type": "simplex", "verts": [0,1,2] }],
//!   "identify": [] }
//! ```
//!
//! A cell may carry `geom_degree` with `geom_coeffs` (ambient positions at
//! the equispaced Lagrange nodes of that degree) or `geom_expr` (one
//! expression per ambient coordinate in the reference variables `r1..rn`).
//!
//! Two sub-polytopes are glued across an identification only if each of
//! their vertex pairs appears in `identify` directly; chains are not followed.

use serde::{Deserialize, Serialize};

use super::geometry::{BaseMap, CellMap};
use super::{build_complex, CellSpec, MeshComplex, MeshError, Shape};
use crate::metric::expr::{coordinate_names, Expr};
use crate::poly::PolySpace;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeshInput {
    pub dim: usize,
    pub vertices: Vec<Vec<f64>>,
    pub cells: Vec<CellInput>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub identify: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellInput {
    #[serde(rename = "type")]
    pub shape: Shape,
    pub verts: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geom_degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geom_coeffs: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geom_expr: Option<Vec<String>>,
}

impl MeshInput {
    pub fn from_json(text: &str) -> Result<MeshInput, MeshError> {
        serde_json::from_str(text).map_err(|e| MeshError::InvalidInput(e.to_string()))
    }

    pub fn build(&self) -> Result<MeshComplex, MeshError> {
        let ambient = self.vertices.first().map_or(self.dim, |v| v.len());
        let cells = self
            .cells
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                Ok(CellSpec {
                    shape: cell.shape,
                    verts: cell.verts.clone(),
                    map: cell_map(c, cell, self.dim, ambient)?,
                })
            })
            .collect::<Result<Vec<_>, MeshError>>()?;
        let identify: Vec<(usize, usize)> = self.identify.iter().map(|p| (p[0], p[1])).collect();
        build_complex(self.dim, self.vertices.clone(), cells, &identify)
    }
}

fn cell_map(c: usize, cell: &CellInput, dim: usize, ambient: usize) -> Result<Option<CellMap>, MeshError> {
    if let Some(exprs) = &cell.geom_expr {
        if exprs.len() != ambient {
            return Err(MeshError::InvalidInput(format!(
                "cell {c}: geom_expr needs {ambient} components"
            )));
        }
        let names = coordinate_names("r", dim);
        let comps = exprs
            .iter()
            .map(|s| Expr::parse(s, &names).map_err(|e| MeshError::InvalidInput(format!("cell {c}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(Some(CellMap::new(BaseMap::Expression { comps })));
    }
    match (cell.geom_degree, &cell.geom_coeffs) {
        (None, None) => Ok(None),
        (Some(d), Some(values)) => {
            let space = PolySpace::new(cell.shape, dim, d);
            if values.len() != space.len() || values.iter().any(|v| v.len() != ambient) {
                return Err(MeshError::InvalidInput(format!(
                    "cell {c}: geom_coeffs needs {} points of length {ambient}",
                    space.len()
                )));
            }
            let coefs = space.interpolate(values);
            Ok(Some(CellMap::new(BaseMap::Lagrange { space, coefs })))
        }
        (None, Some(_)) if cell.geom_coeffs.as_ref().is_some_and(|v| v.is_empty()) => Ok(None),
        _ => Err(MeshError::InvalidInput(format!(
            "cell {c}: geom_degree and geom_coeffs must be given together"
        ))),
    }
}

/// Parse and build a complex from JSON text.
pub fn mesh_from_json(text: &str) -> Result<MeshComplex, MeshError> {
    MeshInput::from_json(text)?.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_builds() {
        let m = mesh_from_json(
            r#"{"dim":2,"vertices":[[0,0],[1,0],[0,1],[1,1]],
                "cells":[{"type":"simplex","verts":[0,1,3]},{"type":"simplex","verts":[0,3,2]}]}"#,
        )
        .unwrap();
        assert_eq!(m.num_cells(), 2);
    }

    #[test]
    fn quadratic_geometry() {
        // Quadratic triangle with a bulged hypotenuse.
        let text = r#"{"dim":2,"vertices":[[0,0],[1,0],[0,1]],
            "cells":[{"type":"simplex","verts":[0,1,2],"geom_degree":2,
              "geom_coeffs":[[0,0],[0,0.5],[0,1],[0.5,0],[0.6,0.6],[1,0]]}]}"#;
        let m = mesh_from_json(text).unwrap();
        let p = m.cell(0).map.point(&[0.5, 0.5]).unwrap();
        assert!((p[0] - 0.6).abs() < 1e-14 && (p[1] - 0.6).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_json() {
        assert!(matches!(mesh_from_json("{\"dim\":2"), Err(MeshError::InvalidInput(_))));
    }
}
