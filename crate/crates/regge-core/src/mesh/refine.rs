//! Uniform red refinement of simplicial complexes.

use std::collections::HashMap;

use super::{build_complex, det, CellSpec, MeshComplex, MeshError, Shape};

/// Child simplices as lists of parent points: `(a, a)` is parent vertex `a`,
/// `(a, b)` the midpoint of parent edge `ab`.
fn children(dim: usize) -> Vec<Vec<(usize, usize)>> {
    let v = |a: usize| (a, a);
    let m = |a: usize, b: usize| (a, b);
    match dim {
        1 => vec![vec![v(0), m(0, 1)], vec![m(0, 1), v(1)]],
        2 => vec![
            vec![v(0), m(0, 1), m(0, 2)],
            vec![m(0, 1), v(1), m(1, 2)],
            vec![m(0, 2), m(1, 2), v(2)],
            vec![m(1, 2), m(0, 2), m(0, 1)],
        ],
        _ => {
            let mut out = vec![
                vec![v(0), m(0, 1), m(0, 2), m(0, 3)],
                vec![m(0, 1), v(1), m(1, 2), m(1, 3)],
                vec![m(0, 2), m(1, 2), v(2), m(2, 3)],
                vec![m(0, 3), m(1, 3), m(2, 3), v(3)],
            ];
            // Inner octahedron split along the m02-m13 diagonal.
            let ring = [m(0, 1), m(1, 2), m(2, 3), m(0, 3)];
            for k in 0..4 {
                out.push(vec![m(0, 2), m(1, 3), ring[k], ring[(k + 1) % 4]]);
            }
            out
        }
    }
}

fn ref_point(dim: usize, p: (usize, usize)) -> Vec<f64> {
    let a = Shape::Simplex.ref_vertex(dim, p.0);
    let b = Shape::Simplex.ref_vertex(dim, p.1);
    a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect()
}

/// Split every n-simplex into 2^n children. Reference maps of the children
/// are the parent maps composed with the affine child-to-parent map, so
/// curved geometry is carried over exactly.
pub fn refine(complex: &MeshComplex) -> Result<MeshComplex, MeshError> {
    let dim = complex.dim();
    if complex.cells().iter().any(|c| c.shape != Shape::Simplex) {
        return Err(MeshError::UnsupportedCellType(
            "refinement needs simplicial cells".into(),
        ));
    }
    let mut vertices = complex.vertices().to_vec();
    let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut cells = Vec::new();
    for cell in complex.cells() {
        let mut global = |p: (usize, usize)| -> Result<usize, MeshError> {
            if p.0 == p.1 {
                return Ok(cell.verts[p.0]);
            }
            let (a, b) = (cell.verts[p.0], cell.verts[p.1]);
            let key = (a.min(b), a.max(b));
            if let Some(&id) = midpoint.get(&key) {
                return Ok(id);
            }
            let x = cell.map.point(&ref_point(dim, p))?;
            vertices.push(x);
            midpoint.insert(key, vertices.len() - 1);
            Ok(vertices.len() - 1)
        };
        for mut child in children(dim) {
            let pts: Vec<Vec<f64>> = child.iter().map(|&p| ref_point(dim, p)).collect();
            let axes: Vec<Vec<f64>> = (0..dim)
                .map(|i| (1..=dim).map(|j| pts[j][i] - pts[0][i]).collect())
                .collect();
            if det(&axes) < 0.0 {
                child.swap(dim - 1, dim);
            }
            let pts: Vec<Vec<f64>> = child.iter().map(|&p| ref_point(dim, p)).collect();
            let matrix: Vec<Vec<f64>> = (0..dim)
                .map(|i| (1..=dim).map(|j| pts[j][i] - pts[0][i]).collect())
                .collect();
            let verts = child.iter().map(|&p| global(p)).collect::<Result<Vec<_>, _>>()?;
            cells.push(CellSpec {
                shape: Shape::Simplex,
                verts,
                map: Some(cell.map.precompose(&pts[0], &matrix)),
            });
        }
    }

    // Keep old identifications, and identify midpoints of glued edges.
    let mut identify = complex.identifications().to_vec();
    if dim >= 2 {
        for edge in complex.polytopes(1) {
            let mids: Vec<usize> = edge
                .incidences
                .iter()
                .map(|inc| {
                    let c = &complex.cells()[inc.cell];
                    let (a, b) = (c.verts[inc.local[0]], c.verts[inc.local[1]]);
                    midpoint[&(a.min(b), a.max(b))]
                })
                .collect();
            for &m in &mids[1..] {
                if m != mids[0] {
                    identify.push((mids[0], m));
                }
            }
        }
    }
    build_complex(dim, vertices, cells, &identify)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simplex(verts: &[usize]) -> CellSpec {
        CellSpec {
            shape: Shape::Simplex,
            verts: verts.to_vec(),
            map: None,
        }
    }

    #[test]
    fn triangle_to_four() {
        let m = build_complex(
            2,
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![simplex(&[0, 1, 2])],
            &[],
        )
        .unwrap();
        let r = refine(&m).unwrap();
        assert_eq!(r.num_cells(), 4);
        assert_eq!(r.euler_characteristic(), 1);
    }

    #[test]
    fn tetrahedron_to_eight() {
        let m = build_complex(
            3,
            vec![
                vec![0.0, 0.0, 0.0],
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
            ],
            vec![simplex(&[0, 1, 2, 3])],
            &[],
        )
        .unwrap();
        let r = refine(&m).unwrap();
        assert_eq!(r.num_cells(), 8);
        let vol: f64 = r
            .cells()
            .iter()
            .map(|c| super::det(&c.map.jacobian(&[0.2, 0.2, 0.2]).unwrap()) / 6.0)
            .sum();
        assert!((vol - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(r.euler_characteristic(), 1);
        assert_eq!(r.count(0), 10);
    }

    #[test]
    fn boxes_rejected() {
        let m = build_complex(
            2,
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]],
            vec![CellSpec {
                shape: Shape::Box,
                verts: vec![0, 1, 2, 3],
                map: None,
            }],
            &[],
        )
        .unwrap();
        assert!(matches!(refine(&m), Err(MeshError::UnsupportedCellType(_))));
    }
}
