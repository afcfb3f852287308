//! Small reference complexes used by the tests, examples and the CLI.

use std::f64::consts::PI;

use crate::mesh::io::{CellInput, MeshInput};
use crate::mesh::Shape;

fn cell(shape: Shape, verts: &[usize]) -> CellInput {
    CellInput {
        shape,
        verts: verts.to_vec(),
        geom_degree: None,
        geom_coeffs: None,
        geom_expr: None,
    }
}

fn num(v: f64) -> String {
    format!("({v:.17})")
}

/// Unit square as a single box cell.
pub fn unit_square() -> MeshInput {
    MeshInput {
        dim: 2,
        vertices: vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]],
        cells: vec![cell(Shape::Box, &[0, 1, 2, 3])],
        identify: vec![],
    }
}

/// Unit square split into two triangles along the diagonal.
pub fn square_pair() -> MeshInput {
    MeshInput {
        dim: 2,
        vertices: vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]],
        cells: vec![cell(Shape::Simplex, &[0, 1, 3]), cell(Shape::Simplex, &[0, 3, 2])],
        identify: vec![],
    }
}

/// Regular hexagon of radius `radius` centred at `center`, six triangles.
pub fn hexagon(center: [f64; 2], radius: f64) -> MeshInput {
    let mut vertices = vec![center.to_vec()];
    for k in 0..6 {
        let t = PI / 3.0 * k as f64;
        vertices.push(vec![center[0] + radius * t.cos(), center[1] + radius * t.sin()]);
    }
    MeshInput {
        dim: 2,
        vertices,
        cells: (0..6)
            .map(|k| cell(Shape::Simplex, &[0, 1 + k, 1 + (k + 1) % 6]))
            .collect(),
        identify: vec![],
    }
}

/// Surface of the unit cube as six outward-oriented box cells in 3D.
pub fn cube_surface() -> MeshInput {
    let vertices = (0..8)
        .map(|i| vec![(i & 1) as f64, (i >> 1 & 1) as f64, (i >> 2 & 1) as f64])
        .collect();
    let faces = [
        [0, 2, 1, 3],
        [4, 5, 6, 7],
        [0, 1, 4, 5],
        [2, 6, 3, 7],
        [0, 4, 2, 6],
        [1, 3, 5, 7],
    ];
    MeshInput {
        dim: 2,
        vertices,
        cells: faces.iter().map(|f| cell(Shape::Box, f)).collect(),
        identify: vec![],
    }
}

/// Flat torus: the unit square as 2×2 boxes with opposite sides identified.
pub fn flat_torus() -> MeshInput {
    let id = |i: usize, j: usize| j * 3 + i;
    let mut vertices = Vec::new();
    for j in 0..3 {
        for i in 0..3 {
            vertices.push(vec![i as f64 / 2.0, j as f64 / 2.0]);
        }
    }
    let mut cells = Vec::new();
    for j in 0..2 {
        for i in 0..2 {
            cells.push(cell(
                Shape::Box,
                &[id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1)],
            ));
        }
    }
    let mut identify = Vec::new();
    for k in 0..3 {
        identify.push([id(0, k), id(2, k)]);
        identify.push([id(k, 0), id(k, 2)]);
    }
    MeshInput {
        dim: 2,
        vertices,
        cells,
        identify,
    }
}

/// Octahedron with vertices `±e_i`, eight outward-oriented triangles.
pub fn octahedron() -> MeshInput {
    let mut vertices = Vec::new();
    for axis in 0..3 {
        for sign in [1.0, -1.0] {
            let mut v = vec![0.0; 3];
            v[axis] = sign;
            vertices.push(v);
        }
    }
    let mut cells = Vec::new();
    for octant in 0..8 {
        let s = [octant & 1, octant >> 1 & 1, octant >> 2 & 1];
        let (a, mut b, mut c) = (s[0], 2 + s[1], 4 + s[2]);
        if (s[0] + s[1] + s[2]) % 2 == 1 {
            std::mem::swap(&mut b, &mut c);
        }
        cells.push(cell(Shape::Simplex, &[a, b, c]));
    }
    MeshInput {
        dim: 2,
        vertices,
        cells,
        identify: vec![],
    }
}

/// Octahedron whose cells cover the unit sphere exactly: with barycentric
/// coordinates `λ_i`, `x = p/|p|` for `p = Σ sin(πλ_i/2) v_i + 2 λ_0 λ_1 λ_2 Σ v_i`.
/// Edges are great-circle arcs traced at constant speed; the bubble term
/// keeps the area element within a factor 1.3 over each cell.
pub fn sphere_octahedron() -> MeshInput {
    let mut m = octahedron();
    let lambda = ["(1 - r1 - r2)", "r1", "r2"];
    for c in &mut m.cells {
        let v: Vec<&Vec<f64>> = c.verts.iter().map(|&i| &m.vertices[i]).collect();
        let p: Vec<String> = (0..3)
            .map(|a| {
                let mut terms: Vec<String> = (0..3)
                    .filter(|&k| v[k][a] != 0.0)
                    .map(|k| format!("{}*sin({}*{})", num(v[k][a]), num(PI / 2.0), lambda[k]))
                    .collect();
                let sum: f64 = (0..3).map(|k| v[k][a]).sum();
                terms.push(format!("{}*{}*{}*{}", num(2.0 * sum), lambda[0], lambda[1], lambda[2]));
                format!("({})", terms.join(" + "))
            })
            .collect();
        let norm = format!("sqrt({0}^2 + {1}^2 + {2}^2)", p[0], p[1], p[2]);
        c.geom_expr = Some(p.iter().map(|pa| format!("{pa}/{norm}")).collect());
    }
    m
}

/// Disk of radius `radius` as `sides` triangles around the centre whose
/// outer edges follow the circle exactly.
pub fn disk(sides: usize, radius: f64) -> MeshInput {
    let step = 2.0 * PI / sides as f64;
    let mut vertices = vec![vec![0.0, 0.0]];
    for k in 0..sides {
        let t = step * k as f64;
        vertices.push(vec![radius * t.cos(), radius * t.sin()]);
    }
    let cells = (0..sides)
        .map(|k| {
            let (ta, tb) = (step * k as f64, step * (k + 1) as f64);
            // x = R (ξ1 e(θa + Δ ξ2) + ξ2 e(θb − Δ ξ1)) traces the arc on ξ1 + ξ2 = 1.
            let comp = |f: &str| {
                format!(
                    "{r}*(r1*{f}({ta} + {d}*r2) + r2*{f}({tb} - {d}*r1))",
                    r = num(radius),
                    ta = num(ta),
                    tb = num(tb),
                    d = num(step)
                )
            };
            let mut c = cell(Shape::Simplex, &[0, 1 + k, 1 + (k + 1) % sides]);
            c.geom_expr = Some(vec![comp("cos"), comp("sin")]);
            c
        })
        .collect();
    MeshInput {
        dim: 2,
        vertices,
        cells,
        identify: vec![],
    }
}

/// Metric of the unit sphere in gnomonic coordinates, in which straight
/// chart segments are great-circle arcs.
pub const GNOMONIC_SPHERE: &str = "[[(1 + x2^2)/(1 + x1^2 + x2^2)^2, -x1*x2/(1 + x1^2 + x2^2)^2], \
                                    [-x1*x2/(1 + x1^2 + x2^2)^2, (1 + x1^2)/(1 + x1^2 + x2^2)^2]]";

/// Round-sphere metric on `R^3 \ 0` pulled back by `x ↦ x/|x|`.
pub const RADIAL_SPHERE: &str = "[[(1 - x1^2/(x1^2+x2^2+x3^2))/(x1^2+x2^2+x3^2), -x1*x2/(x1^2+x2^2+x3^2)^2, -x1*x3/(x1^2+x2^2+x3^2)^2], \
                                  [-x1*x2/(x1^2+x2^2+x3^2)^2, (1 - x2^2/(x1^2+x2^2+x3^2))/(x1^2+x2^2+x3^2), -x2*x3/(x1^2+x2^2+x3^2)^2], \
                                  [-x1*x3/(x1^2+x2^2+x3^2)^2, -x2*x3/(x1^2+x2^2+x3^2)^2, (1 - x3^2/(x1^2+x2^2+x3^2))/(x1^2+x2^2+x3^2)]]";

/// Single chart triangle with the given corners.
pub fn triangle(corners: [[f64; 2]; 3]) -> MeshInput {
    MeshInput {
        dim: 2,
        vertices: corners.iter().map(|c| c.to_vec()).collect(),
        cells: vec![cell(Shape::Simplex, &[0, 1, 2])],
        identify: vec![],
    }
}

/// Two tetrahedra sharing a face, plus a third closing a fan around an
/// edge, in 3D.
pub fn tetrahedra() -> MeshInput {
    MeshInput {
        dim: 3,
        vertices: vec![
            vec![0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![1.0, 1.0, 1.0],
        ],
        cells: vec![cell(Shape::Simplex, &[0, 1, 2, 3]), cell(Shape::Simplex, &[1, 2, 3, 4])],
        identify: vec![],
    }
}

/// Octahedral ball: six vertices `±e_i` around the origin, eight
/// tetrahedra, so the six edges through the origin are interior hinges.
pub fn octahedral_ball() -> MeshInput {
    let mut m = octahedron();
    m.dim = 3;
    m.vertices.push(vec![0.0; 3]);
    for c in &mut m.cells {
        // Outward triangle (a, b, c) plus the origin first gives a positive tetrahedron.
        let mut verts = vec![6];
        verts.extend(&c.verts);
        c.verts = verts;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_build() {
        for (m, chi) in [
            (unit_square(), 1),
            (square_pair(), 1),
            (hexagon([0.0, 0.0], 1.0), 1),
            (cube_surface(), 2),
            (flat_torus(), 0),
            (octahedron(), 2),
            (sphere_octahedron(), 2),
            (disk(16, 1.0), 1),
            (tetrahedra(), 1),
            (octahedral_ball(), 1),
        ] {
            let c = m.build().unwrap();
            assert_eq!(c.euler_characteristic(), chi);
        }
    }

    #[test]
    fn disk_arc_is_exact() {
        let c = disk(8, 2.0).build().unwrap();
        let p = c.cell(3).map.point(&[0.3, 0.7]).unwrap();
        assert!((p[0].hypot(p[1]) - 2.0).abs() < 1e-14);
    }
}
