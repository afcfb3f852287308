use std::f64::consts::PI;

use super::*;
use crate::meshes;
use crate::metric::{parse_metric_expression, ReggeMetric};

fn exact(complex: &MeshComplex, text: &str) -> ReggeMetric {
    ReggeMetric::from_expression(complex, &parse_metric_expression(text).unwrap()).unwrap()
}

fn antisymmetric_field(m: usize, seed: u64) -> TestFieldA {
    // Antisymmetrise affine components with deterministic coefficients.
    let coef = |i: usize, k: usize| (((i * 31 + k * 17 + seed as usize * 7) % 23) as f64 - 11.0) / 10.0;
    let raw = |i: usize| -> String {
        let mut s = format!("({})", coef(i, 0));
        for v in 0..m {
            s += &format!(" + ({})*x{}", coef(i, v + 1), v + 1);
        }
        format!("({s})")
    };
    let idx = |a: usize, b: usize, c: usize, d: usize| ((a * m + b) * m + c) * m + d;
    let mut texts = Vec::new();
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                for d in 0..m {
                    texts.push(format!(
                        "{} - {} - {} + {}",
                        raw(idx(a, b, c, d)),
                        raw(idx(b, a, c, d)),
                        raw(idx(a, b, d, c)),
                        raw(idx(b, a, d, c))
                    ));
                }
            }
        }
    }
    TestFieldA::components(&texts, m).unwrap()
}

#[test]
fn flat_metric_pairs_to_zero() {
    let c = meshes::hexagon([0.2, 0.1], 1.0).build().unwrap();
    let g = ReggeMetric::induced(&c);
    let m = assemble(&g, &c, &antisymmetric_field(2, 3), 6).unwrap();
    assert!(m.total.abs() < 1e-12, "{}", m.total);
}

#[test]
fn cube_surface_total_is_four_pi() {
    let c = meshes::cube_surface().build().unwrap();
    let g = ReggeMetric::induced(&c);
    let f = TestFieldA::gauss("1", 3).unwrap();
    let m = assemble(&g, &c, &f, 4).unwrap();
    assert_eq!(m.hinges.len(), 8);
    for h in &m.hinges {
        assert!((h.value - PI / 2.0).abs() < 1e-13);
    }
    assert!(m.cell_total().abs() < 1e-14 && m.face_total().abs() < 1e-14);
    assert!((m.total - 4.0 * PI).abs() < 1e-12);
}

fn spherical_excess(corners: &[[f64; 2]; 3]) -> f64 {
    let unit = |p: &[f64; 2]| {
        let v = [p[0], p[1], 1.0];
        let r = (v[0] * v[0] + v[1] * v[1] + 1.0).sqrt();
        [v[0] / r, v[1] / r, v[2] / r]
    };
    let [a, b, c] = [unit(&corners[0]), unit(&corners[1]), unit(&corners[2])];
    let dot = |u: [f64; 3], v: [f64; 3]| u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    let triple =
        a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0]);
    2.0 * triple.abs().atan2(1.0 + dot(a, b) + dot(b, c) + dot(c, a))
}

#[test]
fn gnomonic_triangle_cell_term_is_spherical_area() {
    let corners = [[-0.2, -0.1], [0.5, 0.0], [0.1, 0.6]];
    let c = meshes::triangle(corners).build().unwrap();
    let g = exact(&c, meshes::GNOMONIC_SPHERE);
    let f = TestFieldA::gauss("1", 2).unwrap();
    let r = QuadratureRule::new(Shape::Simplex, 2, 30).unwrap();
    let v = cell_term(&g, &c, 0, &f, &r).unwrap();
    assert!((v - spherical_excess(&corners)).abs() < 1e-11, "{v}");
}

#[test]
fn exact_sphere_total() {
    let c = meshes::sphere_octahedron().build().unwrap();
    let g = ReggeMetric::induced(&c);
    let f = TestFieldA::gauss("1", 3).unwrap();
    let m = assemble(&g, &c, &f, 12).unwrap();
    for t in m.faces.iter().chain(&m.hinges) {
        assert!(t.value.abs() < 1e-8, "{t:?}");
    }
    assert!((m.total - 4.0 * PI).abs() < 1e-6, "{}", m.total);
}

#[test]
fn face_sides_and_hinge_cells_agree() {
    let c = meshes::octahedron().build().unwrap();
    let g = exact(&c, meshes::RADIAL_SPHERE).interpolate(1).unwrap();
    let f = TestFieldA::gauss("1 + x1*x2 - x3", 3).unwrap();
    let fr = QuadratureRule::new(Shape::Simplex, 1, 6).unwrap();
    let hr = QuadratureRule::new(Shape::Simplex, 0, 6).unwrap();
    for face in 0..c.faces().len() {
        let a = face_term_from_side(&g, &c, face, 0, &f, &fr).unwrap();
        let b = face_term_from_side(&g, &c, face, 1, &f, &fr).unwrap();
        assert!((a - b).abs() < 1e-12, "{a} {b}");
        assert!(a.abs() > 1e-6);
    }
    for h in 0..c.hinges().len() {
        let values: Vec<f64> = c.hinges()[h]
            .cells()
            .iter()
            .map(|&cell| hinge_term_in(&g, &c, h, cell, &f, &hr).unwrap())
            .collect();
        for v in &values {
            assert!((v - values[0]).abs() < 1e-10);
        }
    }
}

#[test]
fn gauge_rotation_leaves_terms_unchanged() {
    let c = meshes::octahedral_ball().build().unwrap();
    let g = exact(
        &c,
        "[[1 + 0.2*x1^2, 0.1*x2, 0], [0.1*x2, 1 + 0.1*x3^2, 0.05*x1], [0, 0.05*x1, 1.3]]",
    )
    .interpolate(2)
    .unwrap();
    let f = antisymmetric_field(3, 5);
    let h = RotationField::new(
        vec![
            [0.7, 1.0, -2.0, 0.5, 0.3],
            [1.1, 0.4, 0.9, -1.3, 2.0],
            [0.3, -0.8, 0.2, 1.7, -0.4],
        ],
        true,
    );
    let a = assemble(&g, &c, &f, 4).unwrap();
    let b = assemble_with_gauge(&g, &c, &f, 4, &h).unwrap();
    for (x, y) in a
        .cells
        .iter()
        .chain(&a.faces)
        .chain(&a.hinges)
        .zip(b.cells.iter().chain(&b.faces).chain(&b.hinges))
    {
        assert!((x.value - y.value).abs() < 1e-11, "{x:?} {y:?}");
    }
}

#[test]
fn bruteforce_identities_hold() {
    let c = meshes::octahedral_ball().build().unwrap();
    let g = exact(
        &c,
        "[[1 + 0.2*x1^2, 0.1*x2, 0], [0.1*x2, 1 + 0.1*x3^2, 0.05*x1], [0, 0.05*x1, 1.3]]",
    )
    .interpolate(2)
    .unwrap();
    let f = antisymmetric_field(3, 2);
    let h = RotationField::new(vec![[0.7, 1.0, -2.0, 0.5, 0.3]], false);
    let pts: Vec<(usize, Vec<f64>)> = (0..8).map(|k| (k, vec![0.2, 0.3, 0.1 + 0.05 * k as f64])).collect();
    let r = bruteforce_equivalence_check(&g, &c, &f, &pts, Some(&h)).unwrap();
    assert!(r.max_magnitude > 1e-3);
    assert!(r.max_discrepancy < 1e-11, "{r:?}");
    assert!(r.gauge_discrepancy < 1e-11, "{r:?}");

    let s = meshes::hexagon([0.1, 0.2], 1.0).build().unwrap();
    let g2 = exact(&s, "[[1 + x1^2, 0.2*x1*x2], [0.2*x1*x2, 1 + 0.5*x2^2]]")
        .interpolate(3)
        .unwrap();
    let pts: Vec<(usize, Vec<f64>)> = (0..6).map(|k| (k, vec![0.25, 0.5])).collect();
    let r = bruteforce_equivalence_check(&g2, &s, &antisymmetric_field(2, 9), &pts, Some(&h)).unwrap();
    assert!(r.max_discrepancy < 1e-11, "{r:?}");
    assert!(r.hinge_samples == 6 && r.face_samples > 0);
}

#[test]
fn linear_in_the_field() {
    let c = meshes::hexagon([0.1, 0.2], 1.0).build().unwrap();
    let g = exact(&c, "[[1 + x1^2, 0.2*x1*x2], [0.2*x1*x2, 1 + 0.5*x2^2]]")
        .interpolate(2)
        .unwrap();
    let a = antisymmetric_field(2, 1);
    let b = TestFieldA::gauss("x1 - 2*x2", 2).unwrap();
    let ma = assemble(&g, &c, &a, 8).unwrap().total;
    let mb = assemble(&g, &c, &b, 8).unwrap().total;
    let mc = assemble(&g, &c, &TestFieldA::combination(vec![(2.0, a), (-0.5, b)]), 8)
        .unwrap()
        .total;
    assert!((mc - (2.0 * ma - 0.5 * mb)).abs() < 1e-12);
}

#[test]
fn boundary_face_rejected() {
    let c = meshes::square_pair().build().unwrap();
    let g = ReggeMetric::induced(&c);
    let f = TestFieldA::gauss("1", 2).unwrap();
    let r = QuadratureRule::new(Shape::Simplex, 1, 2).unwrap();
    let boundary = (0..c.faces().len()).find(|&e| c.faces()[e].boundary).unwrap();
    assert!(matches!(
        face_term(&g, &c, boundary, &f, &r),
        Err(FunctionalError::Geom(GeomError::BoundaryFace { .. }))
    ));
}

#[test]
fn gauss_bonnet_with_jumps() {
    let c = meshes::octahedron().build().unwrap();
    let f = TestFieldA::gauss("1", 3).unwrap();
    for k in 1..=3 {
        let g = exact(&c, meshes::RADIAL_SPHERE).interpolate(k).unwrap();
        let m = assemble(&g, &c, &f, 40).unwrap();
        assert!(m.face_total().abs() > 1.0);
        let tol = if k == 1 { 1e-12 } else { 1e-6 };
        assert!((m.total - 4.0 * PI).abs() < tol, "degree {k}: {}", m.total);
    }
}

#[test]
fn hinge_identity_with_nonzero_defect() {
    // Piecewise-constant metric: only the hinge parts are nonzero.
    let c = meshes::octahedral_ball().build().unwrap();
    let g = exact(&c, "[[1.5 + 0.05*x1*x2*x3, 0.03*x2, 0.02*x1*x1], [0.03*x2, 1.5 - 0.06*x3*x3, 0.04*x1], [0.02*x1*x1, 0.04*x1, 1.5 + 0.07*x1*x2]]")
        .interpolate(0)
        .unwrap();
    let h = RotationField::new(vec![[0.4, 1.0, 0.3, -0.7, 0.1]], false);
    let r = bruteforce_equivalence_check(&g, &c, &antisymmetric_field(3, 4), &[], Some(&h)).unwrap();
    assert!(r.max_magnitude > 1e-7);
    assert!(r.hinge_discrepancy < 1e-16 + 1e-9 * r.max_magnitude, "{r:?}");
    assert!(r.gauge_discrepancy < 1e-15, "{r:?}");
}
