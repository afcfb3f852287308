use super::*;
use crate::gauss2d::pair_gauss;
use crate::meshes;
use crate::metric::expr::coordinate_names;
use crate::metric::{parse_metric_expression, MetricExpression};

fn exact(complex: &MeshComplex, text: &str) -> ReggeMetric {
    let e: MetricExpression = parse_metric_expression(text).unwrap();
    ReggeMetric::from_expression(complex, &e).unwrap()
}

fn phi(text: &str) -> Expr {
    Expr::parse(text, &coordinate_names("x", 2)).unwrap()
}

/// Piecewise-constant Regge interpolant of a smooth metric: tangential
/// components agree across edges, normal ones jump.
fn regge_metric(complex: &MeshComplex) -> ReggeMetric {
    exact(complex, "[[1 + x1^2, 0.5*x2], [0.5*x2, 1 + 2*x2^2 + x1]]")
        .interpolate(0)
        .unwrap()
}

#[test]
fn smooth_frame_is_compatible() {
    let sq = meshes::square_pair().build().unwrap();
    let m = exact(&sq, "[[2 + x1, 0.3], [0.3, 1 + x2^2]]");
    let f = Frame::chart(&m, &sq).unwrap();
    let r = verify_compatibility(&m, &sq, &f, 1e-10).unwrap();
    assert!(r.passed, "{r:?}");
    assert!(r.max_face_residual < 1e-10);
}

#[test]
fn constructed_frame_is_compatible() {
    let sq = meshes::square_pair().build().unwrap();
    let flat = ReggeMetric::induced(&sq);
    let m = regge_metric(&sq);
    let f = compatible_frame(&flat, &m, &sq, 40).unwrap();
    let r = verify_compatibility(&m, &sq, &f, 1e-6).unwrap();
    assert!(r.passed, "{r:?}");
    // Orthonormal and positively oriented at an interior point.
    let xi = [0.3, 0.2];
    let fr = f.at(0, &xi).unwrap();
    let gram = fr.transpose() * m.value(0, &xi).unwrap() * &fr;
    assert!((gram - DMatrix::identity(2, 2)).norm() < 1e-8);
    assert!(fr.determinant() > 0.0);
    // The jump in μ across the diagonal is visible for the plain chart frame.
    let chart = Frame::chart(&m, &sq).unwrap().with_background(flat);
    let rc = verify_compatibility(&m, &sq, &chart, 1e-6).unwrap();
    assert!(!rc.passed);
}

#[test]
fn rotated_cell_fails_by_the_angle() {
    let sq = meshes::square_pair().build().unwrap();
    let m = exact(&sq, "[[2 + x1, 0.3], [0.3, 1 + x2^2]]");
    let angle = 1e-3;
    let f = Frame::chart(&m, &sq).unwrap().rotated_in(0, angle);
    let r = verify_compatibility(&m, &sq, &f, 1e-6).unwrap();
    assert!(!r.passed);
    assert!(
        r.max_face_residual > 0.5 * angle && r.max_face_residual < 2.0 * angle,
        "{}",
        r.max_face_residual
    );
}

#[test]
fn flat_metric_pairs_to_zero() {
    let hex = meshes::hexagon([0.0, 0.0], 1.0).build().unwrap();
    let flat = ReggeMetric::induced(&hex);
    let f = Frame::chart(&flat, &hex).unwrap();
    let p = frame_based_functional(&flat, &hex, &f, &phi("1 + x1*x2"), 6).unwrap();
    assert!(p.total.abs() < 1e-12);
}

#[test]
fn agrees_with_frame_free_pairing() {
    for mesh in [meshes::square_pair(), meshes::hexagon([0.1, -0.05], 1.0)] {
        let c = mesh.build().unwrap();
        let flat = ReggeMetric::induced(&c);
        let m = regge_metric(&c);
        let f = compatible_frame(&flat, &m, &c, 20).unwrap();
        let field = phi("1 + 0.5*x1 - 0.25*x2^2");
        let framed = frame_based_functional(&m, &c, &f, &field, 6).unwrap();
        let free = pair_gauss(&m, &c, &field, 6).unwrap();
        assert!(
            (framed.total - free.interior_total()).abs() < 1e-8,
            "{} vs {}",
            framed.total,
            free.interior_total()
        );
    }
}

#[test]
fn vertex_closure() {
    let hex = meshes::hexagon([0.0, 0.0], 1.0).build().unwrap();
    let flat = ReggeMetric::induced(&hex);
    let m = regge_metric(&hex);
    let centre = (0..hex.hinges().len()).find(|&p| !hex.hinges()[p].boundary).unwrap();
    let theta = crate::elemgeom::angle_defect(&m, &hex, centre, &[]).unwrap();
    assert!(theta.abs() > 1e-4);
    assert!((vertex_rotation(&m, &flat, &hex, centre).unwrap() + theta).abs() < 1e-13);
    assert!(background_defect(&flat, &hex, centre).unwrap().abs() < 1e-13);
}

#[test]
fn surfaces_in_space_unsupported() {
    let cube = meshes::cube_surface().build().unwrap();
    let m = ReggeMetric::induced(&cube);
    assert!(matches!(
        compatible_frame(&m, &m, &cube, 10),
        Err(FrameError::IncompatibleFrame(_))
    ));
    assert!(matches!(Frame::chart(&m, &cube), Err(FrameError::IncompatibleFrame(_))));
}

#[test]
fn gauge_changes_connection_by_rotation_derivative() {
    let t = meshes::triangle([[0.0, 0.0], [1.0, 0.1], [0.2, 0.9]]).build().unwrap();
    let m = exact(&t, "[[1 + x1^2, 0.2*x2], [0.2*x2, 2 + sin(x1)]]");
    let base = Frame::chart(&m, &t).unwrap();
    let psi = |xi: &[f64]| 0.7 * xi[0] - 1.3 * xi[1] * xi[1] + 0.2;
    let dpsi = |xi: &[f64]| [0.7, -2.6 * xi[1]];
    let b2 = base.clone();
    let plain = move |xi: &[f64]| b2.at(0, xi);
    let b3 = base.clone();
    let turned = move |xi: &[f64]| Ok(b3.at(0, xi)? * rotation(psi(xi)));
    let xi = [0.3, 0.25];
    let w = connection_form(&m, &plain, 0, &xi).unwrap();
    let w2 = connection_form(&m, &turned, 0, &xi).unwrap();
    let h = rotation(psi(&xi));
    let gen = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
    for k in 0..2 {
        let expected = h.transpose() * &w[k] * &h + &gen * dpsi(&xi)[k];
        assert!((&w2[k] - expected).norm() < 1e-9);
        // Orthonormal frames have skew connection matrices.
        assert!((&w[k] + w[k].transpose()).norm() < 1e-9);
    }
}

#[test]
fn dump_is_json() {
    let sq = meshes::square_pair().build().unwrap();
    let m = ReggeMetric::induced(&sq);
    let f = Frame::chart(&m, &sq).unwrap();
    let v = f.dump(&sq, 2).unwrap();
    assert_eq!(v["cells"].as_array().unwrap().len(), 2);
}
