use std::path::Path;

use rayon::prelude::*;
use regge_core::frames::{self, FrameError};
use regge_core::functional::{self, FieldInput, FunctionalError, RotationField, TermValue, TestFieldA};
use regge_core::gauss2d::{self, GaussError, GaussReport};
use regge_core::mesh::io::MeshInput;
use regge_core::mesh::{self, MeshComplex, MeshError, QuadratureRule};
use regge_core::metric::expr::{coordinate_names, Expr};
use regge_core::metric::{check_tt_continuity, MetricError, MetricInput, ReggeMetric};
use serde_json::{json, Value};

use crate::report::{self, Row};
use crate::{Common, Failure, Format};

fn read(path: &Path, what: &str) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {what} file {}: {e}", path.display())))
}

fn mesh_input(common: &Common) -> Result<(MeshInput, String), Failure> {
    let path = common
        .mesh
        .as_deref()
        .ok_or_else(|| Failure::Input("--mesh is required".into()))?;
    let text = read(path, "mesh")?;
    let input = MeshInput::from_json(&text).map_err(|e| mesh_failure(path, e))?;
    Ok((input, path.display().to_string()))
}

fn mesh_failure(path: &Path, e: MeshError) -> Failure {
    Failure::Input(format!("{}: {e}", path.display()))
}

fn load_mesh(common: &Common) -> Result<MeshComplex, Failure> {
    let (input, name) = mesh_input(common)?;
    input.build().map_err(|e| Failure::Input(format!("{name}: {e}")))
}

fn metric_input(common: &Common) -> Result<MetricInput, Failure> {
    match &common.metric {
        Some(path) => {
            let text = read(path, "metric")?;
            MetricInput::from_json(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
        }
        None => Ok(MetricInput::Induced),
    }
}

fn build_metric(input: &MetricInput, complex: &MeshComplex) -> Result<ReggeMetric, Failure> {
    input.build(complex).map_err(metric_failure)
}

fn metric_failure(e: MetricError) -> Failure {
    Failure::Input(format!("metric: {e}"))
}

fn functional_failure(e: FunctionalError) -> Failure {
    Failure::Input(e.to_string())
}

fn gauss_failure(e: GaussError) -> Failure {
    Failure::Input(e.to_string())
}

/// Loss of orthonormality and signature changes are numeric outcomes; the
/// rest are malformed or unsupported inputs.
fn frame_failure(e: FrameError) -> Failure {
    match e {
        FrameError::DriftExceeded { .. }
        | FrameError::SignatureChange { .. }
        | FrameError::SingularMetric
        | FrameError::NonSkewK { .. } => Failure::Check(e.to_string()),
        other => Failure::Input(other.to_string()),
    }
}

fn quad_degree(common: &Common, metric: &ReggeMetric) -> usize {
    common
        .quad_degree
        .unwrap_or_else(|| functional::default_quadrature_degree(metric))
}

fn test_field(common: &Common, ambient: usize) -> Result<TestFieldA, Failure> {
    match (&common.test_field, &common.phi) {
        (Some(_), Some(_)) => Err(Failure::Input("give either --test-field or --phi, not both".into())),
        (Some(path), None) => {
            let text = read(path, "test field")?;
            let input: FieldInput =
                serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            input.build(ambient).map_err(functional_failure)
        }
        (None, phi) => TestFieldA::gauss(phi.as_deref().unwrap_or("1"), ambient).map_err(functional_failure),
    }
}

fn scalar(common: &Common, ambient: usize) -> Result<Option<Expr>, Failure> {
    if common.test_field.is_some() {
        return Err(Failure::Input(
            "this subcommand takes a scalar --phi, not --test-field".into(),
        ));
    }
    common
        .phi
        .as_deref()
        .map(|text| {
            Expr::parse(text, &coordinate_names("x", ambient)).map_err(|e| Failure::Input(format!("--phi: {e}")))
        })
        .transpose()
}

fn emit(common: &Common, value: &Value, rows: impl FnOnce() -> String) -> Result<(), Failure> {
    let text = match common.format {
        Format::Json => report::json(value)?,
        Format::Csv => rows(),
    };
    report::write(common.out.as_deref(), &text)
}

fn mesh_summary(complex: &MeshComplex) -> Value {
    let n = complex.dim();
    let boundary_faces = complex.faces().iter().filter(|f| f.boundary).count();
    json!({
        "dim": n,
        "ambient_dim": complex.ambient_dim(),
        "cells": complex.num_cells(),
        "faces": complex.faces().len(),
        "hinges": complex.hinges().len(),
        "boundary_faces": boundary_faces,
        "closed": complex.is_closed(),
        "euler_characteristic": complex.euler_characteristic(),
        "mesh_size": complex.mesh_size(),
    })
}

pub fn validate(common: &Common) -> Result<(), Failure> {
    let complex = load_mesh(common)?;
    let metric = build_metric(&metric_input(common)?, &complex)?;
    let q = quad_degree(common, &metric);
    let tol = common.tol.unwrap_or(1e-10);
    let min_eigenvalue = metric.check_positive_definite(q).map_err(metric_failure)?;
    let tt = check_tt_continuity(&metric, &complex, tol, q).map_err(metric_failure)?;
    let out = json!({
        "mesh": mesh_summary(&complex),
        "min_eigenvalue": min_eigenvalue,
        "tt_continuity": report::value(&tt)?,
        "passed": tt.pass,
    });
    let face_dim = complex.dim() - 1;
    emit(common, &out, || {
        let rows: Vec<Row> = tt
            .faces
            .iter()
            .map(|r| Row {
                id: r.face,
                dim: face_dim,
                term: "tt_residual",
                value: r.residual,
            })
            .collect();
        report::csv(&rows)
    })?;
    if tt.pass {
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "tangential-tangential jump {:e} exceeds {:e}",
            tt.max_residual, tol
        )))
    }
}

fn measure_rows(n: usize, cells: &[TermValue], faces: &[TermValue], hinges: &[TermValue]) -> Vec<Row> {
    let mut rows = report::rows(cells, n, "cell");
    rows.extend(report::rows(faces, n - 1, "face"));
    if n >= 2 {
        rows.extend(report::rows(hinges, n - 2, "hinge"));
    }
    rows
}

pub fn curvature(common: &Common) -> Result<(), Failure> {
    let complex = load_mesh(common)?;
    let metric = build_metric(&metric_input(common)?, &complex)?;
    let field = test_field(common, complex.ambient_dim())?;
    let q = quad_degree(common, &metric);
    let measure = functional::assemble(&metric, &complex, &field, q).map_err(functional_failure)?;
    let out = report::value(&measure)?;
    emit(common, &out, || {
        report::csv(&measure_rows(
            complex.dim(),
            &measure.cells,
            &measure.faces,
            &measure.hinges,
        ))
    })
}

fn gauss_rows(r: &GaussReport) -> Vec<Row> {
    let mut rows = measure_rows(2, &r.cells, &r.interior_edges, &r.interior_vertices);
    rows.extend(report::rows(&r.boundary_edges, 1, "boundary_face"));
    rows.extend(report::rows(&r.boundary_vertices, 0, "boundary_hinge"));
    rows
}

pub fn gauss_bonnet(common: &Common) -> Result<(), Failure> {
    let complex = load_mesh(common)?;
    let metric = build_metric(&metric_input(common)?, &complex)?;
    let q = quad_degree(common, &metric);
    let phi = scalar(common, complex.ambient_dim())?;
    let rep = match &phi {
        Some(phi) => gauss2d::pair_gauss(&metric, &complex, phi, q),
        None => gauss2d::gauss_bonnet_check(&metric, &complex, q),
    }
    .map_err(gauss_failure)?;
    let tol = common.tol.unwrap_or(1e-8);
    // The defect only measures Gauss-Bonnet for the constant test function.
    let checked = phi.is_none();
    let passed = !checked || rep.defect < tol;
    let mut out = report::value(&rep)?;
    out["tol"] = json!(tol);
    out["passed"] = json!(passed);
    emit(common, &out, || report::csv(&gauss_rows(&rep)))?;
    if passed {
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "Gauss-Bonnet defect {:e} exceeds {:e}",
            rep.defect, tol
        )))
    }
}

/// Fixed rotation field used for the gauge part of the equivalence check.
fn check_gauge() -> RotationField {
    RotationField::new(
        vec![
            [0.7, 1.3, -0.4, 0.9, 0.2],
            [0.5, -0.8, 1.1, 0.3, -0.6],
            [0.9, 0.4, 0.7, -1.2, 1.0],
        ],
        false,
    )
}

pub fn equiv_check(common: &Common) -> Result<(), Failure> {
    let complex = load_mesh(common)?;
    let metric = build_metric(&metric_input(common)?, &complex)?;
    let field = test_field(common, complex.ambient_dim())?;
    let n = complex.dim();
    let mut points = Vec::new();
    for (c, cell) in complex.cells().iter().enumerate() {
        let rule = QuadratureRule::new(cell.shape, n, 2).map_err(|e| Failure::Input(e.to_string()))?;
        points.extend(rule.points.into_iter().map(|xi| (c, xi)));
    }
    let gauge = check_gauge();
    let rep = functional::bruteforce_equivalence_check(&metric, &complex, &field, &points, Some(&gauge))
        .map_err(functional_failure)?;
    let tol = common.tol.unwrap_or(1e-11);
    let bound = tol * rep.max_magnitude.max(1.0);
    let worst = rep.max_discrepancy.max(rep.gauge_discrepancy);
    let passed = worst <= bound;
    let mut out = report::value(&rep)?;
    out["tol"] = json!(tol);
    out["passed"] = json!(passed);
    emit(common, &out, || {
        let rows = [
            ("cell", n, rep.cell_discrepancy),
            ("face", n - 1, rep.face_discrepancy),
            ("hinge", n.saturating_sub(2), rep.hinge_discrepancy),
            ("gauge", n, rep.gauge_discrepancy),
        ]
        .into_iter()
        .map(|(term, dim, value)| Row {
            id: 0,
            dim,
            term,
            value,
        })
        .collect::<Vec<_>>();
        report::csv(&rows)
    })?;
    if passed {
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "equivalence discrepancy {worst:e} exceeds {bound:e}"
        )))
    }
}

pub fn frame_evolve(common: &Common) -> Result<(), Failure> {
    let complex = load_mesh(common)?;
    let metric = build_metric(&metric_input(common)?, &complex)?;
    let background = ReggeMetric::induced(&complex);
    let steps = common.steps;
    let tol = common.tol.unwrap_or(frames::COMPATIBILITY_TOL);
    let frame = frames::compatible_frame(&background, &metric, &complex, steps).map_err(frame_failure)?;
    let compat = frames::verify_compatibility(&metric, &complex, &frame, tol).map_err(frame_failure)?;
    let cells: Vec<(usize, f64, usize)> = (0..complex.num_cells())
        .into_par_iter()
        .map(|c| {
            let rule = QuadratureRule::new(complex.cell(c).shape, complex.dim(), 2)?;
            let mut drift = 0.0_f64;
            for xi in &rule.points {
                let h = frames::compatible_homotopy(&background, &metric, &complex, c, xi, steps)?;
                drift = drift.max(h.max_drift);
            }
            Ok((c, drift, rule.points.len()))
        })
        .collect::<Result<_, FrameError>>()
        .map_err(frame_failure)?;
    let max_drift = cells.iter().map(|c| c.1).fold(0.0, f64::max);
    let passed = compat.passed;
    let out = json!({
        "steps": steps,
        "cells": cells.iter().map(|(c, d, k)| json!({"cell": c, "max_drift": d, "samples": k})).collect::<Vec<_>>(),
        "max_drift": max_drift,
        "compatibility": report::value(&compat)?,
        "passed": passed,
    });
    emit(common, &out, || {
        let mut rows: Vec<Row> = cells
            .iter()
            .map(|&(id, value, _)| Row {
                id,
                dim: 2,
                term: "drift",
                value,
            })
            .collect();
        rows.extend(report::rows(&compat.faces, 1, "face_residual"));
        rows.extend(report::rows(&compat.hinges, 0, "hinge_residual"));
        report::csv(&rows)
    })?;
    if passed {
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "compatibility residuals {:e} (faces), {:e} (hinges) exceed {:e}",
            compat.max_face_residual, compat.max_hinge_residual, tol
        )))
    }
}

struct Level {
    level: usize,
    mesh_size: f64,
    cells: usize,
    total: f64,
    target: f64,
    defect: f64,
}

pub fn refine_study(common: &Common) -> Result<(), Failure> {
    if common.levels == 0 {
        return Err(Failure::Input("--levels must be at least 1".into()));
    }
    let mut complex = load_mesh(common)?;
    let input = metric_input(common)?;
    let mut levels = Vec::with_capacity(common.levels);
    for level in 0..common.levels {
        if level > 0 {
            complex = mesh::refine(&complex).map_err(|e| Failure::Input(format!("refinement: {e}")))?;
        }
        let metric = build_metric(&input, &complex)?;
        let q = quad_degree(common, &metric);
        let rep = gauss2d::gauss_bonnet_check(&metric, &complex, q).map_err(gauss_failure)?;
        levels.push(Level {
            level,
            mesh_size: complex.mesh_size(),
            cells: complex.num_cells(),
            total: rep.total,
            target: rep.target,
            defect: rep.defect,
        });
    }
    let monotone = levels.windows(2).all(|w| w[1].defect < w[0].defect);
    let last = levels.last().map_or(0.0, |l| l.defect);
    let within_tol = common.tol.is_none_or(|t| last < t);
    let passed = monotone && within_tol;
    let out = json!({
        "levels": levels.iter().map(|l| json!({
            "level": l.level,
            "mesh_size": l.mesh_size,
            "cells": l.cells,
            "total": l.total,
            "target": l.target,
            "defect": l.defect,
        })).collect::<Vec<_>>(),
        "monotone": monotone,
        "passed": passed,
    });
    emit(common, &out, || {
        let mut s = String::from("level,mesh_size,cells,total,target,defect\n");
        for l in &levels {
            s.push_str(&format!(
                "{},{:e},{},{:e},{:e},{:e}\n",
                l.level, l.mesh_size, l.cells, l.total, l.target, l.defect
            ));
        }
        s
    })?;
    if passed {
        Ok(())
    } else if !monotone {
        Err(Failure::Check("defect does not decrease under refinement".into()))
    } else {
        Err(Failure::Check(format!("final defect {last:e} exceeds the tolerance")))
    }
}
