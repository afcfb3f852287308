//! Test tensor fields `A(X, Y, Z, W)`, antisymmetric in each argument pair.

use nalgebra::DMatrix;
use serde::Deserialize;

use super::FunctionalError;
use crate::metric::expr::{coordinate_names, Expr};

#[derive(Debug, Clone)]
pub enum FieldKind {
    /// `A(X,Y,Z,W) = ½(g(X,Z) g(Y,W) − g(X,W) g(Y,Z)) φ`, which reduces the
    /// pairing to `∫ K φ dA` in two dimensions.
    Gauss {
        phi: Expr,
    },
    /// Chart components `A_{abcd}(x)` in row-major order over `m^4` indices.
    Components {
        comps: Vec<Expr>,
        ambient: usize,
    },
    Combination(Vec<(f64, TestFieldA)>),
}

#[derive(Debug, Clone)]
pub struct TestFieldA {
    pub kind: FieldKind,
    pub compact_support: bool,
    pub vanishes_on_boundary: bool,
}

impl TestFieldA {
    /// Canonical Gauss field scaled by `φ(x)`, in chart coordinates `x1..xm`.
    pub fn gauss(phi: &str, ambient: usize) -> Result<TestFieldA, FunctionalError> {
        let phi = Expr::parse(phi, &coordinate_names("x", ambient))?;
        Ok(TestFieldA::from_kind(FieldKind::Gauss { phi }))
    }

    /// Field from `m^4` chart component expressions; antisymmetry is checked
    /// at a few sample points.
    pub fn components(texts: &[String], ambient: usize) -> Result<TestFieldA, FunctionalError> {
        let m = ambient;
        if texts.len() != m.pow(4) {
            return Err(FunctionalError::InvalidField(format!(
                "{} components given, {} expected",
                texts.len(),
                m.pow(4)
            )));
        }
        let names = coordinate_names("x", m);
        let comps = texts
            .iter()
            .map(|t| Expr::parse(t, &names))
            .collect::<Result<Vec<_>, _>>()?;
        let field = TestFieldA::from_kind(FieldKind::Components { comps, ambient: m });
        field.check_antisymmetry()?;
        Ok(field)
    }

    pub fn combination(terms: Vec<(f64, TestFieldA)>) -> TestFieldA {
        let vanishes = terms.iter().all(|(_, f)| f.vanishes_on_boundary);
        let compact = terms.iter().all(|(_, f)| f.compact_support);
        TestFieldA {
            kind: FieldKind::Combination(terms),
            compact_support: compact,
            vanishes_on_boundary: vanishes,
        }
    }

    fn from_kind(kind: FieldKind) -> TestFieldA {
        TestFieldA {
            kind,
            compact_support: false,
            vanishes_on_boundary: false,
        }
    }

    /// Whether this is a (combination of) canonical Gauss fields.
    pub fn is_canonical(&self) -> bool {
        match &self.kind {
            FieldKind::Gauss { .. } => true,
            FieldKind::Components { .. } => false,
            FieldKind::Combination(terms) => terms.iter().all(|(_, f)| f.is_canonical()),
        }
    }

    fn check_antisymmetry(&self) -> Result<(), FunctionalError> {
        let FieldKind::Components { comps, ambient: m } = &self.kind else {
            return Ok(());
        };
        let m = *m;
        let idx = |a: usize, b: usize, c: usize, d: usize| ((a * m + b) * m + c) * m + d;
        for s in 0..4 {
            let x: Vec<f64> = (0..m)
                .map(|i| 0.1 + 0.8 * (((s * 7 + i * 3) % 11) as f64) / 10.0)
                .collect();
            let vals = comps.iter().map(|e| e.eval(&x)).collect::<Result<Vec<f64>, _>>()?;
            let scale = vals.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
            for a in 0..m {
                for b in 0..m {
                    for c in 0..m {
                        for d in 0..m {
                            let v = vals[idx(a, b, c, d)];
                            if (v + vals[idx(b, a, c, d)]).abs() > 1e-12 * scale
                                || (v + vals[idx(a, b, d, c)]).abs() > 1e-12 * scale
                            {
                                return Err(FunctionalError::InvalidField(format!(
                                    "components not antisymmetric at index ({a},{b},{c},{d})"
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Components in the reference coordinates of a cell, from the metric
    /// value `g`, the physical point `x` and the map Jacobian (`m × n`).
    pub fn reference_components(
        &self,
        g: &DMatrix<f64>,
        x: &[f64],
        jac: &DMatrix<f64>,
    ) -> Result<Vec<f64>, FunctionalError> {
        let n = g.nrows();
        match &self.kind {
            FieldKind::Gauss { phi } => {
                let phi = phi.eval(x)?;
                let mut out = vec![0.0; n.pow(4)];
                for p in 0..n {
                    for q in 0..n {
                        for r in 0..n {
                            for s in 0..n {
                                out[((p * n + q) * n + r) * n + s] =
                                    0.5 * (g[(p, r)] * g[(q, s)] - g[(p, s)] * g[(q, r)]) * phi;
                            }
                        }
                    }
                }
                Ok(out)
            }
            FieldKind::Components { comps, ambient } => {
                if x.len() != *ambient {
                    return Err(FunctionalError::InvalidField(format!(
                        "field has {ambient} chart coordinates, mesh has {}",
                        x.len()
                    )));
                }
                let vals = comps.iter().map(|e| e.eval(x)).collect::<Result<Vec<f64>, _>>()?;
                Ok(transform4(&vals, *ambient, jac))
            }
            FieldKind::Combination(terms) => {
                let mut out = vec![0.0; n.pow(4)];
                for (s, f) in terms {
                    for (o, v) in out.iter_mut().zip(f.reference_components(g, x, jac)?) {
                        *o += s * v;
                    }
                }
                Ok(out)
            }
        }
    }
}

/// `T'(a,b,c,d) = T(u_a, u_b, u_c, u_d)` for `u` the columns of `basis`
/// (`m × k`), with `T` given by `m^4` row-major components.
pub fn transform4(t: &[f64], m: usize, basis: &DMatrix<f64>) -> Vec<f64> {
    let k = basis.ncols();
    let mut cur = t.to_vec();
    let mut dims = [m; 4];
    for slot in 0..4 {
        let mut next_dims = dims;
        next_dims[slot] = k;
        let len: usize = next_dims.iter().product();
        let mut next = vec![0.0; len];
        let stride = |d: &[usize; 4], s: usize| d[s + 1..].iter().product::<usize>();
        let old_stride = stride(&dims, slot);
        let new_stride = stride(&next_dims, slot);
        for (pos, out) in next.iter_mut().enumerate() {
            let outer = pos / (new_stride * k);
            let j = pos / new_stride % k;
            let inner = pos % new_stride;
            let base = outer * old_stride * m + inner;
            let mut acc = 0.0;
            for i in 0..m {
                acc += basis[(i, j)] * cur[base + i * old_stride];
            }
            *out = acc;
        }
        cur = next;
        dims = next_dims;
    }
    cur
}

/// JSON form of a test field: `{"kind": "gauss", "phi": "1"}` or
/// `{"kind": "components", "entries": [...]}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FieldInput {
    Gauss { phi: String },
    Components { entries: Vec<String> },
}

impl FieldInput {
    pub fn build(&self, ambient: usize) -> Result<TestFieldA, FunctionalError> {
        match self {
            FieldInput::Gauss { phi } => TestFieldA::gauss(phi, ambient),
            FieldInput::Components { entries } => TestFieldA::components(entries, ambient),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transform_matches_direct_contraction() {
        let m = 3;
        let t: Vec<f64> = (0..81).map(|i| (i as f64 * 0.37).sin()).collect();
        let b = DMatrix::from_row_slice(3, 2, &[1.0, 0.5, -0.2, 2.0, 0.3, 0.7]);
        let out = transform4(&t, m, &b);
        let mut direct = 0.0;
        let (a0, b0, c0, d0) = (1, 0, 1, 1);
        for a in 0..3 {
            for bb in 0..3 {
                for c in 0..3 {
                    for d in 0..3 {
                        direct +=
                            t[((a * 3 + bb) * 3 + c) * 3 + d] * b[(a, a0)] * b[(bb, b0)] * b[(c, c0)] * b[(d, d0)];
                    }
                }
            }
        }
        assert!((out[((a0 * 2 + b0) * 2 + c0) * 2 + d0] - direct).abs() < 1e-13);
    }

    #[test]
    fn rejects_symmetric_components() {
        let texts: Vec<String> = (0..16).map(|_| "1".to_string()).collect();
        assert!(matches!(
            TestFieldA::components(&texts, 2),
            Err(FunctionalError::InvalidField(_))
        ));
    }

    #[test]
    fn gauss_field_is_antisymmetric() {
        let f = TestFieldA::gauss("1 + x1", 2).unwrap();
        let g = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let a = f
            .reference_components(&g, &[0.5, 0.0], &DMatrix::identity(2, 2))
            .unwrap();
        let at = |p: usize, q: usize, r: usize, s: usize| a[((p * 2 + q) * 2 + r) * 2 + s];
        assert_eq!(at(0, 1, 0, 1), -at(1, 0, 0, 1));
        assert!((at(0, 1, 0, 1) - 0.5 * (2.0 - 0.09) * 1.5).abs() < 1e-14);
    }
}
