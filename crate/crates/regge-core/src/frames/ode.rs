//! Orthonormalisation and the frame-evolution ODE at a single point.

use nalgebra::DMatrix;
use serde::Serialize;

use super::FrameError;

/// `G = L D Lᵀ` without pivoting; `None` on a vanishing pivot.
fn ldl(g: &DMatrix<f64>) -> Option<(DMatrix<f64>, Vec<f64>)> {
    let n = g.nrows();
    let scale = g.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut l = DMatrix::identity(n, n);
    let mut d = vec![0.0; n];
    for j in 0..n {
        let mut dj = g[(j, j)];
        for k in 0..j {
            dj -= l[(j, k)] * l[(j, k)] * d[k];
        }
        if !(dj.abs() > 1e-14 * scale) {
            return None;
        }
        d[j] = dj;
        for i in j + 1..n {
            let mut v = g[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)] * d[k];
            }
            l[(i, j)] = v / dj;
        }
    }
    Some((l, d))
}

/// Pivot signs of the LDL factorisation, i.e. the signature.
pub fn signature(g: &DMatrix<f64>) -> Option<Vec<f64>> {
    ldl(g).map(|(_, d)| d.iter().map(|v| v.signum()).collect())
}

/// Result of orthonormalising a seed frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Orthonormalization {
    /// Lower-triangular `X` with `Xᵀ G̃ X = η`, `G̃ = seedᵀ g seed`.
    pub factor: DMatrix<f64>,
    /// `seed · X`.
    pub frame: DMatrix<f64>,
    /// Diagonal of `η`.
    pub signature: Vec<f64>,
}

/// Orthonormalise `seed` for `g` through the LDL square root of `G̃⁻¹`:
/// `G̃⁻¹ = L D Lᵀ`, `X = L |D|^{1/2}`.
pub fn ldl_orthonormalize(g: &DMatrix<f64>, seed: &DMatrix<f64>) -> Result<Orthonormalization, FrameError> {
    let gt = seed.transpose() * g * seed;
    let inv = gt.clone().try_inverse().ok_or(FrameError::SingularMetric)?;
    let inv = (&inv + inv.transpose()) * 0.5;
    let (l, d) = ldl(&inv).ok_or(FrameError::SingularMetric)?;
    let n = d.len();
    let factor = l * DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, d.iter().map(|v| v.abs().sqrt())));
    Ok(Orthonormalization {
        frame: seed * &factor,
        factor,
        signature: d.iter().map(|v| v.signum()).collect(),
    })
}

/// As [`ldl_orthonormalize`], failing if the signature differs from `expected`.
pub fn ldl_orthonormalize_with(
    g: &DMatrix<f64>,
    seed: &DMatrix<f64>,
    expected: &[f64],
) -> Result<Orthonormalization, FrameError> {
    let o = ldl_orthonormalize(g, seed)?;
    if o.signature != expected {
        return Err(FrameError::SignatureChange { step: 0 });
    }
    Ok(o)
}

/// Affine metric path `g(t) = (1 − t) g₀ + t g₁` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricPath {
    start: DMatrix<f64>,
    end: DMatrix<f64>,
}

impl MetricPath {
    pub fn affine(start: DMatrix<f64>, end: DMatrix<f64>) -> MetricPath {
        MetricPath { start, end }
    }

    pub fn constant(g: DMatrix<f64>) -> MetricPath {
        MetricPath {
            start: g.clone(),
            end: g,
        }
    }

    pub fn dim(&self) -> usize {
        self.start.nrows()
    }

    pub fn at(&self, t: f64) -> DMatrix<f64> {
        &self.start * (1.0 - t) + &self.end * t
    }

    /// `ġ`, constant along the path.
    pub fn rate(&self) -> DMatrix<f64> {
        &self.end - &self.start
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    /// Largest tolerated `max |uᵀ G̃(t) u − η|` over the steps.
    pub drift_bound: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions { drift_bound: 1e-6 }
    }
}

/// Sampled solution of the frame ODE, `f(t) = f(0) · u(t)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameHomotopy {
    pub steps: usize,
    pub times: Vec<f64>,
    /// `f(0)`, rows then columns.
    pub initial: Vec<Vec<f64>>,
    /// `u(t)` at each time.
    pub factors: Vec<Vec<Vec<f64>>>,
    /// Orthonormality residual at each time.
    pub drift: Vec<f64>,
    pub max_drift: f64,
    pub signature: Vec<f64>,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn from_rows(r: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(r.len(), r.first().map_or(0, |x| x.len()), |i, j| r[i][j])
}

impl FrameHomotopy {
    pub fn factor(&self, step: usize) -> DMatrix<f64> {
        from_rows(&self.factors[step])
    }

    pub fn final_factor(&self) -> DMatrix<f64> {
        self.factor(self.steps)
    }

    pub fn frame(&self, step: usize) -> DMatrix<f64> {
        from_rows(&self.initial) * self.factor(step)
    }

    pub fn final_frame(&self) -> DMatrix<f64> {
        self.frame(self.steps)
    }
}

fn skew_residual(k: &DMatrix<f64>) -> f64 {
    (k + k.transpose()).iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |a, v| a.max(v.abs()))
}

/// Integrate `u̇ = u η (K − ½ uᵀ σ̃ u)`, `u(0) = I`, with classical RK4 and
/// step `1/steps`, where `σ̃ = f₀ᵀ ġ f₀` and `η` is the signature of
/// `f₀ᵀ g(0) f₀`. This keeps `f₀ u` orthonormal for `g(t)`.
pub fn evolve_frame(
    path: &MetricPath,
    initial: &DMatrix<f64>,
    skew: &dyn Fn(f64) -> DMatrix<f64>,
    steps: usize,
    options: EvolveOptions,
) -> Result<FrameHomotopy, FrameError> {
    let n = path.dim();
    if steps == 0 {
        return Err(FrameError::InvalidInput("at least one step is needed".into()));
    }
    if initial.nrows() != n || initial.ncols() != n {
        return Err(FrameError::InvalidInput(
            "initial frame does not match the metric".into(),
        ));
    }
    let gram = |t: f64| initial.transpose() * path.at(t) * initial;
    let g0 = gram(0.0);
    let eta = signature(&g0).ok_or(FrameError::SingularMetric)?;
    let eta_m = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&eta));
    let start_residual = max_abs(&(&g0 - &eta_m));
    if start_residual > 1e-10 {
        return Err(FrameError::NotOrthonormal {
            residual: start_residual,
        });
    }
    let sigma = initial.transpose() * path.rate() * initial;

    let rhs = |t: f64, u: &DMatrix<f64>| -> Result<DMatrix<f64>, FrameError> {
        let k = skew(t);
        let scale = max_abs(&k).max(1.0);
        let r = skew_residual(&k);
        if r > 1e-12 * scale {
            return Err(FrameError::NonSkewK { t, residual: r });
        }
        Ok(u * &eta_m * (k - u.transpose() * &sigma * u * 0.5))
    };

    let h = 1.0 / steps as f64;
    let mut u = DMatrix::identity(n, n);
    let mut times = vec![0.0];
    let mut factors = vec![rows(&u)];
    let mut drift = vec![start_residual];
    for s in 0..steps {
        let t = s as f64 * h;
        let k1 = rhs(t, &u)?;
        let k2 = rhs(t + h / 2.0, &(&u + &k1 * (h / 2.0)))?;
        let k3 = rhs(t + h / 2.0, &(&u + &k2 * (h / 2.0)))?;
        let k4 = rhs(t + h, &(&u + &k3 * h))?;
        u += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        let t1 = (s + 1) as f64 * h;
        let gt = gram(t1);
        if signature(&gt).as_deref() != Some(eta.as_slice()) {
            return Err(FrameError::SignatureChange { step: s + 1 });
        }
        times.push(t1);
        factors.push(rows(&u));
        drift.push(max_abs(&(u.transpose() * gt * &u - &eta_m)));
    }
    let max_drift = drift.iter().fold(0.0_f64, |m, &d| m.max(d));
    if !(max_drift <= options.drift_bound) {
        return Err(FrameError::DriftExceeded {
            drift: max_drift,
            bound: options.drift_bound,
        });
    }
    Ok(FrameHomotopy {
        steps,
        times,
        initial: rows(initial),
        factors,
        drift,
        max_drift,
        signature: eta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero(n: usize) -> impl Fn(f64) -> DMatrix<f64> {
        move |_| DMatrix::zeros(n, n)
    }

    #[test]
    fn ldl_examples() {
        let i2 = DMatrix::identity(2, 2);
        assert_eq!(ldl_orthonormalize(&i2, &i2).unwrap().factor, i2);
        let x = ldl_orthonormalize(&DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 9.0]), &i2).unwrap();
        assert!((x.factor.clone() - DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 1.0 / 3.0])).norm() < 1e-15);
        let g = DMatrix::from_row_slice(2, 2, &[2.0, 0.7, 0.7, 1.5]);
        let seed = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, -0.2, 1.1]);
        let o = ldl_orthonormalize(&g, &seed).unwrap();
        assert_eq!(o.factor[(0, 1)], 0.0);
        let r = o.frame.transpose() * &g * &o.frame - DMatrix::identity(2, 2);
        assert!(max_abs(&r) < 1e-13);
    }

    #[test]
    fn indefinite_signature() {
        let g = DMatrix::from_row_slice(2, 2, &[-1.0, 0.2, 0.2, 3.0]);
        let o = ldl_orthonormalize(&g, &DMatrix::identity(2, 2)).unwrap();
        let eta = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&o.signature));
        assert!(max_abs(&(o.frame.transpose() * &g * &o.frame - eta)) < 1e-13);
        assert!(matches!(
            ldl_orthonormalize_with(&g, &DMatrix::identity(2, 2), &[1.0, 1.0]),
            Err(FrameError::SignatureChange { .. })
        ));
        assert_eq!(
            ldl_orthonormalize(&DMatrix::zeros(2, 2), &DMatrix::identity(2, 2)),
            Err(FrameError::SingularMetric)
        );
    }

    #[test]
    fn conformal_path() {
        let path = MetricPath::affine(DMatrix::identity(2, 2), DMatrix::identity(2, 2) * 2.0);
        let h = evolve_frame(&path, &DMatrix::identity(2, 2), &zero(2), 100, EvolveOptions::default()).unwrap();
        let expected = DMatrix::identity(2, 2) * 0.5_f64.sqrt();
        assert!((h.final_factor() - expected).norm() < 1e-8);
        assert!(h.max_drift < 1e-10);
    }

    #[test]
    fn constant_path_is_stationary() {
        let g = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let f0 = ldl_orthonormalize(&g, &DMatrix::identity(2, 2)).unwrap().frame;
        let h = evolve_frame(&MetricPath::constant(g), &f0, &zero(2), 10, EvolveOptions::default()).unwrap();
        for s in 0..=10 {
            assert!((h.factor(s) - DMatrix::identity(2, 2)).norm() < 1e-15);
        }
    }

    #[test]
    fn constant_skew_gives_rotation() {
        let w = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let k = move |_t: f64| w.clone();
        let h = evolve_frame(
            &MetricPath::constant(DMatrix::identity(2, 2)),
            &DMatrix::identity(2, 2),
            &k,
            100,
            EvolveOptions::default(),
        )
        .unwrap();
        let (s, c) = 1.0_f64.sin_cos();
        let exact = DMatrix::from_row_slice(2, 2, &[c, s, -s, c]);
        assert!((h.final_factor() - exact).norm() < 1e-9);
    }

    #[test]
    fn rejects_bad_input() {
        let path = MetricPath::constant(DMatrix::identity(2, 2));
        let sym = |_t: f64| DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(matches!(
            evolve_frame(&path, &DMatrix::identity(2, 2), &sym, 4, EvolveOptions::default()),
            Err(FrameError::NonSkewK { .. })
        ));
        assert!(matches!(
            evolve_frame(
                &path,
                &(DMatrix::identity(2, 2) * 2.0),
                &zero(2),
                4,
                EvolveOptions::default()
            ),
            Err(FrameError::NotOrthonormal { .. })
        ));
        let coarse = MetricPath::affine(DMatrix::identity(2, 2), DMatrix::identity(2, 2) * 50.0);
        assert!(matches!(
            evolve_frame(&coarse, &DMatrix::identity(2, 2), &zero(2), 2, EvolveOptions::default()),
            Err(FrameError::DriftExceeded { .. })
        ));
        let flip = MetricPath::affine(
            DMatrix::identity(2, 2),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]),
        );
        assert!(matches!(
            evolve_frame(
                &flip,
                &DMatrix::identity(2, 2),
                &zero(2),
                10,
                EvolveOptions { drift_bound: 1e9 }
            ),
            Err(FrameError::SignatureChange { .. }) | Err(FrameError::DriftExceeded { .. })
        ));
    }
}
