//! Blending data given on faces of a reference simplex into the interior.
//!
//! Face `i` is `{λ_i = 0}` with `λ_0 = 1 − Σξ` and `λ_j = ξ_j`. For listed
//! faces `I`, `A(ξ) = Σ_i A^i(π_i ξ) Λ̂_i / Σ_i Λ̂_i` with
//! `Λ̂_i = Π_{j ∈ I, j ≠ i} λ_j` and `π_i` the affine projection along the
//! direction from vertex `i` to the centroid of face `i`.

use super::FrameError;

/// Data on one face, as a function of cell reference coordinates.
pub type FaceData<'a> = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync + 'a>;

pub fn barycentric(xi: &[f64]) -> Vec<f64> {
    let mut l = Vec::with_capacity(xi.len() + 1);
    l.push(1.0 - xi.iter().sum::<f64>());
    l.extend_from_slice(xi);
    l
}

fn from_barycentric(l: &[f64]) -> Vec<f64> {
    l[1..].to_vec()
}

/// Projection onto face `face`, moving along the line from its opposite
/// vertex through the face centroid.
pub fn project_to_face(xi: &[f64], face: usize) -> Vec<f64> {
    let mut l = barycentric(xi);
    let share = l[face] / xi.len() as f64;
    for (j, v) in l.iter_mut().enumerate() {
        if j == face {
            *v = 0.0;
        } else {
            *v += share;
        }
    }
    from_barycentric(&l)
}

/// Blending weights `Λ̂_i / Σ Λ̂_i` of the listed faces; `None` where the
/// point lies on two or more listed faces.
pub fn blend_weights(xi: &[f64], listed: &[usize]) -> Option<Vec<f64>> {
    let l = barycentric(xi);
    let hats: Vec<f64> = listed
        .iter()
        .map(|&i| listed.iter().filter(|&&j| j != i).map(|&j| l[j].max(0.0)).product())
        .collect();
    let total: f64 = hats.iter().sum();
    if total > 0.0 {
        Some(hats.iter().map(|h| h / total).collect())
    } else {
        None
    }
}

pub struct FaceExtension<'a> {
    dim: usize,
    faces: Vec<(usize, FaceData<'a>)>,
}

/// Extension of per-face data into the reference simplex of dimension
/// `dim`, after checking that the data agree on shared sub-faces.
pub fn face_extension_weights(dim: usize, faces: Vec<(usize, FaceData<'_>)>) -> Result<FaceExtension<'_>, FrameError> {
    if faces.is_empty() || faces.iter().any(|(i, _)| *i > dim) {
        return Err(FrameError::InvalidInput("face indices must lie in 0..=dim".into()));
    }
    let ext = FaceExtension { dim, faces };
    ext.check_agreement()?;
    Ok(ext)
}

impl<'a> FaceExtension<'a> {
    fn listed(&self) -> Vec<usize> {
        self.faces.iter().map(|(i, _)| *i).collect()
    }

    /// Points on `{λ_a = λ_b = 0}`: its vertices, centroid and edge midpoints.
    fn shared_points(&self, a: usize, b: usize) -> Vec<Vec<f64>> {
        let rest: Vec<usize> = (0..=self.dim).filter(|&v| v != a && v != b).collect();
        let vertex = |v: usize| -> Vec<f64> {
            let mut l = vec![0.0; self.dim + 1];
            l[v] = 1.0;
            l
        };
        let mut pts: Vec<Vec<f64>> = rest.iter().map(|&v| vertex(v)).collect();
        for (x, &p) in rest.iter().enumerate() {
            for &q in &rest[x + 1..] {
                pts.push(vertex(p).iter().zip(vertex(q)).map(|(s, t)| 0.5 * (s + t)).collect());
            }
        }
        if rest.len() > 2 {
            pts.push(rest.iter().fold(vec![0.0; self.dim + 1], |mut acc, &v| {
                acc[v] += 1.0 / rest.len() as f64;
                acc
            }));
        }
        pts.iter().map(|l| from_barycentric(l)).collect()
    }

    fn check_agreement(&self) -> Result<(), FrameError> {
        for (x, (a, fa)) in self.faces.iter().enumerate() {
            for (b, fb) in &self.faces[x + 1..] {
                for p in self.shared_points(*a, *b) {
                    let (va, vb) = (fa(&p), fb(&p));
                    let gap = va.iter().zip(&vb).fold(0.0_f64, |m, (s, t)| m.max((s - t).abs()));
                    let scale = va.iter().fold(1.0_f64, |m, s| m.max(s.abs()));
                    if va.len() != vb.len() || gap > 1e-12 * scale {
                        return Err(FrameError::FaceDataMismatch { faces: (*a, *b), gap });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, xi: &[f64]) -> Vec<f64> {
        let listed = self.listed();
        match blend_weights(xi, &listed) {
            Some(w) => {
                let mut out: Vec<f64> = Vec::new();
                for ((i, data), wi) in self.faces.iter().zip(w) {
                    if wi == 0.0 {
                        continue;
                    }
                    let v = data(&project_to_face(xi, *i));
                    if out.is_empty() {
                        out = vec![0.0; v.len()];
                    }
                    for (o, s) in out.iter_mut().zip(v) {
                        *o += wi * s;
                    }
                }
                out
            }
            None => {
                let l = barycentric(xi);
                let (_, data) = self
                    .faces
                    .iter()
                    .find(|(i, _)| l[*i] <= 0.0)
                    .expect("a listed face contains the point");
                data(xi)
            }
        }
    }

    /// Largest central-difference gradient norm over a lattice of interior
    /// points with `per_side` subdivisions.
    pub fn lipschitz_estimate(&self, per_side: usize) -> f64 {
        let h = 1e-6;
        let mut best = 0.0_f64;
        let m = per_side.max(3);
        let mut idx = vec![1usize; self.dim];
        loop {
            let xi: Vec<f64> = idx.iter().map(|&k| k as f64 / m as f64).collect();
            if xi.iter().sum::<f64>() < 1.0 - 0.5 / m as f64 {
                let mut grad2 = 0.0;
                for k in 0..self.dim {
                    let mut p = xi.clone();
                    p[k] += h;
                    let up = self.eval(&p);
                    p[k] -= 2.0 * h;
                    let down = self.eval(&p);
                    grad2 += up
                        .iter()
                        .zip(&down)
                        .map(|(a, b)| ((a - b) / (2.0 * h)).powi(2))
                        .sum::<f64>();
                }
                best = best.max(grad2.sqrt());
            }
            let mut k = 0;
            loop {
                if k == self.dim {
                    return best;
                }
                idx[k] += 1;
                if idx[k] < m {
                    break;
                }
                idx[k] = 1;
                k += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data<'a>(f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'a) -> FaceData<'a> {
        Box::new(f)
    }

    #[test]
    fn constant_data() {
        let ext = face_extension_weights(2, (0..3).map(|i| (i, data(|_| vec![2.5]))).collect()).unwrap();
        for xi in [[0.2, 0.3], [0.6, 0.1], [0.0, 0.5], [1.0, 0.0]] {
            assert!((ext.eval(&xi)[0] - 2.5).abs() < 1e-15);
        }
    }

    #[test]
    fn reproduces_face_data() {
        // Restrictions of one affine function, so corners agree.
        let f = |xi: &[f64]| vec![1.0 + 2.0 * xi[0] - 3.0 * xi[1], xi[0] * xi[1]];
        let ext = face_extension_weights(2, (0..3).map(|i| (i, data(f))).collect()).unwrap();
        for s in [0.1, 0.37, 0.8] {
            for p in [[s, 1.0 - s], [0.0, s], [s, 0.0]] {
                let (a, b) = (ext.eval(&p), f(&p));
                assert!((a[0] - b[0]).abs() < 1e-13 && (a[1] - b[1]).abs() < 1e-13);
            }
        }
        assert!(ext.lipschitz_estimate(8).is_finite());
    }

    #[test]
    fn linear_in_data() {
        let f = |xi: &[f64]| vec![xi[0].sin()];
        let g = |xi: &[f64]| vec![xi[1].exp()];
        let fg = |xi: &[f64]| vec![2.0 * xi[0].sin() - xi[1].exp()];
        let a = face_extension_weights(2, vec![(1, data(f)), (2, data(f))]).unwrap();
        let b = face_extension_weights(2, vec![(1, data(g)), (2, data(g))]).unwrap();
        let c = face_extension_weights(2, vec![(1, data(fg)), (2, data(fg))]).unwrap();
        let xi = [0.3, 0.25];
        assert!((c.eval(&xi)[0] - (2.0 * a.eval(&xi)[0] - b.eval(&xi)[0])).abs() < 1e-14);
    }

    #[test]
    fn mismatch_detected() {
        let faces = vec![(0, data(|_| vec![1.0])), (1, data(|_| vec![2.0]))];
        assert!(matches!(
            face_extension_weights(2, faces),
            Err(FrameError::FaceDataMismatch { faces: (0, 1), .. })
        ));
    }

    #[test]
    fn tetrahedron_faces() {
        let f = |xi: &[f64]| vec![xi[0] + 2.0 * xi[1] * xi[2]];
        let ext = face_extension_weights(3, (0..4).map(|i| (i, data(f))).collect()).unwrap();
        let p = [0.2, 0.0, 0.5];
        assert!((ext.eval(&p)[0] - f(&p)[0]).abs() < 1e-13);
    }
}
