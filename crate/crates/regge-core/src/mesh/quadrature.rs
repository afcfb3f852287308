//! Gauss quadrature on reference simplices and boxes.
//!
//! Simplex rules are collapsed (Duffy) tensor products of Gauss-Legendre
//! rules; box rules are plain tensor products.

use super::{MeshError, Shape};

/// Highest exactness degree offered.
pub const MAX_DEGREE: usize = 60;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub shape: Shape,
    pub dim: usize,
    pub degree: usize,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn new(shape: Shape, dim: usize, degree: usize) -> Result<QuadratureRule, MeshError> {
        if degree > MAX_DEGREE {
            return Err(MeshError::DegreeUnavailable {
                requested: degree,
                max: MAX_DEGREE,
            });
        }
        let (points, weights) = match (shape, dim) {
            (_, 0) => (vec![vec![]], vec![1.0]),
            (Shape::Box, _) => box_rule(dim, degree),
            (Shape::Simplex, _) => simplex_rule(dim, degree),
        };
        Ok(QuadratureRule {
            shape,
            dim,
            degree,
            points,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(p)).sum()
    }
}

/// Rule on the reference simplex of the given dimension.
pub fn quadrature_rule(dim: usize, degree: usize) -> Result<QuadratureRule, MeshError> {
    QuadratureRule::new(Shape::Simplex, dim, degree)
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(m, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(m, z);
        if d != 0.0 {
            dp = d;
        }
        let wt = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = 0.5 * (1.0 - z);
        x[m - 1 - i] = 0.5 * (1.0 + z);
        w[i] = 0.5 * wt;
        w[m - 1 - i] = 0.5 * wt;
    }
    (x, w)
}

fn legendre(m: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=m {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if m == 0 {
        return (1.0, 0.0);
    }
    let d = m as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

fn box_rule(dim: usize, degree: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let (x, w) = gauss_legendre(degree / 2 + 1);
    let mut pts = vec![vec![]];
    let mut wts = vec![1.0];
    for _ in 0..dim {
        let mut np = Vec::new();
        let mut nw = Vec::new();
        for (p, pw) in pts.iter().zip(&wts) {
            for (xi, wi) in x.iter().zip(&w) {
                let mut q = p.clone();
                q.push(*xi);
                np.push(q);
                nw.push(pw * wi);
            }
        }
        pts = np;
        wts = nw;
    }
    (pts, wts)
}

fn simplex_rule(dim: usize, degree: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    // Collapsed coordinates u_k in [0,1]; the Jacobian contributes
    // (1-u_k)^(dim-1-k), raising the degree needed in direction k.
    let rules: Vec<(Vec<f64>, Vec<f64>)> = (0..dim)
        .map(|k| gauss_legendre((degree + dim - 1 - k) / 2 + 1))
        .collect();
    let mut pts = Vec::new();
    let mut wts = Vec::new();
    let mut idx = vec![0usize; dim];
    loop {
        let mut x = vec![0.0; dim];
        let mut scale = 1.0;
        let mut w = 1.0;
        for k in 0..dim {
            let (u, uw) = (rules[k].0[idx[k]], rules[k].1[idx[k]]);
            x[k] = scale * u;
            w *= uw;
            if k + 1 < dim {
                w *= (1.0 - u).powi((dim - 1 - k) as i32);
            }
            scale *= 1.0 - u;
        }
        pts.push(x);
        wts.push(w);
        let mut k = dim;
        loop {
            if k == 0 {
                return (pts, wts);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < rules[k].0.len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    /// ∫ over the reference simplex of Π x_i^{a_i}: Π a_i! / (Σa_i + dim)!
    fn simplex_monomial(a: &[u32]) -> f64 {
        let num: f64 = a.iter().map(|&k| factorial(k)).product();
        num / factorial(a.iter().sum::<u32>() + a.len() as u32)
    }

    #[test]
    fn midpoint_rule() {
        let r = quadrature_rule(1, 0).unwrap();
        assert_eq!(r.points, vec![vec![0.5]]);
        assert_eq!(r.weights, vec![1.0]);
    }

    #[test]
    fn linear_on_triangle() {
        let r = quadrature_rule(2, 1).unwrap();
        let v = r.integrate(|p| p[0] + p[1]);
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn degree_ten_monomial() {
        // Beta-function value 5!5!/12! = 1/33264.
        let exact = simplex_monomial(&[5, 5]);
        assert!((exact * 33264.0 - 1.0).abs() < 1e-15);
        let r = quadrature_rule(2, 10).unwrap();
        let v = r.integrate(|p| p[0].powi(5) * p[1].powi(5));
        assert!((v / exact - 1.0).abs() < 1e-13);
    }

    #[test]
    fn exact_on_all_monomials() {
        for dim in 1..=3usize {
            for degree in [0usize, 1, 2, 5, 8, 13, 20] {
                let r = quadrature_rule(dim, degree).unwrap();
                let vol: f64 = r.weights.iter().sum();
                assert!((vol - 1.0 / factorial(dim as u32)).abs() < 1e-14);
                for e in crate::poly::multi_indices(Shape::Simplex, dim, degree) {
                    let a: Vec<u32> = e.iter().map(|&k| k as u32).collect();
                    let exact = simplex_monomial(&a);
                    let got = r.integrate(|p| p.iter().zip(&a).map(|(x, &k)| x.powi(k as i32)).product());
                    assert!(((got - exact) / exact).abs() < 1e-13, "dim {dim} deg {degree} {a:?}");
                }
            }
        }
    }

    #[test]
    fn box_rule_exactness() {
        let r = QuadratureRule::new(Shape::Box, 2, 7).unwrap();
        let got = r.integrate(|p| p[0].powi(7) * p[1].powi(6));
        assert!((got - 1.0 / 56.0).abs() < 1e-15);
    }

    #[test]
    fn degree_cap() {
        assert!(matches!(
            quadrature_rule(2, MAX_DEGREE + 1),
            Err(MeshError::DegreeUnavailable { .. })
        ));
        assert!(quadrature_rule(3, 20).is_ok());
    }
}
