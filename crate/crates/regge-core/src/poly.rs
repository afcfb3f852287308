//! Monomial polynomial spaces on reference cells and nodal interpolation.

use nalgebra::{DMatrix, DVector};

use crate::mesh::Shape;
use crate::taylor::Scalar;

/// Monomials `ξ^a` spanning P_d (simplex) or Q_d (box) in `nvars` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct PolySpace {
    pub shape: Shape,
    pub nvars: usize,
    pub degree: usize,
    pub exps: Vec<Vec<u8>>,
}

impl PolySpace {
    pub fn new(shape: Shape, nvars: usize, degree: usize) -> PolySpace {
        let exps = multi_indices(shape, nvars, degree);
        PolySpace {
            shape,
            nvars,
            degree,
            exps,
        }
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    /// Equispaced interpolation nodes, in the same order as [`multi_indices`].
    pub fn nodes(&self) -> Vec<Vec<f64>> {
        lattice(self.shape, self.nvars, self.degree)
    }

    pub fn eval<S: Scalar>(&self, coefs: &[f64], xi: &[S]) -> S {
        let mut powers: Vec<Vec<S>> = Vec::with_capacity(self.nvars);
        for x in xi.iter().take(self.nvars) {
            let mut p = vec![S::cst(1.0)];
            for k in 1..=self.degree {
                let prev = p[k - 1];
                p.push(prev * *x);
            }
            powers.push(p);
        }
        let mut acc = S::cst(0.0);
        for (c, e) in coefs.iter().zip(&self.exps) {
            if *c == 0.0 {
                continue;
            }
            let mut term = S::cst(*c);
            for (v, &k) in e.iter().enumerate() {
                if k > 0 {
                    term = term * powers[v][k as usize];
                }
            }
            acc = acc + term;
        }
        acc
    }

    /// Coefficients interpolating `values[k]` at `self.nodes()[k]`, one
    /// coefficient vector per value component.
    pub fn interpolate(&self, values: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let nodes = self.nodes();
        let m = self.len();
        let vander = DMatrix::from_fn(m, m, |r, c| monomial(&self.exps[c], &nodes[r]));
        let lu = vander.lu();
        let ncomp = values.first().map_or(0, |v| v.len());
        (0..ncomp)
            .map(|comp| {
                let rhs = DVector::from_iterator(m, values.iter().map(|v| v[comp]));
                let sol = lu.solve(&rhs).expect("interpolation nodes are unisolvent");
                sol.iter().copied().collect()
            })
            .collect()
    }
}

fn monomial(e: &[u8], x: &[f64]) -> f64 {
    e.iter().zip(x).map(|(&k, &v)| v.powi(k as i32)).product()
}

/// Multi-indices with total degree ≤ d (simplex) or each entry ≤ d (box),
/// lexicographic with the last variable varying fastest.
pub fn multi_indices(shape: Shape, nvars: usize, degree: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut cur = vec![0u8; nvars];
    fill(shape, nvars, degree, 0, degree, &mut cur, &mut out);
    out
}

fn fill(
    shape: Shape,
    nvars: usize,
    degree: usize,
    var: usize,
    budget: usize,
    cur: &mut Vec<u8>,
    out: &mut Vec<Vec<u8>>,
) {
    if var == nvars {
        out.push(cur.clone());
        return;
    }
    let top = match shape {
        Shape::Simplex => budget,
        Shape::Box => degree,
    };
    for k in 0..=top {
        cur[var] = k as u8;
        let rest = match shape {
            Shape::Simplex => budget - k,
            Shape::Box => degree,
        };
        fill(shape, nvars, degree, var + 1, rest, cur, out);
    }
    cur[var] = 0;
}

/// Points `k / d` over the multi-indices of [`multi_indices`]; degree 0 gives
/// the centroid.
pub fn lattice(shape: Shape, nvars: usize, degree: usize) -> Vec<Vec<f64>> {
    if degree == 0 {
        let c = match shape {
            Shape::Simplex => 1.0 / (nvars as f64 + 1.0),
            Shape::Box => 0.5,
        };
        return vec![vec![c; nvars]];
    }
    multi_indices(shape, nvars, degree)
        .into_iter()
        .map(|e| e.iter().map(|&k| k as f64 / degree as f64).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions_of_spaces() {
        assert_eq!(PolySpace::new(Shape::Simplex, 2, 3).len(), 10);
        assert_eq!(PolySpace::new(Shape::Simplex, 3, 2).len(), 10);
        assert_eq!(PolySpace::new(Shape::Box, 2, 2).len(), 9);
    }

    #[test]
    fn interpolation_reproduces_polynomials() {
        let space = PolySpace::new(Shape::Simplex, 2, 3);
        let f = |x: &[f64]| 1.0 - 2.0 * x[0] + x[0] * x[1] * x[1] + 0.5 * x[1].powi(3);
        let vals: Vec<Vec<f64>> = space.nodes().iter().map(|p| vec![f(p)]).collect();
        let c = space.interpolate(&vals);
        for p in [[0.1, 0.2], [0.7, 0.05], [0.3, 0.3]] {
            assert!((space.eval(&c[0], &p) - f(&p)).abs() < 1e-13);
        }
    }
}
