//! Exterior algebra over an orthonormal coframe `e^1..e^n`, with basis
//! monomials indexed by bitmask.

#[derive(Debug, Clone, PartialEq)]
pub struct Form {
    n: usize,
    coeffs: Vec<f64>,
}

/// Sign of `e^a ∧ e^b` relative to `e^{a|b}`, zero if they overlap.
fn merge_sign(a: usize, b: usize) -> f64 {
    if a & b != 0 {
        return 0.0;
    }
    // Count pairs (i in a, j in b) with i > j.
    let mut swaps = 0;
    let mut rest = a;
    while rest != 0 {
        let i = rest.trailing_zeros();
        swaps += (b & ((1usize << i) - 1)).count_ones();
        rest &= rest - 1;
    }
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl Form {
    pub fn zero(n: usize) -> Form {
        Form {
            n,
            coeffs: vec![0.0; 1 << n],
        }
    }

    /// `e^{i_1} ∧ … ∧ e^{i_k}` for the given (distinct) indices, in order.
    pub fn basis(n: usize, indices: &[usize]) -> Form {
        let mut f = Form::zero(n);
        let mut mask = 0usize;
        let mut sign = 1.0;
        for &i in indices {
            sign *= merge_sign(mask, 1 << i);
            mask |= 1 << i;
        }
        f.coeffs[mask] = sign;
        f
    }

    pub fn coeff(&self, mask: usize) -> f64 {
        self.coeffs[mask]
    }

    /// Coefficient of the top form `e^1 ∧ … ∧ e^n`.
    pub fn top(&self) -> f64 {
        self.coeffs[(1 << self.n) - 1]
    }

    pub fn add_scaled(&mut self, s: f64, other: &Form) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += s * b;
        }
    }

    pub fn wedge(&self, other: &Form) -> Form {
        let mut out = Form::zero(self.n);
        for (a, &x) in self.coeffs.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            for (b, &y) in other.coeffs.iter().enumerate() {
                if y != 0.0 && a & b == 0 {
                    out.coeffs[a | b] += merge_sign(a, b) * x * y;
                }
            }
        }
        out
    }

    /// Hodge star with `α ∧ ⋆β = ⟨α, β⟩ e^1 ∧ … ∧ e^n`.
    pub fn star(&self) -> Form {
        let full = (1usize << self.n) - 1;
        let mut out = Form::zero(self.n);
        for (a, &x) in self.coeffs.iter().enumerate() {
            if x != 0.0 {
                out.coeffs[full ^ a] += merge_sign(a, full ^ a) * x;
            }
        }
        out
    }

    /// Pullback to the span of the first `k` coframe directions, expressed
    /// in `k` dimensions.
    pub fn restrict(&self, k: usize) -> Form {
        let mut out = Form::zero(k);
        out.coeffs.copy_from_slice(&self.coeffs[..1 << k]);
        out
    }
}

/// Trace pairing `⟨A ∧ B⟩ = Σ A[i][j] ∧ B[j][i]` of matrix-valued forms.
pub fn trace_wedge(a: &[Vec<Form>], b: &[Vec<Form>]) -> Form {
    let n = a.len();
    let dim = a[0][0].n;
    let mut out = Form::zero(dim);
    for i in 0..n {
        for j in 0..n {
            out.add_scaled(1.0, &a[i][j].wedge(&b[j][i]));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anticommuting_one_forms() {
        let a = Form::basis(3, &[0]);
        let b = Form::basis(3, &[1]);
        let ab = a.wedge(&b);
        let ba = b.wedge(&a);
        assert_eq!(ab.coeff(0b011), 1.0);
        assert_eq!(ba.coeff(0b011), -1.0);
        assert_eq!(a.wedge(&a).coeffs.iter().map(|x| x.abs()).sum::<f64>(), 0.0);
    }

    #[test]
    fn star_defining_identity() {
        for n in 2..=4 {
            for mask in 0..(1usize << n) {
                let idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
                let f = Form::basis(n, &idx);
                assert_eq!(f.wedge(&f.star()).top(), 1.0);
            }
        }
    }

    #[test]
    fn star_in_three_dimensions() {
        // ⋆e^1 = e^2 ∧ e^3, ⋆e^2 = −e^1 ∧ e^3
        assert_eq!(Form::basis(3, &[0]).star().coeff(0b110), 1.0);
        assert_eq!(Form::basis(3, &[1]).star().coeff(0b101), -1.0);
        assert_eq!(Form::basis(3, &[2, 1]).coeff(0b110), -1.0);
    }
}
