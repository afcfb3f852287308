//! Truncated multivariate Taylor polynomials.
//!
//! A [`Jet`] holds the Taylor coefficients of a function of up to three
//! variables, up to total order three, at a single point. Arithmetic on jets
//! propagates derivatives exactly; this is how metric derivatives, pulled back
//! geometry maps and frame derivatives are obtained without finite differences.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::OnceLock;

pub const MAX_VARS: usize = 3;
pub const MAX_ORDER: usize = 3;
const MAX_COEFS: usize = 20;

type Exp = [u8; MAX_VARS];

struct Layout {
    exps: Vec<Exp>,
    /// `products[k]` lists index pairs whose exponents add up to `exps[k]`.
    products: Vec<Vec<(u8, u8)>>,
}

impl Layout {
    fn build(nvars: usize, order: usize) -> Layout {
        let mut exps = Vec::new();
        for deg in 0..=order {
            let mut cur = [0u8; MAX_VARS];
            push_degree(nvars, deg, 0, &mut cur, &mut exps);
        }
        let mut products = vec![Vec::new(); exps.len()];
        for (i, a) in exps.iter().enumerate() {
            for (j, b) in exps.iter().enumerate() {
                let s = add_exp(a, b);
                if let Some(k) = exps.iter().position(|e| *e == s) {
                    products[k].push((i as u8, j as u8));
                }
            }
        }
        Layout { exps, products }
    }

    fn index_of(&self, e: &Exp) -> Option<usize> {
        self.exps.iter().position(|x| x == e)
    }
}

fn push_degree(nvars: usize, deg: usize, var: usize, cur: &mut Exp, out: &mut Vec<Exp>) {
    if nvars == 0 {
        if deg == 0 {
            out.push(*cur);
        }
        return;
    }
    if var == nvars - 1 {
        cur[var] = deg as u8;
        out.push(*cur);
        cur[var] = 0;
        return;
    }
    for k in (0..=deg).rev() {
        cur[var] = k as u8;
        push_degree(nvars, deg - k, var + 1, cur, out);
    }
    cur[var] = 0;
}

fn add_exp(a: &Exp, b: &Exp) -> Exp {
    let mut s = [0u8; MAX_VARS];
    for i in 0..MAX_VARS {
        s[i] = a[i] + b[i];
    }
    s
}

fn layout(nvars: usize, order: usize) -> &'static Layout {
    static LAYOUTS: OnceLock<Vec<Layout>> = OnceLock::new();
    let all = LAYOUTS.get_or_init(|| {
        let mut v = Vec::new();
        for n in 0..=MAX_VARS {
            for o in 0..=MAX_ORDER {
                v.push(Layout::build(n, o));
            }
        }
        v
    });
    &all[nvars * (MAX_ORDER + 1) + order]
}

/// Taylor coefficients `c_a = ∂^a f / a!` of a scalar function at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    nvars: u8,
    order: u8,
    c: [f64; MAX_COEFS],
}

impl Jet {
    pub fn constant(v: f64) -> Jet {
        let mut c = [0.0; MAX_COEFS];
        c[0] = v;
        Jet { nvars: 0, order: 0, c }
    }

    /// The coordinate function `x_var` expanded at `value`.
    pub fn variable(nvars: usize, order: usize, var: usize, value: f64) -> Jet {
        assert!(nvars <= MAX_VARS && order <= MAX_ORDER && var < nvars);
        let mut c = [0.0; MAX_COEFS];
        c[0] = value;
        if order >= 1 {
            c[1 + var] = 1.0;
        }
        Jet {
            nvars: nvars as u8,
            order: order as u8,
            c,
        }
    }

    /// Independent variables `x_i` expanded at `point`.
    pub fn variables(point: &[f64], order: usize) -> Vec<Jet> {
        (0..point.len())
            .map(|i| Jet::variable(point.len(), order, i, point[i]))
            .collect()
    }

    pub fn nvars(&self) -> usize {
        self.nvars as usize
    }

    pub fn order(&self) -> usize {
        self.order as usize
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    fn len(&self) -> usize {
        layout(self.nvars(), self.order()).exps.len()
    }

    fn coef(&self, e: &Exp) -> f64 {
        if e.iter().map(|&x| x as usize).sum::<usize>() > self.order() {
            return 0.0;
        }
        match layout(self.nvars(), self.order()).index_of(e) {
            Some(k) => self.c[k],
            None => 0.0,
        }
    }

    /// First partial derivative at the expansion point.
    pub fn d1(&self, i: usize) -> f64 {
        if self.nvars() == 0 {
            return 0.0;
        }
        let mut e = [0u8; MAX_VARS];
        e[i] = 1;
        self.coef(&e)
    }

    /// Second partial derivative at the expansion point.
    pub fn d2(&self, i: usize, j: usize) -> f64 {
        if self.nvars() == 0 {
            return 0.0;
        }
        let mut e = [0u8; MAX_VARS];
        e[i] += 1;
        e[j] += 1;
        let v = self.coef(&e);
        if i == j {
            2.0 * v
        } else {
            v
        }
    }

    /// Drop all terms above `order`.
    pub fn truncate(&self, order: usize) -> Jet {
        if order >= self.order() || self.nvars() == 0 {
            return *self;
        }
        let mut c = [0.0; MAX_COEFS];
        let n = layout(self.nvars(), order).exps.len();
        c[..n].copy_from_slice(&self.c[..n]);
        Jet {
            nvars: self.nvars,
            order: order as u8,
            c,
        }
    }

    /// Partial derivative as a jet of one order less.
    pub fn derivative(&self, var: usize) -> Jet {
        if self.nvars() == 0 || self.order() == 0 {
            let mut z = Jet::constant(0.0);
            z.nvars = self.nvars;
            return z;
        }
        let lo = layout(self.nvars(), self.order() - 1);
        let hi = layout(self.nvars(), self.order());
        let mut c = [0.0; MAX_COEFS];
        for (k, e) in lo.exps.iter().enumerate() {
            let mut up = *e;
            up[var] += 1;
            if let Some(idx) = hi.index_of(&up) {
                c[k] = (up[var] as f64) * self.c[idx];
            }
        }
        Jet {
            nvars: self.nvars,
            order: self.order - 1,
            c,
        }
    }

    fn promote(self, other: &Jet) -> (Jet, Jet) {
        let (mut a, mut b) = (self, *other);
        if a.nvars == 0 && b.nvars != 0 {
            a.nvars = b.nvars;
            a.order = b.order;
        } else if b.nvars == 0 && a.nvars != 0 {
            b.nvars = a.nvars;
            b.order = a.order;
        }
        assert_eq!(a.nvars, b.nvars, "jets over different variable sets");
        if a.order != b.order {
            let o = a.order.min(b.order) as usize;
            a = a.truncate(o);
            b = b.truncate(o);
        }
        (a, b)
    }

    /// `Σ_k derivs[k] / k! · (self − value)^k`, i.e. `f(self)` for a smooth `f`.
    pub fn compose(&self, derivs: &[f64]) -> Jet {
        let mut h = *self;
        h.c[0] = 0.0;
        let mut out = Jet::constant(derivs[0]);
        out.nvars = self.nvars;
        out.order = self.order;
        let mut pow = h;
        let mut fact = 1.0;
        for (k, d) in derivs.iter().enumerate().skip(1).take(self.order()) {
            fact *= k as f64;
            out = out + pow.scale(d / fact);
            pow = pow * h;
        }
        out
    }

    /// The Taylor polynomial of `self` with each variable `x_v` replaced by
    /// `inner[v]`, whose values must equal the expansion point.
    pub fn substitute(&self, inner: &[Jet]) -> Jet {
        let lay = layout(self.nvars(), self.order());
        let shifted: Vec<Jet> = inner
            .iter()
            .map(|j| {
                let mut h = *j;
                h.c[0] = 0.0;
                h
            })
            .collect();
        let mut out = Jet::constant(self.c[0]);
        for (k, e) in lay.exps.iter().enumerate().skip(1) {
            if self.c[k] == 0.0 {
                continue;
            }
            let mut t = Jet::constant(self.c[k]);
            for (v, &p) in e.iter().enumerate().take(self.nvars()) {
                for _ in 0..p {
                    t = t * shifted[v];
                }
            }
            out = out + t;
        }
        out
    }

    pub fn scale(&self, s: f64) -> Jet {
        let mut r = *self;
        for v in r.c.iter_mut() {
            *v *= s;
        }
        r
    }

    pub fn recip(&self) -> Jet {
        let a = self.c[0];
        let mut d = [0.0; MAX_ORDER + 1];
        let mut sign = 1.0;
        let mut fact = 1.0;
        for (k, slot) in d.iter_mut().enumerate() {
            if k > 0 {
                fact *= k as f64;
                sign = -sign;
            }
            *slot = sign * fact / a.powi(k as i32 + 1);
        }
        self.compose(&d)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        let (mut a, b) = self.promote(&rhs);
        for k in 0..a.len() {
            a.c[k] += b.c[k];
        }
        a
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        let (mut a, b) = self.promote(&rhs);
        for k in 0..a.len() {
            a.c[k] -= b.c[k];
        }
        a
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let (a, b) = self.promote(&rhs);
        if a.nvars == 0 {
            return Jet::constant(a.c[0] * b.c[0]);
        }
        let lay = layout(a.nvars(), a.order());
        let mut c = [0.0; MAX_COEFS];
        for (k, pairs) in lay.products.iter().enumerate() {
            let mut s = 0.0;
            for &(i, j) in pairs {
                s += a.c[i as usize] * b.c[j as usize];
            }
            c[k] = s;
        }
        Jet {
            nvars: a.nvars,
            order: a.order,
            c,
        }
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Jet) -> Jet {
        self * rhs.recip()
    }
}

/// Numeric type shared by plain floats and jets, so one generic code path
/// evaluates values and derivatives alike.
pub trait Scalar:
    Copy + Debug + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn cst(v: f64) -> Self;
    fn val(&self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn powi(self, k: i32) -> Self;
    fn powf(self, p: f64) -> Self;
}

impl Scalar for f64 {
    fn cst(v: f64) -> f64 {
        v
    }
    fn val(&self) -> f64 {
        *self
    }
    fn sin(self) -> f64 {
        f64::sin(self)
    }
    fn cos(self) -> f64 {
        f64::cos(self)
    }
    fn tan(self) -> f64 {
        f64::tan(self)
    }
    fn sinh(self) -> f64 {
        f64::sinh(self)
    }
    fn cosh(self) -> f64 {
        f64::cosh(self)
    }
    fn exp(self) -> f64 {
        f64::exp(self)
    }
    fn ln(self) -> f64 {
        f64::ln(self)
    }
    fn sqrt(self) -> f64 {
        f64::sqrt(self)
    }
    fn powi(self, k: i32) -> f64 {
        f64::powi(self, k)
    }
    fn powf(self, p: f64) -> f64 {
        f64::powf(self, p)
    }
}

impl Scalar for Jet {
    fn cst(v: f64) -> Jet {
        Jet::constant(v)
    }
    fn val(&self) -> f64 {
        self.c[0]
    }
    fn sin(self) -> Jet {
        let (s, c) = self.c[0].sin_cos();
        self.compose(&[s, c, -s, -c])
    }
    fn cos(self) -> Jet {
        let (s, c) = self.c[0].sin_cos();
        self.compose(&[c, -s, -c, s])
    }
    fn tan(self) -> Jet {
        let t = self.c[0].tan();
        let s2 = 1.0 + t * t;
        self.compose(&[t, s2, 2.0 * t * s2, s2 * (2.0 * s2 + 4.0 * t * t)])
    }
    fn sinh(self) -> Jet {
        let (s, c) = (self.c[0].sinh(), self.c[0].cosh());
        self.compose(&[s, c, s, c])
    }
    fn cosh(self) -> Jet {
        let (s, c) = (self.c[0].sinh(), self.c[0].cosh());
        self.compose(&[c, s, c, s])
    }
    fn exp(self) -> Jet {
        let e = self.c[0].exp();
        self.compose(&[e, e, e, e])
    }
    fn ln(self) -> Jet {
        let a = self.c[0];
        self.compose(&[a.ln(), 1.0 / a, -1.0 / (a * a), 2.0 / (a * a * a)])
    }
    fn sqrt(self) -> Jet {
        self.powf(0.5)
    }
    fn powi(self, k: i32) -> Jet {
        if k < 0 {
            return self.powi(-k).recip();
        }
        let mut out = Jet::constant(1.0);
        out.nvars = self.nvars;
        out.order = self.order;
        for _ in 0..k {
            out = out * self;
        }
        out
    }
    fn powf(self, p: f64) -> Jet {
        let a = self.c[0];
        let mut d = [0.0; MAX_ORDER + 1];
        let mut coef = 1.0;
        for (k, slot) in d.iter_mut().enumerate() {
            *slot = coef * a.powf(p - k as f64);
            coef *= p - k as f64;
        }
        self.compose(&d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_sizes() {
        assert_eq!(layout(2, 2).exps.len(), 6);
        assert_eq!(layout(3, 3).exps.len(), 20);
        assert_eq!(layout(1, 3).exps.len(), 4);
    }

    #[test]
    fn product_rule() {
        let v = Jet::variables(&[0.3, -1.2], 2);
        let f = v[0] * v[0] * v[1];
        assert!((f.value() - 0.09 * -1.2).abs() < 1e-15);
        assert!((f.d1(0) - 2.0 * 0.3 * -1.2).abs() < 1e-15);
        assert!((f.d1(1) - 0.09).abs() < 1e-15);
        assert!((f.d2(0, 0) - 2.0 * -1.2).abs() < 1e-15);
        assert!((f.d2(0, 1) - 0.6).abs() < 1e-15);
        assert!(f.d2(1, 1).abs() < 1e-15);
    }

    #[test]
    fn elementary_functions() {
        let x = Jet::variable(1, 3, 0, 0.7);
        let s = x.sin();
        assert!((s.d2(0, 0) + 0.7f64.sin()).abs() < 1e-14);
        let q = (x * x + Jet::constant(1.0)).sqrt();
        let exact = 0.7 / (1.0f64 + 0.49).sqrt();
        assert!((q.d1(0) - exact).abs() < 1e-14);
        let r = Jet::constant(1.0) / x;
        assert!((r.d2(0, 0) - 2.0 / 0.343).abs() < 1e-12);
    }

    #[test]
    fn derivative_lowers_order() {
        let v = Jet::variables(&[0.5, 2.0], 3);
        let f = v[0].powi(3) * v[1];
        let fx = f.derivative(0);
        assert_eq!(fx.order(), 2);
        assert!((fx.value() - 3.0 * 0.25 * 2.0).abs() < 1e-14);
        assert!((fx.d2(0, 0) - 6.0 * 2.0).abs() < 1e-14);
        assert!((fx.d2(0, 1) - 6.0 * 0.5).abs() < 1e-14);
    }
}
