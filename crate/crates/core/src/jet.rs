//! Truncated-Taylor arithmetic in three variables.
//!
//! [`Jet`] carries a value, its gradient and its (symmetric) Hessian and is
//! closed under the operations of [`Scalar`], so any generic evaluator yields
//! exact-to-roundoff first and second partials. [`Grad`] is the first-order
//! counterpart. Both are generic over their coefficient type, so nesting
//! (`Grad<Jet<f64>>`) differentiates a derivative: this is how the pullback
//! metric of a deformation map gets its own second derivatives.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::scalar::Scalar;

/// Index pairs of the packed upper triangle, row-major.
pub const PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

/// Position of `(i, j)` in packed symmetric storage.
#[inline]
pub const fn sym_index(i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    match (a, b) {
        (0, 0) => 0,
        (0, 1) => 1,
        (0, 2) => 2,
        (1, 1) => 3,
        (1, 2) => 4,
        _ => 5,
    }
}

/// Second-order truncated Taylor number in three variables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<T> {
    pub v: T,
    pub g: [T; 3],
    /// Packed Hessian, see [`PAIRS`].
    pub h: [T; 6],
}

impl<T: Scalar> Jet<T> {
    pub fn constant(v: T) -> Self {
        Jet {
            v,
            g: [T::zero(); 3],
            h: [T::zero(); 6],
        }
    }

    /// Seeds the three coordinate variables at `p`.
    pub fn vars(p: [T; 3]) -> [Self; 3] {
        let mut out = [Self::constant(T::zero()); 3];
        for (k, o) in out.iter_mut().enumerate() {
            o.v = p[k];
            o.g[k] = T::one();
        }
        out
    }

    /// Seeds a single variable along direction `axis`.
    pub fn var(v: T, axis: usize) -> Self {
        let mut j = Self::constant(v);
        j.g[axis] = T::one();
        j
    }

    #[inline]
    pub fn hess(&self, i: usize, j: usize) -> T {
        self.h[sym_index(i, j)]
    }

    /// Applies a scalar function given its value and first two derivatives
    /// at `self.v`.
    #[inline]
    fn chain(&self, f0: T, f1: T, f2: T) -> Self {
        let mut g = self.g;
        for gi in g.iter_mut() {
            *gi = f1 * *gi;
        }
        let mut h = self.h;
        for (k, (i, j)) in PAIRS.iter().enumerate() {
            h[k] = f1 * self.h[k] + f2 * self.g[*i] * self.g[*j];
        }
        Jet { v: f0, g, h }
    }
}

impl<T: Scalar> Add for Jet<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        let mut r = self;
        r.v = self.v + o.v;
        for k in 0..3 {
            r.g[k] = self.g[k] + o.g[k];
        }
        for k in 0..6 {
            r.h[k] = self.h[k] + o.h[k];
        }
        r
    }
}

impl<T: Scalar> Sub for Jet<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        let mut r = self;
        r.v = self.v - o.v;
        for k in 0..3 {
            r.g[k] = self.g[k] - o.g[k];
        }
        for k in 0..6 {
            r.h[k] = self.h[k] - o.h[k];
        }
        r
    }
}

impl<T: Scalar> Mul for Jet<T> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        let mut g = self.g;
        for k in 0..3 {
            g[k] = self.g[k] * o.v + self.v * o.g[k];
        }
        let mut h = self.h;
        for (k, (i, j)) in PAIRS.iter().enumerate() {
            h[k] = self.h[k] * o.v + self.g[*i] * o.g[*j] + self.g[*j] * o.g[*i] + self.v * o.h[k];
        }
        Jet {
            v: self.v * o.v,
            g,
            h,
        }
    }
}

impl<T: Scalar> Div for Jet<T> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl<T: Scalar> Neg for Jet<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        self * -1.0
    }
}

impl<T: Scalar> Add<f64> for Jet<T> {
    type Output = Self;
    #[inline]
    fn add(mut self, c: f64) -> Self {
        self.v = self.v + c;
        self
    }
}

impl<T: Scalar> Sub<f64> for Jet<T> {
    type Output = Self;
    #[inline]
    fn sub(mut self, c: f64) -> Self {
        self.v = self.v - c;
        self
    }
}

impl<T: Scalar> Mul<f64> for Jet<T> {
    type Output = Self;
    #[inline]
    fn mul(mut self, c: f64) -> Self {
        self.v = self.v * c;
        for g in self.g.iter_mut() {
            *g = *g * c;
        }
        for h in self.h.iter_mut() {
            *h = *h * c;
        }
        self
    }
}

impl<T: Scalar> Div<f64> for Jet<T> {
    type Output = Self;
    #[inline]
    fn div(self, c: f64) -> Self {
        self * (1.0 / c)
    }
}

impl<T: Scalar> Scalar for Jet<T> {
    fn cst(v: f64) -> Self {
        Self::constant(T::cst(v))
    }
    fn value(&self) -> f64 {
        self.v.value()
    }
    fn sin(self) -> Self {
        let (s, c) = (self.v.sin(), self.v.cos());
        self.chain(s, c, -s)
    }
    fn cos(self) -> Self {
        let (s, c) = (self.v.sin(), self.v.cos());
        self.chain(c, -s, -c)
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        let f1 = s.recip() * 0.5;
        let f2 = -(s * self.v).recip() * 0.25;
        self.chain(s, f1, f2)
    }
    fn ln(self) -> Self {
        let r = self.v.recip();
        self.chain(self.v.ln(), r, -(r * r))
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }
    fn atan(self) -> Self {
        let d = (self.v * self.v + 1.0).recip();
        self.chain(self.v.atan(), d, -(self.v * d * d) * 2.0)
    }
    fn recip(self) -> Self {
        let r = self.v.recip();
        self.chain(r, -(r * r), r * r * r * 2.0)
    }
}

/// First-order truncated Taylor number in three variables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grad<T> {
    pub v: T,
    pub g: [T; 3],
}

impl<T: Scalar> Grad<T> {
    pub fn constant(v: T) -> Self {
        Grad {
            v,
            g: [T::zero(); 3],
        }
    }

    pub fn vars(p: [T; 3]) -> [Self; 3] {
        let mut out = [Self::constant(T::zero()); 3];
        for (k, o) in out.iter_mut().enumerate() {
            o.v = p[k];
            o.g[k] = T::one();
        }
        out
    }

    #[inline]
    fn chain(&self, f0: T, f1: T) -> Self {
        Grad {
            v: f0,
            g: [f1 * self.g[0], f1 * self.g[1], f1 * self.g[2]],
        }
    }
}

impl<T: Scalar> Add for Grad<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Grad {
            v: self.v + o.v,
            g: [self.g[0] + o.g[0], self.g[1] + o.g[1], self.g[2] + o.g[2]],
        }
    }
}

impl<T: Scalar> Sub for Grad<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Grad {
            v: self.v - o.v,
            g: [self.g[0] - o.g[0], self.g[1] - o.g[1], self.g[2] - o.g[2]],
        }
    }
}

impl<T: Scalar> Mul for Grad<T> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        let mut g = self.g;
        for k in 0..3 {
            g[k] = self.g[k] * o.v + self.v * o.g[k];
        }
        Grad { v: self.v * o.v, g }
    }
}

impl<T: Scalar> Div for Grad<T> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl<T: Scalar> Neg for Grad<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        self * -1.0
    }
}

impl<T: Scalar> Add<f64> for Grad<T> {
    type Output = Self;
    #[inline]
    fn add(mut self, c: f64) -> Self {
        self.v = self.v + c;
        self
    }
}

impl<T: Scalar> Sub<f64> for Grad<T> {
    type Output = Self;
    #[inline]
    fn sub(mut self, c: f64) -> Self {
        self.v = self.v - c;
        self
    }
}

impl<T: Scalar> Mul<f64> for Grad<T> {
    type Output = Self;
    #[inline]
    fn mul(self, c: f64) -> Self {
        Grad {
            v: self.v * c,
            g: [self.g[0] * c, self.g[1] * c, self.g[2] * c],
        }
    }
}

impl<T: Scalar> Div<f64> for Grad<T> {
    type Output = Self;
    #[inline]
    fn div(self, c: f64) -> Self {
        self * (1.0 / c)
    }
}

impl<T: Scalar> Scalar for Grad<T> {
    fn cst(v: f64) -> Self {
        Self::constant(T::cst(v))
    }
    fn value(&self) -> f64 {
        self.v.value()
    }
    fn sin(self) -> Self {
        self.chain(self.v.sin(), self.v.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.v.cos(), -self.v.sin())
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, s.recip() * 0.5)
    }
    fn ln(self) -> Self {
        self.chain(self.v.ln(), self.v.recip())
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e)
    }
    fn atan(self) -> Self {
        self.chain(self.v.atan(), (self.v * self.v + 1.0).recip())
    }
    fn recip(self) -> Self {
        let r = self.v.recip();
        self.chain(r, -(r * r))
    }
}
