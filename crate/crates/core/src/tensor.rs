//! Small fixed-size tensors: points, 3×3 matrices and packed symmetric 3×3
//! matrices, generic over [`Scalar`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{sym_index, PAIRS};
use crate::scalar::Scalar;

/// Leading-minor / determinant floor for SPD checks.
pub const SPD_TOL: f64 = 1e-14;

/// Reference coordinates (X, Y, Z).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Point3 { x, y, z })
    }

    pub const fn origin() -> Self {
        Point3 {
            x: 0.0,
            y: 0.0,
            z: 0.0,
        }
    }

    #[inline]
    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    #[inline]
    pub fn from_array(a: [f64; 3]) -> Self {
        Point3 {
            x: a[0],
            y: a[1],
            z: a[2],
        }
    }
}

/// Symmetric 3×3 matrix in packed storage (11, 12, 13, 22, 23, 33).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymMat3<S = f64> {
    pub e: [S; 6],
}

impl<S: Scalar> SymMat3<S> {
    pub fn new(c11: S, c12: S, c13: S, c22: S, c23: S, c33: S) -> Self {
        SymMat3 {
            e: [c11, c12, c13, c22, c23, c33],
        }
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut e = [S::zero(); 6];
        for (k, (i, j)) in PAIRS.iter().enumerate() {
            e[k] = f(*i, *j);
        }
        SymMat3 { e }
    }

    pub fn zero() -> Self {
        SymMat3 { e: [S::zero(); 6] }
    }

    pub fn identity() -> Self {
        Self::diag(S::one(), S::one(), S::one())
    }

    pub fn diag(a: S, b: S, c: S) -> Self {
        let z = S::zero();
        Self::new(a, z, z, b, z, c)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> S {
        self.e[sym_index(i, j)]
    }

    pub fn trace(&self) -> S {
        self.e[0] + self.e[3] + self.e[5]
    }

    pub fn det(&self) -> S {
        let [a, b, c, d, e, f] = self.e;
        a * (d * f - e * e) - b * (b * f - e * c) + c * (b * e - d * c)
    }

    /// Inverse via the adjugate; the caller is responsible for regularity.
    pub fn inverse(&self) -> Self {
        let [a, b, c, d, e, f] = self.e;
        let inv_det = self.det().recip();
        SymMat3::new(
            (d * f - e * e) * inv_det,
            (c * e - b * f) * inv_det,
            (b * e - c * d) * inv_det,
            (a * f - c * c) * inv_det,
            (b * c - a * e) * inv_det,
            (a * d - b * b) * inv_det,
        )
    }

    pub fn to_mat(&self) -> Mat3<S> {
        Mat3::from_fn(|i, j| self.get(i, j))
    }

    pub fn scale(&self, s: S) -> Self {
        SymMat3 {
            e: self.e.map(|x| x * s),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut e = self.e;
        for k in 0..6 {
            e[k] = self.e[k] + o.e[k];
        }
        SymMat3 { e }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut e = self.e;
        for k in 0..6 {
            e[k] = self.e[k] - o.e[k];
        }
        SymMat3 { e }
    }

    /// `A · B` for symmetric operands; the product is generally not symmetric.
    pub fn mul(&self, o: &Self) -> Mat3<S> {
        self.to_mat().mul(&o.to_mat())
    }

    /// Symmetric product `A B A`.
    pub fn sandwich(&self, b: &Self) -> Self {
        let m = self.to_mat().mul(&b.to_mat()).mul(&self.to_mat());
        SymMat3::from_fn(|i, j| m.m[i][j])
    }

    pub fn values(&self) -> SymMat3<f64> {
        SymMat3 {
            e: self.e.map(|x| x.value()),
        }
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(S) -> T) -> SymMat3<T> {
        SymMat3 { e: self.e.map(f) }
    }
}

impl SymMat3<f64> {
    pub fn max_abs(&self) -> f64 {
        self.e.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        self.sub(o).max_abs()
    }

    /// Leading principal minors must all exceed [`SPD_TOL`].
    pub fn check_spd(&self) -> Result<()> {
        let [a, b, _c, d, _e, _f] = self.e;
        let m1 = a;
        let m2 = a * d - b * b;
        let m3 = self.det();
        if !(m1.is_finite() && m2.is_finite() && m3.is_finite()) {
            return Err(Error::NonFinite);
        }
        if m3.abs() <= SPD_TOL {
            return Err(Error::SingularMetric { det: m3 });
        }
        if m1 <= SPD_TOL || m2 <= SPD_TOL || m3 <= SPD_TOL {
            return Err(Error::NotSpd {
                minors: [m1, m2, m3],
            });
        }
        Ok(())
    }

    pub fn to_rows(&self) -> [[f64; 3]; 3] {
        self.to_mat().m
    }

    pub fn from_rows(r: [[f64; 3]; 3]) -> Self {
        SymMat3::from_fn(|i, j| 0.5 * (r[i][j] + r[j][i]))
    }
}

/// General 3×3 matrix, row-major: `m[row][col]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat3<S = f64> {
    pub m: [[S; 3]; 3],
}

impl<S: Scalar> Mat3<S> {
    pub fn from_fn(mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut m = [[S::zero(); 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = f(i, j);
            }
        }
        Mat3 { m }
    }

    pub fn zero() -> Self {
        Mat3 {
            m: [[S::zero(); 3]; 3],
        }
    }

    pub fn identity() -> Self {
        Self::from_fn(|i, j| if i == j { S::one() } else { S::zero() })
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(|i, j| self.m[j][i])
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::from_fn(|i, j| {
            self.m[i][0] * o.m[0][j] + self.m[i][1] * o.m[1][j] + self.m[i][2] * o.m[2][j]
        })
    }

    pub fn mul_vec(&self, v: [S; 3]) -> [S; 3] {
        let mut out = [S::zero(); 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.m[i][0] * v[0] + self.m[i][1] * v[1] + self.m[i][2] * v[2];
        }
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::from_fn(|i, j| self.m[i][j] + o.m[i][j])
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::from_fn(|i, j| self.m[i][j] - o.m[i][j])
    }

    pub fn scale(&self, s: S) -> Self {
        Self::from_fn(|i, j| self.m[i][j] * s)
    }

    pub fn trace(&self) -> S {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    pub fn det(&self) -> S {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn inverse(&self) -> Self {
        let m = &self.m;
        let inv_det = self.det().recip();
        let cof = |a: usize, b: usize, c: usize, d: usize| m[a][b] * m[c][d] - m[a][d] * m[c][b];
        Mat3 {
            m: [
                [
                    cof(1, 1, 2, 2) * inv_det,
                    -cof(0, 1, 2, 2) * inv_det,
                    cof(0, 1, 1, 2) * inv_det,
                ],
                [
                    -cof(1, 0, 2, 2) * inv_det,
                    cof(0, 0, 2, 2) * inv_det,
                    -cof(0, 0, 1, 2) * inv_det,
                ],
                [
                    cof(1, 0, 2, 1) * inv_det,
                    -cof(0, 0, 2, 1) * inv_det,
                    cof(0, 0, 1, 1) * inv_det,
                ],
            ],
        }
    }

    /// `Mᵀ M`.
    pub fn gram(&self) -> SymMat3<S> {
        SymMat3::from_fn(|i, j| {
            self.m[0][i] * self.m[0][j] + self.m[1][i] * self.m[1][j] + self.m[2][i] * self.m[2][j]
        })
    }

    pub fn values(&self) -> Mat3<f64> {
        Mat3::from_fn(|i, j| self.m[i][j].value())
    }
}

impl Mat3<f64> {
    pub fn max_abs(&self) -> f64 {
        self.m.iter().flatten().fold(0.0_f64, |a, x| a.max(x.abs()))
    }

    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        self.sub(o).max_abs()
    }

    /// Max entry of `|Mᵀ M − I|`.
    pub fn orthogonality_defect(&self) -> f64 {
        self.gram().max_abs_diff(&SymMat3::identity())
    }

    pub fn skew_defect(&self) -> f64 {
        self.add(&self.transpose()).max_abs()
    }
}
