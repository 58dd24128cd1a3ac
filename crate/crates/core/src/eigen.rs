//! Symmetric 3×3 eigendecomposition (nalgebra) and the SPD square root and
//! polar projection built on it.

use crate::error::{Error, Result};
use crate::tensor::{Mat3, SymMat3};

/// Eigenvalues (ascending) and eigenvectors (columns of `vectors`).
#[derive(Clone, Copy, Debug)]
pub struct SymEigen {
    pub values: [f64; 3],
    pub vectors: Mat3,
}

impl SymEigen {
    pub fn column(&self, k: usize) -> [f64; 3] {
        [
            self.vectors.m[0][k],
            self.vectors.m[1][k],
            self.vectors.m[2][k],
        ]
    }

    /// `V diag(f(λ)) Vᵀ`.
    pub fn compose(&self, f: impl Fn(f64) -> f64) -> SymMat3 {
        let fv = self.values.map(f);
        SymMat3::from_fn(|i, j| {
            (0..3)
                .map(|k| fv[k] * self.vectors.m[i][k] * self.vectors.m[j][k])
                .sum()
        })
    }
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Eigendecomposition of a symmetric 3×3 matrix, eigenvalues ascending and
/// eigenvectors forming a right-handed basis.
pub fn sym_eigen(a: &SymMat3) -> SymEigen {
    let m = nalgebra::Matrix3::from_fn(|i, j| a.get(i, j));
    let e = nalgebra::SymmetricEigen::new(m);
    let mut pairs: [(f64, [f64; 3]); 3] = std::array::from_fn(|k| {
        let v = e.eigenvectors.column(k);
        (e.eigenvalues[k], [v[0], v[1], v[2]])
    });
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    if dot(cross(pairs[0].1, pairs[1].1), pairs[2].1) < 0.0 {
        pairs[2].1 = pairs[2].1.map(|x| -x);
    }
    SymEigen {
        values: pairs.map(|p| p.0),
        vectors: Mat3::from_fn(|i, k| pairs[k].1[i]),
    }
}

/// Symmetric square root of an SPD matrix together with its inverse and the
/// spectral data used to differentiate it.
#[derive(Clone, Copy, Debug)]
pub struct SpdSqrt {
    pub u: SymMat3,
    pub u_inv: SymMat3,
    pub eigen: SymEigen,
}

impl SpdSqrt {
    /// Derivative of `U = √C` given the derivative of `C`, from the Sylvester
    /// equation `U dU + dU U = dC` solved in the eigenbasis.
    pub fn differential(&self, dc: &SymMat3) -> SymMat3 {
        let v = &self.eigen.vectors;
        let mu = self.eigen.values.map(f64::sqrt);
        let vt_dc_v = v.transpose().mul(&dc.to_mat()).mul(v);
        let inner = Mat3::from_fn(|i, j| vt_dc_v.m[i][j] / (mu[i] + mu[j]));
        let full = v.mul(&inner).mul(&v.transpose());
        SymMat3::from_rows(full.m)
    }
}

/// `U = √C` for SPD `C`.
pub fn spd_sqrt(c: &SymMat3) -> Result<SpdSqrt> {
    c.check_spd()?;
    let eigen = sym_eigen(c);
    if eigen.values[0] <= 0.0 {
        return Err(Error::NotSpd {
            minors: eigen.values,
        });
    }
    let u = eigen.compose(f64::sqrt);
    let u_inv = eigen.compose(|x| 1.0 / x.sqrt());
    Ok(SpdSqrt { u, u_inv, eigen })
}

/// Nearest rotation in the polar sense: `R (RᵀR)^{-1/2}`.
pub fn polar_project(r: &Mat3) -> Result<Mat3> {
    let s = spd_sqrt(&r.gram())?;
    Ok(r.mul(&s.u_inv.to_mat()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn check_decomposition(a: &SymMat3) {
        let e = sym_eigen(a);
        let scale = a.max_abs().max(1.0);
        assert!(e.compose(|x| x).max_abs_diff(a) < 1e-13 * scale);
        assert!(e.vectors.orthogonality_defect() < 1e-13);
        assert!(e.values[0] <= e.values[1] && e.values[1] <= e.values[2]);
    }

    #[test]
    fn repeated_and_diagonal_spectra() {
        check_decomposition(&SymMat3::identity());
        check_decomposition(&SymMat3::diag(2.0, 2.0, 5.0));
        check_decomposition(&SymMat3::new(2.0, 1e-17, 0.0, 2.0, 0.0, 2.0));
        check_decomposition(&SymMat3::new(2.5, 1.5, 0.0, 2.5, 0.0, 1.0));
    }

    #[test]
    fn sqrt_of_diagonal() {
        let s = spd_sqrt(&SymMat3::diag(4.0, 2.25, 1.0)).unwrap();
        assert!(s.u.max_abs_diff(&SymMat3::diag(2.0, 1.5, 1.0)) < 1e-15);
        assert!(
            spd_sqrt(&SymMat3::identity())
                .unwrap()
                .u
                .max_abs_diff(&SymMat3::identity())
                < 1e-15
        );
    }

    #[test]
    fn sqrt_rejects_indefinite() {
        assert!(spd_sqrt(&SymMat3::diag(1.0, -2.0, 1.0)).is_err());
    }

    #[test]
    fn sylvester_differential_matches_finite_difference() {
        let c = SymMat3::new(3.0, 0.4, -0.2, 2.0, 0.3, 1.5);
        let dc = SymMat3::new(0.1, -0.3, 0.2, 0.05, 0.4, -0.1);
        let h = 1e-6;
        let up = spd_sqrt(&c.add(&dc.scale(h))).unwrap().u;
        let um = spd_sqrt(&c.sub(&dc.scale(h))).unwrap().u;
        let fd = up.sub(&um).scale(0.5 / h);
        let an = spd_sqrt(&c).unwrap().differential(&dc);
        assert!(fd.max_abs_diff(&an) < 1e-8);
    }

    proptest! {
        #[test]
        fn sqrt_round_trip(a in prop::array::uniform9(-2.0f64..2.0)) {
            let m = Mat3 { m: [[a[0], a[1], a[2]], [a[3], a[4], a[5]], [a[6], a[7], a[8]]] };
            let c = m.gram().add(&SymMat3::identity().scale(0.05));
            let s = spd_sqrt(&c).unwrap();
            let uu = SymMat3::from_rows(s.u.mul(&s.u).m);
            prop_assert!(uu.max_abs_diff(&c) < 1e-12 * c.max_abs().max(1.0));
            prop_assert!(s.u.mul(&s.u_inv).max_abs_diff(&Mat3::identity()) < 1e-10);
        }

        #[test]
        fn polar_factor_is_orthogonal(a in prop::array::uniform9(-2.0f64..2.0)) {
            let f = Mat3 { m: [[a[0], a[1], a[2]], [a[3], a[4], a[5]], [a[6], a[7], a[8]]] };
            prop_assume!(f.det().abs() > 1e-2);
            let s = spd_sqrt(&f.gram()).unwrap();
            let r = f.mul(&s.u_inv.to_mat());
            prop_assert!(r.orthogonality_defect() < 1e-10);
            prop_assert!(r.mul(&s.u.to_mat()).max_abs_diff(&f) < 1e-10 * f.max_abs().max(1.0));
        }
    }
}
