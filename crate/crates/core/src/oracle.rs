//! Finite-difference reference values, evaluated from plain `f64` metric
//! samples only. Central differences throughout.

use crate::constitutive::{sbar_generic, Material};
use crate::diffgeo::{Christoffel, MetricField};
use crate::tensor::SymMat3;

/// Default stencil step.
pub const STEP: f64 = 1e-4;
/// Default relative agreement threshold.
pub const RELATIVE_TOL: f64 = 1e-6;

/// `|a − b| ≤ tol · max(1, |a|, |b|)`.
pub fn agrees(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}

fn shifted(p: [f64; 3], axis: usize, d: f64) -> [f64; 3] {
    let mut q = p;
    q[axis] += d;
    q
}

/// `∂_axis f(p) ≈ (f(p + h) − f(p − h)) / 2h`.
pub fn central<T, F>(f: F, p: [f64; 3], axis: usize, h: f64) -> T
where
    F: Fn([f64; 3]) -> T,
    T: Combine,
{
    let v = [-1.0, 1.0].map(|k| f(shifted(p, axis, k * h)));
    T::combine(&v, [-1.0, 1.0], 0.5 / h)
}

/// Linear combination `scale · Σ wᵢ vᵢ` for stencil values.
pub trait Combine: Sized {
    fn combine(v: &[Self; 2], w: [f64; 2], scale: f64) -> Self;
}

impl Combine for f64 {
    fn combine(v: &[f64; 2], w: [f64; 2], scale: f64) -> f64 {
        scale * (0..2).map(|i| w[i] * v[i]).sum::<f64>()
    }
}

impl Combine for SymMat3 {
    fn combine(v: &[SymMat3; 2], w: [f64; 2], scale: f64) -> SymMat3 {
        SymMat3::from_fn(|i, j| scale * (0..2).map(|k| w[k] * v[k].get(i, j)).sum::<f64>())
    }
}

impl Combine for Christoffel {
    fn combine(v: &[Christoffel; 2], w: [f64; 2], scale: f64) -> Christoffel {
        std::array::from_fn(|c| {
            std::array::from_fn(|a| {
                std::array::from_fn(|b| scale * (0..2).map(|k| w[k] * v[k][c][a][b]).sum::<f64>())
            })
        })
    }
}

impl Combine for [f64; 3] {
    fn combine(v: &[[f64; 3]; 2], w: [f64; 2], scale: f64) -> [f64; 3] {
        std::array::from_fn(|a| scale * (0..2).map(|k| w[k] * v[k][a]).sum::<f64>())
    }
}

fn sample<M: MetricField>(metric: &M, p: [f64; 3]) -> SymMat3 {
    metric.eval::<f64>(p)
}

/// `Γ^C_{AB} = ½ C^{CD}(C_{DA,B} + C_{DB,A} − C_{AB,D})`.
pub fn christoffel<M: MetricField>(metric: &M, p: [f64; 3], h: f64) -> Christoffel {
    let inv = sample(metric, p).inverse();
    let dc: [SymMat3; 3] = std::array::from_fn(|e| central(|q| sample(metric, q), p, e, h));
    std::array::from_fn(|c| {
        std::array::from_fn(|a| {
            std::array::from_fn(|b| {
                (0..3)
                    .map(|d| {
                        0.5 * inv.get(c, d) * (dc[b].get(d, a) + dc[a].get(d, b) - dc[d].get(a, b))
                    })
                    .sum()
            })
        })
    })
}

/// Ricci tensor with the sign used by [`crate::diffgeo::ricci`]: minus
/// `R_{AB} = Γ^C_{AB,C} − Γ^C_{CB,A} + Γ^C_{CD}Γ^D_{AB} − Γ^C_{AD}Γ^D_{CB}`.
pub fn ricci<M: MetricField>(metric: &M, p: [f64; 3], h: f64) -> SymMat3 {
    let g = christoffel(metric, p, h);
    let dg: [Christoffel; 3] =
        std::array::from_fn(|e| central(|q| christoffel(metric, q, h), p, e, h));
    SymMat3::from_fn(|a, b| {
        let mut r = 0.0;
        for c in 0..3 {
            r += dg[c][c][a][b] - dg[a][c][c][b];
            for d in 0..3 {
                r += g[c][c][d] * g[d][a][b] - g[c][a][d] * g[d][c][b];
            }
        }
        -r
    })
}

fn divergence(f: impl Fn([f64; 3]) -> SymMat3, p: [f64; 3], h: f64) -> [f64; 3] {
    let d: [SymMat3; 3] = std::array::from_fn(|b| central(&f, p, b, h));
    std::array::from_fn(|a| (0..3).map(|b| d[b].get(a, b)).sum())
}

/// `(C^{AB}_{,B}, B^{AB}_{,B})` in Cartesian charts.
pub fn divergences<M: MetricField>(metric: &M, p: [f64; 3], h: f64) -> ([f64; 3], [f64; 3]) {
    (
        divergence(|q| sample(metric, q), p, h),
        divergence(|q| sample(metric, q).inverse(), p, h),
    )
}

/// `F^A = −S̄^{AB}_{,B}` for one material.
pub fn forcing<M: MetricField>(metric: &M, material: &Material, p: [f64; 3], h: f64) -> [f64; 3] {
    let g = SymMat3::identity();
    divergence(|q| sbar_generic(&sample(metric, q), &g, material), p, h).map(|v| -v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;

    struct Sphereish;
    impl MetricField for Sphereish {
        fn eval<S: Scalar>(&self, p: [S; 3]) -> SymMat3<S> {
            SymMat3::diag(p[2] * p[2] + 1.0, S::one(), S::one())
        }
    }

    #[test]
    fn stencil_is_exact_on_quadratics() {
        let f = |q: [f64; 3]| q[1] * q[1] + 3.0 * q[1];
        assert!((central(f, [0.0, 1.0, 0.0], 1, 1e-2) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn hand_ricci() {
        let r = ricci(&Sphereish, [0.0, 0.0, 0.0], STEP);
        assert!(
            (r.get(0, 0) - 1.0).abs() < 1e-6
                && (r.get(2, 2) - 1.0).abs() < 1e-6
                && r.get(1, 1).abs() < 1e-9
        );
    }

    #[test]
    fn agreement_rule() {
        assert!(agrees(1e6, 1e6 + 0.5, 1e-6));
        assert!(!agrees(0.0, 2e-6, 1e-6));
    }
}
