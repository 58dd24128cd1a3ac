//! Tensor-field calculus on box charts: metric jets, Christoffel symbols,
//! Ricci curvature, strain measures and invariants.

use crate::domain::{Domain, ReferenceChart};
use crate::eigen::{spd_sqrt as eigen_sqrt, SpdSqrt};
use crate::error::{Error, Result};
use crate::jet::{Grad, Jet};
use crate::scalar::Scalar;
use crate::tensor::{Mat3, Point3, SymMat3, SPD_TOL};

/// A symmetric 2-tensor field written once against [`Scalar`].
pub trait MetricField: Send + Sync {
    fn eval<S: Scalar>(&self, p: [S; 3]) -> SymMat3<S>;

    /// Declared domain, checked by the per-point public operations.
    fn domain(&self) -> Option<&Domain> {
        None
    }
}

/// A deformation `φ: B → S` written once against [`Scalar`]. Output
/// coordinates are always Cartesian.
pub trait DeformationMap: Send + Sync {
    fn map<S: Scalar>(&self, p: [S; 3]) -> [S; 3];

    fn domain(&self) -> Option<&Domain> {
        None
    }
}

impl<M: MetricField> MetricField for &M {
    fn eval<S: Scalar>(&self, p: [S; 3]) -> SymMat3<S> {
        (**self).eval(p)
    }
    fn domain(&self) -> Option<&Domain> {
        (**self).domain()
    }
}

impl<D: DeformationMap> DeformationMap for &D {
    fn map<S: Scalar>(&self, p: [S; 3]) -> [S; 3] {
        (**self).map(p)
    }
    fn domain(&self) -> Option<&Domain> {
        (**self).domain()
    }
}

/// The pulled-back metric `FᵀF` of a map, as a metric field.
#[derive(Clone, Debug)]
pub struct Pullback<D>(pub D);

impl<D: DeformationMap> MetricField for Pullback<D> {
    fn eval<S: Scalar>(&self, p: [S; 3]) -> SymMat3<S> {
        let x = self.0.map(Grad::vars(p));
        Mat3::from_fn(|a, b| x[a].g[b]).gram()
    }
    fn domain(&self) -> Option<&Domain> {
        self.0.domain()
    }
}

/// A spatially constant metric.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantMetric(pub SymMat3);

impl MetricField for ConstantMetric {
    fn eval<S: Scalar>(&self, _p: [S; 3]) -> SymMat3<S> {
        self.0.map(S::cst)
    }
}

/// The identity map.
#[derive(Clone, Copy, Debug, Default)]
pub struct IdentityMap;

impl DeformationMap for IdentityMap {
    fn map<S: Scalar>(&self, p: [S; 3]) -> [S; 3] {
        p
    }
}

/// Metric value with exact first and second partial derivatives.
#[derive(Clone, Copy, Debug)]
pub struct MetricJet {
    pub c: SymMat3,
    /// `dc[d] = ∂C/∂X^d`.
    pub dc: [SymMat3; 3],
    /// `ddc[d][e] = ∂²C/∂X^d∂X^e`.
    pub ddc: [[SymMat3; 3]; 3],
}

impl MetricJet {
    pub fn from_jets(m: &SymMat3<Jet<f64>>) -> Self {
        let c = m.map(|j| j.v);
        let dc = std::array::from_fn(|d| m.map(|j| j.g[d]));
        let ddc = std::array::from_fn(|d| std::array::from_fn(|e| m.map(|j| j.hess(d, e))));
        MetricJet { c, dc, ddc }
    }
}

fn check_point(domain: Option<&Domain>, p: &Point3) -> Result<()> {
    if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) {
        return Err(Error::NonFinite);
    }
    match domain {
        Some(d) => d.check(p),
        None => Ok(()),
    }
}

fn check_finite_sym(m: &SymMat3) -> Result<()> {
    if m.e.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Metric jet without domain or SPD checks; used inside grid sweeps that
/// have already validated their inputs.
pub fn metric_jet_unchecked<M: MetricField>(metric: &M, p: &Point3) -> MetricJet {
    MetricJet::from_jets(&metric.eval(Jet::vars(p.to_array())))
}

/// Metric jet at `p`, with domain membership and positive definiteness
/// enforced.
pub fn metric_jet<M: MetricField>(metric: &M, p: &Point3) -> Result<MetricJet> {
    check_point(metric.domain(), p)?;
    let j = metric_jet_unchecked(metric, p);
    check_finite_sym(&j.c)?;
    j.c.check_spd()?;
    Ok(j)
}

/// `Γ[c][a][b] = Γ^C_{AB}`.
pub type Christoffel = [[[f64; 3]; 3]; 3];

/// Derivatives of the connection: `dgamma[e][c][a][b] = ∂_E Γ^C_{AB}`.
pub type ChristoffelDerivative = [Christoffel; 3];

/// Lowered symbols `Γ_{DAB} = ½(C_{BD,A} + C_{AD,B} − C_{AB,D})`.
fn first_kind(dc: &[SymMat3; 3], d: usize, a: usize, b: usize) -> f64 {
    0.5 * (dc[a].get(b, d) + dc[b].get(a, d) - dc[d].get(a, b))
}

pub fn christoffel_from_jet(j: &MetricJet) -> Christoffel {
    let inv = j.c.inverse();
    let mut g = [[[0.0; 3]; 3]; 3];
    for (c, gc) in g.iter_mut().enumerate() {
        for a in 0..3 {
            for b in a..3 {
                let v: f64 = (0..3)
                    .map(|d| inv.get(c, d) * first_kind(&j.dc, d, a, b))
                    .sum();
                gc[a][b] = v;
                gc[b][a] = v;
            }
        }
    }
    g
}

/// `∂_E Γ^C_{AB}` from `∂C⁻¹ = −C⁻¹ ∂C C⁻¹` and the second derivatives.
pub fn christoffel_derivative_from_jet(j: &MetricJet) -> ChristoffelDerivative {
    let inv = j.c.inverse();
    let dinv: [SymMat3; 3] = std::array::from_fn(|e| inv.sandwich(&j.dc[e]).scale(-1.0));
    let mut out = [[[[0.0; 3]; 3]; 3]; 3];
    for (e, oe) in out.iter_mut().enumerate() {
        let ddc_e: [SymMat3; 3] = std::array::from_fn(|a| j.ddc[a][e]);
        for (c, oc) in oe.iter_mut().enumerate() {
            for a in 0..3 {
                for b in a..3 {
                    let v: f64 = (0..3)
                        .map(|d| {
                            dinv[e].get(c, d) * first_kind(&j.dc, d, a, b)
                                + inv.get(c, d) * first_kind(&ddc_e, d, a, b)
                        })
                        .sum();
                    oc[a][b] = v;
                    oc[b][a] = v;
                }
            }
        }
    }
    out
}

/// Ricci tensor in the sign convention for which `diag(λ1², λ2², 1)` gives
/// `Ric₁₁ = λ1(λ1′λ2′/λ2 + λ1″)` and `Ric₃₃ = λ1″/λ1 + λ2″/λ2`. This is the
/// negative of `∂_C Γ^C_{AB} − ∂_A Γ^C_{CB} + Γ^C_{CD}Γ^D_{AB} − Γ^C_{AD}Γ^D_{CB}`.
pub fn ricci_from_jet(j: &MetricJet) -> SymMat3 {
    let g = christoffel_from_jet(j);
    let dg = christoffel_derivative_from_jet(j);
    let trace: [f64; 3] = std::array::from_fn(|d| (0..3).map(|c| g[c][c][d]).sum());
    SymMat3::from_fn(|a, b| {
        let mut r = 0.0;
        for c in 0..3 {
            r += dg[c][c][a][b] - dg[a][c][c][b] + trace[c] * g[c][a][b];
            for d in 0..3 {
                r -= g[c][a][d] * g[d][c][b];
            }
        }
        -r
    })
}

pub fn christoffel<M: MetricField>(metric: &M, p: &Point3) -> Result<Christoffel> {
    Ok(christoffel_from_jet(&metric_jet(metric, p)?))
}

pub fn ricci<M: MetricField>(metric: &M, p: &Point3) -> Result<SymMat3> {
    Ok(ricci_from_jet(&metric_jet(metric, p)?))
}

/// `F[a][A] = ∂φ^a/∂X^A`.
pub fn deformation_gradient<D: DeformationMap>(map: &D, p: &Point3) -> Result<Mat3> {
    check_point(map.domain(), p)?;
    let x = map.map(Grad::vars(p.to_array()));
    let f = Mat3::from_fn(|a, b| x[a].g[b]);
    if f.m.iter().flatten().all(|v| v.is_finite()) {
        Ok(f)
    } else {
        Err(Error::NonFinite)
    }
}

/// `C = FᵀF` (Euclidean ambient in Cartesian target coordinates). In the
/// cylindrical chart the map is read as `(R, Θ, Z) ↦ (x, y, z)`, so the
/// result holds the cylindrical components `C_AB`.
pub fn right_cauchy_green<D: DeformationMap>(
    map: &D,
    p: &Point3,
    chart: ReferenceChart,
) -> Result<SymMat3> {
    chart.metric(p)?;
    let f = deformation_gradient(map, p)?;
    let det = f.det();
    if det.abs() <= SPD_TOL {
        return Err(Error::SingularMap { det });
    }
    Ok(f.gram())
}

/// Principal invariants of `G⁻¹C`: `(tr M, ½(tr²M − tr M²), det M)`.
pub fn invariants_generic<S: Scalar>(c: &SymMat3<S>, g: &SymMat3<S>) -> [S; 3] {
    let m = g.inverse().mul(c);
    let i1 = m.trace();
    let i2 = (i1 * i1 - m.mul(&m).trace()) * 0.5;
    let i3 = c.det() / g.det();
    [i1, i2, i3]
}

pub fn invariants(c: &SymMat3, g: &SymMat3) -> Result<[f64; 3]> {
    c.check_spd()?;
    g.check_spd()?;
    Ok(invariants_generic(c, g))
}

/// `J = √(det g / det G) · det F`, sign preserved.
pub fn jacobian_det(f: &Mat3, big_g: &SymMat3, g: &SymMat3) -> Result<f64> {
    big_g.check_spd()?;
    g.check_spd()?;
    Ok((g.det() / big_g.det()).sqrt() * f.det())
}

/// `U = √C` with its inverse.
pub fn spd_sqrt(c: &SymMat3) -> Result<SpdSqrt> {
    eigen_sqrt(c)
}

/// Principal form of an SPD 2×2 block: `[[c11,c12],[c12,c22]] =
/// Q diag(λ1², λ2²) Qᵀ` with `Q = [[cos θ, sin θ], [−sin θ, cos θ]]`,
/// `λ1² ≥ λ2²` and `θ ∈ (−π/2, π/2]`; `θ = 0` whenever `λ1 = λ2`.
pub fn principal_decomposition_2x2(c11: f64, c12: f64, c22: f64) -> Result<(f64, f64, f64)> {
    let det = c11 * c22 - c12 * c12;
    if !(c11.is_finite() && c12.is_finite() && c22.is_finite()) {
        return Err(Error::NonFinite);
    }
    if c11 <= SPD_TOL || det <= SPD_TOL {
        return Err(Error::NotSpd {
            minors: [c11, det, det],
        });
    }
    let mean = 0.5 * (c11 + c22);
    let half_diff = 0.5 * (c11 - c22);
    let radius = half_diff.hypot(c12);
    let l1 = mean + radius;
    let l2 = det / l1;
    if radius == 0.0 {
        return Ok((l1, l2, 0.0));
    }
    // c11 − c22 = cos 2θ (λ1² − λ2²), c12 = −½ sin 2θ (λ1² − λ2²).
    let mut theta = 0.5 * (-c12).atan2(half_diff);
    if theta <= -std::f64::consts::FRAC_PI_2 {
        theta += std::f64::consts::PI;
    }
    Ok((l1, l2, theta))
}

/// Reassemble the block from its principal form.
pub fn principal_compose_2x2(l1: f64, l2: f64, theta: f64) -> (f64, f64, f64) {
    let (s, c) = theta.sin_cos();
    (
        c * c * l1 + s * s * l2,
        -s * c * (l1 - l2),
        s * s * l1 + c * c * l2,
    )
}

/// `(C^{AB}, B^{AB})` with `C^{AB} = G^{AM} G^{BN} C_{MN}` and `B = C⁻¹`.
pub fn raise_indices(c: &SymMat3, g: &SymMat3) -> Result<(SymMat3, SymMat3)> {
    c.check_spd()?;
    g.check_spd()?;
    Ok(raise_indices_generic(c, g))
}

/// `B^{AB}` is the inverse of `C_{AB}`; raising the indices of `B_{AB} =
/// G C⁻¹ G` with `G⁻¹` on both sides gives back `C⁻¹`.
pub fn raise_indices_generic<S: Scalar>(
    c: &SymMat3<S>,
    g: &SymMat3<S>,
) -> (SymMat3<S>, SymMat3<S>) {
    let gi = g.inverse();
    (gi.sandwich(c), c.inverse())
}
