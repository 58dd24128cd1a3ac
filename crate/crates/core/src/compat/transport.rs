//! The rotation connection of a flat strain field and parallel transport of
//! the rotation factor of `F = RU` along curves.

use serde::{Deserialize, Serialize};

use crate::diffgeo::{christoffel_from_jet, metric_jet, ricci_from_jet, MetricField, MetricJet};
use crate::eigen::{polar_project, spd_sqrt};
use crate::error::{Error, Result};
use crate::tensor::{Mat3, Point3, SymMat3};

/// `omega[c][a][b] = Ω^C_{AB}`.
pub type Omega = [[[f64; 3]; 3]; 3];

/// Curvature level above which transport and reconstruction refuse a metric.
pub const FLATNESS_GATE: f64 = 1e-8;
/// RK4 steps per unit of path length.
pub const STEPS_PER_UNIT: f64 = 1000.0;

/// Connection together with the stretch `U = √C` and its partials.
#[derive(Clone, Copy, Debug)]
pub struct StretchFrame {
    pub omega: Omega,
    pub u: SymMat3,
    pub du: [SymMat3; 3],
}

impl StretchFrame {
    pub fn from_jet(j: &MetricJet) -> Result<Self> {
        let gamma = christoffel_from_jet(j);
        let s = spd_sqrt(&j.c)?;
        let du: [SymMat3; 3] = std::array::from_fn(|b| s.differential(&j.dc[b]));
        let mut omega = [[[0.0; 3]; 3]; 3];
        for (c, oc) in omega.iter_mut().enumerate() {
            for (a, oca) in oc.iter_mut().enumerate() {
                for (b, v) in oca.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for n in 0..3 {
                        let inner: f64 =
                            (0..3).map(|m| gamma[m][b][n] * s.u.get(c, m)).sum::<f64>()
                                - du[b].get(c, n);
                        acc += inner * s.u_inv.get(n, a);
                    }
                    *v = acc;
                }
            }
        }
        Ok(StretchFrame { omega, u: s.u, du })
    }

    pub fn at<M: MetricField>(metric: &M, p: &Point3) -> Result<Self> {
        Self::from_jet(&metric_jet(metric, p)?)
    }

    /// `K^C_A = Ω^C_{AB} v^B`.
    pub fn k(&self, v: [f64; 3]) -> Mat3 {
        k_matrix(&self.omega, v)
    }

    /// `∂_B F = R (Ω_B U + U_{,B})` with `(Ω_B)^C_A = Ω^C_{AB}`; returned
    /// without the rotation, `[B][D][A]`.
    pub fn gradient_of_stretch(&self) -> [Mat3; 3] {
        std::array::from_fn(|b| {
            Mat3::from_fn(|d, a| {
                (0..3)
                    .map(|c| self.omega[d][c][b] * self.u.get(c, a))
                    .sum::<f64>()
                    + self.du[b].get(d, a)
            })
        })
    }
}

pub fn k_matrix(omega: &Omega, v: [f64; 3]) -> Mat3 {
    Mat3::from_fn(|c, a| (0..3).map(|b| omega[c][a][b] * v[b]).sum())
}

/// `Ω^C_{AB} = (Γ^M_{BN} U^C_M − U^C_{N,B}) U^{−1 N}_A` for the Levi-Civita
/// connection `Γ` of `C` and `U = √C`.
pub fn connection_omega<M: MetricField>(metric: &M, p: &Point3) -> Result<Omega> {
    Ok(StretchFrame::at(metric, p)?.omega)
}

/// `exp(sK)` by Rodrigues' formula; two-term series below `ω = 1e−6`.
pub fn rodrigues_exp(k: &Mat3, s: f64) -> Result<Mat3> {
    let defect = k.skew_defect();
    if !(defect <= 1e-12 * k.max_abs().max(1.0)) {
        return Err(Error::NotSkew { defect });
    }
    let w = [k.m[2][1], k.m[0][2], k.m[1][0]];
    let omega = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
    let (a, b) = if omega < 1e-6 {
        let o2 = omega * omega;
        (
            s - o2 * s.powi(3) / 6.0,
            s * s / 2.0 - o2 * s.powi(4) / 24.0,
        )
    } else {
        (
            (omega * s).sin() / omega,
            (1.0 - (omega * s).cos()) / (omega * omega),
        )
    };
    let k2 = k.mul(k);
    Ok(Mat3::identity().add(&k.scale(a)).add(&k2.scale(b)))
}

/// Straight segment `γ(s) = start + s (end − start)`, `s ∈ [0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathSpec {
    pub start: Point3,
    pub end: Point3,
    pub steps: usize,
}

impl PathSpec {
    /// Default resolution: `STEPS_PER_UNIT` steps per unit length.
    pub fn straight(start: Point3, end: Point3) -> Self {
        let len = distance(&start, &end);
        PathSpec {
            start,
            end,
            steps: steps_for(len),
        }
    }

    pub fn point(&self, s: f64) -> Point3 {
        let a = self.start.to_array();
        let b = self.end.to_array();
        Point3::from_array(std::array::from_fn(|i| a[i] + s * (b[i] - a[i])))
    }

    pub fn velocity(&self) -> [f64; 3] {
        let a = self.start.to_array();
        let b = self.end.to_array();
        std::array::from_fn(|i| b[i] - a[i])
    }
}

/// RK4 steps for a span of length `len` at the default resolution.
pub fn steps_for(len: f64) -> usize {
    ((len * STEPS_PER_UNIT).ceil() as usize).max(1)
}

pub(crate) fn distance(a: &Point3, b: &Point3) -> f64 {
    let (a, b) = (a.to_array(), b.to_array());
    (0..3).map(|i| (a[i] - b[i]).powi(2)).sum::<f64>().sqrt()
}

pub(crate) fn check_rotation(r: &Mat3) -> Result<()> {
    let defect = r.orthogonality_defect();
    if !(defect <= 1e-10) || r.det() <= 0.0 {
        return Err(Error::NotOrthogonal { defect });
    }
    Ok(())
}

/// Rotation with a record of the largest `|RᵀR − I|` seen after any step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransportResult {
    pub rotation: Mat3,
    pub max_orthogonality_defect: f64,
}

/// RK4 for `dR/ds = R K(s)` with polar re-projection after every step.
pub fn transport_rotation_traced<M: MetricField>(
    metric: &M,
    path: &PathSpec,
    r0: &Mat3,
) -> Result<TransportResult> {
    check_rotation(r0)?;
    for k in 0..5 {
        let p = path.point(k as f64 / 4.0);
        let ric = ricci_from_jet(&metric_jet(metric, &p)?).max_abs();
        if !(ric <= FLATNESS_GATE) {
            return Err(Error::NotFlat {
                max_ricci: ric,
                x: p.x,
                y: p.y,
                z: p.z,
            });
        }
    }
    let v = path.velocity();
    let n = path.steps.max(1);
    let h = 1.0 / n as f64;
    let kk = |s: f64| -> Result<Mat3> { Ok(StretchFrame::at(metric, &path.point(s))?.k(v)) };
    let mut r = *r0;
    let mut worst = 0.0_f64;
    let mut k_start = kk(0.0)?;
    for i in 0..n {
        let s = i as f64 * h;
        let k_mid = kk(s + 0.5 * h)?;
        let k_end = kk(s + h)?;
        let k1 = r.mul(&k_start);
        let k2 = r.add(&k1.scale(0.5 * h)).mul(&k_mid);
        let k3 = r.add(&k2.scale(0.5 * h)).mul(&k_mid);
        let k4 = r.add(&k3.scale(h)).mul(&k_end);
        let incr = k1.add(&k2.scale(2.0)).add(&k3.scale(2.0)).add(&k4);
        r = polar_project(&r.add(&incr.scale(h / 6.0)))?;
        worst = worst.max(r.orthogonality_defect());
        k_start = k_end;
    }
    Ok(TransportResult {
        rotation: r,
        max_orthogonality_defect: worst,
    })
}

pub fn transport_rotation<M: MetricField>(metric: &M, path: &PathSpec, r0: &Mat3) -> Result<Mat3> {
    Ok(transport_rotation_traced(metric, path, r0)?.rotation)
}
