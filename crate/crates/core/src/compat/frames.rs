//! Connection scalars of the coframe `ϑ¹ = a dX`, `ϑ² = b dX + c dY`,
//! `ϑ³ = dZ` and the curvature residuals built from them.

use serde::Serialize;

use super::ansatz::CoframeZ;
use crate::error::{Error, Result};
use crate::jet::Jet;

/// `ξ = a′/a`, `η = c′/c`, `ψ = (b′c − bc′)/(2ac)` and their `Z`-derivatives.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct FrameScalars {
    pub xi: f64,
    pub eta: f64,
    pub psi: f64,
    pub dxi: f64,
    pub deta: f64,
    pub dpsi: f64,
}

impl FrameScalars {
    pub fn values(&self) -> [f64; 3] {
        [self.xi, self.eta, self.psi]
    }
}

pub fn frame_scalars(coframe: &CoframeZ, z: f64) -> Result<FrameScalars> {
    let [a, b, c] = coframe.abc(Jet::var(z, 2));
    let d = |j: Jet<f64>| (j.v, j.g[2], j.hess(2, 2));
    let (a0, a1, a2) = d(a);
    let (b0, b1, b2) = d(b);
    let (c0, c1, c2) = d(c);
    if !(a0.abs() > 1e-14 && c0.abs() > 1e-14) {
        return Err(Error::ZeroDenominator);
    }
    let num = b1 * c0 - b0 * c1;
    let dnum = b2 * c0 - b0 * c2;
    let den = 2.0 * a0 * c0;
    let dden = 2.0 * (a1 * c0 + a0 * c1);
    Ok(FrameScalars {
        xi: a1 / a0,
        eta: c1 / c0,
        psi: num / den,
        dxi: (a2 * a0 - a1 * a1) / (a0 * a0),
        deta: (c2 * c0 - c1 * c1) / (c0 * c0),
        dpsi: (dnum * den - num * dden) / (den * den),
    })
}

/// `(ψ² − ξη, 2ηψ − ψ′, ψ′ + 2ψη, ψ² − η² − η′, ψ² − ξ′ − ξ²)`.
pub fn structural_residuals(s: &FrameScalars) -> [f64; 5] {
    let FrameScalars {
        xi,
        eta,
        psi,
        dxi,
        deta,
        dpsi,
    } = *s;
    [
        psi * psi - xi * eta,
        2.0 * eta * psi - dpsi,
        dpsi + 2.0 * psi * eta,
        psi * psi - eta * eta - deta,
        psi * psi - dxi - xi * xi,
    ]
}
