//! Box domains, structured grids and reference charts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{Point3, SymMat3};

/// Relative slack when testing membership, so grid nodes computed from the
/// bounds never fall outside by roundoff.
const MEMBERSHIP_SLACK: f64 = 1e-12;

/// Axis-aligned box `[x0,x1]×[y0,y1]×[z0,z1]` with a structured grid whose
/// nodes include both endpoints on every axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub bounds: [f64; 6],
    pub counts: [usize; 3],
}

impl Domain {
    pub fn new(bounds: [f64; 6], counts: [usize; 3]) -> Result<Self> {
        if bounds.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidDomain("bounds must be finite".into()));
        }
        for axis in 0..3 {
            if bounds[2 * axis + 1] <= bounds[2 * axis] {
                return Err(Error::InvalidDomain(format!(
                    "axis {axis} has non-positive extent"
                )));
            }
            if counts[axis] < 2 {
                return Err(Error::InvalidDomain(format!(
                    "axis {axis} needs at least 2 grid nodes"
                )));
            }
        }
        Ok(Domain { bounds, counts })
    }

    /// `[0,1]^3` with `n` nodes per axis.
    pub fn unit(n: usize) -> Result<Self> {
        Self::new([0.0, 1.0, 0.0, 1.0, 0.0, 1.0], [n, n, n])
    }

    /// Default box for the Z-families: unit extents with Z in `[1, 2]`, which
    /// keeps the figure parameters (C4 = C5 = 0) away from the `Z + C = 0` axis.
    pub fn family_box(n: usize) -> Result<Self> {
        Self::new([0.0, 1.0, 0.0, 1.0, 1.0, 2.0], [n, n, n])
    }

    /// Default wedge for Family 5Z, clear of the angle branch cut.
    pub fn wedge(n: usize) -> Result<Self> {
        Self::new([0.5, 1.5, -0.5, 0.5, 0.0, 1.0], [n, n, n])
    }

    pub fn lo(&self, axis: usize) -> f64 {
        self.bounds[2 * axis]
    }

    pub fn hi(&self, axis: usize) -> f64 {
        self.bounds[2 * axis + 1]
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.hi(axis) - self.lo(axis)) / (self.counts[axis] - 1) as f64
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        if i + 1 == self.counts[axis] {
            self.hi(axis)
        } else {
            self.lo(axis) + i as f64 * self.spacing(axis)
        }
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Linear node index, X fastest.
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.counts[0] * (j + self.counts[1] * k)
    }

    pub fn ijk(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.counts[0];
        let j = (idx / self.counts[0]) % self.counts[1];
        let k = idx / (self.counts[0] * self.counts[1]);
        [i, j, k]
    }

    pub fn node(&self, idx: usize) -> Point3 {
        let [i, j, k] = self.ijk(idx);
        Point3 {
            x: self.coord(0, i),
            y: self.coord(1, j),
            z: self.coord(2, k),
        }
    }

    /// All nodes in X-fastest order.
    pub fn nodes(&self) -> Vec<Point3> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }

    pub fn contains(&self, p: &Point3) -> bool {
        let c = p.to_array();
        (0..3).all(|a| {
            let slack = MEMBERSHIP_SLACK * (self.hi(a) - self.lo(a)).max(1.0);
            c[a] >= self.lo(a) - slack && c[a] <= self.hi(a) + slack
        })
    }

    pub fn check(&self, p: &Point3) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::OutsideDomain {
                x: p.x,
                y: p.y,
                z: p.z,
            })
        }
    }

    pub fn center(&self) -> Point3 {
        Point3 {
            x: 0.5 * (self.lo(0) + self.hi(0)),
            y: 0.5 * (self.lo(1) + self.hi(1)),
            z: 0.5 * (self.lo(2) + self.hi(2)),
        }
    }

    pub fn with_counts(&self, counts: [usize; 3]) -> Result<Self> {
        Self::new(self.bounds, counts)
    }
}

/// How reference coordinates are interpreted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceChart {
    /// (X, Y, Z), metric `G = I`.
    Cartesian,
    /// (R, Θ, Z), metric `G = diag(1, R², 1)`.
    Cylindrical,
}

impl ReferenceChart {
    pub fn metric(&self, p: &Point3) -> Result<SymMat3> {
        match self {
            ReferenceChart::Cartesian => Ok(SymMat3::identity()),
            ReferenceChart::Cylindrical => {
                if p.x <= 0.0 {
                    return Err(Error::InvalidParams(format!(
                        "cylindrical chart needs R > 0, got {}",
                        p.x
                    )));
                }
                Ok(SymMat3::diag(1.0, p.x * p.x, 1.0))
            }
        }
    }
}
