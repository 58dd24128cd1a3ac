//! Z-dependent strain profiles `C = [[f, g, 0], [g, h, 0], [0, 0, 1]]` and
//! the coframes `ϑ¹ = a dX`, `ϑ² = b dX + c dY`, `ϑ³ = dZ` generating them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::diffgeo::MetricField;
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::scalar::Scalar;
use crate::tensor::SymMat3;

/// Constants `C1..C4` of the two closed-form solution branches. Missing
/// entries read as zero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchParams {
    #[serde(rename = "C1", default)]
    pub c1: f64,
    #[serde(rename = "C2", default)]
    pub c2: f64,
    #[serde(rename = "C3", default)]
    pub c3: f64,
    #[serde(rename = "C4", default)]
    pub c4: f64,
}

impl BranchParams {
    pub fn new(c1: f64, c2: f64, c3: f64, c4: f64) -> Self {
        BranchParams { c1, c2, c3, c4 }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.c1, self.c2, self.c3, self.c4]
    }

    pub fn from_array(c: [f64; 4]) -> Self {
        BranchParams {
            c1: c[0],
            c2: c[1],
            c3: c[2],
            c4: c[3],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Branch {
    /// `f = C2² + C1²w²`, `g = C2C3`, `h = C3²`, `w = Z + C4`.
    #[serde(rename = "branch1")]
    One,
    /// `f = C2² + C1²w²`, `g = C1C3w²`, `h = C3²w²`.
    #[serde(rename = "branch2")]
    Two,
}

impl Branch {
    pub const ALL: [Branch; 2] = [Branch::One, Branch::Two];

    pub fn fgh<S: Scalar>(self, c: [f64; 4], z: S) -> [S; 3] {
        let w = z + c[3];
        let w2 = w * w;
        let f = w2 * (c[0] * c[0]) + c[1] * c[1];
        match self {
            Branch::One => [f, S::cst(c[1] * c[2]), S::cst(c[2] * c[2])],
            Branch::Two => [f, w2 * (c[0] * c[2]), w2 * (c[2] * c[2])],
        }
    }

    /// `∂(f, g, h)/∂(C1, C2, C3, C4)` at `z`.
    pub fn fgh_jacobian(self, c: [f64; 4], z: f64) -> [[f64; 4]; 3] {
        let [c1, c2, c3, c4] = c;
        let w = z + c4;
        let w2 = w * w;
        let df = [2.0 * c1 * w2, 2.0 * c2, 0.0, 2.0 * c1 * c1 * w];
        match self {
            Branch::One => [df, [0.0, c3, c2, 0.0], [0.0, 0.0, 2.0 * c3, 0.0]],
            Branch::Two => [
                df,
                [c3 * w2, 0.0, c1 * w2, 2.0 * c1 * c3 * w],
                [0.0, 0.0, 2.0 * c3 * w2, 2.0 * c3 * c3 * w],
            ],
        }
    }
}

/// Natural cubic spline through `(knots[i], values[i])`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SplineSamples", into = "SplineSamples")]
pub struct CubicSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    /// Second derivatives at the knots.
    moments: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SplineSamples {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<SplineSamples> for CubicSpline {
    type Error = Error;
    fn try_from(s: SplineSamples) -> Result<Self> {
        CubicSpline::new(s.knots, s.values)
    }
}

impl From<CubicSpline> for SplineSamples {
    fn from(s: CubicSpline) -> Self {
        SplineSamples {
            knots: s.knots,
            values: s.values,
        }
    }
}

impl CubicSpline {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let n = knots.len();
        if n < 2 || values.len() != n {
            return Err(Error::InvalidParams(
                "spline needs at least 2 knots and one value per knot".into(),
            ));
        }
        if knots.iter().chain(&values).any(|v| !v.is_finite())
            || knots.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::InvalidParams(
                "spline knots must be finite and strictly increasing".into(),
            ));
        }
        // Thomas algorithm on the tridiagonal moment system, M_0 = M_{n-1} = 0.
        let mut moments = vec![0.0; n];
        if n > 2 {
            let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
            let m = n - 2;
            let mut diag = vec![0.0; m];
            let mut rhs = vec![0.0; m];
            for i in 0..m {
                diag[i] = 2.0 * (h[i] + h[i + 1]);
                rhs[i] = 6.0
                    * ((values[i + 2] - values[i + 1]) / h[i + 1]
                        - (values[i + 1] - values[i]) / h[i]);
            }
            for i in 1..m {
                let w = h[i] / diag[i - 1];
                diag[i] -= w * h[i];
                rhs[i] -= w * rhs[i - 1];
            }
            moments[m] = rhs[m - 1] / diag[m - 1];
            for i in (0..m - 1).rev() {
                moments[i + 1] = (rhs[i] - h[i + 1] * moments[i + 2]) / diag[i];
            }
        }
        Ok(CubicSpline {
            knots,
            values,
            moments,
        })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.knots[0], *self.knots.last().expect("non-empty"))
    }

    /// Evaluates the cubic of the interval containing `z.value()`; outside
    /// the knot range the end cubics are extended.
    pub fn eval<S: Scalar>(&self, z: S) -> S {
        let zv = z.value();
        let last = self.knots.len() - 2;
        let i = match self.knots.iter().position(|&k| k > zv) {
            Some(0) => 0,
            Some(p) => (p - 1).min(last),
            None => last,
        };
        let (x0, x1) = (self.knots[i], self.knots[i + 1]);
        let h = x1 - x0;
        let (m0, m1) = (self.moments[i], self.moments[i + 1]);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let a = (z * -1.0 + x1) / h;
        let b = (z - x0) / h;
        let cubic = |t: S| t * t * t - t;
        a * y0 + b * y1 + (cubic(a) * m0 + cubic(b) * m1) * (h * h / 6.0)
    }
}

fn horner<S: Scalar>(coefficients: &[f64], z: S) -> S {
    coefficients
        .iter()
        .rev()
        .fold(S::zero(), |acc, &c| acc * z + c)
}

/// Strain profile `(f, g, h)(Z)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MetricAnsatzZ {
    Branch1 {
        params: BranchParams,
    },
    Branch2 {
        params: BranchParams,
    },
    /// Coefficients in ascending powers of `Z`.
    CustomPoly {
        params: PolyParams,
    },
    Spline {
        f: CubicSpline,
        g: CubicSpline,
        h: CubicSpline,
    },
    /// `(a² + b², bc, c²)` of a coframe.
    Coframe {
        coframe: CoframeZ,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyParams {
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub h: Vec<f64>,
}

/// `(f, g, h)` with first and second `Z`-derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileJet {
    pub value: [f64; 3],
    pub d1: [f64; 3],
    pub d2: [f64; 3],
}

impl MetricAnsatzZ {
    pub fn branch(branch: Branch, params: BranchParams) -> Self {
        match branch {
            Branch::One => MetricAnsatzZ::Branch1 { params },
            Branch::Two => MetricAnsatzZ::Branch2 { params },
        }
    }

    pub fn fgh<S: Scalar>(&self, z: S) -> [S; 3] {
        match self {
            MetricAnsatzZ::Branch1 { params } => Branch::One.fgh(params.to_array(), z),
            MetricAnsatzZ::Branch2 { params } => Branch::Two.fgh(params.to_array(), z),
            MetricAnsatzZ::CustomPoly { params } => [
                horner(&params.f, z),
                horner(&params.g, z),
                horner(&params.h, z),
            ],
            MetricAnsatzZ::Spline { f, g, h } => [f.eval(z), g.eval(z), h.eval(z)],
            MetricAnsatzZ::Coframe { coframe } => coframe.induced(z),
        }
    }

    pub fn profile(&self, z: f64) -> ProfileJet {
        let j = self.fgh(Jet::var(z, 2));
        ProfileJet {
            value: j.map(|x| x.v),
            d1: j.map(|x| x.g[2]),
            d2: j.map(|x| x.hess(2, 2)),
        }
    }

    /// `f > 0` and `fh − g² > 0` at `z`.
    pub fn check(&self, z: f64) -> Result<ProfileJet> {
        let p = self.profile(z);
        let [f, g, h] = p.value;
        let det = f * h - g * g;
        if p.value
            .iter()
            .chain(&p.d1)
            .chain(&p.d2)
            .any(|v| !v.is_finite())
        {
            return Err(Error::NonFinite);
        }
        if f <= 1e-14 || det <= 1e-14 {
            return Err(Error::NotSpd {
                minors: [f, det, det],
            });
        }
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MetricAnsatzZ::Branch2 { params } if params.c3 == 0.0 => Err(Error::InvalidParams(
                "C3 must be nonzero on branch 2".into(),
            )),
            MetricAnsatzZ::Branch1 { params } | MetricAnsatzZ::Branch2 { params }
                if !params.to_array().iter().all(|v| v.is_finite()) =>
            {
                Err(Error::InvalidParams(
                    "branch constants must be finite".into(),
                ))
            }
            MetricAnsatzZ::CustomPoly { params } => {
                if [&params.f, &params.g, &params.h]
                    .iter()
                    .any(|c| c.is_empty() || c.iter().any(|v| !v.is_finite()))
                {
                    Err(Error::InvalidParams(
                        "custom-poly needs non-empty finite coefficient lists".into(),
                    ))
                } else {
                    Ok(())
                }
            }
            MetricAnsatzZ::Coframe { coframe } => coframe.validate(),
            _ => Ok(()),
        }
    }
}

impl MetricField for MetricAnsatzZ {
    fn eval<S: Scalar>(&self, p: [S; 3]) -> SymMat3<S> {
        let [f, g, h] = self.fgh(p[2]);
        SymMat3::new(f, g, S::zero(), h, S::zero(), S::one())
    }
}

/// Coframe coefficients `(a, b, c)(Z)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CoframeZ {
    /// `a = C1 w`, `b = C2`, `c = C3`.
    Branch1 { params: BranchParams },
    /// `a = C2`, `b = C1 w`, `c = C3 w`.
    Branch2 { params: BranchParams },
    /// Ascending-power coefficients of `a, b, c`.
    CustomPoly { params: BTreeMap<String, Vec<f64>> },
}

impl CoframeZ {
    pub fn abc<S: Scalar>(&self, z: S) -> [S; 3] {
        match self {
            CoframeZ::Branch1 { params: p } => [(z + p.c4) * p.c1, S::cst(p.c2), S::cst(p.c3)],
            CoframeZ::Branch2 { params: p } => [S::cst(p.c2), (z + p.c4) * p.c1, (z + p.c4) * p.c3],
            CoframeZ::CustomPoly { params } => {
                let get = |k: &str| params.get(k).map(Vec::as_slice).unwrap_or(&[]);
                [
                    horner(get("a"), z),
                    horner(get("b"), z),
                    horner(get("c"), z),
                ]
            }
        }
    }

    /// `(f, g, h) = (a² + b², bc, c²)`.
    pub fn induced<S: Scalar>(&self, z: S) -> [S; 3] {
        let [a, b, c] = self.abc(z);
        [a * a + b * b, b * c, c * c]
    }

    pub fn validate(&self) -> Result<()> {
        if let CoframeZ::CustomPoly { params } = self {
            if let Some(k) = params
                .keys()
                .find(|k| !["a", "b", "c"].contains(&k.as_str()))
            {
                return Err(Error::InvalidParams(format!(
                    "unknown coframe coefficient '{k}'"
                )));
            }
            if params.values().flatten().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParams(
                    "coframe coefficients must be finite".into(),
                ));
            }
        }
        Ok(())
    }
}
