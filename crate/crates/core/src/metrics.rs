//! JSON descriptors of strain fields `C♭(X, Y, Z)`, dispatched on `"kind"`.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::compat::MetricAnsatzZ;
use crate::diffgeo::{spd_sqrt, DeformationMap, MetricField};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::families::{Family, FamilySpec};
use crate::poly::Poly3;
use crate::scalar::Scalar;
use crate::tensor::{Mat3, SymMat3};

const ANSATZ_KINDS: [&str; 5] = ["branch1", "branch2", "custom-poly", "spline", "coframe"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyEntries {
    pub c11: Poly3,
    #[serde(default)]
    pub c12: Poly3,
    #[serde(default)]
    pub c13: Poly3,
    pub c22: Poly3,
    #[serde(default)]
    pub c23: Poly3,
    pub c33: Poly3,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum Plain {
    Constant {
        c: [[f64; 3]; 3],
    },
    Poly(PolyEntries),
    Bending {
        a0: f64,
        a1: f64,
        b0: f64,
    },
    Rotated {
        lambda1_sq: Poly3,
        lambda2_sq: Poly3,
        theta: Poly3,
    },
}

/// A strain field. `rotated` assembles the `XY` block as
/// `Q diag(λ1², λ2²) Qᵀ`, `Q = [[cos θ, sin θ], [−sin θ, cos θ]]`, with
/// `C_ZZ = 1`.
#[derive(Clone, Debug, PartialEq)]
pub enum MetricSpec {
    Constant(SymMat3),
    Poly(Box<PolyEntries>),
    Bending {
        a0: f64,
        a1: f64,
        b0: f64,
    },
    Rotated {
        lambda1_sq: Poly3,
        lambda2_sq: Poly3,
        theta: Poly3,
    },
    Ansatz(MetricAnsatzZ),
    Family(Family),
}

fn invalid(e: impl std::fmt::Display) -> Error {
    Error::InvalidParams(e.to_string())
}

impl MetricSpec {
    pub fn from_value(v: &Value) -> Result<Self> {
        let kind = v
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| invalid("metric spec needs a string \"kind\""))?;
        let spec = if ANSATZ_KINDS.contains(&kind) {
            let a: MetricAnsatzZ = serde_json::from_value(v.clone()).map_err(invalid)?;
            a.validate()?;
            MetricSpec::Ansatz(a)
        } else if kind == "family" {
            let mut body = v.as_object().cloned().unwrap_or_default();
            body.remove("kind");
            let fs: FamilySpec = serde_json::from_value(Value::Object(body)).map_err(invalid)?;
            MetricSpec::Family(Family::from_spec(&fs)?)
        } else {
            match serde_json::from_value::<Plain>(v.clone()).map_err(invalid)? {
                Plain::Constant { c } => {
                    let s = SymMat3::from_rows(c);
                    if s.to_rows() != c {
                        return Err(invalid("constant metric must be symmetric"));
                    }
                    if c.iter().flatten().any(|x| !x.is_finite()) {
                        return Err(Error::NonFinite);
                    }
                    s.check_spd()?;
                    MetricSpec::Constant(s)
                }
                Plain::Poly(p) => MetricSpec::Poly(Box::new(p)),
                Plain::Bending { a0, a1, b0 } => {
                    if a1 == 0.0 || b0 == 0.0 {
                        return Err(invalid("bending metric needs a1 and b0 nonzero"));
                    }
                    MetricSpec::Bending { a0, a1, b0 }
                }
                Plain::Rotated {
                    lambda1_sq,
                    lambda2_sq,
                    theta,
                } => MetricSpec::Rotated {
                    lambda1_sq,
                    lambda2_sq,
                    theta,
                },
            }
        };
        Ok(spec)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(invalid)?;
        Self::from_value(&v)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            MetricSpec::Constant(_) => "constant",
            MetricSpec::Poly(_) => "poly",
            MetricSpec::Bending { .. } => "bending",
            MetricSpec::Rotated { .. } => "rotated",
            MetricSpec::Ansatz(_) => "ansatz",
            MetricSpec::Family(_) => "family",
        }
    }

    /// Box the field is checked on unless a domain is given.
    pub fn default_domain(&self, n: usize) -> Result<Domain> {
        match self {
            MetricSpec::Family(f) => f.kind().default_domain(n),
            _ => Domain::unit(n),
        }
    }

    /// Domain-dependent validity; a bending metric needs `a0 + a1 Z ≠ 0`.
    pub fn validate_domain(&self, d: &Domain) -> Result<()> {
        match self {
            MetricSpec::Family(f) => f.validate_domain(d),
            MetricSpec::Bending { a0, a1, .. } => {
                let (l0, l1) = (a0 + a1 * d.lo(2), a0 + a1 * d.hi(2));
                if l0.signum() != l1.signum() || l0.abs().min(l1.abs()) < 1e-12 {
                    return Err(Error::DomainConflict(
                        "a0 + a1 Z vanishes on the domain".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// A deformation whose strain is a spec's field, where one is known in
/// closed form.
#[derive(Clone, Debug, PartialEq)]
pub enum ClosedFormMap {
    /// `X ↦ U X` with `U = √C`.
    Linear(Mat3),
    /// `((a0 + a1Z)/a1 sin(a1X), b0 Y, (a0 + a1Z)/a1 cos(a1X) − a0/a1)`.
    Bending {
        a0: f64,
        a1: f64,
        b0: f64,
    },
    Family(Family),
}

impl DeformationMap for ClosedFormMap {
    fn map<S: Scalar>(&self, p: [S; 3]) -> [S; 3] {
        match self {
            ClosedFormMap::Linear(u) => {
                std::array::from_fn(|i| p[0] * u.m[i][0] + p[1] * u.m[i][1] + p[2] * u.m[i][2])
            }
            ClosedFormMap::Bending { a0, a1, b0 } => {
                let l = (p[2] * *a1 + *a0) * (1.0 / a1);
                let ang = p[0] * *a1;
                [l * ang.sin(), p[1] * *b0, l * ang.cos() - a0 / a1]
            }
            ClosedFormMap::Family(f) => f.eval(p),
        }
    }
}

impl MetricSpec {
    pub fn closed_form_map(&self) -> Option<ClosedFormMap> {
        match self {
            MetricSpec::Constant(c) => spd_sqrt(c)
                .ok()
                .map(|s| ClosedFormMap::Linear(s.u.to_mat())),
            MetricSpec::Bending { a0, a1, b0 } => Some(ClosedFormMap::Bending {
                a0: *a0,
                a1: *a1,
                b0: *b0,
            }),
            MetricSpec::Family(f) => Some(ClosedFormMap::Family(f.clone())),
            _ => None,
        }
    }
}

impl MetricField for MetricSpec {
    fn eval<S: Scalar>(&self, p: [S; 3]) -> SymMat3<S> {
        match self {
            MetricSpec::Constant(c) => c.map(S::cst),
            MetricSpec::Poly(e) => SymMat3::new(
                e.c11.eval(p),
                e.c12.eval(p),
                e.c13.eval(p),
                e.c22.eval(p),
                e.c23.eval(p),
                e.c33.eval(p),
            ),
            MetricSpec::Bending { a0, a1, b0 } => {
                let l = p[2] * *a1 + *a0;
                SymMat3::diag(l * l, S::cst(b0 * b0), S::one())
            }
            MetricSpec::Rotated {
                lambda1_sq,
                lambda2_sq,
                theta,
            } => {
                let (l1, l2, t) = (lambda1_sq.eval(p), lambda2_sq.eval(p), theta.eval(p));
                let (s, c) = (t.sin(), t.cos());
                SymMat3::new(
                    c * c * l1 + s * s * l2,
                    -(s * c * (l1 - l2)),
                    S::zero(),
                    s * s * l1 + c * c * l2,
                    S::zero(),
                    S::one(),
                )
            }
            MetricSpec::Ansatz(a) => a.eval(p),
            MetricSpec::Family(f) => f.closed_form_c_cartesian(p),
        }
    }
}
