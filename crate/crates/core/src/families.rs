//! Catalog of the universal deformation families for Z-aligned inextensible
//! fibers, with parameter validation and closed-form oracles.
//!
//! * `Z0`: homogeneous `x = a X` with `a13² + a23² + a33² = 1`.
//! * `Z1`: `x = (Z+C4) sin[C1(X+C5)] + C6`, `y = C2 X + C3 Y + C7`,
//!   `z = (Z+C4) cos[C1(X+C5)] + C8`.
//! * `Z2`: `x = (Z+C5) sin(C1 X + C3 Y + C4) + C6`, `y = C2 X + C7`,
//!   `z = (Z+C5) cos(C1 X + C3 Y + C4) + C8`.
//! * `5Z`: in cylindrical coordinates `r = C1 R`,
//!   `θ = C2 ln R + s Θ/C1² + C3`, `z = Z + C4`; evaluated here from
//!   Cartesian reference coordinates on a wedge with `X > 0`.
//!
//! A non-universal control map `x = X + A sin X` is kept alongside for
//! negative tests.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::diffgeo::{DeformationMap, MetricField};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::{Mat3, Point3, SymMat3};

/// Minimum distance of `Z + C` from zero, and of `R` from the axis.
pub const AXIS_CLEARANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FamilyKind {
    #[serde(rename = "z0")]
    Z0,
    #[serde(rename = "z1")]
    Z1,
    #[serde(rename = "z2")]
    Z2,
    #[serde(rename = "5z")]
    F5Z,
    #[serde(rename = "control-sin")]
    ControlSin,
}

impl FamilyKind {
    pub const UNIVERSAL: [FamilyKind; 4] = [
        FamilyKind::Z0,
        FamilyKind::Z1,
        FamilyKind::Z2,
        FamilyKind::F5Z,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FamilyKind::Z0 => "z0",
            FamilyKind::Z1 => "z1",
            FamilyKind::Z2 => "z2",
            FamilyKind::F5Z => "5z",
            FamilyKind::ControlSin => "control-sin",
        }
    }

    /// Box on which the family is checked unless told otherwise.
    pub fn default_domain(&self, n: usize) -> Result<Domain> {
        match self {
            FamilyKind::F5Z => Domain::wedge(n),
            _ => Domain::family_box(n),
        }
    }
}

/// Family parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    Z0 { a: Mat3 },
    Z1 { c: [f64; 8] },
    Z2 { c: [f64; 8] },
    F5Z { c: [f64; 4], sign: f64 },
    ControlSin { amplitude: f64 },
}

/// JSON form: `{family, params, sign?}`. Z1/Z2/5Z params are keyed `C1..`
/// (missing keys are zero); Z0 takes `a` as three rows; the control map takes
/// `A`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub family: FamilyKind,
    #[serde(default)]
    pub params: BTreeMap<String, serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign: Option<i32>,
}

fn get_number(params: &BTreeMap<String, serde_json::Value>, key: &str) -> Result<f64> {
    match params.get(key) {
        None => Ok(0.0),
        Some(v) => {
            let x = v
                .as_f64()
                .ok_or_else(|| Error::InvalidParams(format!("{key} must be a number")))?;
            if x.is_finite() {
                Ok(x)
            } else {
                Err(Error::InvalidParams(format!("{key} must be finite")))
            }
        }
    }
}

fn reject_unknown(params: &BTreeMap<String, serde_json::Value>, allowed: &[&str]) -> Result<()> {
    match params.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(Error::InvalidParams(format!("unknown parameter {k}"))),
        None => Ok(()),
    }
}

fn constants<const N: usize>(params: &BTreeMap<String, serde_json::Value>) -> Result<[f64; N]> {
    let names: Vec<String> = (1..=N).map(|i| format!("C{i}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    reject_unknown(params, &refs)?;
    let mut c = [0.0; N];
    for (i, name) in names.iter().enumerate() {
        c[i] = get_number(params, name)?;
    }
    Ok(c)
}

fn number(x: f64) -> serde_json::Value {
    serde_json::to_value(x).expect("finite float")
}

impl Family {
    pub fn kind(&self) -> FamilyKind {
        match self {
            Family::Z0 { .. } => FamilyKind::Z0,
            Family::Z1 { .. } => FamilyKind::Z1,
            Family::Z2 { .. } => FamilyKind::Z2,
            Family::F5Z { .. } => FamilyKind::F5Z,
            Family::ControlSin { .. } => FamilyKind::ControlSin,
        }
    }

    pub fn from_spec(spec: &FamilySpec) -> Result<Self> {
        if spec.sign.is_some() && spec.family != FamilyKind::F5Z {
            return Err(Error::InvalidParams(
                "sign applies to family 5z only".into(),
            ));
        }
        let fam = match spec.family {
            FamilyKind::Z0 => {
                reject_unknown(&spec.params, &["a"])?;
                let rows: [[f64; 3]; 3] = match spec.params.get("a") {
                    Some(v) => serde_json::from_value(v.clone()).map_err(|_| {
                        Error::InvalidParams("a must be a 3x3 array of numbers".into())
                    })?,
                    None => return Err(Error::InvalidParams("a is required".into())),
                };
                Family::Z0 {
                    a: Mat3 { m: rows },
                }
            }
            FamilyKind::Z1 => Family::Z1 {
                c: constants::<8>(&spec.params)?,
            },
            FamilyKind::Z2 => Family::Z2 {
                c: constants::<8>(&spec.params)?,
            },
            FamilyKind::F5Z => {
                let sign = match spec.sign.unwrap_or(1) {
                    1 => 1.0,
                    -1 => -1.0,
                    s => {
                        return Err(Error::InvalidParams(format!(
                            "sign must be +1 or -1, got {s}"
                        )))
                    }
                };
                Family::F5Z {
                    c: constants::<4>(&spec.params)?,
                    sign,
                }
            }
            FamilyKind::ControlSin => {
                reject_unknown(&spec.params, &["A"])?;
                Family::ControlSin {
                    amplitude: get_number(&spec.params, "A")?,
                }
            }
        };
        fam.validate()?;
        Ok(fam)
    }

    pub fn to_spec(&self) -> FamilySpec {
        let mut params = BTreeMap::new();
        let mut sign = None;
        match self {
            Family::Z0 { a } => {
                params.insert("a".to_string(), serde_json::to_value(a.m).expect("finite"));
            }
            Family::Z1 { c } | Family::Z2 { c } => {
                for (i, v) in c.iter().enumerate() {
                    params.insert(format!("C{}", i + 1), number(*v));
                }
            }
            Family::F5Z { c, sign: s } => {
                for (i, v) in c.iter().enumerate() {
                    params.insert(format!("C{}", i + 1), number(*v));
                }
                sign = Some(*s as i32);
            }
            Family::ControlSin { amplitude } => {
                params.insert("A".to_string(), number(*amplitude));
            }
        }
        FamilySpec {
            family: self.kind(),
            params,
            sign,
        }
    }

    /// Parameter invariants that do not depend on the domain.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(m.to_string()));
        match self {
            Family::Z0 { a } => {
                if a.m.iter().flatten().any(|x| !x.is_finite()) {
                    return bad("a must be finite");
                }
                let n = a.m[0][2].powi(2) + a.m[1][2].powi(2) + a.m[2][2].powi(2);
                if (n - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidParams(format!(
                        "a13^2 + a23^2 + a33^2 must equal 1, got {n}"
                    )));
                }
                if a.det() <= 0.0 {
                    return bad("det a must be positive");
                }
            }
            Family::Z1 { c } => {
                if c[0] == 0.0 {
                    return bad("C1 must be nonzero");
                }
                if c[2] == 0.0 {
                    return bad("C3 must be nonzero");
                }
            }
            Family::Z2 { c } => {
                if c[1] == 0.0 {
                    return bad("C2 must be nonzero");
                }
                if c[2] == 0.0 {
                    return bad("C3 must be nonzero");
                }
            }
            Family::F5Z { c, sign } => {
                if c[0] == 0.0 {
                    return bad("C1 must be nonzero");
                }
                if sign.abs() != 1.0 {
                    return bad("sign must be +1 or -1");
                }
            }
            Family::ControlSin { amplitude } => {
                if amplitude.abs() >= 1.0 {
                    return bad("|A| must be below 1");
                }
            }
        }
        Ok(())
    }

    /// Domain-dependent invariants: singular loci must stay clear of the box
    /// and the orientation sign must be constant on it.
    pub fn validate_domain(&self, domain: &Domain) -> Result<()> {
        let (z0, z1) = (domain.lo(2), domain.hi(2));
        let offset_clear = |c: f64, name: &str| -> Result<()> {
            let (a, b) = (z0 + c, z1 + c);
            if a.signum() != b.signum() || a.abs().min(b.abs()) < AXIS_CLEARANCE {
                return Err(Error::DomainConflict(format!(
                    "Z + {name} vanishes on the domain"
                )));
            }
            Ok(())
        };
        match self {
            Family::Z1 { c } => offset_clear(c[3], "C4"),
            Family::Z2 { c } => offset_clear(c[4], "C5"),
            Family::F5Z { .. } => {
                if domain.lo(0) <= 0.0 {
                    return Err(Error::DomainConflict(
                        "family 5z needs X > 0 on the domain".into(),
                    ));
                }
                if domain.lo(0) < AXIS_CLEARANCE {
                    return Err(Error::DomainConflict(
                        "family 5z needs R bounded away from 0".into(),
                    ));
                }
                Ok(())
            }
            Family::Z0 { .. } | Family::ControlSin { .. } => Ok(()),
        }
    }

    /// Cartesian evaluation of the map.
    pub fn eval<S: Scalar>(&self, p: [S; 3]) -> [S; 3] {
        let [x, y, z] = p;
        match self {
            Family::Z0 { a } => {
                let row = |i: usize| x * a.m[i][0] + y * a.m[i][1] + z * a.m[i][2];
                [row(0), row(1), row(2)]
            }
            Family::Z1 { c } => {
                let w = z + c[3];
                let ang = (x + c[4]) * c[0];
                [
                    w * ang.sin() + c[5],
                    x * c[1] + y * c[2] + c[6],
                    w * ang.cos() + c[7],
                ]
            }
            Family::Z2 { c } => {
                let w = z + c[4];
                let ang = x * c[0] + y * c[2] + c[3];
                [w * ang.sin() + c[5], x * c[1] + c[6], w * ang.cos() + c[7]]
            }
            Family::F5Z { c, sign } => {
                let rr = (x * x + y * y).sqrt();
                let big_theta = (y / x).atan();
                let r = rr * c[0];
                let th = rr.ln() * c[1] + big_theta * (sign / (c[0] * c[0])) + c[2];
                [r * th.cos(), r * th.sin(), z + c[3]]
            }
            Family::ControlSin { amplitude } => [x + x.sin() * *amplitude, y, z],
        }
    }

    /// Closed-form `C`. For 5Z the point is read as `(R, Θ, Z)` and the
    /// cylindrical components are returned; see [`Family::closed_form_c_cartesian`].
    pub fn closed_form_c(&self, p: &Point3) -> SymMat3 {
        match self {
            Family::F5Z { c, sign } => f5z_cylindrical_c(c, *sign, p.x),
            _ => self.closed_form_c_cartesian([p.x, p.y, p.z]),
        }
    }

    /// Closed-form `C` in Cartesian reference components.
    pub fn closed_form_c_cartesian<S: Scalar>(&self, p: [S; 3]) -> SymMat3<S> {
        let [x, y, z] = p;
        let k = S::cst;
        match self {
            Family::Z0 { a } => a.gram().map(k),
            Family::Z1 { c } => {
                let w = z + c[3];
                SymMat3::new(
                    w * w * (c[0] * c[0]) + c[1] * c[1],
                    k(c[1] * c[2]),
                    k(0.0),
                    k(c[2] * c[2]),
                    k(0.0),
                    k(1.0),
                )
            }
            Family::Z2 { c } => {
                let w2 = (z + c[4]) * (z + c[4]);
                SymMat3::new(
                    w2 * (c[0] * c[0]) + c[1] * c[1],
                    w2 * (c[0] * c[2]),
                    k(0.0),
                    w2 * (c[2] * c[2]),
                    k(0.0),
                    k(1.0),
                )
            }
            Family::F5Z { c, sign } => {
                // C_cart = Qᵀ C_cyl Q with Q = ∂(R, Θ, Z)/∂(X, Y, Z).
                let r2 = x * x + y * y;
                let rr = r2.sqrt();
                let c11 = k(c[0] * c[0] * (1.0 + c[1] * c[1]));
                let c12 = rr * (sign * c[1]);
                let c22 = r2 / (c[0] * c[0]);
                let q = [[x / rr, y / rr], [-y / r2, x / r2]];
                let cyl = [[c11, c12], [c12, c22]];
                let e = |i: usize, j: usize| {
                    let mut s = k(0.0);
                    for m in 0..2 {
                        for n in 0..2 {
                            s = s + q[m][i] * cyl[m][n] * q[n][j];
                        }
                    }
                    s
                };
                SymMat3::new(e(0, 0), e(0, 1), k(0.0), e(1, 1), k(0.0), k(1.0))
            }
            Family::ControlSin { amplitude } => {
                let s = x.cos() * *amplitude + 1.0;
                SymMat3::diag(s * s, k(1.0), k(1.0))
            }
        }
    }

    /// Closed-form Jacobian `det F` (Cartesian charts).
    pub fn closed_form_j(&self, p: &Point3) -> f64 {
        match self {
            Family::Z0 { a } => a.det(),
            Family::Z1 { c } => c[0] * c[2] * (c[3] + p.z),
            Family::Z2 { c } => -c[1] * c[2] * (c[4] + p.z),
            Family::F5Z { sign, .. } => *sign,
            Family::ControlSin { amplitude } => 1.0 + amplitude * p.x.cos(),
        }
    }

    /// Random parameters satisfying every invariant on `domain`.
    pub fn random<R: Rng>(kind: FamilyKind, rng: &mut R, domain: &Domain) -> Result<Self> {
        for _ in 0..1000 {
            let unit = |rng: &mut R| rng.gen_range(-1.0..=1.0);
            let away = |rng: &mut R| {
                let m: f64 = rng.gen_range(0.5..=1.5);
                if rng.gen_bool(0.5) {
                    m
                } else {
                    -m
                }
            };
            let fam = match kind {
                FamilyKind::Z0 => {
                    let mut col: [f64; 3] = std::array::from_fn(|_| unit(rng));
                    let n = (col[0] * col[0] + col[1] * col[1] + col[2] * col[2]).sqrt();
                    if n < 0.1 {
                        continue;
                    }
                    col = col.map(|v| v / n);
                    let mut a = Mat3::from_fn(|i, j| if j == 2 { col[i] } else { unit(rng) });
                    if a.det() < 0.0 {
                        for row in a.m.iter_mut() {
                            row[0] = -row[0];
                        }
                    }
                    if a.det() < 0.1 {
                        continue;
                    }
                    Family::Z0 { a }
                }
                FamilyKind::Z1 | FamilyKind::Z2 => {
                    let mut c: [f64; 8] = std::array::from_fn(|_| unit(rng));
                    let (nonzero, offset) = if kind == FamilyKind::Z1 {
                        ([0, 2], 3)
                    } else {
                        ([1, 2], 4)
                    };
                    for i in nonzero {
                        c[i] = away(rng);
                    }
                    c[offset] = rng.gen_range(0.0..=1.0);
                    if kind == FamilyKind::Z1 {
                        Family::Z1 { c }
                    } else {
                        Family::Z2 { c }
                    }
                }
                FamilyKind::F5Z => {
                    let c = [away(rng), unit(rng), unit(rng), unit(rng)];
                    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                    Family::F5Z { c, sign }
                }
                FamilyKind::ControlSin => Family::ControlSin {
                    amplitude: rng.gen_range(-0.5..=0.5),
                },
            };
            if fam.validate().is_ok() && fam.validate_domain(domain).is_ok() {
                return Ok(fam);
            }
        }
        Err(Error::InvalidParams(format!(
            "could not draw valid {} parameters for the domain",
            kind.name()
        )))
    }
}

fn f5z_cylindrical_c(c: &[f64; 4], sign: f64, r: f64) -> SymMat3 {
    SymMat3::new(
        c[0] * c[0] * (1.0 + c[1] * c[1]),
        sign * c[1] * r,
        0.0,
        r * r / (c[0] * c[0]),
        0.0,
        1.0,
    )
}

/// A validated family bound to a domain; evaluates in Cartesian charts.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyMap {
    pub family: Family,
    pub domain: Domain,
}

impl DeformationMap for FamilyMap {
    fn map<S: Scalar>(&self, p: [S; 3]) -> [S; 3] {
        self.family.eval(p)
    }
    fn domain(&self) -> Option<&Domain> {
        Some(&self.domain)
    }
}

/// Closed-form strain of a family as a metric field.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyMetric {
    pub family: Family,
    pub domain: Domain,
}

impl MetricField for FamilyMetric {
    fn eval<S: Scalar>(&self, p: [S; 3]) -> SymMat3<S> {
        self.family.closed_form_c_cartesian(p)
    }
    fn domain(&self) -> Option<&Domain> {
        Some(&self.domain)
    }
}

/// Family 5Z as a map from cylindrical reference coordinates `(R, Θ, Z)` to
/// Cartesian spatial points.
#[derive(Clone, Debug, PartialEq)]
pub struct F5ZCylindrical {
    pub c: [f64; 4],
    pub sign: f64,
}

impl DeformationMap for F5ZCylindrical {
    fn map<S: Scalar>(&self, p: [S; 3]) -> [S; 3] {
        let [rr, big_theta, z] = p;
        let r = rr * self.c[0];
        let th =
            rr.ln() * self.c[1] + big_theta * (self.sign / (self.c[0] * self.c[0])) + self.c[2];
        [r * th.cos(), r * th.sin(), z + self.c[3]]
    }
}

/// Checks every parameter and domain invariant and binds the family.
pub fn make_family(family: Family, domain: Domain) -> Result<FamilyMap> {
    family.validate()?;
    family.validate_domain(&domain)?;
    Ok(FamilyMap { family, domain })
}

pub fn closed_form_c(family: &Family, p: &Point3) -> Result<SymMat3> {
    family.validate()?;
    Ok(family.closed_form_c(p))
}

pub fn closed_form_j(family: &Family, p: &Point3) -> Result<f64> {
    family.validate()?;
    Ok(family.closed_form_j(p))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiberImage {
    pub points: Vec<[f64; 3]>,
    /// Max distance of a sample from the chord through the end points.
    pub straightness_defect: f64,
    /// Max `| |∂φ/∂Z| − 1 |` over the samples.
    pub speed_defect: f64,
}

/// Image of the reference fiber `{(X0, Y0, Z)}` over the domain's Z-range.
pub fn fiber_image(map: &FamilyMap, base: (f64, f64), samples: usize) -> Result<FiberImage> {
    if samples < 2 {
        return Err(Error::InvalidParams(
            "fiber_image needs at least 2 samples".into(),
        ));
    }
    let d = &map.domain;
    let (z0, z1) = (d.lo(2), d.hi(2));
    let zs: Vec<f64> = (0..samples)
        .map(|k| z0 + (z1 - z0) * k as f64 / (samples - 1) as f64)
        .collect();
    for &z in &[z0, z1] {
        d.check(&Point3::new(base.0, base.1, z)?)?;
    }
    let points: Vec<[f64; 3]> = zs
        .iter()
        .map(|&z| map.family.eval([base.0, base.1, z]))
        .collect();
    let a = points[0];
    let b = points[samples - 1];
    let chord = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let len = (chord[0].powi(2) + chord[1].powi(2) + chord[2].powi(2)).sqrt();
    let mut straightness: f64 = 0.0;
    for p in &points {
        let v = [p[0] - a[0], p[1] - a[1], p[2] - a[2]];
        let t = (v[0] * chord[0] + v[1] * chord[1] + v[2] * chord[2]) / (len * len);
        let dist = ((v[0] - t * chord[0]).powi(2)
            + (v[1] - t * chord[1]).powi(2)
            + (v[2] - t * chord[2]).powi(2))
        .sqrt();
        straightness = straightness.max(dist);
    }
    let mut speed: f64 = 0.0;
    for &z in &zs {
        let f = crate::diffgeo::deformation_gradient(map, &Point3::new(base.0, base.1, z)?)?;
        let col = (f.m[0][2].powi(2) + f.m[1][2].powi(2) + f.m[2][2].powi(2)).sqrt();
        speed = speed.max((col - 1.0).abs());
    }
    Ok(FiberImage {
        points,
        straightness_defect: straightness,
        speed_defect: speed,
    })
}

/// The deforming parameters of the published Z1 and Z2 figures.
pub fn figure_z1() -> Family {
    Family::Z1 {
        c: [2.0, -1.0, 1.5, 0.0, 0.0, 0.0, 0.0, 0.0],
    }
}

pub fn figure_z2() -> Family {
    Family::Z2 {
        c: [0.25, -1.25, 1.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    }
}
