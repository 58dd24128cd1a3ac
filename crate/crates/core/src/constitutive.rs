//! Constitutive response of reinforced isotropic solids: Cauchy-elastic
//! response triples, hyperelastic energies and the fiber-tension split.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diffgeo::{invariants_generic, raise_indices_generic};
use crate::error::{Error, Result};
use crate::poly::{monomial_basis, Poly3};
use crate::scalar::Scalar;
use crate::tensor::SymMat3;

/// Total degree of randomly drawn material polynomials.
pub const MATERIAL_DEGREE: u32 = 3;

fn random_dense(rng: &mut ChaCha8Rng, degree: u32) -> Vec<f64> {
    (0..monomial_basis(degree).len())
        .map(|_| rng.gen_range(-1.0..=1.0))
        .collect()
}

fn dense_coefficients(p: &Poly3, degree: u32) -> Vec<f64> {
    monomial_basis(degree)
        .into_iter()
        .map(|m| {
            p.terms
                .iter()
                .filter(|t| t.powers == m)
                .map(|t| t.coef)
                .sum()
        })
        .collect()
}

/// Response functions `(χ, ξ, η)` of `(I1, I2, I3)` in
/// `S̄ = χ G♯ + ξ C♯ + η B♯`.
#[derive(Clone, Debug, PartialEq)]
pub struct ResponseTriple {
    pub chi: Poly3,
    pub xi: Poly3,
    pub eta: Poly3,
    pub seed: Option<u64>,
}

impl ResponseTriple {
    pub fn new(chi: Poly3, xi: Poly3, eta: Poly3) -> Self {
        ResponseTriple {
            chi,
            xi,
            eta,
            seed: None,
        }
    }

    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chi = Poly3::from_dense(MATERIAL_DEGREE, &random_dense(&mut rng, MATERIAL_DEGREE));
        let xi = Poly3::from_dense(MATERIAL_DEGREE, &random_dense(&mut rng, MATERIAL_DEGREE));
        let eta = Poly3::from_dense(MATERIAL_DEGREE, &random_dense(&mut rng, MATERIAL_DEGREE));
        ResponseTriple {
            chi,
            xi,
            eta,
            seed: Some(seed),
        }
    }

    pub fn coefficients<S: Scalar>(&self, inv: [S; 3]) -> [S; 3] {
        [self.chi.eval(inv), self.xi.eval(inv), self.eta.eval(inv)]
    }

    /// `[[χ_1, χ_2, χ_3], [ξ_i], [η_i]]`.
    pub fn derivatives(&self, inv: [f64; 3]) -> [[f64; 3]; 3] {
        let d = |p: &Poly3| std::array::from_fn(|i| p.partial(i).eval(inv));
        [d(&self.chi), d(&self.xi), d(&self.eta)]
    }
}

/// Energy `W(I1, I2, I3)` with its gradient cached symbolically.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyFunction {
    pub w: Poly3,
    pub seed: Option<u64>,
    grad: [Poly3; 3],
}

impl EnergyFunction {
    pub fn new(w: Poly3) -> Self {
        let grad = std::array::from_fn(|i| w.partial(i));
        EnergyFunction {
            w,
            seed: None,
            grad,
        }
    }

    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = Poly3::from_dense(MATERIAL_DEGREE, &random_dense(&mut rng, MATERIAL_DEGREE));
        EnergyFunction {
            seed: Some(seed),
            ..Self::new(w)
        }
    }

    pub fn value(&self, inv: [f64; 3]) -> f64 {
        self.w.eval(inv)
    }

    /// `W_i = ∂W/∂I_i`.
    pub fn gradient<S: Scalar>(&self, inv: [S; 3]) -> [S; 3] {
        std::array::from_fn(|i| self.grad[i].eval(inv))
    }

    /// `W_ij`, symmetric by construction.
    pub fn hessian(&self, inv: [f64; 3]) -> [[f64; 3]; 3] {
        let mut h = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in i..3 {
                let v = self.grad[i].partial(j).eval(inv);
                h[i][j] = v;
                h[j][i] = v;
            }
        }
        h
    }

    /// Equivalent response triple: `χ = 2(W1 + W2 I1)`, `ξ = −2W2`,
    /// `η = 2W3 I3`.
    pub fn coefficients<S: Scalar>(&self, inv: [S; 3]) -> [S; 3] {
        let [w1, w2, w3] = self.gradient(inv);
        [(w1 + w2 * inv[0]) * 2.0, w2 * -2.0, w3 * inv[2] * 2.0]
    }
}

/// Either constitutive class; both reduce to a response triple.
#[derive(Clone, Debug, PartialEq)]
pub enum Material {
    Cauchy(ResponseTriple),
    Hyper(EnergyFunction),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaterialKind {
    ResponseTriple,
    Energy,
}

/// Serialized material: dense coefficients in [`monomial_basis`] order, the
/// triple stored as `χ` then `ξ` then `η`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSpec {
    pub kind: MaterialKind,
    pub degree: u32,
    pub seed: Option<u64>,
    pub coefficients: Vec<f64>,
}

impl Material {
    pub fn random(kind: MaterialKind, seed: u64) -> Self {
        match kind {
            MaterialKind::ResponseTriple => Material::Cauchy(ResponseTriple::random(seed)),
            MaterialKind::Energy => Material::Hyper(EnergyFunction::random(seed)),
        }
    }

    pub fn coefficients<S: Scalar>(&self, inv: [S; 3]) -> [S; 3] {
        match self {
            Material::Cauchy(r) => r.coefficients(inv),
            Material::Hyper(w) => w.coefficients(inv),
        }
    }

    pub fn kind(&self) -> MaterialKind {
        match self {
            Material::Cauchy(_) => MaterialKind::ResponseTriple,
            Material::Hyper(_) => MaterialKind::Energy,
        }
    }

    pub fn to_spec(&self) -> MaterialSpec {
        match self {
            Material::Cauchy(r) => {
                let mut coefficients = dense_coefficients(&r.chi, MATERIAL_DEGREE);
                coefficients.extend(dense_coefficients(&r.xi, MATERIAL_DEGREE));
                coefficients.extend(dense_coefficients(&r.eta, MATERIAL_DEGREE));
                MaterialSpec {
                    kind: MaterialKind::ResponseTriple,
                    degree: MATERIAL_DEGREE,
                    seed: r.seed,
                    coefficients,
                }
            }
            Material::Hyper(w) => MaterialSpec {
                kind: MaterialKind::Energy,
                degree: MATERIAL_DEGREE,
                seed: w.seed,
                coefficients: dense_coefficients(&w.w, MATERIAL_DEGREE),
            },
        }
    }

    pub fn from_spec(spec: &MaterialSpec) -> Result<Self> {
        let n = monomial_basis(spec.degree).len();
        if spec.coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParams(
                "material coefficients must be finite".into(),
            ));
        }
        match spec.kind {
            MaterialKind::ResponseTriple => {
                if spec.coefficients.len() != 3 * n {
                    return Err(Error::InvalidParams(format!(
                        "response triple needs {} coefficients",
                        3 * n
                    )));
                }
                let part = |k: usize| {
                    Poly3::from_dense(spec.degree, &spec.coefficients[k * n..(k + 1) * n])
                };
                Ok(Material::Cauchy(ResponseTriple {
                    chi: part(0),
                    xi: part(1),
                    eta: part(2),
                    seed: spec.seed,
                }))
            }
            MaterialKind::Energy => {
                if spec.coefficients.len() != n {
                    return Err(Error::InvalidParams(format!(
                        "energy needs {n} coefficients"
                    )));
                }
                let w = EnergyFunction::new(Poly3::from_dense(spec.degree, &spec.coefficients));
                Ok(Material::Hyper(EnergyFunction {
                    seed: spec.seed,
                    ..w
                }))
            }
        }
    }
}

/// `χ G♯ + ξ C♯ + η B♯` for given coefficients.
pub fn sbar_from_coefficients<S: Scalar>(
    c: &SymMat3<S>,
    g: &SymMat3<S>,
    coef: [S; 3],
) -> SymMat3<S> {
    let (c_up, b_up) = raise_indices_generic(c, g);
    let g_up = g.inverse();
    SymMat3::from_fn(|i, j| {
        coef[0] * g_up.get(i, j) + coef[1] * c_up.get(i, j) + coef[2] * b_up.get(i, j)
    })
}

/// Constitutive stress of a material at strain `C` with reference metric
/// `G`, generic over the scalar type.
pub fn sbar_generic<S: Scalar>(c: &SymMat3<S>, g: &SymMat3<S>, material: &Material) -> SymMat3<S> {
    let inv = invariants_generic(c, g);
    sbar_from_coefficients(c, g, material.coefficients(inv))
}

fn check_pair(c: &SymMat3, g: &SymMat3) -> Result<()> {
    c.check_spd()?;
    g.check_spd()
}

pub fn sbar_cauchy(c: &SymMat3, g: &SymMat3, r: &ResponseTriple) -> Result<SymMat3> {
    check_pair(c, g)?;
    let inv = invariants_generic(c, g);
    Ok(sbar_from_coefficients(c, g, r.coefficients(inv)))
}

/// Reduced form `2(W1 + W2 I1) G♯ − 2W2 C♯ + 2W3 I3 B♯`.
pub fn sbar_hyper(c: &SymMat3, g: &SymMat3, w: &EnergyFunction) -> Result<SymMat3> {
    check_pair(c, g)?;
    let inv = invariants_generic(c, g);
    Ok(sbar_from_coefficients(c, g, w.coefficients(inv)))
}

/// Unreduced form `2W1 G♯ + 2(W2 I2 + W3 I3) B♯ − 2W2 I3 B²♯`, with
/// `B²♯ = B♯ G B♯`.
pub fn sbar_hyper_unreduced(c: &SymMat3, g: &SymMat3, w: &EnergyFunction) -> Result<SymMat3> {
    check_pair(c, g)?;
    let inv = invariants_generic(c, g);
    let [w1, w2, w3] = w.gradient(inv);
    let g_up = g.inverse();
    let b_up = c.inverse();
    let b2 = b_up.sandwich(g);
    Ok(SymMat3::from_fn(|i, j| {
        2.0 * w1 * g_up.get(i, j) + 2.0 * (w2 * inv[1] + w3 * inv[2]) * b_up.get(i, j)
            - 2.0 * w2 * inv[2] * b2.get(i, j)
    }))
}

/// `S = T̊ N⊗N + S̄`.
pub fn full_second_pk(sbar: &SymMat3, tension: f64, n: [f64; 3]) -> Result<SymMat3> {
    let defect = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2] - 1.0).abs();
    if defect > 1e-12 {
        return Err(Error::NotUnit { defect });
    }
    Ok(SymMat3::from_fn(|i, j| {
        sbar.get(i, j) + tension * n[i] * n[j]
    }))
}
