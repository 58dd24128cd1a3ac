//! Sparse trivariate polynomials, evaluable on any [`Scalar`].

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub coef: f64,
    pub powers: [u32; 3],
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly3 {
    pub terms: Vec<Term>,
}

/// Exponents of every monomial of total degree `≤ degree`, graded then
/// lexicographic: `1, x, y, z, x², xy, …`.
pub fn monomial_basis(degree: u32) -> Vec<[u32; 3]> {
    let mut out = Vec::new();
    for total in 0..=degree {
        for a in (0..=total).rev() {
            for b in (0..=total - a).rev() {
                out.push([a, b, total - a - b]);
            }
        }
    }
    out
}

impl Poly3 {
    pub fn constant(c: f64) -> Self {
        Poly3 {
            terms: vec![Term {
                coef: c,
                powers: [0, 0, 0],
            }],
        }
    }

    /// `c · x_axis`.
    pub fn linear(axis: usize, c: f64) -> Self {
        let mut powers = [0; 3];
        powers[axis] = 1;
        Poly3 {
            terms: vec![Term { coef: c, powers }],
        }
    }

    pub fn from_dense(degree: u32, coefficients: &[f64]) -> Self {
        let basis = monomial_basis(degree);
        assert_eq!(basis.len(), coefficients.len(), "dense coefficient count");
        Poly3 {
            terms: basis
                .into_iter()
                .zip(coefficients)
                .map(|(powers, &coef)| Term { coef, powers })
                .collect(),
        }
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|t| t.powers.iter().sum())
            .max()
            .unwrap_or(0)
    }

    pub fn eval<S: Scalar>(&self, x: [S; 3]) -> S {
        let deg = self.terms.iter().flat_map(|t| t.powers).max().unwrap_or(0) as usize;
        let pows: [Vec<S>; 3] = std::array::from_fn(|k| {
            let mut v = Vec::with_capacity(deg + 1);
            v.push(S::one());
            for e in 1..=deg {
                let prev = v[e - 1];
                v.push(if e == 1 { x[k] } else { prev * x[k] });
            }
            v
        });
        let mut acc = S::zero();
        for t in &self.terms {
            let [a, b, c] = t.powers.map(|p| p as usize);
            let mono = match (a, b, c) {
                (0, 0, 0) => None,
                _ => Some(pows[0][a] * pows[1][b] * pows[2][c]),
            };
            acc = match mono {
                None => acc + t.coef,
                Some(m) => acc + m * t.coef,
            };
        }
        acc
    }

    /// Exact partial derivative with respect to variable `axis`.
    pub fn partial(&self, axis: usize) -> Poly3 {
        let terms = self
            .terms
            .iter()
            .filter(|t| t.powers[axis] > 0 && t.coef != 0.0)
            .map(|t| {
                let mut powers = t.powers;
                powers[axis] -= 1;
                Term {
                    coef: t.coef * t.powers[axis] as f64,
                    powers,
                }
            })
            .collect();
        Poly3 { terms }
    }

    pub fn is_finite(&self) -> bool {
        self.terms.iter().all(|t| t.coef.is_finite())
    }
}
