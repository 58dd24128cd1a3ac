//! Universality residuals, invariant classification, equilibrium forcing and
//! the fiber-tension solve for the constant fiber direction `N = e_Z`.
//!
//! Everything here is in material Cartesian form (`G = I`), so contravariant
//! and covariant components coincide and covariant divergences are plain
//! divergences.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constitutive::{Material, MaterialKind};
use crate::diffgeo::{metric_jet, DeformationMap, MetricField, Pullback};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::report::ConstraintReport;
use crate::tensor::{Point3, SymMat3};

/// Grid-constancy threshold on invariant gradients.
pub const CONSTANCY_THRESHOLD: f64 = 1e-8;

/// Strain with exact first and second derivatives: `C`, `B = C⁻¹` and the
/// principal invariants, all as jets.
#[derive(Clone, Copy, Debug)]
pub struct StrainJet {
    pub c: SymMat3<Jet<f64>>,
    pub b: SymMat3<Jet<f64>>,
    pub inv: [Jet<f64>; 3],
}

impl StrainJet {
    pub fn new(c: SymMat3<Jet<f64>>) -> Self {
        let b = c.inverse();
        let i1 = c.trace();
        let i2 = (i1 * i1 - c.mul(&c).trace()) * 0.5;
        let i3 = c.det();
        StrainJet {
            c,
            b,
            inv: [i1, i2, i3],
        }
    }

    pub fn at<M: MetricField>(metric: &M, p: &Point3) -> Self {
        Self::new(metric.eval(Jet::vars(p.to_array())))
    }

    /// Domain-checked and SPD-checked construction.
    pub fn checked<M: MetricField>(metric: &M, p: &Point3) -> Result<Self> {
        metric_jet(metric, p)?;
        Ok(Self::at(metric, p))
    }

    pub fn sbar(&self, material: &Material) -> SymMat3<Jet<f64>> {
        let [chi, xi, eta] = material.coefficients(self.inv);
        SymMat3::from_fn(|i, j| {
            let s = xi * self.c.get(i, j) + eta * self.b.get(i, j);
            if i == j {
                s + chi
            } else {
                s
            }
        })
    }
}

/// `F^A = −S̄^{AB}_{,B}`.
pub fn forcing_of(sbar: &SymMat3<Jet<f64>>) -> [f64; 3] {
    std::array::from_fn(|a| -(0..3).map(|b| sbar.get(a, b).g[b]).sum::<f64>())
}

/// `∂_Z F^A`.
pub fn forcing_dz_of(sbar: &SymMat3<Jet<f64>>) -> [f64; 3] {
    std::array::from_fn(|a| -(0..3).map(|b| sbar.get(a, b).hess(b, 2)).sum::<f64>())
}

fn div(m: &SymMat3<Jet<f64>>, a: usize) -> f64 {
    (0..3).map(|b| m.get(a, b).g[b]).sum()
}

fn contract(m: &SymMat3<Jet<f64>>, a: usize, grad: &[f64; 3]) -> f64 {
    (0..3).map(|b| m.get(a, b).v * grad[b]).sum()
}

/// Named scalar residuals at one point.
pub type Residuals = Vec<(String, f64)>;

/// Residual names, in report order, of [`cauchy_universality_residuals`].
pub fn cauchy_residual_names() -> Vec<String> {
    let mut out = Vec::new();
    for a in 1..=2 {
        out.push(format!("div_C_{a}"));
        out.push(format!("div_B_{a}"));
        for m in ["G", "C", "B"] {
            for i in 1..=3 {
                out.push(format!("{m}_dI{i}_{a}"));
            }
        }
    }
    out.push("C33_minus_1".to_string());
    out
}

pub fn cauchy_residuals_of(s: &StrainJet) -> Vec<f64> {
    let grads: [[f64; 3]; 3] = std::array::from_fn(|i| s.inv[i].g);
    let mut out = Vec::with_capacity(23);
    for a in 0..2 {
        out.push(div(&s.c, a).abs());
        out.push(div(&s.b, a).abs());
        for g in &grads {
            out.push(g[a].abs());
        }
        for g in &grads {
            out.push(contract(&s.c, a, g).abs());
        }
        for g in &grads {
            out.push(contract(&s.b, a, g).abs());
        }
    }
    out.push((s.c.get(2, 2).v - 1.0).abs());
    out
}

/// Constraints obtained by requiring `Div S̄` to vanish for every response
/// triple, plus `|C₃₃ − 1|`; 23 absolute values for `A = 1, 2`.
pub fn cauchy_universality_residuals<M: MetricField>(metric: &M, p: &Point3) -> Result<Residuals> {
    let s = StrainJet::checked(metric, p)?;
    Ok(cauchy_residual_names()
        .into_iter()
        .zip(cauchy_residuals_of(&s))
        .collect())
}

pub fn hyper_residual_names() -> Vec<String> {
    let mut out = Vec::new();
    for a in 1..=2 {
        for k in 1..=8 {
            out.push(format!("hyp{k}_{a}"));
        }
    }
    out.push("C33_minus_1".to_string());
    out
}

pub fn hyper_residuals_of(s: &StrainJet) -> Vec<f64> {
    let g: [[f64; 3]; 3] = std::array::from_fn(|i| s.inv[i].g);
    let [i1, _, i3] = s.inv.map(|j| j.v);
    // (I1 G − C)^{AB} v_B
    let dev = |a: usize, v: &[f64; 3]| i1 * v[a] - contract(&s.c, a, v);
    let mut out = Vec::with_capacity(17);
    for a in 0..2 {
        out.push((g[0][a] - div(&s.c, a)).abs());
        out.push((i3 * div(&s.b, a) + contract(&s.b, a, &g[2])).abs());
        out.push(g[0][a].abs());
        out.push(dev(a, &g[1]).abs());
        out.push((i3 * contract(&s.b, a, &g[2])).abs());
        out.push((g[1][a] + dev(a, &g[0])).abs());
        out.push((g[2][a] + i3 * contract(&s.b, a, &g[0])).abs());
        out.push((i3 * contract(&s.b, a, &g[1]) + dev(a, &g[2])).abs());
    }
    out.push((s.c.get(2, 2).v - 1.0).abs());
    out
}

/// Constraints obtained by requiring `Div S̄` to vanish for every energy
/// `W(I1, I2, I3)`: eight families for `A = 1, 2`, plus `|C₃₃ − 1|`.
pub fn hyper_universality_residuals<M: MetricField>(metric: &M, p: &Point3) -> Result<Residuals> {
    let s = StrainJet::checked(metric, p)?;
    Ok(hyper_residual_names()
        .into_iter()
        .zip(hyper_residuals_of(&s))
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseLabel {
    /// Some invariant varies.
    #[serde(rename = "case_i")]
    CaseI,
    /// All invariants constant.
    #[serde(rename = "case_ii")]
    CaseII,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseClassification {
    /// Max over the grid of `|∇I_i|`.
    pub gradient_norms: [f64; 3],
    pub threshold: f64,
    pub label: CaseLabel,
}

pub fn classify_invariants<M: MetricField>(
    metric: &M,
    domain: &Domain,
) -> Result<CaseClassification> {
    let nodes = domain.nodes();
    let norms: Vec<[f64; 3]> = nodes
        .par_iter()
        .map(|p| {
            let s = StrainJet::checked(metric, p)?;
            Ok(s.inv
                .map(|j| (j.g[0] * j.g[0] + j.g[1] * j.g[1] + j.g[2] * j.g[2]).sqrt()))
        })
        .collect::<Result<_>>()?;
    let mut gradient_norms = [0.0_f64; 3];
    for n in &norms {
        for i in 0..3 {
            gradient_norms[i] = gradient_norms[i].max(n[i]);
        }
    }
    let label = if gradient_norms.iter().all(|g| *g <= CONSTANCY_THRESHOLD) {
        CaseLabel::CaseII
    } else {
        CaseLabel::CaseI
    };
    Ok(CaseClassification {
        gradient_norms,
        threshold: CONSTANCY_THRESHOLD,
        label,
    })
}

/// `F^A = −S̄^{AB}_{,B}` with the material chain rule carried by jets.
pub fn equilibrium_forcing<M: MetricField>(
    metric: &M,
    material: &Material,
    p: &Point3,
) -> Result<[f64; 3]> {
    let s = StrainJet::checked(metric, p)?;
    Ok(forcing_of(&s.sbar(material)))
}

/// The same forcing assembled term by term:
/// `F^A = −(χ_{,B} δ^{AB} + ξ_{,B} C^{AB} + ξ C^{AB}_{,B} + η_{,B} B^{AB} + η B^{AB}_{,B})`
/// with `χ_{,B} = Σ_i χ_i I_{i,B}` and likewise for `ξ, η`.
pub fn equilibrium_forcing_chain_rule<M: MetricField>(
    metric: &M,
    material: &Material,
    p: &Point3,
) -> Result<[f64; 3]> {
    let s = StrainJet::checked(metric, p)?;
    let inv = s.inv.map(|j| j.v);
    let coef = material.coefficients(inv);
    // ∂(χ, ξ, η)/∂I_i, exact via first-order jets in (I1, I2, I3).
    let dcoef = material.coefficients(Jet::vars(inv)).map(|j| j.g);
    let igrad: [[f64; 3]; 3] = std::array::from_fn(|i| s.inv[i].g);
    let spatial = |k: usize, b: usize| -> f64 { (0..3).map(|i| dcoef[k][i] * igrad[i][b]).sum() };
    Ok(std::array::from_fn(|a| {
        let mut f = spatial(0, a);
        for b in 0..3 {
            f += spatial(1, b) * s.c.get(a, b).v + spatial(2, b) * s.b.get(a, b).v;
        }
        f += coef[1] * div(&s.c, a) + coef[2] * div(&s.b, a);
        -f
    }))
}

/// Boundary value `T̊0(X, Y) = t0 + t1 X + t2 Y + t3 X Y` on the bottom face.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensionBase {
    pub coefficients: [f64; 4],
}

impl TensionBase {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let [t0, t1, t2, t3] = self.coefficients;
        t0 + t1 * x + t2 * y + t3 * x * y
    }
}

/// Quadrature controls for the tension solve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    /// Simpson panels per grid interval.
    pub panels: usize,
    /// Width of the single Simpson panel whose upper-limit derivative gives
    /// `∂T̊/∂Z`, as a fraction of the grid spacing.
    pub derivative_panel: f64,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            panels: 4,
            derivative_panel: 1e-3,
        }
    }
}

/// Sample layout along one fiber column: nodes first, then the interior
/// Simpson points of every interval, then two derivative-panel points per
/// node.
#[derive(Clone, Debug)]
struct ColumnPlan {
    n: usize,
    m: usize,
    zs: Vec<f64>,
    deltas: Vec<f64>,
}

impl ColumnPlan {
    fn new(domain: &Domain, q: &Quadrature) -> Self {
        let n = domain.counts[2];
        let m = q.panels.max(1);
        let nodes: Vec<f64> = (0..n).map(|k| domain.coord(2, k)).collect();
        let mut zs = nodes.clone();
        for k in 0..n - 1 {
            let w = (nodes[k + 1] - nodes[k]) / (2 * m) as f64;
            for j in 1..2 * m {
                zs.push(nodes[k] + j as f64 * w);
            }
        }
        let mut deltas = Vec::with_capacity(n);
        for k in 0..n {
            let h = if k == 0 {
                nodes[1] - nodes[0]
            } else {
                nodes[k] - nodes[k - 1]
            };
            let d = q.derivative_panel * h;
            deltas.push(d);
            if k == 0 {
                zs.push(nodes[0] + 0.5 * d);
                zs.push(nodes[0] + d);
            } else {
                zs.push(nodes[k] - 0.5 * d);
                zs.push(nodes[k] - d);
            }
        }
        ColumnPlan { n, m, zs, deltas }
    }

    fn interior(&self, k: usize, j: usize) -> usize {
        self.n + k * (2 * self.m - 1) + (j - 1)
    }

    /// Index of the `j`-th Simpson point (0..=2m) of interval `k`.
    fn sub(&self, k: usize, j: usize) -> usize {
        if j == 0 {
            k
        } else if j == 2 * self.m {
            k + 1
        } else {
            self.interior(k, j)
        }
    }

    fn deriv(&self, k: usize, t: usize) -> usize {
        self.n + (self.n - 1) * (2 * self.m - 1) + 2 * k + t
    }

    /// Tension values and `∂T̊/∂Z` at the nodes from `(F³, ∂_Z F³)` samples.
    fn integrate(&self, t0: f64, f: &[[f64; 2]]) -> (Vec<f64>, Vec<f64>) {
        let mut t = Vec::with_capacity(self.n);
        t.push(t0);
        for k in 0..self.n - 1 {
            let h = self.zs[k + 1] - self.zs[k];
            let w = h / self.m as f64;
            let mut acc = 0.0;
            for p in 0..self.m {
                let a = f[self.sub(k, 2 * p)][0];
                let mid = f[self.sub(k, 2 * p + 1)][0];
                let b = f[self.sub(k, 2 * p + 2)][0];
                acc += w / 6.0 * (a + 4.0 * mid + b);
            }
            t.push(t[k] + acc);
        }
        let mut dt = Vec::with_capacity(self.n);
        for k in 0..self.n {
            let d = self.deltas[k];
            let node = f[k];
            let half = f[self.deriv(k, 0)];
            let far = f[self.deriv(k, 1)];
            let avg = (node[0] + 4.0 * half[0] + far[0]) / 6.0;
            dt.push(if k == 0 {
                // −∂/∂a of S(a, a + δ) at a = Z0.
                avg - d / 6.0 * (node[1] + 2.0 * half[1])
            } else {
                // ∂/∂b of S(b − δ, b) at b = Z_k.
                avg + d / 6.0 * (2.0 * half[1] + node[1])
            });
        }
        (t, dt)
    }
}

/// Tension `T̊` and `∂T̊/∂Z` at every grid node (X-fastest order).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TensionField {
    pub domain: Domain,
    pub base: TensionBase,
    pub values: Vec<f64>,
    pub dz: Vec<f64>,
}

impl TensionField {
    pub fn value(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.domain.index(i, j, k)]
    }

    /// `T̊` at a grid node.
    pub fn at(&self, p: &Point3) -> Result<f64> {
        let idx = self.node_index(p).ok_or(Error::OutsideDomain {
            x: p.x,
            y: p.y,
            z: p.z,
        })?;
        Ok(self.values[idx])
    }

    fn node_index(&self, p: &Point3) -> Option<usize> {
        let c = p.to_array();
        let mut ijk = [0usize; 3];
        for a in 0..3 {
            let t = (c[a] - self.domain.lo(a)) / self.domain.spacing(a);
            let r = t.round();
            if (t - r).abs() > 1e-9 || r < 0.0 || r as usize >= self.domain.counts[a] {
                return None;
            }
            ijk[a] = r as usize;
        }
        Some(self.domain.index(ijk[0], ijk[1], ijk[2]))
    }
}

fn column_points(domain: &Domain) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(domain.counts[0] * domain.counts[1]);
    for j in 0..domain.counts[1] {
        for i in 0..domain.counts[0] {
            out.push((i, j));
        }
    }
    out
}

fn column_jets<M: MetricField>(
    metric: &M,
    plan: &ColumnPlan,
    x: f64,
    y: f64,
) -> Result<Vec<StrainJet>> {
    plan.zs
        .iter()
        .map(|&z| {
            let p = Point3 { x, y, z };
            let s = StrainJet::at(metric, &p);
            s.c.values().check_spd()?;
            Ok(s)
        })
        .collect()
}

fn column_forcing(jets: &[StrainJet], material: &Material) -> (Vec<[f64; 3]>, Vec<[f64; 2]>) {
    let mut full = Vec::with_capacity(jets.len());
    let mut f3 = Vec::with_capacity(jets.len());
    for s in jets {
        let sb = s.sbar(material);
        let f = forcing_of(&sb);
        let fz = forcing_dz_of(&sb);
        full.push(f);
        f3.push([f[2], fz[2]]);
    }
    (full, f3)
}

/// `T̊(X,Y,Z) = T̊0(X,Y) + ∫_{Z0}^{Z} F³ dζ` by composite Simpson along every
/// fiber column.
pub fn solve_tension<M: MetricField>(
    metric: &M,
    material: &Material,
    domain: &Domain,
    base: &TensionBase,
    quadrature: &Quadrature,
) -> Result<TensionField> {
    let plan = ColumnPlan::new(domain, quadrature);
    let cols = column_points(domain);
    let per_col: Vec<(Vec<f64>, Vec<f64>)> = cols
        .par_iter()
        .map(|&(i, j)| {
            let (x, y) = (domain.coord(0, i), domain.coord(1, j));
            let jets = column_jets(metric, &plan, x, y)?;
            let (_, f3) = column_forcing(&jets, material);
            Ok(plan.integrate(base.eval(x, y), &f3))
        })
        .collect::<Result<_>>()?;
    let mut values = vec![0.0; domain.len()];
    let mut dz = vec![0.0; domain.len()];
    for (c, (i, j)) in cols.iter().enumerate() {
        for k in 0..domain.counts[2] {
            let idx = domain.index(*i, *j, k);
            values[idx] = per_col[c].0[k];
            dz[idx] = per_col[c].1[k];
        }
    }
    Ok(TensionField {
        domain: domain.clone(),
        base: *base,
        values,
        dz,
    })
}

/// Equilibrium residuals `|S^{AB}_{,B}|`, `S = T̊ e_Z⊗e_Z + S̄`, at every node
/// for every material: components 1, 2 are `|F^A|`, component 3 is
/// `|∂T̊/∂Z − F³|`. Entries are `[material][node][A]`.
pub fn equilibrium_residuals<M: MetricField>(
    metric: &M,
    materials: &[Material],
    domain: &Domain,
    base: &TensionBase,
    quadrature: &Quadrature,
) -> Result<Vec<Vec<[f64; 3]>>> {
    let plan = ColumnPlan::new(domain, quadrature);
    let cols = column_points(domain);
    let per_col: Vec<Vec<Vec<[f64; 3]>>> = cols
        .par_iter()
        .map(|&(i, j)| {
            let (x, y) = (domain.coord(0, i), domain.coord(1, j));
            let jets = column_jets(metric, &plan, x, y)?;
            Ok(materials
                .iter()
                .map(|mat| {
                    let (full, f3) = column_forcing(&jets, mat);
                    let (_, dt) = plan.integrate(base.eval(x, y), &f3);
                    (0..plan.n)
                        .map(|k| {
                            [
                                full[k][0].abs(),
                                full[k][1].abs(),
                                (dt[k] - full[k][2]).abs(),
                            ]
                        })
                        .collect()
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut out = vec![vec![[0.0; 3]; domain.len()]; materials.len()];
    for (c, (i, j)) in cols.iter().enumerate() {
        for (m, res) in per_col[c].iter().enumerate() {
            for (k, r) in res.iter().enumerate() {
                out[m][domain.index(*i, *j, k)] = *r;
            }
        }
    }
    Ok(out)
}

/// Seeded sample of materials: seeds `seed, seed + 1, …`.
pub fn sample_materials(kind: MaterialKind, count: usize, seed: u64) -> Vec<Material> {
    (0..count as u64)
        .map(|i| Material::random(kind, seed.wrapping_add(i)))
        .collect()
}

/// Options for [`full_equilibrium_residual`].
#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumOptions {
    pub kind: MaterialKind,
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub base: TensionBase,
    pub quadrature: Quadrature,
    pub keep_records: bool,
}

impl Default for EquilibriumOptions {
    fn default() -> Self {
        EquilibriumOptions {
            kind: MaterialKind::ResponseTriple,
            samples: 10,
            seed: 1,
            tolerance: 1e-7,
            base: TensionBase::default(),
            quadrature: Quadrature::default(),
            keep_records: false,
        }
    }
}

/// Solves for the tension and reports the max equilibrium residual per
/// component over all sampled materials.
pub fn full_equilibrium_residual_metric<M: MetricField>(
    metric: &M,
    domain: &Domain,
    opts: &EquilibriumOptions,
) -> Result<ConstraintReport> {
    let materials = sample_materials(opts.kind, opts.samples, opts.seed);
    let res = equilibrium_residuals(metric, &materials, domain, &opts.base, &opts.quadrature)?;
    let nodes = domain.nodes();
    let mut report = ConstraintReport::new(opts.keep_records);
    for a in 0..3 {
        let worst: Vec<f64> = (0..nodes.len())
            .map(|n| res.iter().map(|m| m[n][a]).fold(0.0, f64::max))
            .collect();
        report.add_series(&format!("div_S_{}", a + 1), opts.tolerance, &nodes, &worst);
    }
    Ok(report)
}

/// [`full_equilibrium_residual_metric`] on the pulled-back strain of a map.
pub fn full_equilibrium_residual<D: DeformationMap>(
    map: &D,
    domain: &Domain,
    opts: &EquilibriumOptions,
) -> Result<ConstraintReport> {
    full_equilibrium_residual_metric(&Pullback(map), domain, opts)
}

/// Sweeps the Cauchy and hyperelastic residual suites over the grid.
pub fn universality_report<M: MetricField>(
    metric: &M,
    domain: &Domain,
    tolerance: f64,
    keep_records: bool,
) -> Result<(ConstraintReport, ConstraintReport)> {
    let nodes = domain.nodes();
    let rows: Vec<(Vec<f64>, Vec<f64>)> = nodes
        .par_iter()
        .map(|p| {
            let s = StrainJet::checked(metric, p)?;
            Ok((cauchy_residuals_of(&s), hyper_residuals_of(&s)))
        })
        .collect::<Result<_>>()?;
    let mut cauchy = ConstraintReport::new(keep_records);
    for (k, name) in cauchy_residual_names().iter().enumerate() {
        let v: Vec<f64> = rows.iter().map(|r| r.0[k]).collect();
        cauchy.add_series(name, tolerance, &nodes, &v);
    }
    let mut hyper = ConstraintReport::new(keep_records);
    for (k, name) in hyper_residual_names().iter().enumerate() {
        let v: Vec<f64> = rows.iter().map(|r| r.1[k]).collect();
        hyper.add_series(name, tolerance, &nodes, &v);
    }
    Ok((cauchy, hyper))
}

/// Max `|Ric|` entry over the grid, overall and per component, with locations.
pub fn flatness_report<M: MetricField>(
    metric: &M,
    domain: &Domain,
    tolerance: f64,
    keep_records: bool,
) -> Result<ConstraintReport> {
    let nodes = domain.nodes();
    let rics: Vec<SymMat3> = nodes
        .par_iter()
        .map(|p| Ok(crate::diffgeo::ricci_from_jet(&metric_jet(metric, p)?)))
        .collect::<Result<_>>()?;
    let mut report = ConstraintReport::new(keep_records);
    let worst: Vec<f64> = rics.iter().map(SymMat3::max_abs).collect();
    report.add_series("ricci", tolerance, &nodes, &worst);
    for a in 0..3 {
        for b in a..3 {
            let v: Vec<f64> = rics.iter().map(|r| r.get(a, b).abs()).collect();
            report.add_series(&format!("ricci_{}{}", a + 1, b + 1), tolerance, &nodes, &v);
        }
    }
    Ok(report)
}
