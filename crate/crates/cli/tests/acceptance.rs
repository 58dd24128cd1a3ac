//! Acceptance criteria, one verdict line each.
//!
//! A criterion listed in `DOCUMENTED_FAILURES` is still run and still prints
//! `FAIL`; the process only exits nonzero when an outcome differs from what
//! is documented there, or when a suite exceeds its time budget.

use std::process::{Command, ExitCode};
use std::time::Instant;

use inextensa_core::compat::{
    frame_scalars, integrate_flat_ansatz, reconstruct_map, rodrigues_exp, structural_residuals,
    transport_rotation_traced, Branch, BranchParams, CoframeZ, InitialData, MetricAnsatzZ,
    PathSpec, StretchFrame,
};
use inextensa_core::constitutive::{Material, MaterialKind};
use inextensa_core::diffgeo::{
    christoffel, deformation_gradient, invariants, ricci, right_cauchy_green, MetricField, Pullback,
};
use inextensa_core::domain::{Domain, ReferenceChart};
use inextensa_core::families::{
    figure_z1, figure_z2, make_family, F5ZCylindrical, Family, FamilyKind, FamilyMetric,
};
use inextensa_core::metrics::MetricSpec;
use inextensa_core::oracle;
use inextensa_core::report::{g9, ConstraintReport};
use inextensa_core::scalar::Scalar;
use inextensa_core::tensor::{Mat3, Point3, SymMat3};
use inextensa_core::universality::{
    cauchy_universality_residuals, classify_invariants, equilibrium_forcing, flatness_report,
    full_equilibrium_residual_metric, universality_report, CaseLabel, EquilibriumOptions,
    StrainJet,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SUITE_BUDGET_SECS: f64 = 60.0;
const FAMILY_SUITE_BUDGET_SECS: f64 = 30.0;

/// Grid for the per-draw family sweeps; the tension quadrature meets 1e−7 here.
const FAMILY_GRID: usize = 11;
const DRAWS: usize = 20;

const DOCUMENTED_FAILURES: &[(&str, &str)] = &[(
    "1[5z]",
    "the 5Z map has Div C# = ((C1^2 (1 + C2^2) - C1^-2)/R) e_R + (2 s C2/R^2) d_Theta, nonzero unless C1^2 = 1 and C2 = 0 \
     (a rigid rotation); the fiber tension only balances the Z component, so (c) and (d) cannot hold",
)];

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Verdict {
            pass,
            detail: detail.into(),
        }
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn kind_index(kind: FamilyKind) -> u64 {
    FamilyKind::UNIVERSAL
        .iter()
        .position(|k| *k == kind)
        .expect("universal kind") as u64
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

fn worst(report: &ConstraintReport) -> f64 {
    max_of(report.aggregates.values().map(|a| a.max_abs))
}

fn family_positivity(kind: FamilyKind) -> Verdict {
    let mut r = rng(1000 + kind_index(kind));
    let (mut czz, mut ric, mut cauchy, mut hyper, mut equil) =
        (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    let mut div_gap: Option<f64> = None;
    for draw in 0..DRAWS {
        let d = kind.default_domain(FAMILY_GRID).unwrap();
        let fam = Family::random(kind, &mut r, &d).unwrap();
        let map = make_family(fam.clone(), d.clone()).unwrap();
        let nodes = d.nodes();
        for p in &nodes {
            let c = right_cauchy_green(&map, p, ReferenceChart::Cartesian).unwrap();
            czz = czz.max((c.get(2, 2) - 1.0).abs());
        }
        let strain = Pullback(&map);
        if let Family::F5Z { c, sign } = fam {
            let gap = nodes.iter().map(|p| {
                let s = StrainJet::at(&strain, p);
                let measured: [f64; 2] =
                    std::array::from_fn(|a| (0..3).map(|b| s.c.get(a, b).g[b]).sum());
                let expected = f5z_divergence(c, sign, p.x, p.y);
                (measured[0] - expected[0])
                    .abs()
                    .max((measured[1] - expected[1]).abs())
            });
            div_gap = Some(div_gap.unwrap_or(0.0).max(max_of(gap)));
            assert!(
                div_gap.unwrap() <= 1e-9,
                "documented 5Z divergence no longer matches"
            );
        }
        ric = ric.max(worst(&flatness_report(&strain, &d, 1e-9, false).unwrap()));
        let (c, h) = universality_report(&strain, &d, 1e-9, false).unwrap();
        cauchy = cauchy.max(worst(&c));
        hyper = hyper.max(worst(&h));
        let opts = EquilibriumOptions {
            samples: 10,
            seed: draw as u64,
            tolerance: 1e-7,
            ..EquilibriumOptions::default()
        };
        equil = equil.max(worst(
            &full_equilibrium_residual_metric(&strain, &d, &opts).unwrap(),
        ));
    }
    let parts = [
        ("a", czz <= 1e-12),
        ("b", ric <= 1e-9),
        ("c", cauchy <= 1e-9 && equil <= 1e-7),
        ("d", hyper <= 1e-9),
    ];
    let failed: Vec<&str> = parts.iter().filter(|p| !p.1).map(|p| p.0).collect();
    Verdict::new(
        failed.is_empty(),
        format!(
            "{} draws: |C_ZZ-1| {}, |Ric| {}, Cauchy {}, equilibrium {}, hyper {}{}{}",
            DRAWS,
            g9(czz),
            g9(ric),
            g9(cauchy),
            g9(equil),
            g9(hyper),
            if failed.is_empty() {
                String::new()
            } else {
                format!("; failing parts {}", failed.join(","))
            },
            div_gap
                .map(|g| format!("; Div C# vs analytic form {}", g9(g)))
                .unwrap_or_default()
        ),
    )
}

/// Cartesian `(Div C♯)^{X,Y}` of the 5Z map, from the cylindrical
/// components `(C1²(1 + C2²) − C1⁻²)/R` along `e_R` and `2 s C2/R²` along
/// `∂_Θ = (−Y, X)`.
fn f5z_divergence(c: [f64; 4], sign: f64, x: f64, y: f64) -> [f64; 2] {
    let r2 = x * x + y * y;
    let radial = (c[0] * c[0] * (1.0 + c[1] * c[1]) - 1.0 / (c[0] * c[0])) / r2;
    let angular = 2.0 * sign * c[1] / r2;
    [radial * x - angular * y, radial * y + angular * x]
}

/// `Fᵀ F` oracle transcribed from the published strain forms: the two
/// solution branches for Z1 and Z2, the table row for 5Z (cylindrical
/// components) and `AᵀA` for Z0.
fn published_strain(fam: &Family, p: [f64; 3]) -> SymMat3 {
    match fam {
        Family::Z0 { a } => SymMat3::from_fn(|i, j| (0..3).map(|k| a.m[k][i] * a.m[k][j]).sum()),
        Family::Z1 { c } => {
            let w = p[2] + c[3];
            SymMat3::new(
                c[1] * c[1] + c[0] * c[0] * w * w,
                c[1] * c[2],
                0.0,
                c[2] * c[2],
                0.0,
                1.0,
            )
        }
        Family::Z2 { c } => {
            let w2 = (p[2] + c[4]).powi(2);
            SymMat3::new(
                c[1] * c[1] + c[0] * c[0] * w2,
                c[0] * c[2] * w2,
                0.0,
                c[2] * c[2] * w2,
                0.0,
                1.0,
            )
        }
        Family::F5Z { c, sign } => {
            let rr = p[0];
            SymMat3::new(
                c[0] * c[0] * (1.0 + c[1] * c[1]),
                sign * c[1] * rr,
                0.0,
                rr * rr / (c[0] * c[0]),
                0.0,
                1.0,
            )
        }
        Family::ControlSin { .. } => unreachable!("not a universal family"),
    }
}

fn published_jacobian(fam: &Family, p: [f64; 3]) -> f64 {
    match fam {
        Family::Z0 { a } => a.det(),
        Family::Z1 { c } => c[0] * c[2] * (c[3] + p[2]),
        Family::Z2 { c } => -c[1] * c[2] * (c[4] + p[2]),
        Family::F5Z { sign, .. } => *sign,
        Family::ControlSin { .. } => unreachable!("not a universal family"),
    }
}

fn closed_form_agreement() -> Verdict {
    let (mut dc, mut dj) = (0.0_f64, 0.0_f64);
    for kind in FamilyKind::UNIVERSAL {
        let mut r = rng(2000 + kind_index(kind));
        for _ in 0..DRAWS {
            let d = kind.default_domain(6).unwrap();
            let fam = Family::random(kind, &mut r, &d).unwrap();
            let map = make_family(fam.clone(), d.clone()).unwrap();
            for p in d.nodes() {
                let f = deformation_gradient(&map, &p).unwrap();
                dj = dj.max((f.det() - published_jacobian(&fam, p.to_array())).abs());
                let c = match &fam {
                    Family::F5Z { c, sign } => {
                        // Table components are in the (R, Θ, Z) coordinate basis.
                        let cyl = Point3::new(p.x.hypot(p.y), p.y.atan2(p.x), p.z).unwrap();
                        let g = deformation_gradient(&F5ZCylindrical { c: *c, sign: *sign }, &cyl)
                            .unwrap();
                        let dev = g
                            .gram()
                            .max_abs_diff(&published_strain(&fam, cyl.to_array()));
                        dc = dc.max(dev);
                        continue;
                    }
                    _ => f.gram(),
                };
                dc = dc.max(c.max_abs_diff(&published_strain(&fam, p.to_array())));
            }
        }
    }
    Verdict::new(
        dc <= 1e-10 && dj <= 1e-12,
        format!(
            "{} draws per family: max |C - C_closed| {}, max |J - J_closed| {}",
            DRAWS,
            g9(dc),
            g9(dj)
        ),
    )
}

fn invariant_structure() -> Verdict {
    let mut slice_spread = 0.0_f64;
    let mut global_spread = 0.0_f64;
    let mut i3_dev = 0.0_f64;
    let mut labels_ok = true;
    for kind in FamilyKind::UNIVERSAL {
        let mut r = rng(3000 + kind_index(kind));
        for _ in 0..DRAWS {
            let d = kind.default_domain(6).unwrap();
            let fam = Family::random(kind, &mut r, &d).unwrap();
            let map = make_family(fam, d.clone()).unwrap();
            let inv: Vec<[f64; 3]> = d
                .nodes()
                .iter()
                .map(|p| {
                    invariants(
                        &right_cauchy_green(&map, p, ReferenceChart::Cartesian).unwrap(),
                        &SymMat3::identity(),
                    )
                    .unwrap()
                })
                .collect();
            let spread = |idx: &[usize]| -> f64 {
                (0..3)
                    .map(|i| {
                        let v: Vec<f64> = idx.iter().map(|&n| inv[n][i]).collect();
                        max_of(v.iter().map(|x| (x - v[0]).abs()))
                    })
                    .fold(0.0, f64::max)
            };
            let expected = match kind {
                FamilyKind::Z1 | FamilyKind::Z2 => {
                    for k in 0..d.counts[2] {
                        let slice: Vec<usize> =
                            (0..d.len()).filter(|&n| d.ijk(n)[2] == k).collect();
                        slice_spread = slice_spread.max(spread(&slice));
                    }
                    CaseLabel::CaseI
                }
                _ => {
                    let all: Vec<usize> = (0..d.len()).collect();
                    global_spread = global_spread.max(spread(&all));
                    if kind == FamilyKind::F5Z {
                        i3_dev = i3_dev.max(max_of(inv.iter().map(|v| (v[2] - 1.0).abs())));
                    }
                    CaseLabel::CaseII
                }
            };
            labels_ok &= classify_invariants(&Pullback(&map), &d).unwrap().label == expected;
        }
    }
    Verdict::new(
        slice_spread <= 1e-10 && global_spread <= 1e-10 && i3_dev <= 1e-10 && labels_ok,
        format!(
            "Z1/Z2 slice spread {}, Z0/5Z global spread {}, 5Z |I3-1| {}, labels {}",
            g9(slice_spread),
            g9(global_spread),
            g9(i3_dev),
            if labels_ok { "match" } else { "MISMATCH" }
        ),
    )
}

/// Adds `ε·bump` to one entry of a base strain field.
struct Perturbed<M> {
    base: M,
    eps: f64,
    mode: usize,
}

impl<M: MetricField> MetricField for Perturbed<M> {
    fn eval<S: Scalar>(&self, p: [S; 3]) -> SymMat3<S> {
        let c = self.base.eval(p);
        let [x, y, z] = p;
        let (entry, bump) = match self.mode % 5 {
            0 => ((0, 0), (x * y).sin()),
            1 => ((0, 1), z * z * x),
            2 => ((1, 1), (y + z).cos()),
            3 => ((0, 2), x * x + y),
            _ => ((2, 2), x * z),
        };
        let e = bump * self.eps;
        SymMat3::from_fn(|a, b| {
            if (a, b) == entry || (b, a) == entry {
                c.get(a, b) + e
            } else {
                c.get(a, b)
            }
        })
    }

    fn domain(&self) -> Option<&Domain> {
        self.base.domain()
    }
}

/// `(Cauchy pass, hyperelastic pass)` over the grid.
fn verdicts<M: MetricField>(metric: &M, d: &Domain) -> (bool, bool) {
    let (c, h) = universality_report(metric, d, 1e-9, false).unwrap();
    (c.pass(), h.pass())
}

fn equivalence() -> Verdict {
    let mut r = rng(4000);
    let mut catalog: Vec<(bool, bool)> = Vec::new();
    for kind in FamilyKind::UNIVERSAL {
        for _ in 0..3 {
            let d = kind.default_domain(6).unwrap();
            let fam = Family::random(kind, &mut r, &d).unwrap();
            catalog.push(verdicts(
                &FamilyMetric {
                    family: fam,
                    domain: d.clone(),
                },
                &d,
            ));
        }
    }
    let box6 = Domain::family_box(6).unwrap();
    for fam in [figure_z1(), figure_z2()] {
        catalog.push(verdicts(
            &FamilyMetric {
                family: fam,
                domain: box6.clone(),
            },
            &box6,
        ));
    }
    let unit = Domain::unit(6).unwrap();
    for spec in [
        r#"{"kind":"branch1","params":{"C1":1,"C2":0.5,"C3":2,"C4":0.5}}"#,
        r#"{"kind":"branch2","params":{"C1":1,"C2":1,"C3":0.5,"C4":0.5}}"#,
        r#"{"kind":"bending","a0":1,"a1":1,"b0":1.5}"#,
        r#"{"kind":"constant","c":[[2,0.5,0.1],[0.5,1,0],[0.1,0,1]]}"#,
    ] {
        catalog.push(verdicts(&MetricSpec::from_json(spec).unwrap(), &unit));
    }
    let mut negatives: Vec<(bool, bool)> = Vec::new();
    for i in 0..20 {
        let kind = [FamilyKind::Z0, FamilyKind::Z1, FamilyKind::Z2][i % 3];
        let d = kind.default_domain(6).unwrap();
        let fam = Family::random(kind, &mut r, &d).unwrap();
        let eps = r.gen_range(1e-3..1e-1);
        negatives.push(verdicts(
            &Perturbed {
                base: FamilyMetric {
                    family: fam,
                    domain: d.clone(),
                },
                eps,
                mode: i,
            },
            &d,
        ));
    }
    let agree = |v: &[(bool, bool)]| v.iter().filter(|(c, h)| c == h).count();
    let passing = catalog.iter().filter(|(c, h)| *c && *h).count();
    let negatives_fail = negatives.iter().all(|(c, h)| !c && !h);
    Verdict::new(
        agree(&catalog) == catalog.len() && agree(&negatives) == negatives.len() && negatives_fail,
        format!(
            "catalog {}/{} verdicts agree ({} pass both), negatives {}/{} agree{}",
            agree(&catalog),
            catalog.len(),
            passing,
            agree(&negatives),
            negatives.len(),
            if negatives_fail {
                " (all fail)"
            } else {
                " (some negative passes)"
            }
        ),
    )
}

fn branch_params(r: &mut ChaCha8Rng) -> BranchParams {
    let away =
        |r: &mut ChaCha8Rng| r.gen_range(0.5..1.5) * if r.gen_bool(0.5) { 1.0 } else { -1.0 };
    BranchParams::new(
        away(r),
        r.gen_range(-1.0..1.0),
        away(r),
        r.gen_range(0.2..1.0),
    )
}

fn ode_classification() -> Verdict {
    let mut r = rng(5000);
    let mut traj = 0.0_f64;
    let mut labels_ok = true;
    let mut structural = 0.0_f64;
    for branch in Branch::ALL {
        for _ in 0..10 {
            let params = branch_params(&mut r);
            let a = MetricAnsatzZ::branch(branch, params);
            let t = integrate_flat_ansatz(&InitialData::from_ansatz(&a, 0.0), 1.0, 1000).unwrap();
            labels_ok &= t.labels.contains(&branch);
            for (z, s) in t.zs.iter().zip(&t.states) {
                let exact = a.profile(*z);
                for k in 0..3 {
                    traj = traj
                        .max((exact.value[k] - s[k]).abs())
                        .max((exact.d1[k] - s[3 + k]).abs());
                }
            }
            let cf = match branch {
                Branch::One => CoframeZ::Branch1 { params },
                Branch::Two => CoframeZ::Branch2 { params },
            };
            for i in 0..=20 {
                let s = frame_scalars(&cf, i as f64 / 20.0).unwrap();
                structural = structural.max(max_of(structural_residuals(&s).map(f64::abs)));
            }
        }
    }
    let mut negative_ok = true;
    let mut negative_ratio = f64::INFINITY;
    for psi0 in [0.1, 0.5, 1.0, 2.0] {
        // a = c = 1, b = 2ψ₀Z gives ξ = η = 0 and ψ ≡ ψ₀.
        let mut entries = std::collections::BTreeMap::new();
        entries.insert("a".to_string(), vec![1.0]);
        entries.insert("b".to_string(), vec![0.0, 2.0 * psi0]);
        entries.insert("c".to_string(), vec![1.0]);
        let cf = CoframeZ::CustomPoly { params: entries };
        for z in [0.0, 0.5, 1.0] {
            let s = frame_scalars(&cf, z).unwrap();
            let m = max_of(structural_residuals(&s).map(f64::abs));
            negative_ok &= m >= psi0 * psi0;
            negative_ratio = negative_ratio.min(m / (psi0 * psi0));
        }
    }
    Verdict::new(
        traj <= 1e-8 && labels_ok && structural <= 1e-10 && negative_ok,
        format!(
            "RK4 vs closed form {}, labels {}, structural on branches {}, constant-psi min residual/psi0^2 {}",
            g9(traj),
            if labels_ok { "match" } else { "MISMATCH" },
            g9(structural),
            g9(negative_ratio)
        ),
    )
}

fn reconstruction() -> Verdict {
    let mut r = rng(6000);
    let (mut metric, mut compat, mut path) = (0.0_f64, 0.0_f64, 0.0_f64);
    let mut cases = 0;
    for kind in FamilyKind::UNIVERSAL {
        let d = kind.default_domain(5).unwrap();
        let mut fams = vec![
            Family::random(kind, &mut r, &d).unwrap(),
            Family::random(kind, &mut r, &d).unwrap(),
        ];
        match kind {
            FamilyKind::Z1 => fams.push(figure_z1()),
            FamilyKind::Z2 => fams.push(figure_z2()),
            _ => {}
        }
        for fam in fams {
            let m = FamilyMetric {
                family: fam,
                domain: d.clone(),
            };
            let base = Point3::from_array(std::array::from_fn(|a| d.lo(a)));
            let res = reconstruct_map(&m, &d, &base, &Mat3::identity()).unwrap();
            metric = metric.max(res.metric_defect);
            compat = compat.max(res.compatibility_defect);
            path = path.max(res.path_independence_defect);
            cases += 1;
        }
    }
    // At the origin the bending map has F = diag(a0, b0, 1) = U and φ = 0, so
    // with R0 = I the aligning rigid motion is the identity.
    let (a0, a1, b0) = (1.0, 1.0, 1.5);
    let bending = MetricSpec::from_json(r#"{"kind":"bending","a0":1,"a1":1,"b0":1.5}"#).unwrap();
    let d = Domain::unit(6).unwrap();
    let res = reconstruct_map(&bending, &d, &Point3::origin(), &Mat3::identity()).unwrap();
    let mut bend = 0.0_f64;
    for s in &res.samples {
        let [x, y, z] = s.point;
        let l = (a0 + a1 * z) / a1;
        let exact = [l * (a1 * x).sin(), b0 * y, l * (a1 * x).cos() - a0 / a1];
        bend = bend.max(max_of((0..3).map(|k| (s.phi[k] - exact[k]).abs())));
    }
    Verdict::new(
        metric <= 1e-6 && compat <= 1e-7 && path <= 1e-8 && bend <= 1e-6,
        format!(
            "{} family fields: metric {}, mixed-partial {}, path {}; bending vs closed form {}",
            cases,
            g9(metric),
            g9(compat),
            g9(path),
            g9(bend)
        ),
    )
}

fn negative_controls() -> Verdict {
    let unit = Domain::unit(5).unwrap();
    let curved = MetricSpec::from_json(
        r#"{"kind":"poly","c11":[{"coef":1,"powers":[0,0,0]},{"coef":1,"powers":[0,0,2]}],"c22":[{"coef":1,"powers":[0,0,0]}],"c33":[{"coef":1,"powers":[0,0,0]}]}"#,
    )
    .unwrap();
    let ric11 = ricci(&curved, &Point3::new(0.5, 0.5, 0.0).unwrap())
        .unwrap()
        .get(0, 0);
    let flat_fails = !flatness_report(&curved, &unit, 1e-9, false).unwrap().pass();

    let stretched = MetricSpec::from_json(
        r#"{"kind":"poly","c11":[{"coef":1,"powers":[0,0,0]},{"coef":1,"powers":[2,0,0]}],"c22":[{"coef":1,"powers":[0,0,0]}],"c33":[{"coef":1,"powers":[0,0,0]}]}"#,
    )
    .unwrap();
    let res =
        cauchy_universality_residuals(&stretched, &Point3::new(1.0, 0.5, 0.5).unwrap()).unwrap();
    let di1 = res.iter().find(|(n, _)| n == "G_dI1_1").unwrap().1;
    let comp_fails = !universality_report(&stretched, &unit, 1e-9, false)
        .unwrap()
        .0
        .pass();

    let rotated = |theta_power: &str| {
        MetricSpec::from_json(&format!(
            r#"{{"kind":"rotated","lambda1_sq":[{{"coef":2,"powers":[0,0,0]}}],"lambda2_sq":[{{"coef":1,"powers":[0,0,0]}}],"theta":[{{"coef":1,"powers":{theta_power}}}]}}"#
        ))
        .unwrap()
    };
    let divergence_max = |m: &MetricSpec| {
        let (c, _) = universality_report(m, &unit, 1e-9, false).unwrap();
        max_of(
            ["div_C_1", "div_C_2", "div_B_1", "div_B_2"]
                .iter()
                .map(|n| c.max_abs(n).unwrap()),
        )
    };
    let in_x = divergence_max(&rotated("[1,0,0]"));
    let in_z = divergence_max(&rotated("[0,0,1]"));
    Verdict::new(
        (ric11 - 1.0).abs() <= 1e-6
            && flat_fails
            && (di1 - 2.0).abs() <= 1e-6
            && comp_fails
            && in_x > 1e-9
            && in_z <= 1e-9,
        format!(
            "Ric11(Z=0) {}, |I1,1|(X=1) {}, rotated divergence theta=X {} theta=Z {}",
            g9(ric11),
            g9(di1),
            g9(in_x),
            g9(in_z)
        ),
    )
}

/// Smooth SPD field with every entry varying, used as a curved test metric.
struct Curved;

impl MetricField for Curved {
    fn eval<S: Scalar>(&self, p: [S; 3]) -> SymMat3<S> {
        let [x, y, z] = p;
        SymMat3::new(
            x.sin() * z * 0.3 + 2.0,
            x * y * 0.3,
            z * 0.1,
            y * y * 0.2 + 1.5,
            x * 0.2,
            x * z * 0.3 + 1.0,
        )
    }
}

fn oracle_points<M: MetricField>(
    metric: &M,
    p: [f64; 3],
    h: f64,
    materials: &[Material],
    worst_rel: &mut f64,
) -> bool {
    let rel = |a: f64, b: f64| (a - b).abs() / 1f64.max(a.abs()).max(b.abs());
    let pt = Point3::from_array(p);
    let mut ok = true;
    let mut check = |a: f64, b: f64| {
        *worst_rel = worst_rel.max(rel(a, b));
        ok &= oracle::agrees(a, b, oracle::RELATIVE_TOL);
    };
    let g = christoffel(metric, &pt).unwrap();
    let go = oracle::christoffel(metric, p, h);
    for c in 0..3 {
        for a in 0..3 {
            for b in 0..3 {
                check(g[c][a][b], go[c][a][b]);
            }
        }
    }
    let r = ricci(metric, &pt).unwrap();
    let ro = oracle::ricci(metric, p, h);
    for a in 0..3 {
        for b in 0..3 {
            check(r.get(a, b), ro.get(a, b));
        }
    }
    let s = StrainJet::at(metric, &pt);
    let (dc, db) = oracle::divergences(metric, p, h);
    for a in 0..3 {
        check((0..3).map(|b| s.c.get(a, b).g[b]).sum(), dc[a]);
        check((0..3).map(|b| s.b.get(a, b).g[b]).sum(), db[a]);
    }
    for mat in materials {
        let f = equilibrium_forcing(metric, mat, &pt).unwrap();
        let fo = oracle::forcing(metric, mat, p, h);
        for a in 0..3 {
            check(f[a], fo[a]);
        }
    }
    ok
}

fn oracle_cross_checks() -> Verdict {
    let mut r = rng(8000);
    let h = oracle::STEP;
    let materials = [
        Material::random(MaterialKind::ResponseTriple, 1),
        Material::random(MaterialKind::Energy, 2),
    ];
    let box3 = Domain::family_box(3).unwrap();
    let z1 = FamilyMetric {
        family: figure_z1(),
        domain: box3.clone(),
    };
    let z2 = FamilyMetric {
        family: figure_z2(),
        domain: box3,
    };
    let mut ok = true;
    let mut worst_rel = 0.0_f64;
    for i in 0..100 {
        let p = [
            r.gen_range(0.1..0.9),
            r.gen_range(0.1..0.9),
            r.gen_range(1.1..1.9),
        ];
        ok &= match i % 3 {
            0 => oracle_points(&Curved, p, h, &materials, &mut worst_rel),
            1 => oracle_points(&z1, p, h, &materials, &mut worst_rel),
            _ => oracle_points(&z2, p, h, &materials, &mut worst_rel),
        };
    }
    // The connection of diag((a0 + a1Z)², b0², 1) depends on Z only, so any
    // path at fixed Z has constant K.
    struct Bending;
    impl MetricField for Bending {
        fn eval<S: Scalar>(&self, p: [S; 3]) -> SymMat3<S> {
            let l = p[2] + 1.0;
            SymMat3::diag(l * l, S::cst(2.25), S::one())
        }
    }
    let mut rot = 0.0_f64;
    for _ in 0..20 {
        let z = r.gen_range(0.0..1.0);
        let a = Point3::new(r.gen_range(0.0..1.0), r.gen_range(0.0..1.0), z).unwrap();
        let b = Point3::new(r.gen_range(0.0..1.0), r.gen_range(0.0..1.0), z).unwrap();
        let path = PathSpec::straight(a, b);
        let t = transport_rotation_traced(&Bending, &path, &Mat3::identity()).unwrap();
        let k = StretchFrame::at(&Bending, &a).unwrap().k(path.velocity());
        rot = rot.max(t.rotation.max_abs_diff(&rodrigues_exp(&k, 1.0).unwrap()));
    }
    Verdict::new(
        ok && rot <= 1e-9,
        format!(
            "100 points: worst relative gap {}; Rodrigues vs RK4 {}",
            g9(worst_rel),
            g9(rot)
        ),
    )
}

fn determinism() -> Verdict {
    let dir = tempfile::TempDir::new().unwrap();
    let write = |name: &str, body: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    };
    let z1 = write(
        "z1.json",
        r#"{"family":"z1","params":{"C1":2,"C2":-1,"C3":1.5}}"#,
    );
    let b1 = write(
        "b1.json",
        r#"{"kind":"branch1","params":{"C1":1,"C2":0.5,"C3":2,"C4":0.5}}"#,
    );
    let bend = write("bend.json", r#"{"kind":"bending","a0":1,"a1":1,"b0":1.5}"#);
    let cls = write(
        "cls.json",
        r#"{"ansatz":{"kind":"branch2","params":{"C1":1,"C2":1,"C3":0.5,"C4":0.5}}}"#,
    );
    let runs: Vec<(&str, &std::path::Path, Vec<&str>)> = vec![
        (
            "verify-family",
            &z1,
            vec!["--grid", "11", "--materials", "4", "--seed", "3"],
        ),
        ("check-metric", &b1, vec!["--grid", "7"]),
        ("reconstruct", &bend, vec!["--grid", "5"]),
        ("export-mesh", &z1, vec!["--grid", "8"]),
        ("export-mesh", &z1, vec!["--grid", "8", "--format", "json"]),
        ("classify", &cls, vec![]),
    ];
    let mut identical = 0;
    for (cmd, spec, extra) in &runs {
        let outputs: Vec<Vec<u8>> = (0..2)
            .map(|_| {
                let o = Command::new(env!("CARGO_BIN_EXE_inextensa"))
                    .arg(cmd)
                    .arg("--spec")
                    .arg(spec)
                    .args(extra)
                    .env_remove("INEXTENSA_SEED")
                    .output()
                    .unwrap();
                assert_eq!(
                    o.status.code(),
                    Some(0),
                    "{cmd}: {}",
                    String::from_utf8_lossy(&o.stderr)
                );
                o.stdout
            })
            .collect();
        if outputs[0] == outputs[1] {
            identical += 1;
        }
    }
    Verdict::new(
        identical == runs.len(),
        format!(
            "{identical}/{} subcommand configurations byte-identical across two runs",
            runs.len()
        ),
    )
}

fn main() -> ExitCode {
    type Suite = (&'static str, &'static str, Box<dyn Fn() -> Verdict>);
    let mut suites: Vec<Suite> = Vec::new();
    for kind in FamilyKind::UNIVERSAL {
        let id: &'static str = Box::leak(format!("1[{}]", kind.name()).into_boxed_str());
        suites.push((
            id,
            "family positivity",
            Box::new(move || family_positivity(kind)),
        ));
    }
    suites.push((
        "2",
        "closed-form agreement",
        Box::new(closed_form_agreement),
    ));
    suites.push(("3", "invariant structure", Box::new(invariant_structure)));
    suites.push((
        "4",
        "Cauchy-hyperelastic equivalence",
        Box::new(equivalence),
    ));
    suites.push(("5", "ODE classification", Box::new(ode_classification)));
    suites.push(("6", "reconstruction round trip", Box::new(reconstruction)));
    suites.push(("7", "negative controls", Box::new(negative_controls)));
    suites.push(("8", "oracle cross-checks", Box::new(oracle_cross_checks)));
    suites.push(("9", "determinism", Box::new(determinism)));

    let mut unexpected = 0;
    let mut family_secs = 0.0;
    for (id, title, run) in &suites {
        let start = Instant::now();
        let v = run();
        let secs = start.elapsed().as_secs_f64();
        if id.starts_with("1[") {
            family_secs += secs;
        }
        let documented = DOCUMENTED_FAILURES.iter().find(|(d, _)| d == id);
        println!(
            "criterion {id:<6} {}  {title}: {} [{secs:.1}s]",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        match (v.pass, documented) {
            (false, Some((_, why))) => println!("    documented failure: {why}"),
            (false, None) => unexpected += 1,
            (true, Some(_)) => {
                println!("    documented failure no longer fails; update the record");
                unexpected += 1;
            }
            (true, None) => {}
        }
        if secs > SUITE_BUDGET_SECS {
            println!("    over the {SUITE_BUDGET_SECS}s budget");
            unexpected += 1;
        }
    }
    let within = family_secs <= FAMILY_SUITE_BUDGET_SECS;
    println!(
        "criterion 1 runtime {family_secs:.1}s (budget {FAMILY_SUITE_BUDGET_SECS}s): {}",
        if within { "PASS" } else { "FAIL" }
    );
    if !within {
        unexpected += 1;
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{unexpected} unexpected outcome(s)");
        ExitCode::FAILURE
    }
}
