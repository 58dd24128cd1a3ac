use inextensa_core::compat::*;
use inextensa_core::diffgeo::{ricci, ConstantMetric, MetricField};
use inextensa_core::domain::Domain;
use inextensa_core::families::{figure_z1, figure_z2, Family, FamilyKind, FamilyMetric};
use inextensa_core::scalar::Scalar;
use inextensa_core::tensor::{Mat3, Point3, SymMat3};
use inextensa_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Bending {
    a0: f64,
    a1: f64,
    b0: f64,
}

impl MetricField for Bending {
    fn eval<S: Scalar>(&self, p: [S; 3]) -> SymMat3<S> {
        let l = p[2] * self.a1 + self.a0;
        SymMat3::diag(l * l, S::cst(self.b0 * self.b0), S::one())
    }
}

fn branch1() -> MetricAnsatzZ {
    MetricAnsatzZ::Branch1 {
        params: BranchParams::new(1.0, 0.5, 2.0, 0.5),
    }
}

fn branch2() -> MetricAnsatzZ {
    MetricAnsatzZ::Branch2 {
        params: BranchParams::new(1.0, 1.0, 0.5, 0.5),
    }
}

#[test]
fn closed_branches_solve_the_ode_system() {
    for a in [branch1(), branch2()] {
        for z in [0.0, 0.3, 1.0, 2.5] {
            let r = ricci_ode_residuals(&a, z).unwrap();
            assert!(
                r.iter().all(|v| v.abs() <= 1e-12),
                "{a:?} {z} {r:?} {:?}",
                a.profile(z)
            );
            assert!(reduced_flatness(&a, z).abs() <= 1e-12);
        }
    }
    let p = branch1().profile(1.0);
    let [f, g, h] = p.value;
    let [fp, gp, hp] = p.d1;
    let d2 = solve_second_derivatives(f, g, h, fp, gp, hp).unwrap();
    assert!((d2[0] - 2.0).abs() < 1e-14 && d2[1].abs() < 1e-14 && d2[2].abs() < 1e-14);
}

#[test]
fn substituted_second_derivatives_zero_first_three_residuals() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let f: f64 = rng.gen_range(1.0..3.0);
        let h: f64 = rng.gen_range(1.0..3.0);
        let g: f64 = rng.gen_range(-0.5..0.5);
        let d1: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let d2 = solve_second_derivatives(f, g, h, d1[0], d1[1], d1[2]).unwrap();
        let e = inextensa_core::compat::ode::ricci_ode_expressions([f, g, h], d1, d2);
        assert!(e[..3].iter().all(|v| v.abs() < 1e-12), "{e:?}");
    }
}

#[test]
fn ode_expressions_track_ricci_components() {
    // With D = fh − g²: Ric₁₁ = e1/(4D), Ric₂₂ = −e2/(4D), Ric₁₂ = −e3/(4D), Ric₃₃ = e4/(4D²).
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let coef = |rng: &mut ChaCha8Rng, c0: f64| {
            vec![c0, rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)]
        };
        let a = MetricAnsatzZ::CustomPoly {
            params: PolyParams {
                f: coef(&mut rng, 2.0),
                g: coef(&mut rng, 0.1),
                h: coef(&mut rng, 2.0),
            },
        };
        let z = rng.gen_range(0.0..0.5);
        let Ok(e) = ricci_ode_residuals(&a, z) else {
            continue;
        };
        let [f, g, h] = a.profile(z).value;
        let d = f * h - g * g;
        let ric = ricci(&a, &Point3::new(0.0, 0.0, z).unwrap()).unwrap();
        let scale = 1.0 + e.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        assert!((ric.get(0, 0) - e[0] / (4.0 * d)).abs() < 1e-9 * scale);
        assert!((ric.get(1, 1) + e[1] / (4.0 * d)).abs() < 1e-9 * scale);
        assert!((ric.get(0, 1) + e[2] / (4.0 * d)).abs() < 1e-9 * scale);
        assert!((ric.get(2, 2) - e[3] / (4.0 * d * d)).abs() < 1e-9 * scale);
        let ricci_zero = ric.max_abs() < 1e-9;
        let ode_zero = e.iter().all(|v| v.abs() < 1e-9);
        assert_eq!(ricci_zero, ode_zero);
    }
}

#[test]
fn frames_and_profiles_agree_on_flatness() {
    let flat = [
        CoframeZ::Branch1 {
            params: BranchParams::new(1.2, 0.4, 0.9, 0.3),
        },
        CoframeZ::Branch2 {
            params: BranchParams::new(0.8, 1.1, -0.6, 0.7),
        },
    ];
    let mut curved = std::collections::BTreeMap::new();
    curved.insert("a".to_string(), vec![1.0, 0.3, 0.2]);
    curved.insert("b".to_string(), vec![0.1, 0.4]);
    curved.insert("c".to_string(), vec![1.0, 0.0, 0.5]);
    let curved = CoframeZ::CustomPoly { params: curved };
    for (cf, expect_flat) in flat.iter().map(|c| (c, true)).chain([(&curved, false)]) {
        let induced = MetricAnsatzZ::Coframe {
            coframe: cf.clone(),
        };
        for z in [0.1, 0.6, 1.0] {
            let s = frame_scalars(cf, z).unwrap();
            let frame_flat = structural_residuals(&s).iter().all(|r| r.abs() <= 1e-10);
            let ode_flat = ricci_ode_residuals(&induced, z)
                .unwrap()
                .iter()
                .all(|r| r.abs() <= 1e-9);
            assert_eq!(
                frame_flat,
                expect_flat,
                "{cf:?} {z} {:?} {:?}",
                structural_residuals(&s),
                s
            );
            assert_eq!(ode_flat, expect_flat);
        }
    }
}

#[test]
fn integration_recovers_both_branches() {
    for (a, branch) in [(branch1(), Branch::One), (branch2(), Branch::Two)] {
        let init = InitialData::from_ansatz(&a, 0.0);
        let t = integrate_flat_ansatz(&init, 1.0, 1000).unwrap();
        assert_eq!(t.labels, vec![branch]);
        assert!(t.max_deviation <= 1e-8, "{}", t.max_deviation);
        for (z, s) in t.zs.iter().zip(&t.states) {
            let exact = a.profile(*z).value;
            assert!((0..3).all(|k| (exact[k] - s[k]).abs() <= 1e-8));
        }
    }
}

#[test]
fn constant_and_inconsistent_initial_data() {
    let init = InitialData {
        z0: 0.0,
        state: [2.0, 0.3, 1.5, 0.0, 0.0, 0.0],
    };
    let t = integrate_flat_ansatz(&init, 1.0, 100).unwrap();
    assert!(t.homogeneous);
    assert_eq!(t.labels, vec![Branch::One]);
    assert_eq!(t.fits[0].constants.c1, 0.0);
    assert!(t.states.iter().all(|s| *s == init.state));
    let bad = InitialData {
        z0: 0.0,
        state: [1.0, 0.0, 1.0, 1.0, 1.0, 0.0],
    };
    assert!(matches!(
        integrate_flat_ansatz(&bad, 1.0, 100),
        Err(Error::InconsistentInitialData { .. })
    ));
}

#[test]
fn connection_is_skew_along_any_direction() {
    let d = Domain::family_box(3).unwrap();
    let m = FamilyMetric {
        family: figure_z2(),
        domain: d,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let p = Point3::new(
            rng.gen_range(0.0..1.0),
            rng.gen_range(0.0..1.0),
            rng.gen_range(1.0..2.0),
        )
        .unwrap();
        let frame = StretchFrame::at(&m, &p).unwrap();
        let v: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        assert!(frame.k(v).skew_defect() <= 1e-11);
    }
}

#[test]
fn rodrigues_inverse_and_transport_agreement() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let w: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
        let k = Mat3 {
            m: [[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]],
        };
        let s = rng.gen_range(-1.0..1.0);
        let prod = rodrigues_exp(&k, s)
            .unwrap()
            .mul(&rodrigues_exp(&k, -s).unwrap());
        assert!(prod.max_abs_diff(&Mat3::identity()) <= 1e-12);
    }
    let m = Bending {
        a0: 1.0,
        a1: 1.0,
        b0: 1.5,
    };
    for x in [0.25, 0.5, 1.0] {
        let path = PathSpec::straight(Point3::origin(), Point3::new(x, 0.3, 0.0).unwrap());
        let t = transport_rotation_traced(&m, &path, &Mat3::identity()).unwrap();
        let k = StretchFrame::at(&m, &Point3::origin())
            .unwrap()
            .k(path.velocity());
        assert!(t.rotation.max_abs_diff(&rodrigues_exp(&k, 1.0).unwrap()) <= 1e-9);
        assert!(t.max_orthogonality_defect <= 1e-10);
    }
}

#[test]
fn transport_is_path_independent_for_z2() {
    let d = Domain::family_box(3).unwrap();
    let m = FamilyMetric {
        family: figure_z2(),
        domain: d,
    };
    let a = Point3::new(0.1, 0.2, 1.1).unwrap();
    let b = Point3::new(0.9, 0.7, 1.8).unwrap();
    let legs = |mid: Point3| {
        let r = transport_rotation(&m, &PathSpec::straight(a, mid), &Mat3::identity()).unwrap();
        transport_rotation(&m, &PathSpec::straight(mid, b), &r).unwrap()
    };
    let r1 = legs(Point3::new(0.9, 0.2, 1.1).unwrap());
    let r2 = legs(Point3::new(0.1, 0.7, 1.8).unwrap());
    assert!(r1.max_abs_diff(&r2) <= 1e-8);
}

#[test]
fn bending_reconstruction_matches_closed_form() {
    let (a0, a1, b0) = (1.0, 1.0, 1.5);
    let d = Domain::unit(5).unwrap();
    let r = reconstruct_map(
        &Bending { a0, a1, b0 },
        &d,
        &Point3::origin(),
        &Mat3::identity(),
    )
    .unwrap();
    for s in &r.samples {
        let [x, y, z] = s.point;
        let l = (a0 + a1 * z) / a1;
        let exact = [l * (a1 * x).sin(), b0 * y, l * (a1 * x).cos() - a0 / a1];
        for k in 0..3 {
            assert!(
                (s.phi[k] - exact[k]).abs() <= 1e-6,
                "{:?} {:?}",
                s.phi,
                exact
            );
        }
    }
    assert!(
        r.metric_defect <= 1e-6
            && r.compatibility_defect <= 1e-7
            && r.path_independence_defect <= 1e-8,
        "{r:?}"
    );
}

#[test]
fn family_reconstructions_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for kind in FamilyKind::UNIVERSAL {
        let d = kind.default_domain(3).unwrap();
        let fam = Family::random(kind, &mut rng, &d).unwrap();
        let m = FamilyMetric {
            family: fam,
            domain: d.clone(),
        };
        let base = Point3::from_array(std::array::from_fn(|a| d.lo(a)));
        let r = reconstruct_map(&m, &d, &base, &Mat3::identity()).unwrap();
        assert!(r.metric_defect <= 1e-6, "{kind:?} {}", r.metric_defect);
        assert!(
            r.compatibility_defect <= 1e-7,
            "{kind:?} {}",
            r.compatibility_defect
        );
        assert!(
            r.path_independence_defect <= 1e-8,
            "{kind:?} {}",
            r.path_independence_defect
        );
    }
    let d = Domain::unit(3).unwrap();
    let b2 = reconstruct_map(&branch2(), &d, &Point3::origin(), &Mat3::identity()).unwrap();
    assert!(b2.metric_defect <= 1e-6);
    let z1 = FamilyMetric {
        family: figure_z1(),
        domain: Domain::family_box(3).unwrap(),
    };
    assert!(reconstruct_map(
        &z1,
        &Domain::family_box(3).unwrap(),
        &Point3::new(0.0, 0.0, 1.0).unwrap(),
        &Mat3::identity()
    )
    .is_ok());
}

#[test]
fn curved_metric_is_rejected() {
    struct Curved;
    impl MetricField for Curved {
        fn eval<S: Scalar>(&self, p: [S; 3]) -> SymMat3<S> {
            SymMat3::diag(p[2] * p[2] + 1.0, S::one(), S::one())
        }
    }
    let d = Domain::unit(3).unwrap();
    assert!(matches!(
        reconstruct_map(&Curved, &d, &Point3::origin(), &Mat3::identity()),
        Err(Error::NotFlat { .. })
    ));
    let c = ConstantMetric(SymMat3::identity());
    assert!(matches!(
        reconstruct_map(
            &c,
            &d,
            &Point3::new(2.0, 0.0, 0.0).unwrap(),
            &Mat3::identity()
        ),
        Err(Error::OutsideDomain { .. })
    ));
}
