use std::collections::BTreeMap;

use inextensa_core::compat::ode::FIT_TOLERANCE;
use inextensa_core::compat::transport::steps_for;
use inextensa_core::compat::{
    closed_form_defect, integrate_flat_ansatz, reconstruct_map, InitialData, MetricAnsatzZ,
};
use inextensa_core::diffgeo::{deformation_gradient, right_cauchy_green, MetricField, Pullback};
use inextensa_core::domain::{Domain, ReferenceChart};
use inextensa_core::families::{make_family, Family, FamilySpec};
use inextensa_core::mesh::boundary_mesh;
use inextensa_core::metrics::MetricSpec;
use inextensa_core::report::{to_canonical_json, ConstraintReport, SCHEMA};
use inextensa_core::tensor::{Mat3, Point3};
use inextensa_core::universality::{
    classify_invariants, flatness_report, full_equilibrium_residual_metric, universality_report,
    EquilibriumOptions,
};
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::config::{Format, RunConfig};
use crate::Failure;

pub const TOOL: &str = concat!("inextensa ", env!("CARGO_PKG_VERSION"));
/// Default grid for residual sweeps.
pub const SWEEP_GRID: usize = 21;
/// Default grid for reconstruction.
pub const RECONSTRUCT_GRID: usize = 11;
/// Default mesh resolution.
pub const MESH_GRID: usize = 20;

/// Reconstruction acceptance thresholds.
pub const METRIC_DEFECT_TOL: f64 = 1e-6;
pub const COMPATIBILITY_DEFECT_TOL: f64 = 1e-7;
pub const PATH_DEFECT_TOL: f64 = 1e-8;
pub const CLOSED_FORM_MAP_TOL: f64 = 1e-6;

/// Rendered output and verdict of a subcommand.
pub struct Outcome {
    pub body: String,
    pub pass: bool,
    pub summary: String,
}

fn input(e: impl std::fmt::Display) -> Failure {
    Failure::Input(e.to_string())
}

fn header(cmd: &str, cfg: &RunConfig, domain: &Domain) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("schema".into(), json!(SCHEMA));
    m.insert("tool".into(), json!(TOOL));
    m.insert("command".into(), json!(cmd));
    m.insert("spec_sha256".into(), json!(cfg.spec_sha256));
    m.insert("seed".into(), json!(cfg.seed));
    m.insert(
        "domain".into(),
        json!({ "bounds": domain.bounds, "counts": domain.counts }),
    );
    m
}

fn fmt_point(p: [f64; 3]) -> String {
    format!(
        "({}, {}, {})",
        inextensa_core::report::g9(p[0]),
        inextensa_core::report::g9(p[1]),
        inextensa_core::report::g9(p[2])
    )
}

/// Adds `checks` and `pass`, and renders the verdict line.
fn finish(cmd: &str, mut m: Map<String, Value>, checks: &ConstraintReport) -> Outcome {
    let pass = checks.pass();
    let summary = match checks.worst_failure() {
        None => format!("{cmd}: pass ({} checks)", checks.aggregates.len()),
        Some((name, a)) => format!(
            "{cmd}: FAIL {name}: max |r| = {} at {} exceeds {}",
            inextensa_core::report::g9(a.max_abs),
            fmt_point(a.argmax),
            inextensa_core::report::g9(a.tolerance)
        ),
    };
    m.insert("pass".into(), json!(pass));
    m.insert(
        "checks".into(),
        serde_json::to_value(checks).expect("report serializes"),
    );
    if let Some((name, a)) = checks.worst_failure() {
        m.insert("failure".into(), json!({ "residual": name, "max_abs": a.max_abs, "point": a.argmax, "tolerance": a.tolerance }));
    }
    Outcome {
        body: to_canonical_json(&Value::Object(m)),
        pass,
        summary,
    }
}

fn metric_checks<M: MetricField>(
    metric: &M,
    domain: &Domain,
    cfg: &RunConfig,
    checks: &mut ConstraintReport,
) -> Result<(), Failure> {
    checks.absorb(
        "flatness",
        flatness_report(metric, domain, cfg.tol_flat, cfg.records)?,
    );
    let (cauchy, hyper) = universality_report(metric, domain, cfg.tol_diff, cfg.records)?;
    checks.absorb("cauchy", cauchy);
    checks.absorb("hyper", hyper);
    Ok(())
}

pub fn verify_family(cfg: &RunConfig) -> Result<Outcome, Failure> {
    cfg.json_only()?;
    let spec: FamilySpec = serde_json::from_str(&cfg.spec_text).map_err(input)?;
    let fam = Family::from_spec(&spec)?;
    let domain = cfg.domain(fam.kind().default_domain(2)?, SWEEP_GRID)?;
    let map = make_family(fam.clone(), domain.clone())?;
    let nodes = domain.nodes();
    let mut c_dev = Vec::with_capacity(nodes.len());
    let mut j_dev = Vec::with_capacity(nodes.len());
    let mut czz = Vec::with_capacity(nodes.len());
    for p in &nodes {
        let c = right_cauchy_green(&map, p, ReferenceChart::Cartesian)?;
        c_dev.push(c.max_abs_diff(&fam.closed_form_c_cartesian(p.to_array())));
        j_dev.push(deformation_gradient(&map, p)?.det() - fam.closed_form_j(p));
        czz.push(c.get(2, 2) - 1.0);
    }
    let mut checks = ConstraintReport::new(cfg.records);
    let mut closed = ConstraintReport::new(cfg.records);
    closed.add_series("C_vs_closed_form", cfg.tol_diff, &nodes, &c_dev);
    closed.add_series("J_vs_closed_form", cfg.tol_diff, &nodes, &j_dev);
    closed.add_series("C33_minus_1", cfg.tol_diff, &nodes, &czz);
    checks.absorb("closed_form", closed);
    let strain = Pullback(&map);
    metric_checks(&strain, &domain, cfg, &mut checks)?;
    let opts = EquilibriumOptions {
        samples: cfg.materials,
        seed: cfg.seed,
        tolerance: cfg.tol_quad,
        keep_records: cfg.records,
        ..EquilibriumOptions::default()
    };
    checks.absorb(
        "equilibrium",
        full_equilibrium_residual_metric(&strain, &domain, &opts)?,
    );
    let mut m = header("verify-family", cfg, &domain);
    m.insert(
        "family".into(),
        serde_json::to_value(fam.to_spec()).expect("spec serializes"),
    );
    m.insert("materials".into(), json!(cfg.materials));
    Ok(finish("verify-family", m, &checks))
}

fn load_metric(cfg: &RunConfig, grid: usize) -> Result<(MetricSpec, Domain), Failure> {
    let metric = MetricSpec::from_json(&cfg.spec_text)?;
    let domain = cfg.domain(metric.default_domain(2)?, grid)?;
    metric.validate_domain(&domain)?;
    Ok((metric, domain))
}

pub fn check_metric(cfg: &RunConfig) -> Result<Outcome, Failure> {
    cfg.json_only()?;
    let (metric, domain) = load_metric(cfg, SWEEP_GRID)?;
    let class = classify_invariants(&metric, &domain)?;
    let mut checks = ConstraintReport::new(cfg.records);
    metric_checks(&metric, &domain, cfg, &mut checks)?;
    let mut m = header("check-metric", cfg, &domain);
    m.insert("metric_kind".into(), json!(metric.kind()));
    m.insert(
        "classification".into(),
        serde_json::to_value(&class).expect("serializes"),
    );
    Ok(finish("check-metric", m, &checks))
}

pub fn reconstruct(cfg: &RunConfig, base: Option<Point3>) -> Result<Outcome, Failure> {
    cfg.json_only()?;
    let (metric, domain) = load_metric(cfg, RECONSTRUCT_GRID)?;
    let base = base.unwrap_or_else(|| Point3::from_array(std::array::from_fn(|a| domain.lo(a))));
    domain.check(&base)?;
    let r0 = Mat3::identity();
    let result = reconstruct_map(&metric, &domain, &base, &r0)?;
    let mut checks = ConstraintReport::new(false);
    checks.add_scalar("metric_defect", METRIC_DEFECT_TOL, result.metric_defect);
    checks.add_scalar(
        "compatibility_defect",
        COMPATIBILITY_DEFECT_TOL,
        result.compatibility_defect,
    );
    checks.add_scalar(
        "path_independence_defect",
        PATH_DEFECT_TOL,
        result.path_independence_defect,
    );
    if let Some(map) = metric.closed_form_map() {
        checks.add_scalar(
            "closed_form_map_defect",
            CLOSED_FORM_MAP_TOL,
            closed_form_defect(&result, &map, &r0)?,
        );
    }
    let mut m = header("reconstruct", cfg, &domain);
    m.insert("metric_kind".into(), json!(metric.kind()));
    m.insert(
        "reconstruction".into(),
        serde_json::to_value(&result).expect("serializes"),
    );
    Ok(finish("reconstruct", m, &checks))
}

pub fn export_mesh(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let spec: FamilySpec = serde_json::from_str(&cfg.spec_text).map_err(input)?;
    let fam = Family::from_spec(&spec)?;
    let domain = cfg.domain(fam.kind().default_domain(2)?, MESH_GRID)?;
    let map = make_family(fam.clone(), domain.clone())?;
    let mut meta = BTreeMap::new();
    meta.insert("tool".to_string(), TOOL.to_string());
    meta.insert("spec_sha256".to_string(), cfg.spec_sha256.clone());
    meta.insert("seed".to_string(), cfg.seed.to_string());
    meta.insert("family".to_string(), fam.kind().name().to_string());
    meta.insert(
        "grid".to_string(),
        format!(
            "{}x{}x{}",
            domain.counts[0], domain.counts[1], domain.counts[2]
        ),
    );
    meta.insert(
        "domain".to_string(),
        domain.bounds.map(inextensa_core::report::g9).join(","),
    );
    let mesh = boundary_mesh(&domain, |p| map.family.eval(p), meta);
    let body = match cfg.format.unwrap_or(Format::Obj) {
        Format::Obj => mesh.to_obj(),
        Format::Json => mesh.to_json(),
    };
    let summary = format!(
        "export-mesh: {} vertices, {} quads",
        mesh.vertices.len(),
        mesh.faces.len()
    );
    Ok(Outcome {
        body,
        pass: true,
        summary,
    })
}

fn default_span() -> f64 {
    1.0
}

/// Initial data either given directly or read off a profile at `z0`.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassifySpec {
    #[serde(default)]
    z0: f64,
    #[serde(default)]
    state: Option<[f64; 6]>,
    #[serde(default)]
    ansatz: Option<MetricAnsatzZ>,
    #[serde(default = "default_span")]
    span: f64,
    #[serde(default)]
    steps: Option<usize>,
}

pub fn classify(cfg: &RunConfig) -> Result<Outcome, Failure> {
    cfg.json_only()?;
    let spec: ClassifySpec = serde_json::from_str(&cfg.spec_text).map_err(input)?;
    let init = match (spec.state, &spec.ansatz) {
        (Some(state), None) => InitialData { z0: spec.z0, state },
        (None, Some(a)) => {
            a.validate()?;
            a.check(spec.z0)?;
            InitialData::from_ansatz(a, spec.z0)
        }
        _ => {
            return Err(input(
                "classify spec needs exactly one of \"state\" or \"ansatz\"",
            ))
        }
    };
    if !(spec.span > 0.0 && spec.span.is_finite()) {
        return Err(input("span must be positive"));
    }
    let steps = spec.steps.unwrap_or_else(|| steps_for(spec.span));
    if steps == 0 {
        return Err(input("steps must be positive"));
    }
    let t = integrate_flat_ansatz(&init, spec.span, steps)?;
    let mut checks = ConstraintReport::new(false);
    checks.add_scalar("branch_fit_deviation", FIT_TOLERANCE, t.max_deviation);
    let mut m = Map::new();
    m.insert("schema".into(), json!(SCHEMA));
    m.insert("tool".into(), json!(TOOL));
    m.insert("command".into(), json!("classify"));
    m.insert("spec_sha256".into(), json!(cfg.spec_sha256));
    m.insert("seed".into(), json!(cfg.seed));
    m.insert(
        "initial".into(),
        json!({ "z0": init.z0, "state": init.state }),
    );
    m.insert("span".into(), json!(spec.span));
    m.insert("steps".into(), json!(steps));
    m.insert(
        "labels".into(),
        serde_json::to_value(&t.labels).expect("serializes"),
    );
    m.insert("homogeneous".into(), json!(t.homogeneous));
    m.insert(
        "fits".into(),
        serde_json::to_value(&t.fits).expect("serializes"),
    );
    m.insert("max_deviation".into(), json!(t.max_deviation));
    let mut out = finish("classify", m, &checks);
    if out.pass {
        let names: Vec<String> = t
            .labels
            .iter()
            .map(|b| {
                serde_json::to_value(b)
                    .expect("label")
                    .as_str()
                    .unwrap_or("")
                    .to_string()
            })
            .collect();
        out.summary = format!(
            "classify: {} (deviation {})",
            names.join(", "),
            inextensa_core::report::g9(t.max_deviation)
        );
    }
    Ok(out)
}
