//! Flatness of Z-dependent strain profiles as a second-order ODE system,
//! its RK4 integration, and least-squares classification of trajectories
//! against the two closed-form solution branches.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ansatz::{Branch, BranchParams, MetricAnsatzZ};
use crate::error::{Error, Result};

/// Threshold on `|g² − fh|` below which the system is treated as singular.
pub const DENOMINATOR_FLOOR: f64 = 1e-14;
/// Reduced-flatness gate on initial data.
pub const INITIAL_FLATNESS_GATE: f64 = 1e-8;
/// Fits closer than this are reported as a tie.
pub const TIE_TOLERANCE: f64 = 1e-10;
/// Initial data with every first derivative below this is homogeneous.
/// Branch fits within this max deviation count as members.
pub const FIT_TOLERANCE: f64 = 1e-8;
pub const HOMOGENEOUS_THRESHOLD: f64 = 1e-12;

/// The four flatness expressions in `(f, g, h)` and their first two
/// derivatives.
/// `e4` carries `−f²h′²`; with that sign `e4 = 4D²·Ric₃₃`, `D = fh − g²`.
pub fn ricci_ode_expressions(v: [f64; 3], d1: [f64; 3], d2: [f64; 3]) -> [f64; 4] {
    let [f, g, h] = v;
    let [fp, gp, hp] = d1;
    let [fpp, gpp, hpp] = d2;
    let e1 = 2.0 * f * h * fpp + f * fp * hp - 2.0 * f * gp * gp - 2.0 * g * g * fpp
        + 2.0 * g * fp * gp
        - h * fp * fp;
    let e2 = 2.0 * h * gp * gp - h * fp * hp - 2.0 * g * gp * hp + f * hp * hp + 2.0 * g * g * hpp
        - 2.0 * f * h * hpp;
    let e3 = h * fp * gp - 2.0 * g * fp * hp + f * gp * hp + 2.0 * g * g * gpp - 2.0 * f * h * gpp;
    let e4 = -h * h * fp * fp + 2.0 * f * h * h * fpp - f * f * hp * hp + 4.0 * f * g * gp * hp
        - 2.0 * g * g * (fp * hp + f * hpp + gp * gp)
        - 2.0 * h * (g * g * fpp + g * (-2.0 * fp * gp + 2.0 * f * gpp) + f * (gp * gp - f * hpp))
        + 4.0 * g * g * g * gpp;
    [e1, e2, e3, e4]
}

pub fn ricci_ode_residuals(ansatz: &MetricAnsatzZ, z: f64) -> Result<[f64; 4]> {
    let p = ansatz.check(z)?;
    Ok(ricci_ode_expressions(p.value, p.d1, p.d2))
}

/// `(f″, g″, h″)` from the first three flatness equations.
pub fn solve_second_derivatives(
    f: f64,
    g: f64,
    h: f64,
    fp: f64,
    gp: f64,
    hp: f64,
) -> Result<[f64; 3]> {
    let gap = g * g - f * h;
    if !(gap.abs() > DENOMINATOR_FLOOR) {
        return Err(Error::DegenerateDenominator { value: gap.abs() });
    }
    let den = 2.0 * gap;
    Ok([
        (-h * fp * fp + 2.0 * g * fp * gp - 2.0 * f * gp * gp + f * fp * hp) / den,
        (-h * fp * gp + 2.0 * g * fp * hp - f * gp * hp) / den,
        (-2.0 * h * gp * gp + h * fp * hp + 2.0 * g * gp * hp - f * hp * hp) / den,
    ])
}

/// `(g² − fh)(g′² − f′h′)` from values and first derivatives.
pub fn reduced_flatness_of(v: [f64; 3], d1: [f64; 3]) -> f64 {
    let [f, g, h] = v;
    let [fp, gp, hp] = d1;
    (g * g - f * h) * (gp * gp - fp * hp)
}

pub fn reduced_flatness(ansatz: &MetricAnsatzZ, z: f64) -> f64 {
    let p = ansatz.profile(z);
    reduced_flatness_of(p.value, p.d1)
}

/// `(f, g, h, f′, g′, h′)` at `z0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialData {
    pub z0: f64,
    pub state: [f64; 6],
}

impl InitialData {
    pub fn from_ansatz(ansatz: &MetricAnsatzZ, z0: f64) -> Self {
        let p = ansatz.profile(z0);
        let [f, g, h] = p.value;
        let [fp, gp, hp] = p.d1;
        InitialData {
            z0,
            state: [f, g, h, fp, gp, hp],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BranchFit {
    pub branch: Branch,
    pub constants: BranchParams,
    /// Max over trajectory samples of `|(f, g, h) − closed form|`.
    pub max_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlatTrajectory {
    pub zs: Vec<f64>,
    pub states: Vec<[f64; 6]>,
    /// Constant trajectory (all first derivatives vanish initially).
    pub homogeneous: bool,
    /// One fit per branch, in branch order.
    pub fits: Vec<BranchFit>,
    /// Best branch, or both when they tie.
    pub labels: Vec<Branch>,
    pub max_deviation: f64,
}

fn is_admissible(s: &[f64; 6]) -> bool {
    s.iter().all(|v| v.is_finite())
        && s[0] > DENOMINATOR_FLOOR
        && s[0] * s[2] - s[1] * s[1] > DENOMINATOR_FLOOR
}

fn rhs(s: &[f64; 6]) -> Result<[f64; 6]> {
    let [f, g, h, fp, gp, hp] = *s;
    let [a, b, c] = solve_second_derivatives(f, g, h, fp, gp, hp)?;
    Ok([fp, gp, hp, a, b, c])
}

fn axpy(s: &[f64; 6], k: &[f64; 6], t: f64) -> [f64; 6] {
    std::array::from_fn(|i| s[i] + t * k[i])
}

/// Fixed-step RK4 of the closed second-order system.
pub fn integrate_profile(
    initial: &InitialData,
    span: f64,
    steps: usize,
) -> Result<(Vec<f64>, Vec<[f64; 6]>)> {
    if steps == 0 || !span.is_finite() || span == 0.0 {
        return Err(Error::InvalidParams(
            "integration needs a nonzero finite span and at least one step".into(),
        ));
    }
    let h = span / steps as f64;
    let mut zs = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut s = initial.state;
    if !is_admissible(&s) {
        return Err(Error::BlowUp { z: initial.z0 });
    }
    zs.push(initial.z0);
    states.push(s);
    for k in 0..steps {
        let z = initial.z0 + k as f64 * h;
        let blow = |_| Error::BlowUp { z };
        let k1 = rhs(&s).map_err(blow)?;
        let k2 = rhs(&axpy(&s, &k1, 0.5 * h)).map_err(blow)?;
        let k3 = rhs(&axpy(&s, &k2, 0.5 * h)).map_err(blow)?;
        let k4 = rhs(&axpy(&s, &k3, h)).map_err(blow)?;
        s = std::array::from_fn(|i| s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        let z_next = initial.z0 + (k + 1) as f64 * h;
        if !is_admissible(&s) {
            return Err(Error::BlowUp { z: z_next });
        }
        zs.push(z_next);
        states.push(s);
    }
    Ok((zs, states))
}

fn max_deviation(branch: Branch, c: [f64; 4], zs: &[f64], states: &[[f64; 6]]) -> f64 {
    zs.iter()
        .zip(states)
        .map(|(&z, s)| {
            let m = branch.fgh(c, z);
            (0..3).map(|k| (m[k] - s[k]).abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// Closed-form constants reproducing value and slope at `z0`.
fn analytic_guess(branch: Branch, initial: &InitialData) -> [f64; 4] {
    let [f, g, h, fp, gp, hp] = initial.state;
    let z0 = initial.z0;
    match branch {
        Branch::One => {
            let fpp = solve_second_derivatives(f, g, h, fp, gp, hp)
                .map(|d| d[0])
                .unwrap_or(0.0);
            let c1sq = (0.5 * fpp).abs().max(1e-12);
            let w0 = fp / (2.0 * c1sq);
            let c3 = h.abs().sqrt().max(1e-12);
            [c1sq.sqrt(), g / c3, c3, w0 - z0]
        }
        Branch::Two => {
            let w0 = if hp.abs() > 1e-12 { 2.0 * h / hp } else { 1.0 };
            let c3 = h.abs().sqrt() / w0.abs().max(1e-12);
            let c1 = g / (c3 * w0 * w0).max(1e-12);
            let c2 = (f - c1 * c1 * w0 * w0).max(0.0).sqrt();
            [c1, c2, c3, w0 - z0]
        }
    }
}

/// Solves the 4×4 system `a x = b`; `None` when singular.
fn solve4(a: [[f64; 4]; 4], b: [f64; 4]) -> Option<[f64; 4]> {
    let m = nalgebra::Matrix4::from_fn(|i, j| a[i][j]);
    let x = m.lu().solve(&nalgebra::Vector4::from(b))?;
    x.iter().all(|v| v.is_finite()).then(|| [x[0], x[1], x[2], x[3]])
}

/// Levenberg–Marquardt on the sum of squared `(f, g, h)` deviations.
fn levenberg_marquardt(
    branch: Branch,
    start: [f64; 4],
    zs: &[f64],
    targets: &[[f64; 3]],
) -> [f64; 4] {
    let cost = |c: &[f64; 4]| -> f64 {
        zs.iter()
            .zip(targets)
            .map(|(&z, t)| {
                let m = branch.fgh(*c, z);
                (0..3).map(|k| (m[k] - t[k]).powi(2)).sum::<f64>()
            })
            .sum()
    };
    let mut c = start;
    let mut current = cost(&c);
    let mut lambda = 1e-3;
    for _ in 0..200 {
        if current < 1e-30 {
            break;
        }
        let mut jtj = [[0.0; 4]; 4];
        let mut jtr = [0.0; 4];
        for (&z, t) in zs.iter().zip(targets) {
            let m = branch.fgh(c, z);
            let jac = branch.fgh_jacobian(c, z);
            for r in 0..3 {
                let res = m[r] - t[r];
                for i in 0..4 {
                    jtr[i] += jac[r][i] * res;
                    for j in 0..4 {
                        jtj[i][j] += jac[r][i] * jac[r][j];
                    }
                }
            }
        }
        let mut improved = false;
        while lambda < 1e16 {
            let mut a = jtj;
            for i in 0..4 {
                a[i][i] += lambda * jtj[i][i].max(1e-12);
            }
            let Some(step) = solve4(a, jtr.map(|v| -v)) else {
                lambda *= 10.0;
                continue;
            };
            let trial: [f64; 4] = std::array::from_fn(|i| c[i] + step[i]);
            let next = cost(&trial);
            if next < current {
                let small = step
                    .iter()
                    .zip(&c)
                    .all(|(s, v)| s.abs() <= 1e-15 * v.abs().max(1.0));
                c = trial;
                current = next;
                lambda = (lambda / 10.0).max(1e-15);
                improved = !small;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    c
}

/// Best least-squares fit of `branch` to the trajectory over the analytic
/// guess and three seeded perturbations of it.
pub fn fit_branch(
    branch: Branch,
    initial: &InitialData,
    zs: &[f64],
    states: &[[f64; 6]],
) -> BranchFit {
    let stride = (zs.len() / 200).max(1);
    let sz: Vec<f64> = zs.iter().step_by(stride).copied().collect();
    let st: Vec<[f64; 3]> = states
        .iter()
        .step_by(stride)
        .map(|s| [s[0], s[1], s[2]])
        .collect();
    let guess = analytic_guess(branch, initial);
    let mut starts = vec![guess];
    for seed in 0..3u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        starts.push(std::array::from_fn(|i| {
            guess[i] * (1.0 + 0.1 * rng.gen_range(-1.0..1.0)) + 0.01 * rng.gen_range(-1.0..1.0)
        }));
    }
    let mut best: Option<BranchFit> = None;
    for s in starts {
        let c = levenberg_marquardt(branch, s, &sz, &st);
        let dev = max_deviation(branch, c, zs, states);
        let dev = if dev.is_nan() { f64::INFINITY } else { dev };
        if best.as_ref().is_none_or(|b| dev < b.max_deviation) {
            best = Some(BranchFit {
                branch,
                constants: BranchParams::from_array(c),
                max_deviation: dev,
            });
        }
    }
    best.expect("at least one start")
}

/// Integrates from `initial` over `[z0, z0 + span]` and classifies the
/// trajectory against both closed-form branches.
pub fn integrate_flat_ansatz(
    initial: &InitialData,
    span: f64,
    steps: usize,
) -> Result<FlatTrajectory> {
    let s = initial.state;
    let gate = reduced_flatness_of([s[0], s[1], s[2]], [s[3], s[4], s[5]]);
    if !(gate.abs() <= INITIAL_FLATNESS_GATE) {
        return Err(Error::InconsistentInitialData { value: gate.abs() });
    }
    let (zs, states) = integrate_profile(initial, span, steps)?;
    let homogeneous = s[3..].iter().all(|d| d.abs() <= HOMOGENEOUS_THRESHOLD);
    if homogeneous {
        // Degenerate branch 1: C1 → 0 with C1·w held at √(f − C2²).
        let [f, g, h] = [s[0], s[1], s[2]];
        let c3 = h.sqrt();
        let c2 = g / c3;
        let offset = f - c2 * c2;
        let dev = zs
            .iter()
            .zip(&states)
            .map(|(_, st)| {
                [
                    (st[0] - c2 * c2 - offset).abs(),
                    (st[1] - c2 * c3).abs(),
                    (st[2] - c3 * c3).abs(),
                ]
                .into_iter()
                .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        let fit = BranchFit {
            branch: Branch::One,
            constants: BranchParams::new(0.0, c2, c3, 0.0),
            max_deviation: dev,
        };
        return Ok(FlatTrajectory {
            zs,
            states,
            homogeneous,
            fits: vec![fit],
            labels: vec![Branch::One],
            max_deviation: dev,
        });
    }
    let fits: Vec<BranchFit> = Branch::ALL
        .iter()
        .map(|&b| fit_branch(b, initial, &zs, &states))
        .collect();
    let best = fits
        .iter()
        .map(|f| f.max_deviation)
        .fold(f64::INFINITY, f64::min);
    let labels = fits
        .iter()
        .filter(|f| f.max_deviation - best < TIE_TOLERANCE)
        .map(|f| f.branch)
        .collect();
    Ok(FlatTrajectory {
        zs,
        states,
        homogeneous,
        fits,
        labels,
        max_deviation: best,
    })
}
