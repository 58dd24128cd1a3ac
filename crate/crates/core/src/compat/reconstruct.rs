//! Recovery of a deformation map from a flat strain field: the rotation is
//! transported jointly with `dφ = R U dX` along axis-ordered staircases.

use rayon::prelude::*;
use serde::Serialize;

use super::transport::{check_rotation, steps_for, StretchFrame, FLATNESS_GATE};
use crate::diffgeo::{
    deformation_gradient, metric_jet, ricci_from_jet, spd_sqrt, DeformationMap, MetricField,
};
use crate::domain::Domain;
use crate::eigen::polar_project;
use crate::error::{Error, Result};
use crate::tensor::{Mat3, Point3};

/// Rotation and map value at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameState {
    pub r: Mat3,
    pub phi: [f64; 3],
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MapSample {
    pub point: [f64; 3],
    pub phi: [f64; 3],
    pub rotation: [[f64; 3]; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReconstructionResult {
    pub base: [f64; 3],
    /// Grid nodes in X-fastest order.
    pub samples: Vec<MapSample>,
    /// Max `|∂_B F_{aA} − ∂_A F_{aB}|` over the grid.
    pub compatibility_defect: f64,
    /// Max `|FᵀF − C|` with `F` from finite differences of independently
    /// reconstructed values of `φ`, at the check points.
    pub metric_defect: f64,
    /// Max difference of `(φ, R)` between the staircase and the straight
    /// chord from the base, at the check points.
    pub path_independence_defect: f64,
    pub check_points: Vec<[f64; 3]>,
}

impl ReconstructionResult {
    pub fn phi_at(&self, idx: usize) -> [f64; 3] {
        self.samples[idx].phi
    }
}

/// Controls for [`reconstruct_map_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReconstructionOptions {
    /// Finite-difference step for the `FᵀF` defect.
    pub fd_step: f64,
    /// Check points per axis (placed at interior fractions of the box).
    pub check_per_axis: usize,
}

impl Default for ReconstructionOptions {
    fn default() -> Self {
        ReconstructionOptions {
            fd_step: 1e-3,
            check_per_axis: 2,
        }
    }
}

struct Integrator<'a, M> {
    metric: &'a M,
}

impl<M: MetricField> Integrator<'_, M> {
    fn rhs(&self, p: &Point3, v: [f64; 3], r: &Mat3) -> Result<(Mat3, [f64; 3])> {
        let frame = StretchFrame::at(self.metric, p)?;
        let dr = r.mul(&frame.k(v));
        let dphi = r.mul_vec(frame.u.to_mat().mul_vec(v));
        Ok((dr, dphi))
    }

    /// Joint RK4 of `(R, φ)` along the segment `a → b`.
    fn segment(&self, a: &Point3, b: &Point3, state: FrameState) -> Result<FrameState> {
        let (pa, pb) = (a.to_array(), b.to_array());
        let v: [f64; 3] = std::array::from_fn(|i| pb[i] - pa[i]);
        let len = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if len == 0.0 {
            return Ok(state);
        }
        let n = steps_for(len);
        let h = 1.0 / n as f64;
        let at = |s: f64| Point3::from_array(std::array::from_fn(|i| pa[i] + s * v[i]));
        let FrameState { mut r, mut phi } = state;
        for k in 0..n {
            let s = k as f64 * h;
            let (r1, p1) = self.rhs(&at(s), v, &r)?;
            let rm = r.add(&r1.scale(0.5 * h));
            let (r2, p2) = self.rhs(&at(s + 0.5 * h), v, &rm)?;
            let rm = r.add(&r2.scale(0.5 * h));
            let (r3, p3) = self.rhs(&at(s + 0.5 * h), v, &rm)?;
            let re = r.add(&r3.scale(h));
            let (r4, p4) = self.rhs(&at(s + h), v, &re)?;
            let incr = r1.add(&r2.scale(2.0)).add(&r3.scale(2.0)).add(&r4);
            r = polar_project(&r.add(&incr.scale(h / 6.0)))?;
            phi = std::array::from_fn(|i| {
                phi[i] + h / 6.0 * (p1[i] + 2.0 * p2[i] + 2.0 * p3[i] + p4[i])
            });
        }
        Ok(FrameState { r, phi })
    }

    /// States at `targets` along coordinate `axis` from `start`, marching
    /// outward in both directions through the sorted targets.
    fn sweep(
        &self,
        start: &Point3,
        state: FrameState,
        axis: usize,
        targets: &[f64],
    ) -> Result<Vec<FrameState>> {
        let origin = start.to_array()[axis];
        let mut out = vec![state; targets.len()];
        let mut order: Vec<usize> = (0..targets.len()).collect();
        order.sort_by(|&i, &j| targets[i].total_cmp(&targets[j]));
        let (below, above): (Vec<usize>, Vec<usize>) =
            order.into_iter().partition(|&i| targets[i] < origin);
        for side in [above, below.into_iter().rev().collect()] {
            let mut cur = *start;
            let mut st = state;
            for i in side {
                let mut next = cur.to_array();
                next[axis] = targets[i];
                let next = Point3::from_array(next);
                st = self.segment(&cur, &next, st)?;
                cur = next;
                out[i] = st;
            }
        }
        Ok(out)
    }

    /// Staircase X, then Y, then Z from `base` to `p`.
    fn staircase(&self, base: &Point3, state: FrameState, p: &Point3) -> Result<FrameState> {
        let a = Point3 { x: p.x, ..*base };
        let b = Point3 { y: p.y, ..a };
        let s = self.segment(base, &a, state)?;
        let s = self.segment(&a, &b, s)?;
        self.segment(&b, p, s)
    }
}

fn check_flat_on_grid<M: MetricField>(metric: &M, domain: &Domain) -> Result<()> {
    let nodes = domain.nodes();
    let worst = nodes
        .par_iter()
        .map(|p| Ok((ricci_from_jet(&metric_jet(metric, p)?).max_abs(), *p)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold((0.0_f64, Point3::origin()), |acc, x| {
            if x.0 > acc.0 || x.0.is_nan() {
                x
            } else {
                acc
            }
        });
    if !(worst.0 <= FLATNESS_GATE) {
        let p = worst.1;
        return Err(Error::NotFlat {
            max_ricci: worst.0,
            x: p.x,
            y: p.y,
            z: p.z,
        });
    }
    Ok(())
}

fn check_points(domain: &Domain, per_axis: usize) -> Vec<Point3> {
    let n = per_axis.max(1);
    let frac = |k: usize| (k as f64 + 0.5) / n as f64;
    let mut out = Vec::new();
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                let t = [frac(i), frac(j), frac(k)];
                out.push(Point3::from_array(std::array::from_fn(|a| {
                    domain.lo(a) + t[a] * (domain.hi(a) - domain.lo(a))
                })));
            }
        }
    }
    out
}

pub fn reconstruct_map<M: MetricField>(
    metric: &M,
    domain: &Domain,
    base: &Point3,
    r0: &Mat3,
) -> Result<ReconstructionResult> {
    reconstruct_map_with(metric, domain, base, r0, &ReconstructionOptions::default())
}

/// Reconstructs `φ` on the grid with `φ(base) = base` and `R(base) = R0`.
pub fn reconstruct_map_with<M: MetricField>(
    metric: &M,
    domain: &Domain,
    base: &Point3,
    r0: &Mat3,
    opts: &ReconstructionOptions,
) -> Result<ReconstructionResult> {
    domain.check(base)?;
    check_rotation(r0)?;
    check_flat_on_grid(metric, domain)?;
    let ig = Integrator { metric };
    let start = FrameState {
        r: *r0,
        phi: base.to_array(),
    };
    let [nx, ny, nz] = domain.counts;
    let xs: Vec<f64> = (0..nx).map(|i| domain.coord(0, i)).collect();
    let ys: Vec<f64> = (0..ny).map(|j| domain.coord(1, j)).collect();
    let zs: Vec<f64> = (0..nz).map(|k| domain.coord(2, k)).collect();

    let row = ig.sweep(base, start, 0, &xs)?;
    let plane: Vec<Vec<FrameState>> = (0..nx)
        .into_par_iter()
        .map(|i| ig.sweep(&Point3 { x: xs[i], ..*base }, row[i], 1, &ys))
        .collect::<Result<_>>()?;
    let columns: Vec<Vec<FrameState>> = (0..nx * ny)
        .into_par_iter()
        .map(|c| {
            let (i, j) = (c % nx, c / nx);
            ig.sweep(
                &Point3 {
                    x: xs[i],
                    y: ys[j],
                    z: base.z,
                },
                plane[i][j],
                2,
                &zs,
            )
        })
        .collect::<Result<_>>()?;

    let nodes = domain.nodes();
    let states: Vec<FrameState> = (0..nodes.len())
        .map(|idx| {
            let [i, j, k] = domain.ijk(idx);
            columns[i + nx * j][k]
        })
        .collect();

    let compatibility_defect = nodes
        .par_iter()
        .zip(&states)
        .map(|(p, st)| {
            let frame = StretchFrame::at(metric, p)?;
            let grad: [Mat3; 3] = frame.gradient_of_stretch().map(|g| st.r.mul(&g));
            let mut worst = 0.0_f64;
            for b in 0..3 {
                for a in 0..3 {
                    for row in 0..3 {
                        worst = worst.max((grad[b].m[row][a] - grad[a].m[row][b]).abs());
                    }
                }
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);

    let checks = check_points(domain, opts.check_per_axis);
    let d = opts.fd_step;
    let per_check: Vec<(f64, f64)> = checks
        .par_iter()
        .map(|p| {
            let here = ig.staircase(base, start, p)?;
            let mut f = Mat3::zero();
            for axis in 0..3 {
                let shifted = |t: f64| -> Result<[f64; 3]> {
                    let mut q = p.to_array();
                    q[axis] += t;
                    Ok(ig.staircase(base, start, &Point3::from_array(q))?.phi)
                };
                let (p1, m1, p2, m2) = (
                    shifted(d)?,
                    shifted(-d)?,
                    shifted(2.0 * d)?,
                    shifted(-2.0 * d)?,
                );
                for a in 0..3 {
                    f.m[a][axis] = (8.0 * (p1[a] - m1[a]) - (p2[a] - m2[a])) / (12.0 * d);
                }
            }
            let c = metric_jet(metric, p)?.c;
            let metric_defect = f.gram().max_abs_diff(&c);
            let chord = ig.segment(base, p, start)?;
            let dphi = (0..3)
                .map(|a| (chord.phi[a] - here.phi[a]).abs())
                .fold(0.0, f64::max);
            let path_defect = dphi.max(chord.r.max_abs_diff(&here.r));
            Ok((metric_defect, path_defect))
        })
        .collect::<Result<_>>()?;
    let metric_defect = per_check.iter().map(|x| x.0).fold(0.0, f64::max);
    let path_independence_defect = per_check.iter().map(|x| x.1).fold(0.0, f64::max);

    let samples = nodes
        .iter()
        .zip(&states)
        .map(|(p, s)| MapSample {
            point: p.to_array(),
            phi: s.phi,
            rotation: s.r.m,
        })
        .collect();
    Ok(ReconstructionResult {
        base: base.to_array(),
        samples,
        compatibility_defect,
        metric_defect,
        path_independence_defect,
        check_points: checks.iter().map(|p| p.to_array()).collect(),
    })
}


/// Max distance between the reconstructed samples and a known map `ψ` with
/// the same strain, after the isometry `x ↦ Q(x − ψ(base)) + base` with
/// `Q = R0 R_ψ(base)ᵀ` that matches frames at the base point.
pub fn closed_form_defect<D: DeformationMap>(
    result: &ReconstructionResult,
    map: &D,
    r0: &Mat3,
) -> Result<f64> {
    let base = Point3::from_array(result.base);
    let f = deformation_gradient(map, &base)?;
    let u = spd_sqrt(&f.gram())?;
    let q = r0.mul(&f.mul(&u.u_inv.to_mat()).transpose());
    let psi0 = map.map::<f64>(result.base);
    let mut worst = 0.0_f64;
    for s in &result.samples {
        let psi = map.map::<f64>(s.point);
        let moved = q.mul_vec(std::array::from_fn(|a| psi[a] - psi0[a]));
        for a in 0..3 {
            worst = worst.max((s.phi[a] - moved[a] - result.base[a]).abs());
        }
    }
    Ok(worst)
}
