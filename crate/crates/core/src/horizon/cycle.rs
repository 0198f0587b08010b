//! Limit cycles of a zero-energy field located through the return map of a
//! fixed ray.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{DetectionMethod, HorizonError, HorizonKind, HorizonRecord, Orientation};
use crate::flow::{integrate, integrate_to_angle, section_crossings, Direction, FlowError, IntegrationOptions, Termination};
use crate::metric::{delta, zero_energy_field, Branch, Chart, InverseMetricField, SpatialPoint};
use crate::numeric::{aitken, richardson_derivative};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CycleOptions {
    /// Options for the approach run from the seed.
    pub search: IntegrationOptions,
    /// Options for single revolutions of the return map.
    pub map: IntegrationOptions,
    pub step_tol: f64,
    pub residual_tol: f64,
    pub max_iterations: usize,
    /// A run ending where `|Δ|` is below this approaches an ergosphere, not a cycle.
    pub boundary_delta: f64,
    pub trace_polyline: bool,
    /// Section ray; the seed's angle when absent.
    pub ray: Option<f64>,
}

impl Default for CycleOptions {
    fn default() -> Self {
        Self {
            search: IntegrationOptions { max_time: 400.0, max_steps: 400_000, ..Default::default() },
            map: IntegrationOptions {
                rel_tol: 1e-12,
                abs_tol: 1e-13,
                max_time: 1e4,
                max_steps: 200_000,
                stagnation_window: 200_000,
                max_step: 0.1,
                ..Default::default()
            },
            step_tol: 1e-10,
            residual_tol: 1e-9,
            max_iterations: 60,
            boundary_delta: 1e-7,
            trace_polyline: true,
            ray: None,
        }
    }
}

/// One revolution of the section map: starting at `(r, ray)`, the radius at
/// which the flow next reaches `ray ± 2π`. `None` when the flow leaves first.
pub fn return_map<F: InverseMetricField + ?Sized>(
    field: &F,
    branch: Branch,
    direction: Direction,
    r: f64,
    ray: f64,
    opts: &IntegrationOptions,
) -> Result<Option<f64>, HorizonError> {
    Ok(revolution(field, branch, direction, r, ray, opts)?.map(|(p, _)| p))
}

fn revolution<F: InverseMetricField + ?Sized>(
    field: &F,
    branch: Branch,
    direction: Direction,
    r: f64,
    ray: f64,
    opts: &IntegrationOptions,
) -> Result<Option<(f64, Vec<[f64; 2]>)>, HorizonError> {
    let x0 = SpatialPoint::polar(r, ray);
    let Ok(v) = zero_energy_field(field, x0, branch) else {
        return Ok(None);
    };
    let turn = (direction.sign() * v[1]).signum();
    if turn == 0.0 {
        return Ok(None);
    }
    match integrate_to_angle(field, branch, x0, direction, opts, ray + turn * TAU) {
        Ok((traj, Some(p))) => Ok(Some((p.x1, traj.samples.iter().map(|s| s.point.as_array()).collect()))),
        Ok((_, None)) | Err(FlowError::StartOutsideErgoregion { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Searches for a cycle in both time directions, forward first.
pub fn detect_limit_cycle<F: InverseMetricField + ?Sized>(
    field: &F,
    branch: Branch,
    seed: SpatialPoint,
    opts: &CycleOptions,
) -> Result<Option<HorizonRecord>, HorizonError> {
    let fwd = detect_limit_cycle_directed(field, branch, seed, Direction::Forward, opts);
    if let Ok(Some(rec)) = fwd {
        return Ok(Some(rec));
    }
    let bwd = detect_limit_cycle_directed(field, branch, seed, Direction::Backward, opts);
    match (fwd, bwd) {
        (Ok(Some(rec)), _) | (_, Ok(Some(rec))) => Ok(Some(rec)),
        (Ok(None), Ok(None)) => Ok(None),
        (Err(e), _) | (_, Err(e)) => Err(e),
    }
}

pub fn detect_limit_cycle_directed<F: InverseMetricField + ?Sized>(
    field: &F,
    branch: Branch,
    seed: SpatialPoint,
    direction: Direction,
    opts: &CycleOptions,
) -> Result<Option<HorizonRecord>, HorizonError> {
    if field.chart() != Chart::Polar {
        return Err(FlowError::NotPolarChart.into());
    }
    let ray = opts.ray.unwrap_or(seed.x2);
    let traj = integrate(field, branch, seed, direction, &opts.search)?;
    let limit = match &traj.termination {
        Termination::ExitedErgoregion { .. } | Termination::LeftDomain { .. } => return Ok(None),
        Termination::StepFailure { .. } => {
            return Err(HorizonError::Inconclusive(format!("seed ({}, {}): {}", seed.x1, seed.x2, traj.termination)))
        }
        Termination::Stagnated { limit_estimate } => Some(*limit_estimate),
        Termination::TimeBudget => None,
    };
    let last = traj.last_point().unwrap_or(seed);
    if let Ok(g) = field.eval(last) {
        if delta(&g) > -opts.boundary_delta {
            return Ok(None);
        }
    }
    let radii = section_crossings(&traj, ray)?.radii;
    let n = radii.len();
    let r0 = if n >= 3 {
        aitken(radii[n - 3], radii[n - 2], radii[n - 1])
            .filter(|r| (r - radii[n - 1]).abs() < 10.0 * (radii[n - 1] - radii[n - 2]).abs().max(1e-12))
            .unwrap_or(radii[n - 1])
    } else if n >= 1 {
        radii[n - 1]
    } else if let Some(p) = limit {
        p.x1
    } else {
        return Err(HorizonError::Inconclusive(format!(
            "seed ({}, {}) {}: no section crossings within the search budget",
            seed.x1, seed.x2, direction
        )));
    };

    let d = |r: f64| -> Option<f64> {
        return_map(field, branch, direction, r, ray, &opts.map).ok().flatten().map(|p| p - r)
    };
    let Some((r_star, multiplicity, residual)) = refine_fixed_point(&d, r0, opts) else {
        return Err(HorizonError::Inconclusive(format!(
            "seed ({}, {}) {}: return map did not converge near r = {r0}",
            seed.x1, seed.x2, direction
        )));
    };
    Ok(Some(cycle_record(field, branch, r_star, ray, multiplicity, residual, opts)?))
}

/// Secant iteration on `d(r) = P(r) − r`, with a derivative-root polish
/// when the fixed point turns out to be a tangency.
fn refine_fixed_point(d: &dyn Fn(f64) -> Option<f64>, r0: f64, opts: &CycleOptions) -> Option<(f64, u32, f64)> {
    let mut ra = r0;
    let mut da = d(ra)?;
    let mut rb = ra + da;
    let mut db = match d(rb) {
        Some(v) => v,
        None => {
            rb = ra + 0.5 * da;
            d(rb)?
        }
    };
    let mut converged = da == 0.0;
    if converged {
        rb = ra;
        db = da;
    }
    let mut best = if da.abs() <= db.abs() { (ra, da) } else { (rb, db) };
    for _ in 0..opts.max_iterations {
        if converged || ((rb - ra).abs() < opts.step_tol && db.abs() < opts.residual_tol) {
            converged = true;
            break;
        }
        let den = db - da;
        if den == 0.0 {
            break;
        }
        let mut step = -db * (rb - ra) / den;
        // near a tangency da ≈ db and the secant step blows up
        let bound = 0.05 * rb.abs().max(1.0);
        if !(step.abs() <= bound) {
            step = db;
        }
        let mut next = None;
        for _ in 0..30 {
            if let Some(v) = d(rb + step) {
                next = Some((rb + step, v));
                break;
            }
            step *= 0.5;
        }
        let Some((rc, dc)) = next else { break };
        ra = rb;
        da = db;
        rb = rc;
        db = dc;
        if db.abs() < best.1.abs() {
            best = (rb, db);
        }
    }
    if converged {
        best = (rb, db);
    }
    let (r_star, d_star) = best;

    let delta = 1e-4 * r_star.abs().max(1.0);
    let (dl, dr) = (d(r_star - delta)?, d(r_star + delta)?);
    if dl.signum() != dr.signum() {
        return converged.then_some((r_star, 1, d_star.abs()));
    }
    // tangency: the extremum of d sits at the double root
    let slope = |r: f64| {
        let mut h = 2e-4 * r.abs().max(1.0);
        for _ in 0..4 {
            if d(r - h).is_some() && d(r + h).is_some() {
                return Some(richardson_derivative(|x| d(x).unwrap_or(f64::NAN), r, h));
            }
            h *= 0.1;
        }
        None
    };
    let (mut xa, mut xb) = (r_star, r_star + 0.1 * delta);
    let (mut ga, mut gb) = (slope(xa)?, slope(xb)?);
    for _ in 0..30 {
        if gb == ga || (xb - xa).abs() < 1e-13 {
            break;
        }
        let xc = xb - gb * (xb - xa) / (gb - ga);
        xa = xb;
        ga = gb;
        xb = xc;
        gb = slope(xb)?;
    }
    let res = d(xb)?.abs();
    (res < opts.residual_tol).then_some((xb, 2, res))
}

fn cycle_record<F: InverseMetricField + ?Sized>(
    field: &F,
    branch: Branch,
    r: f64,
    ray: f64,
    multiplicity: u32,
    residual: f64,
    opts: &CycleOptions,
) -> Result<HorizonRecord, HorizonError> {
    let x = SpatialPoint::polar(r, ray);
    let v = zero_energy_field(field, x, branch)?;
    let u = zero_energy_field(field, x, branch.other())?;
    // outward normal of the cycle in the orthonormal polar frame
    let (vp, up) = ([v[0], r * v[1]], [u[0], r * u[1]]);
    let s = if vp[1] >= 0.0 { 1.0 } else { -1.0 };
    let normal = [s * vp[1], -s * vp[0]];
    let across = normal[0] * up[0] + normal[1] * up[1];
    let polyline = if opts.trace_polyline { trace_cycle(field, branch, r, ray, opts)? } else { None };
    Ok(HorizonRecord {
        radius: r,
        polyline,
        branch,
        orientation: if v[1] >= 0.0 { Orientation::Ccw } else { Orientation::Cw },
        kind: if across < 0.0 { HorizonKind::Black } else { HorizonKind::White },
        multiplicity,
        residual,
        angular_speed: v[1],
        method: DetectionMethod::ReturnMap,
    })
}

/// One forward period of the cycle through `(r, ray)`.
pub(crate) fn trace_cycle<F: InverseMetricField + ?Sized>(
    field: &F,
    branch: Branch,
    r: f64,
    ray: f64,
    opts: &CycleOptions,
) -> Result<Option<Vec<[f64; 2]>>, HorizonError> {
    Ok(revolution(field, branch, Direction::Forward, r, ray, &opts.map)?.map(|(_, pts)| pts))
}
