//! Per-family horizon census of an annular ergoregion.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::boundary::boundary_behavior;
use super::{
    detect_limit_cycle_directed, find_ergospheres, find_radial_horizons, resolve_boundary_curves, BoundaryBehavior,
    BoundaryId, BoundaryReport, CensusDiagnostics, CensusReport, CycleOptions, ErgoregionAnnulus, HorizonError,
    HorizonRecord,
};
use crate::flow::Direction;
use crate::metric::{Branch, Chart, InverseMetricField, PolarView, SpatialPoint};
use crate::presets::RadialClosedForm;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CensusOptions {
    pub seeds_radial: usize,
    pub seeds_angular: usize,
    /// Cycles on the same ray closer than this are one horizon.
    pub dedup_tol: f64,
    /// Centre of the rays used to trace boundary curves of Cartesian fields.
    pub center: [f64; 2],
    /// Inner radius of the polar view wrapped around Cartesian fields.
    pub polar_rho_min: f64,
    pub boundary_angles: usize,
    pub scan_points: usize,
    pub cycle: CycleOptions,
}

impl Default for CensusOptions {
    fn default() -> Self {
        Self {
            seeds_radial: 8,
            seeds_angular: 8,
            dedup_tol: 1e-6,
            center: [0.0, 0.0],
            polar_rho_min: 1e-3,
            boundary_angles: 256,
            scan_points: 2000,
            cycle: CycleOptions::default(),
        }
    }
}

/// Full census. With a closed form, ergospheres and horizons come from the
/// radial speeds; otherwise from boundary tracing and return maps on a seed
/// grid (Cartesian fields are viewed in polar coordinates about `center`).
pub fn census<F: InverseMetricField + ?Sized>(
    field: &F,
    cf: Option<&dyn RadialClosedForm>,
    opts: &CensusOptions,
) -> Result<CensusReport, HorizonError> {
    if let Some(cf) = cf {
        if field.chart() != Chart::Polar {
            return Err(HorizonError::Precondition("closed forms describe polar-chart fields".into()));
        }
        let annulus = find_ergospheres(cf, cf.domain())?;
        let boundary = boundary_behavior(field, Some(cf), &annulus)?;
        let horizons_plus = find_radial_horizons(cf, Branch::Plus, &annulus)?;
        let horizons_minus = find_radial_horizons(cf, Branch::Minus, &annulus)?;
        let max_residual = horizons_plus.iter().chain(&horizons_minus).fold(0.0f64, |m, h| m.max(h.residual));
        let report = CensusReport {
            annulus,
            horizons_plus,
            horizons_minus,
            boundary_behavior: boundary,
            diagnostics: CensusDiagnostics { method: "closed_form".into(), max_residual, ..Default::default() },
        };
        check_existence(&report)?;
        return Ok(report);
    }
    match field.chart() {
        Chart::Polar => census_polar(field, opts),
        Chart::Cartesian => {
            let view = PolarView::fitted(field, opts.center, opts.polar_rho_min);
            let mut report = census_polar(&view, opts)?;
            let to_cart = |p: &[f64; 2]| view.to_cartesian(SpatialPoint::from_array(*p)).as_array();
            if let ErgoregionAnnulus::Curves { center, inner, outer } = &mut report.annulus {
                *center = opts.center;
                inner.iter_mut().for_each(|p| *p = to_cart(p));
                outer.iter_mut().for_each(|p| *p = to_cart(p));
            }
            for h in report.horizons_plus.iter_mut().chain(report.horizons_minus.iter_mut()) {
                if let Some(pl) = &mut h.polyline {
                    pl.iter_mut().for_each(|p| *p = to_cart(p));
                }
            }
            Ok(report)
        }
    }
}

/// Census of a polar-chart field without a closed form.
pub fn census_polar<F: InverseMetricField + ?Sized>(field: &F, opts: &CensusOptions) -> Result<CensusReport, HorizonError> {
    let annulus = resolve_boundary_curves(field, [0.0, 0.0], opts.boundary_angles, opts.scan_points)?;
    let boundary = boundary_behavior(field, None, &annulus)?;
    let (horizons_plus, horizons_minus, diagnostics) = cycle_census(field, &annulus, opts)?;
    let report = CensusReport { annulus, horizons_plus, horizons_minus, boundary_behavior: boundary, diagnostics };
    check_existence(&report)?;
    Ok(report)
}

/// Limit cycles of both families from a seed grid spanning a known annulus
/// of a polar-chart field, deduplicated on the ray φ = 0. Returns the (+)
/// and (−) horizons sorted by radius.
pub fn cycle_census<F: InverseMetricField + ?Sized>(
    field: &F,
    annulus: &ErgoregionAnnulus,
    opts: &CensusOptions,
) -> Result<(Vec<HorizonRecord>, Vec<HorizonRecord>, CensusDiagnostics), HorizonError> {
    if field.chart() != Chart::Polar {
        return Err(HorizonError::Precondition("cycle census needs a polar-chart field".into()));
    }
    let mut seeds = Vec::new();
    for j in 0..opts.seeds_angular {
        let (lo, hi, phi) = match annulus {
            ErgoregionAnnulus::Radial { rho_minus, rho_plus } => {
                (*rho_minus, *rho_plus, std::f64::consts::TAU * j as f64 / opts.seeds_angular as f64)
            }
            ErgoregionAnnulus::Curves { inner, outer, .. } => {
                let k = j * inner.len() / opts.seeds_angular.max(1);
                (inner[k][0], outer[k][0], inner[k][1])
            }
        };
        for i in 0..opts.seeds_radial {
            let frac = (i as f64 + 0.5) / opts.seeds_radial as f64;
            seeds.push(SpatialPoint::polar(lo + frac * (hi - lo), phi));
        }
    }
    let cycle_opts = CycleOptions { ray: Some(0.0), trace_polyline: false, ..opts.cycle };
    let tasks: Vec<(SpatialPoint, Branch, Direction)> = seeds
        .iter()
        .flat_map(|&s| {
            Branch::BOTH
                .into_iter()
                .flat_map(move |b| [Direction::Forward, Direction::Backward].map(move |d| (s, b, d)))
        })
        .collect();
    let results: Vec<_> = tasks
        .par_iter()
        .map(|&(seed, branch, dir)| detect_limit_cycle_directed(field, branch, seed, dir, &cycle_opts))
        .collect();

    let mut diag = CensusDiagnostics {
        method: "return_map".into(),
        seeds: seeds.len(),
        trajectories: tasks.len(),
        ..Default::default()
    };
    let mut found: Vec<HorizonRecord> = Vec::new();
    for (task, res) in tasks.iter().zip(results) {
        match res {
            Ok(Some(rec)) => found.push(rec),
            Ok(None) => diag.exits += 1,
            Err(HorizonError::Inconclusive(msg)) => {
                diag.inconclusive += 1;
                diag.messages.push(msg);
            }
            Err(e) => {
                diag.inconclusive += 1;
                diag.messages.push(format!("seed ({}, {}) {} {}: {e}", task.0.x1, task.0.x2, task.1, task.2));
            }
        }
    }
    diag.cycles_before_dedup = found.len();
    found.sort_by(|a, b| a.branch.cmp(&b.branch).then(a.radius.total_cmp(&b.radius)));
    let mut merged: Vec<HorizonRecord> = Vec::new();
    for rec in found {
        match merged.last_mut() {
            Some(last) if last.branch == rec.branch && (last.radius - rec.radius).abs() < opts.dedup_tol => {
                if rec.residual < last.residual {
                    *last = rec;
                }
            }
            _ => merged.push(rec),
        }
    }
    if opts.cycle.trace_polyline {
        let trace = CycleOptions { trace_polyline: true, ..cycle_opts };
        for rec in &mut merged {
            rec.polyline = super::cycle::trace_cycle(field, rec.branch, rec.radius, 0.0, &trace)?;
        }
    }
    diag.max_residual = merged.iter().fold(0.0f64, |m, h| m.max(h.residual));
    let (plus, minus): (Vec<_>, Vec<_>) = merged.into_iter().partition(|h| h.branch == Branch::Plus);
    Ok((plus, minus, diag))
}

/// A family entering the ergoregion through both ergospheres forces at
/// least one horizon in each family; a census violating this is wrong.
fn check_existence(report: &CensusReport) -> Result<(), HorizonError> {
    let b: &BoundaryReport = &report.boundary_behavior;
    for branch in Branch::BOTH {
        let starts_both = BoundaryId::BOTH.iter().all(|&w| b.behavior(w, branch) == BoundaryBehavior::FamilyStarts);
        if starts_both && (report.horizons_plus.is_empty() || report.horizons_minus.is_empty()) {
            return Err(HorizonError::ConsistencyFailure(format!(
                "the {branch} family starts on both ergospheres but the census found {} (+) and {} (-) horizons",
                report.horizons_plus.len(),
                report.horizons_minus.len()
            )));
        }
    }
    Ok(())
}
