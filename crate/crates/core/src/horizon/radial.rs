//! Ergospheres and horizons of rotationally symmetric metrics from their
//! closed-form radial speeds.

use super::{DetectionMethod, ErgoregionAnnulus, HorizonError, HorizonKind, HorizonRecord, Orientation};
use crate::metric::Branch;
use crate::numeric::{bisect, brent, central_difference, linspace, sign_change_indices};
use crate::presets::RadialClosedForm;

const ERGO_SCAN_POINTS: usize = 100_000;

/// Brackets and bisects the two ergospheres inside `search`.
pub fn find_ergospheres<C: RadialClosedForm + ?Sized>(
    cf: &C,
    search: (f64, f64),
) -> Result<ErgoregionAnnulus, HorizonError> {
    let (lo, hi) = search;
    if !(lo < hi) {
        return Err(HorizonError::Precondition(format!("empty search interval ({lo}, {hi})")));
    }
    let grid = linspace(lo, hi, ERGO_SCAN_POINTS);
    let vals: Vec<f64> = grid.iter().map(|&r| cf.ergo_function(r)).collect();
    let mut roots: Vec<f64> = sign_change_indices(&vals)
        .into_iter()
        .filter_map(|i| bisect(|r| cf.ergo_function(r), grid[i], grid[i + 1], 1e-13))
        .collect();
    // exact zeros on grid points with a sign change across them
    for i in 1..grid.len() - 1 {
        if vals[i] == 0.0 && vals[i - 1] * vals[i + 1] < 0.0 {
            roots.push(grid[i]);
        }
    }
    roots.sort_by(f64::total_cmp);
    let singular_edge = cf.singular_inner_edge().filter(|&e| lo >= e && lo - e <= 1e-5 * e.max(1.0));
    let (rho_minus, rho_plus) = match (roots.as_slice(), singular_edge) {
        (&[a, b], _) => (a, b),
        (&[b], Some(e)) if vals.iter().find(|v| v.is_finite()).is_some_and(|&v| v > 0.0) => (e, b),
        _ => return Err(HorizonError::WrongRootCount { found: roots.len() }),
    };
    let mid = 0.5 * (rho_minus + rho_plus);
    if !(cf.ergo_function(mid) > 0.0) {
        return Err(HorizonError::WrongRootCount { found: roots.len() });
    }
    Ok(ErgoregionAnnulus::Radial { rho_minus, rho_plus })
}

/// Dense-scan root finder for the radial speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialScan {
    pub points: usize,
    /// `|dρ/dt|` below this fraction of the scan's speed scale counts as a root
    /// at a tangency.
    pub zero_tol: f64,
    /// Derivative threshold (relative to speed scale over annulus width) for
    /// a tangency.
    pub tangency_tol: f64,
}

impl Default for RadialScan {
    fn default() -> Self {
        Self { points: 4000, zero_tol: 1e-10, tangency_tol: 1e-6 }
    }
}

pub fn find_radial_horizons<C: RadialClosedForm + ?Sized>(
    cf: &C,
    branch: Branch,
    annulus: &ErgoregionAnnulus,
) -> Result<Vec<HorizonRecord>, HorizonError> {
    RadialScan::default().horizons(cf, branch, annulus)
}

impl RadialScan {
    pub fn horizons<C: RadialClosedForm + ?Sized>(
        &self,
        cf: &C,
        branch: Branch,
        annulus: &ErgoregionAnnulus,
    ) -> Result<Vec<HorizonRecord>, HorizonError> {
        let &ErgoregionAnnulus::Radial { rho_minus: lo, rho_plus: hi } = annulus else {
            return Err(HorizonError::Precondition("radial horizons need a radial annulus".into()));
        };
        let width = hi - lo;
        let margin = 1e-9 * width;
        let v = |r: f64| cf.rho_speed(branch, r);
        let grid = linspace(lo + margin, hi - margin, self.points);
        let vals: Vec<f64> = grid.iter().map(|&r| v(r)).collect();
        let scale = vals.iter().filter(|x| x.is_finite()).fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
        let h = 1e-5 * width;

        // (root, crosses)
        let mut roots: Vec<(f64, bool)> = Vec::new();
        for i in sign_change_indices(&vals) {
            if let Some(r) = brent(v, grid[i], grid[i + 1], 1e-15) {
                roots.push((r, true));
            }
        }
        for i in 1..grid.len() - 1 {
            let (a, b, c) = (vals[i - 1], vals[i], vals[i + 1]);
            if b == 0.0 && a * c < 0.0 {
                roots.push((grid[i], true));
                continue;
            }
            let same_side = a * b > 0.0 && b * c > 0.0;
            let local_min = b.abs() < a.abs() && b.abs() <= c.abs();
            if !(b == 0.0 || (same_side && local_min && b.abs() < 1e-3 * scale)) {
                continue;
            }
            // the extremum of v is where its derivative vanishes
            let dv = |r: f64| central_difference(v, r, h);
            let r = brent(dv, grid[i - 1], grid[i + 1], 1e-15).unwrap_or(grid[i]);
            if v(r).abs() <= self.zero_tol * scale.max(1.0) {
                roots.push((r, false));
            }
        }
        roots.sort_by(|a, b| a.0.total_cmp(&b.0));
        roots.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-9 * width.max(1.0));

        let other = branch.other();
        Ok(roots
            .into_iter()
            .map(|(r, crosses)| {
                let slope = central_difference(v, r, h);
                let tangent = slope.abs() * width < self.tangency_tol * scale;
                let multiplicity = match (crosses, tangent) {
                    (true, false) => 1,
                    (false, _) => 2,
                    (true, true) => 3,
                };
                let phi = cf.phi_speed(branch, r);
                let mut across = cf.rho_speed(other, r);
                if across == 0.0 {
                    across = cf.rho_speed(other, r - h) + cf.rho_speed(other, r + h);
                }
                HorizonRecord {
                    radius: r,
                    polyline: None,
                    branch,
                    orientation: if phi >= 0.0 { Orientation::Ccw } else { Orientation::Cw },
                    kind: if across < 0.0 { HorizonKind::Black } else { HorizonKind::White },
                    multiplicity,
                    residual: v(r).abs(),
                    angular_speed: phi,
                    method: DetectionMethod::ClosedForm,
                }
            })
            .collect())
    }
}
