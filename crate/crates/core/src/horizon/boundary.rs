//! Ergosphere geometry for general fields: boundary curves, characteristic
//! classification, boundary behavior of each family and the transit check
//! for characteristic ergospheres.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{
    BoundaryBehavior, BoundaryId, BoundaryReport, BranchBehavior, ErgoregionAnnulus, ErgosphereClass, HorizonError,
};
use crate::flow::{integrate, Direction, IntegrationOptions, Termination};
use crate::metric::{delta, zero_energy_field, Branch, Chart, Domain, InverseMetricField, SpatialPoint};
use crate::numeric::{bisect, linspace, sign_change_indices};
use crate::presets::RadialClosedForm;

pub const BOUNDARY_SAMPLES: usize = 256;
const CHARACTERISTIC_TOL: f64 = 1e-8;
const TRANSVERSAL_TOL: f64 = 1e-4;

fn ray_point(chart: Chart, center: [f64; 2], s: f64, theta: f64) -> SpatialPoint {
    match chart {
        Chart::Polar => SpatialPoint::polar(s, theta),
        Chart::Cartesian => SpatialPoint::new(center[0] + s * theta.cos(), center[1] + s * theta.sin()),
    }
}

/// Ray parameter range `(s_min, s_max)` that stays inside the domain.
fn ray_range(domain: Domain, center: [f64; 2], theta: f64) -> (f64, f64) {
    match domain {
        Domain::Annulus { rho_min, rho_max } => (rho_min, rho_max),
        Domain::Rectangle { x_min, x_max, y_min, y_max } => {
            let (s, c) = theta.sin_cos();
            let mut t = f64::INFINITY;
            if c > 0.0 {
                t = t.min((x_max - center[0]) / c);
            } else if c < 0.0 {
                t = t.min((x_min - center[0]) / c);
            }
            if s > 0.0 {
                t = t.min((y_max - center[1]) / s);
            } else if s < 0.0 {
                t = t.min((y_min - center[1]) / s);
            }
            (1e-9 * t, t * (1.0 - 1e-12))
        }
    }
}

/// Traces both ergospheres along `n_angles` rays from `center` (rays of
/// constant φ in a polar chart). Each ray must cross `Δ = 0` exactly twice.
pub fn resolve_boundary_curves<F: InverseMetricField + ?Sized>(
    field: &F,
    center: [f64; 2],
    n_angles: usize,
    scan_points: usize,
) -> Result<ErgoregionAnnulus, HorizonError> {
    let chart = field.chart();
    let domain = field.domain();
    let mut inner = Vec::with_capacity(n_angles);
    let mut outer = Vec::with_capacity(n_angles);
    for k in 0..n_angles {
        let theta = TAU * k as f64 / n_angles as f64;
        let (s0, s1) = ray_range(domain, center, theta);
        let dv = |s: f64| field.eval(ray_point(chart, center, s, theta)).map(|g| delta(&g)).unwrap_or(f64::NAN);
        let grid = linspace(s0, s1, scan_points);
        let vals: Vec<f64> = grid.iter().map(|&s| dv(s)).collect();
        let idx = sign_change_indices(&vals);
        let refine = |i: usize| {
            bisect(dv, grid[i], grid[i + 1], 1e-14 * grid[i + 1].abs().max(1.0))
                .ok_or(HorizonError::WrongRootCount { found: idx.len() })
        };
        let roots = match idx.as_slice() {
            &[i, j] => [refine(i)?, refine(j)?],
            // the inner ergosphere may be a singular domain edge where Δ < 0
            &[j] => {
                let first = vals.iter().position(|v| v.is_finite());
                match first {
                    Some(f) if vals[f] < 0.0 && field.ergosphere_at_edge(ray_point(chart, center, grid[f], theta)) => {
                        [grid[f], refine(j)?]
                    }
                    _ => return Err(HorizonError::WrongRootCount { found: 1 }),
                }
            }
            _ => return Err(HorizonError::WrongRootCount { found: idx.len() }),
        };
        inner.push(ray_point(chart, center, roots[0], theta).as_array());
        outer.push(ray_point(chart, center, roots[1], theta).as_array());
    }
    Ok(ErgoregionAnnulus::Curves { center, inner, outer })
}

/// Boundary sample points (in the field's chart) and, for each, whether the
/// outward normal is known to be radial.
fn boundary_points(annulus: &ErgoregionAnnulus, which: BoundaryId, n: usize) -> (Vec<SpatialPoint>, bool) {
    match annulus {
        ErgoregionAnnulus::Radial { rho_minus, rho_plus } => {
            let rho = match which {
                BoundaryId::Inner => *rho_minus,
                BoundaryId::Outer => *rho_plus,
            };
            ((0..n).map(|k| SpatialPoint::polar(rho, TAU * k as f64 / n as f64)).collect(), true)
        }
        ErgoregionAnnulus::Curves { inner, outer, .. } => {
            let c = match which {
                BoundaryId::Inner => inner,
                BoundaryId::Outer => outer,
            };
            (c.iter().map(|p| SpatialPoint::from_array(*p)).collect(), false)
        }
    }
}

fn grad_delta<F: InverseMetricField + ?Sized>(field: &F, p: SpatialPoint) -> Option<[f64; 2]> {
    let mut g = [0.0; 2];
    for i in 0..2 {
        let mut a = p.as_array();
        let mut b = p.as_array();
        let h = 1e-6 * a[i].abs().max(1.0);
        a[i] += h;
        b[i] -= h;
        let da = delta(&field.eval(SpatialPoint::from_array(a)).ok()?);
        let db = delta(&field.eval(SpatialPoint::from_array(b)).ok()?);
        g[i] = (da - db) / (2.0 * h);
    }
    Some(g)
}

/// `|n·w| / (|n| |w|)` in the orthonormal frame of the chart.
fn normalized_normal_component(chart: Chart, p: SpatialPoint, n: [f64; 2], w: [f64; 2]) -> f64 {
    let (nn, ww) = match chart {
        Chart::Polar => (n[0].hypot(n[1] / p.x1), w[0].hypot(p.x1 * w[1])),
        Chart::Cartesian => (n[0].hypot(n[1]), w[0].hypot(w[1])),
    };
    (n[0] * w[0] + n[1] * w[1]).abs() / (nn * ww)
}

/// Moves a boundary point a small distance into the ergoregion.
fn inward(annulus: &ErgoregionAnnulus, chart: Chart, which: BoundaryId, p: SpatialPoint, frac: f64) -> SpatialPoint {
    let sign = match which {
        BoundaryId::Inner => 1.0,
        BoundaryId::Outer => -1.0,
    };
    match (annulus, chart) {
        (ErgoregionAnnulus::Radial { rho_minus, rho_plus }, _) => {
            SpatialPoint::polar(p.x1 + sign * frac * (rho_plus - rho_minus), p.x2)
        }
        (ErgoregionAnnulus::Curves { .. }, Chart::Polar) => {
            let w = annulus_width(annulus);
            SpatialPoint::polar(p.x1 + sign * frac * w, p.x2)
        }
        (ErgoregionAnnulus::Curves { center, .. }, Chart::Cartesian) => {
            let w = annulus_width(annulus);
            let d = [p.x1 - center[0], p.x2 - center[1]];
            let r = d[0].hypot(d[1]);
            SpatialPoint::new(p.x1 + sign * frac * w * d[0] / r, p.x2 + sign * frac * w * d[1] / r)
        }
    }
}

fn annulus_width(annulus: &ErgoregionAnnulus) -> f64 {
    match annulus {
        ErgoregionAnnulus::Radial { rho_minus, rho_plus } => rho_plus - rho_minus,
        ErgoregionAnnulus::Curves { inner, outer, .. } => inner
            .iter()
            .zip(outer)
            .map(|(a, b)| (a[0] - b[0]).hypot(a[1] - b[1]))
            .fold(f64::INFINITY, f64::min),
    }
}

/// Characteristic when the degenerate direction of the merged field is
/// tangent to the ergosphere at every sample, transversal when it is
/// uniformly transverse. Where the field cannot be evaluated on the
/// boundary itself (a singular domain edge) both families are sampled
/// just inside instead.
pub fn classify_ergosphere<F: InverseMetricField + ?Sized>(
    field: &F,
    annulus: &ErgoregionAnnulus,
    which: BoundaryId,
) -> Result<ErgosphereClass, HorizonError> {
    let chart = field.chart();
    let (points, radial) = boundary_points(annulus, which, BOUNDARY_SAMPLES);
    let (mut n_char, mut n_trans) = (0, 0);
    for &p in &points {
        let normal = if radial { Some([1.0, 0.0]) } else { grad_delta(field, p) };
        let comp = match (field.eval(p), normal) {
            (Ok(g), Some(n)) if delta(&g).abs() <= 1e-6 * (g.g11.abs() + g.g12.abs() + g.g22.abs()) => {
                normalized_normal_component(chart, p, n, g.degenerate_direction())
            }
            _ => {
                let q = inward(annulus, chart, which, p, 1e-6);
                let n = normal.or_else(|| grad_delta(field, q)).ok_or_else(|| {
                    HorizonError::Precondition(format!("cannot resolve the ergosphere normal at ({}, {})", p.x1, p.x2))
                })?;
                Branch::BOTH
                    .iter()
                    .map(|&b| zero_energy_field(field, q, b).map(|w| normalized_normal_component(chart, q, n, w)))
                    .collect::<Result<Vec<_>, _>>()?
                    .into_iter()
                    .fold(f64::INFINITY, f64::min)
            }
        };
        if comp < CHARACTERISTIC_TOL {
            n_char += 1;
        } else if comp > TRANSVERSAL_TOL {
            n_trans += 1;
        }
    }
    if n_char == points.len() {
        Ok(ErgosphereClass::Characteristic)
    } else if n_trans == points.len() {
        Ok(ErgosphereClass::Transversal)
    } else {
        Err(HorizonError::MixedCharacter { characteristic: n_char, samples: points.len() })
    }
}

/// Classifies both ergospheres and, for each family, whether it starts or
/// ends there as t increases, from the sign of its velocity along the
/// inward normal just inside the ergoregion.
pub fn boundary_behavior<F: InverseMetricField + ?Sized>(
    field: &F,
    cf: Option<&dyn RadialClosedForm>,
    annulus: &ErgoregionAnnulus,
) -> Result<BoundaryReport, HorizonError> {
    let inner_class = classify_ergosphere(field, annulus, BoundaryId::Inner)?;
    let outer_class = classify_ergosphere(field, annulus, BoundaryId::Outer)?;
    let mut per = [[BoundaryBehavior::Characteristic; 2]; 2];
    for (bi, (which, class)) in [(BoundaryId::Inner, inner_class), (BoundaryId::Outer, outer_class)].into_iter().enumerate() {
        if class == ErgosphereClass::Characteristic {
            continue;
        }
        for (ki, branch) in Branch::BOTH.into_iter().enumerate() {
            per[bi][ki] = family_behavior(field, cf, annulus, which, branch)?;
        }
    }
    let pack = |row: [BoundaryBehavior; 2]| BranchBehavior { plus: row[0], minus: row[1] };
    Ok(BoundaryReport { inner_class, outer_class, inner: pack(per[0]), outer: pack(per[1]) })
}

fn family_behavior<F: InverseMetricField + ?Sized>(
    field: &F,
    cf: Option<&dyn RadialClosedForm>,
    annulus: &ErgoregionAnnulus,
    which: BoundaryId,
    branch: Branch,
) -> Result<BoundaryBehavior, HorizonError> {
    const FRAC: f64 = 1e-6;
    let inward_sign = match which {
        BoundaryId::Inner => 1.0,
        BoundaryId::Outer => -1.0,
    };
    let classify = |into: f64| if into > 0.0 { BoundaryBehavior::FamilyStarts } else { BoundaryBehavior::FamilyEnds };
    if let (Some(cf), ErgoregionAnnulus::Radial { rho_minus, rho_plus }) = (cf, annulus) {
        let rho = match which {
            BoundaryId::Inner => rho_minus + FRAC * (rho_plus - rho_minus),
            BoundaryId::Outer => rho_plus - FRAC * (rho_plus - rho_minus),
        };
        return Ok(classify(inward_sign * cf.rho_speed(branch, rho)));
    }
    let chart = field.chart();
    let (points, radial) = boundary_points(annulus, which, 64);
    let mut verdict: Option<BoundaryBehavior> = None;
    for p in points {
        let q = inward(annulus, chart, which, p, FRAC);
        let v = zero_energy_field(field, q, branch)?;
        let into = if radial {
            inward_sign * v[0]
        } else {
            // the Δ gradient oriented away from the ergosphere (Δ need not
            // vanish there when the ergosphere is a singular edge)
            let n = grad_delta(field, q)
                .ok_or_else(|| HorizonError::Precondition(format!("no Δ gradient at ({}, {})", q.x1, q.x2)))?;
            let shift = [q.x1 - p.x1, q.x2 - p.x2];
            let orient = (n[0] * shift[0] + n[1] * shift[1]).signum();
            orient * (n[0] * v[0] + n[1] * v[1])
        };
        let b = classify(into);
        match verdict {
            None => verdict = Some(b),
            Some(prev) if prev != b => {
                return Err(HorizonError::ConsistencyFailure(format!(
                    "{branch} family changes boundary behavior along the {which:?} ergosphere"
                )))
            }
            _ => {}
        }
    }
    verdict.ok_or_else(|| HorizonError::Precondition("empty boundary curve".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyTransit {
    pub branch: Branch,
    /// Ergosphere approached as t → −∞, when all seeds agree.
    pub from: Option<BoundaryId>,
    /// Ergosphere approached as t → +∞, when all seeds agree.
    pub to: Option<BoundaryId>,
    /// The level function is monotone along every forward run.
    pub monotone: bool,
    /// Every run in both directions ends by stagnation or at an ergosphere.
    pub asymptotic_ends: bool,
    pub seeds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitReport {
    pub families: Vec<FamilyTransit>,
    /// The two families cross the ergoregion in opposite directions.
    pub opposite_transit: bool,
}

/// Seeds both families between two characteristic ergospheres and records
/// which ergosphere each run leaves and approaches. `level` is the
/// coordinate whose monotonicity is checked (distance from the centre
/// when absent).
pub fn characteristic_transit_check<F: InverseMetricField + ?Sized>(
    field: &F,
    annulus: &ErgoregionAnnulus,
    level: Option<&dyn Fn(SpatialPoint) -> f64>,
    opts: &IntegrationOptions,
) -> Result<TransitReport, HorizonError> {
    for which in BoundaryId::BOTH {
        if classify_ergosphere(field, annulus, which)? != ErgosphereClass::Characteristic {
            return Err(HorizonError::Precondition(format!("the {which:?} ergosphere is not characteristic")));
        }
    }
    let chart = field.chart();
    let (inner, _) = boundary_points(annulus, BoundaryId::Inner, BOUNDARY_SAMPLES);
    let (outer, _) = boundary_points(annulus, BoundaryId::Outer, BOUNDARY_SAMPLES);
    let center = match annulus {
        ErgoregionAnnulus::Curves { center, .. } => *center,
        ErgoregionAnnulus::Radial { .. } => [0.0, 0.0],
    };
    let default_level = |p: SpatialPoint| match chart {
        Chart::Polar => p.x1,
        Chart::Cartesian => (p.x1 - center[0]).hypot(p.x2 - center[1]),
    };
    let level = |p: SpatialPoint| level.map_or_else(|| default_level(p), |f| f(p));
    // nearest boundary by level at the closest sampled angle
    let nearest = |p: SpatialPoint| -> BoundaryId {
        let k = inner
            .iter()
            .zip(&outer)
            .enumerate()
            .min_by(|a, b| {
                let da = dist(chart, p, *a.1 .0).min(dist(chart, p, *a.1 .1));
                let db = dist(chart, p, *b.1 .0).min(dist(chart, p, *b.1 .1));
                da.total_cmp(&db)
            })
            .map_or(0, |(k, _)| k);
        let l = level(p);
        if (l - level(inner[k])).abs() <= (l - level(outer[k])).abs() {
            BoundaryId::Inner
        } else {
            BoundaryId::Outer
        }
    };

    let step = inner.len() / 8;
    let mut families = Vec::new();
    for branch in Branch::BOTH {
        let (mut from, mut to): (Vec<BoundaryId>, Vec<BoundaryId>) = (Vec::new(), Vec::new());
        let (mut monotone, mut asymptotic) = (true, true);
        let mut seeds = 0;
        for k in (0..inner.len()).step_by(step.max(1)) {
            for frac in [0.25, 0.5, 0.75] {
                let a = inner[k];
                let b = outer[k];
                let seed = SpatialPoint::new(a.x1 + frac * (b.x1 - a.x1), a.x2 + frac * (b.x2 - a.x2));
                seeds += 1;
                for dir in [Direction::Forward, Direction::Backward] {
                    let tr = integrate(field, branch, seed, dir, opts)?;
                    let end = tr.last_point().unwrap_or(seed);
                    asymptotic &= matches!(
                        tr.termination,
                        Termination::Stagnated { .. } | Termination::ExitedErgoregion { .. }
                    );
                    let target = nearest(end);
                    if dir == Direction::Forward {
                        to.push(target);
                        let lv: Vec<f64> = tr.samples.iter().map(|s| level(s.point)).collect();
                        let up = lv.windows(2).all(|w| w[1] >= w[0] - 1e-12);
                        let down = lv.windows(2).all(|w| w[1] <= w[0] + 1e-12);
                        monotone &= up || down;
                    } else {
                        from.push(target);
                    }
                }
            }
        }
        let agree = |v: &[BoundaryId]| v.first().copied().filter(|f| v.iter().all(|x| x == f));
        families.push(FamilyTransit { branch, from: agree(&from), to: agree(&to), monotone, asymptotic_ends: asymptotic, seeds });
    }
    let (p, m) = (&families[0], &families[1]);
    let opposite_transit = p.from.is_some()
        && p.to.is_some()
        && p.from != p.to
        && m.from == p.to
        && m.to == p.from
        && families.iter().all(|f| f.monotone && f.asymptotic_ends);
    Ok(TransitReport { families, opposite_transit })
}

fn dist(chart: Chart, a: SpatialPoint, b: SpatialPoint) -> f64 {
    match chart {
        Chart::Polar => {
            let pa = a.polar_to_cartesian();
            let pb = b.polar_to_cartesian();
            (pa[0] - pb[0]).hypot(pa[1] - pb[1])
        }
        Chart::Cartesian => (a.x1 - b.x1).hypot(a.x2 - b.x2),
    }
}
