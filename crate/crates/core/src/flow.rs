//! Integration of the zero-energy fields with boundary, domain-edge and
//! stagnation events, plus Poincaré-section and spiral-rate analysis.

use std::f64::consts::TAU;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::{
    delta, relaxed_velocity, Branch, Chart, ErgoStatus, InverseMetricField, MetricError, SpatialPoint,
    DEFAULT_BOUNDARY_EPS,
};
use crate::numeric::{bisect, linear_fit};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("start point ({x1}, {x2}) is not strictly inside the ergoregion (delta = {delta:e})")]
    StartOutsideErgoregion { x1: f64, x2: f64, delta: f64 },
    #[error("invalid integration options: {0}")]
    InvalidOptions(String),
    #[error("section crossings need a polar chart")]
    NotPolarChart,
    #[error("trajectory has too few samples ({0})")]
    TooFewSamples(usize),
    #[error("spiral rate needs a stagnated trajectory (termination: {0})")]
    NotStagnated(String),
    #[error("final radius {final_radius} is not within 1e-3 of the limit radius {limit}")]
    LimitMismatch { final_radius: f64, limit: f64 },
    #[error("insufficient approach data: {0} samples (need at least 100)")]
    InsufficientData(usize),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[default]
    #[serde(alias = "fwd")]
    Forward,
    #[serde(alias = "bwd")]
    Backward,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Forward => "fwd",
            Direction::Backward => "bwd",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "fwd" | "forward" => Ok(Direction::Forward),
            "bwd" | "backward" => Ok(Direction::Backward),
            other => Err(format!("unknown direction `{other}` (expected fwd or bwd)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegrationOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_time: f64,
    pub max_steps: usize,
    pub stagnation_window: usize,
    pub stagnation_eps: f64,
    /// Band `|Δ| <= boundary_eps` counted as the ergosphere.
    pub boundary_eps: f64,
    /// Distance to a domain edge counted as reaching it.
    pub edge_tol: f64,
    pub initial_step: f64,
    pub max_step: f64,
    /// Largest change of φ per step in polar charts.
    pub max_angle_step: f64,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_time: 1e6,
            max_steps: 2_000_000,
            stagnation_window: 50,
            stagnation_eps: 1e-11,
            boundary_eps: DEFAULT_BOUNDARY_EPS,
            edge_tol: 1e-10,
            initial_step: 1e-3,
            max_step: 1.0,
            max_angle_step: 0.2,
        }
    }
}

impl IntegrationOptions {
    pub fn validate(&self) -> Result<(), FlowError> {
        let positive = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("stagnation_eps", self.stagnation_eps),
            ("boundary_eps", self.boundary_eps),
            ("edge_tol", self.edge_tol),
            ("initial_step", self.initial_step),
            ("max_step", self.max_step),
            ("max_angle_step", self.max_angle_step),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(FlowError::InvalidOptions(format!("{name} must be positive and finite (got {v})")));
            }
        }
        if !(self.max_time >= 0.0) {
            return Err(FlowError::InvalidOptions(format!("max_time must be non-negative (got {})", self.max_time)));
        }
        if self.stagnation_window == 0 {
            return Err(FlowError::InvalidOptions("stagnation_window must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    /// Reached an ergosphere; `point` is the final boundary point.
    ExitedErgoregion { point: SpatialPoint },
    /// Reached an edge of the chart domain that is not an ergosphere.
    LeftDomain { point: SpatialPoint },
    /// Radial progress stalled; a horizon candidate.
    Stagnated { limit_estimate: SpatialPoint },
    /// `max_time` or `max_steps` exhausted.
    TimeBudget,
    /// The step size underflowed away from any boundary.
    StepFailure { point: SpatialPoint, reason: String },
}

impl Termination {
    pub fn label(&self) -> &'static str {
        match self {
            Termination::ExitedErgoregion { .. } => "exited_ergoregion",
            Termination::LeftDomain { .. } => "left_domain",
            Termination::Stagnated { .. } => "stagnated",
            Termination::TimeBudget => "time_budget",
            Termination::StepFailure { .. } => "step_failure",
        }
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Termination::ExitedErgoregion { point } | Termination::LeftDomain { point } => {
                write!(f, "{} at ({}, {})", self.label(), point.x1, point.x2)
            }
            Termination::Stagnated { limit_estimate: p } => write!(f, "stagnated near ({}, {})", p.x1, p.x2),
            Termination::TimeBudget => f.write_str("time_budget"),
            Termination::StepFailure { point, reason } => {
                write!(f, "step_failure at ({}, {}): {reason}", point.x1, point.x2)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub point: SpatialPoint,
    /// `dx/dt` of the integrated (direction-signed) flow.
    pub velocity: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub branch: Branch,
    pub direction: Direction,
    pub chart: Chart,
    pub samples: Vec<Sample>,
    pub termination: Termination,
    /// Total unwrapped change of φ (zero for Cartesian charts).
    pub winding: f64,
}

impl Trajectory {
    pub fn last_point(&self) -> Option<SpatialPoint> {
        self.samples.last().map(|s| s.point)
    }

    pub fn is_stagnated(&self) -> bool {
        matches!(self.termination, Termination::Stagnated { .. })
    }

    /// CSV with one row per accepted step and a trailing termination comment.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match self.chart {
            Chart::Polar => out.push_str("t,rho,phi_unwrapped\n"),
            Chart::Cartesian => out.push_str("t,x1,x2\n"),
        }
        for s in &self.samples {
            let _ = writeln!(out, "{},{},{}", s.t, s.point.x1, s.point.x2);
        }
        let _ = writeln!(out, "# termination: {}", self.termination);
        out
    }
}

// Dormand–Prince 5(4) tableau; the field is autonomous so the nodes are unused.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Direction-signed zero-energy field of one family.
pub(crate) struct FlowRhs<'a, F: ?Sized> {
    field: &'a F,
    branch: Branch,
    sign: f64,
    eps: f64,
}

impl<'a, F: InverseMetricField + ?Sized> FlowRhs<'a, F> {
    pub(crate) fn new(field: &'a F, branch: Branch, direction: Direction, eps: f64) -> Self {
        Self { field, branch, sign: direction.sign(), eps }
    }

    /// Velocity and Δ at `y`; accepts the boundary band.
    pub(crate) fn eval(&self, y: [f64; 2]) -> Result<([f64; 2], f64), MetricError> {
        let g = self.field.eval(SpatialPoint::from_array(y))?;
        let v = relaxed_velocity(&g, self.branch, self.eps)?;
        Ok(([self.sign * v[0], self.sign * v[1]], delta(&g)))
    }

    fn delta_at(&self, y: [f64; 2]) -> Option<f64> {
        self.field.eval(SpatialPoint::from_array(y)).ok().map(|g| delta(&g))
    }

    /// Central-difference gradient of Δ; `None` near domain edges.
    fn grad_delta(&self, y: [f64; 2]) -> Option<[f64; 2]> {
        let mut g = [0.0; 2];
        for i in 0..2 {
            let h = 1e-6 * y[i].abs().max(1.0);
            let mut yp = y;
            let mut ym = y;
            yp[i] += h;
            ym[i] -= h;
            g[i] = (self.delta_at(yp)? - self.delta_at(ym)?) / (2.0 * h);
        }
        Some(g)
    }
}

pub(crate) struct StepResult {
    pub y: [f64; 2],
    pub k_end: [f64; 2],
    pub delta: f64,
    pub err: f64,
}

pub(crate) fn dopri_step<F: InverseMetricField + ?Sized>(
    rhs: &FlowRhs<'_, F>,
    y: [f64; 2],
    k1: [f64; 2],
    h: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<StepResult, MetricError> {
    let mut k = [[0.0; 2]; 7];
    k[0] = k1;
    let mut end_delta = 0.0;
    for s in 1..7 {
        let mut ys = y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = A[s][j];
            if a != 0.0 {
                ys[0] += h * a * kj[0];
                ys[1] += h * a * kj[1];
            }
        }
        let (v, d) = rhs.eval(ys)?;
        k[s] = v;
        end_delta = d;
    }
    // stage 7 is evaluated at the fifth-order solution (FSAL)
    let mut y5 = y;
    for j in 0..6 {
        y5[0] += h * A[6][j] * k[j][0];
        y5[1] += h * A[6][j] * k[j][1];
    }
    let mut acc = 0.0;
    for i in 0..2 {
        let e: f64 = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
        let sc = abs_tol + rel_tol * y[i].abs().max(y5[i].abs());
        acc += (e / sc) * (e / sc);
    }
    Ok(StepResult { y: y5, k_end: k[6], delta: end_delta, err: (acc / 2.0).sqrt() })
}

fn step_factor(err: f64) -> f64 {
    if err == 0.0 {
        5.0
    } else {
        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
    }
}

/// Integrates one family from `x0` until an ergosphere, a domain edge,
/// stagnation or the budget ends the run.
pub fn integrate<F: InverseMetricField + ?Sized>(
    field: &F,
    branch: Branch,
    x0: SpatialPoint,
    direction: Direction,
    opts: &IntegrationOptions,
) -> Result<Trajectory, FlowError> {
    run(field, branch, x0, direction, opts, None).map(|(t, _)| t)
}

/// Integrates until the unwrapped angle reaches `target_phi`, landing on it
/// exactly. Returns the trajectory and, if the section was reached, the
/// final point.
pub(crate) fn integrate_to_angle<F: InverseMetricField + ?Sized>(
    field: &F,
    branch: Branch,
    x0: SpatialPoint,
    direction: Direction,
    opts: &IntegrationOptions,
    target_phi: f64,
) -> Result<(Trajectory, Option<SpatialPoint>), FlowError> {
    run(field, branch, x0, direction, opts, Some(target_phi))
}

fn run<F: InverseMetricField + ?Sized>(
    field: &F,
    branch: Branch,
    x0: SpatialPoint,
    direction: Direction,
    opts: &IntegrationOptions,
    target_phi: Option<f64>,
) -> Result<(Trajectory, Option<SpatialPoint>), FlowError> {
    opts.validate()?;
    let chart = field.chart();
    let g0 = field.eval(x0)?;
    let d0 = delta(&g0);
    if crate::metric::classify_delta(d0, opts.boundary_eps) != ErgoStatus::Inside {
        return Err(FlowError::StartOutsideErgoregion { x1: x0.x1, x2: x0.x2, delta: d0 });
    }
    let finish = |samples: Vec<Sample>, termination: Termination| {
        let winding = match (chart, samples.first(), samples.last()) {
            (Chart::Polar, Some(a), Some(b)) => b.point.x2 - a.point.x2,
            _ => 0.0,
        };
        Trajectory { branch, direction, chart, samples, termination, winding }
    };
    if opts.max_time == 0.0 {
        return Ok((finish(Vec::new(), Termination::TimeBudget), None));
    }

    let rhs = FlowRhs::new(field, branch, direction, opts.boundary_eps);
    let domain = field.domain();
    let sign = direction.sign();
    let (mut k1, mut d) = rhs.eval(x0.as_array())?;
    let mut y = x0.as_array();
    let mut t = 0.0;
    let mut h = opts.initial_step.min(opts.max_step);
    let mut samples = vec![Sample { t: 0.0, point: x0, velocity: k1 }];
    let mut window: std::collections::VecDeque<(f64, [f64; 2])> = Default::default();
    let mut steps = 0usize;
    let mut attempts = 0usize;

    loop {
        if steps >= opts.max_steps || attempts >= 20 * opts.max_steps.max(1000) || t >= opts.max_time {
            return Ok((finish(samples, Termination::TimeBudget), None));
        }
        attempts += 1;
        let mut cap = opts.max_step.min(opts.max_time - t);
        if let Some(gd) = rhs.grad_delta(y) {
            let rate = gd[0] * k1[0] + gd[1] * k1[1];
            if rate > 0.0 {
                cap = cap.min(0.5 * (-d) / rate);
            }
        }
        for (dist, closing) in domain.edge_approaches(SpatialPoint::from_array(y), k1) {
            if closing > 0.0 {
                cap = cap.min(0.5 * dist.max(0.0) / closing);
            }
        }
        if chart == Chart::Polar && k1[1] != 0.0 {
            cap = cap.min(opts.max_angle_step / k1[1].abs());
        }
        h = h.min(cap);
        let h_min = 1e-14 * t.abs().max(1.0);
        if !(h >= h_min) {
            let point = SpatialPoint::from_array(y);
            return Ok((
                finish(
                    samples,
                    Termination::StepFailure { point, reason: format!("step size underflow (h = {h:e}, delta = {d:e})") },
                ),
                None,
            ));
        }

        let step = match dopri_step(&rhs, y, k1, h, opts.rel_tol, opts.abs_tol) {
            Ok(s) => s,
            Err(_) => {
                h *= 0.25;
                continue;
            }
        };
        let y_new_point = SpatialPoint::from_array(step.y);
        if step.delta > opts.boundary_eps || !domain.contains(y_new_point) {
            h *= 0.5;
            continue;
        }
        if step.err > 1.0 {
            h *= step_factor(step.err);
            continue;
        }

        if let Some(target) = target_phi {
            let before = y[1] - target;
            let after = step.y[1] - target;
            if before != 0.0 && (after == 0.0 || before.signum() != after.signum()) {
                // land exactly on the section by solving φ(y(h*)) = target
                let land = |hh: f64| {
                    dopri_step(&rhs, y, k1, hh, opts.rel_tol, opts.abs_tol).map(|s| s.y[1] - target).unwrap_or(f64::NAN)
                };
                if let Some(hs) = bisect(land, 0.0, h, 1e-15 * h.max(1e-300)) {
                    if let Ok(s) = dopri_step(&rhs, y, k1, hs, opts.rel_tol, opts.abs_tol) {
                        let p = SpatialPoint::new(s.y[0], target);
                        t += hs;
                        samples.push(Sample { t: sign * t, point: p, velocity: s.k_end });
                        return Ok((finish(samples, Termination::TimeBudget), Some(p)));
                    }
                }
            }
        }

        let progress = match chart {
            Chart::Polar => (step.y[0] - y[0]).abs(),
            Chart::Cartesian => (step.y[0] - y[0]).hypot(step.y[1] - y[1]),
        };
        t += h;
        y = step.y;
        k1 = step.k_end;
        d = step.delta;
        steps += 1;
        samples.push(Sample { t: sign * t, point: y_new_point, velocity: k1 });

        if d.abs() <= opts.boundary_eps {
            return Ok((finish(samples, Termination::ExitedErgoregion { point: y_new_point }), None));
        }
        if domain.edge_distance(y_new_point) <= opts.edge_tol {
            let termination = if field.ergosphere_at_edge(y_new_point) {
                Termination::ExitedErgoregion { point: y_new_point }
            } else {
                Termination::LeftDomain { point: y_new_point }
            };
            return Ok((finish(samples, termination), None));
        }

        window.push_back((progress, y));
        if window.len() > opts.stagnation_window {
            window.pop_front();
        }
        if window.len() == opts.stagnation_window && window.iter().all(|(p, _)| *p < opts.stagnation_eps) {
            let n = window.len() as f64;
            let limit_estimate = match chart {
                Chart::Polar => SpatialPoint::polar(window.iter().map(|(_, q)| q[0]).sum::<f64>() / n, y[1]),
                Chart::Cartesian => SpatialPoint::new(
                    window.iter().map(|(_, q)| q[0]).sum::<f64>() / n,
                    window.iter().map(|(_, q)| q[1]).sum::<f64>() / n,
                ),
            };
            return Ok((finish(samples, Termination::Stagnated { limit_estimate }), None));
        }

        h *= step_factor(step.err);
    }
}

/// Fixed-step fifth-order integration without events, used for order checks.
pub fn integrate_fixed<F: InverseMetricField + ?Sized>(
    field: &F,
    branch: Branch,
    x0: SpatialPoint,
    h: f64,
    n_steps: usize,
) -> Result<SpatialPoint, FlowError> {
    let rhs = FlowRhs::new(field, branch, Direction::Forward, DEFAULT_BOUNDARY_EPS);
    let mut y = x0.as_array();
    let (mut k1, _) = rhs.eval(y)?;
    for _ in 0..n_steps {
        let s = dopri_step(&rhs, y, k1, h, 1.0, 1.0)?;
        y = s.y;
        k1 = s.k_end;
    }
    Ok(SpatialPoint::from_array(y))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrossingDirection {
    Outward,
    Inward,
}

/// Crossings of the ray `φ ≡ ray_angle (mod 2π)` in trajectory order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionCrossings {
    pub ray_angle: f64,
    pub radii: Vec<f64>,
    pub times: Vec<f64>,
    /// Sign of `dρ/dt` at each crossing.
    pub directions: Vec<CrossingDirection>,
}

/// Cubic Hermite interpolant between two samples, `s ∈ [0, 1]`.
fn hermite(a: &Sample, b: &Sample, s: f64) -> [f64; 2] {
    let dt = (b.t - a.t).abs();
    let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    let h10 = s * (1.0 - s) * (1.0 - s);
    let h01 = s * s * (3.0 - 2.0 * s);
    let h11 = s * s * (s - 1.0);
    let pa = a.point.as_array();
    let pb = b.point.as_array();
    let mut out = [0.0; 2];
    for i in 0..2 {
        out[i] = h00 * pa[i] + h10 * dt * a.velocity[i] + h01 * pb[i] + h11 * dt * b.velocity[i];
    }
    out
}

pub fn section_crossings(traj: &Trajectory, ray_angle: f64) -> Result<SectionCrossings, FlowError> {
    if traj.chart != Chart::Polar {
        return Err(FlowError::NotPolarChart);
    }
    if traj.samples.len() < 2 {
        return Err(FlowError::TooFewSamples(traj.samples.len()));
    }
    let mut out = SectionCrossings { ray_angle, radii: Vec::new(), times: Vec::new(), directions: Vec::new() };
    for w in traj.samples.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let (lo, hi) = if a.point.x2 <= b.point.x2 { (a.point.x2, b.point.x2) } else { (b.point.x2, a.point.x2) };
        // every branch of the ray strictly after `a` and up to `b`
        let k_lo = ((lo - ray_angle) / TAU).floor() as i64;
        let k_hi = ((hi - ray_angle) / TAU).ceil() as i64;
        let mut hits: Vec<f64> = Vec::new();
        for k in k_lo..=k_hi {
            let target = ray_angle + TAU * k as f64;
            let fa = a.point.x2 - target;
            let fb = b.point.x2 - target;
            if fa == 0.0 || (fa.signum() == fb.signum() && fb != 0.0) {
                continue;
            }
            let s = if fb == 0.0 {
                1.0
            } else {
                bisect(|s| hermite(a, b, s)[1] - target, 0.0, 1.0, 1e-13).unwrap_or(0.5)
            };
            hits.push(s);
        }
        hits.sort_by(f64::total_cmp);
        for s in hits {
            let p = hermite(a, b, s);
            out.radii.push(p[0]);
            out.times.push(a.t + s * (b.t - a.t));
            let vr = (1.0 - s) * a.velocity[0] + s * b.velocity[0];
            out.directions.push(if vr >= 0.0 { CrossingDirection::Outward } else { CrossingDirection::Inward });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum SpiralRate {
    /// `|ρ − ρ₁| ~ e^{rate·t}`.
    Exponential { rate: f64, r_squared: f64 },
    /// `|ρ − ρ₁| ~ t^{exponent}`.
    Power { exponent: f64, r_squared: f64 },
    Undetermined { exponential_r_squared: f64, power_r_squared: f64 },
}

const APPROACH_BAND: f64 = 1e-3;
const APPROACH_FLOOR: f64 = 1e-9;
const MIN_APPROACH_SAMPLES: usize = 100;

/// Classifies how a stagnated trajectory approaches the circle
/// `ρ = limit_radius` by fitting the final 60% of the approach.
pub fn spiral_rate(traj: &Trajectory, limit_radius: f64) -> Result<SpiralRate, FlowError> {
    let Termination::Stagnated { .. } = traj.termination else {
        return Err(FlowError::NotStagnated(traj.termination.label().into()));
    };
    let last = traj.last_point().ok_or(FlowError::TooFewSamples(0))?;
    if (last.x1 - limit_radius).abs() >= APPROACH_BAND {
        return Err(FlowError::LimitMismatch { final_radius: last.x1, limit: limit_radius });
    }
    let t0 = traj.samples[0].t;
    // the approach is the maximal tail staying inside the band
    let start = traj
        .samples
        .iter()
        .rposition(|s| (s.point.x1 - limit_radius).abs() >= APPROACH_BAND)
        .map_or(0, |i| i + 1);
    let approach: Vec<(f64, f64)> = traj.samples[start..]
        .iter()
        .map(|s| ((s.t - t0).abs(), (s.point.x1 - limit_radius).abs()))
        .filter(|&(tau, x)| x > APPROACH_FLOOR && tau > 0.0)
        .collect();
    if approach.len() < MIN_APPROACH_SAMPLES {
        return Err(FlowError::InsufficientData(approach.len()));
    }
    let tau_end = approach[approach.len() - 1].0;
    let tau_begin = tau_end - 0.6 * (tau_end - approach[0].0);
    const N: usize = 400;
    let mut taus = Vec::with_capacity(N + 1);
    let mut logs = Vec::with_capacity(N + 1);
    let mut j = 0;
    for i in 0..=N {
        let tau = tau_begin + (tau_end - tau_begin) * i as f64 / N as f64;
        while j + 2 < approach.len() && approach[j + 1].0 < tau {
            j += 1;
        }
        let (ta, xa) = approach[j];
        let (tb, xb) = approach[j + 1];
        let w = if tb > ta { ((tau - ta) / (tb - ta)).clamp(0.0, 1.0) } else { 0.0 };
        taus.push(tau);
        logs.push(((1.0 - w) * xa.ln() + w * xb.ln()).max(f64::MIN));
    }
    let log_taus: Vec<f64> = taus.iter().map(|t| t.ln()).collect();
    let exp_fit = linear_fit(&taus, &logs);
    let pow_fit = linear_fit(&log_taus, &logs);
    let (er, pr) = (exp_fit.map_or(0.0, |f| f.r_squared), pow_fit.map_or(0.0, |f| f.r_squared));
    if er.max(pr) < 0.99 {
        return Ok(SpiralRate::Undetermined { exponential_r_squared: er, power_r_squared: pr });
    }
    Ok(match (exp_fit, pow_fit) {
        (Some(e), _) if er >= pr => SpiralRate::Exponential { rate: e.slope, r_squared: er },
        (_, Some(p)) => SpiralRate::Power { exponent: p.slope, r_squared: pr },
        _ => SpiralRate::Undetermined { exponential_r_squared: er, power_r_squared: pr },
    })
}
