//! Chart-level metric algebra.
//!
//! Everything downstream consumes a stationary metric through its inverse
//! components `g^{ij}(x)`, `0 <= i, j <= 2`, evaluated pointwise in a fixed
//! chart. From a single [`InverseMetricSample`] this module computes the
//! ergoregion discriminant `Δ = g¹¹g²² − (g¹²)²`, the two real solutions of
//! the zero-energy characteristic quadratic and the zero-energy null
//! velocity fields `X±`, normalized so that `dx⁰/dt = 1`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default half-width of the boundary band `|Δ| <= ε` in Δ units.
pub const DEFAULT_BOUNDARY_EPS: f64 = 1e-9;

/// Smallest admissible `|g^{0j} ξ_j|` for a unit covector.
pub const MIN_TIME_DENOMINATOR: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("point ({0}, {1}) lies outside the field domain")]
    OutOfDomain(f64, f64),
    #[error("domain violation: {0}")]
    DomainViolation(String),
    #[error("invalid inverse-metric sample: {0}")]
    InvalidSample(String),
    #[error("point lies on the ergosphere (delta = {delta:e}); the characteristic roots coincide")]
    BoundaryPoint { delta: f64 },
    #[error("point lies outside the ergoregion (delta = {delta:e})")]
    OutsideErgoregion { delta: f64 },
    #[error("time component of the generating covector vanishes (|g^0j xi_j| = {magnitude:e})")]
    VanishingDenominator { magnitude: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid medium: {0}")]
    InvalidMedium(String),
}

/// The two zero-energy families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Plus, Branch::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn other(self) -> Branch {
        match self {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Plus => "plus",
            Branch::Minus => "minus",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Branch {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plus" | "+" => Ok(Branch::Plus),
            "minus" | "-" => Ok(Branch::Minus),
            other => Err(format!("unknown branch '{other}' (expected plus or minus)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chart {
    Cartesian,
    Polar,
}

/// A point in the spatial chart. In the polar chart `x1 = ρ` and `x2 = φ`,
/// with φ kept unwrapped so winding can be counted.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SpatialPoint {
    pub x1: f64,
    pub x2: f64,
}

impl SpatialPoint {
    pub const fn new(x1: f64, x2: f64) -> Self {
        Self { x1, x2 }
    }

    pub const fn polar(rho: f64, phi: f64) -> Self {
        Self { x1: rho, x2: phi }
    }

    pub fn rho(&self) -> f64 {
        self.x1
    }

    pub fn phi(&self) -> f64 {
        self.x2
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.x1, self.x2]
    }

    pub fn from_array(a: [f64; 2]) -> Self {
        Self { x1: a[0], x2: a[1] }
    }

    /// Cartesian position of a polar point.
    pub fn polar_to_cartesian(&self) -> [f64; 2] {
        [self.x1 * self.x2.cos(), self.x1 * self.x2.sin()]
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_angle(phi: f64) -> f64 {
    let w = phi.rem_euclid(2.0 * PI);
    if w >= 2.0 * PI {
        0.0
    } else {
        w
    }
}

/// Zero-energy covector `(τ, ξ₁, ξ₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Covector {
    pub tau: f64,
    pub xi1: f64,
    pub xi2: f64,
}

impl Covector {
    pub fn spatial(xi1: f64, xi2: f64) -> Self {
        Self { tau: 0.0, xi1, xi2 }
    }

    pub fn norm(&self) -> f64 {
        (self.tau * self.tau + self.xi1 * self.xi1 + self.xi2 * self.xi2).sqrt()
    }
}

/// Inverse-metric components `g^{ij}` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InverseMetricSample {
    pub g00: f64,
    pub g01: f64,
    pub g02: f64,
    pub g11: f64,
    pub g12: f64,
    pub g22: f64,
}

impl InverseMetricSample {
    pub fn validate(&self) -> Result<(), MetricError> {
        let all = [self.g00, self.g01, self.g02, self.g11, self.g12, self.g22];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(MetricError::InvalidSample(format!("non-finite component in {self:?}")));
        }
        if self.g00 <= 0.0 {
            return Err(MetricError::InvalidSample(format!(
                "g^00 = {} violates the time orientation g^00 > 0",
                self.g00
            )));
        }
        Ok(())
    }

    pub fn delta(&self) -> f64 {
        delta(self)
    }

    /// `Σ g^{ij} ξ_i ξ_j` over all three indices.
    pub fn symbol(&self, c: &Covector) -> f64 {
        let (t, a, b) = (c.tau, c.xi1, c.xi2);
        self.g00 * t * t
            + 2.0 * self.g01 * t * a
            + 2.0 * self.g02 * t * b
            + self.g11 * a * a
            + 2.0 * self.g12 * a * b
            + self.g22 * b * b
    }

    /// `Σ_j g^{ij} ξ_j` for `i = 0, 1, 2`.
    pub fn raise(&self, c: &Covector) -> [f64; 3] {
        [
            self.g00 * c.tau + self.g01 * c.xi1 + self.g02 * c.xi2,
            self.g01 * c.tau + self.g11 * c.xi1 + self.g12 * c.xi2,
            self.g02 * c.tau + self.g12 * c.xi1 + self.g22 * c.xi2,
        ]
    }

    /// Characteristic direction of the degenerate spatial symbol on `Δ = 0`.
    pub fn degenerate_direction(&self) -> [f64; 2] {
        let a = [self.g11, self.g12];
        let b = [self.g12, self.g22];
        if a[0].hypot(a[1]) >= b[0].hypot(b[1]) {
            a
        } else {
            b
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Domain {
    Annulus { rho_min: f64, rho_max: f64 },
    Rectangle { x_min: f64, x_max: f64, y_min: f64, y_max: f64 },
}

impl Domain {
    pub fn contains(&self, p: SpatialPoint) -> bool {
        self.edge_distance(p) >= 0.0
    }

    /// Signed distance (chart units) to the nearest domain edge; negative outside.
    pub fn edge_distance(&self, p: SpatialPoint) -> f64 {
        match *self {
            Domain::Annulus { rho_min, rho_max } => (p.x1 - rho_min).min(rho_max - p.x1),
            Domain::Rectangle { x_min, x_max, y_min, y_max } => (p.x1 - x_min)
                .min(x_max - p.x1)
                .min(p.x2 - y_min)
                .min(y_max - p.x2),
        }
    }

    /// Rate at which a velocity drives the point toward its nearest edges,
    /// returned as `(distance, closing speed)` pairs for every edge.
    pub(crate) fn edge_approaches(&self, p: SpatialPoint, v: [f64; 2]) -> Vec<(f64, f64)> {
        match *self {
            Domain::Annulus { rho_min, rho_max } => {
                vec![(p.x1 - rho_min, -v[0]), (rho_max - p.x1, v[0])]
            }
            Domain::Rectangle { x_min, x_max, y_min, y_max } => vec![
                (p.x1 - x_min, -v[0]),
                (x_max - p.x1, v[0]),
                (p.x2 - y_min, -v[1]),
                (y_max - p.x2, v[1]),
            ],
        }
    }
}

/// A stationary metric given through its inverse components in a fixed chart.
///
/// Implementations must be pure: the same point always yields the same
/// sample, and evaluation may happen from many threads at once.
pub trait InverseMetricField: Send + Sync {
    fn chart(&self) -> Chart;
    fn domain(&self) -> Domain;
    /// Components at `x`; errors outside the domain.
    fn eval(&self, x: SpatialPoint) -> Result<InverseMetricSample, MetricError>;
    /// Whether the domain edge nearest `x` is itself an ergosphere, reached
    /// through a coordinate singularity rather than through `Δ = 0`.
    fn ergosphere_at_edge(&self, _x: SpatialPoint) -> bool {
        false
    }
}

impl<T: InverseMetricField + ?Sized> InverseMetricField for &T {
    fn chart(&self) -> Chart {
        (**self).chart()
    }
    fn ergosphere_at_edge(&self, x: SpatialPoint) -> bool {
        (**self).ergosphere_at_edge(x)
    }
    fn domain(&self) -> Domain {
        (**self).domain()
    }
    fn eval(&self, x: SpatialPoint) -> Result<InverseMetricSample, MetricError> {
        (**self).eval(x)
    }
}

impl<T: InverseMetricField + ?Sized> InverseMetricField for Box<T> {
    fn chart(&self) -> Chart {
        (**self).chart()
    }
    fn ergosphere_at_edge(&self, x: SpatialPoint) -> bool {
        (**self).ergosphere_at_edge(x)
    }
    fn domain(&self) -> Domain {
        (**self).domain()
    }
    fn eval(&self, x: SpatialPoint) -> Result<InverseMetricSample, MetricError> {
        (**self).eval(x)
    }
}

impl<T: InverseMetricField + ?Sized> InverseMetricField for std::sync::Arc<T> {
    fn chart(&self) -> Chart {
        (**self).chart()
    }
    fn ergosphere_at_edge(&self, x: SpatialPoint) -> bool {
        (**self).ergosphere_at_edge(x)
    }
    fn domain(&self) -> Domain {
        (**self).domain()
    }
    fn eval(&self, x: SpatialPoint) -> Result<InverseMetricSample, MetricError> {
        (**self).eval(x)
    }
}

/// `Δ = g¹¹g²² − (g¹²)²`; negative exactly in the ergoregion.
pub fn delta(g: &InverseMetricSample) -> f64 {
    g.g11 * g.g22 - g.g12 * g.g12
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErgoStatus {
    Inside,
    Boundary,
    Outside,
}

pub fn classify_delta(delta: f64, eps: f64) -> ErgoStatus {
    if delta < -eps {
        ErgoStatus::Inside
    } else if delta.abs() <= eps {
        ErgoStatus::Boundary
    } else {
        ErgoStatus::Outside
    }
}

pub fn in_ergoregion<F: InverseMetricField + ?Sized>(
    field: &F,
    x: SpatialPoint,
) -> Result<ErgoStatus, MetricError> {
    in_ergoregion_with(field, x, DEFAULT_BOUNDARY_EPS)
}

pub fn in_ergoregion_with<F: InverseMetricField + ?Sized>(
    field: &F,
    x: SpatialPoint,
    eps: f64,
) -> Result<ErgoStatus, MetricError> {
    let g = field.eval(x)?;
    Ok(classify_delta(delta(&g), eps))
}

/// Unit null directions `[plus, minus]` of the spatial quadratic
/// `g¹¹ξ₁² + 2g¹²ξ₁ξ₂ + g²²ξ₂² = 0`, given `s = √(−Δ) >= 0`.
///
/// The plus root is the projective point `[−g¹² + s : g¹¹]`, which equals
/// `[g²² : −g¹² − s]`; of the two representations the one free of
/// cancellation (decided by the sign of g¹²) is used. This labeling is
/// continuous throughout a connected ergoregion, including where g¹¹ or
/// g²² vanish.
fn null_directions(g: &InverseMetricSample, s: f64) -> [[f64; 2]; 2] {
    let (g11, g12, g22) = (g.g11, g.g12, g.g22);
    let plus = if g12 >= 0.0 { [g22, -(g12 + s)] } else { [s - g12, g11] };
    let minus = if g12 <= 0.0 { [g22, s - g12] } else { [-(g12 + s), g11] };
    [unit(plus), unit(minus)]
}

fn unit(v: [f64; 2]) -> [f64; 2] {
    let n = v[0].hypot(v[1]);
    if n == 0.0 {
        v
    } else {
        [v[0] / n, v[1] / n]
    }
}

/// Scales a null direction so that ξ₂ equals `xi2`, or ξ₁ equals `xi2` when
/// ξ₂ must vanish.
fn normalize_covector(d: [f64; 2], xi2: f64) -> Covector {
    if d[1] != 0.0 {
        Covector::spatial(d[0] / d[1] * xi2, xi2)
    } else {
        Covector::spatial(xi2, 0.0)
    }
}

/// The two zero-energy null covectors `[plus, minus]` at a sample.
pub fn characteristic_roots(g: &InverseMetricSample, xi2: f64) -> Result<[Covector; 2], MetricError> {
    characteristic_roots_with(g, xi2, DEFAULT_BOUNDARY_EPS)
}

pub fn characteristic_roots_with(
    g: &InverseMetricSample,
    xi2: f64,
    eps: f64,
) -> Result<[Covector; 2], MetricError> {
    g.validate()?;
    let d = delta(g);
    match classify_delta(d, eps) {
        ErgoStatus::Inside => {}
        ErgoStatus::Boundary => return Err(MetricError::BoundaryPoint { delta: d }),
        ErgoStatus::Outside => return Err(MetricError::OutsideErgoregion { delta: d }),
    }
    let [p, m] = null_directions(g, (-d).sqrt());
    Ok([normalize_covector(p, xi2), normalize_covector(m, xi2)])
}

/// Velocity generated by a spatial covector at τ = 0, normalized so the
/// time component equals one.
pub fn velocity_from_covector(
    g: &InverseMetricSample,
    xi: [f64; 2],
) -> Result<[f64; 2], MetricError> {
    let den = g.g01 * xi[0] + g.g02 * xi[1];
    let scale = xi[0].hypot(xi[1]);
    if den.abs() < MIN_TIME_DENOMINATOR * scale {
        return Err(MetricError::VanishingDenominator { magnitude: den.abs() / scale });
    }
    Ok([
        (g.g11 * xi[0] + g.g12 * xi[1]) / den,
        (g.g12 * xi[0] + g.g22 * xi[1]) / den,
    ])
}

/// `X±` from one sample, requiring the point to be strictly inside.
pub fn velocity_from_sample(
    g: &InverseMetricSample,
    branch: Branch,
    eps: f64,
) -> Result<[f64; 2], MetricError> {
    g.validate()?;
    let d = delta(g);
    match classify_delta(d, eps) {
        ErgoStatus::Inside => {}
        ErgoStatus::Boundary => return Err(MetricError::BoundaryPoint { delta: d }),
        ErgoStatus::Outside => return Err(MetricError::OutsideErgoregion { delta: d }),
    }
    branch_velocity(g, branch, (-d).sqrt())
}

/// Like [`velocity_from_sample`] but accepts points in the boundary band,
/// where `√(−Δ)` is clamped to zero. Used for integrator stages.
pub(crate) fn relaxed_velocity(
    g: &InverseMetricSample,
    branch: Branch,
    eps: f64,
) -> Result<[f64; 2], MetricError> {
    g.validate()?;
    let d = delta(g);
    if d > eps {
        return Err(MetricError::OutsideErgoregion { delta: d });
    }
    branch_velocity(g, branch, (-d).max(0.0).sqrt())
}

fn branch_velocity(g: &InverseMetricSample, branch: Branch, s: f64) -> Result<[f64; 2], MetricError> {
    let dirs = null_directions(g, s);
    let xi = match branch {
        Branch::Plus => dirs[0],
        Branch::Minus => dirs[1],
    };
    velocity_from_covector(g, xi)
}

/// The zero-energy null velocity field `X±(x)` with `dx⁰/dt = 1`.
pub fn zero_energy_field<F: InverseMetricField + ?Sized>(
    field: &F,
    x: SpatialPoint,
    branch: Branch,
) -> Result<[f64; 2], MetricError> {
    zero_energy_field_with(field, x, branch, DEFAULT_BOUNDARY_EPS)
}

pub fn zero_energy_field_with<F: InverseMetricField + ?Sized>(
    field: &F,
    x: SpatialPoint,
    branch: Branch,
    eps: f64,
) -> Result<[f64; 2], MetricError> {
    let g = field.eval(x)?;
    velocity_from_sample(&g, branch, eps)
}

/// Null covector generating `X±` at a point, scaled to unit spatial norm.
pub fn generating_covector(g: &InverseMetricSample, branch: Branch) -> Result<Covector, MetricError> {
    let d = delta(g);
    if d > 0.0 {
        return Err(MetricError::OutsideErgoregion { delta: d });
    }
    let dirs = null_directions(g, (-d).sqrt());
    let xi = match branch {
        Branch::Plus => dirs[0],
        Branch::Minus => dirs[1],
    };
    Ok(Covector::spatial(xi[0], xi[1]))
}

/// Re-expresses a Cartesian-chart field in polar coordinates about `center`.
///
/// Inverse-metric components transform contravariantly with the Jacobian
/// `∂(ρ, φ)/∂(x, y)`, so Δ picks up the positive factor `1/ρ²` and the
/// ergoregion is unchanged.
#[derive(Debug, Clone)]
pub struct PolarView<F> {
    inner: F,
    center: [f64; 2],
    rho_min: f64,
    rho_max: f64,
}

impl<F: InverseMetricField> PolarView<F> {
    pub fn new(inner: F, center: [f64; 2], rho_min: f64, rho_max: f64) -> Self {
        Self { inner, center, rho_min, rho_max }
    }

    /// Largest origin-centred annulus that fits the inner field's domain.
    pub fn fitted(inner: F, center: [f64; 2], rho_min: f64) -> Self {
        let rho_max = match inner.domain() {
            Domain::Rectangle { x_min, x_max, y_min, y_max } => (center[0] - x_min)
                .min(x_max - center[0])
                .min(center[1] - y_min)
                .min(y_max - center[1]),
            Domain::Annulus { rho_max, .. } => rho_max,
        };
        Self::new(inner, center, rho_min, rho_max)
    }

    pub fn inner(&self) -> &F {
        &self.inner
    }

    pub fn center(&self) -> [f64; 2] {
        self.center
    }

    pub fn to_cartesian(&self, p: SpatialPoint) -> SpatialPoint {
        let (s, c) = p.x2.sin_cos();
        SpatialPoint::new(self.center[0] + p.x1 * c, self.center[1] + p.x1 * s)
    }

    pub fn to_polar(&self, p: SpatialPoint) -> SpatialPoint {
        let dx = p.x1 - self.center[0];
        let dy = p.x2 - self.center[1];
        SpatialPoint::polar(dx.hypot(dy), dy.atan2(dx))
    }
}

impl<F: InverseMetricField> InverseMetricField for PolarView<F> {
    fn chart(&self) -> Chart {
        Chart::Polar
    }

    fn domain(&self) -> Domain {
        Domain::Annulus { rho_min: self.rho_min, rho_max: self.rho_max }
    }

    fn eval(&self, x: SpatialPoint) -> Result<InverseMetricSample, MetricError> {
        let rho = x.x1;
        if !(rho >= self.rho_min && rho <= self.rho_max) {
            return Err(MetricError::OutOfDomain(x.x1, x.x2));
        }
        let g = self.inner.eval(self.to_cartesian(x))?;
        let (s, c) = x.x2.sin_cos();
        // rows of ∂(ρ, φ)/∂(x, y)
        let jr = [c, s];
        let jp = [-s / rho, c / rho];
        let m = [[g.g11, g.g12], [g.g12, g.g22]];
        let quad = |a: [f64; 2], b: [f64; 2]| {
            a[0] * (m[0][0] * b[0] + m[0][1] * b[1]) + a[1] * (m[1][0] * b[0] + m[1][1] * b[1])
        };
        Ok(InverseMetricSample {
            g00: g.g00,
            g01: jr[0] * g.g01 + jr[1] * g.g02,
            g02: jp[0] * g.g01 + jp[1] * g.g02,
            g11: quad(jr, jr),
            g12: quad(jr, jp),
            g22: quad(jp, jp),
        })
    }
}
