//! Acoustic metrics `H = (τ + Aξ_ρ + Bξ_φ/ρ)² − ξ_ρ² − (ξ_φ/ρ)²`.

use std::sync::Arc;

use super::profile::RadialProfile;
use super::RadialClosedForm;
use crate::metric::{Branch, Chart, Domain, InverseMetricField, InverseMetricSample, MetricError, SpatialPoint};

/// Relative size below which a closed-form denominator is considered
/// vanishing and the rationalized expression takes over.
pub const RATIONALIZE_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct AcousticField {
    profile: Arc<RadialProfile>,
}

impl AcousticField {
    pub fn profile(&self) -> &RadialProfile {
        &self.profile
    }
}

impl InverseMetricField for AcousticField {
    fn chart(&self) -> Chart {
        Chart::Polar
    }

    fn domain(&self) -> Domain {
        Domain::Annulus { rho_min: self.profile.rho_lo, rho_max: self.profile.rho_hi }
    }

    fn eval(&self, x: SpatialPoint) -> Result<InverseMetricSample, MetricError> {
        let rho = x.rho();
        if !(rho >= self.profile.rho_lo && rho <= self.profile.rho_hi) {
            return Err(MetricError::OutOfDomain(x.x1, x.x2));
        }
        let a = self.profile.a(rho);
        let b = self.profile.b(rho);
        Ok(InverseMetricSample {
            g00: 1.0,
            g01: a,
            g02: b / rho,
            g11: a * a - 1.0,
            g12: a * b / rho,
            g22: (b * b - 1.0) / (rho * rho),
        })
    }
}

/// Branch-tagged radial and angular speeds of the acoustic flow.
#[derive(Debug, Clone)]
pub struct AcousticClosedForm {
    profile: Arc<RadialProfile>,
}

impl AcousticClosedForm {
    pub fn profile(&self) -> &RadialProfile {
        &self.profile
    }
}

/// `(dρ/dt, ρ·dφ/dt)` for constant-in-ρ data `A`, `B`.
///
/// The direct expressions
/// `dρ±/dt = ±(A²−1)S / (±AS − B)`, `ρ dφ±/dt = S(±AB − S) / (±AS − B)`,
/// with `S = √(A²+B²−1)`, share a denominator that vanishes exactly where
/// `A² = 1` and `±AS = B`. There the conjugate-multiplied forms
/// `dρ±/dt = S(AS ± B)/(A²+B²)`, `ρ dφ±/dt = S(BS ∓ A)/(A²+B²)` are used.
pub fn acoustic_speeds(branch: Branch, a: f64, b: f64) -> (f64, f64) {
    let q = a * a + b * b;
    let s = (q - 1.0).max(0.0).sqrt();
    let sg = branch.sign();
    let den = sg * a * s - b;
    if den.abs() >= RATIONALIZE_THRESHOLD * q {
        let rho = sg * (a * a - 1.0) * s / den;
        let phi = s * (sg * a * b - s) / den;
        (rho, phi)
    } else {
        rationalized_acoustic_speeds(branch, a, b)
    }
}

pub fn rationalized_acoustic_speeds(branch: Branch, a: f64, b: f64) -> (f64, f64) {
    let q = a * a + b * b;
    let s = (q - 1.0).max(0.0).sqrt();
    let sg = branch.sign();
    (s * (a * s + sg * b) / q, s * (b * s - sg * a) / q)
}

/// Both conjugate products used to rationalize the closed forms, as
/// `[(lhs, rhs); 2]`:
/// `(AS − B)(−AS − B) = −(A²+B²)(A²−1)` and
/// `(−AB + S)(−AB − S) = (A²−1)(B²−1)`.
pub fn conjugate_products(a: f64, b: f64) -> [(f64, f64); 2] {
    let s = (a * a + b * b - 1.0).sqrt();
    [
        ((a * s - b) * (-a * s - b), -(a * a + b * b) * (a * a - 1.0)),
        ((-a * b + s) * (-a * b - s), (a * a - 1.0) * (b * b - 1.0)),
    ]
}

impl RadialClosedForm for AcousticClosedForm {
    fn rho_speed(&self, branch: Branch, rho: f64) -> f64 {
        acoustic_speeds(branch, self.profile.a(rho), self.profile.b(rho)).0
    }

    fn phi_speed(&self, branch: Branch, rho: f64) -> f64 {
        acoustic_speeds(branch, self.profile.a(rho), self.profile.b(rho)).1 / rho
    }

    fn ergo_function(&self, rho: f64) -> f64 {
        let a = self.profile.a(rho);
        let b = self.profile.b(rho);
        a * a + b * b - 1.0
    }

    fn domain(&self) -> (f64, f64) {
        (self.profile.rho_lo, self.profile.rho_hi)
    }
}

pub fn acoustic(profile: RadialProfile) -> (AcousticField, AcousticClosedForm) {
    let profile = Arc::new(profile);
    (AcousticField { profile: profile.clone() }, AcousticClosedForm { profile })
}
