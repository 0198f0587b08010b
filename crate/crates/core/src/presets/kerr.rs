//! The two 2+1 reductions of the Kerr metric in Kerr–Schild form.
//!
//! With `r` defined implicitly by `ρ²/(r²+a²) + z²/r² = 1` the 3+1
//! Hamiltonian has `K = 2mr³/(r⁴+a²z²)`, `b_ρ = ρr/(r²+a²)`,
//! `b_φ = aρ/(r²+a²)`, `b_z = z/r`. The equatorial reduction sets
//! `z = ξ_z = 0`; the axial reduction sets `ξ_φ = 0` and lives in the
//! meridian plane `(ρ, z)`.

use serde::{Deserialize, Serialize};

use super::RadialClosedForm;
use super::acoustic::RATIONALIZE_THRESHOLD;
use crate::metric::{Branch, Chart, Domain, InverseMetricField, InverseMetricSample, MetricError, SpatialPoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KerrParams {
    pub m: f64,
    pub a: f64,
}

impl KerrParams {
    pub fn new(m: f64, a: f64) -> Result<Self, MetricError> {
        let p = Self { m, a };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), MetricError> {
        if !(self.m > 0.0 && self.m.is_finite()) {
            return Err(MetricError::InvalidParameter(format!("Kerr mass must satisfy m > 0 (got m = {})", self.m)));
        }
        if !(self.a >= 0.0 && self.a <= self.m) {
            return Err(MetricError::InvalidParameter(format!(
                "Kerr spin must satisfy 0 <= a <= m (got a = {}, m = {})",
                self.a, self.m
            )));
        }
        Ok(())
    }

    /// `r± = m ± √(m² − a²)`.
    pub fn horizon_radii(&self) -> (f64, f64) {
        let d = (self.m * self.m - self.a * self.a).max(0.0).sqrt();
        (self.m - d, self.m + d)
    }

    /// Cylindrical radius of the equatorial point with Kerr radius `r`.
    pub fn equatorial_rho(&self, r: f64) -> f64 {
        (r * r + self.a * self.a).sqrt()
    }

    pub fn outer_ergosphere_rho(&self) -> f64 {
        (4.0 * self.m * self.m + self.a * self.a).sqrt()
    }
}

/// Kerr radius `r(ρ, z) >= 0`, the positive root of
/// `r⁴ − (ρ²+z²−a²) r² − a²z² = 0`, polished by one Newton step.
pub fn kerr_radius(rho: f64, z: f64, a: f64) -> f64 {
    let w = rho * rho + z * z - a * a;
    let disc = (w * w + 4.0 * a * a * z * z).sqrt();
    let mut r2 = if w >= 0.0 {
        0.5 * (w + disc)
    } else {
        let den = disc - w;
        if den > 0.0 {
            2.0 * a * a * z * z / den
        } else {
            0.0
        }
    };
    if r2 > 0.0 {
        let f = r2 * r2 - w * r2 - a * a * z * z;
        let df = 2.0 * r2 - w;
        if df != 0.0 {
            let next = r2 - f / df;
            if next > 0.0 {
                r2 = next;
            }
        }
    }
    r2.sqrt()
}

/// Equatorial reduction in the polar chart `(ρ, φ)`, `ρ > a`.
#[derive(Debug, Clone)]
pub struct KerrEquatorialField {
    params: KerrParams,
    rho_min: f64,
    rho_max: f64,
}

struct EquatorialData {
    k: f64,
    b_rho: f64,
    b_phi: f64,
}

fn equatorial_data(p: &KerrParams, rho: f64) -> Result<EquatorialData, MetricError> {
    if !(rho > p.a) {
        return Err(MetricError::DomainViolation(format!(
            "equatorial Kerr requires rho > a (got rho = {rho}, a = {})",
            p.a
        )));
    }
    let r = ((rho - p.a) * (rho + p.a)).sqrt();
    Ok(EquatorialData { k: 2.0 * p.m / r, b_rho: r / rho, b_phi: p.a / rho })
}

impl KerrEquatorialField {
    pub fn params(&self) -> KerrParams {
        self.params
    }
}

impl InverseMetricField for KerrEquatorialField {
    fn chart(&self) -> Chart {
        Chart::Polar
    }

    fn domain(&self) -> Domain {
        Domain::Annulus { rho_min: self.rho_min, rho_max: self.rho_max }
    }

    fn eval(&self, x: SpatialPoint) -> Result<InverseMetricSample, MetricError> {
        let rho = x.rho();
        let d = equatorial_data(&self.params, rho)?;
        if rho > self.rho_max {
            return Err(MetricError::OutOfDomain(x.x1, x.x2));
        }
        // The azimuthal coefficient enters the covector pairing as −b_φ·ξ_φ/ρ;
        // this rotation sense puts the horizon-generating roots on the plus branch.
        let c = -d.b_phi;
        let k = d.k;
        Ok(InverseMetricSample {
            g00: 1.0 + k,
            g01: -k * d.b_rho,
            g02: -k * c / rho,
            g11: k * d.b_rho * d.b_rho - 1.0,
            g12: k * d.b_rho * c / rho,
            g22: (k * c * c - 1.0) / (rho * rho),
        })
    }

    fn ergosphere_at_edge(&self, x: SpatialPoint) -> bool {
        self.params.a > 0.0 && x.rho() < 0.5 * (self.rho_min + self.rho_max)
    }
}

/// Closed-form equatorial speeds.
#[derive(Debug, Clone)]
pub struct KerrEquatorialClosedForm {
    params: KerrParams,
    rho_min: f64,
    rho_max: f64,
}

impl KerrEquatorialClosedForm {
    pub fn params(&self) -> KerrParams {
        self.params
    }

    fn speeds(&self, branch: Branch, rho: f64) -> (f64, f64) {
        let Ok(d) = equatorial_data(&self.params, rho) else {
            return (f64::NAN, f64::NAN);
        };
        let (k, br, bp) = (d.k, d.b_rho, d.b_phi);
        let q = br * br + bp * bp;
        let s = (k * q - 1.0).max(0.0).sqrt();
        let sg = branch.sign();
        // dρ±/dt = ±(K b_ρ² − 1) S / (∓K b_ρ S − K b_φ)
        let den = -sg * k * br * s - k * bp;
        if den.abs() >= RATIONALIZE_THRESHOLD * k * q {
            let rho_dot = sg * (k * br * br - 1.0) * s / den;
            let phi_dot = s * (-sg * k * br * bp - s) / (rho * den);
            (rho_dot, phi_dot)
        } else {
            // conjugate-multiplied form, regular where the direct denominator vanishes
            let rho_dot = s * (-br * s + sg * bp) / (k * q);
            let phi_dot = s * (bp * s + sg * br) / (rho * k * q);
            (rho_dot, phi_dot)
        }
    }
}

impl RadialClosedForm for KerrEquatorialClosedForm {
    fn rho_speed(&self, branch: Branch, rho: f64) -> f64 {
        self.speeds(branch, rho).0
    }

    fn phi_speed(&self, branch: Branch, rho: f64) -> f64 {
        self.speeds(branch, rho).1
    }

    /// `K(b_ρ² + b_φ²) − 1`, which reduces to `K − 1` on the equator.
    fn ergo_function(&self, rho: f64) -> f64 {
        match equatorial_data(&self.params, rho) {
            Ok(d) => d.k * (d.b_rho * d.b_rho + d.b_phi * d.b_phi) - 1.0,
            Err(_) => f64::NAN,
        }
    }

    fn domain(&self) -> (f64, f64) {
        (self.rho_min, self.rho_max)
    }

    fn singular_inner_edge(&self) -> Option<f64> {
        Some(self.params.a)
    }
}

/// Default window `(a(1 + 10⁻⁶), 1.5·√(4m² + a²))`.
pub fn kerr_equatorial(p: KerrParams) -> Result<(KerrEquatorialField, KerrEquatorialClosedForm), MetricError> {
    p.validate()?;
    let rho_min = if p.a > 0.0 { p.a * (1.0 + 1e-6) } else { 1e-6 * p.m };
    let rho_max = 1.5 * p.outer_ergosphere_rho();
    Ok((
        KerrEquatorialField { params: p, rho_min, rho_max },
        KerrEquatorialClosedForm { params: p, rho_min, rho_max },
    ))
}

/// Axial reduction on the meridian plane `(ρ, z)`, extended to `ρ < 0` by
/// reflection so the region between the two Kerr horizons is an annulus.
#[derive(Debug, Clone)]
pub struct KerrAxialField {
    params: KerrParams,
    r_min: f64,
    extent: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxialCoefficients {
    pub r: f64,
    pub k: f64,
    pub b_rho: f64,
    pub b_z: f64,
}

impl KerrAxialField {
    pub fn params(&self) -> KerrParams {
        self.params
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    /// Kerr radius at a chart point.
    pub fn radius(&self, x: SpatialPoint) -> f64 {
        kerr_radius(x.x1.abs(), x.x2, self.params.a)
    }

    pub fn coefficients(&self, x: SpatialPoint) -> Result<AxialCoefficients, MetricError> {
        let (rho, z) = (x.x1, x.x2);
        let a = self.params.a;
        let r = kerr_radius(rho.abs(), z, a);
        if r < self.r_min {
            return Err(MetricError::DomainViolation(format!(
                "point ({rho}, {z}) is within the ring-singularity cutoff (r = {r:e} < {:e})",
                self.r_min
            )));
        }
        let r2 = r * r;
        Ok(AxialCoefficients {
            r,
            k: 2.0 * self.params.m * r2 * r / (r2 * r2 + a * a * z * z),
            b_rho: rho * r / (r2 + a * a),
            b_z: z / r,
        })
    }
}

impl InverseMetricField for KerrAxialField {
    fn chart(&self) -> Chart {
        Chart::Cartesian
    }

    fn domain(&self) -> Domain {
        let e = self.extent;
        Domain::Rectangle { x_min: -e, x_max: e, y_min: -e, y_max: e }
    }

    fn eval(&self, x: SpatialPoint) -> Result<InverseMetricSample, MetricError> {
        if !self.domain().contains(x) {
            return Err(MetricError::OutOfDomain(x.x1, x.x2));
        }
        let c = self.coefficients(x)?;
        let k = c.k;
        Ok(InverseMetricSample {
            g00: 1.0 + k,
            g01: -k * c.b_rho,
            g02: -k * c.b_z,
            g11: k * c.b_rho * c.b_rho - 1.0,
            g12: k * c.b_rho * c.b_z,
            g22: k * c.b_z * c.b_z - 1.0,
        })
    }
}

pub fn kerr_axial(p: KerrParams) -> Result<KerrAxialField, MetricError> {
    p.validate()?;
    let (_, r_plus) = p.horizon_radii();
    Ok(KerrAxialField {
        params: p,
        r_min: 1e-3 * p.m,
        extent: 1.5 * (r_plus * r_plus + p.a * p.a).sqrt().max(2.0 * p.m),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{delta, in_ergoregion, zero_energy_field, ErgoStatus};

    #[test]
    fn params_validation() {
        assert!(KerrParams::new(1.0, 1.2).is_err());
        assert!(KerrParams::new(-1.0, 0.0).is_err());
        assert!(KerrParams::new(1.0, 1.0).is_ok());
    }

    #[test]
    fn radius_reduces_on_equator_and_axis() {
        assert!((kerr_radius(1.5, 0.0, 0.8) - (1.5f64 * 1.5 - 0.64).sqrt()).abs() < 1e-14);
        assert!((kerr_radius(0.0, 1.3, 0.8) - 1.3).abs() < 1e-14);
        let r = kerr_radius(0.7, 0.4, 0.8);
        let resid = 0.49 / (r * r + 0.64) + 0.16 / (r * r) - 1.0;
        assert!(resid.abs() < 1e-14);
    }

    #[test]
    fn outer_ergosphere_has_zero_delta() {
        let p = KerrParams::new(1.0, 0.8).unwrap();
        let (field, _) = kerr_equatorial(p).unwrap();
        let g = field.eval(SpatialPoint::polar(4.64f64.sqrt(), 0.3)).unwrap();
        assert!(delta(&g).abs() < 1e-12);
        assert_eq!(in_ergoregion(&field, SpatialPoint::polar(4.64f64.sqrt(), 0.0)).unwrap(), ErgoStatus::Boundary);
        assert_eq!(in_ergoregion(&field, SpatialPoint::polar(1.5, 0.0)).unwrap(), ErgoStatus::Inside);
    }

    #[test]
    fn minus_family_moves_inward() {
        let (field, _) = kerr_equatorial(KerrParams::new(1.0, 0.8).unwrap()).unwrap();
        let v = zero_energy_field(&field, SpatialPoint::polar(1.2, 0.0), Branch::Minus).unwrap();
        assert!(v[0] < 0.0);
    }

    #[test]
    fn closed_form_matches_field_and_vanishes_at_horizons() {
        let (field, cf) = kerr_equatorial(KerrParams::new(1.0, 0.8).unwrap()).unwrap();
        for rho in [0.81, 0.85, 1.0, 1.5, 1.9, 2.1] {
            for br in Branch::BOTH {
                let v = zero_energy_field(&field, SpatialPoint::polar(rho, 0.4), br).unwrap();
                assert!((v[0] - cf.rho_speed(br, rho)).abs() < 1e-10 * (1.0 + v[0].abs()), "{rho} {br:?}");
                assert!((v[1] - cf.phi_speed(br, rho)).abs() < 1e-10 * (1.0 + v[1].abs()), "{rho} {br:?}");
            }
        }
        for rho in [0.8f64.sqrt(), 3.2f64.sqrt()] {
            assert!(cf.rho_speed(Branch::Plus, rho).abs() < 1e-12);
        }
    }

    #[test]
    fn schwarzschild_limit_has_double_speed_root_at_2m() {
        let (_, cf) = kerr_equatorial(KerrParams::new(1.0, 0.0).unwrap()).unwrap();
        assert_eq!(cf.ergo_function(2.0), 0.0);
    }

    #[test]
    fn axial_on_axis_coefficients() {
        let f = kerr_axial(KerrParams::new(1.0, 0.8).unwrap()).unwrap();
        let c = f.coefficients(SpatialPoint::new(0.0, 1.2)).unwrap();
        assert!((c.r - 1.2).abs() < 1e-14);
        assert_eq!(c.b_rho, 0.0);
        assert!((c.b_z - 1.0).abs() < 1e-15);
        assert!(f.eval(SpatialPoint::new(0.3, 0.0)).is_err());
    }
}
