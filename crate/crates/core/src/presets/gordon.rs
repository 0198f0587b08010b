//! Gordon optical metric of a moving dielectric, restricted to 2+1
//! dimensions: `gⁱʲ = ηⁱʲ + (n² − 1) uⁱ uʲ` with `η = diag(1, −1, −1)`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::metric::{Chart, Domain, InverseMetricField, InverseMetricSample, MetricError, SpatialPoint};

pub type ScalarMap = Arc<dyn Fn(SpatialPoint) -> f64 + Send + Sync>;
pub type VectorMap = Arc<dyn Fn(SpatialPoint) -> [f64; 2] + Send + Sync>;

/// Prefactor `γ` in `u = γ (1, w/c)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GordonNormalization {
    /// `γ = 1 − |w|²/c²`.
    #[default]
    Linear,
    /// `γ = (1 − |w|²/c²)^(−1/2)`, the unit-norm 4-velocity.
    Lorentz,
}

impl GordonNormalization {
    pub fn gamma(self, beta2: f64) -> f64 {
        match self {
            GordonNormalization::Linear => 1.0 - beta2,
            GordonNormalization::Lorentz => 1.0 / (1.0 - beta2).sqrt(),
        }
    }
}

/// Cartesian-chart Gordon field with refractive index `n(x)` and medium
/// velocity `w(x)`.
#[derive(Clone)]
pub struct GordonField {
    n: ScalarMap,
    w: VectorMap,
    c: f64,
    normalization: GordonNormalization,
    domain: Domain,
}

impl fmt::Debug for GordonField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GordonField")
            .field("c", &self.c)
            .field("normalization", &self.normalization)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl GordonField {
    /// Contravariant medium velocity `(u⁰, u¹, u²)` at `x`.
    pub fn four_velocity(&self, x: SpatialPoint) -> Result<[f64; 3], MetricError> {
        let (_, u) = self.medium(x)?;
        Ok(u)
    }

    fn medium(&self, x: SpatialPoint) -> Result<(f64, [f64; 3]), MetricError> {
        let n = (self.n)(x);
        let w = (self.w)(x);
        check_medium(n, w, self.c, x)?;
        let bx = w[0] / self.c;
        let by = w[1] / self.c;
        let gamma = self.normalization.gamma(bx * bx + by * by);
        Ok((n, [gamma, gamma * bx, gamma * by]))
    }
}

fn check_medium(n: f64, w: [f64; 2], c: f64, x: SpatialPoint) -> Result<(), MetricError> {
    if !(n >= 1.0) || !n.is_finite() {
        return Err(MetricError::InvalidMedium(format!(
            "refractive index must satisfy n >= 1 (n = {n} at ({}, {}))",
            x.x1, x.x2
        )));
    }
    let speed = w[0].hypot(w[1]);
    if !(speed < c) {
        return Err(MetricError::InvalidMedium(format!(
            "medium speed must satisfy |w| < c (|w| = {speed}, c = {c} at ({}, {}))",
            x.x1, x.x2
        )));
    }
    Ok(())
}

impl InverseMetricField for GordonField {
    fn chart(&self) -> Chart {
        Chart::Cartesian
    }

    fn domain(&self) -> Domain {
        self.domain
    }

    fn eval(&self, x: SpatialPoint) -> Result<InverseMetricSample, MetricError> {
        if !self.domain.contains(x) {
            return Err(MetricError::OutOfDomain(x.x1, x.x2));
        }
        let (n, u) = self.medium(x)?;
        let k = n * n - 1.0;
        Ok(InverseMetricSample {
            g00: 1.0 + k * u[0] * u[0],
            g01: k * u[0] * u[1],
            g02: k * u[0] * u[2],
            g11: -1.0 + k * u[1] * u[1],
            g12: k * u[1] * u[2],
            g22: -1.0 + k * u[2] * u[2],
        })
    }
}

/// Builds a Gordon field on a rectangular Cartesian domain. The medium is
/// checked on a 33 × 33 grid up front and again at every evaluation.
pub fn gordon_2d(
    n: ScalarMap,
    w: VectorMap,
    c: f64,
    normalization: GordonNormalization,
    domain: Domain,
) -> Result<GordonField, MetricError> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(MetricError::InvalidParameter(format!("speed of light must be positive (got {c})")));
    }
    let Domain::Rectangle { x_min, x_max, y_min, y_max } = domain else {
        return Err(MetricError::InvalidParameter("Gordon fields use a rectangular Cartesian domain".into()));
    };
    const N: usize = 32;
    for i in 0..=N {
        for j in 0..=N {
            let x = SpatialPoint::new(
                x_min + (x_max - x_min) * i as f64 / N as f64,
                y_min + (y_max - y_min) * j as f64 / N as f64,
            );
            check_medium(n(x), w(x), c, x)?;
        }
    }
    Ok(GordonField { n, w, c, normalization, domain })
}

/// A swirling inflow with constant index: speed `β(ρ) c` with
/// `β(ρ) = β₀ (ρ/ρ_p) e^{1 − ρ/ρ_p}`, direction making a fixed angle with
/// the inward radial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VortexParams {
    pub n: f64,
    pub beta0: f64,
    pub rho_peak: f64,
    /// Sine of the angle between the flow and the azimuthal direction;
    /// positive values point inward.
    pub inflow: f64,
    /// `+1` for counter-clockwise swirl, `−1` for clockwise.
    pub swirl: f64,
    pub c: f64,
    /// Half-width of the square domain.
    pub extent: f64,
    #[serde(default)]
    pub normalization: GordonNormalization,
}

impl Default for VortexParams {
    fn default() -> Self {
        Self {
            n: 4.0,
            beta0: 0.5,
            rho_peak: 1.0,
            inflow: 0.8,
            swirl: 1.0,
            c: 1.0,
            extent: 6.0,
            normalization: GordonNormalization::Linear,
        }
    }
}

impl VortexParams {
    pub fn beta(&self, rho: f64) -> f64 {
        let s = rho / self.rho_peak;
        self.beta0 * s * (1.0 - s).exp()
    }

    /// Polar components `(w_ρ, w_φ)/c` of the flow at radius `ρ`.
    pub fn polar_beta(&self, rho: f64) -> (f64, f64) {
        let b = self.beta(rho);
        let cos = (1.0 - self.inflow * self.inflow).max(0.0).sqrt();
        (-self.inflow * b, self.swirl.signum() * cos * b)
    }
}

pub fn gordon_vortex(p: VortexParams) -> Result<GordonField, MetricError> {
    if !(p.rho_peak > 0.0 && p.extent > 0.0) {
        return Err(MetricError::InvalidParameter("vortex needs rho_peak > 0 and extent > 0".into()));
    }
    if !(p.inflow.abs() <= 1.0) {
        return Err(MetricError::InvalidParameter(format!("inflow sine must lie in [-1, 1] (got {})", p.inflow)));
    }
    let n = p.n;
    let w: VectorMap = Arc::new(move |x: SpatialPoint| {
        let rho = x.x1.hypot(x.x2);
        let (br, bp) = p.polar_beta(rho);
        let phi = x.x2.atan2(x.x1);
        let (s, c) = phi.sin_cos();
        [p.c * (br * c - bp * s), p.c * (br * s + bp * c)]
    });
    let e = p.extent;
    gordon_2d(
        Arc::new(move |_| n),
        w,
        p.c,
        p.normalization,
        Domain::Rectangle { x_min: -e, x_max: e, y_min: -e, y_max: e },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::delta;

    fn square() -> Domain {
        Domain::Rectangle { x_min: -1.0, x_max: 1.0, y_min: -1.0, y_max: 1.0 }
    }

    #[test]
    fn unit_index_is_minkowski() {
        let f = gordon_2d(Arc::new(|_| 1.0), Arc::new(|_| [0.3, 0.1]), 1.0, GordonNormalization::Linear, square())
            .unwrap();
        let g = f.eval(SpatialPoint::new(0.2, 0.4)).unwrap();
        assert_eq!((g.g00, g.g01, g.g11, g.g12, g.g22), (1.0, 0.0, -1.0, 0.0, -1.0));
    }

    #[test]
    fn static_medium_has_no_ergoregion() {
        let f = gordon_2d(Arc::new(|_| 2.5), Arc::new(|_| [0.0, 0.0]), 1.0, GordonNormalization::Linear, square())
            .unwrap();
        assert_eq!(delta(&f.eval(SpatialPoint::new(0.1, 0.1)).unwrap()), 1.0);
    }

    #[test]
    fn rejects_bad_media() {
        let sub = gordon_2d(Arc::new(|_| 0.9), Arc::new(|_| [0.0, 0.0]), 1.0, GordonNormalization::Linear, square());
        assert!(matches!(sub, Err(MetricError::InvalidMedium(_))));
        let fast = gordon_2d(Arc::new(|_| 1.5), Arc::new(|_| [1.0, 0.0]), 1.0, GordonNormalization::Linear, square());
        assert!(matches!(fast, Err(MetricError::InvalidMedium(_))));
    }

    #[test]
    fn delta_matches_spatial_speed_formula() {
        let p = VortexParams::default();
        let f = gordon_vortex(p).unwrap();
        let x = SpatialPoint::new(0.7, -0.5);
        let rho = x.x1.hypot(x.x2);
        let b = p.beta(rho);
        let us = (1.0 - b * b) * b;
        let expect = 1.0 - (p.n * p.n - 1.0) * us * us;
        assert!((delta(&f.eval(x).unwrap()) - expect).abs() < 1e-13);
    }

    #[test]
    fn lorentz_toggle_changes_gamma() {
        assert_eq!(GordonNormalization::Linear.gamma(0.36), 0.64);
        assert!((GordonNormalization::Lorentz.gamma(0.36) - 1.25).abs() < 1e-15);
    }
}
