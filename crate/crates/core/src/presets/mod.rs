//! Ready-made metrics: equatorial and axial Kerr, acoustic flows with radial
//! profiles, and the Gordon optical metric of a moving medium.

pub mod acoustic;
pub mod gordon;
pub mod kerr;
pub mod profile;

pub use acoustic::{acoustic, AcousticClosedForm, AcousticField};
pub use gordon::{gordon_2d, gordon_vortex, GordonField, GordonNormalization, VortexParams};
pub use kerr::{kerr_axial, kerr_equatorial, kerr_radius, KerrAxialField, KerrEquatorialClosedForm, KerrEquatorialField, KerrParams};
pub use profile::{CubicSpline, MonotoneCubic, ProfileFn, RadialProfile};

use crate::metric::Branch;

/// Exact radial speeds of a rotationally symmetric metric in the polar chart.
pub trait RadialClosedForm: Send + Sync {
    /// `dρ/dt` along the given family.
    fn rho_speed(&self, branch: Branch, rho: f64) -> f64;
    /// `dφ/dt` along the given family.
    fn phi_speed(&self, branch: Branch, rho: f64) -> f64;
    /// Positive exactly inside the ergoregion.
    fn ergo_function(&self, rho: f64) -> f64;
    /// Radial window on which the closed form is defined.
    fn domain(&self) -> (f64, f64);
    /// Inner domain edge at which the ergoregion ends by a coordinate
    /// singularity rather than by a sign change of the ergo function.
    fn singular_inner_edge(&self) -> Option<f64> {
        None
    }
}

impl<T: RadialClosedForm + ?Sized> RadialClosedForm for &T {
    fn rho_speed(&self, branch: Branch, rho: f64) -> f64 {
        (**self).rho_speed(branch, rho)
    }
    fn phi_speed(&self, branch: Branch, rho: f64) -> f64 {
        (**self).phi_speed(branch, rho)
    }
    fn ergo_function(&self, rho: f64) -> f64 {
        (**self).ergo_function(rho)
    }
    fn domain(&self) -> (f64, f64) {
        (**self).domain()
    }
    fn singular_inner_edge(&self) -> Option<f64> {
        (**self).singular_inner_edge()
    }
}

impl<T: RadialClosedForm + ?Sized> RadialClosedForm for Box<T> {
    fn rho_speed(&self, branch: Branch, rho: f64) -> f64 {
        (**self).rho_speed(branch, rho)
    }
    fn phi_speed(&self, branch: Branch, rho: f64) -> f64 {
        (**self).phi_speed(branch, rho)
    }
    fn ergo_function(&self, rho: f64) -> f64 {
        (**self).ergo_function(rho)
    }
    fn domain(&self) -> (f64, f64) {
        (**self).domain()
    }
    fn singular_inner_edge(&self) -> Option<f64> {
        (**self).singular_inner_edge()
    }
}
