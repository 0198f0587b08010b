//! Ergospheres, event horizons and per-family censuses.

mod boundary;
mod census;
mod cycle;
mod radial;

pub use boundary::{
    boundary_behavior, characteristic_transit_check, classify_ergosphere, resolve_boundary_curves, FamilyTransit,
    TransitReport,
};
pub use census::{census, census_polar, cycle_census, CensusOptions};
pub use cycle::{detect_limit_cycle, detect_limit_cycle_directed, return_map, CycleOptions};
pub use radial::{find_ergospheres, find_radial_horizons, RadialScan};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flow::FlowError;
use crate::metric::{Branch, MetricError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HorizonError {
    #[error("expected exactly two ergospheres, found {found} sign changes of the ergo function")]
    WrongRootCount { found: usize },
    #[error("ergosphere is partially characteristic ({characteristic} of {samples} samples tangent)")]
    MixedCharacter { characteristic: usize, samples: usize },
    #[error("inconclusive limit-cycle search: {0}")]
    Inconclusive(String),
    #[error("consistency failure: {0}")]
    ConsistencyFailure(String),
    #[error("precondition unmet: {0}")]
    Precondition(String),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Which ergosphere: the one nearer the centre or the one farther out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryId {
    Inner,
    Outer,
}

impl BoundaryId {
    pub const BOTH: [BoundaryId; 2] = [BoundaryId::Inner, BoundaryId::Outer];
}

/// The ergoregion, either as a radial interval or as two closed curves.
/// Curve points are in the chart of the field they were resolved from,
/// listed at equally spaced angles about `center`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ErgoregionAnnulus {
    Radial { rho_minus: f64, rho_plus: f64 },
    Curves { center: [f64; 2], inner: Vec<[f64; 2]>, outer: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Ccw,
    Cw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HorizonKind {
    /// Nothing crosses it outward.
    Black,
    /// Nothing crosses it inward.
    White,
}

impl HorizonKind {
    pub fn flipped(self) -> Self {
        match self {
            HorizonKind::Black => HorizonKind::White,
            HorizonKind::White => HorizonKind::Black,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionMethod {
    ClosedForm,
    ReturnMap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonRecord {
    /// Circle radius, or the crossing radius on the section ray for a
    /// general cycle.
    pub radius: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub polyline: Option<Vec<[f64; 2]>>,
    pub branch: Branch,
    pub orientation: Orientation,
    pub kind: HorizonKind,
    pub multiplicity: u32,
    /// `|dρ/dt|` at the root, or the return-map residual `|P(r) − r|`.
    pub residual: f64,
    /// `dφ/dt` on the horizon.
    pub angular_speed: f64,
    pub method: DetectionMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryBehavior {
    /// Trajectories leave the ergosphere into the ergoregion as t increases.
    FamilyStarts,
    /// Trajectories reach the ergosphere as t increases.
    FamilyEnds,
    Characteristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErgosphereClass {
    Transversal,
    Characteristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchBehavior {
    pub plus: BoundaryBehavior,
    pub minus: BoundaryBehavior,
}

impl BranchBehavior {
    pub fn get(&self, branch: Branch) -> BoundaryBehavior {
        match branch {
            Branch::Plus => self.plus,
            Branch::Minus => self.minus,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryReport {
    pub inner_class: ErgosphereClass,
    pub outer_class: ErgosphereClass,
    pub inner: BranchBehavior,
    pub outer: BranchBehavior,
}

impl BoundaryReport {
    pub fn behavior(&self, which: BoundaryId, branch: Branch) -> BoundaryBehavior {
        match which {
            BoundaryId::Inner => self.inner.get(branch),
            BoundaryId::Outer => self.outer.get(branch),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CensusDiagnostics {
    pub method: String,
    pub seeds: usize,
    pub trajectories: usize,
    pub exits: usize,
    pub cycles_before_dedup: usize,
    pub inconclusive: usize,
    pub max_residual: f64,
    pub messages: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusReport {
    pub annulus: ErgoregionAnnulus,
    pub horizons_plus: Vec<HorizonRecord>,
    pub horizons_minus: Vec<HorizonRecord>,
    pub boundary_behavior: BoundaryReport,
    pub diagnostics: CensusDiagnostics,
}

impl CensusReport {
    pub fn horizons(&self, branch: Branch) -> &[HorizonRecord] {
        match branch {
            Branch::Plus => &self.horizons_plus,
            Branch::Minus => &self.horizons_minus,
        }
    }
}
