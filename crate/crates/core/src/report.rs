//! Census JSON documents and their schema checks.
//!
//! A document has the shape
//!
//! ```text
//! {
//!   "schema": "ergoflow.census/1",
//!   "metric": { ...free-form description of the metric... },
//!   "status": "ok" | "out_of_scope",
//!   "report": { annulus, horizons_plus, horizons_minus, boundary_behavior, diagnostics },
//!   "error": { "kind": ..., "message": ... }
//! }
//! ```
//!
//! `report` is present exactly when the status is `ok`, `error` exactly when
//! it is `out_of_scope`. Floats are written in shortest round-trip form.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::horizon::{
    BoundaryBehavior, BoundaryId, CensusReport, ErgoregionAnnulus, ErgosphereClass, HorizonError, HorizonRecord,
};
use crate::metric::Branch;

pub const CENSUS_SCHEMA: &str = "ergoflow.census/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CensusStatus {
    Ok,
    /// The metric has no annular ergoregion, or its ergospheres are mixed.
    OutOfScope,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportedError {
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CensusDocument {
    pub schema: String,
    pub metric: serde_json::Value,
    pub status: CensusStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<CensusReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ReportedError>,
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },
}

fn violation(path: impl Into<String>, message: impl Into<String>) -> ReportError {
    ReportError::Schema { path: path.into(), message: message.into() }
}

impl CensusDocument {
    pub fn ok(metric: serde_json::Value, report: CensusReport) -> Self {
        Self { schema: CENSUS_SCHEMA.into(), metric, status: CensusStatus::Ok, report: Some(report), error: None }
    }

    /// Wraps an out-of-scope verdict; `None` for errors that are failures
    /// rather than findings about the metric.
    pub fn out_of_scope(metric: serde_json::Value, err: &HorizonError) -> Option<Self> {
        let kind = match err {
            HorizonError::WrongRootCount { .. } => "wrong_root_count",
            HorizonError::MixedCharacter { .. } => "mixed_character",
            _ => return None,
        };
        Some(Self {
            schema: CENSUS_SCHEMA.into(),
            metric,
            status: CensusStatus::OutOfScope,
            report: None,
            error: Some(ReportedError { kind: kind.into(), message: err.to_string() }),
        })
    }

    pub fn to_json(&self) -> Result<String, ReportError> {
        self.validate()?;
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        let doc: CensusDocument = serde_json::from_str(text)?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn validate(&self) -> Result<(), ReportError> {
        if self.schema != CENSUS_SCHEMA {
            return Err(violation("schema", format!("expected {CENSUS_SCHEMA:?}, found {:?}", self.schema)));
        }
        match (self.status, &self.report, &self.error) {
            (CensusStatus::Ok, Some(r), None) => validate_report(r),
            (CensusStatus::OutOfScope, None, Some(e)) => {
                if e.kind == "wrong_root_count" || e.kind == "mixed_character" {
                    Ok(())
                } else {
                    Err(violation("error.kind", format!("unknown kind {:?}", e.kind)))
                }
            }
            (CensusStatus::Ok, _, _) => Err(violation("report", "status ok needs a report and no error")),
            (CensusStatus::OutOfScope, _, _) => {
                Err(violation("error", "status out_of_scope needs an error and no report"))
            }
        }
    }
}

fn finite(path: &str, v: f64) -> Result<(), ReportError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(violation(path, "non-finite number"))
    }
}

fn validate_report(r: &CensusReport) -> Result<(), ReportError> {
    let bounds = match &r.annulus {
        ErgoregionAnnulus::Radial { rho_minus, rho_plus } => {
            finite("report.annulus.rho_minus", *rho_minus)?;
            finite("report.annulus.rho_plus", *rho_plus)?;
            if !(rho_minus < rho_plus) {
                return Err(violation("report.annulus", "rho_minus must be below rho_plus"));
            }
            Some((*rho_minus, *rho_plus))
        }
        ErgoregionAnnulus::Curves { center, inner, outer } => {
            finite("report.annulus.center", center[0] + center[1])?;
            for (name, c) in [("inner", inner), ("outer", outer)] {
                if c.len() < 3 {
                    return Err(violation(format!("report.annulus.{name}"), "fewer than 3 points"));
                }
                for (i, p) in c.iter().enumerate() {
                    finite(&format!("report.annulus.{name}[{i}]"), p[0] + p[1])?;
                }
            }
            if inner.len() != outer.len() {
                return Err(violation("report.annulus", "inner and outer curves differ in length"));
            }
            None
        }
    };
    for branch in Branch::BOTH {
        let name = match branch {
            Branch::Plus => "horizons_plus",
            Branch::Minus => "horizons_minus",
        };
        let list = r.horizons(branch);
        for (i, h) in list.iter().enumerate() {
            validate_record(&format!("report.{name}[{i}]"), h, branch, bounds)?;
        }
        if list.windows(2).any(|w| w[0].radius >= w[1].radius) {
            return Err(violation(format!("report.{name}"), "radii must be strictly increasing"));
        }
    }
    for which in BoundaryId::BOTH {
        let (class, label) = match which {
            BoundaryId::Inner => (r.boundary_behavior.inner_class, "inner"),
            BoundaryId::Outer => (r.boundary_behavior.outer_class, "outer"),
        };
        for branch in Branch::BOTH {
            let b = r.boundary_behavior.behavior(which, branch);
            let consistent = (class == ErgosphereClass::Characteristic) == (b == BoundaryBehavior::Characteristic);
            if !consistent {
                return Err(violation(
                    format!("report.boundary_behavior.{label}.{branch}"),
                    format!("{b:?} on a {class:?} ergosphere"),
                ));
            }
        }
        if class == ErgosphereClass::Transversal {
            let p = r.boundary_behavior.behavior(which, Branch::Plus);
            let m = r.boundary_behavior.behavior(which, Branch::Minus);
            if p == m {
                return Err(violation(
                    format!("report.boundary_behavior.{label}"),
                    "one family must start and the other end on a transversal ergosphere",
                ));
            }
        }
    }
    Ok(())
}

fn validate_record(path: &str, h: &HorizonRecord, branch: Branch, bounds: Option<(f64, f64)>) -> Result<(), ReportError> {
    finite(&format!("{path}.radius"), h.radius)?;
    finite(&format!("{path}.residual"), h.residual)?;
    finite(&format!("{path}.angular_speed"), h.angular_speed)?;
    if h.branch != branch {
        return Err(violation(format!("{path}.branch"), "record filed under the other family"));
    }
    if !(1..=3).contains(&h.multiplicity) {
        return Err(violation(format!("{path}.multiplicity"), format!("{} not in 1..=3", h.multiplicity)));
    }
    if h.residual < 0.0 {
        return Err(violation(format!("{path}.residual"), "negative"));
    }
    if let Some((lo, hi)) = bounds {
        if !(h.radius > lo && h.radius < hi) {
            return Err(violation(format!("{path}.radius"), format!("{} outside ({lo}, {hi})", h.radius)));
        }
    }
    if let Some(poly) = &h.polyline {
        if poly.len() < 3 {
            return Err(violation(format!("{path}.polyline"), "fewer than 3 points"));
        }
    }
    Ok(())
}
