//! TOML run configuration.
//!
//! ```toml
//! [metric]
//! preset = "kerr-equatorial"
//! m = 1.0
//! a = 0.8
//!
//! [integration]      # flow options, all optional
//! [census]           # census options, all optional
//! [trace]            # seed, branch, direction
//! [portrait]         # seeds and canvas
//! [sweep]            # parameter and values
//! ```
//!
//! Unknown keys are rejected everywhere.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ergoflow::flow::{Direction, IntegrationOptions};
use ergoflow::horizon::CensusOptions;
use ergoflow::presets::{
    acoustic, gordon_vortex, kerr_axial, kerr_equatorial, CubicSpline, GordonNormalization, KerrParams,
    MonotoneCubic, ProfileFn, RadialClosedForm, RadialProfile, VortexParams,
};
use ergoflow::{Branch, InverseMetricField};
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub metric: MetricConfig,
    #[serde(default)]
    pub integration: IntegrationOptions,
    #[serde(default)]
    pub census: CensusOptions,
    #[serde(default)]
    pub trace: TraceConfig,
    #[serde(default)]
    pub portrait: PortraitConfig,
    pub sweep: Option<SweepConfig>,
    /// Output directory; `--out` takes precedence.
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MetricConfig {
    KerrEquatorial {
        m: f64,
        a: f64,
    },
    KerrAxial {
        m: f64,
        a: f64,
    },
    Acoustic {
        a: ProfileSpec,
        b: ProfileSpec,
        rho_min: f64,
        rho_max: f64,
    },
    AcousticQuadratic {
        center: f64,
        kappa: f64,
        gap: f64,
        b0: f64,
        #[serde(default)]
        b1: f64,
        #[serde(default = "default_reach")]
        reach: f64,
    },
    /// CSV with header `rho,a,b`; path relative to the config file.
    AcousticTable {
        path: PathBuf,
        rho_min: Option<f64>,
        rho_max: Option<f64>,
    },
    GordonVortex {
        n: Option<f64>,
        beta0: Option<f64>,
        rho_peak: Option<f64>,
        inflow: Option<f64>,
        swirl: Option<f64>,
        c: Option<f64>,
        extent: Option<f64>,
        normalization: Option<GordonNormalization>,
    },
}

fn default_reach() -> f64 {
    0.9
}

/// A radial profile: a bare number is a constant.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ProfileSpec {
    Constant(f64),
    Shaped(ShapedProfile),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ShapedProfile {
    Polynomial {
        #[serde(default)]
        center: f64,
        coeffs: Vec<f64>,
    },
    Spline {
        knots: Vec<f64>,
        values: Vec<f64>,
    },
}

impl ProfileSpec {
    fn build(&self) -> Result<ProfileFn> {
        Ok(match self {
            ProfileSpec::Constant(c) => ProfileFn::Constant(*c),
            ProfileSpec::Shaped(ShapedProfile::Polynomial { center, coeffs }) => {
                ProfileFn::Polynomial { center: *center, coeffs: coeffs.clone() }
            }
            ProfileSpec::Shaped(ShapedProfile::Spline { knots, values }) => {
                ProfileFn::Spline(CubicSpline::natural(knots.clone(), values.clone())?)
            }
        })
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceConfig {
    pub seed: Option<[f64; 2]>,
    pub branch: Option<Branch>,
    pub direction: Option<Direction>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PortraitConfig {
    pub seeds: Vec<[f64; 2]>,
    pub branches: Vec<Branch>,
    pub directions: Vec<Direction>,
    pub max_time: f64,
    pub cycles: bool,
    pub ergospheres: bool,
    pub width: f64,
    pub height: f64,
}

impl Default for PortraitConfig {
    fn default() -> Self {
        Self {
            seeds: Vec::new(),
            branches: Branch::BOTH.to_vec(),
            directions: vec![Direction::Forward],
            max_time: 50.0,
            cycles: true,
            ergospheres: true,
            width: 800.0,
            height: 800.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Key of the `[metric]` table to vary.
    pub parameter: String,
    pub values: Vec<f64>,
    pub workers: Option<usize>,
}

/// A built metric with its optional radial closed form.
pub struct Metric {
    pub field: Box<dyn InverseMetricField>,
    pub closed_form: Option<Box<dyn RadialClosedForm>>,
}

/// A loaded config file: the typed config plus the raw `[metric]` table,
/// which sweeps edit and re-parse.
pub struct Loaded {
    pub config: RunConfig,
    pub metric_table: toml::Table,
    pub dir: PathBuf,
}

pub fn load(path: &Path) -> Result<Loaded> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    parse(&text, path.parent().unwrap_or(Path::new(".")))
        .with_context(|| format!("invalid config {}", path.display()))
}

pub fn parse(text: &str, dir: &Path) -> Result<Loaded> {
    let config: RunConfig = toml::from_str(text).map_err(|e| locate_unknown_key(e, text))?;
    let raw: toml::Table = toml::from_str(text)?;
    let metric_table = match raw.get("metric") {
        Some(toml::Value::Table(t)) => t.clone(),
        _ => bail!("missing [metric] table"),
    };
    config.integration.validate()?;
    config.census.cycle.search.validate()?;
    config.census.cycle.map.validate()?;
    let p = &config.portrait;
    if !(p.width >= 100.0 && p.height >= 100.0) {
        bail!("portrait canvas must be at least 100 x 100 (got {} x {})", p.width, p.height);
    }
    if !(p.max_time >= 0.0) {
        bail!("portrait max_time must be non-negative (got {})", p.max_time);
    }
    if let Some(s) = &config.sweep {
        if s.workers == Some(0) {
            bail!("sweep workers must be positive");
        }
        if !metric_table.contains_key(&s.parameter) {
            bail!("sweep parameter `{}` is not a key of [metric]", s.parameter);
        }
    }
    Ok(Loaded { config, metric_table, dir: dir.to_path_buf() })
}

/// Tagged tables lose key spans, so unknown-key errors point at the table
/// header. Adds the line of the offending key when it can be found.
fn locate_unknown_key(e: toml::de::Error, text: &str) -> anyhow::Error {
    let msg = e.to_string();
    let key = msg.split("unknown field `").nth(1).and_then(|r| r.split('`').next());
    if let Some(key) = key {
        let hit = text.lines().position(|l| {
            let l = l.trim_start();
            l.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='))
        });
        if let Some(i) = hit {
            return anyhow::anyhow!("{msg}unknown key `{key}` is on line {}", i + 1);
        }
    }
    e.into()
}

/// Re-parses a metric table, e.g. after a sweep edit.
pub fn metric_from_table(table: &toml::Table) -> Result<MetricConfig> {
    Ok(MetricConfig::deserialize(toml::Value::Table(table.clone()))?)
}

impl MetricConfig {
    pub fn build(&self, dir: &Path) -> Result<Metric> {
        Ok(match self {
            MetricConfig::KerrEquatorial { m, a } => {
                let (f, cf) = kerr_equatorial(KerrParams::new(*m, *a)?)?;
                Metric { field: Box::new(f), closed_form: Some(Box::new(cf)) }
            }
            MetricConfig::KerrAxial { m, a } => {
                Metric { field: Box::new(kerr_axial(KerrParams::new(*m, *a)?)?), closed_form: None }
            }
            MetricConfig::Acoustic { a, b, rho_min, rho_max } => {
                radial(RadialProfile::new(a.build()?, b.build()?, *rho_min, *rho_max)?)
            }
            MetricConfig::AcousticQuadratic { center, kappa, gap, b0, b1, reach } => {
                radial(RadialProfile::quadratic_family(*center, *kappa, *gap, *b0, *b1, *reach)?)
            }
            MetricConfig::AcousticTable { path, rho_min, rho_max } => {
                let (rho, a, b) = read_table(&dir.join(path))?;
                let lo = rho_min.unwrap_or(rho[0]);
                let hi = rho_max.unwrap_or(rho[rho.len() - 1]);
                let pa = ProfileFn::Tabulated(MonotoneCubic::new(rho.clone(), a)?);
                let pb = ProfileFn::Tabulated(MonotoneCubic::new(rho, b)?);
                radial(RadialProfile::new(pa, pb, lo, hi)?)
            }
            MetricConfig::GordonVortex { n, beta0, rho_peak, inflow, swirl, c, extent, normalization } => {
                let d = VortexParams::default();
                let p = VortexParams {
                    n: n.unwrap_or(d.n),
                    beta0: beta0.unwrap_or(d.beta0),
                    rho_peak: rho_peak.unwrap_or(d.rho_peak),
                    inflow: inflow.unwrap_or(d.inflow),
                    swirl: swirl.unwrap_or(d.swirl),
                    c: c.unwrap_or(d.c),
                    extent: extent.unwrap_or(d.extent),
                    normalization: normalization.unwrap_or(d.normalization),
                };
                Metric { field: Box::new(gordon_vortex(p)?), closed_form: None }
            }
        })
    }
}

fn radial(p: RadialProfile) -> Metric {
    let (f, cf) = acoustic(p);
    Metric { field: Box::new(f), closed_form: Some(Box::new(cf)) }
}

#[derive(Debug, Deserialize)]
struct TableRow {
    rho: f64,
    a: f64,
    b: f64,
}

fn read_table(path: &Path) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot read profile table {}", path.display()))?;
    let (mut rho, mut a, mut b) = (Vec::new(), Vec::new(), Vec::new());
    for (i, row) in rdr.deserialize::<TableRow>().enumerate() {
        let row = row.with_context(|| format!("{}: bad row {}", path.display(), i + 2))?;
        rho.push(row.rho);
        a.push(row.a);
        b.push(row.b);
    }
    if rho.len() < 2 {
        bail!("{}: a profile table needs at least two rows", path.display());
    }
    Ok((rho, a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_presets_and_sections() {
        let l = parse(
            "[metric]\npreset = \"acoustic\"\na = { kind = \"polynomial\", coeffs = [-3.0, 1.0] }\nb = 0.5\n\
             rho_min = 0.5\nrho_max = 3.0\n[integration]\nmax_step = 0.1\n[sweep]\nparameter = \"b\"\nvalues = [0.1]\n",
            Path::new("."),
        )
        .unwrap();
        assert_eq!(l.config.integration.max_step, 0.1);
        assert!(l.config.metric.build(Path::new(".")).unwrap().closed_form.is_some());
    }

    #[test]
    fn unknown_keys_are_rejected_with_location() {
        let err = parse("[metric]\npreset = \"kerr-equatorial\"\nm = 1.0\na = 0.5\nspin = 2\n", Path::new("."))
            .err()
            .unwrap();
        let msg = format!("{err:#}");
        assert!(msg.contains("spin"), "{msg}");
        assert!(msg.contains("line 5"), "{msg}");
        assert!(parse("[metric]\npreset = \"kerr-equatorial\"\nm = 1\na = 0.5\n[census]\nseeds = 3\n", Path::new("."))
            .is_err());
    }

    #[test]
    fn invariant_violation_names_the_rule() {
        let l = parse("[metric]\npreset = \"kerr-equatorial\"\nm = 1.0\na = 1.5\n", Path::new(".")).unwrap();
        let msg = format!("{:#}", l.config.metric.build(Path::new(".")).err().unwrap());
        assert!(msg.contains("a <= m"), "{msg}");
    }

    #[test]
    fn sweep_edits_reparse() {
        let l = parse(
            "[metric]\npreset = \"kerr-equatorial\"\nm = 1.0\na = 0.5\n[sweep]\nparameter = \"a\"\nvalues = [0.9]\n",
            Path::new("."),
        )
        .unwrap();
        let mut t = l.metric_table.clone();
        t.insert("a".into(), toml::Value::Float(0.9));
        assert!(matches!(metric_from_table(&t).unwrap(), MetricConfig::KerrEquatorial { a, .. } if a == 0.9));
    }
}
