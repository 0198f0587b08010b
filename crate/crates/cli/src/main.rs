//! `ergoflow`: horizon censuses, trajectory traces, phase portraits and
//! parameter sweeps for stationary 2+1 metrics.
//!
//! Exit codes: 0 success, 2 when the metric has no annular ergoregion or a
//! partially characteristic ergosphere (the verdict is still written), 1 on
//! any other error.

mod config;
mod portrait;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use ergoflow::flow::{integrate, Direction, IntegrationOptions};
use ergoflow::horizon::{census, CensusOptions, CensusReport, HorizonError};
use ergoflow::report::CensusDocument;
use ergoflow::{Branch, Chart, SpatialPoint};
use rayon::prelude::*;

use config::{load, metric_from_table, Loaded, Metric};

#[derive(Parser)]
#[command(name = "ergoflow", version, about = "Zero-energy null flows and horizons of stationary 2+1 metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Horizon census; writes census.json.
    Scan(Common),
    /// One trajectory; writes trace.csv.
    Trace(TraceArgs),
    /// Phase portrait of a polar-chart metric; writes portrait.svg.
    Portrait(Common),
    /// Census over a grid of one metric parameter; writes sweep.csv.
    Sweep(SweepArgs),
    /// Checks a run config (TOML) or a census document (JSON).
    Validate(ValidateArgs),
}

#[derive(Args)]
struct Common {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory (default: `out` from the config, else the current directory).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TraceArgs {
    #[command(flatten)]
    common: Common,
    /// Start point in chart coordinates, e.g. "1.5,0" for (ρ, φ).
    #[arg(long, value_name = "X1,X2")]
    seed: Option<String>,
    #[arg(long, value_name = "plus|minus")]
    branch: Option<Branch>,
    #[arg(long, value_name = "fwd|bwd")]
    direction: Option<Direction>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if is_out_of_scope(&e) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn is_out_of_scope(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        matches!(
            c.downcast_ref::<HorizonError>(),
            Some(HorizonError::WrongRootCount { .. } | HorizonError::MixedCharacter { .. })
        )
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Scan(c) => cmd_scan(&c),
        Command::Trace(t) => cmd_trace(&t),
        Command::Portrait(c) => cmd_portrait(&c),
        Command::Sweep(s) => cmd_sweep(&s),
        Command::Validate(v) => cmd_validate(&v.config),
    }
}

fn out_dir(common: &Common, loaded: &Loaded) -> Result<PathBuf> {
    let dir = match (&common.out, &loaded.config.out) {
        (Some(d), _) => d.clone(),
        (None, Some(d)) => loaded.dir.join(d),
        (None, None) => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
    Ok(dir)
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn build(loaded: &Loaded) -> Result<Metric> {
    loaded.config.metric.build(&loaded.dir).context("invalid metric")
}

fn run_census(m: &Metric, opts: &CensusOptions) -> Result<CensusReport, HorizonError> {
    census(m.field.as_ref(), m.closed_form.as_deref(), opts)
}

fn metric_json(loaded: &Loaded) -> Result<serde_json::Value> {
    Ok(serde_json::to_value(&loaded.metric_table)?)
}

fn cmd_scan(c: &Common) -> Result<()> {
    let loaded = load(&c.config)?;
    let metric = build(&loaded)?;
    let dir = out_dir(c, &loaded)?;
    let path = dir.join("census.json");
    match run_census(&metric, &loaded.config.census) {
        Ok(rep) => {
            let summary = format!("{} plus, {} minus horizons", rep.horizons_plus.len(), rep.horizons_minus.len());
            write(&path, &CensusDocument::ok(metric_json(&loaded)?, rep).to_json()?)?;
            println!("{summary}");
            Ok(())
        }
        Err(e) => {
            if let Some(doc) = CensusDocument::out_of_scope(metric_json(&loaded)?, &e) {
                write(&path, &doc.to_json()?)?;
            }
            Err(e).context("census failed")
        }
    }
}

fn parse_seed(s: &str) -> Result<[f64; 2]> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        bail!("seed must be two comma-separated numbers, got {s:?}");
    }
    let x1 = parts[0].parse().with_context(|| format!("bad seed coordinate {:?}", parts[0]))?;
    let x2 = parts[1].parse().with_context(|| format!("bad seed coordinate {:?}", parts[1]))?;
    Ok([x1, x2])
}

fn cmd_trace(t: &TraceArgs) -> Result<()> {
    let loaded = load(&t.common.config)?;
    let metric = build(&loaded)?;
    let tc = &loaded.config.trace;
    let seed = match (&t.seed, tc.seed) {
        (Some(s), _) => parse_seed(s)?,
        (None, Some(s)) => s,
        (None, None) => bail!("no seed: pass --seed or set [trace] seed"),
    };
    let branch = t.branch.or(tc.branch).unwrap_or(Branch::Plus);
    let direction = t.direction.or(tc.direction).unwrap_or(Direction::Forward);
    let x0 = SpatialPoint::new(seed[0], seed[1]);
    let tr = integrate(metric.field.as_ref(), branch, x0, direction, &loaded.config.integration)
        .context("seed rejected")?;
    let dir = out_dir(&t.common, &loaded)?;
    write(&dir.join("trace.csv"), &tr.to_csv())?;
    println!("{} samples, {}", tr.samples.len(), tr.termination);
    Ok(())
}

fn cmd_portrait(c: &Common) -> Result<()> {
    let loaded = load(&c.config)?;
    let metric = build(&loaded)?;
    if metric.field.chart() != Chart::Polar {
        bail!("portraits need a polar-chart metric");
    }
    let report = run_census(&metric, &loaded.config.census).context("census failed")?;
    let pc = &loaded.config.portrait;
    let opts = IntegrationOptions { max_time: pc.max_time, ..loaded.config.integration };
    let mut runs = Vec::new();
    for s in &pc.seeds {
        for &b in &pc.branches {
            for &d in &pc.directions {
                runs.push((SpatialPoint::polar(s[0], s[1]), b, d));
            }
        }
    }
    let trajectories = runs
        .par_iter()
        .map(|&(x, b, d)| integrate(metric.field.as_ref(), b, x, d, &opts).with_context(|| format!("seed ({}, {})", x.x1, x.x2)))
        .collect::<Result<Vec<_>>>()?;
    let dir = out_dir(c, &loaded)?;
    write(&dir.join("portrait.svg"), &portrait::render(pc, &report, &trajectories))
}

struct SweepRow {
    value: f64,
    result: Result<CensusReport>,
}

fn join<T: std::fmt::Display>(v: impl Iterator<Item = T>) -> String {
    v.map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

fn cmd_sweep(s: &SweepArgs) -> Result<()> {
    let loaded = load(&s.common.config)?;
    let Some(sweep) = loaded.config.sweep.clone() else { bail!("missing [sweep] table") };
    let workers = s.workers.or(sweep.workers);
    if workers == Some(0) {
        bail!("--workers must be positive");
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        pool = pool.num_threads(n);
    }
    let pool = pool.build()?;
    let row = |value: f64| -> Result<CensusReport> {
        let mut table = loaded.metric_table.clone();
        table.insert(sweep.parameter.clone(), toml::Value::Float(value));
        let metric = metric_from_table(&table)?.build(&loaded.dir)?;
        Ok(run_census(&metric, &loaded.config.census)?)
    };
    let rows: Vec<SweepRow> =
        pool.install(|| sweep.values.par_iter().map(|&value| SweepRow { value, result: row(value) }).collect());

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        sweep.parameter.as_str(),
        "plus_count",
        "minus_count",
        "plus_radii",
        "minus_radii",
        "plus_multiplicity",
        "minus_multiplicity",
        "error",
    ])?;
    for r in &rows {
        let v = r.value.to_string();
        match &r.result {
            Ok(rep) => {
                let (p, m) = (&rep.horizons_plus, &rep.horizons_minus);
                w.write_record([
                    v,
                    p.len().to_string(),
                    m.len().to_string(),
                    join(p.iter().map(|h| h.radius)),
                    join(m.iter().map(|h| h.radius)),
                    join(p.iter().map(|h| h.multiplicity)),
                    join(m.iter().map(|h| h.multiplicity)),
                    String::new(),
                ])?;
            }
            Err(e) => {
                let blank = String::new;
                w.write_record([v, blank(), blank(), blank(), blank(), blank(), blank(), format!("{e:#}")])?;
            }
        }
    }
    let text = String::from_utf8(w.into_inner()?)?;
    let dir = out_dir(&s.common, &loaded)?;
    write(&dir.join("sweep.csv"), &text)?;
    let failed = rows.iter().filter(|r| r.result.is_err()).count();
    println!("{} rows, {failed} with errors", rows.len());
    Ok(())
}

fn cmd_validate(path: &Path) -> Result<()> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    if text.trim_start().starts_with('{') {
        let doc = CensusDocument::from_json(&text).with_context(|| format!("{} is not a valid census", path.display()))?;
        let n = doc.report.as_ref().map_or(0, |r| r.horizons_plus.len() + r.horizons_minus.len());
        println!("valid census document ({:?}, {n} horizons)", doc.status);
    } else {
        let loaded = load(path)?;
        build(&loaded)?;
        println!("valid config");
    }
    Ok(())
}
