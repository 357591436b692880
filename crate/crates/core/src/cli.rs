//! Command-line front end.
//!
//! Exit status: 0 on success, 1 on usage errors, 2 on data or validation
//! errors. Reports go to the output stream; diagnostics go to the error
//! stream. Input paths written as `@name` resolve to `name` inside the
//! fixture directory (`RCF_FIXTURE_DIR`, default `fixtures/`).
//!
//! `--format text` emits one JSON document per run with fixed field names;
//! `--format csv` emits a header row and one row per record. Floats are
//! printed in shortest round-trip form in both.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::dataset::{
    self, parse_dataset, summarize_records, test_group_difference, test_mean_nonzero,
    test_time_trend, DatasetSummary, GroupBy, InaccuracyKind, ProjectRecord, ProjectType, Region,
};
use crate::error::{Error, Result};
use crate::forecast::{
    default_risk_grid, reference_class_forecast, uplift_schedule, DEFAULT_COVERAGE,
};
use crate::refclass::{
    self, bootstrap_ci, build_reference_class, BootstrapStatistic, ClassFilter, ReferenceClass,
};
use crate::unfittest::{run_experiment, ExperimentConfig, SelectionRule};
use crate::viability::{monte_carlo_viability, AppraisalInput, Marginal, RealizationModel};
use crate::DEFAULT_SEED;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Text,
}

#[derive(Debug, Parser)]
#[command(
    name = "rcf",
    version,
    about = "Reference class forecasting and risk due diligence for major projects"
)]
pub struct Cli {
    /// Output format; each subcommand has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// More diagnostics on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a project dataset and count its records.
    Ingest {
        #[arg(long)]
        data: PathBuf,
    },
    /// Descriptive statistics and t-tests of forecast inaccuracy.
    Stats(StatsArgs),
    /// Build a reference class and export it or its distribution.
    Class(ClassArgs),
    /// Required uplift as a function of acceptable overrun risk.
    Uplift {
        #[arg(long)]
        class: PathBuf,
        /// Comma-separated risks; defaults to 0.01, 0.02, ..., 1.00.
        #[arg(long, value_delimiter = ',')]
        risk: Vec<f64>,
        /// Also report absolute uplifts on this base estimate.
        #[arg(long)]
        base: Option<f64>,
    },
    /// Reference class forecast for one base estimate.
    Forecast {
        #[arg(long)]
        base: f64,
        #[arg(long)]
        risk: f64,
        #[arg(long, default_value_t = DEFAULT_COVERAGE)]
        coverage: f64,
        #[arg(long)]
        class: PathBuf,
    },
    /// Monte Carlo due diligence of a cost-benefit appraisal.
    Duediligence(DueDiligenceArgs),
    /// Funding competition between biased appraisals.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Dataset file (repeatable; records are pooled).
    #[arg(long, required = true)]
    pub data: Vec<PathBuf>,
    /// cost, traffic or all.
    #[arg(long, default_value = "all")]
    pub kind: String,
    /// all, type, region or type,region.
    #[arg(long, default_value = "type")]
    pub group_by: String,
    #[arg(long, default_value_t = dataset::summary::DEFAULT_BAND_HALFWIDTH)]
    pub band: f64,
    /// Drop observations with robust z-score above 3 (listed in the output).
    #[arg(long)]
    pub exclude_outliers: bool,
}

#[derive(Debug, Args)]
pub struct ClassArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "cost")]
    pub kind: String,
    /// Comma-separated project types; empty matches all.
    #[arg(long, value_delimiter = ',')]
    pub types: Vec<ProjectType>,
    /// Comma-separated regions; empty matches all.
    #[arg(long, value_delimiter = ',')]
    pub regions: Vec<Region>,
    /// Inclusive decision-year range `MIN:MAX`.
    #[arg(long)]
    pub years: Option<String>,
    #[arg(long, default_value_t = refclass::DEFAULT_MIN_SIZE)]
    pub min_size: usize,
    /// class, quantiles, histogram or summary.
    #[arg(long, default_value = "class")]
    pub emit: String,
    #[arg(long, default_value_t = 10)]
    pub bins: usize,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long, default_value_t = 2000)]
    pub replicates: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct DueDiligenceArgs {
    #[arg(long)]
    pub appraisal: PathBuf,
    /// Cost overrun class (`project_id,value`).
    #[arg(long)]
    pub cost_class: Option<PathBuf>,
    /// Traffic inaccuracy class (`project_id,value`).
    #[arg(long)]
    pub benefit_class: Option<PathBuf>,
    /// Dataset of projects with both cost and traffic outturns; draws whole
    /// pairs instead of independent marginals.
    #[arg(long)]
    pub paired: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub pool: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub slots: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated: naive, rcf, true.
    #[arg(long, value_delimiter = ',')]
    pub policy: Vec<SelectionRule>,
    /// TOML experiment configuration; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Parses `args` and runs the command. Returns the process exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    1
                }
            };
        }
    };
    match dispatch(&cli, out) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            let _ = writeln!(err, "Try 'rcf --help' for usage.");
            1
        }
        Err(CliError::Data(e)) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Data(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(Error::Io {
            path: PathBuf::from("<output>"),
            source: e,
        })
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Data(Error::Csv(e))
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Resolves `@name` against the fixture directory.
pub fn resolve(path: &std::path::Path) -> PathBuf {
    match path.to_str().and_then(|s| s.strip_prefix('@')) {
        Some(name) => crate::fixtures::fixture_dir().join(name),
        None => path.to_path_buf(),
    }
}

fn open(path: &std::path::Path) -> Result<BufReader<File>> {
    let resolved = resolve(path);
    File::open(&resolved)
        .map(BufReader::new)
        .map_err(|source| Error::Io {
            path: resolved,
            source,
        })
}

fn load_dataset(path: &std::path::Path) -> Result<Vec<ProjectRecord>> {
    parse_dataset(open(path)?)
}

fn load_class(path: &std::path::Path, kind: InaccuracyKind) -> Result<ReferenceClass> {
    let label = path.display().to_string();
    refclass::io::read_class(open(path)?, kind, label.trim_start_matches('@'))
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> CliResult<()> {
    serde_json::to_writer_pretty(&mut *out, value)
        .map_err(|e| CliError::Data(Error::config(e.to_string())))?;
    writeln!(out)?;
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn parse_kinds(kind: &str) -> CliResult<Vec<InaccuracyKind>> {
    if kind == "all" {
        return Ok(vec![
            InaccuracyKind::CostOverrun,
            InaccuracyKind::TrafficInaccuracy,
        ]);
    }
    kind.parse::<InaccuracyKind>()
        .map(|k| vec![k])
        .map_err(usage)
}

fn parse_years(s: &str) -> CliResult<(i32, i32)> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| usage(format!("--years expects MIN:MAX, got `{s}`")))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<i32>()
            .map_err(|e| usage(format!("--years: {e}")))
    };
    Ok((parse(lo)?, parse(hi)?))
}

pub fn dispatch(cli: &Cli, out: &mut dyn Write) -> CliResult<()> {
    match &cli.command {
        Command::Ingest { data } => ingest(data, cli.format.unwrap_or(Format::Text), out),
        Command::Stats(args) => stats(args, cli.format.unwrap_or(Format::Csv), out),
        Command::Class(args) => class(args, cli.format.unwrap_or(Format::Csv), out),
        Command::Uplift { class, risk, base } => {
            uplift(class, risk, *base, cli.format.unwrap_or(Format::Csv), out)
        }
        Command::Forecast {
            base,
            risk,
            coverage,
            class,
        } => forecast(
            *base,
            *risk,
            *coverage,
            class,
            cli.format.unwrap_or(Format::Text),
            out,
        ),
        Command::Duediligence(args) => duediligence(args, cli.format.unwrap_or(Format::Text), out),
        Command::Simulate(args) => simulate(args, cli.format.unwrap_or(Format::Csv), out),
    }
}

#[derive(Serialize)]
struct IngestRow {
    project_type: ProjectType,
    region: Region,
    n: usize,
    with_cost_outturn: usize,
    with_traffic: usize,
}

fn ingest(data: &std::path::Path, format: Format, out: &mut dyn Write) -> CliResult<()> {
    let records = load_dataset(data)?;
    let mut groups: BTreeMap<(ProjectType, Region), IngestRow> = BTreeMap::new();
    for r in &records {
        let row = groups
            .entry((r.project_type, r.region))
            .or_insert(IngestRow {
                project_type: r.project_type,
                region: r.region,
                n: 0,
                with_cost_outturn: 0,
                with_traffic: 0,
            });
        row.n += 1;
        row.with_cost_outturn += r.has_outturn() as usize;
        row.with_traffic += r.has_traffic() as usize;
    }
    let rows: Vec<IngestRow> = groups.into_values().collect();
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record([
                "project_type",
                "region",
                "n",
                "with_cost_outturn",
                "with_traffic",
            ])?;
            for r in &rows {
                w.write_record([
                    r.project_type.to_string(),
                    r.region.to_string(),
                    r.n.to_string(),
                    r.with_cost_outturn.to_string(),
                    r.with_traffic.to_string(),
                ])?;
            }
            w.flush()?;
        }
        Format::Text => write_json(
            out,
            &json!({
                "source": data.display().to_string(),
                "records": records.len(),
                "with_cost_outturn": records.iter().filter(|r| r.has_outturn()).count(),
                "with_traffic": records.iter().filter(|r| r.has_traffic()).count(),
                "groups": rows,
            }),
        )?,
    }
    Ok(())
}

#[derive(Serialize)]
struct StatsRow {
    #[serde(flatten)]
    summary: DatasetSummary,
    mean_nonzero: Option<dataset::TestResult>,
    time_trend: Option<dataset::TestResult>,
}

fn stats(args: &StatsArgs, format: Format, out: &mut dyn Write) -> CliResult<()> {
    let group_by: GroupBy = args.group_by.parse().map_err(usage)?;
    let kinds = parse_kinds(&args.kind)?;
    let mut records = Vec::new();
    for path in &args.data {
        records.extend(load_dataset(path)?);
    }
    let years: BTreeMap<&str, i32> = records
        .iter()
        .map(|r| (r.id.as_str(), r.decision_year))
        .collect();

    let mut rows = Vec::new();
    let mut pairwise = Vec::new();
    for kind in kinds {
        let summaries =
            summarize_records(&records, kind, group_by, args.band, args.exclude_outliers);
        let obs = dataset::observations(&records, kind);
        let mut group_values: Vec<(String, Vec<f64>)> = Vec::new();
        for s in summaries {
            let members: Vec<&dataset::InaccuracyObservation> = obs
                .iter()
                .filter(|o| {
                    let rec = records
                        .iter()
                        .find(|r| r.id == o.project_id)
                        .expect("observation from records");
                    group_by.key(rec) == s.group && !s.excluded.contains(&o.project_id)
                })
                .collect();
            let values: Vec<f64> = members.iter().map(|o| o.value).collect();
            let points: Vec<(i32, f64)> = members
                .iter()
                .map(|o| (years[o.project_id.as_str()], o.value))
                .collect();
            group_values.push((s.group.to_string(), values.clone()));
            rows.push(StatsRow {
                mean_nonzero: test_mean_nonzero(&values).ok(),
                time_trend: test_time_trend(&points).ok(),
                summary: s,
            });
        }
        for i in 0..group_values.len() {
            for j in i + 1..group_values.len() {
                if let Ok(t) = test_group_difference(&group_values[i].1, &group_values[j].1) {
                    pairwise.push(json!({
                        "kind": kind,
                        "group_a": group_values[i].0,
                        "group_b": group_values[j].0,
                        "test": t,
                    }));
                }
            }
        }
    }

    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record([
                "kind",
                "group",
                "n",
                "mean",
                "std_dev",
                "std_dev_defined",
                "share_with_overrun",
                "share_outside_band",
                "band_halfwidth",
                "t_statistic",
                "p_value",
                "reject_at_5pct",
                "trend_slope",
                "trend_p_value",
                "excluded",
            ])?;
            for r in &rows {
                let s = &r.summary;
                w.write_record([
                    s.kind.to_string(),
                    s.group.to_string(),
                    s.n.to_string(),
                    s.mean.to_string(),
                    s.std_dev.to_string(),
                    s.std_dev_defined.to_string(),
                    s.share_with_overrun.to_string(),
                    s.share_outside_band.to_string(),
                    s.band_halfwidth.to_string(),
                    fmt_opt(r.mean_nonzero.as_ref().map(|t| t.statistic)),
                    fmt_opt(r.mean_nonzero.as_ref().map(|t| t.p_value)),
                    r.mean_nonzero
                        .as_ref()
                        .map(|t| t.reject_at_5pct.to_string())
                        .unwrap_or_default(),
                    fmt_opt(r.time_trend.as_ref().map(|t| t.estimate)),
                    fmt_opt(r.time_trend.as_ref().map(|t| t.p_value)),
                    s.excluded.join(";"),
                ])?;
            }
            w.flush()?;
        }
        Format::Text => write_json(
            out,
            &json!({
                "sources": args.data.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
                "group_by": args.group_by,
                "band_halfwidth": args.band,
                "exclude_outliers": args.exclude_outliers,
                "groups": rows,
                "group_differences": pairwise,
            }),
        )?,
    }
    Ok(())
}

fn class(args: &ClassArgs, format: Format, out: &mut dyn Write) -> CliResult<()> {
    let kind: InaccuracyKind = args.kind.parse().map_err(usage)?;
    let mut filter = ClassFilter::types(args.types.iter().copied())
        .with_regions(args.regions.iter().copied())
        .with_min_size(args.min_size);
    if let Some(y) = &args.years {
        let (lo, hi) = parse_years(y)?;
        filter = filter.with_years(lo, hi);
    }
    filter.validate().map_err(|e| usage(e.to_string()))?;
    let records = load_dataset(&args.data)?;
    let class = build_reference_class(&records, &filter, kind, &args.data.display().to_string())?;
    let dist = class.distribution()?;

    match (args.emit.as_str(), format) {
        ("class", Format::Csv) => refclass::io::write_class(&class, out)?,
        ("quantiles", Format::Csv) => refclass::io::write_quantile_grid(&dist, out)?,
        ("histogram", Format::Csv) => refclass::io::write_histogram(&dist, args.bins, out)?,
        ("class", Format::Text) => write_json(
            out,
            &json!({ "id": class.id(), "n": class.len(), "class": class }),
        )?,
        ("quantiles", Format::Text) => write_json(
            out,
            &json!({ "id": class.id(), "quantiles": dist.quantile_grid() }),
        )?,
        ("histogram", Format::Text) => write_json(
            out,
            &json!({ "id": class.id(), "histogram": dist.histogram(args.bins)? }),
        )?,
        ("summary", _) => {
            let mean_ci = bootstrap_ci(
                &dist,
                BootstrapStatistic::Mean,
                args.level,
                args.replicates,
                args.seed,
            )?;
            let median_ci = bootstrap_ci(
                &dist,
                BootstrapStatistic::Quantile(0.5),
                args.level,
                args.replicates,
                args.seed,
            )?;
            let median = dist.quantile(0.5)?;
            match format {
                Format::Text => write_json(
                    out,
                    &json!({
                        "id": class.id(),
                        "n": dist.len(),
                        "mean": dist.mean(),
                        "median": median,
                        "min": dist.min(),
                        "max": dist.max(),
                        "level": args.level,
                        "replicates": args.replicates,
                        "seed": args.seed,
                        "mean_ci": mean_ci,
                        "median_ci": median_ci,
                    }),
                )?,
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(out);
                    w.write_record([
                        "id",
                        "n",
                        "mean",
                        "median",
                        "min",
                        "max",
                        "level",
                        "mean_ci_lo",
                        "mean_ci_hi",
                        "median_ci_lo",
                        "median_ci_hi",
                    ])?;
                    w.write_record([
                        class.id(),
                        dist.len().to_string(),
                        dist.mean().to_string(),
                        median.to_string(),
                        dist.min().to_string(),
                        dist.max().to_string(),
                        args.level.to_string(),
                        mean_ci.0.to_string(),
                        mean_ci.1.to_string(),
                        median_ci.0.to_string(),
                        median_ci.1.to_string(),
                    ])?;
                    w.flush()?;
                }
            }
        }
        (other, _) => {
            return Err(usage(format!(
                "unknown --emit `{other}` (expected class, quantiles, histogram or summary)"
            )))
        }
    }
    Ok(())
}

fn uplift(
    path: &std::path::Path,
    risks: &[f64],
    base: Option<f64>,
    format: Format,
    out: &mut dyn Write,
) -> CliResult<()> {
    let class = load_class(path, InaccuracyKind::CostOverrun)?;
    let dist = class.distribution()?;
    let grid = if risks.is_empty() {
        default_risk_grid()
    } else {
        risks.to_vec()
    };
    let schedule = uplift_schedule(&dist, &grid, &class.id())?;
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            if base.is_some() {
                w.write_record(["risk", "uplift", "absolute_uplift"])?;
            } else {
                w.write_record(["risk", "uplift"])?;
            }
            for p in &schedule.points {
                let mut row = vec![p.acceptable_risk.to_string(), p.uplift.to_string()];
                if let Some(b) = base {
                    row.push((b * p.uplift / 100.0).to_string());
                }
                w.write_record(row)?;
            }
            w.flush()?;
        }
        Format::Text => {
            let monetized = base.map(|b| schedule.monetized(b));
            write_json(
                out,
                &json!({
                    "reference_class": schedule.source,
                    "n": dist.len(),
                    "base_estimate": base,
                    "points": schedule.points,
                    "absolute_uplifts": monetized,
                }),
            )?
        }
    }
    Ok(())
}

fn forecast(
    base: f64,
    risk: f64,
    coverage: f64,
    path: &std::path::Path,
    format: Format,
    out: &mut dyn Write,
) -> CliResult<()> {
    let class = load_class(path, InaccuracyKind::CostOverrun)?;
    let dist = class.distribution()?;
    let f = reference_class_forecast(base, &dist, risk, coverage, &class.id())?;
    match format {
        Format::Text => write_json(out, &f)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record([
                "reference_class",
                "n",
                "base_estimate",
                "acceptable_risk",
                "uplift",
                "adjusted_estimate",
                "median_uplift",
                "most_likely_estimate",
                "coverage",
                "interval_lo",
                "interval_hi",
            ])?;
            w.write_record([
                f.reference_class.clone(),
                f.n.to_string(),
                f.base_estimate.to_string(),
                f.acceptable_risk.to_string(),
                f.uplift.to_string(),
                f.adjusted_estimate.to_string(),
                f.median_uplift.to_string(),
                f.most_likely_estimate.to_string(),
                f.coverage.to_string(),
                f.interval.0.to_string(),
                f.interval.1.to_string(),
            ])?;
            w.flush()?;
        }
    }
    Ok(())
}

/// Reads the one-row appraisal file
/// `forecast_cost,forecast_annual_benefit,horizon_years,discount_rate`.
pub fn read_appraisal(path: &std::path::Path) -> Result<AppraisalInput> {
    let mut reader = csv::Reader::from_reader(open(path)?);
    let mut rows = reader.deserialize::<AppraisalInput>();
    let appraisal = rows
        .next()
        .ok_or_else(|| Error::MalformedRow {
            row: 1,
            field: "*".into(),
            message: "appraisal file has no data row".into(),
        })?
        .map_err(|e| Error::MalformedRow {
            row: 1,
            field: "*".into(),
            message: e.to_string(),
        })?;
    appraisal.validate()?;
    Ok(appraisal)
}

fn duediligence(args: &DueDiligenceArgs, format: Format, out: &mut dyn Write) -> CliResult<()> {
    let appraisal = read_appraisal(&args.appraisal)?;
    let (model, sources) = match (&args.paired, &args.cost_class, &args.benefit_class) {
        (Some(p), _, _) => {
            let records = load_dataset(p)?;
            let pairs = crate::fixtures::paired_outcomes(&records);
            if pairs.is_empty() {
                return Err(Error::config(format!(
                    "{}: no records with both cost and traffic outturns",
                    p.display()
                ))
                .into());
            }
            (
                RealizationModel::Paired(pairs),
                json!({ "paired": p.display().to_string() }),
            )
        }
        (None, Some(c), Some(b)) => {
            let cost = load_class(c, InaccuracyKind::CostOverrun)?.distribution()?;
            let traffic = load_class(b, InaccuracyKind::TrafficInaccuracy)?.distribution()?;
            (
                RealizationModel::Independent {
                    cost_overrun: Marginal::Empirical(cost),
                    traffic_inaccuracy: Marginal::Empirical(traffic),
                },
                json!({ "cost_class": c.display().to_string(), "benefit_class": b.display().to_string() }),
            )
        }
        _ => {
            return Err(usage(
                "duediligence needs --cost-class and --benefit-class, or --paired",
            ))
        }
    };
    let report = monte_carlo_viability(&appraisal, &model, args.samples, args.seed)?;
    match format {
        Format::Text => write_json(
            out,
            &json!({
                "appraisal": appraisal,
                "dependence": if args.paired.is_some() { "paired" } else { "independent" },
                "sources": sources,
                "report": report,
            }),
        )?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["field", "value"])?;
            let mut row = |k: &str, v: String| w.write_record([k, v.as_str()]);
            row("samples", report.samples.to_string())?;
            row("seed", report.seed.to_string())?;
            row("forecast_bcr", report.forecast_bcr.to_string())?;
            row("forecast_npv", report.forecast_npv.to_string())?;
            row("mean_cost_overrun", report.mean_cost_overrun.to_string())?;
            row(
                "mean_benefit_factor",
                report.mean_benefit_factor.to_string(),
            )?;
            row("mean_bcr", report.mean_bcr.to_string())?;
            for (q, v) in &report.bcr_quantiles {
                row(&format!("bcr_q{q}"), v.to_string())?;
            }
            for (q, v) in &report.npv_quantiles {
                row(&format!("npv_q{q}"), v.to_string())?;
            }
            row("irr_estimate", fmt_opt(report.irr_estimate))?;
            row("p_nonviable", report.p_nonviable.to_string())?;
            w.flush()?;
        }
    }
    Ok(())
}

fn simulate(args: &SimulateArgs, format: Format, out: &mut dyn Write) -> CliResult<()> {
    let mut config = match &args.config {
        Some(path) => {
            let resolved = resolve(path);
            let text = std::fs::read_to_string(&resolved).map_err(|source| Error::Io {
                path: resolved.clone(),
                source,
            })?;
            toml::from_str::<ExperimentConfig>(&text)
                .map_err(|e| Error::config(format!("{}: {e}", resolved.display())))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(v) = args.pool {
        config.pool_size = v;
    }
    if let Some(v) = args.trials {
        config.trials = v;
    }
    if let Some(v) = args.slots {
        config.budget_slots = v;
    }
    if let Some(v) = args.seed {
        config.seed = v;
    }
    if !args.policy.is_empty() {
        config.policies = args.policy.clone();
    }
    config.validate().map_err(|e| usage(e.to_string()))?;
    let report = run_experiment(&config)?;
    match format {
        Format::Text => write_json(out, &json!({ "config": config, "report": report }))?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record([
                "policy",
                "trials",
                "mean_realized_bcr_funded",
                "ci_lo",
                "ci_hi",
                "mean_regret",
                "gap_vs_naive",
                "gap_ci_lo",
                "gap_ci_hi",
                "gap_significant",
                "share_naive_below",
            ])?;
            for p in &report.policies {
                let gap = report
                    .naive_vs_rcf
                    .as_ref()
                    .filter(|_| p.policy == SelectionRule::RcfAdjustedBcr);
                w.write_record([
                    p.policy.as_str().to_string(),
                    p.trials.to_string(),
                    p.mean_realized_bcr_funded.to_string(),
                    p.ci_lo.to_string(),
                    p.ci_hi.to_string(),
                    p.mean_regret.to_string(),
                    fmt_opt(gap.map(|g| g.mean_gap)),
                    fmt_opt(gap.map(|g| g.ci_lo)),
                    fmt_opt(gap.map(|g| g.ci_hi)),
                    gap.map(|g| g.significant.to_string()).unwrap_or_default(),
                    fmt_opt(gap.map(|g| g.share_worse_below)),
                ])?;
            }
            w.flush()?;
        }
    }
    Ok(())
}
