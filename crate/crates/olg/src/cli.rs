//! Argument parsing and the six subcommands.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use olg_core::calibration::{calibrate, CalibrationOptions};
use olg_core::experiments::{
    prepare_cell, run_rollover, run_scenarios, run_transfer_grid, welfare_range, AxisRange, CellStatus, RolloverRun,
    ScenarioBundle, ScenarioSpec, Variation, WelfareGridCell,
};
use olg_core::ingest::{Alignment, SeriesKind, Units};
use olg_core::Technology;

use crate::config::RunConfig;
use crate::ingest_io;
use crate::table::{format_g10, Table, Value};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "olg",
    version,
    about = "Stochastic overlapping-generations model: calibration, transfer-welfare grids, debt rollovers and rate ingestion"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Parameter bundle: original or indonesia.
    #[arg(long, global = true)]
    pub bundle: Option<String>,
    /// TOML config file; replaces the bundle.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads. Results do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output directory (also settable through OLG_OUTPUT_DIR).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Production: linear, cobb-douglas, or an elasticity of substitution.
    #[arg(long, global = true)]
    pub technology: Option<String>,
    /// Capital share parameter.
    #[arg(long, global = true)]
    pub b: Option<f64>,
    /// Standard deviation of log productivity.
    #[arg(long, global = true)]
    pub sigma: Option<f64>,
    /// Endowment of the young as a fraction of the average wage.
    #[arg(long, global = true)]
    pub endowment_fraction: Option<f64>,
    /// Fraction of transfers reaching the old.
    #[arg(long, global = true)]
    pub old_share: Option<f64>,
    /// Periods simulated for steady-state moments.
    #[arg(long, global = true)]
    pub steady_realizations: Option<usize>,
    /// Print the resolved config as TOML and exit.
    #[arg(long, global = true)]
    pub print_config: bool,
}

#[derive(Debug, Args)]
pub struct TargetArgs {
    /// Safe rate minus growth, percent per year.
    #[arg(long, allow_hyphen_values = true)]
    pub safe: Option<f64>,
    /// Expected risky rate minus growth, percent per year.
    #[arg(long, allow_hyphen_values = true)]
    pub risky: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Safe axis as start:stop:step.
    #[arg(long, allow_hyphen_values = true)]
    pub safe_range: Option<String>,
    /// Risky axis as start:stop:step.
    #[arg(long, allow_hyphen_values = true)]
    pub risky_range: Option<String>,
    /// Transfer sizes as fractions of mean saving, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub fractions: Option<Vec<f64>>,
    /// Periods simulated per cell and transfer size.
    #[arg(long)]
    pub realizations: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RolloverArgs {
    /// Number of simulated paths
    #[arg(long)]
    pub paths: Option<usize>,
    /// Generations per path, starting with the issuing one
    #[arg(long)]
    pub generations: Option<usize>,
    /// Initial debt as a fraction of mean saving.
    #[arg(long)]
    pub initial_debt: Option<f64>,
    /// Failure when debt exceeds this multiple of the initial debt.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Debt after a failure, as a multiple of the initial debt.
    #[arg(long)]
    pub reset_level: Option<f64>,
    /// Pay debt off entirely on failure.
    #[arg(long)]
    pub full_payoff: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AlignmentArg {
    Annual,
    Monthly,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum UnitsArg {
    Percent,
    Fraction,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit risk aversion and the risky-return level to rate targets.
    Calibrate {
        #[command(flatten)]
        targets: TargetArgs,
    },
    /// Calibrate and report no-transfer steady-state moments.
    SteadyState {
        #[command(flatten)]
        targets: TargetArgs,
    },
    /// Welfare change from a pay-as-you-go transfer over a grid of targets.
    TransferGrid {
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Monte Carlo paths of a one-off debt issuance rolled over.
    Rollover {
        #[command(flatten)]
        targets: TargetArgs,
        #[command(flatten)]
        rollover: RolloverArgs,
    },
    /// Base runs and one-parameter variations on common random numbers.
    Scenarios {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        rollover: RolloverArgs,
        /// Variation as kind=value, e.g. capital-share=0.5. Repeatable;
        /// replaces the configured set.
        #[arg(long = "variation")]
        variations: Vec<String>,
        /// Skip the transfer-grid half of each scenario
        #[arg(long)]
        no_grid: bool,
        /// Skip the rollover half of each scenario
        #[arg(long)]
        no_rollover: bool,
    },
    /// Rate-growth differential statistics and calibration ranges.
    Ingest {
        /// Government bond yields (date,value).
        #[arg(long)]
        safe_yield: Option<PathBuf>,
        /// Lending rates (date,value).
        #[arg(long)]
        lending_rate: Option<PathBuf>,
        /// Nominal growth (date,value).
        #[arg(long)]
        growth: Option<PathBuf>,
        /// Margin added to the maximum, percentage points.
        #[arg(long, allow_hyphen_values = true)]
        margin: Option<f64>,
        /// Grain used for the ranges.
        #[arg(long, value_enum)]
        alignment: Option<AlignmentArg>,
        /// Units of the input values; ingest checks them for plausibility.
        #[arg(long, value_enum, default_value = "percent")]
        units: UnitsArg,
    },
}

/// Files written and, for partial results, the failure that followed.
#[derive(Debug)]
pub struct Outcome {
    pub written: Vec<PathBuf>,
    pub failure: Option<CliError>,
}

/// Parses arguments, runs, reports, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(outcome) => {
            for p in &outcome.written {
                println!("{}", p.display());
            }
            match outcome.failure {
                Some(e) => {
                    eprintln!("error: {e}");
                    e.exit_code()
                }
                None => 0,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn parse_technology(text: &str) -> Result<Technology, CliError> {
    match text {
        "linear" => Ok(Technology::Linear),
        "cobb-douglas" => Ok(Technology::CobbDouglas),
        other => {
            let eta: f64 = other.parse().map_err(|_| {
                CliError::Usage(format!(
                    "technology '{other}' is not linear, cobb-douglas or a number"
                ))
            })?;
            Technology::from_eta(eta).map_err(CliError::from)
        }
    }
}

pub fn parse_axis(text: &str) -> Result<AxisRange, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let nums: Result<Vec<f64>, _> = parts.iter().map(|p| p.trim().parse::<f64>()).collect();
    match nums {
        Ok(v) if v.len() == 3 => Ok(AxisRange::new(v[0], v[1], v[2])?),
        _ => Err(CliError::Usage(format!("axis '{text}' must be start:stop:step"))),
    }
}

pub fn parse_variation(text: &str) -> Result<Variation, CliError> {
    let (kind, value) = text
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("variation '{text}' must be kind=value")))?;
    let v: f64 = value
        .parse()
        .map_err(|_| CliError::Usage(format!("variation value '{value}' is not a number")))?;
    Ok(match kind {
        "endowment-fraction" => Variation::EndowmentFraction(v),
        "capital-share" => Variation::CapitalShare(v),
        "old-share" => Variation::OldShare(v),
        "failure-threshold" => Variation::FailureThreshold(v),
        _ => {
            return Err(CliError::Usage(format!(
                "unknown variation '{kind}', expected endowment-fraction, capital-share, old-share or failure-threshold"
            )))
        }
    })
}

/// Base config from `--config` or `--bundle`, then flag overrides.
pub fn resolve_config(common: &CommonArgs) -> Result<RunConfig, CliError> {
    let mut c = match (&common.config, &common.bundle) {
        (Some(_), Some(_)) => return Err(CliError::Usage("--config and --bundle are mutually exclusive".into())),
        (Some(path), None) => RunConfig::load(path)?,
        (None, Some(name)) => RunConfig::bundle(name)?,
        (None, None) => RunConfig::original(),
    };
    if let Some(s) = common.seed {
        c.master_seed = s;
    }
    if let Some(w) = common.workers {
        c.workers = w;
    }
    if let Some(o) = &common.out {
        c.output_dir = o.clone();
    }
    if let Some(t) = &common.technology {
        c.economy.technology = parse_technology(t)?;
    }
    if let Some(b) = common.b {
        c.economy.b = b;
    }
    if let Some(s) = common.sigma {
        c.economy.sigma = s;
    }
    if let Some(e) = common.endowment_fraction {
        c.economy.endowment_fraction = e;
    }
    if let Some(o) = common.old_share {
        c.economy.old_share = o;
    }
    if let Some(n) = common.steady_realizations {
        c.steady.realizations = n;
    }
    if c.workers == 0 {
        return Err(CliError::Usage("--workers must be at least 1".into()));
    }
    c.economy.base_params().validate()?;
    Ok(c)
}

fn apply_targets(c: &mut RunConfig, t: &TargetArgs) -> Result<(), CliError> {
    if let Some(s) = t.safe {
        c.targets.safe_annual = s;
    }
    if let Some(r) = t.risky {
        c.targets.risky_annual = r;
    }
    c.targets.validate()?;
    Ok(())
}

fn apply_grid(c: &mut RunConfig, g: &GridArgs) -> Result<(), CliError> {
    if let Some(s) = &g.safe_range {
        c.grid.safe = parse_axis(s)?;
    }
    if let Some(r) = &g.risky_range {
        c.grid.risky = parse_axis(r)?;
    }
    if let Some(f) = &g.fractions {
        c.grid.transfer_fractions = f.clone();
    }
    if let Some(n) = g.realizations {
        c.grid.realizations = n;
    }
    c.transfer_grid_spec().validate()?;
    Ok(())
}

fn apply_rollover(c: &mut RunConfig, r: &RolloverArgs) -> Result<(), CliError> {
    let rc = &mut c.rollover;
    if let Some(p) = r.paths {
        rc.paths = p;
    }
    if let Some(g) = r.generations {
        rc.generations = g;
    }
    if let Some(d) = r.initial_debt {
        rc.initial_debt_fraction = d;
    }
    if let Some(t) = r.threshold {
        rc.failure_threshold = t;
    }
    if let Some(l) = r.reset_level {
        rc.post_failure_level = l;
    }
    if r.full_payoff {
        rc.full_payoff = true;
    }
    c.rollover_spec().validate()?;
    Ok(())
}

pub fn run(cli: Cli) -> Result<Outcome, CliError> {
    let mut c = resolve_config(&cli.common)?;
    match &cli.command {
        Command::Calibrate { targets } | Command::SteadyState { targets } => apply_targets(&mut c, targets)?,
        Command::TransferGrid { grid } => apply_grid(&mut c, grid)?,
        Command::Rollover { targets, rollover } => {
            apply_targets(&mut c, targets)?;
            apply_rollover(&mut c, rollover)?;
        }
        Command::Scenarios {
            grid,
            rollover,
            variations,
            no_grid,
            no_rollover,
        } => {
            apply_grid(&mut c, grid)?;
            apply_rollover(&mut c, rollover)?;
            if !variations.is_empty() {
                c.scenarios.variations = variations.iter().map(|v| parse_variation(v)).collect::<Result<_, _>>()?;
            }
            if *no_grid {
                c.scenarios.grid = false;
            }
            if *no_rollover {
                c.scenarios.rollover = false;
            }
        }
        Command::Ingest { margin, alignment, .. } => {
            if let Some(m) = margin {
                c.ingest.margin_pp = *m;
            }
            if let Some(a) = alignment {
                c.ingest.alignment = match a {
                    AlignmentArg::Annual => Alignment::AnnualMean,
                    AlignmentArg::Monthly => Alignment::MonthlyBroadcast,
                };
            }
        }
    }
    if cli.common.print_config {
        print!("{}", c.to_toml()?);
        return Ok(Outcome {
            written: Vec::new(),
            failure: None,
        });
    }
    let (tables, failure) = match &cli.command {
        Command::Calibrate { .. } => cmd_calibrate(&c)?,
        Command::SteadyState { .. } => (vec![cmd_steady_state(&c)?], None),
        Command::TransferGrid { .. } => cmd_transfer_grid(&c)?,
        Command::Rollover { .. } => (cmd_rollover(&c)?, None),
        Command::Scenarios { .. } => (cmd_scenarios(&c)?, None),
        Command::Ingest {
            safe_yield,
            lending_rate,
            growth,
            units,
            ..
        } => {
            let units = match units {
                UnitsArg::Percent => Units::Percent,
                UnitsArg::Fraction => Units::Fraction,
            };
            (cmd_ingest(&c, safe_yield.as_deref(), lending_rate.as_deref(), growth.as_deref(), units)?, None)
        }
    };
    let written = write_tables(&c, &tables)?;
    Ok(Outcome { written, failure })
}

/// Writes every table into the output directory, in order.
pub fn write_tables(c: &RunConfig, tables: &[(String, Table)]) -> Result<Vec<PathBuf>, CliError> {
    let dir = c.resolved_output_dir();
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let mut written = Vec::with_capacity(tables.len());
    for (name, table) in tables {
        let path = dir.join(name);
        table.save(&path)?;
        written.push(path);
    }
    Ok(written)
}

fn technology_meta(t: Technology) -> String {
    match t {
        Technology::Ces { eta } => format!("ces eta={}", format_g10(eta)),
        other => other.label().to_string(),
    }
}

/// Table with the standard preamble: branch, bundle, seed and config echo.
fn table(c: &RunConfig, kind: &str, columns: &[&str]) -> Result<Table, CliError> {
    Ok(Table::new(kind, columns)
        .meta("bundle", &c.bundle)
        .meta("branch", technology_meta(c.economy.technology))
        .meta("seed", c.master_seed)
        .with_config(c.echo()?))
}

fn opt_f(x: Option<f64>) -> Value {
    x.unwrap_or(f64::NAN).into()
}

/// Tables produced so far, plus the failure that stopped a run early.
type Partial = (Vec<(String, Table)>, Option<CliError>);

pub fn cmd_calibrate(c: &RunConfig) -> Result<Partial, CliError> {
    let options = CalibrationOptions {
        steady: c.steady,
        master_seed: c.master_seed,
        ..CalibrationOptions::default()
    };
    let mut t = table(
        c,
        "calibration",
        &[
            "target_safe",
            "target_risky",
            "status",
            "gamma",
            "beta",
            "mu",
            "sigma",
            "achieved_safe",
            "achieved_risky",
            "safe_residual_pp",
            "risky_residual_pp",
            "endowment",
            "iterations",
        ],
    )?;
    let tg = c.targets;
    let (row, failure) = match calibrate(&tg, &c.economy, &options) {
        Ok(r) => (
            vec![
                "ok".into(),
                r.params.gamma.into(),
                r.params.beta.into(),
                r.params.mu.into(),
                r.params.sigma.into(),
                r.achieved_safe_annual.into(),
                r.achieved_risky_annual.into(),
                r.safe_residual_pp().into(),
                r.risky_residual_pp().into(),
                r.endowment.into(),
                r.iterations.into(),
            ],
            None,
        ),
        Err(e) => {
            let (sr, rr) = match e {
                olg_core::Error::CalibrationFailed {
                    safe_residual,
                    risky_residual,
                } => (Some(safe_residual), Some(risky_residual)),
                _ => (None, None),
            };
            let mut row: Vec<Value> = vec![format!("failed: {e}").into()];
            row.extend([f64::NAN; 6].map(Value::from));
            row.extend([opt_f(sr), opt_f(rr), f64::NAN.into(), Value::Int(0)]);
            (row, Some(CliError::from(e)))
        }
    };
    let mut full = vec![tg.safe_annual.into(), tg.risky_annual.into()];
    full.extend(row);
    t.push(full);
    Ok((vec![("calibration.csv".into(), t)], failure))
}

pub fn cmd_steady_state(c: &RunConfig) -> Result<(String, Table), CliError> {
    let cell = prepare_cell(&c.targets, &c.economy, &c.steady, c.master_seed)?;
    let p = cell.calibration.params;
    let s = cell.steady.stats;
    let mut t = table(
        c,
        "steady-state",
        &[
            "target_safe",
            "target_risky",
            "gamma",
            "beta",
            "mu",
            "endowment",
            "endowment_iterations",
            "periods",
            "mean_capital",
            "mean_wage",
            "mean_saving",
            "mean_expected_risky",
            "mean_safe",
            "mean_realized_risky",
            "log_spread",
            "minus_gamma_sigma2",
        ],
    )?;
    t.push(vec![
        c.targets.safe_annual.into(),
        c.targets.risky_annual.into(),
        p.gamma.into(),
        p.beta.into(),
        p.mu.into(),
        cell.calibration.endowment.into(),
        cell.steady.endowment_iterations.into(),
        s.periods.into(),
        s.mean_capital.into(),
        s.mean_wage.into(),
        cell.steady.mean_saving().into(),
        s.mean_expected_risky.into(),
        s.mean_safe.into(),
        s.mean_realized_risky.into(),
        s.log_spread().into(),
        (-p.gamma * p.sigma * p.sigma).into(),
    ]);
    Ok(("steady_state.csv".into(), t))
}

pub const GRID_COLUMNS: [&str; 14] = [
    "safe",
    "risky",
    "transfer_fraction",
    "welfare_change",
    "status",
    "gamma",
    "beta",
    "mu",
    "achieved_safe",
    "achieved_risky",
    "mean_saving",
    "log_spread",
    "minus_gamma_sigma2",
    "analytic_sign",
];

pub fn grid_row(cell: &WelfareGridCell, sigma: f64) -> Vec<Value> {
    let status = match &cell.status {
        CellStatus::Ok => "ok".to_string(),
        CellStatus::Failed(reason) => format!("failed: {reason}"),
    };
    vec![
        cell.safe_annual.into(),
        cell.risky_annual.into(),
        cell.transfer_fraction.into(),
        cell.welfare_change.into(),
        status.into(),
        cell.gamma.into(),
        cell.beta.into(),
        cell.mu.into(),
        cell.achieved_safe_annual.into(),
        cell.achieved_risky_annual.into(),
        cell.mean_saving.into(),
        cell.log_spread.into(),
        (-cell.gamma * sigma * sigma).into(),
        Value::Int(cell.analytic_sign as i64),
    ]
}

fn fractions_meta(f: &[f64]) -> String {
    f.iter().map(|x| format_g10(*x)).collect::<Vec<_>>().join(",")
}

pub fn grid_table(c: &RunConfig, cells: &[WelfareGridCell], kind: &str) -> Result<Table, CliError> {
    let mut t = table(c, kind, &GRID_COLUMNS)?
        .meta("transfer_fraction", fractions_meta(&c.grid.transfer_fractions))
        .meta("realizations", c.grid.realizations)
        .meta("welfare_units", "percent of consumption, certainty equivalent of mean utility change");
    for cell in cells {
        t.push(grid_row(cell, c.economy.sigma));
    }
    Ok(t)
}

pub fn cmd_transfer_grid(c: &RunConfig) -> Result<Partial, CliError> {
    let cells = run_transfer_grid(&c.transfer_grid_spec(), &c.economy)?;
    let failed = cells.iter().filter(|x| !x.is_ok()).count();
    let t = grid_table(c, &cells, "transfer-grid")?;
    let failure = (failed > 0).then(|| CliError::Numerical(format!("{failed} of {} grid cells failed", cells.len())));
    Ok((vec![("transfer_grid.csv".into(), t)], failure))
}

fn rollover_meta(t: Table, c: &RunConfig, run: &RolloverRun) -> Table {
    let r = &c.rollover;
    t.meta("target_safe", format_g10(c.targets.safe_annual))
        .meta("target_risky", format_g10(c.targets.risky_annual))
        .meta("gamma", format_g10(run.calibration.params.gamma))
        .meta("beta", format_g10(run.calibration.params.beta))
        .meta("mu", format_g10(run.calibration.params.mu))
        .meta("mean_saving", format_g10(run.mean_saving))
        .meta("initial_debt_fraction", format_g10(r.initial_debt_fraction))
        .meta("failure_threshold", format_g10(r.failure_threshold))
        .meta("reset_level", format_g10(c.rollover_spec().reset_level()))
        .meta("paths", r.paths)
}

pub fn rollover_tables(c: &RunConfig, run: &RolloverRun, prefix: &str) -> Result<Vec<(String, Table)>, CliError> {
    let mut paths = rollover_meta(
        table(
            c,
            "rollover-paths",
            &[
                "path_id",
                "generation",
                "shock",
                "debt_share",
                "welfare_change",
                "old_welfare_change",
                "tax_share",
                "safe_rate",
                "breach",
                "reset",
                "failed",
                "insolvent",
            ],
        )?,
        c,
        run,
    );
    for p in &run.paths {
        for r in &p.records {
            paths.push(vec![
                p.path_id.into(),
                r.generation.into(),
                r.shock.into(),
                r.debt_share.into(),
                r.welfare_change.into(),
                r.old_welfare_change.into(),
                r.tax_share.into(),
                r.safe_rate.into(),
                r.breach.into(),
                r.reset.into(),
                p.failed.into(),
                p.insolvent_generation.is_some().into(),
            ]);
        }
    }
    let s = &run.summary;
    let mut summary = rollover_meta(
        table(
            c,
            "rollover-summary",
            &[
                "generation",
                "mean_debt_share",
                "mean_welfare",
                "mean_welfare_success",
                "mean_welfare_failure",
                "mean_old_welfare",
            ],
        )?,
        c,
        run,
    )
    .meta("failure_rate", format_g10(s.failure_rate))
    .meta("insolvency_rate", format_g10(s.insolvency_rate))
    .meta("p95_max_debt_share", format_g10(s.p95_max_debt_share));
    for (i, g) in s.generation.iter().enumerate() {
        summary.push(vec![
            (*g).into(),
            s.mean_debt_share[i].into(),
            s.mean_welfare[i].into(),
            s.mean_welfare_success[i].into(),
            s.mean_welfare_failure[i].into(),
            s.mean_old_welfare[i].into(),
        ]);
    }
    Ok(vec![
        (format!("{prefix}rollover_paths.csv"), paths),
        (format!("{prefix}rollover_summary.csv"), summary),
    ])
}

pub fn cmd_rollover(c: &RunConfig) -> Result<Vec<(String, Table)>, CliError> {
    let run = run_rollover(&c.rollover_spec(), &c.economy)?;
    rollover_tables(c, &run, "")
}

pub fn scenario_tables(c: &RunConfig, bundle: &ScenarioBundle) -> Result<Vec<(String, Table)>, CliError> {
    let mut out = Vec::new();
    if let Some(base) = &bundle.base_grid {
        let mut ranges = table(
            c,
            "scenario-grid-ranges",
            &["variation", "value", "transfer_fraction", "min", "max"],
        )?;
        let mut push = |label: &str, value: f64, cells: &[WelfareGridCell]| {
            for f in &c.grid.transfer_fractions {
                let r = welfare_range(cells, *f);
                ranges.push(vec![
                    label.into(),
                    value.into(),
                    (*f).into(),
                    opt_f(r.map(|r| r.min)),
                    opt_f(r.map(|r| r.max)),
                ]);
            }
        };
        push("base", f64::NAN, base);
        for o in &bundle.outcomes {
            if let Some(g) = &o.grid {
                push(o.variation.label(), o.variation.value(), g);
            }
        }
        out.push(("scenario_grid_ranges.csv".to_string(), ranges));
    }
    if let Some(base) = &bundle.base_rollover {
        let mut gens = table(
            c,
            "scenario-rollover",
            &[
                "variation",
                "value",
                "generation",
                "mean_welfare",
                "mean_debt_share",
                "mean_old_welfare",
                "diff_mean_welfare",
                "diff_mean_debt_share",
            ],
        )?;
        let mut summary = table(
            c,
            "scenario-summary",
            &[
                "variation",
                "value",
                "failure_rate",
                "failures",
                "diff_failure_rate",
                "max_abs_diff_debt_share",
            ],
        )?;
        let b = &base.summary;
        for (i, g) in b.generation.iter().enumerate() {
            gens.push(vec![
                "base".into(),
                f64::NAN.into(),
                (*g).into(),
                b.mean_welfare[i].into(),
                b.mean_debt_share[i].into(),
                b.mean_old_welfare[i].into(),
                0.0.into(),
                0.0.into(),
            ]);
        }
        let base_failures = base.paths.iter().filter(|p| p.failed).count();
        summary.push(vec![
            "base".into(),
            f64::NAN.into(),
            b.failure_rate.into(),
            base_failures.into(),
            0.0.into(),
            0.0.into(),
        ]);
        for o in &bundle.outcomes {
            let (Some(run), Some(d)) = (&o.rollover, &o.differences) else { continue };
            let s = &run.summary;
            for (i, g) in s.generation.iter().enumerate() {
                gens.push(vec![
                    o.variation.label().into(),
                    o.variation.value().into(),
                    (*g).into(),
                    s.mean_welfare[i].into(),
                    s.mean_debt_share[i].into(),
                    s.mean_old_welfare[i].into(),
                    d.mean_welfare.get(i).copied().unwrap_or(f64::NAN).into(),
                    d.mean_debt_share.get(i).copied().unwrap_or(f64::NAN).into(),
                ]);
            }
            summary.push(vec![
                o.variation.label().into(),
                o.variation.value().into(),
                s.failure_rate.into(),
                d.failures_variant.into(),
                d.failure_rate.into(),
                d.max_abs_debt_share.into(),
            ]);
        }
        out.push(("scenario_rollover.csv".to_string(), gens));
        out.push(("scenario_summary.csv".to_string(), summary));
    }
    Ok(out)
}

pub fn cmd_scenarios(c: &RunConfig) -> Result<Vec<(String, Table)>, CliError> {
    let spec = ScenarioSpec {
        grid: c.scenarios.grid.then(|| c.transfer_grid_spec()),
        rollover: c.scenarios.rollover.then(|| c.rollover_spec()),
    };
    if spec.grid.is_none() && spec.rollover.is_none() {
        return Err(CliError::Usage("scenarios with neither grid nor rollover".into()));
    }
    let bundle = run_scenarios(&c.economy, &spec, &c.scenarios.variations)?;
    scenario_tables(c, &bundle)
}

pub fn cmd_ingest(
    c: &RunConfig,
    safe: Option<&Path>,
    risky: Option<&Path>,
    growth: Option<&Path>,
    units: Units,
) -> Result<Vec<(String, Table)>, CliError> {
    let growth = growth.ok_or_else(|| CliError::Usage("--growth is required".into()))?;
    if safe.is_none() && risky.is_none() {
        return Err(CliError::Usage("give --safe-yield, --lending-rate or both".into()));
    }
    let g = ingest_io::read_series(growth, SeriesKind::NominalGrowth, units)?;
    let s = safe.map(|p| ingest_io::read_series(p, SeriesKind::SafeYield, units)).transpose()?;
    let r = risky.map(|p| ingest_io::read_series(p, SeriesKind::LendingRate, units)).transpose()?;
    let report = ingest_io::ingest(s.as_ref(), r.as_ref(), &g, c.ingest.alignment, c.ingest.margin_pp)?;
    let mut stats = ingest_io::stats_table(&report);
    let mut ranges = ingest_io::ranges_table(&report, c.ingest.alignment, c.ingest.margin_pp);
    for t in [&mut stats, &mut ranges] {
        t.metadata.insert(0, ("seed".into(), c.master_seed.to_string()));
        t.config = Some(c.echo()?);
    }
    Ok(vec![
        ("ingest_stats.csv".into(), stats),
        ("ingest_ranges.csv".into(), ranges),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("olg").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn technology_names_and_eta() {
        assert_eq!(parse_technology("linear").unwrap(), Technology::Linear);
        assert_eq!(parse_technology("1").unwrap(), Technology::CobbDouglas);
        assert_eq!(parse_technology("2").unwrap(), Technology::Ces { eta: 2.0 });
        assert!(parse_technology("cubic").is_err());
    }

    #[test]
    fn axis_and_variation_parsing() {
        let a = parse_axis("-3:2:0.5").unwrap();
        assert_eq!((a.start, a.stop, a.step), (-3.0, 2.0, 0.5));
        assert!(parse_axis("1:2").is_err());
        assert_eq!(parse_variation("capital-share=0.5").unwrap(), Variation::CapitalShare(0.5));
        assert!(parse_variation("b=0.5").is_err());
    }

    #[test]
    fn overrides_apply_on_top_of_bundle() {
        let cli = parse(&["--bundle", "indonesia", "--technology", "cobb-douglas", "--seed", "9", "calibrate", "--safe", "-1"]);
        let mut c = resolve_config(&cli.common).unwrap();
        let Command::Calibrate { targets } = &cli.command else { panic!() };
        apply_targets(&mut c, targets).unwrap();
        assert_eq!(c.economy.technology, Technology::CobbDouglas);
        assert_eq!(c.master_seed, 9);
        assert_eq!((c.targets.safe_annual, c.targets.risky_annual), (-1.0, 3.0));
    }

    #[test]
    fn safe_above_risky_is_a_usage_error() {
        let cli = parse(&["calibrate", "--safe", "3", "--risky", "2"]);
        let err = run(cli).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
