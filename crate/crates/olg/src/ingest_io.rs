//! Reading rate series from delimited text and tabulating their statistics.
//!
//! Input files have a `date,value` header; dates are `YYYY` or `YYYY-MM`,
//! values percent per year.

use std::path::Path;

use olg_core::ingest::{
    compute_differentials, derive_range, summarize, Alignment, DifferentialStats, Period, RateRange, RateSeries,
    SeriesKind, Units,
};

use crate::table::{Table, Value};
use crate::CliError;

pub fn parse_series(text: &str, kind: SeriesKind, units: Units, source: &str) -> Result<RateSeries, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header_err = |line: usize, message: String| CliError::Format { line, message };
    let headers = reader.headers().map_err(|e| header_err(1, e.to_string()))?.clone();
    let lower: Vec<String> = headers.iter().map(|h| h.to_ascii_lowercase()).collect();
    if lower.len() != 2 || lower[0] != "date" || lower[1] != "value" {
        return Err(header_err(1, format!("expected header 'date,value', found '{}'", lower.join(","))));
    }
    let mut observations = Vec::new();
    let mut last: Option<Period> = None;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            header_err(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let date = Period::parse(&record[0]).map_err(|e| header_err(line, e.to_string()))?;
        let value: f64 = record[1]
            .parse()
            .map_err(|_| header_err(line, format!("value '{}' is not a number", &record[1])))?;
        if !value.is_finite() {
            return Err(header_err(line, "value is not finite".into()));
        }
        if let Some(prev) = last {
            if date <= prev {
                return Err(header_err(line, format!("date {date} does not follow {prev}")));
            }
        }
        last = Some(date);
        observations.push((date, value));
    }
    if observations.is_empty() {
        return Err(header_err(1, "no observations".into()));
    }
    RateSeries::new(kind, units, source, observations).map_err(CliError::from)
}

pub fn read_series(path: &Path, kind: SeriesKind, units: Units) -> Result<RateSeries, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let source = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    parse_series(&text, kind, units, &source).map_err(|e| match e {
        CliError::Format { line, message } => CliError::Format {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

/// Statistics of one differential at one grain.
#[derive(Debug, Clone, PartialEq)]
pub struct GrainStats {
    pub series: &'static str,
    pub grain: &'static str,
    pub stats: DifferentialStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestReport {
    pub stats: Vec<GrainStats>,
    /// Ranges computed from the statistics at the configured alignment.
    pub ranges: Vec<(&'static str, RateRange)>,
}

fn grain(alignment: Alignment) -> &'static str {
    match alignment {
        Alignment::AnnualMean => "annual",
        Alignment::MonthlyBroadcast => "monthly",
    }
}

/// Differentials of each rate against growth, summarized at both grains.
pub fn ingest(
    safe: Option<&RateSeries>,
    risky: Option<&RateSeries>,
    growth: &RateSeries,
    alignment: Alignment,
    margin_pp: f64,
) -> Result<IngestReport, CliError> {
    if safe.is_none() && risky.is_none() {
        return Err(CliError::Usage("at least one of the safe-yield or lending-rate series is required".into()));
    }
    let mut report = IngestReport {
        stats: Vec::new(),
        ranges: Vec::new(),
    };
    for (name, series) in [("safe", safe), ("risky", risky)] {
        let Some(series) = series else { continue };
        for a in [Alignment::AnnualMean, Alignment::MonthlyBroadcast] {
            let diff = compute_differentials(series, growth, a)?;
            let stats = summarize(&diff.values())?;
            if a == alignment {
                report.ranges.push((name, derive_range(&stats, margin_pp)));
            }
            report.stats.push(GrainStats {
                series: name,
                grain: grain(a),
                stats,
            });
        }
    }
    Ok(report)
}

pub fn stats_table(report: &IngestReport) -> Table {
    let mut t = Table::new(
        "ingest-stats",
        &["series", "grain", "count", "median", "mean", "max", "min", "q1", "q3"],
    )
    .meta("quantile_method", "linear interpolation between order statistics (type 7)")
    .meta("annual_aggregation", "arithmetic mean");
    for g in &report.stats {
        let s = &g.stats;
        t.push(vec![
            g.series.into(),
            g.grain.into(),
            s.count.into(),
            s.median.into(),
            s.mean.into(),
            s.max.into(),
            s.min.into(),
            s.q1.into(),
            s.q3.into(),
        ]);
    }
    t
}

pub fn ranges_table(report: &IngestReport, alignment: Alignment, margin_pp: f64) -> Table {
    let mut t = Table::new("ingest-ranges", &["series", "lower", "upper"])
        .meta("grain", grain(alignment))
        .meta("margin_pp", crate::table::format_g10(margin_pp))
        .meta("rule", "lower = round(median), upper = round(max + margin)");
    for (name, r) in &report.ranges {
        t.push(vec![Value::from(*name), r.lower.into(), r.upper.into()]);
    }
    t
}
