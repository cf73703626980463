//! Interest rate minus growth differentials from user-supplied series, their
//! summary statistics, and calibration ranges derived from them.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Observation date: a year, or a year and month.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Period {
    pub year: i32,
    /// 1-12, or `None` for an annual observation.
    pub month: Option<u8>,
}

impl Period {
    pub fn year(year: i32) -> Self {
        Period { year, month: None }
    }

    pub fn month(year: i32, month: u8) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::InvalidSeries(format!("month {month} out of range")));
        }
        Ok(Period {
            year,
            month: Some(month),
        })
    }

    /// Parses `YYYY` or `YYYY-MM`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let bad = || Error::InvalidSeries(format!("unrecognized date '{text}', expected YYYY or YYYY-MM"));
        match text.split_once('-') {
            None => text.parse().map(Period::year).map_err(|_| bad()),
            Some((y, m)) => {
                let year = y.parse().map_err(|_| bad())?;
                let month = m.parse().map_err(|_| bad())?;
                Period::month(year, month)
            }
        }
    }
}

impl core::fmt::Display for Period {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self.month {
            None => write!(f, "{:04}", self.year),
            Some(m) => write!(f, "{:04}-{:02}", self.year, m),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum SeriesKind {
    SafeYield,
    LendingRate,
    NominalGrowth,
    Differential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Units {
    /// Percent per year.
    Percent,
    /// Fraction per year; rejected by the differential computation.
    Fraction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateSeries {
    pub kind: SeriesKind,
    pub units: Units,
    pub source: String,
    observations: Vec<(Period, f64)>,
}

impl RateSeries {
    /// Dates must be strictly increasing and values finite.
    pub fn new(kind: SeriesKind, units: Units, source: impl Into<String>, observations: Vec<(Period, f64)>) -> Result<Self> {
        for w in observations.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidSeries(format!("dates not strictly increasing at {}", w[1].0)));
            }
        }
        if let Some((p, v)) = observations.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidSeries(format!("non-finite value {v} at {p}")));
        }
        Ok(RateSeries {
            kind,
            units,
            source: source.into(),
            observations,
        })
    }

    pub fn observations(&self) -> &[(Period, f64)] {
        &self.observations
    }

    pub fn values(&self) -> Vec<f64> {
        self.observations.iter().map(|(_, v)| *v).collect()
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    /// Arithmetic mean of all observations in each year.
    pub fn annual_means(&self) -> BTreeMap<i32, f64> {
        let mut acc: BTreeMap<i32, (f64, usize)> = BTreeMap::new();
        for (p, v) in &self.observations {
            let e = acc.entry(p.year).or_insert((0.0, 0));
            e.0 += v;
            e.1 += 1;
        }
        acc.into_iter().map(|(y, (s, n))| (y, s / n as f64)).collect()
    }

    /// Monthly grid: monthly observations as is, annual observations copied
    /// to every month of their year.
    fn monthly(&self) -> BTreeMap<(i32, u8), f64> {
        let mut out = BTreeMap::new();
        for (p, v) in &self.observations {
            match p.month {
                Some(m) => {
                    out.insert((p.year, m), *v);
                }
                None => {
                    for m in 1..=12 {
                        out.entry((p.year, m)).or_insert(*v);
                    }
                }
            }
        }
        out
    }
}

/// How series of different frequencies are put on a common grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Alignment {
    /// Average sub-annual data within each year; annual output.
    #[default]
    AnnualMean,
    /// Copy annual values to each month; monthly output.
    MonthlyBroadcast,
}

/// `rate - growth` on the aligned grid, over the overlapping dates.
pub fn compute_differentials(rate: &RateSeries, growth: &RateSeries, alignment: Alignment) -> Result<RateSeries> {
    for s in [rate, growth] {
        if s.units != Units::Percent {
            return Err(Error::UnitMismatch(format!(
                "series '{}' is in fractions; convert to percent per year",
                s.source
            )));
        }
    }
    let observations: Vec<(Period, f64)> = match alignment {
        Alignment::AnnualMean => {
            let g = growth.annual_means();
            rate.annual_means()
                .into_iter()
                .filter_map(|(y, r)| g.get(&y).map(|gv| (Period::year(y), r - gv)))
                .collect()
        }
        Alignment::MonthlyBroadcast => {
            let g = growth.monthly();
            rate.monthly()
                .into_iter()
                .filter_map(|((y, m), r)| {
                    g.get(&(y, m)).map(|gv| {
                        (
                            Period {
                                year: y,
                                month: Some(m),
                            },
                            r - gv,
                        )
                    })
                })
                .collect()
        }
    };
    if observations.is_empty() {
        return Err(Error::EmptyOverlap);
    }
    RateSeries::new(
        SeriesKind::Differential,
        Units::Percent,
        format!("{} - {}", rate.source, growth.source),
        observations,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DifferentialStats {
    pub count: usize,
    pub median: f64,
    pub mean: f64,
    pub max: f64,
    pub min: f64,
    pub q1: f64,
    pub q3: f64,
}

/// Quantile by linear interpolation between order statistics of sorted data
/// (`h = (n - 1) p`).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize(values: &[f64]) -> Result<DifferentialStats> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidSeries("non-finite value".into()));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(DifferentialStats {
        count: v.len(),
        median: quantile_sorted(&v, 0.5),
        mean: v.iter().sum::<f64>() / v.len() as f64,
        max: v[v.len() - 1],
        min: v[0],
        q1: quantile_sorted(&v, 0.25),
        q3: quantile_sorted(&v, 0.75),
    })
}

/// Closed interval of annual rates, percent per year.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RateRange {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TargetRanges {
    pub safe: RateRange,
    pub risky: RateRange,
}

/// Range for one differential: from the rounded median to the maximum plus
/// `margin_pp`, both rounded to the nearest whole percentage point.
pub fn derive_range(stats: &DifferentialStats, margin_pp: f64) -> RateRange {
    let lower = libm::round(stats.median);
    let upper = libm::round(stats.max + margin_pp);
    RateRange {
        lower,
        upper: upper.max(lower),
    }
}

pub fn derive_target_ranges(safe: &DifferentialStats, risky: &DifferentialStats, margin_pp: f64) -> TargetRanges {
    TargetRanges {
        safe: derive_range(safe, margin_pp),
        risky: derive_range(risky, margin_pp),
    }
}
