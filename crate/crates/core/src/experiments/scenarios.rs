//! One-at-a-time parameter variations compared with a base run under common
//! random numbers.

use alloc::vec::Vec;

use super::rollover::{run_rollover, RolloverRun, RolloverSpec};
use super::transfer::{run_transfer_grid, TransferGridSpec, WelfareGridCell};
use crate::calibration::StructuralChoices;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case", tag = "kind", content = "value"))]
pub enum Variation {
    EndowmentFraction(f64),
    CapitalShare(f64),
    OldShare(f64),
    FailureThreshold(f64),
}

impl Variation {
    /// Endowment 75% of the wage, capital share 0.5, old share 0.9 and a
    /// 110% failure threshold.
    pub fn standard_set() -> [Variation; 4] {
        [
            Variation::EndowmentFraction(0.75),
            Variation::CapitalShare(0.5),
            Variation::OldShare(0.9),
            Variation::FailureThreshold(1.10),
        ]
    }

    pub fn label(&self) -> &'static str {
        match self {
            Variation::EndowmentFraction(_) => "endowment-fraction",
            Variation::CapitalShare(_) => "capital-share",
            Variation::OldShare(_) => "old-share",
            Variation::FailureThreshold(_) => "failure-threshold",
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            Variation::EndowmentFraction(v)
            | Variation::CapitalShare(v)
            | Variation::OldShare(v)
            | Variation::FailureThreshold(v) => v,
        }
    }

    /// The failure threshold only enters the rollover.
    pub fn affects_grid(&self) -> bool {
        !matches!(self, Variation::FailureThreshold(_))
    }

    pub fn apply(&self, choices: &StructuralChoices, rollover: &RolloverSpec) -> (StructuralChoices, RolloverSpec) {
        let (mut c, mut r) = (*choices, *rollover);
        match *self {
            Variation::EndowmentFraction(v) => c.endowment_fraction = v,
            Variation::CapitalShare(v) => c.b = v,
            Variation::OldShare(v) => c.old_share = v,
            Variation::FailureThreshold(v) => r.failure_threshold = v,
        }
        (c, r)
    }
}

/// Minimum and maximum welfare change over successful cells at one
/// transfer fraction.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WelfareRange {
    pub transfer_fraction: f64,
    pub min: f64,
    pub max: f64,
}

pub fn welfare_range(cells: &[WelfareGridCell], transfer_fraction: f64) -> Option<WelfareRange> {
    let values: Vec<f64> = cells
        .iter()
        .filter(|c| c.is_ok() && c.transfer_fraction == transfer_fraction)
        .map(|c| c.welfare_change)
        .collect();
    if values.is_empty() {
        return None;
    }
    Some(WelfareRange {
        transfer_fraction,
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

/// Variant minus base, paired by path id and generation.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PairedDifferences {
    pub mean_welfare: Vec<f64>,
    pub mean_debt_share: Vec<f64>,
    pub max_abs_debt_share: f64,
    pub failure_rate: f64,
    pub failures_base: usize,
    pub failures_variant: usize,
}

pub fn paired_differences(base: &RolloverRun, variant: &RolloverRun) -> Result<PairedDifferences> {
    if base.paths.len() != variant.paths.len() {
        return Err(Error::param("paths", "base and variant must have the same paths"));
    }
    let generations = base.summary.generation.len().min(variant.summary.generation.len());
    let mut welfare = alloc::vec![(0.0, 0usize); generations];
    let mut debt = alloc::vec![(0.0, 0usize); generations];
    let mut max_abs: f64 = 0.0;
    for (b, v) in base.paths.iter().zip(&variant.paths) {
        for (rb, rv) in b.records.iter().zip(&v.records).take(generations) {
            let t = rb.generation;
            welfare[t].0 += rv.welfare_change - rb.welfare_change;
            welfare[t].1 += 1;
            let dd = rv.debt_share - rb.debt_share;
            debt[t].0 += dd;
            debt[t].1 += 1;
            max_abs = max_abs.max(dd.abs());
        }
    }
    let avg = |v: Vec<(f64, usize)>| -> Vec<f64> {
        v.into_iter()
            .map(|(s, n)| if n == 0 { f64::NAN } else { s / n as f64 })
            .collect()
    };
    let failures_base = base.paths.iter().filter(|p| p.failed).count();
    let failures_variant = variant.paths.iter().filter(|p| p.failed).count();
    Ok(PairedDifferences {
        mean_welfare: avg(welfare),
        mean_debt_share: avg(debt),
        max_abs_debt_share: max_abs,
        failure_rate: variant.summary.failure_rate - base.summary.failure_rate,
        failures_base,
        failures_variant,
    })
}

#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub variation: Variation,
    pub grid: Option<Vec<WelfareGridCell>>,
    pub rollover: Option<RolloverRun>,
    pub differences: Option<PairedDifferences>,
}

#[derive(Debug, Clone)]
pub struct ScenarioBundle {
    pub base_grid: Option<Vec<WelfareGridCell>>,
    pub base_rollover: Option<RolloverRun>,
    pub outcomes: Vec<ScenarioOutcome>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    /// `None` skips the transfer grids.
    pub grid: Option<TransferGridSpec>,
    /// `None` skips the rollovers.
    pub rollover: Option<RolloverSpec>,
}

/// Runs the base campaigns and each variation on the same seeds and streams.
pub fn run_scenarios(choices: &StructuralChoices, spec: &ScenarioSpec, variations: &[Variation]) -> Result<ScenarioBundle> {
    let base_grid = spec.grid.as_ref().map(|g| run_transfer_grid(g, choices)).transpose()?;
    let base_rollover = spec.rollover.as_ref().map(|r| run_rollover(r, choices)).transpose()?;
    let default_rollover = spec.rollover.unwrap_or_default();
    let mut outcomes = Vec::with_capacity(variations.len());
    for v in variations {
        let (c, r) = v.apply(choices, &default_rollover);
        let grid = match &spec.grid {
            Some(g) if v.affects_grid() => Some(run_transfer_grid(g, &c)?),
            _ => None,
        };
        let rollover = match spec.rollover {
            Some(_) => Some(run_rollover(&r, &c)?),
            None => None,
        };
        let differences = match (&base_rollover, &rollover) {
            (Some(b), Some(v)) => Some(paired_differences(b, v)?),
            _ => None,
        };
        outcomes.push(ScenarioOutcome {
            variation: *v,
            grid,
            rollover,
            differences,
        });
    }
    Ok(ScenarioBundle {
        base_grid,
        base_rollover,
        outcomes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn apply_changes_one_field() {
        let c = StructuralChoices::default();
        let r = RolloverSpec::default();
        let (c2, r2) = Variation::FailureThreshold(1.1).apply(&c, &r);
        assert_eq!(c2, c);
        assert_eq!(r2.failure_threshold, 1.1);
        let (c3, r3) = Variation::CapitalShare(0.5).apply(&c, &r);
        assert_eq!(c3.b, 0.5);
        assert_eq!(r3, r);
    }
}
