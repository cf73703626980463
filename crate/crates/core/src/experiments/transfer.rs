//! Steady-state welfare effect of a stationary pay-as-you-go transfer over a
//! grid of (safe, risky) rate targets.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::steady::{initialize_steady_state, SteadySpec, SteadyState};
use super::streams;
use crate::analytics;
use crate::calibration::{calibrate, CalibrationOptions, CalibrationResult, StructuralChoices};
use crate::household::consumption_equivalent_percent;
use crate::model::{RateTargets, ShockStream};
use crate::parallel::map_indexed;
use crate::{Error, Result};

/// Closed range of annual rates stepped at `step`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AxisRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl AxisRange {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        let r = AxisRange { start, stop, step };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Error::param("range", "needs finite bounds and a positive step"));
        }
        if self.stop < self.start {
            return Err(Error::param("range", "stop lies below start"));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = libm::floor((self.stop - self.start) / self.step + 1e-9) as usize;
        (0..=n).map(|i| self.start + i as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TransferGridSpec {
    pub safe: AxisRange,
    pub risky: AxisRange,
    /// Transfers as fractions of average pre-transfer saving. Each cell is
    /// calibrated once and evaluated at every fraction.
    pub transfer_fractions: Vec<f64>,
    pub realizations: usize,
    pub steady: SteadySpec,
    pub master_seed: u64,
    pub workers: usize,
}

impl Default for TransferGridSpec {
    fn default() -> Self {
        TransferGridSpec {
            safe: AxisRange {
                start: -2.0,
                stop: 1.0,
                step: 0.5,
            },
            risky: AxisRange {
                start: 0.0,
                stop: 4.0,
                step: 0.5,
            },
            transfer_fractions: alloc::vec![0.05, 0.20],
            realizations: 2000,
            steady: SteadySpec::default(),
            master_seed: 0,
            workers: 1,
        }
    }
}

impl TransferGridSpec {
    pub fn validate(&self) -> Result<()> {
        self.safe.validate()?;
        self.risky.validate()?;
        if self.transfer_fractions.iter().any(|f| !(*f >= 0.0) || !f.is_finite()) {
            return Err(Error::param("transfer_fraction", "must be finite and >= 0"));
        }
        if self.realizations == 0 {
            return Err(Error::param("realizations", "must be positive"));
        }
        Ok(())
    }

    /// (safe, risky) pairs with `safe <= risky`, safe-major order.
    pub fn cells(&self) -> Vec<(f64, f64)> {
        let risky = self.risky.values();
        let mut out = Vec::new();
        for s in self.safe.values() {
            for r in &risky {
                if s <= *r {
                    out.push((s, *r));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CellStatus {
    Ok,
    Failed(String),
}

/// One grid point and one transfer size.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WelfareGridCell {
    pub safe_annual: f64,
    pub risky_annual: f64,
    pub transfer_fraction: f64,
    pub status: CellStatus,
    /// Consumption-equivalent percent change of the average cohort utility.
    pub welfare_change: f64,
    pub gamma: f64,
    pub beta: f64,
    pub mu: f64,
    pub achieved_safe_annual: f64,
    pub achieved_risky_annual: f64,
    /// Mean steady-state saving; the transfer is `transfer_fraction` of it.
    pub mean_saving: f64,
    /// `ln(mean R^f) - ln(mean E R)` over the steady-state run.
    pub log_spread: f64,
    /// Sign of the marginal welfare effect at the steady-state average rates.
    pub analytic_sign: i8,
}

impl WelfareGridCell {
    pub fn is_ok(&self) -> bool {
        self.status == CellStatus::Ok
    }

    fn failed(safe: f64, risky: f64, fraction: f64, reason: String) -> Self {
        WelfareGridCell {
            safe_annual: safe,
            risky_annual: risky,
            transfer_fraction: fraction,
            status: CellStatus::Failed(reason),
            welfare_change: f64::NAN,
            gamma: f64::NAN,
            beta: f64::NAN,
            mu: f64::NAN,
            achieved_safe_annual: f64::NAN,
            achieved_risky_annual: f64::NAN,
            mean_saving: f64::NAN,
            log_spread: f64::NAN,
            analytic_sign: 0,
        }
    }
}

/// Calibrated economy at one grid point, ready for transfer runs.
#[derive(Debug, Clone)]
pub struct PreparedCell {
    pub calibration: CalibrationResult,
    pub steady: SteadyState,
}

pub fn prepare_cell(targets: &RateTargets, choices: &StructuralChoices, steady: &SteadySpec, master_seed: u64) -> Result<PreparedCell> {
    let options = CalibrationOptions {
        steady: *steady,
        master_seed,
        ..CalibrationOptions::default()
    };
    let calibration = calibrate(targets, choices, &options)?;
    let steady = initialize_steady_state(&calibration.params, steady, None, master_seed, streams::STEADY_STATE)?;
    Ok(PreparedCell { calibration, steady })
}

/// Mean cohort utility difference with and without a transfer of
/// `fraction` times mean saving, both runs starting from mean capital and
/// sharing the transfer stream.
pub fn transfer_welfare(cell: &PreparedCell, fraction: f64, realizations: usize, master_seed: u64) -> Result<f64> {
    let economy = &cell.steady.economy;
    let params = economy.params();
    let transfer = fraction * cell.steady.mean_saving();
    let stream = ShockStream::new(master_seed, streams::TRANSFER, params.mu, params.sigma);
    let mut k0 = cell.steady.mean_capital();
    let mut k1 = k0;
    let mut total = 0.0;
    for (t, z) in stream.normals(0, realizations).into_iter().enumerate() {
        let a = libm::exp(params.mu + params.sigma * z);
        let base = economy.step_no_debt(k0, a, 0.0)?;
        let with = economy.step_no_debt(k1, a, transfer)?;
        total += with.young_utility - base.young_utility;
        k0 = base.capital_chosen;
        k1 = with.capital_chosen;
        if !k1.is_finite() {
            return Err(Error::Divergence { period: t });
        }
    }
    Ok(total / realizations as f64)
}

fn evaluate(cell: &PreparedCell, safe: f64, risky: f64, fraction: f64, spec: &TransferGridSpec) -> WelfareGridCell {
    let c = &cell.calibration;
    let p = c.params;
    let stats = cell.steady.stats;
    let alpha = analytics::capital_share(p.technology, p.b, cell.steady.mean_capital());
    let analytic_sign = analytics::total_sign(stats.mean_safe, stats.mean_expected_risky, p.beta, alpha, p.technology.eta()).unwrap_or(0);
    match transfer_welfare(cell, fraction, spec.realizations, spec.master_seed) {
        Ok(du) => WelfareGridCell {
            safe_annual: safe,
            risky_annual: risky,
            transfer_fraction: fraction,
            status: CellStatus::Ok,
            welfare_change: consumption_equivalent_percent(du, 0.0),
            gamma: p.gamma,
            beta: p.beta,
            mu: p.mu,
            achieved_safe_annual: c.achieved_safe_annual,
            achieved_risky_annual: c.achieved_risky_annual,
            mean_saving: cell.steady.mean_saving(),
            log_spread: stats.log_spread(),
            analytic_sign,
        },
        Err(e) => WelfareGridCell::failed(safe, risky, fraction, e.to_string()),
    }
}

/// Runs every cell of the grid at every transfer fraction. Output is
/// fraction-major, then safe, then risky. Cells that fail are kept with a
/// failed status.
pub fn run_transfer_grid(spec: &TransferGridSpec, choices: &StructuralChoices) -> Result<Vec<WelfareGridCell>> {
    spec.validate()?;
    let cells = spec.cells();
    let per_cell = map_indexed(cells.len(), spec.workers, |i| {
        let (safe, risky) = cells[i];
        let prepared = RateTargets::new(safe, risky).and_then(|t| prepare_cell(&t, choices, &spec.steady, spec.master_seed));
        spec.transfer_fractions
            .iter()
            .map(|f| match &prepared {
                Ok(cell) => evaluate(cell, safe, risky, *f, spec),
                Err(e) => WelfareGridCell::failed(safe, risky, *f, e.to_string()),
            })
            .collect::<Vec<_>>()
    });
    let mut out = Vec::with_capacity(cells.len() * spec.transfer_fractions.len());
    for j in 0..spec.transfer_fractions.len() {
        for row in &per_cell {
            out.push(row[j].clone());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_values_include_stop() {
        let r = AxisRange::new(-3.0, 2.0, 0.5).unwrap();
        let v = r.values();
        assert_eq!(v.len(), 11);
        assert_eq!(v[10], 2.0);
    }

    #[test]
    fn cells_respect_ordering() {
        let spec = TransferGridSpec::default();
        let cells = spec.cells();
        assert!(cells.iter().all(|(s, r)| s <= r));
        assert_eq!(cells.len(), 60);
    }

    #[test]
    fn empty_grid_after_filter() {
        let spec = TransferGridSpec {
            safe: AxisRange::new(3.0, 4.0, 0.5).unwrap(),
            risky: AxisRange::new(0.0, 2.0, 0.5).unwrap(),
            ..TransferGridSpec::default()
        };
        assert!(run_transfer_grid(&spec, &StructuralChoices::default()).unwrap().is_empty());
    }
}
