//! Debt rollover: a one-time issuance at generation 0, rolled over at the
//! endogenous safe rate without taxes until debt breaches a threshold, then
//! partly repaid by a tax on the young.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::steady::{initialize_steady_state, SteadySpec, SteadyStats};
use super::streams;
use crate::calibration::{calibrate, CalibrationOptions, CalibrationResult, StructuralChoices};
use crate::household::{consumption_equivalent_percent, DebtFlows, Economy};
use crate::model::{RateTargets, ShockStream};
use crate::parallel::map_indexed;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RolloverSpec {
    pub targets: RateTargets,
    /// Initial issuance as a fraction of average steady-state saving.
    pub initial_debt_fraction: f64,
    /// Breach level as a multiple of the initial issuance.
    pub failure_threshold: f64,
    /// Debt after a breach as a multiple of the initial issuance.
    pub post_failure_level: f64,
    /// Repay the whole debt on breach instead of resetting to
    /// `post_failure_level`.
    pub full_payoff: bool,
    pub paths: usize,
    /// Generations per path, including the issuance generation.
    pub generations: usize,
    pub steady: SteadySpec,
    pub master_seed: u64,
    pub workers: usize,
}

impl Default for RolloverSpec {
    fn default() -> Self {
        RolloverSpec {
            targets: RateTargets {
                safe_annual: -1.0,
                risky_annual: 2.0,
            },
            initial_debt_fraction: 0.15,
            failure_threshold: 1.15,
            post_failure_level: 0.40,
            full_payoff: false,
            paths: 1000,
            generations: 6,
            steady: SteadySpec::default(),
            master_seed: 0,
            workers: 1,
        }
    }
}

impl RolloverSpec {
    pub fn validate(&self) -> Result<()> {
        self.targets.validate()?;
        if !(self.initial_debt_fraction >= 0.0) || !self.initial_debt_fraction.is_finite() {
            return Err(Error::param("initial_debt_fraction", "must be finite and >= 0"));
        }
        if !(self.post_failure_level >= 0.0 && self.post_failure_level < 1.0) {
            return Err(Error::param("post_failure_level", "must lie in [0, 1)"));
        }
        if !(self.failure_threshold > 1.0) || !self.failure_threshold.is_finite() {
            return Err(Error::param("failure_threshold", "must exceed 1"));
        }
        if self.paths == 0 || self.generations == 0 {
            return Err(Error::param("paths", "paths and generations must be positive"));
        }
        Ok(())
    }

    /// Debt kept after a breach, as a multiple of the initial issuance.
    pub fn reset_level(&self) -> f64 {
        if self.full_payoff {
            0.0
        } else {
            self.post_failure_level
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GenerationRecord {
    pub generation: usize,
    pub shock: f64,
    /// Debt outstanding at the end of the generation over average saving.
    pub debt_share: f64,
    /// Consumption-equivalent percent change for the young, ex ante, against
    /// the no-debt economy on the same shocks.
    pub welfare_change: f64,
    /// Realized percent change in consumption of the old.
    pub old_welfare_change: f64,
    /// Tax on the young over average saving.
    pub tax_share: f64,
    /// Gross safe rate on debt issued this generation.
    pub safe_rate: f64,
    pub breach: bool,
    pub reset: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RolloverPath {
    pub path_id: usize,
    pub records: Vec<GenerationRecord>,
    pub failed: bool,
    pub failure_generation: Option<usize>,
    /// Generation at which the young could not absorb the debt; the path
    /// stops there.
    pub insolvent_generation: Option<usize>,
    pub error: Option<String>,
}

impl RolloverPath {
    pub fn max_debt_share(&self) -> f64 {
        self.records.iter().map(|r| r.debt_share).fold(0.0, f64::max)
    }

    pub fn breaches(&self) -> usize {
        self.records.iter().filter(|r| r.breach).count()
    }
}

/// Per-generation cross-path means.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RolloverSummary {
    pub generation: Vec<usize>,
    pub mean_debt_share: Vec<f64>,
    pub mean_welfare: Vec<f64>,
    pub mean_welfare_success: Vec<f64>,
    pub mean_welfare_failure: Vec<f64>,
    pub mean_old_welfare: Vec<f64>,
    pub failure_rate: f64,
    pub insolvency_rate: f64,
    /// 95th percentile of per-path maximum debt share.
    pub p95_max_debt_share: f64,
}

#[derive(Debug, Clone)]
pub struct RolloverRun {
    pub calibration: CalibrationResult,
    pub steady: SteadyStats,
    pub mean_saving: f64,
    pub paths: Vec<RolloverPath>,
    pub summary: RolloverSummary,
}

/// Simulates one path against its no-debt counterfactual.
pub fn simulate_path(
    economy: &Economy,
    mean_capital: f64,
    mean_saving: f64,
    spec: &RolloverSpec,
    path_id: usize,
) -> RolloverPath {
    let params = economy.params();
    let stream = ShockStream::new(spec.master_seed, streams::ROLLOVER_BASE + path_id as u64, params.mu, params.sigma);
    let d0 = spec.initial_debt_fraction * mean_saving;
    let reset_share = spec.reset_level() * spec.initial_debt_fraction;
    let mut path = RolloverPath {
        path_id,
        records: Vec::with_capacity(spec.generations),
        failed: false,
        failure_generation: None,
        insolvent_generation: None,
        error: None,
    };
    let (mut k_base, mut k_debt) = (mean_capital, mean_capital);
    let (mut debt, mut safe_rate) = (0.0, 0.0);
    let mut pending_reset = false;
    for (t, z) in stream.normals(0, spec.generations).into_iter().enumerate() {
        let a = libm::exp(params.mu + params.sigma * z);
        let (flows, share) = if t == 0 {
            let flows = DebtFlows {
                to_old: params.old_share * d0,
                tax: 0.0,
                new_debt: d0,
            };
            (flows, d0 / mean_saving)
        } else {
            let due = safe_rate * debt;
            let reset_debt = reset_share * mean_saving;
            if pending_reset && due > reset_debt {
                let flows = DebtFlows {
                    to_old: due,
                    tax: due - reset_debt,
                    new_debt: reset_debt,
                };
                (flows, reset_share)
            } else {
                let flows = DebtFlows {
                    to_old: due,
                    tax: 0.0,
                    new_debt: due,
                };
                (flows, due / mean_saving)
            }
        };
        let reset = flows.tax > 0.0;
        let outcome = economy
            .step_no_debt(k_base, a, 0.0)
            .and_then(|base| Ok((base, economy.step_with_debt(k_debt, a, flows)?)));
        let (base, with) = match outcome {
            Ok(v) => v,
            Err(e) => {
                if matches!(e, Error::Insolvent { .. } | Error::Infeasible { .. }) {
                    path.insolvent_generation = Some(t);
                }
                path.error = Some(e.to_string());
                break;
            }
        };
        let breach = flows.new_debt > spec.failure_threshold * d0;
        if breach && !path.failed {
            path.failed = true;
            path.failure_generation = Some(t);
        }
        pending_reset = breach;
        path.records.push(GenerationRecord {
            generation: t,
            shock: a,
            debt_share: share,
            welfare_change: consumption_equivalent_percent(with.young_utility, base.young_utility),
            old_welfare_change: 100.0 * (with.old_consumption / base.old_consumption - 1.0),
            tax_share: flows.tax / mean_saving,
            safe_rate: with.safe_return,
            breach,
            reset,
        });
        k_base = base.capital_chosen;
        k_debt = with.capital_chosen;
        debt = flows.new_debt;
        safe_rate = with.safe_return;
    }
    path
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut n) = (0.0, 0usize);
    for v in values {
        s += v;
        n += 1;
    }
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

/// Linear-interpolation quantile of unsorted data.
pub(crate) fn quantile(values: &[f64], p: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = (v.len() - 1) as f64 * p;
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(v.len() - 1);
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

pub fn summarize_paths(paths: &[RolloverPath], generations: usize) -> RolloverSummary {
    let gens: Vec<usize> = (0..generations).collect();
    let at = |t: usize, filter: &dyn Fn(&RolloverPath) -> bool, f: &dyn Fn(&GenerationRecord) -> f64| {
        mean(paths.iter().filter(|p| filter(p)).filter_map(|p| p.records.get(t)).map(f))
    };
    let all = |_: &RolloverPath| true;
    let ok = |p: &RolloverPath| !p.failed;
    let bad = |p: &RolloverPath| p.failed;
    let maxima: Vec<f64> = paths.iter().map(|p| p.max_debt_share()).collect();
    let n = paths.len().max(1) as f64;
    RolloverSummary {
        mean_debt_share: gens.iter().map(|t| at(*t, &all, &|r| r.debt_share)).collect(),
        mean_welfare: gens.iter().map(|t| at(*t, &all, &|r| r.welfare_change)).collect(),
        mean_welfare_success: gens.iter().map(|t| at(*t, &ok, &|r| r.welfare_change)).collect(),
        mean_welfare_failure: gens.iter().map(|t| at(*t, &bad, &|r| r.welfare_change)).collect(),
        mean_old_welfare: gens.iter().map(|t| at(*t, &all, &|r| r.old_welfare_change)).collect(),
        failure_rate: paths.iter().filter(|p| p.failed).count() as f64 / n,
        insolvency_rate: paths.iter().filter(|p| p.insolvent_generation.is_some()).count() as f64 / n,
        p95_max_debt_share: quantile(&maxima, 0.95),
        generation: gens,
    }
}

/// Calibrates to `spec.targets`, starts every path from average no-debt
/// capital and simulates all paths.
pub fn run_rollover(spec: &RolloverSpec, choices: &StructuralChoices) -> Result<RolloverRun> {
    spec.validate()?;
    let options = CalibrationOptions {
        steady: spec.steady,
        master_seed: spec.master_seed,
        ..CalibrationOptions::default()
    };
    let calibration = calibrate(&spec.targets, choices, &options)?;
    let steady = initialize_steady_state(&calibration.params, &spec.steady, None, spec.master_seed, streams::STEADY_STATE)?;
    let (k, s) = (steady.mean_capital(), steady.mean_saving());
    let paths = map_indexed(spec.paths, spec.workers, |p| simulate_path(&steady.economy, k, s, spec, p));
    let summary = summarize_paths(&paths, spec.generations);
    Ok(RolloverRun {
        calibration,
        steady: steady.stats,
        mean_saving: s,
        paths,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_interpolates() {
        assert_eq!(quantile(&[3.0, 1.0, 2.0, 4.0], 0.5), 2.5);
        assert_eq!(quantile(&[5.0], 0.95), 5.0);
    }

    #[test]
    fn spec_validation() {
        assert!(RolloverSpec::default().validate().is_ok());
        let bad = RolloverSpec {
            failure_threshold: 0.9,
            ..RolloverSpec::default()
        };
        assert!(bad.validate().is_err());
        let full = RolloverSpec {
            full_payoff: true,
            ..RolloverSpec::default()
        };
        assert_eq!(full.reset_level(), 0.0);
    }
}
