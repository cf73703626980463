//! Fitting parameters to target annual (safe, risky) rate pairs.
//!
//! Risk aversion is pinned by the spread. The risky rate is pinned by `mu`
//! under linear production and by `beta` otherwise.

use alloc::format;

use crate::experiments::steady::{steady_shocks, steady_state_from_shocks, SteadySpec, SteadyState};
use crate::experiments::streams;
use crate::model::{
    annual_to_generational, beta_from_annual_discount, generational_to_annual, EconomyParams, RateTargets,
    ShockStream, Technology, DEFAULT_ANNUAL_DISCOUNT,
};
use crate::quadrature::ExpectationRule;
use crate::root::{brent, RootOptions};
use crate::{Error, Result};

/// Parameters fixed a priori rather than fitted.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StructuralChoices {
    pub technology: Technology,
    pub b: f64,
    pub sigma: f64,
    pub endowment_fraction: f64,
    pub old_share: f64,
    pub period_years: f64,
    /// Sets `beta` under linear production, where rates do not identify it.
    pub annual_discount: f64,
    /// Log productivity mean outside the linear branch, where rates do not
    /// identify it.
    pub mu: f64,
}

impl Default for StructuralChoices {
    fn default() -> Self {
        StructuralChoices {
            technology: Technology::Linear,
            b: 1.0 / 3.0,
            sigma: 0.2,
            endowment_fraction: 1.0,
            old_share: 1.0,
            period_years: 25.0,
            annual_discount: DEFAULT_ANNUAL_DISCOUNT,
            mu: 0.0,
        }
    }
}

impl StructuralChoices {
    /// Economy parameters with the fitted values left at neutral defaults.
    pub fn base_params(&self) -> EconomyParams {
        EconomyParams {
            beta: beta_from_annual_discount(self.annual_discount, self.period_years),
            gamma: 0.0,
            mu: self.mu,
            sigma: self.sigma,
            b: self.b,
            technology: self.technology,
            endowment_fraction: self.endowment_fraction,
            old_share: self.old_share,
            period_years: self.period_years,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CalibrationOptions {
    pub steady: SteadySpec,
    pub master_seed: u64,
    pub stream_id: u64,
    /// `None` selects [`ExpectationRule::for_risk`].
    pub rule: Option<ExpectationRule>,
    /// Accepted risky-rate error, percentage points per year.
    pub risky_tolerance_pp: f64,
    /// Accepted safe-rate error, percentage points per year.
    pub safe_tolerance_pp: f64,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        CalibrationOptions {
            steady: SteadySpec::default(),
            master_seed: 0,
            stream_id: streams::CALIBRATION,
            rule: None,
            risky_tolerance_pp: 0.1,
            safe_tolerance_pp: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CalibrationResult {
    pub params: EconomyParams,
    pub targets: RateTargets,
    pub achieved_risky_annual: f64,
    pub achieved_safe_annual: f64,
    /// Endowment in the verification simulation.
    pub endowment: f64,
    pub iterations: usize,
}

impl CalibrationResult {
    pub fn risky_residual_pp(&self) -> f64 {
        self.achieved_risky_annual - self.targets.risky_annual
    }

    pub fn safe_residual_pp(&self) -> f64 {
        self.achieved_safe_annual - self.targets.safe_annual
    }
}

/// `gamma = (ln ER - ln R^f) / sigma^2` on gross generational rates.
pub fn gamma_from_spread(targets: &RateTargets, sigma: f64, period_years: f64) -> Result<f64> {
    targets.validate()?;
    let risky = annual_to_generational(targets.risky_annual, period_years)?;
    let safe = annual_to_generational(targets.safe_annual, period_years)?;
    let spread = libm::log(risky) - libm::log(safe);
    if sigma == 0.0 {
        if spread == 0.0 {
            return Ok(0.0);
        }
        return Err(Error::InfeasibleTarget(format!(
            "a risk spread of {spread} needs sigma > 0"
        )));
    }
    if !(sigma > 0.0) {
        return Err(Error::param("sigma", "must be non-negative"));
    }
    Ok(spread / (sigma * sigma))
}

/// `mu` such that `E[A] b` equals the generational gross target.
pub fn fit_risky_linear(target_risky_annual: f64, base: &EconomyParams) -> Result<f64> {
    if !base.technology.is_linear() {
        return Err(Error::param("technology", "the closed-form risky fit needs linear production"));
    }
    let r = annual_to_generational(target_risky_annual, base.period_years)?;
    Ok(libm::log(r / base.b) - 0.5 * base.sigma * base.sigma)
}

/// Warm start for the `beta` fit: with the endowment equal to a fraction `f`
/// of the wage, the deterministic Cobb-Douglas steady state has
/// `ER = b / (beta (1 + f) (1 - b))`.
pub fn cobb_douglas_beta_guess(target_risky_gross: f64, b: f64, endowment_fraction: f64) -> f64 {
    b / ((1.0 + endowment_fraction) * (1.0 - b) * target_risky_gross)
}

const BETA_MIN: f64 = 1e-9;
const BETA_MAX: f64 = 1.0 - 1e-9;

/// Root-finds `beta` so the steady-state mean of `E_t[R_{t+1}]` hits the
/// target. Returns `beta` and the number of root-finder iterations.
pub fn fit_risky_cobb_douglas(
    target_risky_annual: f64,
    base: &EconomyParams,
    options: &CalibrationOptions,
) -> Result<(f64, usize)> {
    if base.technology.is_linear() {
        return Err(Error::param("technology", "beta does not move the risky rate under linear production"));
    }
    let target = annual_to_generational(target_risky_annual, base.period_years)?;
    let stream = ShockStream::new(options.master_seed, options.stream_id, base.mu, base.sigma);
    let shocks = steady_shocks(&options.steady, &stream);
    fit_beta(target, base, options, &shocks)
}

fn fit_beta(target: f64, base: &EconomyParams, options: &CalibrationOptions, shocks: &[f64]) -> Result<(f64, usize)> {
    let log_target = libm::log(target);
    let mut last_endowment = None;
    let mut residual = |log_beta: f64| -> Result<f64> {
        let params = EconomyParams {
            beta: libm::exp(log_beta),
            ..*base
        };
        let s = steady_state_from_shocks(&params, &options.steady, options.rule, shocks, last_endowment)?;
        last_endowment = Some(s.economy.endowment());
        Ok(libm::log(s.stats.mean_expected_risky) - log_target)
    };
    let hi = libm::log(BETA_MAX);
    if residual(hi)? > 0.0 {
        return Err(Error::InfeasibleTarget(format!(
            "risky target {target} needs beta >= 1"
        )));
    }
    let guess = cobb_douglas_beta_guess(target, base.b, base.endowment_fraction).clamp(BETA_MIN, BETA_MAX);
    // Bracket outward from the warm start; the residual falls with beta.
    let floor = libm::log(BETA_MIN);
    let mut lo = (libm::log(guess) - 0.5).max(floor);
    let mut tries = 0;
    while residual(lo)? < 0.0 {
        if lo <= floor {
            return Err(Error::InfeasibleTarget(format!(
                "risky target {target} needs beta below {BETA_MIN}"
            )));
        }
        lo = (lo - 1.0).max(floor);
        tries += 1;
    }
    let mut upper = (libm::log(guess) + 0.5).min(hi);
    while residual(upper)? > 0.0 {
        upper = (upper + 1.0).min(hi);
        tries += 1;
    }
    let opts = RootOptions {
        f_tol: 1e-12,
        ..RootOptions::default()
    };
    let root = brent(residual, lo, upper, opts)?;
    Ok((libm::exp(root.x), root.iterations + tries))
}

const MAX_CORRECTIONS: usize = 25;

/// Full calibration: spread, risky fit and a verification simulation on the
/// calibration stream, with an outer correction on `gamma` (and `mu` under
/// linear production) until simulated rates match.
pub fn calibrate(targets: &RateTargets, choices: &StructuralChoices, options: &CalibrationOptions) -> Result<CalibrationResult> {
    targets.validate()?;
    let mut params = choices.base_params();
    params.validate()?;
    params.gamma = gamma_from_spread(targets, choices.sigma, choices.period_years)?;
    let risky_target = annual_to_generational(targets.risky_annual, choices.period_years)?;
    let safe_target = annual_to_generational(targets.safe_annual, choices.period_years)?;
    let stream = ShockStream::new(options.master_seed, options.stream_id, params.mu, params.sigma);
    let mut iterations = 0;
    if params.technology.is_linear() {
        params.mu = fit_risky_linear(targets.risky_annual, &params)?;
    }
    // Shocks under the linear branch depend on mu; redraw after each update.
    let mut state: SteadyState;
    let mut shocks = steady_shocks(&options.steady, &stream.with_law(params.mu, params.sigma));
    if !params.technology.is_linear() {
        let (beta, n) = fit_beta(risky_target, &params, options, &shocks)?;
        params.beta = beta;
        iterations += n;
    }
    loop {
        state = steady_state_from_shocks(&params, &options.steady, options.rule, &shocks, None)?;
        iterations += 1;
        let risky_gap = libm::log(state.stats.mean_expected_risky) - libm::log(risky_target);
        let safe_gap = libm::log(state.stats.mean_safe) - libm::log(safe_target);
        let converged = risky_gap.abs() < 1e-10 && safe_gap.abs() < 1e-10;
        if converged || iterations >= MAX_CORRECTIONS {
            break;
        }
        if params.technology.is_linear() {
            params.mu -= risky_gap;
            shocks = steady_shocks(&options.steady, &stream.with_law(params.mu, params.sigma));
        } else if risky_gap.abs() >= 1e-10 {
            let (beta, n) = fit_beta(risky_target, &params, options, &shocks)?;
            params.beta = beta;
            iterations += n;
        }
        if params.sigma > 0.0 {
            params.gamma = (params.gamma + (safe_gap - risky_gap) / (params.sigma * params.sigma)).max(0.0);
        }
    }
    let achieved_risky_annual = generational_to_annual(state.stats.mean_expected_risky, params.period_years)?;
    let achieved_safe_annual = generational_to_annual(state.stats.mean_safe, params.period_years)?;
    let result = CalibrationResult {
        params,
        targets: *targets,
        achieved_risky_annual,
        achieved_safe_annual,
        endowment: state.economy.endowment(),
        iterations,
    };
    if result.risky_residual_pp().abs() > options.risky_tolerance_pp || result.safe_residual_pp().abs() > options.safe_tolerance_pp {
        return Err(Error::CalibrationFailed {
            risky_residual: result.risky_residual_pp(),
            safe_residual: result.safe_residual_pp(),
        });
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn targets(safe: f64, risky: f64) -> RateTargets {
        RateTargets::new(safe, risky).unwrap()
    }

    #[test]
    fn zero_spread_gives_zero_gamma() {
        assert_eq!(gamma_from_spread(&targets(1.5, 1.5), 0.2, 25.0).unwrap(), 0.0);
    }

    #[test]
    fn negative_spread_is_rejected() {
        let t = RateTargets {
            safe_annual: 2.0,
            risky_annual: 1.0,
        };
        assert!(matches!(gamma_from_spread(&t, 0.2, 25.0), Err(Error::NegativeGamma { .. })));
    }

    #[test]
    fn linear_fit_closed_form() {
        let base = EconomyParams {
            sigma: 0.0,
            ..EconomyParams::default()
        };
        let mu = fit_risky_linear(0.0, &EconomyParams { b: 1.0 / 3.0, ..base }).unwrap();
        assert!((mu - libm::log(3.0)).abs() < 1e-15);
        let m1 = fit_risky_linear(2.0, &EconomyParams { b: 0.2, ..base }).unwrap();
        let m2 = fit_risky_linear(2.0, &EconomyParams { b: 0.4, ..base }).unwrap();
        assert!((libm::exp(m2) / libm::exp(m1) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn linear_fit_rejects_other_branches() {
        let base = EconomyParams {
            technology: Technology::CobbDouglas,
            ..EconomyParams::default()
        };
        assert!(fit_risky_linear(2.0, &base).is_err());
    }

    #[test]
    fn beta_guess_matches_deterministic_steady_state() {
        // beta (1 + f)(1 - b) K^b = K and ER = b K^(b - 1).
        let (b, f, target) = (1.0 / 3.0, 1.0, 1.8);
        let beta = cobb_douglas_beta_guess(target, b, f);
        let k = libm::pow(beta * (1.0 + f) * (1.0 - b), 1.0 / (1.0 - b));
        assert!((b * libm::pow(k, b - 1.0) - target).abs() < 1e-12);
    }
}
