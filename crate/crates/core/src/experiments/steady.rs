//! No-transfer steady state used for calibration and as the starting point
//! of every experiment.

use alloc::vec::Vec;

use crate::household::Economy;
use crate::model::{EconomyParams, ShockStream};
use crate::quadrature::ExpectationRule;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SteadySpec {
    /// Periods averaged after burn-in.
    pub realizations: usize,
    pub burn_in: usize,
    pub initial_capital: f64,
}

impl Default for SteadySpec {
    fn default() -> Self {
        SteadySpec {
            realizations: 30_000,
            burn_in: 100,
            initial_capital: 1.0,
        }
    }
}

/// Time averages over a no-transfer simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SteadyStats {
    /// Mean capital chosen by the young. Without debt this is also mean saving.
    pub mean_capital: f64,
    pub mean_wage: f64,
    /// Mean of `E_t[R_{t+1}]`, gross generational.
    pub mean_expected_risky: f64,
    /// Mean of the shadow safe rate `R^f_{t+1}`, gross generational.
    pub mean_safe: f64,
    /// Mean realized gross return `R_t`.
    pub mean_realized_risky: f64,
    pub periods: usize,
}

impl SteadyStats {
    /// `ln(mean R^f) - ln(mean E R)`.
    pub fn log_spread(&self) -> f64 {
        libm::log(self.mean_safe) - libm::log(self.mean_expected_risky)
    }
}

#[derive(Debug, Clone)]
pub struct SteadyState {
    /// Economy with the endowment set to `endowment_fraction` of the mean wage.
    pub economy: Economy,
    pub stats: SteadyStats,
    pub endowment_iterations: usize,
}

impl SteadyState {
    /// Average capital, used as the starting capital of experiments.
    pub fn mean_capital(&self) -> f64 {
        self.stats.mean_capital
    }

    /// Average saving of the young, the scale for transfers and debt.
    pub fn mean_saving(&self) -> f64 {
        self.stats.mean_capital
    }
}

/// Simulates the no-transfer economy over the given shocks, discarding the
/// first `burn_in` periods from the averages.
pub fn simulate_no_transfer(economy: &Economy, initial_capital: f64, shocks: &[f64], burn_in: usize) -> Result<SteadyStats> {
    if shocks.len() <= burn_in {
        return Err(Error::param("realizations", "must exceed zero after burn-in"));
    }
    if !(initial_capital > 0.0) || !initial_capital.is_finite() {
        return Err(Error::param("initial_capital", "must be positive and finite"));
    }
    let beta = economy.params().beta;
    let x = economy.endowment();
    let mut prices = economy.prices(initial_capital);
    let mut realized = 0.0;
    let (mut sk, mut sw, mut sq) = (0.0, 0.0, 0.0);
    for (t, a) in shocks.iter().enumerate() {
        let wage = a * prices.wage;
        let r = a * prices.risky;
        let k = beta * (wage + x);
        if !(k > 1e-200 && k < 1e200) {
            return Err(Error::Divergence { period: t });
        }
        prices = economy.prices(k);
        if t >= burn_in {
            sk += k;
            sw += wage;
            sq += prices.risky;
            realized += r;
        }
    }
    let n = (shocks.len() - burn_in) as f64;
    let mean_unit_risky = sq / n;
    Ok(SteadyStats {
        mean_capital: sk / n,
        mean_wage: sw / n,
        mean_expected_risky: economy.mean_shock() * mean_unit_risky,
        mean_safe: economy.safe_factor() * mean_unit_risky,
        mean_realized_risky: realized / n,
        periods: shocks.len() - burn_in,
    })
}

/// Draws `burn_in + realizations` shocks from the start of `stream`.
pub fn steady_shocks(spec: &SteadySpec, stream: &ShockStream) -> Vec<f64> {
    let n = spec.burn_in + spec.realizations;
    let mu = stream.mu();
    let sigma = stream.sigma();
    stream.normals(0, n).into_iter().map(|z| libm::exp(mu + sigma * z)).collect()
}

/// Runs the no-transfer simulation, iterating the endowment to a fixed point
/// `X = endowment_fraction * mean wage`.
pub fn initialize_steady_state(
    params: &EconomyParams,
    spec: &SteadySpec,
    rule: Option<ExpectationRule>,
    master_seed: u64,
    stream_id: u64,
) -> Result<SteadyState> {
    let stream = ShockStream::new(master_seed, stream_id, params.mu, params.sigma);
    let shocks = steady_shocks(spec, &stream);
    steady_state_from_shocks(params, spec, rule, &shocks, None)
}

const MAX_ENDOWMENT_ITERATIONS: usize = 200;

pub(crate) fn steady_state_from_shocks(
    params: &EconomyParams,
    spec: &SteadySpec,
    rule: Option<ExpectationRule>,
    shocks: &[f64],
    endowment_guess: Option<f64>,
) -> Result<SteadyState> {
    params.validate()?;
    let rule = rule.unwrap_or_else(|| ExpectationRule::for_risk(params.gamma, params.sigma));
    let run = |x: f64| -> Result<(Economy, SteadyStats)> {
        let economy = Economy::new(*params, x, rule)?;
        let stats = simulate_no_transfer(&economy, spec.initial_capital, shocks, spec.burn_in)?;
        Ok((economy, stats))
    };
    // Secant iteration on g(X) = fraction * mean wage(X) - X.
    let mut x0 = endowment_guess.unwrap_or(0.0);
    let (mut economy, mut stats) = run(x0)?;
    let mut g0 = params.endowment_fraction * stats.mean_wage - x0;
    let mut x1 = x0 + g0;
    for iteration in 1..=MAX_ENDOWMENT_ITERATIONS {
        if g0.abs() <= 1e-13 * x0.abs() {
            return Ok(SteadyState {
                economy,
                stats,
                endowment_iterations: iteration,
            });
        }
        let (e1, s1) = run(x1)?;
        let g1 = params.endowment_fraction * s1.mean_wage - x1;
        let slope = (g1 - g0) / (x1 - x0);
        let next = if slope.is_finite() && slope < 0.0 { x1 - g1 / slope } else { x1 + g1 };
        x0 = x1;
        g0 = g1;
        economy = e1;
        stats = s1;
        x1 = next.max(0.0);
    }
    Err(Error::NonConvergence {
        iterations: MAX_ENDOWMENT_ITERATIONS,
        residual: g0,
    })
}
