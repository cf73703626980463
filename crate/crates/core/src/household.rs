//! The young household's saving problem and the economy's equations of motion.
//!
//! Preferences are Epstein-Zin-Weil with unit intertemporal elasticity:
//! `U = (1 - beta) ln C1 + beta / (1 - gamma) ln E[C2^(1 - gamma)]`.
//! Households are price takers; the next-period return is the general
//! equilibrium return at the capital stock they choose in aggregate.

use alloc::vec::Vec;

use crate::model::{unit_prices, EconomyParams, PeriodState, UnitPrices};
use crate::quadrature::{ExpectationRule, ShockSupport};
use crate::root::{brent, RootOptions};
use crate::{Error, Result};

/// Saving problem of one young cohort.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SavingProblem {
    /// Wage plus endowment minus any transfer or tax paid.
    pub cash_on_hand: f64,
    /// Non-stochastic transfer received when old.
    pub transfer_to_old_next: f64,
    /// Safe debt the cohort must absorb.
    pub debt_holding: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumSolution {
    pub capital_chosen: f64,
    /// Gross generational safe rate on debt bought this period.
    pub safe_rate: f64,
    /// `ln(beta C1 E[R C2^-g] / E[C2^(1-g)]) - ln(1 - beta)` at the solution.
    pub foc_residual: f64,
    /// `(R^f - E[R C2^-g] / E[C2^-g]) / R^f` at the solution.
    pub portfolio_residual: f64,
    pub iterations: usize,
}

/// Transfers between the government and the two living cohorts in a period
/// with public debt.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DebtFlows {
    /// Paid to the current old on top of capital income.
    pub to_old: f64,
    /// Lump-sum tax on the current young.
    pub tax: f64,
    /// Debt issued this period and bought by the young.
    pub new_debt: f64,
}

/// Ratios of second-period moments, each relative to `E[C2^-g]`.
#[derive(Debug, Clone, Copy)]
struct Moments {
    /// `E[R C2^-g] / E[C2^-g]`
    safe: f64,
    /// `E[C2^(1-g)] / E[C2^-g]`
    wealth: f64,
}

/// One parameterized economy with its expectation rule.
#[derive(Debug, Clone)]
pub struct Economy {
    params: EconomyParams,
    endowment: f64,
    rule: ExpectationRule,
    support: ShockSupport,
    mean_shock: f64,
    /// `E[A^(1-g)] / E[A^-g]`
    safe_factor: f64,
    /// `ln CE(A)`
    log_ce_shock: f64,
    min_shock: f64,
    max_shock: f64,
}

const OUTER: RootOptions = RootOptions {
    f_tol: 1e-10,
    x_tol: 4.0 * f64::EPSILON,
    max_iter: 200,
};
const INNER: RootOptions = RootOptions {
    f_tol: 1e-14,
    x_tol: 4.0 * f64::EPSILON,
    max_iter: 200,
};

impl Economy {
    /// `endowment` is the absolute non-stochastic endowment of each young
    /// cohort.
    pub fn new(params: EconomyParams, endowment: f64, rule: ExpectationRule) -> Result<Self> {
        params.validate()?;
        if !(endowment >= 0.0) || !endowment.is_finite() {
            return Err(Error::param("endowment", "must be finite and >= 0"));
        }
        let support = rule.support(params.mu, params.sigma)?;
        let log_values: Vec<f64> = support.values().iter().map(|a| libm::log(*a)).collect();
        let g = params.gamma;
        let w = support.weights();
        let safe_factor = libm::exp(log_expect_pow(&log_values, w, 1.0 - g) - log_expect_pow(&log_values, w, -g));
        let log_ce_shock = log_certainty_equivalent(&log_values, w, g);
        Ok(Economy {
            mean_shock: support.mean(),
            min_shock: support.min(),
            max_shock: support.max(),
            params,
            endowment,
            rule,
            support,
            safe_factor,
            log_ce_shock,
        })
    }

    /// Uses [`ExpectationRule::for_risk`].
    pub fn with_default_rule(params: EconomyParams, endowment: f64) -> Result<Self> {
        Self::new(params, endowment, ExpectationRule::for_risk(params.gamma, params.sigma))
    }

    pub fn params(&self) -> &EconomyParams {
        &self.params
    }

    pub fn endowment(&self) -> f64 {
        self.endowment
    }

    pub fn rule(&self) -> ExpectationRule {
        self.rule
    }

    pub fn support(&self) -> &ShockSupport {
        &self.support
    }

    /// `E[A]` under the expectation rule.
    pub fn mean_shock(&self) -> f64 {
        self.mean_shock
    }

    pub fn prices(&self, capital: f64) -> UnitPrices {
        unit_prices(self.params.technology, self.params.b, capital)
    }

    /// `E[A^(1-g)] / E[A^-g]`, the ratio of the no-transfer safe rate to the
    /// per-unit-productivity return.
    pub fn safe_factor(&self) -> f64 {
        self.safe_factor
    }

    /// `E_t[R_{t+1}]` given capital chosen at `t`.
    pub fn expected_risky(&self, capital: f64) -> f64 {
        self.mean_shock * self.prices(capital).risky
    }

    /// Shadow safe rate when second-period consumption is pure capital
    /// income. Equals `E[R] E[A^(1-g)] / (E[A] E[A^-g])`.
    pub fn safe_rate_no_transfer(&self, capital: f64) -> f64 {
        self.safe_factor * self.prices(capital).risky
    }

    /// `R^f = E[R C2^-g] / E[C2^-g]` with `C2 = R K + second_period_claims`.
    pub fn shadow_safe_rate(&self, capital: f64, second_period_claims: f64) -> Result<f64> {
        if second_period_claims == 0.0 {
            check_capital(capital)?;
            return Ok(self.safe_rate_no_transfer(capital));
        }
        let q = self.prices(capital).risky;
        Ok(self.moments(q, capital, second_period_claims)?.safe)
    }

    fn moments(&self, q: f64, k: f64, c0: f64) -> Result<Moments> {
        let g = self.params.gamma;
        let lowest = self.min_shock * q * k + c0;
        if !(lowest > 0.0) || !lowest.is_finite() {
            return Err(Error::NoSolution("second-period consumption is not positive at every node"));
        }
        // C2 rises with A, so the largest exponent sits at the lowest node.
        let shift = -g * libm::log(lowest);
        let (mut s0, mut sr, mut s1) = (0.0, 0.0, 0.0);
        for (a, w) in self.support.values().iter().zip(self.support.weights()) {
            let r = a * q;
            let c2 = r * k + c0;
            let e = if g == 0.0 { *w } else { w * libm::exp(-g * libm::log(c2) - shift) };
            s0 += e;
            sr += e * r;
            s1 += e * c2;
        }
        Ok(Moments {
            safe: sr / s0,
            wealth: s1 / s0,
        })
    }

    /// Portfolio condition: the safe rate at which the young are indifferent
    /// between the marginal unit of debt and of capital.
    fn portfolio_rate(&self, q: f64, k: f64, debt: f64, transfer: f64) -> Result<(f64, f64)> {
        if debt == 0.0 {
            return Ok((self.moments(q, k, transfer)?.safe, 0.0));
        }
        let lo = self.min_shock * q;
        let hi = self.max_shock * q;
        let residual = |x: f64| -> Result<f64> { Ok((x - self.moments(q, k, x * debt + transfer)?.safe) / x) };
        if hi - lo <= 1e-15 * hi {
            let x = self.moments(q, k, lo * debt + transfer)?.safe;
            return Ok((x, residual(x)?));
        }
        let root = brent(residual, lo, hi, INNER)?;
        Ok((root.x, root.fx))
    }

    /// Chooses capital to satisfy the first-order condition and, with debt,
    /// the portfolio condition.
    pub fn solve_saving(&self, problem: &SavingProblem) -> Result<EquilibriumSolution> {
        let SavingProblem {
            cash_on_hand: y,
            transfer_to_old_next: t,
            debt_holding: d,
        } = *problem;
        if !(y > 0.0) || !y.is_finite() {
            return Err(Error::Domain("cash on hand must be positive"));
        }
        if !(t >= 0.0) || !(d >= 0.0) {
            return Err(Error::Domain("transfers and debt holdings must be non-negative"));
        }
        let beta = self.params.beta;
        let investable = y - d;
        if !(investable > 0.0) {
            return Err(Error::Insolvent { resources: y, debt: d });
        }
        if t == 0.0 {
            // Log intertemporal aggregator with only financial income next
            // period: total saving is beta times cash on hand.
            let k = beta * y - d;
            if !(k > 0.0) {
                return Err(Error::Insolvent { resources: y, debt: d });
            }
            let q = self.prices(k).risky;
            let (safe_rate, portfolio_residual) = self.portfolio_rate(q, k, d, 0.0)?;
            let foc_residual = self.foc(y, d, 0.0, k, q, safe_rate)?;
            return Ok(EquilibriumSolution {
                capital_chosen: k,
                safe_rate,
                foc_residual,
                portfolio_residual,
                iterations: 0,
            });
        }
        let f = |k: f64| -> Result<f64> {
            let q = self.prices(k).risky;
            let (rf, _) = self.portfolio_rate(q, k, d, t)?;
            self.foc(y, d, t, k, q, rf)
        };
        let lo = investable * 1e-9;
        let hi = investable * (1.0 - 1e-9);
        if f(lo)? <= 0.0 {
            return Err(Error::NoSolution("transfer crowds out all capital"));
        }
        let root = brent(f, lo, hi, OUTER)?;
        let k = root.x;
        let q = self.prices(k).risky;
        let (safe_rate, portfolio_residual) = self.portfolio_rate(q, k, d, t)?;
        Ok(EquilibriumSolution {
            capital_chosen: k,
            safe_rate,
            foc_residual: root.fx,
            portfolio_residual,
            iterations: root.iterations,
        })
    }

    fn foc(&self, y: f64, d: f64, t: f64, k: f64, q: f64, rf: f64) -> Result<f64> {
        let beta = self.params.beta;
        let c1 = y - d - k;
        let m = self.moments(q, k, rf * d + t)?;
        Ok(libm::log(beta * c1 * m.safe / m.wealth) - libm::log1p(-beta))
    }

    /// `ln CE(C2)` for `C2 = A q K + c0` over the support.
    fn log_ce(&self, q: f64, k: f64, c0: f64) -> f64 {
        if c0 == 0.0 {
            return libm::log(q * k) + self.log_ce_shock;
        }
        let logs: Vec<f64> = self.support.values().iter().map(|a| libm::log(a * q * k + c0)).collect();
        log_certainty_equivalent(&logs, self.support.weights(), self.params.gamma)
    }

    /// Ex-ante utility of a young cohort consuming `c1` and holding `k`
    /// capital plus safe or transfer claims worth `c0` next period.
    pub fn cohort_utility(&self, c1: f64, k: f64, c0: f64) -> Result<f64> {
        if !(c1 > 0.0) {
            return Err(Error::Domain("first-period consumption must be positive"));
        }
        if !(k >= 0.0) || !(c0 >= 0.0) || (k == 0.0 && c0 == 0.0) {
            return Err(Error::Domain("second-period consumption must be positive"));
        }
        let beta = self.params.beta;
        let q = if k > 0.0 { self.prices(k).risky } else { 0.0 };
        Ok((1.0 - beta) * libm::log(c1) + beta * self.log_ce(q, k, c0))
    }

    fn period_prices(&self, prev_capital: f64, shock: f64) -> Result<(f64, f64, f64)> {
        check_capital(prev_capital)?;
        if !(shock > 0.0) || !shock.is_finite() {
            return Err(Error::Domain("productivity shock must be positive"));
        }
        let p = self.prices(prev_capital);
        Ok((shock * p.output, shock * p.wage, shock * p.risky))
    }

    fn young_without_claims(&self, resources: f64) -> (f64, f64, f64, f64) {
        let beta = self.params.beta;
        let k = beta * resources;
        let c1 = resources - k;
        let q = self.prices(k).risky;
        let u = (1.0 - beta) * libm::log(c1) + beta * (libm::log(q * k) + self.log_ce_shock);
        (k, c1, self.safe_factor * q, u)
    }

    /// One period of the economy with a stationary pay-as-you-go transfer:
    /// each young cohort pays `transfer` and each old cohort receives
    /// `old_share * transfer`.
    pub fn step_no_debt(&self, prev_capital: f64, shock: f64, transfer: f64) -> Result<PeriodState> {
        let (output, wage, risky) = self.period_prices(prev_capital, shock)?;
        if !(transfer >= 0.0) {
            return Err(Error::Domain("transfer must be non-negative"));
        }
        let gross = wage + self.endowment;
        let resources = gross - transfer;
        if !(resources > 0.0) {
            return Err(Error::Infeasible {
                resources: gross,
                payment: transfer,
            });
        }
        let received = self.params.old_share * transfer;
        let (k, c1, rf, u) = if transfer == 0.0 {
            self.young_without_claims(resources)
        } else {
            let sol = self.solve_saving(&SavingProblem {
                cash_on_hand: resources,
                transfer_to_old_next: received,
                debt_holding: 0.0,
            })?;
            let c1 = resources - sol.capital_chosen;
            let u = self.cohort_utility(c1, sol.capital_chosen, received)?;
            (sol.capital_chosen, c1, sol.safe_rate, u)
        };
        Ok(PeriodState {
            shock,
            capital: prev_capital,
            output,
            wage,
            risky_return: risky,
            safe_return: rf,
            capital_chosen: k,
            young_consumption: c1,
            old_consumption: risky * prev_capital + received,
            debt: 0.0,
            tax: transfer,
            young_utility: u,
        })
    }

    /// One period with public debt. The young pay `flows.tax`, buy
    /// `flows.new_debt` at the safe rate that clears the portfolio condition,
    /// and the old receive `flows.to_old`.
    pub fn step_with_debt(&self, prev_capital: f64, shock: f64, flows: DebtFlows) -> Result<PeriodState> {
        let (output, wage, risky) = self.period_prices(prev_capital, shock)?;
        let DebtFlows { to_old, tax, new_debt } = flows;
        if !(to_old >= 0.0) || !(tax >= 0.0) || !(new_debt >= 0.0) {
            return Err(Error::Domain("debt flows must be non-negative"));
        }
        let gross = wage + self.endowment;
        let resources = gross - tax;
        if !(resources > 0.0) {
            return Err(Error::Infeasible {
                resources: gross,
                payment: tax,
            });
        }
        let (k, c1, rf, u) = if new_debt == 0.0 {
            self.young_without_claims(resources)
        } else {
            let sol = self.solve_saving(&SavingProblem {
                cash_on_hand: resources,
                transfer_to_old_next: 0.0,
                debt_holding: new_debt,
            })?;
            let k = sol.capital_chosen;
            let c1 = resources - k - new_debt;
            let u = self.cohort_utility(c1, k, sol.safe_rate * new_debt)?;
            (k, c1, sol.safe_rate, u)
        };
        Ok(PeriodState {
            shock,
            capital: prev_capital,
            output,
            wage,
            risky_return: risky,
            safe_return: rf,
            capital_chosen: k,
            young_consumption: c1,
            old_consumption: risky * prev_capital + to_old,
            debt: new_debt,
            tax,
            young_utility: u,
        })
    }
}

fn check_capital(capital: f64) -> Result<()> {
    if !(capital > 0.0) || !capital.is_finite() {
        return Err(Error::Domain("capital must be positive and finite"));
    }
    Ok(())
}

/// `ln E[A^p]` from log support values, shifted to avoid overflow.
fn log_expect_pow(log_values: &[f64], weights: &[f64], p: f64) -> f64 {
    let m = log_values.iter().map(|l| p * l).fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = log_values
        .iter()
        .zip(weights)
        .map(|(l, w)| w * libm::exp(p * l - m))
        .sum();
    m + libm::log(s)
}

/// `ln CE = ln E[C^(1-g)] / (1 - g)` from log consumption values, with the
/// `g = 1` limit `E[ln C]`. Accurate through the limit.
pub fn log_certainty_equivalent(log_values: &[f64], weights: &[f64], gamma: f64) -> f64 {
    let eps = 1.0 - gamma;
    let mean: f64 = log_values.iter().zip(weights).map(|(l, w)| w * l).sum();
    if eps == 0.0 {
        return mean;
    }
    let spread = log_values.iter().map(|l| (l - mean).abs()).fold(0.0, f64::max);
    if (eps * spread).abs() < 1.0 {
        let s: f64 = log_values
            .iter()
            .zip(weights)
            .map(|(l, w)| w * libm::expm1(eps * (l - mean)))
            .sum();
        mean + libm::log1p(s) / eps
    } else {
        mean + log_expect_pow_centered(log_values, weights, eps, mean) / eps
    }
}

fn log_expect_pow_centered(log_values: &[f64], weights: &[f64], p: f64, center: f64) -> f64 {
    let m = log_values.iter().map(|l| p * (l - center)).fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = log_values
        .iter()
        .zip(weights)
        .map(|(l, w)| w * libm::exp(p * (l - center) - m))
        .sum();
    m + libm::log(s)
}

/// Epstein-Zin-Weil utility of a first-period consumption and a discrete
/// second-period consumption distribution.
pub fn realized_welfare(beta: f64, gamma: f64, c1: f64, c2: &[f64], weights: &[f64]) -> Result<f64> {
    if !(c1 > 0.0) {
        return Err(Error::Domain("first-period consumption must be positive"));
    }
    if c2.is_empty() || c2.len() != weights.len() {
        return Err(Error::Domain("second-period distribution is empty or mismatched"));
    }
    if c2.iter().any(|c| !(*c > 0.0)) {
        return Err(Error::Domain("second-period consumption must be positive"));
    }
    let logs: Vec<f64> = c2.iter().map(|c| libm::log(*c)).collect();
    Ok((1.0 - beta) * libm::log(c1) + beta * log_certainty_equivalent(&logs, weights, gamma))
}

/// Uniform percent change in baseline consumption, in both periods and in
/// every state, that yields utility `utility` from baseline utility `baseline`.
pub fn consumption_equivalent_percent(utility: f64, baseline: f64) -> f64 {
    100.0 * libm::expm1(utility - baseline)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Technology;

    fn economy(technology: Technology, gamma: f64, sigma: f64) -> Economy {
        let params = EconomyParams {
            technology,
            gamma,
            sigma,
            beta: 0.3,
            ..EconomyParams::default()
        };
        Economy::with_default_rule(params, 0.5).unwrap()
    }

    #[test]
    fn no_transfer_saving_is_beta_share() {
        let e = economy(Technology::CobbDouglas, 8.0, 0.2);
        let s = e.step_no_debt(0.3, 1.1, 0.0).unwrap();
        let y = s.wage + 0.5;
        assert!((s.capital_chosen - 0.3 * y).abs() < 1e-15);
        assert!((s.young_consumption - 0.7 * y).abs() < 1e-15);
    }

    #[test]
    fn fast_path_matches_general_solver() {
        let e = economy(Technology::CobbDouglas, 5.0, 0.2);
        let sol = e
            .solve_saving(&SavingProblem {
                cash_on_hand: 1.0,
                transfer_to_old_next: 1e-300,
                debt_holding: 0.0,
            })
            .unwrap();
        assert!((sol.capital_chosen - 0.3).abs() < 1e-9);
        assert!((sol.safe_rate - e.safe_rate_no_transfer(0.3)).abs() < 1e-9);
    }

    #[test]
    fn transfer_solution_satisfies_foc() {
        let e = economy(Technology::Linear, 12.0, 0.2);
        let p = SavingProblem {
            cash_on_hand: 1.0,
            transfer_to_old_next: 0.05,
            debt_holding: 0.0,
        };
        let sol = e.solve_saving(&p).unwrap();
        assert!(sol.foc_residual.abs() < 1e-10);
        assert!(sol.capital_chosen < 0.3);
    }

    #[test]
    fn debt_portfolio_condition_holds() {
        let e = economy(Technology::CobbDouglas, 15.0, 0.2);
        let sol = e
            .solve_saving(&SavingProblem {
                cash_on_hand: 1.0,
                transfer_to_old_next: 0.0,
                debt_holding: 0.05,
            })
            .unwrap();
        assert!((sol.capital_chosen - 0.25).abs() < 1e-15);
        assert!(sol.portfolio_residual.abs() < 1e-12);
        let q = e.prices(sol.capital_chosen).risky;
        assert!(sol.safe_rate > e.min_shock * q && sol.safe_rate < e.max_shock * q);
    }

    #[test]
    fn insolvent_when_debt_exceeds_saving() {
        let e = economy(Technology::Linear, 2.0, 0.2);
        let err = e
            .solve_saving(&SavingProblem {
                cash_on_hand: 1.0,
                transfer_to_old_next: 0.0,
                debt_holding: 0.31,
            })
            .unwrap_err();
        assert!(matches!(err, Error::Insolvent { .. }));
    }

    #[test]
    fn infeasible_transfer() {
        let e = economy(Technology::Linear, 2.0, 0.2);
        let s = e.step_no_debt(1.0, 1.0, 0.0).unwrap();
        let err = e.step_no_debt(1.0, 1.0, s.wage + 0.5 + 1e-9).unwrap_err();
        assert!(matches!(err, Error::Infeasible { .. }));
    }

    #[test]
    fn zero_debt_step_is_bit_identical() {
        let e = economy(Technology::CobbDouglas, 9.0, 0.2);
        let a = e.step_no_debt(0.4, 0.9, 0.0).unwrap();
        let b = e.step_with_debt(0.4, 0.9, DebtFlows::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn certainty_equivalent_continuous_through_log_case() {
        let logs = [-0.3, 0.1, 0.4];
        let w = [0.2, 0.5, 0.3];
        let at_one = log_certainty_equivalent(&logs, &w, 1.0);
        let expected: f64 = logs.iter().zip(&w).map(|(l, w)| l * w).sum();
        assert_eq!(at_one, expected);
        for g in [1.0 - 1e-6, 1.0 + 1e-6] {
            assert!((log_certainty_equivalent(&logs, &w, g) - at_one).abs() < 1e-6);
        }
    }

    #[test]
    fn certainty_equivalent_large_gamma_is_finite() {
        let logs = [-2.0, 0.0, 3.0];
        let w = [0.25, 0.5, 0.25];
        let v = log_certainty_equivalent(&logs, &w, 60.0);
        let direct = libm::log(w.iter().zip(&logs).map(|(w, l)| w * libm::exp(-59.0 * l)).sum::<f64>()) / -59.0;
        assert!((v - direct).abs() < 1e-12);
    }

    #[test]
    fn consumption_equivalent_identity_and_scaling() {
        let c2 = [0.8, 1.0, 1.3];
        let w = [0.3, 0.4, 0.3];
        let base = realized_welfare(0.3, 4.0, 1.0, &c2, &w).unwrap();
        assert_eq!(consumption_equivalent_percent(base, base), 0.0);
        let scaled: Vec<f64> = c2.iter().map(|c| c * 1.05).collect();
        let u = realized_welfare(0.3, 4.0, 1.05, &scaled, &w).unwrap();
        assert!((consumption_equivalent_percent(u, base) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn welfare_rejects_nonpositive_consumption() {
        assert!(realized_welfare(0.3, 2.0, 1.0, &[0.0, 1.0], &[0.5, 0.5]).is_err());
        assert!(realized_welfare(0.3, 2.0, -1.0, &[1.0], &[1.0]).is_err());
    }
}
