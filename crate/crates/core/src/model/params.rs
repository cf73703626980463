use alloc::format;

use crate::{Error, Result};

/// Production branch. Labor is normalized to one.
///
/// `Linear` is the `eta = inf` limit (rho = 1) and `CobbDouglas` the `eta = 1`
/// limit (rho = 0). The Cobb-Douglas branch is evaluated in closed form; the
/// CES formula is never evaluated at rho = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Technology {
    Linear,
    CobbDouglas,
    Ces { eta: f64 },
}

impl Technology {
    /// Maps an elasticity of substitution onto a branch.
    pub fn from_eta(eta: f64) -> Result<Self> {
        if !(eta > 0.0) {
            return Err(Error::param("eta", format!("must be positive, got {eta}")));
        }
        Ok(if eta.is_infinite() {
            Technology::Linear
        } else if eta == 1.0 {
            Technology::CobbDouglas
        } else {
            Technology::Ces { eta }
        })
    }

    pub fn eta(&self) -> f64 {
        match *self {
            Technology::Linear => f64::INFINITY,
            Technology::CobbDouglas => 1.0,
            Technology::Ces { eta } => eta,
        }
    }

    /// `rho = (eta - 1) / eta`.
    pub fn rho(&self) -> f64 {
        match *self {
            Technology::Linear => 1.0,
            Technology::CobbDouglas => 0.0,
            Technology::Ces { eta } => (eta - 1.0) / eta,
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, Technology::Linear)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Technology::Linear => "linear",
            Technology::CobbDouglas => "cobb-douglas",
            Technology::Ces { .. } => "ces",
        }
    }
}

/// All structural parameters of one parameterized economy.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EconomyParams {
    /// Weight on second-period utility.
    pub beta: f64,
    /// Relative risk aversion.
    pub gamma: f64,
    /// Mean of log productivity.
    pub mu: f64,
    /// Standard deviation of log productivity. Zero is the degenerate limit.
    pub sigma: f64,
    /// CES capital share parameter.
    pub b: f64,
    pub technology: Technology,
    /// Non-stochastic endowment of the young as a fraction of the average
    /// no-transfer wage.
    pub endowment_fraction: f64,
    /// Fraction of transfer or issuance proceeds delivered to the old.
    pub old_share: f64,
    /// Length of one generation period in years.
    pub period_years: f64,
}

/// Weight on second-period utility implied by an annual discount factor
/// compounded over one period.
pub fn beta_from_annual_discount(annual_discount: f64, period_years: f64) -> f64 {
    let d = libm::pow(annual_discount, period_years);
    d / (1.0 + d)
}

/// Annual discount factor used for `beta` when production is linear and
/// `beta` is not pinned down by the risky-rate target.
pub const DEFAULT_ANNUAL_DISCOUNT: f64 = 0.97;

impl Default for EconomyParams {
    fn default() -> Self {
        EconomyParams {
            beta: beta_from_annual_discount(DEFAULT_ANNUAL_DISCOUNT, 25.0),
            gamma: 0.0,
            mu: 0.0,
            sigma: 0.2,
            b: 1.0 / 3.0,
            technology: Technology::Linear,
            endowment_fraction: 1.0,
            old_share: 1.0,
            period_years: 25.0,
        }
    }
}

impl EconomyParams {
    pub fn validate(&self) -> Result<()> {
        fn check(ok: bool, name: &'static str, value: f64, rule: &str) -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::param(name, format!("{rule}, got {value}")))
            }
        }
        check(self.beta > 0.0 && self.beta < 1.0, "beta", self.beta, "must lie in (0, 1)")?;
        check(self.gamma >= 0.0 && self.gamma.is_finite(), "gamma", self.gamma, "must be finite and >= 0")?;
        check(self.mu.is_finite(), "mu", self.mu, "must be finite")?;
        check(self.sigma >= 0.0 && self.sigma.is_finite(), "sigma", self.sigma, "must be finite and >= 0")?;
        check(self.b > 0.0 && self.b < 1.0, "b", self.b, "must lie in (0, 1)")?;
        check(self.technology.eta() > 0.0, "eta", self.technology.eta(), "must be positive")?;
        check(
            self.endowment_fraction >= 0.0 && self.endowment_fraction.is_finite(),
            "endowment_fraction",
            self.endowment_fraction,
            "must be finite and >= 0",
        )?;
        check(
            (0.0..=1.0).contains(&self.old_share),
            "old_share",
            self.old_share,
            "must lie in [0, 1]",
        )?;
        check(self.period_years > 0.0, "period_years", self.period_years, "must be positive")?;
        Ok(())
    }
}

/// Target net annual rates minus growth, in percent per year.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RateTargets {
    pub safe_annual: f64,
    pub risky_annual: f64,
}

impl RateTargets {
    pub fn new(safe_annual: f64, risky_annual: f64) -> Result<Self> {
        let t = RateTargets {
            safe_annual,
            risky_annual,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.safe_annual > -100.0 && self.risky_annual > -100.0)
            || !self.safe_annual.is_finite()
            || !self.risky_annual.is_finite()
        {
            return Err(Error::param("targets", "rates must be finite and above -100%"));
        }
        if self.safe_annual > self.risky_annual {
            return Err(Error::NegativeGamma {
                safe: self.safe_annual,
                risky: self.risky_annual,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn technology_limits() {
        assert_eq!(Technology::from_eta(f64::INFINITY).unwrap(), Technology::Linear);
        assert_eq!(Technology::from_eta(1.0).unwrap(), Technology::CobbDouglas);
        assert_eq!(Technology::Linear.rho(), 1.0);
        assert_eq!(Technology::CobbDouglas.rho(), 0.0);
        assert!((Technology::from_eta(2.0).unwrap().rho() - 0.5).abs() < 1e-15);
        assert!(Technology::from_eta(0.0).is_err());
    }

    #[test]
    fn default_params_are_valid() {
        let p = EconomyParams::default();
        p.validate().unwrap();
        assert!((p.b - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(p.period_years, 25.0);
    }

    #[test]
    fn rejects_out_of_range() {
        let p = EconomyParams { beta: 1.0, ..EconomyParams::default() };
        assert!(p.validate().is_err());
        let p = EconomyParams { old_share: 1.1, ..EconomyParams::default() };
        assert!(p.validate().is_err());
    }

    #[test]
    fn targets_require_non_negative_spread() {
        assert!(RateTargets::new(-1.0, 2.0).is_ok());
        assert!(RateTargets::new(0.0, 0.0).is_ok());
        assert!(matches!(
            RateTargets::new(3.0, 2.0),
            Err(Error::NegativeGamma { .. })
        ));
    }
}
