use super::{EconomyParams, Technology};
use crate::{Error, Result};

/// Output, wage and gross risky return per unit of productivity at a given
/// capital stock. Every factor price is proportional to the shock, so
/// `Y = A * output`, `W = A * wage` and `R = A * risky`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitPrices {
    pub output: f64,
    pub wage: f64,
    pub risky: f64,
}

/// Per-unit-productivity factor prices. `risky` is infinite at zero capital
/// outside the linear branch; callers that need it must check.
pub fn unit_prices(technology: Technology, b: f64, capital: f64) -> UnitPrices {
    match technology {
        Technology::Linear => UnitPrices {
            output: b * capital + (1.0 - b),
            wage: 1.0 - b,
            risky: b,
        },
        Technology::CobbDouglas => {
            let output = libm::pow(capital, b);
            UnitPrices {
                output,
                wage: (1.0 - b) * output,
                risky: b * output / capital,
            }
        }
        Technology::Ces { eta } => {
            let rho = (eta - 1.0) / eta;
            if capital == 0.0 {
                let output = if rho > 0.0 {
                    libm::pow(1.0 - b, 1.0 / rho)
                } else {
                    0.0
                };
                let wage = if rho > 0.0 { (1.0 - b) * libm::pow(output, 1.0 - rho) } else { 0.0 };
                return UnitPrices {
                    output,
                    wage,
                    risky: f64::INFINITY,
                };
            }
            // (b K^rho + 1 - b)^(1/rho) written to stay accurate as rho -> 0.
            let log_k = libm::log(capital);
            let inner = libm::log1p(b * libm::expm1(rho * log_k));
            let log_y = inner / rho;
            let output = libm::exp(log_y);
            UnitPrices {
                output,
                wage: (1.0 - b) * libm::exp((1.0 - rho) * log_y),
                risky: b * libm::exp((1.0 - rho) * (log_y - log_k)),
            }
        }
    }
}

fn check_inputs(capital: f64, shock: f64) -> Result<()> {
    if !(capital >= 0.0) || !capital.is_finite() {
        return Err(Error::Domain("capital must be finite and non-negative"));
    }
    if !(shock > 0.0) || !shock.is_finite() {
        return Err(Error::Domain("productivity shock must be positive"));
    }
    Ok(())
}

/// `Y = A (b K^rho + 1 - b)^(1/rho)`, or `A K^b` on the Cobb-Douglas branch.
pub fn production(capital: f64, shock: f64, params: &EconomyParams) -> Result<f64> {
    check_inputs(capital, shock)?;
    Ok(shock * unit_prices(params.technology, params.b, capital).output)
}

/// `W = A (1 - b) (Y / A)^(1 - rho)`.
pub fn wage(capital: f64, shock: f64, params: &EconomyParams) -> Result<f64> {
    check_inputs(capital, shock)?;
    Ok(shock * unit_prices(params.technology, params.b, capital).wage)
}

/// `R = A b (Y / (A K))^(1 - rho)`, the gross marginal product of capital.
pub fn risky_return(capital: f64, shock: f64, params: &EconomyParams) -> Result<f64> {
    check_inputs(capital, shock)?;
    if capital == 0.0 && !params.technology.is_linear() {
        return Err(Error::Domain("marginal product of capital is unbounded at zero capital"));
    }
    Ok(shock * unit_prices(params.technology, params.b, capital).risky)
}
