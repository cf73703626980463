//! Closed-form marginal welfare calculus of a small intergenerational
//! transfer, evaluated at average rates. Used as an oracle for the
//! simulations.
//!
//! Rates are gross generational and growth-adjusted, with growth normalized
//! to zero. `capital_share` is the local capital income share `R K / Y`,
//! equal to `b` under Cobb-Douglas.

use crate::model::{unit_prices, Technology};
use crate::{Error, Result};

/// Marginal effects of a transfer, both in units of `beta E[U'(C2)] dD`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferEffect {
    /// Partial-equilibrium effect, `1 - ER^f`.
    pub direct_effect: f64,
    /// Effect through factor prices.
    pub price_effect: f64,
    pub total_sign: i8,
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

fn check_rate(name: &'static str, rate: f64) -> Result<()> {
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(Error::param(name, "gross rate must be positive and finite"));
    }
    Ok(())
}

/// Positive iff the safe rate is below the growth rate.
pub fn direct_effect_sign(safe_rate_gross: f64) -> Result<i8> {
    check_rate("safe_rate", safe_rate_gross)?;
    Ok(sign(1.0 - safe_rate_gross))
}

/// `(1 / eta) alpha (R - 1) R dK`, the price channel in units of
/// `beta U'(C2)`. Zero under linear production.
pub fn price_effect(risky_rate_gross: f64, eta: f64, capital_share: f64, dk: f64) -> Result<f64> {
    check_rate("risky_rate", risky_rate_gross)?;
    if !(eta > 0.0) {
        return Err(Error::param("eta", "must be positive"));
    }
    if eta.is_infinite() {
        return Ok(0.0);
    }
    Ok(capital_share / eta * (risky_rate_gross - 1.0) * risky_rate_gross * dk)
}

/// `dK/dD ~ -1 / (1 - beta alpha (1 / eta) ER)`.
pub fn dk_dd_approx(beta: f64, capital_share: f64, eta: f64, risky_rate_gross: f64) -> Result<f64> {
    if !(eta > 0.0) {
        return Err(Error::param("eta", "must be positive"));
    }
    let denominator = 1.0 - beta * capital_share / eta * risky_rate_gross;
    if denominator.abs() < 1e-12 {
        return Err(Error::Singular(denominator));
    }
    Ok(-1.0 / denominator)
}

/// Average risky rate implied by `beta` in the deterministic Cobb-Douglas
/// economy without endowment, `(1 - alpha) / (alpha beta)`.
pub fn cobb_douglas_risky_approx(capital_share: f64, beta: f64) -> f64 {
    (1.0 - capital_share) / (capital_share * beta)
}

/// Capital income share `R K / Y` at a capital stock.
pub fn capital_share(technology: Technology, b: f64, capital: f64) -> f64 {
    match technology {
        Technology::CobbDouglas => b,
        Technology::Linear | Technology::Ces { .. } => {
            let p = unit_prices(technology, b, capital);
            p.risky * capital / p.output
        }
    }
}

/// Both channels at average rates, with `dK/dD` from the accumulation
/// approximation.
pub fn transfer_effect(
    safe_rate_gross: f64,
    risky_rate_gross: f64,
    beta: f64,
    capital_share: f64,
    eta: f64,
) -> Result<TransferEffect> {
    check_rate("safe_rate", safe_rate_gross)?;
    let direct_effect = 1.0 - safe_rate_gross;
    let price_effect = if eta.is_infinite() {
        0.0
    } else {
        let dk = dk_dd_approx(beta, capital_share, eta, risky_rate_gross)?;
        -capital_share / eta * safe_rate_gross * (-dk) * (risky_rate_gross - 1.0)
    };
    Ok(TransferEffect {
        direct_effect,
        price_effect,
        total_sign: sign(direct_effect + price_effect),
    })
}

/// Sign of the welfare effect of a small transfer at average rates: the
/// safe rate alone under linear production, `1 - ER^f ER` under
/// Cobb-Douglas, and the two-channel expression otherwise.
pub fn total_sign(
    safe_rate_gross: f64,
    risky_rate_gross: f64,
    beta: f64,
    capital_share: f64,
    eta: f64,
) -> Result<i8> {
    check_rate("safe_rate", safe_rate_gross)?;
    check_rate("risky_rate", risky_rate_gross)?;
    if eta.is_infinite() {
        return Ok(sign(1.0 - safe_rate_gross));
    }
    if eta == 1.0 {
        return Ok(sign(1.0 - safe_rate_gross * risky_rate_gross));
    }
    Ok(transfer_effect(safe_rate_gross, risky_rate_gross, beta, capital_share, eta)?.total_sign)
}

/// Distance in percentage points per year from an annual (safe, risky) pair
/// to the zero-welfare contour of [`total_sign`]: the `safe = 0` line under
/// linear production and the `(1 + s)(1 + r) = 1` curve under Cobb-Douglas.
/// `None` for general CES, whose contour depends on `beta`.
pub fn distance_to_zero_contour(technology: Technology, safe_annual: f64, risky_annual: f64) -> Option<f64> {
    match technology {
        Technology::Linear => Some(safe_annual.abs()),
        Technology::CobbDouglas => {
            let curve = |s: f64| 100.0 * (1.0 / (1.0 + s / 100.0) - 1.0);
            // The vertical gap bounds the distance, so the nearest point lies
            // within that window of the safe coordinate.
            let window = (risky_annual - curve(safe_annual)).abs();
            if window == 0.0 {
                return Some(0.0);
            }
            const SAMPLES: usize = 20_000;
            let lo = (safe_annual - window).max(-99.0);
            let hi = safe_annual + window;
            let best = (0..=SAMPLES)
                .map(|i| {
                    let s = lo + (hi - lo) * i as f64 / SAMPLES as f64;
                    libm::hypot(s - safe_annual, curve(s) - risky_annual)
                })
                .fold(window, f64::min);
            Some(best)
        }
        Technology::Ces { .. } => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(annual: f64) -> f64 {
        libm::pow(1.0 + annual / 100.0, 25.0)
    }

    #[test]
    fn direct_sign_examples() {
        assert_eq!(direct_effect_sign(1.0).unwrap(), 0);
        assert_eq!(direct_effect_sign(g(-1.0)).unwrap(), 1);
        assert_eq!(direct_effect_sign(g(2.0)).unwrap(), -1);
        assert!(direct_effect_sign(0.0).is_err());
    }

    #[test]
    fn price_effect_examples() {
        assert_eq!(price_effect(1.5, f64::INFINITY, 0.3, -0.1).unwrap(), 0.0);
        assert_eq!(price_effect(1.0, 1.0, 1.0 / 3.0, -0.1).unwrap(), 0.0);
        assert!(price_effect(1.6, 1.0, 1.0 / 3.0, -0.1).unwrap() < 0.0);
        assert!(price_effect(0.8, 1.0, 1.0 / 3.0, -0.1).unwrap() > 0.0);
    }

    #[test]
    fn dk_dd_examples() {
        assert_eq!(dk_dd_approx(0.3, 0.4, f64::INFINITY, 2.0).unwrap(), -1.0);
        let v = dk_dd_approx(0.5, 1.0 / 3.0, 1.0, 4.0).unwrap();
        assert!((v + 3.0).abs() < 1e-12);
        assert!(matches!(dk_dd_approx(0.5, 0.5, 1.0, 4.0), Err(Error::Singular(_))));
    }

    #[test]
    fn total_sign_examples() {
        assert_eq!(total_sign(0.5, 2.0, 0.3, 1.0 / 3.0, 1.0).unwrap(), 0);
        assert_eq!(total_sign(g(-1.0), g(1.0), 0.3, 1.0 / 3.0, 1.0).unwrap(), 1);
        for risky in [1.0, 2.0, 9.0] {
            assert_eq!(total_sign(0.9, risky, 0.3, 0.3, f64::INFINITY).unwrap(), 1);
        }
    }

    #[test]
    fn total_sign_flips_once_along_path() {
        // Monotone path in (safe, risky) crossing the Cobb-Douglas boundary.
        let mut flips = 0;
        let mut prev = None;
        for i in 0..=200 {
            let s = -4.0 + 0.04 * i as f64;
            let r = 0.5 + 0.02 * i as f64;
            let v = total_sign(g(s), g(r), 0.2, 1.0 / 3.0, 1.0).unwrap();
            if let Some(p) = prev {
                if p != v {
                    flips += 1;
                }
            }
            prev = Some(v);
        }
        assert_eq!(flips, 1);
    }

    #[test]
    fn warm_start_approximation() {
        assert!((cobb_douglas_risky_approx(1.0 / 3.0, 0.5) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn capital_share_is_b_for_cobb_douglas() {
        assert_eq!(capital_share(Technology::CobbDouglas, 0.4, 2.0), 0.4);
        let ces = capital_share(Technology::Ces { eta: 1.0 + 1e-7 }, 0.4, 2.0);
        assert!((ces - 0.4).abs() < 1e-6);
    }

    #[test]
    fn contour_distance() {
        assert_eq!(distance_to_zero_contour(Technology::Linear, -1.5, 3.0), Some(1.5));
        let on_curve = 100.0 * (1.0 / 0.98 - 1.0);
        let d = distance_to_zero_contour(Technology::CobbDouglas, -2.0, on_curve).unwrap();
        assert!(d < 1e-9);
        // The curve is close to the anti-diagonal near the origin.
        let d = distance_to_zero_contour(Technology::CobbDouglas, 0.0, 2.0).unwrap();
        assert!((d - 2.0 / libm::sqrt(2.0)).abs() < 0.02);
    }
}
