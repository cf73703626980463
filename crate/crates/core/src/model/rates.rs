use crate::{Error, Result};

/// Gross return over one generation period implied by a net annual rate
/// given in percent.
pub fn annual_to_generational(rate_annual_percent: f64, period_years: f64) -> Result<f64> {
    if !(rate_annual_percent > -100.0) {
        return Err(Error::Domain("annual rate must exceed -100%"));
    }
    Ok(libm::pow(1.0 + rate_annual_percent / 100.0, period_years))
}

/// Inverse of [`annual_to_generational`].
pub fn generational_to_annual(gross: f64, period_years: f64) -> Result<f64> {
    if !(gross > 0.0) {
        return Err(Error::Domain("gross generational return must be positive"));
    }
    Ok(100.0 * libm::expm1(libm::log(gross) / period_years))
}
