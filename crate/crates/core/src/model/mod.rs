//! Domain types, production technology, rate conversion and shock generation.

mod params;
mod rates;
mod shocks;
mod state;
mod technology;

pub use params::{beta_from_annual_discount, EconomyParams, RateTargets, Technology, DEFAULT_ANNUAL_DISCOUNT};
pub use rates::{annual_to_generational, generational_to_annual};
pub use shocks::ShockStream;
pub use state::PeriodState;
pub use technology::{production, risky_return, unit_prices, wage, UnitPrices};
