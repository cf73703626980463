/// Realized quantities of one generation-period.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PeriodState {
    /// Productivity `A_t`.
    pub shock: f64,
    /// `K_{t-1}` carried into the period.
    pub capital: f64,
    pub output: f64,
    pub wage: f64,
    /// Gross return `R_t` on `K_{t-1}`.
    pub risky_return: f64,
    /// Gross safe rate `R^f_{t+1}` priced this period.
    pub safe_return: f64,
    /// `K_t` chosen by the young.
    pub capital_chosen: f64,
    pub young_consumption: f64,
    pub old_consumption: f64,
    /// Debt outstanding at the end of the period, held by the young.
    pub debt: f64,
    /// Lump-sum tax paid by the young (debt repayment on failure).
    pub tax: f64,
    /// Ex-ante utility of the cohort born this period.
    pub young_utility: f64,
}

impl PeriodState {
    /// Total saving of the young: capital plus debt holdings.
    pub fn saving(&self) -> f64 {
        self.capital_chosen + self.debt
    }
}
