//! Run configuration: named parameter bundles, TOML load/save and overrides.

use std::path::{Path, PathBuf};

use olg_core::calibration::StructuralChoices;
use olg_core::experiments::{AxisRange, RolloverSpec, SteadySpec, TransferGridSpec, Variation};
use olg_core::ingest::Alignment;
use olg_core::RateTargets;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Environment variable that overrides `output_dir`.
pub const OUTPUT_DIR_ENV: &str = "OLG_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub safe: AxisRange,
    pub risky: AxisRange,
    pub transfer_fractions: Vec<f64>,
    pub realizations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RolloverConfig {
    pub initial_debt_fraction: f64,
    pub failure_threshold: f64,
    pub post_failure_level: f64,
    pub full_payoff: bool,
    pub paths: usize,
    pub generations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub variations: Vec<Variation>,
    pub grid: bool,
    pub rollover: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IngestConfig {
    /// Added to the maximum before rounding the upper range bound.
    pub margin_pp: f64,
    pub alignment: Alignment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub bundle: String,
    pub master_seed: u64,
    /// Worker threads. Results do not depend on it.
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub economy: StructuralChoices,
    pub targets: RateTargets,
    pub steady: SteadySpec,
    pub grid: GridConfig,
    pub rollover: RolloverConfig,
    pub scenarios: ScenarioConfig,
    pub ingest: IngestConfig,
}

fn default_workers() -> usize {
    1
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("output")
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::original()
    }
}

impl RunConfig {
    pub const BUNDLES: [&'static str; 2] = ["original", "indonesia"];

    /// Global calibration: safe -1%, risky 2%, grid safe -2..1, risky 0..4.
    pub fn original() -> Self {
        RunConfig {
            bundle: "original".into(),
            master_seed: 0,
            workers: 1,
            output_dir: PathBuf::from("output"),
            economy: StructuralChoices::default(),
            targets: RateTargets {
                safe_annual: -1.0,
                risky_annual: 2.0,
            },
            steady: SteadySpec::default(),
            grid: GridConfig {
                safe: AxisRange {
                    start: -2.0,
                    stop: 1.0,
                    step: 0.5,
                },
                risky: AxisRange {
                    start: 0.0,
                    stop: 4.0,
                    step: 0.5,
                },
                transfer_fractions: vec![0.05, 0.20],
                realizations: 2000,
            },
            rollover: RolloverConfig {
                initial_debt_fraction: 0.15,
                failure_threshold: 1.15,
                post_failure_level: 0.40,
                full_payoff: false,
                paths: 1000,
                generations: 6,
            },
            scenarios: ScenarioConfig {
                variations: Variation::standard_set().to_vec(),
                grid: true,
                rollover: true,
            },
            ingest: IngestConfig {
                margin_pp: 1.0,
                alignment: Alignment::AnnualMean,
            },
        }
    }

    /// Indonesia calibration: safe -0.5%, risky 3%, grid safe -3..2, risky 1..5.
    pub fn indonesia() -> Self {
        let mut c = RunConfig::original();
        c.bundle = "indonesia".into();
        c.targets = RateTargets {
            safe_annual: -0.5,
            risky_annual: 3.0,
        };
        c.grid.safe = AxisRange {
            start: -3.0,
            stop: 2.0,
            step: 0.5,
        };
        c.grid.risky = AxisRange {
            start: 1.0,
            stop: 5.0,
            step: 0.5,
        };
        c
    }

    pub fn bundle(name: &str) -> Result<Self, CliError> {
        match name {
            "original" => Ok(RunConfig::original()),
            "indonesia" => Ok(RunConfig::indonesia()),
            other => Err(CliError::Usage(format!(
                "unknown bundle '{other}', expected one of {:?}",
                RunConfig::BUNDLES
            ))),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("invalid config: {e}")))
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Usage(format!("config cannot be serialized: {e}")))
    }

    /// The config as embedded in output tables. `workers` and `output_dir`
    /// are left out so that the echo, like the results, does not depend on
    /// them; loading it restores their defaults.
    pub fn echo(&self) -> Result<String, CliError> {
        let mut value = toml::Value::try_from(self)
            .map_err(|e| CliError::Usage(format!("config cannot be serialized: {e}")))?;
        if let toml::Value::Table(t) = &mut value {
            t.remove("workers");
            t.remove("output_dir");
        }
        toml::to_string(&value).map_err(|e| CliError::Usage(format!("config cannot be serialized: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.to_toml()?).map_err(|e| CliError::io(path, e))
    }

    /// Output directory after applying [`OUTPUT_DIR_ENV`].
    pub fn resolved_output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.output_dir.clone(),
        }
    }

    pub fn transfer_grid_spec(&self) -> TransferGridSpec {
        TransferGridSpec {
            safe: self.grid.safe,
            risky: self.grid.risky,
            transfer_fractions: self.grid.transfer_fractions.clone(),
            realizations: self.grid.realizations,
            steady: self.steady,
            master_seed: self.master_seed,
            workers: self.workers,
        }
    }

    pub fn rollover_spec(&self) -> RolloverSpec {
        RolloverSpec {
            targets: self.targets,
            initial_debt_fraction: self.rollover.initial_debt_fraction,
            failure_threshold: self.rollover.failure_threshold,
            post_failure_level: self.rollover.post_failure_level,
            full_payoff: self.rollover.full_payoff,
            paths: self.rollover.paths,
            generations: self.rollover.generations,
            steady: self.steady,
            master_seed: self.master_seed,
            workers: self.workers,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use olg_core::Technology;

    #[test]
    fn bundles_differ_in_targets_and_ranges() {
        let o = RunConfig::bundle("original").unwrap();
        let i = RunConfig::bundle("indonesia").unwrap();
        assert_eq!((o.targets.safe_annual, o.targets.risky_annual), (-1.0, 2.0));
        assert_eq!((i.targets.safe_annual, i.targets.risky_annual), (-0.5, 3.0));
        assert_eq!(i.grid.safe.start, -3.0);
        assert!(RunConfig::bundle("mars").is_err());
    }

    #[test]
    fn toml_round_trip_is_exact() {
        let mut c = RunConfig::indonesia();
        c.economy.b = 1.0 / 3.0;
        c.economy.technology = Technology::Ces { eta: 0.7 };
        c.economy.sigma = 0.1 + 0.2;
        let text = c.to_toml().unwrap();
        let back = RunConfig::from_toml(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.economy.b.to_bits(), c.economy.b.to_bits());
        assert_eq!(back.to_toml().unwrap(), text);
    }

    #[test]
    fn echo_omits_execution_settings() {
        let mut c = RunConfig::original();
        c.workers = 8;
        c.output_dir = PathBuf::from("/tmp/elsewhere");
        let echo = c.echo().unwrap();
        assert!(!echo.contains("workers") && !echo.contains("elsewhere"));
        let back = RunConfig::from_toml(&echo).unwrap();
        assert_eq!(back, RunConfig::original());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let mut text = RunConfig::original().to_toml().unwrap();
        text.insert_str(0, "bogus = 1\n");
        assert!(RunConfig::from_toml(&text).is_err());
    }
}
