//! Batches of independent scenario runs.

use super::config::{ConfigError, SimConfig};
use super::metrics::{summarize, RunSummary};
use super::record::SimRecord;
use super::run::run_scenario;
use crate::exec::{self, Execution};
use crate::plant::ReferenceKind;

/// Every scenario, noise-free and noisy, derived from `base`.
pub fn suite_configs(base: &SimConfig) -> Vec<SimConfig> {
    ReferenceKind::ALL
        .into_iter()
        .flat_map(|scenario| {
            [false, true].map(|noise_on| SimConfig { scenario, noise_on, ..base.clone() })
        })
        .collect()
}

/// Runs all configurations, each owning its own state and random stream.
pub fn run_suite(
    configs: Vec<SimConfig>,
    mode: Execution,
) -> Vec<Result<(SimConfig, SimRecord), ConfigError>> {
    exec::map(mode, configs, |cfg| run_scenario(&cfg).map(|rec| (cfg, rec)))
}

pub fn summary_of(cfg: &SimConfig, rec: &SimRecord) -> RunSummary {
    summarize(rec, cfg.scenario.name(), cfg.noise_label(), cfg.noise.seed)
}
