//! Simulation harness: integration, scenario runs, records, plots and metrics.

pub mod config;
pub mod integrator;
pub mod metrics;
pub mod plot;
pub mod record;
pub mod run;
pub mod suite;

pub use config::{ConfigError, ConfigFile, ObserverOffsets, SimConfig};
pub use integrator::{heun_step, integrate, Integrable, IntegrationError};
pub use plot::{emit_plots, render_svg, PlotOptions};
pub use record::{emit_csv, parse_csv, SimRecord, SimRow};
pub use run::run_scenario;
pub use suite::{run_suite, suite_configs};
