use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ffts_eso::exec::Execution;
use ffts_eso::fftsd::{self, GridSpec};
use ffts_eso::nalgebra::Vector3;
use ffts_eso::observer::{validate_gains_a, validate_gains_t, EsoErrors};
use ffts_eso::plant::ReferenceKind;
use ffts_eso::sim::metrics::RunSummary;
use ffts_eso::sim::run::initial_observers;
use ffts_eso::sim::suite::summary_of;
use ffts_eso::sim::{self, ConfigFile, PlotOptions, SimConfig, SimRecord};
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "ffts-eso", version, about = "Finite-time extended state observer simulations on SE(3)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario.
    Run(RunArgs),
    /// Run every scenario with and without measurement noise.
    Suite(SuiteArgs),
    /// Gain certificates.
    Gains {
        #[command(subcommand)]
        action: GainsAction,
    },
    /// Print the default configuration file.
    Config,
    /// Numerical oracles.
    Oracle {
        #[command(subcommand)]
        action: OracleAction,
    },
}

#[derive(Subcommand)]
enum GainsAction {
    /// Print Lyapunov certificates, convergence constants and settling bounds.
    Check {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum OracleAction {
    /// Grid search for the maximiser of the noise-gap function.
    #[command(name = "noise-gap", alias = "lemma5")]
    NoiseGap {
        /// Noise vector as comma-separated components.
        #[arg(long, default_value = "1,0,0", value_delimiter = ',')]
        mu: Vec<f64>,
        #[arg(long, default_value_t = 0.3)]
        alpha: f64,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OnOff {
    On,
    Off,
}

impl OnOff {
    fn is_on(self) -> bool {
        self == OnOff::On
    }
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long, value_enum)]
    baselines: Option<OnOff>,
    /// Feed the disturbance estimates forward into the controller.
    #[arg(long, value_enum)]
    reject: Option<OnOff>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Draw error norms on a linear axis instead of log10.
    #[arg(long)]
    linear: bool,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    scenario: Option<ReferenceKind>,
    #[arg(long, value_enum)]
    noise: Option<OnOff>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SuiteArgs {
    /// Run sequentially instead of across worker threads.
    #[arg(long)]
    sequential: bool,
    #[command(flatten)]
    common: Common,
}

fn load_file(path: Option<&Path>) -> Result<ConfigFile> {
    match path {
        Some(p) => Ok(ConfigFile::load(p)?),
        None => Ok(ConfigFile::default()),
    }
}

fn apply_common(file: &mut ConfigFile, c: &Common) {
    if let Some(s) = c.seed {
        file.seed = s;
    }
    if let Some(h) = c.h {
        file.h = h;
    }
    if let Some(d) = c.duration {
        file.duration = d;
    }
    if let Some(b) = c.baselines {
        file.baselines = b.is_on();
    }
    if let Some(r) = c.reject {
        file.reject = r.is_on();
    }
}

fn write_outputs(out: &Path, cfg: &SimConfig, rec: &SimRecord, opts: &PlotOptions) -> Result<RunSummary> {
    let name = cfg.run_name();
    let csv = out.join(format!("{name}.csv"));
    sim::emit_csv(rec, &csv)?;
    let svg = out.join(format!("{name}.svg"));
    sim::emit_plots(rec, &svg, opts).with_context(|| format!("writing {}", svg.display()))?;
    Ok(summary_of(cfg, rec))
}

fn write_summary(out: &Path, runs: &[RunSummary]) -> Result<()> {
    let path = out.join("summary.json");
    let text = serde_json::to_string_pretty(runs)?;
    std::fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn print_summary(s: &RunSummary) {
    println!(
        "{:<11} {:<5} max|e_phi| {:.3e} N  max|e_tau| {:.3e} N*m  after 5 s: {:.3e} / {:.3e}{}",
        s.scenario,
        s.noise,
        s.max_e_phi,
        s.max_e_tau,
        s.settled_max_e_phi,
        s.settled_max_e_tau,
        if s.diverged { "  DIVERGED" } else { "" }
    );
}

fn plot_opts(c: &Common) -> PlotOptions {
    PlotOptions { log_scale: !c.linear, ..PlotOptions::default() }
}

fn run(args: RunArgs) -> Result<()> {
    let mut file = load_file(args.common.config.as_deref())?;
    apply_common(&mut file, &args.common);
    if let Some(s) = args.scenario {
        file.scenario = s;
    }
    if let Some(n) = args.noise {
        file.noise = n.is_on();
    }
    let cfg = file.build()?;
    std::fs::create_dir_all(&args.common.out)
        .with_context(|| format!("creating {}", args.common.out.display()))?;
    let rec = sim::run_scenario(&cfg)?;
    let summary = write_outputs(&args.common.out, &cfg, &rec, &plot_opts(&args.common))?;
    print_summary(&summary);
    write_summary(&args.common.out, &[summary])
}

fn suite(args: SuiteArgs) -> Result<()> {
    let mut file = load_file(args.common.config.as_deref())?;
    apply_common(&mut file, &args.common);
    let base = file.build()?;
    std::fs::create_dir_all(&args.common.out)
        .with_context(|| format!("creating {}", args.common.out.display()))?;
    let mode = if args.sequential { Execution::Sequential } else { Execution::Parallel };
    let opts = plot_opts(&args.common);
    let mut summaries = Vec::new();
    for result in sim::run_suite(sim::suite_configs(&base), mode) {
        let (cfg, rec) = result?;
        let s = write_outputs(&args.common.out, &cfg, &rec, &opts)?;
        print_summary(&s);
        summaries.push(s);
    }
    write_summary(&args.common.out, &summaries)
}

#[derive(Serialize)]
struct GainsOutput {
    translational: ffts_eso::observer::GainReport,
    rotational: ffts_eso::observer::GainReport,
    translational_p: [[f64; 2]; 2],
    rotational_p: [[f64; 2]; 2],
    translational_settling_bound: f64,
    rotational_settling_bound: f64,
}

fn gains_check(config: Option<&Path>) -> Result<()> {
    let cfg = load_file(config)?.build()?;
    let rt = validate_gains_t(&cfg.translational)?;
    let ra = validate_gains_a(&cfg.rotational)?;
    let (t0, a0) = initial_observers(&cfg);
    let s = &cfg.initial;
    let (phi_d, tau_d) = ffts_eso::plant::eval_disturbance(&cfg.disturbance, 0.0);
    let e = EsoErrors::compute(&s.pose.position, &s.v, &phi_d, &s.pose.rotation, &s.omega, &tau_d, &t0, &a0);
    let vt = ffts_eso::observer::lyapunov_monitor_t(&e, &cfg.translational, cfg.params.mass());
    let va = ffts_eso::observer::lyapunov_monitor_a(&e, &cfg.rotational, cfg.params.inertia_inv());
    let alpha = cfg.translational.p.alpha();
    let settle = |g1: f64, g2: f64, v: f64| fftsd::settling_time_ffts(g1, g2, alpha, v);
    let to_arr = |m: &ffts_eso::nalgebra::Matrix2<f64>| [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]];
    let out = GainsOutput {
        translational_p: to_arr(&cfg.translational.certificate.p),
        rotational_p: to_arr(&cfg.rotational.certificate.p),
        translational_settling_bound: settle(rt.big_gamma1, rt.big_gamma2, vt)?,
        rotational_settling_bound: settle(ra.big_gamma1, ra.big_gamma2, va)?,
        translational: rt,
        rotational: ra,
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn noise_gap(mu: &[f64], alpha: f64, step: f64) -> Result<()> {
    let [x, y, z] = mu else {
        bail!("--mu needs exactly three components, got {}", mu.len());
    };
    let mu = Vector3::new(*x, *y, *z);
    let arg = fftsd::noise_gap_argmax_oracle(&mu, alpha, &GridSpec::with_step(step))?;
    let expected = -mu * 0.5;
    let value = fftsd::noise_gap_function(&arg, &mu, alpha)?;
    println!("argmax   [{:.6}, {:.6}, {:.6}]", arg.x, arg.y, arg.z);
    println!("-mu/2    [{:.6}, {:.6}, {:.6}]", expected.x, expected.y, expected.z);
    println!("distance {:.3e} (grid step x |mu| = {:.3e})", (arg - expected).norm(), step * mu.norm());
    println!("gap^2    {value:.6e}");
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(a) => run(a),
        Command::Suite(a) => suite(a),
        Command::Gains { action: GainsAction::Check { config } } => gains_check(config.as_deref()),
        Command::Config => {
            print!("{}", ConfigFile::default().to_toml());
            Ok(())
        }
        Command::Oracle { action: OracleAction::NoiseGap { mu, alpha, step } } => noise_gap(&mu, alpha, step),
    }
}
