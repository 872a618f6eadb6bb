use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qkdsim::channel::{transmittance, yield_error, Protocol};
use qkdsim::config::Config;
use qkdsim::decoy::{
    randomized_soundness, soundness_oracle, DecoyProtocolParams, PrefactorVariant,
    SoundnessSummary,
};
use qkdsim::experiment::{
    csv_string, emit_csv, find_crossover, find_threshold, gain_report, run_sweep, SweepSpec,
};
use qkdsim::rate::{ideal_scenario_inputs, optimize_mu, protocol_rate};
use qkdsim::sources::{HspsStats, SourceFamily};
use qkdsim::{Error, Result};

/// Secure key rates for decoy-state QKD over lossy fiber, comparing weak
/// coherent, heralded single-photon, and heralded pair-coherent sources
/// under BB84 and SARG04.
#[derive(Parser)]
#[command(name = "qkdsim", version, about, arg_required_else_help = true)]
struct Cli {
    /// Plain-text config file: one `key = value` per line, `#` comments.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Extra `key=value` override applied after the config file; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    #[command(flatten)]
    overrides: Overrides,

    #[command(subcommand)]
    command: Command,
}

/// Dedicated override flags; they win over both the config file and --set.
#[derive(Args)]
struct Overrides {
    /// Fiber loss in dB/km.
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Receiver transmittance.
    #[arg(long, global = true)]
    eta_bob: Option<f64>,
    /// Receiver dark count probability per gate.
    #[arg(long, global = true)]
    p_dark: Option<f64>,
    /// Misalignment error probability.
    #[arg(long, global = true)]
    e_det: Option<f64>,
    /// Trigger detector efficiency of the heralding arm.
    #[arg(long, global = true)]
    eta_a: Option<f64>,
    /// Trigger dark count probability.
    #[arg(long, global = true)]
    d_a: Option<f64>,
    /// Un-heralded HSPS photon statistics: thermal or poissonian.
    #[arg(long, global = true)]
    hsps_stats: Option<HspsStats>,
    /// Two-photon bound prefactors: derived (sound) or literature.
    #[arg(long, global = true)]
    variant: Option<PrefactorVariant>,
}

#[derive(Subcommand)]
enum Command {
    /// Key rate of one (protocol, source, distance) point.
    Rate {
        #[arg(long)]
        protocol: Protocol,
        #[arg(long)]
        source: SourceFamily,
        /// Distance in km.
        #[arg(long)]
        distance: f64,
        /// Fixed signal intensity; optimized per point when omitted.
        #[arg(long)]
        mu: Option<f64>,
    },
    /// Rate-vs-distance sweep as CSV, to stdout or --out.
    Sweep {
        /// Comma-separated protocol list.
        #[arg(long, value_delimiter = ',', default_value = "bb84")]
        protocols: Vec<Protocol>,
        /// Comma-separated source list.
        #[arg(long, value_delimiter = ',', default_value = "wcp,hsps,hpcs")]
        sources: Vec<SourceFamily>,
        #[arg(long)]
        l_min: Option<f64>,
        #[arg(long)]
        l_max: Option<f64>,
        /// Distance step in km.
        #[arg(long)]
        step: Option<f64>,
        /// CSV output path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Distance where the optimized rate dies out.
    Threshold {
        #[arg(long)]
        protocol: Protocol,
        #[arg(long)]
        source: SourceFamily,
    },
    /// Distance where two sources' optimized rates cross.
    Crossover {
        #[arg(long)]
        protocol: Protocol,
        #[arg(long)]
        source_a: SourceFamily,
        #[arg(long)]
        source_b: SourceFamily,
    },
    /// Decoy-state bound soundness report.
    Bounds {
        /// Check against channel-model yields at this distance (km).
        #[arg(long, default_value_t = 50.0)]
        distance: f64,
        #[arg(long, default_value_t = Protocol::Bb84)]
        protocol: Protocol,
        /// Signal intensity; defaults to the config value.
        #[arg(long)]
        mu: Option<f64>,
        /// First decoy intensity; defaults to the config value.
        #[arg(long)]
        nu1: Option<f64>,
        /// Second decoy intensity; defaults to the config value.
        #[arg(long)]
        nu2: Option<f64>,
        /// Run a randomized soundness campaign of this many yield tables
        /// instead of the single channel-model check.
        #[arg(long)]
        draws: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Average rate gain of one source over the best of the baselines.
    Gain {
        #[arg(long, default_value_t = Protocol::Bb84)]
        protocol: Protocol,
        #[arg(long, default_value_t = SourceFamily::Hpcs)]
        numerator: SourceFamily,
        /// Comma-separated baseline sources.
        #[arg(long, value_delimiter = ',', default_value = "wcp,hsps")]
        baselines: Vec<SourceFamily>,
    },
}

fn load_config(cli: &Cli) -> Result<Config> {
    let mut cfg = match &cli.config {
        Some(path) => Config::from_file(path)?,
        None => Config::default(),
    };
    for pair in &cli.set {
        let (key, value) = pair.split_once('=').ok_or_else(|| {
            Error::Config(format!("--set expects KEY=VALUE, got '{pair}'"))
        })?;
        cfg.set(key.trim(), value.trim())?;
    }
    let o = &cli.overrides;
    if let Some(v) = o.alpha {
        cfg.alpha = v;
    }
    if let Some(v) = o.eta_bob {
        cfg.eta_bob = v;
    }
    if let Some(v) = o.p_dark {
        cfg.p_dark = v;
    }
    if let Some(v) = o.e_det {
        cfg.e_det = v;
    }
    if let Some(v) = o.eta_a {
        cfg.eta_a = v;
    }
    if let Some(v) = o.d_a {
        cfg.d_a = v;
    }
    if let Some(v) = o.hsps_stats {
        cfg.hsps_stats = v;
    }
    if let Some(v) = o.variant {
        cfg.variant = v;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Rate { protocol, source, distance, mu } => {
            let scenario = cfg.scenario()?;
            let template = scenario.source_template(*source)?;
            let (mu_used, rate, flagged) = match mu {
                Some(mu) => {
                    let src = template.with_mu(*mu)?;
                    let inputs =
                        ideal_scenario_inputs(&src, *protocol, &scenario.channel, *distance)?;
                    (*mu, protocol_rate(&inputs, *protocol, &scenario.maps)?, false)
                }
                None => {
                    let opt = optimize_mu(
                        &template,
                        *protocol,
                        &scenario.channel,
                        *distance,
                        &scenario.search,
                        &scenario.maps,
                    )?;
                    (opt.mu_opt, opt.rate, opt.beyond_threshold)
                }
            };
            let inputs = ideal_scenario_inputs(
                &template.with_mu(mu_used)?,
                *protocol,
                &scenario.channel,
                *distance,
            )?;
            println!(
                "protocol={} source={} distance_km={} mu={:.6} q_mu={:.12e} e_mu={:.12e} rate={:.12e}{}",
                protocol.label(),
                source.label(),
                distance,
                mu_used,
                inputs.q_mu.q,
                inputs.q_mu.e(),
                rate,
                if flagged { " beyond_threshold=true" } else { "" }
            );
        }
        Command::Sweep { protocols, sources, l_min, l_max, step, out } => {
            let spec = SweepSpec {
                l_min: l_min.unwrap_or(cfg.l_min),
                l_max: l_max.unwrap_or(cfg.l_max),
                step: step.unwrap_or(cfg.step),
                protocols: protocols.clone(),
                sources: sources.clone(),
                scenario: cfg.scenario()?,
                decoy: Some(cfg.decoy()?),
            };
            let points = run_sweep(&spec)?;
            match out {
                Some(path) => {
                    emit_csv(&points, path)?;
                    println!("wrote {} rows to {}", points.len(), path.display());
                }
                None => print!("{}", csv_string(&points)),
            }
        }
        Command::Threshold { protocol, source } => {
            let scenario = cfg.scenario()?;
            let l = find_threshold(&scenario, *protocol, *source)?;
            println!(
                "protocol={} source={} threshold_km={:.1}",
                protocol.label(),
                source.label(),
                l
            );
        }
        Command::Crossover { protocol, source_a, source_b } => {
            let scenario = cfg.scenario()?;
            match find_crossover(&scenario, *protocol, *source_a, *source_b)? {
                Some(l) => println!(
                    "protocol={} source_a={} source_b={} crossover_km={:.1}",
                    protocol.label(),
                    source_a.label(),
                    source_b.label(),
                    l
                ),
                None => println!(
                    "protocol={} source_a={} source_b={} crossover=none",
                    protocol.label(),
                    source_a.label(),
                    source_b.label()
                ),
            }
        }
        Command::Bounds { distance, protocol, mu, nu1, nu2, draws, seed } => {
            let dp = DecoyProtocolParams::new(
                mu.unwrap_or(cfg.mu),
                nu1.unwrap_or(cfg.nu1),
                nu2.unwrap_or(cfg.nu2),
            )?;
            match draws {
                Some(draws) => {
                    let s = randomized_soundness(*draws, *seed, cfg.variant)?;
                    println!(
                        "variant={} draws={} violations={} worst_slack={:.3e}",
                        s.variant.label(),
                        s.draws,
                        s.total_violations(),
                        s.worst_slack
                    );
                    for (i, name) in SoundnessSummary::BOUND_NAMES.iter().enumerate() {
                        println!(
                            "{name}: checked={} cannot_bound={} violations={}",
                            s.checked[i], s.cannot_bound[i], s.violations[i]
                        );
                    }
                }
                None => {
                    let channel = cfg.channel()?;
                    let trigger = cfg.trigger()?;
                    let eta = transmittance(&channel, *distance)?;
                    let yields: Vec<(f64, f64)> = (0..=40)
                        .map(|n| yield_error(&channel, *protocol, eta, n))
                        .collect::<Result<_>>()?;
                    let report =
                        soundness_oracle(&yields, SourceFamily::Hpcs, &dp, &trigger, cfg.variant)?;
                    println!(
                        "variant={} distance_km={} mu={} nu1={} nu2={} all_sound={}",
                        report.variant.label(),
                        distance,
                        dp.mu,
                        dp.nu1,
                        dp.nu2,
                        report.all_sound()
                    );
                    for e in &report.entries {
                        match e.bound {
                            Some(b) => println!(
                                "{}: bound={:.6e} true={:.6e} sound={} slack={:.3e}",
                                e.name, b, e.truth, e.sound, e.slack
                            ),
                            None => println!(
                                "{}: cannot-bound true={:.6e}",
                                e.name, e.truth
                            ),
                        }
                    }
                }
            }
        }
        Command::Gain { protocol, numerator, baselines } => {
            let scenario = cfg.scenario()?;
            let report = gain_report(&scenario, *protocol, *numerator, baselines)?;
            let names: Vec<&str> = baselines.iter().map(|s| s.label()).collect();
            println!(
                "protocol={} numerator={} baselines={} average_gain={:.4} range_km=[{:.0},{:.0}] samples={}",
                protocol.label(),
                numerator.label(),
                names.join(","),
                report.average_gain,
                report.l_min,
                report.l_max,
                report.samples
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}
