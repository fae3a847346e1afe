use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use leo_ican::config::{ExperimentConfig, Profile};
use leo_ican::{emit_reports, export, oracle, report, run_experiment, validate, HarnessError};
use leo_ican_core::selection::gdop_greedy_selection;

#[derive(Parser)]
#[command(
    name = "leo-ican",
    version,
    about = "Joint beamforming and satellite selection experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured scheme over the seeds and write reports.
    Run {
        /// TOML config; defaults apply when omitted.
        config: Option<PathBuf>,
        /// Seed list such as `0-19` or `1,4,9`; defaults to `0..seeds` from the config.
        #[arg(long)]
        seeds: Option<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, value_enum)]
        profile: Option<Profile>,
    },
    /// Run the invariant suites on random instances; exits nonzero on failure.
    Validate {
        /// Multiplier on the default instance counts.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print brute-force reference values.
    Oracle {
        #[arg(long, default_value_t = 5)]
        instances: usize,
    },
    /// Dump the scenario, channels and solver traces of one seed.
    Inspect {
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "inspect")]
        out: PathBuf,
        #[arg(long, value_enum)]
        profile: Option<Profile>,
    },
}

fn parse_seeds(text: &str) -> Result<Vec<u64>, HarnessError> {
    let bad = || HarnessError::Config(format!("bad seed list `{text}`"));
    let mut seeds = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (
                    a.trim().parse().map_err(|_| bad())?,
                    b.trim().parse().map_err(|_| bad())?,
                );
                if b < a {
                    return Err(bad());
                }
                seeds.extend(a..=b);
            }
            None => seeds.push(part.parse().map_err(|_| bad())?),
        }
    }
    Ok(seeds)
}

fn load(
    config: Option<PathBuf>,
    profile: Option<Profile>,
) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = match config {
        Some(path) => ExperimentConfig::load(&path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(p) = profile {
        cfg.apply_profile(p);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run_oracles(instances: usize) -> Result<(), HarnessError> {
    let radio = leo_ican_core::RadioParams::default();
    let loss = -leo_ican_core::math::linear_to_db(leo_ican_core::channel::path_loss(
        radio.wavelength_m(),
        600e3,
    )?);
    println!(
        "free-space loss at 600 km, {} GHz: {loss:.4} dB",
        radio.frequency_hz / 1e9
    );
    println!(
        "beam power {:.4} W, noise power {:.4e} W",
        radio.beam_power_w, radio.noise_power_w
    );
    let origin = leo_ican_core::Position3D::new(0.0, 0.0, 0.0);
    let axes = [
        leo_ican_core::Position3D::new(1.0, 0.0, 0.0),
        leo_ican_core::Position3D::new(0.0, 1.0, 0.0),
        leo_ican_core::Position3D::new(0.0, 0.0, 1.0),
    ];
    println!(
        "axis-aligned GDOP: {:.15}",
        oracle::gdop_adjugate(&origin, &axes).unwrap_or(f64::NAN)
    );

    let cfg = ExperimentConfig::default();
    println!();
    println!(
        "minimum-GDOP subsets, I = {} (greedy vs enumeration)",
        cfg.selection.serving
    );
    for seed in 0..instances as u64 {
        let (scenario, _) = leo_ican::experiment::realize(&cfg, seed)?;
        let sats = scenario.satellite_positions();
        let all: Vec<usize> = (0..sats.len()).collect();
        for c in 0..scenario.ue_count().min(2) {
            let (fast, g) = gdop_greedy_selection(&scenario, c, cfg.selection.serving)?;
            let slow =
                oracle::exhaustive_min_gdop(&scenario.ues[c], &sats, &all, cfg.selection.serving);
            let (s, gs) = slow.unwrap_or_default();
            println!("  seed {seed} ue {c}: greedy {fast:?} {g:.6}  enumeration {s:?} {gs:.6}");
        }
    }

    println!();
    println!("coalition search on tiny instances (S = 5, C = 2, I = 3, 2x2), DC beams");
    let study = validate::cfg_checks(instances, 0)?;
    for (seed, cfg_u, init_u, best) in &study.rows {
        println!(
            "  seed {seed}: initial {:.4} cfg {:.4} exhaustive {:.4} Gbps, gap {:.2}%",
            init_u / 1e9,
            cfg_u / 1e9,
            best / 1e9,
            100.0 * (best - cfg_u) / best
        );
    }

    println!();
    println!("single-user closed form vs DC");
    let check = validate::single_user_check(instances, 0)?;
    println!("  {check}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            seeds,
            out,
            profile,
        } => (|| {
            let cfg = load(config, profile)?;
            let seeds = match seeds {
                Some(text) => parse_seeds(&text)?,
                None => cfg.seed_list(),
            };
            let report = run_experiment(&cfg, &seeds)?;
            let written = emit_reports(&report, &out)?;
            print!("{}", report::text_summary(&report));
            for path in written {
                println!("wrote {}", path.display());
            }
            Ok(true)
        })(),
        Command::Validate { scale, seed } => validate::full_suite(scale, seed).map(|checks| {
            for c in &checks {
                println!("{c}");
            }
            checks.iter().all(|c| c.passed)
        }),
        Command::Oracle { instances } => run_oracles(instances).map(|_| true),
        Command::Inspect {
            config,
            seed,
            out,
            profile,
        } => (|| {
            let cfg = load(config, profile)?;
            for path in export::inspect(&cfg, seed, &out)? {
                println!("wrote {}", path.display());
            }
            Ok(true)
        })(),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
