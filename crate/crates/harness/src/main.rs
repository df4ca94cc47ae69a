use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use exswarm_bridge::server::{DEFAULT_GRACE, DEFAULT_TICK_RATE};
use exswarm_bridge::{resolve_port, serve_blocking, ServeOptions, SessionLog, SessionSetup};
use exswarm_core::competence::sample_situations;
use exswarm_core::swarm::PostureCommand;
use exswarm_harness::experiment::situations_seed;
use exswarm_harness::output::{read_trace, write_run, write_sweep};
use exswarm_harness::{load_config, run_experiment, run_sweep, workers_of, HarnessError, Overrides};

#[derive(Parser)]
#[command(name = "exswarm", version, about = "Human-swarm simulation and competence evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's root seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the config value, then the core count.
    #[arg(long)]
    workers: Option<usize>,
    /// Episodes per arm (per cell for `sweep`).
    #[arg(long)]
    episodes: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Check a config and list every violation.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run every arm and report competence and the verdict.
    Run(Common),
    /// Brittleness sweep from the config's [sweep] section.
    Sweep(Common),
    /// Live session for an operator UI over WebSocket.
    Serve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Falls back to SWARM_BRIDGE_PORT, then the built-in default.
        #[arg(long)]
        port: Option<u16>,
        #[arg(long, default_value_t = DEFAULT_TICK_RATE)]
        tick_rate: f64,
        #[arg(long)]
        ui_dir: Option<PathBuf>,
        /// Writes the session log here on shutdown.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check an episode trace (.jsonl) or replay a session log (.json).
    Replay { trace: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let HarnessError::Config(vs) = &e {
                for v in vs {
                    eprintln!("{v}");
                }
            }
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn overrides(c: &Common) -> Overrides {
    Overrides {
        seed: c.seed,
        episodes: c.episodes,
        workers: c.workers,
    }
}

fn out_dir(c: &Common, name: &str) -> PathBuf {
    c.out.clone().unwrap_or_else(|| Path::new("runs").join(name))
}

fn dispatch(command: Command) -> Result<(), HarnessError> {
    match command {
        Command::Validate { config } => {
            let cfg = load_config(&config, &Overrides::default())?;
            println!("ok: {} ({} arms, {} episodes each)", cfg.name, cfg.arms.len(), cfg.episodes);
        }
        Command::Run(c) => {
            let cfg = load_config(&c.config, &overrides(&c))?;
            let out = run_experiment(&cfg, workers_of(&cfg))?;
            let dir = out_dir(&c, &cfg.name);
            write_run(&dir, &out)?;
            for a in &out.report.arms {
                let r = &a.report;
                println!(
                    "{}: n={} p={:.4} r={:.4} c={:.4} [{:.4}, {:.4}] aborted={}",
                    a.name, r.n, r.p_hat, r.r, r.c_hat, r.c_ci.lo, r.c_ci.hi, r.aborted
                );
            }
            if let Some(v) = &out.report.verdict {
                println!("verdict: {:?}", v.verdict);
            }
            println!("wrote {}", dir.display());
        }
        Command::Sweep(c) => {
            let per_cell = c.episodes;
            let cfg = load_config(&c.config, &Overrides { episodes: None, ..overrides(&c) })?;
            let map = run_sweep(&cfg, workers_of(&cfg), per_cell)?;
            let dir = out_dir(&c, &cfg.name);
            write_sweep(&dir, &map)?;
            for cell in &map.cells {
                println!("cell {}: c={:.4}", cell.index, cell.report.c_hat);
            }
            for cliff in &map.cliffs {
                println!("cliff between cells {} and {} (drop {:.4})", cliff.from_cell, cliff.to_cell, cliff.drop);
            }
            println!("wrote {}", dir.display());
        }
        Command::Serve {
            config,
            seed,
            port,
            tick_rate,
            ui_dir,
            out,
        } => {
            let cfg = load_config(&config, &Overrides { seed, ..Default::default() })?;
            let situation = sample_situations(&cfg.space, 1, situations_seed(cfg.seed))?.remove(0);
            let setup = SessionSetup {
                scenario: cfg.scenario.clone(),
                situation,
                swarm: cfg.swarm.clone(),
                goal: cfg.goal.clone(),
                limits: cfg.limits,
                seed: cfg.seed,
                initial_posture: PostureCommand::Hold,
            };
            let opts = ServeOptions {
                port: resolve_port(port).map_err(|e| HarnessError::Config(vec![bridge_violation("--port", e)]))?,
                tick_rate,
                ui_dir,
                disconnect_grace: DEFAULT_GRACE,
                ..ServeOptions::default()
            };
            if !(tick_rate.is_finite() && tick_rate > 0.0) {
                return Err(HarnessError::Config(vec![exswarm_harness::Violation {
                    line: None,
                    field: "--tick-rate".into(),
                    message: "must be > 0".into(),
                }]));
            }
            let session = serve_blocking(setup, opts).map_err(|e| HarnessError::Runtime(e.to_string()))?;
            if let Some(path) = out {
                let log = SessionLog::of(&session);
                std::fs::write(&path, serde_json::to_string_pretty(&log)?)?;
                println!("wrote {}", path.display());
            }
        }
        Command::Replay { trace } => replay(&trace)?,
    }
    Ok(())
}

fn bridge_violation(field: &str, e: exswarm_bridge::BridgeError) -> exswarm_harness::Violation {
    exswarm_harness::Violation {
        line: None,
        field: field.into(),
        message: e.to_string(),
    }
}

fn replay(path: &Path) -> Result<(), HarnessError> {
    if path.extension().is_some_and(|e| e == "json") {
        let text = std::fs::read_to_string(path)?;
        let log: SessionLog = serde_json::from_str(&text)?;
        log.verify().map_err(|e| HarnessError::Runtime(e.to_string()))?;
        println!(
            "session replay ok: {} journal entries, final tick {}",
            log.journal.len(),
            log.final_snapshot.tick
        );
        return Ok(());
    }
    let trace = read_trace(path)?;
    trace
        .check(None)
        .map_err(|e| HarnessError::Runtime(format!("{}: {e}", path.display())))?;
    println!(
        "trace ok: seed {} steps {} outcome {:?}",
        trace.seed, trace.resources_spent.steps, trace.outcome
    );
    Ok(())
}
