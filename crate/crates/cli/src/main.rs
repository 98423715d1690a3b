use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use subquantum::Exec;
use subquantum_cli::{exit, run_scenario, RunError, Scenario, ScenarioConfig};

#[derive(Debug, Parser)]
#[command(
    name = "subquantum",
    version,
    about = "Sub-quantum diffusion laboratory"
)]
struct Args {
    /// dispersion, trajectories, interfere, entangle, collapse or validate
    scenario: Scenario,
    /// Flat `key = value` config file; defaults apply when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed, overriding the config
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: config, then $SUBQUANTUM_OUTPUT_DIR, then ./subquantum-out)
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Worker threads; never changes numeric output
    #[arg(long)]
    workers: Option<usize>,
    /// Also write SVG plots
    #[arg(long)]
    emit_svg: bool,
}

fn load(args: &Args) -> Result<ScenarioConfig, String> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            ScenarioConfig::parse(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.emit_svg |= args.emit_svg;
    cfg.scenario = Some(args.scenario);
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let cfg = match load(&args) {
        Ok(cfg) => cfg,
        Err(msg) => {
            eprintln!("config error: {msg}");
            return ExitCode::from(exit::CONFIG_ERROR as u8);
        }
    };
    let exec = match args.workers {
        Some(n) => match Exec::with_workers(n) {
            Ok(exec) => exec,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(exit::RUNTIME_ERROR as u8);
            }
        },
        None => Exec::default(),
    };
    let dir = subquantum_cli::scenario::resolve_output_dir(args.output_dir.as_deref(), &cfg);
    match run_scenario(&cfg, args.scenario, &dir, &exec, args.workers) {
        Ok((manifest, rendered)) => {
            if args.scenario == Scenario::Validate {
                let text = &rendered.artifacts[0].bytes;
                if let Ok(report) = serde_json::from_slice::<serde_json::Value>(text) {
                    for c in report["checks"].as_array().into_iter().flatten() {
                        println!(
                            "{} [{:>2}] {}: {}",
                            if c["passed"].as_bool() == Some(true) {
                                "PASS"
                            } else {
                                "FAIL"
                            },
                            c["id"],
                            c["name"].as_str().unwrap_or(""),
                            c["detail"].as_str().unwrap_or("")
                        );
                    }
                }
            }
            for f in &manifest.files {
                println!("wrote {}", dir.join(&f.name).display());
            }
            if rendered.failed_checks > 0 {
                eprintln!("{} check(s) failed", rendered.failed_checks);
                return ExitCode::from(exit::VALIDATION_FAILED as u8);
            }
            ExitCode::from(exit::SUCCESS as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                RunError::Config(_) => exit::CONFIG_ERROR,
                _ => exit::RUNTIME_ERROR,
            };
            ExitCode::from(code as u8)
        }
    }
}
