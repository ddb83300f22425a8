//! `wams` - command-line front end: solve, sweep, recover, bilevel, and
//! energy evaluation over file-based configs, with hashed manifests for
//! reproducibility. Exit codes: 0 success, 2 validation error, 3 solver
//! failure.

mod config;
mod pipeline;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use config::RunConfig;
use pipeline::{run_command, Artifact};

#[derive(Parser)]
#[command(
    name = "wams",
    about = "Weighted phase-field segmentation toolkit",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the `out` config key; default `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Verify the existing manifest instead of writing artifacts.
    #[arg(long)]
    check: bool,
    /// Override a config key, e.g. --set eps=0.01 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Alternating minimization of the weighted phase-field energy.
    Solve(RunArgs),
    /// Eps sweep with jump-cost probes and trend verdicts.
    Sweep(RunArgs),
    /// Explicit recovery constructions (1D pair or profile-of-distance).
    Recover(RunArgs),
    /// Per-cube regularization learning over candidate partitions.
    Bilevel(RunArgs),
    /// One-shot energy evaluation (diffuse or sharp).
    Energy(RunArgs),
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Config hash: canonical key=value lines, with the output location excluded
/// (it names where artifacts go, not what they are).
fn config_hash(cfg: &RunConfig) -> String {
    let canonical: String = cfg
        .canonical()
        .lines()
        .filter(|l| !l.starts_with("out="))
        .map(|l| format!("{l}\n"))
        .collect();
    sha256_hex(canonical.as_bytes())
}

fn manifest_text(cfg_hash: &str, artifacts: &[Artifact]) -> String {
    let mut rows: Vec<(String, String)> = artifacts
        .iter()
        .map(|a| (a.name.clone(), sha256_hex(&a.bytes)))
        .collect();
    rows.sort();
    let mut out = format!("config {cfg_hash}\n");
    for (name, hash) in rows {
        out.push_str(&format!("{hash}  {name}\n"));
    }
    out
}

fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for a in artifacts {
        std::fs::write(dir.join(&a.name), &a.bytes)?;
    }
    Ok(())
}

fn check_manifest(dir: &Path, cfg_hash: &str, artifacts: &[Artifact]) -> Result<(), String> {
    let manifest_path = dir.join("manifest.txt");
    let on_disk = std::fs::read_to_string(&manifest_path)
        .map_err(|e| format!("cannot read manifest {}: {e}", manifest_path.display()))?;
    let expected = manifest_text(cfg_hash, artifacts);
    if on_disk == expected {
        return Ok(());
    }
    // explain the first difference
    for (have, want) in on_disk.lines().zip(expected.lines()) {
        if have != want {
            return Err(format!(
                "manifest mismatch:\n  recorded: {have}\n  recomputed: {want}"
            ));
        }
    }
    Err(format!(
        "manifest length differs: recorded {} lines, recomputed {} lines",
        on_disk.lines().count(),
        expected.lines().count()
    ))
}

fn execute(name: &str, args: &RunArgs) -> u8 {
    let mut cfg = match RunConfig::from_file(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("wams {name}: {e:#}");
            return 2;
        }
    };
    if let Err(e) = cfg.apply_overrides(&args.set) {
        eprintln!("wams {name}: {e:#}");
        return 2;
    }
    if let Some(out) = &args.out {
        cfg.set("out", out.display().to_string());
    }
    let out_dir = PathBuf::from(cfg.get("out").unwrap_or("out"));
    let cfg_hash = config_hash(&cfg);
    match run_command(name, &cfg) {
        Ok(artifacts) => {
            if args.check {
                match check_manifest(&out_dir, &cfg_hash, &artifacts) {
                    Ok(()) => {
                        println!("manifest OK: {} artifacts verified", artifacts.len());
                        0
                    }
                    Err(msg) => {
                        eprintln!("wams {name}: {msg}");
                        2
                    }
                }
            } else {
                let manifest = manifest_text(&cfg_hash, &artifacts);
                if let Err(e) = write_artifacts(&out_dir, &artifacts)
                    .and_then(|_| std::fs::write(out_dir.join("manifest.txt"), manifest))
                {
                    eprintln!(
                        "wams {name}: cannot write artifacts to {}: {e}",
                        out_dir.display()
                    );
                    return 2;
                }
                println!(
                    "wrote {} artifacts and manifest.txt to {}",
                    artifacts.len(),
                    out_dir.display()
                );
                0
            }
        }
        Err(failure) => {
            eprintln!("wams {name}: {}", failure.message);
            if !failure.partial.is_empty() && !args.check {
                if write_artifacts(&out_dir, &failure.partial).is_ok() {
                    eprintln!(
                        "wams {name}: wrote {} partial artifacts (no manifest)",
                        failure.partial.len()
                    );
                }
            }
            failure.code.clamp(0, 255) as u8
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Solve(a) => execute("solve", a),
        Command::Sweep(a) => execute("sweep", a),
        Command::Recover(a) => execute("recover", a),
        Command::Bilevel(a) => execute("bilevel", a),
        Command::Energy(a) => execute("energy", a),
    };
    ExitCode::from(code)
}
