//! Run manifests: enough to re-run a command and check that it reproduces the
//! same bytes.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::Parser;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::commands;
use crate::{Cli, Command, Failure};

#[derive(Debug, Serialize, Deserialize)]
pub struct OutputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments after the program name, as given.
    pub args: Vec<String>,
    /// Parameters or search configuration after defaults, files and flags are merged.
    pub config: serde_json::Value,
    pub version: String,
    pub precision_bits: u32,
    pub seed: Option<u64>,
    pub started_unix_seconds: u64,
    pub wall_seconds: f64,
    pub exit_code: u8,
    pub outputs: Vec<OutputDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// `<out>.manifest.json` next to the output file.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Phi(_) => "phi",
        Command::Varpi(_) => "varpi",
        Command::ConstantC(_) => "constant-c",
        Command::BuildForm { .. } => "build-form",
        Command::Verify { .. } => "verify",
        Command::Asympt(_) => "asympt",
        Command::Claim { .. } => "claim",
        Command::Search { .. } => "search",
        Command::Replay { .. } => "replay",
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, bytes)
        .map_err(|e| Failure::Computation(format!("{}: {e}", path.display())))
}

/// Runs the command, writes the report (to `--out` or stdout) and, with
/// `--out`, the manifest. A failed check still writes both, then reports the mismatch.
pub fn run_recorded(cli: &Cli, args: &[String]) -> Result<(), Failure> {
    if let Command::Replay { manifest } = &cli.command {
        return replay(manifest);
    }
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let clock = Instant::now();
    let outcome = commands::run(cli)?;
    let wall_seconds = clock.elapsed().as_secs_f64();
    match &cli.global.out {
        None => print!("{}", outcome.body),
        Some(out) => {
            write(out, outcome.body.as_bytes())?;
            let m = RunManifest {
                command: command_name(&cli.command).to_string(),
                args: args.to_vec(),
                config: outcome.config,
                version: env!("CARGO_PKG_VERSION").to_string(),
                precision_bits: cli.global.precision,
                seed: cli.global.seed,
                started_unix_seconds: started,
                wall_seconds,
                exit_code: outcome.mismatch.as_ref().map_or(0, |_| 3),
                outputs: vec![OutputDigest {
                    path: out.display().to_string(),
                    sha256: sha256_hex(outcome.body.as_bytes()),
                }],
            };
            let json = serde_json::to_string_pretty(&m).expect("manifest serializes") + "\n";
            write(&manifest_path(out), json.as_bytes())?;
        }
    }
    match outcome.mismatch {
        Some(f) => Err(f),
        None => Ok(()),
    }
}

/// Re-runs the recorded arguments in-process and compares the report digest.
fn replay(path: &Path) -> Result<(), Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
    let m: RunManifest =
        serde_json::from_str(&text).map_err(|e| Failure::Validation(format!("manifest: {e}")))?;
    let argv = std::iter::once("zeta-forms".to_string()).chain(m.args.iter().cloned());
    let mut cli = Cli::try_parse_from(argv)
        .map_err(|e| Failure::Validation(format!("recorded args: {e}")))?;
    if matches!(cli.command, Command::Replay { .. }) {
        return Err(Failure::Validation("replay cannot be nested".into()));
    }
    cli.global.out = None;
    let outcome = commands::run(&cli)?;
    let digest = sha256_hex(outcome.body.as_bytes());
    let expected = m.outputs.first().map(|o| o.sha256.as_str()).unwrap_or("");
    if digest == expected {
        println!("replay of `{}` reproduced sha256 {digest}", m.command);
        Ok(())
    } else {
        Err(Failure::Mismatch(format!(
            "replay of `{}` produced sha256 {digest}, recorded {expected}",
            m.command
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_path_appends_suffix() {
        assert_eq!(
            manifest_path(Path::new("out/r.csv")),
            PathBuf::from("out/r.csv.manifest.json")
        );
    }

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
