//! `zeta-forms`: step functions, constants, exact verification, growth
//! constants, dimension claims and parameter search from the command line.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use zeta_forms::params::{default_r, ParamSet};
use zeta_forms::Error;

#[derive(Parser, Debug)]
#[command(
    name = "zeta-forms",
    version,
    about = "Linear forms in odd zeta values: constants, checks and bounds"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalOpts,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// Working precision in bits.
    #[arg(long, global = true, default_value_t = 128)]
    pub precision: u32,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Seed for randomized commands (overrides the config seed).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the report here instead of stdout; a manifest goes to `<out>.manifest.json`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Args, Debug, Clone, Default)]
pub struct ParamOpts {
    /// Parameter file (`M`, `deltas`, `s`, `r`, `include_numerator_bricks`).
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long = "M")]
    pub m: Option<u64>,
    /// Comma-separated, non-decreasing.
    #[arg(long, value_delimiter = ',')]
    pub deltas: Option<Vec<u64>>,
    #[arg(long)]
    pub s: Option<u64>,
    #[arg(long)]
    pub r: Option<u64>,
    /// Include the numerator-brick floor terms in φ and the wider prime range in Φ_n.
    #[arg(long)]
    pub numerator_bricks: bool,
}

impl ParamOpts {
    /// File values first, then flags; `s` defaults to `4J` and `r` to `⌊s/log²s⌋`.
    pub fn resolve(&self) -> Result<ParamSet, Error> {
        self.resolve_with(default_r)
    }

    /// As [`ParamOpts::resolve`] but with `r = 1` by default, for the quantities
    /// that depend only on `(M, δ)`.
    pub fn resolve_shape(&self) -> Result<ParamSet, Error> {
        self.resolve_with(|_| 1)
    }

    fn resolve_with(&self, r_default: impl Fn(u64) -> u64) -> Result<ParamSet, Error> {
        let mut p = match &self.params {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::InvalidParams(vec![format!("{}: {e}", path.display())]))?;
                ParamSet::from_toml(&text).map_err(|e| Error::InvalidParams(vec![e.to_string()]))?
            }
            None => {
                let m = self.m.ok_or_else(|| {
                    Error::InvalidParams(vec!["--M or --params is required".into()])
                })?;
                let deltas = self
                    .deltas
                    .clone()
                    .ok_or_else(|| Error::InvalidParams(vec!["--deltas is required".into()]))?;
                let s = self.s.unwrap_or(4 * deltas.len() as u64);
                ParamSet {
                    m,
                    deltas,
                    s,
                    r: self.r.unwrap_or_else(|| r_default(s.max(2))),
                    include_numerator_bricks: false,
                }
            }
        };
        if self.params.is_some() {
            if let Some(m) = self.m {
                p.m = m;
            }
            if let Some(d) = &self.deltas {
                p.deltas = d.clone();
            }
            if let Some(s) = self.s {
                p.s = s;
            }
            if let Some(r) = self.r {
                p.r = r;
            }
        }
        p.include_numerator_bricks |= self.numerator_bricks;
        p.validate()?;
        Ok(p)
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClaimName {
    Theorem1,
    Claim1,
    Claim2,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Step function φ as a table of intervals, and ϖ.
    Phi(ParamOpts),
    /// ϖ only.
    Varpi(ParamOpts),
    /// The constant C and C·(1 + log 2).
    ConstantC(ParamOpts),
    /// Build R_n, its coefficients ρ_{n,i}, Φ_n and S_n for one n.
    BuildForm {
        #[command(flatten)]
        params: ParamOpts,
        #[arg(long)]
        n: u64,
    },
    /// Exact checks of the series expansion and the integrality lemmas.
    Verify {
        #[command(flatten)]
        params: ParamOpts,
        #[arg(long, conflicts_with = "n_range")]
        n: Option<u64>,
        /// Inclusive range `a..b`.
        #[arg(long)]
        n_range: Option<String>,
    },
    /// Growth constants α, β, ϖ and their adjusted forms.
    Asympt(ParamOpts),
    /// One of the named results with every intermediate constant.
    Claim {
        #[arg(value_enum)]
        name: ClaimName,
    },
    /// Search for parameter shapes with large C.
    Search {
        /// Search configuration file.
        #[arg(long)]
        config: PathBuf,
        /// On-disk evaluation cache, read before and written after the run.
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// Re-run the command recorded in a manifest and compare output digests.
    Replay { manifest: PathBuf },
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Computation(String),
    Mismatch(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Computation(_) => 1,
            Failure::Validation(_) => 2,
            Failure::Mismatch(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Computation(m) | Failure::Mismatch(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParams(_) | Error::PreconditionViolation(_) => {
                Failure::Validation(e.to_string())
            }
            Error::SymmetryViolation(_) => Failure::Mismatch(e.to_string()),
            _ => Failure::Computation(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse_from(&argv);
    if let Some(j) = cli.global.jobs {
        // an already-initialized pool only happens in tests; results are identical either way
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build_global();
    }
    match manifest::run_recorded(&cli, &argv[1..]) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
