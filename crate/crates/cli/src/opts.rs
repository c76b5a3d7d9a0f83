//! Command-line flags and the TOML experiment file they override.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

#[derive(Debug, Parser)]
#[command(
    name = "moore-ssm",
    version,
    about = "Learn Moore machines and train Moore-encoded state-space models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Random-walk traces from a machine.
    Gen {
        #[arg(long, value_enum, default_value_t = TraceFormat::Spot)]
        format: TraceFormat,
    },
    /// Rewrite trace outputs under the dynamic grant cap.
    Transform,
    /// Learn a machine with L* or RPNI and write it back as dot.
    Learn,
    /// Write the exact (or noisy, with --epsilon) encoding as a checkpoint.
    Encode,
    /// Train an SSM on a trace file.
    Train,
    /// Trace acceptance of a machine or checkpoint against a reference machine.
    Eval {
        #[arg(long)]
        candidate: PathBuf,
    },
    /// Hidden-state diagnostics of a checkpoint.
    Analyze {
        #[arg(long)]
        checkpoint: PathBuf,
    },
    /// Convergence comparison of warm-start and random training logs.
    Compare {
        #[arg(long, num_args = 1.., required = true)]
        warm: Vec<PathBuf>,
        #[arg(long, num_args = 1.., required = true)]
        random: Vec<PathBuf>,
    },
    /// Run independent trials of one method.
    Suite,
    /// Write a built-in machine as dot.
    Fixture {
        name: Option<String>,
        #[arg(long)]
        list: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TraceFormat {
    Spot,
    Prefix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Lstar,
    Rpni,
    #[value(name = "ssm_random")]
    SsmRandom,
    #[value(name = "ssm_warmstart")]
    SsmWarmstart,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Lstar => "lstar",
            Method::Rpni => "rpni",
            Method::SsmRandom => "ssm_random",
            Method::SsmWarmstart => "ssm_warmstart",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arch {
    Baseline,
    Bilinear,
}

/// Every option is accepted by every subcommand; each uses what applies.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Opts {
    /// TOML experiment file; flags override its values.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Config format version (config files only).
    #[arg(skip)]
    pub version: Option<u32>,
    #[arg(long, global = true)]
    pub machine: Option<PathBuf>,
    #[arg(long, global = true)]
    pub traces: Option<PathBuf>,
    #[arg(long, global = true)]
    pub num_traces: Option<usize>,
    #[arg(long, global = true)]
    pub trace_len: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub method: Option<Method>,
    #[arg(long, global = true)]
    pub epochs: Option<usize>,
    #[arg(long, global = true)]
    pub lr: Option<f64>,
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    #[arg(long, global = true)]
    pub k: Option<u64>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub grant_aps: Option<Vec<String>>,
    #[arg(long, global = true)]
    pub threshold: Option<f64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Trial index recorded by `learn`.
    #[arg(long, global = true)]
    pub trial: Option<usize>,
    #[arg(long, global = true)]
    pub batch_size: Option<usize>,
    #[arg(long, global = true)]
    pub eval_every: Option<usize>,
    /// Stop training once test trace acceptance reaches this value.
    #[arg(long, global = true)]
    pub stop_at: Option<f64>,
    /// Architecture for `ssm_random`.
    #[arg(long, global = true, value_enum)]
    pub arch: Option<Arch>,
    /// Ascending RPNI sweep sizes.
    #[arg(long, global = true, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    /// Wall-clock limit for L* in seconds.
    #[arg(long, global = true)]
    pub timeout_secs: Option<f64>,
    /// Membership-query budget for L*.
    #[arg(long, global = true)]
    pub max_queries: Option<u64>,
}

pub const CONFIG_VERSION: u32 = 1;

macro_rules! fill {
    ($dst:ident, $src:ident, $($f:ident),*) => {
        $( if $dst.$f.is_none() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl Opts {
    /// Fills unset flags from the config file, resolving its relative paths
    /// against the file's directory.
    pub fn with_config(mut self) -> anyhow::Result<Self> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = std::fs::read_to_string(&path)
            .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        let mut file: Opts =
            toml::from_str(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
        if let Some(v) = file.version {
            anyhow::ensure!(v == CONFIG_VERSION, "unsupported config version {v}");
        }
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut file.machine, &mut file.traces, &mut file.out]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        fill!(
            self,
            file,
            machine,
            traces,
            num_traces,
            trace_len,
            seed,
            method,
            epochs,
            lr,
            epsilon,
            k,
            grant_aps,
            threshold,
            out,
            trials,
            trial,
            batch_size,
            eval_every,
            stop_at,
            arch,
            sizes,
            timeout_secs,
            max_queries
        );
        Ok(self)
    }
}
