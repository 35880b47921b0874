//! The `sgt` command line.
//!
//! Settings are resolved in this order, later sources winning: built-in
//! defaults, the `--config` file, `--set key=value` pairs, then dedicated
//! flags. `SGT_OUT` supplies the output directory when `--out` is absent
//! and `SGT_THREADS` the worker count; no other environment variable is
//! read.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::{self, RunContext};
use crate::error::{config_err, Result};
use crate::settings::Settings;

pub const OUT_ENV: &str = "SGT_OUT";
pub const THREADS_ENV: &str = "SGT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "sgt", version, about = "Multihop scene-graph attention experiments")]
struct Cli {
    /// Base random seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Flat key=value configuration file
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output directory (default: $SGT_OUT, then runs/<command>)
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Log progress (-v) or details (-vv) to stderr
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

/// Any configuration key, repeatable.
#[derive(Debug, Args, Default)]
struct Common {
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug, Args)]
struct ModelFlags {
    /// Distance kernel: rq, gaussian, identity or off
    #[arg(long)]
    kernel: Option<String>,
    /// Hop limit, or `none` for conventional attention
    #[arg(long)]
    hop_limit: Option<String>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic corpus of scene graphs and captions
    GenData {
        #[arg(long)]
        samples: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Masked node modeling on synthetic graphs
    Pretrain {
        /// Fraction of eligible nodes masked per sample
        #[arg(long)]
        ratio: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
        #[command(flatten)]
        model: ModelFlags,
        #[command(flatten)]
        common: Common,
    },
    /// Train the predicate probe or the answer scorer
    Train {
        /// relational or choice
        #[arg(long)]
        task: Option<String>,
        /// Initialize the encoder from a pretrain or train run directory
        #[arg(long, value_name = "DIR")]
        init: Option<PathBuf>,
        #[command(flatten)]
        model: ModelFlags,
        #[command(flatten)]
        common: Common,
    },
    /// Re-score a finished pretrain or train run
    Eval {
        #[arg(long, value_name = "DIR")]
        run: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Hop-limit by kernel ablation on the relational task
    AblateHops {
        /// Number of seeds per cell
        #[arg(long)]
        seeds: Option<u64>,
        #[arg(long)]
        epochs: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Loss study on a long-tailed class profile
    Longtail {
        /// exponential or balanced
        #[arg(long)]
        profile: Option<String>,
        #[arg(long)]
        seeds: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Distill pseudo scene graphs from SRL documents
    ExtractSg {
        /// Directory of SRL document files
        #[arg(long, value_name = "DIR")]
        input: Option<PathBuf>,
        #[arg(long)]
        min_frequency: Option<u64>,
        /// Comma-separated verb lemmas to drop
        #[arg(long)]
        stoplist: Option<String>,
        /// Comma-separated semantic roles to keep
        #[arg(long)]
        roles: Option<String>,
        #[arg(long)]
        top_k: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Sampled kernel curves of every head
    DumpKernels {
        #[arg(long, value_name = "DIR")]
        run: Option<PathBuf>,
        #[arg(long)]
        max_distance: Option<u32>,
        #[command(flatten)]
        common: Common,
    },
    /// Attention matrices of every layer for one sample
    DumpAttention {
        #[arg(long, value_name = "DIR")]
        run: Option<PathBuf>,
        #[arg(long)]
        sample: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
}

type Runner = fn(RunContext) -> Result<()>;

fn put<T: ToString>(pairs: &mut Vec<(&'static str, String)>, key: &'static str, v: &Option<T>) {
    if let Some(v) = v {
        pairs.push((key, v.to_string()));
    }
}

fn put_path(pairs: &mut Vec<(&'static str, String)>, key: &'static str, v: &Option<PathBuf>) {
    if let Some(v) = v {
        pairs.push((key, v.display().to_string()));
    }
}

fn model_pairs(pairs: &mut Vec<(&'static str, String)>, m: &ModelFlags) {
    put(pairs, "kernel", &m.kernel);
    put(pairs, "hop_limit", &m.hop_limit);
    put(pairs, "epochs", &m.epochs);
    put(pairs, "lr", &m.lr);
}

impl Command {
    /// Command name, runner, `--set` pairs and dedicated-flag pairs.
    fn plan(&self) -> (&'static str, Runner, &Common, Vec<(&'static str, String)>) {
        let mut p = Vec::new();
        match self {
            Command::GenData { samples, common } => {
                put(&mut p, "samples", samples);
                ("gen-data", commands::gen_data, common, p)
            }
            Command::Pretrain { ratio, samples, model, common } => {
                put(&mut p, "ratio", ratio);
                put(&mut p, "samples", samples);
                model_pairs(&mut p, model);
                ("pretrain", commands::pretrain, common, p)
            }
            Command::Train { task, init, model, common } => {
                put(&mut p, "task", task);
                put_path(&mut p, "init", init);
                model_pairs(&mut p, model);
                ("train", commands::train, common, p)
            }
            Command::Eval { run, common } => {
                put_path(&mut p, "run", run);
                ("eval", commands::eval, common, p)
            }
            Command::AblateHops { seeds, epochs, common } => {
                put(&mut p, "seeds", seeds);
                put(&mut p, "epochs", epochs);
                ("ablate-hops", commands::ablate_hops, common, p)
            }
            Command::Longtail { profile, seeds, common } => {
                put(&mut p, "profile", profile);
                put(&mut p, "seeds", seeds);
                ("longtail", commands::longtail, common, p)
            }
            Command::ExtractSg { input, min_frequency, stoplist, roles, top_k, common } => {
                put_path(&mut p, "input", input);
                put(&mut p, "min_frequency", min_frequency);
                put(&mut p, "stoplist", stoplist);
                put(&mut p, "roles", roles);
                put(&mut p, "top_k", top_k);
                ("extract-sg", commands::extract_sg, common, p)
            }
            Command::DumpKernels { run, max_distance, common } => {
                put_path(&mut p, "run", run);
                put(&mut p, "max_distance", max_distance);
                ("dump-kernels", commands::dump_kernels, common, p)
            }
            Command::DumpAttention { run, sample, common } => {
                put_path(&mut p, "run", run);
                put(&mut p, "sample", sample);
                ("dump-attention", commands::dump_attention, common, p)
            }
        }
    }
}

fn threads() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v.parse::<usize>().ok().filter(|&n| n > 0).ok_or_else(|| config_err!("{THREADS_ENV}={v:?} is not a positive integer")),
        Err(_) => Ok(1),
    }
}

fn execute(cli: Cli) -> Result<()> {
    let (name, runner, common, flags) = cli.command.plan();
    let mut settings = match &cli.config {
        Some(path) => Settings::load(path)?,
        None => Settings::new(),
    };
    for pair in &common.set {
        let (k, v) = pair.split_once('=').ok_or_else(|| config_err!("--set expects KEY=VALUE, got {pair:?}"))?;
        settings.set(k.trim(), v.trim());
    }
    for (k, v) in flags {
        settings.set(k, v);
    }
    if let Some(seed) = cli.seed {
        settings.set("seed", seed);
    }
    let out = cli
        .out
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("runs").join(name));
    let ctx = RunContext::new(name, out, settings, threads()?)?;
    runner(ctx)
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).format_timestamp(None).try_init();
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    init_logging(cli.verbose);
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
