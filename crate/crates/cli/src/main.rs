//! `kcontract`: simulate models, track k-volume decay and run certificate checks.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kcontract::io::{
    parse_deltas, parse_params, parse_real_list, parse_run_config, parse_window, RunConfig,
};
use kcontract::linalg::NormKind;
use kcontract::Error;

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_ESCAPE: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "kcontract",
    version,
    about = "k-contraction and horizontal-contraction toolkit"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Built-in model: hopf, duffing, triangular2d, linear-invariant.
    #[arg(long, global = true)]
    model: Option<String>,
    /// JSON file describing a linear model.
    #[arg(long, global = true)]
    model_file: Option<String>,
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Model parameters, e.g. `gamma1=0.25,gamma2=4`.
    #[arg(long, global = true)]
    params: Option<String>,
    #[arg(long, global = true, value_parser = parse_norm)]
    norm: Option<NormKind>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output path; `-` writes to standard output.
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true)]
    dt: Option<f64>,
    #[arg(long, global = true)]
    t_end: Option<f64>,
    /// Write every stride-th integration step.
    #[arg(long, global = true)]
    stride: Option<usize>,
    /// Fitting window `a,b`.
    #[arg(long, global = true)]
    window: Option<String>,
    /// Suppress diagnostics on standard error.
    #[arg(long, global = true)]
    quiet: bool,
}

fn parse_norm(s: &str) -> Result<NormKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the state equation and write a trajectory CSV.
    Simulate {
        /// Initial condition, e.g. `2,0`.
        #[arg(long)]
        ic: Option<String>,
    },
    /// Integrate the k-th compound equation and fit the decay of |y(t)|.
    Volume {
        #[arg(long)]
        ic: Option<String>,
        #[arg(long)]
        k: Option<usize>,
        /// k displacement vectors, e.g. `1,0;0,1`.
        #[arg(long)]
        deltas: Option<String>,
    },
    /// Run a certificate check and write a JSON report.
    Certify {
        #[arg(long, value_enum)]
        check: Option<CheckName>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        ic: Option<String>,
        #[arg(long)]
        deltas: Option<String>,
        /// Number of sampled states.
        #[arg(long)]
        samples: Option<usize>,
        /// Trajectories (or trajectory pairs) simulated by trajectory-based checks.
        #[arg(long)]
        pairs: Option<usize>,
    },
    /// Check the wedge decay bound on a seeded synthetic vector family.
    Lemma1 {
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        ell: Option<usize>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        gamma1: Option<f64>,
        #[arg(long)]
        gamma2: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckName {
    KContractionPointwise,
    KContractionEmpirical,
    Partial,
    Horizontal,
    Theorem1,
    Theorem2,
    FlowInvariant,
}

impl CheckName {
    fn from_config(s: &str) -> Result<Self, Error> {
        <Self as ValueEnum>::from_str(s, false)
            .map_err(|_| Error::Config(format!("--check: unknown check `{s}`")))
    }
}

/// Merges the config file (if any) with the flags, flags taking precedence.
fn resolve(global: GlobalArgs, command: &Command) -> Result<RunConfig, Error> {
    let mut base = match &global.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::Config(format!("--config: cannot read {}: {e}", path.display()))
            })?;
            parse_run_config(&text)?
        }
        None => RunConfig::default(),
    };
    let opt_list =
        |s: &Option<String>, flag: &str| s.as_deref().map(|s| parse_real_list(s, flag)).transpose();
    let opt_deltas = |s: &Option<String>| s.as_deref().map(parse_deltas).transpose();
    let mut flags = RunConfig {
        model: global.model,
        model_file: global.model_file,
        params: global
            .params
            .as_deref()
            .map(parse_params)
            .transpose()?
            .unwrap_or_default(),
        norm: global.norm,
        seed: global.seed,
        out: global.out,
        dt: global.dt,
        t_end: global.t_end,
        stride: global.stride,
        window: global.window.as_deref().map(parse_window).transpose()?,
        ..Default::default()
    };
    match command {
        Command::Simulate { ic } => {
            flags.ic = opt_list(ic, "--ic")?;
        }
        Command::Volume { ic, k, deltas } => {
            flags.ic = opt_list(ic, "--ic")?;
            flags.k = *k;
            flags.deltas = opt_deltas(deltas)?;
        }
        Command::Certify {
            check,
            k,
            ic,
            deltas,
            samples,
            pairs,
        } => {
            flags.check = check.map(|c| {
                c.to_possible_value()
                    .expect("no skipped variants")
                    .get_name()
                    .to_string()
            });
            flags.k = *k;
            flags.ic = opt_list(ic, "--ic")?;
            flags.deltas = opt_deltas(deltas)?;
            flags.samples = *samples;
            flags.pairs = *pairs;
        }
        Command::Lemma1 {
            k,
            n,
            ell,
            beta,
            gamma1,
            gamma2,
        } => {
            flags.k = *k;
            flags.n = *n;
            flags.ell = *ell;
            flags.beta = *beta;
            flags.gamma1 = *gamma1;
            flags.gamma2 = *gamma2;
        }
    }
    if flags.model.is_some() || flags.model_file.is_some() {
        // a model chosen on the command line replaces either kind from the file
        base.model = None;
        base.model_file = None;
    }
    let cfg = base.overlay(flags);
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let quiet = cli.global.quiet;
    let result = resolve(cli.global, &cli.command).and_then(|cfg| match cli.command {
        Command::Simulate { .. } => commands::simulate(&cfg, quiet),
        Command::Volume { .. } => commands::volume(&cfg, quiet),
        Command::Certify { .. } => {
            let check = cfg
                .check
                .as_deref()
                .ok_or_else(|| Error::Config("--check is required".into()))
                .and_then(CheckName::from_config)?;
            commands::certify(&cfg, check, quiet)
        }
        Command::Lemma1 { .. } => commands::lemma1(&cfg, quiet),
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::DomainEscape { .. } | Error::NonFinite { .. } => EXIT_ESCAPE,
        _ => EXIT_CONFIG,
    }
}
