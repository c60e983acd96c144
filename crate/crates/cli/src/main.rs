//! `nanospin` command-line front end.

mod config;
mod formfactor;
mod invert;
mod lineshape;
mod noise;
mod output;
mod polarize;
mod svg;
mod validate;

use std::env;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, ValueHint};

use config::Resolver;
use output::Output;

pub const OUTPUT_DIR_ENV: &str = "NANOSPIN_OUTPUT_DIR";

/// Exact polarization dynamics of spin-½ gas clusters in nano-cavities.
#[derive(Parser)]
#[command(name = "nanospin", version, about)]
struct Cli {
    /// Plain-text `key = value` parameter file; flags take precedence.
    #[arg(long, global = true, value_hint = ValueHint::FilePath)]
    config: Option<PathBuf>,
    /// Output directory [default: $NANOSPIN_OUTPUT_DIR, else the current directory].
    #[arg(long, global = true, value_hint = ValueHint::DirPath)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Subcommand)]
enum Command {
    Formfactor(formfactor::Opts),
    Polarize(polarize::Opts),
    Noise(noise::Opts),
    Lineshape(lineshape::Opts),
    Invert(invert::Opts),
    Validate(validate::Opts),
}

pub trait Subcommand {
    const NAME: &'static str;

    fn run(&self, ctx: &mut Context) -> Result<ExitCode>;
}

pub struct Context {
    pub params: Resolver,
    out_dir: Option<PathBuf>,
    command: &'static str,
}

impl Context {
    /// Resolves the output directory, rejects unused config keys and opens the writer.
    pub fn output(&mut self) -> Result<Output> {
        let dir = self
            .params
            .unrecorded::<PathBuf>("out-dir", self.out_dir.take())?
            .or_else(|| env::var_os(OUTPUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."));
        let config = self.params.finish()?;
        Output::new(dir, self.command, config)
    }
}

fn dispatch<S: Subcommand>(opts: &S, params: Resolver, out_dir: Option<PathBuf>) -> Result<ExitCode> {
    let mut ctx = Context { params, out_dir, command: S::NAME };
    opts.run(&mut ctx)
}

fn run(cli: Cli) -> Result<ExitCode> {
    let params = Resolver::load(cli.config.as_deref())?;
    let out = cli.out_dir;
    match &cli.command {
        Command::Formfactor(o) => dispatch(o, params, out),
        Command::Polarize(o) => dispatch(o, params, out),
        Command::Noise(o) => dispatch(o, params, out),
        Command::Lineshape(o) => dispatch(o, params, out),
        Command::Invert(o) => dispatch(o, params, out),
        Command::Validate(o) => dispatch(o, params, out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
