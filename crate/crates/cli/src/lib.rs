//! Command-line front end: configuration, report serialization and plots.

pub mod cli;
pub mod commands;
pub mod config;
pub mod output;
pub mod svg;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;

use cli::{Cli, RunFlags};
use commands::{dispatch, Failure};
use config::{Formats, RunConfig, CONFIG_ENV};

/// Defaults, then the config file, then flags.
pub fn resolve_config(flags: &RunFlags) -> Result<RunConfig, Failure> {
    let mut cfg = RunConfig::default();
    let file = flags
        .config
        .clone()
        .or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
    if let Some(path) = file {
        cfg.apply_file(&path).map_err(Failure::usage)?;
    }
    macro_rules! over {
        ($($f:ident),*) => { $( if let Some(v) = flags.$f.clone() { cfg.$f = v; } )* };
    }
    over!(rtol, atol, conv_tol, event_tol, max_step, eps, t_max, max_crossings, grid, samples, fd_step, seed, jobs);
    if let Some(out) = &flags.out {
        cfg.out_dir = out.clone();
    }
    if let Some(f) = &flags.formats {
        cfg.formats = Formats::parse(f).map_err(Failure::usage)?;
    }
    if flags.allow_inadmissible {
        cfg.allow_inadmissible = true;
    }
    cfg.validate().map_err(Failure::usage)?;
    Ok(cfg)
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { commands::EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = resolve_config(&cli.run).and_then(|cfg| dispatch(&cli.command, &cfg));
    match outcome {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {f}");
            f.code
        }
    }
}
