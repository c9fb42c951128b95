//! `atomcav`: scenario-driven front end to the cavity optomechanics toolkit.
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 numerical failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod error;
mod manifest;
mod output;
mod scenario;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde_json::Value;

use args::{Cli, Command, Common};
use error::{config, CliError};
use manifest::{FileEntry, Manifest, RunArgs};
use output::Output;
use scenario::Ctx;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code() as u8)
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    let (name, common) = match command {
        Command::Replay(r) => return replay(&r.manifest, r.out.as_deref()),
        Command::Derive(c) => ("derive", c),
        Command::Spectrum(c) => ("spectrum", c),
        Command::Gain(c) => ("gain", c),
        Command::SweepBistability(c) => ("sweep-bistability", c),
        Command::Selforg(c) => ("selforg", c),
        Command::Transit(c) => ("transit", c),
        Command::Feedback(c) => ("feedback", c),
        Command::Sideband(c) => ("sideband", c),
        Command::Dynamics(c) => ("dynamics", c),
    };
    let (config, warnings) = load_config(common.config.as_deref())?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let args = RunArgs {
        seed: common.seed,
        grids: common.grids.clone(),
        format: common.format,
        nu_bar: common.nu_bar,
    };
    let run = execute(name, &config, &args)?;
    finish(&run, &common)
}

/// Reads a configuration, or the configuration embedded in a manifest.
/// Without a path the built-in example system is used.
fn load_config(path: Option<&Path>) -> Result<(Value, Vec<String>), CliError> {
    let Some(path) = path else {
        return Ok((atomcav::params::example_config(), Vec::new()));
    };
    let text = std::fs::read_to_string(path).map_err(|e| config(format!("{}: {e}", path.display())))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| config(format!("{}: invalid JSON: {e}", path.display())))?;
    if Manifest::is_manifest(&value) {
        let m: Manifest =
            serde_json::from_value(value).map_err(|e| config(format!("{}: not a manifest: {e}", path.display())))?;
        let warnings = m.audit();
        return Ok((m.config, warnings));
    }
    Ok((value, Vec::new()))
}

/// A completed run, not yet written.
struct Run {
    output: Output,
    manifest: Manifest,
}

fn execute(name: &str, config: &Value, args: &RunArgs) -> Result<Run, CliError> {
    let start = Instant::now();
    let sys = atomcav::params::validate(config)?;
    let derived = atomcav::params::derive(&sys)
        .ok()
        .and_then(|d| serde_json::to_value(d).ok());
    let ctx = Ctx {
        config,
        sys,
        seed: args.seed,
        grids: &args.grids,
        format: args.format,
        nu_bar: args.nu_bar,
    };
    let mut output = match name {
        "derive" => commands::derive(&ctx),
        "spectrum" => commands::spectrum(&ctx),
        "gain" => commands::gain(&ctx),
        "sweep-bistability" => commands::sweep_bistability(&ctx),
        "selforg" => commands::selforg(&ctx),
        "transit" => commands::transit(&ctx),
        "feedback" => commands::feedback(&ctx),
        "sideband" => commands::sideband(&ctx),
        "dynamics" => commands::dynamics(&ctx),
        other => Err(error::config(format!("unknown subcommand `{other}`"))),
    }?;
    let section = name.replace('-', "_");
    let resolved = match output.resolved.take() {
        Some(r) => scenario::with_resolved(config, &section, r),
        None => config.clone(),
    };
    let files: Vec<FileEntry> = output.files.iter().map(|(p, b)| manifest::entry(p, b)).collect();
    let manifest = Manifest {
        toolkit: manifest::TOOLKIT.into(),
        version: manifest::VERSION.into(),
        subcommand: name.into(),
        config_hash: manifest::config_hash(name, args, &resolved),
        args: args.clone(),
        config: resolved,
        derived,
        wall_clock_s: start.elapsed().as_secs_f64(),
        warnings: output.warnings.clone(),
        files,
    };
    Ok(Run { output, manifest })
}

/// Prints the summary and warnings, then writes files and the manifest if
/// an output directory was given.
fn finish(run: &Run, common: &Common) -> Result<(), CliError> {
    for w in &run.output.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(dir) = &common.out {
        write_outputs(dir, run)?;
    }
    let text = serde_json::to_string_pretty(&run.output.stdout).map_err(|e| config(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn write_outputs(dir: &PathBuf, run: &Run) -> Result<(), CliError> {
    if dir.exists() && !dir.is_dir() {
        return Err(config(format!("{}: not a directory", dir.display())));
    }
    std::fs::create_dir_all(dir).map_err(|e| config(format!("{}: {e}", dir.display())))?;
    for (name, bytes) in &run.output.files {
        std::fs::write(dir.join(name), bytes).map_err(|e| config(format!("{name}: {e}")))?;
    }
    let mut text = serde_json::to_vec_pretty(&run.manifest).map_err(|e| config(e.to_string()))?;
    text.push(b'\n');
    std::fs::write(dir.join(manifest::FILE_NAME), text).map_err(|e| config(format!("{}: {e}", manifest::FILE_NAME)))?;
    Ok(())
}

/// Re-runs a manifest and compares every file digest with the record.
fn replay(path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let recorded = Manifest::load(path)?;
    for w in recorded.audit() {
        eprintln!("warning: {w}");
    }
    let run = execute(&recorded.subcommand, &recorded.config, &recorded.args)?;
    let fresh = &run.manifest.files;
    let mut identical = 0;
    for old in &recorded.files {
        match fresh.iter().find(|f| f.path == old.path) {
            Some(f) if f.sha256 == old.sha256 => identical += 1,
            Some(_) => eprintln!("replay: {} differs", old.path),
            None => eprintln!("replay: {} not produced", old.path),
        }
    }
    for f in fresh {
        if !recorded.files.iter().any(|old| old.path == f.path) {
            eprintln!("replay: {} is new", f.path);
        }
    }
    eprintln!("replay: {identical}/{} files identical", recorded.files.len());
    let common = Common {
        config: None,
        out: out.map(Path::to_path_buf),
        seed: recorded.args.seed,
        grids: recorded.args.grids.clone(),
        format: recorded.args.format,
        nu_bar: recorded.args.nu_bar,
    };
    finish(&run, &common)
}
