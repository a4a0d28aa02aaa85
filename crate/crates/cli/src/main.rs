mod cli;
mod commands;
mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;

use crate::cli::Cli;
use crate::commands::Output;
use crate::config::{ManifestInfo, RunConfig};

fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_stem().unwrap_or_default().to_os_string();
    name.push(".manifest.toml");
    out.with_file_name(name)
}

fn write_csv<W: Write>(w: W, out: &Output) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(&out.header)?;
    for row in &out.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    let g = &cli.global;
    let mut cfg = match &g.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.manifest = None;
    if let Some(s) = g.seed {
        cfg.simulation.seed = s;
    }
    if let Some(n) = g.snapshots {
        cfg.simulation.snapshots = n;
    }
    let started = timestamp();
    let output = match g.threads {
        Some(n) => mcrelay::sim::run_with_threads(n, || commands::run(&cli.command, &cfg))??,
        None => commands::run(&cli.command, &cfg)?,
    };

    match &g.out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)
                    .with_context(|| format!("cannot create {}", dir.display()))?;
            }
            let f = std::fs::File::create(path)
                .with_context(|| format!("cannot create {}", path.display()))?;
            write_csv(f, &output)?;
            let mpath = manifest_path(path);
            let mut resolved = cfg.clone();
            resolved.manifest = Some(ManifestInfo {
                version: env!("CARGO_PKG_VERSION").to_string(),
                seed: cfg.simulation.seed,
                threads: g.threads,
                started,
                finished: timestamp(),
                command: std::env::args().collect(),
                outputs: vec![path.display().to_string()],
            });
            std::fs::write(&mpath, resolved.to_toml()?)
                .with_context(|| format!("cannot write {}", mpath.display()))?;
            for line in &output.summary {
                println!("{line}");
            }
            println!("wrote {} and {}", path.display(), mpath.display());
        }
        None => {
            write_csv(std::io::stdout().lock(), &output)?;
            for line in &output.summary {
                eprintln!("{line}");
            }
        }
    }
    Ok(())
}

/// 2 for numerical failures of the library, 1 for everything else.
fn exit_code(e: &anyhow::Error) -> u8 {
    let numerical = e
        .chain()
        .filter_map(|c| c.downcast_ref::<mcrelay::Error>())
        .any(mcrelay::Error::is_numerical);
    if numerical {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
