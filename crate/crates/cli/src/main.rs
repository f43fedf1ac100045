//! `schwinger`: runs one experiment task from a TOML configuration.
//!
//! Exit codes: 0 success, 2 bad input, 3 numerical failure, 4 capacity exceeded.
//! Every failure also leaves `error.json` in the output directory.

mod config;
mod output;
mod tasks;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use config::{ExperimentConfig, Task};
use schwinger_core::Error;

#[derive(Debug, Parser)]
#[command(
    name = "schwinger",
    version,
    about = "Exact diagonalization of lattice Schwinger model variants"
)]
struct Cli {
    /// What to compute.
    #[arg(value_enum)]
    task: Task,
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `solver.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for sweeps; defaults to the number of cores.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    kind: &'static str,
    field: Option<String>,
    message: String,
}

impl Failure {
    fn input(kind: &'static str, field: Option<String>, message: String) -> Self {
        Failure {
            code: 2,
            kind,
            field,
            message,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        let (code, kind, field) = match &e {
            Error::Config { field, .. } => (2, "config", Some(field.to_string())),
            Error::Unsupported(_) => (2, "unsupported", None),
            Error::EmptySector(_) => (2, "empty-sector", None),
            Error::Capacity { .. } => (4, "capacity", None),
            Error::NotHermitian => (3, "not-hermitian", None),
            Error::Dimension { .. } => (3, "dimension", None),
            Error::NoConvergence { .. } => (3, "no-convergence", None),
            Error::Degeneracy { .. } => (3, "degeneracy", None),
            Error::UndefinedGap => (3, "undefined-gap", None),
            Error::Fit(_) => (3, "fit", None),
        };
        Failure {
            code,
            kind,
            field,
            message,
        }
    }
}

/// TOML reports the offending key between backticks.
fn toml_field(message: &str) -> Option<String> {
    let start = message.find('`')? + 1;
    let len = message[start..].find('`')?;
    Some(message[start..start + len].to_string())
}

fn write_error(dir: &Path, f: &Failure) {
    let body = json!({
        "status": "error",
        "kind": f.kind,
        "field": f.field,
        "message": f.message,
    });
    let text = serde_json::to_string_pretty(&body).expect("json serializes");
    let result = std::fs::create_dir_all(dir)
        .map_err(anyhow::Error::from)
        .and_then(|_| output::write_atomic(dir, "error.json", text.as_bytes()));
    if let Err(e) = result {
        log::error!("could not write error.json: {e:#}");
    }
}

fn run(cli: &Cli, out_dir: &mut PathBuf) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| Failure::input("io", None, format!("reading {}: {e}", cli.config.display())))?;
    let mut cfg = ExperimentConfig::parse(&text).map_err(|e| {
        let message = e.message().to_string();
        Failure::input("toml", toml_field(&message), message)
    })?;
    if let Some(dir) = &cli.out {
        cfg.output.dir = dir.to_string_lossy().into_owned();
    }
    *out_dir = PathBuf::from(&cfg.output.dir);
    if let Some(seed) = cli.seed {
        cfg.solver.seed = seed;
    }

    let started = std::time::Instant::now();
    let result = tasks::run(&cfg, cli.task)?;
    log::info!("{} finished in {:.2?}", cli.task.name(), started.elapsed());

    std::fs::create_dir_all(out_dir.as_path()).map_err(|e| Failure::input("io", None, e.to_string()))?;
    let header: Vec<String> = std::iter::once(format!("schwinger {} {}", env!("CARGO_PKG_VERSION"), cli.task.name()))
        .chain(cfg.to_toml().lines().map(str::to_string))
        .collect();
    let io = |e: anyhow::Error| Failure::input("io", None, format!("{e:#}"));
    let mut files = Vec::new();
    for (name, table) in &result.tables {
        output::write_atomic(out_dir, name, &table.render(&header).map_err(io)?).map_err(io)?;
        files.push(name.clone());
    }
    let summary = json!({
        "status": "ok",
        "task": cli.task.name(),
        "files": files,
        "results": result.summary,
    });
    let text = serde_json::to_string_pretty(&summary).expect("json serializes");
    output::write_atomic(out_dir, "summary.json", text.as_bytes()).map_err(io)?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("ignoring --workers: {e}");
        }
    }
    let mut out_dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    match run(&cli, &mut out_dir) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error ({}): {}", f.kind, f.message);
            write_error(&out_dir, &f);
            ExitCode::from(f.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_field_takes_the_first_backticked_name() {
        assert_eq!(
            toml_field("unknown field `colour`, expected one of `a`, `b`"),
            Some("colour".into())
        );
        assert_eq!(toml_field("no names here"), None);
    }

    #[test]
    fn solver_errors_map_to_exit_three() {
        assert_eq!(Failure::from(Error::UndefinedGap).code, 3);
        assert_eq!(Failure::from(Error::Fit("x".into())).code, 3);
        let cap = Error::Capacity {
            what: "basis",
            required: 10,
            limit: 1,
        };
        assert_eq!(Failure::from(cap).code, 4);
        let f = Failure::from(Error::Config {
            field: "n_sites",
            reason: "odd".into(),
        });
        assert_eq!((f.code, f.field.as_deref()), (2, Some("n_sites")));
    }
}
