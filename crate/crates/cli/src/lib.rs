//! The `cascadekit` command line: each subcommand reads stage files, runs one
//! library step and writes its outputs plus a run manifest beside each.

mod args;
mod config;
mod fit;
mod pipeline;
mod report;
mod table;
mod topics;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;

pub use args::Cli;
use args::{CascadesCommand, Command, DynamicsCommand, TopicsCommand};
pub use config::{manifest_path, Params, RunConfig, RunManifest, CONFIG_ENV};
pub use table::fmt_num;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

/// Bad invocation: unknown values, conflicting flags, unreadable config.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Parses `argv`, runs the command and returns the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let _ = env_logger::Builder::new()
        .parse_filters(&cli.log_level)
        .target(env_logger::Target::Stderr)
        .try_init();
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                EXIT_USAGE
            } else {
                EXIT_DATA
            }
        }
    }
}

fn execute(cli: Cli) -> anyhow::Result<()> {
    let mut params = config::load_params(cli.config.as_deref())?;
    config::apply(&mut params.threads, cli.threads);
    if params.threads == 0 {
        params.threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    }
    // a pool may already exist when several runs share one process
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(params.threads)
        .build_global();

    let mut run = Run::new(params, cli.log_level);
    match cli.command {
        Command::Ingest(a) => pipeline::ingest(&mut run, a)?,
        Command::Cascades(CascadesCommand::Build(a)) => pipeline::build(&mut run, a)?,
        Command::Cascades(CascadesCommand::Stats(a)) => pipeline::stats(&mut run, a)?,
        Command::Dynamics(DynamicsCommand::ResponseRates(a)) => pipeline::response_rates(&mut run, a)?,
        Command::Dynamics(DynamicsCommand::Evolutions(a)) => pipeline::evolutions(&mut run, a)?,
        Command::Topics(TopicsCommand::Graph(a)) => topics::graph(&mut run, a)?,
        Command::Topics(TopicsCommand::Label(a)) => topics::label(&mut run, a)?,
        Command::Topics(TopicsCommand::Assign(a)) => topics::assign(&mut run, a)?,
        Command::Topics(TopicsCommand::Eval(a)) => topics::eval(&mut run, a)?,
        Command::Topics(TopicsCommand::Tiestrength(a)) => topics::tie_strength(&mut run, a)?,
        Command::Fit(a) => fit::fit(&mut run, a)?,
        Command::Report(a) => report::report(&mut run, a)?,
    }
    run.finish()
}

/// Bookkeeping for one invocation, turned into the manifest at the end.
pub(crate) struct Run {
    started: Instant,
    command: String,
    params: Params,
    log_level: String,
    inputs: BTreeMap<String, PathBuf>,
    outputs: BTreeMap<String, PathBuf>,
    counts: BTreeMap<String, u64>,
    notes: BTreeMap<String, String>,
}

impl Run {
    fn new(params: Params, log_level: String) -> Run {
        Run {
            started: Instant::now(),
            command: String::new(),
            params,
            log_level,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            counts: BTreeMap::new(),
            notes: BTreeMap::new(),
        }
    }

    pub(crate) fn command(&mut self, name: &str) {
        self.command = name.to_string();
        log::info!("running {name}");
    }

    pub(crate) fn params(&self) -> &Params {
        &self.params
    }

    pub(crate) fn params_mut(&mut self) -> &mut Params {
        &mut self.params
    }

    pub(crate) fn input(&mut self, role: &str, path: &Path) {
        self.inputs.insert(role.to_string(), path.to_path_buf());
    }

    pub(crate) fn output(&mut self, role: &str, path: &Path) {
        self.outputs.insert(role.to_string(), path.to_path_buf());
    }

    pub(crate) fn count(&mut self, key: &str, value: u64) {
        self.counts.insert(key.to_string(), value);
    }

    pub(crate) fn note(&mut self, key: &str, value: &str) {
        self.notes.insert(key.to_string(), value.to_string());
    }

    fn finish(self) -> anyhow::Result<()> {
        let mut input_digests = BTreeMap::new();
        for (role, path) in &self.inputs {
            input_digests.insert(role.clone(), config::sha256_file(path)?);
        }
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: RunConfig {
                command: self.command,
                inputs: self.inputs,
                outputs: self.outputs.clone(),
                params: self.params,
                log_level: self.log_level,
            },
            input_digests,
            wall_time_secs: self.started.elapsed().as_secs_f64(),
            peak_memory_kib: config::peak_memory_kib(),
            record_counts: self.counts,
            notes: self.notes,
        };
        for path in self.outputs.values() {
            table::write_json(&manifest_path(path), &manifest)?;
        }
        log::info!("done in {:.3}s", manifest.wall_time_secs);
        Ok(())
    }
}
