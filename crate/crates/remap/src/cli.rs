//! `remap ingest|validate|serve|query|synth`.
//!
//! Exit codes: 0 on success, 1 on user error (bad flags, bad query
//! parameters), 2 on data error (malformed input, unreadable snapshot).

use std::ffi::OsString;
use std::io::Write;
use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use remap_core::datastore::{build_snapshot, export_csv, index_files_in, load_snapshot, save_snapshot, IngestSources};
use remap_core::synth::SynthConfig;
use remap_core::{Error, Snapshot};

use crate::api::{self, Defaults};
use crate::service::{self, ServeError, ServiceConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USER: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "remap", version, about = "Wind and solar capacity-factor analytics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Inputs {
    /// Hourly wind capacity factors, `timestamp,<country>...`.
    #[arg(long)]
    wind: PathBuf,
    /// Hourly solar capacity factors, same layout as the wind file.
    #[arg(long)]
    solar: Option<PathBuf>,
    /// Directory of climate-index CSVs, one index per file.
    #[arg(long)]
    indices: Option<PathBuf>,
    /// Daily prices, `date,country,price_eur_mwh`.
    #[arg(long)]
    prices: Option<PathBuf>,
}

impl Inputs {
    fn sources(&self) -> Result<IngestSources, Error> {
        Ok(IngestSources {
            wind: self.wind.clone(),
            solar: self.solar.clone(),
            indices: match &self.indices {
                Some(dir) => index_files_in(dir)?,
                None => Vec::new(),
            },
            prices: self.prices.clone(),
        })
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ingest CSV files into a snapshot file.
    Ingest {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check CSV inputs, or an existing snapshot, and print a summary.
    Validate {
        #[arg(long)]
        wind: Option<PathBuf>,
        #[arg(long, requires = "wind")]
        solar: Option<PathBuf>,
        #[arg(long, requires = "wind")]
        indices: Option<PathBuf>,
        #[arg(long, requires = "wind")]
        prices: Option<PathBuf>,
        #[arg(long, env = "REMAP_SNAPSHOT")]
        snapshot: Option<PathBuf>,
    },
    /// Serve the HTTP/JSON API (and the UI bundle, if given).
    Serve {
        #[arg(long, env = "REMAP_SNAPSHOT")]
        snapshot: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        listen: SocketAddr,
        /// Directory with the built UI.
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
        #[arg(long, default_value_t = remap_core::lwp::DEFAULT_THRESHOLD)]
        threshold: f64,
        #[arg(long, default_value_t = remap_core::lwp::DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long, default_value = "*")]
        cors_origin: String,
    },
    /// Run one API request offline and print the JSON response.
    Query {
        /// Request path, e.g. "/api/v1/meta".
        path: String,
        #[arg(long, env = "REMAP_SNAPSHOT")]
        snapshot: PathBuf,
    },
    /// Write deterministic synthetic CSV inputs (and optionally a snapshot).
    Synth {
        #[arg(long)]
        out_dir: PathBuf,
        /// 28 countries over 1979-2019 instead of the 3-country, 2-year fixture.
        #[arg(long)]
        full_scale: bool,
        #[arg(long)]
        seed: Option<u64>,
        /// Also ingest the written files into this snapshot file.
        #[arg(long)]
        snapshot: Option<PathBuf>,
    },
}

/// Where command output goes. `tty` adds a trailing newline after query output.
pub struct Console<'a> {
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
    pub tty: bool,
}

enum Failure {
    User(String),
    Data(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = format!("{}: {e}", e.code());
        if e.is_data_error() {
            Failure::Data(msg)
        } else {
            Failure::User(msg)
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, console: &mut Console<'_>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USER } else { EXIT_OK };
            let rendered = e.render().to_string();
            let sink = if e.use_stderr() { &mut *console.err } else { &mut *console.out };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    match execute(cli.command, console) {
        Ok(code) => code,
        Err(Failure::User(msg)) => {
            let _ = writeln!(console.err, "error: {msg}");
            EXIT_USER
        }
        Err(Failure::Data(msg)) => {
            let _ = writeln!(console.err, "error: {msg}");
            EXIT_DATA
        }
    }
}

fn execute(command: Command, console: &mut Console<'_>) -> Result<i32, Failure> {
    match command {
        Command::Ingest { inputs, out } => {
            let snapshot: Snapshot = build_snapshot(&inputs.sources()?)?;
            save_snapshot(&snapshot, &out)?;
            writeln!(console.err, "wrote {}", out.display())?;
            report(&snapshot, console.out)?;
            Ok(EXIT_OK)
        }
        Command::Validate {
            wind,
            solar,
            indices,
            prices,
            snapshot,
        } => {
            let snapshot: Snapshot = match (wind, snapshot) {
                (Some(wind), _) => build_snapshot(
                    &Inputs {
                        wind,
                        solar,
                        indices,
                        prices,
                    }
                    .sources()?,
                )?,
                (None, Some(path)) => load_snapshot(&path)?,
                (None, None) => {
                    return Err(Failure::User(
                        "nothing to validate: pass --wind (with optional inputs) or --snapshot".into(),
                    ))
                }
            };
            report(&snapshot, console.out)?;
            Ok(EXIT_OK)
        }
        Command::Serve {
            snapshot,
            listen,
            static_dir,
            threshold,
            alpha,
            cors_origin,
        } => {
            let config = ServiceConfig {
                listen,
                snapshot,
                defaults: Defaults { threshold, alpha },
                static_dir,
                cors_origin,
            };
            let runtime = tokio::runtime::Runtime::new()?;
            match runtime.block_on(service::serve(config)) {
                Ok(()) => Ok(EXIT_OK),
                Err(ServeError::Snapshot(e)) => Err(e.into()),
                Err(ServeError::Io(e)) => Err(e.into()),
                Err(e) => Err(Failure::User(e.to_string())),
            }
        }
        Command::Query { path, snapshot } => {
            let snapshot: Snapshot = load_snapshot(&snapshot)?;
            let response = api::dispatch(&snapshot, &Defaults::default(), "GET", &path);
            console.out.write_all(response.body.as_bytes())?;
            if console.tty {
                console.out.write_all(b"\n")?;
            }
            match response.status {
                200 => Ok(EXIT_OK),
                status => {
                    writeln!(console.err, "error: request failed with HTTP status {status}")?;
                    Ok(if status >= 500 { EXIT_DATA } else { EXIT_USER })
                }
            }
        }
        Command::Synth {
            out_dir,
            full_scale,
            seed,
            snapshot,
        } => {
            let mut config = if full_scale {
                SynthConfig::full_scale()
            } else {
                SynthConfig::fixture()
            };
            if let Some(seed) = seed {
                config = config.with_seed(seed);
            }
            let sources = export_csv(&config.build::<f64>(), &out_dir)?;
            writeln!(console.err, "wrote CSV inputs to {}", out_dir.display())?;
            if let Some(path) = snapshot {
                let built: Snapshot = build_snapshot(&sources)?;
                save_snapshot(&built, &path)?;
                writeln!(console.err, "wrote {}", path.display())?;
            }
            Ok(EXIT_OK)
        }
    }
}

fn join<'a>(items: impl Iterator<Item = String> + 'a) -> String {
    let v: Vec<String> = items.collect();
    if v.is_empty() {
        "none".into()
    } else {
        v.join(", ")
    }
}

fn report(s: &Snapshot, out: &mut dyn Write) -> std::io::Result<()> {
    let cal = s.calendar();
    writeln!(out, "countries: {} ({})", s.country_count(), join(s.countries().map(|c| c.to_string())))?;
    writeln!(
        out,
        "span: {} .. {} ({} days, {} hours)",
        cal.first_day(),
        cal.last_day(),
        cal.day_count(),
        cal.len()
    )?;
    writeln!(out, "solar: {}", join(s.solar().keys().map(|c| c.to_string())))?;
    writeln!(
        out,
        "indices: {}",
        join(s.indices().values().map(|i| format!("{} ({}, {} points)", i.name, i.cadence.as_str(), i.values.len())))
    )?;
    writeln!(out, "prices: {}", join(s.prices().keys().map(|c| c.to_string())))?;
    for source in &s.provenance().sources {
        writeln!(out, "source: {} sha256={}", source.path, source.sha256)?;
    }
    Ok(())
}

