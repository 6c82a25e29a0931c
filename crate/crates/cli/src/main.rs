//! `grasp`: synthetic catalogs, scene ingest, batch analyses and the tile server.

mod commands;

use std::fmt;
use std::num::NonZeroUsize;
use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Parser, Subcommand};
use grasp_core::container::ContainerError;
use grasp_core::synth::SynthError;
use grasp_core::{CatalogError, EngineError, RasterError, Sensor};

#[derive(Debug, Parser)]
#[command(name = "grasp", version, about = "Satellite change-detection toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic catalog with ground truth.
    Synth {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Add a GRSP scene to a catalog.
    Ingest {
        #[arg(long)]
        catalog: PathBuf,
        file: PathBuf,
        #[arg(long)]
        sensor: Sensor,
        /// UTC date (YYYY-MM-DD) or RFC 3339 timestamp.
        #[arg(long)]
        date: String,
        #[arg(long)]
        id: Option<String>,
    },
    /// Temporal median composite around a date.
    Composite {
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long)]
        sensor: Sensor,
        #[arg(long)]
        date: NaiveDate,
        /// Half-width of the window; defaults to the sensor's standard window.
        #[arg(long)]
        window_days: Option<u32>,
        #[arg(long)]
        out: PathBuf,
    },
    /// SAR change masks between two dates.
    Change {
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long)]
        date1: NaiveDate,
        #[arg(long)]
        date2: NaiveDate,
        #[arg(long)]
        calib: PathBuf,
        /// Writes `<P>_blue.grsp`, `<P>_red.grsp` and `<P>_thresholds.json`.
        #[arg(long)]
        out_prefix: PathBuf,
        #[arg(long)]
        window_days: Option<u32>,
    },
    /// Pumice-raft mask on the optical scene nearest a date.
    Pumice {
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long)]
        date: NaiveDate,
        #[arg(long)]
        calib: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        search_days: Option<u32>,
    },
    /// Per-scene zonal mean under a polygon, as CSV.
    Timeseries {
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long)]
        polygon: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "SAR")]
        sensor: Sensor,
        #[arg(long, default_value = "vv")]
        band: String,
        #[arg(long)]
        start: Option<NaiveDate>,
        #[arg(long)]
        end: Option<NaiveDate>,
    },
    /// Run the HTTP tile and analysis service.
    Serve {
        #[arg(long, env = "GRASP_CATALOG")]
        catalog: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value_t = NonZeroUsize::new(grasp_service::DEFAULT_CACHE_LAYERS).unwrap())]
        cache_layers: NonZeroUsize,
        #[arg(long, default_value = "127.0.0.1")]
        bind: std::net::IpAddr,
    },
}

/// A bad argument discovered after parsing, such as a missing input file.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Machine-readable code and exit status for an error chain.
fn classify(err: &anyhow::Error) -> (&'static str, u8) {
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some() {
            return ("UsageError", 2);
        }
        if let Some(e) = cause.downcast_ref::<EngineError>() {
            return (e.code(), 1);
        }
        if let Some(e) = cause.downcast_ref::<CatalogError>() {
            return (e.code(), 1);
        }
        if let Some(e) = cause.downcast_ref::<SynthError>() {
            return (e.code(), 1);
        }
        if let Some(e) = cause.downcast_ref::<ContainerError>() {
            return (e.code(), 1);
        }
        if let Some(e) = cause.downcast_ref::<RasterError>() {
            return (e.code(), 1);
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return ("IoFailure", 1);
        }
    }
    ("Error", 1)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let first = e.to_string().lines().next().unwrap_or_default().trim_start_matches("error: ").to_owned();
            eprintln!("ERROR UsageError: {first}");
            let _ = e.print();
            return ExitCode::from(2);
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (code, status) = classify(&e);
            eprintln!("ERROR {code}: {e:#}");
            ExitCode::from(status)
        }
    }
}
