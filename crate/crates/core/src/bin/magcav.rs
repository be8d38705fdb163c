use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use magcav::cavity::{CavityMode, ScanParameter, DEFAULT_RESOLUTION};
use magcav::commands::{self, CavityOptions, CliError, FitKind, ScanRequest};
use magcav::config::RunConfig;
use magcav::estimators::FitReport;

#[derive(Parser)]
#[command(
    name = "magcav",
    version,
    about = "Photon-magnon cavity modeling and spectroscopy"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cavity mode frequencies, filling and geometric factors.
    Cavity {
        config: PathBuf,
        /// Dimension to scan: gap (um), spacing or height (mm).
        #[arg(long, requires_all = ["from", "to"])]
        scan: Option<String>,
        #[arg(long)]
        from: Option<f64>,
        #[arg(long)]
        to: Option<f64>,
        #[arg(long, default_value_t = 15)]
        steps: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write the midplane field map of the given mode (dark or bright).
        #[arg(long, num_args = 2, value_names = ["MODE", "PATH"])]
        field_map: Option<Vec<String>>,
        #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
        resolution: usize,
    },
    /// Walker mode chart fitted to observed crossings.
    Walker {
        config: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Transmission map of the configured model.
    Spectrum {
        config: PathBuf,
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        pgm: Option<PathBuf>,
    },
    /// Fit an avoided crossing to a transmission map CSV.
    Fit {
        map: PathBuf,
        #[arg(long, default_value = "two-mode")]
        model: String,
        /// Peak prominence threshold relative to the map maximum
        /// (default 0.25 for two-mode, 0.02 for three-mode).
        #[arg(long)]
        prominence: Option<f64>,
        /// Also write the report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Figures of merit from measured (or fitted) couplings.
    Report {
        config: PathBuf,
        #[arg(long)]
        fit: Option<PathBuf>,
    },
    /// Optimized-cavity prediction.
    Predict {
        config: PathBuf,
        /// Write the predicted map to PREFIX.csv and PREFIX.pgm.
        #[arg(long)]
        map: Option<PathBuf>,
    },
}

fn load(path: &Path) -> Result<RunConfig, CliError> {
    Ok(RunConfig::load(path)?)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Cavity {
            config,
            scan,
            from,
            to,
            steps,
            csv,
            field_map,
            resolution,
        } => {
            let cfg = load(&config)?;
            let scan = match scan {
                Some(p) => Some(ScanRequest {
                    parameter: p.parse::<ScanParameter>()?,
                    from: from.unwrap_or_default(),
                    to: to.unwrap_or_default(),
                    steps,
                }),
                None => None,
            };
            let field_map = match field_map.as_deref() {
                Some([mode, path]) => {
                    let mode = match mode.as_str() {
                        "dark" => CavityMode::Dark,
                        "bright" => CavityMode::Bright,
                        other => {
                            return Err(CliError::Config(format!("unknown cavity mode '{other}'")))
                        }
                    };
                    Some((mode, PathBuf::from(path)))
                }
                _ => None,
            };
            let options = CavityOptions {
                scan,
                csv,
                field_map,
                resolution,
            };
            commands::cmd_cavity(&cfg, &options, &mut out)
        }
        Command::Walker { config, csv } => {
            commands::cmd_walker(&load(&config)?, csv.as_deref(), &mut out)
        }
        Command::Spectrum { config, csv, pgm } => {
            commands::cmd_spectrum(&load(&config)?, &csv, pgm.as_deref(), &mut out).map(|_| ())
        }
        Command::Fit {
            map,
            model,
            prominence,
            out: report_path,
        } => {
            let kind: FitKind = model.parse()?;
            let mut ridge = kind.default_ridge();
            if let Some(p) = prominence {
                ridge.relative_prominence = p;
            }
            let result = commands::cmd_fit(&map, kind, &ridge, &mut out);
            if let (Ok(report), Some(path)) = (&result, report_path) {
                std::fs::write(&path, report.to_string())
                    .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            }
            result.map(|_| ())
        }
        Command::Report { config, fit } => {
            let cfg = load(&config)?;
            let fit = match fit {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                    Some(FitReport::parse(&text, &path)?)
                }
                None => None,
            };
            commands::cmd_report(&cfg, fit.as_ref(), &mut out)
        }
        Command::Predict { config, map } => {
            commands::cmd_predict(&load(&config)?, map.as_deref(), &mut out)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("magcav: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
