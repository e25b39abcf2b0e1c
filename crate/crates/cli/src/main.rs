use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use varcontrib::config::{parse_config_file, EstimatorConfig};
use varcontrib::error::CliError;
use varcontrib::experiment::{validate, Session};
use varcontrib::{compare, export, report};

#[derive(Parser)]
#[command(name = "varcontrib", version, about = "Estimate VaR contributions by MCMC and sample-based baselines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportWhat {
    Chain,
    Mcwindow,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its report.
    Estimate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        /// JSON report path; without it the report goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the experiment under several seeds and aggregate bias, RMSE and coverage.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        seeds: Vec<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Report the CLT sufficient conditions for the configured model and proposals.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Export a subsampled chain or the MC window as CSV.
    Export {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        what: ExportWhat,
        #[arg(long, default_value_t = 1)]
        every_k: usize,
        /// Which MCMC estimator of the config to export (0-based among MCMC entries).
        #[arg(long, default_value_t = 0)]
        chain_index: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Estimate { config, seed, out } => {
            let mut cfg = parse_config_file(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let rep = varcontrib::run_experiment(&cfg)?;
            let json = report::to_json(&rep);
            match out.as_ref().or(cfg.outputs.report.as_ref()) {
                Some(path) => {
                    write_file(path, &json)?;
                    print!("{}", report::to_table(&rep));
                }
                None => print!("{json}"),
            }
            if let Some(path) = &cfg.outputs.table {
                write_file(path, &report::to_csv(&rep))?;
            }
        }
        Command::Compare { config, seeds, out, csv } => {
            let cfg = parse_config_file(&config)?;
            let (cmp, _) = compare::compare_seeds(&cfg, &seeds)?;
            if let Some(path) = out {
                write_file(&path, &report::to_json(&cmp))?;
            }
            if let Some(path) = csv {
                write_file(&path, &compare::to_csv(&cmp))?;
            }
            print!("{}", compare::to_table(&cmp));
        }
        Command::Validate { config } => {
            let cfg = parse_config_file(&config)?;
            print!("{}", report::to_json(&validate(&cfg)?));
        }
        Command::Export { config, what, every_k, chain_index, out } => {
            if every_k < 1 {
                return Err(CliError::Usage("--every-k must be at least 1".into()));
            }
            let cfg = parse_config_file(&config)?;
            let session = Session::new(&cfg)?;
            let file = File::create(&out).map_err(|e| CliError::Io(format!("cannot create {}: {e}", out.display())))?;
            let mut w = BufWriter::new(file);
            let rows = match what {
                ExportWhat::Chain => {
                    let est = cfg
                        .estimators
                        .iter()
                        .filter(|e| matches!(e, EstimatorConfig::Mcmc { .. }))
                        .nth(chain_index)
                        .ok_or_else(|| CliError::Usage(format!("config has no MCMC estimator #{chain_index}")))?;
                    export::export_chain_data(&session.chain(est)?, every_k, &mut w)?
                }
                ExportWhat::Mcwindow => {
                    let m = cfg
                        .estimators
                        .iter()
                        .find_map(|e| match e {
                            EstimatorConfig::Mc { target_m } => *target_m,
                            _ => None,
                        })
                        .unwrap_or(cfg.mc_window_m);
                    let delta = session.mc_delta(m)?;
                    export::export_mc_window(session.batch(), session.v(), delta, &mut w)?
                }
            };
            w.flush()?;
            eprintln!("wrote {rows} rows to {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let err = CliError::Usage(e.render().to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
