use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use signforecast::harness::{self, ExperimentConfig, SynthKind, SynthParams};
use signforecast::market_data::{parse_timestamp, write_quotes};
use signforecast::Error;

#[derive(Parser)]
#[command(version, about = "Intraday return sign forecasting experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train and evaluate every stock listed in the configured metadata.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (0 = all cores); does not change the output.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Write a synthetic quote series.
    Gen {
        #[arg(long, value_parser = ["sine", "ar1", "gaussian"])]
        kind: String,
        #[arg(long)]
        length: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// AR(1) coefficient of the log returns.
        #[arg(long, default_value_t = 0.3)]
        phi: f64,
        /// Innovation standard deviation of the log returns.
        #[arg(long, default_value_t = 0.001)]
        sigma: f64,
        #[arg(long, default_value_t = 100.0)]
        level: f64,
        #[arg(long, default_value_t = 5.0)]
        amplitude: f64,
        #[arg(long, default_value_t = 50.0)]
        period: f64,
        #[arg(long, default_value = "2015-09-16T14:00:00Z")]
        start: String,
        /// Seconds between quotes.
        #[arg(long, default_value_t = 60)]
        interval: i64,
    },
    /// Rebuild group tables and the scatter file from a run-level file.
    Report {
        #[arg(long = "from")]
        from: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run { config, seed, runs, out, threads } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.base_seed = s;
            }
            if let Some(r) = runs {
                cfg.runs = r;
            }
            if let Some(o) = out {
                cfg.out = o;
            }
            if let Some(t) = threads {
                cfg.threads = t;
            }
            let universe = harness::run_universe(&cfg)?;
            for path in harness::write_reports(&universe, &cfg.out)? {
                println!("{}", path.display());
            }
        }
        Command::Gen { kind, length, out, seed, phi, sigma, level, amplitude, period, start, interval } => {
            let kind: SynthKind = kind.parse()?;
            let start = parse_timestamp(&start)
                .ok_or_else(|| Error::Config(format!("invalid start timestamp {start:?}")))?;
            if interval <= 0 {
                return Err(Error::Config("interval must be positive".into()));
            }
            let params = SynthParams {
                seed,
                level,
                amplitude,
                period,
                phi,
                sigma,
                start,
                interval: chrono::Duration::seconds(interval),
            };
            let ticker = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let series = harness::generate(kind, length, &ticker, &params)?;
            let file = File::create(&out).map_err(|e| Error::Io {
                context: format!("creating {}", out.display()),
                source: e,
            })?;
            write_quotes(&series, BufWriter::new(file)).map_err(|e| Error::Io {
                context: format!("writing {}", out.display()),
                source: e,
            })?;
        }
        Command::Report { from, out } => {
            let universe = harness::read_runs(&from)?;
            for path in harness::write_group_tables(&universe, &out)? {
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
