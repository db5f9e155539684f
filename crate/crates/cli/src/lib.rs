//! Command-line front end: single runs, parameter sweeps and the heap model.

pub mod config;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use dsme_lora::report::{cdf_csv, summary_csv_row, summary_json, trace_csv, SUMMARY_CSV_HEADER};
use dsme_lora::{heap_usage, Error, RunOutput};
use thiserror::Error;

pub use config::{ConfigError, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "dsme-lora", version, about = "DSME over LoRa network simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario and write trace, summary and TTC CDF.
    Run(RunArgs),
    /// Run one scenario per value of a numeric key.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Key to vary: sensors, tx_interval_mean_s or seed.
        #[arg(long)]
        axis: String,
        /// Comma-separated values, or an inclusive integer range `a..b`.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
    },
    /// Heap needed for GTS slots, neighbour entries and queued frames.
    Heap {
        #[arg(allow_hyphen_values = true)]
        n_gts: String,
        #[arg(allow_hyphen_values = true)]
        n_neighbours: String,
        /// Frame sizes in bytes; `SIZExCOUNT` repeats a size.
        #[arg(allow_hyphen_values = true)]
        frames: Vec<String>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override a configuration key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Infeasible(Error),
    #[error("{0}")]
    Simulation(Error),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Infeasible(_) => 2,
            _ => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::CapacityExceeded { .. } | Error::SlotTooShort { .. } => CliError::Infeasible(e),
            other => CliError::Simulation(other),
        }
    }
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn load(args: &RunArgs) -> Result<RunConfig, CliError> {
    let overrides = args.overrides.iter().map(|s| config::parse_override(s)).collect::<Result<Vec<_>, _>>()?;
    Ok(RunConfig::load(args.config.as_deref(), &overrides)?)
}

fn simulate(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    Ok(dsme_lora::run(&cfg.scenario, &cfg.mac, &cfg.phy, &cfg.csma)?)
}

fn write_outputs(cfg: &RunConfig, out: &RunOutput, dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    write(&dir.join(&cfg.trace_file), &trace_csv(&out.records))?;
    write(&dir.join(&cfg.summary_file), &summary_json(&out.summary))?;
    write(&dir.join(&cfg.cdf_file), &cdf_csv(&out.records, cfg.scenario.warmup))?;
    Ok(())
}

pub fn cmd_run(args: &RunArgs) -> Result<RunOutput, CliError> {
    let cfg = load(args)?;
    let out = simulate(&cfg)?;
    write_outputs(&cfg, &out, &args.out)?;
    Ok(out)
}

pub const SWEEP_AXES: [&str; 3] = ["sensors", "tx_interval_mean_s", "seed"];

/// Expands `5,10,15` or `1..10` into individual values.
pub fn parse_values(list: &str) -> Result<Vec<String>, CliError> {
    let list = list.trim();
    if let Some((a, b)) = list.split_once("..") {
        let parse = |s: &str| s.trim().parse::<u64>().map_err(|_| CliError::Usage(format!("bad range `{list}`")));
        let (a, b) = (parse(a)?, parse(b)?);
        if a > b {
            return Err(CliError::Usage(format!("empty range `{list}`")));
        }
        return Ok((a..=b).map(|v| v.to_string()).collect());
    }
    let vals: Vec<String> = list.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect();
    if vals.is_empty() {
        return Err(CliError::Usage("sweep needs at least one value".into()));
    }
    Ok(vals)
}

/// Runs every value in parallel and writes `<out>/<axis>=<value>/` plus
/// `<out>/aggregate.csv`. Returns the aggregate rows in value order.
pub fn cmd_sweep(args: &RunArgs, axis: &str, values: &str) -> Result<Vec<String>, CliError> {
    if !SWEEP_AXES.contains(&axis) {
        return Err(CliError::Usage(format!("cannot sweep `{axis}`; expected one of {}", SWEEP_AXES.join(", "))));
    }
    let values = parse_values(values)?;
    let configs = values
        .iter()
        .map(|v| {
            let mut a = args.clone();
            a.overrides.push(format!("{axis}={v}"));
            load(&a)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let results: Vec<Result<RunOutput, CliError>> = std::thread::scope(|s| {
        let handles: Vec<_> = configs.iter().map(|c| s.spawn(move || simulate(c))).collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });

    let mut rows = Vec::with_capacity(values.len());
    for ((v, cfg), res) in values.iter().zip(&configs).zip(results) {
        let out = res?;
        write_outputs(cfg, &out, &args.out.join(format!("{axis}={v}")))?;
        rows.push(format!("{v},{}", summary_csv_row(&out.summary)));
    }
    let mut csv = format!("{axis},{SUMMARY_CSV_HEADER}\n");
    for r in &rows {
        csv.push_str(r);
        csv.push('\n');
    }
    write(&args.out.join("aggregate.csv"), &csv)?;
    Ok(rows)
}

fn count(what: &str, s: &str) -> Result<u64, CliError> {
    if s.trim_start().starts_with('-') {
        return Err(CliError::Usage(format!("{what} must be non-negative, got `{s}`")));
    }
    s.parse().map_err(|_| CliError::Usage(format!("{what} must be a non-negative integer, got `{s}`")))
}

pub fn cmd_heap(n_gts: &str, n_neighbours: &str, frames: &[String]) -> Result<String, CliError> {
    let g = count("n_gts", n_gts)?;
    let n = count("n_neighbours", n_neighbours)?;
    let mut sizes = Vec::new();
    for f in frames {
        match f.split_once(['x', 'X']) {
            Some((size, times)) => {
                let size = count("frame size", size)?;
                sizes.extend(std::iter::repeat_n(size, count("frame count", times)? as usize));
            }
            None => sizes.push(count("frame size", f)?),
        }
    }
    let h = heap_usage(g, n, &sizes);
    Ok(format!("slots={} packets={} total={}", h.slots, h.packets, h.total()))
}

/// Runs a parsed command, printing results to stdout.
pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => {
            let out = cmd_run(&args)?;
            print!("{}", summary_json(&out.summary));
        }
        Command::Sweep { run, axis, values } => {
            for row in cmd_sweep(&run, &axis, &values)? {
                println!("{row}");
            }
        }
        Command::Heap { n_gts, n_neighbours, frames } => println!("{}", cmd_heap(&n_gts, &n_neighbours, &frames)?),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heap_examples() {
        assert_eq!(cmd_heap("6", "3", &["25x5".into()]).unwrap(), "slots=636 packets=585 total=1221");
        assert_eq!(cmd_heap("0", "0", &[]).unwrap(), "slots=0 packets=0 total=0");
        assert!(cmd_heap("1", "1", &[]).unwrap().ends_with("total=168"));
        assert_eq!(cmd_heap("0", "0", &["25".into(), "10x2".into()]).unwrap(), "slots=0 packets=321 total=321");
        assert!(cmd_heap("-1", "3", &[]).is_err());
        assert!(cmd_heap("1", "3", &["25x-2".into()]).is_err());
    }

    #[test]
    fn sweep_values() {
        assert_eq!(parse_values("5,10,15").unwrap(), vec!["5", "10", "15"]);
        assert_eq!(parse_values("1..3").unwrap(), vec!["1", "2", "3"]);
        assert_eq!(parse_values("1..10").unwrap().len(), 10);
        assert!(parse_values("").is_err());
        assert!(parse_values(" , ").is_err());
        assert!(parse_values("3..1").is_err());
    }

    #[test]
    fn infeasible_scenarios_exit_2() {
        let e: CliError = Error::CapacityExceeded { required: 114, capacity: 112 }.into();
        assert_eq!(e.exit_code(), 2);
        assert_eq!(e.to_string(), "CapacityExceeded: 114 > 112");
        assert_eq!(CliError::from(Error::EmptyScenario).exit_code(), 1);
        assert_eq!(CliError::from(ConfigError::UnknownKey("x".into())).exit_code(), 1);
    }
}
