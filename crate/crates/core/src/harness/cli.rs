//! Command-line front end: `simulate`, `bound`, `complexity` and `radius`.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::config::{load_config, parse_snr, split_list};
use super::{run_sweep_with_threads, write_records, HarnessError, OutputFormat, SweepConfig};
use crate::analysis::{radius_table, union_bound_ber, BoundSpec};
use crate::complexity::closed_form_table;
use crate::detectors::DetectorKind;
use crate::modem::Scheme;

#[derive(Debug, Parser)]
#[command(
    name = "smsd",
    version,
    about = "Sphere decoders for spatial-modulation MIMO: Monte Carlo BER, union bound, radius and complexity tables"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Monte Carlo BER and operation-count sweep
    Simulate(SimulateArgs),
    /// Union bound on SM bit error rate over i.i.d. Rayleigh fading
    Bound(BoundArgs),
    /// Closed-form operation counts over (m, Nt, Nr)
    Complexity(ComplexityArgs),
    /// Initial-radius constant alpha for a target miss probability
    Radius(RadiusArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Key-value config file; its keys mirror these flags (command-line flags win)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Transmission scheme: sm or smx [default: sm]
    #[arg(long)]
    scheme: Option<Scheme>,
    /// Transmit antennas [default: 4]
    #[arg(long)]
    nt: Option<usize>,
    /// Receive antennas [default: 4]
    #[arg(long)]
    nr: Option<usize>,
    /// Constellation order M (2, 4, ..., 256) [default: 16]
    #[arg(long = "mod")]
    mod_order: Option<usize>,
    /// SNR points in dB: list (`6 10 14`, `6,10,14`) or range `start:step:stop` [default: 0:2:30]
    #[arg(long, num_args = 1..)]
    snr: Option<Vec<String>>,
    /// Trials per batch and minimum trials per SNR point [default: 10000]
    #[arg(long)]
    trials: Option<u64>,
    /// Cap on trials per SNR point [default: 10 x trials]
    #[arg(long)]
    max_trials: Option<u64>,
    /// Detectors: sm-ml, sm-rx, sm-tx (SM) or smx-ml, smx-sd (SMX) [default: all for the scheme]
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    detectors: Option<Vec<DetectorKind>>,
    /// Master seed; also read from SMSD_SEED [default: 0]
    #[arg(long, env = "SMSD_SEED")]
    seed: Option<u64>,
    /// Bit errors to collect per point before stopping early [default: 200]
    #[arg(long)]
    min_errors: Option<u64>,
    /// Radius constant alpha (R^2 = alpha Nr sigma^2) [default: solved for a 1e-6 miss]
    #[arg(long)]
    alpha: Option<f64>,
    /// Output file [default: standard output]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format: csv or json [default: csv]
    #[arg(long)]
    format: Option<OutputFormat>,
    /// Worker threads [default: all cores]
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct BoundArgs {
    /// Transmit antennas
    #[arg(long, default_value_t = 4)]
    nt: usize,
    /// Receive antennas
    #[arg(long, default_value_t = 4)]
    nr: usize,
    /// Constellation order M
    #[arg(long = "mod", default_value_t = 16)]
    mod_order: usize,
    /// SNR points in dB (list or start:step:stop)
    #[arg(long, num_args = 1.., default_value = "0:2:30")]
    snr: Vec<String>,
    /// Output file [default: standard output]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format: csv or json
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
}

#[derive(Debug, Args)]
struct ComplexityArgs {
    /// Spectral efficiencies m
    #[arg(long, num_args = 1.., value_delimiter = ',', default_values_t = [6u32, 8])]
    m: Vec<u32>,
    /// Transmit antennas
    #[arg(long, num_args = 1.., value_delimiter = ',', default_values_t = [2usize, 4, 8, 16, 32])]
    nt: Vec<usize>,
    /// Receive antennas
    #[arg(long, num_args = 1.., value_delimiter = ',', default_values_t = [2usize, 4])]
    nr: Vec<usize>,
    /// Output format: csv or json
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
}

#[derive(Debug, Args)]
struct RadiusArgs {
    /// Receive antennas
    #[arg(long, num_args = 1.., value_delimiter = ',', default_values_t = [1usize, 2, 4])]
    nr: Vec<usize>,
    /// Target probability that the transmitted point lies outside the sphere
    #[arg(long, default_value_t = 1e-6)]
    target: f64,
}

fn cfg_value<T: std::str::FromStr>(
    cli: Option<T>,
    file: &std::collections::BTreeMap<String, String>,
    key: &str,
) -> Result<Option<T>, HarnessError>
where
    T::Err: std::fmt::Display,
{
    if cli.is_some() {
        return Ok(cli);
    }
    file.get(key)
        .map(|v| {
            v.parse::<T>()
                .map_err(|e| HarnessError::ConfigError(format!("config key `{key}`: {e}")))
        })
        .transpose()
}

struct Resolved {
    config: SweepConfig,
    out: Option<PathBuf>,
    format: OutputFormat,
    threads: Option<usize>,
}

fn resolve_simulate(args: SimulateArgs) -> Result<Resolved, HarnessError> {
    let file = match &args.config {
        Some(p) => load_config(p)?,
        None => Default::default(),
    };
    let scheme = cfg_value(args.scheme, &file, "scheme")?.unwrap_or(Scheme::Sm);
    let nt = cfg_value(args.nt, &file, "nt")?.unwrap_or(4);
    let nr = cfg_value(args.nr, &file, "nr")?.unwrap_or(4);
    let mod_order = cfg_value(args.mod_order, &file, "mod")?.unwrap_or(16);
    let detectors = match args.detectors {
        Some(d) => d,
        None => match file.get("detectors") {
            Some(v) => split_list(v)
                .map(|s| s.parse::<DetectorKind>().map_err(HarnessError::ConfigError))
                .collect::<Result<_, _>>()?,
            None => DetectorKind::ALL.into_iter().filter(|d| d.scheme() == scheme).collect(),
        },
    };
    let snr_db = match args.snr {
        Some(v) => parse_snr(&v.join(" "))?,
        None => match file.get("snr") {
            Some(v) => parse_snr(v)?,
            None => super::default_snr_grid(),
        },
    };
    let trials = cfg_value(args.trials, &file, "trials")?.unwrap_or(10_000);
    let max_trials = cfg_value(args.max_trials, &file, "max-trials")?.unwrap_or(trials.saturating_mul(10));
    let mut config = SweepConfig::new(scheme, nt, nr, mod_order, detectors);
    config.snr_db = snr_db;
    config.trials = trials;
    config.max_trials = max_trials;
    config.seed = cfg_value(args.seed, &file, "seed")?.unwrap_or(0);
    config.min_bit_errors = cfg_value(args.min_errors, &file, "min-errors")?.unwrap_or(super::DEFAULT_MIN_BIT_ERRORS);
    config.alpha = cfg_value(args.alpha, &file, "alpha")?;
    Ok(Resolved {
        config,
        out: cfg_value(args.out, &file, "out")?,
        format: cfg_value(args.format, &file, "format")?.unwrap_or(OutputFormat::Csv),
        threads: cfg_value(args.threads, &file, "threads")?,
    })
}

fn open_output(out: &Option<PathBuf>) -> Result<Box<dyn Write>, HarnessError> {
    Ok(match out {
        Some(p) if p.as_os_str() != "-" => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        _ => Box::new(std::io::stdout().lock()),
    })
}

fn simulate(args: SimulateArgs) -> Result<(), HarnessError> {
    let r = resolve_simulate(args)?;
    let threads = r.threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let records = run_sweep_with_threads(&r.config, threads)?;
    for rec in records.iter().filter(|rec| rec.is_censored(r.config.min_bit_errors)) {
        eprintln!(
            "warning: {} at {} dB censored: {} bit errors in {} trials (target {})",
            rec.detector, rec.snr_db, rec.bit_errors, rec.trials, r.config.min_bit_errors
        );
    }
    write_records(&records, r.format, r.config.min_bit_errors, open_output(&r.out)?)
}

fn bound(args: BoundArgs) -> Result<(), HarnessError> {
    let spec = BoundSpec {
        nt: args.nt,
        nr: args.nr,
        mod_order: args.mod_order,
        snr_db: parse_snr(&args.snr.join(" "))?,
    };
    let points = union_bound_ber(&spec)?;
    let mut w = open_output(&args.out)?;
    match args.format {
        OutputFormat::Csv => {
            writeln!(w, "snr_db,ber_bound")?;
            for p in &points {
                writeln!(w, "{},{:e}", p.snr_db, p.ber)?;
            }
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut w, &points)?;
            writeln!(w)?;
        }
    }
    Ok(())
}

fn complexity(args: ComplexityArgs) -> Result<(), HarnessError> {
    let rows = closed_form_table(&args.m, &args.nt, &args.nr);
    let mut w = std::io::stdout().lock();
    match args.format {
        OutputFormat::Csv => {
            writeln!(w, "m,nt,nr,sm_ml,smx_ml,ml_reduction_pct,rx_min,rx_max,tx_precomp")?;
            for r in &rows {
                writeln!(
                    w,
                    "{},{},{},{},{},{:.2}%,{},{},{}",
                    r.m, r.nt, r.nr, r.sm_ml, r.smx_ml, r.ml_reduction_pct, r.rx_min, r.rx_max, r.tx_precomp
                )?;
            }
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut w, &rows)?;
            writeln!(w)?;
        }
    }
    Ok(())
}

fn radius(args: RadiusArgs) -> Result<(), HarnessError> {
    let rows = radius_table(&args.nr, args.target)?;
    let mut w = std::io::stdout().lock();
    writeln!(w, "nr,alpha,miss_probability")?;
    for r in rows {
        writeln!(w, "{},{:.4},{:.3e}", r.nr, r.alpha, r.miss_probability)?;
    }
    Ok(())
}

/// Parses `argv` and runs the selected subcommand. Returns the process exit
/// code: 0 on success, 2 on usage errors, 1 on runtime failures.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Bound(a) => bound(a),
        Command::Complexity(a) => complexity(a),
        Command::Radius(a) => radius(a),
    };
    match result {
        Ok(()) => 0,
        Err(HarnessError::ConfigError(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_flag_is_a_usage_error() {
        assert_eq!(run(["smsd", "radius", "--bogus"]), 2);
        assert_eq!(run(["smsd"]), 2);
    }

    #[test]
    fn config_file_fills_missing_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "scheme = smx\nnt = 2\nnr = 2\nmod = 4\nsnr = 0:5:10\ntrials = 50\nseed = 9\n").unwrap();
        let cli = Cli::try_parse_from(["smsd", "simulate", "--config", path.to_str().unwrap(), "--nr", "3"]).unwrap();
        let Command::Simulate(args) = cli.command else { unreachable!() };
        let r = resolve_simulate(args).unwrap();
        assert_eq!(r.config.scheme, Scheme::Smx);
        assert_eq!(r.config.nr, 3);
        assert_eq!(r.config.snr_db, vec![0.0, 5.0, 10.0]);
        assert_eq!(r.config.detectors, vec![DetectorKind::SmxMl, DetectorKind::SmxSd]);
        assert_eq!(r.config.seed, 9);
        assert_eq!(r.config.max_trials, 500);
    }
}
