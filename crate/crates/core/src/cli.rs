//! Command-line front end.
//!
//! Options may also come from a key-value file given with `--config`; its
//! keys are flag names without the leading dashes. Flags on the command line
//! take precedence over the file.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::algorithms::{GroverSpec, ShorSpec};
use crate::channels::PauliError;
use crate::error::{Error, Result};
use crate::harness::{
    cue_baseline, default_grover_realizations, default_shor_realizations, format_real, render,
    run_experiment, with_threads, Algorithm, ErrorFamily, ExperimentSpec, Grid, OutputFormat,
    ResultRow, SubsetPolicy,
};
use crate::verify::{run_all, DEFAULT_SEED};

#[derive(Debug, Parser)]
#[command(
    name = "qinterference",
    version,
    about = "Interference and success probability of Grover and Shor under errors"
)]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Every Hadamard at angle theta.
    GroverSystematic(RunArgs),
    /// Hadamard angles drawn around pi/4 with width epsilon.
    GroverRandom(RunArgs),
    /// Bit or phase flips after the initial Hadamard layer.
    GroverDecoherence(RunArgs),
    /// Order finding with every Hadamard at angle theta.
    ShorSystematic(RunArgs),
    /// Order finding with random Hadamard angles and QFT phase offsets.
    ShorRandom(RunArgs),
    /// Order finding with bit or phase flips on the first register.
    ShorDecoherence(RunArgs),
    /// Interference statistics of Haar-random unitaries.
    CueBaseline(RunArgs),
    /// Run the built-in acceptance checks.
    Verify(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Key-value file with default option values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Grover register size (cue-baseline: qubit count).
    #[arg(long)]
    pub n: Option<usize>,
    /// Shor parameter L; must match R when given.
    #[arg(long = "L")]
    pub l: Option<usize>,
    /// Shor modulus.
    #[arg(long = "R")]
    pub r: Option<u64>,
    /// Shor base.
    #[arg(long)]
    pub a: Option<u64>,
    /// Marked item, or `all` to average over every item.
    #[arg(long)]
    pub alpha: Option<String>,
    /// Sweep grid as start:stop:points; `pi` expressions are accepted.
    #[arg(long)]
    pub grid: Option<String>,
    /// Realizations per grid point (cue-baseline: sample count).
    #[arg(long)]
    pub realizations: Option<usize>,
    /// bitflip or phaseflip.
    #[arg(long = "error-kind")]
    pub error_kind: Option<String>,
    /// Faulty-qubit count: a number, a range like 1..4, or `all`.
    #[arg(long)]
    pub nf: Option<String>,
    /// `all` qubit subsets or the `prefix` of the register.
    #[arg(long = "subset-policy")]
    pub subset_policy: Option<String>,
    /// Master seed for every random draw.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    pub format: Option<String>,
    /// pa, au or both.
    #[arg(long)]
    pub measure: Option<String>,
    /// Worker threads.
    #[arg(long)]
    pub parallel: Option<usize>,
}

/// Reads `--config` from the raw arguments and splices the file's options
/// in right after the subcommand, so later command-line flags override them.
fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut path = None;
    for (i, a) in args.iter().enumerate() {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = args.get(i + 1).map(PathBuf::from);
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    let extra = config_flags(&path)?;
    let sub = args
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-'))
        .map(|p| p + 2)
        .unwrap_or(args.len());
    let mut out: Vec<OsString> = args[..sub].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[sub..]);
    Ok(out)
}

fn config_flags(path: &Path) -> Result<Vec<OsString>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e| Error::argument(format!("cannot parse config {}: {e}", path.display())))?;
    let mut flags = Vec::new();
    for (key, value) in table {
        let key = key.replace('_', "-");
        if key == "config" {
            return Err(Error::argument(
                "config files cannot include other config files",
            ));
        }
        let value = match value {
            toml::Value::String(s) => s,
            toml::Value::Integer(i) => i.to_string(),
            toml::Value::Float(f) => f.to_string(),
            toml::Value::Boolean(b) => b.to_string(),
            other => {
                return Err(Error::argument(format!(
                    "unsupported value for '{key}': {other}"
                )))
            }
        };
        flags.push(OsString::from(format!("--{key}")));
        flags.push(OsString::from(value));
    }
    Ok(flags)
}

fn parse_usize(s: &str, what: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::argument(format!("{what} '{s}' is not a non-negative integer")))
}

/// `3`, `1..4`, `1..=4`, `1-4` or `all` (every count from 1 to `max`).
pub fn parse_nf(s: &str, max: usize) -> Result<Vec<usize>> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("all") {
        return Ok((1..=max).collect());
    }
    let range = s
        .split_once("..=")
        .or_else(|| s.split_once(".."))
        .or_else(|| s.split_once('-'));
    match range {
        Some((a, b)) => {
            let (a, b) = (parse_usize(a, "n_f")?, parse_usize(b, "n_f")?);
            if a > b {
                return Err(Error::argument(format!("empty n_f range '{s}'")));
            }
            Ok((a..=b).collect())
        }
        None => Ok(vec![parse_usize(s, "n_f")?]),
    }
}

enum AlphaChoice {
    One(usize),
    All,
}

fn parse_alpha(s: Option<&str>) -> Result<AlphaChoice> {
    match s {
        None => Ok(AlphaChoice::One(0)),
        Some(s) if s.eq_ignore_ascii_case("all") => Ok(AlphaChoice::All),
        Some(s) => Ok(AlphaChoice::One(parse_usize(s, "alpha")?)),
    }
}

#[derive(Clone, Copy)]
enum Family {
    Systematic,
    Random,
    Decoherence,
}

fn grover_algorithm(args: &RunArgs) -> Result<(Algorithm, bool)> {
    let n = args.n.unwrap_or(4);
    let (alpha, all) = match parse_alpha(args.alpha.as_deref())? {
        AlphaChoice::One(a) => (a, false),
        AlphaChoice::All => (0, true),
    };
    Ok((Algorithm::Grover(GroverSpec::new(n, alpha)?), all))
}

fn shor_algorithm(args: &RunArgs) -> Result<Algorithm> {
    let r = args.r.unwrap_or(3);
    let a = args.a.unwrap_or(2);
    let spec = match args.l {
        Some(l) => ShorSpec::with_l(l, r, a)?,
        None => ShorSpec::new(r, a)?,
    };
    Ok(Algorithm::Shor(spec))
}

/// Builds the experiment described by the arguments of a sweep subcommand.
fn experiment(args: &RunArgs, shor: bool, family: Family) -> Result<ExperimentSpec> {
    let (algorithm, average_over_alpha) = if shor {
        (shor_algorithm(args)?, false)
    } else {
        grover_algorithm(args)?
    };
    let grid = |default: fn() -> Grid| -> Result<Grid> {
        args.grid
            .as_deref()
            .map(str::parse)
            .unwrap_or_else(|| Ok(default()))
    };
    let family = match family {
        Family::Systematic => ErrorFamily::Systematic {
            grid: grid(Grid::default_theta)?,
        },
        Family::Random => ErrorFamily::Random {
            grid: grid(Grid::default_epsilon)?,
            realizations: args.realizations.unwrap_or(match algorithm {
                Algorithm::Grover(g) => default_grover_realizations(g.n),
                Algorithm::Shor(s) => default_shor_realizations(s.l()),
            }),
        },
        Family::Decoherence => {
            let kind: PauliError = args
                .error_kind
                .as_deref()
                .ok_or_else(|| Error::argument("--error-kind is required (bitflip or phaseflip)"))?
                .parse()?;
            let nf = parse_nf(
                args.nf.as_deref().unwrap_or("all"),
                algorithm.layer_qubits(),
            )?;
            let subset_policy = match args.subset_policy.as_deref() {
                Some(s) => s.parse()?,
                None if shor => SubsetPolicy::All,
                None => SubsetPolicy::Prefix,
            };
            ErrorFamily::Decoherence {
                kind,
                grid: grid(Grid::default_probability)?,
                nf,
                subset_policy,
            }
        }
    };
    Ok(ExperimentSpec {
        algorithm,
        family,
        average_over_alpha,
        master_seed: args.seed.unwrap_or(DEFAULT_SEED),
        outputs: args
            .measure
            .as_deref()
            .map(str::parse)
            .transpose()?
            .unwrap_or_default(),
    })
}

fn emit(bytes: &[u8], out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| Error::io(path, e)),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

fn in_pool<T: Send>(args: &RunArgs, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match args.parallel {
        Some(t) => with_threads(t, f),
        None => f(),
    }
}

fn output_format(args: &RunArgs) -> Result<OutputFormat> {
    args.format
        .as_deref()
        .map(str::parse)
        .transpose()
        .map(Option::unwrap_or_default)
}

fn run_sweep(args: &RunArgs, shor: bool, family: Family) -> Result<i32> {
    let spec = experiment(args, shor, family)?;
    let format = output_format(args)?;
    let rows: Vec<ResultRow> = in_pool(args, || run_experiment(&spec))?;
    emit(&render(&rows, format)?, args.out.as_deref())?;
    Ok(0)
}

fn run_cue(args: &RunArgs) -> Result<i32> {
    let n = args.n.unwrap_or(6);
    let samples = args.realizations.unwrap_or(100);
    let seed = args.seed.unwrap_or(DEFAULT_SEED);
    let stats = in_pool(args, || cue_baseline(n, samples, seed))?;
    let bytes = match output_format(args)? {
        OutputFormat::Csv => format!(
            "n,samples,mean_interference,stddev,seed\n{},{},{},{},{}\n",
            stats.n,
            stats.samples,
            format_real(stats.mean),
            format_real(stats.stddev),
            seed
        )
        .into_bytes(),
        OutputFormat::Json => {
            let mut v = serde_json::to_vec_pretty(&serde_json::json!({
                "n": stats.n,
                "samples": stats.samples,
                "mean_interference": stats.mean,
                "stddev": stats.stddev,
                "seed": seed,
            }))
            .expect("JSON values always serialise");
            v.push(b'\n');
            v
        }
    };
    emit(&bytes, args.out.as_deref())?;
    Ok(0)
}

fn run_verify(args: &RunArgs) -> Result<i32> {
    let seed = args.seed.unwrap_or(DEFAULT_SEED);
    let reports = in_pool(args, || Ok(run_all(seed)))?;
    let mut text = String::new();
    for r in &reports {
        text.push_str(&format!("{r}\n"));
    }
    let passed = reports.iter().filter(|r| r.passed).count();
    text.push_str(&format!("{passed} of {} criteria passed\n", reports.len()));
    emit(text.as_bytes(), args.out.as_deref())?;
    Ok(if passed == reports.len() { 0 } else { 1 })
}

pub fn execute(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::GroverSystematic(a) => run_sweep(a, false, Family::Systematic),
        Command::GroverRandom(a) => run_sweep(a, false, Family::Random),
        Command::GroverDecoherence(a) => run_sweep(a, false, Family::Decoherence),
        Command::ShorSystematic(a) => run_sweep(a, true, Family::Systematic),
        Command::ShorRandom(a) => run_sweep(a, true, Family::Random),
        Command::ShorDecoherence(a) => run_sweep(a, true, Family::Decoherence),
        Command::CueBaseline(a) => run_cue(a),
        Command::Verify(a) => run_verify(a),
    }
}

/// Parses arguments (including any config file), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
