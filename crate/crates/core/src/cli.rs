//! `wwent` command line.
//!
//! Exit codes: 0 success, 1 invalid parameter or I/O failure, 2 usage error,
//! 3 when `verify` finds a failing identity.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::oracle::GridSpacing;
use crate::output;
use crate::parallel;
use crate::sweep::{parse_list, Axis, AxisRange, OutputFormat, SweepConfig, SweepPlan, SweepResult, Sweeper};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "WW_THREADS";

#[derive(Debug, Parser)]
#[command(name = "wwent", version, about = "Entanglement of a decaying two-level atom and its emitted photon")]
struct Cli {
    /// Flat `key = value` file supplying defaults for any flag below
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Entanglement vs band half-width, one curve per detuning
    SweepEpsilon {
        /// Detunings, comma separated [default: 0,2,4,8]
        #[arg(long, allow_hyphen_values = true)]
        delta: Option<String>,
        /// Half-width range min:max:steps [default: 0.01:10:1000]
        #[arg(long, allow_hyphen_values = true)]
        eps: Option<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Entanglement vs detuning, one curve per band half-width
    SweepDelta {
        /// Half-widths, comma separated [default: 0.2,0.5,5,9]
        #[arg(long, allow_hyphen_values = true)]
        eps: Option<String>,
        /// Detuning range min:max:steps [default: -10:10:1001]
        #[arg(long, allow_hyphen_values = true)]
        delta: Option<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Atom-field entanglement during decay
    SweepTime {
        /// Scaled time range min:max:steps [default: 0:5:500]
        #[arg(long, allow_hyphen_values = true)]
        range: Option<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Vacuum fidelity of the band over a half-width x detuning grid
    FidelityGrid {
        /// Half-width range [default: 0:10:101]
        #[arg(long, allow_hyphen_values = true)]
        eps: Option<String>,
        /// Detuning range [default: -10:10:201]
        #[arg(long, allow_hyphen_values = true)]
        delta: Option<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Closed-form band weights vs a discrete-mode sum
    OracleCheck {
        /// Number of modes [default: 200000]
        #[arg(long, allow_hyphen_values = true)]
        modes: Option<String>,
        /// Half-width of the mode window in units of the decay rate [default: 1000]
        #[arg(long, allow_hyphen_values = true)]
        span: Option<String>,
        /// graded or uniform [default: graded]
        #[arg(long)]
        spacing: Option<String>,
        /// Half-widths: range or list [default: 0.05:10:5]
        #[arg(long, allow_hyphen_values = true)]
        eps: Option<String>,
        /// Detunings: range or list [default: -10:10:5]
        #[arg(long, allow_hyphen_values = true)]
        delta: Option<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Check quadrature identities and the rank-two spectrum; nonzero exit on failure
    Verify {
        /// Absolute quadrature tolerance [default: 1e-8]
        #[arg(long, allow_hyphen_values = true)]
        tol: Option<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output file; standard output when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json [default: from the file extension, else csv]
    #[arg(long)]
    format: Option<String>,
    /// Record the generation time in the metadata (output is then no longer reproducible)
    #[arg(long)]
    timestamp: bool,
}

/// Flag values with config-file fallback and built-in defaults.
struct Settings {
    file: BTreeMap<String, String>,
}

const CONFIG_KEYS: &[&str] =
    &["delta", "eps", "range", "modes", "span", "spacing", "tol", "out", "format", "timestamp"];

impl Settings {
    fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self { file: BTreeMap::new() });
        };
        let text = std::fs::read_to_string(path)?;
        Ok(Self { file: parse_config(&text)? })
    }

    fn get(&self, flag: Option<&String>, key: &str, default: &str) -> String {
        flag.cloned()
            .or_else(|| self.file.get(key).cloned())
            .unwrap_or_else(|| default.to_owned())
    }
}

/// Parse `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("config line {}: expected key = value", n + 1)))?;
        let key = k.trim().replace('_', "-");
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!("config line {}: unknown key '{}'", n + 1, k.trim())));
        }
        map.insert(key, v.trim().to_owned());
    }
    Ok(map)
}

fn parse_range(param: &str, s: &str) -> Result<AxisRange> {
    s.parse().map_err(|e| Error::Config(format!("--{param}: {e}")))
}

fn parse_values(param: &str, s: &str) -> Result<Vec<f64>> {
    parse_list(s).map_err(|e| Error::Config(format!("--{param}: {e}")))
}

fn parse_axis(param: &str, s: &str) -> Result<Axis> {
    s.parse().map_err(|e| Error::Config(format!("--{param}: {e}")))
}

fn parse_number<T: std::str::FromStr>(param: &str, s: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Config(format!("--{param}: '{s}' is not a valid value")))
}

fn parse_spacing(s: &str) -> Result<GridSpacing> {
    match s.trim() {
        "graded" => Ok(GridSpacing::default()),
        "uniform" => Ok(GridSpacing::Uniform),
        other => Err(Error::Config(format!("--spacing: expected graded or uniform, got '{other}'"))),
    }
}

fn parse_format(s: &str) -> Result<OutputFormat> {
    match s.trim().to_ascii_lowercase().as_str() {
        "csv" => Ok(OutputFormat::Csv),
        "json" => Ok(OutputFormat::Json),
        other => Err(Error::Config(format!("--format: expected csv or json, got '{other}'"))),
    }
}

struct Resolved {
    config: SweepConfig,
    timestamp: bool,
}

fn resolve(command: &Command, settings: &Settings) -> Result<Resolved> {
    let s = settings;
    let (plan, output) = match command {
        Command::SweepEpsilon { delta, eps, output } => (
            SweepPlan::Epsilon {
                deltas: parse_values("delta", &s.get(delta.as_ref(), "delta", "0,2,4,8"))?,
                eps: parse_range("eps", &s.get(eps.as_ref(), "eps", "0.01:10:1000"))?,
            },
            output,
        ),
        Command::SweepDelta { eps, delta, output } => (
            SweepPlan::Delta {
                eps_values: parse_values("eps", &s.get(eps.as_ref(), "eps", "0.2,0.5,5,9"))?,
                delta: parse_range("delta", &s.get(delta.as_ref(), "delta", "-10:10:1001"))?,
            },
            output,
        ),
        Command::SweepTime { range, output } => (
            SweepPlan::Time { range: parse_range("range", &s.get(range.as_ref(), "range", "0:5:500"))? },
            output,
        ),
        Command::FidelityGrid { eps, delta, output } => (
            SweepPlan::FidelityGrid {
                eps: parse_range("eps", &s.get(eps.as_ref(), "eps", "0:10:101"))?,
                delta: parse_range("delta", &s.get(delta.as_ref(), "delta", "-10:10:201"))?,
            },
            output,
        ),
        Command::OracleCheck { modes, span, spacing, eps, delta, output } => (
            SweepPlan::OracleCheck {
                modes: parse_number("modes", &s.get(modes.as_ref(), "modes", "200000"))?,
                span: parse_number("span", &s.get(span.as_ref(), "span", "1000"))?,
                spacing: parse_spacing(&s.get(spacing.as_ref(), "spacing", "graded"))?,
                eps: parse_axis("eps", &s.get(eps.as_ref(), "eps", "0.05:10:5"))?,
                delta: parse_axis("delta", &s.get(delta.as_ref(), "delta", "-10:10:5"))?,
            },
            output,
        ),
        Command::Verify { tol, output } => (
            SweepPlan::Verify { tol: parse_number("tol", &s.get(tol.as_ref(), "tol", "1e-8"))? },
            output,
        ),
    };

    let output_path = output.out.clone().or_else(|| s.file.get("out").map(PathBuf::from));
    let output_format = match output.format.as_ref().or(s.file.get("format")) {
        Some(f) => parse_format(f)?,
        None => output_path.as_deref().map(output::format_for_path).unwrap_or_default(),
    };
    let timestamp = output.timestamp
        || s.file.get("timestamp").is_some_and(|v| matches!(v.as_str(), "true" | "1" | "yes"));
    Ok(Resolved { config: SweepConfig { plan, output_path, output_format }, timestamp })
}

fn now_stamp() -> String {
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    format!("{secs} (unix seconds)")
}

fn emit(result: &SweepResult, config: &SweepConfig) -> Result<()> {
    match &config.output_path {
        Some(path) => output::write_to_path(result, config.output_format, path),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            output::write_result(result, config.output_format, &mut lock)?;
            lock.flush()?;
            Ok(())
        }
    }
}

fn configure_threads_from_env() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got '{raw}'")))?;
    // a pool may already exist when called twice in one process; keep the first
    let _ = parallel::configure_threads(threads);
    Ok(())
}

fn execute(cli: &Cli) -> Result<i32> {
    configure_threads_from_env()?;
    let settings = Settings::load(cli.config.as_deref())?;
    let Resolved { config, timestamp } = resolve(&cli.command, &settings)?;
    let sweeper = Sweeper::default();

    let (mut result, code) = match &config.plan {
        SweepPlan::Verify { tol } => {
            let report = sweeper.verify(*tol)?;
            for c in &report.checks {
                eprintln!(
                    "[{}] {}: computed {:.6e}, expected {:.6e}, |error| {:.3e} (tol {:.1e})",
                    if c.passed() { "PASS" } else { "FAIL" },
                    c.name,
                    c.computed,
                    c.expected,
                    c.abs_error(),
                    c.tolerance
                );
            }
            let code = if report.all_passed() { EXIT_OK } else { EXIT_VERIFY_FAILED };
            (report.to_result(*tol), code)
        }
        plan => (sweeper.run(plan)?, EXIT_OK),
    };
    if timestamp {
        result.metadata.insert("timestamp".to_owned(), now_stamp());
    }
    // verify prints its report; it only writes a table when asked to
    if !matches!(config.plan, SweepPlan::Verify { .. }) || config.output_path.is_some() {
        emit(&result, &config)?;
    }
    Ok(code)
}

/// Run the CLI on `args` (including the program name) and return the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
