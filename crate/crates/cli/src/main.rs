//! `majorana`: Majorana constellations, entanglement measures and geometric
//! phases from the command line.
//!
//! Every successful run writes a JSON envelope
//! `{"config", "convention", "input_sha256", "result"}` with keys sorted.
//! Failures exit with status 2 and a `{"code", "message"}` record on
//! standard error.

mod commands;
mod config;
mod error;
mod input;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use majorana_core::Convention;
use serde_json::{json, Value};

use commands::{Context, Output};
use config::{Format, RunConfig};
use error::{CliError, CliResult};
use input::Sources;

#[derive(Debug, Parser)]
#[command(name = "majorana", version, about = "Majorana stellar representation of spin-S states")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Stereographic chart: north-at-zero or south-at-zero.
    #[arg(long, global = true, value_parser = parse_convention)]
    convention: Option<Convention>,
    /// Root clustering tolerance.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Output file; standard output when absent.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// JSON run configuration; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Disable the thread pool.
    #[arg(long, global = true)]
    sequential: bool,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Time steps per drive period.
    #[arg(long, global = true)]
    steps: Option<usize>,
    /// Colatitude bands of field grids.
    #[arg(long, global = true)]
    grid: Option<usize>,
}

#[derive(Debug, Args)]
struct InputArg {
    /// State or constellation file; standard input when absent or `-`.
    #[arg(long, short)]
    input: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// State file to constellation.
    Stars(InputArg),
    /// Constellation file to state.
    State(InputArg),
    /// Degeneracy partition and class labels.
    Classify(InputArg),
    /// Every applicable entanglement measure.
    Measures(InputArg),
    /// Entanglement witnesses.
    Witness(InputArg),
    Multipoles {
        #[command(flatten)]
        input: InputArg,
        #[arg(long)]
        max_l: Option<usize>,
    },
    /// Husimi function on a latitude-longitude grid.
    Qfunc(InputArg),
    /// Spherical Wigner function on a latitude-longitude grid.
    Wigner {
        #[command(flatten)]
        input: InputArg,
        #[arg(long)]
        max_l: Option<usize>,
    },
    /// Overlap of two states from their star lists.
    Overlap {
        #[command(flatten)]
        input: InputArg,
        #[arg(long)]
        other: Option<PathBuf>,
    },
    /// Antipodal basis of the orthogonal complement.
    Basis(InputArg),
    /// Propagate over one drive period.
    Evolve {
        #[command(flatten)]
        input: InputArg,
        #[arg(long)]
        drive: Option<PathBuf>,
        /// JSON-lines trajectory export.
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Berry phase and its star decomposition over one drive period.
    Berry {
        #[command(flatten)]
        input: InputArg,
        #[arg(long)]
        drive: Option<PathBuf>,
        #[arg(long)]
        trajectory: Option<PathBuf>,
        #[arg(long)]
        two_s: Option<usize>,
        /// Start from the given cyclic eigenstate of a cone drive.
        #[arg(long)]
        cyclic: Option<usize>,
    },
    /// Random state, or ensemble statistics when `--samples` exceeds 1.
    Random {
        #[arg(long)]
        two_s: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Number of integer partitions of n.
    Partitions {
        #[arg(long)]
        n: Option<usize>,
    },
}

fn parse_convention(s: &str) -> Result<Convention, String> {
    Convention::parse(s).ok_or_else(|| format!("unknown convention {s:?}"))
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn set_opt<T>(slot: &mut Option<T>, v: Option<T>) {
    if v.is_some() {
        *slot = v;
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Stars(_) => "stars",
            Command::State(_) => "state",
            Command::Classify(_) => "classify",
            Command::Measures(_) => "measures",
            Command::Witness(_) => "witness",
            Command::Multipoles { .. } => "multipoles",
            Command::Qfunc(_) => "qfunc",
            Command::Wigner { .. } => "wigner",
            Command::Overlap { .. } => "overlap",
            Command::Basis(_) => "basis",
            Command::Evolve { .. } => "evolve",
            Command::Berry { .. } => "berry",
            Command::Random { .. } => "random",
            Command::Partitions { .. } => "partitions",
        }
    }

    fn apply(self, cfg: &mut RunConfig) {
        match self {
            Command::Stars(i)
            | Command::State(i)
            | Command::Classify(i)
            | Command::Measures(i)
            | Command::Witness(i)
            | Command::Qfunc(i)
            | Command::Basis(i) => set_opt(&mut cfg.input, i.input),
            Command::Multipoles { input, max_l } | Command::Wigner { input, max_l } => {
                set_opt(&mut cfg.input, input.input);
                set_opt(&mut cfg.max_l, max_l);
            }
            Command::Overlap { input, other } => {
                set_opt(&mut cfg.input, input.input);
                set_opt(&mut cfg.other, other);
            }
            Command::Evolve { input, drive, trajectory } => {
                set_opt(&mut cfg.input, input.input);
                set_opt(&mut cfg.drive, drive);
                set_opt(&mut cfg.trajectory, trajectory);
            }
            Command::Berry { input, drive, trajectory, two_s, cyclic } => {
                set_opt(&mut cfg.input, input.input);
                set_opt(&mut cfg.drive, drive);
                set_opt(&mut cfg.trajectory, trajectory);
                set_opt(&mut cfg.two_s, two_s);
                set_opt(&mut cfg.cyclic, cyclic);
            }
            Command::Random { two_s, samples } => {
                set_opt(&mut cfg.two_s, two_s);
                set(&mut cfg.samples, samples);
            }
            Command::Partitions { n } => set_opt(&mut cfg.n, n),
        }
    }
}

/// Defaults, then the config file, then flags.
fn resolve(cli: Cli) -> CliResult<(RunConfig, bool)> {
    let g = cli.global;
    let mut explicit_convention = g.convention.is_some();
    let mut cfg = match &g.config {
        Some(path) => {
            let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
            let value: Value = serde_json::from_slice(&bytes).map_err(|e| CliError::json("config file", e))?;
            explicit_convention |= value.get("convention").is_some();
            serde_json::from_value(value).map_err(|e| CliError::new("INVALID_CONFIG", e.to_string()))?
        }
        None => RunConfig::default(),
    };
    let name = cli.command.name();
    if !cfg.subcommand.is_empty() && cfg.subcommand != name {
        return Err(CliError::new(
            "INVALID_CONFIG",
            format!("config is for `{}` but `{name}` was run", cfg.subcommand),
        ));
    }
    cfg.subcommand = name.into();
    set(&mut cfg.convention, g.convention);
    set(&mut cfg.tolerance, g.tolerance);
    set_opt(&mut cfg.output, g.output);
    set(&mut cfg.format, g.format);
    set(&mut cfg.seed, g.seed);
    set(&mut cfg.steps, g.steps);
    set(&mut cfg.grid, g.grid);
    cfg.sequential |= g.sequential;
    cli.command.apply(&mut cfg);
    if !(cfg.tolerance.is_finite() && cfg.tolerance > 0.0) {
        return Err(CliError::invalid("--tolerance must be positive"));
    }
    if cfg.steps == 0 {
        return Err(CliError::invalid("--steps must be positive"));
    }
    Ok((cfg, explicit_convention))
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn emit(cfg: &RunConfig, digest: String, out: Output) -> CliResult<()> {
    let envelope = json!({
        "config": serde_json::to_value(cfg).expect("config serializes"),
        "convention": cfg.convention.name(),
        "input_sha256": digest,
        "result": out.result,
    });
    let mut text = serde_json::to_string_pretty(&envelope).expect("envelope serializes");
    text.push('\n');
    match (out.csv, &cfg.output) {
        (None, Some(path)) => write_file(path, &text),
        (None, None) => print_stdout(&text),
        (Some(csv), Some(path)) => {
            write_file(path, &csv)?;
            print_stdout(&text)
        }
        (Some(csv), None) => {
            print_stdout(&csv)?;
            std::io::stderr()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::io(Path::new("<stderr>"), e))
        }
    }
}

fn print_stdout(text: &str) -> CliResult<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

fn execute(cli: Cli) -> CliResult<()> {
    let (cfg, explicit_convention) = resolve(cli)?;
    let mut ctx = Context { cfg, explicit_convention, sources: Sources::default() };
    let out = commands::run(&mut ctx)?;
    emit(&ctx.cfg, ctx.sources.sha256(), out)
}

fn fail(err: &CliError) -> ExitCode {
    let record = serde_json::to_string(err).expect("error record serializes");
    eprintln!("{record}");
    ExitCode::from(2)
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
            let msg = e.render().to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            return fail(&CliError::invalid(first));
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
