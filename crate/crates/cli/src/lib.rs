//! Experiment runner for the spectral diffusion control toolkit.
//!
//! The binary `gegenopt` wraps [`run`]; the pieces are public so tests and
//! other tools can drive single solves and sweeps directly.

pub mod config;
pub mod output;
pub mod runner;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::Parser;

use config::{parse_f64_list, parse_usize_list, ConfigError, InitialCondition, RunConfig};
use runner::{emit_profiles, run_sweep_with, SweepRow};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_PARTIAL: i32 = 2;

const SWEEP_N: &str = "4:12";
const SWEEP_ALPHA: &str = "-0.4:0.9:0.1";

#[derive(Debug, Parser)]
#[command(name = "gegenopt", version, about = "Solve the diffusion control problem on shifted Gegenbauer grids")]
pub struct Args {
    /// Spatial length L
    #[arg(long = "L", default_value_t = 4.0)]
    pub length: f64,
    /// Final time
    #[arg(long, default_value_t = 1.0)]
    pub tf: f64,
    #[arg(long, default_value_t = 0.5)]
    pub r1: f64,
    #[arg(long, default_value_t = 0.5)]
    pub r2: f64,
    /// Initial condition: affine:a,b or poly:c0,c1,...
    #[arg(long, default_value = "affine:1,1")]
    pub f: String,
    /// Spatial degree; repeatable, or a range a:b[:step]
    #[arg(long = "Ny", allow_hyphen_values = true)]
    pub ny: Vec<String>,
    /// Temporal degree; defaults to N_y
    #[arg(long = "Nt", allow_hyphen_values = true)]
    pub nt: Vec<String>,
    /// Gegenbauer parameter; repeatable, or a range a:b:step
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Vec<String>,
    /// Run every (N, alpha) cell and write a report table
    #[arg(long)]
    pub sweep: bool,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Uniform sample points per axis for psi1 and profiles
    #[arg(long, default_value_t = 101)]
    pub eval_grid: usize,
    /// Also write H, b, Q, c for every solved cell
    #[arg(long)]
    pub dump_matrices: bool,
    /// Reserved; all computation is deterministic
    #[arg(long)]
    pub seed: Option<u64>,
}

fn expand<T>(
    values: &[String],
    default: &str,
    parse: fn(&str) -> Result<Vec<T>, ConfigError>,
) -> Result<Vec<T>, ConfigError> {
    if values.is_empty() {
        return parse(default);
    }
    let mut out = Vec::new();
    for v in values {
        out.extend(parse(v)?);
    }
    Ok(out)
}

impl Args {
    pub fn to_config(&self) -> Result<RunConfig, ConfigError> {
        let (n_default, a_default) = if self.sweep { (SWEEP_N, SWEEP_ALPHA) } else { ("12", "-0.2") };
        let initial: InitialCondition = self.f.parse()?;
        let config = RunConfig {
            length: self.length,
            final_time: self.tf,
            r1: self.r1,
            r2: self.r2,
            initial,
            ny: expand(&self.ny, n_default, parse_usize_list)?,
            nt: if self.nt.is_empty() {
                Vec::new()
            } else {
                expand(&self.nt, "", parse_usize_list)?
            },
            alpha: expand(&self.alpha, a_default, parse_f64_list)?,
            eval_grid: self.eval_grid,
            out: self.out.clone(),
            dump_matrices: self.dump_matrices,
            seed: self.seed,
        };
        config.validate()?;
        Ok(config)
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(stderr, "{e}")
            } else {
                write!(stdout, "{e}")
            };
            return code;
        }
    };
    let config = match args.to_config() {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(stderr, "configuration error: {e}");
            return EXIT_CONFIG;
        }
    };
    let cells = config.cells().map(|c| c.len()).unwrap_or(0);
    if !args.sweep && cells != 1 {
        let _ = writeln!(
            stderr,
            "configuration error: {cells} cells requested; pass --sweep to run more than one"
        );
        return EXIT_CONFIG;
    }
    match execute(&config, args.sweep, stdout) {
        Ok(rows) if rows.iter().all(|r| r.outcome.is_ok()) => EXIT_OK,
        Ok(rows) => {
            for r in rows.iter().filter_map(|r| r.outcome.as_ref().err()) {
                let _ = writeln!(stderr, "{r}");
            }
            EXIT_PARTIAL
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_PARTIAL
        }
    }
}

/// Solves, prints the report to `stdout` and writes artifacts under `config.out`.
pub fn execute(
    config: &RunConfig,
    sweep: bool,
    stdout: &mut dyn Write,
) -> Result<Vec<SweepRow>, Box<dyn std::error::Error>> {
    let keep_all = config.out.is_some();
    let (rows, solved) = run_sweep_with(config, |_| keep_all)?;
    output::write_report(&mut *stdout, &rows)?;
    if let Some(dir) = &config.out {
        output::write_run_files(dir, config, &rows)?;
        for s in &solved {
            // Profiles are large; a sweep writes only solution grids.
            let profiles = if sweep {
                None
            } else {
                Some(emit_profiles(s, config.eval_grid, config.eval_grid)?)
            };
            output::write_cell_artifacts(dir, s, profiles.as_deref(), config.dump_matrices)?;
        }
    }
    Ok(rows)
}
