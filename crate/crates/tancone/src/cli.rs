use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::{self, RunConfig, Source, Table, EXIT_ERROR, EXIT_OK};
use crate::report::Output;

#[derive(Parser, Debug)]
#[command(name = "tancone", version, about = "Tangential subdifferentials, cones and constraint qualifications for robust DTC programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Full report at a point: objective, constraints, cones, CQs and stationarity.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Also write every subdifferential as a `.body` file into this directory.
        #[arg(long, value_name = "DIR")]
        export_bodies: Option<PathBuf>,
    },
    /// Compare a built-in example (or `all`) with its golden record.
    Reproduce {
        #[arg(default_value = "all")]
        name: String,
        #[command(flatten)]
        run: RunFlags,
    },
    /// GACQ and GEBCQ at a point.
    CheckCq {
        #[command(flatten)]
        common: Common,
    },
    /// Inclusion-form optimality conditions at a point.
    CheckStationarity {
        #[command(flatten)]
        common: Common,
        /// Comma-separated condition ids, or `all`.
        #[arg(long, default_value = "all")]
        conditions: String,
    },
    /// CSV tables for external plotting.
    PlotData {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "all")]
        table: Table,
        /// Plot the support curve of a `.body` file instead of a problem.
        #[arg(long, value_name = "FILE", conflicts_with_all = ["builtin", "problem"])]
        body: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct RunFlags {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; defaults to the number of logical cores.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum, default_value = "text")]
    output: Output,
}

#[derive(Args, Debug)]
struct Common {
    /// Name of a built-in example, e.g. `ex-4.1`.
    #[arg(long, conflicts_with = "problem")]
    builtin: Option<String>,
    /// Path to a problem file.
    #[arg(long)]
    problem: Option<PathBuf>,
    /// Evaluation point, e.g. "0 0". Defaults to the example's reference point or the origin.
    #[arg(long, allow_hyphen_values = true)]
    point: Option<String>,
    /// Radius of the neighbourhood sampled by the GEBCQ check [default: 0.1].
    #[arg(long)]
    delta: Option<f64>,
    /// Points sampled in that neighbourhood [default: 4096].
    #[arg(long)]
    samples: Option<usize>,
    /// Multiplier bound for the penalty-type conditions [default: 1000].
    #[arg(long)]
    lambda_cap: Option<f64>,
    /// Tolerance for set inclusions and Hausdorff comparisons [default: 1e-6].
    #[arg(long)]
    geom_tol: Option<f64>,
    #[command(flatten)]
    run: RunFlags,
}

fn threads(t: Option<usize>) -> usize {
    t.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

impl Common {
    fn run_config(&self, required: bool) -> Result<RunConfig, String> {
        let source = match (&self.builtin, &self.problem) {
            (Some(b), None) => Source::Builtin(b.clone()),
            (None, Some(p)) => Source::Problem(p.clone()),
            (None, None) if !required => Source::Builtin(String::new()),
            _ => return Err("give exactly one of --builtin and --problem".into()),
        };
        Ok(RunConfig {
            source,
            point: self.point.clone(),
            delta: self.delta,
            samples: self.samples,
            lambda_cap: self.lambda_cap,
            geom_tol: self.geom_tol,
            seed: self.run.seed,
            threads: threads(self.run.threads),
            output: self.run.output,
        })
    }
}

/// Captured process output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Outcome {
    fn ok(stdout: String, code: i32) -> Self {
        Outcome { stdout, stderr: String::new(), code }
    }

    fn error(msg: impl std::fmt::Display) -> Self {
        Outcome { stdout: String::new(), stderr: format!("error: {msg}\n"), code: EXIT_ERROR }
    }
}

/// Parse arguments (including the program name) and run the subcommand.
/// Usage errors exit with 1, like every other error.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() { Outcome { stdout: String::new(), stderr: text, code: EXIT_ERROR } } else { Outcome::ok(text, EXIT_OK) };
        }
    };
    match dispatch(cli.command) {
        Ok(o) => o,
        Err(e) => Outcome::error(e),
    }
}

fn dispatch(cmd: Command) -> Result<Outcome, String> {
    Ok(match cmd {
        Command::Analyze { common, export_bodies } => {
            let rc = common.run_config(true)?;
            let (r, code) = commands::cmd_analyze(&rc, export_bodies.as_deref())?;
            Outcome::ok(r.render(rc.output), code)
        }
        Command::Reproduce { name, run } => {
            let rc = RunConfig { seed: run.seed, threads: threads(run.threads), output: run.output, ..RunConfig::builtin(&name) };
            let (r, code) = commands::cmd_reproduce(&name, &rc)?;
            Outcome::ok(r.render(rc.output), code)
        }
        Command::CheckCq { common } => {
            let rc = common.run_config(true)?;
            let (r, code) = commands::cmd_check_cq(&rc)?;
            Outcome::ok(r.render(rc.output), code)
        }
        Command::CheckStationarity { common, conditions } => {
            let rc = common.run_config(true)?;
            let (r, code) = commands::cmd_check_stationarity(&rc, &conditions)?;
            Outcome::ok(r.render(rc.output), code)
        }
        Command::PlotData { common, table, body } => {
            let rc = common.run_config(body.is_none())?;
            let csv = match body {
                Some(path) => commands::plot_body(&path, &rc.config()?)?,
                None => commands::cmd_plot_data(&rc, table)?,
            };
            Outcome::ok(csv, EXIT_OK)
        }
    })
}
