use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use sourceseek::bessel::{bessel_j, bessel_j_quadrature, BesselOrder};
use sourceseek::trace_io::metrics_json;
use sourceseek::{
    compare, export_metrics, export_trace, load_scenario, run_simulation, theory_report, Mode, Scenario,
};

/// Event-triggered source seeking: simulation, averaged model and stability checks.
#[derive(Parser)]
#[command(name = "sourceseek", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the closed loop and export the trace and metrics.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        /// full, average, continuous-control or sampled-data.
        #[arg(long)]
        mode: Option<String>,
        /// Control period for sampled-data mode (s).
        #[arg(long)]
        sample_period: Option<f64>,
        /// Attach the theory report to the metrics.
        #[arg(long)]
        verify: bool,
    },
    /// Run the averaged loop (same as `simulate --mode average`).
    Average {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Averaging error of full versus averaged runs at several base frequencies.
    Compare {
        #[command(flatten)]
        grid: GridArgs,
        /// Base frequencies ω3, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        omega_list: Vec<f64>,
        /// Write the results as JSON here as well as to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the stability, dwell-time and decay checks.
    Verify {
        #[command(flatten)]
        grid: GridArgs,
        /// Also measure the averaging error at these base frequencies.
        #[arg(long, value_delimiter = ',')]
        omega_list: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the Bessel function of the first kind J_m(x).
    Bessel {
        #[arg(long)]
        order: u32,
        #[arg(long, allow_negative_numbers = true)]
        arg: f64,
        /// Use the quadrature route instead of the power series.
        #[arg(long)]
        quadrature: bool,
    },
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    config: PathBuf,
    /// Step size override (s).
    #[arg(long)]
    dt: Option<f64>,
    /// Horizon override (s).
    #[arg(long)]
    t_final: Option<f64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// Trace CSV destination.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Metrics JSON destination.
    #[arg(long)]
    metrics: Option<PathBuf>,
}

impl GridArgs {
    fn scenario(&self) -> anyhow::Result<Scenario> {
        let mut s = load_scenario(&self.config)?;
        if let Some(dt) = self.dt {
            s.dt = dt;
        }
        if let Some(t) = self.t_final {
            s.t_final = t;
        }
        Ok(s.validate()?)
    }
}

/// Prints to stdout; a closed pipe (`| head`) is not an error.
fn emit(text: &str) -> anyhow::Result<()> {
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn write_json(path: &Path, value: &serde_json::Value) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn simulate(run: &RunArgs, s: Scenario, verify: bool) -> anyhow::Result<()> {
    let (trace, mut metrics) = run_simulation(&s)?;
    if verify {
        metrics.theory = Some(theory_report(&s, &[])?);
    }
    if let Some(path) = &run.out {
        export_trace(&trace, path)?;
    }
    if let Some(path) = &run.metrics {
        export_metrics(&metrics, path)?;
    }
    emit(&metrics_json(&metrics))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Simulate { run, mode, sample_period, verify } => {
            let mut s = run.grid.scenario()?;
            if let Some(name) = mode {
                let period = sample_period.or(match s.mode {
                    Mode::SampledData { period } => Some(period),
                    _ => None,
                });
                s.mode = Mode::parse(&name, period).map_err(|reason| {
                    sourceseek::Error::InvalidParameter { name: "--mode".into(), reason }
                })?;
            } else if let (Some(period), Mode::SampledData { .. }) = (sample_period, s.mode) {
                s.mode = Mode::SampledData { period };
            }
            let s = s.validate()?;
            simulate(&run, s, verify)
        }
        Command::Average { run } => {
            let mut s = run.grid.scenario()?;
            s.mode = Mode::Average;
            simulate(&run, s, false)
        }
        Command::Compare { grid, omega_list, out } => {
            let s = grid.scenario()?;
            let results = compare(&s, &omega_list)?;
            let ratios: Vec<f64> = results.windows(2).map(|w| w[1].sup_error / w[0].sup_error).collect();
            let value = json!({ "results": results, "ratios": ratios });
            if let Some(path) = out {
                write_json(&path, &value)?;
            }
            emit(&serde_json::to_string_pretty(&value)?)
        }
        Command::Verify { grid, omega_list, out } => {
            let s = grid.scenario()?;
            let report = theory_report(&s, &omega_list)?;
            let value = serde_json::to_value(&report)?;
            if let Some(path) = out {
                write_json(&path, &value)?;
            }
            emit(&serde_json::to_string_pretty(&value)?)
        }
        Command::Bessel { order, arg, quadrature } => {
            let m = BesselOrder(order);
            let v = if quadrature { bessel_j_quadrature(m, arg)? } else { bessel_j(m, arg)? };
            emit(&format!("{v:.17e}"))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = err.downcast_ref::<sourceseek::Error>().map_or(1, |e| e.exit_code());
            log::debug!("exiting with {code}");
            ExitCode::from(code as u8)
        }
    }
}
