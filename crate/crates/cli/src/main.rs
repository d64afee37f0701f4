use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use chiral_bag_cli::suites::AnsatzSource;
use chiral_bag_cli::{emit_plot_data, load_config, run, write_outputs, CliError, Command, ResultEnvelope};

/// Verification harness for Dirac operators under chiral bag boundary conditions.
#[derive(Parser)]
#[command(name = "chiral-bag", version)]
struct Cli {
    /// JSON configuration; defaults to the shipped one.
    #[arg(long, global = true, env = "CHIRAL_BAG_CONFIG")]
    config: Option<PathBuf>,
    /// Directory for the envelope, tables and plot data.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Multiplies every accuracy tolerance.
    #[arg(long, global = true, default_value_t = 1.0)]
    tolerance_scale: f64,
    /// Also write these series as long-format CSV (comma separated).
    #[arg(long, global = true, value_delimiter = ',')]
    plot: Option<Vec<String>>,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Boundary conditions, symmetry and heat equation of the half-space kernel.
    VerifyKernel,
    /// Heat-kernel coefficients c₂, c₃, c₄ on the θ grid against their closed forms.
    CoeffTable,
    /// Imaginarity suite, first-order Δθ correction and the chiral-variation identity.
    DysonCheck,
    /// Constraints on an ansatz: `a45`, `a3stru`, or a path to an ansatz file.
    WzSolve {
        #[arg(default_value = "a45")]
        ansatz: String,
    },
    /// Certified spectrum of the one-dimensional fiber problem.
    FiberSpectrum,
    /// Bulk and boundary anomaly terms and the small-t coefficient fit.
    AnomalyEval,
    /// Re-emit plot data from a saved envelope.
    Plot {
        envelope: PathBuf,
        #[arg(long, value_delimiter = ',')]
        series: Vec<String>,
    },
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let command = match cli.command {
        Sub::Plot { envelope, series } => {
            let text = std::fs::read_to_string(&envelope).map_err(|e| CliError::Usage(format!("{}: {e}", envelope.display())))?;
            let env: ResultEnvelope = serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", envelope.display())))?;
            std::fs::create_dir_all(&cli.out).map_err(|e| CliError::Io(format!("{}: {e}", cli.out.display())))?;
            let path = emit_plot_data(&env, &series, &cli.out)?;
            println!("wrote {}", path.display());
            return Ok(true);
        }
        Sub::VerifyKernel => Command::VerifyKernel,
        Sub::CoeffTable => Command::CoeffTable,
        Sub::DysonCheck => Command::DysonCheck,
        Sub::WzSolve { ansatz } => {
            Command::WzSolve(AnsatzSource::from_arg(&ansatz).map_err(|e| CliError::Usage(format!("{ansatz}: {e}")))?)
        }
        Sub::FiberSpectrum => Command::FiberSpectrum,
        Sub::AnomalyEval => Command::AnomalyEval,
    };
    let cfg = load_config(cli.config.as_deref(), cli.tolerance_scale)?;
    let (env, report) = run(&command, &cfg);
    // Validate the plot request before writing anything.
    if let Some(series) = &cli.plot {
        if series.is_empty() || series.iter().any(|s| !env.series.contains_key(s)) {
            emit_plot_data(&env, series, &cli.out)?;
        }
    }
    for path in write_outputs(&cli.out, &env, &report)? {
        println!("wrote {}", path.display());
    }
    if let Some(series) = &cli.plot {
        println!("wrote {}", emit_plot_data(&env, series, &cli.out)?.display());
    }
    for m in &env.values {
        println!("  {} = {:e} ± {:.2e}", m.name, m.value, m.error);
    }
    for a in &env.assertions {
        println!("{} {}: {}", if a.pass { "PASS" } else { "FAIL" }, a.name, a.detail);
    }
    if let Some(c) = env.data.get("constraints") {
        println!("{}", serde_json::to_string_pretty(c).expect("json serializes"));
    }
    println!(
        "{} {} in {:.2} s (config {})",
        env.command,
        if env.pass { "passed" } else { "FAILED" },
        env.wall_time_s,
        &env.config_digest[..16]
    );
    if !env.pass {
        for a in env.assertions.iter().filter(|a| !a.pass) {
            eprintln!("assertion failed: {}", a.name);
        }
    }
    Ok(env.pass)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("chiral-bag: {e}");
            ExitCode::from(2)
        }
    }
}
