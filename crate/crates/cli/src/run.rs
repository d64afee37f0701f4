//! Command dispatch and artifact writing.

use std::path::{Path, PathBuf};
use std::time::Instant;

use chiral_bag::config::Config;

use crate::envelope::{config_digest, write_table, Report, ResultEnvelope};
use crate::suites::{self, AnsatzSource};
use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub enum Command {
    VerifyKernel,
    CoeffTable,
    DysonCheck,
    WzSolve(AnsatzSource),
    FiberSpectrum,
    AnomalyEval,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::VerifyKernel => "verify-kernel",
            Command::CoeffTable => "coeff-table",
            Command::DysonCheck => "dyson-check",
            Command::WzSolve(_) => "wz-solve",
            Command::FiberSpectrum => "fiber-spectrum",
            Command::AnomalyEval => "anomaly-eval",
        }
    }

    fn extra_input(&self) -> &str {
        match self {
            Command::WzSolve(src) => src.text(),
            _ => "",
        }
    }
}

/// Runs one command; the report keeps the tables that the envelope does not carry.
pub fn run(cmd: &Command, cfg: &Config) -> (ResultEnvelope, Report) {
    let start = Instant::now();
    let report = match cmd {
        Command::VerifyKernel => suites::verify_kernel(cfg),
        Command::CoeffTable => suites::coeff_table(cfg),
        Command::DysonCheck => suites::dyson_check(cfg),
        Command::WzSolve(src) => suites::wz_solve(src),
        Command::FiberSpectrum => suites::fiber_spectrum(cfg),
        Command::AnomalyEval => suites::anomaly_eval(cfg),
    };
    let digest = config_digest(cmd.name(), cfg, cmd.extra_input());
    let env = ResultEnvelope::new(cmd.name(), digest, &report, start.elapsed().as_secs_f64());
    (env, report)
}

/// Writes `<command>.json`, every table, and `constraints.json` when present.
pub fn write_outputs(dir: &Path, env: &ResultEnvelope, report: &Report) -> Result<Vec<PathBuf>, CliError> {
    let io = |p: &Path, e: std::io::Error| CliError::Io(format!("{}: {e}", p.display()));
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let mut out = Vec::new();
    let path = dir.join(format!("{}.json", env.command));
    let text = serde_json::to_string_pretty(env).expect("envelope serializes");
    std::fs::write(&path, text).map_err(|e| io(&path, e))?;
    out.push(path);
    for t in &report.tables {
        out.push(write_table(dir, t).map_err(|e| io(&dir.join(&t.file), e))?);
    }
    if let Some(c) = report.data.get("constraints") {
        let path = dir.join("constraints.json");
        std::fs::write(&path, serde_json::to_string_pretty(c).expect("json serializes")).map_err(|e| io(&path, e))?;
        out.push(path);
    }
    Ok(out)
}

/// Reads the configuration from `path`, or the shipped defaults, and applies a tolerance scale.
pub fn load_config(path: Option<&Path>, tolerance_scale: f64) -> Result<Config, CliError> {
    let cfg = match path {
        Some(p) => Config::load(p),
        None => Ok(Config::shipped()),
    };
    cfg.and_then(|c| c.with_tolerance_scale(tolerance_scale)).map_err(|e| CliError::Usage(e.to_string()))
}
