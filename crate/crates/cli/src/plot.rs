//! Long-format plot data (`series,x,y,yerr`) for external plotting tools.

use std::path::{Path, PathBuf};

use crate::envelope::{sci, ResultEnvelope};
use crate::CliError;

/// Writes the requested series of `env` to `<dir>/<command>_plot.csv`.
pub fn emit_plot_data(env: &ResultEnvelope, series: &[String], dir: &Path) -> Result<PathBuf, CliError> {
    if series.is_empty() || series.iter().any(|s| s.trim().is_empty()) {
        return Err(CliError::Usage("empty series request".into()));
    }
    for s in series {
        if !env.series.contains_key(s) {
            let known: Vec<&String> = env.series.keys().collect();
            return Err(CliError::Usage(format!("unknown series '{s}' for {}; available: {known:?}", env.command)));
        }
    }
    let path = dir.join(format!("{}_plot.csv", env.command));
    let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(["series", "x", "y", "yerr"]).map_err(io)?;
    for s in series {
        for p in &env.series[s] {
            w.write_record([s.clone(), sci(p.x), sci(p.y), sci(p.yerr)]).map_err(io)?;
        }
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(path)
}
