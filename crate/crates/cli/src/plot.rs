use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use splitmimo_core::evaluation::report::parse_csv;
use splitmimo_core::Error;

use crate::Format;

/// Command used to render figures; overridable for other installations.
const PLOT_ENV: &str = "SPLITMIMO_PLOT";
const DEFAULT_PLOT: &str = "splitmimo-plot";

/// Series grouped as channel -> scheme -> [(snr_db, avg_sum_rate, std_err)].
type Series = BTreeMap<String, BTreeMap<String, Vec<(f64, f64, f64)>>>;

fn load(paths: &[PathBuf]) -> Result<Series, Error> {
    let mut series = Series::new();
    for path in paths {
        let text = fs::read_to_string(path)?;
        let rows = parse_csv(&text).map_err(|e| Error::Csv(format!("{}: {e}", path.display())))?;
        for r in rows {
            series
                .entry(r.channel.to_string())
                .or_default()
                .entry(r.scheme)
                .or_default()
                .push((r.snr_db, r.avg_sum_rate, r.std_err));
        }
    }
    for schemes in series.values_mut() {
        for points in schemes.values_mut() {
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
        }
    }
    Ok(series)
}

pub fn run(csvs: &[PathBuf], out: &Path, format: Format, dry_run: bool) -> Result<(), Error> {
    let series = load(csvs)?;
    if dry_run {
        println!("{}", serde_json::to_string_pretty(&series)?);
        return Ok(());
    }
    let program = std::env::var(PLOT_ENV).unwrap_or_else(|_| DEFAULT_PLOT.to_string());
    let format = match format {
        Format::Png => "png",
        Format::Pdf => "pdf",
    };
    let status = Command::new(&program)
        .args(csvs)
        .arg("--out")
        .arg(out)
        .arg("--format")
        .arg(format)
        .status()
        .map_err(|e| {
            Error::Io(std::io::Error::new(
                e.kind(),
                format!("cannot run plotting command `{program}` (set {PLOT_ENV}): {e}"),
            ))
        })?;
    if !status.success() {
        return Err(Error::Io(std::io::Error::other(format!("`{program}` exited with {status}"))));
    }
    Ok(())
}
