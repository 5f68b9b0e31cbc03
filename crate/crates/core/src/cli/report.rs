use std::io::Write;
use std::path::{Path, PathBuf};

use crate::cli::{display, CliError, SWEEP_POINT};
use crate::harness::artifacts::{read_episodes, read_summary, EPISODES_FILE, SUMMARY_FILE};
use crate::harness::experiment::SUMMARY_COLUMNS;
use crate::harness::mean_ci;

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub source: String,
    pub x: f64,
    pub mean: f64,
    pub std: f64,
    pub ci95: f64,
}

fn sweep_x(dir: &Path) -> Option<f64> {
    let text = std::fs::read_to_string(dir.join(SWEEP_POINT)).ok()?;
    let v: serde_json::Value = serde_json::from_str(&text).ok()?;
    v.get("x")?.as_f64()
}

fn collect(dir: &Path, index: usize, metric: &str) -> Result<ReportRow, String> {
    read_episodes(&dir.join(EPISODES_FILE)).map_err(|e| e.to_string())?;
    let rows = read_summary(&dir.join(SUMMARY_FILE)).map_err(|e| e.to_string())?;
    let value = |row: &std::collections::BTreeMap<String, String>| -> Result<f64, String> {
        let cell = &row[metric];
        cell.parse::<f64>().map_err(|_| format!("{}: no `{metric}` recorded", display(dir)))
    };
    let (agg, seeds): (Vec<_>, Vec<_>) = rows.iter().partition(|r| r["seed"] == "all");
    let agg = agg.first().ok_or_else(|| format!("{}: summary has no aggregate row", display(dir)))?;
    let per_seed = seeds.iter().map(|r| value(r)).collect::<Result<Vec<f64>, _>>()?;
    if per_seed.is_empty() {
        return Err(format!("{}: summary has no seed rows", display(dir)));
    }
    let (_, std, ci95) = mean_ci(&per_seed);
    Ok(ReportRow { source: display(dir), x: sweep_x(dir).unwrap_or(index as f64), mean: value(agg)?, std, ci95 })
}

/// Long-format table of one metric across result directories, ordered by x.
/// `mean` is the aggregate-row value; `std` and `ci95` are taken across seed rows.
pub fn cmd_report(inputs: &[PathBuf], metric: &str, out: &Path, stdout: &mut dyn Write) -> Result<(), CliError> {
    if metric == "seed" || !SUMMARY_COLUMNS.contains(&metric) {
        return Err(CliError::Usage(format!(
            "unknown metric `{metric}`; expected one of {}",
            SUMMARY_COLUMNS[1..].join(", ")
        )));
    }
    let mut rows = Vec::new();
    let mut offenders = Vec::new();
    for (i, dir) in inputs.iter().enumerate() {
        match collect(dir, i, metric) {
            Ok(r) => rows.push(r),
            Err(e) => offenders.push(e),
        }
    }
    if !offenders.is_empty() {
        return Err(CliError::Runtime(format!("unreadable results:\n  {}", offenders.join("\n  "))));
    }
    rows.sort_by(|a, b| a.x.total_cmp(&b.x));

    let mut csv = String::from("source,x,mean,std,ci95\n");
    for r in &rows {
        csv.push_str(&format!("{},{},{},{},{}\n", r.source, r.x, r.mean, r.std, r.ci95));
    }
    std::fs::write(out, csv).map_err(|e| CliError::Runtime(format!("{}: {e}", display(out))))?;

    let width = rows.iter().map(|r| r.source.len()).max().unwrap_or(6).max(6);
    let io = |e: std::io::Error| CliError::Runtime(e.to_string());
    writeln!(stdout, "metric: {metric}").map_err(io)?;
    writeln!(stdout, "{:<width$}  {:>10}  {:>12}  {:>12}  {:>12}", "source", "x", "mean", "std", "ci95").map_err(io)?;
    for r in &rows {
        writeln!(stdout, "{:<width$}  {:>10.4}  {:>12.4}  {:>12.4}  {:>12.4}", r.source, r.x, r.mean, r.std, r.ci95)
            .map_err(io)?;
    }
    Ok(())
}
