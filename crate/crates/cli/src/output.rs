use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::experiments::Table;

/// Paths written by [`write`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Written {
    pub csv: PathBuf,
    pub meta: PathBuf,
}

pub fn metadata(config: &ExperimentConfig, table: &Table) -> Value {
    let mut meta = json!({
        "schema_version": config.schema_version,
        "experiment": config.experiment.name(),
        "config": config,
        "columns": table.columns,
        "rows": table.rows.len(),
        "version": env!("CARGO_PKG_VERSION"),
    });
    if !table.summary.is_empty() {
        meta["summary"] = Value::Object(table.summary.clone());
    }
    meta
}

/// Writes `<dir>/<stem>.csv` and `<dir>/<stem>.meta.json`.
pub fn write(dir: &Path, config: &ExperimentConfig, table: &Table) -> Result<Written> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let csv_path = dir.join(format!("{}.csv", config.output));
    let meta_path = dir.join(format!("{}.meta.json", config.output));

    let mut w = csv::Writer::from_path(&csv_path).with_context(|| format!("writing {}", csv_path.display()))?;
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush().with_context(|| format!("writing {}", csv_path.display()))?;

    let mut text = serde_json::to_string_pretty(&metadata(config, table))?;
    text.push('\n');
    fs::write(&meta_path, text).with_context(|| format!("writing {}", meta_path.display()))?;
    Ok(Written {
        csv: csv_path,
        meta: meta_path,
    })
}
