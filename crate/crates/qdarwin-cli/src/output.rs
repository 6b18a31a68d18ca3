//! CSV tables and the JSON manifest.

use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::experiments::{Context, Outcome};
use crate::Failure;

pub struct Written {
    pub csv: PathBuf,
    pub manifest: PathBuf,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `<name>.csv` and `<name>.json` into `dir`. Both are deterministic functions of the inputs.
pub fn write(dir: &Path, name: &str, ctx: &Context, params: Value, outcome: &Outcome) -> Result<Written, Failure> {
    std::fs::create_dir_all(dir)?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(&outcome.table.header)?;
    for row in &outcome.table.rows {
        w.write_record(row)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Config(format!("csv: {e}")))?;
    let csv_path = dir.join(format!("{name}.csv"));
    std::fs::write(&csv_path, &bytes)?;

    let params = match params {
        Value::Object(m) => Value::Object(m.into_iter().filter(|(_, v)| !v.is_null()).collect()),
        other => other,
    };
    let manifest = json!({
        "experiment": name,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": ctx.seed,
        "units": ctx.units.name(),
        "parameters": params,
        "report": outcome.report,
        "outputs": [{ "path": format!("{name}.csv"), "sha256": hex(&Sha256::digest(&bytes)) }],
    });
    let manifest_path = dir.join(format!("{name}.json"));
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    std::fs::write(&manifest_path, text)?;
    Ok(Written { csv: csv_path, manifest: manifest_path })
}
