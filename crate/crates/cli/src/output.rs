use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use crate::CliError;

/// Writes `text` to `dir/name`, creating `dir` if needed.
pub fn write_file(dir: &Path, name: &str, text: &[u8]) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    log::info!("wrote {}", path.display());
    Ok(path)
}

/// `report.json`: the run-dependent timestamp lives in `header`, so `body` is
/// byte-identical across reruns with the same config and seed.
pub fn write_report<T: Serialize>(dir: &Path, command: &str, body: &T) -> Result<PathBuf, CliError> {
    let doc = json!({
        "header": {
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "timestamp": chrono::Utc::now().to_rfc3339(),
        },
        "body": body,
    });
    let text = djc::wire::to_exact_json(&doc)?;
    write_file(dir, "report.json", text.as_bytes())
}
