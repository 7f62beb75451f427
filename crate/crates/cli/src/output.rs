use crate::error::Result;
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};

/// CSV with a leading `# config_hash=...` line, '.' decimals, ',' separators and LF endings.
pub fn write_csv(path: &Path, config_hash: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf> {
    let mut buf = format!("# config_hash={config_hash}\n").into_bytes();
    {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(&mut buf);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
    }
    fs::write(path, buf)?;
    Ok(path.to_path_buf())
}

#[derive(Serialize)]
struct Stamped<'a, T> {
    config_hash: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

/// Pretty JSON object with a top-level `config_hash` field.
pub fn write_json<T: Serialize>(path: &Path, config_hash: &str, body: &T) -> Result<PathBuf> {
    let mut text = serde_json::to_string_pretty(&Stamped { config_hash, body })?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(path.to_path_buf())
}

/// Shortest round-trip decimal form.
pub fn num(x: f64) -> String {
    format!("{x}")
}
