//! Report serialization: JSON with every float at 17 significant digits
//! (lossless for f64 and reproducible byte-for-byte), and small CSV helpers.

use serde::Serialize;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

/// serde_json formatter printing all floats in scientific notation with
/// 17 significant digits.
struct SigFig17;

impl serde_json::ser::Formatter for SigFig17 {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> io::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigFig17);
    value
        .serialize(&mut ser)
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
}

/// 17-significant-digit float for CSV cells.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Resolve an output path against DIOPH_OUT_DIR when relative.
pub fn resolve_path(path: &str) -> PathBuf {
    let p = Path::new(path);
    if p.is_absolute() {
        return p.to_path_buf();
    }
    match std::env::var_os("DIOPH_OUT_DIR") {
        Some(dir) => Path::new(&dir).join(p),
        None => p.to_path_buf(),
    }
}

pub fn write_text(path: &str, text: &str) -> io::Result<()> {
    let full = resolve_path(path);
    if let Some(parent) = full.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(full, text)
}

pub fn write_csv(path: &str, header: &str, rows: &[Vec<String>]) -> io::Result<()> {
    let mut text = String::with_capacity(rows.len() * 32 + header.len() + 1);
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    write_text(path, &text)
}
