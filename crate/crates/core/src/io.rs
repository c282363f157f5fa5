//! CSV conventions shared by every table this crate writes: comma separated,
//! one header row, LF line endings, floats at 17 significant digits.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::error::Result;

/// Formats a float with 17 significant digits.
pub fn float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub fn writer<W: Write>(inner: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(inner)
}

pub fn file_writer(path: impl AsRef<Path>) -> Result<csv::Writer<File>> {
    if let Some(parent) = path.as_ref().parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    Ok(writer(File::create(path)?))
}

pub fn reader(path: impl AsRef<Path>) -> Result<csv::Reader<File>> {
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?)
}
