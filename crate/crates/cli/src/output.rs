//! CSV and JSON writers. Every real number is written with 17 significant
//! digits so that it reads back to the same double.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

/// Version of the CSV column layouts and JSON schemas.
pub const SCHEMA_VERSION: &str = "1";

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

struct ExactFloats;

impl serde_json::ser::Formatter for ExactFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Compact JSON with exact floats; non-finite numbers become `null`.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, ExactFloats);
    value.serialize(&mut ser).expect("in-memory serialization");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Comma-separated table with `#` comment lines before the header row and
/// optional comment lines after the data.
#[derive(Default)]
pub struct Csv {
    head: String,
    body: String,
    rows: usize,
    columns: usize,
}

impl Csv {
    pub fn new(kind: &str) -> Self {
        let mut csv = Self::default();
        csv.comment(&format!("bohmdyn {kind} schema_version={SCHEMA_VERSION}"));
        csv
    }

    pub fn comment(&mut self, text: &str) {
        let target = if self.columns == 0 { &mut self.head } else { &mut self.body };
        let _ = writeln!(target, "# {text}");
    }

    pub fn header(&mut self, columns: &[String]) {
        assert_eq!(self.columns, 0, "header written twice");
        self.comment(&format!("columns: {}", columns.join(" ")));
        self.head.push_str(&columns.join(","));
        self.head.push('\n');
        self.columns = columns.len();
    }

    pub fn row(&mut self, cells: &[String]) {
        assert_eq!(cells.len(), self.columns, "row width differs from header");
        self.body.push_str(&cells.join(","));
        self.body.push('\n');
        self.rows += 1;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn finish(self) -> String {
        self.head + &self.body
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, -1.0 / 3.0, 6.02214076e23, f64::MIN_POSITIVE, 2.0f64.sqrt()] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
            let json = to_json(&v);
            assert_eq!(serde_json::from_str::<f64>(&json).unwrap(), v);
        }
        assert_eq!(to_json(&f64::NAN), "null");
        assert_eq!(to_json(&vec![1u64, 2]), "[1,2]");
    }

    #[test]
    fn csv_layout() {
        let mut csv = Csv::new("test");
        csv.comment("state = ho1d");
        csv.header(&["a".into(), "b".into()]);
        csv.row(&[num(1.0), String::new()]);
        csv.comment("termination = completed");
        let text = csv.finish();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# bohmdyn test schema_version=1");
        assert_eq!(lines[3], "a,b");
        assert_eq!(lines[4], "1.0000000000000000e0,");
        assert_eq!(lines[5], "# termination = completed");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/out.txt");
        write_atomic(&path, "one").unwrap();
        write_atomic(&path, "two").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "two");
        assert_eq!(std::fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
    }
}
