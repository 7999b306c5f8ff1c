//! Atomic CSV and JSON writers.

use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

/// Formats a double with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// In-memory CSV table, written in one piece.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self { text: format!("{}\n", header.join(",")) }
    }

    pub fn row(&mut self, cells: &[String]) {
        let _ = writeln!(self.text, "{}", cells.join(","));
    }

    pub fn write(&self, dir: &Path, name: &str) -> io::Result<PathBuf> {
        write_atomic(dir, name, self.text.as_bytes())
    }
}

/// Writes `dir/name` through a temporary file in the same directory and a rename.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    std::fs::write(&tmp, bytes)?;
    if let Err(e) = std::fs::rename(&tmp, &target) {
        let _ = std::fs::remove_file(&tmp);
        return Err(e);
    }
    Ok(target)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_precision() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let mut csv = Csv::new(&["a", "b"]);
        csv.row(&["1".into(), num(2.0)]);
        let path = csv.write(dir.path(), "t.csv").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "a,b\n1,2.0000000000000000e0\n");
        write_atomic(dir.path(), "t.csv", b"x").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "x");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
