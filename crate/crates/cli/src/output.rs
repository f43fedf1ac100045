//! CSV tables with a `# ` comment header, written atomically.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};

/// 17 significant digits.
pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    comments: Vec<String>,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            comments: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn comment(&mut self, line: String) {
        self.comments.push(line);
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// `header` lines first, then the table's own comments, then the CSV body.
    pub fn render(&self, header: &[String]) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        for line in header.iter().chain(&self.comments) {
            writeln!(out, "# {line}")?;
        }
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        drop(w);
        Ok(out)
    }
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let mut tmp =
        tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating a file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(dir.join(name))
        .with_context(|| format!("renaming into {name}"))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits() {
        let x = 0.1 + 0.2;
        assert_eq!(fmt(x).parse::<f64>().unwrap(), x);
        assert_eq!(fmt(-1.0), "-1.0000000000000000e0");
    }

    #[test]
    fn render_puts_comments_before_the_header_row() {
        let mut t = Table::new(&["a", "b"]);
        t.comment("note".into());
        t.push(vec!["1".into(), "x;y".into()]);
        let text = String::from_utf8(t.render(&["cfg = 1".into()]).unwrap()).unwrap();
        assert_eq!(text, "# cfg = 1\n# note\na,b\n1,x;y\n");
    }

    #[test]
    fn atomic_write_replaces_the_file() {
        let dir = tempfile::tempdir().unwrap();
        write_atomic(dir.path(), "f.csv", b"one").unwrap();
        write_atomic(dir.path(), "f.csv", b"two").unwrap();
        assert_eq!(std::fs::read(dir.path().join("f.csv")).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
