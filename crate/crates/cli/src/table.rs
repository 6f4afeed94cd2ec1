use std::fs;
use std::io::{self, Write};
use std::path::Path;

use crate::manifest::RunManifest;

/// Rows destined for one CSV file. Failed cells are left empty and the row
/// is counted as flagged.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<String>>,
    pub flagged: usize,
    /// One message per flagged row, for stderr.
    pub notes: Vec<String>,
}

impl Table {
    pub fn new(header: &'static [&'static str]) -> Self {
        Self {
            header,
            rows: Vec::new(),
            flagged: 0,
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn flag(&mut self, note: String) {
        self.flagged += 1;
        self.notes.push(note);
    }

    pub fn to_csv(&self, manifest: &RunManifest) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells");
        format!("{}\n{body}", manifest.comment_line())
    }

    /// Writes to `path`, or stdout when `None`.
    pub fn write(&self, path: Option<&Path>, manifest: &RunManifest) -> io::Result<()> {
        let text = self.to_csv(manifest);
        match path {
            Some(p) => fs::write(p, text),
            None => io::stdout().lock().write_all(text.as_bytes()),
        }
    }
}

/// Shortest representation that round-trips; exponent notation for very
/// small or large magnitudes (`{}` on f64 never uses one).
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// The CSV text without its leading comment lines.
pub fn body(csv_text: &str) -> String {
    csv_text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip_compactly() {
        assert_eq!(num(0.01), "0.01");
        assert_eq!(num(1.0), "1.0");
        assert_eq!(num(4.0e-26), "4e-26");
        for x in [1.0 / 3.0, 2.5e-300, 123456.789, -0.0] {
            assert_eq!(num(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn csv_leads_with_the_manifest() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), "x,y".into()]);
        let m = RunManifest::new("unit", 3);
        let text = t.to_csv(&m);
        assert!(text.starts_with("# manifest: command=unit seed=3"));
        assert_eq!(body(&text), "a,b\n1,\"x,y\"\n");
    }
}
