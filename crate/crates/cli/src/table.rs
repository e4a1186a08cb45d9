use std::io::Write;

/// Floats with 17 significant digits, so values round-trip exactly.
pub fn float(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v:.16e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub cells: Vec<String>,
    pub error: Option<String>,
}

impl Row {
    pub fn ok(cells: Vec<String>) -> Self {
        Self { cells, error: None }
    }

    pub fn failed(cells: Vec<String>, error: impl Into<String>) -> Self {
        Self { cells, error: Some(error.into()) }
    }
}

/// Buffered CSV output. An `error` column is appended only when at least
/// one row failed, so clean runs keep the documented schema.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Row>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn error_count(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let idx = self.header.iter().position(|h| *h == name)?;
        Some(self.rows.iter().map(|r| r.cells[idx].as_str()).collect())
    }

    pub fn write<W: Write>(&self, out: W) -> csv::Result<()> {
        let with_errors = self.error_count() > 0;
        let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        let mut header: Vec<&str> = self.header.clone();
        if with_errors {
            header.push("error");
        }
        wtr.write_record(&header)?;
        for row in &self.rows {
            if with_errors {
                let note = row.error.as_deref().unwrap_or("");
                wtr.write_record(row.cells.iter().map(String::as_str).chain(std::iter::once(note)))?;
            } else {
                wtr.write_record(&row.cells)?;
            }
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}
