//! Plain tables with full-precision CSV round trips.

use super::CliError;

/// 17 significant digits, enough to reproduce any `f64` exactly.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Self {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(&self.headers).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn from_csv(text: &str) -> Result<Self, CliError> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let bad = |e: csv::Error| CliError::Verify(format!("unreadable CSV: {e}"));
        let headers = r.headers().map_err(bad)?.iter().map(String::from).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(String::from).collect()))
            .collect::<Result<Vec<Vec<String>>, _>>()
            .map_err(bad)?;
        Ok(Self { headers, rows })
    }

    pub fn column(&self, name: &str) -> Result<usize, CliError> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Verify(format!("missing column `{name}`")))
    }

    pub fn text<'a>(&'a self, row: usize, name: &str) -> Result<&'a str, CliError> {
        Ok(&self.rows[row][self.column(name)?])
    }

    pub fn float(&self, row: usize, name: &str) -> Result<f64, CliError> {
        let s = self.text(row, name)?;
        s.parse()
            .map_err(|_| CliError::Verify(format!("row {row}: `{name}` = `{s}` is not a number")))
    }

    pub fn opt_float(&self, row: usize, name: &str) -> Result<Option<f64>, CliError> {
        if self.text(row, name)?.is_empty() {
            Ok(None)
        } else {
            self.float(row, name).map(Some)
        }
    }

    pub fn int(&self, row: usize, name: &str) -> Result<i64, CliError> {
        let s = self.text(row, name)?;
        s.parse()
            .map_err(|_| CliError::Verify(format!("row {row}: `{name}` = `{s}` is not an integer")))
    }
}
