//! All-numeric CSV ingestion and emission.
//!
//! Dialect: comma-separated, first row is the header, UTF-8, decimal point.
//! Scientific notation is accepted on input; output prints 17 significant
//! digits so that parse -> serialize -> parse is the identity on `f64`.

use std::fs::File;
use std::path::Path;

use crate::cli_error::CliError;

/// A parsed CSV file: header names and one `f64` row per record.
#[derive(Clone, Debug, PartialEq)]
pub struct RawTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl RawTable {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    pub fn column(&self, index: usize) -> Vec<f64> {
        self.rows.iter().map(|row| row[index]).collect()
    }
}

/// 17 significant digits: enough to reproduce any `f64` bit pattern.
pub fn format_float(value: f64) -> String {
    format!("{value:.16e}")
}

pub fn read_table(path: &Path) -> Result<RawTable, CliError> {
    let file = File::open(path)
        .map_err(|e| CliError::Io(format!("cannot open {}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::Validation(format!("{}: bad header: {e}", path.display())))?
        .iter()
        .map(str::to_string)
        .collect();

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => CliError::Io(format!("{}: {e}", path.display())),
            _ => CliError::Validation(format!("{}: {e}", path.display())),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != headers.len() {
            return Err(CliError::Validation(format!(
                "{}: line {line}: expected {} fields, got {}",
                path.display(),
                headers.len(),
                record.len()
            )));
        }
        let mut row = Vec::with_capacity(record.len());
        for (column, field) in record.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| {
                CliError::Validation(format!(
                    "{}: line {line}: cannot parse '{field}' in column '{}' as a number",
                    path.display(),
                    headers[column]
                ))
            })?;
            row.push(value);
        }
        rows.push(row);
    }
    Ok(RawTable { headers, rows })
}

pub fn write_table(path: &Path, table: &RawTable) -> Result<(), CliError> {
    let file = File::create(path)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
    let mut writer = csv::Writer::from_writer(file);
    writer
        .write_record(&table.headers)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    for row in &table.rows {
        let fields: Vec<String> = row.iter().map(|&v| format_float(v)).collect();
        writer
            .write_record(&fields)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    writer
        .flush()
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn parses_headers_and_scientific_notation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut f = File::create(&path).unwrap();
        writeln!(f, "score,response\n1.25e-1,1\n0.5,0").unwrap();
        let table = read_table(&path).unwrap();
        assert_eq!(table.headers, vec!["score", "response"]);
        assert_eq!(table.rows, vec![vec![0.125, 1.0], vec![0.5, 0.0]]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut f = File::create(&path).unwrap();
        writeln!(f, "score,response\n0.5,1\nabc,0").unwrap();
        let err = read_table(&path).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        let msg = err.to_string();
        assert!(msg.contains("line 3"), "message was: {msg}");
        assert!(msg.contains("'abc'"));
        assert!(msg.contains("'score'"));
    }

    #[test]
    fn missing_file_is_an_io_error() {
        let err = read_table(Path::new("/nonexistent/nowhere.csv")).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let table = RawTable {
            headers: vec!["a".into(), "b".into()],
            rows: vec![
                vec![0.1, 1.0 / 3.0],
                vec![f64::MIN_POSITIVE, 1.2345678901234567e300],
                vec![-0.0, 9.0 / 96.0],
            ],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rt.csv");
        write_table(&path, &table).unwrap();
        let back = read_table(&path).unwrap();
        assert_eq!(back.headers, table.headers);
        for (row_a, row_b) in table.rows.iter().zip(&back.rows) {
            for (a, b) in row_a.iter().zip(row_b) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
