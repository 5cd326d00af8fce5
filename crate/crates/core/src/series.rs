//! Time-series container and the plain-text formats used to move series in
//! and out of the library.
//!
//! Input is a headerless CSV of `timestamp,value` records. Lines starting with
//! `#` and blank lines are ignored; columns after the second are ignored so
//! that reconstruction exports can be read back as series.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Real values observed at strictly increasing timestamps.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    timestamps: Vec<f64>,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(timestamps: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if timestamps.len() != values.len() {
            return Err(Error::LengthMismatch {
                timestamps: timestamps.len(),
                values: values.len(),
            });
        }
        if timestamps.is_empty() {
            return Err(Error::EmptySeries);
        }
        for (index, (x, y)) in timestamps.iter().zip(&values).enumerate() {
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::NonFinite { index });
            }
        }
        if let Some(index) = timestamps.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::NonMonotone { index: index + 1 });
        }
        Ok(Self { timestamps, values })
    }

    /// Series sampled at `1, 2, ..., n`.
    pub fn indexed(values: Vec<f64>) -> Result<Self> {
        let timestamps = (1..=values.len()).map(|i| i as f64).collect();
        Self::new(timestamps, values)
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    /// Always false; construction rejects empty series.
    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The first `len` points, or `None` when `len` is zero or too large.
    pub fn prefix(&self, len: usize) -> Option<TimeSeries> {
        if len == 0 || len > self.len() {
            return None;
        }
        Some(TimeSeries {
            timestamps: self.timestamps[..len].to_vec(),
            values: self.values[..len].to_vec(),
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.timestamps.iter().copied().zip(self.values.iter().copied())
    }

    pub fn read_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(file, &path.display().to_string())
    }

    /// Parses a series, using `origin` to label diagnostics.
    pub fn read(reader: impl Read, origin: &str) -> Result<Self> {
        let mut timestamps = Vec::new();
        let mut values = Vec::new();
        for record in Records::new(reader, origin) {
            let record = record?;
            let (x, y) = record.pair()?;
            if let Some(&last) = timestamps.last() {
                if x <= last {
                    return Err(record.error(format!(
                        "timestamp {x} is not greater than the previous timestamp {last}"
                    )));
                }
            }
            timestamps.push(x);
            values.push(y);
        }
        if timestamps.is_empty() {
            return Err(Error::Parse {
                path: origin.to_string(),
                line: 0,
                message: "no data records".into(),
            });
        }
        Self::new(timestamps, values)
    }

    pub fn write(&self, mut out: impl Write) -> io::Result<()> {
        for (x, y) in self.iter() {
            writeln!(out, "{},{}", fmt_real(x), fmt_real(y))?;
        }
        Ok(())
    }
}

/// One CSV record with its 1-based source line.
#[derive(Debug, Clone)]
pub(crate) struct Record {
    pub origin: String,
    pub line: u64,
    pub fields: Vec<String>,
}

impl Record {
    pub fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.origin.clone(),
            line: self.line,
            message: message.into(),
        }
    }

    pub fn real(&self, column: usize) -> Result<f64> {
        let raw = self
            .fields
            .get(column)
            .ok_or_else(|| self.error(format!("expected at least {} columns", column + 1)))?;
        let value: f64 = raw
            .trim()
            .parse()
            .map_err(|_| self.error(format!("`{raw}` is not a real number")))?;
        if !value.is_finite() {
            return Err(self.error(format!("`{raw}` is not finite")));
        }
        Ok(value)
    }

    fn pair(&self) -> Result<(f64, f64)> {
        Ok((self.real(0)?, self.real(1)?))
    }
}

/// Iterator over the non-comment records of a CSV stream.
pub(crate) struct Records<R: Read> {
    inner: csv::StringRecordsIntoIter<R>,
    origin: String,
}

impl<R: Read> Records<R> {
    pub fn new(reader: R, origin: &str) -> Self {
        let inner = csv::ReaderBuilder::new()
            .has_headers(false)
            .quoting(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader)
            .into_records();
        Self {
            inner,
            origin: origin.to_string(),
        }
    }
}

impl<R: Read> Iterator for Records<R> {
    type Item = Result<Record>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let record = match self.inner.next()? {
                Ok(record) => record,
                Err(e) => {
                    let line = e.position().map_or(0, |p| p.line());
                    return Some(Err(Error::Parse {
                        path: self.origin.clone(),
                        line,
                        message: e.to_string(),
                    }));
                }
            };
            // comments are skipped here rather than by the reader so that
            // reported line numbers still count them
            let comment = record.get(0).is_some_and(|f| f.starts_with('#'));
            if comment || record.iter().all(|f| f.is_empty()) {
                continue;
            }
            let line = record.position().map_or(0, |p| p.line());
            return Some(Ok(Record {
                origin: self.origin.clone(),
                line,
                fields: record.iter().map(str::to_string).collect(),
            }));
        }
    }
}

/// Streams `timestamp,value` pairs from a reader without collecting them.
///
/// Monotonicity is checked as records arrive.
pub struct PairReader<R: Read> {
    records: Records<BufReader<R>>,
    last: Option<f64>,
}

impl<R: Read> PairReader<R> {
    pub fn new(reader: R, origin: &str) -> Self {
        Self {
            records: Records::new(BufReader::new(reader), origin),
            last: None,
        }
    }
}

impl<R: Read> Iterator for PairReader<R> {
    type Item = Result<(f64, f64)>;

    fn next(&mut self) -> Option<Self::Item> {
        let record = match self.records.next()? {
            Ok(r) => r,
            Err(e) => return Some(Err(e)),
        };
        let pair = match record.pair() {
            Ok(p) => p,
            Err(e) => return Some(Err(e)),
        };
        if let Some(last) = self.last {
            if pair.0 <= last {
                return Some(Err(record.error(format!(
                    "timestamp {} is not greater than the previous timestamp {last}",
                    pair.0
                ))));
            }
        }
        self.last = Some(pair.0);
        Some(Ok(pair))
    }
}

/// Reads a single column of reals, one per line.
pub(crate) fn read_column(reader: impl BufRead, origin: &str) -> Result<Vec<f64>> {
    Records::new(reader, origin)
        .map(|r| r.and_then(|r| r.real(0)))
        .collect()
}

/// Formats a real with at most 12 significant digits.
pub fn fmt_real(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    format!("{rounded}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_increasing_timestamps() {
        let err = TimeSeries::new(vec![1.0, 1.0], vec![0.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::NonMonotone { index: 1 }));
        assert!(matches!(
            TimeSeries::new(vec![], vec![]),
            Err(Error::EmptySeries)
        ));
        assert!(matches!(
            TimeSeries::new(vec![1.0], vec![]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn parses_comments_and_extra_columns() {
        let text = "# timestamp,original,reconstructed\n1,0,0.5\n\n2, 3 ,2\n# mid comment\n3,0,1\n";
        let s = TimeSeries::read(text.as_bytes(), "mem").unwrap();
        assert_eq!(s.timestamps(), &[1.0, 2.0, 3.0]);
        assert_eq!(s.values(), &[0.0, 3.0, 0.0]);
    }

    #[test]
    fn reports_line_numbers() {
        let text = "1,0\n2,x\n";
        match TimeSeries::read(text.as_bytes(), "in.csv").unwrap_err() {
            Error::Parse { path, line, .. } => {
                assert_eq!(path, "in.csv");
                assert_eq!(line, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
        match TimeSeries::read("1,0\n# c\n1,2\n".as_bytes(), "in.csv").unwrap_err() {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 3);
                assert!(message.contains("not greater"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(TimeSeries::read("5\n".as_bytes(), "in.csv").is_err());
    }

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_real(15.0 / 7.0), "2.14285714286");
        assert_eq!(fmt_real(1.0), "1");
        assert_eq!(fmt_real(-0.25), "-0.25");
        assert_eq!(fmt_real(500000.0), "500000");
    }
}
