//! Daily OHLCV bars from `date,open,high,low,close,volume` CSV.

use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MARKET_CSV_HEADER: [&str; 6] = ["date", "open", "high", "low", "close", "volume"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketBar {
    pub date: NaiveDate,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub volume: f64,
}

impl MarketBar {
    /// Rejects inconsistent bars instead of repairing them.
    pub fn validate(&self) -> Result<()> {
        let prices = [self.open, self.high, self.low, self.close];
        if prices.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::data(format!("{}: prices must be positive and finite", self.date)));
        }
        if !(self.volume.is_finite() && self.volume >= 0.0) {
            return Err(Error::data(format!("{}: volume must be >= 0", self.date)));
        }
        if self.low > self.open.min(self.close) {
            return Err(Error::data(format!("{}: low is above open/close", self.date)));
        }
        if self.high < self.open.max(self.close) {
            return Err(Error::data(format!("{}: high is below open/close", self.date)));
        }
        if self.low > self.high {
            return Err(Error::data(format!("{}: low is above high", self.date)));
        }
        Ok(())
    }
}

pub(crate) fn parse_date(s: &str) -> Result<NaiveDate> {
    let b = s.as_bytes();
    let shaped = b.len() == 10
        && b[4] == b'-'
        && b[7] == b'-'
        && b.iter().enumerate().all(|(i, c)| i == 4 || i == 7 || c.is_ascii_digit());
    if !shaped {
        return Err(Error::data(format!("date {s:?} is not YYYY-MM-DD")));
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|e| Error::data(format!("date {s:?}: {e}")))
}

fn parse_number(field: &str, name: &str, line: u64) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| Error::data(format!("line {line}: {name} {field:?} is not a decimal number")))?;
    if !v.is_finite() {
        return Err(Error::data(format!("line {line}: {name} is not finite")));
    }
    Ok(v)
}

/// Parses and validates every bar. Rows are returned in file order.
pub fn parse_market_csv<R: Read>(reader: R) -> Result<Vec<MarketBar>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::None)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| Error::data(format!("market csv header: {e}")))?
        .clone();
    if header.iter().ne(MARKET_CSV_HEADER) {
        return Err(Error::data(format!(
            "market csv header must be exactly {:?}, got {:?}",
            MARKET_CSV_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut bars = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::data(format!("market csv: {e}")))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 6 {
            return Err(Error::data(format!("line {line}: expected 6 fields")));
        }
        let bar = MarketBar {
            date: parse_date(&record[0]).map_err(|e| Error::data(format!("line {line}: {e}")))?,
            open: parse_number(&record[1], "open", line)?,
            high: parse_number(&record[2], "high", line)?,
            low: parse_number(&record[3], "low", line)?,
            close: parse_number(&record[4], "close", line)?,
            volume: parse_number(&record[5], "volume", line)?,
        };
        bar.validate()?;
        bars.push(bar);
    }
    Ok(bars)
}

pub fn read_market_csv(path: &Path) -> Result<Vec<MarketBar>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_market_csv(file)
}

pub fn write_market_csv(path: &Path, bars: &[MarketBar]) -> Result<()> {
    let mut out = MARKET_CSV_HEADER.join(",");
    out.push('\n');
    for b in bars {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            b.date, b.open, b.high, b.low, b.close, b.volume
        ));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = "date,open,high,low,close,volume\n\
        2024-01-02,10,11,9.5,10.5,1000\n\
        2024-01-03,10.5,10.9,10.1,10.2,0\n";

    #[test]
    fn parses_valid_rows() {
        let bars = parse_market_csv(GOOD.as_bytes()).unwrap();
        assert_eq!(bars.len(), 2);
        assert_eq!(bars[1].close, 10.2);
        assert_eq!(bars[0].date.to_string(), "2024-01-02");
    }

    #[test]
    fn rejects_bad_header_and_values() {
        let cases = [
            "Date,open,high,low,close,volume\n2024-01-02,1,1,1,1,1\n",
            "date,open,high,low,close\n2024-01-02,1,1,1,1\n",
            "date,open,high,low,close,volume\n2024/01/02,1,1,1,1,1\n",
            "date,open,high,low,close,volume\n2024-01-02,\"1,000\",1,1,1,1\n",
            "date,open,high,low,close,volume\n2024-01-02,10,9,8,10,1\n",
            "date,open,high,low,close,volume\n2024-01-02,10,12,10.5,11,1\n",
            "date,open,high,low,close,volume\n2024-01-02,10,12,9,11,-1\n",
            "date,open,high,low,close,volume\n2024-01-02,10,12,9,11,NaN\n",
            "date,open,high,low,close,volume\n2024-02-30,10,12,9,11,1\n",
            "date,open,high,low,close,volume\n2024-01-02,10,12,9,11\n",
        ];
        for c in cases {
            assert!(matches!(parse_market_csv(c.as_bytes()), Err(Error::Data(_))), "{c}");
        }
    }

    #[test]
    fn write_then_read() {
        let bars = parse_market_csv(GOOD.as_bytes()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        write_market_csv(&p, &bars).unwrap();
        assert_eq!(read_market_csv(&p).unwrap(), bars);
    }
}
