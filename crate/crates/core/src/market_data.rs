//! Quote series and stock metadata ingestion.
//!
//! Quote files are headerless two-column CSV (`<ISO-8601 timestamp>,<price>`).
//! Metadata files carry the header `ticker,sector,market_cap_kusd,percentile`.
//! Nothing is re-sorted or cleaned: out-of-order or non-positive records are
//! rejected with the offending line.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, NaiveDateTime, SecondsFormat, Utc};

use crate::error::{Error, Result};

/// Ordered intraday quotes for one stock.
#[derive(Debug, Clone, PartialEq)]
pub struct QuoteSeries {
    ticker: String,
    timestamps: Vec<DateTime<Utc>>,
    prices: Vec<f64>,
}

impl QuoteSeries {
    /// Builds a validated series. Prices must be finite and positive and
    /// timestamps strictly increasing.
    pub fn new(
        ticker: impl Into<String>,
        timestamps: Vec<DateTime<Utc>>,
        prices: Vec<f64>,
    ) -> Result<Self> {
        if timestamps.len() != prices.len() {
            return Err(Error::Shape { expected: timestamps.len(), got: prices.len() });
        }
        if prices.is_empty() {
            return Err(Error::Size("quote series is empty".into()));
        }
        if let Some((i, p)) = prices.iter().enumerate().find(|(_, p)| !(p.is_finite() && **p > 0.0)) {
            return Err(Error::Validation(format!("price #{} is not positive: {p}", i + 1)));
        }
        if let Some(i) = timestamps.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::Ordering(format!(
                "timestamp #{} ({}) does not follow #{} ({})",
                i + 2,
                timestamps[i + 1],
                i + 1,
                timestamps[i]
            )));
        }
        Ok(Self { ticker: ticker.into(), timestamps, prices })
    }

    pub fn ticker(&self) -> &str {
        &self.ticker
    }

    pub fn timestamps(&self) -> &[DateTime<Utc>] {
        &self.timestamps
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }
}

/// Accepts RFC 3339 with an offset, or a naive `YYYY-MM-DDTHH:MM:SS[.f]`
/// (space separator allowed) interpreted as UTC.
pub fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.with_timezone(&Utc));
    }
    ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M"]
        .iter()
        .find_map(|fmt| NaiveDateTime::parse_from_str(s, fmt).ok())
        .map(|n| n.and_utc())
}

pub fn format_timestamp(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::AutoSi, true)
}

/// Loads a quote file. The ticker is taken from the file stem.
pub fn load_quotes(path: impl AsRef<Path>) -> Result<QuoteSeries> {
    let path = path.as_ref();
    let ticker = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let file = File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
    read_quotes(ticker, file, path)
}

/// Parses quote records from any reader; `origin` is only used in messages.
pub fn read_quotes<R: Read>(ticker: impl Into<String>, reader: R, origin: &Path) -> Result<QuoteSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut timestamps = Vec::new();
    let mut prices = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            line: e.position().map(|p| p.line()).unwrap_or(0),
            msg: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let parse_err = |msg: String| Error::Parse { path: origin.to_path_buf(), line, msg };
        if record.len() != 2 {
            return Err(parse_err(format!("expected 2 fields, found {}", record.len())));
        }
        let t = parse_timestamp(&record[0])
            .ok_or_else(|| parse_err(format!("invalid timestamp {:?}", &record[0])))?;
        let p = f64::from_str(&record[1])
            .map_err(|_| parse_err(format!("invalid price {:?}", &record[1])))?;
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::Validation(format!(
                "{}:{line}: price must be positive, got {p}",
                origin.display()
            )));
        }
        if let Some(prev) = timestamps.last() {
            if t <= *prev {
                return Err(Error::Ordering(format!(
                    "{}:{line}: timestamp {} is not after {}",
                    origin.display(),
                    format_timestamp(&t),
                    format_timestamp(prev)
                )));
            }
        }
        timestamps.push(t);
        prices.push(p);
    }
    QuoteSeries::new(ticker, timestamps, prices)
}

/// Writes a series in the format [`load_quotes`] reads. Prices use the
/// shortest representation that parses back to the same `f64`.
pub fn write_quotes<W: Write>(series: &QuoteSeries, mut out: W) -> std::io::Result<()> {
    for (t, p) in series.timestamps.iter().zip(&series.prices) {
        writeln!(out, "{},{}", format_timestamp(t), p)?;
    }
    out.flush()
}

/// Capitalization quartile of a stock within its index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PercentileGroup {
    Q0To25,
    Q25To50,
    Q50To75,
    Q75To100,
}

impl PercentileGroup {
    pub const ALL: [PercentileGroup; 4] = [Self::Q0To25, Self::Q25To50, Self::Q50To75, Self::Q75To100];

    /// 1-based index used in output file names (`group_1.csv` is 0-25).
    pub fn index(self) -> usize {
        self as usize + 1
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Q0To25 => "0-25",
            Self::Q25To50 => "25-50",
            Self::Q50To75 => "50-75",
            Self::Q75To100 => "75-100",
        }
    }
}

impl fmt::Display for PercentileGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for PercentileGroup {
    type Err = Error;

    /// Accepts `0-25`, `0–25` (en dash) and `0th-25th` style labels.
    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .replace(['\u{2013}', '\u{2014}'], "-")
            .replace("th", "")
            .chars()
            .filter(|c| !c.is_whitespace())
            .collect();
        match norm.as_str() {
            "0-25" => Ok(Self::Q0To25),
            "25-50" => Ok(Self::Q25To50),
            "50-75" => Ok(Self::Q50To75),
            "75-100" => Ok(Self::Q75To100),
            _ => Err(Error::Validation(format!("unknown percentile group {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StockMeta {
    pub ticker: String,
    pub sector: String,
    /// Thousand USD.
    pub market_cap: f64,
    pub percentile_group: PercentileGroup,
}

const META_COLUMNS: [&str; 4] = ["ticker", "sector", "market_cap_kusd", "percentile"];

pub fn load_metadata(path: impl AsRef<Path>) -> Result<Vec<StockMeta>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
    read_metadata(file, path)
}

pub fn read_metadata<R: Read>(reader: R, origin: &Path) -> Result<Vec<StockMeta>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Schema(format!("{}: unreadable header: {e}", origin.display())))?
        .clone();
    let mut col = [0usize; 4];
    for (slot, name) in col.iter_mut().zip(META_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("{}: missing column {name:?}", origin.display())))?;
    }

    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            line: e.position().map(|p| p.line()).unwrap_or(0),
            msg: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize| record.get(col[i]).unwrap_or("");
        let ticker = field(0).to_string();
        if ticker.is_empty() {
            return Err(Error::Validation(format!("{}:{line}: empty ticker", origin.display())));
        }
        let market_cap = f64::from_str(&field(2).replace(',', "")).map_err(|_| Error::Parse {
            path: origin.to_path_buf(),
            line,
            msg: format!("invalid market cap {:?}", field(2)),
        })?;
        if !(market_cap.is_finite() && market_cap > 0.0) {
            return Err(Error::Validation(format!(
                "{}:{line}: market cap must be positive, got {market_cap}",
                origin.display()
            )));
        }
        let percentile_group = field(3)
            .parse::<PercentileGroup>()
            .map_err(|e| Error::Validation(format!("{}:{line}: {e}", origin.display())))?;
        if !seen.insert(ticker.clone()) {
            return Err(Error::Validation(format!("{}:{line}: duplicate ticker {ticker}", origin.display())));
        }
        out.push(StockMeta { ticker, sector: field(1).to_string(), market_cap, percentile_group });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn origin() -> &'static Path {
        Path::new("test.csv")
    }

    #[test]
    fn two_rows() {
        let q = read_quotes("X", "2015-09-16T14:00:00Z,100.0\n2015-09-16T14:01:00Z,101.0\n".as_bytes(), origin())
            .unwrap();
        assert_eq!(q.len(), 2);
        assert_eq!(q.prices(), &[100.0, 101.0]);
    }

    #[test]
    fn negative_price_rejected() {
        let err = read_quotes("X", "2015-09-16T14:00:00Z,-5.0\n".as_bytes(), origin()).unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");
    }

    #[test]
    fn zero_price_rejected() {
        let err = read_quotes("X", "2015-09-16T14:00:00Z,0\n".as_bytes(), origin()).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn malformed_records_report_line() {
        let text = "2015-09-16T14:00:00Z,100\n2015-09-16T14:01:00Z,abc\n";
        match read_quotes("X", text.as_bytes(), origin()).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            e => panic!("unexpected {e}"),
        }
        let text = "2015-09-16T14:00:00Z,100\nnot-a-time,1\n";
        assert!(matches!(read_quotes("X", text.as_bytes(), origin()), Err(Error::Parse { line: 2, .. })));
        let text = "2015-09-16T14:00:00Z,100,7\n";
        assert!(matches!(read_quotes("X", text.as_bytes(), origin()), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn non_increasing_timestamps_rejected() {
        let text = "2015-09-16T14:01:00Z,100\n2015-09-16T14:00:00Z,101\n";
        assert!(matches!(read_quotes("X", text.as_bytes(), origin()), Err(Error::Ordering(_))));
        let text = "2015-09-16T14:00:00Z,100\n2015-09-16T14:00:00Z,101\n";
        assert!(matches!(read_quotes("X", text.as_bytes(), origin()), Err(Error::Ordering(_))));
    }

    #[test]
    fn irregular_spacing_and_naive_timestamps() {
        let text = "2015-09-16 14:00:00,10\n2015-09-16T14:07:30,11\n2015-09-18T20:16:00-03:00,12\n";
        let q = read_quotes("X", text.as_bytes(), origin()).unwrap();
        assert_eq!(q.len(), 3);
    }

    #[test]
    fn thousand_rows() {
        let mut text = String::new();
        let start = parse_timestamp("2015-09-16T14:00:00Z").unwrap();
        for i in 0..1000 {
            let t = start + chrono::Duration::minutes(i);
            text.push_str(&format!("{},{}\n", format_timestamp(&t), 20.0 + i as f64 * 0.01));
        }
        let q = read_quotes("USIM5", text.as_bytes(), origin()).unwrap();
        assert_eq!(q.len(), 1000);
    }

    #[test]
    fn decimal_parse_is_exact() {
        let q = read_quotes("X", "2015-09-16T14:00:00Z,13.370000000000001\n".as_bytes(), origin()).unwrap();
        assert_eq!(q.prices()[0].to_bits(), 13.370000000000001f64.to_bits());
    }

    const META: &str = "ticker,sector,market_cap_kusd,percentile\n\
        ABEV3,Consumer Staples,93084295,75\u{2013}100\n\
        USIM5,Materials,2164639,0-25\n";

    #[test]
    fn metadata_rows() {
        let m = read_metadata(META.as_bytes(), origin()).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m[0].ticker, "ABEV3");
        assert_eq!(m[0].market_cap, 93_084_295.0);
        assert_eq!(m[0].percentile_group, PercentileGroup::Q75To100);
        assert_eq!(m[1].percentile_group, PercentileGroup::Q0To25);
        assert_eq!(m[1].sector, "Materials");
    }

    #[test]
    fn metadata_empty_and_errors() {
        let empty = read_metadata("ticker,sector,market_cap_kusd,percentile\n".as_bytes(), origin()).unwrap();
        assert!(empty.is_empty());

        let missing = "ticker,sector,percentile\nA,B,0-25\n";
        assert!(matches!(read_metadata(missing.as_bytes(), origin()), Err(Error::Schema(_))));

        let dup = format!("{META}USIM5,Materials,1,0-25\n");
        assert!(matches!(read_metadata(dup.as_bytes(), origin()), Err(Error::Validation(_))));

        let bad_group = "ticker,sector,market_cap_kusd,percentile\nA,B,1,10-20\n";
        assert!(matches!(read_metadata(bad_group.as_bytes(), origin()), Err(Error::Validation(_))));
    }

    #[test]
    fn percentile_labels() {
        assert_eq!("75th \u{2013} 100th".parse::<PercentileGroup>().unwrap(), PercentileGroup::Q75To100);
        for g in PercentileGroup::ALL {
            assert_eq!(g.label().parse::<PercentileGroup>().unwrap(), g);
        }
    }

    proptest! {
        #[test]
        fn write_then_load_is_identity(
            prices in prop::collection::vec(1e-6f64..1e6, 1..50),
            gaps in prop::collection::vec(1i64..10_000, 50),
        ) {
            let mut t = parse_timestamp("2015-09-16T14:00:00Z").unwrap();
            let mut ts = Vec::new();
            for g in gaps.iter().take(prices.len()) {
                t += chrono::Duration::milliseconds(*g);
                ts.push(t);
            }
            let q = QuoteSeries::new("T", ts, prices).unwrap();
            let mut buf = Vec::new();
            write_quotes(&q, &mut buf).unwrap();
            let back = read_quotes("T", buf.as_slice(), origin()).unwrap();
            prop_assert_eq!(back, q);
        }
    }
}
