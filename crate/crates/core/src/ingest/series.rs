use std::collections::BTreeMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use super::IngestError;
use crate::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriceUnit {
    /// $/kWh, used as is.
    Kwh,
    /// $/MWh, scaled by 1e-3 on read.
    Mwh,
}

impl PriceUnit {
    pub fn to_kwh(self) -> f64 {
        match self {
            PriceUnit::Kwh => 1.0,
            PriceUnit::Mwh => 1e-3,
        }
    }
}

impl FromStr for PriceUnit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "kwh" => Ok(PriceUnit::Kwh),
            "mwh" => Ok(PriceUnit::Mwh),
            other => Err(format!(
                "unknown price unit `{other}` (expected kwh or mwh)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    /// Aggregate consumption in kWh.
    Load,
    Price(PriceUnit),
}

/// Complete days of hourly values, days re-indexed densely from 0.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSeries {
    pub kind: SeriesKind,
    pub periods: usize,
    /// Original day labels, in the order of `days`.
    pub day_labels: Vec<i64>,
    pub days: Vec<Vector>,
}

impl RawSeries {
    pub fn len(&self) -> usize {
        self.days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }
}

pub fn parse_csv(path: &Path, kind: SeriesKind) -> Result<RawSeries, IngestError> {
    let file = File::open(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv_reader(file, kind)
}

/// Parses a `day,hour,value` table. The number of periods is one more than
/// the largest hour seen; every day must have all of them.
pub fn parse_csv_reader<R: Read>(reader: R, kind: SeriesKind) -> Result<RawSeries, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| IngestError::MalformedRow {
            line: 1,
            reason: e.to_string(),
        })?
        .clone();
    let names: Vec<&str> = header.iter().collect();
    if names != ["day", "hour", "value"] {
        return Err(IngestError::MalformedRow {
            line: 1,
            reason: format!(
                "expected header `day,hour,value`, found `{}`",
                names.join(",")
            ),
        });
    }

    let scale = match kind {
        SeriesKind::Load => 1.0,
        SeriesKind::Price(unit) => unit.to_kwh(),
    };
    let mut by_day: BTreeMap<i64, BTreeMap<usize, f64>> = BTreeMap::new();
    let mut max_hour = 0usize;
    for record in rdr.records() {
        let record = record.map_err(|e| IngestError::MalformedRow {
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 3 {
            return Err(IngestError::MalformedRow {
                line,
                reason: format!("expected 3 fields, found {}", record.len()),
            });
        }
        let field = |i: usize, what: &str| IngestError::MalformedRow {
            line,
            reason: format!("cannot parse {what} `{}`", &record[i]),
        };
        let day: i64 = record[0].parse().map_err(|_| field(0, "day"))?;
        let hour: usize = record[1].parse().map_err(|_| field(1, "hour"))?;
        let value: f64 = record[2].parse().map_err(|_| field(2, "value"))?;
        if !value.is_finite() {
            return Err(IngestError::NonFiniteValue { line });
        }
        if kind == SeriesKind::Load && value < 0.0 {
            return Err(IngestError::NegativeLoad { line, value });
        }
        if by_day
            .entry(day)
            .or_default()
            .insert(hour, value * scale)
            .is_some()
        {
            return Err(IngestError::DuplicateHour { line, day, hour });
        }
        max_hour = max_hour.max(hour);
    }
    if by_day.is_empty() {
        return Err(IngestError::EmptySeries);
    }

    let periods = max_hour + 1;
    let mut day_labels = Vec::with_capacity(by_day.len());
    let mut days = Vec::with_capacity(by_day.len());
    for (index, (label, hours)) in by_day.into_iter().enumerate() {
        if let Some(hour) = (0..periods).find(|h| !hours.contains_key(h)) {
            return Err(IngestError::MissingHour { day: index, hour });
        }
        day_labels.push(label);
        days.push(Vector::from_iterator(periods, hours.into_values()));
    }
    Ok(RawSeries {
        kind,
        periods,
        day_labels,
        days,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, kind: SeriesKind) -> Result<RawSeries, IngestError> {
        parse_csv_reader(text.as_bytes(), kind)
    }

    #[test]
    fn two_complete_days() {
        let s = parse(
            "day,hour,value\n0,0,1.5\n0,1,2\n1,1,4\n1,0,3\n",
            SeriesKind::Load,
        )
        .unwrap();
        assert_eq!(s.periods, 2);
        assert_eq!(s.len(), 2);
        assert_eq!(s.days[1], Vector::from_column_slice(&[3.0, 4.0]));
    }

    #[test]
    fn days_reindexed_densely() {
        let s = parse("day,hour,value\n20,0,1\n7,0,2\n", SeriesKind::Load).unwrap();
        assert_eq!(s.day_labels, vec![7, 20]);
        assert_eq!(s.days[0][0], 2.0);
    }

    #[test]
    fn missing_hour_reported() {
        let r = parse("day,hour,value\n0,0,1\n0,1,1\n1,0,1\n", SeriesKind::Load);
        assert!(matches!(
            r,
            Err(IngestError::MissingHour { day: 1, hour: 1 })
        ));
    }

    #[test]
    fn nan_rejected() {
        let r = parse("day,hour,value\n0,0,NaN\n", SeriesKind::Load);
        assert!(matches!(r, Err(IngestError::NonFiniteValue { line: 2 })));
    }

    #[test]
    fn malformed_rows_carry_line_numbers() {
        let r = parse("day,hour,value\n0,0,1\n0,x,1\n", SeriesKind::Load);
        assert!(matches!(r, Err(IngestError::MalformedRow { line: 3, .. })));
        let r = parse("day,hour,value\n0,0\n", SeriesKind::Load);
        assert!(matches!(r, Err(IngestError::MalformedRow { line: 2, .. })));
        let r = parse("d,h,v\n0,0,1\n", SeriesKind::Load);
        assert!(matches!(r, Err(IngestError::MalformedRow { line: 1, .. })));
    }

    #[test]
    fn load_must_be_nonnegative_but_prices_may_not_be() {
        assert!(matches!(
            parse("day,hour,value\n0,0,-1\n", SeriesKind::Load),
            Err(IngestError::NegativeLoad { .. })
        ));
        assert!(parse(
            "day,hour,value\n0,0,-1\n",
            SeriesKind::Price(PriceUnit::Kwh)
        )
        .is_ok());
    }

    #[test]
    fn duplicates_and_empty() {
        assert!(matches!(
            parse("day,hour,value\n0,0,1\n0,0,2\n", SeriesKind::Load),
            Err(IngestError::DuplicateHour { line: 3, .. })
        ));
        assert!(matches!(
            parse("day,hour,value\n", SeriesKind::Load),
            Err(IngestError::EmptySeries)
        ));
    }

    #[test]
    fn megawatt_hour_prices_scaled() {
        let s = parse(
            "day,hour,value\n0,0,29.5\n",
            SeriesKind::Price(PriceUnit::Mwh),
        )
        .unwrap();
        assert!((s.days[0][0] - 0.0295).abs() < 1e-15);
        assert_eq!("MWh".parse::<PriceUnit>().unwrap(), PriceUnit::Mwh);
    }
}
