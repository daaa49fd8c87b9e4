//! Strict CSV ingestion of an annual series.
//!
//! Expected shape: a `year,value` header, then one row per year with
//! strictly consecutive integer years and finite decimal values.

use splinecast::SeriesData;

use crate::error::CliError;

pub fn parse_series(text: &str) -> Result<SeriesData, CliError> {
    let mut years: Vec<i64> = Vec::new();
    let mut values: Vec<f64> = Vec::new();

    let mut lines = text.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((number, raw)) => {
                let line = raw.trim_start_matches('\u{feff}').trim();
                if line.is_empty() {
                    continue;
                }
                break (number + 1, line);
            }
            None => return Err(CliError::Ingestion("empty input".into())),
        }
    };
    if !header.1.eq_ignore_ascii_case("year,value") {
        return Err(CliError::Ingestion(format!(
            "line {}: expected header 'year,value', got '{}'",
            header.0, header.1
        )));
    }

    for (number, raw) in lines {
        let line_no = number + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let (year_text, value_text) = match (fields.next(), fields.next(), fields.next()) {
            (Some(y), Some(v), None) => (y.trim(), v.trim()),
            _ => {
                return Err(CliError::Ingestion(format!(
                    "line {line_no}: expected exactly two fields 'year,value'"
                )))
            }
        };
        let year: i64 = year_text.parse().map_err(|_| {
            CliError::Ingestion(format!("line {line_no}: invalid year '{year_text}'"))
        })?;
        let value: f64 = value_text.parse().map_err(|_| {
            CliError::Ingestion(format!("line {line_no}: invalid value '{value_text}'"))
        })?;
        if !value.is_finite() {
            return Err(CliError::Ingestion(format!(
                "line {line_no}: value '{value_text}' is not finite"
            )));
        }
        if let Some(&previous) = years.last() {
            if year == previous {
                return Err(CliError::Ingestion(format!(
                    "line {line_no}: duplicate year {year}"
                )));
            }
            if year != previous + 1 {
                return Err(CliError::Ingestion(format!(
                    "line {line_no}: non-consecutive year {year} after {previous}"
                )));
            }
        }
        years.push(year);
        values.push(value);
    }

    if values.len() < 2 {
        return Err(CliError::Ingestion(format!(
            "need at least 2 data rows, got {}",
            values.len()
        )));
    }
    SeriesData::new(values, years[0]).map_err(|e| CliError::Ingestion(e.to_string()))
}
