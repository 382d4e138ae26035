//! CSV ingestion and return transforms.
//!
//! Dialect: comma separated, dot decimal, ISO-8601 dates, optional header
//! line (detected when its value field does not parse as a number).

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use mfb_core::Series;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Smallest series the battery accepts after slicing and transforming.
pub const MIN_LEN: usize = 30;

#[derive(Debug, Error, PartialEq)]
pub enum IngestError {
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: price {value} must be positive for log returns")]
    NonPositivePrice { line: usize, value: f64 },
    #[error("no observations left after slicing")]
    EmptyAfterSlicing,
    #[error("a date range needs the date,value format")]
    RangeWithoutDates,
    #[error("series has {got} observations after transformation; at least {needed} are needed")]
    TooShort { needed: usize, got: usize },
    #[error(transparent)]
    Series(#[from] mfb_core::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    CsvSingleColumn,
    CsvDateValue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    #[default]
    None,
    /// `100 ln(P_t / P_(t-1))`
    LogReturn100,
    Diff,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestSpec {
    pub path: PathBuf,
    pub format: Format,
    pub transform: Transform,
    /// Inclusive bounds.
    pub date_range: Option<(NaiveDate, NaiveDate)>,
    pub demean: bool,
}

/// One parsed observation with its 1-based source line.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub line: usize,
    pub date: Option<NaiveDate>,
    pub value: f64,
}

fn parse_value(field: &str, line: usize) -> Result<f64, IngestError> {
    let v: f64 = field.trim().parse().map_err(|_| IngestError::Parse {
        line,
        message: format!("`{}` is not a number", field.trim()),
    })?;
    if !v.is_finite() {
        return Err(IngestError::Parse {
            line,
            message: format!("`{}` is not finite", field.trim()),
        });
    }
    Ok(v)
}

fn parse_date(field: &str, line: usize) -> Result<NaiveDate, IngestError> {
    NaiveDate::parse_from_str(field.trim(), "%Y-%m-%d").map_err(|_| IngestError::Parse {
        line,
        message: format!("`{}` is not an ISO-8601 date", field.trim()),
    })
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

/// Guesses the format from the first non-empty line.
pub fn detect_format(text: &str) -> Format {
    match data_lines(text).next() {
        Some((_, l)) if l.contains(',') => Format::CsvDateValue,
        _ => Format::CsvSingleColumn,
    }
}

pub fn parse_records(text: &str, format: Format) -> Result<Vec<Record>, IngestError> {
    let mut out = Vec::new();
    for (idx, (line, content)) in data_lines(text).enumerate() {
        let fields: Vec<&str> = content.split(',').collect();
        let (date_field, value_field) = match (format, fields.as_slice()) {
            (Format::CsvSingleColumn, [v]) => (None, *v),
            (Format::CsvDateValue, [d, v]) => (Some(*d), *v),
            (_, f) => {
                return Err(IngestError::Parse {
                    line,
                    message: format!(
                        "expected {} field(s), found {}",
                        if format == Format::CsvSingleColumn {
                            1
                        } else {
                            2
                        },
                        f.len()
                    ),
                })
            }
        };
        if idx == 0 && value_field.trim().parse::<f64>().is_err() {
            continue; // header
        }
        out.push(Record {
            line,
            date: date_field.map(|d| parse_date(d, line)).transpose()?,
            value: parse_value(value_field, line)?,
        });
    }
    if format == Format::CsvDateValue {
        out.sort_by_key(|r| r.date);
    }
    Ok(out)
}

pub fn slice_dates(
    records: Vec<Record>,
    range: Option<(NaiveDate, NaiveDate)>,
) -> Result<Vec<Record>, IngestError> {
    let Some((start, end)) = range else {
        return Ok(records);
    };
    let mut kept = Vec::with_capacity(records.len());
    for r in records {
        let date = r.date.ok_or(IngestError::RangeWithoutDates)?;
        if start <= date && date <= end {
            kept.push(r);
        }
    }
    if kept.is_empty() {
        return Err(IngestError::EmptyAfterSlicing);
    }
    Ok(kept)
}

pub fn apply_transform(records: &[Record], transform: Transform) -> Result<Vec<f64>, IngestError> {
    match transform {
        Transform::None => Ok(records.iter().map(|r| r.value).collect()),
        Transform::Diff => Ok(records
            .windows(2)
            .map(|w| w[1].value - w[0].value)
            .collect()),
        Transform::LogReturn100 => {
            if let Some(r) = records.iter().find(|r| r.value <= 0.0) {
                return Err(IngestError::NonPositivePrice {
                    line: r.line,
                    value: r.value,
                });
            }
            Ok(records
                .windows(2)
                .map(|w| 100.0 * (w[1].value / w[0].value).ln())
                .collect())
        }
    }
}

/// Parses, slices, transforms and optionally demeans `text`.
pub fn ingest_str(text: &str, spec: &IngestSpec) -> Result<Series, IngestError> {
    let records = slice_dates(parse_records(text, spec.format)?, spec.date_range)?;
    if records.is_empty() {
        return Err(IngestError::EmptyAfterSlicing);
    }
    let values = apply_transform(&records, spec.transform)?;
    if values.len() < MIN_LEN {
        return Err(IngestError::TooShort {
            needed: MIN_LEN,
            got: values.len(),
        });
    }
    let series = Series::new(values)?;
    Ok(if spec.demean {
        series.demeaned()
    } else {
        series
    })
}

pub fn ingest(spec: &IngestSpec) -> Result<Series, IngestError> {
    ingest_str(&read(&spec.path)?, spec)
}

pub fn read(path: &Path) -> Result<String, IngestError> {
    std::fs::read_to_string(path).map_err(|e| IngestError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}
