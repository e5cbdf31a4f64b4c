//! Right-censored survival data: observed time, event indicator and a
//! covariate row (with a leading intercept column) per subject.

use crate::error::{Error, Result};
use std::path::Path;

/// Immutable survival dataset. Covariates are stored row-major with the
/// intercept column already prepended, so every row has `n_covariates()`
/// entries and starts with 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalDataset {
    times: Vec<f64>,
    events: Vec<u8>,
    covariates: Vec<f64>,
    width: usize,
}

impl SurvivalDataset {
    /// Build a dataset from per-subject rows that already include the
    /// leading intercept column.
    pub fn new(times: Vec<f64>, events: Vec<u8>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = times.len();
        if events.len() != n || rows.len() != n {
            return Err(Error::data(
                None,
                format!(
                    "length mismatch: {n} times, {} events, {} covariate rows",
                    events.len(),
                    rows.len()
                ),
            ));
        }
        if n == 0 {
            return Ok(Self {
                times,
                events,
                covariates: Vec::new(),
                width: 1,
            });
        }
        let width = rows[0].len();
        if width == 0 {
            return Err(Error::data(None, "covariate rows must include the intercept"));
        }
        let mut covariates = Vec::with_capacity(n * width);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::data(
                    Some(i),
                    format!("covariate row has {} entries, expected {width}", row.len()),
                ));
            }
            if row[0] != 1.0 {
                return Err(Error::data(Some(i), "first covariate column must be 1"));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::data(Some(i), "non-finite covariate value"));
            }
            covariates.extend_from_slice(row);
        }
        for (i, &t) in times.iter().enumerate() {
            if !(t > 0.0) || !t.is_finite() {
                return Err(Error::data(Some(i), format!("time must be positive, got {t}")));
            }
        }
        for (i, &d) in events.iter().enumerate() {
            if d > 1 {
                return Err(Error::data(Some(i), format!("event indicator must be 0 or 1, got {d}")));
            }
        }
        Ok(Self {
            times,
            events,
            covariates,
            width,
        })
    }

    pub fn n(&self) -> usize {
        self.times.len()
    }

    /// Number of covariate columns including the intercept (q + 1).
    pub fn n_covariates(&self) -> usize {
        self.width
    }

    pub fn time(&self, i: usize) -> f64 {
        self.times[i]
    }

    pub fn event(&self, i: usize) -> u8 {
        self.events[i]
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn events(&self) -> &[u8] {
        &self.events
    }

    pub fn covariate_row(&self, i: usize) -> &[f64] {
        &self.covariates[i * self.width..(i + 1) * self.width]
    }

    pub fn n_events(&self) -> usize {
        self.events.iter().filter(|&&d| d == 1).count()
    }

    /// Copy of the dataset without the listed 0-based row indices.
    pub fn excluding(&self, excluded: &[usize]) -> Result<Self> {
        for &i in excluded {
            if i >= self.n() {
                return Err(Error::data(
                    Some(i),
                    format!("excluded index {i} out of range (n = {})", self.n()),
                ));
            }
        }
        let mut keep = vec![true; self.n()];
        for &i in excluded {
            keep[i] = false;
        }
        let mut times = Vec::new();
        let mut events = Vec::new();
        let mut rows = Vec::new();
        for i in 0..self.n() {
            if keep[i] {
                times.push(self.times[i]);
                events.push(self.events[i]);
                rows.push(self.covariate_row(i).to_vec());
            }
        }
        SurvivalDataset::new(times, events, rows)
    }

    /// Concatenate two datasets with identical covariate width.
    pub fn concat(&self, other: &SurvivalDataset) -> Result<Self> {
        if self.width != other.width && self.n() > 0 && other.n() > 0 {
            return Err(Error::data(None, "covariate width mismatch in concat"));
        }
        let mut times = self.times.clone();
        let mut events = self.events.clone();
        let mut rows: Vec<Vec<f64>> = (0..self.n()).map(|i| self.covariate_row(i).to_vec()).collect();
        times.extend_from_slice(&other.times);
        events.extend_from_slice(&other.events);
        rows.extend((0..other.n()).map(|i| other.covariate_row(i).to_vec()));
        SurvivalDataset::new(times, events, rows)
    }
}

/// Column names used to interpret an input CSV file.
#[derive(Debug, Clone)]
pub struct ColumnMapping {
    pub time: String,
    pub event: String,
    /// Covariate columns in model order. Empty means "every column other
    /// than time and event, in header order".
    pub covariates: Vec<String>,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        Self {
            time: "time".into(),
            event: "event".into(),
            covariates: Vec::new(),
        }
    }
}

/// Parse a headered CSV file into a dataset, prepending the intercept
/// column. Row indices in errors are 0-based data rows (the header is not
/// counted).
pub fn load_dataset(path: &Path, mapping: &ColumnMapping) -> Result<SurvivalDataset> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| Error::Io(format!("cannot open {}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Io(format!("cannot read header of {}: {e}", path.display())))?
        .clone();
    let find = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::data(None, format!("missing column '{name}' in {}", path.display())))
    };
    let time_idx = find(&mapping.time)?;
    let event_idx = find(&mapping.event)?;
    let cov_idx: Vec<usize> = if mapping.covariates.is_empty() {
        (0..headers.len())
            .filter(|&i| i != time_idx && i != event_idx)
            .collect()
    } else {
        mapping
            .covariates
            .iter()
            .map(|c| find(c))
            .collect::<Result<Vec<_>>>()?
    };

    let mut times = Vec::new();
    let mut events = Vec::new();
    let mut rows = Vec::new();
    for (row_no, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::data(Some(row_no), e.to_string()))?;
        let cell = |idx: usize| -> Result<f64> {
            let raw = record
                .get(idx)
                .ok_or_else(|| Error::data(Some(row_no), "short record"))?;
            raw.trim()
                .parse::<f64>()
                .map_err(|_| Error::data(Some(row_no), format!("non-numeric cell '{raw}'")))
        };
        let t = cell(time_idx)?;
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::data(Some(row_no), format!("time must be positive, got {t}")));
        }
        let ev = cell(event_idx)?;
        let d = if ev == 0.0 {
            0u8
        } else if ev == 1.0 {
            1u8
        } else {
            return Err(Error::data(
                Some(row_no),
                format!("event indicator must be 0 or 1, got {ev}"),
            ));
        };
        let mut row = Vec::with_capacity(cov_idx.len() + 1);
        row.push(1.0);
        for &ci in &cov_idx {
            row.push(cell(ci)?);
        }
        times.push(t);
        events.push(d);
        rows.push(row);
    }
    SurvivalDataset::new(times, events, rows)
}
