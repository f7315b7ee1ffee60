use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::HarnessError;

pub const METRICS_HEADER: &str = "step,seed,validation_return,evaluation_return,wall_s";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub step: u64,
    pub seed: u64,
    pub validation_return: f64,
    pub evaluation_return: f64,
    pub wall_s: f64,
}

/// CSV text with the fixed header. Floats use the shortest representation
/// that parses back to the same value.
pub fn metrics_to_csv(records: &[MetricRecord]) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.step, r.seed, r.validation_return, r.evaluation_return, r.wall_s
        ));
    }
    out
}

pub fn metrics_from_csv(text: &str) -> Result<Vec<MetricRecord>, HarnessError> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim_end() == METRICS_HEADER => {}
        other => {
            return Err(HarnessError::Parse(format!(
                "expected header {METRICS_HEADER:?}, found {:?}",
                other.unwrap_or("")
            )))
        }
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let fields: Vec<&str> = line.trim_end().split(',').collect();
            if fields.len() != 5 {
                return Err(HarnessError::Parse(format!("line {}: expected 5 fields", i + 2)));
            }
            let err = |f: &str| HarnessError::Parse(format!("line {}: bad value {f:?}", i + 2));
            Ok(MetricRecord {
                step: fields[0].parse().map_err(|_| err(fields[0]))?,
                seed: fields[1].parse().map_err(|_| err(fields[1]))?,
                validation_return: fields[2].parse().map_err(|_| err(fields[2]))?,
                evaluation_return: fields[3].parse().map_err(|_| err(fields[3]))?,
                wall_s: fields[4].parse().map_err(|_| err(fields[4]))?,
            })
        })
        .collect()
}

pub fn write_metrics(records: &[MetricRecord], path: &Path) -> Result<(), HarnessError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, metrics_to_csv(records))?;
    Ok(())
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricRecord>, HarnessError> {
    metrics_from_csv(&fs::read_to_string(path)?)
}

/// Mean and 95% normal-approximation half-width `1.96 * sd / sqrt(n)` with the
/// sample standard deviation (half-width 0 for a single value).
pub fn mean_ci95(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, 1.96 * var.sqrt() / (n as f64).sqrt())
}
