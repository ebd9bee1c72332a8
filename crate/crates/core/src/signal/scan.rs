//! Scan results and their CSV / JSON export.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::C64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub coords: Vec<f64>,
    pub re: f64,
    pub im: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanMetadata {
    pub experiment: String,
    pub config_hash: String,
    pub contributions: Vec<String>,
    pub config: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalScan {
    pub axes: Vec<String>,
    pub rows: Vec<ScanRow>,
    pub metadata: ScanMetadata,
}

/// SHA-256 of the canonical (compact JSON) form of a configuration.
pub fn config_hash(config: &serde_json::Value) -> String {
    hex::encode(Sha256::digest(config.to_string().as_bytes()))
}

impl SignalScan {
    pub fn new(experiment: &str, axes: &[&str], config: serde_json::Value) -> Self {
        SignalScan {
            axes: axes.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            metadata: ScanMetadata {
                experiment: experiment.to_string(),
                config_hash: config_hash(&config),
                contributions: Vec::new(),
                config,
            },
        }
    }

    pub fn push(&mut self, coords: Vec<f64>, value: C64, label: &str) -> Result<()> {
        if coords.len() != self.axes.len() {
            return Err(Error::Validation(format!(
                "row has {} coordinates for {} axes",
                coords.len(),
                self.axes.len()
            )));
        }
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::Validation(format!("non-finite signal value {value} for {label}")));
        }
        if !self.metadata.contributions.iter().any(|c| c == label) {
            self.metadata.contributions.push(label.to_string());
        }
        self.rows.push(ScanRow { coords, re: value.re, im: value.im, label: label.to_string() });
        Ok(())
    }

    pub fn values_for(&self, label: &str) -> Vec<C64> {
        self.rows.iter().filter(|r| r.label == label).map(|r| C64::new(r.re, r.im)).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for axis in &self.axes {
            out.push_str(axis);
            out.push(',');
        }
        out.push_str("re,im,label\n");
        for row in &self.rows {
            for x in &row.coords {
                write!(out, "{x:e},").expect("writing to a String");
            }
            writeln!(out, "{:e},{:e},{}", row.re, row.im, row.label).expect("writing to a String");
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Evaluate `f` on every point in parallel; results keep the input order.
pub fn evaluate_points<P, T, F>(points: &[P], f: F) -> Result<Vec<T>>
where
    P: Sync,
    T: Send,
    F: Fn(&P) -> Result<T> + Sync,
{
    points.par_iter().map(&f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn csv_layout_and_hash() {
        let cfg = serde_json::json!({"a": 1});
        let mut scan = SignalScan::new("demo", &["tau_s"], cfg.clone());
        scan.push(vec![0.5], c(1.0, -2.0), "otoc_term").unwrap();
        assert_eq!(scan.to_csv(), "tau_s,re,im,label\n5e-1,1e0,-2e0,otoc_term\n");
        assert_eq!(scan.metadata.config_hash, config_hash(&cfg));
        assert_eq!(scan.metadata.config_hash.len(), 64);
        assert!(scan.push(vec![0.0], c(f64::NAN, 0.0), "x").is_err());
    }

    #[test]
    fn parallel_evaluation_keeps_order() {
        let pts: Vec<usize> = (0..200).collect();
        let out = evaluate_points(&pts, |&k| Ok(k * k)).unwrap();
        assert_eq!(out, pts.iter().map(|k| k * k).collect::<Vec<_>>());
    }
}
