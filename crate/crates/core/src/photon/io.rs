//! Amplitude files: one JSON header line followed by a CSV payload.
//!
//! ```text
//! {"format":"two-photon-amplitude","version":1,"grid_a":{...},"grid_b":{...},"layout":"i,j,re,im"}
//! i,j,re,im
//! 0,0,1.2e-3,0
//! ...
//! ```

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::amplitude::TwoPhotonAmplitude;
use super::grid::FrequencyGrid;
use crate::error::{Error, Result};
use crate::linalg::{c, ZERO};

pub const AMPLITUDE_FORMAT: &str = "two-photon-amplitude";
pub const AMPLITUDE_VERSION: u32 = 1;
const LAYOUT: &str = "i,j,re,im";

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    grid_a: FrequencyGrid,
    grid_b: FrequencyGrid,
    layout: String,
}

pub fn amplitude_to_string(phi: &TwoPhotonAmplitude) -> Result<String> {
    let header = Header {
        format: AMPLITUDE_FORMAT.into(),
        version: AMPLITUDE_VERSION,
        grid_a: phi.grid_a,
        grid_b: phi.grid_b,
        layout: LAYOUT.into(),
    };
    let mut out = serde_json::to_string(&header)?;
    out.push('\n');
    out.push_str(LAYOUT);
    out.push('\n');
    for i in 0..phi.values.nrows() {
        for j in 0..phi.values.ncols() {
            let z = phi.values[(i, j)];
            writeln!(out, "{i},{j},{:e},{:e}", z.re, z.im).expect("writing to a String");
        }
    }
    Ok(out)
}

pub fn amplitude_from_str(text: &str) -> Result<TwoPhotonAmplitude> {
    let mut lines = text.lines();
    let header: Header = serde_json::from_str(lines.next().ok_or_else(|| Error::Format("empty file".into()))?)?;
    if header.format != AMPLITUDE_FORMAT {
        return Err(Error::Format(format!("unexpected format tag {:?}", header.format)));
    }
    if header.version != AMPLITUDE_VERSION {
        return Err(Error::Format(format!("unsupported amplitude file version {}", header.version)));
    }
    let grid_a = FrequencyGrid::new(header.grid_a.n_points, header.grid_a.omega_min, header.grid_a.omega_max)?;
    let grid_b = FrequencyGrid::new(header.grid_b.n_points, header.grid_b.omega_min, header.grid_b.omega_max)?;
    if lines.next().map(str::trim) != Some(LAYOUT) {
        return Err(Error::Format(format!("expected column line {LAYOUT:?}")));
    }
    let mut values = DMatrix::from_element(grid_a.n_points, grid_b.n_points, ZERO);
    let mut seen = 0usize;
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = || Error::Format(format!("malformed payload row {}: {line:?}", lineno + 3));
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(bad());
        }
        let i: usize = fields[0].trim().parse().map_err(|_| bad())?;
        let j: usize = fields[1].trim().parse().map_err(|_| bad())?;
        let re: f64 = fields[2].trim().parse().map_err(|_| bad())?;
        let im: f64 = fields[3].trim().parse().map_err(|_| bad())?;
        if i >= grid_a.n_points || j >= grid_b.n_points {
            return Err(bad());
        }
        values[(i, j)] = c(re, im);
        seen += 1;
    }
    if seen != grid_a.n_points * grid_b.n_points {
        return Err(Error::Format(format!(
            "payload has {seen} rows, expected {}",
            grid_a.n_points * grid_b.n_points
        )));
    }
    TwoPhotonAmplitude::new(grid_a, grid_b, values)
}

pub fn write_amplitude(path: &Path, phi: &TwoPhotonAmplitude) -> Result<()> {
    std::fs::write(path, amplitude_to_string(phi)?)?;
    Ok(())
}

pub fn read_amplitude(path: &Path) -> Result<TwoPhotonAmplitude> {
    amplitude_from_str(&std::fs::read_to_string(path)?)
}
