//! Matter model files (JSON, versioned).
//!
//! ```json
//! {
//!   "format": "matter-model", "version": 1, "dim": 3,
//!   "energies": [0.0, 1.0, 1.7],
//!   "channels": {"a": {"dipole": [[0,0],[0.8,0],[0,0], ...], "split": true}},
//!   "initial_state": {"kind": "pure", "amplitudes": [[1,0],[0,0],[0,0]]}
//! }
//! ```
//! Matrices are row-major lists of `[re, im]` pairs.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{InitialState, MatterSystem};
use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, CVector};

pub const MATTER_FORMAT: &str = "matter-model";
pub const MATTER_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub dipole: Vec<[f64; 2]>,
    #[serde(default = "default_split")]
    pub split: bool,
}

fn default_split() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialStateFile {
    Pure { amplitudes: Vec<[f64; 2]> },
    Density { matrix: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatterFile {
    pub format: String,
    pub version: u32,
    pub dim: usize,
    pub energies: Vec<f64>,
    pub channels: BTreeMap<String, ChannelFile>,
    pub initial_state: InitialStateFile,
}

fn matrix_from_pairs(pairs: &[[f64; 2]], dim: usize, what: &str) -> Result<CMatrix> {
    if pairs.len() != dim * dim {
        return Err(Error::Format(format!("{what} has {} entries, expected {}", pairs.len(), dim * dim)));
    }
    Ok(DMatrix::from_fn(dim, dim, |i, j| {
        let [re, im] = pairs[i * dim + j];
        c(re, im)
    }))
}

fn pairs_from_matrix(m: &CMatrix) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push([m[(i, j)].re, m[(i, j)].im]);
        }
    }
    out
}

impl MatterFile {
    pub fn build(&self) -> Result<MatterSystem> {
        if self.format != MATTER_FORMAT {
            return Err(Error::Format(format!("unexpected format tag {:?}", self.format)));
        }
        if self.version != MATTER_VERSION {
            return Err(Error::Format(format!("unsupported matter model version {}", self.version)));
        }
        if self.energies.len() != self.dim {
            return Err(Error::Format(format!(
                "{} energies given for dim {}",
                self.energies.len(),
                self.dim
            )));
        }
        let initial = match &self.initial_state {
            InitialStateFile::Pure { amplitudes } => {
                if amplitudes.len() != self.dim {
                    return Err(Error::Format("initial amplitudes do not match dim".into()));
                }
                InitialState::Pure(CVector::from_iterator(self.dim, amplitudes.iter().map(|[r, i]| c(*r, *i))))
            }
            InitialStateFile::Density { matrix } => {
                InitialState::Mixed(matrix_from_pairs(matrix, self.dim, "density matrix")?)
            }
        };
        let mut sys = MatterSystem::from_energies(&self.energies, initial)?;
        for (label, ch) in &self.channels {
            let v = matrix_from_pairs(&ch.dipole, self.dim, &format!("dipole {label:?}"))?;
            sys = sys.with_channel(label, v, ch.split)?;
        }
        Ok(sys)
    }

    /// File description of a system with a diagonal Hamiltonian.
    pub fn from_system(sys: &MatterSystem) -> Result<Self> {
        let h = sys.hamiltonian();
        let dim = sys.dim();
        let off = (0..dim).flat_map(|i| (0..dim).map(move |j| (i, j))).any(|(i, j)| i != j && h[(i, j)].norm() > 0.0);
        if off {
            return Err(Error::Format("only diagonal hamiltonians can be written as energy lists".into()));
        }
        let mut channels = BTreeMap::new();
        for label in sys.channel_labels() {
            channels.insert(
                label.to_string(),
                ChannelFile { dipole: pairs_from_matrix(sys.dipole(label)?), split: sys.has_split(label)? },
            );
        }
        let initial_state = match sys.initial_state() {
            InitialState::Pure(psi) => InitialStateFile::Pure { amplitudes: psi.iter().map(|z| [z.re, z.im]).collect() },
            InitialState::Mixed(rho) => InitialStateFile::Density { matrix: pairs_from_matrix(rho) },
        };
        Ok(MatterFile {
            format: MATTER_FORMAT.into(),
            version: MATTER_VERSION,
            dim,
            energies: (0..dim).map(|i| h[(i, i)].re).collect(),
            channels,
            initial_state,
        })
    }
}

pub fn read_matter(path: &Path) -> Result<MatterSystem> {
    let text = std::fs::read_to_string(path)?;
    let file: MatterFile = serde_json::from_str(&text)?;
    file.build()
}

pub fn write_matter(path: &Path, sys: &MatterSystem) -> Result<()> {
    let text = serde_json::to_string_pretty(&MatterFile::from_system(sys)?)?;
    std::fs::write(path, text)?;
    Ok(())
}
