//! Experiment configuration files (TOML, or JSON as echoed in scan output).
//!
//! Every physical quantity carries its unit in the key name. Unknown keys are
//! rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    HomScan,
    SpdcOtoc,
    PhaseCycle,
    TdGate,
    TfMap,
    AlgebraCheck,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::HomScan => "hom-scan",
            Experiment::SpdcOtoc => "spdc-otoc",
            Experiment::PhaseCycle => "phase-cycle",
            Experiment::TdGate => "td-gate",
            Experiment::TfMap => "tf-map",
            Experiment::AlgebraCheck => "algebra-check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

/// Scan axis: either explicit `values` or `points` samples from `min` to `max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: String,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub points: Option<usize>,
    pub values: Option<Vec<f64>>,
}

impl Axis {
    pub fn samples(&self) -> Result<Vec<f64>> {
        let v = match (&self.values, self.min, self.max, self.points) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(a), Some(b), Some(n)) => {
                if n == 0 {
                    Vec::new()
                } else if n == 1 {
                    vec![a]
                } else {
                    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
                }
            }
            _ => {
                return Err(Error::Validation(format!(
                    "axis {:?}: give either `values` or all of `min`, `max`, `points`",
                    self.name
                )))
            }
        };
        if v.is_empty() {
            return Err(Error::Validation(format!("axis {:?} is empty", self.name)));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Validation(format!("axis {:?} has non-finite values", self.name)));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MatterSpec {
    /// Matter model JSON file; relative paths resolve against the config file.
    File { path: PathBuf },
    /// Ground state plus two excited levels, channel `a` on the first and `b`
    /// on the second transition, each leaking onto the other with `admixture`.
    VSystem {
        omega1_rad_per_s: f64,
        omega2_rad_per_s: f64,
        dipole_a: f64,
        dipole_b: f64,
        #[serde(default)]
        admixture: f64,
        /// Initial amplitudes as `[re, im]` pairs; ground state if absent.
        initial_amplitudes: Option<Vec<[f64; 2]>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StateSpec {
    /// Product of two Gaussian pulses; `width_s` is the intensity standard deviation.
    GaussianPair {
        carrier_a_rad_per_s: f64,
        carrier_b_rad_per_s: f64,
        center_a_s: f64,
        center_b_s: f64,
        width_s: f64,
    },
    /// Product of two short pulses whose width is `epsilon_steps` quadrature steps.
    DeltaPair {
        center_a_s: f64,
        center_b_s: f64,
        #[serde(default = "default_epsilon_steps")]
        epsilon_steps: f64,
    },
    /// Down-conversion pair on a frequency grid shared by both photons.
    Spdc {
        sigma_p_rad_per_s: f64,
        entanglement_time_s: f64,
        pump_rad_per_s: f64,
        center_a_rad_per_s: f64,
        center_b_rad_per_s: f64,
        grid_points: usize,
        grid_min_rad_per_s: f64,
        grid_max_rad_per_s: f64,
        #[serde(default)]
        gdd_a_s2: f64,
        #[serde(default = "default_rel_tol")]
        rel_tol: f64,
    },
    /// Two-photon amplitude file; relative paths resolve against the config file.
    AmplitudeFile {
        path: PathBuf,
        #[serde(default = "default_rel_tol")]
        rel_tol: f64,
    },
}

fn default_epsilon_steps() -> f64 {
    2.0
}

fn default_rel_tol() -> f64 {
    1e-6
}

/// Times of the HOM setup, each `offset + per_tau * tau`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomSection {
    #[serde(default)]
    pub bs_delay_s: f64,
    #[serde(default)]
    pub bs_delay_per_tau: f64,
    #[serde(default)]
    pub t_a_s: f64,
    #[serde(default)]
    pub t_a_per_tau: f64,
    #[serde(default)]
    pub t_b_s: f64,
    #[serde(default)]
    pub t_b_per_tau: f64,
    #[serde(default)]
    pub r_a_s: f64,
    #[serde(default)]
    pub r_b_s: f64,
    #[serde(default = "default_hom_dt")]
    pub dt_s: f64,
    pub t_min_s: Option<f64>,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_contribution")]
    pub contribution: crate::signal::Contribution,
    #[serde(default = "default_coupling")]
    pub coupling: crate::oracle::CouplingForm,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default = "default_measurement_time")]
    pub measurement_time_s: f64,
    /// Discrete mode frequencies for `all_fourth_order`; default to the pulse carriers.
    pub mode_a_rad_per_s: Option<f64>,
    pub mode_b_rad_per_s: Option<f64>,
}

fn default_hom_dt() -> f64 {
    0.02
}

fn default_lambda() -> f64 {
    1e-2
}

fn default_contribution() -> crate::signal::Contribution {
    crate::signal::Contribution::OtocTerm
}

fn default_coupling() -> crate::oracle::CouplingForm {
    crate::oracle::CouplingForm::Full
}

fn default_n_max() -> usize {
    crate::oracle::DEFAULT_N_MAX
}

fn default_measurement_time() -> f64 {
    5.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NarrowbandSection {
    #[serde(default)]
    pub bs_delay_s: f64,
    #[serde(default)]
    pub bs_delay_per_tau: f64,
    /// `t_a - t_b`, as `offset + per_tau * tau`.
    #[serde(default)]
    pub detection_difference_s: f64,
    #[serde(default)]
    pub detection_difference_per_tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GatedSection {
    pub dt_s: f64,
    #[serde(default = "default_gated_lambda")]
    pub lambda: f64,
    #[serde(default)]
    pub r_a_s: f64,
    #[serde(default)]
    pub r_b_s: f64,
    pub t_star_s: Option<f64>,
}

fn default_gated_lambda() -> f64 {
    0.3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GatesSection {
    pub a_center_s: f64,
    pub b_center_s: f64,
    pub width_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CenterScanSection {
    pub min_s: f64,
    pub max_s: f64,
    pub points: usize,
    pub width_s: f64,
    #[serde(default = "default_reference")]
    pub reference: crate::photon::Photon,
    #[serde(default)]
    pub theta_rad: f64,
}

fn default_reference() -> crate::photon::Photon {
    crate::photon::Photon::A
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TfSection {
    pub time_width_s: f64,
    pub frequency_width_rad_per_s: f64,
    #[serde(default)]
    pub theta_rad: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSection {
    #[serde(default = "default_algebra_n_max")]
    pub n_max: usize,
    #[serde(default = "default_sector_max")]
    pub sector_max: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_algebra_n_max() -> usize {
    4
}

fn default_sector_max() -> usize {
    3
}

fn default_tolerance() -> f64 {
    1e-10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub experiment: Experiment,
    #[serde(default)]
    pub output: OutputSection,
    pub matter: Option<MatterSpec>,
    pub state: Option<StateSpec>,
    #[serde(default)]
    pub scan: Vec<Axis>,
    pub hom: Option<HomSection>,
    pub narrowband: Option<NarrowbandSection>,
    pub gated: Option<GatedSection>,
    pub gates: Option<GatesSection>,
    pub center_scan: Option<CenterScanSection>,
    pub tf: Option<TfSection>,
    pub algebra: Option<AlgebraSection>,
}

fn missing(section: &str, experiment: Experiment) -> Error {
    Error::Validation(format!("experiment {} needs a [{section}] section", experiment.name()))
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Format(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Format(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Load a `.toml` or `.json` config; relative file references are made
    /// absolute against the config's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut cfg = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_json_str(&text)?,
            _ => Self::from_toml_str(&text)?,
        };
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base)?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) -> Result<()> {
        let fix = |p: &mut PathBuf| -> Result<()> {
            let joined = if p.is_absolute() { p.clone() } else { base.join(&*p) };
            *p = joined
                .canonicalize()
                .map_err(|e| Error::Validation(format!("referenced file {}: {e}", joined.display())))?;
            Ok(())
        };
        if let Some(MatterSpec::File { path }) = &mut self.matter {
            fix(path)?;
        }
        if let Some(StateSpec::AmplitudeFile { path, .. }) = &mut self.state {
            fix(path)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Validation(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let e = self.experiment;
        let need = |present: bool, name: &str| if present { Ok(()) } else { Err(missing(name, e)) };
        let axes = |names: &[&str]| -> Result<()> {
            let got: Vec<&str> = self.scan.iter().map(|a| a.name.as_str()).collect();
            if got != names {
                return Err(Error::Validation(format!(
                    "experiment {} scans axes {names:?}, config gives {got:?}",
                    e.name()
                )));
            }
            for a in &self.scan {
                a.samples()?;
            }
            Ok(())
        };
        match e {
            Experiment::HomScan => {
                need(self.matter.is_some(), "matter")?;
                need(self.state.is_some(), "state")?;
                need(self.hom.is_some(), "hom")?;
                axes(&["tau_s"])
            }
            Experiment::SpdcOtoc => {
                need(self.matter.is_some(), "matter")?;
                need(matches!(self.state, Some(StateSpec::Spdc { .. })), "state (kind = \"spdc\")")?;
                need(self.narrowband.is_some(), "narrowband")?;
                axes(&["tau_s"])
            }
            Experiment::PhaseCycle => {
                need(self.matter.is_some(), "matter")?;
                need(self.state.is_some(), "state")?;
                need(self.gated.is_some(), "gated")?;
                need(self.gates.is_some(), "gates")?;
                axes(&["theta_rad"])
            }
            Experiment::TdGate => {
                need(self.matter.is_some(), "matter")?;
                need(self.state.is_some(), "state")?;
                need(self.gated.is_some(), "gated")?;
                need(self.center_scan.is_some(), "center_scan")?;
                axes(&["tau_s"])
            }
            Experiment::TfMap => {
                need(self.matter.is_some(), "matter")?;
                need(self.state.is_some(), "state")?;
                need(self.gated.is_some(), "gated")?;
                need(self.tf.is_some(), "tf")?;
                axes(&["t_signal_s", "omega_idler_rad_per_s"])
            }
            Experiment::AlgebraCheck => {
                if !self.scan.is_empty() {
                    return Err(Error::Validation("algebra-check takes no scan axes".into()));
                }
                Ok(())
            }
        }
    }

    /// Copy with every quadrature step halved (Richardson check).
    pub fn with_halved_step(&self) -> Self {
        let mut out = self.clone();
        if let Some(h) = &mut out.hom {
            h.dt_s *= 0.5;
        }
        if let Some(g) = &mut out.gated {
            g.dt_s *= 0.5;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HOM: &str = r#"
schema_version = 1
experiment = "hom-scan"

[matter]
kind = "v-system"
omega1_rad_per_s = 1.0
omega2_rad_per_s = 1.4
dipole_a = 0.8
dipole_b = 0.6

[state]
kind = "delta-pair"
center_a_s = 0.0
center_b_s = 0.0

[[scan]]
name = "tau_s"
min = 0.5
max = 1.5
points = 5

[hom]
bs_delay_per_tau = 0.5
t_a_per_tau = 1.0
"#;

    #[test]
    fn parses_and_validates() {
        let cfg = ExperimentConfig::from_toml_str(HOM).unwrap();
        assert_eq!(cfg.experiment, Experiment::HomScan);
        assert_eq!(cfg.scan[0].samples().unwrap(), vec![0.5, 0.75, 1.0, 1.25, 1.5]);
        assert_eq!(cfg.hom.as_ref().unwrap().dt_s, 0.02);
    }

    #[test]
    fn unknown_keys_are_errors_with_location() {
        let text = HOM.replace("dipole_b = 0.6", "dipole_b = 0.6\ndipole_c = 1.0");
        let err = ExperimentConfig::from_toml_str(&text).unwrap_err().to_string();
        assert!(err.contains("dipole_c"), "{err}");
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn wrong_schema_and_missing_sections() {
        let text = HOM.replace("schema_version = 1", "schema_version = 7");
        assert!(matches!(ExperimentConfig::from_toml_str(&text), Err(Error::Validation(_))));
        let text = HOM.replace("[hom]", "[narrowband]").replace("t_a_per_tau = 1.0", "");
        assert!(ExperimentConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn json_echo_round_trips() {
        let cfg = ExperimentConfig::from_toml_str(HOM).unwrap();
        let json = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json_str(&json).unwrap(), cfg);
    }
}
