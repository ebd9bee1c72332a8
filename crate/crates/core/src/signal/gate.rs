use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    Time,
    Frequency,
}

/// Gaussian detection gate `D(x) = exp(-(x - center)^2 / (2 width^2))`, peak 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionGate {
    pub kind: GateKind,
    pub center: f64,
    pub width: f64,
}

impl DetectionGate {
    pub fn new(kind: GateKind, center: f64, width: f64) -> Result<Self> {
        if !(width > 0.0) || !center.is_finite() {
            return Err(Error::Validation(format!("gate width must be positive (got {width})")));
        }
        Ok(DetectionGate { kind, center, width })
    }

    pub fn time(center: f64, width: f64) -> Result<Self> {
        DetectionGate::new(GateKind::Time, center, width)
    }

    pub fn frequency(center: f64, width: f64) -> Result<Self> {
        DetectionGate::new(GateKind::Frequency, center, width)
    }

    pub fn value(&self, x: f64) -> f64 {
        let d = (x - self.center) / self.width;
        (-0.5 * d * d).exp()
    }

    /// `integral D dx`
    pub fn area(&self) -> f64 {
        (2.0 * std::f64::consts::PI).sqrt() * self.width
    }

    pub fn with_center(&self, center: f64) -> Self {
        DetectionGate { center, ..*self }
    }

    pub fn require(&self, kind: GateKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::GateKind(format!("expected a {kind:?} gate, got a {:?} gate", self.kind)));
        }
        Ok(())
    }
}
