//! Coincidence after a Hong-Ou-Mandel interferometer: the fourth-order
//! pathway with a wiggling matter correlator, and the full fourth-order signal.

use serde::{Deserialize, Serialize};

use super::dyson::{all_fourth_order, FourthOrderResult};
use crate::error::{Error, Result};
use crate::interferometer::delayed_balanced_bs;
use crate::linalg::{CMatrix, CVector, C64, ZERO};
use crate::matter::{Flavor, InitialState, MatterSystem};
use crate::oracle::{CouplingForm, JointModel, DEFAULT_N_MAX};
use crate::photon::{SeparableAmplitude, TwoModeState, TwoPhotonAmplitude};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Contribution {
    OtocTerm,
    AllFourthOrder,
}

impl Contribution {
    pub fn label(&self) -> &'static str {
        match self {
            Contribution::OtocTerm => "otoc_term",
            Contribution::AllFourthOrder => "all_fourth_order",
        }
    }
}

/// Uniform quadrature for the ordered interaction-time integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub dt: f64,
    /// Lower integration limit; defaults to the photon support edge.
    pub t_min: Option<f64>,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature { dt: 0.02, t_min: None }
    }
}

/// Two discrete modes at the photon centre frequencies, used for the complete
/// fourth-order signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscreteModeSettings {
    pub coupling: CouplingForm,
    pub n_max: usize,
    pub measurement_time: f64,
}

impl Default for DiscreteModeSettings {
    fn default() -> Self {
        DiscreteModeSettings { coupling: CouplingForm::Full, n_max: DEFAULT_N_MAX, measurement_time: 5.0 }
    }
}

#[derive(Debug, Clone)]
pub struct HomConfig {
    /// Temporal two-photon amplitude at the sample before the wavepacket delay.
    pub amplitude: SeparableAmplitude,
    pub omega_a0: f64,
    pub omega_b0: f64,
    pub matter: MatterSystem,
    /// Beam-splitter displacement `T`.
    pub bs_delay: f64,
    /// Delay `tau` of photon `a`.
    pub wavepacket_delay: f64,
    /// Light travel times `R_a / c`, `R_b / c`.
    pub r_a: f64,
    pub r_b: f64,
    /// Detection times.
    pub t_a: f64,
    pub t_b: f64,
    pub quadrature: Quadrature,
    pub lambda: f64,
    pub discrete: DiscreteModeSettings,
}

impl HomConfig {
    pub fn new(amplitude: SeparableAmplitude, omega_a0: f64, omega_b0: f64, matter: MatterSystem) -> Self {
        HomConfig {
            amplitude,
            omega_a0,
            omega_b0,
            matter,
            bs_delay: 0.0,
            wavepacket_delay: 0.0,
            r_a: 0.0,
            r_b: 0.0,
            t_a: 0.0,
            t_b: 0.0,
            quadrature: Quadrature::default(),
            lambda: 1e-2,
            discrete: DiscreteModeSettings::default(),
        }
    }

    /// Amplitude with photon `a` delayed by `tau`.
    pub fn delayed_amplitude(&self) -> SeparableAmplitude {
        self.amplitude.shifted(self.wavepacket_delay, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("bs_delay", self.bs_delay),
            ("wavepacket_delay", self.wavepacket_delay),
            ("t_a", self.t_a),
            ("t_b", self.t_b),
            ("lambda", self.lambda),
        ] {
            if !v.is_finite() {
                return Err(Error::Validation(format!("{name} is not finite")));
            }
        }
        if !(self.r_a >= 0.0) || !(self.r_b >= 0.0) {
            return Err(Error::Validation("detector distances must be nonnegative".into()));
        }
        if !(self.quadrature.dt > 0.0) {
            return Err(Error::Validation(format!("quadrature step must be positive, got {}", self.quadrature.dt)));
        }
        for label in ["a", "b"] {
            self.matter.dipole(label)?;
        }
        Ok(())
    }
}

/// Integration grid `t_j = U - (K - j) h`, `j = 0..=K`, ending exactly on `U`.
fn anchored_grid(lower: f64, upper: f64, h: f64) -> Vec<f64> {
    if upper <= lower {
        return vec![upper];
    }
    let k = ((upper - lower) / h).ceil() as usize;
    (0..=k).map(|j| upper - (k - j) as f64 * h).collect()
}

/// The ordered double integral of the OTOC pathway without the `Phi^*` prefactor:
/// `int_{t4 <= t3 <= t_b' + T} Phi(t3 + T, t4 - T) <V_a(t_a') V_b(t_b') V_a(t3 + T) V_b(t4 - T)>`,
/// with `t_c' = t_c - R_c / c`.
pub fn otoc_integral(config: &HomConfig) -> Result<C64> {
    config.validate()?;
    let sys = &config.matter;
    let t = config.bs_delay;
    let (ta, tb) = (config.t_a - config.r_a, config.t_b - config.r_b);
    let upper = tb + t;
    let amp = config.delayed_amplitude();
    let (_, (sb0, _)) = amp.support();
    let needed = sb0 + t;
    let lower = match config.quadrature.t_min {
        Some(l) if l > needed => {
            return Err(Error::Coverage {
                message: "interaction grid starts after the photon support; lower t_min".into(),
                required: needed,
                available: l,
            })
        }
        Some(l) => l,
        None => needed,
    };
    let h = config.quadrature.dt;
    let grid = anchored_grid(lower, upper, h);
    let n = grid.len();
    let mut total = ZERO;
    let dim = sys.dim();
    for (coef, alpha, beta) in &amp.terms {
        match sys.initial_state_eigen() {
            InitialState::Pure(psi) => {
                let bra = sys.apply_heisenberg("b", Flavor::Full, tb, &sys.apply_heisenberg("a", Flavor::Full, ta, psi)?)?;
                let mut prefix = CVector::zeros(dim);
                let mut first = CVector::zeros(dim);
                let mut acc = ZERO;
                for (j, &tj) in grid.iter().enumerate() {
                    let g = sys.apply_heisenberg("b", Flavor::Full, tj - t, psi)? * beta.value(tj - t);
                    if j == 0 {
                        first = g.clone();
                    }
                    prefix += &g;
                    if j == 0 {
                        continue;
                    }
                    // trapezoid over [t_0, t_j]; the diagonal t4 = t3 carries half weight
                    let half = C64::new(0.5, 0.0);
                    let inner = (&prefix - &first * half - &g * half) * C64::new(h, 0.0);
                    let w = if j == n - 1 { 0.5 * h } else { h };
                    let x = sys.apply_heisenberg("a", Flavor::Full, tj + t, &inner)?;
                    acc += bra.dotc(&x) * alpha.value(tj + t) * w;
                }
                total += coef * acc;
            }
            InitialState::Mixed(rho) => {
                let left = sys.heisenberg_eigen("a", Flavor::Full, ta)? * sys.heisenberg_eigen("b", Flavor::Full, tb)?;
                let mut prefix = CMatrix::zeros(dim, dim);
                let mut first = CMatrix::zeros(dim, dim);
                let mut acc = ZERO;
                for (j, &tj) in grid.iter().enumerate() {
                    let g = sys.heisenberg_eigen("b", Flavor::Full, tj - t)? * rho * beta.value(tj - t);
                    if j == 0 {
                        first = g.clone();
                    }
                    prefix += &g;
                    if j == 0 {
                        continue;
                    }
                    let inner = (&prefix - &first * C64::new(0.5, 0.0) - &g * C64::new(0.5, 0.0)) * C64::new(h, 0.0);
                    let w = if j == n - 1 { 0.5 * h } else { h };
                    let x = &left * sys.heisenberg_eigen("a", Flavor::Full, tj + t)? * inner;
                    acc += x.trace() * alpha.value(tj + t) * w;
                }
                total += coef * acc;
            }
        }
    }
    Ok(total)
}

/// Single-pathway coincidence `Phi^*(t_a', t_b') * otoc_integral`.
pub fn otoc_term(config: &HomConfig) -> Result<C64> {
    let amp = config.delayed_amplitude();
    let prefactor = amp.value(config.t_a - config.r_a, config.t_b - config.r_b).conj();
    Ok(prefactor * otoc_integral(config)?)
}

/// Richardson-style check: relative change of `otoc_term` when the step is halved.
pub fn otoc_grid_sensitivity(config: &HomConfig) -> Result<f64> {
    let coarse = otoc_term(config)?;
    let mut fine_cfg = config.clone();
    fine_cfg.quadrature.dt *= 0.5;
    let fine = otoc_term(&fine_cfg)?;
    Ok((coarse - fine).norm() / fine.norm().max(f64::MIN_POSITIVE))
}

/// Joint discrete-mode model matching a HOM configuration.
pub fn discrete_model(config: &HomConfig, lambda: f64) -> Result<JointModel> {
    JointModel::new(
        config.matter.clone(),
        config.omega_a0,
        config.omega_b0,
        config.discrete.n_max,
        lambda,
        config.discrete.coupling,
    )
}

pub fn fourth_order(config: &HomConfig) -> Result<FourthOrderResult> {
    config.validate()?;
    let model = discrete_model(config, config.lambda)?;
    let psi0 = model.fock_product_state(1, 1)?;
    all_fourth_order(&model, &psi0, &delayed_balanced_bs(config.bs_delay), config.discrete.measurement_time)
}

pub fn hom_coincidence(config: &HomConfig, contribution: Contribution) -> Result<C64> {
    match contribution {
        Contribution::OtocTerm => otoc_term(config),
        Contribution::AllFourthOrder => Ok(fourth_order(config)?.total),
    }
}

/// Probability that both output ports fire after the delayed balanced splitter,
/// without matter.
pub fn hom_dip_coincidence(phi: &TwoPhotonAmplitude, bs_delay: f64) -> Result<f64> {
    let out = TwoModeState::from_amplitude(phi)?.transformed(&delayed_balanced_bs(bs_delay))?;
    Ok(out.ab.norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::matter::{multipoint_correlator, v_system_with_admixture, CorrelatorSpec, Insertion};
    use crate::photon::{gaussian_envelope, product_amplitude, DeltaPulse, FrequencyGrid, GaussianPulse};
    use std::sync::Arc;

    fn gaussian_config() -> HomConfig {
        let sys = v_system_with_admixture(1.0, 1.4, 0.8, 0.6, 0.4).unwrap();
        let a = GaussianPulse::new(1.2, 0.0, 0.5).unwrap();
        let b = GaussianPulse::new(1.2, 0.0, 0.5).unwrap();
        let mut cfg = HomConfig::new(SeparableAmplitude::product(Arc::new(a), Arc::new(b)), 1.2, 1.2, sys);
        cfg.bs_delay = 0.3;
        cfg.wavepacket_delay = 0.8;
        cfg.t_a = 1.1;
        cfg.t_b = 0.4;
        cfg
    }

    #[test]
    fn decoupled_matter_gives_zero() {
        let mut cfg = gaussian_config();
        let zero = CMatrix::zeros(3, 3);
        cfg.matter = MatterSystem::new(cfg.matter.hamiltonian().clone(), cfg.matter.initial_state().clone())
            .unwrap()
            .with_channel("a", zero.clone(), false)
            .unwrap()
            .with_channel("b", zero, false)
            .unwrap();
        assert_eq!(otoc_term(&cfg).unwrap(), ZERO);
    }

    #[test]
    fn pure_and_density_paths_agree() {
        let cfg = gaussian_config();
        let mut mixed = cfg.clone();
        let InitialState::Pure(psi) = cfg.matter.initial_state().clone() else { unreachable!() };
        mixed.matter = mixed.matter.with_initial(InitialState::Mixed(&psi * psi.adjoint())).unwrap();
        let a = otoc_term(&cfg).unwrap();
        let b = otoc_term(&mixed).unwrap();
        assert!((a - b).norm() <= 1e-12 * a.norm().max(1e-300));
    }

    #[test]
    fn grid_halving_is_within_one_percent() {
        let cfg = gaussian_config();
        assert!(otoc_grid_sensitivity(&cfg).unwrap() <= 0.01);
    }

    #[test]
    fn coverage_violation_is_reported() {
        let mut cfg = gaussian_config();
        cfg.quadrature.t_min = Some(0.0);
        assert!(matches!(otoc_term(&cfg), Err(Error::Coverage { .. })));
    }

    #[test]
    fn brute_force_double_integral() {
        // independent oracle: dense 2-D trapezoid over the triangle with explicit correlators
        let mut cfg = gaussian_config();
        cfg.quadrature.dt = 0.01;
        let engine = otoc_integral(&cfg).unwrap();
        let amp = cfg.delayed_amplitude();
        let (t, ta, tb) = (cfg.bs_delay, cfg.t_a, cfg.t_b);
        let upper = tb + t;
        let h = 0.02;
        let lower = amp.support().1 .0 + t;
        let n = ((upper - lower) / h).ceil() as usize;
        let pts: Vec<f64> = (0..=n).map(|j| upper - (n - j) as f64 * h).collect();
        let mut acc = ZERO;
        for (j3, &t3) in pts.iter().enumerate() {
            for (j4, &t4) in pts.iter().enumerate().take(j3 + 1) {
                let mut w = h * h;
                if j4 == j3 || j4 == 0 {
                    w *= 0.5;
                }
                if j3 == n {
                    w *= 0.5;
                }
                let spec = CorrelatorSpec::from_left_to_right(vec![
                    Insertion::full("a", ta),
                    Insertion::full("b", tb),
                    Insertion::full("a", t3 + t),
                    Insertion::full("b", t4 - t),
                ])
                .unwrap();
                acc += amp.value(t3 + t, t4 - t) * multipoint_correlator(&cfg.matter, &spec).unwrap() * w;
            }
        }
        assert!((engine - acc).norm() / acc.norm() < 2e-3, "engine {engine} oracle {acc}");
    }

    #[test]
    fn delta_wavepackets_sample_the_otoc() {
        let sys = v_system_with_admixture(1.0, 1.4, 0.8, 0.6, 0.4)
            .unwrap()
            .with_initial(InitialState::Pure(CVector::from_vec(vec![c(0.8, 0.0), c(0.0, 0.6), ZERO])))
            .unwrap();
        let h = 0.0005;
        // several grid points across the pulse keep the wedge quadrature at the 0.1% level
        let a = DeltaPulse { center: 0.0, epsilon: 10.0 * h, carrier: 0.0 };
        let b = a;
        let mut cfg = HomConfig::new(SeparableAmplitude::product(Arc::new(a), Arc::new(b)), 1.0, 1.0, sys);
        cfg.quadrature.dt = h;
        let mut ratios = Vec::new();
        for k in 0..4 {
            let tau = 0.6 + 0.35 * k as f64;
            cfg.bs_delay = tau / 2.0;
            cfg.wavepacket_delay = tau;
            cfg.t_a = tau;
            cfg.t_b = 0.0;
            let spec = CorrelatorSpec::from_left_to_right(vec![
                Insertion::full("a", tau),
                Insertion::full("b", 0.0),
                Insertion::full("a", tau),
                Insertion::full("b", 0.0),
            ])
            .unwrap();
            ratios.push(otoc_term(&cfg).unwrap() / multipoint_correlator(&cfg.matter, &spec).unwrap());
        }
        let expected = a.peak().powi(2) / 8.0;
        for r in &ratios {
            assert!((r / expected - 1.0).norm() < 0.02, "ratio {r} expected {expected}");
        }
    }

    #[test]
    fn hom_dip_visibility() {
        let g = FrequencyGrid::new(128, 2.0, 10.0).unwrap();
        let env = gaussian_envelope(&g, 6.0, 0.5);
        let phi = product_amplitude(g, &env, g, &env).unwrap();
        assert!(hom_dip_coincidence(&phi, 0.0).unwrap() <= 1e-12);
        // temporal intensity width 1/(2 sigma) = 1
        let far = hom_dip_coincidence(&phi, 5.0).unwrap();
        assert!((far - 0.5).abs() < 0.005);
    }
}
