//! Experiment dispatch: config in, `SignalScan` plus a printable summary out.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::config::{Experiment, ExperimentConfig, MatterSpec, StateSpec};
use crate::error::{Error, Result};
use crate::interferometer::{
    algebra_residuals, beam_splitter, build_fock_operators, casimir_residual, delayed_balanced_bs, induced_passive_map,
    unitarity_residual,
};
use crate::linalg::{c, CMatrix, CVector, C64, ZERO};
use crate::matter::io::read_matter;
use crate::matter::{v_system_with_admixture, InitialState, MatterSystem};
use crate::photon::io::read_amplitude;
use crate::photon::{
    spdc_amplitude, DeltaPulse, FrequencyGrid, GaussianPulse, Photon, SeparableAmplitude, SpdcParameters,
};
use crate::signal::hom::{DiscreteModeSettings, Quadrature};
use crate::signal::scan::evaluate_points;
use crate::signal::{
    exchange_cross_term, fixed_delay_scan, gated_coincidence, hom_coincidence, narrowband_spdc_coincidence,
    time_frequency_map, CenterScan, DetectionGate, GatedConfig, HomConfig, SignalScan,
};

/// Exit status for configuration problems.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for numeric, coverage and failed-check outcomes.
pub const EXIT_NUMERIC: i32 = 3;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Coverage { .. } | Error::TruncationOverflow(_) | Error::Capability(_) => EXIT_NUMERIC,
        _ => EXIT_CONFIG,
    }
}

/// Suggested fix printed under a numeric error.
pub fn remediation(e: &Error) -> Option<&'static str> {
    match e {
        Error::Coverage { .. } => Some("widen the grid or scan range named above, or move the gates inside it"),
        Error::TruncationOverflow(_) => Some("raise n_max or weaken the active transform"),
        Error::Capability(_) => Some("lower n_max or switch to the rotating-wave coupling"),
        _ => None,
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub scan: SignalScan,
    pub summary: Vec<String>,
    pub warnings: Vec<String>,
    /// Set when a self-check experiment found a residual above tolerance.
    pub check_failed: bool,
}

pub fn build_matter(spec: &MatterSpec) -> Result<MatterSystem> {
    match spec {
        MatterSpec::File { path } => read_matter(path),
        MatterSpec::VSystem {
            omega1_rad_per_s,
            omega2_rad_per_s,
            dipole_a,
            dipole_b,
            admixture,
            initial_amplitudes,
        } => {
            let sys = v_system_with_admixture(*omega1_rad_per_s, *omega2_rad_per_s, *dipole_a, *dipole_b, *admixture)?;
            match initial_amplitudes {
                None => Ok(sys),
                Some(a) => {
                    let psi = CVector::from_iterator(a.len(), a.iter().map(|[re, im]| c(*re, *im)));
                    sys.with_initial(InitialState::Pure(psi))
                }
            }
        }
    }
}

/// Time-domain amplitude and the photon carrier frequencies.
pub fn build_amplitude(spec: &StateSpec, dt: f64) -> Result<(SeparableAmplitude, f64, f64)> {
    match spec {
        StateSpec::GaussianPair { carrier_a_rad_per_s, carrier_b_rad_per_s, center_a_s, center_b_s, width_s } => {
            let a = GaussianPulse::new(*carrier_a_rad_per_s, *center_a_s, *width_s)?;
            let b = GaussianPulse::new(*carrier_b_rad_per_s, *center_b_s, *width_s)?;
            Ok((SeparableAmplitude::product(Arc::new(a), Arc::new(b)), *carrier_a_rad_per_s, *carrier_b_rad_per_s))
        }
        StateSpec::DeltaPair { center_a_s, center_b_s, epsilon_steps } => {
            if !(*epsilon_steps > 0.0) {
                return Err(Error::Validation(format!("epsilon_steps must be positive, got {epsilon_steps}")));
            }
            let pulse = |center: f64| DeltaPulse { center, epsilon: epsilon_steps * dt, carrier: 0.0 };
            Ok((SeparableAmplitude::product(Arc::new(pulse(*center_a_s)), Arc::new(pulse(*center_b_s))), 0.0, 0.0))
        }
        StateSpec::Spdc {
            sigma_p_rad_per_s,
            entanglement_time_s,
            pump_rad_per_s,
            center_a_rad_per_s,
            center_b_rad_per_s,
            grid_points,
            grid_min_rad_per_s,
            grid_max_rad_per_s,
            gdd_a_s2,
            rel_tol,
        } => {
            let params = SpdcParameters {
                sigma_p: *sigma_p_rad_per_s,
                t_e: *entanglement_time_s,
                omega_p0: *pump_rad_per_s,
                omega_a0: *center_a_rad_per_s,
                omega_b0: *center_b_rad_per_s,
            };
            let grid = FrequencyGrid::new(*grid_points, *grid_min_rad_per_s, *grid_max_rad_per_s)?;
            let mut phi = spdc_amplitude(&params, grid, grid)?;
            if *gdd_a_s2 != 0.0 {
                phi = phi.with_dispersion(Photon::A, *gdd_a_s2, *center_a_rad_per_s);
            }
            Ok((SeparableAmplitude::from_spectral(&phi, *rel_tol)?, *center_a_rad_per_s, *center_b_rad_per_s))
        }
        StateSpec::AmplitudeFile { path, rel_tol } => {
            let phi = read_amplitude(path)?;
            let mid = |g: &FrequencyGrid| 0.5 * (g.omega_min + g.omega_max);
            let (wa, wb) = (mid(&phi.grid_a), mid(&phi.grid_b));
            Ok((SeparableAmplitude::from_spectral(&phi, *rel_tol)?, wa, wb))
        }
    }
}

fn config_echo(cfg: &ExperimentConfig) -> Result<serde_json::Value> {
    Ok(serde_json::to_value(cfg)?)
}

fn axis_values(cfg: &ExperimentConfig, k: usize) -> Result<Vec<f64>> {
    cfg.scan[k].samples()
}

fn range_line(label: &str, values: &[f64]) -> String {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    format!("{label}: min {lo:.6e} max {hi:.6e} over {} points", values.len())
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    match cfg.experiment {
        Experiment::HomScan => hom_scan(cfg),
        Experiment::SpdcOtoc => spdc_otoc(cfg),
        Experiment::PhaseCycle => phase_cycle(cfg),
        Experiment::TdGate => td_gate(cfg),
        Experiment::TfMap => tf_map(cfg),
        Experiment::AlgebraCheck => algebra_check(cfg),
    }
}

fn matter_of(cfg: &ExperimentConfig) -> Result<MatterSystem> {
    build_matter(cfg.matter.as_ref().expect("validated"))
}

fn hom_scan(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let h = cfg.hom.as_ref().expect("validated");
    let matter = matter_of(cfg)?;
    let (amp, wa, wb) = build_amplitude(cfg.state.as_ref().expect("validated"), h.dt_s)?;
    let mut base = HomConfig::new(amp, h.mode_a_rad_per_s.unwrap_or(wa), h.mode_b_rad_per_s.unwrap_or(wb), matter);
    base.r_a = h.r_a_s;
    base.r_b = h.r_b_s;
    base.lambda = h.lambda;
    base.quadrature = Quadrature { dt: h.dt_s, t_min: h.t_min_s };
    base.discrete = DiscreteModeSettings { coupling: h.coupling, n_max: h.n_max, measurement_time: h.measurement_time_s };
    let taus = axis_values(cfg, 0)?;
    let values = evaluate_points(&taus, |&tau| {
        let mut point = base.clone();
        point.wavepacket_delay = tau;
        point.bs_delay = h.bs_delay_s + h.bs_delay_per_tau * tau;
        point.t_a = h.t_a_s + h.t_a_per_tau * tau;
        point.t_b = h.t_b_s + h.t_b_per_tau * tau;
        hom_coincidence(&point, h.contribution)
    })?;
    let label = h.contribution.label();
    let mut scan = SignalScan::new(cfg.experiment.name(), &["tau_s"], config_echo(cfg)?);
    for (&tau, &v) in taus.iter().zip(&values) {
        scan.push(vec![tau], v, label)?;
    }
    let re: Vec<f64> = values.iter().map(|z| z.re).collect();
    let abs: Vec<f64> = values.iter().map(|z| z.norm()).collect();
    Ok(RunOutput {
        scan,
        summary: vec![range_line(&format!("{label} (re)"), &re), range_line(&format!("|{label}|"), &abs)],
        warnings: Vec::new(),
        check_failed: false,
    })
}

fn spdc_otoc(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let nb = cfg.narrowband.as_ref().expect("validated");
    let matter = matter_of(cfg)?;
    let params = match cfg.state.as_ref().expect("validated") {
        StateSpec::Spdc { sigma_p_rad_per_s, entanglement_time_s, pump_rad_per_s, center_a_rad_per_s, center_b_rad_per_s, .. } => {
            SpdcParameters {
                sigma_p: *sigma_p_rad_per_s,
                t_e: *entanglement_time_s,
                omega_p0: *pump_rad_per_s,
                omega_a0: *center_a_rad_per_s,
                omega_b0: *center_b_rad_per_s,
            }
        }
        _ => unreachable!("validated"),
    };
    let taus = axis_values(cfg, 0)?;
    let results = evaluate_points(&taus, |&tau| {
        narrowband_spdc_coincidence(
            &params,
            &matter,
            nb.bs_delay_s + nb.bs_delay_per_tau * tau,
            tau,
            nb.detection_difference_s + nb.detection_difference_per_tau * tau,
        )
    })?;
    let mut scan = SignalScan::new(cfg.experiment.name(), &["tau_s"], config_echo(cfg)?);
    for (&tau, r) in taus.iter().zip(&results) {
        scan.push(vec![tau], r.otoc, "otoc")?;
        scan.push(vec![tau], r.toc, "toc")?;
    }
    let mut warnings = Vec::new();
    if results.iter().any(|r| r.timescale_warning) {
        warnings.push(format!(
            "entanglement time {:.3e} s is not short compared with the fastest matter period {:.3e} s; \
             the narrowband form is unreliable",
            params.t_e,
            crate::signal::spdc::fastest_period(&matter)
        ));
    }
    let open = results.iter().filter(|r| r.window != 0.0).count();
    let otoc: Vec<f64> = results.iter().map(|r| r.otoc.norm()).collect();
    let toc: Vec<f64> = results.iter().map(|r| r.toc.norm()).collect();
    Ok(RunOutput {
        scan,
        summary: vec![
            range_line("|otoc|", &otoc),
            range_line("|toc|", &toc),
            format!("arrival window open at {open} of {} points", results.len()),
        ],
        warnings,
        check_failed: false,
    })
}

fn gated_config(cfg: &ExperimentConfig) -> Result<GatedConfig> {
    let g = cfg.gated.as_ref().expect("validated");
    let (amp, _, _) = build_amplitude(cfg.state.as_ref().expect("validated"), g.dt_s)?;
    let mut out = GatedConfig::new(amp, matter_of(cfg)?, g.lambda, g.dt_s);
    out.r_a = g.r_a_s;
    out.r_b = g.r_b_s;
    out.t_star = g.t_star_s;
    Ok(out)
}

/// Least-squares fit of `C(theta) = B + Re(e^{i theta} X)`; `None` when fewer
/// than three independent phases were sampled.
pub fn solve_phase_cycle(thetas: &[f64], values: &[f64]) -> Option<(f64, C64)> {
    let a = DMatrix::from_fn(thetas.len(), 3, |i, k| match k {
        0 => 1.0,
        1 => thetas[i].cos(),
        _ => -thetas[i].sin(),
    });
    let b = DVector::from_column_slice(values);
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.iter().any(|&s| s <= 1e-9 * smax) {
        return None;
    }
    let x = svd.solve(&b, 0.0).ok()?;
    Some((x[0], c(x[1], x[2])))
}

fn phase_cycle(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let gates = cfg.gates.as_ref().expect("validated");
    let config = gated_config(cfg)?;
    let ga = DetectionGate::time(gates.a_center_s, gates.width_s)?;
    let gb = DetectionGate::time(gates.b_center_s, gates.width_s)?;
    let thetas = axis_values(cfg, 0)?;
    let values = evaluate_points(&thetas, |&th| gated_coincidence(&config, th, &ga, &gb))?;
    let mut scan = SignalScan::new(cfg.experiment.name(), &["theta_rad"], config_echo(cfg)?);
    for (&th, &v) in thetas.iter().zip(&values) {
        scan.push(vec![th], c(v, 0.0), "gated_coincidence")?;
    }
    let mut summary = vec![range_line("gated_coincidence", &values)];
    let mut warnings = Vec::new();
    match solve_phase_cycle(&thetas, &values) {
        Some((background, cross)) => {
            scan.push(vec![0.0], c(background, 0.0), "pathway_background")?;
            scan.push(vec![0.0], cross, "exchange_cross_term")?;
            let direct = exchange_cross_term(&config, &ga, &gb)?;
            summary.push(format!("pathway_background {background:.6e}"));
            summary.push(format!(
                "exchange_cross_term {:.6e} {:+.6e}i (direct half-difference {direct:.6e})",
                cross.re, cross.im
            ));
        }
        None => warnings.push("fewer than three independent phases; cross term not solved".into()),
    }
    Ok(RunOutput { scan, summary, warnings, check_failed: false })
}

/// `sum |S(tau) - S(-tau)| / sum (S(tau) + S(-tau))` over the `tau > 0`
/// points whose mirror image is also sampled.
pub fn mirror_asymmetry(taus: &[f64], values: &[f64]) -> Option<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    let mut found = false;
    for (i, &t) in taus.iter().enumerate() {
        if t <= 0.0 {
            continue;
        }
        if let Some(j) = taus.iter().position(|&u| (u + t).abs() <= 1e-12 * t.abs().max(1.0)) {
            num += (values[i] - values[j]).abs();
            den += values[i] + values[j];
            found = true;
        }
    }
    (found && den != 0.0).then(|| num / den)
}

fn td_gate(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let cs = cfg.center_scan.as_ref().expect("validated");
    let config = gated_config(cfg)?;
    let scan_spec = CenterScan { min: cs.min_s, max: cs.max_s, points: cs.points, width: cs.width_s, reference: cs.reference };
    let taus = axis_values(cfg, 0)?;
    let values = fixed_delay_scan(&config, cs.theta_rad, &taus, &scan_spec)?;
    let mut scan = SignalScan::new(cfg.experiment.name(), &["tau_s"], config_echo(cfg)?);
    for (&tau, &v) in taus.iter().zip(&values) {
        scan.push(vec![tau], c(v, 0.0), "fixed_delay_signal")?;
    }
    let mut summary = vec![range_line("fixed_delay_signal", &values)];
    match mirror_asymmetry(&taus, &values) {
        Some(a) => summary.push(format!("ordering asymmetry {a:.6e}")),
        None => summary.push("ordering asymmetry: no mirrored delays sampled".into()),
    }
    Ok(RunOutput { scan, summary, warnings: Vec::new(), check_failed: false })
}

/// Pearson correlation of the two axes weighted by the map.
pub fn map_correlation(rows: &[f64], cols: &[f64], map: &DMatrix<f64>) -> f64 {
    let total: f64 = map.iter().sum();
    let mean = |f: &dyn Fn(usize, usize) -> f64| {
        let mut s = 0.0;
        for i in 0..rows.len() {
            for j in 0..cols.len() {
                s += f(i, j) * map[(i, j)] / total;
            }
        }
        s
    };
    let mr = mean(&|i, _| rows[i]);
    let mc = mean(&|_, j| cols[j]);
    let cov = mean(&|i, j| (rows[i] - mr) * (cols[j] - mc));
    let vr = mean(&|i, _| (rows[i] - mr).powi(2));
    let vc = mean(&|_, j| (cols[j] - mc).powi(2));
    cov / (vr * vc).sqrt()
}

fn tf_map(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let tf = cfg.tf.as_ref().expect("validated");
    let config = gated_config(cfg)?;
    let ts = axis_values(cfg, 0)?;
    let ws = axis_values(cfg, 1)?;
    let map = time_frequency_map(&config, tf.theta_rad, &ts, tf.time_width_s, &ws, tf.frequency_width_rad_per_s)?;
    let mut scan = SignalScan::new(cfg.experiment.name(), &["t_signal_s", "omega_idler_rad_per_s"], config_echo(cfg)?);
    for (i, &t) in ts.iter().enumerate() {
        for (j, &w) in ws.iter().enumerate() {
            scan.push(vec![t, w], c(map[(i, j)], 0.0), "time_frequency_coincidence")?;
        }
    }
    let all: Vec<f64> = map.iter().cloned().collect();
    let mut summary = vec![range_line("time_frequency_coincidence", &all)];
    if all.iter().sum::<f64>() > 0.0 {
        summary.push(format!("time-frequency correlation {:.6e}", map_correlation(&ts, &ws, &map)));
    }
    Ok(RunOutput { scan, summary, warnings: Vec::new(), check_failed: false })
}

/// Largest deviation of `J^2` on each photon-number shell from `j (j + 1)`.
fn shell_casimir_residual(n_max: usize) -> Result<f64> {
    let ops = build_fock_operators(n_max)?;
    let mut worst: f64 = 0.0;
    for total in 0..=n_max {
        let idx = ops.shell_indices(total);
        let j = total as f64 / 2.0;
        for &r in &idx {
            for &s in &idx {
                let expect = if r == s { c(j * (j + 1.0), 0.0) } else { ZERO };
                worst = worst.max((ops.j2[(r, s)] - expect).norm());
            }
        }
    }
    Ok(worst)
}

fn algebra_check(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let a = cfg.algebra.clone().unwrap_or(super::config::AlgebraSection {
        n_max: 4,
        sector_max: 3,
        tolerance: 1e-10,
    });
    let res = algebra_residuals(a.n_max, a.sector_max)?;
    let ops = build_fock_operators(a.n_max)?;
    let transforms = [
        ("balanced", delayed_balanced_bs(0.0)),
        ("unbalanced", beam_splitter(0.6, 0.8, 0.7)?),
        ("phase", beam_splitter(0.3, 91f64.sqrt() / 10.0, -1.9)?),
    ];
    let mut rows: Vec<(String, f64)> = vec![
        ("su2_commutators".into(), res.su2),
        ("su11_commutators".into(), res.su11),
        ("ladder_commutators".into(), res.ladder),
        ("j2_shell_eigenvalues".into(), shell_casimir_residual(a.n_max)?),
    ];
    let mut unitarity: f64 = 0.0;
    for (name, t) in &transforms {
        rows.push((format!("j2_invariance_{name}"), casimir_residual(t, &ops, a.sector_max)?));
        // the map conserves photon number, so the low sector is a closed block
        let u: CMatrix = induced_passive_map(t, 0.0, a.n_max)?;
        let keep = ops.sector_indices(a.sector_max);
        let block = CMatrix::from_fn(keep.len(), keep.len(), |i, j| u[(keep[i], keep[j])]);
        unitarity = unitarity.max(unitarity_residual(&block));
    }
    rows.push(("passive_unitarity".into(), unitarity));
    let mut scan = SignalScan::new(cfg.experiment.name(), &["n_max"], config_echo(cfg)?);
    let mut summary = Vec::new();
    let mut failed = false;
    for (label, r) in &rows {
        scan.push(vec![a.n_max as f64], c(*r, 0.0), label)?;
        let ok = *r <= a.tolerance;
        failed |= !ok;
        summary.push(format!("{label}: {r:.3e} {}", if ok { "ok" } else { "FAIL" }));
    }
    summary.push(format!("tolerance {:.1e}", a.tolerance));
    Ok(RunOutput { scan, summary, warnings: Vec::new(), check_failed: failed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn phase_cycle_solution_recovers_the_model() {
        let (b, x) = (0.7, c(0.2, -0.05));
        let th = [0.0, PI / 2.0, PI];
        let v: Vec<f64> = th.iter().map(|t| b + (C64::new(0.0, *t).exp() * x).re).collect();
        let (b2, x2) = solve_phase_cycle(&th, &v).unwrap();
        assert!((b2 - b).abs() < 1e-12 && (x2 - x).norm() < 1e-12);
        assert!(solve_phase_cycle(&[0.0, 2.0 * PI], &[1.0, 1.0]).is_none());
    }

    #[test]
    fn mirror_asymmetry_pairs_opposite_delays() {
        assert_eq!(mirror_asymmetry(&[-1.0, 0.0, 1.0], &[1.0, 5.0, 3.0]), Some(0.5));
        assert_eq!(mirror_asymmetry(&[0.0, 1.0], &[1.0, 2.0]), None);
    }

    #[test]
    fn exit_codes_split_config_and_numeric_errors() {
        assert_eq!(exit_code(&Error::Validation("x".into())), EXIT_CONFIG);
        assert_eq!(exit_code(&Error::Format("x".into())), EXIT_CONFIG);
        let cov = Error::Coverage { message: "x".into(), required: 1.0, available: 0.5 };
        assert_eq!(exit_code(&cov), EXIT_NUMERIC);
        assert!(remediation(&cov).is_some());
    }
}
