//! Coincidence for a narrowband down-conversion pair whose photons arrive
//! within the entanglement time of each other.
//!
//! Superoperators act on row-major vectorized density matrices: a left
//! multiplication `V X` is `V kron 1`, the forward Green's function is
//! `liouville_green`, and the backward leg is the free propagation
//! `U(-t) kron U(-t)^*`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{identity, kron, CMatrix, CVector, C64, ZERO};
use crate::matter::{liouville_green, vectorize, InitialState, MatterSystem};
use crate::photon::{DeltaPulse, SeparableAmplitude, SpdcParameters};
use super::hom::{otoc_integral, HomConfig, Quadrature};
use std::sync::Arc;

/// Minimum ratio between the fastest matter period and the entanglement time.
pub const TIMESCALE_SEPARATION: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NarrowbandResult {
    /// Windowed, time-wiggling part.
    pub otoc: C64,
    /// Time-ordered remainder.
    pub toc: C64,
    /// Value of the arrival window `Pi((t_a - t_b + 2T - tau) / T_e)`.
    pub window: f64,
    /// Set when `T_e` is not short compared with the matter dynamics.
    pub timescale_warning: bool,
}

/// Rectangular window, 1 on the open interval `(-1/2, 1/2)`.
pub fn arrival_window(x: f64) -> f64 {
    if x > -0.5 && x < 0.5 {
        1.0
    } else {
        0.0
    }
}

/// Shortest period `2 pi / max|E_i - E_j|` of the matter system (infinite for one level).
pub fn fastest_period(matter: &MatterSystem) -> f64 {
    let e = matter.energies();
    let span = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - e.iter().cloned().fold(f64::INFINITY, f64::min);
    if span > 0.0 {
        2.0 * std::f64::consts::PI / span
    } else {
        f64::INFINITY
    }
}

fn free_propagation(matter: &MatterSystem, t: f64) -> CMatrix {
    let u = matter.eigen().propagator(t);
    u.kronecker(&u.map(|z| z.conj()))
}

fn density(matter: &MatterSystem) -> CMatrix {
    match matter.initial_state() {
        InitialState::Pure(psi) => psi * psi.adjoint(),
        InitialState::Mixed(rho) => rho.clone(),
    }
}

fn simpson_nodes(upper: f64, n: usize) -> Vec<(f64, f64)> {
    let h = upper / n as f64;
    (0..=n)
        .map(|k| {
            let w = if k == 0 || k == n {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            (k as f64 * h, w * h / 3.0)
        })
        .collect()
}

/// Number of Simpson intervals for `[0, 2T]`: at least 64 and 40 per fastest period.
fn panel_count(matter: &MatterSystem, span: f64) -> usize {
    let per = fastest_period(matter);
    let n = if per.is_finite() { (40.0 * span / per).ceil() as usize } else { 0 };
    let n = n.max(64);
    n + n % 2
}

/// OTOC and TOC parts of the narrowband-pair coincidence,
/// `Pi((t_a - t_b + 2T - tau) / T_e) int_0^{2T} dt tr[V_a G(tau) V_b U(-t) V_a G(tau) V_b rho]`
/// and `int_0^{2T} dt tr[V_a G(tau) V_b G(t) V_a G(tau) V_b rho]`.
/// `detection_difference` is `t_a - t_b`.
pub fn narrowband_spdc_coincidence(
    spdc: &SpdcParameters,
    matter: &MatterSystem,
    bs_delay: f64,
    tau: f64,
    detection_difference: f64,
) -> Result<NarrowbandResult> {
    if !(spdc.t_e > 0.0) || !spdc.t_e.is_finite() {
        return Err(Error::Validation(format!("entanglement time must be positive, got {}", spdc.t_e)));
    }
    for (name, v) in [("bs_delay", bs_delay), ("tau", tau), ("detection_difference", detection_difference)] {
        if !v.is_finite() {
            return Err(Error::Validation(format!("{name} is not finite")));
        }
    }
    if bs_delay < 0.0 {
        return Err(Error::Validation(format!("bs_delay must be nonnegative, got {bs_delay}")));
    }
    let n = matter.dim();
    let id = identity(n);
    let va = kron(matter.dipole("a")?, &id);
    let vb = kron(matter.dipole("b")?, &id);
    let g_tau = liouville_green(matter, tau);
    let rho = vectorize(&density(matter));
    let timescale_warning = spdc.t_e * TIMESCALE_SEPARATION > fastest_period(matter);
    let window = arrival_window((detection_difference + 2.0 * bs_delay - tau) / spdc.t_e);

    // right half V_a G(tau) V_b rho is shared by both parts
    let right = &va * (&g_tau * (&vb * rho));
    // tr[M X] = (M^T vec 1) . vec X
    let left = (&va * &g_tau * &vb).transpose();
    let closing = CVector::from_fn(n * n, |k, _| if k / n == k % n { C64::new(1.0, 0.0) } else { ZERO });
    let bra = left * closing;
    let span = 2.0 * bs_delay;
    let mut otoc = ZERO;
    let mut toc = ZERO;
    if span > 0.0 {
        for (t, w) in simpson_nodes(span, panel_count(matter, span)) {
            if window != 0.0 {
                otoc += bra.dot(&(free_propagation(matter, -t) * &right)) * w;
            }
            toc += bra.dot(&(liouville_green(matter, t) * &right)) * w;
        }
    }
    Ok(NarrowbandResult { otoc: otoc * window, toc, window, timescale_warning })
}

/// The OTOC part rebuilt from short pulses: photon `a` at `tau`, photon `b` at
/// 0 (widths of two steps `dt`), detected at `t_a = 2 tau - t`, `t_b = tau - t`.
/// Each ordered double integral is divided by the same integral with unit
/// dipoles, then `-int_0^{2T} dt` is taken, so the result is directly
/// comparable with `NarrowbandResult::otoc`. Requires `tau > 2T`.
pub fn delta_wavepacket_otoc(matter: &MatterSystem, bs_delay: f64, tau: f64, dt: f64) -> Result<C64> {
    if !(tau > 2.0 * bs_delay) || !(bs_delay > 0.0) {
        return Err(Error::Validation(format!(
            "short-pulse route needs 0 < 2T < tau, got T = {bs_delay}, tau = {tau}"
        )));
    }
    let n = matter.dim();
    let unit = MatterSystem::new(matter.hamiltonian().clone(), matter.initial_state().clone())?
        .with_channel("a", identity(n), false)?
        .with_channel("b", identity(n), false)?;
    let a = DeltaPulse::for_grid(0.0, dt);
    let amp = SeparableAmplitude::product(Arc::new(a), Arc::new(a));
    let mut cfg = HomConfig::new(amp, 0.0, 0.0, matter.clone());
    cfg.bs_delay = bs_delay;
    cfg.wavepacket_delay = tau;
    cfg.quadrature = Quadrature { dt, t_min: None };
    let mut norm_cfg = cfg.clone();
    norm_cfg.matter = unit;
    let span = 2.0 * bs_delay;
    let mut total = ZERO;
    for (t, w) in simpson_nodes(span, panel_count(matter, span)) {
        cfg.t_a = 2.0 * tau - t;
        cfg.t_b = tau - t;
        norm_cfg.t_a = cfg.t_a;
        norm_cfg.t_b = cfg.t_b;
        total -= otoc_integral(&cfg)? / otoc_integral(&norm_cfg)? * w;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::matter::{multipoint_correlator, v_system_with_admixture, CorrelatorSpec, Insertion};

    fn params(t_e: f64) -> SpdcParameters {
        SpdcParameters { sigma_p: 0.05, t_e, omega_p0: 12.0, omega_a0: 6.0, omega_b0: 6.0 }
    }

    fn system() -> MatterSystem {
        v_system_with_admixture(1.0, 1.4, 0.8, 0.6, 0.4).unwrap()
    }

    #[test]
    fn window_is_open_interval() {
        assert_eq!(arrival_window(0.5), 0.0);
        assert_eq!(arrival_window(-0.5), 0.0);
        assert_eq!(arrival_window(0.4999), 1.0);
    }

    #[test]
    fn outside_the_window_the_otoc_part_is_exactly_zero() {
        let sys = system();
        for diff in [0.06, -0.2, 3.0] {
            let r = narrowband_spdc_coincidence(&params(0.1), &sys, 0.7, 1.4, diff).unwrap();
            assert_eq!(r.otoc, ZERO);
            assert!(r.toc.norm() > 0.0);
        }
        let inside = narrowband_spdc_coincidence(&params(0.1), &sys, 0.7, 1.4, 0.0).unwrap();
        assert!(inside.otoc.norm() > 1e-3);
    }

    #[test]
    fn zero_delay_gives_zero() {
        let r = narrowband_spdc_coincidence(&params(0.1), &system(), 0.0, 0.0, 0.0).unwrap();
        assert_eq!(r.otoc, ZERO);
        assert_eq!(r.toc, ZERO);
    }

    #[test]
    fn otoc_part_is_an_integrated_wiggling_correlator() {
        let sys = system();
        let (t_big, tau) = (0.6, 1.7);
        let r = narrowband_spdc_coincidence(&params(0.1), &sys, t_big, tau, tau - 2.0 * t_big).unwrap();
        let f = |t: f64| {
            let spec = CorrelatorSpec::from_left_to_right(vec![
                Insertion::full("a", 2.0 * tau - t),
                Insertion::full("b", tau - t),
                Insertion::full("a", tau),
                Insertion::full("b", 0.0),
            ])
            .unwrap();
            -multipoint_correlator(&sys, &spec).unwrap()
        };
        let n = 400;
        let direct: C64 = simpson_nodes(2.0 * t_big, n).into_iter().map(|(t, w)| f(t) * w).sum();
        assert!((r.otoc - direct).norm() <= 1e-8 * direct.norm(), "{} vs {direct}", r.otoc);
    }

    #[test]
    fn toc_part_is_time_ordered() {
        let sys = system();
        let (t_big, tau) = (0.5, 1.2);
        let r = narrowband_spdc_coincidence(&params(0.1), &sys, t_big, tau, 0.0).unwrap();
        // i <V_a(2 tau + t) V_b(tau + t) V_a(tau) V_b(0)> reordered onto a closed contour
        let f = |t: f64| {
            let spec = CorrelatorSpec::from_left_to_right(vec![
                Insertion::full("a", 2.0 * tau + t),
                Insertion::full("b", tau + t),
                Insertion::full("a", tau),
                Insertion::full("b", 0.0),
            ])
            .unwrap();
            c(0.0, 1.0) * multipoint_correlator(&sys, &spec).unwrap()
        };
        let direct: C64 = simpson_nodes(2.0 * t_big, 400).into_iter().map(|(t, w)| f(t) * w).sum();
        assert!((r.toc - direct).norm() <= 1e-8 * direct.norm(), "{} vs {direct}", r.toc);
    }

    #[test]
    fn short_pulse_route_agrees() {
        let sys = system();
        let (t_big, tau) = (0.4, 1.1);
        let r = narrowband_spdc_coincidence(&params(0.01), &sys, t_big, tau, tau - 2.0 * t_big).unwrap();
        let d = delta_wavepacket_otoc(&sys, t_big, tau, 0.002).unwrap();
        assert!((d - r.otoc).norm() <= 0.05 * r.otoc.norm(), "{d} vs {}", r.otoc);
    }

    #[test]
    fn slow_matter_sets_no_warning() {
        let sys = system();
        assert!(!narrowband_spdc_coincidence(&params(0.1), &sys, 0.5, 1.0, 0.0).unwrap().timescale_warning);
        assert!(narrowband_spdc_coincidence(&params(2.0), &sys, 0.5, 1.0, 0.0).unwrap().timescale_warning);
    }
}
