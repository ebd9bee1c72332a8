//! Gated coincidence counting of two photons scattered by the sample.
//!
//! Each photon couples to its own dipole channel through the rotating-wave
//! interaction `lambda (mu_c^dagger E_c + mu_c E_c^dagger)`. The detected field
//! is the incoming field plus the emitted one, `E_c - i lambda mu_c(t)`, so the
//! two-photon detection amplitude (a vector in matter space) collects four
//! paths: both photons free, `a` or `b` absorbed and re-emitted, and both
//! absorbed and re-emitted in every time order. The bare coincidence density is
//! `W(t_a, t_b) = sum_k p_k ||A_k(t_a, t_b)||^2` over the initial-state ensemble.
//!
//! Times on the grid are sample-plane times; a photon detected at `t` left the
//! sample at `t - R_c / c`.

use nalgebra::DMatrix;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::gate::{DetectionGate, GateKind};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, HermitianEigen, C64, ZERO};
use crate::matter::{Flavor, InitialState, MatterSystem};
use crate::photon::{Photon, SeparableAmplitude};

/// Gate widths between the latest gate centre and the upper limit `t*`.
pub const T_STAR_GATE_WIDTHS: f64 = 5.0;
/// Gate widths the scanned centres must extend beyond the photon support.
pub const SCAN_COVERAGE_WIDTHS: f64 = 3.0;

#[derive(Debug, Clone)]
pub struct GatedConfig {
    /// Sample-plane amplitude before exchange symmetrization.
    pub amplitude: SeparableAmplitude,
    pub matter: MatterSystem,
    pub lambda: f64,
    pub r_a: f64,
    pub r_b: f64,
    /// Step of the uniform time grid.
    pub dt: f64,
    /// Upper limit of the interaction integrals and the detection grid, in
    /// sample-plane time. Defaults to the latest gate centre plus five widths.
    pub t_star: Option<f64>,
}

impl GatedConfig {
    pub fn new(amplitude: SeparableAmplitude, matter: MatterSystem, lambda: f64, dt: f64) -> Self {
        GatedConfig { amplitude, matter, lambda, r_a: 0.0, r_b: 0.0, dt, t_star: None }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Validation(format!("time step must be positive, got {}", self.dt)));
        }
        if !self.lambda.is_finite() {
            return Err(Error::Validation("lambda is not finite".into()));
        }
        if !(self.r_a >= 0.0) || !(self.r_b >= 0.0) {
            return Err(Error::Validation("detector distances must be nonnegative".into()));
        }
        if let Some(t) = self.t_star {
            if !t.is_finite() {
                return Err(Error::Validation("t_star is not finite".into()));
            }
        }
        for label in ["a", "b"] {
            if !self.matter.has_split(label)? {
                return Err(Error::Configuration(format!(
                    "channel {label:?} needs a raising/lowering split for the scattering amplitude"
                )));
            }
        }
        Ok(())
    }

    fn lower_limit(&self) -> f64 {
        let ((a0, _), (b0, _)) = self.amplitude.support();
        a0.min(b0)
    }

    fn upper_limit(&self, latest_gate_end: f64) -> f64 {
        self.t_star.unwrap_or(latest_gate_end)
    }

    /// Uniform sample-plane grid ending exactly on `upper`.
    fn grid(&self, upper: f64) -> Vec<f64> {
        let lower = self.lower_limit();
        if upper <= lower {
            return Vec::new();
        }
        let k = ((upper - lower) / self.dt).ceil() as usize;
        (0..=k).map(|j| upper - (k - j) as f64 * self.dt).collect()
    }
}

/// `sum_k p_k |psi_k><psi_k|` of the initial state in the energy eigenbasis.
fn ensemble(matter: &MatterSystem) -> Vec<(f64, CVector)> {
    match matter.initial_state_eigen() {
        InitialState::Pure(psi) => vec![(1.0, psi.clone())],
        InitialState::Mixed(rho) => {
            let eig = HermitianEigen::new(rho);
            (0..eig.dim())
                .filter(|&k| eig.values[k] > 1e-14)
                .map(|k| (eig.values[k], eig.vectors.column(k).into_owned()))
                .collect()
        }
    }
}

fn trapezoid(n: usize, h: f64) -> Vec<f64> {
    (0..n).map(|j| if j == 0 || j + 1 == n { 0.5 * h } else { h }).collect()
}

/// Running trapezoid integrals `F_j = int_{t_0}^{t_j} f`.
fn cumulative<T>(values: &[T], h: f64, zero: T) -> Vec<T>
where
    T: Clone + std::ops::Add<Output = T> + std::ops::Mul<C64, Output = T>,
{
    let mut out = Vec::with_capacity(values.len());
    let mut acc = zero;
    for j in 0..values.len() {
        if j > 0 {
            acc = acc + (values[j - 1].clone() + values[j].clone()) * C64::new(0.5 * h, 0.0);
        }
        out.push(acc.clone());
    }
    out
}

/// Two-photon detection amplitude on a square sample-plane time grid, one
/// matter vector per `(t_a, t_b)` pair, stored row-major in `t_a`.
#[derive(Debug, Clone)]
pub struct AmplitudeGrid {
    pub times: Vec<f64>,
    pub dim: usize,
    pub values: Vec<C64>,
}

impl AmplitudeGrid {
    pub fn n(&self) -> usize {
        self.times.len()
    }

    pub fn at(&self, i: usize, j: usize) -> &[C64] {
        let k = (i * self.n() + j) * self.dim;
        &self.values[k..k + self.dim]
    }

    /// `||A(t_i, t_j)||^2`
    pub fn density(&self) -> DMatrix<f64> {
        let n = self.n();
        DMatrix::from_fn(n, n, |i, j| self.at(i, j).iter().map(|z| z.norm_sqr()).sum())
    }

    /// `Re <A(t_i, t_j) | B(t_i, t_j)>`
    pub fn cross(&self, other: &AmplitudeGrid) -> DMatrix<f64> {
        let n = self.n();
        DMatrix::from_fn(n, n, |i, j| {
            self.at(i, j).iter().zip(other.at(i, j)).map(|(x, y)| x.conj() * y).sum::<C64>().re
        })
    }
}

/// Detection amplitude for the initial matter vector `psi0` (energy eigenbasis).
pub fn scattering_amplitude(
    amplitude: &SeparableAmplitude,
    matter: &MatterSystem,
    lambda: f64,
    psi0: &CVector,
    times: &[f64],
) -> Result<AmplitudeGrid> {
    let n = times.len();
    let d = matter.dim();
    let mut values = vec![ZERO; n * n * d];
    if n == 0 {
        return Ok(AmplitudeGrid { times: times.to_vec(), dim: d, values });
    }
    let h = if n > 1 { times[1] - times[0] } else { 0.0 };
    let heis = |label: &str, flavor: Flavor| -> Result<Vec<CMatrix>> {
        times.iter().map(|&t| matter.heisenberg_eigen(label, flavor, t)).collect()
    };
    let (mu_a, mu_b) = (heis("a", Flavor::Lowering)?, heis("b", Flavor::Lowering)?);
    let (up_a, up_b) = (heis("a", Flavor::Raising)?, heis("b", Flavor::Raising)?);
    let l2 = C64::new(lambda * lambda, 0.0);
    let l4 = l2 * l2;
    let zero_v = CVector::zeros(d);
    let zero_m = CMatrix::zeros(d, d);
    for (coef, alpha, beta) in &amplitude.terms {
        let al: Vec<C64> = times.iter().map(|&t| alpha.value(t)).collect();
        let be: Vec<C64> = times.iter().map(|&t| beta.value(t)).collect();
        // absorption of one photon: Q_c(t) = int_{s<t} env(s) mu_c^dagger(s) psi0
        let qa = cumulative(&(0..n).map(|j| &up_a[j] * psi0 * al[j]).collect::<Vec<_>>(), h, zero_v.clone());
        let qb = cumulative(&(0..n).map(|j| &up_b[j] * psi0 * be[j]).collect::<Vec<_>>(), h, zero_v.clone());
        // P_c(t) = int_{s<t} env(s) mu_c^dagger(s)
        let pa = cumulative(&(0..n).map(|j| &up_a[j] * al[j]).collect::<Vec<_>>(), h, zero_m.clone());
        let pb = cumulative(&(0..n).map(|j| &up_b[j] * be[j]).collect::<Vec<_>>(), h, zero_m.clone());
        // both absorbed before t, in either order
        let y = {
            let ab = cumulative(&(0..n).map(|j| &up_a[j] * &qb[j] * al[j]).collect::<Vec<_>>(), h, zero_v.clone());
            let ba = cumulative(&(0..n).map(|j| &up_b[j] * &qa[j] * be[j]).collect::<Vec<_>>(), h, zero_v.clone());
            ab.into_iter().zip(ba).map(|(x, y)| x + y).collect::<Vec<_>>()
        };
        let va: Vec<CVector> = (0..n).map(|j| &mu_a[j] * &qa[j]).collect();
        let vb: Vec<CVector> = (0..n).map(|j| &mu_b[j] * &qb[j]).collect();
        let za: Vec<CVector> = (0..n).map(|j| &mu_a[j] * &y[j]).collect();
        let zb: Vec<CVector> = (0..n).map(|j| &mu_b[j] * &y[j]).collect();
        let ma: Vec<CMatrix> = (0..n).map(|j| &mu_a[j] * &pa[j]).collect();
        let mb: Vec<CMatrix> = (0..n).map(|j| &mu_b[j] * &pb[j]).collect();
        // later emission applied last: mu_a(t_a) [(P_a(t_a) - P_a(t_b)) v_b + z_b] for t_a >= t_b
        let wa: Vec<CVector> = (0..n).map(|j| &zb[j] - &pa[j] * &vb[j]).collect();
        let wb: Vec<CVector> = (0..n).map(|j| &za[j] - &pb[j] * &va[j]).collect();
        for i in 0..n {
            for j in 0..n {
                let both = if i >= j { &ma[i] * &vb[j] + &mu_a[i] * &wa[j] } else { &mb[j] * &va[i] + &mu_b[j] * &wb[i] };
                let amp = psi0 * (al[i] * be[j]) - (&va[i] * be[j] + &vb[j] * al[i]) * l2 + both * l4;
                let k = (i * n + j) * d;
                for (slot, z) in values[k..k + d].iter_mut().zip(amp.iter()) {
                    *slot += coef * z;
                }
            }
        }
    }
    Ok(AmplitudeGrid { times: times.to_vec(), dim: d, values })
}

/// `sum_ij q_i q_j g_a(i) g_b(j) M_ij`.
fn contract(weights: &[f64], m: &DMatrix<f64>, ga: &[f64], gb: &[f64]) -> f64 {
    let n = weights.len();
    let mut total = 0.0;
    for i in 0..n {
        let wi = weights[i] * ga[i];
        if wi == 0.0 {
            continue;
        }
        let row: f64 = (0..n).map(|j| weights[j] * gb[j] * m[(i, j)]).sum();
        total += wi * row;
    }
    total
}

/// Gate evaluated at the detection times `t + R` of the sample-plane grid.
fn gate_values(times: &[f64], gate: &DetectionGate, r: f64) -> Vec<f64> {
    times.iter().map(|&t| gate.value(t + r)).collect()
}

/// Bare coincidence density on the sample-plane grid, with the noninteracting
/// part `|Phi|^2` kept separately.
#[derive(Debug, Clone)]
pub struct BareSignal {
    pub times: Vec<f64>,
    pub weights: Vec<f64>,
    pub density: DMatrix<f64>,
    pub background: DMatrix<f64>,
}

impl BareSignal {
    pub fn compute(config: &GatedConfig, amplitude: &SeparableAmplitude, upper: f64) -> Result<Self> {
        config.validate()?;
        let times = config.grid(upper);
        let n = times.len();
        let mut density = DMatrix::zeros(n, n);
        for (p, psi) in ensemble(&config.matter) {
            density += scattering_amplitude(amplitude, &config.matter, config.lambda, &psi, &times)?.density() * p;
        }
        let background = DMatrix::from_fn(n, n, |i, j| amplitude.value(times[i], times[j]).norm_sqr());
        Ok(BareSignal { weights: trapezoid(n, config.dt), times, density, background })
    }

    fn contract(&self, m: &DMatrix<f64>, ga: &[f64], gb: &[f64]) -> f64 {
        contract(&self.weights, m, ga, gb)
    }

    fn gate_values(&self, gate: &DetectionGate, r: f64) -> Vec<f64> {
        gate_values(&self.times, gate, r)
    }

    pub fn gated(&self, gate_a: &DetectionGate, gate_b: &DetectionGate, r_a: f64, r_b: f64) -> f64 {
        self.contract(&self.density, &self.gate_values(gate_a, r_a), &self.gate_values(gate_b, r_b))
    }

    pub fn gated_background(&self, gate_a: &DetectionGate, gate_b: &DetectionGate, r_a: f64, r_b: f64) -> f64 {
        self.contract(&self.background, &self.gate_values(gate_a, r_a), &self.gate_values(gate_b, r_b))
    }

    /// `int int W` over the grid.
    pub fn ungated(&self) -> f64 {
        let ones = vec![1.0; self.times.len()];
        self.contract(&self.density, &ones, &ones)
    }
}

fn latest_end(gates: &[(&DetectionGate, f64)]) -> f64 {
    gates.iter().map(|(g, r)| g.center - r + T_STAR_GATE_WIDTHS * g.width).fold(f64::NEG_INFINITY, f64::max)
}

/// `C(theta, tbar_a, tbar_b) = int int D_a D_b W` for the exchange-symmetrized amplitude.
pub fn gated_coincidence(config: &GatedConfig, theta: f64, gate_a: &DetectionGate, gate_b: &DetectionGate) -> Result<f64> {
    gate_a.require(GateKind::Time)?;
    gate_b.require(GateKind::Time)?;
    let upper = config.upper_limit(latest_end(&[(gate_a, config.r_a), (gate_b, config.r_b)]));
    let bare = BareSignal::compute(config, &config.amplitude.theta_symmetrized(theta), upper)?;
    Ok(bare.gated(gate_a, gate_b, config.r_a, config.r_b))
}

/// Pathway-exchange cross term `int int D_a D_b Re<A_direct | A_swapped>`, equal
/// to half of `C(0) - C(pi)`.
pub fn exchange_cross_term(config: &GatedConfig, gate_a: &DetectionGate, gate_b: &DetectionGate) -> Result<f64> {
    gate_a.require(GateKind::Time)?;
    gate_b.require(GateKind::Time)?;
    config.validate()?;
    let upper = config.upper_limit(latest_end(&[(gate_a, config.r_a), (gate_b, config.r_b)]));
    let times = config.grid(upper);
    let direct = config.amplitude.clone();
    let swapped = config.amplitude.swapped();
    let mut cross = DMatrix::zeros(times.len(), times.len());
    for (p, psi) in ensemble(&config.matter) {
        let a1 = scattering_amplitude(&direct, &config.matter, config.lambda, &psi, &times)?;
        let a2 = scattering_amplitude(&swapped, &config.matter, config.lambda, &psi, &times)?;
        cross += a1.cross(&a2) * p;
    }
    let weights = trapezoid(times.len(), config.dt);
    Ok(contract(&weights, &cross, &gate_values(&times, gate_a, config.r_a), &gate_values(&times, gate_b, config.r_b)))
}

/// Scanned gate centres for the fixed-delay signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CenterScan {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    /// Gate width shared by both photons.
    pub width: f64,
    /// Photon whose gate centre is scanned; the other sits at `centre + tau`.
    pub reference: Photon,
}

impl CenterScan {
    fn nodes(&self) -> Result<Vec<(f64, f64)>> {
        if self.points < 2 || !(self.max > self.min) {
            return Err(Error::Validation("centre scan needs at least two points and max > min".into()));
        }
        let h = (self.max - self.min) / (self.points - 1) as f64;
        Ok((0..self.points)
            .map(|k| (self.min + k as f64 * h, if k == 0 || k + 1 == self.points { 0.5 * h } else { h }))
            .collect())
    }
}

/// `S(tau) = int dtbar C(theta, tbar, tbar + tau)` for each `tau`, sharing one
/// bare density.
pub fn fixed_delay_scan(config: &GatedConfig, theta: f64, taus: &[f64], scan: &CenterScan) -> Result<Vec<f64>> {
    let nodes = scan.nodes()?;
    let gate = DetectionGate::time(0.0, scan.width)?;
    let ((a0, a1), (b0, b1)) = config.amplitude.support();
    let (lo, hi) = (a0.min(b0), a1.max(b1));
    let tau_max = taus.iter().cloned().fold(0.0, f64::max);
    let tau_min = taus.iter().cloned().fold(0.0, f64::min);
    let r_ref = match scan.reference {
        Photon::A => config.r_a,
        Photon::B => config.r_b,
    };
    // the scanned gate must sweep across the whole photon support
    let need_lo = lo + r_ref - SCAN_COVERAGE_WIDTHS * scan.width;
    let need_hi = hi + r_ref + SCAN_COVERAGE_WIDTHS * scan.width;
    if scan.min > need_lo || scan.max < need_hi {
        return Err(Error::Coverage {
            message: "scanned gate centres do not cover the photon support; widen the scan range".into(),
            required: need_hi - need_lo,
            available: scan.max - scan.min,
        });
    }
    let latest = scan.max + tau_max.max(-tau_min) - config.r_a.min(config.r_b) + T_STAR_GATE_WIDTHS * scan.width;
    let upper = config.upper_limit(latest);
    let bare = BareSignal::compute(config, &config.amplitude.theta_symmetrized(theta), upper)?;
    let mut out = Vec::with_capacity(taus.len());
    for &tau in taus {
        let mut s = 0.0;
        for &(c, q) in &nodes {
            let (ca, cb) = match scan.reference {
                Photon::A => (c, c + tau),
                Photon::B => (c + tau, c),
            };
            s += q * bare.gated(&gate.with_center(ca), &gate.with_center(cb), config.r_a, config.r_b);
        }
        out.push(s);
    }
    Ok(out)
}

pub fn fixed_delay_signal(config: &GatedConfig, theta: f64, tau: f64, scan: &CenterScan) -> Result<f64> {
    Ok(fixed_delay_scan(config, theta, &[tau], scan)?[0])
}

/// Normalized ordering asymmetry `sum [S(tau) - S(-tau)] / sum [S(tau) + S(-tau)]`
/// over the positive delays given.
pub fn ordering_asymmetry(config: &GatedConfig, theta: f64, taus: &[f64], scan: &CenterScan) -> Result<f64> {
    let mut all: Vec<f64> = taus.to_vec();
    all.extend(taus.iter().map(|t| -t));
    let s = fixed_delay_scan(config, theta, &all, scan)?;
    let k = taus.len();
    let num: f64 = (0..k).map(|i| s[i] - s[i + k]).sum();
    let den: f64 = (0..k).map(|i| s[i] + s[i + k]).sum();
    Ok(if den == 0.0 { 0.0 } else { num / den })
}

/// Mixed time-frequency coincidence map: photon `a` gated in time, photon `b`
/// in frequency. Rows follow `time_centers`, columns `frequency_centers`.
pub fn time_frequency_map(
    config: &GatedConfig,
    theta: f64,
    time_centers: &[f64],
    time_width: f64,
    frequency_centers: &[f64],
    frequency_width: f64,
) -> Result<DMatrix<f64>> {
    config.validate()?;
    if time_centers.is_empty() || frequency_centers.is_empty() {
        return Err(Error::Validation("time-frequency map needs nonempty centre lists".into()));
    }
    let tg = DetectionGate::time(0.0, time_width)?;
    let fg = DetectionGate::frequency(0.0, frequency_width)?;
    // photon b is not gated in time, so its whole wavepacket is kept
    let (_, (_, b_end)) = config.amplitude.support();
    let latest = (time_centers.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - config.r_a
        + T_STAR_GATE_WIDTHS * time_width)
        .max(b_end);
    let times = config.grid(config.upper_limit(latest));
    let n = times.len();
    let mut out = DMatrix::zeros(time_centers.len(), frequency_centers.len());
    if n == 0 {
        return Ok(out);
    }
    let h = config.dt;
    // zero padding for a frequency step well below the gate width
    let m = {
        let want = (2.0 * std::f64::consts::PI / (h * 0.1 * frequency_width)).ceil() as usize;
        want.max(4 * n).next_power_of_two()
    };
    let dw = 2.0 * std::f64::consts::PI / (m as f64 * h);
    let omegas: Vec<f64> = (0..m).map(|k| if k < m / 2 { k as f64 * dw } else { (k as f64 - m as f64) * dw }).collect();
    let fft = FftPlanner::<f64>::new().plan_fft_inverse(m);
    let amp = config.amplitude.theta_symmetrized(theta);
    let t0 = times[0];
    let scale = h / (2.0 * std::f64::consts::PI).sqrt();
    let phases: Vec<C64> = omegas.iter().map(|w| C64::new(0.0, w * t0).exp() * scale).collect();
    // spectral density |A~(t_a, w)|^2 summed over matter components and ensemble
    let mut spec = DMatrix::<f64>::zeros(n, m);
    for (p, psi) in ensemble(&config.matter) {
        let grid = scattering_amplitude(&amp, &config.matter, config.lambda, &psi, &times)?;
        let mut buf = vec![ZERO; m];
        for i in 0..n {
            for comp in 0..grid.dim {
                buf.iter_mut().for_each(|z| *z = ZERO);
                for j in 0..n {
                    buf[j] = grid.at(i, j)[comp];
                }
                fft.process(&mut buf);
                for (k, z) in buf.iter().enumerate() {
                    spec[(i, k)] += p * (z * phases[k]).norm_sqr();
                }
            }
        }
    }
    // frequency-gated spectrum per t_a; the Gaussian gate is cut at ten widths
    let mut gated = DMatrix::<f64>::zeros(n, frequency_centers.len());
    for (col, &wc) in frequency_centers.iter().enumerate() {
        let f = fg.with_center(wc);
        let band: Vec<(usize, f64)> = omegas
            .iter()
            .enumerate()
            .filter(|(_, &w)| (w - wc).abs() <= 10.0 * frequency_width)
            .map(|(k, &w)| (k, f.value(w) * dw))
            .collect();
        for i in 0..n {
            gated[(i, col)] = band.iter().map(|&(k, fw)| fw * spec[(i, k)]).sum();
        }
    }
    let q = trapezoid(n, h);
    for (r, &tc) in time_centers.iter().enumerate() {
        let g = tg.with_center(tc);
        let tw: Vec<f64> = (0..n).map(|i| q[i] * g.value(times[i] + config.r_a)).collect();
        for col in 0..frequency_centers.len() {
            out[(r, col)] = (0..n).map(|i| tw[i] * gated[(i, col)]).sum();
        }
    }
    Ok(out)
}

/// Single point of the time-frequency map; `gate_a` must be a time gate and
/// `gate_b` a frequency gate.
pub fn time_frequency_coincidence(
    config: &GatedConfig,
    theta: f64,
    gate_a: &DetectionGate,
    gate_b: &DetectionGate,
) -> Result<f64> {
    if gate_a.kind == gate_b.kind {
        return Err(Error::GateKind(format!("time-frequency coincidence needs one gate of each kind, got two {:?} gates", gate_a.kind)));
    }
    gate_a.require(GateKind::Time)?;
    gate_b.require(GateKind::Frequency)?;
    Ok(time_frequency_map(config, theta, &[gate_a.center], gate_a.width, &[gate_b.center], gate_b.width)?[(0, 0)])
}
