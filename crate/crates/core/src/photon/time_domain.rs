//! Frequency to time conversion and temporal envelopes.
//!
//! The time-domain amplitude is `phi(t) = (2 pi)^{-1/2} sum_k phi(w_k) e^{-i w_k t} dw`
//! per photon, which preserves the grid L2 norm.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, SVD};
use rustfft::FftPlanner;

use super::amplitude::TwoPhotonAmplitude;
use super::grid::{FrequencyGrid, TimeGrid};
use crate::error::{Error, Result};
use crate::linalg::{c, C64, I, ZERO};

/// Conjugate time grid of a frequency grid: `t_j = (j - N/2) dt`, `dt = 2 pi / (N dw)`.
pub fn conjugate_time_grid(grid: &FrequencyGrid) -> TimeGrid {
    let n = grid.n_points;
    let dt = 2.0 * PI / (n as f64 * grid.spacing());
    TimeGrid { t0: -((n / 2) as f64) * dt, dt, n }
}

fn transform_axis(samples: &[C64], grid: &FrequencyGrid, planner: &mut FftPlanner<f64>) -> Vec<C64> {
    let n = samples.len();
    let half = (n / 2) as f64;
    let fft = planner.plan_fft_forward(n);
    // exp(-i w_k t_j) = exp(-i w_min t_j) exp(-2 pi i k j / N) exp(2 pi i k half / N)
    let mut buf: Vec<C64> = samples
        .iter()
        .enumerate()
        .map(|(k, z)| z * (I * 2.0 * PI * k as f64 * half / n as f64).exp())
        .collect();
    fft.process(&mut buf);
    let times = conjugate_time_grid(grid);
    let scale = grid.spacing() / (2.0 * PI).sqrt();
    buf.iter()
        .enumerate()
        .map(|(j, z)| z * (-I * grid.omega_min * times.point(j)).exp() * scale)
        .collect()
}

/// Single-photon envelope on the conjugate time grid.
pub fn envelope_to_time_domain(samples: &[C64], grid: &FrequencyGrid) -> (TimeGrid, Vec<C64>) {
    let mut planner = FftPlanner::new();
    (conjugate_time_grid(grid), transform_axis(samples, grid, &mut planner))
}

/// Two-photon amplitude sampled on a pair of time grids.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeDomainAmplitude {
    pub grid_a: TimeGrid,
    pub grid_b: TimeGrid,
    pub values: DMatrix<C64>,
}

impl TimeDomainAmplitude {
    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid_a.dt * self.grid_b.dt
    }
}

/// Two-dimensional transform of `Phi(w_a, w_b)` onto the conjugate time grids.
pub fn to_time_domain(phi: &TwoPhotonAmplitude) -> TimeDomainAmplitude {
    let mut planner = FftPlanner::new();
    let (na, nb) = (phi.values.nrows(), phi.values.ncols());
    let mut half = DMatrix::<C64>::zeros(na, nb);
    for i in 0..na {
        let row: Vec<C64> = phi.values.row(i).iter().copied().collect();
        let out = transform_axis(&row, &phi.grid_b, &mut planner);
        for j in 0..nb {
            half[(i, j)] = out[j];
        }
    }
    let mut values = DMatrix::<C64>::zeros(na, nb);
    for j in 0..nb {
        let col: Vec<C64> = half.column(j).iter().copied().collect();
        let out = transform_axis(&col, &phi.grid_a, &mut planner);
        for i in 0..na {
            values[(i, j)] = out[i];
        }
    }
    TimeDomainAmplitude {
        grid_a: conjugate_time_grid(&phi.grid_a),
        grid_b: conjugate_time_grid(&phi.grid_b),
        values,
    }
}

/// Temporal envelope of a single photon, evaluated at arbitrary times.
pub trait Envelope: Send + Sync + std::fmt::Debug {
    fn value(&self, t: f64) -> C64;
    /// Interval outside which the envelope is negligible.
    fn support(&self) -> (f64, f64);
}

pub type SharedEnvelope = Arc<dyn Envelope>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseNormalization {
    /// `integral |phi|^2 dt = 1`
    L2,
    /// `integral |phi| dt = 1`
    UnitArea,
}

/// `A exp(-(t - t0)^2 / (4 w^2)) exp(-i carrier (t - t0))`; `|phi|^2` has standard deviation `w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPulse {
    pub carrier: f64,
    pub center: f64,
    pub width: f64,
    pub normalization: PulseNormalization,
}

impl GaussianPulse {
    pub fn new(carrier: f64, center: f64, width: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(Error::Validation(format!("pulse width must be positive, got {width}")));
        }
        Ok(GaussianPulse { carrier, center, width, normalization: PulseNormalization::L2 })
    }

    fn amplitude(&self) -> f64 {
        match self.normalization {
            PulseNormalization::L2 => (2.0 * PI * self.width * self.width).powf(-0.25),
            PulseNormalization::UnitArea => 1.0 / (2.0 * self.width * PI.sqrt()),
        }
    }
}

impl Envelope for GaussianPulse {
    fn value(&self, t: f64) -> C64 {
        let x = t - self.center;
        let env = self.amplitude() * (-x * x / (4.0 * self.width * self.width)).exp();
        (-I * self.carrier * x).exp() * env
    }

    fn support(&self) -> (f64, f64) {
        (self.center - 10.0 * self.width, self.center + 10.0 * self.width)
    }
}

/// Narrow normalized Gaussian `exp(-t^2 / (2 eps^2)) / (sqrt(2 pi) eps)` standing in for a delta pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaPulse {
    pub center: f64,
    pub epsilon: f64,
    pub carrier: f64,
}

impl DeltaPulse {
    /// Width equal to two time-grid spacings.
    pub fn for_grid(center: f64, dt: f64) -> Self {
        DeltaPulse { center, epsilon: 2.0 * dt, carrier: 0.0 }
    }

    pub fn peak(&self) -> f64 {
        1.0 / ((2.0 * PI).sqrt() * self.epsilon)
    }
}

impl Envelope for DeltaPulse {
    fn value(&self, t: f64) -> C64 {
        let x = t - self.center;
        (-I * self.carrier * x).exp() * self.peak() * (-x * x / (2.0 * self.epsilon * self.epsilon)).exp()
    }

    fn support(&self) -> (f64, f64) {
        (self.center - 8.0 * self.epsilon, self.center + 8.0 * self.epsilon)
    }
}

/// Envelope given by its spectral samples, evaluated by direct summation.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEnvelope {
    pub grid: FrequencyGrid,
    pub samples: Vec<C64>,
    support: (f64, f64),
}

impl SpectralEnvelope {
    pub fn new(grid: FrequencyGrid, samples: Vec<C64>) -> Result<Self> {
        if samples.len() != grid.n_points {
            return Err(Error::Validation("envelope length does not match its grid".into()));
        }
        let (times, values) = envelope_to_time_domain(&samples, &grid);
        let total: f64 = values.iter().map(|z| z.norm_sqr()).sum();
        let support = if total == 0.0 {
            (0.0, 0.0)
        } else {
            let cut = 1e-14 * total;
            let lo = values.iter().position(|z| z.norm_sqr() > cut).unwrap_or(0);
            let hi = values.iter().rposition(|z| z.norm_sqr() > cut).unwrap_or(values.len() - 1);
            (times.point(lo) - times.dt, times.point(hi) + times.dt)
        };
        Ok(SpectralEnvelope { grid, samples, support })
    }
}

impl Envelope for SpectralEnvelope {
    fn value(&self, t: f64) -> C64 {
        let dw = self.grid.spacing();
        // phase recurrence keeps this O(n) without repeated exp calls
        let step = (-I * dw * t).exp();
        let mut ph = (-I * self.grid.omega_min * t).exp();
        let mut acc = ZERO;
        for z in &self.samples {
            acc += z * ph;
            ph *= step;
        }
        acc * dw / (2.0 * PI).sqrt()
    }

    fn support(&self) -> (f64, f64) {
        self.support
    }
}

/// Envelope delayed by `shift`: `phi(t - shift)`.
#[derive(Debug, Clone)]
pub struct Shifted {
    pub inner: SharedEnvelope,
    pub shift: f64,
}

impl Envelope for Shifted {
    fn value(&self, t: f64) -> C64 {
        self.inner.value(t - self.shift)
    }

    fn support(&self) -> (f64, f64) {
        let (a, b) = self.inner.support();
        (a + self.shift, b + self.shift)
    }
}

/// `Phi(t_a, t_b) = sum_k c_k alpha_k(t_a) beta_k(t_b)`.
#[derive(Debug, Clone)]
pub struct SeparableAmplitude {
    pub terms: Vec<(C64, SharedEnvelope, SharedEnvelope)>,
}

impl SeparableAmplitude {
    pub fn product(alpha: SharedEnvelope, beta: SharedEnvelope) -> Self {
        SeparableAmplitude { terms: vec![(c(1.0, 0.0), alpha, beta)] }
    }

    /// Singular-value factorization of a frequency-domain amplitude, dropping
    /// components below `rel_tol` of the largest singular value.
    pub fn from_spectral(phi: &TwoPhotonAmplitude, rel_tol: f64) -> Result<Self> {
        let svd = SVD::new(phi.values.clone(), true, true);
        let u = svd.u.as_ref().expect("left singular vectors requested");
        let vt = svd.v_t.as_ref().expect("right singular vectors requested");
        let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        let mut terms = Vec::new();
        for (k, &s) in svd.singular_values.iter().enumerate() {
            if s <= rel_tol * smax || s == 0.0 {
                continue;
            }
            let a = SpectralEnvelope::new(phi.grid_a, u.column(k).iter().copied().collect())?;
            let b = SpectralEnvelope::new(phi.grid_b, vt.row(k).iter().copied().collect())?;
            terms.push((c(s, 0.0), Arc::new(a) as SharedEnvelope, Arc::new(b) as SharedEnvelope));
        }
        Ok(SeparableAmplitude { terms })
    }

    pub fn value(&self, ta: f64, tb: f64) -> C64 {
        self.terms.iter().map(|(k, a, b)| k * a.value(ta) * b.value(tb)).sum()
    }

    pub fn swapped(&self) -> Self {
        SeparableAmplitude {
            terms: self.terms.iter().map(|(k, a, b)| (*k, b.clone(), a.clone())).collect(),
        }
    }

    pub fn scaled(&self, z: C64) -> Self {
        SeparableAmplitude {
            terms: self.terms.iter().map(|(k, a, b)| (k * z, a.clone(), b.clone())).collect(),
        }
    }

    pub fn sum(&self, other: &SeparableAmplitude) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        SeparableAmplitude { terms }
    }

    /// `[Phi(t_a, t_b) + e^{i theta} Phi(t_b, t_a)] / sqrt 2`.
    pub fn theta_symmetrized(&self, theta: f64) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        self.scaled(c(s, 0.0)).sum(&self.swapped().scaled((I * theta).exp() * s))
    }

    /// Delay photon `a` by `da` and photon `b` by `db`.
    pub fn shifted(&self, da: f64, db: f64) -> Self {
        let wrap = |e: &SharedEnvelope, d: f64| -> SharedEnvelope {
            if d == 0.0 {
                e.clone()
            } else {
                Arc::new(Shifted { inner: e.clone(), shift: d })
            }
        };
        SeparableAmplitude {
            terms: self.terms.iter().map(|(k, a, b)| (*k, wrap(a, da), wrap(b, db))).collect(),
        }
    }

    /// Union of the supports of all factors, per photon.
    pub fn support(&self) -> ((f64, f64), (f64, f64)) {
        let mut sa = (f64::INFINITY, f64::NEG_INFINITY);
        let mut sb = sa;
        for (_, a, b) in &self.terms {
            let (a0, a1) = a.support();
            let (b0, b1) = b.support();
            sa = (sa.0.min(a0), sa.1.max(a1));
            sb = (sb.0.min(b0), sb.1.max(b1));
        }
        (sa, sb)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photon::amplitude::{gaussian_envelope, product_amplitude, spdc_amplitude, SpdcParameters};

    fn spectral_gaussian(grid: &FrequencyGrid, center: f64, amp_width: f64) -> Vec<C64> {
        grid.points()
            .into_iter()
            .map(|w| c((-(w - center).powi(2) / (2.0 * amp_width * amp_width)).exp(), 0.0))
            .collect()
    }

    fn intensity_std(times: &TimeGrid, values: &[C64]) -> f64 {
        let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for (j, z) in values.iter().enumerate() {
            let (t, p) = (times.point(j), z.norm_sqr());
            m0 += p;
            m1 += p * t;
            m2 += p * t * t;
        }
        let mean = m1 / m0;
        (m2 / m0 - mean * mean).sqrt()
    }

    #[test]
    fn parseval_holds() {
        let g = FrequencyGrid::new(64, 2.0, 10.0).unwrap();
        let phi = product_amplitude(g, &gaussian_envelope(&g, 5.0, 0.7), g, &gaussian_envelope(&g, 6.5, 0.4))
            .unwrap()
            .delayed(crate::photon::amplitude::Photon::B, 1.3);
        let td = to_time_domain(&phi);
        assert!((td.norm_sqr() - phi.norm_sqr()).abs() <= 1e-9);
    }

    #[test]
    fn gaussian_width_inverts() {
        let g = FrequencyGrid::new(256, 0.0, 20.0).unwrap();
        for sigma in [0.5, 1.0, 2.0] {
            let (times, values) = envelope_to_time_domain(&spectral_gaussian(&g, 10.0, sigma), &g);
            // amplitude width w corresponds to an intensity standard deviation w / sqrt 2
            let width = intensity_std(&times, &values) * 2f64.sqrt();
            assert!((width - 1.0 / sigma).abs() < times.dt, "sigma {sigma}: width {width}");
        }
    }

    #[test]
    fn flat_spectrum_approaches_a_single_bin() {
        let g = FrequencyGrid::new(128, 0.0, 16.0).unwrap();
        let (_, values) = envelope_to_time_domain(&spectral_gaussian(&g, 8.0, 5.0 * g.span()), &g);
        let total: f64 = values.iter().map(|z| z.norm_sqr()).sum();
        let peak = values.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
        assert!(peak / total >= 0.95);
    }

    #[test]
    fn spectral_envelope_matches_fft_samples() {
        let g = FrequencyGrid::new(64, 1.0, 9.0).unwrap();
        let samples = gaussian_envelope(&g, 4.0, 0.6);
        let (times, values) = envelope_to_time_domain(&samples, &g);
        let env = SpectralEnvelope::new(g, samples).unwrap();
        for j in (0..times.n).step_by(5) {
            assert!((env.value(times.point(j)) - values[j]).norm() < 1e-12);
        }
    }

    #[test]
    fn gaussian_pulse_normalizations() {
        let mut p = GaussianPulse::new(3.0, 0.5, 0.2).unwrap();
        let dt = 0.001;
        let ts: Vec<f64> = (-4000..4000).map(|k| k as f64 * dt).collect();
        let l2: f64 = ts.iter().map(|&t| p.value(t).norm_sqr()).sum::<f64>() * dt;
        assert!((l2 - 1.0).abs() < 1e-9);
        p.normalization = PulseNormalization::UnitArea;
        let area: f64 = ts.iter().map(|&t| p.value(t).norm()).sum::<f64>() * dt;
        assert!((area - 1.0).abs() < 1e-9);
        let d = DeltaPulse { center: 0.0, epsilon: 0.01, carrier: 0.0 };
        let area: f64 = ts.iter().map(|&t| d.value(t).re).sum::<f64>() * dt;
        assert!((area - 1.0).abs() < 1e-9);
    }

    #[test]
    fn separable_factorization_reproduces_time_domain() {
        let g = FrequencyGrid::new(61, 3.0, 9.0).unwrap();
        let p = SpdcParameters { sigma_p: 0.4, t_e: 3.0, omega_p0: 12.0, omega_a0: 6.0, omega_b0: 6.0 };
        let phi = spdc_amplitude(&p, g, g).unwrap();
        let td = to_time_domain(&phi);
        let sep = SeparableAmplitude::from_spectral(&phi, 1e-12).unwrap();
        for i in (0..61).step_by(9) {
            for j in (0..61).step_by(7) {
                let v = sep.value(td.grid_a.point(i), td.grid_b.point(j));
                assert!((v - td.values[(i, j)]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn spdc_arrival_difference_is_box_like() {
        let g = FrequencyGrid::new(241, 0.0, 12.0).unwrap();
        let te = 4.0;
        let p = SpdcParameters { sigma_p: 0.05, t_e: te, omega_p0: 12.0, omega_a0: 6.0, omega_b0: 6.0 };
        let td = to_time_domain(&spdc_amplitude(&p, g, g).unwrap());
        // distribution of t_a - t_b, accumulated on the grid spacing
        let dt = td.grid_a.dt;
        let n = td.values.nrows();
        let mut hist = vec![0.0; 2 * n - 1];
        for i in 0..n {
            for j in 0..n {
                hist[i + n - 1 - j] += td.values[(i, j)].norm_sqr();
            }
        }
        let total: f64 = hist.iter().sum();
        let inside: f64 = hist
            .iter()
            .enumerate()
            .filter(|(k, _)| ((*k as f64 - (n - 1) as f64) * dt).abs() <= 1.05 * te)
            .map(|(_, h)| h)
            .sum();
        assert!(inside / total > 0.95, "fraction inside {}", inside / total);
        // flat top: centre and half-way point carry comparable weight
        let centre = hist[n - 1];
        let half_way = hist[n - 1 + (0.5 * te / dt).round() as usize];
        assert!((half_way / centre - 1.0).abs() < 0.2);
    }
}
