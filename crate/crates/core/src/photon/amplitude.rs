//! Two-photon joint spectral amplitudes `Phi(w_a, w_b)` and their two-mode
//! generalization after passive mixing.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::grid::FrequencyGrid;
use crate::error::{Error, Result};
use crate::interferometer::ModeTransform;
use crate::linalg::{c, C64, I, ZERO};

/// Amplitude of `|Psi> = sum Phi(w_a, w_b) a^dagger(w_a) b^dagger(w_b) |0> dw_a dw_b`.
///
/// Rows index `w_a` on `grid_a`, columns `w_b` on `grid_b`. The norm is the
/// grid L2 norm `sum |Phi|^2 dw_a dw_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPhotonAmplitude {
    pub grid_a: FrequencyGrid,
    pub grid_b: FrequencyGrid,
    pub values: DMatrix<C64>,
}

/// Intensity-normalized Gaussian spectral envelope: `|phi|^2` has standard
/// deviation `sigma` about `center`.
pub fn gaussian_envelope(grid: &FrequencyGrid, center: f64, sigma: f64) -> Vec<C64> {
    grid.points()
        .into_iter()
        .map(|w| c((-(w - center).powi(2) / (4.0 * sigma * sigma)).exp(), 0.0))
        .collect()
}

fn envelope_norm(values: &[C64], grid: &FrequencyGrid) -> f64 {
    (values.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.spacing()).sqrt()
}

/// Overlap `sum conj(phi_a) phi_b dw` of two envelopes on the same grid.
pub fn envelope_overlap(phi_a: &[C64], phi_b: &[C64], grid: &FrequencyGrid) -> C64 {
    phi_a
        .iter()
        .zip(phi_b)
        .map(|(a, b)| a.conj() * b)
        .sum::<C64>()
        * grid.spacing()
}

/// Normalized product `phi_a(w_a) phi_b(w_b)`.
pub fn product_amplitude(
    grid_a: FrequencyGrid,
    phi_a: &[C64],
    grid_b: FrequencyGrid,
    phi_b: &[C64],
) -> Result<TwoPhotonAmplitude> {
    if phi_a.len() != grid_a.n_points || phi_b.len() != grid_b.n_points {
        return Err(Error::Validation("envelope length does not match its grid".into()));
    }
    let (na, nb) = (envelope_norm(phi_a, &grid_a), envelope_norm(phi_b, &grid_b));
    if na == 0.0 || nb == 0.0 {
        return Err(Error::Validation("spectral envelope is identically zero".into()));
    }
    if !na.is_finite() || !nb.is_finite() {
        return Err(Error::Validation("spectral envelope is not finite".into()));
    }
    let values = DMatrix::from_fn(grid_a.n_points, grid_b.n_points, |i, j| phi_a[i] * phi_b[j]);
    TwoPhotonAmplitude { grid_a, grid_b, values }.normalized()
}

impl TwoPhotonAmplitude {
    pub fn new(grid_a: FrequencyGrid, grid_b: FrequencyGrid, values: DMatrix<C64>) -> Result<Self> {
        if values.nrows() != grid_a.n_points || values.ncols() != grid_b.n_points {
            return Err(Error::Validation(format!(
                "amplitude shape {}x{} does not match grids {}x{}",
                values.nrows(),
                values.ncols(),
                grid_a.n_points,
                grid_b.n_points
            )));
        }
        Ok(TwoPhotonAmplitude { grid_a, grid_b, values })
    }

    pub fn zeros_like(&self) -> Self {
        TwoPhotonAmplitude {
            grid_a: self.grid_a,
            grid_b: self.grid_b,
            values: DMatrix::zeros(self.values.nrows(), self.values.ncols()),
        }
    }

    pub fn measure(&self) -> f64 {
        self.grid_a.spacing() * self.grid_b.spacing()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.measure()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Inner product `<self|other>` with the grid measure.
    pub fn inner(&self, other: &TwoPhotonAmplitude) -> C64 {
        self.values.iter().zip(other.values.iter()).map(|(a, b)| a.conj() * b).sum::<C64>()
            * self.measure()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::Validation(format!("cannot normalize amplitude of norm {n}")));
        }
        Ok(TwoPhotonAmplitude {
            grid_a: self.grid_a,
            grid_b: self.grid_b,
            values: &self.values / c(n, 0.0),
        })
    }

    pub fn is_square(&self) -> bool {
        self.grid_a == self.grid_b
    }

    fn require_square(&self) -> Result<()> {
        if !self.is_square() {
            return Err(Error::Validation(
                "photon exchange needs identical frequency grids on both axes".into(),
            ));
        }
        Ok(())
    }

    /// `Phi(w_b, w_a)`: the amplitude with the two photons' spectra exchanged.
    pub fn exchanged(&self) -> Result<Self> {
        self.require_square()?;
        Ok(TwoPhotonAmplitude {
            grid_a: self.grid_a,
            grid_b: self.grid_b,
            values: self.values.transpose(),
        })
    }

    pub fn scaled(&self, z: C64) -> Self {
        TwoPhotonAmplitude {
            grid_a: self.grid_a,
            grid_b: self.grid_b,
            values: &self.values * z,
        }
    }

    /// Multiply photon `a` (or `b`) by the spectral phase
    /// `exp(i gdd/2 (w - w0)^2)` of a group-delay dispersive element.
    pub fn with_dispersion(&self, photon: Photon, gdd: f64, w0: f64) -> Self {
        let mut out = self.clone();
        match photon {
            Photon::A => {
                for (i, w) in self.grid_a.points().into_iter().enumerate() {
                    let ph = (I * 0.5 * gdd * (w - w0).powi(2)).exp();
                    for j in 0..self.values.ncols() {
                        out.values[(i, j)] *= ph;
                    }
                }
            }
            Photon::B => {
                for (j, w) in self.grid_b.points().into_iter().enumerate() {
                    let ph = (I * 0.5 * gdd * (w - w0).powi(2)).exp();
                    for i in 0..self.values.nrows() {
                        out.values[(i, j)] *= ph;
                    }
                }
            }
        }
        out
    }

    /// Delay photon `a` (or `b`) by `tau`: spectral phase `exp(i w tau)`, so that
    /// its temporal envelope moves from `t` to `t + tau`.
    pub fn delayed(&self, photon: Photon, tau: f64) -> Self {
        let mut out = self.clone();
        let grid = match photon {
            Photon::A => self.grid_a,
            Photon::B => self.grid_b,
        };
        for (k, w) in grid.points().into_iter().enumerate() {
            let ph = (I * w * tau).exp();
            match photon {
                Photon::A => out.values.row_mut(k).iter_mut().for_each(|z| *z *= ph),
                Photon::B => out.values.column_mut(k).iter_mut().for_each(|z| *z *= ph),
            }
        }
        out
    }

    /// Marginal mean and standard deviation of `w_a + w_b` under `|Phi|^2`.
    pub fn sum_frequency_moments(&self) -> (f64, f64) {
        let (wa, wb) = (self.grid_a.points(), self.grid_b.points());
        let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for i in 0..wa.len() {
            for j in 0..wb.len() {
                let p = self.values[(i, j)].norm_sqr();
                let s = wa[i] + wb[j];
                m0 += p;
                m1 += p * s;
                m2 += p * s * s;
            }
        }
        let mean = m1 / m0;
        (mean, (m2 / m0 - mean * mean).max(0.0).sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Photon {
    A,
    B,
}

/// `Phi_theta(w_a, w_b) = [Phi(w_a, w_b) + e^{i theta} Phi(w_b, w_a)] / sqrt 2`.
///
/// The result is deliberately not renormalized.
pub fn theta_symmetrize(phi: &TwoPhotonAmplitude, theta: f64) -> Result<TwoPhotonAmplitude> {
    let swapped = phi.exchanged()?;
    let phase = (I * theta).exp();
    let values = (&phi.values + &swapped.values * phase) / c(std::f64::consts::SQRT_2, 0.0);
    Ok(TwoPhotonAmplitude { grid_a: phi.grid_a, grid_b: phi.grid_b, values })
}

/// Parameters of a narrowband down-conversion pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpdcParameters {
    /// Pump bandwidth (intensity standard deviation of the sum frequency), rad/s.
    pub sigma_p: f64,
    /// Entanglement time, s.
    pub t_e: f64,
    pub omega_p0: f64,
    pub omega_a0: f64,
    pub omega_b0: f64,
}

impl SpdcParameters {
    pub fn validate(&self, spacing: f64) -> Result<()> {
        for (name, v) in [
            ("sigma_p", self.sigma_p),
            ("t_e", self.t_e),
            ("omega_p0", self.omega_p0),
            ("omega_a0", self.omega_a0),
            ("omega_b0", self.omega_b0),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Validation(format!("{name} = {v} must be positive")));
            }
        }
        let mismatch = (self.omega_a0 + self.omega_b0 - self.omega_p0).abs();
        if mismatch > spacing {
            return Err(Error::Validation(format!(
                "omega_a0 + omega_b0 - omega_p0 = {mismatch:.3e} exceeds the grid spacing {spacing:.3e}"
            )));
        }
        Ok(())
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Gaussian pump envelope in the sum frequency times sinc phase matching in
/// the frequency difference, normalized.
pub fn spdc_amplitude(
    params: &SpdcParameters,
    grid_a: FrequencyGrid,
    grid_b: FrequencyGrid,
) -> Result<TwoPhotonAmplitude> {
    params.validate(grid_a.spacing().max(grid_b.spacing()))?;
    for (grid, center, label) in [(grid_a, params.omega_a0, "a"), (grid_b, params.omega_b0, "b")] {
        let need_lo = center - 3.0 * params.sigma_p;
        let need_hi = center + 3.0 * params.sigma_p;
        if need_lo < grid.omega_min || need_hi > grid.omega_max {
            return Err(Error::Coverage {
                message: format!("photon {label} grid must span 6 sigma_p about its centre"),
                required: 6.0 * params.sigma_p,
                available: grid.span(),
            });
        }
        if grid.span() < 6.0 / params.t_e {
            return Err(Error::Coverage {
                message: format!("photon {label} grid must span 6 / T_e in the difference frequency"),
                required: 6.0 / params.t_e,
                available: grid.span(),
            });
        }
    }
    let detuning0 = params.omega_a0 - params.omega_b0;
    let (wa, wb) = (grid_a.points(), grid_b.points());
    let values = DMatrix::from_fn(wa.len(), wb.len(), |i, j| {
        let s = wa[i] + wb[j] - params.omega_p0;
        let d = wa[i] - wb[j] - detuning0;
        let pump = (-s * s / (4.0 * params.sigma_p * params.sigma_p)).exp();
        c(pump * sinc(d * params.t_e / 2.0), 0.0)
    });
    TwoPhotonAmplitude::new(grid_a, grid_b, values)?.normalized()
}

/// General two-photon state of two modes: `ab`, `aa` and `bb` components.
///
/// `aa` and `bb` hold symmetric kernels `F(x, y)` of
/// `(1/sqrt 2) sum F(x, y) c^dagger(x) c^dagger(y) |0>`, normalized so that
/// their squared norm is the usual grid L2 norm.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeState {
    pub ab: TwoPhotonAmplitude,
    pub aa: TwoPhotonAmplitude,
    pub bb: TwoPhotonAmplitude,
}

impl TwoModeState {
    pub fn from_amplitude(phi: &TwoPhotonAmplitude) -> Result<Self> {
        phi.require_square()?;
        Ok(TwoModeState { ab: phi.clone(), aa: phi.zeros_like(), bb: phi.zeros_like() })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.ab.norm_sqr() + self.aa.norm_sqr() + self.bb.norm_sqr()
    }

    /// Express the state in the output basis of a passive element.
    ///
    /// With `a_out = M(w) a_in`, each input creation operator maps as
    /// `c_in_j^dagger(w) = sum_i M_ij(w) c_out_i^dagger(w)`.
    pub fn transformed(&self, transform: &ModeTransform) -> Result<TwoModeState> {
        let grid = self.ab.grid_a;
        let w = grid.points();
        let n = w.len();
        let maps = w
            .iter()
            .map(|&om| transform.creation_map_at(om))
            .collect::<Result<Vec<_>>>()?;
        let s2 = std::f64::consts::SQRT_2;
        // unsymmetrized output kernels: coefficient of c_i^dagger(x) c_j^dagger(y)
        let mut out = [[DMatrix::<C64>::zeros(n, n), DMatrix::zeros(n, n)], [DMatrix::zeros(n, n), DMatrix::zeros(n, n)]];
        // inputs as (mode of first photon, mode of second photon, kernel, weight)
        let inputs = [
            (0usize, 1usize, &self.ab.values, c(1.0, 0.0)),
            (0, 0, &self.aa.values, c(1.0 / s2, 0.0)),
            (1, 1, &self.bb.values, c(1.0 / s2, 0.0)),
        ];
        for (m1, m2, kernel, weight) in inputs {
            for x in 0..n {
                for y in 0..n {
                    let f = kernel[(x, y)] * weight;
                    if f == ZERO {
                        continue;
                    }
                    for i in 0..2 {
                        for j in 0..2 {
                            out[i][j][(x, y)] += f * maps[x][(i, m1)] * maps[y][(j, m2)];
                        }
                    }
                }
            }
        }
        let ab = &out[0][1] + out[1][0].transpose();
        let aa = (&out[0][0] + out[0][0].transpose()) / c(s2, 0.0);
        let bb = (&out[1][1] + out[1][1].transpose()) / c(s2, 0.0);
        let wrap = |values| TwoPhotonAmplitude { grid_a: grid, grid_b: grid, values };
        Ok(TwoModeState { ab: wrap(ab), aa: wrap(aa), bb: wrap(bb) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interferometer::{beam_splitter, delayed_balanced_bs};
    use std::f64::consts::PI;

    fn grid() -> FrequencyGrid {
        FrequencyGrid::new(96, 0.0, 12.0).unwrap()
    }

    fn product(ca: f64, cb: f64, s: f64) -> TwoPhotonAmplitude {
        let g = grid();
        product_amplitude(g, &gaussian_envelope(&g, ca, s), g, &gaussian_envelope(&g, cb, s)).unwrap()
    }

    #[test]
    fn identical_gaussians_give_symmetric_amplitude() {
        let phi = product(6.0, 6.0, 0.8);
        let diff = (&phi.values - phi.values.transpose()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff <= 1e-14);
        assert!((phi.norm() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn distant_wavepackets_are_orthogonal() {
        let g = grid();
        let a = gaussian_envelope(&g, 3.0, 0.3);
        let b = gaussian_envelope(&g, 9.0, 0.3);
        let ov = envelope_overlap(&a, &b, &g);
        let na = envelope_overlap(&a, &a, &g).re.sqrt();
        let nb = envelope_overlap(&b, &b, &g).re.sqrt();
        assert!(ov.norm() / (na * nb) <= 1e-8);
    }

    #[test]
    fn zero_envelope_is_rejected() {
        let g = grid();
        let z = vec![ZERO; g.n_points];
        assert!(product_amplitude(g, &z, g, &gaussian_envelope(&g, 6.0, 1.0)).is_err());
    }

    #[test]
    fn theta_symmetrization_cases() {
        let sym = product(6.0, 6.0, 0.8);
        assert!(theta_symmetrize(&sym, PI).unwrap().norm() <= 1e-12);
        let plus = theta_symmetrize(&sym, 0.0).unwrap();
        let diff = (&plus.values - &sym.values * c(2f64.sqrt(), 0.0)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-13);
        // orthogonal envelopes: cross terms vanish, norm preserved
        let orth = product(3.0, 9.0, 0.3);
        for theta in [0.0, 0.7, PI / 2.0, PI] {
            let out = theta_symmetrize(&orth, theta).unwrap();
            assert!((out.norm() - orth.norm()).abs() <= 1e-10);
        }
    }

    #[test]
    fn normalization_is_idempotent() {
        let phi = product(5.0, 6.5, 0.6).scaled(c(3.0, 1.0));
        let once = phi.normalized().unwrap();
        let twice = once.normalized().unwrap();
        assert!((&once.values - &twice.values).iter().all(|z| z.norm() < 1e-15));
    }

    fn spdc_params(sigma_p: f64) -> SpdcParameters {
        SpdcParameters { sigma_p, t_e: 2.0, omega_p0: 12.0, omega_a0: 6.0, omega_b0: 6.0 }
    }

    #[test]
    fn spdc_is_exchange_symmetric_for_degenerate_centers() {
        let g = FrequencyGrid::new(81, 2.0, 10.0).unwrap();
        let phi = spdc_amplitude(&spdc_params(0.3), g, g).unwrap();
        let diff = (&phi.values - phi.values.transpose()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff <= 1e-12);
    }

    #[test]
    fn spdc_sum_frequency_width() {
        let g = FrequencyGrid::new(201, 2.0, 10.0).unwrap();
        for sigma_p in [0.2, 0.1] {
            let phi = spdc_amplitude(&spdc_params(sigma_p), g, g).unwrap();
            let (mean, std) = phi.sum_frequency_moments();
            assert!((mean - 12.0).abs() < 0.05);
            assert!((std / sigma_p - 1.0).abs() < 0.1, "sigma_p {sigma_p}: std {std}");
        }
    }

    #[test]
    fn spdc_coverage_errors() {
        let narrow = FrequencyGrid::new(33, 5.5, 6.5).unwrap();
        let err = spdc_amplitude(&spdc_params(0.3), narrow, narrow).unwrap_err();
        assert!(matches!(err, Error::Coverage { .. }));
        let mut p = spdc_params(0.3);
        p.omega_a0 = 7.0;
        let g = FrequencyGrid::new(81, 2.0, 10.0).unwrap();
        assert!(matches!(spdc_amplitude(&p, g, g), Err(Error::Validation(_))));
    }

    #[test]
    fn hom_two_mode_part_vanishes_at_zero_delay() {
        let phi = product(6.0, 6.0, 0.8);
        let out = TwoModeState::from_amplitude(&phi).unwrap().transformed(&delayed_balanced_bs(0.0)).unwrap();
        assert!(out.ab.values.iter().all(|z| z.norm() <= 1e-12));
        assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn delayed_splitter_two_mode_part() {
        let phi = product(4.0, 7.0, 0.5);
        let t = 0.8;
        let out = TwoModeState::from_amplitude(&phi).unwrap().transformed(&delayed_balanced_bs(t)).unwrap();
        let w = phi.grid_a.points();
        for x in (0..w.len()).step_by(7) {
            for y in (0..w.len()).step_by(5) {
                let expected = (phi.values[(x, y)] - (-I * (w[x] - w[y]) * t).exp() * phi.values[(y, x)]) * 0.5;
                assert!((out.ab.values[(x, y)] - expected).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn transform_then_inverse_restores_state() {
        let phi = product(4.0, 7.0, 0.5).delayed(Photon::A, 0.3);
        let state = TwoModeState::from_amplitude(&phi).unwrap();
        for bs in [delayed_balanced_bs(1.7), beam_splitter(0.6, 0.8, 0.4).unwrap()] {
            let there = state.transformed(&bs).unwrap();
            assert!((there.norm_sqr() - 1.0).abs() < 1e-12);
            let back = there.transformed(&bs.inverse()).unwrap();
            let err = (&back.ab.values - &state.ab.values).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(err < 1e-12);
            assert!(back.aa.values.iter().chain(back.bb.values.iter()).all(|z| z.norm() < 1e-12));
        }
    }

    #[test]
    fn global_phase_commutes_with_construction() {
        let phi = product(5.0, 6.0, 0.6);
        let alpha = c(0.0, 0.9).exp();
        let lhs = theta_symmetrize(&phi.scaled(alpha), 0.4).unwrap();
        let rhs = theta_symmetrize(&phi, 0.4).unwrap().scaled(alpha);
        assert!((&lhs.values - &rhs.values).iter().all(|z| z.norm() < 1e-15));
    }
}
