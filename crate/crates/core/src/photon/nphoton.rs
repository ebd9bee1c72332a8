//! N-photon amplitudes with pairwise exchange phases.

use nalgebra::DMatrix;

use super::grid::FrequencyGrid;
use crate::error::{Error, Result};
use crate::linalg::{c, C64, I};

pub const MAX_PHOTONS: usize = 4;

/// Rank-`n` amplitude on a common frequency grid, stored row-major with the
/// first photon's index varying slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct NPhotonAmplitude {
    pub n: usize,
    pub grid: FrequencyGrid,
    pub values: Vec<C64>,
}

impl NPhotonAmplitude {
    pub fn new(n: usize, grid: FrequencyGrid, values: Vec<C64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::Validation(format!("need at least two photons, got {n}")));
        }
        if n > MAX_PHOTONS {
            return Err(Error::Capability(format!(
                "{n}-photon amplitudes exceed the supported maximum of {MAX_PHOTONS}"
            )));
        }
        let expected = grid.n_points.pow(n as u32);
        if values.len() != expected {
            return Err(Error::Validation(format!(
                "expected {expected} amplitude values, got {}",
                values.len()
            )));
        }
        Ok(NPhotonAmplitude { n, grid, values })
    }

    /// Product of single-photon envelopes, not normalized.
    pub fn product(grid: FrequencyGrid, envelopes: &[Vec<C64>]) -> Result<Self> {
        let n = envelopes.len();
        if n > MAX_PHOTONS {
            return Err(Error::Capability(format!(
                "{n}-photon amplitudes exceed the supported maximum of {MAX_PHOTONS}"
            )));
        }
        if envelopes.iter().any(|e| e.len() != grid.n_points) {
            return Err(Error::Validation("envelope length does not match the grid".into()));
        }
        let m = grid.n_points;
        let total = m.pow(n as u32);
        let values = (0..total)
            .map(|flat| {
                let idx = unravel(flat, m, n);
                idx.iter().zip(envelopes).map(|(&k, e)| e[k]).product()
            })
            .collect();
        NPhotonAmplitude::new(n, grid, values)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.spacing().powi(self.n as i32)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `P_ij Phi`: the amplitude with photon arguments `i` and `j` exchanged.
    pub fn exchanged(&self, i: usize, j: usize) -> Result<Self> {
        if i >= self.n || j >= self.n {
            return Err(Error::Validation(format!("photon index out of range for n = {}", self.n)));
        }
        let m = self.grid.n_points;
        let values = (0..self.values.len())
            .map(|flat| {
                let mut idx = unravel(flat, m, self.n);
                idx.swap(i, j);
                self.values[ravel(&idx, m)]
            })
            .collect();
        Ok(NPhotonAmplitude { n: self.n, grid: self.grid, values })
    }
}

fn unravel(mut flat: usize, m: usize, n: usize) -> Vec<usize> {
    let mut idx = vec![0; n];
    for k in (0..n).rev() {
        idx[k] = flat % m;
        flat /= m;
    }
    idx
}

fn ravel(idx: &[usize], m: usize) -> usize {
    idx.iter().fold(0, |acc, &k| acc * m + k)
}

fn binomial2(n: usize) -> usize {
    n * (n - 1) / 2
}

/// `Phi_Theta = N^-1 [Phi + sum_{i<j} e^{i theta_ij} P_ij Phi]` with
/// `N = sqrt(C(n,2) + 1)`. Only the upper triangle of `theta` is read.
pub fn exchange_phase_amplitude(phi: &NPhotonAmplitude, theta: &DMatrix<f64>) -> Result<NPhotonAmplitude> {
    if phi.n > MAX_PHOTONS {
        return Err(Error::Capability(format!(
            "{}-photon amplitudes exceed the supported maximum of {MAX_PHOTONS}",
            phi.n
        )));
    }
    if theta.nrows() != phi.n || theta.ncols() != phi.n {
        return Err(Error::Validation(format!(
            "theta matrix must be {0}x{0}, got {1}x{2}",
            phi.n,
            theta.nrows(),
            theta.ncols()
        )));
    }
    let mut acc = phi.values.clone();
    for i in 0..phi.n {
        for j in (i + 1)..phi.n {
            let phase = (I * theta[(i, j)]).exp();
            let swapped = phi.exchanged(i, j)?;
            for (a, s) in acc.iter_mut().zip(&swapped.values) {
                *a += phase * s;
            }
        }
    }
    let norm = c(((binomial2(phi.n) + 1) as f64).sqrt(), 0.0);
    acc.iter_mut().for_each(|z| *z /= norm);
    Ok(NPhotonAmplitude { n: phi.n, grid: phi.grid, values: acc })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photon::amplitude::{gaussian_envelope, product_amplitude, theta_symmetrize};

    fn grid() -> FrequencyGrid {
        FrequencyGrid::new(24, 0.0, 12.0).unwrap()
    }

    #[test]
    fn two_photons_match_theta_symmetrize() {
        let g = grid();
        let (ea, eb) = (gaussian_envelope(&g, 5.0, 0.9), gaussian_envelope(&g, 7.0, 1.1));
        let two = product_amplitude(g, &ea, g, &eb).unwrap();
        let np = NPhotonAmplitude::new(2, g, two.values.transpose().iter().copied().collect()).unwrap();
        let theta = 0.83;
        let out = exchange_phase_amplitude(&np, &DMatrix::from_row_slice(2, 2, &[0.0, theta, -theta, 0.0])).unwrap();
        let reference = theta_symmetrize(&two, theta).unwrap();
        for i in 0..g.n_points {
            for j in 0..g.n_points {
                assert!((out.values[i * g.n_points + j] - reference.values[(i, j)]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn symmetric_three_photon_doubles() {
        let g = grid();
        let e = gaussian_envelope(&g, 6.0, 1.0);
        let phi = NPhotonAmplitude::product(g, &[e.clone(), e.clone(), e]).unwrap();
        let out = exchange_phase_amplitude(&phi, &DMatrix::zeros(3, 3)).unwrap();
        for (o, p) in out.values.iter().zip(&phi.values) {
            assert!((o - p * 2.0).norm() < 1e-14);
        }
    }

    #[test]
    fn orthogonal_three_photon_norm_is_preserved() {
        let g = FrequencyGrid::new(40, 0.0, 12.0).unwrap();
        let es: Vec<_> = [2.0, 6.0, 10.0].iter().map(|&w| gaussian_envelope(&g, w, 0.3)).collect();
        let phi = NPhotonAmplitude::product(g, &es).unwrap();
        let theta = DMatrix::from_row_slice(3, 3, &[0.0, 0.4, 1.9, -0.4, 0.0, 2.7, -1.9, -2.7, 0.0]);
        let out = exchange_phase_amplitude(&phi, &theta).unwrap();
        assert!((out.norm() - phi.norm()).abs() / phi.norm() <= 1e-10);
    }

    #[test]
    fn five_photons_are_rejected() {
        let g = grid();
        let e = gaussian_envelope(&g, 6.0, 1.0);
        let err = NPhotonAmplitude::product(g, &vec![e; 5]).unwrap_err();
        assert!(matches!(err, Error::Capability(_)));
    }

    #[test]
    fn exchange_is_an_involution() {
        let g = FrequencyGrid::new(8, 0.0, 1.0).unwrap();
        let values = (0..512).map(|k| c(k as f64, -(k as f64) * 0.5)).collect();
        let phi = NPhotonAmplitude::new(3, g, values).unwrap();
        let twice = phi.exchanged(0, 2).unwrap().exchanged(0, 2).unwrap();
        assert_eq!(twice, phi);
    }
}
