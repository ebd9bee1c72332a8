//! Small dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Frobenius norm of `m - m^dagger`.
pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    frobenius(&(m - m.adjoint()))
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues sorted ascending.
///
/// Ties keep the order produced by the solver after a stable sort, so
/// degenerate subspaces get an arbitrary orthonormal basis.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Columns are eigenvectors, matching `values`.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn new(h: &CMatrix) -> Self {
        // symmetrize to suppress round-off anti-Hermitian parts
        let sym = (h + h.adjoint()) * C64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(sym);
        let n = eig.eigenvalues.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut vectors = CMatrix::zeros(n, n);
        for (new, &old) in order.iter().enumerate() {
            vectors.set_column(new, &eig.eigenvectors.column(old));
        }
        HermitianEigen { values, vectors }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// exp(-i H t)
    pub fn propagator(&self, t: f64) -> CMatrix {
        self.phase_function(|e| (-I * e * t).exp())
    }

    /// V f(Λ) V^dagger for a scalar function of the eigenvalues.
    pub fn phase_function(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let fj = f(self.values[j]);
            for i in 0..n {
                scaled[(i, j)] *= fj;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

/// Matrix exponential of a general complex matrix.
pub fn expm(m: &CMatrix) -> CMatrix {
    m.clone().exp()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Expectation `<psi| op |psi>`.
pub fn expectation(op: &CMatrix, psi: &CVector) -> C64 {
    psi.dotc(&(op * psi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn propagator_matches_expm() {
        let h = CMatrix::from_row_slice(
            2,
            2,
            &[c(1.0, 0.0), c(0.3, -0.2), c(0.3, 0.2), c(-0.5, 0.0)],
        );
        let eig = HermitianEigen::new(&h);
        let u = eig.propagator(0.7);
        let reference = expm(&(h * (-I * 0.7)));
        assert!(frobenius(&(u - reference)) < 1e-12);
    }

    #[test]
    fn eigenvalues_sorted() {
        let h = CMatrix::from_diagonal(&CVector::from_vec(vec![c(3.0, 0.0), c(-1.0, 0.0), c(2.0, 0.0)]));
        let eig = HermitianEigen::new(&h);
        assert_eq!(eig.values, vec![-1.0, 2.0, 3.0]);
    }
}
