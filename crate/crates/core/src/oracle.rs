//! Exact propagation of matter coupled to two discrete field modes.
//!
//! Joint basis index: `m (n_max+1)^2 + n_a (n_max+1) + n_b`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interferometer::{build_fock_operators, induced_passive_map, ModeTransform, TwoModeFockOperators};
use crate::linalg::{c, hermiticity_residual, identity, kron, CMatrix, CVector, HermitianEigen, C64};
use crate::matter::{Flavor, InitialState, MatterSystem};

pub const MAX_JOINT_DIM: usize = 4096;
pub const DEFAULT_N_MAX: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingForm {
    /// `sum_c V_c (x) (c + c^dagger)`
    Full,
    /// `sum_c (mu_c (x) c^dagger + mu_c^dagger (x) c)`
    Rwa,
}

/// Matter channel `a` couples to mode `a`, channel `b` to mode `b`.
#[derive(Debug, Clone)]
pub struct JointModel {
    pub matter: MatterSystem,
    pub omega_a: f64,
    pub omega_b: f64,
    pub n_max: usize,
    pub lambda: f64,
    pub coupling: CouplingForm,
    ops: TwoModeFockOperators,
    h0: CMatrix,
    h1: CMatrix,
    eigen: HermitianEigen,
}

impl JointModel {
    pub fn new(
        matter: MatterSystem,
        omega_a: f64,
        omega_b: f64,
        n_max: usize,
        lambda: f64,
        coupling: CouplingForm,
    ) -> Result<Self> {
        let dim = matter.dim() * (n_max + 1).pow(2);
        if dim > MAX_JOINT_DIM {
            return Err(Error::Capability(format!(
                "joint dimension {dim} exceeds the supported maximum of {MAX_JOINT_DIM}"
            )));
        }
        let ops = build_fock_operators(n_max)?;
        let d = ops.dim();
        let id_m = identity(matter.dim());
        let field = &ops.a1_dag * &ops.a1 * c(omega_a, 0.0) + &ops.a2_dag * &ops.a2 * c(omega_b, 0.0);
        let h0 = kron(matter.hamiltonian(), &identity(d)) + kron(&id_m, &field);
        let mut h1 = CMatrix::zeros(dim, dim);
        for (label, (ann, cre)) in [("a", (&ops.a1, &ops.a1_dag)), ("b", (&ops.a2, &ops.a2_dag))] {
            match coupling {
                CouplingForm::Full => {
                    let v = matter.dipole(label)?;
                    h1 += kron(v, &(ann + cre));
                }
                CouplingForm::Rwa => {
                    let lower = matter.operator(label, Flavor::Lowering)?;
                    let raise = matter.operator(label, Flavor::Raising)?;
                    h1 += kron(&lower, cre) + kron(&raise, ann);
                }
            }
        }
        let h = &h0 + &h1 * c(lambda, 0.0);
        let res = hermiticity_residual(&h);
        if res > 1e-12 {
            return Err(Error::Validation(format!("joint hamiltonian is not Hermitian (residual {res:.3e})")));
        }
        let eigen = HermitianEigen::new(&h);
        Ok(JointModel { matter, omega_a, omega_b, n_max, lambda, coupling, ops, h0, h1, eigen })
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        JointModel::new(self.matter.clone(), self.omega_a, self.omega_b, self.n_max, lambda, self.coupling)
    }

    pub fn dim(&self) -> usize {
        self.h0.nrows()
    }

    pub fn field_dim(&self) -> usize {
        self.ops.dim()
    }

    pub fn fock(&self) -> &TwoModeFockOperators {
        &self.ops
    }

    /// Free Hamiltonian `H_matter + w_a n_a + w_b n_b`.
    pub fn h0(&self) -> &CMatrix {
        &self.h0
    }

    /// Coupling operator without the factor `lambda`.
    pub fn h1(&self) -> &CMatrix {
        &self.h1
    }

    pub fn hamiltonian(&self) -> CMatrix {
        &self.h0 + &self.h1 * c(self.lambda, 0.0)
    }

    /// Field operator lifted to the joint space.
    pub fn lift_field(&self, op: &CMatrix) -> CMatrix {
        kron(&identity(self.matter.dim()), op)
    }

    /// Matter initial state times the Fock state `|n_a, n_b>`.
    pub fn fock_product_state(&self, n_a: usize, n_b: usize) -> Result<CVector> {
        if n_a > self.n_max || n_b > self.n_max {
            return Err(Error::TruncationOverflow(format!(
                "Fock state |{n_a},{n_b}> exceeds the cutoff n_max = {}",
                self.n_max
            )));
        }
        let InitialState::Pure(psi_m) = self.matter.initial_state() else {
            return Err(Error::Capability("joint propagation needs a pure matter state".into()));
        };
        Ok(psi_m.kronecker(&self.ops.basis(n_a, n_b)))
    }

    /// `exp(-i H t) psi`.
    pub fn propagate(&self, psi: &CVector, t: f64) -> Result<CVector> {
        if psi.len() != self.dim() {
            return Err(Error::Validation(format!(
                "state has length {}, joint dimension is {}",
                psi.len(),
                self.dim()
            )));
        }
        let q = &self.eigen.vectors;
        let mut coeff = q.adjoint() * psi;
        for (k, z) in coeff.iter_mut().enumerate() {
            *z *= (-crate::linalg::I * self.eigen.values[k] * t).exp();
        }
        Ok(q * coeff)
    }

    /// Field-space map of a passive interferometer, exact on the photon sectors
    /// `N <= n_max` and the identity on the incomplete sectors above, so that it
    /// stays unitary on the truncated box. Delays are evaluated at the mean mode
    /// frequency.
    pub fn field_interferometer(&self, transform: &ModeTransform) -> Result<CMatrix> {
        let mut r = induced_passive_map(transform, 0.5 * (self.omega_a + self.omega_b), self.n_max)?;
        for k in 0..r.nrows() {
            let (na, nb) = self.ops.occupation(k);
            if na + nb > self.n_max {
                r[(k, k)] = C64::new(1.0, 0.0);
            }
        }
        Ok(r)
    }

    /// `field_interferometer` lifted to the joint space.
    pub fn interferometer_unitary(&self, transform: &ModeTransform) -> Result<CMatrix> {
        Ok(self.lift_field(&self.field_interferometer(transform)?))
    }

    /// Rotated coincidence observable `R^dagger (n_a n_b) R` restricted to the
    /// two-photon sector.
    pub fn coincidence_observable(&self, transform: &ModeTransform) -> Result<CMatrix> {
        let r = self.field_interferometer(transform)?;
        let nn = &self.ops.a1_dag * &self.ops.a1 * &self.ops.a2_dag * &self.ops.a2;
        let mut p = r.adjoint() * nn * &r;
        let two = self.ops.shell_indices(2);
        for i in 0..p.nrows() {
            for j in 0..p.ncols() {
                if !(two.contains(&i) && two.contains(&j)) {
                    p[(i, j)] = C64::new(0.0, 0.0);
                }
            }
        }
        Ok(self.lift_field(&p))
    }
}

/// `e^{-i H t}|psi>` for a joint model.
pub fn propagate(model: &JointModel, psi: &CVector, t: f64) -> Result<CVector> {
    model.propagate(psi, t)
}

/// Two-photon coincidence after the interferometer at the measurement time.
pub fn exact_coincidence(model: &JointModel, psi0: &CVector, transform: &ModeTransform, t: f64) -> Result<f64> {
    let p = model.coincidence_observable(transform)?;
    let psi = model.propagate(psi0, t)?;
    Ok(psi.dotc(&(p * &psi)).re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interferometer::beam_splitter;
    use crate::linalg::{expectation, I};
    use crate::matter::v_system_with_admixture;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn model(lambda: f64, coupling: CouplingForm) -> JointModel {
        let sys = v_system_with_admixture(1.0, 1.3, 0.9, 0.7, 0.3).unwrap();
        JointModel::new(sys, 1.1, 1.1, 2, lambda, coupling).unwrap()
    }

    #[test]
    fn dimension_limit() {
        let sys = v_system_with_admixture(1.0, 1.3, 0.9, 0.7, 0.3).unwrap();
        let err = JointModel::new(sys, 1.0, 1.0, 40, 0.1, CouplingForm::Full).unwrap_err();
        assert!(matches!(err, Error::Capability(_)));
    }

    #[test]
    fn zero_time_is_identity_and_norm_is_kept() {
        let m = model(0.2, CouplingForm::Full);
        let psi = m.fock_product_state(1, 1).unwrap();
        assert!((m.propagate(&psi, 0.0).unwrap() - &psi).norm() < 1e-14);
        for t in [0.5, 3.0, 17.0] {
            let out = m.propagate(&psi, t).unwrap();
            assert!((out.norm() - 1.0).abs() <= 1e-12);
            let h = m.hamiltonian();
            assert!((expectation(&h, &out) - expectation(&h, &psi)).norm() <= 1e-12);
        }
    }

    #[test]
    fn uncoupled_evolution_factorizes() {
        let m = model(0.0, CouplingForm::Full);
        let psi_m = CVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8), c(0.0, 0.0)]);
        let field = (m.fock().basis(1, 1) + m.fock().basis(2, 0)) * c(FRAC_1_SQRT_2, 0.0);
        let t = 2.3;
        let joint = m.propagate(&psi_m.kronecker(&field), t).unwrap();
        let um = m.matter.eigen().propagator(t);
        let phases = CVector::from_fn(field.len(), |k, _| {
            let (na, nb) = m.fock().occupation(k);
            (-I * (1.1 * na as f64 + 1.1 * nb as f64) * t).exp()
        });
        let expected = (um * psi_m).kronecker(&field.component_mul(&phases));
        assert!((joint - expected).norm() <= 1e-12);
    }

    #[test]
    fn rwa_conserves_excitations() {
        let m = model(0.3, CouplingForm::Rwa);
        let excited = CMatrix::from_diagonal(&CVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]));
        let n = kron(&excited, &identity(m.field_dim())) + m.lift_field(&m.fock().number);
        let psi = m.fock_product_state(1, 1).unwrap();
        let n0 = expectation(&n, &psi).re;
        for t in [1.0, 4.0, 9.0] {
            let out = m.propagate(&psi, t).unwrap();
            assert!((expectation(&n, &out).re - n0).abs() <= 1e-12);
        }
    }

    #[test]
    fn uncoupled_coincidences() {
        let m = model(0.0, CouplingForm::Full);
        let psi = m.fock_product_state(1, 1).unwrap();
        let id = ModeTransform::identity();
        assert!((exact_coincidence(&m, &psi, &id, 1.7).unwrap() - 1.0).abs() < 1e-14);
        let bs = beam_splitter(FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0).unwrap();
        assert!(exact_coincidence(&m, &psi, &bs, 1.7).unwrap().abs() < 1e-14);
    }
}
