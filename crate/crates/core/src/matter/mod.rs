//! Few-level matter with dipole channels and multipoint dipole correlators.

pub mod io;

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, hermiticity_residual, CMatrix, CVector, HermitianEigen, C64, I, ONE, ZERO};

pub const HERMITICITY_TOL: f64 = 1e-12;
pub const STATE_NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    /// Full dipole `V = mu + mu^dagger`.
    Full,
    /// Lowering part `mu`.
    Lowering,
    /// Raising part `mu^dagger`.
    Raising,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Pure(CVector),
    Mixed(CMatrix),
}

#[derive(Debug, Clone)]
struct Channel {
    v: CMatrix,
    /// Eigenbasis representations: full, lowering, raising.
    v_eig: CMatrix,
    split: Option<(CMatrix, CMatrix)>,
}

/// Hermitian Hamiltonian, named dipole channels and an initial state.
/// Eigenvectors are computed once; all operator algebra runs in the energy eigenbasis.
#[derive(Debug, Clone)]
pub struct MatterSystem {
    hamiltonian: CMatrix,
    eigen: HermitianEigen,
    channels: BTreeMap<String, Channel>,
    initial: InitialState,
    initial_eig: InitialState,
}

impl MatterSystem {
    pub fn new(hamiltonian: CMatrix, initial: InitialState) -> Result<Self> {
        let dim = hamiltonian.nrows();
        if dim == 0 || hamiltonian.ncols() != dim {
            return Err(Error::Validation("hamiltonian must be a nonempty square matrix".into()));
        }
        let res = hermiticity_residual(&hamiltonian);
        if res > HERMITICITY_TOL {
            return Err(Error::Validation(format!("hamiltonian is not Hermitian (residual {res:.3e})")));
        }
        let eigen = HermitianEigen::new(&hamiltonian);
        let mut sys = MatterSystem {
            hamiltonian,
            eigen,
            channels: BTreeMap::new(),
            initial: InitialState::Pure(CVector::zeros(dim)),
            initial_eig: InitialState::Pure(CVector::zeros(dim)),
        };
        sys.set_initial(initial)?;
        Ok(sys)
    }

    /// Diagonal Hamiltonian with the given level energies.
    pub fn from_energies(energies: &[f64], initial: InitialState) -> Result<Self> {
        let h = DMatrix::from_fn(energies.len(), energies.len(), |i, j| {
            if i == j {
                c(energies[i], 0.0)
            } else {
                ZERO
            }
        });
        MatterSystem::new(h, initial)
    }

    fn set_initial(&mut self, initial: InitialState) -> Result<()> {
        let dim = self.dim();
        let q = &self.eigen.vectors;
        let eig = match &initial {
            InitialState::Pure(psi) => {
                if psi.len() != dim {
                    return Err(Error::Validation(format!("initial state has length {}, expected {dim}", psi.len())));
                }
                let n = psi.norm();
                if (n - 1.0).abs() > STATE_NORM_TOL {
                    return Err(Error::Validation(format!("initial state norm {n} differs from 1")));
                }
                InitialState::Pure(q.adjoint() * psi)
            }
            InitialState::Mixed(rho) => {
                if rho.nrows() != dim || rho.ncols() != dim {
                    return Err(Error::Validation("density matrix shape does not match the hamiltonian".into()));
                }
                let tr = rho.trace();
                if (tr - ONE).norm() > STATE_NORM_TOL || hermiticity_residual(rho) > HERMITICITY_TOL {
                    return Err(Error::Validation(format!("density matrix has trace {tr} or is not Hermitian")));
                }
                InitialState::Mixed(q.adjoint() * rho * q)
            }
        };
        self.initial = initial;
        self.initial_eig = eig;
        Ok(())
    }

    pub fn with_initial(mut self, initial: InitialState) -> Result<Self> {
        self.set_initial(initial)?;
        Ok(self)
    }

    /// Add a Hermitian dipole channel. With `split`, the lowering/raising parts are
    /// formed in the energy eigenbasis; the dipole must then have no diagonal
    /// (permanent) elements there.
    pub fn with_channel(mut self, label: &str, v: CMatrix, split: bool) -> Result<Self> {
        let dim = self.dim();
        if v.nrows() != dim || v.ncols() != dim {
            return Err(Error::Validation(format!("dipole {label:?} has the wrong shape")));
        }
        let res = hermiticity_residual(&v);
        if res > HERMITICITY_TOL {
            return Err(Error::Validation(format!("dipole {label:?} is not Hermitian (residual {res:.3e})")));
        }
        let q = &self.eigen.vectors;
        let v_eig = q.adjoint() * &v * q;
        let split = if split {
            if let Some(k) = (0..dim).find(|&k| v_eig[(k, k)].norm() > HERMITICITY_TOL) {
                return Err(Error::Configuration(format!(
                    "dipole {label:?} has a permanent moment on level {k}; it cannot be split into raising and lowering parts"
                )));
            }
            // lowering: <i|mu|j> nonzero only for lower-energy i < j
            let lowering = DMatrix::from_fn(dim, dim, |i, j| if i < j { v_eig[(i, j)] } else { ZERO });
            let raising = lowering.adjoint();
            Some((lowering, raising))
        } else {
            None
        };
        self.channels.insert(label.to_string(), Channel { v, v_eig, split });
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn eigen(&self) -> &HermitianEigen {
        &self.eigen
    }

    pub fn energies(&self) -> &[f64] {
        &self.eigen.values
    }

    pub fn initial_state(&self) -> &InitialState {
        &self.initial
    }

    /// Initial state expressed in the energy eigenbasis.
    pub fn initial_state_eigen(&self) -> &InitialState {
        &self.initial_eig
    }

    pub fn channel_labels(&self) -> Vec<&str> {
        self.channels.keys().map(String::as_str).collect()
    }

    pub fn has_split(&self, label: &str) -> Result<bool> {
        Ok(self.channel(label)?.split.is_some())
    }

    fn channel(&self, label: &str) -> Result<&Channel> {
        self.channels
            .get(label)
            .ok_or_else(|| Error::UnknownChannel(label.to_string()))
    }

    pub fn dipole(&self, label: &str) -> Result<&CMatrix> {
        Ok(&self.channel(label)?.v)
    }

    /// Channel operator of the given flavor in the energy eigenbasis.
    pub fn operator_eigen(&self, label: &str, flavor: Flavor) -> Result<&CMatrix> {
        let ch = self.channel(label)?;
        match flavor {
            Flavor::Full => Ok(&ch.v_eig),
            Flavor::Lowering | Flavor::Raising => {
                let (lo, hi) = ch.split.as_ref().ok_or_else(|| {
                    Error::Configuration(format!("channel {label:?} has no raising/lowering split"))
                })?;
                Ok(if flavor == Flavor::Lowering { lo } else { hi })
            }
        }
    }

    /// Channel operator of the given flavor in the input basis.
    pub fn operator(&self, label: &str, flavor: Flavor) -> Result<CMatrix> {
        let q = &self.eigen.vectors;
        Ok(q * self.operator_eigen(label, flavor)? * q.adjoint())
    }

    /// Heisenberg-picture operator in the energy eigenbasis:
    /// `O_ij exp(i (E_i - E_j) t)`.
    pub fn heisenberg_eigen(&self, label: &str, flavor: Flavor, t: f64) -> Result<CMatrix> {
        let o = self.operator_eigen(label, flavor)?;
        let e = &self.eigen.values;
        Ok(DMatrix::from_fn(o.nrows(), o.ncols(), |i, j| o[(i, j)] * (I * (e[i] - e[j]) * t).exp()))
    }

    /// Apply the eigenbasis Heisenberg operator `O(t)` to an eigenbasis vector.
    pub fn apply_heisenberg(&self, label: &str, flavor: Flavor, t: f64, v: &CVector) -> Result<CVector> {
        let o = self.operator_eigen(label, flavor)?;
        let e = &self.eigen.values;
        let rotated = CVector::from_fn(v.len(), |j, _| v[j] * (-I * e[j] * t).exp());
        let mut out = o * rotated;
        for (i, z) in out.iter_mut().enumerate() {
            *z *= (I * e[i] * t).exp();
        }
        Ok(out)
    }

    /// Free propagator `exp(-i H t)` in the energy eigenbasis (diagonal).
    pub fn phases(&self, t: f64) -> Vec<C64> {
        self.eigen.values.iter().map(|&e| (-I * e * t).exp()).collect()
    }
}

/// `exp(i H t) V_c exp(-i H t)` in the input basis.
pub fn heisenberg_dipole(sys: &MatterSystem, channel: &str, t: f64) -> Result<CMatrix> {
    let q = &sys.eigen.vectors;
    Ok(q * sys.heisenberg_eigen(channel, Flavor::Full, t)? * q.adjoint())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Insertion {
    pub channel: String,
    pub time: f64,
    pub flavor: Flavor,
}

impl Insertion {
    pub fn new(channel: &str, time: f64, flavor: Flavor) -> Self {
        Insertion { channel: channel.to_string(), time, flavor }
    }

    pub fn full(channel: &str, time: f64) -> Self {
        Insertion::new(channel, time, Flavor::Full)
    }
}

/// Ordered insertions; the first entry is the rightmost operator in `<...>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorSpec {
    pub insertions: Vec<Insertion>,
}

impl CorrelatorSpec {
    pub fn new(insertions: Vec<Insertion>) -> Result<Self> {
        if insertions.is_empty() {
            return Err(Error::Validation("correlator needs at least one insertion".into()));
        }
        if let Some(bad) = insertions.iter().find(|x| !x.time.is_finite()) {
            return Err(Error::Validation(format!("insertion time {} is not finite", bad.time)));
        }
        Ok(CorrelatorSpec { insertions })
    }

    /// Written left to right as in `<O_m ... O_1>`.
    pub fn from_left_to_right(ops: Vec<Insertion>) -> Result<Self> {
        CorrelatorSpec::new(ops.into_iter().rev().collect())
    }

    /// Spec of the adjoint product: reversed order, raising and lowering exchanged.
    pub fn adjoint(&self) -> Self {
        let insertions = self
            .insertions
            .iter()
            .rev()
            .map(|x| Insertion {
                channel: x.channel.clone(),
                time: x.time,
                flavor: match x.flavor {
                    Flavor::Full => Flavor::Full,
                    Flavor::Lowering => Flavor::Raising,
                    Flavor::Raising => Flavor::Lowering,
                },
            })
            .collect();
        CorrelatorSpec { insertions }
    }

    pub fn shifted(&self, delta: f64) -> Self {
        CorrelatorSpec {
            insertions: self
                .insertions
                .iter()
                .map(|x| Insertion { time: x.time + delta, ..x.clone() })
                .collect(),
        }
    }
}

/// `<psi_0| O_m(t_m) ... O_1(t_1) |psi_0>` (or `tr[O_m ... O_1 rho_0]`), applied in list order.
pub fn multipoint_correlator(sys: &MatterSystem, spec: &CorrelatorSpec) -> Result<C64> {
    match &sys.initial_eig {
        InitialState::Pure(psi) => {
            let mut phi = psi.clone();
            for x in &spec.insertions {
                phi = sys.apply_heisenberg(&x.channel, x.flavor, x.time, &phi)?;
            }
            Ok(psi.dotc(&phi))
        }
        InitialState::Mixed(rho) => {
            let mut m = rho.clone();
            for x in &spec.insertions {
                m = sys.heisenberg_eigen(&x.channel, x.flavor, x.time)? * m;
            }
            Ok(m.trace())
        }
    }
}

/// Correlator with raising/lowering insertions; channels must carry a split.
pub fn rwa_correlator(sys: &MatterSystem, spec: &CorrelatorSpec) -> Result<C64> {
    for x in &spec.insertions {
        if x.flavor != Flavor::Full && !sys.has_split(&x.channel)? {
            return Err(Error::Configuration(format!(
                "channel {:?} has no raising/lowering split",
                x.channel
            )));
        }
    }
    multipoint_correlator(sys, spec)
}

/// Row-major vectorization of an operator: `vec(A X B) = (A kron B^T) vec(X)`.
pub fn vectorize(op: &CMatrix) -> CVector {
    let m = op.ncols();
    CVector::from_fn(op.nrows() * m, |k, _| op[(k / m, k % m)])
}

pub fn unvectorize(v: &CVector, n: usize) -> CMatrix {
    DMatrix::from_fn(n, n, |i, j| v[i * n + j])
}

/// Superoperator Green's function `-i theta(t) U(t) (.) U(t)^dagger` as a matrix on
/// row-major vectorized operators, with `U(t) = exp(-i H t)` in the input basis.
pub fn liouville_green(sys: &MatterSystem, t: f64) -> CMatrix {
    let n = sys.dim();
    if t < 0.0 {
        return CMatrix::zeros(n * n, n * n);
    }
    let u = sys.eigen.propagator(t);
    u.kronecker(&u.map(|z| z.conj())) * (-I)
}

/// Two-level system: ground at 0, excited at `omega0`, dipole `d` on channel `label`.
pub fn two_level(omega0: f64, d: C64, label: &str) -> Result<MatterSystem> {
    let v = DMatrix::from_row_slice(2, 2, &[ZERO, d, d.conj(), ZERO]);
    MatterSystem::from_energies(&[0.0, omega0], InitialState::Pure(CVector::from_vec(vec![ONE, ZERO])))?
        .with_channel(label, v, true)
}

/// Ground state plus two excited levels; channel `a` couples `g-e1`, channel `b` couples `g-e2`.
pub fn v_system(omega1: f64, omega2: f64, da: f64, db: f64) -> Result<MatterSystem> {
    v_system_with_admixture(omega1, omega2, da, db, 0.0)
}

/// V-system whose channels also reach the other excited level with relative strength `mix`:
/// `V_a = d_a (|g><e1| + mix |g><e2|) + h.c.`, `V_b = d_b (|g><e2| + mix |g><e1|) + h.c.`
///
/// With `mix = 0`, `V_a V_b` maps `e2` to `e1` and squares to zero, so
/// `<V_a(t) V_b(0) V_a(t) V_b(0)>` vanishes for every state.
pub fn v_system_with_admixture(omega1: f64, omega2: f64, da: f64, db: f64, mix: f64) -> Result<MatterSystem> {
    let coupling = |main: usize, other: usize, d: f64| {
        let mut v = CMatrix::zeros(3, 3);
        for (k, s) in [(main, 1.0), (other, mix)] {
            v[(0, k)] = c(d * s, 0.0);
            v[(k, 0)] = c(d * s, 0.0);
        }
        v
    };
    let ground = CVector::from_vec(vec![ONE, ZERO, ZERO]);
    MatterSystem::from_energies(&[0.0, omega1, omega2], InitialState::Pure(ground))?
        .with_channel("a", coupling(1, 2, da), true)?
        .with_channel("b", coupling(2, 1, db), true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frobenius;
    use nalgebra::SymmetricEigen;

    fn superposition_v_system() -> MatterSystem {
        let s = (1.0f64 / 3.0).sqrt();
        v_system_with_admixture(1.0, 1.7, 0.8, 0.6, 0.4)
            .unwrap()
            .with_initial(InitialState::Pure(CVector::from_vec(vec![c(s, 0.0), c(s, 0.0), c(0.0, s)])))
            .unwrap()
    }

    #[test]
    fn heisenberg_dipole_at_zero_time_is_the_dipole() {
        let sys = v_system(1.0, 1.7, 0.8, 0.6).unwrap();
        let v0 = heisenberg_dipole(&sys, "a", 0.0).unwrap();
        assert!(frobenius(&(v0 - sys.dipole("a").unwrap())) <= 1e-15);
        assert!(matches!(heisenberg_dipole(&sys, "z", 0.0), Err(Error::UnknownChannel(_))));
    }

    #[test]
    fn two_level_phase_evolution() {
        let d = c(0.3, -0.4);
        let sys = two_level(2.5, d, "a").unwrap();
        for t in [0.0, 0.3, 1.7, -2.2] {
            let vt = heisenberg_dipole(&sys, "a", t).unwrap();
            assert!((vt[(0, 1)] - (-I * 2.5 * t).exp() * d).norm() < 1e-14);
        }
    }

    #[test]
    fn heisenberg_spectrum_is_preserved() {
        let sys = superposition_v_system();
        let spec = |m: CMatrix| {
            let mut e = SymmetricEigen::new(m).eigenvalues.iter().copied().collect::<Vec<f64>>();
            e.sort_by(|a, b| a.partial_cmp(b).unwrap());
            e
        };
        let e0 = spec(sys.dipole("b").unwrap().clone());
        for t in [0.4, 3.1, 10.0] {
            let vt = heisenberg_dipole(&sys, "b", t).unwrap();
            assert!(hermiticity_residual(&vt) <= 1e-12);
            for (x, y) in spec(vt).iter().zip(&e0) {
                assert!((x - y).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn single_insertion_on_eigenstate_vanishes() {
        let sys = v_system(1.0, 1.7, 0.8, 0.6).unwrap();
        let spec = CorrelatorSpec::new(vec![Insertion::full("a", 0.9)]).unwrap();
        assert_eq!(multipoint_correlator(&sys, &spec).unwrap(), ZERO);
    }

    #[test]
    fn two_level_two_point_function() {
        let d = c(0.6, 0.2);
        let sys = two_level(1.3, d, "a").unwrap();
        let t = 0.77;
        let spec = CorrelatorSpec::new(vec![Insertion::full("a", 0.0), Insertion::full("a", t)]).unwrap();
        let expected = (-I * 1.3 * t).exp() * d.norm_sqr();
        assert!((multipoint_correlator(&sys, &spec).unwrap() - expected).norm() < 1e-14);
        let rwa = CorrelatorSpec::new(vec![Insertion::new("a", 0.0, Flavor::Raising), Insertion::new("a", t, Flavor::Lowering)]).unwrap();
        assert!((rwa_correlator(&sys, &rwa).unwrap() - expected).norm() < 1e-14);
        let wrong = CorrelatorSpec::new(vec![Insertion::new("a", 0.0, Flavor::Lowering), Insertion::new("a", t, Flavor::Raising)]).unwrap();
        assert_eq!(rwa_correlator(&sys, &wrong).unwrap(), ZERO);
    }

    fn brute_force(sys: &MatterSystem, ops: &[(&str, f64)]) -> C64 {
        // left-to-right product in the input basis
        let mut m = crate::linalg::identity(sys.dim());
        for (ch, t) in ops {
            let u = sys.eigen().propagator(*t);
            m = m * (u.adjoint() * sys.dipole(ch).unwrap() * u);
        }
        match sys.initial_state() {
            InitialState::Pure(psi) => psi.dotc(&(m * psi)),
            InitialState::Mixed(rho) => (m * rho).trace(),
        }
    }

    #[test]
    fn v_system_otoc_differs_from_toc() {
        let sys = superposition_v_system();
        let tau = 1.3;
        let otoc_ops = [("a", tau), ("b", 0.0), ("a", tau), ("b", 0.0)];
        let toc_ops = [("a", tau), ("b", 0.0), ("b", 0.0), ("a", tau)];
        let to_spec = |ops: &[(&str, f64)]| {
            CorrelatorSpec::from_left_to_right(ops.iter().map(|(c, t)| Insertion::full(c, *t)).collect()).unwrap()
        };
        let otoc = multipoint_correlator(&sys, &to_spec(&otoc_ops)).unwrap();
        let toc = multipoint_correlator(&sys, &to_spec(&toc_ops)).unwrap();
        assert!((otoc - brute_force(&sys, &otoc_ops)).norm() < 1e-13);
        assert!((toc - brute_force(&sys, &toc_ops)).norm() < 1e-13);
        assert!((otoc - toc).norm() > 1e-3);
        assert!(otoc.norm() > 1e-3);
        // without admixture the OTOC vanishes identically
        let plain = v_system(1.0, 1.7, 0.8, 0.6).unwrap().with_initial(sys.initial_state().clone()).unwrap();
        assert!(multipoint_correlator(&plain, &to_spec(&otoc_ops)).unwrap().norm() < 1e-15);
    }

    #[test]
    fn flavor_expansion_reproduces_full_correlator() {
        // V = mu + mu^dagger at every insertion: the 16 flavored correlators sum to the full one
        let sys = superposition_v_system();
        let ops = [("a", 0.9), ("b", 0.0), ("a", 0.9), ("b", 0.0)];
        let full = multipoint_correlator(
            &sys,
            &CorrelatorSpec::from_left_to_right(ops.iter().map(|(ch, t)| Insertion::full(ch, *t)).collect()).unwrap(),
        )
        .unwrap();
        let mut total = ZERO;
        for mask in 0..16u32 {
            let ins = ops
                .iter()
                .enumerate()
                .map(|(k, (ch, t))| {
                    let flavor = if mask >> k & 1 == 1 { Flavor::Raising } else { Flavor::Lowering };
                    Insertion::new(ch, *t, flavor)
                })
                .collect();
            total += rwa_correlator(&sys, &CorrelatorSpec::from_left_to_right(ins).unwrap()).unwrap();
        }
        assert!((total - full).norm() < 1e-13);
        assert!(full.norm() > 1e-3);
    }

    #[test]
    fn rwa_otoc_vanishes_from_ground_of_v_system() {
        // mu_a^dagger cannot act after mu_b^dagger has left the ground state
        let sys = v_system(1.0, 1.7, 0.8, 0.6).unwrap();
        let spec = CorrelatorSpec::from_left_to_right(vec![
            Insertion::new("a", 0.9, Flavor::Lowering),
            Insertion::new("b", 0.0, Flavor::Lowering),
            Insertion::new("a", 0.9, Flavor::Raising),
            Insertion::new("b", 0.0, Flavor::Raising),
        ])
        .unwrap();
        assert_eq!(rwa_correlator(&sys, &spec).unwrap(), ZERO);
    }

    #[test]
    fn all_raising_from_top_level_vanishes() {
        let sys = v_system(1.0, 1.7, 0.8, 0.6)
            .unwrap()
            .with_initial(InitialState::Pure(CVector::from_vec(vec![ZERO, ZERO, ONE])))
            .unwrap();
        let spec = CorrelatorSpec::new(vec![Insertion::new("b", 0.3, Flavor::Raising), Insertion::new("a", 0.1, Flavor::Raising)]).unwrap();
        assert_eq!(rwa_correlator(&sys, &spec).unwrap(), ZERO);
    }

    #[test]
    fn flavor_without_split_is_a_configuration_error() {
        let sys = MatterSystem::from_energies(&[0.0, 1.0], InitialState::Pure(CVector::from_vec(vec![ONE, ZERO])))
            .unwrap()
            .with_channel("a", DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]), false)
            .unwrap();
        let spec = CorrelatorSpec::new(vec![Insertion::new("a", 0.0, Flavor::Lowering)]).unwrap();
        assert!(matches!(rwa_correlator(&sys, &spec), Err(Error::Configuration(_))));
    }

    #[test]
    fn split_reconstructs_the_dipole() {
        let sys = superposition_v_system();
        for ch in ["a", "b"] {
            let sum = sys.operator(ch, Flavor::Lowering).unwrap() + sys.operator(ch, Flavor::Raising).unwrap();
            assert!(frobenius(&(sum - sys.dipole(ch).unwrap())) < 1e-14);
        }
    }

    #[test]
    fn density_matrix_path_matches_pure_path() {
        let sys = superposition_v_system();
        let InitialState::Pure(psi) = sys.initial_state().clone() else { unreachable!() };
        let mixed = sys.clone().with_initial(InitialState::Mixed(&psi * psi.adjoint())).unwrap();
        let spec = CorrelatorSpec::new(vec![
            Insertion::full("b", 0.0),
            Insertion::full("a", 0.6),
            Insertion::full("b", -0.4),
        ])
        .unwrap();
        let a = multipoint_correlator(&sys, &spec).unwrap();
        let b = multipoint_correlator(&mixed, &spec).unwrap();
        assert!((a - b).norm() < 1e-14);
    }

    #[test]
    fn liouville_green_properties() {
        let sys = superposition_v_system();
        let n = sys.dim();
        assert!(frobenius(&liouville_green(&sys, -0.1)) == 0.0);
        let g0 = liouville_green(&sys, 0.0);
        assert!(frobenius(&(g0 - crate::linalg::identity(n * n) * (-I))) < 1e-14);
        let (t1, t2) = (0.7, 1.9);
        let lhs = liouville_green(&sys, t1) * liouville_green(&sys, t2);
        let rhs = liouville_green(&sys, t1 + t2) * (-I);
        assert!(frobenius(&(lhs - rhs)) <= 1e-12);
        // acts as U X U^dagger on vectorized operators
        let x = sys.dipole("a").unwrap();
        let u = sys.eigen().propagator(t1);
        let direct = vectorize(&(&u * x * u.adjoint())) * (-I);
        assert!((liouville_green(&sys, t1) * vectorize(x) - direct).norm() < 1e-13);
        assert_eq!(unvectorize(&vectorize(x), n), *x);
    }
}
