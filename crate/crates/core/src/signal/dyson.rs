//! Complete fourth-order coincidence for matter coupled to two discrete modes.
//!
//! Perturbative states come from the exact block-bidiagonal exponential
//! `exp([[A, B, 0..], [0, A, B, ..], ...] t)` with `A = -i H0`, `B = -i H1`,
//! whose top-right blocks are the time-ordered Dyson integrals.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::interferometer::ModeTransform;
use crate::linalg::{expm, identity, kron, CMatrix, CVector, C64, I, ZERO};
use crate::oracle::JointModel;

pub const SIGNAL_ORDER: usize = 4;
pub const MAX_LIOUVILLE_STATES: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct FourthOrderResult {
    /// Order-`lambda^4` coincidence.
    pub total: C64,
    /// `lambda^4 <psi^(m)| P |psi^(n)>` for `m + n = 4`, labelled `psi<m>|P|psi<n>`.
    pub terms: Vec<(String, C64)>,
    /// Coincidence at orders `lambda^0 ..= lambda^4`; entry 0 is the noninteracting background.
    pub by_order: Vec<C64>,
}

impl FourthOrderResult {
    pub fn background(&self) -> f64 {
        self.by_order[0].re
    }
}

fn chain_generator(a: &CMatrix, b: &CMatrix, order: usize) -> CMatrix {
    let d = a.nrows();
    let mut m = CMatrix::zeros((order + 1) * d, (order + 1) * d);
    for k in 0..=order {
        m.view_mut((k * d, k * d), (d, d)).copy_from(a);
        if k < order {
            m.view_mut((k * d, (k + 1) * d), (d, d)).copy_from(b);
        }
    }
    m
}

/// Dyson terms `psi^(n)(t)`, `n = 0..=order`, of `exp(-i (H0 + lambda H1) t) psi0`
/// (coefficients of `lambda^n`).
pub fn dyson_terms(h0: &CMatrix, h1: &CMatrix, psi0: &CVector, t: f64, order: usize) -> Vec<CVector> {
    let d = h0.nrows();
    let m = chain_generator(&(h0 * (-I)), &(h1 * (-I)), order) * C64::new(t, 0.0);
    let mut seed = CVector::zeros((order + 1) * d);
    seed.rows_mut(order * d, d).copy_from(psi0);
    let out = expm(&m) * seed;
    (0..=order).map(|n| out.rows((order - n) * d, d).into_owned()).collect()
}

fn order_coefficients(terms: &[CVector], p: &CMatrix, lambda: f64) -> (Vec<C64>, Vec<(String, C64)>) {
    let pn: Vec<CVector> = terms.iter().map(|v| p * v).collect();
    let mut by_order = vec![ZERO; SIGNAL_ORDER + 1];
    let mut labelled = Vec::new();
    for m in 0..=SIGNAL_ORDER {
        for n in 0..=(SIGNAL_ORDER - m) {
            let value = terms[m].dotc(&pn[n]) * lambda.powi((m + n) as i32);
            by_order[m + n] += value;
            if m + n == SIGNAL_ORDER {
                labelled.push((format!("psi{m}|P|psi{n}"), value));
            }
        }
    }
    (by_order, labelled)
}

/// Order-`lambda^4` coincidence `sum_{m+n=4} <psi^(m)| P |psi^(n)>`, with `P` the
/// interferometer-rotated two-photon coincidence observable ("order of interaction").
pub fn all_fourth_order(model: &JointModel, psi0: &CVector, transform: &ModeTransform, t: f64) -> Result<FourthOrderResult> {
    let p = model.coincidence_observable(transform)?;
    let terms = dyson_terms(model.h0(), model.h1(), psi0, t, SIGNAL_ORDER);
    let (by_order, labelled) = order_coefficients(&terms, &p, model.lambda);
    Ok(FourthOrderResult { total: by_order[SIGNAL_ORDER], terms: labelled, by_order })
}

/// Same signal with state and interaction rotated into the detection basis
/// ("order of arrival"): `psi0 -> R psi0`, `H -> R H R^dagger`, measuring `n_a n_b`.
pub fn all_fourth_order_arrival(model: &JointModel, psi0: &CVector, transform: &ModeTransform, t: f64) -> Result<C64> {
    let r = model.interferometer_unitary(transform)?;
    let rd = r.adjoint();
    let h0 = &r * model.h0() * &rd;
    let h1 = &r * model.h1() * &rd;
    let p = &r * model.coincidence_observable(transform)? * &rd;
    let terms = dyson_terms(&h0, &h1, &(&r * psi0), t, SIGNAL_ORDER);
    Ok(order_coefficients(&terms, &p, model.lambda).0[SIGNAL_ORDER])
}

/// Basis states reachable from the support of `psi0` through nonzero matrix
/// elements of `H0 + H1`.
pub fn reachable_states(model: &JointModel, psi0: &CVector) -> Vec<usize> {
    let h = model.h0() + model.h1();
    let n = h.nrows();
    let mut seen = vec![false; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&k| psi0[k].norm() > 0.0).collect();
    for &k in &queue {
        seen[k] = true;
    }
    while let Some(k) = queue.pop_front() {
        for j in 0..n {
            if !seen[j] && h[(j, k)].norm() > 0.0 {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    (0..n).filter(|&k| seen[k]).collect()
}

fn restrict(m: &CMatrix, idx: &[usize]) -> CMatrix {
    CMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])])
}

/// Order-`lambda^4` coincidence from the unexpanded Liouville-space series
/// `rho^(4) = [exp(L t)]` with `L = -i[H0 + lambda H1, .]`, on the reachable subspace.
pub fn fourth_order_liouville(model: &JointModel, psi0: &CVector, transform: &ModeTransform, t: f64) -> Result<C64> {
    let idx = reachable_states(model, psi0);
    let s = idx.len();
    if s > MAX_LIOUVILLE_STATES {
        return Err(Error::Capability(format!(
            "Liouville cross-check needs at most {MAX_LIOUVILLE_STATES} reachable states, found {s}"
        )));
    }
    let h0 = restrict(model.h0(), &idx);
    let h1 = restrict(model.h1(), &idx);
    let p = restrict(&model.coincidence_observable(transform)?, &idx);
    let psi = CVector::from_fn(s, |k, _| psi0[idx[k]]);
    let id = identity(s);
    // row-major vec: vec(H X) = (H kron 1) vec X, vec(X H) = (1 kron H^T) vec X
    let liouvillian = |h: &CMatrix| (kron(h, &id) - kron(&id, &h.transpose())) * (-I);
    let m = chain_generator(&liouvillian(&h0), &liouvillian(&h1), SIGNAL_ORDER) * C64::new(t, 0.0);
    let rho0 = &psi * psi.adjoint();
    let dd = s * s;
    let mut seed = CVector::zeros((SIGNAL_ORDER + 1) * dd);
    for i in 0..s {
        for j in 0..s {
            seed[SIGNAL_ORDER * dd + i * s + j] = rho0[(i, j)];
        }
    }
    let out = expm(&m) * seed;
    let mut value = ZERO;
    for i in 0..s {
        for j in 0..s {
            value += p[(j, i)] * out[i * s + j];
        }
    }
    Ok(value * model.lambda.powi(SIGNAL_ORDER as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interferometer::delayed_balanced_bs;
    use crate::matter::v_system_with_admixture;
    use crate::oracle::CouplingForm;

    fn model(coupling: CouplingForm, lambda: f64) -> JointModel {
        let sys = v_system_with_admixture(1.0, 1.3, 0.9, 0.7, 0.3).unwrap();
        JointModel::new(sys, 1.1, 1.1, 2, lambda, coupling).unwrap()
    }

    #[test]
    fn dyson_terms_resum_to_the_exact_state() {
        let m = model(CouplingForm::Full, 0.05);
        let psi0 = m.fock_product_state(1, 1).unwrap();
        let t = 2.0;
        let terms = dyson_terms(m.h0(), m.h1(), &psi0, t, 14);
        let series: CVector = terms.iter().enumerate().map(|(n, v)| v * C64::new(0.05f64.powi(n as i32), 0.0)).sum();
        let exact = m.propagate(&psi0, t).unwrap();
        let err = (series - exact).norm();
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn hom_background_and_low_orders_vanish() {
        for coupling in [CouplingForm::Full, CouplingForm::Rwa] {
            let m = model(coupling, 0.01);
            let psi0 = m.fock_product_state(1, 1).unwrap();
            let res = all_fourth_order(&m, &psi0, &delayed_balanced_bs(0.0), 3.0).unwrap();
            for k in 0..4 {
                assert!(res.by_order[k].norm() < 1e-20, "order {k}: {}", res.by_order[k]);
            }
            assert!(res.total.re > 0.0);
            let sum: C64 = res.terms.iter().map(|(_, v)| v).sum();
            assert!((sum - res.total).norm() <= 1e-15 * res.total.norm());
        }
    }

    #[test]
    fn arrival_and_interaction_orders_agree() {
        for coupling in [CouplingForm::Full, CouplingForm::Rwa] {
            let m = model(coupling, 0.01);
            let psi0 = m.fock_product_state(1, 1).unwrap();
            let bs = delayed_balanced_bs(0.4);
            let a = all_fourth_order(&m, &psi0, &bs, 3.0).unwrap().total;
            let b = all_fourth_order_arrival(&m, &psi0, &bs, 3.0).unwrap();
            assert!((a - b).norm() <= 1e-10 * a.norm());
        }
    }

    #[test]
    fn liouville_route_matches_labelled_terms() {
        let bs = delayed_balanced_bs(0.2);
        for (coupling, states) in [(CouplingForm::Rwa, 7), (CouplingForm::Full, 13)] {
            let m = model(coupling, 0.01);
            let psi0 = m.fock_product_state(1, 1).unwrap();
            assert_eq!(reachable_states(&m, &psi0).len(), states);
            let a = all_fourth_order(&m, &psi0, &bs, 2.5).unwrap().total;
            let b = fourth_order_liouville(&m, &psi0, &bs, 2.5).unwrap();
            assert!((a - b).norm() <= 1e-8 * a.norm(), "{a} vs {b}");
        }
        let sys = v_system_with_admixture(1.0, 1.3, 0.9, 0.7, 0.3).unwrap();
        let big = JointModel::new(sys, 1.1, 1.1, 4, 0.01, CouplingForm::Full).unwrap();
        let psi0 = big.fock_product_state(1, 1).unwrap();
        assert!(matches!(fourth_order_liouville(&big, &psi0, &bs, 2.5), Err(Error::Capability(_))));
    }
}
