//! Passive (SU(2)) and active (SU(1,1)) two-mode elements, the truncated
//! two-mode Fock space they act on, and Casimir diagnostics.

use nalgebra::Matrix2;

use crate::error::{Error, Result};
use crate::linalg::{c, expm, frobenius, CMatrix, CVector, C64, I, ONE, ZERO};

/// Tolerance on unitarity / Bogoliubov constraints of a [`ModeTransform`].
pub const TRANSFORM_TOL: f64 = 1e-12;
/// Tolerance on `|T^2 + R^2 - 1|` accepted by [`beam_splitter`].
pub const NORMALIZATION_TOL: f64 = 1e-9;
/// Largest population an induced active map may push onto the cutoff edge.
pub const EDGE_LEAKAGE_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformKind {
    /// Unitary mixing of `(a1, a2)`.
    Passive,
    /// Bogoliubov mixing of `(a1, a2^dagger)`.
    Active,
}

/// A two-mode interferometric element.
///
/// For passive elements the matrix maps input annihilation operators to output
/// ones, `a_out = M a_in`. A nonzero `delay` adds the frequency dependent phase
/// of a displaced beam splitter: the off-diagonal entries become
/// `M12 e^{-i w T}` and `M21 e^{+i w T}` at frequency `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeTransform {
    matrix: Matrix2<C64>,
    kind: TransformKind,
    delay: f64,
}

impl ModeTransform {
    pub fn new(matrix: Matrix2<C64>, kind: TransformKind, delay: f64) -> Result<Self> {
        let t = ModeTransform { matrix, kind, delay };
        let residual = t.constraint_residual();
        if residual > TRANSFORM_TOL {
            return Err(Error::Validation(format!(
                "{:?} transform violates its group constraint by {residual:.3e}",
                kind
            )));
        }
        Ok(t)
    }

    pub fn identity() -> Self {
        ModeTransform {
            matrix: Matrix2::identity(),
            kind: TransformKind::Passive,
            delay: 0.0,
        }
    }

    pub fn matrix(&self) -> &Matrix2<C64> {
        &self.matrix
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    pub fn delay(&self) -> f64 {
        self.delay
    }

    /// The matrix including the delay phase at angular frequency `omega`.
    pub fn matrix_at(&self, omega: f64) -> Matrix2<C64> {
        let mut m = self.matrix;
        if self.delay != 0.0 {
            let ph = (-I * omega * self.delay).exp();
            m[(0, 1)] *= ph;
            m[(1, 0)] *= ph.conj();
        }
        m
    }

    /// Unitarity residual for passive, Bogoliubov residual for active.
    pub fn constraint_residual(&self) -> f64 {
        let m = &self.matrix;
        match self.kind {
            TransformKind::Passive => {
                let prod = m.adjoint() * m - Matrix2::identity();
                let unitary = prod.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                unitary.max((m.determinant().norm() - 1.0).abs())
            }
            TransformKind::Active => {
                let row = (m[(0, 0)].norm_sqr() - m[(0, 1)].norm_sqr() - 1.0).abs();
                // the second row of a Bogoliubov map is fixed by the first
                let col = (m[(1, 1)].norm_sqr() - m[(1, 0)].norm_sqr() - 1.0).abs();
                row.max(col)
            }
        }
    }

    /// Matrix product `self * other` (apply `other` first).
    pub fn compose(&self, other: &ModeTransform) -> Result<ModeTransform> {
        if self.kind != other.kind {
            return Err(Error::Validation(
                "cannot compose passive and active elements".into(),
            ));
        }
        if self.delay != 0.0 || other.delay != 0.0 {
            return Err(Error::Capability(
                "composition of delayed elements is frequency dependent; use matrix_at".into(),
            ));
        }
        ModeTransform::new(self.matrix * other.matrix, self.kind, 0.0)
    }

    /// The inverse element. For passive transforms this is the adjoint and
    /// keeps the same delay.
    pub fn inverse(&self) -> ModeTransform {
        let matrix = match self.kind {
            TransformKind::Passive => self.matrix.adjoint(),
            TransformKind::Active => {
                let m = &self.matrix;
                // inverse of [[u, v], [v*, u*]] with |u|^2 - |v|^2 = 1
                Matrix2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)])
            }
        };
        ModeTransform {
            matrix,
            kind: self.kind,
            delay: self.delay,
        }
    }

    /// Coefficients `C` of the creation-operator map at frequency `omega`:
    /// `c_in_j^dagger = sum_i C[(i, j)] c_out_i^dagger`. For unitary `M`
    /// this is `M^T` evaluated with the delay phase.
    pub fn creation_map_at(&self, omega: f64) -> Result<Matrix2<C64>> {
        if self.kind != TransformKind::Passive {
            return Err(Error::Capability(
                "active elements do not preserve photon number; amplitude grids need passive elements".into(),
            ));
        }
        Ok(self.matrix_at(omega))
    }
}

/// Beam splitter `((T, iR e^{i phi}), (iR e^{-i phi}, T))`.
pub fn beam_splitter(t: f64, r: f64, phi: f64) -> Result<ModeTransform> {
    if !(0.0..=1.0).contains(&t) || !(0.0..=1.0).contains(&r) {
        return Err(Error::Validation(format!(
            "transmission {t} and reflection {r} must lie in [0, 1]"
        )));
    }
    let residual = t * t + r * r - 1.0;
    if residual.abs() > NORMALIZATION_TOL {
        return Err(Error::Validation(format!(
            "T^2 + R^2 - 1 = {residual:.3e} exceeds {NORMALIZATION_TOL:e}"
        )));
    }
    // renormalize inside the tolerance so the unitarity invariant holds to 1e-12
    let norm = (t * t + r * r).sqrt();
    let (t, r) = (t / norm, r / norm);
    let m = Matrix2::new(
        c(t, 0.0),
        I * r * (I * phi).exp(),
        I * r * (-I * phi).exp(),
        c(t, 0.0),
    );
    ModeTransform::new(m, TransformKind::Passive, 0.0)
}

/// Balanced beam splitter displaced by a delay, `R_T = (1/sqrt 2)((1, i e^{-i w T}), (i e^{i w T}, 1))`.
pub fn delayed_balanced_bs(delay: f64) -> ModeTransform {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    ModeTransform {
        matrix: Matrix2::new(c(h, 0.0), c(0.0, h), c(0.0, h), c(h, 0.0)),
        kind: TransformKind::Passive,
        delay,
    }
}

/// Two-mode squeezer acting on `(a1, a2^dagger)`.
pub fn squeezer(beta: f64, delta: f64) -> Result<ModeTransform> {
    if !(beta >= 0.0) {
        return Err(Error::Validation(format!("squeezing beta = {beta} must be >= 0")));
    }
    let ch = c(beta.cosh(), 0.0);
    let sh = beta.sinh();
    let m = Matrix2::new(ch, (-I * delta).exp() * sh, (I * delta).exp() * sh, ch);
    ModeTransform::new(m, TransformKind::Active, 0.0)
}

/// Mode operators and group generators on the truncated two-mode Fock space
/// spanned by `|n1, n2>`, `0 <= n1, n2 <= n_max`.
///
/// Linear operators are the exact box restrictions. Quadratic Casimirs `J^2`
/// and `K^2` are evaluated on a padded space before restriction, so they are
/// exact on every state of the box.
#[derive(Debug, Clone)]
pub struct TwoModeFockOperators {
    pub n_max: usize,
    pub a1: CMatrix,
    pub a2: CMatrix,
    pub a1_dag: CMatrix,
    pub a2_dag: CMatrix,
    pub jx: CMatrix,
    pub jy: CMatrix,
    pub jz: CMatrix,
    pub kx: CMatrix,
    pub ky: CMatrix,
    pub kz: CMatrix,
    pub number: CMatrix,
    pub j2: CMatrix,
    pub k2: CMatrix,
}

struct RawOps {
    a1: CMatrix,
    a2: CMatrix,
    jx: CMatrix,
    jy: CMatrix,
    jz: CMatrix,
    kx: CMatrix,
    ky: CMatrix,
    kz: CMatrix,
}

fn raw_ops(n_max: usize) -> RawOps {
    let d = n_max + 1;
    let dim = d * d;
    let mut a1 = CMatrix::zeros(dim, dim);
    let mut a2 = CMatrix::zeros(dim, dim);
    for n1 in 0..d {
        for n2 in 0..d {
            let col = n1 * d + n2;
            if n1 > 0 {
                a1[((n1 - 1) * d + n2, col)] = c((n1 as f64).sqrt(), 0.0);
            }
            if n2 > 0 {
                a2[(n1 * d + n2 - 1, col)] = c((n2 as f64).sqrt(), 0.0);
            }
        }
    }
    let a1d = a1.adjoint();
    let a2d = a2.adjoint();
    let half = c(0.5, 0.0);
    let jx = (&a1d * &a2 + &a2d * &a1) * half;
    let jy = (&a1d * &a2 - &a2d * &a1) * (-I * 0.5);
    let jz = (&a1d * &a1 - &a2d * &a2) * half;
    let kx = (&a1d * &a2d + &a1 * &a2) * half;
    let ky = (&a1d * &a2d - &a1 * &a2) * (-I * 0.5);
    // a2 a2^dagger = n2 + 1 exactly, written that way to avoid the box edge
    let kz = (&a1d * &a1 + &a2d * &a2 + CMatrix::identity(dim, dim)) * half;
    RawOps { a1, a2, jx, jy, jz, kx, ky, kz }
}

/// Restriction of an operator on the `n_big` box to the `n_small` box.
fn restrict(m: &CMatrix, n_big: usize, n_small: usize) -> CMatrix {
    let (db, ds) = (n_big + 1, n_small + 1);
    let mut out = CMatrix::zeros(ds * ds, ds * ds);
    for r1 in 0..ds {
        for r2 in 0..ds {
            for c1 in 0..ds {
                for c2 in 0..ds {
                    out[(r1 * ds + r2, c1 * ds + c2)] = m[(r1 * db + r2, c1 * db + c2)];
                }
            }
        }
    }
    out
}

impl TwoModeFockOperators {
    pub fn dim(&self) -> usize {
        (self.n_max + 1) * (self.n_max + 1)
    }

    pub fn index(&self, n1: usize, n2: usize) -> usize {
        n1 * (self.n_max + 1) + n2
    }

    pub fn occupation(&self, index: usize) -> (usize, usize) {
        (index / (self.n_max + 1), index % (self.n_max + 1))
    }

    pub fn basis(&self, n1: usize, n2: usize) -> CVector {
        let mut v = CVector::zeros(self.dim());
        v[self.index(n1, n2)] = ONE;
        v
    }

    /// Indices of all states with total photon number `<= max_total`.
    pub fn sector_indices(&self, max_total: usize) -> Vec<usize> {
        (0..self.dim())
            .filter(|&i| {
                let (a, b) = self.occupation(i);
                a + b <= max_total
            })
            .collect()
    }

    /// Indices of states with total photon number exactly `total`.
    pub fn shell_indices(&self, total: usize) -> Vec<usize> {
        (0..self.dim())
            .filter(|&i| {
                let (a, b) = self.occupation(i);
                a + b == total
            })
            .collect()
    }
}

/// Build the operator set on the `(n_max + 1)^2` dimensional truncated space.
pub fn build_fock_operators(n_max: usize) -> Result<TwoModeFockOperators> {
    if n_max < 2 {
        return Err(Error::Validation(format!("n_max = {n_max} must be >= 2")));
    }
    let box_ops = raw_ops(n_max);
    let pad = n_max + 2;
    let big = raw_ops(pad);
    let j2_big = &big.jx * &big.jx + &big.jy * &big.jy + &big.jz * &big.jz;
    let k2_big = &big.kz * &big.kz - &big.kx * &big.kx - &big.ky * &big.ky;
    let a1_dag = box_ops.a1.adjoint();
    let a2_dag = box_ops.a2.adjoint();
    let number = &a1_dag * &box_ops.a1 + &a2_dag * &box_ops.a2;
    Ok(TwoModeFockOperators {
        n_max,
        j2: restrict(&j2_big, pad, n_max),
        k2: restrict(&k2_big, pad, n_max),
        a1: box_ops.a1,
        a2: box_ops.a2,
        a1_dag,
        a2_dag,
        jx: box_ops.jx,
        jy: box_ops.jy,
        jz: box_ops.jz,
        kx: box_ops.kx,
        ky: box_ops.ky,
        kz: box_ops.kz,
        number,
    })
}

/// Residuals of the su(2) and su(1,1) commutation relations on the states with
/// total photon number `<= sector_max` of the `n_max` box.
///
/// Products are formed on a padded space, so the residual measures the algebra
/// itself rather than the box edge.
#[derive(Debug, Clone, Copy)]
pub struct AlgebraResiduals {
    pub su2: f64,
    pub su11: f64,
    pub ladder: f64,
}

pub fn algebra_residuals(n_max: usize, sector_max: usize) -> Result<AlgebraResiduals> {
    let ops = build_fock_operators(n_max)?;
    let pad = n_max + 3;
    let big = raw_ops(pad);
    let keep = ops.sector_indices(sector_max);
    let project = |m: &CMatrix| -> f64 {
        let r = restrict(m, pad, n_max);
        let mut s = 0.0;
        for &i in &(0..r.nrows()).collect::<Vec<_>>() {
            for &j in &keep {
                s += r[(i, j)].norm_sqr();
            }
        }
        s.sqrt()
    };
    let comm = |a: &CMatrix, b: &CMatrix| a * b - b * a;
    let su2 = [
        project(&(comm(&big.jx, &big.jy) - &big.jz * I)),
        project(&(comm(&big.jy, &big.jz) - &big.jx * I)),
        project(&(comm(&big.jz, &big.jx) - &big.jy * I)),
    ];
    let su11 = [
        project(&(comm(&big.kx, &big.ky) + &big.kz * I)),
        project(&(comm(&big.ky, &big.kz) - &big.kx * I)),
        project(&(comm(&big.kz, &big.kx) - &big.ky * I)),
    ];
    let dim = big.a1.nrows();
    let id = CMatrix::identity(dim, dim);
    let ladder = [
        project(&(comm(&big.a1, &big.a1.adjoint()) - &id)),
        project(&(comm(&big.a2, &big.a2.adjoint()) - &id)),
        project(&comm(&big.a1, &big.a2.adjoint())),
        project(&comm(&big.a1, &big.a2)),
    ];
    let max = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max);
    Ok(AlgebraResiduals {
        su2: max(&su2),
        su11: max(&su11),
        ladder: max(&ladder),
    })
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Fock-space map induced by a static 2x2 mode matrix on creation operators:
/// `a1_in^dagger -> C00 a1^dagger + C10 a2^dagger`,
/// `a2_in^dagger -> C01 a1^dagger + C11 a2^dagger`.
///
/// Columns of states with total number above `n_max` are left zero; the map
/// is exact and unitary on the sectors `N <= n_max`.
pub fn induced_creation_map(cmap: &Matrix2<C64>, n_max: usize) -> CMatrix {
    let d = n_max + 1;
    let mut u = CMatrix::zeros(d * d, d * d);
    for n1 in 0..d {
        for n2 in 0..d {
            let total = n1 + n2;
            if total > n_max {
                continue;
            }
            // (x)^n1 (y)^n2 with x = C00 A + C10 B, y = C01 A + C11 B
            let mut poly = vec![ZERO; total + 1]; // coefficient of A^p B^(total-p)
            for i in 0..=n1 {
                let xi = c(binomial(n1, i), 0.0)
                    * cmap[(0, 0)].powu(i as u32)
                    * cmap[(1, 0)].powu((n1 - i) as u32);
                for j in 0..=n2 {
                    let yj = c(binomial(n2, j), 0.0)
                        * cmap[(0, 1)].powu(j as u32)
                        * cmap[(1, 1)].powu((n2 - j) as u32);
                    poly[i + j] += xi * yj;
                }
            }
            let norm_in = (factorial(n1) * factorial(n2)).sqrt();
            for (p, coeff) in poly.into_iter().enumerate() {
                let q = total - p;
                let amp = coeff * ((factorial(p) * factorial(q)).sqrt() / norm_in);
                u[(p * d + q, n1 * d + n2)] = amp;
            }
        }
    }
    u
}

/// Fock-space unitary induced by a passive transform on input states: input
/// state coordinates to output (detection) coordinates. Delays are evaluated
/// at `omega`.
pub fn induced_passive_map(transform: &ModeTransform, omega: f64, n_max: usize) -> Result<CMatrix> {
    let cmap = transform.creation_map_at(omega)?;
    // a_in^dagger_j = sum_i M_ij a_out^dagger_i for unitary M (a_out = M a_in)
    Ok(induced_creation_map(&cmap, n_max))
}

/// Unitary `S` on the truncated box realizing an active transform,
/// `S^dagger a1 S = M00 a1 + M01 a2^dagger`.
pub fn induced_active_unitary(transform: &ModeTransform, ops: &TwoModeFockOperators) -> Result<CMatrix> {
    if transform.kind() != TransformKind::Active {
        return Err(Error::Validation("expected an active transform".into()));
    }
    let m = transform.matrix();
    let beta = m[(0, 0)].re.acosh();
    let sh = beta.sinh();
    // M01 = e^{-i delta} sinh beta
    let phase = if sh > 0.0 { m[(0, 1)] / sh } else { ONE };
    let gen = (&ops.a1_dag * &ops.a2_dag * phase - &ops.a1 * &ops.a2 * phase.conj()) * c(beta, 0.0);
    Ok(expm(&gen))
}

/// Frobenius change of the invariant (`J^2` for passive, `K^2` for active)
/// under conjugation by the induced Fock-space map, restricted to states with
/// total photon number `<= sector_max`.
pub fn casimir_residual(
    transform: &ModeTransform,
    ops: &TwoModeFockOperators,
    sector_max: usize,
) -> Result<f64> {
    if sector_max > ops.n_max {
        return Err(Error::Validation(format!(
            "sector {sector_max} exceeds cutoff {}",
            ops.n_max
        )));
    }
    let keep = ops.sector_indices(sector_max);
    let (u, invariant) = match transform.kind() {
        TransformKind::Passive => (induced_passive_map(transform, 0.0, ops.n_max)?, &ops.j2),
        TransformKind::Active => {
            let s = induced_active_unitary(transform, ops)?;
            let edge: Vec<usize> = (0..ops.dim())
                .filter(|&i| {
                    let (a, b) = ops.occupation(i);
                    a == ops.n_max || b == ops.n_max
                })
                .collect();
            for &k in &keep {
                let col = s.column(k);
                let leak: f64 = edge.iter().map(|&i| col[i].norm_sqr()).sum();
                if leak > EDGE_LEAKAGE_TOL {
                    let (a, b) = ops.occupation(k);
                    return Err(Error::TruncationOverflow(format!(
                        "state |{a},{b}> leaks {leak:.3e} onto the n_max = {} edge; raise n_max",
                        ops.n_max
                    )));
                }
            }
            (s, &ops.k2)
        }
    };
    let conj = u.adjoint() * invariant * &u;
    let mut s = 0.0;
    for &i in &keep {
        for &j in &keep {
            s += (conj[(i, j)] - invariant[(i, j)]).norm_sqr();
        }
    }
    Ok(s.sqrt())
}

/// Casimir check in the `N <= 2` sector.
pub fn casimir_check(transform: &ModeTransform, ops: &TwoModeFockOperators) -> Result<f64> {
    casimir_residual(transform, ops, 2)
}

/// Frobenius distance of `m` from unitarity.
pub fn unitarity_residual(m: &CMatrix) -> f64 {
    let n = m.nrows();
    frobenius(&(m.adjoint() * m - CMatrix::identity(n, n)))
}
