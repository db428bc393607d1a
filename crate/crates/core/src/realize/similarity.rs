//! Unitary similarity of minimal passive systems with `C = SB*` and normal
//! main operators.

use crate::error::{Error, Result};
use crate::opcore::{identity, op_norm, polar_unitary, singular_values, zeros, ComplexMatrix, Tolerances};
use crate::sysmodel::PartitionedContraction;
use crate::transfer::{disk_grid, theta_eval};

#[derive(Debug, Clone, PartialEq)]
pub struct Similarity {
    /// `U : ℌ₁ → ℌ₂`.
    pub u: ComplexMatrix,
    /// `‖UA₁ − A₂U‖`.
    pub a_residual: f64,
    /// `‖UB₁ − B₂‖`.
    pub b_residual: f64,
    /// `‖C₁ − C₂U‖`.
    pub c_residual: f64,
    /// `‖D₁ − D₂‖`.
    pub d_residual: f64,
    /// `max(‖U*U − I‖, ‖UU* − I‖)`.
    pub unitarity: f64,
    /// Isometry defect of the Krylov map before projection to the unitaries.
    pub raw_isometry_defect: f64,
    pub moment_deviation: f64,
    pub transfer_deviation: f64,
}

impl Similarity {
    pub fn max_residual(&self) -> f64 {
        self.a_residual
            .max(self.b_residual)
            .max(self.c_residual)
            .max(self.d_residual)
            .max(self.unitarity)
    }
}

/// Orthonormalizes the Krylov vectors of `(a1, b1)` and applies the same
/// column operations to those of `(a2, b2)`, so that `Z q1_k = q2_k` for
/// the map `Z : Σ a1^j b1 u_j ↦ Σ a2^j b2 u_j`.
fn paired_krylov(
    a1: &ComplexMatrix,
    b1: &ComplexMatrix,
    a2: &ComplexMatrix,
    b2: &ComplexMatrix,
    tol: &Tolerances,
) -> (ComplexMatrix, ComplexMatrix) {
    let n1 = a1.nrows();
    let mut q1: Vec<ComplexMatrix> = Vec::new();
    let mut q2: Vec<ComplexMatrix> = Vec::new();
    let mut queue: std::collections::VecDeque<(ComplexMatrix, ComplexMatrix)> =
        (0..b1.ncols()).map(|j| (b1.columns(j, 1).into_owned(), b2.columns(j, 1).into_owned())).collect();
    let scale = b1.norm().max(tol.rank_tol);
    while let Some((mut w1, mut w2)) = queue.pop_front() {
        if q1.len() == n1 {
            break;
        }
        let before = w1.norm();
        for _ in 0..2 {
            for (v1, v2) in q1.iter().zip(&q2) {
                let h = (v1.adjoint() * &w1)[(0, 0)];
                w1 -= v1 * h;
                w2 -= v2 * h;
            }
        }
        let norm = w1.norm();
        if norm <= tol.rank_tol * before.max(scale) {
            continue;
        }
        let inv = crate::opcore::c(1.0 / norm, 0.0);
        let (v1, v2) = (w1 * inv, w2 * inv);
        queue.push_back((a1 * &v1, a2 * &v2));
        q1.push(v1);
        q2.push(v2);
    }
    let stack = |cols: &[ComplexMatrix], rows: usize| {
        if cols.is_empty() {
            zeros(rows, 0)
        } else {
            let refs: Vec<&ComplexMatrix> = cols.iter().collect();
            crate::opcore::hstack(&refs)
        }
    };
    (stack(&q1, n1), stack(&q2, a2.nrows()))
}

/// Constructs `U` with `UA₁U* = A₂`, `UB₁ = B₂`, `C₁U* = C₂` for minimal
/// passive systems whose transfer functions agree and whose output
/// operators are `C_k = SB_k*` (`S = I` when omitted).
pub fn unitary_similarity(
    s1: &PartitionedContraction,
    s2: &PartitionedContraction,
    s: Option<&ComplexMatrix>,
    tol: &Tolerances,
) -> Result<Similarity> {
    if s1.in_dim() != s2.in_dim() || s1.out_dim() != s2.out_dim() {
        return Err(Error::DimensionMismatch("the systems have different input or output spaces".into()));
    }
    for (k, sys) in [s1, s2].into_iter().enumerate() {
        let st = sys.structure(tol);
        if !st.minimal {
            return Err(Error::NotMinimal(format!(
                "system {}: controllable dim {} and observable dim {} of {}",
                k + 1,
                st.controllable_dim,
                st.observable_dim,
                sys.state_dim()
            )));
        }
    }
    let coupling = match s {
        Some(m) => m.clone(),
        None => identity(s1.out_dim()),
    };
    if coupling.shape() != (s1.out_dim(), s1.in_dim()) {
        return Err(Error::DimensionMismatch(format!(
            "S must be {}x{}",
            s1.out_dim(),
            s1.in_dim()
        )));
    }
    let sv = singular_values(&coupling);
    if sv.last().is_some_and(|&m| m <= tol.rank_tol) || coupling.ncols() > coupling.nrows() {
        return Err(Error::DimensionMismatch("S is not injective".into()));
    }
    for sys in [s1, s2] {
        let residual = op_norm(&(sys.c() - &coupling * sys.b().adjoint()));
        if residual > tol.eq_tol {
            return Err(Error::NotCoupled { residual });
        }
    }

    let count = 2 * (s1.state_dim() + s2.state_dim()) + 1;
    let mut transfer_deviation = 0.0f64;
    for lambda in disk_grid(count, 0.9) {
        let deviation = op_norm(&(theta_eval(s1, lambda, tol)? - theta_eval(s2, lambda, tol)?));
        transfer_deviation = transfer_deviation.max(deviation);
        if deviation > tol.eq_tol {
            return Err(Error::TransferMismatch { point: lambda, deviation });
        }
    }
    if s1.state_dim() != s2.state_dim() {
        return Err(Error::DimensionMismatch("minimal systems with equal transfer functions but different state dimensions".into()));
    }

    let (a1, b1, a2, b2) = (s1.a(), s1.b(), s2.a(), s2.b());
    let p = s1.state_dim();
    let powers = |a: &ComplexMatrix, b: &ComplexMatrix| {
        let mut out = vec![b.clone()];
        for m in 1..=p {
            let next = a * &out[m - 1];
            out.push(next);
        }
        out
    };
    let (v1, v2) = (powers(&a1, &b1), powers(&a2, &b2));
    let mut moment_deviation = 0.0f64;
    for n in 0..=p {
        for m in 0..=p {
            let deviation = op_norm(&(v1[n].adjoint() * &v1[m] - v2[n].adjoint() * &v2[m]));
            moment_deviation = moment_deviation.max(deviation);
            if deviation > tol.eq_tol {
                return Err(Error::MomentMismatch { n, m, deviation });
            }
        }
    }

    let (q1, q2) = paired_krylov(&a1, &b1, &a2, &b2, tol);
    if q1.ncols() < p {
        return Err(Error::NotMinimal(format!("Krylov space of dimension {} in a state space of dimension {p}", q1.ncols())));
    }
    let raw_isometry_defect = op_norm(&(q2.adjoint() * &q2 - identity(q2.ncols())));
    let u = polar_unitary(&(&q2 * q1.adjoint()))?;
    let unitarity = op_norm(&(u.adjoint() * &u - identity(p))).max(op_norm(&(&u * u.adjoint() - identity(p))));
    let out = Similarity {
        a_residual: op_norm(&(&u * &a1 - &a2 * &u)),
        b_residual: op_norm(&(&u * &b1 - &b2)),
        c_residual: op_norm(&(s1.c() - s2.c() * &u)),
        d_residual: op_norm(&(s1.d() - s2.d())),
        unitarity,
        raw_isometry_defect,
        moment_deviation,
        transfer_deviation,
        u,
    };
    let residual = out.max_residual();
    if residual > tol.eq_tol {
        return Err(Error::NotSimilar { residual });
    }
    Ok(out)
}
