//! Blaschke-diagonal form of bi-inner pqs transfer functions.

use crate::error::{Error, Result};
use crate::opcore::{block_diag, c, hermitian_eigen, hstack, identity, op_norm, ComplexMatrix, Tolerances, C64};
use crate::param::PqsParams;
use crate::sysmodel::PartitionedContraction;
use crate::transfer::{disk_grid, inner_test_system, theta_eval};

/// `Θ(λ) = U (diag(b_{a_1}(λ), …, b_{a_m}(λ)) ⊕ X) U*` with
/// `b_a(λ) = (λ − a)/(1 − λa)`.
#[derive(Debug, Clone)]
pub struct InnerCanonicalForm {
    /// Eigenvalues of `A`, ascending.
    pub points: Vec<f64>,
    /// The constant unitary part on `ker K*`.
    pub x_unitary: ComplexMatrix,
    /// Columns: `K̃ v_k` for the eigenvectors `v_k` of `A`, then a basis of `ker K*`.
    pub basis: ComplexMatrix,
    /// `max ‖Θ(λ) − form(λ)‖` over a disk grid.
    pub reconstruction_residual: f64,
}

impl InnerCanonicalForm {
    pub fn eval(&self, lambda: C64) -> ComplexMatrix {
        let m = self.points.len();
        let mut diag = ComplexMatrix::zeros(m, m);
        for (k, &a) in self.points.iter().enumerate() {
            diag[(k, k)] = (lambda - a) / (c(1.0, 0.0) - lambda * a);
        }
        let middle = block_diag(&[&diag, &self.x_unitary]);
        &self.basis * middle * self.basis.adjoint()
    }
}

pub fn inner_canonical_form(sys: &PartitionedContraction, tol: &Tolerances) -> Result<InnerCanonicalForm> {
    let p = PqsParams::from_system(sys, tol)?;
    if !sys.is_minimal(tol) {
        return Err(Error::NotMinimal("the pqs system has a nontrivial unreachable part".into()));
    }
    let report = inner_test_system(sys, 32, tol);
    if !(report.inner && report.coinner) {
        return Err(Error::NotInner(format!(
            "boundary defects {:.3e} / {:.3e} on the circle",
            report.max_defect, report.max_codefect
        )));
    }
    let n = sys.state_dim();
    if p.basis_da.ncols() != n {
        return Err(Error::NotInner("A has eigenvalues of modulus one".into()));
    }
    let k_res = p.k_isometry_residual();
    if k_res > tol.eq_tol {
        return Err(Error::NotInner(format!("K is not isometric: residual {k_res:.3e}")));
    }
    let x_res = op_norm(&(p.x.adjoint() * &p.x - identity(p.x.ncols())));
    if x_res > tol.eq_tol {
        return Err(Error::NotInner(format!("X is not unitary: residual {x_res:.3e}")));
    }
    let (points, vectors) = hermitian_eigen(&p.a);
    let head = p.k_state() * vectors;
    let basis = hstack(&[&head, &p.basis_dk_adj]);
    let mut form = InnerCanonicalForm {
        points,
        x_unitary: p.x.clone(),
        basis,
        reconstruction_residual: 0.0,
    };
    let mut worst = op_norm(&(form.basis.adjoint() * &form.basis - identity(sys.in_dim())));
    for lambda in disk_grid(12, 0.9) {
        worst = worst.max(op_norm(&(theta_eval(sys, lambda, tol)? - form.eval(lambda))));
    }
    form.reconstruction_residual = worst;
    Ok(form)
}
