use crate::error::{Error, Result};
use crate::opcore::{c, diag_real, hermitian_eigen, op_norm, zeros, ComplexMatrix, Tolerances, C64};
use crate::param::PqsParams;
use crate::sysmodel::PartitionedContraction;
use crate::transfer::{disk_grid, sqs_membership, theta_eval, SqsFunctionData};

/// Builds a minimal pqs system whose transfer function is `f`.
///
/// Each atom `(t, Σ)` contributes a block `t·I` of size `rank Σ` to `A`
/// and the factor `L` of `Σ = LL*` to `K`; `X` comes from the operator
/// ball. The assembled system is then reduced to its controllable part.
pub fn realize_from_data(f: &SqsFunctionData, tol: &Tolerances) -> Result<PartitionedContraction> {
    let membership = sqs_membership(f, tol)?;
    if !membership.member {
        return Err(Error::NotInSqs(membership.reason.unwrap_or_default()));
    }
    let n = f.dim();
    let mut points = Vec::new();
    let mut factors = Vec::new();
    for atom in &f.atoms {
        if atom.t.abs() >= 1.0 {
            return Err(Error::InvalidMeasure(format!("atom at t = {} lies on the circle", atom.t)));
        }
        let (values, vectors) = hermitian_eigen(&atom.sigma);
        let cutoff = tol.rank_tol * op_norm(&atom.sigma).max(1.0);
        for (j, &mu) in values.iter().enumerate() {
            if mu > cutoff {
                points.push(atom.t);
                factors.push(vectors.column(j) * c(mu.sqrt(), 0.0));
            }
        }
    }
    let a = diag_real(&points);
    let k_state = if factors.is_empty() {
        zeros(n, 0)
    } else {
        ComplexMatrix::from_columns(&factors)
    };
    let x = membership.x.unwrap_or_else(|| zeros(n, n));
    let p = PqsParams::from_ambient(a, &k_state, &x, tol)?;
    p.assemble()?.minimal_pqs_reduction(tol)
}

/// `max ‖Θ_sys(λ) − Θ_f(λ)‖` over an `n`-point grid of the disk of radius 0.9.
pub fn data_agreement(sys: &PartitionedContraction, f: &SqsFunctionData, n: usize, tol: &Tolerances) -> Result<f64> {
    let mut worst = 0.0f64;
    for lambda in disk_grid(n, 0.9) {
        worst = worst.max(deviation(sys, f, lambda, tol)?);
    }
    Ok(worst)
}

fn deviation(sys: &PartitionedContraction, f: &SqsFunctionData, lambda: C64, tol: &Tolerances) -> Result<f64> {
    Ok(op_norm(&(theta_eval(sys, lambda, tol)? - f.theta(lambda)?)))
}
