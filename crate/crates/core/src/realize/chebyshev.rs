//! The scalar function `Θ(λ) = d + (1 − √(1 − λ²))/(2λ)` and its
//! discretization by Gauss–Chebyshev quadrature.
//!
//! The measure is `dΣ = dt / (2π√(1 − t²))` on `(−1, 1)`, and `n` nodes
//! `t_j = cos((2j − 1)π/(2n))` with equal weights `1/(2n)` integrate
//! `(1 − t²)/(1 − tλ)` with geometric accuracy for `|λ| < 1` and exactly at
//! `λ = ±1`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::opcore::{c, diag_real, ComplexMatrix, C64};
use crate::sysmodel::{pqs_from_blocks, PartitionedContraction};
use crate::transfer::{Atom, SqsFunctionData};

/// `W(λ) = (1 − √(1 − λ²))/(2λ)`, written without the cancellation at 0.
pub fn chebyshev_w(lambda: C64) -> C64 {
    lambda / (2.0 * (c(1.0, 0.0) + (c(1.0, 0.0) - lambda * lambda).sqrt()))
}

pub fn chebyshev_theta(d: C64, lambda: C64) -> C64 {
    d + chebyshev_w(lambda)
}

/// `√(z² − 1) − z` with the branch cut on `[−1, 1]`; equals `−2W(1/z)`.
pub fn chebyshev_q_identity(z: C64) -> C64 {
    (z - 1.0).sqrt() * (z + 1.0).sqrt() - z
}

fn nodes(n: usize) -> Vec<f64> {
    (1..=n).map(|j| ((2 * j - 1) as f64 * PI / (2 * n) as f64).cos()).collect()
}

fn check(d: C64, n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidMeasure("the quadrature needs at least two nodes".into()));
    }
    if d.norm() > 0.5 {
        return Err(Error::InvalidD { abs: d.norm() });
    }
    Ok(())
}

/// Atomic data of the `n`-node discretization. No constraint on `d` is
/// imposed here, so data outside the class can be produced on purpose.
pub fn chebyshev_data(d: C64, n: usize) -> SqsFunctionData {
    let w = 1.0 / (2 * n) as f64;
    SqsFunctionData {
        theta0: ComplexMatrix::from_element(1, 1, d),
        atoms: nodes(n)
            .into_iter()
            .map(|t| Atom { t, sigma: ComplexMatrix::from_element(1, 1, c(w, 0.0)) })
            .collect(),
    }
}

/// The pqs system `A = diag(t_j)`, `B_j = √(1 − t_j²)/√(2n)`, `D = d`.
pub fn chebyshev_system(d: C64, n: usize) -> Result<PartitionedContraction> {
    let t = nodes(n);
    let scale = (2 * n) as f64;
    let b = ComplexMatrix::from_fn(n, 1, |j, _| c((1.0 - t[j] * t[j]).max(0.0).sqrt() / scale.sqrt(), 0.0));
    pqs_from_blocks(&diag_real(&t), &b, &ComplexMatrix::from_element(1, 1, d))
}

/// Data and system for `|d| ≤ 1/2`, the exact membership range.
pub fn chebyshev_example(d: C64, n: usize) -> Result<(SqsFunctionData, PartitionedContraction)> {
    check(d, n)?;
    Ok((chebyshev_data(d, n), chebyshev_system(d, n)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::Tolerances;
    use crate::transfer::{sqs_membership, theta_eval, w_from_data};

    #[test]
    fn closed_form_values() {
        assert!((chebyshev_w(c(0.6, 0.0)) - c(1.0 / 6.0, 0.0)).norm() < 1e-15);
        assert!((chebyshev_w(c(1.0, 0.0)) - c(0.5, 0.0)).norm() < 1e-15);
        let q = chebyshev_q_identity(c(2.0, 0.0));
        assert!((q - c(3f64.sqrt() - 2.0, 0.0)).norm() < 1e-15);
        let z = c(0.7, 1.9);
        assert!((chebyshev_q_identity(z) + 2.0 * chebyshev_w(1.0 / z)).norm() < 1e-13);
    }

    #[test]
    fn quadrature_matches_closed_form() {
        let f = chebyshev_data(c(0.0, 0.0), 200);
        for lambda in [c(0.0, 0.3), c(0.6, 0.0), c(-0.4, 0.5), c(1.0, 0.0)] {
            let w = w_from_data(&f, lambda).unwrap()[(0, 0)];
            assert!((w - chebyshev_w(lambda)).norm() < 1e-12, "{lambda}");
        }
    }

    #[test]
    fn system_matches_data() {
        let tol = Tolerances::default();
        let (f, sys) = chebyshev_example(c(0.2, 0.0), 40).unwrap();
        assert!(sys.is_pqs(&tol));
        let lambda = c(0.3, -0.4);
        let a = theta_eval(&sys, lambda, &tol).unwrap()[(0, 0)];
        let b = f.theta(lambda).unwrap()[(0, 0)];
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn membership_is_the_half_disk() {
        let tol = Tolerances::default();
        assert!(sqs_membership(&chebyshev_data(c(0.5, 0.0), 50), &tol).unwrap().member);
        assert!(sqs_membership(&chebyshev_data(c(0.0, -0.5), 50), &tol).unwrap().member);
        assert!(!sqs_membership(&chebyshev_data(c(0.51, 0.0), 50), &tol).unwrap().member);
        assert!(matches!(chebyshev_example(c(0.51, 0.0), 50), Err(Error::InvalidD { .. })));
    }
}
