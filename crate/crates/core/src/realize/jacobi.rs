//! Jacobi-matrix realizations of scalar `S^qs` functions.

use crate::error::{Error, Result};
use crate::opcore::{c, hermitian_part, zeros, ComplexMatrix, Tolerances, C64};
use crate::sysmodel::PartitionedContraction;
use crate::transfer::{disk_grid, theta_eval, SqsFunctionData};

/// The tridiagonal operator
///
/// ```text
/// d    a_0
/// a_0  b_1  a_1
///      a_1  b_2  ...
/// ```
///
/// on `ℂ ⊕ ℂ^n`, with `a` and `b` of equal length `n`. When `truncated` is
/// set the matrix is the leading section of an infinite one.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiRealization {
    pub d: C64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub truncated: bool,
}

impl JacobiRealization {
    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.a.len() != self.b.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} off-diagonal and {} diagonal coefficients",
                self.a.len(),
                self.b.len()
            )));
        }
        if !self.d.re.is_finite() || !self.d.im.is_finite() {
            return Err(Error::NonFinite { row: 0, col: 0 });
        }
        for (k, &a) in self.a.iter().enumerate() {
            if !a.is_finite() || a <= 0.0 {
                return Err(Error::NonPositiveWeight { step: k, value: a });
            }
        }
        if let Some(k) = self.b.iter().position(|b| !b.is_finite()) {
            return Err(Error::NonFinite { row: k + 1, col: k + 1 });
        }
        Ok(())
    }

    /// The `(n + 1) × (n + 1)` matrix `T₀`.
    pub fn matrix(&self) -> ComplexMatrix {
        let n = self.len();
        let mut t = zeros(n + 1, n + 1);
        t[(0, 0)] = self.d;
        for k in 0..n {
            t[(k + 1, k + 1)] = c(self.b[k], 0.0);
            t[(k, k + 1)] = c(self.a[k], 0.0);
            t[(k + 1, k)] = c(self.a[k], 0.0);
        }
        t
    }

    pub fn to_system(&self) -> Result<PartitionedContraction> {
        self.validate()?;
        PartitionedContraction::new(self.matrix(), 1, 1, self.len())
    }
}

/// Hermitian Lanczos with full reorthogonalization on `a` from `b / ‖b‖`.
///
/// Returns `(a_0, …, a_{n−1})`, `(b_1, …, b_n)` and whether the process
/// was cut off at `max_len` rather than ending in breakdown.
pub fn lanczos(a: &ComplexMatrix, b: &ComplexMatrix, max_len: usize, tol: &Tolerances) -> (Vec<f64>, Vec<f64>, bool) {
    let dim = a.nrows();
    let beta0 = b.norm();
    if beta0 <= tol.rank_tol || max_len == 0 {
        return (Vec::new(), Vec::new(), beta0 > tol.rank_tol);
    }
    let mut offdiag = vec![beta0];
    let mut diag = Vec::new();
    let mut basis: Vec<ComplexMatrix> = vec![b / c(beta0, 0.0)];
    loop {
        let q = basis.last().expect("nonempty");
        let mut w = a * q;
        diag.push((q.adjoint() * &w)[(0, 0)].re);
        for _ in 0..2 {
            for v in &basis {
                let proj = (v.adjoint() * &w)[(0, 0)];
                w -= v * proj;
            }
        }
        let next = w.norm();
        if diag.len() == dim || next <= tol.rank_tol {
            return (offdiag, diag, false);
        }
        if diag.len() == max_len {
            return (offdiag, diag, true);
        }
        offdiag.push(next);
        basis.push(w / c(next, 0.0));
    }
}

/// Recurrence coefficients of the measure `⟨E(dt) b, b⟩` of a Hermitian
/// `a`, by the modified Chebyshev algorithm with monic Chebyshev
/// polynomials of the first kind as the auxiliary family. Returns the
/// first `count` values of `(a_k)` and `(b_{k+1})` in the Lanczos
/// convention.
pub fn modified_chebyshev_coefficients(a: &ComplexMatrix, b: &ComplexMatrix, count: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if count == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let m = 2 * count;
    let aux_beta = |l: usize| match l {
        0 => 0.0,
        1 => 0.5,
        _ => 0.25,
    };
    // ν_l = ⟨π_l(a) b, b⟩ through the vector recurrence of π_l.
    let mut nu = Vec::with_capacity(m);
    let mut prev = zeros(b.nrows(), 1);
    let mut cur = b.clone();
    for l in 0..m {
        nu.push((b.adjoint() * &cur)[(0, 0)].re);
        let next = a * &cur - &prev * c(aux_beta(l), 0.0);
        prev = cur;
        cur = next;
    }
    if nu[0].is_nan() || nu[0] <= 0.0 {
        return Err(Error::NonPositiveWeight { step: 0, value: nu[0] });
    }
    let mut alpha = vec![nu[1] / nu[0]];
    let mut beta = vec![nu[0]];
    let mut sigma_prev = vec![0.0; m];
    let mut sigma = nu;
    for k in 1..count {
        let mut next = vec![0.0; m];
        for l in k..(m - k) {
            next[l] = sigma[l + 1] - alpha[k - 1] * sigma[l] - beta[k - 1] * sigma_prev[l]
                + aux_beta(l) * sigma[l - 1];
        }
        if next[k].is_nan() || next[k] <= 0.0 {
            return Err(Error::NonPositiveWeight { step: k, value: next[k] });
        }
        alpha.push(next[k + 1] / next[k] - sigma[k] / sigma[k - 1]);
        beta.push(next[k] / sigma[k - 1]);
        sigma_prev = sigma;
        sigma = next;
    }
    Ok((beta.iter().map(|v| v.sqrt()).collect(), alpha))
}

#[derive(Debug, Clone)]
pub struct JacobiOutcome {
    pub jacobi: JacobiRealization,
    /// Number of leading coefficients cross-checked against the moments.
    pub compared: usize,
    pub moment_deviation: f64,
    /// `max |Θ₀(λ) − Θ(λ)|` over a grid in `|λ| < 1/2`.
    pub transfer_deviation: f64,
}

/// Coefficients compared between Lanczos and the moment recurrence.
const COMPARED: usize = 12;
const AGREEMENT: f64 = 1e-7;

fn run<F>(a: &ComplexMatrix, b: &ComplexMatrix, d: C64, max_len: usize, source: F, tol: &Tolerances) -> Result<JacobiOutcome>
where
    F: Fn(C64) -> Result<C64>,
{
    let (off, diag, truncated) = lanczos(a, b, max_len, tol);
    let compared = COMPARED.min(diag.len());
    let (mc_a, mc_b) = modified_chebyshev_coefficients(a, b, compared)?;
    let mut moment_deviation = 0.0f64;
    for k in 0..compared {
        let dev = (mc_a[k] - off[k]).abs().max((mc_b[k] - diag[k]).abs());
        moment_deviation = moment_deviation.max(dev);
        if dev > AGREEMENT {
            return Err(Error::CoefficientMismatch { index: k, deviation: dev });
        }
    }
    let jacobi = JacobiRealization { d, a: off, b: diag, truncated };
    let sys = jacobi.to_system()?;
    let mut transfer_deviation = 0.0f64;
    for lambda in disk_grid(16, 0.5) {
        let own = theta_eval(&sys, lambda, tol)?[(0, 0)];
        transfer_deviation = transfer_deviation.max((own - source(lambda)?).norm());
    }
    Ok(JacobiOutcome { jacobi, compared, moment_deviation, transfer_deviation })
}

/// Jacobi realization of the transfer function of a scalar pqs system.
pub fn jacobi_realize(sys: &PartitionedContraction, max_len: usize, tol: &Tolerances) -> Result<JacobiOutcome> {
    if sys.in_dim() != 1 || sys.out_dim() != 1 {
        return Err(Error::NotScalar);
    }
    sys.require_pqs(tol)?;
    let a = hermitian_part(&sys.a());
    let d = sys.d()[(0, 0)];
    run(&a, &sys.b(), d, max_len, |l| Ok(theta_eval(sys, l, tol)?[(0, 0)]), tol)
}

/// Jacobi realization from scalar atomic data. Membership in `S^qs` is not
/// required; the resulting `T₀` is a contraction exactly when it holds.
pub fn jacobi_from_data(f: &SqsFunctionData, max_len: usize, tol: &Tolerances) -> Result<JacobiOutcome> {
    if f.dim() != 1 {
        return Err(Error::NotScalar);
    }
    f.validate(tol)?;
    let t: Vec<f64> = f.atoms.iter().map(|a| a.t).collect();
    let b = ComplexMatrix::from_fn(t.len(), 1, |j, _| {
        c(((1.0 - t[j] * t[j]) * f.atoms[j].sigma[(0, 0)].re).max(0.0).sqrt(), 0.0)
    });
    let a = crate::opcore::diag_real(&t);
    let d = f.theta0[(0, 0)];
    run(&a, &b, d, max_len, |l| Ok(f.theta(l)?[(0, 0)]), tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::real_matrix;
    use crate::transfer::Atom;

    fn atoms(points: &[(f64, f64)], d: f64) -> SqsFunctionData {
        SqsFunctionData {
            theta0: real_matrix(1, 1, &[d]),
            atoms: points
                .iter()
                .map(|&(t, s)| Atom { t, sigma: real_matrix(1, 1, &[s]) })
                .collect(),
        }
    }

    #[test]
    fn single_atom_by_hand() {
        let tol = Tolerances::default();
        let t0 = 0.4;
        let out = jacobi_from_data(&atoms(&[(t0, 1.0)], 0.0), 10, &tol).unwrap();
        let j = out.jacobi;
        assert_eq!(j.len(), 1);
        assert!(!j.truncated);
        assert!((j.a[0] - (1.0 - t0 * t0).sqrt()).abs() < 1e-14);
        assert!((j.b[0] - t0).abs() < 1e-14);
        assert!(out.transfer_deviation < 1e-12);
    }

    #[test]
    fn three_poles_terminate() {
        let tol = Tolerances::default();
        let f = atoms(&[(-0.6, 0.1), (0.1, 0.2), (0.7, 0.15)], 0.05);
        let out = jacobi_from_data(&f, 50, &tol).unwrap();
        assert_eq!(out.jacobi.len(), 3);
        assert!(!out.jacobi.truncated);
        assert_eq!(out.compared, 3);
        assert!(out.transfer_deviation < 1e-12);
        assert!(out.jacobi.to_system().unwrap().classify(&tol).pqs);
    }

    #[test]
    fn truncation_is_reported() {
        let tol = Tolerances::default();
        let f = atoms(&[(-0.6, 0.1), (0.1, 0.2), (0.7, 0.15)], 0.0);
        let out = jacobi_from_data(&f, 2, &tol).unwrap();
        assert_eq!(out.jacobi.len(), 2);
        assert!(out.jacobi.truncated);
    }

    #[test]
    fn system_source_requires_scalar_pqs() {
        let tol = Tolerances::default();
        let sys = PartitionedContraction::new(zeros(4, 4), 2, 2, 2).unwrap();
        assert!(matches!(jacobi_realize(&sys, 5, &tol), Err(Error::NotScalar)));
    }
}
