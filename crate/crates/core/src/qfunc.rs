//! Q-functions `Q(z) = P_𝔑(T − zI)^{-1}|_𝔑` of quasi-selfadjoint
//! contractions and grid checks of the class conditions.

use crate::error::{Error, Result};
use crate::opcore::{
    c, hermitian_part, identity, inverse_checked, min_eigenvalue, op_norm, solve_checked, zeros,
    ComplexMatrix, Tolerances, C64,
};
use crate::sampling::{annulus_point, rng};
use crate::sysmodel::PartitionedContraction;
use crate::transfer::{circle_grid, theta_eval};

/// One sample of a Q-function.
#[derive(Debug, Clone, PartialEq)]
pub struct QSample {
    pub z: C64,
    pub value: ComplexMatrix,
}

fn io_dim(sys: &PartitionedContraction) -> Result<usize> {
    if sys.in_dim() != sys.out_dim() {
        return Err(Error::DimensionMismatch("input and output spaces differ".into()));
    }
    Ok(sys.in_dim())
}

/// `Q(z)` from the resolvent of the full block operator.
pub fn q_eval(sys: &PartitionedContraction, z: C64, tol: &Tolerances) -> Result<ComplexMatrix> {
    let n = io_dim(sys)?;
    let total = n + sys.state_dim();
    let shifted = sys.t() - identity(total) * z;
    let mut rhs = zeros(total, n);
    rhs.view_mut((0, 0), (n, n)).copy_from(&identity(n));
    let solved = solve_checked(shifted, &rhs, z, tol)?;
    Ok(solved.view((0, 0), (n, n)).into_owned())
}

/// `Q(z) = (Θ(1/z) − zI)^{-1}`, the Schur complement form.
pub fn q_from_theta(sys: &PartitionedContraction, z: C64, tol: &Tolerances) -> Result<ComplexMatrix> {
    let n = io_dim(sys)?;
    if z.norm() == 0.0 {
        return Err(Error::SingularResolvent { point: z });
    }
    let w = theta_eval(sys, 1.0 / z, tol)? - identity(n) * z;
    inverse_checked(&w, z, tol)
}

pub fn q_samples(sys: &PartitionedContraction, points: &[C64], tol: &Tolerances) -> Result<Vec<QSample>> {
    points
        .iter()
        .map(|&z| Ok(QSample { z, value: q_eval(sys, z, tol)? }))
        .collect()
}

/// Residuals of the two relations between `Q` and `Θ` at `z`, `λ = 1/z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundTrip {
    /// `‖Q(z)(Θ(1/z) − zI) − I‖`.
    pub q_side: f64,
    /// `‖Θ(λ) − (I/λ + Q(1/λ)^{-1})‖`.
    pub theta_side: f64,
}

impl RoundTrip {
    pub fn max(&self) -> f64 {
        self.q_side.max(self.theta_side)
    }
}

pub fn q_theta_roundtrip(sys: &PartitionedContraction, z: C64, tol: &Tolerances) -> Result<RoundTrip> {
    let n = io_dim(sys)?;
    let q = q_eval(sys, z, tol)?;
    let theta = theta_eval(sys, 1.0 / z, tol)?;
    let q_side = op_norm(&(&q * (&theta - identity(n) * z) - identity(n)));
    let rebuilt = identity(n) * z + inverse_checked(&q, z, tol)?;
    Ok(RoundTrip { q_side, theta_side: op_norm(&(theta - rebuilt)) })
}

/// Samples used for contour averages on `|z| = radius`.
pub const CONTOUR_SAMPLES: usize = 32;

/// `F` in `Q(z) = −I/z + F/z² + o(1/z²)`, as the average of `z²Q(z) + zI`
/// over `CONTOUR_SAMPLES` equally spaced points on `|z| = radius`. The
/// average removes every term `z^{-k}` with `0 < k < CONTOUR_SAMPLES`.
pub fn q_asymptotic_f<F>(q: F, radius: f64) -> Result<ComplexMatrix>
where
    F: Fn(C64) -> Result<ComplexMatrix>,
{
    contour_mean(&q, radius, |z, v| {
        let n = v.nrows();
        v * (z * z) + identity(n) * z
    })
}

/// `‖mean(zQ(z)) + I‖` on `|z| = radius`: the leading term of the expansion.
pub fn q_normalization<F>(q: F, radius: f64) -> Result<f64>
where
    F: Fn(C64) -> Result<ComplexMatrix>,
{
    let mean = contour_mean(&q, radius, |z, v| v * z)?;
    let n = mean.nrows();
    Ok(op_norm(&(mean + identity(n))))
}

fn contour_mean<F, G>(q: &F, radius: f64, g: G) -> Result<ComplexMatrix>
where
    F: Fn(C64) -> Result<ComplexMatrix>,
    G: Fn(C64, ComplexMatrix) -> ComplexMatrix,
{
    let mut sum: Option<ComplexMatrix> = None;
    for z in circle_grid(CONTOUR_SAMPLES, radius) {
        let term = g(z, q(z)?);
        sum = Some(match sum {
            Some(s) => s + term,
            None => term,
        });
    }
    Ok(sum.expect("nonempty contour") / c(CONTOUR_SAMPLES as f64, 0.0))
}

/// Outcome of the randomized search for a point `z₀` where the (S2)
/// kernel differs from `Q(z₀)*Q(z₀)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessSearch {
    pub found: bool,
    pub z0: Option<C64>,
    /// Largest `‖K(z₀, z₀) − Q(z₀)*Q(z₀)‖` seen.
    pub deviation: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelCheck {
    /// `‖mean(zQ(z)) + I‖` on `|z| = 100`.
    pub s1_residual: f64,
    pub s2_min_eig: f64,
    pub s3_min_eig: f64,
    pub witness: WitnessSearch,
}

impl KernelCheck {
    pub fn passes(&self, tol: &Tolerances) -> bool {
        self.s1_residual <= tol.eq_tol
            && self.s2_min_eig >= -tol.psd_tol
            && self.s3_min_eig >= -tol.psd_tol
            && self.witness.found
    }
}

/// Step of the central difference used on the confluent entries.
const CONFLUENT_STEP: f64 = 1e-6;

/// Block Gram matrix with `(a, b)` block `K(z_b, z_a)`, where
/// `K(z, ξ) = num(z, ξ)/(z − ξ̄)`. Entries with `z_b = z̄_a` use the
/// derivative of the numerator in `z`.
fn gram<N>(num: N, points: &[C64], n: usize) -> Result<ComplexMatrix>
where
    N: Fn(C64, C64) -> Result<ComplexMatrix>,
{
    let m = points.len();
    let mut g = zeros(n * m, n * m);
    for (a, &xi) in points.iter().enumerate() {
        for (b, &z) in points.iter().enumerate() {
            let denom = z - xi.conj();
            let block = if denom.norm() < 1e-8 {
                let h = c(CONFLUENT_STEP, 0.0);
                let z0 = xi.conj();
                (num(z0 + h, xi)? - num(z0 - h, xi)?) / (h * 2.0)
            } else {
                num(z, xi)? / denom
            };
            g.view_mut((a * n, b * n), (n, n)).copy_from(&block);
        }
    }
    Ok(hermitian_part(&g))
}

/// Checks the class conditions (S1)–(S4) for `q` on the points `z_points`
/// (outside the closed disk, pairwise distinct). The (S4) witness is
/// searched at `witness_samples` random points with `1.5 < |z| < 4`.
pub fn q_class_kernel_check<Q>(
    q: Q,
    f: &ComplexMatrix,
    z_points: &[C64],
    witness_samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<KernelCheck>
where
    Q: Fn(C64) -> Result<ComplexMatrix>,
{
    if z_points.is_empty() {
        return Err(Error::DegenerateGrid("no points".into()));
    }
    if let Some(z) = z_points.iter().find(|z| z.norm() <= 1.0) {
        return Err(Error::DegenerateGrid(format!("point {z} is not outside the closed unit disk")));
    }
    for (i, a) in z_points.iter().enumerate() {
        if z_points[..i].iter().any(|b| (a - b).norm() <= 1e-12 * a.norm()) {
            return Err(Error::DegenerateGrid(format!("repeated point {a}")));
        }
    }
    let n = f.nrows();
    let skew = f - f.adjoint();
    let s2 = |z: C64, xi: C64| -> Result<ComplexMatrix> {
        let (qz, qx) = (q(z)?, q(xi)?.adjoint());
        Ok(&qz - &qx - &qx * &skew * &qz)
    };
    let s3 = |z: C64, xi: C64| -> Result<ComplexMatrix> {
        let (qz, qx) = (q(z)?, q(xi)?.adjoint());
        let one = c(1.0, 0.0);
        Ok(&qz * (one - z * z) - &qx * (one - xi.conj() * xi.conj())
            - &qx * &skew * &qz * (one - z * xi.conj())
            - identity(n) * (z - xi.conj()))
    };
    let s2_min_eig = min_eigenvalue(&gram(s2, z_points, n)?);
    let s3_min_eig = min_eigenvalue(&gram(s3, z_points, n)?);
    let s1_residual = q_normalization(&q, 100.0)?;

    let mut r = rng(seed);
    let mut witness = WitnessSearch { found: false, z0: None, deviation: 0.0, samples: 0 };
    for _ in 0..witness_samples {
        let z0 = annulus_point(&mut r, 1.5, 4.0);
        let qz = q(z0)?;
        let kernel = s2(z0, z0)? / (z0 - z0.conj());
        let deviation = op_norm(&(kernel - qz.adjoint() * &qz));
        witness.samples += 1;
        if deviation > witness.deviation {
            witness.deviation = deviation;
        }
        if deviation > tol.eq_tol {
            witness.found = true;
            witness.z0 = Some(z0);
            break;
        }
    }
    Ok(KernelCheck { s1_residual, s2_min_eig, s3_min_eig, witness })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::realize::{chebyshev_system, chebyshev_theta};
    use crate::sampling::pqs_system;

    #[test]
    fn zero_operator() {
        let tol = Tolerances::default();
        let sys = PartitionedContraction::new(zeros(3, 3), 2, 2, 1).unwrap();
        let z = c(3.0, 0.0);
        let q = q_eval(&sys, z, &tol).unwrap();
        assert!(op_norm(&(q + identity(2) / z)) < 1e-15);
        assert!(q_theta_roundtrip(&sys, z, &tol).unwrap().max() < 1e-15);
        let f = q_asymptotic_f(|z| q_eval(&sys, z, &tol), 100.0).unwrap();
        assert!(op_norm(&f) < 1e-12);
    }

    #[test]
    fn schur_complement_agrees() {
        let tol = Tolerances::default();
        let sys = pqs_system(&mut rng(4), 2, 3, &tol).unwrap();
        for z in [c(1.7, 0.3), c(-2.0, -1.1), c(0.2, 3.5)] {
            let a = q_eval(&sys, z, &tol).unwrap();
            let b = q_from_theta(&sys, z, &tol).unwrap();
            assert!(op_norm(&(a - b)) < 1e-12);
        }
        let f = q_asymptotic_f(|z| q_eval(&sys, z, &tol), 100.0).unwrap();
        assert!(op_norm(&(f + sys.d())) < 1e-10);
    }

    #[test]
    fn single_atom_continued_fraction() {
        let tol = Tolerances::default();
        let (d, a0, b1) = (0.3, 0.6, 0.2);
        let t = crate::opcore::real_matrix(2, 2, &[d, a0, a0, b1]);
        let sys = PartitionedContraction::new(t, 1, 1, 1).unwrap();
        let z = c(1.8, 0.7);
        let expected = -1.0 / (z - d - a0 * a0 / (z - b1));
        assert!((q_eval(&sys, z, &tol).unwrap()[(0, 0)] - expected).norm() < 1e-14);
    }

    #[test]
    fn chebyshev_kernels() {
        let tol = Tolerances::default();
        let d = c(0.2, 0.1);
        let q = |z: C64| Ok(ComplexMatrix::from_element(1, 1, 1.0 / (chebyshev_theta(d, 1.0 / z) - z)));
        let f = q_asymptotic_f(q, 100.0).unwrap();
        assert!((f[(0, 0)] + d).norm() < 1e-12);
        let points = circle_grid(8, 2.0);
        let check = q_class_kernel_check(q, &f, &points, 20, 1, &tol).unwrap();
        assert!(check.passes(&tol), "{check:?}");
        let sys = chebyshev_system(d, 64).unwrap();
        let z = c(2.0, 0.5);
        let closed = q(z).unwrap()[(0, 0)];
        assert!((q_eval(&sys, z, &tol).unwrap()[(0, 0)] - closed).norm() < 1e-12);
    }

    #[test]
    fn confluent_and_degenerate_grids() {
        let tol = Tolerances::default();
        let sys = pqs_system(&mut rng(8), 1, 2, &tol).unwrap();
        let q = |z| q_eval(&sys, z, &tol);
        let f = -sys.d();
        let points = [c(1.5, 0.0), c(2.0, 1.0), c(2.0, -1.0)];
        let check = q_class_kernel_check(q, &f, &points, 10, 3, &tol).unwrap();
        assert!(check.s2_min_eig > -1e-8 && check.s3_min_eig > -1e-8, "{check:?}");
        let repeated = [c(2.0, 1.0), c(2.0, 1.0)];
        assert!(matches!(q_class_kernel_check(q, &f, &repeated, 1, 0, &tol), Err(Error::DegenerateGrid(_))));
        let inside = [c(0.5, 0.0)];
        assert!(matches!(q_class_kernel_check(q, &f, &inside, 1, 0, &tol), Err(Error::DegenerateGrid(_))));
    }

    #[test]
    fn trivial_state_has_no_witness() {
        let tol = Tolerances::default();
        let q = |z: C64| Ok(ComplexMatrix::from_element(1, 1, -1.0 / z));
        let check = q_class_kernel_check(q, &zeros(1, 1), &[c(2.0, 1.0), c(-1.5, 2.0)], 50, 9, &tol).unwrap();
        assert!(!check.witness.found);
        assert_eq!(check.witness.samples, 50);
        assert!(check.s1_residual < 1e-12);
    }
}
