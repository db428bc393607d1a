//! Seeded random generators for matrices and systems, used by the
//! property tests and the CLI's randomized checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::opcore::{
    c, diag_real, hermitian_part, op_norm, polar_unitary, ComplexMatrix, Tolerances, C64,
};
use crate::param::PqsParams;
use crate::sysmodel::PartitionedContraction;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Entries with real and imaginary parts uniform in `[-1, 1]`.
pub fn complex_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

pub fn complex_vector<R: Rng>(rng: &mut R, len: usize) -> crate::opcore::ComplexVector {
    crate::opcore::ComplexVector::from_fn(len, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

/// A random matrix rescaled to operator norm `norm`.
pub fn contraction_with_norm<R: Rng>(rng: &mut R, rows: usize, cols: usize, norm: f64) -> ComplexMatrix {
    let m = complex_matrix(rng, rows, cols);
    let s = op_norm(&m);
    if s == 0.0 {
        return m;
    }
    m * c(norm / s, 0.0)
}

/// A random contraction with norm uniform in `[lo, hi]`.
pub fn contraction<R: Rng>(rng: &mut R, rows: usize, cols: usize, lo: f64, hi: f64) -> ComplexMatrix {
    let norm = rng.gen_range(lo..=hi);
    contraction_with_norm(rng, rows, cols, norm)
}

pub fn unitary<R: Rng>(rng: &mut R, n: usize) -> ComplexMatrix {
    polar_unitary(&complex_matrix(rng, n, n)).expect("square")
}

/// A selfadjoint contraction with eigenvalues uniform in `(-bound, bound)`.
pub fn hermitian_contraction<R: Rng>(rng: &mut R, n: usize, bound: f64) -> ComplexMatrix {
    let u = unitary(rng, n);
    let eig: Vec<f64> = (0..n).map(|_| rng.gen_range(-bound..bound)).collect();
    hermitian_part(&(&u * diag_real(&eig) * u.adjoint()))
}

/// A point uniform in the disk of radius `r`.
pub fn disk_point<R: Rng>(rng: &mut R, r: f64) -> C64 {
    let radius = r * rng.gen_range(0.0f64..1.0).sqrt();
    C64::from_polar(radius, rng.gen_range(0.0..std::f64::consts::TAU))
}

/// A point with `lo < |z| < hi` and a nonreal argument.
pub fn annulus_point<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> C64 {
    let radius = rng.gen_range(lo..hi);
    let angle = rng.gen_range(0.1..std::f64::consts::PI - 0.1) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    C64::from_polar(radius, angle)
}

/// A passive system whose block operator has norm in `[lo, hi]`.
pub fn passive_system<R: Rng>(rng: &mut R, in_dim: usize, out_dim: usize, state_dim: usize, lo: f64, hi: f64) -> PartitionedContraction {
    let t = contraction(rng, out_dim + state_dim, in_dim + state_dim, lo, hi);
    PartitionedContraction::new(t, in_dim, out_dim, state_dim).expect("consistent partition")
}

pub fn conservative_system<R: Rng>(rng: &mut R, io_dim: usize, state_dim: usize) -> PartitionedContraction {
    let t = unitary(rng, io_dim + state_dim);
    PartitionedContraction::new(t, io_dim, io_dim, state_dim).expect("consistent partition")
}

/// Random pqs parameters: `A` selfadjoint with spectrum in `(-a_bound, a_bound)`,
/// `K` with norm at most `k_bound`, `X` a contraction on `𝔇_{K*}`.
pub fn pqs_params<R: Rng>(rng: &mut R, io_dim: usize, state_dim: usize, a_bound: f64, k_bound: f64, tol: &Tolerances) -> Result<PqsParams> {
    let a = hermitian_contraction(rng, state_dim, a_bound);
    let k_state = contraction(rng, io_dim, state_dim, 0.3 * k_bound, k_bound);
    let x = contraction(rng, io_dim, io_dim, 0.0, 1.0);
    PqsParams::from_ambient(a, &k_state, &x, tol)
}

pub fn pqs_system<R: Rng>(rng: &mut R, io_dim: usize, state_dim: usize, tol: &Tolerances) -> Result<PartitionedContraction> {
    pqs_params(rng, io_dim, state_dim, 0.95, 0.95, tol)?.assemble()
}

/// Blaschke-diagonal pqs system: `A = diag(points)`, `K` an isometry onto
/// the first `m` columns of a random unitary `V`, and `X` a random unitary
/// on the remaining `extra` coordinates. Returns the system with `V`.
pub fn blaschke_system<R: Rng>(rng: &mut R, points: &[f64], extra: usize, tol: &Tolerances) -> Result<(PartitionedContraction, ComplexMatrix)> {
    let m = points.len();
    let n = m + extra;
    let v = unitary(rng, n);
    let a = diag_real(points);
    let k_state = v.columns(0, m).into_owned();
    let tail = v.columns(m, extra).into_owned();
    let x0 = unitary(rng, extra);
    let x_amb = if extra > 0 { &tail * x0 * tail.adjoint() } else { ComplexMatrix::zeros(n, n) };
    let p = PqsParams::from_ambient(a, &k_state, &x_amb, tol)?;
    Ok((p.assemble()?, v))
}
