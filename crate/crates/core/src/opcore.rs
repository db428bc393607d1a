//! Dense complex linear-algebra kernel.
//!
//! Rank decisions are relative: a singular value `σ` counts as zero when
//! `σ ≤ rank_tol · σ_max`. Subspaces are carried as orthonormal column
//! bases ([`SubspaceBasis`]); operators "on a defect space" are matrices in
//! such a basis.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Numerical tolerances shared by every operation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Singular-value cutoff, relative to the largest singular value.
    pub rank_tol: f64,
    /// Residual norm accepted in identity checks.
    pub eq_tol: f64,
    /// Allowed magnitude of negative eigenvalues of PSD matrices.
    pub psd_tol: f64,
    /// Tolerance for boundary and grid checks.
    pub grid_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank_tol: 1e-10,
            eq_tol: 1e-9,
            psd_tol: 1e-9,
            grid_tol: 1e-7,
        }
    }
}

impl Tolerances {
    /// Overrides one tolerance by name (`rank_tol`, `eq_tol`, `psd_tol`, `grid_tol`).
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidMeasure(format!(
                "tolerance {name} must be a finite nonnegative number"
            )));
        }
        match name {
            "rank_tol" => self.rank_tol = value,
            "eq_tol" => self.eq_tol = value,
            "psd_tol" => self.psd_tol = value,
            "grid_tol" => self.grid_tol = value,
            other => return Err(Error::UnknownTolerance(other.to_string())),
        }
        Ok(())
    }
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> ComplexMatrix {
    DMatrix::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> ComplexMatrix {
    DMatrix::zeros(rows, cols)
}

/// Builds a complex matrix from real row-major data.
pub fn real_matrix(rows: usize, cols: usize, data: &[f64]) -> ComplexMatrix {
    assert_eq!(data.len(), rows * cols);
    DMatrix::from_fn(rows, cols, |i, j| c(data[i * cols + j], 0.0))
}

pub fn diag_real(values: &[f64]) -> ComplexMatrix {
    let n = values.len();
    DMatrix::from_fn(n, n, |i, j| if i == j { c(values[i], 0.0) } else { ZERO })
}

pub fn check_finite(m: &ComplexMatrix) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

pub fn require_square(m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NonSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

/// Singular values, largest first. Empty for matrices with a zero dimension.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let k = m.nrows().min(m.ncols());
    let mut s: Vec<f64> = hermitian_dilation(m).symmetric_eigenvalues().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s.truncate(k);
    s.iter().map(|v| v.max(0.0)).collect()
}

// nalgebra's complex SVD loses about 1e-8 of accuracy when singular values
// cluster, so singular triplets come from the Hermitian eigenproblem of
// [[0, M], [M*, 0]], whose eigenvalues are ±σ.
fn hermitian_dilation(m: &ComplexMatrix) -> ComplexMatrix {
    let (rows, cols) = m.shape();
    let mut h = zeros(rows + cols, rows + cols);
    h.view_mut((0, rows), (rows, cols)).copy_from(m);
    h.view_mut((rows, 0), (cols, rows)).copy_from(&m.adjoint());
    h
}

/// Singular triplets with `σ > cutoff`, largest first, as `(U, σ, V)`.
fn thin_svd(m: &ComplexMatrix, cutoff: f64) -> (ComplexMatrix, Vec<f64>, ComplexMatrix) {
    let (rows, cols) = m.shape();
    // Reduce rectangular input to a square triangular factor first.
    if rows > cols {
        let qr = m.clone().qr();
        let (u, s, v) = thin_svd(&qr.r(), cutoff);
        return (qr.q() * u, s, v);
    }
    if cols > rows {
        let (u, s, v) = thin_svd(&m.adjoint(), cutoff);
        return (v, s, u);
    }
    let (values, vectors) = hermitian_eigen(&hermitian_dilation(m));
    let keep: Vec<usize> = (0..rows + cols)
        .rev()
        .filter(|&k| values[k] > cutoff && values[k] > 0.0)
        .take(rows.min(cols))
        .collect();
    let mut u = DMatrix::from_fn(rows, keep.len(), |i, j| vectors[(i, keep[j])]);
    let mut v = DMatrix::from_fn(cols, keep.len(), |i, j| vectors[(rows + i, keep[j])]);
    for j in 0..keep.len() {
        let nu = u.column(j).norm();
        let nv = v.column(j).norm();
        u.column_mut(j).scale_mut(1.0 / nu);
        v.column_mut(j).scale_mut(1.0 / nv);
    }
    (u, keep.iter().map(|&k| values[k]).collect(), v)
}

/// Operator (spectral) norm; zero for empty matrices.
pub fn op_norm(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    // Squaring keeps the largest singular value to full relative accuracy.
    let gram = if m.nrows() <= m.ncols() { m * m.adjoint() } else { m.adjoint() * m };
    let top = hermitian_part(&gram).symmetric_eigenvalues().iter().copied().fold(0.0, f64::max);
    top.sqrt()
}

pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

/// Eigendecomposition of the Hermitian part of `m`, eigenvalues ascending.
pub fn hermitian_eigen(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// Smallest eigenvalue of the Hermitian part; `+∞` for empty matrices.
pub fn min_eigenvalue(m: &ComplexMatrix) -> f64 {
    hermitian_eigen(m).0.first().copied().unwrap_or(f64::INFINITY)
}

fn hermitian_residual(m: &ComplexMatrix) -> f64 {
    op_norm(&(m - m.adjoint()))
}

/// Square root of a Hermitian PSD matrix. Eigenvalues below `psd_tol` are
/// clamped to exactly zero.
pub fn psd_sqrt(m: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    require_square(m)?;
    let scale = op_norm(m).max(1.0);
    let residual = hermitian_residual(m);
    if residual > tol.eq_tol * scale {
        return Err(Error::NotHermitian { residual });
    }
    let (values, vectors) = hermitian_eigen(m);
    if let Some(&min) = values.first() {
        if min < -tol.psd_tol * scale {
            return Err(Error::NotPsd { min_eig: min });
        }
    }
    Ok(spectral_map(&values, &vectors, |v| {
        if v <= tol.psd_tol {
            0.0
        } else {
            v.sqrt()
        }
    }))
}

fn spectral_map(values: &[f64], vectors: &ComplexMatrix, f: impl Fn(f64) -> f64) -> ComplexMatrix {
    let n = values.len();
    let mut scaled = vectors.clone();
    for (j, &v) in values.iter().enumerate() {
        let fv = f(v);
        for i in 0..n {
            scaled[(i, j)] *= fv;
        }
    }
    scaled * vectors.adjoint()
}

/// Defect operator `D_A = (I − A*A)^{1/2}` (square of size `A.ncols()`).
pub fn defect_operator(a: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let norm = op_norm(a);
    if norm > 1.0 + tol.rank_tol {
        return Err(Error::NotAContraction { norm });
    }
    let n = a.ncols();
    let gram = identity(n) - a.adjoint() * a;
    let (values, vectors) = hermitian_eigen(&gram);
    Ok(spectral_map(&values, &vectors, |v| {
        if v <= tol.psd_tol {
            0.0
        } else {
            v.sqrt()
        }
    }))
}

/// Moore–Penrose pseudoinverse via SVD with the relative rank cutoff.
pub fn pinv(m: &ComplexMatrix, tol: &Tolerances) -> ComplexMatrix {
    let (rows, cols) = m.shape();
    if m.is_empty() {
        return zeros(cols, rows);
    }
    let (u, s, v) = thin_svd(m, tol.rank_tol * op_norm(m));
    let inv: Vec<f64> = s.iter().map(|x| 1.0 / x).collect();
    v * diag_real(&inv) * u.adjoint()
}

/// A subspace of `C^ambient_dim` given by an orthonormal column basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    pub ambient_dim: usize,
    pub basis: ComplexMatrix,
}

impl SubspaceBasis {
    pub fn trivial(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: zeros(ambient_dim, 0),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: identity(ambient_dim),
        }
    }

    /// Orthonormalizes the columns of `m` (relative rank cutoff).
    pub fn span_of(m: &ComplexMatrix, tol: &Tolerances) -> Self {
        range_basis(m, tol)
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_trivial(&self) -> bool {
        self.dim() == 0
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient_dim
    }

    pub fn projector(&self) -> ComplexMatrix {
        &self.basis * self.basis.adjoint()
    }

    pub fn complement(&self) -> Self {
        orthogonal_complement(&self.basis, self.ambient_dim)
    }

    /// Distance of `v` from the subspace.
    pub fn distance(&self, v: &ComplexVector) -> f64 {
        let proj = &self.basis * (self.basis.adjoint() * v);
        (v - proj).norm()
    }

    /// `‖P_self − P_other‖`, i.e. the sine of the largest principal angle when
    /// dimensions agree.
    pub fn gap(&self, other: &SubspaceBasis) -> f64 {
        op_norm(&(self.projector() - other.projector()))
    }

    pub fn same_as(&self, other: &SubspaceBasis, tol: f64) -> bool {
        self.ambient_dim == other.ambient_dim
            && self.dim() == other.dim()
            && (self.ambient_dim == 0 || self.gap(other) <= tol)
    }

    /// `‖Q*Q − I‖`.
    pub fn orthonormality_residual(&self) -> f64 {
        op_norm(&(self.basis.adjoint() * &self.basis - identity(self.dim())))
    }
}

fn range_basis_abs(m: &ComplexMatrix, cutoff: f64) -> ComplexMatrix {
    let rows = m.nrows();
    if m.is_empty() {
        return zeros(rows, 0);
    }
    let (mut out, _, _) = thin_svd(m, cutoff);
    normalize_phases(&mut out);
    out
}

/// Rotates each column so that its largest entry is real and positive,
/// which makes bases of coordinate subspaces come out as unit vectors.
fn normalize_phases(q: &mut ComplexMatrix) {
    for j in 0..q.ncols() {
        let mut pivot = ZERO;
        for i in 0..q.nrows() {
            if q[(i, j)].norm() > pivot.norm() + 1e-12 {
                pivot = q[(i, j)];
            }
        }
        if pivot.norm() > 0.0 {
            let phase = pivot.conj() / pivot.norm();
            for i in 0..q.nrows() {
                q[(i, j)] *= phase;
            }
        }
    }
}

/// Orthonormal basis of the range of `m`.
pub fn range_basis(m: &ComplexMatrix, tol: &Tolerances) -> SubspaceBasis {
    let smax = op_norm(m);
    SubspaceBasis {
        ambient_dim: m.nrows(),
        basis: range_basis_abs(m, tol.rank_tol * smax),
    }
}

fn orthogonal_complement(q: &ComplexMatrix, ambient: usize) -> SubspaceBasis {
    if q.ncols() == 0 {
        return SubspaceBasis::full(ambient);
    }
    if q.ncols() >= ambient {
        return SubspaceBasis::trivial(ambient);
    }
    let p = identity(ambient) - q * q.adjoint();
    let (values, vectors) = hermitian_eigen(&p);
    let keep: Vec<usize> = (0..ambient).filter(|&k| values[k] > 0.5).collect();
    let mut basis = DMatrix::from_fn(ambient, keep.len(), |i, j| vectors[(i, keep[j])]);
    normalize_phases(&mut basis);
    SubspaceBasis {
        ambient_dim: ambient,
        basis,
    }
}

/// Orthonormal basis of the kernel of `m` (a subspace of `C^{m.ncols()}`).
pub fn kernel_basis(m: &ComplexMatrix, tol: &Tolerances) -> SubspaceBasis {
    let n = m.ncols();
    if m.nrows() == 0 {
        return SubspaceBasis::full(n);
    }
    let row_space = range_basis(&m.adjoint(), tol);
    orthogonal_complement(&row_space.basis, n)
}

/// Intersection of two subspaces, computed as the kernel of the stacked
/// complementary projections.
pub fn subspace_intersection(u: &SubspaceBasis, v: &SubspaceBasis, tol: &Tolerances) -> Result<SubspaceBasis> {
    if u.ambient_dim != v.ambient_dim {
        return Err(Error::DimensionMismatch(format!(
            "ambient dimensions {} and {}",
            u.ambient_dim, v.ambient_dim
        )));
    }
    let n = u.ambient_dim;
    let pu = identity(n) - u.projector();
    let pv = identity(n) - v.projector();
    let stacked = vstack(&[&pu, &pv]);
    // Projections have unit scale; use an absolute cutoff.
    let row_space = range_basis_abs(&stacked.adjoint(), tol.rank_tol.max(1e-8));
    Ok(orthogonal_complement(&row_space, n))
}

/// Sum of two subspaces.
pub fn subspace_sum(u: &SubspaceBasis, v: &SubspaceBasis, tol: &Tolerances) -> SubspaceBasis {
    let joined = hstack(&[&u.basis, &v.basis]);
    SubspaceBasis {
        ambient_dim: u.ambient_dim,
        basis: range_basis_abs(&joined, tol.rank_tol.max(1e-8)),
    }
}

/// Orthonormal basis of `span{A^n B : n = 0..=max_deg}`, built block by
/// block with two passes of reorthogonalization. Stops early once a block
/// adds no new direction or the space is full.
pub fn krylov_span(a: &ComplexMatrix, b: &ComplexMatrix, max_deg: usize, tol: &Tolerances) -> Result<SubspaceBasis> {
    let n = require_square(a)?;
    if b.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "krylov start block has {} rows, operator is {n}x{n}",
            b.nrows()
        )));
    }
    let mut q = range_basis(b, tol).basis;
    let mut newest = q.clone();
    for _ in 0..max_deg {
        if q.ncols() >= n || newest.ncols() == 0 {
            break;
        }
        let mut w = a * &newest;
        let scale = op_norm(&w);
        if scale == 0.0 {
            break;
        }
        for _ in 0..2 {
            let coeffs = q.adjoint() * &w;
            w -= &q * coeffs;
        }
        let fresh = range_basis_abs(&w, tol.rank_tol * scale);
        if fresh.ncols() == 0 {
            break;
        }
        // Guard against loss of orthogonality before the merge.
        let mut fresh = fresh;
        let coeffs = q.adjoint() * &fresh;
        fresh -= &q * coeffs;
        let fresh = range_basis_abs(&fresh, 0.5);
        q = hstack(&[&q, &fresh]);
        newest = fresh;
    }
    Ok(SubspaceBasis {
        ambient_dim: n,
        basis: q,
    })
}

pub fn hstack(blocks: &[&ComplexMatrix]) -> ComplexMatrix {
    let rows = blocks.first().map(|b| b.nrows()).unwrap_or(0);
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let mut offset = 0;
    for b in blocks {
        assert_eq!(b.nrows(), rows, "hstack row mismatch");
        out.view_mut((0, offset), (rows, b.ncols())).copy_from(*b);
        offset += b.ncols();
    }
    out
}

pub fn vstack(blocks: &[&ComplexMatrix]) -> ComplexMatrix {
    let cols = blocks.first().map(|b| b.ncols()).unwrap_or(0);
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = zeros(rows, cols);
    let mut offset = 0;
    for b in blocks {
        assert_eq!(b.ncols(), cols, "vstack column mismatch");
        out.view_mut((offset, 0), (b.nrows(), cols)).copy_from(*b);
        offset += b.nrows();
    }
    out
}

/// Assembles a 2x2 block matrix.
pub fn block2(tl: &ComplexMatrix, tr: &ComplexMatrix, bl: &ComplexMatrix, br: &ComplexMatrix) -> ComplexMatrix {
    vstack(&[&hstack(&[tl, tr]), &hstack(&[bl, br])])
}

pub fn block_diag(blocks: &[&ComplexMatrix]) -> ComplexMatrix {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let (mut r, mut k) = (0, 0);
    for b in blocks {
        out.view_mut((r, k), b.shape()).copy_from(*b);
        r += b.nrows();
        k += b.ncols();
    }
    out
}

pub fn is_contraction(a: &ComplexMatrix, tol: &Tolerances) -> bool {
    op_norm(a) <= 1.0 + tol.rank_tol
}

fn ensure_contraction(a: &ComplexMatrix, tol: &Tolerances) -> Result<()> {
    let norm = op_norm(a);
    if norm > 1.0 + tol.rank_tol {
        return Err(Error::NotAContraction { norm });
    }
    Ok(())
}

/// `‖Af‖ < ‖f‖` for every nonzero `f`, i.e. `ker D_A = {0}` numerically.
pub fn is_strict_contraction(a: &ComplexMatrix, tol: &Tolerances) -> Result<bool> {
    ensure_contraction(a, tol)?;
    let d = defect_operator(a, tol)?;
    Ok(kernel_basis(&d, tol).is_trivial())
}

pub fn is_normal(a: &ComplexMatrix, tol: &Tolerances) -> Result<bool> {
    require_square(a)?;
    let norm = op_norm(a);
    let comm = a.adjoint() * a - a * a.adjoint();
    Ok(op_norm(&comm) <= tol.eq_tol * norm * norm.max(1e-300) || norm == 0.0)
}

pub fn is_selfadjoint(a: &ComplexMatrix, tol: &Tolerances) -> Result<bool> {
    require_square(a)?;
    let norm = op_norm(a);
    Ok(hermitian_residual(a) <= tol.eq_tol * norm || norm == 0.0)
}

/// Result of the finite-power surrogate for `S_A = s-lim A^{*n}A^n`.
#[derive(Debug, Clone)]
pub struct StrongLimit {
    pub value: ComplexMatrix,
    /// Power at which the iteration stopped.
    pub power: usize,
    pub converged: bool,
}

pub fn strong_limit_sa(a: &ComplexMatrix, max_power: usize, tol: &Tolerances) -> Result<StrongLimit> {
    let n = require_square(a)?;
    let mut power = identity(n);
    let mut prev = identity(n);
    for k in 1..=max_power {
        power = a * &power;
        let current = power.adjoint() * &power;
        if op_norm(&(&current - &prev)) <= tol.eq_tol {
            return Ok(StrongLimit {
                value: current,
                power: k,
                converged: true,
            });
        }
        prev = current;
    }
    Ok(StrongLimit {
        value: prev,
        power: max_power,
        converged: max_power == 0 && n == 0,
    })
}

/// Canonical splitting of a contraction into its unitary part and its
/// completely non-unitary part.
#[derive(Debug, Clone)]
pub struct CnuSplit {
    /// `{f : ‖A^n f‖ = ‖A^{*n} f‖ = ‖f‖}`.
    pub unitary: SubspaceBasis,
    /// Orthogonal complement of [`CnuSplit::unitary`].
    pub cnu: SubspaceBasis,
}

pub fn cnu_unitary_split(a: &ComplexMatrix, tol: &Tolerances) -> Result<CnuSplit> {
    let n = require_square(a)?;
    ensure_contraction(a, tol)?;
    if n == 0 {
        return Ok(CnuSplit {
            unitary: SubspaceBasis::trivial(0),
            cnu: SubspaceBasis::trivial(0),
        });
    }
    let mut defects = Vec::with_capacity(2 * n);
    let mut power = identity(n);
    for _ in 0..n {
        power = a * &power;
        defects.push(defect_operator(&power, tol)?);
        defects.push(defect_operator(&power.adjoint(), tol)?);
    }
    let refs: Vec<&ComplexMatrix> = defects.iter().collect();
    let stacked = vstack(&refs);
    let unitary = kernel_basis(&stacked, tol);
    let cnu = unitary.complement();
    Ok(CnuSplit { unitary, cnu })
}

/// The unitary block `[[−A, D_{A*}], [D_A, A*]]` from `𝔇_A ⊕ ℌ₂` onto
/// `𝔇_{A*} ⊕ ℌ₁`, written in the orthonormal defect-range bases.
pub fn julia_operator(a: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let da = defect_operator(a, tol)?;
    let da_adj = defect_operator(&a.adjoint(), tol)?;
    let qa = range_basis(&da, tol).basis;
    let qa_adj = range_basis(&da_adj, tol).basis;
    let tl = -(qa_adj.adjoint() * a * &qa);
    let tr = qa_adj.adjoint() * &da_adj;
    let bl = &da * &qa;
    let br = a.adjoint();
    Ok(block2(&tl, &tr, &bl, &br))
}

/// Closest unitary to `m` in the polar decomposition `m = U |m|`.
pub fn polar_unitary(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    require_square(m)?;
    if m.is_empty() {
        return Ok(zeros(0, 0));
    }
    let n = m.nrows();
    let (u, _, v) = thin_svd(m, 1e-13 * op_norm(m));
    // Pair up the complementary directions arbitrarily; they carry σ ≈ 0.
    let u_rest = orthogonal_complement(&u, n).basis;
    let v_rest = orthogonal_complement(&v, n).basis;
    Ok(hstack(&[&u, &u_rest]) * hstack(&[&v, &v_rest]).adjoint())
}

/// Solves `(I − λ A) X = rhs`.
pub fn solve_shifted(a: &ComplexMatrix, lambda: C64, rhs: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let n = require_square(a)?;
    let m = identity(n) - a * lambda;
    solve_checked(m, rhs, lambda, tol)
}

/// Solves `M X = rhs`, rejecting numerically singular `M`.
pub fn solve_checked(m: ComplexMatrix, rhs: &ComplexMatrix, point: C64, tol: &Tolerances) -> Result<ComplexMatrix> {
    let n = m.nrows();
    if n == 0 {
        return Ok(zeros(0, rhs.ncols()));
    }
    let smax = op_norm(&m);
    let lu = m.lu();
    let inv = lu.try_inverse().ok_or(Error::SingularResolvent { point })?;
    // σ_min = 1/‖M⁻¹‖.
    let inv_norm = op_norm(&inv);
    if !inv_norm.is_finite() || inv_norm * tol.rank_tol * smax.max(1.0) >= 1.0 {
        return Err(Error::SingularResolvent { point });
    }
    lu.solve(rhs).ok_or(Error::SingularResolvent { point })
}

/// Inverse of a square matrix, rejecting numerically singular input.
pub fn inverse_checked(m: &ComplexMatrix, point: C64, tol: &Tolerances) -> Result<ComplexMatrix> {
    let n = require_square(m)?;
    solve_checked(m.clone(), &identity(n), point, tol)
}

/// Maximal modulus of the eigenvalues of a normal matrix (its norm).
pub fn spectral_radius_normal(a: &ComplexMatrix) -> f64 {
    op_norm(a)
}
