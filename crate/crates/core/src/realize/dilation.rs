//! The explicit bi-inner pqs dilation of a pqs transfer function.
//!
//! With `𝔙 = 𝔑 ⊕ 𝔇_K ⊕ 𝔇_{K*}` the dilation keeps the state operator `A`
//! and uses `B = D_A(K*, D_K, 0)`, `C = B*` and `D = 𝚯(0)`.

use crate::error::Result;
use crate::opcore::{
    block2, defect_operator, hstack, identity, min_eigenvalue, op_norm, psd_sqrt, range_basis,
    solve_shifted, vstack, zeros, ComplexMatrix, Tolerances, C64,
};
use crate::param::PqsParams;
use crate::sysmodel::PartitionedContraction;
use crate::transfer::{circle_grid, disk_grid, nevanlinna_grid, theta_eval};

/// Block functions of the dilation together with the assembled system.
#[derive(Debug, Clone)]
pub struct DilationBlocks {
    pub system: PartitionedContraction,
    pub io_dim: usize,
    pub dk_dim: usize,
    pub dk_adj_dim: usize,
    // Coordinates: `A`, `D_A` and `K` in the basis of 𝔇_A.
    a: ComplexMatrix,
    da: ComplexMatrix,
    k: ComplexMatrix,
    dk: ComplexMatrix,
    basis_dk: ComplexMatrix,
    dk_adj: ComplexMatrix,
    basis_dk_adj: ComplexMatrix,
    x: ComplexMatrix,
    x_amb: ComplexMatrix,
    dx: ComplexMatrix,
    dx_adj_amb: ComplexMatrix,
    tol: Tolerances,
}

impl DilationBlocks {
    /// `Φ_A(λ) = −A + λD_A(I − λA)^{-1}D_A` on 𝔇_A.
    fn phi(&self, lambda: C64) -> Result<ComplexMatrix> {
        let inner = solve_shifted(&self.a, lambda, &self.da, &self.tol)?;
        Ok(-&self.a + &self.da * inner * lambda)
    }

    pub fn theta(&self, lambda: C64) -> Result<ComplexMatrix> {
        let phi = self.phi(lambda)?;
        Ok(&self.k * phi * self.k.adjoint() + &self.dk_adj * &self.x_amb * &self.dk_adj)
    }

    /// `Θ₁₂(λ) = (KΦ_A D_K − D_{K*}XK, D_{K*}D_{X*}) : 𝔇_K ⊕ 𝔇_{K*} → 𝔑`.
    pub fn theta12(&self, lambda: C64) -> Result<ComplexMatrix> {
        let phi = self.phi(lambda)?;
        let first = (&self.k * phi * &self.dk - &self.dk_adj * &self.x_amb * &self.k) * &self.basis_dk;
        let second = &self.dk_adj * &self.dx_adj_amb * &self.basis_dk_adj;
        Ok(hstack(&[&first, &second]))
    }

    /// `Θ₂₁(λ) = (D_KΦ_A K* − K*XD_{K*}; −D_X D_{K*}) : 𝔑 → 𝔇_K ⊕ 𝔇_{K*}`.
    pub fn theta21(&self, lambda: C64) -> Result<ComplexMatrix> {
        let phi = self.phi(lambda)?;
        let first = self.basis_dk.adjoint()
            * (&self.dk * phi * self.k.adjoint() - self.k.adjoint() * &self.x_amb * &self.dk_adj);
        let second = -(&self.dx * self.basis_dk_adj.adjoint() * &self.dk_adj);
        Ok(vstack(&[&first, &second]))
    }

    /// `Θ₂₂(λ) = [[K*XK + D_KΦ_A D_K, −K*D_{X*}], [D_X K, X*]]`.
    pub fn theta22(&self, lambda: C64) -> Result<ComplexMatrix> {
        let phi = self.phi(lambda)?;
        let qk = &self.basis_dk;
        let qka = &self.basis_dk_adj;
        let tl = qk.adjoint() * (self.k.adjoint() * &self.x_amb * &self.k + &self.dk * phi * &self.dk) * qk;
        let tr = -(qk.adjoint() * self.k.adjoint() * &self.dx_adj_amb * qka);
        let bl = &self.dx * qka.adjoint() * &self.k * qk;
        Ok(block2(&tl, &tr, &bl, &self.x.adjoint()))
    }

    /// `𝚯(λ) = [[Θ, Θ₁₂], [Θ₂₁, Θ₂₂]]`.
    pub fn bold(&self, lambda: C64) -> Result<ComplexMatrix> {
        Ok(block2(&self.theta(lambda)?, &self.theta12(lambda)?, &self.theta21(lambda)?, &self.theta22(lambda)?))
    }

    /// The kernel `C(I − λ̄A)^{-1}(I − λA)^{-1}B` of the dilation, which
    /// equals `(W(λ) − W(λ)*)/(λ − λ̄)` for `W = 𝚯 − 𝚯(0)`.
    pub fn kernel(&self, lambda: C64) -> Result<ComplexMatrix> {
        let a = self.system.a();
        let right = solve_shifted(&a, lambda, &self.system.b(), &self.tol)?;
        let both = solve_shifted(&a, lambda.conj(), &right, &self.tol)?;
        Ok(self.system.c() * both)
    }
}

/// Checks on the assembled dilation.
#[derive(Debug, Clone, PartialEq)]
pub struct DilationReport {
    /// `max(‖T*T − I‖, ‖TT* − I‖)`.
    pub t_unitarity: f64,
    pub quasi_selfadjoint: bool,
    pub conservative: bool,
    pub minimal: bool,
    /// Largest unitarity defect of `𝚯(ξ)` on 16 circle points.
    pub circle_unitarity: f64,
    /// `max ‖𝚯(λ)_{𝔑𝔑} − Θ(λ)‖` on a disk grid.
    pub top_left_deviation: f64,
    /// `max ‖𝚯_system(λ) − 𝚯_blocks(λ)‖` on a disk grid.
    pub block_deviation: f64,
    /// Deviation of the kernel formula from the difference quotient.
    pub kernel_deviation: f64,
    pub kernel_min_eig: f64,
}

pub fn biinner_dilation(sys: &PartitionedContraction, tol: &Tolerances) -> Result<(DilationBlocks, DilationReport)> {
    let p = PqsParams::from_system(sys, tol)?;
    let qa = &p.basis_da;
    let a = qa.adjoint() * &p.a * qa;
    let da = qa.adjoint() * &p.da * qa;
    let r = qa.ncols();
    let dk = psd_sqrt(&(identity(r) - p.k.adjoint() * &p.k), tol)?;
    let basis_dk = range_basis(&dk, tol).basis;
    let dx = defect_operator(&p.x, tol)?;
    let dx_adj = defect_operator(&p.x.adjoint(), tol)?;
    let qka = &p.basis_dk_adj;
    let x_amb = p.x_ambient();
    let dx_adj_amb = qka * &dx_adj * qka.adjoint();
    let n = p.io_dim();
    let (s, q) = (basis_dk.ncols(), qka.ncols());

    let b_in = hstack(&[&p.k.adjoint(), &(&dk * &basis_dk), &zeros(r, q)]);
    let b = &p.da * qa * b_in;
    let mut blocks = DilationBlocks {
        system: PartitionedContraction::new(zeros(0, 0), 0, 0, 0)?,
        io_dim: n,
        dk_dim: s,
        dk_adj_dim: q,
        a,
        da,
        k: p.k.clone(),
        dk,
        basis_dk,
        dk_adj: p.dk_adj.clone(),
        basis_dk_adj: qka.clone(),
        x: p.x.clone(),
        x_amb,
        dx,
        dx_adj_amb,
        tol: *tol,
    };
    let d = blocks.bold(C64::new(0.0, 0.0))?;
    blocks.system = PartitionedContraction::from_blocks(&p.a, &b, &b.adjoint(), &d)?;
    let report = check(&blocks, sys, tol)?;
    Ok((blocks, report))
}

fn check(blocks: &DilationBlocks, sys: &PartitionedContraction, tol: &Tolerances) -> Result<DilationReport> {
    let big = &blocks.system;
    let t = big.t();
    let dim = t.nrows();
    let t_unitarity = op_norm(&(t.adjoint() * t - identity(dim))).max(op_norm(&(t * t.adjoint() - identity(dim))));
    let class = big.classify(tol);
    let minimal = big.is_minimal(tol);
    let v = big.in_dim();
    let mut circle_unitarity = 0.0f64;
    for xi in circle_grid(16, 1.0) {
        let th = blocks.bold(xi)?;
        let defect = op_norm(&(th.adjoint() * &th - identity(v))).max(op_norm(&(&th * th.adjoint() - identity(v))));
        circle_unitarity = circle_unitarity.max(defect);
    }
    let n = blocks.io_dim;
    let (mut top_left_deviation, mut block_deviation) = (0.0f64, 0.0f64);
    for lambda in disk_grid(12, 0.9) {
        let full = theta_eval(big, lambda, tol)?;
        let corner = full.view((0, 0), (n, n)).into_owned();
        top_left_deviation = top_left_deviation.max(op_norm(&(corner - theta_eval(sys, lambda, tol)?)));
        block_deviation = block_deviation.max(op_norm(&(&full - blocks.bold(lambda)?)));
    }
    let d = big.d();
    let (mut kernel_deviation, mut kernel_min_eig) = (0.0f64, f64::INFINITY);
    for lambda in nevanlinna_grid() {
        let w = theta_eval(big, lambda, tol)? - &d;
        let quotient = (&w - w.adjoint()) / (lambda - lambda.conj());
        let k = blocks.kernel(lambda)?;
        kernel_deviation = kernel_deviation.max(op_norm(&(quotient - &k)));
        kernel_min_eig = kernel_min_eig.min(min_eigenvalue(&crate::opcore::hermitian_part(&k)));
    }
    Ok(DilationReport {
        t_unitarity,
        quasi_selfadjoint: class.pqs,
        conservative: class.conservative,
        minimal,
        circle_unitarity,
        top_left_deviation,
        block_deviation,
        kernel_deviation,
        kernel_min_eig,
    })
}
