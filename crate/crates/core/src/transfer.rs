//! Transfer functions, characteristic functions and the class `S^qs`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::opcore::{
    c, defect_operator, hermitian_eigen, identity, min_eigenvalue, op_norm, pinv, psd_sqrt,
    range_basis, require_square, solve_checked, zeros, ComplexMatrix, ComplexVector, Tolerances,
    C64, ONE,
};
use crate::param::{ContractionParams, PqsParams};
use crate::sysmodel::PartitionedContraction;

/// `Θ(λ) = D + λC(I − λA)^{-1}B`.
pub fn theta_eval(sys: &PartitionedContraction, lambda: C64, tol: &Tolerances) -> Result<ComplexMatrix> {
    let n = sys.state_dim();
    if n == 0 {
        return Ok(sys.d());
    }
    let resolvent_b = solve_checked(identity(n) - sys.a() * lambda, &sys.b(), lambda, tol)?;
    Ok(sys.d() + sys.c() * resolvent_b * lambda)
}

/// Samples `Θ` at `points`, returning `(λ, Θ(λ))` pairs or the first error.
pub fn theta_samples(sys: &PartitionedContraction, points: &[C64], tol: &Tolerances) -> Result<Vec<(C64, ComplexMatrix)>> {
    points
        .iter()
        .map(|&z| theta_eval(sys, z, tol).map(|v| (z, v)))
        .collect()
}

/// Characteristic function `Φ_A(λ) : 𝔇_A → 𝔇_{A*}` of a contraction,
/// in the orthonormal defect-range bases.
#[derive(Debug, Clone)]
pub struct CharacteristicFunction {
    pub a: ComplexMatrix,
    pub da: ComplexMatrix,
    pub da_adj: ComplexMatrix,
    pub basis_da: ComplexMatrix,
    pub basis_da_adj: ComplexMatrix,
    tol: Tolerances,
}

impl CharacteristicFunction {
    pub fn new(a: &ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        require_square(a)?;
        let da = defect_operator(a, tol)?;
        let da_adj = defect_operator(&a.adjoint(), tol)?;
        Ok(Self {
            basis_da: range_basis(&da, tol).basis,
            basis_da_adj: range_basis(&da_adj, tol).basis,
            a: a.clone(),
            da,
            da_adj,
            tol: *tol,
        })
    }

    fn resolvent_adj(&self, lambda: C64) -> Result<ComplexMatrix> {
        let n = self.a.nrows();
        solve_checked(identity(n) - self.a.adjoint() * lambda, &identity(n), lambda, &self.tol)
    }

    pub fn eval(&self, lambda: C64) -> Result<ComplexMatrix> {
        let inner = -&self.a + &self.da_adj * self.resolvent_adj(lambda)? * &self.da * lambda;
        Ok(self.basis_da_adj.adjoint() * inner * &self.basis_da)
    }

    /// `‖(I − Φ*Φ) − (1 − |λ|²) D_A(I − λ̄A)^{-1}(I − λA*)^{-1}D_A‖` on `𝔇_A`.
    pub fn chardef_residual(&self, lambda: C64) -> Result<f64> {
        let phi = self.eval(lambda)?;
        let r = self.resolvent_adj(lambda)?;
        let weight = 1.0 - lambda.norm_sqr();
        let rhs = self.basis_da.adjoint() * &self.da * r.adjoint() * &r * &self.da * &self.basis_da * c(weight, 0.0);
        let lhs = identity(phi.ncols()) - phi.adjoint() * &phi;
        Ok(op_norm(&(lhs - rhs)))
    }

    /// `‖(I − ΦΦ*) − (1 − |λ|²) D_{A*}(I − λA*)^{-1}(I − λ̄A)^{-1}D_{A*}‖` on `𝔇_{A*}`.
    pub fn chardef_adj_residual(&self, lambda: C64) -> Result<f64> {
        let phi = self.eval(lambda)?;
        let r = self.resolvent_adj(lambda)?;
        let weight = 1.0 - lambda.norm_sqr();
        let rhs = self.basis_da_adj.adjoint() * &self.da_adj * &r * r.adjoint() * &self.da_adj * &self.basis_da_adj
            * c(weight, 0.0);
        let lhs = identity(phi.nrows()) - &phi * phi.adjoint();
        Ok(op_norm(&(lhs - rhs)))
    }
}

pub fn char_func(a: &ComplexMatrix, lambda: C64, tol: &Tolerances) -> Result<ComplexMatrix> {
    CharacteristicFunction::new(a, tol)?.eval(lambda)
}

/// `Φ_{A*}(λ) : 𝔇_{A*} → 𝔇_A` in the bases stored with `p`.
fn phi_adj_in(p: &ContractionParams, lambda: C64) -> Result<ComplexMatrix> {
    let n = p.a.nrows();
    let tol = p.tolerances();
    let r = solve_checked(identity(n) - &p.a * lambda, &identity(n), lambda, tol)?;
    let inner = -p.a.adjoint() + &p.da * r * &p.da_adj * lambda;
    Ok(p.basis_da.adjoint() * inner * &p.basis_da_adj)
}

/// `Θ(λ) = KΦ_{A*}(λ)M + D_{K*}XD_M`.
pub fn theta_factored(p: &ContractionParams, lambda: C64) -> Result<ComplexMatrix> {
    let phi = phi_adj_in(p, lambda)?;
    Ok(&p.k * phi * &p.m + &p.dk_adj * p.x_ambient() * &p.dm)
}

/// The defect functions `φ(λ) : 𝔐 → 𝔇_M ⊕ 𝔇_K` and
/// `ψ(λ) : 𝔇_{K*} ⊕ 𝔇_{M*} → 𝔑`, in the coordinates of `p`.
pub fn defect_functions(p: &ContractionParams, lambda: C64) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let phi_adj = phi_adj_in(p, lambda)?;
    let x_amb = p.x_ambient();
    let top = -(p.dx()? * p.basis_dm.adjoint() * &p.dm);
    let bottom = p.dk()? * &phi_adj * &p.m - p.k.adjoint() * &x_amb * &p.dm;
    let left = &p.dk_adj * &p.basis_dk_adj * p.dx_adj()?;
    let right = &p.k * &phi_adj * p.dm_adj()? - &p.dk_adj * &x_amb * p.m.adjoint();
    Ok((
        crate::opcore::vstack(&[&top, &bottom]),
        crate::opcore::hstack(&[&left, &right]),
    ))
}

/// Residuals of the two defect-function identities at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefectResiduals {
    /// `|‖D_Θ h‖² − ‖D_{Φ_{A*}} M h‖² − ‖φ h‖²|`.
    pub input: f64,
    /// `|‖D_{Θ*} g‖² − ‖D_{Φ_A(λ̄)} K* g‖² − ‖ψ* g‖²|`.
    pub output: f64,
}

pub fn defect_identities(p: &ContractionParams, lambda: C64, h: &ComplexVector, g: &ComplexVector) -> Result<DefectResiduals> {
    if h.len() != p.m.ncols() || g.len() != p.k.nrows() {
        return Err(Error::DimensionMismatch("h must live in 𝔐 and g in 𝔑".into()));
    }
    let theta = theta_factored(p, lambda)?;
    let phi_adj = phi_adj_in(p, lambda)?;
    let dk = p.dk()?;
    let dx = p.dx()?;

    // Input side: φ(λ)h = (−D_X D_M h, D_K Φ_{A*} M h − K* X D_M h).
    let dmh = &p.dm * h;
    let mh = &p.m * h;
    let lhs = quad(&(identity(theta.ncols()) - theta.adjoint() * &theta), h);
    let phi_defect = quad(&(identity(phi_adj.ncols()) - phi_adj.adjoint() * &phi_adj), &mh);
    let top = -(&dx * (p.basis_dm.adjoint() * &dmh));
    let bottom = &dk * &phi_adj * &mh - p.k.adjoint() * (p.x_ambient() * &dmh);
    let input = (lhs - phi_defect - top.norm_squared() - bottom.norm_squared()).abs();

    // Output side: ψ*(λ)g = (D_{X*} D_{K*} g, D_{M*} Φ_{A*}* K* g − M X* D_{K*} g),
    // and Φ_A(λ̄) = Φ_{A*}(λ)*.
    let dx_adj = p.dx_adj()?;
    let dm_adj = p.dm_adj()?;
    let dkg = &p.dk_adj * g;
    let kg = p.k.adjoint() * g;
    let lhs = quad(&(identity(theta.nrows()) - &theta * theta.adjoint()), g);
    let phi_a = phi_adj.adjoint();
    let phi_defect = quad(&(identity(phi_a.ncols()) - phi_a.adjoint() * &phi_a), &kg);
    let top = &dx_adj * (p.basis_dk_adj.adjoint() * &dkg);
    let bottom = &dm_adj * phi_adj.adjoint() * &kg - &p.m * (p.x_ambient().adjoint() * &dkg);
    let output = (lhs - phi_defect - top.norm_squared() - bottom.norm_squared()).abs();
    Ok(DefectResiduals { input, output })
}

fn quad(m: &ComplexMatrix, v: &ComplexVector) -> f64 {
    (v.adjoint() * m * v)[(0, 0)].re
}

#[derive(Debug, Clone)]
pub struct BoundaryValues {
    pub plus: ComplexMatrix,
    pub minus: ComplexMatrix,
    /// Largest deviation from the near-boundary extrapolation, when `±1`
    /// lie in the resolvent set.
    pub cross_check: Option<f64>,
}

/// `Θ(±1) = ±KK* + D_{K*}XD_{K*}` for pqs parameters.
pub fn boundary_values(p: &PqsParams) -> Result<BoundaryValues> {
    let ks = p.k_state();
    let kk = &ks * ks.adjoint();
    let base = &p.dk_adj * p.x_ambient() * &p.dk_adj;
    let plus = &kk + &base;
    let minus = -&kk + &base;
    let sys = p.assemble()?;
    let h = 1e-6;
    let mut worst: Option<f64> = None;
    for (sign, target) in [(1.0, &plus), (-1.0, &minus)] {
        let near = |s: f64| theta_eval(&sys, c(sign * (1.0 - s), 0.0), &p.tol);
        if let (Ok(v1), Ok(v2)) = (near(h), near(2.0 * h)) {
            let extrapolated = v1 * c(2.0, 0.0) - v2;
            let dev = op_norm(&(extrapolated - target));
            worst = Some(worst.map_or(dev, |w: f64| w.max(dev)));
        } else {
            worst = None;
            break;
        }
    }
    Ok(BoundaryValues {
        plus,
        minus,
        cross_check: worst,
    })
}

/// Evenly spaced circle points `r·e^{2πi(j + ½)/n}`; the half-step offset
/// keeps `±r` off the grid for even `n`.
pub fn circle_grid(n: usize, r: f64) -> Vec<C64> {
    (0..n)
        .map(|j| C64::from_polar(r, 2.0 * PI * (j as f64 + 0.5) / n as f64))
        .collect()
}

/// Points spread over the open disk of radius `r`: rings at radii
/// `r(k + ½)/rings` with offset angles.
pub fn disk_grid(n: usize, r: f64) -> Vec<C64> {
    let rings = ((n as f64).sqrt().ceil() as usize).max(1);
    let per_ring = n.div_ceil(rings);
    let mut out = Vec::with_capacity(n);
    'outer: for k in 0..rings {
        let radius = r * (k as f64 + 0.5) / rings as f64;
        for j in 0..per_ring {
            if out.len() == n {
                break 'outer;
            }
            let angle = 2.0 * PI * (j as f64 + 0.5 * (k % 2) as f64 + 0.25) / per_ring as f64;
            out.push(C64::from_polar(radius, angle));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerReport {
    pub inner: bool,
    pub coinner: bool,
    /// `max ‖I − Θ*Θ‖` over evaluated points.
    pub max_defect: f64,
    /// `max ‖I − ΘΘ*‖` over evaluated points.
    pub max_codefect: f64,
    pub evaluated: usize,
    /// Grid points where evaluation failed.
    pub skipped: Vec<C64>,
}

/// Tests `Θ(ξ)` for isometry and co-isometry on an `n`-point circle grid.
pub fn inner_test<F>(theta: F, n: usize, tol: &Tolerances) -> InnerReport
where
    F: Fn(C64) -> Result<ComplexMatrix>,
{
    let mut report = InnerReport {
        inner: false,
        coinner: false,
        max_defect: 0.0,
        max_codefect: 0.0,
        evaluated: 0,
        skipped: Vec::new(),
    };
    for xi in circle_grid(n, 1.0) {
        match theta(xi) {
            Ok(v) => {
                report.max_defect = report
                    .max_defect
                    .max(op_norm(&(identity(v.ncols()) - v.adjoint() * &v)));
                report.max_codefect = report
                    .max_codefect
                    .max(op_norm(&(identity(v.nrows()) - &v * v.adjoint())));
                report.evaluated += 1;
            }
            Err(_) => report.skipped.push(xi),
        }
    }
    report.inner = report.evaluated > 0 && report.max_defect <= tol.grid_tol;
    report.coinner = report.evaluated > 0 && report.max_codefect <= tol.grid_tol;
    report
}

pub fn inner_test_system(sys: &PartitionedContraction, n: usize, tol: &Tolerances) -> InnerReport {
    inner_test(|z| theta_eval(sys, z, tol), n, tol)
}

/// Residuals of the boundary identities that every inner (co-inner)
/// `S^qs` function satisfies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pm1Conditions {
    /// `‖P² − P‖` with `P = (Θ(1) − Θ(−1))/2`.
    pub projector: f64,
    /// `‖(Θ(1)+Θ(−1))*(Θ(1)+Θ(−1)) − 4I + 2(Θ(1)−Θ(−1))‖`.
    pub inner_identity: f64,
    /// The same with the product order reversed.
    pub coinner_identity: f64,
    pub inner_nec: bool,
    pub coinner_nec: bool,
}

pub fn inner_pm1_conditions(theta_plus: &ComplexMatrix, theta_minus: &ComplexMatrix, tol: &Tolerances) -> Result<Pm1Conditions> {
    let n = require_square(theta_plus)?;
    if theta_minus.shape() != (n, n) {
        return Err(Error::DimensionMismatch("Θ(1) and Θ(−1) have different sizes".into()));
    }
    let diff = theta_plus - theta_minus;
    let p = &diff * c(0.5, 0.0);
    let sum = theta_plus + theta_minus;
    let target = identity(n) * c(4.0, 0.0) - &diff * c(2.0, 0.0);
    let projector = op_norm(&(&p * &p - &p));
    let inner_identity = op_norm(&(sum.adjoint() * &sum - &target));
    let coinner_identity = op_norm(&(&sum * sum.adjoint() - &target));
    Ok(Pm1Conditions {
        projector,
        inner_identity,
        coinner_identity,
        inner_nec: projector <= tol.eq_tol && inner_identity <= tol.eq_tol,
        coinner_nec: projector <= tol.eq_tol && coinner_identity <= tol.eq_tol,
    })
}

/// Sufficient test for inner/co-inner: the boundary identities plus
/// isometry (co-isometry) at a single circle point `ξ ≠ ±1`.
pub fn inner_by_pm1(p: &PqsParams, xi: C64, tol: &Tolerances) -> Result<(bool, bool)> {
    if (xi.norm() - 1.0).abs() > tol.grid_tol || (xi - ONE).norm() < 1e-3 || (xi + ONE).norm() < 1e-3 {
        return Err(Error::DegenerateGrid("ξ must be on the circle and away from ±1".into()));
    }
    let bv = boundary_values(p)?;
    let cond = inner_pm1_conditions(&bv.plus, &bv.minus, tol)?;
    let v = theta_eval(&p.assemble()?, xi, tol)?;
    let iso = op_norm(&(identity(v.ncols()) - v.adjoint() * &v)) <= tol.grid_tol;
    let coiso = op_norm(&(identity(v.nrows()) - &v * v.adjoint())) <= tol.grid_tol;
    Ok((cond.inner_nec && iso, cond.coinner_nec && coiso))
}

/// One atom `(t, Σ)` of the spectral measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub t: f64,
    pub sigma: ComplexMatrix,
}

/// Spectral data `Θ(0)` and atoms of the measure `Σ` of an `S^qs`
/// function `Θ(λ) = Θ(0) + λ Σ_k (1 − t_k²)/(1 − t_k λ) Σ_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SqsFunctionData {
    pub theta0: ComplexMatrix,
    pub atoms: Vec<Atom>,
}

impl SqsFunctionData {
    pub fn dim(&self) -> usize {
        self.theta0.nrows()
    }

    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        let n = require_square(&self.theta0)?;
        crate::opcore::check_finite(&self.theta0)?;
        for (k, atom) in self.atoms.iter().enumerate() {
            if !atom.t.is_finite() || atom.t.abs() >= 1.0 {
                return Err(Error::InvalidMeasure(format!(
                    "atom {k} has t = {} outside (-1, 1)",
                    atom.t
                )));
            }
            if atom.sigma.shape() != (n, n) {
                return Err(Error::InvalidMeasure(format!(
                    "atom {k} weight is {}x{}, expected {n}x{n}",
                    atom.sigma.nrows(),
                    atom.sigma.ncols()
                )));
            }
            crate::opcore::check_finite(&atom.sigma)?;
            let scale = op_norm(&atom.sigma).max(1.0);
            if op_norm(&(&atom.sigma - atom.sigma.adjoint())) > tol.eq_tol * scale {
                return Err(Error::InvalidMeasure(format!("atom {k} weight is not Hermitian")));
            }
            let min = min_eigenvalue(&atom.sigma);
            if min < -tol.psd_tol * scale {
                return Err(Error::InvalidMeasure(format!(
                    "atom {k} weight has negative eigenvalue {min:.3e}"
                )));
            }
        }
        Ok(())
    }

    /// `Σ(1) = Σ_k Σ_k`.
    pub fn total_mass(&self) -> ComplexMatrix {
        self.atoms
            .iter()
            .fold(zeros(self.dim(), self.dim()), |acc, a| acc + &a.sigma)
    }

    /// `W(1) = Σ (1 + t_k) Σ_k`.
    pub fn w_plus(&self) -> ComplexMatrix {
        self.weighted(|t| 1.0 + t)
    }

    /// `W(−1) = −Σ (1 − t_k) Σ_k`.
    pub fn w_minus(&self) -> ComplexMatrix {
        self.weighted(|t| t - 1.0)
    }

    fn weighted(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        self.atoms
            .iter()
            .fold(zeros(self.dim(), self.dim()), |acc, a| acc + &a.sigma * c(f(a.t), 0.0))
    }

    pub fn theta(&self, lambda: C64) -> Result<ComplexMatrix> {
        Ok(&self.theta0 + w_from_data(self, lambda)?)
    }
}

/// `W(λ) = λ Σ_k (1 − t_k²)/(1 − t_k λ) Σ_k`.
pub fn w_from_data(f: &SqsFunctionData, lambda: C64) -> Result<ComplexMatrix> {
    let n = f.dim();
    let mut w = zeros(n, n);
    for atom in &f.atoms {
        let denom = ONE - lambda * atom.t;
        if denom.norm() <= 1e-14 {
            return Err(Error::PolarPoint { point: lambda });
        }
        w += &atom.sigma * (lambda * (1.0 - atom.t * atom.t) / denom);
    }
    Ok(w)
}

/// Default points for the Nevanlinna kernel check, in the upper half of the disk.
pub fn nevanlinna_grid() -> Vec<C64> {
    [(0.3, 0.4), (0.5, 1.2), (0.7, 2.0), (0.9, 2.7), (0.6, 0.9), (0.4, 2.4), (0.95, 0.2), (0.8, 1.6)]
        .iter()
        .map(|&(r, angle)| C64::from_polar(r, angle))
        .collect()
}

/// Smallest eigenvalue of the block Gram matrix
/// `[(W(λ_i) − W(λ_j)*)/(λ_i − λ̄_j)]` over points with `Im λ > 0`.
pub fn nevanlinna_kernel_min_eig<F>(w: F, points: &[C64]) -> Result<f64>
where
    F: Fn(C64) -> Result<ComplexMatrix>,
{
    if points.iter().any(|z| z.im <= 0.0) {
        return Err(Error::DegenerateGrid("kernel points must lie in the upper half-plane".into()));
    }
    let values: Vec<ComplexMatrix> = points.iter().map(|&z| w(z)).collect::<Result<_>>()?;
    let n = values.first().map(|v| v.nrows()).unwrap_or(0);
    let m = points.len();
    let mut gram = zeros(n * m, n * m);
    for i in 0..m {
        for j in 0..m {
            let denom = points[i] - points[j].conj();
            let block = (&values[i] - values[j].adjoint()) / denom;
            gram.view_mut((i * n, j * n), (n, n)).copy_from(&block);
        }
    }
    Ok(min_eigenvalue(&gram))
}

/// Outcome of the `S^qs` membership test for atomic data.
#[derive(Debug, Clone)]
pub struct SqsMembership {
    pub member: bool,
    pub w_plus: ComplexMatrix,
    pub w_minus: ComplexMatrix,
    /// Ball center `S = −(W(1) + W(−1))/2`.
    pub center: ComplexMatrix,
    /// Ball radius `R = I − (W(1) − W(−1))/2 = I − Σ(1)`.
    pub radius: ComplexMatrix,
    pub radius_min_eig: f64,
    /// `X` with `Θ(0) = S + R^{1/2} X R^{1/2}` when `R ⪰ 0`.
    pub x: Option<ComplexMatrix>,
    pub x_norm: f64,
    /// `‖S + R^{1/2} X R^{1/2} − Θ(0)‖`.
    pub reconstruction_residual: f64,
    /// `‖P_{ker R}(Θ(0) − S)P_{ker R}‖`.
    pub off_range_residual: f64,
    pub kernel_min_eig: f64,
    pub reason: Option<String>,
}

pub fn sqs_membership(f: &SqsFunctionData, tol: &Tolerances) -> Result<SqsMembership> {
    f.validate(tol)?;
    let n = f.dim();
    let w_plus = f.w_plus();
    let w_minus = f.w_minus();
    let center = -(&w_plus + &w_minus) * c(0.5, 0.0);
    let radius = identity(n) - (&w_plus - &w_minus) * c(0.5, 0.0);
    let radius_min_eig = min_eigenvalue(&radius).min(f64::MAX);
    let kernel_min_eig = nevanlinna_kernel_min_eig(|z| w_from_data(f, z), &nevanlinna_grid())?;
    let mut out = SqsMembership {
        member: false,
        w_plus,
        w_minus,
        center,
        radius,
        radius_min_eig: if n == 0 { 0.0 } else { radius_min_eig },
        x: None,
        x_norm: f64::INFINITY,
        reconstruction_residual: f64::INFINITY,
        off_range_residual: f64::INFINITY,
        kernel_min_eig,
        reason: None,
    };
    let mass_scale = op_norm(&f.total_mass()).max(1.0);
    if kernel_min_eig < -tol.psd_tol * mass_scale {
        out.reason = Some(format!("Nevanlinna kernel has eigenvalue {kernel_min_eig:.3e}"));
        return Ok(out);
    }
    if n > 0 && radius_min_eig < -tol.psd_tol {
        out.reason = Some(format!(
            "Σ(1) exceeds I: I − Σ(1) has eigenvalue {radius_min_eig:.3e}"
        ));
        return Ok(out);
    }
    let r_clamped = crate::opcore::hermitian_part(&out.radius);
    let r_half = psd_sqrt(&r_clamped, tol)?;
    let r_half_pinv = pinv(&r_half, tol);
    let offset = &f.theta0 - &out.center;
    let x = &r_half_pinv * &offset * &r_half_pinv;
    let rebuilt = &out.center + &r_half * &x * &r_half;
    let ker = crate::opcore::kernel_basis(&r_half, tol).projector();
    out.x_norm = op_norm(&x);
    out.reconstruction_residual = op_norm(&(rebuilt - &f.theta0));
    out.off_range_residual = op_norm(&(&ker * &offset * &ker));
    out.x = Some(x);
    if out.x_norm > 1.0 + tol.psd_tol {
        out.reason = Some(format!(
            "Θ(0) lies outside the operator ball: ‖X‖ = {:.6e}",
            out.x_norm
        ));
    } else if out.reconstruction_residual > tol.eq_tol {
        out.reason = Some(format!(
            "Θ(0) − S does not factor through R^(1/2): residual {:.3e}",
            out.reconstruction_residual
        ));
    } else {
        out.member = true;
    }
    Ok(out)
}

/// Spectral data of a pqs system: `Θ(0) = D` and atoms `(t_k, K P_k K*)`
/// from the eigenspaces `P_k` of `A`. Eigenvalues closer than `merge_tol`
/// are merged; atoms at `t = ±1` carry no weight and are dropped.
pub fn spectral_readout(sys: &PartitionedContraction, merge_tol: f64, tol: &Tolerances) -> Result<SqsFunctionData> {
    let p = PqsParams::from_system(sys, tol)?;
    let (values, vectors) = hermitian_eigen(&p.a);
    let ks = p.k_state();
    let mut atoms: Vec<Atom> = Vec::new();
    let mut k = 0;
    while k < values.len() {
        let mut end = k + 1;
        while end < values.len() && values[end] - values[k] <= merge_tol {
            end += 1;
        }
        let t = values[k..end].iter().sum::<f64>() / (end - k) as f64;
        let v = vectors.columns(k, end - k).into_owned();
        let kv = &ks * &v;
        let sigma = crate::opcore::hermitian_part(&(&kv * kv.adjoint()));
        if t.abs() < 1.0 - tol.rank_tol && op_norm(&sigma) > tol.rank_tol {
            atoms.push(Atom { t, sigma });
        }
        k = end;
    }
    Ok(SqsFunctionData {
        theta0: sys.d(),
        atoms,
    })
}
