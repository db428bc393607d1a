//! Discrete-time systems `h_{k+1} = A h_k + B ξ_k`, `σ_k = C h_k + D ξ_k`
//! stored as the block operator `T = [[D, C], [B, A]]`.

use crate::error::{Error, Result};
use crate::opcore::{
    self, defect_operator, identity, kernel_basis, krylov_span, op_norm, range_basis,
    require_square, subspace_intersection, subspace_sum, vstack, zeros, ComplexMatrix,
    ComplexVector, SubspaceBasis, Tolerances,
};
use crate::param::{ContractionParams, PqsParams};

/// Block operator `T : 𝔐 ⊕ ℌ → 𝔑 ⊕ ℌ` with its partition sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionedContraction {
    t: ComplexMatrix,
    in_dim: usize,
    out_dim: usize,
    state_dim: usize,
}

impl PartitionedContraction {
    pub fn new(t: ComplexMatrix, in_dim: usize, out_dim: usize, state_dim: usize) -> Result<Self> {
        if t.nrows() != out_dim + state_dim || t.ncols() != in_dim + state_dim {
            return Err(Error::DimensionMismatch(format!(
                "T is {}x{} but partition {in_dim}/{out_dim}/{state_dim} needs {}x{}",
                t.nrows(),
                t.ncols(),
                out_dim + state_dim,
                in_dim + state_dim
            )));
        }
        opcore::check_finite(&t)?;
        Ok(Self {
            t,
            in_dim,
            out_dim,
            state_dim,
        })
    }

    pub fn from_blocks(a: &ComplexMatrix, b: &ComplexMatrix, c: &ComplexMatrix, d: &ComplexMatrix) -> Result<Self> {
        let state_dim = require_square(a)?;
        let (out_dim, in_dim) = d.shape();
        if b.shape() != (state_dim, in_dim) || c.shape() != (out_dim, state_dim) {
            return Err(Error::DimensionMismatch(format!(
                "blocks A {:?}, B {:?}, C {:?}, D {:?} do not fit together",
                a.shape(),
                b.shape(),
                c.shape(),
                d.shape()
            )));
        }
        Self::new(opcore::block2(d, c, b, a), in_dim, out_dim, state_dim)
    }

    pub fn t(&self) -> &ComplexMatrix {
        &self.t
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn a(&self) -> ComplexMatrix {
        self.t
            .view((self.out_dim, self.in_dim), (self.state_dim, self.state_dim))
            .into_owned()
    }

    pub fn b(&self) -> ComplexMatrix {
        self.t
            .view((self.out_dim, 0), (self.state_dim, self.in_dim))
            .into_owned()
    }

    pub fn c(&self) -> ComplexMatrix {
        self.t
            .view((0, self.in_dim), (self.out_dim, self.state_dim))
            .into_owned()
    }

    pub fn d(&self) -> ComplexMatrix {
        self.t.view((0, 0), (self.out_dim, self.in_dim)).into_owned()
    }

    /// Applies a state-space change of basis `A ↦ U A U*`, `B ↦ U B`, `C ↦ C U*`.
    pub fn conjugate(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.shape() != (self.state_dim, self.state_dim) {
            return Err(Error::DimensionMismatch("conjugating matrix has wrong size".into()));
        }
        let a = u * self.a() * u.adjoint();
        let b = u * self.b();
        let c = self.c() * u.adjoint();
        Self::from_blocks(&a, &b, &c, &self.d())
    }

    pub fn classify(&self, tol: &Tolerances) -> SystemClass {
        let norm = op_norm(&self.t);
        let passive = norm <= 1.0 + tol.rank_tol;
        let n_in = self.in_dim + self.state_dim;
        let n_out = self.out_dim + self.state_dim;
        let isometric = op_norm(&(self.t.adjoint() * &self.t - identity(n_in))) <= tol.eq_tol;
        let coisometric = op_norm(&(&self.t * self.t.adjoint() - identity(n_out))) <= tol.eq_tol;
        let a = self.a();
        let a_norm = op_norm(&a);
        let normal_main = a_norm == 0.0
            || op_norm(&(a.adjoint() * &a - &a * a.adjoint())) <= tol.eq_tol * a_norm * a_norm;
        let selfadjoint_main = op_norm(&(&a - a.adjoint())) <= tol.eq_tol * a_norm.max(1.0);
        let pqs = passive
            && self.in_dim == self.out_dim
            && selfadjoint_main
            && op_norm(&(self.c() - self.b().adjoint())) <= tol.eq_tol;
        SystemClass {
            passive,
            isometric,
            coisometric,
            conservative: isometric && coisometric,
            pqs,
            normal_main,
            selfadjoint_main,
        }
    }

    pub fn is_pqs(&self, tol: &Tolerances) -> bool {
        self.classify(tol).pqs
    }

    pub(crate) fn require_pqs(&self, tol: &Tolerances) -> Result<()> {
        let class = self.classify(tol);
        if class.pqs {
            return Ok(());
        }
        let reason = if !class.passive {
            "T is not a contraction"
        } else if self.in_dim != self.out_dim {
            "input and output dimensions differ"
        } else if !class.selfadjoint_main {
            "main operator is not selfadjoint"
        } else {
            "C differs from B*"
        };
        Err(Error::NotPqs(reason.into()))
    }

    /// Runs the recursion for `inputs.len()` steps from `h0`.
    pub fn simulate(&self, inputs: &[ComplexVector], h0: &ComplexVector) -> Result<Trajectory> {
        if h0.len() != self.state_dim {
            return Err(Error::DimensionMismatch(format!(
                "initial state has length {}, expected {}",
                h0.len(),
                self.state_dim
            )));
        }
        let mut states = Vec::with_capacity(inputs.len() + 1);
        let mut outputs = Vec::with_capacity(inputs.len());
        let mut energy_defects = Vec::with_capacity(inputs.len());
        let mut h = h0.clone();
        for (k, xi) in inputs.iter().enumerate() {
            if xi.len() != self.in_dim {
                return Err(Error::DimensionMismatch(format!(
                    "input {k} has length {}, expected {}",
                    xi.len(),
                    self.in_dim
                )));
            }
            let stacked = ComplexVector::from_iterator(
                self.in_dim + self.state_dim,
                xi.iter().chain(h.iter()).copied(),
            );
            let image = &self.t * stacked;
            let sigma = image.rows(0, self.out_dim).into_owned();
            let next = image.rows(self.out_dim, self.state_dim).into_owned();
            energy_defects.push(
                h.norm_squared() + xi.norm_squared() - next.norm_squared() - sigma.norm_squared(),
            );
            states.push(h);
            outputs.push(sigma);
            h = next;
        }
        states.push(h);
        Ok(Trajectory {
            states,
            outputs,
            energy_defects,
        })
    }

    /// `span{A^n B 𝔐}`.
    pub fn controllable_subspace(&self, tol: &Tolerances) -> SubspaceBasis {
        krylov_span(&self.a(), &self.b(), self.state_dim, tol).expect("partition is consistent")
    }

    /// `span{A^{*n} C* 𝔑}`.
    pub fn observable_subspace(&self, tol: &Tolerances) -> SubspaceBasis {
        krylov_span(&self.a().adjoint(), &self.c().adjoint(), self.state_dim, tol)
            .expect("partition is consistent")
    }

    pub fn structure(&self, tol: &Tolerances) -> Structure {
        let hc = self.controllable_subspace(tol);
        let ho = self.observable_subspace(tol);
        let sum = subspace_sum(&hc, &ho, tol);
        Structure {
            controllable_dim: hc.dim(),
            observable_dim: ho.dim(),
            sum_dim: sum.dim(),
            controllable: hc.is_full(),
            observable: ho.is_full(),
            simple: sum.is_full(),
            minimal: hc.is_full() && ho.is_full(),
        }
    }

    pub fn is_minimal(&self, tol: &Tolerances) -> bool {
        self.structure(tol).minimal
    }

    /// `ℌ^s = span{A^n K* 𝔑}` of a pqs system.
    pub fn pqs_krylov_subspace(&self, tol: &Tolerances) -> Result<SubspaceBasis> {
        let p = PqsParams::from_system(self, tol)?;
        krylov_span(&p.a, &p.k_star_state(), self.state_dim, tol)
    }

    /// Restriction of a pqs system to `ℌ^s`, which is minimal and has the
    /// same transfer function.
    pub fn minimal_pqs_reduction(&self, tol: &Tolerances) -> Result<PartitionedContraction> {
        let hs = self.pqs_krylov_subspace(tol)?;
        let q = hs.basis;
        let a_s = opcore::hermitian_part(&(q.adjoint() * self.a() * &q));
        let b_s = q.adjoint() * self.b();
        let c_s = b_s.adjoint();
        PartitionedContraction::from_blocks(&a_s, &b_s, &c_s, &self.d())
    }

    /// Minimality criteria for a normal main operator, cross-checked against
    /// the Krylov subspaces.
    pub fn check_minimality_normal(&self, tol: &Tolerances) -> Result<NormalMinimalityReport> {
        let a = self.a();
        if !opcore::is_normal(&a, tol)? {
            return Err(Error::NotNormal);
        }
        let p = ContractionParams::parametrize(self, tol)?;
        let n = self.state_dim;
        let hc_n = krylov_span(&a, &p.m_state(), n, tol)?;
        let ho_n = krylov_span(&a.adjoint(), &p.k_star_state(), n, tol)?;
        let da = defect_operator(&a, tol)?;
        let ker_da_trivial = kernel_basis(&da, tol).is_trivial();
        let ran_da = range_basis(&da, tol);
        let meets = |s: &SubspaceBasis| -> Result<bool> {
            Ok(subspace_intersection(&ran_da, &s.complement(), tol)?.is_trivial())
        };
        let c_cond = meets(&hc_n)?;
        let o_cond = meets(&ho_n)?;
        let s_cond = meets(&subspace_sum(&hc_n, &ho_n, tol))?;
        let direct = self.structure(tol);
        Ok(NormalMinimalityReport {
            ker_da_trivial,
            hc_n_dim: hc_n.dim(),
            ho_n_dim: ho_n.dim(),
            controllable: ker_da_trivial && c_cond,
            observable: ker_da_trivial && o_cond,
            simple: ker_da_trivial && s_cond,
            minimal: ker_da_trivial && c_cond && o_cond,
            direct,
        })
    }

    /// Strong stability and co-stability of the main operator.
    pub fn is_strongly_stable(&self, tol: &Tolerances) -> StrongStability {
        strong_stability(&self.a(), tol)
    }

    /// `span{T^n 𝔑}` is the whole space (requires `in_dim = out_dim`).
    pub fn is_n_minimal(&self, tol: &Tolerances) -> Result<bool> {
        if self.in_dim != self.out_dim {
            return Err(Error::DimensionMismatch("T is not an operator on one space".into()));
        }
        let total = self.in_dim + self.state_dim;
        let start = vstack(&[&identity(self.in_dim), &zeros(self.state_dim, self.in_dim)]);
        Ok(krylov_span(&self.t, &start, total, tol)?.is_full())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SystemClass {
    pub passive: bool,
    pub isometric: bool,
    pub coisometric: bool,
    pub conservative: bool,
    pub pqs: bool,
    pub normal_main: bool,
    pub selfadjoint_main: bool,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    /// `h_0, …, h_len`.
    pub states: Vec<ComplexVector>,
    pub outputs: Vec<ComplexVector>,
    /// `‖h_k‖² + ‖ξ_k‖² − ‖h_{k+1}‖² − ‖σ_k‖²`, nonnegative up to rounding for passive systems.
    pub energy_defects: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Structure {
    pub controllable_dim: usize,
    pub observable_dim: usize,
    pub sum_dim: usize,
    pub controllable: bool,
    pub observable: bool,
    /// The sum of the controllable and observable subspaces is everything.
    pub simple: bool,
    pub minimal: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormalMinimalityReport {
    pub ker_da_trivial: bool,
    pub hc_n_dim: usize,
    pub ho_n_dim: usize,
    pub controllable: bool,
    pub observable: bool,
    pub simple: bool,
    pub minimal: bool,
    /// The same predicates from the Krylov subspaces of `(A, B)` and `(A*, C*)`.
    pub direct: Structure,
}

impl NormalMinimalityReport {
    pub fn agrees(&self) -> bool {
        self.controllable == self.direct.controllable
            && self.observable == self.direct.observable
            && self.simple == self.direct.simple
            && self.minimal == self.direct.minimal
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StrongStability {
    pub stable: bool,
    pub costable: bool,
    /// False when the power-decay test could not decide.
    pub conclusive: bool,
}

pub fn strong_stability(a: &ComplexMatrix, tol: &Tolerances) -> StrongStability {
    let n = a.nrows();
    if n == 0 {
        return StrongStability {
            stable: true,
            costable: true,
            conclusive: true,
        };
    }
    if opcore::is_normal(a, tol).unwrap_or(false) {
        let stable = opcore::spectral_radius_normal(a) < 1.0 - tol.rank_tol;
        return StrongStability {
            stable,
            costable: stable,
            conclusive: true,
        };
    }
    // At finite dimension both classes reduce to ρ(A) < 1, and ‖A^{*n}‖ = ‖A^n‖.
    let mut power = identity(n);
    let mut last = 1.0;
    for _ in 0..8 * n {
        power = a * &power;
        last = op_norm(&power);
        if last <= tol.eq_tol {
            return StrongStability {
                stable: true,
                costable: true,
                conclusive: true,
            };
        }
    }
    if last >= 1.0 - tol.rank_tol {
        return StrongStability {
            stable: false,
            costable: false,
            conclusive: true,
        };
    }
    StrongStability {
        stable: last < 0.5,
        costable: last < 0.5,
        conclusive: false,
    }
}

/// The conservative system `[[−A*, D_A], [D_{A*}, A]]` from `𝔇_{A*} ⊕ ℌ` to
/// `𝔇_A ⊕ ℌ`, in the defect-range bases. Its transfer function is `Φ_{A*}`.
pub fn characteristic_system(a: &ComplexMatrix, tol: &Tolerances) -> Result<PartitionedContraction> {
    require_square(a)?;
    let da = defect_operator(a, tol)?;
    let da_adj = defect_operator(&a.adjoint(), tol)?;
    let qa = range_basis(&da, tol).basis;
    let qa_adj = range_basis(&da_adj, tol).basis;
    let d = -(qa.adjoint() * a.adjoint() * &qa_adj);
    let c = qa.adjoint() * &da;
    let b = &da_adj * &qa_adj;
    PartitionedContraction::from_blocks(a, &b, &c, &d)
}

/// A pqs system in the form `T = [[D, B*], [B, A]]` from its blocks.
pub fn pqs_from_blocks(a: &ComplexMatrix, b: &ComplexMatrix, d: &ComplexMatrix) -> Result<PartitionedContraction> {
    PartitionedContraction::from_blocks(a, b, &b.adjoint(), d)
}
