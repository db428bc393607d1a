//! The `(A, M, K, X)` parametrization of block contractions
//! `T = [[−KA*M + D_{K*}XD_M, KD_A], [D_{A*}M, A]]`.
//!
//! `M`, `K` and `X` are stored in coordinates of orthonormal bases of the
//! defect spaces they map between:
//! `M : 𝔐 → 𝔇_{A*}`, `K : 𝔇_A → 𝔑`, `X : 𝔇_M → 𝔇_{K*}`.

use crate::error::{Error, Result};
use crate::opcore::{
    defect_operator, identity, op_norm, pinv, range_basis, require_square, ComplexMatrix,
    ComplexVector, Tolerances,
};
use crate::sysmodel::PartitionedContraction;

/// Verification residuals of a parameter extraction.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ParamDiagnostics {
    /// `‖B − D_{A*}M‖`.
    pub b_residual: f64,
    /// `‖C − K D_A‖`.
    pub c_residual: f64,
    /// `‖D − (−KA*M + D_{K*}XD_M)‖`.
    pub d_residual: f64,
    pub m_norm: f64,
    pub k_norm: f64,
    pub x_norm: f64,
}

impl ParamDiagnostics {
    pub fn max_residual(&self) -> f64 {
        self.b_residual.max(self.c_residual).max(self.d_residual)
    }
}

#[derive(Debug, Clone)]
pub struct ContractionParams {
    pub a: ComplexMatrix,
    /// `r_{A*} × in`.
    pub m: ComplexMatrix,
    /// `out × r_A`.
    pub k: ComplexMatrix,
    /// `q × p` with `q = dim 𝔇_{K*}`, `p = dim 𝔇_M`.
    pub x: ComplexMatrix,
    pub da: ComplexMatrix,
    pub da_adj: ComplexMatrix,
    pub dm: ComplexMatrix,
    pub dk_adj: ComplexMatrix,
    pub basis_da: ComplexMatrix,
    pub basis_da_adj: ComplexMatrix,
    pub basis_dm: ComplexMatrix,
    pub basis_dk_adj: ComplexMatrix,
    pub diagnostics: ParamDiagnostics,
    pub(crate) tol: Tolerances,
}

fn check_contractive(name: &'static str, m: &ComplexMatrix, slack: f64) -> Result<f64> {
    let norm = op_norm(m);
    if norm > 1.0 + slack {
        return Err(Error::ParameterNotContractive { name, norm });
    }
    Ok(norm)
}

impl ContractionParams {
    /// Builds parameters from `A`, `M`, `K` and `X` given in the coordinates
    /// of the bases this crate computes for the defect spaces (see
    /// [`ContractionParams::defect_bases`]).
    pub fn new(a: ComplexMatrix, m: ComplexMatrix, k: ComplexMatrix, x: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        require_square(&a)?;
        let slack = tol.rank_tol;
        check_contractive("A", &a, slack)?;
        let da = defect_operator(&a, tol)?;
        let da_adj = defect_operator(&a.adjoint(), tol)?;
        let basis_da = range_basis(&da, tol).basis;
        let basis_da_adj = range_basis(&da_adj, tol).basis;
        if m.nrows() != basis_da_adj.ncols() || k.ncols() != basis_da.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "M must have {} rows and K {} columns (defect dimensions)",
                basis_da_adj.ncols(),
                basis_da.ncols()
            )));
        }
        let m_norm = check_contractive("M", &m, slack)?;
        let k_norm = check_contractive("K", &k, slack)?;
        let dm = defect_operator(&m, tol)?;
        let dk_adj = defect_operator(&k.adjoint(), tol)?;
        let basis_dm = range_basis(&dm, tol).basis;
        let basis_dk_adj = range_basis(&dk_adj, tol).basis;
        if x.shape() != (basis_dk_adj.ncols(), basis_dm.ncols()) {
            return Err(Error::DimensionMismatch(format!(
                "X must be {}x{} (dim 𝔇_K* x dim 𝔇_M), got {}x{}",
                basis_dk_adj.ncols(),
                basis_dm.ncols(),
                x.nrows(),
                x.ncols()
            )));
        }
        let x_norm = check_contractive("X", &x, slack)?;
        Ok(Self {
            a,
            m,
            k,
            x,
            da,
            da_adj,
            dm,
            dk_adj,
            basis_da,
            basis_da_adj,
            basis_dm,
            basis_dk_adj,
            diagnostics: ParamDiagnostics {
                m_norm,
                k_norm,
                x_norm,
                ..Default::default()
            },
            tol: *tol,
        })
    }

    /// Orthonormal bases of `𝔇_A` and `𝔇_{A*}` used for `K` and `M`.
    pub fn defect_bases(a: &ComplexMatrix, tol: &Tolerances) -> Result<(ComplexMatrix, ComplexMatrix)> {
        let da = defect_operator(a, tol)?;
        let da_adj = defect_operator(&a.adjoint(), tol)?;
        Ok((range_basis(&da, tol).basis, range_basis(&da_adj, tol).basis))
    }

    /// Recovers the unique parameters of a passive system.
    pub fn parametrize(sys: &PartitionedContraction, tol: &Tolerances) -> Result<Self> {
        let norm = op_norm(sys.t());
        if norm > 1.0 + tol.rank_tol {
            return Err(Error::NotAContraction { norm });
        }
        let a = sys.a();
        let (b, c, d) = (sys.b(), sys.c(), sys.d());
        let da = defect_operator(&a, tol)?;
        let da_adj = defect_operator(&a.adjoint(), tol)?;
        let basis_da = range_basis(&da, tol).basis;
        let basis_da_adj = range_basis(&da_adj, tol).basis;

        let m_state = pinv(&da_adj, tol) * &b;
        let k_state = &c * pinv(&da, tol);
        let m = basis_da_adj.adjoint() * &m_state;
        let k = &k_state * &basis_da;
        let slack = tol.psd_tol;
        let m_norm = check_contractive("M", &m, slack)?;
        let k_norm = check_contractive("K", &k, slack)?;

        let dm = defect_operator(&m, tol)?;
        let dk_adj = defect_operator(&k.adjoint(), tol)?;
        let basis_dm = range_basis(&dm, tol).basis;
        let basis_dk_adj = range_basis(&dk_adj, tol).basis;
        let core = &d + &k_state * a.adjoint() * &m_state;
        let x_amb = pinv(&dk_adj, tol) * core * pinv(&dm, tol);
        let x = basis_dk_adj.adjoint() * x_amb * &basis_dm;
        let x_norm = check_contractive("X", &x, slack)?;

        let mut params = Self {
            a,
            m,
            k,
            x,
            da,
            da_adj,
            dm,
            dk_adj,
            basis_da,
            basis_da_adj,
            basis_dm,
            basis_dk_adj,
            diagnostics: ParamDiagnostics {
                m_norm,
                k_norm,
                x_norm,
                ..Default::default()
            },
            tol: *tol,
        };
        let (b2, c2, d2) = params.blocks();
        params.diagnostics.b_residual = op_norm(&(b - b2));
        params.diagnostics.c_residual = op_norm(&(c - c2));
        params.diagnostics.d_residual = op_norm(&(d - d2));
        Ok(params)
    }

    /// `M` as a map into the state space.
    pub fn m_state(&self) -> ComplexMatrix {
        &self.basis_da_adj * &self.m
    }

    /// `K P_{𝔇_A}` as a map from the state space.
    pub fn k_state(&self) -> ComplexMatrix {
        &self.k * self.basis_da.adjoint()
    }

    pub fn k_star_state(&self) -> ComplexMatrix {
        &self.basis_da * self.k.adjoint()
    }

    /// `X` as a map `𝔐 → 𝔑` vanishing off `𝔇_M`.
    pub fn x_ambient(&self) -> ComplexMatrix {
        &self.basis_dk_adj * &self.x * self.basis_dm.adjoint()
    }

    fn blocks(&self) -> (ComplexMatrix, ComplexMatrix, ComplexMatrix) {
        let m_state = self.m_state();
        let k_state = self.k_state();
        let b = &self.da_adj * &m_state;
        let c = &k_state * &self.da;
        let d = -(&k_state * self.a.adjoint() * &m_state) + &self.dk_adj * self.x_ambient() * &self.dm;
        (b, c, d)
    }

    pub fn assemble(&self) -> Result<PartitionedContraction> {
        let (b, c, d) = self.blocks();
        PartitionedContraction::from_blocks(&self.a, &b, &c, &d)
    }

    /// `D_K` on `𝔇_A`, in coordinates.
    pub fn dk(&self) -> Result<ComplexMatrix> {
        defect_operator(&self.k, &self.tol)
    }

    /// `D_X` on `𝔇_M`, in coordinates.
    pub fn dx(&self) -> Result<ComplexMatrix> {
        defect_operator(&self.x, &self.tol)
    }

    /// `D_{X*}` on `𝔇_{K*}`, in coordinates.
    pub fn dx_adj(&self) -> Result<ComplexMatrix> {
        defect_operator(&self.x.adjoint(), &self.tol)
    }

    /// `D_{M*}` on `𝔇_{A*}`, in coordinates.
    pub fn dm_adj(&self) -> Result<ComplexMatrix> {
        defect_operator(&self.m.adjoint(), &self.tol)
    }

    /// Both sides of the energy balance: `‖(h, f)‖² − ‖T(h, f)‖²` and
    /// `‖D_K(D_A f − A*Mh) − K*XD_M h‖² + ‖D_X D_M h‖²`.
    pub fn defect_balance(&self, h: &ComplexVector, f: &ComplexVector) -> Result<(f64, f64)> {
        let in_dim = self.m.ncols();
        let state = self.a.ncols();
        if h.len() != in_dim || f.len() != state {
            return Err(Error::DimensionMismatch(format!(
                "expected h of length {in_dim} and f of length {state}"
            )));
        }
        let t = self.assemble()?;
        let stacked = ComplexVector::from_iterator(in_dim + state, h.iter().chain(f.iter()).copied());
        let lhs = stacked.norm_squared() - (t.t() * &stacked).norm_squared();

        let qa = &self.basis_da;
        let dmh = &self.dm * h;
        let inner = qa.adjoint() * (&self.da * f - self.a.adjoint() * (self.m_state() * h));
        let kxdm = self.k.adjoint() * (self.x_ambient() * &dmh);
        let first = self.dk()? * inner - kxdm;
        let second = self.dx()? * (self.basis_dm.adjoint() * &dmh);
        Ok((lhs, first.norm_squared() + second.norm_squared()))
    }

    /// Isometry and co-isometry of the assembled operator from the parameters alone.
    pub fn isometry_conditions(&self) -> Result<(bool, bool)> {
        let eq = self.tol.eq_tol;
        let dx_dm = self.dx()? * self.basis_dm.adjoint() * &self.dm;
        let dk_da = self.dk()? * self.basis_da.adjoint() * &self.da;
        let dxa_dka = self.dx_adj()? * self.basis_dk_adj.adjoint() * &self.dk_adj;
        let dma_daa = self.dm_adj()? * self.basis_da_adj.adjoint() * &self.da_adj;
        let iso = op_norm(&dx_dm) <= eq && op_norm(&dk_da) <= eq;
        let coiso = op_norm(&dxa_dka) <= eq && op_norm(&dma_daa) <= eq;
        Ok((iso, coiso))
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }
}

/// Parameters of a pqs system in the form
/// `T = [[−KAK* + D_{K*}XD_{K*}, KD_A], [D_AK*, A]]` with `A = A*`.
#[derive(Debug, Clone)]
pub struct PqsParams {
    pub a: ComplexMatrix,
    /// `out × r_A`, in the basis of `𝔇_A`.
    pub k: ComplexMatrix,
    /// `q × q`, in the basis of `𝔇_{K*}`.
    pub x: ComplexMatrix,
    pub da: ComplexMatrix,
    pub basis_da: ComplexMatrix,
    pub dk_adj: ComplexMatrix,
    pub basis_dk_adj: ComplexMatrix,
    /// Largest block residual of the extraction.
    pub residual: f64,
    pub(crate) tol: Tolerances,
}

impl PqsParams {
    pub fn new(a: ComplexMatrix, k: ComplexMatrix, x: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        require_square(&a)?;
        if op_norm(&(&a - a.adjoint())) > tol.eq_tol {
            return Err(Error::NotPqs("main operator is not selfadjoint".into()));
        }
        let a = crate::opcore::hermitian_part(&a);
        check_contractive("A", &a, tol.rank_tol)?;
        let da = defect_operator(&a, tol)?;
        let basis_da = range_basis(&da, tol).basis;
        if k.ncols() != basis_da.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "K must have {} columns (dim 𝔇_A)",
                basis_da.ncols()
            )));
        }
        check_contractive("K", &k, tol.rank_tol)?;
        let dk_adj = defect_operator(&k.adjoint(), tol)?;
        let basis_dk_adj = range_basis(&dk_adj, tol).basis;
        let q = basis_dk_adj.ncols();
        if x.shape() != (q, q) {
            return Err(Error::DimensionMismatch(format!("X must be {q}x{q} (dim 𝔇_K*)")));
        }
        check_contractive("X", &x, tol.rank_tol)?;
        Ok(Self {
            a,
            k,
            x,
            da,
            basis_da,
            dk_adj,
            basis_dk_adj,
            residual: 0.0,
            tol: *tol,
        })
    }

    /// Like [`PqsParams::new`], with `K` and `X` given as ambient matrices
    /// (`K : ℌ → 𝔑`, `X : 𝔑 → 𝔑`); they are compressed to the defect spaces.
    pub fn from_ambient(a: ComplexMatrix, k_state: &ComplexMatrix, x_amb: &ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let da = defect_operator(&a, tol)?;
        let basis_da = range_basis(&da, tol).basis;
        let k = k_state * &basis_da;
        let dk_adj = defect_operator(&k.adjoint(), tol)?;
        let basis_dk_adj = range_basis(&dk_adj, tol).basis;
        let x = basis_dk_adj.adjoint() * x_amb * &basis_dk_adj;
        Self::new(a, k, x, tol)
    }

    pub fn from_system(sys: &PartitionedContraction, tol: &Tolerances) -> Result<Self> {
        sys.require_pqs(tol)?;
        let a = crate::opcore::hermitian_part(&sys.a());
        let (b, d) = (sys.b(), sys.d());
        let c = b.adjoint();
        let da = defect_operator(&a, tol)?;
        let basis_da = range_basis(&da, tol).basis;
        let k_state = &c * pinv(&da, tol);
        let k = &k_state * &basis_da;
        check_contractive("K", &k, tol.psd_tol)?;
        let dk_adj = defect_operator(&k.adjoint(), tol)?;
        let basis_dk_adj = range_basis(&dk_adj, tol).basis;
        let core = &d + &k_state * &a * k_state.adjoint();
        let pinv_dk = pinv(&dk_adj, tol);
        let x = basis_dk_adj.adjoint() * &pinv_dk * core * &pinv_dk * &basis_dk_adj;
        check_contractive("X", &x, tol.psd_tol)?;
        let mut p = Self {
            a,
            k,
            x,
            da,
            basis_da,
            dk_adj,
            basis_dk_adj,
            residual: 0.0,
            tol: *tol,
        };
        let rebuilt = p.assemble()?;
        p.residual = op_norm(&(rebuilt.t() - sys.t()));
        Ok(p)
    }

    pub fn k_state(&self) -> ComplexMatrix {
        &self.k * self.basis_da.adjoint()
    }

    /// `K*` as a map `𝔑 → ℌ`.
    pub fn k_star_state(&self) -> ComplexMatrix {
        &self.basis_da * self.k.adjoint()
    }

    pub fn x_ambient(&self) -> ComplexMatrix {
        &self.basis_dk_adj * &self.x * self.basis_dk_adj.adjoint()
    }

    pub fn io_dim(&self) -> usize {
        self.k.nrows()
    }

    /// `Θ(0) = −KAK* + D_{K*}XD_{K*}`.
    pub fn theta0(&self) -> ComplexMatrix {
        let ks = self.k_state();
        -(&ks * &self.a * ks.adjoint()) + &self.dk_adj * self.x_ambient() * &self.dk_adj
    }

    pub fn assemble(&self) -> Result<PartitionedContraction> {
        let b = &self.da * self.k_star_state();
        PartitionedContraction::from_blocks(&self.a, &b, &b.adjoint(), &self.theta0())
    }

    /// The same parameters in the general form, with `M = K*` and `𝔇_M = 𝔇_{K*}`.
    pub fn to_general(&self) -> Result<ContractionParams> {
        let m = self.k.adjoint();
        let m_norm = op_norm(&m);
        Ok(ContractionParams {
            a: self.a.clone(),
            m,
            k: self.k.clone(),
            x: self.x.clone(),
            da: self.da.clone(),
            da_adj: self.da.clone(),
            dm: self.dk_adj.clone(),
            dk_adj: self.dk_adj.clone(),
            basis_da: self.basis_da.clone(),
            basis_da_adj: self.basis_da.clone(),
            basis_dm: self.basis_dk_adj.clone(),
            basis_dk_adj: self.basis_dk_adj.clone(),
            diagnostics: ParamDiagnostics {
                m_norm,
                k_norm: m_norm,
                x_norm: op_norm(&self.x),
                ..Default::default()
            },
            tol: self.tol,
        })
    }

    /// `K*K` restricted to `𝔇_A`, i.e. `K` is isometric when this is `I`.
    pub fn k_gram(&self) -> ComplexMatrix {
        self.k.adjoint() * &self.k
    }

    pub fn k_isometry_residual(&self) -> f64 {
        op_norm(&(self.k_gram() - identity(self.k.ncols())))
    }
}
