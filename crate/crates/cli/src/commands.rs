use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use pqsys::json::{JacobiJson, MatrixJson, SystemJson};
use pqsys::opcore::{identity, is_strict_contraction, op_norm, ComplexMatrix, Tolerances, C64};
use pqsys::qfunc::{q_asymptotic_f, q_class_kernel_check, q_eval, q_theta_roundtrip};
use pqsys::realize::{biinner_dilation, data_agreement, jacobi_from_data, jacobi_realize, realize_from_data, unitary_similarity, JacobiOutcome};
use pqsys::transfer::{char_func, sqs_membership, theta_eval};
use pqsys::{Error, PartitionedContraction};

use crate::inputs::{data_from_value, system_from_value, Grid, InputError, InputResult, Inputs};
use crate::report::RunReport;

/// Lanczos and moment coefficients must agree to this many digits.
const COEFFICIENT_AGREEMENT: f64 = 1e-7;
/// Witness points tried by the Q-class kernel check.
const WITNESS_SAMPLES: usize = 32;

pub struct Context {
    pub tol: Tolerances,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Context {
    /// Writes the artifact to `--out`, or embeds it in the report.
    fn emit(&self, report: &mut RunReport, artifact: Value) -> InputResult<()> {
        match &self.out {
            Some(path) => {
                let text = serde_json::to_string_pretty(&artifact).expect("artifact serializes");
                std::fs::write(path, text + "\n").map_err(|e| InputError(format!("{}: {e}", path.display())))?;
                report.outputs.push(path.display().to_string());
            }
            None => report.result = Some(artifact),
        }
        Ok(())
    }
}

/// Records a library failure as a failed check named after the stage.
fn failed(report: &mut RunReport, stage: &str, err: &Error) {
    let residual = match *err {
        Error::TransferMismatch { deviation, .. } | Error::MomentMismatch { deviation, .. } => deviation,
        Error::CoefficientMismatch { deviation, .. } => deviation,
        Error::NotSimilar { residual } | Error::NotCoupled { residual } | Error::NotHermitian { residual } => residual,
        Error::NotAContraction { norm } => norm - 1.0,
        _ => f64::INFINITY,
    };
    report.flag(stage, false, residual);
    report.detail("error", err.to_string());
}

fn matrix_value(m: &ComplexMatrix) -> Value {
    serde_json::to_value(MatrixJson::from(m)).expect("matrix serializes")
}

fn system_value(s: &PartitionedContraction) -> Value {
    serde_json::to_value(SystemJson::from(s)).expect("system serializes")
}

fn codim(full: usize, dim: usize) -> f64 {
    full.saturating_sub(dim) as f64
}

pub fn classify(ctx: &Context, path: &Path) -> InputResult<RunReport> {
    let mut inputs = Inputs::default();
    let sys = inputs.system(path)?;
    let mut report = RunReport::new("classify", inputs.digest(), ctx.seed);
    let tol = &ctx.tol;
    let class = sys.classify(tol);
    let t = sys.t();
    let a = sys.a();
    let n = sys.state_dim();

    report.flag("passive", class.passive, (op_norm(t) - 1.0).max(0.0));
    report.flag("isometric", class.isometric, op_norm(&(t.adjoint() * t - identity(t.ncols()))));
    report.flag("coisometric", class.coisometric, op_norm(&(t * t.adjoint() - identity(t.nrows()))));
    report.flag("conservative", class.conservative, if class.conservative { 0.0 } else { 1.0 });
    let coupling = if sys.in_dim() == sys.out_dim() { op_norm(&(sys.c() - sys.b().adjoint())) } else { f64::INFINITY };
    report.flag("pqs", class.pqs, op_norm(&(&a - a.adjoint())).max(coupling));
    report.flag("normal_main", class.normal_main, op_norm(&(a.adjoint() * &a - &a * a.adjoint())));
    report.flag("selfadjoint_main", class.selfadjoint_main, op_norm(&(&a - a.adjoint())));

    let st = sys.structure(tol);
    report.flag("controllable", st.controllable, codim(n, st.controllable_dim));
    report.flag("observable", st.observable, codim(n, st.observable_dim));
    report.flag("simple", st.simple, codim(n, st.sum_dim));
    report.flag("minimal", st.minimal, codim(n, st.controllable_dim.min(st.observable_dim)));

    let strict_t = is_strict_contraction(t, tol).unwrap_or(false);
    let strict_a = is_strict_contraction(&a, tol).unwrap_or(false);
    report.flag("strict_contraction_T", strict_t, op_norm(t));
    report.flag("strict_contraction_A", strict_a, op_norm(&a));
    let stability = sys.is_strongly_stable(tol);
    report.flag("strongly_stable", stability.stable, if stability.stable { 0.0 } else { 1.0 });
    report.flag("strongly_costable", stability.costable, if stability.costable { 0.0 } else { 1.0 });

    report.detail("in_dim", sys.in_dim());
    report.detail("out_dim", sys.out_dim());
    report.detail("state_dim", n);
    report.detail("class", json!({
        "passive": class.passive,
        "isometric": class.isometric,
        "coisometric": class.coisometric,
        "conservative": class.conservative,
        "pqs": class.pqs,
        "normal_main": class.normal_main,
        "selfadjoint_main": class.selfadjoint_main,
    }));
    report.detail("subspaces", json!({
        "controllable_dim": st.controllable_dim,
        "observable_dim": st.observable_dim,
        "sum_dim": st.sum_dim,
    }));
    report.detail("stability_conclusive", stability.conclusive);
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Function {
    /// Transfer function `Θ(λ)`.
    Theta,
    /// Characteristic function of the main operator.
    Char,
    /// Q-function `P_𝔑(T − zI)^{-1}|_𝔑`.
    Q,
}

impl Function {
    fn name(self) -> &'static str {
        match self {
            Function::Theta => "theta",
            Function::Char => "char",
            Function::Q => "q",
        }
    }
}

pub fn eval(ctx: &Context, path: &Path, function: Function, lambdas: &[C64], grid: Option<&Grid>) -> InputResult<RunReport> {
    let mut inputs = Inputs::default();
    let sys = inputs.system(path)?;
    let mut report = RunReport::new("eval", inputs.digest(), ctx.seed);
    let tol = &ctx.tol;
    let mut points: Vec<C64> = lambdas.to_vec();
    if let Some(g) = grid {
        points.extend(g.points());
    }
    if points.is_empty() {
        points.push(C64::new(0.0, 0.0));
    }

    let a = sys.a();
    let evaluate = |z: C64| match function {
        Function::Theta => theta_eval(&sys, z, tol),
        Function::Char => char_func(&a, z, tol),
        Function::Q => q_eval(&sys, z, tol),
    };
    let mut samples = Vec::with_capacity(points.len());
    let mut max_norm = 0.0f64;
    for &z in &points {
        match evaluate(z) {
            Ok(v) => {
                let norm = op_norm(&v);
                max_norm = max_norm.max(norm);
                samples.push(json!({ "point": [z.re, z.im], "value": matrix_value(&v), "norm": norm }));
            }
            Err(e) => {
                failed(&mut report, "evaluation", &e);
                return Ok(report);
            }
        }
    }
    report.detail("points", points.len());
    report.detail("max_norm", max_norm);

    match function {
        Function::Theta | Function::Char => {
            // Both are Schur-class on the closed disk for contractions.
            let inside = points.iter().all(|z| z.norm() <= 1.0 + tol.grid_tol);
            if inside {
                report.bound("schur_bound", (max_norm - 1.0).max(0.0), tol.grid_tol);
            }
        }
        Function::Q => q_checks(ctx, &sys, &points, &mut report),
    }
    ctx.emit(&mut report, json!({ "function": function.name(), "samples": samples }))?;
    Ok(report)
}

fn q_checks(ctx: &Context, sys: &PartitionedContraction, points: &[C64], report: &mut RunReport) {
    let tol = &ctx.tol;
    let outside: Vec<C64> = points.iter().copied().filter(|z| z.norm() > 1.0).collect();
    let mut relation = 0.0f64;
    for &z in &outside {
        relation = relation.max(q_theta_roundtrip(sys, z, tol).map(|r| r.max()).unwrap_or(f64::INFINITY));
    }
    if !outside.is_empty() {
        report.bound("q_theta_relation", relation, tol.eq_tol);
    }
    if !sys.is_pqs(tol) || outside.len() != points.len() {
        return;
    }
    let q = |z| q_eval(sys, z, tol);
    let check = q_asymptotic_f(q, 100.0).and_then(|f| {
        report.bound("asymptotic_f_plus_d", op_norm(&(&f + sys.d())), 1e-6);
        q_class_kernel_check(q, &f, points, WITNESS_SAMPLES, ctx.seed, tol)
    });
    match check {
        Ok(k) => {
            report.bound("kernel_normalization", k.s1_residual, tol.eq_tol);
            report.bound("kernel_s2_min_eig", (-k.s2_min_eig).max(0.0), tol.psd_tol);
            report.bound("kernel_s3_min_eig", (-k.s3_min_eig).max(0.0), tol.psd_tol);
            report.detail("witness_found", k.witness.found);
            report.detail("witness_deviation", k.witness.deviation);
        }
        Err(Error::DegenerateGrid(why)) => report.detail("kernel_check_skipped", why),
        Err(e) => failed(report, "kernel_check", &e),
    }
}

pub fn realize(ctx: &Context, path: &Path) -> InputResult<RunReport> {
    let mut inputs = Inputs::default();
    let data = inputs.data(path)?;
    let mut report = RunReport::new("realize", inputs.digest(), ctx.seed);
    let tol = &ctx.tol;
    match sqs_membership(&data, tol) {
        Ok(m) => {
            report.flag("membership", m.member, (m.x_norm - 1.0).max(0.0).max((-m.radius_min_eig).max(0.0)));
            report.detail("ball_parameter_norm", m.x_norm);
            if let Some(reason) = m.reason {
                report.detail("reason", reason);
            }
            if !m.member {
                return Ok(report);
            }
        }
        Err(e) => {
            failed(&mut report, "membership", &e);
            return Ok(report);
        }
    }
    let sys = match realize_from_data(&data, tol) {
        Ok(s) => s,
        Err(e) => {
            failed(&mut report, "realization", &e);
            return Ok(report);
        }
    };
    report.flag("pqs", sys.is_pqs(tol), 0.0);
    let st = sys.structure(tol);
    report.flag("minimal", st.minimal, codim(sys.state_dim(), st.controllable_dim.min(st.observable_dim)));
    match data_agreement(&sys, &data, 16, tol) {
        Ok(dev) => report.bound("data_agreement", dev, tol.eq_tol),
        Err(e) => failed(&mut report, "data_agreement", &e),
    }
    report.detail("state_dim", sys.state_dim());
    ctx.emit(&mut report, system_value(&sys))?;
    Ok(report)
}

pub fn jacobi(ctx: &Context, path: &Path, max_len: usize) -> InputResult<RunReport> {
    let mut inputs = Inputs::default();
    let value = inputs.value(path)?;
    let is_system = value.get("T").is_some();
    let system = if is_system { Some(system_from_value(value.clone(), path)?) } else { None };
    let data = if is_system { None } else { Some(data_from_value(value, path)?) };
    let mut report = RunReport::new("jacobi", inputs.digest(), ctx.seed);
    let tol = &ctx.tol;
    let outcome: pqsys::Result<JacobiOutcome> = match (&system, &data) {
        (Some(s), _) => jacobi_realize(s, max_len, tol),
        (_, Some(f)) => jacobi_from_data(f, max_len, tol),
        _ => unreachable!("one input kind is always parsed"),
    };
    let out = match outcome {
        Ok(o) => o,
        Err(e) => {
            failed(&mut report, "jacobi", &e);
            return Ok(report);
        }
    };
    report.bound("moment_agreement", out.moment_deviation, COEFFICIENT_AGREEMENT);
    report.bound("transfer_agreement", out.transfer_deviation, tol.grid_tol);
    report.bound("contractive", (op_norm(&out.jacobi.matrix()) - 1.0).max(0.0), tol.psd_tol);
    report.detail("input", if is_system { "system" } else { "measure" });
    report.detail("length", out.jacobi.len());
    report.detail("truncated", out.jacobi.truncated);
    report.detail("compared_coefficients", out.compared);
    let artifact = serde_json::to_value(JacobiJson::from(&out.jacobi)).expect("jacobi serializes");
    ctx.emit(&mut report, artifact)?;
    Ok(report)
}

pub fn dilate(ctx: &Context, path: &Path) -> InputResult<RunReport> {
    let mut inputs = Inputs::default();
    let sys = inputs.system(path)?;
    let mut report = RunReport::new("dilate", inputs.digest(), ctx.seed);
    let tol = &ctx.tol;
    let (blocks, r) = match biinner_dilation(&sys, tol) {
        Ok(x) => x,
        Err(e) => {
            failed(&mut report, "dilation", &e);
            return Ok(report);
        }
    };
    report.bound("t_unitarity", r.t_unitarity, tol.eq_tol);
    report.bound("circle_unitarity", r.circle_unitarity, tol.grid_tol);
    report.bound("top_left_block", r.top_left_deviation, tol.eq_tol);
    report.bound("block_formulas", r.block_deviation, tol.eq_tol);
    report.bound("kernel_formula", r.kernel_deviation, 1e-8);
    report.bound("kernel_psd", (-r.kernel_min_eig).max(0.0), tol.psd_tol);
    report.flag("quasi_selfadjoint", r.quasi_selfadjoint, 0.0);
    report.flag("conservative", r.conservative, r.t_unitarity);
    report.detail("minimal", r.minimal);
    report.detail("io_dim", blocks.io_dim);
    report.detail("dk_dim", blocks.dk_dim);
    report.detail("dk_adj_dim", blocks.dk_adj_dim);
    let artifact = json!({
        "io_dim": blocks.io_dim,
        "dk_dim": blocks.dk_dim,
        "dk_adj_dim": blocks.dk_adj_dim,
        "system": system_value(&blocks.system),
    });
    ctx.emit(&mut report, artifact)?;
    Ok(report)
}

pub fn similar(ctx: &Context, first: &Path, second: &Path, coupling: Option<&Path>) -> InputResult<RunReport> {
    let mut inputs = Inputs::default();
    let s1 = inputs.system(first)?;
    let s2 = inputs.system(second)?;
    let s = coupling.map(|p| inputs.matrix(p)).transpose()?;
    let mut report = RunReport::new("similar", inputs.digest(), ctx.seed);
    let tol = &ctx.tol;
    let sim = match unitary_similarity(&s1, &s2, s.as_ref(), tol) {
        Ok(x) => x,
        Err(e) => {
            let stage = match e {
                Error::TransferMismatch { .. } => "transfer_agreement",
                Error::MomentMismatch { .. } => "moment_agreement",
                Error::NotMinimal(_) => "minimal",
                Error::NotCoupled { .. } => "coupling",
                _ => "similarity",
            };
            failed(&mut report, stage, &e);
            return Ok(report);
        }
    };
    report.bound("transfer_agreement", sim.transfer_deviation, tol.eq_tol);
    report.bound("moment_agreement", sim.moment_deviation, tol.eq_tol);
    report.bound("a_intertwining", sim.a_residual, tol.eq_tol);
    report.bound("b_intertwining", sim.b_residual, tol.eq_tol);
    report.bound("c_intertwining", sim.c_residual, tol.eq_tol);
    report.bound("d_equal", sim.d_residual, tol.eq_tol);
    report.bound("unitarity", sim.unitarity, tol.eq_tol);
    report.detail("isometry_defect_before_projection", sim.raw_isometry_defect);
    ctx.emit(&mut report, matrix_value(&sim.u))?;
    Ok(report)
}
