//! End-to-end acceptance report. Runs as a plain binary so every criterion
//! prints its own line; the process fails if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use pqsys::opcore::{c, identity, op_norm, ComplexMatrix, Tolerances, C64};
use pqsys::param::{ContractionParams, PqsParams};
use pqsys::qfunc::{q_asymptotic_f, q_class_kernel_check, q_eval, q_theta_roundtrip};
use pqsys::realize::{
    biinner_dilation, chebyshev_data, chebyshev_example, chebyshev_system, inner_canonical_form,
    jacobi_realize, unitary_similarity,
};
use pqsys::sampling::{
    annulus_point, blaschke_system, complex_vector, conservative_system, contraction, disk_point,
    hermitian_contraction, passive_system, pqs_system, rng,
};
use pqsys::sysmodel::PartitionedContraction;
use pqsys::transfer::{
    boundary_values, circle_grid, defect_identities, inner_pm1_conditions, inner_test,
    inner_test_system, sqs_membership, theta_eval, theta_factored, w_from_data,
    CharacteristicFunction,
};
use pqsys::Error;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

/// Worst value seen and whether it stayed within its bound.
fn within(worst: f64, bound: f64) -> bool {
    worst.is_finite() && worst <= bound
}

struct Suite {
    tol: Tolerances,
    /// State operators of every minimal pqs system met along the way,
    /// labelled by where they came from.
    minimal_a: Vec<(&'static str, ComplexMatrix)>,
}

impl Suite {
    fn track(&mut self, source: &'static str, sys: &PartitionedContraction) {
        if sys.is_pqs(&self.tol) && sys.is_minimal(&self.tol) {
            self.minimal_a.push((source, sys.a()));
        }
    }

    fn random_params(&self, r: &mut ChaCha8Rng) -> ContractionParams {
        let t = &self.tol;
        let i = r.gen_range(1..=3);
        let o = r.gen_range(1..=3);
        let s = r.gen_range(1..=4);
        passive_params(r, i, o, s, t)
    }
}

fn passive_params(r: &mut ChaCha8Rng, i: usize, o: usize, s: usize, t: &Tolerances) -> ContractionParams {
    let sys = passive_system(r, i, o, s, 0.3, 0.99);
    ContractionParams::parametrize(&sys, t).expect("passive system parametrizes")
}

fn round_trip(suite: &mut Suite) -> Outcome {
    let t = suite.tol;
    let mut r = rng(101);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (i, o, s) = (r.gen_range(1..=3), r.gen_range(1..=3), r.gen_range(0..=5));
        let sys = passive_system(&mut r, i, o, s, 0.2, 1.0);
        let dev = ContractionParams::parametrize(&sys, &t)
            .and_then(|p| p.assemble())
            .map(|back| op_norm(&(back.t() - sys.t())))
            .unwrap_or(f64::INFINITY);
        worst = worst.max(dev);
    }
    Outcome::new(within(worst, 1e-9), format!("max ‖assemble(parametrize(T)) − T‖ = {worst:.3e} (bound 1e-9)"))
}

fn defect_balance(suite: &mut Suite) -> Outcome {
    let mut r = rng(102);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let p = suite.random_params(&mut r);
        let h = complex_vector(&mut r, p.m.ncols());
        let f = complex_vector(&mut r, p.a.ncols());
        let (lhs, rhs) = p.defect_balance(&h, &f).expect("dimensions match");
        let scale = h.norm_squared() + f.norm_squared();
        worst = worst.max((lhs - rhs).abs() / scale);
    }
    Outcome::new(within(worst, 1e-9), format!("max relative residual = {worst:.3e} (bound 1e-9)"))
}

fn factorization(suite: &mut Suite) -> Outcome {
    let t = suite.tol;
    let mut r = rng(103);
    let mut factored = 0.0f64;
    let mut identities = 0.0f64;
    for _ in 0..30 {
        let p = suite.random_params(&mut r);
        let sys = p.assemble().expect("assembles");
        for _ in 0..10 {
            let lambda = disk_point(&mut r, 0.95);
            let direct = theta_eval(&sys, lambda, &t).expect("λ in disk");
            factored = factored.max(op_norm(&(theta_factored(&p, lambda).unwrap() - direct)));
            let h = complex_vector(&mut r, p.m.ncols());
            let g = complex_vector(&mut r, p.k.nrows());
            let res = defect_identities(&p, lambda, &h, &g).unwrap();
            identities = identities.max(res.input).max(res.output);
        }
    }
    Outcome::new(
        within(factored, 1e-9) && within(identities, 1e-9),
        format!("factorization {factored:.3e}, defect identities {identities:.3e} (bound 1e-9)"),
    )
}

fn characteristic(suite: &mut Suite) -> Outcome {
    let t = suite.tol;
    let mut r = rng(104);
    let mut chardef = 0.0f64;
    let mut circle = 0.0f64;
    let mut pm1 = 0.0f64;
    for k in 0..20 {
        let n = 1 + k % 4;
        let a = contraction(&mut r, n, n, 0.1, 0.95);
        let cf = CharacteristicFunction::new(&a, &t).unwrap();
        for _ in 0..5 {
            let lambda = disk_point(&mut r, 0.95);
            chardef = chardef.max(cf.chardef_residual(lambda).unwrap()).max(cf.chardef_adj_residual(lambda).unwrap());
        }

        let sa = hermitian_contraction(&mut r, n, 0.95);
        let cf = CharacteristicFunction::new(&sa, &t).unwrap();
        for xi in circle_grid(16, 1.0) {
            let phi = cf.eval(xi).unwrap();
            circle = circle.max(op_norm(&(phi.adjoint() * &phi - identity(phi.ncols()))));
        }
        let h = 1e-7;
        for sign in [1.0, -1.0] {
            let near = |s: f64| cf.eval(c(sign * (1.0 - s), 0.0)).unwrap();
            let limit = near(h) * c(2.0, 0.0) - near(2.0 * h);
            pm1 = pm1.max(op_norm(&(limit - identity(n) * c(sign, 0.0))));
        }
    }
    Outcome::new(
        within(chardef, 1e-9) && within(circle, 1e-7) && within(pm1, 1e-6),
        format!("defining identity {chardef:.3e} (1e-9), circle unitarity {circle:.3e} (1e-7), Φ(±1) {pm1:.3e} (1e-6)"),
    )
}

fn chebyshev(suite: &mut Suite) -> Outcome {
    let t = suite.tol;
    let f = chebyshev_data(c(0.0, 0.0), 200);
    let w = |x: f64| w_from_data(&f, c(x, 0.0)).unwrap()[(0, 0)];
    let w06 = (w(0.6) - c(1.0 / 6.0, 0.0)).norm();
    let wpm = (w(1.0) - c(0.5, 0.0)).norm().max((w(-1.0) + c(0.5, 0.0)).norm());
    let whalf = (w(0.5) * -2.0 - c(3f64.sqrt() - 2.0, 0.0)).norm();
    let accept = sqs_membership(&chebyshev_data(c(0.5, 0.0), 200), &t).unwrap().member;
    let reject = !sqs_membership(&chebyshev_data(c(0.51, 0.0), 200), &t).unwrap().member;

    let (_, sys) = chebyshev_example(c(0.25, 0.0), 200).unwrap();
    suite.track("Chebyshev, 200 nodes", &sys);
    let (a_dev, b_dev, len) = match jacobi_realize(&sys, 60, &t) {
        Ok(out) => {
            let j = out.jacobi;
            let upto = j.a.len().min(51);
            let a_dev = j.a[..upto].iter().map(|a| (a - 0.5).abs()).fold(0.0, f64::max);
            let b_dev = j.b[..j.b.len().min(51)].iter().map(|b| b.abs()).fold(0.0, f64::max);
            (a_dev, b_dev, upto)
        }
        Err(_) => (f64::INFINITY, f64::INFINITY, 0),
    };
    Outcome::new(
        within(w06, 1e-9) && within(wpm, 1e-6) && within(whalf, 1e-9) && accept && reject && len == 51
            && within(a_dev, 1e-6) && within(b_dev, 1e-6),
        format!(
            "W(0.6) {w06:.1e}, W(±1) {wpm:.1e}, −2W(1/2) {whalf:.1e}, d=0.5 accepted {accept}, d=0.51 rejected {reject}, \
             Jacobi k≤50: |a_k−1/2| {a_dev:.1e}, |b_k| {b_dev:.1e}"
        ),
    )
}

fn inner_form(suite: &mut Suite) -> Outcome {
    let t = suite.tol;
    let mut r = rng(106);
    let mut point_err = 0.0f64;
    let mut pm1 = 0.0f64;
    let mut systems = 0;
    while systems < 30 {
        let m = r.gen_range(1..=4);
        let mut points: Vec<f64> = (0..m).map(|_| r.gen_range(-0.9..0.9)).collect();
        points.sort_by(f64::total_cmp);
        if points.windows(2).any(|w| w[1] - w[0] < 1e-3) {
            continue;
        }
        let extra = r.gen_range(0..=2);
        let (sys, _) = blaschke_system(&mut r, &points, extra, &t).unwrap();
        suite.track("Blaschke", &sys);
        systems += 1;
        match inner_canonical_form(&sys, &t) {
            Ok(form) if form.points.len() == m => {
                for (got, want) in form.points.iter().zip(&points) {
                    point_err = point_err.max((got - want).abs());
                }
            }
            _ => point_err = f64::INFINITY,
        }
        let bv = boundary_values(&PqsParams::from_system(&sys, &t).unwrap()).unwrap();
        let cond = inner_pm1_conditions(&bv.plus, &bv.minus, &t).unwrap();
        pm1 = pm1.max(cond.projector).max(cond.inner_identity).max(cond.coinner_identity);
    }

    let d = c(0.25, 0.0);
    let (_, cheb) = chebyshev_example(d, 200).unwrap();
    let cheb_inner = inner_test_system(&cheb, 32, &t);
    let cf = |z: C64| Ok(ComplexMatrix::from_element(1, 1, pqsys::realize::chebyshev_theta(d, z)));
    let closed_inner = inner_test(cf, 32, &t);
    let bv = boundary_values(&PqsParams::from_system(&cheb, &t).unwrap()).unwrap();
    let cheb_pm1 = inner_pm1_conditions(&bv.plus, &bv.minus, &t).unwrap();
    let control = !cheb_inner.inner && !closed_inner.inner && cheb_pm1.inner_identity > t.eq_tol;
    Outcome::new(
        within(point_err, 1e-8) && within(pm1, 1e-9) && control,
        format!(
            "points {point_err:.3e} (1e-8), boundary identities {pm1:.3e} (1e-9); \
             control: isometry defect {:.3e}, second identity {:.3e}, rejected {control}",
            cheb_inner.max_defect, cheb_pm1.inner_identity
        ),
    )
}

fn dilation(suite: &mut Suite) -> Outcome {
    let t = suite.tol;
    let mut r = rng(107);
    let (mut unit, mut circle, mut top) = (0.0f64, 0.0f64, 0.0f64);
    let mut done = 0;
    while done < 10 {
        let (io, state) = (r.gen_range(1..=2), r.gen_range(1..=4));
        let sys = pqs_system(&mut r, io, state, &t).unwrap();
        if !sys.is_minimal(&t) {
            continue;
        }
        suite.track("random", &sys);
        done += 1;
        match biinner_dilation(&sys, &t) {
            Ok((blocks, report)) => {
                unit = unit.max(report.t_unitarity);
                circle = circle.max(report.circle_unitarity);
                top = top.max(report.top_left_deviation);
                suite.track("dilation", &blocks.system);
            }
            Err(_) => unit = f64::INFINITY,
        }
    }
    Outcome::new(
        within(unit, 1e-9) && within(circle, 1e-7) && within(top, 1e-9),
        format!("T unitarity {unit:.3e} (1e-9), circle unitarity {circle:.3e} (1e-7), top-left block {top:.3e} (1e-9)"),
    )
}

fn q_function(suite: &mut Suite) -> Outcome {
    let t = suite.tol;
    let mut r = rng(108);
    let (mut roundtrip, mut fit, mut kernel) = (0.0f64, 0.0f64, f64::INFINITY);
    let mut control = true;
    for k in 0..10 {
        let (io, state) = (r.gen_range(1..=2), r.gen_range(1..=4));
        let sys = pqs_system(&mut r, io, state, &t).unwrap();
        suite.track("random", &sys);
        for _ in 0..10 {
            let z = annulus_point(&mut r, 1.5, 4.0);
            roundtrip = roundtrip.max(q_theta_roundtrip(&sys, z, &t).map(|x| x.max()).unwrap_or(f64::INFINITY));
        }
        let q = |z| q_eval(&sys, z, &t);
        let f = q_asymptotic_f(q, 100.0).unwrap();
        fit = fit.max(op_norm(&(&f + sys.d())));

        let points: Vec<C64> = (0..5).map(|_| annulus_point(&mut r, 1.2, 3.0)).collect();
        let check = q_class_kernel_check(q, &f, &points, 20, k, &t).unwrap();
        kernel = kernel.min(check.s2_min_eig).min(check.s3_min_eig);
        let bad = |z| Ok(q_eval(&sys, z, &t)? * c(1.1, 0.0));
        let f_bad = q_asymptotic_f(bad, 100.0).unwrap();
        control &= !q_class_kernel_check(bad, &f_bad, &points, 20, k, &t).unwrap().passes(&t);
    }
    Outcome::new(
        within(roundtrip, 1e-9) && within(fit, 1e-6) && kernel >= -1e-8 && control,
        format!(
            "Q/Θ relation {roundtrip:.3e} (1e-9), F + D {fit:.3e} (1e-6), kernel min eig {kernel:.3e} (≥ -1e-8), scaled Q rejected {control}"
        ),
    )
}

fn similarity(suite: &mut Suite) -> Outcome {
    let t = suite.tol;
    let mut r = rng(109);
    let mut conj = 0.0f64;
    for _ in 0..20 {
        let state = r.gen_range(1..=4);
        let io = r.gen_range(1..=2);
        let s1 = pqs_system(&mut r, io, state, &t).unwrap();
        if !s1.is_minimal(&t) {
            continue;
        }
        suite.track("random", &s1);
        let v = pqsys::sampling::unitary(&mut r, state);
        let s2 = s1.conjugate(&v).unwrap();
        conj = conj.max(unitary_similarity(&s1, &s2, None, &t).map(|s| s.max_residual()).unwrap_or(f64::INFINITY));
    }

    let diag = chebyshev_system(c(0.1, 0.0), 8).unwrap();
    let jac = jacobi_realize(&diag, 20, &t).unwrap().jacobi.to_system().unwrap();
    suite.track("Chebyshev, 8 nodes", &diag);
    suite.track("Jacobi, 8 nodes", &jac);
    let (unitarity, raw) = match unitary_similarity(&diag, &jac, None, &t) {
        Ok(s) => (s.unitarity, s.raw_isometry_defect),
        Err(_) => (f64::INFINITY, f64::INFINITY),
    };

    let other = chebyshev_system(c(0.2, 0.0), 8).unwrap();
    let mismatch = matches!(unitary_similarity(&diag, &other, None, &t), Err(Error::TransferMismatch { .. }));
    Outcome::new(
        within(conj, 1e-8) && within(unitarity, 1e-7) && within(raw, 1e-7) && mismatch,
        format!(
            "conjugated pairs {conj:.3e} (1e-8), diagonal vs Jacobi ‖U*U − I‖ {unitarity:.3e} before projection {raw:.3e} (1e-7), \
             mismatch reported {mismatch}"
        ),
    )
}

/// `a^k` by repeated squaring.
fn matrix_power(a: &ComplexMatrix, mut k: usize) -> ComplexMatrix {
    let mut result = identity(a.nrows());
    let mut base = a.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &base;
        }
        base = &base * &base;
        k >>= 1;
    }
    result
}

fn stability(suite: &mut Suite) -> Outcome {
    let mut radius = 0.0f64;
    let mut power = 0.0f64;
    let mut offenders: Vec<String> = Vec::new();
    for (source, a) in &suite.minimal_a {
        let n = a.nrows();
        if n == 0 {
            continue;
        }
        let r = a.clone().eigenvalues().map(|e| e.iter().map(|z| z.norm()).fold(0.0, f64::max));
        let r = r.unwrap_or_else(|| pqsys::opcore::spectral_radius_normal(a));
        radius = radius.max(r);
        let norm = op_norm(&matrix_power(a, 4 * n));
        power = power.max(norm);
        if r >= 1.0 || norm >= 0.5 {
            offenders.push(format!("{source} (dim {n}: |eig| {r:.6}, ‖A^{}‖ {norm:.3})", 4 * n));
        }
    }
    offenders.dedup();
    let count = suite.minimal_a.len();
    let mut detail = format!("{count} minimal pqs systems: max |eig(A)| {radius:.6} (< 1), max ‖A^(4n)‖ {power:.3e} (< 0.5)");
    if !offenders.is_empty() {
        detail.push_str(&format!("; out of bound: {}", offenders.join(", ")));
    }
    Outcome::new(count > 0 && radius < 1.0 && power < 0.5, detail)
}

fn energy(suite: &mut Suite) -> Outcome {
    let mut r = rng(111);
    let mut violation = 0.0f64;
    let mut equality = 0.0f64;
    for _ in 0..20 {
        let (i, o, s) = (r.gen_range(1..=3), r.gen_range(1..=3), r.gen_range(1..=5));
        let sys = passive_system(&mut r, i, o, s, 0.3, 1.0);
        let inputs: Vec<_> = (0..50).map(|_| complex_vector(&mut r, i)).collect();
        let traj = sys.simulate(&inputs, &complex_vector(&mut r, s)).unwrap();
        violation = violation.max(traj.energy_defects.iter().map(|d| -d).fold(0.0, f64::max));

        let io = r.gen_range(1..=3);
        let cons = conservative_system(&mut r, io, s);
        let inputs: Vec<_> = (0..50).map(|_| complex_vector(&mut r, io)).collect();
        let traj = cons.simulate(&inputs, &complex_vector(&mut r, s)).unwrap();
        equality = equality.max(traj.energy_defects.iter().map(|d| d.abs()).fold(0.0, f64::max));
    }
    let _ = suite;
    Outcome::new(
        within(violation, 1e-9) && within(equality, 1e-9),
        format!("passive violation {violation:.3e} (1e-9), conservative deviation {equality:.3e} (1e-9)"),
    )
}

type Criterion = fn(&mut Suite) -> Outcome;

fn main() -> ExitCode {
    let mut suite = Suite { tol: Tolerances::default(), minimal_a: Vec::new() };
    let criteria: [(&str, Criterion); 11] = [
        ("parametrization round-trip", round_trip),
        ("defect balance", defect_balance),
        ("factorization and defect identities", factorization),
        ("characteristic function", characteristic),
        ("Chebyshev example", chebyshev),
        ("inner canonical form", inner_form),
        ("bi-inner dilation", dilation),
        ("Q-function", q_function),
        ("unitary similarity", similarity),
        ("stability of minimal pqs systems", stability),
        ("simulation energy law", energy),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let began = Instant::now();
        let outcome = run(&mut suite);
        let secs = began.elapsed().as_secs_f64();
        if !outcome.pass {
            failed += 1;
        }
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        println!("{verdict} {:>2} {name} [{secs:.1}s]: {}", k + 1, outcome.detail);
    }
    println!("{} of {} criteria passed in {:.1}s", criteria.len() - failed, criteria.len(), start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
