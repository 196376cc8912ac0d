//! Self-check suite over every module, run by `qot verify`.
//!
//! Random instances come from a fixed seed so the report is reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cost::SymmetricPairCost;
use crate::gaussian::{moments, CoherentPoint, PhaseSpaceContext, WeightedConfiguration};
use crate::linalg::{hermitian_eig, hermitian_part, max_abs, trace_product};
use crate::quantum::{
    build_named_coupling, checkerboard_quarter, equal_mass_dual_witness, max_feasible_eps,
    maximize_inner, mk2_squared, quantum_correction, toeplitz_analysis, toeplitz_coefficients,
    AnsatzParameters, BuiltCoupling, CouplingKind, Scenario,
};
use crate::semiclassical::{
    check_husimi_bound, check_toeplitz_inequality, decays_exponentially, gap_vs_hbar,
    HusimiGridSpec,
};
use crate::transport::{solve_transport, w2_squared, w2_squared_1d};
use crate::{CMatrix, Result, C64};

pub const SEED: u64 = 0x5eed_2024;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }

    fn from_result(name: &str, r: Result<(bool, String)>) -> Self {
        match r {
            Ok((passed, detail)) => Self::new(name, passed, detail),
            Err(e) => Self::new(name, false, format!("error: {e}")),
        }
    }
}

/// Every check, in a fixed order.
pub fn run_all() -> Vec<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut out = Vec::new();
    for (a, b, h) in [(1.0, 2.0, 1.0), (0.5, 2.0, 0.5), (1.0, 3.0, 2.0)] {
        out.push(CheckOutcome::from_result(
            &format!("equal-mass equality a={a} b={b} hbar={h}"),
            equal_mass(a, b, h),
        ));
    }
    out.push(CheckOutcome::from_result(
        "cost compression closed form",
        cost_compression(),
    ));
    out.push(CheckOutcome::from_result(
        "ansatz optimum",
        ansatz_optimum(),
    ));
    out.push(CheckOutcome::from_result(
        "unequal-mass improvement",
        unequal_mass(),
    ));
    out.push(CheckOutcome::from_result(
        "scalar identities",
        scalar_identities(),
    ));
    out.push(CheckOutcome::from_result(
        "perturbed determinant slope",
        determinant_slope(),
    ));
    out.push(CheckOutcome::from_result(
        "toeplitz coefficients",
        toeplitz_checks(),
    ));
    out.push(CheckOutcome::from_result(
        "overlaps vs quadrature",
        quadrature(&mut rng, 20),
    ));
    out.push(CheckOutcome::from_result(
        "simplex optimality",
        simplex(&mut rng, 100),
    ));
    out.push(CheckOutcome::from_result(
        "monotone 1d coupling",
        monotone(&mut rng, 200),
    ));
    out.push(CheckOutcome::from_result(
        "jacobi reconstruction",
        jacobi(&mut rng, 50),
    ));
    out.push(CheckOutcome::from_result(
        "mk2 bounded by w2",
        mk2_below_w2(&mut rng, 10),
    ));
    out.push(CheckOutcome::from_result(
        "spectator invariance",
        spectators(),
    ));
    out.push(CheckOutcome::from_result(
        "feasible eps boundary",
        eps_boundary(),
    ));
    out.push(CheckOutcome::from_result("husimi bound", husimi()));
    out.push(CheckOutcome::from_result(
        "gap decays with hbar",
        gap_decay(),
    ));
    out
}

fn equal_mass(a: f64, b: f64, h: f64) -> Result<(bool, String)> {
    let ctx = PhaseSpaceContext::new(h)?;
    let (x, y) = Scenario::EqualMass { a, b }.configurations()?;
    let sol = mk2_squared(&ctx, &x, &y)?;
    let target = (a - b) * (a - b);
    let witness = equal_mass_dual_witness(&ctx, a, b)?;
    let rel = (sol.value - target).abs() / target.max(1e-300);
    let ok = rel <= 1e-6
        && (witness.bound() - target).abs() <= 1e-9
        && witness.is_valid()
        && sol.certified_gap() <= 1e-6;
    Ok((
        ok,
        format!(
            "mk2={:.12e} witness={:.12e} gap={:.3e}",
            sol.value,
            witness.bound(),
            sol.certified_gap()
        ),
    ))
}

fn cost_compression() -> Result<(bool, String)> {
    let ctx = PhaseSpaceContext::new(1.0)?;
    let setup = Scenario::EqualMass { a: 1.0, b: 2.0 }.setup(&ctx)?;
    let closed = SymmetricPairCost::closed_form(&ctx, 1.0, 2.0);
    let diff = max_abs(&(setup.cost.matrix() - closed.to_matrix()));
    Ok((diff <= 1e-10, format!("max entry difference {diff:.3e}")))
}

fn ansatz_optimum() -> Result<(bool, String)> {
    let ctx = PhaseSpaceContext::new(1.0)?;
    let cost = SymmetricPairCost::closed_form(&ctx, 1.0, 2.0);
    let (p, _) = maximize_inner(cost.lambda, cost.mu);
    let best = AnsatzParameters::optimal(cost.lambda, cost.mu).trace_cost(&cost);
    // golden section locates a smooth maximum to about the root of machine precision
    let ok = (p - cost.lambda * cost.mu).abs() < 1e-6 && (best - 1.0).abs() < 1e-9;
    Ok((ok, format!("argmax p={p:.12e} trace={best:.12e}")))
}

fn unequal_mass() -> Result<(bool, String)> {
    let (a, eta, eps) = (1.0, 0.5, 0.01);
    let ctx = PhaseSpaceContext::new(1.0)?;
    let (x, y) = Scenario::UnequalMass { a, eta }.configurations()?;
    let classical = w2_squared(&x, &y)?.cost;
    let setup = Scenario::UnequalMass { a, eta }.setup(&ctx)?;
    let qc = build_named_coupling(&ctx, &Scenario::UnequalMass { a, eta }, CouplingKind::Qc)?;
    let perturbed = qc.matrix() + quantum_correction() * C64::new(eps, 0.0);
    let value = trace_product(setup.cost.matrix(), &perturbed);
    let lambda = (-a * a).exp();
    let expected = 1.0 - eps * 8.0 * lambda * lambda / (1.0 - lambda * lambda);
    let quantum = mk2_squared(&ctx, &x, &y)?.value;
    let ok = (classical - 1.0).abs() <= 1e-12
        && (value - expected).abs() <= 1e-9
        && quantum <= value + 1e-6
        && value + 1e-6 < classical;
    Ok((
        ok,
        format!("C_c={classical:.12e} trace(CQ_eps)={value:.12e} C_q={quantum:.12e}"),
    ))
}

fn scalar_identities() -> Result<(bool, String)> {
    let (a, b) = (1.3, 0.4);
    let c0 = SymmetricPairCost::semiclassical(a, b).to_matrix();
    let q0_ok = (trace_product(&c0, &checkerboard_quarter()) - (a - b).powi(2)).abs() < 1e-12;
    let spectrum = hermitian_eig(&checkerboard_quarter())?.values;
    let spec_ok = spectrum
        .iter()
        .zip([0.0, 0.0, 0.5, 0.5])
        .all(|(x, y)| (x - y).abs() < 1e-12);

    let ctx = PhaseSpaceContext::new(1.0)?;
    let (a, eta) = (1.0, 0.5);
    let scenario = Scenario::UnequalMass { a, eta };
    let setup = scenario.setup(&ctx)?;
    let qc = build_named_coupling(&ctx, &scenario, CouplingKind::Qc)?;
    let tc = trace_product(setup.cost.matrix(), qc.matrix());
    let tq = trace_product(setup.cost.matrix(), &quantum_correction());
    let l2 = (-2.0 * a * a).exp();
    // Q_c has one zero eigenvalue; the other three multiply to this
    let nonzero: f64 = hermitian_eig(qc.matrix())?.values[1..].iter().product();
    let p3 = eta / 8.0 * (1.0 - eta) * (1.0 - l2).powi(2);
    let ok = q0_ok
        && spec_ok
        && (tc - 2.0 * eta * a * a).abs() < 1e-10
        && (tq + 8.0 * a * a * l2 / (1.0 - l2)).abs() < 1e-10
        && (nonzero - p3).abs() < 1e-12;
    Ok((
        ok,
        format!(
            "trace CQc={tc:.12e} trace CQq={tq:.12e} nonzero eigenvalue product={nonzero:.12e}"
        ),
    ))
}

/// `det(Q_c + εQ_q)/ε` at a given `ε` for `a = 1, η = ½, ℏ = 1`.
pub fn perturbed_determinant_ratio(eps: f64) -> Result<f64> {
    let ctx = PhaseSpaceContext::new(1.0)?;
    let qc = build_named_coupling(
        &ctx,
        &Scenario::UnequalMass { a: 1.0, eta: 0.5 },
        CouplingKind::Qc,
    )?;
    let q = qc.matrix() + quantum_correction() * C64::new(eps, 0.0);
    Ok(q.determinant().re / eps)
}

/// Richardson extrapolation of [`perturbed_determinant_ratio`] to `ε → 0`
/// from `ε ∈ {1e−3, 1e−4, 1e−5}`.
pub fn determinant_slope_estimate() -> Result<f64> {
    let d: Vec<f64> = [1e-3, 1e-4, 1e-5]
        .iter()
        .map(|&e| perturbed_determinant_ratio(e))
        .collect::<Result<_>>()?;
    // error is linear in ε with ratio 10 between steps
    let r1 = (10.0 * d[1] - d[0]) / 9.0;
    let r2 = (10.0 * d[2] - d[1]) / 9.0;
    Ok(0.5 * (r1 + r2))
}

fn determinant_slope() -> Result<(bool, String)> {
    let estimate = determinant_slope_estimate()?;
    let (eta, l2) = (0.5, (-2.0_f64).exp());
    let expected = eta / 8.0 * l2 * (1.0 - eta) * (1.0 - l2).powi(2);
    let ok = (estimate - expected).abs() <= 0.01 * expected.abs();
    Ok((
        ok,
        format!("extrapolated {estimate:.12e}, expected {expected:.12e}"),
    ))
}

fn toeplitz_checks() -> Result<(bool, String)> {
    let ctx = PhaseSpaceContext::new(1.0)?;
    let scenario = Scenario::UnequalMass { a: 1.0, eta: 0.5 };
    let setup = scenario.setup(&ctx)?;
    let qq = toeplitz_coefficients(
        setup.cost.basis_x(),
        setup.cost.basis_y(),
        &quantum_correction(),
    )?;
    let lambda = (-1.0_f64).exp();
    // x point 1 is +a, y point 0 is −a
    let q = qq.coefficient(1, 1, 0, 1);
    let expected = -lambda / (1.0 - lambda * lambda).powi(2);
    let eq = Scenario::EqualMass { a: 1.0, b: 2.0 };
    let BuiltCoupling::Coupling(opt) =
        build_named_coupling(&ctx, &eq, CouplingKind::EqualMassOptimal)?
    else {
        unreachable!("optimal ansatz is a coupling")
    };
    let opt = toeplitz_analysis(&opt)?;
    let ok = (q.re - expected).abs() < 1e-9
        && q.im.abs() < 1e-9
        && !qq.is_representable()
        && opt.is_representable();
    Ok((
        ok,
        format!("q(+a,+a;-a,+a)={:.12e}, expected {expected:.12e}", q.re),
    ))
}

/// Normalized coherent wavefunction `(πℏ)^{−1/4} e^{−(x−q)²/2ℏ + ipx/ℏ}`.
fn wavefunction(h: f64, z: &CoherentPoint, x: f64) -> C64 {
    let norm = (std::f64::consts::PI * h).powf(-0.25);
    C64::from_polar(
        norm * (-(x - z.q()).powi(2) / (2.0 * h)).exp(),
        z.p() * x / h,
    )
}

fn quadrature(rng: &mut ChaCha8Rng, count: usize) -> Result<(bool, String)> {
    let mut worst = 0.0_f64;
    for _ in 0..count {
        let h = rng.random_range(0.3..2.0);
        let z1 = CoherentPoint::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))?;
        let z2 = CoherentPoint::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))?;
        let ctx = PhaseSpaceContext::new(h)?;
        let m = moments(&ctx, &z1, &z2);
        let (lo, hi, n) = (-12.0, 12.0, 24_000);
        let dx = (hi - lo) / n as f64;
        let (mut s0, mut s1, mut s2) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for k in 0..=n {
            let x = lo + k as f64 * dx;
            let w = if k == 0 || k == n { 0.5 * dx } else { dx };
            let v = wavefunction(h, &z1, x).conj() * wavefunction(h, &z2, x) * w;
            s0 += v;
            s1 += v * x;
            s2 += v * x * x;
        }
        worst = worst
            .max((s0 - m.overlap).norm())
            .max((s1 - m.x).norm())
            .max((s2 - m.x2).norm());
    }
    Ok((worst < 1e-8, format!("worst deviation {worst:.3e}")))
}

fn random_masses(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| x / total).collect()
}

fn simplex(rng: &mut ChaCha8Rng, count: usize) -> Result<(bool, String)> {
    let mut worst = 0.0_f64;
    for _ in 0..count {
        let (m, n) = (rng.random_range(1..=8), rng.random_range(1..=8));
        let mu = random_masses(rng, m);
        let nu = random_masses(rng, n);
        let cost = crate::RMatrix::from_fn(m, n, |_, _| rng.random_range(0.0..10.0));
        let sol = solve_transport(&mu, &nu, &cost)?;
        let duality = (sol.dual_value(&mu, &nu) - sol.cost).abs();
        let negative = (-sol.min_reduced_cost(&cost)).max(0.0);
        worst = worst
            .max(duality)
            .max(negative)
            .max(sol.marginal_defect(&mu, &nu));
    }
    Ok((
        worst < 1e-9,
        format!("worst certificate defect {worst:.3e}"),
    ))
}

fn random_line(rng: &mut ChaCha8Rng, k: usize) -> Result<WeightedConfiguration> {
    let mut pos: Vec<f64> = (0..k).map(|_| rng.random_range(-5.0..5.0)).collect();
    pos.sort_by(f64::total_cmp);
    pos.dedup();
    let w = random_masses(rng, pos.len());
    WeightedConfiguration::on_line(&pos, &w)
}

fn monotone(rng: &mut ChaCha8Rng, count: usize) -> Result<(bool, String)> {
    let mut worst = 0.0_f64;
    for _ in 0..count {
        let k1 = rng.random_range(1..=7);
        let k2 = rng.random_range(1..=7);
        let (x, y) = (random_line(rng, k1)?, random_line(rng, k2)?);
        worst = worst.max((w2_squared_1d(&x, &y)? - w2_squared(&x, &y)?.cost).abs());
    }
    Ok((worst < 1e-9, format!("worst difference {worst:.3e}")))
}

fn jacobi(rng: &mut ChaCha8Rng, count: usize) -> Result<(bool, String)> {
    let mut worst = 0.0_f64;
    for _ in 0..count {
        let n = rng.random_range(1..=12);
        let m = hermitian_part(&CMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        }));
        let eig = hermitian_eig(&m)?;
        worst = worst.max((eig.reconstruct_with(|w| w) - &m).norm());
    }
    Ok((worst < 1e-10, format!("worst residual {worst:.3e}")))
}

fn random_line_configuration(rng: &mut ChaCha8Rng) -> Result<WeightedConfiguration> {
    let k = rng.random_range(2..=3);
    let mut pos: Vec<f64> = Vec::with_capacity(k);
    while pos.len() < k {
        let q = rng.random_range(-2.0..2.0);
        if pos.iter().all(|p: &f64| (p - q).abs() > 0.3) {
            pos.push(q);
        }
    }
    let w = random_masses(rng, k);
    WeightedConfiguration::on_line(&pos, &w)
}

fn mk2_below_w2(rng: &mut ChaCha8Rng, count: usize) -> Result<(bool, String)> {
    let mut worst = f64::INFINITY;
    for _ in 0..count {
        let ctx = PhaseSpaceContext::new(rng.random_range(0.5..1.5))?;
        let x = random_line_configuration(rng)?;
        let y = random_line_configuration(rng)?;
        worst = worst.min(check_toeplitz_inequality(&ctx, &x, &y)?.slack);
    }
    Ok((worst >= -1e-6, format!("smallest slack {worst:.3e}")))
}

fn spectators() -> Result<(bool, String)> {
    let ctx = PhaseSpaceContext::new(1.0)?;
    let (x, y) = Scenario::UnequalMass { a: 1.0, eta: 0.5 }.configurations()?;
    let base = mk2_squared(&ctx, &x, &y)?.value;
    let extra = [
        CoherentPoint::new(0.3, 1.1)?,
        CoherentPoint::new(-0.7, -0.9)?,
    ];
    let enlarged = mk2_squared(
        &ctx,
        &x.with_spectators(&extra)?,
        &y.with_spectators(&extra)?,
    )?
    .value;
    let diff = (enlarged - base).abs();
    Ok((diff < 1e-7, format!("value change {diff:.3e}")))
}

fn eps_boundary() -> Result<(bool, String)> {
    let ctx = PhaseSpaceContext::new(1.0)?;
    let eps = max_feasible_eps(&ctx, 1.0, 0.5)?;
    let scenario = Scenario::UnequalMass { a: 1.0, eta: 0.5 };
    let inside = build_named_coupling(&ctx, &scenario, CouplingKind::Qeps(0.99 * eps)).is_ok();
    let outside = build_named_coupling(&ctx, &scenario, CouplingKind::Qeps(1.01 * eps)).is_err();
    Ok((
        eps > 0.0 && inside && outside,
        format!("max feasible eps {eps:.12e}"),
    ))
}

fn husimi() -> Result<(bool, String)> {
    let ctx = PhaseSpaceContext::new(1.0)?;
    let (x, y) = Scenario::EqualMass { a: 1.0, b: 2.0 }.configurations()?;
    let r = check_husimi_bound(&ctx, &x, &y, &HusimiGridSpec::default())?;
    Ok((
        r.holds(),
        format!(
            "w2={:.6e} refined={:.6e} bound={:.6e} tolerance={:.3e}",
            r.w2_husimi, r.w2_refined, r.bound, r.tolerance
        ),
    ))
}

fn gap_decay() -> Result<(bool, String)> {
    let rows = gap_vs_hbar(1.0, 0.5, &[1.0, 0.5, 0.25])?;
    let gaps: Vec<String> = rows.iter().map(|r| format!("{:.6e}", r.gap)).collect();
    let bounded = rows.iter().all(|r| r.gap >= r.eps_gain - 1e-6);
    Ok((
        decays_exponentially(&rows, 1.0, 0.2) && bounded,
        format!("gaps {}", gaps.join(" ")),
    ))
}
