//! Subcommand implementations. Each returns `Ok(false)` when a verification
//! it performs fails.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use qot_core::gaussian::{PhaseSpaceContext, WeightedConfiguration};
use qot_core::io::{write_json, CouplingJson, WitnessJson};
use qot_core::linalg::{min_eigenvalue, trace_product};
use qot_core::quantum::{
    build_named_coupling, equal_mass_dual_witness, max_feasible_eps, mk2_squared_with,
    quantum_correction, CouplingKind, Mk2Options, Scenario,
};
use qot_core::sdp::{IterationRecord, SdpOptions};
use qot_core::semiclassical::{check_husimi_bound, gap_row_with, HusimiGridSpec};
use qot_core::transport::{
    solve_transport_with, squared_distance_cost, write_matrix_csv, PivotRule, TransportOptions,
};
use qot_core::verify::run_all;
use qot_core::C64;
use rayon::prelude::*;

use crate::input::{load_pair, Failure, InputError};
use crate::output::{num, Report};
use crate::{
    EqualMassArgs, HusimiArgs, Mk2Args, Pivot, ScenarioKind, SolverArgs, SweepArgs,
    UnequalMassArgs, VerifyArgs, W2Args,
};

type Outcome = Result<bool, Failure>;

/// Slack allowed when comparing a solver value against an explicit coupling.
const COMPARISON_TOLERANCE: f64 = 1e-6;

impl SolverArgs {
    fn options(&self, record_trace: bool) -> Result<Mk2Options, Failure> {
        if !(self.tolerance > 0.0 && self.gap_tolerance >= 0.0) || self.max_iterations == 0 {
            return Err(InputError("solver tolerances must be positive".into()).into());
        }
        Ok(Mk2Options {
            sdp: SdpOptions {
                tolerance: self.tolerance,
                max_iterations: self.max_iterations,
                record_trace,
                ..Mk2Options::default().sdp
            },
        })
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| InputError(format!("cannot create {}: {e}", path.display())).into())
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "yes"
    } else {
        "no"
    }
}

pub fn w2(args: W2Args) -> Outcome {
    let (_, x, y) = load_pair(&args.config.configs)?;
    let cost = squared_distance_cost(&x, &y);
    let opts = TransportOptions {
        pivot: match args.pivot {
            Pivot::Bland => PivotRule::Bland,
            Pivot::BlockSearch => PivotRule::BlockSearch,
        },
        ..TransportOptions::default()
    };
    let plan = solve_transport_with(x.weights(), y.weights(), &cost, &opts)?;
    if let Some(path) = &args.cost_csv {
        write_matrix_csv(create(path)?, &cost)?;
    }
    if let Some(path) = &args.plan_csv {
        write_matrix_csv(create(path)?, &plan.plan)?;
    }
    let dual = plan.dual_value(x.weights(), y.weights());
    Report::default()
        .value("W2^2", plan.cost)
        .value("dual value", dual)
        .value("min reduced cost", plan.min_reduced_cost(&cost))
        .value(
            "marginal defect",
            plan.marginal_defect(x.weights(), y.weights()),
        )
        .text("pivots", plan.pivots.to_string())
        .print();
    Ok(true)
}

pub fn mk2(args: Mk2Args) -> Outcome {
    let (ctx, x, y) = load_pair(&args.config.configs)?;
    let opts = args.solver.options(args.trace_csv.is_some())?;
    let sol = mk2_squared_with(&ctx, &x, &y, &opts)?;
    if let Some(path) = &args.trace_csv {
        let mut w = csv::Writer::from_writer(create(path)?);
        w.write_record(IterationRecord::HEADER)
            .map_err(qot_core::Error::from)?;
        for record in &sol.trace {
            w.write_record(record.fields())
                .map_err(qot_core::Error::from)?;
        }
        w.flush()?;
    }
    if let Some(path) = &args.coupling_json {
        write_json(path, &CouplingJson::from(&sol.coupling))?;
    }
    if let Some(path) = &args.witness_json {
        write_json(path, &WitnessJson::from(&sol.witness))?;
    }
    let gap = sol.certified_gap();
    let ok = sol.witness.is_valid() && gap <= args.solver.gap_tolerance;
    Report::default()
        .value("MK2^2", sol.value)
        .value("lower bound", sol.lower_bound())
        .value("certified gap", gap)
        .value("witness min slack", sol.witness.min_slack())
        .value("primal residual", sol.report.primal_residual)
        .value("marginal defect", sol.coupling.marginal_defect())
        .text("iterations", sol.report.iterations.to_string())
        .text(
            "dimension",
            format!("{}x{}", sol.coupling.dims().0, sol.coupling.dims().1),
        )
        .text("certified", verdict(ok))
        .print();
    Ok(ok)
}

pub fn equal_mass(args: EqualMassArgs) -> Outcome {
    let ctx = PhaseSpaceContext::new(args.hbar)?;
    let scenario = Scenario::EqualMass {
        a: args.a,
        b: args.b,
    };
    let (x, y) = scenario.configurations()?;
    let classical = qot_core::transport::w2_squared(&x, &y)?.cost;
    let sol = mk2_squared_with(&ctx, &x, &y, &args.solver.options(false)?)?;
    let witness = equal_mass_dual_witness(&ctx, args.a, args.b)?;
    let closed = (args.a - args.b).powi(2);
    let tol = COMPARISON_TOLERANCE * closed.max(1.0);
    let ok = (sol.value - closed).abs() <= tol
        && (classical - closed).abs() <= tol
        && witness.is_valid()
        && (witness.bound() - closed).abs() <= tol
        && sol.certified_gap() <= args.solver.gap_tolerance;
    Report::default()
        .value("C_c", classical)
        .value("C_q", sol.value)
        .value("(a-b)^2", closed)
        .value("witness bound", witness.bound())
        .value("witness min slack", witness.min_slack())
        .value("dual gap", sol.certified_gap())
        .text("iterations", sol.report.iterations.to_string())
        .text("C_q = C_c", verdict(ok))
        .print();
    Ok(ok)
}

pub fn unequal_mass(args: UnequalMassArgs) -> Outcome {
    let ctx = PhaseSpaceContext::new(args.hbar)?;
    if !args.eps.is_finite() {
        return Err(InputError("eps must be finite".into()).into());
    }
    let scenario = Scenario::UnequalMass {
        a: args.a,
        eta: args.eta,
    };
    let (x, y) = scenario.configurations()?;
    let setup = scenario.setup(&ctx)?;
    let classical = qot_core::transport::w2_squared(&x, &y)?.cost;
    let qc = build_named_coupling(&ctx, &scenario, CouplingKind::Qc)?;
    let q_eps = qc.matrix() + quantum_correction() * C64::new(args.eps, 0.0);
    let perturbed = trace_product(setup.cost.matrix(), &q_eps);
    let min_eig = min_eigenvalue(&q_eps)?;
    let max_eps = max_feasible_eps(&ctx, args.a, args.eta)?;
    let feasible = args.eps <= max_eps;
    let sol = mk2_squared_with(&ctx, &x, &y, &args.solver.options(false)?)?;

    let certified = sol.witness.is_valid() && sol.certified_gap() <= args.solver.gap_tolerance;
    let below_explicit = !feasible || sol.value <= perturbed + COMPARISON_TOLERANCE;
    let cheaper = sol.value + args.solver.gap_tolerance < classical;
    let ok = certified && below_explicit && cheaper;
    Report::default()
        .value("C_c", classical)
        .value("eps", args.eps)
        .value("trace(C Q_eps)", perturbed)
        .value("min eigenvalue Q_eps", min_eig)
        .value("max feasible eps", max_eps)
        .text("Q_eps positive", verdict(feasible))
        .value("C_q", sol.value)
        .value("lower bound", sol.lower_bound())
        .value("dual gap", sol.certified_gap())
        .text("iterations", sol.report.iterations.to_string())
        .text("quantum strictly cheaper", verdict(ok))
        .print();
    if !feasible {
        log::warn!("eps = {} exceeds the feasible range {max_eps}", args.eps);
    }
    Ok(ok)
}

struct SweepPoint {
    a: f64,
    b: Option<f64>,
    eta: Option<f64>,
    hbar: f64,
    eps: Option<f64>,
}

struct SweepRow {
    point: SweepPoint,
    eps: Option<f64>,
    c_classical: f64,
    c_quantum: f64,
    dual_gap: f64,
    iterations: usize,
    ok: bool,
}

fn sweep_points(args: &SweepArgs) -> Result<Vec<SweepPoint>, Failure> {
    let mut points = Vec::new();
    match args.scenario {
        ScenarioKind::EqualMass => {
            if args.b.is_empty() {
                return Err(InputError("equal-mass sweep needs --b".into()).into());
            }
            if !args.eta.is_empty() || !args.eps.is_empty() {
                return Err(
                    InputError("--eta and --eps apply to unequal-mass sweeps".into()).into(),
                );
            }
            for &a in &args.a {
                for &b in &args.b {
                    for &hbar in &args.hbar {
                        points.push(SweepPoint {
                            a,
                            b: Some(b),
                            eta: None,
                            hbar,
                            eps: None,
                        });
                    }
                }
            }
        }
        ScenarioKind::UnequalMass => {
            if args.eta.is_empty() {
                return Err(InputError("unequal-mass sweep needs --eta".into()).into());
            }
            if !args.b.is_empty() {
                return Err(InputError("--b applies to equal-mass sweeps".into()).into());
            }
            let eps: Vec<Option<f64>> = if args.eps.is_empty() {
                vec![None]
            } else {
                args.eps.iter().copied().map(Some).collect()
            };
            for &a in &args.a {
                for &eta in &args.eta {
                    for &hbar in &args.hbar {
                        for &e in &eps {
                            points.push(SweepPoint {
                                a,
                                b: None,
                                eta: Some(eta),
                                hbar,
                                eps: e,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(points)
}

fn sweep_row(point: SweepPoint, solver: &SolverArgs) -> Result<SweepRow, Failure> {
    let opts = solver.options(false)?;
    match (point.b, point.eta) {
        (Some(b), _) => {
            let ctx = PhaseSpaceContext::new(point.hbar)?;
            let (x, y) = Scenario::EqualMass { a: point.a, b }.configurations()?;
            let classical = qot_core::transport::w2_squared(&x, &y)?.cost;
            let sol = mk2_squared_with(&ctx, &x, &y, &opts)?;
            let ok = classical - sol.value >= -COMPARISON_TOLERANCE
                && sol.certified_gap() <= solver.gap_tolerance;
            Ok(SweepRow {
                point,
                eps: None,
                c_classical: classical,
                c_quantum: sol.value,
                dual_gap: sol.certified_gap(),
                iterations: sol.report.iterations,
                ok,
            })
        }
        (None, Some(eta)) => {
            let row = gap_row_with(point.a, eta, point.hbar, point.eps, &opts)?;
            let ctx = PhaseSpaceContext::new(point.hbar)?;
            let feasible = row.eps <= max_feasible_eps(&ctx, point.a, eta)?;
            let ok = row.gap >= -COMPARISON_TOLERANCE
                && row.dual_gap <= solver.gap_tolerance
                && (!feasible || row.c_quantum <= row.perturbed_value + COMPARISON_TOLERANCE);
            Ok(SweepRow {
                point,
                eps: Some(row.eps),
                c_classical: row.c_classical,
                c_quantum: row.c_quantum,
                dual_gap: row.dual_gap,
                iterations: row.iterations,
                ok,
            })
        }
        (None, None) => unreachable!("sweep points carry b or eta"),
    }
}

pub fn sweep(args: SweepArgs) -> Outcome {
    let points = sweep_points(&args)?;
    let rows: Vec<SweepRow> = points
        .into_par_iter()
        .map(|p| sweep_row(p, &args.solver))
        .collect::<Result<_, _>>()?;

    let sink: Box<dyn Write> = match &args.output {
        Some(path) => Box::new(create(path)?),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    w.write_record([
        "scenario",
        "a",
        "b",
        "eta",
        "hbar",
        "eps",
        "c_classical",
        "c_quantum",
        "gap",
        "dual_gap",
        "iterations",
    ])
    .map_err(qot_core::Error::from)?;
    let name = match args.scenario {
        ScenarioKind::EqualMass => "equal-mass",
        ScenarioKind::UnequalMass => "unequal-mass",
    };
    let mut all_ok = true;
    for row in &rows {
        all_ok &= row.ok;
        if !row.ok {
            log::warn!(
                "sweep check failed at a={} b={:?} eta={:?} hbar={}",
                row.point.a,
                row.point.b,
                row.point.eta,
                row.point.hbar
            );
        }
        w.write_record([
            name.to_string(),
            num(row.point.a),
            opt(row.point.b),
            opt(row.point.eta),
            num(row.point.hbar),
            opt(row.eps),
            num(row.c_classical),
            num(row.c_quantum),
            num(row.c_classical - row.c_quantum),
            num(row.dual_gap),
            row.iterations.to_string(),
        ])
        .map_err(qot_core::Error::from)?;
    }
    w.flush()?;
    Ok(all_ok)
}

pub fn husimi_bound(args: HusimiArgs) -> Outcome {
    let (ctx, x, y): (
        PhaseSpaceContext,
        WeightedConfiguration,
        WeightedConfiguration,
    ) = if !args.configs.is_empty() {
        load_pair(&args.configs)?
    } else {
        match (args.a, args.b, args.hbar) {
            (Some(a), Some(b), Some(hbar)) => {
                let (x, y) = Scenario::EqualMass { a, b }.configurations()?;
                (PhaseSpaceContext::new(hbar)?, x, y)
            }
            _ => {
                return Err(InputError("give --config or all of --a, --b and --hbar".into()).into())
            }
        }
    };
    let spec = HusimiGridSpec {
        center: (args.center_q, args.center_p),
        half_width: args.half_width,
        step: args.step,
        mass_cutoff: args.mass_cutoff,
        refinement_tolerance: args.refinement_tolerance,
        max_support: args.max_support,
    };
    let report = check_husimi_bound(&ctx, &x, &y, &spec)?;
    Report::default()
        .value("W2^2 Husimi", report.w2_husimi)
        .value("W2^2 Husimi (refined)", report.w2_refined)
        .value("MK2^2", report.mk2)
        .value("MK2^2 + 4 hbar", report.bound)
        .value("grid tolerance", report.tolerance)
        .value("slack", report.slack)
        .text("bound holds", verdict(report.holds()))
        .print();
    Ok(report.holds())
}

pub fn verify(args: VerifyArgs) -> Outcome {
    let outcomes = run_all();
    let ok = outcomes.iter().all(|o| o.passed);
    let mut out = io::stdout().lock();
    if args.json {
        serde_json::to_writer_pretty(&mut out, &outcomes).map_err(qot_core::Error::from)?;
        writeln!(out)?;
    } else {
        for o in &outcomes {
            let status = if o.passed { "PASS" } else { "FAIL" };
            writeln!(out, "{status} {}: {}", o.name, o.detail)?;
        }
        let passed = outcomes.iter().filter(|o| o.passed).count();
        writeln!(out, "{passed}/{} checks passed", outcomes.len())?;
    }
    Ok(ok)
}
