//! Semiclassical comparisons between `MK₂`, `W₂` and Husimi functions.

use serde::Serialize;

use crate::gaussian::{husimi, CoherentPoint, PhaseSpaceContext, WeightedConfiguration};
use crate::linalg::trace_product;
use crate::quantum::{
    build_named_coupling, max_feasible_eps, mk2_squared, mk2_squared_with, quantum_correction,
    CouplingKind, Mk2Options, Scenario, Setup,
};
use crate::transport::{
    w2_squared, w2_squared_grid_with, GridDensity, GridW2Options, GridW2Report, PhaseGrid,
};
use crate::{Error, Result};

/// Slack below which an inequality counts as violated.
pub const INEQUALITY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ToeplitzInequalityReport {
    pub mk2: f64,
    pub mk2_lower_bound: f64,
    pub w2: f64,
    /// `W₂² − MK₂²`.
    pub slack: f64,
}

impl ToeplitzInequalityReport {
    pub fn holds(&self) -> bool {
        self.slack >= -INEQUALITY_TOLERANCE
    }
}

/// `MK₂(R, S)² ≤ W₂(μ, ν)²` for the measures `μ`, `ν` whose Töplitz
/// quantizations are `R`, `S`.
pub fn check_toeplitz_inequality(
    ctx: &PhaseSpaceContext,
    x: &WeightedConfiguration,
    y: &WeightedConfiguration,
) -> Result<ToeplitzInequalityReport> {
    let quantum = mk2_squared(ctx, x, y)?;
    let classical = w2_squared(x, y)?;
    Ok(ToeplitzInequalityReport {
        mk2: quantum.value,
        mk2_lower_bound: quantum.lower_bound(),
        w2: classical.cost,
        slack: classical.cost - quantum.value,
    })
}

/// Grid on which Husimi functions are sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HusimiGridSpec {
    pub center: (f64, f64),
    pub half_width: f64,
    pub step: f64,
    pub mass_cutoff: f64,
    /// Largest admissible change of the value when the step is halved.
    pub refinement_tolerance: f64,
    pub max_support: usize,
}

impl Default for HusimiGridSpec {
    fn default() -> Self {
        Self {
            center: (0.0, 0.0),
            half_width: 8.0,
            step: 0.1,
            mass_cutoff: 1e-12,
            refinement_tolerance: 2e-2,
            max_support: 1600,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HusimiBoundReport {
    /// Grid `W₂²` between the Husimi functions at the requested step.
    pub w2_husimi: f64,
    /// Same at half the step.
    pub w2_refined: f64,
    pub mk2: f64,
    /// `MK₂² + 4ℏ` (configuration space is one-dimensional).
    pub bound: f64,
    /// Bound on `|W₂²(grid) − W₂²(continuous)|`.
    pub tolerance: f64,
    /// `bound + tolerance − w2_husimi`.
    pub slack: f64,
    /// Riemann sums of the two sampled Husimi functions.
    pub grid_mass: [f64; 2],
    pub coarse: GridW2Report,
    pub fine: GridW2Report,
}

impl HusimiBoundReport {
    pub fn holds(&self) -> bool {
        self.slack >= 0.0
    }
}

/// `W₂(W̃[R], W̃[S])² ≤ MK₂(R, S)² + 4ℏ` with the left side on a grid.
///
/// The step is halved once (with twice the aggregation factor, so blocks
/// keep their physical size) and the two values must agree within
/// `refinement_tolerance`.
pub fn check_husimi_bound(
    ctx: &PhaseSpaceContext,
    x: &WeightedConfiguration,
    y: &WeightedConfiguration,
    spec: &HusimiGridSpec,
) -> Result<HusimiBoundReport> {
    let setup = Setup::new(ctx, x, y)?;
    let mk2 = mk2_squared(ctx, x, y)?.value;

    let sample = |grid: PhaseGrid| -> Result<(GridDensity, GridDensity)> {
        let f = GridDensity::sample(grid, |q, p| {
            husimi(
                ctx,
                &setup.r,
                &CoherentPoint::new(q, p).expect("finite node"),
            )
        })?;
        let g = GridDensity::sample(grid, |q, p| {
            husimi(
                ctx,
                &setup.s,
                &CoherentPoint::new(q, p).expect("finite node"),
            )
        })?;
        Ok((f, g))
    };
    let (q0, p0) = spec.center;
    let coarse_grid = PhaseGrid::centered(q0, p0, spec.half_width, spec.step)?;
    let fine_grid = PhaseGrid::centered(q0, p0, spec.half_width, spec.step / 2.0)?;

    let (f, g) = sample(coarse_grid)?;
    let grid_mass = [f.integral(), g.integral()];
    for m in grid_mass {
        if (m - 1.0).abs() > 1e-6 {
            return Err(Error::GridMismatch(format!(
                "grid holds Husimi mass {m}, the support is not covered"
            )));
        }
    }
    let opts = GridW2Options {
        mass_cutoff: spec.mass_cutoff,
        max_support: spec.max_support,
        ..GridW2Options::default()
    };
    let coarse = w2_squared_grid_with(&f, &g, &opts)?;
    let (f2, g2) = sample(fine_grid)?;
    let fine = w2_squared_grid_with(
        &f2,
        &g2,
        &GridW2Options {
            block: Some(2 * coarse.block),
            ..opts
        },
    )?;
    if (coarse.value - fine.value).abs() > spec.refinement_tolerance {
        return Err(Error::GridTooCoarse {
            coarse: coarse.value,
            fine: fine.value,
            tolerance: spec.refinement_tolerance,
        });
    }

    // each node stands for its cell: moving mass within a cell costs at most
    // the half-diagonal, once per measure
    let sampling = coarse_grid.cell_diagonal();
    let e = coarse.truncation_bound + coarse.aggregation_bound + sampling;
    let tolerance = e * (2.0 * coarse.value.sqrt() + e);
    let bound = mk2 + 4.0 * ctx.hbar() * PhaseSpaceContext::DIMENSION as f64;
    Ok(HusimiBoundReport {
        w2_husimi: coarse.value,
        w2_refined: fine.value,
        mk2,
        bound,
        tolerance,
        slack: bound + tolerance - coarse.value,
        grid_mass,
        coarse,
        fine,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapRow {
    pub hbar: f64,
    pub c_classical: f64,
    pub c_quantum: f64,
    /// `c_classical − c_quantum`.
    pub gap: f64,
    /// `min(0.01, max_feasible_eps / 2)`.
    pub eps: f64,
    /// `trace(C Q_ε)` at that `eps`.
    pub perturbed_value: f64,
    /// `ε · 8a²λ²/(1−λ²)`, the improvement of the perturbed coupling.
    pub eps_gain: f64,
    /// Certified `upper − lower` of the quantum value.
    pub dual_gap: f64,
    pub iterations: usize,
}

/// Classical and quantum cost of the unequal-mass scenario for each `ℏ`.
pub fn gap_vs_hbar(a: f64, eta: f64, hbars: &[f64]) -> Result<Vec<GapRow>> {
    hbars.iter().map(|&h| gap_row(a, eta, h, None)).collect()
}

/// One row of [`gap_vs_hbar`]; `eps` overrides the default choice.
pub fn gap_row(a: f64, eta: f64, hbar: f64, eps: Option<f64>) -> Result<GapRow> {
    gap_row_with(a, eta, hbar, eps, &Mk2Options::default())
}

pub fn gap_row_with(
    a: f64,
    eta: f64,
    hbar: f64,
    eps: Option<f64>,
    opts: &Mk2Options,
) -> Result<GapRow> {
    let ctx = PhaseSpaceContext::new(hbar)?;
    let scenario = Scenario::UnequalMass { a, eta };
    let (x, y) = scenario.configurations()?;
    let classical = w2_squared(&x, &y)?.cost;
    let quantum = mk2_squared_with(&ctx, &x, &y, opts)?;
    let eps = match eps {
        Some(e) => e,
        None => 0.01_f64.min(max_feasible_eps(&ctx, a, eta)? / 2.0),
    };
    let setup = scenario.setup(&ctx)?;
    let qc = build_named_coupling(&ctx, &scenario, CouplingKind::Qc)?;
    let correction = trace_product(setup.cost.matrix(), &quantum_correction());
    let lambda = (-a * a / hbar).exp();
    Ok(GapRow {
        hbar,
        c_classical: classical,
        c_quantum: quantum.value,
        gap: classical - quantum.value,
        eps,
        perturbed_value: qc.coupling().expect("Qc is a coupling").value() + eps * correction,
        eps_gain: eps * 8.0 * a * a * lambda * lambda / (1.0 - lambda * lambda),
        dual_gap: quantum.certified_gap(),
        iterations: quantum.report.iterations,
    })
}

/// Least-squares slope of `ln(gap)` against `a²/ℏ`.
pub fn decay_slope(rows: &[GapRow], a: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.gap > 0.0)
        .map(|r| (a * a / r.hbar, r.gap.ln()))
        .collect();
    if pts.len() < 2 || pts.len() != rows.len() {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Gaps positive, decreasing as `ℏ` decreases, and `ln(gap)` falling at
/// least at unit rate in `a²/ℏ` up to `tolerance` (relative).
pub fn decays_exponentially(rows: &[GapRow], a: f64, tolerance: f64) -> bool {
    let mut sorted: Vec<&GapRow> = rows.iter().collect();
    sorted.sort_by(|x, y| y.hbar.total_cmp(&x.hbar));
    let positive = sorted
        .iter()
        .all(|r| r.gap > INEQUALITY_TOLERANCE.min(r.eps_gain));
    let decreasing = sorted.windows(2).all(|w| w[1].gap < w[0].gap);
    let slope_ok = decay_slope(rows, a).is_some_and(|s| s <= -(1.0 - tolerance));
    positive && decreasing && slope_ok
}
