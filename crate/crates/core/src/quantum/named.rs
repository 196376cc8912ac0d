//! Explicit couplings for the two-point scenarios.

use crate::gaussian::PhaseSpaceContext;
use crate::linalg::min_eigenvalue;
use crate::transport::solve_transport;
use crate::{CMatrix, Error, RMatrix, Result, C64};

use super::ansatz::AnsatzParameters;
use super::{real_matrix, Coupling, Scenario, Setup};

/// Bisection stops once the bracket is this narrow.
const EPS_BRACKET: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CouplingKind {
    /// The `λ = μ = 0` checkerboard coupling of `½I` with `½I`.
    Q0,
    EqualMassAnsatz(AnsatzParameters),
    /// `½(|a;b⟩⟨a;b| + |−a;−b⟩⟨−a;−b|)`.
    EqualMassOptimal,
    /// Quantization of the optimal classical plan.
    Qc,
    /// Traceless correction with vanishing partial traces (not PSD).
    Qq,
    Qeps(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum BuiltCoupling {
    Coupling(Box<Coupling>),
    Raw(CMatrix),
}

impl BuiltCoupling {
    pub fn matrix(&self) -> &CMatrix {
        match self {
            BuiltCoupling::Coupling(c) => c.matrix(),
            BuiltCoupling::Raw(m) => m,
        }
    }

    pub fn coupling(&self) -> Option<&Coupling> {
        match self {
            BuiltCoupling::Coupling(c) => Some(c.as_ref()),
            BuiltCoupling::Raw(_) => None,
        }
    }
}

/// `¼` times the checkerboard of ones.
pub fn checkerboard_quarter() -> CMatrix {
    real_matrix(
        4,
        &[
            0.25, 0.0, 0.0, 0.25, //
            0.0, 0.25, 0.25, 0.0, //
            0.0, 0.25, 0.25, 0.0, //
            0.25, 0.0, 0.0, 0.25,
        ],
    )
}

/// The correction whose addition to the quantized classical coupling
/// lowers the cost.
pub fn quantum_correction() -> CMatrix {
    real_matrix(
        4,
        &[
            1.0, 0.0, 0.0, -1.0, //
            0.0, -1.0, 1.0, 0.0, //
            0.0, 1.0, -1.0, 0.0, //
            -1.0, 0.0, 0.0, 1.0,
        ],
    )
}

/// `Σ p_ij |x_i; y_j⟩⟨x_i; y_j|` in the product basis.
pub fn quantize_plan(setup: &Setup, plan: &RMatrix) -> Result<Coupling> {
    let fx = setup.cost.basis_x().frame_coordinates();
    let fy = setup.cost.basis_y().frame_coordinates();
    if plan.nrows() != fx.ncols() || plan.ncols() != fy.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "plan is {}x{} for {} and {} points",
            plan.nrows(),
            plan.ncols(),
            fx.ncols(),
            fy.ncols()
        )));
    }
    let (m, n) = setup.dims();
    let mut q = CMatrix::zeros(m * n, m * n);
    for i in 0..plan.nrows() {
        for j in 0..plan.ncols() {
            let w = plan[(i, j)];
            if w == 0.0 {
                continue;
            }
            let v = fx.column(i).kronecker(&fy.column(j));
            q += &v * v.adjoint() * C64::new(w, 0.0);
        }
    }
    Coupling::new(&setup.cost, q, &setup.r, &setup.s)
}

pub fn build_named_coupling(
    ctx: &PhaseSpaceContext,
    scenario: &Scenario,
    kind: CouplingKind,
) -> Result<BuiltCoupling> {
    let setup = scenario.setup(ctx)?;
    let (lambda, mu) = scenario.overlaps(ctx);
    let equal = matches!(scenario, Scenario::EqualMass { .. });
    let wrong = |what: &str| {
        Err(Error::InvalidConfiguration(format!(
            "{what} is not defined for {scenario:?}"
        )))
    };
    let coupling = match kind {
        CouplingKind::Q0 if equal => {
            let half = CMatrix::identity(2, 2) * C64::new(0.5, 0.0);
            Coupling::with_marginals(&setup.cost, checkerboard_quarter(), half.clone(), half)?
        }
        CouplingKind::EqualMassAnsatz(params) if equal => {
            if !params.is_feasible(lambda, mu) {
                let (lo, hi) = params.window(lambda, mu);
                return Err(Error::InfeasibleAnsatz(format!(
                    "p = {} outside the window [{lo}, {hi}]",
                    params.p
                )));
            }
            Coupling::new(&setup.cost, params.matrix(lambda, mu), &setup.r, &setup.s)?
        }
        CouplingKind::EqualMassOptimal if equal => {
            quantize_plan(&setup, &(RMatrix::identity(2, 2) * 0.5))?
        }
        CouplingKind::Qc if !equal => quantized_classical(&setup)?,
        CouplingKind::Qq if !equal => return Ok(BuiltCoupling::Raw(quantum_correction())),
        CouplingKind::Qeps(eps) if !equal => {
            if !eps.is_finite() {
                return Err(Error::NonFinite("eps"));
            }
            let qc = quantized_classical(&setup)?;
            let q = qc.matrix() + quantum_correction() * C64::new(eps, 0.0);
            let min = min_eigenvalue(&q)?;
            if min < -Coupling::PSD_TOLERANCE {
                return Err(Error::InfeasibleAnsatz(format!(
                    "eps = {eps} gives eigenvalue {min:e}"
                )));
            }
            Coupling::new(&setup.cost, q, &setup.r, &setup.s)?
        }
        other => return wrong(&format!("{other:?}")),
    };
    Ok(BuiltCoupling::Coupling(Box::new(coupling)))
}

fn quantized_classical(setup: &Setup) -> Result<Coupling> {
    let cost = crate::transport::squared_distance_cost(&setup.x, &setup.y);
    let plan = solve_transport(setup.x.weights(), setup.y.weights(), &cost)?;
    quantize_plan(setup, &plan.plan)
}

/// Largest `ε` for which the perturbed coupling stays positive.
pub fn max_feasible_eps(ctx: &PhaseSpaceContext, a: f64, eta: f64) -> Result<f64> {
    let setup = Scenario::UnequalMass { a, eta }.setup(ctx)?;
    let qc = quantized_classical(&setup)?;
    let qq = quantum_correction();
    let feasible = |eps: f64| -> Result<bool> {
        Ok(min_eigenvalue(&(qc.matrix() + &qq * C64::new(eps, 0.0)))? >= 0.0)
    };
    let (mut lo, mut hi) = (0.0, 0.01);
    while feasible(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::NumericalBreakdown(
                "feasible eps is unbounded".into(),
            ));
        }
    }
    while hi - lo > EPS_BRACKET {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}
