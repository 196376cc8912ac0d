use nalgebra::DVector;

use crate::gaussian::{PhaseSpaceContext, WeightedConfiguration};
use crate::linalg::{hermitian_part, identity, kron, min_eigenvalue, trace_product};
use crate::sdp::{solve_sdp, Constraint, HermitianSdp, IterationRecord, SdpOptions, SolverReport};
use crate::{CMatrix, Result, C64};

use super::witness::DualWitness;
use super::{range_vectors, Coupling, Setup};

#[derive(Debug, Clone, PartialEq)]
pub struct Mk2Options {
    pub sdp: SdpOptions,
}

impl Default for Mk2Options {
    fn default() -> Self {
        Self {
            sdp: SdpOptions {
                tolerance: 1e-9,
                ..SdpOptions::default()
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct Mk2Solution {
    /// `trace(C Q)` at the returned (exactly feasible) coupling.
    pub value: f64,
    pub coupling: Coupling,
    pub report: SolverReport,
    /// Dual certificate; its bound never exceeds the optimum.
    pub witness: DualWitness,
    pub trace: Vec<IterationRecord>,
}

impl Mk2Solution {
    pub fn upper_bound(&self) -> f64 {
        self.coupling.value()
    }

    pub fn lower_bound(&self) -> f64 {
        self.witness.bound()
    }

    /// `upper − lower`, an absolute certificate of optimality.
    pub fn certified_gap(&self) -> f64 {
        self.upper_bound() - self.lower_bound()
    }
}

/// Orthonormal Hermitian basis of `n × n` Hermitian matrices.
fn hermitian_basis(n: usize) -> Vec<CMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n * n);
    for k in 0..n {
        let mut e = CMatrix::zeros(n, n);
        e[(k, k)] = C64::new(1.0, 0.0);
        out.push(e);
    }
    for k in 0..n {
        for l in (k + 1)..n {
            let mut sym = CMatrix::zeros(n, n);
            sym[(k, l)] = C64::new(s, 0.0);
            sym[(l, k)] = C64::new(s, 0.0);
            out.push(sym);
            let mut anti = CMatrix::zeros(n, n);
            anti[(k, l)] = C64::new(0.0, s);
            anti[(l, k)] = C64::new(0.0, -s);
            out.push(anti);
        }
    }
    out
}

/// `min trace(C Q)` subject to `trace₂ Q = R`, `trace₁ Q = S`, `trace Q = 1`.
///
/// Constraints come in the order: `E ⊗ I` for each basis element `E` of the
/// first factor, `I ⊗ F` for the second, then the (redundant) unit trace.
pub fn coupling_sdp(setup: &Setup) -> Result<HermitianSdp> {
    let (m, n) = setup.dims();
    let (id_m, id_n) = (identity(m), identity(n));
    let mut constraints = Vec::with_capacity(m * m + n * n + 1);
    for e in hermitian_basis(m) {
        constraints.push(Constraint {
            rhs: trace_product(&e, setup.r.matrix()),
            matrix: kron(&e, &id_n),
        });
    }
    for f in hermitian_basis(n) {
        constraints.push(Constraint {
            rhs: trace_product(&f, setup.s.matrix()),
            matrix: kron(&id_m, &f),
        });
    }
    constraints.push(Constraint {
        matrix: identity(m * n),
        rhs: 1.0,
    });
    HermitianSdp::new(setup.cost.matrix().clone(), constraints)
}

pub fn mk2_squared(
    ctx: &PhaseSpaceContext,
    x: &WeightedConfiguration,
    y: &WeightedConfiguration,
) -> Result<Mk2Solution> {
    mk2_squared_with(ctx, x, y, &Mk2Options::default())
}

/// Solves the coupling SDP on `range(R) ⊗ range(S)`.
///
/// Every coupling is supported there, so the value is that of the full
/// problem. Restricting first matters when a marginal is singular (zero
/// weights): the full problem then has no strictly feasible point and its
/// dual optimum is not attained.
pub fn mk2_squared_with(
    ctx: &PhaseSpaceContext,
    x: &WeightedConfiguration,
    y: &WeightedConfiguration,
    opts: &Mk2Options,
) -> Result<Mk2Solution> {
    let setup = Setup::new(ctx, x, y)?;
    let face = Face::new(&setup)?;
    let problem = face.sdp(&setup)?;
    let sol = solve_sdp(&problem, &opts.sdp)?;

    let coupling = face.repair(&setup, &problem, &sol.q)?;
    let witness = face.witness(&setup, &problem, &sol.y)?;
    log::debug!(
        "mk2: solver value {} certified within [{}, {}]",
        sol.report.primal_value,
        witness.bound(),
        coupling.value()
    );
    Ok(Mk2Solution {
        value: coupling.value(),
        coupling,
        report: sol.report,
        witness,
        trace: sol.trace,
    })
}

struct Face {
    wr: CMatrix,
    ws: CMatrix,
    r: CMatrix,
    s: CMatrix,
}

impl Face {
    fn new(setup: &Setup) -> Result<Self> {
        let wr = range_vectors(setup.r.matrix())?;
        let ws = range_vectors(setup.s.matrix())?;
        Ok(Self {
            r: hermitian_part(&(wr.adjoint() * setup.r.matrix() * &wr)),
            s: hermitian_part(&(ws.adjoint() * setup.s.matrix() * &ws)),
            wr,
            ws,
        })
    }

    fn dims(&self) -> (usize, usize) {
        (self.wr.ncols(), self.ws.ncols())
    }

    fn embedding(&self) -> CMatrix {
        kron(&self.wr, &self.ws)
    }

    fn sdp(&self, setup: &Setup) -> Result<HermitianSdp> {
        let (m, n) = self.dims();
        let w = self.embedding();
        let cost = hermitian_part(&(w.adjoint() * setup.cost.matrix() * &w));
        let mut constraints = Vec::with_capacity(m * m + n * n);
        for e in hermitian_basis(m) {
            constraints.push(Constraint {
                rhs: trace_product(&e, &self.r),
                matrix: kron(&e, &identity(n)),
            });
        }
        for f in hermitian_basis(n) {
            constraints.push(Constraint {
                rhs: trace_product(&f, &self.s),
                matrix: kron(&identity(m), &f),
            });
        }
        HermitianSdp::new(cost, constraints)
    }

    /// Exact affine projection, then just enough of `R ⊗ S` (positive
    /// definite on the face) to restore positivity.
    fn repair(&self, setup: &Setup, problem: &HermitianSdp, q: &CMatrix) -> Result<Coupling> {
        let affine = hermitian_part(&problem.project_affine(q));
        let product = kron(&self.r, &self.s);
        let sigma = (-min_eigenvalue(&affine)?).max(0.0);
        let delta = min_eigenvalue(&product)?;
        let mixed = if sigma > 0.0 {
            let t = sigma / (sigma + delta);
            affine * C64::new(1.0 - t, 0.0) + product * C64::new(t, 0.0)
        } else {
            affine
        };
        let w = self.embedding();
        let full = hermitian_part(&(&w * mixed * w.adjoint()));
        Coupling::new(&setup.cost, full, &setup.r, &setup.s)
    }

    /// Splits the multipliers into `A ⊗ I + I ⊗ B`, embeds both, and shifts
    /// `A` by the most negative slack eigenvalue.
    fn witness(
        &self,
        setup: &Setup,
        problem: &HermitianSdp,
        y: &DVector<f64>,
    ) -> Result<DualWitness> {
        let (m, n) = self.dims();
        let mut full = vec![0.0; problem.constraints().len()];
        for (slot, &k) in problem.kept().iter().enumerate() {
            full[k] = y[slot];
        }
        let mut a = CMatrix::zeros(m, m);
        for (e, &yk) in hermitian_basis(m).iter().zip(&full[..m * m]) {
            a += e * C64::new(yk, 0.0);
        }
        let mut b = CMatrix::zeros(n, n);
        for (f, &yk) in hermitian_basis(n).iter().zip(&full[m * m..]) {
            b += f * C64::new(yk, 0.0);
        }
        let mut a = &self.wr * a * self.wr.adjoint();
        let b = &self.ws * b * self.ws.adjoint();
        let id = identity(a.nrows());
        let mut witness = DualWitness::new(&setup.cost, a.clone(), b.clone(), &setup.r, &setup.s)?;
        // a second pass absorbs rounding in the recomputed spectrum
        for _ in 0..2 {
            let shift = witness.min_slack().min(0.0);
            if shift == 0.0 {
                break;
            }
            a += &id * C64::new(shift, 0.0);
            witness = DualWitness::new(&setup.cost, a.clone(), b.clone(), &setup.r, &setup.s)?;
        }
        Ok(witness)
    }
}
