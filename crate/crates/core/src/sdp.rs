//! Small dense Hermitian SDP:
//!
//! ```text
//! minimize  trace(C Q)   subject to  trace(A_k Q) = b_k,  Q ⪰ 0
//! ```
//!
//! solved by ADMM on the splitting `Q = Z` with `Q` in the affine constraint
//! set and `Z` in the PSD cone. Dual multipliers `y` are recovered from the
//! affine step, and `C − Σ y_k A_k` is the dual slack whose smallest
//! eigenvalue measures dual infeasibility.

use std::io::Write;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::Serialize;

use crate::io::format_number;
use crate::linalg::{ensure_hermitian, hermitian_eig, hermitian_part, trace_product};
use crate::{CMatrix, Error, Result, C64};

/// Relative threshold under which a constraint counts as dependent.
const DEPENDENCE_THRESHOLD: f64 = 1e-9;

/// Linear equality `trace(A Q) = b` with Hermitian `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub matrix: CMatrix,
    pub rhs: f64,
}

/// Cost plus independent trace constraints. Dependent constraints are
/// dropped at construction after checking they agree with the kept ones.
#[derive(Debug, Clone)]
pub struct HermitianSdp {
    cost: CMatrix,
    constraints: Vec<Constraint>,
    kept: Vec<usize>,
    dropped: Vec<usize>,
    gram: Cholesky<f64, Dyn>,
}

impl HermitianSdp {
    pub fn new(cost: CMatrix, constraints: Vec<Constraint>) -> Result<Self> {
        ensure_hermitian(&cost, 1e-12)?;
        let n = cost.nrows();
        for c in &constraints {
            if c.matrix.nrows() != n {
                return Err(Error::DimensionMismatch(format!(
                    "constraint of size {} for an SDP of size {n}",
                    c.matrix.nrows()
                )));
            }
            ensure_hermitian(&c.matrix, 1e-12)?;
            if !c.rhs.is_finite() {
                return Err(Error::NonFinite("constraint right-hand side"));
            }
        }
        let constraints: Vec<Constraint> = constraints
            .into_iter()
            .map(|c| Constraint {
                matrix: hermitian_part(&c.matrix),
                rhs: c.rhs,
            })
            .collect();

        // modified Gram–Schmidt in the real inner product ⟨A, B⟩ = Re tr(A B)
        let mut basis: Vec<CMatrix> = Vec::new();
        let mut kept = Vec::new();
        let mut dropped = Vec::new();
        for (k, c) in constraints.iter().enumerate() {
            let norm = c.matrix.norm();
            let mut r = c.matrix.clone();
            for _ in 0..2 {
                for q in &basis {
                    let coeff = trace_product(&r, q);
                    r -= q * C64::new(coeff, 0.0);
                }
            }
            let rn = r.norm();
            if norm == 0.0 || rn <= DEPENDENCE_THRESHOLD * norm {
                dropped.push(k);
            } else {
                basis.push(r / C64::new(rn, 0.0));
                kept.push(k);
            }
        }

        let gram_matrix = DMatrix::from_fn(kept.len(), kept.len(), |i, j| {
            trace_product(&constraints[kept[i]].matrix, &constraints[kept[j]].matrix)
        });
        let gram = Cholesky::new(gram_matrix).ok_or_else(|| {
            Error::NumericalBreakdown("constraint Gram matrix is not positive definite".into())
        })?;

        let problem = Self {
            cost: hermitian_part(&cost),
            constraints,
            kept,
            dropped,
            gram,
        };
        for &k in &problem.dropped {
            let c = &problem.constraints[k];
            let coeffs = problem.gram.solve(&problem.apply(&c.matrix));
            let implied: f64 = coeffs.dot(&problem.rhs());
            if (implied - c.rhs).abs() > 1e-9 * (1.0 + c.rhs.abs()) {
                return Err(Error::InconsistentConstraints(format!(
                    "constraint {k} requires {} but the others imply {implied}",
                    c.rhs
                )));
            }
        }
        Ok(problem)
    }

    pub fn dim(&self) -> usize {
        self.cost.nrows()
    }

    pub fn cost(&self) -> &CMatrix {
        &self.cost
    }

    /// All constraints as supplied, including dropped ones.
    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Indices (into [`Self::constraints`]) of the independent constraints.
    pub fn kept(&self) -> &[usize] {
        &self.kept
    }

    pub fn dropped(&self) -> &[usize] {
        &self.dropped
    }

    /// Right-hand sides of the kept constraints.
    pub fn rhs(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.kept.len(),
            self.kept.iter().map(|&k| self.constraints[k].rhs),
        )
    }

    /// `𝒜(X)_k = trace(A_k X)` over kept constraints.
    pub fn apply(&self, x: &CMatrix) -> DVector<f64> {
        DVector::from_iterator(
            self.kept.len(),
            self.kept
                .iter()
                .map(|&k| trace_product(&self.constraints[k].matrix, x)),
        )
    }

    /// `𝒜*(y) = Σ y_k A_k`.
    pub fn adjoint(&self, y: &DVector<f64>) -> CMatrix {
        let n = self.dim();
        let mut out = CMatrix::zeros(n, n);
        for (slot, &k) in self.kept.iter().enumerate() {
            if y[slot] != 0.0 {
                out += &self.constraints[k].matrix * C64::new(y[slot], 0.0);
            }
        }
        out
    }

    /// Orthogonal projection onto `{X : 𝒜(X) = b}`.
    pub fn project_affine(&self, x: &CMatrix) -> CMatrix {
        let r = self.apply(x) - self.rhs();
        x - self.adjoint(&self.gram.solve(&r))
    }

    /// Least-squares multipliers for `𝒜*(y) ≈ m`.
    pub fn multipliers(&self, m: &CMatrix) -> DVector<f64> {
        self.gram.solve(&self.apply(m))
    }

    pub fn objective(&self, x: &CMatrix) -> f64 {
        trace_product(&self.cost, x)
    }

    pub fn residual(&self, x: &CMatrix) -> f64 {
        (self.apply(x) - self.rhs()).norm()
    }

    /// `C − 𝒜*(y)`.
    pub fn dual_slack(&self, y: &DVector<f64>) -> CMatrix {
        hermitian_part(&(&self.cost - self.adjoint(y)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub penalty: f64,
    /// Residual balancing period.
    pub rebalance_every: usize,
    /// Period of the (eigen-decomposition based) convergence check.
    pub check_every: usize,
    pub record_trace: bool,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 200_000,
            penalty: 1.0,
            rebalance_every: 100,
            check_every: 10,
            record_trace: false,
        }
    }
}

/// Values, residuals and status of a solve, in the problem's own units.
///
/// `gap` is relative: `|primal − dual| / (1 + |primal|)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverReport {
    pub primal_value: f64,
    pub dual_value: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub primal: f64,
    pub dual: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub penalty: f64,
}

impl IterationRecord {
    pub const HEADER: [&'static str; 6] = [
        "iteration",
        "primal",
        "dual",
        "primal_residual",
        "dual_residual",
        "penalty",
    ];

    /// CSV fields in [`Self::HEADER`] order.
    pub fn fields(&self) -> [String; 6] {
        [
            self.iteration.to_string(),
            format_number(self.primal),
            format_number(self.dual),
            format_number(self.primal_residual),
            format_number(self.dual_residual),
            format_number(self.penalty),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    /// PSD primal point.
    pub q: CMatrix,
    /// Multipliers of the kept constraints.
    pub y: DVector<f64>,
    /// Smallest eigenvalue of the dual slack `C − 𝒜*(y)`.
    pub slack_min_eigenvalue: f64,
    pub report: SolverReport,
    pub trace: Vec<IterationRecord>,
}

impl SdpSolution {
    /// Lower bound valid for every feasible point whose trace is at most
    /// `trace_bound`: `b·y + min(0, λ_min(S))·trace_bound`.
    pub fn certified_lower_bound(&self, trace_bound: f64) -> f64 {
        self.report.dual_value + self.slack_min_eigenvalue.min(0.0) * trace_bound
    }

    pub fn write_trace_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(IterationRecord::HEADER)?;
        for record in &self.trace {
            w.write_record(record.fields())?;
        }
        w.flush()?;
        Ok(())
    }
}

struct Certificate {
    primal: f64,
    dual: f64,
    primal_residual: f64,
    dual_residual: f64,
    gap: f64,
    slack_min: f64,
    y: DVector<f64>,
}

/// Runs ADMM until the primal residual, dual infeasibility and relative gap
/// are all below `opts.tolerance`.
pub fn solve_sdp(problem: &HermitianSdp, opts: &SdpOptions) -> Result<SdpSolution> {
    let n = problem.dim();
    let scale = problem.cost.norm().max(1.0);
    let scaled_cost = &problem.cost / C64::new(scale, 0.0);
    let mut rho = opts.penalty;
    let mut z = CMatrix::zeros(n, n);
    let mut u = CMatrix::zeros(n, n);
    let mut trace = Vec::new();
    let check_every = opts.check_every.max(1);
    let mut last: Option<Certificate> = None;

    for iteration in 1..=opts.max_iterations {
        let x = problem.project_affine(&(&z - &u - &scaled_cost / C64::new(rho, 0.0)));
        let z_prev = std::mem::replace(&mut z, project_psd_hermitian(&(&x + &u))?);
        u += &x - &z;

        let r_primal = (&x - &z).norm();
        let r_dual = rho * (&z - &z_prev).norm();
        if !r_primal.is_finite() || !r_dual.is_finite() {
            return Err(Error::NumericalBreakdown(format!(
                "non-finite residual at iteration {iteration}"
            )));
        }

        if iteration % check_every == 0 || iteration == opts.max_iterations {
            // at a fixed point C/scale + ρU = 𝒜*(y)
            let y_scaled = problem.multipliers(&(&scaled_cost + &u * C64::new(rho, 0.0)));
            let cert = certificate(problem, &z, y_scaled * scale)?;
            if opts.record_trace {
                trace.push(IterationRecord {
                    iteration,
                    primal: cert.primal,
                    dual: cert.dual,
                    primal_residual: cert.primal_residual,
                    dual_residual: cert.dual_residual,
                    penalty: rho,
                });
            }
            let done = cert.primal_residual <= opts.tolerance
                && cert.dual_residual <= opts.tolerance
                && cert.gap <= opts.tolerance;
            last = Some(cert);
            if done {
                let cert = last.take().expect("certificate just stored");
                log::debug!("sdp converged after {iteration} iterations");
                return Ok(finish(z, cert, iteration, true, trace));
            }
        }

        if opts.rebalance_every > 0 && iteration % opts.rebalance_every == 0 {
            if r_primal > 10.0 * r_dual {
                rho *= 2.0;
                u /= C64::new(2.0, 0.0);
            } else if r_dual > 10.0 * r_primal {
                rho /= 2.0;
                u *= C64::new(2.0, 0.0);
            }
        }
    }

    let cert = match last {
        Some(c) => c,
        None => certificate(problem, &z, DVector::zeros(problem.kept.len()))?,
    };
    let solution = finish(z, cert, opts.max_iterations, false, trace);
    Err(Error::MaxIterations {
        report: Box::new(solution.report),
    })
}

fn project_psd_hermitian(m: &CMatrix) -> Result<CMatrix> {
    let eig = hermitian_eig(&hermitian_part(m))?;
    Ok(hermitian_part(&eig.reconstruct_with(|w| w.max(0.0))))
}

fn certificate(problem: &HermitianSdp, z: &CMatrix, y: DVector<f64>) -> Result<Certificate> {
    let primal = problem.objective(z);
    let dual = y.dot(&problem.rhs());
    let slack = problem.dual_slack(&y);
    let slack_min = hermitian_eig(&slack)?.min();
    let primal_residual = problem.residual(z);
    Ok(Certificate {
        primal,
        dual,
        primal_residual,
        dual_residual: (-slack_min).max(0.0),
        gap: (primal - dual).abs() / (1.0 + primal.abs()),
        slack_min,
        y,
    })
}

fn finish(
    q: CMatrix,
    cert: Certificate,
    iterations: usize,
    converged: bool,
    trace: Vec<IterationRecord>,
) -> SdpSolution {
    SdpSolution {
        q,
        y: cert.y,
        slack_min_eigenvalue: cert.slack_min,
        report: SolverReport {
            primal_value: cert.primal,
            dual_value: cert.dual,
            primal_residual: cert.primal_residual,
            dual_residual: cert.dual_residual,
            gap: cert.gap,
            iterations,
            converged,
        },
        trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::min_eigenvalue;

    fn real(rows: usize, data: &[f64]) -> CMatrix {
        crate::linalg::complexify(&DMatrix::from_row_slice(rows, rows, data))
    }

    #[test]
    fn one_by_one_problem() {
        let p = HermitianSdp::new(
            real(1, &[3.5]),
            vec![Constraint {
                matrix: real(1, &[1.0]),
                rhs: 1.0,
            }],
        )
        .unwrap();
        let sol = solve_sdp(&p, &SdpOptions::default()).unwrap();
        assert!(sol.report.converged);
        assert!((sol.q[(0, 0)].re - 1.0).abs() < 1e-8);
        assert!((sol.report.primal_value - 3.5).abs() < 1e-7);
    }

    #[test]
    fn drops_dependent_constraints_and_checks_consistency() {
        let id = real(2, &[1.0, 0.0, 0.0, 1.0]);
        let e11 = real(2, &[1.0, 0.0, 0.0, 0.0]);
        let e22 = real(2, &[0.0, 0.0, 0.0, 1.0]);
        let ok = HermitianSdp::new(
            id.clone(),
            vec![
                Constraint {
                    matrix: e11.clone(),
                    rhs: 0.3,
                },
                Constraint {
                    matrix: e22.clone(),
                    rhs: 0.7,
                },
                Constraint {
                    matrix: id.clone(),
                    rhs: 1.0,
                },
            ],
        )
        .unwrap();
        assert_eq!(ok.dropped(), &[2]);
        let bad = HermitianSdp::new(
            id.clone(),
            vec![
                Constraint {
                    matrix: e11,
                    rhs: 0.3,
                },
                Constraint {
                    matrix: e22,
                    rhs: 0.7,
                },
                Constraint {
                    matrix: id,
                    rhs: 1.2,
                },
            ],
        );
        assert!(matches!(bad, Err(Error::InconsistentConstraints(_))));
    }

    #[test]
    fn trace_constrained_minimum_is_smallest_eigenvalue() {
        let c = real(3, &[2.0, 1.0, 0.0, 1.0, 2.0, 0.5, 0.0, 0.5, 1.0]);
        let p = HermitianSdp::new(
            c.clone(),
            vec![Constraint {
                matrix: CMatrix::identity(3, 3),
                rhs: 1.0,
            }],
        )
        .unwrap();
        let sol = solve_sdp(&p, &SdpOptions::default()).unwrap();
        let lmin = min_eigenvalue(&c).unwrap();
        assert!((sol.report.primal_value - lmin).abs() < 1e-6);
        assert!(sol.certified_lower_bound(1.0) <= lmin + 1e-9);
        assert!(sol.report.gap <= 1e-8);
    }

    #[test]
    fn iteration_limit_is_reported() {
        let c = real(3, &[2.0, 1.0, 0.0, 1.0, 2.0, 0.5, 0.0, 0.5, 1.0]);
        let p = HermitianSdp::new(
            c,
            vec![Constraint {
                matrix: CMatrix::identity(3, 3),
                rhs: 1.0,
            }],
        )
        .unwrap();
        let opts = SdpOptions {
            max_iterations: 3,
            ..SdpOptions::default()
        };
        match solve_sdp(&p, &opts) {
            Err(Error::MaxIterations { report }) => {
                assert!(!report.converged);
                assert_eq!(report.iterations, 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn deterministic_reports() {
        let c = real(3, &[2.0, 1.0, 0.0, 1.0, 2.0, 0.5, 0.0, 0.5, 1.0]);
        let p = HermitianSdp::new(
            c,
            vec![Constraint {
                matrix: CMatrix::identity(3, 3),
                rhs: 1.0,
            }],
        )
        .unwrap();
        let opts = SdpOptions {
            record_trace: true,
            ..SdpOptions::default()
        };
        let a = solve_sdp(&p, &opts).unwrap();
        let b = solve_sdp(&p, &opts).unwrap();
        assert_eq!(a.report, b.report);
        assert_eq!(a.trace, b.trace);
        let mut out = Vec::new();
        a.write_trace_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("iteration,primal,dual,primal_residual,dual_residual,penalty"));
    }
}
