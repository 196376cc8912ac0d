//! Quantum couplings between two coherent-state density matrices.
//!
//! All operators live on `span{x_i} ⊗ span{y_j}` written in the product of
//! the two orthonormal bases, row-major (`(k, l) ↦ k·dim_y + l`).

mod ansatz;
mod mk2;
mod named;
mod toeplitz;
mod witness;

pub use ansatz::{block_determinant, inner_objective, maximize_inner, p_domain, AnsatzParameters};
pub use mk2::{coupling_sdp, mk2_squared, mk2_squared_with, Mk2Options, Mk2Solution};
pub use named::{
    build_named_coupling, checkerboard_quarter, max_feasible_eps, quantize_plan,
    quantum_correction, BuiltCoupling, CouplingKind,
};
pub use toeplitz::{toeplitz_analysis, toeplitz_coefficients, ToeplitzAnalysis};
pub use witness::{
    equal_mass_dual_parameters, equal_mass_dual_witness, DualWitness, EqualMassDual,
};

use crate::cost::{cost_matrix, CostMatrix};
use crate::gaussian::{
    assemble_toeplitz_density, orthonormalize, DensityMatrix, OrthonormalBasis, PhaseSpaceContext,
    WeightedConfiguration,
};
use crate::linalg::{ensure_hermitian, hermitian_part, min_eigenvalue, real_trace, trace_product};
use crate::{CMatrix, Error, Result, C64};

/// Which tensor factor a partial trace removes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    First,
    Second,
}

/// Traces out `side` of a matrix on a `dims.0 × dims.1` product space.
pub fn partial_trace(matrix: &CMatrix, dims: (usize, usize), side: Factor) -> Result<CMatrix> {
    let (m, n) = dims;
    if matrix.nrows() != m * n || matrix.ncols() != m * n {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix does not factor as {m}·{n}",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    Ok(match side {
        Factor::First => CMatrix::from_fn(n, n, |j, l| {
            (0..m).map(|i| matrix[(i * n + j, i * n + l)]).sum()
        }),
        Factor::Second => CMatrix::from_fn(m, m, |i, k| {
            (0..n).map(|j| matrix[(i * n + j, k * n + j)]).sum()
        }),
    })
}

/// Positive trace-one operator on the product basis with prescribed marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    basis_x: OrthonormalBasis,
    basis_y: OrthonormalBasis,
    matrix: CMatrix,
    marginal_x: CMatrix,
    marginal_y: CMatrix,
    value: f64,
}

impl Coupling {
    pub const PSD_TOLERANCE: f64 = 1e-10;
    pub const TRACE_TOLERANCE: f64 = 1e-10;
    pub const MARGINAL_TOLERANCE: f64 = 1e-9;

    /// Validates `matrix` as a coupling of `r` and `s`.
    pub fn new(
        cost: &CostMatrix,
        matrix: CMatrix,
        r: &DensityMatrix,
        s: &DensityMatrix,
    ) -> Result<Self> {
        if r.basis() != cost.basis_x() || s.basis() != cost.basis_y() {
            return Err(Error::BasisMismatch(
                "marginals and cost use different bases".into(),
            ));
        }
        Self::with_marginals(cost, matrix, r.matrix().clone(), s.matrix().clone())
    }

    /// Like [`Coupling::new`] with explicit marginal matrices.
    pub fn with_marginals(
        cost: &CostMatrix,
        matrix: CMatrix,
        marginal_x: CMatrix,
        marginal_y: CMatrix,
    ) -> Result<Self> {
        let dims = cost.dims();
        ensure_hermitian(&matrix, 1e-10)?;
        let matrix = hermitian_part(&matrix);
        if marginal_x.nrows() != dims.0 || marginal_y.nrows() != dims.1 {
            return Err(Error::DimensionMismatch(
                "marginal sizes differ from the bases".into(),
            ));
        }
        let trace = real_trace(&matrix);
        if (trace - 1.0).abs() > Self::TRACE_TOLERANCE {
            return Err(Error::InvalidCoupling(format!("trace {trace}")));
        }
        let min = min_eigenvalue(&matrix)?;
        if min < -Self::PSD_TOLERANCE {
            return Err(Error::InvalidCoupling(format!("eigenvalue {min:e}")));
        }
        let coupling = Self {
            basis_x: cost.basis_x().clone(),
            basis_y: cost.basis_y().clone(),
            value: trace_product(cost.matrix(), &matrix),
            matrix,
            marginal_x,
            marginal_y,
        };
        let defect = coupling.marginal_defect();
        if defect > Self::MARGINAL_TOLERANCE {
            return Err(Error::InvalidCoupling(format!(
                "marginal defect {defect:e}"
            )));
        }
        Ok(coupling)
    }

    pub fn basis_x(&self) -> &OrthonormalBasis {
        &self.basis_x
    }

    pub fn basis_y(&self) -> &OrthonormalBasis {
        &self.basis_y
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn marginal_x(&self) -> &CMatrix {
        &self.marginal_x
    }

    pub fn marginal_y(&self) -> &CMatrix {
        &self.marginal_y
    }

    /// `trace(C Q)`.
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.basis_x.dim(), self.basis_y.dim())
    }

    /// Largest entry of the two marginal residuals.
    pub fn marginal_defect(&self) -> f64 {
        let dims = self.dims();
        let tx = partial_trace(&self.matrix, dims, Factor::Second).expect("square product");
        let ty = partial_trace(&self.matrix, dims, Factor::First).expect("square product");
        let dx = (tx - &self.marginal_x)
            .iter()
            .fold(0.0_f64, |m, z| m.max(z.norm()));
        let dy = (ty - &self.marginal_y)
            .iter()
            .fold(0.0_f64, |m, z| m.max(z.norm()));
        dx.max(dy)
    }
}

/// Two weighted configurations with everything derived from them.
#[derive(Debug, Clone)]
pub struct Setup {
    pub ctx: PhaseSpaceContext,
    pub x: WeightedConfiguration,
    pub y: WeightedConfiguration,
    pub r: DensityMatrix,
    pub s: DensityMatrix,
    pub cost: CostMatrix,
}

impl Setup {
    pub fn new(
        ctx: &PhaseSpaceContext,
        x: &WeightedConfiguration,
        y: &WeightedConfiguration,
    ) -> Result<Self> {
        let bx = orthonormalize(ctx, x)?;
        let by = orthonormalize(ctx, y)?;
        let r = assemble_toeplitz_density(ctx, x, &bx)?;
        let s = assemble_toeplitz_density(ctx, y, &by)?;
        let cost = cost_matrix(ctx, &bx, &by)?;
        Ok(Self {
            ctx: *ctx,
            x: x.clone(),
            y: y.clone(),
            r,
            s,
            cost,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.cost.dims()
    }
}

/// The two-point scenarios with closed-form analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scenario {
    /// `½(δ₋ₐ + δₐ)` to `½(δ₋b + δb)`.
    EqualMass { a: f64, b: f64 },
    /// `((1−η)/2) δ₋ₐ + ((1+η)/2) δₐ` to `½(δ₋ₐ + δₐ)`.
    UnequalMass { a: f64, eta: f64 },
}

impl Scenario {
    pub fn configurations(&self) -> Result<(WeightedConfiguration, WeightedConfiguration)> {
        match *self {
            Scenario::EqualMass { a, b } => {
                positive(a, "a")?;
                positive(b, "b")?;
                Ok((
                    WeightedConfiguration::symmetric_pair(a, 0.5, 0.5)?,
                    WeightedConfiguration::symmetric_pair(b, 0.5, 0.5)?,
                ))
            }
            Scenario::UnequalMass { a, eta } => {
                positive(a, "a")?;
                if !(eta > 0.0 && eta < 1.0) {
                    return Err(Error::InvalidConfiguration(format!(
                        "eta must lie in (0, 1), got {eta}"
                    )));
                }
                Ok((
                    WeightedConfiguration::symmetric_pair(a, (1.0 - eta) / 2.0, (1.0 + eta) / 2.0)?,
                    WeightedConfiguration::symmetric_pair(a, 0.5, 0.5)?,
                ))
            }
        }
    }

    pub fn setup(&self, ctx: &PhaseSpaceContext) -> Result<Setup> {
        let (x, y) = self.configurations()?;
        Setup::new(ctx, &x, &y)
    }

    /// `(λ, μ)`; for the unequal-mass case both equal `e^{−a²/ℏ}`.
    pub fn overlaps(&self, ctx: &PhaseSpaceContext) -> (f64, f64) {
        let h = ctx.hbar();
        match *self {
            Scenario::EqualMass { a, b } => ((-a * a / h).exp(), (-b * b / h).exp()),
            Scenario::UnequalMass { a, .. } => {
                let l = (-a * a / h).exp();
                (l, l)
            }
        }
    }
}

fn positive(v: f64, name: &str) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::NonFinite("scenario parameter"));
    }
    if v <= 0.0 {
        return Err(Error::InvalidConfiguration(format!(
            "{name} must be positive, got {v}"
        )));
    }
    Ok(())
}

/// Eigenvalues of `R` or `S` below this count as outside the range.
pub const RANGE_CUTOFF: f64 = 1e-12;

/// Orthonormal columns spanning the eigenvectors with eigenvalue above
/// [`RANGE_CUTOFF`].
pub fn range_vectors(m: &CMatrix) -> Result<CMatrix> {
    let eig = crate::linalg::hermitian_eig(m)?;
    let keep: Vec<usize> = (0..eig.values.len())
        .filter(|&k| eig.values[k] > RANGE_CUTOFF)
        .collect();
    if keep.is_empty() {
        return Err(Error::NumericalBreakdown("matrix has empty range".into()));
    }
    Ok(CMatrix::from_fn(m.nrows(), keep.len(), |i, j| {
        eig.vectors[(i, keep[j])]
    }))
}

pub(crate) fn real_matrix(rows: usize, data: &[f64]) -> CMatrix {
    CMatrix::from_iterator(rows, rows, data.iter().map(|&x| C64::new(x, 0.0))).transpose()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::kron;

    #[test]
    fn partial_traces_of_product_state() {
        let r = real_matrix(2, &[0.7, 0.1, 0.1, 0.3]);
        let s = real_matrix(3, &[0.5, 0.0, 0.1, 0.0, 0.25, 0.0, 0.1, 0.0, 0.25]);
        let p = kron(&r, &s);
        assert!((partial_trace(&p, (2, 3), Factor::First).unwrap() - &s).norm() < 1e-15);
        assert!((partial_trace(&p, (2, 3), Factor::Second).unwrap() - &r).norm() < 1e-15);
        assert!(partial_trace(&p, (3, 3), Factor::First).is_err());
    }

    #[test]
    fn real_matrix_is_row_major() {
        let m = real_matrix(2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m[(0, 1)].re, 2.0);
        assert_eq!(m[(1, 0)].re, 3.0);
    }

    #[test]
    fn scenario_validation() {
        assert!(Scenario::EqualMass { a: 0.0, b: 1.0 }
            .configurations()
            .is_err());
        assert!(Scenario::UnequalMass { a: 1.0, eta: 1.0 }
            .configurations()
            .is_err());
        let (x, _) = Scenario::UnequalMass { a: 1.0, eta: 0.5 }
            .configurations()
            .unwrap();
        assert_eq!(x.weights(), &[0.25, 0.75]);
    }
}
