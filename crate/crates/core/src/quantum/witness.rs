//! Dual certificates `A ⊗ I + I ⊗ B ⪯ C` with bound `trace(RA + SB)`.

use crate::cost::{CostMatrix, SymmetricPairCost};
use crate::gaussian::{DensityMatrix, OrthonormalBasis, PhaseSpaceContext};
use crate::linalg::{
    ensure_hermitian, hermitian_eig, hermitian_part, identity, kron, trace_product,
};
use crate::{CMatrix, Error, Result, C64};

use super::{range_vectors, Scenario};

#[derive(Debug, Clone, PartialEq)]
pub struct DualWitness {
    basis_x: OrthonormalBasis,
    basis_y: OrthonormalBasis,
    a: CMatrix,
    b: CMatrix,
    bound: f64,
    slack_spectrum: Vec<f64>,
}

impl DualWitness {
    pub const VALIDITY_TOLERANCE: f64 = 1e-9;

    pub fn new(
        cost: &CostMatrix,
        a: CMatrix,
        b: CMatrix,
        r: &DensityMatrix,
        s: &DensityMatrix,
    ) -> Result<Self> {
        let (m, n) = cost.dims();
        if a.nrows() != m || b.nrows() != n || r.dim() != m || s.dim() != n {
            return Err(Error::DimensionMismatch(
                "witness, marginals and cost disagree on dimensions".into(),
            ));
        }
        ensure_hermitian(&a, 1e-10)?;
        ensure_hermitian(&b, 1e-10)?;
        let (a, b) = (hermitian_part(&a), hermitian_part(&b));
        let slack = cost.matrix() - kron(&a, &identity(n)) - kron(&identity(m), &b);
        let face = kron(&range_vectors(r.matrix())?, &range_vectors(s.matrix())?);
        let restricted = hermitian_part(&(face.adjoint() * slack * &face));
        let slack_spectrum = hermitian_eig(&restricted)?.values.as_slice().to_vec();
        Ok(Self {
            basis_x: cost.basis_x().clone(),
            basis_y: cost.basis_y().clone(),
            bound: trace_product(r.matrix(), &a) + trace_product(s.matrix(), &b),
            a,
            b,
            slack_spectrum,
        })
    }

    pub fn basis_x(&self) -> &OrthonormalBasis {
        &self.basis_x
    }

    pub fn basis_y(&self) -> &OrthonormalBasis {
        &self.basis_y
    }

    pub fn a(&self) -> &CMatrix {
        &self.a
    }

    pub fn b(&self) -> &CMatrix {
        &self.b
    }

    /// `trace(RA + SB)`.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// Eigenvalues of `C − A⊗I − I⊗B` on `range(R) ⊗ range(S)`, ascending.
    /// Every coupling lives on that subspace, so this is the condition
    /// that makes `bound` a lower bound.
    pub fn slack_spectrum(&self) -> &[f64] {
        &self.slack_spectrum
    }

    pub fn min_slack(&self) -> f64 {
        self.slack_spectrum.first().copied().unwrap_or(0.0)
    }

    pub fn is_valid(&self) -> bool {
        self.min_slack() >= -Self::VALIDITY_TOLERANCE
    }
}

/// The diagonal dual ansatz for equal masses, solved in closed form.
///
/// `x`, `f_x` and the barred entries refer to the oriented problem with the
/// smaller half-distance first; `alpha`, `beta` are the diagonals of `A`, `B`
/// for the problem as posed (in the `{φ+, φ−}`, `{ψ+, ψ−}` bases).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EqualMassDual {
    pub x: f64,
    pub f_x: f64,
    pub a_bar: f64,
    pub b_bar: f64,
    pub c_bar: f64,
    pub d_bar: f64,
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
    /// `−√((ā−d̄)² + 4γ²) − x` and `−√((b̄−c̄)² + 4δ²) − x`; zero when saturated.
    pub conditions: [f64; 2],
    pub swapped: bool,
}

/// `x/2 + ¼(λ+μ)√(x² − 4γ²) + ¼(λ−μ)√(x² − 4δ²)`.
pub fn dual_objective(x: f64, cost: &SymmetricPairCost) -> f64 {
    let (l, m) = (cost.lambda, cost.mu);
    x / 2.0
        + 0.25 * (l + m) * (x * x - 4.0 * cost.gamma * cost.gamma).max(0.0).sqrt()
        + 0.25 * (l - m) * (x * x - 4.0 * cost.delta * cost.delta).max(0.0).sqrt()
}

pub fn equal_mass_dual_parameters(ctx: &PhaseSpaceContext, a: f64, b: f64) -> EqualMassDual {
    let swapped = a > b;
    let (lo, hi) = if swapped { (b, a) } else { (a, b) };
    let c = SymmetricPairCost::closed_form(ctx, lo, hi);
    let (l2, m2) = (c.lambda * c.lambda, c.mu * c.mu);
    let x = -4.0 * lo * hi * (1.0 - l2 * m2) / ((1.0 - l2) * (1.0 - m2));
    let root_g = (x * x - 4.0 * c.gamma * c.gamma).max(0.0).sqrt();
    let root_d = (x * x - 4.0 * c.delta * c.delta).max(0.0).sqrt();
    let a_bar = 0.5 * (x + root_g);
    let d_bar = 0.5 * (x - root_g);
    let b_bar = 0.5 * (x + root_d);
    let c_bar = 0.5 * (x - root_d);
    // gauge α₂ = 0
    let beta1 = c_bar + c.entry_c;
    let beta2 = d_bar + c.entry_d;
    let alpha1 = a_bar + c.entry_a - beta1;
    let conditions = [
        -((a_bar - d_bar).powi(2) + 4.0 * c.gamma * c.gamma).sqrt() - (a_bar + d_bar),
        -((b_bar - c_bar).powi(2) + 4.0 * c.delta * c.delta).sqrt() - (b_bar + c_bar),
    ];
    let (alpha, beta) = if swapped {
        ([beta1, beta2], [alpha1, 0.0])
    } else {
        ([alpha1, 0.0], [beta1, beta2])
    };
    EqualMassDual {
        x,
        f_x: dual_objective(x, &c),
        a_bar,
        b_bar,
        c_bar,
        d_bar,
        alpha,
        beta,
        conditions,
        swapped,
    }
}

/// The closed-form witness, checked against the numerically compressed cost.
pub fn equal_mass_dual_witness(ctx: &PhaseSpaceContext, a: f64, b: f64) -> Result<DualWitness> {
    let setup = Scenario::EqualMass { a, b }.setup(ctx)?;
    let p = equal_mass_dual_parameters(ctx, a, b);
    let diag = |d: [f64; 2]| {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = C64::new(d[0], 0.0);
        m[(1, 1)] = C64::new(d[1], 0.0);
        m
    };
    DualWitness::new(&setup.cost, diag(p.alpha), diag(p.beta), &setup.r, &setup.s)
}
