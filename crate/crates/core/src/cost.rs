//! The transport cost operator `C = (p̂⊗I − I⊗p̂)² + (q̂⊗I − I⊗q̂)² − 2ℏ`
//! between coherent-state products, and its compression to a finite
//! orthonormal product basis.

use crate::gaussian::{moments, CoherentPoint, OrthonormalBasis, PhaseSpaceContext};
use crate::linalg::{ensure_hermitian, hermitian_part};
use crate::{CMatrix, Error, Result, C64};

/// `⟨z₁; z₂| C |z₃; z₄⟩`.
///
/// Expanding the squares, `C = p̂²⊗I + I⊗p̂² − 2 p̂⊗p̂ + q̂²⊗I + I⊗q̂² − 2 q̂⊗q̂ − 2ℏ`,
/// and every term factorizes over the two tensor slots.
pub fn pair_cost_element(
    ctx: &PhaseSpaceContext,
    z1: &CoherentPoint,
    z2: &CoherentPoint,
    z3: &CoherentPoint,
    z4: &CoherentPoint,
) -> C64 {
    let left = moments(ctx, z1, z3);
    let right = moments(ctx, z2, z4);
    let (o1, o2) = (left.overlap, right.overlap);
    left.p2 * o2 + o1 * right.p2 - left.p * right.p * 2.0 + left.x2 * o2 + o1 * right.x2
        - left.x * right.x * 2.0
        - o1 * o2 * (2.0 * ctx.hbar())
}

/// Compressed cost on `basis_x ⊗ basis_y`, row-major pair order
/// (`(k, l) ↦ k·dim_y + l`).
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    basis_x: OrthonormalBasis,
    basis_y: OrthonormalBasis,
    matrix: CMatrix,
}

impl CostMatrix {
    pub fn basis_x(&self) -> &OrthonormalBasis {
        &self.basis_x
    }

    pub fn basis_y(&self) -> &OrthonormalBasis {
        &self.basis_y
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.basis_x.dim(), self.basis_y.dim())
    }

    /// Cost matrix between the coherent product states themselves,
    /// indexed by point pairs `(i, j)` in row-major order.
    pub fn coherent_frame(&self) -> CMatrix {
        coherent_cost(
            self.basis_x.context(),
            self.basis_x.points(),
            self.basis_y.points(),
        )
    }
}

fn coherent_cost(ctx: &PhaseSpaceContext, xs: &[CoherentPoint], ys: &[CoherentPoint]) -> CMatrix {
    let (m, n) = (xs.len(), ys.len());
    CMatrix::from_fn(m * n, m * n, |r, c| {
        let (i, j) = (r / n, r % n);
        let (k, l) = (c / n, c % n);
        pair_cost_element(ctx, &xs[i], &ys[j], &xs[k], &ys[l])
    })
}

/// `(B_x ⊗ B_y)† · [⟨x_i; y_j|C|x_k; y_l⟩] · (B_x ⊗ B_y)`.
pub fn cost_matrix(
    ctx: &PhaseSpaceContext,
    basis_x: &OrthonormalBasis,
    basis_y: &OrthonormalBasis,
) -> Result<CostMatrix> {
    if basis_x.context() != ctx || basis_y.context() != ctx {
        return Err(Error::BasisMismatch("bases built with another hbar".into()));
    }
    let raw = coherent_cost(ctx, basis_x.points(), basis_y.points());
    let frame = basis_x
        .change_of_frame()
        .kronecker(basis_y.change_of_frame());
    let compressed = frame.adjoint() * raw * &frame;
    ensure_hermitian(&compressed, 1e-10)?;
    Ok(CostMatrix {
        basis_x: basis_x.clone(),
        basis_y: basis_y.clone(),
        matrix: hermitian_part(&compressed),
    })
}

/// The named entries of the 4×4 compressed cost between the symmetric pairs
/// `{±a}` and `{±b}` in the basis `{φ+ψ+, φ+ψ−, φ−ψ+, φ−ψ−}`:
///
/// ```text
///   ⎡ A 0 0 γ ⎤
///   ⎢ 0 B δ 0 ⎥
///   ⎢ 0 δ C 0 ⎥
///   ⎣ γ 0 0 D ⎦
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricPairCost {
    pub a: f64,
    pub b: f64,
    pub lambda: f64,
    pub mu: f64,
    pub entry_a: f64,
    pub entry_b: f64,
    pub entry_c: f64,
    pub entry_d: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl SymmetricPairCost {
    /// Closed forms in terms of `λ = e^{−a²/ℏ}` and `μ = e^{−b²/ℏ}`.
    pub fn closed_form(ctx: &PhaseSpaceContext, a: f64, b: f64) -> Self {
        let h = ctx.hbar();
        let lambda = (-a * a / h).exp();
        let mu = (-b * b / h).exp();
        let (a2, b2) = (a * a, b * b);
        let x_even = (1.0 - lambda) / (1.0 + lambda);
        let y_even = (1.0 - mu) / (1.0 + mu);
        let root = ((1.0 - lambda * lambda) * (1.0 - mu * mu)).sqrt();
        Self {
            a,
            b,
            lambda,
            mu,
            entry_a: a2 * x_even + b2 * y_even,
            entry_b: a2 * x_even + b2 / y_even,
            entry_c: a2 / x_even + b2 * y_even,
            entry_d: a2 / x_even + b2 / y_even,
            gamma: -2.0 * a * b * (1.0 - lambda * mu) / root,
            delta: -2.0 * a * b * (1.0 + lambda * mu) / root,
        }
    }

    /// The `λ = μ = 0` limit: diagonal `a² + b²`, anti-diagonal `−2ab`.
    pub fn semiclassical(a: f64, b: f64) -> Self {
        let diag = a * a + b * b;
        Self {
            a,
            b,
            lambda: 0.0,
            mu: 0.0,
            entry_a: diag,
            entry_b: diag,
            entry_c: diag,
            entry_d: diag,
            gamma: -2.0 * a * b,
            delta: -2.0 * a * b,
        }
    }

    pub fn to_matrix(&self) -> CMatrix {
        let r = |x: f64| C64::new(x, 0.0);
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = r(self.entry_a);
        m[(1, 1)] = r(self.entry_b);
        m[(2, 2)] = r(self.entry_c);
        m[(3, 3)] = r(self.entry_d);
        m[(0, 3)] = r(self.gamma);
        m[(3, 0)] = r(self.gamma);
        m[(1, 2)] = r(self.delta);
        m[(2, 1)] = r(self.delta);
        m
    }

    /// `A+B+C+D + λ(A+B−C−D) + μ(A−B+C−D)`, equal to `4(a²+b²)`.
    pub fn w_prime(&self) -> f64 {
        let (a, b, c, d) = (self.entry_a, self.entry_b, self.entry_c, self.entry_d);
        a + b + c + d + self.lambda * (a + b - c - d) + self.mu * (a - b + c - d)
    }
}
