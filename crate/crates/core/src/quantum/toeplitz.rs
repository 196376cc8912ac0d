//! Expansion of an operator on the product span in coherent-state dyads
//! `|x_i; y_j⟩⟨x_k; y_l|`.

use crate::gaussian::{CoherentPoint, OrthonormalBasis};
use crate::linalg::kron;
use crate::{CMatrix, Error, Result};

use super::Coupling;

const REPRESENTABLE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzAnalysis {
    points_x: Vec<CoherentPoint>,
    points_y: Vec<CoherentPoint>,
    coefficients: CMatrix,
    is_representable: bool,
    off_diagonal_norm: f64,
    reconstruction_error: f64,
}

impl ToeplitzAnalysis {
    /// `q_{i,j,k,l}` in `Q = Σ q_{i,j,k,l} |x_i; y_j⟩⟨x_k; y_l|`.
    pub fn coefficient(&self, i: usize, j: usize, k: usize, l: usize) -> crate::C64 {
        let n = self.points_y.len();
        self.coefficients[(i * n + j, k * n + l)]
    }

    /// Coefficient matrix with row `(i, j)` and column `(k, l)`, row-major.
    pub fn coefficients(&self) -> &CMatrix {
        &self.coefficients
    }

    /// Off-diagonal dyads vanish and diagonal weights are nonnegative.
    pub fn is_representable(&self) -> bool {
        self.is_representable
    }

    /// Frobenius norm of the off-diagonal coefficients.
    pub fn off_diagonal_norm(&self) -> f64 {
        self.off_diagonal_norm
    }

    /// Frobenius error of mapping the coefficients back to the matrix.
    pub fn reconstruction_error(&self) -> f64 {
        self.reconstruction_error
    }

    /// Point pairs with their diagonal weights above `threshold`.
    pub fn symbol(&self, threshold: f64) -> Vec<(CoherentPoint, CoherentPoint, f64)> {
        let n = self.points_y.len();
        let mut out = Vec::new();
        for (i, &x) in self.points_x.iter().enumerate() {
            for (j, &y) in self.points_y.iter().enumerate() {
                let w = self.coefficients[(i * n + j, i * n + j)].re;
                if w.abs() > threshold {
                    out.push((x, y, w));
                }
            }
        }
        out
    }
}

pub fn toeplitz_analysis(coupling: &Coupling) -> Result<ToeplitzAnalysis> {
    toeplitz_coefficients(coupling.basis_x(), coupling.basis_y(), coupling.matrix())
}

/// Works for any operator on the product span, PSD or not.
pub fn toeplitz_coefficients(
    basis_x: &OrthonormalBasis,
    basis_y: &OrthonormalBasis,
    matrix: &CMatrix,
) -> Result<ToeplitzAnalysis> {
    let (bx, by) = (basis_x.change_of_frame(), basis_y.change_of_frame());
    if bx.nrows() != bx.ncols() || by.nrows() != by.ncols() {
        return Err(Error::SingularFrame);
    }
    let dim = bx.ncols() * by.ncols();
    if matrix.nrows() != dim || matrix.ncols() != dim {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{}, product basis has dimension {dim}",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    let frame = kron(bx, by);
    let coefficients = &frame * matrix * frame.adjoint();

    // (B_x ⊗ B_y)⁻¹ = (B_x† G_x) ⊗ (B_y† G_y)
    let inverse = kron(&basis_x.frame_coordinates(), &basis_y.frame_coordinates());
    let back = &inverse * &coefficients * inverse.adjoint();
    let reconstruction_error = (back - matrix).norm();
    if reconstruction_error.is_nan() || reconstruction_error > 1e-8 * (1.0 + matrix.norm()) {
        return Err(Error::SingularFrame);
    }

    let mut off = 0.0;
    let mut diagonal_ok = true;
    for r in 0..dim {
        for c in 0..dim {
            let z = coefficients[(r, c)];
            if r == c {
                diagonal_ok &=
                    z.re >= -REPRESENTABLE_TOLERANCE && z.im.abs() <= REPRESENTABLE_TOLERANCE;
            } else {
                off += z.norm_sqr();
            }
        }
    }
    let max_off = (0..dim)
        .flat_map(|r| (0..dim).filter(move |&c| c != r).map(move |c| (r, c)))
        .map(|(r, c)| coefficients[(r, c)].norm())
        .fold(0.0_f64, f64::max);
    Ok(ToeplitzAnalysis {
        points_x: basis_x.points().to_vec(),
        points_y: basis_y.points().to_vec(),
        is_representable: diagonal_ok && max_off <= REPRESENTABLE_TOLERANCE,
        off_diagonal_norm: off.sqrt(),
        reconstruction_error,
        coefficients,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::PhaseSpaceContext;
    use crate::quantum::{build_named_coupling, CouplingKind, Scenario};

    #[test]
    fn optimal_equal_mass_coupling_is_representable() {
        let ctx = PhaseSpaceContext::new(1.0).unwrap();
        let built = build_named_coupling(
            &ctx,
            &Scenario::EqualMass { a: 1.0, b: 2.0 },
            CouplingKind::EqualMassOptimal,
        )
        .unwrap();
        let t = toeplitz_analysis(built.coupling().unwrap()).unwrap();
        assert!(t.is_representable());
        let symbol = t.symbol(1e-9);
        assert_eq!(symbol.len(), 2);
        for (x, y, w) in symbol {
            assert!((w - 0.5).abs() < 1e-9);
            assert_eq!(x.q().signum(), y.q().signum());
        }
    }

    #[test]
    fn correction_is_not_representable() {
        let ctx = PhaseSpaceContext::new(1.0).unwrap();
        let s = Scenario::UnequalMass { a: 1.0, eta: 0.5 };
        let setup = s.setup(&ctx).unwrap();
        let q = build_named_coupling(&ctx, &s, CouplingKind::Qq).unwrap();
        let t =
            toeplitz_coefficients(setup.cost.basis_x(), setup.cost.basis_y(), q.matrix()).unwrap();
        assert!(!t.is_representable());
        assert!(t.off_diagonal_norm() > 0.1);
    }
}
