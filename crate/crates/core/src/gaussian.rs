//! Coherent states on the line, their overlaps and one-body moments, and the
//! finite-dimensional density matrices they generate.
//!
//! The coherent state at `(q, p)` is `⟨x|q,p⟩ = (πℏ)^{-1/4} e^{-(x−q)²/2ℏ} e^{ipx/ℏ}`.
//! Every matrix element needed here is a Gaussian integral with closed form:
//! writing `c = (q₁+q₂)/2 + i(p₂−p₁)/2` for the complex centre of
//! `conj(ψ₁)ψ₂`,
//!
//! ```text
//! ⟨z₁|z₂⟩    = exp(−((q₁−q₂)² + (p₁−p₂)²)/4ℏ + i(p₂−p₁)(q₁+q₂)/2ℏ)
//! ⟨z₁|x̂|z₂⟩  = ⟨z₁|z₂⟩ · c
//! ⟨z₁|x̂²|z₂⟩ = ⟨z₁|z₂⟩ · (c² + ℏ/2)
//! ⟨z₁|p̂|z₂⟩  = ⟨z₁|z₂⟩ · (p₂ + i(c − q₂))
//! ⟨z₁|p̂²|z₂⟩ = ⟨z₁|z₂⟩ · ((p₂ + i(c − q₂))² + ℏ/2)
//! ```

use serde::{Deserialize, Serialize};

use crate::linalg::{hermitian_eig, hermitian_part, HermitianEigen};
use crate::{CMatrix, Error, Result, C64};

/// Weights must sum to one within this tolerance.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;
/// Gram eigenvalues below this are rejected as near-dependent.
pub const NEAR_DEPENDENCE_CUTOFF: f64 = 1e-10;

/// Planck parameter; configuration space is one-dimensional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceContext {
    hbar: f64,
}

impl PhaseSpaceContext {
    pub const DIMENSION: usize = 1;

    pub fn new(hbar: f64) -> Result<Self> {
        if !hbar.is_finite() {
            return Err(Error::NonFinite("hbar"));
        }
        if hbar <= 0.0 {
            return Err(Error::InvalidContext(format!(
                "hbar must be positive, got {hbar}"
            )));
        }
        Ok(Self { hbar })
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn dimension(&self) -> usize {
        Self::DIMENSION
    }
}

/// Phase-space point `(q, p)` labelling a coherent state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct CoherentPoint {
    q: f64,
    p: f64,
}

impl CoherentPoint {
    pub fn new(q: f64, p: f64) -> Result<Self> {
        if !q.is_finite() || !p.is_finite() {
            return Err(Error::NonFinite("coherent point"));
        }
        Ok(Self { q, p })
    }

    /// Zero-momentum point.
    pub fn at(q: f64) -> Result<Self> {
        Self::new(q, 0.0)
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn distance_squared(&self, other: &Self) -> f64 {
        (self.q - other.q).powi(2) + (self.p - other.p).powi(2)
    }
}

impl TryFrom<[f64; 2]> for CoherentPoint {
    type Error = Error;

    fn try_from(value: [f64; 2]) -> Result<Self> {
        Self::new(value[0], value[1])
    }
}

impl From<CoherentPoint> for [f64; 2] {
    fn from(z: CoherentPoint) -> Self {
        [z.q, z.p]
    }
}

/// Phase-space points carrying probability weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedConfiguration {
    points: Vec<CoherentPoint>,
    weights: Vec<f64>,
}

impl WeightedConfiguration {
    pub fn new(points: Vec<CoherentPoint>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidConfiguration("no points".into()));
        }
        if points.len() != weights.len() {
            return Err(Error::InvalidConfiguration(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("weight"));
        }
        if let Some(w) = weights.iter().find(|&&w| w < 0.0) {
            return Err(Error::InvalidConfiguration(format!("negative weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::InvalidConfiguration(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                if points[i] == points[j] {
                    return Err(Error::InvalidConfiguration(format!(
                        "points {i} and {j} coincide"
                    )));
                }
            }
        }
        Ok(Self { points, weights })
    }

    /// Zero-momentum configuration from positions.
    pub fn on_line(positions: &[f64], weights: &[f64]) -> Result<Self> {
        let points = positions
            .iter()
            .map(|&q| CoherentPoint::at(q))
            .collect::<Result<Vec<_>>>()?;
        Self::new(points, weights.to_vec())
    }

    /// The pair `{(−a, 0), (a, 0)}` with weights `w₋`, `w₊`.
    pub fn symmetric_pair(a: f64, weight_minus: f64, weight_plus: f64) -> Result<Self> {
        Self::on_line(&[-a, a], &[weight_minus, weight_plus])
    }

    /// Single point carrying all the mass.
    pub fn single(point: CoherentPoint) -> Self {
        Self {
            points: vec![point],
            weights: vec![1.0],
        }
    }

    pub fn points(&self) -> &[CoherentPoint] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn has_zero_momenta(&self) -> bool {
        self.points.iter().all(|z| z.p == 0.0)
    }

    /// Same points and weights plus extra zero-weight points.
    pub fn with_spectators(&self, extra: &[CoherentPoint]) -> Result<Self> {
        let mut points = self.points.clone();
        let mut weights = self.weights.clone();
        points.extend_from_slice(extra);
        weights.extend(std::iter::repeat_n(0.0, extra.len()));
        Self::new(points, weights)
    }
}

/// JSON form `{"hbar": h, "points": [[q, p], ...], "weights": [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfigurationFile {
    pub hbar: f64,
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl ConfigurationFile {
    pub fn from_parts(ctx: &PhaseSpaceContext, config: &WeightedConfiguration) -> Self {
        Self {
            hbar: ctx.hbar(),
            points: config.points.iter().map(|&z| z.into()).collect(),
            weights: config.weights.clone(),
        }
    }

    pub fn into_parts(self) -> Result<(PhaseSpaceContext, WeightedConfiguration)> {
        let ctx = PhaseSpaceContext::new(self.hbar)?;
        let points = self
            .points
            .into_iter()
            .map(CoherentPoint::try_from)
            .collect::<Result<Vec<_>>>()?;
        Ok((ctx, WeightedConfiguration::new(points, self.weights)?))
    }
}

/// Matrix elements of `1, x̂, x̂², p̂, p̂²` between two coherent states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneBodyMoments {
    pub overlap: C64,
    pub x: C64,
    pub x2: C64,
    pub p: C64,
    pub p2: C64,
}

/// `⟨z₁|z₂⟩`.
pub fn overlap(ctx: &PhaseSpaceContext, z1: &CoherentPoint, z2: &CoherentPoint) -> C64 {
    let h = ctx.hbar();
    let dq = z1.q - z2.q;
    let dp = z2.p - z1.p;
    let modulus = -(dq * dq + dp * dp) / (4.0 * h);
    let phase = dp * (z1.q + z2.q) / (2.0 * h);
    C64::from_polar(modulus.exp(), phase)
}

/// `⟨z₁|A|z₂⟩` for `A ∈ {1, x̂, x̂², p̂, p̂²}`.
pub fn moments(ctx: &PhaseSpaceContext, z1: &CoherentPoint, z2: &CoherentPoint) -> OneBodyMoments {
    let h = ctx.hbar();
    let o = overlap(ctx, z1, z2);
    let centre = C64::new(0.5 * (z1.q + z2.q), 0.5 * (z2.p - z1.p));
    let shift = centre - z2.q;
    let g = C64::new(z2.p, 0.0) + C64::i() * shift;
    OneBodyMoments {
        overlap: o,
        x: o * centre,
        x2: o * (centre * centre + 0.5 * h),
        p: o * g,
        p2: o * (g * g + 0.5 * h),
    }
}

/// Pairwise overlaps `G_ij = ⟨z_i|z_j⟩`.
pub fn gram_matrix(ctx: &PhaseSpaceContext, config: &WeightedConfiguration) -> CMatrix {
    gram_of_points(ctx, config.points())
}

fn gram_of_points(ctx: &PhaseSpaceContext, points: &[CoherentPoint]) -> CMatrix {
    let n = points.len();
    CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(1.0, 0.0)
        } else {
            overlap(ctx, &points[i], &points[j])
        }
    })
}

/// Orthonormal basis of `span{|z_i⟩}`: `e_k = Σ_i B_ik |z_i⟩` with `B† G B = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    ctx: PhaseSpaceContext,
    source: WeightedConfiguration,
    gram: CMatrix,
    change_of_frame: CMatrix,
    gram_eigenvalues: Vec<f64>,
}

impl OrthonormalBasis {
    pub fn context(&self) -> &PhaseSpaceContext {
        &self.ctx
    }

    pub fn source(&self) -> &WeightedConfiguration {
        &self.source
    }

    pub fn points(&self) -> &[CoherentPoint] {
        self.source.points()
    }

    pub fn gram(&self) -> &CMatrix {
        &self.gram
    }

    /// Columns hold the coherent-state coefficients of each basis vector.
    pub fn change_of_frame(&self) -> &CMatrix {
        &self.change_of_frame
    }

    /// Gram eigenvalues, descending (the order of the basis vectors).
    pub fn gram_eigenvalues(&self) -> &[f64] {
        &self.gram_eigenvalues
    }

    pub fn dim(&self) -> usize {
        self.change_of_frame.ncols()
    }

    /// `B† G`: column `i` holds the coordinates of `|z_i⟩` in this basis.
    pub fn frame_coordinates(&self) -> CMatrix {
        self.change_of_frame.adjoint() * &self.gram
    }

    /// Coordinates `⟨e_k|z⟩` of an arbitrary coherent state projected on the span.
    pub fn coordinates_of(&self, z: &CoherentPoint) -> nalgebra::DVector<C64> {
        let overlaps = nalgebra::DVector::from_iterator(
            self.source.len(),
            self.source
                .points()
                .iter()
                .map(|zi| overlap(&self.ctx, zi, z)),
        );
        self.change_of_frame.adjoint() * overlaps
    }

    /// `B† G B − I`, Frobenius norm.
    pub fn orthonormality_defect(&self) -> f64 {
        let b = &self.change_of_frame;
        (b.adjoint() * &self.gram * b - CMatrix::identity(self.dim(), self.dim())).norm()
    }
}

/// Canonical orthonormalization from the Gram eigen-decomposition,
/// `B = V Λ^{-1/2}` with eigenvalues in descending order.
///
/// Each column's phase is fixed so that its largest-magnitude coefficient is
/// real and positive; near-ties go to the point with the larger `q`, then the
/// larger `p`. For the pair `{(−a,0), (a,0)}` this yields exactly
/// `φ± = (|a⟩ ± |−a⟩)/√(2(1 ± λ))`.
pub fn orthonormalize(
    ctx: &PhaseSpaceContext,
    config: &WeightedConfiguration,
) -> Result<OrthonormalBasis> {
    let gram = gram_matrix(ctx, config);
    let HermitianEigen { values, vectors } = hermitian_eig(&gram)?;
    let n = values.len();
    if let Some(&smallest) = values.first() {
        if smallest < NEAR_DEPENDENCE_CUTOFF {
            return Err(Error::NearDependentStates {
                eigenvalue: smallest,
                cutoff: NEAR_DEPENDENCE_CUTOFF,
            });
        }
    }
    let points = config.points();
    let mut change = CMatrix::zeros(n, n);
    let mut descending = Vec::with_capacity(n);
    for (col, k) in (0..n).rev().enumerate() {
        let scale = 1.0 / values[k].sqrt();
        let pivot = phase_pivot(points, |i| vectors[(i, k)]);
        let unit = vectors[(pivot, k)] / vectors[(pivot, k)].norm();
        let fix = unit.conj() * scale;
        for i in 0..n {
            change[(i, col)] = vectors[(i, k)] * fix;
        }
        descending.push(values[k]);
    }
    Ok(OrthonormalBasis {
        ctx: *ctx,
        source: config.clone(),
        gram,
        change_of_frame: change,
        gram_eigenvalues: descending,
    })
}

fn phase_pivot(points: &[CoherentPoint], coeff: impl Fn(usize) -> C64) -> usize {
    let largest = (0..points.len())
        .map(|i| coeff(i).norm())
        .fold(0.0_f64, f64::max);
    let tie = 1e-9 * largest.max(1e-300);
    let mut best = 0;
    for i in 1..points.len() {
        let (ci, cb) = (coeff(i).norm(), coeff(best).norm());
        let better = if (ci - cb).abs() <= tie {
            (points[i].q, points[i].p) > (points[best].q, points[best].p)
        } else {
            ci > cb
        };
        if better {
            best = i;
        }
    }
    best
}

/// Hermitian PSD trace-one matrix in an orthonormal coherent basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    basis: OrthonormalBasis,
    matrix: CMatrix,
}

impl DensityMatrix {
    pub const HERMITIAN_TOLERANCE: f64 = 1e-12;
    pub const EIGENVALUE_FLOOR: f64 = -1e-10;
    pub const TRACE_TOLERANCE: f64 = 1e-10;

    /// Validates and wraps a matrix expressed in `basis`.
    pub fn new(basis: OrthonormalBasis, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != basis.dim() || matrix.ncols() != basis.dim() {
            return Err(Error::DimensionMismatch(format!(
                "density is {}x{}, basis has dimension {}",
                matrix.nrows(),
                matrix.ncols(),
                basis.dim()
            )));
        }
        crate::linalg::ensure_hermitian(&matrix, Self::HERMITIAN_TOLERANCE)?;
        let matrix = hermitian_part(&matrix);
        let trace = crate::linalg::real_trace(&matrix);
        if (trace - 1.0).abs() > Self::TRACE_TOLERANCE {
            return Err(Error::InvalidConfiguration(format!(
                "density trace {trace}"
            )));
        }
        let min = crate::linalg::min_eigenvalue(&matrix)?;
        if min < Self::EIGENVALUE_FLOOR {
            return Err(Error::InvalidConfiguration(format!(
                "density has eigenvalue {min:e}"
            )));
        }
        Ok(Self { basis, matrix })
    }

    pub fn basis(&self) -> &OrthonormalBasis {
        &self.basis
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Matrix of `Σ w_i |z_i⟩⟨z_i|` in `basis`; the basis must be built on the
/// configuration's points (weights may differ).
pub fn assemble_toeplitz_density(
    ctx: &PhaseSpaceContext,
    config: &WeightedConfiguration,
    basis: &OrthonormalBasis,
) -> Result<DensityMatrix> {
    if basis.context() != ctx {
        return Err(Error::BasisMismatch("basis built with another hbar".into()));
    }
    if basis.points() != config.points() {
        return Err(Error::BasisMismatch(
            "basis points differ from configuration points".into(),
        ));
    }
    let frame = basis.frame_coordinates();
    let n = basis.dim();
    let mut matrix = CMatrix::zeros(n, n);
    for (i, &w) in config.weights().iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let col = frame.column(i);
        matrix += col * col.adjoint() * C64::new(w, 0.0);
    }
    DensityMatrix::new(basis.clone(), matrix)
}

/// Orthonormalizes and assembles in one step.
pub fn density_from_configuration(
    ctx: &PhaseSpaceContext,
    config: &WeightedConfiguration,
) -> Result<DensityMatrix> {
    let basis = orthonormalize(ctx, config)?;
    assemble_toeplitz_density(ctx, config, &basis)
}

/// Husimi density `(2πℏ)^{-1} ⟨z|R|z⟩`.
pub fn husimi(ctx: &PhaseSpaceContext, density: &DensityMatrix, z: &CoherentPoint) -> f64 {
    let v = density.basis().coordinates_of(z);
    let value = (v.adjoint() * density.matrix() * &v)[(0, 0)].re;
    value.max(0.0) / (2.0 * std::f64::consts::PI * ctx.hbar())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(h: f64) -> PhaseSpaceContext {
        PhaseSpaceContext::new(h).unwrap()
    }

    fn pt(q: f64, p: f64) -> CoherentPoint {
        CoherentPoint::new(q, p).unwrap()
    }

    #[test]
    fn context_rejects_bad_hbar() {
        assert!(PhaseSpaceContext::new(0.0).is_err());
        assert!(PhaseSpaceContext::new(-1.0).is_err());
        assert!(matches!(
            PhaseSpaceContext::new(f64::NAN),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn point_rejects_non_finite() {
        assert!(CoherentPoint::new(f64::INFINITY, 0.0).is_err());
        assert!(CoherentPoint::new(0.0, f64::NAN).is_err());
    }

    #[test]
    fn configuration_validation() {
        assert!(WeightedConfiguration::on_line(&[0.0, 1.0], &[0.5, 0.6]).is_err());
        assert!(WeightedConfiguration::on_line(&[0.0, 0.0], &[0.5, 0.5]).is_err());
        assert!(WeightedConfiguration::on_line(&[0.0, 1.0], &[1.5, -0.5]).is_err());
        assert!(WeightedConfiguration::on_line(&[0.0], &[0.5, 0.5]).is_err());
        assert!(WeightedConfiguration::on_line(&[], &[]).is_err());
        assert!(WeightedConfiguration::on_line(&[0.0, 1.0], &[0.25, 0.75]).is_ok());
    }

    #[test]
    fn unit_norm() {
        let z = pt(0.7, 0.0);
        assert!((overlap(&ctx(1.0), &z, &z) - C64::new(1.0, 0.0)).norm() < 1e-15);
        let w = pt(-0.3, 2.1);
        assert!((overlap(&ctx(0.3), &w, &w) - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn symmetric_pair_overlap() {
        let v = overlap(&ctx(1.0), &pt(1.0, 0.0), &pt(-1.0, 0.0));
        assert!((v.re - (-1.0f64).exp()).abs() < 1e-15);
        assert!(v.im.abs() < 1e-15);
    }

    #[test]
    fn single_point_basis_is_trivial() {
        let config = WeightedConfiguration::single(pt(0.4, 0.0));
        let basis = orthonormalize(&ctx(1.0), &config).unwrap();
        assert_eq!(basis.dim(), 1);
        assert!((basis.change_of_frame()[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-15);
        let rho = assemble_toeplitz_density(&ctx(1.0), &config, &basis).unwrap();
        assert!((rho.matrix()[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn pair_basis_is_phi_plus_minus() {
        let lam = (-1.0f64).exp();
        let config = WeightedConfiguration::symmetric_pair(1.0, 0.5, 0.5).unwrap();
        let basis = orthonormalize(&ctx(1.0), &config).unwrap();
        let b = basis.change_of_frame();
        let plus = 1.0 / (2.0 * (1.0 + lam)).sqrt();
        let minus = 1.0 / (2.0 * (1.0 - lam)).sqrt();
        // rows: points (−a, a); columns: φ+, φ−
        assert!((b[(0, 0)].re - plus).abs() < 1e-14);
        assert!((b[(1, 0)].re - plus).abs() < 1e-14);
        assert!((b[(0, 1)].re + minus).abs() < 1e-14);
        assert!((b[(1, 1)].re - minus).abs() < 1e-14);
        assert!(b.iter().all(|z| z.im.abs() < 1e-14));
    }

    #[test]
    fn pair_ordering_does_not_change_phi() {
        let config = WeightedConfiguration::on_line(&[1.0, -1.0], &[0.5, 0.5]).unwrap();
        let basis = orthonormalize(&ctx(1.0), &config).unwrap();
        let b = basis.change_of_frame();
        // point a is now first; φ− must still carry +|a⟩
        assert!(b[(0, 1)].re > 0.0 && b[(1, 1)].re < 0.0);
    }

    #[test]
    fn near_dependent_states_are_rejected() {
        let config = WeightedConfiguration::on_line(&[0.0, 1e-6], &[0.5, 0.5]).unwrap();
        assert!(matches!(
            orthonormalize(&ctx(1.0), &config),
            Err(Error::NearDependentStates { .. })
        ));
    }

    #[test]
    fn equal_weight_pair_density_spectrum() {
        let lam = (-1.0f64).exp();
        let rho = density_from_configuration(
            &ctx(1.0),
            &WeightedConfiguration::symmetric_pair(1.0, 0.5, 0.5).unwrap(),
        )
        .unwrap();
        let m = rho.matrix();
        assert!((m[(0, 0)].re - 0.5 * (1.0 + lam)).abs() < 1e-14);
        assert!((m[(1, 1)].re - 0.5 * (1.0 - lam)).abs() < 1e-14);
        assert!(m[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn unequal_weight_pair_density_entries() {
        let lam = (-1.0f64).exp();
        let eta = 0.5;
        let config =
            WeightedConfiguration::symmetric_pair(1.0, (1.0 - eta) / 2.0, (1.0 + eta) / 2.0)
                .unwrap();
        let rho = density_from_configuration(&ctx(1.0), &config).unwrap();
        let m = rho.matrix();
        let off = 0.5 * eta * (1.0 - lam * lam).sqrt();
        assert!((m[(0, 0)].re - 0.5 * (1.0 + lam)).abs() < 1e-14);
        assert!((m[(1, 1)].re - 0.5 * (1.0 - lam)).abs() < 1e-14);
        assert!((m[(0, 1)].re - off).abs() < 1e-14);
        assert!((m[(1, 0)].re - off).abs() < 1e-14);
    }

    #[test]
    fn mismatched_basis_is_rejected() {
        let c1 = WeightedConfiguration::symmetric_pair(1.0, 0.5, 0.5).unwrap();
        let c2 = WeightedConfiguration::symmetric_pair(2.0, 0.5, 0.5).unwrap();
        let basis = orthonormalize(&ctx(1.0), &c1).unwrap();
        assert!(matches!(
            assemble_toeplitz_density(&ctx(1.0), &c2, &basis),
            Err(Error::BasisMismatch(_))
        ));
        assert!(assemble_toeplitz_density(&ctx(2.0), &c1, &basis).is_err());
    }

    #[test]
    fn husimi_of_pure_state_at_its_centre() {
        let z = pt(1.0, 0.0);
        let rho = density_from_configuration(&ctx(1.0), &WeightedConfiguration::single(z)).unwrap();
        let v = husimi(&ctx(1.0), &rho, &z);
        assert!((v - 1.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-14);
    }

    #[test]
    fn configuration_json_round_trip() {
        let text =
            r#"{"hbar": 0.5, "points": [[-1.0, 0.0], [1.0, 0.25]], "weights": [0.25, 0.75]}"#;
        let file: ConfigurationFile = serde_json::from_str(text).unwrap();
        let (c, config) = file.into_parts().unwrap();
        assert_eq!(c.hbar(), 0.5);
        assert_eq!(config.points()[1], pt(1.0, 0.25));
        let back = serde_json::to_string(&ConfigurationFile::from_parts(&c, &config)).unwrap();
        let again: ConfigurationFile = serde_json::from_str(&back).unwrap();
        assert_eq!(again.into_parts().unwrap().1, config);
    }
}
