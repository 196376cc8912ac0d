//! Three-parameter family of equal-mass couplings on the 4-dimensional
//! product of the two symmetric-pair bases, and the checkerboard determinant.

use crate::cost::SymmetricPairCost;
use crate::linalg::trace_product;
use crate::{CMatrix, Error, Result, C64};

use super::named::checkerboard_quarter;

const GOLDEN_TOLERANCE: f64 = 1e-13;

/// Coordinates `(p, u, v)` of
///
/// ```text
///        ⎡ p+λ+μ    0       0      u   ⎤
/// Q₀ + ¼ ⎢   0   −p+λ−μ     v      0   ⎥
///        ⎢   0      v    −p−λ+μ    0   ⎥
///        ⎣   u      0       0   p−λ−μ  ⎦
/// ```
///
/// whose marginals are `R` and `S` for every value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnsatzParameters {
    pub p: f64,
    pub u: f64,
    pub v: f64,
}

impl AnsatzParameters {
    pub fn new(p: f64, u: f64, v: f64) -> Result<Self> {
        if !(p.is_finite() && u.is_finite() && v.is_finite()) {
            return Err(Error::NonFinite("ansatz parameter"));
        }
        Ok(Self { p, u, v })
    }

    /// `U`, `V` chosen to saturate both positivity conditions at `p`.
    pub fn saturating(p: f64, lambda: f64, mu: f64) -> Result<Self> {
        let (lo, hi) = p_domain(lambda, mu);
        if !(lo..=hi).contains(&p) {
            return Err(Error::InfeasibleAnsatz(format!(
                "p = {p} outside [{lo}, {hi}]"
            )));
        }
        let big_u = ((p + 1.0).powi(2) - (lambda + mu).powi(2)).max(0.0).sqrt();
        let big_v = ((p - 1.0).powi(2) - (lambda - mu).powi(2)).max(0.0).sqrt();
        Self::new(p, big_u - 1.0, big_v - 1.0)
    }

    /// The optimum `p = λμ`, `U = V = √((1−λ²)(1−μ²))`.
    pub fn optimal(lambda: f64, mu: f64) -> Self {
        Self::saturating(lambda * mu, lambda, mu).expect("λμ lies in the domain")
    }

    pub fn big_u(&self) -> f64 {
        1.0 + self.u
    }

    pub fn big_v(&self) -> f64 {
        1.0 + self.v
    }

    /// Bounds on `p` for positivity at the current `u`, `v`.
    pub fn window(&self, lambda: f64, mu: f64) -> (f64, f64) {
        (
            -1.0 + (lambda + mu).hypot(self.big_u()),
            1.0 - (lambda - mu).hypot(self.big_v()),
        )
    }

    pub fn is_feasible(&self, lambda: f64, mu: f64) -> bool {
        let (lo, hi) = self.window(lambda, mu);
        lo - 1e-12 <= self.p && self.p <= hi + 1e-12
    }

    pub fn matrix(&self, lambda: f64, mu: f64) -> CMatrix {
        let r = |x: f64| C64::new(0.25 * x, 0.0);
        let mut d = CMatrix::zeros(4, 4);
        d[(0, 0)] = r(self.p + lambda + mu);
        d[(1, 1)] = r(-self.p + lambda - mu);
        d[(2, 2)] = r(-self.p - lambda + mu);
        d[(3, 3)] = r(self.p - lambda - mu);
        d[(0, 3)] = r(self.u);
        d[(3, 0)] = r(self.u);
        d[(1, 2)] = r(self.v);
        d[(2, 1)] = r(self.v);
        checkerboard_quarter() + d
    }

    /// `trace(C Q)` against the 4×4 compressed cost.
    pub fn trace_cost(&self, cost: &SymmetricPairCost) -> f64 {
        trace_product(&cost.to_matrix(), &self.matrix(cost.lambda, cost.mu))
    }

    /// `(2γU + 2δV + W′)/4`, the same trace in closed form.
    pub fn trace_cost_closed_form(&self, cost: &SymmetricPairCost) -> f64 {
        let (a, b, c, d) = (cost.entry_a, cost.entry_b, cost.entry_c, cost.entry_d);
        (2.0 * cost.gamma * self.big_u()
            + 2.0 * cost.delta * self.big_v()
            + self.p * (a - b - c + d)
            + cost.w_prime())
            / 4.0
    }
}

/// Values of `p` for which both saturating `U`, `V` are real.
pub fn p_domain(lambda: f64, mu: f64) -> (f64, f64) {
    (lambda + mu - 1.0, 1.0 - (lambda - mu).abs())
}

/// `(1−λμ)√((p+1)² − (λ+μ)²) + (1+λμ)√((p−1)² − (λ−μ)²)`.
pub fn inner_objective(p: f64, lambda: f64, mu: f64) -> f64 {
    let lm = lambda * mu;
    (1.0 - lm) * ((p + 1.0).powi(2) - (lambda + mu).powi(2)).max(0.0).sqrt()
        + (1.0 + lm) * ((p - 1.0).powi(2) - (lambda - mu).powi(2)).max(0.0).sqrt()
}

/// Golden-section maximum of the (concave) inner objective over its domain.
pub fn maximize_inner(lambda: f64, mu: f64) -> (f64, f64) {
    let (mut lo, mut hi) = p_domain(lambda, mu);
    let ratio = (5.0_f64.sqrt() - 1.0) / 2.0;
    let f = |p: f64| inner_objective(p, lambda, mu);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > GOLDEN_TOLERANCE {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        }
    }
    let p = 0.5 * (lo + hi);
    (p, f(p))
}

/// `(a_{00} a_{33} − a_{03} a_{30}) (a_{11} a_{22} − a_{12} a_{21})` for a
/// 4×4 matrix supported on the checkerboard `{0,3} × {0,3} ∪ {1,2} × {1,2}`.
pub fn block_determinant(m: &CMatrix) -> Result<f64> {
    if m.nrows() != 4 || m.ncols() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "expected 4x4, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let outer = |i: usize| i == 0 || i == 3;
    let mut worst = 0.0_f64;
    for i in 0..4 {
        for j in 0..4 {
            if outer(i) != outer(j) {
                worst = worst.max(m[(i, j)].norm());
            }
        }
    }
    if worst > 1e-12 {
        return Err(Error::PatternViolation(worst));
    }
    let first = m[(0, 0)] * m[(3, 3)] - m[(0, 3)] * m[(3, 0)];
    let second = m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)];
    Ok((first * second).re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::PhaseSpaceContext;
    use crate::linalg::min_eigenvalue;

    fn cost(a: f64, b: f64, h: f64) -> SymmetricPairCost {
        SymmetricPairCost::closed_form(&PhaseSpaceContext::new(h).unwrap(), a, b)
    }

    #[test]
    fn optimum_is_at_lambda_mu() {
        for (a, b, h) in [(1.0, 2.0, 1.0), (0.5, 1.0, 0.25), (0.5, 2.0, 4.0)] {
            let c = cost(a, b, h);
            let (p, max) = maximize_inner(c.lambda, c.mu);
            assert!((p - c.lambda * c.mu).abs() < 1e-6, "{p}");
            let root = ((1.0 - c.lambda.powi(2)) * (1.0 - c.mu.powi(2))).sqrt();
            let t = -2.0 * a * b / root * max;
            assert!((t + 4.0 * a * b).abs() < 1e-9);
            let q = AnsatzParameters::optimal(c.lambda, c.mu);
            assert!((q.big_u() - root).abs() < 1e-14);
            assert!((q.big_v() - root).abs() < 1e-14);
            assert!((q.trace_cost(&c) - (a - b).powi(2)).abs() < 1e-9);
            assert!((q.trace_cost_closed_form(&c) - q.trace_cost(&c)).abs() < 1e-9);
        }
    }

    #[test]
    fn window_matches_positivity() {
        let c = cost(1.0, 2.0, 1.0);
        for &(p, u, v) in &[(0.0, -0.2, -0.2), (0.5, 0.0, -0.9), (-0.5, -0.8, 0.3)] {
            let q = AnsatzParameters::new(p, u, v).unwrap();
            let psd = min_eigenvalue(&q.matrix(c.lambda, c.mu)).unwrap() >= -1e-12;
            assert_eq!(q.is_feasible(c.lambda, c.mu), psd, "{q:?}");
        }
        assert!(AnsatzParameters::saturating(5.0, c.lambda, c.mu).is_err());
    }

    #[test]
    fn saturated_ansatz_is_singular() {
        let c = cost(1.0, 2.0, 1.0);
        let q = AnsatzParameters::saturating(0.1, c.lambda, c.mu).unwrap();
        let m = q.matrix(c.lambda, c.mu);
        assert!(block_determinant(&m).unwrap().abs() < 1e-14);
        assert!(min_eigenvalue(&m).unwrap().abs() < 1e-12);
    }

    #[test]
    fn block_determinant_rejects_pattern_violation() {
        let mut m = CMatrix::identity(4, 4);
        assert!((block_determinant(&m).unwrap() - 1.0).abs() < 1e-15);
        m[(0, 1)] = C64::new(1e-6, 0.0);
        assert!(matches!(
            block_determinant(&m),
            Err(Error::PatternViolation(_))
        ));
        assert!(block_determinant(&checkerboard_quarter()).unwrap().abs() < 1e-15);
    }
}
