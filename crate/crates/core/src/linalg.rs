//! Dense Hermitian linear algebra: cyclic Jacobi eigensolver, PSD projection
//! and a few small helpers shared by the solvers.

use crate::{CMatrix, Error, Result, C64};

/// Off-diagonal Frobenius threshold, relative to the matrix norm.
pub const JACOBI_THRESHOLD: f64 = 1e-14;
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Inputs further than this from Hermitian are rejected.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// Eigen-decomposition `m = V diag(w) V†` with ascending `w`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// `V diag(f(w)) V†`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (k, &w) in self.values.iter().enumerate() {
            let fw = f(w);
            for i in 0..n {
                scaled[(i, k)] *= fw;
            }
        }
        &scaled * self.vectors.adjoint()
    }
}

/// Largest entry of `|m − m†|`.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Checks squareness and Hermitian symmetry (relative to the largest entry).
pub fn ensure_hermitian(m: &CMatrix, tolerance: f64) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("matrix entry"));
    }
    let defect = hermitian_defect(m);
    if defect > tolerance * max_abs(m).max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    Ok(())
}

/// `(m + m†)/2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Real inner product `Re trace(a b)` of two Hermitian matrices.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for k in 0..n {
            let x = a[(i, k)];
            let y = b[(k, i)];
            acc += x.re * y.re - x.im * y.im;
        }
    }
    acc
}

pub fn real_trace(m: &CMatrix) -> f64 {
    (0..m.nrows()).map(|i| m[(i, i)].re).sum()
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Kronecker product in row-major pair order: row `(i, j)` maps to `i·n_b + j`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Lifts a real matrix into the complex matrix type.
pub fn complexify(m: &nalgebra::DMatrix<f64>) -> CMatrix {
    m.map(|x| C64::new(x, 0.0))
}

/// Eigenvalues and eigenvectors of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Each rotation first rephases the pivot `a_pq = g·e^{iφ}` to a real value and
/// then applies the classical real rotation, i.e. `J = D P D†` with
/// `D = diag(.., e^{-iφ} at q, ..)`.
pub fn hermitian_eig(m: &CMatrix) -> Result<HermitianEigen> {
    ensure_hermitian(m, HERMITIAN_TOLERANCE)?;
    let n = m.nrows();
    let mut a = hermitian_part(m);
    let mut v = identity(n);
    let scale = a.norm();
    if n == 0 || scale == 0.0 {
        return Ok(sorted(a, v));
    }

    for _sweep in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) <= JACOBI_THRESHOLD * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q, scale);
            }
        }
    }
    Ok(sorted(a, v))
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize, scale: f64) {
    let apq = a[(p, q)];
    let g = apq.norm();
    if g <= f64::EPSILON * 1e-3 * scale {
        return;
    }
    let phase = apq / g;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let tau = (aqq - app) / (2.0 * g);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // J_pp = J_qq = c, J_pq = s e^{iφ}, J_qp = −s e^{−iφ}
    let j_pq = phase * s;
    let j_qp = -phase.conj() * s;
    let n = a.nrows();

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c + akq * j_qp;
        a[(k, q)] = akp * j_pq + akq * c;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c + aqk * j_qp.conj();
        a[(q, k)] = apk * j_pq.conj() + aqk * c;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c + vkq * j_qp;
        v[(k, q)] = vkp * j_pq + vkq * c;
    }
}

fn sorted(a: CMatrix, v: CMatrix) -> HermitianEigen {
    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    HermitianEigen { values, vectors }
}

/// Nearest PSD matrix in Frobenius norm: negative eigenvalues clipped to zero.
pub fn psd_project(m: &CMatrix) -> Result<CMatrix> {
    let eig = hermitian_eig(m)?;
    Ok(hermitian_part(&eig.reconstruct_with(|w| w.max(0.0))))
}

pub fn min_eigenvalue(m: &CMatrix) -> Result<f64> {
    Ok(hermitian_eig(m)?.min())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
        let m = CMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        hermitian_part(&m)
    }

    fn char_poly_det(m: &CMatrix, t: f64) -> f64 {
        // determinant of a Hermitian shift via LU; real for Hermitian input
        let shifted = m - CMatrix::identity(m.nrows(), m.nrows()) * C64::new(t, 0.0);
        shifted.determinant().re
    }

    /// Eigenvalues by bisection on sign changes of det(m − tI), scanning a fine grid.
    fn bisection_roots(m: &CMatrix) -> Vec<f64> {
        let bound = m.norm() + 1.0;
        let steps = 20_000;
        let h = 2.0 * bound / steps as f64;
        let mut roots = Vec::new();
        let mut lo = -bound;
        let mut flo = char_poly_det(m, lo);
        for k in 1..=steps {
            let hi = -bound + k as f64 * h;
            let fhi = char_poly_det(m, hi);
            if flo == 0.0 || flo.signum() != fhi.signum() {
                let (mut a, mut b, mut fa) = (lo, hi, flo);
                for _ in 0..200 {
                    let mid = 0.5 * (a + b);
                    let fm = char_poly_det(m, mid);
                    if fm.signum() == fa.signum() {
                        a = mid;
                        fa = fm;
                    } else {
                        b = mid;
                    }
                }
                roots.push(0.5 * (a + b));
            }
            lo = hi;
            flo = fhi;
        }
        roots
    }

    #[test]
    fn identity_has_unit_spectrum() {
        let eig = hermitian_eig(&identity(5)).unwrap();
        assert!(eig.values.iter().all(|&w| (w - 1.0).abs() < 1e-15));
    }

    #[test]
    fn checkerboard_quarter_matrix_spectrum() {
        let q0 = nalgebra::DMatrix::from_row_slice(
            4,
            4,
            &[
                1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0, 1.0,
            ],
        ) * 0.25;
        let eig = hermitian_eig(&complexify(&q0)).unwrap();
        let expected = [0.0, 0.0, 0.5, 0.5];
        for (w, e) in eig.values.iter().zip(expected) {
            assert!((w - e).abs() < 1e-14, "{w} vs {e}");
        }
    }

    #[test]
    fn random_hermitian_matches_bisection_roots() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = random_hermitian(&mut rng, 6);
        let eig = hermitian_eig(&m).unwrap();
        let recon = eig.reconstruct_with(|w| w);
        assert!((&recon - &m).norm() < 1e-10);
        let unit = eig.vectors.adjoint() * &eig.vectors - identity(6);
        assert!(unit.norm() < 1e-10);
        let roots = bisection_roots(&m);
        assert_eq!(roots.len(), 6);
        for (w, r) in eig.values.iter().zip(&roots) {
            assert!((w - r).abs() < 1e-8, "{w} vs {r}");
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = identity(2);
        m[(0, 1)] = C64::new(1.0, 0.0);
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn psd_projection_clips_negative_part() {
        let m = complexify(&nalgebra::DMatrix::from_diagonal(
            &nalgebra::DVector::from_vec(vec![1.0, -1.0]),
        ));
        let p = psd_project(&m).unwrap();
        assert!((p[(0, 0)].re - 1.0).abs() < 1e-15);
        assert!(p[(1, 1)].norm() < 1e-15);
        assert!(p[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn psd_projection_fixes_psd_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = random_hermitian(&mut rng, 4);
        let m = &g * g.adjoint();
        let p = psd_project(&m).unwrap();
        assert!((&p - &m).norm() < 1e-12);
    }

    #[test]
    fn psd_projection_beats_random_candidates() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = random_hermitian(&mut rng, 5);
        let p = psd_project(&m).unwrap();
        assert!(min_eigenvalue(&p).unwrap() >= -1e-12);
        let best = (&p - &m).norm();
        for _ in 0..10_000 {
            let g = random_hermitian(&mut rng, 5);
            let candidate = &g * g.adjoint() * C64::new(rng.random_range(0.0..1.0), 0.0);
            assert!((&candidate - &m).norm() >= best - 1e-12);
        }
    }
}
