//! Dense linear-algebra kernels: thin SVD, symmetric eigensolve,
//! rank-revealing orthonormalization and residual projection.
//!
//! Every numerical tolerance in the crate lives here; the modules above are
//! tolerance-free math on the results.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::{Matrix, SpectrumView};

/// Numerical tolerances for rank decisions and eigenvalue clamping.
///
/// `rank_tol_factor` scales the rank cutoff `rank_tol_factor * max(rows, cols)
/// * sigma_max`. `eig_clamp` is the relative window in which slightly negative
/// eigenvalues of a Gram matrix are clamped to zero; anything more negative is
/// rejected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    rank_tol_factor: f64,
    eig_clamp: f64,
}

impl Tolerances {
    pub fn new(rank_tol_factor: f64, eig_clamp: f64) -> Result<Self> {
        if !(rank_tol_factor > 0.0 && rank_tol_factor < 1e-3) {
            return Err(Error::InvalidTolerance(
                "rank_tol_factor must lie in (0, 1e-3)",
            ));
        }
        if !(eig_clamp > 0.0 && eig_clamp < 1e-3) {
            return Err(Error::InvalidTolerance("eig_clamp must lie in (0, 1e-3)"));
        }
        Ok(Self {
            rank_tol_factor,
            eig_clamp,
        })
    }

    pub fn rank_tol_factor(&self) -> f64 {
        self.rank_tol_factor
    }

    pub fn eig_clamp(&self) -> f64 {
        self.eig_clamp
    }

    /// Rank cutoff for a matrix with the given extent and leading singular value.
    pub(crate) fn rank_cutoff(&self, max_dim: usize, sigma_max: f64) -> f64 {
        self.rank_tol_factor * max_dim as f64 * sigma_max
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank_tol_factor: 1e2 * f64::EPSILON,
            eig_clamp: 1e-12,
        }
    }
}

// Cyclic Jacobi converges quadratically; these caps are never reached on
// sane input and turn silent stagnation into an explicit error.
const MAX_JACOBI_SWEEPS: usize = 64;

fn column_moments(w: &DMatrix<f64>, p: usize, q: usize) -> (f64, f64, f64) {
    let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
    for i in 0..w.nrows() {
        let (a, b) = (w[(i, p)], w[(i, q)]);
        alpha += a * a;
        beta += b * b;
        gamma += a * b;
    }
    (alpha, beta, gamma)
}

fn rotate_columns(w: &mut DMatrix<f64>, p: usize, q: usize, c: f64, s: f64) {
    for i in 0..w.nrows() {
        let (a, b) = (w[(i, p)], w[(i, q)]);
        w[(i, p)] = c * a - s * b;
        w[(i, q)] = s * a + c * b;
    }
}

/// One-sided Jacobi sweeps: rotates column pairs of `w` until all pairs are
/// orthogonal to machine precision, mirroring every rotation into `v`.
///
/// Columns whose norm falls below `eps * ||W||_F` are numerically zero;
/// they are frozen rather than rotated, otherwise rounding debris from
/// rank-deficient inputs keeps re-exciting the sweep forever. Returns the
/// zero floor so extraction can treat frozen columns consistently.
fn jacobi_orthogonalize(w: &mut DMatrix<f64>, mut v: Option<&mut DMatrix<f64>>) -> Result<f64> {
    let floor = f64::EPSILON * w.iter().map(|x| x * x).sum::<f64>().sqrt();
    let floor_sq = floor * floor;
    let n = w.ncols();
    if n < 2 {
        return Ok(floor);
    }
    for _ in 0..MAX_JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let (alpha, beta, gamma) = column_moments(w, p, q);
                if alpha <= floor_sq || beta <= floor_sq {
                    continue;
                }
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_columns(w, p, q, c, s);
                if let Some(v) = v.as_deref_mut() {
                    rotate_columns(v, p, q, c, s);
                }
            }
        }
        if !rotated {
            return Ok(floor);
        }
    }
    Err(Error::SvdNonConvergence {
        rows: w.nrows(),
        cols: n,
    })
}

/// Fills column `col` of `u` with a unit vector orthogonal to all columns
/// before it, chosen deterministically from the standard basis.
fn complete_orthonormal_column(u: &mut DMatrix<f64>, col: usize) {
    let m = u.nrows();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for k in 0..m {
        let mut candidate = vec![0.0; m];
        candidate[k] = 1.0;
        for j in 0..col {
            let dot: f64 = (0..m).map(|i| u[(i, j)] * candidate[i]).sum();
            for i in 0..m {
                candidate[i] -= dot * u[(i, j)];
            }
        }
        let norm_sq: f64 = candidate.iter().map(|x| x * x).sum();
        if best.as_ref().map_or(true, |(b, _)| norm_sq > *b) {
            best = Some((norm_sq, candidate));
        }
    }
    let (norm_sq, mut candidate) = best.expect("m > 0");
    let norm = norm_sq.sqrt();
    // One re-orthogonalization pass keeps the completion crisp.
    for x in candidate.iter_mut() {
        *x /= norm;
    }
    for j in 0..col {
        let dot: f64 = (0..m).map(|i| u[(i, j)] * candidate[i]).sum();
        for i in 0..m {
            candidate[i] -= dot * u[(i, j)];
        }
    }
    let norm: f64 = candidate.iter().map(|x| x * x).sum::<f64>().sqrt();
    for (i, x) in candidate.iter().enumerate() {
        u[(i, col)] = x / norm;
    }
}

/// Thin SVD on the raw backing type via one-sided Jacobi; singular values
/// sorted non-increasing. Returns `(u, values, v)` with `u: rows x p`,
/// `v: cols x p`, `p = min(rows, cols)`.
pub(crate) fn svd_dm(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>, DMatrix<f64>)> {
    let (rows, cols) = (m.nrows(), m.ncols());
    if cols == 0 {
        return Ok((
            DMatrix::zeros(rows, 0),
            Vec::new(),
            DMatrix::zeros(0, 0),
        ));
    }
    if rows < cols {
        let (u_t, values, v_t) = svd_dm(&m.transpose())?;
        return Ok((v_t, values, u_t));
    }

    let mut w = m.clone();
    let mut v = DMatrix::identity(cols, cols);
    let floor = jacobi_orthogonalize(&mut w, Some(&mut v))?;

    let norms: Vec<f64> = (0..cols)
        .map(|j| {
            let norm = (0..rows).map(|i| w[(i, j)].powi(2)).sum::<f64>().sqrt();
            if norm > floor {
                norm
            } else {
                0.0
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));

    let values: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let v_sorted = DMatrix::from_fn(cols, cols, |i, j| v[(i, order[j])]);
    let mut u = DMatrix::zeros(rows, cols);
    for (j, &src) in order.iter().enumerate() {
        if values[j] > 0.0 {
            for i in 0..rows {
                u[(i, j)] = w[(i, src)] / values[j];
            }
        } else {
            complete_orthonormal_column(&mut u, j);
        }
    }
    Ok((u, values, v_sorted))
}

pub(crate) fn singular_values_dm(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let (rows, cols) = (m.nrows(), m.ncols());
    if cols == 0 {
        return Ok(Vec::new());
    }
    // The sweep needs the narrow orientation only for speed.
    let mut w = if rows < cols { m.transpose() } else { m.clone() };
    let floor = jacobi_orthogonalize(&mut w, None)?;
    let mut values: Vec<f64> = (0..w.ncols())
        .map(|j| {
            let norm = (0..w.nrows())
                .map(|i| w[(i, j)].powi(2))
                .sum::<f64>()
                .sqrt();
            if norm > floor {
                norm
            } else {
                0.0
            }
        })
        .collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// Thin SVD `M = U diag(S) V^T` with `S` sorted non-increasing.
pub fn thin_svd(m: &Matrix) -> Result<(Matrix, SpectrumView, Matrix)> {
    if m.cols() == 0 {
        return Err(Error::EmptyInput("thin_svd needs at least one column"));
    }
    let (u, values, v) = svd_dm(m.as_dmatrix())?;
    Ok((
        Matrix::from_dmatrix(u),
        SpectrumView::from_sorted_unchecked(values),
        Matrix::from_dmatrix(v),
    ))
}

/// Singular values only, sorted non-increasing.
pub fn singular_values(m: &Matrix) -> Result<SpectrumView> {
    if m.cols() == 0 {
        return Ok(SpectrumView::from_sorted_unchecked(Vec::new()));
    }
    Ok(SpectrumView::from_sorted_unchecked(singular_values_dm(
        m.as_dmatrix(),
    )?))
}

/// Cyclic two-sided Jacobi eigendecomposition of a symmetric matrix.
/// Returns unsorted eigenvalues on the diagonal accumulator and the
/// orthonormal eigenvector matrix.
fn jacobi_sym_eig(s: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = s.nrows();
    let mut a = s.clone();
    let mut v = DMatrix::identity(n, n);
    if n >= 2 {
        let mut converged = false;
        for _ in 0..MAX_JACOBI_SWEEPS {
            let mut rotated = false;
            for p in 0..n - 1 {
                for q in p + 1..n {
                    let apq = a[(p, q)];
                    if apq == 0.0
                        || apq.abs() <= 0.5 * f64::EPSILON * (a[(p, p)].abs() + a[(q, q)].abs())
                    {
                        continue;
                    }
                    rotated = true;
                    let tau = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                    let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let sn = c * t;
                    let (app, aqq) = (a[(p, p)], a[(q, q)]);
                    a[(p, p)] = app - t * apq;
                    a[(q, q)] = aqq + t * apq;
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    for i in 0..n {
                        if i == p || i == q {
                            continue;
                        }
                        let (aip, aiq) = (a[(i, p)], a[(i, q)]);
                        a[(i, p)] = c * aip - sn * aiq;
                        a[(i, q)] = sn * aip + c * aiq;
                        a[(p, i)] = a[(i, p)];
                        a[(q, i)] = a[(i, q)];
                    }
                    rotate_columns(&mut v, p, q, c, sn);
                }
            }
            if !rotated {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::EigNonConvergence { dim: n });
        }
    }
    Ok((a.diagonal().iter().copied().collect(), v))
}

/// Eigendecomposition of a symmetric PSD matrix on the raw backing type.
///
/// Eigenvalues come back sorted non-increasing. Values in
/// `[-eig_clamp * lambda_max, 0)` are clamped to zero; anything below that
/// window is an error since callers only ever pass Gram matrices.
pub(crate) fn sym_eig_desc_dm(
    s: &DMatrix<f64>,
    tol: &Tolerances,
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let dim = s.nrows();
    if dim != s.ncols() {
        return Err(Error::DimensionMismatch {
            context: "sym_eig_desc (square matrix required)",
            expected: dim,
            found: s.ncols(),
        });
    }
    if dim == 0 {
        return Ok((Vec::new(), DMatrix::zeros(0, 0)));
    }
    let scale = s.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let asym = (s - s.transpose()).iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if asym > 1e-10 * (1.0 + scale) {
        return Err(Error::NotSymmetric { dim });
    }
    let symmetrized = (s + s.transpose()) * 0.5;
    let (raw, vectors) = jacobi_sym_eig(&symmetrized)?;

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| raw[b].total_cmp(&raw[a]).then(a.cmp(&b)));
    let max_abs = raw.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let limit = tol.eig_clamp * max_abs;
    let mut values = Vec::with_capacity(dim);
    for &i in &order {
        let lambda = raw[i];
        if lambda < -limit {
            return Err(Error::NotPositiveSemidefinite {
                value: lambda,
                limit,
            });
        }
        values.push(lambda.max(0.0));
    }
    let sorted_vectors = DMatrix::from_fn(dim, dim, |i, j| vectors[(i, order[j])]);
    Ok((values, sorted_vectors))
}

/// Symmetric PSD eigendecomposition with eigenvalues sorted non-increasing.
pub fn sym_eig_desc(s: &Matrix, tol: &Tolerances) -> Result<(SpectrumView, Matrix)> {
    let (values, vectors) = sym_eig_desc_dm(s.as_dmatrix(), tol)?;
    Ok((
        SpectrumView::from_sorted_unchecked(values),
        Matrix::from_dmatrix(vectors),
    ))
}

/// Orthonormal basis for the numerical range of `M`.
///
/// A direction is retained iff its singular value exceeds
/// `rank_tol_factor * max(rows, cols) * sigma_max(M)`; the result may have
/// zero columns when `M` is numerically zero.
pub fn orthonormal_basis(m: &Matrix, tol: &Tolerances) -> Result<Matrix> {
    if m.cols() == 0 {
        return Ok(Matrix::zeros(m.rows(), 0));
    }
    let (u, values, _v) = svd_dm(m.as_dmatrix())?;
    let sigma_max = values.first().copied().unwrap_or(0.0);
    let cutoff = tol.rank_cutoff(m.rows().max(m.cols()), sigma_max);
    let rank = values.iter().take_while(|&&s| s > cutoff).count();
    Ok(Matrix::from_dmatrix(u.columns(0, rank).into_owned()))
}

/// Residual `(I - Q Q^T) A` on the raw backing type, with one
/// re-orthogonalization pass. `Q` spanning the full space short-circuits to
/// an exact zero.
pub(crate) fn project_residual_dm(q: &DMatrix<f64>, a: &DMatrix<f64>) -> DMatrix<f64> {
    debug_assert_eq!(q.nrows(), a.nrows());
    if q.ncols() == 0 {
        return a.clone();
    }
    if q.ncols() >= q.nrows() {
        return DMatrix::zeros(a.nrows(), a.ncols());
    }
    let r = a - q * (q.transpose() * a);
    &r - q * (q.transpose() * &r)
}

/// Residual `R = (I - Q Q^T) A` for an orthonormal `Q`.
pub fn project_residual(q: &Matrix, a: &Matrix) -> Result<Matrix> {
    if q.rows() != a.rows() {
        return Err(Error::DimensionMismatch {
            context: "project_residual",
            expected: q.rows(),
            found: a.rows(),
        });
    }
    Ok(Matrix::from_dmatrix(project_residual_dm(
        q.as_dmatrix(),
        a.as_dmatrix(),
    )))
}

/// Exact rank-`r` truncation error `sqrt(sum_{j>r} sigma_j^2)`.
///
/// This is the oracle every bound in the crate is tested against.
pub fn exact_trunc_error(m: &Matrix, r: usize) -> Result<f64> {
    if m.cols() == 0 {
        return Ok(0.0);
    }
    let values = singular_values_dm(m.as_dmatrix())?;
    // Summing the tail smallest-first keeps the oracle accurate.
    let tail_sq: f64 = values.iter().skip(r).rev().map(|v| v * v).sum();
    Ok(tail_sq.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{orthonormal_from_seed, random_matrix, rng_for};
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    #[test]
    fn thin_svd_identity() {
        let (_, s, _) = thin_svd(&Matrix::identity(3)).unwrap();
        assert_eq!(s.values(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn thin_svd_rank_one() {
        // 5 * u v^T with unit u, v.
        let u = [0.6, 0.0, 0.8];
        let v = [0.0, 1.0, 0.0];
        let m = Matrix::from_fn(3, 3, |i, j| 5.0 * u[i] * v[j]);
        let (_, s, _) = thin_svd(&m).unwrap();
        assert!((s.get(0) - 5.0).abs() < 1e-12);
        assert!(s.get(1) < 1e-12);
        assert!(s.get(2) < 1e-12);
    }

    #[test]
    fn thin_svd_reconstructs() {
        let m = random_matrix(8, 5, 1.0, &mut rng_for(11));
        let (u, s, v) = thin_svd(&m).unwrap();
        let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(s.values().to_vec()));
        let recon = u.as_dmatrix() * diag * v.as_dmatrix().transpose();
        let err = (&recon - m.as_dmatrix()).norm();
        assert!(err <= 1e-10 * m.frobenius_norm());
        // U and V have min(rows, cols) orthonormal columns.
        assert_eq!(u.cols(), 5);
        assert_eq!(v.cols(), 5);
        let eye = DMatrix::<f64>::identity(5, 5);
        assert!(max_abs_diff(&(u.as_dmatrix().transpose() * u.as_dmatrix()), &eye) < 1e-12);
        assert!(max_abs_diff(&(v.as_dmatrix().transpose() * v.as_dmatrix()), &eye) < 1e-12);
    }

    #[test]
    fn thin_svd_rejects_zero_columns() {
        assert!(thin_svd(&Matrix::zeros(3, 0)).is_err());
    }

    #[test]
    fn sym_eig_diagonal() {
        let s = Matrix::from_column_major(2, 2, vec![4.0, 0.0, 0.0, 1.0]).unwrap();
        let (lambda, _) = sym_eig_desc(&s, &Tolerances::default()).unwrap();
        assert_eq!(lambda.values(), &[4.0, 1.0]);
    }

    #[test]
    fn sym_eig_recovers_constructed_spectrum() {
        let q = orthonormal_from_seed(3, 3, 5);
        let lambda = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![9.0, 4.0, 1.0]));
        let s = Matrix::from_dmatrix(q.as_dmatrix() * lambda * q.as_dmatrix().transpose());
        let (values, vectors) = sym_eig_desc(&s, &Tolerances::default()).unwrap();
        for (got, want) in values.values().iter().zip([9.0, 4.0, 1.0]) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
        let eye = DMatrix::<f64>::identity(3, 3);
        let vtv = vectors.as_dmatrix().transpose() * vectors.as_dmatrix();
        assert!(max_abs_diff(&vtv, &eye) < 1e-10);
    }

    #[test]
    fn sym_eig_zero_matrix() {
        let (lambda, _) = sym_eig_desc(&Matrix::zeros(2, 2), &Tolerances::default()).unwrap();
        assert_eq!(lambda.values(), &[0.0, 0.0]);
    }

    #[test]
    fn sym_eig_rejects_asymmetric_and_indefinite() {
        let tol = Tolerances::default();
        let asym = Matrix::from_column_major(2, 2, vec![1.0, 0.5, 0.0, 1.0]).unwrap();
        assert!(matches!(sym_eig_desc(&asym, &tol), Err(Error::NotSymmetric { .. })));
        let indef = Matrix::from_column_major(2, 2, vec![1.0, 0.0, 0.0, -1.0]).unwrap();
        assert!(matches!(
            sym_eig_desc(&indef, &tol),
            Err(Error::NotPositiveSemidefinite { .. })
        ));
    }

    #[test]
    fn sym_eig_clamps_tiny_negatives() {
        let eps = 1e-14;
        let s = Matrix::from_column_major(2, 2, vec![1.0, 0.0, 0.0, -eps]).unwrap();
        let (lambda, _) = sym_eig_desc(&s, &Tolerances::default()).unwrap();
        assert_eq!(lambda.get(1), 0.0);
    }

    #[test]
    fn orthonormal_basis_zero_matrix() {
        let q = orthonormal_basis(&Matrix::zeros(4, 2), &Tolerances::default()).unwrap();
        assert_eq!(q.cols(), 0);
    }

    #[test]
    fn orthonormal_basis_duplicated_column() {
        let m = Matrix::from_fn(4, 2, |i, _| if i == 0 { 1.0 } else { 0.0 });
        let q = orthonormal_basis(&m, &Tolerances::default()).unwrap();
        assert_eq!(q.cols(), 1);
        assert!((q.get(0, 0).abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthonormal_basis_detects_rank_by_construction() {
        let mut rng = rng_for(21);
        let left = random_matrix(6, 2, 1.0, &mut rng);
        let right = random_matrix(2, 4, 1.0, &mut rng);
        let m = Matrix::from_dmatrix(left.as_dmatrix() * right.as_dmatrix());
        let q = orthonormal_basis(&m, &Tolerances::default()).unwrap();
        assert_eq!(q.cols(), 2);
        let eye = DMatrix::<f64>::identity(2, 2);
        assert!(max_abs_diff(&(q.as_dmatrix().transpose() * q.as_dmatrix()), &eye) <= 1e-12);
    }

    #[test]
    fn project_residual_contained_range() {
        let mut rng = rng_for(31);
        let a = random_matrix(6, 3, 1.0, &mut rng);
        let q = orthonormal_basis(&a, &Tolerances::default()).unwrap();
        let r = project_residual(&q, &a).unwrap();
        assert!(r.frobenius_norm() <= 1e-10 * a.frobenius_norm());
    }

    #[test]
    fn project_residual_orthogonal_input() {
        let q = Matrix::from_fn(3, 1, |i, _| if i == 0 { 1.0 } else { 0.0 });
        let a = Matrix::from_fn(3, 3, |i, j| if i == 1 { (j + 1) as f64 } else { 0.0 });
        let r = project_residual(&q, &a).unwrap();
        assert_eq!(r.as_slice(), a.as_slice());
    }

    #[test]
    fn project_residual_pythagoras() {
        let q = orthonormal_from_seed(8, 3, 41);
        let a = random_matrix(8, 4, 1.0, &mut rng_for(42));
        let r = project_residual(&q, &a).unwrap();
        let projected = q.as_dmatrix() * (q.as_dmatrix().transpose() * a.as_dmatrix());
        let lhs = a.frobenius_sq();
        let rhs = projected.norm_squared() + r.frobenius_sq();
        assert!((lhs - rhs).abs() <= 1e-9 * lhs);
        // Q^T R vanishes after the re-orthogonalization pass.
        let qtr = q.as_dmatrix().transpose() * r.as_dmatrix();
        assert!(qtr.norm() <= 1e-10 * a.frobenius_norm());
    }

    #[test]
    fn project_residual_empty_basis_and_mismatch() {
        let a = random_matrix(5, 2, 1.0, &mut rng_for(43));
        let r = project_residual(&Matrix::zeros(5, 0), &a).unwrap();
        assert_eq!(r.as_slice(), a.as_slice());
        assert!(project_residual(&Matrix::zeros(4, 0), &a).is_err());
    }

    #[test]
    fn exact_trunc_error_examples() {
        let mut rng = rng_for(51);
        let m = random_matrix(6, 4, 1.0, &mut rng);
        assert_eq!(exact_trunc_error(&m, 4).unwrap(), 0.0);
        assert!((exact_trunc_error(&m, 0).unwrap() - m.frobenius_norm()).abs() < 1e-12);
        let d = Matrix::from_fn(3, 3, |i, j| if i == j { (3 - i) as f64 } else { 0.0 });
        assert!((exact_trunc_error(&d, 1).unwrap() - 5.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn energy_split_identity() {
        // E_r^2 + head energy = total energy, for every r.
        let mut rng = rng_for(61);
        for _ in 0..8 {
            let rows = rng.random_range(3..10);
            let cols = rng.random_range(1..8);
            let m = random_matrix(rows, cols, 1.0, &mut rng);
            let s = singular_values(&m).unwrap();
            let total = m.frobenius_sq();
            for r in 0..=s.len() {
                let err = exact_trunc_error(&m, r).unwrap();
                let head = s.head_energy_sq(r);
                assert!((err * err + head - total).abs() <= 1e-9 * total.max(1e-300));
            }
        }
    }

    #[test]
    fn appending_blocks_never_decreases_singular_values() {
        let mut rng = rng_for(71);
        let normal = StandardNormal;
        for _ in 0..8 {
            let m = random_matrix(7, 4, 1.0, &mut rng);
            let extra_cols = rng.random_range(1..4);
            let b = Matrix::from_fn(7, extra_cols, |_, _| normal.sample(&mut rng));
            let joined = Matrix::hcat(&[&m, &b]).unwrap();
            let before = singular_values(&m).unwrap();
            let after = singular_values(&joined).unwrap();
            let sigma1 = after.get(0);
            for j in 0..before.len() {
                assert!(after.get(j) >= before.get(j) - 1e-10 * sigma1);
            }
        }
    }
}
