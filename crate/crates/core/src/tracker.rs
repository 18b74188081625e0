//! Incremental spectral state for a growing concatenation, maintained
//! block-by-block without ever forming the concatenated matrix.
//!
//! [`ResidualTracker`] pools the singular values of each block's orthogonal
//! residual; the residual ranges are pairwise orthogonal, so the pooled
//! multiset equals the spectrum of the concatenated residuals and certifies
//! a lower bound on every singular value of the concatenation.
//! [`GramTracker`] keeps a compressed factorization `Q S Q^T` of the Gram
//! matrix and optionally truncates it back to a target rank after each
//! append.

use nalgebra::DMatrix;

use crate::bounds::{plugin_estimate, residual_bound, BoundValue};
use crate::collection::Block;
use crate::error::{Error, Result};
use crate::linalg::{project_residual_dm, svd_dm, sym_eig_desc_dm, Tolerances};
use crate::matrix::{Matrix, SpectrumView};

fn check_rows(context: &'static str, expected: usize, block: &Block) -> Result<()> {
    if block.rows() != expected {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            found: block.rows(),
        });
    }
    Ok(())
}

fn residual_norm_against(q: &DMatrix<f64>, block: &Block) -> f64 {
    project_residual_dm(q, block.matrix().as_dmatrix()).norm()
}

/// Exact residual accumulator: orthonormal basis of everything appended so
/// far plus the pooled multiset of squared residual singular values.
///
/// The basis is never truncated; dropping only the numerically-zero residual
/// directions keeps the certified bound sound.
#[derive(Debug, Clone)]
pub struct ResidualTracker {
    rows: usize,
    basis_q: DMatrix<f64>,
    mu_sq: Vec<f64>,
    total_energy_sq: f64,
    member_ids: Vec<String>,
    tol: Tolerances,
}

impl ResidualTracker {
    pub fn new(rows: usize, tol: Tolerances) -> Self {
        assert!(rows > 0, "row dimension must be positive");
        Self {
            rows,
            basis_q: DMatrix::zeros(rows, 0),
            mu_sq: Vec::new(),
            total_energy_sq: 0.0,
            member_ids: Vec::new(),
            tol,
        }
    }

    pub fn with_defaults(rows: usize) -> Self {
        Self::new(rows, Tolerances::default())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn basis_rank(&self) -> usize {
        self.basis_q.ncols()
    }

    pub fn basis(&self) -> Matrix {
        Matrix::from_column_major(
            self.rows,
            self.basis_q.ncols(),
            self.basis_q.as_slice().to_vec(),
        )
        .expect("basis is finite")
    }

    /// Pooled squared residual singular values, sorted non-increasing.
    pub fn mu_sq(&self) -> &[f64] {
        &self.mu_sq
    }

    pub fn total_energy_sq(&self) -> f64 {
        self.total_energy_sq
    }

    pub fn member_ids(&self) -> &[String] {
        &self.member_ids
    }

    /// Appends a block: projects it against the current basis, pools the
    /// residual singular values and extends the basis by the residual range.
    pub fn append(&mut self, block: &Block) -> Result<()> {
        check_rows("residual tracker append", self.rows, block)?;
        let a = block.matrix().as_dmatrix();
        let residual = project_residual_dm(&self.basis_q, a);
        if residual.ncols() > 0 {
            let (u, values, _v) = svd_dm(&residual)?;
            // Directions below the rank cutoff of the block are projection
            // noise: keep their energy in the total but not in the pool.
            let cutoff = self
                .tol
                .rank_cutoff(self.rows.max(block.cols()), block.energy_sq().sqrt());
            let kept = values.iter().take_while(|&&s| s > cutoff).count();
            if kept > 0 {
                for s in &values[..kept] {
                    self.mu_sq.push(s * s);
                }
                self.mu_sq.sort_by(|a, b| b.total_cmp(a));
                let mut extended =
                    DMatrix::zeros(self.rows, self.basis_q.ncols() + kept);
                extended
                    .columns_mut(0, self.basis_q.ncols())
                    .copy_from(&self.basis_q);
                extended
                    .columns_mut(self.basis_q.ncols(), kept)
                    .copy_from(&u.columns(0, kept));
                self.basis_q = extended;
            }
        }
        self.total_energy_sq += block.energy_sq();
        self.member_ids.push(block.id().to_string());
        Ok(())
    }

    /// The `r` largest pooled values as singular values, zero-padded to `r`.
    pub fn top_mu(&self, r: usize) -> SpectrumView {
        let mut values: Vec<f64> = self.mu_sq.iter().take(r).map(|v| v.sqrt()).collect();
        values.resize(r, 0.0);
        SpectrumView::from_sorted_unchecked(values)
    }

    /// Certified upper bound on the rank-`r` truncation error of the
    /// concatenation of all appended blocks.
    pub fn certified_bound(&self, r: usize) -> BoundValue {
        residual_bound(self.total_energy_sq, &self.top_mu(r), r)
    }

    /// Frobenius norm of `(I - Q Q^T) A` against the current basis; read-only.
    pub fn residual_norm_of(&self, block: &Block) -> Result<f64> {
        check_rows("residual norm", self.rows, block)?;
        Ok(residual_norm_against(&self.basis_q, block))
    }
}

/// Compressed incremental Gram factorization `Q S Q^T` of the concatenation's
/// Gram matrix, with truncation back to `target_rank` as a separate step.
#[derive(Debug, Clone)]
pub struct GramTracker {
    rows: usize,
    target_rank: usize,
    basis_q: DMatrix<f64>,
    gram_s: DMatrix<f64>,
    total_energy_sq: f64,
    discarded_energy: f64,
    member_ids: Vec<String>,
    tol: Tolerances,
}

impl GramTracker {
    pub fn new(rows: usize, target_rank: usize, tol: Tolerances) -> Self {
        assert!(rows > 0, "row dimension must be positive");
        assert!(target_rank > 0, "target rank must be positive");
        Self {
            rows,
            target_rank,
            basis_q: DMatrix::zeros(rows, 0),
            gram_s: DMatrix::zeros(0, 0),
            total_energy_sq: 0.0,
            discarded_energy: 0.0,
            member_ids: Vec::new(),
            tol,
        }
    }

    pub fn with_defaults(rows: usize, target_rank: usize) -> Self {
        Self::new(rows, target_rank, Tolerances::default())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn target_rank(&self) -> usize {
        self.target_rank
    }

    pub fn basis_rank(&self) -> usize {
        self.basis_q.ncols()
    }

    pub fn total_energy_sq(&self) -> f64 {
        self.total_energy_sq
    }

    /// Eigenvalue mass dropped by truncation so far; diagnostics only.
    pub fn discarded_energy(&self) -> f64 {
        self.discarded_energy
    }

    pub fn member_ids(&self) -> &[String] {
        &self.member_ids
    }

    /// The tracked Gram product `Q S Q^T` as an `m x m` matrix.
    pub fn gram_product(&self) -> Matrix {
        if self.basis_q.ncols() == 0 {
            return Matrix::zeros(self.rows, self.rows);
        }
        Matrix::from_dmatrix(&self.basis_q * &self.gram_s * self.basis_q.transpose())
    }

    /// Exact extended update: decompose the block into in-span and residual
    /// parts, grow the basis by the residual range and extend the Gram block
    /// structure accordingly. No truncation happens here.
    pub fn append(&mut self, block: &Block) -> Result<()> {
        check_rows("gram tracker append", self.rows, block)?;
        let a = block.matrix().as_dmatrix();
        let k = self.basis_q.ncols();
        let n = a.ncols();

        // Two projection passes; the correction feeds back into Y so the
        // factorization identity stays exact.
        let y1 = self.basis_q.transpose() * a;
        let r1 = a - &self.basis_q * &y1;
        let correction = self.basis_q.transpose() * &r1;
        let residual = &r1 - &self.basis_q * &correction;
        let y = y1 + correction;

        let (kept, q_res, b) = if n == 0 || k >= self.rows {
            (0, DMatrix::zeros(self.rows, 0), DMatrix::zeros(0, n))
        } else {
            let (u, values, v) = svd_dm(&residual)?;
            let cutoff = self
                .tol
                .rank_cutoff(self.rows.max(n), block.energy_sq().sqrt());
            let kept = values.iter().take_while(|&&s| s > cutoff).count();
            let q_res = u.columns(0, kept).into_owned();
            // B = diag(sigma) V^T restricted to the kept directions.
            let mut b = v.columns(0, kept).transpose();
            for (i, s) in values[..kept].iter().enumerate() {
                b.row_mut(i).scale_mut(*s);
            }
            (kept, q_res, b)
        };

        let mut s_next = DMatrix::zeros(k + kept, k + kept);
        if k > 0 {
            s_next
                .view_mut((0, 0), (k, k))
                .copy_from(&(&self.gram_s + &y * y.transpose()));
        }
        if kept > 0 {
            let yb = &y * b.transpose();
            s_next.view_mut((0, k), (k, kept)).copy_from(&yb);
            s_next.view_mut((k, 0), (kept, k)).copy_from(&yb.transpose());
            s_next
                .view_mut((k, k), (kept, kept))
                .copy_from(&(&b * b.transpose()));
        }

        let mut q_next = DMatrix::zeros(self.rows, k + kept);
        q_next.columns_mut(0, k).copy_from(&self.basis_q);
        if kept > 0 {
            q_next.columns_mut(k, kept).copy_from(&q_res);
        }

        self.basis_q = q_next;
        self.gram_s = s_next;
        self.total_energy_sq += block.energy_sq();
        self.member_ids.push(block.id().to_string());
        Ok(())
    }

    /// Keeps the top `target_rank` eigenpairs of the tracked Gram matrix;
    /// the discarded eigenvalue mass is recorded for diagnostics.
    pub fn truncate(&mut self) -> Result<()> {
        let k = self.gram_s.nrows();
        if k == 0 {
            return Ok(());
        }
        let (values, vectors) = sym_eig_desc_dm(&self.gram_s, &self.tol)?;
        let keep = self.target_rank.min(k);
        self.discarded_energy += values[keep..].iter().sum::<f64>();
        self.basis_q = &self.basis_q * vectors.columns(0, keep);
        self.gram_s = DMatrix::from_fn(keep, keep, |i, j| if i == j { values[i] } else { 0.0 });
        Ok(())
    }

    /// Square roots of the tracked eigenvalues, sorted non-increasing and
    /// zero-padded to at least `target_rank`.
    pub fn sigma_tilde(&self) -> Result<SpectrumView> {
        let k = self.gram_s.nrows();
        let mut values = if k == 0 {
            Vec::new()
        } else {
            let (lambda, _) = sym_eig_desc_dm(&self.gram_s, &self.tol)?;
            lambda.iter().map(|l| l.sqrt()).collect()
        };
        if values.len() < self.target_rank {
            values.resize(self.target_rank, 0.0);
        }
        Ok(SpectrumView::from_sorted_unchecked(values))
    }

    /// Plug-in estimate of the rank-`r` truncation error from the tracked
    /// spectrum.
    pub fn estimate(&self, r: usize) -> Result<BoundValue> {
        Ok(plugin_estimate(self.total_energy_sq, &self.sigma_tilde()?, r))
    }

    /// Frobenius norm of `(I - Q Q^T) A` against the current basis; read-only.
    pub fn residual_norm_of(&self, block: &Block) -> Result<f64> {
        check_rows("residual norm", self.rows, block)?;
        Ok(residual_norm_against(&self.basis_q, block))
    }
}
